//! Broadband squeezed-vacuum measurement pipeline on synthetic data.
//!
//! The crate simulates the homodyne difference current of a below-threshold
//! optical parametric amplifier swept over the local-oscillator phase,
//! splits the record into spectral bands by Fourier masking, calibrates each
//! band against a vacuum record, and reconstructs the quantum state of every
//! band (density matrix, Wigner function, photon statistics). Spectrum-level
//! analyses (noise-power fitting, total field variances, convolved photon
//! statistics, first-order time correlations) round out the pipeline.
//!
//! Units follow a single convention throughout: quadratures are
//! vacuum-normalized so that the vacuum state has Var(x) = 1/2, and spectral
//! noise powers are quoted relative to the vacuum level (vacuum = 1). A band
//! at phase θ then has variance V(θ) = ½[Ψ₊ cos²(θ−θ₀) + Ψ₋ sin²(θ−θ₀)].
//!
//! With the default `parallel` feature the per-band and per-element loops run
//! on rayon; disabling it yields a dependency-free sequential build with
//! byte-identical output.

pub mod analysis;
pub mod io;
mod optim;
pub mod pattern;
pub mod sim;
pub mod spectral;
pub mod tomography;
pub mod types;
pub mod wigner;

mod fft;
#[cfg(test)]
pub(crate) mod testutil;

pub use types::{
    band_center, to_decibel, AcquisitionConfig, BandDecomposition, BandTrace, BroadbandTrace,
    DensityMatrix, Error, OpaParams, QuadratureSamples, Result, SimSeed, SqueezingSpectrum,
    TraceKind, WignerGrid,
};
