//! Shared domain types, unit conventions, and scalar conversions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A scalar argument is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Invalid parameter set or acquisition configuration.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// Pump parameter at or above the oscillation threshold.
    #[error("pump parameter d = {d} is at or above threshold (d must be < 1)")]
    AboveThreshold { d: f64 },
    /// Vacuum calibration is unusable (zero or near-zero variance).
    #[error("calibration error: {0}")]
    Calibration(String),
    /// Pattern-kernel grid does not span the classical region.
    #[error("kernel grid span {actual} is below the required span {required}")]
    KernelSpan { required: f64, actual: f64 },
    /// Optimizer failed to converge; carries the best point found.
    #[error("fit did not converge (best residual {residual})")]
    FitDiverged {
        residual: f64,
        best: Box<crate::analysis::SpectrumFit>,
    },
    /// Malformed or inconsistent data (trace files, mismatched inputs).
    #[error("data error: {0}")]
    Data(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Physical model parameters of the parametric amplifier and detection chain.
///
/// `pump` is d = sqrt(P/P_th); the noise spectra diverge as d → 1 (threshold).
/// Only the product of escape and detection efficiency enters the observable
/// spectra; both factors are kept so configurations can mirror hardware.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpaParams {
    /// Pump parameter d, dimensionless, 0 ≤ d < 1.
    pub pump: f64,
    /// Cavity half-width at half-maximum Γ, angular frequency (rad/s).
    pub cavity_hwhm: f64,
    /// Escape efficiency ξ of the resonator, in (0, 1].
    pub escape_efficiency: f64,
    /// Detection efficiency η (propagation, mode matching, photodiodes).
    pub detection_efficiency: f64,
    /// Spectral density of the vacuum state; fixed to 1 in vacuum units.
    pub vacuum_density: f64,
}

impl OpaParams {
    pub fn new(pump: f64, cavity_hwhm: f64, xi: f64, eta: f64) -> Result<Self> {
        let p = Self {
            pump,
            cavity_hwhm,
            escape_efficiency: xi,
            detection_efficiency: eta,
            vacuum_density: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pump >= 0.0) {
            return Err(Error::Config(format!("pump parameter {} < 0", self.pump)));
        }
        if self.pump >= 1.0 {
            return Err(Error::AboveThreshold { d: self.pump });
        }
        if !(self.cavity_hwhm > 0.0) {
            return Err(Error::Config("cavity HWHM must be positive".into()));
        }
        let xieta = self.efficiency_product();
        if !(0.0..=1.0).contains(&xieta) {
            return Err(Error::Config(format!(
                "efficiency product xi*eta = {xieta} outside [0, 1]"
            )));
        }
        if !(self.vacuum_density > 0.0) {
            return Err(Error::Config("vacuum density must be positive".into()));
        }
        Ok(())
    }

    /// Overall efficiency ξ·η that scales the observable squeezing.
    pub fn efficiency_product(&self) -> f64 {
        self.escape_efficiency * self.detection_efficiency
    }
}

/// Identifies what a broadband record contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceKind {
    Signal,
    Vacuum,
    /// Per-band normalized samples exported for external tooling.
    BandSamples,
}

impl TraceKind {
    pub fn as_u8(self) -> u8 {
        match self {
            TraceKind::Signal => 0,
            TraceKind::Vacuum => 1,
            TraceKind::BandSamples => 2,
        }
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(TraceKind::Signal),
            1 => Ok(TraceKind::Vacuum),
            2 => Ok(TraceKind::BandSamples),
            other => Err(Error::Data(format!("unknown trace kind {other}"))),
        }
    }
}

/// Acquisition settings for one swept homodyne record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionConfig {
    /// Samples per second.
    pub sample_rate: f64,
    /// Number of samples in the record.
    pub n_samples: usize,
    /// Local-oscillator sweep period T: the phase advances 0 → 2π over T.
    pub sweep_period: f64,
    /// Phase offset θ₀ at t = 0 (rad).
    pub phase_offset: f64,
    /// Optional quantizer resolution; `None` disables the ADC model.
    pub adc_bits: Option<u8>,
    /// Number of equal spectral bands between DC and Nyquist.
    pub n_bands: usize,
}

impl Default for AcquisitionConfig {
    /// Mirrors the experiment: 60 MS/s, 2^19 samples, 2π sweep in 8 ms,
    /// 16 bands over 0-30 MHz.
    fn default() -> Self {
        Self {
            sample_rate: 60e6,
            n_samples: 1 << 19,
            sweep_period: 8e-3,
            phase_offset: 0.0,
            adc_bits: None,
            n_bands: 16,
        }
    }
}

impl AcquisitionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0) {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        if self.n_samples < 2 * self.n_bands {
            return Err(Error::Config(format!(
                "{} samples cannot resolve {} bands",
                self.n_samples, self.n_bands
            )));
        }
        if !(self.sweep_period > 0.0) {
            return Err(Error::Config("sweep period must be positive".into()));
        }
        if self.n_bands < 2 {
            return Err(Error::Config("at least 2 bands required".into()));
        }
        if self.duration() < self.sweep_period {
            return Err(Error::Config(format!(
                "record ({} s) shorter than one full 2π sweep ({} s)",
                self.duration(),
                self.sweep_period
            )));
        }
        if let Some(bits) = self.adc_bits {
            if !(4..=24).contains(&bits) {
                return Err(Error::Config(format!("adc bits {bits} outside [4, 24]")));
            }
        }
        Ok(())
    }

    /// Record length in seconds.
    pub fn duration(&self) -> f64 {
        self.n_samples as f64 / self.sample_rate
    }

    /// Width of one spectral band in Hz: (sample_rate/2) / n_bands.
    pub fn band_width(&self) -> f64 {
        self.sample_rate / 2.0 / self.n_bands as f64
    }

    /// Local-oscillator phase at sample index i, wrapped to [0, 2π).
    pub fn phase_at(&self, i: usize) -> f64 {
        let t = i as f64 / self.sample_rate;
        let two_pi = std::f64::consts::TAU;
        (two_pi * t / self.sweep_period + self.phase_offset).rem_euclid(two_pi)
    }
}

/// Sampled homodyne difference-current record.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadbandTrace {
    pub samples: Vec<f64>,
    pub config: AcquisitionConfig,
    pub kind: TraceKind,
}

impl BroadbandTrace {
    pub fn new(samples: Vec<f64>, config: AcquisitionConfig, kind: TraceKind) -> Result<Self> {
        config.validate()?;
        if samples.len() != config.n_samples {
            return Err(Error::Data(format!(
                "trace holds {} samples, config says {}",
                samples.len(),
                config.n_samples
            )));
        }
        if !samples.iter().all(|v| v.is_finite()) {
            return Err(Error::Data("trace contains non-finite samples".into()));
        }
        Ok(Self {
            samples,
            config,
            kind,
        })
    }

    /// Sample variance about the sample mean.
    pub fn variance(&self) -> f64 {
        variance(&self.samples)
    }
}

pub(crate) fn variance(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// One band-limited real trace produced by Fourier masking.
#[derive(Debug, Clone)]
pub struct BandTrace {
    pub band_index: usize,
    /// Band center Ω (rad/s).
    pub center_frequency: f64,
    pub samples: Vec<f64>,
}

/// Vacuum-normalized quadrature samples paired with their measurement phase.
#[derive(Debug, Clone)]
pub struct QuadratureSamples {
    pub band_index: usize,
    /// Band center Ω (rad/s).
    pub center_frequency: f64,
    /// Quadrature values; a vacuum-input band has Var = 1/2 after calibration.
    pub x: Vec<f64>,
    /// Local-oscillator phase per sample, rad in [0, 2π).
    pub theta: Vec<f64>,
}

impl QuadratureSamples {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// A full spectral decomposition: one calibrated quadrature record per band.
#[derive(Debug, Clone)]
pub struct BandDecomposition {
    pub bands: Vec<QuadratureSamples>,
    /// Bands flagged as discarded carry no samples downstream.
    pub discarded: Vec<bool>,
    /// Calibration factor applied per band (vacuum → Var 1/2).
    pub norm_scales: Vec<f64>,
    pub config: AcquisitionConfig,
}

impl BandDecomposition {
    /// Iterate over bands that survived the discard step.
    pub fn active(&self) -> impl Iterator<Item = &QuadratureSamples> {
        self.bands
            .iter()
            .zip(&self.discarded)
            .filter(|(_, d)| !**d)
            .map(|(b, _)| b)
    }

    pub fn n_active(&self) -> usize {
        self.discarded.iter().filter(|d| !**d).count()
    }
}

/// Truncated Fock-basis density matrix (dimension n_max + 1).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_max: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn zero(n_max: usize) -> Self {
        Self {
            n_max,
            entries: vec![Complex64::new(0.0, 0.0); (n_max + 1) * (n_max + 1)],
        }
    }

    /// Pure vacuum state |0><0|.
    pub fn vacuum(n_max: usize) -> Self {
        let mut rho = Self::zero(n_max);
        rho.set(0, 0, Complex64::new(1.0, 0.0));
        rho
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.entries[n * self.dim() + m]
    }

    pub fn set(&mut self, n: usize, m: usize, v: Complex64) {
        let d = self.dim();
        self.entries[n * d + m] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|n| self.get(n, n).re).sum()
    }

    /// Diagonal as real numbers (imaginary parts vanish after symmetrization).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.get(n, n).re).collect()
    }

    /// Replace ρ by (ρ + ρ†)/2.
    pub fn hermitize(&mut self) {
        let d = self.dim();
        for n in 0..d {
            for m in n..d {
                let v = 0.5 * (self.get(n, m) + self.get(m, n).conj());
                self.set(n, m, v);
                self.set(m, n, v.conj());
            }
        }
    }

    pub fn max_hermiticity_violation(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for n in 0..d {
            for m in 0..d {
                worst = worst.max((self.get(n, m) - self.get(m, n).conj()).norm());
            }
        }
        worst
    }

    /// Overlap <0|ρ|0>, the fidelity to the vacuum state.
    pub fn fidelity_to_vacuum(&self) -> f64 {
        self.get(0, 0).re
    }
}

/// Wigner quasiprobability on a rectangular phase-space grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    /// Row-major over (x, p): values[ix * p_axis.len() + ip].
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.p_axis.len() + ip]
    }

    /// Riemann sum times cell area; ≈ 1 for a normalized state.
    pub fn integral(&self) -> f64 {
        let dx = self.x_axis[1] - self.x_axis[0];
        let dp = self.p_axis[1] - self.p_axis[0];
        self.values.iter().sum::<f64>() * dx * dp
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    /// Second moments (<x^2>, <p^2>) of the grid, normalized by its integral.
    pub fn second_moments(&self) -> (f64, f64) {
        let dx = self.x_axis[1] - self.x_axis[0];
        let dp = self.p_axis[1] - self.p_axis[0];
        let (mut sx, mut sp, mut s) = (0.0, 0.0, 0.0);
        for (ix, &x) in self.x_axis.iter().enumerate() {
            for (ip, &p) in self.p_axis.iter().enumerate() {
                let w = self.at(ix, ip);
                sx += x * x * w;
                sp += p * p * w;
                s += w;
            }
        }
        let norm = s * dx * dp;
        (sx * dx * dp / norm, sp * dx * dp / norm)
    }
}

/// Per-band extremal noise powers, vacuum-normalized (vacuum = 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandNoisePoint {
    pub band_index: usize,
    /// Band center Ω (rad/s).
    pub center_frequency: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// Set when a phase bin had too few samples for a reliable estimate.
    pub flagged: bool,
}

/// Noise-power spectrum over all active bands.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SqueezingSpectrum {
    pub bands: Vec<BandNoisePoint>,
}

impl SqueezingSpectrum {
    pub fn unflagged(&self) -> impl Iterator<Item = &BandNoisePoint> {
        self.bands.iter().filter(|b| !b.flagged)
    }
}

/// Seed for the deterministic trace generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimSeed(pub u64);

/// Convert a linear power ratio to decibels: 10·log10(v).
pub fn to_decibel(v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!(
            "decibel conversion needs a positive power ratio, got {v}"
        )));
    }
    Ok(10.0 * v.log10())
}

/// Center angular frequency Ω of a spectral band: (index + 1/2)·band_width.
pub fn band_center(band_index: usize, config: &AcquisitionConfig) -> Result<f64> {
    if band_index >= config.n_bands {
        return Err(Error::Domain(format!(
            "band index {} out of range (n_bands = {})",
            band_index, config.n_bands
        )));
    }
    Ok(std::f64::consts::TAU * (band_index as f64 + 0.5) * config.band_width())
}
