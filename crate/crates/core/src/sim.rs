//! Synthetic broadband homodyne traces for a below-threshold OPA.
//!
//! Each spectral band is an independent band-limited Gaussian process whose
//! instantaneous variance follows the swept local-oscillator phase:
//! V(θ) = ½[Ψ₊ cos²(θ−θ₀) + Ψ₋ sin²(θ−θ₀)], with the noise powers Ψ± taken
//! from the resonant-OPA sideband spectrum at the band center. The phase
//! sweep (ms) is slow against the band timescales (sub-µs), so quasi-static
//! amplitude modulation of stationary band noise replaces a full cavity
//! simulation.

use crate::fft;
use crate::spectral::band_bins;
use crate::types::{
    band_center, AcquisitionConfig, BroadbandTrace, Error, OpaParams, Result, SimSeed, TraceKind,
};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Noise powers (Ψ₋, Ψ₊) of the squeezed and antisqueezed quadratures at
/// sideband frequency Ω (rad/s), vacuum-normalized:
///
/// Ψ± = Ψ₀ · (1 ± ξη · 4d / ((Ω/Γ)² + (1 ∓ d)²))
pub fn band_variances(params: &OpaParams, omega: f64) -> Result<(f64, f64)> {
    params.validate()?;
    if !(omega >= 0.0) {
        return Err(Error::Domain(format!("sideband frequency {omega} < 0")));
    }
    let d = params.pump;
    let xieta = params.efficiency_product();
    let r = omega / params.cavity_hwhm;
    let minus = params.vacuum_density * (1.0 - xieta * 4.0 * d / (r * r + (1.0 + d) * (1.0 + d)));
    let plus = params.vacuum_density * (1.0 + xieta * 4.0 * d / (r * r + (1.0 - d) * (1.0 - d)));
    Ok((minus, plus))
}

/// Simulate a swept homodyne record of the OPA output.
///
/// Bands are statistically independent; band b derives its random substream
/// deterministically from (seed, b), so the result is byte-identical at any
/// worker count and for the sequential build.
pub fn simulate_trace(
    params: &OpaParams,
    acq: &AcquisitionConfig,
    seed: SimSeed,
) -> Result<BroadbandTrace> {
    params.validate()?;
    let powers = band_powers(params, acq)?;
    synthesize(acq, &powers, seed, TraceKind::Signal)
}

/// Simulate a vacuum record: every band at the vacuum level Ψ± = 1.
pub fn simulate_vacuum_trace(acq: &AcquisitionConfig, seed: SimSeed) -> Result<BroadbandTrace> {
    let powers = vec![(1.0, 1.0); acq.n_bands];
    synthesize(acq, &powers, seed, TraceKind::Vacuum)
}

fn band_powers(params: &OpaParams, acq: &AcquisitionConfig) -> Result<Vec<(f64, f64)>> {
    (0..acq.n_bands)
        .map(|b| band_variances(params, band_center(b, acq)?))
        .collect()
}

fn synthesize(
    acq: &AcquisitionConfig,
    powers: &[(f64, f64)],
    seed: SimSeed,
    kind: TraceKind,
) -> Result<BroadbandTrace> {
    acq.validate()?;
    debug_assert_eq!(powers.len(), acq.n_bands);

    #[cfg(feature = "parallel")]
    let band_traces: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..acq.n_bands)
            .into_par_iter()
            .map(|b| synth_band(acq, b, powers[b], seed))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let band_traces: Vec<Vec<f64>> = (0..acq.n_bands)
        .map(|b| synth_band(acq, b, powers[b], seed))
        .collect();

    let mut total = vec![0.0f64; acq.n_samples];
    for band in &band_traces {
        for (t, v) in total.iter_mut().zip(band) {
            *t += v;
        }
    }
    let trace = BroadbandTrace::new(total, *acq, kind)?;
    if let Some(bits) = acq.adc_bits {
        let rms_anti = antisqueezed_rms(powers, acq.n_bands);
        return apply_adc(&trace, bits, 5.0 * rms_anti);
    }
    Ok(trace)
}

/// Sequential twin of the synthesis loop, kept for benchmarking.
#[doc(hidden)]
pub fn simulate_trace_seq(
    params: &OpaParams,
    acq: &AcquisitionConfig,
    seed: SimSeed,
) -> Result<BroadbandTrace> {
    params.validate()?;
    acq.validate()?;
    let powers = band_powers(params, acq)?;
    let mut total = vec![0.0f64; acq.n_samples];
    for b in 0..acq.n_bands {
        let band = synth_band(acq, b, powers[b], seed);
        for (t, v) in total.iter_mut().zip(&band) {
            *t += v;
        }
    }
    BroadbandTrace::new(total, *acq, TraceKind::Signal)
}

/// One band-limited process, phase-modulated.
///
/// A complex spectrum with independent Gaussian entries on the band's ± bins
/// inverse-transforms to z(t) whose real and imaginary parts are two
/// independent unit-variance band-limited processes; they are combined with
/// cos/sin weights so the instantaneous variance tracks V(θ(t)) continuously.
fn synth_band(acq: &AcquisitionConfig, band: usize, power: (f64, f64), seed: SimSeed) -> Vec<f64> {
    let n = acq.n_samples;
    let (lo, hi) = band_bins(n, acq.n_bands, band);
    let mut rng = ChaCha12Rng::seed_from_u64(seed.0);
    rng.set_stream(band as u64 + 1);

    let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
    let mut kept = 0usize;
    // positive-frequency interval and its mirror; DC belongs to band 0,
    // Nyquist to the last band (hi == n/2 there).
    if band == 0 {
        kept += 1;
    }
    for k in lo + 1..=hi {
        kept += 1;
        if k != n / 2 {
            kept += 1; // mirror bin n-k
        }
    }
    let comp_std = n as f64 / (kept as f64).sqrt() / std::f64::consts::SQRT_2;
    let mut draw = |rng: &mut ChaCha12Rng| {
        Complex64::new(
            comp_std * std_normal(rng),
            comp_std * std_normal(rng),
        )
    };
    if band == 0 {
        spectrum[0] = draw(&mut rng);
    }
    for k in lo + 1..=hi {
        spectrum[k] = draw(&mut rng);
        if k != n / 2 {
            spectrum[n - k] = draw(&mut rng);
        }
    }

    fft::inverse(&mut spectrum);

    let (psi_minus, psi_plus) = power;
    let amp_cos = (psi_plus / 2.0).sqrt();
    let amp_sin = (psi_minus / 2.0).sqrt();
    let two_pi = std::f64::consts::TAU;
    let mut out = Vec::with_capacity(n);
    for (i, z) in spectrum.iter().enumerate() {
        let sweep = two_pi * (i as f64 / acq.sample_rate) / acq.sweep_period;
        let (s, c) = sweep.sin_cos();
        out.push(amp_cos * c * z.re + amp_sin * s * z.im);
    }
    out
}

/// Box-free standard normal via Marsaglia polar method on the ChaCha stream.
fn std_normal(rng: &mut ChaCha12Rng) -> f64 {
    loop {
        let u: f64 = rng.gen_range(-1.0..1.0);
        let v: f64 = rng.gen_range(-1.0..1.0);
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

fn antisqueezed_rms(powers: &[(f64, f64)], n_bands: usize) -> f64 {
    let total: f64 = powers.iter().map(|(_, p)| p / 2.0).sum();
    (total.max(n_bands as f64 / 2.0)).sqrt()
}

/// Uniform mid-rise quantization clipped at ±full_scale.
pub fn apply_adc(trace: &BroadbandTrace, bits: u8, full_scale: f64) -> Result<BroadbandTrace> {
    if !(4..=24).contains(&bits) {
        return Err(Error::Config(format!("adc bits {bits} outside [4, 24]")));
    }
    if !(full_scale > 0.0) {
        return Err(Error::Config("full scale must be positive".into()));
    }
    let delta = 2.0 * full_scale / (1u64 << bits) as f64;
    let top = full_scale - delta / 2.0;
    let samples = trace
        .samples
        .iter()
        .map(|&x| (delta * ((x / delta).floor() + 0.5)).clamp(-top, top))
        .collect();
    BroadbandTrace::new(samples, trace.config, trace.kind)
}
