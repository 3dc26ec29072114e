//! Spectrum-level and total-field analyses: extremal noise-power spectrum,
//! model fitting, total variances and photon statistics, time correlations.

use crate::optim::{multi_start, solve3};
use crate::sim::band_variances;
use crate::types::{
    to_decibel, BandDecomposition, BandNoisePoint, BroadbandTrace, Error, OpaParams, Result,
    SqueezingSpectrum,
};
use serde::{Deserialize, Serialize};

/// Photon energy at 1064 nm (J).
pub const PHOTON_ENERGY_1064NM: f64 = 1.8669566309413672e-19;

// ---------------------------------------------------------------------------
// phase-binned variance machinery
// ---------------------------------------------------------------------------

fn binned_variances(x: &[f64], theta: &[f64], n_bins: usize) -> (Vec<f64>, Vec<usize>) {
    let mut sum = vec![0.0f64; n_bins];
    let mut sum2 = vec![0.0f64; n_bins];
    let mut count = vec![0usize; n_bins];
    for (&xi, &ti) in x.iter().zip(theta) {
        let j = ((ti / std::f64::consts::TAU) * n_bins as f64) as usize % n_bins;
        sum[j] += xi;
        sum2[j] += xi * xi;
        count[j] += 1;
    }
    let variances = (0..n_bins)
        .map(|j| {
            if count[j] == 0 {
                0.0
            } else {
                let n = count[j] as f64;
                let mean = sum[j] / n;
                (sum2[j] / n - mean * mean).max(0.0)
            }
        })
        .collect();
    (variances, count)
}

/// Extremes of the phase-variance curve V(θ) = c + a·cos2θ + b·sin2θ fitted
/// to phase-binned variances.
///
/// The bins have constant *relative* noise, so the least squares is
/// iteratively reweighted with 1/V_model²; the fitted amplitude is divided by
/// the exact bin-average attenuation sinc(Δθ) of a cos2θ component.
fn harmonic_extremes(variances: &[f64], counts: &[usize]) -> (f64, f64) {
    let n_bins = variances.len();
    let centers: Vec<f64> = (0..n_bins)
        .map(|j| (j as f64 + 0.5) * std::f64::consts::TAU / n_bins as f64)
        .collect();
    let mut weights: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let mut sol = [0.0f64; 3];
    for _ in 0..3 {
        let mut ata = [[0.0f64; 3]; 3];
        let mut atb = [0.0f64; 3];
        for j in 0..n_bins {
            if counts[j] == 0 {
                continue;
            }
            let (s2, c2) = (2.0 * centers[j]).sin_cos();
            let row = [1.0, c2, s2];
            for r in 0..3 {
                for c in 0..3 {
                    ata[r][c] += weights[j] * row[r] * row[c];
                }
                atb[r] += weights[j] * row[r] * variances[j];
            }
        }
        sol = solve3(ata, atb);
        for j in 0..n_bins {
            let (s2, c2) = (2.0 * centers[j]).sin_cos();
            let model = (sol[0] + sol[1] * c2 + sol[2] * s2).max(1e-12);
            weights[j] = counts[j] as f64 / (model * model);
        }
    }
    let delta = std::f64::consts::TAU / n_bins as f64;
    let attenuation = delta.sin() / delta;
    let amp = (sol[1] * sol[1] + sol[2] * sol[2]).sqrt() / attenuation;
    ((sol[0] - amp).max(0.0), sol[0] + amp)
}

/// Per-band extremal noise powers (vacuum = 1) from a calibrated
/// decomposition: minimum and maximum of the phase-binned variance curve,
/// rescaled to power units (×2).
pub fn squeezing_spectrum(
    decomposition: &BandDecomposition,
    n_phase_bins: usize,
) -> Result<SqueezingSpectrum> {
    if decomposition.n_active() < 2 {
        return Err(Error::Config("need at least 2 active bands".into()));
    }
    let bands = decomposition
        .active()
        .map(|band| {
            let (variances, counts) = binned_variances(&band.x, &band.theta, n_phase_bins);
            let flagged = counts.iter().any(|&c| c < 50);
            let (v_min, v_max) = harmonic_extremes(&variances, &counts);
            BandNoisePoint {
                band_index: band.band_index,
                center_frequency: band.center_frequency,
                v_min: 2.0 * v_min,
                v_max: 2.0 * v_max,
                flagged,
            }
        })
        .collect();
    Ok(SqueezingSpectrum { bands })
}

// ---------------------------------------------------------------------------
// model fitting
// ---------------------------------------------------------------------------

/// Whether the cavity width participates in the fit.
#[derive(Debug, Clone, Copy)]
pub enum GammaMode {
    Fixed(f64),
    Free { initial: f64 },
}

/// Result of fitting the sideband noise model to a measured spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumFit {
    /// Fitted pump parameter d.
    pub pump: f64,
    /// Fitted efficiency product ξη.
    pub efficiency: f64,
    /// Cavity HWHM (rad/s); the input value when held fixed.
    pub cavity_hwhm: f64,
    pub gamma_was_free: bool,
    /// Sum of squared relative residuals over both branches.
    pub residual: f64,
    /// Finite-difference curvature of the residual along (d, ξη[, Γ]).
    pub curvature: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn model_params(pump: f64, hwhm: f64, xieta: f64) -> OpaParams {
    OpaParams {
        pump,
        cavity_hwhm: hwhm,
        escape_efficiency: xieta,
        detection_efficiency: 1.0,
        vacuum_density: 1.0,
    }
}

/// Least-squares fit of the noise model to both spectrum branches jointly,
/// with equal weights on the squeezed and antisqueezed relative residuals.
/// Simplex descent restarted from a coarse (d, ξη) grid.
pub fn fit_spectrum(spectrum: &SqueezingSpectrum, gamma: GammaMode) -> Result<SpectrumFit> {
    let points: Vec<&BandNoisePoint> = spectrum.unflagged().collect();
    if points.len() < 3 {
        return Err(Error::Config(format!(
            "need at least 3 usable bands, have {}",
            points.len()
        )));
    }
    let (gamma_fixed, gamma_free, gamma_init) = match gamma {
        GammaMode::Fixed(g) => (g, false, g),
        GammaMode::Free { initial } => (initial, true, initial),
    };
    if !(gamma_init > 0.0) {
        return Err(Error::Config("cavity width must be positive".into()));
    }

    let cost = |z: &[f64]| -> f64 {
        let d = sigmoid(z[0]);
        let xieta = sigmoid(z[1]);
        let g = if gamma_free { z[2].exp() * gamma_init } else { gamma_fixed };
        let params = model_params(d, g, xieta);
        let mut acc = 0.0;
        for pt in &points {
            match band_variances(&params, pt.center_frequency) {
                Ok((m, p)) => {
                    let rm = (m - pt.v_min) / pt.v_min.max(1e-9);
                    let rp = (p - pt.v_max) / pt.v_max.max(1e-9);
                    acc += rm * rm + rp * rp;
                }
                Err(_) => acc += 1e6,
            }
        }
        acc
    };

    let mut starts = Vec::new();
    for &d0 in &[0.2, 0.45, 0.65, 0.85] {
        for &e0 in &[0.35, 0.75] {
            let mut s = vec![logit(d0), logit(e0)];
            if gamma_free {
                s.push(0.0);
            }
            starts.push(s);
        }
    }
    let (z, residual, converged) = multi_start(&cost, &starts, 0.5, 1e-14, 4000);

    let pump = sigmoid(z[0]);
    let efficiency = sigmoid(z[1]);
    let cavity_hwhm = if gamma_free { z[2].exp() * gamma_init } else { gamma_fixed };

    // curvature proxy: finite-difference second derivatives in the physical axes
    let n_phys = if gamma_free { 3 } else { 2 };
    let mut curvature = Vec::with_capacity(n_phys);
    let h = 1e-4;
    for i in 0..n_phys {
        let mut zp = z.clone();
        let mut zm = z.clone();
        zp[i] += h;
        zm[i] -= h;
        curvature.push((cost(&zp) - 2.0 * residual + cost(&zm)) / (h * h));
    }

    let fit = SpectrumFit {
        pump,
        efficiency,
        cavity_hwhm,
        gamma_was_free: gamma_free,
        residual,
        curvature,
    };
    if !converged {
        return Err(Error::FitDiverged {
            residual,
            best: Box::new(fit),
        });
    }
    Ok(fit)
}

// ---------------------------------------------------------------------------
// total-field analyses
// ---------------------------------------------------------------------------

/// Phase-resolved variance of the summed active-band field, vacuum = 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseVarianceCurve {
    /// Phase bin centers (rad).
    pub theta: Vec<f64>,
    /// Normalized variance per phase bin.
    pub variance: Vec<f64>,
    pub v_min: f64,
    pub v_max: f64,
    pub v_min_db: f64,
    pub v_max_db: f64,
}

/// Phase-binned variance of a band-0-removed trace, normalized so that the
/// matching vacuum record gives 1; extremes from the harmonic fit.
pub fn total_variance_vs_phase(
    signal: &BroadbandTrace,
    vacuum: &BroadbandTrace,
    n_phase_bins: usize,
) -> Result<PhaseVarianceCurve> {
    if signal.samples.len() != vacuum.samples.len() {
        return Err(Error::Data("signal/vacuum length mismatch".into()));
    }
    let vacuum_level = vacuum.variance();
    if !(vacuum_level > 0.0) {
        return Err(Error::Calibration("vacuum trace has zero variance".into()));
    }
    let theta: Vec<f64> = (0..signal.samples.len())
        .map(|i| signal.config.phase_at(i))
        .collect();
    let (mut variances, counts) = binned_variances(&signal.samples, &theta, n_phase_bins);
    if counts.iter().any(|&c| c < 50) {
        return Err(Error::Data(
            "phase bin with fewer than 50 samples; increase record length or reduce bins".into(),
        ));
    }
    let (v_min, v_max) = harmonic_extremes(&variances, &counts);
    for v in variances.iter_mut() {
        *v /= vacuum_level;
    }
    let v_min = v_min / vacuum_level;
    let v_max = v_max / vacuum_level;
    Ok(PhaseVarianceCurve {
        theta: (0..n_phase_bins)
            .map(|j| (j as f64 + 0.5) * std::f64::consts::TAU / n_phase_bins as f64)
            .collect(),
        variance: variances,
        v_min,
        v_max,
        v_min_db: to_decibel(v_min)?,
        v_max_db: to_decibel(v_max)?,
    })
}

/// Photon statistics of the summed multimode field: the discrete convolution
/// of the per-band photon-number distributions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TotalPhotonStats {
    pub probs: Vec<f64>,
    /// Probability mass beyond the truncation length.
    pub tail_mass: f64,
}

pub fn total_photon_statistics(
    distributions: &[Vec<f64>],
    max_len: usize,
) -> Result<TotalPhotonStats> {
    if distributions.is_empty() {
        return Err(Error::Data("no distributions to convolve".into()));
    }
    for (i, d) in distributions.iter().enumerate() {
        let total: f64 = d.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::Data(format!(
                "distribution {i} is not normalized (sum {total})"
            )));
        }
        if d.iter().any(|&p| p < -1e-12) {
            return Err(Error::Data(format!("distribution {i} has negative mass")));
        }
    }
    let mut total = vec![1.0f64];
    for d in distributions {
        let mut next = vec![0.0f64; total.len() + d.len() - 1];
        for (i, &a) in total.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in d.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        total = next;
    }
    let kept: Vec<f64> = total.iter().take(max_len).cloned().collect();
    let tail_mass = 1.0 - kept.iter().sum::<f64>();
    Ok(TotalPhotonStats {
        probs: kept,
        tail_mass,
    })
}

/// Mean photon number per Hz, photon flux, and optical power at 1064 nm.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PhotonFlux {
    /// Detection-band average of (Ψ₊ + Ψ₋ − 2)/4.
    pub n_per_hz: f64,
    /// Photons per second across the detection bandwidth.
    pub flux_per_s: f64,
    /// Optical power in watts at 1064 nm.
    pub power_w: f64,
}

/// Average photon number over the detection band from a noise spectrum:
/// per band ⟨n⟩ = (Ψ₊ + Ψ₋ − 2)/4; flux = ⟨n⟩ × bandwidth.
pub fn mean_photon_and_flux(spectrum: &SqueezingSpectrum, bandwidth_hz: f64) -> PhotonFlux {
    let points: Vec<f64> = spectrum
        .unflagged()
        .map(|b| ((b.v_max + b.v_min - 2.0) / 4.0).max(0.0))
        .collect();
    let n_per_hz = if points.is_empty() {
        0.0
    } else {
        points.iter().sum::<f64>() / points.len() as f64
    };
    let flux_per_s = n_per_hz * bandwidth_hz;
    PhotonFlux {
        n_per_hz,
        flux_per_s,
        power_w: flux_per_s * PHOTON_ENERGY_1064NM,
    }
}

/// Same average computed from reconstructed photon-number distributions.
pub fn mean_photon_and_flux_from_states(
    distributions: &[Vec<f64>],
    bandwidth_hz: f64,
) -> PhotonFlux {
    let means: Vec<f64> = distributions
        .iter()
        .map(|d| d.iter().enumerate().map(|(n, &p)| n as f64 * p).sum())
        .collect();
    let n_per_hz = if means.is_empty() {
        0.0
    } else {
        means.iter().sum::<f64>() / means.len() as f64
    };
    let flux_per_s = n_per_hz * bandwidth_hz;
    PhotonFlux {
        n_per_hz,
        flux_per_s,
        power_w: flux_per_s * PHOTON_ENERGY_1064NM,
    }
}

// ---------------------------------------------------------------------------
// first-order time correlation
// ---------------------------------------------------------------------------

/// Phase-averaged first-order correlation estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationCurve {
    /// Lags in seconds (multiples of the sample period, starting at 0).
    pub lags: Vec<f64>,
    /// Vacuum-subtracted autocorrelation (unnormalized).
    pub raw: Vec<f64>,
    /// Normalized correlation g₁; meaningful where `valid` is set.
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
    /// τ→0 extrapolation of the subtracted curve used as the normalization.
    pub normalization: f64,
}

/// Estimate g₁(τ) from a swept record: the phase-averaged autocorrelation of
/// the signal minus the vacuum autocorrelation (removing the symmetric-order
/// vacuum contribution), normalized by the two-point linear extrapolation of
/// the subtracted curve to τ = 0 (the τ = 0 point itself is excluded).
pub fn g1_estimate(
    signal: &BroadbandTrace,
    vacuum: &BroadbandTrace,
    max_lag: usize,
) -> Result<CorrelationCurve> {
    g1_impl(signal, vacuum, max_lag, true)
}

/// Sequential twin of [`g1_estimate`], kept for benchmarking.
#[doc(hidden)]
pub fn g1_estimate_seq(
    signal: &BroadbandTrace,
    vacuum: &BroadbandTrace,
    max_lag: usize,
) -> Result<CorrelationCurve> {
    g1_impl(signal, vacuum, max_lag, false)
}

fn g1_impl(
    signal: &BroadbandTrace,
    vacuum: &BroadbandTrace,
    max_lag: usize,
    parallel: bool,
) -> Result<CorrelationCurve> {
    let n = signal.samples.len();
    if vacuum.samples.len() != n {
        return Err(Error::Data("signal/vacuum length mismatch".into()));
    }
    if max_lag < 2 || max_lag >= n {
        return Err(Error::Config(format!(
            "max_lag {max_lag} outside [2, {n})"
        )));
    }
    let lags: Vec<usize> = (0..=max_lag).collect();
    let acorr = |y: &[f64], k: usize| -> f64 {
        let m = y.len() - k;
        y[..m].iter().zip(&y[k..]).map(|(a, b)| a * b).sum::<f64>() / m as f64
    };
    let subtracted = |&k: &usize| acorr(&signal.samples, k) - acorr(&vacuum.samples, k);

    #[cfg(feature = "parallel")]
    let raw: Vec<f64> = if parallel {
        use rayon::prelude::*;
        lags.par_iter().map(subtracted).collect()
    } else {
        lags.iter().map(subtracted).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let raw: Vec<f64> = {
        let _ = parallel;
        lags.iter().map(subtracted).collect()
    };

    let normalization = 2.0 * raw[1] - raw[2];
    let vacuum_level = acorr(&vacuum.samples, 0);
    let usable = normalization > 0.01 * vacuum_level;
    let values: Vec<f64> = raw
        .iter()
        .map(|&c| if usable { c / normalization } else { 0.0 })
        .collect();
    let valid = (0..=max_lag).map(|k| usable && k >= 1).collect();
    Ok(CorrelationCurve {
        lags: lags
            .iter()
            .map(|&k| k as f64 / signal.config.sample_rate)
            .collect(),
        raw,
        values,
        valid,
        normalization,
    })
}

/// Closed-form first-order correlation of the below-threshold OPA output:
///
/// g₁(τ) = (1−d²)/(2d) · [e^{−(1−d)Γτ}/(1−d) − e^{−(1+d)Γτ}/(1+d)],
///
/// with the removable d → 0 singularity replaced by its analytic limit
/// (1 + Γτ)·e^{−Γτ}.
pub fn g1_theory(d: f64, gamma: f64, tau: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&d) {
        return Err(Error::Domain(format!("pump parameter {d} outside [0, 1)")));
    }
    if tau < 0.0 {
        return Err(Error::Domain("lag must be nonnegative".into()));
    }
    let gt = gamma * tau;
    if d < 1e-8 {
        return Ok((1.0 + gt) * (-gt).exp());
    }
    Ok((1.0 - d * d) / (2.0 * d)
        * ((-(1.0 - d) * gt).exp() / (1.0 - d) - (-(1.0 + d) * gt).exp() / (1.0 + d)))
}
