//! Quantum-state reconstruction from phase-tagged quadrature samples.

use crate::pattern::PatternKernel;
use crate::types::{DensityMatrix, Error, QuadratureSamples, Result};
use num_complex::Complex64;

/// Phase-resolved quadrature histogram p(x | θ), column-normalized.
#[derive(Debug, Clone)]
pub struct Tomogram {
    /// Phase bin centers (rad).
    pub theta: Vec<f64>,
    /// Quadrature bin centers.
    pub x: Vec<f64>,
    /// probs[j][k] = probability of x-bin k given phase bin j (sums to 1 in k).
    pub probs: Vec<Vec<f64>>,
    /// Raw counts, same layout.
    pub counts: Vec<Vec<u64>>,
    pub n_samples: usize,
}

impl Tomogram {
    pub fn x_step(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    /// Sample variance of one phase column (density-weighted).
    pub fn column_variance(&self, j: usize) -> f64 {
        let p = &self.probs[j];
        let mean: f64 = p.iter().zip(&self.x).map(|(p, x)| p * x).sum();
        p.iter()
            .zip(&self.x)
            .map(|(p, x)| p * (x - mean) * (x - mean))
            .sum()
    }
}

/// Result of a density-matrix estimation with coverage diagnostics.
#[derive(Debug, Clone)]
pub struct DensityMatrixEstimate {
    pub rho: DensityMatrix,
    /// Max relative deviation of the phase histogram from uniform coverage.
    pub phase_uniformity: f64,
    /// Set when coverage deviates enough to bias the phase averages.
    pub coverage_warning: bool,
    pub n_samples: usize,
}

/// Estimate ρ_nm as the sample mean of f_nm(x_i)·e^{i(n−m)θ_i}, then
/// symmetrize. Expects θ to cover [0, 2π) approximately uniformly.
pub fn estimate_density_matrix(
    samples: &QuadratureSamples,
    kernel: &PatternKernel,
) -> Result<DensityMatrixEstimate> {
    estimate_impl(samples, kernel, true)
}

/// Sequential twin of [`estimate_density_matrix`], kept for benchmarking.
#[doc(hidden)]
pub fn estimate_density_matrix_seq(
    samples: &QuadratureSamples,
    kernel: &PatternKernel,
) -> Result<DensityMatrixEstimate> {
    estimate_impl(samples, kernel, false)
}

fn estimate_impl(
    samples: &QuadratureSamples,
    kernel: &PatternKernel,
    parallel: bool,
) -> Result<DensityMatrixEstimate> {
    if samples.is_empty() {
        return Err(Error::Data("no quadrature samples to reconstruct".into()));
    }
    let n_max = kernel.n_max();
    let pairs: Vec<(usize, usize)> = (0..=n_max)
        .flat_map(|n| (n..=n_max).map(move |m| (n, m)))
        .collect();

    let accumulate = |&(n, m): &(usize, usize)| -> Complex64 {
        let delta = (m - n) as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        if n == m {
            for &x in &samples.x {
                acc.re += kernel.eval(n, m, x);
            }
        } else {
            for (&x, &theta) in samples.x.iter().zip(&samples.theta) {
                let f = kernel.eval(n, m, x);
                let (s, c) = (delta * theta).sin_cos();
                // e^{i(n-m)θ} = cos(Δθ) − i·sin(Δθ) with Δ = m−n
                acc.re += f * c;
                acc.im -= f * s;
            }
        }
        acc / samples.len() as f64
    };

    #[cfg(feature = "parallel")]
    let sums: Vec<Complex64> = if parallel {
        use rayon::prelude::*;
        pairs.par_iter().map(accumulate).collect()
    } else {
        pairs.iter().map(accumulate).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let sums: Vec<Complex64> = {
        let _ = parallel;
        pairs.iter().map(accumulate).collect()
    };

    let mut rho = DensityMatrix::zero(n_max);
    for ((n, m), v) in pairs.into_iter().zip(sums) {
        rho.set(n, m, v);
        if n != m {
            rho.set(m, n, v.conj());
        }
    }
    rho.hermitize();

    let uniformity = phase_uniformity(&samples.theta);
    Ok(DensityMatrixEstimate {
        rho,
        phase_uniformity: uniformity,
        coverage_warning: uniformity > 0.2,
        n_samples: samples.len(),
    })
}

fn phase_uniformity(theta: &[f64]) -> f64 {
    const BINS: usize = 16;
    let mut counts = [0usize; BINS];
    for &t in theta {
        let idx = ((t / std::f64::consts::TAU) * BINS as f64) as usize % BINS;
        counts[idx] += 1;
    }
    let expect = theta.len() as f64 / BINS as f64;
    counts
        .iter()
        .map(|&c| (c as f64 / expect - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Column-normalized 2-D histogram of (x, θ).
pub fn marginal_histogram(
    samples: &QuadratureSamples,
    n_phase_bins: usize,
    n_x_bins: usize,
) -> Result<Tomogram> {
    if n_phase_bins < 8 || n_x_bins < 8 {
        return Err(Error::Config("need at least 8 bins per axis".into()));
    }
    if samples.is_empty() {
        return Err(Error::Data("no samples to histogram".into()));
    }
    let x_max = samples
        .x
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(1e-12)
        * 1.0001;
    let x_step = 2.0 * x_max / n_x_bins as f64;
    let mut counts = vec![vec![0u64; n_x_bins]; n_phase_bins];
    for (&x, &t) in samples.x.iter().zip(&samples.theta) {
        let j = ((t / std::f64::consts::TAU) * n_phase_bins as f64) as usize % n_phase_bins;
        let k = (((x + x_max) / x_step) as usize).min(n_x_bins - 1);
        counts[j][k] += 1;
    }
    let probs = counts
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            let denom = (total.max(1)) as f64;
            row.iter().map(|&c| c as f64 / denom).collect()
        })
        .collect();
    Ok(Tomogram {
        theta: (0..n_phase_bins)
            .map(|j| (j as f64 + 0.5) * std::f64::consts::TAU / n_phase_bins as f64)
            .collect(),
        x: (0..n_x_bins)
            .map(|k| -x_max + (k as f64 + 0.5) * x_step)
            .collect(),
        probs,
        counts,
        n_samples: samples.len(),
    })
}

/// Photon-number distribution from the diagonal of ρ: negative entries are
/// clipped to zero and the rest renormalized; the clipped mass is reported.
#[derive(Debug, Clone)]
pub struct PhotonDistribution {
    pub probs: Vec<f64>,
    pub clipped_mass: f64,
    /// Trace of ρ before renormalization.
    pub raw_trace: f64,
    /// Set when the trace deviates from 1 beyond the statistical tolerance.
    pub trace_flagged: bool,
}

pub fn photon_distribution(rho: &DensityMatrix) -> PhotonDistribution {
    let diag = rho.diagonal();
    let raw_trace: f64 = diag.iter().sum();
    let clipped_mass: f64 = diag.iter().filter(|&&p| p < 0.0).map(|p| -p).sum();
    let clipped: Vec<f64> = diag.iter().map(|&p| p.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let probs = if total > 0.0 {
        clipped.iter().map(|p| p / total).collect()
    } else {
        clipped
    };
    PhotonDistribution {
        probs,
        clipped_mass,
        raw_trace,
        trace_flagged: (raw_trace - 1.0).abs() > 0.1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{gaussian_samples, normal};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn vacuum_reconstructs_to_vacuum() {
        let kernel = PatternKernel::build(8, 10.0, 1025).unwrap();
        let samples = gaussian_samples(0.5, 0.5, 100_000, 7);
        let est = estimate_density_matrix(&samples, &kernel).unwrap();
        assert!((est.rho.get(0, 0).re - 1.0).abs() < 0.01);
        for n in 0..=8usize {
            for m in 0..=8usize {
                if (n, m) != (0, 0) {
                    assert!(
                        est.rho.get(n, m).norm() < 0.02,
                        "rho[{n}][{m}] = {}",
                        est.rho.get(n, m)
                    );
                }
            }
        }
        assert!(!est.coverage_warning);
    }

    #[test]
    fn phase_randomized_coherent_state_is_poissonian() {
        // x | θ ~ N(√2·|α| cos(β−θ), 1/2) with β uniform ⇒ diagonals Poisson(|α|²)
        let alpha2 = 1.0;
        let n = 200_000;
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let mut x = Vec::with_capacity(n);
        let mut theta = Vec::with_capacity(n);
        for i in 0..n {
            let t = std::f64::consts::TAU * (i as f64 + 0.5) / n as f64;
            let beta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let mean = (2.0 * alpha2).sqrt() * (beta - t).cos();
            x.push(mean + 0.5f64.sqrt() * normal(&mut rng));
            theta.push(t);
        }
        let samples = QuadratureSamples {
            band_index: 0,
            center_frequency: 0.0,
            x,
            theta,
        };
        let kernel = PatternKernel::build(10, 10.0, 1025).unwrap();
        let est = estimate_density_matrix(&samples, &kernel).unwrap();
        let diag = est.rho.diagonal();
        let mut poisson = 1.0f64 / alpha2.exp();
        for (k, &p) in diag.iter().enumerate().take(6) {
            assert!(
                (p - poisson).abs() < 0.015,
                "p({k}) = {p}, Poisson(1) = {poisson}"
            );
            poisson *= alpha2 / (k as f64 + 1.0);
        }
    }

    #[test]
    fn squeezed_diagonals_match_quadrature_oracle() {
        // moderately squeezed lossy state; oracle values from direct
        // integration of the pattern functions against the analytic marginals
        // (frozen; see tests/oracle.rs for the generating code)
        let v_plus = 3.1633820 / 2.0;
        let v_minus = 0.4711263 / 2.0;
        let oracle = [
            0.8081312168,
            0.0646984760,
            0.0832511342,
            0.0191657299,
            0.0143490018,
            0.0049319960,
        ];
        let kernel = PatternKernel::build(15, 12.0, 2049).unwrap();
        let samples = gaussian_samples(v_plus, v_minus, 400_000, 23);
        let est = estimate_density_matrix(&samples, &kernel).unwrap();
        let diag = est.rho.diagonal();
        for (k, &expect) in oracle.iter().enumerate() {
            assert!(
                (diag[k] - expect).abs() < 0.01,
                "p({k}) = {} vs oracle {expect}",
                diag[k]
            );
        }
        // photon-number parity dip of the squeezed state
        assert!(diag[1] < (diag[0] + diag[2]) / 2.0);
    }

    #[test]
    fn estimator_is_deterministic_and_parallel_consistent() {
        let kernel = PatternKernel::build(6, 9.0, 513).unwrap();
        let samples = gaussian_samples(1.5, 0.3, 20_000, 3);
        let a = estimate_density_matrix(&samples, &kernel).unwrap();
        let b = estimate_density_matrix_seq(&samples, &kernel).unwrap();
        for n in 0..=6usize {
            for m in 0..=6usize {
                assert_eq!(a.rho.get(n, m), b.rho.get(n, m));
            }
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        let kernel = PatternKernel::build(4, 8.0, 257).unwrap();
        let samples = QuadratureSamples {
            band_index: 0,
            center_frequency: 0.0,
            x: vec![],
            theta: vec![],
        };
        assert!(estimate_density_matrix(&samples, &kernel).is_err());
    }

    #[test]
    fn nonuniform_phase_coverage_warns() {
        let kernel = PatternKernel::build(4, 8.0, 257).unwrap();
        let mut samples = gaussian_samples(0.5, 0.5, 20_000, 5);
        // restrict to half the phase circle
        for t in samples.theta.iter_mut() {
            *t = t.rem_euclid(std::f64::consts::PI);
        }
        let est = estimate_density_matrix(&samples, &kernel).unwrap();
        assert!(est.coverage_warning);
    }

    #[test]
    fn histogram_columns_are_normalized_and_counts_preserved() {
        let samples = gaussian_samples(1.0, 0.25, 50_000, 9);
        let tomo = marginal_histogram(&samples, 32, 64).unwrap();
        let total: u64 = tomo.counts.iter().flatten().sum();
        assert_eq!(total as usize, samples.len());
        for row in &tomo.probs {
            let s: f64 = row.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn histogram_variances_oscillate_with_phase() {
        let samples = gaussian_samples(2.0, 0.2, 400_000, 13);
        let tomo = marginal_histogram(&samples, 16, 96).unwrap();
        // columns near θ=0 and θ=π antisqueezed, near π/2 and 3π/2 squeezed
        let v0 = tomo.column_variance(0);
        let vq = tomo.column_variance(4);
        let vh = tomo.column_variance(8);
        let v3q = tomo.column_variance(12);
        assert!(v0 > 4.0 * vq && vh > 4.0 * v3q);
        assert!((v0 / vh - 1.0).abs() < 0.2);
    }

    #[test]
    fn vacuum_histogram_columns_have_half_variance() {
        let samples = gaussian_samples(0.5, 0.5, 400_000, 15);
        let tomo = marginal_histogram(&samples, 16, 96).unwrap();
        for j in 0..16 {
            let v = tomo.column_variance(j);
            assert!((v - 0.5).abs() < 0.05, "column {j} variance {v}");
        }
    }

    #[test]
    fn photon_distribution_clips_and_reports() {
        let mut rho = DensityMatrix::zero(3);
        rho.set(0, 0, Complex64::new(0.9, 0.0));
        rho.set(1, 1, Complex64::new(-0.02, 0.0));
        rho.set(2, 2, Complex64::new(0.1, 0.0));
        let pd = photon_distribution(&rho);
        assert!((pd.clipped_mass - 0.02).abs() < 1e-12);
        assert!((pd.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(pd.probs[1], 0.0);
        assert!(!pd.trace_flagged);

        let vac = DensityMatrix::vacuum(4);
        let pd = photon_distribution(&vac);
        assert_eq!(pd.probs[0], 1.0);
        assert!(pd.probs[1..].iter().all(|&p| p == 0.0));
    }

    #[test]
    fn error_scales_as_inverse_sqrt_n() {
        // Frobenius error against the large-N limit should drop ~4x when the
        // sample count grows 16x; averaged over replicates, within wide bounds
        let kernel = PatternKernel::build(6, 10.0, 1025).unwrap();
        let v_plus = 1.2;
        let v_minus = 0.3;
        // reference: very large sample estimate stands in for the truth
        let truth = estimate_density_matrix(
            &gaussian_samples(v_plus, v_minus, 2_000_000, 999),
            &kernel,
        )
        .unwrap()
        .rho;
        let frob = |a: &DensityMatrix| -> f64 {
            let mut s = 0.0;
            for n in 0..=6usize {
                for m in 0..=6usize {
                    s += (a.get(n, m) - truth.get(n, m)).norm_sqr();
                }
            }
            s.sqrt()
        };
        let mut ratios = Vec::new();
        for rep in 0..6u64 {
            let small = estimate_density_matrix(
                &gaussian_samples(v_plus, v_minus, 10_000, 100 + rep),
                &kernel,
            )
            .unwrap();
            let large = estimate_density_matrix(
                &gaussian_samples(v_plus, v_minus, 160_000, 200 + rep),
                &kernel,
            )
            .unwrap();
            ratios.push(frob(&small.rho) / frob(&large.rho));
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!(
            (2.4..6.4).contains(&mean),
            "error ratio {mean} should be near 4 (n^-1/2 scaling)"
        );
    }
}
