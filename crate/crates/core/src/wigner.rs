//! Wigner functions: filtered back-projection from tomograms and direct
//! Fock-basis synthesis from density matrices.
//!
//! Convention: ∫∫ W dx dp = 1, vacuum W(x,p) = (1/π)·e^(−x²−p²).

use crate::tomography::Tomogram;
use crate::types::{DensityMatrix, Error, Result, WignerGrid};
use num_complex::Complex64;

/// Rectangular phase-space grid, symmetric about the origin.
#[derive(Debug, Clone, Copy)]
pub struct WignerGridSpec {
    pub x_max: f64,
    pub n_x: usize,
    pub p_max: f64,
    pub n_p: usize,
}

impl Default for WignerGridSpec {
    fn default() -> Self {
        Self {
            x_max: 6.0,
            n_x: 121,
            p_max: 6.0,
            n_p: 121,
        }
    }
}

impl WignerGridSpec {
    fn axes(&self) -> (Vec<f64>, Vec<f64>) {
        let ax = |max: f64, n: usize| -> Vec<f64> {
            let step = 2.0 * max / (n - 1) as f64;
            (0..n).map(|i| -max + i as f64 * step).collect()
        };
        (ax(self.x_max, self.n_x), ax(self.p_max, self.n_p))
    }
}

/// Band-limited inverse-Radon kernel K(s) = ∫₀^{k_c} k·cos(ks) dk.
fn radon_kernel(s: f64, k_c: f64) -> f64 {
    let u = k_c * s;
    if u.abs() < 1e-4 {
        return k_c * k_c / 2.0 * (1.0 - u * u / 4.0);
    }
    (u.cos() - 1.0 + u * u.sin()) / (s * s)
}

/// Filtered back-projection of a tomogram with a hard cutoff |k| ≤ k_c.
pub fn wigner_backprojection(
    tomogram: &Tomogram,
    k_c: f64,
    spec: &WignerGridSpec,
) -> Result<WignerGrid> {
    backprojection_impl(tomogram, k_c, spec, true)
}

/// Sequential twin of [`wigner_backprojection`], kept for benchmarking.
#[doc(hidden)]
pub fn wigner_backprojection_seq(
    tomogram: &Tomogram,
    k_c: f64,
    spec: &WignerGridSpec,
) -> Result<WignerGrid> {
    backprojection_impl(tomogram, k_c, spec, false)
}

fn backprojection_impl(
    tomogram: &Tomogram,
    k_c: f64,
    spec: &WignerGridSpec,
    parallel: bool,
) -> Result<WignerGrid> {
    if !(k_c > 0.0) {
        return Err(Error::Domain(format!("radon cutoff {k_c} must be > 0")));
    }
    let (x_axis, p_axis) = spec.axes();
    let rows: Vec<usize> = (0..x_axis.len()).collect();
    let fill_row = |&ix: &usize| -> Vec<f64> {
        let x = x_axis[ix];
        p_axis
            .iter()
            .map(|&p| backproject_point(tomogram, k_c, x, p))
            .collect()
    };

    #[cfg(feature = "parallel")]
    let data: Vec<Vec<f64>> = if parallel {
        use rayon::prelude::*;
        rows.par_iter().map(fill_row).collect()
    } else {
        rows.iter().map(fill_row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let data: Vec<Vec<f64>> = {
        let _ = parallel;
        rows.iter().map(fill_row).collect()
    };

    Ok(WignerGrid {
        x_axis,
        p_axis,
        values: data.into_iter().flatten().collect(),
    })
}

/// Back-projection evaluated at arbitrary phase-space points.
pub fn backprojection_at(tomogram: &Tomogram, k_c: f64, points: &[(f64, f64)]) -> Vec<f64> {
    points
        .iter()
        .map(|&(x, p)| backproject_point(tomogram, k_c, x, p))
        .collect()
}

fn backproject_point(tomogram: &Tomogram, k_c: f64, x: f64, p: f64) -> f64 {
    let d_theta = std::f64::consts::TAU / tomogram.theta.len() as f64;
    let mut acc = 0.0;
    for (j, &theta) in tomogram.theta.iter().enumerate() {
        let (s_t, c_t) = theta.sin_cos();
        let proj = x * c_t + p * s_t;
        let probs = &tomogram.probs[j];
        for (k, &pk) in probs.iter().enumerate() {
            if pk > 0.0 {
                acc += pk * radon_kernel(proj - tomogram.x[k], k_c);
            }
        }
    }
    // θ spans the full circle, counting each projection line twice
    acc * d_theta / (4.0 * std::f64::consts::PI * std::f64::consts::PI)
}

/// Wigner function of |n><m| at a point (n ≥ m):
/// W_nm = ((−1)^m/π)·√(m!/n!)·(√2(x−ip))^{n−m}·L_m^{n−m}(2r²)·e^{−r²}.
fn fock_wigner(n: usize, m: usize, x: f64, p: f64) -> Complex64 {
    debug_assert!(n >= m);
    let r2 = x * x + p * p;
    let k = n - m;
    // log-space factorial ratio sqrt(m!/n!)
    let mut log_ratio = 0.0f64;
    for j in m + 1..=n {
        log_ratio -= (j as f64).ln();
    }
    let pref = if m % 2 == 0 { 1.0 } else { -1.0 } / std::f64::consts::PI
        * (0.5 * log_ratio).exp()
        * (-r2).exp()
        * laguerre(m, k as f64, 2.0 * r2);
    let z = Complex64::new(x, -p) * std::f64::consts::SQRT_2;
    pref * z.powu(k as u32)
}

/// Generalized Laguerre polynomial L_m^κ(z) by the three-term recurrence.
fn laguerre(m: usize, kappa: f64, z: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut curr = 1.0 + kappa - z;
    for j in 1..m {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + kappa - z) * curr - (jf + kappa) * prev) / (jf + 1.0);
        prev = curr;
        curr = next;
    }
    curr
}

/// Synthesize the Wigner function of ρ in the Fock basis on a grid.
pub fn wigner_from_density(rho: &DensityMatrix, spec: &WignerGridSpec) -> WignerGrid {
    let (x_axis, p_axis) = spec.axes();
    let dim = rho.dim();
    let mut values = Vec::with_capacity(x_axis.len() * p_axis.len());
    for &x in &x_axis {
        for &p in &p_axis {
            let mut w = 0.0;
            for n in 0..dim {
                w += rho.get(n, n).re * fock_wigner(n, n, x, p).re;
                for m in 0..n {
                    let term = rho.get(n, m) * fock_wigner(n, m, x, p);
                    w += 2.0 * term.re;
                }
            }
            values.push(w);
        }
    }
    WignerGrid {
        x_axis,
        p_axis,
        values,
    }
}

/// Integrate W over p, returning the marginal distribution along x.
pub fn marginal_over_p(grid: &WignerGrid) -> Vec<f64> {
    let dp = grid.p_axis[1] - grid.p_axis[0];
    (0..grid.x_axis.len())
        .map(|ix| {
            (0..grid.p_axis.len())
                .map(|ip| grid.at(ix, ip))
                .sum::<f64>()
                * dp
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::PatternKernel;
    use crate::testutil::gaussian_samples;
    use crate::tomography::{estimate_density_matrix, marginal_histogram};

    #[test]
    fn fock_wigner_matches_convolution_integral() {
        // brute force: W_nm = (1/π) ∫ ψ_n(x+y) ψ_m(x−y) e^{−2ipy} dy
        let brute = |n: usize, m: usize, x: f64, p: f64| -> Complex64 {
            let ny = 4001;
            let span = 10.0;
            let h = 2.0 * span / (ny - 1) as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..ny {
                let y = -span + i as f64 * h;
                let pn = crate::pattern::oscillator_wavefunction(n, &[x + y])[0];
                let pm = crate::pattern::oscillator_wavefunction(m, &[x - y])[0];
                let w = if i == 0 || i == ny - 1 { 0.5 } else { 1.0 };
                acc += w * pn * pm * Complex64::from_polar(1.0, -2.0 * p * y);
            }
            acc * h / std::f64::consts::PI
        };
        for &(n, m, x, p) in &[
            (0usize, 0usize, 0.5, 0.3),
            (1, 0, 0.7, -0.4),
            (2, 1, 0.3, 0.8),
            (3, 1, -0.6, 0.5),
            (4, 4, 1.0, 0.2),
        ] {
            let b = brute(n, m, x, p);
            let c = fock_wigner(n, m, x, p);
            assert!(
                (b - c).norm() < 1e-8,
                "W_{n}{m}({x},{p}): brute {b} closed {c}"
            );
        }
    }

    #[test]
    fn vacuum_and_single_photon_at_origin() {
        let vac = DensityMatrix::vacuum(6);
        let spec = WignerGridSpec::default();
        let w = wigner_from_density(&vac, &spec);
        let center = w.at(60, 60);
        assert!((center - 1.0 / std::f64::consts::PI).abs() < 1e-12);
        assert!((w.integral() - 1.0).abs() < 1e-6);

        let mut one = DensityMatrix::zero(6);
        one.set(1, 1, Complex64::new(1.0, 0.0));
        let w1 = wigner_from_density(&one, &spec);
        assert!((w1.at(60, 60) + 1.0 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn vacuum_gaussian_profile() {
        let vac = DensityMatrix::vacuum(4);
        let spec = WignerGridSpec {
            x_max: 3.0,
            n_x: 61,
            p_max: 3.0,
            n_p: 61,
        };
        let w = wigner_from_density(&vac, &spec);
        for (ix, &x) in w.x_axis.iter().enumerate() {
            for (ip, &p) in w.p_axis.iter().enumerate() {
                let expect = (-(x * x + p * p)).exp() / std::f64::consts::PI;
                assert!((w.at(ix, ip) - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn backprojection_of_vacuum_tomogram() {
        let samples = gaussian_samples(0.5, 0.5, 400_000, 31);
        let tomo = marginal_histogram(&samples, 64, 128).unwrap();
        let spec = WignerGridSpec::default();
        let w = wigner_backprojection(&tomo, 5.0, &spec).unwrap();
        let center = w.at(60, 60);
        let expect = 1.0 / std::f64::consts::PI;
        assert!(
            (center / expect - 1.0).abs() < 0.03,
            "vacuum W(0,0) = {center}"
        );
        assert!((w.integral() - 1.0).abs() < 0.02, "integral {}", w.integral());
    }

    #[test]
    fn backprojection_matches_fock_synthesis_for_squeezed_state() {
        let psi_plus = 2.4650601;
        let psi_minus = 0.5263217;
        let samples = gaussian_samples(psi_plus / 2.0, psi_minus / 2.0, 500_000, 17);
        let tomo = marginal_histogram(&samples, 64, 128).unwrap();
        let spec = WignerGridSpec::default();
        let w_bp = wigner_backprojection(&tomo, 5.0, &spec).unwrap();

        let kernel = PatternKernel::build(15, 12.0, 2049).unwrap();
        let rho = estimate_density_matrix(&samples, &kernel).unwrap().rho;
        let w_fock = wigner_from_density(&rho, &spec);

        let max_w = w_fock.max_abs();
        let rms = (w_bp
            .values
            .iter()
            .zip(&w_fock.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / w_bp.values.len() as f64)
            .sqrt();
        assert!(rms < 0.02 * max_w, "rms {rms} vs 0.02*max {}", 0.02 * max_w);
        assert!((w_bp.integral() - 1.0).abs() < 0.02);

        // elongation matches the noise-power ratio
        let (vx, vp) = w_bp.second_moments();
        let ratio = (vx / vp).sqrt();
        let expect = (psi_plus / psi_minus).sqrt();
        assert!(
            (ratio / expect - 1.0).abs() < 0.1,
            "axis ratio {ratio} vs {expect}"
        );
    }

    #[test]
    fn wigner_marginal_reproduces_tomogram_column() {
        let samples = gaussian_samples(1.0, 0.3, 400_000, 53);
        let tomo = marginal_histogram(&samples, 64, 128).unwrap();
        let kernel = PatternKernel::build(12, 12.0, 2049).unwrap();
        let rho = estimate_density_matrix(&samples, &kernel).unwrap().rho;
        let spec = WignerGridSpec {
            x_max: 6.0,
            n_x: 241,
            p_max: 6.0,
            n_p: 241,
        };
        let w = wigner_from_density(&rho, &spec);
        let marg = marginal_over_p(&w);
        // compare against the θ≈0 column histogram as a density
        let col = &tomo.probs[0];
        let dx_tomo = tomo.x_step();
        let mut worst = 0.0f64;
        for (k, &pk) in col.iter().enumerate() {
            let x = tomo.x[k];
            // nearest marginal point
            let ix = ((x + spec.x_max) / (2.0 * spec.x_max) * (spec.n_x - 1) as f64).round();
            if ix < 0.0 || ix >= spec.n_x as f64 {
                continue;
            }
            let density_tomo = pk / dx_tomo;
            let density_w = marg[ix as usize];
            worst = worst.max((density_tomo - density_w).abs());
        }
        assert!(worst < 0.03, "marginal mismatch {worst}");
    }

    #[test]
    fn rotational_covariance() {
        let delta = 0.6;
        let base = gaussian_samples(1.2, 0.3, 400_000, 71);
        let mut rotated = base.clone();
        for t in rotated.theta.iter_mut() {
            *t = (*t + delta).rem_euclid(std::f64::consts::TAU);
        }
        let tomo_base = marginal_histogram(&base, 64, 128).unwrap();
        let tomo_rot = marginal_histogram(&rotated, 64, 128).unwrap();

        // W_rot(R_delta u) should equal W_base(u)
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let ang = i as f64 * 0.157;
                let r = 0.2 + 1.5 * (i as f64 / 40.0);
                (r * ang.cos(), r * ang.sin())
            })
            .collect();
        let rot_pts: Vec<(f64, f64)> = pts
            .iter()
            .map(|&(x, p)| {
                (
                    x * delta.cos() - p * delta.sin(),
                    x * delta.sin() + p * delta.cos(),
                )
            })
            .collect();
        let w_base = backprojection_at(&tomo_base, 5.0, &pts);
        let w_rot = backprojection_at(&tomo_rot, 5.0, &rot_pts);
        let max_w = w_base.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let rms = (w_base
            .iter()
            .zip(&w_rot)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / pts.len() as f64)
            .sqrt();
        assert!(rms < 0.02 * max_w, "rotation rms {rms}, max {max_w}");
    }

    #[test]
    fn cutoff_must_be_positive() {
        let samples = gaussian_samples(0.5, 0.5, 1000, 3);
        let tomo = marginal_histogram(&samples, 16, 32).unwrap();
        assert!(wigner_backprojection(&tomo, 0.0, &WignerGridSpec::default()).is_err());
    }
}
