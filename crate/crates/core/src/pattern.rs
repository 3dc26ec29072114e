//! Harmonic-oscillator wavefunctions and tomographic pattern functions.
//!
//! Convention: vacuum marginal |ψ₀(x)|² = π^(-1/2) e^(-x²), i.e. the vacuum
//! quadrature variance is 1/2.
//!
//! The sampling kernel is f_nm(x) = ∂ₓ[ψ_n(x) φ_m(x)] (n ≤ m), where φ_m is
//! the non-normalizable second solution of the oscillator equation with
//! opposite parity and Wronskian ψφ' − ψ'φ = 2. Evaluating that product
//! directly is hopeless in double precision (φ grows like e^(x²/2), the
//! raising ladder cancels catastrophically outside the classical region), so
//! everything is computed through the rescaled functions
//!
//!   w_m(x) = φ_m(x) e^(-x²/2),   w''  + 2x w' + (2m+2) w = 0,
//!   f_nm(x) = c_n [H_n'(x) w_m(x) + H_n(x) w_m'(x)],   c_n = (2ⁿ n! √π)^(-1/2),
//!
//! where only polynomial-scale quantities appear. w_m is integrated outward
//! from exact parity seeds at x = 0; the outward direction follows the
//! dominant (algebraically decaying) solution, so the integration is stable.

use crate::types::{Error, Result};

/// Normalized oscillator eigenfunction ψ_n evaluated on a grid, by the
/// standard three-term recurrence on scaled functions.
pub fn oscillator_wavefunction(n: usize, grid: &[f64]) -> Vec<f64> {
    grid.iter().map(|&x| psi_upto(n, x)[n]).collect()
}

/// ψ_0..ψ_n at a point.
fn psi_upto(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp());
    if n >= 1 {
        out.push(std::f64::consts::SQRT_2 * x * out[0]);
    }
    for k in 1..n {
        let next = (2.0 / (k as f64 + 1.0)).sqrt() * x * out[k]
            - (k as f64 / (k as f64 + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// Physicists' Hermite polynomials H_0..H_n at a point.
fn hermite_upto(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(2.0 * x);
    }
    for k in 1..n {
        let next = 2.0 * x * out[k] - 2.0 * k as f64 * out[k - 1];
        out.push(next);
    }
    out
}

/// Sampled pattern functions f_nm on a symmetric grid, 0 ≤ n ≤ m ≤ n_max.
#[derive(Debug, Clone)]
pub struct PatternKernel {
    n_max: usize,
    x: Vec<f64>,
    /// Upper-triangle storage: f[tri(n,m)] is the sampled f_nm.
    f: Vec<Vec<f64>>,
    step: f64,
}

impl PatternKernel {
    /// Build the kernel on x ∈ [−span, span] with `n_points` samples.
    ///
    /// The span must cover the classical region of the highest Fock state,
    /// |x| ≥ √(2·n_max+1) plus margin; otherwise the construction refuses.
    pub fn build(n_max: usize, span: f64, n_points: usize) -> Result<Self> {
        let required = (2.0 * n_max as f64 + 1.0).sqrt() + 2.0;
        if span < required {
            return Err(Error::KernelSpan {
                required,
                actual: span,
            });
        }
        if n_points < 64 {
            return Err(Error::Config("kernel grid needs at least 64 points".into()));
        }
        let n_points = if n_points % 2 == 0 {
            n_points + 1 // odd count so x = 0 is a node
        } else {
            n_points
        };
        let step = 2.0 * span / (n_points - 1) as f64;
        let x: Vec<f64> = (0..n_points).map(|i| -span + i as f64 * step).collect();
        let mid = n_points / 2;

        // w_m and w_m' on the positive half-grid, mirrored by parity.
        let seeds = w_seeds(n_max);
        let mut w = vec![vec![0.0f64; n_points]; n_max + 1];
        let mut dw = vec![vec![0.0f64; n_points]; n_max + 1];
        for m in 0..=n_max {
            let (wm, dwm) = integrate_w(m, &x[mid..], seeds[m]);
            for (j, (&wv, &dv)) in wm.iter().zip(&dwm).enumerate() {
                w[m][mid + j] = wv;
                dw[m][mid + j] = dv;
                if j > 0 {
                    // w_m has parity opposite to ψ_m: (−1)^(m+1)
                    let parity = if m % 2 == 0 { -1.0 } else { 1.0 };
                    w[m][mid - j] = parity * wv;
                    dw[m][mid - j] = -parity * dv;
                }
            }
        }

        let n_pairs = (n_max + 1) * (n_max + 2) / 2;
        let mut f = vec![vec![0.0f64; n_points]; n_pairs];
        for (i, &xi) in x.iter().enumerate() {
            let h = hermite_upto(n_max, xi);
            for n in 0..=n_max {
                let cn = norm_const(n);
                let dh = if n == 0 { 0.0 } else { 2.0 * n as f64 * h[n - 1] };
                for m in n..=n_max {
                    f[tri_index(n, m, n_max)][i] = cn * (dh * w[m][i] + h[n] * dw[m][i]);
                }
            }
        }
        Ok(Self {
            n_max,
            x,
            f,
            step,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn grid(&self) -> &[f64] {
        &self.x
    }

    /// Sampled values of f_nm (symmetric in n, m).
    pub fn values(&self, n: usize, m: usize) -> &[f64] {
        let (n, m) = if n <= m { (n, m) } else { (m, n) };
        &self.f[tri_index(n, m, self.n_max)]
    }

    /// f_nm at an arbitrary point by linear interpolation; zero outside the
    /// grid, where the kernel has decayed.
    pub fn eval(&self, n: usize, m: usize, x: f64) -> f64 {
        let span = *self.x.last().unwrap();
        if !(-span..=span).contains(&x) {
            return 0.0;
        }
        let pos = (x + span) / self.step;
        let i = (pos.floor() as usize).min(self.x.len() - 2);
        let frac = pos - i as f64;
        let row = self.values(n, m);
        row[i] * (1.0 - frac) + row[i + 1] * frac
    }
}

fn norm_const(n: usize) -> f64 {
    let mut log_fact = 0.0f64;
    for k in 1..=n {
        log_fact += (k as f64).ln();
    }
    let log_c = -0.5 * (n as f64 * 2.0f64.ln() + log_fact + 0.5 * std::f64::consts::PI.ln());
    log_c.exp()
}

// row-major upper triangle: row n holds m = n..=n_max
fn tri_index(n: usize, m: usize, n_max: usize) -> usize {
    n * (n_max + 1) - (n * n - n) / 2 + (m - n)
}

/// (w_m(0), w_m'(0)) seeds from the exact ladder at the origin, starting at
/// φ_0(0) = 0, φ_0'(0) = 2·π^(1/4) (Wronskian 2 against ψ_0).
fn w_seeds(n_max: usize) -> Vec<(f64, f64)> {
    let mut seeds = Vec::with_capacity(n_max + 1);
    let mut value = 0.0f64;
    let mut slope = 2.0 * std::f64::consts::PI.powf(0.25);
    seeds.push((value, slope));
    for n in 0..n_max {
        let r = 1.0 / (2.0 * (n as f64 + 1.0)).sqrt();
        let next_value = -slope * r;
        let next_slope = (2.0 * n as f64 + 2.0) * value * r;
        value = next_value;
        slope = next_slope;
        seeds.push((value, slope));
    }
    seeds
}

/// RK4 integration of w'' + 2x w' + (2m+2) w = 0 outward over an ascending
/// grid starting at 0, with enough substeps for near-machine accuracy.
fn integrate_w(m: usize, xs: &[f64], seed: (f64, f64)) -> (Vec<f64>, Vec<f64>) {
    const SUBSTEPS: usize = 8;
    let c = 2.0 * m as f64 + 2.0;
    let deriv = |x: f64, w: f64, v: f64| (v, -2.0 * x * v - c * w);
    let (mut w, mut v) = seed;
    let mut ws = Vec::with_capacity(xs.len());
    let mut vs = Vec::with_capacity(xs.len());
    ws.push(w);
    vs.push(v);
    for i in 1..xs.len() {
        let h = (xs[i] - xs[i - 1]) / SUBSTEPS as f64;
        let mut x = xs[i - 1];
        for _ in 0..SUBSTEPS {
            let (k1w, k1v) = deriv(x, w, v);
            let (k2w, k2v) = deriv(x + h / 2.0, w + h / 2.0 * k1w, v + h / 2.0 * k1v);
            let (k3w, k3v) = deriv(x + h / 2.0, w + h / 2.0 * k2w, v + h / 2.0 * k2v);
            let (k4w, k4v) = deriv(x + h, w + h * k3w, v + h * k3v);
            w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
            v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            x += h;
        }
        ws.push(w);
        vs.push(v);
    }
    (ws, vs)
}
