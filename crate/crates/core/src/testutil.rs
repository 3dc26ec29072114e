//! Helpers shared by unit tests.

use crate::types::QuadratureSamples;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

/// Standard normal via the polar method on a seeded stream.
pub fn normal(rng: &mut ChaCha12Rng) -> f64 {
    loop {
        let u: f64 = rng.gen_range(-1.0..1.0);
        let v: f64 = rng.gen_range(-1.0..1.0);
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// Synthetic (x, θ) draws from an axis-aligned zero-mean Gaussian state:
/// θ on a uniform grid, x | θ ~ N(0, V(θ)), V(θ) = V₊cos²θ + V₋sin²θ.
pub fn gaussian_samples(v_plus: f64, v_minus: f64, n: usize, seed: u64) -> QuadratureSamples {
    use rand::SeedableRng;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    let mut theta = Vec::with_capacity(n);
    for i in 0..n {
        let t = std::f64::consts::TAU * (i as f64 + 0.5) / n as f64;
        let v = v_plus * t.cos().powi(2) + v_minus * t.sin().powi(2);
        x.push(v.sqrt() * normal(&mut rng));
        theta.push(t);
    }
    QuadratureSamples {
        band_index: 0,
        center_frequency: 0.0,
        x,
        theta,
    }
}
