//! Derivative-free simplex descent (Nelder-Mead) with multi-start support,
//! plus a small dense solver for the 3-parameter harmonic regression.

/// Solve a 3×3 linear system by Gauss-Jordan with partial pivoting.
pub(crate) fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in 0..3 {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..3 {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    [b[0] / a[0][0], b[1] / a[1][1], b[2] / a[2][2]]
}

/// Minimize `f` from `start` with standard Nelder-Mead coefficients.
/// Returns (best point, best value, converged).
pub fn nelder_mead<F>(
    f: &F,
    start: &[f64],
    initial_step: f64,
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64, bool)
where
    F: Fn(&[f64]) -> f64,
{
    let dim = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += initial_step;
        let v = f(&p);
        simplex.push((p, v));
    }

    let mut converged = false;
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[dim].1 - simplex[0].1;
        let size: f64 = (0..dim)
            .map(|i| (simplex[dim].0[i] - simplex[0].0[i]).abs())
            .fold(0.0, f64::max);
        if spread.abs() < tol && size < tol.sqrt() {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|i| simplex[..dim].iter().map(|(p, _)| p[i]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let reflect: Vec<f64> = (0..dim)
            .map(|i| centroid[i] + (centroid[i] - worst.0[i]))
            .collect();
        let fr = f(&reflect);

        if fr < simplex[0].1 {
            let expand: Vec<f64> = (0..dim)
                .map(|i| centroid[i] + 2.0 * (centroid[i] - worst.0[i]))
                .collect();
            let fe = f(&expand);
            simplex[dim] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflect, fr);
        } else {
            let contract: Vec<f64> = (0..dim)
                .map(|i| centroid[i] + 0.5 * (worst.0[i] - centroid[i]))
                .collect();
            let fc = f(&contract);
            if fc < worst.1 {
                simplex[dim] = (contract, fc);
            } else {
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    for i in 0..dim {
                        entry.0[i] = best[i] + 0.5 * (entry.0[i] - best[i]);
                    }
                    entry.1 = f(&entry.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    (simplex[0].0.clone(), simplex[0].1, converged)
}

/// Run Nelder-Mead from several starts; return the overall best.
pub fn multi_start<F>(
    f: &F,
    starts: &[Vec<f64>],
    initial_step: f64,
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64, bool)
where
    F: Fn(&[f64]) -> f64,
{
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for start in starts {
        let candidate = nelder_mead(f, start, initial_step, tol, max_iter);
        let better = match &best {
            None => true,
            Some((_, bv, _)) => candidate.1 < *bv,
        };
        if better {
            best = Some(candidate);
        }
    }
    best.expect("at least one start required")
}
