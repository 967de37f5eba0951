//! Derivative-free simplex search plus a quasi-Newton polish, both operating
//! on plain minimisation objectives. Objectives may return `f64::INFINITY`
//! for infeasible points; both stages treat such points as arbitrarily bad.

/// Nelder-Mead settings; the standard reflection/expansion/contraction/shrink
/// coefficients are fixed at 1, 2, 0.5, 0.5.
#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Stop when the simplex function spread falls below this.
    pub f_tol: f64,
    /// Initial displacement applied per coordinate to build the simplex.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            f_tol: 1e-10,
            initial_step: 0.25,
        }
    }
}

/// Minimises `f` from `x0`; returns `(argmin, min, iterations)`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let fx0 = f(x0);
    simplex.push((x0.to_vec(), fx0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let fx = f(&x);
        simplex.push((x, fx));
    }

    let mut iterations = 0;
    while iterations < opts.max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= opts.f_tol * (best.abs() + 1.0) || !best.is_finite() {
            break;
        }
        iterations += 1;

        // centroid of all but the worst vertex
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let point_at = |t: f64, worst_x: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(worst_x)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let worst_x = simplex[n].0.clone();
        let reflected = point_at(1.0, &worst_x);
        let f_reflected = f(&reflected);

        if f_reflected < simplex[0].1 {
            let expanded = point_at(2.0, &worst_x);
            let f_expanded = f(&expanded);
            simplex[n] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
            continue;
        }
        if f_reflected < simplex[n - 1].1 {
            simplex[n] = (reflected, f_reflected);
            continue;
        }
        // contraction, outside or inside of the worst vertex
        let (contracted, f_contracted) = if f_reflected < simplex[n].1 {
            let x = point_at(0.5, &worst_x);
            let fx = f(&x);
            (x, fx)
        } else {
            let x = point_at(-0.5, &worst_x);
            let fx = f(&x);
            (x, fx)
        };
        if f_contracted < simplex[n].1.min(f_reflected) {
            simplex[n] = (contracted, f_contracted);
            continue;
        }
        // shrink toward the best vertex
        let best_x = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best_x
                .iter()
                .zip(&entry.0)
                .map(|(b, xi)| b + 0.5 * (xi - b))
                .collect();
            let fx = f(&x);
            *entry = (x, fx);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    (x, fx, iterations)
}

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Stop once the gradient norm falls below this.
    pub grad_tol: f64,
    /// Relative step for the central-difference gradient.
    pub fd_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            grad_tol: 1e-6,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// The gradient tolerance was reached (as opposed to a stalled line
    /// search or the iteration cap).
    pub converged: bool,
}

fn gradient<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64], rel_step: f64) -> Option<Vec<f64>> {
    let mut g = vec![0.0; x.len()];
    let mut xs = x.to_vec();
    for i in 0..x.len() {
        let h = rel_step * x[i].abs().max(1.0);
        xs[i] = x[i] + h;
        let up = f(&xs);
        xs[i] = x[i] - h;
        let down = f(&xs);
        xs[i] = x[i];
        if !up.is_finite() || !down.is_finite() {
            return None;
        }
        g[i] = (up - down) / (2.0 * h);
    }
    Some(g)
}

/// BFGS with central-difference gradients and Armijo backtracking.
pub fn bfgs<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &BfgsOptions) -> BfgsOutcome {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    // inverse Hessian approximation, started at the identity
    let mut h_inv = nalgebra::DMatrix::<f64>::identity(n, n);

    let mut grad = match gradient(&mut f, &x, opts.fd_step) {
        Some(g) => g,
        None => {
            return BfgsOutcome {
                x,
                f: fx,
                grad_norm: f64::INFINITY,
                iterations: 0,
                converged: false,
            }
        }
    };

    let norm = |v: &[f64]| v.iter().map(|g| g * g).sum::<f64>().sqrt();
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let grad_norm = norm(&grad);
        if grad_norm <= opts.grad_tol {
            return BfgsOutcome {
                x,
                f: fx,
                grad_norm,
                iterations,
                converged: true,
            };
        }
        iterations += 1;

        let g_vec = nalgebra::DVector::from_column_slice(&grad);
        let mut direction = -(&h_inv * &g_vec);
        // fall back to steepest descent when the model loses descent
        if direction.dot(&g_vec) >= 0.0 {
            h_inv = nalgebra::DMatrix::identity(n, n);
            direction = -g_vec.clone();
        }

        // Armijo backtracking
        let slope = direction.dot(&g_vec);
        let mut step = 1.0;
        let mut next_x;
        let mut next_f;
        loop {
            next_x = x.clone();
            for i in 0..n {
                next_x[i] += step * direction[i];
            }
            next_f = f(&next_x);
            if next_f.is_finite() && next_f <= fx + 1e-4 * step * slope {
                break;
            }
            step *= 0.5;
            if step < 1e-14 {
                // stalled: report the best point found
                return BfgsOutcome {
                    x,
                    f: fx,
                    grad_norm,
                    iterations,
                    converged: grad_norm <= opts.grad_tol,
                };
            }
        }

        let next_grad = match gradient(&mut f, &next_x, opts.fd_step) {
            Some(g) => g,
            None => {
                return BfgsOutcome {
                    x: next_x,
                    f: next_f,
                    grad_norm: f64::NAN,
                    iterations,
                    converged: false,
                }
            }
        };

        // BFGS inverse update with a curvature guard
        let s = nalgebra::DVector::from_iterator(n, next_x.iter().zip(&x).map(|(a, b)| a - b));
        let y = nalgebra::DVector::from_iterator(
            n,
            next_grad.iter().zip(&grad).map(|(a, b)| a - b),
        );
        let sy = s.dot(&y);
        if sy > 1e-12 * norm(s.as_slice()) * norm(y.as_slice()) {
            let rho = 1.0 / sy;
            let identity = nalgebra::DMatrix::<f64>::identity(n, n);
            let left = &identity - rho * &s * y.transpose();
            let right = &identity - rho * &y * s.transpose();
            h_inv = &left * h_inv * &right + rho * &s * s.transpose();
        }

        x = next_x;
        fx = next_f;
        grad = next_grad;
    }
    let grad_norm = norm(&grad);
    BfgsOutcome {
        x,
        f: fx,
        grad_norm,
        iterations,
        converged: grad_norm <= opts.grad_tol,
    }
}
