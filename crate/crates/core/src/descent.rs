//! Shared first-order descent driver: free-running Barzilai-Borwein steps
//! with a nonmonotone safeguard, or Polak-Ribiere conjugate gradients with a
//! monotone backtracking line search. Operates on flat `f64` vectors.
//!
//! The iterate sequence under BB may wander upward transiently; the driver
//! tracks the best iterate seen, and after ten consecutive energy rises (or
//! a non-finite trial) restarts from that best point with a plain
//! safeguarded gradient step. Accepted energies, i.e. the best-so-far
//! record, are therefore non-increasing.

/// Step-size rule for the descent loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    BarzilaiBorwein,
    NonlinearCg,
}

pub(crate) struct DescentControl {
    pub max_iters: usize,
    /// Convergence threshold on the raw max-norm of the gradient.
    pub grad_tol: f64,
    pub step_rule: StepRule,
}

pub(crate) struct DescentOutcome {
    pub x: Vec<f64>,
    pub energy: f64,
    pub grad_max: f64,
    pub iters: usize,
    pub converged: bool,
    pub diverged: bool,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &a| m.max(a.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn descend<F>(f: F, x0: Vec<f64>, ctl: &DescentControl) -> DescentOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    match ctl.step_rule {
        StepRule::BarzilaiBorwein => descend_bb(f, x0, ctl),
        StepRule::NonlinearCg => descend_cg(f, x0, ctl),
    }
}

fn descend_bb<F>(mut f: F, x0: Vec<f64>, ctl: &DescentControl) -> DescentOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut grad = vec![0.0; n];
    let mut energy = f(&x, &mut grad);
    if !energy.is_finite() {
        return DescentOutcome {
            x,
            energy,
            grad_max: f64::NAN,
            iters: 0,
            converged: false,
            diverged: true,
        };
    }

    let mut best_x = x.clone();
    let mut best_energy = energy;

    let mut x_prev = vec![0.0; n];
    let mut grad_prev = vec![0.0; n];
    let mut have_prev = false;
    let mut alpha_plain = initial_step(&grad);
    let mut rises = 0usize;
    let mut stagnant = 0usize;
    let mut restarts_without_progress = 0usize;

    for iter in 0..ctl.max_iters {
        let grad_max = max_abs(&grad);
        if grad_max <= ctl.grad_tol {
            return DescentOutcome {
                x,
                energy,
                grad_max,
                iters: iter,
                converged: true,
                diverged: false,
            };
        }

        let alpha = if have_prev {
            let mut ss = 0.0;
            let mut sy = 0.0;
            for i in 0..n {
                let s = x[i] - x_prev[i];
                let y = grad[i] - grad_prev[i];
                ss += s * s;
                sy += s * y;
            }
            if sy > 0.0 && ss > 0.0 {
                (ss / sy).clamp(1e-14, 1e8)
            } else {
                alpha_plain
            }
        } else {
            alpha_plain
        };

        x_prev.copy_from_slice(&x);
        grad_prev.copy_from_slice(&grad);
        for i in 0..n {
            x[i] -= alpha * grad[i];
        }
        let e_new = f(&x, &mut grad);
        have_prev = true;

        if e_new.is_finite() && e_new <= best_energy {
            best_energy = e_new;
            best_x.copy_from_slice(&x);
            energy = e_new;
            rises = 0;
            stagnant = 0;
            restarts_without_progress = 0;
            continue;
        }

        stagnant += 1;
        // A long stretch of iterates hovering well above the best energy is
        // an unproductive oscillation; tiny hovering near the best is the
        // normal nonmonotone tail and is left alone.
        let oscillating =
            stagnant >= 200 && e_new > best_energy + 1e-6 * (1.0 + best_energy.abs());
        if e_new.is_finite() && e_new <= energy && !oscillating {
            // Below the previous iterate but above the best: keep going.
            energy = e_new;
            rises = 0;
            continue;
        }

        rises += 1;
        if e_new.is_finite() && rises < 10 && !oscillating {
            energy = e_new;
            continue;
        }

        // Ten consecutive rises or a non-finite energy: restart from the
        // best point with a plain gradient step, backtracked until it
        // decreases the best energy.
        x.copy_from_slice(&best_x);
        energy = f(&x, &mut grad);
        have_prev = false;
        rises = 0;
        stagnant = 0;
        let mut step = alpha_plain;
        let mut improved = false;
        for _ in 0..60 {
            for i in 0..n {
                x_prev[i] = x[i] - step * grad[i];
            }
            let e_try = f(&x_prev, &mut grad_prev);
            if e_try.is_finite() && e_try <= best_energy {
                std::mem::swap(&mut x, &mut x_prev);
                std::mem::swap(&mut grad, &mut grad_prev);
                energy = e_try;
                best_energy = e_try;
                best_x.copy_from_slice(&x);
                alpha_plain = step;
                have_prev = true;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            // Re-evaluate at the best point and give up on further descent.
            x.copy_from_slice(&best_x);
            energy = f(&x, &mut grad);
            restarts_without_progress += 1;
            if restarts_without_progress >= 2 {
                let grad_max = max_abs(&grad);
                return DescentOutcome {
                    x,
                    energy,
                    grad_max,
                    iters: iter + 1,
                    converged: grad_max <= ctl.grad_tol,
                    diverged: !energy.is_finite(),
                };
            }
        }
    }

    // Out of iterations: report the best point.
    x.copy_from_slice(&best_x);
    energy = f(&x, &mut grad);
    let grad_max = max_abs(&grad);
    DescentOutcome {
        x,
        energy,
        grad_max,
        iters: ctl.max_iters,
        converged: grad_max <= ctl.grad_tol,
        diverged: false,
    }
}

fn descend_cg<F>(mut f: F, x0: Vec<f64>, ctl: &DescentControl) -> DescentOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut grad = vec![0.0; n];
    let mut energy = f(&x, &mut grad);
    if !energy.is_finite() {
        return DescentOutcome {
            x,
            energy,
            grad_max: f64::NAN,
            iters: 0,
            converged: false,
            diverged: true,
        };
    }

    let mut dir: Vec<f64> = grad.iter().map(|g| -g).collect();
    let mut grad_prev = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial_grad = vec![0.0; n];
    let mut alpha = initial_step(&grad);

    for iter in 0..ctl.max_iters {
        let grad_max = max_abs(&grad);
        if grad_max <= ctl.grad_tol {
            return DescentOutcome {
                x,
                energy,
                grad_max,
                iters: iter,
                converged: true,
                diverged: false,
            };
        }

        if dot(&dir, &grad) >= 0.0 {
            for i in 0..n {
                dir[i] = -grad[i];
            }
        }

        let mut step = alpha * 2.0;
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..n {
                trial[i] = x[i] + step * dir[i];
            }
            let e_try = f(&trial, &mut trial_grad);
            if e_try.is_finite() && e_try <= energy {
                grad_prev.copy_from_slice(&grad);
                std::mem::swap(&mut x, &mut trial);
                std::mem::swap(&mut grad, &mut trial_grad);
                energy = e_try;
                alpha = step;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            let grad_max = max_abs(&grad);
            return DescentOutcome {
                x,
                energy,
                grad_max,
                iters: iter,
                converged: grad_max <= ctl.grad_tol,
                diverged: false,
            };
        }

        // Polak-Ribiere+ update.
        let gg_prev = dot(&grad_prev, &grad_prev);
        let beta = if gg_prev > 0.0 {
            let mut num = 0.0;
            for i in 0..n {
                num += grad[i] * (grad[i] - grad_prev[i]);
            }
            (num / gg_prev).max(0.0)
        } else {
            0.0
        };
        for i in 0..n {
            dir[i] = -grad[i] + beta * dir[i];
        }
    }

    let grad_max = max_abs(&grad);
    DescentOutcome {
        x,
        energy,
        grad_max,
        iters: ctl.max_iters,
        converged: grad_max <= ctl.grad_tol,
        diverged: false,
    }
}

fn initial_step(grad: &[f64]) -> f64 {
    let gmax = max_abs(grad);
    if gmax > 0.0 {
        (0.01 / gmax).clamp(1e-12, 1e6)
    } else {
        1.0
    }
}
