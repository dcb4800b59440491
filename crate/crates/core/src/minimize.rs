//! Competitor initializers and the descent loop producing near-minimizers
//! for fixed (delta, eps, boundary degree), with continuation in eps.

use num_complex::Complex64;
use std::sync::Arc;

pub use crate::descent::StepRule;
use crate::descent::{descend, DescentControl};
use crate::energy::{energy_and_gradient, energy_report, EnergyReport, EpsParam};
use crate::error::{Error, Result};
use crate::fields::{boundary_datum, AnisotropyParams, BoundaryDatum, ComplexField, Grid, GridSpec};

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Threshold on the max-norm of el_gradient scaled by h^2.
    pub grad_tol: f64,
    pub step_rule: StepRule,
    /// Reserved for randomized perturbations; the default pipeline is
    /// fully deterministic and ignores it.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 200_000,
            grad_tol: 1e-8,
            step_rule: StepRule::BarzilaiBorwein,
            seed: 0,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::Config {
                field: "max_iters",
                message: "max_iters >= 1 required".into(),
            });
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::Config {
                field: "grad_tol",
                message: format!("grad_tol > 0 required, got {}", self.grad_tol),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub field: ComplexField,
    pub report: EnergyReport,
    /// Max-norm of the gradient divided by h^2.
    pub grad_norm: f64,
    pub iters: usize,
    pub converged: bool,
}

/// Default vortex seeding: `count` points on the centered ring of radius
/// 0.3 L, equally spaced in angle starting from the positive x-axis.
pub fn ring_centers(grid: &Grid, count: usize) -> Vec<[f64; 2]> {
    let radius = match grid.spec {
        GridSpec::Square { half_width, .. } => 0.3 * half_width,
        GridSpec::Annulus { r1, r2, .. } => 0.5 * (r1 + r2),
    };
    (0..count)
        .map(|j| {
            let th = 2.0 * std::f64::consts::PI * j as f64 / count.max(1) as f64;
            [radius * th.cos(), radius * th.sin()]
        })
        .collect()
}

/// Product of |degree| single-vortex fields with linear core fill inside
/// radius eps, phase-corrected near the boundary so that the trace equals
/// the canonical boundary datum exactly.
pub fn init_competitor(
    grid: &Arc<Grid>,
    degree: i32,
    eps: EpsParam,
    centers: &[[f64; 2]],
) -> Result<ComplexField> {
    if degree == 0 {
        return Err(Error::Config {
            field: "degree",
            message: "degree 0 boundary data is out of scope".into(),
        });
    }
    if centers.len() != degree.unsigned_abs() as usize {
        return Err(Error::Placement(format!(
            "need |degree| = {} centers, got {}",
            degree.unsigned_abs(),
            centers.len()
        )));
    }
    let min_gap = 4.0 * eps.eps;
    for (i, a) in centers.iter().enumerate() {
        if grid.distance_to_boundary(a[0], a[1]) < min_gap {
            return Err(Error::Placement(format!(
                "center {i} is closer than 4 eps to the boundary"
            )));
        }
        for (j, b) in centers.iter().enumerate().skip(i + 1) {
            let d = (a[0] - b[0]).hypot(a[1] - b[1]);
            if d < min_gap {
                return Err(Error::Placement(format!(
                    "centers {i} and {j} are closer than 4 eps ({d})"
                )));
            }
        }
    }

    let conjugate = degree < 0;
    let mut field = ComplexField::from_fn(grid.clone(), |x, y| {
        let mut u = Complex64::new(1.0, 0.0);
        for a in centers {
            let z = Complex64::new(x - a[0], y - a[1]);
            let r = z.norm();
            let factor = if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                let phase = z / r;
                let phase = if conjugate { phase.conj() } else { phase };
                phase * (r / eps.eps).min(1.0)
            };
            u *= factor;
        }
        u
    });

    let datum = boundary_datum(grid, degree)?;
    apply_boundary_phase_correction(&mut field, &datum)?;
    field.apply_datum(&datum);
    Ok(field)
}

/// Multiplies the field by `exp(i chi(angle) s(z))`, where `chi` is the
/// unwrapped phase mismatch between the datum and the current trace and `s`
/// ramps from 0 (inner half of the domain) to 1 (boundary). Only the phase
/// changes, so zeros and the |u| <= 1 bound are preserved.
fn apply_boundary_phase_correction(field: &mut ComplexField, datum: &BoundaryDatum) -> Result<()> {
    let grid = field.grid.clone();
    let loop_len = grid.boundary_loop.len();

    // Unwrapped angular coordinate of the boundary loop and phase mismatch.
    let mut angles = Vec::with_capacity(loop_len);
    let mut chi = Vec::with_capacity(loop_len);
    let mut prev_angle = 0.0f64;
    let mut prev_chi = 0.0f64;
    for (k, &p) in grid.boundary_loop.iter().enumerate() {
        let [x, y] = grid.coords[p];
        let raw_angle = y.atan2(x);
        let u = field.values[p];
        if u.norm() == 0.0 {
            return Err(Error::Internal(
                "competitor trace vanished on the boundary".into(),
            ));
        }
        let ratio = datum.samples[k] * (u / u.norm()).conj();
        let raw_chi = ratio.im.atan2(ratio.re);
        if k == 0 {
            prev_angle = raw_angle;
            prev_chi = raw_chi;
        } else {
            // Unwrap both sequences to the branch nearest the previous value.
            let two_pi = 2.0 * std::f64::consts::PI;
            let mut a = raw_angle;
            while a < prev_angle - std::f64::consts::PI {
                a += two_pi;
            }
            while a > prev_angle + std::f64::consts::PI {
                a -= two_pi;
            }
            prev_angle = a;
            let mut c = raw_chi;
            while c < prev_chi - std::f64::consts::PI {
                c += two_pi;
            }
            while c > prev_chi + std::f64::consts::PI {
                c -= two_pi;
            }
            prev_chi = c;
        }
        angles.push(prev_angle);
        chi.push(prev_chi);
    }

    let angle0 = angles[0];
    let lookup_chi = |x: f64, y: f64| -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut a = y.atan2(x);
        while a < angle0 {
            a += two_pi;
        }
        while a >= angle0 + two_pi {
            a -= two_pi;
        }
        // angles is ascending over one full turn; find the bracketing segment.
        let idx = match angles.binary_search_by(|probe| probe.partial_cmp(&a).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        let (a0, c0) = (angles[idx], chi[idx]);
        let (a1, c1) = if idx + 1 < loop_len {
            (angles[idx + 1], chi[idx + 1])
        } else {
            (angles[0] + two_pi, chi[0])
        };
        if a1 == a0 {
            c0
        } else {
            let t = ((a - a0) / (a1 - a0)).clamp(0.0, 1.0);
            c0 + t * (c1 - c0)
        }
    };

    let ramp = |x: f64, y: f64| -> f64 {
        let rel = match grid.spec {
            GridSpec::Square { half_width, .. } => x.abs().max(y.abs()) / half_width,
            GridSpec::Annulus { r1, r2, .. } => (x.hypot(y) / r1).ln() / (r2 / r1).ln(),
        };
        let t = ((rel - 0.6) / 0.4).clamp(0.0, 1.0);
        t * t * (3.0 - 2.0 * t)
    };

    for (p, &[x, y]) in grid.coords.iter().enumerate() {
        let s = ramp(x, y);
        if s > 0.0 {
            field.values[p] *= Complex64::from_polar(1.0, s * lookup_chi(x, y));
        }
    }
    Ok(())
}

/// The ring-seeded competitor with the core radius capped so that the
/// placement margins (4 x core between centers and to the boundary) always
/// hold; a smaller core than eps is still an admissible initializer.
pub fn default_competitor(grid: &Arc<Grid>, degree: i32, eps: EpsParam) -> Result<ComplexField> {
    let centers = ring_centers(grid, degree.unsigned_abs() as usize);
    let mut margin = f64::INFINITY;
    for (i, a) in centers.iter().enumerate() {
        margin = margin.min(grid.distance_to_boundary(a[0], a[1]));
        for b in centers.iter().skip(i + 1) {
            margin = margin.min((a[0] - b[0]).hypot(a[1] - b[1]));
        }
    }
    let core = eps.eps.min(0.999 * margin / 4.0);
    init_competitor(grid, degree, EpsParam::new(core)?, &centers)
}

/// Descends the discrete `E_eps` over interior vertex values, keeping the
/// boundary trace bit-identical to the initial field.
pub fn minimize(
    init: &ComplexField,
    params: &AnisotropyParams,
    eps: EpsParam,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    opts.validate()?;
    let grid = init.grid.clone();
    let h2 = grid.spacing * grid.spacing;

    let x0: Vec<f64> = init
        .values
        .iter()
        .flat_map(|u| [u.re, u.im])
        .collect();
    let mut scratch = ComplexField {
        grid: grid.clone(),
        values: init.values.clone(),
    };
    let mut grad_c = vec![Complex64::new(0.0, 0.0); grid.n_vertices()];

    let outcome = descend(
        |x, g| {
            for (u, pair) in scratch.values.iter_mut().zip(x.chunks_exact(2)) {
                *u = Complex64::new(pair[0], pair[1]);
            }
            let e = energy_and_gradient(&scratch, params, eps, &mut grad_c);
            for (dst, src) in g.chunks_exact_mut(2).zip(&grad_c) {
                dst[0] = src.re;
                dst[1] = src.im;
            }
            e
        },
        x0,
        &DescentControl {
            max_iters: opts.max_iters,
            grad_tol: opts.grad_tol * h2,
            step_rule: opts.step_rule,
        },
    );

    let values: Vec<Complex64> = outcome
        .x
        .chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect();
    let field = ComplexField { grid, values };

    if outcome.diverged || !outcome.energy.is_finite() {
        return Err(Error::Divergence {
            eps: eps.eps,
            iters: outcome.iters,
            last: Box::new(ComplexField {
                grid: init.grid.clone(),
                values: init.values.clone(),
            }),
        });
    }

    let report = energy_report(&field, params, eps);
    Ok(SolveResult {
        field,
        report,
        grad_norm: outcome.grad_max / h2,
        iters: outcome.iters,
        converged: outcome.converged,
    })
}

/// Warm-started sweep over a strictly decreasing eps schedule; result k
/// initializes solve k+1.
pub fn continuation(
    grid: &Arc<Grid>,
    params: &AnisotropyParams,
    degree: i32,
    eps_schedule: &[f64],
    opts: &SolveOptions,
) -> Result<Vec<SolveResult>> {
    if eps_schedule.is_empty() {
        return Err(Error::Config {
            field: "eps_schedule",
            message: "at least one eps required".into(),
        });
    }
    for w in eps_schedule.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Config {
                field: "eps_schedule",
                message: format!("schedule must be strictly decreasing, got {w:?}"),
            });
        }
    }
    let eps0 = EpsParam::new(eps_schedule[0])?;
    let mut current = default_competitor(grid, degree, eps0)?;
    let mut results = Vec::with_capacity(eps_schedule.len());
    for &e in eps_schedule {
        let eps = EpsParam::new(e)?;
        let solved = minimize(&current, params, eps, opts)?;
        current = solved.field.clone();
        results.push(solved);
    }
    Ok(results)
}

/// Componentwise harmonic extension of the boundary datum (SOR on the
/// five-point Laplacian); a smooth degree-carrying initializer.
pub fn harmonic_extension(grid: &Arc<Grid>, datum: &BoundaryDatum) -> Result<ComplexField> {
    let n = grid.square_n().ok_or_else(|| {
        Error::Geometry("harmonic extension is implemented for square grids".into())
    })?;
    let mut field = ComplexField::constant(grid.clone(), Complex64::new(0.0, 0.0));
    field.apply_datum(datum);
    let omega = 2.0 / (1.0 + (std::f64::consts::PI / (n - 1) as f64).sin());
    for _ in 0..20 * n {
        let mut max_change = 0.0f64;
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let p = j * n + i;
                let avg = (field.values[p - 1]
                    + field.values[p + 1]
                    + field.values[p - n]
                    + field.values[p + n])
                    * 0.25;
                let new = field.values[p] + (avg - field.values[p]) * omega;
                max_change = max_change.max((new - field.values[p]).norm());
                field.values[p] = new;
            }
        }
        if max_change < 1e-13 {
            break;
        }
    }
    Ok(field)
}

/// Max over cells of the discrete |grad u| (used by the a-priori bound
/// check `|grad u| <= C / eps`).
pub fn max_cell_gradient(field: &ComplexField) -> f64 {
    let mut max = 0.0f64;
    for cell in &field.grid.cells {
        let mut vx = 0.0;
        let mut vy = 0.0;
        let mut wx = 0.0;
        let mut wy = 0.0;
        for q in 0..4 {
            let u = field.values[cell.v[q]];
            vx += cell.cx[q] * u.re;
            vy += cell.cy[q] * u.re;
            wx += cell.cx[q] * u.im;
            wy += cell.cy[q] * u.im;
        }
        max = max.max((vx * vx + vy * vy + wx * wx + wy * wy).sqrt());
    }
    max
}
