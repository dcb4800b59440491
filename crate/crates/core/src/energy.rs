//! Discrete div/curl split energies and the exact gradient of the discrete
//! functional with respect to interior vertex values.
//!
//! The elastic terms are cell-centered: div and curl are formed from the four
//! corner values of each cell, so the energy is a sum of per-cell quadratic
//! forms and the gradient below is its exact derivative, not a separate
//! discretization of the Euler-Lagrange operator. The potential is a
//! vertex-weighted (trapezoidal) sum.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{AnisotropyParams, ComplexField, Grid};

/// Core-size parameter of the penalization `(1/4 eps^2) (1 - |u|^2)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsParam {
    pub eps: f64,
}

impl EpsParam {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Config {
                field: "eps",
                message: format!("eps > 0 required, got {eps}"),
            });
        }
        Ok(Self { eps })
    }

    /// A vortex core of size eps needs a couple of cells to be seen at all.
    pub fn is_under_resolved(&self, grid: &Grid) -> bool {
        self.eps < 2.0 * grid.spacing
    }
}

/// Decomposed energy values of one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    /// `(K1/2) int (div u)^2`
    pub div_part: f64,
    /// `(K3/2) int (curl u)^2`
    pub curl_part: f64,
    /// `(1/4 eps^2) int (1 - |u|^2)^2`
    pub potential: f64,
    pub e0: f64,
    pub e_eps: f64,
    /// `(1/2) int |grad u|^2`
    pub g0: f64,
    pub g_eps: f64,
}

/// Cell-center derivative components of `u = v + i w` on one cell:
/// `(v_x, v_y, w_x, w_y)`.
#[inline]
fn cell_derivs(values: &[Complex64], cell: &crate::fields::Cell) -> (f64, f64, f64, f64) {
    let mut vx = 0.0;
    let mut vy = 0.0;
    let mut wx = 0.0;
    let mut wy = 0.0;
    for q in 0..4 {
        let u = values[cell.v[q]];
        vx += cell.cx[q] * u.re;
        vy += cell.cy[q] * u.re;
        wx += cell.cx[q] * u.im;
        wy += cell.cy[q] * u.im;
    }
    (vx, vy, wx, wy)
}

/// Full decomposed energy evaluation. Deterministic for fixed input.
pub fn energy_report(field: &ComplexField, params: &AnisotropyParams, eps: EpsParam) -> EnergyReport {
    let mut div_part = 0.0;
    let mut curl_part = 0.0;
    let mut g0 = 0.0;
    for cell in &field.grid.cells {
        let (vx, vy, wx, wy) = cell_derivs(&field.values, cell);
        let div = vx + wy;
        let curl = wx - vy;
        div_part += cell.area * 0.5 * params.k1 * div * div;
        curl_part += cell.area * 0.5 * params.k3 * curl * curl;
        g0 += cell.area * 0.5 * (vx * vx + vy * vy + wx * wx + wy * wy);
    }
    let potential = potential_energy(field, eps);
    EnergyReport {
        div_part,
        curl_part,
        potential,
        e0: div_part + curl_part,
        e_eps: div_part + curl_part + potential,
        g0,
        g_eps: g0 + potential,
    }
}

fn potential_energy(field: &ComplexField, eps: EpsParam) -> f64 {
    let c = 1.0 / (4.0 * eps.eps * eps.eps);
    let mut potential = 0.0;
    for (p, u) in field.values.iter().enumerate() {
        let dev = 1.0 - u.norm_sqr();
        potential += field.grid.vertex_weights[p] * c * dev * dev;
    }
    potential
}

/// Exact derivative of the discrete `E_eps` with respect to interior vertex
/// values; identically zero on the boundary mask.
pub fn el_gradient(field: &ComplexField, params: &AnisotropyParams, eps: EpsParam) -> ComplexField {
    let mut grad = vec![Complex64::new(0.0, 0.0); field.values.len()];
    energy_and_gradient(field, params, eps, &mut grad);
    ComplexField {
        grid: field.grid.clone(),
        values: grad,
    }
}

/// Fused energy + gradient pass used by the descent loop. Returns `E_eps`
/// (same summation order as [`energy_report`]) and fills `grad`, zeroing it
/// on the boundary mask.
pub(crate) fn energy_and_gradient(
    field: &ComplexField,
    params: &AnisotropyParams,
    eps: EpsParam,
    grad: &mut [Complex64],
) -> f64 {
    grad.fill(Complex64::new(0.0, 0.0));
    let mut div_part = 0.0;
    let mut curl_part = 0.0;
    for cell in &field.grid.cells {
        let (vx, vy, wx, wy) = cell_derivs(&field.values, cell);
        let div = vx + wy;
        let curl = wx - vy;
        div_part += cell.area * 0.5 * params.k1 * div * div;
        curl_part += cell.area * 0.5 * params.k3 * curl * curl;
        let fd = cell.area * params.k1 * div;
        let fc = cell.area * params.k3 * curl;
        for q in 0..4 {
            grad[cell.v[q]] += Complex64::new(
                fd * cell.cx[q] - fc * cell.cy[q],
                fd * cell.cy[q] + fc * cell.cx[q],
            );
        }
    }
    let c = 1.0 / (4.0 * eps.eps * eps.eps);
    let mut potential = 0.0;
    for (p, u) in field.values.iter().enumerate() {
        let w = field.grid.vertex_weights[p];
        let dev = 1.0 - u.norm_sqr();
        potential += w * c * dev * dev;
        grad[p] -= u * (w * 4.0 * c * dev);
    }
    for (p, masked) in field.grid.boundary_mask.iter().enumerate() {
        if *masked {
            grad[p] = Complex64::new(0.0, 0.0);
        }
    }
    div_part + curl_part + potential
}

/// `E_eps` restricted to cells whose center lies in the disc
/// `|X - center| <= radius`; the per-cell potential is the average of the
/// four corner values, so the full-domain sum of these cell energies equals
/// the report's `e_eps`.
pub fn local_energy_in_disc(
    field: &ComplexField,
    params: &AnisotropyParams,
    eps: EpsParam,
    center: [f64; 2],
    radius: f64,
) -> f64 {
    let c = 1.0 / (4.0 * eps.eps * eps.eps);
    let r2 = radius * radius;
    let mut total = 0.0;
    for cell in &field.grid.cells {
        let dx = cell.center[0] - center[0];
        let dy = cell.center[1] - center[1];
        if dx * dx + dy * dy > r2 {
            continue;
        }
        total += cell_energy(field, params, c, cell);
    }
    total
}

#[inline]
pub(crate) fn cell_energy(
    field: &ComplexField,
    params: &AnisotropyParams,
    potential_coeff: f64,
    cell: &crate::fields::Cell,
) -> f64 {
    let (vx, vy, wx, wy) = cell_derivs(&field.values, cell);
    let div = vx + wy;
    let curl = wx - vy;
    let mut pot = 0.0;
    for q in 0..4 {
        let dev = 1.0 - field.values[cell.v[q]].norm_sqr();
        pot += dev * dev;
    }
    cell.area * (0.5 * params.k1 * div * div + 0.5 * params.k3 * curl * curl)
        + cell.area * 0.25 * potential_coeff * pot
}

/// Discrete boundary circulation `int_{boundary} u wedge u_tau`, evaluated
/// as `sum_k u_k wedge u_{k+1}` along the counterclockwise loop (the
/// midpoint rule collapses to exactly this form).
pub fn boundary_circulation(field: &ComplexField) -> f64 {
    let loop_vals = field.boundary_values();
    let n = loop_vals.len();
    let mut total = 0.0;
    for k in 0..n {
        let a = loop_vals[k];
        let b = loop_vals[(k + 1) % n];
        total += a.re * b.im - a.im * b.re;
    }
    total
}

/// Discrete Jacobian integral `int (v_x w_y - v_y w_x)` with the same
/// cell-centered quadrature as the elastic terms.
pub fn jacobian_integral(field: &ComplexField) -> f64 {
    let mut total = 0.0;
    for cell in &field.grid.cells {
        let (vx, vy, wx, wy) = cell_derivs(&field.values, cell);
        total += cell.area * (vx * wy - vy * wx);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_grid, GridSpec};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{E, PI};

    fn hedgehog(x: f64, y: f64) -> Complex64 {
        let z = Complex64::new(x, y);
        z.conj() / z.norm()
    }

    #[test]
    fn constant_unit_field_has_zero_energy() {
        let grid = make_grid(GridSpec::Square { half_width: 1.0, n: 17 }).unwrap();
        let field = ComplexField::constant(grid, Complex64::new(1.0, 0.0));
        for delta in [0.0, 0.3, 0.7] {
            let params = AnisotropyParams::new(delta).unwrap();
            let rep = energy_report(&field, &params, EpsParam::new(0.1).unwrap());
            assert_eq!(rep.e_eps, 0.0);
            assert_eq!(rep.g_eps, 0.0);
        }
    }

    #[test]
    fn hedgehog_on_annulus_costs_pi_per_log() {
        let grid = make_grid(GridSpec::Annulus {
            r1: 1.0,
            r2: E,
            n_r: 33,
            n_theta: 128,
        })
        .unwrap();
        let field = ComplexField::from_fn(grid, hedgehog);
        for delta in [0.0, 0.25, 0.6] {
            let params = AnisotropyParams::new(delta).unwrap();
            let rep = energy_report(&field, &params, EpsParam::new(0.1).unwrap());
            assert!(
                (rep.e0 - PI).abs() < 0.02 * PI,
                "delta {delta}: E0 = {} vs pi",
                rep.e0
            );
            assert!(rep.potential.abs() < 1e-20);
        }
    }

    #[test]
    fn gradient_vanishes_at_trivial_critical_points() {
        let grid = make_grid(GridSpec::Square { half_width: 1.0, n: 9 }).unwrap();
        let params = AnisotropyParams::new(0.2).unwrap();
        let eps = EpsParam::new(0.3).unwrap();
        for value in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)] {
            let field = ComplexField::constant(grid.clone(), value);
            let grad = el_gradient(&field, &params, eps);
            let max: f64 = grad.values.iter().map(|g| g.norm()).fold(0.0, f64::max);
            assert!(max < 1e-14, "value {value}: grad max {max}");
        }
    }

    fn random_field(grid: std::sync::Arc<Grid>, seed: u64) -> ComplexField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexField {
            grid: grid.clone(),
            values: (0..grid.n_vertices())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let grid = make_grid(GridSpec::Square { half_width: 1.0, n: 33 }).unwrap();
        let eps = EpsParam::new(0.3).unwrap();
        for (seed, delta) in [(1u64, 0.0), (2, 0.3)] {
            let params = AnisotropyParams::new(delta).unwrap();
            let mut field = random_field(grid.clone(), seed);
            let grad = el_gradient(&field, &params, eps);
            let t = 1e-5;
            let mut worst: f64 = 0.0;
            // Probe a spread of interior vertices rather than all of them.
            for p in (0..grid.n_vertices()).step_by(37) {
                if grid.boundary_mask[p] {
                    continue;
                }
                for re_part in [true, false] {
                    let original = field.values[p];
                    let bump = if re_part {
                        Complex64::new(t, 0.0)
                    } else {
                        Complex64::new(0.0, t)
                    };
                    field.values[p] = original + bump;
                    let e_plus = energy_report(&field, &params, eps).e_eps;
                    field.values[p] = original - bump;
                    let e_minus = energy_report(&field, &params, eps).e_eps;
                    field.values[p] = original;
                    let fd = (e_plus - e_minus) / (2.0 * t);
                    let an = if re_part { grad.values[p].re } else { grad.values[p].im };
                    let denom = fd.abs().max(an.abs()).max(1e-12);
                    worst = worst.max((an - fd).abs() / denom);
                }
            }
            assert!(worst <= 1e-6, "delta {delta}: worst relative error {worst}");
        }
    }

    #[test]
    fn gauge_identity_at_delta_zero() {
        // div_part + curl_part - G0 == discrete Jacobian integral exactly,
        // and the Jacobian integral matches half the boundary circulation
        // within quadrature error.
        let grid = make_grid(GridSpec::Square { half_width: 1.0, n: 65 }).unwrap();
        let field = ComplexField::from_fn(grid, |x, y| {
            let z = Complex64::new(x, y);
            z.conj() / (z.norm() + 0.3)
        });
        let params = AnisotropyParams::new(0.0).unwrap();
        let rep = energy_report(&field, &params, EpsParam::new(1.0).unwrap());
        let jac = jacobian_integral(&field);
        assert!(
            (rep.div_part + rep.curl_part - rep.g0 - jac).abs() < 1e-10,
            "pointwise identity broken"
        );
        let circ_half = 0.5 * boundary_circulation(&field);
        let scale = rep.g0.abs().max(circ_half.abs());
        assert!(
            (jac - circ_half).abs() <= 0.02 * scale,
            "jac {jac} vs circ/2 {circ_half}"
        );
    }

    #[test]
    fn anisotropic_sandwich_with_jacobian_term() {
        // (1-delta)(G0 + J) <= E0 <= (1+delta)(G0 + J), cell-exact.
        let grid = make_grid(GridSpec::Square { half_width: 1.0, n: 33 }).unwrap();
        let field = random_field(grid, 7);
        for delta in [0.1, 0.4] {
            let params = AnisotropyParams::new(delta).unwrap();
            let rep = energy_report(&field, &params, EpsParam::new(1.0).unwrap());
            let j = jacobian_integral(&field);
            let lo = (1.0 - delta) * (rep.g0 + j);
            let hi = (1.0 + delta) * (rep.g0 + j);
            assert!(lo - 1e-10 <= rep.e0 && rep.e0 <= hi + 1e-10);
        }
    }

    #[test]
    fn rotation_covariance_swaps_roles_exactly() {
        let grid = make_grid(GridSpec::Square { half_width: 1.0, n: 21 }).unwrap();
        let field = random_field(grid.clone(), 11);
        let rotated = ComplexField {
            grid,
            values: field.values.iter().map(|u| u * Complex64::i()).collect(),
        };
        let params = AnisotropyParams::new(0.35).unwrap();
        let eps = EpsParam::new(0.5).unwrap();
        let rep = energy_report(&field, &params, eps);
        let rep_rot = energy_report(&rotated, &params.swapped(), eps);
        assert_eq!(rep_rot.div_part, rep.curl_part);
        assert_eq!(rep_rot.curl_part, rep.div_part);
    }

    #[test]
    fn elastic_parts_scale_quadratically() {
        let grid = make_grid(GridSpec::Square { half_width: 1.0, n: 21 }).unwrap();
        let field = random_field(grid.clone(), 13);
        let doubled = ComplexField {
            grid,
            values: field.values.iter().map(|u| u * 2.0).collect(),
        };
        let params = AnisotropyParams::new(0.2).unwrap();
        let eps = EpsParam::new(1.0).unwrap();
        let rep = energy_report(&field, &params, eps);
        let rep2 = energy_report(&doubled, &params, eps);
        // s = 2 is a power of two, so the scaling is bit-exact.
        assert_eq!(rep2.div_part, 4.0 * rep.div_part);
        assert_eq!(rep2.curl_part, 4.0 * rep.curl_part);
    }

    #[test]
    fn local_energy_sums_to_total() {
        let grid = make_grid(GridSpec::Square { half_width: 1.0, n: 17 }).unwrap();
        let field = random_field(grid, 3);
        let params = AnisotropyParams::new(0.2).unwrap();
        let eps = EpsParam::new(0.4).unwrap();
        let rep = energy_report(&field, &params, eps);
        let all = local_energy_in_disc(&field, &params, eps, [0.0, 0.0], 10.0);
        assert!((all - rep.e_eps).abs() < 1e-10 * rep.e_eps.abs().max(1.0));
    }

    #[test]
    fn eps_under_resolution_warning() {
        let grid = make_grid(GridSpec::Square { half_width: 1.0, n: 17 }).unwrap();
        assert!(EpsParam::new(0.1).unwrap().is_under_resolved(&grid));
        assert!(!EpsParam::new(0.3).unwrap().is_under_resolved(&grid));
    }
}
