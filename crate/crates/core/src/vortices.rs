//! Bad-disc detection, per-vortex degrees, separation statistics, scale
//! clustering of vortex groups, and the eta-ellipticity diagnostic.

use num_complex::Complex64;

use crate::energy::{local_energy_in_disc, EpsParam};
use crate::fields::{winding_number, AnisotropyParams, ComplexField, GridSpec};

/// A detected bad disc: a connected component of `{|u| <= threshold}`.
#[derive(Debug, Clone)]
pub struct Vortex {
    pub center: [f64; 2],
    pub core_radius: f64,
    /// Winding on the degree loop; unset when no valid loop was found.
    pub degree: Option<i32>,
    /// Radius of the loop actually used for the degree (it is grown until
    /// `|u| >= 1/2` holds on it, so drift from `2 * core_radius` is visible).
    pub degree_loop_radius: Option<f64>,
    /// Component reaches within one cell of the domain boundary.
    pub touches_boundary: bool,
    /// Smallest |u| over the component.
    pub min_modulus: f64,
}

/// Connected components (8-neighbor) of `{|u| <= threshold}`. Centers sit at
/// the minimum of |u| in each component; degrees are left unset.
pub fn detect_vortices(field: &ComplexField, _eps: EpsParam, threshold: f64) -> Vec<Vortex> {
    let grid = &field.grid;
    let (nx, ny, wrap_theta) = match grid.spec {
        GridSpec::Square { n, .. } => (n, n, false),
        GridSpec::Annulus { n_r, n_theta, .. } => (n_theta, n_r, true),
    };
    let idx = |i: usize, j: usize| j * nx + i;

    let mut visited = vec![false; grid.n_vertices()];
    let mut vortices = Vec::new();
    for j0 in 0..ny {
        for i0 in 0..nx {
            let p0 = idx(i0, j0);
            if visited[p0] || field.values[p0].norm() > threshold {
                continue;
            }
            // Flood fill one component.
            let mut stack = vec![(i0, j0)];
            visited[p0] = true;
            let mut members: Vec<usize> = Vec::new();
            while let Some((i, j)) = stack.pop() {
                let p = idx(i, j);
                members.push(p);
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let jj = j as i64 + dj;
                        if jj < 0 || jj >= ny as i64 {
                            continue;
                        }
                        let ii = i as i64 + di;
                        let ii = if wrap_theta {
                            ii.rem_euclid(nx as i64)
                        } else if ii < 0 || ii >= nx as i64 {
                            continue;
                        } else {
                            ii
                        };
                        let q = idx(ii as usize, jj as usize);
                        if !visited[q] && field.values[q].norm() <= threshold {
                            visited[q] = true;
                            stack.push((ii as usize, jj as usize));
                        }
                    }
                }
            }

            let mut best = members[0];
            let mut min_modulus = f64::INFINITY;
            for &p in &members {
                let m = field.values[p].norm();
                if m < min_modulus {
                    min_modulus = m;
                    best = p;
                }
            }
            let center = grid.coords[best];
            let mut extent = 0.0f64;
            let mut touches_boundary = false;
            for &p in &members {
                let [x, y] = grid.coords[p];
                extent = extent.max((x - center[0]).hypot(y - center[1]));
                if grid.distance_to_boundary(x, y) <= 1.1 * grid.spacing {
                    touches_boundary = true;
                }
            }
            vortices.push(Vortex {
                center,
                core_radius: extent + grid.spacing,
                degree: None,
                degree_loop_radius: None,
                touches_boundary,
                min_modulus,
            });
        }
    }
    // Deterministic order: by center position.
    vortices.sort_by(|a, b| {
        (a.center[1], a.center[0])
            .partial_cmp(&(b.center[1], b.center[0]))
            .unwrap()
    });
    vortices
}

/// Assigns each vortex the winding of `u` on a surrounding circle. The loop
/// starts at twice the core radius and is grown by 1.5x until `|u| >= 1/2`
/// holds on it and it encloses no other vortex; it is capped at a quarter of
/// the domain size, after which the degree stays unset (the vortex then only
/// contributes to a cluster-level degree).
pub fn assign_degrees(field: &ComplexField, vortices: Vec<Vortex>) -> Vec<Vortex> {
    let grid = &field.grid;
    let domain_size = match grid.spec {
        GridSpec::Square { half_width, .. } => 2.0 * half_width,
        GridSpec::Annulus { r2, .. } => 2.0 * r2,
    };
    let cap = 0.25 * domain_size;
    let centers: Vec<[f64; 2]> = vortices.iter().map(|v| v.center).collect();

    let mut out = vortices;
    for (k, vortex) in out.iter_mut().enumerate() {
        let mut radius = (2.0 * vortex.core_radius).max(2.0 * grid.spacing);
        let mut assigned = false;
        while radius <= cap && !assigned {
            let encloses_other = centers.iter().enumerate().any(|(j, c)| {
                j != k && (c[0] - vortex.center[0]).hypot(c[1] - vortex.center[1]) <= radius
            });
            if !encloses_other {
                if let Some(samples) = circle_samples(field, vortex.center, radius) {
                    if samples.iter().all(|u| u.norm() >= 0.5) {
                        if let Ok(w) = winding_number(&samples) {
                            vortex.degree = Some(w.degree);
                            vortex.degree_loop_radius = Some(radius);
                            assigned = true;
                        }
                    }
                }
            }
            radius *= 1.5;
        }
    }
    out
}

/// Interpolated samples on a circle, or None when the circle leaves the
/// domain.
fn circle_samples(field: &ComplexField, center: [f64; 2], radius: f64) -> Option<Vec<Complex64>> {
    let grid = &field.grid;
    let count = ((8.0 * radius / grid.spacing).ceil() as usize).max(16);
    let mut samples = Vec::with_capacity(count);
    for s in 0..count {
        let th = 2.0 * std::f64::consts::PI * s as f64 / count as f64;
        let x = center[0] + radius * th.cos();
        let y = center[1] + radius * th.sin();
        if grid.distance_to_boundary(x, y) < 0.0 {
            return None;
        }
        samples.push(field.interp(x, y));
    }
    Some(samples)
}

/// Pairwise and boundary separation of a vortex configuration.
#[derive(Debug, Clone, Copy)]
pub struct SeparationStats {
    /// Half the minimum pairwise center distance; infinite for counts < 2.
    pub m_half_min_pair: f64,
    /// Minimum distance from a center to the domain boundary; infinite for
    /// an empty configuration.
    pub min_boundary_dist: f64,
    pub count: usize,
}

pub fn separation_stats(vortices: &[Vortex], grid: &crate::fields::Grid) -> SeparationStats {
    let count = vortices.len();
    let mut min_pair = f64::INFINITY;
    for i in 0..count {
        for j in i + 1..count {
            let d = (vortices[i].center[0] - vortices[j].center[0])
                .hypot(vortices[i].center[1] - vortices[j].center[1]);
            min_pair = min_pair.min(d);
        }
    }
    let min_boundary_dist = vortices
        .iter()
        .map(|v| grid.distance_to_boundary(v.center[0], v.center[1]))
        .fold(f64::INFINITY, f64::min);
    SeparationStats {
        m_half_min_pair: 0.5 * min_pair,
        min_boundary_dist,
        count,
    }
}

/// Partition of vortices by the scale of their mutual distances: two
/// vortices land in one group when `ln |x_i - x_j| / ln eps >= alpha_cut`
/// (transitively closed).
#[derive(Debug, Clone)]
pub struct VortexClustering {
    /// Groups as index sets into the input vortex list.
    pub groups: Vec<Vec<usize>>,
    /// Per-group sum of member degrees; None when a member has no degree.
    pub group_degrees: Vec<Option<i32>>,
    /// Scale exponents `(i, j, s_ij)` for i < j.
    pub scale_exponents: Vec<(usize, usize, f64)>,
}

pub fn cluster_vortices(vortices: &[Vortex], eps: EpsParam, alpha_cut: f64) -> VortexClustering {
    let n = vortices.len();
    let ln_eps = eps.eps.ln();
    let mut exps = Vec::new();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = (vortices[i].center[0] - vortices[j].center[0])
                .hypot(vortices[i].center[1] - vortices[j].center[1]);
            // d -> 0 gives +infinity, i.e. always grouped.
            let s = if d == 0.0 { f64::INFINITY } else { d.ln() / ln_eps };
            exps.push((i, j, s));
            if s >= alpha_cut {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_to_group: std::collections::BTreeMap<usize, usize> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        let g = *root_to_group.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    let group_degrees = groups
        .iter()
        .map(|g| g.iter().map(|&i| vortices[i].degree).sum::<Option<i32>>())
        .collect();
    VortexClustering {
        groups,
        group_degrees,
        scale_exponents: exps,
    }
}

/// One sampled center of the eta-ellipticity scan.
#[derive(Debug, Clone, Copy)]
pub struct EtaScanEntry {
    pub center: [f64; 2],
    /// `E_eps` restricted to the ball of radius `eps^alpha` about the center.
    pub local_energy: f64,
    /// `local_energy <= eta * ln(1/eps)`.
    pub flagged: bool,
    /// `| |u(center)| - 1 |`.
    pub mod_deviation: f64,
    /// Deviation within the default lambda = 1/4.
    pub mod_ok: bool,
}

#[derive(Debug, Clone)]
pub struct EtaScan {
    pub entries: Vec<EtaScanEntry>,
    /// Centers whose ball was smaller than one cell.
    pub skipped: usize,
}

const ETA_SCAN_LAMBDA: f64 = 0.25;

/// Samples interior vertices on a coarse sublattice and tests the local
/// energy threshold `eta * ln(1/eps)` on balls of radius `eps^alpha`;
/// centers below the threshold are expected to have |u| near 1.
pub fn eta_ellipticity_scan(
    field: &ComplexField,
    params: &AnisotropyParams,
    eps: EpsParam,
    alpha: f64,
    eta: f64,
) -> EtaScan {
    let grid = &field.grid;
    let radius = eps.eps.powf(alpha);
    let threshold = eta * (1.0 / eps.eps).ln();
    let mut entries = Vec::new();
    let mut skipped = 0usize;
    let stride = match grid.spec {
        GridSpec::Square { n, .. } => (n / 16).max(1),
        GridSpec::Annulus { n_r, .. } => (n_r / 16).max(1),
    };
    for (p, &[x, y]) in grid.coords.iter().enumerate() {
        if grid.boundary_mask[p] {
            continue;
        }
        let (i, j) = match grid.spec {
            GridSpec::Square { n, .. } => (p % n, p / n),
            GridSpec::Annulus { n_theta, .. } => (p % n_theta, p / n_theta),
        };
        if i % stride != 0 || j % stride != 0 {
            continue;
        }
        if radius < grid.spacing {
            skipped += 1;
            continue;
        }
        let local_energy = local_energy_in_disc(field, params, eps, [x, y], radius);
        let flagged = local_energy <= threshold;
        let mod_deviation = (field.values[p].norm() - 1.0).abs();
        entries.push(EtaScanEntry {
            center: [x, y],
            local_energy,
            flagged,
            mod_deviation,
            mod_ok: mod_deviation <= ETA_SCAN_LAMBDA,
        });
    }
    EtaScan { entries, skipped }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::EpsParam;
    use crate::fields::{make_grid, AnisotropyParams, ComplexField, GridSpec};
    use crate::minimize::init_competitor;
    use num_complex::Complex64;
    use std::sync::Arc;

    fn square(n: usize) -> Arc<crate::fields::Grid> {
        make_grid(GridSpec::Square { half_width: 1.0, n }).unwrap()
    }

    #[test]
    fn constant_field_has_no_vortices() {
        let grid = square(17);
        let field = ComplexField::constant(grid, Complex64::new(1.0, 0.0));
        let found = detect_vortices(&field, EpsParam::new(0.1).unwrap(), 0.5);
        assert!(found.is_empty());
    }

    #[test]
    fn planted_vortices_are_found_with_right_degrees() {
        let grid = square(65);
        let eps = EpsParam::new(0.05).unwrap();
        let field = init_competitor(&grid, -2, eps, &[[0.3, 0.0], [-0.3, 0.0]]).unwrap();
        let found = detect_vortices(&field, eps, 0.5);
        assert_eq!(found.len(), 2);
        for v in &found {
            let planted_dist = (v.center[0].abs() - 0.3).abs().max(v.center[1].abs());
            assert!(planted_dist <= grid.spacing, "center {:?}", v.center);
            assert!(!v.touches_boundary);
        }
        let found = assign_degrees(&field, found);
        let degrees: Vec<i32> = found.iter().map(|v| v.degree.unwrap()).collect();
        assert_eq!(degrees, vec![-1, -1]);
    }

    #[test]
    fn hedgehog_signs() {
        let grid = square(65);
        let eps = EpsParam::new(0.05).unwrap();
        for (degree, expected) in [(-1i32, -1i32), (1, 1)] {
            let field = init_competitor(&grid, degree, eps, &[[0.0, 0.0]]).unwrap();
            let found = assign_degrees(&field, detect_vortices(&field, eps, 0.5));
            assert_eq!(found.len(), 1);
            assert_eq!(found[0].degree, Some(expected));
        }
    }

    #[test]
    fn detection_is_phase_rotation_invariant() {
        let grid = square(65);
        let eps = EpsParam::new(0.05).unwrap();
        let field = init_competitor(&grid, -2, eps, &[[0.3, 0.0], [-0.3, 0.0]]).unwrap();
        let rotated = ComplexField {
            grid: grid.clone(),
            values: field
                .values
                .iter()
                .map(|u| u * Complex64::from_polar(1.0, 0.8))
                .collect(),
        };
        let a = detect_vortices(&field, eps, 0.5);
        let b = detect_vortices(&rotated, eps, 0.5);
        assert_eq!(a.len(), b.len());
        for (va, vb) in a.iter().zip(&b) {
            assert_eq!(va.center, vb.center);
            assert_eq!(va.core_radius, vb.core_radius);
        }
    }

    #[test]
    fn separation_stats_definitions() {
        let grid = square(17);
        let mk = |x: f64, y: f64| Vortex {
            center: [x, y],
            core_radius: 0.1,
            degree: None,
            degree_loop_radius: None,
            touches_boundary: false,
            min_modulus: 0.0,
        };
        let stats = separation_stats(&[mk(0.5, 0.0), mk(-0.5, 0.0)], &grid);
        assert_eq!(stats.m_half_min_pair, 0.5);
        assert_eq!(stats.count, 2);

        let stats = separation_stats(&[mk(0.0, 0.0)], &grid);
        assert_eq!(stats.min_boundary_dist, 1.0);
        assert!(stats.m_half_min_pair.is_infinite());

        let stats = separation_stats(&[], &grid);
        assert_eq!(stats.count, 0);
        assert!(stats.min_boundary_dist.is_infinite());
    }

    #[test]
    fn clustering_by_scale_exponent() {
        let eps = EpsParam::new(0.01).unwrap();
        let mk = |x: f64| Vortex {
            center: [x, 0.0],
            core_radius: 0.01,
            degree: Some(-1),
            degree_loop_radius: None,
            touches_boundary: false,
            min_modulus: 0.0,
        };
        // Distance eps^0.9 with cut 0.5: one group.
        let d_close = 0.01f64.powf(0.9);
        let c = cluster_vortices(&[mk(0.0), mk(d_close)], eps, 0.5);
        assert_eq!(c.groups.len(), 1);
        assert_eq!(c.group_degrees[0], Some(-2));
        // Distance eps^0.1 with cut 0.5: two singletons.
        let d_far = 0.01f64.powf(0.1);
        let c = cluster_vortices(&[mk(0.0), mk(d_far)], eps, 0.5);
        assert_eq!(c.groups.len(), 2);
        // Singleton input.
        let c = cluster_vortices(&[mk(0.2)], eps, 0.5);
        assert_eq!(c.groups.len(), 1);
        assert_eq!(c.group_degrees[0], Some(-1));
    }

    #[test]
    fn eta_scan_trivial_field() {
        let grid = square(33);
        let field = ComplexField::constant(grid, Complex64::new(1.0, 0.0));
        let params = AnisotropyParams::new(0.1).unwrap();
        let scan = eta_ellipticity_scan(&field, &params, EpsParam::new(0.05).unwrap(), 0.5, 0.1);
        assert!(!scan.entries.is_empty());
        for e in &scan.entries {
            assert!(e.flagged);
            assert!(e.mod_ok);
            assert_eq!(e.local_energy, 0.0);
        }
    }

    #[test]
    fn eta_scan_skips_subcell_balls() {
        let grid = square(33);
        let field = ComplexField::constant(grid, Complex64::new(1.0, 0.0));
        let params = AnisotropyParams::new(0.1).unwrap();
        // eps^alpha = 0.01 is below the spacing 1/16.
        let scan = eta_ellipticity_scan(&field, &params, EpsParam::new(0.01).unwrap(), 1.0, 0.1);
        assert!(scan.entries.is_empty());
        assert!(scan.skipped > 0);
    }
}
