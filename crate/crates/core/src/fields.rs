//! Grid geometry, complex-valued fields, boundary data of prescribed degree,
//! and winding numbers of closed loops.
//!
//! Two structured grids are supported: a square `[-L, L]^2` and an annulus
//! with logarithmically spaced radii. Both expose the same per-cell stencil
//! data (derivative coefficients at the cell center plus the cell area), so
//! the energy module can treat them uniformly.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Grid construction parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    /// Square `[-half_width, half_width]^2` with `n` vertices per side.
    Square { half_width: f64, n: usize },
    /// Annulus `r1 <= r <= r2` with `n_r` log-spaced radial samples and
    /// `n_theta` uniform angular samples (periodic).
    Annulus {
        r1: f64,
        r2: f64,
        n_r: usize,
        n_theta: usize,
    },
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        match *self {
            GridSpec::Square { half_width, n } => {
                if !(half_width > 0.0) {
                    return Err(Error::Config {
                        field: "half_width",
                        message: format!("L > 0 required, got {half_width}"),
                    });
                }
                if n < 3 {
                    return Err(Error::Config {
                        field: "n",
                        message: format!("n >= 3 required, got {n}"),
                    });
                }
            }
            GridSpec::Annulus { r1, r2, n_r, n_theta } => {
                if !(r1 > 0.0) {
                    return Err(Error::Config {
                        field: "r1",
                        message: format!("R1 > 0 required, got {r1}"),
                    });
                }
                if !(r1 < r2) {
                    return Err(Error::Config {
                        field: "r2",
                        message: format!("R1 < R2 required, got R1 = {r1}, R2 = {r2}"),
                    });
                }
                if n_r < 2 {
                    return Err(Error::Config {
                        field: "n_r",
                        message: format!("n_r >= 2 required, got {n_r}"),
                    });
                }
                if n_theta < 4 {
                    return Err(Error::Config {
                        field: "n_theta",
                        message: format!("n_theta >= 4 required, got {n_theta}"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// One quadrilateral cell: vertex indices and the coefficients of the
/// cell-centered forward-difference stencils.
///
/// For any vertex function `f`, the cell-center derivatives are
/// `f_x = sum_k cx[k] * f[v[k]]` and `f_y = sum_k cy[k] * f[v[k]]`.
#[derive(Debug, Clone)]
pub struct Cell {
    pub v: [usize; 4],
    pub cx: [f64; 4],
    pub cy: [f64; 4],
    pub area: f64,
    pub center: [f64; 2],
}

/// Concrete grid geometry produced by [`make_grid`].
#[derive(Debug)]
pub struct Grid {
    pub spec: GridSpec,
    /// Vertex coordinates, row-major (`j * n + i` for the square,
    /// `k * n_theta + m` for the annulus).
    pub coords: Vec<[f64; 2]>,
    pub cells: Vec<Cell>,
    /// True exactly on the outermost layer of vertices.
    pub boundary_mask: Vec<bool>,
    /// Counterclockwise-ordered boundary loop (outer circle for the annulus).
    pub boundary_loop: Vec<usize>,
    /// Trapezoidal quadrature weight per vertex (sum of adjacent cell areas / 4).
    pub vertex_weights: Vec<f64>,
    /// Square mesh width, or the smallest cell edge for the annulus.
    pub spacing: f64,
}

impl Grid {
    pub fn n_vertices(&self) -> usize {
        self.coords.len()
    }

    /// Geometric center of the domain (the origin for both grid kinds).
    pub fn center(&self) -> [f64; 2] {
        [0.0, 0.0]
    }

    /// Distance from an interior point to the domain boundary.
    pub fn distance_to_boundary(&self, x: f64, y: f64) -> f64 {
        match self.spec {
            GridSpec::Square { half_width, .. } => half_width - x.abs().max(y.abs()),
            GridSpec::Annulus { r1, r2, .. } => {
                let r = x.hypot(y);
                (r - r1).min(r2 - r)
            }
        }
    }

    /// Square side subdivision, if this is a square grid.
    pub fn square_n(&self) -> Option<usize> {
        match self.spec {
            GridSpec::Square { n, .. } => Some(n),
            _ => None,
        }
    }
}

/// Builds the grid geometry: vertex coordinates, cell stencils, quadrature
/// weights, and a counterclockwise boundary loop.
pub fn make_grid(spec: GridSpec) -> Result<Arc<Grid>> {
    spec.validate()?;
    let grid = match spec {
        GridSpec::Square { half_width, n } => build_square(half_width, n),
        GridSpec::Annulus { r1, r2, n_r, n_theta } => build_annulus(r1, r2, n_r, n_theta),
    };
    Ok(Arc::new(grid))
}

fn build_square(l: f64, n: usize) -> Grid {
    let h = 2.0 * l / (n - 1) as f64;
    let mut coords = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            coords.push([-l + i as f64 * h, -l + j as f64 * h]);
        }
    }

    let mut cells = Vec::with_capacity((n - 1) * (n - 1));
    let d = 1.0 / (2.0 * h);
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let p00 = j * n + i;
            let p10 = j * n + i + 1;
            let p01 = (j + 1) * n + i;
            let p11 = (j + 1) * n + i + 1;
            cells.push(Cell {
                v: [p00, p10, p01, p11],
                cx: [-d, d, -d, d],
                cy: [-d, -d, d, d],
                area: h * h,
                center: [-l + (i as f64 + 0.5) * h, -l + (j as f64 + 0.5) * h],
            });
        }
    }

    let mut boundary_mask = vec![false; n * n];
    for j in 0..n {
        for i in 0..n {
            if i == 0 || i == n - 1 || j == 0 || j == n - 1 {
                boundary_mask[j * n + i] = true;
            }
        }
    }

    // Counterclockwise from the lower-left corner.
    let mut boundary_loop = Vec::with_capacity(4 * (n - 1));
    for i in 0..n - 1 {
        boundary_loop.push(i);
    }
    for j in 0..n - 1 {
        boundary_loop.push(j * n + (n - 1));
    }
    for i in (1..n).rev() {
        boundary_loop.push((n - 1) * n + i);
    }
    for j in (1..n).rev() {
        boundary_loop.push(j * n);
    }

    let vertex_weights = accumulate_weights(n * n, &cells);

    Grid {
        spec: GridSpec::Square { half_width: l, n },
        coords,
        cells,
        boundary_mask,
        boundary_loop,
        vertex_weights,
        spacing: h,
    }
}

fn build_annulus(r1: f64, r2: f64, n_r: usize, n_theta: usize) -> Grid {
    let radii: Vec<f64> = (0..n_r)
        .map(|k| r1 * (r2 / r1).powf(k as f64 / (n_r - 1) as f64))
        .collect();
    let dtheta = 2.0 * PI / n_theta as f64;

    let mut coords = Vec::with_capacity(n_r * n_theta);
    for &r in &radii {
        for m in 0..n_theta {
            let th = m as f64 * dtheta;
            coords.push([r * th.cos(), r * th.sin()]);
        }
    }

    let mut cells = Vec::with_capacity((n_r - 1) * n_theta);
    let mut min_edge = f64::INFINITY;
    for k in 0..n_r - 1 {
        let (ra, rb) = (radii[k], radii[k + 1]);
        let dr = rb - ra;
        let rc = 0.5 * (ra + rb);
        min_edge = min_edge.min(dr).min(ra * dtheta);
        for m in 0..n_theta {
            let mp = (m + 1) % n_theta;
            let p00 = k * n_theta + m;
            let p10 = (k + 1) * n_theta + m;
            let p01 = k * n_theta + mp;
            let p11 = (k + 1) * n_theta + mp;
            let thc = (m as f64 + 0.5) * dtheta;
            let (st, ct) = thc.sin_cos();
            // Forward differences in (r, theta), rotated to Cartesian axes.
            let ar = [-1.0 / (2.0 * dr), 1.0 / (2.0 * dr), -1.0 / (2.0 * dr), 1.0 / (2.0 * dr)];
            let at = [
                -1.0 / (2.0 * dtheta),
                -1.0 / (2.0 * dtheta),
                1.0 / (2.0 * dtheta),
                1.0 / (2.0 * dtheta),
            ];
            let mut cx = [0.0; 4];
            let mut cy = [0.0; 4];
            for q in 0..4 {
                cx[q] = ct * ar[q] - st / rc * at[q];
                cy[q] = st * ar[q] + ct / rc * at[q];
            }
            cells.push(Cell {
                v: [p00, p10, p01, p11],
                cx,
                cy,
                area: 0.5 * (rb * rb - ra * ra) * dtheta,
                center: [rc * ct, rc * st],
            });
        }
    }

    let mut boundary_mask = vec![false; n_r * n_theta];
    for m in 0..n_theta {
        boundary_mask[m] = true;
        boundary_mask[(n_r - 1) * n_theta + m] = true;
    }
    let boundary_loop: Vec<usize> = (0..n_theta).map(|m| (n_r - 1) * n_theta + m).collect();

    let vertex_weights = accumulate_weights(n_r * n_theta, &cells);

    Grid {
        spec: GridSpec::Annulus { r1, r2, n_r, n_theta },
        coords,
        cells,
        boundary_mask,
        boundary_loop,
        vertex_weights,
        spacing: min_edge,
    }
}

fn accumulate_weights(n_vertices: usize, cells: &[Cell]) -> Vec<f64> {
    let mut w = vec![0.0; n_vertices];
    for cell in cells {
        let quarter = 0.25 * cell.area;
        for &p in &cell.v {
            w[p] += quarter;
        }
    }
    w
}

/// Material constants `K1 = 1 + delta`, `K3 = 1 - delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisotropyParams {
    pub delta: f64,
    pub k1: f64,
    pub k3: f64,
}

impl AnisotropyParams {
    pub fn new(delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::Config {
                field: "delta",
                message: format!("0 <= delta < 1 required, got {delta}"),
            });
        }
        Ok(Self {
            delta,
            k1: 1.0 + delta,
            k3: 1.0 - delta,
        })
    }

    /// Same material with the roles of K1 and K3 exchanged (used by the
    /// rotation-covariance identity `u -> iu`).
    pub fn swapped(&self) -> Self {
        Self {
            delta: self.delta,
            k1: self.k3,
            k3: self.k1,
        }
    }
}

/// A complex-valued map sampled at grid vertices.
#[derive(Debug, Clone)]
pub struct ComplexField {
    pub grid: Arc<Grid>,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn constant(grid: Arc<Grid>, value: Complex64) -> Self {
        let n = grid.n_vertices();
        Self {
            grid,
            values: vec![value; n],
        }
    }

    pub fn from_fn(grid: Arc<Grid>, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let values = grid.coords.iter().map(|&[x, y]| f(x, y)).collect();
        Self { grid, values }
    }

    /// Bilinear interpolation at an arbitrary point of the domain
    /// (clamped to the grid).
    pub fn interp(&self, x: f64, y: f64) -> Complex64 {
        match self.grid.spec {
            GridSpec::Square { half_width, n } => {
                let h = self.grid.spacing;
                let fx = ((x + half_width) / h).clamp(0.0, (n - 1) as f64);
                let fy = ((y + half_width) / h).clamp(0.0, (n - 1) as f64);
                let i = (fx.floor() as usize).min(n - 2);
                let j = (fy.floor() as usize).min(n - 2);
                let tx = fx - i as f64;
                let ty = fy - j as f64;
                let p = |ii: usize, jj: usize| self.values[jj * n + ii];
                p(i, j) * (1.0 - tx) * (1.0 - ty)
                    + p(i + 1, j) * tx * (1.0 - ty)
                    + p(i, j + 1) * (1.0 - tx) * ty
                    + p(i + 1, j + 1) * tx * ty
            }
            GridSpec::Annulus { r1, r2, n_r, n_theta } => {
                let r = x.hypot(y).clamp(r1, r2);
                let mut th = y.atan2(x);
                if th < 0.0 {
                    th += 2.0 * PI;
                }
                let log_ratio = (r2 / r1).ln();
                let fk = ((r / r1).ln() / log_ratio * (n_r - 1) as f64).clamp(0.0, (n_r - 1) as f64);
                let k = (fk.floor() as usize).min(n_r - 2);
                let rk = r1 * (r2 / r1).powf(k as f64 / (n_r - 1) as f64);
                let rk1 = r1 * (r2 / r1).powf((k + 1) as f64 / (n_r - 1) as f64);
                let tr = ((r - rk) / (rk1 - rk)).clamp(0.0, 1.0);
                let dtheta = 2.0 * PI / n_theta as f64;
                let fm = th / dtheta;
                let m = (fm.floor() as usize).min(n_theta - 1);
                let tm = fm - m as f64;
                let mp = (m + 1) % n_theta;
                let p = |kk: usize, mm: usize| self.values[kk * n_theta + mm];
                p(k, m) * (1.0 - tr) * (1.0 - tm)
                    + p(k + 1, m) * tr * (1.0 - tm)
                    + p(k, mp) * (1.0 - tr) * tm
                    + p(k + 1, mp) * tr * tm
            }
        }
    }

    /// Overwrites the boundary-loop vertices with the datum samples.
    pub fn apply_datum(&mut self, datum: &BoundaryDatum) {
        for (&p, &g) in self.grid.boundary_loop.iter().zip(&datum.samples) {
            self.values[p] = g;
        }
    }

    /// Samples along the boundary loop, in loop order.
    pub fn boundary_values(&self) -> Vec<Complex64> {
        self.grid
            .boundary_loop
            .iter()
            .map(|&p| self.values[p])
            .collect()
    }
}

/// S^1-valued boundary data with an exact integer winding.
#[derive(Debug, Clone)]
pub struct BoundaryDatum {
    pub degree: i32,
    /// One sample per boundary-loop vertex, in loop order.
    pub samples: Vec<Complex64>,
}

/// The canonical datum `g(z) = ((z - c)/|z - c|)^degree` on the boundary
/// loop, with `c` the domain center. Negative powers conjugate, so degree
/// `-D` gives `(conj(z)/|z|)^D`.
pub fn boundary_datum(grid: &Grid, degree: i32) -> Result<BoundaryDatum> {
    let c = grid.center();
    let mut samples = Vec::with_capacity(grid.boundary_loop.len());
    for &p in &grid.boundary_loop {
        let [x, y] = grid.coords[p];
        let z = Complex64::new(x - c[0], y - c[1]);
        let n = z.norm();
        if n == 0.0 {
            return Err(Error::Internal(
                "boundary vertex coincides with the domain center".into(),
            ));
        }
        samples.push((z / n).powi(degree));
    }
    Ok(BoundaryDatum { degree, samples })
}

/// Winding number of a closed loop of nonzero complex samples.
#[derive(Debug, Clone, Copy)]
pub struct Winding {
    pub degree: i32,
    /// Distance of the raw phase sum (in turns) to the nearest integer.
    pub quality: f64,
    /// Set when `quality > 0.25`: the loop is too coarse for a trustworthy degree.
    pub ill_resolved: bool,
}

/// Phase-summation winding number: `(1/2pi) * sum arg(u_{k+1}/u_k)` with
/// principal arguments, wrap-around included.
pub fn winding_number(samples: &[Complex64]) -> Result<Winding> {
    if samples.is_empty() {
        return Err(Error::DegreeUndefined(0));
    }
    for (k, u) in samples.iter().enumerate() {
        if u.norm() == 0.0 || !u.re.is_finite() || !u.im.is_finite() {
            return Err(Error::DegreeUndefined(k));
        }
    }
    let mut total = 0.0;
    let n = samples.len();
    for k in 0..n {
        let ratio = samples[(k + 1) % n] / samples[k];
        total += ratio.im.atan2(ratio.re);
    }
    let turns = total / (2.0 * PI);
    let degree = turns.round();
    let quality = (turns - degree).abs();
    Ok(Winding {
        degree: degree as i32,
        quality,
        ill_resolved: quality > 0.25,
    })
}

/// Vertex indices of the square ring `offset` cells inside the boundary,
/// counterclockwise. Used for degree-conservation checks.
pub fn inner_ring_loop(grid: &Grid, offset: usize) -> Result<Vec<usize>> {
    let n = grid
        .square_n()
        .ok_or_else(|| Error::Geometry("inner ring loops require a square grid".into()))?;
    if 2 * offset + 2 >= n {
        return Err(Error::Geometry(format!(
            "ring offset {offset} does not fit in an {n}x{n} grid"
        )));
    }
    let lo = offset;
    let hi = n - 1 - offset;
    let mut ring = Vec::with_capacity(4 * (hi - lo));
    for i in lo..hi {
        ring.push(lo * n + i);
    }
    for j in lo..hi {
        ring.push(j * n + hi);
    }
    for i in ((lo + 1)..=hi).rev() {
        ring.push(hi * n + i);
    }
    for j in ((lo + 1)..=hi).rev() {
        ring.push(j * n + lo);
    }
    Ok(ring)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(n: usize) -> Arc<Grid> {
        make_grid(GridSpec::Square { half_width: 1.0, n }).unwrap()
    }

    #[test]
    fn square_5x5_counts() {
        let g = unit_square(5);
        assert_eq!(g.n_vertices(), 25);
        assert_eq!(g.spacing, 0.5);
        assert_eq!(g.boundary_loop.len(), 16);
        assert_eq!(g.cells.len(), 16);
        assert_eq!(g.boundary_mask.iter().filter(|&&b| b).count(), 16);
    }

    #[test]
    fn annulus_log_radii() {
        let g = make_grid(GridSpec::Annulus {
            r1: 1.0,
            r2: std::f64::consts::E,
            n_r: 3,
            n_theta: 8,
        })
        .unwrap();
        let r_mid = g.coords[8][0].hypot(g.coords[8][1]);
        assert!((r_mid - (0.5f64).exp()).abs() < 1e-12);
        let r_out = g.coords[16][0].hypot(g.coords[16][1]);
        assert!((r_out - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn annulus_radius_order_rejected() {
        let err = make_grid(GridSpec::Annulus {
            r1: 2.0,
            r2: 1.0,
            n_r: 4,
            n_theta: 8,
        })
        .unwrap_err();
        assert!(err.to_string().contains("R1 < R2 required"));
    }

    #[test]
    fn square_boundary_loop_is_counterclockwise() {
        let g = unit_square(9);
        // Shoelace area of the loop must be positive.
        let mut area2 = 0.0;
        let m = g.boundary_loop.len();
        for k in 0..m {
            let [x0, y0] = g.coords[g.boundary_loop[k]];
            let [x1, y1] = g.coords[g.boundary_loop[(k + 1) % m]];
            area2 += x0 * y1 - x1 * y0;
        }
        assert!(area2 > 0.0);
    }

    #[test]
    fn vertex_weights_cover_area() {
        let g = unit_square(9);
        let total: f64 = g.vertex_weights.iter().sum();
        assert!((total - 4.0).abs() < 1e-12);
        let ga = make_grid(GridSpec::Annulus {
            r1: 1.0,
            r2: 4.0,
            n_r: 16,
            n_theta: 32,
        })
        .unwrap();
        let total: f64 = ga.vertex_weights.iter().sum();
        assert!((total - PI * (16.0 - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn datum_point_values() {
        let g = unit_square(5);
        let d1 = boundary_datum(&g, -1).unwrap();
        // (L, 0) is loop index n-1 = 4 along the bottom... locate explicitly.
        let at = |datum: &BoundaryDatum, x: f64, y: f64| {
            let idx = g
                .boundary_loop
                .iter()
                .position(|&p| g.coords[p] == [x, y])
                .unwrap();
            datum.samples[idx]
        };
        let v = at(&d1, 1.0, 0.0);
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let v = at(&d1, 0.0, 1.0);
        assert!((v - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        let d2 = boundary_datum(&g, -2).unwrap();
        let v = at(&d2, 0.0, 1.0);
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn winding_of_reference_loops() {
        let loop_of = |f: &dyn Fn(f64) -> Complex64, n: usize| -> Vec<Complex64> {
            (0..n)
                .map(|k| f(2.0 * PI * k as f64 / n as f64))
                .collect()
        };
        let w = winding_number(&loop_of(&|t| Complex64::from_polar(1.0, -t), 64)).unwrap();
        assert_eq!(w.degree, -1);
        assert!(w.quality < 1e-12);
        let w = winding_number(&loop_of(&|_| Complex64::new(1.0, 0.0), 16)).unwrap();
        assert_eq!(w.degree, 0);
        let w = winding_number(&loop_of(&|t| Complex64::from_polar(1.0, 2.0 * t), 64)).unwrap();
        assert_eq!(w.degree, 2);
    }

    #[test]
    fn winding_rejects_zero_sample() {
        let samples = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ];
        assert!(matches!(
            winding_number(&samples),
            Err(Error::DegreeUndefined(1))
        ));
    }

    #[test]
    fn datum_winding_matches_degree_across_grids() {
        for n in [9usize, 17, 33] {
            let g = unit_square(n);
            for d in -4i32..=4 {
                if d == 0 {
                    continue;
                }
                let datum = boundary_datum(&g, d).unwrap();
                let w = winding_number(&datum.samples).unwrap();
                assert_eq!(w.degree, d, "degree {d} on {n}x{n}");
                assert!(!w.ill_resolved);
            }
        }
    }

    #[test]
    fn inner_ring_loop_dimensions() {
        let g = unit_square(9);
        let ring = inner_ring_loop(&g, 3).unwrap();
        assert_eq!(ring.len(), 8);
        for &p in &ring {
            assert!(!g.boundary_mask[p]);
        }
    }
}
