//! Staggered (MAC) grid on a closed rectangle, and the fields that live on it.
//!
//! Scalars sit at cell centers, the x velocity component on vertical faces
//! and the y component on horizontal faces. The walls coincide with the
//! outermost face planes, so no-penetration is structural: wall-normal face
//! entries are pinned to zero and nothing outside field construction writes
//! them. Scalars obey a homogeneous Neumann condition through mirror ghosts,
//! tangential velocity obeys no-slip through odd reflection ghosts.

use crate::error::Error;

/// Uniform rectangular staggered grid with `nx` by `ny` cells covering
/// `[0, lx] x [0, ly]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub hx: f64,
    pub hy: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Grid, Error> {
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidGrid(format!(
                "need at least 4x4 cells, got {nx}x{ny}"
            )));
        }
        if !(lx > 0.0 && lx.is_finite()) || !(ly > 0.0 && ly.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "domain lengths must be positive and finite, got {lx} x {ly}"
            )));
        }
        Ok(Grid {
            nx,
            ny,
            lx,
            ly,
            hx: lx / nx as f64,
            hy: ly / ny as f64,
        })
    }

    /// x coordinate of the center of cell column `i`.
    #[inline]
    pub fn xc(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.hx
    }

    /// y coordinate of the center of cell row `j`.
    #[inline]
    pub fn yc(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.hy
    }

    /// x coordinate of vertical face plane `i` (0 and `nx` are the walls).
    #[inline]
    pub fn xf(&self, i: usize) -> f64 {
        i as f64 * self.hx
    }

    /// y coordinate of horizontal face plane `j` (0 and `ny` are the walls).
    #[inline]
    pub fn yf(&self, j: usize) -> f64 {
        j as f64 * self.hy
    }

    #[inline]
    pub fn min_h(&self) -> f64 {
        self.hx.min(self.hy)
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.hx * self.hy
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }
}

/// Cell-centered scalar samples, stored row-major with x fastest:
/// `data[j*nx + i]` holds the value at center `(xc(i), yc(j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> ScalarField {
        ScalarField {
            grid,
            data: vec![0.0; grid.n_cells()],
        }
    }

    pub fn constant(grid: Grid, value: f64) -> ScalarField {
        ScalarField {
            grid,
            data: vec![value; grid.n_cells()],
        }
    }

    /// Samples `f(x, y)` at every cell center.
    pub fn from_cell_centers(grid: Grid, mut f: impl FnMut(f64, f64) -> f64) -> ScalarField {
        let mut out = ScalarField::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                out.data[j * grid.nx + i] = f(grid.xc(i), grid.yc(j));
            }
        }
        out
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.grid.nx && j < self.grid.ny);
        j * self.grid.nx + i
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.idx(i, j);
        self.data[k] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Subtracts the mean so the field sums to zero (up to round-off).
    pub fn recenter(&mut self) {
        let m = self.mean();
        for v in &mut self.data {
            *v -= m;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.data {
            *v *= a;
        }
    }

    /// `self += a * other`, entrywise.
    pub fn add_scaled(&mut self, a: f64, other: &ScalarField) {
        assert!(self.grid == other.grid, "grid mismatch");
        for (v, w) in self.data.iter_mut().zip(&other.data) {
            *v += a * w;
        }
    }

    /// Returns `self - other` as a new field.
    pub fn difference(&self, other: &ScalarField) -> ScalarField {
        assert!(self.grid == other.grid, "grid mismatch");
        let mut out = self.clone();
        out.add_scaled(-1.0, other);
        out
    }
}

/// Face-normal velocity samples on the staggered grid. `u` has shape
/// `(nx+1) x ny` on vertical faces, `v` has shape `nx x (ny+1)` on
/// horizontal faces, both row-major with x fastest. Wall entries
/// (`u[0,j]`, `u[nx,j]`, `v[i,0]`, `v[i,ny]`) are structurally zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceVectorField {
    pub grid: Grid,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl FaceVectorField {
    pub fn zeros(grid: Grid) -> FaceVectorField {
        FaceVectorField {
            grid,
            u: vec![0.0; (grid.nx + 1) * grid.ny],
            v: vec![0.0; grid.nx * (grid.ny + 1)],
        }
    }

    /// Samples `fu` at vertical face points and `fv` at horizontal face
    /// points. Wall-normal entries are forced to zero regardless of the
    /// sampled value.
    pub fn from_faces(
        grid: Grid,
        mut fu: impl FnMut(f64, f64) -> f64,
        mut fv: impl FnMut(f64, f64) -> f64,
    ) -> FaceVectorField {
        let mut out = FaceVectorField::zeros(grid);
        for j in 0..grid.ny {
            for i in 1..grid.nx {
                out.u[j * (grid.nx + 1) + i] = fu(grid.xf(i), grid.yc(j));
            }
        }
        for j in 1..grid.ny {
            for i in 0..grid.nx {
                out.v[j * grid.nx + i] = fv(grid.xc(i), grid.yf(j));
            }
        }
        out
    }

    #[inline]
    pub fn u_idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.grid.nx && j < self.grid.ny);
        j * (self.grid.nx + 1) + i
    }

    #[inline]
    pub fn v_idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.grid.nx && j <= self.grid.ny);
        j * self.grid.nx + i
    }

    #[inline]
    pub fn u_at(&self, i: usize, j: usize) -> f64 {
        self.u[self.u_idx(i, j)]
    }

    #[inline]
    pub fn v_at(&self, i: usize, j: usize) -> f64 {
        self.v[self.v_idx(i, j)]
    }

    #[inline]
    pub fn set_u(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(
            !(i == 0 || i == self.grid.nx) || value == 0.0,
            "wall-normal u entries are structurally zero"
        );
        let k = self.u_idx(i, j);
        self.u[k] = value;
    }

    #[inline]
    pub fn set_v(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(
            !(j == 0 || j == self.grid.ny) || value == 0.0,
            "wall-normal v entries are structurally zero"
        );
        let k = self.v_idx(i, j);
        self.v[k] = value;
    }

    pub fn u_slice(&self) -> &[f64] {
        &self.u
    }

    pub fn v_slice(&self) -> &[f64] {
        &self.v
    }

    pub(crate) fn u_mut_slice(&mut self) -> &mut [f64] {
        &mut self.u
    }

    pub(crate) fn v_mut_slice(&mut self) -> &mut [f64] {
        &mut self.v
    }

    /// True when every wall-normal entry is exactly zero.
    pub fn no_penetration(&self) -> bool {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        (0..ny).all(|j| self.u_at(0, j) == 0.0 && self.u_at(nx, j) == 0.0)
            && (0..nx).all(|i| self.v_at(i, 0) == 0.0 && self.v_at(i, ny) == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        let mu = self.u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        self.v.iter().fold(mu, |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.u.iter().all(|v| v.is_finite()) && self.v.iter().all(|v| v.is_finite())
    }

    pub fn scale(&mut self, a: f64) {
        for w in &mut self.u {
            *w *= a;
        }
        for w in &mut self.v {
            *w *= a;
        }
    }

    /// `self += a * other`, entrywise on both components.
    pub fn add_scaled(&mut self, a: f64, other: &FaceVectorField) {
        assert!(self.grid == other.grid, "grid mismatch");
        for (w, z) in self.u.iter_mut().zip(&other.u) {
            *w += a * z;
        }
        for (w, z) in self.v.iter_mut().zip(&other.v) {
            *w += a * z;
        }
    }

    /// Returns `self - other` as a new field.
    pub fn difference(&self, other: &FaceVectorField) -> FaceVectorField {
        assert!(self.grid == other.grid, "grid mismatch");
        let mut out = self.clone();
        out.add_scaled(-1.0, other);
        out
    }
}

/// A scalar field extended by one mirror ghost layer on every side:
/// `(nx+2) x (ny+2)` values addressed by indices in `-1..=nx` and `-1..=ny`.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostScalar {
    pub nx: usize,
    pub ny: usize,
    data: Vec<f64>,
}

impl GhostScalar {
    #[inline]
    pub fn at(&self, i: isize, j: isize) -> f64 {
        debug_assert!(i >= -1 && i <= self.nx as isize);
        debug_assert!(j >= -1 && j <= self.ny as isize);
        let w = self.nx + 2;
        self.data[(j + 1) as usize * w + (i + 1) as usize]
    }
}

/// Extends a scalar with mirror ghosts, realizing the homogeneous Neumann
/// condition: each ghost equals its adjacent interior value, corner ghosts
/// mirror diagonally.
pub fn ghost_scalar_neumann(c: &ScalarField) -> GhostScalar {
    let (nx, ny) = (c.grid.nx, c.grid.ny);
    let w = nx + 2;
    let mut data = vec![0.0; w * (ny + 2)];
    let clamp = |k: isize, n: usize| -> usize { k.clamp(0, n as isize - 1) as usize };
    for jj in -1..=(ny as isize) {
        for ii in -1..=(nx as isize) {
            let val = c.at(clamp(ii, nx), clamp(jj, ny));
            data[(jj + 1) as usize * w + (ii + 1) as usize] = val;
        }
    }
    GhostScalar { nx, ny, data }
}

/// Velocity components extended with no-slip ghosts in their tangential
/// direction: `u` gains rows `j = -1` and `j = ny`, `v` gains columns
/// `i = -1` and `i = nx`, each ghost the negation of its interior neighbor
/// so that the wall-tangential velocity interpolates to zero on the wall.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostVelocity {
    pub nx: usize,
    pub ny: usize,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl GhostVelocity {
    /// `u` at face `(i, j)` with `j` in `-1..=ny`.
    #[inline]
    pub fn u_at(&self, i: usize, j: isize) -> f64 {
        debug_assert!(i <= self.nx && j >= -1 && j <= self.ny as isize);
        self.u[(j + 1) as usize * (self.nx + 1) + i]
    }

    /// `v` at face `(i, j)` with `i` in `-1..=nx`.
    #[inline]
    pub fn v_at(&self, i: isize, j: usize) -> f64 {
        debug_assert!(i >= -1 && i <= self.nx as isize && j <= self.ny);
        self.v[j * (self.nx + 2) + (i + 1) as usize]
    }
}

pub fn ghost_velocity_noslip(w: &FaceVectorField) -> GhostVelocity {
    let (nx, ny) = (w.grid.nx, w.grid.ny);
    let mut u = vec![0.0; (nx + 1) * (ny + 2)];
    for j in 0..ny {
        for i in 0..=nx {
            u[(j + 1) * (nx + 1) + i] = w.u_at(i, j);
        }
    }
    for i in 0..=nx {
        u[i] = -w.u_at(i, 0);
        u[(ny + 1) * (nx + 1) + i] = -w.u_at(i, ny - 1);
    }
    let mut v = vec![0.0; (nx + 2) * (ny + 1)];
    for j in 0..=ny {
        for i in 0..nx {
            v[j * (nx + 2) + i + 1] = w.v_at(i, j);
        }
        v[j * (nx + 2)] = -w.v_at(0, j);
        v[j * (nx + 2) + nx + 1] = -w.v_at(nx - 1, j);
    }
    GhostVelocity { nx, ny, u, v }
}
