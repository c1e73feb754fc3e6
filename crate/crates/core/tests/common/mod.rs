//! Shared scaffolding for the verification suites: a small dense-matrix
//! type with a pivoted direct solver, degree-of-freedom maps between
//! staggered fields and flat vectors, and dense assemblies of every
//! difference stencil built straight from their definitions. The dense
//! path shares no code with the production operators, so an indexing or
//! sign slip in either implementation shows up as a mismatch.
#![allow(dead_code)]

use bksim_core::{FaceVectorField, Grid, ScalarField, SplitMix64};

pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    a: Vec<f64>,
}

impl Dense {
    pub fn zeros(rows: usize, cols: usize) -> Dense {
        Dense {
            rows,
            cols,
            a: vec![0.0; rows * cols],
        }
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.cols + c]
    }

    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        self.a[r * self.cols + c] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (r, slot) in out.iter_mut().enumerate() {
            let row = &self.a[r * self.cols..(r + 1) * self.cols];
            *slot = row.iter().zip(x).map(|(m, v)| m * v).sum();
        }
        out
    }

    pub fn transpose(&self) -> Dense {
        let mut out = Dense::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.a[c * self.rows + r] = self.at(r, c);
            }
        }
        out
    }

    pub fn matmul(&self, other: &Dense) -> Dense {
        assert_eq!(self.cols, other.rows);
        let mut out = Dense::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let m = self.at(r, k);
                if m == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    out.a[r * other.cols + c] += m * other.at(k, c);
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Dense) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.a
            .iter()
            .zip(&other.a)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// Direct solve by Gaussian elimination with partial pivoting; the matrix
/// is consumed as a working copy.
pub fn gauss_solve(m: &Dense, b: &[f64]) -> Vec<f64> {
    assert_eq!(m.rows, m.cols);
    assert_eq!(b.len(), m.rows);
    let n = m.rows;
    let mut a = m.a.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r1, &r2| {
                a[r1 * n + col]
                    .abs()
                    .partial_cmp(&a[r2 * n + col].abs())
                    .unwrap()
            })
            .unwrap();
        assert!(a[pivot * n + col].abs() > 1e-14, "singular oracle matrix");
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            x.swap(col, pivot);
        }
        let inv = 1.0 / a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] * inv;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        x[col] /= a[col * n + col];
        for r in 0..col {
            x[r] -= a[r * n + col] * x[col];
        }
    }
    x
}

pub fn n_cells(g: Grid) -> usize {
    g.nx * g.ny
}

/// Interior velocity unknowns only: wall-normal faces are structural zeros
/// and carry no degree of freedom.
pub fn n_velocity(g: Grid) -> usize {
    (g.nx - 1) * g.ny + g.nx * (g.ny - 1)
}

pub fn cell_dof(g: Grid, i: usize, j: usize) -> usize {
    j * g.nx + i
}

pub fn u_dof(g: Grid, i: usize, j: usize) -> Option<usize> {
    (1..g.nx).contains(&i).then(|| j * (g.nx - 1) + (i - 1))
}

pub fn v_dof(g: Grid, i: usize, j: usize) -> Option<usize> {
    (1..g.ny)
        .contains(&j)
        .then(|| (g.nx - 1) * g.ny + (j - 1) * g.nx + i)
}

pub fn flatten_scalar(c: &ScalarField) -> Vec<f64> {
    c.as_slice().to_vec()
}

pub fn unflatten_scalar(g: Grid, x: &[f64]) -> ScalarField {
    assert_eq!(x.len(), n_cells(g));
    let mut out = ScalarField::zeros(g);
    out.as_mut_slice().copy_from_slice(x);
    out
}

pub fn flatten_velocity(w: &FaceVectorField) -> Vec<f64> {
    let g = w.grid;
    let mut out = vec![0.0; n_velocity(g)];
    for j in 0..g.ny {
        for i in 1..g.nx {
            out[u_dof(g, i, j).unwrap()] = w.u_at(i, j);
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            out[v_dof(g, i, j).unwrap()] = w.v_at(i, j);
        }
    }
    out
}

pub fn unflatten_velocity(g: Grid, x: &[f64]) -> FaceVectorField {
    assert_eq!(x.len(), n_velocity(g));
    let mut out = FaceVectorField::zeros(g);
    for j in 0..g.ny {
        for i in 1..g.nx {
            out.set_u(i, j, x[u_dof(g, i, j).unwrap()]);
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            out.set_v(i, j, x[v_dof(g, i, j).unwrap()]);
        }
    }
    out
}

/// Two-point face gradient of a cell scalar; wall faces hold no row.
pub fn dense_gradient(g: Grid) -> Dense {
    let mut m = Dense::zeros(n_velocity(g), n_cells(g));
    for j in 0..g.ny {
        for i in 1..g.nx {
            let r = u_dof(g, i, j).unwrap();
            m.add(r, cell_dof(g, i, j), 1.0 / g.hx);
            m.add(r, cell_dof(g, i - 1, j), -1.0 / g.hx);
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            let r = v_dof(g, i, j).unwrap();
            m.add(r, cell_dof(g, i, j), 1.0 / g.hy);
            m.add(r, cell_dof(g, i, j - 1), -1.0 / g.hy);
        }
    }
    m
}

/// Net outflow per cell; wall faces contribute nothing.
pub fn dense_divergence(g: Grid) -> Dense {
    let mut m = Dense::zeros(n_cells(g), n_velocity(g));
    for j in 0..g.ny {
        for i in 0..g.nx {
            let r = cell_dof(g, i, j);
            if let Some(f) = u_dof(g, i + 1, j) {
                m.add(r, f, 1.0 / g.hx);
            }
            if let Some(f) = u_dof(g, i, j) {
                m.add(r, f, -1.0 / g.hx);
            }
            if let Some(f) = v_dof(g, i, j + 1) {
                m.add(r, f, 1.0 / g.hy);
            }
            if let Some(f) = v_dof(g, i, j) {
                m.add(r, f, -1.0 / g.hy);
            }
        }
    }
    m
}

/// Five-point Laplacian with mirror ghosts: each existing neighbor
/// contributes `(neighbor - center) / h^2`, a mirrored one contributes
/// nothing.
pub fn dense_laplacian_neumann(g: Grid) -> Dense {
    let mut m = Dense::zeros(n_cells(g), n_cells(g));
    let (wx, wy) = (1.0 / (g.hx * g.hx), 1.0 / (g.hy * g.hy));
    for j in 0..g.ny {
        for i in 0..g.nx {
            let r = cell_dof(g, i, j);
            let mut neighbors = Vec::new();
            if i > 0 {
                neighbors.push((cell_dof(g, i - 1, j), wx));
            }
            if i + 1 < g.nx {
                neighbors.push((cell_dof(g, i + 1, j), wx));
            }
            if j > 0 {
                neighbors.push((cell_dof(g, i, j - 1), wy));
            }
            if j + 1 < g.ny {
                neighbors.push((cell_dof(g, i, j + 1), wy));
            }
            for (c, w) in neighbors {
                m.add(r, c, w);
                m.add(r, r, -w);
            }
        }
    }
    m
}

/// Componentwise velocity Laplacian with no-slip walls: a neighbor on a
/// wall-normal plane is a held zero (no column), a tangential ghost is the
/// odd reflection of the row's own unknown.
pub fn dense_laplacian_velocity(g: Grid) -> Dense {
    let nv = n_velocity(g);
    let mut m = Dense::zeros(nv, nv);
    let (wx, wy) = (1.0 / (g.hx * g.hx), 1.0 / (g.hy * g.hy));
    for j in 0..g.ny {
        for i in 1..g.nx {
            let r = u_dof(g, i, j).unwrap();
            m.add(r, r, -2.0 * wx - 2.0 * wy);
            if let Some(f) = u_dof(g, i - 1, j) {
                m.add(r, f, wx);
            }
            if let Some(f) = u_dof(g, i + 1, j) {
                m.add(r, f, wx);
            }
            for dj in [-1isize, 1] {
                let jn = j as isize + dj;
                if (0..g.ny as isize).contains(&jn) {
                    m.add(r, u_dof(g, i, jn as usize).unwrap(), wy);
                } else {
                    m.add(r, r, -wy);
                }
            }
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            let r = v_dof(g, i, j).unwrap();
            m.add(r, r, -2.0 * wx - 2.0 * wy);
            if let Some(f) = v_dof(g, i, j - 1) {
                m.add(r, f, wy);
            }
            if let Some(f) = v_dof(g, i, j + 1) {
                m.add(r, f, wy);
            }
            for di in [-1isize, 1] {
                let in_ = i as isize + di;
                if (0..g.nx as isize).contains(&in_) {
                    m.add(r, v_dof(g, in_ as usize, j).unwrap(), wx);
                } else {
                    m.add(r, r, -wx);
                }
            }
        }
    }
    m
}

/// Two-point average of cell values onto interior faces.
pub fn dense_face_average(g: Grid) -> Dense {
    let mut m = Dense::zeros(n_velocity(g), n_cells(g));
    for j in 0..g.ny {
        for i in 1..g.nx {
            let r = u_dof(g, i, j).unwrap();
            m.add(r, cell_dof(g, i - 1, j), 0.5);
            m.add(r, cell_dof(g, i, j), 0.5);
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            let r = v_dof(g, i, j).unwrap();
            m.add(r, cell_dof(g, i, j - 1), 0.5);
            m.add(r, cell_dof(g, i, j), 0.5);
        }
    }
    m
}

/// The advection tendency as a matrix acting on the scalar, for one frozen
/// velocity: half the conservative form (flux differences of face-averaged
/// scalar) plus half the advective form (face-averaged flux of the
/// two-point gradient). Wall faces drop out through the velocity zeros.
pub fn dense_advection(g: Grid, w: &FaceVectorField) -> Dense {
    let nc = n_cells(g);
    let mut m = Dense::zeros(nc, nc);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let r = cell_dof(g, i, j);
            let cc = cell_dof(g, i, j);
            // Mirror reads: a missing neighbor is the center cell.
            let cw = if i > 0 { cell_dof(g, i - 1, j) } else { cc };
            let ce = if i + 1 < g.nx { cell_dof(g, i + 1, j) } else { cc };
            let cs = if j > 0 { cell_dof(g, i, j - 1) } else { cc };
            let cn = if j + 1 < g.ny { cell_dof(g, i, j + 1) } else { cc };

            let (ue, uw) = (w.u_at(i + 1, j), w.u_at(i, j));
            let (vn, vs) = (w.v_at(i, j + 1), w.v_at(i, j));

            // Conservative: (ue * avg(cc, ce) - uw * avg(cw, cc)) / hx + ...
            m.add(r, cc, 0.5 * ue / g.hx);
            m.add(r, ce, 0.5 * ue / g.hx);
            m.add(r, cw, -0.5 * uw / g.hx);
            m.add(r, cc, -0.5 * uw / g.hx);
            m.add(r, cc, 0.5 * vn / g.hy);
            m.add(r, cn, 0.5 * vn / g.hy);
            m.add(r, cs, -0.5 * vs / g.hy);
            m.add(r, cc, -0.5 * vs / g.hy);

            // Advective: 0.5 * (uw * gradx_w + ue * gradx_e) + ..., where the
            // gradient on a wall face is zero (no entries).
            if i > 0 {
                m.add(r, cc, 0.5 * uw / g.hx);
                m.add(r, cw, -0.5 * uw / g.hx);
            }
            if i + 1 < g.nx {
                m.add(r, ce, 0.5 * ue / g.hx);
                m.add(r, cc, -0.5 * ue / g.hx);
            }
            if j > 0 {
                m.add(r, cc, 0.5 * vs / g.hy);
                m.add(r, cs, -0.5 * vs / g.hy);
            }
            if j + 1 < g.ny {
                m.add(r, cn, 0.5 * vn / g.hy);
                m.add(r, cc, -0.5 * vn / g.hy);
            }
        }
    }
    // The skew form is the mean of the two halves assembled above.
    let mut out = Dense::zeros(nc, nc);
    for r in 0..nc {
        for c in 0..nc {
            out.add(r, c, 0.5 * m.at(r, c));
        }
    }
    out
}

/// Column-probes a linear scalar-to-scalar operator into a dense matrix.
pub fn probe_scalar_operator(g: Grid, f: impl Fn(&ScalarField) -> ScalarField) -> Dense {
    let nc = n_cells(g);
    let mut m = Dense::zeros(nc, nc);
    for col in 0..nc {
        let mut basis = vec![0.0; nc];
        basis[col] = 1.0;
        let out = f(&unflatten_scalar(g, &basis));
        for (r, v) in out.as_slice().iter().enumerate() {
            m.add(r, col, *v);
        }
    }
    m
}

/// Column-probes a linear scalar-to-faces operator.
pub fn probe_scalar_to_faces(g: Grid, f: impl Fn(&ScalarField) -> FaceVectorField) -> Dense {
    let nc = n_cells(g);
    let mut m = Dense::zeros(n_velocity(g), nc);
    for col in 0..nc {
        let mut basis = vec![0.0; nc];
        basis[col] = 1.0;
        let out = flatten_velocity(&f(&unflatten_scalar(g, &basis)));
        for (r, v) in out.iter().enumerate() {
            m.add(r, col, *v);
        }
    }
    m
}

/// Column-probes a linear faces-to-scalar operator.
pub fn probe_faces_to_scalar(g: Grid, f: impl Fn(&FaceVectorField) -> ScalarField) -> Dense {
    let nv = n_velocity(g);
    let mut m = Dense::zeros(n_cells(g), nv);
    for col in 0..nv {
        let mut basis = vec![0.0; nv];
        basis[col] = 1.0;
        let out = f(&unflatten_velocity(g, &basis));
        for (r, v) in out.as_slice().iter().enumerate() {
            m.add(r, col, *v);
        }
    }
    m
}

/// Column-probes a linear faces-to-faces operator.
pub fn probe_faces_operator(
    g: Grid,
    f: impl Fn(&FaceVectorField) -> FaceVectorField,
) -> Dense {
    let nv = n_velocity(g);
    let mut m = Dense::zeros(nv, nv);
    for col in 0..nv {
        let mut basis = vec![0.0; nv];
        basis[col] = 1.0;
        let out = flatten_velocity(&f(&unflatten_velocity(g, &basis)));
        for (r, v) in out.iter().enumerate() {
            m.add(r, col, *v);
        }
    }
    m
}

pub fn random_scalar(g: Grid, seed: u64) -> ScalarField {
    let mut rng = SplitMix64::new(seed);
    ScalarField::from_cell_centers(g, |_, _| rng.next_symmetric())
}

pub fn random_velocity(g: Grid, seed: u64) -> FaceVectorField {
    let mut rng = SplitMix64::new(seed);
    let draws: Vec<f64> = (0..n_velocity(g)).map(|_| rng.next_symmetric()).collect();
    unflatten_velocity(g, &draws)
}
