//! Direct solvers in the cosine eigenbasis of the Neumann Laplacian, plus a
//! conjugate-gradient solve for the variable-coefficient momentum operator.
//!
//! The mirror-ghost Laplacian is diagonalized exactly by the cell-centered
//! cosine modes `cos(pi*k*(i+1/2)/nx) * cos(pi*l*(j+1/2)/ny)`: the same
//! even reflection that defines the ghosts extends each mode smoothly across
//! the walls, so the eigenvalue relation holds in the wall cells too, not
//! just in the interior. Transforms are applied as products with the
//! orthonormal cosine matrices; at the grid sizes this solver targets that
//! is cheap, exactly invertible up to round-off, and trivially
//! deterministic.

use crate::error::Error;
use crate::grid::{FaceVectorField, Grid, ScalarField};
use crate::operators::{laplacian_neumann, laplacian_velocity_noslip, DragCoefficients};

/// Precomputed transform matrices and eigenvalues for one grid.
#[derive(Debug, Clone)]
pub struct CosinePlan {
    pub grid: Grid,
    /// Eigenvalues of minus the Neumann Laplacian, `lambda[l*nx + k] >= 0`.
    lambda: Vec<f64>,
    /// Orthonormal cosine matrix for x, `tx[k*nx + i]`, and its transpose.
    tx: Vec<f64>,
    txt: Vec<f64>,
    ty: Vec<f64>,
    tyt: Vec<f64>,
}

fn cosine_matrix(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut t = vec![0.0; n * n];
    let mut tt = vec![0.0; n * n];
    for k in 0..n {
        let scale = if k == 0 {
            (1.0 / n as f64).sqrt()
        } else {
            (2.0 / n as f64).sqrt()
        };
        for i in 0..n {
            let v = scale * (std::f64::consts::PI * k as f64 * (i as f64 + 0.5) / n as f64).cos();
            t[k * n + i] = v;
            tt[i * n + k] = v;
        }
    }
    (t, tt)
}

impl CosinePlan {
    pub fn new(grid: Grid) -> CosinePlan {
        let (nx, ny) = (grid.nx, grid.ny);
        let (tx, txt) = cosine_matrix(nx);
        let (ty, tyt) = cosine_matrix(ny);
        let mut lambda = vec![0.0; nx * ny];
        for l in 0..ny {
            let ly = 2.0 / (grid.hy * grid.hy)
                * (1.0 - (std::f64::consts::PI * l as f64 / ny as f64).cos());
            for k in 0..nx {
                let lx = 2.0 / (grid.hx * grid.hx)
                    * (1.0 - (std::f64::consts::PI * k as f64 / nx as f64).cos());
                lambda[l * nx + k] = lx + ly;
            }
        }
        CosinePlan {
            grid,
            lambda,
            tx,
            txt,
            ty,
            tyt,
        }
    }

    #[inline]
    pub fn eigenvalue(&self, k: usize, l: usize) -> f64 {
        self.lambda[l * self.grid.nx + k]
    }

    /// Cosine coefficients of a cell field, `coeffs[l*nx + k]`.
    pub fn forward(&self, c: &ScalarField) -> Vec<f64> {
        assert!(c.grid == self.grid, "grid mismatch");
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let data = c.as_slice();
        let mut tmp = vec![0.0; nx * ny];
        for j in 0..ny {
            let row = &data[j * nx..(j + 1) * nx];
            for k in 0..nx {
                let tr = &self.tx[k * nx..(k + 1) * nx];
                let mut s = 0.0;
                for i in 0..nx {
                    s += tr[i] * row[i];
                }
                tmp[j * nx + k] = s;
            }
        }
        let mut out = vec![0.0; nx * ny];
        for l in 0..ny {
            let orow = &mut out[l * nx..(l + 1) * nx];
            for j in 0..ny {
                let a = self.ty[l * ny + j];
                let trow = &tmp[j * nx..(j + 1) * nx];
                for k in 0..nx {
                    orow[k] += a * trow[k];
                }
            }
        }
        out
    }

    /// Inverse of `forward` (the matrices are orthonormal, so this is the
    /// transposed product).
    pub fn inverse(&self, coeffs: &[f64]) -> ScalarField {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        assert!(coeffs.len() == nx * ny, "coefficient length mismatch");
        let mut tmp = vec![0.0; nx * ny];
        for l in 0..ny {
            let crow = &coeffs[l * nx..(l + 1) * nx];
            for i in 0..nx {
                let tr = &self.txt[i * nx..(i + 1) * nx];
                let mut s = 0.0;
                for k in 0..nx {
                    s += tr[k] * crow[k];
                }
                tmp[l * nx + i] = s;
            }
        }
        let mut out = ScalarField::zeros(self.grid);
        let data = out.as_mut_slice();
        for j in 0..ny {
            let orow = &mut data[j * nx..(j + 1) * nx];
            for l in 0..ny {
                let a = self.tyt[j * ny + l];
                let trow = &tmp[l * nx..(l + 1) * nx];
                for i in 0..nx {
                    orow[i] += a * trow[i];
                }
            }
        }
        out
    }
}

/// Solves `laplacian_neumann(phi) = rhs - mean(rhs)` for the zero-mean
/// `phi`. The mean must be removed for solvability on a closed box; the
/// amount removed is returned alongside the solution.
pub fn solve_poisson_neumann(rhs: &ScalarField, plan: &CosinePlan) -> (ScalarField, f64) {
    let (nx, ny) = (plan.grid.nx, plan.grid.ny);
    let mut coeffs = plan.forward(rhs);
    let removed_mean = coeffs[0] / (nx as f64 * ny as f64).sqrt();
    coeffs[0] = 0.0;
    for (c, lam) in coeffs.iter_mut().zip(&plan.lambda).skip(1) {
        *c /= -lam;
    }
    (plan.inverse(&coeffs), removed_mean)
}

/// Solves `(I - sigma * laplacian_neumann) result = rhs` for `sigma >= 0`.
///
/// Solved in increment form: `result = rhs + delta` with
/// `(I - sigma*L) delta = sigma * L rhs`, so a constant right-hand side
/// passes through bitwise (its discrete Laplacian is exactly zero), and
/// `sigma = 0` returns `rhs` unchanged.
pub fn solve_helmholtz_neumann(rhs: &ScalarField, sigma: f64, plan: &CosinePlan) -> ScalarField {
    assert!(sigma >= 0.0, "sigma must be nonnegative");
    if sigma == 0.0 {
        return rhs.clone();
    }
    let lap = laplacian_neumann(rhs);
    let mut coeffs = plan.forward(&lap);
    for (c, lam) in coeffs.iter_mut().zip(&plan.lambda) {
        *c *= sigma / (1.0 + sigma * lam);
    }
    let delta = plan.inverse(&coeffs);
    let mut out = rhs.clone();
    out.add_scaled(1.0, &delta);
    out
}

fn face_dot(a: &FaceVectorField, b: &FaceVectorField) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.u_slice().iter().zip(b.u_slice()) {
        s += x * y;
    }
    for (x, y) in a.v_slice().iter().zip(b.v_slice()) {
        s += x * y;
    }
    s
}

fn momentum_apply(
    x: &FaceVectorField,
    drag_dt: &DragCoefficients,
    sigma: f64,
) -> FaceVectorField {
    let g = x.grid;
    let lap = laplacian_velocity_noslip(x);
    let mut out = FaceVectorField::zeros(g);
    for j in 0..g.ny {
        for i in 1..g.nx {
            let f = j * (g.nx + 1) + i;
            out.set_u(
                i,
                j,
                (1.0 + drag_dt.on_u[f]) * x.u_at(i, j) - sigma * lap.u_at(i, j),
            );
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            let f = j * g.nx + i;
            out.set_v(
                i,
                j,
                (1.0 + drag_dt.on_v[f]) * x.v_at(i, j) - sigma * lap.v_at(i, j),
            );
        }
    }
    out
}

/// Inverse of the diagonal of the momentum operator, for Jacobi
/// preconditioning. Wall-adjacent tangential rows pick up the extra
/// reflection-ghost weight.
fn momentum_inv_diag(drag_dt: &DragCoefficients, sigma: f64) -> FaceVectorField {
    let g = drag_dt.grid;
    let (ihx2, ihy2) = (1.0 / (g.hx * g.hx), 1.0 / (g.hy * g.hy));
    let mut out = FaceVectorField::zeros(g);
    for j in 0..g.ny {
        let wy = if j == 0 || j == g.ny - 1 { 3.0 } else { 2.0 };
        for i in 1..g.nx {
            let f = j * (g.nx + 1) + i;
            let diag = 1.0 + drag_dt.on_u[f] + sigma * (2.0 * ihx2 + wy * ihy2);
            out.set_u(i, j, 1.0 / diag);
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            let wx = if i == 0 || i == g.nx - 1 { 3.0 } else { 2.0 };
            let f = j * g.nx + i;
            let diag = 1.0 + drag_dt.on_v[f] + sigma * (wx * ihx2 + 2.0 * ihy2);
            out.set_v(i, j, 1.0 / diag);
        }
    }
    out
}

fn mul_pointwise(a: &FaceVectorField, b: &FaceVectorField) -> FaceVectorField {
    let mut out = a.clone();
    for (x, y) in out.u_mut_slice().iter_mut().zip(b.u_slice()) {
        *x *= y;
    }
    for (x, y) in out.v_mut_slice().iter_mut().zip(b.v_slice()) {
        *x *= y;
    }
    out
}

/// Solves `[(1 + drag_dt) I - sigma * laplacian_velocity_noslip] x = rhs`
/// by conjugate gradients, returning the solution and the iteration count.
///
/// `drag_dt` must already include the time step factor (the caller passes
/// `dt * mu * (alpha + beta C)` per face) and `sigma = dt * mu_e`; both
/// nonnegative, which makes the operator symmetric positive definite on the
/// admissible subspace. Iteration order is fixed, so results are bitwise
/// reproducible for identical inputs.
pub fn solve_momentum_helmholtz(
    rhs: &FaceVectorField,
    drag_dt: &DragCoefficients,
    sigma: f64,
    tol: f64,
    max_iter: u64,
    precondition: bool,
) -> Result<(FaceVectorField, u64), Error> {
    assert!(sigma >= 0.0, "sigma must be nonnegative");
    assert!(tol > 0.0, "tolerance must be positive");
    assert!(rhs.no_penetration(), "rhs must have zero wall-normal entries");
    let g = rhs.grid;
    let bnorm = face_dot(rhs, rhs).sqrt();
    if bnorm == 0.0 {
        return Ok((FaceVectorField::zeros(g), 0));
    }
    let inv_diag = if precondition {
        Some(momentum_inv_diag(drag_dt, sigma))
    } else {
        None
    };
    let precond = |r: &FaceVectorField| -> FaceVectorField {
        match &inv_diag {
            Some(dinv) => mul_pointwise(r, dinv),
            None => r.clone(),
        }
    };

    let mut x = FaceVectorField::zeros(g);
    let mut r = rhs.clone();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = face_dot(&r, &z);
    for it in 1..=max_iter {
        let ap = momentum_apply(&p, drag_dt, sigma);
        let alpha = rz / face_dot(&p, &ap);
        x.add_scaled(alpha, &p);
        r.add_scaled(-alpha, &ap);
        let rnorm = face_dot(&r, &r).sqrt();
        if rnorm <= tol * bnorm {
            return Ok((x, it));
        }
        z = precond(&r);
        let rz_next = face_dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        let mut p_next = z.clone();
        p_next.add_scaled(beta, &p);
        p = p_next;
    }
    Err(Error::NoConvergence {
        iters: max_iter,
        residual: face_dot(&r, &r).sqrt() / bnorm,
        tol,
    })
}
