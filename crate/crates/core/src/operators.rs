//! Discrete spatial operators on the staggered grid.
//!
//! The pairing that everything else leans on: the face gradient and the cell
//! divergence are negative transposes of each other in the volume-weighted
//! inner products, so `laplacian_neumann = divergence . gradient` is
//! symmetric negative semidefinite with constants in its null space, and the
//! skew advection form is exactly energy-neutral. Wall-normal face entries
//! are structurally zero throughout, which is what closes the summation by
//! parts without boundary terms.

use crate::error::Error;
use crate::grid::{ghost_velocity_noslip, FaceVectorField, Grid, ScalarField};

/// Model parameters. The drag law is `mu * (alpha + beta * C)`; its
/// reciprocal is the concentration-dependent permeability, so `alpha` must
/// stay positive. `delta_hat` scales the Korteweg stress; `gamma` is the
/// trace part of that stress and only enters the recovered physical
/// pressure, never the velocity update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub mu: f64,
    pub mu_e: f64,
    pub d: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta_hat: f64,
    pub gamma: f64,
}

impl Default for Params {
    fn default() -> Params {
        Params {
            mu: 1.0,
            mu_e: 1.0,
            d: 1.0,
            alpha: 1.0,
            beta: 0.0,
            delta_hat: 0.01,
            gamma: 0.01,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<(), Error> {
        let positive = [
            ("mu", self.mu),
            ("mu_e", self.mu_e),
            ("d", self.d),
            ("alpha", self.alpha),
            ("delta_hat", self.delta_hat),
            ("gamma", self.gamma),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta must be nonnegative and finite, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Faces where the drag coefficient may fall this close to zero are treated
/// as a loss of permeability positivity and abort the run.
pub const PERMEABILITY_FLOOR: f64 = 1e-12;

/// Two-point difference of cell values onto faces. Wall-normal faces get
/// zero, consistent with the Neumann mirror ghosts.
pub fn gradient_cc_to_faces(c: &ScalarField) -> FaceVectorField {
    let g = c.grid;
    let mut out = FaceVectorField::zeros(g);
    for j in 0..g.ny {
        for i in 1..g.nx {
            out.set_u(i, j, (c.at(i, j) - c.at(i - 1, j)) / g.hx);
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            out.set_v(i, j, (c.at(i, j) - c.at(i, j - 1)) / g.hy);
        }
    }
    out
}

/// Net outflow per cell volume. With wall-normal entries structurally zero
/// this is exactly minus the transpose of `gradient_cc_to_faces`.
pub fn divergence_faces_to_cc(w: &FaceVectorField) -> ScalarField {
    let g = w.grid;
    let mut out = ScalarField::zeros(g);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let div = (w.u_at(i + 1, j) - w.u_at(i, j)) / g.hx
                + (w.v_at(i, j + 1) - w.v_at(i, j)) / g.hy;
            out.set(i, j, div);
        }
    }
    out
}

/// Five-point Laplacian with mirror ghosts (homogeneous Neumann walls).
/// Identical, stencil for stencil, to `divergence . gradient`.
pub fn laplacian_neumann(c: &ScalarField) -> ScalarField {
    let g = c.grid;
    let (ihx2, ihy2) = (1.0 / (g.hx * g.hx), 1.0 / (g.hy * g.hy));
    let mut out = ScalarField::zeros(g);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let cc = c.at(i, j);
            let cw = if i > 0 { c.at(i - 1, j) } else { cc };
            let ce = if i + 1 < g.nx { c.at(i + 1, j) } else { cc };
            let cs = if j > 0 { c.at(i, j - 1) } else { cc };
            let cn = if j + 1 < g.ny { c.at(i, j + 1) } else { cc };
            out.set(
                i,
                j,
                (cw - 2.0 * cc + ce) * ihx2 + (cs - 2.0 * cc + cn) * ihy2,
            );
        }
    }
    out
}

/// Componentwise five-point Laplacian of a staggered velocity with no-slip
/// walls: zero Dirichlet values on the wall-normal planes (they carry the
/// grid line), odd reflection ghosts in the tangential direction. Output
/// wall-normal entries stay zero.
pub fn laplacian_velocity_noslip(w: &FaceVectorField) -> FaceVectorField {
    let g = w.grid;
    let e = ghost_velocity_noslip(w);
    let (ihx2, ihy2) = (1.0 / (g.hx * g.hx), 1.0 / (g.hy * g.hy));
    let mut out = FaceVectorField::zeros(g);
    for j in 0..g.ny {
        let jj = j as isize;
        for i in 1..g.nx {
            let uc = w.u_at(i, j);
            let lap = (w.u_at(i - 1, j) - 2.0 * uc + w.u_at(i + 1, j)) * ihx2
                + (e.u_at(i, jj - 1) - 2.0 * uc + e.u_at(i, jj + 1)) * ihy2;
            out.set_u(i, j, lap);
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            let ii = i as isize;
            let vc = w.v_at(i, j);
            let lap = (e.v_at(ii - 1, j) - 2.0 * vc + e.v_at(ii + 1, j)) * ihx2
                + (w.v_at(i, j - 1) - 2.0 * vc + w.v_at(i, j + 1)) * ihy2;
            out.set_v(i, j, lap);
        }
    }
    out
}

/// Skew-symmetric advection of a cell scalar by a face velocity: the average
/// of the conservative form (differences of face fluxes with two-point
/// interpolated concentration) and the advective form (face-averaged
/// `u . grad C`). For any velocity with zero wall-normal entries the h-inner
/// product `(advect(U, C), C)` vanishes identically, so advection neither
/// creates nor destroys solute energy.
pub fn advect_scalar_skew(w: &FaceVectorField, c: &ScalarField) -> ScalarField {
    let g = w.grid;
    assert!(g == c.grid, "grid mismatch");
    let grad = gradient_cc_to_faces(c);
    let mut out = ScalarField::zeros(g);
    for j in 0..g.ny {
        for i in 0..g.nx {
            // Mirror reads at the walls; the structural zeros in u and v
            // erase those fluxes anyway.
            let cw = if i > 0 { c.at(i - 1, j) } else { c.at(i, j) };
            let ce = if i + 1 < g.nx { c.at(i + 1, j) } else { c.at(i, j) };
            let cs = if j > 0 { c.at(i, j - 1) } else { c.at(i, j) };
            let cn = if j + 1 < g.ny { c.at(i, j + 1) } else { c.at(i, j) };
            let cc = c.at(i, j);
            let conservative = (w.u_at(i + 1, j) * 0.5 * (cc + ce)
                - w.u_at(i, j) * 0.5 * (cw + cc))
                / g.hx
                + (w.v_at(i, j + 1) * 0.5 * (cc + cn) - w.v_at(i, j) * 0.5 * (cs + cc)) / g.hy;
            let advective = 0.5
                * (w.u_at(i, j) * grad.u_at(i, j) + w.u_at(i + 1, j) * grad.u_at(i + 1, j))
                + 0.5 * (w.v_at(i, j) * grad.v_at(i, j) + w.v_at(i, j + 1) * grad.v_at(i, j + 1));
            out.set(i, j, 0.5 * (conservative + advective));
        }
    }
    out
}

/// The non-gradient part of the Korteweg stress divergence,
/// `-delta_hat * grad(C) * laplacian(C)`, sampled on faces with the
/// Laplacian averaged from the two adjacent cells. The gradient part of the
/// stress is absorbed into the modified pressure and never applied here.
pub fn korteweg_force(c: &ScalarField, delta_hat: f64) -> FaceVectorField {
    let g = c.grid;
    let grad = gradient_cc_to_faces(c);
    let lap = laplacian_neumann(c);
    let mut out = FaceVectorField::zeros(g);
    for j in 0..g.ny {
        for i in 1..g.nx {
            let lap_face = 0.5 * (lap.at(i - 1, j) + lap.at(i, j));
            out.set_u(i, j, -delta_hat * grad.u_at(i, j) * lap_face);
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            let lap_face = 0.5 * (lap.at(i, j - 1) + lap.at(i, j));
            out.set_v(i, j, -delta_hat * grad.v_at(i, j) * lap_face);
        }
    }
    out
}

/// Drag coefficient `mu * (alpha + beta * C)` interpolated to every face
/// (wall faces mirror the adjacent cell). Stored as plain per-face arrays:
/// these are coefficients, not a velocity, so the no-penetration pinning
/// does not apply.
#[derive(Debug, Clone, PartialEq)]
pub struct DragCoefficients {
    pub grid: Grid,
    pub on_u: Vec<f64>,
    pub on_v: Vec<f64>,
}

impl DragCoefficients {
    pub fn scale(&mut self, a: f64) {
        for w in &mut self.on_u {
            *w *= a;
        }
        for w in &mut self.on_v {
            *w *= a;
        }
    }
}

/// Fails with `SingularPermeability` if `alpha + beta * C` falls below
/// `PERMEABILITY_FLOOR` on any face, reporting the minimum and where it
/// happened.
pub fn drag_coefficient(c: &ScalarField, p: &Params) -> Result<DragCoefficients, Error> {
    let g = c.grid;
    let mut on_u = vec![0.0; (g.nx + 1) * g.ny];
    let mut on_v = vec![0.0; g.nx * (g.ny + 1)];
    let mut min = f64::INFINITY;
    let mut min_face = ('u', 0usize, 0usize);
    for j in 0..g.ny {
        for i in 0..=g.nx {
            let cl = c.at(if i > 0 { i - 1 } else { 0 }, j);
            let cr = c.at(if i < g.nx { i } else { g.nx - 1 }, j);
            let k = p.alpha + p.beta * 0.5 * (cl + cr);
            if k < min {
                min = k;
                min_face = ('u', i, j);
            }
            on_u[j * (g.nx + 1) + i] = p.mu * k;
        }
    }
    for j in 0..=g.ny {
        for i in 0..g.nx {
            let cb = c.at(i, if j > 0 { j - 1 } else { 0 });
            let ct = c.at(i, if j < g.ny { j } else { g.ny - 1 });
            let k = p.alpha + p.beta * 0.5 * (cb + ct);
            if k < min {
                min = k;
                min_face = ('v', i, j);
            }
            on_v[j * g.nx + i] = p.mu * k;
        }
    }
    if min < PERMEABILITY_FLOOR {
        let (axis, i, j) = min_face;
        return Err(Error::SingularPermeability { min, axis, i, j });
    }
    Ok(DragCoefficients {
        grid: g,
        on_u,
        on_v,
    })
}

/// Squared gradient magnitude at cell centers, averaged from the squared
/// face components. Wall faces contribute zero, matching the mirror ghosts.
fn grad_sq_cc(grad: &FaceVectorField) -> ScalarField {
    let g = grad.grid;
    let mut out = ScalarField::zeros(g);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let gx = 0.5 * (grad.u_at(i, j).powi(2) + grad.u_at(i + 1, j).powi(2));
            let gy = 0.5 * (grad.v_at(i, j).powi(2) + grad.v_at(i, j + 1).powi(2));
            out.set(i, j, gx + gy);
        }
    }
    out
}

/// The scalar absorbed into the modified pressure: the isotropic Korteweg
/// part `-delta_hat/3 * |grad C|^2 + 2*gamma/3 * laplacian(C)` minus the
/// `delta_hat/2 * |grad C|^2` that completes the stress-divergence split.
/// Adding this to the modified pressure recovers the physical one.
pub fn q_correction(c: &ScalarField, p: &Params) -> ScalarField {
    let g = c.grid;
    let grad = gradient_cc_to_faces(c);
    let gsq = grad_sq_cc(&grad);
    let lap = laplacian_neumann(c);
    let mut out = ScalarField::zeros(g);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let q = 2.0 / 3.0 * p.gamma * lap.at(i, j)
                - (1.0 / 3.0 + 0.5) * p.delta_hat * gsq.at(i, j);
            out.set(i, j, q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::SplitMix64;

    fn grid(nx: usize, ny: usize) -> Grid {
        Grid::new(nx, ny, 1.0, 1.0).unwrap()
    }

    fn random_scalar(g: Grid, seed: u64) -> ScalarField {
        let mut rng = SplitMix64::new(seed);
        ScalarField::from_cell_centers(g, |_, _| rng.next_symmetric())
    }

    fn random_velocity(g: Grid, seed: u64) -> FaceVectorField {
        let mut rng = SplitMix64::new(seed);
        let mut w = FaceVectorField::zeros(g);
        for j in 0..g.ny {
            for i in 1..g.nx {
                w.set_u(i, j, rng.next_symmetric());
            }
        }
        for j in 1..g.ny {
            for i in 0..g.nx {
                w.set_v(i, j, rng.next_symmetric());
            }
        }
        w
    }

    #[test]
    fn gradient_of_linear_profile_is_exact() {
        let g = grid(6, 5);
        let c = ScalarField::from_cell_centers(g, |x, _| x);
        let grad = gradient_cc_to_faces(&c);
        for j in 0..g.ny {
            assert_eq!(grad.u_at(0, j), 0.0);
            assert_eq!(grad.u_at(g.nx, j), 0.0);
            for i in 1..g.nx {
                assert!((grad.u_at(i, j) - 1.0).abs() <= 1e-12);
            }
        }
        for j in 1..g.ny {
            for i in 0..g.nx {
                assert!(grad.v_at(i, j).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn divergence_of_linear_velocity_is_constant_inside() {
        let g = grid(6, 6);
        // u = x, v = 0 gives div = 1 in columns whose both faces are interior.
        let w = FaceVectorField::from_faces(g, |x, _| x, |_, _| 0.0);
        let div = divergence_faces_to_cc(&w);
        for j in 0..g.ny {
            for i in 1..g.nx - 1 {
                assert!((div.at(i, j) - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn gradient_and_divergence_are_negative_adjoints() {
        let g = grid(7, 5);
        let c = random_scalar(g, 3);
        let w = random_velocity(g, 4);
        let grad = gradient_cc_to_faces(&c);
        let div = divergence_faces_to_cc(&w);
        let vol = g.cell_volume();
        let mut lhs = 0.0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                lhs += div.at(i, j) * c.at(i, j) * vol;
            }
        }
        let mut rhs = 0.0;
        for j in 0..g.ny {
            for i in 0..=g.nx {
                rhs -= w.u_at(i, j) * grad.u_at(i, j) * vol;
            }
        }
        for j in 0..=g.ny {
            for i in 0..g.nx {
                rhs -= w.v_at(i, j) * grad.v_at(i, j) * vol;
            }
        }
        assert!((lhs - rhs).abs() <= 1e-13 * (lhs.abs() + rhs.abs() + 1.0));
    }

    #[test]
    fn laplacian_neumann_matches_divergence_of_gradient() {
        let g = grid(8, 6);
        let c = random_scalar(g, 9);
        let lap = laplacian_neumann(&c);
        let composed = divergence_faces_to_cc(&gradient_cc_to_faces(&c));
        for j in 0..g.ny {
            for i in 0..g.nx {
                assert!((lap.at(i, j) - composed.at(i, j)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn laplacian_neumann_is_symmetric_and_kills_constants() {
        let g = grid(6, 6);
        let c1 = random_scalar(g, 21);
        let c2 = random_scalar(g, 22);
        let l1 = laplacian_neumann(&c1);
        let l2 = laplacian_neumann(&c2);
        let dot = |a: &ScalarField, b: &ScalarField| {
            let mut s = 0.0;
            for j in 0..g.ny {
                for i in 0..g.nx {
                    s += a.at(i, j) * b.at(i, j) * g.cell_volume();
                }
            }
            s
        };
        let lhs = dot(&l1, &c2);
        let rhs = dot(&c1, &l2);
        assert!((lhs - rhs).abs() <= 1e-11 * (lhs.abs() + rhs.abs() + 1.0));
        let uniform = ScalarField::constant(g, 4.2);
        assert_eq!(laplacian_neumann(&uniform).max_abs(), 0.0);
    }

    #[test]
    fn velocity_laplacian_is_zero_for_zero_field() {
        let g = grid(5, 7);
        let lap = laplacian_velocity_noslip(&FaceVectorField::zeros(g));
        assert_eq!(lap.max_abs(), 0.0);
        assert!(lap.no_penetration());
    }

    #[test]
    fn velocity_laplacian_sees_the_noslip_reflection() {
        let g = grid(4, 4);
        // A single interior u entry: its wall-adjacent row feels -u through
        // the ghost, so the y part at (2, 0) is (-u - 2u + u_above)/hy^2.
        let mut w = FaceVectorField::zeros(g);
        w.set_u(2, 0, 1.0);
        let lap = laplacian_velocity_noslip(&w);
        let ihx2 = 1.0 / (g.hx * g.hx);
        let ihy2 = 1.0 / (g.hy * g.hy);
        assert!((lap.u_at(2, 0) - (-2.0 * ihx2 - 3.0 * ihy2)).abs() <= 1e-9);
        assert!((lap.u_at(2, 1) - ihy2).abs() <= 1e-9);
        assert!((lap.u_at(1, 0) - ihx2).abs() <= 1e-9);
    }

    #[test]
    fn advection_by_zero_velocity_vanishes() {
        let g = grid(6, 6);
        let c = random_scalar(g, 31);
        let adv = advect_scalar_skew(&FaceVectorField::zeros(g), &c);
        assert_eq!(adv.max_abs(), 0.0);
    }

    #[test]
    fn advection_of_uniform_scalar_reduces_to_divergence_times_c() {
        let g = grid(6, 5);
        let w = random_velocity(g, 33);
        let c = ScalarField::constant(g, 2.5);
        let adv = advect_scalar_skew(&w, &c);
        let div = divergence_faces_to_cc(&w);
        // grad C = 0, so only the conservative half survives: C * div(U) / 2
        // plus the advective half's zero, i.e. 0.5 * C * div.
        for j in 0..g.ny {
            for i in 0..g.nx {
                assert!((adv.at(i, j) - 0.5 * 2.5 * div.at(i, j)).abs() <= 1e-11);
            }
        }
    }

    #[test]
    fn advection_is_energy_neutral_for_any_admissible_velocity() {
        let g = grid(8, 8);
        let w = random_velocity(g, 41);
        let c = random_scalar(g, 42);
        let adv = advect_scalar_skew(&w, &c);
        let mut s = 0.0;
        let mut csq = 0.0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                s += adv.at(i, j) * c.at(i, j) * g.cell_volume();
                csq += c.at(i, j) * c.at(i, j) * g.cell_volume();
            }
        }
        assert!(s.abs() <= 1e-12 * csq);
    }

    #[test]
    fn korteweg_force_vanishes_for_uniform_concentration() {
        let g = grid(6, 6);
        let c = ScalarField::constant(g, 3.0);
        let f = korteweg_force(&c, 0.05);
        assert_eq!(f.max_abs(), 0.0);
    }

    #[test]
    fn korteweg_force_vanishes_where_affine_profiles_are_harmonic() {
        let g = grid(8, 8);
        let c = ScalarField::from_cell_centers(g, |x, y| 0.3 * x - 0.7 * y + 2.0);
        let f = korteweg_force(&c, 0.05);
        // The mirror ghosts bend an affine profile at the walls, so only
        // faces whose full stencil avoids wall cells must vanish.
        for j in 2..g.ny - 2 {
            for i in 2..g.nx - 1 {
                assert!(f.u_at(i, j).abs() <= 1e-12, "u face ({i},{j})");
            }
        }
        for j in 2..g.ny - 1 {
            for i in 2..g.nx - 2 {
                assert!(f.v_at(i, j).abs() <= 1e-12, "v face ({i},{j})");
            }
        }
    }

    #[test]
    fn drag_interpolates_and_guards_positivity() {
        let g = grid(4, 4);
        let p = Params {
            beta: 2.0,
            ..Params::default()
        };
        let c = ScalarField::from_cell_centers(g, |x, _| x);
        let drag = drag_coefficient(&c, &p).unwrap();
        // Interior u face between columns 0 and 1: C average is 0.25.
        assert!((drag.on_u[1] - (1.0 + 2.0 * 0.25)).abs() <= 1e-12);
        // Wall face mirrors the first cell: C = 0.125.
        assert!((drag.on_u[0] - (1.0 + 2.0 * 0.125)).abs() <= 1e-12);

        let hostile = ScalarField::constant(g, -0.51);
        let err = drag_coefficient(&hostile, &p).unwrap_err();
        match err {
            Error::SingularPermeability { min, .. } => {
                assert!((min - (1.0 - 2.0 * 0.51)).abs() <= 1e-12)
            }
            other => panic!("expected SingularPermeability, got {other:?}"),
        }
    }

    #[test]
    fn q_correction_matches_the_affine_closed_form() {
        let g = grid(8, 8);
        let s = 0.7;
        let p = Params {
            delta_hat: 0.04,
            gamma: 0.3,
            ..Params::default()
        };
        let c = ScalarField::from_cell_centers(g, |x, _| s * x);
        let q = q_correction(&c, &p);
        let expect = -(1.0 / 3.0) * p.delta_hat * s * s - 0.5 * p.delta_hat * s * s;
        for j in 0..g.ny {
            for i in 1..g.nx - 1 {
                assert!((q.at(i, j) - expect).abs() <= 1e-12, "cell ({i},{j})");
            }
        }
        // Wall columns lose half of the squared gradient to the zeroed face.
        let wall = -(1.0 / 3.0 + 0.5) * p.delta_hat * 0.5 * s * s;
        let lap_wall = 2.0 / 3.0 * p.gamma * (s / g.hx);
        assert!((q.at(0, 3) - (wall + lap_wall)).abs() <= 1e-12);
    }
}
