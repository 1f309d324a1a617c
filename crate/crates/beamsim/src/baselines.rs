//! Reference beamformers: Frost constrained stochastic gradient,
//! constrained RLS, and a set-membership constrained SG variant. The exact
//! MVDR oracle lives in [`crate::signal::optimal_weights`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::flops::{caxpy, cdot, cmatvec, cmatvec_adjoint, cscale, outer_sub_scale, FlopCount};
use crate::{Error, Result};

/// Constraint-nullspace projector `P = I - a0 a0^H / ||a0||^2` together with
/// the constraint restorer `f = gamma a0 / ||a0||^2`.
#[derive(Debug, Clone)]
pub struct ConstraintProjector {
    pub p: DMatrix<Complex64>,
    pub f: DVector<Complex64>,
    pub a0: DVector<Complex64>,
    pub gamma: f64,
}

impl ConstraintProjector {
    pub fn new(a0: &DVector<Complex64>, gamma: f64) -> Result<Self> {
        let norm2 = a0.norm_squared();
        if norm2 < 1e-300 {
            return Err(Error::Domain("steering vector a0 must be nonzero".into()));
        }
        let m = a0.len();
        let p = DMatrix::<Complex64>::identity(m, m)
            - a0 * a0.adjoint() / Complex64::new(norm2, 0.0);
        let f = a0 * Complex64::new(gamma / norm2, 0.0);
        Ok(Self { p, f, a0: a0.clone(), gamma })
    }
}

/// Shared core of the projected-gradient updates:
/// `w' = P (w - mu y* r) + f` with `y` supplied by the caller.
fn projected_step(
    w: &DVector<Complex64>,
    r: &DVector<Complex64>,
    y: Complex64,
    mu: f64,
    proj: &ConstraintProjector,
    fc: &mut FlopCount,
) -> DVector<Complex64> {
    let mut t = w.clone();
    caxpy(&mut t, Complex64::new(-mu, 0.0) * y.conj(), r, fc);
    let mut out = cmatvec(&proj.p, &t, fc);
    fc.cadd += out.len() as u64;
    out += &proj.f;
    out
}

/// One Frost constrained-SG step.
pub fn frost_sg_step(
    w: &DVector<Complex64>,
    r: &DVector<Complex64>,
    mu: f64,
    proj: &ConstraintProjector,
    fc: &mut FlopCount,
) -> DVector<Complex64> {
    let y = cdot(w, r, fc);
    projected_step(w, r, y, mu, proj, fc)
}

/// Constrained RLS state: running inverse of the exponentially reweighted
/// covariance.
#[derive(Debug, Clone)]
pub struct RlsState {
    pub r_inv: DMatrix<Complex64>,
    pub forgetting: f64,
    epsilon: f64,
    /// Times the rank-1 denominator broke down and `R_inv` was reset.
    pub reinits: u64,
}

impl RlsState {
    /// `R_inv(0) = (1/epsilon) I`.
    pub fn new(m: usize, forgetting: f64, epsilon: f64) -> Result<Self> {
        if !(forgetting > 0.0 && forgetting <= 1.0) {
            return Err(Error::Config(format!("forgetting must lie in (0, 1], got {forgetting}")));
        }
        if !(epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self {
            r_inv: DMatrix::identity(m, m) * Complex64::new(1.0 / epsilon, 0.0),
            forgetting,
            epsilon,
            reinits: 0,
        })
    }

    fn reset(&mut self) {
        let m = self.r_inv.nrows();
        self.r_inv = DMatrix::identity(m, m) * Complex64::new(1.0 / self.epsilon, 0.0);
        self.reinits += 1;
    }
}

/// One constrained-RLS step: rank-1 inverse update followed by
/// `w' = gamma R_inv a0 / (a0^H R_inv a0)`.
pub fn rls_lcmv_step(
    state: &mut RlsState,
    r: &DVector<Complex64>,
    a0: &DVector<Complex64>,
    gamma: f64,
    fc: &mut FlopCount,
) -> Result<DVector<Complex64>> {
    let pi = cmatvec(&state.r_inv, r, fc);
    // sigma = R_inv^H r, i.e. sigma^H = r^H R_inv (textbook Riccati form)
    let sigma = cmatvec_adjoint(&state.r_inv, r, fc);
    let den = Complex64::new(state.forgetting, 0.0) + cdot(r, &pi, fc);
    if den.norm() < 1e-300 {
        state.reset();
    } else {
        let k = cscale(&pi, Complex64::new(1.0, 0.0) / den, fc);
        outer_sub_scale(&mut state.r_inv, &k, &sigma, 1.0 / state.forgetting, fc);
        // defensive re-Hermitianization against rounding drift
        let sym = (&state.r_inv + state.r_inv.adjoint()) * Complex64::new(0.5, 0.0);
        state.r_inv = sym;
    }
    let z = cmatvec(&state.r_inv, a0, fc);
    let den2 = cdot(a0, &z, fc);
    if den2.norm() < 1e-300 {
        return Err(Error::Numerical("degenerate constraint denominator in RLS weights".into()));
    }
    Ok(cscale(&z, Complex64::new(gamma, 0.0) / den2, fc))
}

/// One set-membership constrained-SG step: no update while `|y| <= delta`,
/// otherwise a projected-gradient step sized to land the a-posteriori
/// output magnitude exactly on the bound.
pub fn sm_sg_step(
    w: &DVector<Complex64>,
    r: &DVector<Complex64>,
    delta: f64,
    proj: &ConstraintProjector,
    fc: &mut FlopCount,
) -> (DVector<Complex64>, bool) {
    let y = cdot(w, r, fc);
    if y.norm() <= delta {
        return (w.clone(), false);
    }
    let pr = cmatvec(&proj.p, r, fc);
    let rpr = cdot(r, &pr, fc).re;
    if rpr < 1e-14 {
        return (w.clone(), false);
    }
    let mu = (1.0 - delta / y.norm()) / rpr;
    (projected_step(w, r, y, mu, proj, fc), true)
}
