//! Instrumented complex-arithmetic kernels.
//!
//! Every vector/matrix operation on an algorithm's hot path goes through the
//! functions here so that complex additions and complex multiplications can
//! be tallied per snapshot and compared across algorithms and array sizes.
//!
//! Counting policy: only the O(m) and O(m^2) kernels below contribute.
//! A complex dot product over length-m vectors counts m multiplications and
//! m-1 additions; a matrix-vector product counts m^2 and m(m-1); an axpy
//! counts m and m; a Hermitian rank-1 accumulation `A += lambda r r^H`
//! (real lambda) counts 2m^2 multiplications and m^2 additions. Scalar
//! bookkeeping (magnitude tests, clamps, the final division of a quotient)
//! is deliberately uncounted — it is O(1) per snapshot for every algorithm
//! and would only blur the order comparison.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

/// Running tally of complex additions and multiplications.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FlopCount {
    pub cadd: u64,
    pub cmul: u64,
}

impl FlopCount {
    pub fn total(&self) -> u64 {
        self.cadd + self.cmul
    }
}

impl std::ops::Add for FlopCount {
    type Output = FlopCount;
    fn add(self, rhs: FlopCount) -> FlopCount {
        FlopCount {
            cadd: self.cadd + rhs.cadd,
            cmul: self.cmul + rhs.cmul,
        }
    }
}

impl std::ops::AddAssign for FlopCount {
    fn add_assign(&mut self, rhs: FlopCount) {
        self.cadd += rhs.cadd;
        self.cmul += rhs.cmul;
    }
}

impl std::ops::Sub for FlopCount {
    type Output = FlopCount;
    fn sub(self, rhs: FlopCount) -> FlopCount {
        FlopCount {
            cadd: self.cadd - rhs.cadd,
            cmul: self.cmul - rhs.cmul,
        }
    }
}

/// `x^H y`.
pub fn cdot(x: &DVector<Complex64>, y: &DVector<Complex64>, fc: &mut FlopCount) -> Complex64 {
    debug_assert_eq!(x.len(), y.len());
    fc.cmul += x.len() as u64;
    fc.cadd += x.len() as u64 - 1;
    x.dotc(y)
}

/// `A x`.
pub fn cmatvec(
    a: &DMatrix<Complex64>,
    x: &DVector<Complex64>,
    fc: &mut FlopCount,
) -> DVector<Complex64> {
    debug_assert_eq!(a.ncols(), x.len());
    let (m, n) = (a.nrows() as u64, a.ncols() as u64);
    fc.cmul += m * n;
    fc.cadd += m * (n - 1);
    a * x
}

/// `A^H x` (used for row-vector products `x^H A`, returned as its adjoint).
pub fn cmatvec_adjoint(
    a: &DMatrix<Complex64>,
    x: &DVector<Complex64>,
    fc: &mut FlopCount,
) -> DVector<Complex64> {
    debug_assert_eq!(a.nrows(), x.len());
    let (m, n) = (a.nrows() as u64, a.ncols() as u64);
    fc.cmul += m * n;
    fc.cadd += n * (m - 1);
    a.ad_mul(x).column(0).into_owned()
}

/// `y += alpha x`.
pub fn caxpy(
    y: &mut DVector<Complex64>,
    alpha: Complex64,
    x: &DVector<Complex64>,
    fc: &mut FlopCount,
) {
    debug_assert_eq!(x.len(), y.len());
    fc.cmul += x.len() as u64;
    fc.cadd += x.len() as u64;
    y.axpy(alpha, x, Complex64::new(1.0, 0.0));
}

/// `alpha x`.
pub fn cscale(x: &DVector<Complex64>, alpha: Complex64, fc: &mut FlopCount) -> DVector<Complex64> {
    fc.cmul += x.len() as u64;
    x * alpha
}

/// Hermitian rank-1 accumulation `A += lambda r r^H` with real `lambda`.
///
/// Filled from the upper triangle and mirrored so the result stays exactly
/// Hermitian regardless of rounding.
pub fn her_rank1_update(
    a: &mut DMatrix<Complex64>,
    lambda: f64,
    r: &DVector<Complex64>,
    fc: &mut FlopCount,
) {
    let m = r.len();
    debug_assert_eq!(a.nrows(), m);
    debug_assert_eq!(a.ncols(), m);
    fc.cmul += 2 * (m as u64) * (m as u64);
    fc.cadd += (m as u64) * (m as u64);
    for k in 0..m {
        let rk = r[k].conj();
        for j in 0..k {
            let val = lambda * (r[j] * rk);
            a[(j, k)] += val;
            a[(k, j)] += val.conj();
        }
        a[(k, k)] += Complex64::new(lambda * r[k].norm_sqr(), 0.0);
    }
}

/// `A = (A - k s^H) * scale` with real `scale` (RLS Riccati update form).
pub fn outer_sub_scale(
    a: &mut DMatrix<Complex64>,
    k: &DVector<Complex64>,
    s: &DVector<Complex64>,
    scale: f64,
    fc: &mut FlopCount,
) {
    let m = k.len();
    debug_assert_eq!(a.nrows(), m);
    debug_assert_eq!(s.len(), a.ncols());
    fc.cmul += 2 * (a.nrows() as u64) * (a.ncols() as u64);
    fc.cadd += (a.nrows() as u64) * (a.ncols() as u64);
    for l in 0..a.ncols() {
        let sl = s[l].conj();
        for j in 0..m {
            a[(j, l)] = (a[(j, l)] - k[j] * sl) * scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(vals: &[(f64, f64)]) -> DVector<Complex64> {
        DVector::from_iterator(vals.len(), vals.iter().map(|&(re, im)| Complex64::new(re, im)))
    }

    #[test]
    fn cdot_counts_and_value() {
        let x = cv(&[(1.0, 1.0), (0.0, -2.0), (3.0, 0.0)]);
        let y = cv(&[(2.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let mut fc = FlopCount::default();
        let d = cdot(&x, &y, &mut fc);
        assert_eq!(fc, FlopCount { cadd: 2, cmul: 3 });
        let expect = x.dotc(&y);
        assert_eq!(d, expect);
    }

    #[test]
    fn rank1_stays_hermitian() {
        let r = cv(&[(1.0, 2.0), (-0.5, 0.25), (0.0, 1.0)]);
        let mut a = DMatrix::<Complex64>::zeros(3, 3);
        let mut fc = FlopCount::default();
        her_rank1_update(&mut a, 0.7, &r, &mut fc);
        assert_eq!(fc, FlopCount { cadd: 9, cmul: 18 });
        let direct = &r * r.adjoint() * Complex64::new(0.7, 0.0);
        assert!((&a - &direct).norm() < 1e-12);
        assert!((&a - a.adjoint()).norm() == 0.0);
    }

    #[test]
    fn matvec_and_axpy_counts() {
        let a = DMatrix::<Complex64>::identity(4, 4);
        let x = DVector::<Complex64>::from_element(4, Complex64::new(1.0, -1.0));
        let mut fc = FlopCount::default();
        let y = cmatvec(&a, &x, &mut fc);
        assert_eq!(fc, FlopCount { cadd: 12, cmul: 16 });
        assert_eq!(y, x);
        let mut z = y.clone();
        caxpy(&mut z, Complex64::new(2.0, 0.0), &x, &mut fc);
        assert_eq!(fc, FlopCount { cadd: 16, cmul: 20 });
        assert_eq!(z, &x * Complex64::new(3.0, 0.0));
    }

    #[test]
    fn outer_sub_scale_matches_direct() {
        let k = cv(&[(0.5, 0.5), (1.0, 0.0)]);
        let s = cv(&[(1.0, -1.0), (0.0, 2.0)]);
        let mut a = DMatrix::<Complex64>::identity(2, 2);
        let direct = (&a - &k * s.adjoint()) * Complex64::new(2.0, 0.0);
        let mut fc = FlopCount::default();
        outer_sub_scale(&mut a, &k, &s, 2.0, &mut fc);
        assert_eq!(fc, FlopCount { cadd: 4, cmul: 8 });
        assert!((&a - direct).norm() < 1e-14);
    }
}
