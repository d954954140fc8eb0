//! Small dense linear algebra over any [`Real`].
//!
//! Systems in this crate are at most a handful of rows (one per bound
//! state), so everything is plain row-major storage with partial-pivoting LU.

use std::ops::{Index, IndexMut};

use super::precision::{Evaluated, PrecisionPolicy};
use super::real::{Bits, Extended, Precision, Real};
use crate::error::{Error, Result};

/// Square row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(Matrix {
            n,
            data: rows.iter().flat_map(|r| r.iter().cloned()).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Real> Matrix<T> {
    pub fn identity(n: usize, ctx: T::Ctx) -> Self {
        Matrix::from_fn(n, |i, j| T::lift(if i == j { 1.0 } else { 0.0 }, ctx))
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].to_f64().abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.to_f64().abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| dot(self.row(i), x))
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.n, |i, j| self[(j, i)].clone())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = a[0].clone() * b[0].clone();
    for (x, y) in a.iter().zip(b).skip(1) {
        acc = acc + x.clone() * y.clone();
    }
    acc
}

/// LU factorization with partial pivoting, `P·A = L·U`.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    odd_permutation: bool,
    norm1: f64,
}

impl<T: Real> Lu<T> {
    /// Factorizes `a`, failing when a pivot drops below `n·u·max|a_ij|`.
    pub fn factor(a: &Matrix<T>) -> Result<Self> {
        let n = a.dim();
        if n == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let ctx = a[(0, 0)].ctx();
        let scale = a.data.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
        if !scale.is_finite() {
            return Err(Error::Overflow { exponent: f64::INFINITY });
        }
        let floor = n as f64 * T::unit_roundoff(ctx) * scale;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;

        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| {
                    lu[(i, k)]
                        .abs()
                        .partial_cmp(&lu[(j, k)].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(k);
            let pivot = lu[(p, k)].abs().to_f64();
            if !(pivot > floor) {
                return Err(Error::SingularMatrix { pivot });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                odd = !odd;
            }
            let pivot = lu[(k, k)].clone();
            for i in k + 1..n {
                let factor = lu[(i, k)].clone() / pivot.clone();
                for j in k + 1..n {
                    let updated = lu[(i, j)].clone() - factor.clone() * lu[(k, j)].clone();
                    lu[(i, j)] = updated;
                }
                lu[(i, k)] = factor;
            }
        }
        Ok(Lu {
            lu,
            perm,
            odd_permutation: odd,
            norm1: a.norm1(),
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.dim()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] = y[i].clone() - self.lu[(i, j)].clone() * y[j].clone();
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] = y[i].clone() - self.lu[(i, j)].clone() * y[j].clone();
            }
            y[i] = y[i].clone() / self.lu[(i, i)].clone();
        }
        y
    }

    /// Solves `Aᵀ·y = c`.
    pub fn solve_transposed(&self, c: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut z: Vec<T> = c.to_vec();
        for i in 0..n {
            for j in 0..i {
                z[i] = z[i].clone() - self.lu[(j, i)].clone() * z[j].clone();
            }
            z[i] = z[i].clone() / self.lu[(i, i)].clone();
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                z[i] = z[i].clone() - self.lu[(j, i)].clone() * z[j].clone();
            }
        }
        let mut y = z.clone();
        for (i, &p) in self.perm.iter().enumerate() {
            y[p] = z[i].clone();
        }
        y
    }

    pub fn inverse(&self) -> Matrix<T> {
        let n = self.dim();
        let ctx = self.lu[(0, 0)].ctx();
        let mut inv = Matrix::identity(n, ctx);
        for j in 0..n {
            let e: Vec<T> = (0..n).map(|i| T::lift(if i == j { 1.0 } else { 0.0 }, ctx)).collect();
            let col = self.solve(&e);
            for (i, v) in col.into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }

    /// `ln|det A|`.
    pub fn ln_abs_det(&self) -> T {
        let n = self.dim();
        let mut acc = self.lu[(0, 0)].abs().ln();
        for i in 1..n {
            acc = acc + self.lu[(i, i)].abs().ln();
        }
        acc
    }

    /// Sign of `det A`.
    pub fn det_sign(&self) -> f64 {
        let ctx = self.lu[(0, 0)].ctx();
        let zero = T::lift(0.0, ctx);
        let negatives = (0..self.dim())
            .filter(|&i| self.lu[(i, i)] < zero)
            .count();
        if (negatives % 2 == 1) ^ self.odd_permutation {
            -1.0
        } else {
            1.0
        }
    }

    /// Hager–Higham estimate of `‖A‖₁·‖A⁻¹‖₁` from the existing factors.
    pub fn condition_estimate(&self) -> f64 {
        self.norm1 * self.inverse_norm1_estimate()
    }

    fn inverse_norm1_estimate(&self) -> f64 {
        let n = self.dim();
        let ctx = self.lu[(0, 0)].ctx();
        let norm1 = |v: &[T]| v.iter().map(|x| x.to_f64().abs()).sum::<f64>();
        if n == 1 {
            return 1.0 / self.lu[(0, 0)].abs().to_f64();
        }
        let mut x: Vec<T> = vec![T::lift(1.0 / n as f64, ctx); n];
        let mut estimate = 0.0;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve(&x);
            estimate = norm1(&y);
            let xi: Vec<T> = y
                .iter()
                .map(|v| T::lift(if v.to_f64() >= 0.0 { 1.0 } else { -1.0 }, ctx))
                .collect();
            let z = self.solve_transposed(&xi);
            let zf: Vec<f64> = z.iter().map(|v| v.to_f64()).collect();
            let xf: Vec<f64> = x.iter().map(|v| v.to_f64()).collect();
            let (j, zmax) = zf
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.abs()))
                .fold((0, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
            let ztx: f64 = zf.iter().zip(&xf).map(|(a, b)| a * b).sum();
            if zmax <= ztx || j == last_j {
                break;
            }
            last_j = j;
            x = (0..n).map(|i| T::lift(if i == j { 1.0 } else { 0.0 }, ctx)).collect();
        }
        // alternating probe guards against the estimator's known blind spots
        let alt: Vec<T> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                T::lift(s * (1.0 + i as f64 / (n - 1) as f64), ctx)
            })
            .collect();
        let alt_est = 2.0 * norm1(&self.solve(&alt)) / (3.0 * n as f64);
        estimate.max(alt_est)
    }
}

/// Estimated 1-norm condition number of `a`; `+∞` when singular.
pub fn condition_estimate(a: &Matrix<f64>) -> f64 {
    match Lu::factor(a) {
        Ok(lu) => lu.condition_estimate(),
        Err(_) => f64::INFINITY,
    }
}

/// Outcome of [`solve_linear`].
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSolution {
    pub x: Vec<f64>,
    pub precision: Precision,
    pub condition: f64,
    /// `‖A·x − b‖∞ / ‖b‖∞` of the returned `x`, evaluated at high precision.
    pub residual: f64,
}

/// Solves `A·x = b` under `policy`, escalating to extended precision when
/// the condition estimate crosses the policy threshold.
pub fn solve_linear(a: &Matrix<f64>, b: &[f64], policy: &PrecisionPolicy) -> Result<LinearSolution> {
    policy.validate()?;
    if b.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.len(),
        });
    }
    let solved: Evaluated<Vec<f64>> = policy.evaluate(
        || {
            let lu = Lu::factor(a)?;
            Ok((lu.solve(b), lu.condition_estimate()))
        },
        |bits| solve_extended(a, b, bits),
    )?;
    let residual = relative_residual(a, b, &solved.value);
    Ok(LinearSolution {
        x: solved.value,
        precision: solved.precision,
        condition: solved.condition,
        residual,
    })
}

fn solve_extended(a: &Matrix<f64>, b: &[f64], bits: Bits) -> Result<(Vec<f64>, f64)> {
    let ae = a.map(|v| Extended::lift(*v, bits));
    let be: Vec<Extended> = b.iter().map(|v| Extended::lift(*v, bits)).collect();
    let lu = Lu::factor(&ae)?;
    let x = lu.solve(&be);
    let cond = lu.condition_estimate();
    // backward error check at the working precision
    let ax = ae.mul_vec(&x);
    let r = ax
        .iter()
        .zip(&be)
        .map(|(l, r)| (l.clone() - r.clone()).abs().to_f64())
        .fold(0.0, f64::max);
    let xnorm = x.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
    let bnorm = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let backward = r / (ae.norm_inf() * xnorm + bnorm).max(f64::MIN_POSITIVE);
    if backward > Extended::unit_roundoff(bits).sqrt() {
        return Err(Error::SingularMatrix { pivot: backward });
    }
    Ok((x.iter().map(Real::to_f64).collect(), cond))
}

/// `‖A·x − b‖∞ / ‖b‖∞` computed in 192-bit arithmetic.
pub fn relative_residual(a: &Matrix<f64>, b: &[f64], x: &[f64]) -> f64 {
    let bits = Bits(192);
    let ae = a.map(|v| Extended::lift(*v, bits));
    let xe: Vec<Extended> = x.iter().map(|v| Extended::lift(*v, bits)).collect();
    let r = ae
        .mul_vec(&xe)
        .into_iter()
        .zip(b)
        .map(|(l, r)| (l - Extended::lift(*r, bits)).abs().to_f64())
        .fold(0.0, f64::max);
    let bnorm = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if bnorm == 0.0 {
        r
    } else {
        r / bnorm
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::precision::{Escalation, PrecisionMode};

    fn exact_cond1(a: &Matrix<f64>) -> f64 {
        let inv = Lu::factor(a).unwrap().inverse();
        a.norm1() * inv.norm1()
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let a = Matrix::identity(4, ());
        let b = [1.5, -2.0, 3.25, 0.0];
        let sol = solve_linear(&a, &b, &PrecisionPolicy::default()).unwrap();
        assert_eq!(sol.x, b.to_vec());
        assert_eq!(sol.precision, Precision::Native);
        assert_eq!(sol.residual, 0.0);
    }

    #[test]
    fn one_by_one() {
        let a = Matrix::from_rows(&[vec![2.0]]).unwrap();
        let sol = solve_linear(&a, &[6.0], &PrecisionPolicy::default()).unwrap();
        assert_eq!(sol.x, vec![3.0]);
    }

    #[test]
    fn condition_examples() {
        assert_eq!(condition_estimate(&Matrix::identity(3, ())), 1.0);
        let d = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1e-14]]).unwrap();
        let c = condition_estimate(&d);
        assert!((c / 1e14 - 1.0).abs() < 1e-12, "{c}");
        let s = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(condition_estimate(&s), f64::INFINITY);
    }

    #[test]
    fn estimate_within_factor_n_of_exact() {
        let kappas = [4.0, 3.0, 2.0, 1.0, 0.5];
        let q = Matrix::from_fn(5, |i, j| 1.0 / (kappas[i] + kappas[j]));
        let est = condition_estimate(&q);
        let exact = exact_cond1(&q);
        assert!(est <= exact * (1.0 + 1e-8) && est * 5.0 >= exact, "{est} vs {exact}");
    }

    #[test]
    fn singular_matrix_is_reported() {
        let s = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        let err = solve_linear(&s, &[1.0, 2.0], &PrecisionPolicy::default()).unwrap_err();
        assert!(matches!(err, Error::SingularMatrix { .. }));
        let auto = PrecisionPolicy::default().with_escalation(Escalation::Auto);
        assert!(matches!(
            solve_linear(&s, &[1.0, 2.0], &auto).unwrap_err(),
            Error::SingularMatrix { .. }
        ));
    }

    #[test]
    fn escalation_triggers_above_threshold() {
        let d = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1e-14]]).unwrap();
        let policy = PrecisionPolicy::default()
            .with_escalation(Escalation::Auto)
            .with_threshold(1e10);
        let sol = solve_linear(&d, &[1.0, 1.0], &policy).unwrap();
        assert_eq!(sol.precision, Precision::Extended { bits: 256 });
        assert_eq!(sol.x[1], 1e14);
    }

    #[test]
    fn extended_mode_is_honored() {
        let a = Matrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let policy = PrecisionPolicy {
            mode: PrecisionMode::Extended { bits: 128 },
            ..PrecisionPolicy::default()
        };
        let sol = solve_linear(&a, &[1.0, 2.0], &policy).unwrap();
        assert_eq!(sol.precision, Precision::Extended { bits: 128 });
        assert!((sol.x[0] - 1.0 / 11.0).abs() < 1e-16);
        assert!((sol.x[1] - 7.0 / 11.0).abs() < 1e-16);
    }

    #[test]
    fn transposed_solve_and_determinant() {
        let a = Matrix::from_rows(&[
            vec![0.0, 2.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![3.0, 0.0, 1.0],
        ])
        .unwrap();
        let lu = Lu::factor(&a).unwrap();
        let c = [1.0, -1.0, 2.0];
        let y = lu.solve_transposed(&c);
        let back = a.transpose().mul_vec(&y);
        for (l, r) in back.iter().zip(c) {
            assert!((l - r).abs() < 1e-14);
        }
        // det = 0·(1−0) − 2·(1−0) + 1·(0−3) = −5
        assert!((lu.ln_abs_det() - 5f64.ln()).abs() < 1e-14);
        assert_eq!(lu.det_sign(), -1.0);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        let a = Matrix::identity(2, ());
        assert!(matches!(
            solve_linear(&a, &[1.0], &PrecisionPolicy::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
