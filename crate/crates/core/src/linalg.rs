//! Small dense inversion by Gauss-Jordan elimination with partial pivoting.
//!
//! The same elimination runs over plain reals and over [`Jet`]s; pivots are
//! chosen from the values at the expansion point.

use thiserror::Error;

use crate::jet::Jet;

/// Condition estimates above this are rejected as numerically singular.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is ill-conditioned (condition estimate {0:e})")]
    IllConditioned(f64),
}

/// Field operations needed by the elimination.
pub trait Scalar: Clone {
    fn value(&self) -> f64;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn sub_mul(&self, a: &Self, b: &Self) -> Self;
    fn div(&self, d: &Self) -> Self;
    fn is_exact_zero(&self) -> bool;
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn zero_like(&self) -> f64 {
        0.0
    }
    fn one_like(&self) -> f64 {
        1.0
    }
    fn sub_mul(&self, a: &f64, b: &f64) -> f64 {
        self - a * b
    }
    fn div(&self, d: &f64) -> f64 {
        self / d
    }
    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Scalar for Jet {
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn zero_like(&self) -> Jet {
        Jet::zero(self.space(), self.order())
    }
    fn one_like(&self) -> Jet {
        Jet::constant(self.space(), self.order(), 1.0)
    }
    fn sub_mul(&self, a: &Jet, b: &Jet) -> Jet {
        let mut out = self.clone();
        out.add_product(&-a, b);
        out
    }
    fn div(&self, d: &Jet) -> Jet {
        self / d
    }
    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }
}

fn norm1(m: &[Vec<f64>]) -> f64 {
    let k = m.len();
    (0..k)
        .map(|j| (0..k).map(|i| m[i][j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverts a square matrix. Returns the inverse and the 1-norm condition number
/// of the values.
pub fn invert<T: Scalar>(m: &[Vec<T>]) -> Result<(Vec<Vec<T>>, f64), LinalgError> {
    let k = m.len();
    if let Some(row) = m.iter().find(|r| r.len() != k) {
        return Err(LinalgError::NotSquare { rows: k, cols: row.len() });
    }
    if k == 0 {
        return Ok((Vec::new(), 1.0));
    }
    let values: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(Scalar::value).collect()).collect();
    let scale = values.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
    if scale == 0.0 {
        return Err(LinalgError::Singular);
    }

    let mut a: Vec<Vec<T>> = m.to_vec();
    let mut inv: Vec<Vec<T>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { m[0][0].one_like() } else { m[0][0].zero_like() })
                .collect()
        })
        .collect();

    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&r, &s| a[r][col].value().abs().total_cmp(&a[s][col].value().abs()))
            .unwrap();
        if a[pivot][col].value().abs() <= scale * 1e-15 {
            return Err(LinalgError::Singular);
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..k {
            a[col][j] = a[col][j].div(&p);
            inv[col][j] = inv[col][j].div(&p);
        }
        for r in 0..k {
            if r == col || a[r][col].is_exact_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..k {
                a[r][j] = a[r][j].sub_mul(&factor, &a[col][j]);
                inv[r][j] = inv[r][j].sub_mul(&factor, &inv[col][j]);
            }
        }
    }

    let inv_values: Vec<Vec<f64>> = inv.iter().map(|r| r.iter().map(Scalar::value).collect()).collect();
    let cond = norm1(&values) * norm1(&inv_values);
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(LinalgError::IllConditioned(cond));
    }
    Ok((inv, cond))
}

/// Inverse of a symmetric real matrix, symmetrized.
pub fn invert_symmetric(m: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, LinalgError> {
    let k = m.len();
    let mut asym = 0.0f64;
    for i in 0..k {
        if m[i].len() != k {
            return Err(LinalgError::NotSquare { rows: k, cols: m[i].len() });
        }
        for j in 0..i {
            asym = asym.max((m[i][j] - m[j][i]).abs());
        }
    }
    let scale = m.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs())).max(1.0);
    if asym > 1e-12 * scale {
        return Err(LinalgError::NotSymmetric(asym));
    }
    let (mut inv, _) = invert(m)?;
    for i in 0..k {
        for j in 0..i {
            let avg = 0.5 * (inv[i][j] + inv[j][i]);
            inv[i][j] = avg;
            inv[j][i] = avg;
        }
    }
    Ok(inv)
}

/// Max-abs entry of `a·b − I`.
pub fn identity_residual(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let k = a.len();
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let s: f64 = (0..k).map(|l| a[i][l] * b[l][j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((s - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetSpace;

    #[test]
    fn diagonal_inverse() {
        let inv = invert_symmetric(&[vec![1.0, 0.0], vec![0.0, 4.0]]).unwrap();
        assert_eq!(inv, vec![vec![1.0, 0.0], vec![0.0, 0.25]]);
    }

    #[test]
    fn two_by_two_inverse_product_is_identity() {
        let m = vec![vec![2.0, 1.0], vec![1.0, 1.0]];
        let inv = invert_symmetric(&m).unwrap();
        let expect = [[1.0, -1.0], [-1.0, 2.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((inv[i][j] - expect[i][j]).abs() < 1e-14);
            }
        }
        assert!(identity_residual(&m, &inv) < 1e-10);
    }

    #[test]
    fn singular_is_rejected() {
        assert_eq!(
            invert_symmetric(&[vec![1.0, 0.0], vec![0.0, 0.0]]),
            Err(LinalgError::Singular)
        );
        assert!(matches!(
            invert_symmetric(&[vec![1.0, 0.0], vec![0.0, 1e-13]]),
            Err(LinalgError::IllConditioned(_)) | Err(LinalgError::Singular)
        ));
        assert!(matches!(
            invert_symmetric(&[vec![1.0, 2.0], vec![0.0, 1.0]]),
            Err(LinalgError::NotSymmetric(_))
        ));
    }

    #[test]
    fn off_diagonal_pivoting() {
        let m = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let inv = invert_symmetric(&m).unwrap();
        assert!(identity_residual(&m, &inv) < 1e-15);
    }

    #[test]
    fn jet_inverse_differentiates_correctly() {
        // d/dz (1/(2+z)) = -1/4 at z = 0
        let s = JetSpace::shared(1, 2);
        let z = Jet::variable(&s, 2, 0, 0.0);
        let m = vec![vec![z.add_scalar(2.0)]];
        let (inv, _) = invert(&m).unwrap();
        assert!((inv[0][0].value() - 0.5).abs() < 1e-15);
        assert!((inv[0][0].derivative(&[1]) + 0.25).abs() < 1e-15);
        assert!((inv[0][0].derivative(&[2]) - 0.25).abs() < 1e-15);
    }
}
