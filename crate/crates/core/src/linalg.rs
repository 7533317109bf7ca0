//! Dense exact linear algebra over ℚ.
//!
//! Matrices are row-major `Vec<Vec<Rational>>`. Everything here is exact;
//! there are no pivot tolerances.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::rational::Rational;

pub type Matrix = Vec<Vec<Rational>>;

/// Reduced row-echelon form together with the pivot column of each nonzero row.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub rows: Matrix,
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Gauss-Jordan elimination with first-nonzero pivoting, column by column.
pub fn rref(m: &[Vec<Rational>], ncols: usize) -> Echelon {
    let mut a: Matrix = m.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = Rational::one() / &a[r][c];
        for x in a[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let factor = a[i][c].clone();
                for j in c..ncols {
                    let delta = &factor * &a[r][j];
                    a[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(pivots.len());
    Echelon { rows: a, pivots }
}

pub fn rank(m: &[Vec<Rational>], ncols: usize) -> usize {
    rref(m, ncols).rank()
}

pub fn transpose(m: &[Vec<Rational>], ncols: usize) -> Matrix {
    (0..ncols)
        .map(|c| m.iter().map(|row| row[c].clone()).collect())
        .collect()
}

/// Basis of the right null space `{x : M x = 0}`.
pub fn kernel(m: &[Vec<Rational>], ncols: usize) -> Matrix {
    let e = rref(m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !e.pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (row, &p) in e.rows.iter().zip(&e.pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Basis of the left null space `{y : yᵀ M = 0}`.
pub fn left_kernel(m: &[Vec<Rational>], ncols: usize) -> Matrix {
    kernel(&transpose(m, ncols), m.len())
}

/// Coefficients `c` with `Σ c_i rows_i = target`, if any exist.
pub fn solve_combination(rows: &[Vec<Rational>], target: &[Rational]) -> Option<Vec<Rational>> {
    let n = rows.len();
    let dim = target.len();
    // augmented system: columns are the given rows
    let aug: Matrix = (0..dim)
        .map(|j| {
            let mut line: Vec<Rational> = rows.iter().map(|r| r[j].clone()).collect();
            line.push(target[j].clone());
            line
        })
        .collect();
    let e = rref(&aug, n + 1);
    if e.pivots.last() == Some(&n) {
        return None;
    }
    let mut c = vec![Rational::zero(); n];
    for (row, &p) in e.rows.iter().zip(&e.pivots) {
        c[p] = row[n].clone();
    }
    Some(c)
}

/// Walks `rows` in order and keeps each one that raises the rank.
pub fn greedy_independent(rows: &[Vec<Rational>], ncols: usize) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    let mut basis: Matrix = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        basis.push(row.clone());
        if rank(&basis, ncols) == basis.len() {
            kept.push(i);
        } else {
            basis.pop();
        }
    }
    kept
}

/// Determinant by Bareiss fraction-free elimination.
///
/// Rows are first scaled to integers; the scale factors are divided out at
/// the end.
pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    if n == 0 {
        return Rational::one();
    }
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            let l = row
                .iter()
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            scale *= &l;
            row.iter()
                .map(|x| x.numer() * (&l / x.denom()))
                .collect()
        })
        .collect();
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(p) => {
                    a.swap(k, p);
                    sign = -sign;
                }
                None => return Rational::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone() * BigInt::from(sign);
    Rational::new(det, scale)
}

pub fn mat_mul_i64(a: &[Vec<i64>], b: &[Vec<i64>], inner: usize, ncols: usize) -> Vec<Vec<i64>> {
    a.iter()
        .map(|row| {
            (0..ncols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}
