//! Exact linear algebra over `Q` and small symbolic matrices.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::expr::{Expr, Q};

/// Rank by fraction-exact Gaussian elimination.
pub fn rank(rows: &[Vec<Q>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        let pivot: Vec<Q> = m[r].iter().map(|x| x * &inv).collect();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot).skip(c) {
                    *x -= &f * y;
                }
            }
        }
        m[r] = pivot;
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Determinant of a square rational matrix.
pub fn det(rows: &[Vec<Q>]) -> Q {
    let n = rows.len();
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            m.swap(c, p);
            d = -d;
        }
        d *= &m[c][c];
        let inv = m[c][c].recip();
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] * &inv;
            for j in c..n {
                let t = &f * &m[c][j];
                m[i][j] -= t;
            }
        }
    }
    d
}

pub type Mat3 = [[Expr; 3]; 3];

pub fn det3(m: &Mat3) -> Expr {
    let c = |a: usize, b: usize, c: usize, d: usize| &m[a][c] * &m[b][d] - &m[a][d] * &m[b][c];
    &m[0][0] * c(1, 2, 1, 2) - &m[0][1] * c(1, 2, 0, 2) + &m[0][2] * c(1, 2, 0, 1)
}

/// Symbolic inverse via the adjugate.
pub fn inverse3(m: &Mat3) -> Result<Mat3> {
    let d = det3(m);
    if d.is_zero() {
        return Err(Error::DegenerateMetric);
    }
    let inv_d = d.recip()?;
    let cof = |i: usize, j: usize| {
        let r: Vec<usize> = (0..3).filter(|&x| x != i).collect();
        let c: Vec<usize> = (0..3).filter(|&x| x != j).collect();
        let minor = &m[r[0]][c[0]] * &m[r[1]][c[1]] - &m[r[0]][c[1]] * &m[r[1]][c[0]];
        if (i + j).is_multiple_of(2) {
            minor
        } else {
            -minor
        }
    };
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| cof(j, i) * &inv_d)
    }))
}

pub fn mat_mul3(a: &Mat3, b: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| &a[i][k] * &b[k][j]).sum()))
}

pub fn identity3() -> Mat3 {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| if i == j { Expr::one() } else { Expr::zero() })
    })
}
