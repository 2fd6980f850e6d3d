//! Exact integer and rational linear algebra for lattice points and
//! simplicial cones. No floating point anywhere in this crate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub mod lp;

pub use lp::{lp_feasible, Constraint, Rel};

/// An exact integer vector in the cocharacter lattice N = Z^d.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticePoint(pub Vec<BigInt>);

impl LatticePoint {
    pub fn from_i64(coords: &[i64]) -> Self {
        LatticePoint(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(dim: usize) -> Self {
        LatticePoint(vec![BigInt::zero(); dim])
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![BigInt::zero(); dim];
        v[i] = BigInt::one();
        LatticePoint(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self) -> LatticePoint {
        LatticePoint(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, k: &BigInt) -> LatticePoint {
        LatticePoint(self.0.iter().map(|a| a * k).collect())
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a LatticePoint>>(
        dim: usize,
        points: I,
    ) -> LatticePoint {
        points
            .into_iter()
            .fold(LatticePoint::zero(dim), |acc, p| acc.add(p))
    }
}

/// Exact determinant of the d x d integer matrix whose rows are `vectors`,
/// by fraction-free (Bareiss) elimination.
pub fn det(vectors: &[LatticePoint]) -> Result<BigInt> {
    let d = vectors.len();
    if d == 0 || vectors.iter().any(|v| v.dim() != d) {
        let got = format!(
            "{} vectors of lengths {:?}",
            d,
            vectors.iter().map(|v| v.dim()).collect::<Vec<_>>()
        );
        return Err(Error::Shape {
            expected: if d == 0 { 1 } else { vectors[0].dim() },
            got,
        });
    }
    let mut m: Vec<Vec<BigInt>> = vectors.iter().map(|v| v.0.clone()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..d {
        if m[k][k].is_zero() {
            let pivot = (k + 1..d).find(|&r| !m[r][k].is_zero());
            match pivot {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..d {
            for j in k + 1..d {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev; // exact by Bareiss
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    Ok(sign * m[d - 1][d - 1].clone())
}

/// Exact nonnegative coordinates of `target` in the simplicial cone spanned by
/// `cone_gens`, or `None` if the target lies outside the cone (including
/// outside its linear span).
///
/// Errors with `NotSimplicial` when the generators are linearly dependent.
pub fn solve_nonneg(
    cone_gens: &[LatticePoint],
    target: &LatticePoint,
) -> Result<Option<Vec<BigRational>>> {
    match solve_in_span(cone_gens, target)? {
        Some(coeffs) if coeffs.iter().all(|c| !c.is_negative()) => Ok(Some(coeffs)),
        _ => Ok(None),
    }
}

/// Unique coordinates of `target` in the span of the (independent) generators,
/// or `None` if the target is outside the span. Signs are not restricted.
pub fn solve_in_span(
    cone_gens: &[LatticePoint],
    target: &LatticePoint,
) -> Result<Option<Vec<BigRational>>> {
    let m = cone_gens.len();
    if m == 0 {
        return Ok(if target.is_zero() { Some(vec![]) } else { None });
    }
    let d = cone_gens[0].dim();
    if cone_gens.iter().any(|g| g.dim() != d) || target.dim() != d {
        return Err(Error::Shape {
            expected: d,
            got: "mismatched vector lengths".into(),
        });
    }
    // Augmented d x (m+1) system over Q, columns are generators.
    let mut a: Vec<Vec<BigRational>> = (0..d)
        .map(|row| {
            let mut r: Vec<BigRational> = cone_gens
                .iter()
                .map(|g| BigRational::from(g.0[row].clone()))
                .collect();
            r.push(BigRational::from(target.0[row].clone()));
            r
        })
        .collect();

    let mut pivot_rows: Vec<usize> = Vec::with_capacity(m);
    let mut row = 0;
    for col in 0..m {
        let pivot = (row..d).find(|&r| !a[r][col].is_zero());
        let Some(p) = pivot else {
            return Err(Error::NotSimplicial);
        };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for j in col..=m {
            a[row][j] = &a[row][j] * &inv;
        }
        for r in 0..d {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in col..=m {
                    a[r][j] = &a[r][j] - &f * &a[row][j];
                }
            }
        }
        pivot_rows.push(row);
        row += 1;
    }
    // Consistency: remaining rows must have zero rhs.
    for r in row..d {
        if !a[r][m].is_zero() {
            return Ok(None);
        }
    }
    Ok(Some((0..m).map(|i| a[pivot_rows[i]][m].clone()).collect()))
}

/// True iff `target` has strictly positive coordinates on every generator.
pub fn in_relative_interior(cone_gens: &[LatticePoint], target: &LatticePoint) -> Result<bool> {
    Ok(match solve_nonneg(cone_gens, target)? {
        Some(coeffs) => coeffs.iter().all(|c| c.is_positive()),
        None => false,
    })
}
