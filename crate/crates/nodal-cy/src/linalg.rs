//! Gaussian elimination over the exact fields used by the crate.

use num_traits::{One, Zero};

use crate::scalars::{ExtScalar, FieldScalar, Rational};

pub trait Field: Clone + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Self;
}

impl Field for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        self.recip()
    }
}

macro_rules! field_impl {
    ($t:ty) => {
        impl Field for $t {
            fn zero() -> Self {
                <$t>::zero()
            }
            fn one() -> Self {
                <$t>::one()
            }
            fn is_zero(&self) -> bool {
                <$t>::is_zero(self)
            }
            fn add(&self, o: &Self) -> Self {
                self + o
            }
            fn sub(&self, o: &Self) -> Self {
                self - o
            }
            fn mul(&self, o: &Self) -> Self {
                self * o
            }
            fn neg(&self) -> Self {
                -self
            }
            fn inv(&self) -> Self {
                self.inverse()
            }
        }
    };
}

field_impl!(FieldScalar);
field_impl!(ExtScalar);

/// Reduced row echelon form in place; zero rows are dropped. Returns pivot columns.
pub fn rref<F: Field>(rows: &mut Vec<Vec<F>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&k| !rows[k][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].inv();
        if !inv.is_zero() {
            for x in rows[r].iter_mut().skip(c) {
                *x = x.mul(&inv);
            }
        }
        let pivot_row = rows[r].clone();
        for (k, row) in rows.iter_mut().enumerate() {
            if k == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for j in c..ncols {
                if !pivot_row[j].is_zero() {
                    row[j] = row[j].sub(&f.mul(&pivot_row[j]));
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank<F: Field>(rows: &[Vec<F>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Basis of {x : A x = 0} for A given by rows with `ncols` columns.
pub fn nullspace<F: Field>(rows: &[Vec<F>], ncols: usize) -> Vec<Vec<F>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![F::zero(); ncols];
            v[f] = F::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = m[r][f].neg();
            }
            v
        })
        .collect()
}
