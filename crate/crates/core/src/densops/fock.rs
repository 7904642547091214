//! Spinless fermions on `L` sites in the occupation basis.
//!
//! Basis state `s` has site `i` occupied when bit `i` is set; operators carry
//! the Jordan-Wigner sign `(-1)^(number of occupied sites below i)`.

use nalgebra::Complex;

use crate::densops::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{re, Real, C};

/// Largest `L` for which dense Fock-space matrices are built.
pub const FOCK_MAX_L: usize = 12;

#[inline]
fn jw_negative(state: usize, i: usize) -> bool {
    (state & ((1usize << i) - 1)).count_ones() % 2 == 1
}

/// `c_i |state>` as `(sign is negative, new state)`.
#[inline]
pub fn annihilate(state: usize, i: usize) -> Option<(bool, usize)> {
    (state >> i & 1 == 1).then(|| (jw_negative(state, i), state ^ (1 << i)))
}

/// `c_i^+ |state>`.
#[inline]
pub fn create(state: usize, i: usize) -> Option<(bool, usize)> {
    (state >> i & 1 == 0).then(|| (jw_negative(state, i), state | (1 << i)))
}

/// `c_a^+ c_b |state>`.
pub fn hop(state: usize, a: usize, b: usize) -> Option<(bool, usize)> {
    let (s1, t) = annihilate(state, b)?;
    let (s2, u) = create(t, a)?;
    Some((s1 ^ s2, u))
}

/// `c_a^+ c_b^+ |state>`.
pub fn pair_create(state: usize, a: usize, b: usize) -> Option<(bool, usize)> {
    let (s1, t) = create(state, b)?;
    let (s2, u) = create(t, a)?;
    Some((s1 ^ s2, u))
}

/// `c_b c_a |state>`, the adjoint of [`pair_create`]`(a, b)`.
pub fn pair_annihilate(state: usize, a: usize, b: usize) -> Option<(bool, usize)> {
    let (s1, t) = annihilate(state, a)?;
    let (s2, u) = annihilate(t, b)?;
    Some((s1 ^ s2, u))
}

/// `constant + sum_ab A_ab c_a^+ c_b + sum_ab (B_ab c_a^+ c_b^+ + h.c.)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm<T: Real> {
    pub constant: T,
    pub hopping: CMatrix<T>,
    pub pairing: CMatrix<T>,
}

impl<T: Real> QuadraticForm<T> {
    pub fn zeros(l: usize) -> Self {
        Self {
            constant: T::zero(),
            hopping: CMatrix::zeros(l, l),
            pairing: CMatrix::zeros(l, l),
        }
    }

    pub fn sites(&self) -> usize {
        self.hopping.nrows()
    }

    /// Dense `2^L x 2^L` matrix.
    pub fn to_dense(&self) -> Result<CMatrix<T>> {
        let l = self.sites();
        if l > FOCK_MAX_L {
            return Err(Error::SizeLimit { l, max: FOCK_MAX_L });
        }
        let dim = 1usize << l;
        let mut m = CMatrix::<T>::identity(dim, dim) * re(self.constant);
        let zero = Complex::new(T::zero(), T::zero());
        let add = |m: &mut CMatrix<T>, col: usize, hit: Option<(bool, usize)>, coef: C<T>| {
            if let Some((neg, row)) = hit {
                m[(row, col)] += if neg { -coef } else { coef };
            }
        };
        for s in 0..dim {
            for a in 0..l {
                for b in 0..l {
                    let ha = self.hopping[(a, b)];
                    if ha != zero {
                        add(&mut m, s, hop(s, a, b), ha);
                    }
                    let pb = self.pairing[(a, b)];
                    if pb != zero {
                        add(&mut m, s, pair_create(s, a, b), pb);
                        add(&mut m, s, pair_annihilate(s, a, b), pb.conj());
                    }
                }
            }
        }
        Ok(m)
    }
}

/// Total number operator `N` on `L` sites (diagonal).
pub fn number_operator<T: Real>(l: usize) -> CMatrix<T> {
    let dim = 1usize << l;
    CMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            re(T::from_u32(r.count_ones()).unwrap_or_else(T::zero))
        } else {
            Complex::new(T::zero(), T::zero())
        }
    })
}
