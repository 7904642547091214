//! Exact diagonalization of the chain on the full `2^L` Fock space.
//!
//! The Hamiltonian is assembled site by site with Jordan-Wigner signs and the
//! literal periodic identification `c_{L+1} = c_1`, independently of the
//! momentum-space reduction in [`crate::model`]. States are built from
//! `H_J / 2`, the normalization used throughout the crate.

use nalgebra::Complex;

use super::fock::QuadraticForm;
use super::{CMatrix, SpectralDensity};
use crate::error::{Error, Result};
use crate::model::{Beta, ModelParams};
use crate::scalar::{cst, re, Real};

pub const ED_MAX_L: usize = 8;

fn check_size<T: Real>(p: &ModelParams<T>) -> Result<()> {
    p.validate()?;
    if p.l > ED_MAX_L {
        return Err(Error::SizeLimit {
            l: p.l,
            max: ED_MAX_L,
        });
    }
    Ok(())
}

/// Real-space quadratic form of
/// `-J sum_i (c_i^+ c_{i+1} + gamma c_i^+ c_{i+1}^+ + h.c.) - 2h sum_i n_i`.
pub fn chain_form<T: Real>(j: T, gamma: T, h: T, l: usize) -> QuadraticForm<T> {
    let mut q = QuadraticForm::zeros(l);
    for i in 0..l {
        let n = (i + 1) % l;
        q.hopping[(i, n)] += re(-j);
        q.hopping[(n, i)] += re(-j);
        q.hopping[(i, i)] += re(-(h + h));
        q.pairing[(i, n)] += re(-j * gamma);
    }
    q
}

/// Dense `H_J` (literal normalization).
pub fn ed_hamiltonian<T: Real>(p: &ModelParams<T>) -> Result<CMatrix<T>> {
    check_size(p)?;
    chain_form(p.j, p.gamma, p.h, p.l).to_dense()
}

/// Dense `dH_J / dJ`.
pub fn ed_dhamiltonian<T: Real>(p: &ModelParams<T>) -> Result<CMatrix<T>> {
    check_size(p)?;
    chain_form(T::one(), p.gamma, T::zero(), p.l).to_dense()
}

/// Ground state or `exp(-beta H_J / 2) / Z` of the full chain.
pub fn ed_oracle<T: Real>(p: &ModelParams<T>) -> Result<SpectralDensity<T>> {
    let h = ed_hamiltonian(p)? * Complex::new(cst::<T>(0.5), T::zero());
    match p.beta {
        Beta::Infinite => SpectralDensity::ground(&h),
        Beta::Finite(b) => SpectralDensity::thermal(&h, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_limit_enforced() {
        let p = ModelParams::ground(1.0, 1.0, 0.5, 10).unwrap();
        assert!(matches!(
            ed_hamiltonian(&p),
            Err(Error::SizeLimit { l: 10, max: 8 })
        ));
    }

    #[test]
    fn thermal_state_has_unit_trace() {
        let p = ModelParams::thermal(1.0, 0.7, 0.4, 4, 1.5).unwrap();
        let rho = ed_oracle(&p).unwrap();
        let tr: f64 = rho.probs().iter().sum();
        assert!((tr - 1.0).abs() < 1e-13);
        assert!((rho.to_matrix().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_linear_in_j() {
        let p = ModelParams::ground(1.3, 0.6, 0.2, 4).unwrap();
        let h = ed_hamiltonian(&p).unwrap();
        let h0 = ed_hamiltonian(&p.with_j(0.0)).unwrap();
        let dh = ed_dhamiltonian(&p).unwrap();
        assert!((h - h0 - dh * Complex::new(1.3, 0.0)).norm() < 1e-12);
    }
}
