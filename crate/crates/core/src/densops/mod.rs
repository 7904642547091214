//! Estimation geometry of dense density matrices.
//!
//! Everything here works on explicit matrices in a fixed basis: the spectral
//! form of a state, the Bures metric and symmetric logarithmic derivative
//! (SLD) built from it, pure-state shortcuts, and the quantum Chernoff
//! distance. [`ed`] builds the chain Hamiltonian on the full Fock space for
//! small `L` and serves as an independent oracle for the momentum-space code.

pub mod ed;
pub mod fock;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::optimize::golden_section_min;
use crate::scalar::{cst, re, to_f64, Real, C};

pub use ed::{ed_dhamiltonian, ed_hamiltonian, ed_oracle, ED_MAX_L};

pub type CMatrix<T> = DMatrix<C<T>>;
pub type CVector<T> = DVector<C<T>>;

/// Spectral sums skip eigenvalue pairs with `p_j + p_k` at or below this.
pub const NULL_SUPPORT: f64 = 1e-14;

fn density_tol<T: Real>() -> T {
    cst::<T>(1e-10).max(T::default_epsilon() * cst(1e3))
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen<T: Real>(m: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let n = m.nrows();
    // Symmetrize to protect the solver from roundoff asymmetry.
    let herm = (m + m.adjoint()) * re(cst::<T>(0.5));
    let eig = herm.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// A density matrix in spectral form: `rho = sum_j p_j |phi_j><phi_j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity<T: Real> {
    probs: Vec<T>,
    vecs: CMatrix<T>,
}

impl<T: Real> SpectralDensity<T> {
    /// Assemble from trusted parts (columns of `vecs` are the eigenvectors).
    pub fn from_parts(probs: Vec<T>, vecs: CMatrix<T>) -> Self {
        debug_assert_eq!(probs.len(), vecs.ncols());
        Self { probs, vecs }
    }

    /// Assemble and check normalization, positivity and orthonormality.
    pub fn new(probs: Vec<T>, vecs: CMatrix<T>) -> Result<Self> {
        if probs.len() != vecs.ncols() || vecs.nrows() != vecs.ncols() {
            return Err(Error::NotDensity(format!(
                "{} weights for a {}x{} eigenvector matrix",
                probs.len(),
                vecs.nrows(),
                vecs.ncols()
            )));
        }
        let s = Self { probs, vecs };
        s.validate()?;
        Ok(s)
    }

    /// Diagonalize a density matrix. Eigenvalues down to `-1e-10` are clamped to zero.
    pub fn from_matrix(rho: &CMatrix<T>) -> Result<Self> {
        if !rho.is_square() || rho.nrows() == 0 {
            return Err(Error::NotDensity(
                "matrix must be square and non-empty".into(),
            ));
        }
        let tol = density_tol::<T>();
        let asym = (rho - rho.adjoint()).norm();
        if asym > tol {
            return Err(Error::NotDensity(format!(
                "not Hermitian (|rho - rho^+| = {:e})",
                to_f64(asym)
            )));
        }
        let tr = rho.trace().re;
        if (tr - T::one()).abs() > tol {
            return Err(Error::NotDensity(format!("trace {} != 1", to_f64(tr))));
        }
        let (vals, vecs) = hermitian_eigen(rho);
        if let Some(&min) = vals.first() {
            if min < -tol {
                return Err(Error::NotDensity(format!(
                    "negative eigenvalue {:e}",
                    to_f64(min)
                )));
            }
        }
        let probs = vals.into_iter().map(|p| p.max(T::zero())).collect();
        Ok(Self { probs, vecs })
    }

    /// `|psi><psi|` for a normalized vector, completed to a full basis.
    pub fn pure(psi: &CVector<T>) -> Result<Self> {
        let norm = psi.norm();
        if (norm - T::one()).abs() > density_tol() {
            return Err(Error::NotDensity(format!(
                "state vector norm {} != 1",
                to_f64(norm)
            )));
        }
        Self::from_matrix(&(psi * psi.adjoint()))
    }

    /// `exp(-beta H) / Z` for a Hermitian `H`.
    pub fn thermal(h: &CMatrix<T>, beta: T) -> Result<Self> {
        if !(beta > T::zero()) {
            return Err(Error::InvalidParams("beta must be positive".into()));
        }
        let (e, vecs) = hermitian_eigen(h);
        let e0 = e[0];
        let w: Vec<T> = e.iter().map(|&x| (-(beta * (x - e0))).exp()).collect();
        let z: T = w.iter().copied().sum();
        Ok(Self {
            probs: w.into_iter().map(|x| x / z).collect(),
            vecs,
        })
    }

    /// Ground state of `H`; fails if the lowest level is degenerate.
    pub fn ground(h: &CMatrix<T>) -> Result<Self> {
        let (e, vecs) = hermitian_eigen(h);
        if e.len() > 1 {
            let gap = e[1] - e[0];
            if gap <= cst(1e-12) {
                return Err(Error::Degenerate { gap: to_f64(gap) });
            }
        }
        let mut probs = vec![T::zero(); e.len()];
        probs[0] = T::one();
        Ok(Self { probs, vecs })
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn vecs(&self) -> &CMatrix<T> {
        &self.vecs
    }

    pub fn dim(&self) -> usize {
        self.vecs.nrows()
    }

    pub fn to_matrix(&self) -> CMatrix<T> {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for (j, &p) in self.probs.iter().enumerate() {
            if p != T::zero() {
                let v = self.vecs.column(j);
                m += v * v.adjoint() * re(p);
            }
        }
        m
    }

    /// `<phi_j| op |phi_k>` for all `j, k`.
    pub fn in_eigenbasis(&self, op: &CMatrix<T>) -> CMatrix<T> {
        self.vecs.adjoint() * op * &self.vecs
    }

    pub fn validate(&self) -> Result<()> {
        let sum: T = self.probs.iter().copied().sum();
        let tol = cst::<T>(1e-12).max(T::default_epsilon() * cst(1e2));
        if (sum - T::one()).abs() > tol {
            return Err(Error::NotDensity(format!("weights sum to {}", to_f64(sum))));
        }
        if let Some(p) = self.probs.iter().find(|&&p| p < -density_tol::<T>()) {
            return Err(Error::NotDensity(format!(
                "negative weight {:e}",
                to_f64(*p)
            )));
        }
        let n = self.dim();
        let gram = self.vecs.adjoint() * &self.vecs;
        let dev = (gram - CMatrix::<T>::identity(n, n)).camax();
        if dev > density_tol() {
            return Err(Error::NotDensity(format!(
                "eigenvectors not orthonormal (deviation {:e})",
                to_f64(dev)
            )));
        }
        Ok(())
    }
}

/// Finite-difference scheme for `d rho / d lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FdScheme {
    #[default]
    Central,
    /// Two central differences at `h` and `h/2`, combined to cancel the `h^2` error.
    Richardson,
}

/// A one-parameter family of density matrices with a numerical derivative.
pub struct DerivativeFamily<'a, T: Real> {
    rho_at: Box<dyn Fn(T) -> Result<CMatrix<T>> + Send + Sync + 'a>,
    pub step: T,
    pub scheme: FdScheme,
}

impl<'a, T: Real> DerivativeFamily<'a, T> {
    /// Central differences with step `1e-5`.
    pub fn new<F>(rho_at: F) -> Self
    where
        F: Fn(T) -> Result<CMatrix<T>> + Send + Sync + 'a,
    {
        Self {
            rho_at: Box::new(rho_at),
            step: cst(1e-5),
            scheme: FdScheme::Central,
        }
    }

    pub fn with_step(mut self, step: T) -> Self {
        self.step = step;
        self
    }

    pub fn with_scheme(mut self, scheme: FdScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn density(&self, lambda: T) -> Result<CMatrix<T>> {
        (self.rho_at)(lambda)
    }

    fn central(&self, lambda: T, h: T) -> Result<CMatrix<T>> {
        let plus = self.density(lambda + h)?;
        let minus = self.density(lambda - h)?;
        Ok((plus - minus) * re(T::one() / (h + h)))
    }

    pub fn derivative(&self, lambda: T) -> Result<CMatrix<T>> {
        if !(self.step > T::zero()) {
            return Err(Error::InvalidParams(
                "finite-difference step must be positive".into(),
            ));
        }
        match self.scheme {
            FdScheme::Central => self.central(lambda, self.step),
            FdScheme::Richardson => {
                let coarse = self.central(lambda, self.step)?;
                let fine = self.central(lambda, self.step * cst(0.5))?;
                Ok((fine * re(cst::<T>(4.0)) - coarse) * re(T::one() / cst::<T>(3.0)))
            }
        }
    }
}

/// `g = 1/2 sum_jk |<phi_j|drho|phi_k>|^2 / (p_j + p_k)` from a state and its derivative.
pub fn bures_from_derivative<T: Real>(rho: &SpectralDensity<T>, drho: &CMatrix<T>) -> T {
    let m = rho.in_eigenbasis(drho);
    let p = rho.probs();
    let cut = cst::<T>(NULL_SUPPORT);
    let mut g = T::zero();
    for j in 0..p.len() {
        for k in 0..p.len() {
            let s = p[j] + p[k];
            if s > cut {
                g += m[(j, k)].norm_sqr() / s;
            }
        }
    }
    g * cst(0.5)
}

/// Bures metric of a family at `lambda`.
pub fn bures_metric<T: Real>(family: &DerivativeFamily<'_, T>, lambda: T) -> Result<T> {
    let rho = SpectralDensity::from_matrix(&family.density(lambda)?)?;
    let drho = family.derivative(lambda)?;
    Ok(bures_from_derivative(&rho, &drho))
}

/// SLD with elements `2 <phi_j|drho|phi_k> / (p_j + p_k)` in the eigenbasis,
/// zero where `p_j + p_k` vanishes, returned in the original basis.
pub fn sld_from_spectral<T: Real>(rho: &SpectralDensity<T>, drho: &CMatrix<T>) -> CMatrix<T> {
    let m = rho.in_eigenbasis(drho);
    let p = rho.probs();
    let cut = cst::<T>(NULL_SUPPORT);
    let n = p.len();
    let inner = CMatrix::from_fn(n, n, |j, k| {
        let s = p[j] + p[k];
        if s > cut {
            m[(j, k)] * re(cst::<T>(2.0) / s)
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    let v = rho.vecs();
    v * inner * v.adjoint()
}

/// `Tr[rho L^2]`.
pub fn qfi_from_sld<T: Real>(rho: &SpectralDensity<T>, sld: &CMatrix<T>) -> T {
    let v = rho.vecs();
    let mut acc = T::zero();
    for (j, &p) in rho.probs().iter().enumerate() {
        if p != T::zero() {
            acc += p * (sld * v.column(j)).norm_squared();
        }
    }
    acc
}

/// Frobenius norm of `drho - (rho L + L rho) / 2`.
pub fn lyapunov_residual<T: Real>(rho: &CMatrix<T>, drho: &CMatrix<T>, sld: &CMatrix<T>) -> T {
    let sym = (rho * sld + sld * rho) * re(cst::<T>(0.5));
    (drho - sym).norm()
}

/// `2 (|psi><dpsi| + |dpsi><psi|)`.
pub fn pure_sld<T: Real>(psi: &CVector<T>, dpsi: &CVector<T>) -> CMatrix<T> {
    (psi * dpsi.adjoint() + dpsi * psi.adjoint()) * re(cst::<T>(2.0))
}

/// Magnitude of the two nonzero eigenvalues of [`pure_sld`]:
/// `2 sqrt(<dpsi|dpsi> - |<psi|dpsi>|^2)`, i.e. `2 ds_B / d lambda`.
pub fn pure_sld_eigenvalue<T: Real>(psi: &CVector<T>, dpsi: &CVector<T>) -> T {
    let ov = psi.dotc(dpsi).norm_sqr();
    let var = (dpsi.norm_squared() - ov).max(T::zero());
    cst::<T>(2.0) * var.sqrt()
}

/// Ground-state QFI `4 sum_{n>0} |<0|dH|n>|^2 / (E_n - E_0)^2`.
pub fn pure_qfi_sum<T: Real>(hamiltonian: &CMatrix<T>, dh: &CMatrix<T>) -> Result<T> {
    let (e, v) = hermitian_eigen(hamiltonian);
    if e.len() < 2 {
        return Ok(T::zero());
    }
    let gap = e[1] - e[0];
    if gap <= cst(1e-12) {
        return Err(Error::Degenerate { gap: to_f64(gap) });
    }
    let g = v.column(0).into_owned();
    let row = (dh * &g).adjoint() * &v;
    let mut acc = T::zero();
    for n in 1..e.len() {
        let d = e[n] - e[0];
        acc += row[(0, n)].norm_sqr() / (d * d);
    }
    Ok(acc * cst(4.0))
}

/// `Q(s) = Tr[rho1^s rho2^(1-s)]` from the two spectral decompositions.
pub fn chernoff_trace<T: Real>(rho1: &SpectralDensity<T>, rho2: &SpectralDensity<T>, s: T) -> T {
    let overlap = rho1.vecs().adjoint() * rho2.vecs();
    let pw = |p: T, e: T| if p > T::zero() { p.powf(e) } else { T::zero() };
    let a: Vec<T> = rho1.probs().iter().map(|&p| pw(p, s)).collect();
    let b: Vec<T> = rho2.probs().iter().map(|&q| pw(q, T::one() - s)).collect();
    let mut acc = T::zero();
    for (i, &ai) in a.iter().enumerate() {
        if ai == T::zero() {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            acc += ai * bj * overlap[(i, j)].norm_sqr();
        }
    }
    acc
}

/// Quantum Chernoff distance `-log min_{s in [0,1]} Tr[rho1^s rho2^(1-s)]`.
pub fn chernoff_distance<T: Real>(
    rho1: &SpectralDensity<T>,
    rho2: &SpectralDensity<T>,
) -> Result<T> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::InvalidParams(format!(
            "states on different spaces ({} vs {})",
            rho1.dim(),
            rho2.dim()
        )));
    }
    let q = |s: T| chernoff_trace(rho1, rho2, s);
    let inner = golden_section_min(q, T::zero(), T::one(), cst(1e-10)).value;
    let qmin = inner.min(q(T::zero())).min(q(T::one()));
    Ok((-qmin.ln()).max(T::zero()))
}

/// QFI after the change of variables `lambda = f(lambda')`: `H (df/dlambda')^2`.
pub fn reparametrized_qfi<T: Real>(qfi_at_lambda: T, dfdlp: T) -> T {
    qfi_at_lambda * dfdlp * dfdlp
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn c(x: f64) -> C<f64> {
        Complex::new(x, 0.0)
    }

    fn qubit_rotation(t: f64) -> CMatrix<f64> {
        // Pure state rotating about y at unit rate: (cos t/2, sin t/2).
        let v = CVector::from_vec(vec![c((t / 2.0).cos()), c((t / 2.0).sin())]);
        &v * v.adjoint()
    }

    #[test]
    fn constant_family_has_zero_metric() {
        let rho = dmatrix![c(0.3), c(0.1); c(0.1), c(0.7)];
        let fam = DerivativeFamily::new(move |_| Ok(rho.clone()));
        assert!(bures_metric(&fam, 0.4).unwrap().abs() < 1e-20);
    }

    #[test]
    fn rotating_qubit_metric_is_quarter() {
        let fam = DerivativeFamily::new(|t| Ok(qubit_rotation(t)));
        let g = bures_metric(&fam, 0.3).unwrap();
        assert!((g - 0.25).abs() < 1e-9, "{g}");
        let rho = SpectralDensity::from_matrix(&qubit_rotation(0.3)).unwrap();
        let sld = sld_from_spectral(&rho, &fam.derivative(0.3).unwrap());
        assert!((qfi_from_sld(&rho, &sld) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn diagonal_qubit_sld() {
        let (p, q) = (0.3, 0.8);
        let rho =
            SpectralDensity::from_matrix(&dmatrix![c(p), c(0.0); c(0.0), c(1.0 - p)]).unwrap();
        let drho = dmatrix![c(q), c(0.0); c(0.0), c(-q)];
        let l = sld_from_spectral(&rho, &drho);
        assert!((l[(0, 0)].re - q / p).abs() < 1e-14);
        assert!((l[(1, 1)].re + q / (1.0 - p)).abs() < 1e-14);
        assert!(l[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn rejects_non_densities() {
        let bad_trace = dmatrix![c(0.5), c(0.0); c(0.0), c(0.4)];
        assert!(matches!(
            SpectralDensity::from_matrix(&bad_trace),
            Err(Error::NotDensity(_))
        ));
        let negative = dmatrix![c(1.2), c(0.0); c(0.0), c(-0.2)];
        assert!(SpectralDensity::from_matrix(&negative).is_err());
    }

    #[test]
    fn pure_phase_derivative_has_no_sld_weight() {
        let psi = CVector::from_vec(vec![c(0.6), Complex::new(0.0, 0.8)]);
        let dpsi = &psi * Complex::new(0.0, 1.7);
        assert!(pure_sld_eigenvalue(&psi, &dpsi) < 1e-12);
    }

    #[test]
    fn qubit_spinor_sld_eigenvalues() {
        // |psi> = (cos t, sin t), d/dt gives angle derivative 1/2 in Bloch units of t/2.
        let t: f64 = 0.4;
        let psi = CVector::from_vec(vec![c(t.cos()), c(t.sin())]);
        let dpsi = CVector::from_vec(vec![c(-0.5 * t.sin()), c(0.5 * t.cos())]);
        let lam = pure_sld_eigenvalue(&psi, &dpsi);
        assert!((lam - 1.0).abs() < 1e-14);
        let (vals, _) = hermitian_eigen(&pure_sld(&psi, &dpsi));
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn commuting_perturbation_has_zero_qfi() {
        let h = dmatrix![c(-1.0), c(0.0); c(0.0), c(2.0)];
        let dh = dmatrix![c(0.3), c(0.0); c(0.0), c(-5.0)];
        assert!(pure_qfi_sum(&h, &dh).unwrap().abs() < 1e-20);
    }

    #[test]
    fn rotated_two_level_qfi() {
        // H(l) = R(theta(l)) sigma_z R^T with theta = 0.7 l; QFI = 0.7^2.
        let h_at = |l: f64| {
            let th = 0.7 * l;
            dmatrix![c(-th.cos()), c(th.sin()); c(th.sin()), c(th.cos())]
        };
        let eps = 1e-6;
        let dh = (h_at(0.2 + eps) - h_at(0.2 - eps)) * c(0.5 / eps);
        let qfi = pure_qfi_sum(&h_at(0.2), &dh).unwrap();
        assert!((qfi - 0.49).abs() < 1e-8, "{qfi}");
    }

    #[test]
    fn degenerate_ground_state_rejected() {
        let h = CMatrix::<f64>::identity(3, 3);
        let dh = CMatrix::<f64>::zeros(3, 3);
        assert!(matches!(
            pure_qfi_sum(&h, &dh),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn chernoff_identical_states() {
        let rho = SpectralDensity::from_matrix(&dmatrix![c(0.3), c(0.1); c(0.1), c(0.7)]).unwrap();
        assert!(chernoff_distance(&rho, &rho).unwrap() < 1e-12);
    }

    #[test]
    fn chernoff_classical_limit() {
        let p = [0.2, 0.5, 0.3];
        let q = [0.6, 0.1, 0.3];
        let diag = |v: &[f64]| {
            SpectralDensity::from_matrix(&CMatrix::from_diagonal(&CVector::from_iterator(
                3,
                v.iter().map(|&x| c(x)),
            )))
            .unwrap()
        };
        let d = chernoff_distance(&diag(&p), &diag(&q)).unwrap();
        let brute = (0..=100_000)
            .map(|i| {
                let s = i as f64 / 100_000.0;
                p.iter()
                    .zip(&q)
                    .map(|(a, b)| a.powf(s) * b.powf(1.0 - s))
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((d + brute.ln()).abs() < 1e-9);
    }

    #[test]
    fn reparametrization_examples() {
        assert_eq!(reparametrized_qfi(3.5, -1.0), 3.5);
        assert_eq!(reparametrized_qfi(3.5, 0.0), 0.0);
        assert_eq!(reparametrized_qfi(0.25, 2.0), 1.0);
    }

    #[test]
    fn richardson_beats_central() {
        let fam = DerivativeFamily::new(|t| Ok(qubit_rotation(t))).with_step(1e-2);
        let exact = {
            let t: f64 = 0.3;
            dmatrix![c(-0.5 * t.sin()), c(0.5 * t.cos()); c(0.5 * t.cos()), c(0.5 * t.sin())]
        };
        let central = (fam.derivative(0.3).unwrap() - &exact).norm();
        let rich = (fam
            .with_scheme(FdScheme::Richardson)
            .derivative(0.3)
            .unwrap()
            - exact)
            .norm();
        assert!(rich < central * 1e-3);
    }
}
