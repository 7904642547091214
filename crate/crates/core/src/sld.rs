//! Symmetric logarithmic derivative of the chain with respect to `J`.
//!
//! The SLD is a direct sum over blocks. On the pair `(k, -k)` it reads
//! `b0_k + b^y_k tau^y_k + b^z_k tau^z_k`, where `tau^z_k = 1 - n_k - n_{-k}` and
//! `tau^y_k = i c_k^+ c_{-k}^+ + h.c.` (both vanish on the singly occupied
//! states). At zero temperature `b0_k = 0` and `(b^y, b^z)` is the
//! `J`-derivative of the ground-state Bloch vector. At finite temperature
//! the unpaired momenta contribute `a_q + c_q n_q`.
//!
//! In real space
//!
//! `L = scalar_term + identity_shift - sum_{lj} c_l^+ bz(l-j) c_j
//!      + 1/2 sum_{lj} (c_l^+ by(j-l) c_j^+ + h.c.)`
//!
//! with `bz(d) = (1/L) sum_k e^{-ikd} b^z_k` and the real sine kernel
//! `by(d) = (1/L) sum_k sin(kd) b^y_k`. The unpaired occupation terms are
//! folded into `bz` through `b^z_q = -c_q`.

use nalgebra::Complex;
use serde::Serialize;

use crate::densops::fock::QuadraticForm;
use crate::densops::{CMatrix, ED_MAX_L};
use crate::error::{Error, Result};
use crate::model::{fermi, momentum_grid, Beta, Mode, ModelParams};
use crate::regression::fit_line;
use crate::scalar::{cst, from_usize, re, tanh, to_f64, Real};

/// SLD term `a + c n_q` of an unpaired momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnpairedSld<T> {
    pub k: T,
    pub a: T,
    pub c: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SldOperator<T: Real> {
    pub l: usize,
    pub beta: Beta<T>,
    /// Paired momenta, ascending.
    pub ks: Vec<T>,
    pub by_k: Vec<T>,
    pub bz_k: Vec<T>,
    /// Identity component of each block (zero at `T = 0`).
    pub b0_k: Vec<T>,
    pub unpaired: [UnpairedSld<T>; 2],
    /// Real-space kernels indexed by `d = 0 .. L-1`; empty until [`sld_real_space`].
    pub by_d: Vec<T>,
    pub bz_d: Vec<T>,
    /// `L bz(0) / 2`.
    pub scalar_term: T,
    /// Remaining constant: block identities and unpaired offsets.
    pub identity_shift: T,
    pub dense: Option<CMatrix<T>>,
}

impl<T: Real> SldOperator<T> {
    /// Nonzero eigenvalue magnitude `sqrt(by^2 + bz^2)` of each block's traceless part.
    pub fn block_norms(&self) -> Vec<T> {
        self.by_k
            .iter()
            .zip(&self.bz_k)
            .map(|(&y, &z)| y.hypot(z))
            .collect()
    }

    /// 4x4 block operator on `{|0>, c_k^+ c_{-k}^+|0>, c_k^+|0>, c_{-k}^+|0>}`.
    pub fn block_matrix(&self, idx: usize) -> CMatrix<T> {
        block_operator(self.b0_k[idx], self.by_k[idx], self.bz_k[idx])
    }

    pub fn has_kernels(&self) -> bool {
        self.by_d.len() == self.l
    }
}

/// `b0 + by tau^y + bz tau^z` on the 4-dimensional block space.
pub fn block_operator<T: Real>(b0: T, by: T, bz: T) -> CMatrix<T> {
    let z = T::zero();
    let mut m = CMatrix::<T>::identity(4, 4) * re(b0);
    m[(0, 0)] += re(bz);
    m[(1, 1)] -= re(bz);
    m[(0, 1)] = Complex::new(z, -by);
    m[(1, 0)] = Complex::new(z, by);
    m
}

/// Block SLD coefficients `(b0, by, bz)` for one mode.
pub fn block_coefficients<T: Real>(m: &Mode<T>, beta: Beta<T>) -> (T, T, T) {
    if m.lam == T::zero() {
        return (T::zero(), T::zero(), T::zero());
    }
    let (dy, dz) = m.d_bloch();
    match beta {
        Beta::Infinite => (T::zero(), dy, dz),
        Beta::Finite(b) => {
            let x = b * m.lam;
            let dl = b * m.d_lam();
            let (my, mz) = m.bloch();
            let t = tanh(x);
            (-dl * tanh(x * cst(0.5)), t * dy + dl * my, t * dz + dl * mz)
        }
    }
}

/// Momentum-space SLD coefficients.
pub fn sld_momentum<T: Real>(p: &ModelParams<T>) -> Result<SldOperator<T>> {
    p.validate()?;
    if p.beta.is_infinite() && p.j == T::zero() {
        return Err(Error::InvalidParams(
            "zero-temperature SLD coefficients need J != 0".into(),
        ));
    }
    let grid = momentum_grid(p)?;
    let n = grid.modes.len();
    let (mut ks, mut by, mut bz, mut b0) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for m in &grid.modes {
        let (a, y, z) = block_coefficients(m, p.beta);
        ks.push(m.k);
        b0.push(a);
        by.push(y);
        bz.push(z);
    }
    let unpaired = grid.unpaired.map(|u| match p.beta {
        Beta::Infinite => UnpairedSld {
            k: u.k,
            a: T::zero(),
            c: T::zero(),
        },
        Beta::Finite(b) => {
            let p1 = fermi(b * u.eps);
            let g = b * u.d_eps;
            UnpairedSld {
                k: u.k,
                a: g * p1,
                c: -g,
            }
        }
    });
    Ok(SldOperator {
        l: p.l,
        beta: p.beta,
        ks,
        by_k: by,
        bz_k: bz,
        b0_k: b0,
        unpaired,
        by_d: Vec::new(),
        bz_d: Vec::new(),
        scalar_term: T::zero(),
        identity_shift: T::zero(),
        dense: None,
    })
}

/// Fill the real-space kernels by a discrete transform over the full zone.
pub fn sld_real_space<T: Real>(mut op: SldOperator<T>) -> Result<SldOperator<T>> {
    let l = op.l;
    if op.ks.len() + 1 != l / 2 {
        return Err(Error::Consistency(format!(
            "{} paired modes for L = {l}",
            op.ks.len()
        )));
    }
    let lf = from_usize::<T>(l);
    let (cos_t, sin_t): (Vec<T>, Vec<T>) = (0..l)
        .map(|i| {
            let a = T::two_pi() * from_usize(i) / lf;
            (a.cos(), a.sin())
        })
        .unzip();
    // Full-zone coefficients indexed by n (k = 2 pi n / L, n mod L).
    let mut bz_full = vec![T::zero(); l];
    let mut by_full = vec![T::zero(); l];
    for (i, (&y, &z)) in op.by_k.iter().zip(&op.bz_k).enumerate() {
        let n = i + 1;
        bz_full[n] = z;
        bz_full[l - n] = z;
        by_full[n] = y;
        by_full[l - n] = -y;
    }
    bz_full[0] = -op.unpaired[0].c;
    bz_full[l / 2] = -op.unpaired[1].c;

    let scale = bz_full
        .iter()
        .chain(&by_full)
        .fold(T::zero(), |a, &b| a.max(b.abs()));
    let tol = cst::<T>(1e-12).max(T::default_epsilon() * cst(64.0)) * scale.max(T::one());
    let mut bz_d = vec![T::zero(); l];
    let mut by_d = vec![T::zero(); l];
    for d in 0..l {
        let (mut zr, mut zi, mut yr, mut yi) = (T::zero(), T::zero(), T::zero(), T::zero());
        for n in 0..l {
            let idx = (n * d) % l;
            // e^{-ikd} = cos - i sin
            zr += bz_full[n] * cos_t[idx];
            zi -= bz_full[n] * sin_t[idx];
            yr += by_full[n] * cos_t[idx];
            yi += by_full[n] * sin_t[idx];
        }
        if zi.abs() > tol * lf || yr.abs() > tol * lf {
            return Err(Error::Consistency(format!(
                "kernel parity violated at d = {d} (Im bz = {:e}, Re by = {:e})",
                to_f64(zi / lf),
                to_f64(yr / lf)
            )));
        }
        bz_d[d] = zr / lf;
        by_d[d] = yi / lf;
    }
    op.scalar_term = bz_d[0] * lf * cst(0.5);
    let half_c: T = op.unpaired.iter().map(|u| u.a + u.c * cst(0.5)).sum();
    op.identity_shift = op.b0_k.iter().copied().sum::<T>() + half_c;
    op.by_d = by_d;
    op.bz_d = bz_d;
    Ok(op)
}

/// Real-space quadratic form of the SLD (kernels must be filled).
pub fn sld_quadratic_form<T: Real>(op: &SldOperator<T>) -> Result<QuadraticForm<T>> {
    if !op.has_kernels() {
        return Err(Error::Consistency("real-space kernels not computed".into()));
    }
    let l = op.l;
    let mut q = QuadraticForm::zeros(l);
    q.constant = op.scalar_term + op.identity_shift;
    let half = cst::<T>(0.5);
    for a in 0..l {
        for b in 0..l {
            q.hopping[(a, b)] = re(-op.bz_d[(a + l - b) % l]);
            q.pairing[(a, b)] = re(op.by_d[(b + l - a) % l] * half);
        }
    }
    Ok(q)
}

/// Dense `2^L` SLD. Fills the kernels first if needed and stores the matrix in `op.dense`.
pub fn sld_dense<T: Real>(op: &mut SldOperator<T>) -> Result<CMatrix<T>> {
    if op.l > ED_MAX_L {
        return Err(Error::SizeLimit {
            l: op.l,
            max: ED_MAX_L,
        });
    }
    if !op.has_kernels() {
        *op = sld_real_space(op.clone())?;
    }
    let m = sld_quadratic_form(op)?.to_dense()?;
    op.dense = Some(m.clone());
    Ok(m)
}

/// Momentum coefficients, kernels and dense matrix in one call.
pub fn sld_full<T: Real>(p: &ModelParams<T>) -> Result<SldOperator<T>> {
    let mut op = sld_real_space(sld_momentum(p)?)?;
    if p.l <= ED_MAX_L {
        sld_dense(&mut op)?;
    }
    Ok(op)
}

fn l4_prefactor<T: Real>(p: &ModelParams<T>) -> T {
    let lam2 = p.h * p.h + p.gamma * p.gamma * p.j * p.j;
    p.h * p.gamma / (lam2 * lam2.sqrt())
}

fn l4_common<T: Real>(p: &ModelParams<T>) -> QuadraticForm<T> {
    let jg = p.j * p.gamma;
    let half = cst::<T>(0.5);
    let mut q = QuadraticForm::zeros(4);
    q.constant = jg;
    for i in 0..4 {
        q.hopping[(i, i)] = re(-jg * half);
    }
    for (a, b) in [(0, 2), (2, 0), (1, 3), (3, 1)] {
        q.hopping[(a, b)] = re(jg * half);
    }
    q
}

/// The four-site operator
/// `hg/(h^2+g^2J^2)^{3/2} {Jg - JgN/2 + (Jg/2)(c1+c3 + c2+c4 + h.c.) + h(c1+c2+ - c1+c4+ + h.c.)}`
/// exactly as it is usually written.
pub fn sld_l4_quoted<T: Real>(p: &ModelParams<T>) -> Result<CMatrix<T>> {
    let mut q = l4_common(p);
    q.pairing[(0, 1)] = re(p.h);
    q.pairing[(0, 3)] = re(-p.h);
    Ok(q.to_dense()? * re(l4_prefactor(p)))
}

/// Four-site operator with the translation-invariant pairing `(h/2) sum_l (c_l^+ c_{l+1}^+ + h.c.)`.
pub fn sld_l4_symmetric<T: Real>(p: &ModelParams<T>) -> Result<CMatrix<T>> {
    let mut q = l4_common(p);
    for l in 0..4 {
        q.pairing[(l, (l + 1) % 4)] = re(p.h * cst(0.5));
    }
    Ok(q.to_dense()? * re(l4_prefactor(p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    Exponential,
    Algebraic,
}

/// Outcome of [`decay_classify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decay<T> {
    pub class: DecayClass,
    /// Decay length `xi` for exponential decay, exponent for algebraic decay.
    pub exponent_or_xi: T,
    pub fit_window: (usize, usize),
    /// Mean squared residual of the chosen fit.
    pub residual: T,
    /// Mean squared residual of the rejected fit.
    pub other_residual: T,
    pub points: usize,
}

/// Default fit window `[4, L/4]`.
pub fn default_window(l: usize) -> (usize, usize) {
    (4, l / 4)
}

/// Classify the decay of `|kernel(d)|` on `window` by comparing a fit of
/// `log|b|` linear in `d` against one linear in `log d`.
///
/// Points below `1e-12` of the kernel maximum are treated as numerical zeros.
pub fn classify_kernel<T: Real>(kernel: &[T], window: (usize, usize)) -> Result<Decay<T>> {
    let max = kernel.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    if max == T::zero() {
        return Err(Error::NullKernel);
    }
    let floor = max * cst(1e-12);
    let (lo, hi) = (
        window.0.max(1),
        window.1.min(kernel.len().saturating_sub(1)),
    );
    let mut ds = Vec::new();
    let mut ys = Vec::new();
    for d in lo..=hi {
        let v = kernel[d].abs();
        if v > floor {
            ds.push(from_usize::<T>(d));
            ys.push(v.ln());
        }
    }
    if ds.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "only {} kernel points above the noise floor in [{lo}, {hi}]",
            ds.len()
        )));
    }
    let n = from_usize::<T>(ds.len());
    let exp_fit = fit_line(&ds, &ys)?;
    let logs: Vec<T> = ds.iter().map(|d| d.ln()).collect();
    let alg_fit = fit_line(&logs, &ys)?;
    let (re_, ra) = (exp_fit.ssr / n, alg_fit.ssr / n);
    let decay = if re_ < ra {
        Decay {
            class: DecayClass::Exponential,
            exponent_or_xi: -T::one() / exp_fit.slope,
            fit_window: (lo, hi),
            residual: re_,
            other_residual: ra,
            points: ds.len(),
        }
    } else {
        Decay {
            class: DecayClass::Algebraic,
            exponent_or_xi: -alg_fit.slope,
            fit_window: (lo, hi),
            residual: ra,
            other_residual: re_,
            points: ds.len(),
        }
    };
    Ok(decay)
}

/// Classify the pairing kernel `by(d)` of an operator with filled kernels.
pub fn decay_classify<T: Real>(op: &SldOperator<T>, window: (usize, usize)) -> Result<Decay<T>> {
    if !op.has_kernels() {
        return Err(Error::Consistency("real-space kernels not computed".into()));
    }
    classify_kernel(&op.by_d, window)
}

#[cfg(test)]
mod tests {
    use super::*;

    type ModelParams = crate::model::ModelParams<f64>;
    use crate::densops::sld_from_spectral;
    use crate::model::{block_eigenvectors, block_state};

    #[test]
    fn zero_field_zero_coefficients() {
        let p = ModelParams::ground(1.0, 1.0, 0.0, 16).unwrap();
        let op = sld_real_space(sld_momentum(&p).unwrap()).unwrap();
        assert!(op.by_k.iter().chain(&op.bz_k).all(|&b| b == 0.0));
        assert!(op.by_d.iter().chain(&op.bz_d).all(|&b| b.abs() < 1e-15));
    }

    #[test]
    fn hand_value_at_quarter_zone() {
        let p = ModelParams::ground(1.0, 1.0, 1.0, 4).unwrap();
        let op = sld_momentum(&p).unwrap();
        let expect = 1.0 / (2.0 * 2f64.sqrt());
        assert!((op.by_k[0] - expect).abs() < 1e-15);
        assert!((op.bz_k[0] - expect).abs() < 1e-15);
    }

    #[test]
    fn explicit_form_of_coefficients() {
        let p = ModelParams::ground(1.3, 0.7, 0.9, 20).unwrap();
        let op = sld_momentum(&p).unwrap();
        for (i, m) in momentum_grid(&p).unwrap().modes.iter().enumerate() {
            let l3 = m.lam.powi(3);
            assert!((op.by_k[i] - p.h / p.j * m.delta * m.eps / l3).abs() < 1e-13);
            assert!((op.bz_k[i] - p.h / p.j * m.delta * m.delta / l3).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_j_rejected_at_zero_temperature() {
        let p = ModelParams::ground(0.0, 1.0, 0.5, 8).unwrap();
        assert!(matches!(sld_momentum(&p), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn finite_temperature_blocks_match_spectral_sld() {
        let p = ModelParams::thermal(0.9, 1.3, 0.6, 10, 1.7).unwrap();
        let op = sld_momentum(&p).unwrap();
        let d = 1e-6;
        for (i, m) in momentum_grid(&p).unwrap().modes.iter().enumerate() {
            let rho = block_state(&p, m);
            let at = |j: f64| {
                let mm = Mode::new(j, p.gamma, p.h, m.k);
                block_state(&p.with_j(j), &mm).to_matrix()
            };
            let drho = (at(p.j + d) - at(p.j - d)) * re(0.5 / d);
            let spectral = sld_from_spectral(&rho, &drho);
            assert!((spectral - op.block_matrix(i)).norm() < 1e-7);
        }
    }

    #[test]
    fn kernels_are_even_and_odd() {
        let p = ModelParams::thermal(1.0, 1.0, 0.8, 32, 4.0).unwrap();
        let op = sld_real_space(sld_momentum(&p).unwrap()).unwrap();
        for d in 1..32 {
            assert!((op.bz_d[d] - op.bz_d[32 - d]).abs() < 1e-14);
            assert!((op.by_d[d] + op.by_d[32 - d]).abs() < 1e-14);
        }
    }

    #[test]
    fn dense_operator_is_hermitian() {
        let p = ModelParams::thermal(1.0, 0.6, 0.4, 6, 2.0).unwrap();
        let mut op = sld_momentum(&p).unwrap();
        let m = sld_dense(&mut op).unwrap();
        assert!((&m - m.adjoint()).norm() < 1e-12);
        assert!(op.dense.is_some());
    }

    #[test]
    fn symmetric_l4_form_matches_construction() {
        let p = ModelParams::ground(1.2, 0.8, 0.7, 4).unwrap();
        let mut op = sld_momentum(&p).unwrap();
        let dense = sld_dense(&mut op).unwrap();
        let closed = sld_l4_symmetric(&p).unwrap();
        assert!((dense - closed).camax() < 1e-12);
    }

    #[test]
    fn classify_synthetic_kernels() {
        let exp: Vec<f64> = (0..256).map(|d| (-(d as f64) / 3.0).exp()).collect();
        let c = classify_kernel(&exp, (4, 64)).unwrap();
        assert_eq!(c.class, DecayClass::Exponential);
        assert!((c.exponent_or_xi - 3.0).abs() < 1e-9);
        let alg: Vec<f64> = (0..256)
            .map(|d| 1.0 / (d as f64).max(1.0).powf(1.5))
            .collect();
        let c = classify_kernel(&alg, (4, 64)).unwrap();
        assert_eq!(c.class, DecayClass::Algebraic);
        assert!((c.exponent_or_xi - 1.5).abs() < 1e-9);
        assert!(matches!(
            classify_kernel(&[0.0; 16], (4, 8)),
            Err(Error::NullKernel)
        ));
    }

    #[test]
    fn ground_vector_has_zero_mean_sld() {
        let m = Mode::new(1.0, 1.0, 0.7, 1.1);
        let (_, by, bz) = block_coefficients(&m, Beta::Infinite);
        let v = block_eigenvectors(&m);
        let g = v.column(0).into_owned();
        let lg = block_operator(0.0, by, bz) * &g;
        // <g| L |g> = 0 since b is orthogonal to the Bloch vector.
        assert!(g.dotc(&lg).norm() < 1e-14);
    }
}
