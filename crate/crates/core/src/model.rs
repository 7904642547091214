//! The BCS-type tight-binding chain with pair creation.
//!
//! `H_J = -J sum_i (c_i^+ c_{i+1} + gamma c_i^+ c_{i+1}^+ + h.c.) - 2h sum_i n_i`
//! on a ring of `L` sites. In momentum space each pair `(k, -k)`, `0 < k < pi`,
//! spans a four dimensional block with ordered basis
//! `{|0>, c_k^+ c_{-k}^+|0>, c_k^+|0>, c_{-k}^+|0>}`. On the first two states the
//! block acts as `-eps_k tau^z + Delta_k tau^y` with levels `+-Lambda_k`; the two
//! singly occupied states have zero block energy.
//!
//! Energies and Gibbs weights use this quasi-spin normalization, i.e. the
//! thermal state is `exp(-beta H_J / 2) / Z`. The momenta `k = 0` and `k = pi`
//! are unpaired: their occupation carries energy `eps_q (n_q - 1/2)`.

use nalgebra::{Complex, DMatrix, Matrix2};
use serde::Serialize;

use crate::densops::SpectralDensity;
use crate::error::{Error, Result};
use crate::scalar::{cst, from_usize, Real, C};

/// Inverse temperature; `Infinite` selects the ground state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Beta<T> {
    Infinite,
    Finite(T),
}

impl<T: Real> Beta<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Beta::Infinite => None,
            Beta::Finite(b) => Some(b),
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Beta::Infinite)
    }
}

/// Couplings, size and temperature of the chain. `J` is the estimated parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams<T> {
    pub j: T,
    pub gamma: T,
    pub h: T,
    pub l: usize,
    pub beta: Beta<T>,
}

impl<T: Real> ModelParams<T> {
    pub fn new(j: T, gamma: T, h: T, l: usize, beta: Beta<T>) -> Result<Self> {
        let p = Self {
            j,
            gamma,
            h,
            l,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Ground-state parameters (`beta = infinity`).
    pub fn ground(j: T, gamma: T, h: T, l: usize) -> Result<Self> {
        Self::new(j, gamma, h, l, Beta::Infinite)
    }

    pub fn thermal(j: T, gamma: T, h: T, l: usize, beta: T) -> Result<Self> {
        Self::new(j, gamma, h, l, Beta::Finite(beta))
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 4 || self.l % 2 != 0 {
            return Err(Error::InvalidParams(format!(
                "L must be even and >= 4 (got {})",
                self.l
            )));
        }
        for (name, v) in [("J", self.j), ("gamma", self.gamma), ("h", self.h)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        if let Beta::Finite(b) = self.beta {
            if !(b > T::zero()) || !b.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "beta must be positive and finite or Infinite (got {b})"
                )));
            }
        }
        Ok(())
    }

    pub fn with_j(mut self, j: T) -> Self {
        self.j = j;
        self
    }

    pub fn with_h(mut self, h: T) -> Self {
        self.h = h;
        self
    }

    pub fn with_gamma(mut self, gamma: T) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_beta(mut self, beta: Beta<T>) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_l(mut self, l: usize) -> Self {
        self.l = l;
        self
    }

    /// Temperature `1/beta`, zero for the ground state.
    pub fn temperature(&self) -> T {
        match self.beta {
            Beta::Infinite => T::zero(),
            Beta::Finite(b) => T::one() / b,
        }
    }
}

/// `eps_k = -J cos k - h`. Near `k = 0` and `k = pi` it is evaluated through
/// half angles, so the cancellation at a gap closing (`h ~ J` at `pi`,
/// `h ~ -J` at `0`) only involves the inputs `J - h`, `J + h`.
pub fn dispersion<T: Real>(j: T, h: T, k: T) -> T {
    let half = k * cst(0.5);
    let ck = k.cos();
    if ck < cst(-0.5) {
        let c = half.cos();
        (j - h) - (j + j) * c * c
    } else if ck > cst(0.5) {
        let s = half.sin();
        -(j + h) + (j + j) * s * s
    } else {
        -j * ck - h
    }
}

/// Per-momentum data of one paired block, with `J`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode<T> {
    pub k: T,
    pub eps: T,
    pub delta: T,
    pub lam: T,
    /// Bogoliubov angle, `atan2(eps, delta)`.
    pub theta: T,
    pub d_eps: T,
    pub d_delta: T,
    /// `delta * d_eps - eps * d_delta`, which reduces to `-h gamma sin k`.
    pub wronskian: T,
}

impl<T: Real> Mode<T> {
    pub fn new(j: T, gamma: T, h: T, k: T) -> Self {
        let (s, c) = k.sin_cos();
        let eps = dispersion(j, h, k);
        let delta = -j * gamma * s;
        let lam = eps.hypot(delta);
        Self {
            k,
            eps,
            delta,
            lam,
            theta: eps.atan2(delta),
            d_eps: -c,
            d_delta: -gamma * s,
            wronskian: -h * gamma * s,
        }
    }

    pub fn for_params(p: &ModelParams<T>, k: T) -> Self {
        Self::new(p.j, p.gamma, p.h, k)
    }

    /// `d theta_k / dJ`.
    pub fn d_theta(&self) -> T {
        self.wronskian / (self.eps * self.eps + self.delta * self.delta)
    }

    /// `d Lambda_k / dJ`.
    pub fn d_lam(&self) -> T {
        (self.eps * self.d_eps + self.delta * self.d_delta) / self.lam
    }

    /// Bloch vector `(y, z)` of the block ground state.
    pub fn bloch(&self) -> (T, T) {
        (-self.delta / self.lam, self.eps / self.lam)
    }

    /// `d/dJ` of [`Mode::bloch`]; its norm is `|d theta_k / dJ|`.
    pub fn d_bloch(&self) -> (T, T) {
        let l3 = self.lam * self.lam * self.lam;
        (
            self.eps * self.wronskian / l3,
            self.delta * self.wronskian / l3,
        )
    }

    /// Angle `alpha` with `(eps, delta) = Lambda (cos alpha, sin alpha)`.
    pub(crate) fn alpha(&self) -> T {
        self.delta.atan2(self.eps)
    }
}

/// One of the momenta `0`, `pi` that have no partner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnpairedMode<T> {
    pub k: T,
    pub eps: T,
    pub d_eps: T,
}

impl<T: Real> UnpairedMode<T> {
    /// Thermal occupation `1 / (1 + e^{beta eps})`.
    pub fn occupation(&self, beta: T) -> T {
        fermi(beta * self.eps)
    }
}

/// `1 / (1 + e^x)` without overflow.
pub fn fermi<T: Real>(x: T) -> T {
    if x > T::zero() {
        let e = (-x).exp();
        e / (T::one() + e)
    } else {
        T::one() / (T::one() + x.exp())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumGrid<T> {
    /// Paired modes `k = 2 pi n / L`, `n = 1 .. L/2 - 1`, ascending.
    pub modes: Vec<Mode<T>>,
    /// `k = 0` and `k = pi`, in that order.
    pub unpaired: [UnpairedMode<T>; 2],
}

pub fn momentum_grid<T: Real>(p: &ModelParams<T>) -> Result<MomentumGrid<T>> {
    p.validate()?;
    let lf = from_usize::<T>(p.l);
    let modes = (1..p.l / 2)
        .map(|n| Mode::for_params(p, T::two_pi() * from_usize(n) / lf))
        .collect();
    let unpaired = [
        UnpairedMode {
            k: T::zero(),
            eps: -p.j - p.h,
            d_eps: -T::one(),
        },
        UnpairedMode {
            k: T::pi(),
            eps: p.j - p.h,
            d_eps: T::one(),
        },
    ];
    Ok(MomentumGrid { modes, unpaired })
}

/// `-eps tau^z + Delta tau^y` on `{|0>, c_k^+ c_{-k}^+|0>}`.
pub fn block_hamiltonian<T: Real>(mode: &Mode<T>) -> Matrix2<C<T>> {
    let z = T::zero();
    Matrix2::new(
        Complex::new(-mode.eps, z),
        Complex::new(z, -mode.delta),
        Complex::new(z, mode.delta),
        Complex::new(mode.eps, z),
    )
}

/// Gibbs weights of one paired block: ground, excited and each single state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairWeights<T> {
    pub ground: T,
    pub excited: T,
    pub single: T,
}

impl<T: Real> PairWeights<T> {
    /// Weights `e^{+-x}/Z`, `1/Z` with `Z = 2 + 2 cosh x`, `x = beta Lambda`.
    pub fn new(x: T) -> Self {
        let e = (-x).exp();
        let norm = (T::one() + e) * (T::one() + e);
        Self {
            ground: T::one() / norm,
            excited: e * e / norm,
            single: e / norm,
        }
    }

    pub fn ground_state() -> Self {
        Self {
            ground: T::one(),
            excited: T::zero(),
            single: T::zero(),
        }
    }

    pub fn for_beta(beta: Beta<T>, lam: T) -> Self {
        match beta {
            Beta::Infinite => Self::ground_state(),
            Beta::Finite(b) => Self::new(b * lam),
        }
    }
}

/// Block eigenvectors (columns: ground, excited, `c_k^+|0>`, `c_{-k}^+|0>`).
pub fn block_eigenvectors<T: Real>(mode: &Mode<T>) -> DMatrix<C<T>> {
    let half = mode.alpha() * cst(0.5);
    let (s, c) = half.sin_cos();
    let z = T::zero();
    let mut v = DMatrix::<C<T>>::zeros(4, 4);
    v[(0, 0)] = Complex::new(c, z);
    v[(1, 0)] = Complex::new(z, -s);
    v[(0, 1)] = Complex::new(z, -s);
    v[(1, 1)] = Complex::new(c, z);
    v[(2, 2)] = Complex::new(T::one(), z);
    v[(3, 3)] = Complex::new(T::one(), z);
    v
}

/// Exact ground or thermal state of one paired block on its 4-dim space.
pub fn block_state<T: Real>(p: &ModelParams<T>, mode: &Mode<T>) -> SpectralDensity<T> {
    let w = PairWeights::for_beta(p.beta, mode.lam);
    SpectralDensity::from_parts(
        vec![w.ground, w.excited, w.single, w.single],
        block_eigenvectors(mode),
    )
}

/// Ground energy of `H_J / 2`: `-sum_k Lambda_k - (|eps_0| + |eps_pi|) / 2`.
pub fn ground_energy<T: Real>(p: &ModelParams<T>) -> Result<T> {
    let g = momentum_grid(p)?;
    let paired: T = g.modes.iter().map(|m| m.lam).sum();
    let unpaired: T = g.unpaired.iter().map(|u| u.eps.abs()).sum();
    Ok(-paired - unpaired * cst(0.5))
}

/// `ln Z` of `exp(-beta H_J / 2)`: paired blocks contribute `ln(2 + 2 cosh beta Lambda_k)`,
/// unpaired momenta `ln(2 cosh(beta eps_q / 2))`.
pub fn log_partition<T: Real>(p: &ModelParams<T>) -> Result<T> {
    let beta = p
        .beta
        .finite()
        .ok_or_else(|| Error::Domain("partition function needs a finite temperature".into()))?;
    let g = momentum_grid(p)?;
    let two = cst::<T>(2.0);
    let paired: T = g
        .modes
        .iter()
        .map(|m| {
            let x = beta * m.lam;
            x + two * (-x).exp().ln_1p()
        })
        .sum();
    let unpaired: T = g
        .unpaired
        .iter()
        .map(|u| {
            let y = (beta * u.eps * cst(0.5)).abs();
            y + (-(y + y)).exp().ln_1p()
        })
        .sum();
    Ok(paired + unpaired)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn params(j: f64, g: f64, h: f64, l: usize) -> ModelParams<f64> {
        ModelParams::ground(j, g, h, l).unwrap()
    }

    #[test]
    fn rejects_bad_sizes_and_temperatures() {
        assert!(ModelParams::ground(1.0, 1.0, 0.5, 5).is_err());
        assert!(ModelParams::ground(1.0, 1.0, 0.5, 2).is_err());
        assert!(ModelParams::thermal(1.0, 1.0, 0.5, 6, 0.0).is_err());
        assert!(ModelParams::thermal(1.0, 1.0, 0.5, 6, -1.0).is_err());
        assert!(ModelParams::thermal(1.0, 1.0, 0.5, 6, 2.0).is_ok());
    }

    #[test]
    fn grid_l4_has_single_mode() {
        let g = momentum_grid(&params(1.0, 1.0, 0.3, 4)).unwrap();
        assert_eq!(g.modes.len(), 1);
        assert!(close(g.modes[0].k, std::f64::consts::FRAC_PI_2, 1e-15));
        assert_eq!(g.unpaired[0].k, 0.0);
        assert!(close(g.unpaired[1].k, std::f64::consts::PI, 0.0));
        assert!(close(g.unpaired[0].eps, -1.3, 1e-15));
        assert!(close(g.unpaired[1].eps, 0.7, 1e-15));
    }

    #[test]
    fn grid_l8_modes() {
        let g = momentum_grid(&params(1.0, 1.0, 0.3, 8)).unwrap();
        let ks: Vec<f64> = g.modes.iter().map(|m| m.k).collect();
        let pi = std::f64::consts::PI;
        for (k, e) in ks.iter().zip([pi / 4.0, pi / 2.0, 3.0 * pi / 4.0]) {
            assert!(close(*k, e, 1e-15));
        }
    }

    #[test]
    fn grid_l6_dispersion_values() {
        let g = momentum_grid(&params(1.0, 1.0, 0.0, 6)).unwrap();
        let m = g.modes[0];
        assert!(close(m.eps, -0.5, 1e-15));
        assert!(close(m.delta, -(3f64.sqrt()) / 2.0, 1e-15));
        assert!(close(m.lam, 1.0, 1e-15));
    }

    #[test]
    fn block_hamiltonian_examples() {
        let pi = std::f64::consts::PI;
        let m = Mode::new(1.0, 1.0, 1.0, pi);
        let hb = block_hamiltonian(&m);
        assert!(hb.iter().all(|z| z.norm() < 1e-15));

        let m = Mode::new(1.0, 0.5, 0.0, pi / 2.0);
        assert!(close(m.eps, 0.0, 1e-15));
        assert!(close(m.delta, -0.5, 1e-15));
        let eig = block_hamiltonian(&m).symmetric_eigen();
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert!(close(ev[0], -0.5, 1e-14) && close(ev[1], 0.5, 1e-14));
    }

    #[test]
    fn block_eigenvalues_are_plus_minus_lambda() {
        for &(j, g, h, k) in &[
            (1.0, 1.0, 0.3, 0.4),
            (0.7, 2.0, -1.1, 2.9),
            (1.3, 0.2, 1.3, 1.7),
        ] {
            let m = Mode::new(j, g, h, k);
            let eig = block_hamiltonian(&m).symmetric_eigen();
            let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            assert!(close(ev[0], -m.lam, 1e-13));
            assert!(close(ev[1], m.lam, 1e-13));
        }
    }

    #[test]
    fn analytic_ground_vector_is_lower_eigenvector() {
        let m = Mode::new(0.9, 1.4, 0.35, 2.2);
        let v = block_eigenvectors(&m);
        let hb = block_hamiltonian(&m);
        for (col, sign) in [(0usize, -1.0), (1, 1.0)] {
            let x = nalgebra::Vector2::new(v[(0, col)], v[(1, col)]);
            let hx = hb * x;
            for i in 0..2 {
                assert!((hx[i] - x[i] * Complex::new(sign * m.lam, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn thermal_weights_hand_values() {
        let w = PairWeights::<f64>::new(1.0);
        let z = 2.0 + 2.0 * 1f64.cosh();
        assert!(close(w.excited, (-1f64).exp() / z, 1e-15));
        assert!(close(w.ground, 1f64.exp() / z, 1e-15));
        assert!(close(w.single, 1.0 / z, 1e-15));
        assert!(close(w.excited, 0.0723, 1e-4));
        assert!(close(w.ground, 0.5344, 1e-4));
        assert!(close(w.single, 0.1966, 1e-4));
        let w0 = PairWeights::<f64>::new(1e-12);
        for x in [w0.ground, w0.excited, w0.single] {
            assert!(close(x, 0.25, 1e-11));
        }
    }

    #[test]
    fn ground_block_state_is_rank_one() {
        let p = params(1.0, 1.0, 0.4, 6);
        let m = momentum_grid(&p).unwrap().modes[1];
        let s = block_state(&p, &m);
        assert_eq!(s.probs(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn half_angle_dispersion_matches_direct_form() {
        for &(j, h) in &[(1.0, 1.0), (1.0, -1.0), (0.5, 0.2), (-1.2, 0.7)] {
            for i in 0..=64 {
                let k = std::f64::consts::PI * i as f64 / 64.0;
                let direct = -j * k.cos() - h;
                assert!(close(dispersion(j, h, k), direct, 1e-14));
            }
        }
    }

    #[test]
    fn mirror_symmetry_of_dispersion() {
        let pi = std::f64::consts::PI;
        for &(j, g, h) in &[(1.0, 1.0, 0.3), (0.8, 1.7, -0.6)] {
            for n in 1..10 {
                let k = pi * n as f64 / 10.0;
                let a = Mode::new(j, g, h, k);
                let b = Mode::new(j, g, -h, pi - k);
                assert!(close(a.eps.abs(), b.eps.abs(), 1e-14));
                assert!(close(a.lam, b.lam, 1e-14));
            }
        }
    }

    #[test]
    fn derivative_fields_match_finite_differences() {
        let (j, g, h, k) = (1.1, 0.7, 0.45, 1.3);
        let m = Mode::new(j, g, h, k);
        let d = 1e-6;
        let p = Mode::new(j + d, g, h, k);
        let q = Mode::new(j - d, g, h, k);
        assert!(close(m.d_theta(), (p.theta - q.theta) / (2.0 * d), 1e-8));
        assert!(close(m.d_lam(), (p.lam - q.lam) / (2.0 * d), 1e-8));
        let (dy, dz) = m.d_bloch();
        assert!(close(dy, (p.bloch().0 - q.bloch().0) / (2.0 * d), 1e-8));
        assert!(close(dz, (p.bloch().1 - q.bloch().1) / (2.0 * d), 1e-8));
        assert!(close(m.wronskian, -h * g * k.sin(), 1e-15));
    }

    #[test]
    fn works_in_single_precision() {
        let p = ModelParams::<f32>::ground(1.0, 1.0, 0.5, 8).unwrap();
        let g = momentum_grid(&p).unwrap();
        for m in &g.modes {
            assert!((m.lam * m.lam - (m.eps * m.eps + m.delta * m.delta)).abs() < 1e-5);
        }
    }
}
