//! Monte Carlo estimation of `J` with SLD measurements.
//!
//! Each copy of the chain is measured mode by mode in the eigenbasis of the
//! block SLD built at a reference coupling `J0`. A paired block has outcomes
//! `+` and `-` on the pair subspace and, at finite temperature, the two singly
//! occupied states; an unpaired momentum is measured in its occupation. The
//! outcome tables as functions of the true `J` form the likelihood.
//!
//! Random draws are keyed by `(seed, measured mode, copy)`: each mode reads its
//! own ChaCha stream and copy `c` uses the `c`-th 64-bit word of that stream,
//! so results do not depend on how work is split across threads.

mod sampling;

use rayon::prelude::*;
use serde::Serialize;

pub use sampling::{sample_copies, sample_run, SampleCounts};

use crate::error::{Error, Result};
use crate::model::{momentum_grid, Beta, Mode, ModelParams, PairWeights, UnpairedMode};
use crate::optimize::grid_golden_max;
use crate::qfi::qfi_exact;
use crate::scalar::{cst, from_usize, to_f64, Real};
use crate::sld::block_coefficients;

/// Cells of the coarse likelihood grid.
pub const ML_GRID_CELLS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    /// `[+, -]` at zero temperature, `[+, -, c_k^+|0>, c_{-k}^+|0>]` otherwise.
    Paired,
    /// `[empty, occupied]`.
    Unpaired,
}

/// Born-rule probabilities of one mode's measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeTable<T> {
    pub k: T,
    pub kind: OutcomeKind,
    pub probs: Vec<T>,
    /// `false` when the reference SLD vanishes on this mode; the table is then uniform.
    pub informative: bool,
}

/// Measurement direction fixed by the reference SLD of one paired block.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Axis<T> {
    k: T,
    /// Unit vector `(y, z)` along the traceless SLD part, `None` if it vanishes.
    dir: Option<(T, T)>,
}

/// The measurement defined by `J0` together with the fixed couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementModel<T: Real> {
    pub base: ModelParams<T>,
    pub reference_j0: T,
    axes: Vec<Axis<T>>,
}

impl<T: Real> MeasurementModel<T> {
    pub fn new(base: &ModelParams<T>, reference_j0: T) -> Result<Self> {
        let rp = base.with_j(reference_j0);
        let grid = momentum_grid(&rp)?;
        let axes = grid
            .modes
            .iter()
            .map(|m| {
                let (_, by, bz) = block_coefficients(m, rp.beta);
                let n = by.hypot(bz);
                let dir = (n > T::default_epsilon() * cst(16.0)).then(|| (by / n, bz / n));
                Axis { k: m.k, dir }
            })
            .collect();
        Ok(Self {
            base: *base,
            reference_j0,
            axes,
        })
    }

    /// Number of measured modes: paired blocks, plus the unpaired momenta at finite temperature.
    pub fn measured_modes(&self) -> usize {
        self.axes.len() + if self.base.beta.is_infinite() { 0 } else { 2 }
    }

    /// Outcome tables for the state at coupling `j`, in measured-mode order.
    pub fn tables(&self, j: T) -> Vec<OutcomeTable<T>> {
        let p = self.base.with_j(j);
        let mut out: Vec<OutcomeTable<T>> = self
            .axes
            .iter()
            .map(|ax| paired_table(&Mode::for_params(&p, ax.k), p.beta, ax.dir))
            .collect();
        if let Beta::Finite(b) = p.beta {
            if let Ok(g) = momentum_grid(&p) {
                out.extend(g.unpaired.iter().map(|u| unpaired_table(u, b)));
            }
        }
        out
    }

    /// Outcome tables and their `J`-derivatives at `j`.
    pub fn tables_with_derivative(&self, j: T) -> Vec<(Vec<T>, Vec<T>)> {
        let p = self.base.with_j(j);
        let mut out: Vec<(Vec<T>, Vec<T>)> = self
            .axes
            .iter()
            .map(|ax| paired_table_derivative(&Mode::for_params(&p, ax.k), p.beta, ax.dir))
            .collect();
        if let Beta::Finite(b) = p.beta {
            if let Ok(g) = momentum_grid(&p) {
                out.extend(g.unpaired.iter().map(|u| {
                    let p1 = u.occupation(b);
                    let d = -b * u.d_eps * p1 * (T::one() - p1);
                    (vec![T::one() - p1, p1], vec![-d, d])
                }));
            }
        }
        out
    }

    /// Classical Fisher information of each measured mode at `j`.
    pub fn fisher_per_mode(&self, j: T) -> Vec<T> {
        self.tables_with_derivative(j)
            .iter()
            .map(|(p, d)| {
                p.iter()
                    .zip(d)
                    .filter(|(&p, _)| p > T::zero())
                    .map(|(&p, &d)| d * d / p)
                    .sum()
            })
            .collect()
    }

    /// Total single-copy classical Fisher information at `j`.
    pub fn fisher(&self, j: T) -> T {
        self.fisher_per_mode(j).into_iter().sum()
    }

    /// `sum_modes sum_outcomes n log p(j)`.
    pub fn log_likelihood(&self, counts: &SampleCounts, j: T) -> T {
        let tables = self.tables(j);
        let mut ll = T::zero();
        for (t, c) in tables.iter().zip(&counts.counts) {
            for (&p, &n) in t.probs.iter().zip(c) {
                if n > 0 {
                    if p > T::zero() {
                        ll += from_usize::<T>(n as usize) * p.ln();
                    } else {
                        return T::zero() - T::one() / T::zero();
                    }
                }
            }
        }
        ll
    }
}

fn pair_populations<T: Real>(m: &Mode<T>, beta: Beta<T>) -> (T, T, T) {
    let w = PairWeights::for_beta(beta, m.lam);
    (w.ground + w.excited, w.ground - w.excited, w.single)
}

fn paired_table<T: Real>(m: &Mode<T>, beta: Beta<T>, dir: Option<(T, T)>) -> OutcomeTable<T> {
    let (w, d, s) = pair_populations(m, beta);
    let half = cst::<T>(0.5);
    let c = match dir {
        Some((uy, uz)) if m.lam > T::zero() => {
            let (my, mz) = m.bloch();
            my * uy + mz * uz
        }
        _ => T::zero(),
    };
    let mut probs = vec![half * (w + d * c), half * (w - d * c)];
    if !beta.is_infinite() {
        probs.extend([s, s]);
    }
    OutcomeTable {
        k: m.k,
        kind: OutcomeKind::Paired,
        probs,
        informative: dir.is_some(),
    }
}

fn paired_table_derivative<T: Real>(
    m: &Mode<T>,
    beta: Beta<T>,
    dir: Option<(T, T)>,
) -> (Vec<T>, Vec<T>) {
    let table = paired_table(m, beta, dir);
    let (w, d, s) = pair_populations(m, beta);
    let (c, dc) = match dir {
        Some((uy, uz)) if m.lam > T::zero() => {
            let (my, mz) = m.bloch();
            let (dy, dz) = m.d_bloch();
            (my * uy + mz * uz, dy * uy + dz * uz)
        }
        _ => (T::zero(), T::zero()),
    };
    let (dw, dd, ds) = match beta {
        Beta::Infinite => (T::zero(), T::zero(), T::zero()),
        Beta::Finite(b) => {
            let dx = if m.lam > T::zero() {
                b * m.d_lam()
            } else {
                T::zero()
            };
            let two = cst::<T>(2.0);
            (two * s * d * dx, (w - d * d) * dx, -s * d * dx)
        }
    };
    let half = cst::<T>(0.5);
    let dp = dd * c + d * dc;
    let mut deriv = vec![half * (dw + dp), half * (dw - dp)];
    if !beta.is_infinite() {
        deriv.extend([ds, ds]);
    }
    (table.probs, deriv)
}

fn unpaired_table<T: Real>(u: &UnpairedMode<T>, beta: T) -> OutcomeTable<T> {
    let p1 = u.occupation(beta);
    OutcomeTable {
        k: u.k,
        kind: OutcomeKind::Unpaired,
        probs: vec![T::one() - p1, p1],
        informative: true,
    }
}

/// Outcome table of one paired mode for the true state, measured in the SLD
/// eigenbasis built at `reference_j0`.
pub fn outcome_distribution<T: Real>(
    params_true: &ModelParams<T>,
    reference_j0: T,
    mode: &Mode<T>,
) -> Result<OutcomeTable<T>> {
    params_true.validate()?;
    let rp = params_true.with_j(reference_j0);
    let (_, by, bz) = block_coefficients(&Mode::for_params(&rp, mode.k), rp.beta);
    let n = by.hypot(bz);
    let dir = (n > T::default_epsilon() * cst(16.0)).then(|| (by / n, bz / n));
    Ok(paired_table(
        &Mode::for_params(params_true, mode.k),
        params_true.beta,
        dir,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MlEstimate<T> {
    pub estimate: T,
    pub loglik: T,
}

/// Maximum-likelihood `J` over `bracket` for counts measured with `model`.
pub fn ml_estimate<T: Real>(
    counts: &SampleCounts,
    model: &MeasurementModel<T>,
    bracket: (T, T),
) -> Result<MlEstimate<T>> {
    ml_estimate_joint(&[(counts, model)], bracket)
}

/// Maximum likelihood over several independent batches, each with its own measurement.
pub fn ml_estimate_joint<T: Real>(
    batches: &[(&SampleCounts, &MeasurementModel<T>)],
    bracket: (T, T),
) -> Result<MlEstimate<T>> {
    for (c, m) in batches {
        if c.counts.len() != m.measured_modes() {
            return Err(Error::Consistency(format!(
                "{} count rows for {} measured modes",
                c.counts.len(),
                m.measured_modes()
            )));
        }
    }
    let ll = |j: T| {
        batches
            .iter()
            .map(|(c, m)| m.log_likelihood(c, j))
            .fold(T::zero(), |a, b| a + b)
    };
    let (lo, hi) = if bracket.0 < bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    let tol = cst::<T>(1e-10);
    let best = grid_golden_max(ll, lo, hi, ML_GRID_CELLS, tol)?;
    Ok(MlEstimate {
        estimate: best.x,
        loglik: best.value,
    })
}

/// Default estimator bracket `J0 [0.5, 1.5]`.
pub fn default_bracket<T: Real>(j0: T) -> (T, T) {
    (j0 * cst(0.5), j0 * cst(1.5))
}

/// One Monte Carlo estimation experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimationRun<T> {
    pub true_j: T,
    /// Reference of the (final-stage) measurement.
    pub reference_j0: T,
    pub m: usize,
    pub seed: u64,
    pub estimate: T,
    pub loglik: T,
    /// Squared error `(estimate - true_j)^2` of this run.
    pub empirical_variance: T,
    /// `1 / (M H(true_j))`; infinite when `H = 0`.
    pub crb: T,
    /// Classical Fisher of the final measurement at `true_j` divided by `H(true_j)`.
    pub fisher_ratio: T,
    /// Fraction of copies spent in stage 1 (zero for a single-stage run).
    pub stage_split: T,
}

fn finish_run<T: Real>(
    p_true: &ModelParams<T>,
    model: &MeasurementModel<T>,
    m: usize,
    seed: u64,
    ml: MlEstimate<T>,
    split: T,
) -> Result<EstimationRun<T>> {
    let h = qfi_exact(p_true)?.value;
    let mf = from_usize::<T>(m);
    let (crb, ratio) = if h > T::zero() {
        (T::one() / (mf * h), model.fisher(p_true.j) / h)
    } else {
        let inf = T::one() / T::zero();
        (inf, T::zero() / T::zero())
    };
    let err = ml.estimate - p_true.j;
    Ok(EstimationRun {
        true_j: p_true.j,
        reference_j0: model.reference_j0,
        m,
        seed,
        estimate: ml.estimate,
        loglik: ml.loglik,
        empirical_variance: err * err,
        crb,
        fisher_ratio: ratio,
        stage_split: split,
    })
}

/// Measure all `M` copies at `reference_j0` and estimate `J`.
pub fn single_stage_run<T: Real>(
    params_true: &ModelParams<T>,
    reference_j0: T,
    m: usize,
    seed: u64,
) -> Result<EstimationRun<T>> {
    if m == 0 {
        return Err(Error::InvalidParams("M must be at least 1".into()));
    }
    let model = MeasurementModel::new(params_true, reference_j0)?;
    let counts = sample_copies(params_true, &model, seed, 0..m)?;
    let ml = ml_estimate(&counts, &model, default_bracket(reference_j0))?;
    finish_run(params_true, &model, m, seed, ml, T::zero())
}

/// Stage-1 copy count: `ceil(sqrt M)` by default, else `round(split M)` within `[1, M-1]`.
pub fn stage_one_copies<T: Real>(m: usize, split: Option<T>) -> Result<usize> {
    if m < 2 {
        return Err(Error::InvalidParams("two-stage runs need M >= 2".into()));
    }
    match split {
        None => Ok(((m as f64).sqrt().ceil() as usize).clamp(1, m - 1)),
        Some(f) => {
            if !(f > T::zero() && f < T::one()) {
                return Err(Error::InvalidParams(format!(
                    "stage split must lie strictly between 0 and 1 (got {})",
                    to_f64(f)
                )));
            }
            let n = (to_f64(f) * m as f64).round() as usize;
            Ok(n.clamp(1, m - 1))
        }
    }
}

/// Two-stage adaptive protocol: a first batch measured at `initial_guess`
/// gives a preliminary estimate, which defines the measurement for the rest.
/// The final estimate maximizes the joint likelihood of both batches.
pub fn two_stage_run<T: Real>(
    params_true: &ModelParams<T>,
    initial_guess: T,
    m: usize,
    split: Option<T>,
    seed: u64,
) -> Result<EstimationRun<T>> {
    let m1 = stage_one_copies(m, split)?;
    let tag = |stage: u8| {
        move |e: Error| Error::Stage {
            stage,
            source: Box::new(e),
        }
    };
    let model1 = MeasurementModel::new(params_true, initial_guess).map_err(tag(1))?;
    let c1 = sample_copies(params_true, &model1, seed, 0..m1).map_err(tag(1))?;
    let j1 = ml_estimate(&c1, &model1, default_bracket(initial_guess))
        .map_err(tag(1))?
        .estimate;
    let model2 = MeasurementModel::new(params_true, j1).map_err(tag(2))?;
    let c2 = sample_copies(params_true, &model2, seed, m1..m).map_err(tag(2))?;
    let ml = ml_estimate_joint(&[(&c1, &model1), (&c2, &model2)], default_bracket(j1))
        .map_err(tag(2))?;
    finish_run(
        params_true,
        &model2,
        m,
        seed,
        ml,
        from_usize::<T>(m1) / from_usize(m),
    )
}

/// Which protocol a replica suite runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol<T> {
    SingleStage { reference_j0: T },
    TwoStage { initial_guess: T, split: Option<T> },
}

/// Seed of replica `r` in a suite seeded with `seed`.
pub fn replica_seed(seed: u64, r: usize) -> u64 {
    seed.wrapping_add(r as u64)
}

/// Independent replicas, run in parallel, returned in replica order.
pub fn run_replicas<T: Real>(
    params_true: &ModelParams<T>,
    protocol: Protocol<T>,
    m: usize,
    replicas: usize,
    seed: u64,
) -> Result<Vec<EstimationRun<T>>> {
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            let s = replica_seed(seed, r);
            match protocol {
                Protocol::SingleStage { reference_j0 } => {
                    single_stage_run(params_true, reference_j0, m, s)
                }
                Protocol::TwoStage {
                    initial_guess,
                    split,
                } => two_stage_run(params_true, initial_guess, m, split, s),
            }
        })
        .collect()
}

/// Replica statistics against the Cramer-Rao bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrbSummary<T> {
    pub replicas: usize,
    pub true_j: T,
    pub m: usize,
    pub mean_estimate: T,
    pub standard_error: T,
    /// `(mean - true_j) / standard_error`.
    pub bias_z: T,
    /// Sample variance of the estimates.
    pub empirical_variance: T,
    /// `None` when the QFI vanishes.
    pub crb: Option<T>,
    /// `empirical_variance / crb`, i.e. `M var H`.
    pub ratio: Option<T>,
    pub ratio_ci: Option<(T, T)>,
    pub ratio_sigma: Option<T>,
    /// `ratio >= 1 - 3 sigma`.
    pub bound_respected: Option<bool>,
    pub mean_fisher_ratio: T,
    pub qfi_zero: bool,
}

const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Summarize at least 100 replicas of one configuration.
pub fn crb_report<T: Real>(runs: &[EstimationRun<T>]) -> Result<CrbSummary<T>> {
    use rand::{Rng, SeedableRng};
    if runs.len() < 100 {
        return Err(Error::InsufficientData(format!(
            "CRB report needs >= 100 replicas (got {})",
            runs.len()
        )));
    }
    let n = runs.len();
    let nf = from_usize::<T>(n);
    let est: Vec<T> = runs.iter().map(|r| r.estimate).collect();
    let variance = |xs: &[T]| {
        let mean = xs.iter().copied().sum::<T>() / nf;
        let v = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / (nf - T::one());
        (mean, v)
    };
    let (mean, var) = variance(&est);
    let se = (var / nf).sqrt();
    let true_j = runs[0].true_j;
    let crb = runs[0].crb;
    let qfi_zero = !crb.is_finite();
    let mean_fisher_ratio = runs.iter().map(|r| r.fisher_ratio).sum::<T>() / nf;

    let (crb_o, ratio, ci, sigma, ok) = if qfi_zero {
        (None, None, None, None, None)
    } else {
        let ratio = var / crb;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut boots: Vec<f64> = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
        let mut sample = vec![T::zero(); n];
        for _ in 0..BOOTSTRAP_RESAMPLES {
            for s in sample.iter_mut() {
                *s = est[rng.random_range(0..n)];
            }
            boots.push(to_f64(variance(&sample).1 / crb));
        }
        let bm = boots.iter().sum::<f64>() / boots.len() as f64;
        let bsd =
            (boots.iter().map(|b| (b - bm).powi(2)).sum::<f64>() / (boots.len() - 1) as f64).sqrt();
        boots.sort_by(f64::total_cmp);
        let q = |f: f64| boots[((boots.len() - 1) as f64 * f).round() as usize];
        let sigma = cst::<T>(bsd);
        (
            Some(crb),
            Some(ratio),
            Some((cst(q(0.025)), cst(q(0.975)))),
            Some(sigma),
            Some(ratio >= T::one() - sigma * cst(3.0)),
        )
    };
    Ok(CrbSummary {
        replicas: n,
        true_j,
        m: runs[0].m,
        mean_estimate: mean,
        standard_error: se,
        bias_z: if se > T::zero() {
            (mean - true_j) / se
        } else {
            T::zero()
        },
        empirical_variance: var,
        crb: crb_o,
        ratio,
        ratio_ci: ci,
        ratio_sigma: sigma,
        bound_respected: ok,
        mean_fisher_ratio,
        qfi_zero,
    })
}
