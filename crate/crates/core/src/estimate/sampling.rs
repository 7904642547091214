use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::MeasurementModel;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::scalar::{to_f64, Real};

/// Outcome counts per measured mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleCounts {
    pub counts: Vec<Vec<u64>>,
    pub copies: usize,
}

/// Measure copies `copies` of the true state with `model`.
///
/// Copy `c` of measured mode `i` uses word `c` of ChaCha stream `i` seeded with `seed`.
pub fn sample_copies<T: Real>(
    params_true: &ModelParams<T>,
    model: &MeasurementModel<T>,
    seed: u64,
    copies: Range<usize>,
) -> Result<SampleCounts> {
    params_true.validate()?;
    let tables = model.tables(params_true.j);
    let mut counts = Vec::with_capacity(tables.len());
    for (i, t) in tables.iter().enumerate() {
        let mut cum: Vec<f64> = t
            .probs
            .iter()
            .scan(0.0, |acc, &p| {
                *acc += to_f64(p);
                Some(*acc)
            })
            .collect();
        let total = *cum.last().unwrap_or(&0.0);
        if !(total - 1.0).abs().lt(&1e-9) {
            return Err(Error::Consistency(format!(
                "outcome table of mode {i} sums to {total}"
            )));
        }
        if let Some(last) = cum.last_mut() {
            *last = f64::INFINITY;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        // Each f64 draw consumes one 64-bit value, i.e. two 32-bit words.
        rng.set_word_pos(2 * copies.start as u128);
        let mut row = vec![0u64; cum.len()];
        for _ in copies.clone() {
            let u: f64 = rng.random();
            let o = cum.partition_point(|&c| c <= u);
            row[o.min(cum.len() - 1)] += 1;
        }
        counts.push(row);
    }
    Ok(SampleCounts {
        counts,
        copies: copies.len(),
    })
}

/// Measure `m` copies with the SLD eigenbasis at `reference_j0`.
pub fn sample_run<T: Real>(
    params_true: &ModelParams<T>,
    reference_j0: T,
    m: usize,
    seed: u64,
) -> Result<SampleCounts> {
    let model = MeasurementModel::new(params_true, reference_j0)?;
    sample_copies(params_true, &model, seed, 0..m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_ranges_add_up() {
        let p = ModelParams::thermal(1.0, 0.8, 1.1, 8, 2.0).unwrap();
        let model = MeasurementModel::new(&p, 1.0).unwrap();
        let all = sample_copies(&p, &model, 3, 0..500).unwrap();
        let a = sample_copies(&p, &model, 3, 0..123).unwrap();
        let b = sample_copies(&p, &model, 3, 123..500).unwrap();
        for ((x, y), z) in all.counts.iter().zip(&a.counts).zip(&b.counts) {
            let s: Vec<u64> = y.iter().zip(z).map(|(u, v)| u + v).collect();
            assert_eq!(x, &s);
        }
    }
}
