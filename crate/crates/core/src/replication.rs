//! Replicate incumbent curves from one trajectory by subsampling its
//! configurations without replacement.
//!
//! Each replicate keeps `m = floor(f * T)` configurations, rebuilds the
//! incumbent series over them and the series are averaged per iteration
//! (mean and standard error = sample std / sqrt(R)).

use rand::seq::{index, SliceRandom};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmt::Table;
use crate::metrics::{incumbent_trace, ScoreTrajectory};
use crate::rng::{self, Domain};

/// Replicates are accumulated in fixed-size blocks and blocks are merged in
/// index order, so results do not depend on the worker count.
const BLOCK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubsetOrder {
    /// Keep the original evaluation order of the drawn configurations.
    #[default]
    Preserve,
    /// Randomly permute each replicate's configurations.
    Permute,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateCurves {
    /// 1-based iterations `1..=m`.
    pub iterations: Vec<usize>,
    pub mean_val: Vec<f64>,
    pub se_val: Vec<f64>,
    pub mean_test: Vec<f64>,
    pub se_test: Vec<f64>,
    pub n_replicates: usize,
    pub subsample_fraction: f64,
}

impl ReplicateCurves {
    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["iteration", "mean_val", "se_val", "mean_test", "se_test"]);
        for i in 0..self.len() {
            t.push(vec![
                self.iterations[i].into(),
                self.mean_val[i].into(),
                self.se_val[i].into(),
                self.mean_test[i].into(),
                self.se_test[i].into(),
            ]);
        }
        t
    }
}

/// Subsample size `floor(f * T)`. Products within 1e-9 of an integer are
/// rounded to it so that fractions like 2/3 of 3 give 2.
pub fn subsample_size(fraction: f64, len: usize) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::arg(format!(
            "subsample fraction must be in (0, 1], got {fraction}"
        )));
    }
    let m = (fraction * len as f64 + 1e-9).floor() as usize;
    if m == 0 {
        return Err(Error::EmptySubsample { fraction, len });
    }
    Ok(m.min(len))
}

/// Per-iteration running moments (Welford), mergeable in a fixed order.
#[derive(Debug, Clone)]
struct Moments {
    n: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Moments {
            n: 0.0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, xs: &[f64]) {
        self.n += 1.0;
        for ((mean, m2), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(xs) {
            let d = x - *mean;
            *mean += d / self.n;
            *m2 += d * (x - *mean);
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0.0 {
            return;
        }
        if self.n == 0.0 {
            *self = other.clone();
            return;
        }
        let n = self.n + other.n;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * other.n / n;
            self.m2[i] += other.m2[i] + d * d * self.n * other.n / n;
        }
        self.n = n;
    }

    fn standard_errors(&self) -> Vec<f64> {
        if self.n < 2.0 {
            return vec![0.0; self.mean.len()];
        }
        self.m2
            .iter()
            .map(|m2| (m2 / (self.n - 1.0)).sqrt() / self.n.sqrt())
            .collect()
    }
}

/// Positions drawn for replicate `r`.
pub fn replicate_positions(
    len: usize,
    m: usize,
    seed: u64,
    r: usize,
    order: SubsetOrder,
) -> Vec<usize> {
    let mut rng = rng::stream(seed, Domain::Replication, r as u64);
    let mut positions = index::sample(&mut rng, len, m).into_vec();
    positions.sort_unstable();
    if order == SubsetOrder::Permute {
        positions.shuffle(&mut rng);
    }
    positions
}

pub fn replicate_curves(
    traj: &ScoreTrajectory,
    fraction: f64,
    replicates: usize,
    seed: u64,
) -> Result<ReplicateCurves> {
    replicate_curves_with(traj, fraction, replicates, seed, SubsetOrder::Preserve)
}

pub fn replicate_curves_with(
    traj: &ScoreTrajectory,
    fraction: f64,
    replicates: usize,
    seed: u64,
    order: SubsetOrder,
) -> Result<ReplicateCurves> {
    if replicates == 0 {
        return Err(Error::arg("number of replicates must be >= 1"));
    }
    let m = subsample_size(fraction, traj.len())?;
    let n_blocks = replicates.div_ceil(BLOCK);
    let blocks = crate::par::map_range(n_blocks, |b| -> Result<(Moments, Moments)> {
        let mut val = Moments::new(m);
        let mut test = Moments::new(m);
        for r in b * BLOCK..((b + 1) * BLOCK).min(replicates) {
            let sub = traj.select(&replicate_positions(traj.len(), m, seed, r, order))?;
            let trace = incumbent_trace(&sub);
            val.push(&trace.incumbent_val);
            test.push(&trace.incumbent_test);
        }
        Ok((val, test))
    });
    let mut val = Moments::new(m);
    let mut test = Moments::new(m);
    for block in blocks {
        let (v, t) = block?;
        val.merge(&v);
        test.merge(&t);
    }
    Ok(ReplicateCurves {
        iterations: (1..=m).collect(),
        se_val: val.standard_errors(),
        se_test: test.standard_errors(),
        mean_val: val.mean,
        mean_test: test.mean,
        n_replicates: replicates,
        subsample_fraction: fraction,
    })
}
