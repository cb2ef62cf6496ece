//! Synthetic HPO runs over a finite grid with a known test surface.
//!
//! Validation error of configuration `i` is
//! `test_i + sigma_shared * z_b + (sigma_indep / sqrt(k)) * z_i`, where `z_b`
//! is drawn once per run for fixed splits and once per configuration when
//! splits are reshuffled. The random draws consumed by a run depend only on
//! its seed and grid size, so cells that share a seed see the same surface
//! and the same standard-normal noise, scaled differently.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{Run, RunKey};
use crate::metrics::ScoreTrajectory;
use crate::rng::{self, Domain};

pub const STUDY: &str = "synthetic";
pub const METRIC: &str = "error";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TestSurface {
    IidUniform {
        lo: f64,
        hi: f64,
    },
    IidNormal {
        mu: f64,
        sd: f64,
    },
    /// `floor + depth * x^2` on an even grid over `[-1, 1]`.
    Quadratic1d {
        depth: f64,
        floor: f64,
    },
}

impl TestSurface {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            TestSurface::IidUniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            TestSurface::IidNormal { mu, sd } => mu.is_finite() && sd.is_finite() && sd >= 0.0,
            TestSurface::Quadratic1d { depth, floor } => depth.is_finite() && floor.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::arg(format!("invalid test surface {self}")))
        }
    }

    fn draw<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        match *self {
            TestSurface::IidUniform { lo, hi } => (0..n)
                .map(|_| lo + (hi - lo) * rng.random::<f64>())
                .collect(),
            TestSurface::IidNormal { mu, sd } => (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    mu + sd * z
                })
                .collect(),
            TestSurface::Quadratic1d { depth, floor } => (0..n)
                .map(|i| {
                    let x = if n == 1 {
                        0.0
                    } else {
                        -1.0 + 2.0 * i as f64 / (n - 1) as f64
                    };
                    floor + depth * x * x
                })
                .collect(),
        }
    }
}

impl fmt::Display for TestSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestSurface::IidUniform { lo, hi } => write!(f, "uniform:{lo:?}:{hi:?}"),
            TestSurface::IidNormal { mu, sd } => write!(f, "normal:{mu:?}:{sd:?}"),
            TestSurface::Quadratic1d { depth, floor } => write!(f, "quadratic:{depth:?}:{floor:?}"),
        }
    }
}

impl FromStr for TestSurface {
    type Err = Error;

    /// `uniform:LO:HI`, `normal:MU:SD` or `quadratic:DEPTH:FLOOR`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .and_then(|p| p.trim().parse().ok())
                .ok_or_else(|| Error::arg(format!("bad surface '{s}'")))
        };
        if parts.len() != 3 {
            return Err(Error::arg(format!(
                "bad surface '{s}', expected uniform:LO:HI, normal:MU:SD or quadratic:DEPTH:FLOOR"
            )));
        }
        let surface = match parts[0] {
            "uniform" => TestSurface::IidUniform {
                lo: num(1)?,
                hi: num(2)?,
            },
            "normal" => TestSurface::IidNormal {
                mu: num(1)?,
                sd: num(2)?,
            },
            "quadratic" => TestSurface::Quadratic1d {
                depth: num(1)?,
                floor: num(2)?,
            },
            other => return Err(Error::arg(format!("unknown surface kind '{other}'"))),
        };
        surface.validate()?;
        Ok(surface)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticSpec {
    pub n_configs: usize,
    pub surface: TestSurface,
    pub sigma_shared: f64,
    pub sigma_indep: f64,
    pub k_folds: usize,
    pub reshuffled: bool,
    pub trajectory_len: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_configs: 1000,
            surface: TestSurface::IidUniform { lo: 0.0, hi: 1.0 },
            sigma_shared: 0.0,
            sigma_indep: 0.1,
            k_folds: 1,
            reshuffled: false,
            trajectory_len: 500,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        self.surface.validate()?;
        if self.n_configs == 0 || self.trajectory_len == 0 {
            return Err(Error::arg("n_configs and trajectory_len must be >= 1"));
        }
        if self.trajectory_len > self.n_configs {
            return Err(Error::arg(format!(
                "trajectory length {} exceeds grid size {}",
                self.trajectory_len, self.n_configs
            )));
        }
        if self.k_folds == 0 {
            return Err(Error::arg("k_folds must be >= 1"));
        }
        for (name, s) in [
            ("sigma_shared", self.sigma_shared),
            ("sigma_indep", self.sigma_indep),
        ] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::arg(format!(
                    "{name} must be finite and >= 0, got {s}"
                )));
            }
        }
        Ok(())
    }

    /// Key under which analysis groups this cell. Noise levels go into
    /// `dataset`, fold count and reshuffling into `resampling`, so that
    /// cells differing in one of them pair on that field.
    pub fn run_key(&self) -> RunKey {
        let mut resampling = if self.k_folds == 1 {
            "holdout".to_string()
        } else {
            format!("cv{}", self.k_folds)
        };
        if self.reshuffled {
            resampling.push_str("-reshuffled");
        }
        RunKey {
            study: STUDY.to_string(),
            learner: self.surface.to_string(),
            dataset: format!(
                "n{}-t{}-ss{:?}-si{:?}",
                self.n_configs, self.trajectory_len, self.sigma_shared, self.sigma_indep
            ),
            metric_name: METRIC.to_string(),
            resampling,
            dataset_size: Some(self.n_configs as u64),
            seed: Some(self.seed),
            fold: None,
            extra: Default::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedRun {
    pub trajectory: ScoreTrajectory,
    /// Minimum true test error over the whole grid.
    pub oracle_min_test: f64,
    /// True test error of every grid configuration.
    pub surface: Vec<f64>,
    /// Grid index of each trajectory position.
    pub configs: Vec<usize>,
}

pub fn generate_run(spec: &SyntheticSpec) -> Result<GeneratedRun> {
    spec.validate()?;
    let n = spec.n_configs;
    let mut rng = rng::stream(spec.seed, Domain::Synthetic, 0);

    let surface = spec.surface.draw(n, &mut rng);
    let split_z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let eval_z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let (picked, _) = order.partial_shuffle(&mut rng, spec.trajectory_len);
    let configs = picked.to_vec();

    let indep_sd = spec.sigma_indep / (spec.k_folds as f64).sqrt();
    let val_of = |i: usize| {
        let bias = if spec.reshuffled {
            split_z[i]
        } else {
            split_z[0]
        };
        surface[i] + spec.sigma_shared * bias + indep_sd * eval_z[i]
    };
    let val = configs.iter().map(|&i| val_of(i)).collect();
    let test = configs.iter().map(|&i| surface[i]).collect();
    let oracle_min_test = surface.iter().copied().fold(f64::INFINITY, f64::min);
    let trajectory = ScoreTrajectory::new(val, test)?;
    debug_assert!(trajectory.test().iter().all(|&t| oracle_min_test <= t));
    Ok(GeneratedRun {
        trajectory,
        oracle_min_test,
        surface,
        configs,
    })
}

/// A generated run in corpus form.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticRun {
    pub spec: SyntheticSpec,
    pub run: Run,
    pub oracle_min_test: f64,
}

/// Full-factorial grid of noise settings crossed with seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorialDesign {
    pub base: SyntheticSpec,
    pub sigma_shared: Vec<f64>,
    pub sigma_indep: Vec<f64>,
    pub k_folds: Vec<usize>,
    pub reshuffled: Vec<bool>,
    pub seeds: Vec<u64>,
}

impl FactorialDesign {
    pub fn new(base: SyntheticSpec) -> Self {
        FactorialDesign {
            sigma_shared: vec![base.sigma_shared],
            sigma_indep: vec![base.sigma_indep],
            k_folds: vec![base.k_folds],
            reshuffled: vec![base.reshuffled],
            seeds: vec![base.seed],
            base,
        }
    }

    /// Cells in nested order: sigma_shared, sigma_indep, k_folds,
    /// reshuffled, then seed.
    pub fn specs(&self) -> Vec<SyntheticSpec> {
        let mut out = Vec::new();
        for &sigma_shared in &self.sigma_shared {
            for &sigma_indep in &self.sigma_indep {
                for &k_folds in &self.k_folds {
                    for &reshuffled in &self.reshuffled {
                        for &seed in &self.seeds {
                            out.push(SyntheticSpec {
                                sigma_shared,
                                sigma_indep,
                                k_folds,
                                reshuffled,
                                seed,
                                ..self.base.clone()
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// Generates one run per spec, in spec order.
pub fn sweep_grid(specs: &[SyntheticSpec]) -> Result<Vec<SyntheticRun>> {
    if specs.is_empty() {
        return Err(Error::arg("empty synthetic spec list"));
    }
    crate::par::map_range(specs.len(), |i| {
        let spec = &specs[i];
        let generated = generate_run(spec)?;
        Ok(SyntheticRun {
            run: Run {
                key: spec.run_key(),
                trajectory: generated.trajectory,
                source: format!("synthetic:{i}"),
            },
            oracle_min_test: generated.oracle_min_test,
            spec: spec.clone(),
        })
    })
    .into_iter()
    .collect()
}
