//! Pooling per-run metrics: ECDFs of relative overtuning, severity bands,
//! stratified summaries, budget sweeps and paired protocol comparisons.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmt::{Cell, Table};
use crate::ingest::{Run, RunKey, KEY_FIELDS};
use crate::metrics::{Epsilon, OvertuningReport};

/// Metrics of one run together with its key.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub key: RunKey,
    pub report: OvertuningReport,
}

/// Computes reports for every run, in corpus order.
pub fn compute_reports(runs: &[Run], epsilon: Epsilon) -> Result<Vec<RunReport>> {
    crate::par::map(runs, |run| {
        Ok(RunReport {
            key: run.key.clone(),
            report: OvertuningReport::compute(&run.trajectory, epsilon, None)?,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimePoint {
    #[default]
    Final,
    /// 1-based iteration.
    Iteration(usize),
}

impl TimePoint {
    fn index(self, report: &OvertuningReport) -> usize {
        match self {
            TimePoint::Final => report.final_index(),
            TimePoint::Iteration(t) => t - 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EcdfSummary {
    /// Defined relative overtuning values, ascending.
    pub values: Vec<f64>,
    pub n_total_runs: usize,
    /// Runs whose improvement denominator did not exceed epsilon.
    pub n_filtered: usize,
    pub fraction_zero: f64,
    /// Share of values strictly above 1.
    pub fraction_severe: f64,
}

impl EcdfSummary {
    pub fn from_values(mut values: Vec<f64>, n_filtered: usize) -> Self {
        values.sort_by(f64::total_cmp);
        let n = values.len();
        let share = |count: usize| if n == 0 { 0.0 } else { count as f64 / n as f64 };
        let zeros = values.iter().filter(|&&v| v == 0.0).count();
        let severe = values.iter().filter(|&&v| v > 1.0).count();
        EcdfSummary {
            fraction_zero: share(zeros),
            fraction_severe: share(severe),
            n_total_runs: n + n_filtered,
            n_filtered,
            values,
        }
    }

    /// Fraction of values `<= x`. Zero for an empty summary.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let count = self.values.partition_point(|&v| v <= x);
        count as f64 / self.values.len() as f64
    }

    /// Step points `(value, F(value))`, one per distinct value.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.values.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &v) in self.values.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 = f,
                _ => out.push((v, f)),
            }
        }
        out
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["value", "F"]);
        for (v, f) in self.points() {
            t.push(vec![v.into(), f.into()]);
        }
        t
    }

    pub fn summary_table(&self) -> Table {
        let mut t = Table::new([
            "n_total_runs",
            "n_filtered",
            "n_values",
            "fraction_zero",
            "fraction_severe",
        ]);
        t.push(vec![
            self.n_total_runs.into(),
            self.n_filtered.into(),
            self.values.len().into(),
            self.fraction_zero.into(),
            self.fraction_severe.into(),
        ]);
        t
    }
}

/// Collects relative overtuning at one time point across runs, dropping
/// runs whose improvement denominator does not exceed `epsilon`.
pub fn build_ecdf<'a, I>(reports: I, at: TimePoint, epsilon: Epsilon) -> Result<EcdfSummary>
where
    I: IntoIterator<Item = &'a OvertuningReport>,
{
    let mut values = Vec::new();
    let mut filtered = 0;
    let mut n = 0;
    for report in reports {
        n += 1;
        if let TimePoint::Iteration(t) = at {
            if t == 0 || t > report.len() {
                return Err(Error::arg(format!(
                    "iteration {t} outside a run of length {}",
                    report.len()
                )));
            }
        }
        match report.rel_ot_at(at.index(report), epsilon) {
            Some(v) => values.push(v),
            None => filtered += 1,
        }
    }
    if n == 0 {
        return Err(Error::arg("no runs to summarize"));
    }
    Ok(EcdfSummary::from_values(values, filtered))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    None,
    Mild,
    Severe,
}

pub fn severity_class(rel_ot: f64) -> Result<Severity> {
    if rel_ot.is_nan() || rel_ot < 0.0 {
        return Err(Error::arg(format!(
            "relative overtuning must be >= 0, got {rel_ot}"
        )));
    }
    Ok(if rel_ot == 0.0 {
        Severity::None
    } else if rel_ot > 1.0 {
        Severity::Severe
    } else {
        Severity::Mild
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub group_key: Vec<(String, String)>,
    pub ecdf: EcdfSummary,
    pub mean_final_ot: f64,
    pub mean_final_of: f64,
    pub mean_final_tr: f64,
    pub run_count: usize,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Groups runs by the named key fields, in lexicographic order of the
/// field values.
pub fn group_summaries(
    runs: &[RunReport],
    group_by: &[&str],
    epsilon: Epsilon,
) -> Result<Vec<GroupSummary>> {
    let mut groups: BTreeMap<Vec<String>, Vec<&RunReport>> = BTreeMap::new();
    for run in runs {
        let values = group_by
            .iter()
            .map(|&name| {
                run.key.field(name).ok_or_else(|| {
                    Error::arg(format!(
                        "unknown group field '{name}' for run {} (known: {})",
                        run.key,
                        KEY_FIELDS.join(", ")
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        groups.entry(values).or_default().push(run);
    }
    groups
        .into_iter()
        .map(|(values, members)| {
            let ecdf = build_ecdf(members.iter().map(|r| &r.report), TimePoint::Final, epsilon)?;
            Ok(GroupSummary {
                group_key: group_by.iter().map(|s| s.to_string()).zip(values).collect(),
                mean_final_ot: mean(members.iter().map(|r| r.report.final_ot())).unwrap_or(0.0),
                mean_final_of: mean(members.iter().map(|r| r.report.final_of())).unwrap_or(0.0),
                mean_final_tr: mean(members.iter().map(|r| r.report.final_tr())).unwrap_or(0.0),
                run_count: members.len(),
                ecdf,
            })
        })
        .collect()
}

pub fn groups_table(group_by: &[&str], groups: &[GroupSummary]) -> Table {
    let mut columns: Vec<String> = group_by.iter().map(|s| s.to_string()).collect();
    columns.extend(
        [
            "run_count",
            "n_filtered",
            "fraction_zero",
            "fraction_severe",
            "mean_final_ot",
            "mean_final_of",
            "mean_final_tr",
        ]
        .map(String::from),
    );
    let mut t = Table::new(columns);
    for g in groups {
        let mut row: Vec<Cell> = g
            .group_key
            .iter()
            .map(|(_, v)| Cell::from(v.as_str()))
            .collect();
        row.extend([
            g.run_count.into(),
            g.ecdf.n_filtered.into(),
            g.ecdf.fraction_zero.into(),
            g.ecdf.fraction_severe.into(),
            g.mean_final_ot.into(),
            g.mean_final_of.into(),
            g.mean_final_tr.into(),
        ]);
        t.push(row);
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub iteration: usize,
    pub mean_ot: Option<f64>,
    pub mean_of: Option<f64>,
    pub mean_tr: Option<f64>,
    /// Mean over runs whose relative overtuning is defined at this point.
    pub mean_rel_ot: Option<f64>,
    /// Runs long enough to reach this iteration.
    pub n: usize,
    pub n_rel_defined: usize,
    pub n_excluded: usize,
}

/// Pooled anytime means at each grid iteration. Runs shorter than a grid
/// point are excluded from that point and counted.
pub fn budget_sweep<'a, I>(reports: I, grid: &[usize], epsilon: Epsilon) -> Result<Vec<SweepPoint>>
where
    I: IntoIterator<Item = &'a OvertuningReport>,
{
    if grid.is_empty() {
        return Err(Error::arg("empty budget grid"));
    }
    if grid.contains(&0) {
        return Err(Error::arg("budget grid iterations are 1-based"));
    }
    let reports: Vec<&OvertuningReport> = reports.into_iter().collect();
    Ok(grid
        .iter()
        .map(|&iteration| {
            let t = iteration - 1;
            let live: Vec<&&OvertuningReport> = reports.iter().filter(|r| r.len() > t).collect();
            let rel: Vec<f64> = live
                .iter()
                .filter_map(|r| r.rel_ot_at(t, epsilon))
                .collect();
            SweepPoint {
                iteration,
                mean_ot: mean(live.iter().map(|r| r.ot[t])),
                mean_of: mean(live.iter().map(|r| r.of[t])),
                mean_tr: mean(live.iter().map(|r| r.tr[t])),
                n_rel_defined: rel.len(),
                mean_rel_ot: mean(rel),
                n: live.len(),
                n_excluded: reports.len() - live.len(),
            }
        })
        .collect())
}

pub fn sweep_table(points: &[SweepPoint]) -> Table {
    let mut t = Table::new([
        "iteration",
        "mean_ot",
        "mean_of",
        "mean_tr",
        "mean_rel_ot",
        "n",
    ]);
    for p in points {
        t.push(vec![
            p.iteration.into(),
            p.mean_ot.into(),
            p.mean_of.into(),
            p.mean_tr.into(),
            p.mean_rel_ot.into(),
            p.n.into(),
        ]);
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedDelta {
    pub pairing_key: RunKey,
    pub factor: String,
    pub a_value: String,
    pub b_value: String,
    pub delta_final_test: f64,
    pub delta_final_ot: f64,
    pub delta_final_of: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedComparison {
    pub pairs: Vec<PairedDelta>,
    pub unmatched_a: Vec<RunKey>,
    pub unmatched_b: Vec<RunKey>,
    pub mean_delta_final_test: f64,
    pub mean_delta_final_ot: f64,
    pub mean_delta_final_of: f64,
    pub fraction_positive_test: f64,
    pub fraction_positive_ot: f64,
}

/// Matches each A run to the B run that agrees on every key field except
/// `factor` and reports B minus A on the final incumbent. Pairing keys
/// that occur more than once on either side are left unmatched.
pub fn paired_compare(a: &[RunReport], b: &[RunReport], factor: &str) -> Result<PairedComparison> {
    let index = |runs: &[RunReport]| -> Result<BTreeMap<RunKey, Vec<usize>>> {
        let mut m: BTreeMap<RunKey, Vec<usize>> = BTreeMap::new();
        for (i, r) in runs.iter().enumerate() {
            m.entry(r.key.without_field(factor)?).or_default().push(i);
        }
        Ok(m)
    };
    let a_index = index(a)?;
    let mut b_index = index(b)?;

    let mut pairs = Vec::new();
    let mut unmatched_a = Vec::new();
    for (pkey, a_ids) in a_index {
        match (a_ids.as_slice(), b_index.remove(&pkey).as_deref()) {
            ([ai], Some([bi])) => {
                let (ra, rb) = (&a[*ai], &b[*bi]);
                pairs.push(PairedDelta {
                    a_value: ra.key.field(factor).unwrap_or_default(),
                    b_value: rb.key.field(factor).unwrap_or_default(),
                    factor: factor.to_string(),
                    delta_final_test: rb.report.final_test() - ra.report.final_test(),
                    delta_final_ot: rb.report.final_ot() - ra.report.final_ot(),
                    delta_final_of: rb.report.final_of() - ra.report.final_of(),
                    pairing_key: pkey,
                });
            }
            (_, b_ids) => {
                unmatched_a.extend(a_ids.iter().map(|&i| a[i].key.clone()));
                if let Some(ids) = b_ids {
                    b_index.insert(pkey, ids.to_vec());
                }
            }
        }
    }
    let unmatched_b: Vec<RunKey> = b_index
        .into_values()
        .flatten()
        .map(|i| b[i].key.clone())
        .collect();
    if pairs.is_empty() {
        return Err(Error::arg(format!("no matched pairs on factor '{factor}'")));
    }
    if !unmatched_a.is_empty() || !unmatched_b.is_empty() {
        log::warn!(
            "paired comparison on '{factor}': {} A runs and {} B runs unmatched",
            unmatched_a.len(),
            unmatched_b.len()
        );
    }
    let n = pairs.len() as f64;
    let positive =
        |f: fn(&PairedDelta) -> f64| pairs.iter().filter(|p| f(p) > 0.0).count() as f64 / n;
    Ok(PairedComparison {
        mean_delta_final_test: mean(pairs.iter().map(|p| p.delta_final_test)).unwrap_or(0.0),
        mean_delta_final_ot: mean(pairs.iter().map(|p| p.delta_final_ot)).unwrap_or(0.0),
        mean_delta_final_of: mean(pairs.iter().map(|p| p.delta_final_of)).unwrap_or(0.0),
        fraction_positive_test: positive(|p| p.delta_final_test),
        fraction_positive_ot: positive(|p| p.delta_final_ot),
        pairs,
        unmatched_a,
        unmatched_b,
    })
}

/// Splits runs into the A side (`factor == a_value`) and the B side
/// (`factor == b_value`); other runs are ignored.
pub fn split_by_factor(
    runs: &[RunReport],
    factor: &str,
    a_value: &str,
    b_value: &str,
) -> (Vec<RunReport>, Vec<RunReport>) {
    let pick = |want: &str| {
        runs.iter()
            .filter(|r| r.key.field(factor).as_deref() == Some(want))
            .cloned()
            .collect::<Vec<_>>()
    };
    (pick(a_value), pick(b_value))
}

pub fn pairs_table(cmp: &PairedComparison) -> Table {
    let mut t = Table::new([
        "study",
        "learner",
        "dataset",
        "metric",
        "resampling",
        "dataset_size",
        "seed",
        "fold",
        "factor",
        "a_value",
        "b_value",
        "delta_final_test",
        "delta_final_ot",
        "delta_final_of",
    ]);
    for p in &cmp.pairs {
        let mut row = key_cells(&p.pairing_key);
        row.extend([
            Cell::from(p.factor.as_str()),
            Cell::from(p.a_value.as_str()),
            Cell::from(p.b_value.as_str()),
            p.delta_final_test.into(),
            p.delta_final_ot.into(),
            p.delta_final_of.into(),
        ]);
        t.push(row);
    }
    t
}

/// Cells for the eight standard key columns, in [`KEY_FIELDS`] order.
pub fn key_cells(key: &RunKey) -> Vec<Cell> {
    vec![
        key.study.as_str().into(),
        key.learner.as_str().into(),
        key.dataset.as_str().into(),
        key.metric_name.as_str().into(),
        key.resampling.as_str().into(),
        key.dataset_size.into(),
        key.seed.into(),
        key.fold.into(),
    ]
}

/// Per-run final metrics.
pub fn metrics_table(runs: &[RunReport]) -> Table {
    let mut columns: Vec<&str> = KEY_FIELDS.to_vec();
    columns.extend([
        "T",
        "final_ot",
        "final_of",
        "final_tr",
        "final_rel_ot",
        "rel_ot_defined",
        "denominator",
    ]);
    let mut t = Table::new(columns);
    for r in runs {
        let rep = &r.report;
        let mut row = key_cells(&r.key);
        row.extend([
            rep.len().into(),
            rep.final_ot().into(),
            rep.final_of().into(),
            rep.final_tr().into(),
            rep.final_rel_ot().into(),
            rep.final_rel_ot().is_some().into(),
            rep.denominator[rep.final_index()].into(),
        ]);
        t.push(row);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ScoreTrajectory;

    fn report(val: &[f64], test: &[f64]) -> OvertuningReport {
        let traj = ScoreTrajectory::new(val.to_vec(), test.to_vec()).unwrap();
        OvertuningReport::compute(&traj, Epsilon::default(), None).unwrap()
    }

    fn keyed(study: &str, seed: u64, val: &[f64], test: &[f64]) -> RunReport {
        RunReport {
            key: RunKey {
                study: study.into(),
                seed: Some(seed),
                ..RunKey::default()
            },
            report: report(val, test),
        }
    }

    /// Runs whose final relative overtuning is 0, 0, 0.5 and 1.5.
    fn fixture() -> Vec<OvertuningReport> {
        vec![
            report(&[1.0, 0.5], &[1.0, 0.0]),
            report(&[1.0, 0.5], &[1.0, 0.5]),
            report(&[1.0, 0.5, 0.2], &[1.0, 0.0, 0.5]),
            report(&[1.0, 0.5, 0.2], &[1.0, 0.0, 1.5]),
        ]
    }

    #[test]
    fn ecdf_counts() {
        let e = build_ecdf(&fixture(), TimePoint::Final, Epsilon::default()).unwrap();
        assert_eq!(e.values, vec![0.0, 0.0, 0.5, 1.5]);
        assert_eq!(e.cdf(0.0), 0.5);
        assert_eq!(e.cdf(1.0), 0.75);
        assert_eq!(e.cdf(-1.0), 0.0);
        assert_eq!(e.cdf(1.5), 1.0);
        assert_eq!(e.fraction_severe, 0.25);
        assert_eq!(e.fraction_zero, 0.5);
        assert_eq!(e.points(), vec![(0.0, 0.5), (0.5, 0.75), (1.5, 1.0)]);
    }

    #[test]
    fn ecdf_all_zero_and_filtered() {
        let zeros = vec![report(&[1.0, 0.5], &[1.0, 0.0]); 3];
        let e = build_ecdf(&zeros, TimePoint::Final, Epsilon::default()).unwrap();
        assert_eq!(e.cdf(0.0), 1.0);
        assert_eq!(e.fraction_severe, 0.0);

        let flat = vec![report(&[1.0, 0.5], &[0.3, 0.3])];
        let e = build_ecdf(&flat, TimePoint::Final, Epsilon::default()).unwrap();
        assert_eq!(e.n_filtered, 1);
        assert!(e.values.is_empty());
        assert_eq!(e.n_total_runs, 1);
    }

    #[test]
    fn ecdf_at_iteration() {
        let reps = fixture();
        let e = build_ecdf(&reps, TimePoint::Iteration(1), Epsilon::default()).unwrap();
        assert_eq!(e.n_filtered, 4);
        assert!(build_ecdf(&reps, TimePoint::Iteration(3), Epsilon::default()).is_err());
        assert!(build_ecdf(
            &[] as &[OvertuningReport],
            TimePoint::Final,
            Epsilon::default()
        )
        .is_err());
    }

    #[test]
    fn severity_bands() {
        assert_eq!(severity_class(0.0).unwrap(), Severity::None);
        assert_eq!(severity_class(0.1).unwrap(), Severity::Mild);
        assert_eq!(severity_class(1.0).unwrap(), Severity::Mild);
        assert_eq!(severity_class(1.5).unwrap(), Severity::Severe);
        assert!(severity_class(-0.1).is_err());
    }

    #[test]
    fn groups_partition_runs() {
        let runs = vec![
            keyed("a", 1, &[1.0, 0.5], &[1.0, 0.0]),
            keyed("b", 1, &[1.0, 0.5], &[1.0, 0.5]),
            keyed("a", 2, &[1.0, 0.5, 0.2], &[1.0, 0.0, 0.5]),
        ];
        let g = group_summaries(&runs, &["study"], Epsilon::default()).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].group_key, vec![("study".to_string(), "a".to_string())]);
        assert_eq!(g.iter().map(|g| g.run_count).sum::<usize>(), 3);
        assert_eq!(g[0].mean_final_ot, 0.25);
        assert!(group_summaries(&runs, &["bogus"], Epsilon::default()).is_err());
    }

    #[test]
    fn two_by_two_grouping() {
        let mut runs = Vec::new();
        for metric in ["auc", "acc"] {
            for resampling in ["holdout", "cv"] {
                let mut r = keyed("s", 1, &[0.2], &[0.2]);
                r.key.metric_name = metric.into();
                r.key.resampling = resampling.into();
                runs.push(r);
            }
        }
        let g = group_summaries(&runs, &["metric", "resampling"], Epsilon::default()).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g[0].group_key[0].1, "acc");
        assert_eq!(g[0].group_key[1].1, "cv");
    }

    #[test]
    fn sweep_single_run_matches_series() {
        let rep = report(&[0.5, 0.4, 0.3], &[0.30, 0.20, 0.25]);
        let pts = budget_sweep([&rep], &[1, 2, 3], Epsilon::default()).unwrap();
        for (t, p) in pts.iter().enumerate() {
            assert_eq!(p.mean_ot, Some(rep.ot[t]));
            assert_eq!(p.mean_of, Some(rep.of[t]));
            assert_eq!(p.mean_tr, Some(rep.tr[t]));
            assert_eq!(p.mean_rel_ot, rep.rel_ot[t]);
        }
        assert!(budget_sweep([&rep], &[], Epsilon::default()).is_err());
        let pts = budget_sweep([&rep], &[4], Epsilon::default()).unwrap();
        assert_eq!((pts[0].n, pts[0].n_excluded, pts[0].mean_ot), (0, 1, None));
    }

    #[test]
    fn sweep_first_iteration_is_zero() {
        let reps = fixture();
        let p = &budget_sweep(&reps, &[1], Epsilon::default()).unwrap()[0];
        assert_eq!(p.mean_ot, Some(0.0));
        assert_eq!(p.mean_tr, Some(0.0));
    }

    #[test]
    fn paired_self_compare_is_zero() {
        let runs = vec![
            keyed("a", 1, &[1.0, 0.5], &[1.0, 0.0]),
            keyed("a", 2, &[1.0, 0.5, 0.2], &[1.0, 0.0, 0.5]),
        ];
        let cmp = paired_compare(&runs, &runs, "learner").unwrap();
        assert_eq!(cmp.pairs.len(), 2);
        assert!(cmp.pairs.iter().all(|p| p.delta_final_test == 0.0
            && p.delta_final_ot == 0.0
            && p.delta_final_of == 0.0));
    }

    #[test]
    fn paired_uniform_shift() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for seed in 0..5 {
            let test = [0.4, 0.3 + seed as f64 * 0.01];
            let mut ra = keyed("s", seed, &[0.5, 0.45], &test);
            ra.key.resampling = "holdout".into();
            let shifted: Vec<f64> = test.iter().map(|x| x - 0.01).collect();
            let mut rb = keyed("s", seed, &[0.5, 0.45], &shifted);
            rb.key.resampling = "cv".into();
            a.push(ra);
            b.push(rb);
        }
        let mut extra = keyed("s", 99, &[0.5], &[0.5]);
        extra.key.resampling = "holdout".into();
        a.push(extra);
        let cmp = paired_compare(&a, &b, "resampling").unwrap();
        assert_eq!(cmp.pairs.len(), 5);
        assert_eq!(cmp.unmatched_a.len(), 1);
        assert!((cmp.mean_delta_final_test + 0.01).abs() < 1e-12);
        assert_eq!(cmp.fraction_positive_test, 0.0);
        assert!(paired_compare(&a[5..], &b[..0], "resampling").is_err());
    }

    #[test]
    fn split_by_factor_picks_sides() {
        let mut r1 = keyed("s", 1, &[0.5], &[0.5]);
        r1.key.resampling = "h".into();
        let mut r2 = r1.clone();
        r2.key.resampling = "cv".into();
        let (a, b) = split_by_factor(&[r1, r2], "resampling", "h", "cv");
        assert_eq!((a.len(), b.len()), (1, 1));
    }
}
