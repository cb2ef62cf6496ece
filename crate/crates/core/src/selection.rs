//! Counterfactual incumbent selection: what would the final pick have been
//! under a different stopping or selection rule?

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::analysis::key_cells;
use crate::error::{Error, Result};
use crate::fmt::{Cell, Table};
use crate::ingest::{Run, RunKey, KEY_FIELDS};
use crate::metrics::{incumbent_trace, ScoreTrajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SelectionRule {
    /// Final incumbent.
    NaiveArgmin,
    /// Incumbent after the given number of evaluations.
    StopAtBudget(usize),
    /// Incumbent after `max(1, floor(f * T))` evaluations.
    StopAtFraction(f64),
    /// Nearest-rank percentile `k` of all validation errors.
    Percentile(f64),
}

impl SelectionRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SelectionRule::NaiveArgmin => Ok(()),
            SelectionRule::StopAtBudget(t) if t >= 1 => Ok(()),
            SelectionRule::StopAtFraction(f) if f > 0.0 && f <= 1.0 => Ok(()),
            SelectionRule::Percentile(k) if (0.0..=1.0).contains(&k) => Ok(()),
            other => Err(Error::arg(format!(
                "rule {other} has parameters out of range"
            ))),
        }
    }

    /// Number of evaluations the rule looks at on a run of length `len`.
    pub fn budget(&self, len: usize) -> Result<usize> {
        self.validate()?;
        match *self {
            SelectionRule::StopAtBudget(t) if t > len => Err(Error::arg(format!(
                "stop budget {t} exceeds trajectory length {len}"
            ))),
            SelectionRule::StopAtBudget(t) => Ok(t),
            SelectionRule::StopAtFraction(f) => {
                Ok(((f * len as f64 + 1e-9).floor() as usize).clamp(1, len))
            }
            SelectionRule::NaiveArgmin | SelectionRule::Percentile(_) => Ok(len),
        }
    }
}

impl fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionRule::NaiveArgmin => write!(f, "naive"),
            SelectionRule::StopAtBudget(t) => write!(f, "stop:{t}"),
            SelectionRule::StopAtFraction(x) => write!(f, "stopfrac:{x:?}"),
            SelectionRule::Percentile(k) => write!(f, "pct:{k:?}"),
        }
    }
}

impl FromStr for SelectionRule {
    type Err = Error;

    /// `naive`, `stop:T`, `stopfrac:F` or `pct:K`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        let bad = || {
            Error::arg(format!(
                "bad rule '{s}' (expected naive, stop:T, stopfrac:F or pct:K)"
            ))
        };
        let rule = match kind {
            "naive" if arg.is_empty() => SelectionRule::NaiveArgmin,
            "stop" => SelectionRule::StopAtBudget(arg.parse().map_err(|_| bad())?),
            "stopfrac" => SelectionRule::StopAtFraction(arg.parse().map_err(|_| bad())?),
            "pct" => SelectionRule::Percentile(arg.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        rule.validate()?;
        Ok(rule)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionOutcome {
    pub rule: SelectionRule,
    pub budget: usize,
    /// 0-based trajectory position of the chosen configuration.
    pub chosen_index: usize,
    pub chosen_val: f64,
    pub chosen_test: f64,
    /// Chosen test error minus the best incumbent test error within the
    /// budget. Negative when a percentile pick beats every incumbent.
    pub final_ot: f64,
    /// Chosen test error minus the best test error within the budget.
    pub final_tr: f64,
    pub delta_vs_naive_test: f64,
}

/// Position of the nearest-rank `k` percentile of validation error, ties in
/// evaluation order: rank `ceil(k * (T - 1)) + 1` of the ascending order.
pub fn percentile_position(val: &[f64], k: f64) -> usize {
    let mut order: Vec<usize> = (0..val.len()).collect();
    order.sort_by(|&a, &b| val[a].total_cmp(&val[b]).then(a.cmp(&b)));
    let rank = (k * (val.len() - 1) as f64 - 1e-9).ceil().max(0.0) as usize;
    order[rank.min(val.len() - 1)]
}

pub fn apply_rule(traj: &ScoreTrajectory, rule: SelectionRule) -> Result<SelectionOutcome> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let budget = rule.budget(traj.len())?;
    let trace = incumbent_trace(traj);
    let chosen_index = match rule {
        SelectionRule::Percentile(k) => percentile_position(traj.val(), k),
        _ => trace.incumbent_index[budget - 1],
    };
    let chosen_test = traj.test()[chosen_index];
    let naive_test = trace.incumbent_test[traj.len() - 1];
    let best_test = traj.test()[..budget]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(SelectionOutcome {
        rule,
        budget,
        chosen_index,
        chosen_val: traj.val()[chosen_index],
        chosen_test,
        final_ot: chosen_test - trace.best_incumbent_test_so_far[budget - 1],
        final_tr: chosen_test - best_test,
        delta_vs_naive_test: chosen_test - naive_test,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleSummary {
    pub rule: SelectionRule,
    pub mean_delta_test: f64,
    pub mean_final_ot: f64,
    /// Share of runs where the rule's pick has strictly lower test error
    /// than the naive pick.
    pub win_fraction: f64,
    pub n: usize,
    pub n_excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub rule: SelectionRule,
    pub key: RunKey,
    pub delta_ot: f64,
    pub delta_test: f64,
}

/// Sign quadrants of (delta_ot, delta_test); points with either delta
/// exactly zero are counted on the axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct QuadrantCounts {
    pub ot_up_test_up: usize,
    pub ot_up_test_down: usize,
    pub ot_down_test_up: usize,
    pub ot_down_test_down: usize,
    pub on_axis: usize,
}

impl QuadrantCounts {
    fn add(&mut self, delta_ot: f64, delta_test: f64) {
        match (
            delta_ot > 0.0,
            delta_ot < 0.0,
            delta_test > 0.0,
            delta_test < 0.0,
        ) {
            (true, _, true, _) => self.ot_up_test_up += 1,
            (true, _, _, true) => self.ot_up_test_down += 1,
            (_, true, true, _) => self.ot_down_test_up += 1,
            (_, true, _, true) => self.ot_down_test_down += 1,
            _ => self.on_axis += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleSweep {
    pub summaries: Vec<RuleSummary>,
    pub scatter: Vec<ScatterPoint>,
    pub quadrants: Vec<(SelectionRule, QuadrantCounts)>,
}

/// Applies every rule to every run. Runs on which a rule is not applicable
/// (a stop budget beyond their length) are excluded from that rule.
pub fn rule_sweep(corpus: &[Run], rules: &[SelectionRule]) -> Result<RuleSweep> {
    if corpus.is_empty() {
        return Err(Error::arg("empty corpus"));
    }
    if rules.is_empty() {
        return Err(Error::arg("no selection rules given"));
    }
    for rule in rules {
        rule.validate()?;
    }
    let per_run = crate::par::map(corpus, |run| {
        let naive = apply_rule(&run.trajectory, SelectionRule::NaiveArgmin)?;
        let outcomes: Vec<Option<SelectionOutcome>> = rules
            .iter()
            .map(|&rule| apply_rule(&run.trajectory, rule).ok())
            .collect();
        Ok::<_, Error>((naive, outcomes))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut summaries = Vec::with_capacity(rules.len());
    let mut scatter = Vec::new();
    let mut quadrants = Vec::with_capacity(rules.len());
    for (j, &rule) in rules.iter().enumerate() {
        let (mut sum_delta, mut sum_ot, mut wins, mut n) = (0.0, 0.0, 0usize, 0usize);
        let mut quad = QuadrantCounts::default();
        for (run, (naive, outcomes)) in corpus.iter().zip(&per_run) {
            let Some(out) = &outcomes[j] else { continue };
            debug_assert_eq!(out.delta_vs_naive_test, out.chosen_test - naive.chosen_test);
            let delta_ot = out.final_ot - naive.final_ot;
            sum_delta += out.delta_vs_naive_test;
            sum_ot += out.final_ot;
            wins += usize::from(out.delta_vs_naive_test < 0.0);
            n += 1;
            quad.add(delta_ot, out.delta_vs_naive_test);
            scatter.push(ScatterPoint {
                rule,
                key: run.key.clone(),
                delta_ot,
                delta_test: out.delta_vs_naive_test,
            });
        }
        let denom = n.max(1) as f64;
        summaries.push(RuleSummary {
            rule,
            mean_delta_test: sum_delta / denom,
            mean_final_ot: sum_ot / denom,
            win_fraction: wins as f64 / denom,
            n,
            n_excluded: corpus.len() - n,
        });
        quadrants.push((rule, quad));
    }
    Ok(RuleSweep {
        summaries,
        scatter,
        quadrants,
    })
}

impl RuleSweep {
    pub fn rules_table(&self) -> Table {
        let mut t = Table::new([
            "rule",
            "mean_delta_test",
            "mean_final_ot",
            "win_fraction",
            "n",
        ]);
        for s in &self.summaries {
            t.push(vec![
                s.rule.to_string().into(),
                s.mean_delta_test.into(),
                s.mean_final_ot.into(),
                s.win_fraction.into(),
                s.n.into(),
            ]);
        }
        t
    }

    pub fn scatter_table(&self) -> Table {
        let mut columns = vec!["rule"];
        columns.extend(KEY_FIELDS);
        columns.extend(["delta_ot", "delta_test"]);
        let mut t = Table::new(columns);
        for p in &self.scatter {
            let mut row = vec![Cell::from(p.rule.to_string())];
            row.extend(key_cells(&p.key));
            row.extend([p.delta_ot.into(), p.delta_test.into()]);
            t.push(row);
        }
        t
    }

    pub fn quadrants_table(&self) -> Table {
        let mut t = Table::new([
            "rule",
            "ot_up_test_up",
            "ot_up_test_down",
            "ot_down_test_up",
            "ot_down_test_down",
            "on_axis",
        ]);
        for (rule, q) in &self.quadrants {
            t.push(vec![
                rule.to_string().into(),
                q.ot_up_test_up.into(),
                q.ot_up_test_down.into(),
                q.ot_down_test_up.into(),
                q.ot_down_test_down.into(),
                q.on_axis.into(),
            ]);
        }
        t
    }
}
