//! Test-only reference implementations, written independently of the
//! streaming code paths they check.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Metrics recomputed from scratch for every prefix.
pub struct Reference {
    pub incumbent: Vec<usize>,
    pub ot: Vec<f64>,
    pub of: Vec<f64>,
    pub tr: Vec<f64>,
    pub denominator: Vec<f64>,
}

/// First position holding the minimum validation error of `val[..=t]`.
pub fn prefix_argmin(val: &[f64], t: usize) -> usize {
    let mut best = 0;
    for i in 0..=t {
        if val[i] < val[best] {
            best = i;
        }
    }
    // earliest among exact ties
    (0..=t).find(|&i| val[i] == val[best]).unwrap()
}

pub fn reference(val: &[f64], test: &[f64]) -> Reference {
    let n = val.len();
    let mut r = Reference {
        incumbent: vec![],
        ot: vec![],
        of: vec![],
        tr: vec![],
        denominator: vec![],
    };
    for t in 0..n {
        let inc = prefix_argmin(val, t);
        let past_incumbent_tests: Vec<f64> = (0..=t).map(|s| test[prefix_argmin(val, s)]).collect();
        let best_inc = past_incumbent_tests
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let best_any = test[..=t].iter().cloned().fold(f64::INFINITY, f64::min);
        r.incumbent.push(inc);
        r.ot.push(test[inc] - best_inc);
        r.of.push(test[inc] - val[inc]);
        r.tr.push(test[inc] - best_any);
        r.denominator.push(test[prefix_argmin(val, 0)] - best_inc);
    }
    r
}

/// Random trajectory with values on a coarse grid so ties occur.
pub fn random_trajectory(rng: &mut ChaCha8Rng, max_len: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rng.random_range(1..=max_len);
    let coarse = rng.random_bool(0.5);
    let draw = |rng: &mut ChaCha8Rng| {
        if coarse {
            rng.random_range(0..20) as f64 / 20.0
        } else {
            rng.random::<f64>()
        }
    };
    let val = (0..n).map(|_| draw(rng)).collect();
    let test = (0..n).map(|_| draw(rng)).collect();
    (val, test)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All size-`m` subsets of `0..n` in increasing order.
pub fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, m, &mut Vec::new(), &mut out);
    out
}

/// Exact expected incumbent val/test per iteration when a uniformly random
/// size-`m` subset is taken in original order.
pub fn subset_average(val: &[f64], test: &[f64], m: usize) -> (Vec<f64>, Vec<f64>) {
    let all = subsets(val.len(), m);
    let mut mv = vec![0.0; m];
    let mut mt = vec![0.0; m];
    for s in &all {
        let sv: Vec<f64> = s.iter().map(|&i| val[i]).collect();
        for t in 0..m {
            let inc = s[prefix_argmin(&sv, t)];
            mv[t] += val[inc];
            mt[t] += test[inc];
        }
    }
    let k = all.len() as f64;
    (
        mv.iter().map(|x| x / k).collect(),
        mt.iter().map(|x| x / k).collect(),
    )
}

/// Runs the command-line binary with `args`, returning the exit code.
pub fn overtune(args: &[&str]) -> (i32, String) {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_overtune"))
        .args(args)
        .output()
        .expect("spawn overtune");
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    (out.status.code().unwrap_or(-1), stderr)
}

pub fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Header and rows of a small unquoted CSV file.
pub fn read_csv(path: &std::path::Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_owned)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    (header, rows)
}
