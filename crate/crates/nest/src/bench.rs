//! Step-count benchmarks driven by a manifest.
//!
//! One job per line, `#` starts a comment:
//!
//! ```text
//! random z=120 seeds=0..3
//! rough-rectangle z=800 s=10sqrt group=wide
//! rough-rectangle z=3200 s=z^0.8
//! fixture name=spiral
//! ```
//!
//! `s` is an integer, `10sqrt` for the ceiling of ten times the square root of
//! `z`, or `z^p` for the ceiling of `z` to the power `p`. Rows are grouped by
//! `group`, which defaults to the family name.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nest_core::procedures::RunOptions;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::instance::{self, InstanceError, InstanceSpec};
use crate::run;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Instance { line: usize, source: InstanceError },
}

#[derive(Clone, Debug, PartialEq)]
pub enum SideRule {
    Fixed(u64),
    TenSqrt,
    Power(f64),
}

impl SideRule {
    pub fn resolve(&self, z: u64) -> u64 {
        match self {
            SideRule::Fixed(s) => *s,
            SideRule::TenSqrt => (10.0 * (z as f64).sqrt()).ceil() as u64,
            SideRule::Power(p) => (z as f64).powf(*p).ceil() as u64,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Job {
    pub group: String,
    pub spec: InstanceSpec,
}

fn parse_side(v: &str) -> Option<SideRule> {
    if v == "10sqrt" {
        return Some(SideRule::TenSqrt);
    }
    if let Some(p) = v.strip_prefix("z^") {
        return p.parse().ok().map(SideRule::Power);
    }
    v.parse().ok().map(SideRule::Fixed)
}

fn parse_range(v: &str) -> Option<std::ops::Range<u64>> {
    match v.split_once("..") {
        Some((a, b)) => Some(a.parse().ok()?..b.parse().ok()?),
        None => {
            let a: u64 = v.parse().ok()?;
            Some(a..a + 1)
        }
    }
}

/// Expands a manifest into jobs, in manifest order.
pub fn parse_manifest(text: &str) -> Result<Vec<Job>, ManifestError> {
    let mut jobs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let bad = |msg: String| ManifestError::Syntax { line, msg };
        let mut words = content.split_whitespace();
        let family = words.next().expect("non-empty line");
        let mut params = BTreeMap::new();
        for w in words {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got {w:?}")))?;
            params.insert(k, v);
        }
        let group = params.remove("group").unwrap_or(family).to_string();
        let z = params
            .remove("z")
            .map(|v| v.parse::<u64>().map_err(|_| bad(format!("bad z {v:?}"))))
            .transpose()?;
        let need_z = || z.ok_or_else(|| bad("missing z".into()));
        let wrap = |source| ManifestError::Instance { line, source };
        let specs: Vec<InstanceSpec> = match family {
            "random" => {
                let z = need_z()?;
                let seeds = params.remove("seeds").unwrap_or("0");
                let seeds =
                    parse_range(seeds).ok_or_else(|| bad(format!("bad seeds {seeds:?}")))?;
                seeds
                    .map(|seed| instance::gen_random_connected(z, seed).map_err(wrap))
                    .collect::<Result<_, _>>()?
            }
            "rough-rectangle" => {
                let z = need_z()?;
                let s = params.remove("s").ok_or_else(|| bad("missing s".into()))?;
                let rule = parse_side(s).ok_or_else(|| bad(format!("bad s {s:?}")))?;
                vec![instance::gen_rough_rectangle(z, rule.resolve(z)).map_err(wrap)?]
            }
            "fixture" => {
                let name = params
                    .remove("name")
                    .ok_or_else(|| bad("missing name".into()))?;
                vec![instance::fixture(name).map_err(wrap)?]
            }
            _ => return Err(bad(format!("unknown family {family:?}"))),
        };
        if let Some(k) = params.keys().next() {
            return Err(bad(format!("unknown key {k:?}")));
        }
        jobs.extend(specs.into_iter().map(|spec| Job {
            group: group.clone(),
            spec,
        }));
    }
    Ok(jobs)
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub group: String,
    pub label: String,
    pub z: u64,
    pub s: u64,
    pub steps: u64,
    /// `steps / (s * z)`; zero when `s` is zero.
    pub ratio: f64,
    pub nest_ok: bool,
    pub violations: u64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupSummary {
    pub group: String,
    pub count: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `max_ratio / min_ratio`, over rows with a positive ratio.
    pub spread: f64,
    pub all_ok: bool,
}

pub fn run_job(job: &Job, options: RunOptions) -> BenchRow {
    let spec = &job.spec;
    let mut row = BenchRow {
        group: job.group.clone(),
        label: spec.label.clone(),
        z: spec.z(),
        s: spec.field.span(),
        steps: 0,
        ratio: 0.0,
        nest_ok: false,
        violations: 0,
        error: None,
    };
    match run::run(spec, options) {
        Ok(summary) => {
            row.steps = summary.steps;
            row.nest_ok = summary.nest_ok;
            row.violations = summary.invariant_violations;
            if row.s > 0 {
                row.ratio = summary.steps as f64 / (row.s * row.z) as f64;
            }
        }
        Err(failure) => row.error = Some(failure.error.to_string()),
    }
    row
}

/// Runs all jobs in parallel; rows keep manifest order.
pub fn run_jobs(jobs: &[Job], options: RunOptions) -> Vec<BenchRow> {
    jobs.par_iter().map(|job| run_job(job, options)).collect()
}

pub fn summarize(rows: &[BenchRow]) -> Vec<GroupSummary> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<&BenchRow>> = BTreeMap::new();
    for row in rows {
        if !groups.contains_key(row.group.as_str()) {
            order.push(row.group.clone());
        }
        groups.entry(&row.group).or_default().push(row);
    }
    order
        .iter()
        .map(|g| {
            let members = &groups[g.as_str()];
            let ratios: Vec<f64> = members
                .iter()
                .map(|r| r.ratio)
                .filter(|r| *r > 0.0)
                .collect();
            let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
            let spread = if ratios.is_empty() {
                1.0
            } else {
                max_ratio / min_ratio
            };
            GroupSummary {
                group: g.clone(),
                count: members.len(),
                min_ratio: if ratios.is_empty() { 0.0 } else { min_ratio },
                max_ratio,
                spread,
                all_ok: members
                    .iter()
                    .all(|r| r.nest_ok && r.violations == 0 && r.error.is_none()),
            }
        })
        .collect()
}

/// Comma-separated rows followed by one summary line per group.
pub fn format_table(rows: &[BenchRow], summaries: &[GroupSummary]) -> String {
    let mut out = String::from("group,label,z,s,steps,ratio,nest_ok,violations\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6},{},{}",
            r.group, r.label, r.z, r.s, r.steps, r.ratio, r.nest_ok, r.violations
        );
    }
    for g in summaries {
        let _ = writeln!(
            out,
            "# {}: n={} min={:.6} max={:.6} max/min={:.3} ok={}",
            g.group, g.count, g.min_ratio, g.max_ratio, g.spread, g.all_ok
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_expands_in_order() {
        let jobs = parse_manifest("# sizes\nrandom z=20 seeds=3..5\n\nfixture name=plus group=tiny\nrough-rectangle z=200 s=10sqrt\n").unwrap();
        let labels: Vec<&str> = jobs.iter().map(|j| j.spec.label.as_str()).collect();
        assert_eq!(
            labels,
            ["random-20-3", "random-20-4", "plus", "rect-200-142"]
        );
        assert_eq!(jobs[2].group, "tiny");
    }

    #[test]
    fn side_rules() {
        assert_eq!(SideRule::TenSqrt.resolve(200), 142);
        assert_eq!(SideRule::Power(0.8).resolve(3200), 637);
        assert_eq!(parse_side("17"), Some(SideRule::Fixed(17)));
        assert_eq!(parse_side("q"), None);
    }

    #[test]
    fn manifest_errors() {
        assert!(matches!(
            parse_manifest("random seeds=1"),
            Err(ManifestError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_manifest("\nhexagon z=3"),
            Err(ManifestError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_manifest("random z=5 colour=red"),
            Err(ManifestError::Syntax { .. })
        ));
        assert!(matches!(
            parse_manifest("rough-rectangle z=5 s=9"),
            Err(ManifestError::Instance { .. })
        ));
    }

    #[test]
    fn empty_manifest_gives_empty_table() {
        let jobs = parse_manifest("").unwrap();
        let rows = run_jobs(&jobs, RunOptions::default());
        assert!(rows.is_empty());
        assert_eq!(
            format_table(&rows, &summarize(&rows)),
            "group,label,z,s,steps,ratio,nest_ok,violations\n"
        );
    }
}
