//! JSON renderings of reports, executions and solutions. Key order is fixed
//! by struct field order so output is byte-stable.

use serde::Serialize;

use crate::control::{ControllabilityReport, OdcExecution, Verdict, Witness};
use crate::dynamic::AnnotatedStpu;
use crate::preference::{Level, PreferenceGrid};
use crate::stp::{Interval, Schedule, Stp, TimePointId, INF};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeJson {
    pub from: String,
    pub to: String,
    /// `null` when unbounded.
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WaitJson {
    pub from: String,
    pub to: String,
    pub contingent: String,
    pub wait: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct WitnessJson {
    pub constraints: Vec<EdgeJson>,
    pub waits: Vec<WaitJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimingsJson {
    pub levels_examined: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportJson {
    pub property: String,
    pub verdict: String,
    pub level_num: Option<u32>,
    pub level_denom: Option<u32>,
    pub stop_event: Option<String>,
    pub witness: WitnessJson,
    pub timings: TimingsJson,
}

fn bound(v: i64) -> Option<i64> {
    (v.abs() < INF).then_some(v)
}

fn edge(from: &str, to: &str, iv: Interval) -> EdgeJson {
    EdgeJson {
        from: from.to_string(),
        to: to.to_string(),
        lo: bound(iv.lo),
        hi: bound(iv.hi),
    }
}

/// Bounded edges `i -> j` with `i < j`, named through `name`.
fn edges(stp: &Stp, name: impl Fn(usize) -> String) -> Vec<EdgeJson> {
    let mut out = Vec::new();
    for i in 0..stp.len() {
        for j in i + 1..stp.len() {
            if let Some(iv) = stp.interval(TimePointId(i), TimePointId(j)) {
                if iv != Interval::unbounded() {
                    out.push(edge(&name(i), &name(j), iv));
                }
            }
        }
    }
    out
}

pub fn annotated_witness(a: &AnnotatedStpu) -> WitnessJson {
    let names = a.stpu.names();
    WitnessJson {
        constraints: edges(a.stpu.stp(), |i| names[i].clone()),
        waits: a
            .wait_list()
            .into_iter()
            .map(|(f, t, c, w)| WaitJson {
                from: names[f.0].clone(),
                to: names[t.0].clone(),
                contingent: names[c.0].clone(),
                wait: w,
            })
            .collect(),
    }
}

fn witness(w: &Witness, names: &[String]) -> WitnessJson {
    match w {
        Witness::Strong { network, .. } => WitnessJson {
            constraints: edges(&network.stp, |i| names[network.ids[i].0].clone()),
            waits: Vec::new(),
        },
        Witness::Dynamic(r) => annotated_witness(&r.network),
        Witness::Weak(_) | Witness::Nothing => WitnessJson::default(),
    }
}

fn level_parts(v: &Verdict, grid: PreferenceGrid) -> (Option<u32>, Option<u32>) {
    match v.level() {
        Some(l) => (Some(l.0), Some(grid.denom())),
        None => (None, None),
    }
}

pub fn report_json(r: &ControllabilityReport, names: &[String]) -> ReportJson {
    let (level_num, level_denom) = level_parts(&r.verdict, r.grid);
    ReportJson {
        property: r.property.label().to_string(),
        verdict: r.verdict.label().to_string(),
        level_num,
        level_denom,
        stop_event: r.stop_event.map(|e| e.code().to_string()),
        witness: witness(&r.witness, names),
        timings: TimingsJson {
            levels_examined: r.levels_examined,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleJson {
    pub property: String,
    pub verdict: String,
    pub level_num: Option<u32>,
    pub level_denom: Option<u32>,
}

pub fn oracle_json(property: &str, v: &Verdict, grid: PreferenceGrid) -> OracleJson {
    let (level_num, level_denom) = level_parts(v, grid);
    OracleJson {
        property: property.to_string(),
        verdict: v.label().to_string(),
        level_num,
        level_denom,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssignmentJson {
    pub point: String,
    pub time: i64,
}

fn assignments(s: &Schedule, names: &[String]) -> Vec<AssignmentJson> {
    names
        .iter()
        .zip(&s.values)
        .map(|(n, &t)| AssignmentJson { point: n.clone(), time: t })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExecutionJson {
    pub schedule: Vec<AssignmentJson>,
    pub achieved_num: u32,
    pub achieved_denom: u32,
    pub final_level_num: u32,
}

pub fn execution_json(e: &OdcExecution, names: &[String], grid: PreferenceGrid) -> ExecutionJson {
    ExecutionJson {
        schedule: assignments(&e.schedule, names),
        achieved_num: e.achieved.0,
        achieved_denom: grid.denom(),
        final_level_num: e.final_level.0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolutionJson {
    pub opt_num: u32,
    pub opt_denom: u32,
    pub constraints: Vec<EdgeJson>,
    pub earliest: Vec<AssignmentJson>,
}

pub fn solution_json(opt: Level, minimal: &Stp, earliest: &Schedule, grid: PreferenceGrid) -> SolutionJson {
    let names = minimal.names();
    SolutionJson {
        opt_num: opt.0,
        opt_denom: grid.denom(),
        constraints: edges(minimal, |i| names[i].clone()),
        earliest: assignments(earliest, names),
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::best_sc;
    use crate::fixtures;
    use crate::preference::SoftProblem;

    #[test]
    fn eos_strong_report() {
        let p = fixtures::eos();
        let j = report_json(&best_sc(&p), p.names());
        assert_eq!(j.verdict, "at_level");
        assert_eq!((j.level_num, j.level_denom), (Some(9), Some(10)));
        assert_eq!(j.stop_event.as_deref(), Some("E4"));
        let sa = j.witness.constraints.iter().find(|e| e.from == "SC" && e.to == "SA").unwrap();
        assert_eq!((sa.lo, sa.hi), (Some(4), Some(4)));
    }

    #[test]
    fn key_order_is_fixed() {
        let p = fixtures::eos();
        let s = to_json(&report_json(&best_sc(&p), p.names()));
        let keys = ["\"property\"", "\"verdict\"", "\"level_num\"", "\"level_denom\"", "\"stop_event\"", "\"witness\"", "\"timings\""];
        let pos: Vec<usize> = keys.iter().map(|k| s.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }
}
