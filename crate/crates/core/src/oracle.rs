//! Exhaustive ground truth for small problems.
//!
//! Everything here enumerates: situations, control sequences, and execution
//! histories. Caps turn runaway searches into an explicit inconclusive
//! result rather than a guess.

use std::collections::HashMap;

use thiserror::Error;

use crate::control::{Stppu, Verdict};
use crate::preference::{self, Level, SoftProblem};
use crate::stp::{self, Interval, Schedule, TimePointId, INF};
use crate::stpu::{self, PointKind, Situation, Stpu};

pub const DEFAULT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBounds {
    /// Bound on every schedule value; derived from the problem when `None`.
    pub horizon: Option<i64>,
    pub max_situations: usize,
    pub max_sequences: usize,
    pub max_states: usize,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            horizon: None,
            max_situations: DEFAULT_CAP,
            max_sequences: DEFAULT_CAP,
            max_states: DEFAULT_CAP,
        }
    }
}

impl SearchBounds {
    /// Defaults, with every cap replaced by `STPPU_MAX_STATES` when set.
    pub fn from_env() -> SearchBounds {
        let mut b = SearchBounds::default();
        if let Some(cap) = std::env::var("STPPU_MAX_STATES")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
        {
            b.max_situations = cap;
            b.max_sequences = cap;
            b.max_states = cap;
        }
        b
    }

    pub fn with_horizon(mut self, h: i64) -> SearchBounds {
        self.horizon = Some(h);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle inconclusive: {0}")]
    Inconclusive(String),
}

fn inconclusive(msg: impl Into<String>) -> OracleError {
    OracleError::Inconclusive(msg.into())
}

/// Every integer situation of the problem.
pub fn enumerate_situations(u: &Stpu, b: &SearchBounds) -> Result<Vec<Situation>, OracleError> {
    stpu::all_situations(u, b.max_situations as u128).map_err(|e| inconclusive(e.to_string()))
}

/// Best preference of the projection, `None` if it has no solution.
pub fn projection_opt(p: &Stppu, w: &Situation) -> Option<Level> {
    let proj = p.project(w).ok()?;
    preference::solve_stpp(&proj).ok().map(|(l, _)| l)
}

/// Same as [`projection_opt`] by raw maximization over integer schedules.
pub fn projection_opt_brute(p: &Stppu, w: &Situation, b: &SearchBounds) -> Result<Option<Level>, OracleError> {
    let proj = p.project(w).map_err(|e| inconclusive(e.to_string()))?;
    let Some(ranges) = value_ranges(&proj.strip(), b)? else {
        return Ok(None);
    };
    let mut best: Option<Level> = None;
    let mut count = 0usize;
    for_each_assignment(&ranges, |vals| {
        count += 1;
        if let Ok(l) = preference::schedule_preference(&Schedule::new(vals.to_vec()), &proj) {
            best = best.max(Some(l));
        }
        count <= b.max_sequences
    });
    if count > b.max_sequences {
        return Err(inconclusive("schedule enumeration cap exceeded"));
    }
    Ok(best)
}

/// Per time-point value ranges from the minimal network; `None` if
/// inconsistent. Fails when a range is unbounded or beyond the horizon.
fn value_ranges(u: &Stpu, b: &SearchBounds) -> Result<Option<Vec<Interval>>, OracleError> {
    let Ok(m) = stp::close_distances(u.stp()) else {
        return Ok(None);
    };
    let h = horizon_of(u, b)?;
    let mut out = Vec::with_capacity(u.len());
    for i in 0..u.len() {
        let iv = m.interval(0, i);
        if iv.lo < -h || iv.hi > h {
            return Err(inconclusive(format!("time-point {i} ranges over {iv}, beyond horizon {h}")));
        }
        out.push(iv);
    }
    Ok(Some(out))
}

fn horizon_of(u: &Stpu, b: &SearchBounds) -> Result<i64, OracleError> {
    let m = stp::close_distances(u.stp()).map_err(|_| inconclusive("inconsistent network"))?;
    let needed = (0..u.len())
        .map(|i| m.get(0, i).max(m.get(i, 0)))
        .max()
        .unwrap_or(0);
    if needed >= INF {
        return Err(inconclusive("some time-point is unbounded"));
    }
    match b.horizon {
        Some(h) if h < needed => Err(inconclusive(format!("horizon {h} below required {needed}"))),
        Some(h) => Ok(h),
        None => Ok(needed),
    }
}

fn for_each_assignment(ranges: &[Interval], mut f: impl FnMut(&[i64]) -> bool) {
    let mut vals: Vec<i64> = ranges.iter().map(|r| r.lo).collect();
    if ranges.is_empty() {
        f(&vals);
        return;
    }
    loop {
        if !f(&vals) {
            return;
        }
        let mut k = 0;
        loop {
            if k == ranges.len() {
                return;
            }
            if vals[k] < ranges[k].hi {
                vals[k] += 1;
                break;
            }
            vals[k] = ranges[k].lo;
            k += 1;
        }
    }
}

/// Per-situation optima; `None` if some projection has no solution.
fn situation_optima(p: &Stppu, b: &SearchBounds) -> Result<Option<Vec<(Situation, Level)>>, OracleError> {
    let sits = enumerate_situations(&p.strip(), b)?;
    let mut out = Vec::with_capacity(sits.len());
    for w in sits {
        match projection_opt(p, &w) {
            Some(l) => out.push((w, l)),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// Weak controllability: every projection has a solution.
pub fn oracle_wc(p: &Stppu, b: &SearchBounds) -> Result<bool, OracleError> {
    let u = p.strip();
    for w in enumerate_situations(&u, b)? {
        let proj = stpu::project(&u, &w).map_err(|e| inconclusive(e.to_string()))?;
        if stp::close_distances(&proj).is_err() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn verdict_from(value: Option<u32>, top: u32) -> Verdict {
    match value {
        None => Verdict::None,
        Some(v) if v > top => Verdict::Optimal(Level(top)),
        Some(v) => Verdict::AtLevel(Level(v)),
    }
}

/// Rewrites `Optimal(top)` into `Optimal(opt)` where `opt` is the best
/// preference over all situations.
fn with_opt(v: Verdict, optima: &[(Situation, Level)]) -> Verdict {
    match v {
        Verdict::Optimal(_) => Verdict::Optimal(optima.iter().map(|o| o.1).max().unwrap_or(Level(0))),
        other => other,
    }
}

/// Highest level certified by a single control sequence.
///
/// A sequence certifies `α` when, in every situation, it is a solution whose
/// preference is at least `min(opt, α)`.
pub fn oracle_sc_level(p: &Stppu, b: &SearchBounds) -> Result<Verdict, OracleError> {
    let Some(optima) = situation_optima(p, b)? else {
        return Ok(Verdict::None);
    };
    let u = p.strip();
    let top = p.grid().top().0;
    let execs: Vec<TimePointId> = u.executables().collect();
    let Some(ranges) = value_ranges(&u, b)? else {
        return Ok(Verdict::None);
    };
    let exec_ranges: Vec<Interval> = execs.iter().map(|e| ranges[e.0]).collect();
    let count: u128 = exec_ranges
        .iter()
        .fold(1u128, |a, r| a.saturating_mul((r.hi - r.lo + 1) as u128));
    if count > b.max_sequences as u128 {
        return Err(inconclusive(format!("{count} control sequences exceed the cap")));
    }
    let links = u.links().to_vec();
    let mut best: Option<u32> = None;
    let mut sched = vec![0i64; u.len()];
    for_each_assignment(&exec_ranges, |vals| {
        for (e, &v) in execs.iter().zip(vals) {
            sched[e.0] = v;
        }
        let mut level = top + 1;
        for (w, opt) in &optima {
            for (l, &d) in links.iter().zip(&w.durations) {
                sched[l.contingent.0] = sched[l.activation.0] + d;
            }
            match preference::schedule_preference(&Schedule::new(sched.clone()), p) {
                Err(_) => return true,
                Ok(pref) if pref < *opt => level = level.min(pref.0),
                Ok(_) => {}
            }
            if best.is_some_and(|bv| level <= bv) {
                return true;
            }
        }
        best = best.max(Some(level));
        best != Some(top + 1)
    });
    Ok(with_opt(verdict_from(best, top), &optima))
}

const FAIL: i32 = -1;

struct DcSearch<'a> {
    p: &'a Stppu,
    n: usize,
    exec: Vec<bool>,
    /// (activation, lo, hi) per point; `None` for executables.
    link: Vec<Option<(usize, i64, i64)>>,
    link_order: Vec<usize>,
    /// Constraints as (from, to, interval) for incremental checks.
    cons: Vec<(usize, usize, Interval)>,
    optima: HashMap<Vec<i64>, u32>,
    horizon: i64,
    top: u32,
    memo: HashMap<(i64, Vec<Option<i64>>), i32>,
    cap: usize,
    overflow: bool,
}

impl DcSearch<'_> {
    fn consistent_with(&self, vals: &[Option<i64>], i: usize) -> bool {
        let vi = vals[i].expect("just assigned");
        self.cons.iter().all(|&(a, b, iv)| {
            let (x, y) = if a == i {
                (Some(vi), vals[b])
            } else if b == i {
                (vals[a], Some(vi))
            } else {
                return true;
            };
            match (x, y) {
                (Some(x), Some(y)) => iv.contains(y - x),
                _ => true,
            }
        })
    }

    fn leaf(&self, vals: &[Option<i64>]) -> i32 {
        let s = Schedule::new(vals.iter().map(|v| v.expect("complete")).collect());
        let Ok(pref) = preference::schedule_preference(&s, self.p) else {
            return FAIL;
        };
        let key: Vec<i64> = self
            .link_order
            .iter()
            .map(|&c| s.values[c] - s.values[self.link[c].expect("contingent").0])
            .collect();
        let opt = self.optima[&key];
        if pref.0 >= opt {
            (self.top + 1) as i32
        } else {
            pref.0 as i32
        }
    }

    /// Nature decides which pending contingents occur at `t`.
    fn nature(&mut self, t: i64, vals: &mut Vec<Option<i64>>) -> i32 {
        let mut forced = Vec::new();
        let mut optional = Vec::new();
        for c in 0..self.n {
            let Some((a, lo, hi)) = self.link[c] else { continue };
            if vals[c].is_some() {
                continue;
            }
            let Some(va) = vals[a] else { continue };
            if va + hi == t {
                forced.push(c);
            } else if va + lo <= t && t < va + hi {
                optional.push(c);
            }
        }
        self.branch_nature(t, vals, &forced, &optional)
    }

    /// AND over every subset of `optional` together with `forced`.
    fn branch_nature(&mut self, t: i64, vals: &mut Vec<Option<i64>>, forced: &[usize], optional: &[usize]) -> i32 {
        let mut worst = i32::MAX;
        for mask in 0u32..(1 << optional.len()) {
            let chosen: Vec<usize> = forced
                .iter()
                .copied()
                .chain(optional.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, &c)| c))
                .collect();
            for &c in &chosen {
                vals[c] = Some(t);
            }
            let ok = chosen.iter().all(|&c| self.consistent_with(vals, c));
            let v = if ok { self.exec_phase(t, vals) } else { FAIL };
            for &c in &chosen {
                vals[c] = None;
            }
            worst = worst.min(v);
            if worst == FAIL {
                break;
            }
        }
        worst
    }

    /// The executor picks a set of executables to fire at `t`, or waits.
    fn exec_phase(&mut self, t: i64, vals: &mut Vec<Option<i64>>) -> i32 {
        if vals.iter().all(Option::is_some) {
            return self.leaf(vals);
        }
        if t > self.horizon {
            return FAIL;
        }
        let key = (t, vals.clone());
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        if self.memo.len() >= self.cap {
            self.overflow = true;
            return FAIL;
        }
        let pending: Vec<usize> = (0..self.n).filter(|&i| self.exec[i] && vals[i].is_none()).collect();
        let mut best = FAIL;
        for mask in 0u32..(1 << pending.len()) {
            let chosen: Vec<usize> = pending
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, &i)| i)
                .collect();
            let v = if chosen.is_empty() {
                if self.deadline_missed(t, vals) {
                    FAIL
                } else {
                    self.nature(t + 1, vals)
                }
            } else {
                for &i in &chosen {
                    vals[i] = Some(t);
                }
                let v = if chosen.iter().all(|&i| self.consistent_with(vals, i)) {
                    let fresh: Vec<usize> = (0..self.n)
                        .filter(|&c| matches!(self.link[c], Some((a, 0, _)) if chosen.contains(&a)))
                        .collect();
                    if fresh.is_empty() {
                        if self.deadline_missed(t, vals) {
                            FAIL
                        } else {
                            self.nature(t + 1, vals)
                        }
                    } else {
                        let forced: Vec<usize> = fresh.iter().copied().filter(|&c| self.link[c].expect("link").2 == 0).collect();
                        let optional: Vec<usize> = fresh.iter().copied().filter(|&c| self.link[c].expect("link").2 > 0).collect();
                        self.branch_nature(t, vals, &forced, &optional)
                    }
                } else {
                    FAIL
                };
                for &i in &chosen {
                    vals[i] = None;
                }
                v
            };
            best = best.max(v);
            if best > self.top as i32 {
                break;
            }
        }
        self.memo.insert(key, best);
        best
    }

    /// Some unexecuted executable can no longer be placed after `t`.
    fn deadline_missed(&self, t: i64, vals: &[Option<i64>]) -> bool {
        self.cons.iter().any(|&(a, b, iv)| match (vals[a], vals[b]) {
            (Some(x), None) if self.exec[b] => x + iv.hi <= t,
            (None, Some(y)) if self.exec[a] => y - iv.lo <= t,
            _ => false,
        })
    }
}

/// Highest level certified by a history-dependent strategy.
///
/// AND-OR search over integer instants: nature's occurrences at an instant
/// are visible before the executor decides at that instant. Memoized on the
/// observable history, so decisions depend on the past only.
pub fn oracle_dc_level(p: &Stppu, b: &SearchBounds) -> Result<Verdict, OracleError> {
    let Some(optima) = situation_optima(p, b)? else {
        return Ok(Verdict::None);
    };
    let u = p.strip();
    let horizon = horizon_of(&u, b)?;
    if let Ok(m) = stp::close_distances(u.stp()) {
        if (0..u.len()).any(|i| m.get(i, 0) > 0) {
            return Err(inconclusive("time-points before the origin are not searched"));
        }
    }
    let n = u.len();
    let mut link = vec![None; n];
    for l in u.links() {
        let iv = u.link_interval(l);
        link[l.contingent.0] = Some((l.activation.0, iv.lo, iv.hi));
    }
    let top = p.grid().top().0;
    let mut search = DcSearch {
        p,
        n,
        exec: u.kinds().iter().map(|k| *k == PointKind::Executable).collect(),
        link,
        link_order: u.links().iter().map(|l| l.contingent.0).collect(),
        cons: p
            .constraints()
            .iter()
            .map(|c| (c.from.0, c.to.0, c.interval()))
            .collect(),
        optima: optima.iter().map(|(w, l)| (w.durations.clone(), l.0)).collect(),
        horizon,
        top,
        memo: HashMap::new(),
        cap: b.max_states,
        overflow: false,
    };
    let mut vals = vec![None; n];
    vals[0] = Some(0);
    let fresh: Vec<usize> = (0..n).filter(|&c| matches!(search.link[c], Some((0, 0, _)))).collect();
    let forced: Vec<usize> = fresh.iter().copied().filter(|&c| search.link[c].expect("link").2 == 0).collect();
    let optional: Vec<usize> = fresh.iter().copied().filter(|&c| search.link[c].expect("link").2 > 0).collect();
    let value = search.branch_nature(0, &mut vals, &forced, &optional);
    if search.overflow {
        return Err(inconclusive("state cap exceeded"));
    }
    let value = (value >= 0).then_some(value as u32);
    Ok(with_opt(verdict_from(value, top), &optima))
}
