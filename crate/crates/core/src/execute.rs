//! Dispatching annotated networks against a model of nature.
//!
//! The clock is integral and starts at 0 with the origin (point 0) executed.
//! At every instant nature goes first: contingents due now are observed
//! before any executable is considered. Among executables that are live,
//! enabled and past all their waits, the lowest id goes first.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dynamic::AnnotatedStpu;
use crate::stp::{self, add_dist, Interval, Schedule, TimePointId, INF};
use crate::stpu::{ContingentLink, PointKind, Situation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NatureModel {
    /// Fixed durations, aligned with the problem's contingent links.
    Scripted(Situation),
    /// Uniform durations from a seeded generator.
    Random(u64),
    /// Worst case for the executor. Plain dispatch takes every duration at
    /// its upper bound; preference-aware dispatch searches all situations.
    Adversarial,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Exec { t: i64, point: TimePointId },
    Observe { t: i64, point: TimePointId },
    WaitExpired { t: i64, contingent: TimePointId, from: TimePointId, to: TimePointId },
}

impl TraceEvent {
    pub fn render(&self, names: &[String]) -> String {
        match *self {
            TraceEvent::Exec { t, point } => format!("t={t} exec {}", names[point.0]),
            TraceEvent::Observe { t, point } => format!("t={t} observe {}", names[point.0]),
            TraceEvent::WaitExpired { t, contingent, from, to } => format!(
                "t={t} wait-expired {} on {}->{}",
                names[contingent.0], names[from.0], names[to.0]
            ),
        }
    }
}

/// One line per event.
pub fn render_trace(trace: &[TraceEvent], names: &[String]) -> String {
    let mut out = String::new();
    for e in trace {
        out.push_str(&e.render(names));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub schedule: Schedule,
    pub trace: Vec<TraceEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecutionFailure {
    #[error("duration {duration} of {point} is outside {interval}")]
    OutOfBounds { point: String, duration: i64, interval: Interval },
    #[error("situation has {found} durations, expected {expected}")]
    SituationArity { expected: usize, found: usize },
    #[error("{point} missed its deadline at t={t}")]
    Deadline { point: String, t: i64 },
    #[error("assignments became inconsistent at t={t}")]
    Inconsistent { t: i64 },
    #[error("nothing left to do at t={t} with points unassigned")]
    Stuck { t: i64 },
    #[error("no dynamic strategy to execute")]
    NotControllable,
    #[error("adversary search gave up: {0}")]
    Inconclusive(String),
}

pub(crate) fn check_arity(nature: &NatureModel, links: usize) -> Result<(), ExecutionFailure> {
    match nature {
        NatureModel::Scripted(w) if w.durations.len() != links => Err(ExecutionFailure::SituationArity {
            expected: links,
            found: w.durations.len(),
        }),
        _ => Ok(()),
    }
}

/// Source of contingent durations, asked once per link at activation.
pub(crate) struct Nature {
    model: NatureModel,
    rng: ChaCha8Rng,
}

impl Nature {
    pub(crate) fn new(model: &NatureModel) -> Nature {
        let seed = match model {
            NatureModel::Random(s) => *s,
            _ => 0,
        };
        Nature {
            model: model.clone(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn duration(&mut self, link: usize, iv: Interval, name: &str) -> Result<i64, ExecutionFailure> {
        let d = match &self.model {
            NatureModel::Scripted(w) => w.durations[link],
            NatureModel::Random(_) => self.rng.gen_range(iv.lo..=iv.hi),
            NatureModel::Adversarial => iv.hi,
        };
        if !iv.contains(d) {
            return Err(ExecutionFailure::OutOfBounds {
                point: name.to_string(),
                duration: d,
                interval: iv,
            });
        }
        Ok(d)
    }
}

/// Mutable execution state shared by the plain and preference-aware loops.
pub(crate) struct Dispatch<'a> {
    names: &'a [String],
    kinds: &'a [PointKind],
    links: &'a [ContingentLink],
    /// Link intervals nature draws from.
    nature_bounds: Vec<Interval>,
    times: Vec<Option<i64>>,
    due: Vec<Option<i64>>,
    pub(crate) trace: Vec<TraceEvent>,
}

/// Closed distances of `net` with every assigned point pinned to its time.
fn pinned(net: &AnnotatedStpu, times: &[Option<i64>]) -> Option<Vec<i64>> {
    let n = times.len();
    let mut d = net.stpu.stp().distance_graph();
    for (p, t) in times.iter().enumerate() {
        if let Some(t) = *t {
            if p != 0 {
                d[p] = d[p].min(t);
                d[p * n] = d[p * n].min(-t);
            }
        }
    }
    stp::floyd_warshall(n, &mut d).then_some(d)
}

impl<'a> Dispatch<'a> {
    pub(crate) fn new(net: &'a AnnotatedStpu, nature_bounds: Vec<Interval>) -> Dispatch<'a> {
        let n = net.stpu.len();
        Dispatch {
            names: net.stpu.names(),
            kinds: net.stpu.kinds(),
            links: net.stpu.links(),
            nature_bounds,
            times: vec![None; n],
            due: vec![None; net.stpu.links().len()],
            trace: Vec::new(),
        }
    }

    fn execute(&mut self, p: usize, t: i64, nature: &mut Nature) -> Result<(), ExecutionFailure> {
        self.times[p] = Some(t);
        self.trace.push(TraceEvent::Exec { t, point: TimePointId(p) });
        for (i, l) in self.links.iter().enumerate() {
            if l.activation.0 == p {
                let d = nature.duration(i, self.nature_bounds[i], &self.names[l.contingent.0])?;
                self.due[i] = Some(t + d);
            }
        }
        Ok(())
    }

    /// Contingents occurring at `t`.
    fn observe(&mut self, t: i64) {
        for (i, l) in self.links.iter().enumerate() {
            let c = l.contingent.0;
            if self.times[c].is_none() && self.due[i] == Some(t) {
                self.times[c] = Some(t);
                self.trace.push(TraceEvent::Observe { t, point: l.contingent });
            }
        }
    }

    /// Activated contingents that have not occurred by `t` although `net`
    /// says they must have.
    fn overdue(&self, net: &AnnotatedStpu, t: i64) -> bool {
        self.links.iter().any(|l| {
            let (a, c) = (l.activation.0, l.contingent.0);
            match (self.times[a], self.times[c]) {
                (Some(ta), None) => t >= ta + net.stpu.link_interval(l).hi,
                _ => false,
            }
        })
    }

    /// Whether `net` can still describe the run at `t`.
    pub(crate) fn viable(&self, net: &AnnotatedStpu, t: i64) -> bool {
        !self.overdue(net, t) && pinned(net, &self.times).is_some()
    }

    /// A wait no longer than the lower bound on its edge is implied.
    fn wait_done(&self, net: &AnnotatedStpu, d: &[i64], b: usize, t: i64) -> bool {
        let n = self.times.len();
        net.waits
            .iter()
            .filter(|((_, to), _)| to.0 == b)
            .all(|(&(a, _), w)| {
                let lower = -d[b * n + a.0];
                w.iter().all(|(&c, &wt)| match (self.times[c.0], self.times[a.0]) {
                    _ if wt <= lower => true,
                    (Some(tc), _) if tc <= t => true,
                    (_, Some(ta)) => t >= ta + wt,
                    _ => false,
                })
            })
    }

    fn expire_waits(&mut self, net: &AnnotatedStpu, t: i64) {
        for (&(a, b), w) in &net.waits {
            if self.times[b.0].is_some() {
                continue;
            }
            for (&c, &wt) in w {
                if self.times[c.0].is_none() && self.times[a.0].map(|ta| ta + wt) == Some(t) {
                    self.trace.push(TraceEvent::WaitExpired {
                        t,
                        contingent: c,
                        from: a,
                        to: b,
                    });
                }
            }
        }
    }

    /// Lowest-id executable that may run at `t` under `net`.
    fn pick(&self, net: &AnnotatedStpu, d: &[i64], t: i64) -> Option<usize> {
        let n = self.times.len();
        (0..n).find(|&x| {
            if self.kinds[x] != PointKind::Executable || self.times[x].is_some() {
                return false;
            }
            let lo = -d[x * n];
            let hi = d[x];
            if t < lo || t > hi {
                return false;
            }
            let enabled = (0..n).all(|y| {
                y == x
                    || self.times[y].is_some()
                    || match self.kinds[y] {
                        PointKind::Executable => d[x * n + y] >= 0,
                        PointKind::Contingent => d[x * n + y] > 0,
                    }
            });
            enabled && self.wait_done(net, d, x, t)
        })
    }

    /// Earliest instant after `t` at which something can change under `net`.
    fn next_instant(&self, net: &AnnotatedStpu, d: &[i64], t: i64) -> Option<i64> {
        let n = self.times.len();
        let mut next = INF;
        let mut consider = |v: i64| {
            if v > t && v < next {
                next = v;
            }
        };
        for (i, l) in self.links.iter().enumerate() {
            if self.times[l.contingent.0].is_none() {
                if let Some(due) = self.due[i] {
                    consider(due);
                }
                if let Some(ta) = self.times[l.activation.0] {
                    consider(ta + net.stpu.link_interval(l).hi);
                }
            }
        }
        for x in 0..n {
            if self.kinds[x] == PointKind::Executable && self.times[x].is_none() {
                consider(-d[x * n]);
            }
        }
        for (&(a, _), w) in &net.waits {
            if let Some(ta) = self.times[a.0] {
                for &wt in w.values() {
                    consider(add_dist(ta, wt));
                }
            }
        }
        (next < INF).then_some(next)
    }

    /// Runs from the origin to completion. `select` is called at the start
    /// of every instant, after observations, and after every execution, and
    /// returns the network to dispatch with.
    pub(crate) fn run<'n>(
        &mut self,
        nature: &mut Nature,
        mut select: impl FnMut(&Dispatch<'a>, i64) -> Result<&'n AnnotatedStpu, ExecutionFailure>,
    ) -> Result<Schedule, ExecutionFailure> {
        let n = self.times.len();
        let mut t = 0;
        self.execute(0, 0, nature)?;
        loop {
            self.observe(t);
            let mut net = select(self, t)?;
            self.expire_waits(net, t);
            loop {
                let d = pinned(net, &self.times).ok_or(ExecutionFailure::Inconsistent { t })?;
                let Some(x) = self.pick(net, &d, t) else { break };
                self.execute(x, t, nature)?;
                net = select(self, t)?;
            }
            if self.times.iter().all(Option::is_some) {
                break;
            }
            let d = pinned(net, &self.times).ok_or(ExecutionFailure::Inconsistent { t })?;
            if let Some(x) = (0..n).find(|&x| self.kinds[x] == PointKind::Executable && self.times[x].is_none() && d[x] <= t) {
                return Err(ExecutionFailure::Deadline {
                    point: self.names[x].clone(),
                    t,
                });
            }
            t = self.next_instant(net, &d, t).ok_or(ExecutionFailure::Stuck { t })?;
        }
        Ok(Schedule::new(self.times.iter().map(|t| t.expect("complete")).collect()))
    }
}

/// Dispatches a dynamically controllable network.
pub fn dc_execute(net: &AnnotatedStpu, nature: &NatureModel) -> Result<Execution, ExecutionFailure> {
    let bounds: Vec<Interval> = net.stpu.links().iter().map(|l| net.stpu.link_interval(l)).collect();
    check_arity(nature, bounds.len())?;
    let mut nat = Nature::new(nature);
    let mut run = Dispatch::new(net, bounds);
    let schedule = run.run(&mut nat, |_, _| Ok(net))?;
    Ok(Execution {
        schedule,
        trace: run.trace,
    })
}

impl fmt::Display for Execution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.schedule.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamic::check_dynamic;
    use crate::stp::Stp;
    use crate::stpu::Stpu;
    use PointKind::{Contingent as C, Executable as E};

    fn iv(lo: i64, hi: i64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn triangle() -> AnnotatedStpu {
        let mut stp = Stp::new(["A", "B", "C"]);
        stp.set(TimePointId(0), TimePointId(2), iv(2, 8)).unwrap();
        stp.set(TimePointId(1), TimePointId(2), iv(-2, 2)).unwrap();
        stp.set(TimePointId(0), TimePointId(1), iv(0, 10)).unwrap();
        let u = Stpu::new(
            stp,
            vec![E, E, C],
            vec![ContingentLink {
                activation: TimePointId(0),
                contingent: TimePointId(2),
            }],
        )
        .unwrap();
        check_dynamic(&u).unwrap()
    }

    #[test]
    fn no_contingents_gives_earliest() {
        let mut stp = Stp::new(["O", "X", "Y"]);
        stp.set(TimePointId(0), TimePointId(1), iv(2, 5)).unwrap();
        stp.set(TimePointId(1), TimePointId(2), iv(1, 3)).unwrap();
        let net = AnnotatedStpu::plain(Stpu::new(stp.clone(), vec![E; 3], vec![]).unwrap());
        let run = dc_execute(&net, &NatureModel::Scripted(Situation::new(vec![]))).unwrap();
        let m = stp::minimal_network(&stp).unwrap();
        assert_eq!(run.schedule, stp::earliest_solution(&m).unwrap());
    }

    #[test]
    fn waits_until_observation() {
        let net = triangle();
        for d in 2..=8 {
            let run = dc_execute(&net, &NatureModel::Scripted(Situation::new(vec![d]))).unwrap();
            let b = run.schedule.get(TimePointId(1));
            assert!((d - 2..=d + 2).contains(&b), "d={d} b={b}");
        }
    }

    #[test]
    fn trace_lines() {
        let net = triangle();
        let run = dc_execute(&net, &NatureModel::Scripted(Situation::new(vec![8]))).unwrap();
        let text = render_trace(&run.trace, net.stpu.names());
        assert_eq!(text, "t=0 exec A\nt=6 wait-expired C on A->B\nt=6 exec B\nt=8 observe C\n");
    }

    #[test]
    fn scripted_out_of_bounds() {
        let err = dc_execute(&triangle(), &NatureModel::Scripted(Situation::new(vec![9]))).unwrap_err();
        assert!(matches!(err, ExecutionFailure::OutOfBounds { duration: 9, .. }));
    }

    #[test]
    fn random_is_seeded() {
        let net = triangle();
        let a = dc_execute(&net, &NatureModel::Random(7)).unwrap();
        let b = dc_execute(&net, &NatureModel::Random(7)).unwrap();
        assert_eq!(a, b);
    }
}
