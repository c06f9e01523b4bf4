use thiserror::Error;

use crate::dynamic::{self, AnnotatedStpu, DcError, EdgeCase, EdgeWaits, NotDcReason};
use crate::preference::{Level, SoftProblem};
use crate::stp::{self, Interval, StpError, TimePointId};
use crate::stpu;

use super::{ControllabilityReport, Property, StopEvent, Stppu, Verdict, Witness};

/// What to do with an edge that is a Follow case at either level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FollowPolicy {
    /// Keep the edge of the lower-level network.
    #[default]
    KeepLower,
    /// Take the edge of the higher-level network.
    KeepUpper,
    /// Intersect both edges and keep every wait.
    Intersect,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MergeFailure {
    #[error("merge failed on {from}->{to}")]
    Edge { from: TimePointId, to: TimePointId },
    #[error("merged network is not controllable: {0}")]
    Network(DcError),
}

/// How consecutive levels are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MergeMode {
    /// Intersect both networks, keep every wait and re-run the
    /// dynamic-controllability fixpoint on the result.
    #[default]
    Closure,
    /// Edge-by-edge rules on executable pairs only.
    Rules(FollowPolicy),
}

fn merge_waits(a: Option<&EdgeWaits>, b: Option<&EdgeWaits>) -> EdgeWaits {
    let mut out = a.cloned().unwrap_or_default();
    for (&c, &t) in b.into_iter().flatten() {
        let slot = out.entry(c).or_insert(t);
        *slot = (*slot).max(t);
    }
    out
}

/// Caps every wait of `lower` at the upper bound its contingent has in
/// `upper`. In the situations of the higher level the contingent has occurred
/// by then, so a longer wait means the same thing there.
fn cap_waits(lower: &AnnotatedStpu, upper: &AnnotatedStpu) -> AnnotatedStpu {
    let mut out = lower.clone();
    for waits in out.waits.values_mut() {
        for (c, t) in waits.iter_mut() {
            if let Some(l) = upper.stpu.link_of(*c) {
                *t = (*t).min(upper.stpu.link_interval(l).hi);
            }
        }
    }
    out
}

/// Combines the network kept so far with the next level's annotated cut,
/// edge by edge.
///
/// Only requirement edges between executables change; contingent links and
/// edges touching contingent points keep the values of `lower`.
pub fn merge_rules(lower: &AnnotatedStpu, upper: &AnnotatedStpu, policy: FollowPolicy) -> Result<AnnotatedStpu, MergeFailure> {
    let mut out = cap_waits(lower, upper);
    let lower = &out.clone();
    let execs: Vec<TimePointId> = lower.stpu.executables().collect();
    let mut stp = out.stpu.stp().clone();
    for (k, &i) in execs.iter().enumerate() {
        for &j in &execs[k + 1..] {
            let active: Vec<(TimePointId, TimePointId)> = [(i, j), (j, i)]
                .into_iter()
                .filter(|&(a, b)| {
                    lower.waits_on(a, b).is_some()
                        || upper.waits_on(a, b).is_some()
                        || lower.follows_contingent(a, b)
                        || upper.follows_contingent(a, b)
                })
                .collect();
            if active.is_empty() {
                let iv = lower
                    .interval(i, j)
                    .intersect(&upper.interval(i, j))
                    .ok_or(MergeFailure::Edge { from: i, to: j })?;
                stp.set(i, j, iv).expect("distinct executables");
                continue;
            }
            for (a, b) in active {
                let cur = AnnotatedStpu {
                    stpu: out.stpu.with_stp(stp.clone()),
                    waits: out.waits.clone(),
                };
                let (cl, cu) = (cur.classify(a, b), upper.classify(a, b));
                let (il, iu) = (cur.interval(a, b), upper.interval(a, b));
                let waits = merge_waits(cur.waits_on(a, b), upper.waits_on(a, b));
                let fail = MergeFailure::Edge { from: a, to: b };
                let (iv, w) = match (cl, cu) {
                    (EdgeCase::Follow, _) | (_, EdgeCase::Follow) => match policy {
                        FollowPolicy::KeepLower => continue,
                        FollowPolicy::KeepUpper => (iu, upper.waits_on(a, b).cloned().unwrap_or_default()),
                        FollowPolicy::Intersect => {
                            let iv = il.intersect(&iu).ok_or_else(|| fail.clone())?;
                            if waits.values().any(|&t| t > iv.hi) && !(cl == EdgeCase::Follow && cu == EdgeCase::Follow) {
                                return Err(fail.clone());
                            }
                            (iv, waits)
                        }
                    },
                    (EdgeCase::Precede, EdgeCase::Precede) => (il.intersect(&iu).ok_or_else(|| fail.clone())?, waits),
                    _ => {
                        let q = il.hi.min(iu.hi);
                        let t = waits.values().copied().max().unwrap_or(il.lo);
                        if q < t {
                            return Err(fail.clone());
                        }
                        (Interval::new(il.lo, q).ok_or_else(|| fail.clone())?, waits)
                    }
                };
                stp.set(a, b, iv).expect("distinct executables");
                if w.is_empty() {
                    out.waits.remove(&(a, b));
                } else {
                    out.waits.insert((a, b), w);
                }
            }
        }
    }
    out.stpu = out.stpu.with_stp(stp);
    Ok(out)
}

/// Combines the network kept so far with the next level's annotated cut.
///
/// Every constraint and wait of `lower` still binds in the situations of the
/// higher level, so the result is the fixpoint of both together, with the
/// contingent intervals of `upper`. Waits longer than their contingent's upper
/// bound in `upper` mean "after the contingent" there and are capped.
pub fn merge(lower: &AnnotatedStpu, upper: &AnnotatedStpu) -> Result<AnnotatedStpu, MergeFailure> {
    let stp = stp::intersect(lower.stpu.stp(), upper.stpu.stp()).map_err(|e| match e {
        StpError::EmptyIntersection { from, to } => MergeFailure::Edge {
            from: TimePointId(from),
            to: TimePointId(to),
        },
        other => unreachable!("same variables on both sides: {other}"),
    })?;
    let mut waits = cap_waits(lower, upper).waits;
    for (&edge, w) in &upper.waits {
        waits.insert(edge, merge_waits(waits.get(&edge), Some(w)));
    }
    for (&(a, b), w) in &waits {
        let hi = stp.interval(a, b).map_or(i64::MAX, |iv| iv.hi);
        for (&c, &t) in w {
            let y = upper.stpu.link_of(c).map_or(i64::MAX, |l| upper.stpu.link_interval(l).hi);
            // b has to outwait c on a path where c may come later than b's deadline
            if t > hi && y > hi {
                return Err(MergeFailure::Edge { from: a, to: b });
            }
        }
    }
    let u = upper.stpu.with_stp(stp);
    dynamic::check_dynamic_seeded(&u, &waits).map_err(|e| match e {
        DcError::NotDc(NotDcReason::Squeezed(c)) | DcError::NotDc(NotDcReason::ImpossibleWait { contingent: c }) => {
            let c = TimePointId(c);
            let a = u.link_of(c).map_or(TimePointId::ORIGIN, |l| l.activation);
            MergeFailure::Edge { from: a, to: c }
        }
        other => MergeFailure::Network(other),
    })
}

/// One level of the family: the annotated cut and the merged network.
#[derive(Debug, Clone)]
pub struct FamilyLevel {
    pub level: Level,
    pub cut: AnnotatedStpu,
    pub merged: AnnotatedStpu,
}

/// Annotated cuts and cumulative merges, ascending by level.
#[derive(Debug, Clone, Default)]
pub struct MergedFamily {
    pub levels: Vec<FamilyLevel>,
}

impl MergedFamily {
    /// Merged network for the highest retained level not above `alpha`;
    /// the lowest one if `alpha` is below all of them.
    pub fn merged_at(&self, alpha: Level) -> Option<&AnnotatedStpu> {
        self.levels
            .iter()
            .rev()
            .find(|l| l.level <= alpha)
            .or(self.levels.first())
            .map(|l| &l.merged)
    }

    pub fn top(&self) -> Option<&FamilyLevel> {
        self.levels.last()
    }
}

/// Merged network with the original preferences restored on its intervals.
#[derive(Debug, Clone)]
pub struct ResultingStppu {
    pub network: AnnotatedStpu,
    pub problem: Stppu,
    /// The problem as given, used to score executions.
    pub source: Stppu,
    pub family: MergedFamily,
    pub verdict: Verdict,
}

/// Restricts each preference function to the merged interval on its pair.
pub fn resulting_stppu(p: &Stppu, family: MergedFamily, verdict: Verdict) -> ResultingStppu {
    let network = family
        .top()
        .map(|l| l.merged.clone())
        .unwrap_or_else(|| AnnotatedStpu::plain(p.strip()));
    let problem = p
        .map_prefs(|c| {
            let iv = network.interval(c.from, c.to);
            match c.pref.domain().intersect(&iv) {
                Some(d) if !c.is_contingent() => c.pref.restrict(d),
                _ => Ok(c.pref.clone()),
            }
        })
        .expect("restriction preserves semi-convexity");
    ResultingStppu {
        network,
        problem,
        source: p.clone(),
        family,
        verdict,
    }
}

/// Highest level at which a dynamic strategy is optimal.
pub fn best_dc(p: &Stppu) -> ControllabilityReport {
    best_dc_with(p, MergeMode::default())
}

pub fn best_dc_with(p: &Stppu, mode: MergeMode) -> ControllabilityReport {
    let grid = p.grid();
    let alpha_min = p.alpha_min();
    let mut examined = 1;
    let first = p
        .cut(alpha_min)
        .and_then(|u| dynamic::check_dynamic(&u).ok());
    let Some(t0) = first else {
        return ControllabilityReport {
            property: Property::Dynamic,
            verdict: Verdict::None,
            grid,
            stop_event: Some(StopEvent::NotControllableAtMin),
            witness: Witness::Nothing,
            levels_examined: examined,
        };
    };
    let mut family = MergedFamily {
        levels: vec![FamilyLevel {
            level: alpha_min,
            cut: t0.clone(),
            merged: t0,
        }],
    };
    let mut beta = alpha_min.next();
    let (verdict, stop) = loop {
        let last = Level(beta.0 - 1);
        if beta > grid.top() {
            break (Verdict::Optimal(last), StopEvent::CutInconsistent);
        }
        examined += 1;
        let Some(pc) = p.cut(beta).and_then(|u| stpu::path_consistent(&u).ok()) else {
            break (Verdict::Optimal(last), StopEvent::CutInconsistent);
        };
        let Ok(t) = dynamic::check_dynamic(&pc) else {
            break (Verdict::AtLevel(last), StopEvent::LevelNotControllable);
        };
        let prev = &family.levels.last().expect("non-empty").merged;
        let merged = match mode {
            MergeMode::Closure => merge(prev, &t),
            MergeMode::Rules(policy) => merge_rules(prev, &t, policy),
        };
        let Ok(merged) = merged else {
            break (Verdict::AtLevel(last), StopEvent::CombineFailed);
        };
        family.levels.push(FamilyLevel {
            level: beta,
            cut: t,
            merged,
        });
        beta = beta.next();
    };
    let result = resulting_stppu(p, family, verdict);
    ControllabilityReport {
        property: Property::Dynamic,
        verdict,
        grid,
        stop_event: Some(stop),
        witness: Witness::Dynamic(Box::new(result)),
        levels_examined: examined,
    }
}
