//! Temporal problems with uncertainty: some time-points are set by nature,
//! within the bounds of a contingent link from an executable activation point.

use thiserror::Error;

use crate::stp::{self, DistanceMatrix, Interval, NegativeCycle, Stp, StpError, TimePointId, INF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointKind {
    Executable,
    Contingent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ContingentLink {
    pub activation: TimePointId,
    pub contingent: TimePointId,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StpuError {
    #[error(transparent)]
    Stp(#[from] StpError),
    #[error("origin must be executable")]
    OriginNotExecutable,
    #[error("kind list has {kinds} entries for {points} time-points")]
    KindCount { kinds: usize, points: usize },
    #[error("contingent point {0} ends more than one contingent link")]
    DuplicateLink(usize),
    #[error("contingent point {0} has no contingent link")]
    MissingLink(usize),
    #[error("link into {0} does not end at a contingent point")]
    LinkTargetNotContingent(usize),
    #[error("link into {contingent} starts at non-executable {activation}")]
    ActivationNotExecutable { activation: usize, contingent: usize },
    #[error("contingent link into {0} has no bounded interval")]
    UnboundedLink(usize),
    #[error("situation has {found} durations for {expected} links")]
    SituationArity { expected: usize, found: usize },
    #[error("duration {duration} for contingent {contingent} outside {interval}")]
    DurationOutOfRange {
        contingent: usize,
        duration: i64,
        interval: Interval,
    },
    #[error("too many situations to enumerate ({0})")]
    TooManySituations(u128),
}

/// A simple temporal problem with uncertainty.
///
/// All constraints live in one [`Stp`]; the pairs listed in `links` are the
/// contingent ones, the rest are requirements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stpu {
    stp: Stp,
    kinds: Vec<PointKind>,
    links: Vec<ContingentLink>,
}

/// Contingent durations, aligned with [`Stpu::links`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Situation {
    pub durations: Vec<i64>,
}

impl Situation {
    pub fn new(durations: Vec<i64>) -> Situation {
        Situation { durations }
    }
}

impl Stpu {
    pub fn new(stp: Stp, kinds: Vec<PointKind>, mut links: Vec<ContingentLink>) -> Result<Stpu, StpuError> {
        if kinds.len() != stp.len() {
            return Err(StpuError::KindCount {
                kinds: kinds.len(),
                points: stp.len(),
            });
        }
        if kinds.first().is_some_and(|k| *k != PointKind::Executable) {
            return Err(StpuError::OriginNotExecutable);
        }
        links.sort_by_key(|l| l.contingent);
        for w in links.windows(2) {
            if w[0].contingent == w[1].contingent {
                return Err(StpuError::DuplicateLink(w[0].contingent.0));
            }
        }
        for l in &links {
            let (a, c) = (l.activation.0, l.contingent.0);
            if a >= kinds.len() || c >= kinds.len() {
                return Err(StpError::UnknownPoint(a.max(c)).into());
            }
            if kinds[c] != PointKind::Contingent {
                return Err(StpuError::LinkTargetNotContingent(c));
            }
            if kinds[a] != PointKind::Executable {
                return Err(StpuError::ActivationNotExecutable {
                    activation: a,
                    contingent: c,
                });
            }
            match stp.interval(l.activation, l.contingent) {
                Some(iv) if iv.is_bounded() => {}
                _ => return Err(StpuError::UnboundedLink(c)),
            }
        }
        for (i, k) in kinds.iter().enumerate() {
            if *k == PointKind::Contingent && !links.iter().any(|l| l.contingent.0 == i) {
                return Err(StpuError::MissingLink(i));
            }
        }
        Ok(Stpu { stp, kinds, links })
    }

    pub fn stp(&self) -> &Stp {
        &self.stp
    }

    pub fn len(&self) -> usize {
        self.stp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stp.is_empty()
    }

    pub fn names(&self) -> &[String] {
        self.stp.names()
    }

    pub fn kinds(&self) -> &[PointKind] {
        &self.kinds
    }

    pub fn kind(&self, p: TimePointId) -> PointKind {
        self.kinds[p.0]
    }

    pub fn is_executable(&self, p: TimePointId) -> bool {
        self.kinds[p.0] == PointKind::Executable
    }

    pub fn links(&self) -> &[ContingentLink] {
        &self.links
    }

    pub fn link_interval(&self, l: &ContingentLink) -> Interval {
        self.stp
            .interval(l.activation, l.contingent)
            .expect("validated at construction")
    }

    /// The link ending at `c`, if `c` is contingent.
    pub fn link_of(&self, c: TimePointId) -> Option<&ContingentLink> {
        self.links.iter().find(|l| l.contingent == c)
    }

    pub fn is_link_pair(&self, a: TimePointId, b: TimePointId) -> bool {
        self.links.iter().any(|l| {
            (l.activation == a && l.contingent == b) || (l.activation == b && l.contingent == a)
        })
    }

    pub fn executables(&self) -> impl Iterator<Item = TimePointId> + '_ {
        self.kinds
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == PointKind::Executable)
            .map(|(i, _)| TimePointId(i))
    }

    /// Requirement constraints in canonical orientation.
    pub fn requirements(&self) -> impl Iterator<Item = (TimePointId, TimePointId, Interval)> + '_ {
        self.stp
            .constraints()
            .filter(|(a, b, _)| !self.is_link_pair(*a, *b))
    }

    /// Same structure with a different constraint network.
    pub(crate) fn with_stp(&self, stp: Stp) -> Stpu {
        Stpu {
            stp,
            kinds: self.kinds.clone(),
            links: self.links.clone(),
        }
    }

    pub fn validate_situation(&self, w: &Situation) -> Result<(), StpuError> {
        if w.durations.len() != self.links.len() {
            return Err(StpuError::SituationArity {
                expected: self.links.len(),
                found: w.durations.len(),
            });
        }
        for (l, &d) in self.links.iter().zip(&w.durations) {
            let iv = self.link_interval(l);
            if !iv.contains(d) {
                return Err(StpuError::DurationOutOfRange {
                    contingent: l.contingent.0,
                    duration: d,
                    interval: iv,
                });
            }
        }
        Ok(())
    }
}

/// Replaces each contingent link by the singleton of its duration.
pub fn project(u: &Stpu, w: &Situation) -> Result<Stp, StpuError> {
    u.validate_situation(w)?;
    let mut stp = u.stp.clone();
    for (l, &d) in u.links.iter().zip(&w.durations) {
        stp.set(l.activation, l.contingent, Interval::point(d))?;
    }
    Ok(stp)
}

/// Path consistency on the underlying network, links included.
pub fn path_consistent(u: &Stpu) -> Result<Stpu, NegativeCycle> {
    let m = stp::close_distances(&u.stp)?;
    Ok(u.with_stp(stp::from_distances(u.names().to_vec(), &m)))
}

/// True iff path consistency leaves every contingent interval unchanged.
pub fn check_pseudo(u: &Stpu) -> Result<bool, NegativeCycle> {
    let m = stp::close_distances(&u.stp)?;
    Ok(!squeezed(u, &m))
}

pub(crate) fn squeezed(u: &Stpu, m: &DistanceMatrix) -> bool {
    u.links.iter().any(|l| {
        m.interval(l.activation.0, l.contingent.0) != u.link_interval(l)
    })
}

/// An STP over the executable time-points of some STPU.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutableStp {
    /// Original index of each variable of `stp`, ascending; the origin first.
    pub ids: Vec<TimePointId>,
    pub stp: Stp,
}

impl ExecutableStp {
    pub fn local(&self, p: TimePointId) -> Option<TimePointId> {
        self.ids.iter().position(|&q| q == p).map(TimePointId)
    }

    /// Interval on `to - from`, both given as original indices.
    pub fn interval(&self, from: TimePointId, to: TimePointId) -> Option<Interval> {
        self.stp.interval(self.local(from)?, self.local(to)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ControlError {
    #[error("not strongly controllable: {0}")]
    NotStrong(String),
}

/// Strong-controllability rewrite onto executables, then minimal network.
pub fn check_strong(u: &Stpu) -> Result<ExecutableStp, ControlError> {
    let ids: Vec<TimePointId> = u.executables().collect();
    let mut out = Stp::new(ids.iter().map(|&p| u.stp.name(p).to_string()));
    let local = |p: TimePointId| TimePointId(ids.iter().position(|&q| q == p).expect("executable"));
    let empty = |what: String| ControlError::NotStrong(what);

    for (a, b, iv) in u.requirements() {
        // resolve each endpoint to (executable anchor, [l, u] offset range)
        let anchor = |p: TimePointId| -> (TimePointId, Interval) {
            match u.link_of(p) {
                Some(l) => (l.activation, u.link_interval(l)),
                None => (p, Interval::point(0)),
            }
        };
        let (ea, ra) = anchor(a);
        let (eb, rb) = anchor(b);
        // (eb + ωb) - (ea + ωa) ∈ [p,q] for all ωa, ωb
        let lo = sub_sat(sub_sat(iv.lo, rb.lo), -ra.hi);
        let hi = sub_sat(sub_sat(iv.hi, rb.hi), -ra.lo);
        let Some(need) = Interval::new(lo.max(-INF), hi.min(INF)) else {
            return Err(empty(format!(
                "rewrite of {}->{} is empty",
                u.stp.name(a),
                u.stp.name(b)
            )));
        };
        if ea == eb {
            if !need.contains(0) {
                return Err(empty(format!(
                    "{}->{} cannot hold for every duration",
                    u.stp.name(a),
                    u.stp.name(b)
                )));
            }
            continue;
        }
        out.tighten(local(ea), local(eb), need).map_err(|_| {
            empty(format!(
                "{}->{} conflicts with another rewritten constraint",
                u.stp.name(ea),
                u.stp.name(eb)
            ))
        })?;
    }
    let minimal = stp::minimal_network(&out).map_err(|e| empty(e.to_string()))?;
    Ok(ExecutableStp { ids, stp: minimal })
}

fn sub_sat(a: i64, b: i64) -> i64 {
    if a >= INF || b <= -INF {
        INF
    } else if a <= -INF || b >= INF {
        -INF
    } else {
        a - b
    }
}

/// Every corner situation (each duration at an end of its interval).
pub fn corner_situations(u: &Stpu) -> Vec<Situation> {
    let ivs: Vec<Interval> = u.links.iter().map(|l| u.link_interval(l)).collect();
    let mut out = vec![Vec::new()];
    for iv in ivs {
        let ends: Vec<i64> = if iv.lo == iv.hi { vec![iv.lo] } else { vec![iv.lo, iv.hi] };
        out = out
            .into_iter()
            .flat_map(|pre| {
                ends.iter().map(move |&e| {
                    let mut v = pre.clone();
                    v.push(e);
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(Situation::new).collect()
}

/// Full integer grid of situations, `Err` beyond `cap`.
pub fn all_situations(u: &Stpu, cap: u128) -> Result<Vec<Situation>, StpuError> {
    let ivs: Vec<Interval> = u.links.iter().map(|l| u.link_interval(l)).collect();
    let count = ivs
        .iter()
        .fold(1u128, |acc, iv| acc.saturating_mul((iv.hi - iv.lo + 1) as u128));
    if count > cap {
        return Err(StpuError::TooManySituations(count));
    }
    let mut out = vec![Vec::new()];
    for iv in ivs {
        out = out
            .into_iter()
            .flat_map(|pre| {
                (iv.lo..=iv.hi).map(move |e| {
                    let mut v = pre.clone();
                    v.push(e);
                    v
                })
            })
            .collect();
    }
    Ok(out.into_iter().map(Situation::new).collect())
}

/// Weak controllability: every projection is consistent.
///
/// Checking the corners of the duration box suffices: the set of durations
/// admitting a solution is convex, and integral because difference
/// constraints are totally unimodular.
pub fn check_weak(u: &Stpu) -> bool {
    corner_situations(u).iter().all(|w| {
        project(u, w)
            .map(|p| stp::close_distances(&p).is_ok())
            .unwrap_or(false)
    })
}
