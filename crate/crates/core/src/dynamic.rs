//! Dynamic controllability: triangle reductions, waits and their regression,
//! iterated to a fixpoint over the dense distance matrix.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::stp::{self, DistanceMatrix, Interval, TimePointId, INF};
use crate::stpu::{PointKind, Stpu};

/// Waits on one requirement edge, keyed by contingent point.
pub type EdgeWaits = BTreeMap<TimePointId, i64>;

/// An STPU whose requirement edges carry waits `<C, t>`: the target may not
/// execute before `source + t` unless `C` has already occurred. The source of
/// a waited edge is always the activation point of `C`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedStpu {
    pub stpu: Stpu,
    pub waits: BTreeMap<(TimePointId, TimePointId), EdgeWaits>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeCase {
    Follow,
    Precede,
    Unordered,
}

impl AnnotatedStpu {
    /// No waits at all.
    pub fn plain(stpu: Stpu) -> AnnotatedStpu {
        AnnotatedStpu {
            stpu,
            waits: BTreeMap::new(),
        }
    }

    pub fn waits_on(&self, a: TimePointId, b: TimePointId) -> Option<&EdgeWaits> {
        self.waits.get(&(a, b)).filter(|w| !w.is_empty())
    }

    /// Largest wait on `a -> b`.
    pub fn effective_wait(&self, a: TimePointId, b: TimePointId) -> Option<i64> {
        self.waits_on(a, b).and_then(|w| w.values().copied().max())
    }

    pub fn interval(&self, a: TimePointId, b: TimePointId) -> Interval {
        self.stpu
            .stp()
            .interval(a, b)
            .unwrap_or_else(Interval::unbounded)
    }

    /// Some contingent activated at `a` always occurs strictly before `b`.
    pub fn follows_contingent(&self, a: TimePointId, b: TimePointId) -> bool {
        self.stpu
            .links()
            .iter()
            .filter(|l| l.activation == a && l.contingent != b)
            .any(|l| self.interval(b, l.contingent).hi < 0)
    }

    /// Ordering of `b` relative to the contingents activated at `a`.
    pub fn classify(&self, a: TimePointId, b: TimePointId) -> EdgeCase {
        if self.follows_contingent(a, b) {
            return EdgeCase::Follow;
        }
        let iv = self.interval(a, b);
        match self.effective_wait(a, b) {
            None => EdgeCase::Precede,
            Some(t) if t <= iv.lo => EdgeCase::Precede,
            Some(t) if t <= iv.hi => EdgeCase::Unordered,
            Some(_) => EdgeCase::Follow,
        }
    }

    /// Closed distance matrix of the underlying network.
    pub fn distances(&self) -> Result<DistanceMatrix, stp::NegativeCycle> {
        stp::close_distances(self.stpu.stp())
    }

    /// Every wait as `(source, target, contingent, t)` in key order.
    pub fn wait_list(&self) -> Vec<(TimePointId, TimePointId, TimePointId, i64)> {
        self.waits
            .iter()
            .flat_map(|(&(a, b), w)| w.iter().map(move |(&c, &t)| (a, b, c, t)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DcError {
    #[error("not dynamically controllable: {0}")]
    NotDc(NotDcReason),
    #[error("fixpoint did not converge within {0} iterations")]
    IterationCap(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NotDcReason {
    #[error("constraints are inconsistent")]
    Inconsistent,
    #[error("contingent interval of point {0} is squeezed")]
    Squeezed(usize),
    #[error("wait on contingent {contingent} cannot be honoured at its own activation")]
    ImpossibleWait { contingent: usize },
}

struct Link {
    a: usize,
    c: usize,
    x: i64,
    y: i64,
}

struct State {
    n: usize,
    d: Vec<i64>,
    waits: BTreeMap<(usize, usize), BTreeMap<usize, i64>>,
}

impl State {
    fn get(&self, i: usize, j: usize) -> i64 {
        self.d[i * self.n + j]
    }

    fn lower(&self, a: usize, b: usize) -> i64 {
        let v = self.get(b, a);
        if v >= INF {
            -INF
        } else {
            -v
        }
    }

    fn cap_upper(&mut self, i: usize, j: usize, v: i64) {
        let cell = &mut self.d[i * self.n + j];
        if v < *cell {
            *cell = v;
        }
    }

    /// Raises the lower bound of `b - a` to `v`.
    fn raise_lower(&mut self, a: usize, b: usize, v: i64) {
        if v > -INF {
            self.cap_upper(b, a, -v);
        }
    }

    fn add_wait(&mut self, a: usize, b: usize, c: usize, t: i64) {
        let slot = self.waits.entry((a, b)).or_default().entry(c).or_insert(t);
        if t > *slot {
            *slot = t;
        }
    }
}

/// Runs the dynamic-controllability fixpoint.
pub fn check_dynamic(u: &Stpu) -> Result<AnnotatedStpu, DcError> {
    check_dynamic_seeded(u, &BTreeMap::new())
}

/// Same fixpoint, starting from waits that are already known to be needed.
/// Waits whose source is not the activation of their contingent are ignored.
pub fn check_dynamic_seeded(
    u: &Stpu,
    seed: &BTreeMap<(TimePointId, TimePointId), EdgeWaits>,
) -> Result<AnnotatedStpu, DcError> {
    let n = u.len();
    let links: Vec<Link> = u
        .links()
        .iter()
        .map(|l| {
            let iv = u.link_interval(l);
            Link {
                a: l.activation.0,
                c: l.contingent.0,
                x: iv.lo,
                y: iv.hi,
            }
        })
        .collect();
    let link_of: Vec<Option<usize>> = (0..n)
        .map(|p| links.iter().position(|l| l.c == p))
        .collect();
    let exec: Vec<bool> = u.kinds().iter().map(|k| *k == PointKind::Executable).collect();

    let mut s = State {
        n,
        d: u.stp().distance_graph(),
        waits: BTreeMap::new(),
    };
    for (&(a, b), w) in seed {
        for (&c, &t) in w {
            if let Some(l) = link_of[c.0].map(|i| &links[i]) {
                if l.a == a.0 && b.0 != a.0 {
                    s.add_wait(a.0, b.0, c.0, t.min(l.y));
                }
            }
        }
    }
    let span: i64 = u
        .stp()
        .constraints()
        .map(|(_, _, iv)| iv.width().unwrap_or(0))
        .sum();
    let cap = n * n * (span.max(1) as usize) + 16;

    for _ in 0..cap {
        if !stp::floyd_warshall(n, &mut s.d) {
            return Err(DcError::NotDc(NotDcReason::Inconsistent));
        }
        for l in &links {
            if s.lower(l.a, l.c) != l.x || s.get(l.a, l.c) != l.y {
                return Err(DcError::NotDc(NotDcReason::Squeezed(l.c)));
            }
        }
        let before_d = s.d.clone();
        let before_w = s.waits.clone();

        // triangles A, B, C with AC contingent; B may be contingent too
        for l in &links {
            for b in (0..n).filter(|&b| b != l.a && b != l.c) {
                let v = s.get(b, l.c);
                let u_lo = s.lower(b, l.c);
                if v < 0 {
                    continue;
                }
                if u_lo > 0 {
                    // precede: AB ⊆ [y - v, x - u]. With u = 0, b may still
                    // react at the instant c is observed, so that is unordered
                    // below.
                    if v < INF {
                        s.raise_lower(l.a, b, l.y - v);
                    }
                    s.cap_upper(l.a, b, l.x - u_lo);
                } else if v < INF {
                    s.add_wait(l.a, b, l.c, l.y - v);
                }
            }
        }

        // wait consequences and regressions
        let snapshot: Vec<(usize, usize, usize, i64)> = s
            .waits
            .iter()
            .flat_map(|(&(a, b), w)| w.iter().map(move |(&c, &t)| (a, b, c, t)))
            .collect();
        for (a, b, c, t) in snapshot {
            let x = links[link_of[c].expect("wait on a contingent")].x;
            if t > s.get(a, b) {
                // cannot outwait it: b must come after c
                s.cap_upper(b, c, 0);
            }
            s.raise_lower(a, b, t.min(x));
            if t <= s.lower(a, b) {
                continue;
            }
            if let Some(lb) = link_of[b].map(|i| &links[i]) {
                // b is not ours to delay: its activation has to wait instead
                let t2 = t - lb.x;
                if lb.a == a {
                    if t2 > 0 {
                        return Err(DcError::NotDc(NotDcReason::ImpossibleWait { contingent: c }));
                    }
                } else if t2 > s.lower(a, lb.a) {
                    s.add_wait(a, lb.a, c, t2);
                }
            }
            for dd in 0..n {
                if dd == a || dd == b || dd == c {
                    continue;
                }
                let w = s.get(dd, b);
                if w >= INF {
                    continue;
                }
                let t2 = t - w;
                if t2 > s.lower(a, dd) {
                    s.add_wait(a, dd, c, t2);
                }
            }
        }

        if s.d == before_d && s.waits == before_w {
            let m = DistanceMatrix::from_raw(n, s.d);
            let stp = stp::from_distances(u.names().to_vec(), &m);
            let waits = s
                .waits
                .into_iter()
                .filter(|((_, b), _)| exec[*b])
                .map(|((a, b), w)| {
                    let w = w.into_iter().map(|(c, t)| (TimePointId(c), t)).collect();
                    ((TimePointId(a), TimePointId(b)), w)
                })
                .collect();
            return Ok(AnnotatedStpu {
                stpu: u.with_stp(stp),
                waits,
            });
        }
    }
    Err(DcError::IterationCap(cap))
}
