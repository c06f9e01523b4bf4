//! Simple Temporal Problems over integer time.
//!
//! A constraint `a <= X_j - X_i <= b` is stored once per unordered pair in
//! canonical orientation (`i < j`). Reasoning goes through the distance
//! graph: an edge `i -> j` of weight `b` and an edge `j -> i` of weight `-a`.
//! All-pairs shortest paths give consistency (no negative cycle), the minimal
//! network, and the earliest and latest solutions.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Unbounded sentinel for interval bounds and path lengths.
///
/// Kept far from `i64::MAX` so that a handful of additions on finite values
/// never overflow; anything at or beyond it is treated as infinite.
pub const INF: i64 = i64::MAX / 4;

/// Adds two path lengths, treating `INF` as absorbing.
#[inline]
pub fn add_dist(a: i64, b: i64) -> i64 {
    if a >= INF || b >= INF {
        INF
    } else {
        (a + b).clamp(-INF + 1, INF)
    }
}

/// Dense index of a time-point. Index 0 is the origin, fixed at time 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimePointId(pub usize);

impl TimePointId {
    pub const ORIGIN: TimePointId = TimePointId(0);

    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for TimePointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl From<usize> for TimePointId {
    fn from(i: usize) -> Self {
        TimePointId(i)
    }
}

/// A closed integer interval. Either bound may be the unbounded sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
}

impl Interval {
    pub fn new(lo: i64, hi: i64) -> Option<Interval> {
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn point(v: i64) -> Interval {
        Interval { lo: v, hi: v }
    }

    pub fn unbounded() -> Interval {
        Interval { lo: -INF, hi: INF }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo > -INF && self.hi < INF
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// The same constraint read in the opposite direction.
    pub fn reversed(&self) -> Interval {
        Interval {
            lo: if self.hi >= INF { -INF } else { -self.hi },
            hi: if self.lo <= -INF { INF } else { -self.lo },
        }
    }

    /// Number of integers in the interval, `None` if unbounded.
    pub fn width(&self) -> Option<i64> {
        self.is_bounded().then(|| self.hi - self.lo)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = if self.lo <= -INF {
            "-inf".to_string()
        } else {
            self.lo.to_string()
        };
        let hi = if self.hi >= INF {
            "inf".to_string()
        } else {
            self.hi.to_string()
        };
        write!(f, "[{lo},{hi}]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StpError {
    #[error("self-loop on time-point {0}")]
    SelfLoop(usize),
    #[error("time-point index {0} out of range")]
    UnknownPoint(usize),
    #[error("inconsistent network: {0}")]
    Inconsistent(NegativeCycle),
    #[error("network is not in minimal form")]
    NotMinimal,
    #[error("time-point {0} is unbounded relative to the origin")]
    Unbounded(usize),
    #[error("networks are defined over different variables")]
    VariableMismatch,
    #[error("empty intersection on {from}->{to}")]
    EmptyIntersection { from: usize, to: usize },
}

/// Witness of inconsistency: a cycle of time-points whose distance-graph
/// length is negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeCycle {
    pub cycle: Vec<TimePointId>,
    pub length: i64,
}

impl fmt::Display for NegativeCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.cycle.iter().map(|p| p.0.to_string()).collect();
        write!(f, "negative cycle {} (length {})", names.join("->"), self.length)
    }
}

/// A Simple Temporal Problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stp {
    names: Vec<String>,
    constraints: BTreeMap<(usize, usize), Interval>,
}

impl Stp {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Stp {
        Stp {
            names: names.into_iter().map(Into::into).collect(),
            constraints: BTreeMap::new(),
        }
    }

    /// Anonymous variables `X0..X{n-1}`.
    pub fn with_len(n: usize) -> Stp {
        Stp::new((0..n).map(|i| format!("X{i}")))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, p: TimePointId) -> &str {
        &self.names[p.0]
    }

    pub fn index_of(&self, name: &str) -> Option<TimePointId> {
        self.names.iter().position(|n| n == name).map(TimePointId)
    }

    fn check_pair(&self, from: TimePointId, to: TimePointId) -> Result<(), StpError> {
        if from == to {
            return Err(StpError::SelfLoop(from.0));
        }
        for p in [from, to] {
            if p.0 >= self.len() {
                return Err(StpError::UnknownPoint(p.0));
            }
        }
        Ok(())
    }

    /// Sets `to - from ∈ interval`, replacing any previous constraint on the pair.
    pub fn set(
        &mut self,
        from: TimePointId,
        to: TimePointId,
        interval: Interval,
    ) -> Result<(), StpError> {
        self.check_pair(from, to)?;
        let (key, iv) = canonical(from.0, to.0, interval);
        self.constraints.insert(key, iv);
        Ok(())
    }

    /// Intersects `to - from ∈ interval` into the pair's current constraint.
    pub fn tighten(
        &mut self,
        from: TimePointId,
        to: TimePointId,
        interval: Interval,
    ) -> Result<(), StpError> {
        self.check_pair(from, to)?;
        let (key, iv) = canonical(from.0, to.0, interval);
        let merged = match self.constraints.get(&key) {
            Some(old) => old.intersect(&iv).ok_or(StpError::EmptyIntersection {
                from: key.0,
                to: key.1,
            })?,
            None => iv,
        };
        self.constraints.insert(key, merged);
        Ok(())
    }

    /// The constraint on `to - from`, if any.
    pub fn interval(&self, from: TimePointId, to: TimePointId) -> Option<Interval> {
        if from.0 < to.0 {
            self.constraints.get(&(from.0, to.0)).copied()
        } else {
            self.constraints.get(&(to.0, from.0)).map(Interval::reversed)
        }
    }

    /// Constraints in canonical orientation, ordered by pair.
    pub fn constraints(&self) -> impl Iterator<Item = (TimePointId, TimePointId, Interval)> + '_ {
        self.constraints
            .iter()
            .map(|(&(i, j), &iv)| (TimePointId(i), TimePointId(j), iv))
    }

    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    pub(crate) fn distance_graph(&self) -> Vec<i64> {
        let n = self.len();
        let mut d = vec![INF; n * n];
        for i in 0..n {
            d[i * n + i] = 0;
        }
        for (&(i, j), iv) in &self.constraints {
            d[i * n + j] = d[i * n + j].min(iv.hi);
            if iv.lo > -INF {
                d[j * n + i] = d[j * n + i].min(-iv.lo);
            }
        }
        d
    }
}

fn canonical(from: usize, to: usize, iv: Interval) -> ((usize, usize), Interval) {
    if from < to {
        ((from, to), iv)
    } else {
        ((to, from), iv.reversed())
    }
}

/// All-pairs shortest path lengths of a distance graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<i64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub(crate) fn from_raw(n: usize, d: Vec<i64>) -> DistanceMatrix {
        DistanceMatrix { n, d }
    }

    #[allow(dead_code)]
    pub(crate) fn raw(&self) -> &[i64] {
        &self.d
    }

    /// Upper bound on `X_j - X_i`.
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.d[i * self.n + j]
    }

    /// Tightest interval on `X_j - X_i`.
    pub fn interval(&self, i: usize, j: usize) -> Interval {
        let lo = self.get(j, i);
        Interval {
            lo: if lo >= INF { -INF } else { -lo },
            hi: self.get(i, j),
        }
    }
}

/// Floyd–Warshall closure of the distance graph.
pub fn close_distances(stp: &Stp) -> Result<DistanceMatrix, NegativeCycle> {
    let n = stp.len();
    let mut d = stp.distance_graph();
    floyd_warshall(n, &mut d);
    if (0..n).any(|i| d[i * n + i] < 0) {
        return Err(negative_cycle_witness(stp));
    }
    Ok(DistanceMatrix { n, d })
}

/// In-place Floyd–Warshall on a dense `n × n` matrix. Returns `false` as
/// soon as a diagonal entry turns negative.
pub(crate) fn floyd_warshall(n: usize, d: &mut [i64]) -> bool {
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik >= INF {
                continue;
            }
            for j in 0..n {
                let via = add_dist(dik, d[k * n + j]);
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
            if d[i * n + i] < 0 {
                return false;
            }
        }
    }
    true
}

fn negative_cycle_witness(stp: &Stp) -> NegativeCycle {
    // Bellman-Ford from a virtual source connected to every node.
    let n = stp.len();
    let d0 = stp.distance_graph();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && d0[i * n + j] < INF {
                edges.push((i, j, d0[i * n + j]));
            }
        }
    }
    let mut dist = vec![0i64; n];
    let mut parent = vec![usize::MAX; n];
    let mut last = usize::MAX;
    for _ in 0..n {
        last = usize::MAX;
        for &(u, v, w) in &edges {
            if dist[u] + w < dist[v] {
                dist[v] = dist[u] + w;
                parent[v] = u;
                last = v;
            }
        }
    }
    debug_assert!(last != usize::MAX, "closure saw a negative cycle");
    let mut v = last;
    for _ in 0..n {
        v = parent[v];
    }
    let start = v;
    let mut cycle = vec![start];
    let mut u = parent[start];
    while u != start {
        cycle.push(u);
        u = parent[u];
    }
    cycle.reverse();
    let length = cycle
        .iter()
        .zip(cycle.iter().cycle().skip(1))
        .map(|(&a, &b)| d0[a * n + b])
        .sum();
    NegativeCycle {
        cycle: cycle.into_iter().map(TimePointId).collect(),
        length,
    }
}

/// Minimal network: every pair constrained by `[-d_ji, d_ij]`.
pub fn minimal_network(stp: &Stp) -> Result<Stp, StpError> {
    let m = close_distances(stp).map_err(StpError::Inconsistent)?;
    Ok(from_distances(stp.names.clone(), &m))
}

pub(crate) fn from_distances(names: Vec<String>, m: &DistanceMatrix) -> Stp {
    let n = m.len();
    let mut constraints = BTreeMap::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let iv = m.interval(i, j);
            if iv.lo > -INF || iv.hi < INF {
                constraints.insert((i, j), iv);
            }
        }
    }
    Stp { names, constraints }
}

fn checked_minimal(stp: &Stp) -> Result<DistanceMatrix, StpError> {
    let m = close_distances(stp).map_err(StpError::Inconsistent)?;
    if from_distances(stp.names.clone(), &m) != *stp {
        return Err(StpError::NotMinimal);
    }
    Ok(m)
}

/// A complete assignment of times, indexed by time-point.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Schedule {
    pub values: Vec<i64>,
}

impl Schedule {
    pub fn new(values: Vec<i64>) -> Schedule {
        Schedule { values }
    }

    pub fn get(&self, p: TimePointId) -> i64 {
        self.values[p.0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Earliest solution of a consistent minimal network: `X_i = -d_i0`.
pub fn earliest_solution(minimal: &Stp) -> Result<Schedule, StpError> {
    let m = checked_minimal(minimal)?;
    (0..m.len())
        .map(|i| {
            let d = m.get(i, 0);
            if d >= INF {
                Err(StpError::Unbounded(i))
            } else {
                Ok(-d)
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Schedule::new)
}

/// Latest solution of a consistent minimal network: `X_i = d_0i`.
pub fn latest_solution(minimal: &Stp) -> Result<Schedule, StpError> {
    let m = checked_minimal(minimal)?;
    (0..m.len())
        .map(|i| {
            let d = m.get(0, i);
            if d >= INF {
                Err(StpError::Unbounded(i))
            } else {
                Ok(d)
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Schedule::new)
}

/// Pairwise interval intersection.
pub fn intersect(p1: &Stp, p2: &Stp) -> Result<Stp, StpError> {
    if p1.names != p2.names {
        return Err(StpError::VariableMismatch);
    }
    let mut out = p1.clone();
    for (&key, iv) in &p2.constraints {
        let merged = match out.constraints.get(&key) {
            Some(old) => old.intersect(iv).ok_or(StpError::EmptyIntersection {
                from: key.0,
                to: key.1,
            })?,
            None => *iv,
        };
        out.constraints.insert(key, merged);
    }
    Ok(out)
}

/// True iff every constraint contains the difference the schedule induces.
pub fn satisfies(s: &Schedule, stp: &Stp) -> bool {
    s.len() == stp.len()
        && stp
            .constraints
            .iter()
            .all(|(&(i, j), iv)| iv.contains(s.values[j] - s.values[i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: i64, hi: i64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn eos_triangle() -> Stp {
        // SC=0, SA=1, EC=2
        let mut p = Stp::new(["SC", "SA", "EC"]);
        p.set(TimePointId(0), TimePointId(2), iv(1, 8)).unwrap();
        p.set(TimePointId(0), TimePointId(1), iv(1, 5)).unwrap();
        p.set(TimePointId(1), TimePointId(2), iv(-6, 4)).unwrap();
        p
    }

    #[test]
    fn single_edge_distances() {
        let mut p = Stp::with_len(2);
        p.set(TimePointId(0), TimePointId(1), iv(3, 7)).unwrap();
        let m = close_distances(&p).unwrap();
        assert_eq!(m.get(0, 1), 7);
        assert_eq!(m.get(1, 0), -3);
    }

    #[test]
    fn contradiction_yields_witness_cycle() {
        let mut p = Stp::with_len(2);
        p.set(TimePointId(0), TimePointId(1), iv(2, 3)).unwrap();
        p.tighten(TimePointId(1), TimePointId(0), iv(0, 1))
            .unwrap_err();
        // stored as one pair, so build the contradiction through a third point
        let mut q = Stp::with_len(3);
        q.set(TimePointId(0), TimePointId(1), iv(2, 3)).unwrap();
        q.set(TimePointId(1), TimePointId(2), iv(0, 0)).unwrap();
        q.set(TimePointId(2), TimePointId(0), iv(0, 1)).unwrap();
        let err = close_distances(&q).unwrap_err();
        assert!(err.length < 0);
        assert!(err.cycle.len() >= 2);
    }

    #[test]
    fn eos_triangle_tightens_sa_ec() {
        let m = close_distances(&eos_triangle()).unwrap();
        assert_eq!(m.interval(1, 2), iv(-4, 4));
        let min = minimal_network(&eos_triangle()).unwrap();
        assert_eq!(min.interval(TimePointId(0), TimePointId(2)), Some(iv(1, 8)));
        assert_eq!(min.interval(TimePointId(0), TimePointId(1)), Some(iv(1, 5)));
        assert_eq!(min.interval(TimePointId(1), TimePointId(2)), Some(iv(-4, 4)));
    }

    #[test]
    fn minimal_network_is_idempotent() {
        let once = minimal_network(&eos_triangle()).unwrap();
        assert_eq!(minimal_network(&once).unwrap(), once);
    }

    #[test]
    fn earliest_and_latest() {
        let mut p = Stp::with_len(2);
        p.set(TimePointId(0), TimePointId(1), iv(3, 7)).unwrap();
        assert_eq!(earliest_solution(&p).unwrap().values, vec![0, 3]);
        assert_eq!(latest_solution(&p).unwrap().values, vec![0, 7]);
    }

    #[test]
    fn earliest_rejects_non_minimal_input() {
        assert_eq!(
            earliest_solution(&eos_triangle()),
            Err(StpError::NotMinimal)
        );
    }

    #[test]
    fn intersect_cases() {
        let mut a = Stp::new(["SC", "SA"]);
        a.set(TimePointId(0), TimePointId(1), iv(4, 4)).unwrap();
        let mut b = Stp::new(["SC", "SA"]);
        b.set(TimePointId(0), TimePointId(1), iv(3, 3)).unwrap();
        assert!(matches!(
            intersect(&a, &b),
            Err(StpError::EmptyIntersection { from: 0, to: 1 })
        ));

        a.set(TimePointId(0), TimePointId(1), iv(4, 5)).unwrap();
        b.set(TimePointId(0), TimePointId(1), iv(3, 5)).unwrap();
        let c = intersect(&a, &b).unwrap();
        assert_eq!(c.interval(TimePointId(0), TimePointId(1)), Some(iv(4, 5)));
        assert_eq!(intersect(&a, &a).unwrap(), a);

        let other = Stp::new(["A", "B"]);
        assert_eq!(intersect(&a, &other), Err(StpError::VariableMismatch));
    }

    #[test]
    fn satisfies_examples() {
        let p = eos_triangle();
        assert!(satisfies(&Schedule::new(vec![0, 2, 5]), &p));
        let mut q = Stp::with_len(2);
        q.set(TimePointId(0), TimePointId(1), iv(3, 7)).unwrap();
        assert!(!satisfies(&Schedule::new(vec![0, 8]), &q));
    }

    #[test]
    fn reversed_orientation_round_trips() {
        let mut p = Stp::with_len(3);
        p.set(TimePointId(2), TimePointId(0), iv(-5, 2)).unwrap();
        assert_eq!(p.interval(TimePointId(0), TimePointId(2)), Some(iv(-2, 5)));
        assert_eq!(p.interval(TimePointId(2), TimePointId(0)), Some(iv(-5, 2)));
        assert_eq!(p.set(TimePointId(1), TimePointId(1), iv(0, 0)), Err(StpError::SelfLoop(1)));
    }

    #[test]
    fn unbounded_reversal() {
        let u = Interval { lo: 2, hi: INF };
        assert_eq!(u.reversed(), Interval { lo: -INF, hi: -2 });
        assert_eq!(u.reversed().reversed(), u);
    }
}
