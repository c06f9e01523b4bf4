//! Fuzzy preferences on a discretized grid.
//!
//! Preference values are integer levels `0..=denom` read as `k/denom`;
//! combination is `min`, comparison is `max`. Local preference functions are
//! step functions whose upper level sets are contiguous.

use std::fmt;

use thiserror::Error;

use crate::stp::{self, Interval, Schedule, Stp, StpError, TimePointId};

pub const DEFAULT_DENOM: u32 = 10;

/// A preference level index on a [`PreferenceGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Level(pub u32);

impl Level {
    pub fn index(self) -> u32 {
        self.0
    }

    /// The grid level immediately above this one.
    pub fn next(self) -> Level {
        Level(self.0 + 1)
    }

    /// The grid level immediately below, saturating at zero.
    pub fn prev(self) -> Level {
        Level(self.0.saturating_sub(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PreferenceGrid {
    denom: u32,
}

impl Default for PreferenceGrid {
    fn default() -> Self {
        PreferenceGrid {
            denom: DEFAULT_DENOM,
        }
    }
}

impl PreferenceGrid {
    pub fn new(denom: u32) -> Result<PreferenceGrid, PrefError> {
        if denom == 0 {
            return Err(PrefError::ZeroDenominator);
        }
        Ok(PreferenceGrid { denom })
    }

    pub fn denom(&self) -> u32 {
        self.denom
    }

    pub fn top(&self) -> Level {
        Level(self.denom)
    }

    pub fn contains(&self, l: Level) -> bool {
        l.0 <= self.denom
    }

    /// Renders a level as `k/denom`.
    pub fn display(&self, l: Level) -> String {
        format!("{}/{}", l.0, self.denom)
    }

    pub fn as_f64(&self, l: Level) -> f64 {
        f64::from(l.0) / f64::from(self.denom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrefError {
    #[error("grid denominator must be positive")]
    ZeroDenominator,
    #[error("preference domain {0} must be bounded")]
    UnboundedDomain(Interval),
    #[error("no breakpoints given")]
    NoBreakpoints,
    #[error("first breakpoint at {found} but domain starts at {expected}")]
    FirstBreakpoint { expected: i64, found: i64 },
    #[error("breakpoint offsets must be strictly increasing inside the domain (at {0})")]
    BadBreakpoint(i64),
    #[error("level {level} exceeds grid top {denom}")]
    LevelOutOfGrid { level: u32, denom: u32 },
    #[error("not semi-convex: level {} set splits around {gap}", level.0)]
    NotSemiConvex { level: Level, gap: Interval },
    #[error("offset {x} outside domain {domain}")]
    OutOfDomain { x: i64, domain: Interval },
}

/// Integer step function `offset -> Level` with contiguous upper level sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SemiConvexFn {
    domain: Interval,
    breakpoints: Vec<(i64, Level)>,
}

/// Checks that every upper level set of the step function is contiguous.
///
/// Reports the highest level whose set splits, with the offending gap.
pub fn validate_semiconvex(domain: Interval, breakpoints: &[(i64, Level)]) -> Result<(), PrefError> {
    let segs = segments(domain, breakpoints);
    let mut levels: Vec<Level> = segs.iter().map(|s| s.1).collect();
    levels.sort_unstable_by(|a, b| b.cmp(a));
    levels.dedup();
    for alpha in levels {
        let first = segs.iter().position(|s| s.1 >= alpha);
        let last = segs.iter().rposition(|s| s.1 >= alpha);
        if let (Some(a), Some(b)) = (first, last) {
            if let Some(g) = segs[a..=b].iter().find(|s| s.1 < alpha) {
                return Err(PrefError::NotSemiConvex {
                    level: alpha,
                    gap: g.0,
                });
            }
        }
    }
    Ok(())
}

fn segments(domain: Interval, bps: &[(i64, Level)]) -> Vec<(Interval, Level)> {
    bps.iter()
        .enumerate()
        .map(|(i, &(x, l))| {
            let end = bps.get(i + 1).map_or(domain.hi, |n| n.0 - 1);
            (Interval { lo: x, hi: end }, l)
        })
        .collect()
}

impl SemiConvexFn {
    /// Builds and validates a step function. Consecutive breakpoints with
    /// equal levels are coalesced.
    pub fn new(domain: Interval, breakpoints: Vec<(i64, Level)>) -> Result<SemiConvexFn, PrefError> {
        if !domain.is_bounded() {
            return Err(PrefError::UnboundedDomain(domain));
        }
        let first = breakpoints.first().ok_or(PrefError::NoBreakpoints)?;
        if first.0 != domain.lo {
            return Err(PrefError::FirstBreakpoint {
                expected: domain.lo,
                found: first.0,
            });
        }
        for w in breakpoints.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(PrefError::BadBreakpoint(w[1].0));
            }
        }
        if let Some(&(x, _)) = breakpoints.iter().find(|b| b.0 > domain.hi) {
            return Err(PrefError::BadBreakpoint(x));
        }
        validate_semiconvex(domain, &breakpoints)?;
        let mut bps: Vec<(i64, Level)> = Vec::with_capacity(breakpoints.len());
        for b in breakpoints {
            if bps.last().map(|l| l.1) != Some(b.1) {
                bps.push(b);
            }
        }
        Ok(SemiConvexFn {
            domain,
            breakpoints: bps,
        })
    }

    pub fn constant(domain: Interval, level: Level) -> Result<SemiConvexFn, PrefError> {
        SemiConvexFn::new(domain, vec![(domain.lo, level)])
    }

    /// Builds from one level per integer offset of the domain.
    pub fn from_values(domain: Interval, values: &[u32]) -> Result<SemiConvexFn, PrefError> {
        let bps = values
            .iter()
            .enumerate()
            .map(|(i, &k)| (domain.lo + i as i64, Level(k)))
            .collect();
        SemiConvexFn::new(domain, bps)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn breakpoints(&self) -> &[(i64, Level)] {
        &self.breakpoints
    }

    pub fn max_level(&self) -> Level {
        self.breakpoints.iter().map(|b| b.1).max().unwrap_or(Level(0))
    }

    pub fn min_level(&self) -> Level {
        self.breakpoints.iter().map(|b| b.1).min().unwrap_or(Level(0))
    }

    /// Step-function value at `x`.
    pub fn eval(&self, x: i64) -> Result<Level, PrefError> {
        if !self.domain.contains(x) {
            return Err(PrefError::OutOfDomain {
                x,
                domain: self.domain,
            });
        }
        let idx = self.breakpoints.partition_point(|b| b.0 <= x) - 1;
        Ok(self.breakpoints[idx].1)
    }

    /// Offsets with preference at least `alpha`, or `None` if there are none.
    pub fn cut(&self, alpha: Level) -> Option<Interval> {
        let segs = segments(self.domain, &self.breakpoints);
        let lo = segs.iter().find(|s| s.1 >= alpha)?.0.lo;
        let hi = segs.iter().rev().find(|s| s.1 >= alpha)?.0.hi;
        Some(Interval { lo, hi })
    }

    /// The same function restricted to a sub-interval of its domain.
    pub fn restrict(&self, iv: Interval) -> Result<SemiConvexFn, PrefError> {
        let d = self
            .domain
            .intersect(&iv)
            .ok_or(PrefError::OutOfDomain { x: iv.lo, domain: self.domain })?;
        let mut bps = vec![(d.lo, self.eval(d.lo)?)];
        bps.extend(
            self.breakpoints
                .iter()
                .filter(|b| b.0 > d.lo && b.0 <= d.hi)
                .copied(),
        );
        SemiConvexFn::new(d, bps)
    }

    fn check_grid(&self, grid: &PreferenceGrid) -> Result<(), PrefError> {
        match self.breakpoints.iter().find(|b| !grid.contains(b.1)) {
            Some(b) => Err(PrefError::LevelOutOfGrid {
                level: b.1 .0,
                denom: grid.denom(),
            }),
            None => Ok(()),
        }
    }
}

/// `eval_pref` by name.
pub fn eval_pref(f: &SemiConvexFn, x: i64) -> Result<Level, PrefError> {
    f.eval(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Requirement,
    Contingent,
}

/// A soft constraint `to - from ∈ interval` valued by `pref`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SoftConstraint {
    pub from: TimePointId,
    pub to: TimePointId,
    pub pref: SemiConvexFn,
    pub kind: ConstraintKind,
}

impl SoftConstraint {
    pub fn requirement(from: TimePointId, to: TimePointId, pref: SemiConvexFn) -> SoftConstraint {
        SoftConstraint {
            from,
            to,
            pref,
            kind: ConstraintKind::Requirement,
        }
    }

    pub fn contingent(from: TimePointId, to: TimePointId, pref: SemiConvexFn) -> SoftConstraint {
        SoftConstraint {
            from,
            to,
            pref,
            kind: ConstraintKind::Contingent,
        }
    }

    pub fn interval(&self) -> Interval {
        self.pref.domain()
    }

    pub fn is_contingent(&self) -> bool {
        self.kind == ConstraintKind::Contingent
    }
}

/// `alpha_cut` by name.
pub fn alpha_cut(c: &SoftConstraint, alpha: Level) -> Option<Interval> {
    c.pref.cut(alpha)
}

/// Anything made of soft constraints over named time-points.
pub trait SoftProblem {
    fn names(&self) -> &[String];
    fn grid(&self) -> PreferenceGrid;
    fn soft_constraints(&self) -> &[SoftConstraint];

    /// Lowest on-grid value taken by any local function; top if there are none.
    fn alpha_min(&self) -> Level {
        self.soft_constraints()
            .iter()
            .map(|c| c.pref.min_level())
            .min()
            .unwrap_or(self.grid().top())
    }

    /// Every constraint cut at `alpha`, as a crisp STP (kinds forgotten).
    fn cut_stp(&self, alpha: Level) -> Option<Stp> {
        let mut stp = Stp::new(self.names().iter().cloned());
        for c in self.soft_constraints() {
            let iv = c.pref.cut(alpha)?;
            stp.tighten(c.from, c.to, iv).ok()?;
        }
        Some(stp)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("constraint #{index} ({from}->{to}) violated: offset {offset} outside {interval}")]
pub struct Violation {
    pub index: usize,
    pub from: usize,
    pub to: usize,
    pub offset: i64,
    pub interval: Interval,
}

/// Minimum local preference of a complete schedule.
pub fn schedule_preference<P: SoftProblem + ?Sized>(s: &Schedule, p: &P) -> Result<Level, Violation> {
    let mut best = p.grid().top();
    for (index, c) in p.soft_constraints().iter().enumerate() {
        let offset = s.get(c.to) - s.get(c.from);
        let l = c.pref.eval(offset).map_err(|_| Violation {
            index,
            from: c.from.0,
            to: c.to.0,
            offset,
            interval: c.interval(),
        })?;
        best = best.min(l);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StppError {
    #[error(transparent)]
    Pref(#[from] PrefError),
    #[error(transparent)]
    Stp(#[from] StpError),
    #[error("constraint #{0} is contingent; use an uncertain problem")]
    ContingentInStpp(usize),
    #[error("two constraints on the pair {0}-{1}")]
    DuplicatePair(usize, usize),
    #[error("no consistent schedule even at the lowest preference level")]
    Inconsistent,
}

/// Simple temporal problem with fuzzy preferences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stpp {
    names: Vec<String>,
    grid: PreferenceGrid,
    constraints: Vec<SoftConstraint>,
}

impl Stpp {
    pub fn new<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        grid: PreferenceGrid,
        constraints: Vec<SoftConstraint>,
    ) -> Result<Stpp, StppError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut seen = std::collections::BTreeSet::new();
        for (i, c) in constraints.iter().enumerate() {
            if c.is_contingent() {
                return Err(StppError::ContingentInStpp(i));
            }
            check_endpoints(&names, c)?;
            c.pref.check_grid(&grid)?;
            let key = (c.from.0.min(c.to.0), c.from.0.max(c.to.0));
            if !seen.insert(key) {
                return Err(StppError::DuplicatePair(key.0, key.1));
            }
        }
        Ok(Stpp {
            names,
            grid,
            constraints,
        })
    }

    pub fn constraints(&self) -> &[SoftConstraint] {
        &self.constraints
    }
}

pub(crate) fn check_endpoints(names: &[String], c: &SoftConstraint) -> Result<(), StpError> {
    if c.from == c.to {
        return Err(StpError::SelfLoop(c.from.0));
    }
    for p in [c.from, c.to] {
        if p.0 >= names.len() {
            return Err(StpError::UnknownPoint(p.0));
        }
    }
    Ok(())
}

pub(crate) fn check_grid(c: &SoftConstraint, grid: &PreferenceGrid) -> Result<(), PrefError> {
    c.pref.check_grid(grid)
}

impl SoftProblem for Stpp {
    fn names(&self) -> &[String] {
        &self.names
    }

    fn grid(&self) -> PreferenceGrid {
        self.grid
    }

    fn soft_constraints(&self) -> &[SoftConstraint] {
        &self.constraints
    }
}

/// `cut_problem` for an STPP.
pub fn cut_problem(p: &Stpp, alpha: Level) -> Option<Stp> {
    p.cut_stp(alpha)
}

/// Highest level whose cut is consistent, with the minimal network there.
///
/// Binary search over the grid; valid because cuts are nested.
pub fn solve_stpp<P: SoftProblem + ?Sized>(p: &P) -> Result<(Level, Stp), StppError> {
    let consistent = |a: Level| -> Option<Stp> {
        let stp = p.cut_stp(a)?;
        stp::minimal_network(&stp).ok()
    };
    let lo_level = p.alpha_min();
    let mut best = consistent(lo_level).ok_or(StppError::Inconsistent)?;
    let (mut lo, mut hi) = (lo_level.0, p.grid().top().0);
    // invariant: lo is consistent
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        match consistent(Level(mid)) {
            Some(m) => {
                lo = mid;
                best = m;
            }
            None => hi = mid - 1,
        }
    }
    Ok((Level(lo), best))
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: i64, hi: i64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn sa_ec() -> SemiConvexFn {
        SemiConvexFn::from_values(iv(-6, 4), &[6, 7, 8, 9, 10, 10, 9, 8, 7, 6, 6]).unwrap()
    }

    #[test]
    fn eval_steps() {
        let f = SemiConvexFn::new(iv(1, 8), vec![(1, Level(10)), (3, Level(9)), (5, Level(8))]).unwrap();
        assert_eq!(f.eval(5), Ok(Level(8)));
        assert_eq!(f.eval(2), Ok(Level(10)));
        assert_eq!(f.eval(8), Ok(Level(8)));
        assert!(f.eval(9).is_err());
        let flat = SemiConvexFn::constant(iv(0, 4), Level(10)).unwrap();
        assert_eq!(flat.eval(3), Ok(Level(10)));
    }

    #[test]
    fn validation() {
        assert!(validate_semiconvex(sa_ec().domain(), sa_ec().breakpoints()).is_ok());
        let bimodal = vec![(0, Level(10)), (1, Level(5)), (2, Level(10))];
        assert_eq!(
            validate_semiconvex(iv(0, 2), &bimodal),
            Err(PrefError::NotSemiConvex {
                level: Level(10),
                gap: iv(1, 1)
            })
        );
        assert!(SemiConvexFn::from_values(iv(0, 4), &[1, 2, 3, 4, 5]).is_ok());
        assert!(SemiConvexFn::new(iv(0, 2), bimodal).is_err());
    }

    #[test]
    fn cuts() {
        let f = sa_ec();
        assert_eq!(f.cut(Level(10)), Some(iv(-2, -1)));
        assert_eq!(f.cut(Level(9)), Some(iv(-3, 0)));
        assert_eq!(f.cut(Level(0)), Some(iv(-6, 4)));
        let g = SemiConvexFn::constant(iv(0, 3), Level(5)).unwrap();
        assert_eq!(g.cut(Level(6)), None);
    }

    #[test]
    fn restrict_keeps_values() {
        let f = sa_ec();
        let r = f.restrict(iv(-3, 2)).unwrap();
        for x in -3..=2 {
            assert_eq!(r.eval(x), f.eval(x));
        }
        assert_eq!(r.domain(), iv(-3, 2));
    }

    #[test]
    fn stpp_opt_by_chopping() {
        // X1 - X0 prefers 5, X2 - X1 prefers 5, X2 - X0 prefers <= 6
        let a = SemiConvexFn::from_values(iv(0, 10), &[1, 2, 3, 4, 5, 10, 5, 4, 3, 2, 1]).unwrap();
        let c = SemiConvexFn::from_values(iv(0, 10), &[10, 10, 10, 10, 10, 10, 10, 3, 3, 3, 3]).unwrap();
        let p = Stpp::new(
            ["X0", "X1", "X2"],
            PreferenceGrid::default(),
            vec![
                SoftConstraint::requirement(TimePointId(0), TimePointId(1), a.clone()),
                SoftConstraint::requirement(TimePointId(1), TimePointId(2), a),
                SoftConstraint::requirement(TimePointId(0), TimePointId(2), c),
            ],
        )
        .unwrap();
        let (opt, net) = solve_stpp(&p).unwrap();
        assert_eq!(opt, Level(4));
        assert!(stp::earliest_solution(&net).is_ok());
    }
}
