//! Seeded random instances for tests and the `gen` subcommand.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::control::Stppu;
use crate::preference::{PreferenceGrid, SemiConvexFn, SoftConstraint};
use crate::stp::{Interval, TimePointId};
use crate::stpu::PointKind;

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    /// Time-points, origin included.
    pub n: usize,
    pub contingent_count: usize,
    /// Chance of an extra requirement on each otherwise unconstrained pair.
    pub density: f64,
    /// Largest absolute interval bound.
    pub span: i64,
    pub denom: u32,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> GenSpec {
        GenSpec {
            n: 4,
            contingent_count: 1,
            density: 0.3,
            span: 8,
            denom: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("need at least one time-point")]
    Empty,
    #[error("{contingents} contingent points do not fit in {n} time-points")]
    TooManyContingents { n: usize, contingents: usize },
    #[error("span must be at least 2")]
    Span,
    #[error("grid denominator must be positive")]
    Denom,
}

/// Random semi-convex function over `iv`: top level at a random peak,
/// non-increasing steps outward.
fn peaked(rng: &mut ChaCha8Rng, iv: Interval, denom: u32) -> SemiConvexFn {
    let width = (iv.hi - iv.lo + 1) as usize;
    let peak = rng.gen_range(0..width);
    let mut values = vec![denom; width];
    for dir in [-1i64, 1] {
        let mut level = denom;
        let mut i = peak as i64 + dir;
        while i >= 0 && (i as usize) < width {
            if level > 1 && rng.gen_bool(0.5) {
                level -= rng.gen_range(1..=(level - 1).min(2));
            }
            values[i as usize] = level;
            i += dir;
        }
    }
    SemiConvexFn::from_values(iv, &values).expect("peaked values are semi-convex")
}

/// Random interval with bounds in `[lo_min, span]`, at least `min_w` wide
/// where room allows, containing `around` if given.
fn interval(rng: &mut ChaCha8Rng, lo_min: i64, span: i64, min_w: i64, around: Option<i64>) -> Interval {
    let max_w = (span - lo_min).clamp(0, (span / 2 + 1).max(min_w));
    let w = rng.gen_range(min_w.min(max_w)..=max_w);
    let lo = match around {
        Some(x) => {
            let lo = rng.gen_range((x - w).max(lo_min)..=x);
            lo.min(span - w)
        }
        None => rng.gen_range(lo_min..=span - w),
    };
    Interval::new(lo, lo + w).expect("lo <= hi")
}

/// A well-formed random problem, deterministic in `spec.seed`.
///
/// The origin is point 0. Every other executable gets a requirement from the
/// origin with a non-negative lower bound; every contingent point hangs off an
/// executable with a positive lower bound. Extra requirements are drawn
/// around one reference schedule so that some projection is consistent.
pub fn gen_random(spec: &GenSpec) -> Result<Stppu, GenError> {
    if spec.n == 0 {
        return Err(GenError::Empty);
    }
    if spec.contingent_count >= spec.n {
        return Err(GenError::TooManyContingents {
            n: spec.n,
            contingents: spec.contingent_count,
        });
    }
    if spec.span < 2 {
        return Err(GenError::Span);
    }
    let grid = PreferenceGrid::new(spec.denom).map_err(|_| GenError::Denom)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let span = spec.span;

    let mut kinds = vec![PointKind::Executable; spec.n];
    let mut others: Vec<usize> = (1..spec.n).collect();
    others.shuffle(&mut rng);
    for &c in &others[..spec.contingent_count] {
        kinds[c] = PointKind::Contingent;
    }
    let names: Vec<String> = (0..spec.n)
        .map(|i| match (i, kinds[i]) {
            (0, _) => "O".to_string(),
            (_, PointKind::Executable) => format!("X{i}"),
            (_, PointKind::Contingent) => format!("C{i}"),
        })
        .collect();
    let execs: Vec<usize> = (0..spec.n).filter(|&i| kinds[i] == PointKind::Executable).collect();

    let mut reference = vec![0i64; spec.n];
    // duration range of the link ending at each contingent point
    let mut width = vec![0i64; spec.n];
    let mut constraints = Vec::new();
    let mut constrained = std::collections::BTreeSet::new();
    for &x in &execs[1..] {
        let iv = interval(&mut rng, 0, span, 0, None);
        reference[x] = rng.gen_range(iv.lo..=iv.hi);
        constraints.push(SoftConstraint::requirement(TimePointId(0), TimePointId(x), peaked(&mut rng, iv, spec.denom)));
        constrained.insert((0, x));
    }
    for c in (1..spec.n).filter(|&i| kinds[i] == PointKind::Contingent) {
        let a = *execs.choose(&mut rng).expect("origin is executable");
        let iv = interval(&mut rng, 1, span, 0, None);
        width[c] = iv.hi - iv.lo;
        reference[c] = reference[a] + rng.gen_range(iv.lo..=iv.hi);
        constraints.push(SoftConstraint::contingent(TimePointId(a), TimePointId(c), peaked(&mut rng, iv, spec.denom)));
        constrained.insert((a.min(c), a.max(c)));
    }
    for i in 0..spec.n {
        for j in i + 1..spec.n {
            if constrained.contains(&(i, j)) || !rng.gen_bool(spec.density.clamp(0.0, 1.0)) {
                continue;
            }
            let (from, to) = if rng.gen_bool(0.5) { (i, j) } else { (j, i) };
            let d = reference[to] - reference[from];
            // narrower than the durations it must absorb, an edge rules out
            // control at every level
            let iv = interval(&mut rng, -span, span, width[i] + width[j], Some(d.clamp(-span, span)));
            constraints.push(SoftConstraint::requirement(
                TimePointId(from),
                TimePointId(to),
                peaked(&mut rng, iv, spec.denom),
            ));
        }
    }
    Ok(Stppu::new(names, kinds, grid, constraints).expect("generated problems are well-formed"))
}
