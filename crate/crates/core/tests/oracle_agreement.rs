//! The level algorithms against the exhaustive oracles on wider random
//! samples than the acceptance suite.

use stppu::control::{best_dc, best_sc, Stppu, Verdict};
use stppu::gen::{gen_random, GenSpec};
use stppu::io::parse_problem;
use stppu::oracle::{oracle_dc_level, oracle_sc_level, SearchBounds};
use stppu::preference::{Level, SoftProblem};
use stppu::stpu;

fn spec(seed: u64) -> GenSpec {
    let n = 3 + (seed % 3) as usize;
    GenSpec {
        n,
        contingent_count: (1 + (seed / 3 % 2) as usize).min(n - 1),
        density: [0.2, 0.5, 0.8][(seed / 7 % 3) as usize],
        span: 4 + (seed / 11 % 6) as i64,
        denom: 2 + (seed / 13 % 4) as u32,
        seed,
    }
}

/// Optimal verdicts rank above every partial one.
fn rank(v: &Verdict) -> i64 {
    match v {
        Verdict::Optimal(l) => 1000 + l.0 as i64,
        _ => v.level().map_or(-1, |l| l.0 as i64),
    }
}

/// Whether, at every level, each situation allowed by the path-consistent
/// cut has a consistent projection at that level.
fn box_closed(p: &Stppu) -> bool {
    (p.alpha_min().0..=p.grid().denom()).all(|k| match p.cut(Level(k)).and_then(|u| stpu::path_consistent(&u).ok()) {
        Some(u) => stpu::check_weak(&u),
        None => true,
    })
}

#[test]
fn exact_on_box_closed_and_never_above() {
    let b = SearchBounds::default();
    let (mut exact, mut conservative) = (0, 0);
    for seed in 0..1500 {
        let p = gen_random(&spec(seed)).unwrap();
        let closed = box_closed(&p);
        let mut pairs = vec![(best_sc(&p).verdict, oracle_sc_level(&p, &b).unwrap(), "sc")];
        if p.len() <= 4 {
            pairs.push((best_dc(&p).verdict, oracle_dc_level(&p, &b).unwrap(), "dc"));
        }
        for (got, want, what) in pairs {
            assert!(rank(&got) <= rank(&want), "seed {seed} {what}: {got:?} above oracle {want:?}");
            if closed {
                assert_eq!(got, want, "seed {seed} {what}");
                exact += 1;
            } else if got != want {
                conservative += 1;
            }
        }
    }
    assert!(exact > 1000);
    println!("{exact} exact comparisons, {conservative} conservative misses");
}

/// Two contingent durations coupled by a requirement whose top-level cut
/// excludes one corner situation only.
const COUPLED: &str = "stppu-v1
granularity 2
timepoint O executable
timepoint C1 contingent
timepoint C2 contingent
constraint ctg O C1 [1,2] pref 1:2
constraint ctg O C2 [1,4] pref 1:2
constraint req C2 C1 [-3,1] pref -3:2 1:1
";

#[test]
fn coupled_contingents_are_underreported() {
    let p = parse_problem(COUPLED).unwrap();
    assert!(!box_closed(&p));
    let b = SearchBounds::default();
    assert_eq!(oracle_sc_level(&p, &b), Ok(Verdict::Optimal(Level(2))));
    assert_eq!(oracle_dc_level(&p, &b), Ok(Verdict::Optimal(Level(2))));
    assert_eq!(best_sc(&p).verdict, Verdict::AtLevel(Level(1)));
    assert_eq!(best_dc(&p).verdict, Verdict::AtLevel(Level(1)));
}
