//! End-to-end acceptance checks. Prints one line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stppu::control::{best_dc, best_sc, odc_execute_all, owc_check, StopEvent, Stppu, Verdict, Witness};
use stppu::dynamic::check_dynamic;
use stppu::execute::{dc_execute, NatureModel};
use stppu::fixtures;
use stppu::gen::{gen_random, GenSpec};
use stppu::oracle::{enumerate_situations, oracle_dc_level, oracle_sc_level, projection_opt, SearchBounds};
use stppu::preference::{Level, PreferenceGrid, SemiConvexFn, SoftConstraint, SoftProblem};
use stppu::stp::{self, Interval, Schedule, Stp, TimePointId};
use stppu::stpu::{self, Stpu};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn iv(lo: i64, hi: i64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

fn id(p: &Stppu, name: &str) -> TimePointId {
    p.index_of(name).unwrap()
}

fn level_rank(v: &Verdict) -> i64 {
    v.level().map_or(-1, |l| l.0 as i64)
}

// 1. cuts, path consistency and strong rewrite per level
fn eos_tables() -> Outcome {
    let p = fixtures::eos();
    let (sc, sa, ec) = (id(&p, "SC"), id(&p, "SA"), id(&p, "EC"));
    // level, cut (SC->EC, SC->SA, SA->EC), path consistent, strong SC->SA
    let rows: [(u32, [Interval; 3], [Interval; 3], Interval); 6] = [
        (5, [iv(1, 8), iv(1, 5), iv(-6, 4)], [iv(1, 8), iv(1, 5), iv(-4, 4)], iv(4, 5)),
        (6, [iv(1, 7), iv(1, 5), iv(-6, 4)], [iv(1, 7), iv(1, 5), iv(-4, 4)], iv(3, 5)),
        (7, [iv(1, 6), iv(1, 5), iv(-5, 2)], [iv(1, 6), iv(1, 5), iv(-4, 2)], iv(4, 5)),
        (8, [iv(1, 5), iv(1, 5), iv(-4, 1)], [iv(1, 5), iv(1, 5), iv(-4, 1)], iv(4, 5)),
        (9, [iv(1, 4), iv(1, 5), iv(-3, 0)], [iv(1, 4), iv(1, 5), iv(-3, 0)], iv(4, 4)),
        (10, [iv(1, 2), iv(1, 3), iv(-2, -1)], [iv(1, 2), iv(2, 3), iv(-2, -1)], iv(3, 3)),
    ];
    let edges = [(sc, ec), (sc, sa), (sa, ec)];
    let mut bad = Vec::new();
    for (k, cut, pc, strong) in rows {
        let Some(q) = p.cut(Level(k)) else {
            bad.push(format!("{k}: empty cut"));
            continue;
        };
        let got: Vec<Interval> = edges.iter().map(|&(a, b)| q.stp().interval(a, b).unwrap()).collect();
        if got != cut {
            bad.push(format!("{k}: cut {got:?}"));
        }
        let Ok(m) = stpu::path_consistent(&q) else {
            bad.push(format!("{k}: inconsistent"));
            continue;
        };
        let got: Vec<Interval> = edges.iter().map(|&(a, b)| m.stp().interval(a, b).unwrap()).collect();
        if got != pc {
            bad.push(format!("{k}: path consistent {got:?}"));
        }
        match stpu::check_strong(&m) {
            Ok(e) => {
                let got = e.stp.interval(e.local(sc).unwrap(), e.local(sa).unwrap());
                if got != Some(strong) {
                    bad.push(format!("{k}: strong {got:?}"));
                }
            }
            Err(e) => bad.push(format!("{k}: {e}")),
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "6 levels exact".to_string() } else { bad.join("; ") })
}

// 2. Best-SC on EOS
fn eos_best_sc() -> Outcome {
    let p = fixtures::eos();
    let r = best_sc(&p);
    let n = r.strong_network().unwrap();
    let sa = n.stp.interval(n.local(id(&p, "SC")).unwrap(), n.local(id(&p, "SA")).unwrap());
    let pass = r.verdict == Verdict::AtLevel(Level(9)) && r.stop_event == Some(StopEvent::CombineFailed) && sa == Some(iv(4, 4));
    outcome(pass, format!("verdict {:?}, stop {:?}, SC->SA {:?}", r.verdict, r.stop_event.map(|e| e.code()), sa))
}

// 3. per-level DC on fail5, Best-DC and the dynamic oracle
fn fail5_dynamic() -> Outcome {
    let p = fixtures::fail5();
    let (a, b, c) = (id(&p, "A"), id(&p, "B"), id(&p, "C"));
    // level, AB interval, wait on AB; a wait no longer than the lower bound
    // is implied and the table leaves it out
    let table = [
        (10, iv(3, 3), None),
        (9, iv(3, 4), Some(3)),
        (8, iv(3, 5), Some(3)),
        (7, iv(3, 6), Some(3)),
        (6, iv(3, 7), Some(3)),
        (5, iv(3, 7), Some(4)),
    ];
    let mut bad = Vec::new();
    for (k, ab, wait) in table {
        let net = p
            .cut(Level(k))
            .and_then(|u| if k == 5 { Some(u) } else { stpu::path_consistent(&u).ok() })
            .map(|u| check_dynamic(&u));
        match net {
            Some(Ok(n)) => {
                let got = n.interval(a, b);
                let w = n.waits_on(a, b).and_then(|w| w.get(&c).copied());
                let same = w == wait || (wait.is_none() && w.is_some_and(|t| t <= got.lo));
                if got != ab || !same {
                    bad.push(format!("{k}: {got} wait {w:?}"));
                }
            }
            other => bad.push(format!("{k}: {other:?}")),
        }
    }
    let r = best_dc(&p);
    let oracle = oracle_dc_level(&p, &SearchBounds::default());
    let pass = bad.is_empty() && r.verdict == Verdict::AtLevel(Level(9)) && oracle == Ok(r.verdict);
    outcome(
        pass,
        format!(
            "table {}, best_dc {:?}, oracle {:?}",
            if bad.is_empty() { "exact".to_string() } else { bad.join("; ") },
            r.verdict,
            oracle
        ),
    )
}

// 4. weak controllability
fn owc() -> Outcome {
    let got = [owc_check(&fixtures::eos()), owc_check(&fixtures::fail5()), owc_check(&fixtures::not_wc())];
    outcome(got == [true, true, false], format!("eos {}, fail5 {}, not_wc {}", got[0], got[1], got[2]))
}

fn lattice_spec(seed: u64) -> GenSpec {
    let n = 3 + (seed % 3) as usize;
    GenSpec {
        n,
        contingent_count: 1 + (seed / 3 % 2) as usize,
        density: [0.2, 0.5, 0.8][(seed / 7 % 3) as usize],
        span: 4 + (seed / 11 % 5) as i64,
        denom: 2 + (seed / 13 % 4) as u32,
        seed,
    }
}

/// Strong controllability of the cut at `k`, checked as the level loop does.
fn sc_at(p: &Stppu, k: u32) -> bool {
    let Some(u) = p.cut(Level(k)) else { return false };
    let u = if Level(k) == p.alpha_min() {
        Some(u)
    } else {
        stpu::path_consistent(&u).ok()
    };
    u.is_some_and(|u| stpu::check_strong(&u).is_ok())
}

fn contains(outer: &Stpu, inner: &Stpu) -> bool {
    let n = outer.len();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let o = outer.stp().interval(TimePointId(i), TimePointId(j)).unwrap_or_else(Interval::unbounded);
            let x = inner.stp().interval(TimePointId(i), TimePointId(j)).unwrap_or_else(Interval::unbounded);
            o.contains_interval(&x)
        })
    })
}

// 5. implications between properties
fn lattice() -> Outcome {
    let mut bad = Vec::new();
    for seed in 0..200 {
        let p = gen_random(&lattice_spec(seed)).unwrap();
        let sc = best_sc(&p);
        let dc = best_dc(&p);
        let wc = owc_check(&p);
        if level_rank(&sc.verdict) > level_rank(&dc.verdict) {
            bad.push(format!("{seed}: sc {:?} above dc {:?}", sc.verdict, dc.verdict));
        }
        if matches!(sc.verdict, Verdict::Optimal(_)) && !matches!(dc.verdict, Verdict::Optimal(_)) {
            bad.push(format!("{seed}: osc without odc"));
        }
        if dc.verdict != Verdict::None && !wc {
            bad.push(format!("{seed}: dc without wc"));
        }
        let amin = p.alpha_min().0;
        if let Some(l) = sc.verdict.level() {
            if let Some(k) = (amin..=l.0).find(|&k| !sc_at(&p, k)) {
                bad.push(format!("{seed}: sc at {} but not at {k}", l.0));
            }
        }
        if let (Some(l), Witness::Dynamic(r)) = (dc.verdict.level(), &dc.witness) {
            let levels: Vec<u32> = r.family.levels.iter().map(|f| f.level.0).collect();
            let expect: Vec<u32> = (amin..=l.0).collect();
            if levels.len() < expect.len() || levels[..expect.len()] != expect[..] {
                bad.push(format!("{seed}: family levels {levels:?}"));
            }
            if r.family.levels.windows(2).any(|w| !contains(&w[0].merged.stpu, &w[1].merged.stpu)) {
                bad.push(format!("{seed}: family not nested"));
            }
        }
    }
    outcome(bad.is_empty(), format!("200 instances, {} violations {}", bad.len(), bad.iter().take(3).cloned().collect::<Vec<_>>().join("; ")))
}

fn sc_suite() -> Vec<Stppu> {
    (0..100)
        .map(|seed| {
            let n = 3 + (seed % 3) as usize;
            gen_random(&GenSpec {
                n,
                contingent_count: 1 + (seed / 3 % 2) as usize,
                density: [0.2, 0.5, 0.8][(seed / 7 % 3) as usize],
                span: 6,
                denom: 2 + (seed / 13 % 4) as u32,
                seed: 1000 + seed,
            })
            .unwrap()
        })
        .collect()
}

fn dc_suite() -> Vec<Stppu> {
    (0..50)
        .map(|seed| {
            gen_random(&GenSpec {
                n: 3 + (seed % 2) as usize,
                contingent_count: 1 + (seed / 2 % 2) as usize,
                density: [0.2, 0.5, 0.8][(seed / 5 % 3) as usize],
                span: 5,
                denom: 2 + (seed / 7 % 4) as u32,
                seed: 5000 + seed,
            })
            .unwrap()
        })
        .collect()
}

// 6. algorithms against the exhaustive oracles
fn oracle_equivalence(sc: &[Stppu], dc: &[Stppu]) -> Outcome {
    let b = SearchBounds::default();
    let mut bad = Vec::new();
    let mut inconclusive = 0;
    let mut kinds = BTreeMap::new();
    for (i, p) in sc.iter().enumerate() {
        match oracle_sc_level(p, &b) {
            Ok(v) if v != best_sc(p).verdict => bad.push(format!("sc #{i}: best {:?} oracle {v:?}", best_sc(p).verdict)),
            Ok(v) => *kinds.entry(format!("sc {}", v.label())).or_insert(0) += 1,
            Err(_) => inconclusive += 1,
        }
    }
    for (i, p) in dc.iter().enumerate() {
        match oracle_dc_level(p, &b) {
            Ok(v) if v != best_dc(p).verdict => bad.push(format!("dc #{i}: best {:?} oracle {v:?}", best_dc(p).verdict)),
            Ok(v) => *kinds.entry(format!("dc {}", v.label())).or_insert(0) += 1,
            Err(_) => inconclusive += 1,
        }
    }
    outcome(
        bad.is_empty() && inconclusive == 0,
        format!(
            "{} sc + {} dc instances {kinds:?}, {} disagreements, {inconclusive} inconclusive {}",
            sc.len(),
            dc.len(),
            bad.len(),
            bad.join("; ")
        ),
    )
}

// 7. executions reach the promised preference
fn execution(sc: &[Stppu], dc: &[Stppu]) -> Outcome {
    let b = SearchBounds::default();
    let (mut runs, mut plain_runs) = (0, 0);
    let mut bad = Vec::new();
    for (i, p) in sc.iter().chain(dc).enumerate() {
        let strip = p.strip();
        let situations = enumerate_situations(&strip, &b).unwrap();
        let r = best_dc(p);
        if let Witness::Dynamic(res) = &r.witness {
            for (w, run) in odc_execute_all(res, &situations) {
                runs += 1;
                let opt = projection_opt(p, &w);
                let ok = match (&run, r.verdict, opt) {
                    (Ok(e), Verdict::Optimal(_), _) => Some(e.achieved) == opt,
                    (Ok(e), Verdict::AtLevel(a), Some(o)) => {
                        if o <= a {
                            e.achieved == o
                        } else {
                            e.achieved >= a
                        }
                    }
                    _ => false,
                };
                if !ok {
                    bad.push(format!("#{i} {w:?}: {:?} opt {opt:?}", run.map(|e| e.achieved)));
                }
            }
        }
        if let Ok(net) = check_dynamic(&strip) {
            for w in &situations {
                plain_runs += 1;
                match dc_execute(&net, &NatureModel::Scripted(w.clone())) {
                    Ok(e) if stp::satisfies(&e.schedule, &stpu::project(&strip, w).unwrap()) => {}
                    other => bad.push(format!("#{i} plain {w:?}: {other:?}")),
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{runs} preference-aware runs, {plain_runs} plain runs, {} failures {}",
            bad.len(),
            bad.iter().take(3).cloned().collect::<Vec<_>>().join("; ")
        ),
    )
}

fn random_stp(rng: &mut ChaCha8Rng, n: usize, h: i64) -> Stp {
    let mut s = Stp::new((0..n).map(|i| format!("P{i}")));
    for j in 1..n {
        let lo = rng.gen_range(0..=h);
        s.set(TimePointId(0), TimePointId(j), iv(lo, rng.gen_range(lo..=h))).unwrap();
    }
    for i in 1..n {
        for j in i + 1..n {
            if rng.gen_bool(0.6) {
                let lo = rng.gen_range(-h..=h);
                s.set(TimePointId(i), TimePointId(j), iv(lo, rng.gen_range(lo..=h))).unwrap();
            }
        }
    }
    s
}

/// Any integer solution with the origin at 0, by enumeration over `[0, h]`.
fn brute_solution(s: &Stp, h: i64) -> Option<Schedule> {
    let n = s.len();
    let mut vals = vec![0i64; n];
    loop {
        let sched = Schedule::new(vals.clone());
        if stp::satisfies(&sched, s) {
            return Some(sched);
        }
        let mut i = 1;
        loop {
            if i == n {
                return None;
            }
            if vals[i] < h {
                vals[i] += 1;
                break;
            }
            vals[i] = 0;
            i += 1;
        }
    }
}

// 8. simple temporal core against enumeration
fn stp_core() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = 10;
    let mut bad = Vec::new();
    let mut consistent = 0;
    for k in 0..500 {
        let n = rng.gen_range(2..=4);
        let s = random_stp(&mut rng, n, h);
        let brute = brute_solution(&s, h);
        let closed = stp::close_distances(&s);
        if closed.is_ok() != brute.is_some() {
            bad.push(format!("#{k}: closure {} brute {}", closed.is_ok(), brute.is_some()));
            continue;
        }
        let Ok(m) = stp::minimal_network(&s) else { continue };
        consistent += 1;
        if stp::minimal_network(&m).as_ref() != Ok(&m) {
            bad.push(format!("#{k}: not idempotent"));
        }
        for sol in [stp::earliest_solution(&m), stp::latest_solution(&m)] {
            if !sol.is_ok_and(|x| stp::satisfies(&x, &s)) {
                bad.push(format!("#{k}: extreme solution fails"));
            }
        }
    }
    outcome(bad.is_empty(), format!("500 instances ({consistent} consistent), {} failures {}", bad.len(), bad.join("; ")))
}

/// The same problem on a grid twice as fine.
fn refine(p: &Stppu) -> Stppu {
    let constraints = p
        .constraints()
        .iter()
        .map(|c| {
            let bps = c.pref.breakpoints().iter().map(|&(x, l)| (x, Level(l.0 * 2))).collect();
            SoftConstraint {
                pref: SemiConvexFn::new(c.pref.domain(), bps).unwrap(),
                ..c.clone()
            }
        })
        .collect();
    let grid = PreferenceGrid::new(p.grid().denom() * 2).unwrap();
    Stppu::new(p.names().to_vec(), p.kinds().to_vec(), grid, constraints).unwrap()
}

fn median_time(problems: &[Stppu], reps: usize) -> Duration {
    let mut samples: Vec<Duration> = (0..5)
        .map(|_| {
            let t = Instant::now();
            for _ in 0..reps {
                for p in problems {
                    std::hint::black_box(best_sc(p));
                }
            }
            t.elapsed()
        })
        .collect();
    samples.sort();
    samples[2]
}

// 9. work grows linearly in the number of levels
fn scaling() -> Outcome {
    let base: Vec<Stppu> = (0..20)
        .map(|seed| {
            gen_random(&GenSpec {
                n: 6,
                contingent_count: 2,
                density: 0.4,
                span: 8,
                denom: 10,
                seed: 900 + seed,
            })
            .unwrap()
        })
        .collect();
    let fine: Vec<Stppu> = base.iter().map(refine).collect();
    let reps = 50;
    median_time(&base, reps);
    let t1 = median_time(&base, reps);
    let t2 = median_time(&fine, reps);
    let ratio = t2.as_secs_f64() / t1.as_secs_f64();
    outcome(ratio <= 2.5, format!("denom 10 {t1:?}, denom 20 {t2:?}, ratio {ratio:.2}"))
}

/// Name, check and time limit.
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>, Duration);

fn main() -> ExitCode {
    let sc = sc_suite();
    let dc = dc_suite();
    let criteria: Vec<Criterion> = vec![
        ("EOS level networks", Box::new(eos_tables), Duration::from_secs(1)),
        ("Best-SC verdict", Box::new(eos_best_sc), Duration::from_secs(1)),
        ("fail5 dynamic verdict", Box::new(fail5_dynamic), Duration::from_secs(5)),
        ("weak controllability", Box::new(owc), Duration::from_secs(1)),
        ("controllability lattice", Box::new(lattice), Duration::from_secs(60)),
        ("oracle equivalence", Box::new(|| oracle_equivalence(&sc, &dc)), Duration::from_secs(600)),
        ("execution guarantee", Box::new(|| execution(&sc, &dc)), Duration::from_secs(600)),
        ("STP core", Box::new(stp_core), Duration::from_secs(30)),
        ("scaling sanity", Box::new(scaling), Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        let elapsed = t.elapsed();
        let pass = o.pass && elapsed <= *limit;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name}: {} ({:.3}s, limit {}s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            o.detail.trim_end(),
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
