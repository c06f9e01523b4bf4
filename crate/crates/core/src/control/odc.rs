//! Dispatch over the merged family, dropping to lower levels as nature
//! rules the higher ones out.

use crate::execute::{check_arity, Dispatch, ExecutionFailure, Nature, NatureModel, TraceEvent};
use crate::oracle::{enumerate_situations, SearchBounds};
use crate::preference::{schedule_preference, Level};
use crate::stp::{Interval, Schedule};
use crate::stpu::Situation;

use super::ResultingStppu;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OdcExecution {
    pub schedule: Schedule,
    /// Preference of the schedule in the original problem.
    pub achieved: Level,
    /// Family level dispatched with when the run ended.
    pub final_level: Level,
    pub trace: Vec<TraceEvent>,
}

fn run_once(r: &ResultingStppu, nature: &NatureModel) -> Result<OdcExecution, ExecutionFailure> {
    let levels = &r.family.levels;
    let base = &levels.first().ok_or(ExecutionFailure::NotControllable)?.merged;
    let strip = r.source.strip();
    let bounds: Vec<Interval> = strip.links().iter().map(|l| strip.link_interval(l)).collect();
    check_arity(nature, bounds.len())?;
    let mut nat = Nature::new(nature);
    let mut run = Dispatch::new(base, bounds);
    let mut h = levels.len() - 1;
    let schedule = run.run(&mut nat, |d, t| {
        while h > 0 && !d.viable(&levels[h].merged, t) {
            h -= 1;
        }
        Ok(&levels[h].merged)
    })?;
    let achieved = schedule_preference(&schedule, &r.source).map_err(|_| ExecutionFailure::Inconsistent {
        t: schedule.values.iter().copied().max().unwrap_or(0),
    })?;
    Ok(OdcExecution {
        schedule,
        achieved,
        final_level: levels[h].level,
        trace: run.trace,
    })
}

/// Executes a dynamic strategy for the resulting network.
///
/// The adversarial model tries every situation and returns the run with the
/// lowest achieved preference.
pub fn odc_execute(r: &ResultingStppu, nature: &NatureModel) -> Result<OdcExecution, ExecutionFailure> {
    if nature != &NatureModel::Adversarial {
        return run_once(r, nature);
    }
    let situations = enumerate_situations(&r.source.strip(), &SearchBounds::from_env())
        .map_err(|e| ExecutionFailure::Inconclusive(e.to_string()))?;
    let mut worst: Option<OdcExecution> = None;
    for w in situations {
        let run = run_once(r, &NatureModel::Scripted(w))?;
        if worst.as_ref().is_none_or(|b| run.achieved < b.achieved) {
            worst = Some(run);
        }
    }
    worst.ok_or(ExecutionFailure::NotControllable)
}

/// Runs every situation in `situations`, pairing each with its outcome.
pub fn odc_execute_all(
    r: &ResultingStppu,
    situations: &[Situation],
) -> Vec<(Situation, Result<OdcExecution, ExecutionFailure>)> {
    situations
        .iter()
        .map(|w| (w.clone(), run_once(r, &NatureModel::Scripted(w.clone()))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{best_dc, Witness};
    use crate::fixtures;
    use crate::oracle::projection_opt;
    use crate::stp::TimePointId;

    fn resulting(p: &crate::control::Stppu) -> ResultingStppu {
        match best_dc(p).witness {
            Witness::Dynamic(r) => *r,
            w => panic!("no dynamic witness: {w:?}"),
        }
    }

    #[test]
    fn eos_short_cooking() {
        let p = fixtures::eos();
        let r = resulting(&p);
        let run = odc_execute(&r, &NatureModel::Scripted(Situation::new(vec![2]))).unwrap();
        assert_eq!(run.schedule.get(p.index_of("SA").unwrap()), 3);
        assert_eq!(run.achieved, Level(10));
    }

    #[test]
    fn eos_long_cooking() {
        let p = fixtures::eos();
        let r = resulting(&p);
        let w = Situation::new(vec![7]);
        let run = odc_execute(&r, &NatureModel::Scripted(w.clone())).unwrap();
        assert_eq!(Some(run.achieved), projection_opt(&p, &w));
        assert_eq!(run.achieved, Level(6));
        let _ = TimePointId(0);
    }

    #[test]
    fn optimal_on_every_situation() {
        for p in [fixtures::eos(), fixtures::eos_flat(), fixtures::eos_flat_sa_ec(), fixtures::cook_dinner()] {
            let r = resulting(&p);
            let ws = enumerate_situations(&p.strip(), &SearchBounds::default()).unwrap();
            for (w, run) in odc_execute_all(&r, &ws) {
                assert_eq!(Some(run.unwrap().achieved), projection_opt(&p, &w), "{w:?}");
            }
        }
    }

    #[test]
    fn adversary_finds_the_worst() {
        let p = fixtures::eos();
        let r = resulting(&p);
        let run = odc_execute(&r, &NatureModel::Adversarial).unwrap();
        let ws = enumerate_situations(&p.strip(), &SearchBounds::default()).unwrap();
        let worst = ws.iter().filter_map(|w| projection_opt(&p, w)).min().unwrap();
        assert_eq!(run.achieved, worst);
    }
}
