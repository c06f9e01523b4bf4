use crate::preference::{Level, SoftProblem};
use crate::stp;
use crate::stpu::{self, ExecutableStp};

use super::{ControllabilityReport, Property, StopEvent, Stppu, Verdict, Witness};

/// Highest level at which a single control sequence is optimal.
///
/// Cuts the problem level by level from the bottom, rewrites each cut onto
/// the executables and intersects with everything below.
pub fn best_sc(p: &Stppu) -> ControllabilityReport {
    let grid = p.grid();
    let mut examined = 1;
    let report = |verdict, stop, witness, examined| ControllabilityReport {
        property: Property::Strong,
        verdict,
        grid,
        stop_event: Some(stop),
        witness,
        levels_examined: examined,
    };
    let alpha_min = p.alpha_min();
    let first = p
        .cut(alpha_min)
        .and_then(|u| stpu::check_strong(&u).ok());
    let Some(mut acc) = first else {
        return report(Verdict::None, StopEvent::NotControllableAtMin, Witness::Nothing, examined);
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
        let Ok(sc) = stpu::check_strong(&pc) else {
            break (Verdict::AtLevel(last), StopEvent::LevelNotControllable);
        };
        let merged = stp::intersect(&acc.stp, &sc.stp)
            .ok()
            .and_then(|s| stp::minimal_network(&s).ok());
        let Some(merged) = merged else {
            break (Verdict::AtLevel(last), StopEvent::CombineFailed);
        };
        acc = ExecutableStp {
            ids: acc.ids,
            stp: merged,
        };
        beta = beta.next();
    };
    let earliest = stp::earliest_solution(&acc.stp).ok();
    let latest = stp::latest_solution(&acc.stp).ok();
    report(
        verdict,
        stop,
        Witness::Strong {
            network: acc,
            earliest,
            latest,
        },
        examined,
    )
}
