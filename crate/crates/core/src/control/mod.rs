//! Temporal problems with both preferences and uncertainty, and the
//! level-by-level controllability procedures built on their cuts.

mod best_dc;
mod best_sc;
mod odc;
mod report;

pub use best_dc::{
    best_dc, best_dc_with, merge, merge_rules, resulting_stppu, FamilyLevel, FollowPolicy, MergeFailure, MergeMode, MergedFamily,
    ResultingStppu,
};
pub use best_sc::best_sc;
pub use odc::{odc_execute, odc_execute_all, OdcExecution};
pub use report::{ControllabilityReport, Property, StopEvent, Verdict, Witness};

use std::collections::BTreeSet;

use thiserror::Error;

use crate::preference::{self, ConstraintKind, Level, PrefError, PreferenceGrid, SoftConstraint, SoftProblem};
use crate::stp::{Stp, StpError, TimePointId};
use crate::stpu::{self, ContingentLink, PointKind, Stpu, StpuError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StppuError {
    #[error(transparent)]
    Stp(#[from] StpError),
    #[error(transparent)]
    Stpu(#[from] StpuError),
    #[error("constraint {from}->{to}: {source}")]
    Pref {
        from: String,
        to: String,
        source: PrefError,
    },
    #[error("two constraints on {0}-{1}")]
    DuplicatePair(String, String),
}

/// A simple temporal problem with preferences and uncertainty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stppu {
    names: Vec<String>,
    kinds: Vec<PointKind>,
    grid: PreferenceGrid,
    constraints: Vec<SoftConstraint>,
}

impl Stppu {
    pub fn new(
        names: Vec<String>,
        kinds: Vec<PointKind>,
        grid: PreferenceGrid,
        constraints: Vec<SoftConstraint>,
    ) -> Result<Stppu, StppuError> {
        let mut seen = BTreeSet::new();
        for c in &constraints {
            preference::check_endpoints(&names, c)?;
            let label = |p: TimePointId| names[p.0].clone();
            preference::check_grid(c, &grid).map_err(|source| StppuError::Pref {
                from: label(c.from),
                to: label(c.to),
                source,
            })?;
            let key = (c.from.0.min(c.to.0), c.from.0.max(c.to.0));
            if !seen.insert(key) {
                return Err(StppuError::DuplicatePair(label(TimePointId(key.0)), label(TimePointId(key.1))));
            }
        }
        let p = Stppu {
            names,
            kinds,
            grid,
            constraints,
        };
        // structural checks are those of the crisp problem
        p.crisp(Level(0))?;
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn kinds(&self) -> &[PointKind] {
        &self.kinds
    }

    pub fn constraints(&self) -> &[SoftConstraint] {
        &self.constraints
    }

    pub fn index_of(&self, name: &str) -> Option<TimePointId> {
        self.names.iter().position(|n| n == name).map(TimePointId)
    }

    pub fn name(&self, p: TimePointId) -> &str {
        &self.names[p.0]
    }

    fn crisp(&self, alpha: Level) -> Result<Option<Stpu>, StpuError> {
        let mut stp = Stp::new(self.names.iter().cloned());
        let mut links = Vec::new();
        for c in &self.constraints {
            let Some(iv) = c.pref.cut(alpha) else {
                return Ok(None);
            };
            stp.set(c.from, c.to, iv)?;
            if c.kind == ConstraintKind::Contingent {
                links.push(ContingentLink {
                    activation: c.from,
                    contingent: c.to,
                });
            }
        }
        Stpu::new(stp, self.kinds.clone(), links).map(Some)
    }

    /// Per-constraint cut at `alpha`; `None` if some cut is empty.
    pub fn cut(&self, alpha: Level) -> Option<Stpu> {
        self.crisp(alpha).expect("validated at construction")
    }

    /// The problem with preferences ignored.
    pub fn strip(&self) -> Stpu {
        self.cut(Level(0)).expect("level 0 keeps every interval")
    }

    /// The contingent constraint ending at `c`.
    pub fn contingent_constraint(&self, c: TimePointId) -> Option<&SoftConstraint> {
        self.constraints.iter().find(|k| k.is_contingent() && k.to == c)
    }

    /// The constraint on the pair, oriented `from -> to` as stored.
    pub fn constraint_between(&self, a: TimePointId, b: TimePointId) -> Option<&SoftConstraint> {
        self.constraints
            .iter()
            .find(|c| (c.from == a && c.to == b) || (c.from == b && c.to == a))
    }

    /// The same problem with every preference function replaced.
    pub fn map_prefs(
        &self,
        mut f: impl FnMut(&SoftConstraint) -> Result<preference::SemiConvexFn, PrefError>,
    ) -> Result<Stppu, StppuError> {
        let constraints = self
            .constraints
            .iter()
            .map(|c| {
                let pref = f(c).map_err(|source| StppuError::Pref {
                    from: self.names[c.from.0].clone(),
                    to: self.names[c.to.0].clone(),
                    source,
                })?;
                Ok(SoftConstraint { pref, ..c.clone() })
            })
            .collect::<Result<Vec<_>, StppuError>>()?;
        Stppu::new(self.names.clone(), self.kinds.clone(), self.grid, constraints)
    }

    /// Projection onto a situation: contingent constraints become singletons
    /// carrying their preference at the chosen duration.
    pub fn project(&self, w: &stpu::Situation) -> Result<Stppu, StppuError> {
        let u = self.strip();
        u.validate_situation(w)?;
        let links = u.links().to_vec();
        self.map_prefs(|c| match links.iter().position(|l| l.contingent == c.to && c.is_contingent()) {
            Some(i) => c.pref.restrict(crate::stp::Interval::point(w.durations[i])),
            None => Ok(c.pref.clone()),
        })
        .map(|mut p| {
            // a projection has no uncertainty left
            for c in &mut p.constraints {
                c.kind = ConstraintKind::Requirement;
            }
            for k in &mut p.kinds {
                *k = PointKind::Executable;
            }
            p
        })
    }
}

impl SoftProblem for Stppu {
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

/// `cut_problem` for a problem with uncertainty.
pub fn cut_stppu(p: &Stppu, alpha: Level) -> Option<Stpu> {
    p.cut(alpha)
}

/// Weak controllability with preferences ignored.
pub fn owc_check(p: &Stppu) -> bool {
    stpu::check_weak(&p.strip())
}
