use std::fmt;

use crate::dynamic::AnnotatedStpu;
use crate::preference::{Level, PreferenceGrid};
use crate::stp::Schedule;
use crate::stpu::ExecutableStp;

use super::ResultingStppu;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    Strong,
    Dynamic,
    Weak,
}

impl Property {
    pub fn label(self) -> &'static str {
        match self {
            Property::Strong => "osc",
            Property::Dynamic => "odc",
            Property::Weak => "owc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    /// Not controllable even with preferences ignored.
    None,
    /// Controllable, and optimal up to this level.
    AtLevel(Level),
    /// Optimally controllable; the level is the best preference attainable.
    Optimal(Level),
    /// Weak controllability outcome.
    Holds(bool),
}

impl Verdict {
    pub fn level(&self) -> Option<Level> {
        match self {
            Verdict::AtLevel(l) | Verdict::Optimal(l) => Some(*l),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::None => "none",
            Verdict::AtLevel(_) => "at_level",
            Verdict::Optimal(_) => "optimal",
            Verdict::Holds(true) => "true",
            Verdict::Holds(false) => "false",
        }
    }

    /// Whether the requested optimal property holds.
    pub fn is_success(&self) -> bool {
        matches!(self, Verdict::Optimal(_) | Verdict::Holds(true))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopEvent {
    /// Not controllable at the lowest level.
    NotControllableAtMin,
    /// The cut at the next level is inconsistent.
    CutInconsistent,
    /// The next level is not controllable.
    LevelNotControllable,
    /// Combining with the previous levels failed.
    CombineFailed,
}

impl StopEvent {
    pub fn code(self) -> &'static str {
        match self {
            StopEvent::NotControllableAtMin => "E1",
            StopEvent::CutInconsistent => "E2",
            StopEvent::LevelNotControllable => "E3",
            StopEvent::CombineFailed => "E4",
        }
    }
}

impl fmt::Display for StopEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone)]
pub enum Witness {
    /// Executable-only network with its canonical schedules.
    Strong {
        network: ExecutableStp,
        /// `None` when some time-point is unbounded relative to the origin.
        earliest: Option<Schedule>,
        latest: Option<Schedule>,
    },
    Dynamic(Box<ResultingStppu>),
    Weak(bool),
    Nothing,
}

#[derive(Debug, Clone)]
pub struct ControllabilityReport {
    pub property: Property,
    pub verdict: Verdict,
    pub grid: PreferenceGrid,
    pub stop_event: Option<StopEvent>,
    pub witness: Witness,
    /// Number of preference levels whose cut was examined.
    pub levels_examined: u32,
}

impl ControllabilityReport {
    pub fn dynamic_network(&self) -> Option<&AnnotatedStpu> {
        match &self.witness {
            Witness::Dynamic(r) => Some(&r.network),
            _ => None,
        }
    }

    pub fn strong_network(&self) -> Option<&ExecutableStp> {
        match &self.witness {
            Witness::Strong { network, .. } => Some(network),
            _ => None,
        }
    }
}
