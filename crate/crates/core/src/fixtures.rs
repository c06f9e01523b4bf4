//! Small reference problems used by tests, examples and the CLI.
//!
//! Where a source example only pins some values of a preference function,
//! the remaining steps are a reconstruction chosen to agree with every value
//! that is pinned.

use crate::control::Stppu;
use crate::preference::{PreferenceGrid, SemiConvexFn, SoftConstraint};
use crate::stp::{Interval, TimePointId};
use crate::stpu::PointKind;

struct Builder {
    names: Vec<String>,
    kinds: Vec<PointKind>,
    constraints: Vec<SoftConstraint>,
}

impl Builder {
    fn new(points: &[(&str, PointKind)]) -> Builder {
        Builder {
            names: points.iter().map(|p| p.0.to_string()).collect(),
            kinds: points.iter().map(|p| p.1).collect(),
            constraints: Vec::new(),
        }
    }

    fn id(&self, name: &str) -> TimePointId {
        TimePointId(self.names.iter().position(|n| n == name).expect("known point"))
    }

    fn add(mut self, contingent: bool, from: &str, to: &str, lo: i64, values: &[u32]) -> Builder {
        let iv = Interval::new(lo, lo + values.len() as i64 - 1).expect("non-empty");
        let f = SemiConvexFn::from_values(iv, values).expect("fixture functions are semi-convex");
        let (a, b) = (self.id(from), self.id(to));
        self.constraints.push(if contingent {
            SoftConstraint::contingent(a, b, f)
        } else {
            SoftConstraint::requirement(a, b, f)
        });
        self
    }

    fn flat(self, contingent: bool, from: &str, to: &str, lo: i64, hi: i64) -> Builder {
        let v = vec![10; (hi - lo + 1) as usize];
        self.add(contingent, from, to, lo, &v)
    }

    fn build(self) -> Stppu {
        Stppu::new(self.names, self.kinds, PreferenceGrid::default(), self.constraints).expect("fixture is well-formed")
    }
}

use PointKind::{Contingent as Ctg, Executable as Exe};

/// Observation scheduling: start of cloud cover (SC, origin), end of cloud
/// cover (EC, contingent), start and end of an aircraft activity (SA, EA).
pub fn eos() -> Stppu {
    Builder::new(&[("SC", Exe), ("SA", Exe), ("EC", Ctg), ("EA", Exe)])
        .add(true, "SC", "EC", 1, &[10, 10, 9, 9, 8, 7, 6, 5])
        .add(false, "SC", "SA", 1, &[10, 10, 10, 9, 9])
        .add(false, "SA", "EC", -6, &[6, 7, 8, 9, 10, 10, 9, 8, 7, 6, 6])
        .add(false, "SA", "EA", 2, &[8, 10, 10, 9])
        .build()
}

/// Three-point problem that is dynamically controllable at every level but
/// not optimally so: A (origin), B executable, C contingent.
pub fn fail5() -> Stppu {
    Builder::new(&[("A", Exe), ("B", Exe), ("C", Ctg)])
        .add(true, "A", "C", 3, &[10, 10, 10, 9, 8, 7, 6, 5])
        .add(false, "A", "B", 3, &[10, 9, 8, 7, 6])
        .add(false, "B", "C", -4, &[6, 7, 8, 9, 10, 10, 10, 9, 8, 7, 6])
        .build()
}

/// Cooking then dinner, with dinner starting within ten minutes of the end of
/// cooking. All preferences are flat.
pub fn cook_dinner() -> Stppu {
    Builder::new(&[
        ("StartCooking", Exe),
        ("EndCooking", Ctg),
        ("StartDinner", Exe),
        ("EndDinner", Ctg),
    ])
    .flat(true, "StartCooking", "EndCooking", 20, 40)
    .flat(false, "EndCooking", "StartDinner", 0, 10)
    .flat(true, "StartDinner", "EndDinner", 30, 60)
    .build()
}

/// Two contingent events that must coincide: some projections are empty.
pub fn not_wc() -> Stppu {
    Builder::new(&[("O", Exe), ("C1", Ctg), ("C2", Ctg)])
        .flat(true, "O", "C1", 1, 2)
        .flat(true, "O", "C2", 1, 2)
        .flat(false, "C1", "C2", 0, 0)
        .build()
}

/// The observation problem with the SA-EC preference flattened to the top.
pub fn eos_flat_sa_ec() -> Stppu {
    Builder::new(&[("SC", Exe), ("SA", Exe), ("EC", Ctg), ("EA", Exe)])
        .add(true, "SC", "EC", 1, &[10, 10, 9, 9, 8, 7, 6, 5])
        .add(false, "SC", "SA", 1, &[10, 10, 10, 9, 9])
        .flat(false, "SA", "EC", -6, 4)
        .add(false, "SA", "EA", 2, &[8, 10, 10, 9])
        .build()
}

/// The observation problem with both SC-SA and SA-EC flattened to the top:
/// starting the activity at 4 is optimal whatever the cloud cover does.
pub fn eos_flat() -> Stppu {
    Builder::new(&[("SC", Exe), ("SA", Exe), ("EC", Ctg), ("EA", Exe)])
        .add(true, "SC", "EC", 1, &[10, 10, 9, 9, 8, 7, 6, 5])
        .flat(false, "SC", "SA", 1, 5)
        .flat(false, "SA", "EC", -6, 4)
        .add(false, "SA", "EA", 2, &[8, 10, 10, 9])
        .build()
}
