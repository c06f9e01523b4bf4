//! Line-oriented problem and nature-script formats.
//!
//! ```text
//! stppu-v1
//! granularity 10
//! timepoint SC executable
//! timepoint EC contingent
//! constraint ctg SC EC [1,8] pref 1:10 3:9 5:8
//! ```
//!
//! A `pref` entry `x:k` gives level `k` from offset `x` up to the next entry.
//! Everything after `#` on a line is ignored.

use std::fmt::Write as _;

use thiserror::Error;

use crate::control::{Stppu, StppuError};
use crate::preference::{ConstraintKind, Level, PrefError, PreferenceGrid, SemiConvexFn, SoftConstraint, SoftProblem};
use crate::stp::{Interval, TimePointId};
use crate::stpu::{PointKind, Situation};

pub const HEADER: &str = "stppu-v1";
const DEFAULT_DENOM: u32 = 10;
/// Name given to the origin of a problem that declares no executable point.
pub const IMPLICIT_ORIGIN: &str = "O";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseReason {
    #[error("missing `{HEADER}` header")]
    Header,
    #[error("unknown directive `{0}`")]
    Directive(String),
    #[error("malformed line, expected {0}")]
    Syntax(&'static str),
    #[error("bad integer `{0}`")]
    Integer(String),
    #[error("duplicate time-point `{0}`")]
    DuplicatePoint(String),
    #[error("unknown time-point `{0}`")]
    UnknownPoint(String),
    #[error("`granularity` given twice or after a constraint")]
    Granularity,
    #[error("grid: {0}")]
    Grid(PrefError),
    #[error("constraint {from}->{to}: {source}")]
    Function { from: String, to: String, source: PrefError },
    #[error(transparent)]
    Problem(StppuError),
    #[error("`{0}` is not a contingent point")]
    NotContingent(String),
    #[error("`{0}` observed twice")]
    DuplicateObservation(String),
    #[error("duration {duration} of `{name}` outside {interval}")]
    OutOfInterval { name: String, duration: i64, interval: Interval },
    #[error("incomplete situation, no observation for `{0}`")]
    Incomplete(String),
}

/// A parse failure. Line 0 stands for the document as a whole.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: ParseReason,
}

fn err<T>(line: usize, reason: ParseReason) -> Result<T, ParseError> {
    Err(ParseError { line, reason })
}

/// Non-empty lines with comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn int<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, ParseError> {
    s.trim()
        .parse()
        .map_err(|_| ParseError { line, reason: ParseReason::Integer(s.trim().to_string()) })
}

struct RawConstraint {
    line: usize,
    kind: ConstraintKind,
    from: String,
    to: String,
    domain: Interval,
    breakpoints: Vec<(i64, Level)>,
}

fn parse_constraint(line: usize, rest: &str) -> Result<RawConstraint, ParseError> {
    const SHAPE: &str = "`constraint req|ctg <from> <to> [<lo>,<hi>] pref <x>:<k> ...`";
    let syntax = || ParseError { line, reason: ParseReason::Syntax(SHAPE) };
    let open = rest.find('[').ok_or_else(syntax)?;
    let close = rest.find(']').ok_or_else(syntax)?;
    if close < open {
        return Err(syntax());
    }
    let head: Vec<&str> = rest[..open].split_whitespace().collect();
    let [kind, from, to] = head[..] else { return Err(syntax()) };
    let kind = match kind {
        "req" => ConstraintKind::Requirement,
        "ctg" => ConstraintKind::Contingent,
        _ => return Err(syntax()),
    };
    let (lo, hi) = rest[open + 1..close].split_once(',').ok_or_else(syntax)?;
    let domain = Interval::new(int(line, lo)?, int(line, hi)?).ok_or_else(syntax)?;
    let mut tail = rest[close + 1..].split_whitespace();
    if tail.next() != Some("pref") {
        return Err(syntax());
    }
    let mut breakpoints = Vec::new();
    for tok in tail {
        let (x, k) = tok.split_once(':').ok_or_else(syntax)?;
        breakpoints.push((int(line, x)?, Level(int(line, k)?)));
    }
    Ok(RawConstraint {
        line,
        kind,
        from: from.to_string(),
        to: to.to_string(),
        domain,
        breakpoints,
    })
}

/// Parses a problem document. The first executable declared becomes the
/// origin (index 0); the other points keep their declaration order.
pub fn parse_problem(text: &str) -> Result<Stppu, ParseError> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, HEADER)) => {}
        Some((line, _)) => return err(line, ParseReason::Header),
        None => return err(1, ParseReason::Header),
    }
    let mut denom: Option<u32> = None;
    let mut points: Vec<(String, PointKind)> = Vec::new();
    let mut raw = Vec::new();
    for (line, l) in lines {
        let (directive, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        match directive {
            "granularity" => {
                if denom.is_some() || !raw.is_empty() {
                    return err(line, ParseReason::Granularity);
                }
                denom = Some(int(line, rest)?);
            }
            "timepoint" => {
                let [name, kind] = rest.split_whitespace().collect::<Vec<_>>()[..] else {
                    return err(line, ParseReason::Syntax("`timepoint <name> executable|contingent`"));
                };
                let kind = match kind {
                    "executable" => PointKind::Executable,
                    "contingent" => PointKind::Contingent,
                    _ => return err(line, ParseReason::Syntax("`timepoint <name> executable|contingent`")),
                };
                if points.iter().any(|p| p.0 == name) {
                    return err(line, ParseReason::DuplicatePoint(name.to_string()));
                }
                points.push((name.to_string(), kind));
            }
            "constraint" => raw.push(parse_constraint(line, rest)?),
            other => return err(line, ParseReason::Directive(other.to_string())),
        }
    }
    let grid = PreferenceGrid::new(denom.unwrap_or(DEFAULT_DENOM)).map_err(|e| ParseError {
        line: 0,
        reason: ParseReason::Grid(e),
    })?;
    match points.iter().position(|p| p.1 == PointKind::Executable) {
        Some(i) => {
            let origin = points.remove(i);
            points.insert(0, origin);
        }
        None => points.insert(0, (IMPLICIT_ORIGIN.to_string(), PointKind::Executable)),
    }
    let id = |line: usize, name: &str| {
        points
            .iter()
            .position(|p| p.0 == name)
            .map(TimePointId)
            .ok_or(ParseError { line, reason: ParseReason::UnknownPoint(name.to_string()) })
    };
    let mut constraints = Vec::with_capacity(raw.len());
    for c in raw {
        let (from, to) = (id(c.line, &c.from)?, id(c.line, &c.to)?);
        let pref = SemiConvexFn::new(c.domain, c.breakpoints).map_err(|source| ParseError {
            line: c.line,
            reason: ParseReason::Function {
                from: c.from.clone(),
                to: c.to.clone(),
                source,
            },
        })?;
        constraints.push(match c.kind {
            ConstraintKind::Requirement => SoftConstraint::requirement(from, to, pref),
            ConstraintKind::Contingent => SoftConstraint::contingent(from, to, pref),
        });
    }
    let (names, kinds) = points.into_iter().unzip();
    Stppu::new(names, kinds, grid, constraints).map_err(|e| ParseError {
        line: 0,
        reason: ParseReason::Problem(e),
    })
}

/// Canonical text of a problem; `parse_problem` reads it back unchanged.
pub fn serialize_problem(p: &Stppu) -> String {
    let mut out = String::new();
    let names = p.names();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "granularity {}", p.grid().denom()).unwrap();
    for (name, kind) in names.iter().zip(p.kinds()) {
        let kind = match kind {
            PointKind::Executable => "executable",
            PointKind::Contingent => "contingent",
        };
        writeln!(out, "timepoint {name} {kind}").unwrap();
    }
    for c in p.constraints() {
        let kind = match c.kind {
            ConstraintKind::Requirement => "req",
            ConstraintKind::Contingent => "ctg",
        };
        let d = c.pref.domain();
        write!(out, "constraint {kind} {} {} [{},{}] pref", names[c.from.0], names[c.to.0], d.lo, d.hi).unwrap();
        for (x, k) in c.pref.breakpoints() {
            write!(out, " {x}:{}", k.0).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parses `observe <name> <duration>` lines into a situation for `p`.
pub fn parse_nature(text: &str, p: &Stppu) -> Result<Situation, ParseError> {
    let u = p.strip();
    let links = u.links();
    let mut durations: Vec<Option<i64>> = vec![None; links.len()];
    for (line, l) in content_lines(text) {
        let toks: Vec<&str> = l.split_whitespace().collect();
        let ["observe", name, dur] = toks[..] else {
            return err(line, ParseReason::Syntax("`observe <contingent> <duration>`"));
        };
        let point = p
            .index_of(name)
            .ok_or(ParseError { line, reason: ParseReason::UnknownPoint(name.to_string()) })?;
        let Some(i) = links.iter().position(|l| l.contingent == point) else {
            return err(line, ParseReason::NotContingent(name.to_string()));
        };
        let duration: i64 = int(line, dur)?;
        let interval = u.link_interval(&links[i]);
        if !interval.contains(duration) {
            return err(
                line,
                ParseReason::OutOfInterval {
                    name: name.to_string(),
                    duration,
                    interval,
                },
            );
        }
        if durations[i].replace(duration).is_some() {
            return err(line, ParseReason::DuplicateObservation(name.to_string()));
        }
    }
    let mut out = Vec::with_capacity(links.len());
    for (d, l) in durations.into_iter().zip(links) {
        match d {
            Some(d) => out.push(d),
            None => return err(0, ParseReason::Incomplete(p.name(l.contingent).to_string())),
        }
    }
    Ok(Situation::new(out))
}

/// Nature script for `w`, one line per contingent point.
pub fn serialize_nature(w: &Situation, p: &Stppu) -> String {
    let u = p.strip();
    let mut out = String::new();
    for (l, d) in u.links().iter().zip(&w.durations) {
        writeln!(out, "observe {} {d}", p.name(l.contingent)).unwrap();
    }
    out
}
