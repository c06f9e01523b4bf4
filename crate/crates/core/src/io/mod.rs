//! Text formats and JSON output.

mod report;
mod text;

pub use report::{
    annotated_witness, execution_json, oracle_json, report_json, solution_json, to_json, AssignmentJson, EdgeJson,
    ExecutionJson, OracleJson, ReportJson, SolutionJson, TimingsJson, WaitJson, WitnessJson,
};
pub use text::{parse_nature, parse_problem, serialize_nature, serialize_problem, ParseError, ParseReason, HEADER, IMPLICIT_ORIGIN};
