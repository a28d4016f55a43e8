//! Domain types shared by every stage: regions, time keys, variable panels,
//! index specifications, weight tables and index results.

mod panel;
mod result;
mod spec;
mod time;
mod weights;

pub use panel::{validate_panel, Diagnostic, DiagnosticKind, Level, RegionId, VariablePanel};
pub(crate) use result::reconstruct;
pub use result::{IndexResult, RegionScores, Score, SubIndexScore, ThemeScore, VariableScore};
pub use spec::{IndexSpec, Method, Polarity, SubIndexKind, SubIndexSpec, ThemeSpec, VariableRef};
pub use time::{days_in_year, iso_weeks_in_year, Resolution, TimeKey, YearSpan};
pub use weights::{MortalityCategory, WeightKey, WeightTable};
