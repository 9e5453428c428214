//! Edge-list ingestion, JSON/CSV reporting, ensemble sweeps and the
//! command-line surface for `tvsched`.

pub mod analysis;
pub mod cli;
pub mod edgelist;
pub mod error;
pub mod report;
pub mod sweep;

pub use analysis::{run_analysis, Analyses, AnalysisRun, Conversion, InputSource};
pub use edgelist::{
    format_edge_list, load_edge_list, parse_edge_list, save_edge_list, EdgeListOptions, IndexBase,
};
pub use error::{exit, CliError, CliResult};
