//! Eb/N0 sweeps over the LoRa error-probability library: configuration,
//! per-cell evaluation, CSV output and SVG waterfall plots.

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod run;

pub use config::{ChannelPreset, DbRange, Method, SweepConfig};
pub use error::SweepError;
pub use output::{read_csv, write_csv};
pub use plot::emit_plot;
pub use run::{run_sweep, ErrorCurve, Row, Status};
