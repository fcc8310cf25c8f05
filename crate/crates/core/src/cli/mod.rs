//! Configuration, orchestration and file output behind the `rarelab` binary.

mod commands;
pub mod config;
pub mod io;

pub use commands::{
    cmd_diag, cmd_run, cmd_sweep, cmd_wave, simulate, state_file_name, sweep_configs,
    wave_file_name, Resolved, RunArtifacts, SweepOutcome, SweepRow,
};
pub use config::{InitConfig, InitKind, OutputConfig, PostConfig, RunConfig, SweepConfig, WaveConfig, WaveKind};
