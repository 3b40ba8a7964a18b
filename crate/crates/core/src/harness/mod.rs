//! Config parsing, single runs and aspect-ratio sweeps, and their files.
//!
//! A run directory holds `snapshots/step_%06d.vtk`, `energy.csv`,
//! `norms.csv`, `translation.csv` (when enough uniform snapshots exist) and
//! `manifest.txt`. A sweep adds `sweep.csv` and `sweep_norms.csv` next to
//! its run directories.

mod config;
mod output;
mod run;

pub use config::{
    load_config, parse_config, parse_config_in, ConcentrationInit, RunConfig, RunMode, RunSpec,
    TimeSpec, VelocityInit, DEFAULT_EPS, DEFAULT_SWEEP_EPS,
};
pub use output::{
    read_sweep_csv, vtk_string, write_energy_csv, write_manifest, write_norms_csv, write_sweep_csv,
    write_sweep_norms_csv, write_translation_csv, write_vtk, SweepRecord, ENERGY_HEADER,
    SWEEP_HEADER,
};
pub use run::{
    build_problem, epsilon_sweep, epsilon_sweep_with, initial_fields, initial_state, run_id,
    run_simulation, run_simulation_with, step, uniform_dt, RunArtifacts, RunOptions, SweepReport,
    SweepRun,
};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

/// Process exit code for a failure: 1 for rejected input, 2 for everything
/// that went wrong after the config was accepted.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::InvalidParameter { .. } | Error::InvalidGrid(_) => {
            EXIT_CONFIG
        }
        _ => EXIT_NUMERICAL,
    }
}
