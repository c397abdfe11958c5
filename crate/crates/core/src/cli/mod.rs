//! Command-line front end: configuration, figure sweeps, output and the
//! validation runner.

mod config;
mod emit;
mod svg;
mod sweep;
mod tasks;
mod validate;

use std::path::PathBuf;

use clap::Parser;

pub use config::{Format, HeadOnConfig, RunConfig, Samples, Task};
pub use emit::{emit, render, sig9};
pub use sweep::{Axis, Layout, Provenance, SweepResult};
pub use tasks::{
    collision_setup, run_coeffs, run_fig1, run_fig2, run_fig3, run_fig4, run_task, FIG1_C1, FIG2_K0,
};
pub use validate::{
    schmidt_pair, CheckReport, Oracles, ValidationReport, Validator, CRITERIA, ORACLE_DIR_VAR,
};

use crate::error::{Error, Result};
use crate::numerics::Shape;

#[derive(Debug, Parser)]
#[command(
    name = "xpmsim",
    version,
    about = "Photon-photon phase gate metrics under finite system bandwidth"
)]
pub struct Args {
    /// coeffs, fig1, fig2, fig3, fig4 or validate
    pub task: String,
    /// Configuration file (flat dotted keys); flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv, json or svg
    #[arg(long)]
    pub format: Option<String>,
    /// k0 values: a,b,c or start:stop:n
    #[arg(long, allow_hyphen_values = true)]
    pub k0: Option<String>,
    /// Phi values: a,b,c or start:stop:n; numbers may use pi, e.g. 3pi/4
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    /// gaussian or square
    #[arg(long)]
    pub profile: Option<String>,
    /// Grid nodes per axis
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Worker threads
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Args {
    /// The configuration file (or task defaults) with flags applied.
    pub fn config(&self) -> Result<RunConfig> {
        let task: Task = self.task.parse()?;
        let mut c = match &self.config {
            Some(path) => {
                let mut c = RunConfig::load(path)?;
                c.task = task;
                c
            }
            None => RunConfig::new(task),
        };
        if let Some(f) = &self.format {
            c.format = f.parse()?;
        }
        if let Some(p) = &self.out {
            c.out = Some(p.clone());
        }
        if let Some(s) = &self.k0 {
            c.k0 = Some(s.parse()?);
        }
        if let Some(s) = &self.phi {
            c.phi = Some(s.parse()?);
        }
        if let Some(s) = &self.profile {
            c.profile.shape = match s.parse::<Shape>()? {
                Shape::Tabulated => {
                    return Err(Error::Config(
                        "tabulated profiles need data, not a flag".into(),
                    ))
                }
                s => s,
            };
        }
        if let Some(n) = self.grid_n {
            c.grid.n = n;
        }
        if let Some(t) = self.threads {
            c.threads = Some(t);
        }
        c.check()?;
        Ok(c)
    }
}

/// Run the command line and return the process exit status.
pub fn main_with(args: Args) -> i32 {
    let config = match args.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("xpmsim: {e}");
            return e.exit_code();
        }
    };
    if let Some(n) = config.threads {
        // fails only if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match execute(&config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("xpmsim: {e}");
            e.exit_code()
        }
    }
}

fn execute(config: &RunConfig) -> Result<i32> {
    if config.task == Task::Validate {
        let validator = Validator::new(config)?;
        let mut passed = true;
        let mut lines = Vec::new();
        for id in 1..=CRITERIA.len() {
            let r = validator.criterion(id);
            println!("{r}");
            passed &= r.passed;
            lines.push(r.to_string());
        }
        for r in validator.oracle_checks(&Oracles::default_dir()) {
            println!("{r}");
            passed &= r.passed;
            lines.push(r.to_string());
        }
        if let Some(path) = &config.out {
            let text = lines.join("\n") + "\n";
            std::fs::write(path, text).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
        }
        return Ok(if passed { 0 } else { 1 });
    }
    let result = run_task(config)?;
    for w in &result.provenance.warnings {
        eprintln!("xpmsim: warning: {w}");
    }
    match &config.out {
        Some(path) => emit(&result, config.format, path)?,
        None => print!("{}", render(&result, config.format)?),
    }
    Ok(0)
}
