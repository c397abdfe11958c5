//! Cross-module checks: frozen reference values, worked cases, properties
//! and the command-line front end.

mod cli_runs;
mod copropagating_cases;
mod oracles;
mod state_oracles;
