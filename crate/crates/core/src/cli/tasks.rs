//! Sweeps behind the four figures and the coefficient table.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::config::{RunConfig, Samples, Task};
use super::sweep::{Axis, Layout, SweepResult};
use crate::copropagating::{phase_curve, transition_k0, CopropagatingFamily, OverlapCoeffs};
use crate::error::{Error, Result};
use crate::headon::{fidelity_evolution, CollisionSetup, TERM_FLOOR, VALIDITY_GAUGE};
use crate::numerics::{make_profile, PulseProfile, SystemParams};

pub const FIG1_C1: [f64; 8] = [0.20, 0.36, 0.45, 0.50, 0.55, 0.63, 0.78, 0.98];
pub const FIG2_K0: [f64; 5] = [0.5, 1.0, 2.5, 5.0, 10.0];
pub const COEFF_K0: [f64; 7] = [0.01, 0.1, 0.5, 1.0, 2.5, 5.0, 10.0];
pub const FIG4_K0: f64 = 1e-3;
/// Bracket and width of the C1 = 1/2 bisection.
pub const TRANSITION_BRACKET: (f64, f64) = (0.5, 8.0);
pub const TRANSITION_TOL: f64 = 1e-4;

/// Sample sets a task resolved from the config or its defaults.
struct Resolver<'a> {
    config: &'a RunConfig,
    defaults: Vec<(String, String)>,
}

impl Resolver<'_> {
    fn get(&mut self, key: &str, given: &Option<Samples>, default: Samples) -> Vec<f64> {
        match given {
            Some(s) => s.values(),
            None => {
                self.defaults.push((key.to_string(), describe(&default)));
                default.values()
            }
        }
    }
}

fn describe(s: &Samples) -> String {
    match s {
        Samples::List(v) => format!("{v:?}"),
        Samples::Range { start, stop, n } => format!("{start}:{stop}:{n}"),
    }
}

fn pulses(config: &RunConfig) -> Result<(PulseProfile, PulseProfile)> {
    let f = make_profile(&config.profile, 0.0)?;
    Ok((f.clone(), f))
}

fn finish(mut result: SweepResult, config: &RunConfig, resolver: Resolver) -> Result<SweepResult> {
    let p = &mut result.provenance;
    p.config_hash = config.hash();
    p.version = env!("CARGO_PKG_VERSION").to_string();
    p.tolerances.insert("coeff".into(), config.coeff_tolerance);
    p.tolerances
        .insert("grid.tail".into(), config.grid.tail_tolerance);
    p.defaults.extend(resolver.defaults);
    result.check()?;
    Ok(result)
}

/// Run any task except `validate`.
pub fn run_task(config: &RunConfig) -> Result<SweepResult> {
    match config.task {
        Task::Coeffs => run_coeffs(config),
        Task::Fig1 => run_fig1(config),
        Task::Fig2 => run_fig2(config),
        Task::Fig3 => run_fig3(config),
        Task::Fig4 => run_fig4(config),
        Task::Validate => Err(Error::Config(
            "validate produces a report, not a sweep".into(),
        )),
    }
}

/// C1 and C2 over k0, plus the k0 where C1 = 1/2.
pub fn run_coeffs(config: &RunConfig) -> Result<SweepResult> {
    let mut res = Resolver {
        config,
        defaults: Vec::new(),
    };
    let k0s = res.get("k0", &config.k0, Samples::List(COEFF_K0.to_vec()));
    let (f1, f2) = pulses(res.config)?;
    let coeffs = k0s
        .par_iter()
        .map(|&k0| OverlapCoeffs::compute(&f1, &f2, k0, config.coeff_tolerance))
        .collect::<Result<Vec<_>>>()?;
    let mut out = SweepResult::new(
        "coeffs",
        Layout::Long,
        vec![Axis::new("k0", "", k0s)],
        &["C1", "C2"],
    );
    out.rows = coeffs
        .iter()
        .map(|c| vec![Some(c.c1), Some(c.c2)])
        .collect();
    let (lo, hi) = TRANSITION_BRACKET;
    out.summary.insert(
        "transition_k0".into(),
        transition_k0(&f1, &f2, lo, hi, TRANSITION_TOL)?,
    );
    out.provenance
        .tolerances
        .insert("transition".into(), TRANSITION_TOL);
    finish(out, config, res)
}

/// Unwrapped θ(Φ) for a set of C1 values.
pub fn run_fig1(config: &RunConfig) -> Result<SweepResult> {
    let mut res = Resolver {
        config,
        defaults: Vec::new(),
    };
    let c1s = res.get("c1", &config.c1, Samples::List(FIG1_C1.to_vec()));
    let phis = res.get(
        "phi",
        &config.phi,
        Samples::Range {
            start: 0.0,
            stop: 2.0 * PI,
            n: 701,
        },
    );
    let curves = c1s
        .par_iter()
        .map(|&c1| phase_curve(c1, &phis))
        .collect::<Result<Vec<_>>>()?;
    let mut out = SweepResult::new(
        "fig1",
        Layout::Wide,
        vec![Axis::new("C1", "", c1s), Axis::new("Phi", "rad", phis)],
        &["theta"],
    );
    out.rows = curves
        .into_iter()
        .flatten()
        .map(|th| vec![Some(th)])
        .collect();
    finish(out, config, res)
}

/// F from the closed form at each Φ; shared by the Fig. 2 and Fig. 3
/// sweeps so common lattice points agree exactly.
fn closed_fidelities(coeffs: &OverlapCoeffs, phis: &[f64]) -> Result<Vec<f64>> {
    phis.iter().map(|&phi| coeffs.fidelity(phi)).collect()
}

/// S_L(Φ) from the grid state and F(Φ) from the closed form, per k0.
pub fn run_fig2(config: &RunConfig) -> Result<SweepResult> {
    let mut res = Resolver {
        config,
        defaults: Vec::new(),
    };
    let k0s = res.get("k0", &config.k0, Samples::List(FIG2_K0.to_vec()));
    let phis = res.get(
        "phi",
        &config.phi,
        Samples::Range {
            start: 0.0,
            stop: PI,
            n: 101,
        },
    );
    let (f1, f2) = pulses(config)?;
    let curves = k0s
        .par_iter()
        .map(|&k0| {
            let coeffs = OverlapCoeffs::compute(&f1, &f2, k0, config.coeff_tolerance)?;
            let fid = closed_fidelities(&coeffs, &phis)?;
            let fam = CopropagatingFamily::from_spec(&f1, &f2, k0, &config.grid)?.with_entropy();
            let ent = phis
                .iter()
                .map(|&phi| fam.metrics(phi).map(|m| m.entropy.unwrap_or(f64::NAN)))
                .collect::<Result<Vec<_>>>()?;
            Ok(ent
                .into_iter()
                .zip(fid)
                .map(|(s, f)| vec![Some(s), Some(f)])
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = SweepResult::new(
        "fig2",
        Layout::Wide,
        vec![Axis::new("k0", "", k0s), Axis::new("Phi", "rad", phis)],
        &["S_L", "F"],
    );
    out.rows = curves.into_iter().flatten().collect();
    finish(out, config, res)
}

/// Closed-form F over the (k0, Φ) lattice.
pub fn run_fig3(config: &RunConfig) -> Result<SweepResult> {
    let mut res = Resolver {
        config,
        defaults: Vec::new(),
    };
    let k0s = res.get(
        "k0",
        &config.k0,
        Samples::Range {
            start: 0.1,
            stop: 8.0,
            n: 80,
        },
    );
    let phis = res.get(
        "phi",
        &config.phi,
        Samples::Range {
            start: 0.0,
            stop: PI,
            n: 64,
        },
    );
    let (f1, f2) = pulses(config)?;
    let rows = k0s
        .par_iter()
        .map(|&k0| {
            closed_fidelities(
                &OverlapCoeffs::compute(&f1, &f2, k0, config.coeff_tolerance)?,
                &phis,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = SweepResult::new(
        "fig3",
        Layout::Heatmap,
        vec![
            Axis::new("k0", "", k0s.clone()),
            Axis::new("Phi", "rad", phis.clone()),
        ],
        &["F"],
    );
    out.rows = rows.iter().flatten().map(|&f| vec![Some(f)]).collect();
    let (r, f) = out
        .rows
        .iter()
        .enumerate()
        .map(|(r, row)| (r, row[0].unwrap()))
        .fold(
            (0, f64::INFINITY),
            |best, x| if x.1 < best.1 { x } else { best },
        );
    let at = out.coordinates(r);
    out.summary.insert("F_min".into(), f);
    out.summary.insert("F_min_k0".into(), at[0]);
    out.summary.insert("F_min_Phi".into(), at[1]);
    finish(out, config, res)
}

/// The head-on setup a configuration describes, with its time samples.
pub fn collision_setup(
    config: &RunConfig,
    defaults: &mut Vec<(String, String)>,
) -> Result<CollisionSetup> {
    let mut res = Resolver {
        config,
        defaults: Vec::new(),
    };
    let k0s = res.get("k0", &config.k0, Samples::List(vec![FIG4_K0]));
    let [k0] = k0s[..] else {
        return Err(Error::Config(format!(
            "fig4 takes a single k0, got {}",
            k0s.len()
        )));
    };
    let h = &config.headon;
    let window = 2.0 * h.separation / h.relative_velocity.abs();
    let times = res.get(
        "headon.times",
        &h.times,
        Samples::Range {
            start: 0.0,
            stop: window,
            n: 41,
        },
    );
    let vr = h.relative_velocity;
    let params = SystemParams::head_on(k0, PI, 0.5 * vr, -0.5 * vr, h.separation)?;
    defaults.extend(res.defaults);
    CollisionSetup::new(&config.profile, params, &config.grid, times, h.n_max)
}

/// F(t) and θ(t) through a head-on collision, one curve per Φ.
pub fn run_fig4(config: &RunConfig) -> Result<SweepResult> {
    let mut res = Resolver {
        config,
        defaults: Vec::new(),
    };
    let phis = res.get(
        "phi",
        &config.phi,
        Samples::List(vec![PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI]),
    );
    let setup = collision_setup(config, &mut res.defaults)?;
    let curves = fidelity_evolution(&setup, &phis)?;
    let mut out = SweepResult::new(
        "fig4",
        Layout::Wide,
        vec![
            Axis::new("Phi", "rad", phis),
            Axis::new("t", "time", setup.times().to_vec()),
        ],
        &["F", "theta"],
    );
    for (k, c) in curves.iter().enumerate() {
        out.rows.extend(
            c.fidelity
                .iter()
                .zip(&c.phase)
                .map(|(f, th)| vec![Some(*f), Some(*th)]),
        );
        out.summary.insert(format!("F_min[{k}]"), c.min_fidelity);
        out.summary
            .insert(format!("F_final[{k}]"), c.final_fidelity);
    }
    out.summary
        .insert("contact_time".into(), setup.contact_time());
    out.summary.insert("k0".into(), setup.params().k0);
    out.provenance.warnings = setup.warnings();
    out.provenance
        .tolerances
        .insert("gauge".into(), VALIDITY_GAUGE);
    out.provenance
        .tolerances
        .insert("series_term".into(), TERM_FLOOR);
    finish(out, config, res)
}
