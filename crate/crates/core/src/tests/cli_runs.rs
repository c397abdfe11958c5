use std::f64::consts::PI;
use std::path::Path;

use crate::cli::{
    main_with, render, run_coeffs, run_fig2, run_fig3, run_fig4, Args, Format, Oracles, RunConfig,
    Samples, Task, Validator,
};
use crate::numerics::Shape;

fn args(task: &str) -> Args {
    Args {
        task: task.into(),
        config: None,
        out: None,
        format: None,
        k0: None,
        phi: None,
        profile: None,
        grid_n: None,
        threads: None,
    }
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(main_with(args("fig7")), 2);
    assert_eq!(
        main_with(Args {
            format: Some("xml".into()),
            ..args("fig1")
        }),
        2
    );
    assert_eq!(
        main_with(Args {
            profile: Some("lorentzian".into()),
            ..args("fig1")
        }),
        2
    );

    let bad_key = dir.path().join("bad.toml");
    std::fs::write(&bad_key, "task = \"coeffs\"\ngrid.nodes = 3\n").unwrap();
    assert_eq!(
        main_with(Args {
            config: Some(bad_key),
            ..args("coeffs")
        }),
        2
    );

    let strict = dir.path().join("strict.toml");
    std::fs::write(
        &strict,
        "task = \"coeffs\"\ntolerance.coeff = 1e-30\nk0 = [1.0]\n",
    )
    .unwrap();
    let out = dir.path().join("never.csv");
    assert_eq!(
        main_with(Args {
            config: Some(strict),
            out: Some(out.clone()),
            ..args("coeffs")
        }),
        3
    );
    assert!(!out.exists());

    let fine = dir.path().join("nested/fig1.csv");
    assert_eq!(
        main_with(Args {
            out: Some(fine.clone()),
            ..args("fig1")
        }),
        0
    );
    assert!(fine.exists());
}

#[test]
fn fig1_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1.csv");
    assert_eq!(
        main_with(Args {
            out: Some(out.clone()),
            ..args("fig1")
        }),
        0
    );
    let text = read(&out);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 9);
    assert_eq!(header[0], "Phi");
    assert_eq!(header[4], "theta[C1=0.5]");
    let rows: Vec<Vec<f64>> = lines
        .take_while(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 701);
    for r in rows.iter().filter(|r| r[0] < PI - 0.01) {
        assert!((r[4] - r[0] / 2.0).abs() < 1e-8);
    }
    let at_pi = rows
        .iter()
        .min_by(|a, b| (a[0] - PI).abs().total_cmp(&(b[0] - PI).abs()))
        .unwrap();
    assert!((at_pi[8] - PI).abs() < 1e-6, "C1 = 0.98: {}", at_pi[8]);
    assert!(at_pi[1].abs() < 1e-6, "C1 = 0.2: {}", at_pi[1]);
    // the weak-coupling curve returns to 0 at 2π, the strong one reaches 2π
    let last = rows.last().unwrap();
    assert!(last[1].abs() < 1e-6 && (last[8] - 2.0 * PI).abs() < 1e-6);
    assert!(text.lines().any(|l| l.starts_with("# config_hash: ")));
}

#[test]
fn fig2_at_the_transition() {
    let mut c = RunConfig::new(Task::Fig2);
    c.k0 = Some(Samples::List(vec![2.5]));
    let r = run_fig2(&c).unwrap();
    assert_eq!(r.rows.len(), 101);
    let (s, f) = (r.column("S_L").unwrap(), r.column("F").unwrap());
    assert!(s[0].unwrap().abs() < 1e-12);
    assert_eq!(f[0], Some(1.0));
    assert!(f[100].unwrap() < 1e-3);
    let peak = s.iter().map(|v| v.unwrap()).fold(0.0, f64::max);
    assert!(peak > 0.05 && peak < 1.0);
}

#[test]
fn fig3_lattice_agrees_with_fig2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig3.json");
    let a = Args {
        out: Some(out.clone()),
        format: Some("json".into()),
        ..args("fig3")
    };
    assert_eq!(main_with(a), 0);
    let v: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(v["axes"][0]["values"].as_array().unwrap().len(), 80);
    assert_eq!(v["axes"][1]["values"].as_array().unwrap().len(), 64);
    assert_eq!(v["rows"].as_array().unwrap().len(), 80 * 64);

    let heat = run_fig3(&RunConfig::new(Task::Fig3)).unwrap();
    let k0 = heat.axes[0].values[24];
    assert!((k0 - 2.5).abs() < 1e-12);
    let mut c = RunConfig::new(Task::Fig2);
    c.k0 = Some(Samples::List(vec![k0]));
    c.phi = Some(Samples::Range {
        start: 0.0,
        stop: PI,
        n: 64,
    });
    let line = run_fig2(&c).unwrap();
    let f = line.column("F").unwrap();
    for (j, fj) in f.iter().enumerate() {
        assert_eq!(heat.rows[24 * 64 + j][0], *fj);
    }
    assert!(heat.summary["F_min"] < 1e-2);
    assert!((heat.summary["F_min_k0"] - 2.5).abs() < 0.3);
    assert_eq!(heat.summary["F_min_Phi"], PI);
}

#[test]
fn coefficient_table_and_transitions() {
    let r = run_coeffs(&RunConfig::new(Task::Coeffs)).unwrap();
    assert_eq!(r.axes[0].values.len(), 7);
    let c1 = r.column("C1").unwrap();
    assert!(c1.windows(2).all(|w| w[1].unwrap() < w[0].unwrap()));
    assert!((r.summary["transition_k0"] - 2.49675460102420).abs() < 1e-4);
    let mut sq = RunConfig::new(Task::Coeffs);
    sq.profile.shape = Shape::Square;
    sq.k0 = Some(Samples::List(vec![1.0]));
    let r = run_coeffs(&sq).unwrap();
    assert!((r.summary["transition_k0"] - 2.83405561678188).abs() < 1e-4);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for (task, fmt) in [("fig3", "csv"), ("fig1", "svg"), ("coeffs", "json")] {
        let paths: Vec<_> = (0..2)
            .map(|k| dir.path().join(format!("{task}-{k}.{fmt}")))
            .collect();
        for p in &paths {
            let a = Args {
                out: Some(p.clone()),
                format: Some(fmt.into()),
                threads: Some(2),
                ..args(task)
            };
            assert_eq!(main_with(a), 0);
        }
        assert_eq!(
            std::fs::read(&paths[0]).unwrap(),
            std::fs::read(&paths[1]).unwrap(),
            "{task}"
        );
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "task = \"fig3\"\nk0 = [1.0, 2.0]\nphi = \"0:pi:5\"\noutput.format = \"json\"\n",
    )
    .unwrap();
    let a = Args {
        config: Some(cfg),
        k0: Some("0.5,1.5,4".into()),
        ..args("fig2")
    };
    let c = a.config().unwrap();
    assert_eq!(c.task, Task::Fig2);
    assert_eq!(c.k0.as_ref().unwrap().values(), vec![0.5, 1.5, 4.0]);
    assert_eq!(c.phi.as_ref().unwrap().values().len(), 5);
    assert_eq!(c.format, Format::Json);
    let mut c3 = c.clone();
    c3.task = Task::Fig3;
    let r = run_fig3(&c3).unwrap();
    let v: serde_json::Value = serde_json::from_str(&render(&r, Format::Json).unwrap()).unwrap();
    assert_eq!(v["provenance"]["config_hash"], c3.hash());
    assert_ne!(c3.hash(), c.hash());
}

#[test]
fn small_collision_sweep() {
    let mut c = RunConfig::new(Task::Fig4);
    c.k0 = Some(Samples::List(vec![0.5]));
    c.grid.lower = -6.0;
    c.grid.upper = 6.0;
    c.grid.n = 49;
    c.grid.tail_tolerance = 1e-2;
    c.headon.separation = 6.0;
    c.headon.relative_velocity = 2.0;
    c.phi = Some(Samples::List(vec![PI / 2.0, PI]));
    let r = run_fig4(&c).unwrap();
    assert_eq!(r.axes[1].values.len(), 41);
    assert_eq!(r.rows.len(), 82);
    assert_eq!(r.summary["contact_time"], 3.0);
    assert!(!r.provenance.warnings.is_empty());
    let f = r.column("F").unwrap();
    assert!((f[0].unwrap() - 1.0).abs() < 1e-9 && (f[41].unwrap() - 1.0).abs() < 1e-9);
    assert!(r.summary["F_min[1]"] <= r.summary["F_min[0]"]);
    let csv = render(&r, Format::Csv).unwrap();
    assert!(csv.starts_with("t,F[Phi=1.57079633],F[Phi=3.14159265],theta[Phi=1.57079633]"));
}

#[test]
fn coarse_grid_fails_the_zero_fidelity_check() {
    let mut c = RunConfig::new(Task::Validate);
    c.grid.n = 9;
    let v = Validator::new(&c).unwrap();
    let r = v.criterion(2);
    assert!(!r.passed, "{r}");
    assert!(!v.criterion(99).passed);
}

#[test]
fn oracle_cache() {
    let dir = tempfile::tempdir().unwrap();
    let (fresh, cached) = Oracles::load_or_compute(dir.path(), 2.0).unwrap();
    assert!(!cached);
    let (again, cached) = Oracles::load_or_compute(dir.path(), 2.0).unwrap();
    assert!(cached);
    assert_eq!(fresh.gaussian_c1, again.gaussian_c1);
    assert!((fresh.square_transition - 2.83405561678188).abs() < 1e-6);
    let (_, cached) = Oracles::load_or_compute(dir.path(), 3.0).unwrap();
    assert!(!cached);
}
