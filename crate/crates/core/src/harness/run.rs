use std::io::Write;
use std::path::Path;

use super::config::{Command, ExperimentConfig, OutputFormat};
use super::report::{Cell, Report};
use crate::analytic::{routability, RoutabilityResult};
use crate::error::Result;
use crate::geometry::{GeometryKind, GeometrySpec};
use crate::scalability::{classify, EVIDENCE_HORIZONS};
use crate::sim::{estimate_routability, SimOutcome, SimSeeds};

pub const TOOL_NAME: &str = "rcm";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: Report,
    /// Compare rows whose analytic/simulated gap exceeds its tolerance.
    pub breaches: usize,
}

/// How closely a simulated routability must track the analytic one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    pub tolerance: f64,
    pub pass: bool,
}

/// Per-geometry agreement rule between model and simulator.
///
/// Tree, Hypercube and Xor: `|gap| <= max(0.02, 3 se)`. Ring: the model
/// may overstate failure but not understate it by more than 0.02, and for
/// `q <= 0.2` the two stay within 0.03. Symphony: `|gap| <= 0.05`.
pub fn agreement(kind: GeometryKind, q: f64, analytic: f64, simulated: f64, std_error: f64) -> Agreement {
    let gap = (analytic - simulated).abs();
    match kind {
        GeometryKind::Tree | GeometryKind::Hypercube | GeometryKind::Xor => {
            let tolerance = 0.02f64.max(3.0 * std_error);
            Agreement {
                tolerance,
                pass: gap <= tolerance,
            }
        }
        GeometryKind::Ring => {
            // failed_sim <= failed_analytic + 0.02
            let one_sided = analytic - simulated <= 0.02;
            if q <= 0.2 + 1e-12 {
                Agreement {
                    tolerance: 0.03,
                    pass: one_sided && gap <= 0.03,
                }
            } else {
                Agreement {
                    tolerance: 0.02,
                    pass: one_sided,
                }
            }
        }
        GeometryKind::Symphony => Agreement {
            tolerance: 0.05,
            pass: gap <= 0.05,
        },
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    match cfg.command {
        Command::Analytic => run_analytic(cfg),
        Command::Simulate => run_simulate(cfg),
        Command::Compare => run_compare(cfg),
        Command::Asymptotic => run_asymptotic(cfg),
        Command::Scalability => run_scalability(cfg),
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

pub fn metadata(cfg: &ExperimentConfig) -> Vec<(String, Cell)> {
    let mut m: Vec<(String, Cell)> = vec![
        ("tool".into(), Cell::text(TOOL_NAME)),
        ("version".into(), Cell::text(TOOL_VERSION)),
        ("command".into(), Cell::text(cfg.command.name())),
        ("geometry".into(), Cell::text(join(&cfg.geometries))),
        ("d".into(), Cell::text(join(&cfg.d))),
        ("q_start".into(), Cell::Real(cfg.q_start)),
        ("q_stop".into(), Cell::Real(cfg.q_stop)),
        ("q_step".into(), Cell::Real(cfg.q_step)),
        ("trials".into(), Cell::Int(cfg.trials as u64)),
        ("pairs".into(), Cell::Int(cfg.pairs as u64)),
        ("seed".into(), Cell::Int(cfg.seed)),
    ];
    if cfg.command.uses_simulator() {
        let seeds = SimSeeds::from_master(cfg.seed);
        m.push(("build_seed".into(), Cell::Int(seeds.build)));
        m.push(("fail_seed".into(), Cell::Int(seeds.fail)));
        m.push(("pair_seed".into(), Cell::Int(seeds.pair)));
    }
    m.extend([
        ("denominator".into(), Cell::text(cfg.denominator.name())),
        ("kn".into(), Cell::Int(cfg.k_n as u64)),
        ("ks".into(), Cell::Int(cfg.k_s as u64)),
        ("format".into(), Cell::text(cfg.format.name())),
        (
            "out".into(),
            cfg.out
                .as_ref()
                .map_or(Cell::Empty, |p| Cell::text(p.display().to_string())),
        ),
        ("check".into(), Cell::Bool(cfg.check)),
    ]);
    if cfg.command == Command::Scalability {
        m.push((
            "q_range".into(),
            Cell::text("verdicts cover all 0<q<1; the percolation bound on q is not computed"),
        ));
    }
    m
}

/// Each (geometry, d) spec paired with each grid q, in config order.
fn grid(cfg: &ExperimentConfig) -> Result<Vec<(GeometrySpec, f64)>> {
    let qs = cfg.q_grid();
    Ok(cfg
        .specs()?
        .into_iter()
        .flat_map(|spec| qs.iter().map(move |&q| (spec, q)))
        .collect())
}

fn node_count_cell(spec: &GeometrySpec) -> Cell {
    spec.node_count()
        .map_or_else(|| Cell::Real(spec.node_count_f64()), Cell::Int)
}

fn key_cells(spec: &GeometrySpec, q: f64) -> Vec<Cell> {
    vec![
        Cell::text(spec.kind().name()),
        Cell::Int(spec.d() as u64),
        node_count_cell(spec),
        Cell::Real(q),
    ]
}

fn error_cell<T>(result: &Result<T>) -> Cell {
    match result {
        Ok(_) => Cell::Empty,
        Err(e) => Cell::text(e.to_string()),
    }
}

const ANALYTIC_COLUMNS: [&str; 10] = [
    "geometry",
    "d",
    "N",
    "q",
    "analytic_routability",
    "analytic_failed_fraction",
    "expected_reach",
    "normalized",
    "clamped",
    "error",
];

fn analytic_report(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let mut report = Report::new(metadata(cfg), ANALYTIC_COLUMNS.to_vec());
    for (spec, q) in grid(cfg)? {
        let result = routability(&spec, q, cfg.denominator);
        let mut cells = key_cells(&spec, q);
        match &result {
            Ok(r) => cells.extend([
                Cell::Real(r.routability),
                Cell::Real(r.failed_fraction),
                Cell::Real(r.expected_reach),
                Cell::Bool(r.normalized),
                Cell::Bool(r.clamped),
            ]),
            Err(_) => cells.extend(std::iter::repeat_n(Cell::Empty, 5)),
        }
        cells.push(error_cell(&result));
        report.push(cells);
    }
    Ok(RunOutput { report, breaches: 0 })
}

pub fn run_analytic(cfg: &ExperimentConfig) -> Result<RunOutput> {
    analytic_report(cfg)
}

/// Same columns as [`run_analytic`]; meant for long `d` lists (up to 100)
/// at a few fixed `q`.
pub fn run_asymptotic(cfg: &ExperimentConfig) -> Result<RunOutput> {
    analytic_report(cfg)
}

fn sim_cells(out: &Result<SimOutcome>) -> Vec<Cell> {
    match out {
        Ok(s) => vec![
            Cell::Real(s.routable_fraction),
            Cell::Real(1.0 - s.routable_fraction),
            Cell::Real(s.std_error),
            Cell::Int(s.hop_cap_hits),
            Cell::Int(s.redrawn_trials as u64),
        ],
        Err(_) => vec![Cell::Empty; 5],
    }
}

fn seed_cells(seeds: SimSeeds) -> [Cell; 3] {
    [Cell::Int(seeds.build), Cell::Int(seeds.fail), Cell::Int(seeds.pair)]
}

pub fn run_simulate(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let columns = vec![
        "geometry",
        "d",
        "N",
        "q",
        "sim_routability",
        "sim_failed_fraction",
        "sim_std_error",
        "hop_cap_hits",
        "redrawn_trials",
        "trials",
        "pairs",
        "build_seed",
        "fail_seed",
        "pair_seed",
        "error",
    ];
    let seeds = SimSeeds::from_master(cfg.seed);
    let mut report = Report::new(metadata(cfg), columns);
    for (spec, q) in grid(cfg)? {
        let out = estimate_routability(&spec, q, cfg.trials, cfg.pairs, seeds);
        let mut cells = key_cells(&spec, q);
        cells.extend(sim_cells(&out));
        cells.extend([Cell::Int(cfg.trials as u64), Cell::Int(cfg.pairs as u64)]);
        cells.extend(seed_cells(seeds));
        cells.push(error_cell(&out));
        report.push(cells);
    }
    Ok(RunOutput { report, breaches: 0 })
}

pub fn run_compare(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let columns = vec![
        "geometry",
        "d",
        "N",
        "q",
        "analytic_routability",
        "analytic_failed_fraction",
        "sim_routability",
        "sim_failed_fraction",
        "sim_std_error",
        "hop_cap_hits",
        "redrawn_trials",
        "abs_gap",
        "tolerance",
        "within_tolerance",
        "build_seed",
        "fail_seed",
        "pair_seed",
        "error",
    ];
    let seeds = SimSeeds::from_master(cfg.seed);
    let mut report = Report::new(metadata(cfg), columns);
    let mut breaches = 0;
    for (spec, q) in grid(cfg)? {
        let analytic: Result<RoutabilityResult> = routability(&spec, q, cfg.denominator);
        let sim = estimate_routability(&spec, q, cfg.trials, cfg.pairs, seeds);
        let mut cells = key_cells(&spec, q);
        match &analytic {
            Ok(r) => cells.extend([Cell::Real(r.routability), Cell::Real(r.failed_fraction)]),
            Err(_) => cells.extend([Cell::Empty, Cell::Empty]),
        }
        cells.extend(sim_cells(&sim));
        match (&analytic, &sim) {
            (Ok(a), Ok(s)) => {
                let verdict = agreement(spec.kind(), q, a.routability, s.routable_fraction, s.std_error);
                if !verdict.pass {
                    breaches += 1;
                }
                cells.extend([
                    Cell::Real((a.routability - s.routable_fraction).abs()),
                    Cell::Real(verdict.tolerance),
                    Cell::Bool(verdict.pass),
                ]);
            }
            _ => cells.extend([Cell::Empty, Cell::Empty, Cell::Empty]),
        }
        cells.extend(seed_cells(seeds));
        cells.push(match (&analytic, &sim) {
            (Err(e), _) | (_, Err(e)) => Cell::text(e.to_string()),
            _ => Cell::Empty,
        });
        report.push(cells);
    }
    Ok(RunOutput { report, breaches })
}

pub fn run_scalability(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let mut columns = vec![
        "geometry",
        "d",
        "q",
        "verdict",
        "failure_growth",
        "limit_estimate",
        "ln_limit_estimate",
        "converged_at",
        "vanishing_horizon",
    ];
    columns.extend(["sum_q_h10", "sum_q_h100", "sum_q_h1000", "sum_q_h10000"]);
    columns.extend(["p_h10", "p_h100", "p_h1000", "p_h10000"]);
    columns.push("error");
    debug_assert_eq!(EVIDENCE_HORIZONS, [10, 100, 1000, 10000]);

    let mut report = Report::new(metadata(cfg), columns);
    for (spec, q) in grid(cfg)? {
        let result = classify(&spec, q);
        let mut cells = vec![
            Cell::text(spec.kind().name()),
            Cell::Int(spec.d() as u64),
            Cell::Real(q),
        ];
        match &result {
            Ok(v) => {
                cells.extend([
                    Cell::text(v.verdict.to_string()),
                    Cell::text(match v.growth {
                        crate::scalability::FailureGrowth::Constant => "constant",
                        crate::scalability::FailureGrowth::GeometricDecay => "geometric_decay",
                    }),
                    Cell::Real(v.limit_estimate),
                    Cell::Real(v.ln_limit_estimate),
                    Cell::opt_int(v.converged_at.map(u64::from)),
                    Cell::opt_int(v.vanishing_horizon.map(u64::from)),
                ]);
                cells.extend(v.evidence.partial_sums.iter().map(|&(_, s)| Cell::Real(s)));
                cells.extend(v.evidence.partial_products.iter().map(|&(_, p)| Cell::Real(p)));
            }
            Err(_) => cells.extend(vec![Cell::Empty; 14]),
        }
        cells.push(error_cell(&result));
        report.push(cells);
    }
    Ok(RunOutput { report, breaches: 0 })
}

pub fn render(report: &Report, format: OutputFormat) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => report.write_csv(&mut buf)?,
        OutputFormat::Json => report.write_json(&mut buf)?,
    }
    Ok(buf)
}

/// Writes the report to `out`, or to stdout when no path is given.
pub fn emit(report: &Report, format: OutputFormat, out: Option<&Path>) -> Result<()> {
    let bytes = render(report, format)?;
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(&bytes)?;
            lock.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::tree_closed_form;
    use crate::harness::config::ConfigOverrides;

    fn config(command: Command, text: &str) -> ExperimentConfig {
        ExperimentConfig::resolve(command, ConfigOverrides::parse(text).unwrap()).unwrap()
    }

    fn real(report: &Report, row: usize, col: &str) -> f64 {
        match &report.rows[row].cells[report.column(col).unwrap()] {
            Cell::Real(v) => *v,
            other => panic!("{col}: {other:?}"),
        }
    }

    #[test]
    fn analytic_default_sweep() {
        let out = run(&config(Command::Analytic, "")).unwrap();
        assert_eq!(out.report.rows.len(), 55);
        for i in (0..55).step_by(11) {
            assert_eq!(real(&out.report, i, "analytic_failed_fraction"), 0.0);
        }
        // Tree rows come first.
        for i in 0..11 {
            let q = real(&out.report, i, "q");
            let closed = tree_closed_form(16, q).unwrap();
            let got = real(&out.report, i, "analytic_routability");
            assert!((got - closed.clamp(0.0, 1.0)).abs() <= 1e-12 * closed, "q={q}");
        }
    }

    #[test]
    fn degenerate_rows_carry_errors() {
        let out = run(&config(Command::Analytic, "geometry=tree\nd=1\nq-start=0.4\nq-stop=0.6\nq-step=0.2")).unwrap();
        let err = out.report.column("error").unwrap();
        assert_eq!(out.report.rows[0].cells[err], Cell::Empty);
        assert!(matches!(&out.report.rows[1].cells[err], Cell::Text(t) if t.contains("degenerate")));
        let r = out.report.column("analytic_routability").unwrap();
        assert_eq!(out.report.rows[1].cells[r], Cell::Empty);
    }

    #[test]
    fn compare_zero_q_has_zero_gap() {
        let cfg = config(Command::Compare, "d=8\nq-stop=0\ntrials=2\npairs=100");
        let out = run(&cfg).unwrap();
        assert_eq!(out.report.rows.len(), 5);
        for i in 0..5 {
            assert_eq!(real(&out.report, i, "abs_gap"), 0.0);
        }
        assert_eq!(out.breaches, 0);
    }

    #[test]
    fn simulate_rows_echo_seeds() {
        let cfg = config(Command::Simulate, "geometry=ring\nd=8\nq-start=0.2\ntrials=2\npairs=50\nseed=5");
        let out = run(&cfg).unwrap();
        let seeds = SimSeeds::from_master(5);
        let col = out.report.column("fail_seed").unwrap();
        assert_eq!(out.report.rows[0].cells[col], Cell::Int(seeds.fail));
        assert!(out
            .report
            .metadata
            .iter()
            .any(|(k, v)| k == "pair_seed" && *v == Cell::Int(seeds.pair)));
    }

    #[test]
    fn simulator_errors_stay_in_their_row() {
        let cfg = config(Command::Compare, "geometry=ring\nd=24\nq-start=0.1\ntrials=1\npairs=1");
        let out = run(&cfg).unwrap();
        let err = out.report.column("error").unwrap();
        assert!(matches!(&out.report.rows[0].cells[err], Cell::Text(t) if t.contains("simulator")));
        assert_eq!(out.report.rows[0].cells[out.report.column("sim_routability").unwrap()], Cell::Empty);
    }

    #[test]
    fn scalability_verdict_column() {
        let out = run(&config(Command::Scalability, "")).unwrap();
        let col = out.report.column("verdict").unwrap();
        let verdicts: Vec<_> = out.report.rows.iter().map(|r| r.cells[col].clone()).collect();
        let expect = ["unscalable", "scalable", "scalable", "scalable", "unscalable"];
        assert_eq!(verdicts, expect.map(Cell::text).to_vec());
    }

    #[test]
    fn ring_rule_is_one_sided_above_0_2() {
        let k = GeometryKind::Ring;
        assert!(agreement(k, 0.3, 0.80, 0.90, 0.0).pass);
        assert!(!agreement(k, 0.3, 0.90, 0.87, 0.0).pass);
        assert!(!agreement(k, 0.1, 0.90, 0.94, 0.0).pass);
        assert!(agreement(k, 0.2, 0.90, 0.92, 0.0).pass);
    }
}
