//! Command-line front end of the laboratory: solves family members and
//! exports their profiles, locates the critical parameter, writes portrait
//! grids, runs the verification suite, and summarizes a member.
//!
//! Exit codes: 0 ok, 2 usage, 3 solver failure, 4 bad bracket,
//! 5 verification failure.

mod checks;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use cubint::family::{
    solve_g, solve_x, Tau, TauWindow, THRESHOLD_ESTIMATE, WINDOW_MARGIN,
};
use cubint::ivp::IntegratorConfig;
use cubint::portrait::{equilibria, rhs_sms, PhasePoint};
use cubint::sphere::{hamiltonian_flow, pole_report, PhaseState};
use cubint::threshold::{find_threshold, ThresholdConfig, ThresholdError};

use output::{render_csv, render_json, write_out, ARTIFACT};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Solver(String),
    Bracket(String),
    Verification { failed: usize, total: usize },
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Bracket(_) => 4,
            Failure::Verification { .. } => 5,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Solver(m) => format!("solver failure: {m}"),
            Failure::Bracket(m) => m.clone(),
            Failure::Verification { failed, total } => {
                format!("verification failed: {failed} of {total} checks missed their tolerance")
            }
        }
    }
}

/// Wraps a library error, keeping the variant name next to the rendered
/// message.
pub fn solver<E: fmt::Debug + fmt::Display>(e: E) -> Failure {
    Failure::Solver(format!("{e} [{e:?}]"))
}

#[derive(Parser)]
#[command(name = "cubint", version, about = "Numerical laboratory for a one-parameter family of integrable systems on the two-sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one family member and export its profile table
    Solve(SolveArgs),
    /// Locate the critical parameter by bisection on the orbit verdict
    FindT(FindTArgs),
    /// Export the planar vector field on a rectangular grid
    Portrait(PortraitArgs),
    /// Run numerical identity checks and write a pass/fail report
    Verify(VerifyArgs),
    /// Summarize one member: equilibria, pole data, conservation
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Formulation {
    /// Log-radius form on [0, t_max]
    X,
    /// Radial form on [r_min, r_max]
    U,
    /// Pole form swept from s = 1 down to s_min
    G,
}

impl Formulation {
    fn as_str(self) -> &'static str {
        match self {
            Formulation::X => "x",
            Formulation::U => "u",
            Formulation::G => "g",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone, Copy)]
struct TolArgs {
    /// Integrator relative tolerance
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    /// Integrator absolute tolerance
    #[arg(long, default_value_t = 1e-10)]
    abs_tol: f64,
}

impl TolArgs {
    fn config(&self) -> Result<IntegratorConfig<f64>, Failure> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.rel_tol) || !ok(self.abs_tol) {
            return Err(Failure::Usage(
                "tolerances must be positive and finite".into(),
            ));
        }
        Ok(IntegratorConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            ..IntegratorConfig::default()
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Family parameter
    #[arg(long, allow_negative_numbers = true)]
    tau: f64,
    /// Profile form to export
    #[arg(long, value_enum, default_value_t = Formulation::X)]
    formulation: Formulation,
    /// Time span of the x form
    #[arg(long, default_value_t = 3.0)]
    t_max: f64,
    /// Lower radius of the u form
    #[arg(long, default_value_t = 0.1)]
    r_min: f64,
    /// Upper radius of the u form
    #[arg(long, default_value_t = 10.0)]
    r_max: f64,
    /// Lower sweep end of the g form
    #[arg(long, default_value_t = 1e-6)]
    s_min: f64,
    /// Number of grid rows
    #[arg(long, default_value_t = 201)]
    samples: usize,
    #[command(flatten)]
    tols: TolArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FindTArgs {
    /// Bracket-width stopping tolerance
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Starting bracket: escaping at LOW, converging at HIGH
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["LOW", "HIGH"])]
    bracket: Option<Vec<f64>>,
    #[command(flatten)]
    tols: TolArgs,
    /// Output file (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PortraitArgs {
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    q_min: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    q_max: f64,
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    p_min: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    p_max: f64,
    /// Grid points along q
    #[arg(long, default_value_t = 41)]
    nq: usize,
    /// Grid points along p
    #[arg(long, default_value_t = 41)]
    np: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    Bracket,
    Conservation,
    Curvature,
    Consistency,
    Poles,
    All,
}

impl CheckKind {
    fn as_str(self) -> &'static str {
        match self {
            CheckKind::Bracket => "bracket",
            CheckKind::Conservation => "conservation",
            CheckKind::Curvature => "curvature",
            CheckKind::Consistency => "consistency",
            CheckKind::Poles => "poles",
            CheckKind::All => "all",
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Which identity family to check
    #[arg(value_enum)]
    check: CheckKind,
    /// Family parameter the checks run on
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.3)]
    tau: f64,
    /// Random states for the bracket sweep
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Seed of the random-state stream
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    tols: TolArgs,
    /// Break sampled jets on purpose to exercise the failure path
    #[arg(long, hide = true)]
    corrupt_jet: bool,
    /// Output file (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Family parameter
    #[arg(long, allow_negative_numbers = true)]
    tau: f64,
    #[command(flatten)]
    tols: TolArgs,
    /// Output file (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::FindT(a) => cmd_find_t(&a),
        Command::Portrait(a) => cmd_portrait(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Report(a) => cmd_report(&a),
    }
}

fn in_window(value: f64) -> Result<Tau<f64>, Failure> {
    Tau::new(value).map_err(|e| Failure::Usage(e.to_string()))
}

fn cmd_solve(a: &SolveArgs) -> Result<(), Failure> {
    let config = a.tols.config()?;
    if a.samples < 2 {
        return Err(Failure::Usage("--samples must be at least 2".into()));
    }
    let tau = in_window(a.tau)?;
    let n = a.samples;

    let (columns, rows, range_echo): (&[&str], Vec<Vec<f64>>, String) = match a.formulation {
        Formulation::X => {
            if !(a.t_max > 0.0) || !a.t_max.is_finite() {
                return Err(Failure::Usage("--t-max must be positive and finite".into()));
            }
            let sol = solve_x(tau, a.t_max, &config).map_err(solver)?;
            let mut rows = Vec::with_capacity(n);
            for i in 0..n {
                let t = a.t_max * i as f64 / (n - 1) as f64;
                let [x, x1, x2, x3] = sol.eval_with_third(t).map_err(solver)?;
                rows.push(vec![t, x, x1, x2, x3]);
            }
            (
                &["t", "x", "dx", "d2x", "d3x"],
                rows,
                format!("--t-max {}", a.t_max),
            )
        }
        Formulation::U => {
            if !(a.r_min > 0.0) || !(a.r_min < a.r_max) || !a.r_max.is_finite() {
                return Err(Failure::Usage(
                    "need 0 < --r-min < --r-max, both finite".into(),
                ));
            }
            let (lo, hi) = (a.r_min.ln(), a.r_max.ln());
            // margin keeps log/exp round-trips of the endpoints covered
            let span = lo.abs().max(hi.abs()) + 1e-9;
            let sol = solve_x(tau, span, &config).map_err(solver)?;
            let radial = sol.radial();
            let mut rows = Vec::with_capacity(n);
            for i in 0..n {
                let r = if i == 0 {
                    a.r_min
                } else if i == n - 1 {
                    a.r_max
                } else {
                    (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()
                };
                let j = radial.jet(r).map_err(solver)?;
                rows.push(vec![r, j.u, j.du, j.d2u, j.d3u]);
            }
            (
                &["r", "u", "du", "d2u", "d3u"],
                rows,
                format!("--r-min {} --r-max {}", a.r_min, a.r_max),
            )
        }
        Formulation::G => {
            if !(a.s_min > 0.0) || !(a.s_min < 1.0) {
                return Err(Failure::Usage("need 0 < --s-min < 1".into()));
            }
            let sol = solve_g(tau, a.s_min, &config).map_err(solver)?;
            let ls = a.s_min.ln();
            let mut rows = Vec::with_capacity(n);
            for i in 0..n {
                let s = if i == n - 1 {
                    a.s_min
                } else {
                    (ls * i as f64 / (n - 1) as f64).exp()
                };
                let [g, g1, g2, g3] = sol.eval_with_third(s).map_err(solver)?;
                rows.push(vec![s, g, g1, g2, g3]);
            }
            (
                &["s", "g", "dg", "d2g", "d3g"],
                rows,
                format!("--s-min {}", a.s_min),
            )
        }
    };

    let content = match a.format {
        Format::Csv => {
            let comments = vec![
                format!(
                    "command: solve --tau {} --formulation {} {} --samples {} --rel-tol {:e} --abs-tol {:e}",
                    a.tau,
                    a.formulation.as_str(),
                    range_echo,
                    n,
                    a.tols.rel_tol,
                    a.tols.abs_tol
                ),
                format!("tau = {}", a.tau),
                format!("formulation = {}", a.formulation.as_str()),
                format!("rel_tol = {:e}", a.tols.rel_tol),
                format!("abs_tol = {:e}", a.tols.abs_tol),
            ];
            render_csv(&comments, columns, &rows)
        }
        Format::Json => render_json(&json!({
            "command": "solve",
            "artifact": ARTIFACT,
            "config": {
                "tau": a.tau,
                "formulation": a.formulation.as_str(),
                "range": range_echo,
                "samples": n,
                "rel_tol": a.tols.rel_tol,
                "abs_tol": a.tols.abs_tol,
            },
            "columns": columns,
            "rows": rows,
        }))?,
    };
    write_out(a.output.as_deref(), &content)
}

fn cmd_find_t(a: &FindTArgs) -> Result<(), Failure> {
    if !(a.tol > 0.0) || !a.tol.is_finite() {
        return Err(Failure::Usage("--tol must be positive and finite".into()));
    }
    let mut cfg = ThresholdConfig::<f64>::default();
    cfg.tol = a.tol;
    cfg.integrator = a.tols.config()?;
    if let Some(b) = &a.bracket {
        cfg.bracket = (b[0], b[1]);
    }
    let result = find_threshold(&cfg).map_err(|e| match e {
        ThresholdError::BadBracket { .. } => Failure::Bracket(e.to_string()),
        ThresholdError::BudgetExhausted { .. } => solver(e),
    })?;
    let doc = json!({
        "command": "find-t",
        "artifact": ARTIFACT,
        "config": {
            "tol": cfg.tol,
            "bracket": [cfg.bracket.0, cfg.bracket.1],
            "rel_tol": a.tols.rel_tol,
            "abs_tol": a.tols.abs_tol,
        },
        "result": result,
    });
    write_out(a.output.as_deref(), &render_json(&doc)?)
}

fn cmd_portrait(a: &PortraitArgs) -> Result<(), Failure> {
    if a.nq < 2 || a.np < 2 {
        return Err(Failure::Usage("--nq and --np must be at least 2".into()));
    }
    if !(a.q_min < a.q_max) || !(a.p_min < a.p_max) {
        return Err(Failure::Usage(
            "need --q-min < --q-max and --p-min < --p-max".into(),
        ));
    }
    let mut rows = Vec::with_capacity(a.nq * a.np);
    for i in 0..a.nq {
        let q = a.q_min + (a.q_max - a.q_min) * i as f64 / (a.nq - 1) as f64;
        for k in 0..a.np {
            let p = a.p_min + (a.p_max - a.p_min) * k as f64 / (a.np - 1) as f64;
            let [dq, dp] = rhs_sms(PhasePoint::new(q, p));
            rows.push(vec![q, p, dq, dp]);
        }
    }
    let columns: &[&str] = &["q", "p", "dq", "dp"];
    let content = match a.format {
        Format::Csv => {
            let comments = vec![
                format!(
                    "command: portrait --q-min {} --q-max {} --p-min {} --p-max {} --nq {} --np {}",
                    a.q_min, a.q_max, a.p_min, a.p_max, a.nq, a.np
                ),
                format!("q_range = [{}, {}], nq = {}", a.q_min, a.q_max, a.nq),
                format!("p_range = [{}, {}], np = {}", a.p_min, a.p_max, a.np),
            ];
            render_csv(&comments, columns, &rows)
        }
        Format::Json => render_json(&json!({
            "command": "portrait",
            "artifact": ARTIFACT,
            "config": {
                "q_min": a.q_min, "q_max": a.q_max, "nq": a.nq,
                "p_min": a.p_min, "p_max": a.p_max, "np": a.np,
            },
            "columns": columns,
            "rows": rows,
        }))?,
    };
    write_out(a.output.as_deref(), &content)
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), Failure> {
    let config = a.tols.config()?;
    if a.samples == 0 {
        return Err(Failure::Usage("--samples must be at least 1".into()));
    }
    let tau = in_window(a.tau)?;
    let mut rows = Vec::new();
    let kinds = match a.check {
        CheckKind::All => vec![
            CheckKind::Bracket,
            CheckKind::Conservation,
            CheckKind::Curvature,
            CheckKind::Consistency,
            CheckKind::Poles,
        ],
        one => vec![one],
    };
    for kind in kinds {
        rows.extend(match kind {
            CheckKind::Bracket => {
                checks::bracket(tau, a.samples, a.seed, a.corrupt_jet, &config)?
            }
            CheckKind::Conservation => checks::conservation(tau, &config)?,
            CheckKind::Curvature => checks::curvature(tau, &config)?,
            CheckKind::Consistency => checks::consistency(tau, &config)?,
            CheckKind::Poles => checks::poles(tau, &config)?,
            CheckKind::All => unreachable!(),
        });
    }

    let failed = rows.iter().filter(|r| !r.pass).count();
    let doc = json!({
        "command": "verify",
        "artifact": ARTIFACT,
        "config": {
            "check": a.check.as_str(),
            "tau": a.tau,
            "samples": a.samples,
            "seed": a.seed,
            "rel_tol": a.tols.rel_tol,
            "abs_tol": a.tols.abs_tol,
            "corrupt_jet": a.corrupt_jet,
        },
        "checks": rows,
        "pass": failed == 0,
    });
    write_out(a.output.as_deref(), &render_json(&doc)?)?;
    if failed > 0 {
        return Err(Failure::Verification {
            failed,
            total: rows.len(),
        });
    }
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> Result<(), Failure> {
    let config = a.tols.config()?;
    let tau = in_window(a.tau)?;
    let pole = pole_report(tau, &config).map_err(solver)?;
    let flow = hamiltonian_flow(
        tau,
        PhaseState::new(0.7, 0.3, 0.2, -0.5),
        50.0,
        101,
        &config,
    )
    .map_err(solver)?;
    let doc = json!({
        "command": "report",
        "artifact": ARTIFACT,
        "config": {
            "tau": a.tau,
            "rel_tol": a.tols.rel_tol,
            "abs_tol": a.tols.abs_tol,
        },
        "window": {
            "threshold_estimate": THRESHOLD_ESTIMATE,
            "margin": WINDOW_MARGIN,
            "limit": TauWindow::<f64>::default().limit(),
        },
        "equilibria": equilibria::<f64>(),
        "pole": pole,
        "conservation": {
            "t_end": 50.0,
            "samples": 101,
            "max_drift_h": flow.max_drift_h,
            "max_drift_f": flow.max_drift_f,
        },
    });
    write_out(a.output.as_deref(), &render_json(&doc)?)
}
