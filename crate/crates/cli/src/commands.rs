use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chrono::Utc;
use clap::Args;
use serde::de::DeserializeOwned;
use serde_json::json;

use bellshare::bounds::{self, BiasedWindow};
use bellshare::metrics::{monogamy_region, proxy_22_via_state};
use bellshare::sampling;
use bellshare::search::rng::{substream, Domain};
use bellshare::search::{monte_carlo_bounds, sweep_frontier, DEConfig, MonteCarloSummary, Problem, SamplingMode, SweepResult};
use bellshare::state::{channel_oracle, PHYSICAL_TOL};
use bellshare::{Scenario, Side, TwoQubitState};

use crate::manifest::{write_atomic, RunManifest};
use crate::GlobalOpts;

const VIOLATION_EXIT: u8 = 2;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        anyhow::anyhow!("{}: field `{}`: {}", path.display(), at, e.into_inner())
    })
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad number {t:?}")))
        .collect()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn finish(g: &GlobalOpts, command: &str, seed: Option<u64>, inputs: serde_json::Value, started: chrono::DateTime<Utc>, body: &str, extra: &[(PathBuf, String)]) -> Result<()> {
    match &g.out {
        Some(out) => {
            write_atomic(out, body.as_bytes())?;
            let mut outputs = vec![out.clone()];
            for (p, b) in extra {
                write_atomic(p, b.as_bytes())?;
                outputs.push(p.clone());
            }
            RunManifest::new(command, seed, inputs, started, outputs).write_next_to(out)?;
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn json_body<T: serde::Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

pub fn eval(g: &GlobalOpts, path: &Path) -> Result<ExitCode> {
    let started = Utc::now();
    let scenario: Scenario = read_json(path)?;
    let min_eig = scenario.state.min_eigenvalue();
    if min_eig < -PHYSICAL_TOL {
        bail!("{}: state is not a density matrix (minimum eigenvalue {min_eig:.6e})", path.display());
    }
    let mut warnings = Vec::new();
    for (name, p) in [("policy_a", &scenario.policy_a), ("policy_b", &scenario.policy_b)] {
        if (p.secondary_prob() - 0.5).abs() > 1e-12 {
            warnings.push(format!(
                "{name}.epsilon = {} is not 1/2; the monogamy region classification assumes equal selection probabilities",
                p.secondary_prob()
            ));
        }
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let r = scenario.report();
    let out = json!({
        "report": r,
        "s22_via_state": proxy_22_via_state(&scenario),
        "region": {
            "s11_s22_allowed": monogamy_region(r.s11, r.s22),
            "s12_s21_allowed": monogamy_region(r.s12, r.s21),
        },
        "warnings": warnings,
    });
    let inputs = json!({ "scenario_file": path, "scenario": scenario });
    finish(g, "eval", None, inputs, started, &json_body(&out)?, &[])?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// passon: max S*(A2,B2) s.t. |S(A1,B1)| >= s; crossed: max S*(A2,B1) s.t. S*(A1,B2) >= s.
    #[arg(long, default_value = "passon")]
    pub problem: Problem,
    /// Comma-separated constraint levels (strictly increasing).
    #[arg(long, conflicts_with_all = ["points", "s_min", "s_max"])]
    pub s_grid: Option<String>,
    /// Number of evenly spaced levels between --s-min and --s-max.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 0.0)]
    pub s_min: f64,
    #[arg(long, default_value_t = 2.0 * std::f64::consts::SQRT_2)]
    pub s_max: f64,
}

fn load_config(g: &GlobalOpts) -> Result<DEConfig> {
    let mut cfg: DEConfig = match &g.config {
        Some(p) => read_json(p)?,
        None => DEConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(w) = g.workers {
        cfg.worker_count = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sweep_json(r: &SweepResult) -> Result<String> {
    // worker count does not affect results, keep it out of the body
    let mut v = serde_json::to_value(r)?;
    if let Some(c) = v.get_mut("config").and_then(|c| c.as_object_mut()) {
        c.remove("worker_count");
    }
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn sweep(g: &GlobalOpts, a: &SweepArgs) -> Result<ExitCode> {
    let started = Utc::now();
    let cfg = load_config(g)?;
    let grid = match &a.s_grid {
        Some(s) => parse_list(s)?,
        None => linspace(a.s_min, a.s_max, a.points),
    };
    let result = sweep_frontier(a.problem, &grid, &cfg)?;
    let csv = result.to_csv();
    let json_text = sweep_json(&result)?;
    let mut inputs_cfg = serde_json::to_value(&cfg)?;
    if let Some(c) = inputs_cfg.as_object_mut() {
        c.remove("worker_count");
    }
    let inputs = json!({ "problem": a.problem, "s_values": grid, "config": inputs_cfg, "tolerance": g.tolerance });
    match &g.out {
        Some(out) => {
            let json_path = out.with_extension("json");
            finish(g, "sweep", Some(cfg.seed), inputs, started, &csv, &[(json_path, json_text)])?;
        }
        None if g.json => print!("{json_text}"),
        None => print!("{csv}"),
    }
    for p in result.points.iter().filter(|p| p.flag.is_some()) {
        eprintln!("note: s = {}: {}", p.s, p.flag.as_deref().unwrap_or_default());
    }
    let exceeding = result.exceeding(2.0, 2.0 + g.tolerance);
    if !exceeding.is_empty() {
        for p in &exceeding {
            eprintln!("violation: s = {} has best objective {:.16e} > 2 + {}", p.s, p.best_objective, g.tolerance);
        }
        return Ok(ExitCode::from(VIOLATION_EXIT));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn thresholds(g: &GlobalOpts) -> Result<ExitCode> {
    let started = Utc::now();
    let t = bounds::thresholds();
    let body = if g.json { json_body(&t)? } else { t.to_text() };
    finish(g, "thresholds", None, json!({}), started, &body, &[])?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// unbiased_singlet, eq13_hypotheses or free.
    #[arg(long, default_value = "eq13_hypotheses")]
    pub mode: SamplingMode,
    #[arg(long, default_value_t = 1_000_000)]
    pub n: u64,
}

fn summary_text(s: &MonteCarloSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mode                      {:?}", s.mode);
    let _ = writeln!(out, "samples                   {}", s.n);
    let _ = writeln!(out, "seed                      {}", s.seed);
    let _ = writeln!(out, "max |s11| + s22           {:.16e}  (sample {})", s.max_first_plus_second.value, s.max_first_plus_second.index);
    let _ = writeln!(out, "max s12^2 + s21^2         {:.16e}  (sample {})", s.max_cross_squares.value, s.max_cross_squares.index);
    if let Some(w) = &s.worst_cross_residual {
        let _ = writeln!(out, "worst 8 - (s12^2+s21^2)   {:.16e}  over {} samples", w.value, s.cross_checked);
    }
    if let Some(w) = &s.worst_sum_residual {
        let _ = writeln!(out, "worst bound - (|s11|+s22) {:.16e}  over {} samples", w.value, s.sum_checked);
    }
    let _ = writeln!(out, "violations                {}", s.violations);
    let status = match (s.mode, s.passes()) {
        (SamplingMode::Free, _) => "report only",
        (_, true) => "pass",
        (_, false) => "FAIL",
    };
    let _ = writeln!(out, "status                    {status}");
    out
}

pub fn verify_bounds(g: &GlobalOpts, a: &VerifyArgs) -> Result<ExitCode> {
    let started = Utc::now();
    let seed = g.seed.unwrap_or(0);
    let summary = monte_carlo_bounds(a.n, a.mode, seed, g.workers.unwrap_or(1))?;
    let body = if g.json { json_body(&summary)? } else { summary_text(&summary) };
    let inputs = json!({ "mode": a.mode, "n": a.n, "seed": seed });
    finish(g, "verify-bounds", Some(seed), inputs, started, &body, &[])?;
    Ok(if summary.passes() { ExitCode::SUCCESS } else { ExitCode::from(VIOLATION_EXIT) })
}

#[derive(Args, Debug)]
pub struct WindowArgs {
    /// Probability of selecting the projective observable.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// Comma-separated strengths; defaults to an even grid on [0, 1].
    #[arg(long, conflicts_with = "steps")]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
}

fn window_text(w: &BiasedWindow) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "epsilon = {:.16e}", w.epsilon);
    match w.window {
        Some((lo, hi)) => {
            let _ = writeln!(out, "window  = ({lo:.16e}, {hi:.16e})");
        }
        None => {
            let _ = writeln!(out, "window  = empty");
        }
    }
    let _ = writeln!(
        out,
        "{:>23} {:>23} {:>23} {:>23} {:>23} {:>23} {:>23}  all_four",
        "strength", "R", "s11", "s22", "cross_limit", "s12", "s21"
    );
    for r in &w.rows {
        let _ = writeln!(
            out,
            "{:>23.16e} {:>23.16e} {:>23.16e} {:>23.16e} {:>23.16e} {:>23.16e} {:>23.16e}  {}",
            r.strength, r.reversibility, r.s11, r.s22, r.cross_limit, r.s12, r.s21, r.all_violate
        );
    }
    out
}

pub fn biased_window(g: &GlobalOpts, a: &WindowArgs) -> Result<ExitCode> {
    let started = Utc::now();
    let grid = match &a.grid {
        Some(s) => parse_list(s)?,
        None => linspace(0.0, 1.0, a.steps + 1),
    };
    let w = bounds::biased_window(a.epsilon, &grid)?;
    let body = if g.json { json_body(&w)? } else { window_text(&w) };
    let inputs = json!({ "epsilon": a.epsilon, "grid": grid });
    finish(g, "biased-window", None, inputs, started, &body, &[])?;
    Ok(ExitCode::SUCCESS)
}

pub fn oracle_check(g: &GlobalOpts, n: u64) -> Result<ExitCode> {
    let started = Utc::now();
    let seed = g.seed.unwrap_or(0);
    let mut rng = substream(seed, Domain::Oracle, 0, 0);
    let mut worst = 0.0f64;
    for i in 0..n {
        let state = sampling::random_physical_state(&mut rng);
        let obs = sampling::random_observable(&mut rng);
        let side = if i % 2 == 0 { Side::First } else { Side::Second };
        let got = TwoQubitState::from_density_matrix(&channel_oracle(&state.to_density_matrix(), &obs, side))?;
        let want = state.apply_measurement(&obs, side);
        worst = worst
            .max((got.bloch_a() - want.bloch_a()).amax())
            .max((got.bloch_b() - want.bloch_b()).amax())
            .max((got.corr() - want.corr()).amax());
    }
    let pass = worst <= 1e-10;
    let body = if g.json {
        json_body(&json!({ "n": n, "seed": seed, "max_deviation": worst, "pass": pass }))?
    } else {
        format!("cases          {n}\nseed           {seed}\nmax deviation  {worst:.16e}\nstatus         {}\n", if pass { "pass" } else { "FAIL" })
    };
    finish(g, "oracle-check", Some(seed), json!({ "n": n, "seed": seed }), started, &body, &[])?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(VIOLATION_EXIT) })
}
