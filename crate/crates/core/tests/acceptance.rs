//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits nonzero if any criterion fails.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use bellshare::bounds::{biased_window, eq14_value, thresholds};
use bellshare::metrics::Scenario;
use bellshare::observable::tradeoff_residual;
use bellshare::sampling;
use bellshare::search::{monte_carlo_bounds, sweep_frontier, DEConfig, MonteCarloSummary, Problem, SamplingMode, SweepResult};
use bellshare::state::channel_oracle;
use bellshare::{MeasurementPolicy, Observable, Side, TwoQubitState};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, ok: bool, detail: String) -> bool {
    println!("[{}] C{id} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn within(start: Instant, limit: Duration) -> (bool, f64) {
    let t = start.elapsed();
    (t <= limit, t.as_secs_f64())
}

fn c1_tradeoff_identity() -> bool {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let (mut worst_residual, mut worst_sum) = (0.0f64, f64::NEG_INFINITY);
    for _ in 0..1_000_000 {
        let o = sampling::random_observable(&mut rng);
        let r = tradeoff_residual(o.bias(), o.strength(), o.reversibility()).unwrap();
        worst_residual = worst_residual.max(r.abs());
        worst_sum = worst_sum.max(o.reversibility().powi(2) + o.strength().powi(2));
    }
    let (fast, secs) = within(start, Duration::from_secs(10));
    let ok = worst_residual < 1e-12 && worst_sum <= 1.0 + 1e-12 && fast;
    report(1, "tradeoff identity", ok, format!("max |residual| = {worst_residual:.3e}, max R²+S² = {worst_sum:.15}, {secs:.2} s"))
}

fn c2_channel_map_equivalence() -> bool {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let state = sampling::random_physical_state(&mut rng);
        let obs = sampling::random_observable(&mut rng);
        let side = if rng.random::<bool>() { Side::First } else { Side::Second };
        let rho = channel_oracle(&state.to_density_matrix(), &obs, side);
        let got = TwoQubitState::from_density_matrix(&rho).unwrap();
        let want = state.apply_measurement(&obs, side);
        worst = worst
            .max((got.bloch_a() - want.bloch_a()).amax())
            .max((got.bloch_b() - want.bloch_b()).amax())
            .max((got.corr() - want.corr()).amax());
    }
    let (fast, secs) = within(start, Duration::from_secs(30));
    report(2, "channel-map equivalence", worst < 1e-10 && fast, format!("max entry deviation = {worst:.3e}, {secs:.2} s"))
}

fn c3_threshold_constants() -> bool {
    let start = Instant::now();
    let t = thresholds();
    let rows = [
        ("s_min", t.s_min, 0.6818, 8f64.powf(0.25) - 1.0),
        ("s_max", t.s_max, 0.7654, (2.0 - SQRT_2).sqrt()),
        ("r_minus_0", t.r_minus_0, 0.64359, (SQRT_2 - 1.0).sqrt()),
        ("r_plus", t.r_plus, 0.7315, 2f64.powf(0.75) * (2f64.powf(0.25) - 1.0).sqrt()),
        ("eps_max", t.eps_max, 0.0794626, 0.079_462_561_265_959_47),
        ("eps_limit", t.eps_limit, 0.356406, 1.0 - (SQRT_2 - 1.0).sqrt()),
        ("r_0", t.r_0, 0.5176, (2.0 - 3f64.sqrt()).sqrt()),
        ("s_0", t.s_0, 0.8556, (3f64.sqrt() - 1.0).sqrt()),
    ];
    let mut ok = true;
    let mut worst_quoted = 0.0f64;
    let mut worst_closed = 0.0f64;
    for (name, got, quoted, closed) in rows {
        let (dq, dc) = ((got - quoted).abs(), (got - closed).abs());
        worst_quoted = worst_quoted.max(dq);
        worst_closed = worst_closed.max(dc);
        if dq > 1e-4 || dc > 1e-12 {
            println!("    {name}: {got} (quoted {quoted}, closed form {closed})");
            ok = false;
        }
    }
    let (fast, secs) = within(start, Duration::from_secs(1));
    report(3, "threshold constants", ok && fast, format!("max |Δ quoted| = {worst_quoted:.2e}, max |Δ closed| = {worst_closed:.2e}, {secs:.3} s"))
}

fn c4_biased_window() -> bool {
    let start = Instant::now();
    let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
    let w = biased_window(0.0, &grid).unwrap();
    let (lo, hi) = w.window.expect("window at ε = 0 is nonempty");
    let want = (8f64.powf(0.25) - 1.0, (2.0 - SQRT_2).sqrt());
    let endpoints_ok = (lo - want.0).abs() < 1e-8 && (hi - want.1).abs() < 1e-8;
    let inside: Vec<_> = w.rows.iter().filter(|r| r.strength > lo && r.strength < hi).collect();
    let cross_ok = !inside.is_empty()
        && inside.iter().all(|r| r.cross_limit > 2.0 && r.s12 > 2.0 && r.s21 > 2.0 && r.all_violate);
    let min_cross = inside.iter().map(|r| r.cross_limit).fold(f64::INFINITY, f64::min);
    let (fast, secs) = within(start, Duration::from_secs(5));
    report(
        4,
        "biased window",
        endpoints_ok && cross_ok && fast,
        format!("window ({lo:.12}, {hi:.12}), {} grid points inside, min cross value {min_cross:.6}, {secs:.3} s", inside.len()),
    )
}

const MC_SEED: u64 = 1005;

fn mc_runs(workers: usize) -> (MonteCarloSummary, MonteCarloSummary) {
    let a = monte_carlo_bounds(1_000_000, SamplingMode::Eq13Hypotheses, MC_SEED, workers).unwrap();
    let b = monte_carlo_bounds(1_000_000, SamplingMode::UnbiasedSinglet, MC_SEED, workers).unwrap();
    (a, b)
}

fn mc_baseline() -> &'static (MonteCarloSummary, MonteCarloSummary, f64) {
    static CELL: OnceLock<(MonteCarloSummary, MonteCarloSummary, f64)> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let (a, b) = mc_runs(1);
        (a, b, start.elapsed().as_secs_f64())
    })
}

fn c5_monogamy_sampling() -> bool {
    let (eq13, singlet, secs) = mc_baseline();
    let cross = eq13.max_cross_squares.value;
    let sum = singlet.max_first_plus_second.value;
    let ok = cross <= 8.0 + 1e-9 && sum <= 4.0 + 1e-9 && eq13.passes() && singlet.passes() && *secs < 300.0;
    report(
        5,
        "monogamy bound sampling",
        ok,
        format!("max s12²+s21² = {cross:.12}, max |s11|+s22 = {sum:.12} over 10⁶ samples each, {secs:.1} s"),
    )
}

fn c6_saturating_scenario() -> bool {
    let start = Instant::now();
    let s = 2.0 * SQRT_2 / 3.0;
    let x = Vector3::x();
    let xp = Vector3::y();
    let y = (x + xp) * FRAC_1_SQRT_2;
    let yp = (x - xp) * FRAC_1_SQRT_2;
    let u = |d| Observable::unbiased(s, d).unwrap();
    let sc = Scenario::new(
        TwoQubitState::singlet(),
        MeasurementPolicy::unbiased_selection(u(x), u(xp)),
        MeasurementPolicy::unbiased_selection(u(y), u(yp)),
    );
    let value = eq14_value(&sc);
    let target = 16.0 / (3.0 * SQRT_2);
    let (fast, secs) = within(start, Duration::from_secs(1));
    report(6, "saturating scenario", (value - target).abs() < 1e-10 && fast, format!("|s11|+s22 = {value:.15} vs {target:.15}, {secs:.4} s"))
}

fn sweep_config(workers: usize) -> DEConfig {
    DEConfig {
        population_size: 100,
        max_generations: 200,
        seed: 1007,
        worker_count: workers,
        ..DEConfig::default()
    }
}

const PASSON_GRID: [f64; 6] = [0.0, 2.0, 2.2, 2.4, 2.6, 2.8];
const CROSSED_GRID: [f64; 5] = [2.0, 2.2, 2.4, 2.6, 2.8];

fn sweeps(workers: usize) -> (SweepResult, SweepResult) {
    let cfg = sweep_config(workers);
    (
        sweep_frontier(Problem::Passon, &PASSON_GRID, &cfg).unwrap(),
        sweep_frontier(Problem::Crossed, &CROSSED_GRID, &cfg).unwrap(),
    )
}

fn sweep_baseline() -> &'static (SweepResult, SweepResult, f64) {
    static CELL: OnceLock<(SweepResult, SweepResult, f64)> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let (p, c) = sweeps(1);
        (p, c, start.elapsed().as_secs_f64())
    })
}

fn c7_frontier() -> bool {
    let (passon, crossed, secs) = sweep_baseline();
    let mut ok = *secs < 1800.0;
    let mut lines = Vec::new();
    for p in &passon.points {
        let good = if p.s == 0.0 {
            p.best_objective >= 2.0 * SQRT_2 - 1e-3
        } else {
            p.best_objective <= 2.0 + 1e-3
        };
        ok &= good;
        lines.push(format!("passon s={:.1}: {:.6}{}", p.s, p.best_objective, if good { "" } else { " (!)" }));
    }
    for p in &crossed.points {
        let good = p.best_objective <= 2.0 + 1e-3;
        ok &= good;
        lines.push(format!("crossed s={:.1}: {:.6}{}", p.s, p.best_objective, if good { "" } else { " (!)" }));
    }
    for l in &lines {
        println!("    {l}");
    }
    report(7, "frontier sweeps", ok, format!("{}; {secs:.1} s", lines.join(", ")))
}

fn c8_trivial_observables() -> bool {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..=40 {
        let b = -1.0 + i as f64 / 20.0;
        let t = Observable::trivial(b).unwrap();
        let pol = MeasurementPolicy::unbiased_selection(t, t);
        let r = Scenario::new(TwoQubitState::singlet(), pol, pol).report();
        worst = worst.max((r.s11 - 2.0 * b * b).abs()).max((r.s22 - 2.0 * SQRT_2).abs());
    }
    let (fast, secs) = within(start, Duration::from_secs(1));
    report(8, "trivial-observable anchor", worst < 1e-12 && fast, format!("max deviation = {worst:.2e} over 41 biases, {secs:.4} s"))
}

fn c9_determinism() -> bool {
    let (eq13, singlet, _) = mc_baseline();
    let (eq13_b, singlet_b) = mc_runs(4);
    let json = |v: &MonteCarloSummary| serde_json::to_string(v).unwrap();
    let mc_same = json(eq13) == json(&eq13_b) && json(singlet) == json(&singlet_b);

    let (passon, crossed, _) = sweep_baseline();
    let (passon_b, crossed_b) = sweeps(4);
    let strip = |r: &SweepResult| {
        let mut r = r.clone();
        r.config.worker_count = 0;
        (r.to_csv(), serde_json::to_string(&r).unwrap())
    };
    let sweep_same = strip(passon) == strip(&passon_b) && strip(crossed) == strip(&crossed_b);
    report(9, "determinism across worker counts", mc_same && sweep_same, format!("Monte Carlo identical: {mc_same}, sweeps identical: {sweep_same} (1 vs 4 workers)"))
}

fn main() {
    let criteria: [fn() -> bool; 9] = [
        c1_tradeoff_identity,
        c2_channel_map_equivalence,
        c3_threshold_constants,
        c4_biased_window,
        c5_monogamy_sampling,
        c6_saturating_scenario,
        c7_frontier,
        c8_trivial_observables,
        c9_determinism,
    ];
    let failed = criteria.iter().filter(|c| !c()).count();
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
