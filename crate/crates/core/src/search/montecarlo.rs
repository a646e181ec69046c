//! Seeded random sampling of scenarios to stress the monogamy relations.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{substream, Domain};
use crate::bounds::{eq13_residual_unchecked, eq14_bound, eq14_value, hypothesis_flags};
use crate::error::{Error, Result};
use crate::metrics::{proxy_12, proxy_21, Scenario};
use crate::observable::Observable;
use crate::sampling;
use crate::state::{MeasurementPolicy, TwoQubitState};

const CHUNK: u64 = 4096;
pub const VIOLATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Singlet, four unbiased observables of independent strengths.
    UnbiasedSinglet,
    /// Scenarios inside the hypotheses of the squared cross-pair relation.
    Eq13Hypotheses,
    /// Anything at equal selection probabilities; nothing is asserted.
    Free,
}

impl std::str::FromStr for SamplingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unbiased_singlet" => Ok(Self::UnbiasedSinglet),
            "eq13_hypotheses" => Ok(Self::Eq13Hypotheses),
            "free" => Ok(Self::Free),
            other => Err(Error::Config(format!(
                "unknown mode {other:?} (expected unbiased_singlet, eq13_hypotheses or free)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub value: f64,
    pub index: u64,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub mode: SamplingMode,
    pub n: u64,
    pub seed: u64,
    /// Largest `|S(A₁,B₁)| + S*(A₂,B₂)`.
    pub max_first_plus_second: Extremum,
    /// Largest `S*(A₁,B₂)² + S*(A₂,B₁)²`.
    pub max_cross_squares: Extremum,
    /// Smallest `8 − (s12² + s21²)` among samples inside its hypotheses.
    pub worst_cross_residual: Option<Extremum>,
    /// Smallest `bound − (|s11| + s22)` among samples with a known bound
    /// (4 for unbiased observables, tighter with equal strengths and
    /// orthogonal directions).
    pub worst_sum_residual: Option<Extremum>,
    pub cross_checked: u64,
    pub sum_checked: u64,
    /// Checked samples whose residual is below `−1e-9`.
    pub violations: u64,
}

impl MonteCarloSummary {
    /// Free mode only reports; the other modes pass when nothing violated.
    pub fn passes(&self) -> bool {
        self.mode == SamplingMode::Free || self.violations == 0
    }
}

fn unbiased(rng: &mut ChaCha8Rng, strength: f64) -> Observable {
    Observable::unbiased(strength, sampling::random_unit_vector(rng)).expect("strength in [0, 1]")
}

fn sample_unbiased_singlet(rng: &mut ChaCha8Rng) -> Scenario {
    let s: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..=1.0));
    let obs: [Observable; 4] = std::array::from_fn(|k| unbiased(rng, s[k]));
    Scenario::new(
        TwoQubitState::singlet(),
        MeasurementPolicy::unbiased_selection(obs[0], obs[1]),
        MeasurementPolicy::unbiased_selection(obs[2], obs[3]),
    )
}

/// Pair of observables obeying the measurement hypothesis: equal strengths
/// when `equal`, orthogonal directions otherwise.
fn hypothesis_pair(rng: &mut ChaCha8Rng, equal: bool, biased: bool) -> MeasurementPolicy {
    let x = sampling::random_unit_vector(rng);
    let x2 = if equal { sampling::random_unit_vector(rng) } else { sampling::random_orthogonal(rng, &x) };
    let make = |rng: &mut ChaCha8Rng, s: f64, d| {
        let b = if biased { rng.random_range(-(1.0 - s)..=(1.0 - s)) } else { 0.0 };
        Observable::new(b, s, d).expect("|B| + S ≤ 1 by construction")
    };
    let s1 = rng.random_range(0.0..=1.0);
    let s2 = if equal { s1 } else { rng.random_range(0.0..=1.0) };
    let o1 = make(rng, s1, x);
    let o2 = make(rng, s2, x2);
    MeasurementPolicy::unbiased_selection(o1, o2)
}

fn sample_eq13(rng: &mut ChaCha8Rng, index: u64) -> Scenario {
    // cycle through the four hypothesis combinations
    let equal = index.is_multiple_of(2);
    let zero_bloch = (index / 2) % 2 == 1;
    let state = if zero_bloch {
        sampling::random_zero_bloch_state(rng)
    } else if rng.random::<bool>() {
        sampling::random_pure_state(rng)
    } else {
        sampling::random_physical_state(rng)
    };
    let pa = hypothesis_pair(rng, equal, zero_bloch);
    let pb = hypothesis_pair(rng, equal, zero_bloch);
    Scenario::new(state, pa, pb)
}

fn sample_free(rng: &mut ChaCha8Rng) -> Scenario {
    let state = sampling::random_physical_state(rng);
    Scenario::new(state, sampling::random_policy(rng, 0.5), sampling::random_policy(rng, 0.5))
}

pub fn sample(mode: SamplingMode, rng: &mut ChaCha8Rng, index: u64) -> Scenario {
    match mode {
        SamplingMode::UnbiasedSinglet => sample_unbiased_singlet(rng),
        SamplingMode::Eq13Hypotheses => sample_eq13(rng, index),
        SamplingMode::Free => sample_free(rng),
    }
}

#[derive(Debug, Clone, Default)]
struct Partial {
    max_sum: Option<Extremum>,
    max_cross: Option<Extremum>,
    worst_cross: Option<Extremum>,
    worst_sum: Option<Extremum>,
    cross_checked: u64,
    sum_checked: u64,
    violations: u64,
}

fn keep(slot: &mut Option<Extremum>, cand: Extremum, larger: bool) {
    let better = match slot {
        None => true,
        Some(cur) => {
            if larger {
                cand.value > cur.value
            } else {
                cand.value < cur.value
            }
        }
    };
    if better {
        *slot = Some(cand);
    }
}

impl Partial {
    fn merge(mut self, other: Partial) -> Partial {
        for (slot, cand, larger) in [
            (&mut self.max_sum, other.max_sum, true),
            (&mut self.max_cross, other.max_cross, true),
            (&mut self.worst_cross, other.worst_cross, false),
            (&mut self.worst_sum, other.worst_sum, false),
        ] {
            if let Some(c) = cand {
                keep(slot, c, larger);
            }
        }
        self.cross_checked += other.cross_checked;
        self.sum_checked += other.sum_checked;
        self.violations += other.violations;
        self
    }
}

fn sum_bound(mode: SamplingMode, sc: &Scenario) -> Option<f64> {
    match mode {
        SamplingMode::UnbiasedSinglet => Some(eq14_bound(sc).unwrap_or(4.0)),
        SamplingMode::Eq13Hypotheses => eq14_bound(sc).ok(),
        SamplingMode::Free => None,
    }
}

fn run_chunk(mode: SamplingMode, seed: u64, chunk: u64, n: u64) -> Partial {
    let mut rng = substream(seed, Domain::MonteCarlo, chunk, 0);
    let mut part = Partial::default();
    let start = chunk * CHUNK;
    let end = (start + CHUNK).min(n);
    for index in start..end {
        let sc = sample(mode, &mut rng, index);
        let ext = |value| Extremum { value, index, scenario: sc };
        let sum = eq14_value(&sc);
        let cross = proxy_12(&sc).powi(2) + proxy_21(&sc).powi(2);
        keep(&mut part.max_sum, ext(sum), true);
        keep(&mut part.max_cross, ext(cross), true);
        let flags = hypothesis_flags(&sc);
        let eq13_applies = mode != SamplingMode::Free
            && flags.equal_selection
            && (flags.equal_strengths || flags.orthogonal)
            && (flags.unbiased || flags.zero_bloch);
        if eq13_applies {
            let r = eq13_residual_unchecked(&sc);
            part.cross_checked += 1;
            part.violations += (r < -VIOLATION_TOL) as u64;
            keep(&mut part.worst_cross, ext(r), false);
        }
        if let Some(bound) = sum_bound(mode, &sc) {
            let r = bound - sum;
            part.sum_checked += 1;
            part.violations += (r < -VIOLATION_TOL) as u64;
            keep(&mut part.worst_sum, ext(r), false);
        }
    }
    part
}

/// Samples `n` scenarios in fixed-size chunks, each with its own random
/// substream, and merges the chunk results in order.
pub fn monte_carlo_bounds(n: u64, mode: SamplingMode, seed: u64, worker_count: usize) -> Result<MonteCarloSummary> {
    if n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Partial> = pool.install(|| (0..chunks).into_par_iter().map(|c| run_chunk(mode, seed, c, n)).collect());
    let total = parts.into_iter().fold(Partial::default(), Partial::merge);
    Ok(MonteCarloSummary {
        mode,
        n,
        seed,
        max_first_plus_second: total.max_sum.expect("n ≥ 1"),
        max_cross_squares: total.max_cross.expect("n ≥ 1"),
        worst_cross_residual: total.worst_cross,
        worst_sum_residual: total.worst_sum,
        cross_checked: total.cross_checked,
        sum_checked: total.sum_checked,
        violations: total.violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::check_eq13_hypotheses;

    #[test]
    fn eq13_samples_meet_hypotheses() {
        let mut rng = substream(1, Domain::MonteCarlo, 0, 0);
        for i in 0..2000 {
            let sc = sample(SamplingMode::Eq13Hypotheses, &mut rng, i);
            assert!(check_eq13_hypotheses(&sc).is_ok(), "{i}");
            assert!(sc.state.is_physical(1e-9));
        }
    }

    #[test]
    fn unbiased_singlet_samples() {
        let mut rng = substream(2, Domain::MonteCarlo, 0, 0);
        for i in 0..500 {
            let sc = sample(SamplingMode::UnbiasedSinglet, &mut rng, i);
            assert!(hypothesis_flags(&sc).unbiased);
            assert_eq!(sc.state, TwoQubitState::singlet());
        }
    }

    #[test]
    fn small_runs_pass_and_are_deterministic() {
        for mode in [SamplingMode::UnbiasedSinglet, SamplingMode::Eq13Hypotheses, SamplingMode::Free] {
            let a = monte_carlo_bounds(10_000, mode, 17, 1).unwrap();
            let b = monte_carlo_bounds(10_000, mode, 17, 3).unwrap();
            assert_eq!(a, b);
            assert!(a.passes());
            assert_eq!(a.n, 10_000);
        }
        let s = monte_carlo_bounds(10_000, SamplingMode::Eq13Hypotheses, 17, 2).unwrap();
        assert_eq!(s.cross_checked, 10_000);
        assert!(s.max_cross_squares.value <= 8.0 + 1e-9);
        let f = monte_carlo_bounds(100, SamplingMode::Free, 1, 1).unwrap();
        assert_eq!(f.cross_checked + f.sum_checked, 0);
        assert!(monte_carlo_bounds(0, SamplingMode::Free, 1, 1).is_err());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("free".parse::<SamplingMode>().unwrap(), SamplingMode::Free);
        assert!("nope".parse::<SamplingMode>().is_err());
    }
}
