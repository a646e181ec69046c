//! Constrained differential evolution (best/1/bin) with feasibility-rule
//! selection and a coordinate-descent polish.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{substream, Domain};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DEConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub recombination: f64,
    pub mutation_range: (f64, f64),
    pub tolerance: f64,
    pub seed: u64,
    pub worker_count: usize,
    pub polish: bool,
}

impl Default for DEConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            max_generations: 200,
            recombination: 0.7,
            mutation_range: (0.5, 0.7),
            tolerance: 1e-5,
            seed: 0,
            worker_count: 1,
            polish: true,
        }
    }
}

impl DEConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 4 {
            return Err(Error::Config(format!("population_size {} < 4", self.population_size)));
        }
        if !(0.0..=1.0).contains(&self.recombination) {
            return Err(Error::Config(format!("recombination {} outside [0, 1]", self.recombination)));
        }
        let (lo, hi) = self.mutation_range;
        if !(0.0 <= lo && lo <= hi && hi <= 2.0) {
            return Err(Error::Config(format!("mutation_range ({lo}, {hi}) not inside [0, 2]")));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::Config(format!("tolerance {} must be non-negative", self.tolerance)));
        }
        if self.worker_count == 0 {
            return Err(Error::Config("worker_count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Objective to maximise plus a constraint that is satisfied when `≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub objective: f64,
    pub constraint: f64,
}

impl Evaluation {
    pub fn unconstrained(objective: f64) -> Self {
        Self { objective, constraint: 0.0 }
    }

    pub fn violation(&self) -> f64 {
        if self.constraint.is_nan() {
            f64::INFINITY
        } else {
            (-self.constraint).max(0.0)
        }
    }

    pub fn feasible(&self) -> bool {
        self.violation() == 0.0
    }

    /// Feasibility rule: feasible beats infeasible, two feasibles compare by
    /// objective, two infeasibles by violation.
    pub fn beats(&self, other: &Self) -> bool {
        match (self.feasible(), other.feasible()) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => self.objective > other.objective || other.objective.is_nan() && !self.objective.is_nan(),
            (false, false) => self.violation() < other.violation(),
        }
    }

    fn at_least(&self, other: &Self) -> bool {
        !other.beats(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub mutation_factor: f64,
    pub best_objective: f64,
    pub best_violation: f64,
    pub feasible_count: usize,
    pub spread: f64,
    pub replacements: usize,
    /// Selections in which a feasible member lost to an infeasible trial.
    pub feasible_replaced_by_infeasible: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub best: Vec<f64>,
    pub evaluation: Evaluation,
    pub generations_used: usize,
    /// `true` when the spread criterion stopped the run, `false` when the
    /// generation budget ran out.
    pub converged: bool,
    pub polish_improved: bool,
    pub trace: Vec<GenerationRecord>,
}

fn index_of_best(evals: &[Evaluation]) -> usize {
    let mut best = 0;
    for (i, e) in evals.iter().enumerate().skip(1) {
        if e.beats(&evals[best]) {
            best = i;
        }
    }
    best
}

/// Standard deviation and mean of the objective over a fully feasible
/// population; `None` otherwise.
fn spread(evals: &[Evaluation]) -> Option<(f64, f64)> {
    if !evals.iter().all(Evaluation::feasible) {
        return None;
    }
    let n = evals.len() as f64;
    let mean = evals.iter().map(|e| e.objective).sum::<f64>() / n;
    let var = evals.iter().map(|e| (e.objective - mean).powi(2)).sum::<f64>() / n;
    Some((var.sqrt(), mean))
}

fn random_point<R: Rng>(rng: &mut R, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    lo.iter().zip(hi).map(|(l, h)| l + rng.random::<f64>() * (h - l)).collect()
}

fn pick_distinct<R: Rng>(rng: &mut R, n: usize, exclude: &[usize]) -> usize {
    loop {
        let k = rng.random_range(0..n);
        if !exclude.contains(&k) {
            return k;
        }
    }
}

/// Maximises `evaluate(x).objective` subject to `evaluate(x).constraint ≥ 0`
/// over the box `[lo, hi]`. Results depend only on `config.seed`; the worker
/// count changes wall time only.
pub fn optimize<F>(
    evaluate: F,
    lo: &[f64],
    hi: &[f64],
    config: &DEConfig,
    initial_population: &[Vec<f64>],
) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> Evaluation + Sync,
{
    config.validate()?;
    let dim = lo.len();
    if hi.len() != dim || dim == 0 || lo.iter().zip(hi).any(|(l, h)| l.is_nan() || h.is_nan() || l > h) {
        return Err(Error::Config("invalid search bounds".into()));
    }
    if let Some(bad) = initial_population.iter().find(|p| p.len() != dim) {
        return Err(Error::Config(format!("initial member of length {} in a {dim}-dimensional search", bad.len())));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_count)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let np = config.population_size;
    let seed = config.seed;

    let mut pop: Vec<Vec<f64>> = (0..np)
        .map(|i| match initial_population.get(i) {
            Some(p) => p.iter().zip(lo.iter().zip(hi)).map(|(x, (l, h))| x.clamp(*l, *h)).collect(),
            None => random_point(&mut substream(seed, Domain::Init, 0, i as u64), lo, hi),
        })
        .collect();
    let eval_all = |xs: &[Vec<f64>]| -> Vec<Evaluation> { pool.install(|| xs.par_iter().map(|x| evaluate(x)).collect()) };
    let mut evals = eval_all(&pop);

    let mut trace = Vec::new();
    let mut converged = false;
    let mut generation = 0;
    while generation < config.max_generations {
        if let Some((sd, mean)) = spread(&evals) {
            if sd <= config.tolerance * mean.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        generation += 1;
        let gen = generation as u64;
        let (flo, fhi) = config.mutation_range;
        let f = flo + substream(seed, Domain::Generation, gen, 0).random::<f64>() * (fhi - flo);
        let best = index_of_best(&evals);

        let trials: Vec<Vec<f64>> = pool.install(|| {
            (0..np)
                .into_par_iter()
                .map(|i| {
                    let mut rng = substream(seed, Domain::Trial, gen, i as u64);
                    let r1 = pick_distinct(&mut rng, np, &[i, best]);
                    let r2 = pick_distinct(&mut rng, np, &[i, best, r1]);
                    let jrand = rng.random_range(0..dim);
                    (0..dim)
                        .map(|j| {
                            if j == jrand || rng.random::<f64>() < config.recombination {
                                let v = pop[best][j] + f * (pop[r1][j] - pop[r2][j]);
                                if v < lo[j] || v > hi[j] {
                                    lo[j] + rng.random::<f64>() * (hi[j] - lo[j])
                                } else {
                                    v
                                }
                            } else {
                                pop[i][j]
                            }
                        })
                        .collect()
                })
                .collect()
        });
        let trial_evals = eval_all(&trials);

        let mut replacements = 0;
        let mut bad = 0;
        for (i, (x, e)) in trials.into_iter().zip(trial_evals).enumerate() {
            if e.at_least(&evals[i]) {
                if evals[i].feasible() && !e.feasible() {
                    bad += 1;
                }
                pop[i] = x;
                evals[i] = e;
                replacements += 1;
            }
        }
        let b = index_of_best(&evals);
        trace.push(GenerationRecord {
            generation,
            mutation_factor: f,
            best_objective: evals[b].objective,
            best_violation: evals[b].violation(),
            feasible_count: evals.iter().filter(|e| e.feasible()).count(),
            spread: spread(&evals).map_or(f64::INFINITY, |(sd, _)| sd),
            replacements,
            feasible_replaced_by_infeasible: bad,
        });
    }
    if !converged {
        if let Some((sd, mean)) = spread(&evals) {
            converged = sd <= config.tolerance * mean.abs().max(1.0);
        }
    }

    let b = index_of_best(&evals);
    let (mut best, mut evaluation) = (pop[b].clone(), evals[b]);
    let mut polish_improved = false;
    if config.polish {
        let (x, e) = polish(&evaluate, best.clone(), evaluation, lo, hi);
        if e.beats(&evaluation) {
            polish_improved = true;
            best = x;
            evaluation = e;
        }
    }
    Ok(OptimizeResult {
        best,
        evaluation,
        generations_used: generation,
        converged,
        polish_improved,
        trace,
    })
}

/// Derivative-free coordinate descent with steps shrinking from 1e-2 to 1e-8
/// of each coordinate's range.
pub fn polish<F>(evaluate: &F, mut x: Vec<f64>, mut e: Evaluation, lo: &[f64], hi: &[f64]) -> (Vec<f64>, Evaluation)
where
    F: Fn(&[f64]) -> Evaluation,
{
    for k in 2..=8 {
        let step = 10f64.powi(-k);
        for _ in 0..200 {
            let mut improved = false;
            for j in 0..x.len() {
                for sign in [1.0, -1.0] {
                    let mut y = x.clone();
                    y[j] = (x[j] + sign * step * (hi[j] - lo[j])).clamp(lo[j], hi[j]);
                    if y[j] == x[j] {
                        continue;
                    }
                    let ey = evaluate(&y);
                    if ey.beats(&e) {
                        x = y;
                        e = ey;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    (x, e)
}
