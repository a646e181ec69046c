//! Frontier sweeps: maximise a downstream proxy subject to a lower bound on
//! an upstream CHSH quantity, one constraint level at a time.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::de::{optimize, DEConfig, Evaluation};
use super::encoding::{lower_bounds, observable_param_names, upper_bounds, ParameterVector, DIM};
use super::rng::{substream, Domain};
use crate::error::{Error, Result};
use crate::metrics::{proxy_12, proxy_21, proxy_22};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    /// Maximise `S*(A₂,B₂)` subject to `|S(A₁,B₁)| ≥ s`.
    Passon,
    /// Maximise `S*(A₂,B₁)` subject to `S*(A₁,B₂) ≥ s`.
    Crossed,
}

impl std::str::FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "passon" => Ok(Self::Passon),
            "crossed" => Ok(Self::Crossed),
            other => Err(Error::Config(format!("unknown problem {other:?} (expected passon or crossed)"))),
        }
    }
}

impl Problem {
    pub fn evaluate(self, p: &ParameterVector, s: f64) -> Evaluation {
        let (sc, _) = p.decode();
        match self {
            Problem::Passon => Evaluation {
                objective: proxy_22(&sc),
                constraint: sc.chsh_first_pair().abs() - s,
            },
            Problem::Crossed => Evaluation {
                objective: proxy_21(&sc),
                constraint: proxy_12(&sc) - s,
            },
        }
    }

    /// Hand-built members with a large constraint value.
    pub fn anchors(self) -> Vec<ParameterVector> {
        // cos α|00⟩ + sin α|11⟩ at α = π/4 with CHSH-optimal directions
        let mut chsh = [0.0; DIM];
        let dirs = [(0.0, 0.0), (FRAC_PI_2, 0.0), (FRAC_PI_4, 0.0), (FRAC_PI_4, PI)];
        for (k, (theta, phi)) in dirs.iter().enumerate() {
            chsh[4 * k] = 1.0;
            chsh[4 * k + 2] = *theta;
            chsh[4 * k + 3] = *phi;
        }
        chsh[16] = FRAC_PI_4;
        match self {
            Problem::Passon => {
                let mut trivial = chsh;
                for k in 0..4 {
                    trivial[4 * k] = 0.0;
                    trivial[4 * k + 1] = 1.0;
                }
                vec![ParameterVector(chsh), ParameterVector(trivial)]
            }
            Problem::Crossed => {
                let mut cross = chsh;
                for k in 2..4 {
                    cross[4 * k] = 0.0;
                    cross[4 * k + 1] = 0.0;
                }
                vec![ParameterVector(cross)]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub s: f64,
    pub best_objective: f64,
    pub best_vector: ParameterVector,
    pub feasible: bool,
    pub generations_used: usize,
    pub converged: bool,
    /// Set when the point breaks the expected monotone decrease of the
    /// frontier or no feasible member was found.
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub problem: Problem,
    pub config: DEConfig,
    pub points: Vec<SweepPoint>,
}

pub const CSV_HEADER_PREFIX: &str = "s,best_objective,feasible,generations,alpha";

impl SweepResult {
    pub fn csv_header() -> String {
        format!("{CSV_HEADER_PREFIX},{},converged,flag", observable_param_names().join(","))
    }

    pub fn to_csv(&self) -> String {
        let mut out = Self::csv_header();
        out.push('\n');
        for p in &self.points {
            let _ = write!(
                out,
                "{:.16e},{:.16e},{},{},{:.16e}",
                p.s,
                p.best_objective,
                p.feasible,
                p.generations_used,
                p.best_vector.alpha()
            );
            for x in &p.best_vector.0[..16] {
                let _ = write!(out, ",{x:.16e}");
            }
            let _ = writeln!(out, ",{},{}", p.converged, p.flag.as_deref().unwrap_or(""));
        }
        out
    }

    /// Points with `s ≥ threshold` whose best objective exceeds `limit`.
    pub fn exceeding(&self, threshold: f64, limit: f64) -> Vec<&SweepPoint> {
        self.points
            .iter()
            .filter(|p| p.s >= threshold && p.feasible && p.best_objective > limit)
            .collect()
    }
}

fn perturb<R: Rng>(rng: &mut R, p: &ParameterVector, scale: f64) -> ParameterVector {
    let (lo, hi) = (lower_bounds(), upper_bounds());
    let mut out = p.0;
    for i in 0..DIM {
        let delta = (rng.random::<f64>() - 0.5) * 2.0 * scale * (hi[i] - lo[i]);
        out[i] = (out[i] + delta).clamp(lo[i], hi[i]);
    }
    ParameterVector(out)
}

/// Up to half a population of members satisfying the constraint at `s`,
/// drawn around the warm start and the anchors.
pub fn seed_population(problem: Problem, s: f64, warm: Option<&ParameterVector>, config: &DEConfig, point: u64) -> Vec<Vec<f64>> {
    let target = config.population_size / 2;
    let mut centres: Vec<ParameterVector> = warm.into_iter().copied().collect();
    centres.extend(problem.anchors());
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(target);
    for c in &centres {
        if out.len() < target && problem.evaluate(c, s).feasible() {
            out.push(c.0.to_vec());
        }
    }
    let mut rng = substream(config.seed, Domain::Seeding, point, 0);
    let (lo, hi) = (lower_bounds(), upper_bounds());
    let attempts = 50 * config.population_size;
    for attempt in 0..attempts {
        if out.len() >= target {
            break;
        }
        let candidate = if attempt % 4 == 3 {
            ParameterVector(std::array::from_fn(|i| lo[i] + rng.random::<f64>() * (hi[i] - lo[i])))
        } else {
            let c = &centres[attempt % centres.len()];
            let scale = [0.01, 0.05, 0.2][rng.random_range(0..3)];
            perturb(&mut rng, c, scale)
        };
        if problem.evaluate(&candidate, s).feasible() {
            out.push(candidate.0.to_vec());
        }
    }
    out
}

/// Runs one optimisation per constraint level, warm-starting each from the
/// previous point's best vector.
pub fn sweep_frontier(problem: Problem, s_values: &[f64], config: &DEConfig) -> Result<SweepResult> {
    config.validate()?;
    if let Some(bad) = s_values.iter().find(|s| !s.is_finite() || **s < 0.0) {
        return Err(Error::Config(format!("constraint level {bad} must be finite and non-negative")));
    }
    if s_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("constraint levels must be strictly increasing".into()));
    }
    let (lo, hi) = (lower_bounds(), upper_bounds());
    let mut points: Vec<SweepPoint> = Vec::with_capacity(s_values.len());
    let mut warm: Option<ParameterVector> = None;
    let mut last_feasible: Option<f64> = None;
    for (k, &s) in s_values.iter().enumerate() {
        let point_cfg = DEConfig {
            seed: config.seed.wrapping_add(k as u64),
            ..config.clone()
        };
        let init = seed_population(problem, s, warm.as_ref(), config, k as u64);
        let eval = |x: &[f64]| {
            let p = ParameterVector(x.try_into().expect("search dimension is 17"));
            problem.evaluate(&p, s)
        };
        let r = optimize(eval, &lo, &hi, &point_cfg, &init)?;
        let best_vector = ParameterVector(r.best.as_slice().try_into().expect("search dimension is 17"));
        let feasible = r.evaluation.feasible();
        let mut flag = None;
        if !feasible {
            flag = Some(format!("infeasible (violation {:.3e})", r.evaluation.violation()));
        } else if let Some(prev) = last_feasible {
            if r.evaluation.objective > prev + 1e-9 {
                flag = Some(format!("non-monotone: {:.6} above previous {:.6}", r.evaluation.objective, prev));
            }
        }
        if feasible {
            last_feasible = Some(r.evaluation.objective);
            warm = Some(best_vector);
        }
        points.push(SweepPoint {
            s,
            best_objective: r.evaluation.objective,
            best_vector,
            feasible,
            generations_used: r.generations_used,
            converged: r.converged,
            flag,
        });
    }
    Ok(SweepResult {
        problem,
        config: config.clone(),
        points,
    })
}
