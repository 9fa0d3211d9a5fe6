//! Derivative-free training of QAOA parameters.
//!
//! The optimizer is Nelder-Mead, using the dimension-adaptive coefficients of
//! Gao and Han for two or more parameters and the classic ones for a single
//! parameter. Parameter vectors are laid out as `[γ_1..γ_P, β_1..β_P]`.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::poly::SpinPoly;
use crate::sim::{evolve_diagonal, sample, SimError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimizeError {
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("objective returned {value} at {params:?}")]
    NonFinite { params: Vec<f64>, value: f64 },
    #[error("nothing to optimize: zero parameters")]
    NoParameters,
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl OptimizeError {
    pub fn is_capacity(&self) -> bool {
        matches!(self, OptimizeError::Sim(e) if e.is_capacity())
    }
}

/// How the training objective is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveMode {
    /// Exact expectation from the statevector.
    #[default]
    Exact,
    /// Mean energy over `shots` measurements.
    Sampled { shots: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    pub mode: ObjectiveMode,
    /// Overall scale of the ramp initialization.
    pub ramp_scale: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            max_iterations: 1000,
            initial_step: 0.1,
            mode: ObjectiveMode::Exact,
            ramp_scale: 1.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        let bad = |m: &str| Err(OptimizeError::InvalidConfig(m.to_string()));
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return bad("tolerance must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad("initial_step must be positive");
        }
        if !self.ramp_scale.is_finite() {
            return bad("ramp_scale must be finite");
        }
        if let ObjectiveMode::Sampled { shots: 0 } = self.mode {
            return bad("sampled mode needs at least one shot");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    IterationCap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingTrace {
    /// Best objective value after each iteration.
    pub values: Vec<f64>,
    pub best_params: Vec<f64>,
    pub best_value: f64,
    /// Objective value at the starting point.
    pub initial_value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    pub wall_clock: Duration,
}

/// Linear annealing ramp: `t_k = k/(P+1)`, `γ_k = s·t_k/P`, `β_k = s·(1-t_k)/P`.
pub fn ramp_init(layers: usize, scale: f64) -> (Vec<f64>, Vec<f64>) {
    let p = layers as f64;
    (1..=layers)
        .map(|k| {
            let t = k as f64 / (p + 1.0);
            (scale * t / p, scale * (1.0 - t) / p)
        })
        .unzip()
}

struct Coefficients {
    reflect: f64,
    expand: f64,
    contract: f64,
    shrink: f64,
}

impl Coefficients {
    fn for_dimension(n: usize) -> Self {
        if n < 2 {
            return Self {
                reflect: 1.0,
                expand: 2.0,
                contract: 0.5,
                shrink: 0.5,
            };
        }
        let n = n as f64;
        Self {
            reflect: 1.0,
            expand: 1.0 + 2.0 / n,
            contract: 0.75 - 0.5 / n,
            shrink: 1.0 - 1.0 / n,
        }
    }
}

struct Evaluator<F> {
    f: F,
    evaluations: usize,
    best: (Vec<f64>, f64),
}

impl<F: FnMut(&[f64]) -> f64> Evaluator<F> {
    fn eval(&mut self, x: &[f64]) -> Result<f64, OptimizeError> {
        let v = (self.f)(x);
        self.evaluations += 1;
        if !v.is_finite() {
            return Err(OptimizeError::NonFinite {
                params: x.to_vec(),
                value: v,
            });
        }
        if v < self.best.1 {
            self.best = (x.to_vec(), v);
        }
        Ok(v)
    }
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b - a)
    a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect()
}

/// Minimizes `f` starting from `x0`.
///
/// One iteration is one Nelder-Mead step. The run has converged once the
/// best value improved by less than `tolerance` over the last `n + 1`
/// iterations, the simplex values span less than `tolerance`, and every
/// vertex lies within `tolerance` (max-norm) of the best one. A simplex whose
/// vertices all share one value carries no descent direction and also counts
/// as settled.
pub fn minimize<F>(f: F, x0: &[f64], config: &OptimizerConfig) -> Result<TrainingTrace, OptimizeError>
where
    F: FnMut(&[f64]) -> f64,
{
    config.validate()?;
    let n = x0.len();
    if n == 0 {
        return Err(OptimizeError::NoParameters);
    }
    let start = Instant::now();
    let co = Coefficients::for_dimension(n);
    let mut ev = Evaluator {
        f,
        evaluations: 0,
        best: (x0.to_vec(), f64::INFINITY),
    };

    let initial_value = ev.eval(x0)?;
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), initial_value)];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += config.initial_step;
        let v = ev.eval(&x)?;
        simplex.push((x, v));
    }

    let mut values = Vec::new();
    let mut history = vec![ev.best.1];
    let mut termination = Termination::IterationCap;
    while values.len() < config.max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let worst = simplex[n].clone();
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }

        let xr = affine(&centroid, &worst.0, -co.reflect);
        let fr = ev.eval(&xr)?;
        let mut shrink = false;
        if fr < simplex[0].1 {
            let xe = affine(&centroid, &worst.0, -co.reflect * co.expand);
            let fe = ev.eval(&xe)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else if fr < worst.1 {
            let xc = affine(&centroid, &xr, co.contract);
            let fc = ev.eval(&xc)?;
            if fc <= fr {
                simplex[n] = (xc, fc);
            } else {
                shrink = true;
            }
        } else {
            let xc = affine(&centroid, &worst.0, co.contract);
            let fc = ev.eval(&xc)?;
            if fc < worst.1 {
                simplex[n] = (xc, fc);
            } else {
                shrink = true;
            }
        }
        if shrink {
            let best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let x = affine(&best, &vertex.0, co.shrink);
                let v = ev.eval(&x)?;
                *vertex = (x, v);
            }
        }

        values.push(ev.best.1);
        history.push(ev.best.1);
        let t = values.len();
        let window = t.min(n + 1);
        let improvement = history[t - window] - history[t];
        let (lo, hi) = simplex
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| (lo.min(*v), hi.max(*v)));
        let size = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let settled = size < config.tolerance || hi == lo;
        if improvement < config.tolerance && hi - lo < config.tolerance && settled {
            termination = Termination::Converged;
            break;
        }
    }

    let (best_params, best_value) = ev.best;
    Ok(TrainingTrace {
        iterations: values.len(),
        values,
        best_params,
        best_value,
        initial_value,
        evaluations: ev.evaluations,
        termination,
        wall_clock: start.elapsed(),
    })
}

/// Seed for evaluation `j` of a sampled-mode run (SplitMix64 finalizer).
pub fn evaluation_seed(master: u64, j: u64) -> u64 {
    let mut z = master ^ j.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Exact QAOA expectation for the parameter vector `[γ.., β..]`.
pub fn qaoa_expectation(energy: &[f64], params: &[f64]) -> Result<f64, SimError> {
    let (g, b) = params.split_at(params.len() / 2);
    evolve_diagonal(energy, g, b)?.expectation(energy)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainedQaoa {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub trace: TrainingTrace,
}

/// Trains a `layers`-deep QAOA on the cost Hamiltonian `h`, starting from
/// the ramp. `seed` drives the shot noise in sampled mode and is otherwise
/// unused.
pub fn train_qaoa(
    h: &SpinPoly,
    layers: usize,
    config: &OptimizerConfig,
    seed: u64,
) -> Result<TrainedQaoa, OptimizeError> {
    config.validate()?;
    if layers == 0 {
        return Err(OptimizeError::InvalidConfig("at least one layer is required".into()));
    }
    let energy = h.energy_table().map_err(SimError::from)?;
    let (g0, b0) = ramp_init(layers, config.ramp_scale);
    let x0: Vec<f64> = g0.into_iter().chain(b0).collect();

    let mut sim_error = None;
    let mut j = 0u64;
    let objective = |x: &[f64]| -> f64 {
        let (g, b) = x.split_at(layers);
        let result = evolve_diagonal(&energy, g, b).and_then(|sv| match config.mode {
            ObjectiveMode::Exact => sv.expectation(&energy),
            ObjectiveMode::Sampled { shots } => {
                let s = sample(&sv, shots, evaluation_seed(seed, j))?;
                Ok(s.mean(&energy))
            }
        });
        j += 1;
        result.unwrap_or_else(|e| {
            sim_error.get_or_insert(e);
            f64::NAN
        })
    };
    let trace = minimize(objective, &x0, config);
    if let Some(e) = sim_error {
        return Err(e.into());
    }
    let trace = trace?;
    let (g, b) = trace.best_params.split_at(layers);
    Ok(TrainedQaoa {
        gammas: g.to_vec(),
        betas: b.to_vec(),
        trace,
    })
}
