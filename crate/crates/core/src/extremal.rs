//! Search for Lipschitz functions with large moments `(E‖f − Ef‖ᵖ)^{1/p}`.
//!
//! The constraint `sup_x G(f)(x) ≤ 1` is 2-homogeneous in `f`, so dividing by
//! `√sup G` is an exact projection onto its boundary. The search ascends the
//! projected objective `f ↦ J(f / √sup G(f))` with central finite differences
//! and backtracking; results are lower-bound witnesses, not optima.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{CubeFunction, FunctionFile};
use crate::error::{Error, Result};
pub use crate::functionals::lipschitz_normalize;
use crate::functionals::{sup_gradient_sq, DeltaStrategy, GradientMode, NormProfile};
use crate::spaces::SpaceDescriptor;
use crate::verify::mix_seed;

/// Finite-difference step for objective gradients.
pub const FD_STEP: f64 = 1e-4;
/// Largest residual `sup G − 1` a witness may carry.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Enumeration budget: cube size and number of free coordinates.
pub const MAX_SEARCH_N: usize = 10;
pub const MAX_SEARCH_COORDS: usize = 4096;
const PERTURBATION: f64 = 0.3;
const TRACE_EVERY: usize = 100;

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub n: usize,
    pub space: SpaceDescriptor,
    pub p: f64,
    pub mode: GradientMode,
    pub iterations: usize,
    pub restarts: usize,
    pub step: f64,
    pub seed: u64,
    pub mean_zero: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n: 4,
            space: SpaceDescriptor::scalar(),
            p: 8.0,
            mode: GradientMode::P(DeltaStrategy::Exact),
            iterations: 1000,
            restarts: 4,
            step: 0.05,
            seed: 0,
            mean_zero: true,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.restarts == 0 {
            return Err(Error::Config("iterations and restarts must be >= 1".into()));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!("step must be positive, got {}", self.step)));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidExponent(self.p));
        }
        if self.n == 0 {
            return Err(Error::Config("the cube needs n >= 1".into()));
        }
        let coords = (1usize << self.n.min(30)) * self.space.ambient_dim();
        if self.n > MAX_SEARCH_N || coords > MAX_SEARCH_COORDS {
            return Err(Error::BudgetExceeded(format!(
                "n = {} with {} free coordinates (caps: n <= {MAX_SEARCH_N}, {MAX_SEARCH_COORDS} coordinates)",
                self.n, coords
            )));
        }
        if !self.mode.is_exact_in(&self.space) {
            return Err(Error::Config(format!(
                "constraint mode `{}` is not exact in {}",
                self.mode.label(),
                self.space
            )));
        }
        Ok(())
    }
}

/// Per-restart log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartLog {
    pub restart: usize,
    pub start: f64,
    pub best: f64,
    pub accepted_steps: usize,
    /// Incumbent value every 100 iterations and at the end.
    pub trace: Vec<f64>,
}

/// A feasible function certifying a lower bound on the extremal moment.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub function: CubeFunction,
    pub space: SpaceDescriptor,
    pub p: f64,
    pub achieved: f64,
    pub constraint_residual: f64,
    /// Best value per restart.
    pub history: Vec<f64>,
    pub restarts: Vec<RestartLog>,
}

/// On-disk witness: the function file plus the search outcome.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessFile {
    #[serde(flatten)]
    pub function: FunctionFile,
    pub achieved: f64,
    pub p: f64,
    pub residual: f64,
    pub history: Vec<f64>,
    #[serde(default)]
    pub restarts: Vec<RestartLog>,
}

impl Witness {
    pub fn to_file(&self) -> WitnessFile {
        WitnessFile {
            function: FunctionFile::from_function(&self.function, Some(self.space)),
            achieved: self.achieved,
            p: self.p,
            residual: self.constraint_residual,
            history: self.history.clone(),
            restarts: self.restarts.clone(),
        }
    }

    /// Recomputes `(E‖f − Ef‖ᵖ)^{1/p}` from the stored function.
    pub fn recompute_achieved(&self) -> Result<f64> {
        NormProfile::new(&self.function, &self.space, true)?.moment_root(self.p)
    }
}

/// `J(f) = (E‖f − Ef‖ᵖ)^{1/p}` of the normalized `f`; 0 for constant `f`.
fn projected_value(f: &CubeFunction, space: &SpaceDescriptor, mode: GradientMode, p: f64) -> Result<f64> {
    let sup = sup_gradient_sq(f, space, mode)?;
    if sup == 0.0 {
        return Ok(0.0);
    }
    Ok(NormProfile::new(f, space, true)?.moment_root(p)? / sup.sqrt())
}

/// `Σ x_i / √n` placed in the first coordinate of `space`.
pub fn baseline_function(space: &SpaceDescriptor, n: usize) -> Result<CubeFunction> {
    let dim = space.ambient_dim();
    let s = 1.0 / (n as f64).sqrt();
    CubeFunction::from_vec_fn(n, dim, |x| {
        let mut v = vec![0.0; dim];
        v[0] = x.iter().sum::<f64>() * s;
        v
    })
}

/// The normalized Rademacher sum `Σ x_i / √n` (scalar), for which
/// `Γ² = P² = 1` at every vertex.
pub fn baseline_witness(n: usize, p: f64) -> Result<Witness> {
    let space = SpaceDescriptor::scalar();
    let function = baseline_function(&space, n)?;
    finish_witness(function, space, GradientMode::P(DeltaStrategy::Exact), p, vec![], vec![])
}

fn finish_witness(
    function: CubeFunction,
    space: SpaceDescriptor,
    mode: GradientMode,
    p: f64,
    history: Vec<f64>,
    restarts: Vec<RestartLog>,
) -> Result<Witness> {
    let mode = effective_mode(mode, &space);
    let residual = sup_gradient_sq(&function, &space, mode)? - 1.0;
    let achieved = NormProfile::new(&function, &space, true)?.moment_root(p)?;
    Ok(Witness {
        function,
        space,
        p,
        achieved,
        constraint_residual: residual,
        history,
        restarts,
    })
}

/// P gradients coincide with Γ in Hilbert spaces; Γ is far cheaper.
fn effective_mode(mode: GradientMode, space: &SpaceDescriptor) -> GradientMode {
    match mode {
        GradientMode::P(_) if space.is_hilbert() => GradientMode::Gamma,
        m => m,
    }
}

fn prepare(f: &CubeFunction, cfg: &SearchConfig) -> Result<CubeFunction> {
    let g = if cfg.mean_zero { f.centered() } else { f.clone() };
    lipschitz_normalize(&g, &cfg.space, effective_mode(cfg.mode, &cfg.space))
}

fn run_restart(cfg: &SearchConfig, start: CubeFunction, restart: usize) -> Result<(CubeFunction, RestartLog)> {
    let (n, dim) = (start.n(), start.dim());
    let mode = effective_mode(cfg.mode, &cfg.space);
    let eval = |f: &CubeFunction| projected_value(f, &cfg.space, mode, cfg.p);
    let mut current = start;
    let mut value = eval(&current)?;
    let mut log = RestartLog {
        restart,
        start: value,
        best: value,
        accepted_steps: 0,
        trace: vec![value],
    };
    let mut step = cfg.step;
    let mut work = current.as_flat().to_vec();
    for it in 0..cfg.iterations {
        let mut grad = vec![0.0; work.len()];
        for k in 0..work.len() {
            let orig = work[k];
            work[k] = orig + FD_STEP;
            let up = eval(&CubeFunction::from_flat(n, dim, work.clone())?)?;
            work[k] = orig - FD_STEP;
            let down = eval(&CubeFunction::from_flat(n, dim, work.clone())?)?;
            work[k] = orig;
            grad[k] = (up - down) / (2.0 * FD_STEP);
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm == 0.0 || step < 1e-12 {
            break;
        }
        let cand: Vec<f64> = work.iter().zip(&grad).map(|(w, g)| w + step * g / gnorm).collect();
        let cand = CubeFunction::from_flat(n, dim, cand)?;
        if eval(&cand)? > value {
            let next = prepare(&cand, cfg)?;
            let v = eval(&next)?;
            if v > value {
                current = next;
                value = v;
                work = current.as_flat().to_vec();
                log.accepted_steps += 1;
                step *= 1.2;
            } else {
                step *= 0.5;
            }
        } else {
            step *= 0.5;
        }
        if (it + 1) % TRACE_EVERY == 0 {
            log.trace.push(value);
        }
    }
    log.trace.push(value);
    log.best = value;
    Ok((current, log))
}

/// Multi-restart projected ascent on `(E‖f − Ef‖ᵖ)^{1/p}` under the
/// Lipschitz constraint. Restart 0 starts at the baseline, the others at
/// Gaussian perturbations of it; the baseline is kept as the incumbent, so
/// the result never falls below it.
pub fn maximize_beta(cfg: &SearchConfig) -> Result<Witness> {
    cfg.validate()?;
    let base = prepare(&baseline_function(&cfg.space, cfg.n)?, cfg)?;
    let base_value = projected_value(&base, &cfg.space, effective_mode(cfg.mode, &cfg.space), cfg.p)?;

    let outcomes: Vec<(CubeFunction, RestartLog)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            if r == 0 {
                return run_restart(cfg, base.clone(), r);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, r as u64, 0));
            let noisy: Vec<f64> = base
                .as_flat()
                .iter()
                .map(|v| v + PERTURBATION * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let start = CubeFunction::from_flat(cfg.n, base.dim(), noisy)?;
            let start = match prepare(&start, cfg) {
                Ok(s) => s,
                Err(Error::DegenerateInput(_)) => base.clone(),
                Err(e) => return Err(e),
            };
            run_restart(cfg, start, r)
        })
        .collect::<Result<_>>()?;

    let mut best = (base, base_value);
    for (f, log) in &outcomes {
        if log.best > best.1 {
            best = (f.clone(), log.best);
        }
    }
    let history = outcomes.iter().map(|(_, l)| l.best).collect();
    let logs = outcomes.into_iter().map(|(_, l)| l).collect();
    finish_witness(best.0, cfg.space, cfg.mode, cfg.p, history, logs)
}

/// Outcome of comparing a witness against the target moment `Q` at
/// `p = τQ²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub q: f64,
    pub tau: f64,
    pub p: f64,
    pub achieved: f64,
    pub target: f64,
    pub target_met: bool,
    /// `(τ/2)·Q²`, the implied lower bound on `log Σ`, when the target is met.
    pub log_sigma_lower_bound: Option<f64>,
    pub residual: f64,
}

/// Evaluates the witness at `p = τQ²` against `Q`. Requires `τQ² ≥ 1`.
pub fn sharpness_report(q: f64, tau: f64, witness: &Witness) -> Result<SharpnessReport> {
    if !(tau > 0.0 && q > 0.0) {
        return Err(Error::Config(format!("need tau > 0 and Q > 0, got tau = {tau}, Q = {q}")));
    }
    let p = tau * q * q;
    if p < 1.0 {
        return Err(Error::OutOfRange(format!(
            "tau*Q^2 = {p:.6} < 1: the regime is not evaluated"
        )));
    }
    let achieved = NormProfile::new(&witness.function, &witness.space, true)?.moment_root(p)?;
    let target_met = achieved >= q;
    Ok(SharpnessReport {
        q,
        tau,
        p,
        achieved,
        target: q,
        target_met,
        log_sigma_lower_bound: target_met.then_some(0.5 * tau * q * q),
        residual: witness.constraint_residual,
    })
}
