//! Matrix-valued functions `f : {-1,1}^n → M_{d×d}(ℝ)` under Schatten norms:
//! the two matrix Lipschitz gradients, the Khintchine ratio between them and
//! the moment bounds for mean-zero Lipschitz matrix functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::cube::CubeFunction;
use crate::error::{Error, Result};
use crate::functionals::{
    gradient_sq, lipschitz_normalize, sup_gradient_sq, DeltaStrategy, GradientMode, NormProfile,
};
use crate::linalg::{a_at, at_a, lp_of, singular_values, symmetric_eigenvalues};
use crate::report::{CheckResult, Report};
use crate::spaces::SpaceDescriptor;
use crate::verify::{mix_seed, random_function, LIPSCHITZ_TOL};

/// A cube function whose values are row-major real `d×d` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFunction {
    f: CubeFunction,
    d: usize,
}

impl MatrixFunction {
    pub fn new(f: CubeFunction, d: usize) -> Result<Self> {
        if d == 0 || f.dim() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: f.dim(),
            });
        }
        Ok(Self { f, d })
    }

    /// `f(x) = φ(x) · A` for a scalar `φ` and a fixed matrix `A`.
    pub fn scalar_times(phi: &CubeFunction, a: &[f64], d: usize) -> Result<Self> {
        if a.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: a.len(),
            });
        }
        let vals = phi
            .as_flat()
            .iter()
            .flat_map(|&s| a.iter().map(move |v| s * v))
            .collect();
        Self::new(CubeFunction::from_flat(phi.n(), d * d, vals)?, d)
    }

    pub fn function(&self) -> &CubeFunction {
        &self.f
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn centered(&self) -> Self {
        Self {
            f: self.f.centered(),
            d: self.d,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            f: self.f.scaled(c),
            d: self.d,
        }
    }

    /// `S_p` for finite `p`, operator norm for `p = ∞`.
    pub fn space(&self, p: f64) -> Result<SpaceDescriptor> {
        SpaceDescriptor::matrix(p, self.d)
    }
}

fn check_matrix_exponent(p: f64) -> Result<()> {
    if p >= 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// `‖(Σ_i D_i f D_i fᵀ)^{1/2}‖_{S_p} + ‖(Σ_i D_i fᵀ D_i f)^{1/2}‖_{S_p}` at
/// vertex `x`; `p = ∞` is the operator norm.
pub fn k_sq_p(f: &MatrixFunction, p: f64, x: usize) -> Result<f64> {
    check_matrix_exponent(p)?;
    let d = f.d;
    let derivs = f.f.derivatives_at(x);
    let mut rows = vec![0.0; d * d];
    let mut cols = vec![0.0; d * d];
    for m in &derivs {
        for (acc, v) in rows.iter_mut().zip(a_at(m, d)) {
            *acc += v;
        }
        for (acc, v) in cols.iter_mut().zip(at_a(m, d)) {
            *acc += v;
        }
    }
    Ok(psd_root_norm(&rows, d, p)? + psd_root_norm(&cols, d, p)?)
}

/// `‖S^{1/2}‖_{S_p}` for a positive semidefinite `S`, via its eigenvalues.
fn psd_root_norm(s: &[f64], d: usize, p: f64) -> Result<f64> {
    let ev = symmetric_eigenvalues(s, d)?;
    let floor = -1e-10 * ev[0].abs().max(1.0);
    let root: Vec<f64> = ev
        .iter()
        .map(|&l| {
            if l < floor {
                Err(Error::NotPsd(l))
            } else {
                Ok(l.max(0.0).sqrt())
            }
        })
        .collect::<Result<_>>()?;
    Ok(lp_of(&root, p))
}

/// `max_x K²_p(f)(x)`.
pub fn sup_k_sq_p(f: &MatrixFunction, p: f64) -> Result<f64> {
    let mut best = 0.0f64;
    for x in 0..f.f.len() {
        best = best.max(k_sq_p(f, p, x)?);
    }
    Ok(best)
}

/// Unrooted `E_δ ‖Σ_i δ_i D_i f(x)‖²_{S_p}`.
pub fn p_sq_p_raw(f: &MatrixFunction, p: f64, x: usize, strategy: DeltaStrategy) -> Result<f64> {
    check_matrix_exponent(p)?;
    gradient_sq(&f.f, &f.space(p)?, GradientMode::P(strategy), x)
}

/// `P²_p(f)(x) = (E_δ ‖Σ_i δ_i D_i f(x)‖²_{S_p})^{1/2}`, rooted as written
/// for matrix spaces; [`p_sq_p_raw`] gives the unrooted average.
pub fn p_sq_p(f: &MatrixFunction, p: f64, x: usize, strategy: DeltaStrategy) -> Result<f64> {
    Ok(p_sq_p_raw(f, p, x, strategy)?.sqrt())
}

/// `min(√p, √ln d)`.
pub fn khintchine_factor(p: f64, d: usize) -> f64 {
    p.sqrt().min((d as f64).ln().sqrt())
}

/// Report row `P²_p ≤ c₂ min(√p, √ln d) K²_p` at vertex `x`, with the
/// empirical ratio `P²_p / K²_p`.
pub fn khintchine_report(f: &MatrixFunction, p: f64, x: usize, c2: f64) -> Result<CheckResult> {
    let k = k_sq_p(f, p, x)?;
    if k == 0.0 {
        return Err(Error::ZeroDenominator(format!("K²_p vanishes at vertex {x}")));
    }
    let strategy = match GradientMode::p_for(f.f.n()) {
        GradientMode::P(s) => s,
        _ => DeltaStrategy::Exact,
    };
    let pp = p_sq_p(f, p, x, strategy)?;
    let factor = khintchine_factor(p, f.d);
    Ok(CheckResult::report("khintchine", pp, c2 * factor * k)
        .with("ratio", pp / k)
        .with("k_sq_p", k)
        .with("p_sq_p", pp)
        .with("p_sq_p_raw", pp * pp)
        .with("factor", factor)
        .with("c2", c2)
        .with("p", p)
        .with("d", f.d)
        .with("x", x))
}

/// `‖A‖_{S_p} ≤ d^{1/p} ‖A‖_op`.
pub fn check_schatten_vs_operator(a: &[f64], d: usize, p: f64) -> Result<CheckResult> {
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    let sv = singular_values(a, d)?;
    let lhs = lp_of(&sv, p);
    let rhs = (d as f64).powf(1.0 / p) * sv[0];
    Ok(CheckResult::verdict("schatten_vs_operator", lhs, rhs)
        .with("p", p)
        .with("d", d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentVariant {
    /// Operator norm, P-gradient ≤ 1, `p ∈ [1, ln d]`: moment ≤ ln d.
    M1,
    /// `S_p`, `P²_p ≤ 1`: moment ≤ p on `[2, ln d]`,
    /// `√((2p−1) + (ln d − 1)²)` on `[ln d, ∞]`.
    M2,
    /// `S_p`, `K²_∞ ≤ 1`: report against the `c₂`-dependent chain.
    M3,
}

impl MomentVariant {
    pub fn label(&self) -> &'static str {
        match self {
            MomentVariant::M1 => "m1",
            MomentVariant::M2 => "m2",
            MomentVariant::M3 => "m3",
        }
    }
}

/// High-`p` branch `√((2p−1) + (ln d − 1)²)`.
fn high_branch(p: f64, ln_d: f64) -> f64 {
    ((2.0 * p - 1.0) + (ln_d - 1.0).powi(2)).sqrt()
}

fn exact_p_sup(f: &MatrixFunction, space: &SpaceDescriptor) -> Result<f64> {
    sup_gradient_sq(&f.f, space, GradientMode::P(DeltaStrategy::Exact))
}

/// Moment bound for `f − E f` in the chosen variant. The variant's Lipschitz
/// condition is verified first (`NotLipschitz` otherwise).
pub fn check_matrix_moments(
    f: &MatrixFunction,
    p: f64,
    variant: MomentVariant,
    c2: f64,
) -> Result<CheckResult> {
    let d = f.d;
    let ln_d = (d as f64).ln();
    let range_err = |range: &str| Error::InvalidRange {
        p,
        range: range.to_string(),
    };
    let name = format!("matrix_{}", variant.label());
    let row = match variant {
        MomentVariant::M1 => {
            let space = SpaceDescriptor::operator(d)?;
            space.cotype()?;
            if !(p >= 1.0 && p <= ln_d) {
                return Err(range_err("[1, ln d]"));
            }
            let sup = exact_p_sup(f, &space)?;
            if sup > 1.0 + LIPSCHITZ_TOL {
                return Err(Error::NotLipschitz { sup });
            }
            let lhs = NormProfile::new(&f.f, &space, true)?.moment(p)?.powf(1.0 / p);
            CheckResult::verdict(&name, lhs, ln_d).with("sup_gradient", sup)
        }
        MomentVariant::M2 => {
            if !(p >= 2.0) {
                return Err(range_err("[2, ∞]"));
            }
            let space = f.space(p)?;
            let sup = exact_p_sup(f, &space)?;
            if sup > 1.0 + LIPSCHITZ_TOL {
                return Err(Error::NotLipschitz { sup });
            }
            let lhs = NormProfile::new(&f.f, &space, true)?.moment_root(p)?;
            let low = (p <= ln_d).then_some(p);
            let high = (p >= ln_d).then(|| high_branch(p, ln_d));
            let rhs = match (low, high) {
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => unreachable!("p is on one side of ln d"),
            };
            let mut row = CheckResult::verdict(&name, lhs, rhs).with("sup_gradient", sup);
            if let Some(a) = low {
                row = row.with("bound_low_branch", a);
            }
            if let Some(b) = high {
                row = row.with("bound_high_branch", b);
            }
            row
        }
        MomentVariant::M3 => {
            if !(p >= 2.0) {
                return Err(range_err("[2, ∞]"));
            }
            let sup = sup_k_sq_p(f, f64::INFINITY)?;
            if sup > 1.0 + LIPSCHITZ_TOL {
                return Err(Error::NotLipschitz { sup });
            }
            let space = f.space(p)?;
            let lhs = NormProfile::new(&f.f, &space, true)?.moment_root(p)?;
            let rhs = if p <= ln_d {
                c2 * (d as f64).powf(1.0 / p) * p.powf(1.5)
            } else {
                c2 * ln_d.sqrt() * high_branch(p, ln_d)
            };
            CheckResult::report(&name, lhs, rhs)
                .with("sup_k_inf", sup)
                .with("c2", c2)
        }
    };
    Ok(row.with("p", p).with("d", d).with("n", f.f.n()))
}

/// Rescales so that `sup_x P²_p = 1` in `S_p`.
pub fn normalize_p(f: &MatrixFunction, p: f64) -> Result<MatrixFunction> {
    let space = f.space(p)?;
    MatrixFunction::new(
        lipschitz_normalize(&f.f, &space, GradientMode::P(DeltaStrategy::Exact))?,
        f.d,
    )
}

/// Rescales so that `sup_x K²_∞ = 1` (the gradient is 1-homogeneous).
pub fn normalize_k_inf(f: &MatrixFunction) -> Result<MatrixFunction> {
    let sup = sup_k_sq_p(f, f64::INFINITY)?;
    if sup == 0.0 {
        return Err(Error::DegenerateInput("constant function has zero gradient".into()));
    }
    Ok(f.scaled(1.0 / sup))
}

/// Configuration of [`run_matrix_suite`].
#[derive(Clone, Debug)]
pub struct MatrixSuiteConfig {
    pub n: usize,
    pub d: usize,
    pub p_list: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub c2: f64,
    /// Random matrices per trial for the Schatten/operator comparison.
    pub matrices_per_trial: usize,
}

impl Default for MatrixSuiteConfig {
    fn default() -> Self {
        Self {
            n: 3,
            d: 8,
            p_list: vec![2.0, 2.5],
            trials: 20,
            seed: 0,
            c2: 1.0,
            matrices_per_trial: 10,
        }
    }
}

fn matrix_trial(cfg: &MatrixSuiteConfig, trial: usize) -> Result<Vec<CheckResult>> {
    let d = cfg.d;
    let seed = |role: u64| mix_seed(cfg.seed, trial as u64, role);
    let mut rows = Vec::new();

    let mut rng = ChaCha8Rng::seed_from_u64(seed(1));
    for _ in 0..cfg.matrices_per_trial {
        let a: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
        for &p in &cfg.p_list {
            rows.push(check_schatten_vs_operator(&a, d, p)?);
        }
    }

    let raw = MatrixFunction::new(
        random_function(&SpaceDescriptor::operator(d)?, cfg.n, seed(2), None)?.centered(),
        d,
    )?;
    let ln_d = (d as f64).ln();
    for &p in &cfg.p_list {
        let f = normalize_p(&raw, p)?;
        rows.push(check_matrix_moments(&f, p, MomentVariant::M2, cfg.c2)?);

        let mut ratios = Vec::with_capacity(raw.f.len());
        let mut best: Option<CheckResult> = None;
        for x in 0..raw.f.len() {
            let r = khintchine_report(&raw, p, x, cfg.c2)?;
            let ratio = r.param_f64("ratio").unwrap_or(f64::NAN);
            ratios.push(ratio);
            if best.as_ref().is_none_or(|b| ratio > b.param_f64("ratio").unwrap_or(0.0)) {
                best = Some(r);
            }
        }
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        if let Some(r) = best {
            rows.push(r.with("min_ratio", lo).with("max_ratio", hi).with("n", cfg.n));
        }

        let g = normalize_k_inf(&raw)?;
        rows.push(check_matrix_moments(&g, p, MomentVariant::M3, cfg.c2)?);
    }

    if d >= 3 {
        let op = SpaceDescriptor::operator(d)?;
        let f = MatrixFunction::new(
            lipschitz_normalize(&raw.f, &op, GradientMode::P(DeltaStrategy::Exact))?,
            d,
        )?;
        rows.push(check_matrix_moments(&f, 1.0, MomentVariant::M1, cfg.c2)?);
        rows.push(check_matrix_moments(&f, ln_d, MomentVariant::M1, cfg.c2)?);
    }
    Ok(rows
        .into_iter()
        .map(|r| r.with("trial", trial).with("seed", cfg.seed))
        .collect())
}

/// Random-instance suite for the matrix checks; deterministic in `seed`.
pub fn run_matrix_suite(cfg: &MatrixSuiteConfig) -> Result<Report> {
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    if cfg.p_list.iter().any(|p| !(*p >= 2.0)) {
        return Err(Error::Config("matrix exponents must be >= 2".into()));
    }
    if cfg.n == 0 || cfg.n > 10 {
        return Err(Error::Config(format!("matrix suite needs 1 <= n <= 10, got {}", cfg.n)));
    }
    let per_trial: Vec<Vec<CheckResult>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| matrix_trial(cfg, t))
        .collect::<Result<_>>()?;
    let mut rows: Vec<CheckResult> = per_trial.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        a.check.cmp(&b.check).then_with(|| {
            let ta = a.params.get("trial").and_then(|v| v.as_u64());
            let tb = b.params.get("trial").and_then(|v| v.as_u64());
            ta.cmp(&tb)
        })
    });
    Ok(Report::new(rows, cfg.seed))
}
