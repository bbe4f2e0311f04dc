//! Scalar functionals of cube functions: entropy, Orlicz norms, the one-sided
//! gradient `Mg`, the three Lipschitz gradients, norm moments and their
//! logarithmic derivatives, exponential moments and their power series.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cube::{CubeFunction, FourierCoefficients};
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;
use crate::reduce::{mean, tree_mean};
use crate::spaces::SpaceDescriptor;

/// Largest `n` for which sign vectors are enumerated exhaustively.
pub const MAX_EXACT_N: usize = 20;
/// Monte Carlo sample count used when exhaustive enumeration is unavailable.
pub const DEFAULT_MC_SAMPLES: usize = 4096;
/// Restarts of the dual-ball ascent that lower-bounds the weak gradient.
pub const WEAK_RESTARTS: usize = 40;
const WEAK_STEPS: usize = 60;

/// How the Rademacher average over sign vectors δ is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaStrategy {
    Exact,
    /// `samples` sign vectors per vertex from a ChaCha stream keyed by
    /// `(seed, vertex)`.
    MonteCarlo { samples: usize, seed: u64 },
}

/// Which squared gradient defines "Lipschitz".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientMode {
    /// `Γ²(f)(x) = Σ_i ‖D_i f(x)‖²`.
    Gamma,
    /// `P²(f)(x) = E_δ ‖Σ_i δ_i D_i f(x)‖²`.
    P(DeltaStrategy),
    /// `sup_{‖ξ‖_* = 1} Σ_i ⟨ξ, D_i f(x)⟩²`.
    Weak,
}

impl GradientMode {
    /// P-mode with exhaustive signs when `n ≤ 20`, Monte Carlo otherwise.
    pub fn p_for(n: usize) -> Self {
        if n <= MAX_EXACT_N {
            GradientMode::P(DeltaStrategy::Exact)
        } else {
            GradientMode::P(DeltaStrategy::MonteCarlo {
                samples: DEFAULT_MC_SAMPLES,
                seed: 0,
            })
        }
    }

    /// Whether [`gradient_sq`] returns the exact value (as opposed to a
    /// Monte Carlo estimate or an ascent lower bound) in `space`.
    pub fn is_exact_in(&self, space: &SpaceDescriptor) -> bool {
        match self {
            GradientMode::Gamma | GradientMode::P(DeltaStrategy::Exact) => true,
            GradientMode::P(DeltaStrategy::MonteCarlo { .. }) => false,
            GradientMode::Weak => space.is_hilbert(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            GradientMode::Gamma => "gamma",
            GradientMode::P(DeltaStrategy::Exact) => "p-exact",
            GradientMode::P(DeltaStrategy::MonteCarlo { .. }) => "p-mc",
            GradientMode::Weak => "weak",
        }
    }
}

fn require_scalar(g: &CubeFunction) -> Result<()> {
    if g.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: g.dim(),
        });
    }
    Ok(())
}

fn require_nonnegative(g: &CubeFunction) -> Result<()> {
    require_scalar(g)?;
    match g.as_flat().iter().position(|&v| v < 0.0) {
        Some(vertex) => Err(Error::NegativeInput {
            vertex,
            value: g.as_flat()[vertex],
        }),
        None => Ok(()),
    }
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `E h log h − E h · log E h` for nonnegative weights `h`.
pub fn entropy_of(h: &[f64]) -> f64 {
    let m = mean(h);
    if m == 0.0 {
        return 0.0;
    }
    let e = tree_mean(h.len(), |b| xlogx(h[b])) - xlogx(m);
    // Jensen: the exact value is nonnegative
    e.max(0.0)
}

/// `Ent(g²) = E g² log g² − E g² log E g²` for a nonnegative scalar `g`.
pub fn entropy_sq(g: &CubeFunction) -> Result<f64> {
    require_nonnegative(g)?;
    let sq: Vec<f64> = g.as_flat().iter().map(|v| v * v).collect();
    Ok(entropy_of(&sq))
}

/// Young function `Ψ_p(t) = tᵖ · log^{p/2}(e + t²)`.
pub fn young(t: f64, p: f64) -> f64 {
    t.powf(p) * (std::f64::consts::E + t * t).ln().powf(p / 2.0)
}

/// Luxemburg norm of `g` in `L^p log^{p/2} L` (for `p = 2`, `L² log L`).
///
/// Bisection on λ over `[1e-12·max g, 10·max g]` until the bracket is
/// relatively narrower than `1e-12` or 200 halvings were made.
pub fn orlicz_norm(g: &CubeFunction, p: f64) -> Result<f64> {
    require_nonnegative(g)?;
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(p));
    }
    let vals = g.as_flat();
    let top = vals.iter().fold(0.0f64, |m, &v| m.max(v));
    if top == 0.0 {
        return Ok(0.0);
    }
    let modular = |lambda: f64| tree_mean(vals.len(), |b| young(vals[b] / lambda, p));
    let (mut lo, mut hi) = (1e-12 * top, 10.0 * top);
    for _ in 0..200 {
        if (hi - lo) <= 1e-12 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if modular(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `Mg(x) = (Σ_i [(D_i g)(x)]_+²)^{1/2}`.
pub fn m_gradient(g: &CubeFunction) -> Result<CubeFunction> {
    require_scalar(g)?;
    let n = g.n();
    let vals = g.as_flat();
    let out = (0..g.len())
        .map(|b| {
            (0..n)
                .map(|i| ((vals[b] - vals[b ^ (1 << i)]) / 2.0).max(0.0).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    CubeFunction::from_flat(n, 1, out)
}

fn check_space(f: &CubeFunction, space: &SpaceDescriptor) -> Result<()> {
    if f.dim() != space.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.ambient_dim(),
            got: f.dim(),
        });
    }
    Ok(())
}

/// Squared gradient of `f` at vertex `x` in the selected mode.
///
/// Weak mode is exact on scalar and Euclidean spaces; on matrix spaces it is
/// the best value of a restarted ascent over the dual unit sphere, hence a
/// lower bound (see [`GradientMode::is_exact_in`]).
pub fn gradient_sq(
    f: &CubeFunction,
    space: &SpaceDescriptor,
    mode: GradientMode,
    x: usize,
) -> Result<f64> {
    check_space(f, space)?;
    if x >= f.len() {
        return Err(Error::IndexOutOfRange {
            index: x,
            n: f.len(),
        });
    }
    let derivs = f.derivatives_at(x);
    match mode {
        GradientMode::Gamma => {
            let mut total = 0.0;
            for d in &derivs {
                total += space.norm(d)?.powi(2);
            }
            Ok(total)
        }
        GradientMode::P(strategy) => p_gradient_sq(&derivs, space, strategy, x),
        GradientMode::Weak => weak_gradient_sq(&derivs, space),
    }
}

fn signed_sum(derivs: &[Vec<f64>], signs: impl Fn(usize) -> f64, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (i, d) in derivs.iter().enumerate() {
        let s = signs(i);
        for (o, v) in out.iter_mut().zip(d) {
            *o += s * v;
        }
    }
}

fn p_gradient_sq(
    derivs: &[Vec<f64>],
    space: &SpaceDescriptor,
    strategy: DeltaStrategy,
    x: usize,
) -> Result<f64> {
    let n = derivs.len();
    let mut buf = vec![0.0; space.ambient_dim()];
    match strategy {
        DeltaStrategy::Exact => {
            if n > MAX_EXACT_N {
                return Err(Error::ExactTooLarge(n));
            }
            // δ and −δ give the same norm: fix δ_0 = +1
            let count = 1usize << (n - 1);
            let mut sq = Vec::with_capacity(count);
            for mask in 0..count {
                signed_sum(
                    derivs,
                    |i| {
                        if i > 0 && (mask >> (i - 1)) & 1 == 1 {
                            -1.0
                        } else {
                            1.0
                        }
                    },
                    &mut buf,
                );
                sq.push(space.norm(&buf)?.powi(2));
            }
            Ok(mean(&sq))
        }
        DeltaStrategy::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::Config("Monte Carlo needs at least one sample".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(x as u64);
            let mut sq = Vec::with_capacity(samples);
            let mut signs = vec![1.0; n];
            for _ in 0..samples {
                signs
                    .iter_mut()
                    .for_each(|s| *s = if rng.random::<bool>() { 1.0 } else { -1.0 });
                signed_sum(derivs, |i| signs[i], &mut buf);
                sq.push(space.norm(&buf)?.powi(2));
            }
            Ok(mean(&sq))
        }
    }
}

fn pairing_value(derivs: &[Vec<f64>], xi: &[f64]) -> f64 {
    derivs
        .iter()
        .map(|d| d.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>().powi(2))
        .sum()
}

fn weak_gradient_sq(derivs: &[Vec<f64>], space: &SpaceDescriptor) -> Result<f64> {
    let dim = space.ambient_dim();
    if space.is_hilbert() {
        // top eigenvalue of Σ_i v_i v_iᵀ
        let mut gram = vec![0.0; dim * dim];
        for v in derivs {
            for r in 0..dim {
                for c in 0..dim {
                    gram[r * dim + c] += v[r] * v[c];
                }
            }
        }
        let ev = symmetric_eigenvalues(&gram, dim)?;
        return Ok(ev[0].max(0.0));
    }

    if derivs.iter().all(|d| d.iter().all(|&v| v == 0.0)) {
        return Ok(0.0);
    }
    let unit = |v: &[f64]| -> Result<Option<Vec<f64>>> {
        let s = space.dual_norm(v)?;
        Ok((s > 0.0).then(|| v.iter().map(|x| x / s).collect()))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut best = 0.0f64;
    for restart in 0..WEAK_RESTARTS {
        let start: Vec<f64> = if restart < derivs.len() {
            derivs[restart].clone()
        } else {
            (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()
        };
        let Some(mut xi) = unit(&start)? else {
            continue;
        };
        let mut value = pairing_value(derivs, &xi);
        let mut step = 0.5;
        for _ in 0..WEAK_STEPS {
            let mut grad = vec![0.0; dim];
            for d in derivs {
                let inner: f64 = d.iter().zip(&xi).map(|(a, b)| a * b).sum();
                for (g, v) in grad.iter_mut().zip(d) {
                    *g += 2.0 * inner * v;
                }
            }
            let gnorm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gnorm == 0.0 {
                break;
            }
            let xnorm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            let cand: Vec<f64> = xi
                .iter()
                .zip(&grad)
                .map(|(a, g)| a + step * xnorm * g / gnorm)
                .collect();
            match unit(&cand)? {
                Some(c) if pairing_value(derivs, &c) > value => {
                    value = pairing_value(derivs, &c);
                    xi = c;
                    step *= 1.5;
                }
                _ => step *= 0.5,
            }
            if step < 1e-12 {
                break;
            }
        }
        best = best.max(value);
    }
    Ok(best)
}

/// `max_x gradient_sq(f, space, mode, x)`.
pub fn sup_gradient_sq(f: &CubeFunction, space: &SpaceDescriptor, mode: GradientMode) -> Result<f64> {
    let mut best = 0.0f64;
    for x in 0..f.len() {
        best = best.max(gradient_sq(f, space, mode, x)?);
    }
    Ok(best)
}

/// Rescales a non-constant `f` so that its sup squared gradient is 1.
pub fn lipschitz_normalize(
    f: &CubeFunction,
    space: &SpaceDescriptor,
    mode: GradientMode,
) -> Result<CubeFunction> {
    let sup = sup_gradient_sq(f, space, mode)?;
    if sup == 0.0 {
        return Err(Error::DegenerateInput("constant function has zero gradient".into()));
    }
    Ok(f.scaled(1.0 / sup.sqrt()))
}

/// Pointwise norms `‖f(x)‖_E` (of `f − E f` when centered), reused across
/// exponents.
#[derive(Clone, Debug)]
pub struct NormProfile {
    norms: Vec<f64>,
}

impl NormProfile {
    pub fn new(f: &CubeFunction, space: &SpaceDescriptor, center: bool) -> Result<Self> {
        check_space(f, space)?;
        let g;
        let src = if center {
            g = f.centered();
            &g
        } else {
            f
        };
        let norms = (0..src.len())
            .map(|b| space.norm(src.value(b)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { norms })
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// `a(p) = E ‖g‖ᵖ`.
    pub fn moment(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) || p.is_nan() {
            return Err(Error::InvalidExponent(p));
        }
        Ok(tree_mean(self.norms.len(), |b| self.norms[b].powf(p)))
    }

    /// `a(p)^{1/p}`; the largest norm for `p = ∞`.
    pub fn moment_root(&self, p: f64) -> Result<f64> {
        if p == f64::INFINITY {
            return Ok(self.norms.iter().fold(0.0, |m, &r| m.max(r)));
        }
        Ok(self.moment(p)?.powf(1.0 / p))
    }

    /// `a′(p) = E ‖g‖ᵖ log ‖g‖`, with `0ᵖ log 0 = 0`.
    pub fn moment_log_derivative(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) || p.is_nan() {
            return Err(Error::InvalidExponent(p));
        }
        Ok(tree_mean(self.norms.len(), |b| {
            let r = self.norms[b];
            if r == 0.0 {
                0.0
            } else {
                r.powf(p) * r.ln()
            }
        }))
    }

    /// `β(p) = log a(p) / p`.
    pub fn beta(&self, p: f64) -> Result<f64> {
        let a = self.moment(p)?;
        if a == 0.0 {
            return Err(Error::ZeroMoment);
        }
        Ok(a.ln() / p)
    }

    /// `β′(p) = a′(p)/(p a(p)) − log a(p)/p²`.
    pub fn beta_prime(&self, p: f64) -> Result<f64> {
        let a = self.moment(p)?;
        if a == 0.0 {
            return Err(Error::ZeroMoment);
        }
        Ok(self.moment_log_derivative(p)? / (p * a) - a.ln() / (p * p))
    }

    /// `Ent(‖g‖ᵖ)`.
    pub fn entropy_pow(&self, p: f64) -> f64 {
        let h: Vec<f64> = self.norms.iter().map(|r| r.powf(p)).collect();
        entropy_of(&h)
    }

    fn exp_args(&self, tau: f64) -> Result<Vec<f64>> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Config(format!("tau must be positive, got {tau}")));
        }
        let args: Vec<f64> = self.norms.iter().map(|r| tau * r * r).collect();
        if let Some(&big) = args.iter().find(|&&a| a > 700.0) {
            return Err(Error::Overflow(big));
        }
        Ok(args)
    }

    /// `E exp(τ ‖g‖²)`.
    pub fn exp_moment(&self, tau: f64) -> Result<f64> {
        let args = self.exp_args(tau)?;
        Ok(tree_mean(args.len(), |b| args[b].exp()))
    }

    /// Partial sums of `Σ_j τʲ a(2j) / j!`; entry `k` holds terms `0..=k`.
    pub fn sigma_partial_sums(&self, tau: f64, terms: usize) -> Result<Vec<f64>> {
        if terms > 200 {
            return Err(Error::Config(format!("at most 200 series terms, got {terms}")));
        }
        let args = self.exp_args(tau)?;
        // per-vertex (τ r²)^j / j!, updated in place
        let mut current = vec![1.0; args.len()];
        let mut total = 0.0;
        let mut sums = Vec::with_capacity(terms);
        for j in 0..terms {
            if j > 0 {
                for (c, a) in current.iter_mut().zip(&args) {
                    *c *= a / j as f64;
                }
            }
            total += mean(&current);
            sums.push(total);
        }
        Ok(sums)
    }
}

/// `a(p) = E ‖g‖ᵖ_E` with `g = f − E f` when `center`, else `g = f`.
pub fn moment(f: &CubeFunction, space: &SpaceDescriptor, p: f64, center: bool) -> Result<f64> {
    NormProfile::new(f, space, center)?.moment(p)
}

/// `β(p) = log a(p) / p` of the centered function.
pub fn beta(f: &CubeFunction, space: &SpaceDescriptor, p: f64) -> Result<f64> {
    NormProfile::new(f, space, true)?.beta(p)
}

/// Exact `a′(p)`, centered when `center`.
pub fn moment_log_derivative(
    f: &CubeFunction,
    space: &SpaceDescriptor,
    p: f64,
    center: bool,
) -> Result<f64> {
    NormProfile::new(f, space, center)?.moment_log_derivative(p)
}

/// `E exp(τ ‖f − E f‖²)`.
pub fn exp_moment(f: &CubeFunction, space: &SpaceDescriptor, tau: f64) -> Result<f64> {
    NormProfile::new(f, space, true)?.exp_moment(tau)
}

/// Partial sums of `Σ_j τʲ a(2j)/j!` with centered moments.
pub fn sigma_partial_sums(
    f: &CubeFunction,
    space: &SpaceDescriptor,
    tau: f64,
    terms: usize,
) -> Result<Vec<f64>> {
    NormProfile::new(f, space, true)?.sigma_partial_sums(tau, terms)
}

/// Restrictions of the multilinear extension to coordinate lines through
/// cube vertices.
#[derive(Clone, Debug)]
pub struct LineProbe {
    coeffs: FourierCoefficients,
    space: SpaceDescriptor,
}

impl LineProbe {
    pub fn new(f: &CubeFunction, space: &SpaceDescriptor) -> Result<Self> {
        check_space(f, space)?;
        Ok(Self {
            coeffs: f.to_coefficients(),
            space: *space,
        })
    }

    /// `h(s) = ‖F(x with coordinate i set to s)‖^{p/2}`.
    pub fn h(&self, x: usize, i: usize, s: f64, p: f64) -> Result<f64> {
        let n = self.coeffs.n();
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        let mut point = crate::cube::vertex_point(n, x);
        point[i] = s;
        let v = self.coeffs.evaluate_extension(&point)?;
        Ok(self.space.norm(&v)?.powf(p / 2.0))
    }

    /// Slope of `h` over the outward interval `[x_i, x_i(1+ε)]`, oriented
    /// away from the cube: `(h(x_i(1+ε)) − h(x_i)) / ε`.
    ///
    /// By convexity of `h` this is nondecreasing in `ε`, and it dominates the
    /// chord slope over `[-1, 1]` whenever `h` grows towards `x_i`.
    pub fn outward_slope(&self, x: usize, i: usize, p: f64, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidEpsilon(eps));
        }
        if !(p >= 2.0) {
            return Err(Error::InvalidExponent(p));
        }
        let s0 = crate::cube::coordinate(x, i);
        Ok((self.h(x, i, s0 * (1.0 + eps), p)? - self.h(x, i, s0, p)?) / eps)
    }
}

/// One-shot form of [`LineProbe::outward_slope`].
pub fn outward_chord_slope(
    f: &CubeFunction,
    space: &SpaceDescriptor,
    p: f64,
    x: usize,
    i: usize,
    eps: f64,
) -> Result<f64> {
    LineProbe::new(f, space)?.outward_slope(x, i, p, eps)
}
