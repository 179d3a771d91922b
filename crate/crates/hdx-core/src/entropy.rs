//! Relative entropy functionals and entropy-contraction estimation.
//!
//! `Ent_π{f} = E_π(f log f) − E_π f · log E_π f` (with `0·log 0 = 0`) drives
//! three families of checks: the per-step entropy inequalities of the up and
//! down walks, the conditional-entropy decomposition over codimension-two
//! faces, and the local-to-global contraction theorem. Infima such as the
//! modified log-Sobolev constant and local entropy contraction factors have
//! no closed form; they are estimated by minimizing the corresponding ratio
//! over positive functions, parameterized as `f = exp(g)`. Every such value
//! is an upper estimate of the true infimum and is reported as an estimate,
//! never a certificate.

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::complex::{Face, LevelDistribution, Link, PureSimplicialComplex};
use crate::contraction::{solve_recursion, ContractionFactors};
use crate::error::{Error, Result};
use crate::spectral::REVERSIBILITY_TOL;
use crate::walks::{
    down_step, down_up_walk, project_down, up_down_walk, up_step, LevelFunction, PairDecomposition,
    WalkOperator,
};

pub const DEFAULT_RESTARTS: usize = 64;
pub const DEFAULT_MAX_ITERATIONS: usize = 5000;
pub const DEFAULT_GRAD_TOL: f64 = 1e-10;

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

fn check_nonnegative(f: &LevelFunction) -> Result<()> {
    for i in 0..f.len() {
        let v = f.get(i);
        if v < 0.0 || !v.is_finite() {
            return Err(Error::NegativeFunction(format!(
                "entry {i} is {v}, expected a finite nonnegative value"
            )));
        }
    }
    Ok(())
}

/// `Ent_π{f} = E_π(f log f) − E_π f · log E_π f` for `f ≥ 0`.
pub fn relative_entropy(dist: &LevelDistribution, f: &LevelFunction) -> Result<f64> {
    if dist.level() != f.level() || dist.len() != f.len() {
        return Err(Error::Dimension(format!(
            "entropy of a level-{} function against a level-{} distribution of size {}",
            f.level(),
            dist.level(),
            dist.len()
        )));
    }
    check_nonnegative(f)?;
    let mut mean = 0.0;
    let mut mean_flogf = 0.0;
    for i in 0..f.len() {
        mean += dist.get(i) * f.get(i);
        mean_flogf += dist.get(i) * xlogx(f.get(i));
    }
    Ok(mean_flogf - xlogx(mean))
}

/// `D(τ‖π) = Σ_x τ(x)·log(τ(x)/π(x))`; needs `support(τ) ⊆ support(π)`.
pub fn kl_divergence(tau: &LevelDistribution, pi: &LevelDistribution) -> Result<f64> {
    if tau.level() != pi.level() || tau.len() != pi.len() {
        return Err(Error::Dimension(format!(
            "KL divergence between distributions on levels {} and {} of sizes {} and {}",
            tau.level(),
            pi.level(),
            tau.len(),
            pi.len()
        )));
    }
    let mut acc = 0.0;
    for x in 0..tau.len() {
        let t = tau.get(x);
        if t == 0.0 {
            continue;
        }
        let p = pi.get(x);
        if p == 0.0 {
            return Err(Error::Support(format!(
                "state {x} has mass {t} under τ but none under π"
            )));
        }
        acc += t * (t / p).ln();
    }
    Ok(acc)
}

/// Entropy Dirichlet form `E_P(f, log f)` of a square operator.
///
/// Zero entries of `f` follow the `0·log 0 = 0` convention; a transition
/// from positive to zero mass makes the form `+∞`, which is returned as
/// `f64::INFINITY`.
pub fn entropy_dirichlet(op: &WalkOperator, f: &LevelFunction) -> Result<f64> {
    if !op.is_square() {
        return Err(Error::Dimension(
            "entropy Dirichlet form needs a square operator".to_string(),
        ));
    }
    if f.level() != op.source_level() || f.len() != op.nrows() {
        return Err(Error::Dimension(format!(
            "operator of size {} applied to a function of length {}",
            op.nrows(),
            f.len()
        )));
    }
    check_nonnegative(f)?;
    let pi = op.stationary().probs();
    let p = op.matrix();
    let mut acc = 0.0;
    for x in 0..op.nrows() {
        let fx = f.get(x);
        if fx == 0.0 {
            continue;
        }
        for y in 0..op.ncols() {
            let pxy = p[(x, y)];
            if pxy == 0.0 {
                continue;
            }
            let fy = f.get(y);
            if fy == 0.0 {
                return Ok(f64::INFINITY);
            }
            acc += pi[x] * pxy * fx * (fx.ln() - fy.ln());
        }
    }
    Ok(acc)
}

/// Margin of the down-walk entropy inequality at level `k`:
/// `E_{RW↓_k}(f, log f) − (Ent_{π_k}{f} − Ent_{π_{k−1}}{f^(k−1)})`,
/// nonnegative up to float error.
pub fn entropy_inequality_down_margin(
    complex: &PureSimplicialComplex,
    k: usize,
    f: &LevelFunction,
) -> Result<f64> {
    let walk = down_up_walk(complex, k)?;
    let lhs = entropy_dirichlet(&walk, f)?;
    let ent_k = relative_entropy(&complex.level_distribution(k)?, f)?;
    let projected = project_down(complex, f, k - 1)?;
    let ent_km1 = relative_entropy(&complex.level_distribution(k - 1)?, &projected)?;
    Ok(lhs - (ent_k - ent_km1))
}

/// Margin of the up-walk entropy inequality at level `k−1`:
/// `E_{RW↑_{k−1}}(g, log g) − (Ent_{π_{k−1}}{g} − Ent_{π_k}{P↓_k g})` for a
/// function `g` on level `k−1`.
pub fn entropy_inequality_up_margin(
    complex: &PureSimplicialComplex,
    k: usize,
    g: &LevelFunction,
) -> Result<f64> {
    let walk = up_down_walk(complex, k - 1)?;
    let lhs = entropy_dirichlet(&walk, g)?;
    let ent_km1 = relative_entropy(&complex.level_distribution(k - 1)?, g)?;
    let lifted = down_step(complex, k)?.apply(g)?;
    let ent_k = relative_entropy(&complex.level_distribution(k)?, &lifted)?;
    Ok(lhs - (ent_km1 - ent_k))
}

/// Relative residual of the conditional-entropy decomposition
/// `Ent_{π_k}{f} = Σ_S π_{k−2}(S)·Ent_{π_{S,2}}{f_S} + Ent_{π_{k−2}}{f^(k−2)}`,
/// normalized by `max(Ent_{π_k}{f}, E_{π_k}|f·log f|, 1e-30)`. Entropies are
/// differences of `f log f`-sized means, so cancellation noise lives at that
/// scale even when the entropies themselves vanish (single-face levels).
pub fn check_entropy_decomposition(
    complex: &PureSimplicialComplex,
    k: usize,
    f: &LevelFunction,
) -> Result<f64> {
    check_nonnegative(f)?;
    let dist = complex.level_distribution(k)?;
    let total = relative_entropy(&dist, f)?;
    let decomp = PairDecomposition::new(complex, k)?;
    let local = local_entropy_sum(&decomp, f)?;
    let projected = project_down(complex, f, k - 2)?;
    let coarse = relative_entropy(&complex.level_distribution(k - 2)?, &projected)?;
    let scale: f64 = (0..f.len())
        .map(|x| dist.get(x) * xlogx(f.get(x)).abs())
        .sum();
    Ok((total - local - coarse).abs() / total.abs().max(scale).max(1e-30))
}

/// `Σ_S π_{k−2}(S) · Ent_{π_{S,2}}{f_S}` over the groups of a pair
/// decomposition.
pub fn local_entropy_sum(decomp: &PairDecomposition, f: &LevelFunction) -> Result<f64> {
    if f.level() != decomp.level() {
        return Err(Error::Dimension(format!(
            "function on level {} against a decomposition at level {}",
            f.level(),
            decomp.level()
        )));
    }
    check_nonnegative(f)?;
    let base = decomp.base_distribution();
    let mut acc = 0.0;
    for (s, group) in decomp.groups() {
        let mut mean = 0.0;
        let mut mean_flogf = 0.0;
        for &(i, p) in group {
            mean += p * f.get(i);
            mean_flogf += p * xlogx(f.get(i));
        }
        acc += base.get(s) * (mean_flogf - xlogx(mean));
    }
    Ok(acc)
}

/// Settings for the ratio minimizer.
#[derive(Clone, Copy, Debug)]
pub struct OptimizerSettings {
    pub restarts: usize,
    pub max_iterations: usize,
    pub grad_tol: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            restarts: DEFAULT_RESTARTS,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            grad_tol: DEFAULT_GRAD_TOL,
        }
    }
}

/// Outcome of minimizing an entropy ratio.
///
/// `value` is the smallest objective value any restart reached: an upper
/// estimate of the true infimum, never a certified bound. `value` is
/// `f64::INFINITY` when the problem is structurally unbounded.
#[derive(Clone, Debug)]
pub struct EntropyEstimate {
    pub value: f64,
    pub minimizing_function: LevelFunction,
    pub restarts_used: usize,
    pub converged: bool,
}

impl EntropyEstimate {
    pub fn is_unbounded(&self) -> bool {
        self.value.is_infinite()
    }
}

/// A smooth ratio objective over log-parameterized positive functions.
///
/// Implementations must be invariant under constant shifts of `g` (ratios of
/// 1-homogeneous functionals of `f = e^g` are), which the optimizer exploits
/// by renormalizing between steps.
pub trait RatioObjective: Sync {
    /// Length of the argument vector `g`.
    fn dimension(&self) -> usize;

    /// Level on which the minimizing function lives.
    fn function_level(&self) -> usize;

    /// Distribution used to normalize `E e^g = 1`.
    fn normalizing_distribution(&self) -> &LevelDistribution;

    fn value(&self, g: &DVector<f64>) -> f64;

    fn value_and_gradient(&self, g: &DVector<f64>) -> (f64, DVector<f64>);

    /// True when the objective extends continuously to functions with zero
    /// entries, so its infimum may sit on the boundary of the positive cone
    /// and is worth chasing with exact support restrictions.
    fn boundary_attainable(&self) -> bool {
        false
    }
}

/// `E_P(f, log f) / Ent_π(f)` for a square reversible operator.
pub struct MlsiObjective {
    op: WalkOperator,
}

impl MlsiObjective {
    /// Errors mirror the spectral gate: non-square or non-reversible
    /// operators and singleton state spaces are rejected.
    pub fn new(op: WalkOperator) -> Result<Self> {
        if !op.is_square() {
            return Err(Error::Dimension("mLSI needs a square operator".to_string()));
        }
        if op.nrows() < 2 {
            return Err(Error::DegenerateStateSpace(format!(
                "state space of size {}",
                op.nrows()
            )));
        }
        let resid = op.detailed_balance_residual()?;
        if resid > REVERSIBILITY_TOL {
            return Err(Error::NotReversible(format!(
                "detailed-balance residual {resid:.3e}"
            )));
        }
        Ok(MlsiObjective { op })
    }

    pub fn operator(&self) -> &WalkOperator {
        &self.op
    }
}

/// Shifts `g` by its largest entry so `exp` cannot overflow; both objective
/// families are invariant under the shift. Entries far enough below the top
/// underflow to an exact zero of `f`, which the objectives treat as the
/// continuous extension onto the restricted support.
fn stabilized_exp(g: &DVector<f64>) -> DVector<f64> {
    let shift = g.max();
    g.map(|x| (x - shift).exp())
}

impl RatioObjective for MlsiObjective {
    fn dimension(&self) -> usize {
        self.op.nrows()
    }

    fn function_level(&self) -> usize {
        self.op.source_level()
    }

    fn normalizing_distribution(&self) -> &LevelDistribution {
        self.op.stationary()
    }

    fn value(&self, g: &DVector<f64>) -> f64 {
        let f = stabilized_exp(g);
        let pi = self.op.stationary().probs();
        let ig = g - self.op.matrix() * g;
        let mut num = 0.0;
        let mut mean = 0.0;
        let mut mean_flogf = 0.0;
        for x in 0..f.len() {
            num += pi[x] * f[x] * ig[x];
            mean += pi[x] * f[x];
            // log f = g − shift; the shift cancels inside Ent.
            if f[x] > 0.0 {
                mean_flogf += pi[x] * f[x] * f[x].ln();
            }
        }
        let den = mean_flogf - xlogx(mean);
        if den <= 0.0 {
            return f64::INFINITY;
        }
        num / den
    }

    fn value_and_gradient(&self, g: &DVector<f64>) -> (f64, DVector<f64>) {
        let f = stabilized_exp(g);
        let pi = self.op.stationary().probs();
        let p = self.op.matrix();
        let ig = g - p * g;
        let n = f.len();

        let mut num = 0.0;
        let mut mean = 0.0;
        let mut mean_flogf = 0.0;
        let mut pif = DVector::zeros(n);
        for x in 0..n {
            pif[x] = pi[x] * f[x];
            num += pif[x] * ig[x];
            mean += pif[x];
            if f[x] > 0.0 {
                mean_flogf += pif[x] * f[x].ln();
            }
        }
        let den = mean_flogf - xlogx(mean);
        if den <= 0.0 {
            return (f64::INFINITY, DVector::zeros(n));
        }

        // d num/d g(z) = π(z)f(z)[(I−P)g](z) + [(I−P)ᵀ(π∘f)](z)
        let pt_pif = p.transpose() * &pif;
        let log_mean = mean.ln();
        let mut grad = DVector::zeros(n);
        for z in 0..n {
            let dnum = pif[z] * ig[z] + (pif[z] - pt_pif[z]);
            let dden = if f[z] > 0.0 {
                pif[z] * (f[z].ln() - log_mean)
            } else {
                0.0
            };
            grad[z] = (dnum * den - num * dden) / (den * den);
        }
        (num / den, grad)
    }
}

/// `Ent_ν(f) / Ent_μ(Uf)` where `U` is a one-level-down projection operator:
/// the local entropy-contraction objective of a link (levels 2 over 1) and
/// the global objective of the theorem (levels `k` over `k−1`) are both of
/// this shape.
pub struct EntropyRatioObjective {
    numerator_dist: LevelDistribution,
    denominator_dist: LevelDistribution,
    up: WalkOperator,
}

impl EntropyRatioObjective {
    pub fn up_operator(&self) -> &WalkOperator {
        &self.up
    }
}

/// Builds the ratio `Ent_{π_L}(f) / Ent_{π_{L−1}}(P↑_{L−1} f)` for functions
/// on level `L` of a complex; `2 ≤ L ≤ d`.
pub fn entropy_ratio_objective(
    complex: &PureSimplicialComplex,
    level: usize,
) -> Result<EntropyRatioObjective> {
    if level < 2 || level > complex.dimension() {
        return Err(Error::LevelOutOfRange(format!(
            "entropy ratio needs 2 ≤ level ≤ d, got level {level}, d={}",
            complex.dimension()
        )));
    }
    Ok(EntropyRatioObjective {
        numerator_dist: complex.level_distribution(level)?,
        denominator_dist: complex.level_distribution(level - 1)?,
        up: up_step(complex, level - 1)?,
    })
}

impl RatioObjective for EntropyRatioObjective {
    fn dimension(&self) -> usize {
        self.up.ncols()
    }

    fn function_level(&self) -> usize {
        self.up.target_level()
    }

    fn normalizing_distribution(&self) -> &LevelDistribution {
        &self.numerator_dist
    }

    fn value(&self, g: &DVector<f64>) -> f64 {
        let f = stabilized_exp(g);
        let nu = self.numerator_dist.probs();
        let mu = self.denominator_dist.probs();
        let h = self.up.matrix() * &f;

        let mut mean_f = 0.0;
        let mut mean_flogf = 0.0;
        for x in 0..f.len() {
            mean_f += nu[x] * f[x];
            if f[x] > 0.0 {
                mean_flogf += nu[x] * f[x] * f[x].ln();
            }
        }
        let num = mean_flogf - xlogx(mean_f);

        let mut mean_h = 0.0;
        let mut mean_hlogh = 0.0;
        for y in 0..h.len() {
            mean_h += mu[y] * h[y];
            mean_hlogh += mu[y] * xlogx(h[y]);
        }
        let den = mean_hlogh - xlogx(mean_h);
        if den <= 0.0 {
            return f64::INFINITY;
        }
        num / den
    }

    fn value_and_gradient(&self, g: &DVector<f64>) -> (f64, DVector<f64>) {
        let f = stabilized_exp(g);
        let nu = self.numerator_dist.probs();
        let mu = self.denominator_dist.probs();
        let m = self.up.matrix();
        let h = m * &f;
        let n = f.len();

        let mut mean_f = 0.0;
        let mut mean_flogf = 0.0;
        for x in 0..n {
            mean_f += nu[x] * f[x];
            if f[x] > 0.0 {
                mean_flogf += nu[x] * f[x] * f[x].ln();
            }
        }
        let num = mean_flogf - xlogx(mean_f);

        let mut mean_h = 0.0;
        let mut mean_hlogh = 0.0;
        for y in 0..h.len() {
            mean_h += mu[y] * h[y];
            mean_hlogh += mu[y] * xlogx(h[y]);
        }
        let den = mean_hlogh - xlogx(mean_h);
        if den <= 0.0 {
            return (f64::INFINITY, DVector::zeros(n));
        }

        // u(y) = μ(y)·log(h(y)/E_μ h); d den/d g(z) = f(z)·(Mᵀu)(z).
        // A zero of h only happens above an all-zero stretch of f, where the
        // product f·Mᵀu vanishes anyway, so those entries of u are dropped.
        let log_mean_h = mean_h.ln();
        let u = DVector::from_fn(h.len(), |y, _| {
            if h[y] > 0.0 {
                mu[y] * (h[y].ln() - log_mean_h)
            } else {
                0.0
            }
        });
        let mt_u = m.transpose() * u;
        let log_mean_f = mean_f.ln();
        let mut grad = DVector::zeros(n);
        for z in 0..n {
            let dnum = if f[z] > 0.0 {
                nu[z] * f[z] * (f[z].ln() - log_mean_f)
            } else {
                0.0
            };
            let dden = f[z] * mt_u[z];
            grad[z] = (dnum * den - num * dden) / (den * den);
        }
        (num / den, grad)
    }

    fn boundary_attainable(&self) -> bool {
        true
    }
}

/// Largest relative disagreement between the analytic gradient and a central
/// finite difference of `value` at `g`.
pub fn gradient_finite_difference_error<O: RatioObjective>(
    obj: &O,
    g: &DVector<f64>,
    step: f64,
) -> f64 {
    let (_, grad) = obj.value_and_gradient(g);
    let mut worst: f64 = 0.0;
    for z in 0..g.len() {
        let mut plus = g.clone();
        plus[z] += step;
        let mut minus = g.clone();
        minus[z] -= step;
        let fd = (obj.value(&plus) - obj.value(&minus)) / (2.0 * step);
        worst = worst.max((fd - grad[z]).abs() / grad[z].abs().max(1e-12));
    }
    worst
}

fn normalize_log(dist: &LevelDistribution, g: &mut DVector<f64>) {
    let f = stabilized_exp(g);
    let shift = g.max();
    let mean: f64 = (0..f.len()).map(|x| dist.get(x) * f[x]).sum();
    let offset = shift + mean.ln();
    for x in 0..g.len() {
        g[x] -= offset;
    }
}

#[derive(Clone)]
struct RestartOutcome {
    value: f64,
    g: DVector<f64>,
    converged: bool,
}

fn run_restart<O: RatioObjective>(
    obj: &O,
    settings: &OptimizerSettings,
    seed: u64,
    stream: u64,
) -> RestartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let g = DVector::from_fn(obj.dimension(), |_, _| rng.sample::<f64, _>(StandardNormal));
    descend_from(obj, settings, g)
}

fn descend_from<O: RatioObjective>(
    obj: &O,
    settings: &OptimizerSettings,
    mut g: DVector<f64>,
) -> RestartOutcome {
    normalize_log(obj.normalizing_distribution(), &mut g);

    let mut eta = 1.0;
    let mut converged = false;
    let mut plateau = 0usize;
    let (mut value, mut grad) = obj.value_and_gradient(&g);
    if !value.is_finite() {
        return RestartOutcome {
            value: f64::INFINITY,
            g,
            converged: false,
        };
    }
    for _ in 0..settings.max_iterations {
        let grad_norm_sq = grad.norm_squared();
        if grad.amax() <= settings.grad_tol {
            converged = true;
            break;
        }
        // Backtracking line search with an Armijo acceptance test.
        let mut accepted = false;
        for _ in 0..60 {
            let mut candidate = &g - eta * &grad;
            normalize_log(obj.normalizing_distribution(), &mut candidate);
            let candidate_value = obj.value(&candidate);
            if candidate_value.is_finite() && candidate_value <= value - 1e-4 * eta * grad_norm_sq {
                if value - candidate_value <= 1e-15 * value.abs().max(1e-300) {
                    plateau += 1;
                } else {
                    plateau = 0;
                }
                g = candidate;
                let next = obj.value_and_gradient(&g);
                value = next.0;
                grad = next.1;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted || plateau >= 10 {
            break;
        }
        // The infimum is often approached only as some coordinates of `g`
        // run to −∞ with exponentially vanishing gradients; the step size
        // must be allowed to grow far beyond O(1) to follow them in.
        eta = (eta * 2.0).min(1e9);
    }
    RestartOutcome {
        value,
        g,
        converged,
    }
}

/// Rounds the trailing coordinates of a near-boundary minimizer down to an
/// exact zero of `f` and re-optimizes on the restricted support.
///
/// A boundary infimum is approached only as some coordinates of `g` run to
/// −∞, and plain descent crawls there at a rate set by the stiff in-support
/// directions. Cutting at the widest log-gap and descending again computes
/// the limit directly; a round that fails to improve is discarded, so
/// interior minimizers are left alone.
fn polish_support<O: RatioObjective>(
    obj: &O,
    settings: &OptimizerSettings,
    mut best: RestartOutcome,
) -> RestartOutcome {
    const MIN_LOG_GAP: f64 = 3.0;
    const SNAP_DEPTH: f64 = 760.0;
    for _ in 0..8 {
        let mut order: Vec<usize> = (0..best.g.len()).collect();
        order.sort_by(|&a, &b| best.g[b].partial_cmp(&best.g[a]).unwrap());
        let top = best.g[order[0]];
        let live: Vec<usize> = order
            .into_iter()
            .filter(|&z| best.g[z] > top - 700.0)
            .collect();
        if live.len() < 2 {
            break;
        }
        let mut split = None;
        let mut widest = MIN_LOG_GAP;
        for i in 0..live.len() - 1 {
            let gap = best.g[live[i]] - best.g[live[i + 1]];
            if gap > widest {
                widest = gap;
                split = Some(i);
            }
        }
        let Some(split) = split else { break };
        let mut g = best.g.clone();
        for &z in &live[split + 1..] {
            g[z] = top - SNAP_DEPTH;
        }
        let out = descend_from(obj, settings, g);
        if out.value.is_finite() && out.value <= best.value {
            best = out;
        } else {
            break;
        }
    }
    best
}

/// Minimizes a ratio objective with seeded random restarts.
///
/// Restart `i` draws its start point from an independent stream of one
/// seeded generator, so results are deterministic for a given
/// `(seed, restarts)` regardless of thread scheduling.
pub fn minimize_ratio<O: RatioObjective>(
    obj: &O,
    settings: &OptimizerSettings,
    seed: u64,
) -> Result<EntropyEstimate> {
    if settings.restarts == 0 {
        return Err(Error::InvalidParameter(
            "optimizer needs at least one restart".to_string(),
        ));
    }
    let outcomes: Vec<RestartOutcome> = (0..settings.restarts)
        .into_par_iter()
        .map(|i| run_restart(obj, settings, seed, i as u64))
        .collect();
    let best = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.value.is_finite())
        .min_by(|(i, a), (j, b)| a.value.partial_cmp(&b.value).unwrap().then(i.cmp(j)));
    let Some((_, best)) = best else {
        return Err(Error::OptimizationFailed(
            "no restart produced a finite objective value".to_string(),
        ));
    };
    let best = if obj.boundary_attainable() {
        polish_support(obj, settings, best.clone())
    } else {
        best.clone()
    };
    let f = stabilized_exp(&best.g);
    Ok(EntropyEstimate {
        value: best.value,
        minimizing_function: LevelFunction::new(obj.function_level(), f),
        restarts_used: settings.restarts,
        converged: best.converged,
    })
}

/// Upper estimate of the modified log-Sobolev constant
/// `ρ(P) = inf E_P(f, log f)/Ent_π(f)`.
pub fn estimate_mlsi(
    op: &WalkOperator,
    settings: &OptimizerSettings,
    seed: u64,
) -> Result<EntropyEstimate> {
    let obj = MlsiObjective::new(op.clone())?;
    minimize_ratio(&obj, settings, seed)
}

/// Upper estimate of a link's entropy contraction factor
/// `ŝ = inf Ent_{π_{S,2}}(f) / Ent_{π_{S,1}}(P↑_{S,1} f)`.
///
/// When the projection sends every function to a constant (single top face),
/// the ratio is unbounded and the estimate carries `value = ∞`.
pub fn estimate_entropy_contraction(
    link: &Link,
    settings: &OptimizerSettings,
    seed: u64,
) -> Result<EntropyEstimate> {
    if link.dimension() < 2 {
        return Err(Error::LevelOutOfRange(format!(
            "entropy contraction needs a link of dimension ≥ 2, got {}",
            link.dimension()
        )));
    }
    let obj = entropy_ratio_objective(link.complex(), 2)?;
    let m = obj.up.matrix();
    let mut row_spread: f64 = 0.0;
    for y in 0..m.ncols() {
        let col = m.column(y);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        row_spread = row_spread.max(hi - lo);
    }
    if row_spread <= 1e-14 {
        let ones = DVector::from_element(obj.dimension(), 1.0);
        return Ok(EntropyEstimate {
            value: f64::INFINITY,
            minimizing_function: LevelFunction::new(obj.function_level(), ones),
            restarts_used: 0,
            converged: true,
        });
    }
    minimize_ratio(&obj, settings, seed)
}

/// Worst (smallest) local entropy contraction estimate over one level.
#[derive(Clone, Debug)]
pub struct LocalFactorSummary {
    pub level: usize,
    /// `min ŝ` over faces whose estimate is finite.
    pub worst_factor: f64,
    pub worst_face: Face,
    /// Faces with structurally unbounded ratios, excluded from the minimum.
    pub skipped: Vec<Face>,
}

/// Everything measured while verifying the local-to-global entropy theorem
/// at one level.
#[derive(Clone, Debug)]
pub struct MainEntReport {
    pub k: usize,
    /// Local contraction estimates for base levels `0, …, k−2`.
    pub local: Vec<LocalFactorSummary>,
    /// `v̂_{k−2}` from the recursion on the estimated factors.
    pub v_hat: f64,
    /// Estimated global infimum of `Ent_{π_k}(f)/Ent_{π_{k−1}}(f^(k−1))`.
    pub global_estimate: f64,
    /// `global_estimate − v_hat`; both sides are upper estimates of infima,
    /// so a clearly negative margin points at an implementation error rather
    /// than at the underlying inequality.
    pub margin: f64,
    /// mLSI estimate for the down-up walk at level `k` and its bound
    /// `1 − 1/v̂_{k−2}`.
    pub mlsi_down_estimate: f64,
    /// mLSI estimate for the up-down walk at level `k−1` (same bound).
    pub mlsi_up_estimate: f64,
    pub mlsi_bound: f64,
    /// For `k = 2` the global problem is definitionally the link problem at
    /// the empty face; this records the gap between the two code paths.
    pub collapse_gap: Option<f64>,
}

fn task_seed(seed: u64, tag: u64, index: u64) -> u64 {
    seed ^ (tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)) ^ (index.wrapping_mul(0xC2B2_AE3D_27D4_EB4F))
}

/// Measures local entropy contraction factors up to level `k−2`, solves the
/// recursion, and compares against a direct estimate of the global ratio,
/// plus the mLSI corollary for both one-level walks.
pub fn verify_main_ent(
    complex: &PureSimplicialComplex,
    k: usize,
    settings: &OptimizerSettings,
    seed: u64,
) -> Result<MainEntReport> {
    let d = complex.dimension();
    if k < 2 || k > d {
        return Err(Error::LevelOutOfRange(format!(
            "theorem range is 2 ≤ k ≤ d, got k={k}, d={d}"
        )));
    }

    let mut local = Vec::with_capacity(k - 1);
    let mut factor_values = Vec::with_capacity(k - 1);
    for level in 0..=(k - 2) {
        let faces = complex.level(level).faces();
        let mut worst: Option<(f64, Face)> = None;
        let mut skipped = Vec::new();
        for (i, face) in faces.iter().enumerate() {
            let link = complex.link(face)?;
            let estimate = estimate_entropy_contraction(
                &link,
                settings,
                task_seed(seed, level as u64 + 1, i as u64),
            )?;
            if estimate.is_unbounded() {
                skipped.push(face.clone());
                continue;
            }
            if worst.as_ref().is_none_or(|(w, _)| estimate.value < *w) {
                worst = Some((estimate.value, face.clone()));
            }
        }
        let Some((worst_factor, worst_face)) = worst else {
            return Err(Error::PreconditionUnmet(format!(
                "every link at level {level} has an unbounded contraction ratio"
            )));
        };
        factor_values.push(worst_factor.max(1.0));
        local.push(LocalFactorSummary {
            level,
            worst_factor,
            worst_face,
            skipped,
        });
    }

    let factors = ContractionFactors::new(factor_values)?;
    let solution = solve_recursion(&factors);
    let v_hat = solution.v()[k - 2];

    let global_obj = entropy_ratio_objective(complex, k)?;
    let global = minimize_ratio(&global_obj, settings, task_seed(seed, 0, 0))?;

    let mlsi_down = estimate_mlsi(&down_up_walk(complex, k)?, settings, task_seed(seed, 0, 1))?;
    let mlsi_up = estimate_mlsi(
        &up_down_walk(complex, k - 1)?,
        settings,
        task_seed(seed, 0, 2),
    )?;

    let collapse_gap = if k == 2 {
        Some((global.value - local[0].worst_factor).abs())
    } else {
        None
    };

    Ok(MainEntReport {
        k,
        local,
        v_hat,
        global_estimate: global.value,
        margin: global.value - v_hat,
        mlsi_down_estimate: mlsi_down.value,
        mlsi_up_estimate: mlsi_up.value,
        mlsi_bound: 1.0 - 1.0 / v_hat,
        collapse_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walks::sample_positive_function;
    use nalgebra::DMatrix;

    fn uniform_dist(level: usize, n: usize) -> LevelDistribution {
        LevelDistribution::new(level, DVector::from_element(n, 1.0 / n as f64))
    }

    #[test]
    fn entropy_basics() {
        let pi = uniform_dist(1, 2);
        let constant = LevelFunction::from_vec(1, vec![3.0, 3.0]);
        assert_eq!(relative_entropy(&pi, &constant).unwrap(), 0.0);

        let f = LevelFunction::from_vec(1, vec![2.0, 0.0]);
        let ent = relative_entropy(&pi, &f).unwrap();
        assert!((ent - 2.0f64.ln()).abs() <= 1e-15);

        let negative = LevelFunction::from_vec(1, vec![1.0, -0.5]);
        assert!(matches!(
            relative_entropy(&pi, &negative),
            Err(Error::NegativeFunction(_))
        ));

        let zero = LevelFunction::from_vec(1, vec![0.0, 0.0]);
        assert_eq!(relative_entropy(&pi, &zero).unwrap(), 0.0);
    }

    #[test]
    fn entropy_is_homogeneous_and_nonnegative() {
        let c = PureSimplicialComplex::random_weighted_complete(6, 3, 1.5, 3).unwrap();
        let pi = c.level_distribution(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let f = sample_positive_function(&c, 2, &mut rng).unwrap();
            let ent = relative_entropy(&pi, &f).unwrap();
            assert!(ent >= 0.0);
            for c_scale in [0.1, 2.0, 17.5] {
                let scaled = LevelFunction::new(2, f.values() * c_scale);
                let scaled_ent = relative_entropy(&pi, &scaled).unwrap();
                assert!((scaled_ent - c_scale * ent).abs() <= 1e-12 * (1.0 + ent));
            }
        }
    }

    #[test]
    fn kl_basics() {
        let pi = uniform_dist(1, 4);
        assert_eq!(kl_divergence(&pi, &pi).unwrap(), 0.0);

        let point = LevelDistribution::new(1, DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]));
        let kl = kl_divergence(&point, &pi).unwrap();
        assert!((kl - 4.0f64.ln()).abs() <= 1e-15);

        assert!(matches!(kl_divergence(&pi, &point), Err(Error::Support(_))));
    }

    #[test]
    fn entropy_equals_kl_of_tilted_measure() {
        let c = PureSimplicialComplex::random_weighted_complete(5, 3, 1.2, 9).unwrap();
        let pi = c.level_distribution(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let raw = sample_positive_function(&c, 1, &mut rng).unwrap();
            let mean: f64 = (0..raw.len()).map(|i| pi.get(i) * raw.get(i)).sum();
            let f = LevelFunction::new(1, raw.values() / mean);
            let tau =
                LevelDistribution::new(1, DVector::from_fn(f.len(), |i, _| pi.get(i) * f.get(i)));
            let ent = relative_entropy(&pi, &f).unwrap();
            let kl = kl_divergence(&tau, &pi).unwrap();
            assert!((ent - kl).abs() <= 1e-12, "{ent} vs {kl}");
        }
    }

    #[test]
    fn entropy_dirichlet_conventions() {
        let c = PureSimplicialComplex::complete(5, 3).unwrap();
        let rw = down_up_walk(&c, 2).unwrap();
        let constant = LevelFunction::constant(2, rw.nrows(), 4.2);
        assert!(entropy_dirichlet(&rw, &constant).unwrap().abs() <= 1e-15);

        // A zero entry reachable from positive mass makes the form infinite.
        let mut vals = vec![1.0; rw.nrows()];
        vals[0] = 0.0;
        let with_zero = LevelFunction::from_vec(2, vals);
        assert!(entropy_dirichlet(&rw, &with_zero).unwrap().is_infinite());

        let all_zero = LevelFunction::constant(2, rw.nrows(), 0.0);
        assert_eq!(entropy_dirichlet(&rw, &all_zero).unwrap(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let f = sample_positive_function(&c, 2, &mut rng).unwrap();
            assert!(entropy_dirichlet(&rw, &f).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn entropy_inequalities_hold() {
        let c = PureSimplicialComplex::random_weighted_complete(6, 3, 1.5, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for k in 1..=3usize {
            for _ in 0..100 {
                let f = sample_positive_function(&c, k, &mut rng).unwrap();
                let down = entropy_inequality_down_margin(&c, k, &f).unwrap();
                assert!(down >= -1e-10, "down at k={k}: {down}");

                let g = sample_positive_function(&c, k - 1, &mut rng).unwrap();
                let up = entropy_inequality_up_margin(&c, k, &g).unwrap();
                assert!(up >= -1e-10, "up at k={k}: {up}");
            }
        }
    }

    #[test]
    fn projection_cannot_increase_entropy() {
        let c = PureSimplicialComplex::random_weighted_complete(6, 3, 2.0, 14).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for k in 1..=3usize {
            for _ in 0..100 {
                let f = sample_positive_function(&c, k, &mut rng).unwrap();
                let ent_k = relative_entropy(&c.level_distribution(k).unwrap(), &f).unwrap();
                let proj = project_down(&c, &f, k - 1).unwrap();
                let ent_km1 =
                    relative_entropy(&c.level_distribution(k - 1).unwrap(), &proj).unwrap();
                assert!(ent_km1 <= ent_k + 1e-10);
            }
        }
    }

    #[test]
    fn entropy_decomposition_holds() {
        let c = PureSimplicialComplex::complete(5, 3).unwrap();
        let weighted = PureSimplicialComplex::random_weighted_complete(6, 3, 1.5, 11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for complex in [&c, &weighted] {
            for k in 2..=3usize {
                for _ in 0..100 {
                    let f = sample_positive_function(complex, k, &mut rng).unwrap();
                    let resid = check_entropy_decomposition(complex, k, &f).unwrap();
                    assert!(resid <= 1e-10, "k={k}: residual {resid}");
                }
                let constant = LevelFunction::constant(k, complex.level(k).len(), 2.0);
                let total =
                    relative_entropy(&complex.level_distribution(k).unwrap(), &constant).unwrap();
                let decomp = PairDecomposition::new(complex, k).unwrap();
                let local = local_entropy_sum(&decomp, &constant).unwrap();
                assert!(total.abs() <= 1e-14 && local.abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn mlsi_of_identity_is_zero() {
        let pi = uniform_dist(1, 3);
        let op = WalkOperator::new(1, 1, DMatrix::identity(3, 3), pi).unwrap();
        let est = estimate_mlsi(
            &op,
            &OptimizerSettings {
                restarts: 4,
                ..Default::default()
            },
            7,
        )
        .unwrap();
        assert!(est.value.abs() <= 1e-12);
        assert!(est.converged);
    }

    #[test]
    fn mlsi_rejects_bad_operators() {
        let pi = uniform_dist(0, 3);
        let mut cycle = DMatrix::zeros(3, 3);
        cycle[(0, 1)] = 1.0;
        cycle[(1, 2)] = 1.0;
        cycle[(2, 0)] = 1.0;
        let op = WalkOperator::new(0, 0, cycle, pi).unwrap();
        assert!(matches!(
            estimate_mlsi(&op, &OptimizerSettings::default(), 1),
            Err(Error::NotReversible(_))
        ));

        let tiny = WalkOperator::new(
            0,
            0,
            DMatrix::identity(1, 1),
            LevelDistribution::new(0, DVector::from_vec(vec![1.0])),
        )
        .unwrap();
        assert!(matches!(
            estimate_mlsi(&tiny, &OptimizerSettings::default(), 1),
            Err(Error::DegenerateStateSpace(_))
        ));
    }

    #[test]
    fn mlsi_matches_grid_oracle_on_two_state_chain() {
        // Rank-one chain: every row equals π.
        let pi = LevelDistribution::new(0, DVector::from_vec(vec![0.3, 0.7]));
        let mut m = DMatrix::zeros(2, 2);
        for x in 0..2 {
            m[(x, 0)] = 0.3;
            m[(x, 1)] = 0.7;
        }
        let op = WalkOperator::new(0, 0, m, pi.clone()).unwrap();
        let obj = MlsiObjective::new(op.clone()).unwrap();

        // Scale invariance lets the grid fix f = (1, t).
        let mut grid_min = f64::INFINITY;
        let mut t = 1e-6f64;
        while t <= 1e6 {
            if (t - 1.0).abs() > 1e-9 {
                let g = DVector::from_vec(vec![0.0, t.ln()]);
                grid_min = grid_min.min(obj.value(&g));
            }
            t *= 1.02;
        }
        let est = estimate_mlsi(&op, &OptimizerSettings::default(), 42).unwrap();
        assert!(est.value > 0.0);
        assert!(
            est.value <= grid_min + 1e-6,
            "optimizer {} vs grid {grid_min}",
            est.value
        );
    }

    #[test]
    fn optimizer_is_deterministic() {
        let c = PureSimplicialComplex::random_weighted_complete(5, 3, 1.0, 19).unwrap();
        let obj = entropy_ratio_objective(&c, 2).unwrap();
        let settings = OptimizerSettings {
            restarts: 8,
            max_iterations: 500,
            ..Default::default()
        };
        let a = minimize_ratio(&obj, &settings, 5).unwrap();
        let b = minimize_ratio(&obj, &settings, 5).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let c = PureSimplicialComplex::random_weighted_complete(5, 3, 1.5, 23).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);

        let ratio = entropy_ratio_objective(&c, 2).unwrap();
        for _ in 0..10 {
            let g = DVector::from_fn(ratio.dimension(), |_, _| {
                rng.sample::<f64, _>(StandardNormal)
            });
            let err = gradient_finite_difference_error(&ratio, &g, 1e-6);
            assert!(err <= 1e-5, "ratio gradient error {err}");
        }

        let mlsi = MlsiObjective::new(down_up_walk(&c, 2).unwrap()).unwrap();
        for _ in 0..10 {
            let g = DVector::from_fn(mlsi.dimension(), |_, _| {
                rng.sample::<f64, _>(StandardNormal)
            });
            let err = gradient_finite_difference_error(&mlsi, &g, 1e-6);
            assert!(err <= 1e-5, "mLSI gradient error {err}");
        }
    }

    #[test]
    fn contraction_estimate_beats_grid_oracle() {
        // Link at the empty face of the full triangle complex: f has three
        // coordinates, one per edge; quotient by constants pins g_0 = 0.
        let c = PureSimplicialComplex::complete(3, 2).unwrap();
        let link = c.link(&Face::empty()).unwrap();
        let obj = entropy_ratio_objective(link.complex(), 2).unwrap();

        let mut grid_min = f64::INFINITY;
        let steps = 240;
        for i in 0..=steps {
            for j in 0..=steps {
                let x = -6.0 + 12.0 * i as f64 / steps as f64;
                let y = -6.0 + 12.0 * j as f64 / steps as f64;
                if x == 0.0 && y == 0.0 {
                    continue;
                }
                let g = DVector::from_vec(vec![0.0, x, y]);
                let v = obj.value(&g);
                if v.is_finite() {
                    grid_min = grid_min.min(v);
                }
            }
        }

        let est = estimate_entropy_contraction(&link, &OptimizerSettings::default(), 42).unwrap();
        assert!(
            est.value >= 1.0 - 1e-9,
            "data processing floor: {}",
            est.value
        );
        assert!(
            est.value <= grid_min + 1e-6,
            "optimizer {} vs grid {grid_min}",
            est.value
        );
    }

    #[test]
    fn single_top_face_link_is_unbounded() {
        // The link of a vertex in a lone tetrahedral face has dimension 2
        // with a single top face, so projection sends everything to a
        // constant and the contraction ratio is unbounded.
        let top = Face::new(vec![0, 1, 2]).unwrap();
        let c = PureSimplicialComplex::from_top_faces(3, 3, vec![(top, 1.0)]).unwrap();
        let link = c.link(&Face::new(vec![0]).unwrap()).unwrap();
        assert_eq!(link.dimension(), 2);
        let est = estimate_entropy_contraction(&link, &OptimizerSettings::default(), 1).unwrap();
        assert!(est.is_unbounded());
        assert_eq!(est.restarts_used, 0);
    }

    #[test]
    fn main_ent_report_on_small_complex() {
        let c = PureSimplicialComplex::complete(4, 2).unwrap();
        let settings = OptimizerSettings {
            restarts: 16,
            max_iterations: 3000,
            grad_tol: 1e-10,
        };
        let report = verify_main_ent(&c, 2, &settings, 42).unwrap();
        assert_eq!(report.local.len(), 1);
        assert!(report.v_hat >= 1.0);
        assert!(report.margin >= -1e-6, "margin {}", report.margin);
        let gap = report.collapse_gap.unwrap();
        assert!(gap <= 1e-6, "collapse gap {gap}");
        assert!(
            report.mlsi_down_estimate >= report.mlsi_bound - 1e-6,
            "mLSI {} vs bound {}",
            report.mlsi_down_estimate,
            report.mlsi_bound
        );
        assert!(report.mlsi_up_estimate >= report.mlsi_bound - 1e-6);
    }

    #[test]
    fn variance_counterpart_sanity() {
        // The entropy ratio of a near-constant positive function approaches
        // the variance ratio; check the estimate is below the value at a
        // specific smooth test point, i.e. genuinely a minimum.
        let c = PureSimplicialComplex::complete(5, 3).unwrap();
        let link = c.link(&Face::new(vec![0]).unwrap()).unwrap();
        let obj = entropy_ratio_objective(link.complex(), 2).unwrap();
        let est = estimate_entropy_contraction(&link, &OptimizerSettings::default(), 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let g = DVector::from_fn(obj.dimension(), |_, _| rng.sample::<f64, _>(StandardNormal));
            let v = obj.value(&g);
            if v.is_finite() {
                assert!(est.value <= v + 1e-9);
            }
        }
    }
}
