//! Recursion-based contraction bounds from a local spectral profile.
//!
//! From per-level factors `s_k = 2/(1+a_k)` the recursion
//! `v_0 = s_0, v_k = s_k − (s_k−1)/v_{k−1}` produces the level-`k` bound
//! `γ_k = 1/v_{k−2}`, which is compared against the product-form bound
//! `γ_{k,AL} = 1 − (1/k)·∏_{i=0}^{k−2}(1−a_i)` on admissible profiles.

use rand::Rng;

use crate::error::{Error, Result};
use crate::spectral::SpectralProfile;

/// Slack for the pairwise admissibility condition; profiles produced by
/// iterating the trickling-down bound satisfy it with exact equality, which
/// float evaluation can land on either side of.
pub const ADMISSIBILITY_SLACK: f64 = 1e-12;

/// The sampler keeps drawn profile entries below `1 − SAMPLER_MARGIN`.
pub const SAMPLER_MARGIN: f64 = 1e-3;

/// Per-level contraction factors `s_0, …, s_{d−2}`, each at least 1.
///
/// Variance factors derived from a spectral profile are `s_k = 2/(1+a_k)`;
/// entropy contraction factors are arbitrary reals `≥ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionFactors {
    s: Vec<f64>,
}

impl ContractionFactors {
    pub fn new(s: Vec<f64>) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidParameter(
                "factor list must be nonempty".to_string(),
            ));
        }
        for (k, &v) in s.iter().enumerate() {
            if !v.is_finite() || v < 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "factor s_{k} = {v} must be a finite real ≥ 1"
                )));
            }
        }
        Ok(ContractionFactors { s })
    }

    /// `s_k = 2/(1+a_k)`, requiring `−1 < a_k ≤ 1`.
    ///
    /// Values within `1e-9` above 1 (eigensolver fuzz on disconnected walks)
    /// are treated as exactly 1; anything larger, or any `a_k ≤ −1`, is an
    /// [`Error::InvalidProfile`].
    pub fn from_profile(a: &SpectralProfile) -> Result<Self> {
        let mut s = Vec::with_capacity(a.len());
        for (k, &ak) in a.values().iter().enumerate() {
            if !ak.is_finite() || ak <= -1.0 || ak > 1.0 + 1e-9 {
                return Err(Error::InvalidProfile(format!(
                    "profile entry a_{k} = {ak} outside (−1, 1]"
                )));
            }
            s.push((2.0 / (1.0 + ak.min(1.0))).max(1.0));
        }
        ContractionFactors::new(s)
    }

    pub fn values(&self) -> &[f64] {
        &self.s
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.s[k]
    }

    /// Dimension of a complex carrying these factors (`len + 1`).
    pub fn dimension(&self) -> usize {
        self.s.len() + 1
    }

    /// The profile these factors encode: `a_k = 2/s_k − 1`.
    pub fn implied_profile(&self) -> SpectralProfile {
        SpectralProfile::new(self.s.iter().map(|s| 2.0 / s - 1.0).collect())
    }
}

/// `factors_from_profile` as a free function, for symmetry with the other
/// bound operations.
pub fn factors_from_profile(a: &SpectralProfile) -> Result<ContractionFactors> {
    ContractionFactors::from_profile(a)
}

/// Everything the recursion yields for one factor list.
#[derive(Clone, Debug)]
pub struct ContractionSolution {
    factors: ContractionFactors,
    v: Vec<f64>,
    x: Vec<f64>,
    /// `tail_products[k][i] = S_i^k = ∏_{j=i}^k 1/(s_j−1)`; absent when some
    /// `s_j = 1` makes the products singular.
    tail_products: Option<Vec<Vec<f64>>>,
    closed_form_v: Option<Vec<f64>>,
    singular: bool,
    our_bounds: Vec<f64>,
    al_bounds: Vec<f64>,
}

impl ContractionSolution {
    pub fn factors(&self) -> &ContractionFactors {
        &self.factors
    }

    /// `v_k` from the recursion, the source of truth.
    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// `x_k` from its own recurrence `x_k = x_{k−1}/(s_k−1) + 1`; `+∞` past a
    /// singular factor.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn tail_products(&self) -> Option<&[Vec<f64>]> {
        self.tail_products.as_deref()
    }

    /// Closed form `v_k = 1 + 1/Σ_{i=0}^k S_i^k`, absent for singular factor
    /// lists.
    pub fn closed_form_v(&self) -> Option<&[f64]> {
        self.closed_form_v.as_deref()
    }

    /// True when some `s_k = 1`; the recursion still holds but products of
    /// `1/(s_j−1)` do not.
    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// `γ_k = 1/v_{k−2}` for `k = 2, …, d`, indexed by `k−2`.
    pub fn our_bounds(&self) -> &[f64] {
        &self.our_bounds
    }

    /// `γ_{k,AL}` for `k = 2, …, d`, indexed by `k−2`.
    pub fn al_bounds(&self) -> &[f64] {
        &self.al_bounds
    }

    pub fn dimension(&self) -> usize {
        self.factors.dimension()
    }

    fn check_level(&self, k: usize) -> Result<usize> {
        let d = self.dimension();
        if k < 2 || k > d {
            return Err(Error::LevelOutOfRange(format!(
                "bound index k={k} outside 2..={d}"
            )));
        }
        Ok(k - 2)
    }

    /// The recursion bound `γ_k = 1/v_{k−2}` for one level, `2 ≤ k ≤ d`.
    pub fn our_bound_at(&self, k: usize) -> Result<f64> {
        Ok(self.our_bounds[self.check_level(k)?])
    }

    pub fn al_bound_at(&self, k: usize) -> Result<f64> {
        Ok(self.al_bounds[self.check_level(k)?])
    }

    /// Largest relative disagreement between the recursion and the closed
    /// form, when the latter exists.
    pub fn recursion_closed_form_residual(&self) -> Option<f64> {
        let cf = self.closed_form_v.as_ref()?;
        Some(
            self.v
                .iter()
                .zip(cf)
                .map(|(a, b)| (a - b).abs() / a.abs().max(1e-30))
                .fold(0.0, f64::max),
        )
    }
}

/// Runs the `v` and `x` recursions and assembles both bound families.
pub fn solve_recursion(factors: &ContractionFactors) -> ContractionSolution {
    let s = factors.values();
    let n = s.len();
    let singular = s.contains(&1.0);

    let mut v = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    for k in 0..n {
        let vk = if k == 0 {
            s[0]
        } else {
            s[k] - (s[k] - 1.0) / v[k - 1]
        };
        v.push(vk);
        let xk = if k == 0 {
            s[0] / (s[0] - 1.0)
        } else {
            x[k - 1] / (s[k] - 1.0) + 1.0
        };
        x.push(xk);
    }

    let (tail_products, closed_form_v) = if singular {
        (None, None)
    } else {
        let mut products = Vec::with_capacity(n);
        let mut closed = Vec::with_capacity(n);
        for k in 0..n {
            let mut row = vec![0.0; k + 1];
            row[k] = 1.0 / (s[k] - 1.0);
            for i in (0..k).rev() {
                row[i] = row[i + 1] / (s[i] - 1.0);
            }
            let sum: f64 = row.iter().sum();
            closed.push(1.0 + 1.0 / sum);
            products.push(row);
        }
        (Some(products), Some(closed))
    };

    let our_bounds: Vec<f64> = v.iter().map(|vk| 1.0 / vk).collect();
    let a = factors.implied_profile();
    let al_bounds: Vec<f64> = (2..=(n + 1)).map(|k| al_bound_unchecked(&a, k)).collect();

    ContractionSolution {
        factors: factors.clone(),
        v,
        x,
        tail_products,
        closed_form_v,
        singular,
        our_bounds,
        al_bounds,
    }
}

/// `γ_k = 1/v_{k−2}` computed from scratch; `2 ≤ k ≤ d`.
pub fn our_bound(factors: &ContractionFactors, k: usize) -> Result<f64> {
    solve_recursion(factors).our_bound_at(k)
}

fn al_bound_unchecked(a: &SpectralProfile, k: usize) -> f64 {
    let product: f64 = a.values()[..=(k - 2)].iter().map(|ai| 1.0 - ai).product();
    1.0 - product / k as f64
}

/// The product-form bound `γ_{k,AL} = 1 − (1/k)·∏_{i=0}^{k−2}(1−a_i)`;
/// `2 ≤ k ≤ d`.
pub fn al_bound(a: &SpectralProfile, k: usize) -> Result<f64> {
    let d = a.dimension();
    if k < 2 || k > d {
        return Err(Error::LevelOutOfRange(format!(
            "bound index k={k} outside 2..={d}"
        )));
    }
    Ok(al_bound_unchecked(a, k))
}

/// The level-`k` bound implied by a uniform top-level guarantee `γ`:
/// `1 − (1/k)·(1−(d−1)γ)/(1−(d−k)γ)`, valid for `0 ≤ γ ≤ 1/(d−1)` and
/// `2 ≤ k ≤ d`.
pub fn trickling_profile_bound(gamma: f64, d: usize, k: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "bound needs dimension ≥ 2, got {d}"
        )));
    }
    if !gamma.is_finite() || gamma < 0.0 || gamma > 1.0 / (d as f64 - 1.0) {
        return Err(Error::PreconditionUnmet(format!(
            "bound needs 0 ≤ γ ≤ 1/(d−1), got γ={gamma}, d={d}"
        )));
    }
    if k < 2 || k > d {
        return Err(Error::LevelOutOfRange(format!(
            "bound index k={k} outside 2..={d}"
        )));
    }
    let g = gamma;
    Ok(1.0 - (1.0 - (d as f64 - 1.0) * g) / (1.0 - (d - k) as f64 * g) / k as f64)
}

/// Index of the first admissibility violation: `a_i ≥ 1` reports `i`, a
/// failed pairwise condition `a_{i−1} ≤ a_i/(1−a_i)` reports `i`. Both are
/// checked with [`ADMISSIBILITY_SLACK`].
pub fn first_admissibility_violation(a: &SpectralProfile) -> Option<usize> {
    let vals = a.values();
    for (i, &ai) in vals.iter().enumerate() {
        if ai >= 1.0 {
            return Some(i);
        }
        if i > 0 && vals[i - 1] > ai / (1.0 - ai) + ADMISSIBILITY_SLACK {
            return Some(i);
        }
    }
    None
}

pub fn is_admissible(a: &SpectralProfile) -> bool {
    first_admissibility_violation(a).is_none()
}

/// `a_k(k+1) + ∏_{i=0}^k(1−a_i) − 1`, nonnegative (within `1e-12`) on
/// admissible profiles and zero on profiles where the pairwise condition is
/// tight.
///
/// Panics if `k` is not a valid profile index.
pub fn check_profile_property(a: &SpectralProfile, k: usize) -> f64 {
    let vals = a.values();
    let product: f64 = vals[..=k].iter().map(|ai| 1.0 - ai).product();
    vals[k] * (k + 1) as f64 + product - 1.0
}

/// One row of the bound comparison table.
#[derive(Clone, Debug)]
pub struct BoundComparison {
    pub k: usize,
    pub ours: f64,
    pub al: f64,
    /// `ours − al`; nonnegative on admissible profiles.
    pub gap: f64,
}

/// Per-level comparison `γ_k ≥ γ_{k,AL}` over `k = 2, …, d`.
///
/// The inequality needs admissibility; an inadmissible profile is an
/// [`Error::Admissibility`] carrying the first violating index.
pub fn compare_bounds(a: &SpectralProfile) -> Result<Vec<BoundComparison>> {
    if let Some(index) = first_admissibility_violation(a) {
        return Err(Error::Admissibility { index });
    }
    let solution = solve_recursion(&ContractionFactors::from_profile(a)?);
    Ok((2..=a.dimension())
        .map(|k| {
            let ours = solution.our_bounds()[k - 2];
            let al = solution.al_bounds()[k - 2];
            BoundComparison {
                k,
                ours,
                al,
                gap: ours - al,
            }
        })
        .collect())
}

/// Draws a profile from the interior of the admissible set: the top entry
/// is uniform in `(0, 1−δ)` and each earlier entry uniform in
/// `[0, min(a_i/(1−a_i), 1−δ)]`, with `δ =` [`SAMPLER_MARGIN`].
pub fn sample_admissible_profile<R: Rng + ?Sized>(len: usize, rng: &mut R) -> SpectralProfile {
    assert!(len > 0, "profile must have at least one entry");
    let cap = 1.0 - SAMPLER_MARGIN;
    let mut values = vec![0.0; len];
    values[len - 1] = rng.random::<f64>() * cap;
    for i in (0..len.saturating_sub(1)).rev() {
        let next = values[i + 1];
        let hi = (next / (1.0 - next)).min(cap);
        values[i] = rng.random::<f64>() * hi;
    }
    SpectralProfile::new(values)
}
