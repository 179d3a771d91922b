//! Up/down random walks on the levels of a weighted complex.
//!
//! With `π_k ∝ w` per level, the one-step operators are
//!
//! ```text
//! P↑_k(S, S ∪ {i}) = w(S ∪ {i}) / w(S)      (add an element)
//! P↓_k(S, S \ {i}) = 1 / k                  (remove a uniform element)
//! ```
//!
//! and the composite walks are `RW↑_k = P↑_k P↓_{k+1}` on level `k` and
//! `RW↓_k = P↓_k P↑_{k−1}` on level `k`. Both composites are reversible
//! against `π_k`, and the pair (`RW↑_k`, `RW↓_{k+1}`) shares its nonzero
//! spectrum. The local walk of a face `S` with `|S| ≤ d−2` is
//! `G_S = 2·RW↑_{S,1} − I` on the vertices of the link of `S`, which works
//! out to `G_S(u, v) = w(S ∪ {u,v}) / w(S ∪ {u})` off the diagonal and zero
//! on it.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::complex::{Face, LevelDistribution, Link, PureSimplicialComplex};
use crate::error::{Error, Result};

/// A real-valued function on the faces of one level, indexed like the level.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelFunction {
    level: usize,
    values: DVector<f64>,
}

impl LevelFunction {
    pub fn new(level: usize, values: DVector<f64>) -> Self {
        LevelFunction { level, values }
    }

    pub fn from_vec(level: usize, values: Vec<f64>) -> Self {
        LevelFunction {
            level,
            values: DVector::from_vec(values),
        }
    }

    pub fn constant(level: usize, len: usize, value: f64) -> Self {
        LevelFunction {
            level,
            values: DVector::from_element(len, value),
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.len() == 0
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }
}

/// A dense transition operator between two levels.
///
/// Rows are indexed by source-level faces, columns by target-level faces, and
/// every row sums to one. `stationary` is the source-level distribution; for
/// square operators it is the stationary (and reversing) measure. Operators
/// produced from a link are indexed by the link's own levels.
#[derive(Clone, Debug)]
pub struct WalkOperator {
    source_level: usize,
    target_level: usize,
    matrix: DMatrix<f64>,
    stationary: LevelDistribution,
}

impl WalkOperator {
    /// Wraps an explicit transition matrix as a walk operator.
    ///
    /// `stationary` must match the row count and `matrix` must be row
    /// stochastic (each row summing to one within `1e-9`); the entries are
    /// not otherwise constrained, so hand-built chains can be analyzed with
    /// the same spectral tooling as complex-derived walks.
    pub fn new(
        source_level: usize,
        target_level: usize,
        matrix: DMatrix<f64>,
        stationary: LevelDistribution,
    ) -> Result<Self> {
        if stationary.len() != matrix.nrows() {
            return Err(Error::Dimension(format!(
                "stationary distribution has {} entries for {} rows",
                stationary.len(),
                matrix.nrows()
            )));
        }
        for (i, row) in matrix.row_iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if !(sum - 1.0).abs().is_finite() || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "row {i} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(WalkOperator {
            source_level,
            target_level,
            matrix,
            stationary,
        })
    }

    pub fn source_level(&self) -> usize {
        self.source_level
    }

    pub fn target_level(&self) -> usize {
        self.target_level
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn stationary(&self) -> &LevelDistribution {
        &self.stationary
    }

    pub fn is_square(&self) -> bool {
        self.matrix.nrows() == self.matrix.ncols()
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Applies the operator to a function on the **target** level, returning
    /// its conditional expectation on the source level: `(Pf)(S) = Σ_T P(S,T) f(T)`.
    pub fn apply(&self, f: &LevelFunction) -> Result<LevelFunction> {
        if f.level() != self.target_level || f.len() != self.matrix.ncols() {
            return Err(Error::Dimension(format!(
                "operator maps level {} functions (len {}), got level {} (len {})",
                self.target_level,
                self.matrix.ncols(),
                f.level(),
                f.len()
            )));
        }
        Ok(LevelFunction::new(
            self.source_level,
            &self.matrix * f.values(),
        ))
    }

    /// Max deviation of any row sum from one.
    pub fn row_sum_residual(&self) -> f64 {
        (0..self.matrix.nrows())
            .map(|i| (self.matrix.row(i).sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Max detailed-balance defect `|π_x P(x,y) − π_y P(y,x)|` (square only).
    pub fn detailed_balance_residual(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::Dimension(
                "detailed balance needs a square operator".to_string(),
            ));
        }
        let pi = self.stationary.probs();
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for x in 0..m.nrows() {
            for y in (x + 1)..m.ncols() {
                worst = worst.max((pi[x] * m[(x, y)] - pi[y] * m[(y, x)]).abs());
            }
        }
        Ok(worst)
    }

    /// Max defect of `π P = π'` where `π'` is the given target distribution.
    pub fn stationarity_residual(&self, target: &LevelDistribution) -> Result<f64> {
        if target.len() != self.matrix.ncols() {
            return Err(Error::Dimension(
                "target distribution length does not match operator".to_string(),
            ));
        }
        let pushed = self.matrix.transpose() * self.stationary.probs();
        Ok((pushed - target.probs()).abs().max())
    }
}

/// `P↑_k`: from level `k` up to level `k+1`, adding one element with
/// probability proportional to the resulting face's weight.
pub fn up_step(complex: &PureSimplicialComplex, k: usize) -> Result<WalkOperator> {
    let d = complex.dimension();
    if k >= d {
        return Err(Error::LevelOutOfRange(format!(
            "up step from level {k} of a dimension-{d} complex"
        )));
    }
    let source = complex.level(k);
    let target = complex.level(k + 1);
    let mut m = DMatrix::zeros(source.len(), target.len());
    for (j, face) in target.faces().iter().enumerate() {
        let w_up = target.weight(j);
        for drop in 0..face.cardinality() {
            let sub = face.without_position(drop);
            let i = source.position(&sub).expect("subset closure");
            m[(i, j)] = w_up / source.weight(i);
        }
    }
    Ok(WalkOperator {
        source_level: k,
        target_level: k + 1,
        matrix: m,
        stationary: complex.level_distribution(k)?,
    })
}

/// `P↓_k`: from level `k` down to level `k−1`, removing a uniformly random
/// element.
pub fn down_step(complex: &PureSimplicialComplex, k: usize) -> Result<WalkOperator> {
    if k == 0 || k > complex.dimension() {
        return Err(Error::LevelOutOfRange(format!(
            "down step from level {k} of a dimension-{} complex",
            complex.dimension()
        )));
    }
    let source = complex.level(k);
    let target = complex.level(k - 1);
    let mut m = DMatrix::zeros(source.len(), target.len());
    let p = 1.0 / k as f64;
    for (i, face) in source.faces().iter().enumerate() {
        for drop in 0..k {
            let sub = face.without_position(drop);
            let j = target.position(&sub).expect("subset closure");
            m[(i, j)] = p;
        }
    }
    Ok(WalkOperator {
        source_level: k,
        target_level: k - 1,
        matrix: m,
        stationary: complex.level_distribution(k)?,
    })
}

/// `RW↑_k = P↑_k P↓_{k+1}` on level `k` (add an element, then remove one).
pub fn up_down_walk(complex: &PureSimplicialComplex, k: usize) -> Result<WalkOperator> {
    let up = up_step(complex, k)?;
    let down = down_step(complex, k + 1)?;
    Ok(WalkOperator {
        source_level: k,
        target_level: k,
        matrix: up.matrix * down.matrix,
        stationary: up.stationary,
    })
}

/// `RW↓_k = P↓_k P↑_{k−1}` on level `k` (remove an element, then add one).
pub fn down_up_walk(complex: &PureSimplicialComplex, k: usize) -> Result<WalkOperator> {
    let down = down_step(complex, k)?;
    let up = up_step(complex, k - 1)?;
    Ok(WalkOperator {
        source_level: k,
        target_level: k,
        matrix: down.matrix * up.matrix,
        stationary: down.stationary,
    })
}

/// The local walk `G_S = 2·RW↑_{S,1} − I` on the vertices of the link of `S`.
///
/// Defined for `|S| ≤ d − 2`. Rows are indexed by the link's level-1 faces
/// (singletons keeping the parent's element labels), the stationary
/// distribution is `π_{S,1}`, the diagonal is zero, and
/// `G_S(u, v) = w(S ∪ {u,v}) / w(S ∪ {u})`.
pub fn local_walk(complex: &PureSimplicialComplex, base: &Face) -> Result<WalkOperator> {
    if base.cardinality() + 2 > complex.dimension() {
        return Err(Error::LevelOutOfRange(format!(
            "local walk of {base} needs |S| ≤ d − 2 = {}",
            complex.dimension().saturating_sub(2)
        )));
    }
    local_walk_of_link(&complex.link(base)?)
}

/// [`local_walk`] when the link has already been built.
pub fn local_walk_of_link(link: &Link) -> Result<WalkOperator> {
    if link.dimension() < 2 {
        return Err(Error::LevelOutOfRange(format!(
            "local walk of {} needs a link of dimension ≥ 2, got {}",
            link.base(),
            link.dimension()
        )));
    }
    let rw = up_down_walk(link.complex(), 1)?;
    let n = rw.nrows();
    let matrix = 2.0 * rw.matrix - DMatrix::identity(n, n);
    Ok(WalkOperator {
        source_level: 1,
        target_level: 1,
        matrix,
        stationary: rw.stationary,
    })
}

/// Projects a function on level `k` down to level `i ≤ k` by iterated up
/// steps: `f^(i) = P↑_i ⋯ P↑_{k−1} f`. Level-by-level conditional means, so
/// `E_{π_i} f^(i) = E_{π_k} f`.
pub fn project_down(
    complex: &PureSimplicialComplex,
    f: &LevelFunction,
    i: usize,
) -> Result<LevelFunction> {
    let k = f.level();
    if i > k {
        return Err(Error::InvalidParameter(format!(
            "cannot project a level-{k} function down to level {i}"
        )));
    }
    complex.check_level(k)?;
    if f.len() != complex.level(k).len() {
        return Err(Error::Dimension(format!(
            "function length {} does not match level {k} size {}",
            f.len(),
            complex.level(k).len()
        )));
    }
    let mut g = f.clone();
    for j in (i..k).rev() {
        g = up_step(complex, j)?.apply(&g)?;
    }
    Ok(g)
}

/// Mean of `f` under `dist`.
pub fn expectation(dist: &LevelDistribution, f: &LevelFunction) -> Result<f64> {
    check_aligned(dist, f)?;
    Ok(dist.probs().dot(f.values()))
}

/// Variance of `f` under `dist`.
pub fn variance(dist: &LevelDistribution, f: &LevelFunction) -> Result<f64> {
    check_aligned(dist, f)?;
    let mean = dist.probs().dot(f.values());
    let mean_sq = dist
        .probs()
        .iter()
        .zip(f.values().iter())
        .map(|(p, v)| p * v * v)
        .sum::<f64>();
    Ok(mean_sq - mean * mean)
}

fn check_aligned(dist: &LevelDistribution, f: &LevelFunction) -> Result<()> {
    if dist.level() != f.level() || dist.len() != f.len() {
        return Err(Error::Dimension(format!(
            "distribution on level {} (len {}) vs function on level {} (len {})",
            dist.level(),
            dist.len(),
            f.level(),
            f.len()
        )));
    }
    Ok(())
}

/// Dirichlet form `E_P(f, g) = fᵀ diag(π) (I − P) g` of a square operator.
pub fn dirichlet_form(op: &WalkOperator, f: &LevelFunction, g: &LevelFunction) -> Result<f64> {
    if !op.is_square() {
        return Err(Error::Dimension(
            "Dirichlet form needs a square operator".to_string(),
        ));
    }
    if f.len() != op.nrows() || g.len() != op.nrows() {
        return Err(Error::Dimension(format!(
            "Dirichlet form: operator size {}, function lengths {} and {}",
            op.nrows(),
            f.len(),
            g.len()
        )));
    }
    let pg = op.matrix() * g.values();
    let pi = op.stationary().probs();
    let mut acc = 0.0;
    for x in 0..op.nrows() {
        acc += pi[x] * f.get(x) * (g.get(x) - pg[x]);
    }
    Ok(acc)
}

/// The grouping of level-`k` faces by their level-`(k−2)` subsets, with the
/// conditional two-step distributions `π_{S,2}(T) = 2·w(S ∪ T)/w(S)`.
///
/// This is the data behind the decomposition
///
/// ```text
/// Var_{π_k}{f} = Σ_S π_{k−2}(S)·Var_{π_{S,2}}{f_S} + Var_{π_{k−2}}{f^(k−2)}
/// ```
///
/// (and its entropy analogue), where `f_S(T) = f(S ∪ T)` restricts `f` to the
/// faces above `S`.
pub struct PairDecomposition {
    level: usize,
    base_dist: LevelDistribution,
    /// Per base face: `(level-k face index, conditional probability)`.
    groups: Vec<Vec<(usize, f64)>>,
}

impl PairDecomposition {
    pub fn new(complex: &PureSimplicialComplex, k: usize) -> Result<Self> {
        if k < 2 || k > complex.dimension() {
            return Err(Error::LevelOutOfRange(format!(
                "pair decomposition needs 2 ≤ k ≤ d, got k={k}, d={}",
                complex.dimension()
            )));
        }
        let level = complex.level(k);
        let base = complex.level(k - 2);
        let mut groups: Vec<Vec<(usize, f64)>> = vec![Vec::new(); base.len()];
        for (i, face) in level.faces().iter().enumerate() {
            let w_top = level.weight(i);
            for pair in (0..k).combinations(2) {
                let sub = face.without_position(pair[1]).without_position(pair[0]);
                let s = base.position(&sub).expect("subset closure");
                groups[s].push((i, 2.0 * w_top / base.weight(s)));
            }
        }
        Ok(PairDecomposition {
            level: k,
            base_dist: complex.level_distribution(k - 2)?,
            groups,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn base_distribution(&self) -> &LevelDistribution {
        &self.base_dist
    }

    /// Iterates `(base face index, members)` where members are
    /// `(level-k face index, π_{S,2} probability)`.
    pub fn groups(&self) -> impl Iterator<Item = (usize, &[(usize, f64)])> {
        self.groups
            .iter()
            .enumerate()
            .map(|(s, g)| (s, g.as_slice()))
    }

    /// `Σ_S π_{k−2}(S) · Var_{π_{S,2}}{f_S}`.
    pub fn local_variance_sum(&self, f: &LevelFunction) -> f64 {
        let mut acc = 0.0;
        for (s, group) in self.groups.iter().enumerate() {
            let mut mean = 0.0;
            let mut mean_sq = 0.0;
            for &(i, p) in group {
                let v = f.get(i);
                mean += p * v;
                mean_sq += p * v * v;
            }
            acc += self.base_dist.get(s) * (mean_sq - mean * mean);
        }
        acc
    }

    /// Max defect of the mixture identity
    /// `π_k(I) = Σ_{S ⊂ I, |S|=k−2} π_{k−2}(S)·π_{S,2}(I \ S)`,
    /// relative to `max(π_k(I), 1e-30)`.
    pub fn mixture_identity_residual(&self, level_dist: &LevelDistribution) -> Result<f64> {
        if level_dist.level() != self.level {
            return Err(Error::Dimension(format!(
                "mixture identity: distribution on level {}, decomposition at level {}",
                level_dist.level(),
                self.level
            )));
        }
        let mut mixed = vec![0.0; level_dist.len()];
        for (s, group) in self.groups.iter().enumerate() {
            let base_p = self.base_dist.get(s);
            for &(i, p) in group {
                mixed[i] += base_p * p;
            }
        }
        let mut worst: f64 = 0.0;
        for (i, &m) in mixed.iter().enumerate() {
            let target = level_dist.get(i);
            worst = worst.max((m - target).abs() / target.abs().max(1e-30));
        }
        Ok(worst)
    }
}

/// Relative residual of the variance decomposition at level `k`:
/// `|Var_{π_k}{f} − Σ_S π_{k−2}(S)·Var_{π_{S,2}}{f_S} − Var_{π_{k−2}}{f^(k−2)}|`
/// over `max(|Var_{π_k}{f}|, E_{π_k}{f²}, 1e-30)`. Every variance here is a
/// difference of second-moment-sized quantities, so cancellation noise lives
/// at the second-moment scale even when the variances themselves vanish
/// (single-face levels); the normalizer reflects that. The projected term
/// uses [`project_down`], so the check exercises the two-step conditional
/// means against the link distributions.
pub fn check_variance_decomposition(
    complex: &PureSimplicialComplex,
    k: usize,
    f: &LevelFunction,
) -> Result<f64> {
    let decomp = PairDecomposition::new(complex, k)?;
    variance_decomposition_residual(complex, &decomp, f)
}

/// [`check_variance_decomposition`] against a prebuilt [`PairDecomposition`].
pub fn variance_decomposition_residual(
    complex: &PureSimplicialComplex,
    decomp: &PairDecomposition,
    f: &LevelFunction,
) -> Result<f64> {
    let k = decomp.level();
    let dist = complex.level_distribution(k)?;
    let total = variance(&dist, f)?;
    let local = decomp.local_variance_sum(f);
    let projected = project_down(complex, f, k - 2)?;
    let coarse = variance(decomp.base_distribution(), &projected)?;
    let second: f64 = (0..f.len())
        .map(|x| dist.get(x) * f.get(x) * f.get(x))
        .sum();
    Ok((total - local - coarse).abs() / total.abs().max(second).max(1e-30))
}

/// I.i.d. standard normal function on level `k` from the given generator.
pub fn sample_gaussian_function<R: Rng>(
    complex: &PureSimplicialComplex,
    k: usize,
    rng: &mut R,
) -> Result<LevelFunction> {
    let level = complex.check_level(k)?;
    Ok(LevelFunction::new(
        k,
        DVector::from_iterator(
            level.len(),
            (0..level.len()).map(|_| rng.sample(StandardNormal)),
        ),
    ))
}

/// I.i.d. uniform-[0,1) function on level `k` from the given generator.
pub fn sample_positive_function<R: Rng>(
    complex: &PureSimplicialComplex,
    k: usize,
    rng: &mut R,
) -> Result<LevelFunction> {
    let level = complex.check_level(k)?;
    Ok(LevelFunction::new(
        k,
        DVector::from_iterator(level.len(), (0..level.len()).map(|_| rng.random::<f64>())),
    ))
}
