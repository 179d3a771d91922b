//! Spectra of reversible walk operators and local spectral profiles.
//!
//! A reversible operator `P` with stationary measure `π` is symmetrized as
//! `A = D^{1/2} P D^{−1/2}` (`D = diag(π)`), eigensolved with cyclic Jacobi
//! rotations, and its eigenfunctions mapped back through `D^{−1/2}`. The
//! local spectral profile of a complex is `a_k = max { λ₂(G_S) : |S| = k }`
//! for `k = 0, …, d−2`, and the trickling-down check verifies that a bound
//! `γ` at level `k` forces `λ₂(G_S) ≤ γ/(1−γ)` one level below.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::complex::{Face, PureSimplicialComplex};
use crate::error::{Error, Result};
use crate::walks::{dirichlet_form, local_walk, variance, LevelFunction, WalkOperator};

/// Convergence threshold for the Jacobi sweep: off-diagonal Frobenius norm.
pub const JACOBI_OFFDIAG_TOL: f64 = 1e-13;

/// Detailed-balance residual above which an operator is rejected as
/// non-reversible.
pub const REVERSIBILITY_TOL: f64 = 1e-8;

/// `λ₂ ≥ 1 − DISCONNECTION_TOL` marks a walk as disconnected.
pub const DISCONNECTION_TOL: f64 = 1e-9;

/// Eigenvalues (descending) and matching eigenvector columns of a symmetric
/// matrix.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Sweeps pivots in fixed row-major order until the off-diagonal Frobenius
/// norm drops below [`JACOBI_OFFDIAG_TOL`]; results are deterministic for a
/// given input. Only the symmetric part of `m` is meaningful.
pub fn jacobi_symmetric_eigen(m: &DMatrix<f64>) -> EigenDecomposition {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "eigensolver needs a square matrix");
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);

    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| 2.0 * a[(p, q)] * a[(p, q)])
            .sum::<f64>()
            .sqrt();
        if off < JACOBI_OFFDIAG_TOL {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                // tan of the rotation angle; the 1/(2θ) branch avoids
                // overflowing θ².
                let t = if theta.abs() > 1e150 {
                    1.0 / (2.0 * theta)
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                let app = a[(p, p)];
                let aqq = a[(q, q)];
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = arp - s * (arq + tau * arp);
                    a[(p, r)] = a[(r, p)];
                    a[(r, q)] = arq + s * (arp - tau * arq);
                    a[(q, r)] = a[(r, q)];
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * c - vrq * s;
                    v[(r, q)] = vrp * s + vrq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    EigenDecomposition { values, vectors }
}

/// Full spectrum of a reversible operator, with eigenfunctions in the
/// original (non-symmetrized) coordinates: column `i` satisfies
/// `P f_i = λ_i f_i`.
#[derive(Clone, Debug)]
pub struct ReversibleEigen {
    pub values: Vec<f64>,
    pub functions: DMatrix<f64>,
}

/// Eigensolves a square reversible operator through its symmetrization.
///
/// Errors: [`Error::DegenerateStateSpace`] for state spaces smaller than 2,
/// [`Error::NotReversible`] when the detailed-balance residual exceeds
/// [`REVERSIBILITY_TOL`], [`Error::InvalidParameter`] for a stationary
/// distribution with non-positive mass.
pub fn reversible_eigen(op: &WalkOperator) -> Result<ReversibleEigen> {
    if !op.is_square() {
        return Err(Error::Dimension(
            "spectrum of a non-square operator".to_string(),
        ));
    }
    let n = op.nrows();
    if n < 2 {
        return Err(Error::DegenerateStateSpace(format!(
            "state space of size {n}"
        )));
    }
    let pi = op.stationary().probs();
    if pi.iter().any(|&p| p <= 0.0 || !p.is_finite()) {
        return Err(Error::InvalidParameter(
            "stationary distribution must be strictly positive".to_string(),
        ));
    }
    let resid = op.detailed_balance_residual()?;
    if resid > REVERSIBILITY_TOL {
        return Err(Error::NotReversible(format!(
            "detailed-balance residual {resid:.3e}"
        )));
    }

    let sqrt_pi: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    let p = op.matrix();
    let mut sym = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            sym[(x, y)] = sqrt_pi[x] * p[(x, y)] / sqrt_pi[y];
        }
    }
    // Detailed balance makes this symmetric up to the residual; average out
    // the remainder so the Jacobi input is exactly symmetric.
    for x in 0..n {
        for y in (x + 1)..n {
            let avg = 0.5 * (sym[(x, y)] + sym[(y, x)]);
            sym[(x, y)] = avg;
            sym[(y, x)] = avg;
        }
    }

    let eig = jacobi_symmetric_eigen(&sym);
    let mut functions = eig.vectors;
    for x in 0..n {
        for col in 0..n {
            functions[(x, col)] /= sqrt_pi[x];
        }
    }
    Ok(ReversibleEigen {
        values: eig.values,
        functions,
    })
}

/// Second-largest eigenvalue (with multiplicity) of a reversible operator.
pub fn second_eigenvalue(op: &WalkOperator) -> Result<f64> {
    Ok(reversible_eigen(op)?.values[1])
}

/// Second eigenvalue together with its eigenfunction.
pub fn second_eigenpair(op: &WalkOperator) -> Result<(f64, LevelFunction)> {
    let eig = reversible_eigen(op)?;
    let f = LevelFunction::new(op.source_level(), eig.functions.column(1).into_owned());
    Ok((eig.values[1], f))
}

/// The local spectral profile `(a_0, …, a_{d−2})`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralProfile {
    values: Vec<f64>,
}

impl SpectralProfile {
    pub fn new(values: Vec<f64>) -> Self {
        SpectralProfile { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Dimension of a complex carrying this profile.
    pub fn dimension(&self) -> usize {
        self.values.len() + 1
    }

    /// Entrywise `max(a_k, 0)`: negative correlations only help, so bounds
    /// may be evaluated on the clamped profile.
    pub fn clamped_nonnegative(&self) -> SpectralProfile {
        SpectralProfile {
            values: self.values.iter().map(|a| a.max(0.0)).collect(),
        }
    }
}

/// One measured local walk: the face, its level, and `λ₂(G_S)`.
#[derive(Clone, Debug)]
pub struct ProfileWitness {
    pub level: usize,
    pub face: Face,
    pub lambda2: f64,
}

/// Result of measuring the spectral profile of a complex.
#[derive(Clone, Debug)]
pub struct ProfileMeasurement {
    pub profile: SpectralProfile,
    /// Per level, the face attaining the maximum.
    pub witnesses: Vec<ProfileWitness>,
    /// Faces whose local walk is disconnected (`λ₂ ≥ 1 − 1e-9`); they still
    /// enter the profile maxima but invalidate contraction bounds.
    pub disconnected: Vec<(usize, Face)>,
}

/// `λ₂(G_S)` for every face of level `k`, in face order.
fn level_local_lambda2(complex: &PureSimplicialComplex, k: usize) -> Result<Vec<f64>> {
    let faces = complex.level(k).faces();
    faces
        .par_iter()
        .map(|s| second_eigenvalue(&local_walk(complex, s)?))
        .collect()
}

/// Measures `a_k = max_{|S|=k} λ₂(G_S)` for `k = 0, …, d−2`.
pub fn measure_spectral_profile(complex: &PureSimplicialComplex) -> Result<ProfileMeasurement> {
    let d = complex.dimension();
    if d < 2 {
        return Err(Error::LevelOutOfRange(format!(
            "spectral profile needs dimension ≥ 2, got {d}"
        )));
    }
    let mut values = Vec::with_capacity(d - 1);
    let mut witnesses = Vec::with_capacity(d - 1);
    let mut disconnected = Vec::new();
    for k in 0..=(d - 2) {
        let lambdas = level_local_lambda2(complex, k)?;
        let faces = complex.level(k).faces();
        let (best, &a_k) = lambdas
            .iter()
            .enumerate()
            .max_by(|(i, x), (j, y)| x.partial_cmp(y).unwrap().then(j.cmp(i)))
            .expect("levels below d are nonempty");
        values.push(a_k);
        witnesses.push(ProfileWitness {
            level: k,
            face: faces[best].clone(),
            lambda2: a_k,
        });
        for (i, &l) in lambdas.iter().enumerate() {
            if l >= 1.0 - DISCONNECTION_TOL {
                disconnected.push((k, faces[i].clone()));
            }
        }
    }
    Ok(ProfileMeasurement {
        profile: SpectralProfile::new(values),
        witnesses,
        disconnected,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TricklingStatus {
    Checked,
    /// Local walk disconnected; the bound does not apply to this face.
    Disconnected,
}

#[derive(Clone, Debug)]
pub struct TricklingRow {
    pub face: Face,
    pub lambda2: f64,
    pub status: TricklingStatus,
}

/// Outcome of a trickling-down check from level `k` to level `k−1`.
#[derive(Clone, Debug)]
pub struct TricklingCheck {
    /// The hypothesis level `k`.
    pub level: usize,
    /// Measured `max λ₂(G_T)` over level `k`.
    pub gamma_raw: f64,
    /// `max(gamma_raw, 0)`; the bound is monotone so clamping is sound.
    pub gamma: f64,
    /// `γ/(1−γ)`.
    pub bound: f64,
    /// Level `k−1` faces with their measured `λ₂(G_S)`.
    pub rows: Vec<TricklingRow>,
    /// `min(bound − λ₂)` over checked rows; `+∞` when every row is skipped.
    pub worst_margin: f64,
}

/// Verifies the level-`k` to level-`k−1` trickling-down bound:
/// if `λ₂(G_T) ≤ γ < 1` for all `|T| = k` then every connected `G_S` one
/// level below has `λ₂(G_S) ≤ γ/(1−γ)`.
///
/// Valid for `1 ≤ k ≤ d−2` (both levels must carry local walks). A
/// disconnected walk at level `k` makes the hypothesis vacuous and is
/// reported as [`Error::PreconditionUnmet`].
pub fn trickling_down_check(complex: &PureSimplicialComplex, k: usize) -> Result<TricklingCheck> {
    let d = complex.dimension();
    if k < 1 || k + 2 > d {
        return Err(Error::LevelOutOfRange(format!(
            "trickling-down check needs 1 ≤ k ≤ d−2, got k={k}, d={d}"
        )));
    }
    let upper = level_local_lambda2(complex, k)?;
    let gamma_raw = upper.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if gamma_raw >= 1.0 - DISCONNECTION_TOL {
        return Err(Error::PreconditionUnmet(format!(
            "level {k} has a local walk with λ₂ = {gamma_raw} ≥ 1 − {DISCONNECTION_TOL:.0e}"
        )));
    }
    let gamma = gamma_raw.max(0.0);
    let bound = gamma / (1.0 - gamma);

    let lower = level_local_lambda2(complex, k - 1)?;
    let faces = complex.level(k - 1).faces();
    let mut rows = Vec::with_capacity(lower.len());
    let mut worst_margin = f64::INFINITY;
    for (i, &lambda2) in lower.iter().enumerate() {
        let status = if lambda2 >= 1.0 - DISCONNECTION_TOL {
            TricklingStatus::Disconnected
        } else {
            worst_margin = worst_margin.min(bound - lambda2);
            TricklingStatus::Checked
        };
        rows.push(TricklingRow {
            face: faces[i].clone(),
            lambda2,
            status,
        });
    }
    Ok(TricklingCheck {
        level: k,
        gamma_raw,
        gamma,
        bound,
        rows,
        worst_margin,
    })
}

/// The profile forced by iterating the trickling-down bound from the top:
/// `a_j = γ / (1 − (d−j−2)·γ)` for `j = 0, …, d−2`, valid for
/// `0 ≤ γ ≤ 1/(d−1)`.
pub fn trickling_down_propagate(gamma: f64, d: usize) -> Result<SpectralProfile> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "profile propagation needs dimension ≥ 2, got {d}"
        )));
    }
    if !gamma.is_finite() || gamma < 0.0 || gamma > 1.0 / (d as f64 - 1.0) {
        return Err(Error::PreconditionUnmet(format!(
            "propagation needs 0 ≤ γ ≤ 1/(d−1), got γ={gamma}, d={d}"
        )));
    }
    let values = (0..=(d - 2))
        .map(|j| gamma / (1.0 - (d - j - 2) as f64 * gamma))
        .collect();
    Ok(SpectralProfile::new(values))
}

/// Residual (relative to the largest entry) of the measure decomposition
/// `π_1(u) = Σ_v π_1(v)·π_{v,1}(u)` over vertex links.
pub fn up_decomposition_d_residual(complex: &PureSimplicialComplex) -> Result<f64> {
    if complex.dimension() < 2 {
        return Err(Error::LevelOutOfRange(
            "measure decomposition needs dimension ≥ 2".to_string(),
        ));
    }
    let verts = complex.level(1);
    let pi1 = complex.level_distribution(1)?;
    let mut mixed = vec![0.0; verts.len()];
    for (vi, v) in verts.faces().iter().enumerate() {
        let link = complex.link(v)?;
        let link_verts = link.complex().level(1);
        let link_pi = link.complex().level_distribution(1)?;
        for (ui, u) in link_verts.faces().iter().enumerate() {
            let global = verts.position(u).expect("link vertices are vertices");
            mixed[global] += pi1.get(vi) * link_pi.get(ui);
        }
    }
    let scale = (0..verts.len())
        .map(|i| pi1.get(i).abs())
        .fold(1e-30, f64::max);
    Ok((0..verts.len())
        .map(|i| (mixed[i] - pi1.get(i)).abs())
        .fold(0.0, f64::max)
        / scale)
}

/// Residual of the row identity `G_∅(v, ·) = π_{v,1}` (extended by zeros).
pub fn local_row_identity_residual(complex: &PureSimplicialComplex) -> Result<f64> {
    let g = local_walk(complex, &Face::empty())?;
    let verts = complex.level(1);
    let mut worst: f64 = 0.0;
    for (vi, v) in verts.faces().iter().enumerate() {
        let link = complex.link(v)?;
        let link_pi = link.complex().level_distribution(1)?;
        let link_verts = link.complex().level(1);
        let mut row = vec![0.0; verts.len()];
        for (ui, u) in link_verts.faces().iter().enumerate() {
            row[verts.position(u).expect("vertex")] = link_pi.get(ui);
        }
        for (u, &expected) in row.iter().enumerate() {
            worst = worst.max((g.matrix()[(vi, u)] - expected).abs());
        }
    }
    Ok(worst)
}

/// Residual (relative to the largest entry of `D_1 G_∅`) of the operator
/// decomposition `D_1 G_∅ = Σ_v π_1(v) · D̄_{v,1} Ḡ_v`, where the bars extend
/// link-indexed matrices by zeros to the full vertex set.
pub fn up_decomposition_g_residual(complex: &PureSimplicialComplex) -> Result<f64> {
    if complex.dimension() < 3 {
        return Err(Error::LevelOutOfRange(
            "operator decomposition needs dimension ≥ 3".to_string(),
        ));
    }
    let verts = complex.level(1);
    let n = verts.len();
    let pi1 = complex.level_distribution(1)?;
    let g0 = local_walk(complex, &Face::empty())?;

    let mut lhs = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            lhs[(x, y)] = pi1.get(x) * g0.matrix()[(x, y)];
        }
    }
    let mut rhs = DMatrix::zeros(n, n);
    for (vi, v) in verts.faces().iter().enumerate() {
        let link = complex.link(v)?;
        let gv = crate::walks::local_walk_of_link(&link)?;
        let link_pi = link.complex().level_distribution(1)?;
        let link_verts = link.complex().level(1);
        let global: Vec<usize> = link_verts
            .faces()
            .iter()
            .map(|u| verts.position(u).expect("vertex"))
            .collect();
        for (xi, &gx) in global.iter().enumerate() {
            let weight = pi1.get(vi) * link_pi.get(xi);
            for (yi, &gy) in global.iter().enumerate() {
                rhs[(gx, gy)] += weight * gv.matrix()[(xi, yi)];
            }
        }
    }
    let scale = lhs.iter().map(|e| e.abs()).fold(1e-30, f64::max);
    Ok((&lhs - &rhs).iter().map(|e| e.abs()).fold(0.0, f64::max) / scale)
}

/// Residual of the Dirichlet-form decomposition
/// `E_{G_∅}(f, f) = Σ_v π_1(v)·E_{G_v}(f_v, f_v)` for a vertex function `f`,
/// relative to `max(|LHS|, 1e-30)`.
pub fn dirichlet_decomposition_residual(
    complex: &PureSimplicialComplex,
    f: &LevelFunction,
) -> Result<f64> {
    if complex.dimension() < 3 {
        return Err(Error::LevelOutOfRange(
            "Dirichlet decomposition needs dimension ≥ 3".to_string(),
        ));
    }
    let g0 = local_walk(complex, &Face::empty())?;
    let lhs = dirichlet_form(&g0, f, f)?;
    let verts = complex.level(1);
    let pi1 = complex.level_distribution(1)?;
    let mut rhs = 0.0;
    for (vi, v) in verts.faces().iter().enumerate() {
        let link = complex.link(v)?;
        let gv = crate::walks::local_walk_of_link(&link)?;
        let link_verts = link.complex().level(1);
        let restricted = LevelFunction::from_vec(
            1,
            link_verts
                .faces()
                .iter()
                .map(|u| f.get(verts.position(u).expect("vertex")))
                .collect(),
        );
        rhs += pi1.get(vi) * dirichlet_form(&gv, &restricted, &restricted)?;
    }
    Ok((lhs - rhs).abs() / lhs.abs().max(1e-30))
}

/// Worst margin of the spectral contraction step: for every eigenvalue `λ`
/// of `G_∅` and `γ = max_v λ₂(G_v)`, the trickling-down proof needs
/// `(1 − λ) ≥ (1 − γ)(1 − λ²)`. Returns the minimum of LHS − RHS.
pub fn eigenvalue_relation_margin(complex: &PureSimplicialComplex) -> Result<f64> {
    if complex.dimension() < 3 {
        return Err(Error::LevelOutOfRange(
            "eigenvalue relation needs dimension ≥ 3".to_string(),
        ));
    }
    let gamma = level_local_lambda2(complex, 1)?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let g0 = local_walk(complex, &Face::empty())?;
    let eig = reversible_eigen(&g0)?;
    Ok(eig
        .values
        .iter()
        .map(|&l| (1.0 - l) - (1.0 - gamma) * (1.0 - l * l))
        .fold(f64::INFINITY, f64::min))
}

/// Poincaré diagnostics for one reversible operator: the Rayleigh quotient
/// `E(f,f)/Var(f)` of the second eigenfunction must equal `1 − λ₂`, and it
/// lower-bounds the quotient of arbitrary functions.
pub fn poincare_eigen_gap(op: &WalkOperator) -> Result<(f64, f64)> {
    let (lambda2, f) = second_eigenpair(op)?;
    let var = variance(op.stationary(), &f)?;
    let quotient = dirichlet_form(op, &f, &f)? / var;
    Ok((1.0 - lambda2, quotient))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walks::{down_up_walk, sample_gaussian_function, up_down_walk};
    use nalgebra::DVector;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn jacobi_on_diagonal_matrix_is_exact() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -1.0, 2.0]));
        let eig = jacobi_symmetric_eigen(&m);
        assert_eq!(eig.values, vec![3.0, 2.0, -1.0]);
    }

    #[test]
    fn jacobi_matches_library_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for n in [2usize, 3, 5, 8, 13] {
            let mut m = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for j in 0..=i {
                    let x: f64 = rng.random::<f64>() * 2.0 - 1.0;
                    m[(i, j)] = x;
                    m[(j, i)] = x;
                }
            }
            let ours = jacobi_symmetric_eigen(&m);
            let mut theirs = nalgebra::SymmetricEigen::new(m.clone())
                .eigenvalues
                .iter()
                .copied()
                .collect::<Vec<f64>>();
            theirs.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (a, b) in ours.values.iter().zip(&theirs) {
                assert!((a - b).abs() <= 1e-11, "n={n}: {a} vs {b}");
            }
            // Residual ‖Mv − λv‖ per eigenpair.
            for i in 0..n {
                let v = ours.vectors.column(i);
                let resid = (&m * v - ours.values[i] * v).norm();
                assert!(resid <= 1e-10, "n={n}, pair {i}: residual {resid}");
            }
        }
    }

    #[test]
    fn complete_graph_walk_second_eigenvalue() {
        // Non-lazy walk on K_m: λ₂ = −1/(m−1).
        for m in 2..=6usize {
            let c = PureSimplicialComplex::complete(m, 2).unwrap();
            let g = local_walk(&c, &Face::empty()).unwrap();
            let l2 = second_eigenvalue(&g).unwrap();
            let expect = -1.0 / (m as f64 - 1.0);
            assert!((l2 - expect).abs() <= 1e-12, "m={m}: {l2} vs {expect}");
        }
    }

    #[test]
    fn identity_and_rank_one_spectra() {
        let pi =
            crate::complex::LevelDistribution::new(1, DVector::from_vec(vec![0.25, 0.25, 0.5]));
        let identity = WalkOperator::new(1, 1, DMatrix::identity(3, 3), pi.clone()).unwrap();
        assert!((second_eigenvalue(&identity).unwrap() - 1.0).abs() <= 1e-12);

        let mut rank_one = DMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                rank_one[(i, j)] = pi.get(j);
            }
        }
        let op = WalkOperator::new(1, 1, rank_one, pi).unwrap();
        assert!(second_eigenvalue(&op).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn non_reversible_operator_is_rejected() {
        let pi = crate::complex::LevelDistribution::new(0, DVector::from_vec(vec![1.0 / 3.0; 3]));
        // A directed cycle is stationary for the uniform measure but breaks
        // detailed balance.
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 1)] = 1.0;
        m[(1, 2)] = 1.0;
        m[(2, 0)] = 1.0;
        let op = WalkOperator::new(0, 0, m, pi).unwrap();
        assert!(matches!(
            second_eigenvalue(&op),
            Err(Error::NotReversible(_))
        ));
    }

    #[test]
    fn degenerate_state_space_is_rejected() {
        let pi = crate::complex::LevelDistribution::new(0, DVector::from_vec(vec![1.0]));
        let op = WalkOperator::new(0, 0, DMatrix::identity(1, 1), pi).unwrap();
        assert!(matches!(
            second_eigenvalue(&op),
            Err(Error::DegenerateStateSpace(_))
        ));
    }

    #[test]
    fn complete_complex_profile_is_closed_form() {
        let c = PureSimplicialComplex::complete(5, 3).unwrap();
        let m = measure_spectral_profile(&c).unwrap();
        assert_eq!(m.profile.len(), 2);
        for k in 0..2 {
            let expect = -1.0 / (5 - k - 1) as f64;
            assert!(
                (m.profile.get(k) - expect).abs() <= 1e-12,
                "level {k}: {} vs {expect}",
                m.profile.get(k)
            );
        }
        assert!(m.disconnected.is_empty());
        assert_eq!(m.witnesses.len(), 2);
    }

    #[test]
    fn profile_needs_dimension_two() {
        let c = PureSimplicialComplex::complete(3, 1).unwrap();
        assert!(matches!(
            measure_spectral_profile(&c),
            Err(Error::LevelOutOfRange(_))
        ));
    }

    #[test]
    fn trickling_check_on_complete_complex() {
        let c = PureSimplicialComplex::complete(6, 4).unwrap();
        for k in 1..=2usize {
            let check = trickling_down_check(&c, k).unwrap();
            // Negative local spectra clamp to γ = 0, bound 0; all λ₂ below
            // are negative, so the margin stays nonnegative.
            assert!(check.gamma_raw < 0.0);
            assert_eq!(check.gamma, 0.0);
            assert_eq!(check.bound, 0.0);
            assert!(check.worst_margin >= -1e-9, "k={k}");
            assert!(check
                .rows
                .iter()
                .all(|r| r.status == TricklingStatus::Checked));
        }
        assert!(matches!(
            trickling_down_check(&c, 0),
            Err(Error::LevelOutOfRange(_))
        ));
        assert!(matches!(
            trickling_down_check(&c, 3),
            Err(Error::LevelOutOfRange(_))
        ));
    }

    #[test]
    fn trickling_check_on_weighted_instances() {
        for seed in 0..5u64 {
            let c = PureSimplicialComplex::random_weighted_complete(6, 3, 2.0, seed).unwrap();
            let check = trickling_down_check(&c, 1).unwrap();
            assert!(
                check.worst_margin >= -1e-9,
                "seed {seed}: margin {}",
                check.worst_margin
            );
        }
    }

    #[test]
    fn propagate_matches_hand_values() {
        let p = trickling_down_propagate(1.0 / 3.0, 3).unwrap();
        assert!((p.get(0) - 0.5).abs() <= 1e-15);
        assert!((p.get(1) - 1.0 / 3.0).abs() <= 1e-15);

        let zero = trickling_down_propagate(0.0, 5).unwrap();
        assert!(zero.values().iter().all(|&a| a == 0.0));

        assert!(matches!(
            trickling_down_propagate(0.6, 3),
            Err(Error::PreconditionUnmet(_))
        ));
    }

    #[test]
    fn propagate_agrees_with_iterated_bound() {
        // a_{j−1} = a_j / (1 − a_j) starting from a_{d−2} = γ.
        for d in 2..=8usize {
            let gamma = 1.0 / d as f64;
            let p = trickling_down_propagate(gamma, d).unwrap();
            let mut a = gamma;
            for j in (0..=(d - 2)).rev() {
                assert!((p.get(j) - a).abs() <= 1e-12, "d={d}, j={j}");
                a = a / (1.0 - a);
            }
        }
    }

    #[test]
    fn proof_identities_on_weighted_instance() {
        let c = PureSimplicialComplex::random_weighted_complete(7, 3, 2.0, 12).unwrap();
        assert!(up_decomposition_d_residual(&c).unwrap() <= 1e-12);
        assert!(local_row_identity_residual(&c).unwrap() <= 1e-12);
        assert!(up_decomposition_g_residual(&c).unwrap() <= 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let f = sample_gaussian_function(&c, 1, &mut rng).unwrap();
            assert!(dirichlet_decomposition_residual(&c, &f).unwrap() <= 1e-10);
        }
        assert!(eigenvalue_relation_margin(&c).unwrap() >= -1e-9);
    }

    #[test]
    fn walk_cospectrality() {
        // RW↑_k and RW↓_{k+1} share their nonzero spectrum; the longer list
        // pads with zeros.
        let c = PureSimplicialComplex::random_weighted_complete(6, 3, 1.5, 77).unwrap();
        for k in 1..3usize {
            let up = reversible_eigen(&up_down_walk(&c, k).unwrap()).unwrap();
            let down = reversible_eigen(&down_up_walk(&c, k + 1).unwrap()).unwrap();
            let mut a = up.values.clone();
            let mut b = down.values.clone();
            let len = a.len().max(b.len());
            a.resize(len, 0.0);
            b.resize(len, 0.0);
            a.sort_by(|x, y| y.partial_cmp(x).unwrap());
            b.sort_by(|x, y| y.partial_cmp(x).unwrap());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-9, "k={k}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn poincare_gap_matches_eigenvalue() {
        let c = PureSimplicialComplex::random_weighted_complete(6, 3, 1.5, 55).unwrap();
        for k in 1..=3usize {
            let rw = down_up_walk(&c, k).unwrap();
            let (gap, quotient) = poincare_eigen_gap(&rw).unwrap();
            assert!((gap - quotient).abs() <= 1e-9, "k={k}: {gap} vs {quotient}");
            // Random functions can only do worse.
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..50 {
                let f = sample_gaussian_function(&c, k, &mut rng).unwrap();
                let var = variance(rw.stationary(), &f).unwrap();
                if var < 1e-18 {
                    continue;
                }
                let q = dirichlet_form(&rw, &f, &f).unwrap() / var;
                assert!(q >= gap - 1e-9);
            }
        }
    }
}
