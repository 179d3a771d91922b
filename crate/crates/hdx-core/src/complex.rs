//! Weighted pure simplicial complexes.
//!
//! A pure `d`-dimensional complex is stored level by level: level `k` holds
//! every cardinality-`k` face together with its weight. Top-level weights are
//! user input; every lower weight is induced by the recursion
//!
//! ```text
//! w(S) = Σ { w(T) : T ⊃ S, |T| = |S| + 1 }
//! ```
//!
//! so `w(S) = (d − |S|)! · Σ { w(T) : T top face, T ⊇ S }` and the level-`k`
//! distribution `π_k(S) = w(S) / Σ_{S'} w(S')` agrees with pushing the top
//! distribution down by removing uniformly random elements.

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default cap on the number of faces materialized per level.
///
/// Enumeration is dense, so a level that would exceed this refuses to build
/// rather than exhausting memory. Use [`PureSimplicialComplex::from_top_faces_with_limit`]
/// to override.
pub const DEFAULT_MAX_LEVEL_FACES: usize = 100_000;

/// A face: a strictly increasing list of ground-set elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face(Vec<usize>);

impl Face {
    /// Builds a face from an arbitrary element list. Sorts; rejects repeats.
    pub fn new(mut elements: Vec<usize>) -> Result<Self> {
        elements.sort_unstable();
        if elements.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!(
                "face elements must be distinct, got {elements:?}"
            )));
        }
        Ok(Face(elements))
    }

    pub fn empty() -> Self {
        Face(Vec::new())
    }

    pub fn elements(&self) -> &[usize] {
        &self.0
    }

    pub fn cardinality(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, element: usize) -> bool {
        self.0.binary_search(&element).is_ok()
    }

    pub fn is_subset_of(&self, other: &Face) -> bool {
        self.0.iter().all(|e| other.contains(*e))
    }

    /// The face with `element` added. `element` must not already be present.
    pub fn with_element(&self, element: usize) -> Face {
        debug_assert!(!self.contains(element));
        let pos = self.0.partition_point(|&e| e < element);
        let mut elements = self.0.clone();
        elements.insert(pos, element);
        Face(elements)
    }

    /// The face with the element at position `idx` removed.
    pub fn without_position(&self, idx: usize) -> Face {
        let mut elements = self.0.clone();
        elements.remove(idx);
        Face(elements)
    }

    /// Set union with a disjoint face.
    pub fn union_disjoint(&self, other: &Face) -> Face {
        let mut elements: Vec<usize> = self.0.iter().chain(other.0.iter()).copied().collect();
        elements.sort_unstable();
        debug_assert!(elements.windows(2).all(|w| w[0] != w[1]));
        Face(elements)
    }

    /// Set difference `self \ other`.
    pub fn difference(&self, other: &Face) -> Face {
        Face(
            self.0
                .iter()
                .copied()
                .filter(|e| !other.contains(*e))
                .collect(),
        )
    }

    /// Compact label for tables and CSV headers: `0-2-5`, or `empty`.
    pub fn label(&self) -> String {
        if self.0.is_empty() {
            "empty".to_string()
        } else {
            self.0.iter().map(|e| e.to_string()).join("-")
        }
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.iter().join(" "))
    }
}

/// One level of the complex: its faces in lexicographic order plus weights.
#[derive(Clone, Debug)]
pub struct Level {
    faces: Vec<Face>,
    weights: Vec<f64>,
    index: HashMap<Face, usize>,
}

impl Level {
    fn from_sorted(faces: Vec<Face>, weights: Vec<f64>) -> Self {
        debug_assert!(faces.windows(2).all(|w| w[0] < w[1]));
        let index = faces
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i))
            .collect();
        Level {
            faces,
            weights,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn face(&self, idx: usize) -> &Face {
        &self.faces[idx]
    }

    pub fn weight(&self, idx: usize) -> f64 {
        self.weights[idx]
    }

    /// Position of `face` in this level, if present.
    pub fn position(&self, face: &Face) -> Option<usize> {
        self.index.get(face).copied()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Probability distribution over the faces of one level, indexed like the level.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelDistribution {
    level: usize,
    probs: DVector<f64>,
}

impl LevelDistribution {
    pub fn new(level: usize, probs: DVector<f64>) -> Self {
        LevelDistribution { level, probs }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.len() == 0
    }

    pub fn probs(&self) -> &DVector<f64> {
        &self.probs
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.probs[idx]
    }
}

/// A weighted pure simplicial complex with all levels materialized.
#[derive(Clone, Debug)]
pub struct PureSimplicialComplex {
    ground_set_size: usize,
    dimension: usize,
    levels: Vec<Level>,
}

impl PureSimplicialComplex {
    /// Builds a complex of dimension `d` from its top faces.
    ///
    /// Every face must have cardinality exactly `d`, elements below
    /// `ground_set_size`, a finite positive weight, and no face may repeat.
    /// Lower levels are enumerated by subset expansion; their weights follow
    /// the recursion `w(S) = Σ_{T ⊃ S} w(T)` over one-element extensions.
    pub fn from_top_faces(
        dimension: usize,
        ground_set_size: usize,
        top_faces: Vec<(Face, f64)>,
    ) -> Result<Self> {
        Self::from_top_faces_with_limit(
            dimension,
            ground_set_size,
            top_faces,
            DEFAULT_MAX_LEVEL_FACES,
        )
    }

    /// Same as [`from_top_faces`](Self::from_top_faces) with an explicit cap
    /// on the number of faces per level.
    pub fn from_top_faces_with_limit(
        dimension: usize,
        ground_set_size: usize,
        top_faces: Vec<(Face, f64)>,
        max_level_faces: usize,
    ) -> Result<Self> {
        if top_faces.is_empty() {
            return Err(Error::EmptyComplex("no top faces given".to_string()));
        }
        for (face, weight) in &top_faces {
            if face.cardinality() != dimension {
                return Err(Error::Purity(format!(
                    "face {face} has cardinality {}, expected {dimension}",
                    face.cardinality()
                )));
            }
            if let Some(&e) = face.elements().iter().find(|&&e| e >= ground_set_size) {
                return Err(Error::InvalidParameter(format!(
                    "element {e} of face {face} exceeds ground set size {ground_set_size}"
                )));
            }
            if !weight.is_finite() || *weight <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "weight of face {face} must be finite and positive, got {weight}"
                )));
            }
        }
        if top_faces.len() > max_level_faces {
            return Err(Error::InstanceTooLarge(format!(
                "{} top faces exceed the per-level cap {max_level_faces}",
                top_faces.len()
            )));
        }

        let mut top: Vec<(Face, f64)> = top_faces;
        top.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = top.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateFace(w[0].0.to_string()));
        }
        let (faces, weights): (Vec<Face>, Vec<f64>) = top.into_iter().unzip();

        let mut levels = vec![Level::from_sorted(faces, weights)];
        // Expand downwards: level k-1 from level k.
        for k in (1..=dimension).rev() {
            let upper = &levels[levels.len() - 1];
            let mut acc: HashMap<Face, f64> = HashMap::new();
            for (face, &w) in upper.faces.iter().zip(&upper.weights) {
                for drop in 0..k {
                    let sub = face.without_position(drop);
                    *acc.entry(sub).or_insert(0.0) += w;
                    if acc.len() > max_level_faces {
                        return Err(Error::InstanceTooLarge(format!(
                            "level {} exceeds the per-level cap {max_level_faces}",
                            k - 1
                        )));
                    }
                }
            }
            let mut pairs: Vec<(Face, f64)> = acc.into_iter().collect();
            pairs.sort_by(|a, b| a.0.cmp(&b.0));
            let (faces, weights): (Vec<Face>, Vec<f64>) = pairs.into_iter().unzip();
            levels.push(Level::from_sorted(faces, weights));
        }
        levels.reverse();

        Ok(PureSimplicialComplex {
            ground_set_size,
            dimension,
            levels,
        })
    }

    /// The complete complex: all `d`-subsets of `{0, …, n−1}` with unit weight.
    pub fn complete(n: usize, d: usize) -> Result<Self> {
        Self::complete_with_limit(n, d, DEFAULT_MAX_LEVEL_FACES)
    }

    pub fn complete_with_limit(n: usize, d: usize, max_level_faces: usize) -> Result<Self> {
        if d == 0 || d > n {
            return Err(Error::InvalidParameter(format!(
                "complete complex needs 1 ≤ d ≤ n, got n={n}, d={d}"
            )));
        }
        for k in 0..=d {
            if binomial(n, k) > max_level_faces as u128 {
                return Err(Error::InstanceTooLarge(format!(
                    "complete complex n={n} d={d} has {} faces at level {k}, cap is {max_level_faces}",
                    binomial(n, k)
                )));
            }
        }
        let top = (0..n).combinations(d).map(|els| (Face(els), 1.0)).collect();
        Self::from_top_faces_with_limit(d, n, top, max_level_faces)
    }

    /// Complete-support complex on all `d`-subsets of `{0, …, n−1}` with
    /// i.i.d. log-normal weights `exp(sigma · z)`, `z ~ N(0,1)`, from a seeded
    /// generator. Used to produce reproducible weighted test instances.
    pub fn random_weighted_complete(n: usize, d: usize, sigma: f64, seed: u64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma must be finite and nonnegative, got {sigma}"
            )));
        }
        if d == 0 || d > n {
            return Err(Error::InvalidParameter(format!(
                "random complex needs 1 ≤ d ≤ n, got n={n}, d={d}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let top = (0..n)
            .combinations(d)
            .map(|els| {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                (Face(els), (sigma * z).exp())
            })
            .collect();
        Self::from_top_faces(d, n, top)
    }

    /// The bases of the graphic matroid of a connected multigraph: ground set
    /// = edge indices, top faces = spanning trees with unit weight, dimension
    /// = (number of vertices) − 1.
    pub fn graphic_matroid_bases(edges: &[(usize, usize)]) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::EmptyComplex("no edges given".to_string()));
        }
        let mut vertices: Vec<usize> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        vertices.sort_unstable();
        vertices.dedup();
        if vertices.len() < 2 {
            return Err(Error::InvalidParameter(
                "graph must have at least 2 vertices".to_string(),
            ));
        }
        let vertex_pos: HashMap<usize, usize> =
            vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let nv = vertices.len();

        let mut uf = UnionFind::new(nv);
        for &(a, b) in edges {
            uf.union(vertex_pos[&a], vertex_pos[&b]);
        }
        if (1..nv).any(|i| uf.find(i) != uf.find(0)) {
            return Err(Error::DisconnectedGraph(
                "edge list does not connect all vertices".to_string(),
            ));
        }

        let d = nv - 1;
        let candidates = binomial(edges.len(), d);
        if candidates > 2_000_000 {
            return Err(Error::InstanceTooLarge(format!(
                "{candidates} candidate edge subsets to scan for spanning trees"
            )));
        }

        let mut trees: Vec<(Face, f64)> = Vec::new();
        for subset in (0..edges.len()).combinations(d) {
            let mut uf = UnionFind::new(nv);
            let mut acyclic = true;
            for &ei in &subset {
                let (a, b) = edges[ei];
                if !uf.union(vertex_pos[&a], vertex_pos[&b]) {
                    acyclic = false;
                    break;
                }
            }
            if acyclic {
                trees.push((Face(subset), 1.0));
            }
        }
        Self::from_top_faces(d, edges.len(), trees)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn ground_set_size(&self) -> usize {
        self.ground_set_size
    }

    /// The level of cardinality-`k` faces. Panics if `k > d`; use
    /// [`check_level`](Self::check_level) for a fallible lookup.
    pub fn level(&self, k: usize) -> &Level {
        &self.levels[k]
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn check_level(&self, k: usize) -> Result<&Level> {
        self.levels.get(k).ok_or_else(|| {
            Error::LevelOutOfRange(format!(
                "level {k} of a dimension-{} complex",
                self.dimension
            ))
        })
    }

    /// Number of faces at every level, `k = 0, …, d`.
    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.len()).collect()
    }

    /// Weight of a face, if it belongs to the complex.
    pub fn weight_of(&self, face: &Face) -> Option<f64> {
        let level = self.levels.get(face.cardinality())?;
        level.position(face).map(|i| level.weight(i))
    }

    /// The distribution `π_k ∝ w` over level `k`.
    pub fn level_distribution(&self, k: usize) -> Result<LevelDistribution> {
        let level = self.check_level(k)?;
        let total = level.total_weight();
        let probs = DVector::from_iterator(level.len(), level.weights.iter().map(|w| w / total));
        Ok(LevelDistribution::new(k, probs))
    }

    /// The link of a face `S`: the complex on `{T \ S : T top face, T ⊇ S}`
    /// keeping the original element labels and top weights, so that the link
    /// weight of `U` equals `w(S ∪ U)`.
    pub fn link(&self, base: &Face) -> Result<Link> {
        let k = base.cardinality();
        let in_complex = k <= self.dimension && self.levels[k].position(base).is_some();
        if !in_complex {
            return Err(Error::NotAFace(base.to_string()));
        }
        let top = self.levels[self.dimension]
            .faces
            .iter()
            .zip(&self.levels[self.dimension].weights)
            .filter(|(t, _)| base.is_subset_of(t))
            .map(|(t, &w)| (t.difference(base), w))
            .collect();
        let complex =
            PureSimplicialComplex::from_top_faces(self.dimension - k, self.ground_set_size, top)?;
        Ok(Link {
            base: base.clone(),
            complex,
        })
    }

    /// Max absolute relative defect of `w(S) = Σ_{T ⊃ S, |T|=|S|+1} w(T)` over
    /// all non-top faces. Diagnostic; should sit at rounding error.
    pub fn weight_recursion_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.dimension {
            let lower = &self.levels[k];
            let upper = &self.levels[k + 1];
            let mut sums = vec![0.0; lower.len()];
            for (face, &w) in upper.faces.iter().zip(&upper.weights) {
                for drop in 0..face.cardinality() {
                    let sub = face.without_position(drop);
                    sums[lower.position(&sub).expect("closure under subsets")] += w;
                }
            }
            for (i, &w) in lower.weights.iter().enumerate() {
                let resid = (w - sums[i]).abs() / w.abs().max(1e-30);
                worst = worst.max(resid);
            }
        }
        worst
    }
}

/// The link of a face: the base face plus the induced complex on its
/// co-faces. Level `k` of the link carries `π_{S,k}(T) ∝ π_{|S|+k}(S ∪ T)`.
#[derive(Clone, Debug)]
pub struct Link {
    base: Face,
    complex: PureSimplicialComplex,
}

impl Link {
    pub fn base(&self) -> &Face {
        &self.base
    }

    pub fn complex(&self) -> &PureSimplicialComplex {
        &self.complex
    }

    pub fn dimension(&self) -> usize {
        self.complex.dimension()
    }
}

/// Binomial coefficient with saturation, for guardrail checks.
pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}
