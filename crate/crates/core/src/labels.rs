//! The finite label set, its simplex embedding, and the cutoff machinery
//! built on the embedded edges.
//!
//! Labels `z_1, …, z_q ∈ R^N` are mapped to the standard basis `e_1, …, e_q`
//! of `R^q`. Every pair of embedded labels is then at distance `√2`, which is
//! what turns convergence of the jump-set measure into strict convergence of
//! the embedded field. Along each embedded edge `[e_i, e_j]` the open middle
//! half `L_ij` carries a cutoff profile, and [`FDelta`] combines the profile
//! with a surface integrand into a function on `Ω × R^q × (q×d matrices)`.

use nalgebra::DMatrix;
use std::f64::consts::SQRT_2;

use crate::error::{contract, domain, Result};
use crate::functional::SurfaceIntegrand;
use crate::lifting::LiftedIntegrand;
use crate::partition::Partition;

/// Tolerance used to decide whether a point of `R^q` lies on an embedded edge.
pub const ON_SEGMENT_TOL: f64 = 1e-9;

/// Tolerance on the Frobenius norm of a direction matrix.
pub const UNIT_FROBENIUS_TOL: f64 = 1e-9;

/// Lower end of the core parameter interval.
pub const CORE_LO: f64 = 0.25;
/// Upper end of the core parameter interval.
pub const CORE_HI: f64 = 0.75;

/// An ordered set of pairwise distinct labels in `R^N`.
///
/// The order is fixed at construction. Trace orientation on every facet
/// follows it: the `+` trace always carries the smaller index.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSet {
    labels: Vec<Vec<f64>>,
    dim: usize,
}

impl LabelSet {
    pub fn new(labels: Vec<Vec<f64>>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(domain(format!("a label set needs at least 2 labels, got {}", labels.len())));
        }
        let dim = labels[0].len();
        if dim == 0 {
            return Err(domain("labels must have ambient dimension at least 1"));
        }
        for (i, z) in labels.iter().enumerate() {
            if z.len() != dim {
                return Err(domain(format!("label {i} has dimension {} but label 0 has {dim}", z.len())));
            }
            if z.iter().any(|c| !c.is_finite()) {
                return Err(domain(format!("label {i} has a non-finite coordinate")));
            }
        }
        for i in 0..labels.len() {
            for j in (i + 1)..labels.len() {
                if euclidean(&labels[i], &labels[j]) <= 0.0 {
                    return Err(domain(format!("labels {i} and {j} coincide")));
                }
            }
        }
        Ok(Self { labels, dim })
    }

    /// Scalar labels `z_i ∈ R`.
    pub fn scalar(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|v| vec![*v]).collect())
    }

    /// The embedded label set `{e_1, …, e_q} ⊂ R^q`.
    pub fn simplex(q: usize) -> Result<Self> {
        Self::new((0..q).map(|i| basis(q, i)).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Ambient dimension `N`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self, i: usize) -> &[f64] {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[Vec<f64>] {
        &self.labels
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(domain(format!("label index {i} out of range for q = {}", self.len())));
        }
        Ok(())
    }

    pub fn index_of(&self, z: &[f64]) -> Option<usize> {
        self.labels.iter().position(|l| l.as_slice() == z)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean(&self.labels[i], &self.labels[j])
    }

    /// `max_{i≠j} |z_i − z_j|`.
    pub fn diameter(&self) -> f64 {
        self.pair_distances().fold(0.0, f64::max)
    }

    /// `min_{i≠j} |z_i − z_j|`.
    pub fn min_separation(&self) -> f64 {
        self.pair_distances().fold(f64::INFINITY, f64::min)
    }

    fn pair_distances(&self) -> impl Iterator<Item = f64> + '_ {
        let q = self.len();
        (0..q).flat_map(move |i| ((i + 1)..q).map(move |j| self.distance(i, j)))
    }

    /// `T(z)`: the basis vector of `R^q` at `z`'s position.
    pub fn embed(&self, z: &[f64]) -> Result<Vec<f64>> {
        let i = self.index_of(z).ok_or_else(|| domain(format!("{z:?} is not a member of the label set")))?;
        Ok(basis(self.len(), i))
    }

    pub fn embed_index(&self, i: usize) -> Result<Vec<f64>> {
        self.check_index(i)?;
        Ok(basis(self.len(), i))
    }

    pub fn embedded(&self) -> LabelSet {
        Self::simplex(self.len()).expect("q >= 2 basis vectors are distinct")
    }

    /// All embedded edges `[e_i, e_j]`, `i < j`, in lexicographic order.
    pub fn segments(&self) -> Vec<EmbeddedSegment> {
        let q = self.len();
        (0..q).flat_map(|i| ((i + 1)..q).map(move |j| EmbeddedSegment { i, j, q })).collect()
    }
}

/// `T(u)`: same geometry, labels replaced by basis vectors of `R^q`.
///
/// Partitions store label indices, so only the label set changes.
pub fn embed_field(labels: &LabelSet, u: &Partition) -> Result<(LabelSet, Partition)> {
    if let Some(&bad) = u.cell_labels().iter().find(|&&l| l >= labels.len()) {
        return Err(domain(format!("cell label {bad} is not in the label set (q = {})", labels.len())));
    }
    Ok((labels.embedded(), u.clone()))
}

/// The edge `[e_i, e_j]` of the embedded simplex, parametrised as
/// `λ e_i + (1 − λ) e_j`, together with its core `L_ij` (`λ ∈ (1/4, 3/4)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbeddedSegment {
    pub i: usize,
    pub j: usize,
    pub q: usize,
}

impl EmbeddedSegment {
    pub fn new(i: usize, j: usize, q: usize) -> Result<Self> {
        if i >= j || j >= q {
            return Err(domain(format!("segment ({i},{j}) needs i < j < q = {q}")));
        }
        Ok(Self { i, j, q })
    }

    pub fn point_at(&self, lambda: f64) -> Vec<f64> {
        let mut p = vec![0.0; self.q];
        p[self.i] = lambda;
        p[self.j] = 1.0 - lambda;
        p
    }

    /// `|e_i − e_j|`.
    pub fn length(&self) -> f64 {
        euclidean(&basis(self.q, self.i), &basis(self.q, self.j))
    }

    /// `H¹(L_ij)`.
    pub fn core_length(&self) -> f64 {
        (CORE_HI - CORE_LO) * self.length()
    }

    /// Parameter and distance of the closest point on the segment (or its
    /// core, when `core` is set).
    fn project(&self, y: &[f64], core: bool) -> (f64, f64) {
        let (lo, hi) = if core { (CORE_LO, CORE_HI) } else { (0.0, 1.0) };
        // (y - e_j)·(e_i - e_j) / |e_i - e_j|² with |e_i - e_j|² = 2
        let lambda = ((y[self.i] - y[self.j] + 1.0) / 2.0).clamp(lo, hi);
        let p = self.point_at(lambda);
        (lambda, euclidean(y, &p))
    }

    pub fn distance_to_core(&self, y: &[f64]) -> f64 {
        self.project(y, true).1
    }

    /// `λ` of a point on the closed segment.
    pub fn parameter_of(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.q {
            return Err(domain(format!("point has dimension {} but q = {}", y.len(), self.q)));
        }
        let (lambda, dist) = self.project(y, false);
        if dist > ON_SEGMENT_TOL {
            return Err(domain(format!("point is {dist:.3e} away from the segment [e_{}, e_{}]", self.i, self.j)));
        }
        Ok(lambda)
    }
}

/// Piecewise-linear cutoff `θ^δ`: 1 on the core, decaying linearly to 0 at
/// distance `δ` from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile {
    delta: f64,
}

impl CutoffProfile {
    /// Largest admissible `δ`. Up to `√2/8` the `δ`-neighbourhoods of different
    /// cores are disjoint and every edge endpoint sits outside all of them.
    pub const MAX_DELTA: f64 = SQRT_2 / 8.0;

    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= Self::MAX_DELTA) {
            return Err(domain(format!("cutoff width must lie in (0, √2/8], got {delta}")));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Ramp as a function of the distance to the core.
    pub fn ramp(&self, dist: f64) -> f64 {
        (1.0 - dist / self.delta).clamp(0.0, 1.0)
    }

    /// Profile value at edge parameter `λ`.
    pub fn at_parameter(&self, lambda: f64) -> f64 {
        let off = (lambda - lambda.clamp(CORE_LO, CORE_HI)).abs();
        self.ramp(SQRT_2 * off)
    }

    /// The four kinks of the profile in `λ`.
    pub fn parameter_breaks(&self) -> [f64; 4] {
        let w = self.delta / SQRT_2;
        [CORE_LO - w, CORE_LO, CORE_HI, CORE_HI + w]
    }

    /// `θ^δ_ij` at a point of the closed segment `[e_i, e_j]`.
    pub fn eval(&self, pair: (usize, usize), point: &[f64]) -> Result<f64> {
        let seg = EmbeddedSegment::new(pair.0, pair.1, point.len())?;
        let lambda = seg.parameter_of(point)?;
        Ok(self.at_parameter(lambda))
    }
}

/// The function `f_δ(x, y, ξ)` built from a nonnegative surface integrand.
///
/// On a core neighbourhood of the edge `[e_i, e_j]`:
/// `θ^δ_ij(y) / (√2 H¹(L_ij)) · g(x, z_i, z_j, w/|w|) · |w|` with
/// `w = ξᵀ(e_i − e_j)`, and 0 when `w = 0`. Off the edges the profile is
/// extended by `max(0, 1 − dist(y, L_ij)/δ)`, which keeps the function
/// continuous and vanishes outside all `δ`-tubes.
#[derive(Clone)]
pub struct FDelta {
    profile: CutoffProfile,
    integrand: SurfaceIntegrand,
    labels: LabelSet,
    segments: Vec<EmbeddedSegment>,
}

impl FDelta {
    pub fn new(profile: CutoffProfile, integrand: SurfaceIntegrand, labels: LabelSet) -> Self {
        let segments = labels.segments();
        Self { profile, integrand, labels, segments }
    }

    pub fn profile(&self) -> &CutoffProfile {
        &self.profile
    }

    pub fn eval(&self, x: &[f64], y: &[f64], xi: &DMatrix<f64>) -> Result<f64> {
        let q = self.labels.len();
        if y.len() != q || xi.nrows() != q {
            return Err(domain(format!(
                "f_δ expects y ∈ R^{q} and a {q}×d matrix, got |y| = {} and {}×{}",
                y.len(),
                xi.nrows(),
                xi.ncols()
            )));
        }
        let norm = xi.norm();
        if (norm - 1.0).abs() > UNIT_FROBENIUS_TOL {
            return Err(domain(format!("direction matrix has Frobenius norm {norm}, expected 1")));
        }
        let mut total = 0.0;
        for seg in &self.segments {
            let theta = self.profile.ramp(seg.distance_to_core(y));
            if theta == 0.0 {
                continue;
            }
            let w: Vec<f64> = (0..xi.ncols()).map(|c| xi[(seg.i, c)] - xi[(seg.j, c)]).collect();
            let wn = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if wn == 0.0 {
                continue;
            }
            let nu: Vec<f64> = w.iter().map(|v| v / wn).collect();
            let g = self.integrand.eval(x, self.labels.label(seg.i), self.labels.label(seg.j), &nu);
            if !g.is_finite() {
                return Err(contract(format!("integrand '{}' returned {g}", self.integrand.name())));
            }
            if g < 0.0 {
                return Err(contract(format!(
                    "f_δ needs a nonnegative integrand; '{}' returned {g}",
                    self.integrand.name()
                )));
            }
            total += theta / (SQRT_2 * seg.core_length()) * g * wn;
        }
        Ok(total)
    }
}

impl LiftedIntegrand for FDelta {
    fn value(&self, x: &[f64], y: &[f64], xi: &DMatrix<f64>) -> Result<f64> {
        self.eval(x, y, xi)
    }

    fn theta_breaks(&self) -> Vec<f64> {
        // symmetric about 1/2, so the same kinks serve either fiber direction
        self.profile.parameter_breaks().to_vec()
    }
}

/// Free-function form of [`FDelta::eval`].
pub fn f_delta_eval(
    profile: &CutoffProfile,
    g: &SurfaceIntegrand,
    labels: &LabelSet,
    x: &[f64],
    y: &[f64],
    xi: &DMatrix<f64>,
) -> Result<f64> {
    FDelta::new(*profile, g.clone(), labels.clone()).eval(x, y, xi)
}

pub(crate) fn basis(q: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; q];
    e[i] = 1.0;
    e
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
