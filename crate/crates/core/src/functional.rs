//! Surface energies `F(u) = ∫_{S_u ∩ Ω} g(x, u⁺, u⁻, ν_u) dH^{d−1}`.
//!
//! Integrands are plain closures with a declared bound. They must satisfy
//! `g(x, a, b, ν) = g(x, b, a, −ν)` so that the energy does not depend on
//! which of the two admissible trace triples a facet reports; the symmetry
//! and the bound are sampled before every evaluation. Continuity cannot be
//! checked mechanically and stays the caller's responsibility.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

use crate::error::{contract, domain, Result};
use crate::labels::LabelSet;
use crate::partition::{BoundingBox, JumpFacet, Partition};
use crate::quadrature::{QuadratureSpec, UnitRule};

/// Absolute asymmetry (relative to `max(1, bound)`) tolerated by the
/// symmetry probe. Evaluations of `|a − b|` and friends are exactly
/// symmetric, so this only absorbs round-off.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Relative slack on the declared bound.
const BOUND_SLACK: f64 = 1e-12;

pub type IntegrandFn = dyn Fn(&[f64], &[f64], &[f64], &[f64]) -> f64 + Send + Sync;

/// A bounded, symmetric surface integrand `g(x, a, b, ν)`.
#[derive(Clone)]
pub struct SurfaceIntegrand {
    name: String,
    bound: f64,
    eval: Arc<IntegrandFn>,
}

impl fmt::Debug for SurfaceIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceIntegrand").field("name", &self.name).field("bound", &self.bound).finish()
    }
}

impl SurfaceIntegrand {
    pub fn new<F>(name: impl Into<String>, declared_bound: f64, g: F) -> Result<Self>
    where
        F: Fn(&[f64], &[f64], &[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        if !(declared_bound.is_finite() && declared_bound > 0.0) {
            return Err(domain(format!("declared bound must be positive and finite, got {declared_bound}")));
        }
        Ok(Self { name: name.into(), bound: declared_bound, eval: Arc::new(g) })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn declared_bound(&self) -> f64 {
        self.bound
    }

    #[inline]
    pub fn eval(&self, x: &[f64], a: &[f64], b: &[f64], nu: &[f64]) -> f64 {
        (self.eval)(x, a, b, nu)
    }

    /// `g ≡ 1`: the energy is the jump-set measure.
    pub fn one() -> Self {
        Self::new("one", 1.0, |_, _, _, _| 1.0).unwrap()
    }

    /// `g = |a − b|`: the energy is the total variation.
    pub fn jump(labels: &LabelSet) -> Self {
        Self::new("jump", labels.diameter(), |_, a, b, _| distance(a, b)).unwrap()
    }

    /// `g = |ν · e_1|`.
    pub fn aniso_x() -> Self {
        Self::new("aniso-x", 1.0, |_, _, _, nu| nu[0].abs()).unwrap()
    }

    /// `g = (1 + x_1²) |a − b|`, bounded over `region`.
    pub fn smooth_x(labels: &LabelSet, region: &BoundingBox) -> Self {
        let ext = region.max_abs_first();
        Self::new("smooth-x", (1.0 + ext * ext) * labels.diameter(), |x, a, b, _| (1.0 + x[0] * x[0]) * distance(a, b))
            .unwrap()
    }

    /// `g + sup|g|`, nonnegative whenever the declared bound holds.
    pub fn shifted_nonnegative(&self) -> Self {
        let inner = self.eval.clone();
        let shift = self.bound;
        Self {
            name: format!("{}+{}", self.name, shift),
            bound: 2.0 * shift,
            eval: Arc::new(move |x, a, b, nu| inner(x, a, b, nu) + shift),
        }
    }

    /// `α g₁ + β g₂`.
    pub fn linear_combination(alpha: f64, g1: &Self, beta: f64, g2: &Self) -> Result<Self> {
        let (f1, f2) = (g1.eval.clone(), g2.eval.clone());
        Self::new(
            format!("{alpha}*{}+{beta}*{}", g1.name, g2.name),
            alpha.abs() * g1.bound + beta.abs() * g2.bound,
            move |x, a, b, nu| alpha * f1(x, a, b, nu) + beta * f2(x, a, b, nu),
        )
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 4] = ["one", "jump", "aniso-x", "smooth-x"];

/// Looks up a built-in integrand. Bounds that depend on the labels or on the
/// extent of `Ω` are computed from `labels` and `region`.
pub fn builtin(name: &str, labels: &LabelSet, region: &BoundingBox) -> Result<SurfaceIntegrand> {
    match name {
        "one" => Ok(SurfaceIntegrand::one()),
        "jump" => Ok(SurfaceIntegrand::jump(labels)),
        "aniso-x" => Ok(SurfaceIntegrand::aniso_x()),
        "smooth-x" => Ok(SurfaceIntegrand::smooth_x(labels, region)),
        other => Err(domain(format!("unknown integrand '{other}' (known: {})", BUILTIN_NAMES.join(", ")))),
    }
}

/// Factor multiplying a polynomial integrand.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolynomialWeight {
    #[default]
    One,
    Jump,
}

/// `coef · Π x_k^{x[k]} · Π ν_k^{nu[k]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialTerm {
    pub coef: f64,
    #[serde(default)]
    pub x: Vec<u32>,
    #[serde(default)]
    pub nu: Vec<u32>,
}

/// Polynomial in `(x, ν)` times an optional `|a − b|` weight. Symmetry holds
/// iff every term has even total degree in `ν`; this is not enforced here but
/// caught by the symmetry probe at evaluation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialIntegrand {
    pub terms: Vec<PolynomialTerm>,
    #[serde(default)]
    pub weight: PolynomialWeight,
}

impl PolynomialIntegrand {
    pub fn build(&self, name: &str, labels: &LabelSet, region: &BoundingBox) -> Result<SurfaceIntegrand> {
        let d = region.dim();
        for t in &self.terms {
            if t.x.len() > d || t.nu.len() > d {
                return Err(domain(format!("polynomial term {t:?} has more exponents than d = {d}")));
            }
            if !t.coef.is_finite() {
                return Err(domain("polynomial coefficient must be finite"));
            }
        }
        let weight_bound = match self.weight {
            PolynomialWeight::One => 1.0,
            PolynomialWeight::Jump => labels.diameter(),
        };
        let bound: f64 = self
            .terms
            .iter()
            .map(|t| {
                let xs: f64 =
                    t.x.iter()
                        .enumerate()
                        .map(|(k, &p)| region.lo[k].abs().max(region.hi[k].abs()).powi(p as i32))
                        .product();
                t.coef.abs() * xs
            })
            .sum::<f64>()
            * weight_bound;
        let terms = self.terms.clone();
        let weight = self.weight;
        SurfaceIntegrand::new(name, bound.max(f64::EPSILON), move |x, a, b, nu| {
            let p: f64 = terms
                .iter()
                .map(|t| {
                    let xs: f64 = t.x.iter().enumerate().map(|(k, &e)| x[k].powi(e as i32)).product();
                    let ns: f64 = t.nu.iter().enumerate().map(|(k, &e)| nu[k].powi(e as i32)).product();
                    t.coef * xs * ns
                })
                .sum();
            match weight {
                PolynomialWeight::One => p,
                PolynomialWeight::Jump => p * distance(a, b),
            }
        })
    }
}

/// Seeded sampling parameters for the symmetry/boundedness probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymmetryCheck {
    pub samples: usize,
    pub seed: u64,
}

impl Default for SymmetryCheck {
    fn default() -> Self {
        Self { samples: 64, seed: 0x5eed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub samples: usize,
    pub max_asymmetry: f64,
    pub max_abs: f64,
    pub declared_bound: f64,
    pub non_finite: bool,
}

impl SymmetryReport {
    pub fn asymmetric(&self) -> bool {
        self.max_asymmetry > SYMMETRY_TOL * self.declared_bound.max(1.0)
    }

    pub fn exceeds_bound(&self) -> bool {
        self.max_abs > self.declared_bound * (1.0 + BOUND_SLACK)
    }

    pub fn passed(&self) -> bool {
        !(self.non_finite || self.asymmetric() || self.exceeds_bound())
    }
}

/// Draws `samples` seeded tuples `(x, a, b, ν)` with `x` uniform in `region`,
/// distinct labels `a ≠ b`, and `ν` uniform on the unit sphere, and records
/// `max |g(x,a,b,ν) − g(x,b,a,−ν)|` and `max |g|`.
pub fn check_symmetry(
    g: &SurfaceIntegrand,
    labels: &LabelSet,
    region: &BoundingBox,
    samples: usize,
    seed: u64,
) -> Result<SymmetryReport> {
    if samples < 1 {
        return Err(domain("symmetry check needs at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = region.dim();
    let q = labels.len();
    let mut report = SymmetryReport {
        samples,
        max_asymmetry: 0.0,
        max_abs: 0.0,
        declared_bound: g.declared_bound(),
        non_finite: false,
    };
    for _ in 0..samples {
        let x: Vec<f64> = (0..d).map(|k| rng.random_range(region.lo[k]..=region.hi[k])).collect();
        let i = rng.random_range(0..q);
        let mut j = rng.random_range(0..q - 1);
        if j >= i {
            j += 1;
        }
        let nu = random_unit(&mut rng, d);
        let minus_nu: Vec<f64> = nu.iter().map(|v| -v).collect();
        let forward = g.eval(&x, labels.label(i), labels.label(j), &nu);
        let backward = g.eval(&x, labels.label(j), labels.label(i), &minus_nu);
        if !(forward.is_finite() && backward.is_finite()) {
            report.non_finite = true;
            continue;
        }
        report.max_asymmetry = report.max_asymmetry.max((forward - backward).abs());
        report.max_abs = report.max_abs.max(forward.abs()).max(backward.abs());
    }
    Ok(report)
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

/// `F(u)` with the default symmetry probe.
pub fn evaluate_functional(
    u: &Partition,
    labels: &LabelSet,
    g: &SurfaceIntegrand,
    quad: &QuadratureSpec,
) -> Result<f64> {
    evaluate_functional_with(u, labels, g, quad, &SymmetryCheck::default())
}

/// `F(u)`: Gauss–Legendre quadrature on every facet (point evaluation in 1D).
pub fn evaluate_functional_with(
    u: &Partition,
    labels: &LabelSet,
    g: &SurfaceIntegrand,
    quad: &QuadratureSpec,
    check: &SymmetryCheck,
) -> Result<f64> {
    let rule = quad.rule()?;
    let report = check_symmetry(g, labels, &u.bounding_box(), check.samples, check.seed)?;
    if !report.passed() {
        return Err(contract(format!(
            "integrand '{}' failed its contract: max asymmetry {:e}, max |g| {:e} vs declared bound {:e}{}",
            g.name(),
            report.max_asymmetry,
            report.max_abs,
            report.declared_bound,
            if report.non_finite { ", non-finite values" } else { "" }
        )));
    }
    let facets = u.jump_set()?;
    integrate_facets(&facets, labels, g, &rule)
}

/// `Σ_facets ∫_facet g(x, z⁺, z⁻, ν) dH^{d−1}` without the symmetry probe.
/// Facets are integrated in parallel and summed in facet order.
pub fn integrate_facets(facets: &[JumpFacet], labels: &LabelSet, g: &SurfaceIntegrand, rule: &UnitRule) -> Result<f64> {
    for f in facets {
        labels.check_index(f.plus)?;
        labels.check_index(f.minus)?;
    }
    let parts: Vec<f64> = facets
        .par_iter()
        .map(|f| {
            let (a, b) = (labels.label(f.plus), labels.label(f.minus));
            let mut acc = 0.0;
            for (x, w) in f.quadrature(rule) {
                let v = g.eval(&x, a, b, &f.normal);
                if !v.is_finite() {
                    return Err(contract(format!("integrand '{}' returned {v} at {x:?}", g.name())));
                }
                if v.abs() > g.declared_bound() * (1.0 + BOUND_SLACK) {
                    return Err(contract(format!(
                        "integrand '{}' returned {v} at {x:?}, above its declared bound {}",
                        g.name(),
                        g.declared_bound()
                    )));
                }
                acc += w * v;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum())
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    crate::labels::euclidean(a, b)
}
