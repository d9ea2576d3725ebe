//! The minimal lifting `μ[v] = |Dv| ⊗ λ_x` of a partition field.
//!
//! For a facet with traces `v⁺, v⁻` and normal `ν`, the fiber measure `λ_x`
//! is the push-forward of `dθ` on `[0, 1]` under `θ ↦ v^θ = θv⁺ + (1−θ)v⁻`,
//! multiplied by the polar `(v⁺ − v⁻) ⊗ ν / |v⁺ − v⁻|`. The lifting is kept
//! facet-decomposed; integrals against it are tensor Gauss–Legendre sums
//! over the facet and the fiber.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{contract, domain, Result};
use crate::labels::{embed_field, LabelSet};
use crate::partition::{BoundingBox, JumpFacet, Partition};
use crate::quadrature::{QuadratureSpec, UnitRule};

/// A scalar test function `φ(x, y)` on `Ω × R^N`.
pub trait TestFunction: Sync {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64;
}

impl<F> TestFunction for F
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        self(x, y)
    }
}

/// A function `f(x, y, ξ)` with `ξ` an `N × d` matrix of unit Frobenius norm.
///
/// `theta_breaks` lists fiber parameters where `f` has kinks; the fiber
/// quadrature is split there.
pub trait LiftedIntegrand: Sync {
    fn value(&self, x: &[f64], y: &[f64], xi: &DMatrix<f64>) -> Result<f64>;

    fn theta_breaks(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F> LiftedIntegrand for F
where
    F: Fn(&[f64], &[f64], &DMatrix<f64>) -> f64 + Sync,
{
    fn value(&self, x: &[f64], y: &[f64], xi: &DMatrix<f64>) -> Result<f64> {
        Ok(self(x, y, xi))
    }
}

/// One facet of the lifting.
#[derive(Debug, Clone)]
pub struct LiftingAtom {
    pub facet: JumpFacet,
    /// `(v⁺ − v⁻) ⊗ ν / |v⁺ − v⁻|`, `N × d`.
    pub polar: DMatrix<f64>,
    /// `|v⁺ − v⁻|`, the density of `|Dv|` with respect to `H^{d−1}`.
    pub density: f64,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl LiftingAtom {
    pub fn fiber_point(&self, theta: f64) -> Vec<f64> {
        self.plus.iter().zip(&self.minus).map(|(p, m)| theta * p + (1.0 - theta) * m).collect()
    }

    /// `|λ_x|(R^N)`: the θ-integral of the polar's norm.
    pub fn fiber_mass(&self, rule: &UnitRule) -> f64 {
        let norm = self.polar.norm();
        rule.integrate(0.0, 1.0, |_| norm)
    }
}

/// `μ[v]` for a partition field `v` with values in `labels`.
#[derive(Debug, Clone)]
pub struct LiftingMeasure {
    labels: LabelSet,
    base: Partition,
    atoms: Vec<LiftingAtom>,
}

impl LiftingMeasure {
    pub fn new(v: &Partition, labels: &LabelSet) -> Result<Self> {
        let atoms = v
            .jump_set()?
            .into_iter()
            .map(|facet| {
                labels.check_index(facet.minus)?;
                let (plus, minus) = (labels.label(facet.plus).to_vec(), labels.label(facet.minus).to_vec());
                let jump: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| a - b).collect();
                let density = jump.iter().map(|c| c * c).sum::<f64>().sqrt();
                let polar =
                    DMatrix::from_fn(jump.len(), facet.normal.len(), |r, c| jump[r] * facet.normal[c] / density);
                Ok(LiftingAtom { facet, polar, density, plus, minus })
            })
            .collect::<Result<_>>()?;
        Ok(Self { labels: labels.clone(), base: v.clone(), atoms })
    }

    /// `μ[T(u)]` for the embedded field.
    pub fn of_embedded(u: &Partition, labels: &LabelSet) -> Result<Self> {
        let (embedded, field) = embed_field(labels, u)?;
        Self::new(&field, &embedded)
    }

    pub fn atoms(&self) -> &[LiftingAtom] {
        &self.atoms
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn base(&self) -> &Partition {
        &self.base
    }

    /// `N`, the dimension of the label space.
    pub fn target_dim(&self) -> usize {
        self.labels.dim()
    }

    pub fn space_dim(&self) -> usize {
        self.base.dim()
    }

    /// `|μ[v]|(Ω × R^N)`.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.polar.norm() * a.density * a.facet.measure).sum()
    }
}

/// `dDv/d|Dv|` on a facet, from the traces and normal alone.
pub fn derivative_polar(facet: &JumpFacet, labels: &LabelSet) -> DMatrix<f64> {
    let (p, m) = (labels.label(facet.plus), labels.label(facet.minus));
    let full = DMatrix::from_fn(p.len(), facet.normal.len(), |r, c| (p[r] - m[r]) * facet.normal[c]);
    let n = full.norm();
    full / n
}

/// `Dv(Ω) = Σ_facets (v⁺ − v⁻) ⊗ ν H^{d−1}(facet)`.
pub fn derivative_mass(v: &Partition, labels: &LabelSet) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(labels.dim(), v.dim());
    for f in v.jump_set()? {
        let (p, m) = (labels.label(f.plus), labels.label(f.minus));
        for r in 0..labels.dim() {
            for c in 0..v.dim() {
                out[(r, c)] += (p[r] - m[r]) * f.normal[c] * f.measure;
            }
        }
    }
    Ok(out)
}

fn checked(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(contract(format!("{what} returned {v}")))
    }
}

/// `∫∫ φ(x, v^θ) dθ dH^{d−1}(x)` over one atom, facet outer, fiber inner.
fn atom_scalar<T: TestFunction + ?Sized>(atom: &LiftingAtom, phi: &T, rule: &UnitRule, breaks: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for (x, w) in atom.facet.quadrature(rule) {
        let mut err = None;
        let inner = rule.integrate_split(breaks, |theta| {
            let v = phi.eval(&x, &atom.fiber_point(theta));
            if !v.is_finite() {
                err = Some(v);
            }
            v
        });
        if let Some(v) = err {
            return Err(contract(format!("test function returned {v}")));
        }
        acc += w * inner;
    }
    Ok(acc)
}

/// `∫_{Ω×R^N} φ dμ[v]` as an `N × d` matrix.
pub fn lifting_integrate<T: TestFunction + ?Sized>(
    lift: &LiftingMeasure,
    phi: &T,
    quad: &QuadratureSpec,
) -> Result<DMatrix<f64>> {
    let rule = quad.rule()?;
    let parts: Vec<DMatrix<f64>> = lift
        .atoms
        .par_iter()
        .map(|a| Ok(&a.polar * (a.density * atom_scalar(a, phi, &rule, &[])?)))
        .collect::<Result<_>>()?;
    let mut out = DMatrix::zeros(lift.target_dim(), lift.space_dim());
    for p in parts {
        out += p;
    }
    Ok(out)
}

/// `∫_{Ω×R^N} φ d|μ[v]|` with `|μ[v]| = |Dv| ⊗ |λ_x|`.
pub fn lifting_abs_integrate<T: TestFunction + ?Sized>(
    lift: &LiftingMeasure,
    phi: &T,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let rule = quad.rule()?;
    let parts: Vec<f64> = lift
        .atoms
        .par_iter()
        .map(|a| Ok(a.polar.norm() * a.density * atom_scalar(a, phi, &rule, &[])?))
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum())
}

/// Largest Frobenius residual between `∫ φ dμ[v]` and
/// `∫ φ(x, y) dDv/d|Dv|(x) d|μ[v]|(x, y)` over the battery.
///
/// The right-hand side takes the polar from the traces of the base field,
/// weights by the total-variation density of the fiber and nests the
/// quadrature fiber-outer, so it shares no intermediate with the left.
pub fn polar_identity_check<T: TestFunction>(
    lift: &LiftingMeasure,
    battery: &[T],
    quad: &QuadratureSpec,
) -> Result<f64> {
    if battery.is_empty() {
        return Err(domain("polar identity check needs at least one test function"));
    }
    let rule = quad.rule()?;
    let residuals: Vec<f64> = battery
        .par_iter()
        .map(|phi| {
            let lhs = lifting_integrate(lift, phi, quad)?;
            let mut rhs = DMatrix::zeros(lift.target_dim(), lift.space_dim());
            for a in &lift.atoms {
                let sigma = derivative_polar(&a.facet, &lift.labels);
                let tv_density = a.polar.norm() * a.density;
                let points = a.facet.quadrature(&rule);
                let mut acc = 0.0;
                for &(theta, wt) in rule.points() {
                    let y = a.fiber_point(theta);
                    for (x, w) in &points {
                        acc += wt * w * checked(phi.eval(x, &y), "test function")?;
                    }
                }
                rhs += sigma * (tv_density * acc);
            }
            Ok((lhs - rhs).norm())
        })
        .collect::<Result<_>>()?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

/// Both sides of the fiber identity
/// `∫ f(x, y, dμ/d|μ|) d|μ[v]| = ∫_Ω ∫₀¹ f(x, v^θ, dDv/d|Dv|) dθ d|Dv|`.
pub fn fiber_identity_check<F: LiftedIntegrand + ?Sized>(
    lift: &LiftingMeasure,
    f: &F,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let rule = quad.rule()?;
    let breaks = f.theta_breaks();
    let sides: Vec<(f64, f64)> = lift
        .atoms
        .par_iter()
        .map(|a| {
            // left: density of μ against |μ| on this atom
            let mu_density = &a.polar * a.density;
            let abs_density = a.polar.norm() * a.density;
            let direction = &mu_density / abs_density;
            let mut lhs = 0.0;
            for (x, w) in a.facet.quadrature(&rule) {
                let mut err = None;
                let inner =
                    rule.integrate_split(&breaks, |theta| match f.value(&x, &a.fiber_point(theta), &direction) {
                        Ok(v) => v,
                        Err(e) => {
                            err.get_or_insert(e);
                            0.0
                        }
                    });
                if let Some(e) = err {
                    return Err(e);
                }
                lhs += w * inner * abs_density;
            }
            // right: traces of the base field, |Dv| density, fiber-outer nesting
            let sigma = derivative_polar(&a.facet, &lift.labels);
            let (p, m) = (lift.labels.label(a.facet.plus), lift.labels.label(a.facet.minus));
            let tv = crate::labels::euclidean(p, m);
            let points = a.facet.quadrature(&rule);
            let mut err = None;
            let rhs = rule.integrate_split(&breaks, |theta| {
                let y: Vec<f64> = p.iter().zip(m).map(|(a, b)| theta * a + (1.0 - theta) * b).collect();
                let mut acc = 0.0;
                for (x, w) in &points {
                    match f.value(x, &y, &sigma) {
                        Ok(v) => acc += w * v,
                        Err(e) => {
                            err.get_or_insert(e);
                        }
                    }
                }
                acc
            });
            if let Some(e) = err {
                return Err(e);
            }
            Ok((lhs, rhs * tv))
        })
        .collect::<Result<_>>()?;
    let lhs: f64 = sides.iter().map(|s| s.0).sum();
    let rhs: f64 = sides.iter().map(|s| s.1).sum();
    Ok((checked(lhs, "fiber integrand")?, checked(rhs, "fiber integrand")?))
}

/// One row of [`lifting_weakstar_probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeakStarRow {
    pub index: usize,
    /// `‖∫ φ dμ[v_n] − ∫ φ dμ[v]‖_F` per battery entry.
    pub residuals: Vec<f64>,
    /// `| |μ[v_n]|(Ω×R^N) − |μ[v]|(Ω×R^N) |`.
    pub mass_gap: f64,
}

impl WeakStarRow {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Diagnostic table comparing a sequence of liftings with a limit lifting.
pub fn lifting_weakstar_probe<T: TestFunction>(
    sequence: &[LiftingMeasure],
    limit: &LiftingMeasure,
    battery: &[T],
    quad: &QuadratureSpec,
) -> Result<Vec<WeakStarRow>> {
    let targets: Vec<DMatrix<f64>> =
        battery.iter().map(|phi| lifting_integrate(limit, phi, quad)).collect::<Result<_>>()?;
    let limit_mass = limit.total_mass();
    sequence
        .iter()
        .enumerate()
        .map(|(index, lift)| {
            if lift.space_dim() != limit.space_dim() || lift.target_dim() != limit.target_dim() {
                return Err(domain("weak-* probe needs liftings over the same spaces"));
            }
            let residuals = battery
                .iter()
                .zip(&targets)
                .map(|(phi, t)| Ok((lifting_integrate(lift, phi, quad)? - t).norm()))
                .collect::<Result<_>>()?;
            Ok(WeakStarRow { index, residuals, mass_gap: (lift.total_mass() - limit_mass).abs() })
        })
        .collect()
}

/// Entries of the standard test-function battery.
#[derive(Debug, Clone, PartialEq)]
pub enum BatteryFunction {
    /// `Π x_k^{a_k} Π y_k^{b_k}`.
    Monomial { x: Vec<u32>, y: Vec<u32> },
    /// Smooth bump `exp(1 − 1/(1 − r²))`, `r = |(x, y) − centre| / radius`.
    Bump { centre_x: Vec<f64>, centre_y: Vec<f64>, radius: f64 },
}

impl TestFunction for BatteryFunction {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            BatteryFunction::Monomial { x: ex, y: ey } => {
                let px: f64 = x.iter().zip(ex).map(|(v, &e)| v.powi(e as i32)).product();
                let py: f64 = y.iter().zip(ey).map(|(v, &e)| v.powi(e as i32)).product();
                px * py
            }
            BatteryFunction::Bump { centre_x, centre_y, radius } => {
                let r2 = (x.iter().zip(centre_x).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
                    + y.iter().zip(centre_y).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
                    / (radius * radius);
                if r2 >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - r2)).exp()
                }
            }
        }
    }
}

/// All exponent vectors of length `n` with total degree at most `max`.
fn exponents(n: usize, max: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..=max {
        for mut rest in exponents(n - 1, max - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Monomials in `(x, y)` up to total degree 3 plus two seeded smooth bumps
/// centred inside `region` and on the fiber simplex.
pub fn standard_battery(region: &BoundingBox, target_dim: usize, seed: u64) -> Vec<BatteryFunction> {
    let d = region.dim();
    let mut out: Vec<BatteryFunction> = exponents(d + target_dim, 3)
        .into_iter()
        .map(|e| BatteryFunction::Monomial { x: e[..d].to_vec(), y: e[d..].to_vec() })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..2 {
        let centre_x = (0..d).map(|k| rng.random_range(region.lo[k]..=region.hi[k])).collect();
        let centre_y = (0..target_dim).map(|_| rng.random_range(0.0..=1.0)).collect();
        let extent = (0..d).map(|k| region.hi[k] - region.lo[k]).fold(0.0, f64::max);
        out.push(BatteryFunction::Bump { centre_x, centre_y, radius: 0.5 * extent.max(1.0) });
    }
    out
}
