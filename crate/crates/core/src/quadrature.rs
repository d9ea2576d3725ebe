//! Gauss–Legendre rules on the unit interval.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Number of Gauss–Legendre nodes per facet piece and the number of equal
/// pieces each facet (or fiber) is split into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_subdivisions")]
    pub subdivisions: usize,
}

fn default_order() -> usize {
    8
}

fn default_subdivisions() -> usize {
    1
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { order: default_order(), subdivisions: default_subdivisions() }
    }
}

impl QuadratureSpec {
    pub fn new(order: usize, subdivisions: usize) -> Result<Self> {
        let spec = Self { order, subdivisions };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<()> {
        if self.order < 1 {
            return Err(domain("quadrature order must be at least 1"));
        }
        if self.subdivisions < 1 {
            return Err(domain("quadrature subdivisions must be at least 1"));
        }
        Ok(())
    }

    /// Composite rule on [0, 1].
    pub fn rule(&self) -> Result<UnitRule> {
        self.check()?;
        let (nodes, weights) = gauss_legendre(self.order);
        let pieces = self.subdivisions;
        let h = 1.0 / pieces as f64;
        let mut points = Vec::with_capacity(nodes.len() * pieces);
        for p in 0..pieces {
            let a = p as f64 * h;
            for (t, w) in nodes.iter().zip(&weights) {
                points.push((a + 0.5 * h * (t + 1.0), 0.5 * h * w));
            }
        }
        Ok(UnitRule { points })
    }
}

/// A quadrature rule on [0, 1] as (node, weight) pairs; weights sum to 1.
#[derive(Debug, Clone)]
pub struct UnitRule {
    points: Vec<(f64, f64)>,
}

impl UnitRule {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Integrates `f` over [a, b].
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let len = b - a;
        let mut acc = 0.0;
        for &(t, w) in &self.points {
            acc += w * f(a + t * len);
        }
        acc * len
    }

    /// Integrates `f` over [0, 1] after splitting at `breaks` (values outside
    /// (0, 1) are ignored), so piecewise polynomials with those kinks are exact.
    pub fn integrate_split(&self, breaks: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut cuts: Vec<f64> = breaks.iter().copied().filter(|b| *b > 0.0 && *b < 1.0).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut acc = 0.0;
        let mut lo = 0.0;
        for hi in cuts.into_iter().chain(std::iter::once(1.0)) {
            if hi > lo {
                acc += self.integrate(lo, hi, &mut f);
            }
            lo = hi;
        }
        acc
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
///
/// Newton iteration on the three-term recurrence; converges to round-off in a
/// handful of steps from the Chebyshev-like initial guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
