//! Sequence families and the convergence harness.
//!
//! Each family produces `u_n` and a limit `u` on a common domain with a
//! common label set, together with closed forms for the jump-set measure,
//! total variation and L¹ gap. The harness computes every gap per `n`,
//! classifies the mode of convergence with a simple heuristic, and checks
//! that jump-strict convergence is accompanied by convergence of every
//! supplied surface energy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::functional::{evaluate_functional_with, SurfaceIntegrand, SymmetryCheck};
use crate::labels::LabelSet;
use crate::partition::clip::Point;
use crate::partition::{BoundingBox, Partition, Partition1D, Partition2D};
use crate::quadrature::QuadratureSpec;

/// Agreement required between computed quantities and recorded closed forms.
pub const CLOSED_FORM_TOL: f64 = 1e-10;

/// Default reference polygon used as the limit of the inscribed-polygon family.
pub const DEFAULT_PROXY_SIDES: usize = 1024;

/// `u_n = z_1 on (−1, 1/n), z_2 on (1/n, 2/n), z_3 on (2/n, 1)`.
pub fn gen_remark(n: usize) -> Result<Partition1D> {
    if n < 3 {
        return Err(domain(format!("remark sequence needs n >= 3, got {n}")));
    }
    let nf = n as f64;
    Partition1D::new((-1.0, 1.0), vec![1.0 / nf, 2.0 / nf], vec![0, 1, 2])
}

/// `u = z_1 on (−1, 0), z_3 on (0, 1)`.
pub fn remark_limit() -> Partition1D {
    Partition1D::new((-1.0, 1.0), vec![0.0], vec![0, 2]).expect("static partition")
}

fn stacked_slabs(levels: &[f64], labels: &[usize]) -> Result<Partition2D> {
    // horizontal strips of (0,1) × (levels[k], levels[k+1])
    let mut vertices = Vec::new();
    for &y in levels {
        vertices.push([0.0, y]);
        vertices.push([1.0, y]);
    }
    let cells = (0..levels.len() - 1).map(|k| vec![2 * k, 2 * k + 1, 2 * k + 3, 2 * k + 2]).collect();
    Partition2D::new(vertices, cells, labels.to_vec())
}

/// On `(0,1) × (−1,1)`: `z_1` below `y = 1/n`, `z_2` on the slab
/// `1/n < y < 2/n`, `z_3` above.
pub fn gen_vanishing_slab(n: usize) -> Result<Partition2D> {
    if n < 3 {
        return Err(domain(format!("slab sequence needs n >= 3, got {n}")));
    }
    let nf = n as f64;
    stacked_slabs(&[-1.0, 1.0 / nf, 2.0 / nf, 1.0], &[0, 1, 2])
}

pub fn vanishing_slab_limit() -> Partition2D {
    stacked_slabs(&[-1.0, 0.0, 1.0], &[0, 2]).expect("static partition")
}

/// Two-phase field on `(−1,1)²`: label 1 inside the regular `n`-gon inscribed
/// in the circle of radius `r`, label 0 outside. The inner polygon is fanned
/// from the origin; each outer cell is the part of the square between two
/// consecutive vertex rays beyond the polygon edge.
pub fn gen_inscribed_polygon(n: usize, r: f64) -> Result<Partition2D> {
    if n < 3 {
        return Err(domain(format!("inscribed polygon needs n >= 3, got {n}")));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(domain(format!("radius {r} does not fit strictly inside (-1,1)^2")));
    }
    let angle = |k: usize| 2.0 * PI * (k % n) as f64 / n as f64;
    let mut vertices: Vec<Point> = vec![[0.0, 0.0]];
    for k in 0..n {
        let a = angle(k);
        vertices.push([r * a.cos(), r * a.sin()]);
    }
    for k in 0..n {
        let (c, s) = (angle(k).cos(), angle(k).sin());
        let t = 1.0 / c.abs().max(s.abs());
        vertices.push([c * t, s * t]);
    }
    let corner_base = vertices.len();
    let corner_angles: Vec<f64> = (0..4).map(|j| PI / 4.0 + j as f64 * PI / 2.0).collect();
    for &a in &corner_angles {
        vertices.push([a.cos().signum(), a.sin().signum()]);
    }
    let poly = |k: usize| 1 + (k % n);
    let ray = |k: usize| 1 + n + (k % n);
    let mut cells = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(2 * n);
    for k in 0..n {
        cells.push(vec![0, poly(k), poly(k + 1)]);
        labels.push(1);
    }
    let eps = 1e-9;
    for k in 0..n {
        let lo = angle(k);
        let hi = if k + 1 == n { 2.0 * PI } else { angle(k + 1) };
        let mut cell = vec![poly(k), ray(k)];
        for (j, &a) in corner_angles.iter().enumerate() {
            if a > lo + eps && a < hi - eps {
                cell.push(corner_base + j);
            }
        }
        cell.push(ray(k + 1));
        cell.push(poly(k + 1));
        cells.push(cell);
        labels.push(0);
    }
    // drop the unused corner vertices so validation sees no stray points
    let mut used = vec![false; vertices.len()];
    for c in &cells {
        for &v in c {
            used[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut kept = Vec::new();
    for (v, p) in vertices.into_iter().enumerate() {
        if used[v] {
            remap[v] = kept.len();
            kept.push(p);
        }
    }
    let cells = cells.into_iter().map(|c| c.into_iter().map(|v| remap[v]).collect()).collect();
    Partition2D::new(kept, cells, labels)
}

/// Shape of the zigzag interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SawtoothRule {
    /// Slope ±1 for every `n`.
    ConstantSlope,
    /// Slope ±1/n²; the interface length tends to 1.
    Shrinking,
}

impl SawtoothRule {
    pub fn slope(&self, n: usize) -> f64 {
        match self {
            SawtoothRule::ConstantSlope => 1.0,
            SawtoothRule::Shrinking => 1.0 / (n as f64 * n as f64),
        }
    }

    /// Height of one tooth; each tooth is `1/n` wide.
    pub fn height(&self, n: usize) -> f64 {
        self.slope(n) / (2.0 * n as f64)
    }
}

fn zigzag(n: usize, height: f64) -> Result<Partition2D> {
    let columns = 2 * n;
    let xs: Vec<f64> = (0..=columns).map(|k| k as f64 / columns as f64).collect();
    let mut vertices = Vec::new();
    for (k, &x) in xs.iter().enumerate() {
        let y = if k % 2 == 1 { 0.5 + height / 2.0 } else { 0.5 - height / 2.0 };
        vertices.push([x, 0.0]);
        vertices.push([x, y]);
        vertices.push([x, 1.0]);
    }
    let (bottom, mid, top) = (|k: usize| 3 * k, |k: usize| 3 * k + 1, |k: usize| 3 * k + 2);
    let mut cells = Vec::new();
    let mut labels = Vec::new();
    for k in 0..columns {
        cells.push(vec![bottom(k), bottom(k + 1), mid(k + 1), mid(k)]);
        labels.push(0);
        cells.push(vec![mid(k), mid(k + 1), top(k + 1), top(k)]);
        labels.push(1);
    }
    Partition2D::new(vertices, cells, labels)
}

/// Two-phase unit square whose interface is a zigzag with `n` teeth centred
/// on `y = 1/2`; label 0 below, label 1 above.
pub fn gen_sawtooth(n: usize, rule: SawtoothRule) -> Result<Partition2D> {
    if n < 1 {
        return Err(domain("sawtooth needs n >= 1"));
    }
    zigzag(n, rule.height(n))
}

/// Flat interface `y = 1/2`.
pub fn sawtooth_limit() -> Partition2D {
    stacked_slabs(&[0.0, 0.5, 1.0], &[0, 1]).expect("static partition")
}

/// Closed-form values recorded by a family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub perimeter: f64,
    pub total_variation: f64,
    /// `∫|u_n − u|`, when known.
    pub l1_gap: Option<f64>,
}

/// Gap thresholds used by the verdict rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub l1: f64,
    pub perimeter: f64,
    pub total_variation: f64,
    /// Functional gaps must stay below `functional_rel · bound(g) · H^{d−1}(S_u)`.
    pub functional_rel: f64,
}

/// Optional per-field overrides of [`Tolerances`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub l1: Option<f64>,
    pub perimeter: Option<f64>,
    pub total_variation: Option<f64>,
    pub functional_rel: Option<f64>,
}

impl Tolerances {
    pub fn with(mut self, o: &ToleranceOverrides) -> Self {
        if let Some(v) = o.l1 {
            self.l1 = v;
        }
        if let Some(v) = o.perimeter {
            self.perimeter = v;
        }
        if let Some(v) = o.total_variation {
            self.total_variation = v;
        }
        if let Some(v) = o.functional_rel {
            self.functional_rel = v;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    Remark,
    Slab,
    Polygon { radius: f64, proxy_sides: usize },
    Sawtooth(SawtoothRule),
}

/// A named generator `n ↦ u_n` with its limit and closed forms.
#[derive(Debug, Clone)]
pub struct SequenceFamily {
    kind: FamilyKind,
    labels: LabelSet,
}

/// Names accepted by [`SequenceFamily::by_name`].
pub const FAMILY_NAMES: [&str; 5] = ["remark", "slab", "ngon", "sawtooth-const", "sawtooth-shrink"];

impl SequenceFamily {
    pub fn remark() -> Self {
        Self { kind: FamilyKind::Remark, labels: LabelSet::scalar(&[0.0, 1.0, 2.0]).unwrap() }
    }

    pub fn slab() -> Self {
        Self { kind: FamilyKind::Slab, labels: LabelSet::scalar(&[0.0, 1.0, 2.0]).unwrap() }
    }

    pub fn ngon(radius: f64, proxy_sides: usize) -> Result<Self> {
        gen_inscribed_polygon(proxy_sides, radius)?;
        Ok(Self { kind: FamilyKind::Polygon { radius, proxy_sides }, labels: LabelSet::scalar(&[0.0, 1.0]).unwrap() })
    }

    pub fn sawtooth(rule: SawtoothRule) -> Self {
        Self { kind: FamilyKind::Sawtooth(rule), labels: LabelSet::scalar(&[0.0, 1.0]).unwrap() }
    }

    /// Looks up a family; `radius` and `proxy_sides` only matter for `"ngon"`.
    pub fn by_name(name: &str, radius: Option<f64>, proxy_sides: Option<usize>) -> Result<Self> {
        match name {
            "remark" => Ok(Self::remark()),
            "slab" => Ok(Self::slab()),
            "ngon" => Self::ngon(radius.unwrap_or(0.5), proxy_sides.unwrap_or(DEFAULT_PROXY_SIDES)),
            "sawtooth-const" => Ok(Self::sawtooth(SawtoothRule::ConstantSlope)),
            "sawtooth-shrink" => Ok(Self::sawtooth(SawtoothRule::Shrinking)),
            other => Err(domain(format!("unknown family '{other}' (known: {})", FAMILY_NAMES.join(", ")))),
        }
    }

    /// Replaces the labels; the count must match the family's.
    pub fn with_labels(mut self, labels: LabelSet) -> Result<Self> {
        if labels.len() != self.labels.len() {
            return Err(domain(format!(
                "family '{}' uses {} labels, got {}",
                self.name(),
                self.labels.len(),
                labels.len()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn name(&self) -> &'static str {
        match &self.kind {
            FamilyKind::Remark => "remark",
            FamilyKind::Slab => "slab",
            FamilyKind::Polygon { .. } => "ngon",
            FamilyKind::Sawtooth(SawtoothRule::ConstantSlope) => "sawtooth-const",
            FamilyKind::Sawtooth(SawtoothRule::Shrinking) => "sawtooth-shrink",
        }
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn min_n(&self) -> usize {
        match self.kind {
            FamilyKind::Sawtooth(_) => 1,
            _ => 3,
        }
    }

    pub fn generate(&self, n: usize) -> Result<Partition> {
        Ok(match &self.kind {
            FamilyKind::Remark => gen_remark(n)?.into(),
            FamilyKind::Slab => gen_vanishing_slab(n)?.into(),
            FamilyKind::Polygon { radius, .. } => gen_inscribed_polygon(n, *radius)?.into(),
            FamilyKind::Sawtooth(rule) => gen_sawtooth(n, *rule)?.into(),
        })
    }

    pub fn limit(&self) -> Result<Partition> {
        Ok(match &self.kind {
            FamilyKind::Remark => remark_limit().into(),
            FamilyKind::Slab => vanishing_slab_limit().into(),
            FamilyKind::Polygon { radius, proxy_sides } => gen_inscribed_polygon(*proxy_sides, *radius)?.into(),
            FamilyKind::Sawtooth(_) => sawtooth_limit().into(),
        })
    }

    /// Domain box shared by every member.
    pub fn region(&self) -> Result<BoundingBox> {
        Ok(self.limit()?.bounding_box())
    }

    fn d(&self, i: usize, j: usize) -> f64 {
        self.labels.distance(i, j)
    }

    pub fn closed_form(&self, n: usize) -> ClosedForm {
        let nf = n as f64;
        match &self.kind {
            FamilyKind::Remark | FamilyKind::Slab => ClosedForm {
                perimeter: 2.0,
                total_variation: self.d(0, 1) + self.d(1, 2),
                l1_gap: Some((self.d(0, 2) + self.d(1, 2)) / nf),
            },
            FamilyKind::Polygon { radius, proxy_sides } => {
                let per = 2.0 * nf * radius * (PI / nf).sin();
                let area = |k: f64| 0.5 * k * radius * radius * (2.0 * PI / k).sin();
                ClosedForm {
                    perimeter: per,
                    total_variation: self.d(0, 1) * per,
                    l1_gap: (proxy_sides % n == 0).then(|| self.d(0, 1) * (area(*proxy_sides as f64) - area(nf))),
                }
            }
            FamilyKind::Sawtooth(rule) => {
                let s = rule.slope(n);
                let len = (1.0 + s * s).sqrt();
                ClosedForm {
                    perimeter: len,
                    total_variation: self.d(0, 1) * len,
                    l1_gap: Some(self.d(0, 1) * rule.height(n) / 4.0),
                }
            }
        }
    }

    pub fn limit_closed_form(&self) -> ClosedForm {
        match &self.kind {
            FamilyKind::Remark | FamilyKind::Slab => {
                ClosedForm { perimeter: 1.0, total_variation: self.d(0, 2), l1_gap: Some(0.0) }
            }
            FamilyKind::Polygon { proxy_sides, .. } => {
                ClosedForm { l1_gap: Some(0.0), ..self.closed_form(*proxy_sides) }
            }
            FamilyKind::Sawtooth(_) => ClosedForm { perimeter: 1.0, total_variation: self.d(0, 1), l1_gap: Some(0.0) },
        }
    }

    pub fn default_n_values(&self) -> Vec<usize> {
        match &self.kind {
            FamilyKind::Polygon { .. } => vec![8, 16, 32, 64, 128, 256],
            _ => vec![4, 8, 16, 32, 64],
        }
    }

    /// Thresholds sized to the closed-form rates at the default largest `n`.
    pub fn default_tolerances(&self) -> Tolerances {
        let functional_rel = 5e-3;
        match &self.kind {
            FamilyKind::Remark | FamilyKind::Slab => {
                Tolerances { l1: 0.1, perimeter: 1e-8, total_variation: 1e-8, functional_rel }
            }
            FamilyKind::Polygon { radius, .. } => {
                let scale = 2.0 * PI * radius;
                Tolerances {
                    l1: 1e-3 * PI * radius * radius * self.d(0, 1),
                    perimeter: 1e-3 * scale,
                    total_variation: 1e-3 * scale * self.d(0, 1),
                    functional_rel,
                }
            }
            FamilyKind::Sawtooth(_) => Tolerances {
                l1: 1e-2 * self.d(0, 1),
                perimeter: 1e-3,
                total_variation: 1e-3 * self.d(0, 1),
                functional_rel,
            },
        }
    }
}

fn check_close(what: &str, n: Option<usize>, computed: f64, recorded: f64) -> Result<()> {
    if (computed - recorded).abs() > CLOSED_FORM_TOL * recorded.abs().max(1.0) {
        let at = n.map_or("limit".to_string(), |n| format!("n = {n}"));
        return Err(Error::Generator(format!("{what} at {at}: computed {computed}, closed form {recorded}")));
    }
    Ok(())
}

/// Rolling verdict flags.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub l1: bool,
    pub strict: bool,
    pub jump_strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub n: usize,
    pub l1_gap: f64,
    pub perim_gap: f64,
    pub tv_gap: f64,
    pub f_gaps: Vec<f64>,
    /// Verdict using only the rows up to this one.
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindingKind {
    /// Jump-strict convergence held but an energy did not converge.
    TheoremViolation,
    /// An energy did not converge and the hypothesis did not hold either.
    ExpectedNonConvergence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub integrand: Option<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub family: String,
    pub integrands: Vec<String>,
    pub tolerances: Tolerances,
    /// `functional_rel · bound(g) · H^{d−1}(S_u)` per integrand.
    pub functional_tolerances: Vec<f64>,
    pub limit_perimeter: f64,
    pub limit_total_variation: f64,
    pub limit_energies: Vec<f64>,
    pub rows: Vec<ReportRow>,
    pub verdict: Verdict,
    pub findings: Vec<Finding>,
}

impl ConvergenceReport {
    pub fn has_violation(&self) -> bool {
        self.findings.iter().any(|f| f.kind == FindingKind::TheoremViolation)
    }

    /// Gap of the named integrand at the largest `n`.
    pub fn final_gap(&self, integrand: &str) -> Option<f64> {
        let k = self.integrands.iter().position(|g| g == integrand)?;
        self.rows.last().map(|r| r.f_gaps[k])
    }
}

/// Final gap below tolerance and no increase over the last three entries.
fn converged(gaps: &[f64], tol: f64) -> bool {
    let Some(&last) = gaps.last() else { return false };
    let tail = &gaps[gaps.len().saturating_sub(3)..];
    let monotone = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1e-3));
    last < tol && monotone
}

/// Per-member measurements.
struct Measured {
    l1_gap: f64,
    perim_gap: f64,
    tv_gap: f64,
    f_gaps: Vec<f64>,
}

/// Runs the family over `n_values` and evaluates every gap.
pub fn run_convergence_experiment(
    family: &SequenceFamily,
    integrands: &[SurfaceIntegrand],
    n_values: &[usize],
    quad: &QuadratureSpec,
    tolerances: &Tolerances,
    symmetry: &SymmetryCheck,
) -> Result<ConvergenceReport> {
    if n_values.len() < 2 {
        return Err(domain("a convergence experiment needs at least two values of n"));
    }
    if n_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("n values must be strictly increasing"));
    }
    if n_values[0] < family.min_n() {
        return Err(domain(format!("family '{}' needs n >= {}", family.name(), family.min_n())));
    }
    quad.check()?;
    let labels = family.labels();
    let limit = family.limit()?;
    let limit_form = family.limit_closed_form();
    let limit_perimeter = limit.perimeter()?;
    let limit_tv = limit.total_variation(labels)?;
    check_close("limit perimeter", None, limit_perimeter, limit_form.perimeter)?;
    check_close("limit total variation", None, limit_tv, limit_form.total_variation)?;
    let limit_energies: Vec<f64> = integrands
        .iter()
        .map(|g| evaluate_functional_with(&limit, labels, g, quad, symmetry))
        .collect::<Result<_>>()?;

    let measured: Vec<Measured> = n_values
        .par_iter()
        .map(|&n| {
            let un = family.generate(n)?;
            let form = family.closed_form(n);
            let perimeter = un.perimeter()?;
            let tv = un.total_variation(labels)?;
            let l1 = un.l1_distance(&limit, labels)?;
            check_close("perimeter", Some(n), perimeter, form.perimeter)?;
            check_close("total variation", Some(n), tv, form.total_variation)?;
            if let Some(gap) = form.l1_gap {
                check_close("L1 gap", Some(n), l1, gap)?;
            }
            let f_gaps = integrands
                .iter()
                .zip(&limit_energies)
                .map(|(g, f_lim)| Ok((evaluate_functional_with(&un, labels, g, quad, symmetry)? - f_lim).abs()))
                .collect::<Result<_>>()?;
            Ok(Measured {
                l1_gap: l1,
                perim_gap: (perimeter - limit_perimeter).abs(),
                tv_gap: (tv - limit_tv).abs(),
                f_gaps,
            })
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(n_values.len());
    for (k, (&n, m)) in n_values.iter().zip(&measured).enumerate() {
        let upto = &measured[..=k];
        let l1: Vec<f64> = upto.iter().map(|m| m.l1_gap).collect();
        let per: Vec<f64> = upto.iter().map(|m| m.perim_gap).collect();
        let tv: Vec<f64> = upto.iter().map(|m| m.tv_gap).collect();
        let l1_ok = converged(&l1, tolerances.l1);
        let verdict = Verdict {
            l1: l1_ok,
            strict: l1_ok && converged(&tv, tolerances.total_variation),
            jump_strict: l1_ok && converged(&per, tolerances.perimeter),
        };
        rows.push(ReportRow {
            n,
            l1_gap: m.l1_gap,
            perim_gap: m.perim_gap,
            tv_gap: m.tv_gap,
            f_gaps: m.f_gaps.clone(),
            verdict,
        });
    }
    let verdict = rows.last().map(|r| r.verdict).unwrap_or_default();
    let functional_tolerances: Vec<f64> =
        integrands.iter().map(|g| tolerances.functional_rel * g.declared_bound() * limit_perimeter).collect();

    let mut findings = Vec::new();
    if verdict.jump_strict && !verdict.strict {
        findings.push(Finding {
            kind: FindingKind::TheoremViolation,
            integrand: None,
            detail: "jump-strict convergence without strict convergence".into(),
        });
    }
    let last = rows.last().expect("at least two rows");
    for (k, g) in integrands.iter().enumerate() {
        let gap = last.f_gaps[k];
        if gap < functional_tolerances[k] {
            continue;
        }
        let kind =
            if verdict.jump_strict { FindingKind::TheoremViolation } else { FindingKind::ExpectedNonConvergence };
        findings.push(Finding {
            kind,
            integrand: Some(g.name().to_string()),
            detail: format!("final gap {gap:e} at n = {} exceeds {:e}", last.n, functional_tolerances[k]),
        });
    }

    Ok(ConvergenceReport {
        family: family.name().to_string(),
        integrands: integrands.iter().map(|g| g.name().to_string()).collect(),
        tolerances: *tolerances,
        functional_tolerances,
        limit_perimeter,
        limit_total_variation: limit_tv,
        limit_energies,
        rows,
        verdict,
        findings,
    })
}
