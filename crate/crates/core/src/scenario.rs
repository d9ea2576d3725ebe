//! JSON scenario files driving the convergence harness, and the CSV/JSON
//! tables written from them.
//!
//! ```json
//! {
//!   "format": "caccioppoli-scenario/1",
//!   "family": { "name": "ngon", "n_values": [8, 16, 32], "r": 0.5 },
//!   "integrands": ["one", "smooth-x"],
//!   "quadrature": { "order": 8 },
//!   "deltas": [0.1, 0.05],
//!   "lifting_checks": true,
//!   "seed": 7
//! }
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::functional::{builtin, evaluate_functional_with, PolynomialIntegrand, SurfaceIntegrand, SymmetryCheck};
use crate::labels::{CutoffProfile, FDelta, LabelSet};
use crate::lifting::{
    fiber_identity_check, lifting_weakstar_probe, polar_identity_check, standard_battery, LiftingMeasure,
};
use crate::partition::io::{format_f64, to_json_string};
use crate::quadrature::QuadratureSpec;
use crate::sequences::{run_convergence_experiment, ConvergenceReport, SequenceFamily, ToleranceOverrides};

pub const SCENARIO_FORMAT: &str = "caccioppoli-scenario/1";
pub const REPORT_FORMAT: &str = "caccioppoli-report/1";

/// Residual above which a lifting identity is reported as broken.
pub const LIFTING_IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub name: String,
    #[serde(default)]
    pub n_values: Option<Vec<usize>>,
    /// Radius for `"ngon"`.
    #[serde(default)]
    pub r: Option<f64>,
    /// Sides of the reference polygon for `"ngon"`.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub labels: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedPolynomial {
    pub name: String,
    pub polynomial: PolynomialIntegrand,
}

/// A built-in integrand by name, or a named polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntegrandSpec {
    Builtin(String),
    Polynomial(NamedPolynomial),
}

impl IntegrandSpec {
    pub fn name(&self) -> &str {
        match self {
            IntegrandSpec::Builtin(n) => n,
            IntegrandSpec::Polynomial(p) => &p.name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub format: String,
    #[serde(default)]
    pub description: Option<String>,
    pub family: FamilySpec,
    pub integrands: Vec<IntegrandSpec>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    /// Cut-off widths for the `f_δ` checks.
    #[serde(default)]
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub lifting_checks: bool,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    /// Seeds the symmetry probe and the test-function battery.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputFormat,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if s.format != SCENARIO_FORMAT {
            return Err(Error::Parse(format!("expected format \"{SCENARIO_FORMAT}\", found \"{}\"", s.format)));
        }
        Ok(s)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Resolves every name and parameter into runnable parts.
    pub fn resolve(&self) -> Result<ResolvedScenario> {
        let seed = self.seed.ok_or_else(|| domain("scenario needs a seed (set \"seed\" or pass --seed)"))?;
        let mut family = SequenceFamily::by_name(&self.family.name, self.family.r, self.family.m)?;
        if let Some(labels) = &self.family.labels {
            family = family.with_labels(LabelSet::new(labels.clone())?)?;
        }
        let n_values = self.family.n_values.clone().unwrap_or_else(|| family.default_n_values());
        if self.integrands.is_empty() {
            return Err(domain("scenario lists no integrands"));
        }
        let region = family.region()?;
        let mut seen = HashSet::new();
        let integrands = self
            .integrands
            .iter()
            .map(|spec| {
                if !seen.insert(spec.name().to_string()) {
                    return Err(domain(format!("integrand '{}' listed twice", spec.name())));
                }
                match spec {
                    IntegrandSpec::Builtin(name) => builtin(name, family.labels(), &region),
                    IntegrandSpec::Polynomial(p) => p.polynomial.build(&p.name, family.labels(), &region),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let profiles = self.deltas.iter().map(|&d| CutoffProfile::new(d)).collect::<Result<Vec<_>>>()?;
        self.quadrature.check()?;
        let tolerances = family.default_tolerances().with(&self.tolerances);
        Ok(ResolvedScenario {
            family,
            integrands,
            n_values,
            quad: self.quadrature,
            profiles,
            lifting_checks: self.lifting_checks || !self.deltas.is_empty(),
            tolerances,
            seed,
        })
    }
}

/// A scenario with every name looked up.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub family: SequenceFamily,
    pub integrands: Vec<SurfaceIntegrand>,
    pub n_values: Vec<usize>,
    pub quad: QuadratureSpec,
    pub profiles: Vec<CutoffProfile>,
    pub lifting_checks: bool,
    pub tolerances: crate::sequences::Tolerances,
    pub seed: u64,
}

/// Lifting diagnostics for one member of the sequence, on the embedded field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftingRow {
    pub n: usize,
    pub polar_residual: f64,
    /// Largest gap between the two sides of the fiber identity over all `δ`.
    pub fiber_gap: f64,
    /// `∫ f_δ d|μ| − F(u_n)` per `δ`, built on the first integrand.
    pub fdelta_gaps: Vec<f64>,
    pub mass_gap: f64,
    pub weakstar_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftingTable {
    pub integrand: String,
    pub deltas: Vec<f64>,
    pub rows: Vec<LiftingRow>,
}

impl LiftingTable {
    pub fn broken_identities(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.rows {
            if r.polar_residual > LIFTING_IDENTITY_TOL {
                out.push(format!("polar identity residual {:e} at n = {}", r.polar_residual, r.n));
            }
            if r.fiber_gap > LIFTING_IDENTITY_TOL {
                out.push(format!("fiber identity gap {:e} at n = {}", r.fiber_gap, r.n));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutput {
    pub format: &'static str,
    pub seed: u64,
    pub report: ConvergenceReport,
    pub lifting: Option<LiftingTable>,
}

impl RunOutput {
    /// 0 when clean, 1 when the run produced a theorem violation or a broken identity.
    pub fn exit_code(&self) -> i32 {
        let broken = self.lifting.as_ref().is_some_and(|l| !l.broken_identities().is_empty());
        if self.report.has_violation() || broken {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    /// Main table: `n, l1_gap, perim_gap, tv_gap, fgap_<name>…, l1, strict, jump_strict`.
    pub fn report_csv(&self) -> String {
        let r = &self.report;
        let mut header: Vec<String> = ["n", "l1_gap", "perim_gap", "tv_gap"].map(String::from).to_vec();
        header.extend(r.integrands.iter().map(|g| format!("fgap_{g}")));
        header.extend(["l1", "strict", "jump_strict"].map(String::from));
        let rows = r.rows.iter().map(|row| {
            let mut rec =
                vec![row.n.to_string(), format_f64(row.l1_gap), format_f64(row.perim_gap), format_f64(row.tv_gap)];
            rec.extend(row.f_gaps.iter().map(|&g| format_f64(g)));
            rec.extend([row.verdict.l1, row.verdict.strict, row.verdict.jump_strict].map(|b| b.to_string()));
            rec
        });
        write_csv(header, rows)
    }

    /// Lifting table: `n, polar_residual, fiber_gap, fdelta_gap_<δ>…, mass_gap, weakstar_residual`.
    pub fn lifting_csv(&self) -> Option<String> {
        let t = self.lifting.as_ref()?;
        let mut header: Vec<String> = ["n", "polar_residual", "fiber_gap"].map(String::from).to_vec();
        header.extend(t.deltas.iter().map(|d| format!("fdelta_gap_{d}")));
        header.extend(["mass_gap", "weakstar_residual"].map(String::from));
        let rows = t.rows.iter().map(|row| {
            let mut rec = vec![row.n.to_string(), format_f64(row.polar_residual), format_f64(row.fiber_gap)];
            rec.extend(row.fdelta_gaps.iter().map(|&g| format_f64(g)));
            rec.extend([format_f64(row.mass_gap), format_f64(row.weakstar_residual)]);
            rec
        });
        Some(write_csv(header, rows))
    }

    /// One line per finding and broken identity.
    pub fn summary(&self) -> String {
        let r = &self.report;
        let mut out = format!(
            "family {}: l1={} strict={} jump_strict={}\n",
            r.family, r.verdict.l1, r.verdict.strict, r.verdict.jump_strict
        );
        for f in &r.findings {
            let kind = match f.kind {
                crate::sequences::FindingKind::TheoremViolation => "THEOREM-VIOLATION",
                crate::sequences::FindingKind::ExpectedNonConvergence => "expected non-convergence",
            };
            match &f.integrand {
                Some(g) => out.push_str(&format!("{kind} [{g}]: {}\n", f.detail)),
                None => out.push_str(&format!("{kind}: {}\n", f.detail)),
            }
        }
        if let Some(t) = &self.lifting {
            for b in t.broken_identities() {
                out.push_str(&format!("BROKEN-IDENTITY: {b}\n"));
            }
        }
        out
    }

    /// Writes the tables. CSV goes to `out` with the lifting table beside it
    /// as `<out>.lifting.csv`; JSON goes to `out` as one document.
    pub fn write(&self, out: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
        match format {
            OutputFormat::Json => {
                std::fs::write(out, self.to_json())?;
                Ok(vec![out.to_path_buf()])
            }
            OutputFormat::Csv => {
                std::fs::write(out, self.report_csv())?;
                let mut written = vec![out.to_path_buf()];
                if let Some(table) = self.lifting_csv() {
                    let mut name = out.as_os_str().to_owned();
                    name.push(".lifting.csv");
                    let path = PathBuf::from(name);
                    std::fs::write(&path, table)?;
                    written.push(path);
                }
                Ok(written)
            }
        }
    }

    /// Everything in one string, for printing to stdout.
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => match self.lifting_csv() {
                Some(l) => format!("{}\n{}", self.report_csv(), l),
                None => self.report_csv(),
            },
        }
    }
}

fn write_csv(header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("writing to memory");
    for r in rows {
        w.write_record(&r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv writes UTF-8")
}

fn lifting_table(s: &ResolvedScenario, symmetry: &SymmetryCheck) -> Result<LiftingTable> {
    let fam = &s.family;
    let labels = fam.labels();
    let region = fam.region()?;
    let battery = standard_battery(&region, labels.len(), s.seed);
    let g = &s.integrands[0];
    let fdeltas: Vec<FDelta> = s.profiles.iter().map(|p| FDelta::new(*p, g.clone(), labels.clone())).collect();
    let limit = LiftingMeasure::of_embedded(&fam.limit()?, labels)?;

    struct Partial {
        lift: LiftingMeasure,
        polar: f64,
        fiber: f64,
        fdelta: Vec<f64>,
    }
    let partials: Vec<Partial> = s
        .n_values
        .par_iter()
        .map(|&n| {
            let un = fam.generate(n)?;
            let lift = LiftingMeasure::of_embedded(&un, labels)?;
            let polar = polar_identity_check(&lift, &battery, &s.quad)?;
            let energy = evaluate_functional_with(&un, labels, g, &s.quad, symmetry)?;
            let mut fiber = 0.0f64;
            let mut fdelta = Vec::with_capacity(fdeltas.len());
            for f in &fdeltas {
                let (lhs, rhs) = fiber_identity_check(&lift, f, &s.quad)?;
                fiber = fiber.max((lhs - rhs).abs());
                fdelta.push(lhs - energy);
            }
            Ok(Partial { lift, polar, fiber, fdelta })
        })
        .collect::<Result<_>>()?;
    let lifts: Vec<LiftingMeasure> = partials.iter().map(|p| p.lift.clone()).collect();
    let probe = lifting_weakstar_probe(&lifts, &limit, &battery, &s.quad)?;
    let rows = s
        .n_values
        .iter()
        .zip(partials)
        .zip(probe)
        .map(|((&n, p), w)| LiftingRow {
            n,
            polar_residual: p.polar,
            fiber_gap: p.fiber,
            fdelta_gaps: p.fdelta,
            mass_gap: w.mass_gap,
            weakstar_residual: w.max_residual(),
        })
        .collect();
    Ok(LiftingTable { integrand: g.name().to_string(), deltas: s.profiles.iter().map(|p| p.delta()).collect(), rows })
}

/// Runs a resolved scenario.
pub fn run_resolved(s: &ResolvedScenario) -> Result<RunOutput> {
    let symmetry = SymmetryCheck { seed: s.seed, ..SymmetryCheck::default() };
    let report = run_convergence_experiment(&s.family, &s.integrands, &s.n_values, &s.quad, &s.tolerances, &symmetry)?;
    let lifting = if s.lifting_checks { Some(lifting_table(s, &symmetry)?) } else { None };
    Ok(RunOutput { format: REPORT_FORMAT, seed: s.seed, report, lifting })
}

/// Parses, resolves and runs a scenario.
pub fn run_scenario(scenario: &Scenario) -> Result<RunOutput> {
    run_resolved(&scenario.resolve()?)
}
