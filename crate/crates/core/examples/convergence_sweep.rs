//! Runs every shipped family through the convergence harness with all
//! built-in integrands and prints the verdicts and findings.

use caccioppoli::functional::{builtin, SymmetryCheck, BUILTIN_NAMES};
use caccioppoli::sequences::FAMILY_NAMES;
use caccioppoli::{run_convergence_experiment, QuadratureSpec, SequenceFamily};

fn main() -> caccioppoli::Result<()> {
    let quad = QuadratureSpec::default();
    for name in FAMILY_NAMES {
        let family = SequenceFamily::by_name(name, None, None)?;
        let region = family.region()?;
        let integrands =
            BUILTIN_NAMES.iter().map(|g| builtin(g, family.labels(), &region)).collect::<Result<Vec<_>, _>>()?;
        let report = run_convergence_experiment(
            &family,
            &integrands,
            &family.default_n_values(),
            &quad,
            &family.default_tolerances(),
            &SymmetryCheck::default(),
        )?;
        let v = report.verdict;
        println!("{name}: L1 {} strict {} jump-strict {}", v.l1, v.strict, v.jump_strict);
        for (g, gap) in report.integrands.iter().zip(&report.rows.last().unwrap().f_gaps) {
            println!("    {g:<9} final F-gap {gap:.3e}");
        }
        for f in &report.findings {
            println!("    {:?} [{}]: {}", f.kind, f.integrand.as_deref().unwrap_or("-"), f.detail);
        }
    }
    Ok(())
}
