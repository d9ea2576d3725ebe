//! Built-in integrands, a polynomial integrand, and the symmetry probe that
//! rejects integrands which are not invariant under `(a, b, ν) ↦ (b, a, −ν)`.

use caccioppoli::functional::{
    builtin, check_symmetry, PolynomialIntegrand, PolynomialTerm, PolynomialWeight, BUILTIN_NAMES,
};
use caccioppoli::sequences::gen_inscribed_polygon;
use caccioppoli::{evaluate_functional, LabelSet, Partition, QuadratureSpec, SurfaceIntegrand};

fn main() -> caccioppoli::Result<()> {
    let z = LabelSet::scalar(&[0.0, 1.0])?;
    let u: Partition = gen_inscribed_polygon(6, 0.5)?.into();
    let region = u.bounding_box();
    let quad = QuadratureSpec::default();

    println!("hexagon of circumradius 1/2 in (-1,1)^2, {} jump facets", u.jump_set()?.len());
    for name in BUILTIN_NAMES {
        let g = builtin(name, &z, &region)?;
        println!("  F[{name}] = {:.15}", evaluate_functional(&u, &z, &g, &quad)?);
    }

    // ν₁² + x₂²ν₂², times |a − b|
    let poly = PolynomialIntegrand {
        terms: vec![
            PolynomialTerm { coef: 1.0, x: vec![], nu: vec![2] },
            PolynomialTerm { coef: 1.0, x: vec![0, 2], nu: vec![0, 2] },
        ],
        weight: PolynomialWeight::Jump,
    };
    let g = poly.build("poly", &z, &region)?;
    println!("  F[poly] = {:.15}", evaluate_functional(&u, &z, &g, &quad)?);

    // odd in ν: fails the probe and is refused
    let odd = SurfaceIntegrand::new("odd", 1.0, |_, _, _, nu| nu[0].abs().min(1.0) * nu[0].signum())?;
    let report = check_symmetry(&odd, &z, &region, 64, 1)?;
    println!("odd integrand: max asymmetry {:.3}, passed = {}", report.max_asymmetry, report.passed());
    match evaluate_functional(&u, &z, &odd, &quad) {
        Ok(v) => println!("  unexpectedly evaluated to {v}"),
        Err(e) => println!("  {e}"),
    }
    Ok(())
}
