//! The lifting `μ[T(u)]` of an embedded three-phase field, its mass, the
//! polar identity on the standard battery, and the fiber identity for `f_δ`
//! whose excess over `F(u)` is `√2·δ·F(u)`.

use caccioppoli::functional::SurfaceIntegrand;
use caccioppoli::lifting::{fiber_identity_check, polar_identity_check, standard_battery};
use caccioppoli::partition::io::PartitionFile;
use caccioppoli::{evaluate_functional, CutoffProfile, FDelta, LiftingMeasure, QuadratureSpec};

fn main() -> caccioppoli::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/triple_phase.json");
    let (z, u) = PartitionFile::read(path)?.into_parts()?;
    let quad = QuadratureSpec::default();

    let lift = LiftingMeasure::of_embedded(&u, &z)?;
    println!(
        "{} atoms, |μ| = {}, √2·H1(S_u) = {}",
        lift.atoms().len(),
        lift.total_mass(),
        2f64.sqrt() * u.perimeter()?
    );

    let battery = standard_battery(&u.bounding_box(), z.len(), 42);
    let residual = polar_identity_check(&lift, &battery, &quad)?;
    println!("polar identity over {} test functions: max residual {residual:.3e}", battery.len());

    let g = SurfaceIntegrand::jump(&z);
    let energy = evaluate_functional(&u, &z, &g, &quad)?;
    println!("F(u) = {energy}");
    for delta in [0.1, 0.05, 0.025] {
        let f = FDelta::new(CutoffProfile::new(delta)?, g.clone(), z.clone());
        let (lhs, rhs) = fiber_identity_check(&lift, &f, &quad)?;
        println!(
            "δ = {delta:<5}: ∫f_δ d|μ| = {lhs:.15}, fiber side {rhs:.15}, excess/(√2·δ·F) = {:.12}",
            (lhs - energy) / (2f64.sqrt() * delta * energy)
        );
    }
    Ok(())
}
