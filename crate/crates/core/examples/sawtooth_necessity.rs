//! Zigzag interfaces converge in L¹ to a flat one. With slope 1 the interface
//! length stays √2 and the anisotropic energy `|ν₁|` stays at 1 while its
//! limit is 0. Shrinking the slope like `1/n²` restores convergence.

use caccioppoli::functional::SurfaceIntegrand;
use caccioppoli::sequences::{gen_sawtooth, sawtooth_limit, SawtoothRule};
use caccioppoli::{evaluate_functional, LabelSet, Partition, QuadratureSpec};

fn main() -> caccioppoli::Result<()> {
    let z = LabelSet::scalar(&[0.0, 1.0])?;
    let quad = QuadratureSpec::default();
    let aniso = SurfaceIntegrand::aniso_x();
    let limit: Partition = sawtooth_limit().into();
    println!("limit: H1 = {}, F_aniso = {}", limit.perimeter()?, evaluate_functional(&limit, &z, &aniso, &quad)?);
    for rule in [SawtoothRule::ConstantSlope, SawtoothRule::Shrinking] {
        println!("{rule:?}");
        for n in [2, 4, 8, 16, 32, 64] {
            let u: Partition = gen_sawtooth(n, rule)?.into();
            println!(
                "  n = {n:>2}: L1 gap {:.3e}, H1 = {:.12}, F_aniso = {:.3e}",
                u.l1_distance(&limit, &z)?,
                u.perimeter()?,
                evaluate_functional(&u, &z, &aniso, &quad)?
            );
        }
    }
    Ok(())
}
