//! The 1D remark: `u_n → u` strictly in BV, yet `H⁰(S_{u_n}) = 2` for every
//! `n` while `H⁰(S_u) = 1`. With `g ≡ 1` the energy does not converge; with
//! `g = |a − b|` it is the total variation and does.

use caccioppoli::functional::SurfaceIntegrand;
use caccioppoli::sequences::{gen_remark, remark_limit};
use caccioppoli::{evaluate_functional, LabelSet, Partition, QuadratureSpec};

fn main() -> caccioppoli::Result<()> {
    let z = LabelSet::scalar(&[0.0, 1.0, 2.0])?;
    let quad = QuadratureSpec::default();
    let limit: Partition = remark_limit().into();
    let one = SurfaceIntegrand::one();
    let jump = SurfaceIntegrand::jump(&z);

    println!("{:>4} {:>10} {:>8} {:>8} {:>10}", "n", "L1 gap", "H0(S)", "|Du|", "F_one");
    for n in [3, 4, 8, 16, 32, 64] {
        let u: Partition = gen_remark(n)?.into();
        println!(
            "{n:>4} {:>10.6} {:>8} {:>8} {:>10}",
            u.l1_distance(&limit, &z)?,
            u.perimeter()?,
            u.total_variation(&z)?,
            evaluate_functional(&u, &z, &one, &quad)?,
        );
    }
    println!(
        "limit {:>9} {:>8} {:>8} {:>10}",
        0.0,
        limit.perimeter()?,
        limit.total_variation(&z)?,
        evaluate_functional(&limit, &z, &one, &quad)?
    );
    let un: Partition = gen_remark(64)?.into();
    println!(
        "g = |a-b|: F(u_64) = {}, F(u) = {}",
        evaluate_functional(&un, &z, &jump, &quad)?,
        evaluate_functional(&limit, &z, &jump, &quad)?
    );
    Ok(())
}
