//! Labels embedded as simplex vertices `T(z_i) = e_i`, the middle halves
//! `L_ij` of the simplex edges, and the cut-off integrand `f_δ`.

use caccioppoli::functional::SurfaceIntegrand;
use caccioppoli::labels::EmbeddedSegment;
use caccioppoli::partition::Partition2D;
use caccioppoli::{CutoffProfile, FDelta, LabelSet, Partition};
use nalgebra::DMatrix;

fn main() -> caccioppoli::Result<()> {
    let z = LabelSet::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]])?;
    for k in 0..z.len() {
        println!("T({:?}) = {:?}", z.label(k), z.embed(z.label(k))?);
    }

    let seg = EmbeddedSegment::new(0, 1, z.len())?;
    println!("|e_1 - e_2| = {}, sqrt(2)·H1(L_12) = {}", seg.length(), 2f64.sqrt() * seg.core_length());

    let profile = CutoffProfile::new(0.1)?;
    println!("cutoff breaks in λ: {:?}", profile.parameter_breaks());
    for lambda in [0.1, 0.2, 0.25, 0.5, 0.8] {
        println!("  θ(λ = {lambda}) = {:.4}", profile.at_parameter(lambda));
    }

    // f_δ at the midpoint of L_12 with ξ = (e_1 − e_2) ⊗ ν / √2
    let g = SurfaceIntegrand::jump(&z);
    let f = FDelta::new(profile, g, z.clone());
    let mut xi = DMatrix::zeros(3, 2);
    xi[(0, 0)] = 1.0 / 2f64.sqrt();
    xi[(1, 0)] = -1.0 / 2f64.sqrt();
    let mid = seg.point_at(0.5);
    println!("f_δ(x, midpoint, ξ) = {}", f.eval(&[0.0, 0.0], &mid, &xi)?);

    // the embedded field has |DT(u)| = √2 · H¹(S_u)
    let u: Partition = Partition2D::new(
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [2.0, 0.0], [2.0, 1.0]],
        vec![vec![0, 1, 2, 3], vec![1, 4, 5, 2]],
        vec![0, 2],
    )?
    .into();
    let (tz, tu) = caccioppoli::labels::embed_field(&z, &u)?;
    println!("H1(S_u) = {}, |DT(u)| = {}", u.perimeter()?, tu.total_variation(&tz)?);
    Ok(())
}
