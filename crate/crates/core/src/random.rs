//! Seeded random partitions for property tests and fuzzing.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::labels::LabelSet;
use crate::partition::{Partition, Partition1D, Partition2D};

/// Size limits for [`random_partition`].
#[derive(Debug, Clone, Copy)]
pub struct RandomSpec {
    pub dim: usize,
    pub max_cells: usize,
    pub max_labels: usize,
    pub max_label_dim: usize,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self { dim: 2, max_cells: 20, max_labels: 5, max_label_dim: 3 }
    }
}

/// Random label set with `2..=max_labels` labels in `R^N`, `1 <= N <= max_label_dim`.
pub fn random_labels<R: Rng>(rng: &mut R, max_labels: usize, max_label_dim: usize) -> LabelSet {
    let q = rng.random_range(2..=max_labels.max(2));
    let n = rng.random_range(1..=max_label_dim.max(1));
    loop {
        let labels = (0..q).map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        if let Ok(set) = LabelSet::new(labels) {
            if set.min_separation() > 1e-3 {
                return set;
            }
        }
    }
}

fn random_1d<R: Rng>(rng: &mut R, max_cells: usize, q: usize) -> Partition1D {
    let cells = rng.random_range(1..=max_cells.max(1));
    let lo = rng.random_range(-2.0..0.0);
    let hi = lo + rng.random_range(0.5..3.0);
    let h = (hi - lo) / cells as f64;
    let breakpoints = (1..cells).map(|k| lo + h * (k as f64 + rng.random_range(-0.3..0.3))).collect();
    let labels = (0..cells).map(|_| rng.random_range(0..q)).collect();
    Partition1D::new((lo, hi), breakpoints, labels).expect("jittered breakpoints stay ordered")
}

/// Perturbed grid on the unit square; some quads are split into triangles.
fn random_2d<R: Rng>(rng: &mut R, max_cells: usize, q: usize) -> Partition2D {
    let max_cells = max_cells.max(1);
    let (kx, ky) = loop {
        let kx = rng.random_range(1..=4usize);
        let ky = rng.random_range(1..=4usize);
        if kx * ky <= max_cells {
            break (kx, ky);
        }
    };
    let (hx, hy) = (1.0 / kx as f64, 1.0 / ky as f64);
    let mut vertices = Vec::with_capacity((kx + 1) * (ky + 1));
    for j in 0..=ky {
        for i in 0..=kx {
            let mut p = [i as f64 * hx, j as f64 * hy];
            if i > 0 && i < kx {
                p[0] += rng.random_range(-0.2..0.2) * hx;
            }
            if j > 0 && j < ky {
                p[1] += rng.random_range(-0.2..0.2) * hy;
            }
            vertices.push(p);
        }
    }
    let id = |i: usize, j: usize| j * (kx + 1) + i;
    let mut cells = Vec::new();
    let mut spare = max_cells - kx * ky;
    for j in 0..ky {
        for i in 0..kx {
            let quad = [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
            if spare > 0 && rng.random_bool(0.4) {
                spare -= 1;
                if rng.random_bool(0.5) {
                    cells.push(vec![quad[0], quad[1], quad[2]]);
                    cells.push(vec![quad[0], quad[2], quad[3]]);
                } else {
                    cells.push(vec![quad[0], quad[1], quad[3]]);
                    cells.push(vec![quad[1], quad[2], quad[3]]);
                }
            } else {
                cells.push(quad.to_vec());
            }
        }
    }
    let labels = (0..cells.len()).map(|_| rng.random_range(0..q)).collect();
    Partition2D::new(vertices, cells, labels).expect("perturbed grid is a valid mesh")
}

/// Random label set and partition drawn from `seed`.
pub fn random_partition(seed: u64, spec: &RandomSpec) -> (LabelSet, Partition) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = random_labels(&mut rng, spec.max_labels, spec.max_label_dim);
    let u = match spec.dim {
        1 => random_1d(&mut rng, spec.max_cells, labels.len()).into(),
        _ => random_2d(&mut rng, spec.max_cells, labels.len()).into(),
    };
    (labels, u)
}

/// A second field on the same mesh with fresh labels, for metric checks.
pub fn relabelled(u: &Partition, q: usize, seed: u64) -> Partition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = (0..u.cell_count()).map(|_| rng.random_range(0..q)).collect();
    match u {
        Partition::D1(p) => Partition1D::from_parts_unchecked(p.interval(), p.breakpoints().to_vec(), labels).into(),
        Partition::D2(p) => Partition2D::from_parts_unchecked(p.vertices().to_vec(), p.cells().to_vec(), labels).into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_partitions_validate() {
        for seed in 0..200 {
            for dim in [1, 2] {
                let spec = RandomSpec { dim, ..RandomSpec::default() };
                let (z, u) = random_partition(seed, &spec);
                assert!(u.cell_count() <= spec.max_cells);
                assert!(z.len() <= spec.max_labels);
                let report = u.validate(z.len());
                assert!(report.is_ok(), "seed {seed}: {report}");
            }
        }
    }

    #[test]
    fn seeded() {
        let spec = RandomSpec::default();
        let (a, u) = random_partition(7, &spec);
        let (b, v) = random_partition(7, &spec);
        assert_eq!(a, b);
        assert_eq!(u, v);
    }
}
