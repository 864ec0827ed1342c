//! Seeded random generation of valid cells and network specs.

use rand::Rng;

use crate::cell::{enumerate_possible_edges, CellGraph, CellKind, NetworkSpec, OpEdge};
use crate::error::Result;
use crate::space::SearchSpace;

/// Draws a uniformly random valid cell of the given kind and size.
pub fn random_cell<R: Rng>(rng: &mut R, kind: CellKind, m_intermediate: usize) -> CellGraph {
    let space = kind.space();
    let ops = space.operations();
    let mut edges = Vec::new();
    match space {
        SearchSpace::Darts => {
            for dst in 2..2 + m_intermediate {
                let picks = rand::seq::index::sample(rng, dst, 2);
                for src in picks {
                    edges.push(OpEdge::new(src, dst, ops[rng.gen_range(0..ops.len())]));
                }
            }
        }
        SearchSpace::Nb201 => {
            let pairs = enumerate_possible_edges(space, m_intermediate)
                .expect("m_intermediate >= 1");
            for (src, dst) in pairs {
                edges.push(OpEdge {
                    src,
                    dst,
                    op: ops[rng.gen_range(0..ops.len())],
                });
            }
        }
    }
    CellGraph::new(kind, m_intermediate, edges)
}

/// Draws a random valid network spec for the given space.
pub fn random_network_spec<R: Rng>(
    rng: &mut R,
    space: SearchSpace,
    m_intermediate: usize,
    n_cells: usize,
) -> Result<NetworkSpec> {
    match space {
        SearchSpace::Darts => NetworkSpec::darts(
            random_cell(rng, CellKind::Normal, m_intermediate),
            random_cell(rng, CellKind::Reduction, m_intermediate),
            n_cells,
        ),
        SearchSpace::Nb201 => NetworkSpec::nb201(
            random_cell(rng, CellKind::Nb201, m_intermediate),
            n_cells,
        ),
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    use super::*;

    #[test]
    fn sampled_cells_are_valid_and_seed_deterministic() {
        for space in [SearchSpace::Darts, SearchSpace::Nb201] {
            let m = space.default_m();
            let mut a = ChaCha20Rng::seed_from_u64(7);
            let mut b = ChaCha20Rng::seed_from_u64(7);
            for _ in 0..50 {
                let spec = random_network_spec(&mut a, space, m, 5).unwrap();
                assert!(spec.validate().valid());
                assert_eq!(spec, random_network_spec(&mut b, space, m, 5).unwrap());
            }
        }
    }
}
