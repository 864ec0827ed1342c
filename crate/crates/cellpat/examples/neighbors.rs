//! Enumerate the single-edit neighborhood of one edge: every operation swap
//! and every collision-free source redirection.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use cellpat::{all_neighbors, neighbors, random_cell, CellKind};

fn main() -> cellpat::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let cell = random_cell(&mut rng, CellKind::Normal, 4);
    println!("cell under study ({} edges):", cell.edges().len());
    for edge in cell.edges() {
        println!("  {edge}");
    }

    let edge = cell.edges()[3];
    println!("neighbors of {edge}:");
    for (mv, neighbor) in neighbors(&cell, edge)? {
        debug_assert!(neighbor.validate().valid());
        println!("  {mv}");
    }

    let per_edge = neighbors(&cell, edge)?.len();
    let total = all_neighbors(&cell)?.len();
    println!("{per_edge} neighbors via that edge, {total} across all edges");

    let nb201 = random_cell(&mut rng, CellKind::Nb201, 3);
    let first = nb201.edges()[0];
    let moves: Vec<String> = neighbors(&nb201, first)?
        .into_iter()
        .map(|(mv, _)| mv.to_string())
        .collect();
    println!(
        "nb201 edge {first} has {} neighbors (operation swaps only): {}",
        moves.len(),
        moves.join(", ")
    );
    Ok(())
}
