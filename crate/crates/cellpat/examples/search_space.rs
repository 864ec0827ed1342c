//! Walk both supported search spaces: their operation sets, node layouts,
//! possible edges, and the macro stacking of cells into a network.

use cellpat::{enumerate_possible_edges, macro_layout, SearchSpace};

fn main() -> cellpat::Result<()> {
    for space in [SearchSpace::Darts, SearchSpace::Nb201] {
        let m = space.default_m();
        println!("{} (m = {m}):", space.id());
        let ops: Vec<String> = space
            .operations()
            .iter()
            .map(|op| {
                let tag = if op.is_convolution() { "conv" } else { "non-conv" };
                format!("{} ({tag})", op.code())
            })
            .collect();
        println!("  {} operations: {}", ops.len(), ops.join(", "));

        let possible = enumerate_possible_edges(space, m)?;
        println!("  {} possible edges:", possible.len());
        let rendered: Vec<String> = possible
            .iter()
            .map(|(src, dst)| format!("{}->{}", src.0, dst.0))
            .collect();
        println!("    {}", rendered.join(" "));
        match space {
            SearchSpace::Darts => println!(
                "  each of the {m} intermediate nodes keeps exactly 2 of these, \
                 so a cell has {} edges",
                2 * m
            ),
            SearchSpace::Nb201 => println!(
                "  the cell is the complete forward DAG: all {} edges carry an operation",
                possible.len()
            ),
        }
    }

    let n_cells = 8;
    let layout = macro_layout(n_cells)?;
    let rendered: Vec<&str> = layout.iter().map(|k| k.id()).collect();
    println!("macro layout for a {n_cells}-cell darts network: {}", rendered.join(" "));
    Ok(())
}
