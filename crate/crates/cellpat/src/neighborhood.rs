//! Single-edit neighborhoods of a cell: for one chosen edge, every operation
//! swap and every collision-free source redirection.

use std::fmt;

use crate::cell::{CellGraph, NodeId, OpEdge};
use crate::error::{Error, Result};

/// One edit turning a cell into a neighbor cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NeighborMove {
    /// Keep the edge in place, swap its operation.
    OpSwap {
        edge: OpEdge,
        replacement: crate::space::Op,
    },
    /// Keep the operation, redirect the edge to another preceding node.
    SourceChange { edge: OpEdge, replacement: NodeId },
}

impl NeighborMove {
    /// The original edge this move perturbs.
    pub fn edge(&self) -> OpEdge {
        match *self {
            NeighborMove::OpSwap { edge, .. } => edge,
            NeighborMove::SourceChange { edge, .. } => edge,
        }
    }
}

impl fmt::Display for NeighborMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NeighborMove::OpSwap { edge, replacement } => {
                write!(f, "{edge} op->{replacement}")
            }
            NeighborMove::SourceChange { edge, replacement } => {
                write!(f, "{edge} src->{replacement}")
            }
        }
    }
}

/// Applies a move to a cell, producing the neighbor cell.
pub fn apply_move(cell: &CellGraph, mv: NeighborMove) -> CellGraph {
    let original = mv.edge();
    let edges = cell
        .edges()
        .iter()
        .map(|&e| {
            if e.src == original.src && e.dst == original.dst {
                match mv {
                    NeighborMove::OpSwap { replacement, .. } => OpEdge {
                        op: replacement,
                        ..e
                    },
                    NeighborMove::SourceChange { replacement, .. } => OpEdge {
                        src: replacement,
                        ..e
                    },
                }
            } else {
                e
            }
        })
        .collect();
    cell.with_edges(edges)
}

/// Lazily enumerates the neighbors reachable by perturbing one edge:
/// first the K−1 operation swaps in operation-set order, then source
/// redirections to each free preceding node in ascending order.
pub fn neighbors_iter<'a>(
    cell: &'a CellGraph,
    edge: OpEdge,
) -> Result<impl Iterator<Item = (NeighborMove, CellGraph)> + 'a> {
    if cell.find_edge(edge.src, edge.dst) != Some(&edge) {
        return Err(Error::InvalidArgument(format!(
            "edge {edge} is not part of the cell"
        )));
    }
    let swaps = cell
        .space()
        .operations()
        .iter()
        .copied()
        .filter(move |&op| op != edge.op)
        .map(move |op| NeighborMove::OpSwap {
            edge,
            replacement: op,
        });
    let redirects = (0..edge.dst.0)
        .map(NodeId)
        .filter(move |&q| q != edge.src && cell.find_edge(q, edge.dst).is_none())
        .map(move |q| NeighborMove::SourceChange {
            edge,
            replacement: q,
        });
    Ok(swaps
        .chain(redirects)
        .map(move |mv| (mv, apply_move(cell, mv))))
}

/// Materialized form of [`neighbors_iter`].
pub fn neighbors(cell: &CellGraph, edge: OpEdge) -> Result<Vec<(NeighborMove, CellGraph)>> {
    Ok(neighbors_iter(cell, edge)?.collect())
}

/// Neighbors of every edge, concatenated in canonical edge order.
pub fn all_neighbors(cell: &CellGraph) -> Result<Vec<(OpEdge, NeighborMove, CellGraph)>> {
    let report = cell.validate();
    if !report.valid() {
        return Err(Error::InvalidSpec(report));
    }
    let mut out = Vec::new();
    for &edge in cell.edges() {
        for (mv, neighbor) in neighbors_iter(cell, edge)? {
            out.push((edge, mv, neighbor));
        }
    }
    Ok(out)
}
