//! Cell graphs and whole-network specs: construction, node roles,
//! possible-edge enumeration, and structural validation.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{Op, SearchSpace};

/// Index of a node inside a cell.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Structural role of a node inside a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeRole {
    Input,
    Intermediate,
    Output,
}

/// A labeled edge: `op` applied to the value of `src`, feeding node `dst`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OpEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub op: Op,
}

impl OpEdge {
    pub fn new(src: usize, dst: usize, op: Op) -> Self {
        OpEdge {
            src: NodeId(src),
            dst: NodeId(dst),
            op,
        }
    }
}

impl fmt::Display for OpEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}:{}", self.src, self.dst, self.op)
    }
}

/// Which slot of a network a cell occupies.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Normal,
    Reduction,
    Nb201,
}

impl CellKind {
    pub fn id(self) -> &'static str {
        match self {
            CellKind::Normal => "normal",
            CellKind::Reduction => "reduction",
            CellKind::Nb201 => "nb201",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "normal" => Ok(CellKind::Normal),
            "reduction" => Ok(CellKind::Reduction),
            "nb201" => Ok(CellKind::Nb201),
            other => Err(Error::InvalidArgument(format!("unknown cell kind `{other}`"))),
        }
    }

    /// The search space this kind of cell belongs to.
    pub fn space(self) -> SearchSpace {
        match self {
            CellKind::Normal | CellKind::Reduction => SearchSpace::Darts,
            CellKind::Nb201 => SearchSpace::Nb201,
        }
    }

    /// Index of the first intermediate node (inputs sit below it).
    pub fn first_intermediate(self) -> usize {
        match self {
            CellKind::Normal | CellKind::Reduction => 2,
            CellKind::Nb201 => 1,
        }
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// One violated structural rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Stable rule identifier, e.g. `in-degree` or `backward-edge`.
    pub rule: String,
    pub message: String,
    /// The offending element, rendered as text (edge, node, or count).
    pub element: String,
}

/// Outcome of structural validation; valid exactly when no rule fired.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub(crate) fn push(&mut self, rule: &str, message: String, element: String) {
        self.violations.push(Violation {
            rule: rule.to_string(),
            message,
            element,
        });
    }

    fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid() {
            return f.write_str("no violations");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[{}] {} (at {})", v.rule, v.message, v.element)?;
        }
        Ok(())
    }
}

/// A single cell: a forward DAG of operation edges over input and
/// intermediate nodes. Output-node aggregation is implicit and never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CellGraph {
    kind: CellKind,
    m_intermediate: usize,
    edges: Vec<OpEdge>,
}

impl CellGraph {
    /// Builds a cell, canonicalizing edge order to ascending (dst, src).
    /// Does not validate; call [`CellGraph::validate`] for that.
    pub fn new(kind: CellKind, m_intermediate: usize, mut edges: Vec<OpEdge>) -> Self {
        edges.sort_by_key(|e| (e.dst, e.src));
        CellGraph {
            kind,
            m_intermediate,
            edges,
        }
    }

    pub fn kind(&self) -> CellKind {
        self.kind
    }

    pub fn space(&self) -> SearchSpace {
        self.kind.space()
    }

    pub fn m_intermediate(&self) -> usize {
        self.m_intermediate
    }

    /// Edges in canonical (dst, src) order.
    pub fn edges(&self) -> &[OpEdge] {
        &self.edges
    }

    /// Number of explicit nodes: inputs + intermediates (+ output for DARTS).
    pub fn node_count(&self) -> usize {
        match self.space() {
            SearchSpace::Darts => self.m_intermediate + 3,
            SearchSpace::Nb201 => self.m_intermediate + 1,
        }
    }

    pub fn input_nodes(&self) -> Vec<NodeId> {
        match self.space() {
            SearchSpace::Darts => vec![NodeId(0), NodeId(1)],
            SearchSpace::Nb201 => vec![NodeId(0)],
        }
    }

    pub fn intermediate_nodes(&self) -> Vec<NodeId> {
        let first = self.input_nodes().len();
        (first..first + self.m_intermediate).map(NodeId).collect()
    }

    /// The explicit output node: present for DARTS, absent for NB201
    /// (there the last intermediate node doubles as the cell output).
    pub fn output_node(&self) -> Option<NodeId> {
        match self.space() {
            SearchSpace::Darts => Some(NodeId(self.m_intermediate + 2)),
            SearchSpace::Nb201 => None,
        }
    }

    pub fn role_of(&self, node: NodeId) -> Option<NodeRole> {
        let inputs = self.input_nodes().len();
        if node.0 < inputs {
            Some(NodeRole::Input)
        } else if node.0 < inputs + self.m_intermediate {
            Some(NodeRole::Intermediate)
        } else if self.output_node() == Some(node) {
            Some(NodeRole::Output)
        } else {
            None
        }
    }

    pub fn in_degree(&self, node: NodeId) -> usize {
        self.edges.iter().filter(|e| e.dst == node).count()
    }

    pub fn out_degree(&self, node: NodeId) -> usize {
        self.edges.iter().filter(|e| e.src == node).count()
    }

    pub fn find_edge(&self, src: NodeId, dst: NodeId) -> Option<&OpEdge> {
        self.edges.iter().find(|e| e.src == src && e.dst == dst)
    }

    /// Returns a copy with the given edge list (re-canonicalized, unvalidated).
    pub fn with_edges(&self, edges: Vec<OpEdge>) -> Self {
        CellGraph::new(self.kind, self.m_intermediate, edges)
    }

    /// Checks every structural rule and reports all violations found.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let space = self.space();
        let max_src = self.input_nodes().len() + self.m_intermediate;

        let mut seen = BTreeSet::new();
        for e in &self.edges {
            if e.src.0 >= max_src || e.dst.0 >= max_src {
                report.push(
                    "node-range",
                    format!("edge endpoint outside the cell's node range 0..{max_src}"),
                    e.to_string(),
                );
                continue;
            }
            if e.src >= e.dst {
                report.push(
                    "backward-edge",
                    "edge source must precede its destination".to_string(),
                    e.to_string(),
                );
            }
            if self.role_of(e.dst) != Some(NodeRole::Intermediate) {
                report.push(
                    "dst-not-intermediate",
                    format!("edge destination node {} is not intermediate", e.dst),
                    e.to_string(),
                );
            }
            if !seen.insert((e.src, e.dst)) {
                report.push(
                    "duplicate-edge",
                    format!("more than one edge connects {} to {}", e.src, e.dst),
                    e.to_string(),
                );
            }
            if !e.op.in_space(space) {
                report.push(
                    "op-not-in-space",
                    format!("operation {} is not in the {} operation set", e.op, space),
                    e.to_string(),
                );
            }
        }

        match space {
            SearchSpace::Darts => {
                for node in self.intermediate_nodes() {
                    let d = self.in_degree(node);
                    if d != 2 {
                        report.push(
                            "in-degree",
                            format!("in-degree != 2 at node {node} (found {d})"),
                            node.to_string(),
                        );
                    }
                }
                let expected = 2 * self.m_intermediate;
                if self.edges.len() != expected {
                    report.push(
                        "edge-count",
                        format!("expected {expected} edges, found {}", self.edges.len()),
                        self.edges.len().to_string(),
                    );
                }
            }
            SearchSpace::Nb201 => {
                // Fixed complete forward DAG: every (i, j) pair appears once.
                if let Ok(all) = enumerate_possible_edges(space, self.m_intermediate) {
                    for (src, dst) in all {
                        if self.find_edge(src, dst).is_none() {
                            report.push(
                                "incomplete-topology",
                                format!("missing fixed edge {src}->{dst}"),
                                format!("{src}->{dst}"),
                            );
                        }
                    }
                }
            }
        }

        report
    }
}

/// All (src, dst) pairs an edge may occupy in the given space.
///
/// DARTS: every node pair with an intermediate destination, M(M+3)/2 pairs.
/// NB201: the fixed complete forward DAG, M(M+1)/2 pairs.
/// Order is ascending dst, then ascending src.
pub fn enumerate_possible_edges(
    space: SearchSpace,
    m_intermediate: usize,
) -> Result<Vec<(NodeId, NodeId)>> {
    if m_intermediate < 1 {
        return Err(Error::InvalidArgument(
            "m_intermediate must be at least 1".to_string(),
        ));
    }
    let first = match space {
        SearchSpace::Darts => 2,
        SearchSpace::Nb201 => 1,
    };
    let mut pairs = Vec::new();
    for dst in first..first + m_intermediate {
        for src in 0..dst {
            pairs.push((NodeId(src), NodeId(dst)));
        }
    }
    Ok(pairs)
}

/// Cell kinds making up a macro layout of `n_cells` stacked cells:
/// reduction cells at floor(n/3) and floor(2n/3), normal cells elsewhere.
pub fn macro_layout(n_cells: usize) -> Result<Vec<CellKind>> {
    if n_cells < 3 {
        return Err(Error::InvalidArgument(
            "n_cells must be at least 3".to_string(),
        ));
    }
    let r1 = n_cells / 3;
    let r2 = 2 * n_cells / 3;
    Ok((0..n_cells)
        .map(|i| {
            if i == r1 || i == r2 {
                CellKind::Reduction
            } else {
                CellKind::Normal
            }
        })
        .collect())
}

/// The cells of a network, shaped by its search space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CellSet {
    Darts {
        normal: CellGraph,
        reduction: CellGraph,
    },
    Nb201 {
        cell: CellGraph,
    },
}

/// A full architecture: its cells plus the macro parameters N and M.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkSpec {
    cells: CellSet,
    n_cells: usize,
    m_intermediate: usize,
}

impl NetworkSpec {
    /// Builds and validates a DARTS network from its two cells.
    pub fn darts(normal: CellGraph, reduction: CellGraph, n_cells: usize) -> Result<Self> {
        let m_intermediate = normal.m_intermediate();
        let spec = NetworkSpec {
            cells: CellSet::Darts { normal, reduction },
            n_cells,
            m_intermediate,
        };
        spec.into_validated()
    }

    /// Builds and validates an NB201 network from its single cell.
    pub fn nb201(cell: CellGraph, n_cells: usize) -> Result<Self> {
        let m_intermediate = cell.m_intermediate();
        let spec = NetworkSpec {
            cells: CellSet::Nb201 { cell },
            n_cells,
            m_intermediate,
        };
        spec.into_validated()
    }

    fn into_validated(self) -> Result<Self> {
        let report = self.validate();
        if report.valid() {
            Ok(self)
        } else {
            Err(Error::InvalidSpec(report))
        }
    }

    pub fn space(&self) -> SearchSpace {
        match &self.cells {
            CellSet::Darts { .. } => SearchSpace::Darts,
            CellSet::Nb201 { .. } => SearchSpace::Nb201,
        }
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn m_intermediate(&self) -> usize {
        self.m_intermediate
    }

    pub fn cells(&self) -> &CellSet {
        &self.cells
    }

    /// The cell kinds present in this network, in canonical order.
    pub fn cell_kinds(&self) -> &'static [CellKind] {
        match &self.cells {
            CellSet::Darts { .. } => &[CellKind::Normal, CellKind::Reduction],
            CellSet::Nb201 { .. } => &[CellKind::Nb201],
        }
    }

    pub fn cell(&self, kind: CellKind) -> Option<&CellGraph> {
        match (&self.cells, kind) {
            (CellSet::Darts { normal, .. }, CellKind::Normal) => Some(normal),
            (CellSet::Darts { reduction, .. }, CellKind::Reduction) => Some(reduction),
            (CellSet::Nb201 { cell }, CellKind::Nb201) => Some(cell),
            _ => None,
        }
    }

    /// Returns a validated copy with one cell replaced.
    pub fn with_cell(&self, kind: CellKind, cell: CellGraph) -> Result<Self> {
        let mut next = self.clone();
        match (&mut next.cells, kind) {
            (CellSet::Darts { normal, .. }, CellKind::Normal) => *normal = cell,
            (CellSet::Darts { reduction, .. }, CellKind::Reduction) => *reduction = cell,
            (CellSet::Nb201 { cell: slot }, CellKind::Nb201) => *slot = cell,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "network has no {kind} cell"
                )))
            }
        }
        next.into_validated()
    }

    /// The macro layout this spec stacks its cells into.
    pub fn layout(&self) -> Result<Vec<CellKind>> {
        match self.space() {
            SearchSpace::Darts => macro_layout(self.n_cells),
            SearchSpace::Nb201 => Ok(vec![CellKind::Nb201; self.n_cells]),
        }
    }

    /// Checks spec-level rules plus every cell's structural rules.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.n_cells < 3 {
            report.push(
                "n-cells",
                format!("n_cells must be at least 3, found {}", self.n_cells),
                self.n_cells.to_string(),
            );
        }
        let expected_kinds: &[CellKind] = self.cell_kinds();
        for &kind in expected_kinds {
            let cell = self.cell(kind).expect("cell_kinds lists present cells");
            if cell.kind() != kind {
                report.push(
                    "cell-kind",
                    format!("cell in the {kind} slot has kind {}", cell.kind()),
                    kind.to_string(),
                );
            }
            if cell.m_intermediate() != self.m_intermediate {
                report.push(
                    "m-mismatch",
                    format!(
                        "{kind} cell has {} intermediate nodes, spec says {}",
                        cell.m_intermediate(),
                        self.m_intermediate
                    ),
                    kind.to_string(),
                );
            }
            report.merge(cell.validate());
        }
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn darts_cell(kind: CellKind) -> CellGraph {
        // Two edges into each of nodes 2..=5 from its two lowest predecessors.
        let edges = (2..6)
            .flat_map(|dst| {
                [
                    OpEdge::new(0, dst, Op::SepConv3x3),
                    OpEdge::new(1, dst, Op::SkipConnect),
                ]
            })
            .collect();
        CellGraph::new(kind, 4, edges)
    }

    #[test]
    fn valid_darts_cell_passes() {
        let report = darts_cell(CellKind::Normal).validate();
        assert!(report.valid(), "{report}");
    }

    #[test]
    fn possible_edge_counts_match_closed_form() {
        for m in 1..=8 {
            let n = enumerate_possible_edges(SearchSpace::Darts, m).unwrap().len();
            assert_eq!(n, m * (m + 3) / 2);
        }
        assert_eq!(
            enumerate_possible_edges(SearchSpace::Nb201, 3).unwrap().len(),
            6
        );
        assert!(enumerate_possible_edges(SearchSpace::Darts, 0).is_err());
    }

    #[test]
    fn three_incoming_edges_flag_in_degree() {
        let cell = darts_cell(CellKind::Normal);
        let mut edges = cell.edges().to_vec();
        edges.push(OpEdge::new(2, 3, Op::MaxPool3x3));
        let report = cell.with_edges(edges).validate();
        assert!(report.violations.iter().any(|v| v.rule == "in-degree"));
        assert!(report.violations.iter().any(|v| v.rule == "edge-count"));
    }

    #[test]
    fn backward_edge_flagged() {
        let cell = darts_cell(CellKind::Normal);
        let mut edges = cell.edges().to_vec();
        edges[0] = OpEdge::new(3, 2, edges[0].op);
        let report = cell.with_edges(edges).validate();
        assert!(report.violations.iter().any(|v| v.rule == "backward-edge"));
    }

    #[test]
    fn nb201_requires_complete_topology() {
        let all = enumerate_possible_edges(SearchSpace::Nb201, 3).unwrap();
        let edges: Vec<OpEdge> = all
            .iter()
            .map(|&(src, dst)| OpEdge {
                src,
                dst,
                op: Op::Conv3x3,
            })
            .collect();
        let full = CellGraph::new(CellKind::Nb201, 3, edges.clone());
        assert!(full.validate().valid());

        let partial = full.with_edges(edges[1..].to_vec());
        let report = partial.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| v.rule == "incomplete-topology"));
    }

    #[test]
    fn macro_layout_places_two_reductions() {
        let layout = macro_layout(5).unwrap();
        assert_eq!(layout.iter().filter(|k| **k == CellKind::Reduction).count(), 2);
        assert_eq!(layout[1], CellKind::Reduction);
        assert_eq!(layout[3], CellKind::Reduction);

        let l3 = macro_layout(3).unwrap();
        assert_eq!(l3, vec![CellKind::Normal, CellKind::Reduction, CellKind::Reduction]);

        let l20 = macro_layout(20).unwrap();
        assert_eq!(l20[6], CellKind::Reduction);
        assert_eq!(l20[13], CellKind::Reduction);
        assert!(macro_layout(2).is_err());
    }

    #[test]
    fn spec_constructor_rejects_bad_cells() {
        let normal = darts_cell(CellKind::Normal);
        let reduction = darts_cell(CellKind::Reduction);
        assert!(NetworkSpec::darts(normal.clone(), reduction.clone(), 5).is_ok());
        assert!(NetworkSpec::darts(normal.clone(), reduction.clone(), 2).is_err());

        let broken = normal.with_edges(normal.edges()[1..].to_vec());
        assert!(NetworkSpec::darts(broken, reduction, 5).is_err());
    }
}
