//! Greedy extraction of recurring cell patterns from a candidate edge set:
//! edges are ranked by operation importance and added one at a time while
//! they stay adjacent to the pattern, respect the two-input rule, and carry
//! an importance score matching the goal's sign.

use serde::{Deserialize, Serialize};

use crate::cell::{CellKind, NodeId, ValidationReport};
use crate::error::{Error, Result};
use crate::importance::CandidateEdgeSet;
use crate::space::Op;

/// Whether a pattern is meant to weaken or strengthen membership inference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatternGoal {
    #[serde(rename = "demote")]
    Demotion,
    #[serde(rename = "promote")]
    Promotion,
}

impl PatternGoal {
    pub fn id(self) -> &'static str {
        match self {
            PatternGoal::Demotion => "demote",
            PatternGoal::Promotion => "promote",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "demote" => Ok(PatternGoal::Demotion),
            "promote" => Ok(PatternGoal::Promotion),
            other => Err(Error::InvalidArgument(format!(
                "unknown pattern goal `{other}`; expected demote or promote"
            ))),
        }
    }
}

impl std::fmt::Display for PatternGoal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// One pattern edge together with its selection order (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternEdge {
    pub order: usize,
    pub src: NodeId,
    pub dst: NodeId,
    pub op: Op,
}

/// An ordered, connected set of at most `max_edges` operation edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellPattern {
    pub cell_kind: CellKind,
    pub goal: PatternGoal,
    pub max_edges: usize,
    pub edges: Vec<PatternEdge>,
}

impl CellPattern {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    /// Checks the structural pattern rules; an empty pattern is valid.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.edges.len() > self.max_edges {
            report.push(
                "edge-budget",
                format!(
                    "pattern holds {} edges but allows at most {}",
                    self.edges.len(),
                    self.max_edges
                ),
                self.edges.len().to_string(),
            );
        }
        let space = self.cell_kind.space();
        let first_intermediate = self.cell_kind.first_intermediate();
        let mut seen_nodes: Vec<NodeId> = Vec::new();
        for (index, edge) in self.edges.iter().enumerate() {
            let element = format!("{}->{}:{}", edge.src.0, edge.dst.0, edge.op.code());
            if edge.order != index + 1 {
                report.push(
                    "order-sequence",
                    format!(
                        "selection order {} at position {}; orders must run 1..{} in file order",
                        edge.order,
                        index + 1,
                        self.edges.len()
                    ),
                    element.clone(),
                );
            }
            if edge.src >= edge.dst {
                report.push(
                    "backward-edge",
                    format!("src {} is not below dst {}", edge.src.0, edge.dst.0),
                    element.clone(),
                );
            }
            if edge.dst.0 < first_intermediate {
                report.push(
                    "dst-not-intermediate",
                    format!("dst {} is an input node", edge.dst.0),
                    element.clone(),
                );
            }
            if !edge.op.in_space(space) {
                report.push(
                    "op-not-in-space",
                    format!("operation {} is not part of {}", edge.op.code(), space.id()),
                    element.clone(),
                );
            }
            if self.edges[..index]
                .iter()
                .any(|e| e.src == edge.src && e.dst == edge.dst)
            {
                report.push(
                    "duplicate-edge",
                    format!("edge {}->{} appears more than once", edge.src.0, edge.dst.0),
                    element.clone(),
                );
            }
            let in_degree = self.edges[..=index]
                .iter()
                .filter(|e| e.dst == edge.dst)
                .count();
            if in_degree > 2 {
                report.push(
                    "pattern-in-degree",
                    format!("node {} gathers more than 2 pattern edges", edge.dst.0),
                    element.clone(),
                );
            }
            if index > 0 && !seen_nodes.contains(&edge.src) && !seen_nodes.contains(&edge.dst) {
                report.push(
                    "adjacency",
                    format!(
                        "edge {}->{} touches no node of the earlier pattern edges",
                        edge.src.0, edge.dst.0
                    ),
                    element.clone(),
                );
            }
            if !seen_nodes.contains(&edge.src) {
                seen_nodes.push(edge.src);
            }
            if !seen_nodes.contains(&edge.dst) {
                seen_nodes.push(edge.dst);
            }
        }
        report
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let pattern: CellPattern = serde_json::from_str(text)?;
        let report = pattern.validate();
        if !report.valid() {
            return Err(Error::InvalidSpec(report));
        }
        Ok(pattern)
    }
}

/// Greedily builds a pattern of at most `max_edges` edges from the candidate
/// set: rank by importance (descending for demotion, ascending for
/// promotion), seed the node set with the top edge's source, then repeatedly
/// rescan and take the first ranked edge that touches the pattern, is not yet
/// present as a (src, dst) pair, keeps the destination's pattern in-degree
/// below 2, and has an importance score strictly matching the goal's sign.
pub fn extract_pattern(
    candidates: &CandidateEdgeSet,
    max_edges: usize,
    goal: PatternGoal,
) -> Result<CellPattern> {
    if max_edges < 1 {
        return Err(Error::InvalidArgument(
            "pattern edge limit must be at least 1".to_string(),
        ));
    }
    let mut ranked = candidates.records.clone();
    ranked.sort_by(|a, b| {
        let by_oi = match goal {
            PatternGoal::Demotion => b.oi.total_cmp(&a.oi),
            PatternGoal::Promotion => a.oi.total_cmp(&b.oi),
        };
        by_oi.then_with(|| {
            (a.dst.0, a.src.0, a.op.code()).cmp(&(b.dst.0, b.src.0, b.op.code()))
        })
    });

    let mut edges: Vec<PatternEdge> = Vec::new();
    let mut pair_set: Vec<(NodeId, NodeId)> = Vec::new();
    let mut nodes: Vec<NodeId> = Vec::new();
    if let Some(first) = ranked.first() {
        nodes.push(first.src);
    }
    while edges.len() < max_edges {
        let mut added = false;
        for i in 0..ranked.len() {
            let r = &ranked[i];
            let touches = nodes.contains(&r.src) || nodes.contains(&r.dst);
            let fresh = !pair_set.contains(&(r.src, r.dst));
            let in_degree = pair_set.iter().filter(|(_, d)| *d == r.dst).count();
            if !(touches && fresh && in_degree < 2) {
                continue;
            }
            let sign_ok = match goal {
                PatternGoal::Demotion => r.oi > 0.0,
                PatternGoal::Promotion => r.oi < 0.0,
            };
            if !sign_ok {
                continue;
            }
            edges.push(PatternEdge {
                order: edges.len() + 1,
                src: r.src,
                dst: r.dst,
                op: r.op,
            });
            pair_set.push((r.src, r.dst));
            if !nodes.contains(&r.src) {
                nodes.push(r.src);
            }
            if !nodes.contains(&r.dst) {
                nodes.push(r.dst);
            }
            ranked.remove(i);
            added = true;
            break;
        }
        if !added {
            break;
        }
    }

    Ok(CellPattern {
        cell_kind: candidates.cell_kind,
        goal,
        max_edges,
        edges,
    })
}

/// Keeps only the first `m` edges by selection order; the edge limit of the
/// original extraction is left untouched.
pub fn truncate_pattern(pattern: &CellPattern, m: usize) -> CellPattern {
    let mut truncated = pattern.clone();
    truncated.edges.retain(|e| e.order <= m);
    truncated
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::importance::OiRecord;

    fn record(src: usize, dst: usize, op: Op, oi: f64) -> OiRecord {
        OiRecord {
            cell_kind: CellKind::Normal,
            src: NodeId(src),
            dst: NodeId(dst),
            op,
            occurrences: 20,
            oi,
        }
    }

    fn set_of(records: Vec<OiRecord>) -> CandidateEdgeSet {
        CandidateEdgeSet {
            cell_kind: CellKind::Normal,
            min_occurrences: 0,
            records,
        }
    }

    #[test]
    fn empty_candidates_give_empty_pattern() {
        let pattern = extract_pattern(&set_of(vec![]), 8, PatternGoal::Demotion).unwrap();
        assert!(pattern.is_empty());
        assert!(pattern.validate().valid());
    }

    #[test]
    fn demotion_skips_negative_importance() {
        let candidates = set_of(vec![
            record(0, 2, Op::MaxPool3x3, 0.02),
            record(2, 3, Op::SkipConnect, 0.01),
            record(1, 2, Op::SepConv3x3, -0.01),
        ]);
        let pattern = extract_pattern(&candidates, 8, PatternGoal::Demotion).unwrap();
        let triples: Vec<_> = pattern
            .edges
            .iter()
            .map(|e| (e.order, e.src.0, e.dst.0, e.op))
            .collect();
        assert_eq!(
            triples,
            vec![(1, 0, 2, Op::MaxPool3x3), (2, 2, 3, Op::SkipConnect)]
        );
    }

    #[test]
    fn all_nonpositive_importance_gives_empty_demotion_pattern() {
        let candidates = set_of(vec![
            record(0, 2, Op::MaxPool3x3, 0.0),
            record(1, 3, Op::SkipConnect, -0.03),
        ]);
        let pattern = extract_pattern(&candidates, 8, PatternGoal::Demotion).unwrap();
        assert!(pattern.is_empty());
    }

    #[test]
    fn disconnected_high_scorer_waits_for_adjacency() {
        let candidates = set_of(vec![
            record(0, 2, Op::SepConv3x3, 0.05),
            record(3, 4, Op::SepConv5x5, 0.04),
            record(2, 4, Op::DilConv3x3, 0.03),
        ]);
        let pattern = extract_pattern(&candidates, 8, PatternGoal::Demotion).unwrap();
        let order: Vec<_> = pattern.edges.iter().map(|e| (e.src.0, e.dst.0)).collect();
        assert_eq!(order, vec![(0, 2), (2, 4), (3, 4)]);
    }

    #[test]
    fn in_degree_stays_at_two() {
        let candidates = set_of(vec![
            record(0, 2, Op::SepConv3x3, 0.05),
            record(1, 2, Op::SepConv5x5, 0.04),
            record(0, 4, Op::DilConv3x3, 0.02),
            record(1, 4, Op::DilConv5x5, 0.015),
            record(2, 4, Op::MaxPool3x3, 0.03),
        ]);
        let pattern = extract_pattern(&candidates, 8, PatternGoal::Demotion).unwrap();
        assert!(pattern.validate().valid());
        let into_4 = pattern.edges.iter().filter(|e| e.dst.0 == 4).count();
        assert_eq!(into_4, 2);
        assert_eq!(pattern.len(), 4);
    }

    #[test]
    fn promotion_sorts_ascending_and_takes_negatives() {
        let candidates = set_of(vec![
            record(0, 2, Op::SepConv3x3, -0.05),
            record(2, 3, Op::SepConv5x5, -0.01),
            record(1, 3, Op::MaxPool3x3, 0.04),
        ]);
        let pattern = extract_pattern(&candidates, 2, PatternGoal::Promotion).unwrap();
        let triples: Vec<_> = pattern.edges.iter().map(|e| (e.src.0, e.dst.0)).collect();
        assert_eq!(triples, vec![(0, 2), (2, 3)]);
        assert_eq!(pattern.goal, PatternGoal::Promotion);
    }

    #[test]
    fn truncation_keeps_prefix_and_limit() {
        let candidates = set_of(vec![
            record(0, 2, Op::SepConv3x3, 0.05),
            record(2, 3, Op::SepConv5x5, 0.04),
            record(2, 4, Op::DilConv3x3, 0.03),
            record(3, 4, Op::DilConv5x5, 0.02),
        ]);
        let pattern = extract_pattern(&candidates, 8, PatternGoal::Demotion).unwrap();
        assert_eq!(pattern.len(), 4);
        let truncated = truncate_pattern(&pattern, 2);
        assert_eq!(truncated.len(), 2);
        assert_eq!(truncated.max_edges, 8);
        assert_eq!(truncated.edges, pattern.edges[..2]);
        assert!(truncated.validate().valid());
        assert_eq!(truncate_pattern(&pattern, 9), pattern);
        assert!(truncate_pattern(&pattern, 0).is_empty());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let candidates = set_of(vec![
            record(0, 2, Op::SepConv3x3, 0.05),
            record(2, 3, Op::SepConv5x5, 0.04),
        ]);
        let pattern = extract_pattern(&candidates, 8, PatternGoal::Demotion).unwrap();
        let json = pattern.to_json().unwrap();
        assert_eq!(CellPattern::from_json(&json).unwrap(), pattern);

        let broken = json.replace("\"order\": 2", "\"order\": 7");
        let err = CellPattern::from_json(&broken).unwrap_err();
        assert!(matches!(err, Error::InvalidSpec(_)));
    }

    #[test]
    fn tie_break_is_positional() {
        let candidates = set_of(vec![
            record(1, 3, Op::SepConv5x5, 0.02),
            record(0, 2, Op::SepConv3x3, 0.02),
            record(0, 3, Op::SepConv3x3, 0.02),
        ]);
        let pattern = extract_pattern(&candidates, 8, PatternGoal::Demotion).unwrap();
        // Equal scores rank by (dst, src, op code): 0->2 first, then 0->3, 1->3.
        let order: Vec<_> = pattern.edges.iter().map(|e| (e.src.0, e.dst.0)).collect();
        assert_eq!(order, vec![(0, 2), (0, 3), (1, 3)]);
    }
}
