//! Operation importance: mean predictor score over an edge's neighbor cells
//! minus the original cell's score, plus population-level aggregation into a
//! candidate edge set. Positive OI marks an operation-assigned edge whose
//! presence lowers the predicted score relative to its neighborhood.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::cell::{CellGraph, CellKind, NetworkSpec, NodeId, OpEdge};
use crate::error::{Error, Result};
use crate::genotype::fingerprint;
use crate::neighborhood::neighbors_iter;
use crate::space::Op;
use crate::surrogate::Predictor;

/// Aggregated OI of one operation-assigned edge across a population.
#[derive(Clone, Debug, PartialEq)]
pub struct OiRecord {
    pub cell_kind: CellKind,
    pub src: NodeId,
    pub dst: NodeId,
    pub op: Op,
    pub occurrences: usize,
    pub oi: f64,
}

impl OiRecord {
    pub fn edge(&self) -> OpEdge {
        OpEdge {
            src: self.src,
            dst: self.dst,
            op: self.op,
        }
    }
}

/// The record list feeding pattern extraction; records are unique per
/// (src, dst, op) and each passed the occurrence filter.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateEdgeSet {
    pub cell_kind: CellKind,
    pub min_occurrences: usize,
    pub records: Vec<OiRecord>,
}

/// OI of one edge under a cell-level score function: the mean score of the
/// edge's neighbor cells (visited in canonical order) minus the score of the
/// cell itself.
pub fn operation_importance(
    cell: &CellGraph,
    edge: OpEdge,
    mut scorer: impl FnMut(&CellGraph) -> Result<f64>,
) -> Result<f64> {
    let original = scorer(cell)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (_, neighbor) in neighbors_iter(cell, edge)? {
        sum += scorer(&neighbor)?;
        count += 1;
    }
    if count == 0 {
        return Err(Error::Semantic(format!(
            "edge {edge} has no neighbor cells; the search space is degenerate"
        )));
    }
    Ok(sum / count as f64 - original)
}

/// Computes OI for every operation-assigned edge of the chosen cell kind
/// across a population, keeping triples that occur more than
/// `min_occurrences` times. Each occurrence contributes one equally weighted
/// term; hosts are visited in genotype-fingerprint order so the aggregation
/// does not depend on the input ordering.
pub fn build_candidate_edge_set(
    architectures: &[NetworkSpec],
    cell_kind: CellKind,
    predictor: &dyn Predictor,
    min_occurrences: usize,
) -> Result<CandidateEdgeSet> {
    if architectures.is_empty() {
        return Err(Error::InvalidArgument(
            "empty architecture population".to_string(),
        ));
    }
    let mut order: Vec<(String, usize)> = architectures
        .iter()
        .enumerate()
        .map(|(i, spec)| Ok((fingerprint(spec)?, i)))
        .collect::<Result<_>>()?;
    order.sort();

    let mut sums: BTreeMap<(usize, usize, &'static str), (f64, usize, Op)> = BTreeMap::new();
    for (_, index) in order {
        let spec = &architectures[index];
        let cell = spec.cell(cell_kind).ok_or_else(|| {
            Error::InvalidArgument(format!("population architecture has no {cell_kind} cell"))
        })?;

        // Score the host plus every neighbor in one batch, then walk the
        // scores back per edge in the same canonical order.
        let mut batch = vec![spec.clone()];
        let mut neighbor_counts = Vec::with_capacity(cell.edges().len());
        for &edge in cell.edges() {
            let mut n = 0usize;
            for (_, neighbor) in neighbors_iter(cell, edge)? {
                batch.push(spec.with_cell(cell_kind, neighbor)?);
                n += 1;
            }
            neighbor_counts.push((edge, n));
        }
        let scores = predictor.predict_batch(&batch)?;
        let original = scores[0];
        let mut cursor = 1usize;
        for (edge, n) in neighbor_counts {
            if n == 0 {
                return Err(Error::Semantic(format!(
                    "edge {edge} has no neighbor cells; the search space is degenerate"
                )));
            }
            let sum: f64 = scores[cursor..cursor + n].iter().sum();
            cursor += n;
            let oi = sum / n as f64 - original;
            let slot = sums
                .entry((edge.dst.0, edge.src.0, edge.op.code()))
                .or_insert((0.0, 0, edge.op));
            slot.0 += oi;
            slot.1 += 1;
        }
    }

    let records = sums
        .into_iter()
        .filter(|(_, (_, count, _))| *count > min_occurrences)
        .map(|((dst, src, _), (sum, count, op))| OiRecord {
            cell_kind,
            src: NodeId(src),
            dst: NodeId(dst),
            op,
            occurrences: count,
            oi: sum / count as f64,
        })
        .collect();
    Ok(CandidateEdgeSet {
        cell_kind,
        min_occurrences,
        records,
    })
}

const CSV_HEADER: [&str; 6] = ["cell_kind", "src", "dst", "op", "occurrences", "oi"];

/// Writes a candidate edge set as the OI report CSV.
pub fn write_candidates_csv(set: &CandidateEdgeSet, writer: impl Write) -> Result<()> {
    let mut csv = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    csv.write_record(CSV_HEADER)?;
    for r in &set.records {
        csv.write_record([
            r.cell_kind.id(),
            &r.src.0.to_string(),
            &r.dst.0.to_string(),
            r.op.code(),
            &r.occurrences.to_string(),
            &r.oi.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

/// Reads an OI report CSV back into a candidate edge set. The occurrence
/// threshold is not part of the file format and comes back as 0.
pub fn read_candidates_csv(reader: impl Read) -> Result<CandidateEdgeSet> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = csv.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(Error::Dataset(format!(
            "unexpected candidate CSV header `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut cell_kind = None;
    let mut records = Vec::new();
    for (index, record) in csv.records().enumerate() {
        let row = index + 2;
        let record = record?;
        let fail = |message: String| Error::DatasetRow { row, message };
        if record.len() != CSV_HEADER.len() {
            return Err(fail(format!("expected 6 fields, found {}", record.len())));
        }
        let kind = CellKind::from_id(&record[0]).map_err(|e| fail(e.to_string()))?;
        match cell_kind {
            None => cell_kind = Some(kind),
            Some(k) if k != kind => {
                return Err(fail(format!(
                    "mixed cell kinds `{k}` and `{kind}` in one candidate CSV"
                )))
            }
            _ => {}
        }
        let parse_usize = |field: &str, name: &str| {
            field
                .parse::<usize>()
                .map_err(|_| fail(format!("{name} is not a count: `{field}`")))
        };
        let src = parse_usize(&record[1], "src")?;
        let dst = parse_usize(&record[2], "dst")?;
        let op = Op::parse(&record[3]).map_err(|e| fail(e.to_string()))?;
        let occurrences = parse_usize(&record[4], "occurrences")?;
        if occurrences == 0 {
            return Err(fail("occurrences must be at least 1".to_string()));
        }
        let oi: f64 = record[5]
            .parse()
            .map_err(|_| fail(format!("oi is not a number: `{}`", &record[5])))?;
        if !oi.is_finite() {
            return Err(fail(format!("oi {oi} is not finite")));
        }
        records.push(OiRecord {
            cell_kind: kind,
            src: NodeId(src),
            dst: NodeId(dst),
            op,
            occurrences,
            oi,
        });
    }
    let cell_kind = cell_kind.ok_or_else(|| {
        Error::Dataset("candidate CSV holds no records".to_string())
    })?;
    Ok(CandidateEdgeSet {
        cell_kind,
        min_occurrences: 0,
        records,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    use super::*;
    use crate::sample::{random_cell, random_network_spec};
    use crate::space::SearchSpace;

    fn ap3_count(cell: &CellGraph) -> usize {
        cell.edges().iter().filter(|e| e.op == Op::AvgPool3x3).count()
    }

    /// Score = 0.8 − 0.01 · (#ap3 edges in the reduction cell).
    struct Ap3Penalty;

    impl Predictor for Ap3Penalty {
        fn predict(&self, spec: &NetworkSpec) -> Result<f64> {
            let cell = spec.cell(CellKind::Reduction).expect("darts spec");
            Ok(0.8 - 0.01 * ap3_count(cell) as f64)
        }
    }

    #[test]
    fn constant_scorer_gives_zero_oi() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..25 {
            let cell = random_cell(&mut rng, CellKind::Normal, 4);
            let edge = cell.edges()[rng.gen_range(0..cell.edges().len())];
            let oi = operation_importance(&cell, edge, |_| Ok(0.37)).unwrap();
            assert!(oi.abs() < 1e-12);
        }
    }

    fn node2_cell(first_op: Op) -> CellGraph {
        let edges = vec![
            OpEdge::new(0, 2, first_op),
            OpEdge::new(1, 2, Op::SkipConnect),
            OpEdge::new(0, 3, Op::SepConv5x5),
            OpEdge::new(1, 3, Op::MaxPool3x3),
            OpEdge::new(2, 4, Op::DilConv3x3),
            OpEdge::new(3, 4, Op::SkipConnect),
            OpEdge::new(0, 5, Op::SepConv3x3),
            OpEdge::new(4, 5, Op::DilConv5x5),
        ];
        CellGraph::new(CellKind::Normal, 4, edges)
    }

    #[test]
    fn hand_derived_oi_values() {
        let scorer = |cell: &CellGraph| Ok(0.8 - 0.01 * ap3_count(cell) as f64);

        // An ap3 edge into node 2: all 6 neighbors are op swaps losing the
        // ap3, so OI = 0.80 − 0.79 = +0.01.
        let cell = node2_cell(Op::AvgPool3x3);
        let edge = *cell.find_edge(NodeId(0), NodeId(2)).unwrap();
        let oi = operation_importance(&cell, edge, scorer).unwrap();
        assert!((oi - 0.01).abs() < 1e-9, "oi = {oi}");

        // An s3 edge in an ap3-free cell: exactly one of the 6 swaps
        // introduces ap3, so OI = (5·0.80 + 0.79)/6 − 0.80.
        let cell = node2_cell(Op::SepConv3x3);
        assert_eq!(ap3_count(&cell), 0);
        let edge = *cell.find_edge(NodeId(0), NodeId(2)).unwrap();
        let oi = operation_importance(&cell, edge, scorer).unwrap();
        assert!((oi - (-0.01 / 6.0)).abs() < 1e-9, "oi = {oi}");
    }

    #[test]
    fn constant_shift_leaves_oi_unchanged() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let cell = random_cell(&mut rng, CellKind::Reduction, 4);
        for &edge in cell.edges() {
            let base = |c: &CellGraph| Ok(0.01 * ap3_count(c) as f64);
            let shifted = |c: &CellGraph| Ok(5.0 + 0.01 * ap3_count(c) as f64);
            let a = operation_importance(&cell, edge, base).unwrap();
            let b = operation_importance(&cell, edge, shifted).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn occurrence_filter_is_strict() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let spec = random_network_spec(&mut rng, SearchSpace::Darts, 4, 5).unwrap();
        let fifteen = vec![spec.clone(); 15];
        let set = build_candidate_edge_set(&fifteen, CellKind::Reduction, &Ap3Penalty, 14).unwrap();
        assert_eq!(set.records.len(), 8);
        assert!(set.records.iter().all(|r| r.occurrences == 15));

        let fourteen = vec![spec; 14];
        let set = build_candidate_edge_set(&fourteen, CellKind::Reduction, &Ap3Penalty, 14).unwrap();
        assert!(set.records.is_empty());
    }

    #[test]
    fn population_order_does_not_change_the_aggregate() {
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let population: Vec<NetworkSpec> = (0..12)
            .map(|_| random_network_spec(&mut rng, SearchSpace::Darts, 4, 5).unwrap())
            .collect();
        let forward =
            build_candidate_edge_set(&population, CellKind::Reduction, &Ap3Penalty, 0).unwrap();
        let mut reversed = population.clone();
        reversed.reverse();
        let backward =
            build_candidate_edge_set(&reversed, CellKind::Reduction, &Ap3Penalty, 0).unwrap();
        assert_eq!(forward, backward);
    }

    #[test]
    fn planted_penalty_yields_positive_oi_on_ap3_edges() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let population: Vec<NetworkSpec> = (0..40)
            .map(|_| random_network_spec(&mut rng, SearchSpace::Darts, 4, 5).unwrap())
            .collect();
        let set =
            build_candidate_edge_set(&population, CellKind::Reduction, &Ap3Penalty, 0).unwrap();
        assert!(!set.records.is_empty());
        for r in &set.records {
            if r.op == Op::AvgPool3x3 {
                assert!(r.oi > 0.0, "ap3 record {:?} not positive", r);
            }
        }
    }

    #[test]
    fn candidate_csv_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(19);
        let population: Vec<NetworkSpec> = (0..5)
            .map(|_| random_network_spec(&mut rng, SearchSpace::Darts, 4, 5).unwrap())
            .collect();
        let set =
            build_candidate_edge_set(&population, CellKind::Normal, &Ap3Penalty, 0).unwrap();
        let mut buf = Vec::new();
        write_candidates_csv(&set, &mut buf).unwrap();
        let loaded = read_candidates_csv(&buf[..]).unwrap();
        assert_eq!(loaded.cell_kind, set.cell_kind);
        assert_eq!(loaded.records, set.records);
    }
}
