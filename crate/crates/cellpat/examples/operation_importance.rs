//! Score per-edge operation importance: how much a predictor's output moves,
//! on average, when one edge is perturbed to each of its neighbors.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use cellpat::{
    build_candidate_edge_set, operation_importance, random_cell, random_network_spec, CellGraph,
    CellKind, NetworkSpec, OpEdge, Predictor, Result, SearchSpace,
};

/// A transparent hand-written predictor: each average-pooling edge in the
/// reduction cell lowers the leakage score by 0.02.
struct PoolingCounter;

impl Predictor for PoolingCounter {
    fn predict(&self, spec: &NetworkSpec) -> Result<f64> {
        let ap3 = spec
            .cell(CellKind::Reduction)
            .unwrap()
            .edges()
            .iter()
            .filter(|e| e.op.code() == "ap3")
            .count();
        Ok(0.8 - 0.02 * ap3 as f64)
    }

    fn predict_batch(&self, specs: &[NetworkSpec]) -> Result<Vec<f64>> {
        specs.iter().map(|s| self.predict(s)).collect()
    }
}

fn main() -> Result<()> {
    // A reduction cell with three pooling edges and five other operations.
    let reduction = CellGraph::new(
        CellKind::Reduction,
        4,
        ["0-2:ap3", "1-2:s3", "0-3:ap3", "2-3:d5", "1-4:mp3", "2-4:sc", "0-5:s5", "3-5:ap3"]
            .iter()
            .map(|text| {
                let (pair, op) = text.split_once(':').unwrap();
                let (src, dst) = pair.split_once('-').unwrap();
                OpEdge::new(
                    src.parse().unwrap(),
                    dst.parse().unwrap(),
                    cellpat::Op::parse(op).unwrap(),
                )
            })
            .collect(),
    );
    let mut rng = ChaCha20Rng::seed_from_u64(29);
    let normal = random_cell(&mut rng, CellKind::Normal, 4);
    let spec = NetworkSpec::darts(normal, reduction.clone(), 5)?;

    println!("per-edge importance in the reduction cell (PoolingCounter predictor):");
    let scorer = PoolingCounter;
    for &edge in reduction.edges() {
        let oi = operation_importance(&reduction, edge, |cell| {
            scorer.predict(&spec.with_cell(CellKind::Reduction, cell.clone())?)
        })?;
        let note = if edge.op.code() == "ap3" {
            "pooling holds the score down; most neighbors drop it"
        } else {
            "a swap can only introduce pooling"
        };
        println!("  {edge}: oi = {oi:+.5}  ({note})");
    }
    println!("positive importance marks edges whose presence keeps the score low.");

    // Aggregated over a population, per (src, dst, op) triple.
    let population: Vec<NetworkSpec> = (0..40)
        .map(|_| random_network_spec(&mut rng, SearchSpace::Darts, 4, 5).unwrap())
        .collect();
    let set = build_candidate_edge_set(&population, CellKind::Reduction, &PoolingCounter, 2)?;
    println!(
        "{} candidate edges occur more than {} times across {} architectures; strongest first:",
        set.records.len(),
        set.min_occurrences,
        population.len()
    );
    let mut ranked = set.records.clone();
    ranked.sort_by(|a, b| b.oi.abs().total_cmp(&a.oi.abs()));
    for record in ranked.iter().take(8) {
        println!(
            "  {}->{} {:<4} seen {:>2} times, oi = {:+.5}",
            record.src.0,
            record.dst.0,
            record.op.code(),
            record.occurrences,
            record.oi
        );
    }
    Ok(())
}
