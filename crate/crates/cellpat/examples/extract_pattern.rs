//! Extract connected cell patterns from a candidate edge set, for both
//! goals, and truncate one to a smaller edit budget.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use cellpat::{
    build_candidate_edge_set, extract_pattern, random_network_spec, truncate_pattern, CellKind,
    NetworkSpec, PatternGoal, Predictor, Result, SearchSpace,
};

/// Pooling in the reduction cell lowers the score, input-adjacent
/// convolution in the normal cell raises it.
struct PlantedScorer;

impl Predictor for PlantedScorer {
    fn predict(&self, spec: &NetworkSpec) -> Result<f64> {
        let ap3 = spec
            .cell(CellKind::Reduction)
            .unwrap()
            .edges()
            .iter()
            .filter(|e| e.op.code() == "ap3")
            .count();
        let direct_conv = spec
            .cell(CellKind::Normal)
            .unwrap()
            .edges()
            .iter()
            .filter(|e| e.op.is_convolution() && e.src.0 < 2)
            .count();
        Ok(0.8 - 0.02 * ap3 as f64 + 0.01 * direct_conv as f64)
    }

    fn predict_batch(&self, specs: &[NetworkSpec]) -> Result<Vec<f64>> {
        specs.iter().map(|s| self.predict(s)).collect()
    }
}

fn main() -> Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(101);
    let population: Vec<NetworkSpec> = (0..60)
        .map(|_| random_network_spec(&mut rng, SearchSpace::Darts, 4, 5).unwrap())
        .collect();

    // Demotion: edges with strictly positive importance, the ones whose
    // presence holds the score down — for this scorer, reduction-cell
    // pooling. Installing them pushes an architecture's prediction lower.
    let reduction = build_candidate_edge_set(&population, CellKind::Reduction, &PlantedScorer, 5)?;
    let demote = extract_pattern(&reduction, 8, PatternGoal::Demotion)?;
    println!(
        "demotion pattern for the reduction cell ({} of at most {} edges):",
        demote.len(),
        demote.max_edges
    );
    for edge in &demote.edges {
        println!("  #{} {}->{} {}", edge.order, edge.src.0, edge.dst.0, edge.op.code());
    }

    // Promotion: edges with strictly negative importance — here the
    // input-adjacent convolutions of the normal cell.
    let normal = build_candidate_edge_set(&population, CellKind::Normal, &PlantedScorer, 5)?;
    let promote = extract_pattern(&normal, 8, PatternGoal::Promotion)?;
    println!("promotion pattern for the normal cell ({} edges):", promote.len());
    for edge in &promote.edges {
        println!("  #{} {}->{} {}", edge.order, edge.src.0, edge.dst.0, edge.op.code());
    }

    // Patterns serialize to JSON and truncate to tighter budgets without
    // re-extraction: the edge order is the greedy insertion order.
    let budget = truncate_pattern(&demote, 3);
    println!("same demotion pattern under an edit budget of 3:");
    println!("{}", budget.to_json()?);
    Ok(())
}
