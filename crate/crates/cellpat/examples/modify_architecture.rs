//! Rewrite an architecture to contain a cell pattern: plan the edits, apply
//! them, diff the result, and show that a second pass changes nothing.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use cellpat::{
    apply_plan, diff_specs, plan_modification, random_network_spec, CellPattern, EditKind,
    ModTarget, Result, SearchSpace,
};

const REDUCTION_PATTERN: &str = r#"{
  "cell_kind": "reduction",
  "goal": "demote",
  "max_edges": 8,
  "edges": [
    {"order": 1, "src": 0, "dst": 2, "op": "ap3"},
    {"order": 2, "src": 1, "dst": 2, "op": "ap3"},
    {"order": 3, "src": 2, "dst": 3, "op": "ap3"},
    {"order": 4, "src": 2, "dst": 4, "op": "mp3"},
    {"order": 5, "src": 4, "dst": 5, "op": "ap3"}
  ]
}"#;

fn main() -> Result<()> {
    let pattern = CellPattern::from_json(REDUCTION_PATTERN)?;
    let mut rng = ChaCha20Rng::seed_from_u64(53);
    let spec = random_network_spec(&mut rng, SearchSpace::Darts, 4, 5)?;

    println!("reduction cell before:");
    for edge in spec.cell(cellpat::CellKind::Reduction).unwrap().edges() {
        println!("  {edge}");
    }

    // A budget of 4 installs the first 4 pattern edges; the 5th is left out.
    let plan = plan_modification(&spec, None, Some(&pattern), ModTarget::Reduction, 4)?;
    println!("planned edits (budget 4):");
    for edit in &plan.edits {
        let verb = match edit.kind {
            EditKind::ReplaceEdge => "replace",
            EditKind::ChangeOp => "change op",
            EditKind::Noop => "already present",
        };
        match &edit.before {
            Some(before) => println!("  {verb}: {before} -> {}", edit.after),
            None => println!("  {verb}: {}", edit.after),
        }
    }

    let modified = apply_plan(&spec, &plan)?;
    assert!(modified.validate().valid());
    println!("diff:");
    for entry in diff_specs(&spec, &modified)? {
        println!("  {entry}");
    }

    // The rewritten architecture already satisfies the pattern, so planning
    // again yields only no-ops.
    let again = plan_modification(&modified, None, Some(&pattern), ModTarget::Reduction, 4)?;
    assert_eq!(again.effective_edits().count(), 0);
    println!(
        "re-planning on the modified architecture: {} edits, all no-ops",
        again.edits.len()
    );
    Ok(())
}
