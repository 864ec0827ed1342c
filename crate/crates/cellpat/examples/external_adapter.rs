//! Score architectures through an external predictor: a child process
//! speaking line-delimited JSON on its standard streams.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use cellpat::{random_network_spec, ExternalAdapter, NetworkSpec, Predictor, SearchSpace};

/// Replies with 0.5 plus a centi-point per skip-connect edge; `python3` must
/// be on PATH.
const SCORER: &str = r#"
import sys, json
for line in sys.stdin:
    req = json.loads(line)
    g = req["genotype"]
    edges = [e for k in ("normal", "reduction", "cell") for e in (g.get(k) or [])]
    skips = sum(1 for e in edges if e["op"] == "sc")
    print(json.dumps({"id": req["id"], "score": 0.5 + 0.01 * skips}), flush=True)
"#;

fn main() -> cellpat::Result<()> {
    let dir = tempfile::tempdir()?;
    let script = dir.path().join("scorer.py");
    std::fs::File::create(&script)?.write_all(SCORER.as_bytes())?;

    // The command runs under `sh -c`; requests and replies are matched by id,
    // so the child may answer out of order.
    let adapter = ExternalAdapter::spawn(&format!("python3 {}", script.display()))?;

    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let batch: Vec<NetworkSpec> = (0..4)
        .map(|_| random_network_spec(&mut rng, SearchSpace::Darts, 4, 5).unwrap())
        .collect();
    let scores = adapter.predict_batch(&batch)?;
    for (spec, score) in batch.iter().zip(&scores) {
        let skips: usize = spec
            .cell_kinds()
            .iter()
            .map(|&k| {
                spec.cell(k)
                    .unwrap()
                    .edges()
                    .iter()
                    .filter(|e| e.op.code() == "sc")
                    .count()
            })
            .sum();
        println!("{skips} skip edges -> external score {score:.2}");
        assert_eq!(*score, 0.5 + 0.01 * skips as f64);
    }
    println!("scored {} architectures through the child process", scores.len());
    Ok(())
}
