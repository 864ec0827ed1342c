//! Run the whole pipeline through the command-line entry point: ingest a
//! scored dataset, train a surrogate, group by AUC, score operation
//! importance, and extract patterns — then read the run manifest back.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use cellpat::dataset::{Provenance, ScoredArchitecture, ScoredDataset};
use cellpat::{cli, random_network_spec, write_dataset, CellKind, SearchSpace};

fn planted_dataset(n: usize, seed: u64) -> ScoredDataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let rows = (0..n)
        .map(|i| {
            let spec = random_network_spec(&mut rng, SearchSpace::Darts, 4, 5).unwrap();
            let ap3 = spec
                .cell(CellKind::Reduction)
                .unwrap()
                .edges()
                .iter()
                .filter(|e| e.op.code() == "ap3")
                .count();
            let auc = 0.8 - 0.02 * ap3 as f64 + noise.sample(&mut rng);
            ScoredArchitecture {
                id: format!("arch-{i:04}"),
                spec,
                test_accuracy: rng.gen_range(0.5..1.0),
                mia_auc: Some(auc),
            }
        })
        .collect();
    ScoredDataset {
        rows,
        provenance: Provenance {
            source: format!("planted:{seed}:{n}"),
            sha256: format!("{seed:064x}"),
        },
    }
}

fn main() -> cellpat::Result<()> {
    let dir = tempfile::tempdir()?;
    let csv = dir.path().join("scored.csv");
    let out = dir.path().join("run");
    let ds = planted_dataset(400, 13);
    write_dataset(&ds, std::fs::File::create(&csv)?)?;

    let mut aucs: Vec<f64> = ds.rows.iter().filter_map(|r| r.mia_auc).collect();
    aucs.sort_by(f64::total_cmp);
    let low_thr = aucs[ds.len() / 5];
    let high_thr = aucs[4 * ds.len() / 5];

    let code = cli::run(
        [
            "cellpat".to_string(),
            "pipeline".to_string(),
            "--dataset".to_string(),
            csv.display().to_string(),
            "--out".to_string(),
            out.display().to_string(),
            "--lambda".to_string(),
            "1e-6".to_string(),
            "--low-thr".to_string(),
            low_thr.to_string(),
            "--high-thr".to_string(),
            high_thr.to_string(),
            "--top-fraction".to_string(),
            "1.0".to_string(),
            "--min-occurrences".to_string(),
            "2".to_string(),
            "--seed".to_string(),
            "13".to_string(),
        ],
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    assert_eq!(code, 0, "pipeline run failed");

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json"))?)?;
    println!("\nmanifest highlights:");
    println!("  tool      {} {}", manifest["tool"], manifest["version"]);
    println!(
        "  input     {} rows kept, sha256 {:.12}...",
        manifest["input"]["rows_kept"],
        manifest["input"]["sha256"].as_str().unwrap_or_default()
    );
    println!(
        "  groups    {} high / {} low",
        manifest["selection"]["high_rows"], manifest["selection"]["low_rows"]
    );
    println!(
        "  surrogate r2 = {}",
        manifest["surrogate"]["metrics"]["r2"]
    );
    let artifacts = manifest["artifacts"].as_object().expect("artifact map");
    println!("  artifacts ({}):", artifacts.len());
    for name in artifacts.keys() {
        println!("    {name}");
    }

    // The demotion pattern for the reduction cell picks up the planted
    // pooling signal.
    let pattern: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(
        out.join("pattern_demote_reduction.json"),
    )?)?;
    let ap3_edges = pattern["edges"]
        .as_array()
        .expect("edges")
        .iter()
        .filter(|e| e["op"] == "ap3")
        .count();
    println!("demotion pattern carries {ap3_edges} average-pooling edges");
    Ok(())
}
