//! Ingest a scored-architecture CSV, then slice it: duplicate handling,
//! top-fraction selection, AUC grouping, and per-cell operation statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use cellpat::dataset::{Provenance, ScoredArchitecture, ScoredDataset};
use cellpat::{
    conv_topology_stats, group_by_auc, load_dataset, op_distribution, random_network_spec,
    select_top_fraction, write_dataset, CellKind, SearchSpace,
};

fn synthetic_rows(n: usize, seed: u64) -> ScoredDataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|i| {
            let spec = random_network_spec(&mut rng, SearchSpace::Darts, 4, 5).unwrap();
            ScoredArchitecture {
                id: format!("arch-{i:03}"),
                spec,
                test_accuracy: rng.gen_range(0.5..1.0),
                mia_auc: if i % 4 == 0 { None } else { Some(rng.gen_range(0.5..1.0)) },
            }
        })
        .collect();
    ScoredDataset {
        rows,
        provenance: Provenance {
            source: format!("synthetic:{seed}"),
            sha256: String::new(),
        },
    }
}

fn main() -> cellpat::Result<()> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("scored.csv");
    let mut ds = synthetic_rows(60, 3);
    // Repeat a row under a fresh id; ingestion keeps only the first copy of
    // each genotype.
    let mut clone = ds.rows[0].clone();
    clone.id = "arch-dup".to_string();
    ds.rows.push(clone);
    write_dataset(&ds, std::fs::File::create(&path)?)?;

    let (ds, report) = load_dataset(&path)?;
    println!(
        "loaded {} rows ({} read, {} duplicates dropped) from {}",
        ds.len(),
        report.rows_read,
        report.duplicates_dropped,
        ds.provenance.source
    );

    let top = select_top_fraction(&ds, 0.10)?;
    let accs: Vec<String> = top.rows.iter().map(|r| format!("{:.3}", r.test_accuracy)).collect();
    println!("top 10% by test accuracy: {} rows ({})", top.len(), accs.join(", "));

    // Grouping requires labels, so unlabeled rows are filtered out first.
    let labeled = ScoredDataset {
        rows: ds.rows.iter().filter(|r| r.mia_auc.is_some()).cloned().collect(),
        provenance: ds.provenance.clone(),
    };
    let groups = group_by_auc(&labeled, 0.85, 0.65)?;
    println!(
        "AUC groups over {} labeled rows: {} high (> {}), {} low (< {}); the middle band is discarded",
        labeled.len(),
        groups.high.len(),
        groups.thresholds.0,
        groups.low.len(),
        groups.thresholds.1
    );

    for kind in [CellKind::Normal, CellKind::Reduction] {
        let dist = op_distribution(&ds, kind)?;
        let mut line = String::new();
        for (op, count) in &dist.counts {
            line.push_str(&format!("{}={} ", op.code(), count));
        }
        println!("{kind} cell operation counts over {} edges: {line}", dist.total);
        let conv = conv_topology_stats(&ds, kind)?;
        println!(
            "{kind} cell convolutions: {} touch an input node, {} connect intermediates",
            conv.direct, conv.intermediate
        );
    }
    Ok(())
}
