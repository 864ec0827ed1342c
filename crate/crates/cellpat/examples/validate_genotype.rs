//! Parse genotypes from both input formats, round-trip the canonical JSON,
//! and show what a validation report looks like for a broken document.

use cellpat::{fingerprint, parse_genotype, serialize_genotype, Error};

const JSON_GENOTYPE: &str = r#"{
  "search_space": "darts",
  "m_intermediate": 4,
  "n_cells": 5,
  "normal": [
    {"src": 0, "dst": 2, "op": "s3"}, {"src": 1, "dst": 2, "op": "s3"},
    {"src": 0, "dst": 3, "op": "sc"}, {"src": 2, "dst": 3, "op": "s5"},
    {"src": 1, "dst": 4, "op": "d3"}, {"src": 3, "dst": 4, "op": "mp3"},
    {"src": 0, "dst": 5, "op": "ap3"}, {"src": 4, "dst": 5, "op": "s3"}
  ],
  "reduction": [
    {"src": 0, "dst": 2, "op": "mp3"}, {"src": 1, "dst": 2, "op": "mp3"},
    {"src": 1, "dst": 3, "op": "s5"}, {"src": 2, "dst": 3, "op": "sc"},
    {"src": 0, "dst": 4, "op": "ap3"}, {"src": 2, "dst": 4, "op": "d5"},
    {"src": 1, "dst": 5, "op": "s3"}, {"src": 3, "dst": 5, "op": "sc"}
  ]
}"#;

const LEGACY_GENOTYPE: &str = "Genotype(normal=[('sep_conv_3x3', 1), ('sep_conv_3x3', 0), \
('skip_connect', 0), ('sep_conv_3x3', 1), ('skip_connect', 0), ('sep_conv_3x3', 1), \
('sep_conv_3x3', 0), ('sep_conv_3x3', 1)], normal_concat=[2, 3, 4, 5], \
reduce=[('max_pool_3x3', 0), ('max_pool_3x3', 1), ('skip_connect', 2), \
('max_pool_3x3', 0), ('max_pool_3x3', 0), ('skip_connect', 2), ('skip_connect', 2), \
('avg_pool_3x3', 0)], reduce_concat=[2, 3, 4, 5])";

fn main() -> cellpat::Result<()> {
    let spec = parse_genotype(JSON_GENOTYPE)?;
    println!(
        "JSON genotype: {} space, m = {}, {} cells, fingerprint {}",
        spec.space().id(),
        spec.m_intermediate(),
        spec.n_cells(),
        &fingerprint(&spec)?[..12]
    );

    let canonical = serialize_genotype(&spec)?;
    let reparsed = parse_genotype(&canonical)?;
    assert_eq!(serialize_genotype(&reparsed)?, canonical);
    println!("canonical form round-trips byte-identically ({} bytes)", canonical.len());

    let legacy = parse_genotype(LEGACY_GENOTYPE)?;
    println!(
        "legacy tuple genotype: {} edges in the normal cell, {} in the reduction cell",
        legacy.cell(cellpat::CellKind::Normal).unwrap().edges().len(),
        legacy.cell(cellpat::CellKind::Reduction).unwrap().edges().len(),
    );

    // A node may take at most two incoming edges; repeat a pair and drop
    // another to see every violated rule reported with its location.
    let broken = JSON_GENOTYPE.replace(
        "{\"src\": 2, \"dst\": 3, \"op\": \"s5\"}",
        "{\"src\": 1, \"dst\": 2, \"op\": \"s3\"}",
    );
    match parse_genotype(&broken) {
        Err(Error::InvalidSpec(report)) => {
            println!("broken document rejected with {} violations:", report.violations.len());
            for v in &report.violations {
                println!("  [{}] {}", v.rule, v.message);
            }
        }
        other => panic!("expected a validation failure, got {other:?}"),
    }
    Ok(())
}
