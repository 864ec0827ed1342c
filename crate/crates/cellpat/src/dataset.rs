//! Scored-architecture datasets: CSV ingestion with genotype-level dedup,
//! top-fraction selection, AUC grouping, and per-cell operation statistics.

use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::cell::{CellKind, NetworkSpec, NodeRole};
use crate::error::{Error, Result};
use crate::genotype::{parse_genotype, serialize_genotype};
use crate::space::Op;

/// One dataset row: an architecture with its measured scores.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredArchitecture {
    pub id: String,
    pub spec: NetworkSpec,
    pub test_accuracy: f64,
    /// Optional at ingest; required for AUC grouping and surrogate training.
    pub mia_auc: Option<f64>,
}

/// Where a dataset came from, for run manifests.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Provenance {
    pub source: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredDataset {
    pub rows: Vec<ScoredArchitecture>,
    pub provenance: Provenance,
}

impl ScoredDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Ingestion summary.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub rows_read: usize,
    pub duplicates_dropped: usize,
}

/// The high/low-AUC partition, middle band discarded.
#[derive(Clone, Debug)]
pub struct GroupedDataset {
    pub high: ScoredDataset,
    pub low: ScoredDataset,
    pub thresholds: (f64, f64),
}

const HEADER: [&str; 4] = ["id", "genotype", "test_accuracy", "mia_auc"];

/// Reads a dataset CSV file; see [`read_dataset`] for the semantics.
pub fn load_dataset(path: &Path) -> Result<(ScoredDataset, LoadReport)> {
    let bytes = std::fs::read(path)?;
    read_dataset(&bytes[..], &path.display().to_string())
}

/// Parses dataset CSV content. Rows whose genotype canonicalizes identically
/// to an earlier row are dropped (first occurrence wins); ids of kept rows
/// must be unique; score columns must be in [0, 1] when present.
pub fn read_dataset(reader: impl Read, source: &str) -> Result<(ScoredDataset, LoadReport)> {
    let mut hasher = Sha256::new();
    let mut bytes = Vec::new();
    let mut reader = reader;
    reader.read_to_end(&mut bytes)?;
    hasher.update(&bytes);
    let sha256: String = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();

    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(&bytes[..]);
    let headers = csv.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Dataset(format!(
            "unexpected header `{}` (expected `{}`)",
            headers.iter().collect::<Vec<_>>().join(","),
            HEADER.join(",")
        )));
    }

    let mut rows: Vec<ScoredArchitecture> = Vec::new();
    let mut seen_genotypes = std::collections::BTreeSet::new();
    let mut seen_ids = std::collections::BTreeSet::new();
    let mut report = LoadReport::default();
    for (index, record) in csv.records().enumerate() {
        let row_no = index + 2; // 1-based, counting the header line
        let record = record?;
        let fail = |message: String| Error::DatasetRow {
            row: row_no,
            message,
        };
        if record.len() != HEADER.len() {
            return Err(fail(format!("expected 4 fields, found {}", record.len())));
        }
        report.rows_read += 1;
        let id = record[0].to_string();
        let spec =
            parse_genotype(&record[1]).map_err(|e| fail(format!("genotype: {e}")))?;
        let test_accuracy = parse_score(&record[2], "test_accuracy").map_err(&fail)?;
        let test_accuracy = test_accuracy
            .ok_or_else(|| fail("test_accuracy must not be empty".to_string()))?;
        let mia_auc = parse_score(&record[3], "mia_auc").map_err(&fail)?;

        let canonical = serialize_genotype(&spec).map_err(|e| fail(e.to_string()))?;
        if !seen_genotypes.insert(canonical) {
            report.duplicates_dropped += 1;
            continue;
        }
        if !seen_ids.insert(id.clone()) {
            return Err(fail(format!("duplicate id `{id}`")));
        }
        rows.push(ScoredArchitecture {
            id,
            spec,
            test_accuracy,
            mia_auc,
        });
    }

    Ok((
        ScoredDataset {
            rows,
            provenance: Provenance {
                source: source.to_string(),
                sha256,
            },
        },
        report,
    ))
}

fn parse_score(field: &str, name: &str) -> std::result::Result<Option<f64>, String> {
    if field.is_empty() {
        return Ok(None);
    }
    let value: f64 = field
        .parse()
        .map_err(|_| format!("{name} is not a number: `{field}`"))?;
    if !(0.0..=1.0).contains(&value) {
        return Err(format!("{name} {value} outside [0, 1]"));
    }
    Ok(Some(value))
}

/// Writes a dataset back out in the ingestion CSV schema.
pub fn write_dataset(ds: &ScoredDataset, writer: impl Write) -> Result<()> {
    let mut csv = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    csv.write_record(HEADER)?;
    for row in &ds.rows {
        csv.write_record([
            row.id.as_str(),
            &serialize_genotype(&row.spec)?,
            &row.test_accuracy.to_string(),
            &row.mia_auc.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

/// Keeps the ceil(fraction·n) rows with the highest test accuracy,
/// ties broken by id ascending.
pub fn select_top_fraction(ds: &ScoredDataset, fraction: f64) -> Result<ScoredDataset> {
    if ds.is_empty() {
        return Err(Error::Dataset("empty dataset".to_string()));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fraction {fraction} outside (0, 1]"
        )));
    }
    let keep = (fraction * ds.len() as f64).ceil() as usize;
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.sort_by(|&a, &b| {
        ds.rows[b]
            .test_accuracy
            .total_cmp(&ds.rows[a].test_accuracy)
            .then_with(|| ds.rows[a].id.cmp(&ds.rows[b].id))
    });
    order.truncate(keep);
    order.sort_unstable();
    Ok(ScoredDataset {
        rows: order.iter().map(|&i| ds.rows[i].clone()).collect(),
        provenance: ds.provenance.clone(),
    })
}

/// Partitions by MIA AUC with strict inequalities: auc > high_thr goes high,
/// auc < low_thr goes low, everything else is discarded.
pub fn group_by_auc(ds: &ScoredDataset, high_thr: f64, low_thr: f64) -> Result<GroupedDataset> {
    if low_thr > high_thr {
        return Err(Error::InvalidArgument(format!(
            "low threshold {low_thr} exceeds high threshold {high_thr}"
        )));
    }
    let mut high = Vec::new();
    let mut low = Vec::new();
    for row in &ds.rows {
        let auc = row.mia_auc.ok_or_else(|| {
            Error::Dataset(format!("row `{}` lacks mia_auc, cannot group", row.id))
        })?;
        if auc > high_thr {
            high.push(row.clone());
        } else if auc < low_thr {
            low.push(row.clone());
        }
    }
    Ok(GroupedDataset {
        high: ScoredDataset {
            rows: high,
            provenance: ds.provenance.clone(),
        },
        low: ScoredDataset {
            rows: low,
            provenance: ds.provenance.clone(),
        },
        thresholds: (high_thr, low_thr),
    })
}

/// Operation counts over one cell kind of every row.
#[derive(Clone, Debug, PartialEq)]
pub struct OpDistribution {
    pub cell_kind: CellKind,
    /// (operation, count) in operation-set order.
    pub counts: Vec<(Op, usize)>,
    pub total: usize,
}

impl OpDistribution {
    pub fn frequency(&self, op: Op) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.counts
            .iter()
            .find(|(o, _)| *o == op)
            .map(|(_, c)| *c as f64 / self.total as f64)
            .unwrap_or(0.0)
    }
}

pub fn op_distribution(ds: &ScoredDataset, cell_kind: CellKind) -> Result<OpDistribution> {
    if ds.is_empty() {
        return Err(Error::Dataset("empty dataset".to_string()));
    }
    let ops = cell_kind.space().operations();
    let mut counts = vec![0usize; ops.len()];
    let mut total = 0usize;
    for row in &ds.rows {
        let cell = row.spec.cell(cell_kind).ok_or_else(|| {
            Error::InvalidArgument(format!("row `{}` has no {cell_kind} cell", row.id))
        })?;
        for edge in cell.edges() {
            let slot = ops.iter().position(|&o| o == edge.op).expect("validated op");
            counts[slot] += 1;
            total += 1;
        }
    }
    Ok(OpDistribution {
        cell_kind,
        counts: ops.iter().copied().zip(counts).collect(),
        total,
    })
}

/// Convolution placement counts: direct = convolution edges leaving an input
/// node, intermediate = convolution edges between intermediate nodes.
/// Frequencies are over convolution edges only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvTopologyStats {
    pub direct: usize,
    pub intermediate: usize,
    pub direct_freq: f64,
    pub intermediate_freq: f64,
}

pub fn conv_topology_stats(ds: &ScoredDataset, cell_kind: CellKind) -> Result<ConvTopologyStats> {
    if ds.is_empty() {
        return Err(Error::Dataset("empty dataset".to_string()));
    }
    let mut direct = 0usize;
    let mut intermediate = 0usize;
    for row in &ds.rows {
        let cell = row.spec.cell(cell_kind).ok_or_else(|| {
            Error::InvalidArgument(format!("row `{}` has no {cell_kind} cell", row.id))
        })?;
        for edge in cell.edges() {
            if !edge.op.is_convolution() {
                continue;
            }
            match cell.role_of(edge.src) {
                Some(NodeRole::Input) => direct += 1,
                Some(NodeRole::Intermediate) => intermediate += 1,
                _ => {}
            }
        }
    }
    let conv_total = direct + intermediate;
    let freq = |n: usize| {
        if conv_total == 0 {
            0.0
        } else {
            n as f64 / conv_total as f64
        }
    };
    Ok(ConvTopologyStats {
        direct,
        intermediate,
        direct_freq: freq(direct),
        intermediate_freq: freq(intermediate),
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    use super::*;
    use crate::sample::random_network_spec;
    use crate::space::SearchSpace;

    fn toy_dataset(n: usize, seed: u64) -> ScoredDataset {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|i| ScoredArchitecture {
                id: format!("a{i:05}"),
                spec: random_network_spec(&mut rng, SearchSpace::Darts, 4, 5).unwrap(),
                test_accuracy: 0.9 - i as f64 * 1e-4,
                mia_auc: Some(0.7 + (i % 20) as f64 * 0.01),
            })
            .collect();
        ScoredDataset {
            rows,
            provenance: Provenance {
                source: "toy".to_string(),
                sha256: String::new(),
            },
        }
    }

    #[test]
    fn csv_round_trip_with_duplicate_collapse() {
        let ds = toy_dataset(6, 1);
        let mut buf = Vec::new();
        write_dataset(&ds, &mut buf).unwrap();
        let (loaded, report) = read_dataset(&buf[..], "mem").unwrap();
        assert_eq!(report.rows_read, 6);
        assert_eq!(report.duplicates_dropped, 0);
        assert_eq!(loaded.rows, ds.rows);

        // Append a row that repeats row 0's genotype under a fresh id.
        let mut with_dup = ds.clone();
        with_dup.rows.push(ScoredArchitecture {
            id: "dup".to_string(),
            ..ds.rows[0].clone()
        });
        let mut buf = Vec::new();
        write_dataset(&with_dup, &mut buf).unwrap();
        let (loaded, report) = read_dataset(&buf[..], "mem").unwrap();
        assert_eq!(report.duplicates_dropped, 1);
        assert_eq!(loaded.rows, ds.rows);
    }

    #[test]
    fn row_errors_carry_row_numbers() {
        let csv = "id,genotype,test_accuracy,mia_auc\nx,not a genotype {,0.9,\n";
        match read_dataset(csv.as_bytes(), "mem") {
            Err(Error::DatasetRow { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected row error, got {other:?}"),
        }
        let csv = "id,genotype,test_accuracy,mia_auc\n";
        let (ds, report) = read_dataset(csv.as_bytes(), "mem").unwrap();
        assert!(ds.is_empty());
        assert_eq!(report.rows_read, 0);
    }

    #[test]
    fn top_fraction_uses_ceiling_and_id_ties() {
        let mut ds = toy_dataset(10, 2);
        for row in &mut ds.rows {
            row.test_accuracy = 0.9;
        }
        let top = select_top_fraction(&ds, 0.05).unwrap();
        assert_eq!(top.len(), 1);
        assert_eq!(top.rows[0].id, "a00000");
        assert_eq!(select_top_fraction(&ds, 1.0).unwrap().len(), 10);
    }

    #[test]
    fn grouping_is_strict() {
        let mut ds = toy_dataset(5, 3);
        for (row, auc) in ds.rows.iter_mut().zip([0.85, 0.84, 0.80, 0.78, 0.70]) {
            row.mia_auc = Some(auc);
        }
        let grouped = group_by_auc(&ds, 0.84, 0.78).unwrap();
        assert_eq!(grouped.high.len(), 1);
        assert_eq!(grouped.high.rows[0].mia_auc, Some(0.85));
        assert_eq!(grouped.low.len(), 1);
        assert_eq!(grouped.low.rows[0].mia_auc, Some(0.70));
    }

    #[test]
    fn distributions_sum_to_one_and_count_every_edge() {
        let ds = toy_dataset(20, 4);
        let dist = op_distribution(&ds, CellKind::Reduction).unwrap();
        assert_eq!(dist.total, 8 * ds.len());
        let freq_sum: f64 = dist
            .counts
            .iter()
            .map(|&(op, _)| dist.frequency(op))
            .sum();
        assert!((freq_sum - 1.0).abs() < 1e-9);

        let stats = conv_topology_stats(&ds, CellKind::Normal).unwrap();
        let mut direct = 0;
        let mut inter = 0;
        for row in &ds.rows {
            let cell = row.spec.cell(CellKind::Normal).unwrap();
            for e in cell.edges() {
                if e.op.is_convolution() {
                    if e.src.0 < 2 {
                        direct += 1;
                    } else {
                        inter += 1;
                    }
                }
            }
        }
        assert_eq!(stats.direct, direct);
        assert_eq!(stats.intermediate, inter);
    }
}
