//! Architecture-score surrogates: feature extraction, a built-in ridge
//! regressor with seeded train/valid/test splitting, JSON persistence, and
//! the external-predictor adapter.

mod adapter;
mod metrics;
mod ridge;

pub use adapter::{ExternalAdapter, ADAPTER_TIMEOUT_ENV};
pub use metrics::{average_ranks, evaluate, RegressionMetrics};
pub use ridge::{fit_ridge, RidgeFit};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cell::{CellGraph, NetworkSpec, NodeRole};
use crate::dataset::ScoredDataset;
use crate::error::{Error, Result};
use crate::genotype::fingerprint;
use crate::space::SearchSpace;

/// Feature encoding of one architecture under a fixed schema.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub schema_id: String,
}

/// Schema identifier; the feature layout is fully determined by
/// (search space, M) plus the trailing format revision.
pub fn schema_id(space: SearchSpace, m_intermediate: usize) -> String {
    format!("{}-m{}-f1", space.id(), m_intermediate)
}

/// Total feature count for a schema.
pub fn feature_len(space: SearchSpace, m_intermediate: usize) -> Result<usize> {
    let k = space.operation_count();
    let p = crate::cell::enumerate_possible_edges(space, m_intermediate)?.len();
    let per_cell = k + 2 + p * k + 2;
    let cell_kinds = match space {
        SearchSpace::Darts => 2,
        SearchSpace::Nb201 => 1,
    };
    Ok(per_cell * cell_kinds)
}

/// Encodes a spec as a flat vector. Per cell kind, in order: operation
/// histogram (K), direct-convolution count, intermediate-convolution count,
/// one-hot over (possible edge × operation), longest input→intermediate path,
/// and max node out-degree. NB201 `none` edges count as absent connections
/// for the path and degree features.
pub fn extract_features(spec: &NetworkSpec) -> Result<FeatureVector> {
    let report = spec.validate();
    if !report.valid() {
        return Err(Error::InvalidSpec(report));
    }
    let space = spec.space();
    let m = spec.m_intermediate();
    let mut values = Vec::with_capacity(feature_len(space, m)?);
    for &kind in spec.cell_kinds() {
        push_cell_features(spec.cell(kind).expect("kind present"), &mut values)?;
    }
    Ok(FeatureVector {
        values,
        schema_id: schema_id(space, m),
    })
}

fn push_cell_features(cell: &CellGraph, out: &mut Vec<f64>) -> Result<()> {
    let space = cell.space();
    let ops = space.operations();

    let mut histogram = vec![0.0; ops.len()];
    let mut direct_conv = 0.0;
    let mut intermediate_conv = 0.0;
    for e in cell.edges() {
        let slot = ops.iter().position(|&o| o == e.op).expect("validated op");
        histogram[slot] += 1.0;
        if e.op.is_convolution() {
            match cell.role_of(e.src) {
                Some(NodeRole::Input) => direct_conv += 1.0,
                Some(NodeRole::Intermediate) => intermediate_conv += 1.0,
                _ => {}
            }
        }
    }
    out.extend_from_slice(&histogram);
    out.push(direct_conv);
    out.push(intermediate_conv);

    for (src, dst) in crate::cell::enumerate_possible_edges(space, cell.m_intermediate())? {
        let present = cell.find_edge(src, dst).map(|e| e.op);
        for &op in ops {
            out.push(if present == Some(op) { 1.0 } else { 0.0 });
        }
    }

    out.push(longest_input_path(cell) as f64);
    out.push(max_out_degree(cell) as f64);
    Ok(())
}

/// Longest path (in edges) from any input node to any intermediate node,
/// following connection-carrying edges.
fn longest_input_path(cell: &CellGraph) -> usize {
    let mut dist: Vec<Option<usize>> = vec![None; cell.node_count()];
    for node in cell.input_nodes() {
        dist[node.0] = Some(0);
    }
    // Edges are sorted by ascending dst, so one pass is a topological sweep.
    for e in cell.edges() {
        if e.op.is_none_op() {
            continue;
        }
        if let Some(d) = dist[e.src.0] {
            let candidate = d + 1;
            if dist[e.dst.0].is_none_or(|cur| candidate > cur) {
                dist[e.dst.0] = Some(candidate);
            }
        }
    }
    cell.intermediate_nodes()
        .iter()
        .filter_map(|n| dist[n.0])
        .max()
        .unwrap_or(0)
}

fn max_out_degree(cell: &CellGraph) -> usize {
    (0..cell.node_count())
        .map(|n| {
            cell.edges()
                .iter()
                .filter(|e| e.src.0 == n && !e.op.is_none_op())
                .count()
        })
        .max()
        .unwrap_or(0)
}

/// Anything that can score an architecture.
pub trait Predictor {
    fn predict(&self, spec: &NetworkSpec) -> Result<f64>;

    fn predict_batch(&self, specs: &[NetworkSpec]) -> Result<Vec<f64>> {
        specs.iter().map(|s| self.predict(s)).collect()
    }
}

/// How a model was trained, for run manifests and audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelProvenance {
    pub dataset_source: String,
    pub dataset_sha256: String,
    /// Hash over the training split's (genotype fingerprint, score) pairs.
    pub training_hash: String,
    pub n_rows: usize,
    pub n_train: usize,
    pub n_valid: usize,
    pub n_test: usize,
    pub seed: u64,
    pub train_fraction: f64,
    pub valid_fraction: f64,
}

/// The built-in ridge surrogate, persisted as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateModel {
    pub kind: String,
    pub schema_id: String,
    pub lambda: f64,
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub provenance: ModelProvenance,
}

pub const MODEL_KIND_BUILTIN_RIDGE: &str = "builtin_ridge";

impl SurrogateModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: SurrogateModel = serde_json::from_str(text)?;
        if model.kind != MODEL_KIND_BUILTIN_RIDGE {
            return Err(Error::Semantic(format!(
                "unsupported model kind `{}`",
                model.kind
            )));
        }
        let d = model.weights.len();
        if model.means.len() != d || model.scales.len() != d {
            return Err(Error::Semantic(
                "model weight/mean/scale lengths disagree".to_string(),
            ));
        }
        Ok(model)
    }
}

impl Predictor for SurrogateModel {
    fn predict(&self, spec: &NetworkSpec) -> Result<f64> {
        let features = extract_features(spec)?;
        if features.schema_id != self.schema_id {
            return Err(Error::SchemaMismatch {
                model: self.schema_id.clone(),
                arch: features.schema_id,
            });
        }
        let mut acc = self.intercept;
        for j in 0..self.weights.len() {
            acc += self.weights[j] * (features.values[j] - self.means[j]) / self.scales[j];
        }
        Ok(acc)
    }
}

/// Ridge-fit configuration; the split is the 80/10/10 default unless changed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub lambda: f64,
    pub train_fraction: f64,
    pub valid_fraction: f64,
    pub seed: u64,
}

impl FitConfig {
    pub fn new(lambda: f64, seed: u64) -> Self {
        FitConfig {
            lambda,
            train_fraction: 0.8,
            valid_fraction: 0.1,
            seed,
        }
    }
}

/// Seeded shuffle split into (train, valid, test) index lists:
/// floor(train·n) then floor(valid·n) rows, remainder to test.
pub fn split_indices(
    n: usize,
    seed: u64,
    train_fraction: f64,
    valid_fraction: f64,
) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    if !(train_fraction >= 0.0 && valid_fraction >= 0.0)
        || train_fraction + valid_fraction > 1.0
    {
        return Err(Error::InvalidArgument(format!(
            "split fractions {train_fraction}/{valid_fraction} out of range"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
    let n_train = (train_fraction * n as f64).floor() as usize;
    let n_valid = (valid_fraction * n as f64).floor() as usize;
    let valid_end = n_train + n_valid;
    Ok((
        order[..n_train].to_vec(),
        order[n_train..valid_end].to_vec(),
        order[valid_end..].to_vec(),
    ))
}

/// Fits the built-in ridge surrogate on the dataset's MIA-AUC scores and
/// reports metrics on the held-out validation split. Rows without a score
/// are skipped; all scored rows must share one feature schema.
pub fn fit(ds: &ScoredDataset, config: &FitConfig) -> Result<(SurrogateModel, RegressionMetrics)> {
    let scored: Vec<(&crate::dataset::ScoredArchitecture, f64)> = ds
        .rows
        .iter()
        .filter_map(|r| r.mia_auc.map(|y| (r, y)))
        .collect();
    if scored.len() < 2 {
        return Err(Error::Dataset(format!(
            "need at least 2 rows with mia_auc to fit, found {}",
            scored.len()
        )));
    }

    let mut features = Vec::with_capacity(scored.len());
    let mut schema = None;
    for (row, _) in &scored {
        let fv = extract_features(&row.spec)?;
        match &schema {
            None => schema = Some(fv.schema_id.clone()),
            Some(s) if *s != fv.schema_id => {
                return Err(Error::Dataset(format!(
                    "mixed feature schemas in dataset: `{s}` and `{}`",
                    fv.schema_id
                )))
            }
            _ => {}
        }
        features.push(fv.values);
    }
    let schema = schema.expect("at least 2 rows");

    let (train, valid, test) = split_indices(
        scored.len(),
        config.seed,
        config.train_fraction,
        config.valid_fraction,
    )?;
    let train_rows: Vec<Vec<f64>> = train.iter().map(|&i| features[i].clone()).collect();
    let train_y: Vec<f64> = train.iter().map(|&i| scored[i].1).collect();
    let fitted = fit_ridge(&train_rows, &train_y, config.lambda)?;

    let metrics = if valid.is_empty() {
        RegressionMetrics::degenerate()
    } else {
        let predictions: Vec<f64> = valid
            .iter()
            .map(|&i| fitted.predict_row(&features[i]))
            .collect();
        let truths: Vec<f64> = valid.iter().map(|&i| scored[i].1).collect();
        evaluate(&predictions, &truths)?
    };

    let mut hasher = Sha256::new();
    for &i in &train {
        let fp = fingerprint(&scored[i].0.spec)?;
        hasher.update(format!("{fp} {:016x}\n", scored[i].1.to_bits()));
    }
    let training_hash: String = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();

    let model = SurrogateModel {
        kind: MODEL_KIND_BUILTIN_RIDGE.to_string(),
        schema_id: schema,
        lambda: config.lambda,
        intercept: fitted.intercept,
        weights: fitted.weights,
        means: fitted.means,
        scales: fitted.scales,
        provenance: ModelProvenance {
            dataset_source: ds.provenance.source.clone(),
            dataset_sha256: ds.provenance.sha256.clone(),
            training_hash,
            n_rows: scored.len(),
            n_train: train.len(),
            n_valid: valid.len(),
            n_test: test.len(),
            seed: config.seed,
            train_fraction: config.train_fraction,
            valid_fraction: config.valid_fraction,
        },
    };
    Ok((model, metrics))
}
