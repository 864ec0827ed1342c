//! Analysis toolkit for cell-based NAS architectures: validate and serialize
//! genotypes, enumerate single-edit neighborhoods, fit accuracy surrogates,
//! score per-edge operation importance, extract recurring cell patterns, and
//! apply them to rewrite architectures under an edit budget.

pub mod cell;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod genotype;
pub mod importance;
pub mod modify;
pub mod neighborhood;
pub mod pattern;
pub mod sample;
pub mod space;
pub mod surrogate;

pub use cell::{
    enumerate_possible_edges, macro_layout, CellGraph, CellKind, CellSet, NetworkSpec, NodeId,
    NodeRole, OpEdge, ValidationReport, Violation,
};
pub use dataset::{
    conv_topology_stats, group_by_auc, load_dataset, op_distribution, read_dataset,
    select_top_fraction, write_dataset, GroupedDataset, LoadReport, ScoredArchitecture,
    ScoredDataset,
};
pub use error::{Error, Result};
pub use genotype::{fingerprint, parse_genotype, serialize_genotype};
pub use importance::{
    build_candidate_edge_set, operation_importance, read_candidates_csv, write_candidates_csv,
    CandidateEdgeSet, OiRecord,
};
pub use modify::{
    apply_plan, diff_specs, plan_modification, DiffChange, DiffEntry, Edit, EditKind,
    ModTarget, ModificationPlan,
};
pub use neighborhood::{all_neighbors, apply_move, neighbors, neighbors_iter, NeighborMove};
pub use pattern::{extract_pattern, truncate_pattern, CellPattern, PatternEdge, PatternGoal};
pub use sample::{random_cell, random_network_spec};
pub use space::{Op, SearchSpace};
pub use surrogate::{
    evaluate, extract_features, fit, ExternalAdapter, FeatureVector, FitConfig, Predictor,
    RegressionMetrics, SurrogateModel,
};
