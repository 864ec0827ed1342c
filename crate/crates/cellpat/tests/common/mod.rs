//! Shared fixtures: a brute-force neighbor enumerator, a literal pseudocode
//! replay of the greedy pattern extraction, and a planted-signal synthetic
//! dataset generator.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use cellpat::dataset::{Provenance, ScoredArchitecture, ScoredDataset};
use cellpat::importance::{CandidateEdgeSet, OiRecord};
use cellpat::{
    random_network_spec, CellGraph, CellKind, NetworkSpec, NodeId, Op, OpEdge, SearchSpace,
};

/// Prints the per-criterion verdict line and fails the test on FAIL.
#[allow(dead_code)]
pub fn criterion(n: usize, ok: bool, detail: &str) {
    println!("criterion {n}: {} - {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

/// Independent neighbor enumerator: regenerate the cell with the chosen edge
/// perturbed by one op swap or one source change, keep structurally valid
/// results, and return them as canonical edge lists.
#[allow(dead_code)]
pub fn brute_force_neighbors(cell: &CellGraph, edge: OpEdge) -> BTreeSet<Vec<OpEdge>> {
    let rest: Vec<OpEdge> = cell
        .edges()
        .iter()
        .copied()
        .filter(|e| *e != edge)
        .collect();
    let mut found = BTreeSet::new();
    let mut try_candidate = |replacement: OpEdge| {
        let mut edges = rest.clone();
        edges.push(replacement);
        let candidate = CellGraph::new(cell.kind(), cell.m_intermediate(), edges);
        if candidate.validate().valid() {
            found.insert(candidate.edges().to_vec());
        }
    };
    for op in cell.space().operations() {
        if *op != edge.op {
            try_candidate(OpEdge {
                src: edge.src,
                dst: edge.dst,
                op: *op,
            });
        }
    }
    for src in 0..cell.node_count() {
        if src != edge.src.0 {
            try_candidate(OpEdge {
                src: NodeId(src),
                dst: edge.dst,
                op: edge.op,
            });
        }
    }
    found
}

/// Straight-from-pseudocode replay of the greedy pattern extraction,
/// returning the selected (src, dst, op) triples in selection order.
#[allow(dead_code)]
pub fn reference_extract(
    candidates: &CandidateEdgeSet,
    l: usize,
    demotion: bool,
) -> Vec<(usize, usize, Op)> {
    let tie = |r: &OiRecord| (r.dst.0, r.src.0, r.op.code());
    let mut list: Vec<OiRecord> = candidates.records.clone();
    if demotion {
        list.sort_by(|a, b| b.oi.total_cmp(&a.oi).then_with(|| tie(a).cmp(&tie(b))));
    } else {
        list.sort_by(|a, b| a.oi.total_cmp(&b.oi).then_with(|| tie(a).cmp(&tie(b))));
    }
    let mut d_in: HashMap<usize, usize> = HashMap::new();
    let mut g_p: Vec<(usize, usize, Op)> = Vec::new();
    let mut e_p: HashSet<(usize, usize)> = HashSet::new();
    let mut v_p: HashSet<usize> = HashSet::new();
    if let Some(first) = list.first() {
        v_p.insert(first.src.0);
    }
    while g_p.len() < l {
        let mut epsilon = false;
        let n = list.len();
        for i in 0..n {
            let (u, v, o) = (list[i].src.0, list[i].dst.0, list[i].op);
            let tau = list[i].oi;
            if (v_p.contains(&u) || v_p.contains(&v))
                && !e_p.contains(&(u, v))
                && *d_in.get(&v).unwrap_or(&0) < 2
                && ((demotion && tau > 0.0) || (!demotion && tau < 0.0)) {
                    g_p.push((u, v, o));
                    e_p.insert((u, v));
                    v_p.insert(u);
                    v_p.insert(v);
                    *d_in.entry(v).or_insert(0) += 1;
                    list.remove(i);
                    epsilon = true;
                    break;
                }
        }
        if !epsilon {
            break;
        }
    }
    g_p
}

/// Random candidate set over one cell kind; scores land on a coarse grid so
/// exact ties and exact zeros both occur.
#[allow(dead_code)]
pub fn random_candidate_set(rng: &mut ChaCha20Rng, kind: CellKind) -> CandidateEdgeSet {
    let space = kind.space();
    let m = 4;
    let first = kind.first_intermediate();
    let mut records = Vec::new();
    for dst in first..first + m {
        for src in 0..dst {
            for op in space.operations() {
                if rng.gen_bool(0.25) {
                    records.push(OiRecord {
                        cell_kind: kind,
                        src: NodeId(src),
                        dst: NodeId(dst),
                        op: *op,
                        occurrences: rng.gen_range(15..40),
                        oi: 0.005 * rng.gen_range(-4i32..=4) as f64,
                    });
                }
            }
        }
    }
    CandidateEdgeSet {
        cell_kind: kind,
        min_occurrences: 14,
        records,
    }
}

pub const PLANTED_BASE: f64 = 0.8;
pub const PLANTED_AP3_WEIGHT: f64 = -0.01;
pub const PLANTED_CONV_WEIGHT: f64 = 0.005;
pub const PLANTED_SIGMA: f64 = 0.005;

#[allow(dead_code)]
pub fn ap3_count(cell: &CellGraph) -> usize {
    cell.edges().iter().filter(|e| e.op == Op::AvgPool3x3).count()
}

#[allow(dead_code)]
pub fn direct_conv_count(cell: &CellGraph) -> usize {
    cell.edges()
        .iter()
        .filter(|e| e.op.is_convolution() && e.src.0 < 2)
        .count()
}

/// Noise-free planted score: pooling in the reduction cell lowers it,
/// input-adjacent convolution in either cell raises it.
#[allow(dead_code)]
pub fn planted_signal(spec: &NetworkSpec) -> f64 {
    let reduction = spec.cell(CellKind::Reduction).expect("darts spec");
    let normal = spec.cell(CellKind::Normal).expect("darts spec");
    PLANTED_BASE
        + PLANTED_AP3_WEIGHT * ap3_count(reduction) as f64
        + PLANTED_CONV_WEIGHT * (direct_conv_count(normal) + direct_conv_count(reduction)) as f64
}

/// Seeded synthetic population whose MIA AUC follows the planted signal plus
/// Gaussian noise.
#[allow(dead_code)]
pub fn planted_dataset(n: usize, seed: u64) -> ScoredDataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, PLANTED_SIGMA).expect("valid sigma");
    let rows = (0..n)
        .map(|i| {
            let spec = random_network_spec(&mut rng, SearchSpace::Darts, 4, 5).expect("valid");
            let auc = planted_signal(&spec) + noise.sample(&mut rng);
            ScoredArchitecture {
                id: format!("arch-{i:05}"),
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
