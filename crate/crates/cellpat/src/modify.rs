//! Rewrites a target architecture to comply with extracted cell patterns:
//! plans per-edge edits (noop, op change, or edge replacement) in pattern
//! selection order under an edit budget, then applies them while keeping the
//! architecture valid.

use serde::{Deserialize, Serialize};

use crate::cell::{CellGraph, CellKind, NetworkSpec, OpEdge};
use crate::error::{Error, Result};
use crate::genotype::fingerprint;
use crate::pattern::{truncate_pattern, CellPattern};
use crate::space::SearchSpace;

/// Which cells of the target architecture a modification may touch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModTarget {
    Normal,
    Reduction,
    Dual,
}

impl ModTarget {
    pub fn id(self) -> &'static str {
        match self {
            ModTarget::Normal => "normal",
            ModTarget::Reduction => "reduction",
            ModTarget::Dual => "dual",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "normal" => Ok(ModTarget::Normal),
            "reduction" => Ok(ModTarget::Reduction),
            "dual" => Ok(ModTarget::Dual),
            other => Err(Error::InvalidArgument(format!(
                "unknown modification target `{other}`; expected normal, reduction, or dual"
            ))),
        }
    }

    fn touches(self, kind: CellKind) -> bool {
        matches!(
            (self, kind),
            (ModTarget::Normal, CellKind::Normal)
                | (ModTarget::Reduction, CellKind::Reduction)
                | (ModTarget::Dual, CellKind::Normal)
                | (ModTarget::Dual, CellKind::Reduction)
        )
    }
}

impl std::fmt::Display for ModTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    ReplaceEdge,
    ChangeOp,
    Noop,
}

/// One planned edit; `before` is the edge being removed or altered, absent
/// only when nothing pre-existing is touched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub cell_kind: CellKind,
    pub kind: EditKind,
    pub before: Option<OpEdge>,
    pub after: OpEdge,
}

/// An auditable edit list bound to one architecture by fingerprint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModificationPlan {
    pub target: ModTarget,
    pub budget: usize,
    pub spec_fingerprint: String,
    pub edits: Vec<Edit>,
}

impl ModificationPlan {
    /// Edits that actually change the architecture.
    pub fn effective_edits(&self) -> impl Iterator<Item = &Edit> {
        self.edits.iter().filter(|e| e.kind != EditKind::Noop)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn require_pattern(
    pattern: Option<&CellPattern>,
    kind: CellKind,
    wanted: bool,
) -> Result<Option<&CellPattern>> {
    match (pattern, wanted) {
        (Some(p), true) => {
            if p.cell_kind != kind {
                return Err(Error::InvalidArgument(format!(
                    "pattern for the {kind} cell is tagged {}",
                    p.cell_kind
                )));
            }
            Ok(Some(p))
        }
        (None, true) => Err(Error::InvalidArgument(format!(
            "target needs a {kind} pattern but none was given"
        ))),
        (Some(_), false) => Err(Error::InvalidArgument(format!(
            "a {kind} pattern was given but the target does not touch that cell"
        ))),
        (None, false) => Ok(None),
    }
}

fn plan_cell_edits(cell: &CellGraph, pattern: &CellPattern, budget: usize) -> Result<Vec<Edit>> {
    let kind = cell.kind();
    let truncated = truncate_pattern(pattern, budget);
    let report = truncated.validate();
    if !report.valid() {
        return Err(Error::InvalidSpec(report));
    }
    let node_count = cell.node_count();
    let intermediate_low = kind.first_intermediate();
    let mut working: Vec<OpEdge> = cell.edges().to_vec();
    let mut installed: Vec<(usize, usize)> = Vec::new();
    let mut edits = Vec::new();
    for (index, pe) in truncated.edges.iter().enumerate() {
        if pe.dst.0 < intermediate_low || pe.dst.0 >= intermediate_low + cell.m_intermediate() {
            return Err(Error::Semantic(format!(
                "pattern edge {}->{} points at node {}, outside the cell's intermediate range",
                pe.src.0, pe.dst.0, pe.dst.0
            )));
        }
        if pe.src.0 >= node_count {
            return Err(Error::Semantic(format!(
                "pattern edge {}->{} starts at node {}, outside the cell's node range",
                pe.src.0, pe.dst.0, pe.src.0
            )));
        }
        let after = OpEdge {
            src: pe.src,
            dst: pe.dst,
            op: pe.op,
        };
        let existing = working
            .iter()
            .copied()
            .find(|e| e.src == pe.src && e.dst == pe.dst);
        let edit = match existing {
            Some(e) if e.op == pe.op => Edit {
                cell_kind: kind,
                kind: EditKind::Noop,
                before: Some(e),
                after,
            },
            Some(e) => {
                let slot = working
                    .iter_mut()
                    .find(|w| w.src == e.src && w.dst == e.dst)
                    .expect("edge just found");
                slot.op = pe.op;
                Edit {
                    cell_kind: kind,
                    kind: EditKind::ChangeOp,
                    before: Some(e),
                    after,
                }
            }
            None => {
                // Evict an incoming edge of the same destination: never one
                // this plan installed, never one matching a later pattern
                // edge, smallest source first among what remains.
                let victim = working
                    .iter()
                    .copied()
                    .filter(|e| e.dst == pe.dst)
                    .filter(|e| !installed.contains(&(e.src.0, e.dst.0)))
                    .filter(|e| {
                        !truncated.edges[index + 1..].iter().any(|later| {
                            later.src == e.src && later.dst == e.dst && later.op == e.op
                        })
                    })
                    .min_by_key(|e| e.src.0)
                    .ok_or_else(|| {
                        Error::Semantic(format!(
                            "pattern edge {}->{} cannot be placed: every incoming edge of node {} \
                             is reserved by the pattern",
                            pe.src.0, pe.dst.0, pe.dst.0
                        ))
                    })?;
                working.retain(|e| *e != victim);
                working.push(after);
                Edit {
                    cell_kind: kind,
                    kind: EditKind::ReplaceEdge,
                    before: Some(victim),
                    after,
                }
            }
        };
        installed.push((pe.src.0, pe.dst.0));
        edits.push(edit);
    }
    let rewritten = CellGraph::new(kind, cell.m_intermediate(), working);
    let report = rewritten.validate();
    if !report.valid() {
        return Err(Error::InvalidSpec(report));
    }
    Ok(edits)
}

/// Plans how to make `spec`'s targeted cells comply with the given patterns,
/// using at most `budget` pattern edges per cell. Pattern edges are handled
/// in selection order: an exact match is a noop, a matching pair with a
/// different operation becomes an op change, and a missing edge replaces one
/// of the destination's incoming edges.
pub fn plan_modification(
    spec: &NetworkSpec,
    normal_pattern: Option<&CellPattern>,
    reduction_pattern: Option<&CellPattern>,
    target: ModTarget,
    budget: usize,
) -> Result<ModificationPlan> {
    if spec.space() != SearchSpace::Darts {
        return Err(Error::InvalidArgument(
            "modification requires a darts architecture".to_string(),
        ));
    }
    let normal = require_pattern(
        normal_pattern,
        CellKind::Normal,
        target.touches(CellKind::Normal),
    )?;
    let reduction = require_pattern(
        reduction_pattern,
        CellKind::Reduction,
        target.touches(CellKind::Reduction),
    )?;
    let mut edits = Vec::new();
    for (kind, pattern) in [
        (CellKind::Normal, normal),
        (CellKind::Reduction, reduction),
    ] {
        if let Some(pattern) = pattern {
            let cell = spec.cell(kind).expect("darts spec has both cells");
            edits.extend(plan_cell_edits(cell, pattern, budget)?);
        }
    }
    Ok(ModificationPlan {
        target,
        budget,
        spec_fingerprint: fingerprint(spec)?,
        edits,
    })
}

/// Applies a plan to the architecture it was made for, returning the
/// modified architecture.
pub fn apply_plan(spec: &NetworkSpec, plan: &ModificationPlan) -> Result<NetworkSpec> {
    let actual = fingerprint(spec)?;
    if actual != plan.spec_fingerprint {
        return Err(Error::PlanMismatch(format!(
            "plan was made for architecture {} but was applied to {}",
            plan.spec_fingerprint, actual
        )));
    }
    let mut next = spec.clone();
    for kind in [CellKind::Normal, CellKind::Reduction] {
        let cell_edits: Vec<&Edit> = plan.edits.iter().filter(|e| e.cell_kind == kind).collect();
        if cell_edits.is_empty() {
            continue;
        }
        let cell = next
            .cell(kind)
            .ok_or_else(|| Error::PlanMismatch(format!("architecture has no {kind} cell")))?;
        let mut working: Vec<OpEdge> = cell.edges().to_vec();
        for edit in cell_edits {
            match edit.kind {
                EditKind::Noop => {}
                EditKind::ChangeOp | EditKind::ReplaceEdge => {
                    let before = edit.before.ok_or_else(|| {
                        Error::PlanMismatch("edit replaces nothing yet names no edge".to_string())
                    })?;
                    let position =
                        working.iter().position(|e| *e == before).ok_or_else(|| {
                            Error::PlanMismatch(format!(
                                "edit expects edge {before} which the {kind} cell does not hold"
                            ))
                        })?;
                    working[position] = edit.after;
                }
            }
        }
        let m = cell.m_intermediate();
        next = next.with_cell(kind, CellGraph::new(kind, m, working))?;
    }
    Ok(next)
}

/// One entry of an edge-level architecture diff.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "change")]
pub enum DiffChange {
    Added { edge: OpEdge },
    Removed { edge: OpEdge },
    OpChanged { before: OpEdge, after: OpEdge },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffEntry {
    pub cell_kind: CellKind,
    #[serde(flatten)]
    pub change: DiffChange,
}

impl std::fmt::Display for DiffEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.change {
            DiffChange::Added { edge } => write!(f, "{} + {edge}", self.cell_kind),
            DiffChange::Removed { edge } => write!(f, "{} - {edge}", self.cell_kind),
            DiffChange::OpChanged { before, after } => write!(
                f,
                "{} ~ {}->{}: {} => {}",
                self.cell_kind,
                before.src.0,
                before.dst.0,
                before.op.code(),
                after.op.code()
            ),
        }
    }
}

/// Edge-level diff between two architectures of the same shape, listing
/// removals, additions, and operation changes per cell in canonical order.
pub fn diff_specs(a: &NetworkSpec, b: &NetworkSpec) -> Result<Vec<DiffEntry>> {
    if a.space() != b.space() || a.m_intermediate() != b.m_intermediate() {
        return Err(Error::InvalidArgument(
            "architectures differ in search space or intermediate node count".to_string(),
        ));
    }
    let mut entries = Vec::new();
    for &kind in a.cell_kinds() {
        let left = a.cell(kind).expect("kind listed for this space");
        let right = b.cell(kind).expect("same space");
        let mut pairs: Vec<(usize, usize)> = left
            .edges()
            .iter()
            .chain(right.edges())
            .map(|e| (e.dst.0, e.src.0))
            .collect();
        pairs.sort();
        pairs.dedup();
        for (dst, src) in pairs {
            let l = left.edges().iter().find(|e| e.src.0 == src && e.dst.0 == dst);
            let r = right.edges().iter().find(|e| e.src.0 == src && e.dst.0 == dst);
            let change = match (l, r) {
                (Some(le), Some(re)) if le.op == re.op => continue,
                (Some(le), Some(re)) => DiffChange::OpChanged {
                    before: *le,
                    after: *re,
                },
                (Some(le), None) => DiffChange::Removed { edge: *le },
                (None, Some(re)) => DiffChange::Added { edge: *re },
                (None, None) => unreachable!("pair drawn from one of the cells"),
            };
            entries.push(DiffEntry {
                cell_kind: kind,
                change,
            });
        }
    }
    Ok(entries)
}
