//! Genotype documents: the JSON interchange format, the legacy DARTS
//! tuple-string input format, and canonical serialization/fingerprints.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cell::{CellGraph, CellKind, NetworkSpec, OpEdge};
use crate::error::{Error, Result};
use crate::space::{Op, SearchSpace};

const DEFAULT_N_CELLS: usize = 5;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenotypeDoc {
    search_space: String,
    m_intermediate: usize,
    #[serde(default = "default_n_cells")]
    n_cells: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normal: Option<Vec<EdgeDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reduction: Option<Vec<EdgeDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cell: Option<Vec<EdgeDoc>>,
}

fn default_n_cells() -> usize {
    DEFAULT_N_CELLS
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    src: usize,
    dst: usize,
    op: String,
}

/// Parses a genotype document: JSON if it starts with `{`, otherwise the
/// legacy DARTS tuple-string. The returned spec always passes validation.
pub fn parse_genotype(text: &str) -> Result<NetworkSpec> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_legacy(text)
    }
}

/// Serializes a spec to its canonical one-line JSON document.
pub fn serialize_genotype(spec: &NetworkSpec) -> Result<String> {
    let report = spec.validate();
    if !report.valid() {
        return Err(Error::InvalidSpec(report));
    }
    let edge_docs = |cell: &CellGraph| -> Vec<EdgeDoc> {
        cell.edges()
            .iter()
            .map(|e| EdgeDoc {
                src: e.src.0,
                dst: e.dst.0,
                op: e.op.code().to_string(),
            })
            .collect()
    };
    let doc = GenotypeDoc {
        search_space: spec.space().id().to_string(),
        m_intermediate: spec.m_intermediate(),
        n_cells: spec.n_cells(),
        normal: spec.cell(CellKind::Normal).map(edge_docs),
        reduction: spec.cell(CellKind::Reduction).map(edge_docs),
        cell: spec.cell(CellKind::Nb201).map(edge_docs),
    };
    Ok(serde_json::to_string(&doc)?)
}

/// SHA-256 of the canonical JSON document, as a lowercase hex string.
pub fn fingerprint(spec: &NetworkSpec) -> Result<String> {
    let canonical = serialize_genotype(spec)?;
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn parse_json(text: &str) -> Result<NetworkSpec> {
    let doc: GenotypeDoc = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let space = SearchSpace::from_id(&doc.search_space)?;
    let build = |kind: CellKind, edges: &[EdgeDoc]| -> Result<CellGraph> {
        let edges = edges
            .iter()
            .map(|e| Ok(OpEdge::new(e.src, e.dst, Op::parse(&e.op)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(CellGraph::new(kind, doc.m_intermediate, edges))
    };
    match space {
        SearchSpace::Darts => {
            if doc.cell.is_some() {
                return Err(Error::Semantic(
                    "darts genotype must not carry a `cell` list".to_string(),
                ));
            }
            let (Some(normal), Some(reduction)) = (&doc.normal, &doc.reduction) else {
                return Err(Error::Semantic(
                    "darts genotype requires `normal` and `reduction` edge lists".to_string(),
                ));
            };
            NetworkSpec::darts(
                build(CellKind::Normal, normal)?,
                build(CellKind::Reduction, reduction)?,
                doc.n_cells,
            )
        }
        SearchSpace::Nb201 => {
            if doc.normal.is_some() || doc.reduction.is_some() {
                return Err(Error::Semantic(
                    "nb201 genotype carries a single `cell` list".to_string(),
                ));
            }
            let Some(cell) = &doc.cell else {
                return Err(Error::Semantic(
                    "nb201 genotype requires a `cell` edge list".to_string(),
                ));
            };
            NetworkSpec::nb201(build(CellKind::Nb201, cell)?, doc.n_cells)
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut column = 1;
    for (i, ch) in text.char_indices() {
        if i >= offset {
            break;
        }
        if ch == '\n' {
            line += 1;
            column = 1;
        } else {
            column += 1;
        }
    }
    (line, column)
}

fn syntax_error(text: &str, offset: usize, message: &str) -> Error {
    let (line, column) = line_col(text, offset);
    Error::Syntax {
        line,
        column,
        message: message.to_string(),
    }
}

/// Legacy tuple-string: `normal=[('sep_conv_3x3',0),...]` plus a
/// `reduction=[...]` (or `reduce=[...]`) section. Tuple t of a section is the
/// edge (src=j, dst=2+t/2); `*_concat` sections and any wrapper text are
/// ignored. N is not expressible here and defaults to 5.
fn parse_legacy(text: &str) -> Result<NetworkSpec> {
    let normal = legacy_section(text, &["normal"])?;
    let reduction = legacy_section(text, &["reduction", "reduce"])?;
    let cell = |kind: CellKind, tuples: &[(String, usize, usize)]| -> Result<CellGraph> {
        if tuples.is_empty() || !tuples.len().is_multiple_of(2) {
            return Err(Error::Semantic(format!(
                "{kind} section must hold an even, positive number of tuples (found {})",
                tuples.len()
            )));
        }
        let edges = tuples
            .iter()
            .enumerate()
            .map(|(t, (op, src, offset))| {
                let op = Op::parse(op).map_err(|_| {
                    syntax_error(text, *offset, &format!("unknown operation `{op}`"))
                })?;
                Ok(OpEdge::new(*src, 2 + t / 2, op))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CellGraph::new(kind, tuples.len() / 2, edges))
    };
    NetworkSpec::darts(
        cell(CellKind::Normal, &normal)?,
        cell(CellKind::Reduction, &reduction)?,
        DEFAULT_N_CELLS,
    )
}

/// Finds `name=[...]` for one of the given names and parses its tuples as
/// (op-name, source-index, byte-offset) triples.
fn legacy_section(text: &str, names: &[&str]) -> Result<Vec<(String, usize, usize)>> {
    for name in names {
        if let Some(start) = find_section(text, name) {
            return parse_tuple_list(text, start);
        }
    }
    Err(Error::Semantic(format!(
        "missing `{}=[...]` section",
        names[0]
    )))
}

/// Byte offset just past `name=` where the name is a whole identifier.
fn find_section(text: &str, name: &str) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut from = 0;
    while let Some(pos) = text[from..].find(name) {
        let at = from + pos;
        let before_ok = at == 0 || !is_ident_byte(bytes[at - 1]);
        let mut after = at + name.len();
        while after < bytes.len() && bytes[after].is_ascii_whitespace() {
            after += 1;
        }
        if before_ok && after < bytes.len() && bytes[after] == b'=' {
            return Some(after + 1);
        }
        from = at + name.len();
    }
    None
}

fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

fn parse_tuple_list(text: &str, from: usize) -> Result<Vec<(String, usize, usize)>> {
    let bytes = text.as_bytes();
    let mut at = skip_ws(bytes, from);
    if at >= bytes.len() || bytes[at] != b'[' {
        return Err(syntax_error(text, at, "expected `[` to open a tuple list"));
    }
    at += 1;
    let mut tuples = Vec::new();
    loop {
        at = skip_ws(bytes, at);
        match bytes.get(at) {
            Some(b']') => return Ok(tuples),
            Some(b',') => {
                at += 1;
                continue;
            }
            Some(b'(') => {
                let (tuple, next) = parse_tuple(text, at + 1)?;
                tuples.push(tuple);
                at = next;
            }
            _ => return Err(syntax_error(text, at, "expected `(`, `,`, or `]` in tuple list")),
        }
    }
}

/// Parses `'op', j)` starting just past the opening parenthesis.
fn parse_tuple(text: &str, from: usize) -> Result<((String, usize, usize), usize)> {
    let bytes = text.as_bytes();
    let mut at = skip_ws(bytes, from);
    let quote = match bytes.get(at) {
        Some(q @ (b'\'' | b'"')) => *q,
        _ => return Err(syntax_error(text, at, "expected a quoted operation name")),
    };
    let name_at = at + 1;
    let Some(name_len) = text[name_at..].find(quote as char) else {
        return Err(syntax_error(text, at, "unterminated operation name"));
    };
    let name = text[name_at..name_at + name_len].to_string();
    at = skip_ws(bytes, name_at + name_len + 1);
    if bytes.get(at) != Some(&b',') {
        return Err(syntax_error(text, at, "expected `,` after the operation name"));
    }
    at = skip_ws(bytes, at + 1);
    let digits_at = at;
    while at < bytes.len() && bytes[at].is_ascii_digit() {
        at += 1;
    }
    if at == digits_at {
        return Err(syntax_error(text, at, "expected a source node index"));
    }
    let src: usize = text[digits_at..at]
        .parse()
        .map_err(|_| syntax_error(text, digits_at, "source node index out of range"))?;
    at = skip_ws(bytes, at);
    if bytes.get(at) != Some(&b')') {
        return Err(syntax_error(text, at, "expected `)` to close the tuple"));
    }
    Ok(((name, src, name_at), at + 1))
}

fn skip_ws(bytes: &[u8], mut at: usize) -> usize {
    while at < bytes.len() && bytes[at].is_ascii_whitespace() {
        at += 1;
    }
    at
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Op;

    fn sample_spec() -> NetworkSpec {
        let edges = |ops: [Op; 8]| -> Vec<OpEdge> {
            let srcs = [(0, 1), (1, 2), (0, 3), (2, 4)];
            ops.chunks(2)
                .zip(srcs)
                .enumerate()
                .flat_map(|(i, (pair, (a, b)))| {
                    [OpEdge::new(a, i + 2, pair[0]), OpEdge::new(b, i + 2, pair[1])]
                })
                .collect()
        };
        let normal = CellGraph::new(
            CellKind::Normal,
            4,
            edges([
                Op::SepConv3x3,
                Op::SepConv3x3,
                Op::SkipConnect,
                Op::SepConv5x5,
                Op::MaxPool3x3,
                Op::DilConv3x3,
                Op::AvgPool3x3,
                Op::SkipConnect,
            ]),
        );
        let reduction = CellGraph::new(
            CellKind::Reduction,
            4,
            edges([
                Op::MaxPool3x3,
                Op::MaxPool3x3,
                Op::SkipConnect,
                Op::AvgPool3x3,
                Op::SepConv3x3,
                Op::SkipConnect,
                Op::DilConv5x5,
                Op::SepConv5x5,
            ]),
        );
        NetworkSpec::darts(normal, reduction, 5).unwrap()
    }

    #[test]
    fn json_round_trip_is_identity() {
        let spec = sample_spec();
        let text = serialize_genotype(&spec).unwrap();
        assert!(text.contains("\"n_cells\":5"));
        let parsed = parse_genotype(&text).unwrap();
        assert_eq!(parsed, spec);
        assert_eq!(serialize_genotype(&parsed).unwrap(), text);
    }

    #[test]
    fn edge_order_does_not_affect_output() {
        let spec = sample_spec();
        let text = serialize_genotype(&spec).unwrap();
        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        doc["normal"].as_array_mut().unwrap().reverse();
        let reparsed = parse_genotype(&doc.to_string()).unwrap();
        assert_eq!(serialize_genotype(&reparsed).unwrap(), text);
    }

    #[test]
    fn legacy_string_matches_equivalent_json() {
        let legacy = "normal=[('sep_conv_3x3',0),('sep_conv_3x3',1),('skip_connect',1),\
                      ('sep_conv_5x5',2),('max_pool_3x3',0),('dil_conv_3x3',3),\
                      ('avg_pool_3x3',2),('skip_connect',4)],\n\
                      reduce=[('max_pool_3x3',0),('max_pool_3x3',1),('skip_connect',1),\
                      ('avg_pool_3x3',2),('sep_conv_3x3',0),('skip_connect',3),\
                      ('dil_conv_5x5',2),('sep_conv_5x5',4)]";
        let spec = parse_genotype(legacy).unwrap();
        let json = serialize_genotype(&spec).unwrap();
        let reparsed = parse_genotype(&json).unwrap();
        assert_eq!(reparsed, spec);
        assert_eq!(spec.n_cells(), 5);
        assert_eq!(spec.m_intermediate(), 4);
    }

    #[test]
    fn unknown_operation_is_rejected() {
        let spec = sample_spec();
        let text = serialize_genotype(&spec).unwrap().replace("\"s3\"", "\"conv_7x7\"");
        match parse_genotype(&text) {
            Err(Error::UnknownOperation(op)) => assert_eq!(op, "conv_7x7"),
            other => panic!("expected unknown-operation error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_genotype("{\"search_space\": \"darts\",\n  bad").unwrap_err();
        match err {
            Error::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
        let err = parse_genotype("normal=[('sep_conv_3x3' 0)]").unwrap_err();
        assert!(matches!(err, Error::Syntax { .. }));
    }

    #[test]
    fn fingerprint_is_stable_and_distinct() {
        let spec = sample_spec();
        let a = fingerprint(&spec).unwrap();
        assert_eq!(a.len(), 64);
        assert_eq!(a, fingerprint(&spec).unwrap());

        let normal = spec.cell(CellKind::Normal).unwrap();
        let mut edges = normal.edges().to_vec();
        edges[0].op = Op::DilConv5x5;
        let other = spec
            .with_cell(CellKind::Normal, normal.with_edges(edges))
            .unwrap();
        assert_ne!(a, fingerprint(&other).unwrap());
    }
}
