//! Canonical JSON files for graphs, ledgers and drawings. Every serialized
//! struct declares its fields in alphabetical order, so compact output has
//! sorted keys and identical inputs give identical bytes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::embedding::Drawing;
use crate::error::{CarpetError, Result};
use crate::graph::{Color, Edge, MetricGraph, Provenance, Vertex, VertexType};
use crate::rational::{HValue, Rational, RationalRepr};
use crate::substitution::{IdentificationLedger, PointLabel, Rule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub color: Color,
    pub coord: [i64; 2],
    pub h: RationalRepr,
    pub id: usize,
    pub vtype: VertexType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub head: usize,
    pub id: usize,
    pub measure: RationalRepr,
    pub tail: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub edges: Vec<EdgeRecord>,
    pub l: RationalRepr,
    pub level: u32,
    pub provenance: Provenance,
    pub s: RationalRepr,
    pub vertices: Vec<VertexRecord>,
}

impl From<&MetricGraph> for GraphFile {
    fn from(g: &MetricGraph) -> Self {
        GraphFile {
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeRecord { head: e.head, id: e.id, measure: (&e.measure).into(), tail: e.tail })
                .collect(),
            l: (&g.l).into(),
            level: g.level,
            provenance: g.provenance.clone(),
            s: (&g.s).into(),
            vertices: g
                .vertices()
                .iter()
                .map(|v| VertexRecord { color: v.color, coord: v.coord, h: v.h.value().into(), id: v.id, vtype: v.vtype })
                .collect(),
        }
    }
}

impl TryFrom<&GraphFile> for MetricGraph {
    type Error = CarpetError;

    fn try_from(f: &GraphFile) -> Result<MetricGraph> {
        let vertices = f
            .vertices
            .iter()
            .map(|v| {
                Ok(Vertex {
                    id: v.id,
                    coord: v.coord,
                    h: HValue::new(Rational::try_from(&v.h)?),
                    vtype: v.vtype,
                    color: v.color,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let edges = f
            .edges
            .iter()
            .map(|e| Ok(Edge { id: e.id, tail: e.tail, head: e.head, measure: Rational::try_from(&e.measure)? }))
            .collect::<Result<Vec<_>>>()?;
        MetricGraph::new(
            f.level,
            Rational::try_from(&f.s)?,
            Rational::try_from(&f.l)?,
            vertices,
            edges,
            f.provenance.clone(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerFile {
    /// Unquotiented vertex of each point key.
    pub bar_vertex: Vec<u32>,
    pub bar_vertex_count: usize,
    #[serde(rename = "classes_I")]
    pub classes_i: Vec<Vec<PointLabel>>,
    #[serde(rename = "classes_Q")]
    pub classes_q: Vec<Vec<PointLabel>>,
    pub copies: usize,
    pub parent_edges: usize,
    pub parent_level: u32,
    pub parent_vertices: usize,
    pub q_stars: Vec<usize>,
    /// Next-level vertex of each unquotiented vertex.
    pub quotient: Vec<u32>,
    pub rule: String,
    pub subdivision: usize,
}

impl From<&IdentificationLedger> for LedgerFile {
    fn from(l: &IdentificationLedger) -> Self {
        LedgerFile {
            bar_vertex: l.bar_vertex.clone(),
            bar_vertex_count: l.bar_vertex_count,
            classes_i: l.classes_i.clone(),
            classes_q: l.classes_q.clone(),
            copies: l.copies,
            parent_edges: l.parent_edges,
            parent_level: l.parent_level,
            parent_vertices: l.parent_vertices,
            q_stars: l.q_stars.clone(),
            quotient: l.quotient.clone(),
            rule: l.rule.to_string(),
            subdivision: l.subdivision,
        }
    }
}

impl TryFrom<&LedgerFile> for IdentificationLedger {
    type Error = CarpetError;

    fn try_from(f: &LedgerFile) -> Result<IdentificationLedger> {
        let rule: Rule = f.rule.parse()?;
        if rule.copies() as usize != f.copies || rule.subdivision() as usize != f.subdivision {
            return Err(CarpetError::Format(format!("ledger sizes do not match rule {rule}")));
        }
        let ledger = IdentificationLedger {
            rule,
            parent_level: f.parent_level,
            copies: f.copies,
            subdivision: f.subdivision,
            parent_vertices: f.parent_vertices,
            parent_edges: f.parent_edges,
            classes_i: f.classes_i.clone(),
            classes_q: f.classes_q.clone(),
            q_stars: f.q_stars.clone(),
            bar_vertex: f.bar_vertex.clone(),
            bar_vertex_count: f.bar_vertex_count,
            quotient: f.quotient.clone(),
        };
        if ledger.bar_vertex.len() != ledger.key_count()
            || ledger.quotient.len() != ledger.bar_vertex_count
            || ledger.q_stars.len() != ledger.classes_q.len()
        {
            return Err(CarpetError::Format("ledger map lengths are inconsistent".to_string()));
        }
        Ok(ledger)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawingFile {
    pub l: RationalRepr,
    pub level: u32,
    pub points: Vec<[i64; 2]>,
    pub segments: Vec<[usize; 2]>,
}

impl From<&Drawing> for DrawingFile {
    fn from(d: &Drawing) -> Self {
        DrawingFile { l: (&d.l).into(), level: d.level, points: d.points.clone(), segments: d.segments.clone() }
    }
}

impl TryFrom<&DrawingFile> for Drawing {
    type Error = CarpetError;

    fn try_from(f: &DrawingFile) -> Result<Drawing> {
        if f.segments.iter().flatten().any(|&p| p >= f.points.len()) {
            return Err(CarpetError::Format("segment names an unknown point".to_string()));
        }
        Ok(Drawing { level: f.level, l: Rational::try_from(&f.l)?, points: f.points.clone(), segments: f.segments.clone() })
    }
}

/// Compact JSON plus a trailing newline.
pub fn to_canonical_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec(value)?;
    out.push(b'\n');
    Ok(out)
}

/// Writes canonical JSON and returns the hex SHA-256 of the bytes written.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<String> {
    let bytes = to_canonical_bytes(value)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(sha256_hex(&bytes))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_slice(&std::fs::read(path)?)?)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    std::io::copy(&mut BufReader::new(File::open(path)?), &mut hasher)?;
    Ok(hex::encode(hasher.finalize()))
}

pub fn write_graph(path: &Path, g: &MetricGraph) -> Result<String> {
    write_json(path, &GraphFile::from(g))
}

pub fn read_graph(path: &Path) -> Result<MetricGraph> {
    MetricGraph::try_from(&read_json::<GraphFile>(path)?)
}

pub fn write_ledger(path: &Path, l: &IdentificationLedger) -> Result<String> {
    write_json(path, &LedgerFile::from(l))
}

pub fn read_ledger(path: &Path) -> Result<IdentificationLedger> {
    IdentificationLedger::try_from(&read_json::<LedgerFile>(path)?)
}

pub fn write_drawing(path: &Path, d: &Drawing) -> Result<String> {
    write_json(path, &DrawingFile::from(d))
}

pub fn read_drawing(path: &Path) -> Result<Drawing> {
    Drawing::try_from(&read_json::<DrawingFile>(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_seed;
    use crate::substitution::apply_rule;

    fn key_order_in_text(text: &str) -> bool {
        // serde_json's default map sorts keys, so comparing the original text
        // with its re-encoding detects unsorted keys.
        let v: serde_json::Value = serde_json::from_str(text).unwrap();
        serde_json::to_string(&v).unwrap() == text.trim_end()
    }

    #[test]
    fn graph_round_trip_and_sorted_keys() {
        let step = apply_rule(&build_seed(), Rule::Basic).unwrap();
        let bytes = to_canonical_bytes(&GraphFile::from(&step.graph)).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(key_order_in_text(&text));
        let back: GraphFile = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(MetricGraph::try_from(&back).unwrap(), step.graph);
        assert_eq!(to_canonical_bytes(&back).unwrap(), bytes);
    }

    #[test]
    fn ledger_and_drawing_round_trip() {
        let step = apply_rule(&build_seed(), Rule::C(1)).unwrap();
        let lf = LedgerFile::from(&step.ledger);
        let text = String::from_utf8(to_canonical_bytes(&lf).unwrap()).unwrap();
        assert!(key_order_in_text(&text));
        let back = IdentificationLedger::try_from(&serde_json::from_str::<LedgerFile>(&text).unwrap()).unwrap();
        assert_eq!(LedgerFile::from(&back), lf);
        let d = Drawing::from_graph(&step.graph);
        let df = DrawingFile::from(&d);
        assert!(key_order_in_text(&String::from_utf8(to_canonical_bytes(&df).unwrap()).unwrap()));
        assert_eq!(Drawing::try_from(&df).unwrap(), d);
    }

    #[test]
    fn big_rationals_are_decimal_strings() {
        let mut g = build_seed();
        g.s = Rational::new(1.into(), num_bigint::BigInt::from(2u8).pow(100));
        let text = String::from_utf8(to_canonical_bytes(&GraphFile::from(&g)).unwrap()).unwrap();
        assert!(text.contains("\"s\":{\"den\":\"1267650600228229401496703205376\",\"num\":\"1\"}"));
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let mut f = GraphFile::from(&build_seed());
        f.edges[0].measure.den = "0".to_string();
        assert!(MetricGraph::try_from(&f).is_err());
        let mut lf = LedgerFile::from(&apply_rule(&build_seed(), Rule::Basic).unwrap().ledger);
        lf.quotient.pop();
        assert!(IdentificationLedger::try_from(&lf).is_err());
    }
}
