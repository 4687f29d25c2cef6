//! JSON documents for models, homomorphisms and relations.
//!
//! A model names its theory (a bundled theory name or a path to a theory
//! file, relative to the document), lists carrier labels per sort, and gives
//! each operation's defined entries as rows `[arg1, ..., argn, result]`.
//! Missing rows are undefined entries.
//!
//! ```json
//! {
//!   "theory": "z2vec",
//!   "carriers": { "v": ["0", "1"] },
//!   "tables": { "zero": [["0"]], "add": [["0","0","0"], ["0","1","1"], ["1","0","1"], ["1","1","0"]] }
//! }
//! ```
//!
//! Relations and homomorphisms refer to models by path or embed them.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fixtures;
use crate::model::{validate_model, Elem, FiniteModel, Homomorphism};
use crate::relation::Relation;
use crate::text::parse_theory;
use crate::theory::Theory;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub theory: String,
    pub carriers: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub tables: BTreeMap<String, Vec<Vec<String>>>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn json_err(path: &str, e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        col: e.column(),
        expected: format!("{path}: {e}"),
    }
}

/// Resolve a theory reference: a bundled name, or a path relative to `base`.
pub fn resolve_theory(reference: &str, base: &Path) -> Result<Arc<Theory>> {
    if let Some(t) = fixtures::by_name(reference) {
        return Ok(t);
    }
    let path = base.join(reference);
    Ok(Arc::new(parse_theory(&read(&path)?)?))
}

/// Load a theory file, or a bundled theory by name.
pub fn load_theory(path: &str) -> Result<Arc<Theory>> {
    resolve_theory(path, Path::new("."))
}

/// Build a model from its document. Entries are checked against the carriers
/// but the model is not validated against the equations.
pub fn model_from_doc(doc: &ModelDoc, theory: Arc<Theory>) -> Result<FiniteModel> {
    let mut carriers = Vec::new();
    for s in theory.sorts() {
        let c = doc.carriers.get(s.as_str()).cloned().unwrap_or_default();
        carriers.push(c);
    }
    if let Some(extra) = doc.carriers.keys().find(|k| !theory.has_sort(&k.as_str().into())) {
        return Err(Error::UnknownSort(extra.clone()));
    }
    let mut m = FiniteModel::new(theory.clone(), carriers)?;
    for (name, rows) in &doc.tables {
        let o = m.op_named(name)?;
        let op = &theory.ops()[o];
        let sorts: Vec<usize> = op
            .arg_sorts
            .iter()
            .chain(std::iter::once(&op.result_sort))
            .map(|s| theory.sort_index(s).unwrap())
            .collect();
        for row in rows {
            if row.len() != sorts.len() {
                return Err(Error::ArityMismatch {
                    path: Vec::new(),
                    op: name.clone(),
                    expected: sorts.len() - 1,
                    found: row.len().saturating_sub(1),
                });
            }
            let vals = row
                .iter()
                .zip(&sorts)
                .map(|(l, &s)| m.find(s, l).ok_or_else(|| Error::InvalidElement(format!("{l} in table of {name}"))))
                .collect::<Result<Vec<Elem>>>()?;
            let (args, v) = vals.split_at(vals.len() - 1);
            m.table_mut(o).set(args, Some(v[0]));
        }
    }
    Ok(m)
}

pub fn model_to_doc(m: &FiniteModel, theory_ref: &str) -> ModelDoc {
    let th = m.theory();
    let carriers = th.sorts().iter().enumerate().map(|(s, sort)| (sort.to_string(), m.carriers()[s].clone())).collect();
    let mut tables = BTreeMap::new();
    for (o, op) in th.ops().iter().enumerate() {
        let sorts: Vec<usize> = op.arg_sorts.iter().map(|s| th.sort_index(s).unwrap()).collect();
        let rs = th.sort_index(&op.result_sort).unwrap();
        let rows: Vec<Vec<String>> = m
            .table(o)
            .defined()
            .map(|(args, v)| {
                args.iter()
                    .zip(&sorts)
                    .map(|(&a, &s)| m.label(s, a).to_string())
                    .chain(std::iter::once(m.label(rs, v).to_string()))
                    .collect()
            })
            .collect();
        tables.insert(op.name.clone(), rows);
    }
    ModelDoc {
        theory: theory_ref.to_string(),
        carriers,
        tables,
    }
}

fn model_from_value(v: &Value, base: &Path, origin: &str) -> Result<Arc<FiniteModel>> {
    match v {
        Value::String(p) => load_model(&base.join(p).to_string_lossy()),
        other => {
            let doc: ModelDoc = serde_json::from_value(other.clone()).map_err(|e| json_err(origin, e))?;
            let th = resolve_theory(&doc.theory, base)?;
            checked(model_from_doc(&doc, th)?)
        }
    }
}

fn checked(m: FiniteModel) -> Result<Arc<FiniteModel>> {
    let report = validate_model(&m);
    if let Some(v) = report.violations.first() {
        return Err(Error::Invalid(format!("model violates {}: {}", v.subject, v.rule)));
    }
    Ok(Arc::new(m))
}

fn base_of(path: &str) -> PathBuf {
    Path::new(path).parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Read and validate a model document.
pub fn load_model(path: &str) -> Result<Arc<FiniteModel>> {
    let text = read(Path::new(path))?;
    let doc: ModelDoc = serde_json::from_str(&text).map_err(|e| json_err(path, e))?;
    let th = resolve_theory(&doc.theory, &base_of(path))?;
    checked(model_from_doc(&doc, th)?)
}

/// Read a model document without checking its equations.
pub fn load_model_unvalidated(path: &str) -> Result<FiniteModel> {
    let text = read(Path::new(path))?;
    let doc: ModelDoc = serde_json::from_str(&text).map_err(|e| json_err(path, e))?;
    let th = resolve_theory(&doc.theory, &base_of(path))?;
    model_from_doc(&doc, th)
}

/// Pretty JSON with one carrier list or table row per line.
pub fn model_to_json(m: &FiniteModel, theory_ref: &str) -> String {
    let doc = model_to_doc(m, theory_ref);
    let mut out = format!("{{\n  \"theory\": {},\n  \"carriers\": {{", enc(&doc.theory));
    let carriers: Vec<String> = doc.carriers.iter().map(|(k, v)| format!("\n    {}: {}", enc(k), enc(v))).collect();
    out.push_str(&carriers.join(","));
    out.push_str("\n  },\n  \"tables\": {");
    let tables: Vec<String> = doc
        .tables
        .iter()
        .map(|(k, rows)| {
            if rows.is_empty() {
                return format!("\n    {}: []", enc(k));
            }
            let rows: Vec<String> = rows.iter().map(|r| format!("\n      {}", enc(r))).collect();
            format!("\n    {}: [{}\n    ]", enc(k), rows.join(","))
        })
        .collect();
    out.push_str(&tables.join(","));
    out.push_str("\n  }\n}\n");
    out
}

/// Compact JSON with a space after each comma between items.
fn enc<T: Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string(v).expect("serialisable").replace("\",\"", "\", \"")
}

#[derive(Deserialize)]
struct RelationDoc {
    left: Value,
    right: Value,
    pairs: BTreeMap<String, Vec<(String, String)>>,
}

/// Read a relation document; the pairs must be closed.
pub fn load_relation(path: &str) -> Result<Relation> {
    let text = read(Path::new(path))?;
    relation_from_str(&text, &base_of(path), path)
}

pub fn relation_from_str(text: &str, base: &Path, origin: &str) -> Result<Relation> {
    let doc: RelationDoc = serde_json::from_str(text).map_err(|e| json_err(origin, e))?;
    let left = model_from_value(&doc.left, base, origin)?;
    let right = if doc.right == doc.left { left.clone() } else { model_from_value(&doc.right, base, origin)? };
    let th = left.theory().clone();
    let mut pairs = vec![BTreeSet::new(); th.sorts().len()];
    for (sort, list) in &doc.pairs {
        let s = left.sort_named(sort)?;
        for (a, b) in list {
            let x = left.find(s, a).ok_or_else(|| Error::InvalidElement(format!("{a} in sort {sort}")))?;
            let y = right.find(s, b).ok_or_else(|| Error::InvalidElement(format!("{b} in sort {sort}")))?;
            pairs[s].insert((x, y));
        }
    }
    Relation::new(left, right, pairs)
}

#[derive(Deserialize)]
struct HomDoc {
    source: Value,
    target: Value,
    maps: BTreeMap<String, BTreeMap<String, String>>,
}

/// Read a homomorphism document; the maps must be total and compatible with
/// the operations.
pub fn load_hom(path: &str) -> Result<Homomorphism> {
    let text = read(Path::new(path))?;
    let base = base_of(path);
    let doc: HomDoc = serde_json::from_str(&text).map_err(|e| json_err(path, e))?;
    let source = model_from_value(&doc.source, &base, path)?;
    let target = model_from_value(&doc.target, &base, path)?;
    let th = source.theory().clone();
    let mut maps = Vec::new();
    for (s, sort) in th.sorts().iter().enumerate() {
        let table = doc.maps.get(sort.as_str());
        let mut m = Vec::new();
        for e in 0..source.size(s) as Elem {
            let l = source.label(s, e);
            let img = table
                .and_then(|t| t.get(l))
                .ok_or_else(|| Error::InvalidElement(format!("no image for {l} in sort {sort}")))?;
            m.push(target.find(s, img).ok_or_else(|| Error::InvalidElement(format!("{img} in sort {sort}")))?);
        }
        maps.push(m);
    }
    Homomorphism::new(source, target, maps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_document_round_trips() {
        let m = crate::maltsev::z2_space(&fixtures::z2_vector_spaces(), 2);
        let doc = model_to_doc(&m, "z2vec");
        let back = model_from_doc(&doc, fixtures::z2_vector_spaces()).unwrap();
        assert_eq!(&back, m.as_ref());
        let text = model_to_json(&m, "z2vec");
        let again: ModelDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(again, doc);
    }

    #[test]
    fn inline_relation() {
        let text = r#"{
            "left": {"theory": "gamma0", "carriers": {"star": ["1", "2"]}},
            "right": {"theory": "gamma0", "carriers": {"star": ["1", "2"]}},
            "pairs": {"star": [["1","1"], ["1","2"], ["2","2"]]}
        }"#;
        let r = relation_from_str(text, Path::new("."), "inline").unwrap();
        assert_eq!(r.len(), 3);
        assert!(!r.is_difunctional());
    }

    #[test]
    fn bad_label_is_reported() {
        let doc = ModelDoc {
            theory: "z2vec".into(),
            carriers: [("v".to_string(), vec!["0".to_string()])].into(),
            tables: [("zero".to_string(), vec![vec!["7".to_string()]])].into(),
        };
        assert!(matches!(model_from_doc(&doc, fixtures::z2_vector_spaces()), Err(Error::InvalidElement(_))));
    }
}
