//! The per-object attribute schema: names, kinds, vocabularies, bin edges.
//!
//! The schema is loaded from a versioned data file; object-name attributes
//! get their vocabulary from the catalog (every object type plus `None`).

use std::collections::HashMap;

use serde::Deserialize;

use super::catalog::Catalog;
use crate::error::WorldError;

pub const NONE_TOKEN: &str = "None";
pub const BOOL_FALSE: &str = "false";
pub const BOOL_TRUE: &str = "true";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrKind {
    /// Vocabulary is one token per object type, along with `None`.
    ObjectName,
    Categorical,
    Boolean,
    BinnedContinuous,
}

#[derive(Debug, Clone)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttrKind,
    pub vocab: Vec<String>,
    /// Ascending interior bin edges; `labels.len() == edges.len() + 1`.
    pub bin_edges: Option<Vec<f64>>,
    pub unit: Option<String>,
    lower_index: HashMap<String, u16>,
}

impl AttributeSpec {
    fn build(
        name: String,
        kind: AttrKind,
        vocab: Vec<String>,
        bin_edges: Option<Vec<f64>>,
        unit: Option<String>,
    ) -> Result<Self, WorldError> {
        let mut lower_index = HashMap::with_capacity(vocab.len());
        for (i, tok) in vocab.iter().enumerate() {
            if lower_index.insert(tok.to_lowercase(), i as u16).is_some() {
                return Err(WorldError::BadData(format!(
                    "attribute {name} has duplicate token {tok:?}"
                )));
            }
        }
        if let Some(edges) = &bin_edges {
            if edges.len() + 1 != vocab.len() {
                return Err(WorldError::BadData(format!(
                    "attribute {name}: {} edges for {} labels",
                    edges.len(),
                    vocab.len()
                )));
            }
            if edges.windows(2).any(|w| w[0] >= w[1]) {
                return Err(WorldError::BadData(format!(
                    "attribute {name}: bin edges not ascending"
                )));
            }
        }
        Ok(Self {
            name,
            kind,
            vocab,
            bin_edges,
            unit,
            lower_index,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn token(&self, index: u16) -> &str {
        &self.vocab[index as usize]
    }

    /// Exact-token lookup (canonical casing).
    pub fn index_of(&self, token: &str) -> Option<u16> {
        self.vocab
            .iter()
            .position(|t| t == token)
            .map(|i| i as u16)
    }

    /// Case-insensitive lookup, used by the text codec.
    pub fn index_of_lower(&self, lower: &str) -> Option<u16> {
        self.lower_index.get(lower).copied()
    }
}

/// Maps a continuous value to its bin token: half-open intervals
/// `[edge_i, edge_{i+1})`, with values at or above the last edge landing in
/// the top bin.
pub fn bin_continuous(value: f64, attr: &AttributeSpec) -> Result<&str, WorldError> {
    let edges = attr
        .bin_edges
        .as_ref()
        .ok_or_else(|| WorldError::NotBinned(attr.name.clone()))?;
    if value < 0.0 || !value.is_finite() {
        return Err(WorldError::NegativeBinValue {
            attr: attr.name.clone(),
            value,
        });
    }
    let idx = edges.partition_point(|&e| e <= value);
    Ok(&attr.vocab[idx])
}

#[derive(Debug, Deserialize)]
struct RawAttribute {
    name: String,
    kind: String,
    #[serde(default)]
    values: Option<Vec<String>>,
    #[serde(default)]
    edges: Option<Vec<f64>>,
    #[serde(default)]
    labels: Option<Vec<String>>,
    #[serde(default)]
    unit: Option<String>,
}

#[derive(Debug, Deserialize)]
struct RawSchema {
    schema_version: u32,
    attributes: Vec<RawAttribute>,
}

#[derive(Debug)]
pub struct AttributeSchema {
    pub schema_version: u32,
    attrs: Vec<AttributeSpec>,
    by_name: HashMap<String, usize>,
}

impl AttributeSchema {
    pub fn from_json(schema_json: &str, catalog: &Catalog) -> Result<Self, WorldError> {
        let raw: RawSchema = serde_json::from_str(schema_json)
            .map_err(|e| WorldError::BadData(format!("schema json: {e}")))?;
        let name_vocab: Vec<String> = std::iter::once(NONE_TOKEN.to_string())
            .chain(catalog.type_names().map(str::to_string))
            .collect();
        let mut attrs = Vec::with_capacity(raw.attributes.len());
        for a in raw.attributes {
            let spec = match a.kind.as_str() {
                "object_name" => AttributeSpec::build(
                    a.name,
                    AttrKind::ObjectName,
                    name_vocab.clone(),
                    None,
                    None,
                )?,
                "categorical" => {
                    let values = a.values.ok_or_else(|| {
                        WorldError::BadData(format!("categorical {} missing values", a.name))
                    })?;
                    AttributeSpec::build(a.name, AttrKind::Categorical, values, None, None)?
                }
                "boolean" => AttributeSpec::build(
                    a.name,
                    AttrKind::Boolean,
                    vec![BOOL_FALSE.to_string(), BOOL_TRUE.to_string()],
                    None,
                    None,
                )?,
                "binned" => {
                    let labels = a.labels.ok_or_else(|| {
                        WorldError::BadData(format!("binned {} missing labels", a.name))
                    })?;
                    let edges = a.edges.ok_or_else(|| {
                        WorldError::BadData(format!("binned {} missing edges", a.name))
                    })?;
                    AttributeSpec::build(
                        a.name,
                        AttrKind::BinnedContinuous,
                        labels,
                        Some(edges),
                        a.unit,
                    )?
                }
                other => {
                    return Err(WorldError::BadData(format!(
                        "unknown attribute kind {other:?}"
                    )))
                }
            };
            attrs.push(spec);
        }
        let mut by_name = HashMap::with_capacity(attrs.len());
        for (i, spec) in attrs.iter().enumerate() {
            if by_name.insert(spec.name.clone(), i).is_some() {
                return Err(WorldError::BadData(format!(
                    "duplicate attribute {}",
                    spec.name
                )));
            }
        }
        Ok(Self {
            schema_version: raw.schema_version,
            attrs,
            by_name,
        })
    }

    pub fn len(&self) -> usize {
        self.attrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attrs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &AttributeSpec> {
        self.attrs.iter()
    }

    pub fn spec(&self, index: usize) -> &AttributeSpec {
        &self.attrs[index]
    }

    pub fn index_of(&self, name: &str) -> Result<usize, WorldError> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| WorldError::UnknownAttribute(name.to_string()))
    }

    pub fn get(&self, name: &str) -> Result<&AttributeSpec, WorldError> {
        Ok(&self.attrs[self.index_of(name)?])
    }

    /// Autoregressive decoding order: object name first, then the remaining
    /// attributes by descending vocabulary size, ties broken by schema order.
    pub fn decode_order(&self) -> Vec<usize> {
        let name_idx = self.index_of("objectName").expect("objectName present");
        let mut rest: Vec<usize> = (0..self.attrs.len()).filter(|&i| i != name_idx).collect();
        rest.sort_by_key(|&i| (std::cmp::Reverse(self.attrs[i].vocab_size()), i));
        std::iter::once(name_idx).chain(rest).collect()
    }
}
