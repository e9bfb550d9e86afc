//! The object-type catalog: 125 household types with default affordances,
//! salient materials, mass/size ranges, and generator role tags.

use std::collections::HashMap;

use serde::Deserialize;

use crate::error::WorldError;

#[derive(Debug, Clone, Deserialize)]
pub struct ObjectTypeSpec {
    pub name: String,
    /// Boolean schema attributes that default to true for this type
    /// (`breakable`, `pickupable`, `receptacle`, ...).
    pub affordances: Vec<String>,
    /// Salient material suffixes (`Glass`, `Metal`, ...).
    pub materials: Vec<String>,
    pub mass_kg: [f64; 2],
    pub size_m3: [f64; 2],
    /// Role tags consumed by the trajectory generators
    /// (`food`, `vessel`, `sink`, `heat_source`, ...).
    #[serde(default)]
    pub roles: Vec<String>,
}

impl ObjectTypeSpec {
    pub fn has_affordance(&self, attr: &str) -> bool {
        self.affordances.iter().any(|a| a == attr)
    }

    pub fn has_role(&self, role: &str) -> bool {
        self.roles.iter().any(|r| r == role)
    }
}

#[derive(Debug, Deserialize)]
struct RawCatalog {
    schema_version: u32,
    object_types: Vec<ObjectTypeSpec>,
}

#[derive(Debug)]
pub struct Catalog {
    pub schema_version: u32,
    types: Vec<ObjectTypeSpec>,
    by_name: HashMap<String, usize>,
}

impl Catalog {
    pub fn from_json(json: &str) -> Result<Self, WorldError> {
        let raw: RawCatalog = serde_json::from_str(json)
            .map_err(|e| WorldError::BadData(format!("catalog json: {e}")))?;
        let mut by_name = HashMap::with_capacity(raw.object_types.len());
        for (i, t) in raw.object_types.iter().enumerate() {
            if by_name.insert(t.name.clone(), i).is_some() {
                return Err(WorldError::BadData(format!("duplicate type {}", t.name)));
            }
        }
        Ok(Self {
            schema_version: raw.schema_version,
            types: raw.object_types,
            by_name,
        })
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn type_names(&self) -> impl Iterator<Item = &str> {
        self.types.iter().map(|t| t.name.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = &ObjectTypeSpec> {
        self.types.iter()
    }

    pub fn get(&self, name: &str) -> Result<&ObjectTypeSpec, WorldError> {
        self.by_name
            .get(name)
            .map(|&i| &self.types[i])
            .ok_or_else(|| WorldError::UnknownObjectType(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    /// All type names carrying a role tag, in catalog order.
    pub fn with_role(&self, role: &str) -> Vec<&ObjectTypeSpec> {
        self.types.iter().filter(|t| t.has_role(role)).collect()
    }
}
