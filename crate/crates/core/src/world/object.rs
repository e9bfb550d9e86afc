//! Object, action, world, and transition data model.
//!
//! Objects are complete assignments of every schema attribute, stored as
//! vocabulary indices. Worlds additionally track instance-level containment
//! and the (at most one) object held by the agent; the flat
//! `parentReceptacles` / `receptacleObjectIds` attributes are derived views
//! of that containment relation, truncated to a single token each.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::catalog::Catalog;
use super::schema::{bin_continuous, AttrKind, AttributeSchema, NONE_TOKEN};
use crate::error::WorldError;

/// Dynamic boolean attributes paired with the affordance that must hold for
/// them to be true.
pub const AFFORDANCE_IMPLICATIONS: &[(&str, &str)] = &[
    ("isBroken", "breakable"),
    ("isCooked", "cookable"),
    ("isDirty", "dirtyable"),
    ("isFilledWithLiquid", "canFillWithLiquid"),
    ("isOpen", "openable"),
    ("isSliced", "sliceable"),
    ("isPickedUp", "pickupable"),
    ("isToggled", "toggleable"),
    ("isUsedUp", "canBeUsedUp"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectState {
    pub instance_id: String,
    values: Vec<u16>,
}

impl ObjectState {
    /// Builds a catalog-default object: affordances and materials from the
    /// type spec, mass/size binned from the midpoint of the type range,
    /// room temperature, nothing held or contained.
    pub fn from_type(
        type_spec: &super::catalog::ObjectTypeSpec,
        schema: &AttributeSchema,
        instance_id: impl Into<String>,
    ) -> Result<Self, WorldError> {
        let mut values = vec![0u16; schema.len()];
        for (i, attr) in schema.iter().enumerate() {
            values[i] = match (attr.kind, attr.name.as_str()) {
                (AttrKind::ObjectName, "objectName") => attr
                    .index_of(&type_spec.name)
                    .ok_or_else(|| WorldError::UnknownObjectType(type_spec.name.clone()))?,
                (AttrKind::ObjectName, _) => 0, // None
                (AttrKind::Categorical, "ObjectTemperature") => {
                    attr.index_of("RoomTemp").expect("RoomTemp in vocab")
                }
                (AttrKind::Categorical, _) => 0,
                (AttrKind::BinnedContinuous, name) => {
                    let range = match name {
                        "mass" => type_spec.mass_kg,
                        "size" => type_spec.size_m3,
                        // Scene construction overrides distance; default to a
                        // mid-room bin.
                        "distance" => [1.0, 1.0],
                        _ => [0.0, 0.0],
                    };
                    let mid = 0.5 * (range[0] + range[1]);
                    let tok = bin_continuous(mid, attr)?;
                    attr.index_of(tok).expect("bin label in vocab")
                }
                (AttrKind::Boolean, name) => {
                    let truthy = if let Some(suffix) = name.strip_prefix("salientMaterials_") {
                        type_spec.materials.iter().any(|m| m == suffix)
                    } else {
                        type_spec.has_affordance(name)
                    };
                    truthy as u16
                }
            };
        }
        Ok(Self {
            instance_id: instance_id.into(),
            values,
        })
    }

    pub fn index(&self, attr_idx: usize) -> u16 {
        self.values[attr_idx]
    }

    pub fn set_index(&mut self, attr_idx: usize, value: u16) {
        self.values[attr_idx] = value;
    }

    pub fn indices(&self) -> &[u16] {
        &self.values
    }

    pub fn token<'s>(&self, schema: &'s AttributeSchema, attr: &str) -> Result<&'s str, WorldError> {
        let idx = schema.index_of(attr)?;
        Ok(schema.spec(idx).token(self.values[idx]))
    }

    pub fn set_token(
        &mut self,
        schema: &AttributeSchema,
        attr: &str,
        token: &str,
    ) -> Result<(), WorldError> {
        let idx = schema.index_of(attr)?;
        let v = schema.spec(idx).index_of(token).ok_or_else(|| {
            WorldError::UnknownToken {
                attr: attr.to_string(),
                token: token.to_string(),
            }
        })?;
        self.values[idx] = v;
        Ok(())
    }

    pub fn bool(&self, schema: &AttributeSchema, attr: &str) -> Result<bool, WorldError> {
        Ok(self.values[schema.index_of(attr)?] == 1)
    }

    pub fn set_bool(
        &mut self,
        schema: &AttributeSchema,
        attr: &str,
        value: bool,
    ) -> Result<(), WorldError> {
        self.values[schema.index_of(attr)?] = value as u16;
        Ok(())
    }

    pub fn type_name<'s>(&self, schema: &'s AttributeSchema) -> &'s str {
        let idx = schema.index_of("objectName").expect("objectName present");
        schema.spec(idx).token(self.values[idx])
    }

    /// Serializes as `{"id": ..., "attrs": {name: token, ...}}` with
    /// deterministic (alphabetical) key order.
    pub fn to_json(&self, schema: &AttributeSchema) -> serde_json::Value {
        let mut attrs = serde_json::Map::new();
        for (i, spec) in schema.iter().enumerate() {
            attrs.insert(
                spec.name.clone(),
                serde_json::Value::String(spec.token(self.values[i]).to_string()),
            );
        }
        serde_json::json!({ "id": self.instance_id, "attrs": attrs })
    }

    pub fn from_json(
        value: &serde_json::Value,
        schema: &AttributeSchema,
    ) -> Result<Self, WorldError> {
        let id = value
            .get("id")
            .and_then(|v| v.as_str())
            .ok_or_else(|| WorldError::BadData("object missing id".into()))?;
        let attrs = value
            .get("attrs")
            .and_then(|v| v.as_object())
            .ok_or_else(|| WorldError::BadData("object missing attrs".into()))?;
        let mut values = vec![0u16; schema.len()];
        for (i, spec) in schema.iter().enumerate() {
            let tok = attrs
                .get(&spec.name)
                .and_then(|v| v.as_str())
                .ok_or_else(|| WorldError::UnknownAttribute(spec.name.clone()))?;
            values[i] = spec.index_of(tok).ok_or_else(|| WorldError::UnknownToken {
                attr: spec.name.clone(),
                token: tok.to_string(),
            })?;
        }
        Ok(Self {
            instance_id: id.to_string(),
            values,
        })
    }
}

/// Exactly the attributes whose values differ between two snapshots of the
/// same instance.
pub fn diff_objects(
    pre: &ObjectState,
    post: &ObjectState,
    schema: &AttributeSchema,
) -> Result<BTreeSet<String>, WorldError> {
    if pre.instance_id != post.instance_id {
        return Err(WorldError::InstanceMismatch(
            pre.instance_id.clone(),
            post.instance_id.clone(),
        ));
    }
    let mut out = BTreeSet::new();
    for (i, spec) in schema.iter().enumerate() {
        if pre.values[i] != post.values[i] {
            out.insert(spec.name.clone());
        }
    }
    Ok(out)
}

/// Returns every violated object invariant; an empty list means valid.
pub fn validate_object(
    o: &ObjectState,
    schema: &AttributeSchema,
    catalog: &Catalog,
) -> Vec<String> {
    let mut violations = Vec::new();
    for (i, spec) in schema.iter().enumerate() {
        if (o.values[i] as usize) >= spec.vocab_size() {
            violations.push(format!("{}: index out of vocabulary", spec.name));
        }
    }
    let name = o.type_name(schema);
    if name == NONE_TOKEN || !catalog.contains(name) {
        violations.push(format!("objectName: {name:?} is not a catalog type"));
    }
    for &(state, affordance) in AFFORDANCE_IMPLICATIONS {
        let s = o.bool(schema, state).unwrap_or(false);
        let a = o.bool(schema, affordance).unwrap_or(false);
        if s && !a {
            violations.push(format!("{state}=>{affordance}"));
        }
    }
    violations
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionType {
    PickupObject,
    PutObject,
    DropObject,
    ThrowObject,
    OpenObject,
    CloseObject,
    ToggleObjectOn,
    ToggleObjectOff,
    SliceObject,
    DirtyObject,
    CleanObject,
    FillObjectWithLiquid,
    EmptyLiquidFromObject,
    BreakObject,
    CookObject,
    HeatObject,
    CoolObject,
    UseUpObject,
    MoveObjectCloser,
    MoveObjectAway,
}

impl ActionType {
    pub const ALL: [ActionType; 20] = [
        ActionType::PickupObject,
        ActionType::PutObject,
        ActionType::DropObject,
        ActionType::ThrowObject,
        ActionType::OpenObject,
        ActionType::CloseObject,
        ActionType::ToggleObjectOn,
        ActionType::ToggleObjectOff,
        ActionType::SliceObject,
        ActionType::DirtyObject,
        ActionType::CleanObject,
        ActionType::FillObjectWithLiquid,
        ActionType::EmptyLiquidFromObject,
        ActionType::BreakObject,
        ActionType::CookObject,
        ActionType::HeatObject,
        ActionType::CoolObject,
        ActionType::UseUpObject,
        ActionType::MoveObjectCloser,
        ActionType::MoveObjectAway,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ActionType::PickupObject => "PickupObject",
            ActionType::PutObject => "PutObject",
            ActionType::DropObject => "DropObject",
            ActionType::ThrowObject => "ThrowObject",
            ActionType::OpenObject => "OpenObject",
            ActionType::CloseObject => "CloseObject",
            ActionType::ToggleObjectOn => "ToggleObjectOn",
            ActionType::ToggleObjectOff => "ToggleObjectOff",
            ActionType::SliceObject => "SliceObject",
            ActionType::DirtyObject => "DirtyObject",
            ActionType::CleanObject => "CleanObject",
            ActionType::FillObjectWithLiquid => "FillObjectWithLiquid",
            ActionType::EmptyLiquidFromObject => "EmptyLiquidFromObject",
            ActionType::BreakObject => "BreakObject",
            ActionType::CookObject => "CookObject",
            ActionType::HeatObject => "HeatObject",
            ActionType::CoolObject => "CoolObject",
            ActionType::UseUpObject => "UseUpObject",
            ActionType::MoveObjectCloser => "MoveObjectCloser",
            ActionType::MoveObjectAway => "MoveObjectAway",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|a| a.name() == name)
    }

    /// (min, max) number of object arguments.
    pub fn arity(&self) -> (u8, u8) {
        match self {
            ActionType::PutObject => (2, 2),
            ActionType::ThrowObject => (1, 2),
            _ => (1, 1),
        }
    }

    pub fn takes_intensity(&self) -> bool {
        matches!(self, ActionType::ThrowObject)
    }
}

impl std::fmt::Display for ActionType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub action_type: ActionType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arg1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arg2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity: Option<u32>,
}

impl Action {
    pub fn unary(action_type: ActionType, arg1: impl Into<String>) -> Self {
        Self {
            action_type,
            arg1: Some(arg1.into()),
            arg2: None,
            intensity: None,
        }
    }

    pub fn binary(
        action_type: ActionType,
        arg1: impl Into<String>,
        arg2: impl Into<String>,
    ) -> Self {
        Self {
            action_type,
            arg1: Some(arg1.into()),
            arg2: Some(arg2.into()),
            intensity: None,
        }
    }

    pub fn throw(arg1: impl Into<String>, target: Option<String>, intensity: u32) -> Self {
        Self {
            action_type: ActionType::ThrowObject,
            arg1: Some(arg1.into()),
            arg2: target,
            intensity: Some(intensity),
        }
    }

    pub fn args(&self) -> impl Iterator<Item = &str> {
        self.arg1.as_deref().into_iter().chain(self.arg2.as_deref())
    }

    /// Wire form: lowercase action token with the intensity suffix appended,
    /// as in `throwobject10`.
    pub fn serialized(&self) -> String {
        let mut s = self.action_type.name().to_lowercase();
        if let Some(i) = self.intensity {
            s.push_str(&i.to_string());
        }
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WorldState {
    objects: BTreeMap<String, ObjectState>,
    parent: BTreeMap<String, String>,
    agent_holding: Option<String>,
}

impl WorldState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn insert(&mut self, object: ObjectState) {
        self.objects.insert(object.instance_id.clone(), object);
    }

    pub fn get(&self, id: &str) -> Option<&ObjectState> {
        self.objects.get(id)
    }

    pub fn get_mut(&mut self, id: &str) -> Option<&mut ObjectState> {
        self.objects.get_mut(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.objects.keys().map(String::as_str)
    }

    pub fn objects(&self) -> impl Iterator<Item = &ObjectState> {
        self.objects.values()
    }

    pub fn agent_holding(&self) -> Option<&str> {
        self.agent_holding.as_deref()
    }

    pub fn set_agent_holding(&mut self, id: Option<String>) {
        self.agent_holding = id;
    }

    pub fn parent_of(&self, id: &str) -> Option<&str> {
        self.parent.get(id).map(String::as_str)
    }

    /// Children in deterministic (lexicographic) order.
    pub fn children_of(&self, id: &str) -> Vec<&str> {
        self.parent
            .iter()
            .filter(|(_, p)| p.as_str() == id)
            .map(|(c, _)| c.as_str())
            .collect()
    }

    /// Moves `child` into `new_parent` (or out of any container when `None`),
    /// keeping the derived containment attributes consistent.
    pub fn set_parent(
        &mut self,
        schema: &AttributeSchema,
        child: &str,
        new_parent: Option<&str>,
    ) -> Result<(), WorldError> {
        let old_parent = self.parent.get(child).cloned();
        match new_parent {
            Some(p) => {
                self.parent.insert(child.to_string(), p.to_string());
            }
            None => {
                self.parent.remove(child);
            }
        }
        self.refresh_containment(schema, child)?;
        if let Some(old) = old_parent {
            self.refresh_containment(schema, &old)?;
        }
        if let Some(new) = new_parent {
            self.refresh_containment(schema, new)?;
        }
        Ok(())
    }

    /// Recomputes `parentReceptacles` and `receptacleObjectIds` for one
    /// instance from the containment relation.
    pub fn refresh_containment(
        &mut self,
        schema: &AttributeSchema,
        id: &str,
    ) -> Result<(), WorldError> {
        let parent_tok = match self.parent.get(id) {
            Some(p) => self
                .objects
                .get(p)
                .map(|o| o.type_name(schema).to_string())
                .unwrap_or_else(|| NONE_TOKEN.to_string()),
            None => NONE_TOKEN.to_string(),
        };
        let first_child_tok = self
            .children_of(id)
            .first()
            .and_then(|c| self.objects.get(*c))
            .map(|o| o.type_name(schema).to_string())
            .unwrap_or_else(|| NONE_TOKEN.to_string());
        let obj = self
            .objects
            .get_mut(id)
            .ok_or_else(|| WorldError::UnknownObjectType(id.to_string()))?;
        obj.set_token(schema, "parentReceptacles", &parent_tok)?;
        obj.set_token(schema, "receptacleObjectIds", &first_child_tok)?;
        Ok(())
    }

    /// World-level invariant check: object validity, holding consistency,
    /// containment acyclicity, and derived-attribute consistency.
    pub fn validate(&self, schema: &AttributeSchema, catalog: &Catalog) -> Vec<String> {
        let mut violations = Vec::new();
        for o in self.objects.values() {
            for v in validate_object(o, schema, catalog) {
                violations.push(format!("{}: {v}", o.instance_id));
            }
        }
        if let Some(held) = &self.agent_holding {
            match self.objects.get(held) {
                Some(o) if !o.bool(schema, "isPickedUp").unwrap_or(false) => {
                    violations.push(format!("{held}: held but isPickedUp=false"));
                }
                None => violations.push(format!("{held}: held object missing")),
                _ => {}
            }
        }
        for id in self.objects.keys() {
            // cycle walk
            let mut seen = BTreeSet::new();
            let mut cur = id.as_str();
            while let Some(p) = self.parent.get(cur) {
                if !seen.insert(p.clone()) {
                    violations.push(format!("{id}: containment cycle through {p}"));
                    break;
                }
                cur = p.as_str();
            }
            // parent must be a receptacle
            if let Some(p) = self.parent.get(id.as_str()) {
                if let Some(po) = self.objects.get(p) {
                    if !po.bool(schema, "receptacle").unwrap_or(false) {
                        violations.push(format!("{id}: parent {p} is not a receptacle"));
                    }
                }
            }
        }
        violations
    }

    /// Deterministic serialization used for byte-exactness checks.
    pub fn to_json(&self, schema: &AttributeSchema) -> serde_json::Value {
        let objects: Vec<_> = self.objects.values().map(|o| o.to_json(schema)).collect();
        let parents: BTreeMap<_, _> = self.parent.iter().collect();
        serde_json::json!({
            "objects": objects,
            "parents": parents,
            "agent_holding": self.agent_holding,
        })
    }

    pub fn from_json(
        value: &serde_json::Value,
        schema: &AttributeSchema,
    ) -> Result<Self, WorldError> {
        let mut world = WorldState::new();
        for ov in value
            .get("objects")
            .and_then(|v| v.as_array())
            .ok_or_else(|| WorldError::BadData("world missing objects".into()))?
        {
            world.insert(ObjectState::from_json(ov, schema)?);
        }
        if let Some(parents) = value.get("parents").and_then(|v| v.as_object()) {
            for (c, p) in parents {
                let p = p
                    .as_str()
                    .ok_or_else(|| WorldError::BadData("bad parent entry".into()))?;
                world.parent.insert(c.clone(), p.to_string());
            }
        }
        world.agent_holding = value
            .get("agent_holding")
            .and_then(|v| v.as_str())
            .map(str::to_string);
        Ok(world)
    }
}

/// Picks the transition's key objects: changed objects first (action
/// arguments, then most-changed), padded deterministically with non-changing
/// objects when fewer than two change.
pub fn select_key_objects<R: Rng>(
    world_pre: &WorldState,
    world_post: &WorldState,
    action: &Action,
    rng: &mut R,
) -> Vec<String> {
    let schema_len_diff = |id: &str| -> usize {
        match (world_pre.get(id), world_post.get(id)) {
            (Some(a), Some(b)) => a
                .indices()
                .iter()
                .zip(b.indices())
                .filter(|(x, y)| x != y)
                .count(),
            _ => 0,
        }
    };
    let args: Vec<&str> = action.args().collect();
    let is_arg = |id: &str| args.iter().position(|a| *a == id);

    let mut changed: Vec<(String, usize)> = world_pre
        .ids()
        .filter(|id| world_post.get(id).is_some())
        .map(|id| (id.to_string(), schema_len_diff(id)))
        .filter(|(_, n)| *n > 0)
        .collect();
    changed.sort_by(|(a, na), (b, nb)| {
        let arg_rank = |id: &str| is_arg(id).unwrap_or(usize::MAX);
        arg_rank(a)
            .cmp(&arg_rank(b))
            .then(nb.cmp(na))
            .then(a.cmp(b))
    });

    let mut keys: Vec<String> = changed.into_iter().map(|(id, _)| id).take(2).collect();
    if keys.len() < 2 {
        // action arguments first, then a seeded draw from the rest
        for a in &args {
            if keys.len() >= 2 {
                break;
            }
            if !keys.iter().any(|k| k == a) && world_pre.get(a).is_some() {
                keys.push(a.to_string());
            }
        }
        let pool: Vec<&str> = world_pre
            .ids()
            .filter(|id| !keys.iter().any(|k| k == id) && world_post.get(id).is_some())
            .collect();
        while keys.len() < 2 && !pool.is_empty() {
            let pick = pool.choose(rng).expect("non-empty pool");
            if !keys.iter().any(|k| k == pick) {
                keys.push(pick.to_string());
            }
        }
    }
    keys
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSet {
    pub s_pre: [String; 2],
    pub s_action: [String; 2],
    pub s_post: [String; 2],
}

/// One unit of data: the pre/post states of the key objects around an action.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub pre: Vec<ObjectState>,
    pub action: Action,
    pub post: Vec<ObjectState>,
    pub sentences: Option<SentenceSet>,
}

impl Transition {
    /// Attributes that changed, per key object, in key order.
    pub fn change_sets(&self, schema: &AttributeSchema) -> Vec<BTreeSet<String>> {
        self.pre
            .iter()
            .zip(&self.post)
            .map(|(a, b)| diff_objects(a, b, schema).expect("aligned key objects"))
            .collect()
    }

    pub fn to_json(&self, schema: &AttributeSchema) -> serde_json::Value {
        let mut v = serde_json::json!({
            "pre": self.pre.iter().map(|o| o.to_json(schema)).collect::<Vec<_>>(),
            "action": serde_json::to_value(&self.action).expect("action serializes"),
            "post": self.post.iter().map(|o| o.to_json(schema)).collect::<Vec<_>>(),
        });
        if let Some(s) = &self.sentences {
            v["sentences"] = serde_json::to_value(s).expect("sentences serialize");
        }
        v
    }

    pub fn from_json(
        value: &serde_json::Value,
        schema: &AttributeSchema,
    ) -> Result<Self, WorldError> {
        let parse_states = |key: &str| -> Result<Vec<ObjectState>, WorldError> {
            value
                .get(key)
                .and_then(|v| v.as_array())
                .ok_or_else(|| WorldError::BadData(format!("transition missing {key}")))?
                .iter()
                .map(|o| ObjectState::from_json(o, schema))
                .collect()
        };
        let pre = parse_states("pre")?;
        let post = parse_states("post")?;
        if pre.len() != post.len()
            || pre
                .iter()
                .zip(&post)
                .any(|(a, b)| a.instance_id != b.instance_id)
        {
            return Err(WorldError::BadData(
                "pre/post key objects misaligned".into(),
            ));
        }
        let action: Action = serde_json::from_value(
            value
                .get("action")
                .cloned()
                .ok_or_else(|| WorldError::BadData("transition missing action".into()))?,
        )
        .map_err(|e| WorldError::BadData(format!("bad action: {e}")))?;
        let sentences = match value.get("sentences") {
            Some(s) => Some(
                serde_json::from_value(s.clone())
                    .map_err(|e| WorldError::BadData(format!("bad sentences: {e}")))?,
            ),
            None => None,
        };
        Ok(Self {
            pre,
            action,
            post,
            sentences,
        })
    }
}
