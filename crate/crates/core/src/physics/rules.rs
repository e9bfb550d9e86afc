//! Declarative action rule table.
//!
//! The table is data (tests can inject degenerate rule sets); the closed
//! vocabulary of precondition/effect kinds lives here.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::PhysicsError;
use crate::world::ActionType;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Precondition {
    /// The named boolean attribute must be true on the argument.
    Affordance { arg: u8, attr: String },
    AttrIs { arg: u8, attr: String, value: String },
    AttrIsNot { arg: u8, attr: String, value: String },
    HandEmpty,
    Holding { arg: u8 },
    /// The held object's catalog roles must include `role`.
    HoldingToolWithRole { role: String },
    /// The argument must not sit inside a closed openable receptacle.
    NotInClosedReceptacle { arg: u8 },
    /// Openable receptacles must be open to receive objects.
    ReceptacleAccessible { arg: u8 },
    NotSelf,
    /// `inner` must not be contained (transitively) in `outer`.
    NotInside { inner: u8, outer: u8 },
    /// Size bin of `item` must not exceed the container's.
    SizeFits { item: u8, container: u8 },
    DistanceAtLeast { arg: u8, bin: u16 },
    DistanceBelow { arg: u8, bin: u16 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Effect {
    SetAttr { arg: u8, attr: String, value: String },
    /// Take the argument in hand: picked up, out of its container, adjacent.
    PickUp { arg: u8 },
    /// Place the held argument into the target receptacle.
    PutInto { arg: u8, into: u8 },
    /// Let go at the agent's feet.
    Release { arg: u8 },
    /// Let go with momentum; distance comes from the target or intensity.
    ReleaseThrown { arg: u8 },
    /// Break the argument if it is breakable and the throw was intense enough.
    BreakIfIntense { arg: u8 },
    SpillIfFilled { arg: u8 },
    /// The agent walks to the argument before manipulating it.
    Approach { arg: u8 },
    ShiftDistance { arg: u8, delta: i16 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContextEffect {
    /// A running faucet fills every fillable vessel sitting in a sink basin.
    FillVesselsInSinkBasins { when_role: String },
    /// A running faucet rinses everything dirty in a sink basin.
    CleanObjectsInSinkBasins { when_role: String },
    /// A coffee machine fills vessels it contains (optionally heating them).
    FillContainedVessels {
        arg: u8,
        make_hot: bool,
        when_role: String,
    },
}

impl ContextEffect {
    pub fn guard_role(&self) -> &str {
        match self {
            ContextEffect::FillVesselsInSinkBasins { when_role }
            | ContextEffect::CleanObjectsInSinkBasins { when_role }
            | ContextEffect::FillContainedVessels { when_role, .. } => when_role,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EffectRule {
    pub action: ActionType,
    #[serde(default)]
    pub preconditions: Vec<Precondition>,
    #[serde(default)]
    pub effects: Vec<Effect>,
    #[serde(default)]
    pub context: Vec<ContextEffect>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhysicsConfig {
    pub schema_version: u32,
    /// Thrown breakables break at or above this intensity.
    pub break_threshold: u32,
    pub throw_intensities: Vec<u32>,
    pub rules: Vec<EffectRule>,
    #[serde(skip)]
    by_action: HashMap<ActionType, usize>,
}

impl PhysicsConfig {
    pub fn from_json(json: &str) -> Result<Self, PhysicsError> {
        let mut cfg: PhysicsConfig = serde_json::from_str(json)
            .map_err(|e| PhysicsError::BadRuleTable(format!("rules json: {e}")))?;
        cfg.reindex()?;
        Ok(cfg)
    }

    pub fn reindex(&mut self) -> Result<(), PhysicsError> {
        self.by_action.clear();
        for (i, r) in self.rules.iter().enumerate() {
            if self.by_action.insert(r.action, i).is_some() {
                return Err(PhysicsError::BadRuleTable(format!(
                    "duplicate rule for {}",
                    r.action
                )));
            }
        }
        Ok(())
    }

    pub fn rule(&self, action: ActionType) -> Option<&EffectRule> {
        self.by_action.get(&action).map(|&i| &self.rules[i])
    }

    pub fn action_vocabulary(&self) -> Vec<ActionType> {
        self.rules.iter().map(|r| r.action).collect()
    }
}
