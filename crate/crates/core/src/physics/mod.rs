//! Deterministic, contextual transition function over symbolic worlds.
//!
//! `apply_action` matches the action's rule, checks preconditions, applies
//! the rule's effects plus contextual effects, and finishes with a heat
//! propagation pass. Failed preconditions yield an identity transition with
//! the failure recorded, never an abort.

mod rules;

pub use rules::{ContextEffect, Effect, EffectRule, PhysicsConfig, Precondition};

use once_cell::sync::Lazy;

use crate::error::PhysicsError;
use crate::world::{Action, AttributeSchema, Catalog, WorldState};

pub const RULES_JSON: &str = include_str!("../../data/rules.json");

static BUILTIN_RULES: Lazy<PhysicsConfig> =
    Lazy::new(|| PhysicsConfig::from_json(RULES_JSON).expect("builtin rules parse"));

pub fn builtin_rules() -> &'static PhysicsConfig {
    &BUILTIN_RULES
}

/// Result of applying an action: the next world, whether the preconditions
/// held, and the `(instance, attribute)` pairs the rule was allowed to touch.
#[derive(Debug, Clone)]
pub struct ActionOutcome {
    pub world: WorldState,
    pub ok: bool,
    pub violations: Vec<String>,
    pub touched: Vec<(String, String)>,
}

struct Ctx<'a> {
    schema: &'a AttributeSchema,
    catalog: &'a Catalog,
    cfg: &'a PhysicsConfig,
}

fn resolve_args<'w>(world: &'w WorldState, action: &Action) -> Result<Vec<&'w str>, PhysicsError> {
    let (min, max) = action.action_type.arity();
    let args: Vec<&str> = action.args().collect();
    if (args.len() as u8) < min || (args.len() as u8) > max {
        return Err(PhysicsError::BadArity {
            action: action.action_type.name().to_string(),
            expected: min,
            got: args.len() as u8,
        });
    }
    let mut resolved = Vec::with_capacity(args.len());
    for a in args {
        let o = world
            .get(a)
            .ok_or_else(|| PhysicsError::DanglingObject(a.to_string()))?;
        resolved.push(o.instance_id.as_str());
    }
    Ok(resolved)
}

fn arg_id<'a>(args: &'a [&'a str], arg: u8) -> Option<&'a str> {
    args.get((arg as usize).wrapping_sub(1)).copied()
}

fn roles_of<'a>(world: &WorldState, ctx: &Ctx<'a>, id: &str) -> &'a [String] {
    let name = world.get(id).map(|o| o.type_name(ctx.schema)).unwrap_or("");
    ctx.catalog
        .get(name)
        .map(|t| t.roles.as_slice())
        .unwrap_or(&[])
}

fn check_one(
    world: &WorldState,
    ctx: &Ctx,
    args: &[&str],
    pre: &Precondition,
) -> Option<String> {
    let schema = ctx.schema;
    let get = |arg: u8| arg_id(args, arg).and_then(|id| world.get(id));
    match pre {
        Precondition::Affordance { arg, attr } => {
            let o = get(*arg)?;
            if !o.bool(schema, attr).unwrap_or(false) {
                return Some(format!("{}: {attr} required", o.instance_id));
            }
        }
        Precondition::AttrIs { arg, attr, value } => {
            let o = get(*arg)?;
            let tok = o.token(schema, attr).ok()?;
            if tok != value {
                return Some(format!(
                    "{}: {attr} is {tok}, expected {value}",
                    o.instance_id
                ));
            }
        }
        Precondition::AttrIsNot { arg, attr, value } => {
            let o = get(*arg)?;
            if o.token(schema, attr).ok()? == value.as_str() {
                return Some(format!("{}: {attr} already {value}", o.instance_id));
            }
        }
        Precondition::HandEmpty => {
            if let Some(h) = world.agent_holding() {
                return Some(format!("hand not empty (holding {h})"));
            }
        }
        Precondition::Holding { arg } => {
            let id = arg_id(args, *arg)?;
            if world.agent_holding() != Some(id) {
                return Some(format!("{id}: must be held"));
            }
        }
        Precondition::HoldingToolWithRole { role } => {
            let held_ok = world
                .agent_holding()
                .map(|h| roles_of(world, ctx, h).iter().any(|r| r == role))
                .unwrap_or(false);
            if !held_ok {
                return Some(format!("no held tool with role {role}"));
            }
        }
        Precondition::NotInClosedReceptacle { arg } => {
            let id = arg_id(args, *arg)?;
            if let Some(p) = world.parent_of(id) {
                if let Some(po) = world.get(p) {
                    let openable = po.bool(schema, "openable").unwrap_or(false);
                    let open = po.bool(schema, "isOpen").unwrap_or(false);
                    if openable && !open {
                        return Some(format!("{id}: inside closed {p}"));
                    }
                }
            }
        }
        Precondition::ReceptacleAccessible { arg } => {
            let o = get(*arg)?;
            let openable = o.bool(schema, "openable").unwrap_or(false);
            let open = o.bool(schema, "isOpen").unwrap_or(false);
            if openable && !open {
                return Some(format!("{}: receptacle is closed", o.instance_id));
            }
        }
        Precondition::NotSelf => {
            if let (Some(a), Some(b)) = (arg_id(args, 1), arg_id(args, 2)) {
                if a == b {
                    return Some("arguments must differ".to_string());
                }
            }
        }
        Precondition::NotInside { inner, outer } => {
            if let (Some(i), Some(o)) = (arg_id(args, *inner), arg_id(args, *outer)) {
                let mut cur = i;
                while let Some(p) = world.parent_of(cur) {
                    if p == o {
                        return Some(format!("{i} is inside {o}"));
                    }
                    cur = p;
                }
            }
        }
        Precondition::SizeFits { item, container } => {
            let (i, c) = (get(*item)?, get(*container)?);
            let size_idx = schema.index_of("size").ok()?;
            if i.index(size_idx) > c.index(size_idx) {
                return Some(format!(
                    "{} does not fit in {}",
                    i.instance_id, c.instance_id
                ));
            }
        }
        Precondition::DistanceAtLeast { arg, bin } => {
            let o = get(*arg)?;
            let d = schema.index_of("distance").ok()?;
            if o.index(d) < *bin {
                return Some(format!("{}: already as close as possible", o.instance_id));
            }
        }
        Precondition::DistanceBelow { arg, bin } => {
            let o = get(*arg)?;
            let d = schema.index_of("distance").ok()?;
            if o.index(d) >= *bin {
                return Some(format!("{}: already as far as possible", o.instance_id));
            }
        }
    }
    None
}

/// Lists every unmet precondition; empty means the action will fire.
pub fn check_preconditions(
    world: &WorldState,
    action: &Action,
    cfg: &PhysicsConfig,
    schema: &AttributeSchema,
    catalog: &Catalog,
) -> Result<Vec<String>, PhysicsError> {
    let rule = cfg
        .rule(action.action_type)
        .ok_or_else(|| PhysicsError::UnknownAction(action.action_type.name().to_string()))?;
    let args = resolve_args(world, action)?;
    let ctx = Ctx {
        schema,
        catalog,
        cfg,
    };
    Ok(rule
        .preconditions
        .iter()
        .filter_map(|p| check_one(world, &ctx, &args, p))
        .collect())
}

struct TouchLog(Vec<(String, String)>);

impl TouchLog {
    fn attr(&mut self, id: &str, attr: &str) {
        self.0.push((id.to_string(), attr.to_string()));
    }

    /// A containment move may rewrite the derived attributes of the child and
    /// of both the old and new parents.
    fn containment(&mut self, world: &WorldState, id: &str, new_parent: Option<&str>) {
        self.attr(id, "parentReceptacles");
        self.attr(id, "receptacleObjectIds");
        if let Some(old) = world.parent_of(id) {
            self.attr(old, "receptacleObjectIds");
        }
        if let Some(new) = new_parent {
            self.attr(new, "receptacleObjectIds");
        }
    }
}

fn set_attr(
    world: &mut WorldState,
    log: &mut TouchLog,
    schema: &AttributeSchema,
    id: &str,
    attr: &str,
    value: &str,
) -> Result<(), PhysicsError> {
    log.attr(id, attr);
    world
        .get_mut(id)
        .ok_or_else(|| PhysicsError::DanglingObject(id.to_string()))?
        .set_token(schema, attr, value)?;
    Ok(())
}

fn set_distance_bin(
    world: &mut WorldState,
    log: &mut TouchLog,
    schema: &AttributeSchema,
    id: &str,
    bin: u16,
) -> Result<(), PhysicsError> {
    log.attr(id, "distance");
    let d = schema.index_of("distance")?;
    let top = (schema.spec(d).vocab_size() - 1) as u16;
    world
        .get_mut(id)
        .ok_or_else(|| PhysicsError::DanglingObject(id.to_string()))?
        .set_index(d, bin.min(top));
    Ok(())
}

fn intensity_distance_bin(intensity: u32) -> u16 {
    match intensity {
        0..=1 => 2,
        2..=10 => 4,
        _ => 6,
    }
}

fn apply_effect(
    world: &mut WorldState,
    log: &mut TouchLog,
    ctx: &Ctx,
    args: &[&str],
    action: &Action,
    effect: &Effect,
) -> Result<(), PhysicsError> {
    let schema = ctx.schema;
    let intensity = action.intensity.unwrap_or(1);
    match effect {
        Effect::SetAttr { arg, attr, value } => {
            if let Some(id) = arg_id(args, *arg).map(str::to_string) {
                set_attr(world, log, schema, &id, attr, value)?;
            }
        }
        Effect::PickUp { arg } => {
            if let Some(id) = arg_id(args, *arg).map(str::to_string) {
                log.containment(world, &id, None);
                world.set_parent(schema, &id, None)?;
                set_attr(world, log, schema, &id, "isPickedUp", "true")?;
                set_distance_bin(world, log, schema, &id, 0)?;
                world.set_agent_holding(Some(id));
            }
        }
        Effect::PutInto { arg, into } => {
            if let (Some(id), Some(target)) = (
                arg_id(args, *arg).map(str::to_string),
                arg_id(args, *into).map(str::to_string),
            ) {
                log.containment(world, &id, Some(&target));
                world.set_parent(schema, &id, Some(&target))?;
                set_attr(world, log, schema, &id, "isPickedUp", "false")?;
                let d = schema.index_of("distance")?;
                let target_bin = world.get(&target).map(|o| o.index(d)).unwrap_or(0);
                set_distance_bin(world, log, schema, &id, target_bin)?;
                world.set_agent_holding(None);
            }
        }
        Effect::Release { arg } => {
            if let Some(id) = arg_id(args, *arg).map(str::to_string) {
                log.containment(world, &id, None);
                world.set_parent(schema, &id, None)?;
                set_attr(world, log, schema, &id, "isPickedUp", "false")?;
                set_distance_bin(world, log, schema, &id, 0)?;
                world.set_agent_holding(None);
            }
        }
        Effect::ReleaseThrown { arg } => {
            if let Some(id) = arg_id(args, *arg).map(str::to_string) {
                log.containment(world, &id, None);
                world.set_parent(schema, &id, None)?;
                set_attr(world, log, schema, &id, "isPickedUp", "false")?;
                let d = schema.index_of("distance")?;
                let bin = match arg_id(args, 2) {
                    Some(target) if target != id => {
                        world.get(target).map(|o| o.index(d)).unwrap_or(2)
                    }
                    _ => intensity_distance_bin(intensity),
                };
                set_distance_bin(world, log, schema, &id, bin)?;
                world.set_agent_holding(None);
            }
        }
        Effect::BreakIfIntense { arg } => {
            if let Some(id) = arg_id(args, *arg).map(str::to_string) {
                let o = world
                    .get(&id)
                    .ok_or_else(|| PhysicsError::DanglingObject(id.clone()))?;
                let breaks = o.bool(schema, "breakable")? && intensity >= ctx.cfg.break_threshold;
                log.attr(&id, "isBroken");
                log.attr(&id, "isFilledWithLiquid");
                if breaks {
                    set_attr(world, log, schema, &id, "isBroken", "true")?;
                    set_attr(world, log, schema, &id, "isFilledWithLiquid", "false")?;
                }
            }
        }
        Effect::SpillIfFilled { arg } => {
            if let Some(id) = arg_id(args, *arg).map(str::to_string) {
                log.attr(&id, "isFilledWithLiquid");
                let filled = world
                    .get(&id)
                    .map(|o| o.bool(schema, "isFilledWithLiquid").unwrap_or(false))
                    .unwrap_or(false);
                if filled {
                    set_attr(world, log, schema, &id, "isFilledWithLiquid", "false")?;
                }
            }
        }
        Effect::Approach { arg } => {
            if let Some(id) = arg_id(args, *arg).map(str::to_string) {
                set_distance_bin(world, log, schema, &id, 0)?;
            }
        }
        Effect::ShiftDistance { arg, delta } => {
            if let Some(id) = arg_id(args, *arg).map(str::to_string) {
                let d = schema.index_of("distance")?;
                let top = (schema.spec(d).vocab_size() - 1) as i32;
                let cur = world.get(&id).map(|o| o.index(d) as i32).unwrap_or(0);
                let bin = (cur + *delta as i32).clamp(0, top) as u16;
                set_distance_bin(world, log, schema, &id, bin)?;
            }
        }
    }
    Ok(())
}

fn apply_context(
    world: &mut WorldState,
    log: &mut TouchLog,
    ctx: &Ctx,
    args: &[&str],
    effect: &ContextEffect,
) -> Result<(), PhysicsError> {
    let schema = ctx.schema;
    let arg1_roles = arg_id(args, 1)
        .map(|id| roles_of(world, ctx, id).to_vec())
        .unwrap_or_default();
    if !arg1_roles.iter().any(|r| r == effect.guard_role()) {
        return Ok(());
    }
    match effect {
        ContextEffect::FillVesselsInSinkBasins { .. } => {
            let ids: Vec<String> = world.ids().map(str::to_string).collect();
            for id in ids {
                let in_sink = world
                    .parent_of(&id)
                    .map(|p| roles_of(world, ctx, p).iter().any(|r| r == "sink"))
                    .unwrap_or(false);
                if !in_sink {
                    continue;
                }
                let o = world.get(&id).expect("listed id");
                if o.bool(schema, "canFillWithLiquid")?
                    && !o.bool(schema, "isBroken")?
                    && !o.bool(schema, "isFilledWithLiquid")?
                {
                    set_attr(world, log, schema, &id, "isFilledWithLiquid", "true")?;
                }
            }
        }
        ContextEffect::CleanObjectsInSinkBasins { .. } => {
            let ids: Vec<String> = world.ids().map(str::to_string).collect();
            for id in ids {
                let in_sink = world
                    .parent_of(&id)
                    .map(|p| roles_of(world, ctx, p).iter().any(|r| r == "sink"))
                    .unwrap_or(false);
                if in_sink && world.get(&id).expect("listed id").bool(schema, "isDirty")? {
                    set_attr(world, log, schema, &id, "isDirty", "false")?;
                }
            }
        }
        ContextEffect::FillContainedVessels { arg, make_hot, .. } => {
            if let Some(machine) = arg_id(args, *arg).map(str::to_string) {
                let children: Vec<String> = world
                    .children_of(&machine)
                    .iter()
                    .map(|s| s.to_string())
                    .collect();
                for c in children {
                    let o = world.get(&c).expect("listed child");
                    if o.bool(schema, "canFillWithLiquid")? && !o.bool(schema, "isBroken")? {
                        if !o.bool(schema, "isFilledWithLiquid")? {
                            set_attr(world, log, schema, &c, "isFilledWithLiquid", "true")?;
                        }
                        if *make_hot {
                            set_attr(world, log, schema, &c, "ObjectTemperature", "Hot")?;
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn active_heat_source(world: &WorldState, ctx: &Ctx, id: &str) -> bool {
    let roles = roles_of(world, ctx, id);
    if !roles.iter().any(|r| r == "heat_source") {
        return false;
    }
    let o = match world.get(id) {
        Some(o) => o,
        None => return false,
    };
    let toggled = o.bool(ctx.schema, "isToggled").unwrap_or(false);
    let broken = o.bool(ctx.schema, "isBroken").unwrap_or(false);
    let microwave_open = roles.iter().any(|r| r == "microwave")
        && o.bool(ctx.schema, "isOpen").unwrap_or(false);
    toggled && !broken && !microwave_open
}

fn active_cold_source(world: &WorldState, ctx: &Ctx, id: &str) -> bool {
    roles_of(world, ctx, id).iter().any(|r| r == "cold_source")
}

fn propagate_in_place(
    world: &mut WorldState,
    ctx: &Ctx,
    log: &mut TouchLog,
) -> Result<(), PhysicsError> {
    let schema = ctx.schema;
    let ids: Vec<String> = world.ids().map(str::to_string).collect();
    // active heat sources run hot themselves
    for id in &ids {
        if active_heat_source(world, ctx, id) {
            log.attr(id, "ObjectTemperature");
            if world.get(id).expect("listed id").token(schema, "ObjectTemperature")? != "Hot" {
                set_attr(world, log, schema, id, "ObjectTemperature", "Hot")?;
            }
        }
    }
    // contents take the temperature of the nearest active source above them
    for id in &ids {
        let mut cur = id.as_str();
        let mut target: Option<&str> = None;
        while let Some(p) = world.parent_of(cur) {
            if active_heat_source(world, ctx, p) {
                target = Some("Hot");
                break;
            }
            if active_cold_source(world, ctx, p) {
                target = Some("Cold");
                break;
            }
            cur = p;
        }
        if let Some(temp) = target {
            log.attr(id, "ObjectTemperature");
            if world.get(id).expect("listed id").token(schema, "ObjectTemperature")? != temp {
                set_attr(world, log, schema, id, "ObjectTemperature", temp)?;
            }
        }
    }
    // hot cookables finish cooking
    for id in &ids {
        let o = world.get(id).expect("listed id");
        if o.bool(schema, "cookable")?
            && o.token(schema, "ObjectTemperature")? == "Hot"
            && !o.bool(schema, "isCooked")?
        {
            set_attr(world, log, schema, id, "isCooked", "true")?;
        }
    }
    Ok(())
}

/// Temperature fixed point: subtrees of active heat sources become hot,
/// fridge contents become cold, hot cookables become cooked.
pub fn heat_propagation(
    world: &WorldState,
    schema: &AttributeSchema,
    catalog: &Catalog,
) -> WorldState {
    let ctx = Ctx {
        schema,
        catalog,
        cfg: builtin_rules(),
    };
    let mut next = world.clone();
    let mut log = TouchLog(Vec::new());
    propagate_in_place(&mut next, &ctx, &mut log).expect("propagation over valid world");
    next
}

/// Applies an action to a world. Precondition failures return the input
/// world unchanged with `ok = false`; rule effects, contextual effects, and
/// heat propagation otherwise produce the next world.
pub fn apply_action(
    world: &WorldState,
    action: &Action,
    cfg: &PhysicsConfig,
    schema: &AttributeSchema,
    catalog: &Catalog,
) -> Result<ActionOutcome, PhysicsError> {
    let rule = cfg
        .rule(action.action_type)
        .ok_or_else(|| PhysicsError::UnknownAction(action.action_type.name().to_string()))?;
    let args_owned: Vec<String> = resolve_args(world, action)?
        .iter()
        .map(|s| s.to_string())
        .collect();
    let args: Vec<&str> = args_owned.iter().map(String::as_str).collect();
    let ctx = Ctx {
        schema,
        catalog,
        cfg,
    };
    let violations: Vec<String> = rule
        .preconditions
        .iter()
        .filter_map(|p| check_one(world, &ctx, &args, p))
        .collect();
    if !violations.is_empty() {
        return Ok(ActionOutcome {
            world: world.clone(),
            ok: false,
            violations,
            touched: Vec::new(),
        });
    }
    let mut next = world.clone();
    let mut log = TouchLog(Vec::new());
    for e in &rule.effects {
        apply_effect(&mut next, &mut log, &ctx, &args, action, e)?;
    }
    for c in &rule.context {
        apply_context(&mut next, &mut log, &ctx, &args, c)?;
    }
    propagate_in_place(&mut next, &ctx, &mut log)?;
    debug_assert!(
        next.validate(schema, catalog).is_empty(),
        "rule for {} broke world invariants: {:?}",
        action.action_type,
        next.validate(schema, catalog)
    );
    Ok(ActionOutcome {
        world: next,
        ok: true,
        violations: Vec::new(),
        touched: log.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{builtin_catalog, builtin_schema, diff_objects, ActionType, ObjectState};

    fn world_with(types: &[(&str, &str)]) -> WorldState {
        let schema = builtin_schema();
        let catalog = builtin_catalog();
        let mut w = WorldState::new();
        for (id, ty) in types {
            w.insert(ObjectState::from_type(catalog.get(ty).unwrap(), schema, *id).unwrap());
        }
        w
    }

    fn apply(world: &WorldState, action: &Action) -> ActionOutcome {
        apply_action(
            world,
            action,
            builtin_rules(),
            builtin_schema(),
            builtin_catalog(),
        )
        .unwrap()
    }

    #[test]
    fn rule_table_covers_all_20_actions() {
        let cfg = builtin_rules();
        assert_eq!(cfg.rules.len(), 20);
        for a in ActionType::ALL {
            assert!(cfg.rule(a).is_some(), "no rule for {a}");
        }
    }

    #[test]
    fn faucet_fills_cup_in_sink_but_not_elsewhere() {
        let schema = builtin_schema();
        let mut w = world_with(&[
            ("faucet", "Faucet"),
            ("sink", "Sink"),
            ("cup", "Cup"),
            ("mirror", "Mirror"),
        ]);
        w.set_parent(schema, "cup", Some("sink")).unwrap();
        let out = apply(&w, &Action::unary(ActionType::ToggleObjectOn, "faucet"));
        assert!(out.ok);
        let cup = out.world.get("cup").unwrap();
        assert!(cup.bool(schema, "isFilledWithLiquid").unwrap());
        assert!(out
            .world
            .get("faucet")
            .unwrap()
            .bool(schema, "isToggled")
            .unwrap());
        // untouched bystander
        assert_eq!(out.world.get("mirror").unwrap(), w.get("mirror").unwrap());

        // no vessel beneath: only the faucet toggles
        let w2 = world_with(&[("faucet", "Faucet"), ("sink", "Sink"), ("mirror", "Mirror")]);
        let out2 = apply(&w2, &Action::unary(ActionType::ToggleObjectOn, "faucet"));
        assert!(out2.ok);
        assert!(!out2
            .world
            .get("sink")
            .unwrap()
            .bool(schema, "isFilledWithLiquid")
            .unwrap());
        let changed: Vec<String> = out2
            .world
            .objects()
            .filter(|o| {
                !diff_objects(w2.get(&o.instance_id).unwrap(), o, schema)
                    .unwrap()
                    .is_empty()
            })
            .map(|o| o.instance_id.clone())
            .collect();
        assert_eq!(changed, vec!["faucet".to_string()]);
    }

    #[test]
    fn faucet_washes_dirty_plate_in_sink() {
        let schema = builtin_schema();
        let mut w = world_with(&[("faucet", "Faucet"), ("sink", "Sink"), ("plate", "Plate")]);
        w.get_mut("plate")
            .unwrap()
            .set_bool(schema, "isDirty", true)
            .unwrap();
        w.set_parent(schema, "plate", Some("sink")).unwrap();
        let out = apply(&w, &Action::unary(ActionType::ToggleObjectOn, "faucet"));
        assert!(out.ok);
        assert!(!out.world.get("plate").unwrap().bool(schema, "isDirty").unwrap());
    }

    #[test]
    fn thrown_vase_breaks_at_high_intensity_only() {
        let schema = builtin_schema();
        for (intensity, broken) in [(1u32, false), (10, true), (100, true)] {
            let mut w = world_with(&[("vase", "Vase"), ("sofa", "Sofa")]);
            let pick = apply(&w, &Action::unary(ActionType::PickupObject, "vase"));
            assert!(pick.ok, "{:?}", pick.violations);
            w = pick.world;
            let out = apply(&w, &Action::throw("vase", None, intensity));
            assert!(out.ok);
            let vase = out.world.get("vase").unwrap();
            assert_eq!(vase.bool(schema, "isBroken").unwrap(), broken);
            assert!(!vase.bool(schema, "isPickedUp").unwrap());
            assert_eq!(out.world.agent_holding(), None);
        }
    }

    #[test]
    fn stove_burner_heats_pan_and_cooks_egg() {
        let schema = builtin_schema();
        let mut w = world_with(&[("stoveburner", "StoveBurner"), ("pan", "Pan"), ("egg", "Egg")]);
        w.set_parent(schema, "pan", Some("stoveburner")).unwrap();
        w.set_parent(schema, "egg", Some("pan")).unwrap();
        let out = apply(&w, &Action::unary(ActionType::ToggleObjectOn, "stoveburner"));
        assert!(out.ok);
        let pan = out.world.get("pan").unwrap();
        let egg = out.world.get("egg").unwrap();
        assert_eq!(pan.token(schema, "ObjectTemperature").unwrap(), "Hot");
        assert_eq!(egg.token(schema, "ObjectTemperature").unwrap(), "Hot");
        assert!(egg.bool(schema, "isCooked").unwrap());
        assert!(!pan.bool(schema, "isCooked").unwrap());
    }

    #[test]
    fn fridge_cools_contents() {
        let schema = builtin_schema();
        let mut w = world_with(&[("fridge", "Fridge"), ("egg", "Egg")]);
        w.get_mut("fridge")
            .unwrap()
            .set_bool(schema, "isOpen", true)
            .unwrap();
        let pick = apply(&w, &Action::unary(ActionType::PickupObject, "egg"));
        let put = apply(
            &pick.world,
            &Action::binary(ActionType::PutObject, "egg", "fridge"),
        );
        assert!(put.ok, "{:?}", put.violations);
        assert_eq!(
            put.world
                .get("egg")
                .unwrap()
                .token(schema, "ObjectTemperature")
                .unwrap(),
            "Cold"
        );
    }

    #[test]
    fn preconditions_catch_affordance_and_state_gates() {
        let schema = builtin_schema();
        let cfg = builtin_rules();
        let catalog = builtin_catalog();
        let w = world_with(&[("fridge", "Fridge"), ("bread", "Bread"), ("knife", "Knife")]);

        let v = check_preconditions(
            &w,
            &Action::unary(ActionType::PickupObject, "fridge"),
            cfg,
            schema,
            catalog,
        )
        .unwrap();
        assert!(v.iter().any(|s| s.contains("pickupable")), "{v:?}");

        // open an already-open microwave
        let mut w2 = world_with(&[("microwave", "Microwave")]);
        w2.get_mut("microwave")
            .unwrap()
            .set_bool(schema, "isOpen", true)
            .unwrap();
        let v2 = check_preconditions(
            &w2,
            &Action::unary(ActionType::OpenObject, "microwave"),
            cfg,
            schema,
            catalog,
        )
        .unwrap();
        assert!(!v2.is_empty());

        // slicing requires a held slicing tool
        let v3 = check_preconditions(
            &w,
            &Action::unary(ActionType::SliceObject, "bread"),
            cfg,
            schema,
            catalog,
        )
        .unwrap();
        assert!(v3.iter().any(|s| s.contains("slicing_tool")), "{v3:?}");
        let held = apply(&w, &Action::unary(ActionType::PickupObject, "knife"));
        let v4 = check_preconditions(
            &held.world,
            &Action::unary(ActionType::SliceObject, "bread"),
            cfg,
            schema,
            catalog,
        )
        .unwrap();
        assert!(v4.is_empty(), "{v4:?}");
    }

    #[test]
    fn failed_preconditions_yield_identity_transition() {
        let schema = builtin_schema();
        let w = world_with(&[("fridge", "Fridge"), ("vase", "Vase")]);
        let out = apply(&w, &Action::unary(ActionType::PickupObject, "fridge"));
        assert!(!out.ok);
        assert_eq!(out.world.to_json(schema), w.to_json(schema));
    }

    #[test]
    fn usage_errors_for_unknown_targets_and_arity() {
        let w = world_with(&[("vase", "Vase")]);
        let missing = apply_action(
            &w,
            &Action::unary(ActionType::PickupObject, "ghost"),
            builtin_rules(),
            builtin_schema(),
            builtin_catalog(),
        );
        assert!(matches!(missing, Err(PhysicsError::DanglingObject(_))));

        let bad_arity = apply_action(
            &w,
            &Action::unary(ActionType::PutObject, "vase"),
            builtin_rules(),
            builtin_schema(),
            builtin_catalog(),
        );
        assert!(matches!(bad_arity, Err(PhysicsError::BadArity { .. })));
    }

    #[test]
    fn heat_propagation_matches_convergence_oracle_on_nested_chain() {
        let schema = builtin_schema();
        let catalog = builtin_catalog();
        // microwave > pot > bowl > egg, all starting at room temperature
        let mut w = world_with(&[
            ("microwave", "Microwave"),
            ("pot", "Pot"),
            ("bowl", "Bowl"),
            ("egg", "Egg"),
        ]);
        w.set_parent(schema, "pot", Some("microwave")).unwrap();
        w.set_parent(schema, "bowl", Some("pot")).unwrap();
        w.set_parent(schema, "egg", Some("bowl")).unwrap();
        w.get_mut("microwave")
            .unwrap()
            .set_bool(schema, "isToggled", true)
            .unwrap();

        let fast = heat_propagation(&w, schema, catalog);

        // brute force oracle: only direct children of a hot-or-active parent
        // heat up each pass; iterate to convergence
        let ctx = Ctx {
            schema,
            catalog,
            cfg: builtin_rules(),
        };
        let mut slow = w.clone();
        loop {
            let mut next = slow.clone();
            let ids: Vec<String> = next.ids().map(str::to_string).collect();
            for id in &ids {
                if active_heat_source(&slow, &ctx, id) {
                    next.get_mut(id)
                        .unwrap()
                        .set_token(schema, "ObjectTemperature", "Hot")
                        .unwrap();
                }
                if let Some(p) = slow.parent_of(id) {
                    let parent_hot = slow
                        .get(p)
                        .unwrap()
                        .token(schema, "ObjectTemperature")
                        .unwrap()
                        == "Hot";
                    if parent_hot {
                        next.get_mut(id)
                            .unwrap()
                            .set_token(schema, "ObjectTemperature", "Hot")
                            .unwrap();
                    }
                }
            }
            if next == slow {
                break;
            }
            slow = next;
        }
        for id in ["pot", "bowl", "egg"] {
            assert_eq!(
                fast.get(id).unwrap().token(schema, "ObjectTemperature").unwrap(),
                "Hot",
                "{id} via ancestor walk"
            );
            assert_eq!(
                slow.get(id).unwrap().token(schema, "ObjectTemperature").unwrap(),
                "Hot",
                "{id} via convergence oracle"
            );
        }
        assert!(fast.get("egg").unwrap().bool(schema, "isCooked").unwrap());

        // empty world is a no-op
        let empty = WorldState::new();
        assert_eq!(heat_propagation(&empty, schema, catalog), empty);
    }

    #[test]
    fn apply_action_is_deterministic_byte_for_byte() {
        let schema = builtin_schema();
        let mut w = world_with(&[("faucet", "Faucet"), ("sink", "Sink"), ("mug", "Mug")]);
        w.set_parent(schema, "mug", Some("sink")).unwrap();
        let a = Action::unary(ActionType::ToggleObjectOn, "faucet");
        let one = apply(&w, &a).world.to_json(schema).to_string();
        let two = apply(&w, &a).world.to_json(schema).to_string();
        assert_eq!(one, two);
    }

    #[test]
    fn frame_property_diff_is_subset_of_touched() {
        let schema = builtin_schema();
        let mut w = world_with(&[
            ("faucet", "Faucet"),
            ("sink", "Sink"),
            ("mug", "Mug"),
            ("plate", "Plate"),
            ("vase", "Vase"),
        ]);
        w.set_parent(schema, "mug", Some("sink")).unwrap();
        w.get_mut("plate")
            .unwrap()
            .set_bool(schema, "isDirty", true)
            .unwrap();
        for action in [
            Action::unary(ActionType::ToggleObjectOn, "faucet"),
            Action::unary(ActionType::PickupObject, "vase"),
            Action::unary(ActionType::DirtyObject, "mug"),
            Action::unary(ActionType::MoveObjectAway, "plate"),
        ] {
            let out = apply(&w, &action);
            if !out.ok {
                continue;
            }
            for id in w.ids() {
                let d =
                    diff_objects(w.get(id).unwrap(), out.world.get(id).unwrap(), schema).unwrap();
                for attr in d {
                    assert!(
                        out.touched.iter().any(|(i, a)| i == id && *a == attr),
                        "{action:?}: change to {id}.{attr} not in touched set"
                    );
                }
            }
        }
    }
}
