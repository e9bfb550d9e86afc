//! The eleven task generators the exploration oracle samples from.
//!
//! Each generator realizes a household goal through a short action plan,
//! randomizing object choices and manner by seed, then appends a few
//! goal-preserving "coda" actions for diversity. Failed-precondition
//! attempts are occasionally kept: identity transitions are useful data.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::OracleError;
use crate::physics::{apply_action, PhysicsConfig};
use crate::world::{Action, ActionType, AttributeSchema, Catalog, WorldState};

use super::{TrajStep, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorKind {
    PutXInY,
    ThrowXAtY,
    ToggleX,
    SliceX,
    DirtyX,
    CleanX,
    ToastBread,
    BrewCoffee,
    FryX,
    MicrowaveX,
    FillX,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 11] = [
        GeneratorKind::PutXInY,
        GeneratorKind::ThrowXAtY,
        GeneratorKind::ToggleX,
        GeneratorKind::SliceX,
        GeneratorKind::DirtyX,
        GeneratorKind::CleanX,
        GeneratorKind::ToastBread,
        GeneratorKind::BrewCoffee,
        GeneratorKind::FryX,
        GeneratorKind::MicrowaveX,
        GeneratorKind::FillX,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            GeneratorKind::PutXInY => "put x in y",
            GeneratorKind::ThrowXAtY => "throw x at y",
            GeneratorKind::ToggleX => "toggle x",
            GeneratorKind::SliceX => "slice x",
            GeneratorKind::DirtyX => "dirty x",
            GeneratorKind::CleanX => "clean x",
            GeneratorKind::ToastBread => "toast bread",
            GeneratorKind::BrewCoffee => "brew coffee",
            GeneratorKind::FryX => "fry x",
            GeneratorKind::MicrowaveX => "microwave x",
            GeneratorKind::FillX => "fill x",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == name)
    }
}

struct Sim<'a> {
    world: WorldState,
    steps: Vec<TrajStep>,
    rng: ChaCha8Rng,
    schema: &'a AttributeSchema,
    catalog: &'a Catalog,
    rules: &'a PhysicsConfig,
}

impl<'a> Sim<'a> {
    fn attr(&self, id: &str, attr: &str) -> bool {
        self.world
            .get(id)
            .map(|o| o.bool(self.schema, attr).unwrap_or(false))
            .unwrap_or(false)
    }

    fn roles(&self, id: &str) -> Vec<String> {
        self.world
            .get(id)
            .and_then(|o| self.catalog.get(o.type_name(self.schema)).ok())
            .map(|t| t.roles.clone())
            .unwrap_or_default()
    }

    fn size_bin(&self, id: &str) -> u16 {
        let si = self.schema.index_of("size").expect("size attr");
        self.world.get(id).map(|o| o.index(si)).unwrap_or(0)
    }

    fn ids_where(&self, pred: impl Fn(&Self, &str) -> bool) -> Vec<String> {
        self.world
            .ids()
            .filter(|id| pred(self, id))
            .map(str::to_string)
            .collect()
    }

    fn choose(&mut self, items: &[String]) -> Option<String> {
        items.choose(&mut self.rng).cloned()
    }

    /// Applies and records one step; the world advances only on success.
    fn act(&mut self, action: Action) -> Result<bool, OracleError> {
        let out = apply_action(&self.world, &action, self.rules, self.schema, self.catalog)?;
        self.world = out.world.clone();
        self.steps.push(TrajStep {
            action,
            ok: out.ok,
            world: out.world,
        });
        Ok(out.ok)
    }

    fn ensure_hand_empty(&mut self) -> Result<bool, OracleError> {
        match self.world.agent_holding().map(str::to_string) {
            Some(held) => self.act(Action::unary(ActionType::DropObject, held)),
            None => Ok(true),
        }
    }

    /// Walks to, frees up, and grabs the target.
    fn ensure_holding(&mut self, id: &str) -> Result<bool, OracleError> {
        if self.world.agent_holding() == Some(id) {
            return Ok(true);
        }
        self.ensure_hand_empty()?;
        if let Some(parent) = self.world.parent_of(id).map(str::to_string) {
            if self.attr(&parent, "openable") && !self.attr(&parent, "isOpen") {
                self.act(Action::unary(ActionType::OpenObject, parent))?;
            }
        }
        let di = self.schema.index_of("distance").expect("distance attr");
        let far = self.world.get(id).map(|o| o.index(di) >= 1).unwrap_or(false);
        if far && self.rng.random_bool(0.25) {
            self.act(Action::unary(ActionType::MoveObjectCloser, id))?;
        }
        self.act(Action::unary(ActionType::PickupObject, id))
    }

    fn toggle_off_if_on(&mut self, id: &str) -> Result<(), OracleError> {
        if self.attr(id, "isToggled") {
            self.act(Action::unary(ActionType::ToggleObjectOff, id))?;
        }
        Ok(())
    }

    fn toggle_on_if_off(&mut self, id: &str) -> Result<(), OracleError> {
        if !self.attr(id, "isToggled") {
            self.act(Action::unary(ActionType::ToggleObjectOn, id))?;
        }
        Ok(())
    }

    /// Optional slice subplan: needs a slicing tool; the item is placed on a
    /// fitting surface first when it is being held.
    fn slice_if_possible(&mut self, id: &str) -> Result<(), OracleError> {
        if !self.attr(id, "sliceable") || self.attr(id, "isSliced") {
            return Ok(());
        }
        let tools = self.ids_where(|s, t| s.roles(t).iter().any(|r| r == "slicing_tool"));
        let tool = match self.choose(&tools) {
            Some(t) => t,
            None => return Ok(()),
        };
        if self.attr(id, "isPickedUp") {
            let item_size = self.size_bin(id);
            let surfaces = self.ids_where(|s, y| {
                y != id
                    && s.roles(y).iter().any(|r| r == "surface")
                    && s.attr(y, "receptacle")
                    && s.size_bin(y) >= item_size
            });
            match self.choose(&surfaces) {
                Some(surface) => {
                    self.act(Action::binary(ActionType::PutObject, id, surface))?;
                }
                None => return Ok(()),
            }
        }
        self.ensure_holding(&tool)?;
        self.act(Action::unary(ActionType::SliceObject, id))?;
        if self.rng.random_bool(0.4) {
            self.act(Action::unary(ActionType::DropObject, tool))?;
        }
        Ok(())
    }
}

fn pickupable(sim: &Sim, id: &str) -> bool {
    sim.attr(id, "pickupable")
}

fn fits(sim: &Sim, item: &str, container: &str) -> bool {
    sim.size_bin(item) <= sim.size_bin(container)
}

/// None when the generator's required roles are present in the scene.
pub fn generator_applicable(
    kind: GeneratorKind,
    world: &WorldState,
    schema: &AttributeSchema,
    catalog: &Catalog,
) -> Option<String> {
    let has = |pred: &dyn Fn(&str) -> bool| world.ids().any(pred);
    let attr = |id: &str, a: &str| {
        world
            .get(id)
            .map(|o| o.bool(schema, a).unwrap_or(false))
            .unwrap_or(false)
    };
    let role = |id: &str, r: &str| {
        world
            .get(id)
            .and_then(|o| catalog.get(o.type_name(schema)).ok())
            .map(|t| t.has_role(r))
            .unwrap_or(false)
    };
    let missing = |what: &str| Some(format!("missing {what}"));
    match kind {
        GeneratorKind::PutXInY => {
            if !has(&|id| attr(id, "pickupable")) {
                return missing("pickupable object");
            }
            if !has(&|id| attr(id, "receptacle")) {
                return missing("receptacle");
            }
        }
        GeneratorKind::ThrowXAtY => {
            if !has(&|id| attr(id, "pickupable")) {
                return missing("pickupable object");
            }
            if world.len() < 2 {
                return missing("a second object");
            }
        }
        GeneratorKind::ToggleX => {
            if !has(&|id| attr(id, "toggleable") && !attr(id, "isBroken")) {
                return missing("toggleable object");
            }
        }
        GeneratorKind::SliceX => {
            if !has(&|id| attr(id, "sliceable") && !attr(id, "isSliced")) {
                return missing("unsliced sliceable object");
            }
            if !has(&|id| role(id, "slicing_tool")) {
                return missing("slicing tool");
            }
        }
        GeneratorKind::DirtyX => {
            if !has(&|id| attr(id, "dirtyable") && !attr(id, "isDirty")) {
                return missing("clean dirtyable object");
            }
        }
        GeneratorKind::CleanX => {
            if !has(&|id| attr(id, "dirtyable") && attr(id, "isDirty")) {
                return missing("dirty object");
            }
        }
        GeneratorKind::ToastBread => {
            if !has(&|id| role(id, "bread") && !attr(id, "isCooked")) {
                return missing("untoasted bread");
            }
            if !has(&|id| role(id, "toaster") && !attr(id, "isBroken")) {
                return missing("toaster");
            }
        }
        GeneratorKind::BrewCoffee => {
            if !has(&|id| role(id, "coffee_machine") && !attr(id, "isBroken")) {
                return missing("coffee machine");
            }
            if !has(&|id| attr(id, "canFillWithLiquid") && attr(id, "pickupable") && !attr(id, "isBroken"))
            {
                return missing("fillable vessel");
            }
        }
        GeneratorKind::FryX => {
            if !has(&|id| role(id, "food") && attr(id, "cookable") && !attr(id, "isCooked")) {
                return missing("uncooked food");
            }
            if !has(&|id| role(id, "cookware") && !attr(id, "isBroken")) {
                return missing("cookware");
            }
            if !has(&|id| role(id, "stove_burner")) {
                return missing("stove burner");
            }
        }
        GeneratorKind::MicrowaveX => {
            if !has(&|id| role(id, "microwave") && !attr(id, "isBroken")) {
                return missing("microwave");
            }
            if !has(&|id| attr(id, "pickupable") && !role(id, "microwave")) {
                return missing("pickupable object");
            }
        }
        GeneratorKind::FillX => {
            if !has(&|id| attr(id, "canFillWithLiquid") && attr(id, "pickupable") && !attr(id, "isBroken"))
            {
                return missing("fillable vessel");
            }
            if !has(&|id| role(id, "sink")) {
                return missing("sink");
            }
            if !has(&|id| role(id, "faucet") && !attr(id, "isBroken")) {
                return missing("faucet");
            }
        }
    }
    None
}

type Goal = Box<dyn Fn(&Sim) -> bool>;

fn inapplicable(kind: GeneratorKind, reason: impl Into<String>) -> OracleError {
    OracleError::GeneratorInapplicable {
        kind: kind.name().to_string(),
        reason: reason.into(),
    }
}

fn plan(sim: &mut Sim, kind: GeneratorKind) -> Result<Goal, OracleError> {
    let fail = |reason: &str| inapplicable(kind, reason);
    match kind {
        GeneratorKind::PutXInY => {
            let xs = sim.ids_where(pickupable);
            let pairs: Vec<(String, String)> = xs
                .iter()
                .flat_map(|x| {
                    sim.ids_where(|s, y| {
                        y != x.as_str() && s.attr(y, "receptacle") && fits(s, x, y)
                    })
                    .into_iter()
                    .map(move |y| (x.clone(), y))
                })
                .collect();
            let (x, y) = pairs
                .choose(&mut sim.rng)
                .cloned()
                .ok_or_else(|| fail("no fitting (item, receptacle) pair"))?;
            sim.ensure_holding(&x)?;
            if sim.attr(&y, "openable") && !sim.attr(&y, "isOpen") {
                sim.act(Action::unary(ActionType::OpenObject, &y))?;
            }
            sim.act(Action::binary(ActionType::PutObject, &x, &y))?;
            if sim.attr(&y, "openable") && sim.rng.random_bool(0.3) {
                sim.act(Action::unary(ActionType::CloseObject, &y))?;
            }
            Ok(Box::new(move |s: &Sim| s.world.parent_of(&x) == Some(y.as_str())))
        }
        GeneratorKind::ThrowXAtY => {
            let xs = sim.ids_where(pickupable);
            let x = sim.choose(&xs).ok_or_else(|| fail("nothing to throw"))?;
            let targets = sim.ids_where(|_, y| y != x);
            let target = if sim.rng.random_bool(0.7) {
                sim.choose(&targets)
            } else {
                None
            };
            let intensity = *[1u32, 10, 100].choose(&mut sim.rng).expect("non-empty");
            sim.ensure_holding(&x)?;
            sim.act(Action::throw(&x, target, intensity))?;
            Ok(Box::new(move |s: &Sim| {
                !s.attr(&x, "isPickedUp") && s.world.parent_of(&x).is_none()
            }))
        }
        GeneratorKind::ToggleX => {
            let xs = sim.ids_where(|s, id| s.attr(id, "toggleable") && !s.attr(id, "isBroken"));
            let x = sim.choose(&xs).ok_or_else(|| fail("nothing toggleable"))?;
            let was_on = sim.attr(&x, "isToggled");
            let action = if was_on {
                ActionType::ToggleObjectOff
            } else {
                ActionType::ToggleObjectOn
            };
            sim.act(Action::unary(action, &x))?;
            Ok(Box::new(move |s: &Sim| s.attr(&x, "isToggled") != was_on))
        }
        GeneratorKind::SliceX => {
            let xs = sim.ids_where(|s, id| s.attr(id, "sliceable") && !s.attr(id, "isSliced"));
            let x = sim.choose(&xs).ok_or_else(|| fail("nothing to slice"))?;
            let tools = sim.ids_where(|s, t| s.roles(t).iter().any(|r| r == "slicing_tool"));
            let tool = sim.choose(&tools).ok_or_else(|| fail("no slicing tool"))?;
            // place the item on a surface first when possible
            let item_size = sim.size_bin(&x);
            let on_surface = sim
                .world
                .parent_of(&x)
                .map(|p| sim.roles(p).iter().any(|r| r == "surface"))
                .unwrap_or(false);
            let surfaces = sim.ids_where(|s, y| {
                y != x.as_str()
                    && s.roles(y).iter().any(|r| r == "surface")
                    && s.attr(y, "receptacle")
                    && s.size_bin(y) >= item_size
            });
            if (!on_surface || sim.rng.random_bool(0.3)) && !surfaces.is_empty() {
                let surface = sim.choose(&surfaces).expect("non-empty");
                sim.ensure_holding(&x)?;
                sim.act(Action::binary(ActionType::PutObject, &x, surface))?;
            } else if sim.attr(&x, "isPickedUp") {
                sim.act(Action::unary(ActionType::DropObject, &x))?;
            }
            sim.ensure_holding(&tool)?;
            sim.act(Action::unary(ActionType::SliceObject, &x))?;
            if sim.rng.random_bool(0.4) {
                sim.act(Action::unary(ActionType::DropObject, tool))?;
            }
            Ok(Box::new(move |s: &Sim| s.attr(&x, "isSliced")))
        }
        GeneratorKind::DirtyX => {
            let xs = sim.ids_where(|s, id| s.attr(id, "dirtyable") && !s.attr(id, "isDirty"));
            let x = sim.choose(&xs).ok_or_else(|| fail("nothing to dirty"))?;
            sim.act(Action::unary(ActionType::DirtyObject, &x))?;
            Ok(Box::new(move |s: &Sim| s.attr(&x, "isDirty")))
        }
        GeneratorKind::CleanX => {
            let xs = sim.ids_where(|s, id| s.attr(id, "dirtyable") && s.attr(id, "isDirty"));
            let x = sim.choose(&xs).ok_or_else(|| fail("nothing dirty"))?;
            let sinks = sim.ids_where(|s, id| s.roles(id).iter().any(|r| r == "sink"));
            let faucets = sim.ids_where(|s, id| {
                s.roles(id).iter().any(|r| r == "faucet") && !s.attr(id, "isBroken")
            });
            let washable = sim.attr(&x, "pickupable")
                && sinks.iter().any(|sink| fits(sim, &x, sink))
                && !faucets.is_empty();
            if washable && sim.rng.random_bool(0.6) {
                let sink = sinks
                    .iter()
                    .find(|sink| fits(sim, &x, sink))
                    .expect("checked")
                    .clone();
                let faucet = sim.choose(&faucets).expect("checked");
                sim.toggle_off_if_on(&faucet)?;
                sim.ensure_holding(&x)?;
                sim.act(Action::binary(ActionType::PutObject, &x, sink))?;
                sim.act(Action::unary(ActionType::ToggleObjectOn, &faucet))?;
                if sim.rng.random_bool(0.5) {
                    sim.act(Action::unary(ActionType::ToggleObjectOff, faucet))?;
                }
            } else {
                sim.act(Action::unary(ActionType::CleanObject, &x))?;
            }
            Ok(Box::new(move |s: &Sim| !s.attr(&x, "isDirty")))
        }
        GeneratorKind::ToastBread => {
            let breads = sim.ids_where(|s, id| {
                s.roles(id).iter().any(|r| r == "bread") && !s.attr(id, "isCooked")
            });
            let bread = sim.choose(&breads).ok_or_else(|| fail("no bread"))?;
            let toasters = sim.ids_where(|s, id| {
                s.roles(id).iter().any(|r| r == "toaster") && !s.attr(id, "isBroken")
            });
            let toaster = sim.choose(&toasters).ok_or_else(|| fail("no toaster"))?;
            if sim.rng.random_bool(0.6) {
                sim.slice_if_possible(&bread)?;
            }
            sim.ensure_holding(&bread)?;
            sim.act(Action::binary(ActionType::PutObject, &bread, &toaster))?;
            sim.toggle_on_if_off(&toaster)?;
            Ok(Box::new(move |s: &Sim| s.attr(&bread, "isCooked")))
        }
        GeneratorKind::BrewCoffee => {
            let machines = sim.ids_where(|s, id| {
                s.roles(id).iter().any(|r| r == "coffee_machine") && !s.attr(id, "isBroken")
            });
            let machine = sim.choose(&machines).ok_or_else(|| fail("no machine"))?;
            let vessels = sim.ids_where(|s, id| {
                s.attr(id, "canFillWithLiquid")
                    && s.attr(id, "pickupable")
                    && !s.attr(id, "isBroken")
                    && fits(s, id, &machine)
            });
            // prefer the mug when present
            let vessel = if vessels.iter().any(|v| v == "mug") {
                "mug".to_string()
            } else {
                sim.choose(&vessels).ok_or_else(|| fail("no fitting vessel"))?
            };
            sim.toggle_off_if_on(&machine)?;
            sim.ensure_holding(&vessel)?;
            sim.act(Action::binary(ActionType::PutObject, &vessel, &machine))?;
            sim.act(Action::unary(ActionType::ToggleObjectOn, &machine))?;
            Ok(Box::new(move |s: &Sim| {
                s.world.parent_of(&vessel) == Some(machine.as_str())
                    && s.attr(&machine, "isToggled")
                    && s.attr(&vessel, "isFilledWithLiquid")
            }))
        }
        GeneratorKind::FryX => {
            let foods = sim.ids_where(|s, id| {
                s.roles(id).iter().any(|r| r == "food")
                    && s.attr(id, "cookable")
                    && !s.attr(id, "isCooked")
            });
            let food = sim.choose(&foods).ok_or_else(|| fail("no uncooked food"))?;
            let burners = sim.ids_where(|s, id| s.roles(id).iter().any(|r| r == "stove_burner"));
            let burner = sim.choose(&burners).ok_or_else(|| fail("no burner"))?;
            let pans = sim.ids_where(|s, id| {
                s.roles(id).iter().any(|r| r == "cookware")
                    && !s.attr(id, "isBroken")
                    && fits(s, &food, id)
                    && fits(s, id, &burner)
            });
            let pan = sim.choose(&pans).ok_or_else(|| fail("no fitting cookware"))?;
            if sim.rng.random_bool(0.5) {
                sim.slice_if_possible(&food)?;
            }
            sim.ensure_holding(&food)?;
            sim.act(Action::binary(ActionType::PutObject, &food, &pan))?;
            if sim.world.parent_of(&pan) != Some(burner.as_str()) {
                sim.ensure_holding(&pan)?;
                sim.act(Action::binary(ActionType::PutObject, &pan, &burner))?;
            }
            sim.toggle_on_if_off(&burner)?;
            Ok(Box::new(move |s: &Sim| s.attr(&food, "isCooked")))
        }
        GeneratorKind::MicrowaveX => {
            let micros = sim.ids_where(|s, id| {
                s.roles(id).iter().any(|r| r == "microwave") && !s.attr(id, "isBroken")
            });
            let micro = sim.choose(&micros).ok_or_else(|| fail("no microwave"))?;
            let items = sim.ids_where(|s, id| {
                id != micro.as_str() && s.attr(id, "pickupable") && fits(s, id, &micro)
            });
            let item = sim.choose(&items).ok_or_else(|| fail("nothing to heat"))?;
            if sim.rng.random_bool(0.4) {
                sim.slice_if_possible(&item)?;
            }
            sim.ensure_holding(&item)?;
            if !sim.attr(&micro, "isOpen") {
                sim.act(Action::unary(ActionType::OpenObject, &micro))?;
            }
            sim.act(Action::binary(ActionType::PutObject, &item, &micro))?;
            sim.act(Action::unary(ActionType::CloseObject, &micro))?;
            sim.toggle_on_if_off(&micro)?;
            Ok(Box::new(move |s: &Sim| {
                s.world
                    .get(&item)
                    .map(|o| o.token(s.schema, "ObjectTemperature").unwrap_or("") == "Hot")
                    .unwrap_or(false)
            }))
        }
        GeneratorKind::FillX => {
            let vessels = sim.ids_where(|s, id| {
                s.attr(id, "canFillWithLiquid")
                    && s.attr(id, "pickupable")
                    && !s.attr(id, "isBroken")
            });
            let sinks = sim.ids_where(|s, id| s.roles(id).iter().any(|r| r == "sink"));
            let faucets = sim.ids_where(|s, id| {
                s.roles(id).iter().any(|r| r == "faucet") && !s.attr(id, "isBroken")
            });
            let faucet = sim.choose(&faucets).ok_or_else(|| fail("no faucet"))?;
            let pairs: Vec<(String, String)> = vessels
                .iter()
                .flat_map(|v| {
                    sinks
                        .iter()
                        .filter(|s2| fits(sim, v, s2))
                        .map(move |s2| (v.clone(), s2.clone()))
                        .collect::<Vec<_>>()
                })
                .collect();
            let (vessel, sink) = pairs
                .choose(&mut sim.rng)
                .cloned()
                .ok_or_else(|| fail("no vessel fits a sink"))?;
            sim.toggle_off_if_on(&faucet)?;
            sim.ensure_holding(&vessel)?;
            sim.act(Action::binary(ActionType::PutObject, &vessel, &sink))?;
            sim.act(Action::unary(ActionType::ToggleObjectOn, &faucet))?;
            if sim.rng.random_bool(0.6) {
                sim.act(Action::unary(ActionType::ToggleObjectOff, faucet))?;
            }
            sim.act(Action::unary(ActionType::PickupObject, &vessel))?;
            sim.act(Action::unary(ActionType::EmptyLiquidFromObject, &vessel))?;
            Ok(Box::new(move |s: &Sim| !s.attr(&vessel, "isFilledWithLiquid")))
        }
    }
}

/// Goal-preserving diversity actions appended after the task completes.
/// Rare action types get the most weight so the dataset covers all twenty.
const CODA_WEIGHTS: [(ActionType, u32); 20] = [
    (ActionType::MoveObjectCloser, 5),
    (ActionType::MoveObjectAway, 5),
    (ActionType::DirtyObject, 4),
    (ActionType::CleanObject, 4),
    (ActionType::OpenObject, 3),
    (ActionType::CloseObject, 3),
    (ActionType::ToggleObjectOn, 3),
    (ActionType::ToggleObjectOff, 3),
    (ActionType::FillObjectWithLiquid, 4),
    (ActionType::EmptyLiquidFromObject, 4),
    (ActionType::CookObject, 5),
    (ActionType::HeatObject, 5),
    (ActionType::CoolObject, 5),
    (ActionType::UseUpObject, 5),
    (ActionType::BreakObject, 3),
    (ActionType::PickupObject, 3),
    (ActionType::DropObject, 2),
    (ActionType::ThrowObject, 2),
    (ActionType::SliceObject, 2),
    (ActionType::PutObject, 2),
];

fn coda(sim: &mut Sim, goal: &Goal) -> Result<(), OracleError> {
    let extra = sim.rng.random_range(0..=3);
    let total: u32 = CODA_WEIGHTS.iter().map(|(_, w)| w).sum();
    let mut done = 0;
    for _ in 0..10 {
        if done >= extra {
            break;
        }
        let mut pick = sim.rng.random_range(0..total);
        let mut action_type = ActionType::MoveObjectCloser;
        for (a, w) in CODA_WEIGHTS {
            if pick < w {
                action_type = a;
                break;
            }
            pick -= w;
        }
        let all: Vec<String> = sim.world.ids().map(str::to_string).collect();
        let held = sim.world.agent_holding().map(str::to_string);
        let action = match action_type {
            ActionType::PutObject => {
                let x = match &held {
                    Some(h) => h.clone(),
                    None => continue,
                };
                let ys = sim.ids_where(|s, y| y != x.as_str() && s.attr(y, "receptacle"));
                match sim.choose(&ys) {
                    Some(y) => Action::binary(ActionType::PutObject, x, y),
                    None => continue,
                }
            }
            ActionType::ThrowObject => {
                let x = match &held {
                    Some(h) => h.clone(),
                    None => continue,
                };
                let ys = sim.ids_where(|_, y| y != x.as_str());
                let target = sim.choose(&ys);
                let intensity = *[1u32, 10, 100].choose(&mut sim.rng).expect("non-empty");
                Action::throw(x, target, intensity)
            }
            ActionType::DropObject => match &held {
                Some(h) => Action::unary(ActionType::DropObject, h.clone()),
                None => continue,
            },
            other => {
                let x = match all.choose(&mut sim.rng) {
                    Some(x) => x.clone(),
                    None => break,
                };
                Action::unary(other, x)
            }
        };
        let out = apply_action(&sim.world, &action, sim.rules, sim.schema, sim.catalog)?;
        if out.ok {
            // only commit if the generator's goal survives
            let candidate = Sim {
                world: out.world.clone(),
                steps: Vec::new(),
                rng: sim.rng.clone(),
                schema: sim.schema,
                catalog: sim.catalog,
                rules: sim.rules,
            };
            if goal(&candidate) {
                sim.world = out.world.clone();
                sim.steps.push(TrajStep {
                    action,
                    ok: true,
                    world: out.world,
                });
                done += 1;
            }
        } else if sim.rng.random_bool(0.3) {
            // keep some failed attempts: identity transitions are data too
            sim.steps.push(TrajStep {
                action,
                ok: false,
                world: sim.world.clone(),
            });
            done += 1;
        }
    }
    Ok(())
}

/// Runs one seeded task generator from the given initial world.
pub fn run_generator(
    kind: GeneratorKind,
    world: &WorldState,
    seed: u64,
    schema: &AttributeSchema,
    catalog: &Catalog,
    rules: &PhysicsConfig,
) -> Result<Trajectory, OracleError> {
    if let Some(reason) = generator_applicable(kind, world, schema, catalog) {
        return Err(inapplicable(kind, reason));
    }
    let mut sim = Sim {
        world: world.clone(),
        steps: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(seed),
        schema,
        catalog,
        rules,
    };
    let goal = plan(&mut sim, kind)?;
    if !goal(&sim) {
        return Err(inapplicable(kind, "goal not reached"));
    }
    coda(&mut sim, &goal)?;
    debug_assert!(goal(&sim), "coda must preserve the generator goal");
    Ok(Trajectory {
        initial_world: world.clone(),
        steps: sim.steps,
        generator_kind: kind.name().to_string(),
        seed,
    })
}
