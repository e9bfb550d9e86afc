//! Attribute schema, object catalog, and the object/world/transition model.

mod catalog;
mod object;
mod schema;

pub use catalog::{Catalog, ObjectTypeSpec};
pub use object::{
    diff_objects, select_key_objects, validate_object, Action, ActionType, ObjectState,
    SentenceSet, Transition, WorldState, AFFORDANCE_IMPLICATIONS,
};
pub use schema::{
    bin_continuous, AttrKind, AttributeSchema, AttributeSpec, BOOL_FALSE, BOOL_TRUE, NONE_TOKEN,
};

use once_cell::sync::Lazy;

pub const SCHEMA_JSON: &str = include_str!("../../data/schema.json");
pub const CATALOG_JSON: &str = include_str!("../../data/catalog.json");

static BUILTIN: Lazy<(Catalog, AttributeSchema)> = Lazy::new(|| {
    let catalog = Catalog::from_json(CATALOG_JSON).expect("builtin catalog parses");
    let schema = AttributeSchema::from_json(SCHEMA_JSON, &catalog).expect("builtin schema parses");
    (catalog, schema)
});

/// The catalog shipped with the crate (125 object types).
pub fn builtin_catalog() -> &'static Catalog {
    &BUILTIN.0
}

/// The attribute schema shipped with the crate.
pub fn builtin_schema() -> &'static AttributeSchema {
    &BUILTIN.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn schema_matches_expected_shape() {
        let schema = builtin_schema();
        assert_eq!(schema.len(), 43);
        for name in ["objectName", "parentReceptacles", "receptacleObjectIds"] {
            assert_eq!(schema.get(name).unwrap().vocab_size(), 126);
        }
        for name in ["mass", "size", "distance"] {
            let spec = schema.get(name).unwrap();
            assert_eq!(spec.vocab_size(), 8);
            assert_eq!(spec.bin_edges.as_ref().unwrap().len(), 7);
        }
        let temp = schema.get("ObjectTemperature").unwrap();
        assert_eq!(temp.vocab, vec!["Hot", "Cold", "RoomTemp"]);
        let boolean_count = schema
            .iter()
            .filter(|a| a.kind == AttrKind::Boolean)
            .count();
        assert_eq!(boolean_count, 43 - 3 - 3 - 1);
    }

    #[test]
    fn catalog_has_125_types_and_generator_roles() {
        let catalog = builtin_catalog();
        assert_eq!(catalog.len(), 125);
        for role in [
            "food",
            "vessel",
            "sink",
            "faucet",
            "heat_source",
            "cold_source",
            "coffee_machine",
            "toaster",
            "microwave",
            "stove_burner",
            "slicing_tool",
            "surface",
            "cookware",
            "bread",
        ] {
            assert!(!catalog.with_role(role).is_empty(), "no type with {role}");
        }
        // every affordance key is a schema attribute
        let schema = builtin_schema();
        for t in catalog.iter() {
            for aff in &t.affordances {
                assert!(schema.get(aff).is_ok(), "{}: unknown affordance {aff}", t.name);
            }
            for m in &t.materials {
                assert!(schema.get(&format!("salientMaterials_{m}")).is_ok());
            }
        }
    }

    #[test]
    fn bin_continuous_hits_documented_bins() {
        let schema = builtin_schema();
        let mass = schema.get("mass").unwrap();
        // 0.7lb-equivalent: 0.32 kg sits in the ".5 to 1lb" bin
        assert_eq!(bin_continuous(0.32, mass).unwrap(), ".5 to 1lb");
        assert_eq!(bin_continuous(0.0, mass).unwrap(), "0 to .05lb");
        assert_eq!(bin_continuous(1e9, mass).unwrap(), "5lb or more");
        // exact edge lands in the upper bin (half-open convention)
        let edges = mass.bin_edges.as_ref().unwrap();
        assert_eq!(bin_continuous(edges[3], mass).unwrap(), ".5 to 1lb");
        assert!(bin_continuous(-0.1, mass).is_err());
        assert!(bin_continuous(1.0, schema.get("isBroken").unwrap()).is_err());
    }

    #[test]
    fn bin_continuous_half_open_sweep() {
        // exhaustive sweep over all edges +- epsilon, for every binned attribute
        let schema = builtin_schema();
        for name in ["mass", "size", "distance"] {
            let spec = schema.get(name).unwrap();
            let edges = spec.bin_edges.as_ref().unwrap();
            for (i, &e) in edges.iter().enumerate() {
                let eps = e * 1e-9;
                assert_eq!(bin_continuous(e - eps, spec).unwrap(), spec.vocab[i]);
                assert_eq!(bin_continuous(e, spec).unwrap(), spec.vocab[i + 1]);
                assert_eq!(bin_continuous(e + eps, spec).unwrap(), spec.vocab[i + 1]);
            }
        }
    }

    #[test]
    fn bin_continuous_is_monotone() {
        let schema = builtin_schema();
        let spec = schema.get("distance").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let a: f64 = rand::Rng::random_range(&mut rng, 0.0..5.0);
            let b: f64 = rand::Rng::random_range(&mut rng, 0.0..5.0);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let bl = spec.index_of(bin_continuous(lo, spec).unwrap()).unwrap();
            let bh = spec.index_of(bin_continuous(hi, spec).unwrap()).unwrap();
            assert!(bl <= bh);
        }
    }

    #[test]
    fn default_objects_are_valid() {
        let schema = builtin_schema();
        let catalog = builtin_catalog();
        for t in catalog.iter() {
            let o = ObjectState::from_type(t, schema, t.name.to_lowercase()).unwrap();
            let violations = validate_object(&o, schema, catalog);
            assert!(violations.is_empty(), "{}: {violations:?}", t.name);
        }
    }

    #[test]
    fn diff_objects_matches_brute_force() {
        let schema = builtin_schema();
        let catalog = builtin_catalog();
        let mug = catalog.get("Mug").unwrap();
        let a = ObjectState::from_type(mug, schema, "mug").unwrap();
        assert!(diff_objects(&a, &a, schema).unwrap().is_empty());

        let mut b = a.clone();
        b.set_bool(schema, "isDirty", true).unwrap();
        b.set_token(schema, "ObjectTemperature", "Hot").unwrap();
        let d = diff_objects(&a, &b, schema).unwrap();
        let brute: std::collections::BTreeSet<String> = schema
            .iter()
            .enumerate()
            .filter(|(i, _)| a.index(*i) != b.index(*i))
            .map(|(_, s)| s.name.clone())
            .collect();
        assert_eq!(d, brute);
        assert_eq!(
            d.into_iter().collect::<Vec<_>>(),
            vec!["ObjectTemperature".to_string(), "isDirty".to_string()]
        );

        let other = ObjectState::from_type(mug, schema, "mug2").unwrap();
        assert!(diff_objects(&a, &other, schema).is_err());
    }

    #[test]
    fn cooking_an_egg_changes_temperature_and_cooked() {
        let schema = builtin_schema();
        let catalog = builtin_catalog();
        let egg = ObjectState::from_type(catalog.get("Egg").unwrap(), schema, "egg").unwrap();
        let mut cooked = egg.clone();
        cooked.set_token(schema, "ObjectTemperature", "Hot").unwrap();
        cooked.set_bool(schema, "isCooked", true).unwrap();
        let d = diff_objects(&egg, &cooked, schema).unwrap();
        assert_eq!(
            d.into_iter().collect::<Vec<_>>(),
            vec!["ObjectTemperature".to_string(), "isCooked".to_string()]
        );
    }

    #[test]
    fn validator_flags_affordance_violations() {
        let schema = builtin_schema();
        let catalog = builtin_catalog();
        // CounterTop is not breakable
        let mut o =
            ObjectState::from_type(catalog.get("CounterTop").unwrap(), schema, "countertop")
                .unwrap();
        o.set_bool(schema, "isBroken", true).unwrap();
        let v = validate_object(&o, schema, catalog);
        assert!(v.iter().any(|s| s == "isBroken=>breakable"), "{v:?}");
    }

    #[test]
    fn validator_agrees_with_predicate_conjunction_on_fuzzed_states() {
        // independently-coded predicate: object valid iff name is a catalog
        // type and every implication holds
        let schema = builtin_schema();
        let catalog = builtin_catalog();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let types: Vec<_> = catalog.iter().collect();
        for _ in 0..2000 {
            let t = types[rand::Rng::random_range(&mut rng, 0..types.len())];
            let mut o = ObjectState::from_type(t, schema, "x").unwrap();
            // fuzz a few attributes
            for _ in 0..4 {
                let ai = rand::Rng::random_range(&mut rng, 0..schema.len());
                let vs = schema.spec(ai).vocab_size() as u16;
                o.set_index(ai, rand::Rng::random_range(&mut rng, 0..vs));
            }
            let independent_ok = catalog.contains(o.type_name(schema))
                && o.type_name(schema) != NONE_TOKEN
                && AFFORDANCE_IMPLICATIONS.iter().all(|&(s, a)| {
                    !o.bool(schema, s).unwrap() || o.bool(schema, a).unwrap()
                });
            let validator_ok = validate_object(&o, schema, catalog).is_empty();
            assert_eq!(independent_ok, validator_ok);
        }
    }

    fn two_object_world() -> (WorldState, ObjectState, ObjectState) {
        let schema = builtin_schema();
        let catalog = builtin_catalog();
        let vase = ObjectState::from_type(catalog.get("Vase").unwrap(), schema, "vase").unwrap();
        let sofa = ObjectState::from_type(catalog.get("Sofa").unwrap(), schema, "sofa").unwrap();
        let mut w = WorldState::new();
        w.insert(vase.clone());
        w.insert(sofa.clone());
        (w, vase, sofa)
    }

    #[test]
    fn select_key_objects_prefers_changed_then_pads() {
        let schema = builtin_schema();
        let (pre, _, _) = two_object_world();
        let mut post = pre.clone();
        post.get_mut("vase")
            .unwrap()
            .set_bool(schema, "isBroken", true)
            .unwrap();
        let action = Action::throw("vase", None, 100);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let keys = select_key_objects(&pre, &post, &action, &mut rng);
        assert_eq!(keys, vec!["vase".to_string(), "sofa".to_string()]);

        // deterministic given the same seed
        let mut rng2 = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(keys, select_key_objects(&pre, &post, &action, &mut rng2));
    }

    #[test]
    fn select_key_objects_ranks_by_change_count_with_args_first() {
        let schema = builtin_schema();
        let catalog = builtin_catalog();
        let mut pre = WorldState::new();
        for name in ["Vase", "Mug", "Plate"] {
            pre.insert(
                ObjectState::from_type(catalog.get(name).unwrap(), schema, name.to_lowercase())
                    .unwrap(),
            );
        }
        let mut post = pre.clone();
        // plate: two changes; mug: one change; vase (the argument): one change
        post.get_mut("plate")
            .unwrap()
            .set_bool(schema, "isDirty", true)
            .unwrap();
        post.get_mut("plate")
            .unwrap()
            .set_token(schema, "ObjectTemperature", "Hot")
            .unwrap();
        post.get_mut("mug")
            .unwrap()
            .set_bool(schema, "isDirty", true)
            .unwrap();
        post.get_mut("vase")
            .unwrap()
            .set_bool(schema, "isBroken", true)
            .unwrap();
        let action = Action::unary(ActionType::BreakObject, "vase");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let keys = select_key_objects(&pre, &post, &action, &mut rng);
        // argument first even with fewer changes, then most-changed
        assert_eq!(keys, vec!["vase".to_string(), "plate".to_string()]);

        // brute-force ranking oracle over the changed set
        let changed = ["mug", "plate", "vase"];
        let n_changes = |id: &str| {
            diff_objects(pre.get(id).unwrap(), post.get(id).unwrap(), schema)
                .unwrap()
                .len()
        };
        let mut ranked: Vec<&str> = changed.to_vec();
        ranked.sort_by_key(|id| {
            (
                if *id == "vase" { 0 } else { 1 },
                usize::MAX - n_changes(id),
                id.to_string(),
            )
        });
        assert_eq!(keys, ranked[..2].to_vec());
    }

    #[test]
    fn single_object_world_yields_one_key() {
        let schema = builtin_schema();
        let catalog = builtin_catalog();
        let mut pre = WorldState::new();
        pre.insert(ObjectState::from_type(catalog.get("Vase").unwrap(), schema, "vase").unwrap());
        let mut post = pre.clone();
        post.get_mut("vase")
            .unwrap()
            .set_bool(schema, "isBroken", true)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let keys = select_key_objects(
            &pre,
            &post,
            &Action::unary(ActionType::BreakObject, "vase"),
            &mut rng,
        );
        assert_eq!(keys, vec!["vase".to_string()]);
    }

    #[test]
    fn containment_attrs_track_structure() {
        let schema = builtin_schema();
        let catalog = builtin_catalog();
        let mut w = WorldState::new();
        w.insert(ObjectState::from_type(catalog.get("Cabinet").unwrap(), schema, "cabinet").unwrap());
        w.insert(ObjectState::from_type(catalog.get("Bowl").unwrap(), schema, "bowl").unwrap());
        w.set_parent(schema, "bowl", Some("cabinet")).unwrap();
        assert_eq!(
            w.get("bowl").unwrap().token(schema, "parentReceptacles").unwrap(),
            "Cabinet"
        );
        assert_eq!(
            w.get("cabinet").unwrap().token(schema, "receptacleObjectIds").unwrap(),
            "Bowl"
        );
        assert!(w.validate(schema, catalog).is_empty());
        w.set_parent(schema, "bowl", None).unwrap();
        assert_eq!(
            w.get("cabinet").unwrap().token(schema, "receptacleObjectIds").unwrap(),
            NONE_TOKEN
        );
    }

    #[test]
    fn transition_round_trips_through_json() {
        let schema = builtin_schema();
        let catalog = builtin_catalog();
        let vase = ObjectState::from_type(catalog.get("Vase").unwrap(), schema, "vase").unwrap();
        let mut broken = vase.clone();
        broken.set_bool(schema, "isBroken", true).unwrap();
        let t = Transition {
            pre: vec![vase],
            action: Action::throw("vase", None, 100),
            post: vec![broken],
            sentences: None,
        };
        let json = t.to_json(schema);
        let back = Transition::from_json(&json, schema).unwrap();
        assert_eq!(t, back);
        assert_eq!(json.to_string(), back.to_json(schema).to_string());
    }
}
