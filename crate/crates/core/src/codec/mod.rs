//! Flat text serialization of states and actions, with fuzzy recovery.
//!
//! The wire form is a lowercase, quote-free record: parenthesized object
//! blocks of comma-separated `key: value` pairs followed by an action block,
//! e.g. `predict next object states: (objectname: bowl, ...) (action:
//! throwobject10)`. Decoding is resilient: unknown values are snapped to the
//! closest vocabulary token by edit distance, missing keys copy the
//! pre-action fallback object.

mod templater;
mod tokenizer;

pub use templater::{
    builtin_lexicon, parse_post_change_map, render_sentences, ChangeMap, Lexicon, LEXICON_JSON,
};
pub use tokenizer::{tokenize, Vocab};

use crate::error::CodecError;
use crate::world::{Action, AttributeSchema, ObjectState};

pub const WIRE_PREFIX: &str = "predict next object states:";

/// Wire keys in record order, paired with the schema attribute they carry.
/// The two `can*` affordances and the 16 material flags are not spelled out
/// on the wire; materials collapse into a single `materials` list key.
const WIRE_KEYS: [(&str, &str); 25] = [
    ("objectname", "objectName"),
    ("parentreceptacles", "parentReceptacles"),
    ("containedobjects", "receptacleObjectIds"),
    ("distance", "distance"),
    ("mass", "mass"),
    ("size", "size"),
    ("temp", "ObjectTemperature"),
    ("breakable", "breakable"),
    ("cookable", "cookable"),
    ("dirtyable", "dirtyable"),
    ("broken", "isBroken"),
    ("cooked", "isCooked"),
    ("dirty", "isDirty"),
    ("filledwithliquid", "isFilledWithLiquid"),
    ("open", "isOpen"),
    ("pickedup", "isPickedUp"),
    ("sliced", "isSliced"),
    ("toggled", "isToggled"),
    ("usedup", "isUsedUp"),
    ("moveable", "moveable"),
    ("openable", "openable"),
    ("pickupable", "pickupable"),
    ("receptacle", "receptacle"),
    ("sliceable", "sliceable"),
    ("toggleable", "toggleable"),
];

fn material_attrs(schema: &AttributeSchema) -> Vec<(usize, String)> {
    schema
        .iter()
        .enumerate()
        .filter_map(|(i, a)| {
            a.name
                .strip_prefix("salientMaterials_")
                .map(|s| (i, s.to_lowercase()))
        })
        .collect()
}

/// Renders key objects plus the action in the flat wire format.
pub fn encode_record(pre: &[ObjectState], action: &Action, schema: &AttributeSchema) -> String {
    let materials = material_attrs(schema);
    let mut out = String::from(WIRE_PREFIX);
    for o in pre {
        out.push_str(" (");
        for (wire, attr) in WIRE_KEYS {
            let idx = schema.index_of(attr).expect("wire attr in schema");
            let tok = schema.spec(idx).token(o.index(idx)).to_lowercase();
            out.push_str(wire);
            out.push_str(": ");
            out.push_str(&tok);
            out.push_str(", ");
        }
        let mats: Vec<&str> = materials
            .iter()
            .filter(|(i, _)| o.index(*i) == 1)
            .map(|(_, s)| s.as_str())
            .collect();
        out.push_str("materials: ");
        if mats.is_empty() {
            out.push_str("none");
        } else {
            out.push_str(&mats.join(" "));
        }
        out.push(')');
    }
    out.push_str(" (action: ");
    out.push_str(&action.serialized());
    out.push(')');
    out
}

/// Sanitization decisions taken while decoding a record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SanitizeNote {
    ReplacedValue {
        object: usize,
        attr: String,
        given: String,
        chosen: String,
    },
    MissingKey {
        object: usize,
        attr: String,
    },
    UnknownKey {
        object: usize,
        key: String,
    },
    MissingBlock {
        object: usize,
    },
    ExtraBlock {
        index: usize,
    },
}

impl std::fmt::Display for SanitizeNote {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SanitizeNote::ReplacedValue {
                object,
                attr,
                given,
                chosen,
            } => write!(f, "object {object}: {attr} {given:?} -> {chosen:?}"),
            SanitizeNote::MissingKey { object, attr } => {
                write!(f, "object {object}: {attr} missing, copied from input")
            }
            SanitizeNote::UnknownKey { object, key } => {
                write!(f, "object {object}: unknown key {key:?} ignored")
            }
            SanitizeNote::MissingBlock { object } => {
                write!(f, "object {object}: block missing, copied from input")
            }
            SanitizeNote::ExtraBlock { index } => write!(f, "extra block {index} ignored"),
        }
    }
}

/// Classic edit distance over characters.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            cur[j + 1] = (prev[j + 1] + 1).min(cur[j] + 1).min(prev[j] + cost);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Closest vocabulary token by edit distance; ties break to the
/// lexicographically smallest token. Matching is case-insensitive.
fn closest_token(vocab: &[String], given: &str) -> (u16, String) {
    let mut best: Option<(usize, String, u16)> = None;
    for (i, tok) in vocab.iter().enumerate() {
        let lower = tok.to_lowercase();
        let d = levenshtein(&lower, given);
        let better = match &best {
            None => true,
            Some((bd, btok, _)) => d < *bd || (d == *bd && lower < *btok),
        };
        if better {
            best = Some((d, lower, i as u16));
        }
    }
    let (_, tok, idx) = best.expect("non-empty vocabulary");
    (idx, tok)
}

fn parse_blocks(text: &str) -> Result<Vec<&str>, CodecError> {
    let mut blocks = Vec::new();
    let mut rest = text;
    loop {
        match rest.find('(') {
            None => break,
            Some(start) => {
                let after = &rest[start + 1..];
                let end = after.find(')').ok_or_else(|| CodecError::Structure {
                    at: after.chars().take(40).collect(),
                    reason: "unclosed block".into(),
                })?;
                blocks.push(&after[..end]);
                rest = &after[end + 1..];
            }
        }
    }
    if blocks.is_empty() {
        return Err(CodecError::Empty);
    }
    Ok(blocks)
}

/// Parses a wire record back into object states. `fallback` supplies the
/// instance identity and any attribute the record does not mention.
pub fn decode_record(
    text: &str,
    fallback: &[ObjectState],
    schema: &AttributeSchema,
) -> Result<(Vec<ObjectState>, Vec<SanitizeNote>), CodecError> {
    let text = text.trim().to_lowercase();
    let blocks = parse_blocks(&text)?;
    let object_blocks: Vec<&str> = blocks
        .iter()
        .copied()
        .filter(|b| !b.trim_start().starts_with("action:"))
        .collect();

    let materials = material_attrs(schema);
    let material_names: Vec<String> = materials.iter().map(|(_, s)| s.clone()).collect();
    let wire_to_attr: std::collections::HashMap<&str, &str> = WIRE_KEYS.iter().copied().collect();
    let mut notes = Vec::new();
    for i in fallback.len()..object_blocks.len() {
        notes.push(SanitizeNote::ExtraBlock { index: i });
    }

    let mut out = Vec::with_capacity(fallback.len());
    for (oi, fb) in fallback.iter().enumerate() {
        let mut obj = fb.clone();
        let block = match object_blocks.get(oi) {
            Some(b) => *b,
            None => {
                notes.push(SanitizeNote::MissingBlock { object: oi });
                out.push(obj);
                continue;
            }
        };
        let mut seen: std::collections::HashSet<&str> = std::collections::HashSet::new();
        for pair in block.split(',') {
            let pair = pair.trim();
            if pair.is_empty() {
                continue;
            }
            let (key, value) = match pair.split_once(':') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => {
                    notes.push(SanitizeNote::UnknownKey {
                        object: oi,
                        key: pair.to_string(),
                    });
                    continue;
                }
            };
            if key == "materials" {
                seen.insert("materials");
                for (idx, _) in &materials {
                    obj.set_index(*idx, 0);
                }
                for word in value.split_whitespace() {
                    let (pos, chosen) = closest_token(&material_names, word);
                    if chosen != word {
                        notes.push(SanitizeNote::ReplacedValue {
                            object: oi,
                            attr: "materials".into(),
                            given: word.to_string(),
                            chosen,
                        });
                    }
                    obj.set_index(materials[pos as usize].0, 1);
                }
                continue;
            }
            match wire_to_attr.get(key) {
                Some(attr) => {
                    seen.insert(key);
                    let ai = schema.index_of(attr).expect("wire attr in schema");
                    let spec = schema.spec(ai);
                    match spec.index_of_lower(value) {
                        Some(v) => obj.set_index(ai, v),
                        None => {
                            let (v, chosen) = closest_token(&spec.vocab, value);
                            notes.push(SanitizeNote::ReplacedValue {
                                object: oi,
                                attr: attr.to_string(),
                                given: value.to_string(),
                                chosen,
                            });
                            obj.set_index(ai, v);
                        }
                    }
                }
                None => notes.push(SanitizeNote::UnknownKey {
                    object: oi,
                    key: key.to_string(),
                }),
            }
        }
        for (wire, attr) in WIRE_KEYS {
            if !seen.contains(wire) {
                notes.push(SanitizeNote::MissingKey {
                    object: oi,
                    attr: attr.to_string(),
                });
            }
        }
        if !seen.contains("materials") {
            notes.push(SanitizeNote::MissingKey {
                object: oi,
                attr: "materials".to_string(),
            });
        }
        out.push(obj);
    }
    Ok((out, notes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{builtin_catalog, builtin_schema, ActionType};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fixture_states() -> Vec<ObjectState> {
        let schema = builtin_schema();
        let catalog = builtin_catalog();
        let mut bowl =
            ObjectState::from_type(catalog.get("Bowl").unwrap(), schema, "bowl").unwrap();
        bowl.set_token(schema, "parentReceptacles", "Cabinet").unwrap();
        bowl.set_token(schema, "distance", "6 to 8 ft").unwrap();
        bowl.set_token(schema, "mass", ".5 to 1lb").unwrap();
        bowl.set_token(schema, "size", "medium").unwrap();
        let mut egg = ObjectState::from_type(catalog.get("Egg").unwrap(), schema, "egg").unwrap();
        egg.set_token(schema, "distance", "2 to 3ft").unwrap();
        egg.set_token(schema, "mass", ".1 to .2lb").unwrap();
        egg.set_token(schema, "size", "tiny").unwrap();
        egg.set_token(schema, "ObjectTemperature", "Cold").unwrap();
        egg.set_bool(schema, "isPickedUp", true).unwrap();
        vec![bowl, egg]
    }

    #[test]
    fn encode_reproduces_reference_record() {
        let schema = builtin_schema();
        let states = fixture_states();
        let action = Action::throw("egg", None, 10);
        let got = encode_record(&states, &action, schema);
        let want = "predict next object states: (objectname: bowl, parentreceptacles: cabinet, \
                    containedobjects: none, distance: 6 to 8 ft, mass: .5 to 1lb, size: medium, \
                    temp: roomtemp, breakable: true, cookable: false, dirtyable: true, broken: false, \
                    cooked: false, dirty: false, filledwithliquid: false, open: false, pickedup: false, \
                    sliced: false, toggled: false, usedup: false, moveable: false, openable: false, \
                    pickupable: true, receptacle: true, sliceable: false, toggleable: false, \
                    materials: glass) (objectname: egg, parentreceptacles: none, containedobjects: none, \
                    distance: 2 to 3ft, mass: .1 to .2lb, size: tiny, temp: cold, breakable: true, \
                    cookable: true, dirtyable: false, broken: false, cooked: false, dirty: false, \
                    filledwithliquid: false, open: false, pickedup: true, sliced: false, toggled: false, \
                    usedup: false, moveable: false, openable: false, pickupable: true, receptacle: false, \
                    sliceable: true, toggleable: false, materials: food) (action: throwobject10)";
        assert_eq!(got, want);
        assert!(!got.chars().any(|c| c.is_uppercase() || c == '"' || c == '\''));
    }

    #[test]
    fn decode_inverts_encode() {
        let schema = builtin_schema();
        let states = fixture_states();
        let action = Action::throw("egg", None, 10);
        let text = encode_record(&states, &action, schema);
        let (decoded, notes) = decode_record(&text, &states, schema).unwrap();
        assert_eq!(decoded, states);
        assert!(notes.is_empty(), "{notes:?}");
    }

    #[test]
    fn decode_snaps_invalid_value_by_edit_distance() {
        let schema = builtin_schema();
        let states = fixture_states();
        let action = Action::throw("egg", None, 10);
        let text = encode_record(&states, &action, schema).replace("temp: cold", "temp: roomtmp");
        let (decoded, notes) = decode_record(&text, &states, schema).unwrap();
        assert_eq!(
            decoded[1].token(schema, "ObjectTemperature").unwrap(),
            "RoomTemp"
        );
        assert!(notes.iter().any(|n| matches!(
            n,
            SanitizeNote::ReplacedValue { given, chosen, .. }
                if given == "roomtmp" && chosen == "roomtemp"
        )));
    }

    #[test]
    fn decode_copies_fallback_for_missing_key() {
        let schema = builtin_schema();
        let states = fixture_states();
        let action = Action::throw("egg", None, 10);
        let text = encode_record(&states, &action, schema).replace("openable: false, ", "");
        let (decoded, notes) = decode_record(&text, &states, schema).unwrap();
        assert_eq!(decoded, states);
        assert!(notes
            .iter()
            .any(|n| matches!(n, SanitizeNote::MissingKey { attr, .. } if attr == "openable")));
    }

    #[test]
    fn decode_ignores_unknown_keys() {
        let schema = builtin_schema();
        let states = fixture_states();
        let action = Action::throw("egg", None, 10);
        let text = encode_record(&states, &action, schema)
            .replace("(objectname: bowl", "(wobble: 3, objectname: bowl");
        let (decoded, notes) = decode_record(&text, &states, schema).unwrap();
        assert_eq!(decoded, states);
        assert!(notes
            .iter()
            .any(|n| matches!(n, SanitizeNote::UnknownKey { key, .. } if key == "wobble")));
    }

    #[test]
    fn structural_garbage_is_an_error() {
        let schema = builtin_schema();
        let states = fixture_states();
        assert!(matches!(
            decode_record("no blocks here", &states, schema),
            Err(CodecError::Empty)
        ));
        assert!(matches!(
            decode_record("(objectname: bowl", &states, schema),
            Err(CodecError::Structure { .. })
        ));
    }

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein("", ""), 0);
        assert_eq!(levenshtein("abc", "abc"), 0);
        assert_eq!(levenshtein("roomtmp", "roomtemp"), 1);
        assert_eq!(levenshtein("hot", "cold"), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
    }

    #[test]
    fn ties_break_lexicographically() {
        let vocab = vec!["hat".to_string(), "cat".to_string(), "bat".to_string()];
        let (_, chosen) = closest_token(&vocab, "rat");
        assert_eq!(chosen, "bat");
    }

    pub(crate) fn random_valid_state(rng: &mut ChaCha8Rng, id: &str) -> ObjectState {
        let schema = builtin_schema();
        let catalog = builtin_catalog();
        let types: Vec<_> = catalog.iter().collect();
        let t = types[rng.random_range(0..types.len())];
        let mut o = ObjectState::from_type(t, schema, id).unwrap();
        for (state, affordance) in crate::world::AFFORDANCE_IMPLICATIONS {
            if o.bool(schema, affordance).unwrap() && rng.random_bool(0.3) {
                o.set_bool(schema, state, true).unwrap();
            }
        }
        for attr in ["mass", "size", "distance"] {
            let ai = schema.index_of(attr).unwrap();
            let n = schema.spec(ai).vocab_size() as u16;
            o.set_index(ai, rng.random_range(0..n));
        }
        let temp = schema.index_of("ObjectTemperature").unwrap();
        o.set_index(temp, rng.random_range(0..3));
        if rng.random_bool(0.4) {
            let pi = schema.index_of("parentReceptacles").unwrap();
            let names = schema.spec(pi).vocab_size() as u16;
            o.set_index(pi, rng.random_range(0..names));
        }
        o
    }

    #[test]
    fn encode_decode_encode_is_idempotent_on_random_states() {
        let schema = builtin_schema();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..500 {
            let states = vec![
                random_valid_state(&mut rng, "a"),
                random_valid_state(&mut rng, "b"),
            ];
            let action = Action::unary(ActionType::PickupObject, "a");
            let text = encode_record(&states, &action, schema);
            let (decoded, _) = decode_record(&text, &states, schema).unwrap();
            assert_eq!(decoded, states, "round trip {i}");
            let text2 = encode_record(&decoded, &action, schema);
            assert_eq!(text, text2, "idempotence {i}");
        }
    }
}
