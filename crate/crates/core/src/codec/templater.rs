//! Deterministic sentence templater and its inverse.
//!
//! Replaces crowd annotation: renders two paraphrase references each for the
//! pre-state, the action, and the post-state of a transition. The post-state
//! banks are exact-match invertible, so the changed-attribute set can be
//! recovered from a post sentence (`parse_post_change_map`), which is what
//! makes the generation tasks information-complete and mechanically scorable.

use std::collections::BTreeMap;

use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::world::{ActionType, AttributeSchema, SentenceSet, Transition};

pub const LEXICON_JSON: &str = include_str!("../../data/lexicon.json");

/// object name (lowercase) -> attribute -> new value token (lowercase)
pub type ChangeMap = BTreeMap<String, BTreeMap<String, String>>;

#[derive(Debug, Deserialize)]
struct RawLexicon {
    schema_version: u32,
    actions: BTreeMap<String, Vec<String>>,
    intensity_adverbs: BTreeMap<String, String>,
    pre: BTreeMap<String, serde_json::Value>,
    post: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    no_change: Vec<String>,
}

/// value token (lowercase) or `*` -> phrase bank
type ValueBank = BTreeMap<String, Vec<String>>;

#[derive(Debug)]
pub struct Lexicon {
    pub schema_version: u32,
    actions: BTreeMap<String, Vec<String>>,
    intensity_adverbs: BTreeMap<String, String>,
    pre: BTreeMap<String, ValueBank>,
    pre_idle: Vec<String>,
    post: BTreeMap<String, ValueBank>,
    no_change: Vec<String>,
}

impl Lexicon {
    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        let raw: RawLexicon = serde_json::from_str(json)?;
        let mut pre = BTreeMap::new();
        let mut pre_idle = Vec::new();
        for (k, v) in raw.pre {
            if k == "idle" {
                pre_idle = serde_json::from_value(v)?;
            } else {
                pre.insert(k, serde_json::from_value(v)?);
            }
        }
        Ok(Self {
            schema_version: raw.schema_version,
            actions: raw.actions,
            intensity_adverbs: raw.intensity_adverbs,
            pre,
            pre_idle,
            post: raw.post,
            no_change: raw.no_change,
        })
    }

    pub fn no_op_sentences(&self) -> &[String] {
        self.actions.get("NoOp").map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn no_change_sentences(&self) -> &[String] {
        &self.no_change
    }

    /// Every surface template in the lexicon, used to build the closed
    /// text vocabulary.
    pub fn all_templates(&self) -> impl Iterator<Item = &str> {
        self.actions
            .values()
            .flatten()
            .chain(self.pre.values().flat_map(|b| b.values().flatten()))
            .chain(self.pre_idle.iter())
            .chain(self.post.values().flat_map(|b| b.values().flatten()))
            .chain(self.no_change.iter())
            .map(String::as_str)
            .chain(self.intensity_adverbs.values().map(String::as_str))
    }
}

static BUILTIN_LEXICON: Lazy<Lexicon> =
    Lazy::new(|| Lexicon::from_json(LEXICON_JSON).expect("builtin lexicon parses"));

pub fn builtin_lexicon() -> &'static Lexicon {
    &BUILTIN_LEXICON
}

/// Picks bank entries; reference 1 reuses reference 0's draw shifted by one,
/// so the two references always differ wherever a bank has alternatives.
struct Picker {
    rng: ChaCha8Rng,
}

impl Picker {
    fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn pick(&mut self, len: usize) -> usize {
        if len <= 1 {
            0
        } else {
            self.rng.random_range(0..len)
        }
    }
}

fn object_name(t: &Transition, id: &str, schema: &AttributeSchema) -> String {
    t.pre
        .iter()
        .find(|o| o.instance_id == id)
        .map(|o| o.type_name(schema).to_lowercase())
        .unwrap_or_else(|| id.to_lowercase())
}

fn fill(template: &str, a: Option<&str>, b: Option<&str>, adv: Option<&str>) -> String {
    let mut s = template.to_string();
    if let Some(a) = a {
        s = s.replace("{a}", &format!("the {a}"));
    }
    if let Some(b) = b {
        s = s.replace("{b}", &format!("the {b}"));
    }
    if let Some(adv) = adv {
        s = s.replace("{adv}", adv);
    }
    s
}

fn join_clauses(name: &str, clauses: &[String]) -> String {
    let body = match clauses.len() {
        0 => return String::new(),
        1 => clauses[0].clone(),
        n => format!("{} and {}", clauses[..n - 1].join(", "), clauses[n - 1]),
    };
    format!("the {name} {body}.")
}

fn phrase_for(
    bank: &ValueBank,
    value_lower: &str,
    choice: usize,
    offset: usize,
) -> Option<String> {
    if let Some(phrases) = bank.get(value_lower) {
        let i = (choice + offset) % phrases.len().max(1);
        return Some(phrases[i].clone());
    }
    if let Some(phrases) = bank.get("*") {
        let i = (choice + offset) % phrases.len().max(1);
        return Some(phrases[i].replace("{v}", value_lower));
    }
    None
}

/// Renders the transition's sentence set. Deterministic given the seed; the
/// two references per field differ in surface wording, not content. The post
/// sentences mention exactly the changed attributes of each key object.
pub fn render_sentences(
    t: &Transition,
    seed: u64,
    schema: &AttributeSchema,
    lexicon: &Lexicon,
) -> SentenceSet {
    let mut picker = Picker::new(seed);
    let changes = t.change_sets(schema);

    // action sentences
    let action_key = match (t.action.action_type, t.action.arg2.is_some()) {
        (ActionType::ThrowObject, true) => "ThrowObjectAt".to_string(),
        (at, _) => at.name().to_string(),
    };
    let bank = lexicon
        .actions
        .get(&action_key)
        .or_else(|| lexicon.actions.get(t.action.action_type.name()))
        .expect("action bank present");
    let a_name = t
        .action
        .arg1
        .as_deref()
        .map(|id| object_name(t, id, schema));
    let b_name = t
        .action
        .arg2
        .as_deref()
        .map(|id| object_name(t, id, schema));
    let adv = t.action.intensity.map(|i| {
        lexicon
            .intensity_adverbs
            .get(&i.to_string())
            .cloned()
            .unwrap_or_else(|| "hard".to_string())
    });
    let c = picker.pick(bank.len());
    let s_action = [0usize, 1].map(|r| {
        let i = (c + r) % bank.len().max(1);
        fill(&bank[i], a_name.as_deref(), b_name.as_deref(), adv.as_deref())
    });

    // pre sentences: the about-to-change attributes, described pre-action
    let mut pre_parts: [Vec<String>; 2] = [Vec::new(), Vec::new()];
    for (o, change) in t.pre.iter().zip(&changes) {
        let name = o.type_name(schema).to_lowercase();
        if change.is_empty() {
            let c = picker.pick(lexicon.pre_idle.len());
            for r in 0..2 {
                let i = (c + r) % lexicon.pre_idle.len().max(1);
                pre_parts[r].push(format!("the {name} {}.", lexicon.pre_idle[i]));
            }
            continue;
        }
        let mut clauses: [Vec<String>; 2] = [Vec::new(), Vec::new()];
        for (ai, spec) in schema.iter().enumerate() {
            if !change.contains(&spec.name) {
                continue;
            }
            let bank = match lexicon.pre.get(&spec.name) {
                Some(b) => b,
                None => continue,
            };
            let value = spec.token(o.index(ai)).to_lowercase();
            let c = picker.pick(8);
            for r in 0..2 {
                if let Some(p) = phrase_for(bank, &value, c, r) {
                    clauses[r].push(p);
                }
            }
        }
        for r in 0..2 {
            if clauses[r].is_empty() {
                let c = picker.pick(lexicon.pre_idle.len());
                let i = (c + r) % lexicon.pre_idle.len().max(1);
                pre_parts[r].push(format!("the {name} {}.", lexicon.pre_idle[i]));
            } else {
                pre_parts[r].push(join_clauses(&name, &clauses[r]));
            }
        }
    }
    let s_pre = [pre_parts[0].join(" "), pre_parts[1].join(" ")];

    // post sentences: exactly the changed attributes, described post-action
    let mut post_parts: [Vec<String>; 2] = [Vec::new(), Vec::new()];
    for (o, change) in t.post.iter().zip(&changes) {
        if change.is_empty() {
            continue;
        }
        let name = o.type_name(schema).to_lowercase();
        let mut clauses: [Vec<String>; 2] = [Vec::new(), Vec::new()];
        for (ai, spec) in schema.iter().enumerate() {
            if !change.contains(&spec.name) {
                continue;
            }
            let bank = match lexicon.post.get(&spec.name) {
                Some(b) => b,
                None => continue,
            };
            let value = spec.token(o.index(ai)).to_lowercase();
            let c = picker.pick(8);
            for r in 0..2 {
                if let Some(p) = phrase_for(bank, &value, c, r) {
                    clauses[r].push(p);
                }
            }
        }
        for r in 0..2 {
            if !clauses[r].is_empty() {
                post_parts[r].push(join_clauses(&name, &clauses[r]));
            }
        }
    }
    let s_post = if post_parts[0].is_empty() {
        let c = picker.pick(lexicon.no_change.len());
        [0usize, 1].map(|r| {
            lexicon.no_change[(c + r) % lexicon.no_change.len().max(1)].clone()
        })
    } else {
        [post_parts[0].join(" "), post_parts[1].join(" ")]
    };

    SentenceSet {
        s_pre,
        s_action,
        s_post,
    }
}

fn match_clause(
    clause: &str,
    schema: &AttributeSchema,
    lexicon: &Lexicon,
) -> Option<(String, String)> {
    // exact per-value phrases first
    for spec in schema.iter() {
        if let Some(bank) = lexicon.post.get(&spec.name) {
            for (value, phrases) in bank {
                if value == "*" {
                    continue;
                }
                if phrases.iter().any(|p| p == clause) {
                    return Some((spec.name.clone(), value.clone()));
                }
            }
        }
    }
    // wildcard patterns with a vocabulary-validated slot
    for (ai, spec) in schema.iter().enumerate() {
        let _ = ai;
        if let Some(bank) = lexicon.post.get(&spec.name) {
            if let Some(patterns) = bank.get("*") {
                for pat in patterns {
                    let (prefix, suffix) = match pat.split_once("{v}") {
                        Some(x) => x,
                        None => continue,
                    };
                    if clause.len() > prefix.len() + suffix.len()
                        && clause.starts_with(prefix)
                        && clause.ends_with(suffix)
                    {
                        let v = &clause[prefix.len()..clause.len() - suffix.len()];
                        if spec.index_of_lower(v).is_some() {
                            return Some((spec.name.clone(), v.to_string()));
                        }
                    }
                }
            }
        }
    }
    None
}

/// Recovers the per-object changed-attribute map from a post sentence.
/// Returns `None` when the sentence does not parse under the lexicon (an
/// unknown subject, or any clause outside the phrase banks).
pub fn parse_post_change_map(
    text: &str,
    key_names_lower: &[String],
    schema: &AttributeSchema,
    lexicon: &Lexicon,
) -> Option<ChangeMap> {
    let text = text.trim().to_lowercase();
    let normalized = text.trim_end_matches(char::is_whitespace);
    if lexicon
        .no_change
        .iter()
        .any(|s| s.trim_end_matches('.') == normalized.trim_end_matches('.'))
    {
        return Some(ChangeMap::new());
    }
    let mut map = ChangeMap::new();
    for sentence in normalized.split('.') {
        let sentence = sentence.trim();
        if sentence.is_empty() {
            continue;
        }
        let rest = sentence.strip_prefix("the ")?;
        let (name, rest) = rest.split_once(' ')?;
        if !key_names_lower.iter().any(|n| n == name) {
            return None;
        }
        // clause list: "a", "a and b", or "a, b and c"
        let mut clauses: Vec<&str> = Vec::new();
        let mut pieces: Vec<&str> = rest.split(", ").collect();
        let last = pieces.pop()?;
        clauses.extend(pieces);
        match last.split_once(" and ") {
            Some((x, y)) => {
                clauses.push(x);
                clauses.push(y);
            }
            None => clauses.push(last),
        }
        let entry = map.entry(name.to_string()).or_default();
        for clause in clauses {
            let (attr, value) = match_clause(clause.trim(), schema, lexicon)?;
            entry.insert(attr, value);
        }
    }
    Some(map)
}

/// The gold change map of a transition, in the same shape the parser returns.
pub fn gold_change_map(t: &Transition, schema: &AttributeSchema) -> ChangeMap {
    let mut map = ChangeMap::new();
    for (o, change) in t.post.iter().zip(t.change_sets(schema)) {
        if change.is_empty() {
            continue;
        }
        let name = o.type_name(schema).to_lowercase();
        let entry: &mut BTreeMap<String, String> = map.entry(name).or_default();
        for attr in change {
            let ai = schema.index_of(&attr).expect("diff attr in schema");
            entry.insert(attr, schema.spec(ai).token(o.index(ai)).to_lowercase());
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{builtin_catalog, builtin_schema, Action, ObjectState};

    fn throw_transition() -> Transition {
        let schema = builtin_schema();
        let catalog = builtin_catalog();
        let mut vase =
            ObjectState::from_type(catalog.get("Vase").unwrap(), schema, "vase").unwrap();
        vase.set_bool(schema, "isPickedUp", true).unwrap();
        let sofa = ObjectState::from_type(catalog.get("Sofa").unwrap(), schema, "sofa").unwrap();
        let mut vase_post = vase.clone();
        vase_post.set_bool(schema, "isPickedUp", false).unwrap();
        vase_post.set_bool(schema, "isBroken", true).unwrap();
        vase_post.set_token(schema, "distance", "3 to 4ft").unwrap();
        Transition {
            pre: vec![vase, sofa.clone()],
            action: Action::throw("vase", None, 100),
            post: vec![vase_post, sofa],
            sentences: None,
        }
    }

    #[test]
    fn rendering_is_deterministic_and_references_differ() {
        let schema = builtin_schema();
        let lex = builtin_lexicon();
        let t = throw_transition();
        let a = render_sentences(&t, 7, schema, lex);
        let b = render_sentences(&t, 7, schema, lex);
        assert_eq!(a, b);
        assert_ne!(a.s_action[0], a.s_action[1]);
        assert_ne!(a.s_post[0], a.s_post[1]);
        let c = render_sentences(&t, 8, schema, lex);
        assert!(a != c || a.s_action == c.s_action);
    }

    #[test]
    fn post_sentences_parse_back_to_the_gold_change_map() {
        let schema = builtin_schema();
        let lex = builtin_lexicon();
        let t = throw_transition();
        let names = vec!["vase".to_string(), "sofa".to_string()];
        for seed in 0..20u64 {
            let s = render_sentences(&t, seed, schema, lex);
            for r in 0..2 {
                let parsed = parse_post_change_map(&s.s_post[r], &names, schema, lex)
                    .unwrap_or_else(|| panic!("unparseable: {:?}", s.s_post[r]));
                assert_eq!(parsed, gold_change_map(&t, schema), "{:?}", s.s_post[r]);
            }
        }
    }

    #[test]
    fn padded_object_is_not_mentioned_in_post() {
        let schema = builtin_schema();
        let lex = builtin_lexicon();
        let t = throw_transition();
        let s = render_sentences(&t, 3, schema, lex);
        assert!(!s.s_post[0].contains("sofa"), "{:?}", s.s_post[0]);
        assert!(s.s_pre[0].contains("sofa"));
    }

    #[test]
    fn zero_change_transition_renders_no_change_family() {
        let schema = builtin_schema();
        let lex = builtin_lexicon();
        let mut t = throw_transition();
        t.post = t.pre.clone();
        let s = render_sentences(&t, 5, schema, lex);
        assert!(lex.no_change.contains(&s.s_post[0]), "{:?}", s.s_post[0]);
        let parsed =
            parse_post_change_map(&s.s_post[0], &["vase".to_string()], schema, lex).unwrap();
        assert!(parsed.is_empty());
    }

    #[test]
    fn unparseable_text_returns_none() {
        let schema = builtin_schema();
        let lex = builtin_lexicon();
        let names = vec!["vase".to_string()];
        assert!(parse_post_change_map("the vase explodes wildly.", &names, schema, lex).is_none());
        assert!(parse_post_change_map("the ghost is now broken.", &names, schema, lex).is_none());
    }

    #[test]
    fn filled_mug_emptied_parses_to_single_change() {
        let schema = builtin_schema();
        let catalog = builtin_catalog();
        let lex = builtin_lexicon();
        let mut mug = ObjectState::from_type(catalog.get("Mug").unwrap(), schema, "mug").unwrap();
        mug.set_bool(schema, "isFilledWithLiquid", true).unwrap();
        mug.set_bool(schema, "isPickedUp", true).unwrap();
        let mut post = mug.clone();
        post.set_bool(schema, "isFilledWithLiquid", false).unwrap();
        let t = Transition {
            pre: vec![mug],
            action: Action::unary(ActionType::EmptyLiquidFromObject, "mug"),
            post: vec![post],
            sentences: None,
        };
        let s = render_sentences(&t, 0, schema, lex);
        let parsed =
            parse_post_change_map(&s.s_post[0], &["mug".to_string()], schema, lex).unwrap();
        assert_eq!(
            parsed["mug"]["isFilledWithLiquid"],
            "false".to_string(),
            "{:?}",
            s.s_post[0]
        );
        assert_eq!(parsed["mug"].len(), 1);
    }
}
