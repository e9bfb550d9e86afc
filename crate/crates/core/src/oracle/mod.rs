//! Seeded trajectory generation, transition extraction, and dataset assembly.

mod generators;
mod scene;

pub use generators::{generator_applicable, run_generator, GeneratorKind};
pub use scene::sample_scene;

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{builtin_lexicon, render_sentences, Lexicon};
use crate::config::{config_hash, derive_seed, Scale};
use crate::error::OracleError;
use crate::physics::{apply_action, PhysicsConfig};
use crate::world::{select_key_objects, Action, AttributeSchema, Catalog, Transition, WorldState};

/// One oracle step: the action taken, whether its preconditions held, and
/// the world afterwards (unchanged when they did not).
#[derive(Debug, Clone)]
pub struct TrajStep {
    pub action: Action,
    pub ok: bool,
    pub world: WorldState,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub initial_world: WorldState,
    pub steps: Vec<TrajStep>,
    pub generator_kind: String,
    pub seed: u64,
}

impl Trajectory {
    /// Replays every step and checks the stored worlds match.
    pub fn replay_ok(
        &self,
        schema: &AttributeSchema,
        catalog: &Catalog,
        rules: &PhysicsConfig,
    ) -> bool {
        let mut prev = self.initial_world.clone();
        for step in &self.steps {
            match apply_action(&prev, &step.action, rules, schema, catalog) {
                Ok(out) => {
                    if out.ok != step.ok || out.world != step.world {
                        return false;
                    }
                    prev = out.world;
                }
                Err(_) => return false,
            }
        }
        true
    }
}

fn key_states(world: &WorldState, keys: &[String]) -> Vec<crate::world::ObjectState> {
    keys.iter()
        .filter_map(|k| world.get(k).cloned())
        .collect()
}

/// One transition per step where at least one object changed state; steps
/// with failed preconditions or no changes are skipped.
pub fn extract_transitions(traj: &Trajectory, _schema: &AttributeSchema) -> Vec<Transition> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(traj.seed, "keys", 0));
    let mut out = Vec::new();
    let mut prev = &traj.initial_world;
    for step in &traj.steps {
        if step.ok && step.world != *prev {
            let keys = select_key_objects(prev, &step.world, &step.action, &mut rng);
            if !keys.is_empty() {
                out.push(Transition {
                    pre: key_states(prev, &keys),
                    action: step.action.clone(),
                    post: key_states(&step.world, &keys),
                    sentences: None,
                });
            }
        }
        prev = &step.world;
    }
    out
}

/// Identity transitions from failed-precondition steps (pre equals post);
/// used to teach the no-change case in the annotated training split.
pub fn extract_identity_transitions(
    traj: &Trajectory,
    schema: &AttributeSchema,
) -> Vec<Transition> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(traj.seed, "idkeys", 0));
    let mut out = Vec::new();
    let mut prev = &traj.initial_world;
    let _ = schema;
    for step in &traj.steps {
        if !step.ok {
            let keys = select_key_objects(prev, &step.world, &step.action, &mut rng);
            // only keep identities whose arguments exist in the world
            if !keys.is_empty() && step.action.args().all(|a| prev.get(a).is_some()) {
                out.push(Transition {
                    pre: key_states(prev, &keys),
                    action: step.action.clone(),
                    post: key_states(&step.world, &keys),
                    sentences: None,
                });
            }
        }
        prev = &step.world;
    }
    out
}

/// The 30 object types excluded from paired environment-language training.
pub fn default_unseen_types() -> Vec<String> {
    [
        "Mug",
        "Toaster",
        "Sink",
        "Microwave",
        "AlarmClock",
        "BaseballBat",
        "Boots",
        "CD",
        "CreditCard",
        "Curtains",
        "DogBed",
        "Dumbbell",
        "Footstool",
        "GarbageBag",
        "HandTowel",
        "KeyChain",
        "Ladle",
        "LaundryHamper",
        "Newspaper",
        "Ottoman",
        "Painting",
        "PepperShaker",
        "Plunger",
        "RemoteControl",
        "SaltShaker",
        "ScrubBrush",
        "SprayBottle",
        "TeddyBear",
        "TennisRacket",
        "Watch",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub seed: u64,
    pub scale: Scale,
    /// Trajectories feeding the unpaired dynamics-pretraining pool.
    pub pretrain_trajectories: usize,
    /// Disjoint trajectories feeding the annotated (paired) splits.
    pub annotated_trajectories: usize,
    /// Held-out transitions (seen objects only) for dynamics evaluation.
    pub pretrain_val: usize,
    pub annotated_train: usize,
    pub annotated_val: usize,
    pub annotated_test: usize,
    /// Fraction of the annotated training split drawn from identity
    /// (no-change) transitions.
    pub identity_train_fraction: f64,
    pub unseen_types: Vec<String>,
    pub threads: usize,
}

impl DatasetConfig {
    pub fn desk(seed: u64) -> Self {
        Self {
            seed,
            scale: Scale::Desk,
            pretrain_trajectories: 5200,
            annotated_trajectories: 1600,
            pretrain_val: 1000,
            annotated_train: 2000,
            annotated_val: 500,
            annotated_test: 1000,
            identity_train_fraction: 0.08,
            unseen_types: default_unseen_types(),
            threads: 1,
        }
    }

    pub fn paper(seed: u64) -> Self {
        Self {
            seed,
            scale: Scale::Paper,
            pretrain_trajectories: 20000,
            annotated_trajectories: 3000,
            pretrain_val: 2000,
            annotated_train: 500,
            annotated_val: 500,
            annotated_test: 1000,
            identity_train_fraction: 0.08,
            unseen_types: default_unseen_types(),
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub config: DatasetConfig,
    pub config_hash: String,
    pub counts: BTreeMap<String, usize>,
    pub action_histograms: BTreeMap<String, BTreeMap<String, usize>>,
    pub generator_histogram: BTreeMap<String, usize>,
    pub unseen_types: Vec<String>,
    pub balance_notes: Vec<String>,
}

#[derive(Debug)]
pub struct DatasetSplit {
    pub pretrain_train: Vec<Transition>,
    pub pretrain_val: Vec<Transition>,
    pub train: Vec<Transition>,
    pub val: Vec<Transition>,
    pub test: Vec<Transition>,
    pub unseen_types: BTreeSet<String>,
    pub manifest: DatasetManifest,
}

pub fn action_histogram(ts: &[Transition]) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for t in ts {
        *h.entry(t.action.action_type.name().to_string()).or_insert(0) += 1;
    }
    h
}

fn has_unseen_key(t: &Transition, unseen: &BTreeSet<String>, schema: &AttributeSchema) -> bool {
    t.pre.iter().any(|o| unseen.contains(o.type_name(schema)))
}

fn generate_batch(
    base_seed: u64,
    tag: &str,
    count: usize,
    threads: usize,
    schema: &AttributeSchema,
    catalog: &Catalog,
    rules: &PhysicsConfig,
) -> Vec<Trajectory> {
    let gen_one = |i: u64| -> Option<Trajectory> {
        let sd = derive_seed(base_seed, tag, i);
        let mut rng = ChaCha8Rng::seed_from_u64(sd);
        let world = sample_scene(schema, catalog, &mut rng);
        let kinds: Vec<GeneratorKind> = GeneratorKind::ALL
            .iter()
            .copied()
            .filter(|k| generator_applicable(*k, &world, schema, catalog).is_none())
            .collect();
        if kinds.is_empty() {
            return None;
        }
        for attempt in 0..3u64 {
            let kind = kinds[rng.random_range(0..kinds.len())];
            let gen_seed = derive_seed(sd, "gen", attempt);
            if let Ok(t) = run_generator(kind, &world, gen_seed, schema, catalog, rules) {
                return Some(t);
            }
        }
        None
    };
    if threads <= 1 {
        return (0..count as u64).filter_map(gen_one).collect();
    }
    // fixed-chunk fan-out with in-order merge keeps results independent of
    // the thread count
    let indices: Vec<u64> = (0..count as u64).collect();
    let chunk = count.div_ceil(threads).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = indices
            .chunks(chunk)
            .map(|ids| {
                let ids = ids.to_vec();
                s.spawn(move || ids.into_iter().filter_map(gen_one).collect::<Vec<_>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("generation thread"))
            .collect()
    })
}

/// Draws up to `n` transitions from `pool`, balancing action types toward
/// uniform; returns the sample, the untouched remainder, and any relaxation
/// notes for types that ran short.
fn balanced_sample(
    pool: Vec<Transition>,
    n: usize,
    rng: &mut ChaCha8Rng,
    notes: &mut Vec<String>,
    label: &str,
) -> (Vec<Transition>, Vec<Transition>) {
    let mut buckets: BTreeMap<String, Vec<Transition>> = BTreeMap::new();
    for t in pool {
        buckets
            .entry(t.action.action_type.name().to_string())
            .or_default()
            .push(t);
    }
    for b in buckets.values_mut() {
        b.shuffle(rng);
    }
    let mut selected = Vec::with_capacity(n);
    while selected.len() < n {
        let mut advanced = false;
        for b in buckets.values_mut() {
            if selected.len() >= n {
                break;
            }
            if let Some(t) = b.pop() {
                selected.push(t);
                advanced = true;
            }
        }
        if !advanced {
            notes.push(format!(
                "{label}: pool exhausted at {} of {} requested",
                selected.len(),
                n
            ));
            break;
        }
    }
    let target = n / buckets.len().max(1);
    let hist = action_histogram(&selected);
    for (name, got) in &hist {
        if *got + (*got / 5).max(1) < target {
            notes.push(format!(
                "{label}: action {name} underfilled ({got} of ~{target})"
            ));
        }
    }
    selected.shuffle(rng);
    let rest = buckets.into_values().flatten().collect();
    (selected, rest)
}

fn render_split(
    ts: &mut [Transition],
    tag: &str,
    seed: u64,
    schema: &AttributeSchema,
    lexicon: &Lexicon,
) {
    for (i, t) in ts.iter_mut().enumerate() {
        t.sentences = Some(render_sentences(
            t,
            derive_seed(seed, tag, i as u64),
            schema,
            lexicon,
        ));
    }
}

/// Builds the full dataset: a pretraining pool plus balanced, sentence-
/// annotated train/val/test splits with the unseen-object holdout applied to
/// the training split. Deterministic given the config.
pub fn build_dataset(
    config: &DatasetConfig,
    schema: &AttributeSchema,
    catalog: &Catalog,
    rules: &PhysicsConfig,
) -> Result<DatasetSplit, OracleError> {
    let lexicon = builtin_lexicon();
    let unseen: BTreeSet<String> = config.unseen_types.iter().cloned().collect();
    for u in &unseen {
        if !catalog.contains(u) {
            return Err(OracleError::Dataset(format!(
                "unseen type {u} not in catalog"
            )));
        }
    }
    let mut notes = Vec::new();
    let mut generator_histogram = BTreeMap::new();

    // pretraining pool (unpaired)
    let pretrain_trajs = generate_batch(
        config.seed,
        "pretrain",
        config.pretrain_trajectories,
        config.threads,
        schema,
        catalog,
        rules,
    );
    for t in &pretrain_trajs {
        *generator_histogram.entry(t.generator_kind.clone()).or_insert(0) += 1;
    }
    let mut pool: Vec<Transition> = pretrain_trajs
        .iter()
        .flat_map(|t| extract_transitions(t, schema))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "split", 0));
    pool.shuffle(&mut rng);
    let mut pretrain_val = Vec::with_capacity(config.pretrain_val);
    let mut pretrain_train = Vec::new();
    for t in pool {
        if pretrain_val.len() < config.pretrain_val && !has_unseen_key(&t, &unseen, schema) {
            pretrain_val.push(t);
        } else {
            pretrain_train.push(t);
        }
    }
    if pretrain_val.len() < config.pretrain_val {
        notes.push(format!(
            "pretrain_val: only {} seen-object transitions available",
            pretrain_val.len()
        ));
    }

    // annotated pool (trajectory-disjoint from pretraining)
    let annotated_trajs = generate_batch(
        config.seed,
        "annotated",
        config.annotated_trajectories,
        config.threads,
        schema,
        catalog,
        rules,
    );
    for t in &annotated_trajs {
        *generator_histogram.entry(t.generator_kind.clone()).or_insert(0) += 1;
    }
    let mut annotated: Vec<Transition> = annotated_trajs
        .iter()
        .flat_map(|t| extract_transitions(t, schema))
        .collect();
    let mut identities: Vec<Transition> = annotated_trajs
        .iter()
        .flat_map(|t| extract_identity_transitions(t, schema))
        .collect();
    annotated.shuffle(&mut rng);
    identities.shuffle(&mut rng);

    // train: seen-only, with an identity share
    let train_seen: Vec<Transition> = annotated
        .iter()
        .filter(|t| !has_unseen_key(t, &unseen, schema))
        .cloned()
        .collect();
    let identity_n = ((config.annotated_train as f64) * config.identity_train_fraction).round()
        as usize;
    let changed_n = config.annotated_train.saturating_sub(identity_n);
    let (mut train, _) = balanced_sample(train_seen, changed_n, &mut rng, &mut notes, "train");
    let mut id_used = 0;
    for t in identities {
        if id_used >= identity_n {
            break;
        }
        if !has_unseen_key(&t, &unseen, schema) {
            train.push(t);
            id_used += 1;
        }
    }
    if id_used < identity_n {
        notes.push(format!(
            "train: only {id_used} of {identity_n} identity transitions available"
        ));
    }
    train.shuffle(&mut rng);

    // val/test from transitions not used for training (identity-free)
    let train_keys: BTreeSet<String> = train
        .iter()
        .map(|t| serde_json::to_string(&t.to_json(schema)).expect("serializes"))
        .collect();
    let eval_pool: Vec<Transition> = annotated
        .into_iter()
        .filter(|t| {
            let key = serde_json::to_string(&t.to_json(schema)).expect("serializes");
            !train_keys.contains(&key)
        })
        .collect();
    let (val, rest) = balanced_sample(eval_pool, config.annotated_val, &mut rng, &mut notes, "val");
    let (test, _) = balanced_sample(rest, config.annotated_test, &mut rng, &mut notes, "test");

    let mut split = DatasetSplit {
        pretrain_train,
        pretrain_val,
        train,
        val,
        test,
        unseen_types: unseen.clone(),
        manifest: DatasetManifest {
            schema_version: schema.schema_version,
            config: config.clone(),
            config_hash: config_hash(config),
            counts: BTreeMap::new(),
            action_histograms: BTreeMap::new(),
            generator_histogram,
            unseen_types: config.unseen_types.clone(),
            balance_notes: notes,
        },
    };
    render_split(&mut split.train, "sent-train", config.seed, schema, lexicon);
    render_split(&mut split.val, "sent-val", config.seed, schema, lexicon);
    render_split(&mut split.test, "sent-test", config.seed, schema, lexicon);

    for (name, ts) in [
        ("pretrain_train", &split.pretrain_train),
        ("pretrain_val", &split.pretrain_val),
        ("train", &split.train),
        ("val", &split.val),
        ("test", &split.test),
    ] {
        split.manifest.counts.insert(name.to_string(), ts.len());
        split
            .manifest
            .action_histograms
            .insert(name.to_string(), action_histogram(ts));
    }
    Ok(split)
}

const SPLIT_NAMES: [&str; 5] = ["pretrain_train", "pretrain_val", "train", "val", "test"];

/// Writes one JSONL file per split plus `manifest.json`.
pub fn write_dataset(
    split: &DatasetSplit,
    dir: &Path,
    schema: &AttributeSchema,
) -> Result<(), OracleError> {
    std::fs::create_dir_all(dir)?;
    let seed = split.manifest.config.seed;
    for (name, ts) in [
        ("pretrain_train", &split.pretrain_train),
        ("pretrain_val", &split.pretrain_val),
        ("train", &split.train),
        ("val", &split.val),
        ("test", &split.test),
    ] {
        let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{name}.jsonl")))?);
        for t in ts {
            let mut v = t.to_json(schema);
            v["split"] = serde_json::Value::String(name.to_string());
            v["seed"] = serde_json::Value::from(seed);
            writeln!(f, "{}", serde_json::to_string(&v)?)?;
        }
    }
    let manifest = serde_json::to_string_pretty(&split.manifest)?;
    std::fs::write(dir.join("manifest.json"), manifest)?;
    Ok(())
}

pub fn load_manifest(dir: &Path) -> Result<DatasetManifest, OracleError> {
    let text = std::fs::read_to_string(dir.join("manifest.json"))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_split_file(
    dir: &Path,
    name: &str,
    schema: &AttributeSchema,
) -> Result<Vec<Transition>, OracleError> {
    let f = std::fs::File::open(dir.join(format!("{name}.jsonl")))?;
    let reader = std::io::BufReader::new(f);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(&line)?;
        out.push(Transition::from_json(&v, schema).map_err(OracleError::World)?);
    }
    Ok(out)
}

pub fn load_dataset(dir: &Path, schema: &AttributeSchema) -> Result<DatasetSplit, OracleError> {
    let manifest = load_manifest(dir)?;
    let mut parts: Vec<Vec<Transition>> = Vec::new();
    for name in SPLIT_NAMES {
        parts.push(load_split_file(dir, name, schema)?);
    }
    let test = parts.pop().expect("five splits");
    let val = parts.pop().expect("five splits");
    let train = parts.pop().expect("five splits");
    let pretrain_val = parts.pop().expect("five splits");
    let pretrain_train = parts.pop().expect("five splits");
    Ok(DatasetSplit {
        pretrain_train,
        pretrain_val,
        train,
        val,
        test,
        unseen_types: manifest.unseen_types.iter().cloned().collect(),
        manifest,
    })
}
