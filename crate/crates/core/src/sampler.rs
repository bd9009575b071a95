//! Seeded sampling of valid initial states and executable programs.
//!
//! Programs are built state-conditioned: at every step the sampler computes the
//! set of functions that have at least one executable parameterization in the
//! current simulated state, picks one of them uniformly, then picks uniformly
//! among that function's executable parameter tuples and applies it. Emitted
//! programs therefore always execute from their initial state.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use arrayvec::ArrayVec;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::{apply_alchemy, apply_entity, apply_scene, apply_tangrams};
use crate::program::{
    Actions, AlchemyAction, Amount, BeakerRef, EntityAction, Program, SceneAction, TangramsAction,
};
use crate::state::{
    AlchemyState, Beaker, Color, Domain, EntityState, EnvState, Location, Person, SceneState, Span, TangramObject,
    TangramsState, ALCHEMY_BEAKERS, BEAKER_CAPACITY, SCENE_POSITIONS, TANGRAMS_SLOTS,
};

/// Deterministic random stream for `(seed, stream)`.
///
/// ChaCha8 output is specified independently of platform, so identical
/// `(seed, stream)` pairs give identical draws everywhere.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SampleError {
    Config(String),
    DeadEnd,
    RetryExhausted { attempts: u32 },
}

impl fmt::Display for SampleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleError::Config(m) => write!(f, "invalid sampler config: {m}"),
            SampleError::DeadEnd => write!(f, "no function has a valid parameterization"),
            SampleError::RetryExhausted { attempts } => write!(f, "gave up after {attempts} attempts"),
        }
    }
}

impl std::error::Error for SampleError {}

const PROPARA_ENTITIES: &[&str] = &[
    "water", "light", "carbon dioxide", "oxygen", "sugar", "seed", "plant", "rock", "sediment", "magma", "lava",
    "energy", "bacteria", "blood", "air", "ice", "rain", "nutrients", "glucose", "fossil", "spores", "minerals",
];
const PROPARA_LOCATIONS: &[&str] = &[
    "soil", "sun", "cloud", "leaf", "root", "air", "ocean", "river", "ground", "plant", "cell", "bladder", "stomach",
    "lung", "sky", "mountain", "sea", "atmosphere", "volcano", "stream", "kidney", "body",
];
const RECIPES_ENTITIES: &[&str] = &[
    "beef", "pepper", "onion", "garlic", "butter", "flour", "sugar", "egg", "milk", "salt", "rice", "chicken", "potato",
    "tomato", "cheese", "water", "oil", "carrot", "noodles", "cream",
];
const RECIPES_LOCATIONS: &[&str] = &[
    "oven", "pan", "bowl", "pot", "skillet", "plate", "baking dish", "cutting board", "refrigerator", "saucepan",
    "grill", "mixer", "stove", "sink", "blender", "tray",
];

/// Sampling distributions. Serializes as a flat key-value document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub program_length_min: usize,
    pub program_length_max: usize,
    /// Every unit of a sampled beaker shares one color.
    pub alchemy_homogeneous: bool,
    pub alchemy_fill_prob: f64,
    pub scene_occupancy_prob: f64,
    /// Probability of a hat, given the position is occupied.
    pub scene_hat_prob: f64,
    pub tangrams_length_min: usize,
    pub tangrams_length_max: usize,
    pub entity_count_min: usize,
    pub entity_count_max: usize,
    pub entity_vocab: Vec<String>,
    pub location_vocab: Vec<String>,
    /// Bound on rejected draws (holdout hits, dead ends) per example.
    pub max_retries: u32,
    /// Rendered initial states that must never be emitted.
    #[serde(skip)]
    pub holdout_states: HashSet<String>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            program_length_min: 1,
            program_length_max: 5,
            alchemy_homogeneous: true,
            alchemy_fill_prob: 0.75,
            scene_occupancy_prob: 0.5,
            scene_hat_prob: 0.5,
            tangrams_length_min: 1,
            tangrams_length_max: TANGRAMS_SLOTS,
            entity_count_min: 2,
            entity_count_max: 6,
            entity_vocab: vec![],
            location_vocab: vec![],
            max_retries: 1000,
            holdout_states: HashSet::new(),
        }
    }
}

impl SamplerConfig {
    /// Defaults, with the built-in vocabularies for entity domains.
    pub fn for_domain(domain: Domain) -> Self {
        let (entities, locations): (&[&str], &[&str]) = match domain {
            Domain::Recipes => (RECIPES_ENTITIES, RECIPES_LOCATIONS),
            _ => (PROPARA_ENTITIES, PROPARA_LOCATIONS),
        };
        let mut cfg = Self::default();
        if domain.is_entity() {
            cfg.entity_vocab = entities.iter().map(|s| s.to_string()).collect();
            cfg.location_vocab = locations.iter().map(|s| s.to_string()).collect();
        }
        cfg
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Reads `key = value` lines over the domain defaults; absent keys keep their default.
    pub fn from_kv_str(domain: Domain, text: &str) -> Result<Self, SampleError> {
        let overrides: toml::Table = text.parse().map_err(|e| SampleError::Config(format!("{e}")))?;
        let base = toml::Table::try_from(Self::for_domain(domain)).map_err(|e| SampleError::Config(e.to_string()))?;
        let mut merged = base;
        for (k, v) in overrides {
            if !merged.contains_key(&k) {
                return Err(SampleError::Config(format!("unknown key `{k}`")));
            }
            merged.insert(k, v);
        }
        merged.try_into().map_err(|e: toml::de::Error| SampleError::Config(e.to_string()))
    }

    pub fn to_kv_string(&self) -> String {
        toml::to_string(self).expect("config is plain data")
    }

    pub fn validate(&self, domain: Domain) -> Result<(), SampleError> {
        let bad = |m: String| Err(SampleError::Config(m));
        if self.program_length_min == 0 || self.program_length_min > self.program_length_max {
            return bad(format!(
                "program length range {}..={} is empty or starts at 0",
                self.program_length_min, self.program_length_max
            ));
        }
        for (name, p) in [
            ("alchemy_fill_prob", self.alchemy_fill_prob),
            ("scene_occupancy_prob", self.scene_occupancy_prob),
            ("scene_hat_prob", self.scene_hat_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if self.tangrams_length_min > self.tangrams_length_max || self.tangrams_length_max > TANGRAMS_SLOTS {
            return bad(format!(
                "tangrams length range {}..={} is not within 0..={TANGRAMS_SLOTS}",
                self.tangrams_length_min, self.tangrams_length_max
            ));
        }
        if domain.is_entity() {
            if self.entity_count_min > self.entity_count_max {
                return bad("entity count range is empty".into());
            }
            if self.entity_vocab.is_empty() || self.location_vocab.is_empty() {
                return bad("entity domains need non-empty entity and location vocabularies".into());
            }
            let distinct: HashSet<&String> = self.entity_vocab.iter().collect();
            if self.entity_count_max > distinct.len() {
                return bad(format!(
                    "entity_count_max {} exceeds the {} distinct vocabulary entries",
                    self.entity_count_max,
                    distinct.len()
                ));
            }
        }
        Ok(())
    }
}

/// One span per line; blank lines are skipped.
pub fn load_vocab(path: &Path) -> std::io::Result<Vec<String>> {
    let text = std::fs::read_to_string(path)?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

/// Validated view over a [`SamplerConfig`] for one domain.
#[derive(Debug, Clone)]
pub struct Sampler<'a> {
    domain: Domain,
    cfg: &'a SamplerConfig,
    entities: Vec<Span>,
    locations: Vec<Span>,
    initial_states: Option<&'a [EnvState]>,
}

/// A sampled `(initial state, program, goal state)` triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub init: EnvState,
    pub program: Program,
    pub goal: EnvState,
}

fn spans(words: &[String]) -> Result<Vec<Span>, SampleError> {
    let mut out: Vec<Span> = Vec::with_capacity(words.len());
    for w in words {
        let s = Span::new(w.as_str()).map_err(SampleError::Config)?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(out)
}

impl<'a> Sampler<'a> {
    pub fn new(domain: Domain, cfg: &'a SamplerConfig) -> Result<Self, SampleError> {
        cfg.validate(domain)?;
        let (entities, locations) = if domain.is_entity() {
            (spans(&cfg.entity_vocab)?, spans(&cfg.location_vocab)?)
        } else {
            (vec![], vec![])
        };
        Ok(Self {
            domain,
            cfg,
            entities,
            locations,
            initial_states: None,
        })
    }

    /// Draw initial states uniformly from `states` instead of sampling them.
    pub fn with_initial_states(mut self, states: &'a [EnvState]) -> Result<Self, SampleError> {
        if states.is_empty() {
            return Err(SampleError::Config("initial state pool is empty".into()));
        }
        if let Some(s) = states.iter().find(|s| s.domain() != self.domain) {
            return Err(SampleError::Config(format!("pool holds a {} state", s.domain())));
        }
        self.initial_states = Some(states);
        Ok(self)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn config(&self) -> &SamplerConfig {
        self.cfg
    }

    pub fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> EnvState {
        if let Some(pool) = self.initial_states {
            return pool[rng.gen_range(0..pool.len())].clone();
        }
        let cfg = self.cfg;
        match self.domain {
            Domain::Alchemy => {
                let mut beakers: [Beaker; ALCHEMY_BEAKERS] = Default::default();
                for beaker in &mut beakers {
                    if !rng.gen_bool(cfg.alchemy_fill_prob) {
                        continue;
                    }
                    let amount = rng.gen_range(1..=BEAKER_CAPACITY);
                    let color = *Color::ALL.choose(rng).unwrap();
                    for _ in 0..amount {
                        let unit = if cfg.alchemy_homogeneous { color } else { *Color::ALL.choose(rng).unwrap() };
                        beaker.push(unit);
                    }
                }
                EnvState::Alchemy(AlchemyState::from_units(beakers.iter().map(|b| b.as_slice())).unwrap())
            }
            Domain::Scene => {
                let mut slots = [None; SCENE_POSITIONS];
                for slot in &mut slots {
                    if rng.gen_bool(cfg.scene_occupancy_prob) {
                        let shirt = *Color::ALL.choose(rng).unwrap();
                        let hat = rng.gen_bool(cfg.scene_hat_prob).then(|| *Color::ALL.choose(rng).unwrap());
                        *slot = Some(Person { shirt, hat });
                    }
                }
                EnvState::Scene(SceneState::from_slots(slots))
            }
            Domain::Tangrams => {
                let len = rng.gen_range(cfg.tangrams_length_min..=cfg.tangrams_length_max);
                let mut objects = TangramObject::ALL;
                objects.shuffle(rng);
                EnvState::Tangrams(TangramsState::new(&objects[..len]).unwrap())
            }
            Domain::ProPara | Domain::Recipes => {
                let n = rng.gen_range(cfg.entity_count_min..=cfg.entity_count_max);
                let names = self.entities.choose_multiple(rng, n);
                let entries = names
                    .map(|name| {
                        let loc = match rng.gen_range(0..3) {
                            0 => Location::NonExistent,
                            1 => Location::Unknown,
                            _ => Location::Named(self.locations.choose(rng).unwrap().clone()),
                        };
                        (name.clone(), loc)
                    })
                    .collect();
                EnvState::from_entity(self.domain, EntityState::new(entries).unwrap()).unwrap()
            }
        }
    }

    /// Samples a program executable from `state`, returning it with the state it leads to.
    ///
    /// When the simulated state runs out of valid actions before the drawn
    /// length is reached, the program ends early; if not even one action is
    /// possible the result is [`SampleError::DeadEnd`].
    pub fn sample_program_with_goal<R: Rng + ?Sized>(
        &self,
        state: &EnvState,
        rng: &mut R,
    ) -> Result<(Program, EnvState), SampleError> {
        if state.domain() != self.domain {
            return Err(SampleError::Config(format!(
                "{} sampler given a {} state",
                self.domain,
                state.domain()
            )));
        }
        let len = rng.gen_range(self.cfg.program_length_min..=self.cfg.program_length_max);
        let (actions, goal) = match state {
            EnvState::Alchemy(s) => {
                let (a, s) = build(s, len, rng, |s, r| pick(&AlchemySpace::new(s), r), apply_alchemy);
                (Actions::Alchemy(a), EnvState::Alchemy(s))
            }
            EnvState::Scene(s) => {
                let (a, s) = build(s, len, rng, |s, r| pick(&SceneSpace::new(s), r), apply_scene);
                (Actions::Scene(a), EnvState::Scene(s))
            }
            EnvState::Tangrams(s) => {
                let (a, s) = build(s, len, rng, |s, r| pick(&TangramsSpace::new(s), r), apply_tangrams);
                (Actions::Tangrams(a), EnvState::Tangrams(s))
            }
            EnvState::ProPara(s) => {
                let (a, s) = build(s, len, rng, |s, r| pick(&EntitySpace::new(s, &self.locations), r), apply_entity);
                (Actions::ProPara(a), EnvState::ProPara(s))
            }
            EnvState::Recipes(s) => {
                let (a, s) = build(s, len, rng, |s, r| pick(&EntitySpace::new(s, &self.locations), r), apply_entity);
                (Actions::Recipes(a), EnvState::Recipes(s))
            }
        };
        let program = Program::new(actions).map_err(|_| SampleError::DeadEnd)?;
        Ok((program, goal))
    }

    pub fn sample_program<R: Rng + ?Sized>(&self, state: &EnvState, rng: &mut R) -> Result<Program, SampleError> {
        self.sample_program_with_goal(state, rng).map(|(p, _)| p)
    }

    /// Draws state, program and goal, redrawing when the state is held out or a dead end.
    pub fn sample_example<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Example, SampleError> {
        let mut held_out = false;
        for _ in 0..self.cfg.max_retries.max(1) {
            let init = self.sample_state(rng);
            if !self.cfg.holdout_states.is_empty() && self.cfg.holdout_states.contains(&init.render()) {
                held_out = true;
                continue;
            }
            match self.sample_program_with_goal(&init, rng) {
                Ok((program, goal)) => return Ok(Example { init, program, goal }),
                Err(SampleError::DeadEnd) => continue,
                Err(e) => return Err(e),
            }
        }
        if held_out {
            Err(SampleError::RetryExhausted {
                attempts: self.cfg.max_retries.max(1),
            })
        } else {
            Err(SampleError::DeadEnd)
        }
    }

    /// Every single action the sampler could emit from `state`, grouped by function in grammar order.
    pub fn valid_actions(&self, state: &EnvState) -> Vec<(&'static str, Vec<Program>)> {
        fn collect<S: ActionSpace>(space: &S, wrap: impl Fn(Vec<S::Action>) -> Actions) -> Vec<(&'static str, Vec<Program>)> {
            space
                .weights()
                .iter()
                .enumerate()
                .map(|(f, (name, w))| {
                    let all = (0..*w).map(|k| Program::new(wrap(vec![space.nth(f, k)])).unwrap()).collect();
                    (*name, all)
                })
                .collect()
        }
        match state {
            EnvState::Alchemy(s) => collect(&AlchemySpace::new(s), Actions::Alchemy),
            EnvState::Scene(s) => collect(&SceneSpace::new(s), Actions::Scene),
            EnvState::Tangrams(s) => collect(&TangramsSpace::new(s), Actions::Tangrams),
            EnvState::ProPara(s) => collect(&EntitySpace::new(s, &self.locations), Actions::ProPara),
            EnvState::Recipes(s) => collect(&EntitySpace::new(s, &self.locations), Actions::Recipes),
        }
    }
}

pub fn sample_state<R: Rng + ?Sized>(domain: Domain, cfg: &SamplerConfig, rng: &mut R) -> Result<EnvState, SampleError> {
    Ok(Sampler::new(domain, cfg)?.sample_state(rng))
}

pub fn sample_program<R: Rng + ?Sized>(
    domain: Domain,
    state: &EnvState,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Program, SampleError> {
    Sampler::new(domain, cfg)?.sample_program(state, rng)
}

pub fn sample_example<R: Rng + ?Sized>(domain: Domain, cfg: &SamplerConfig, rng: &mut R) -> Result<Example, SampleError> {
    Sampler::new(domain, cfg)?.sample_example(rng)
}

/// Executable parameterizations of each function in one state.
trait ActionSpace {
    type Action;
    /// `(function, number of valid parameter tuples)` in grammar order.
    fn weights(&self) -> ArrayVec<(&'static str, usize), 4>;
    /// The `k`-th valid action of function `f`.
    fn nth(&self, f: usize, k: usize) -> Self::Action;
}

fn pick<Sp: ActionSpace, R: Rng + ?Sized>(space: &Sp, rng: &mut R) -> Option<Sp::Action> {
    let weights = space.weights();
    let live: ArrayVec<usize, 4> = (0..weights.len()).filter(|f| weights[*f].1 > 0).collect();
    if live.is_empty() {
        return None;
    }
    let f = live[rng.gen_range(0..live.len())];
    let k = rng.gen_range(0..weights[f].1);
    Some(space.nth(f, k))
}

fn build<S: Clone, A, R: Rng + ?Sized>(
    initial: &S,
    len: usize,
    rng: &mut R,
    next: impl Fn(&S, &mut R) -> Option<A>,
    apply: fn(&mut S, &A) -> Result<(), crate::exec::ExecError>,
) -> (Vec<A>, S) {
    let mut state = initial.clone();
    let mut actions = Vec::with_capacity(len);
    for _ in 0..len {
        let Some(action) = next(&state, rng) else { break };
        apply(&mut state, &action).expect("sampled action must be executable");
        actions.push(action);
    }
    (actions, state)
}

struct AlchemySpace {
    lens: [usize; ALCHEMY_BEAKERS],
    /// References resolving to each beaker (at most 2 plain + 2 colored).
    refs: [ArrayVec<BeakerRef, 4>; ALCHEMY_BEAKERS],
    amounts: [ArrayVec<Amount, 10>; ALCHEMY_BEAKERS],
}

impl AlchemySpace {
    fn new(state: &AlchemyState) -> Self {
        let mut refs: [ArrayVec<BeakerRef, 4>; ALCHEMY_BEAKERS] = Default::default();
        let lens: [usize; ALCHEMY_BEAKERS] = std::array::from_fn(|i| state.beaker(i + 1).len());
        for r in BeakerRef::all() {
            if let Ok(p) = crate::exec::resolve_beaker(state, r) {
                refs[p - 1].push(r);
            }
        }
        let amounts = std::array::from_fn(|i| {
            let n = lens[i];
            Amount::all().filter(|a| a.units(n).is_some_and(|u| u >= 1 && u <= n)).collect()
        });
        Self { lens, refs, amounts }
    }

    fn pour_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..ALCHEMY_BEAKERS).flat_map(move |s| {
            (0..ALCHEMY_BEAKERS)
                .filter(move |d| *d != s && self.lens[s] > 0 && self.lens[s] + self.lens[*d] <= BEAKER_CAPACITY)
                .map(move |d| (s, d))
        })
    }
}

impl ActionSpace for AlchemySpace {
    type Action = AlchemyAction;

    fn weights(&self) -> ArrayVec<(&'static str, usize), 4> {
        let nonempty = |b: usize| self.lens[b] > 0;
        let mix = (0..ALCHEMY_BEAKERS).filter(|b| nonempty(*b)).map(|b| self.refs[b].len()).sum();
        let pour = self.pour_pairs().map(|(s, d)| self.refs[s].len() * self.refs[d].len()).sum();
        let drain = (0..ALCHEMY_BEAKERS).map(|b| self.refs[b].len() * self.amounts[b].len()).sum();
        [("Mix", mix), ("Pour", pour), ("Drain", drain)].into_iter().collect()
    }

    fn nth(&self, f: usize, mut k: usize) -> AlchemyAction {
        match f {
            0 => {
                for b in (0..ALCHEMY_BEAKERS).filter(|b| self.lens[*b] > 0) {
                    if k < self.refs[b].len() {
                        return AlchemyAction::Mix(self.refs[b][k]);
                    }
                    k -= self.refs[b].len();
                }
            }
            1 => {
                for (s, d) in self.pour_pairs() {
                    let w = self.refs[s].len() * self.refs[d].len();
                    if k < w {
                        let nd = self.refs[d].len();
                        return AlchemyAction::Pour(self.refs[s][k / nd], self.refs[d][k % nd]);
                    }
                    k -= w;
                }
            }
            _ => {
                for b in 0..ALCHEMY_BEAKERS {
                    let na = self.amounts[b].len();
                    let w = self.refs[b].len() * na;
                    if k < w {
                        return AlchemyAction::Drain(self.refs[b][k / na], self.amounts[b][k % na]);
                    }
                    k -= w;
                }
            }
        }
        unreachable!("action index beyond its weight")
    }
}

struct SceneSpace {
    empty: ArrayVec<u8, SCENE_POSITIONS>,
    occupied: ArrayVec<u8, SCENE_POSITIONS>,
    hatless: ArrayVec<u8, SCENE_POSITIONS>,
    hatted: ArrayVec<u8, SCENE_POSITIONS>,
}

impl SceneSpace {
    fn new(state: &SceneState) -> Self {
        let mut sp = SceneSpace {
            empty: ArrayVec::new(),
            occupied: ArrayVec::new(),
            hatless: ArrayVec::new(),
            hatted: ArrayVec::new(),
        };
        for (i, slot) in state.slots().iter().enumerate() {
            let p = i as u8 + 1;
            match slot {
                None => sp.empty.push(p),
                Some(person) => {
                    sp.occupied.push(p);
                    if person.hat.is_some() {
                        sp.hatted.push(p);
                    } else {
                        sp.hatless.push(p);
                    }
                }
            }
        }
        sp
    }
}

impl ActionSpace for SceneSpace {
    type Action = SceneAction;

    fn weights(&self) -> ArrayVec<(&'static str, usize), 4> {
        let colors = Color::ALL.len();
        [
            ("Person", self.empty.len() * colors),
            ("RmPerson", self.occupied.len()),
            ("Hat", self.hatless.len() * colors),
            ("RmHat", self.hatted.len()),
        ]
        .into_iter()
        .collect()
    }

    fn nth(&self, f: usize, k: usize) -> SceneAction {
        let colors = Color::ALL.len();
        match f {
            0 => SceneAction::Person(self.empty[k / colors], Color::ALL[k % colors]),
            1 => SceneAction::RmPerson(self.occupied[k]),
            2 => SceneAction::Hat(self.hatless[k / colors], Color::ALL[k % colors]),
            _ => SceneAction::RmHat(self.hatted[k]),
        }
    }
}

struct TangramsSpace {
    len: usize,
    absent: ArrayVec<TangramObject, 5>,
}

impl TangramsSpace {
    fn new(state: &TangramsState) -> Self {
        Self {
            len: state.len(),
            absent: TangramObject::ALL.into_iter().filter(|o| !state.contains(*o)).collect(),
        }
    }
}

impl ActionSpace for TangramsSpace {
    type Action = TangramsAction;

    fn weights(&self) -> ArrayVec<(&'static str, usize), 4> {
        let insert = if self.len < TANGRAMS_SLOTS { (self.len + 1) * self.absent.len() } else { 0 };
        [("Insert", insert), ("Remove", self.len)].into_iter().collect()
    }

    fn nth(&self, f: usize, k: usize) -> TangramsAction {
        if f == 0 {
            let n = self.absent.len();
            TangramsAction::Insert((k / n + 1) as u8, self.absent[k % n])
        } else {
            TangramsAction::Remove(k as u8 + 1)
        }
    }
}

/// Create targets are the location vocabulary plus `?`; moves never target the current location.
struct EntitySpace<'s> {
    locations: &'s [Span],
    absent: Vec<&'s Span>,
    located: Vec<(&'s Span, &'s Span, usize)>,
    existing: Vec<&'s Span>,
}

impl<'s> EntitySpace<'s> {
    fn new(state: &'s EntityState, locations: &'s [Span]) -> Self {
        let mut sp = EntitySpace {
            locations,
            absent: vec![],
            located: vec![],
            existing: vec![],
        };
        for (name, loc) in state.entries() {
            match loc {
                Location::NonExistent => sp.absent.push(name),
                Location::Unknown => sp.existing.push(name),
                Location::Named(at) => {
                    sp.existing.push(name);
                    let targets = locations.len() - usize::from(locations.contains(at));
                    sp.located.push((name, at, targets));
                }
            }
        }
        sp
    }
}

impl ActionSpace for EntitySpace<'_> {
    type Action = EntityAction;

    fn weights(&self) -> ArrayVec<(&'static str, usize), 4> {
        [
            ("Create", self.absent.len() * (self.locations.len() + 1)),
            ("Move", self.located.iter().map(|(_, _, n)| n).sum()),
            ("Destroy", self.existing.len()),
        ]
        .into_iter()
        .collect()
    }

    fn nth(&self, f: usize, mut k: usize) -> EntityAction {
        match f {
            0 => {
                let per = self.locations.len() + 1;
                let participant = self.absent[k / per].clone();
                let location = self.locations.get(k % per).cloned();
                EntityAction::Create { participant, location }
            }
            1 => {
                for (name, at, n) in &self.located {
                    if k < *n {
                        let to = self.locations.iter().filter(|l| l != at).nth(k).unwrap().clone();
                        return EntityAction::Move {
                            participant: (*name).clone(),
                            from: (*at).clone(),
                            to,
                        };
                    }
                    k -= n;
                }
                unreachable!("move index beyond its weight")
            }
            _ => EntityAction::Destroy {
                participant: self.existing[k].clone(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::execute_program;
    use crate::state::parse_state;

    #[test]
    fn same_seed_and_stream_repeat() {
        let a: Vec<u64> = (0..8).map(|_| stream_rng(7, 3).gen()).collect();
        let b: Vec<u64> = (0..8).map(|_| stream_rng(7, 3).gen()).collect();
        assert_eq!(a, b);
        let mut r1 = stream_rng(7, 3);
        let mut r2 = stream_rng(7, 4);
        assert_ne!(r1.gen::<u64>(), r2.gen::<u64>());
    }

    #[test]
    fn full_alchemy_beakers_are_homogeneous() {
        let cfg = SamplerConfig {
            alchemy_fill_prob: 1.0,
            ..SamplerConfig::default()
        };
        let sampler = Sampler::new(Domain::Alchemy, &cfg).unwrap();
        let mut rng = stream_rng(11, 0);
        for _ in 0..200 {
            let EnvState::Alchemy(s) = sampler.sample_state(&mut rng) else { unreachable!() };
            for b in s.beakers() {
                assert!((1..=4).contains(&b.len()));
                assert!(b.iter().all(|c| *c == b[0]));
            }
        }
    }

    #[test]
    fn zero_occupancy_gives_empty_scene() {
        let cfg = SamplerConfig {
            scene_occupancy_prob: 0.0,
            ..SamplerConfig::default()
        };
        let s = sample_state(Domain::Scene, &cfg, &mut stream_rng(1, 1)).unwrap();
        assert_eq!(s.render(), "1:__|2:__|3:__|4:__|5:__|6:__|7:__|8:__|9:__|10:__");
    }

    #[test]
    fn full_tangrams_only_offers_remove() {
        let cfg = SamplerConfig::default();
        let sampler = Sampler::new(Domain::Tangrams, &cfg).unwrap();
        let s = parse_state(Domain::Tangrams, "1:A|2:B|3:C|4:D|5:E").unwrap();
        let valid = sampler.valid_actions(&s);
        assert_eq!(valid[0].0, "Insert");
        assert!(valid[0].1.is_empty());
        assert_eq!(valid[1].1.len(), 5);
    }

    #[test]
    fn drain_offers_only_integral_fractions() {
        let cfg = SamplerConfig::default();
        let sampler = Sampler::new(Domain::Alchemy, &cfg).unwrap();
        let s = parse_state(Domain::Alchemy, "1:ggg|2:_|3:_|4:_|5:_|6:_|7:_").unwrap();
        let drains: HashSet<String> = sampler.valid_actions(&s)[2]
            .1
            .iter()
            .filter(|p| p.render().starts_with("Drain ( Beaker ( 1 )"))
            .map(|p| p.render())
            .collect();
        let want: HashSet<String> = ["1", "2", "3", "1/3", "2/3"]
            .iter()
            .map(|a| format!("Drain ( Beaker ( 1 ) , {a} )"))
            .collect();
        assert_eq!(drains, want);
    }

    #[test]
    fn config_errors() {
        let mut cfg = SamplerConfig::for_domain(Domain::ProPara);
        cfg.entity_vocab = vec!["a".into(), "b".into()];
        assert!(matches!(Sampler::new(Domain::ProPara, &cfg), Err(SampleError::Config(_))));
        cfg.entity_count_max = 2;
        assert!(Sampler::new(Domain::ProPara, &cfg).is_ok());
        let bad_prob = SamplerConfig {
            scene_hat_prob: 1.5,
            ..SamplerConfig::default()
        };
        assert!(Sampler::new(Domain::Scene, &bad_prob).is_err());
        let bad_len = SamplerConfig {
            program_length_min: 0,
            ..SamplerConfig::default()
        };
        assert!(Sampler::new(Domain::Scene, &bad_len).is_err());
        assert!(Sampler::new(Domain::Recipes, &SamplerConfig::default()).is_err());
    }

    #[test]
    fn holdout_covering_every_state_exhausts_retries() {
        let mut cfg = SamplerConfig {
            scene_occupancy_prob: 0.0,
            max_retries: 50,
            ..SamplerConfig::default()
        };
        cfg.holdout_states.insert("1:__|2:__|3:__|4:__|5:__|6:__|7:__|8:__|9:__|10:__".into());
        let err = sample_example(Domain::Scene, &cfg, &mut stream_rng(3, 0)).unwrap_err();
        assert_eq!(err, SampleError::RetryExhausted { attempts: 50 });
    }

    #[test]
    fn all_empty_alchemy_is_a_dead_end() {
        let cfg = SamplerConfig {
            alchemy_fill_prob: 0.0,
            max_retries: 5,
            ..SamplerConfig::default()
        };
        let s = sample_state(Domain::Alchemy, &cfg, &mut stream_rng(0, 0)).unwrap();
        assert_eq!(
            sample_program(Domain::Alchemy, &s, &cfg, &mut stream_rng(0, 0)),
            Err(SampleError::DeadEnd)
        );
        assert_eq!(sample_example(Domain::Alchemy, &cfg, &mut stream_rng(0, 0)), Err(SampleError::DeadEnd));
    }

    #[test]
    fn kv_config_overrides_defaults() {
        let cfg = SamplerConfig::from_kv_str(Domain::Recipes, "seed = 9\nprogram_length_max = 3\n").unwrap();
        assert_eq!((cfg.seed, cfg.program_length_max), (9, 3));
        assert!(cfg.entity_vocab.contains(&"beef".to_string()));
        let back = SamplerConfig::from_kv_str(Domain::Recipes, &cfg.to_kv_string()).unwrap();
        assert_eq!(back, cfg);
        assert!(SamplerConfig::from_kv_str(Domain::Alchemy, "colour = 1").is_err());
    }

    #[test]
    fn examples_execute_and_repeat() {
        for domain in Domain::ALL {
            let cfg = SamplerConfig::for_domain(domain);
            let sampler = Sampler::new(domain, &cfg).unwrap();
            for i in 0..300 {
                let ex = sampler.sample_example(&mut stream_rng(5, i)).unwrap();
                assert_eq!(execute_program(&ex.init, &ex.program).unwrap(), ex.goal);
                assert_eq!(sampler.sample_example(&mut stream_rng(5, i)).unwrap(), ex);
            }
        }
    }
}
