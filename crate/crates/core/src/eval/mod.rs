//! Scoring predicted states against gold episodes.
//!
//! Predictions are compared after parsing, so formatting differences never
//! matter. A prediction that does not parse, or (for entity domains) names
//! different entities than the gold process, is scored as wrong and listed
//! in the report's diagnostics; for entity domains the previous predicted
//! state is carried forward in its place.

mod propara;
mod recipes;
mod scone;
mod tags;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dataset::{Episode, Prediction};
use crate::state::{parse_state, Domain, EntityState};

pub use propara::{document_tuples, DocumentScores, DocumentTuples, SentenceScores};
pub use recipes::recipe_changes;
pub use scone::SconeScores;
pub use tags::{derive_action_tags, transition_tag, ActionTag, EntityListMismatch, TagGrid, TagKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no prediction for episode `{id}` step {step}")]
    MissingPrediction { id: String, step: usize },
    #[error("two predictions for episode `{id}` step {step}")]
    DuplicatePrediction { id: String, step: usize },
    #[error("episode `{id}` is {found}, expected {expected}")]
    DomainMismatch { id: String, expected: Domain, found: Domain },
    #[error("gold episode `{id}`: state {step} lists different entities than the initial state")]
    EntityListMismatch { id: String, step: usize },
    #[error("episode `{id}` has {found} steps, expected {expected}")]
    EpisodeLength { id: String, expected: usize, found: usize },
}

/// Predicted state text keyed by `(episode id, 1-based step)`.
#[derive(Debug, Clone, Default)]
pub struct PredictionSet {
    map: HashMap<(String, usize), String>,
}

impl PredictionSet {
    pub fn new(preds: impl IntoIterator<Item = Prediction>) -> Result<Self, EvalError> {
        let mut map = HashMap::new();
        for p in preds {
            if map.insert((p.id.clone(), p.step), p.state).is_some() {
                return Err(EvalError::DuplicatePrediction { id: p.id, step: p.step });
            }
        }
        Ok(Self { map })
    }

    /// The rendered gold states of `episodes`.
    pub fn from_gold(episodes: &[Episode]) -> Self {
        Self::new(crate::dataset::gold_predictions(episodes)).expect("episode ids are unique")
    }

    pub fn get(&self, id: &str, step: usize) -> Option<&str> {
        self.map.get(&(id.to_string(), step)).map(String::as_str)
    }

    /// Replaces one prediction; returns the previous text.
    pub fn set(&mut self, id: &str, step: usize, state: impl Into<String>) -> Option<String> {
        self.map.insert((id.to_string(), step), state.into())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn require(&self, id: &str, step: usize) -> Result<&str, EvalError> {
        self.get(id, step).ok_or_else(|| EvalError::MissingPrediction {
            id: id.to_string(),
            step,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Unparseable,
    EntityListMismatch,
    /// A prediction for an `(id, step)` that no episode has.
    Unmatched,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub id: String,
    pub step: usize,
    pub kind: DiagnosticKind,
    pub detail: String,
}

/// Side information gathered while scoring.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Notes {
    pub diagnostics: Vec<Diagnostic>,
    /// Undefined precision or recall values scored as 0, counted by metric.
    pub undefined: BTreeMap<String, usize>,
}

impl Notes {
    pub(crate) fn flag(&mut self, what: impl Into<String>) {
        *self.undefined.entry(what.into()).or_default() += 1;
    }
}

/// Precision, recall and F1 as percentages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self { precision, recall, f1 }
    }
}

pub(crate) fn pct(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn check_domain(episodes: &[Episode], domain: Domain) -> Result<(), EvalError> {
    match episodes.iter().find(|e| e.domain != domain) {
        Some(e) => Err(EvalError::DomainMismatch {
            id: e.id.clone(),
            expected: domain,
            found: e.domain,
        }),
        None => Ok(()),
    }
}

/// Entity states `S_0..S_T` of a gold episode.
fn gold_entity_states(ep: &Episode) -> Result<Vec<EntityState>, EvalError> {
    let states: Vec<EntityState> = ep.states().filter_map(|s| s.entity().cloned()).collect();
    if states.len() != ep.len() + 1 {
        return Err(EvalError::DomainMismatch {
            id: ep.id.clone(),
            expected: Domain::ProPara,
            found: ep.domain,
        });
    }
    if let Some(step) = states.iter().position(|s| !s.same_entities(&states[0])) {
        return Err(EvalError::EntityListMismatch { id: ep.id.clone(), step });
    }
    Ok(states)
}

/// Predicted entity states `S_0..S_T`; `S_0` is the gold initial state.
fn predicted_entity_states(
    ep: &Episode,
    preds: &PredictionSet,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<Vec<EntityState>, EvalError> {
    let init = ep.init.entity().expect("entity domain").clone();
    let mut out = Vec::with_capacity(ep.len() + 1);
    out.push(init);
    for step in 1..=ep.len() {
        let text = preds.require(&ep.id, step)?;
        let parsed = match parse_state(ep.domain, text) {
            Ok(s) => {
                let s = s.entity().expect("entity domain").clone();
                if s.same_entities(&out[0]) {
                    Some(s)
                } else {
                    diagnostics.push(Diagnostic {
                        id: ep.id.clone(),
                        step,
                        kind: DiagnosticKind::EntityListMismatch,
                        detail: text.to_string(),
                    });
                    None
                }
            }
            Err(e) => {
                diagnostics.push(Diagnostic {
                    id: ep.id.clone(),
                    step,
                    kind: DiagnosticKind::Unparseable,
                    detail: format!("{e}: {text}"),
                });
                None
            }
        };
        let next = parsed.unwrap_or_else(|| out[step - 1].clone());
        out.push(next);
    }
    Ok(out)
}

/// Gold and predicted tag grids of every episode, in episode order.
fn entity_grids(
    episodes: &[Episode],
    preds: &PredictionSet,
    notes: &mut Notes,
) -> Result<Vec<(TagGrid, TagGrid)>, EvalError> {
    let per_episode: Vec<Result<(TagGrid, TagGrid, Vec<Diagnostic>), EvalError>> = episodes
        .par_iter()
        .map(|ep| {
            let gold = gold_entity_states(ep)?;
            let mut diags = vec![];
            let pred = predicted_entity_states(ep, preds, &mut diags)?;
            let grid = |s: &[EntityState]| {
                derive_action_tags(s).map_err(|m| EvalError::EntityListMismatch {
                    id: ep.id.clone(),
                    step: m.step,
                })
            };
            Ok((grid(&gold)?, grid(&pred)?, diags))
        })
        .collect();
    let mut out = Vec::with_capacity(episodes.len());
    for r in per_episode {
        let (g, p, d) = r?;
        notes.diagnostics.extend(d);
        out.push((g, p));
    }
    Ok(out)
}

pub fn eval_scone(episodes: &[Episode], preds: &PredictionSet) -> Result<SconeScores, EvalError> {
    scone::score(episodes, preds, &mut Notes::default())
}

pub fn eval_propara_sentence(episodes: &[Episode], preds: &PredictionSet) -> Result<SentenceScores, EvalError> {
    check_domain(episodes, Domain::ProPara)?;
    let mut notes = Notes::default();
    let grids = entity_grids(episodes, preds, &mut notes)?;
    Ok(propara::sentence_scores(&grids, &mut notes))
}

pub fn eval_propara_document(episodes: &[Episode], preds: &PredictionSet) -> Result<DocumentScores, EvalError> {
    check_domain(episodes, Domain::ProPara)?;
    let mut notes = Notes::default();
    let grids = entity_grids(episodes, preds, &mut notes)?;
    Ok(propara::document_scores(&grids, &mut notes))
}

pub fn eval_recipes(episodes: &[Episode], preds: &PredictionSet) -> Result<Prf, EvalError> {
    check_domain(episodes, Domain::Recipes)?;
    let mut notes = Notes::default();
    let grids = entity_grids(episodes, preds, &mut notes)?;
    Ok(recipes::scores(&grids, &mut notes))
}

/// Scores over already-derived `(gold, predicted)` grids.
pub fn sentence_scores(grids: &[(TagGrid, TagGrid)]) -> SentenceScores {
    propara::sentence_scores(grids, &mut Notes::default())
}

pub fn document_scores(grids: &[(TagGrid, TagGrid)]) -> DocumentScores {
    propara::document_scores(grids, &mut Notes::default())
}

pub fn recipes_scores(grids: &[(TagGrid, TagGrid)]) -> Prf {
    recipes::scores(grids, &mut Notes::default())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Metrics {
    Scone(SconeScores),
    ProPara {
        sentence: SentenceScores,
        document: DocumentScores,
    },
    Recipes(Prf),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub domain: Domain,
    pub episodes: usize,
    pub steps: usize,
    pub metrics: Metrics,
    #[serde(flatten)]
    pub notes: Notes,
}

impl EvalReport {
    /// Every headline number, labelled.
    pub fn headline(&self) -> Vec<(&'static str, f64)> {
        match &self.metrics {
            Metrics::Scone(s) => vec![("Inst", s.inst), ("3utts", s.utts3), ("5utts", s.utts5)],
            Metrics::ProPara { sentence: s, document: d } => vec![
                ("Cat-1", s.cat1),
                ("Cat-2", s.cat2),
                ("Cat-3", s.cat3),
                ("Macro-Avg", s.macro_avg),
                ("Micro-Avg", s.micro_avg),
                ("Doc-P", d.overall.precision),
                ("Doc-R", d.overall.recall),
                ("Doc-F1", d.overall.f1),
            ],
            Metrics::Recipes(p) => vec![("P", p.precision), ("R", p.recall), ("F1", p.f1)],
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "domain {}  episodes {}  steps {}", self.domain, self.episodes, self.steps)?;
        for (name, value) in self.headline() {
            writeln!(f, "{name:<10} {value:>6.1}")?;
        }
        if let Metrics::ProPara { document: d, .. } = &self.metrics {
            writeln!(f, "{:<12} {:>6} {:>6} {:>6}", "question", "P", "R", "F1")?;
            for (q, s) in d.questions() {
                match s {
                    Some(s) => writeln!(f, "{q:<12} {:>6.1} {:>6.1} {:>6.1}", s.precision, s.recall, s.f1)?,
                    None => writeln!(f, "{q:<12} {:>6} {:>6} {:>6}", "n/a", "n/a", "n/a")?,
                }
            }
        }
        for (what, n) in &self.notes.undefined {
            writeln!(f, "undefined {what}: {n} (scored 0)")?;
        }
        if !self.notes.diagnostics.is_empty() {
            writeln!(f, "diagnostics ({})", self.notes.diagnostics.len())?;
            for d in &self.notes.diagnostics {
                writeln!(f, "  {} step {} {:?}: {}", d.id, d.step, d.kind, d.detail)?;
            }
        }
        Ok(())
    }
}

/// Full report for `domain`: every metric of the domain plus diagnostics.
pub fn evaluate(domain: Domain, episodes: &[Episode], preds: &PredictionSet) -> Result<EvalReport, EvalError> {
    check_domain(episodes, domain)?;
    let mut notes = Notes::default();
    let metrics = match domain {
        Domain::Alchemy | Domain::Scene | Domain::Tangrams => Metrics::Scone(scone::score(episodes, preds, &mut notes)?),
        Domain::ProPara => {
            let grids = entity_grids(episodes, preds, &mut notes)?;
            Metrics::ProPara {
                sentence: propara::sentence_scores(&grids, &mut notes),
                document: propara::document_scores(&grids, &mut notes),
            }
        }
        Domain::Recipes => {
            let grids = entity_grids(episodes, preds, &mut notes)?;
            Metrics::Recipes(recipes::scores(&grids, &mut notes))
        }
    };
    let known: HashSet<(&str, usize)> = episodes
        .iter()
        .flat_map(|e| (1..=e.len()).map(move |t| (e.id.as_str(), t)))
        .collect();
    let mut unmatched: Vec<&(String, usize)> = preds.map.keys().filter(|(id, t)| !known.contains(&(id.as_str(), *t))).collect();
    unmatched.sort();
    notes.diagnostics.extend(unmatched.into_iter().map(|(id, step)| Diagnostic {
        id: id.clone(),
        step: *step,
        kind: DiagnosticKind::Unmatched,
        detail: "no such episode step".into(),
    }));
    Ok(EvalReport {
        domain,
        episodes: episodes.len(),
        steps: episodes.iter().map(Episode::len).sum(),
        metrics,
        notes,
    })
}
