use std::collections::BTreeSet;

use serde::Serialize;

use super::{mean, pct, Notes, Prf, TagGrid, TagKind};
use super::tags::ActionTag;

/// Sentence-level accuracies, as percentages of correct question instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentenceScores {
    /// Is the entity created, moved, destroyed? Three yes/no instances per entity.
    pub cat1: f64,
    /// When? One instance per action kind the gold entity undergoes.
    pub cat2: f64,
    /// Where? One instance per action kind the gold entity undergoes.
    pub cat3: f64,
    pub macro_avg: f64,
    pub micro_avg: f64,
    /// `[cat1, cat2, cat3]` instance counts.
    pub instances: [usize; 3],
    pub correct: [usize; 3],
}

fn steps_of(grid: &TagGrid, e: usize, kind: TagKind) -> Vec<usize> {
    grid.entity_tags(e).filter(|(_, t)| t.kind() == Some(kind)).map(|(s, _)| s).collect()
}

fn locations_of(grid: &TagGrid, e: usize, kind: TagKind) -> Vec<String> {
    grid.entity_tags(e)
        .filter(|(_, t)| t.kind() == Some(kind))
        .map(|(_, t)| t.locations().iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" -> "))
        .collect()
}

pub(super) fn sentence_scores(grids: &[(TagGrid, TagGrid)], notes: &mut Notes) -> SentenceScores {
    let mut instances = [0usize; 3];
    let mut correct = [0usize; 3];
    for (gold, pred) in grids {
        for e in 0..gold.entities.len() {
            for kind in TagKind::ALL {
                let g_steps = steps_of(gold, e, kind);
                let p_steps = steps_of(pred, e, kind);
                instances[0] += 1;
                correct[0] += usize::from(g_steps.is_empty() == p_steps.is_empty());
                if g_steps.is_empty() {
                    continue;
                }
                instances[1] += 1;
                correct[1] += usize::from(g_steps == p_steps);
                instances[2] += 1;
                correct[2] += usize::from(locations_of(gold, e, kind) == locations_of(pred, e, kind));
            }
        }
    }
    let cat = |i: usize, notes: &mut Notes| {
        pct(correct[i], instances[i]).unwrap_or_else(|| {
            notes.flag(format!("cat-{}", i + 1));
            0.0
        })
    };
    let (cat1, cat2, cat3) = (cat(0, notes), cat(1, notes), cat(2, notes));
    let all: usize = instances.iter().sum();
    SentenceScores {
        cat1,
        cat2,
        cat3,
        macro_avg: (cat1 + cat2 + cat3) / 3.0,
        micro_avg: pct(correct.iter().sum(), all).unwrap_or(0.0),
        instances,
        correct,
    }
}

/// `(destroyed, created, location, step)`; entity lists are sorted.
pub type Conversion = (Vec<String>, Vec<String>, String, usize);
/// `(entity, from, to, step)`.
pub type MoveTuple = (String, String, String, usize);

/// The four document-level answer sets of one process.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocumentTuples {
    /// Existing at the start, destroyed, and not created again afterwards.
    pub inputs: BTreeSet<String>,
    /// Created at some step and existing at the end.
    pub outputs: BTreeSet<String>,
    /// Destructions and creations sharing a step and a location.
    pub conversions: BTreeSet<Conversion>,
    pub moves: BTreeSet<MoveTuple>,
}

pub fn document_tuples(grid: &TagGrid) -> DocumentTuples {
    let mut out = DocumentTuples::default();
    let last = grid.steps();
    for (e, name) in grid.entities.iter().enumerate() {
        let name = name.to_string();
        let first_destroy = grid
            .entity_tags(e)
            .find(|(_, t)| t.kind() == Some(TagKind::Destroy))
            .map(|(s, _)| s);
        if let Some(d) = first_destroy {
            let recreated = grid
                .entity_tags(e)
                .any(|(s, t)| s > d && t.kind() == Some(TagKind::Create));
            if grid.locations[e][0].exists() && !recreated {
                out.inputs.insert(name.clone());
            }
        }
        let created = grid.entity_tags(e).any(|(_, t)| t.kind() == Some(TagKind::Create));
        if created && grid.locations[e][last].exists() {
            out.outputs.insert(name.clone());
        }
        for (step, tag) in grid.entity_tags(e) {
            if let ActionTag::Move { from, to } = tag {
                out.moves.insert((name.clone(), from.to_string(), to.to_string(), step));
            }
        }
    }
    for step in 1..=last {
        let mut destroyed: Vec<(String, String)> = vec![];
        let mut created: Vec<(String, String)> = vec![];
        for (e, name) in grid.entities.iter().enumerate() {
            match &grid.tags[e][step - 1] {
                ActionTag::Destroy { from } => destroyed.push((from.to_string(), name.to_string())),
                ActionTag::Create { to } => created.push((to.to_string(), name.to_string())),
                _ => {}
            }
        }
        let places: BTreeSet<&String> = destroyed.iter().map(|(l, _)| l).collect();
        for place in places {
            let pick = |v: &[(String, String)]| -> Vec<String> {
                let mut names: Vec<String> = v.iter().filter(|(l, _)| l == place).map(|(_, n)| n.clone()).collect();
                names.sort();
                names
            };
            let (d, c) = (pick(&destroyed), pick(&created));
            if !c.is_empty() {
                out.conversions.insert((d, c, place.clone(), step));
            }
        }
    }
    out
}

/// Document-level precision, recall and F1, overall and per question.
///
/// A (process, question) pair where both gold and predicted sets are empty
/// has nothing to score and is left out of the averages. A question left
/// with no pairs at all has no breakdown (`None`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocumentScores {
    pub overall: Prf,
    pub inputs: Option<Prf>,
    pub outputs: Option<Prf>,
    pub conversions: Option<Prf>,
    pub moves: Option<Prf>,
    pub processes: usize,
    /// Scored (process, question) pairs.
    pub pairs: usize,
}

impl DocumentScores {
    pub fn questions(&self) -> [(&'static str, Option<Prf>); 4] {
        [
            ("inputs", self.inputs),
            ("outputs", self.outputs),
            ("conversions", self.conversions),
            ("moves", self.moves),
        ]
    }
}

/// Precision and recall of one set pair in percent; an empty denominator scores 0 and is flagged.
fn set_pr<T: Ord>(gold: &BTreeSet<T>, pred: &BTreeSet<T>, question: &str, notes: &mut Notes) -> Option<(f64, f64)> {
    if gold.is_empty() && pred.is_empty() {
        return None;
    }
    let hit = gold.intersection(pred).count();
    let p = pct(hit, pred.len()).unwrap_or_else(|| {
        notes.flag(format!("document {question} precision"));
        0.0
    });
    let r = pct(hit, gold.len()).unwrap_or_else(|| {
        notes.flag(format!("document {question} recall"));
        0.0
    });
    Some((p, r))
}

fn averaged(pairs: &[(f64, f64)]) -> Prf {
    let ps: Vec<f64> = pairs.iter().map(|x| x.0).collect();
    let rs: Vec<f64> = pairs.iter().map(|x| x.1).collect();
    Prf::new(mean(&ps), mean(&rs))
}

pub(super) fn document_scores(grids: &[(TagGrid, TagGrid)], notes: &mut Notes) -> DocumentScores {
    let mut per_q: [Vec<(f64, f64)>; 4] = Default::default();
    for (gold, pred) in grids {
        let (g, p) = (document_tuples(gold), document_tuples(pred));
        let scored = [
            set_pr(&g.inputs, &p.inputs, "inputs", notes),
            set_pr(&g.outputs, &p.outputs, "outputs", notes),
            set_pr(&g.conversions, &p.conversions, "conversions", notes),
            set_pr(&g.moves, &p.moves, "moves", notes),
        ];
        for (q, pr) in scored.into_iter().enumerate() {
            per_q[q].extend(pr);
        }
    }
    let all: Vec<(f64, f64)> = per_q.iter().flatten().copied().collect();
    if all.is_empty() {
        notes.flag("document precision");
        notes.flag("document recall");
    }
    let breakdown = |q: usize| (!per_q[q].is_empty()).then(|| averaged(&per_q[q]));
    DocumentScores {
        overall: averaged(&all),
        inputs: breakdown(0),
        outputs: breakdown(1),
        conversions: breakdown(2),
        moves: breakdown(3),
        processes: grids.len(),
        pairs: all.len(),
    }
}
