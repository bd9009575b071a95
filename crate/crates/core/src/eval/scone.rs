use rayon::prelude::*;
use serde::Serialize;

use super::{pct, Diagnostic, DiagnosticKind, EvalError, Notes, PredictionSet};
use crate::dataset::{Episode, SCONE_EPISODE_LEN};
use crate::state::{parse_state, Domain};

/// Denotation accuracy, as percentages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SconeScores {
    /// Correct states over all `(episode, step)` pairs.
    pub inst: f64,
    /// Episodes whose step-3 state is correct.
    pub utts3: f64,
    /// Episodes whose step-5 state is correct.
    pub utts5: f64,
    pub correct_steps: usize,
    pub total_steps: usize,
}

pub(super) fn score(episodes: &[Episode], preds: &PredictionSet, notes: &mut Notes) -> Result<SconeScores, EvalError> {
    let domain = episodes.first().map_or(Domain::Alchemy, |e| e.domain);
    for ep in episodes {
        if ep.domain != domain || !domain.is_scone() {
            return Err(EvalError::DomainMismatch {
                id: ep.id.clone(),
                expected: if domain.is_scone() { domain } else { Domain::Alchemy },
                found: ep.domain,
            });
        }
        if ep.len() != SCONE_EPISODE_LEN {
            return Err(EvalError::EpisodeLength {
                id: ep.id.clone(),
                expected: SCONE_EPISODE_LEN,
                found: ep.len(),
            });
        }
    }

    // Per episode: correctness of each step plus diagnostics.
    let judged: Vec<Result<(Vec<bool>, Vec<Diagnostic>), EvalError>> = episodes
        .par_iter()
        .map(|ep| {
            let mut diags = vec![];
            let mut correct = Vec::with_capacity(ep.len());
            for (t, gold) in ep.gold.iter().enumerate() {
                let step = t + 1;
                let text = preds.require(&ep.id, step)?;
                correct.push(match parse_state(ep.domain, text) {
                    Ok(state) => state == *gold,
                    Err(e) => {
                        diags.push(Diagnostic {
                            id: ep.id.clone(),
                            step,
                            kind: DiagnosticKind::Unparseable,
                            detail: format!("{e}: {text}"),
                        });
                        false
                    }
                });
            }
            Ok((correct, diags))
        })
        .collect();

    let (mut correct_steps, mut total_steps, mut at3, mut at5) = (0, 0, 0, 0);
    for r in judged {
        let (correct, diags) = r?;
        notes.diagnostics.extend(diags);
        correct_steps += correct.iter().filter(|c| **c).count();
        total_steps += correct.len();
        at3 += usize::from(correct[2]);
        at5 += usize::from(correct[4]);
    }
    for (what, total) in [("inst", total_steps), ("3utts", episodes.len()), ("5utts", episodes.len())] {
        if total == 0 {
            notes.flag(what);
        }
    }
    Ok(SconeScores {
        inst: pct(correct_steps, total_steps).unwrap_or(0.0),
        utts3: pct(at3, episodes.len()).unwrap_or(0.0),
        utts5: pct(at5, episodes.len()).unwrap_or(0.0),
        correct_steps,
        total_steps,
    })
}
