use std::collections::BTreeSet;

use super::{pct, Notes, Prf, TagGrid};
use crate::state::Location;

/// `(entity, step, destination)` for every step that leaves an entity at a named location.
pub fn recipe_changes(grid: &TagGrid) -> BTreeSet<(String, usize, String)> {
    let mut out = BTreeSet::new();
    for (e, name) in grid.entities.iter().enumerate() {
        for (step, w) in grid.locations[e].windows(2).enumerate() {
            if let Location::Named(to) = &w[1] {
                if w[0] != w[1] {
                    out.insert((name.to_string(), step + 1, to.to_string()));
                }
            }
        }
    }
    out
}

/// Micro precision, recall and F1 over all processes.
pub(super) fn scores(grids: &[(TagGrid, TagGrid)], notes: &mut Notes) -> Prf {
    let (mut hit, mut gold_n, mut pred_n) = (0, 0, 0);
    for (gold, pred) in grids {
        let (g, p) = (recipe_changes(gold), recipe_changes(pred));
        hit += g.intersection(&p).count();
        gold_n += g.len();
        pred_n += p.len();
    }
    let precision = pct(hit, pred_n).unwrap_or_else(|| {
        notes.flag("recipes precision");
        0.0
    });
    let recall = pct(hit, gold_n).unwrap_or_else(|| {
        notes.flag("recipes recall");
        0.0
    });
    Prf::new(precision, recall)
}
