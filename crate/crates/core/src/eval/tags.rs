use std::fmt;

use crate::state::{EntityState, Location, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TagKind {
    Create,
    Move,
    Destroy,
}

impl TagKind {
    pub const ALL: [TagKind; 3] = [TagKind::Create, TagKind::Move, TagKind::Destroy];
}

/// What happened to one entity over one step.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ActionTag {
    None,
    Create { to: Location },
    Move { from: Location, to: Location },
    Destroy { from: Location },
}

impl ActionTag {
    pub fn kind(&self) -> Option<TagKind> {
        match self {
            ActionTag::None => None,
            ActionTag::Create { .. } => Some(TagKind::Create),
            ActionTag::Move { .. } => Some(TagKind::Move),
            ActionTag::Destroy { .. } => Some(TagKind::Destroy),
        }
    }

    /// Locations that identify where the action happened.
    pub fn locations(&self) -> Vec<&Location> {
        match self {
            ActionTag::None => vec![],
            ActionTag::Create { to } => vec![to],
            ActionTag::Move { from, to } => vec![from, to],
            ActionTag::Destroy { from } => vec![from],
        }
    }
}

impl fmt::Display for ActionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionTag::None => f.write_str("None"),
            ActionTag::Create { to } => write!(f, "Create({to})"),
            ActionTag::Move { from, to } => write!(f, "Move({from}, {to})"),
            ActionTag::Destroy { from } => write!(f, "Destroy({from})"),
        }
    }
}

/// Tag for a single location transition. Changes to or from `?` while the
/// entity exists are moves.
pub fn transition_tag(before: &Location, after: &Location) -> ActionTag {
    match (before.exists(), after.exists()) {
        (false, false) => ActionTag::None,
        (false, true) => ActionTag::Create { to: after.clone() },
        (true, false) => ActionTag::Destroy { from: before.clone() },
        (true, true) if before == after => ActionTag::None,
        (true, true) => ActionTag::Move {
            from: before.clone(),
            to: after.clone(),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntityListMismatch {
    /// Index of the first state whose entity list differs from the first one.
    pub step: usize,
}

impl fmt::Display for EntityListMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "state {} lists different entities than the initial state", self.step)
    }
}

impl std::error::Error for EntityListMismatch {}

/// Per-entity location history and per-step tags of one process.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagGrid {
    pub entities: Vec<Span>,
    /// `locations[e][t]` for t in 0..=T.
    pub locations: Vec<Vec<Location>>,
    /// `tags[e][t - 1]` is the tag of step t.
    pub tags: Vec<Vec<ActionTag>>,
}

impl TagGrid {
    pub fn steps(&self) -> usize {
        self.locations.first().map_or(0, |l| l.len().saturating_sub(1))
    }

    /// `(step, tag)` pairs of entity `e`, steps 1-based.
    pub fn entity_tags(&self, e: usize) -> impl Iterator<Item = (usize, &ActionTag)> {
        self.tags[e].iter().enumerate().map(|(t, tag)| (t + 1, tag))
    }
}

pub fn derive_action_tags(states: &[EntityState]) -> Result<TagGrid, EntityListMismatch> {
    let Some(first) = states.first() else {
        return Ok(TagGrid {
            entities: vec![],
            locations: vec![],
            tags: vec![],
        });
    };
    if let Some(step) = states.iter().position(|s| !s.same_entities(first)) {
        return Err(EntityListMismatch { step });
    }
    let entities: Vec<Span> = first.names().cloned().collect();
    let locations: Vec<Vec<Location>> = (0..entities.len())
        .map(|e| states.iter().map(|s| s.entries()[e].1.clone()).collect())
        .collect();
    let tags = locations
        .iter()
        .map(|locs| locs.windows(2).map(|w| transition_tag(&w[0], &w[1])).collect())
        .collect();
    Ok(TagGrid {
        entities,
        locations,
        tags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn states(rows: &[&str]) -> Vec<EntityState> {
        rows.iter().map(|l| EntityState::from_pairs([("x", *l)]).unwrap()).collect()
    }

    #[test]
    fn beef_appears_in_the_oven() {
        let s = vec![
            EntityState::from_pairs([("beef", "-")]).unwrap(),
            EntityState::from_pairs([("beef", "oven")]).unwrap(),
        ];
        let g = derive_action_tags(&s).unwrap();
        assert_eq!(g.tags[0], [ActionTag::Create { to: Location::parse("oven").unwrap() }]);
    }

    #[test]
    fn unknown_then_destroyed() {
        let g = derive_action_tags(&states(&["soil", "?", "-"])).unwrap();
        let soil = Location::parse("soil").unwrap();
        assert_eq!(
            g.tags[0],
            [
                ActionTag::Move { from: soil, to: Location::Unknown },
                ActionTag::Destroy { from: Location::Unknown }
            ]
        );
    }

    #[test]
    fn constant_sequence_has_no_tags() {
        let g = derive_action_tags(&states(&["soil", "soil", "soil"])).unwrap();
        assert!(g.tags[0].iter().all(|t| *t == ActionTag::None));
        assert_eq!(g.steps(), 2);
    }

    #[test]
    fn mismatched_lists_are_rejected() {
        let s = vec![
            EntityState::from_pairs([("a", "-")]).unwrap(),
            EntityState::from_pairs([("b", "-")]).unwrap(),
        ];
        assert_eq!(derive_action_tags(&s), Err(EntityListMismatch { step: 1 }));
    }
}
