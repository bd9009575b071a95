//! Deterministic executors: `(state, action) -> state` per domain, folded over programs.
//!
//! Every check runs before any mutation, so a failed action leaves its input untouched.

use std::fmt;

use crate::program::{Actions, AlchemyAction, BeakerRef, EntityAction, Program, SceneAction, TangramsAction};
use crate::state::{
    AlchemyState, Color, EntityState, EnvState, Location, Person, SceneState, TangramsState, ALCHEMY_BEAKERS,
    BEAKER_CAPACITY, SCENE_POSITIONS, TANGRAMS_SLOTS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExecErrorKind {
    InvalidReference,
    EmptySource,
    Overflow,
    NonIntegralFraction,
    OccupiedPosition,
    VacantPosition,
    HatConflict,
    DuplicateObject,
    CapacityExceeded,
    UnknownEntity,
    LocationMismatch,
    AlreadyExists,
    DomainMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecError {
    pub kind: ExecErrorKind,
    /// 0-based index of the failing action.
    pub step_index: usize,
    pub detail: String,
}

impl ExecError {
    fn new(kind: ExecErrorKind, detail: impl Into<String>) -> Self {
        Self {
            kind,
            step_index: 0,
            detail: detail.into(),
        }
    }

    fn at(mut self, step_index: usize) -> Self {
        self.step_index = step_index;
        self
    }
}

impl fmt::Display for ExecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {:?}: {}", self.step_index, self.kind, self.detail)
    }
}

impl std::error::Error for ExecError {}

use ExecErrorKind as K;

/// Resolves a reference to a 1-based beaker position.
///
/// With a color, the candidates are the non-empty beakers holding only that
/// color, left to right; the index then counts within the candidates.
pub fn resolve_beaker(state: &AlchemyState, r: BeakerRef) -> Result<usize, ExecError> {
    let index = r.index();
    let nth = index.unsigned_abs() as usize;
    let from_right = index < 0;
    let found = match r.color() {
        None => (nth <= ALCHEMY_BEAKERS).then(|| if from_right { ALCHEMY_BEAKERS + 1 - nth } else { nth }),
        Some(c) => {
            let is_candidate = |p: &usize| {
                let b = state.beaker(*p);
                !b.is_empty() && b.iter().all(|u| *u == c)
            };
            if from_right {
                (1..=ALCHEMY_BEAKERS).rev().filter(is_candidate).nth(nth - 1)
            } else {
                (1..=ALCHEMY_BEAKERS).filter(is_candidate).nth(nth - 1)
            }
        }
    };
    found.ok_or_else(|| ExecError::new(K::InvalidReference, format!("{r} matches no beaker")))
}

pub(crate) fn apply_alchemy(state: &mut AlchemyState, action: &AlchemyAction) -> Result<(), ExecError> {
    match *action {
        AlchemyAction::Mix(r) => {
            let p = resolve_beaker(state, r)?;
            let beaker = state.beaker_mut(p);
            if beaker.is_empty() {
                return Err(ExecError::new(K::EmptySource, format!("mix on empty beaker {p}")));
            }
            beaker.iter_mut().for_each(|u| *u = Color::Brown);
        }
        AlchemyAction::Pour(src, dst) => {
            let s = resolve_beaker(state, src)?;
            let d = resolve_beaker(state, dst)?;
            if s == d {
                return Err(ExecError::new(K::InvalidReference, format!("pour from beaker {s} into itself")));
            }
            let moved = state.beaker(s).len();
            if moved == 0 {
                return Err(ExecError::new(K::EmptySource, format!("pour from empty beaker {s}")));
            }
            if state.beaker(d).len() + moved > BEAKER_CAPACITY {
                return Err(ExecError::new(
                    K::CapacityExceeded,
                    format!("beaker {d} cannot take {moved} more unit(s)"),
                ));
            }
            let units = std::mem::take(state.beaker_mut(s));
            state.beaker_mut(d).extend(units);
        }
        AlchemyAction::Drain(r, amount) => {
            let p = resolve_beaker(state, r)?;
            let have = state.beaker(p).len();
            if have == 0 {
                return Err(ExecError::new(K::EmptySource, format!("drain on empty beaker {p}")));
            }
            let remove = amount.units(have).ok_or_else(|| {
                ExecError::new(K::NonIntegralFraction, format!("{amount} of {have} unit(s) is not whole"))
            })?;
            if remove > have {
                return Err(ExecError::new(K::Overflow, format!("drain {remove} from {have} unit(s)")));
            }
            state.beaker_mut(p).truncate(have - remove);
        }
    }
    Ok(())
}

fn scene_position(p: u8) -> Result<usize, ExecError> {
    let p = p as usize;
    if (1..=SCENE_POSITIONS).contains(&p) {
        Ok(p)
    } else {
        Err(ExecError::new(K::InvalidReference, format!("position {p} out of range")))
    }
}

pub(crate) fn apply_scene(state: &mut SceneState, action: &SceneAction) -> Result<(), ExecError> {
    let p = scene_position(action.position())?;
    let slot = state.slot_mut(p);
    match (*action, slot.as_mut()) {
        (SceneAction::Person(_, shirt), None) => *slot = Some(Person { shirt, hat: None }),
        (SceneAction::Person(..), Some(_)) => {
            return Err(ExecError::new(K::OccupiedPosition, format!("position {p} is occupied")))
        }
        (_, None) => return Err(ExecError::new(K::VacantPosition, format!("position {p} is empty"))),
        (SceneAction::RmPerson(_), Some(_)) => *slot = None,
        (SceneAction::Hat(_, hat), Some(person)) => {
            if person.hat.is_some() {
                return Err(ExecError::new(K::HatConflict, format!("person at {p} already wears a hat")));
            }
            person.hat = Some(hat);
        }
        (SceneAction::RmHat(_), Some(person)) => {
            if person.hat.take().is_none() {
                return Err(ExecError::new(K::HatConflict, format!("person at {p} has no hat")));
            }
        }
    }
    Ok(())
}

pub(crate) fn apply_tangrams(state: &mut TangramsState, action: &TangramsAction) -> Result<(), ExecError> {
    let len = state.len();
    match *action {
        TangramsAction::Remove(i) => {
            let i = i as usize;
            if i == 0 || i > len {
                return Err(ExecError::new(K::InvalidReference, format!("no object at {i} (length {len})")));
            }
            state.objects_mut().remove(i - 1);
        }
        TangramsAction::Insert(i, object) => {
            let i = i as usize;
            if len == TANGRAMS_SLOTS {
                return Err(ExecError::new(K::CapacityExceeded, "all five slots are filled"));
            }
            if i == 0 || i > len + 1 {
                return Err(ExecError::new(K::InvalidReference, format!("cannot insert at {i} (length {len})")));
            }
            if state.contains(object) {
                return Err(ExecError::new(K::DuplicateObject, format!("{object} is already present")));
            }
            state.objects_mut().insert(i - 1, object);
        }
    }
    Ok(())
}

pub(crate) fn apply_entity(state: &mut EntityState, action: &EntityAction) -> Result<(), ExecError> {
    let name = action.participant();
    let index = state
        .position(name.as_str())
        .ok_or_else(|| ExecError::new(K::UnknownEntity, format!("no entity `{name}`")))?;
    let current = &state.entries()[index].1;
    let next = match action {
        EntityAction::Create { location, .. } => {
            if current.exists() {
                return Err(ExecError::new(K::AlreadyExists, format!("`{name}` already exists at {current}")));
            }
            location.clone().map_or(Location::Unknown, Location::Named)
        }
        EntityAction::Move { from, to, .. } => {
            match current {
                Location::Named(at) if at == from => {}
                _ => {
                    return Err(ExecError::new(
                        K::LocationMismatch,
                        format!("`{name}` is at {current}, not {from}"),
                    ))
                }
            }
            Location::Named(to.clone())
        }
        EntityAction::Destroy { .. } => {
            if !current.exists() {
                return Err(ExecError::new(K::InvalidReference, format!("`{name}` does not exist")));
            }
            Location::NonExistent
        }
    };
    state.set_location(index, next);
    Ok(())
}

pub fn exec_alchemy(state: &AlchemyState, action: &AlchemyAction) -> Result<AlchemyState, ExecError> {
    let mut next = state.clone();
    apply_alchemy(&mut next, action)?;
    Ok(next)
}

pub fn exec_scene(state: &SceneState, action: &SceneAction) -> Result<SceneState, ExecError> {
    let mut next = state.clone();
    apply_scene(&mut next, action)?;
    Ok(next)
}

pub fn exec_tangrams(state: &TangramsState, action: &TangramsAction) -> Result<TangramsState, ExecError> {
    let mut next = state.clone();
    apply_tangrams(&mut next, action)?;
    Ok(next)
}

pub fn exec_entity(state: &EntityState, action: &EntityAction) -> Result<EntityState, ExecError> {
    let mut next = state.clone();
    apply_entity(&mut next, action)?;
    Ok(next)
}

fn run<S, A>(
    state: &mut S,
    actions: &[A],
    apply: fn(&mut S, &A) -> Result<(), ExecError>,
    mut observe: impl FnMut(&S),
) -> Result<(), ExecError> {
    for (i, a) in actions.iter().enumerate() {
        apply(state, a).map_err(|e| e.at(i))?;
        observe(state);
    }
    Ok(())
}

fn fold(state: &EnvState, program: &Program, mut observe: impl FnMut(EnvState)) -> Result<EnvState, ExecError> {
    let mismatch = || {
        ExecError::new(
            K::DomainMismatch,
            format!("{} program on {} state", program.domain(), state.domain()),
        )
    };
    Ok(match (state, program.actions()) {
        (EnvState::Alchemy(s), Actions::Alchemy(a)) => {
            let mut s = s.clone();
            run(&mut s, a, apply_alchemy, |s| observe(EnvState::Alchemy(s.clone())))?;
            EnvState::Alchemy(s)
        }
        (EnvState::Scene(s), Actions::Scene(a)) => {
            let mut s = s.clone();
            run(&mut s, a, apply_scene, |s| observe(EnvState::Scene(s.clone())))?;
            EnvState::Scene(s)
        }
        (EnvState::Tangrams(s), Actions::Tangrams(a)) => {
            let mut s = s.clone();
            run(&mut s, a, apply_tangrams, |s| observe(EnvState::Tangrams(s.clone())))?;
            EnvState::Tangrams(s)
        }
        (EnvState::ProPara(s), Actions::ProPara(a)) => {
            let mut s = s.clone();
            run(&mut s, a, apply_entity, |s| observe(EnvState::ProPara(s.clone())))?;
            EnvState::ProPara(s)
        }
        (EnvState::Recipes(s), Actions::Recipes(a)) => {
            let mut s = s.clone();
            run(&mut s, a, apply_entity, |s| observe(EnvState::Recipes(s.clone())))?;
            EnvState::Recipes(s)
        }
        _ => return Err(mismatch()),
    })
}

/// Runs `program` from `state`; the first failing action aborts with its step index.
pub fn execute_program(state: &EnvState, program: &Program) -> Result<EnvState, ExecError> {
    fold(state, program, |_| {})
}

/// Like [`execute_program`] but returns every state: the initial one followed by one per action.
pub fn execute_with_trace(state: &EnvState, program: &Program) -> Result<Vec<EnvState>, ExecError> {
    let mut trace = Vec::with_capacity(program.len() + 1);
    trace.push(state.clone());
    fold(state, program, |s| trace.push(s))?;
    Ok(trace)
}
