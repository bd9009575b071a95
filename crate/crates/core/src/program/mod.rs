//! Program ASTs for the five action grammars, with a canonical printer.
//!
//! Canonical surface form: one space around every punctuation token inside a
//! call and ` ; ` between actions, e.g. `Person ( 2 , r ) ; Hat ( 2 , y )`.

mod grammar;
mod parse;

use std::fmt;

use crate::state::{Color, Domain, Span, TangramObject, ALCHEMY_BEAKERS, SCENE_POSITIONS, TANGRAMS_SLOTS};

pub use grammar::{enumerate_grammar, Grammar, Production, Signature};
pub use parse::parse_program;

/// `Beaker ( index )` or `Beaker ( index , color )`. Negative indices count from the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BeakerRef {
    index: i8,
    color: Option<Color>,
}

impl BeakerRef {
    pub fn new(index: i8, color: Option<Color>) -> Option<Self> {
        let valid = index != 0 && index.unsigned_abs() as usize <= ALCHEMY_BEAKERS;
        valid.then_some(Self { index, color })
    }

    pub fn index(self) -> i8 {
        self.index
    }

    pub fn color(self) -> Option<Color> {
        self.color
    }

    /// All 98 references the grammar can express.
    pub fn all() -> impl Iterator<Item = BeakerRef> {
        let colors = std::iter::once(None).chain(Color::ALL.into_iter().map(Some));
        colors.flat_map(|color| {
            (1..=ALCHEMY_BEAKERS as i8)
                .chain((1..=ALCHEMY_BEAKERS as i8).map(|i| -i))
                .map(move |index| BeakerRef { index, color })
        })
    }
}

impl fmt::Display for BeakerRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.color {
            None => write!(f, "Beaker ( {} )", self.index),
            Some(c) => write!(f, "Beaker ( {} , {} )", self.index, c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fraction {
    OneHalf,
    OneThird,
    OneQuarter,
    TwoThirds,
    TwoQuarters,
    ThreeQuarters,
}

impl Fraction {
    pub const ALL: [Fraction; 6] = [
        Fraction::OneHalf,
        Fraction::OneThird,
        Fraction::OneQuarter,
        Fraction::TwoThirds,
        Fraction::TwoQuarters,
        Fraction::ThreeQuarters,
    ];

    pub fn parts(self) -> (u32, u32) {
        match self {
            Fraction::OneHalf => (1, 2),
            Fraction::OneThird => (1, 3),
            Fraction::OneQuarter => (1, 4),
            Fraction::TwoThirds => (2, 3),
            Fraction::TwoQuarters => (2, 4),
            Fraction::ThreeQuarters => (3, 4),
        }
    }

    pub fn from_parts(numerator: u32, denominator: u32) -> Option<Self> {
        Fraction::ALL.into_iter().find(|f| f.parts() == (numerator, denominator))
    }

    /// Units removed from a beaker holding `units`, if the product is whole.
    pub fn of(self, units: usize) -> Option<usize> {
        let (n, d) = self.parts();
        let scaled = n as usize * units;
        scaled.is_multiple_of(d as usize).then_some(scaled / d as usize)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = self.parts();
        write!(f, "{n}/{d}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Amount {
    /// 1..=4 units.
    Units(u8),
    Fraction(Fraction),
}

impl Amount {
    /// The ten literals of the grammar.
    pub fn all() -> impl Iterator<Item = Amount> {
        (1..=4u8)
            .map(Amount::Units)
            .chain(Fraction::ALL.into_iter().map(Amount::Fraction))
    }

    pub fn units(self, available: usize) -> Option<usize> {
        match self {
            Amount::Units(k) => Some(k as usize),
            Amount::Fraction(f) => f.of(available),
        }
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Amount::Units(k) => write!(f, "{k}"),
            Amount::Fraction(fr) => write!(f, "{fr}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlchemyAction {
    Mix(BeakerRef),
    Pour(BeakerRef, BeakerRef),
    Drain(BeakerRef, Amount),
}

impl AlchemyAction {
    pub fn function(&self) -> &'static str {
        match self {
            AlchemyAction::Mix(_) => "Mix",
            AlchemyAction::Pour(..) => "Pour",
            AlchemyAction::Drain(..) => "Drain",
        }
    }
}

impl fmt::Display for AlchemyAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlchemyAction::Mix(b) => write!(f, "Mix ( {b} )"),
            AlchemyAction::Pour(src, dst) => write!(f, "Pour ( {src} , {dst} )"),
            AlchemyAction::Drain(b, amount) => write!(f, "Drain ( {b} , {amount} )"),
        }
    }
}

/// Positions are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SceneAction {
    Person(u8, Color),
    RmPerson(u8),
    Hat(u8, Color),
    RmHat(u8),
}

impl SceneAction {
    pub fn position(&self) -> u8 {
        match *self {
            SceneAction::Person(p, _) | SceneAction::RmPerson(p) | SceneAction::Hat(p, _) | SceneAction::RmHat(p) => p,
        }
    }

    pub fn function(&self) -> &'static str {
        match self {
            SceneAction::Person(..) => "Person",
            SceneAction::RmPerson(_) => "RmPerson",
            SceneAction::Hat(..) => "Hat",
            SceneAction::RmHat(_) => "RmHat",
        }
    }
}

impl fmt::Display for SceneAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SceneAction::Person(p, c) => write!(f, "Person ( {p} , {c} )"),
            SceneAction::RmPerson(p) => write!(f, "RmPerson ( {p} )"),
            SceneAction::Hat(p, c) => write!(f, "Hat ( {p} , {c} )"),
            SceneAction::RmHat(p) => write!(f, "RmHat ( {p} )"),
        }
    }
}

/// Positions are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TangramsAction {
    Insert(u8, TangramObject),
    Remove(u8),
}

impl TangramsAction {
    pub fn position(&self) -> u8 {
        match *self {
            TangramsAction::Insert(p, _) | TangramsAction::Remove(p) => p,
        }
    }

    pub fn function(&self) -> &'static str {
        match self {
            TangramsAction::Insert(..) => "Insert",
            TangramsAction::Remove(_) => "Remove",
        }
    }
}

impl fmt::Display for TangramsAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TangramsAction::Insert(p, o) => write!(f, "Insert ( {p} , {o} )"),
            TangramsAction::Remove(p) => write!(f, "Remove ( {p} )"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EntityAction {
    /// `location: None` is the `?` form.
    Create { participant: Span, location: Option<Span> },
    Move { participant: Span, from: Span, to: Span },
    Destroy { participant: Span },
}

impl EntityAction {
    pub fn participant(&self) -> &Span {
        match self {
            EntityAction::Create { participant, .. }
            | EntityAction::Move { participant, .. }
            | EntityAction::Destroy { participant } => participant,
        }
    }

    pub fn function(&self) -> &'static str {
        match self {
            EntityAction::Create { .. } => "Create",
            EntityAction::Move { .. } => "Move",
            EntityAction::Destroy { .. } => "Destroy",
        }
    }
}

impl fmt::Display for EntityAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntityAction::Create { participant, location: Some(l) } => write!(f, "Create ( {participant} , {l} )"),
            EntityAction::Create { participant, location: None } => write!(f, "Create ( {participant} , ? )"),
            EntityAction::Move { participant, from, to } => write!(f, "Move ( {participant} , {from} , {to} )"),
            EntityAction::Destroy { participant } => write!(f, "Destroy ( {participant} )"),
        }
    }
}

/// Action sequences tagged by domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Actions {
    Alchemy(Vec<AlchemyAction>),
    Scene(Vec<SceneAction>),
    Tangrams(Vec<TangramsAction>),
    ProPara(Vec<EntityAction>),
    Recipes(Vec<EntityAction>),
}

impl Actions {
    pub fn domain(&self) -> Domain {
        match self {
            Actions::Alchemy(_) => Domain::Alchemy,
            Actions::Scene(_) => Domain::Scene,
            Actions::Tangrams(_) => Domain::Tangrams,
            Actions::ProPara(_) => Domain::ProPara,
            Actions::Recipes(_) => Domain::Recipes,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Actions::Alchemy(a) => a.len(),
            Actions::Scene(a) => a.len(),
            Actions::Tangrams(a) => a.len(),
            Actions::ProPara(a) | Actions::Recipes(a) => a.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Function names in order.
    pub fn functions(&self) -> Vec<&'static str> {
        match self {
            Actions::Alchemy(a) => a.iter().map(AlchemyAction::function).collect(),
            Actions::Scene(a) => a.iter().map(SceneAction::function).collect(),
            Actions::Tangrams(a) => a.iter().map(TangramsAction::function).collect(),
            Actions::ProPara(a) | Actions::Recipes(a) => a.iter().map(EntityAction::function).collect(),
        }
    }

    fn rendered(&self) -> Vec<String> {
        fn each<T: fmt::Display>(v: &[T]) -> Vec<String> {
            v.iter().map(ToString::to_string).collect()
        }
        match self {
            Actions::Alchemy(a) => each(a),
            Actions::Scene(a) => each(a),
            Actions::Tangrams(a) => each(a),
            Actions::ProPara(a) | Actions::Recipes(a) => each(a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProgramError {
    Empty,
    OutOfRange { step: usize, detail: String },
    DomainMismatch { left: Domain, right: Domain },
}

impl fmt::Display for ProgramError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProgramError::Empty => write!(f, "program has no actions"),
            ProgramError::OutOfRange { step, detail } => write!(f, "action {step}: {detail}"),
            ProgramError::DomainMismatch { left, right } => write!(f, "cannot combine {left} and {right} programs"),
        }
    }
}

impl std::error::Error for ProgramError {}

/// A non-empty action sequence with every literal inside its grammar range.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    actions: Actions,
}

impl Program {
    pub fn new(actions: Actions) -> Result<Self, ProgramError> {
        if actions.is_empty() {
            return Err(ProgramError::Empty);
        }
        let out_of_range = |step: usize, what: &str, value: u8, max: usize| {
            Err(ProgramError::OutOfRange {
                step,
                detail: format!("{what} {value} not in 1..={max}"),
            })
        };
        match &actions {
            Actions::Scene(acts) => {
                for (i, a) in acts.iter().enumerate() {
                    let p = a.position();
                    if p == 0 || p as usize > SCENE_POSITIONS {
                        return out_of_range(i, "position", p, SCENE_POSITIONS);
                    }
                }
            }
            Actions::Tangrams(acts) => {
                for (i, a) in acts.iter().enumerate() {
                    let p = a.position();
                    if p == 0 || p as usize > TANGRAMS_SLOTS {
                        return out_of_range(i, "position", p, TANGRAMS_SLOTS);
                    }
                }
            }
            Actions::Alchemy(acts) => {
                for (i, a) in acts.iter().enumerate() {
                    if let AlchemyAction::Drain(_, Amount::Units(k)) = a {
                        if !(1..=4).contains(k) {
                            return out_of_range(i, "amount", *k, 4);
                        }
                    }
                }
            }
            Actions::ProPara(_) | Actions::Recipes(_) => {}
        }
        Ok(Self { actions })
    }

    pub fn domain(&self) -> Domain {
        self.actions.domain()
    }

    pub fn actions(&self) -> &Actions {
        &self.actions
    }

    pub fn into_actions(self) -> Actions {
        self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn render(&self) -> String {
        render_program(self)
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &Program) -> Result<Program, ProgramError> {
        let actions = match (&self.actions, &other.actions) {
            (Actions::Alchemy(a), Actions::Alchemy(b)) => Actions::Alchemy([a.as_slice(), b].concat()),
            (Actions::Scene(a), Actions::Scene(b)) => Actions::Scene([a.as_slice(), b].concat()),
            (Actions::Tangrams(a), Actions::Tangrams(b)) => Actions::Tangrams([a.as_slice(), b].concat()),
            (Actions::ProPara(a), Actions::ProPara(b)) => Actions::ProPara([a.as_slice(), b].concat()),
            (Actions::Recipes(a), Actions::Recipes(b)) => Actions::Recipes([a.as_slice(), b].concat()),
            _ => {
                return Err(ProgramError::DomainMismatch {
                    left: self.domain(),
                    right: other.domain(),
                })
            }
        };
        Ok(Program { actions })
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_program(self))
    }
}

pub fn render_program(program: &Program) -> String {
    program.actions.rendered().join(" ; ")
}
