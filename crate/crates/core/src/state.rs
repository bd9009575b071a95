//! Environment states for the five domains and their canonical text encoding.
//!
//! The encoding is a frozen wire format shared with the sequence model:
//!
//! ```text
//! alchemy   1:rr|2:gg|3:g|4:ooo|5:_|6:_|7:_
//! scene     1:__|2:bp|3:__|4:oy|5:__|6:__|7:__|8:__|9:__|10:__
//! tangrams  1:A|2:C|3:_|4:_|5:_
//! propara   ent:water|light|carbon loc:soil|sun|cloud
//! ```
//!
//! Slots are separated by `|`, indices are 1-based decimal and `_` marks
//! absence. Entity states carry two parallel lists separated by one space.

use std::fmt;
use std::str::FromStr;

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};

use crate::error::{ParseError, ParseErrorKind};

pub const ALCHEMY_BEAKERS: usize = 7;
pub const BEAKER_CAPACITY: usize = 4;
pub const SCENE_POSITIONS: usize = 10;
pub const TANGRAMS_SLOTS: usize = 5;

/// The five environments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Alchemy,
    Scene,
    Tangrams,
    ProPara,
    Recipes,
}

impl Domain {
    pub const ALL: [Domain; 5] = [
        Domain::Alchemy,
        Domain::Scene,
        Domain::Tangrams,
        Domain::ProPara,
        Domain::Recipes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Domain::Alchemy => "alchemy",
            Domain::Scene => "scene",
            Domain::Tangrams => "tangrams",
            Domain::ProPara => "propara",
            Domain::Recipes => "recipes",
        }
    }

    /// Alchemy, Scene and Tangrams: fixed-size symbolic worlds scored by denotation accuracy.
    pub fn is_scone(self) -> bool {
        matches!(self, Domain::Alchemy | Domain::Scene | Domain::Tangrams)
    }

    pub fn is_entity(self) -> bool {
        !self.is_scone()
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "alchemy" => Ok(Domain::Alchemy),
            "scene" => Ok(Domain::Scene),
            "tangrams" => Ok(Domain::Tangrams),
            "propara" => Ok(Domain::ProPara),
            "recipes" => Ok(Domain::Recipes),
            other => Err(format!("unknown domain `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Red,
    Green,
    Orange,
    Purple,
    Yellow,
    Brown,
}

impl Color {
    pub const ALL: [Color; 6] = [
        Color::Red,
        Color::Green,
        Color::Orange,
        Color::Purple,
        Color::Yellow,
        Color::Brown,
    ];

    pub fn code(self) -> char {
        match self {
            Color::Red => 'r',
            Color::Green => 'g',
            Color::Orange => 'o',
            Color::Purple => 'p',
            Color::Yellow => 'y',
            Color::Brown => 'b',
        }
    }

    pub fn from_code(c: char) -> Option<Color> {
        Some(match c {
            'r' => Color::Red,
            'g' => Color::Green,
            'o' => Color::Orange,
            'p' => Color::Purple,
            'y' => Color::Yellow,
            'b' => Color::Brown,
            _ => return None,
        })
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// A beaker's contents, bottom unit first.
pub type Beaker = ArrayVec<Color, BEAKER_CAPACITY>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct AlchemyState {
    beakers: [Beaker; ALCHEMY_BEAKERS],
}

impl AlchemyState {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a state from per-beaker unit lists (bottom to top).
    pub fn from_units<I, B>(beakers: I) -> Result<Self, String>
    where
        I: IntoIterator<Item = B>,
        B: AsRef<[Color]>,
    {
        let mut state = Self::default();
        let mut count = 0;
        for (i, units) in beakers.into_iter().enumerate() {
            let units = units.as_ref();
            if i >= ALCHEMY_BEAKERS {
                return Err(format!("more than {ALCHEMY_BEAKERS} beakers"));
            }
            if units.len() > BEAKER_CAPACITY {
                return Err(format!(
                    "beaker {} holds {} units, capacity is {BEAKER_CAPACITY}",
                    i + 1,
                    units.len()
                ));
            }
            state.beakers[i] = units.iter().copied().collect();
            count += 1;
        }
        if count != ALCHEMY_BEAKERS {
            return Err(format!("expected {ALCHEMY_BEAKERS} beakers, got {count}"));
        }
        Ok(state)
    }

    pub fn beakers(&self) -> &[Beaker; ALCHEMY_BEAKERS] {
        &self.beakers
    }

    /// Beaker at 1-based `position`.
    pub fn beaker(&self, position: usize) -> &Beaker {
        &self.beakers[position - 1]
    }

    pub(crate) fn beaker_mut(&mut self, position: usize) -> &mut Beaker {
        &mut self.beakers[position - 1]
    }

    pub fn total_units(&self) -> usize {
        self.beakers.iter().map(|b| b.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Person {
    pub shirt: Color,
    pub hat: Option<Color>,
}

/// Ten positions; a hat can only exist on a person, which the slot type enforces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SceneState {
    slots: [Option<Person>; SCENE_POSITIONS],
}

impl SceneState {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_slots(slots: [Option<Person>; SCENE_POSITIONS]) -> Self {
        Self { slots }
    }

    pub fn slots(&self) -> &[Option<Person>; SCENE_POSITIONS] {
        &self.slots
    }

    /// Slot at 1-based `position`.
    pub fn slot(&self, position: usize) -> Option<Person> {
        self.slots[position - 1]
    }

    pub(crate) fn slot_mut(&mut self, position: usize) -> &mut Option<Person> {
        &mut self.slots[position - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TangramObject {
    A,
    B,
    C,
    D,
    E,
}

impl TangramObject {
    pub const ALL: [TangramObject; 5] = [
        TangramObject::A,
        TangramObject::B,
        TangramObject::C,
        TangramObject::D,
        TangramObject::E,
    ];

    pub fn name(self) -> char {
        match self {
            TangramObject::A => 'A',
            TangramObject::B => 'B',
            TangramObject::C => 'C',
            TangramObject::D => 'D',
            TangramObject::E => 'E',
        }
    }

    pub fn from_name(c: char) -> Option<Self> {
        Some(match c {
            'A' => TangramObject::A,
            'B' => TangramObject::B,
            'C' => TangramObject::C,
            'D' => TangramObject::D,
            'E' => TangramObject::E,
            _ => return None,
        })
    }
}

impl fmt::Display for TangramObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Ordered list of distinct objects. Padding to five slots happens only when rendering.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TangramsState {
    objects: ArrayVec<TangramObject, TANGRAMS_SLOTS>,
}

impl TangramsState {
    pub fn new(objects: &[TangramObject]) -> Result<Self, String> {
        if objects.len() > TANGRAMS_SLOTS {
            return Err(format!("more than {TANGRAMS_SLOTS} objects"));
        }
        for (i, o) in objects.iter().enumerate() {
            if objects[..i].contains(o) {
                return Err(format!("duplicate object {o}"));
            }
        }
        Ok(Self {
            objects: objects.iter().copied().collect(),
        })
    }

    pub fn objects(&self) -> &[TangramObject] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn contains(&self, object: TangramObject) -> bool {
        self.objects.contains(&object)
    }

    pub(crate) fn objects_mut(&mut self) -> &mut ArrayVec<TangramObject, TANGRAMS_SLOTS> {
        &mut self.objects
    }
}

/// A free-text span naming an entity or a location.
///
/// Non-empty, no surrounding whitespace, none of `| : ( ) , ;` and no line
/// breaks, and never one of the reserved tokens `-` / `?`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Span(String);

pub const RESERVED_SPAN_CHARS: &[char] = &['|', ':', '(', ')', ',', ';', '\n', '\r'];

impl Span {
    pub fn new(text: impl Into<String>) -> Result<Self, String> {
        let text = text.into();
        if text.is_empty() {
            return Err("empty span".into());
        }
        if text.trim() != text {
            return Err(format!("span `{text}` has surrounding whitespace"));
        }
        if let Some(c) = text.chars().find(|c| RESERVED_SPAN_CHARS.contains(c)) {
            return Err(format!("span `{text}` contains reserved character `{c}`"));
        }
        if text == "-" || text == "?" {
            return Err(format!("`{text}` is a reserved token"));
        }
        Ok(Self(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Span {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Span::new(value)
    }
}

impl From<Span> for String {
    fn from(s: Span) -> String {
        s.0
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Location {
    /// Rendered `-`.
    NonExistent,
    /// Rendered `?`.
    Unknown,
    Named(Span),
}

impl Location {
    pub fn exists(&self) -> bool {
        !matches!(self, Location::NonExistent)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        match text {
            "-" => Ok(Location::NonExistent),
            "?" => Ok(Location::Unknown),
            other => Span::new(other).map(Location::Named),
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::NonExistent => f.write_str("-"),
            Location::Unknown => f.write_str("?"),
            Location::Named(s) => f.write_str(s.as_str()),
        }
    }
}

/// Entity participants and their locations, shared by ProPara and Recipes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct EntityState {
    entries: Vec<(Span, Location)>,
}

impl EntityState {
    pub fn new(entries: Vec<(Span, Location)>) -> Result<Self, String> {
        for (i, (name, _)) in entries.iter().enumerate() {
            if entries[..i].iter().any(|(n, _)| n == name) {
                return Err(format!("duplicate entity `{name}`"));
            }
        }
        Ok(Self { entries })
    }

    /// Convenience constructor from string pairs; locations use the `-`/`?` tokens.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, String> {
        let entries = pairs
            .into_iter()
            .map(|(n, l)| Ok((Span::new(n)?, Location::parse(l)?)))
            .collect::<Result<Vec<_>, String>>()?;
        Self::new(entries)
    }

    pub fn entries(&self) -> &[(Span, Location)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|(n, _)| n.as_str() == name)
    }

    pub fn location(&self, name: &str) -> Option<&Location> {
        self.entries.iter().find(|(n, _)| n.as_str() == name).map(|(_, l)| l)
    }

    pub fn names(&self) -> impl Iterator<Item = &Span> {
        self.entries.iter().map(|(n, _)| n)
    }

    pub fn same_entities(&self, other: &EntityState) -> bool {
        self.entries.len() == other.entries.len() && self.names().eq(other.names())
    }

    pub(crate) fn set_location(&mut self, index: usize, location: Location) {
        self.entries[index].1 = location;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EnvState {
    Alchemy(AlchemyState),
    Scene(SceneState),
    Tangrams(TangramsState),
    ProPara(EntityState),
    Recipes(EntityState),
}

impl EnvState {
    pub fn domain(&self) -> Domain {
        match self {
            EnvState::Alchemy(_) => Domain::Alchemy,
            EnvState::Scene(_) => Domain::Scene,
            EnvState::Tangrams(_) => Domain::Tangrams,
            EnvState::ProPara(_) => Domain::ProPara,
            EnvState::Recipes(_) => Domain::Recipes,
        }
    }

    pub fn entity(&self) -> Option<&EntityState> {
        match self {
            EnvState::ProPara(s) | EnvState::Recipes(s) => Some(s),
            _ => None,
        }
    }

    pub fn from_entity(domain: Domain, state: EntityState) -> Option<Self> {
        match domain {
            Domain::ProPara => Some(EnvState::ProPara(state)),
            Domain::Recipes => Some(EnvState::Recipes(state)),
            _ => None,
        }
    }

    pub fn render(&self) -> String {
        render_state(self)
    }

    /// Re-checks every invariant from scratch.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            EnvState::Alchemy(s) => {
                if let Some(i) = s.beakers.iter().position(|b| b.len() > BEAKER_CAPACITY) {
                    return Err(format!("beaker {} over capacity", i + 1));
                }
            }
            EnvState::Scene(_) => {}
            EnvState::Tangrams(s) => {
                TangramsState::new(s.objects())?;
            }
            EnvState::ProPara(s) | EnvState::Recipes(s) => {
                for (n, l) in &s.entries {
                    Span::new(n.as_str())?;
                    if let Location::Named(l) = l {
                        Span::new(l.as_str())?;
                    }
                }
                EntityState::new(s.entries.clone())?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for EnvState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_state(self))
    }
}

pub fn render_state(state: &EnvState) -> String {
    let mut out = String::with_capacity(64);
    match state {
        EnvState::Alchemy(s) => {
            for (i, beaker) in s.beakers.iter().enumerate() {
                if i > 0 {
                    out.push('|');
                }
                push_index(&mut out, i + 1);
                if beaker.is_empty() {
                    out.push('_');
                } else {
                    out.extend(beaker.iter().map(|c| c.code()));
                }
            }
        }
        EnvState::Scene(s) => {
            for (i, slot) in s.slots.iter().enumerate() {
                if i > 0 {
                    out.push('|');
                }
                push_index(&mut out, i + 1);
                match slot {
                    None => out.push_str("__"),
                    Some(p) => {
                        out.push(p.shirt.code());
                        out.push(p.hat.map_or('_', Color::code));
                    }
                }
            }
        }
        EnvState::Tangrams(s) => {
            for i in 0..TANGRAMS_SLOTS {
                if i > 0 {
                    out.push('|');
                }
                push_index(&mut out, i + 1);
                out.push(s.objects.get(i).map_or('_', |o| o.name()));
            }
        }
        EnvState::ProPara(s) | EnvState::Recipes(s) => {
            out.push_str("ent:");
            for (i, (name, _)) in s.entries.iter().enumerate() {
                if i > 0 {
                    out.push('|');
                }
                out.push_str(name.as_str());
            }
            out.push_str(" loc:");
            for (i, (_, loc)) in s.entries.iter().enumerate() {
                if i > 0 {
                    out.push('|');
                }
                match loc {
                    Location::NonExistent => out.push('-'),
                    Location::Unknown => out.push('?'),
                    Location::Named(l) => out.push_str(l.as_str()),
                }
            }
        }
    }
    out
}

fn push_index(out: &mut String, i: usize) {
    use std::fmt::Write;
    let _ = write!(out, "{i}:");
}

pub fn parse_state(domain: Domain, text: &str) -> Result<EnvState, ParseError> {
    let lead = text.len() - text.trim_start().len();
    let body = text.trim();
    let parsed = match domain {
        Domain::Alchemy => parse_alchemy(body).map(EnvState::Alchemy),
        Domain::Scene => parse_scene(body).map(EnvState::Scene),
        Domain::Tangrams => parse_tangrams(body).map(EnvState::Tangrams),
        Domain::ProPara => parse_entity(body).map(EnvState::ProPara),
        Domain::Recipes => parse_entity(body).map(EnvState::Recipes),
    };
    parsed.map_err(|e| e.shifted(lead))
}

/// Splits `i:payload|i:payload|...`, checking the running indices.
fn indexed_slots(body: &str, expected: usize) -> Result<Vec<(usize, &str)>, ParseError> {
    let mut slots = Vec::with_capacity(expected);
    let mut offset = 0;
    for (n, part) in body.split('|').enumerate() {
        let colon = part.find(':').ok_or_else(|| {
            ParseError::new(offset, ParseErrorKind::Syntax(format!("slot `{part}` lacks `:`")))
        })?;
        let index_text = &part[..colon];
        let want = n + 1;
        if index_text != want.to_string() {
            return Err(ParseError::new(
                offset,
                ParseErrorKind::BadIndex(format!("expected index {want}, found `{index_text}`")),
            ));
        }
        slots.push((offset + colon + 1, &part[colon + 1..]));
        offset += part.len() + 1;
    }
    if slots.len() != expected {
        return Err(ParseError::new(
            0,
            ParseErrorKind::WrongSlotCount {
                expected,
                found: slots.len(),
            },
        ));
    }
    Ok(slots)
}

fn parse_color(c: char, pos: usize) -> Result<Color, ParseError> {
    Color::from_code(c).ok_or_else(|| ParseError::new(pos, ParseErrorKind::UnknownColor(c)))
}

fn parse_alchemy(body: &str) -> Result<AlchemyState, ParseError> {
    let mut state = AlchemyState::default();
    for (i, (pos, payload)) in indexed_slots(body, ALCHEMY_BEAKERS)?.into_iter().enumerate() {
        if payload == "_" {
            continue;
        }
        if payload.is_empty() {
            return Err(ParseError::new(pos, ParseErrorKind::Syntax("empty beaker payload".into())));
        }
        let beaker = &mut state.beakers[i];
        for (k, c) in payload.chars().enumerate() {
            let color = parse_color(c, pos + k)?;
            if beaker.try_push(color).is_err() {
                return Err(ParseError::new(
                    pos,
                    ParseErrorKind::Capacity(format!("beaker {} holds more than {BEAKER_CAPACITY} units", i + 1)),
                ));
            }
        }
    }
    Ok(state)
}

fn parse_scene(body: &str) -> Result<SceneState, ParseError> {
    let mut state = SceneState::default();
    for (i, (pos, payload)) in indexed_slots(body, SCENE_POSITIONS)?.into_iter().enumerate() {
        let chars: Vec<char> = payload.chars().collect();
        if chars.len() != 2 {
            return Err(ParseError::new(
                pos,
                ParseErrorKind::Syntax(format!("position payload `{payload}` must be two characters")),
            ));
        }
        state.slots[i] = match (chars[0], chars[1]) {
            ('_', '_') => None,
            ('_', _) => return Err(ParseError::new(pos, ParseErrorKind::HatOnEmpty(i + 1))),
            (shirt, hat) => Some(Person {
                shirt: parse_color(shirt, pos)?,
                hat: if hat == '_' { None } else { Some(parse_color(hat, pos + 1)?) },
            }),
        };
    }
    Ok(state)
}

fn parse_tangrams(body: &str) -> Result<TangramsState, ParseError> {
    let mut state = TangramsState::default();
    let mut padding = false;
    for (pos, payload) in indexed_slots(body, TANGRAMS_SLOTS)? {
        match payload {
            "_" => padding = true,
            _ => {
                let mut chars = payload.chars();
                let object = match (chars.next(), chars.next()) {
                    (Some(c), None) => TangramObject::from_name(c),
                    _ => None,
                }
                .ok_or_else(|| {
                    ParseError::new(pos, ParseErrorKind::Syntax(format!("unknown object `{payload}`")))
                })?;
                if padding {
                    return Err(ParseError::new(
                        pos,
                        ParseErrorKind::Syntax("object after empty slot".into()),
                    ));
                }
                if state.contains(object) {
                    return Err(ParseError::new(pos, ParseErrorKind::DuplicateObject(object.name())));
                }
                state.objects.push(object);
            }
        }
    }
    Ok(state)
}

fn parse_entity(body: &str) -> Result<EntityState, ParseError> {
    let rest = body
        .strip_prefix("ent:")
        .ok_or_else(|| ParseError::new(0, ParseErrorKind::Syntax("expected `ent:`".into())))?;
    // Names cannot contain `:`, so the first ` loc:` is the section boundary.
    let split = rest
        .find(" loc:")
        .ok_or_else(|| ParseError::new(4, ParseErrorKind::Syntax("expected ` loc:`".into())))?;
    let ent_text = &rest[..split];
    let loc_text = &rest[split + 5..];
    let loc_offset = 4 + split + 5;

    let names: Vec<&str> = if ent_text.is_empty() { vec![] } else { ent_text.split('|').collect() };
    let locs: Vec<&str> = if loc_text.is_empty() { vec![] } else { loc_text.split('|').collect() };
    if names.len() != locs.len() {
        return Err(ParseError::new(
            loc_offset,
            ParseErrorKind::LengthMismatch {
                entities: names.len(),
                locations: locs.len(),
            },
        ));
    }

    let mut entries = Vec::with_capacity(names.len());
    let mut pos = 4;
    for name in &names {
        let span = Span::new(*name).map_err(|e| ParseError::new(pos, ParseErrorKind::BadSpan(e)))?;
        if entries.iter().any(|(n, _): &(Span, Location)| n == &span) {
            return Err(ParseError::new(pos, ParseErrorKind::DuplicateEntity(span.0)));
        }
        entries.push((span, Location::NonExistent));
        pos += name.len() + 1;
    }
    let mut pos = loc_offset;
    for (entry, loc) in entries.iter_mut().zip(&locs) {
        entry.1 = Location::parse(loc).map_err(|e| ParseError::new(pos, ParseErrorKind::BadSpan(e)))?;
        pos += loc.len() + 1;
    }
    Ok(EntityState { entries })
}
