//! Episode files, prediction files and fine-tuning pairs.
//!
//! Episode lines look like
//! `{"id":"e1","domain":"alchemy","init":"1:g|...","instructions":[...],"gold":[...]}`;
//! prediction lines are `{"id":"e1","step":1,"state":"..."}` with 1-based steps.

use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::corpus::join_sep;
use crate::error::ParseError;
use crate::state::{parse_state, Domain, EnvState, Location, Span};

/// Instructions per interaction in Alchemy, Scene and Tangrams.
pub const SCONE_EPISODE_LEN: usize = 5;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("line {line}: {field}: {source}")]
    Parse {
        line: usize,
        field: String,
        source: ParseError,
    },
    #[error("line {line}: {instructions} instructions but {gold} gold states")]
    LengthMismatch { line: usize, instructions: usize, gold: usize },
    #[error("line {line}: expected {expected} instructions, found {found}")]
    EpisodeLength { line: usize, expected: usize, found: usize },
    #[error("line {line}: episode is {found}, expected {expected}")]
    DomainMismatch { line: usize, expected: Domain, found: Domain },
    #[error("line {line}: gold state {step} does not list the same entities as the initial state")]
    EntityListMismatch { line: usize, step: usize },
    #[error("line {line}: duplicate episode id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: {message}")]
    Convert { line: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Accepts ids written as JSON strings or integers.
pub(crate) fn id_string<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Id {
        Str(String),
        Num(serde_json::Number),
    }
    Ok(match Id::deserialize(d)? {
        Id::Str(s) => s,
        Id::Num(n) => n.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    #[serde(deserialize_with = "id_string")]
    pub id: String,
    pub domain: Domain,
    pub init: String,
    pub instructions: Vec<String>,
    pub gold: Vec<String>,
}

/// An initial state, T instructions and the T gold states that follow them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Episode {
    pub id: String,
    pub domain: Domain,
    pub init: EnvState,
    pub instructions: Vec<String>,
    pub gold: Vec<EnvState>,
}

impl Episode {
    pub fn len(&self) -> usize {
        self.gold.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gold.is_empty()
    }

    /// `S_0, S_1, ..., S_T`.
    pub fn states(&self) -> impl Iterator<Item = &EnvState> {
        std::iter::once(&self.init).chain(&self.gold)
    }

    pub fn to_record(&self) -> EpisodeRecord {
        EpisodeRecord {
            id: self.id.clone(),
            domain: self.domain,
            init: self.init.render(),
            instructions: self.instructions.clone(),
            gold: self.gold.iter().map(EnvState::render).collect(),
        }
    }

    /// Checks a record against `domain`. `line` only labels errors.
    pub fn from_record(record: EpisodeRecord, domain: Domain, line: usize) -> Result<Self, DatasetError> {
        if record.domain != domain {
            return Err(DatasetError::DomainMismatch {
                line,
                expected: domain,
                found: record.domain,
            });
        }
        if record.instructions.len() != record.gold.len() {
            return Err(DatasetError::LengthMismatch {
                line,
                instructions: record.instructions.len(),
                gold: record.gold.len(),
            });
        }
        if domain.is_scone() && record.gold.len() != SCONE_EPISODE_LEN {
            return Err(DatasetError::EpisodeLength {
                line,
                expected: SCONE_EPISODE_LEN,
                found: record.gold.len(),
            });
        }
        let parse = |field: String, text: &str| {
            parse_state(domain, text).map_err(|source| DatasetError::Parse { line, field, source })
        };
        let init = parse("init".into(), &record.init)?;
        let gold = record
            .gold
            .iter()
            .enumerate()
            .map(|(t, s)| parse(format!("gold[{}]", t + 1), s))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = init.entity() {
            if let Some(t) = gold.iter().position(|g| !g.entity().is_some_and(|g| g.same_entities(first))) {
                return Err(DatasetError::EntityListMismatch { line, step: t + 1 });
            }
        }
        Ok(Self {
            id: record.id,
            domain,
            init,
            instructions: record.instructions,
            gold,
        })
    }
}

pub fn parse_episodes(text: &str, domain: Domain) -> Result<Vec<Episode>, DatasetError> {
    let mut out: Vec<Episode> = vec![];
    let mut ids = std::collections::HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let record: EpisodeRecord = serde_json::from_str(raw).map_err(|e| DatasetError::Json {
            line,
            message: e.to_string(),
        })?;
        if !ids.insert(record.id.clone()) {
            return Err(DatasetError::DuplicateId { line, id: record.id });
        }
        out.push(Episode::from_record(record, domain, line)?);
    }
    Ok(out)
}

pub fn load_episodes(path: &Path, domain: Domain) -> Result<Vec<Episode>, DatasetError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_episodes(&text, domain)
}

fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<(), DatasetError> {
    let mut w = BufWriter::new(fs::File::create(path).map_err(io_err(path))?);
    for item in items {
        let line = serde_json::to_string(&item).expect("records serialize");
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_episodes(path: &Path, episodes: &[Episode]) -> Result<(), DatasetError> {
    write_jsonl(path, episodes.iter().map(Episode::to_record))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinetunePair {
    pub id: String,
    pub step: usize,
    pub source: String,
    pub target: String,
}

/// One pair per step: `S_0 [SEP] I_1 ... I_t` → `S_t`.
pub fn emit_finetune_pairs(episodes: &[Episode]) -> Vec<FinetunePair> {
    let mut pairs = Vec::with_capacity(episodes.iter().map(Episode::len).sum());
    for ep in episodes {
        let init = ep.init.render();
        let mut history = String::new();
        for (t, (instruction, gold)) in ep.instructions.iter().zip(&ep.gold).enumerate() {
            if t > 0 {
                history.push(' ');
            }
            history.push_str(instruction);
            pairs.push(FinetunePair {
                id: ep.id.clone(),
                step: t + 1,
                source: join_sep(&init, &history),
                target: gold.render(),
            });
        }
    }
    pairs
}

pub fn write_pairs(path: &Path, pairs: &[FinetunePair]) -> Result<(), DatasetError> {
    write_jsonl(path, pairs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    #[serde(deserialize_with = "id_string")]
    pub id: String,
    /// 1-based instruction index.
    pub step: usize,
    pub state: String,
}

pub fn parse_predictions(text: &str) -> Result<Vec<Prediction>, DatasetError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| DatasetError::Json {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn load_predictions(path: &Path) -> Result<Vec<Prediction>, DatasetError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_predictions(&text)
}

pub fn write_predictions(path: &Path, preds: &[Prediction]) -> Result<(), DatasetError> {
    write_jsonl(path, preds)
}

/// The gold states rendered as predictions.
pub fn gold_predictions(episodes: &[Episode]) -> Vec<Prediction> {
    episodes
        .iter()
        .flat_map(|ep| {
            ep.gold.iter().enumerate().map(|(t, s)| Prediction {
                id: ep.id.clone(),
                step: t + 1,
                state: s.render(),
            })
        })
        .collect()
}

/// Upstream layouts understood by [`convert`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    SconeTsv,
    ProParaGrids,
    Recipes,
}

impl std::str::FromStr for SourceFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "scone-tsv" => Ok(Self::SconeTsv),
            "propara-grids" => Ok(Self::ProParaGrids),
            "recipes" => Ok(Self::Recipes),
            other => Err(format!("unknown source format `{other}` (scone-tsv, propara-grids, recipes)")),
        }
    }
}

impl fmt::Display for SourceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SconeTsv => "scone-tsv",
            Self::ProParaGrids => "propara-grids",
            Self::Recipes => "recipes",
        })
    }
}

/// Best-effort conversion of an upstream file into episode records.
///
/// * `scone-tsv`: `id <TAB> S0 <TAB> I1 <TAB> S1 ... <TAB> I5 <TAB> S5`. States may use
///   the space-separated upstream slot layout (`1:g 2:_ ...`) or `|`.
/// * `propara-grids` / `recipes`: one JSON object per line with an id (`para_id` or `id`),
///   sentences (`sentence_texts` or `sentences`), entity names (`participants`,
///   `ingredients` or `entities`) and a location grid (`states` or `locations`) holding
///   T+1 locations per entity. Characters that clash with the state syntax are replaced.
pub fn convert(text: &str, format: SourceFormat, domain: Domain) -> Result<Vec<EpisodeRecord>, DatasetError> {
    let records = match format {
        SourceFormat::SconeTsv => convert_scone_tsv(text, domain)?,
        SourceFormat::ProParaGrids | SourceFormat::Recipes => convert_grids(text, domain)?,
    };
    for (i, r) in records.iter().enumerate() {
        Episode::from_record(r.clone(), domain, i + 1)?;
    }
    Ok(records)
}

fn scone_state(text: &str, domain: Domain) -> String {
    let text = text.trim();
    if text.contains('|') {
        return text.to_string();
    }
    let slots: Vec<&str> = text.split_whitespace().collect();
    let mut rendered = slots.join("|");
    if domain == Domain::Tangrams {
        let mut padded: Vec<String> = slots.iter().map(|s| s.to_string()).collect();
        while padded.len() < crate::state::TANGRAMS_SLOTS {
            padded.push(format!("{}:_", padded.len() + 1));
        }
        rendered = padded.join("|");
    }
    rendered
}

fn convert_scone_tsv(text: &str, domain: Domain) -> Result<Vec<EpisodeRecord>, DatasetError> {
    if !domain.is_scone() {
        return Err(DatasetError::Convert {
            line: 0,
            message: format!("scone-tsv holds alchemy, scene or tangrams data, not {domain}"),
        });
    }
    let mut out = vec![];
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() < 4 || !cols.len().is_multiple_of(2) {
            return Err(DatasetError::Convert {
                line: i + 1,
                message: format!("expected id, initial state and instruction/state pairs; found {} columns", cols.len()),
            });
        }
        let pairs = &cols[2..];
        out.push(EpisodeRecord {
            id: cols[0].trim().to_string(),
            domain,
            init: scone_state(cols[1], domain),
            instructions: pairs.iter().step_by(2).map(|s| s.trim().to_string()).collect(),
            gold: pairs.iter().skip(1).step_by(2).map(|s| scone_state(s, domain)).collect(),
        });
    }
    Ok(out)
}

fn clean_span(text: &str) -> String {
    let replaced: String = text
        .chars()
        .map(|c| match c {
            ';' | ',' | '|' => '/',
            ':' | '(' | ')' | '\n' | '\r' => ' ',
            c => c,
        })
        .collect();
    let collapsed = replaced.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed.split('/').map(str::trim).filter(|s| !s.is_empty()).collect::<Vec<_>>().join("/")
}

fn clean_location(text: &str) -> String {
    match text.trim() {
        "" | "-" | "null" => "-".into(),
        "?" | "unk" => "?".into(),
        other => clean_span(other),
    }
}

fn field<'a>(obj: &'a serde_json::Value, names: &[&str]) -> Option<&'a serde_json::Value> {
    names.iter().find_map(|n| obj.get(*n))
}

fn convert_grids(text: &str, domain: Domain) -> Result<Vec<EpisodeRecord>, DatasetError> {
    if !domain.is_entity() {
        return Err(DatasetError::Convert {
            line: 0,
            message: format!("grid files hold propara or recipes data, not {domain}"),
        });
    }
    let mut out = vec![];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let bad = |message: String| DatasetError::Convert { line, message };
        let obj: serde_json::Value = serde_json::from_str(raw).map_err(|e| bad(e.to_string()))?;
        let id = match field(&obj, &["para_id", "id"]) {
            Some(serde_json::Value::String(s)) => s.clone(),
            Some(v) => v.to_string(),
            None => return Err(bad("missing id".into())),
        };
        let strings = |names: &[&str]| -> Result<Vec<String>, DatasetError> {
            let v = field(&obj, names).ok_or_else(|| bad(format!("missing {}", names[0])))?;
            serde_json::from_value(v.clone()).map_err(|e| bad(format!("{}: {e}", names[0])))
        };
        let sentences = strings(&["sentence_texts", "sentences"])?;
        let entities: Vec<String> = strings(&["participants", "ingredients", "entities"])?
            .iter()
            .map(|e| clean_span(e))
            .collect();
        let grid: Vec<Vec<String>> = {
            let v = field(&obj, &["states", "locations"]).ok_or_else(|| bad("missing states".into()))?;
            serde_json::from_value::<Vec<Vec<Option<String>>>>(v.clone())
                .map_err(|e| bad(format!("states: {e}")))?
                .into_iter()
                .map(|row| row.into_iter().map(|c| clean_location(c.as_deref().unwrap_or("-"))).collect())
                .collect()
        };
        if grid.len() != entities.len() {
            return Err(bad(format!("{} entities but {} state rows", entities.len(), grid.len())));
        }
        let steps = sentences.len() + 1;
        if let Some(row) = grid.iter().find(|r| r.len() != steps) {
            return Err(bad(format!("{} sentences need {steps} locations per entity, found {}", sentences.len(), row.len())));
        }
        let render = |t: usize| {
            let names = entities.join("|");
            let locs = grid.iter().map(|row| row[t].as_str()).collect::<Vec<_>>().join("|");
            format!("ent:{names} loc:{locs}")
        };
        for e in &entities {
            Span::new(e.as_str()).map_err(|m| bad(format!("entity `{e}`: {m}")))?;
        }
        for cell in grid.iter().flatten() {
            Location::parse(cell).map_err(|m| bad(format!("location `{cell}`: {m}")))?;
        }
        out.push(EpisodeRecord {
            id,
            domain,
            init: render(0),
            instructions: sentences,
            gold: (1..steps).map(render).collect(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALCHEMY: &str = r#"{"id":"a1","domain":"alchemy","init":"1:g|2:_|3:_|4:_|5:_|6:_|7:_","instructions":["i1","i2","i3","i4","i5"],"gold":["1:_|2:g|3:_|4:_|5:_|6:_|7:_","1:_|2:g|3:_|4:_|5:_|6:_|7:_","1:_|2:g|3:_|4:_|5:_|6:_|7:_","1:_|2:g|3:_|4:_|5:_|6:_|7:_","1:_|2:_|3:_|4:_|5:_|6:_|7:_"]}"#;

    #[test]
    fn loads_two_lines() {
        let text = format!("{ALCHEMY}\n{}\n", ALCHEMY.replace("\"a1\"", "7"));
        let eps = parse_episodes(&text, Domain::Alchemy).unwrap();
        assert_eq!(eps.len(), 2);
        assert_eq!(eps[1].id, "7");
    }

    #[test]
    fn rejects_bad_episodes() {
        let short = ALCHEMY.replace(r#""i5"]"#, r#""i5","i6"]"#);
        assert!(matches!(
            parse_episodes(&short, Domain::Alchemy),
            Err(DatasetError::LengthMismatch { instructions: 6, gold: 5, .. })
        ));
        let eight = ALCHEMY.replacen("7:_\",\"instructions", "7:_|8:_\",\"instructions", 1);
        assert!(matches!(parse_episodes(&eight, Domain::Alchemy), Err(DatasetError::Parse { .. })));
        assert!(matches!(parse_episodes(ALCHEMY, Domain::Scene), Err(DatasetError::DomainMismatch { .. })));
        let dup = format!("{ALCHEMY}\n{ALCHEMY}");
        assert!(matches!(parse_episodes(&dup, Domain::Alchemy), Err(DatasetError::DuplicateId { line: 2, .. })));
    }

    #[test]
    fn pairs_accumulate_history() {
        let eps = parse_episodes(ALCHEMY, Domain::Alchemy).unwrap();
        let pairs = emit_finetune_pairs(&eps);
        assert_eq!(pairs.len(), 5);
        assert_eq!(pairs[0].source, "1:g|2:_|3:_|4:_|5:_|6:_|7:_ [SEP] i1");
        assert_eq!(pairs[4].source, "1:g|2:_|3:_|4:_|5:_|6:_|7:_ [SEP] i1 i2 i3 i4 i5");
        assert_eq!(pairs[4].target, "1:_|2:_|3:_|4:_|5:_|6:_|7:_");
    }

    #[test]
    fn entity_lists_must_agree() {
        let line = r#"{"id":1,"domain":"propara","init":"ent:water loc:soil","instructions":["a"],"gold":["ent:rain loc:soil"]}"#;
        assert!(matches!(
            parse_episodes(line, Domain::ProPara),
            Err(DatasetError::EntityListMismatch { step: 1, .. })
        ));
    }

    #[test]
    fn converts_scone_tsv() {
        let row = ["x", "1:g 2:_ 3:_ 4:_ 5:_ 6:_ 7:_"]
            .into_iter()
            .chain(["a", "1:_ 2:_ 3:_ 4:_ 5:_ 6:_ 7:_"].repeat(5))
            .collect::<Vec<_>>()
            .join("\t");
        let recs = convert(&row, SourceFormat::SconeTsv, Domain::Alchemy).unwrap();
        assert_eq!(recs[0].init, "1:g|2:_|3:_|4:_|5:_|6:_|7:_");
        assert_eq!(recs[0].gold.len(), 5);

        let tangram = ["t", "1:A 2:B"].into_iter().chain(["a", "1:B"].repeat(5)).collect::<Vec<_>>().join("\t");
        let recs = convert(&tangram, SourceFormat::SconeTsv, Domain::Tangrams).unwrap();
        assert_eq!(recs[0].init, "1:A|2:B|3:_|4:_|5:_");
    }

    #[test]
    fn converts_grids() {
        let line = r#"{"para_id":"p1","sentence_texts":["Roots absorb water.","Water reaches the leaf."],"participants":["water; h2o","sugar"],"states":[["soil","root","leaf"],["-","-","leaf"]]}"#;
        let recs = convert(line, SourceFormat::ProParaGrids, Domain::ProPara).unwrap();
        assert_eq!(recs[0].init, "ent:water/h2o|sugar loc:soil|-");
        assert_eq!(recs[0].gold[1], "ent:water/h2o|sugar loc:leaf|leaf");
    }
}
