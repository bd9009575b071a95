//! Machine-readable description of each domain's action grammar.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::state::Domain;

/// One call form `Name ( <p1> , <p2> )`; parameters name nonterminals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub name: &'static str,
    /// Nonterminal this form belongs to, e.g. `drain` or `beaker`.
    pub nonterminal: &'static str,
    pub params: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Production {
    pub lhs: &'static str,
    pub alternatives: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Grammar {
    pub domain: Domain,
    /// Action-level function names in grammar order.
    pub actions: Vec<&'static str>,
    pub signatures: Vec<Signature>,
    /// Closed terminal sets keyed by nonterminal.
    pub terminals: BTreeMap<&'static str, Vec<String>>,
    /// Nonterminals whose vocabulary is open-ended text.
    pub open_terminals: Vec<&'static str>,
    pub productions: Vec<Production>,
}

impl Grammar {
    pub fn signatures_of<'a>(&'a self, nonterminal: &'a str) -> impl Iterator<Item = &'a Signature> + 'a {
        self.signatures.iter().filter(move |s| s.nonterminal == nonterminal)
    }

    /// Arity of each action function; functions with several forms share one arity.
    pub fn arities(&self) -> BTreeMap<&'static str, usize> {
        self.signatures
            .iter()
            .filter(|s| self.actions.contains(&s.name))
            .map(|s| (s.name, s.params.len()))
            .collect()
    }

    /// One production per line, `<lhs> ::= alt | alt`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.productions {
            out.push_str(&format!("<{}> ::= {}\n", p.lhs, p.alternatives.join(" | ")));
        }
        out
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn sig(name: &'static str, nonterminal: &'static str, params: &[&'static str]) -> Signature {
    Signature {
        name,
        nonterminal,
        params: params.to_vec(),
    }
}

fn strings<I: IntoIterator<Item = T>, T: ToString>(items: I) -> Vec<String> {
    items.into_iter().map(|t| t.to_string()).collect()
}

pub fn enumerate_grammar(domain: Domain) -> Grammar {
    let (signatures, terminals, open_terminals): (Vec<Signature>, Vec<(&'static str, Vec<String>)>, Vec<&'static str>) =
        match domain {
            Domain::Alchemy => (
                vec![
                    sig("Mix", "mix", &["beaker"]),
                    sig("Pour", "pour", &["beaker", "beaker"]),
                    sig("Drain", "drain", &["beaker", "integer"]),
                    sig("Drain", "drain", &["beaker", "fraction"]),
                    sig("Beaker", "beaker", &["index"]),
                    sig("Beaker", "beaker", &["index", "color"]),
                ],
                vec![
                    ("index", strings((1..=7).chain((1..=7).map(|i: i32| -i)))),
                    ("color", strings(["r", "g", "o", "p", "y", "b"])),
                    ("integer", strings(1..=4)),
                    ("fraction", strings(["1/2", "1/3", "1/4", "2/3", "2/4", "3/4"])),
                ],
                vec![],
            ),
            Domain::Scene => (
                vec![
                    sig("Person", "person", &["index", "color"]),
                    sig("RmPerson", "rmperson", &["index"]),
                    sig("Hat", "hat", &["index", "color"]),
                    sig("RmHat", "rmhat", &["index"]),
                ],
                vec![
                    ("index", strings(1..=10)),
                    ("color", strings(["r", "g", "o", "p", "y", "b"])),
                ],
                vec![],
            ),
            Domain::Tangrams => (
                vec![
                    sig("Insert", "insert", &["index", "object"]),
                    sig("Remove", "remove", &["index"]),
                ],
                vec![("index", strings(1..=5)), ("object", strings(["A", "B", "C", "D", "E"]))],
                vec![],
            ),
            Domain::ProPara | Domain::Recipes => (
                vec![
                    sig("Create", "create", &["participant", "location"]),
                    sig("Create", "create", &["participant", "unknown"]),
                    sig("Move", "move", &["participant", "location", "location"]),
                    sig("Destroy", "destroy", &["participant"]),
                ],
                vec![("unknown", strings(["?"]))],
                vec!["participant", "location"],
            ),
        };

    let mut actions: Vec<&'static str> = vec![];
    let mut action_nts: Vec<&'static str> = vec![];
    for s in &signatures {
        if s.name != "Beaker" && !actions.contains(&s.name) {
            actions.push(s.name);
            action_nts.push(s.nonterminal);
        }
    }

    let mut productions = vec![
        Production {
            lhs: "state",
            alternatives: vec!["<action> ; <state>".into(), "<action>".into()],
        },
        Production {
            lhs: "action",
            alternatives: action_nts.iter().map(|n| format!("<{n}>")).collect(),
        },
    ];
    let mut call_nts: Vec<&'static str> = vec![];
    for s in &signatures {
        if !call_nts.contains(&s.nonterminal) {
            call_nts.push(s.nonterminal);
        }
    }
    for nt in call_nts {
        let alternatives = signatures
            .iter()
            .filter(|s| s.nonterminal == nt)
            .map(|s| {
                let params: Vec<String> = s
                    .params
                    .iter()
                    .map(|p| if *p == "unknown" { "?".to_string() } else { format!("<{p}>") })
                    .collect();
                format!("{} ( {} )", s.name, params.join(" , "))
            })
            .collect();
        productions.push(Production { lhs: nt, alternatives });
    }
    for (nt, values) in &terminals {
        if *nt != "unknown" {
            productions.push(Production {
                lhs: nt,
                alternatives: values.clone(),
            });
        }
    }
    for nt in &open_terminals {
        productions.push(Production {
            lhs: nt,
            alternatives: vec!["<text span>".into()],
        });
    }

    Grammar {
        domain,
        actions,
        signatures,
        terminals: terminals.into_iter().collect(),
        open_terminals,
        productions,
    }
}
