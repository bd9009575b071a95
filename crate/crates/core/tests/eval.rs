//! Evaluator metrics on hand-worked cases, against set-arithmetic oracles,
//! and under symmetry and perturbation.

use std::collections::BTreeSet;

use lemkit::dataset::{gold_predictions, parse_episodes, Episode};
use lemkit::eval::{
    derive_action_tags, eval_propara_document, eval_propara_sentence, eval_recipes, eval_scone, evaluate,
    recipes_scores, transition_tag, ActionTag, Metrics, PredictionSet, Prf, TagGrid,
};
use lemkit::exec::execute_program;
use lemkit::sampler::{stream_rng, Sampler, SamplerConfig};
use lemkit::state::{Domain, EntityState, Location};
use rand::Rng;

fn episode_json(id: &str, domain: Domain, init: &str, gold: &[&str]) -> String {
    serde_json::json!({
        "id": id,
        "domain": domain.name(),
        "init": init,
        "instructions": (1..=gold.len()).map(|t| format!("step {t}")).collect::<Vec<_>>(),
        "gold": gold,
    })
    .to_string()
}

fn episodes(domain: Domain, lines: &[String]) -> Vec<Episode> {
    parse_episodes(&lines.join("\n"), domain).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 0.05
}

fn entity_line(names: &str, locs: &[&str]) -> String {
    format!("ent:{names} loc:{}", locs.join("|"))
}

const ALC: [&str; 6] = [
    "1:rr|2:_|3:_|4:_|5:_|6:_|7:_",
    "1:r|2:_|3:_|4:_|5:_|6:_|7:_",
    "1:_|2:_|3:_|4:_|5:_|6:_|7:_",
    "1:_|2:g|3:_|4:_|5:_|6:_|7:_",
    "1:_|2:gg|3:_|4:_|5:_|6:_|7:_",
    "1:_|2:ggg|3:_|4:_|5:_|6:_|7:_",
];

#[test]
fn scone_one_wrong_final_step() {
    let eps = episodes(
        Domain::Alchemy,
        &[episode_json("a", Domain::Alchemy, ALC[0], &ALC[1..]), episode_json("b", Domain::Alchemy, ALC[0], &ALC[1..])],
    );
    let mut preds = PredictionSet::from_gold(&eps);
    preds.set("b", 5, ALC[0]);
    let s = eval_scone(&eps, &preds).unwrap();
    assert!(close(s.inst, 90.0) && close(s.utts3, 100.0) && close(s.utts5, 50.0), "{s:?}");

    // Prefix scores look only at the state reached after 3 and 5 steps.
    let mut preds = PredictionSet::from_gold(&eps);
    preds.set("a", 3, ALC[0]);
    let s = eval_scone(&eps, &preds).unwrap();
    assert!(close(s.inst, 90.0) && close(s.utts3, 50.0) && close(s.utts5, 100.0), "{s:?}");
}

#[test]
fn scone_requires_five_steps() {
    let short = episode_json("a", Domain::Alchemy, ALC[0], &ALC[1..4]);
    assert!(parse_episodes(&short, Domain::Alchemy).is_err());
}

/// Water moves soil -> root at `gold_step` in gold and at `pred_step` to `pred_to` in the prediction.
fn water_case(gold_step: usize, pred_step: usize, pred_to: &str) -> (Vec<Episode>, PredictionSet) {
    let states = |step: usize, to: &str| -> Vec<String> {
        (1..=4).map(|t| entity_line("water", &[if t >= step { to } else { "soil" }])).collect()
    };
    let gold = states(gold_step, "root");
    let gold_refs: Vec<&str> = gold.iter().map(String::as_str).collect();
    let eps = episodes(Domain::ProPara, &[episode_json("w", Domain::ProPara, "ent:water loc:soil", &gold_refs)]);
    let mut preds = PredictionSet::from_gold(&eps);
    for (t, s) in states(pred_step, pred_to).into_iter().enumerate() {
        preds.set("w", t + 1, s);
    }
    (eps, preds)
}

#[test]
fn propara_move_one_step_late() {
    let (eps, preds) = water_case(2, 3, "root");
    let s = eval_propara_sentence(&eps, &preds).unwrap();
    assert!(close(s.cat1, 100.0) && close(s.cat2, 0.0) && close(s.cat3, 100.0), "{s:?}");
    assert_eq!(s.instances, [3, 1, 1]);
}

#[test]
fn propara_right_step_wrong_destination() {
    let (eps, preds) = water_case(2, 2, "leaf");
    let s = eval_propara_sentence(&eps, &preds).unwrap();
    assert!(close(s.cat1, 100.0) && close(s.cat2, 100.0) && close(s.cat3, 0.0), "{s:?}");
    assert!(close(s.macro_avg, 200.0 / 3.0));
    assert!(close(s.micro_avg, 80.0));
}

/// `(entity, from, to, step)` read straight off the location strings.
fn oracle_moves(names: &[&str], traj: &[Vec<&str>]) -> BTreeSet<(String, String, String, usize)> {
    let mut out = BTreeSet::new();
    for (e, name) in names.iter().enumerate() {
        for t in 1..traj.len() {
            let (a, b) = (traj[t - 1][e], traj[t][e]);
            if a != "-" && b != "-" && a != b {
                out.insert((name.to_string(), a.to_string(), b.to_string(), t));
            }
        }
    }
    out
}

#[test]
fn spurious_move_costs_precision_only() {
    let names = ["water", "sugar"];
    let gold: Vec<Vec<&str>> = vec![
        vec!["soil", "-"],
        vec!["root", "-"],
        vec!["stem", "-"],
        vec!["leaf", "-"],
        vec!["leaf", "leaf"],
    ];
    let mut pred = gold.clone();
    pred[4][0] = "air";
    let g = oracle_moves(&names, &gold);
    let p = oracle_moves(&names, &pred);
    let hit = g.intersection(&p).count() as f64;
    let (want_p, want_r) = (100.0 * hit / p.len() as f64, 100.0 * hit / g.len() as f64);
    assert!(close(want_p, 75.0) && close(want_r, 100.0));

    let lines: Vec<String> = gold.iter().map(|l| entity_line("water|sugar", l)).collect();
    let refs: Vec<&str> = lines[1..].iter().map(String::as_str).collect();
    let eps = episodes(Domain::ProPara, &[episode_json("s", Domain::ProPara, &lines[0], &refs)]);
    let mut preds = PredictionSet::from_gold(&eps);
    preds.set("s", 4, entity_line("water|sugar", &pred[4]));
    let d = eval_propara_document(&eps, &preds).unwrap();
    let moves = d.moves.unwrap();
    assert!(close(moves.precision, want_p) && close(moves.recall, want_r), "{moves:?}");
    assert!(close(moves.f1, 2.0 * want_p * want_r / (want_p + want_r)));
}

#[test]
fn empty_prediction_against_eventful_gold() {
    let (eps, _) = water_case(2, 2, "root");
    let mut preds = PredictionSet::from_gold(&eps);
    for t in 1..=4 {
        preds.set("w", t, "ent:water loc:soil");
    }
    let report = evaluate(Domain::ProPara, &eps, &preds).unwrap();
    let Metrics::ProPara { document, .. } = &report.metrics else { unreachable!() };
    let moves = document.moves.unwrap();
    assert_eq!((moves.precision, moves.recall, moves.f1), (0.0, 0.0, 0.0));
    assert!(report.notes.undefined.keys().any(|k| k.contains("moves precision")), "{:?}", report.notes);
}

fn recipe_episode(gold: &[Vec<&str>]) -> Vec<Episode> {
    let lines: Vec<String> = gold.iter().map(|l| entity_line("beef|pepper|onion", l)).collect();
    let refs: Vec<&str> = lines[1..].iter().map(String::as_str).collect();
    episodes(Domain::Recipes, &[episode_json("r", Domain::Recipes, &lines[0], &refs)])
}

#[test]
fn recipes_hand_worked() {
    // Five gold changes: beef->bowl, pepper->bowl, beef->pan, onion->pan, beef->plate.
    let gold: Vec<Vec<&str>> = vec![
        vec!["-", "-", "-"],
        vec!["bowl", "bowl", "-"],
        vec!["pan", "bowl", "pan"],
        vec!["plate", "bowl", "pan"],
    ];
    let eps = recipe_episode(&gold);
    let mut preds = PredictionSet::from_gold(&eps);
    preds.set("r", 1, entity_line("beef|pepper|onion", &["bowl", "-", "-"]));
    preds.set("r", 2, entity_line("beef|pepper|onion", &["pan", "-", "pan"]));
    preds.set("r", 3, entity_line("beef|pepper|onion", &["plate", "-", "pan"]));
    let p = eval_recipes(&eps, &preds).unwrap();
    assert!(close(p.precision, 100.0) && close(p.recall, 80.0) && close(p.f1, 88.9), "{p:?}");

    let mut only_spurious = PredictionSet::from_gold(&eps);
    for t in 1..=3 {
        only_spurious.set("r", t, entity_line("beef|pepper|onion", &["-", "-", "sink"]));
    }
    let p = eval_recipes(&eps, &only_spurious).unwrap();
    assert_eq!((p.precision, p.recall, p.f1), (0.0, 0.0, 0.0));
}

#[test]
fn transition_tags_cover_every_kind_pair() {
    let a = Location::parse("soil").unwrap();
    let b = Location::parse("root").unwrap();
    let kinds = [Location::NonExistent, Location::Unknown, a.clone(), b.clone()];
    for before in &kinds {
        for after in &kinds {
            let want = match (before.to_string().as_str(), after.to_string().as_str()) {
                ("-", "-") => ActionTag::None,
                ("-", _) => ActionTag::Create { to: after.clone() },
                (_, "-") => ActionTag::Destroy { from: before.clone() },
                (x, y) if x == y => ActionTag::None,
                _ => ActionTag::Move { from: before.clone(), to: after.clone() },
            };
            assert_eq!(transition_tag(before, after), want, "{before} -> {after}");
        }
    }
    let states: Vec<EntityState> = ["soil", "?", "-"]
        .iter()
        .map(|l| EntityState::from_pairs([("water", *l)]).unwrap())
        .collect();
    let grid = derive_action_tags(&states).unwrap();
    let tags: Vec<String> = grid.tags[0].iter().map(|t| t.to_string()).collect();
    assert_eq!(tags, ["Move(soil, ?)", "Destroy(?)"]);
}

/// Random entity episodes of `steps` single-action steps, drawn by the sampler.
fn random_entity_episodes(domain: Domain, n: usize, steps: usize, seed: u64) -> Vec<Episode> {
    let mut cfg = SamplerConfig::for_domain(domain).with_seed(seed);
    cfg.program_length_max = 1;
    let sampler = Sampler::new(domain, &cfg).unwrap();
    let mut rng = stream_rng(seed, 0);
    let mut lines = vec![];
    while lines.len() < n {
        let init = sampler.sample_state(&mut rng);
        let mut gold = vec![];
        let mut cur = init.clone();
        for _ in 0..steps {
            let Ok(p) = sampler.sample_program(&cur, &mut rng) else { break };
            cur = execute_program(&cur, &p).unwrap();
            gold.push(cur.render());
        }
        if gold.len() == steps {
            let refs: Vec<&str> = gold.iter().map(String::as_str).collect();
            lines.push(episode_json(&format!("e{}", lines.len()), domain, &init.render(), &refs));
        }
    }
    episodes(domain, &lines)
}

/// Gold predictions with a fraction of steps replaced by another step's state.
fn perturbed(eps: &[Episode], rate: f64, seed: u64) -> PredictionSet {
    let mut rng = stream_rng(seed, 1);
    let mut preds = PredictionSet::from_gold(eps);
    for ep in eps {
        for t in 1..=ep.len() {
            if rng.gen_bool(rate) {
                let other = &ep.gold[rng.gen_range(0..ep.len())];
                preds.set(&ep.id, t, other.render());
            }
        }
    }
    preds
}

fn assert_f1(p: &Prf) {
    let want = if p.precision + p.recall > 0.0 { 2.0 * p.precision * p.recall / (p.precision + p.recall) } else { 0.0 };
    assert!((p.f1 - want).abs() < 1e-9, "{p:?}");
    for x in [p.precision, p.recall, p.f1] {
        assert!((0.0..=100.0).contains(&x));
    }
}

#[test]
fn gold_predictions_score_perfectly() {
    for domain in Domain::ALL {
        let eps = if domain.is_scone() {
            let cfg = SamplerConfig::for_domain(domain).with_seed(8);
            let sampler = Sampler::new(domain, &cfg).unwrap();
            let mut rng = stream_rng(8, 0);
            let lines: Vec<String> = (0..40)
                .map(|i| {
                    let init = sampler.sample_state(&mut rng);
                    let gold: Vec<String> = (0..5).map(|_| sampler.sample_state(&mut rng).render()).collect();
                    let refs: Vec<&str> = gold.iter().map(String::as_str).collect();
                    episode_json(&format!("s{i}"), domain, &init.render(), &refs)
                })
                .collect();
            episodes(domain, &lines)
        } else {
            random_entity_episodes(domain, 40, 6, 8)
        };
        let report = evaluate(domain, &eps, &PredictionSet::from_gold(&eps)).unwrap();
        for (label, value) in report.headline() {
            assert!(close(value, 100.0), "{domain} {label} = {value}");
        }
        assert!(report.notes.diagnostics.is_empty());
    }
}

#[test]
fn swapping_gold_and_prediction_swaps_precision_and_recall() {
    for domain in [Domain::ProPara, Domain::Recipes] {
        let eps = random_entity_episodes(domain, 30, 6, 12);
        let preds = perturbed(&eps, 0.3, 12);
        let grids: Vec<(TagGrid, TagGrid)> = eps
            .iter()
            .map(|ep| {
                let gold: Vec<EntityState> = ep.states().map(|s| s.entity().unwrap().clone()).collect();
                let mut pred = vec![gold[0].clone()];
                for t in 1..=ep.len() {
                    let text = preds.get(&ep.id, t).unwrap();
                    pred.push(lemkit::state::parse_state(domain, text).unwrap().entity().unwrap().clone());
                }
                (derive_action_tags(&gold).unwrap(), derive_action_tags(&pred).unwrap())
            })
            .collect();
        let swapped: Vec<(TagGrid, TagGrid)> = grids.iter().map(|(g, p)| (p.clone(), g.clone())).collect();
        let (a, b) = (recipes_scores(&grids), recipes_scores(&swapped));
        assert!(close(a.precision, b.recall) && close(a.recall, b.precision) && close(a.f1, b.f1));
        let (a, b) = (lemkit::eval::document_scores(&grids), lemkit::eval::document_scores(&swapped));
        assert!(close(a.overall.precision, b.overall.recall) && close(a.overall.recall, b.overall.precision));
    }
}

#[test]
fn perturbed_scores_stay_consistent() {
    for domain in [Domain::ProPara, Domain::Recipes] {
        let eps = random_entity_episodes(domain, 30, 6, 21);
        for rate in [0.1, 0.5, 1.0] {
            let preds = perturbed(&eps, rate, 21);
            if domain == Domain::ProPara {
                let d = eval_propara_document(&eps, &preds).unwrap();
                assert_f1(&d.overall);
                d.questions().iter().filter_map(|(_, p)| p.as_ref()).for_each(assert_f1);
                let s = eval_propara_sentence(&eps, &preds).unwrap();
                assert!(close(s.macro_avg, (s.cat1 + s.cat2 + s.cat3) / 3.0));
            } else {
                assert_f1(&eval_recipes(&eps, &preds).unwrap());
            }
        }
    }
}

#[test]
fn fixing_a_step_never_lowers_scone_scores() {
    let lines: Vec<String> = (0..20).map(|i| episode_json(&format!("a{i}"), Domain::Alchemy, ALC[0], &ALC[1..])).collect();
    let eps = episodes(Domain::Alchemy, &lines);
    let mut preds = perturbed(&eps, 0.6, 3);
    let mut last = eval_scone(&eps, &preds).unwrap();
    for ep in &eps {
        for t in 1..=5 {
            preds.set(&ep.id, t, ep.gold[t - 1].render());
            let now = eval_scone(&eps, &preds).unwrap();
            assert!(now.inst >= last.inst && now.utts3 >= last.utts3 && now.utts5 >= last.utts5);
            last = now;
        }
    }
    assert!(close(last.inst, 100.0) && close(last.utts5, 100.0));
}

#[test]
fn surrounding_whitespace_in_predictions_is_ignored() {
    let eps = random_entity_episodes(Domain::ProPara, 20, 5, 40);
    let plain = perturbed(&eps, 0.4, 40);
    let mut padded = PredictionSet::from_gold(&eps);
    for ep in &eps {
        for t in 1..=ep.len() {
            padded.set(&ep.id, t, format!("  {} \t", plain.get(&ep.id, t).unwrap()));
        }
    }
    let a = evaluate(Domain::ProPara, &eps, &plain).unwrap();
    let b = evaluate(Domain::ProPara, &eps, &padded).unwrap();
    assert_eq!(a.metrics, b.metrics);
}

#[test]
fn unparseable_and_missing_predictions() {
    let (eps, mut preds) = water_case(2, 2, "root");
    preds.set("w", 3, "not a state");
    let report = evaluate(Domain::ProPara, &eps, &preds).unwrap();
    assert_eq!(report.notes.diagnostics.len(), 1);
    assert_eq!(report.notes.diagnostics[0].step, 3);

    let golds = gold_predictions(&eps);
    let partial = PredictionSet::new(golds.into_iter().filter(|p| p.step != 4)).unwrap();
    assert!(evaluate(Domain::ProPara, &eps, &partial).is_err());
    assert!(evaluate(Domain::Recipes, &eps, &PredictionSet::from_gold(&eps)).is_err());
}

