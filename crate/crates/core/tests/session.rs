use std::path::PathBuf;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pidl::dopler::{generate_random_model, DoplerModel, Ratios};
use pidl::load::Model;
use pidl::logic::is_rule_terminal;
use pidl::saturation::{explore, Saturator};
use pidl::session::{Choice, Session, SessionError, Status};
use pidl::State;

fn load(name: &str) -> Arc<Model> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name);
    Arc::new(Model::load(path).unwrap())
}

fn visible(s: &Session) -> Vec<String> {
    s.view(None).visible.into_iter().map(|c| c.decision).collect()
}

#[test]
fn steelplant_starts_with_three_visible_decisions() {
    let s = Session::new(load("steelplant.json"));
    assert_eq!(s.status(), Status::Ready);
    assert_eq!(visible(&s), ["sprayHeader", "dynamicJet", "stainlessSteel"]);
    assert!(s.startup().terminal && s.startup().steps.is_empty());
}

#[test]
fn empty_model_has_nothing_to_decide() {
    let m = Arc::new(Model::dopler(DoplerModel::from_json(r#"{"decisions": []}"#).unwrap()).unwrap());
    let s = Session::new(m);
    assert_eq!(s.status(), Status::Ready);
    assert!(visible(&s).is_empty());
}

#[test]
fn flipflop_does_not_terminate_at_startup() {
    let s = Session::new(load("flipflop.json"));
    assert_eq!(s.status(), Status::NonTerminating);
    let v = s.view(None);
    assert_eq!(v.diagnostic.unwrap().kind, "cycle");
    assert!(v.visible.is_empty());
    assert_eq!(s.current(), s.model().spec().initial());
}

#[test]
fn example4_take_propagates_one_rule() {
    let m = load("example4.json");
    let mut s = Session::new(m.clone());
    assert_eq!(visible(&s), ["1"]);
    let t = s.take(&Choice::transition(1)).unwrap();
    assert_eq!(t.steps.len(), 1);
    assert_eq!(t.steps[0].rule, 2);
    assert!(t.terminal);
    assert_eq!(*s.current(), State::parse(m.spec().vars(), "A B D").unwrap());
    assert!(matches!(s.take(&Choice::transition(1)), Err(SessionError::NotApplicable(_))));
    assert!(matches!(s.take(&Choice::transition(2)), Err(SessionError::UnknownDecision(_))));
    assert!(visible(&s).is_empty());
}

#[test]
fn stainless_steel_ends_inconsistent_naming_caster_type() {
    let mut s = Session::new(load("steelplant.json"));
    let t = s.take(&Choice::new("stainlessSteel", "true")).unwrap();
    assert!(!t.terminal);
    assert_eq!(s.status(), Status::Inconsistent);
    // Rules 4 and 2 fire before the slab rule does.
    assert_eq!(t.steps.iter().map(|s| s.rule).collect::<Vec<_>>(), [4, 2, 5, 6]);
    let v = s.view(None);
    let d = v.diagnostic.unwrap();
    assert_eq!(d.kind, "inconsistent");
    assert!(d.message.contains("casterType"), "{}", d.message);
    assert!(!d.constraints.is_empty());
    assert!(d.constraints.iter().any(|c| c.contains("casterType_slab") && c.contains("casterType_bloom")));
    assert!(matches!(s.take(&Choice::new("sprayHeader", "true")), Err(SessionError::Blocked(_))));
}

#[test]
fn choice_errors() {
    let mut s = Session::new(load("steelplant.json"));
    assert!(matches!(s.take(&Choice::new("nope", "true")), Err(SessionError::UnknownDecision(_))));
    assert!(matches!(s.take(&Choice::new("sprayHeader", "maybe")), Err(SessionError::InvalidValue { .. })));
    assert!(matches!(s.take(&Choice::new("casterType", "slab")), Err(SessionError::NotVisible(_))));
    assert!(matches!(s.whatif(&Choice::new("casterType", "ingot")), Err(SessionError::InvalidValue { .. })));
    s.take(&Choice::new("sprayHeader", "true")).unwrap();
    assert!(matches!(s.take(&Choice::new("sprayHeader", "false")), Err(SessionError::AlreadyTaken(_))));
    assert!(matches!(s.retract("dynamicJet"), Err(SessionError::NotInHistory(_))));
}

#[test]
fn retract_restores_the_prior_view() {
    let mut s = Session::new(load("steelplant.json"));
    let before = s.view(None);
    s.take(&Choice::new("stainlessSteel", "true")).unwrap();
    s.retract("stainlessSteel").unwrap();
    assert_eq!(s.view(None), before);

    s.take(&Choice::new("sprayHeader", "true")).unwrap();
    let mid = s.view(None);
    s.take(&Choice::new("stainlessSteel", "false")).unwrap();
    s.retract("stainlessSteel").unwrap();
    assert_eq!(s.view(None), mid);
}

#[test]
fn retracting_an_early_decision_undoes_later_ones() {
    let mut s = Session::new(load("steelplant.json"));
    let start = s.current().clone();
    s.take(&Choice::new("sprayHeader", "true")).unwrap();
    s.take(&Choice::new("stainlessSteel", "false")).unwrap();
    assert_eq!(s.history().len(), 2);
    s.retract("sprayHeader").unwrap();
    assert_eq!(*s.current(), start);
    assert!(s.history().is_empty());
}

#[test]
fn whatif_previews_without_committing() {
    let s = Session::new(load("steelplant.json"));
    let before = s.view(None);
    let spray = s.whatif(&Choice::new("sprayHeader", "true")).unwrap();
    let jet = s.whatif(&Choice::new("dynamicJet", "true")).unwrap();
    assert_eq!(s.view(None), before);
    let spec = s.model().spec();
    let bloom = spec.vars().get("casterType_bloom").unwrap();
    let slab = spec.vars().get("casterType_slab").unwrap();
    assert_eq!(spray.end().value(bloom), Some(true));
    assert_eq!(jet.end().value(slab), Some(true));

    // The second choice no longer changes casterType, so order decides.
    let mut a = s.clone();
    a.take(&Choice::new("sprayHeader", "true")).unwrap();
    let a2 = a.whatif(&Choice::new("dynamicJet", "true")).unwrap();
    let mut b = s.clone();
    b.take(&Choice::new("dynamicJet", "true")).unwrap();
    let b2 = b.whatif(&Choice::new("sprayHeader", "true")).unwrap();
    assert_eq!(a2.end().value(bloom), Some(true));
    assert_eq!(b2.end().value(slab), Some(true));
    assert_ne!(a2.end(), b2.end());
}

#[test]
fn propagation_cycle_rolls_back() {
    let spec = "[vars]\nA B\n[init]\n!A !B\n[user]\n1: !B ~> B\n[rules]\n2: B && A ~> !A\n3: B && !A ~> A\n";
    let m = Arc::new(Model::parse(spec).unwrap());
    let mut s = Session::new(m);
    let before = s.view(None);
    let err = s.take(&Choice::transition(1)).unwrap_err();
    let SessionError::Cycle { rule, trace } = err else { panic!("{err}") };
    assert_eq!(rule, 2);
    assert_eq!(trace.steps.len(), 1);
    assert_eq!(s.view(None), before);
    assert_eq!(s.status(), Status::Ready);
}

#[test]
fn view_lists_assets() {
    let mut s = Session::new(load("steelplant.json"));
    s.take(&Choice::new("dynamicJet", "true")).unwrap();
    let v = s.view(None);
    let bale = v.assets.iter().find(|a| a.name == "baleAdapter").unwrap();
    assert_eq!(bale.included, Some(true));
    assert_eq!(v.summary, "dynamicJet=true, casterType=slab");
}

#[test]
fn overlay_focuses_on_the_current_state() {
    let m = load("steelplant.json");
    let report = m.check(&Default::default(), 100).unwrap();
    let mut s = Session::new(m);
    s.take(&Choice::new("dynamicJet", "true")).unwrap();
    s.take(&Choice::new("stainlessSteel", "false")).unwrap();
    assert_eq!(s.status(), Status::Inconsistent);
    let o = s.view(Some(&report)).overlay.unwrap();
    assert!(o.vertex.is_some());
    assert!(o.counts["asset_conflict"] > 0);
    assert!(o.findings.iter().any(|f| f.description.contains("pCalibthermometer")));
}

/// Random walks over sessions: the invariants hold after every mutation.
fn walk(m: Arc<Model>, seed: u64, steps: usize) {
    let graph = explore(m.spec());
    let sat = Saturator::new(m.spec());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Session::new(m.clone());
    if s.status() == Status::NonTerminating {
        return;
    }
    let edge = |a: &State, b: &State| {
        let (i, j) = (graph.index_of(a).unwrap(), graph.index_of(b).unwrap());
        graph.outgoing(i).iter().any(|e| e.target == j)
    };
    for t in &s.startup().steps {
        assert!(edge(&t.before, &t.after));
    }
    for _ in 0..steps {
        let v = s.view(None);
        let mut choices: Vec<Choice> = v
            .visible
            .iter()
            .flat_map(|c| {
                if c.values.is_empty() {
                    vec![Choice::transition(c.decision.parse().unwrap())]
                } else {
                    c.values.iter().map(|x| Choice::new(&c.decision, x)).collect()
                }
            })
            .collect();
        choices.shuffle(&mut rng);
        let history = s.history().len();
        if choices.is_empty() || (history > 0 && rng.gen_bool(0.25)) {
            if history == 0 {
                break;
            }
            let d = s.history()[rng.gen_range(0..history)].choice.decision.clone();
            s.retract(&d).unwrap();
        } else {
            let before = s.current().clone();
            match s.take(&choices[0]) {
                Ok(trace) => {
                    // The user step and every rule step are state graph edges.
                    assert!(edge(&before, &trace.start));
                    for t in &trace.steps {
                        assert_eq!(t.before.update(&m.spec().transition(t.rule).unwrap().effect), t.after);
                        assert!(edge(&t.before, &t.after));
                    }
                }
                Err(SessionError::Cycle { .. }) => assert_eq!(*s.current(), before),
                Err(e) => panic!("visible choice rejected: {e}"),
            }
        }
        if s.status() == Status::Ready {
            assert!(sat.consistent(s.current()));
            assert!(is_rule_terminal(s.current(), m.spec()));
        } else {
            assert_eq!(s.status(), Status::Inconsistent);
            assert!(!sat.consistent(s.current()));
        }
        let replayed = Session::replay(m.clone(), &s.choices()).unwrap();
        assert_eq!(replayed.current(), s.current());
        assert_eq!(replayed.status(), s.status());
    }
}

#[test]
fn session_invariants_on_random_walks() {
    for seed in 0..10 {
        walk(load("steelplant.json"), seed, 30);
        walk(load("example4.json"), seed, 5);
    }
    for seed in 0..40 {
        let doc = generate_random_model(5 + seed as usize % 3, seed, &Ratios::default()).unwrap();
        let m = Arc::new(Model::dopler(DoplerModel::from_document(doc).unwrap()).unwrap());
        walk(m, seed, 20);
    }
}
