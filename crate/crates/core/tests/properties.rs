mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use icn_core::context::{activate_concepts, adjust_work_context, ContextConfig, ContextState};
use icn_core::error::Error;
use icn_core::graph::{compare_images, converged, Direction, Edge, EdgeKind, ProcessGraph};
use icn_core::icn::{match_sets, similarity, Channel, Element, ElementSet, Icn, IcnId, Member};
use icn_core::ingest::{extract_ideas, IdeaTriple, Lexicon, NatureLabel, Utterance};
use icn_core::graph::MentalImageKind;
use icn_core::metrics::Evidence;
use icn_core::session::{replay, EventKind, SessionConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn corpus(seed: u64) -> (Arc<Lexicon>, Vec<Utterance>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lex = random_lexicon(&mut rng);
    (lex, random_transcript(&mut rng, 12))
}

fn lexicon(seed: u64) -> Arc<Lexicon> {
    random_lexicon(&mut ChaCha8Rng::seed_from_u64(seed))
}

const WORDS: &[&str] = &["v0", "v1", "v3", "n0", "n0s", "n1", "n2", "n5", "n9", "m0", "m3", "zzz", "the", "because", ",", "and"];

fn element() -> impl Strategy<Value = Element> {
    let channel = prop_oneof![Just(Channel::Verb), Just(Channel::Target), Just(Channel::Output), Just(Channel::Modifier)];
    (channel, 0..12usize).prop_map(|(c, i)| {
        let lemma = match c {
            Channel::Verb => format!("v{}", i % 6),
            Channel::Modifier => format!("m{}", i % 6),
            _ => format!("n{i}"),
        };
        Element::new(c, lemma)
    })
}

fn element_set() -> impl Strategy<Value = ElementSet> {
    prop::collection::vec(element(), 0..7).prop_map(|v| v.into_iter().collect())
}

fn icn_with(id: u32, elements: ElementSet) -> Icn {
    Icn::new(
        IcnId(id),
        Member {
            utterance: u64::from(id),
            ordinal: 0,
            idea_index: u64::from(id),
            elements,
            goal: None,
            nature: NatureLabel::SolvingHighlevel,
            hint: MentalImageKind::DesiredSolution,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extraction_is_deterministic_closed_and_never_empty(seed in 0..1000u64, words in prop::collection::vec(prop::sample::select(WORDS), 1..10)) {
        let lex = lexicon(seed);
        let u = Utterance::new(1, "A", 0, words.join(" "));
        let a = extract_ideas(&u, &lex).unwrap();
        let b = extract_ideas(&u, &lex).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        prop_assert!(!a.is_empty());
        for t in &a {
            for l in t.lemmas() {
                prop_assert!(lex.knows(l) || t.out_of_lexicon.iter().any(|o| o == l), "{l} neither known nor flagged");
            }
        }
    }

    #[test]
    fn pre_annotation_survives_up_to_lemmas(seed in 0..1000u64, nouns in prop::collection::vec(prop::sample::select(&["n0s", "n1s", "n4", "n7"][..]), 0..3)) {
        let lex = lexicon(seed);
        let nouns: Vec<&str> = nouns.into_iter().collect();
        let u = Utterance::new(3, "A", 0, "whatever").with_triples(vec![IdeaTriple::new("v2", &nouns, &["m1"])]);
        let got = extract_ideas(&u, &lex).unwrap();
        prop_assert_eq!(got.len(), 1);
        let want: Vec<String> = nouns.iter().map(|n| lex.lemma_of(n).unwrap_or(n).to_string()).collect();
        prop_assert_eq!(&got[0].verb, "v2");
        prop_assert_eq!(&got[0].noun2, &want);
        prop_assert_eq!(&got[0].modifiers, &vec!["m1".to_string()]);
        prop_assert_eq!(got[0].source_utterance, 3);
    }

    #[test]
    fn similarity_is_one_on_identity_and_symmetric(seed in 0..1000u64, a in element_set(), b in element_set()) {
        let lex = lexicon(seed);
        let (a, b) = (a.canonical(&lex), b.canonical(&lex));
        if !a.is_empty() {
            prop_assert_eq!(similarity(&match_sets(&a, &a, &lex)), 1.0);
        }
        let ab = similarity(&match_sets(&a, &b, &lex));
        let ba = similarity(&match_sets(&b, &a, &lex));
        prop_assert!((ab - ba).abs() < 1e-12, "{ab} vs {ba}");
        prop_assert!((0.0..=1.0).contains(&ab));
    }

    #[test]
    fn oracle_similarity_agrees_with_the_matcher(seed in 0..1000u64, a in element_set(), b in element_set()) {
        let lex = lexicon(seed);
        let (a, b) = (a.canonical(&lex), b.canonical(&lex));
        let fast = similarity(&match_sets(&a, &b, &lex));
        prop_assert!((fast - oracle_match(&a, &b, &lex).score).abs() < 1e-12);
    }

    #[test]
    fn image_deltas_are_sound(seed in 0..1000u64, a in element_set(), b in element_set(), eps in 0..4usize) {
        let lex = lexicon(seed);
        for dir in [Direction::TopDown, Direction::BottomUp] {
            let d = compare_images(&a, &b, &lex, dir);
            for e in &d.delta {
                prop_assert!(a.contains(e));
                prop_assert!(!b.channel(e.channel).iter().any(|x| lex.same_meaning(x, &e.lemma)), "{e:?} has a partner");
            }
            let other = compare_images(&b, &a, &lex, dir);
            for e2 in eps..eps + 3 {
                if converged(&d, &other, eps) {
                    prop_assert!(converged(&d, &other, e2));
                }
            }
        }
    }

    #[test]
    fn disjoint_images_delta_to_themselves(seed in 0..1000u64, a in element_set(), b in element_set()) {
        let lex = lexicon(seed);
        let related = a.iter().any(|x| b.channel(x.channel).iter().any(|y| lex.same_meaning(&x.lemma, y)));
        prop_assume!(!related);
        let ab = compare_images(&a, &b, &lex, Direction::TopDown);
        let ba = compare_images(&b, &a, &lex, Direction::TopDown);
        prop_assert_eq!(ab.delta.into_iter().collect::<ElementSet>(), a);
        prop_assert_eq!(ba.delta.into_iter().collect::<ElementSet>(), b);
    }

    #[test]
    fn detailing_edges_never_close_a_cycle(pairs in prop::collection::vec((1..7u32, 1..7u32), 1..25)) {
        let mut g = ProcessGraph::new();
        for id in 1..7 {
            g.insert(icn_with(id, [Element::new(Channel::Target, format!("n{id}"))].into_iter().collect()));
        }
        for (from, to) in pairs {
            let el = vec![Element::new(Channel::Target, format!("n{from}"))];
            match g.add_edge(Edge::detailing(IcnId(from), IcnId(to), el)) {
                Ok(()) => {}
                Err(Error::DetailingCycle { .. }) => {}
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
            // the accepted edges admit a topological order
            let mut remaining: BTreeSet<IcnId> = g.icns.keys().copied().collect();
            let edges: Vec<(IcnId, IcnId)> = g.edges.iter().filter(|e| e.kind == EdgeKind::Detailing).map(|e| (e.from, e.to)).collect();
            while let Some(n) = remaining.iter().copied().find(|n| !edges.iter().any(|(f, t)| t == n && remaining.contains(f))) {
                remaining.remove(&n);
            }
            prop_assert!(remaining.is_empty());
        }
    }

    #[test]
    fn window_is_bounded_and_decay_is_monotone(seed in 0..1000u64, window in 1..7usize, triggers in prop::collection::vec(0..18usize, 1..20)) {
        let lex = lexicon(seed);
        let cfg = ContextConfig { window, ..ContextConfig::default() };
        let mut ctx = ContextState::new(cfg);
        for (i, n) in triggers.iter().enumerate() {
            let trigger = format!("n{n}");
            let act = activate_concepts(&trigger, &lex);
            prop_assert_eq!(&act, &activate_concepts(&trigger, &lex));
            let next = adjust_work_context(&act, &ctx);
            for e in &next.immediate {
                let before = ctx.immediate.iter().find(|p| p.idea == e.idea).map(|p| p.weight).unwrap_or(1.0);
                let touched = e.idea.lemmas().any(|l| act.contains(l));
                prop_assert!(e.weight <= before || touched, "weight rose without overlap");
            }
            ctx = next;
            let mut idea = IdeaTriple::new("v0", &[trigger.as_str()], &[]);
            idea.source_utterance = i as u64;
            ctx.advance(&idea, Some(IcnId(i as u32 + 1)));
            prop_assert!(ctx.immediate.len() <= window);
        }
    }

    #[test]
    fn forgetting_a_cluster_drops_its_medium_entry(seed in 0..300u64) {
        let (lex, t) = corpus(seed);
        let s = run(&t, lex, SessionConfig::default(), "");
        let snap = s.snapshot();
        let mut ctx = snap.context.clone();
        if let Some(id) = snap.graph.icns.keys().next().copied() {
            let mut g = snap.graph.clone();
            g.remove_icn(id);
            ctx.forget_icn(id);
            ctx.sync_medium(&g);
            prop_assert!(ctx.medium.iter().all(|m| g.icns.contains_key(&m.icn)));
            prop_assert!(ctx.immediate.iter().all(|e| e.icn != Some(id)));
        }
    }

    #[test]
    fn every_prefix_replays_and_evidence_resolves(seed in 0..300u64) {
        let (lex, t) = corpus(seed);
        let cfg = SessionConfig::default();
        let s = run(&t, Arc::clone(&lex), cfg.clone(), "n1 v2 n3");
        let events = s.events();
        let ends: Vec<usize> = (1..=events.len())
            .filter(|&n| n == events.len() || events[n].kind == EventKind::UtteranceReceived)
            .collect();
        for n in ends {
            let prefix = &events[..n];
            let snap = replay(prefix, cfg.clone(), Arc::clone(&lex)).unwrap();
            prop_assert_eq!(snap.last_seq, n as u64);
            for ev in snap.metrics.evidence() {
                match ev {
                    Evidence::Icn { id, .. } => prop_assert!(snap.graph.icns.contains_key(&id)),
                    Evidence::Edge { from, to, kind } => prop_assert!(snap.graph.edges.iter().any(|e| e.from == from && e.to == to && e.kind == kind)),
                    Evidence::Utterance { id, .. } => prop_assert!(snap.history.iter().any(|r| r.utterance == id)),
                }
            }
            let m = &snap.metrics;
            prop_assert_eq!(m.fulfilled_requirements.count + m.unconsidered_needs.count, snap.problem_image.len());
        }
        let live = run(&t, Arc::clone(&lex), cfg.clone(), "n1 v2 n3");
        prop_assert_eq!(live.snapshot().to_json(), s.snapshot().to_json());
    }

    #[test]
    fn events_are_ordered_and_grouped_by_utterance(seed in 0..300u64) {
        let (lex, t) = corpus(seed);
        let s = run(&t, lex, SessionConfig::default(), "");
        let mut seen = BTreeSet::new();
        let mut current = None;
        for (i, e) in s.events().iter().enumerate() {
            prop_assert_eq!(e.seq, i as u64 + 1);
            if e.utterance != current {
                prop_assert!(e.kind == EventKind::UtteranceReceived);
                prop_assert!(seen.insert(e.utterance), "utterance group split");
                current = e.utterance;
            }
        }
        for icn in s.graph().icns.values() {
            prop_assert!(MentalImageKind::ALL.contains(&icn.image));
        }
    }
}
