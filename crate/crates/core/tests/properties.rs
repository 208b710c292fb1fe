// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::sync::Arc;

use headcorner_core::engine::{minimize, solution_set};
use headcorner_core::oracle::sample_sentence;
use headcorner_core::robust::{best_path, Projection, ScoreWeights};
use headcorner_core::wordgraph::{Connection, Transition};
use headcorner_core::{
    all_projections, bundled, oracle_parse_top, CompiledGrammar, Frozen, GapMode, Grammar, OracleConfig, ParseConfig, Parser, Pos,
    Restrictor, Strategy as Mode, Term, WeakeningPolicy, WordGraph,
};
use proptest::prelude::*;

fn compile(name: &str) -> CompiledGrammar {
    CompiledGrammar::new(&bundled::grammar(name).unwrap()).unwrap()
}

fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

fn arb_graph() -> impl Strategy<Value = WordGraph> {
    (2u32..9).prop_flat_map(|n| {
        let arc = (0..n - 1).prop_flat_map(move |from| (Just(from), from + 1..n, 0usize..4, 0u32..20));
        proptest::collection::vec(arc, 1..14).prop_map(move |arcs| {
            let vocab = ["time", "flies", "like", "an", "arrow"];
            let ts = arcs
                .into_iter()
                .map(|(from, to, w, s)| Transition { from, word: Arc::from(vocab[w]), to, score: f64::from(s) / 4.0 })
                .collect();
            WordGraph::new(n, ts, 0, vec![n - 1]).unwrap()
        })
    })
}

fn path_sums(wg: &WordGraph, from: u32, to: u32, acc: f64, out: &mut Vec<f64>) {
    if from == to {
        out.push(acc);
    }
    for (_, t) in wg.outgoing(from) {
        if t.to <= to {
            path_sums(wg, t.to, to, acc + t.score, out);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lexical_edges_follow_paths(wg in arb_graph()) {
        let g = Grammar::parse("top s.\nlex tf: [time, flies] = n.\nlex t: [time] = n.\nlex a: [an, arrow] = np.\nlex l: [like] = v.").unwrap();
        let mut conn = Connection::new();
        for e in g.lexical_analysis(&wg) {
            prop_assert!(conn.connected(&wg, Pos::Known(e.from), Pos::Known(e.to)));
            let mut sums = Vec::new();
            path_sums(&wg, e.from, e.to, 0.0, &mut sums);
            prop_assert!(sums.iter().any(|s| (s - e.score).abs() < 1e-12));
        }
    }

    #[test]
    fn connection_respects_order_and_cache(wg in arb_graph()) {
        let mut cached = Connection::new();
        for a in 0..wg.num_states() {
            for b in 0..wg.num_states() {
                let first = cached.connected(&wg, Pos::Known(a), Pos::Known(b));
                if first {
                    prop_assert!(a <= b);
                }
                prop_assert_eq!(first, cached.connected(&wg, Pos::Known(a), Pos::Known(b)));
                prop_assert_eq!(first, Connection::new().connected(&wg, Pos::Known(a), Pos::Known(b)));
            }
        }
    }

    #[test]
    fn graph_parse_keeps_memo_redundancy_free(wg in arb_graph()) {
        let cg = compile("toy");
        let mut p = Parser::new(&cg, &wg, ParseConfig::default());
        p.parse_top().unwrap();
        let live: Vec<&Frozen> = p.memo().results().iter().filter(|r| r.is_live()).map(|r| &r.item).collect();
        for (i, a) in live.iter().enumerate() {
            for (j, b) in live.iter().enumerate() {
                prop_assert!(i == j || !a.subsumes(b));
            }
        }
    }

    #[test]
    fn skip_weight_monotonicity(seed in any::<u64>()) {
        let mut r = seed;
        let mut next = |n: u32| {
            r = r.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (r >> 33) as u32 % n
        };
        let n = 2 + next(8);
        let ts: Vec<Transition> = (0..n - 1)
            .flat_map(|s| {
                let mut v = vec![Transition { from: s, word: Arc::from("w"), to: s + 1, score: 0.0 }];
                if s + 2 < n {
                    v.push(Transition { from: s, word: Arc::from("v"), to: s + 2, score: 0.0 });
                }
                v
            })
            .collect();
        let wg = WordGraph::new(n, ts, 0, vec![n - 1]).unwrap();
        let pr: Vec<Projection> = (0..next(5))
            .map(|i| {
                let from = next(n - 1);
                let to = from + 1 + next(n - 1 - from);
                Projection { from, to, cat: Frozen::new(&Term::atom("xp")), score: 0.0, item: i, tokens: Vec::new() }
            })
            .collect();
        let w_proj = f64::from(next(8)) / 4.0;
        let mut last = 0;
        for k in 0..16 {
            let w = ScoreWeights { w_skip: f64::from(k) / 4.0, w_proj, w_acoustic: 0.0 };
            let projections = best_path(&wg, &pr, &w, None).unwrap().projections();
            prop_assert!(projections >= last, "w_skip {} gave {} projections after {}", w.w_skip, projections, last);
            last = projections;
        }
    }

    #[test]
    fn weakening_is_complete(k in 0usize..40) {
        let cg = compile("agreement");
        let g = &cg.full;
        let mut seed = k as u64 + 1;
        let mut choose = |n: usize| {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 33) as usize % n
        };
        if let Some(ws) = sample_sentence(g, &mut choose, 8) {
            let wg = WordGraph::from_string(&ws);
            let raw = Parser::new(&cg, &wg, ParseConfig { memo: false, weaken: false, ..ParseConfig::default() }).parse_top().unwrap();
            let weak_cfg = ParseConfig { weakening: Some(WeakeningPolicy::uniform(Restrictor::functor_only())), ..ParseConfig::default() };
            let mut p = Parser::new(&cg, &wg, weak_cfg);
            p.parse_top().unwrap();
            for a in &raw {
                let cat = a.cat();
                let (p0, p1) = a.span();
                let want = Frozen::new(&Term::app("r", vec![cat.clone(), Term::Int(i64::from(p0.known().unwrap())), Term::Int(i64::from(p1.known().unwrap()))]));
                prop_assert!(p.memo().results().iter().any(|r| r.is_live() && r.item.subsumes(&want)));
            }
        }
    }
}

#[test]
fn widening_extremes_keeps_inner_solutions() {
    let cg = compile("billot");
    let wg = WordGraph::from_string(&words("I see a man at home"));
    for cat in ["np", "pp", "vp", "s"] {
        let c = Frozen::new(&Term::atom(cat));
        for e0 in 0..6u32 {
            for e in e0..=6 {
                let mut narrow = Parser::new(&cg, &wg, ParseConfig::default());
                let inner = narrow.parse_goal(&c, Pos::Unknown, Pos::Unknown, Pos::Known(e0), Pos::Known(e)).unwrap();
                let mut wide = Parser::new(&cg, &wg, ParseConfig::default());
                let all = solution_set(&wide.parse_goal(&c, Pos::Unknown, Pos::Unknown, Pos::Known(0), Pos::Known(6)).unwrap());
                for a in solution_set(&inner) {
                    assert!(all.contains(&a), "{cat} {e0}-{e}: {a} lost");
                }
                for a in &all {
                    let args = a.term().args();
                    let (Term::Int(i), Term::Int(j)) = (&args[1], &args[2]) else { panic!() };
                    if *i >= i64::from(e0) && *j <= i64::from(e) {
                        assert!(solution_set(&inner).contains(a), "{cat} {e0}-{e}: {a} missing inside extremes");
                    }
                }
            }
        }
    }
}

#[test]
fn gap_modes_agree_when_no_gap_is_a_head() {
    let g = bundled::grammar("epsilon").unwrap();
    let td = CompiledGrammar::with_options(&g, Mode::HeadCorner, Some(GapMode::TopDown)).unwrap();
    let gen = CompiledGrammar::with_options(&g, Mode::HeadCorner, Some(GapMode::General)).unwrap();
    for s in ["dog runs", "the big red dog sees cats please", "a dog sees", "cats", "big big dog runs please", ""] {
        let wg = WordGraph::from_string(&words(s));
        let mut a = Parser::new(&td, &wg, ParseConfig::default());
        let mut b = Parser::new(&gen, &wg, ParseConfig::default());
        let (ra, rb) = (a.parse_top().unwrap(), b.parse_top().unwrap());
        assert_eq!(solution_set(&ra), solution_set(&rb), "{s}");
        let ta: Vec<String> = a.trees(&ra).unwrap().iter().map(|t| t.to_string()).collect();
        let tb: Vec<String> = b.trees(&rb).unwrap().iter().map(|t| t.to_string()).collect();
        assert_eq!(ta.len(), tb.len(), "{s}");
    }
}

#[test]
fn gap_heads_need_general_mode() {
    let g = bundled::grammar("v2").unwrap();
    assert!(CompiledGrammar::with_options(&g, Mode::HeadCorner, Some(GapMode::TopDown)).is_err());
}

#[test]
fn linking_subsets() {
    for (name, _) in bundled::ALL {
        let cg = compile(name);
        for e in cg.links.lex.entries().chain(cg.links.gap.entries()) {
            let (gk, hk) = (e.goal().functor_key().unwrap(), e.head().functor_key().unwrap());
            assert!(cg.links.full.get(&gk, &hk).is_some(), "{name}: {e}");
        }
    }
}

#[test]
fn forest_counts_packing_and_scores() {
    let cg = compile("ppchain");
    let mut s = String::from("n sees the cat");
    let catalan = [1usize, 1, 2, 5, 14, 42, 132, 429, 1430];
    for k in 1..=7 {
        s.push_str(" in the hat");
        let t: Vec<Transition> = words(&s)
            .iter()
            .enumerate()
            .map(|(i, w)| Transition { from: i as u32, word: Arc::from(*w), to: i as u32 + 1, score: (i % 3) as f64 + 0.25 })
            .collect();
        let n = t.len() as u32;
        let total: f64 = t.iter().map(|x| x.score).sum();
        let wg = WordGraph::new(n + 1, t, 0, vec![n]).unwrap();
        let mut p = Parser::new(&cg, &wg, ParseConfig::default());
        let answers = p.parse_top().unwrap();
        let trees = p.trees(&answers).unwrap();
        let roots: Vec<_> = answers.iter().map(|a| a.item).collect();
        assert_eq!(p.forest().count(&roots, &cg.full.top).unwrap(), trees.len());
        assert_eq!(trees.len(), catalan[k + 1]);
        if k <= 3 {
            let oracle = oracle_parse_top(&cg.full, &wg, &OracleConfig::default()).unwrap();
            assert_eq!(oracle.len(), trees.len());
        }
        let histories = p.forest().reachable(&roots).len();
        if k >= 5 {
            assert!(histories < trees.len(), "k={k}: {histories} histories, {} trees", trees.len());
        }
        for tree in &trees {
            assert!((tree.score - total).abs() < 1e-9);
        }
    }
}

#[test]
fn underspecified_goal_finds_every_anchored_projection() {
    let cg = compile("robust");
    let mut found = 0;
    for s in ["uh i want to go to amsterdam tomorrow uh", "the station to the station", "go go to", "tomorrow i"] {
        let wg = WordGraph::from_string(&words(s));
        let mut p = Parser::new(&cg, &wg, ParseConfig::default());
        let got: Vec<(u32, u32)> = all_projections(&mut p).unwrap().iter().map(|x| (x.from, x.to)).collect();
        let mut want = Vec::new();
        let n = wg.num_states();
        for i in 0..n {
            for j in i + 1..n {
                let mut q = Parser::new(&cg, &wg, ParseConfig::default());
                let a = q.parse_goal(&cg.syntactic.top, Pos::Known(i), Pos::Known(j), Pos::Known(0), Pos::Known(n - 1)).unwrap();
                for _ in q.trees(&a).unwrap().iter().take(1) {
                    want.push((i, j));
                }
            }
        }
        let mut got_spans = got.clone();
        got_spans.dedup();
        assert_eq!(got_spans, want, "{s}");
        found += want.len();
    }
    assert!(found >= 10);
}

#[test]
fn oracle_is_stable() {
    let g = bundled::grammar("toy").unwrap();
    let wg = WordGraph::from_string(&words("time flies like an arrow"));
    let a = oracle_parse_top(&g, &wg, &OracleConfig::default()).unwrap();
    let b = oracle_parse_top(&g, &wg, &OracleConfig::default()).unwrap();
    assert_eq!(a, b);
    assert!(a.len() >= 2);
}

#[test]
fn minimize_over_answers_is_idempotent() {
    let cg = compile("agreement");
    let wg = WordGraph::from_string(&words("they see the dogs on the cake"));
    let answers = Parser::new(&cg, &wg, ParseConfig::default()).parse_top().unwrap();
    let once = solution_set(&answers);
    assert_eq!(minimize(&once), once);
}
