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

//! Bidirectional head-corner search.
//!
//! A goal `parse(Cat,P0,P,E0,E)` asks for `Cat` spanning `(P0,P)` inside
//! the extremes `(E0,E)`. The search predicts a lexical or gap head
//! between the extremes, then repeatedly selects a rule with that head,
//! parses the daughters to its left (right to left) and to its right (left
//! to right), and continues with the mother until it matches the goal.
//!
//! Search is depth-first in continuation-passing style over one
//! [`Bindings`] store; every choice point undoes its bindings on return.
//! Positions are terms: an integer when known, a variable otherwise.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{EngineError, LinkError};
use crate::forest::{Anchor, DerivationTree, Forest, Histories, LocalTree};
use crate::grammar::{GapMode, Grammar, LexEdge, WeakeningPolicy};
use crate::linking::{build_link_tables, LinkTables};
use crate::memo::{pos_of, ItemRef, MemoStore};
use crate::terms::{Bindings, Frozen, FunctorKey, Term};
use crate::wordgraph::{smaller_equal, Connection, Pos, WordGraph};

pub const DEFAULT_DEPTH_BOUND: usize = 64;

/// How positions are compared against extremes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PosCheck {
    /// Integer order; exact for strings, an over-approximation for graphs.
    SmallerEqual,
    /// Reachability in the word-graph.
    Connection,
}

/// Which daughter acts as head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Heads as marked in the grammar.
    #[default]
    HeadCorner,
    /// Every rule's leftmost daughter.
    LeftCorner,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseConfig {
    pub memo: bool,
    /// Apply goal weakening before memoized search.
    pub weaken: bool,
    /// Replaces the grammar's weakening policy for goals when set.
    pub weakening: Option<WeakeningPolicy>,
    pub occur_check: bool,
    /// `None` picks `SmallerEqual` for linear graphs and `Connection`
    /// otherwise.
    pub pos_check: Option<PosCheck>,
    /// Bound on head-corner steps without span progress.
    pub depth_bound: usize,
    pub step_budget: Option<u64>,
}

impl Default for ParseConfig {
    fn default() -> Self {
        ParseConfig {
            memo: true,
            weaken: true,
            weakening: None,
            occur_check: true,
            pos_check: None,
            depth_bound: DEFAULT_DEPTH_BOUND,
            step_budget: None,
        }
    }
}

/// A grammar prepared for parsing: the phase-one grammar with semantic
/// arguments stripped, its linking tables, and rules indexed by head.
#[derive(Clone, Debug)]
pub struct CompiledGrammar {
    pub full: Grammar,
    pub syntactic: Grammar,
    pub links: LinkTables,
    pub strategy: Strategy,
    by_head: BTreeMap<FunctorKey, Vec<usize>>,
}

impl CompiledGrammar {
    pub fn new(g: &Grammar) -> Result<CompiledGrammar, LinkError> {
        CompiledGrammar::with_options(g, Strategy::HeadCorner, None)
    }

    pub fn with_options(g: &Grammar, strategy: Strategy, gap_mode: Option<GapMode>) -> Result<CompiledGrammar, LinkError> {
        let mut full = match strategy {
            Strategy::HeadCorner => g.clone(),
            Strategy::LeftCorner => g.left_corner(),
        };
        if let Some(m) = gap_mode {
            full.gap_mode = m;
        }
        let syntactic = full.syntactic();
        let links = build_link_tables(&syntactic)?;
        let mut by_head: BTreeMap<FunctorKey, Vec<usize>> = BTreeMap::new();
        for (i, r) in syntactic.rules.iter().enumerate() {
            by_head.entry(r.head.functor_key().expect("heads are checked")).or_default().push(i);
        }
        if syntactic.gap_mode == GapMode::TopDown {
            if let Some(gap) = syntactic.gaps.iter().find(|g| by_head.contains_key(&g.cat.functor_key().unwrap())) {
                return Err(LinkError::GapAsHead(String::from(&*gap.name)));
            }
        }
        Ok(CompiledGrammar { full, syntactic, links, strategy, by_head })
    }

    fn rules_with_head(&self, head: &Term) -> &[usize] {
        head.functor_key()
            .and_then(|k| self.by_head.get(&k))
            .map_or(&[], Vec::as_slice)
    }
}

/// Instrumentation counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// Exhaustive searches started (table misses, or every call without memo).
    pub engine_calls: u64,
    /// Calls of the parse predicate, hits included.
    pub parse_calls: u64,
    /// Predictions and head-corner steps.
    pub steps: u64,
}

/// One answer to a top-level goal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Answer {
    /// `a(Cat, P0, P)` as found.
    pub solution: Frozen,
    /// Result item backing the answer, for tree recovery.
    pub item: ItemRef,
}

impl Answer {
    pub fn cat(&self) -> &Term {
        &self.solution.term().args()[0]
    }

    pub fn span(&self) -> (Pos, Pos) {
        let a = self.solution.term().args();
        (pos_of(&a[1]), pos_of(&a[2]))
    }
}

/// Drop answers subsumed by others and variant duplicates; sorted.
pub fn minimize(items: &[Frozen]) -> Vec<Frozen> {
    let mut sorted: Vec<Frozen> = items.to_vec();
    sorted.sort();
    sorted.dedup();
    let keep: Vec<bool> = sorted
        .iter()
        .enumerate()
        .map(|(i, a)| !sorted.iter().enumerate().any(|(j, b)| i != j && b.subsumes(a) && !a.subsumes(b)))
        .collect();
    sorted.into_iter().zip(keep).filter(|(_, k)| *k).map(|(f, _)| f).collect()
}

#[derive(Clone)]
struct Goal {
    cat: Term,
    p0: Term,
    p: Term,
    e0: Term,
    e: Term,
}

#[derive(Clone)]
enum Anch {
    Lex(usize),
    Gap(usize, Term),
}

type RefCont<'k, 'a> = &'k mut dyn FnMut(&mut Parser<'a>, ItemRef) -> Result<(), EngineError>;
type SolCont<'k, 'a> = &'k mut dyn FnMut(&mut Parser<'a>, &Anch, &[LocalTree]) -> Result<(), EngineError>;
type HeadCont<'k, 'a> = &'k mut dyn FnMut(&mut Parser<'a>, Term, Term, Term, Anch) -> Result<(), EngineError>;
type RefsCont<'k, 'a> = &'k mut dyn FnMut(&mut Parser<'a>, &[ItemRef]) -> Result<(), EngineError>;

/// One parse instance over one input.
pub struct Parser<'a> {
    cg: &'a CompiledGrammar,
    wg: &'a WordGraph,
    edges: Vec<LexEdge>,
    full_edges: Vec<LexEdge>,
    b: Bindings,
    conn: Connection,
    memo: MemoStore,
    hist: Histories,
    cfg: ParseConfig,
    check: PosCheck,
    policy: WeakeningPolicy,
    stats: Stats,
    nesting: usize,
    nesting_limit: usize,
}

impl<'a> Parser<'a> {
    pub fn new(cg: &'a CompiledGrammar, wg: &'a WordGraph, cfg: ParseConfig) -> Parser<'a> {
        let check = cfg.pos_check.unwrap_or(if wg.is_linear() { PosCheck::SmallerEqual } else { PosCheck::Connection });
        let policy = if cfg.weaken {
            cfg.weakening.clone().unwrap_or_else(|| cg.syntactic.weakening.clone())
        } else {
            WeakeningPolicy::identity()
        };
        let nesting_limit = (wg.num_states() as usize + 1) * cfg.depth_bound.max(1);
        Parser {
            cg,
            wg,
            edges: cg.syntactic.lexical_analysis(wg),
            full_edges: cg.full.lexical_analysis(wg),
            b: Bindings::new(cfg.occur_check),
            conn: Connection::new(),
            memo: MemoStore::new(),
            hist: Histories::new(),
            cfg,
            check,
            policy,
            stats: Stats::default(),
            nesting: 0,
            nesting_limit,
        }
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    pub fn memo(&self) -> &MemoStore {
        &self.memo
    }

    pub fn histories(&self) -> &Histories {
        &self.hist
    }

    /// Lexical edges of the full grammar; tree leaves index into these.
    pub fn full_edges(&self) -> &[LexEdge] {
        &self.full_edges
    }

    pub fn grammar(&self) -> &'a CompiledGrammar {
        self.cg
    }

    pub fn word_graph(&self) -> &'a WordGraph {
        self.wg
    }

    pub fn pos_check(&self) -> PosCheck {
        self.check
    }

    /// Would-be cyclic bindings met so far.
    pub fn cycles_detected(&self) -> u64 {
        self.b.cycles_detected()
    }

    /// Solve the grammar's (phase-one) top category from the start state to
    /// each final state.
    pub fn parse_top(&mut self) -> Result<Vec<Answer>, EngineError> {
        let top = self.cg.syntactic.top.clone();
        let start = Pos::Known(self.wg.start());
        let mut out = Vec::new();
        for &f in self.wg.finals() {
            out.extend(self.parse_goal(&top, start, Pos::Known(f), start, Pos::Known(f))?);
        }
        Ok(out)
    }

    /// Solve `cat` over `(p0, p)` within `(e0, e)`. Answers are not
    /// deduplicated.
    pub fn parse_goal(&mut self, cat: &Frozen, p0: Pos, p: Pos, e0: Pos, e: Pos) -> Result<Vec<Answer>, EngineError> {
        let mark = self.b.mark();
        let cat = self.b.thaw(cat);
        let term = |b: &mut Bindings, x: Pos| match x {
            Pos::Known(s) => Term::Int(s as i64),
            Pos::Unknown => b.fresh(),
        };
        let goal = Goal { cat, p0: term(&mut self.b, p0), p: term(&mut self.b, p), e0: term(&mut self.b, e0), e: term(&mut self.b, e) };
        let mut out = Vec::new();
        let g2 = goal.clone();
        let res = self.parse(&goal, &mut |s, r| {
            let sol = s.b.freeze(&Term::app("a", vec![g2.cat.clone(), g2.p0.clone(), g2.p.clone()]));
            out.push(Answer { solution: sol, item: r });
            Ok(())
        });
        self.b.undo(mark);
        self.nesting = 0;
        res.map(|_| out)
    }

    /// A read-only view of the forest built so far.
    pub fn forest(&self) -> Forest<'_> {
        Forest {
            grammar: &self.cg.full,
            edges: &self.full_edges,
            memo: &self.memo,
            histories: &self.hist,
            occur_check: self.cfg.occur_check,
        }
    }

    /// Derivation trees for the given answers under the full grammar's top.
    pub fn trees(&self, answers: &[Answer]) -> Result<Vec<DerivationTree>, EngineError> {
        let roots: Vec<ItemRef> = answers.iter().map(|a| a.item).collect();
        self.forest().trees(&roots, &self.cg.full.top)
    }

    fn step(&mut self) -> Result<(), EngineError> {
        self.stats.steps += 1;
        match self.cfg.step_budget {
            Some(b) if self.stats.steps > b => Err(EngineError::StepBudget(b)),
            _ => Ok(()),
        }
    }

    fn le(&mut self, a: u32, b: u32) -> bool {
        match self.check {
            PosCheck::SmallerEqual => a <= b,
            PosCheck::Connection => self.conn.connected(self.wg, Pos::Known(a), Pos::Known(b)),
        }
    }

    fn le_pos(&mut self, a: Pos, b: Pos) -> bool {
        match (a, b) {
            (Pos::Known(x), Pos::Known(y)) => self.le(x, y),
            _ => smaller_equal(a, b),
        }
    }

    fn pos(&self, t: &Term) -> Pos {
        pos_of(&self.b.deref(t))
    }

    fn le_terms(&mut self, a: &Term, b: &Term) -> bool {
        let (x, y) = (self.pos(a), self.pos(b));
        self.le_pos(x, y)
    }

    fn parse(&mut self, g: &Goal, k: RefCont<'_, 'a>) -> Result<(), EngineError> {
        self.stats.parse_calls += 1;
        self.nesting += 1;
        if self.nesting > self.nesting_limit {
            return Err(EngineError::DepthBound(self.cfg.depth_bound));
        }
        let r = self.policy.for_term(&self.b.deref(&g.cat)).clone();
        let res = if r.is_identity() {
            self.memo_parse(g, k)
        } else {
            let weak = Goal { cat: self.b.restrict(&g.cat, &r), ..g.clone() };
            self.memo_parse(&weak, &mut |s, item| {
                let m = s.b.mark();
                if s.b.unify(&g.cat, &weak.cat)? {
                    k(s, item)?;
                }
                s.b.undo(m);
                Ok(())
            })
        };
        self.nesting -= 1;
        res
    }

    fn store(&mut self, g: &Goal, anchor: &Anch, spine: &[LocalTree]) -> ItemRef {
        let item = self.b.freeze(&Term::app("r", vec![g.cat.clone(), g.p0.clone(), g.p.clone()]));
        let (r, replaced) = self.memo.store_result(item);
        for old in replaced {
            self.hist.rekey(old, r);
        }
        let anchor = match anchor {
            Anch::Lex(e) => Anchor::Lex { edge: *e },
            Anch::Gap(gap, pos) => Anchor::Gap { gap: *gap, pos: self.pos(pos) },
        };
        let spine = spine
            .iter()
            .map(|lt| LocalTree {
                rule: lt.rule,
                left: lt.left.iter().map(|&c| self.memo.live(c)).collect(),
                right: lt.right.iter().map(|&c| self.memo.live(c)).collect(),
            })
            .collect();
        self.hist.record(r, anchor, spine);
        r
    }

    fn memo_parse(&mut self, g: &Goal, k: RefCont<'_, 'a>) -> Result<(), EngineError> {
        if !self.cfg.memo {
            self.stats.engine_calls += 1;
            return self.search(g, &mut |s, anchor, spine| {
                let r = s.store(g, anchor, spine);
                k(s, r)
            });
        }
        let key = self.b.freeze(&Term::app("g", vec![g.cat.clone(), g.p0.clone(), g.p.clone()]));
        let (e0, e) = (self.pos(&g.e0), self.pos(&g.e));
        let covered = {
            let (memo, conn, wg, check) = (&self.memo, &mut self.conn, self.wg, self.check);
            let mut le = |a: u32, b: u32| match check {
                PosCheck::SmallerEqual => a <= b,
                PosCheck::Connection => conn.connected(wg, Pos::Known(a), Pos::Known(b)),
            };
            memo.goal_covered(&key, e0, e, &mut le)
        };
        if !covered {
            self.stats.engine_calls += 1;
            self.search(g, &mut |s, anchor, spine| {
                s.store(g, anchor, spine);
                Ok(())
            })?;
            self.memo.add_goal(key, e0, e);
        }
        let cat_key = self.b.deref(&g.cat).functor_key();
        for r in self.memo.candidates(cat_key.as_ref()) {
            let item = self.memo.result(r);
            let (ip0, ip) = (item.p0(), item.p());
            let frozen = item.item.clone();
            if !(self.le_pos(e0, ip0) && self.le_pos(ip, e)) {
                continue;
            }
            let m = self.b.mark();
            let t = self.b.thaw(&frozen);
            let want = Term::app("r", vec![g.cat.clone(), g.p0.clone(), g.p.clone()]);
            if self.b.unify(&want, &t)? && self.le_terms(&g.e0, &g.p0) && self.le_terms(&g.p, &g.e) {
                k(self, r)?;
            }
            self.b.undo(m);
        }
        Ok(())
    }

    /// All solutions of `g` by prediction and head-corner growth.
    fn search(&mut self, g: &Goal, k: SolCont<'_, 'a>) -> Result<(), EngineError> {
        let cg = self.cg;
        if cg.syntactic.gap_mode == GapMode::TopDown {
            for (i, gap) in cg.syntactic.gaps.iter().enumerate() {
                self.step()?;
                let m = self.b.mark();
                let cat = self.b.instantiate(&gap.cat, gap.nvars);
                if self.b.unify(&cat, &g.cat)?
                    && self.b.unify(&g.p0, &g.p)?
                    && self.le_terms(&g.e0, &g.p0)
                    && self.le_terms(&g.p, &g.e)
                {
                    k(self, &Anch::Gap(i, g.p0.clone()), &[])?;
                }
                self.b.undo(m);
            }
        }
        let mut spine = Vec::new();
        self.predict(g, &mut |s, small, q0, q, anchor| s.head_corner(small, q0, q, g, &anchor, &mut spine, 0, k))
    }

    fn predict(&mut self, g: &Goal, k: HeadCont<'_, 'a>) -> Result<(), EngineError> {
        let cg = self.cg;
        let (e0, e) = (self.pos(&g.e0), self.pos(&g.e));
        for i in 0..self.edges.len() {
            let (from, to) = (self.edges[i].from, self.edges[i].to);
            if !(self.le_pos(e0, Pos::Known(from)) && self.le_pos(Pos::Known(to), e)) {
                continue;
            }
            self.step()?;
            let m = self.b.mark();
            let cat = self.edges[i].cat.clone();
            let small = self.b.thaw(&cat);
            let (q0, q) = (Term::Int(from as i64), Term::Int(to as i64));
            if cg.links.lex.lookup(&mut self.b, &g.cat, &g.p0, &g.p, &small, &q0, &q)? {
                k(self, small, q0, q, Anch::Lex(i))?;
            }
            self.b.undo(m);
        }
        if cg.syntactic.gap_mode == GapMode::General {
            for (i, gap) in cg.syntactic.gaps.iter().enumerate() {
                self.step()?;
                let m = self.b.mark();
                let small = self.b.instantiate(&gap.cat, gap.nvars);
                let q = self.b.fresh();
                if cg.links.gap.lookup(&mut self.b, &g.cat, &g.p0, &g.p, &small, &q, &q)?
                    && self.le_terms(&g.e0, &q)
                    && self.le_terms(&q, &g.e)
                {
                    k(self, small, q.clone(), q.clone(), Anch::Gap(i, q))?;
                }
                self.b.undo(m);
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn head_corner(
        &mut self,
        small: Term,
        q0: Term,
        q: Term,
        g: &Goal,
        anchor: &Anch,
        spine: &mut Vec<LocalTree>,
        stall: usize,
        k: SolCont<'_, 'a>,
    ) -> Result<(), EngineError> {
        self.step()?;
        let m = self.b.mark();
        if self.b.unify(&small, &g.cat)? && self.b.unify(&q0, &g.p0)? && self.b.unify(&q, &g.p)? {
            k(self, anchor, spine)?;
        }
        self.b.undo(m);

        let cg = self.cg;
        let head = self.b.deref(&small);
        for &ri in cg.rules_with_head(&head) {
            let rule = &cg.syntactic.rules[ri];
            let m = self.b.mark();
            let base = self.b.alloc(rule.nvars);
            if !self.b.unify(&rule.head.offset(base), &small)? {
                self.b.undo(m);
                continue;
            }
            let mother = rule.mother.offset(base);
            let (ql, qr) = (self.b.fresh(), self.b.fresh());
            if !cg.links.full.lookup(&mut self.b, &g.cat, &g.p0, &g.p, &mother, &ql, &qr)? {
                self.b.undo(m);
                continue;
            }
            let left: Vec<Term> = rule.rev_left_ds.iter().map(|d| d.offset(base)).collect();
            let right: Vec<Term> = rule.right_ds.iter().map(|d| d.offset(base)).collect();
            let mut lrefs = Vec::new();
            self.parse_left(&left, &ql, &q0, &g.e0, &mut lrefs, &mut |s, lrefs| {
                let mut rrefs = Vec::new();
                s.parse_right(&right, &q, &qr, &g.e, &mut rrefs, &mut |s, rrefs| {
                    let same = s.b.deref(&ql) == s.b.deref(&q0) && s.b.deref(&qr) == s.b.deref(&q);
                    let stall = if same { stall + 1 } else { 0 };
                    if stall > s.cfg.depth_bound {
                        return Err(EngineError::DepthBound(s.cfg.depth_bound));
                    }
                    spine.push(LocalTree { rule: ri, left: lrefs.to_vec(), right: rrefs.to_vec() });
                    let res = s.head_corner(mother.clone(), ql.clone(), qr.clone(), g, anchor, spine, stall, k);
                    spine.pop();
                    res
                })
            })?;
            self.b.undo(m);
        }
        Ok(())
    }

    /// Daughters left of the head, nearest first; each spans `(q1, near)`
    /// within `(e0, near)`. `far` is unified with the leftmost end.
    #[allow(clippy::too_many_arguments)]
    fn parse_left(
        &mut self,
        ds: &[Term],
        far: &Term,
        near: &Term,
        e0: &Term,
        refs: &mut Vec<ItemRef>,
        k: RefsCont<'_, 'a>,
    ) -> Result<(), EngineError> {
        let Some((d, rest)) = ds.split_first() else {
            let m = self.b.mark();
            if self.b.unify(far, near)? {
                k(self, refs)?;
            }
            self.b.undo(m);
            return Ok(());
        };
        let q1 = self.b.fresh();
        let goal = Goal { cat: d.clone(), p0: q1.clone(), p: near.clone(), e0: e0.clone(), e: near.clone() };
        self.parse(&goal, &mut |s, r| {
            refs.push(r);
            let res = s.parse_left(rest, far, &q1, e0, refs, k);
            refs.pop();
            res
        })
    }

    /// Daughters right of the head; each spans `(near, q1)` within
    /// `(near, e)`. `far` is unified with the rightmost end.
    #[allow(clippy::too_many_arguments)]
    fn parse_right(
        &mut self,
        ds: &[Term],
        near: &Term,
        far: &Term,
        e: &Term,
        refs: &mut Vec<ItemRef>,
        k: RefsCont<'_, 'a>,
    ) -> Result<(), EngineError> {
        let Some((d, rest)) = ds.split_first() else {
            let m = self.b.mark();
            if self.b.unify(near, far)? {
                k(self, refs)?;
            }
            self.b.undo(m);
            return Ok(());
        };
        let q1 = self.b.fresh();
        let goal = Goal { cat: d.clone(), p0: near.clone(), p: q1.clone(), e0: near.clone(), e: e.clone() };
        self.parse(&goal, &mut |s, r| {
            refs.push(r);
            let res = s.parse_right(rest, &q1, far, e, refs, k);
            refs.pop();
            res
        })
    }
}

/// Minimized top answers of a parse, as frozen `a(Cat,P0,P)` terms.
pub fn solution_set(answers: &[Answer]) -> Vec<Frozen> {
    let all: Vec<Frozen> = answers.iter().map(|a| a.solution.clone()).collect();
    minimize(&all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::CyclicTerm;
    use alloc::string::{String, ToString};

    const BILLOT: &str = "top s.\n\
        rule 1: s --> np, *vp.\nrule 2: s --> *s, pp.\nrule 3: np --> *n.\nrule 4: np --> det, *n.\n\
        rule 5: np --> *np, pp.\nrule 6: pp --> *prep, np.\nrule 7: vp --> *v, np.\n\
        lex 'I': ['I'] = n.\nlex man: [man] = n.\nlex home: [home] = n.\nlex see: [see] = v.\nlex at: [at] = prep.\nlex a: [a] = det.";

    fn words(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    fn run(src: &str, sentence: &str, cfg: ParseConfig) -> (Vec<Frozen>, Vec<String>, Stats) {
        let g = Grammar::parse(src).unwrap();
        let cg = CompiledGrammar::new(&g).unwrap();
        let wg = WordGraph::from_string(&words(sentence));
        let mut p = Parser::new(&cg, &wg, cfg);
        let answers = p.parse_top().unwrap();
        let trees: Vec<String> = p.trees(&answers).unwrap().iter().map(|t| t.to_string()).collect();
        (solution_set(&answers), trees, p.stats())
    }

    #[test]
    fn billot_lang_two_derivations() {
        let (sols, trees, _) = run(BILLOT, "I see a man at home", ParseConfig::default());
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].to_string(), "a(s,0,6)");
        assert_eq!(trees.len(), 2, "{trees:?}");
        assert!(trees.contains(&"(2 (1 (3 (lex 'I' 0 1 0)) (7 (lex see 1 2 0) (4 (lex a 2 3 0) (lex man 3 4 0)))) (6 (lex at 4 5 0) (3 (lex home 5 6 0))))".to_string()), "{trees:#?}");
        assert!(trees.contains(&"(1 (3 (lex 'I' 0 1 0)) (7 (lex see 1 2 0) (5 (4 (lex a 2 3 0) (lex man 3 4 0)) (6 (lex at 4 5 0) (3 (lex home 5 6 0))))))".to_string()));
        let (_, trees_nomemo, _) = run(BILLOT, "I see a man at home", ParseConfig { memo: false, ..ParseConfig::default() });
        assert_eq!(trees_nomemo.len(), 2);
    }

    #[test]
    fn trivial_cases() {
        let (sols, trees, _) = run("top s.\nrule r: s --> *a.\nlex a: [a] = a.", "a", ParseConfig::default());
        assert_eq!(sols.len(), 1);
        assert_eq!(trees, ["(r (lex a 0 1 0))"]);
        let (sols, _, _) = run("top s.\nrule r: s --> *a.", "a", ParseConfig::default());
        assert!(sols.is_empty());
    }

    #[test]
    fn memo_answers_from_tables() {
        let g = Grammar::parse(BILLOT).unwrap();
        let cg = CompiledGrammar::new(&g).unwrap();
        let wg = WordGraph::from_string(&words("I see a man at home"));
        let mut p = Parser::new(&cg, &wg, ParseConfig::default());
        let np = Frozen::new(&Term::atom("np"));
        let first = p.parse_goal(&np, Pos::Known(2), Pos::Unknown, Pos::Known(2), Pos::Known(6)).unwrap();
        assert_eq!(solution_set(&first).len(), 2);
        let calls = p.stats().engine_calls;
        let second = p.parse_goal(&np, Pos::Known(2), Pos::Unknown, Pos::Known(2), Pos::Known(4)).unwrap();
        assert_eq!(p.stats().engine_calls, calls);
        assert_eq!(solution_set(&second).len(), 1);

        let s = Frozen::new(&Term::atom("s"));
        assert!(p.parse_goal(&s, Pos::Known(3), Pos::Unknown, Pos::Known(3), Pos::Known(6)).unwrap().is_empty());
        let calls = p.stats().engine_calls;
        assert!(p.parse_goal(&s, Pos::Known(3), Pos::Unknown, Pos::Known(3), Pos::Known(6)).unwrap().is_empty());
        assert_eq!(p.stats().engine_calls, calls);
    }

    #[test]
    fn extremes_restrict_prediction() {
        let g = Grammar::parse(BILLOT).unwrap();
        let cg = CompiledGrammar::new(&g).unwrap();
        let wg = WordGraph::from_string(&words("I see a man at home"));
        let mut p = Parser::new(&cg, &wg, ParseConfig::default());
        let np = Frozen::new(&Term::atom("np"));
        let got = p.parse_goal(&np, Pos::Unknown, Pos::Unknown, Pos::Known(5), Pos::Known(6)).unwrap();
        let spans: Vec<(Pos, Pos)> = got.iter().map(Answer::span).collect();
        assert_eq!(spans, [(Pos::Known(5), Pos::Known(6))]);
    }

    #[test]
    fn left_daughters_parse_right_to_left() {
        let g = Grammar::parse("top s.\nrule r: s --> a, b, *c.\nlex a: [a] = a.\nlex b: [b] = b.\nlex c: [c] = c.").unwrap();
        let cg = CompiledGrammar::new(&g).unwrap();
        let wg = WordGraph::from_string(&words("a b c"));
        let mut p = Parser::new(&cg, &wg, ParseConfig::default());
        let answers = p.parse_top().unwrap();
        assert_eq!(answers.len(), 1);
        // goal for b (nearest) is tabled before the goal for a
        let goals: Vec<String> = p.memo().goals().iter().map(|g| g.goal.term().args()[0].to_string()).collect();
        assert_eq!(goals, ["b", "a", "s"]);
    }

    #[test]
    fn semantic_constraints_apply_in_phase_two() {
        let src = "top s(_).\nsemantic np/2 args 2.\nsemantic vp/2 args 2.\n\
                   rule s: s(S) --> np(N,S), *vp(N,S).\n\
                   lex he: [he] = np(sg,he).\nlex him: [he] = np(sg,him).\nlex walks: [walks] = vp(sg,he).";
        let (sols, trees, _) = run(src, "he walks", ParseConfig::default());
        assert_eq!(sols.len(), 1);
        assert_eq!(trees.len(), 1);
        let g = Grammar::parse(src).unwrap();
        let cg = CompiledGrammar::new(&g).unwrap();
        let wg = WordGraph::from_string(&["he", "walks"]);
        let mut p = Parser::new(&cg, &wg, ParseConfig::default());
        let a = p.parse_top().unwrap();
        // two phase-one analyses survive as histories
        assert_eq!(p.forest().reachable(&[a[0].item]).len(), 3);
        let sem = p.forest().semantics(&[a[0].item], &cg.full.top, &cg.full.sem_spec).unwrap();
        assert_eq!(sem.len(), 1);
        assert_eq!(sem[0].to_string(), "s(he)");
    }

    #[test]
    fn depth_bound_on_hidden_head_recursion() {
        let g = Grammar::parse("top s.\nrule r: s --> *v, s.\nrule t: s --> *w.\ngap g: v.\nlex w: [w] = w.").unwrap();
        let cg = CompiledGrammar::new(&g).unwrap();
        let wg = WordGraph::from_string(&["w"]);
        let mut p = Parser::new(&cg, &wg, ParseConfig { depth_bound: 8, ..ParseConfig::default() });
        assert_eq!(p.parse_top(), Err(EngineError::DepthBound(8)));

        let g = Grammar::parse("top x.\nrule r: x --> *x, y.\ngap g: y.\nlex x: [x] = x.").unwrap();
        let cg = CompiledGrammar::new(&g).unwrap();
        let wg = WordGraph::from_string(&["x"]);
        let mut p = Parser::new(&cg, &wg, ParseConfig { depth_bound: 8, ..ParseConfig::default() });
        assert_eq!(p.parse_top(), Err(EngineError::DepthBound(8)));
    }

    #[test]
    fn step_budget() {
        let g = Grammar::parse(BILLOT).unwrap();
        let cg = CompiledGrammar::new(&g).unwrap();
        let wg = WordGraph::from_string(&words("I see a man at home"));
        let mut p = Parser::new(&cg, &wg, ParseConfig { step_budget: Some(5), ..ParseConfig::default() });
        assert_eq!(p.parse_top(), Err(EngineError::StepBudget(5)));
    }

    const OCCUR: &str = "top t.\nrule r1: t --> x(f(X),X), *h.\nrule r2: t --> x(Y,Y), *h.\n\
                         lex x: [x] = x(_,_).\nlex h: [h] = h.";

    #[test]
    fn occur_check_scenario() {
        let g = Grammar::parse(OCCUR).unwrap();
        let cg = CompiledGrammar::new(&g).unwrap();
        let wg = WordGraph::from_string(&["x", "h"]);
        let off = ParseConfig { occur_check: false, ..ParseConfig::default() };
        let mut p = Parser::new(&cg, &wg, off.clone());
        assert_eq!(p.parse_top(), Err(EngineError::Cyclic(CyclicTerm)));

        let mut p = Parser::new(&cg, &wg, ParseConfig::default());
        let a = p.parse_top().unwrap();
        assert_eq!(p.trees(&a).unwrap().len(), 2);
        assert!(p.cycles_detected() > 0);

        let unshare = WeakeningPolicy::uniform(crate::terms::Restrictor::no_sharing());
        let mut p = Parser::new(&cg, &wg, ParseConfig { weakening: Some(unshare), ..off });
        let a = p.parse_top().unwrap();
        assert_eq!(p.trees(&a).unwrap().len(), 2);
        assert_eq!(p.cycles_detected(), 0);
    }

    #[test]
    fn minimize_drops_subsumed() {
        let f = |s: &str| Frozen::new(&crate::syntax::parse_term(s).unwrap().0);
        let got = minimize(&[f("a(s(X),0,1)"), f("a(s(b),0,1)"), f("a(s(Y),0,1)")]);
        assert_eq!(got, [f("a(s(_),0,1)")]);
    }
}
