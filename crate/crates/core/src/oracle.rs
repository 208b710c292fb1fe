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

//! Brute-force reference parser.
//!
//! Plain top-down expansion of every rule, lexical edge and gap with full
//! unification, under an iterative-deepening bound on tree depth. It uses
//! no tables, heads or linking and is meant for small inputs only.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CyclicTerm, OracleError};
use crate::forest::{DerivationTree, Label};
use crate::grammar::{Grammar, LexEdge};
use crate::terms::{Bindings, Frozen, FunctorKey, Sym, Term};
use crate::wordgraph::{Pos, WordGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    /// Deepest derivation tree searched.
    pub max_depth: usize,
    /// Longest input accepted, in states.
    pub max_span: usize,
    pub occur_check: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { max_depth: 20, max_span: 16, occur_check: true }
    }
}

#[derive(Clone)]
struct Node {
    label: Label,
    cat: Term,
    children: Vec<Node>,
    score: f64,
}

impl Node {
    fn cats(&self, out: &mut Vec<Term>) {
        out.push(self.cat.clone());
        self.children.iter().for_each(|c| c.cats(out));
    }

    fn build(&self, cats: &mut core::slice::Iter<'_, Term>) -> DerivationTree {
        let category = cats.next().expect("one category per node").clone();
        let children = self.children.iter().map(|c| c.build(cats)).collect();
        DerivationTree { label: self.label.clone(), category, children, score: self.score }
    }
}

type Cont<'k, 'g> = &'k mut dyn FnMut(&mut Oracle<'g>, Node) -> Result<(), CyclicTerm>;
type ListCont<'k, 'g> = &'k mut dyn FnMut(&mut Oracle<'g>, &[Node]) -> Result<(), CyclicTerm>;

struct Oracle<'g> {
    g: &'g Grammar,
    edges: Vec<LexEdge>,
    by_from: BTreeMap<u32, Vec<usize>>,
    reach: Vec<Vec<bool>>,
    nullable: BTreeSet<FunctorKey>,
    b: Bindings,
    bound: usize,
    cut: bool,
}

impl<'g> Oracle<'g> {
    fn new(g: &'g Grammar, wg: &WordGraph, occur_check: bool) -> Oracle<'g> {
        let edges = g.lexical_analysis(wg);
        let mut by_from: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            by_from.entry(e.from).or_default().push(i);
        }
        let n = wg.num_states() as usize;
        let mut reach = vec![vec![false; n]; n];
        for s in (0..n).rev() {
            reach[s][s] = true;
            for (_, t) in wg.outgoing(s as u32) {
                let row = reach[t.to as usize].clone();
                for (x, r) in row.into_iter().enumerate() {
                    reach[s][x] |= r;
                }
            }
        }
        Oracle { g, edges, by_from, reach, nullable: nullable(g), b: Bindings::new(occur_check), bound: 0, cut: false }
    }

    fn may_be_empty(&self, t: &Term) -> bool {
        match self.b.deref(t).functor_key() {
            Some(k) => self.nullable.contains(&k),
            None => !self.nullable.is_empty(),
        }
    }

    fn derive(&mut self, cat: &Term, i: u32, j: u32, depth: usize, k: Cont<'_, 'g>) -> Result<(), CyclicTerm> {
        if depth > self.bound {
            self.cut = true;
            return Ok(());
        }
        let g = self.g;
        if let Some(list) = self.by_from.get(&i).cloned() {
            for e in list {
                if self.edges[e].to != j {
                    continue;
                }
                let m = self.b.mark();
                let ecat = self.edges[e].cat.clone();
                let t = self.b.thaw(&ecat);
                if self.b.unify(cat, &t)? {
                    let edge = &self.edges[e];
                    let label = Label::Lex {
                        edge: e,
                        entry: edge.entry,
                        name: g.lexicon[edge.entry].name.clone(),
                        from: edge.from,
                        to: edge.to,
                        score: edge.score,
                    };
                    let score = edge.score;
                    k(self, Node { label, cat: t, children: Vec::new(), score })?;
                }
                self.b.undo(m);
            }
        }
        if i == j {
            for (gi, gap) in g.gaps.iter().enumerate() {
                let m = self.b.mark();
                let t = self.b.instantiate(&gap.cat, gap.nvars);
                if self.b.unify(cat, &t)? {
                    let label = Label::Gap { gap: gi, name: gap.name.clone(), pos: Pos::Known(i) };
                    k(self, Node { label, cat: t, children: Vec::new(), score: 0.0 })?;
                }
                self.b.undo(m);
            }
        }
        for (ri, rule) in g.rules.iter().enumerate() {
            let m = self.b.mark();
            let base = self.b.alloc(rule.nvars);
            let mother = rule.mother.offset(base);
            if self.b.unify(cat, &mother)? {
                let ds: Vec<Term> = rule.daughters().iter().map(|d| d.offset(base)).collect();
                let name = rule.name.clone();
                let mut acc = Vec::new();
                self.derive_list(&ds, i, j, depth + 1, &mut acc, &mut |s, children| {
                    let score = children.iter().map(|c| c.score).sum();
                    let label = Label::Rule { rule: ri, name: name.clone() };
                    k(s, Node { label, cat: mother.clone(), children: children.to_vec(), score })
                })?;
            }
            self.b.undo(m);
        }
        Ok(())
    }

    fn derive_list(
        &mut self,
        ds: &[Term],
        i: u32,
        j: u32,
        depth: usize,
        acc: &mut Vec<Node>,
        k: ListCont<'_, 'g>,
    ) -> Result<(), CyclicTerm> {
        let Some((d, rest)) = ds.split_first() else {
            return if i == j { k(self, acc) } else { Ok(()) };
        };
        let empty_ok = self.may_be_empty(d);
        let rest_needs_input = rest.iter().any(|r| !self.may_be_empty(r));
        for mid in 0..self.reach.len() as u32 {
            if !(self.reach[i as usize][mid as usize] && self.reach[mid as usize][j as usize]) {
                continue;
            }
            if mid == i && !empty_ok {
                continue;
            }
            if (rest.is_empty() && mid != j) || (rest_needs_input && mid == j) {
                continue;
            }
            self.derive(d, i, mid, depth, &mut |s, n| {
                acc.push(n);
                let res = s.derive_list(rest, mid, j, depth, acc, k);
                acc.pop();
                res
            })?;
        }
        Ok(())
    }
}

/// Functors that may derive the empty string, over-approximated at the
/// functor level.
fn nullable(g: &Grammar) -> BTreeSet<FunctorKey> {
    let mut set: BTreeSet<FunctorKey> = g.gaps.iter().filter_map(|x| x.cat.functor_key()).collect();
    loop {
        let before = set.len();
        for r in &g.rules {
            let all = r.daughters().iter().all(|d| match d.functor_key() {
                Some(k) => set.contains(&k),
                None => !set.is_empty(),
            });
            if all {
                if let Some(k) = r.mother.functor_key() {
                    set.insert(k);
                }
            }
        }
        if set.len() == before {
            return set;
        }
    }
}

/// Every derivation tree of `top` from `from` to `to`, sorted by structure.
/// Categories are numbered jointly per tree like the engine's trees.
pub fn oracle_parse(
    g: &Grammar,
    wg: &WordGraph,
    top: &Frozen,
    from: u32,
    to: u32,
    cfg: &OracleConfig,
) -> Result<Vec<DerivationTree>, OracleError> {
    if wg.num_states() as usize > cfg.max_span + 1 {
        return Err(OracleError::DepthExhausted(cfg.max_depth));
    }
    let mut o = Oracle::new(g, wg, cfg.occur_check);
    for bound in 1..=cfg.max_depth {
        o.bound = bound;
        o.cut = false;
        let mut found: BTreeMap<String, DerivationTree> = BTreeMap::new();
        let m = o.b.mark();
        let t = o.b.thaw(top);
        o.derive(&t, from, to, 1, &mut |s, node| {
            let mut cats = Vec::new();
            node.cats(&mut cats);
            let joint = s.b.freeze(&Term::app("t", cats));
            let tree = node.build(&mut joint.term().args().iter());
            found.entry(tree.key()).or_insert(tree);
            Ok(())
        })?;
        o.b.undo(m);
        if !o.cut {
            return Ok(found.into_values().collect());
        }
    }
    Err(OracleError::DepthExhausted(cfg.max_depth))
}

/// [`oracle_parse`] for the grammar's top from the start to every final.
pub fn oracle_parse_top(g: &Grammar, wg: &WordGraph, cfg: &OracleConfig) -> Result<Vec<DerivationTree>, OracleError> {
    let mut out = Vec::new();
    for &f in wg.finals() {
        out.extend(oracle_parse(g, wg, &g.top, wg.start(), f, cfg)?);
    }
    Ok(out)
}

/// Generate a sentence top-down, taking choices from `choose(n)`, which
/// must return a value below `n`. `None` when the budget runs out or a
/// choice dead-ends.
pub fn sample_sentence(g: &Grammar, choose: &mut dyn FnMut(usize) -> usize, max_depth: usize) -> Option<Vec<Sym>> {
    let mut b = Bindings::new(true);
    let top = b.thaw(&g.top);
    let mut words = Vec::new();
    if expand(g, &mut b, &top, max_depth, choose, &mut words) {
        Some(words)
    } else {
        None
    }
}

fn expand(g: &Grammar, b: &mut Bindings, cat: &Term, depth: usize, choose: &mut dyn FnMut(usize) -> usize, out: &mut Vec<Sym>) -> bool {
    if depth == 0 {
        return false;
    }
    let n = g.lexicon.len() + g.gaps.len() + g.rules.len();
    if n == 0 {
        return false;
    }
    let m = b.mark();
    let mut idx = choose(n);
    for _ in 0..n {
        if idx < g.lexicon.len() {
            let lex = &g.lexicon[idx];
            let t = b.instantiate(&lex.cat, lex.nvars);
            if b.unify(cat, &t) == Ok(true) {
                out.extend(lex.words.iter().cloned());
                return true;
            }
        } else if idx < g.lexicon.len() + g.gaps.len() {
            let gap = &g.gaps[idx - g.lexicon.len()];
            let t = b.instantiate(&gap.cat, gap.nvars);
            if b.unify(cat, &t) == Ok(true) {
                return true;
            }
        } else {
            let rule = &g.rules[idx - g.lexicon.len() - g.gaps.len()];
            let base = b.alloc(rule.nvars);
            if b.unify(cat, &rule.mother.offset(base)) == Ok(true) {
                let len = out.len();
                if rule.daughters().iter().all(|d| expand(g, b, &d.offset(base), depth - 1, choose, out)) {
                    return true;
                }
                out.truncate(len);
            }
        }
        b.undo(m);
        idx = (idx + 1) % n;
    }
    false
}
