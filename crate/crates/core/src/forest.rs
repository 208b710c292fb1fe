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

//! Packed forests as history tables.
//!
//! Each history item records, for one result item, the anchor (lexical
//! edge or gap) and the spine of rules applied on the way up, with the
//! result refs used for the non-head daughters. Read as productions
//! `nt<ref> -> tree with nt<child> leaves`, the table is a lexicalized
//! tree-substitution grammar. Recovery replays the spines against the
//! full grammar, so constraints that were left out during parsing are
//! applied here.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::EngineError;
use crate::grammar::{Grammar, LexEdge, SemSpec};
use crate::memo::{ItemRef, MemoStore};
use crate::terms::{atom_text, Bindings, Frozen, Sym, Term};
use crate::wordgraph::Pos;

/// Recursion bound while replaying histories.
const RECOVERY_DEPTH: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Anchor {
    /// Index into the lexical edges of the parse.
    Lex { edge: usize },
    /// Index into the grammar's gaps, with the position if it was known.
    Gap { gap: usize, pos: Pos },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalTree {
    pub rule: usize,
    /// Result refs for the daughters left of the head, nearest first.
    pub left: Vec<ItemRef>,
    pub right: Vec<ItemRef>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistoryItem {
    pub result: ItemRef,
    pub anchor: Anchor,
    /// Rules applied from the anchor upwards.
    pub spine: Vec<LocalTree>,
}

#[derive(Clone, Debug, Default)]
pub struct Histories {
    items: Vec<HistoryItem>,
    by_ref: BTreeMap<ItemRef, Vec<usize>>,
    seen: BTreeSet<(ItemRef, Anchor, Vec<LocalTree>)>,
}

impl Histories {
    pub fn new() -> Histories {
        Histories::default()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[HistoryItem] {
        &self.items
    }

    /// Add a history for the live result `result`; duplicates are dropped.
    pub fn record(&mut self, result: ItemRef, anchor: Anchor, spine: Vec<LocalTree>) -> bool {
        if !self.seen.insert((result, anchor, spine.clone())) {
            return false;
        }
        self.by_ref.entry(result).or_default().push(self.items.len());
        self.items.push(HistoryItem { result, anchor, spine });
        true
    }

    /// Move the histories of a replaced result to its replacement.
    pub fn rekey(&mut self, old: ItemRef, new: ItemRef) {
        if let Some(list) = self.by_ref.remove(&old) {
            for &i in &list {
                self.items[i].result = new;
            }
            self.by_ref.entry(new).or_default().extend(list);
        }
    }

    pub fn for_ref(&self, r: ItemRef) -> &[usize] {
        self.by_ref.get(&r).map_or(&[], Vec::as_slice)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Label {
    Rule { rule: usize, name: Sym },
    Lex { edge: usize, entry: usize, name: Sym, from: u32, to: u32, score: f64 },
    Gap { gap: usize, name: Sym, pos: Pos },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DerivationTree {
    pub label: Label,
    /// Category after all constraints; variables are numbered across the
    /// whole tree.
    pub category: Term,
    pub children: Vec<DerivationTree>,
    /// Sum of the anchor scores below this node.
    pub score: f64,
}

impl DerivationTree {
    /// Structural identity: rule, lexical edge and gap indices in preorder.
    pub fn key(&self) -> String {
        let mut s = String::new();
        self.write_key(&mut s);
        s
    }

    fn write_key(&self, s: &mut String) {
        match &self.label {
            Label::Rule { rule, .. } => {
                s.push_str(&format!("r{rule}("));
                for (i, c) in self.children.iter().enumerate() {
                    if i > 0 {
                        s.push(',');
                    }
                    c.write_key(s);
                }
                s.push(')');
            }
            Label::Lex { edge, .. } => s.push_str(&format!("l{edge}")),
            Label::Gap { gap, .. } => s.push_str(&format!("g{gap}")),
        }
    }

    /// The span covered, when any leaf has a known position.
    pub fn span(&self) -> (Pos, Pos) {
        let mut leaves = Vec::new();
        self.leaves(&mut leaves);
        let first = leaves.first().map_or(Pos::Unknown, |l| l.0);
        let last = leaves.last().map_or(Pos::Unknown, |l| l.1);
        (first, last)
    }

    fn leaves(&self, out: &mut Vec<(Pos, Pos)>) {
        match &self.label {
            Label::Rule { .. } => self.children.iter().for_each(|c| c.leaves(out)),
            Label::Lex { from, to, .. } => out.push((Pos::Known(*from), Pos::Known(*to))),
            Label::Gap { pos, .. } => out.push((*pos, *pos)),
        }
    }

    /// Lexical entry indices of the leaves, left to right.
    pub fn entries(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if let Label::Lex { entry, .. } = t.label {
                out.push(entry);
            }
        });
        out
    }

    /// Lexical edge indices of the leaves, left to right.
    pub fn edges(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if let Label::Lex { edge, .. } = t.label {
                out.push(edge);
            }
        });
        out
    }

    /// Preorder traversal.
    pub fn walk(&self, f: &mut dyn FnMut(&DerivationTree)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    fn fill_gap_positions(&mut self, at: &mut Pos) {
        match &mut self.label {
            Label::Rule { .. } => self.children.iter_mut().for_each(|c| c.fill_gap_positions(at)),
            Label::Lex { to, .. } => *at = Pos::Known(*to),
            Label::Gap { pos, .. } => {
                if *at == Pos::Unknown {
                    *at = *pos;
                } else {
                    *pos = *at;
                }
            }
        }
    }
}

impl fmt::Display for DerivationTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Label::Rule { name, .. } => {
                write!(f, "({}", label_text(name))?;
                for c in &self.children {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
            Label::Lex { name, from, to, score, .. } => {
                write!(f, "(lex {} {from} {to} {score})", label_text(name))
            }
            Label::Gap { name, pos, .. } => write!(f, "(gap {} {pos})", label_text(name)),
        }
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

/// Names are printed bare when they are all digits, quoted as atoms otherwise.
fn label_text(name: &str) -> String {
    if !name.is_empty() && name.bytes().all(|c| c.is_ascii_digit()) {
        String::from(name)
    } else {
        atom_text(name)
    }
}

/// Read-only view over a finished first phase.
pub struct Forest<'a> {
    /// The full grammar; its rules, lexicon and gaps must be index-aligned
    /// with those used while parsing.
    pub grammar: &'a Grammar,
    /// Lexical edges of the full grammar, index-aligned with the parse.
    pub edges: &'a [LexEdge],
    pub memo: &'a MemoStore,
    pub histories: &'a Histories,
    pub occur_check: bool,
}

type Cont<'k, 'f> = &'k mut dyn FnMut(&mut Replay<'f>, Node) -> Result<(), EngineError>;
type ListCont<'k, 'f> = &'k mut dyn FnMut(&mut Replay<'f>, &[Node]) -> Result<(), EngineError>;

struct Replay<'f> {
    forest: &'f Forest<'f>,
    b: Bindings,
    depth: usize,
}

impl<'f> Replay<'f> {
    fn expand(&mut self, r: ItemRef, want: &Term, k: Cont<'_, 'f>) -> Result<(), EngineError> {
        self.depth += 1;
        if self.depth > RECOVERY_DEPTH {
            return Err(EngineError::DepthBound(RECOVERY_DEPTH));
        }
        let f = self.forest;
        let live = f.memo.live(r);
        for &h in f.histories.for_ref(live) {
            let m = self.b.mark();
            let item = &f.histories.items()[h];
            let (cat, leaf) = match item.anchor {
                Anchor::Lex { edge } => {
                    let e = &f.edges[edge];
                    let cat = self.b.thaw(&e.cat);
                    let name = f.grammar.lexicon[e.entry].name.clone();
                    let label = Label::Lex { edge, entry: e.entry, name, from: e.from, to: e.to, score: e.score };
                    (cat.clone(), Node { label, cat, children: Vec::new(), score: e.score })
                }
                Anchor::Gap { gap, pos } => {
                    let g = &f.grammar.gaps[gap];
                    let cat = self.b.instantiate(&g.cat, g.nvars);
                    let label = Label::Gap { gap, name: g.name.clone(), pos };
                    (cat.clone(), Node { label, cat, children: Vec::new(), score: 0.0 })
                }
            };
            self.climb(h, 0, cat, leaf, want, k)?;
            self.b.undo(m);
        }
        self.depth -= 1;
        Ok(())
    }

    fn climb(&mut self, h: usize, i: usize, cur: Term, node: Node, want: &Term, k: Cont<'_, 'f>) -> Result<(), EngineError> {
        let f = self.forest;
        let spine = &f.histories.items()[h].spine;
        let m = self.b.mark();
        if i == spine.len() {
            if self.b.unify(&cur, want)? {
                k(self, node)?;
            }
            self.b.undo(m);
            return Ok(());
        }
        let lt = &spine[i];
        let rule = &f.grammar.rules[lt.rule];
        let base = self.b.alloc(rule.nvars);
        if self.b.unify(&rule.head.offset(base), &cur)? {
            let left: Vec<Term> = rule.rev_left_ds.iter().map(|d| d.offset(base)).collect();
            let right: Vec<Term> = rule.right_ds.iter().map(|d| d.offset(base)).collect();
            let mother = rule.mother.offset(base);
            let name = rule.name.clone();
            let mut lacc = Vec::new();
            self.expand_list(&lt.left, &left, &mut lacc, &mut |s, lefts| {
                let mut racc = Vec::new();
                s.expand_list(&lt.right, &right, &mut racc, &mut |s, rights| {
                    let mut children: Vec<Node> = lefts.iter().rev().cloned().collect();
                    children.push(node.clone());
                    children.extend(rights.iter().cloned());
                    let score = children.iter().map(|c| c.score).sum();
                    let n = Node { label: Label::Rule { rule: lt.rule, name: name.clone() }, cat: mother.clone(), children, score };
                    s.climb(h, i + 1, mother.clone(), n, want, k)
                })
            })?;
        }
        self.b.undo(m);
        Ok(())
    }

    fn expand_list(
        &mut self,
        refs: &[ItemRef],
        terms: &[Term],
        acc: &mut Vec<Node>,
        k: ListCont<'_, 'f>,
    ) -> Result<(), EngineError> {
        let Some((&r, rest)) = refs.split_first() else {
            return k(self, acc);
        };
        self.expand(r, &terms[0], &mut |s, n| {
            acc.push(n);
            s.expand_list(rest, &terms[1..], acc, k)?;
            acc.pop();
            Ok(())
        })
    }
}

impl<'a> Forest<'a> {
    /// Every distinct derivation tree rooted at one of `roots` whose root
    /// category unifies with `want`, in first-found order.
    pub fn trees(&self, roots: &[ItemRef], want: &Frozen) -> Result<Vec<DerivationTree>, EngineError> {
        let mut replay = Replay { forest: self, b: Bindings::new(self.occur_check), depth: 0 };
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut live: Vec<ItemRef> = roots.iter().map(|&r| self.memo.live(r)).collect();
        live.sort_unstable();
        live.dedup();
        for r in live {
            let m = replay.b.mark();
            let top = replay.b.thaw(want);
            replay.expand(r, &top, &mut |s, node| {
                let mut cats = Vec::new();
                node.cats(&mut cats);
                let joint = s.b.freeze(&Term::app("t", cats));
                let mut it = joint.term().args().iter();
                let mut tree = node.build(&mut it);
                let key = tree.key();
                if seen.insert(key) {
                    let mut at = Pos::Unknown;
                    // leading gaps take the position of the first lexical leaf
                    let (first, _) = tree.span();
                    if first == Pos::Unknown {
                        let mut lex_from = Pos::Unknown;
                        tree.walk(&mut |t| {
                            if let (Label::Lex { from, .. }, Pos::Unknown) = (&t.label, lex_from) {
                                lex_from = Pos::Known(*from);
                            }
                        });
                        at = lex_from;
                    }
                    tree.fill_gap_positions(&mut at);
                    out.push(tree);
                }
                Ok(())
            })?;
            replay.b.undo(m);
        }
        Ok(out)
    }

    pub fn count(&self, roots: &[ItemRef], want: &Frozen) -> Result<usize, EngineError> {
        Ok(self.trees(roots, want)?.len())
    }

    /// Variant-distinct semantic projections of the root categories.
    pub fn semantics(&self, roots: &[ItemRef], want: &Frozen, spec: &SemSpec) -> Result<Vec<Frozen>, EngineError> {
        let mut out: Vec<Frozen> = Vec::new();
        for t in self.trees(roots, want)? {
            let sem = Frozen::new(&spec.project(&t.category));
            if !out.contains(&sem) {
                out.push(sem);
            }
        }
        Ok(out)
    }

    /// History items reachable from `roots`, breadth first.
    pub fn reachable(&self, roots: &[ItemRef]) -> Vec<usize> {
        let mut queue: VecDeque<ItemRef> = roots.iter().map(|&r| self.memo.live(r)).collect();
        let mut seen_refs = BTreeSet::new();
        let mut out = Vec::new();
        while let Some(r) = queue.pop_front() {
            if !seen_refs.insert(r) {
                continue;
            }
            for &h in self.histories.for_ref(r) {
                out.push(h);
                for lt in &self.histories.items()[h].spine {
                    for &c in lt.left.iter().chain(&lt.right) {
                        queue.push_back(self.memo.live(c));
                    }
                }
            }
        }
        out
    }

    /// One line per reachable history item: `nt<ref> -> <tree>` where the
    /// tree has `nt<child>` substitution leaves.
    pub fn tsg(&self, roots: &[ItemRef]) -> String {
        let mut s = String::new();
        for h in self.reachable(roots) {
            let item = &self.histories.items()[h];
            let mut tree = match item.anchor {
                Anchor::Lex { edge } => label_text(&self.grammar.lexicon[self.edges[edge].entry].name),
                Anchor::Gap { gap, .. } => format!("gap({})", label_text(&self.grammar.gaps[gap].name)),
            };
            for lt in &item.spine {
                let mut parts: Vec<String> = lt.left.iter().rev().map(|&c| format!("nt{}", self.memo.live(c))).collect();
                parts.push(tree);
                parts.extend(lt.right.iter().map(|&c| format!("nt{}", self.memo.live(c))));
                tree = format!("{}({})", label_text(&self.grammar.rules[lt.rule].name), parts.join(","));
            }
            s.push_str(&format!("nt{} -> {}\n", item.result, tree));
        }
        s
    }
}

#[cfg(test)]
pub(crate) fn leaf_count(t: &DerivationTree) -> usize {
    let mut n = 0;
    t.walk(&mut |x| {
        if x.children.is_empty() {
            n += 1;
        }
    });
    n
}
