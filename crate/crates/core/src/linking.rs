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

//! Head-corner linking tables: the reflexive-transitive closure of the
//! mother/head relation over (category, begin, end) triples, with one
//! generalized entry per functor pair.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{CyclicTerm, LinkError};
use crate::grammar::{Grammar, WeakeningPolicy};
use crate::terms::{anti_unify, Bindings, Frozen, FunctorKey, Term};

/// Default bound on closure updates before giving up.
pub const DEFAULT_CLOSURE_BOUND: usize = 200_000;

type PairKey = (FunctorKey, FunctorKey);

/// A generalized entry `link(goal, head)` where the goal spans
/// `(p_m, q_m)` and the head `(p_h, q_h)`. `left_anchored` means
/// `p_h = p_m`; `right_anchored` means `q_h = q_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkEntry {
    pair: Frozen,
    pub left_anchored: bool,
    pub right_anchored: bool,
}

impl LinkEntry {
    fn new(goal: &Term, head: &Term, left: bool, right: bool) -> LinkEntry {
        LinkEntry {
            pair: Frozen::new(&Term::app("link", vec![goal.clone(), head.clone()])),
            left_anchored: left,
            right_anchored: right,
        }
    }

    pub fn goal(&self) -> &Term {
        &self.pair.term().args()[0]
    }

    pub fn head(&self) -> &Term {
        &self.pair.term().args()[1]
    }

    /// Both categories as one frozen `link(goal, head)` term.
    pub fn pair(&self) -> &Frozen {
        &self.pair
    }

    fn key(&self) -> PairKey {
        (self.goal().functor_key().unwrap(), self.head().functor_key().unwrap())
    }

    fn merge(&self, other: &LinkEntry) -> LinkEntry {
        LinkEntry {
            pair: anti_unify(self.pair.term(), other.pair.term()),
            left_anchored: self.left_anchored && other.left_anchored,
            right_anchored: self.right_anchored && other.right_anchored,
        }
    }
}

impl fmt::Display for LinkEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ((gf, gn), (hf, hn)) = self.key();
        let flag = |b: bool| if b { "1" } else { "0" };
        write!(
            f,
            "{gf}/{gn} {hf}/{hn} {} {} {} {}",
            flag(self.left_anchored),
            flag(self.right_anchored),
            self.goal(),
            self.head()
        )
    }
}

/// Entries indexed by (goal functor, head functor); lookup is a single map
/// access.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinkTable {
    entries: BTreeMap<PairKey, LinkEntry>,
}

impl LinkTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, goal: &FunctorKey, head: &FunctorKey) -> Option<&LinkEntry> {
        self.entries.get(&(goal.clone(), head.clone()))
    }

    pub fn entries(&self) -> impl Iterator<Item = &LinkEntry> + '_ {
        self.entries.values()
    }

    pub fn keys(&self) -> impl Iterator<Item = &(FunctorKey, FunctorKey)> + '_ {
        self.entries.keys()
    }

    fn filtered(&self, heads: &BTreeSet<FunctorKey>) -> LinkTable {
        let entries = self
            .entries
            .iter()
            .filter(|((_, h), _)| heads.contains(h))
            .map(|(k, e)| (k.clone(), e.clone()))
            .collect();
        LinkTable { entries }
    }

    /// Check that a head category spanning `(hp0, hp)` can start a
    /// head-corner for a goal spanning `(gp0, gp)`, unifying the entry's
    /// categories and anchored positions. An unbound goal or head matches
    /// without constraints. Leaves `b` untouched on failure.
    #[allow(clippy::too_many_arguments)]
    pub fn lookup(
        &self,
        b: &mut Bindings,
        goal: &Term,
        gp0: &Term,
        gp: &Term,
        head: &Term,
        hp0: &Term,
        hp: &Term,
    ) -> Result<bool, CyclicTerm> {
        let g = b.deref(goal);
        let h = b.deref(head);
        let (Some(gk), Some(hk)) = (g.functor_key(), h.functor_key()) else {
            return Ok(true);
        };
        let Some(e) = self.entries.get(&(gk, hk)) else {
            return Ok(false);
        };
        let mark = b.mark();
        let pair = b.thaw(&e.pair);
        let mut steps = vec![(&pair.args()[0], goal), (&pair.args()[1], head)];
        if e.left_anchored {
            steps.push((gp0, hp0));
        }
        if e.right_anchored {
            steps.push((gp, hp));
        }
        for (x, y) in steps {
            match b.unify(x, y) {
                Ok(true) => {}
                Ok(false) => {
                    b.undo(mark);
                    return Ok(false);
                }
                Err(err) => {
                    b.undo(mark);
                    return Err(err);
                }
            }
        }
        Ok(true)
    }
}

/// The full relation and its subsets whose head is lexical or a gap.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinkTables {
    pub full: LinkTable,
    pub lex: LinkTable,
    pub gap: LinkTable,
}

fn restricted(b: &mut Bindings, policy: &WeakeningPolicy, goal: &Term, head: &Term) -> (Term, Term) {
    let g = b.restrict(goal, policy.for_term(goal));
    let h = b.restrict(head, policy.for_term(head));
    (g, h)
}

/// Build the tables with the grammar's own weakening policy.
pub fn build_link_tables(g: &Grammar) -> Result<LinkTables, LinkError> {
    build_link_tables_with(g, &g.weakening, DEFAULT_CLOSURE_BOUND)
}

pub fn build_link_tables_with(g: &Grammar, policy: &WeakeningPolicy, bound: usize) -> Result<LinkTables, LinkError> {
    for r in &g.rules {
        if r.mother.is_var() || r.head.is_var() {
            return Err(LinkError::VariableCategory(r.name.to_string()));
        }
    }
    for e in &g.lexicon {
        if e.cat.is_var() {
            return Err(LinkError::VariableCategory(e.name.to_string()));
        }
    }
    for gap in &g.gaps {
        if gap.cat.is_var() {
            return Err(LinkError::VariableCategory(gap.name.to_string()));
        }
    }

    let mut b = Bindings::new(true);
    let mut seeds: BTreeMap<FunctorKey, Vec<LinkEntry>> = BTreeMap::new();
    for r in &g.rules {
        let mark = b.mark();
        let base = b.alloc(r.nvars);
        let (m, h) = restricted(&mut b, policy, &r.mother.offset(base), &r.head.offset(base));
        let e = LinkEntry::new(&b.resolve(&m), &b.resolve(&h), r.rev_left_ds.is_empty(), r.right_ds.is_empty());
        b.undo(mark);
        seeds.entry(m.functor_key().unwrap()).or_default().push(e);
    }

    let mut table: BTreeMap<PairKey, LinkEntry> = BTreeMap::new();
    let mut queue: VecDeque<PairKey> = VecDeque::new();
    let mut updates = 0usize;
    let mut add = |table: &mut BTreeMap<PairKey, LinkEntry>, queue: &mut VecDeque<PairKey>, e: LinkEntry| {
        let key = e.key();
        let changed = match table.get(&key) {
            None => {
                table.insert(key.clone(), e);
                true
            }
            Some(old) => {
                let merged = old.merge(&e);
                if merged != *old {
                    table.insert(key.clone(), merged);
                    true
                } else {
                    false
                }
            }
        };
        if changed {
            updates += 1;
            if !queue.contains(&key) {
                queue.push_back(key);
            }
        }
        updates
    };

    for (f, n) in g.functors() {
        let args: Vec<Term> = (0..n as u32).map(Term::var).collect();
        let t = Term::app_sym(f, args);
        add(&mut table, &mut queue, LinkEntry::new(&t, &t, true, true));
    }
    for e in seeds.values().flatten() {
        add(&mut table, &mut queue, e.clone());
    }

    while let Some(key) = queue.pop_front() {
        let Some(steps) = seeds.get(&key.1) else { continue };
        let e = table[&key].clone();
        for s in steps {
            let mark = b.mark();
            let lhs = b.thaw(&e.pair);
            let rhs = b.thaw(&s.pair);
            let composed = if b.unify(&lhs.args()[1], &rhs.args()[0]) == Ok(true) {
                let (goal, head) = restricted(&mut b, policy, &lhs.args()[0], &rhs.args()[1]);
                Some(LinkEntry::new(
                    &b.resolve(&goal),
                    &b.resolve(&head),
                    e.left_anchored && s.left_anchored,
                    e.right_anchored && s.right_anchored,
                ))
            } else {
                None
            };
            b.undo(mark);
            if let Some(c) = composed {
                if add(&mut table, &mut queue, c) > bound {
                    return Err(LinkError::NonTerminatingClosure(bound));
                }
            }
        }
    }

    let full = LinkTable { entries: table };
    let lex_heads: BTreeSet<FunctorKey> = g.lexicon.iter().filter_map(|e| e.cat.functor_key()).collect();
    let gap_heads: BTreeSet<FunctorKey> = g.gaps.iter().filter_map(|e| e.cat.functor_key()).collect();
    Ok(LinkTables { lex: full.filtered(&lex_heads), gap: full.filtered(&gap_heads), full })
}


#[cfg(test)]
mod props {
    extern crate std;
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn lookup_is_deterministic(gi in 0usize..8, hi in 0usize..8) {
            let g = Grammar::parse(
                "top s.\nrule s: s --> np, *vp.\nrule vp: vp --> *verb, np.\nrule np: np --> det, *noun.\n\
                 rule pp: pp --> *prep, np.\nrule sbar: sbar --> *comp, s.\nlex a: [a] = det.",
            ).unwrap();
            let t = build_link_tables(&g).unwrap();
            let fs: Vec<FunctorKey> = g.functors().into_iter().collect();
            let (gk, hk) = (&fs[gi % fs.len()], &fs[hi % fs.len()]);
            let n = t.full.keys().filter(|(a, b)| a == gk && b == hk).count();
            prop_assert!(n <= 1);
        }
    }
}
