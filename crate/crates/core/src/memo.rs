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

//! Goal and result tables for memoized parse goals.
//!
//! Goals are stored as frozen `g(Cat,P0,P)` terms plus their extremes once
//! their search space is exhausted. Results are frozen `r(Cat,P0,P)` terms
//! without extremes; a new result that subsumes live ones marks them as
//! replaced instead of deleting them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::terms::{Frozen, FunctorKey, Term};
use crate::wordgraph::Pos;

pub type ItemRef = u32;

/// Position of a resolved position term.
pub fn pos_of(t: &Term) -> Pos {
    match t {
        Term::Int(i) if *i >= 0 => Pos::Known(*i as u32),
        _ => Pos::Unknown,
    }
}

/// Build the frozen key `f(cat, p0, p)` used by both tables.
pub fn triple(f: &str, cat: Term, p0: Term, p: Term) -> Frozen {
    Frozen::new(&Term::app(f, vec![cat, p0, p]))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoalItem {
    /// `g(Cat, P0, P)`.
    pub goal: Frozen,
    pub e0: Pos,
    pub e: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResultItem {
    /// `r(Cat, P0, P)`.
    pub item: Frozen,
    pub replaced_by: Option<ItemRef>,
}

impl ResultItem {
    pub fn cat(&self) -> &Term {
        &self.item.term().args()[0]
    }

    pub fn p0(&self) -> Pos {
        pos_of(&self.item.term().args()[1])
    }

    pub fn p(&self) -> Pos {
        pos_of(&self.item.term().args()[2])
    }

    pub fn is_live(&self) -> bool {
        self.replaced_by.is_none()
    }
}

fn cat_key(t: &Frozen) -> Option<FunctorKey> {
    t.term().args()[0].functor_key()
}

/// The extremes `(d0, d)` of a stored goal are at least as wide as
/// `(q0, q)`. An unknown stored extreme is unbounded; an unknown query
/// extreme is only covered by an unknown stored one.
fn extremes_cover(le: &mut dyn FnMut(u32, u32) -> bool, d0: Pos, d: Pos, q0: Pos, q: Pos) -> bool {
    let left = match (d0, q0) {
        (Pos::Unknown, _) => true,
        (Pos::Known(_), Pos::Unknown) => false,
        (Pos::Known(a), Pos::Known(b)) => le(a, b),
    };
    left && match (d, q) {
        (Pos::Unknown, _) => true,
        (Pos::Known(_), Pos::Unknown) => false,
        (Pos::Known(a), Pos::Known(b)) => le(b, a),
    }
}

#[derive(Clone, Debug, Default)]
pub struct MemoStore {
    goals: Vec<GoalItem>,
    goal_index: BTreeMap<Option<FunctorKey>, Vec<usize>>,
    exact_goals: BTreeSet<(Frozen, Pos, Pos)>,
    results: Vec<ResultItem>,
    result_index: BTreeMap<Option<FunctorKey>, Vec<ItemRef>>,
}

impl MemoStore {
    pub fn new() -> MemoStore {
        MemoStore::default()
    }

    pub fn goals(&self) -> &[GoalItem] {
        &self.goals
    }

    pub fn results(&self) -> &[ResultItem] {
        &self.results
    }

    pub fn result(&self, r: ItemRef) -> &ResultItem {
        &self.results[r as usize]
    }

    pub fn live_count(&self) -> usize {
        self.results.iter().filter(|r| r.is_live()).count()
    }

    /// Follow replacement links to the live item standing for `r`.
    pub fn live(&self, mut r: ItemRef) -> ItemRef {
        while let Some(next) = self.results[r as usize].replaced_by {
            r = next;
        }
        r
    }

    /// Some searched goal is at least as general as `goal` (checked as one
    /// `g(Cat,P0,P)` term) and had extremes at least as wide. `le` compares
    /// two known positions.
    pub fn goal_covered(&self, goal: &Frozen, e0: Pos, e: Pos, le: &mut dyn FnMut(u32, u32) -> bool) -> bool {
        if self.exact_goals.contains(&(goal.clone(), e0, e)) {
            return true;
        }
        let check = |idx: &Vec<usize>, le: &mut dyn FnMut(u32, u32) -> bool| {
            idx.iter().any(|&i| {
                let d = &self.goals[i];
                extremes_cover(le, d.e0, d.e, e0, e) && d.goal.subsumes(goal)
            })
        };
        let key = cat_key(goal);
        if key.is_some() {
            if let Some(idx) = self.goal_index.get(&key) {
                if check(idx, le) {
                    return true;
                }
            }
        }
        self.goal_index.get(&None).is_some_and(|idx| check(idx, le))
    }

    pub fn add_goal(&mut self, goal: Frozen, e0: Pos, e: Pos) {
        self.exact_goals.insert((goal.clone(), e0, e));
        self.goal_index.entry(cat_key(&goal)).or_default().push(self.goals.len());
        self.goals.push(GoalItem { goal, e0, e });
    }

    /// Insert a result unless a live item already subsumes it. Returns the
    /// ref standing for the result and the refs it replaced.
    pub fn store_result(&mut self, item: Frozen) -> (ItemRef, Vec<ItemRef>) {
        let key = cat_key(&item);
        let mut general: Vec<ItemRef> = Vec::new();
        if key.is_some() {
            general.extend(self.result_index.get(&key).into_iter().flatten());
        }
        general.extend(self.result_index.get(&None).into_iter().flatten());
        for &r in &general {
            let old = &self.results[r as usize];
            if old.is_live() && old.item.subsumes(&item) {
                return (r, Vec::new());
            }
        }
        let new = self.results.len() as ItemRef;
        let specific: Vec<ItemRef> = if key.is_some() {
            self.result_index.get(&key).cloned().unwrap_or_default()
        } else {
            (0..new).collect()
        };
        let mut replaced = Vec::new();
        for r in specific {
            let old = &mut self.results[r as usize];
            if old.is_live() && item.subsumes(&old.item) {
                old.replaced_by = Some(new);
                replaced.push(r);
            }
        }
        self.result_index.entry(key).or_default().push(new);
        self.results.push(ResultItem { item, replaced_by: None });
        (new, replaced)
    }

    /// Live result refs that may unify with a category of the given functor
    /// (all live refs for an unbound category).
    pub fn candidates(&self, key: Option<&FunctorKey>) -> Vec<ItemRef> {
        let mut out: Vec<ItemRef> = match key {
            Some(k) => {
                let mut v: Vec<ItemRef> = self.result_index.get(&Some(k.clone())).cloned().unwrap_or_default();
                v.extend(self.result_index.get(&None).into_iter().flatten());
                v
            }
            None => (0..self.results.len() as ItemRef).collect(),
        };
        out.retain(|&r| self.results[r as usize].is_live());
        out.sort_unstable();
        out
    }

    /// Human-readable listing of both tables.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for g in &self.goals {
            let t = g.goal.term();
            let a = t.args();
            let _ = writeln!(s, "goal {} {} {} extremes {} {}", a[0], a[1], a[2], g.e0, g.e);
        }
        for (i, r) in self.results.iter().enumerate() {
            let a = r.item.term().args();
            let status = match r.replaced_by {
                None => String::from("live"),
                Some(n) => alloc::format!("replaced_by {n}"),
            };
            let _ = writeln!(s, "result {i} {} {} {} {status}", a[0], a[1], a[2]);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn fr(s: &str) -> Frozen {
        Frozen::new(&parse_term(s).unwrap().0)
    }

    fn int_le(a: u32, b: u32) -> bool {
        a <= b
    }

    #[test]
    fn goal_coverage() {
        let mut m = MemoStore::new();
        m.add_goal(fr("g(s,3,X)"), Pos::Known(3), Pos::Known(12));
        assert!(m.goal_covered(&fr("g(s,3,Y)"), Pos::Known(3), Pos::Known(10), &mut int_le));
        assert!(!m.goal_covered(&fr("g(s,3,Y)"), Pos::Known(3), Pos::Known(13), &mut int_le));
        assert!(!m.goal_covered(&fr("g(s,3,Y)"), Pos::Known(3), Pos::Unknown, &mut int_le));
        assert!(!m.goal_covered(&fr("g(np,3,Y)"), Pos::Known(3), Pos::Known(10), &mut int_le));

        let mut m = MemoStore::new();
        m.add_goal(fr("g(s(a),3,X)"), Pos::Known(3), Pos::Known(12));
        assert!(!m.goal_covered(&fr("g(s(Y),3,Z)"), Pos::Known(3), Pos::Known(12), &mut int_le));

        let mut m = MemoStore::new();
        m.add_goal(fr("g(s,3,X)"), Pos::Known(3), Pos::Known(10));
        assert!(!m.goal_covered(&fr("g(s,3,Y)"), Pos::Known(3), Pos::Known(12), &mut int_le));

        let mut m = MemoStore::new();
        m.add_goal(fr("g(s,_,_)"), Pos::Unknown, Pos::Unknown);
        assert!(m.goal_covered(&fr("g(s,1,2)"), Pos::Known(0), Pos::Unknown, &mut int_le));
        m.add_goal(fr("g(_,_,_)"), Pos::Unknown, Pos::Unknown);
        assert!(m.goal_covered(&fr("g(np,1,2)"), Pos::Known(0), Pos::Known(4), &mut int_le));
    }

    #[test]
    fn shared_positions_are_checked_jointly() {
        let mut m = MemoStore::new();
        m.add_goal(fr("g(x,Q,Q)"), Pos::Unknown, Pos::Unknown);
        assert!(!m.goal_covered(&fr("g(x,1,2)"), Pos::Unknown, Pos::Unknown, &mut int_le));
        assert!(m.goal_covered(&fr("g(x,2,2)"), Pos::Unknown, Pos::Unknown, &mut int_le));
    }

    #[test]
    fn more_general_result_replaces() {
        let mut m = MemoStore::new();
        let (a, _) = m.store_result(fr("r(f(a),0,1)"));
        let (x, replaced) = m.store_result(fr("r(f(X),0,1)"));
        assert_eq!(replaced, [a]);
        assert_eq!(m.result(a).replaced_by, Some(x));
        assert_eq!(m.live(a), x);
        assert_eq!(m.results().len(), 2);

        let mut m = MemoStore::new();
        let (x, _) = m.store_result(fr("r(f(X),0,1)"));
        assert_eq!(m.store_result(fr("r(f(a),0,1)")), (x, Vec::new()));
        assert_eq!(m.results().len(), 1);
    }

    #[test]
    fn live_set_is_order_independent() {
        let items = ["r(f(a),0,1)", "r(f(b),0,1)", "r(f(X),0,1)"];
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for p in perms {
            let mut m = MemoStore::new();
            for i in p {
                m.store_result(fr(items[i]));
            }
            let live: Vec<&Frozen> = m.results().iter().filter(|r| r.is_live()).map(|r| &r.item).collect();
            assert_eq!(live, [&fr("r(f(X),0,1)")]);
        }
    }

    #[test]
    fn variable_categories_are_indexed() {
        let mut m = MemoStore::new();
        let (a, _) = m.store_result(fr("r(np,0,1)"));
        let (v, replaced) = m.store_result(fr("r(_,0,1)"));
        assert_eq!(replaced, [a]);
        assert_eq!(m.candidates(Some(&(crate::terms::Sym::from("np"), 0))), [v]);
        assert_eq!(m.store_result(fr("r(vp,0,1)")).0, v);
    }
}
