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

//! Weighted acyclic word-graphs. States are points in time; every
//! transition goes strictly forward, so a plain string is the linear graph
//! `0 -w1-> 1 -w2-> ... -> n`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::WordGraphError;
use crate::terms::Sym;

pub type StateId = u32;

/// A string position or word-graph state that may not be known yet.
/// `Unknown` is compatible with everything.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pos {
    Known(StateId),
    Unknown,
}

impl Pos {
    pub fn known(self) -> Option<StateId> {
        match self {
            Pos::Known(s) => Some(s),
            Pos::Unknown => None,
        }
    }
}

impl From<StateId> for Pos {
    fn from(s: StateId) -> Pos {
        Pos::Known(s)
    }
}

impl core::fmt::Display for Pos {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Pos::Known(s) => write!(f, "{s}"),
            Pos::Unknown => f.write_str("_"),
        }
    }
}

/// Integer comparison that succeeds whenever either side is unknown.
pub fn smaller_equal(a: Pos, b: Pos) -> bool {
    match (a, b) {
        (Pos::Known(x), Pos::Known(y)) => x <= y,
        _ => true,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub from: StateId,
    pub word: Sym,
    pub to: StateId,
    /// Additive cost; lower is better.
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WordGraph {
    num_states: u32,
    transitions: Vec<Transition>,
    start: StateId,
    finals: Vec<StateId>,
    outgoing: Vec<Vec<usize>>,
}

impl WordGraph {
    pub fn new(
        num_states: u32,
        transitions: Vec<Transition>,
        start: StateId,
        mut finals: Vec<StateId>,
    ) -> Result<WordGraph, WordGraphError> {
        let check = |s: StateId| if s < num_states { Ok(()) } else { Err(WordGraphError::UnknownState(s)) };
        check(start)?;
        finals.sort_unstable();
        finals.dedup();
        for &f in &finals {
            check(f)?;
        }
        let mut outgoing = vec![Vec::new(); num_states as usize];
        for (i, t) in transitions.iter().enumerate() {
            check(t.from)?;
            check(t.to)?;
            if t.from >= t.to {
                return Err(WordGraphError::NotForward { from: t.from, to: t.to });
            }
            outgoing[t.from as usize].push(i);
        }
        Ok(WordGraph { num_states, transitions, start, finals, outgoing })
    }

    /// The linear graph for a token sequence, all scores zero.
    pub fn from_string<S: AsRef<str>>(words: &[S]) -> WordGraph {
        let transitions = words
            .iter()
            .enumerate()
            .map(|(i, w)| Transition { from: i as u32, word: Sym::from(w.as_ref()), to: i as u32 + 1, score: 0.0 })
            .collect();
        let n = words.len() as u32;
        WordGraph::new(n + 1, transitions, 0, vec![n]).expect("linear graph is well formed")
    }

    pub fn num_states(&self) -> u32 {
        self.num_states
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn finals(&self) -> &[StateId] {
        &self.finals
    }

    pub fn outgoing(&self, s: StateId) -> impl Iterator<Item = (usize, &Transition)> + '_ {
        self.outgoing
            .get(s as usize)
            .into_iter()
            .flatten()
            .map(move |&i| (i, &self.transitions[i]))
    }

    /// True if the graph is a single chain `start=0 -> 1 -> ... -> n`.
    pub fn is_linear(&self) -> bool {
        self.start == 0
            && self.finals == [self.num_states - 1]
            && self.transitions.len() + 1 == self.num_states as usize
            && self.outgoing[..self.num_states as usize - 1].iter().all(|o| o.len() == 1)
            && self.transitions.iter().all(|t| t.to == t.from + 1)
    }

    /// Every path from the start state to a final state, as transition
    /// indices. Exponential; meant for small graphs.
    pub fn full_paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.paths_from(self.start, &mut path, &mut out);
        out
    }

    fn paths_from(&self, s: StateId, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if self.finals.contains(&s) {
            out.push(path.clone());
        }
        for (i, t) in self.outgoing(s) {
            path.push(i);
            self.paths_from(t.to, path, out);
            path.pop();
        }
    }

    /// Length (in transitions) of the longest path from each state to `target`,
    /// `None` when `target` is unreachable.
    pub fn longest_to(&self, target: StateId) -> Vec<Option<u32>> {
        let mut best = vec![None; self.num_states as usize];
        best[target as usize] = Some(0);
        for s in (0..self.num_states).rev() {
            for (_, t) in self.outgoing(s) {
                if let Some(d) = best[t.to as usize] {
                    let cand = d + 1;
                    if best[s as usize].is_none_or(|b| cand > b) {
                        best[s as usize] = Some(cand);
                    }
                }
            }
        }
        best
    }

    /// Parse the line-oriented word-graph format:
    /// `state N.`, `trans FROM TOKEN TO SCORE.`, `start S.`, `final S.`,
    /// with `%` comments.
    pub fn parse(text: &str) -> Result<WordGraph, WordGraphError> {
        let mut transitions = Vec::new();
        let mut start = None;
        let mut finals = Vec::new();
        let mut max_state: Option<u32> = None;
        let bump = |s: u32, m: &mut Option<u32>| *m = Some(m.map_or(s, |x| x.max(s)));
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('%').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let body = body.strip_suffix('.').ok_or_else(|| WordGraphError::Parse {
                line,
                msg: "record must end with `.`".into(),
            })?;
            let fields: Vec<&str> = body.split_whitespace().collect();
            let err = |msg: String| WordGraphError::Parse { line, msg };
            let state = |s: &str| s.parse::<u32>().map_err(|_| err(format!("bad state `{s}`")));
            match fields.as_slice() {
                ["state", n] => bump(state(n)?, &mut max_state),
                ["start", s] => {
                    let s = state(s)?;
                    bump(s, &mut max_state);
                    start = Some(s);
                }
                ["final", s] => {
                    let s = state(s)?;
                    bump(s, &mut max_state);
                    finals.push(s);
                }
                ["trans", from, word, to, score] => {
                    let (from, to) = (state(from)?, state(to)?);
                    let score = score.parse::<f64>().map_err(|_| err(format!("bad score `{score}`")))?;
                    bump(from, &mut max_state);
                    bump(to, &mut max_state);
                    transitions.push(Transition { from, word: Sym::from(*word), to, score });
                }
                _ => return Err(err(format!("unrecognised record `{body}`"))),
            }
        }
        if finals.is_empty() {
            return Err(WordGraphError::Parse { line: 0, msg: "no final state declared".into() });
        }
        let num_states = max_state.map_or(1, |m| m + 1);
        WordGraph::new(num_states, transitions, start.unwrap_or(0), finals)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "state {}.", self.num_states - 1);
        let _ = writeln!(s, "start {}.", self.start);
        for f in &self.finals {
            let _ = writeln!(s, "final {f}.");
        }
        for t in &self.transitions {
            let _ = writeln!(s, "trans {} {} {} {:?}.", t.from, t.word, t.to, t.score);
        }
        s
    }
}

/// Reachability in a word-graph with positive and negative caching; one
/// per parse instance.
#[derive(Debug, Default, Clone)]
pub struct Connection {
    cache: BTreeMap<(StateId, StateId), bool>,
    lookups: u64,
}

impl Connection {
    pub fn new() -> Connection {
        Connection::default()
    }

    /// Reflexive-transitive closure of the transition relation. Unknown
    /// positions are connected to everything.
    pub fn connected(&mut self, wg: &WordGraph, a: Pos, b: Pos) -> bool {
        let (Pos::Known(a), Pos::Known(b)) = (a, b) else {
            return true;
        };
        self.states(wg, a, b)
    }

    fn states(&mut self, wg: &WordGraph, a: StateId, b: StateId) -> bool {
        if a == b {
            return true;
        }
        if b < a {
            return false;
        }
        if let Some(&known) = self.cache.get(&(a, b)) {
            return known;
        }
        self.lookups += 1;
        let nexts: Vec<StateId> = wg.outgoing(a).map(|(_, t)| t.to).collect();
        let ok = nexts.into_iter().any(|x| self.states(wg, x, b));
        self.cache.insert((a, b), ok);
        ok
    }

    /// Number of cache misses so far.
    pub fn computed(&self) -> u64 {
        self.lookups
    }
}

/// Unmemoized depth-first reachability.
pub fn reachable(wg: &WordGraph, a: StateId, b: StateId) -> bool {
    let mut stack = vec![a];
    let mut seen = vec![false; wg.num_states() as usize];
    while let Some(s) = stack.pop() {
        if s == b {
            return true;
        }
        if core::mem::replace(&mut seen[s as usize], true) {
            continue;
        }
        stack.extend(wg.outgoing(s).map(|(_, t)| t.to));
    }
    false
}


#[cfg(test)]
mod props {
    extern crate std;
    use super::*;
    use proptest::prelude::*;

    fn arb_graph() -> impl Strategy<Value = WordGraph> {
        (2u32..=50).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..(2 * n as usize)).prop_map(move |pairs| {
                let trans = pairs
                    .into_iter()
                    .filter(|(a, b)| a != b)
                    .map(|(a, b)| Transition { from: a.min(b), word: Sym::from("w"), to: a.max(b), score: 0.0 })
                    .collect();
                WordGraph::new(n, trans, 0, vec![n - 1]).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn connection_matches_dfs(g in arb_graph()) {
            let mut c = Connection::new();
            for a in 0..g.num_states() {
                for b in 0..g.num_states() {
                    let memo = c.connected(&g, Pos::Known(a), Pos::Known(b));
                    prop_assert_eq!(memo, reachable(&g, a, b));
                    prop_assert_eq!(memo, Connection::new().connected(&g, Pos::Known(a), Pos::Known(b)));
                    if memo {
                        prop_assert!(a <= b);
                    }
                }
            }
        }
    }
}
