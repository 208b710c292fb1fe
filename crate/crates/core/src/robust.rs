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

//! Robust analysis of word-graphs that have no complete parse.
//!
//! Every maximal projection anywhere in the graph is found with a single
//! goal whose positions and extremes are all unknown. A cheapest path from
//! the start state to a final state is then chosen over projections and
//! skipped transitions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::engine::Parser;
use crate::error::{AccuracyError, EngineError, PathError};
use crate::forest::DerivationTree;
use crate::memo::ItemRef;
use crate::terms::{Frozen, Sym};
use crate::wordgraph::{Pos, WordGraph};

/// A maximal projection: a top-category analysis of some span.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub from: u32,
    pub to: u32,
    /// Category of the cheapest tree, semantics included.
    pub cat: Frozen,
    /// Acoustic cost of the cheapest tree.
    pub score: f64,
    pub item: ItemRef,
    /// Words of the cheapest tree.
    pub tokens: Vec<Sym>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PathStep {
    /// Index into the projection list.
    Proj(usize),
    /// Index into the word-graph's transitions.
    Skip(usize),
}

/// Cost of a word following another on the chosen path.
pub trait BigramScorer {
    fn cost(&self, prev: Option<&str>, next: &str) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreWeights {
    pub w_skip: f64,
    pub w_proj: f64,
    pub w_acoustic: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights { w_skip: 1.0, w_proj: 0.5, w_acoustic: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BestPath {
    pub steps: Vec<PathStep>,
    pub cost: f64,
}

impl BestPath {
    pub fn projections(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, PathStep::Proj(_))).count()
    }

    pub fn skips(&self) -> usize {
        self.steps.len() - self.projections()
    }

    /// Words along the path: skipped words and projection yields in order.
    pub fn tokens(&self, wg: &WordGraph, projections: &[Projection]) -> Vec<Sym> {
        let mut out = Vec::new();
        for s in &self.steps {
            match *s {
                PathStep::Proj(i) => out.extend(projections[i].tokens.iter().cloned()),
                PathStep::Skip(t) => out.push(wg.transitions()[t].word.clone()),
            }
        }
        out
    }
}

/// Every projection of the grammar's top category with a non-empty span
/// that survives the semantic constraints, one per live result item.
pub fn all_projections(p: &mut Parser<'_>) -> Result<Vec<Projection>, EngineError> {
    let top = p.grammar().syntactic.top.clone();
    let answers = p.parse_goal(&top, Pos::Unknown, Pos::Unknown, Pos::Unknown, Pos::Unknown)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for a in answers {
        let (Pos::Known(from), Pos::Known(to)) = a.span() else { continue };
        if from == to || !seen.insert(p.memo().live(a.item)) {
            continue;
        }
        let trees = p.trees(core::slice::from_ref(&a))?;
        let Some(best) = trees.iter().min_by(|x, y| x.score.total_cmp(&y.score).then_with(|| x.key().cmp(&y.key()))) else {
            continue;
        };
        out.push(Projection {
            from,
            to,
            cat: Frozen::new(&best.category),
            score: best.score,
            item: p.memo().live(a.item),
            tokens: tree_tokens(p, best),
        });
    }
    out.sort_by_key(|x| (x.from, x.to, x.item));
    Ok(out)
}

fn tree_tokens(p: &Parser<'_>, t: &DerivationTree) -> Vec<Sym> {
    let lexicon = &p.grammar().full.lexicon;
    t.edges().into_iter().flat_map(|e| lexicon[p.full_edges()[e].entry].words.iter().cloned()).collect()
}

#[derive(Clone)]
struct Best {
    cost: f64,
    steps: Vec<PathStep>,
    spans: Vec<(u32, u32)>,
}

impl Best {
    fn better_than(&self, other: &Best) -> bool {
        match self.cost.total_cmp(&other.cost) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => (self.steps.len(), &self.spans) < (other.steps.len(), &other.spans),
        }
    }
}

/// Step, target state, cost and tokens of one arc in the path search.
type PathArc = (PathStep, u32, f64, Vec<Sym>);

/// Cheapest start-to-final path over projections and skipped transitions.
/// Ties go to fewer steps, then to the lexicographically smaller sequence
/// of spans.
pub fn best_path(
    wg: &WordGraph,
    projections: &[Projection],
    weights: &ScoreWeights,
    bigram: Option<&dyn BigramScorer>,
) -> Result<BestPath, PathError> {
    if weights.w_skip < 0.0 || weights.w_proj < 0.0 || weights.w_acoustic < 0.0 {
        return Err(PathError::NegativeCost);
    }
    let n = wg.num_states() as usize;
    let mut outgoing: Vec<Vec<PathArc>> = vec![Vec::new(); n];
    for (i, t) in wg.transitions().iter().enumerate() {
        let c = weights.w_skip + weights.w_acoustic * t.score;
        outgoing[t.from as usize].push((PathStep::Skip(i), t.to, c, vec![t.word.clone()]));
    }
    for (i, pr) in projections.iter().enumerate() {
        let c = weights.w_proj + weights.w_acoustic * pr.score;
        outgoing[pr.from as usize].push((PathStep::Proj(i), pr.to, c, pr.tokens.clone()));
    }
    // one table per state, keyed by the last word when a bigram scorer is in use
    let mut table: Vec<BTreeMap<Option<Sym>, Best>> = vec![BTreeMap::new(); n];
    table[wg.start() as usize].insert(None, Best { cost: 0.0, steps: Vec::new(), spans: Vec::new() });
    for s in 0..n {
        let here: Vec<(Option<Sym>, Best)> = table[s].iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        for (last, best) in here {
            for (step, to, c, tokens) in &outgoing[s] {
                let mut cost = best.cost + c;
                let mut key = None;
                if let Some(bg) = bigram {
                    let mut prev = last.clone();
                    for w in tokens {
                        let bc = bg.cost(prev.as_deref(), w);
                        if bc < 0.0 {
                            return Err(PathError::NegativeCost);
                        }
                        cost += bc;
                        prev = Some(w.clone());
                    }
                    key = prev;
                }
                let mut steps = best.steps.clone();
                steps.push(*step);
                let mut spans = best.spans.clone();
                spans.push((s as u32, *to));
                let cand = Best { cost, steps, spans };
                let slot = table[*to as usize].entry(key);
                match slot {
                    alloc::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(cand);
                    }
                    alloc::collections::btree_map::Entry::Occupied(mut o) => {
                        if cand.better_than(o.get()) {
                            o.insert(cand);
                        }
                    }
                }
            }
        }
    }
    let mut winner: Option<Best> = None;
    for &f in wg.finals() {
        for b in table[f as usize].values() {
            if winner.as_ref().is_none_or(|w| b.better_than(w)) {
                winner = Some(b.clone());
            }
        }
    }
    winner.map(|b| BestPath { steps: b.steps, cost: b.cost }).ok_or(PathError::Unreachable)
}

/// Costs of the two edit operations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EditWeights {
    /// A reference word missing from the hypothesis.
    pub insertion: f64,
    /// A hypothesis word absent from the reference.
    pub deletion: f64,
}

impl Default for EditWeights {
    fn default() -> Self {
        EditWeights { insertion: 1.0, deletion: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Accuracy {
    pub distance: f64,
    pub accuracy: f64,
}

/// Length of a longest common subsequence.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// Fewest insertions and deletions turning `hyp` into `reference`.
pub fn edit_distance<T: PartialEq>(hyp: &[T], reference: &[T]) -> usize {
    hyp.len() + reference.len() - 2 * lcs_len(hyp, reference)
}

/// Insertion/deletion distance and word accuracy, floored at zero.
pub fn word_accuracy<T: PartialEq>(hyp: &[T], reference: &[T], w: &EditWeights) -> Result<Accuracy, AccuracyError> {
    if reference.is_empty() {
        return if hyp.is_empty() { Ok(Accuracy { distance: 0.0, accuracy: 1.0 }) } else { Err(AccuracyError::EmptyReference) };
    }
    let l = lcs_len(hyp, reference);
    let distance = w.deletion * (hyp.len() - l) as f64 + w.insertion * (reference.len() - l) as f64;
    let accuracy = (1.0 - distance / reference.len() as f64).max(0.0);
    Ok(Accuracy { distance, accuracy })
}
