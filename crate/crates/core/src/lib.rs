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

//! Head-corner parsing for unification grammars over strings and weighted
//! word-graphs, with selective memoization, goal weakening, packed forests
//! and a robustness layer.

#![no_std]

extern crate alloc;

pub mod bundled;
pub mod engine;
pub mod error;
pub mod forest;
pub mod grammar;
pub mod linking;
pub mod memo;
pub mod oracle;
pub mod robust;
pub mod syntax;
pub mod terms;
pub mod wordgraph;

pub use engine::{Answer, CompiledGrammar, ParseConfig, Parser, PosCheck, Stats, Strategy};
pub use error::*;
pub use forest::{DerivationTree, Forest, Label};
pub use grammar::{GapMode, Grammar, HeadedRule, LexEdge, WeakeningPolicy};
pub use oracle::{oracle_parse, oracle_parse_top, OracleConfig};
pub use robust::{all_projections, best_path, word_accuracy, BestPath, PathStep, Projection, ScoreWeights};
pub use syntax::parse_term;
pub use terms::{anti_unify, Bindings, Frozen, Restrictor, Term};
pub use wordgraph::{Pos, WordGraph};
