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

use alloc::string::String;
use thiserror::Error;

/// A binding would have produced a cyclic term while the occur check was off.
#[derive(Error, Debug, Clone, Copy, PartialEq, Eq)]
#[error("unification would create a cyclic term")]
pub struct CyclicTerm;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("line {line}: rule `{rule}` has no head daughter marked with `*`")]
    NoHeadMarked { line: usize, rule: String },
    #[error("line {line}: rule `{rule}` marks more than one head daughter")]
    MultipleHeadsMarked { line: usize, rule: String },
    #[error("line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("line {line}: unknown declaration `{word}`")]
    UnknownDeclaration { line: usize, word: String },
}

impl From<SyntaxError> for GrammarError {
    fn from(e: SyntaxError) -> Self {
        match e {
            SyntaxError::Parse { line, msg } => GrammarError::ParseError { line, msg },
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum WordGraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("transition {from} -> {to} does not go forward in time")]
    NotForward { from: u32, to: u32 },
    #[error("state {0} is out of range")]
    UnknownState(u32),
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum LinkError {
    #[error("head-corner closure exceeded {0} entries; the weakening policy is too fine")]
    NonTerminatingClosure(usize),
    #[error("rule `{0}` has a variable mother or head category; head-corner tables need functors")]
    VariableCategory(String),
    #[error("gap `{0}` can be a rule head, which needs gap_mode general")]
    GapAsHead(String),
}

#[derive(Error, Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineError {
    #[error("derivation depth bound {0} exceeded (hidden head-recursion?)")]
    DepthBound(usize),
    #[error(transparent)]
    Cyclic(#[from] CyclicTerm),
    #[error("step budget of {0} exhausted")]
    StepBudget(u64),
}

#[derive(Error, Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleError {
    #[error("derivations may exist beyond depth {0}")]
    DepthExhausted(usize),
    #[error(transparent)]
    Cyclic(#[from] CyclicTerm),
}

#[derive(Error, Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccuracyError {
    #[error("reference is empty but the hypothesis is not")]
    EmptyReference,
}

#[derive(Error, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathError {
    #[error("step cost is negative; best-first search needs non-negative costs")]
    NegativeCost,
    #[error("no final state is reachable")]
    Unreachable,
}
