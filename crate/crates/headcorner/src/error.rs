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

use std::path::PathBuf;

use headcorner_core::{AccuracyError, EngineError, GrammarError, LinkError, OracleError, PathError, WordGraphError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Grammar { path: PathBuf, source: GrammarError },
    #[error("{}: {source}", path.display())]
    WordGraph { path: PathBuf, source: WordGraphError },
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Accuracy(#[from] AccuracyError),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Engine(_) | Error::Oracle(_) => 3,
            _ => 2,
        }
    }
}
