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

//! Loading grammars, word-graphs and corpora.

use std::fs;
use std::path::{Path, PathBuf};

use headcorner_core::{bundled, Grammar, WordGraph};

use crate::Error;

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Load a grammar from a file, or a bundled grammar by name when no such
/// file exists.
pub fn load_grammar(spec: &str) -> Result<Grammar, Error> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Some(src) = bundled::source(spec) {
            return Grammar::parse(src).map_err(|source| Error::Grammar { path: path.to_path_buf(), source });
        }
    }
    let src = read(path)?;
    Grammar::parse(&src).map_err(|source| Error::Grammar { path: path.to_path_buf(), source })
}

pub fn load_word_graph(path: &Path) -> Result<WordGraph, Error> {
    let src = read(path)?;
    WordGraph::parse(&src).map_err(|source| Error::WordGraph { path: path.to_path_buf(), source })
}

/// Split a sentence into tokens on whitespace.
pub fn tokens(sentence: &str) -> Vec<&str> {
    sentence.split_whitespace().collect()
}

/// One corpus input.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub id: String,
    pub graph: WordGraph,
}

/// A corpus is either a text file with one sentence per line (blank lines
/// and lines starting with `%` are skipped) or a directory of word-graph
/// files read in name order.
pub fn load_corpus(path: &Path) -> Result<Vec<CorpusEntry>, Error> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|source| Error::Io { path: path.to_path_buf(), source })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        return files
            .into_iter()
            .map(|f| {
                let id = f.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
                Ok(CorpusEntry { id, graph: load_word_graph(&f)? })
            })
            .collect();
    }
    let text = read(path)?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('%'))
        .enumerate()
        .map(|(i, l)| CorpusEntry { id: (i + 1).to_string(), graph: WordGraph::from_string(&tokens(l)) })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fallback_and_missing_file() {
        assert_eq!(load_grammar("billot").unwrap().rules.len(), 7);
        assert!(matches!(load_grammar("/no/such/grammar.gram"), Err(Error::Io { .. })));
    }

    #[test]
    fn corpus_from_lines_and_directory() {
        let dir = tempfile::tempdir().unwrap();
        let lines = dir.path().join("c.txt");
        fs::write(&lines, "% header\nI see a man\n\na man\n").unwrap();
        let c = load_corpus(&lines).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!((c[1].id.as_str(), c[1].graph.transitions().len()), ("2", 2));

        let graphs = dir.path().join("graphs");
        fs::create_dir(&graphs).unwrap();
        fs::write(graphs.join("b.wg"), WordGraph::from_string(&["a"]).to_text()).unwrap();
        fs::write(graphs.join("a.wg"), WordGraph::from_string(&["a", "b"]).to_text()).unwrap();
        let c = load_corpus(&graphs).unwrap();
        let ids: Vec<&str> = c.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
        assert_eq!(c[0].graph.transitions().len(), 2);

        fs::write(graphs.join("c.wg"), "state 2.\nnonsense.\n").unwrap();
        assert!(matches!(load_corpus(&graphs), Err(Error::WordGraph { .. })));
    }
}
