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

use std::fs;

use headcorner::cli::run;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("headcorner").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn billot_count() {
    let (code, out, _) = call(&["parse", "billot", "--sentence", "I see a man at home", "--count"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "2");
}

#[test]
fn no_parse_exits_one() {
    let (code, out, _) = call(&["parse", "billot", "--sentence", "", "--count"]);
    assert_eq!(code, 1);
    assert_eq!(out.trim(), "0");
    let (code, _, _) = call(&["parse", "agreement", "--sentence", "he eats the dog"]);
    assert_eq!(code, 1);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(call(&["parse", "billot"]).0, 2);
    assert_eq!(call(&["frobnicate"]).0, 2);
    assert_eq!(call(&["parse", "no/such/grammar.gram", "--sentence", "a"]).0, 2);
    assert_eq!(call(&["robust", "robust", "--sentence", "i", "--weights", "skip=-1"]).0, 2);
}

#[test]
fn engine_errors_exit_three() {
    let (code, _, err) = call(&["parse", "ppchain", "--sentence", "n sees the cat in the hat in the hat", "--step-budget", "5"]);
    assert_eq!(code, 3);
    assert!(!err.is_empty());
}

#[test]
fn bad_grammar_file_reports_path() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("bad.gram");
    fs::write(&g, "rule r: s --> .\n").unwrap();
    let (code, _, err) = call(&["parse", g.to_str().unwrap(), "--sentence", "a"]);
    assert_eq!(code, 2);
    assert!(err.contains("bad.gram"));
}

#[test]
fn graph_input() {
    let dir = tempfile::tempdir().unwrap();
    let wg = dir.path().join("g.wg");
    fs::write(
        &wg,
        "% two readings of the first word\nstate 4.\nstart 0.\nfinal 3.\ntrans 0 time 1 0.5.\ntrans 0 time 1 0.7.\ntrans 1 flies 2 0.\ntrans 2 fast 3 0.\n",
    )
    .unwrap();
    let (code, out, err) = call(&["parse", "toy", "--graph", wg.to_str().unwrap(), "--trees"]);
    assert!(code == 0 || code == 1, "{err}");
    assert_eq!(code == 0, !out.trim().is_empty());
}

#[test]
fn json_trees_are_valid() {
    let (code, out, _) = call(&["parse", "billot", "--sentence", "I see a man at home", "--trees", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let trees = v.as_array().unwrap();
    assert_eq!(trees.len(), 2);
    for t in trees {
        assert!(t.get("rule").is_some());
        assert!(t.get("children").is_some());
    }
}

#[test]
fn tsg_and_links() {
    let (code, out, _) = call(&["parse", "billot", "--sentence", "I see a man at home", "--tsg"]);
    assert_eq!(code, 0);
    assert!(out.lines().count() >= 7);
    let (code, out, _) = call(&["dump-links", "billot"]);
    assert_eq!(code, 0);
    assert!(!out.trim().is_empty());
}

#[test]
fn oracle_agrees_with_parse() {
    let (_, a, _) = call(&["oracle", "billot", "--sentence", "I see a man at home", "--count"]);
    assert_eq!(a.trim(), "2");
}

#[test]
fn robust_output() {
    let (code, out, _) = call(&["robust", "robust", "--sentence", "uh i want to go to amsterdam tomorrow uh"]);
    assert_eq!(code, 0);
    assert!(out.contains("amsterdam"));
}

#[test]
fn accuracy_sentences_and_files() {
    let (code, out, _) = call(&["accuracy", "a b c", "a c d"]);
    assert_eq!(code, 0);
    assert!(out.contains('2'), "{out}");
    let dir = tempfile::tempdir().unwrap();
    let (h, r) = (dir.path().join("h"), dir.path().join("r"));
    fs::write(&h, "a b\nx y\n").unwrap();
    fs::write(&r, "a b\nx\n").unwrap();
    let (code, out, _) = call(&["accuracy", h.to_str().unwrap(), r.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(!out.is_empty());
}

#[test]
fn bench_hundred_sentences() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    let base = ["I see a man", "I see a man at home", "a man at home", "I see", "see a man"];
    let lines: Vec<&str> = (0..100).map(|i| base[i % base.len()]).collect();
    fs::write(&corpus, lines.join("\n")).unwrap();
    let csv = dir.path().join("out.csv");
    let (code, table, err) = call(&["bench", "billot", corpus.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(!table.is_empty());
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 102);
    let (_, again, _) = call(&["bench", "billot", corpus.to_str().unwrap()]);
    let strip = |s: &str| s.lines().map(|l| l.rsplit_once(',').map_or(l, |x| x.0).to_string()).collect::<Vec<_>>();
    assert_eq!(strip(&again), strip(&text));
}

#[test]
fn output_is_deterministic() {
    let args = ["parse", "v2", "--sentence", "the man sees the dog", "--trees"];
    let first = call(&args);
    for _ in 0..3 {
        assert_eq!(call(&args), first);
    }
}
