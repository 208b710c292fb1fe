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

//! Command-line interface.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser as ClapParser, Subcommand, ValueEnum};
use headcorner_core::engine::solution_set;
use headcorner_core::linking::LinkTable;
use headcorner_core::robust::{EditWeights, PathStep};
use headcorner_core::{
    all_projections, best_path, oracle_parse_top, word_accuracy, CompiledGrammar, Frozen, GapMode, OracleConfig, ParseConfig,
    Parser, ScoreWeights, Strategy, WordGraph,
};

use crate::batch::run_batch;
use crate::io::{load_corpus, load_grammar, load_word_graph, tokens};
use crate::output::tree_json;
use crate::Error;

#[derive(Debug, ClapParser)]
#[command(name = "headcorner", version, about = "Head-corner parsing of sentences and word-graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Whitespace-separated sentence.
    #[arg(long, conflicts_with = "graph")]
    pub sentence: Option<String>,
    /// Word-graph file.
    #[arg(long)]
    pub graph: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Heads as marked in the grammar.
    Hc,
    /// Leftmost daughters as heads.
    Lc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GapModeArg {
    General,
    TopDown,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value = "hc")]
    pub mode: Mode,
    /// Override the grammar's gap mode.
    #[arg(long, value_enum)]
    pub gap_mode: Option<GapModeArg>,
    #[arg(long)]
    pub no_memo: bool,
    #[arg(long)]
    pub no_weaken: bool,
    #[arg(long)]
    pub no_occur_check: bool,
    #[arg(long, default_value_t = headcorner_core::engine::DEFAULT_DEPTH_BOUND)]
    pub depth_bound: usize,
    /// Abort after this many search steps.
    #[arg(long)]
    pub step_budget: Option<u64>,
}

impl EngineArgs {
    fn compile(&self, grammar: &str) -> Result<CompiledGrammar, Error> {
        let g = load_grammar(grammar)?;
        let strategy = match self.mode {
            Mode::Hc => Strategy::HeadCorner,
            Mode::Lc => Strategy::LeftCorner,
        };
        let gap_mode = self.gap_mode.map(|m| match m {
            GapModeArg::General => GapMode::General,
            GapModeArg::TopDown => GapMode::TopDown,
        });
        Ok(CompiledGrammar::with_options(&g, strategy, gap_mode)?)
    }

    fn config(&self) -> ParseConfig {
        ParseConfig {
            memo: !self.no_memo,
            weaken: !self.no_weaken,
            occur_check: !self.no_occur_check,
            depth_bound: self.depth_bound,
            step_budget: self.step_budget,
            ..ParseConfig::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Sexp,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableArg {
    All,
    Full,
    Lex,
    Gap,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a sentence or word-graph.
    Parse {
        /// Grammar file or bundled grammar name.
        grammar: String,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        engine: EngineArgs,
        /// Print derivation trees.
        #[arg(long, group = "what")]
        trees: bool,
        /// Print the number of derivation trees.
        #[arg(long, group = "what")]
        count: bool,
        /// Print the distinct semantics of the top category.
        #[arg(long, group = "what")]
        sem: bool,
        /// Print the packed forest as tree-substitution rules.
        #[arg(long, group = "what")]
        tsg: bool,
        #[arg(long, value_enum, default_value = "sexp")]
        format: Format,
        /// Print engine counters after the output.
        #[arg(long)]
        stats: bool,
    },
    /// Best path over maximal projections and skipped words.
    Robust {
        grammar: String,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        engine: EngineArgs,
        /// Path weights, e.g. `skip=1,proj=0.5,acoustic=0`.
        #[arg(long, default_value = "skip=1,proj=0.5,acoustic=0")]
        weights: String,
    },
    /// Parse a corpus and write per-entry counters as CSV.
    Bench {
        grammar: String,
        /// Sentence file (one per line) or directory of word-graph files.
        corpus: PathBuf,
        /// Write the CSV here and print the time-limit table instead.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
        /// Step limits for the time-limit table.
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000,100000")]
        limits: Vec<u64>,
    },
    /// Print the linking tables.
    DumpLinks {
        grammar: String,
        #[arg(long, value_enum, default_value = "all")]
        table: TableArg,
    },
    /// Enumerate trees with the brute-force reference parser.
    Oracle {
        grammar: String,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 20)]
        max_depth: usize,
        #[arg(long)]
        count: bool,
    },
    /// Insertion/deletion distance and word accuracy. Arguments are
    /// sentences, or two files compared line by line.
    Accuracy {
        hypothesis: String,
        reference: String,
        #[arg(long, default_value_t = 1.0)]
        insertion: f64,
        #[arg(long, default_value_t = 1.0)]
        deletion: f64,
    },
}

fn input_graph(input: &InputArgs) -> Result<WordGraph, Error> {
    match (&input.sentence, &input.graph) {
        (Some(s), None) => Ok(WordGraph::from_string(&tokens(s))),
        (None, Some(p)) => load_word_graph(p),
        _ => Err(Error::Usage("give one of --sentence or --graph".into())),
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io { path: PathBuf::from("<stdout>"), source: e }
}

/// Run the CLI on `args` (program name first) and return the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(found) => {
            if found {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Returns whether anything was found.
fn execute(cmd: &Command, out: &mut dyn Write) -> Result<bool, Error> {
    match cmd {
        Command::Parse { grammar, input, engine, trees, count, sem, tsg, format, stats } => {
            let cg = engine.compile(grammar)?;
            let wg = input_graph(input)?;
            let mut p = Parser::new(&cg, &wg, engine.config());
            let answers = p.parse_top()?;
            let found = if *trees || *count || *sem {
                let ts = p.trees(&answers)?;
                if *count {
                    writeln!(out, "{}", ts.len()).map_err(io_err)?;
                } else if *sem {
                    let roots: Vec<_> = answers.iter().map(|a| a.item).collect();
                    for s in p.forest().semantics(&roots, &cg.full.top, &cg.full.sem_spec)? {
                        writeln!(out, "{s}").map_err(io_err)?;
                    }
                } else if *format == Format::Json {
                    let v: Vec<_> = ts.iter().map(tree_json).collect();
                    writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json values serialize")).map_err(io_err)?;
                } else {
                    for t in &ts {
                        writeln!(out, "{t}").map_err(io_err)?;
                    }
                }
                !ts.is_empty()
            } else if *tsg {
                let roots: Vec<_> = answers.iter().map(|a| a.item).collect();
                write!(out, "{}", p.forest().tsg(&roots)).map_err(io_err)?;
                !answers.is_empty()
            } else {
                let forest = p.forest();
                let mut derivable = Vec::new();
                for a in &answers {
                    if forest.count(&[a.item], &cg.full.top)? > 0 {
                        derivable.push(a.clone());
                    }
                }
                let sols = solution_set(&derivable);
                for s in &sols {
                    let a = s.term().args();
                    writeln!(out, "{} {} {}", a[0], a[1], a[2]).map_err(io_err)?;
                }
                !sols.is_empty()
            };
            if *stats {
                let st = p.stats();
                writeln!(
                    out,
                    "% engine_calls={} parse_calls={} steps={} goal_items={} result_items={} history_items={}",
                    st.engine_calls,
                    st.parse_calls,
                    st.steps,
                    p.memo().goals().len(),
                    p.memo().live_count(),
                    p.histories().len()
                )
                .map_err(io_err)?;
            }
            Ok(found)
        }
        Command::Robust { grammar, input, engine, weights } => {
            let cg = engine.compile(grammar)?;
            let wg = input_graph(input)?;
            let w = parse_weights(weights)?;
            let mut p = Parser::new(&cg, &wg, engine.config());
            let projections = all_projections(&mut p)?;
            let path = best_path(&wg, &projections, &w, None)?;
            let toks: Vec<String> = path.tokens(&wg, &projections).iter().map(|t| t.to_string()).collect();
            writeln!(out, "tokens: {}", toks.join(" ")).map_err(io_err)?;
            writeln!(out, "cost: {}", path.cost).map_err(io_err)?;
            for step in &path.steps {
                match *step {
                    PathStep::Proj(i) => {
                        let pr = &projections[i];
                        let sem = cg.full.sem_spec.project(pr.cat.term());
                        writeln!(out, "proj {} {} {}", pr.from, pr.to, Frozen::new(&sem)).map_err(io_err)?;
                    }
                    PathStep::Skip(t) => {
                        let tr = &wg.transitions()[t];
                        writeln!(out, "skip {} {} {}", tr.from, tr.to, tr.word).map_err(io_err)?;
                    }
                }
            }
            Ok(path.projections() > 0)
        }
        Command::Bench { grammar, corpus, csv, engine, limits } => {
            let cg = engine.compile(grammar)?;
            let entries = load_corpus(corpus)?;
            let report = run_batch(&cg, &entries, &engine.config());
            match csv {
                Some(path) => {
                    fs::write(path, report.to_csv()).map_err(|source| Error::Io { path: path.clone(), source })?;
                    writeln!(out, "limit,percent").map_err(io_err)?;
                    for (l, pct) in report.time_limit_table(limits) {
                        writeln!(out, "{l},{pct:.1}").map_err(io_err)?;
                    }
                }
                None => write!(out, "{}", report.to_csv()).map_err(io_err)?,
            }
            Ok(true)
        }
        Command::DumpLinks { grammar, table } => {
            let cg = CompiledGrammar::new(&load_grammar(grammar)?)?;
            let mut dump = |name: &str, t: &LinkTable| -> Result<(), Error> {
                writeln!(out, "% {name} ({} entries)", t.len()).map_err(io_err)?;
                for e in t.entries() {
                    writeln!(out, "{e}").map_err(io_err)?;
                }
                Ok(())
            };
            let l = &cg.links;
            match table {
                TableArg::All => {
                    dump("full", &l.full)?;
                    dump("lex", &l.lex)?;
                    dump("gap", &l.gap)?;
                }
                TableArg::Full => dump("full", &l.full)?,
                TableArg::Lex => dump("lex", &l.lex)?,
                TableArg::Gap => dump("gap", &l.gap)?,
            }
            Ok(true)
        }
        Command::Oracle { grammar, input, max_depth, count } => {
            let g = load_grammar(grammar)?;
            let wg = input_graph(input)?;
            let cfg = OracleConfig { max_depth: *max_depth, ..OracleConfig::default() };
            let trees = oracle_parse_top(&g, &wg, &cfg)?;
            if *count {
                writeln!(out, "{}", trees.len()).map_err(io_err)?;
            } else {
                for t in &trees {
                    writeln!(out, "{t}").map_err(io_err)?;
                }
            }
            Ok(!trees.is_empty())
        }
        Command::Accuracy { hypothesis, reference, insertion, deletion } => {
            let w = EditWeights { insertion: *insertion, deletion: *deletion };
            let (hyp_path, ref_path) = (Path::new(hypothesis), Path::new(reference));
            if hyp_path.is_file() && ref_path.is_file() {
                let read = |p: &Path| fs::read_to_string(p).map_err(|source| Error::Io { path: p.to_path_buf(), source });
                let (h, r) = (read(hyp_path)?, read(ref_path)?);
                let (hl, rl): (Vec<&str>, Vec<&str>) = (h.lines().collect(), r.lines().collect());
                if hl.len() != rl.len() {
                    return Err(Error::Usage(format!("{} lines against {} lines", hl.len(), rl.len())));
                }
                let (mut dist, mut words) = (0.0, 0usize);
                for (i, (a, b)) in hl.iter().zip(&rl).enumerate() {
                    let acc = word_accuracy(&tokens(a), &tokens(b), &w)?;
                    writeln!(out, "{} distance {} accuracy {:.4}", i + 1, acc.distance, acc.accuracy).map_err(io_err)?;
                    dist += acc.distance;
                    words += tokens(b).len();
                }
                let total = if words == 0 { 1.0 } else { (1.0 - dist / words as f64).max(0.0) };
                writeln!(out, "total distance {dist} accuracy {total:.4}").map_err(io_err)?;
            } else {
                let acc = word_accuracy(&tokens(hypothesis), &tokens(reference), &w)?;
                writeln!(out, "distance {} accuracy {:.4}", acc.distance, acc.accuracy).map_err(io_err)?;
            }
            Ok(true)
        }
    }
}

/// Parse `skip=..,proj=..,acoustic=..`; missing keys keep their defaults.
pub fn parse_weights(s: &str) -> Result<ScoreWeights, Error> {
    let mut w = ScoreWeights::default();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| Error::Usage(format!("bad weight `{part}`")))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::Usage(format!("bad weight value `{v}`")))?;
        match k.trim() {
            "skip" => w.w_skip = v,
            "proj" => w.w_proj = v,
            "acoustic" => w.w_acoustic = v,
            other => return Err(Error::Usage(format!("unknown weight `{other}`"))),
        }
    }
    Ok(w)
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights() {
        let w = parse_weights("skip=2, acoustic=0.5").unwrap();
        assert_eq!(w, ScoreWeights { w_skip: 2.0, w_proj: 0.5, w_acoustic: 0.5 });
        assert!(parse_weights("jump=1").is_err());
        assert!(parse_weights("skip").is_err());
    }
}
