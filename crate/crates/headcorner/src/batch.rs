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

//! Batch runs over a corpus with per-entry counters.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use headcorner_core::engine::solution_set;
use headcorner_core::{CompiledGrammar, EngineError, ParseConfig, Parser, WordGraph};
use rayon::prelude::*;

use crate::io::CorpusEntry;

pub const CSV_HEADER: &str = "id,tokens,transitions,solutions,engine_calls,goal_items,result_items,history_items,steps,timeout";

#[derive(Clone, Debug, PartialEq)]
pub struct EntryReport {
    pub id: String,
    /// Longest start-to-final path, in transitions.
    pub tokens: u32,
    pub transitions: usize,
    /// Top answers after removing subsumed ones.
    pub solutions: usize,
    pub engine_calls: u64,
    pub goal_items: usize,
    pub result_items: usize,
    pub history_items: usize,
    pub steps: u64,
    pub timeout: bool,
    /// Engine error other than the step budget.
    pub error: Option<EngineError>,
    pub wall: Duration,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub entries: Vec<EntryReport>,
}

impl RunReport {
    pub fn timeouts(&self) -> usize {
        self.entries.iter().filter(|e| e.timeout).count()
    }

    /// One row per entry followed by a `total` row of sums.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        let row = |s: &mut String, id: &str, e: &EntryReport, timeouts: usize| {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                id,
                e.tokens,
                e.transitions,
                e.solutions,
                e.engine_calls,
                e.goal_items,
                e.result_items,
                e.history_items,
                e.steps,
                timeouts
            );
        };
        let mut total = EntryReport {
            id: "total".into(),
            tokens: 0,
            transitions: 0,
            solutions: 0,
            engine_calls: 0,
            goal_items: 0,
            result_items: 0,
            history_items: 0,
            steps: 0,
            timeout: false,
            error: None,
            wall: Duration::ZERO,
        };
        for e in &self.entries {
            row(&mut s, &csv_field(&e.id), e, usize::from(e.timeout));
            total.tokens += e.tokens;
            total.transitions += e.transitions;
            total.solutions += e.solutions;
            total.engine_calls += e.engine_calls;
            total.goal_items += e.goal_items;
            total.result_items += e.result_items;
            total.history_items += e.history_items;
            total.steps += e.steps;
        }
        row(&mut s, "total", &total, self.timeouts());
        s
    }

    /// Share of entries, in percent, finished without error within each
    /// step limit.
    pub fn time_limit_table(&self, limits: &[u64]) -> Vec<(u64, f64)> {
        let n = self.entries.len().max(1) as f64;
        limits
            .iter()
            .map(|&l| {
                let ok = self.entries.iter().filter(|e| !e.timeout && e.error.is_none() && e.steps <= l).count();
                (l, 100.0 * ok as f64 / n)
            })
            .collect()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn longest_path(wg: &WordGraph) -> u32 {
    wg.finals().iter().filter_map(|&f| wg.longest_to(f)[wg.start() as usize]).max().unwrap_or(0)
}

/// Parse one word-graph and collect its counters.
pub fn run_entry(cg: &CompiledGrammar, id: &str, wg: &WordGraph, cfg: &ParseConfig) -> EntryReport {
    let started = Instant::now();
    let mut p = Parser::new(cg, wg, cfg.clone());
    let res = p.parse_top();
    let (solutions, timeout, error) = match res {
        Ok(a) => (solution_set(&a).len(), false, None),
        Err(EngineError::StepBudget(_)) => (0, true, None),
        Err(e) => (0, false, Some(e)),
    };
    EntryReport {
        id: id.to_string(),
        tokens: longest_path(wg),
        transitions: wg.transitions().len(),
        solutions,
        engine_calls: p.stats().engine_calls,
        goal_items: p.memo().goals().len(),
        result_items: p.memo().live_count(),
        history_items: p.histories().len(),
        steps: p.stats().steps,
        timeout,
        error,
        wall: started.elapsed(),
    }
}

/// Parse every entry, in parallel; entries keep corpus order.
pub fn run_batch(cg: &CompiledGrammar, corpus: &[CorpusEntry], cfg: &ParseConfig) -> RunReport {
    let entries = corpus.par_iter().map(|e| run_entry(cg, &e.id, &e.graph, cfg)).collect();
    RunReport { entries }
}
