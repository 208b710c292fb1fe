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

//! Grammars with marked heads, their text format, and lexical lookup.
//!
//! ```text
//! top s.
//! rule s_np_vp: s --> np, *vp.
//! lex time: [time] = noun.
//! gap vgap: v(V, gap(V)).
//! semantic vp/2 args 2.
//! weaken np/3 functor_only.
//! gap_mode general.
//! ```

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::error::GrammarError;
use crate::syntax::{tokenize, Tok, TokenStream, VarScope};
use crate::terms::{atom_text, Frozen, FunctorKey, Restrictor, Sym, Term};
use crate::wordgraph::{StateId, WordGraph};

/// A rule with its head daughter singled out. All fields share the
/// clause-local variables `0..nvars`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeadedRule {
    pub name: Sym,
    pub nvars: u32,
    pub mother: Term,
    pub head: Term,
    /// Daughters left of the head, nearest first.
    pub rev_left_ds: Vec<Term>,
    pub right_ds: Vec<Term>,
}

impl HeadedRule {
    /// Daughters in surface order.
    pub fn daughters(&self) -> Vec<Term> {
        let mut ds: Vec<Term> = self.rev_left_ds.iter().rev().cloned().collect();
        ds.push(self.head.clone());
        ds.extend(self.right_ds.iter().cloned());
        ds
    }

    pub fn head_index(&self) -> usize {
        self.rev_left_ds.len()
    }

    pub fn arity(&self) -> usize {
        self.rev_left_ds.len() + 1 + self.right_ds.len()
    }

    fn from_daughters(name: Sym, nvars: u32, mother: Term, mut ds: Vec<Term>, head: usize) -> HeadedRule {
        let right_ds = ds.split_off(head + 1);
        let head_t = ds.pop().expect("head index in range");
        ds.reverse();
        HeadedRule { name, nvars, mother, head: head_t, rev_left_ds: ds, right_ds }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LexEntry {
    pub name: Sym,
    pub words: Vec<Sym>,
    pub cat: Term,
    pub nvars: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapRule {
    pub name: Sym,
    pub cat: Term,
    pub nvars: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GapMode {
    /// Gaps are predicted bottom-up like lexical heads.
    #[default]
    General,
    /// Gaps only satisfy goals directly, with an empty span.
    TopDown,
}

impl fmt::Display for GapMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GapMode::General => "general",
            GapMode::TopDown => "top_down",
        })
    }
}

/// Per-functor restrictors used for goal weakening and linking tables.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct WeakeningPolicy {
    pub default: Restrictor,
    pub per_functor: BTreeMap<FunctorKey, Restrictor>,
}

impl WeakeningPolicy {
    pub fn identity() -> WeakeningPolicy {
        WeakeningPolicy::default()
    }

    pub fn uniform(r: Restrictor) -> WeakeningPolicy {
        WeakeningPolicy { default: r, per_functor: BTreeMap::new() }
    }

    pub fn for_term(&self, t: &Term) -> &Restrictor {
        t.functor_key()
            .and_then(|k| self.per_functor.get(&k))
            .unwrap_or(&self.default)
    }

    pub fn is_identity(&self) -> bool {
        self.default.is_identity() && self.per_functor.values().all(Restrictor::is_identity)
    }

    /// True if every restrictor in the policy cuts at depth 1.
    pub fn is_functor_only(&self) -> bool {
        let fo = |r: &Restrictor| r.depth == Some(1);
        fo(&self.default) && self.per_functor.values().all(fo)
    }
}

/// Semantic argument positions (0-based) per functor.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SemSpec(pub BTreeMap<FunctorKey, Vec<usize>>);

impl SemSpec {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Replace every semantic argument, at any depth, by a fresh variable.
    pub fn strip(&self, t: &Term, fresh: &mut dyn FnMut() -> Term) -> Term {
        match t {
            Term::App(f, args) if !args.is_empty() => {
                let sem = self.0.get(&(f.clone(), args.len()));
                let new: Vec<Term> = args
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        if sem.is_some_and(|s| s.contains(&i)) {
                            fresh()
                        } else {
                            self.strip(a, fresh)
                        }
                    })
                    .collect();
                Term::app_sym(f.clone(), new)
            }
            _ => t.clone(),
        }
    }

    /// The semantic arguments of `t` as a tuple, or `t` itself when its
    /// functor has none declared.
    pub fn project(&self, t: &Term) -> Term {
        match t.functor_key().and_then(|k| self.0.get(&k)) {
            Some(idx) => Term::app("sem", idx.iter().map(|&i| t.args()[i].clone()).collect()),
            None => t.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grammar {
    pub rules: Vec<HeadedRule>,
    pub lexicon: Vec<LexEntry>,
    pub gaps: Vec<GapRule>,
    pub top: Frozen,
    pub weakening: WeakeningPolicy,
    pub sem_spec: SemSpec,
    pub gap_mode: GapMode,
}

/// A lexical entry matched against a word-graph path.
#[derive(Clone, Debug, PartialEq)]
pub struct LexEdge {
    pub from: StateId,
    pub to: StateId,
    /// The entry's category, with variables `0..cat.nvars()`.
    pub cat: Frozen,
    /// Sum of the transition scores along the matched path.
    pub score: f64,
    /// Index into [`Grammar::lexicon`].
    pub entry: usize,
}

struct Loader<'a> {
    ts: TokenStream<'a>,
}

impl Loader<'_> {
    fn line(&self) -> usize {
        self.ts.line()
    }

    fn err(&self, msg: impl Into<String>) -> GrammarError {
        GrammarError::ParseError { line: self.line(), msg: msg.into() }
    }

    fn end(&mut self) -> Result<(), GrammarError> {
        Ok(self.ts.expect(".")?)
    }

    fn word(&mut self) -> Result<String, GrammarError> {
        match self.ts.next() {
            Some(Tok::Atom(a)) | Some(Tok::Var(a)) => Ok(a.clone()),
            Some(Tok::Int(i)) => Ok(i.to_string()),
            Some(t) => {
                let msg = format!("expected a name, found {}", t.describe());
                Err(self.err(msg))
            }
            None => Err(self.err("expected a name, found end of input")),
        }
    }

    fn keyword(&mut self) -> Result<String, GrammarError> {
        match self.ts.next() {
            Some(Tok::Atom(a)) => Ok(a.clone()),
            Some(t) => {
                let msg = format!("expected a keyword, found {}", t.describe());
                Err(self.err(msg))
            }
            None => Err(self.err("expected a keyword, found end of input")),
        }
    }

    fn int(&mut self) -> Result<i64, GrammarError> {
        match self.ts.next() {
            Some(Tok::Int(i)) => Ok(*i),
            _ => Err(self.err("expected an integer")),
        }
    }

    fn functor(&mut self) -> Result<FunctorKey, GrammarError> {
        let name = self.keyword()?;
        self.ts.expect("/")?;
        let n = self.int()?;
        if n < 0 {
            return Err(self.err("negative arity"));
        }
        Ok((Sym::from(name.as_str()), n as usize))
    }

    fn restrictor(&mut self) -> Result<Restrictor, GrammarError> {
        let mut r = Restrictor::identity();
        let mut any = false;
        while !self.ts.is_punct(".") {
            match self.keyword()?.as_str() {
                "depth" => {
                    let d = self.int()?;
                    if d < 1 {
                        return Err(self.err("weakening depth must be at least 1"));
                    }
                    r.depth = Some(d as u32);
                }
                "functor_only" => r.depth = Some(1),
                "no_sharing" => r.unshare = true,
                "identity" => r = Restrictor::identity(),
                other => return Err(self.err(format!("unknown weakening option `{other}`"))),
            }
            any = true;
        }
        if !any {
            return Err(self.err("missing weakening option"));
        }
        Ok(r)
    }
}

impl Grammar {
    pub fn parse(src: &str) -> Result<Grammar, GrammarError> {
        let toks = tokenize(src)?;
        let mut ld = Loader { ts: TokenStream::new(&toks) };
        let mut rules = Vec::new();
        let mut lexicon = Vec::new();
        let mut gaps = Vec::new();
        let mut top = None;
        let mut weakening = WeakeningPolicy::default();
        let mut sem = BTreeMap::new();
        let mut gap_mode = GapMode::General;
        while !ld.ts.at_end() {
            let line = ld.line();
            let word = match ld.ts.next() {
                Some(Tok::Atom(a)) => a.clone(),
                Some(t) => {
                    return Err(GrammarError::ParseError { line, msg: format!("expected a declaration, found {}", t.describe()) })
                }
                None => unreachable!(),
            };
            let mut scope = VarScope::default();
            match word.as_str() {
                "top" => {
                    let t = ld.ts.term(&mut scope)?;
                    ld.end()?;
                    top = Some(Frozen::new(&t));
                }
                "rule" => {
                    let name = ld.word()?;
                    ld.ts.expect(":")?;
                    let mother = ld.ts.term(&mut scope)?;
                    ld.ts.expect("-->")?;
                    let mut ds = Vec::new();
                    let mut heads = Vec::new();
                    loop {
                        if ld.ts.is_punct("*") {
                            ld.ts.next();
                            heads.push(ds.len());
                        }
                        ds.push(ld.ts.term(&mut scope)?);
                        if ld.ts.is_punct(",") {
                            ld.ts.next();
                        } else {
                            break;
                        }
                    }
                    ld.end()?;
                    let head = match heads.as_slice() {
                        [h] => *h,
                        [] => return Err(GrammarError::NoHeadMarked { line, rule: name }),
                        _ => return Err(GrammarError::MultipleHeadsMarked { line, rule: name }),
                    };
                    rules.push(HeadedRule::from_daughters(Sym::from(name.as_str()), scope.count(), mother, ds, head));
                }
                "lex" => {
                    let name = ld.word()?;
                    ld.ts.expect(":")?;
                    ld.ts.expect("[")?;
                    let mut words = Vec::new();
                    loop {
                        words.push(Sym::from(ld.word()?.as_str()));
                        if ld.ts.is_punct(",") {
                            ld.ts.next();
                        } else {
                            break;
                        }
                    }
                    ld.ts.expect("]")?;
                    ld.ts.expect("=")?;
                    let cat = ld.ts.term(&mut scope)?;
                    ld.end()?;
                    lexicon.push(LexEntry { name: Sym::from(name.as_str()), words, cat, nvars: scope.count() });
                }
                "gap" => {
                    let name = ld.word()?;
                    ld.ts.expect(":")?;
                    let cat = ld.ts.term(&mut scope)?;
                    ld.end()?;
                    gaps.push(GapRule { name: Sym::from(name.as_str()), cat, nvars: scope.count() });
                }
                "semantic" => {
                    let key = ld.functor()?;
                    if ld.keyword()? != "args" {
                        return Err(ld.err("expected `args`"));
                    }
                    let mut idx = Vec::new();
                    loop {
                        let i = ld.int()?;
                        if i < 1 || i as usize > key.1 {
                            return Err(ld.err(format!("argument {i} out of range for {}/{}", key.0, key.1)));
                        }
                        idx.push(i as usize - 1);
                        if ld.ts.is_punct(",") {
                            ld.ts.next();
                        } else {
                            break;
                        }
                    }
                    ld.end()?;
                    idx.sort_unstable();
                    idx.dedup();
                    sem.insert(key, idx);
                }
                "weaken" => {
                    if matches!(ld.ts.peek(), Some(Tok::Atom(a)) if a == "all") {
                        ld.ts.next();
                        weakening.default = ld.restrictor()?;
                    } else {
                        let key = ld.functor()?;
                        let r = ld.restrictor()?;
                        weakening.per_functor.insert(key, r);
                    }
                    ld.end()?;
                }
                "gap_mode" => {
                    gap_mode = match ld.keyword()?.as_str() {
                        "general" => GapMode::General,
                        "top_down" => GapMode::TopDown,
                        other => return Err(ld.err(format!("unknown gap mode `{other}`"))),
                    };
                    ld.end()?;
                }
                _ => return Err(GrammarError::UnknownDeclaration { line, word }),
            }
        }
        let top = top.ok_or(GrammarError::ParseError { line: 0, msg: "no `top` declaration".into() })?;
        Ok(Grammar { rules, lexicon, gaps, top, weakening, sem_spec: SemSpec(sem), gap_mode })
    }

    /// The grammar with every semantic argument replaced by a fresh
    /// variable: the first-phase grammar.
    pub fn syntactic(&self) -> Grammar {
        if self.sem_spec.is_empty() {
            return self.clone();
        }
        let spec = &self.sem_spec;
        let strip_all = |ts: &[&Term], nvars: u32| -> (Vec<Term>, u32) {
            let mut next = nvars;
            let mut fresh = || {
                next += 1;
                Term::var(next - 1)
            };
            let out = ts.iter().map(|t| spec.strip(t, &mut fresh)).collect();
            (out, next)
        };
        let rules = self
            .rules
            .iter()
            .map(|r| {
                let mut all = alloc::vec![&r.mother, &r.head];
                all.extend(r.rev_left_ds.iter());
                all.extend(r.right_ds.iter());
                let (mut out, nvars) = strip_all(&all, r.nvars);
                let right_ds = out.split_off(2 + r.rev_left_ds.len());
                let rev_left_ds = out.split_off(2);
                let head = out.pop().unwrap();
                let mother = out.pop().unwrap();
                HeadedRule { name: r.name.clone(), nvars, mother, head, rev_left_ds, right_ds }
            })
            .collect();
        let lexicon = self
            .lexicon
            .iter()
            .map(|e| {
                let (mut out, nvars) = strip_all(&[&e.cat], e.nvars);
                LexEntry { name: e.name.clone(), words: e.words.clone(), cat: out.pop().unwrap(), nvars }
            })
            .collect();
        let gaps = self
            .gaps
            .iter()
            .map(|g| {
                let (mut out, nvars) = strip_all(&[&g.cat], g.nvars);
                GapRule { name: g.name.clone(), cat: out.pop().unwrap(), nvars }
            })
            .collect();
        let (mut top, _) = strip_all(&[self.top.term()], self.top.nvars());
        Grammar {
            rules,
            lexicon,
            gaps,
            top: Frozen::new(&top.pop().unwrap()),
            weakening: self.weakening.clone(),
            sem_spec: SemSpec::default(),
            gap_mode: self.gap_mode,
        }
    }

    /// The same grammar with every rule's leftmost daughter as its head,
    /// which turns head-corner parsing into left-corner parsing.
    pub fn left_corner(&self) -> Grammar {
        let rules = self
            .rules
            .iter()
            .map(|r| HeadedRule::from_daughters(r.name.clone(), r.nvars, r.mother.clone(), r.daughters(), 0))
            .collect();
        Grammar { rules, ..self.clone() }
    }

    pub fn rule_index(&self, name: &str) -> Option<usize> {
        self.rules.iter().position(|r| &*r.name == name)
    }

    /// Every match of a lexical entry against a path in `wg`, ordered by
    /// `(from, to, entry)`.
    pub fn lexical_analysis(&self, wg: &WordGraph) -> Vec<LexEdge> {
        fn walk(
            wg: &WordGraph,
            words: &[Sym],
            at: StateId,
            score: f64,
            found: &mut Vec<(StateId, f64)>,
        ) {
            let Some((w, rest)) = words.split_first() else {
                found.push((at, score));
                return;
            };
            for (_, t) in wg.outgoing(at) {
                if t.word == *w {
                    walk(wg, rest, t.to, score + t.score, found);
                }
            }
        }
        let mut edges = Vec::new();
        for (entry, lex) in self.lexicon.iter().enumerate() {
            let cat = Frozen::new(&lex.cat);
            for from in 0..wg.num_states() {
                let mut found = Vec::new();
                walk(wg, &lex.words, from, 0.0, &mut found);
                for (to, score) in found {
                    edges.push(LexEdge { from, to, cat: cat.clone(), score, entry });
                }
            }
        }
        edges.sort_by_key(|e| (e.from, e.to, e.entry));
        edges
    }

    /// Every functor used as a category anywhere in the grammar.
    pub fn functors(&self) -> alloc::collections::BTreeSet<FunctorKey> {
        let mut out = alloc::collections::BTreeSet::new();
        let mut add = |t: &Term| {
            if let Some(k) = t.functor_key() {
                out.insert(k);
            }
        };
        add(self.top.term());
        for r in &self.rules {
            add(&r.mother);
            for d in r.daughters() {
                add(&d);
            }
        }
        for e in &self.lexicon {
            add(&e.cat);
        }
        for g in &self.gaps {
            add(&g.cat);
        }
        out
    }

    /// Source text that loads back to an equivalent grammar.
    pub fn to_source(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "top {}.", self.top);
        if self.gap_mode != GapMode::General {
            let _ = writeln!(s, "gap_mode {}.", self.gap_mode);
        }
        let weaken = |s: &mut String, what: &str, r: &Restrictor| {
            let mut opts = Vec::new();
            match r.depth {
                Some(d) => opts.push(format!("depth {d}")),
                None if !r.unshare => opts.push("identity".into()),
                None => {}
            }
            if r.unshare {
                opts.push("no_sharing".into());
            }
            let _ = writeln!(s, "weaken {what} {}.", opts.join(" "));
        };
        if !self.weakening.default.is_identity() {
            weaken(&mut s, "all", &self.weakening.default);
        }
        for ((f, n), r) in &self.weakening.per_functor {
            weaken(&mut s, &format!("{}/{n}", atom_text(f)), r);
        }
        for ((f, n), idx) in &self.sem_spec.0 {
            let args: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
            let _ = writeln!(s, "semantic {}/{n} args {}.", atom_text(f), args.join(","));
        }
        for r in &self.rules {
            let ds: Vec<String> = r
                .daughters()
                .iter()
                .enumerate()
                .map(|(i, d)| if i == r.head_index() { format!("*{d}") } else { d.to_string() })
                .collect();
            let _ = writeln!(s, "rule {}: {} --> {}.", atom_text(&r.name), r.mother, ds.join(", "));
        }
        for e in &self.lexicon {
            let ws: Vec<String> = e.words.iter().map(|w| atom_text(w)).collect();
            let _ = writeln!(s, "lex {}: [{}] = {}.", atom_text(&e.name), ws.join(","), e.cat);
        }
        for g in &self.gaps {
            let _ = writeln!(s, "gap {}: {}.", atom_text(&g.name), g.cat);
        }
        s
    }
}
