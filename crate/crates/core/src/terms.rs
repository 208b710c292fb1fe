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

//! First-order terms and the operations the parser is built on: unification
//! with a trail, one-way matching (subsumption), anti-unification, renaming
//! and restriction.
//!
//! Terms are immutable values. Variable bindings live in a [`Bindings`]
//! store that belongs to a single parse; everything that has to outlive a
//! branch of the search is [`Frozen`] first (fully dereferenced, variables
//! renumbered from zero).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::CyclicTerm;

pub type Sym = Arc<str>;

/// Functor name and arity.
pub type FunctorKey = (Sym, usize);

pub const CONS: &str = "cons";
pub const NIL: &str = "nil";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(VarId),
    /// Integers behave as atoms; they are kept apart so positions compare cheaply.
    Int(i64),
    App(Sym, Arc<[Term]>),
}

impl Term {
    pub fn var(id: u32) -> Term {
        Term::Var(VarId(id))
    }

    pub fn atom(name: &str) -> Term {
        Term::App(Sym::from(name), Arc::from(Vec::new()))
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(Sym::from(name), Arc::from(args))
    }

    pub fn app_sym(name: Sym, args: Vec<Term>) -> Term {
        Term::App(name, Arc::from(args))
    }

    pub fn nil() -> Term {
        Term::atom(NIL)
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::app(CONS, alloc::vec![head, tail])
    }

    pub fn list(items: Vec<Term>, tail: Term) -> Term {
        items.into_iter().rev().fold(tail, |acc, t| Term::cons(t, acc))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn functor(&self) -> Option<(&Sym, usize)> {
        match self {
            Term::App(f, args) => Some((f, args.len())),
            _ => None,
        }
    }

    pub fn functor_key(&self) -> Option<FunctorKey> {
        self.functor().map(|(f, n)| (f.clone(), n))
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            _ => &[],
        }
    }

    /// Largest variable id occurring in the term.
    pub fn max_var(&self) -> Option<u32> {
        match self {
            Term::Var(v) => Some(v.0),
            Term::Int(_) => None,
            Term::App(_, args) => args.iter().filter_map(Term::max_var).max(),
        }
    }

    /// Variables in order of first occurrence, without repeats.
    pub fn vars(&self) -> Vec<VarId> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.collect_vars(&mut seen, &mut out);
        out
    }

    fn collect_vars(&self, seen: &mut BTreeSet<VarId>, out: &mut Vec<VarId>) {
        match self {
            Term::Var(v) => {
                if seen.insert(*v) {
                    out.push(*v);
                }
            }
            Term::Int(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(seen, out)),
        }
    }

    /// Shift every variable id by `base`.
    pub fn offset(&self, base: u32) -> Term {
        if base == 0 {
            return self.clone();
        }
        match self {
            Term::Var(v) => Term::Var(VarId(v.0 + base)),
            Term::Int(_) => self.clone(),
            Term::App(f, args) => {
                if args.is_empty() {
                    self.clone()
                } else {
                    Term::App(f.clone(), args.iter().map(|a| a.offset(base)).collect())
                }
            }
        }
    }

    /// Apply a variable mapping; unmapped variables are kept.
    pub fn substitute(&self, map: &BTreeMap<VarId, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Int(_) => self.clone(),
            Term::App(f, args) => {
                if args.is_empty() {
                    self.clone()
                } else {
                    Term::App(f.clone(), args.iter().map(|a| a.substitute(map)).collect())
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::App(_, args) if !args.is_empty() => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 1,
        }
    }
}

/// Renumber variables by first occurrence, starting at zero.
fn canonical(t: &Term) -> (Term, u32) {
    let mut map = BTreeMap::new();
    for (i, v) in t.vars().into_iter().enumerate() {
        map.insert(v, Term::var(i as u32));
    }
    let n = map.len() as u32;
    (t.substitute(&map), n)
}

/// A self-contained term: no outstanding bindings, variables numbered
/// `0..nvars` by first occurrence. Two frozen terms are equal iff they are
/// variants of each other.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Frozen {
    term: Term,
    nvars: u32,
}

impl Frozen {
    /// Freeze a term that carries no bindings (e.g. freshly parsed).
    pub fn new(t: &Term) -> Frozen {
        let (term, nvars) = canonical(t);
        Frozen { term, nvars }
    }

    pub fn term(&self) -> &Term {
        &self.term
    }

    pub fn nvars(&self) -> u32 {
        self.nvars
    }

    pub fn functor_key(&self) -> Option<FunctorKey> {
        self.term.functor_key()
    }

    /// One-way matching between independent variable spaces.
    pub fn subsumes(&self, specific: &Frozen) -> bool {
        let mut map = BTreeMap::new();
        match_terms(&self.term, &specific.term, &mut map, &BTreeSet::new())
    }

    pub fn restrict(&self, r: &Restrictor) -> Frozen {
        let mut next = self.nvars;
        let t = restrict_with(&self.term, r, &mut || {
            next += 1;
            Term::var(next - 1)
        });
        Frozen::new(&t)
    }

    /// True if every argument is a distinct variable (the shape produced by
    /// functor-only weakening).
    pub fn is_functor_only(&self) -> bool {
        let args = self.term.args();
        let mut seen = BTreeSet::new();
        args.iter().all(|a| matches!(a, Term::Var(v) if seen.insert(*v)))
    }
}

impl fmt::Display for Frozen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.term.fmt(f)
    }
}

/// `general` matches `specific` treating the variables of `specific` as
/// constants. Variables listed in `protected` may only map to themselves.
fn match_terms(
    general: &Term,
    specific: &Term,
    map: &mut BTreeMap<VarId, Term>,
    protected: &BTreeSet<VarId>,
) -> bool {
    match general {
        Term::Var(v) => {
            if protected.contains(v) {
                return matches!(specific, Term::Var(w) if w == v);
            }
            match map.get(v) {
                Some(bound) => bound == specific,
                None => {
                    map.insert(*v, specific.clone());
                    true
                }
            }
        }
        Term::Int(i) => matches!(specific, Term::Int(j) if i == j),
        Term::App(f, args) => match specific {
            Term::App(g, sargs) => {
                f == g
                    && args.len() == sargs.len()
                    && args.iter().zip(sargs.iter()).all(|(a, b)| match_terms(a, b, map, protected))
            }
            _ => false,
        },
    }
}

/// Weakening / restriction policy for a single term.
///
/// `depth = Some(d)` keeps the top `d` levels (the root is level 0) and
/// replaces every subterm at level `d` by a fresh variable; `depth = Some(1)`
/// is functor-only weakening. `unshare` replaces every remaining variable
/// occurrence by a distinct fresh variable, so the result has no sharing.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Restrictor {
    pub depth: Option<u32>,
    pub unshare: bool,
}

impl Restrictor {
    pub const fn identity() -> Restrictor {
        Restrictor { depth: None, unshare: false }
    }

    pub const fn depth(d: u32) -> Restrictor {
        Restrictor { depth: Some(d), unshare: false }
    }

    pub const fn functor_only() -> Restrictor {
        Restrictor::depth(1)
    }

    pub const fn no_sharing() -> Restrictor {
        Restrictor { depth: None, unshare: true }
    }

    pub fn is_identity(&self) -> bool {
        self.depth.is_none() && !self.unshare
    }
}

fn restrict_with(t: &Term, r: &Restrictor, fresh: &mut dyn FnMut() -> Term) -> Term {
    fn go(t: &Term, level: u32, r: &Restrictor, fresh: &mut dyn FnMut() -> Term) -> Term {
        if r.depth == Some(level) {
            return fresh();
        }
        match t {
            Term::Var(_) if r.unshare => fresh(),
            Term::Var(_) | Term::Int(_) => t.clone(),
            Term::App(f, args) => {
                if args.is_empty() {
                    t.clone()
                } else {
                    Term::App(f.clone(), args.iter().map(|a| go(a, level + 1, r, fresh)).collect())
                }
            }
        }
    }
    go(t, 0, r, fresh)
}

/// Least general generalization of two standalone terms. Equal pairs of
/// disagreeing subterms map to the same variable.
pub fn anti_unify(a: &Term, b: &Term) -> Frozen {
    fn go(a: &Term, b: &Term, pairs: &mut BTreeMap<(Term, Term), u32>) -> Term {
        match (a, b) {
            (Term::Int(x), Term::Int(y)) if x == y => a.clone(),
            (Term::App(f, xs), Term::App(g, ys)) if f == g && xs.len() == ys.len() => {
                if xs.is_empty() {
                    a.clone()
                } else {
                    Term::App(f.clone(), xs.iter().zip(ys.iter()).map(|(x, y)| go(x, y, pairs)).collect())
                }
            }
            _ => {
                let n = pairs.len() as u32;
                let id = *pairs.entry((a.clone(), b.clone())).or_insert(n);
                Term::var(id)
            }
        }
    }
    let mut pairs = BTreeMap::new();
    Frozen::new(&go(a, b, &mut pairs))
}

/// Snapshot of a [`Bindings`] store, see [`Bindings::undo`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mark {
    trail: usize,
    vars: usize,
}

/// Variable store for one parse instance.
///
/// Bindings are recorded on a trail; [`Bindings::undo`] restores an earlier
/// [`Mark`] in time proportional to the number of undone bindings, and also
/// releases variables allocated after the mark.
#[derive(Clone, Debug)]
pub struct Bindings {
    slots: Vec<Option<Term>>,
    trail: Vec<u32>,
    occur_check: bool,
    cycles: u64,
}

impl Default for Bindings {
    fn default() -> Self {
        Bindings::new(true)
    }
}

impl Bindings {
    pub fn new(occur_check: bool) -> Bindings {
        Bindings { slots: Vec::new(), trail: Vec::new(), occur_check, cycles: 0 }
    }

    pub fn occur_check(&self) -> bool {
        self.occur_check
    }

    /// Number of would-be cyclic bindings detected so far (in either mode).
    pub fn cycles_detected(&self) -> u64 {
        self.cycles
    }

    pub fn var_count(&self) -> usize {
        self.slots.len()
    }

    pub fn fresh(&mut self) -> Term {
        self.slots.push(None);
        Term::var(self.slots.len() as u32 - 1)
    }

    /// Reserve `n` consecutive variables; returns the first id.
    pub fn alloc(&mut self, n: u32) -> u32 {
        let base = self.slots.len() as u32;
        self.slots.resize(self.slots.len() + n as usize, None);
        base
    }

    /// Make a term with clause-local variables `0..nvars` live.
    pub fn instantiate(&mut self, t: &Term, nvars: u32) -> Term {
        let base = self.alloc(nvars);
        t.offset(base)
    }

    pub fn mark(&self) -> Mark {
        Mark { trail: self.trail.len(), vars: self.slots.len() }
    }

    pub fn undo(&mut self, m: Mark) {
        while self.trail.len() > m.trail {
            let v = self.trail.pop().unwrap();
            if let Some(slot) = self.slots.get_mut(v as usize) {
                *slot = None;
            }
        }
        if self.slots.len() > m.vars {
            self.slots.truncate(m.vars);
        }
    }

    fn lookup(&self, v: VarId) -> Option<&Term> {
        self.slots.get(v.0 as usize).and_then(Option::as_ref)
    }

    /// Follow variable bindings at the top of `t`.
    pub fn deref(&self, t: &Term) -> Term {
        let mut cur = t;
        while let Term::Var(v) = cur {
            match self.lookup(*v) {
                Some(next) => cur = next,
                None => break,
            }
        }
        cur.clone()
    }

    pub fn is_unbound(&self, t: &Term) -> bool {
        self.deref(t).is_var()
    }

    /// Apply all bindings recursively.
    pub fn resolve(&self, t: &Term) -> Term {
        match self.deref(t) {
            Term::App(f, args) if !args.is_empty() => {
                Term::App(f, args.iter().map(|a| self.resolve(a)).collect())
            }
            other => other,
        }
    }

    pub fn freeze(&self, t: &Term) -> Frozen {
        Frozen::new(&self.resolve(t))
    }

    pub fn thaw(&mut self, f: &Frozen) -> Term {
        self.instantiate(&f.term, f.nvars)
    }

    /// Fresh variant of `t`; sharing inside `t` is preserved.
    pub fn rename(&mut self, t: &Term) -> Term {
        let f = self.freeze(t);
        self.thaw(&f)
    }

    pub fn restrict(&mut self, t: &Term, r: &Restrictor) -> Term {
        if r.is_identity() {
            return t.clone();
        }
        let resolved = self.resolve(t);
        restrict_with(&resolved, r, &mut || self.fresh())
    }

    /// `general` subsumes `specific`: some substitution for the variables of
    /// `general` makes it identical to `specific`, without binding any
    /// variable of `specific`. Leaves no bindings behind.
    pub fn subsumes_chk(&self, general: &Term, specific: &Term) -> bool {
        let g = self.resolve(general);
        let s = self.resolve(specific);
        let protected: BTreeSet<VarId> = s.vars().into_iter().collect();
        let mut map = BTreeMap::new();
        match_terms(&g, &s, &mut map, &protected)
    }

    fn occurs(&self, v: VarId, t: &Term) -> bool {
        match self.deref(t) {
            Term::Var(w) => v == w,
            Term::Int(_) => false,
            Term::App(_, args) => args.iter().any(|a| self.occurs(v, a)),
        }
    }

    fn bind(&mut self, v: VarId, t: Term) {
        self.slots[v.0 as usize] = Some(t);
        self.trail.push(v.0);
    }

    /// Most general unifier extending the current bindings.
    ///
    /// Returns `Ok(false)` on failure, leaving the store unchanged. A binding
    /// that would create a cyclic term is a plain failure with the occur
    /// check on, and [`CyclicTerm`] with it off.
    pub fn unify(&mut self, a: &Term, b: &Term) -> Result<bool, CyclicTerm> {
        let start = self.mark();
        let mut stack: Vec<(Term, Term)> = alloc::vec![(a.clone(), b.clone())];
        while let Some((x, y)) = stack.pop() {
            let x = self.deref(&x);
            let y = self.deref(&y);
            let ok = match (&x, &y) {
                (Term::Var(i), Term::Var(j)) => {
                    if i != j {
                        // younger variable points at the older one
                        if i > j {
                            self.bind(*i, y.clone());
                        } else {
                            self.bind(*j, x.clone());
                        }
                    }
                    true
                }
                (Term::Var(v), t) | (t, Term::Var(v)) => {
                    if self.occurs(*v, t) {
                        self.cycles += 1;
                        self.undo_trail(start);
                        if self.occur_check {
                            return Ok(false);
                        }
                        return Err(CyclicTerm);
                    }
                    self.bind(*v, t.clone());
                    true
                }
                (Term::Int(p), Term::Int(q)) => p == q,
                (Term::App(f, xs), Term::App(g, ys)) => {
                    if Arc::ptr_eq(xs, ys) && f == g {
                        true
                    } else if f == g && xs.len() == ys.len() {
                        stack.extend(xs.iter().cloned().zip(ys.iter().cloned()));
                        true
                    } else {
                        false
                    }
                }
                _ => false,
            };
            if !ok {
                self.undo_trail(start);
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn undo_trail(&mut self, m: Mark) {
        while self.trail.len() > m.trail {
            let v = self.trail.pop().unwrap();
            self.slots[v as usize] = None;
        }
    }
}

/// `s` as it must be written in source text, quoted when needed.
pub fn atom_text(s: &str) -> alloc::string::String {
    if needs_quotes(s) {
        alloc::format!("'{}'", s.replace('\'', "''"))
    } else {
        s.into()
    }
}

fn needs_quotes(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => !s.chars().all(|c| c.is_alphanumeric() || c == '_'),
        _ => true,
    }
}

fn write_atom(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    if needs_quotes(s) {
        f.write_str("'")?;
        for c in s.chars() {
            if c == '\'' {
                f.write_str("''")?;
            } else {
                write!(f, "{c}")?;
            }
        }
        f.write_str("'")
    } else {
        f.write_str(s)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "_{}", v.0),
            Term::Int(i) => write!(f, "{i}"),
            Term::App(name, args) if args.is_empty() => {
                if &**name == NIL {
                    f.write_str("[]")
                } else {
                    write_atom(f, name)
                }
            }
            Term::App(name, args) if &**name == CONS && args.len() == 2 => {
                f.write_str("[")?;
                args[0].fmt(f)?;
                let mut tail = &args[1];
                loop {
                    match tail {
                        Term::App(n, a) if &**n == CONS && a.len() == 2 => {
                            f.write_str(",")?;
                            a[0].fmt(f)?;
                            tail = &a[1];
                        }
                        Term::App(n, a) if &**n == NIL && a.is_empty() => break,
                        other => {
                            f.write_str("|")?;
                            other.fmt(f)?;
                            break;
                        }
                    }
                }
                f.write_str("]")
            }
            Term::App(name, args) => {
                write_atom(f, name)?;
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    a.fmt(f)?;
                }
                f.write_str(")")
            }
        }
    }
}


#[cfg(test)]
mod props {
    extern crate std;
    use super::*;
    use proptest::prelude::*;

    fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            (0u32..4).prop_map(Term::var),
            prop_oneof![Just("a"), Just("b")].prop_map(Term::atom),
        ];
        leaf.prop_recursive(3, 16, 3, |inner| {
            (prop_oneof![Just("f"), Just("g")], proptest::collection::vec(inner, 1..3))
                .prop_map(|(f, args)| Term::app(f, args))
        })
    }

    /// Put `b` in a disjoint variable space from `a`.
    fn apart(a: &Term, b: &Term) -> (Term, Term) {
        let base = a.max_var().map_or(0, |m| m + 1);
        (a.clone(), b.offset(base))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn subsumption_implies_unifiable(a in arb_term(), b in arb_term()) {
            let (g, s) = apart(&a, &b);
            let mut binds = Bindings::new(true);
            binds.alloc(g.max_var().max(s.max_var()).map_or(0, |m| m + 1));
            if binds.subsumes_chk(&g, &s) {
                prop_assert_eq!(binds.unify(&g, &s), Ok(true));
            }
        }

        #[test]
        fn generalization_subsumes_both(a in arb_term(), b in arb_term()) {
            let (x, y) = apart(&a, &b);
            let g = anti_unify(&x, &y);
            prop_assert!(g.subsumes(&Frozen::new(&x)));
            prop_assert!(g.subsumes(&Frozen::new(&y)));
        }

        #[test]
        fn generalization_is_least(a in arb_term(), b in arb_term(), c in arb_term()) {
            // any common generalization c of a and b also subsumes the lgg
            let (x, y) = apart(&a, &b);
            let (fx, fy, fc) = (Frozen::new(&x), Frozen::new(&y), Frozen::new(&c));
            if fc.subsumes(&fx) && fc.subsumes(&fy) {
                prop_assert!(fc.subsumes(&anti_unify(&x, &y)));
            }
        }

        #[test]
        fn restriction_subsumes(a in arb_term(), d in 1u32..4, unshare in any::<bool>()) {
            let f = Frozen::new(&a);
            let r = Restrictor { depth: Some(d), unshare };
            prop_assert!(f.restrict(&r).subsumes(&f));
            prop_assert!(f.restrict(&Restrictor::no_sharing()).subsumes(&f));
        }

        #[test]
        fn unify_commutes(a in arb_term(), b in arb_term()) {
            let (x, y) = apart(&a, &b);
            let n = x.max_var().max(y.max_var()).map_or(0, |m| m + 1);
            let mut b1 = Bindings::new(true);
            b1.alloc(n);
            let mut b2 = b1.clone();
            let r1 = b1.unify(&x, &y).unwrap();
            let r2 = b2.unify(&y, &x).unwrap();
            prop_assert_eq!(r1, r2);
            if r1 {
                let pair = Term::app("p", alloc::vec![x.clone(), y.clone()]);
                prop_assert_eq!(b1.freeze(&pair), b2.freeze(&pair));
            }
        }
    }
}
