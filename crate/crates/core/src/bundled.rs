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

//! Grammars shipped with the crate.

use crate::grammar::Grammar;

pub const BILLOT: &str = include_str!("../grammars/billot.gram");
pub const TOY: &str = include_str!("../grammars/toy.gram");
pub const AGREEMENT: &str = include_str!("../grammars/agreement.gram");
pub const V2: &str = include_str!("../grammars/v2.gram");
pub const EPSILON: &str = include_str!("../grammars/epsilon.gram");
pub const PPCHAIN: &str = include_str!("../grammars/ppchain.gram");
pub const ROBUST: &str = include_str!("../grammars/robust.gram");
pub const OCCUR: &str = include_str!("../grammars/occur.gram");

/// Name and source of every bundled grammar.
pub const ALL: &[(&str, &str)] = &[
    ("billot", BILLOT),
    ("toy", TOY),
    ("agreement", AGREEMENT),
    ("v2", V2),
    ("epsilon", EPSILON),
    ("ppchain", PPCHAIN),
    ("robust", ROBUST),
    ("occur", OCCUR),
];

pub fn source(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// A bundled grammar by name.
pub fn grammar(name: &str) -> Option<Grammar> {
    source(name).map(|s| Grammar::parse(s).expect("bundled grammars parse"))
}
