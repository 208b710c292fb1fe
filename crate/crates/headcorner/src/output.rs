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

//! Rendering trees and answers.

use headcorner_core::{DerivationTree, Label};
use serde_json::{json, Value};

/// A derivation tree as JSON with the same fields as the s-expression form.
pub fn tree_json(t: &DerivationTree) -> Value {
    let mut v = match &t.label {
        Label::Rule { name, .. } => json!({
            "rule": &**name,
            "children": t.children.iter().map(tree_json).collect::<Vec<_>>(),
        }),
        Label::Lex { name, from, to, score, .. } => json!({
            "lex": &**name,
            "from": from,
            "to": to,
            "score": score,
        }),
        Label::Gap { name, pos, .. } => json!({
            "gap": &**name,
            "pos": pos.known(),
        }),
    };
    v["category"] = json!(t.category.to_string());
    v["total_score"] = json!(t.score);
    v
}
