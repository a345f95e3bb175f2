//! Lists the style rules and the bundled deprecation rules.

use nblint::deprecation::bundled_ruleset;
use nblint::style::rule_catalog;

fn main() {
    for rule in rule_catalog() {
        println!("{} {}", rule.code, rule.message_template);
    }
    let rules = bundled_ruleset();
    println!("\n{} ({})", rules.library, rules.source);
    for r in &rules.rules {
        println!("  {}", r.describe());
    }
}
