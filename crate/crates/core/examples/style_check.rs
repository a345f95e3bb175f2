//! Style-checks a plain Python snippet the way pycodestyle would.

use nblint::notebook::PythonSource;
use nblint::style::{check_source, error_ratio, RuleConfig};

const SNIPPET: &str = "import os\ndef f(a,b = 1):\n  return a+b \nx=f(1)\n";

fn main() {
    let src = PythonSource::from_script("snippet.py", SNIPPET);
    let diags = check_source(&src, &RuleConfig::default());
    for d in &diags {
        println!(
            "{}:{} {} {}",
            d.location.line, d.location.column, d.code, d.message
        );
    }
    println!("error ratio {:.3}", error_ratio(&diags, src.loc()).unwrap());
}
