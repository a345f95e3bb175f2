//! Reports uses of deprecated scikit-learn APIs, following import aliases.

use nblint::dataflow::parse_chain;
use nblint::deprecation::{bundled_ruleset, find_deprecations};
use nblint::notebook::{build_cell_chain, NormalizationConfig, Notebook};

fn main() {
    let nb = Notebook::from_code_cells(
        "demo.ipynb",
        &[
            "from sklearn.cross_validation import train_test_split\n",
            "import sklearn.preprocessing as pp\nimp = pp.Imputer()\n",
            "from sklearn import mixture\nmodel = mixture.GMM(3)\n",
            "from sklearn.model_selection import GridSearchCV\n",
        ],
    );
    let chain = build_cell_chain(&nb, &NormalizationConfig::default());
    let asts = parse_chain(&chain);
    for f in find_deprecations(&chain, &asts, &bundled_ruleset()) {
        println!(
            "{}: {} (written {})",
            f.location.cell.unwrap_or(0),
            f.target,
            f.written
        );
    }
}
