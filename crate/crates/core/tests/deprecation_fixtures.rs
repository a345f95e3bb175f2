use std::collections::BTreeSet;

use nblint::dataflow::parse_chain;
use nblint::deprecation::{
    bundled_ruleset, check_deprecations, find_deprecations, DeprecationFinding, DeprecationRuleset,
};
use nblint::notebook::{build_cell_chain, NormalizationConfig, Notebook};
use proptest::prelude::*;

/// (cells, expected (target, cell, line, column, written)), traced by hand.
type Case = (
    &'static [&'static str],
    &'static [(&'static str, usize, usize, usize, &'static str)],
);

const CASES: &[Case] = &[
    (
        &[
            "from sklearn.cross_validation import train_test_split\n",
            "train_test_split(X, y)\n",
        ],
        &[(
            "sklearn.cross_validation",
            0,
            1,
            1,
            "sklearn.cross_validation",
        )],
    ),
    (&["import sklearn.model_selection\n"], &[]),
    (
        &[
            "import sklearn.preprocessing as pp\n",
            "imp = pp.Imputer(strategy='mean')\n",
        ],
        &[("sklearn.preprocessing.Imputer", 1, 1, 7, "pp.Imputer")],
    ),
    (
        &[
            "import sklearn.grid_search as gs\n",
            "gs.GridSearchCV(m, {})\n",
        ],
        &[("sklearn.grid_search", 0, 1, 8, "sklearn.grid_search")],
    ),
    (
        &[
            "from sklearn import grid_search, svm\n",
            "grid_search.GridSearchCV(svm.SVC(), {})\n",
        ],
        &[("sklearn.grid_search", 0, 1, 21, "sklearn.grid_search")],
    ),
    (
        &[
            "import sklearn\n",
            "data = sklearn.datasets.fetch_mldata('MNIST original')\n",
        ],
        &[(
            "sklearn.datasets.fetch_mldata",
            1,
            1,
            8,
            "sklearn.datasets.fetch_mldata",
        )],
    ),
    (
        &[
            "from sklearn.datasets import fetch_mldata\n",
            "fetch_mldata('iris')\n",
        ],
        &[(
            "sklearn.datasets.fetch_mldata",
            0,
            1,
            30,
            "sklearn.datasets.fetch_mldata",
        )],
    ),
    (
        &[
            "from sklearn import mixture\n",
            "g = mixture.GMM(n_components=2)\n",
            "h = mixture.GaussianMixture(2)\n",
        ],
        &[("sklearn.mixture.GMM", 1, 1, 5, "mixture.GMM")],
    ),
    (
        &["from sklearn.mixture import GMM as G\n"],
        &[("sklearn.mixture.GMM", 0, 1, 29, "sklearn.mixture.GMM")],
    ),
    (
        &[
            "import numpy as pp\n",
            "pp.Imputer()\n",
            "import sklearn.preprocessing as pp\n",
            "pp.Imputer()\n",
        ],
        &[("sklearn.preprocessing.Imputer", 3, 1, 1, "pp.Imputer")],
    ),
    (
        &[
            "import sklearn.preprocessing as pp\n",
            "import numpy as pp\n",
            "pp.Imputer()\n",
        ],
        &[],
    ),
    (
        &[
            "import sklearn.cross_validation\n",
            "import sklearn.grid_search\n",
        ],
        &[
            (
                "sklearn.cross_validation",
                0,
                1,
                8,
                "sklearn.cross_validation",
            ),
            ("sklearn.grid_search", 1, 1, 8, "sklearn.grid_search"),
        ],
    ),
    (
        &["def f():\n    from sklearn.cross_validation import KFold\n    return KFold(3)\n"],
        &[(
            "sklearn.cross_validation",
            0,
            2,
            5,
            "sklearn.cross_validation",
        )],
    ),
    (
        &[
            "from sklearn.preprocessing import *\n",
            "Imputer()\n",
            "x = Imputer.fit\n",
        ],
        &[
            ("sklearn.preprocessing.Imputer", 1, 1, 1, "Imputer"),
            ("sklearn.preprocessing.Imputer", 2, 1, 5, "Imputer"),
        ],
    ),
    (&["from . import cross_validation\n"], &[]),
    (&["x = (\n"], &[]),
    (
        &[
            "%matplotlib inline\n",
            "import sklearn.preprocessing as pre\n",
            "pre.Imputer\n",
        ],
        &[("sklearn.preprocessing.Imputer", 2, 1, 1, "pre.Imputer")],
    ),
];

fn chain_of(cells: &[&str]) -> nblint::notebook::CellChain {
    build_cell_chain(
        &Notebook::from_code_cells("nb.ipynb", cells),
        &NormalizationConfig::default(),
    )
}

fn run(cells: &[&str], ruleset: &DeprecationRuleset) -> Vec<DeprecationFinding> {
    let chain = chain_of(cells);
    let asts = parse_chain(&chain);
    find_deprecations(&chain, &asts, ruleset)
}

#[test]
fn fixtures_match_hand_traced_expectations() {
    let ruleset = bundled_ruleset();
    for (cells, expected) in CASES {
        let got: Vec<_> = run(cells, &ruleset)
            .into_iter()
            .map(|f| {
                (
                    f.target,
                    f.location.cell.unwrap(),
                    f.location.line,
                    f.location.column,
                    f.written,
                )
            })
            .collect();
        let want: Vec<_> = expected
            .iter()
            .map(|&(t, c, l, col, w)| (t.to_string(), c, l, col, w.to_string()))
            .collect();
        assert_eq!(got, want, "cells {cells:?}");
    }
}

#[test]
fn alias_expansion_reproduces_target() {
    let ruleset = bundled_ruleset();
    for (cells, _) in CASES {
        for f in run(cells, &ruleset) {
            assert_eq!(f.expand_written(), f.resolved, "{cells:?}");
            let rule = ruleset.rules.iter().find(|r| r.target == f.target).unwrap();
            assert!(rule.matches(&f.resolved));
        }
    }
}

#[test]
fn diagnostics_carry_replacement() {
    let chain = chain_of(&["from sklearn.cross_validation import KFold\n"]);
    let diags = check_deprecations(&chain, &parse_chain(&chain), &bundled_ruleset());
    assert_eq!(diags.len(), 1);
    assert_eq!(diags[0].code, "D001");
    assert!(
        diags[0].message.contains("sklearn.model_selection"),
        "{}",
        diags[0].message
    );
}

proptest! {
    #[test]
    fn adding_rules_never_removes_diagnostics(mask in 0u32..32, extra in 0u32..32) {
        let full = bundled_ruleset();
        let subset = |m: u32| DeprecationRuleset {
            rules: full.rules.iter().enumerate().filter(|(i, _)| m & (1 << i) != 0).map(|(_, r)| r.clone()).collect(),
            ..full.clone()
        };
        let small = subset(mask);
        let large = subset(mask | extra);
        for (cells, _) in CASES {
            let key = |f: DeprecationFinding| (f.target, f.location, f.written);
            let a: BTreeSet<_> = run(cells, &small).into_iter().map(key).collect();
            let b: BTreeSet<_> = run(cells, &large).into_iter().map(key).collect();
            prop_assert!(a.is_subset(&b), "{:?}", cells);
            if mask == 0 {
                prop_assert!(a.is_empty());
            }
        }
    }
}
