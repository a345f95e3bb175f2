use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use nblint::dataflow::{access_table_for_cells, find_unused, witness, UnusedPolicy};
use nblint::frontend::parse_ast;
use proptest::prelude::*;
use serde_json::Value;

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/dataflow")
}

fn fixtures() -> Vec<(String, Vec<String>)> {
    let mut out = Vec::new();
    for entry in fs::read_dir(fixture_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "py") {
            let text = fs::read_to_string(&path).unwrap();
            let cells = text.split("# %%\n").map(str::to_string).collect();
            out.push((
                path.file_stem().unwrap().to_string_lossy().into_owned(),
                cells,
            ));
        }
    }
    out.sort();
    out
}

fn load(name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(fixture_dir().join(name)).unwrap()).unwrap()
}

fn flagged(cells: &[String], policy: &UnusedPolicy) -> Value {
    let table = access_table_for_cells(cells);
    let rows: Vec<Value> = find_unused(&table, policy)
        .into_iter()
        .map(|u| {
            let l = u.defining_location;
            serde_json::json!([u.name, l.entry, l.line, l.column])
        })
        .collect();
    Value::Array(rows)
}

#[test]
fn unused_matches_oracle() {
    let expected = load("unused.json");
    let all = fixtures();
    assert!(all.len() >= 40, "only {} fixtures", all.len());
    let mut mismatches = Vec::new();
    for (name, cells) in &all {
        for (mode, policy) in [
            ("default", UnusedPolicy::default()),
            ("strict", UnusedPolicy::strict()),
        ] {
            let want = &expected[name][mode];
            let got = flagged(cells, &policy);
            if &got != want {
                mismatches.push(format!("{name} [{mode}]: got {got}, oracle {want}"));
            }
        }
    }
    assert!(mismatches.is_empty(), "{}", mismatches.join("\n"));
}

#[test]
fn name_contexts_match_python_ast() {
    let expected = load("names.json");
    for (name, cells) in fixtures() {
        for (i, cell) in cells.iter().enumerate() {
            let want = &expected[&name][i];
            let got = match parse_ast(cell) {
                Ok(ast) => {
                    let mut rows: Vec<(usize, usize, String, String)> = ast
                        .names()
                        .into_iter()
                        .map(|(id, ctx, pos)| (pos.line, pos.col, id.to_string(), ctx.to_string()))
                        .collect();
                    rows.sort();
                    serde_json::to_value(rows).unwrap()
                }
                Err(_) => Value::Null,
            };
            assert_eq!(&got, want, "{name} cell {i}");
        }
    }
}

#[test]
fn every_unflagged_binding_has_a_witness() {
    for (name, cells) in fixtures() {
        let table = access_table_for_cells(&cells);
        for policy in [UnusedPolicy::default(), UnusedPolicy::strict()] {
            let flagged: Vec<_> = find_unused(&table, &policy)
                .into_iter()
                .map(|u| (u.name, u.scope_id))
                .collect();
            for (var, scope) in table.bindings() {
                let w = witness(&table, &policy, &var, scope);
                let is_flagged = flagged.contains(&(var.clone(), scope));
                assert_eq!(w.is_none(), is_flagged, "{name}: {var} in scope {scope}");
            }
        }
    }
}

#[test]
fn every_entry_scope_exists() {
    for (name, cells) in fixtures() {
        let table = access_table_for_cells(&cells);
        assert!(table.scopes[0].parent.is_none(), "{name}");
        for (i, e) in table.entries.iter().enumerate() {
            assert_eq!(e.ordinal, i, "{name}");
            assert!(e.scope_id < table.scopes.len(), "{name}");
        }
        for s in &table.scopes[1..] {
            assert!(s.parent.is_some_and(|p| p < s.id), "{name}");
        }
    }
}

fn independent_cell(id: usize, shape: usize, used: bool) -> String {
    let v = format!("v{id}");
    let body = match shape {
        0 => format!("{v} = {id}\n"),
        1 => format!("{v} = [k for k in range({id})]\n"),
        2 => format!("for {v} in range(3):\n    pass\n"),
        _ => format!("def f{id}():\n    {v} = 1\n    return 0\n"),
    };
    if used && shape != 3 {
        format!("{body}print({v})\n")
    } else {
        body
    }
}

proptest! {
    #[test]
    fn cell_order_does_not_matter_for_independent_cells(
        shapes in proptest::collection::vec((0usize..4, any::<bool>()), 1..8),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let cells: Vec<String> = shapes.iter().enumerate().map(|(i, &(shape, used))| independent_cell(i, shape, used)).collect();
        let mut shuffled = cells.clone();
        shuffled.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
        let summarize = |cells: &[String]| -> BTreeMap<String, usize> {
            find_unused(&access_table_for_cells(cells), &UnusedPolicy::default())
                .into_iter()
                .map(|u| (u.name, u.n_stores))
                .collect()
        };
        prop_assert_eq!(summarize(&cells), summarize(&shuffled));
    }
}
