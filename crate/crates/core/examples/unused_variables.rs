//! Finds variables that are stored and never read across a cell sequence.

use nblint::dataflow::{access_table_for_cells, find_unused, UnusedPolicy};

fn main() {
    let cells = [
        "import pandas as pd\ndf = pd.read_csv('data.csv')\n",
        "summary = df.describe()\n",
        "def plot(ax, color):\n    return ax\n",
        "for i in range(3):\n    print(i)\n",
    ];
    let table = access_table_for_cells(&cells);
    for (label, policy) in [
        ("default", UnusedPolicy::default()),
        ("strict", UnusedPolicy::strict()),
    ] {
        println!("{label}:");
        for u in find_unused(&table, &policy) {
            let l = u.defining_location;
            println!(
                "  {} (cell {}, line {}, {} stores)",
                u.name, l.entry, l.line, u.n_stores
            );
        }
    }
}
