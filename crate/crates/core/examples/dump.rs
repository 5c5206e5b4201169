//! Print the ledger table as JSON at the default export deltas.
use t3_core::ledger::{Ledger, DEFAULT_EXPORT_DELTAS};

fn main() {
    let l = Ledger::default();
    let rows = l.rows(DEFAULT_EXPORT_DELTAS);
    l.write_json(&rows, std::io::stdout().lock()).expect("stdout");
    println!();
}
