//! The fast self-test, clean and with each deliberate defect injected.

use fibersqueeze::scenario::{parse_fault, selftest, FAULT_NAMES};

fn main() {
    for name in FAULT_NAMES {
        println!("== {name}");
        println!("{}\n", selftest(parse_fault(name).unwrap()));
    }
}
