//! Workloads shared by the benchmarks.

use horn_core::frontend::parse_program;
use horn_core::Program;

/// `connect` over a path graph `n0 -> n1 -> ... -> n{len}`, with the
/// recursive clause first.
pub fn path_graph(len: usize) -> Program {
    let mut text = String::from("k0: connect(X, Z) <= connect(X, Y), connect(Y, Z).\n");
    for i in 0..len {
        text.push_str(&format!("e{i}: connect(n{i}, n{}).\n", i + 1));
    }
    parse_program(&text).expect("generated program parses")
}

/// Peano addition, productive under term matching.
pub fn peano() -> Program {
    parse_program("z: add(0, Y, Y).\ns: add(s(X), Y, s(Z)) <= add(X, Y, Z).").expect("peano parses")
}

/// `s(s(...(0)))` with `n` successors, as text.
pub fn numeral(n: usize) -> String {
    let mut t = String::from("0");
    for _ in 0..n {
        t = format!("s({t})");
    }
    t
}
