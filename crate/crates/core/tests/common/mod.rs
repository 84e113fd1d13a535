#![allow(dead_code)]

pub mod gen;

use horn_core::frontend::{parse_atom, parse_program};
use horn_core::{Atom, Program};

pub const CONNECT: &str = "
k1: connect(X, Z) <= connect(X, Y), connect(Y, Z).
k2: connect(node1, node2).
k3: connect(node2, node3).
";

pub const BLIST: &str = "
k1: bit(0).
k2: bit(1).
k3: bList(nil).
k4: bList(cons(X, Y)) <= bit(X), bList(Y).
";

pub const STREAM: &str = "k1: stream(cons(X, Y)) <= stream(Y).";

pub const EQ_LIST: &str = "
k1: eq(list(X)) <= eq(X).
k2: eq(char).
";

pub const OVERLAP: &str = "
k1: p(c).
k2: p(X) <= q(X).
";

pub const TM_INCOMPLETE: &str = "
k1: q(c).
k2: p(Y) <= q(X).
";

pub const LIST_ORIGINAL: &str = "
k1: p(int).
k2: p(list(X)) <= p(X), p(list(X)).
";

pub const LIST_MEASURED: &str = "
k1: p(int, 0).
k2: p(list(X), s(Y)) <= p(X, Y), p(list(X), Y).
";

pub const LOOP: &str = "k: p(X) <= p(X).";

pub const BUSH: &str = "
k1: eq(bush(X)) <= eq(X), eq(bush(bush(X))).
k2: eq(char).
";

pub fn program(text: &str) -> Program {
    parse_program(text).expect("fixture parses")
}

pub fn atom(text: &str) -> Atom {
    parse_atom(text).expect("fixture atom parses")
}
