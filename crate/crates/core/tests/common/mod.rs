//! Test-only oracles and generators shared by the integration suites.
#![allow(dead_code)]

use fqz_core::linalg::{conjugate_transpose, kron, mat_mul, ComplexMatrix, ONE, ZERO};
use rand::seq::SliceRandom;
use rand::Rng;

pub const DEUTSCH_SOURCE: &str = include_str!("../../../../programs/deutsch.fqz");

pub fn program_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../programs")
        .join(name)
}

/// Permutation sending register order to `targets ++ remaining qubits`.
fn reorder(targets: &[usize], n: usize) -> ComplexMatrix {
    let mut order: Vec<usize> = targets.to_vec();
    order.extend((0..n).filter(|q| !targets.contains(q)));
    let dim = 1 << n;
    let mut entries = vec![ZERO; dim * dim];
    for b in 0..dim {
        let mut permuted = 0;
        for (pos, &q) in order.iter().enumerate() {
            let bit = (b >> (n - 1 - q)) & 1;
            permuted |= bit << (n - 1 - pos);
        }
        entries[permuted * dim + b] = ONE;
    }
    ComplexMatrix::new(dim, dim, entries).unwrap()
}

/// Full-register matrix of `gate` on `targets`: `P† (G ⊗ I) P`.
pub fn expand_to_register(gate: &ComplexMatrix, targets: &[usize], n: usize) -> ComplexMatrix {
    let rest = n - targets.len();
    let lifted = if rest == 0 {
        gate.clone()
    } else {
        kron(gate, &ComplexMatrix::identity(1 << rest))
    };
    let p = reorder(targets, n);
    let tmp = mat_mul(&lifted, &p).unwrap();
    mat_mul(&conjugate_transpose(&p), &tmp).unwrap()
}

const NAMES: [&str; 4] = ["a", "b", "q2", "reg_3"];
const KETS: [&str; 6] = ["|0>", "|1>", "|+>", "|->", "H|0>", "H|1>"];
const ORACLES: [&str; 4] = ["const0", "const1", "id", "not"];
const ANGLES: [&str; 7] = ["pi", "pi/2", "pi/4", "-pi", "-pi/2", "-pi/4", "0"];

/// Angle literal with at most nine significant digits.
fn angle<R: Rng>(rng: &mut R) -> String {
    if rng.gen_bool(0.4) {
        ANGLES.choose(rng).unwrap().to_string()
    } else {
        let v: i64 = rng.gen_range(-999_999..=999_999);
        format!("{}", v as f64 / 1000.0)
    }
}

/// A random well-scoped straight-line program over at most four qubits with
/// at most `max_len` statements (oracle declarations excluded).
pub fn random_program<R: Rng>(rng: &mut R, max_len: usize) -> String {
    let n_qubits = rng.gen_range(1..=4);
    let n_oracles = rng.gen_range(0..=2);
    let len = rng.gen_range(0..=max_len);
    let mut src = String::new();
    if rng.gen_bool(0.3) {
        src.push_str("-- generated\n");
    }
    let oracle_names: Vec<String> = (0..n_oracles).map(|i| format!("f{i}")).collect();
    for name in &oracle_names {
        src.push_str(&format!(
            "oracle {name} = {}\n",
            ORACLES.choose(rng).unwrap()
        ));
    }
    let mut allocated: Vec<&str> = Vec::new();
    for _ in 0..len {
        let can_alloc = allocated.len() < n_qubits;
        let choice = if allocated.is_empty() {
            0
        } else {
            rng.gen_range(0..6)
        };
        let line = match choice {
            0 if can_alloc => {
                let name = NAMES[allocated.len()];
                allocated.push(name);
                format!("qubit {name} = {}", KETS.choose(rng).unwrap())
            }
            1 => format!(
                "{} {}",
                ["I", "X", "Z", "H"].choose(rng).unwrap(),
                allocated.choose(rng).unwrap()
            ),
            2 => format!("R({}) {}", angle(rng), allocated.choose(rng).unwrap()),
            3 if allocated.len() >= 2 && !oracle_names.is_empty() => {
                let pair: Vec<_> = allocated.choose_multiple(rng, 2).collect();
                format!(
                    "N[{}] {} {}",
                    oracle_names.choose(rng).unwrap(),
                    pair[0],
                    pair[1]
                )
            }
            4 => format!("measure {}", allocated.choose(rng).unwrap()),
            _ => format!("H {}", allocated.choose(rng).unwrap()),
        };
        src.push_str(&line);
        if rng.gen_bool(0.1) {
            src.push_str("   -- note");
        }
        src.push('\n');
    }
    src
}

const MUTATION_ALPHABET: &[char] = &[
    'q', 'x', 'H', 'N', 'R', '|', '>', '<', '0', '1', '2', '+', '-', '(', ')', '[', ']', '=', ' ',
    '\n', '/', '.', 'e', '$', 'π', '\t', '\r', '#',
];

/// Applies one random character-level or line-level edit.
pub fn mutate<R: Rng>(rng: &mut R, src: &str) -> String {
    let mut chars: Vec<char> = src.chars().collect();
    match rng.gen_range(0..5) {
        0 if !chars.is_empty() => {
            let i = rng.gen_range(0..chars.len());
            chars.remove(i);
        }
        1 if !chars.is_empty() => {
            let i = rng.gen_range(0..chars.len());
            chars[i] = *MUTATION_ALPHABET.choose(rng).unwrap();
        }
        2 => {
            let mut lines: Vec<&str> = src.lines().collect();
            if lines.len() >= 2 {
                let i = rng.gen_range(0..lines.len());
                let j = rng.gen_range(0..lines.len());
                lines.swap(i, j);
            }
            return lines.join("\n");
        }
        3 => {
            let mut lines: Vec<&str> = src.lines().collect();
            if !lines.is_empty() {
                let i = rng.gen_range(0..lines.len());
                lines.insert(i, lines[i]);
            }
            return lines.join("\n");
        }
        _ => {
            let i = rng.gen_range(0..=chars.len());
            chars.insert(i, *MUTATION_ALPHABET.choose(rng).unwrap());
        }
    }
    chars.into_iter().collect()
}

/// True when `(line, column)` lies within the text or just past its end.
pub fn location_in_source(src: &str, line: usize, column: usize) -> bool {
    if line == 0 || column == 0 {
        return false;
    }
    let lines: Vec<&str> = src.split('\n').collect();
    match lines.get(line - 1) {
        Some(text) => column <= text.chars().count() + 1,
        None => false,
    }
}
