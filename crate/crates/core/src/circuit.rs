//! Circuit IR, the oracle construction `|x, y⟩ ↦ |x, f(x) ⊕ y⟩`, the executor,
//! and the Deutsch algorithm built on top of them.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::gateset::{self, BasisMapping, Gate, KetLabel};
use crate::linalg::{kron, Complex, ComplexMatrix, ONE, ZERO};
use crate::state::{self, measure_qubit_with, RngSeed, StateError, StateVector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("instruction {index}: qubit {name:?} used before allocation")]
    Undeclared { index: usize, name: String },
    #[error("instruction {index}: qubit {name:?} allocated twice")]
    DoubleAlloc { index: usize, name: String },
    #[error("instruction {index}: gate {gate} needs {arity} distinct qubit(s)")]
    BadTargets {
        index: usize,
        gate: String,
        arity: usize,
    },
    #[error("instruction {index}: oracle {name:?} is not defined")]
    UnresolvedOracle { index: usize, name: String },
    #[error("instruction {index}: {source}")]
    State {
        index: usize,
        #[source]
        source: StateError,
    },
}

/// The four total functions `f: ℤ₂ → ℤ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OracleFn {
    Const0,
    Const1,
    Identity,
    Negation,
}

impl OracleFn {
    pub const ALL: [OracleFn; 4] = [
        OracleFn::Const0,
        OracleFn::Const1,
        OracleFn::Identity,
        OracleFn::Negation,
    ];

    pub fn eval(self, x: bool) -> bool {
        match self {
            OracleFn::Const0 => false,
            OracleFn::Const1 => true,
            OracleFn::Identity => x,
            OracleFn::Negation => !x,
        }
    }

    pub fn is_constant(self) -> bool {
        matches!(self, OracleFn::Const0 | OracleFn::Const1)
    }

    /// Source-language keyword.
    pub fn keyword(self) -> &'static str {
        match self {
            OracleFn::Const0 => "const0",
            OracleFn::Const1 => "const1",
            OracleFn::Identity => "id",
            OracleFn::Negation => "not",
        }
    }
}

impl fmt::Display for OracleFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown oracle {0:?} (expected const0, const1, id or not)")]
pub struct UnknownOracle(pub String);

impl FromStr for OracleFn {
    type Err = UnknownOracle;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OracleFn::ALL
            .into_iter()
            .find(|f| f.keyword() == s)
            .ok_or_else(|| UnknownOracle(s.to_string()))
    }
}

/// Permutation matrix sending `|xy⟩` to `|x, f(x) ⊕ y⟩`.
pub fn oracle_unitary(f: OracleFn) -> ComplexMatrix {
    let mut entries = vec![ZERO; 16];
    for x in [false, true] {
        for y in [false, true] {
            let col = 2 * x as usize + y as usize;
            let row = 2 * x as usize + (f.eval(x) ^ y) as usize;
            entries[row * 4 + col] = ONE;
        }
    }
    ComplexMatrix::new(4, 4, entries).expect("4x4 permutation")
}

/// The oracle as a named gate, carrying its basis mapping.
pub fn oracle_gate(f: OracleFn) -> Gate {
    let pairs: Vec<_> = [false, true]
        .into_iter()
        .flat_map(|x| {
            [false, true].map(|y| (KetLabel::Pair(x, y), KetLabel::Pair(x, f.eval(x) ^ y)))
        })
        .collect();
    let mapping = BasisMapping::simple(2, &pairs).expect("valid mapping");
    Gate::new(format!("N[{f}]"), oracle_unitary(f), Some(mapping)).expect("oracle is unitary")
}

/// Initial single-qubit states accepted by `Alloc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialKet {
    Zero,
    One,
    HZero,
    HOne,
    Plus,
    Minus,
}

impl InitialKet {
    pub const ALL: [InitialKet; 6] = [
        InitialKet::Zero,
        InitialKet::One,
        InitialKet::HZero,
        InitialKet::HOne,
        InitialKet::Plus,
        InitialKet::Minus,
    ];

    pub fn amplitudes(self) -> [Complex; 2] {
        let v = match self {
            InitialKet::Zero => KetLabel::Zero.vector(),
            InitialKet::One => KetLabel::One.vector(),
            InitialKet::HZero | InitialKet::Plus => KetLabel::Plus.vector(),
            InitialKet::HOne | InitialKet::Minus => KetLabel::Minus.vector(),
        };
        [v[0], v[1]]
    }

    pub fn spelling(self) -> &'static str {
        match self {
            InitialKet::Zero => "|0>",
            InitialKet::One => "|1>",
            InitialKet::HZero => "H|0>",
            InitialKet::HOne => "H|1>",
            InitialKet::Plus => "|+>",
            InitialKet::Minus => "|->",
        }
    }

    pub fn from_spelling(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.spelling() == s)
    }
}

impl fmt::Display for InitialKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.spelling())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    Alloc {
        qubit: String,
        init: InitialKet,
    },
    Apply {
        gate: Gate,
        targets: Vec<String>,
    },
    ApplyOracle {
        oracle: String,
        control: String,
        register: String,
    },
    Measure {
        qubit: String,
    },
}

impl Instruction {
    fn referenced(&self) -> Vec<&str> {
        match self {
            Instruction::Alloc { .. } => vec![],
            Instruction::Apply { targets, .. } => targets.iter().map(String::as_str).collect(),
            Instruction::ApplyOracle {
                control, register, ..
            } => vec![control, register],
            Instruction::Measure { qubit } => vec![qubit],
        }
    }
}

/// A straight-line, well-scoped instruction list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    instructions: Vec<Instruction>,
}

impl Circuit {
    pub fn new(instructions: Vec<Instruction>) -> Result<Self, CircuitError> {
        let mut allocated: Vec<&str> = Vec::new();
        for (index, instr) in instructions.iter().enumerate() {
            for name in instr.referenced() {
                if !allocated.contains(&name) {
                    return Err(CircuitError::Undeclared {
                        index,
                        name: name.to_string(),
                    });
                }
            }
            match instr {
                Instruction::Alloc { qubit, .. } => {
                    if allocated.contains(&qubit.as_str()) {
                        return Err(CircuitError::DoubleAlloc {
                            index,
                            name: qubit.clone(),
                        });
                    }
                    allocated.push(qubit);
                }
                Instruction::Apply { gate, targets } => {
                    let distinct = targets
                        .iter()
                        .enumerate()
                        .all(|(i, t)| !targets[..i].contains(t));
                    if targets.len() != gate.arity() || !distinct {
                        return Err(CircuitError::BadTargets {
                            index,
                            gate: gate.to_string(),
                            arity: gate.arity(),
                        });
                    }
                }
                Instruction::ApplyOracle {
                    control, register, ..
                } if control == register => {
                    return Err(CircuitError::BadTargets {
                        index,
                        gate: "N".into(),
                        arity: 2,
                    });
                }
                _ => {}
            }
        }
        Ok(Circuit { instructions })
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredBit {
    pub qubit: String,
    pub bit: u8,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunReport {
    /// `None` when the circuit allocated no qubits.
    pub final_state: Option<StateVector>,
    /// The register immediately before each measurement, in order.
    pub pre_measurement: Vec<StateVector>,
    pub measured: Vec<MeasuredBit>,
    /// Outcome counts keyed by the measured bits in measurement order.
    pub shots: Option<BTreeMap<String, usize>>,
}

impl RunReport {
    /// Measured bits concatenated in measurement order.
    pub fn outcome(&self) -> String {
        self.measured
            .iter()
            .map(|m| char::from(b'0' + m.bit))
            .collect()
    }

    /// The state before the first measurement, or the final state when
    /// nothing was measured.
    pub fn pre_measurement_state(&self) -> Option<&StateVector> {
        self.pre_measurement.first().or(self.final_state.as_ref())
    }
}

/// Step-by-step executor over a growing register.
pub struct Machine<'a, R> {
    oracles: &'a HashMap<String, OracleFn>,
    rng: R,
    names: Vec<String>,
    register: Option<StateVector>,
    report: RunReport,
}

impl<'a, R: Rng> Machine<'a, R> {
    pub fn new(oracles: &'a HashMap<String, OracleFn>, rng: R) -> Self {
        Machine {
            oracles,
            rng,
            names: Vec::new(),
            register: None,
            report: RunReport::default(),
        }
    }

    pub fn register(&self) -> Option<&StateVector> {
        self.register.as_ref()
    }

    fn slot(&self, index: usize, name: &str) -> Result<usize, CircuitError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| CircuitError::Undeclared {
                index,
                name: name.to_string(),
            })
    }

    fn state(&self, index: usize, name: &str) -> Result<&StateVector, CircuitError> {
        self.register
            .as_ref()
            .ok_or_else(|| CircuitError::Undeclared {
                index,
                name: name.to_string(),
            })
    }

    /// Executes one instruction; `index` is used for error reporting.
    pub fn step(&mut self, index: usize, instr: &Instruction) -> Result<(), CircuitError> {
        let wrap = |source| CircuitError::State { index, source };
        match instr {
            Instruction::Alloc { qubit, init } => {
                if self.names.contains(qubit) {
                    return Err(CircuitError::DoubleAlloc {
                        index,
                        name: qubit.clone(),
                    });
                }
                let ket = init.amplitudes();
                let next = match &self.register {
                    None => StateVector::single(ket),
                    Some(s) => s.append_qubit(ket),
                }
                .map_err(wrap)?;
                self.register = Some(next);
                self.names.push(qubit.clone());
            }
            Instruction::Apply { gate, targets } => {
                let slots = targets
                    .iter()
                    .map(|t| self.slot(index, t))
                    .collect::<Result<Vec<_>, _>>()?;
                let s = self.state(index, &targets[0])?;
                self.register = Some(state::apply_gate(s, gate, &slots).map_err(wrap)?);
            }
            Instruction::ApplyOracle {
                oracle,
                control,
                register,
            } => {
                let f =
                    *self
                        .oracles
                        .get(oracle)
                        .ok_or_else(|| CircuitError::UnresolvedOracle {
                            index,
                            name: oracle.clone(),
                        })?;
                let slots = [self.slot(index, control)?, self.slot(index, register)?];
                let s = self.state(index, control)?;
                self.register =
                    Some(state::apply_matrix(s, &oracle_unitary(f), &slots).map_err(wrap)?);
            }
            Instruction::Measure { qubit } => {
                let slot = self.slot(index, qubit)?;
                let s = self.state(index, qubit)?.clone();
                let m = measure_qubit_with(&s, slot, &mut self.rng).map_err(wrap)?;
                self.report.pre_measurement.push(s);
                self.report.measured.push(MeasuredBit {
                    qubit: qubit.clone(),
                    bit: m.bit,
                    probability: m.probability,
                });
                self.register = Some(m.post_state);
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> RunReport {
        self.report.final_state = self.register;
        self.report
    }
}

fn check_oracles(c: &Circuit, oracles: &HashMap<String, OracleFn>) -> Result<(), CircuitError> {
    for (index, instr) in c.instructions.iter().enumerate() {
        if let Instruction::ApplyOracle { oracle, .. } = instr {
            if !oracles.contains_key(oracle) {
                return Err(CircuitError::UnresolvedOracle {
                    index,
                    name: oracle.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Runs `c` once. Oracle names are resolved before any instruction executes.
pub fn run_circuit(
    c: &Circuit,
    oracles: &HashMap<String, OracleFn>,
    seed: RngSeed,
) -> Result<RunReport, CircuitError> {
    check_oracles(c, oracles)?;
    let mut machine = Machine::new(oracles, seed.rng());
    for (index, instr) in c.instructions.iter().enumerate() {
        machine.step(index, instr)?;
    }
    Ok(machine.finish())
}

/// Runs `shots` independent executions, shot `i` seeded with
/// `root.derive(i)`. The returned report is shot 0's, with `shots` filled in.
pub fn run_shots(
    c: &Circuit,
    oracles: &HashMap<String, OracleFn>,
    root: RngSeed,
    shots: usize,
) -> Result<RunReport, CircuitError> {
    assert!(shots > 0, "at least one shot");
    let mut counts = BTreeMap::new();
    let mut first = None;
    for i in 0..shots {
        let report = run_circuit(c, oracles, root.derive(i as u64))?;
        *counts.entry(report.outcome()).or_insert(0) += 1;
        if first.is_none() {
            first = Some(report);
        }
    }
    let mut report = first.expect("shots > 0");
    report.shots = Some(counts);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Constant,
    Balanced,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Constant => "CONSTANT",
            Verdict::Balanced => "BALANCED",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeutschVerdict {
    pub verdict: Verdict,
    pub measured_bit: u8,
    /// Probability of `measured_bit` just before measurement.
    pub probability: f64,
}

/// Name under which [`deutsch_circuit`] refers to its oracle.
pub const DEUTSCH_ORACLE: &str = "f";

/// `x ← H|0⟩; y ← H|1⟩; N_f x y; H x; measure x`.
pub fn deutsch_circuit() -> Circuit {
    Circuit::new(deutsch_steps(true)).expect("well scoped")
}

fn deutsch_steps(with_measure: bool) -> Vec<Instruction> {
    let mut steps = vec![
        Instruction::Alloc {
            qubit: "x".into(),
            init: InitialKet::HZero,
        },
        Instruction::Alloc {
            qubit: "y".into(),
            init: InitialKet::HOne,
        },
        Instruction::ApplyOracle {
            oracle: DEUTSCH_ORACLE.into(),
            control: "x".into(),
            register: "y".into(),
        },
        Instruction::Apply {
            gate: gateset::hadamard(),
            targets: vec!["x".into()],
        },
    ];
    if with_measure {
        steps.push(Instruction::Measure { qubit: "x".into() });
    }
    steps
}

pub fn oracle_table(f: OracleFn) -> HashMap<String, OracleFn> {
    HashMap::from([(DEUTSCH_ORACLE.to_string(), f)])
}

/// Decides whether `f` is constant with a single oracle query.
/// Bit 0 means constant, bit 1 balanced.
pub fn deutsch(f: OracleFn, seed: RngSeed) -> DeutschVerdict {
    let report =
        run_circuit(&deutsch_circuit(), &oracle_table(f), seed).expect("built-in circuit runs");
    let m = &report.measured[0];
    DeutschVerdict {
        verdict: if m.bit == 0 {
            Verdict::Constant
        } else {
            Verdict::Balanced
        },
        measured_bit: m.bit,
        probability: m.probability,
    }
}

/// Pre-measurement state of `c`: the register after every non-measurement
/// instruction has run.
pub fn unitary_state(
    c: &Circuit,
    oracles: &HashMap<String, OracleFn>,
) -> Result<Option<StateVector>, CircuitError> {
    check_oracles(c, oracles)?;
    let mut machine = Machine::new(oracles, RngSeed::default().rng());
    for (index, instr) in c.instructions.iter().enumerate() {
        if !matches!(instr, Instruction::Measure { .. }) {
            machine.step(index, instr)?;
        }
    }
    Ok(machine.finish().final_state)
}

/// True iff both circuits reach the same pre-measurement state within
/// `1e-12` for every oracle bound to [`DEUTSCH_ORACLE`].
pub fn circuits_agree(a: &Circuit, b: &Circuit) -> bool {
    OracleFn::ALL.into_iter().all(|f| {
        let table = oracle_table(f);
        match (unitary_state(a, &table), unitary_state(b, &table)) {
            (Ok(Some(sa)), Ok(Some(sb))) => sa.max_abs_diff(&sb) <= 1e-12,
            (Ok(None), Ok(None)) => true,
            _ => false,
        }
    })
}

/// The nested-preparation reading `N_f|x ← H|0⟩, y ← H|1⟩⟩ ∧ H|x⟩`,
/// evaluated as whole-register matrices: the prepared product state is fed
/// to the oracle and then to `H ⊗ I`.
pub fn deutsch_nested_state(f: OracleFn) -> StateVector {
    let col = |k: InitialKet| ComplexMatrix::column(k.amplitudes().to_vec()).expect("2x1");
    let prepared = kron(&col(InitialKet::HZero), &col(InitialKet::HOne));
    let after_oracle = oracle_unitary(f).apply(prepared.entries());
    let h_on_x = kron(gateset::hadamard().matrix(), &ComplexMatrix::identity(2));
    StateVector::from_amplitudes(h_on_x.apply(&after_oracle)).expect("unitary evolution")
}

/// Checks that the nested and sequential readings of the Deutsch definition
/// produce the same pre-measurement state for all four oracles.
pub fn deutsch_seq_equivalence_check() -> bool {
    let sequential = Circuit::new(deutsch_steps(false)).expect("well scoped");
    OracleFn::ALL.into_iter().all(|f| {
        let seq = unitary_state(&sequential, &oracle_table(f))
            .expect("built-in circuit runs")
            .expect("two qubits allocated");
        seq.max_abs_diff(&deutsch_nested_state(f)) <= 1e-12
    })
}
