//! Verification passes over observables, gates and programs.
//!
//! Checking is total: every finding becomes an entry in a [`CheckReport`],
//! never an error.

use std::fmt;

use crate::circuit::{Machine, OracleFn};
use crate::gateset::{mapping_to_matrix, Gate};
use crate::linalg::{
    approx_equal, conjugate_transpose, eigenvalues_2x2, is_unitary, ComplexMatrix, Tolerance,
};
use crate::speclang::{compile, scope_errors, Program};
use crate::state::{RngSeed, NORM_EPS};

/// Seed used when a program is simulated for its norm trace.
pub const CHECK_SEED: RngSeed = RngSeed(42);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    Obs1,
    Obs2,
    Obs3,
    GateU,
    GateM,
    GateInj,
    ProgScope,
    ProgNorm,
}

impl RuleId {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::Obs1 => "OBS-1",
            RuleId::Obs2 => "OBS-2",
            RuleId::Obs3 => "OBS-3",
            RuleId::GateU => "GATE-U",
            RuleId::GateM => "GATE-M",
            RuleId::GateInj => "GATE-INJ",
            RuleId::ProgScope => "PROG-SCOPE",
            RuleId::ProgNorm => "PROG-NORM",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            RuleId::Obs1 => "observable is a complex square matrix",
            RuleId::Obs2 => "observable equals its own conjugate transpose",
            RuleId::Obs3 => "main-diagonal entries and eigenvalues are real",
            RuleId::GateU => "gate matrix is unitary",
            RuleId::GateM => "basis mapping agrees with the gate matrix",
            RuleId::GateInj => "distinct mapping inputs have distinct outputs",
            RuleId::ProgScope => "names are declared before use and allocated once",
            RuleId::ProgNorm => "state stays normalized after every instruction",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleResult {
    pub rule: RuleId,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub subject: String,
    pub checks: Vec<RuleResult>,
}

impl CheckReport {
    pub fn new(subject: impl Into<String>) -> Self {
        CheckReport {
            subject: subject.into(),
            checks: Vec::new(),
        }
    }

    fn record(&mut self, rule: RuleId, ok: bool, detail: impl Into<String>) {
        self.checks.push(RuleResult {
            rule,
            status: Status::from_bool(ok),
            detail: detail.into(),
        });
    }

    pub fn overall(&self) -> Status {
        Status::from_bool(self.checks.iter().all(|c| c.status == Status::Pass))
    }

    pub fn passed(&self) -> bool {
        self.overall() == Status::Pass
    }

    pub fn status_of(&self, rule: RuleId) -> Option<Status> {
        self.checks
            .iter()
            .find(|c| c.rule == rule)
            .map(|c| c.status)
    }

    /// Appends another report's entries, prefixing details with its subject.
    pub fn absorb(&mut self, other: CheckReport) {
        for mut c in other.checks {
            c.detail = format!("{}: {}", other.subject, c.detail);
            self.checks.push(c);
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.subject)?;
        for c in &self.checks {
            writeln!(f, "  {:<10} {}  {}", c.rule, c.status, c.detail)?;
        }
        write!(f, "overall: {}", self.overall())
    }
}

/// Checks the three observable requirements: square, self-adjoint, real
/// diagonal and (for 2x2) real spectrum.
///
/// The eigenvalue-equals-diagonal-entry clause holds only in the eigenbasis and
/// is not enforced.
pub fn check_observable(m: &ComplexMatrix, tol: Tolerance) -> CheckReport {
    let mut report = CheckReport::new(format!("observable {}x{}", m.rows(), m.cols()));
    if !m.is_square() {
        report.record(
            RuleId::Obs1,
            false,
            format!("{}x{} is not square", m.rows(), m.cols()),
        );
        report.record(RuleId::Obs2, false, "not square");
        report.record(RuleId::Obs3, false, "not square");
        return report;
    }
    let n = m.rows();
    report.record(RuleId::Obs1, true, format!("square of order {n}"));

    let gap = m
        .max_abs_diff(&conjugate_transpose(m))
        .expect("square matrix matches its adjoint's shape");
    let hermitian = gap <= tol.eps();
    report.record(
        RuleId::Obs2,
        hermitian,
        format!("max |c_ij - conj(c_ji)| = {gap:.3e}"),
    );

    let worst_diag = (0..n).map(|j| m.get(j, j).im.abs()).fold(0.0, f64::max);
    let diag_real = worst_diag <= tol.eps();
    let mut detail = format!("max |Im c_jj| = {worst_diag:.3e}");
    let spectrum_real = if n == 2 {
        let (a, b) = eigenvalues_2x2(m).expect("2x2");
        detail.push_str(&format!("; eigenvalues {a:.6}, {b:.6}"));
        a.im.abs() <= tol.eps() && b.im.abs() <= tol.eps()
    } else if hermitian {
        detail.push_str("; real spectrum implied by OBS-2");
        true
    } else {
        detail
            .push_str("; real spectrum not established (OBS-2 failed, no eigensolver beyond 2x2)");
        false
    };
    detail.push_str("; lambda = c_jj only required in the eigenbasis, not checked");
    report.record(RuleId::Obs3, diag_real && spectrum_real, detail);
    report
}

/// Checks unitarity, mapping/matrix agreement and mapping injectivity.
pub fn check_gate(g: &Gate, tol: Tolerance) -> CheckReport {
    let mut report = CheckReport::new(format!("gate {g}"));
    report.record(
        RuleId::GateU,
        is_unitary(g.matrix(), tol),
        "U U^dagger = U^dagger U = I",
    );

    match g.mapping() {
        None => {
            report.record(RuleId::GateM, true, "no mapping given");
            report.record(RuleId::GateInj, true, "no mapping given");
        }
        Some(mapping) => {
            match mapping_to_matrix(mapping) {
                Ok(m) if approx_equal(&m, g.matrix(), tol) => {
                    report.record(RuleId::GateM, true, "mapping reproduces the matrix")
                }
                Ok(m) => {
                    let gap = m.max_abs_diff(g.matrix()).unwrap_or(f64::INFINITY);
                    report.record(
                        RuleId::GateM,
                        false,
                        format!("mapping differs by {gap:.3e}"),
                    )
                }
                Err(e) => report.record(RuleId::GateM, false, e.to_string()),
            }

            let pairs = mapping.pairs();
            let collision = pairs.iter().enumerate().find_map(|(j, (input, out))| {
                let v = out.vector();
                pairs[..j].iter().find_map(|(other, o)| {
                    let same = o
                        .vector()
                        .iter()
                        .zip(&v)
                        .all(|(a, b)| (a - b).norm() <= tol.eps());
                    same.then_some((*other, *input))
                })
            });
            match collision {
                None => report.record(
                    RuleId::GateInj,
                    true,
                    format!("{} distinct images", pairs.len()),
                ),
                Some((a, b)) => report.record(
                    RuleId::GateInj,
                    false,
                    format!("|{a}> and |{b}> map to the same state"),
                ),
            }
        }
    }
    report
}

/// Static scoping plus a simulated norm trace of the compiled program.
pub fn check_program(p: &Program) -> CheckReport {
    let mut report = CheckReport::new("program");

    let mut problems: Vec<String> = scope_errors(p).iter().map(ToString::to_string).collect();
    for (i, d) in p.oracle_decls.iter().enumerate() {
        if p.oracle_decls[..i].iter().any(|e| e.name == d.name) {
            problems.push(format!("{}: oracle {} declared twice", d.loc, d.name));
        }
    }
    if problems.is_empty() {
        report.record(RuleId::ProgScope, true, "all names resolved");
    } else {
        report.record(RuleId::ProgScope, false, problems.join("; "));
        report.record(RuleId::ProgNorm, false, "not simulated: scope errors");
        return report;
    }

    let (circuit, oracles) = match compile(p) {
        Ok(c) => c,
        Err(e) => {
            report.record(RuleId::ProgNorm, false, format!("not simulated: {e}"));
            return report;
        }
    };
    let mut machine = Machine::new(&oracles, CHECK_SEED.rng());
    let mut worst: f64 = 0.0;
    for (index, instr) in circuit.instructions().iter().enumerate() {
        if let Err(e) = machine.step(index, instr) {
            report.record(RuleId::ProgNorm, false, format!("simulation failed: {e}"));
            return report;
        }
        let norm = machine.register().map_or(1.0, |s| s.norm_sqr());
        worst = worst.max((norm - 1.0).abs());
        if worst > NORM_EPS {
            report.record(
                RuleId::ProgNorm,
                false,
                format!("instruction {index}: squared norm {norm}"),
            );
            return report;
        }
    }
    report.record(
        RuleId::ProgNorm,
        true,
        format!(
            "{} instruction(s), max |norm^2 - 1| = {worst:.3e}",
            circuit.len()
        ),
    );
    report
}

/// Gates and oracles a program uses, in first-use order without repeats.
pub fn program_gates(p: &Program) -> Vec<Gate> {
    use crate::circuit::oracle_gate;
    use crate::speclang::StatementKind;

    let mut gates: Vec<Gate> = Vec::new();
    for s in &p.statements {
        let gate = match &s.kind {
            StatementKind::Apply { gate, .. } => gate.to_gate().ok(),
            StatementKind::Oracle { oracle, .. } => p
                .oracle_decls
                .iter()
                .find(|d| &d.name == oracle)
                .map(|d| oracle_gate(d.oracle)),
            _ => None,
        };
        if let Some(g) = gate {
            if !gates.contains(&g) {
                gates.push(g);
            }
        }
    }
    gates
}

/// Every oracle as a gate; handy for batch checks.
pub fn oracle_gates() -> Vec<Gate> {
    OracleFn::ALL
        .into_iter()
        .map(crate::circuit::oracle_gate)
        .collect()
}
