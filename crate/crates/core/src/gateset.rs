//! Elementary gates in two forms: the basis-state mapping that defines each one
//! axiomatically, and the unitary matrix realizing it.
//!
//! Qubit order is big-endian: in `|xy⟩` the first qubit is the most
//! significant bit, so the basis index of `|xy⟩` is `2x + y`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use thiserror::Error;

use crate::linalg::{
    self, approx_equal, inverse, is_unitary, mat_mul, Complex, ComplexMatrix, Tolerance, ONE, ZERO,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GateError {
    #[error("arity must be 1 or 2, got {0}")]
    BadArity(usize),
    #[error("ket |{label}> does not have arity {arity}")]
    LabelArity { label: KetLabel, arity: usize },
    #[error("ket expression has no terms")]
    EmptyExpr,
    #[error("ket expression repeats |{0}>")]
    RepeatedLabel(KetLabel),
    #[error("ket expression mixes 1- and 2-qubit labels")]
    MixedArity,
    #[error("ket expression is not normalized: sum of squared amplitudes is {0}")]
    NotNormalized(f64),
    #[error("mapping lists input |{0}> more than once")]
    DuplicateInput(KetLabel),
    #[error("mapping inputs span only {rank} of {dim} dimensions")]
    NotTotal { rank: usize, dim: usize },
    #[error("mapping for |{input}> contradicts the other pairs (residual {residual:.3e})")]
    Inconsistent { input: KetLabel, residual: f64 },
    #[error("mapping is not unitary: |{input}> and |{other}> lose their inner product")]
    NotUnitary { input: KetLabel, other: KetLabel },
    #[error("phase angle must be finite, got {0}")]
    NonFinitePhase(f64),
    #[error("gate matrix must be {expected}x{expected}, got {rows}x{cols}")]
    MatrixShape {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("gate matrix is not unitary")]
    MatrixNotUnitary,
    #[error("gate mapping disagrees with its matrix")]
    MappingMismatch,
    #[error("unknown gate {0:?}")]
    UnknownGate(String),
    #[error("gate {0} requires a phase parameter")]
    MissingParameter(String),
}

/// A basis or balanced ket label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KetLabel {
    Zero,
    One,
    Plus,
    Minus,
    /// A two-qubit computational basis state `|xy⟩`.
    Pair(bool, bool),
}

impl KetLabel {
    pub fn arity(self) -> usize {
        match self {
            KetLabel::Pair(..) => 2,
            _ => 1,
        }
    }

    /// Amplitudes over the computational basis.
    pub fn vector(self) -> Vec<Complex> {
        let h = Complex::new(FRAC_1_SQRT_2, 0.0);
        match self {
            KetLabel::Zero => vec![ONE, ZERO],
            KetLabel::One => vec![ZERO, ONE],
            KetLabel::Plus => vec![h, h],
            KetLabel::Minus => vec![h, -h],
            KetLabel::Pair(x, y) => {
                let mut v = vec![ZERO; 4];
                v[2 * x as usize + y as usize] = ONE;
                v
            }
        }
    }
}

impl fmt::Display for KetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KetLabel::Zero => f.write_str("0"),
            KetLabel::One => f.write_str("1"),
            KetLabel::Plus => f.write_str("+"),
            KetLabel::Minus => f.write_str("-"),
            KetLabel::Pair(x, y) => write!(f, "{}{}", *x as u8, *y as u8),
        }
    }
}

/// A weighted sum of distinct kets, such as `e^{iφ}|1⟩` or `−|1⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct KetExpr {
    terms: Vec<(Complex, KetLabel)>,
}

impl KetExpr {
    pub fn new(terms: Vec<(Complex, KetLabel)>) -> Result<Self, GateError> {
        let first = terms.first().ok_or(GateError::EmptyExpr)?.1;
        for (i, (_, label)) in terms.iter().enumerate() {
            if label.arity() != first.arity() {
                return Err(GateError::MixedArity);
            }
            if terms[..i].iter().any(|(_, l)| l == label) {
                return Err(GateError::RepeatedLabel(*label));
            }
        }
        let weight: f64 = terms.iter().map(|(a, _)| a.norm_sqr()).sum();
        if (weight - 1.0).abs() > linalg::DEFAULT_EPS {
            return Err(GateError::NotNormalized(weight));
        }
        Ok(KetExpr { terms })
    }

    pub fn ket(label: KetLabel) -> Self {
        KetExpr {
            terms: vec![(ONE, label)],
        }
    }

    pub fn scaled(amplitude: Complex, label: KetLabel) -> Result<Self, GateError> {
        Self::new(vec![(amplitude, label)])
    }

    pub fn terms(&self) -> &[(Complex, KetLabel)] {
        &self.terms
    }

    pub fn arity(&self) -> usize {
        self.terms[0].1.arity()
    }

    pub fn vector(&self) -> Vec<Complex> {
        let mut out = vec![ZERO; 1 << self.arity()];
        for (amp, label) in &self.terms {
            for (o, v) in out.iter_mut().zip(label.vector()) {
                *o += amp * v;
            }
        }
        out
    }
}

impl fmt::Display for KetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (amp, label)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if *amp == -ONE {
                write!(f, "-|{label}>")?;
            } else if *amp != ONE {
                write!(f, "({amp})|{label}>")?;
            } else {
                write!(f, "|{label}>")?;
            }
        }
        Ok(())
    }
}

/// A relational gate definition: a list of `input ↦ output` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMapping {
    arity: usize,
    pairs: Vec<(KetLabel, KetExpr)>,
}

impl BasisMapping {
    /// Checks arities and input distinctness. Totality and unitarity are
    /// established by [`mapping_to_matrix`].
    pub fn new(arity: usize, pairs: Vec<(KetLabel, KetExpr)>) -> Result<Self, GateError> {
        if arity != 1 && arity != 2 {
            return Err(GateError::BadArity(arity));
        }
        for (i, (input, output)) in pairs.iter().enumerate() {
            if input.arity() != arity {
                return Err(GateError::LabelArity {
                    label: *input,
                    arity,
                });
            }
            if output.arity() != arity {
                return Err(GateError::LabelArity {
                    label: output.terms()[0].1,
                    arity,
                });
            }
            if pairs[..i].iter().any(|(l, _)| l == input) {
                return Err(GateError::DuplicateInput(*input));
            }
        }
        Ok(BasisMapping { arity, pairs })
    }

    /// Shorthand for mappings whose outputs are single unweighted kets.
    pub fn simple(arity: usize, pairs: &[(KetLabel, KetLabel)]) -> Result<Self, GateError> {
        Self::new(
            arity,
            pairs.iter().map(|&(i, o)| (i, KetExpr::ket(o))).collect(),
        )
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn pairs(&self) -> &[(KetLabel, KetExpr)] {
        &self.pairs
    }
}

fn inner(a: &[Complex], b: &[Complex]) -> Complex {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn max_diff(a: &[Complex], b: &[Complex]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Turns a relational definition into the unique matrix `U` with
/// `U|input⟩ = output` for every pair.
///
/// A maximal linearly independent subset of the inputs fixes `U`; every other
/// pair must then agree with it. Column `j` of the result is the image of
/// computational basis state `j`.
pub fn mapping_to_matrix(m: &BasisMapping) -> Result<ComplexMatrix, GateError> {
    let dim = 1 << m.arity;
    let tol = Tolerance::default();

    // Greedy Gram-Schmidt selection of independent inputs.
    let mut basis: Vec<Vec<Complex>> = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    for (k, (input, _)) in m.pairs.iter().enumerate() {
        let mut v = input.vector();
        for b in &basis {
            let proj = inner(b, &v);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= proj * bi;
            }
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-9 {
            basis.push(v.into_iter().map(|c| c / norm).collect());
            chosen.push(k);
        }
        if chosen.len() == dim {
            break;
        }
    }
    if chosen.len() < dim {
        return Err(GateError::NotTotal {
            rank: chosen.len(),
            dim,
        });
    }

    // Columns of `inputs` / `outputs` are the chosen kets: U · inputs = outputs.
    let mut inputs = vec![ZERO; dim * dim];
    let mut outputs = vec![ZERO; dim * dim];
    for (col, &k) in chosen.iter().enumerate() {
        let (input, output) = &m.pairs[k];
        for (row, (a, b)) in input.vector().into_iter().zip(output.vector()).enumerate() {
            inputs[row * dim + col] = a;
            outputs[row * dim + col] = b;
        }
    }
    let inputs = ComplexMatrix::new(dim, dim, inputs).expect("finite square");
    let outputs = ComplexMatrix::new(dim, dim, outputs).expect("finite square");
    let inv = inverse(&inputs).map_err(|_| GateError::NotTotal { rank: dim - 1, dim })?;
    let u = mat_mul(&outputs, &inv).expect("square product");

    for (input, output) in &m.pairs {
        let residual = max_diff(&u.apply(&input.vector()), &output.vector());
        if residual > tol.eps() {
            return Err(GateError::Inconsistent {
                input: *input,
                residual,
            });
        }
    }

    if !is_unitary(&u, tol) {
        return Err(offending_pair(m));
    }
    Ok(u)
}

/// The first pair whose image fails to preserve an inner product with an
/// earlier pair (or its own norm).
fn offending_pair(m: &BasisMapping) -> GateError {
    let vecs: Vec<_> = m
        .pairs
        .iter()
        .map(|(i, o)| (i.vector(), o.vector()))
        .collect();
    for j in 0..vecs.len() {
        for i in 0..=j {
            let before = inner(&vecs[i].0, &vecs[j].0);
            let after = inner(&vecs[i].1, &vecs[j].1);
            if (before - after).norm() > linalg::DEFAULT_EPS {
                return GateError::NotUnitary {
                    input: m.pairs[j].0,
                    other: m.pairs[i].0,
                };
            }
        }
    }
    let last = m.pairs.last().map(|p| p.0).unwrap_or(KetLabel::Zero);
    GateError::NotUnitary {
        input: last,
        other: last,
    }
}

/// A named unitary acting on one or two qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    name: String,
    arity: usize,
    matrix: ComplexMatrix,
    mapping: Option<BasisMapping>,
    parameter: Option<f64>,
}

impl Gate {
    /// Builds a gate, enforcing unitarity and mapping/matrix agreement.
    pub fn new(
        name: impl Into<String>,
        matrix: ComplexMatrix,
        mapping: Option<BasisMapping>,
    ) -> Result<Self, GateError> {
        let gate = Self::unchecked(name, matrix, mapping)?;
        let tol = Tolerance::default();
        if !is_unitary(&gate.matrix, tol) {
            return Err(GateError::MatrixNotUnitary);
        }
        if let Some(m) = &gate.mapping {
            if !approx_equal(&mapping_to_matrix(m)?, &gate.matrix, tol) {
                return Err(GateError::MappingMismatch);
            }
        }
        Ok(gate)
    }

    /// Builds a gate checking only the matrix shape. Used for subjects handed
    /// to the checker, which may be deliberately malformed.
    pub fn unchecked(
        name: impl Into<String>,
        matrix: ComplexMatrix,
        mapping: Option<BasisMapping>,
    ) -> Result<Self, GateError> {
        let arity = match matrix.shape() {
            (2, 2) => 1,
            (4, 4) => 2,
            (rows, cols) => {
                let expected = if rows <= 2 { 2 } else { 4 };
                return Err(GateError::MatrixShape {
                    expected,
                    rows,
                    cols,
                });
            }
        };
        if let Some(m) = &mapping {
            if m.arity() != arity {
                return Err(GateError::BadArity(m.arity()));
            }
        }
        Ok(Gate {
            name: name.into(),
            arity,
            matrix,
            mapping,
            parameter: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn mapping(&self) -> Option<&BasisMapping> {
        self.mapping.as_ref()
    }

    pub fn parameter(&self) -> Option<f64> {
        self.parameter
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.parameter {
            Some(p) => write!(
                f,
                "{}({})",
                self.name,
                crate::speclang::format_significant(p, 9)
            ),
            None => f.write_str(&self.name),
        }
    }
}

fn builtin(name: &str, rows: &[[Complex; 2]], mapping: BasisMapping) -> Gate {
    let matrix = ComplexMatrix::from_rows(rows).expect("2x2 literal");
    Gate::new(name, matrix, Some(mapping)).expect("built-in gate is well formed")
}

pub fn identity_gate() -> Gate {
    use KetLabel::*;
    let mapping = BasisMapping::simple(1, &[(Zero, Zero), (One, One)]).expect("valid");
    builtin("I", &[[ONE, ZERO], [ZERO, ONE]], mapping)
}

pub fn pauli_x() -> Gate {
    use KetLabel::*;
    let mapping = BasisMapping::simple(1, &[(Zero, One), (One, Zero)]).expect("valid");
    builtin("X", &[[ZERO, ONE], [ONE, ZERO]], mapping)
}

pub fn phase_shift(phi: f64) -> Result<Gate, GateError> {
    if !phi.is_finite() {
        return Err(GateError::NonFinitePhase(phi));
    }
    let phase = Complex::from_polar(1.0, phi);
    let mapping = BasisMapping::new(
        1,
        vec![
            (KetLabel::Zero, KetExpr::ket(KetLabel::Zero)),
            (KetLabel::One, KetExpr::scaled(phase, KetLabel::One)?),
        ],
    )?;
    let mut gate = builtin("R_phi", &[[ONE, ZERO], [ZERO, phase]], mapping);
    gate.parameter = Some(phi);
    Ok(gate)
}

pub fn pauli_z() -> Gate {
    let mapping = BasisMapping::new(
        1,
        vec![
            (KetLabel::Zero, KetExpr::ket(KetLabel::Zero)),
            (
                KetLabel::One,
                KetExpr::scaled(-ONE, KetLabel::One).expect("unit weight"),
            ),
        ],
    )
    .expect("valid");
    builtin("Z", &[[ONE, ZERO], [ZERO, -ONE]], mapping)
}

pub fn hadamard() -> Gate {
    use KetLabel::*;
    let mapping =
        BasisMapping::simple(1, &[(Zero, Plus), (Plus, Zero), (One, Minus), (Minus, One)])
            .expect("valid");
    let h = Complex::new(FRAC_1_SQRT_2, 0.0);
    builtin("H", &[[h, h], [h, -h]], mapping)
}

pub fn cnot() -> Gate {
    let pairs: Vec<_> = [false, true]
        .iter()
        .flat_map(|&x| [false, true].map(|y| (KetLabel::Pair(x, y), KetLabel::Pair(x, x ^ y))))
        .collect();
    let mapping = BasisMapping::simple(2, &pairs).expect("valid");
    let mut entries = vec![ZERO; 16];
    for (input, output) in &pairs {
        let col = input.vector().iter().position(|&c| c == ONE).unwrap();
        let row = output.vector().iter().position(|&c| c == ONE).unwrap();
        entries[row * 4 + col] = ONE;
    }
    let matrix = ComplexMatrix::new(4, 4, entries).expect("4x4");
    Gate::new("CNOT", matrix, Some(mapping)).expect("built-in gate is well formed")
}

/// Resolves a canonical gate name. `R_phi` needs `parameter`.
pub fn by_name(name: &str, parameter: Option<f64>) -> Result<Gate, GateError> {
    match name {
        "I" => Ok(identity_gate()),
        "X" => Ok(pauli_x()),
        "Z" => Ok(pauli_z()),
        "H" => Ok(hadamard()),
        "CNOT" => Ok(cnot()),
        "R_phi" => phase_shift(parameter.ok_or_else(|| GateError::MissingParameter(name.into()))?),
        other => Err(GateError::UnknownGate(other.to_string())),
    }
}

/// Every built-in gate, with `R_phi` instantiated at `π/2`.
pub fn builtins() -> Vec<Gate> {
    vec![
        identity_gate(),
        pauli_x(),
        phase_shift(std::f64::consts::FRAC_PI_2).expect("finite"),
        pauli_z(),
        hadamard(),
        cnot(),
    ]
}
