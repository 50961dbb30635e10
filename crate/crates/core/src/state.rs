//! Qubit registers as dense state vectors.
//!
//! Qubit 0 is the most significant bit of the basis index, so on an `n`-qubit
//! register qubit `q` lives at bit position `n - 1 - q`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gateset::Gate;
use crate::linalg::{Complex, ComplexMatrix, ONE, ZERO};

/// Largest register the simulator accepts (4096 amplitudes).
pub const MAX_QUBITS: usize = 12;

/// Norm tolerance for state-vector invariants.
pub const NORM_EPS: f64 = 1e-9;

/// Branches lighter than this are never selected by measurement.
const MIN_BRANCH: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("register must hold between 1 and {MAX_QUBITS} qubits, got {0}")]
    RegisterSize(usize),
    #[error("basis index {index} out of range for {n_qubits} qubit(s)")]
    IndexOutOfRange { index: usize, n_qubits: usize },
    #[error("amplitude count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("amplitude {0} is not finite")]
    NonFinite(usize),
    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),
    #[error("gate acts on {arity} qubit(s) but {given} target(s) were given")]
    ArityMismatch { arity: usize, given: usize },
    #[error("qubit {target} out of range for {n_qubits} qubit(s)")]
    TargetOutOfRange { target: usize, n_qubits: usize },
    #[error("qubit {0} targeted twice")]
    DuplicateTarget(usize),
}

/// Seed for the measurement PRNG (ChaCha8).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Seed of the `index`-th derived stream: `mix64(root ^ index)`.
    pub fn derive(self, index: u64) -> RngSeed {
        RngSeed(mix64(self.0 ^ index))
    }
}

/// The SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A normalized vector of `2^n` amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex>,
}

/// Outcome of measuring one qubit in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementResult {
    pub bit: u8,
    /// Probability of `bit` before the measurement.
    pub probability: f64,
    pub post_state: StateVector,
}

fn check_register(n_qubits: usize) -> Result<(), StateError> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        Err(StateError::RegisterSize(n_qubits))
    } else {
        Ok(())
    }
}

pub fn basis_state(n_qubits: usize, index: usize) -> Result<StateVector, StateError> {
    check_register(n_qubits)?;
    let dim = 1usize << n_qubits;
    if index >= dim {
        return Err(StateError::IndexOutOfRange { index, n_qubits });
    }
    let mut amplitudes = vec![ZERO; dim];
    amplitudes[index] = ONE;
    Ok(StateVector {
        n_qubits,
        amplitudes,
    })
}

impl StateVector {
    pub fn from_amplitudes(amplitudes: Vec<Complex>) -> Result<Self, StateError> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(StateError::NotPowerOfTwo(len));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_register(n_qubits)?;
        if let Some(k) = amplitudes.iter().position(|c| !c.is_finite()) {
            return Err(StateError::NonFinite(k));
        }
        let norm = norm_sqr(&amplitudes);
        if (norm - 1.0).abs() > NORM_EPS {
            return Err(StateError::NotNormalized(norm));
        }
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// Appends a fresh qubit in the single-qubit state `ket` as the new
    /// least significant qubit: `self ⊗ ket`.
    pub fn append_qubit(&self, ket: [Complex; 2]) -> Result<StateVector, StateError> {
        check_register(self.n_qubits + 1)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| [a * ket[0], a * ket[1]])
            .collect();
        Ok(StateVector {
            n_qubits: self.n_qubits + 1,
            amplitudes,
        })
    }

    /// A one-qubit register in the state `ket`.
    pub fn single(ket: [Complex; 2]) -> Result<StateVector, StateError> {
        Self::from_amplitudes(ket.to_vec())
    }

    /// Multiplies every amplitude by the same scalar (no renormalization).
    pub fn scaled(&self, factor: Complex) -> StateVector {
        StateVector {
            n_qubits: self.n_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    /// Largest entrywise modulus of the difference; infinite when the
    /// registers differ in size.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        if self.n_qubits != other.n_qubits {
            return f64::INFINITY;
        }
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn norm_sqr(amplitudes: &[Complex]) -> f64 {
    amplitudes.iter().map(|c| c.norm_sqr()).sum()
}

fn validate_targets(n_qubits: usize, arity: usize, targets: &[usize]) -> Result<(), StateError> {
    if targets.len() != arity {
        return Err(StateError::ArityMismatch {
            arity,
            given: targets.len(),
        });
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= n_qubits {
            return Err(StateError::TargetOutOfRange {
                target: t,
                n_qubits,
            });
        }
        if targets[..i].contains(&t) {
            return Err(StateError::DuplicateTarget(t));
        }
    }
    Ok(())
}

/// Applies `g` to the listed qubits; the first target is the gate's most
/// significant input.
pub fn apply_gate(s: &StateVector, g: &Gate, targets: &[usize]) -> Result<StateVector, StateError> {
    apply_matrix(s, g.matrix(), targets)
}

/// Applies a `2^k x 2^k` unitary to `k` target qubits by updating each group
/// of `2^k` amplitudes that differ only in the target bits.
pub fn apply_matrix(
    s: &StateVector,
    m: &ComplexMatrix,
    targets: &[usize],
) -> Result<StateVector, StateError> {
    let k = targets.len();
    let dim = m.rows();
    let arity = dim.trailing_zeros() as usize;
    if !m.is_square() || !dim.is_power_of_two() {
        return Err(StateError::ArityMismatch { arity, given: k });
    }
    validate_targets(s.n_qubits, arity, targets)?;

    let n = s.n_qubits;
    // masks[j] is the register bit driven by sub-index bit (k - 1 - j).
    let masks: Vec<usize> = targets.iter().map(|&t| 1 << (n - 1 - t)).collect();
    let target_mask: usize = masks.iter().sum();
    let offsets: Vec<usize> = (0..dim)
        .map(|sub| {
            masks
                .iter()
                .enumerate()
                .filter(|(j, _)| sub >> (k - 1 - j) & 1 == 1)
                .map(|(_, m)| m)
                .sum()
        })
        .collect();

    let mut out = s.amplitudes.clone();
    let mut group = vec![ZERO; dim];
    for base in (0..s.amplitudes.len()).filter(|i| i & target_mask == 0) {
        for (g, off) in group.iter_mut().zip(&offsets) {
            *g = s.amplitudes[base | off];
        }
        for (row, off) in offsets.iter().enumerate() {
            out[base | off] = m.row(row).iter().zip(&group).map(|(a, b)| a * b).sum();
        }
    }
    Ok(StateVector {
        n_qubits: n,
        amplitudes: out,
    })
}

/// Born-rule probabilities `|c_i|²`.
pub fn probabilities(s: &StateVector) -> Vec<f64> {
    s.amplitudes.iter().map(|c| c.norm_sqr()).collect()
}

/// Measures `target` with a PRNG seeded from `seed`.
pub fn measure_qubit(
    s: &StateVector,
    target: usize,
    seed: RngSeed,
) -> Result<MeasurementResult, StateError> {
    measure_qubit_with(s, target, &mut seed.rng())
}

/// Measures `target`, drawing one uniform sample from `rng`.
pub fn measure_qubit_with<R: Rng + ?Sized>(
    s: &StateVector,
    target: usize,
    rng: &mut R,
) -> Result<MeasurementResult, StateError> {
    if target >= s.n_qubits {
        return Err(StateError::TargetOutOfRange {
            target,
            n_qubits: s.n_qubits,
        });
    }
    let mask = 1usize << (s.n_qubits - 1 - target);
    let (mut p0, mut p1) = (0.0, 0.0);
    for (i, c) in s.amplitudes.iter().enumerate() {
        if i & mask == 0 {
            p0 += c.norm_sqr();
        } else {
            p1 += c.norm_sqr();
        }
    }
    let total = p0 + p1;
    let u: f64 = rng.gen();
    let bit = if p1 < MIN_BRANCH {
        0
    } else if p0 < MIN_BRANCH {
        1
    } else if u * total < p0 {
        0
    } else {
        1
    };
    let branch = if bit == 0 { p0 } else { p1 };
    let scale = 1.0 / branch.sqrt();
    let amplitudes = s
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if (i & mask != 0) == (bit == 1) {
                c * scale
            } else {
                ZERO
            }
        })
        .collect();
    Ok(MeasurementResult {
        bit,
        probability: branch / total,
        post_state: StateVector {
            n_qubits: s.n_qubits,
            amplitudes,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateset::{cnot, hadamard, pauli_x};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn r(x: f64) -> Complex {
        Complex::new(x, 0.0)
    }

    #[test]
    fn basis_states() {
        assert_eq!(basis_state(1, 0).unwrap().amplitudes(), &[ONE, ZERO]);
        assert_eq!(
            basis_state(2, 2).unwrap().amplitudes(),
            &[ZERO, ZERO, ONE, ZERO]
        );
        assert_eq!(
            basis_state(1, 2),
            Err(StateError::IndexOutOfRange {
                index: 2,
                n_qubits: 1
            })
        );
        assert_eq!(basis_state(13, 0), Err(StateError::RegisterSize(13)));
        assert_eq!(basis_state(0, 0), Err(StateError::RegisterSize(0)));
    }

    #[test]
    fn from_amplitudes_validates() {
        assert_eq!(
            StateVector::from_amplitudes(vec![ONE; 3]),
            Err(StateError::NotPowerOfTwo(3))
        );
        assert!(matches!(
            StateVector::from_amplitudes(vec![ONE, ONE]),
            Err(StateError::NotNormalized(_))
        ));
        assert_eq!(
            StateVector::from_amplitudes(vec![r(f64::NAN), ZERO]),
            Err(StateError::NonFinite(0))
        );
    }

    #[test]
    fn gate_application_examples() {
        let plus = apply_gate(&basis_state(1, 0).unwrap(), &hadamard(), &[0]).unwrap();
        let h = FRAC_1_SQRT_2;
        assert!(
            plus.max_abs_diff(&StateVector::from_amplitudes(vec![r(h), r(h)]).unwrap()) < 1e-15
        );

        let flipped = apply_gate(&basis_state(2, 0).unwrap(), &pauli_x(), &[1]).unwrap();
        assert_eq!(flipped, basis_state(2, 1).unwrap());

        let s = StateVector::from_amplitudes(vec![r(h), ZERO, r(h), ZERO]).unwrap();
        let bell = apply_gate(&s, &cnot(), &[0, 1]).unwrap();
        let expected = StateVector::from_amplitudes(vec![r(h), ZERO, ZERO, r(h)]).unwrap();
        assert!(bell.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn target_order_selects_control() {
        // Control on qubit 1, target on qubit 0: |01> -> |11>.
        let s = basis_state(2, 1).unwrap();
        let out = apply_gate(&s, &cnot(), &[1, 0]).unwrap();
        assert_eq!(out, basis_state(2, 3).unwrap());
    }

    #[test]
    fn gate_application_errors() {
        let s = basis_state(2, 0).unwrap();
        assert_eq!(
            apply_gate(&s, &cnot(), &[0]),
            Err(StateError::ArityMismatch { arity: 2, given: 1 })
        );
        assert_eq!(
            apply_gate(&s, &cnot(), &[1, 1]),
            Err(StateError::DuplicateTarget(1))
        );
        assert_eq!(
            apply_gate(&s, &hadamard(), &[2]),
            Err(StateError::TargetOutOfRange {
                target: 2,
                n_qubits: 2
            })
        );
    }

    #[test]
    fn probability_examples() {
        assert_eq!(probabilities(&basis_state(1, 1).unwrap()), vec![0.0, 1.0]);
        let h = FRAC_1_SQRT_2;
        for amps in [vec![r(h), r(h)], vec![r(h), r(-h)]] {
            let p = probabilities(&StateVector::from_amplitudes(amps).unwrap());
            assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn measurement_examples() {
        let one = basis_state(1, 1).unwrap();
        let m = measure_qubit(&one, 0, RngSeed(7)).unwrap();
        assert_eq!((m.bit, m.probability), (1, 1.0));
        assert_eq!(m.post_state, one);

        let h = FRAC_1_SQRT_2;
        let bell = StateVector::from_amplitudes(vec![r(h), ZERO, ZERO, r(h)]).unwrap();
        let mut seen = [false; 2];
        for seed in 0..64 {
            let m = measure_qubit(&bell, 0, RngSeed(seed)).unwrap();
            seen[m.bit as usize] = true;
            let expected = basis_state(2, if m.bit == 0 { 0 } else { 3 }).unwrap();
            assert!(m.post_state.max_abs_diff(&expected) < 1e-12);
            assert!((m.probability - 0.5).abs() < 1e-12);
        }
        assert!(seen[0] && seen[1]);

        assert!(matches!(
            measure_qubit(&bell, 2, RngSeed(0)),
            Err(StateError::TargetOutOfRange { .. })
        ));
    }

    #[test]
    fn measurement_is_reproducible() {
        let plus = apply_gate(&basis_state(1, 0).unwrap(), &hadamard(), &[0]).unwrap();
        for seed in 0..32 {
            assert_eq!(
                measure_qubit(&plus, 0, RngSeed(seed)),
                measure_qubit(&plus, 0, RngSeed(seed))
            );
        }
    }

    #[test]
    fn seed_derivation() {
        assert_eq!(RngSeed(42).derive(3), RngSeed(mix64(42 ^ 3)));
        assert_ne!(RngSeed(42).derive(0), RngSeed(42).derive(1));
        // Reference value of the SplitMix64 finalizer on zero.
        assert_eq!(mix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn append_qubit_is_big_endian() {
        let s = basis_state(1, 1)
            .unwrap()
            .append_qubit([ZERO, ONE])
            .unwrap();
        assert_eq!(s, basis_state(2, 3).unwrap());
        let mut big = basis_state(MAX_QUBITS, 0).unwrap();
        assert_eq!(
            big.append_qubit([ONE, ZERO]),
            Err(StateError::RegisterSize(MAX_QUBITS + 1))
        );
        big = big.scaled(ONE);
        assert_eq!(big.n_qubits(), MAX_QUBITS);
    }
}
