use num_complex::Complex64;

use super::QuantumError;

/// A complex probability amplitude.
pub type Amplitude = Complex64;

pub const MAX_QUBITS: usize = 3;
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Exact pure state of one to three qubits.
///
/// Amplitudes are indexed by computational basis label with qubit 0 as the
/// most significant bit, so for two qubits the order is `|00⟩, |01⟩, |10⟩, |11⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amps: Vec<Amplitude>,
}

impl PureState {
    /// Builds a state from explicit amplitudes, checking size, finiteness and norm.
    pub fn new(n_qubits: usize, amps: Vec<Amplitude>) -> Result<Self, QuantumError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(QuantumError::QubitCount(n_qubits));
        }
        let expected = 1usize << n_qubits;
        if amps.len() != expected {
            return Err(QuantumError::AmplitudeCount {
                expected,
                got: amps.len(),
            });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QuantumError::NonFinite);
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(QuantumError::NotNormalized(norm_sqr.sqrt()));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Real-amplitude convenience constructor.
    pub fn from_real(n_qubits: usize, amps: &[f64]) -> Result<Self, QuantumError> {
        Self::new(n_qubits, amps.iter().map(|&re| Amplitude::new(re, 0.0)).collect())
    }

    /// The computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self, QuantumError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(QuantumError::QubitCount(n_qubits));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(QuantumError::InvalidSlot { slot: index, n_qubits });
        }
        let mut amps = vec![Amplitude::new(0.0, 0.0); dim];
        amps[index] = Amplitude::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Single-qubit `|+⟩`.
    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            n_qubits: 1,
            amps: vec![Amplitude::new(h, 0.0), Amplitude::new(h, 0.0)],
        }
    }

    /// Single-qubit `|−⟩`.
    pub fn minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            n_qubits: 1,
            amps: vec![Amplitude::new(h, 0.0), Amplitude::new(-h, 0.0)],
        }
    }

    /// Tensor product `self ⊗ other`; `self` supplies the leading qubits.
    pub fn tensor(&self, other: &PureState) -> Result<Self, QuantumError> {
        let n = self.n_qubits + other.n_qubits;
        if n > MAX_QUBITS {
            return Err(QuantumError::QubitCount(n));
        }
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Ok(Self { n_qubits: n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Computational-basis probabilities, used as the phase-free state digest.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub(crate) fn check_slot(&self, slot: usize) -> Result<(), QuantumError> {
        if slot >= self.n_qubits {
            Err(QuantumError::InvalidSlot {
                slot,
                n_qubits: self.n_qubits,
            })
        } else {
            Ok(())
        }
    }

    /// Bit mask selecting `slot` within a basis index.
    pub(crate) fn mask(&self, slot: usize) -> usize {
        1 << (self.n_qubits - 1 - slot)
    }

    /// Wraps an already-normalized amplitude vector produced internally.
    pub(crate) fn from_parts(n_qubits: usize, amps: Vec<Amplitude>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        Self { n_qubits, amps }
    }

    /// Rescales an unnormalized vector of squared norm `norm_sqr`.
    pub(crate) fn renormalized(n_qubits: usize, mut amps: Vec<Amplitude>, norm_sqr: f64) -> Self {
        let scale = norm_sqr.sqrt().recip();
        for a in &mut amps {
            *a *= scale;
        }
        Self { n_qubits, amps }
    }

    /// Copy with global phase fixed so the first nonzero amplitude is real-positive.
    pub fn phase_normalized(&self) -> Self {
        let pivot = self
            .amps
            .iter()
            .find(|a| a.norm() > NORM_TOLERANCE)
            .copied()
            .unwrap_or(Amplitude::new(1.0, 0.0));
        let rot = pivot.conj() / pivot.norm();
        Self {
            n_qubits: self.n_qubits,
            amps: self.amps.iter().map(|a| a * rot).collect(),
        }
    }

    /// Amplitude-level equality after fixing global phase.
    pub fn approx_eq(&self, other: &PureState, tol: f64) -> bool {
        if self.n_qubits != other.n_qubits {
            return false;
        }
        let a = self.phase_normalized();
        let b = other.phase_normalized();
        a.amps.iter().zip(&b.amps).all(|(x, y)| (x - y).norm() <= tol)
    }
}
