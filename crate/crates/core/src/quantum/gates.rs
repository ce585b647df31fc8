use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::state::{Amplitude, PureState};
use super::QuantumError;

/// One of the four dense-coding unitaries.
///
/// `IY` is `i·Y = Z·X = [[0, 1], [-1, 0]]`, the real form of Pauli Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliCode {
    I,
    Z,
    X,
    #[serde(rename = "iY")]
    IY,
}

impl PauliCode {
    pub const ALL: [PauliCode; 4] = [PauliCode::I, PauliCode::Z, PauliCode::X, PauliCode::IY];

    /// Standard dense-coding label: `I=00, Z=01, X=10, iY=11`.
    pub fn default_label(self) -> u8 {
        match self {
            PauliCode::I => 0b00,
            PauliCode::Z => 0b01,
            PauliCode::X => 0b10,
            PauliCode::IY => 0b11,
        }
    }

    /// Pauli frame `(x, z)` with the operator equal to `Z^z X^x` up to phase.
    pub fn frame(self) -> (bool, bool) {
        match self {
            PauliCode::I => (false, false),
            PauliCode::Z => (false, true),
            PauliCode::X => (true, false),
            PauliCode::IY => (true, true),
        }
    }

    pub fn from_frame(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliCode::I,
            (false, true) => PauliCode::Z,
            (true, false) => PauliCode::X,
            (true, true) => PauliCode::IY,
        }
    }

    pub fn matrix(self) -> [[Amplitude; 2]; 2] {
        let o = Amplitude::new(0.0, 0.0);
        let p = Amplitude::new(1.0, 0.0);
        let n = Amplitude::new(-1.0, 0.0);
        match self {
            PauliCode::I => [[p, o], [o, p]],
            PauliCode::Z => [[p, o], [o, n]],
            PauliCode::X => [[o, p], [p, o]],
            PauliCode::IY => [[o, p], [n, o]],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PauliCode::I => "I",
            PauliCode::Z => "Z",
            PauliCode::X => "X",
            PauliCode::IY => "iY",
        }
    }
}

impl fmt::Display for PauliCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The four maximally entangled two-qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiPlus,
        BellKind::PhiMinus,
        BellKind::PsiPlus,
        BellKind::PsiMinus,
    ];

    /// Pauli frame relative to `|Φ+⟩`: the state is `(Z^z X^x ⊗ I)|Φ+⟩` up to phase.
    pub fn frame(self) -> (bool, bool) {
        match self {
            BellKind::PhiPlus => (false, false),
            BellKind::PhiMinus => (false, true),
            BellKind::PsiPlus => (true, false),
            BellKind::PsiMinus => (true, true),
        }
    }

    pub fn from_frame(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => BellKind::PhiPlus,
            (false, true) => BellKind::PhiMinus,
            (true, false) => BellKind::PsiPlus,
            (true, true) => BellKind::PsiMinus,
        }
    }

    /// Two-bit label `x·2 + z`; coincides with the standard dense-coding table on `|Φ+⟩`.
    pub fn label(self) -> u8 {
        let (x, z) = self.frame();
        (u8::from(x) << 1) | u8::from(z)
    }

    /// Whether the two qubits disagree when both are measured in Z.
    pub fn z_anticorrelated(self) -> bool {
        self.frame().0
    }

    /// Whether the two qubits disagree when both are measured in X.
    pub fn x_anticorrelated(self) -> bool {
        self.frame().1
    }

    /// Amplitudes over `|00⟩, |01⟩, |10⟩, |11⟩`.
    pub fn amplitudes(self) -> [Amplitude; 4] {
        let h = Amplitude::new(FRAC_1_SQRT_2, 0.0);
        let o = Amplitude::new(0.0, 0.0);
        match self {
            BellKind::PhiPlus => [h, o, o, h],
            BellKind::PhiMinus => [h, o, o, -h],
            BellKind::PsiPlus => [o, h, h, o],
            BellKind::PsiMinus => [o, h, -h, o],
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BellKind::PhiPlus => "phi+",
            BellKind::PhiMinus => "phi-",
            BellKind::PsiPlus => "psi+",
            BellKind::PsiMinus => "psi-",
        }
    }
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

pub fn bell_state(kind: BellKind) -> PureState {
    PureState::from_parts(2, kind.amplitudes().to_vec())
}

/// Applies a Pauli on `slot`, identity elsewhere.
pub fn apply_pauli(state: &PureState, slot: usize, code: PauliCode) -> Result<PureState, QuantumError> {
    state.check_slot(slot)?;
    let m = code.matrix();
    let mask = state.mask(slot);
    let src = state.amplitudes();
    let mut out = src.to_vec();
    for i0 in (0..state.dim()).filter(|i| i & mask == 0) {
        let i1 = i0 | mask;
        let (a0, a1) = (src[i0], src[i1]);
        out[i0] = m[0][0] * a0 + m[0][1] * a1;
        out[i1] = m[1][0] * a0 + m[1][1] * a1;
    }
    Ok(PureState::from_parts(state.n_qubits(), out))
}
