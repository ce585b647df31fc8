//! Sampled projective measurements.
//!
//! Every routine takes an explicit uniform draw in `[0, 1)` and picks the
//! outcome whose cumulative Born probability first exceeds it.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use super::gates::BellKind;
use super::state::{Amplitude, PureState};
use super::QuantumError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasBasis {
    Z,
    X,
    Bell,
}

impl MeasBasis {
    pub fn symbol(self) -> &'static str {
        match self {
            MeasBasis::Z => "Z",
            MeasBasis::X => "X",
            MeasBasis::Bell => "Bell",
        }
    }
}

/// Picks the first index whose cumulative weight exceeds `draw`, skipping
/// zero-weight outcomes so rounding never selects an impossible branch.
fn pick(weights: &[f64], draw: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if draw < acc {
            return i;
        }
    }
    last
}

/// Measures one qubit in Z or X and returns the bit with the collapsed state.
pub fn measure_qubit(
    state: &PureState,
    slot: usize,
    basis: MeasBasis,
    draw: f64,
) -> Result<(u8, PureState), QuantumError> {
    state.check_slot(slot)?;
    let mask = state.mask(slot);
    let amps = state.amplitudes();
    let zero = Amplitude::new(0.0, 0.0);
    match basis {
        MeasBasis::Z => {
            let p0: f64 = (0..state.dim())
                .filter(|i| i & mask == 0)
                .map(|i| amps[i].norm_sqr())
                .sum();
            let bit = pick(&[p0, 1.0 - p0], draw) as u8;
            let keep = if bit == 0 { 0 } else { mask };
            let out: Vec<Amplitude> = amps
                .iter()
                .enumerate()
                .map(|(i, &a)| if i & mask == keep { a } else { zero })
                .collect();
            let p = if bit == 0 { p0 } else { 1.0 - p0 };
            Ok((bit, PureState::renormalized(state.n_qubits(), out, p)))
        }
        MeasBasis::X => {
            // Components along |+⟩ and |−⟩ for each assignment of the other qubits.
            let mut plus = vec![zero; state.dim()];
            let mut minus = vec![zero; state.dim()];
            for i0 in (0..state.dim()).filter(|i| i & mask == 0) {
                let (a0, a1) = (amps[i0], amps[i0 | mask]);
                plus[i0] = (a0 + a1) * FRAC_1_SQRT_2;
                minus[i0] = (a0 - a1) * FRAC_1_SQRT_2;
            }
            let p0: f64 = plus.iter().map(|c| c.norm_sqr()).sum();
            let bit = pick(&[p0, 1.0 - p0], draw) as u8;
            let mut out = vec![zero; state.dim()];
            for i0 in (0..state.dim()).filter(|i| i & mask == 0) {
                let (c, sign) = if bit == 0 { (plus[i0], 1.0) } else { (minus[i0], -1.0) };
                out[i0] = c * FRAC_1_SQRT_2;
                out[i0 | mask] = c * (sign * FRAC_1_SQRT_2);
            }
            let p = if bit == 0 { p0 } else { 1.0 - p0 };
            Ok((bit, PureState::renormalized(state.n_qubits(), out, p)))
        }
        MeasBasis::Bell => Err(QuantumError::InvalidBasis),
    }
}

/// Joint Bell-basis measurement of the ordered pair `slots`.
///
/// The first slot plays the role of the left qubit in the Bell state
/// definitions; this only affects the sign of the collapsed `|Ψ−⟩`.
pub fn measure_bell_pair(
    state: &PureState,
    slots: (usize, usize),
    draw: f64,
) -> Result<(BellKind, PureState), QuantumError> {
    let (a, b) = slots;
    state.check_slot(a)?;
    state.check_slot(b)?;
    if a == b {
        return Err(QuantumError::InvalidSlot {
            slot: b,
            n_qubits: state.n_qubits(),
        });
    }
    let (ma, mb) = (state.mask(a), state.mask(b));
    let pair_mask = ma | mb;
    let amps = state.amplitudes();
    let index = |rest: usize, x: usize, y: usize| rest | if x == 1 { ma } else { 0 } | if y == 1 { mb } else { 0 };
    let rests: Vec<usize> = (0..state.dim()).filter(|i| i & pair_mask == 0).collect();

    // Overlap of the pair with each Bell state, per assignment of the remaining qubits.
    let overlaps: Vec<Vec<Amplitude>> = BellKind::ALL
        .iter()
        .map(|kind| {
            let beta = kind.amplitudes();
            rests
                .iter()
                .map(|&r| (0..4).map(|xy| beta[xy].conj() * amps[index(r, xy >> 1, xy & 1)]).sum())
                .collect()
        })
        .collect();
    let weights: Vec<f64> = overlaps
        .iter()
        .map(|c| c.iter().map(|z: &Amplitude| z.norm_sqr()).sum())
        .collect();
    let k = pick(&weights, draw);
    let kind = BellKind::ALL[k];
    let beta = kind.amplitudes();
    let mut out = vec![Amplitude::new(0.0, 0.0); state.dim()];
    for (ri, &r) in rests.iter().enumerate() {
        for xy in 0..4 {
            out[index(r, xy >> 1, xy & 1)] = beta[xy] * overlaps[k][ri];
        }
    }
    Ok((kind, PureState::renormalized(state.n_qubits(), out, weights[k])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{apply_pauli, bell_state, PauliCode};

    #[test]
    fn z_eigenstate() {
        let zero = PureState::basis(1, 0).unwrap();
        for draw in [0.0, 0.5, 0.999] {
            let (bit, post) = measure_qubit(&zero, 0, MeasBasis::Z, draw).unwrap();
            assert_eq!(bit, 0);
            assert!(post.approx_eq(&zero, 1e-12));
        }
    }

    #[test]
    fn phi_plus_collapse() {
        let s = bell_state(crate::quantum::BellKind::PhiPlus);
        let (bit, post) = measure_qubit(&s, 0, MeasBasis::Z, 0.3).unwrap();
        assert_eq!(bit, 0);
        assert!(post.approx_eq(&PureState::basis(2, 0).unwrap(), 1e-12));
        let (bit, post) = measure_qubit(&s, 0, MeasBasis::Z, 0.7).unwrap();
        assert_eq!(bit, 1);
        assert!(post.approx_eq(&PureState::basis(2, 3).unwrap(), 1e-12));
    }

    #[test]
    fn x_eigenstates() {
        for draw in [0.0, 0.42, 0.999] {
            let (bit, post) = measure_qubit(&PureState::plus(), 0, MeasBasis::X, draw).unwrap();
            assert_eq!(bit, 0);
            assert!(post.approx_eq(&PureState::plus(), 1e-12));
            let (bit, post) = measure_qubit(&PureState::minus(), 0, MeasBasis::X, draw).unwrap();
            assert_eq!(bit, 1);
            assert!(post.approx_eq(&PureState::minus(), 1e-12));
        }
    }

    #[test]
    fn bell_basis_rejected_for_single_qubit() {
        let s = PureState::plus();
        assert_eq!(
            measure_qubit(&s, 0, MeasBasis::Bell, 0.1),
            Err(QuantumError::InvalidBasis)
        );
        assert!(matches!(
            measure_qubit(&s, 1, MeasBasis::Z, 0.1),
            Err(QuantumError::InvalidSlot { .. })
        ));
    }

    #[test]
    fn bell_measurement_cases() {
        let phi = bell_state(BellKind::PhiPlus);
        for draw in [0.0, 0.5, 0.99] {
            assert_eq!(measure_bell_pair(&phi, (0, 1), draw).unwrap().0, BellKind::PhiPlus);
        }
        let iy = apply_pauli(&phi, 0, PauliCode::IY).unwrap();
        for draw in [0.0, 0.5, 0.99] {
            assert_eq!(measure_bell_pair(&iy, (0, 1), draw).unwrap().0, BellKind::PsiMinus);
        }
        let zz = PureState::basis(2, 0).unwrap();
        let (k, post) = measure_bell_pair(&zz, (0, 1), 0.25).unwrap();
        assert_eq!(k, BellKind::PhiPlus);
        assert!(post.approx_eq(&phi, 1e-12));
        assert_eq!(measure_bell_pair(&zz, (0, 1), 0.75).unwrap().0, BellKind::PhiMinus);
        assert!(matches!(
            measure_bell_pair(&zz, (1, 1), 0.5),
            Err(QuantumError::InvalidSlot { .. })
        ));
    }

    #[test]
    fn bell_measurement_on_three_qubits() {
        // |1⟩ ⊗ |Ψ+⟩ measured on the non-adjacent pair (2, 0) is not a Bell state,
        // but measuring on (1, 2) must return Ψ+ and leave qubit 0 alone.
        let s = PureState::basis(1, 1)
            .unwrap()
            .tensor(&bell_state(BellKind::PsiPlus))
            .unwrap();
        let (k, post) = measure_bell_pair(&s, (1, 2), 0.9).unwrap();
        assert_eq!(k, BellKind::PsiPlus);
        assert!(post.approx_eq(&s, 1e-12));
    }
}
