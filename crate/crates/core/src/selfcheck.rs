//! Exhaustive small-case suites evaluated with the dense-matrix oracle.
//!
//! None of these use the sampling measurement path; they pin down the
//! physics the protocol relies on.

use serde::Serialize;

use crate::oneway::{EncodeTable, HOME_SLOT, TRAVEL_SLOT};
use crate::quantum::{apply_pauli, bell_state, outcome_distribution, BellKind, MeasBasis, PauliCode, PlanStep};

pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Suite {
    result: SuiteResult,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Self {
            result: SuiteResult {
                name,
                cases: 0,
                failures: Vec::new(),
            },
        }
    }

    fn case(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.result.cases += 1;
        if !ok {
            self.result.failures.push(describe());
        }
    }
}

/// The Bell state Bob observes after Alice applies `code` on her half, if
/// the oracle finds a definite one.
fn observed_kind(initial: BellKind, code: PauliCode) -> Option<BellKind> {
    let state = apply_pauli(&bell_state(initial), HOME_SLOT, code).ok()?;
    let d = outcome_distribution(&state, &[PlanStep::bell(HOME_SLOT, TRAVEL_SLOT)]).ok()?;
    BellKind::ALL
        .into_iter()
        .find(|k| (d.get(k.symbol()) - 1.0).abs() < TOLERANCE)
}

/// Every (initial state, label) pair: encode with `table`, Bell-measure via
/// the oracle, invert through the table's own outcome map.
pub fn dense_coding_suite(table: &EncodeTable) -> SuiteResult {
    let mut suite = Suite::new("dense-coding");
    for initial in BellKind::ALL {
        let map: Vec<Option<BellKind>> = (0..4).map(|l| observed_kind(initial, table.code(l))).collect();
        for label in 0..4u8 {
            let observed = map[label as usize];
            let decoded: Vec<u8> = (0..4u8)
                .filter(|&l| observed.is_some() && map[l as usize] == observed)
                .collect();
            suite.case(decoded == [label], || {
                format!("{initial}: label {label:02b} observed {observed:?}, decodes to {decoded:?}")
            });
        }
    }
    suite.result
}

/// Bob's particle alone shows a fair coin in Z and X whatever Alice applied.
pub fn encoding_invisibility_suite(initial: BellKind) -> SuiteResult {
    let mut suite = Suite::new("encoding-invisibility");
    for code in PauliCode::ALL {
        for basis in [MeasBasis::Z, MeasBasis::X] {
            let d = apply_pauli(&bell_state(initial), HOME_SLOT, code)
                .and_then(|s| outcome_distribution(&s, &[PlanStep::qubit(TRAVEL_SLOT, basis)]));
            let ok =
                matches!(&d, Ok(d) if (d.get("0") - 0.5).abs() < TOLERANCE && (d.get("1") - 0.5).abs() < TOLERANCE);
            suite.case(ok, || {
                format!("{} then {} on travel qubit: {d:?}", code.name(), basis.symbol())
            });
        }
    }
    suite.result
}

/// Z and X correlation signs of each Bell state, and each Bell state's
/// certain identification by a Bell measurement.
pub fn bell_correlation_suite() -> SuiteResult {
    let mut suite = Suite::new("bell-correlation");
    for kind in BellKind::ALL {
        let state = bell_state(kind);
        for (basis, anti) in [
            (MeasBasis::Z, kind.z_anticorrelated()),
            (MeasBasis::X, kind.x_anticorrelated()),
        ] {
            let d = outcome_distribution(&state, &[PlanStep::qubit(0, basis), PlanStep::qubit(1, basis)]);
            let ok = matches!(&d, Ok(d) if {
                let (same, diff) = (d.get("00") + d.get("11"), d.get("01") + d.get("10"));
                let (want_same, want_diff) = if anti { (0.0, 1.0) } else { (1.0, 0.0) };
                (same - want_same).abs() < TOLERANCE
                    && (diff - want_diff).abs() < TOLERANCE
                    && (d.get("00") - d.get("11")).abs() < TOLERANCE
                    && (d.get("01") - d.get("10")).abs() < TOLERANCE
            });
            suite.case(ok, || format!("{kind} in {}: {d:?}", basis.symbol()));
        }
        let d = outcome_distribution(&state, &[PlanStep::bell(0, 1)]);
        let ok = matches!(&d, Ok(d) if (d.get(kind.symbol()) - 1.0).abs() < TOLERANCE);
        suite.case(ok, || format!("{kind} Bell measurement: {d:?}"));
    }
    suite.result
}

pub fn run_all(table: &EncodeTable, initial: BellKind) -> Vec<SuiteResult> {
    vec![
        dense_coding_suite(table),
        encoding_invisibility_suite(initial),
        bell_correlation_suite(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pristine_suites_pass() {
        let results = run_all(&EncodeTable::standard(), BellKind::PhiPlus);
        let cases: Vec<usize> = results.iter().map(|r| r.cases).collect();
        assert_eq!(cases, [16, 8, 12]);
        assert!(results.iter().all(SuiteResult::passed), "{results:?}");
        for initial in BellKind::ALL {
            assert!(encoding_invisibility_suite(initial).passed());
        }
    }

    #[test]
    fn corrupted_table_fails_dense_coding() {
        let bad = EncodeTable::new_unchecked([PauliCode::I, PauliCode::Z, PauliCode::Z, PauliCode::IY]);
        let r = dense_coding_suite(&bad);
        assert!(!r.passed());
        // Labels 01 and 10 collide under every initial state.
        assert_eq!(r.failures.len(), 8);
    }

    #[test]
    fn deterministic() {
        let t = EncodeTable::standard();
        assert_eq!(run_all(&t, BellKind::PsiMinus), run_all(&t, BellKind::PsiMinus));
    }
}
