use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{PureState, StateError};

pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
/// Eigenvalues with magnitude at or below this are treated as exact zeros.
pub const EIGEN_CLAMP: f64 = 1e-12;

/// A density matrix over an ordered subset of global qubits.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    qubits: Vec<usize>,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(qubits: Vec<usize>, entries: DMatrix<Complex64>) -> Result<Self, StateError> {
        let dim = 1usize << qubits.len();
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(StateError::BadLength { len: entries.nrows(), qubits: qubits.len() });
        }
        Ok(DensityMatrix { qubits, entries })
    }

    /// Global qubit indices, in the order used for the matrix index.
    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                let diff = self.entries[(i, j)] - self.entries[(j, i)].conj();
                worst = worst.max(diff.norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>, StateError> {
        let err = self.hermiticity_error();
        if err > HERMITIAN_TOLERANCE {
            return Err(StateError::NotHermitian(err));
        }
        Ok(SymmetricEigen::new(self.entries.clone()).eigenvalues.iter().copied().collect())
    }

    /// Traces out everything except `keep` (global qubit indices that must be
    /// a subset of this matrix's qubits).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix, StateError> {
        let local: Vec<usize> = keep
            .iter()
            .map(|q| {
                self.qubits
                    .iter()
                    .position(|p| p == q)
                    .ok_or(StateError::OutOfRange { qubit: *q, width: self.qubits.len() })
            })
            .collect::<Result<_, _>>()?;
        let s = self.qubits.len();
        let traced: Vec<usize> = (0..s).filter(|q| !local.contains(q)).collect();
        let dk = 1usize << local.len();
        let dt = 1usize << traced.len();
        let compose = |k: usize, t: usize| -> usize {
            let mut idx = 0;
            for (j, &q) in local.iter().enumerate() {
                if k >> (local.len() - 1 - j) & 1 == 1 {
                    idx |= 1 << (s - 1 - q);
                }
            }
            for (j, &q) in traced.iter().enumerate() {
                if t >> (traced.len() - 1 - j) & 1 == 1 {
                    idx |= 1 << (s - 1 - q);
                }
            }
            idx
        };
        let mut out = DMatrix::<Complex64>::zeros(dk, dk);
        for a in 0..dk {
            for b in 0..dk {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..dt {
                    acc += self.entries[(compose(a, t), compose(b, t))];
                }
                out[(a, b)] = acc;
            }
        }
        DensityMatrix::new(keep.to_vec(), out)
    }
}

fn check_subset(state: &PureState, qubits: &[usize]) -> Result<(), StateError> {
    let m = state.num_qubits();
    for (i, &q) in qubits.iter().enumerate() {
        if q >= m {
            return Err(StateError::OutOfRange { qubit: q, width: m });
        }
        if qubits[..i].contains(&q) {
            return Err(StateError::DuplicateTarget(q));
        }
    }
    Ok(())
}

/// Reshapes `ψ` into a `2^|keep| × 2^(m−|keep|)` matrix `M` with
/// `ρ_keep = M M†`. Kept qubits index rows in the order given.
fn bipartite_matrix(state: &PureState, keep: &[usize]) -> DMatrix<Complex64> {
    let m = state.num_qubits();
    let traced: Vec<usize> = (0..m).filter(|q| !keep.contains(q)).collect();
    let mut mat = DMatrix::<Complex64>::zeros(1 << keep.len(), 1 << traced.len());
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let bit = |q: usize| (idx >> (m - 1 - q)) & 1;
        let row = keep.iter().fold(0, |acc, &q| (acc << 1) | bit(q));
        let col = traced.iter().fold(0, |acc, &q| (acc << 1) | bit(q));
        mat[(row, col)] = *amp;
    }
    mat
}

/// Reduced density matrix of `state` on the global qubits `keep`.
pub fn partial_trace(state: &PureState, keep: &[usize]) -> Result<DensityMatrix, StateError> {
    check_subset(state, keep)?;
    let mat = bipartite_matrix(state, keep);
    DensityMatrix::new(keep.to_vec(), &mat * mat.adjoint())
}

/// Reduced density matrix on the named registers, in layout order.
pub fn partial_trace_named(state: &PureState, keep: &[&str]) -> Result<DensityMatrix, StateError> {
    let qubits = state.layout().select(keep)?;
    partial_trace(state, &qubits)
}

/// Von Neumann entropy in bits.
pub fn entropy(dm: &DensityMatrix) -> Result<f64, StateError> {
    Ok(entropy_of_spectrum(&dm.eigenvalues()?))
}

fn entropy_of_spectrum(eigs: &[f64]) -> f64 {
    eigs.iter()
        .filter(|&&l| l > EIGEN_CLAMP)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Entropy of the reduced state on `qubits`, computed from whichever of
/// `M M†` and `M† M` is smaller (they share their nonzero spectrum).
pub fn subsystem_entropy(state: &PureState, qubits: &[usize]) -> Result<f64, StateError> {
    check_subset(state, qubits)?;
    let m = state.num_qubits();
    if qubits.is_empty() || qubits.len() == m {
        return Ok(0.0);
    }
    let mat = bipartite_matrix(state, qubits);
    let gram = if 2 * qubits.len() <= m {
        &mat * mat.adjoint()
    } else {
        mat.adjoint() * &mat
    };
    let eigs = SymmetricEigen::new(gram).eigenvalues;
    Ok(entropy_of_spectrum(eigs.as_slice()))
}

fn union(parts: &[&[usize]]) -> Vec<usize> {
    let mut out: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    out.sort_unstable();
    out
}

/// `I(A:B|C) = S(AC) + S(BC) − S(C) − S(ABC)` in bits; an empty `c` gives
/// the plain mutual information.
pub fn conditional_mutual_information(
    state: &PureState,
    a: &[usize],
    b: &[usize],
    c: &[usize],
) -> Result<f64, StateError> {
    for (x, y) in [(a, b), (a, c), (b, c)] {
        if let Some(q) = x.iter().find(|q| y.contains(q)) {
            return Err(StateError::Overlap(*q));
        }
    }
    let s_ac = subsystem_entropy(state, &union(&[a, c]))?;
    let s_bc = subsystem_entropy(state, &union(&[b, c]))?;
    let s_c = subsystem_entropy(state, &union(&[c]))?;
    let s_abc = subsystem_entropy(state, &union(&[a, b, c]))?;
    Ok(s_ac + s_bc - s_c - s_abc)
}

pub fn mutual_information(state: &PureState, a: &[usize], b: &[usize]) -> Result<f64, StateError> {
    conditional_mutual_information(state, a, b, &[])
}

/// Named-register form of [`conditional_mutual_information`].
pub fn conditional_mutual_information_named(
    state: &PureState,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<f64, StateError> {
    let layout = state.layout();
    conditional_mutual_information(state, &layout.select(a)?, &layout.select(b)?, &layout.select(c)?)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::statecore::{apply_gate, Gate, QubitLayout};

    fn bell() -> PureState {
        let l = Arc::new(QubitLayout::new([("A", 1), ("B", 1)]).unwrap());
        let psi = apply_gate(&PureState::zero(l), &Gate::h(0)).unwrap();
        apply_gate(&psi, &Gate::cnot(0, 1)).unwrap()
    }

    fn ghz() -> PureState {
        let l = Arc::new(QubitLayout::new([("A", 1), ("B", 1), ("C", 1)]).unwrap());
        let mut psi = PureState::zero(l);
        psi.apply(&Gate::h(0)).unwrap();
        psi.apply(&Gate::cnot(0, 1)).unwrap();
        psi.apply(&Gate::cnot(1, 2)).unwrap();
        psi
    }

    #[test]
    fn bell_reduction_is_maximally_mixed() {
        let rho = partial_trace_named(&bell(), &["A"]).unwrap();
        assert_abs_diff_eq!(rho.entries()[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.entries()[(1, 1)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.entries()[(0, 1)].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(entropy(&rho).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn product_state_keeps_plus() {
        let l = Arc::new(QubitLayout::new([("A", 1), ("B", 1)]).unwrap());
        let psi = apply_gate(&PureState::zero(l), &Gate::h(1)).unwrap();
        let rho = partial_trace_named(&psi, &["B"]).unwrap();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert_abs_diff_eq!(rho.entries()[(i, j)].re, 0.5, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(entropy(&rho).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn ghz_two_qubit_marginal() {
        // oracle: (|00><00| + |11><11|)/2 written out by hand
        let rho = partial_trace_named(&ghz(), &["A", "B"]).unwrap();
        let mut expected = DMatrix::<Complex64>::zeros(4, 4);
        expected[(0, 0)] = Complex64::new(0.5, 0.0);
        expected[(3, 3)] = Complex64::new(0.5, 0.0);
        assert_abs_diff_eq!((rho.entries() - expected).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn entropy_of_diagonal() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 0)] = Complex64::new(0.25, 0.0);
        m[(1, 1)] = Complex64::new(0.75, 0.0);
        let rho = DensityMatrix::new(vec![0], m).unwrap();
        let expected = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
        assert_abs_diff_eq!(entropy(&rho).unwrap(), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, 0.811278, epsilon = 1e-6);
    }

    #[test]
    fn entropy_rejects_non_hermitian() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        m[(0, 1)] = Complex64::new(0.3, 0.0);
        let rho = DensityMatrix::new(vec![0], m).unwrap();
        assert!(matches!(entropy(&rho), Err(StateError::NotHermitian(_))));
    }

    #[test]
    fn mutual_information_examples() {
        let psi = bell();
        assert_abs_diff_eq!(mutual_information(&psi, &[0], &[1]).unwrap(), 2.0, epsilon = 1e-10);
        let l = Arc::new(QubitLayout::new([("A", 1), ("B", 1)]).unwrap());
        let product = apply_gate(&PureState::zero(l), &Gate::h(0)).unwrap();
        assert_abs_diff_eq!(mutual_information(&product, &[0], &[1]).unwrap(), 0.0, epsilon = 1e-10);
        let cmi = conditional_mutual_information_named(&ghz(), &["A"], &["B"], &["C"]).unwrap();
        assert_abs_diff_eq!(cmi, 1.0, epsilon = 1e-10);
        assert!(matches!(
            conditional_mutual_information(&psi, &[0], &[0], &[]),
            Err(StateError::Overlap(0))
        ));
    }

    #[test]
    fn density_partial_trace_matches_pure_route() {
        let psi = ghz();
        let full = partial_trace(&psi, &[0, 1, 2]).unwrap();
        let via_dm = full.partial_trace(&[0, 2]).unwrap();
        let direct = partial_trace(&psi, &[0, 2]).unwrap();
        assert_abs_diff_eq!((via_dm.entries() - direct.entries()).norm(), 0.0, epsilon = 1e-14);
    }
}
