use std::sync::Arc;

use num_complex::Complex64;

use super::{Gate, GateKind, StateError};

pub const NORM_TOLERANCE: f64 = 1e-12;

/// Named qubit registers in declaration order.
///
/// Register order fixes the basis index: the first declared register holds
/// the most significant bits, and within a register bit 1 is the most
/// significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitLayout {
    registers: Vec<(String, usize)>,
}

impl QubitLayout {
    pub fn new<S: Into<String>>(
        registers: impl IntoIterator<Item = (S, usize)>,
    ) -> Result<Self, StateError> {
        let registers: Vec<(String, usize)> =
            registers.into_iter().map(|(n, w)| (n.into(), w)).collect();
        for (i, (name, width)) in registers.iter().enumerate() {
            if *width == 0 {
                return Err(StateError::EmptyRegister(name.clone()));
            }
            if registers[..i].iter().any(|(other, _)| other == name) {
                return Err(StateError::DuplicateRegister(name.clone()));
            }
        }
        Ok(QubitLayout { registers })
    }

    /// A layout of `m` anonymous single-qubit registers `q0, q1, ...`.
    pub fn anonymous(m: usize) -> Self {
        QubitLayout {
            registers: (0..m).map(|i| (format!("q{i}"), 1)).collect(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.registers.iter().map(|(_, w)| w).sum()
    }

    pub fn registers(&self) -> impl Iterator<Item = (&str, usize)> {
        self.registers.iter().map(|(n, w)| (n.as_str(), *w))
    }

    /// Global qubit indices occupied by register `name`.
    pub fn qubits(&self, name: &str) -> Result<std::ops::Range<usize>, StateError> {
        let mut offset = 0;
        for (reg, width) in &self.registers {
            if reg == name {
                return Ok(offset..offset + width);
            }
            offset += width;
        }
        Err(StateError::UnknownRegister(name.to_string()))
    }

    /// Sorted qubit indices covered by the named registers.
    pub fn select(&self, names: &[&str]) -> Result<Vec<usize>, StateError> {
        let mut out = Vec::new();
        for name in names {
            out.extend(self.qubits(name)?);
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

/// A normalised pure state over a [`QubitLayout`].
#[derive(Debug, Clone)]
pub struct PureState {
    layout: Arc<QubitLayout>,
    amps: Vec<Complex64>,
}

impl PureState {
    /// The all-zero basis state.
    pub fn zero(layout: Arc<QubitLayout>) -> Self {
        Self::basis(layout, 0)
    }

    pub fn basis(layout: Arc<QubitLayout>, index: usize) -> Self {
        let dim = 1usize << layout.num_qubits();
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        PureState { layout, amps }
    }

    /// Wraps an amplitude vector, checking its length and norm.
    pub fn from_amplitudes(
        layout: Arc<QubitLayout>,
        amps: Vec<Complex64>,
    ) -> Result<Self, StateError> {
        let m = layout.num_qubits();
        if amps.len() != 1usize << m {
            return Err(StateError::BadLength { len: amps.len(), qubits: m });
        }
        let state = PureState { layout, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE * 1e3 {
            return Err(StateError::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Normalises `amps` before wrapping; fails on the zero vector.
    pub fn normalized(
        layout: Arc<QubitLayout>,
        mut amps: Vec<Complex64>,
    ) -> Result<Self, StateError> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(StateError::NotNormalized(0.0));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Self::from_amplitudes(layout, amps)
    }

    pub fn layout(&self) -> &Arc<QubitLayout> {
        &self.layout
    }

    pub fn num_qubits(&self) -> usize {
        self.layout.num_qubits()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64, StateError> {
        if self.layout != other.layout {
            return Err(StateError::LayoutMismatch);
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Bit mask of qubit `q` inside a basis index.
    pub fn mask(&self, q: usize) -> usize {
        1usize << (self.num_qubits() - 1 - q)
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<(), StateError> {
        let m = self.num_qubits();
        gate.kind.check_arity(gate.targets.len())?;
        for (i, &q) in gate.targets.iter().enumerate() {
            if q >= m {
                return Err(StateError::OutOfRange { qubit: q, width: m });
            }
            if gate.targets[..i].contains(&q) {
                return Err(StateError::DuplicateTarget(q));
            }
        }
        let masks: Vec<usize> = gate.targets.iter().map(|&q| self.mask(q)).collect();
        match gate.kind {
            GateKind::X | GateKind::Cnot | GateKind::Toffoli | GateKind::Mcx => {
                let (target, controls) = masks.split_last().unwrap();
                let cmask: usize = controls.iter().sum();
                let amps = &mut self.amps;
                for_each_fixed(m, &masks, cmask, |i| amps.swap(i, i | target));
            }
            GateKind::Z | GateKind::Cz => {
                let all: usize = masks.iter().sum();
                let amps = &mut self.amps;
                for_each_fixed(m, &masks, all, |i| amps[i] = -amps[i]);
            }
            GateKind::Phase(theta) => {
                let w = Complex64::from_polar(1.0, theta);
                let amps = &mut self.amps;
                for_each_fixed(m, &masks, masks[0], |i| amps[i] *= w);
            }
            GateKind::H => {
                let t = masks[0];
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let amps = &mut self.amps;
                for_each_fixed(m, &masks, 0, |i| {
                    let a = amps[i];
                    let b = amps[i | t];
                    amps[i] = (a + b) * s;
                    amps[i | t] = (a - b) * s;
                });
            }
        }
        Ok(())
    }
}

/// Calls `f` on every basis index whose bits under `masks` equal `value`.
fn for_each_fixed(m: usize, masks: &[usize], value: usize, mut f: impl FnMut(usize)) {
    let mut sorted: Vec<usize> = masks.to_vec();
    sorted.sort_unstable();
    let free = m - masks.len();
    for i in 0..(1usize << free) {
        // insert zero bits at the fixed positions, lowest first
        let mut idx = i;
        for &mask in &sorted {
            let low = idx & (mask - 1);
            idx = ((idx ^ low) << 1) | low;
        }
        f(idx | value);
    }
}

/// Returns `gate|ψ⟩` as a new state.
pub fn apply_gate(state: &PureState, gate: &Gate) -> Result<PureState, StateError> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64, StateError> {
    Ok(a.inner(b)?.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn layout(m: usize) -> Arc<QubitLayout> {
        Arc::new(QubitLayout::anonymous(m))
    }

    #[test]
    fn hadamard_makes_plus() {
        let psi = apply_gate(&PureState::zero(layout(1)), &Gate::h(0)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(psi.amplitude(0).re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(psi.amplitude(1).re, s, epsilon = 1e-15);
    }

    #[test]
    fn cz_flips_sign_of_11() {
        let psi = apply_gate(&PureState::basis(layout(2), 0b11), &Gate::cz(0, 1)).unwrap();
        assert_eq!(psi.amplitude(0b11), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        let psi = apply_gate(&PureState::basis(layout(2), 0b10), &Gate::cnot(0, 1)).unwrap();
        assert_eq!(psi.amplitude(0b11), Complex64::new(1.0, 0.0));
        // qubit 0 is the most significant bit
        let psi = apply_gate(&PureState::basis(layout(2), 0b01), &Gate::cnot(0, 1)).unwrap();
        assert_eq!(psi.amplitude(0b01), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn toffoli_and_mcx_agree() {
        let l = layout(4);
        for idx in 0..16 {
            let a = apply_gate(&PureState::basis(l.clone(), idx), &Gate::toffoli(0, 2, 3)).unwrap();
            let mcx = Gate::new(GateKind::Mcx, vec![0, 2, 3]).unwrap();
            let b = apply_gate(&PureState::basis(l.clone(), idx), &mcx).unwrap();
            assert_eq!(a.amplitudes(), b.amplitudes());
        }
    }

    #[test]
    fn rejects_bad_targets() {
        let mut psi = PureState::zero(layout(2));
        assert!(matches!(
            psi.apply(&Gate::h(2)),
            Err(StateError::OutOfRange { qubit: 2, width: 2 })
        ));
        assert!(matches!(
            psi.apply(&Gate::cnot(1, 1)),
            Err(StateError::DuplicateTarget(1))
        ));
        assert!(Gate::new(GateKind::Cz, vec![0]).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let l = layout(1);
        let zero = PureState::zero(l.clone());
        let one = PureState::basis(l.clone(), 1);
        let plus = apply_gate(&zero, &Gate::h(0)).unwrap();
        assert_abs_diff_eq!(fidelity(&zero, &zero).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fidelity(&zero, &one).unwrap(), 0.0, epsilon = 1e-15);
        // |<0|+>|^2 computed directly: (1/sqrt2)^2
        let direct = (std::f64::consts::FRAC_1_SQRT_2).powi(2);
        assert_abs_diff_eq!(fidelity(&zero, &plus).unwrap(), direct, epsilon = 1e-15);
        let other = PureState::zero(layout(2));
        assert!(matches!(fidelity(&zero, &other), Err(StateError::LayoutMismatch)));
    }

    #[test]
    fn layout_lookup() {
        let l = QubitLayout::new([("A", 2), ("B", 3)]).unwrap();
        assert_eq!(l.qubits("B").unwrap(), 2..5);
        assert_eq!(l.select(&["B", "A"]).unwrap(), vec![0, 1, 2, 3, 4]);
        assert!(matches!(l.qubits("C"), Err(StateError::UnknownRegister(_))));
        assert!(QubitLayout::new([("A", 1), ("A", 1)]).is_err());
    }
}
