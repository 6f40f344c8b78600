//! The `N`-state cogwheel: a system stepping cyclically through `N` states,
//! one step per time `T`, with an optional phase picked up on each step.
//!
//! The shift `U_N` sends basis state `k` to `k + 1` (cyclically) with phase
//! `exp(i phi_k)`. Its generator `H_N`, defined through `U_N = exp(-i H_N T)`, is
//! diagonal in the eigenbasis of `U_N` with eigenvalues
//! `(2 pi (n - 1) - sum phi) / (N T)`. The standard-basis form is obtained by
//! conjugating with the discrete Fourier eigenvectors of the shift.
//!
//! Sign convention: with the shift direction above, the standard-basis
//! off-diagonal elements are `(pi / N T) (-1 - i cot(pi (n - m) / N))` for row
//! `n` and column `m`. The opposite sign of the cotangent term yields the
//! transpose of this matrix, which generates `U_N^dagger` instead of `U_N`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_evolution, max_abs_diff, spectral_sum, CMatrix};
use num_complex::Complex64;

/// Default pass threshold for [`verify_generator`].
pub const GENERATOR_TOLERANCE: f64 = 1e-10;

/// Size, step time and per-step phases of a cogwheel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CogwheelSpec {
    n_states: usize,
    timestep: f64,
    phases: Vec<f64>,
}

impl CogwheelSpec {
    /// Zero-phase cogwheel.
    pub fn new(n_states: usize, timestep: f64) -> Result<Self> {
        Self::with_phases(n_states, timestep, vec![0.0; n_states])
    }

    pub fn with_phases(n_states: usize, timestep: f64, phases: Vec<f64>) -> Result<Self> {
        if n_states < 2 {
            return Err(Error::Config(format!(
                "cogwheel needs at least 2 states, got {n_states}"
            )));
        }
        if !(timestep.is_finite() && timestep > 0.0) {
            return Err(Error::Config(format!(
                "timestep must be positive and finite, got {timestep}"
            )));
        }
        if phases.len() != n_states {
            return Err(Error::Config(format!(
                "expected {n_states} phases, got {}",
                phases.len()
            )));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("phases must be finite".into()));
        }
        Ok(Self {
            n_states,
            timestep,
            phases,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn timestep(&self) -> f64 {
        self.timestep
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn phase_sum(&self) -> f64 {
        self.phases.iter().sum()
    }

    pub fn has_zero_phases(&self) -> bool {
        self.phases.iter().all(|&p| p == 0.0)
    }

    /// Eigenvalue of the generator for the 0-based level `n`.
    pub fn energy(&self, n: usize) -> f64 {
        (2.0 * PI * n as f64 - self.phase_sum()) / (self.n_states as f64 * self.timestep)
    }

    pub fn energies(&self) -> Vec<f64> {
        (0..self.n_states).map(|n| self.energy(n)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianBasis {
    Diagonal,
    Standard,
}

/// Hermitian generator of a cogwheel in a given basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CogwheelHamiltonian {
    pub matrix: CMatrix,
    pub basis: HamiltonianBasis,
}

/// `U_N`: column `k` carries `exp(i phi_k)` in row `k + 1 (mod N)`.
pub fn shift_matrix(spec: &CogwheelSpec) -> CMatrix {
    let n = spec.n_states;
    let mut u = CMatrix::zeros(n, n);
    for (k, &phi) in spec.phases.iter().enumerate() {
        u[((k + 1) % n, k)] = Complex64::from_polar(1.0, phi);
    }
    u
}

pub fn hamiltonian_diagonal(spec: &CogwheelSpec) -> CogwheelHamiltonian {
    let diag = spec.energies().into_iter().map(|e| Complex64::new(e, 0.0));
    CogwheelHamiltonian {
        matrix: CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(spec.n_states, diag)),
        basis: HamiltonianBasis::Diagonal,
    }
}

/// Unitary whose column `n` is the eigenvector of `U_N` belonging to level `n`
/// of [`hamiltonian_diagonal`], i.e. with eigenvalue `exp(-i E_n T)`.
pub fn eigenbasis(spec: &CogwheelSpec) -> CMatrix {
    let n = spec.n_states;
    let norm = (n as f64).sqrt().recip();
    // Prefix sums of the phases: v_k = exp(i (phi_0 + .. + phi_{k-1})) lambda^{-k}.
    let prefix: Vec<f64> = std::iter::once(0.0)
        .chain(spec.phases.iter().scan(0.0, |acc, &p| {
            *acc += p;
            Some(*acc)
        }))
        .take(n)
        .collect();
    CMatrix::from_fn(n, n, |k, level| {
        let lambda_arg = -spec.energy(level) * spec.timestep;
        Complex64::from_polar(norm, prefix[k] - lambda_arg * k as f64)
    })
}

/// Closed-form standard-basis element (zero phases) for 0-based row `row`, column `col`.
pub fn standard_element(n_states: usize, timestep: f64, row: usize, col: usize) -> Complex64 {
    let scale = PI / (n_states as f64 * timestep);
    if row == col {
        return Complex64::new(scale * (n_states as f64 - 1.0), 0.0);
    }
    let d = row as f64 - col as f64;
    let cot = (PI * d / n_states as f64).tan().recip();
    Complex64::new(-scale, -scale * cot)
}

/// Standard-basis generator, built spectrally over the Fourier eigenvectors.
pub fn hamiltonian_standard(spec: &CogwheelSpec) -> Result<CogwheelHamiltonian> {
    if !spec.has_zero_phases() {
        return Err(Error::Unsupported(
            "the standard-basis Hamiltonian is only defined for zero phases".into(),
        ));
    }
    let energies: Vec<Complex64> = spec.energies().into_iter().map(Complex64::from).collect();
    let mut matrix = spectral_sum(&eigenbasis(spec), &energies);
    // Clean the rounding residue on the exactly known diagonal.
    let diag = standard_element(spec.n_states, spec.timestep, 0, 0);
    for i in 0..spec.n_states {
        matrix[(i, i)] = diag;
    }
    Ok(CogwheelHamiltonian {
        matrix,
        basis: HamiltonianBasis::Standard,
    })
}

/// Outcome of checking `exp(-i H T) = U_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorReport {
    pub n_states: usize,
    pub timestep: f64,
    /// Deviation of the diagonal-basis exponential, conjugated into the standard basis.
    pub diagonal_deviation: f64,
    /// Deviation of the standard-basis exponential; absent for nonzero phases.
    pub standard_deviation: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl GeneratorReport {
    pub fn max_deviation(&self) -> f64 {
        self.standard_deviation
            .map_or(self.diagonal_deviation, |s| s.max(self.diagonal_deviation))
    }
}

pub fn verify_generator(spec: &CogwheelSpec) -> GeneratorReport {
    verify_generator_with(spec, GENERATOR_TOLERANCE, 0.0)
}

/// As [`verify_generator`], with an explicit tolerance and a real shift
/// `corruption` added to the first diagonal element of both generators.
/// A nonzero corruption exercises the failure path.
pub fn verify_generator_with(spec: &CogwheelSpec, tolerance: f64, corruption: f64) -> GeneratorReport {
    let target = shift_matrix(spec);
    let t = spec.timestep;

    let mut diag = hamiltonian_diagonal(spec).matrix;
    diag[(0, 0)] += corruption;
    let v = eigenbasis(spec);
    let phases: Vec<Complex64> = diag
        .diagonal()
        .iter()
        .map(|e| Complex64::from_polar(1.0, -e.re * t))
        .collect();
    let diagonal_deviation = max_abs_diff(&spectral_sum(&v, &phases), &target);

    let standard_deviation = hamiltonian_standard(spec).ok().map(|h| {
        let mut m = h.matrix;
        m[(0, 0)] += corruption;
        max_abs_diff(&hermitian_evolution(&m, t), &target)
    });

    let max_dev = standard_deviation.map_or(diagonal_deviation, |s| s.max(diagonal_deviation));
    GeneratorReport {
        n_states: spec.n_states,
        timestep: t,
        diagonal_deviation,
        standard_deviation,
        tolerance,
        pass: max_dev < tolerance,
    }
}

/// Entry `(row, 0)` of the standard-basis generator for every row: the
/// coefficients of the generator written as a polynomial in `U_N`.
pub fn first_column(n_states: usize, timestep: f64) -> Vec<Complex64> {
    (0..n_states)
        .map(|row| standard_element(n_states, timestep, row, 0))
        .collect()
}
