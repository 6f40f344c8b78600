//! The chain Hamiltonian as a polynomial in the one-step update.
//!
//! Since every chain state returns to itself after `S` updates, the chain acts
//! like an `S`-state cogwheel and its generator is
//! `H = sum_{d=0}^{S-1} c_d U^d` with `c_d` the first column of the `S`-state
//! standard-basis cogwheel generator. On each orbit of length `L` (a divisor of
//! `S`) the operator restricts to an `L x L` circulant block, which is
//! diagonalized by the `L`-point Fourier vectors. This is how [`verify_bch`]
//! checks `exp(-i H T) = U` without ever forming a `2^(2S)` matrix.
//!
//! The cotangent form `(pi/T)(1 + (s i / 2S) sum cot(pi n / S)(U^n - U^-n))`
//! coincides with the exact form on the orthogonal complement of the `U = 1`
//! eigenspace and exceeds it by `pi / T` on that eigenspace. The sign `s` is
//! fixed by the cogwheel convention (see [`crate::cogwheel`]): `s = -1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cogwheel::first_column;
use crate::error::{Error, Result};
use crate::hilbert::{inverse_update_vector, update_vector, SparseVector};
use crate::linalg::{cycle_eigenvector, cyclic_shift, max_abs_diff, spectral_sum, CMatrix, CVector, ONE, ZERO};
use crate::states::{orbit_census, update_index, ChainConfig, OntState, Orbit};

/// Default pass threshold for [`verify_bch`].
pub const BCH_TOLERANCE: f64 = 1e-10;

/// Sign of the cotangent term consistent with `exp(-i H T) = U`.
const COT_SIGN: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianForm {
    /// First column of the `S`-state cogwheel generator.
    Exact,
    /// Manifestly self-adjoint cotangent sum.
    Cotangent,
}

/// Coefficients `c_0 .. c_{S-1}` of `H = sum c_d U^d`.
pub fn coefficients(half: usize, timestep: f64, form: HamiltonianForm) -> Result<Vec<Complex64>> {
    if half < 2 {
        return Err(Error::Degenerate(format!(
            "chain Hamiltonian needs S >= 2, got S = {half}"
        )));
    }
    if !(timestep.is_finite() && timestep > 0.0) {
        return Err(Error::Config(format!("timestep must be positive, got {timestep}")));
    }
    Ok(match form {
        HamiltonianForm::Exact => first_column(half, timestep),
        HamiltonianForm::Cotangent => {
            let scale = PI / timestep;
            let mut c = vec![ZERO; half];
            c[0] = Complex64::new(scale, 0.0);
            for n in 1..half {
                let cot = (PI * n as f64 / half as f64).tan().recip();
                let w = Complex64::new(0.0, COT_SIGN * scale * cot / (2 * half) as f64);
                // U^n - (U^dagger)^n, with (U^dagger)^n = U^(S - n).
                c[n] += w;
                c[half - n] -= w;
            }
            c
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainHamiltonian {
    pub config: ChainConfig,
    pub coefficients: Vec<Complex64>,
    pub form: HamiltonianForm,
}

pub fn build_hamiltonian(config: &ChainConfig, form: HamiltonianForm) -> Result<ChainHamiltonian> {
    Ok(ChainHamiltonian {
        config: *config,
        coefficients: coefficients(config.half(), config.timestep(), form)?,
        form,
    })
}

impl ChainHamiltonian {
    /// `sum_d c_d U^d |v>`, one cheap permutation per power.
    pub fn apply(&self, v: &SparseVector) -> Result<SparseVector> {
        let mut power = v.clone();
        let mut out = SparseVector::zero(v.num_spins());
        for (d, &c) in self.coefficients.iter().enumerate() {
            if d > 0 {
                power = update_vector(&power, &self.config)?;
            }
            if c != ZERO {
                out = out.axpy(c, &power);
            }
        }
        Ok(out)
    }

    /// Restriction to an orbit, in the orbit's update order. Entry `(r, c)` is
    /// `<orbit[r]| H |orbit[c]>`. Also returns the weight `H` leaks outside the orbit.
    pub fn orbit_block(&self, orbit: &Orbit) -> Result<(CMatrix, f64)> {
        let len = orbit.len();
        let n = orbit.num_spins();
        let mut block = CMatrix::zeros(len, len);
        let mut leak: f64 = 0.0;
        for (col, &idx) in orbit.indices().iter().enumerate() {
            let image = self.apply(&SparseVector::from_pairs(n, [(idx, ONE)])?)?;
            for (k, a) in image.iter() {
                match orbit.position(k) {
                    Some(row) => block[(row, col)] = a,
                    None => leak = leak.max(a.norm()),
                }
            }
        }
        Ok((block, leak))
    }

    /// Dense `2^(2S)` matrix; for verification on small chains only.
    pub fn dense(&self) -> Result<CMatrix> {
        let n = self.config.num_spins();
        if n > 12 {
            return Err(Error::TooLarge(format!("dense Hamiltonian limited to 12 spins, got {n}")));
        }
        let dim = 1usize << n;
        let mut m = CMatrix::zeros(dim, dim);
        let mut cur: Vec<u64> = (0..dim as u64).collect();
        for &c in &self.coefficients {
            for (col, &row) in cur.iter().enumerate() {
                m[(row as usize, col)] += c;
            }
            cur.iter_mut().for_each(|r| *r = update_index(*r, n));
        }
        Ok(m)
    }
}

/// `H|q>` for a sparse state; the result is not normalized.
pub fn apply_hamiltonian(h: &ChainHamiltonian, q: &SparseVector) -> Result<SparseVector> {
    h.apply(q)
}

/// `(U - U^dagger)|q>`.
pub fn shift_difference(q: &SparseVector, config: &ChainConfig) -> Result<SparseVector> {
    Ok(update_vector(q, config)?.sub(&inverse_update_vector(q, config)?))
}

/// Leading-term approximation `(pi/T)(1 + (i/pi)(U - U^dagger))|q>`.
pub fn approx_hamiltonian_apply(q: &SparseVector, config: &ChainConfig) -> Result<SparseVector> {
    let diff = shift_difference(q, config)?;
    let scale = PI / config.timestep();
    Ok(q.scaled(Complex64::new(scale, 0.0))
        .axpy(Complex64::new(0.0, 1.0 / config.timestep()), &diff))
}

/// Two adjacent down spins on even site `even_site` and odd site `even_site + 1`,
/// all other spins up.
pub fn down_pair_state(config: &ChainConfig, even_site: usize) -> Result<OntState> {
    let n = config.num_spins();
    if !even_site.is_multiple_of(2) || even_site < 2 || even_site + 1 > n {
        return Err(Error::SiteOutOfRange {
            site: even_site,
            num_spins: n,
        });
    }
    OntState::all_up(n)?
        .with_spin(even_site, false)?
        .with_spin(even_site + 1, false)
}

/// Even site used by default for the down pair: the middle of the chain.
pub fn default_pair_site(config: &ChainConfig) -> usize {
    let half = config.half();
    if half.is_multiple_of(2) {
        half
    } else {
        half + 1
    }
}

/// Per-orbit result of [`verify_bch`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitCheck {
    pub orbit_min_index: u64,
    pub orbit_length: usize,
    /// `max |exp(-i H T) - U|` on the orbit block (exact form).
    pub exp_deviation: f64,
    /// Largest eigen-residual, Hermiticity defect or leakage of the exact block.
    pub block_defect: f64,
    /// Distance of the block eigenvalues from the cogwheel levels `2 pi k / (S T)`.
    pub spectrum_deviation: f64,
    /// Exact vs cotangent form on Fourier vectors with `U != 1`.
    pub complement_deviation: f64,
    /// `|(H_cot - H_exact) u - (pi/T) u|` on the uniform superposition `u`.
    pub uniform_gap_deviation: f64,
    pub pass: bool,
}

impl OrbitCheck {
    pub fn max_deviation(&self) -> f64 {
        [
            self.exp_deviation,
            self.block_defect,
            self.spectrum_deviation,
            self.complement_deviation,
            self.uniform_gap_deviation,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BchReport {
    pub num_spins: usize,
    pub timestep: f64,
    pub tolerance: f64,
    /// Sorted by smallest basis index in the orbit.
    pub orbits: Vec<OrbitCheck>,
    pub max_deviation: f64,
    pub pass: bool,
}

fn vec_max_abs(v: &CVector) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn check_orbit(
    exact: &ChainHamiltonian,
    cot: &ChainHamiltonian,
    orbit: &Orbit,
    tolerance: f64,
) -> Result<OrbitCheck> {
    let len = orbit.len();
    let t = exact.config.timestep();
    let half = exact.config.half();
    let (block, leak) = exact.orbit_block(orbit)?;
    let (cot_block, cot_leak) = cot.orbit_block(orbit)?;
    let shift = cyclic_shift(len);

    let mut basis = CMatrix::zeros(len, len);
    let mut phases = Vec::with_capacity(len);
    let mut residual: f64 = 0.0;
    let mut spectrum_deviation: f64 = 0.0;
    let mut complement_deviation: f64 = 0.0;
    let mut uniform_gap_deviation: f64 = 0.0;
    let level = 2.0 * PI / (half as f64 * t);
    for k in 0..len {
        let v = cycle_eigenvector(len, k);
        let hv = &block * &v;
        let energy = v.dotc(&hv).re;
        residual = residual.max(vec_max_abs(&(&hv - &v * Complex64::from(energy))));
        let nearest = (energy / level).round();
        spectrum_deviation = spectrum_deviation.max(if (0.0..half as f64).contains(&nearest) {
            (energy - nearest * level).abs()
        } else {
            f64::INFINITY
        });
        phases.push(Complex64::from_polar(1.0, -energy * t));

        let gap = &cot_block * &v - &hv;
        if k == 0 {
            uniform_gap_deviation = vec_max_abs(&(gap - &v * Complex64::from(PI / t)));
        } else {
            complement_deviation = complement_deviation.max(vec_max_abs(&gap));
        }
        basis.set_column(k, &v);
    }
    let evolution = spectral_sum(&basis, &phases);
    let exp_deviation = max_abs_diff(&evolution, &shift);
    let hermiticity = max_abs_diff(&block, &block.adjoint());
    let block_defect = [residual, hermiticity, leak, cot_leak].into_iter().fold(0.0, f64::max);

    let mut check = OrbitCheck {
        orbit_min_index: orbit.min_index(),
        orbit_length: len,
        exp_deviation,
        block_defect,
        spectrum_deviation,
        complement_deviation,
        uniform_gap_deviation,
        pass: false,
    };
    check.pass = check.max_deviation() < tolerance;
    Ok(check)
}

/// Checks the listed orbits; rows come back sorted by smallest basis index.
pub fn verify_orbits(config: &ChainConfig, orbits: &[Orbit], tolerance: f64) -> Result<BchReport> {
    let exact = build_hamiltonian(config, HamiltonianForm::Exact)?;
    let cot = build_hamiltonian(config, HamiltonianForm::Cotangent)?;
    if let Some(o) = orbits.iter().find(|o| o.num_spins() != config.num_spins()) {
        return Err(Error::SizeMismatch {
            expected: config.num_spins(),
            found: o.num_spins(),
        });
    }
    let mut rows = orbits
        .par_iter()
        .map(|o| check_orbit(&exact, &cot, o, tolerance))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.orbit_min_index);
    rows.dedup_by_key(|r| r.orbit_min_index);
    let max_deviation = rows.iter().map(OrbitCheck::max_deviation).fold(0.0, f64::max);
    Ok(BchReport {
        num_spins: config.num_spins(),
        timestep: config.timestep(),
        tolerance,
        pass: rows.iter().all(|r| r.pass),
        orbits: rows,
        max_deviation,
    })
}

/// Exhaustive per-orbit check of `exp(-i H T) = U` and of the cotangent form.
pub fn verify_bch(config: &ChainConfig) -> Result<BchReport> {
    verify_bch_with(config, BCH_TOLERANCE)
}

pub fn verify_bch_with(config: &ChainConfig, tolerance: f64) -> Result<BchReport> {
    verify_orbits(config, &orbit_census(config)?, tolerance)
}
