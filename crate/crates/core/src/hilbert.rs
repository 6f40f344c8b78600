//! Sparse superpositions over the preferred (ontological) basis.
//!
//! Permutations of the basis only relabel indices, so amplitudes are carried
//! over untouched and the support size never changes. Operators built from
//! several permutations (Hamiltonians) produce unnormalized [`SparseVector`]s.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ONE, ZERO};
use crate::states::{
    inverse_update_index, mask, swap_bits, update_index, ChainConfig, OntState, MAX_SPINS,
};

/// Amplitudes below this modulus are dropped when a state is normalized.
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-14;

/// Accepted deviation of the squared norm from one.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Largest chain handled by the dense Pauli construction.
pub const MAX_DENSE_SPINS: usize = 6;

/// Unnormalized sparse vector, keyed by basis index in ascending order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    num_spins: usize,
    amps: BTreeMap<u64, Complex64>,
}

impl SparseVector {
    pub fn zero(num_spins: usize) -> Self {
        Self {
            num_spins,
            amps: BTreeMap::new(),
        }
    }

    /// Sums repeated indices. Fails if an index does not fit in `num_spins` bits.
    pub fn from_pairs<I>(num_spins: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, Complex64)>,
    {
        if num_spins == 0 || num_spins > MAX_SPINS {
            return Err(Error::Config(format!(
                "spin count must be in 1..={MAX_SPINS}, got {num_spins}"
            )));
        }
        let mut v = Self::zero(num_spins);
        for (idx, a) in pairs {
            if idx & !mask(num_spins) != 0 {
                return Err(Error::InvalidState(format!(
                    "index {idx} does not fit in {num_spins} spins"
                )));
            }
            v.add_at(idx, a);
        }
        Ok(v)
    }

    pub fn num_spins(&self) -> usize {
        self.num_spins
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn get(&self, index: u64) -> Complex64 {
        self.amps.get(&index).copied().unwrap_or(ZERO)
    }

    pub(crate) fn add_at(&mut self, index: u64, a: Complex64) {
        *self.amps.entry(index).or_insert(ZERO) += a;
    }

    /// `(index, amplitude)` pairs in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.amps.iter().map(|(&k, &v)| (k, v))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &SparseVector) -> Complex64 {
        let (small, large, conj_small) = if self.len() <= other.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        small
            .amps
            .iter()
            .filter_map(|(k, &a)| large.amps.get(k).map(|&b| if conj_small { a.conj() * b } else { b.conj() * a }))
            .sum()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            num_spins: self.num_spins,
            amps: self.amps.iter().map(|(&k, &a)| (k, a * factor)).collect(),
        }
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: Complex64, other: &SparseVector) -> Self {
        let mut out = self.clone();
        for (k, a) in other.iter() {
            out.add_at(k, factor * a);
        }
        out
    }

    pub fn sub(&self, other: &SparseVector) -> Self {
        self.axpy(-ONE, other)
    }

    /// Drops entries with modulus below `threshold`.
    pub fn pruned(&self, threshold: f64) -> Self {
        Self {
            num_spins: self.num_spins,
            amps: self
                .amps
                .iter()
                .filter(|(_, a)| a.norm() >= threshold)
                .map(|(&k, &a)| (k, a))
                .collect(),
        }
    }

    /// Relabels every basis index through `f`, which must be a bijection.
    pub fn permuted(&self, f: impl Fn(u64) -> u64) -> Self {
        Self {
            num_spins: self.num_spins,
            amps: self.amps.iter().map(|(&k, &a)| (f(k), a)).collect(),
        }
    }

    /// Largest modulus of the entrywise difference.
    pub fn max_abs_diff(&self, other: &SparseVector) -> f64 {
        self.sub(other).amps.values().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Dense copy of length `2^num_spins`; intended for small verification sizes.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut out = vec![ZERO; 1usize << self.num_spins];
        for (k, a) in self.iter() {
            out[k as usize] = a;
        }
        out
    }
}

/// Normalized superposition of chain basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct QState {
    vector: SparseVector,
}

impl QState {
    /// Single basis state with amplitude one.
    pub fn basis(state: &OntState) -> Self {
        let mut vector = SparseVector::zero(state.num_spins());
        vector.add_at(state.index(), ONE);
        Self { vector }
    }

    /// Wraps a vector that is already normalized to within [`NORM_TOLERANCE`].
    pub fn new(vector: SparseVector) -> Result<Self> {
        let vector = vector.pruned(DEFAULT_PRUNE_THRESHOLD);
        let n2 = vector.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "state is not normalized: squared norm {n2}"
            )));
        }
        Ok(Self { vector })
    }

    /// Prunes and rescales to unit norm.
    pub fn normalized(vector: &SparseVector) -> Result<Self> {
        Self::normalized_with(vector, DEFAULT_PRUNE_THRESHOLD)
    }

    pub fn normalized_with(vector: &SparseVector, prune_threshold: f64) -> Result<Self> {
        let pruned = vector.pruned(prune_threshold);
        let norm = pruned.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            vector: pruned.scaled(Complex64::new(norm.recip(), 0.0)),
        })
    }

    /// Superposition of the listed basis states with the given amplitudes,
    /// which must already be normalized.
    pub fn from_branches(branches: &[(OntState, Complex64)]) -> Result<Self> {
        let num_spins = branches
            .first()
            .map(|(s, _)| s.num_spins())
            .ok_or_else(|| Error::InvalidState("empty branch list".into()))?;
        if let Some((s, _)) = branches.iter().find(|(s, _)| s.num_spins() != num_spins) {
            return Err(Error::SizeMismatch {
                expected: num_spins,
                found: s.num_spins(),
            });
        }
        Self::new(SparseVector::from_pairs(
            num_spins,
            branches.iter().map(|(s, a)| (s.index(), *a)),
        )?)
    }

    pub fn num_spins(&self) -> usize {
        self.vector.num_spins
    }

    pub fn vector(&self) -> &SparseVector {
        &self.vector
    }

    pub fn into_vector(self) -> SparseVector {
        self.vector
    }

    pub fn support_size(&self) -> usize {
        self.vector.len()
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        self.vector.get(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.vector.iter()
    }

    /// Amplitudes sorted by `(re, im)`; the multiset carried by the state.
    pub fn sorted_amplitudes(&self) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = self.vector.amps.values().copied().collect();
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    /// Sum of `|a|^2` taken in [`Self::sorted_amplitudes`] order, so the result
    /// depends only on the amplitude multiset and not on the basis labels.
    pub fn born_weight(&self) -> f64 {
        self.sorted_amplitudes().iter().map(|a| a.norm_sqr()).sum()
    }

    /// `(index, re, im)` triples in ascending index order.
    pub fn to_triples(&self) -> Vec<(u64, f64, f64)> {
        self.iter().map(|(k, a)| (k, a.re, a.im)).collect()
    }

    pub fn from_triples(num_spins: usize, triples: &[(u64, f64, f64)]) -> Result<Self> {
        Self::new(SparseVector::from_pairs(
            num_spins,
            triples.iter().map(|&(k, re, im)| (k, Complex64::new(re, im))),
        )?)
    }

    pub(crate) fn from_permuted(vector: SparseVector) -> Self {
        Self { vector }
    }
}

/// Wire form: `{"num_spins": n, "amplitudes": [[index, re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct QStateWire {
    num_spins: usize,
    amplitudes: Vec<(u64, f64, f64)>,
}

impl Serialize for QState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        QStateWire {
            num_spins: self.num_spins(),
            amplitudes: self.to_triples(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = QStateWire::deserialize(deserializer)?;
        QState::from_triples(wire.num_spins, &wire.amplitudes).map_err(serde::de::Error::custom)
    }
}

fn check_size(config: &ChainConfig, num_spins: usize) -> Result<()> {
    if config.num_spins() != num_spins {
        return Err(Error::SizeMismatch {
            expected: config.num_spins(),
            found: num_spins,
        });
    }
    Ok(())
}

/// `U` applied to a sparse vector.
pub fn update_vector(v: &SparseVector, config: &ChainConfig) -> Result<SparseVector> {
    check_size(config, v.num_spins)?;
    let n = v.num_spins;
    Ok(v.permuted(|k| update_index(k, n)))
}

/// `U^dagger` applied to a sparse vector.
pub fn inverse_update_vector(v: &SparseVector, config: &ChainConfig) -> Result<SparseVector> {
    check_size(config, v.num_spins)?;
    let n = v.num_spins;
    Ok(v.permuted(|k| inverse_update_index(k, n)))
}

/// One chain update of a superposition; amplitudes are moved, never changed.
pub fn apply_chain_update(q: &QState, config: &ChainConfig) -> Result<QState> {
    Ok(QState::from_permuted(update_vector(&q.vector, config)?))
}

/// Dense permutation matrix with entry `(f(b), b) = 1` for every basis index `b`.
pub fn permutation_matrix(num_spins: usize, f: impl Fn(u64) -> u64) -> CMatrix {
    let dim = 1usize << num_spins;
    let mut m = CMatrix::zeros(dim, dim);
    for b in 0..dim {
        m[(f(b as u64) as usize, b)] = ONE;
    }
    m
}

fn pauli(axis: usize) -> CMatrix {
    let i = Complex64::i();
    // Local basis order is (down, up) = (bit 0, bit 1).
    match axis {
        0 => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        1 => CMatrix::from_row_slice(2, 2, &[ZERO, i, -i, ZERO]),
        _ => CMatrix::from_row_slice(2, 2, &[-ONE, ZERO, ZERO, ONE]),
    }
}

/// Embeds single-site operators: site `k` acts on bit `k - 1` of the index.
fn site_product(num_spins: usize, ops: &[(usize, &CMatrix)]) -> CMatrix {
    let id = CMatrix::identity(2, 2);
    let mut acc = CMatrix::identity(1, 1);
    for site in (1..=num_spins).rev() {
        let op = ops.iter().find(|(s, _)| *s == site).map_or(&id, |(_, m)| *m);
        acc = acc.kronecker(op);
    }
    acc
}

/// Dense `(sigma_i . sigma_j + 1) / 2` built from Kronecker products of Pauli matrices.
pub fn pauli_transposition_matrix(i: usize, j: usize, num_spins: usize) -> Result<CMatrix> {
    if num_spins > MAX_DENSE_SPINS {
        return Err(Error::TooLarge(format!(
            "dense construction limited to {MAX_DENSE_SPINS} spins, got {num_spins}"
        )));
    }
    for site in [i, j] {
        if site == 0 || site > num_spins {
            return Err(Error::SiteOutOfRange { site, num_spins });
        }
    }
    if i == j {
        return Err(Error::Config(format!(
            "the Pauli form needs two distinct sites, got ({i}, {j})"
        )));
    }
    let dim = 1usize << num_spins;
    let mut sum = CMatrix::identity(dim, dim);
    for axis in 0..3 {
        let s = pauli(axis);
        sum += site_product(num_spins, &[(i, &s), (j, &s)]);
    }
    Ok(sum * Complex64::new(0.5, 0.0))
}

/// Basis permutation matrix of the transposition `P_ij`.
pub fn transposition_permutation_matrix(i: usize, j: usize, num_spins: usize) -> Result<CMatrix> {
    if num_spins > MAX_DENSE_SPINS {
        return Err(Error::TooLarge(format!(
            "dense construction limited to {MAX_DENSE_SPINS} spins, got {num_spins}"
        )));
    }
    for site in [i, j] {
        if site == 0 || site > num_spins {
            return Err(Error::SiteOutOfRange { site, num_spins });
        }
    }
    Ok(permutation_matrix(num_spins, |b| swap_bits(b, i - 1, j - 1)))
}

/// Joint state with index `index_1 * 2^(n_2) + index_2`.
pub fn tensor(q1: &QState, q2: &QState) -> Result<QState> {
    let n1 = q1.num_spins();
    let n2 = q2.num_spins();
    if n1 + n2 > MAX_SPINS {
        return Err(Error::TooLarge(format!(
            "joint system of {} spins exceeds the index capacity of {MAX_SPINS}",
            n1 + n2
        )));
    }
    let mut v = SparseVector::zero(n1 + n2);
    for (a, x) in q1.iter() {
        for (b, y) in q2.iter() {
            v.add_at(a << n2 | b, x * y);
        }
    }
    Ok(QState::from_permuted(v))
}
