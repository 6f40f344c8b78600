//! Two-chain quantum-classical hybrid experiments.
//!
//! Chain 1 carries a superposition of basis states, chain 2 a classical
//! ensemble of basis states. Both evolve by their chain updates; in between two
//! updates a spin-exchange interaction swaps `s_i <-> s'_j` and `s'_i <-> s_j`
//! across the chains. Each ensemble member is then analysed by a Schmidt
//! decomposition across the chain 1 | chain 2 cut.
//!
//! Joint basis indices are `index_1 * 2^(n_2) + index_2`, so chain 1 occupies the
//! high bits.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{tensor, QState, SparseVector};
use crate::states::{mask, swap_bits, update_index, ChainConfig, OntState};

/// Singular values at or below this count as zero.
pub const SCHMIDT_RANK_THRESHOLD: f64 = 1e-10;

/// Accepted deviation of an ensemble's total probability from one.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// Interaction sites used when none are given.
pub const DEFAULT_SITES: (usize, usize) = (4, 5);

/// Number of spins on each side of the cut; chain 1 is the left factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub left_spins: usize,
    pub right_spins: usize,
}

impl Bipartition {
    pub fn new(left_spins: usize, right_spins: usize) -> Self {
        Self {
            left_spins,
            right_spins,
        }
    }

    pub fn total(&self) -> usize {
        self.left_spins + self.right_spins
    }

    pub fn split(&self, index: u64) -> (u64, u64) {
        (index >> self.right_spins, index & mask(self.right_spins))
    }

    pub fn join(&self, left: u64, right: u64) -> u64 {
        left << self.right_spins | right
    }

    fn check(&self, q: &QState) -> Result<()> {
        if q.num_spins() != self.total() {
            return Err(Error::SizeMismatch {
                expected: self.total(),
                found: q.num_spins(),
            });
        }
        Ok(())
    }
}

/// Probability distribution over basis states of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    members: Vec<(f64, OntState)>,
}

impl ClassicalState {
    pub fn new(members: Vec<(f64, OntState)>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidState("classical ensemble is empty".into()))?;
        let n = first.1.num_spins();
        if let Some((_, s)) = members.iter().find(|(_, s)| s.num_spins() != n) {
            return Err(Error::SizeMismatch {
                expected: n,
                found: s.num_spins(),
            });
        }
        if members.iter().any(|(p, _)| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidState("probabilities must be non-negative".into()));
        }
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { members })
    }

    /// Distribution concentrated on a single state.
    pub fn sharp(state: OntState) -> Self {
        Self {
            members: vec![(1.0, state)],
        }
    }

    pub fn is_sharp(&self) -> bool {
        self.members.len() == 1
    }

    pub fn members(&self) -> &[(f64, OntState)] {
        &self.members
    }

    pub fn num_spins(&self) -> usize {
        self.members[0].1.num_spins()
    }
}

/// Ensemble of joint pure states over chain 1 (x) chain 2.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    pub members: Vec<(f64, QState)>,
    pub split: Bipartition,
}

impl HybridState {
    /// `quantum (x) |os>` for every member `os` of the classical ensemble.
    pub fn prepare(quantum: &QState, classical: &ClassicalState) -> Result<Self> {
        let split = Bipartition::new(quantum.num_spins(), classical.num_spins());
        let members = classical
            .members
            .iter()
            .map(|(p, os)| Ok((*p, tensor(quantum, &QState::basis(os))?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { members, split })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Product state whose chain 2 factor is still a single basis state.
    ProductHybridIntact,
    /// Product state whose superposition now resides on chain 2.
    HybridSwapped,
    /// Schmidt rank two or more.
    Entangled,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ProductHybridIntact => "product_hybrid_intact",
            Self::HybridSwapped => "hybrid_swapped",
            Self::Entangled => "entangled",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridVerdict {
    /// Nonzero Schmidt coefficients, descending.
    pub schmidt_coefficients: Vec<f64>,
    pub schmidt_rank: usize,
    pub entropy_bits: f64,
    pub classification: Classification,
    /// Distinct chain 1 / chain 2 basis states in the support.
    pub left_support: usize,
    pub right_support: usize,
}

/// Schmidt decomposition of a joint pure state across `split`.
///
/// The coefficient matrix is restricted to the basis patterns that occur in
/// the support, so its size is bounded by the support size.
pub fn schmidt_decompose(joint: &QState, split: Bipartition) -> Result<HybridVerdict> {
    split.check(joint)?;
    let lefts: BTreeSet<u64> = joint.iter().map(|(k, _)| split.split(k).0).collect();
    let rights: BTreeSet<u64> = joint.iter().map(|(k, _)| split.split(k).1).collect();
    let lefts: Vec<u64> = lefts.into_iter().collect();
    let rights: Vec<u64> = rights.into_iter().collect();
    let mut m = DMatrix::<Complex64>::zeros(lefts.len(), rights.len());
    for (k, a) in joint.iter() {
        let (l, r) = split.split(k);
        let row = lefts.binary_search(&l).expect("left pattern present");
        let col = rights.binary_search(&r).expect("right pattern present");
        m[(row, col)] = a;
    }
    let mut values: Vec<f64> = m.singular_values().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values.retain(|&s| s > SCHMIDT_RANK_THRESHOLD);
    let rank = values.len();
    let entropy_bits = values
        .iter()
        .map(|s| s * s)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0);
    let classification = match rank {
        0 | 1 if rights.len() == 1 => Classification::ProductHybridIntact,
        0 | 1 => Classification::HybridSwapped,
        _ => Classification::Entangled,
    };
    Ok(HybridVerdict {
        schmidt_coefficients: values,
        schmidt_rank: rank,
        entropy_bits,
        classification,
        left_support: lefts.len(),
        right_support: rights.len(),
    })
}

fn check_sites(split: Bipartition, i: usize, j: usize) -> Result<()> {
    let limit = split.left_spins.min(split.right_spins);
    for site in [i, j] {
        if site == 0 || site > limit {
            return Err(Error::SiteOutOfRange {
                site,
                num_spins: limit,
            });
        }
    }
    if i == j {
        return Err(Error::Config(format!(
            "interaction sites must differ, got ({i}, {j})"
        )));
    }
    Ok(())
}

/// Interaction on a raw joint index.
fn interact_index(index: u64, split: Bipartition, i: usize, j: usize) -> u64 {
    let off = split.right_spins;
    let swapped = swap_bits(index, off + i - 1, j - 1);
    swap_bits(swapped, off + j - 1, i - 1)
}

/// Exchange interaction: chain 1 site `i` with chain 2 site `j`, and chain 2
/// site `i` with chain 1 site `j`. An involution on the joint basis.
pub fn interaction(joint: &QState, split: Bipartition, i: usize, j: usize) -> Result<QState> {
    split.check(joint)?;
    check_sites(split, i, j)?;
    let moved = joint.vector().permuted(|k| interact_index(k, split, i, j));
    Ok(QState::new(moved).expect("permutation preserves the norm"))
}

/// Both chains advance by one update.
pub fn joint_update(joint: &QState, split: Bipartition) -> Result<QState> {
    split.check(joint)?;
    let moved = joint.vector().permuted(|k| {
        let (l, r) = split.split(k);
        split.join(update_index(l, split.left_spins), update_index(r, split.right_spins))
    });
    Ok(QState::new(moved).expect("permutation preserves the norm"))
}

/// Number of updates before and after the interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub updates_before: usize,
    pub updates_after: usize,
}

impl Schedule {
    pub fn new(updates_before: usize, updates_after: usize) -> Self {
        Self {
            updates_before,
            updates_after,
        }
    }
}

impl Default for Schedule {
    fn default() -> Self {
        Self::new(1, 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberVerdict {
    pub member_index: usize,
    pub probability: f64,
    /// Chain 2 basis state of this ensemble member before evolution.
    pub classical_state: String,
    pub norm_deviation: f64,
    pub verdict: HybridVerdict,
    pub final_state: QState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridReport {
    pub split: Bipartition,
    pub schedule: Schedule,
    pub sites: Option<(usize, usize)>,
    pub members: Vec<MemberVerdict>,
}

impl HybridReport {
    /// Total probability carried by each classification, sorted by class.
    pub fn classification_weights(&self) -> Vec<(Classification, f64)> {
        let mut out: Vec<(Classification, f64)> = Vec::new();
        for m in &self.members {
            match out.iter_mut().find(|(c, _)| *c == m.verdict.classification) {
                Some((_, w)) => *w += m.probability,
                None => out.push((m.verdict.classification, m.probability)),
            }
        }
        out.sort_by_key(|(c, _)| *c);
        out
    }

    pub fn max_norm_deviation(&self) -> f64 {
        self.members.iter().map(|m| m.norm_deviation).fold(0.0, f64::max)
    }
}

/// Evolve, interact, evolve, then analyse every ensemble member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridExperiment {
    pub quantum_chain: ChainConfig,
    pub classical_chain: ChainConfig,
    pub schedule: Schedule,
    /// `None` runs the schedule without any interaction.
    pub sites: Option<(usize, usize)>,
}

impl HybridExperiment {
    /// Equal chains, default schedule and the default interaction sites.
    pub fn new(chain: ChainConfig) -> Self {
        Self {
            quantum_chain: chain,
            classical_chain: chain,
            schedule: Schedule::default(),
            sites: Some(DEFAULT_SITES),
        }
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_sites(mut self, sites: Option<(usize, usize)>) -> Self {
        self.sites = sites;
        self
    }

    pub fn split(&self) -> Bipartition {
        Bipartition::new(self.quantum_chain.num_spins(), self.classical_chain.num_spins())
    }

    fn evolve(&self, joint: QState) -> Result<QState> {
        let split = self.split();
        let mut cur = joint;
        for _ in 0..self.schedule.updates_before {
            cur = joint_update(&cur, split)?;
        }
        if let Some((i, j)) = self.sites {
            cur = interaction(&cur, split, i, j)?;
        }
        for _ in 0..self.schedule.updates_after {
            cur = joint_update(&cur, split)?;
        }
        Ok(cur)
    }

    pub fn run(&self, quantum: &QState, classical: &ClassicalState) -> Result<HybridReport> {
        if quantum.num_spins() != self.quantum_chain.num_spins() {
            return Err(Error::SizeMismatch {
                expected: self.quantum_chain.num_spins(),
                found: quantum.num_spins(),
            });
        }
        if classical.num_spins() != self.classical_chain.num_spins() {
            return Err(Error::SizeMismatch {
                expected: self.classical_chain.num_spins(),
                found: classical.num_spins(),
            });
        }
        let split = self.split();
        if let Some((i, j)) = self.sites {
            check_sites(split, i, j)?;
        }
        let prepared = HybridState::prepare(quantum, classical)?;
        let members = prepared
            .members
            .into_par_iter()
            .zip(classical.members.par_iter())
            .enumerate()
            .map(|(member_index, ((probability, joint), (_, os)))| {
                let final_state = self.evolve(joint)?;
                let verdict = schmidt_decompose(&final_state, split)?;
                Ok(MemberVerdict {
                    member_index,
                    probability,
                    classical_state: os.to_string(),
                    norm_deviation: (final_state.vector().norm() - 1.0).abs(),
                    verdict,
                    final_state,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(HybridReport {
            split,
            schedule: self.schedule,
            sites: self.sites,
            members,
        })
    }
}

pub fn run_hybrid_experiment(
    quantum: &QState,
    classical: &ClassicalState,
    experiment: &HybridExperiment,
) -> Result<HybridReport> {
    experiment.run(quantum, classical)
}

/// Reduced pure factor when `joint` is a product across `split`, as
/// normalized vectors for chain 1 and chain 2.
pub fn product_factors(joint: &QState, split: Bipartition) -> Result<Option<(SparseVector, SparseVector)>> {
    if schmidt_decompose(joint, split)?.schmidt_rank != 1 {
        return Ok(None);
    }
    let (k0, a0) = joint.iter().next().expect("normalized state has support");
    let (l0, r0) = split.split(k0);
    let left = SparseVector::from_pairs(
        split.left_spins,
        joint
            .iter()
            .filter(|(k, _)| split.split(*k).1 == r0)
            .map(|(k, a)| (split.split(k).0, a)),
    )?;
    let right = SparseVector::from_pairs(
        split.right_spins,
        joint
            .iter()
            .filter(|(k, _)| split.split(*k).0 == l0)
            .map(|(k, a)| (split.split(k).1, a / a0)),
    )?;
    let left = QState::normalized(&left)?.into_vector();
    let right = QState::normalized(&right)?.into_vector();
    Ok(Some((left, right)))
}
