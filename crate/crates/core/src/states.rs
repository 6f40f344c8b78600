//! Ontological states of a periodic Ising chain.
//!
//! A chain of `2S` two-state spins is encoded in the low `2S` bits of a `u64`:
//! site `k` (1-based) lives at bit `k - 1`, with spin up stored as `1`. The
//! integer is used directly as the index of the state in the preferred basis.
//!
//! The one-step update `U` first exchanges all even pairs `(2l, 2l+1)` and then
//! all odd pairs `(2k-1, 2k)`, with site `2S + 1` identified with site `1`. The
//! net effect is that spins on odd sites move two sites to the left and spins on
//! even sites move two sites to the right, so every state returns to itself
//! after `S` updates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest chain length representable with integer basis indices.
pub const MAX_SPINS: usize = 62;

/// Largest chain length for which the full basis is enumerated in memory.
pub const MAX_CENSUS_SPINS: usize = 28;

/// Size and time step of a periodic spin chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    num_spins: usize,
    timestep: f64,
}

impl ChainConfig {
    pub fn new(num_spins: usize, timestep: f64) -> Result<Self> {
        if num_spins < 4 || !num_spins.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "chain length must be even and at least 4, got {num_spins}"
            )));
        }
        if num_spins > MAX_SPINS {
            return Err(Error::TooLarge(format!(
                "chain length {num_spins} exceeds the supported maximum {MAX_SPINS}"
            )));
        }
        if !(timestep.is_finite() && timestep > 0.0) {
            return Err(Error::Config(format!(
                "timestep must be positive and finite, got {timestep}"
            )));
        }
        Ok(Self {
            num_spins,
            timestep,
        })
    }

    /// Chain of `num_spins` sites with unit time step.
    pub fn with_spins(num_spins: usize) -> Result<Self> {
        Self::new(num_spins, 1.0)
    }

    /// Number of independent spins, `2S`.
    pub fn num_spins(&self) -> usize {
        self.num_spins
    }

    /// Number of site pairs `S`; also the period of the chain update.
    pub fn half(&self) -> usize {
        self.num_spins / 2
    }

    pub fn timestep(&self) -> f64 {
        self.timestep
    }

    /// Dimension of the preferred basis, `2^(2S)`.
    pub fn dimension(&self) -> u64 {
        1u64 << self.num_spins
    }

    pub(crate) fn check(&self, state: &OntState) -> Result<()> {
        if state.num_spins != self.num_spins {
            return Err(Error::SizeMismatch {
                expected: self.num_spins,
                found: state.num_spins,
            });
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn mask(num_spins: usize) -> u64 {
    if num_spins >= 64 {
        u64::MAX
    } else {
        (1u64 << num_spins) - 1
    }
}

/// One basis element: a definite configuration of all spins of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OntState {
    bits: u64,
    num_spins: usize,
}

impl OntState {
    /// State with basis index `index` on a chain of `num_spins` sites.
    pub fn from_index(num_spins: usize, index: u64) -> Result<Self> {
        if num_spins == 0 || num_spins > MAX_SPINS {
            return Err(Error::Config(format!(
                "spin count must be in 1..={MAX_SPINS}, got {num_spins}"
            )));
        }
        if index & !mask(num_spins) != 0 {
            return Err(Error::InvalidState(format!(
                "index {index} does not fit in {num_spins} spins"
            )));
        }
        Ok(Self {
            bits: index,
            num_spins,
        })
    }

    /// Builds a state from spin values listed for sites `1..=n`; `true` is up.
    pub fn from_spins(spins: &[bool]) -> Result<Self> {
        let bits = spins
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &up)| acc | (u64::from(up) << k));
        Self::from_index(spins.len(), bits)
    }

    pub fn all_up(num_spins: usize) -> Result<Self> {
        Self::from_index(num_spins, mask(num_spins))
    }

    pub fn all_down(num_spins: usize) -> Result<Self> {
        Self::from_index(num_spins, 0)
    }

    pub fn index(&self) -> u64 {
        self.bits
    }

    pub fn num_spins(&self) -> usize {
        self.num_spins
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.num_spins {
            return Err(Error::SiteOutOfRange {
                site,
                num_spins: self.num_spins,
            });
        }
        Ok(())
    }

    /// Spin at 1-based `site`; `true` is up.
    pub fn spin(&self, site: usize) -> Result<bool> {
        self.check_site(site)?;
        Ok(self.bits >> (site - 1) & 1 == 1)
    }

    /// Spin at `site` as the Ising value `+1` / `-1`.
    pub fn ising(&self, site: usize) -> Result<i8> {
        Ok(if self.spin(site)? { 1 } else { -1 })
    }

    pub fn spins(&self) -> Vec<bool> {
        (0..self.num_spins).map(|k| self.bits >> k & 1 == 1).collect()
    }

    pub fn with_spin(&self, site: usize, up: bool) -> Result<Self> {
        self.check_site(site)?;
        let bit = 1u64 << (site - 1);
        let bits = if up { self.bits | bit } else { self.bits & !bit };
        Ok(Self { bits, ..*self })
    }
}

impl fmt::Display for OntState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.num_spins {
            f.write_str(if self.bits >> k & 1 == 1 { "u" } else { "d" })?;
        }
        Ok(())
    }
}

/// Parses `u`/`d` literals read left to right as sites `1..=n`.
impl FromStr for OntState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let spins = s
            .chars()
            .map(|c| match c {
                'u' | 'U' => Ok(true),
                'd' | 'D' => Ok(false),
                other => Err(Error::InvalidState(format!(
                    "unexpected character {other:?} in spin literal {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_spins(&spins)
    }
}

/// Exchanges the spins at sites `i` and `j` of a raw index (0-based bit positions).
#[inline]
pub(crate) fn swap_bits(bits: u64, a: usize, b: usize) -> u64 {
    let x = ((bits >> a) ^ (bits >> b)) & 1;
    bits ^ (x << a) ^ (x << b)
}

/// Spin-exchange transposition `P_ij` applied to a basis state.
pub fn transpose(state: &OntState, i: usize, j: usize) -> Result<OntState> {
    state.check_site(i)?;
    state.check_site(j)?;
    Ok(OntState {
        bits: swap_bits(state.bits, i - 1, j - 1),
        num_spins: state.num_spins,
    })
}

#[inline]
fn odd_site_mask(num_spins: usize) -> u64 {
    0x5555_5555_5555_5555 & mask(num_spins)
}

#[inline]
fn rotate_down(bits: u64, by: usize, num_spins: usize) -> u64 {
    ((bits >> by) | (bits << (num_spins - by))) & mask(num_spins)
}

#[inline]
fn rotate_up(bits: u64, by: usize, num_spins: usize) -> u64 {
    ((bits << by) | (bits >> (num_spins - by))) & mask(num_spins)
}

/// Chain update on a raw basis index. `num_spins` must be even and `>= 4`.
#[inline]
pub fn update_index(bits: u64, num_spins: usize) -> u64 {
    let odd = odd_site_mask(num_spins);
    rotate_down(bits & odd, 2, num_spins) | rotate_up(bits & !odd, 2, num_spins)
}

/// Inverse chain update (`U^dagger`) on a raw basis index.
#[inline]
pub fn inverse_update_index(bits: u64, num_spins: usize) -> u64 {
    let odd = odd_site_mask(num_spins);
    rotate_up(bits & odd, 2, num_spins) | rotate_down(bits & !odd, 2, num_spins)
}

/// One step of the chain dynamics, `U|state>`.
pub fn chain_update(state: &OntState, config: &ChainConfig) -> Result<OntState> {
    config.check(state)?;
    Ok(OntState {
        bits: update_index(state.bits, state.num_spins),
        num_spins: state.num_spins,
    })
}

/// Inverse step, `U^dagger|state>`.
pub fn chain_update_inverse(state: &OntState, config: &ChainConfig) -> Result<OntState> {
    config.check(state)?;
    Ok(OntState {
        bits: inverse_update_index(state.bits, state.num_spins),
        num_spins: state.num_spins,
    })
}

/// The pair sequence making up one update, in order of application: even pairs
/// `(2l, 2l+1)` first, then odd pairs `(2k-1, 2k)`. Site `2S + 1` is written as 1.
pub fn update_transpositions(num_spins: usize) -> Vec<(usize, usize)> {
    let half = num_spins / 2;
    let even = (1..=half).map(|l| (2 * l, if 2 * l + 1 > num_spins { 1 } else { 2 * l + 1 }));
    let odd = (1..=half).map(|k| (2 * k - 1, 2 * k));
    even.chain(odd).collect()
}

/// Chain update computed by composing the individual transpositions.
pub fn chain_update_by_transpositions(state: &OntState, config: &ChainConfig) -> Result<OntState> {
    config.check(state)?;
    update_transpositions(config.num_spins)
        .into_iter()
        .try_fold(*state, |s, (i, j)| transpose(&s, i, j))
}

/// Cycle of a basis state under the chain update, starting at the state itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orbit {
    num_spins: usize,
    states: Vec<u64>,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Basis indices in update order: `[psi, U psi, U^2 psi, ...]`.
    pub fn indices(&self) -> &[u64] {
        &self.states
    }

    pub fn states(&self) -> impl Iterator<Item = OntState> + '_ {
        let num_spins = self.num_spins;
        self.states.iter().map(move |&bits| OntState { bits, num_spins })
    }

    pub fn min_index(&self) -> u64 {
        self.states.iter().copied().min().unwrap_or(0)
    }

    pub fn num_spins(&self) -> usize {
        self.num_spins
    }

    /// Position of `index` within the cycle, if present.
    pub fn position(&self, index: u64) -> Option<usize> {
        self.states.iter().position(|&s| s == index)
    }
}

fn orbit_from_index(start: u64, num_spins: usize) -> Orbit {
    let mut states = vec![start];
    let mut cur = update_index(start, num_spins);
    while cur != start {
        states.push(cur);
        cur = update_index(cur, num_spins);
    }
    Orbit { num_spins, states }
}

pub fn orbit_of(state: &OntState, config: &ChainConfig) -> Result<Orbit> {
    config.check(state)?;
    Ok(orbit_from_index(state.bits, state.num_spins))
}

/// Fixed point test: all odd-site spins agree and all even-site spins agree.
pub fn is_zero_mode(state: &OntState, config: &ChainConfig) -> Result<bool> {
    config.check(state)?;
    let odd = odd_site_mask(state.num_spins);
    let odd_bits = state.bits & odd;
    let even_bits = state.bits & !odd;
    Ok((odd_bits == 0 || odd_bits == odd) && (even_bits == 0 || even_bits == mask(state.num_spins) & !odd))
}

/// The four static states: all up, all down, and the two alternating patterns.
/// Sorted by basis index.
pub fn zero_modes(config: &ChainConfig) -> [OntState; 4] {
    let n = config.num_spins;
    let odd = odd_site_mask(n);
    let even = mask(n) & !odd;
    let mut out = [0, even, odd, mask(n)].map(|bits| OntState { bits, num_spins: n });
    out.sort();
    out
}

/// All orbits of the chain update over the full basis, ordered by their
/// smallest basis index. Each orbit starts at that smallest index.
pub fn orbit_census(config: &ChainConfig) -> Result<Vec<Orbit>> {
    let n = config.num_spins;
    if n > MAX_CENSUS_SPINS {
        return Err(Error::TooLarge(format!(
            "exhaustive census limited to {MAX_CENSUS_SPINS} spins, got {n}"
        )));
    }
    let dim = config.dimension();
    let mut seen = vec![0u64; (dim as usize).div_ceil(64)];
    let mut orbits = Vec::new();
    for start in 0..dim {
        if seen[(start / 64) as usize] >> (start % 64) & 1 == 1 {
            continue;
        }
        let orbit = orbit_from_index(start, n);
        for &s in &orbit.states {
            seen[(s / 64) as usize] |= 1 << (s % 64);
        }
        orbits.push(orbit);
    }
    Ok(orbits)
}

/// Orbit-length histogram as sorted `(length, count)` pairs.
pub fn orbit_length_histogram(orbits: &[Orbit]) -> Vec<(usize, usize)> {
    let mut hist = std::collections::BTreeMap::new();
    for o in orbits {
        *hist.entry(o.len()).or_insert(0usize) += 1;
    }
    hist.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(s: &str) -> OntState {
        s.parse().unwrap()
    }

    #[test]
    fn index_round_trip() {
        let s = st("duuu");
        assert_eq!(s.index(), 0b1110);
        assert_eq!(OntState::from_index(4, 0b1110).unwrap(), s);
        assert_eq!(s.to_string(), "duuu");
        assert_eq!(OntState::from_spins(&s.spins()).unwrap(), s);
        assert_eq!(s.ising(1).unwrap(), -1);
        assert_eq!(s.ising(2).unwrap(), 1);
    }

    #[test]
    fn transpose_examples() {
        assert_eq!(transpose(&st("ud"), 1, 2).unwrap(), st("du"));
        assert_eq!(transpose(&st("uudd"), 2, 3).unwrap(), st("udud"));
        assert_eq!(transpose(&st("uudd"), 3, 2).unwrap(), st("udud"));
    }

    #[test]
    fn transpose_rejects_bad_sites() {
        assert_eq!(
            transpose(&st("uudd"), 0, 2),
            Err(Error::SiteOutOfRange { site: 0, num_spins: 4 })
        );
        assert!(transpose(&st("uudd"), 1, 5).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ChainConfig::new(4, 1.0).is_ok());
        assert!(matches!(ChainConfig::new(5, 1.0), Err(Error::Config(_))));
        assert!(matches!(ChainConfig::new(2, 1.0), Err(Error::Config(_))));
        assert!(matches!(ChainConfig::new(4, 0.0), Err(Error::Config(_))));
        assert!(matches!(ChainConfig::new(4, f64::NAN), Err(Error::Config(_))));
        assert!(ChainConfig::new(62, 1.0).is_ok());
        assert!(matches!(ChainConfig::new(64, 1.0), Err(Error::TooLarge(_))));
    }

    #[test]
    fn update_examples() {
        let c4 = ChainConfig::with_spins(4).unwrap();
        assert_eq!(chain_update(&st("uuuu"), &c4).unwrap(), st("uuuu"));
        assert_eq!(chain_update(&st("duuu"), &c4).unwrap(), st("uudu"));
        assert_eq!(chain_update_by_transpositions(&st("duuu"), &c4).unwrap(), st("uudu"));

        let c6 = ChainConfig::with_spins(6).unwrap();
        assert_eq!(chain_update(&st("duuuuu"), &c6).unwrap(), st("uuuudu"));
        assert_eq!(
            chain_update_by_transpositions(&st("duuuuu"), &c6).unwrap(),
            st("uuuudu")
        );
    }

    #[test]
    fn update_swaps_halves_for_four_sites() {
        // |s1 s2 s3 s4> -> |s3 s4 s1 s2>
        let c4 = ChainConfig::with_spins(4).unwrap();
        for idx in 0..16 {
            let s = OntState::from_index(4, idx).unwrap();
            let out = chain_update(&s, &c4).unwrap();
            let v = s.spins();
            assert_eq!(out.spins(), vec![v[2], v[3], v[0], v[1]]);
        }
    }

    #[test]
    fn update_rejects_size_mismatch() {
        let c6 = ChainConfig::with_spins(6).unwrap();
        assert_eq!(
            chain_update(&st("uuuu"), &c6),
            Err(Error::SizeMismatch { expected: 6, found: 4 })
        );
        assert!(orbit_of(&st("uuuu"), &c6).is_err());
        assert!(is_zero_mode(&st("uuuu"), &c6).is_err());
    }

    #[test]
    fn inverse_undoes_update() {
        let c8 = ChainConfig::with_spins(8).unwrap();
        for idx in 0..256 {
            let s = OntState::from_index(8, idx).unwrap();
            let fwd = chain_update(&s, &c8).unwrap();
            assert_eq!(chain_update_inverse(&fwd, &c8).unwrap(), s);
        }
    }

    #[test]
    fn orbit_examples() {
        let c4 = ChainConfig::with_spins(4).unwrap();
        assert_eq!(orbit_of(&st("udud"), &c4).unwrap().len(), 1);
        let o = orbit_of(&st("duuu"), &c4).unwrap();
        assert_eq!(o.states().collect::<Vec<_>>(), vec![st("duuu"), st("uudu")]);

        let census = orbit_census(&c4).unwrap();
        assert_eq!(orbit_length_histogram(&census), vec![(1, 4), (2, 6)]);
    }

    #[test]
    fn zero_mode_examples() {
        let c4 = ChainConfig::with_spins(4).unwrap();
        assert!(is_zero_mode(&st("uuuu"), &c4).unwrap());
        assert!(is_zero_mode(&st("udud"), &c4).unwrap());
        assert!(!is_zero_mode(&st("duuu"), &c4).unwrap());
        let c6 = ChainConfig::with_spins(6).unwrap();
        let zm = zero_modes(&c6);
        assert_eq!(
            zm.map(|s| s.to_string()),
            ["dddddd", "ududud", "dududu", "uuuuuu"].map(String::from)
        );
        for z in zm {
            assert!(is_zero_mode(&z, &c6).unwrap());
        }
    }

    #[test]
    fn transposition_list_wraps_last_pair() {
        assert_eq!(
            update_transpositions(4),
            vec![(2, 3), (4, 1), (1, 2), (3, 4)]
        );
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("uxd".parse::<OntState>().is_err());
        assert!("".parse::<OntState>().is_err());
    }
}
