//! Momentum-constrained Fock basis and free-gas energies.
//!
//! Single-particle mode `k` is the plane wave `exp(2πikx/L)/√L`. A [`BasisSet`]
//! holds every occupation pattern with `Σ n_k = N` and `Σ k n_k = K` whose
//! support lies inside `[-k_max, k_max]`, in lexicographic order of the
//! occupation tuple `(n_{-k_max}, …, n_{k_max})`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::{Error, Result};

/// Largest particle number accepted anywhere in the crate.
pub const MAX_PARTICLES: usize = 4096;
/// Largest momentum cutoff accepted by the enumerator.
pub const MAX_KMAX: usize = 256;

/// Kinetic energy `2π²k²/L²` of a particle in mode `k`.
pub fn mode_energy(k: i32, l: f64) -> f64 {
    let k = k as f64;
    2.0 * PI * PI * k * k / (l * l)
}

/// Occupation numbers over plane-wave modes. Only non-empty modes are stored,
/// sorted by mode index, so equality and ordering ignore the cutoff.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState {
    modes: Vec<(i32, u32)>,
}

impl FockState {
    /// Builds a state from `(k, n_k)` pairs. Repeated modes are summed and empty
    /// modes dropped.
    pub fn new(pairs: impl IntoIterator<Item = (i32, u32)>) -> Self {
        let mut modes: Vec<(i32, u32)> = pairs.into_iter().filter(|&(_, n)| n > 0).collect();
        modes.sort_unstable_by_key(|&(k, _)| k);
        let mut merged: Vec<(i32, u32)> = Vec::with_capacity(modes.len());
        for (k, n) in modes {
            match merged.last_mut() {
                Some((last, count)) if *last == k => *count += n,
                _ => merged.push((k, n)),
            }
        }
        FockState { modes: merged }
    }

    /// `|n_p = a, n_q = b⟩`.
    pub fn two_mode(p: i32, a: u32, q: i32, b: u32) -> Self {
        FockState::new([(p, a), (q, b)])
    }

    pub fn modes(&self) -> &[(i32, u32)] {
        &self.modes
    }

    pub fn occupation(&self, k: i32) -> u32 {
        self.modes
            .binary_search_by_key(&k, |&(m, _)| m)
            .map(|i| self.modes[i].1)
            .unwrap_or(0)
    }

    pub fn particle_count(&self) -> usize {
        self.modes.iter().map(|&(_, n)| n as usize).sum()
    }

    pub fn momentum(&self) -> i64 {
        self.modes.iter().map(|&(k, n)| k as i64 * n as i64).sum()
    }

    /// Largest `|k|` among occupied modes.
    pub fn max_abs_mode(&self) -> usize {
        self.modes
            .iter()
            .map(|&(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// `Σ n_k k²`, the kinetic energy in units of `2π²/L²`.
    pub fn kinetic_units(&self) -> u64 {
        self.modes
            .iter()
            .map(|&(k, n)| n as u64 * (k as i64 * k as i64) as u64)
            .sum()
    }

    /// Image under `k → -k`.
    pub fn reflected(&self) -> Self {
        FockState::new(self.modes.iter().map(|&(k, n)| (-k, n)))
    }

    /// Dense occupation tuple over `[-kmax, kmax]`, or `None` if the state does
    /// not fit.
    pub fn to_dense(&self, kmax: usize) -> Option<Vec<u16>> {
        if self.max_abs_mode() > kmax {
            return None;
        }
        let mut dense = vec![0u16; 2 * kmax + 1];
        for &(k, n) in &self.modes {
            dense[(k + kmax as i32) as usize] = u16::try_from(n).ok()?;
        }
        Some(dense)
    }

    pub fn from_dense(occupations: &[u16]) -> Self {
        let kmax = (occupations.len() / 2) as i32;
        FockState::new(
            occupations
                .iter()
                .enumerate()
                .map(|(i, &n)| (i as i32 - kmax, n as u32)),
        )
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.modes.is_empty() {
            return write!(f, "|vac>");
        }
        write!(f, "|")?;
        for (i, (k, n)) in self.modes.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "n{k}={n}")?;
        }
        write!(f, ">")
    }
}

/// Free-gas energy `(2π²/L²) Σ n_k k²`.
pub fn free_energy(state: &FockState, l: f64) -> f64 {
    2.0 * PI * PI * state.kinetic_units() as f64 / (l * l)
}

/// Lowest free-gas state at momentum `K`: `|n_0 = N-K, n_1 = K⟩`.
pub fn free_yrast_state(n: usize, k: i64) -> Result<FockState> {
    if k < 0 || k as usize > n {
        return Err(Error::OutOfRange {
            what: "total momentum",
            detail: format!("K={k} must lie in [0, N={n}]"),
        });
    }
    let k = k as u32;
    Ok(FockState::two_mode(0, n as u32 - k, 1, k))
}

/// One row of the two-branch excitation table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BranchEnergies {
    pub k: i64,
    /// One particle carries all momentum: `2π²K²/L²`.
    pub elementary: f64,
    /// Collective excitation `|N-K, K⟩`: `2π²|K|/L²`.
    pub yrast: f64,
}

/// Energies of the elementary and yrast branches of the ideal gas.
pub fn two_branches(n: usize, ks: &[i64], l: f64) -> Result<Vec<BranchEnergies>> {
    check_length(l)?;
    ks.iter()
        .map(|&k| {
            if k.unsigned_abs() as usize > n {
                return Err(Error::OutOfRange {
                    what: "total momentum",
                    detail: format!("|K|={} exceeds N={n}", k.abs()),
                });
            }
            let unit = 2.0 * PI * PI / (l * l);
            Ok(BranchEnergies {
                k,
                elementary: unit * (k * k) as f64,
                yrast: unit * k.abs() as f64,
            })
        })
        .collect()
}

pub(crate) fn check_length(l: f64) -> Result<()> {
    if l.is_finite() && l > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "L",
            format!("ring length must be positive, got {l}"),
        ))
    }
}

/// Ordered, indexed set of Fock states sharing `N` (and `K`, unless the set was
/// built over all momenta).
#[derive(Clone, Debug)]
pub struct BasisSet {
    n: usize,
    momentum: Option<i64>,
    kmax: usize,
    width: usize,
    occupations: Vec<u16>,
    index: HashMap<Box<[u16]>, usize>,
}

impl PartialEq for BasisSet {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.momentum == other.momentum
            && self.kmax == other.kmax
            && self.occupations == other.occupations
    }
}

fn validate_sizes(n: usize, kmax: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("N", "need at least one particle"));
    }
    if n > MAX_PARTICLES || n > u16::MAX as usize {
        return Err(Error::invalid("N", format!("{n} exceeds {MAX_PARTICLES}")));
    }
    if kmax == 0 {
        return Err(Error::invalid("k_max", "cutoff must be at least 1"));
    }
    if kmax > MAX_KMAX {
        return Err(Error::invalid(
            "k_max",
            format!("{kmax} exceeds {MAX_KMAX}"),
        ));
    }
    Ok(())
}

/// Largest basis `enumerate_basis` will build.
pub const MAX_BASIS: u128 = 20_000_000;

/// Number of Fock states with `N` particles and momentum `K` inside the cutoff,
/// counted without enumerating them (saturates at `u128::MAX`).
pub fn basis_size(n: usize, k: i64, kmax: usize) -> Result<u128> {
    validate_sizes(n, kmax)?;
    let offset = (n * kmax) as i64;
    if k.abs() > offset {
        return Ok(0);
    }
    let span = 2 * n * kmax + 1;
    // ways[p][s]: p particles with momentum s - offset over the modes seen so far
    let mut ways = vec![vec![0u128; span]; n + 1];
    ways[0][offset as usize] = 1;
    for mode in -(kmax as i64)..=kmax as i64 {
        for p in 1..=n {
            let (done, rest) = ways.split_at_mut(p);
            let below = &done[p - 1];
            for s in 0..span as i64 {
                let from = s - mode;
                if (0..span as i64).contains(&from) {
                    rest[0][s as usize] = rest[0][s as usize].saturating_add(below[from as usize]);
                }
            }
        }
    }
    Ok(ways[n][(k + offset) as usize])
}

/// All Fock states with `N` particles and momentum `K` inside `[-k_max, k_max]`.
pub fn enumerate_basis(n: usize, k: i64, kmax: usize) -> Result<BasisSet> {
    validate_sizes(n, kmax)?;
    if k.unsigned_abs() as usize > n * kmax {
        return Err(Error::EmptyBasis { n, k, kmax });
    }
    let size = basis_size(n, k, kmax)?;
    if size > MAX_BASIS {
        return Err(Error::OutOfRange {
            what: "basis size",
            detail: format!("{size} states for N={n}, K={k}, k_max={kmax} exceeds {MAX_BASIS}"),
        });
    }
    let set = BasisSet::build(n, Some(k), kmax);
    if set.is_empty() {
        return Err(Error::EmptyBasis { n, k, kmax });
    }
    Ok(set)
}

/// Every `N`-particle Fock state inside the cutoff, regardless of momentum.
pub fn enumerate_all_momenta(n: usize, kmax: usize) -> Result<BasisSet> {
    validate_sizes(n, kmax)?;
    Ok(BasisSet::build(n, None, kmax))
}

impl BasisSet {
    fn build(n: usize, momentum: Option<i64>, kmax: usize) -> Self {
        let width = 2 * kmax + 1;
        let mut occupations = Vec::new();
        let mut current = vec![0u16; width];
        fill(
            &mut current,
            0,
            n as i64,
            momentum,
            kmax as i64,
            &mut occupations,
        );
        let index = occupations
            .chunks_exact(width)
            .enumerate()
            .map(|(i, row)| (row.to_vec().into_boxed_slice(), i))
            .collect();
        BasisSet {
            n,
            momentum,
            kmax,
            width,
            occupations,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.occupations.len() / self.width
    }

    pub fn is_empty(&self) -> bool {
        self.occupations.is_empty()
    }

    pub fn particle_count(&self) -> usize {
        self.n
    }

    /// Total momentum shared by all states, `None` for a merged basis.
    pub fn momentum(&self) -> Option<i64> {
        self.momentum
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    /// Number of modes, `2 k_max + 1`.
    pub fn mode_count(&self) -> usize {
        self.width
    }

    /// Dense occupations of state `i`, indexed by `k + k_max`.
    pub fn occupations(&self, i: usize) -> &[u16] {
        &self.occupations[i * self.width..(i + 1) * self.width]
    }

    pub fn state(&self, i: usize) -> FockState {
        FockState::from_dense(self.occupations(i))
    }

    pub fn states(&self) -> impl Iterator<Item = FockState> + '_ {
        (0..self.len()).map(|i| self.state(i))
    }

    pub fn index_of_occupations(&self, occupations: &[u16]) -> Option<usize> {
        self.index.get(occupations).copied()
    }

    pub fn index_of(&self, state: &FockState) -> Option<usize> {
        state
            .to_dense(self.kmax)
            .and_then(|d| self.index_of_occupations(&d))
    }

    /// Momentum of state `i` (useful for merged bases).
    pub fn momentum_of(&self, i: usize) -> i64 {
        let kmax = self.kmax as i64;
        self.occupations(i)
            .iter()
            .enumerate()
            .map(|(j, &n)| (j as i64 - kmax) * n as i64)
            .sum()
    }
}

/// Recursive fill in lexicographic order. `mode` indexes `k = mode - kmax`.
fn fill(
    current: &mut [u16],
    mode: usize,
    remaining: i64,
    momentum: Option<i64>,
    kmax: i64,
    out: &mut Vec<u16>,
) {
    let width = current.len();
    let k = mode as i64 - kmax;
    if mode + 1 == width {
        if momentum.is_none_or(|p| p == remaining * k) {
            current[mode] = remaining as u16;
            out.extend_from_slice(current);
            current[mode] = 0;
        }
        return;
    }
    for take in 0..=remaining {
        if let Some(p) = momentum {
            // Remaining particles all sit in modes k+1..=kmax.
            let left = remaining - take;
            let rest = p - take * k;
            if rest < left * (k + 1) || rest > left * kmax {
                continue;
            }
            current[mode] = take as u16;
            fill(current, mode + 1, left, Some(rest), kmax, out);
        } else {
            current[mode] = take as u16;
            fill(current, mode + 1, remaining - take, None, kmax, out);
        }
    }
    current[mode] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute force over every occupation tuple in the box `n_k ≤ N`.
    fn brute_force(n: usize, k: i64, kmax: usize) -> Vec<Vec<u16>> {
        let width = 2 * kmax + 1;
        let mut found = Vec::new();
        let total = (n + 1).pow(width as u32);
        for code in 0..total {
            let mut c = code;
            let mut occ = vec![0u16; width];
            for slot in occ.iter_mut().rev() {
                *slot = (c % (n + 1)) as u16;
                c /= n + 1;
            }
            let count: usize = occ.iter().map(|&x| x as usize).sum();
            let mom: i64 = occ
                .iter()
                .enumerate()
                .map(|(j, &x)| (j as i64 - kmax as i64) * x as i64)
                .sum();
            if count == n && mom == k {
                found.push(occ);
            }
        }
        found
    }

    #[test]
    fn small_bases_match_hand_enumeration() {
        let b = enumerate_basis(1, 0, 1).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.state(0), FockState::new([(0, 1)]));

        let b = enumerate_basis(2, 1, 1).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.state(0), FockState::two_mode(0, 1, 1, 1));

        let b = enumerate_basis(2, 0, 1).unwrap();
        assert_eq!(b.len(), 2);
        // (n_-1, n_0, n_1) = (0, 2, 0) < (1, 0, 1)
        assert_eq!(b.state(0), FockState::new([(0, 2)]));
        assert_eq!(b.state(1), FockState::two_mode(-1, 1, 1, 1));
    }

    #[test]
    fn enumeration_matches_brute_force_in_order() {
        for n in 1..=5 {
            for kmax in 1..=2 {
                for k in -((n * kmax) as i64)..=(n * kmax) as i64 {
                    let b = enumerate_basis(n, k, kmax).unwrap();
                    let expected = brute_force(n, k, kmax);
                    let got: Vec<Vec<u16>> =
                        (0..b.len()).map(|i| b.occupations(i).to_vec()).collect();
                    assert_eq!(got, expected, "N={n} K={k} kmax={kmax}");
                }
            }
        }
    }

    #[test]
    fn infeasible_momentum_is_rejected() {
        assert!(matches!(
            enumerate_basis(2, 3, 1),
            Err(Error::EmptyBasis { .. })
        ));
        assert!(enumerate_basis(0, 0, 1).is_err());
        assert!(enumerate_basis(2, 0, 0).is_err());
    }

    #[test]
    fn free_energies() {
        assert_eq!(free_energy(&FockState::new([(0, 7)]), 1.0), 0.0);
        let e = free_energy(&FockState::new([(2, 1)]), 1.0);
        assert!((e - 8.0 * PI * PI).abs() < 1e-12);
        for n in 1..=6usize {
            for k in 0..=n as i64 {
                let s = free_yrast_state(n, k).unwrap();
                let e = free_energy(&s, 2.0);
                assert!((e - 2.0 * PI * PI * k as f64 / 4.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn free_yrast_examples() {
        assert_eq!(
            free_yrast_state(8, 4).unwrap(),
            FockState::two_mode(0, 4, 1, 4)
        );
        assert_eq!(free_yrast_state(5, 0).unwrap(), FockState::new([(0, 5)]));
        assert_eq!(
            free_yrast_state(4, 3).unwrap(),
            FockState::two_mode(0, 1, 1, 3)
        );
        assert!(free_yrast_state(4, 5).is_err());
        assert!(free_yrast_state(4, -1).is_err());
    }

    #[test]
    fn free_yrast_minimizes_energy_by_brute_force() {
        for n in 1..=6usize {
            for k in 0..=n as i64 {
                for kmax in 1..=3 {
                    let b = enumerate_basis(n, k, kmax).unwrap();
                    let best = b.states().map(|s| s.kinetic_units()).min().unwrap();
                    let yrast = free_yrast_state(n, k).unwrap();
                    assert_eq!(best, yrast.kinetic_units());
                    // and it is the unique minimizer
                    let count = b.states().filter(|s| s.kinetic_units() == best).count();
                    assert_eq!(count, 1);
                    assert!(b.index_of(&yrast).is_some());
                }
            }
        }
    }

    #[test]
    fn branch_table() {
        let rows = two_branches(8, &[0, 1, 4], 1.0).unwrap();
        assert_eq!((rows[0].elementary, rows[0].yrast), (0.0, 0.0));
        assert!((rows[1].elementary - rows[1].yrast).abs() < 1e-12);
        assert!((rows[2].elementary - 32.0 * PI * PI).abs() < 1e-9);
        assert!((rows[2].yrast - 8.0 * PI * PI).abs() < 1e-9);
        assert!(two_branches(3, &[4], 1.0).is_err());
    }

    #[test]
    fn merged_basis_covers_all_blocks() {
        let all = enumerate_all_momenta(3, 2).unwrap();
        let per_block: usize = (-6..=6)
            .map(|k| enumerate_basis(3, k, 2).map(|b| b.len()).unwrap_or(0))
            .sum();
        assert_eq!(all.len(), per_block);
        // C(3 + 5 - 1, 3)
        assert_eq!(all.len(), 35);
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(
            FockState::two_mode(-1, 2, 1, 2).to_string(),
            "|n-1=2, n1=2>"
        );
    }

    #[test]
    fn counted_size_matches_enumeration() {
        for n in 1..9 {
            for kmax in 1..4 {
                for k in -(n as i64 * kmax as i64)..=n as i64 * kmax as i64 {
                    let count = basis_size(n, k, kmax).unwrap();
                    let built = enumerate_basis(n, k, kmax).map(|b| b.len()).unwrap_or(0);
                    assert_eq!(count, built as u128, "N={n} K={k} kmax={kmax}");
                }
            }
        }
        assert_eq!(basis_size(2, 0, 1).unwrap(), 2);
        assert!(matches!(
            enumerate_basis(64, 32, 16),
            Err(Error::OutOfRange { .. })
        ));
    }

    proptest! {
        #[test]
        fn states_satisfy_conservation(n in 1usize..7, kmax in 1usize..4, k in -8i64..9) {
            if let Ok(b) = enumerate_basis(n, k, kmax) {
                for s in b.states() {
                    prop_assert_eq!(s.particle_count(), n);
                    prop_assert_eq!(s.momentum(), k);
                    prop_assert!(s.max_abs_mode() <= kmax);
                }
                let again = enumerate_basis(n, k, kmax).unwrap();
                prop_assert!(b == again);
            }
        }

        #[test]
        fn reflection_maps_k_to_minus_k(n in 1usize..7, kmax in 1usize..4, k in 0i64..9) {
            let plus = enumerate_basis(n, k, kmax);
            let minus = enumerate_basis(n, -k, kmax);
            match (plus, minus) {
                (Ok(p), Ok(m)) => {
                    prop_assert_eq!(p.len(), m.len());
                    for s in p.states() {
                        prop_assert!(m.index_of(&s.reflected()).is_some());
                    }
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "asymmetric feasibility"),
            }
        }
    }
}
