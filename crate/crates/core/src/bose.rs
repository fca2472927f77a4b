//! Bosonic superlattice wire: particles hop within double wells, then the
//! lattice shifts and neighbouring wells interact, like a cellular automaton.
//!
//! States live in the fixed-particle-number sector with a per-site
//! occupation cutoff; hopping conserves particle number, so nothing outside
//! the sector is ever needed.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::singular_values;
use crate::mat::{c, entropy_bits, C64, ZERO};
use core::f64::consts::FRAC_PI_4;

/// Weight allowed to leave the truncated space during one hop.
pub const LEAK_THRESHOLD: f64 = 1e-10;
pub const DEFAULT_CUTOFF: usize = 4;
/// Double-well rounds of the protocol: one in-well hop, one shifted hop.
pub const PROTOCOL_ROUNDS: usize = 2;
/// Hopping amplitude `J` of `H = −J(a_L†a_R + a_R†a_L)`.
pub const HOPPING: f64 = 1.0;

#[derive(Clone, Debug, PartialEq)]
pub struct FockChain {
    pub n_sites: usize,
    /// Maximum occupation per site.
    pub cutoff: usize,
    pub particles: usize,
    configs: Vec<Vec<u8>>,
    index: BTreeMap<Vec<u8>, usize>,
    pub amps: Vec<C64>,
}

fn enumerate(n_sites: usize, particles: usize, cutoff: usize) -> Vec<Vec<u8>> {
    fn rec(i: usize, rem: usize, cutoff: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if i == cur.len() {
            if rem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for k in 0..=rem.min(cutoff) {
            cur[i] = k as u8;
            rec(i + 1, rem - k, cutoff, cur, out);
        }
    }
    let mut out = Vec::new();
    rec(0, particles, cutoff, &mut vec![0; n_sites], &mut out);
    out
}

/// `exp(−it H)` on the `n+1` states `|a, n−a⟩` of one pair.
fn pair_propagator(n: usize, t: f64) -> DMatrix<C64> {
    let dim = n + 1;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for a in 0..n {
        // a_L† a_R: |a, n−a⟩ → √((a+1)(n−a)) |a+1, n−a−1⟩
        let amp = -HOPPING * (((a + 1) * (n - a)) as f64).sqrt();
        h[(a + 1, a)] = amp;
        h[(a, a + 1)] = amp;
    }
    let eig = h.symmetric_eigen();
    let v = eig.eigenvectors.map(|x| c(x, 0.0));
    let d = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            c(0.0, -t * eig.eigenvalues[i]).exp()
        } else {
            ZERO
        }
    });
    &v * d * v.adjoint()
}

/// Row labels, column labels and entries of one particle-number block.
type Block<'a> = (
    BTreeMap<&'a [u8], usize>,
    BTreeMap<&'a [u8], usize>,
    Vec<(usize, usize, C64)>,
);

impl FockChain {
    /// `|0,1,0,1,…⟩`: each double well holds one particle on its right site.
    pub fn initial_state(n_pairs: usize, cutoff: usize) -> Result<Self> {
        if cutoff < 1 || n_pairs == 0 {
            return Err(Error::InvalidArgument(
                "need cutoff ≥ 1 and at least one pair".into(),
            ));
        }
        let n_sites = 2 * n_pairs;
        let configs = enumerate(n_sites, n_pairs, cutoff);
        let index: BTreeMap<Vec<u8>, usize> = configs
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        let mut amps = vec![ZERO; configs.len()];
        let start: Vec<u8> = (0..n_sites).map(|s| (s % 2) as u8).collect();
        amps[index[&start]] = c(1.0, 0.0);
        Ok(Self {
            n_sites,
            cutoff,
            particles: n_pairs,
            configs,
            index,
            amps,
        })
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn amplitude(&self, occupations: &[u8]) -> C64 {
        self.index.get(occupations).map_or(ZERO, |&i| self.amps[i])
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨Σ_s n_s⟩`.
    pub fn mean_particle_number(&self) -> f64 {
        self.configs
            .iter()
            .zip(&self.amps)
            .map(|(k, a)| a.norm_sqr() * k.iter().map(|&x| x as f64).sum::<f64>())
            .sum()
    }

    /// Evolve sites `(left, left+1)` with the hopping Hamiltonian for time `t`.
    pub fn hop_pair(&self, left: usize, t: f64) -> Result<Self> {
        if left + 1 >= self.n_sites {
            return Err(Error::InvalidArgument("pair outside the chain".into()));
        }
        let mut out = self.clone();
        let mut done = vec![false; self.dim()];
        let mut props: BTreeMap<usize, DMatrix<C64>> = BTreeMap::new();
        let mut leaked = 0.0;
        let mut key = vec![0u8; self.n_sites];
        for k in 0..self.dim() {
            if done[k] {
                continue;
            }
            let conf = &self.configs[k];
            let n = (conf[left] + conf[left + 1]) as usize;
            key.copy_from_slice(conf);
            let members: Vec<Option<usize>> = (0..=n)
                .map(|a| {
                    key[left] = a as u8;
                    key[left + 1] = (n - a) as u8;
                    self.index.get(&key).copied()
                })
                .collect();
            let u = props.entry(n).or_insert_with(|| pair_propagator(n, t));
            for (a, m) in members.iter().enumerate() {
                let w: C64 = members
                    .iter()
                    .enumerate()
                    .filter_map(|(b, mb)| mb.map(|i| u[(a, b)] * self.amps[i]))
                    .sum();
                match m {
                    Some(i) => {
                        out.amps[*i] = w;
                        done[*i] = true;
                    }
                    None => leaked += w.norm_sqr(),
                }
            }
        }
        if leaked > LEAK_THRESHOLD {
            return Err(Error::CutoffLeak { weight: leaked });
        }
        Ok(out)
    }

    /// One round: in-well pairs `(0,1), (2,3), …` on odd rounds, shifted pairs
    /// `(1,2), (3,4), …` on even rounds; every hop lasts `π/4`.
    pub fn round(&self, round: usize) -> Result<Self> {
        let start = if round % 2 == 1 { 0 } else { 1 };
        let mut s = self.clone();
        for left in (start..self.n_sites.saturating_sub(1)).step_by(2) {
            s = s.hop_pair(left, FRAC_PI_4)?;
        }
        Ok(s)
    }

    pub fn run_protocol(n_pairs: usize, cutoff: usize, rounds: usize) -> Result<Self> {
        let mut s = Self::initial_state(n_pairs, cutoff)?;
        for r in 1..=rounds {
            s = s.round(r)?;
        }
        Ok(s)
    }

    /// Entropy in bits between sites `[0, cut)` and `[cut, n)`.
    pub fn halfchain_entropy(&self, cut: usize) -> f64 {
        // The reduced state is block diagonal in the left particle number.
        let mut blocks: BTreeMap<usize, Block<'_>> = BTreeMap::new();
        for (k, a) in self.configs.iter().zip(&self.amps) {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let (l, r) = k.split_at(cut);
            let nl = l.iter().map(|&x| x as usize).sum();
            let (ls, rs, entries) = blocks.entry(nl).or_default();
            let nls = ls.len();
            let li = *ls.entry(l).or_insert(nls);
            let nrs = rs.len();
            let ri = *rs.entry(r).or_insert(nrs);
            entries.push((li, ri, *a));
        }
        let mut weights = Vec::new();
        for (ls, rs, entries) in blocks.values() {
            let mut m = DMatrix::<C64>::zeros(ls.len(), rs.len());
            for &(i, j, a) in entries {
                m[(i, j)] = a;
            }
            weights.extend(singular_values(&m).into_iter().map(|s| s * s));
        }
        let total: f64 = weights.iter().sum();
        entropy_bits(weights.into_iter().map(|w| w / total))
    }

    pub fn entropy_profile(&self) -> Vec<f64> {
        (1..self.n_sites)
            .map(|cut| self.halfchain_entropy(cut))
            .collect()
    }

    /// Born distribution of the occupation of `site` over `0..=cutoff`.
    pub fn occupation_distribution(&self, site: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.cutoff + 1];
        for (k, a) in self.configs.iter().zip(&self.amps) {
            p[k[site] as usize] += a.norm_sqr();
        }
        let total: f64 = p.iter().sum();
        p.iter().map(|x| x / total).collect()
    }

    /// Total weight on configurations with some site holding `≥ min` particles.
    pub fn weight_at_or_above(&self, min: usize) -> f64 {
        self.configs
            .iter()
            .zip(&self.amps)
            .filter(|(k, _)| k.iter().any(|&x| x as usize >= min))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Largest occupation carrying amplitude above `tol`.
    pub fn max_occupation(&self, tol: f64) -> usize {
        self.configs
            .iter()
            .zip(&self.amps)
            .filter(|(_, a)| a.norm() > tol)
            .flat_map(|(k, _)| k.iter().map(|&x| x as usize))
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n_pairs: usize,
    pub round: usize,
    /// Entropy across every cut, left to right.
    pub entropies: Vec<f64>,
    pub max_entropy: f64,
    pub max_occupation: usize,
}

/// Entropy profile after every round for each chain length.
pub fn convergence_table(
    pairs: &[usize],
    cutoff: usize,
    rounds: usize,
) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::new();
    for &n_pairs in pairs {
        let mut s = FockChain::initial_state(n_pairs, cutoff)?;
        for round in 1..=rounds {
            s = s.round(round)?;
            let entropies = s.entropy_profile();
            let max_entropy = entropies.iter().copied().fold(0.0, f64::max);
            rows.push(ConvergenceRow {
                n_pairs,
                round,
                entropies,
                max_entropy,
                max_occupation: s.max_occupation(1e-12),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn initial_states() {
        let s = FockChain::initial_state(1, 3).unwrap();
        assert_eq!(s.amplitude(&[0, 1]), c(1.0, 0.0));
        let s = FockChain::initial_state(3, 3).unwrap();
        assert!((s.mean_particle_number() - 3.0).abs() < 1e-15);
        assert_eq!(s.amps.iter().filter(|a| a.norm() > 0.0).count(), 1);
        assert_eq!(s.occupation_distribution(1), [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(s.halfchain_entropy(3), 0.0);
        assert!(FockChain::initial_state(2, 0).is_err());
    }

    #[test]
    fn first_hop() {
        let s = FockChain::initial_state(1, 3)
            .unwrap()
            .hop_pair(0, FRAC_PI_4)
            .unwrap();
        assert!((s.amplitude(&[0, 1]) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        assert!((s.amplitude(&[1, 0]) - c(0.0, FRAC_1_SQRT_2)).norm() < 1e-12);
        let s0 = FockChain::initial_state(2, 3).unwrap();
        let same = s0.hop_pair(1, 0.0).unwrap();
        assert!(same
            .amps
            .iter()
            .zip(&s0.amps)
            .all(|(a, b)| (a - b).norm() < 1e-15));
        let back = s0.hop_pair(1, 0.4).unwrap().hop_pair(1, -0.4).unwrap();
        assert!(back
            .amps
            .iter()
            .zip(&s0.amps)
            .all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn protocol_properties() {
        let one = FockChain::run_protocol(2, 3, 1).unwrap();
        assert!(one.halfchain_entropy(2).abs() < 1e-12);
        let two = FockChain::run_protocol(3, 4, 2).unwrap();
        assert!((two.norm() - 1.0).abs() < 1e-12);
        assert!((two.mean_particle_number() - 3.0).abs() < 1e-12);
        assert!(two.max_occupation(1e-12) <= 3);
        assert!(two.entropy_profile().iter().any(|&e| e > 1.0));
        let p: f64 = two.occupation_distribution(2).iter().sum();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cutoff_leak_is_detected() {
        // Three rounds put three particles on one site.
        assert!(matches!(
            FockChain::run_protocol(3, 2, 3),
            Err(Error::CutoffLeak { .. })
        ));
        let a = FockChain::run_protocol(3, 4, 3).unwrap();
        let b = FockChain::run_protocol(3, 6, 3).unwrap();
        for cut in 1..6 {
            assert!((a.halfchain_entropy(cut) - b.halfchain_entropy(cut)).abs() < 1e-8);
        }
        assert!(b.weight_at_or_above(4) < 1e-10);
    }

    #[test]
    fn entropy_ignores_global_phase() {
        let mut s = FockChain::run_protocol(2, 3, 2).unwrap();
        let e = s.halfchain_entropy(2);
        for a in s.amps.iter_mut() {
            *a *= c(0.6, 0.8);
        }
        assert!((s.halfchain_entropy(2) - e).abs() < 1e-14);
    }
}
