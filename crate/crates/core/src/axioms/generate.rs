//! Seeded test-variable generation.
//!
//! Values sit on integer lattices scaled into the configured range so that
//! ties, and with them quantile edge cases, are common.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::AuditConfig;
use crate::space::{convex_order_leq, ProbSpace, RandomVariable};

const LATTICE_STEPS: [u32; 5] = [1, 2, 4, 10, 20];
const MAX_DRAWS: usize = 64;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for one named stream of a seed.
pub fn stream_rng(seed: u64, stream: &str) -> ChaCha8Rng {
    let tag = stream
        .bytes()
        .fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01B3));
    ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(tag)))
}

/// Draws spaces and variables according to an [`AuditConfig`].
pub struct Generator<'a> {
    config: &'a AuditConfig,
    rng: ChaCha8Rng,
}

impl<'a> Generator<'a> {
    pub fn new(config: &'a AuditConfig, stream: &str) -> Self {
        Self {
            config,
            rng: stream_rng(config.seed, stream),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn atom_count(&mut self, at_least: usize) -> Option<usize> {
        let eligible: Vec<usize> = self
            .config
            .atom_counts
            .iter()
            .copied()
            .filter(|&n| n >= at_least)
            .collect();
        eligible.choose(&mut self.rng).copied()
    }

    fn space_of(&mut self, n: usize) -> Arc<ProbSpace> {
        if self.config.uniform_weights || self.rng.gen_bool(0.5) {
            return ProbSpace::uniform(n).expect("n > 0");
        }
        let weights: Vec<f64> = (0..n).map(|_| self.rng.gen_range(1..=5) as f64).collect();
        let total: f64 = weights.iter().sum();
        ProbSpace::new(weights.iter().map(|w| w / total).collect()).expect("normalized weights")
    }

    /// A random space with at least two atoms when the configuration allows it.
    pub fn space(&mut self) -> Arc<ProbSpace> {
        let n = self.atom_count(2).or_else(|| self.atom_count(1)).expect("validated atom counts");
        self.space_of(n)
    }

    fn lattice_values(&mut self, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        let steps = *LATTICE_STEPS.choose(&mut self.rng).expect("non-empty");
        (0..n)
            .map(|_| {
                let j = self.rng.gen_range(0..=steps) as f64;
                lo + (hi - lo) * j / steps as f64
            })
            .collect()
    }

    /// Any variable on `space`; may be constant.
    pub fn variable_on(&mut self, space: &Arc<ProbSpace>) -> RandomVariable {
        let (lo, hi) = self.config.value_range;
        let values = self.lattice_values(space.len(), lo, hi);
        RandomVariable::new(space.clone(), values).expect("finite lattice values")
    }

    /// A variable on `space` whose full range is at least the exclusion threshold.
    pub fn non_constant_on(&mut self, space: &Arc<ProbSpace>) -> Option<RandomVariable> {
        if space.len() < 2 {
            return None;
        }
        for _ in 0..MAX_DRAWS {
            let x = self.variable_on(space);
            if x.ess_sup() - x.ess_inf() >= super::FR_EXCLUSION {
                return Some(x);
            }
        }
        let (lo, hi) = self.config.value_range;
        let mut values = vec![lo; space.len()];
        values[0] = hi;
        RandomVariable::new(space.clone(), values).ok()
    }

    pub fn non_constant(&mut self) -> Option<RandomVariable> {
        let space = self.space();
        self.non_constant_on(&space)
    }

    /// Two non-constant variables on a shared space.
    pub fn pair(&mut self) -> Option<(RandomVariable, RandomVariable)> {
        let space = self.space();
        Some((self.non_constant_on(&space)?, self.non_constant_on(&space)?))
    }

    /// `(X, X + P)` with `P >= 0` on the lattice.
    pub fn ordered_pair(&mut self) -> Option<(RandomVariable, RandomVariable)> {
        let space = self.space();
        let x = self.non_constant_on(&space)?;
        let (lo, hi) = self.config.value_range;
        let bump = self.lattice_values(space.len(), 0.0, hi - lo);
        let y = x.add(&RandomVariable::new(space, bump).ok()?).ok()?;
        Some((x, y))
    }

    /// `(X, Y)` with `X` a mean-preserving contraction of `Y`, checked with the stop-loss test.
    pub fn contraction_pair(&mut self) -> Option<(RandomVariable, RandomVariable)> {
        let y = self.non_constant()?;
        let x = if self.rng.gen_bool(0.5) {
            let lambda = self.rng.gen_range(0.05..0.95);
            let mean = y.expectation();
            y.map(|v| mean + lambda * (v - mean))
        } else {
            let v = y.values();
            let p = y.probs();
            let (mut i, mut j) = (0, 0);
            for _ in 0..MAX_DRAWS {
                i = self.rng.gen_range(0..v.len());
                j = self.rng.gen_range(0..v.len());
                if v[i] < v[j] {
                    break;
                }
            }
            if v[i] >= v[j] {
                return None;
            }
            let reach = (v[j] - v[i]) / (1.0 / p[i] + 1.0 / p[j]);
            let a = reach * self.rng.gen_range(0.1..=1.0);
            let mut values = v.to_vec();
            values[i] += a / p[i];
            values[j] -= a / p[j];
            RandomVariable::new(y.space().clone(), values).ok()?
        };
        convex_order_leq(&x, &y).then_some((x, y))
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut self.rng);
        if n > 1 && perm.iter().enumerate().all(|(i, &p)| i == p) {
            perm.rotate_left(1);
        }
        perm
    }
}

/// `X` uniform on midpoints of `[-2, 2]`, `Y = (2 - X) 1{X>0} - (X + 2) 1{X<0}`, `Z = (X + Y)/2`.
pub fn counterexample_triple(n: usize) -> (RandomVariable, RandomVariable, RandomVariable) {
    let x: Vec<f64> = (1..=n).map(|i| -2.0 + 4.0 * (i as f64 - 0.5) / n as f64).collect();
    let y: Vec<f64> = x.iter().map(|&v| if v > 0.0 { 2.0 - v } else { -(v + 2.0) }).collect();
    let space = ProbSpace::uniform(n).expect("n > 0");
    let x = RandomVariable::new(space.clone(), x).expect("finite");
    let y = RandomVariable::new(space, y).expect("finite");
    let z = x.mix(&y, 0.5).expect("shared space");
    (x, y, z)
}

/// Same distribution on a space whose atoms (and weights) are reordered.
pub fn permute_atoms(x: &RandomVariable, perm: &[usize]) -> RandomVariable {
    let probs = perm.iter().map(|&i| x.probs()[i]).collect();
    let values = perm.iter().map(|&i| x.values()[i]).collect();
    let space = ProbSpace::new(probs).expect("permuted weights stay valid");
    RandomVariable::new(space, values).expect("finite")
}

/// The shared test pool: curated variables followed by seeded draws.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub curated: Vec<RandomVariable>,
    pub generated: Vec<RandomVariable>,
    /// The counterexample triple `(X, Y, Z)` on 20 atoms.
    pub triple: (RandomVariable, RandomVariable, RandomVariable),
}

impl Corpus {
    pub fn new(config: &AuditConfig) -> Self {
        let fair = |v: &[f64]| RandomVariable::uniform(v.to_vec()).expect("finite");
        let triple = counterexample_triple(20);
        let curated = vec![
            fair(&[0.0, 0.0, 1.0]),
            fair(&[0.0, 2.0]),
            fair(&[-1.0, 1.0]),
            triple.0.clone(),
            triple.1.clone(),
            triple.2.clone(),
        ];
        let mut g = Generator::new(config, "corpus");
        let generated = (0..config.n_variables).filter_map(|_| g.non_constant()).collect();
        Self {
            curated,
            generated,
            triple,
        }
    }

    pub fn variables(&self) -> impl Iterator<Item = &RandomVariable> {
        self.curated.iter().chain(&self.generated)
    }

    pub fn len(&self) -> usize {
        self.curated.len() + self.generated.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Keeps only the curated and generated variables satisfying `keep`.
    pub fn retain(&mut self, mut keep: impl FnMut(&RandomVariable) -> bool) {
        self.curated.retain(&mut keep);
        self.generated.retain(&mut keep);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::same_distribution;

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a: u64 = stream_rng(1, "x").gen();
        let b: u64 = stream_rng(1, "x").gen();
        let c: u64 = stream_rng(1, "y").gen();
        let d: u64 = stream_rng(2, "x").gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn corpus_is_reproducible() {
        let config = AuditConfig::default();
        let a = Corpus::new(&config);
        let b = Corpus::new(&config);
        assert_eq!(a.len(), 206);
        for (x, y) in a.variables().zip(b.variables()) {
            assert_eq!(x.values(), y.values());
            assert_eq!(x.probs(), y.probs());
        }
        assert!(a.generated.iter().all(|x| x.ess_sup() - x.ess_inf() >= 1e-6));
    }

    #[test]
    fn generated_values_stay_on_range() {
        let config = AuditConfig::default();
        let corpus = Corpus::new(&config);
        for x in &corpus.generated {
            assert!(x.values().iter().all(|v| (-5.0..=5.0).contains(v)));
        }
    }

    #[test]
    fn contraction_pairs_are_ordered() {
        let config = AuditConfig::default();
        let mut g = Generator::new(&config, "contractions");
        let mut found = 0;
        for _ in 0..100 {
            if let Some((x, y)) = g.contraction_pair() {
                assert!(convex_order_leq(&x, &y));
                assert!((x.expectation() - y.expectation()).abs() < 1e-12);
                found += 1;
            }
        }
        assert!(found > 90);
    }

    #[test]
    fn ordered_pairs_dominate() {
        let config = AuditConfig::default();
        let mut g = Generator::new(&config, "ordered");
        let (x, y) = g.ordered_pair().unwrap();
        assert!(x.values().iter().zip(y.values()).all(|(a, b)| a <= b));
    }

    #[test]
    fn permuted_atoms_keep_the_law() {
        let config = AuditConfig::default();
        let mut g = Generator::new(&config, "perm");
        let x = g.non_constant().unwrap();
        let perm = g.permutation(x.len());
        assert!(same_distribution(&x, &permute_atoms(&x, &perm)));
    }

    #[test]
    fn counterexample_triple_structure() {
        let (x, y, z) = counterexample_triple(20);
        assert!(same_distribution(&x, &y));
        assert!(z.values().iter().all(|v| (v.abs() - 1.0).abs() < 1e-15));
        assert!(convex_order_leq(&z, &x));
    }
}
