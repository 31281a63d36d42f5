//! Synthetic modular bipartite networks with planted groups.
//!
//! The reference model joins every A-node to every B-node of its own group
//! and to nothing else. Overlap between groups is then introduced by
//! [`rewire`], a single pass of degree-preserving endpoint swaps.

use std::collections::HashSet;

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bipartite::{numbered, BipartiteNetwork, Side};

/// Name of the pseudorandom generator behind [`generate`], recorded in run
/// metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8";

/// Re-draws allowed when a swap partner would create a duplicate link.
pub const DEFAULT_MAX_RETRIES: usize = 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("{field} must be at least 1")]
    ZeroCount { field: &'static str },
    #[error("rewiring probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("maximum link weight must be at least 1")]
    WeightRange,
    #[error("rewiring needs a 0/1 network; found weight {value} at ({a:?}, {b:?})")]
    NotBinary { a: String, b: String, value: f64 },
}

/// How link weights are assigned after rewiring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinkWeights {
    /// Every link has weight 1.
    #[default]
    Unit,
    /// Integer weights drawn uniformly from `1..=max`.
    UniformInt { max: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    pub n_groups: usize,
    pub a_per_group: usize,
    pub b_per_group: usize,
    pub rewire_p: f64,
    pub seed: u64,
    pub weights: LinkWeights,
    pub scheme: RewireScheme,
}

impl GeneratorConfig {
    pub fn new(
        n_groups: usize,
        a_per_group: usize,
        b_per_group: usize,
        rewire_p: f64,
        seed: u64,
    ) -> Self {
        Self {
            n_groups,
            a_per_group,
            b_per_group,
            rewire_p,
            seed,
            weights: LinkWeights::Unit,
            scheme: RewireScheme::SelectedPairs,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        for (field, value) in [
            ("n_groups", self.n_groups),
            ("a_per_group", self.a_per_group),
            ("b_per_group", self.b_per_group),
        ] {
            if value == 0 {
                return Err(GeneratorError::ZeroCount { field });
            }
        }
        if !(0.0..=1.0).contains(&self.rewire_p) {
            return Err(GeneratorError::Probability(self.rewire_p));
        }
        if self.weights == (LinkWeights::UniformInt { max: 0 }) {
            return Err(GeneratorError::WeightRange);
        }
        Ok(())
    }

    pub fn n_a(&self) -> usize {
        self.n_groups * self.a_per_group
    }

    pub fn n_b(&self) -> usize {
        self.n_groups * self.b_per_group
    }
}

/// Node labels of one type together with their group indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub labels: Vec<String>,
    pub groups: Vec<usize>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn group_of(&self, label: &str) -> Option<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.groups[i])
    }

    /// The sub-partition over `labels`, in that order. Fails with the first
    /// label that has no group.
    pub fn restricted_to(&self, labels: &[String]) -> Result<Partition, String> {
        let lookup: std::collections::HashMap<&str, usize> = self
            .labels
            .iter()
            .map(String::as_str)
            .zip(self.groups.iter().copied())
            .collect();
        let groups = labels
            .iter()
            .map(|l| lookup.get(l.as_str()).copied().ok_or_else(|| l.clone()))
            .collect::<Result<_, _>>()?;
        Ok(Partition {
            labels: labels.to_vec(),
            groups,
        })
    }
}

/// Planted group membership of every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub a: Partition,
    pub b: Partition,
}

impl GroundTruth {
    pub fn side(&self, side: Side) -> &Partition {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }
}

fn block_partition(prefix: &str, n_groups: usize, per_group: usize) -> Partition {
    Partition {
        labels: numbered(prefix, n_groups * per_group),
        groups: (0..n_groups * per_group).map(|i| i / per_group).collect(),
    }
}

/// Block-diagonal 0/1 network: A-node `a` links B-node `b` iff both belong
/// to the same group. Nodes `A1..` and `B1..` are assigned to groups in
/// consecutive runs.
pub fn reference_model(
    cfg: &GeneratorConfig,
) -> Result<(BipartiteNetwork, GroundTruth), GeneratorError> {
    cfg.validate()?;
    let a = block_partition("A", cfg.n_groups, cfg.a_per_group);
    let b = block_partition("B", cfg.n_groups, cfg.b_per_group);
    let weights = Array2::from_shape_fn((cfg.n_a(), cfg.n_b()), |(i, k)| {
        if a.groups[i] == b.groups[k] {
            1.0
        } else {
            0.0
        }
    });
    let net = BipartiteNetwork::new(a.labels.clone(), b.labels.clone(), weights)
        .expect("generated labels are unique");
    Ok((net, GroundTruth { a, b }))
}

/// How [`rewire`] picks the second link of each endpoint swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RewireScheme {
    /// Each link is selected with probability `p`; selected links are then
    /// paired with one another and swapped, so a link is displaced with
    /// probability about `p`.
    #[default]
    SelectedPairs,
    /// Each link, with probability `p`, swaps with a partner drawn from all
    /// links. Partners are displaced too, so a link moves with probability
    /// about `2p`.
    AnyPartner,
}

impl RewireScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            RewireScheme::SelectedPairs => "selected-pairs",
            RewireScheme::AnyPartner => "any-partner",
        }
    }
}

impl std::str::FromStr for RewireScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "selected-pairs" => Ok(RewireScheme::SelectedPairs),
            "any-partner" => Ok(RewireScheme::AnyPartner),
            other => Err(format!(
                "unknown rewiring scheme {other:?} (expected selected-pairs|any-partner)"
            )),
        }
    }
}

/// Link set under rewiring. `links[slot]` is the current position of the
/// link that started at the `slot`-th position in row-major order.
struct LinkSet {
    links: Vec<(usize, usize)>,
    present: HashSet<(usize, usize)>,
}

impl LinkSet {
    /// Exchanges the B-endpoints of two links unless that would duplicate an
    /// existing link. Swapping a link with itself, or with a link sharing an
    /// endpoint, always counts as a duplicate.
    fn try_swap(&mut self, first: usize, second: usize) -> bool {
        let (a1, b1) = self.links[first];
        let (a2, b2) = self.links[second];
        if self.present.contains(&(a1, b2)) || self.present.contains(&(a2, b1)) {
            return false;
        }
        self.present.remove(&(a1, b1));
        self.present.remove(&(a2, b2));
        self.present.insert((a1, b2));
        self.present.insert((a2, b1));
        self.links[first] = (a1, b2);
        self.links[second] = (a2, b1);
        true
    }
}

/// Scrambles the links of a 0/1 network with degree-preserving endpoint
/// swaps: links `(a1, b1)` and `(a2, b2)` become `(a1, b2)` and `(a2, b1)`.
///
/// Links are visited once each in row-major order of the input, each taking
/// one Bernoulli(`p`) draw. Under [`RewireScheme::SelectedPairs`] the
/// selected links are then walked in the same order and each one not yet
/// swapped draws a partner uniformly among the later selected links not yet
/// swapped. Under [`RewireScheme::AnyPartner`] each selected link draws its
/// partner uniformly among all links at the moment it is visited. A partner
/// that would create a duplicate link is re-drawn up to `max_retries` times,
/// after which the link is left in place. Every row and column sum is
/// preserved.
pub fn rewire<R: Rng + ?Sized>(
    net: &BipartiteNetwork,
    p: f64,
    scheme: RewireScheme,
    max_retries: usize,
    rng: &mut R,
) -> Result<BipartiteNetwork, GeneratorError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GeneratorError::Probability(p));
    }
    if let Some(((i, k), &value)) = net
        .weights()
        .indexed_iter()
        .find(|(_, &w)| w != 0.0 && w != 1.0)
    {
        return Err(GeneratorError::NotBinary {
            a: net.a_labels()[i].clone(),
            b: net.b_labels()[k].clone(),
            value,
        });
    }

    let links: Vec<(usize, usize)> = net
        .weights()
        .indexed_iter()
        .filter(|(_, &w)| w == 1.0)
        .map(|(pos, _)| pos)
        .collect();
    let present = links.iter().copied().collect();
    let mut set = LinkSet { links, present };
    let total = set.links.len();

    match scheme {
        RewireScheme::AnyPartner => {
            for slot in 0..total {
                if !rng.gen_bool(p) {
                    continue;
                }
                for _ in 0..max_retries {
                    let partner = rng.gen_range(0..total);
                    if set.try_swap(slot, partner) {
                        break;
                    }
                }
            }
        }
        RewireScheme::SelectedPairs => {
            let mut pool: Vec<usize> = (0..total).filter(|_| rng.gen_bool(p)).collect();
            let mut cursor = 0;
            while cursor + 1 < pool.len() {
                let slot = pool[cursor];
                let later = pool.len() - cursor - 1;
                for _ in 0..max_retries {
                    let pick = cursor + 1 + rng.gen_range(0..later);
                    if set.try_swap(slot, pool[pick]) {
                        pool.remove(pick);
                        break;
                    }
                }
                cursor += 1;
            }
        }
    }

    let mut weights = Array2::zeros(net.weights().dim());
    for &(i, k) in &set.links {
        weights[[i, k]] = 1.0;
    }
    Ok(
        BipartiteNetwork::new(net.a_labels().to_vec(), net.b_labels().to_vec(), weights)
            .expect("labels unchanged"),
    )
}

/// Fresh random stream for `seed`.
pub fn rng_for_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Reference model followed by one rewiring pass, driven by a single
/// stream seeded from `cfg.seed`. Identical configurations give identical
/// networks.
pub fn generate(cfg: &GeneratorConfig) -> Result<(BipartiteNetwork, GroundTruth), GeneratorError> {
    let (reference, truth) = reference_model(cfg)?;
    let mut rng = rng_for_seed(cfg.seed);
    let mut net = rewire(
        &reference,
        cfg.rewire_p,
        cfg.scheme,
        DEFAULT_MAX_RETRIES,
        &mut rng,
    )?;
    if let LinkWeights::UniformInt { max } = cfg.weights {
        let weights = net.weights().mapv(|w| {
            if w > 0.0 {
                f64::from(rng.gen_range(1..=max))
            } else {
                0.0
            }
        });
        net = BipartiteNetwork::new(net.a_labels().to_vec(), net.b_labels().to_vec(), weights)
            .expect("labels unchanged");
    }
    Ok((net, truth))
}

/// Fraction of links whose endpoints lie in different planted groups.
pub fn between_group_fraction(net: &BipartiteNetwork, truth: &GroundTruth) -> f64 {
    let mut total = 0usize;
    let mut between = 0usize;
    for ((i, k), &w) in net.weights().indexed_iter() {
        if w > 0.0 {
            total += 1;
            if truth.a.groups[i] != truth.b.groups[k] {
                between += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        between as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use proptest::prelude::*;

    #[test]
    fn single_block_is_complete() {
        let (net, truth) = reference_model(&GeneratorConfig::new(1, 2, 3, 0.0, 0)).unwrap();
        assert_eq!(net.weights(), &Array2::<f64>::ones((2, 3)));
        assert_eq!(truth.a.groups, vec![0, 0]);
        assert_eq!(truth.b.groups, vec![0, 0, 0]);
    }

    #[test]
    fn three_blocks() {
        let (net, truth) = reference_model(&GeneratorConfig::new(3, 5, 10, 0.0, 0)).unwrap();
        assert_eq!(net.weights().dim(), (15, 30));
        assert_eq!(net.link_count(), 150);
        for ((i, k), &w) in net.weights().indexed_iter() {
            assert_eq!(w == 1.0, i / 5 == k / 10);
        }
        assert!(net.strengths(Side::A).iter().all(|&d| d == 10.0));
        assert!(net.strengths(Side::B).iter().all(|&d| d == 5.0));
        assert_eq!(truth.b.group_of("B11"), Some(1));
    }

    #[test]
    fn invalid_configs() {
        assert_eq!(
            GeneratorConfig::new(0, 1, 1, 0.0, 0).validate(),
            Err(GeneratorError::ZeroCount { field: "n_groups" })
        );
        assert_eq!(
            GeneratorConfig::new(1, 1, 1, 1.5, 0).validate(),
            Err(GeneratorError::Probability(1.5))
        );
        let mut cfg = GeneratorConfig::new(1, 1, 1, 0.5, 0);
        cfg.weights = LinkWeights::UniformInt { max: 0 };
        assert_eq!(cfg.validate(), Err(GeneratorError::WeightRange));
    }

    #[test]
    fn rewire_rejects_weighted_input() {
        let net = crate::bipartite::example_network();
        let err = rewire(
            &net,
            0.5,
            RewireScheme::default(),
            DEFAULT_MAX_RETRIES,
            &mut rng_for_seed(1),
        )
        .unwrap_err();
        assert!(matches!(err, GeneratorError::NotBinary { .. }));
    }

    #[test]
    fn p_zero_and_single_block_are_fixed_points() {
        let cfg = GeneratorConfig::new(3, 5, 10, 0.0, 9);
        let (reference, _) = reference_model(&cfg).unwrap();
        assert_eq!(generate(&cfg).unwrap().0, reference);

        let one = GeneratorConfig::new(1, 4, 6, 1.0, 3);
        let (reference, _) = reference_model(&one).unwrap();
        assert_eq!(generate(&one).unwrap().0, reference);
    }

    #[test]
    fn deterministic_and_count_preserving() {
        let cfg = GeneratorConfig::new(3, 5, 10, 0.1, 77);
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let (net, _) = generate(&GeneratorConfig::new(5, 5, 10, 0.2, 77)).unwrap();
        assert_eq!(net.weights().sum(), 250.0);
        assert!(net.is_binary());
    }

    #[test]
    fn weighted_option() {
        let mut cfg = GeneratorConfig::new(2, 3, 4, 0.3, 5);
        cfg.weights = LinkWeights::UniformInt { max: 5 };
        let (net, _) = generate(&cfg).unwrap();
        assert_eq!(net.link_count(), 24);
        assert!(net
            .weights()
            .iter()
            .all(|&w| w == 0.0 || ((1.0..=5.0).contains(&w) && w.fract() == 0.0)));
        assert!(!net.is_binary());
    }

    #[test]
    fn disruption_grows_with_p() {
        let mut previous = -1.0;
        for p in [0.0, 0.1, 0.2, 0.3, 0.5] {
            let mean: f64 = (0..200u64)
                .map(|s| {
                    let (net, truth) = generate(&GeneratorConfig::new(5, 5, 10, p, s)).unwrap();
                    between_group_fraction(&net, &truth)
                })
                .sum::<f64>()
                / 200.0;
            assert!(mean >= previous, "p={p}: {mean} < {previous}");
            previous = mean;
        }
    }

    proptest! {
        #[test]
        fn degrees_preserved(groups in 1usize..5, na in 1usize..5, nb in 1usize..6,
                             p in 0.0f64..=1.0, seed in any::<u64>()) {
            let cfg = GeneratorConfig::new(groups, na, nb, p, seed);
            let (reference, _) = reference_model(&cfg).unwrap();
            let (net, _) = generate(&cfg).unwrap();
            prop_assert_eq!(net.strengths(Side::A), reference.strengths(Side::A));
            prop_assert_eq!(net.strengths(Side::B), reference.strengths(Side::B));
            prop_assert!(net.is_binary());
        }
    }
}
