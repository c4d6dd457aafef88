//! Multi-run consensus over detector results.
//!
//! Detection runs a fixed number of times on distinct seeds and the most
//! frequent community count wins. While two or more counts share the top
//! frequency, further runs are made one at a time until one count holds a
//! strict plurality. Among the runs with the winning count, the one with the
//! highest modularity is selected (earliest on equal modularity).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{detect, CommunityError, Partition};
use crate::graph::TaxonomyGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsensusConfig {
    pub initial_runs: usize,
    /// Upper bound on tie-break runs beyond the initial ones.
    pub max_extensions: usize,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        Self {
            initial_runs: 5,
            max_extensions: 64,
        }
    }
}

/// Per-run seeds derived from a base seed, so run `i` always gets the same
/// seed regardless of how many runs execute or in what order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSchedule {
    base: u64,
    #[serde(default)]
    explicit: Vec<u64>,
}

impl SeedSchedule {
    pub fn from_base(base: u64) -> Self {
        Self {
            base,
            explicit: Vec::new(),
        }
    }

    /// Use `seeds` for the first runs, then fall back to derived seeds.
    pub fn explicit(seeds: Vec<u64>) -> Self {
        let base = seeds.first().copied().unwrap_or(0);
        Self {
            base,
            explicit: seeds,
        }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn seed(&self, run: usize) -> u64 {
        self.explicit
            .get(run)
            .copied()
            .unwrap_or_else(|| splitmix64(self.base.wrapping_add(run as u64)))
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionConsensus {
    /// Every run in execution order; each partition carries its seed.
    pub runs: Vec<Partition>,
    /// Community count → number of runs that produced it.
    #[serde(with = "pairs")]
    pub histogram: BTreeMap<usize, usize>,
    /// Index into `runs`.
    pub selected: usize,
    /// Tie-break runs beyond the initial ones.
    pub extensions: usize,
    /// Set when the extension budget ran out with the tie still standing.
    #[serde(default)]
    pub tie_unresolved: bool,
}

impl DetectionConsensus {
    pub fn selected_partition(&self) -> &Partition {
        &self.runs[self.selected]
    }

    pub fn winning_count(&self) -> usize {
        self.selected_partition().community_count
    }
}

/// Integer map keys do not survive buffering inside tagged enums, so the
/// histogram is written as `[[count, runs], ...]`.
mod pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<usize, usize>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(map.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, usize>, D::Error> {
        Ok(Vec::<(usize, usize)>::deserialize(d)?.into_iter().collect())
    }
}

fn histogram(runs: &[Partition]) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for run in runs {
        *out.entry(run.community_count).or_insert(0) += 1;
    }
    out
}

fn strict_plurality(histogram: &BTreeMap<usize, usize>) -> Option<usize> {
    let top = *histogram.values().max()?;
    let mut leaders = histogram.iter().filter(|(_, &n)| n == top);
    let (&count, _) = leaders.next()?;
    leaders.next().is_none().then_some(count)
}

fn best_run(runs: &[Partition], count: usize) -> usize {
    let mut best: Option<usize> = None;
    for (i, run) in runs.iter().enumerate() {
        if run.community_count != count {
            continue;
        }
        match best {
            Some(b) if runs[b].modularity >= run.modularity => {}
            _ => best = Some(i),
        }
    }
    best.expect("winning count comes from some run")
}

/// Apply the consensus rule to the initial runs, asking `extend` for one
/// more run (by run index) while the top count is tied.
pub fn resolve_consensus<E, F>(
    initial: Vec<Partition>,
    config: ConsensusConfig,
    mut extend: F,
) -> Result<DetectionConsensus, E>
where
    F: FnMut(usize) -> Result<Partition, E>,
{
    let mut runs = initial;
    let mut hist = histogram(&runs);
    let mut extensions = 0;
    let winner = loop {
        if let Some(count) = strict_plurality(&hist) {
            break Some(count);
        }
        if extensions >= config.max_extensions || runs.is_empty() {
            break None;
        }
        let run = extend(runs.len())?;
        *hist.entry(run.community_count).or_insert(0) += 1;
        runs.push(run);
        extensions += 1;
    };
    let (winner, tie_unresolved) = match winner {
        Some(count) => (count, false),
        None => {
            // Budget exhausted: prefer the tied count whose best run scores
            // highest, then the smaller count.
            let top = hist.values().copied().max().unwrap_or(0);
            let count = hist
                .iter()
                .filter(|(_, &n)| n == top)
                .map(|(&c, _)| c)
                .max_by(|&a, &b| {
                    let qa = runs[best_run(&runs, a)].modularity;
                    let qb = runs[best_run(&runs, b)].modularity;
                    qa.total_cmp(&qb).then(b.cmp(&a))
                })
                .expect("at least one run");
            log::warn!("consensus tie unresolved after {extensions} extra runs; chose {count}");
            (count, true)
        }
    };
    Ok(DetectionConsensus {
        selected: best_run(&runs, winner),
        runs,
        histogram: hist,
        extensions,
        tie_unresolved,
    })
}

/// Five-run modal consensus with default settings.
pub fn consensus_detect(
    graph: &TaxonomyGraph,
    resolution: f64,
    seeds: &SeedSchedule,
) -> Result<DetectionConsensus, CommunityError> {
    consensus_detect_with(graph, resolution, seeds, ConsensusConfig::default())
}

/// Consensus detection. The initial runs execute on separate threads; each
/// run's seed is fixed by its index, so results do not depend on scheduling.
pub fn consensus_detect_with(
    graph: &TaxonomyGraph,
    resolution: f64,
    seeds: &SeedSchedule,
    config: ConsensusConfig,
) -> Result<DetectionConsensus, CommunityError> {
    let runs = config.initial_runs.max(1);
    let initial: Vec<Result<Partition, CommunityError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..runs)
            .map(|i| {
                let seed = seeds.seed(i);
                scope.spawn(move || detect(graph, resolution, seed))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("detection thread panicked"))
            .collect()
    });
    let initial = initial.into_iter().collect::<Result<Vec<_>, _>>()?;
    resolve_consensus(initial, config, |i| detect(graph, resolution, seeds.seed(i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn stub(seed: u64, count: usize, modularity: f64) -> Partition {
        Partition {
            resolution: 1.0,
            seed,
            assignment: BTreeMap::new(),
            modularity,
            community_count: count,
        }
    }

    fn stubbed(counts: &[usize]) -> Vec<Partition> {
        counts
            .iter()
            .enumerate()
            .map(|(i, &c)| stub(i as u64, c, 0.1 * i as f64))
            .collect()
    }

    #[test]
    fn modal_count_wins() {
        let c = resolve_consensus(stubbed(&[10, 10, 10, 9, 11]), ConsensusConfig::default(), |_| -> Result<Partition, Infallible> {
            panic!("no extension needed")
        })
        .unwrap();
        assert_eq!(c.histogram, BTreeMap::from([(9, 1), (10, 3), (11, 1)]));
        assert_eq!(c.winning_count(), 10);
        assert_eq!(c.extensions, 0);
        // highest modularity among the three runs with 10 communities
        assert_eq!(c.selected, 2);
    }

    #[test]
    fn tie_extends_until_strict_plurality() {
        let c = resolve_consensus(stubbed(&[10, 10, 9, 9, 8]), ConsensusConfig::default(), |i| {
            Ok::<_, Infallible>(stub(i as u64, 9, 0.0))
        })
        .unwrap();
        assert_eq!(c.winning_count(), 9);
        assert_eq!(c.extensions, 1);
        assert_eq!(c.runs.len(), 6);
        assert_eq!(c.histogram[&9], 3);
    }

    #[test]
    fn tie_can_need_several_extensions() {
        let mut extra = vec![8, 10].into_iter();
        let c = resolve_consensus(stubbed(&[10, 10, 9, 9, 8]), ConsensusConfig::default(), |i| {
            Ok::<_, Infallible>(stub(i as u64, extra.next().unwrap(), 0.0))
        })
        .unwrap();
        assert_eq!(c.winning_count(), 10);
        assert_eq!(c.extensions, 2);
        assert!(!c.tie_unresolved);
    }

    #[test]
    fn exhausted_budget_falls_back() {
        let config = ConsensusConfig {
            initial_runs: 2,
            max_extensions: 0,
        };
        let runs = vec![stub(0, 4, 0.2), stub(1, 5, 0.3)];
        let c = resolve_consensus(runs, config, |_| -> Result<Partition, Infallible> {
            unreachable!()
        })
        .unwrap();
        assert!(c.tie_unresolved);
        assert_eq!(c.winning_count(), 5);
    }

    #[test]
    fn identical_runs_pick_first() {
        let runs: Vec<_> = (0..5).map(|i| stub(i, 3, 0.25)).collect();
        let c = resolve_consensus(runs, ConsensusConfig::default(), |_| -> Result<Partition, Infallible> {
            unreachable!()
        })
        .unwrap();
        assert_eq!(c.selected, 0);
        assert_eq!(c.extensions, 0);
    }

    #[test]
    fn seed_schedule_is_stable() {
        let s = SeedSchedule::from_base(7);
        assert_eq!(s.seed(3), SeedSchedule::from_base(7).seed(3));
        assert_ne!(s.seed(0), s.seed(1));
        let e = SeedSchedule::explicit(vec![1, 2]);
        assert_eq!((e.seed(0), e.seed(1)), (1, 2));
    }
}
