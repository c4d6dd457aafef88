//! Fast Unfolding (Louvain) over a weighted undirected graph.
//!
//! Two phases alternate: a local-move phase that visits nodes in a seeded
//! shuffled order and moves each one to the neighbouring community with the
//! largest modularity gain, and an aggregation phase that collapses every
//! community into a single node. The loop stops at the first level where no
//! node moves.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::CommunityError;

// Gains closer than this are treated as equal.
const GAIN_EPSILON: f64 = 1e-12;

/// Symmetrized, weighted graph used by the detector.
///
/// `m` is the total edge weight with every undirected edge counted once,
/// self-loops included. The degree of a node counts its self-loop twice.
#[derive(Debug, Clone, PartialEq)]
pub struct UndirectedGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    total_weight: f64,
}

impl UndirectedGraph {
    /// Simple graph on `n` nodes. Direction is ignored, parallel edges
    /// collapse to weight 1 and self-loops are dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut pairs: Vec<(usize, usize)> = edges
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &pairs {
            assert!(b < n, "edge endpoint {b} out of range for {n} nodes");
            adjacency[a].push((b, 1.0));
            adjacency[b].push((a, 1.0));
        }
        Self {
            adjacency,
            self_loops: vec![0.0; n],
            total_weight: pairs.len() as f64,
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Total edge weight `m`.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn degree(&self, node: usize) -> f64 {
        self.adjacency[node].iter().map(|(_, w)| w).sum::<f64>() + 2.0 * self.self_loops[node]
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adjacency[node]
    }

    /// Modularity of `membership` at linear resolution `resolution`:
    /// the sum over communities of `in_c / m - resolution * (tot_c / 2m)^2`.
    pub fn modularity(&self, membership: &[usize], resolution: f64) -> Result<f64, CommunityError> {
        check_resolution(resolution)?;
        if self.total_weight <= 0.0 {
            return Err(CommunityError::NoEdges);
        }
        if membership.len() != self.node_count() {
            return Err(CommunityError::MembershipLength {
                expected: self.node_count(),
                found: membership.len(),
            });
        }
        let k = membership.iter().copied().max().map_or(0, |c| c + 1);
        let mut internal = vec![0.0; k];
        let mut total = vec![0.0; k];
        for (node, &c) in membership.iter().enumerate() {
            internal[c] += self.self_loops[node];
            total[c] += self.degree(node);
            for &(other, w) in &self.adjacency[node] {
                if other > node && membership[other] == c {
                    internal[c] += w;
                }
            }
        }
        let m = self.total_weight;
        Ok(internal
            .iter()
            .zip(&total)
            .map(|(&inner, &tot)| inner / m - resolution * (tot / (2.0 * m)).powi(2))
            .sum())
    }

    fn aggregate(&self, membership: &[usize], communities: usize) -> Self {
        let mut self_loops = vec![0.0; communities];
        let mut weights: Vec<std::collections::BTreeMap<usize, f64>> =
            vec![Default::default(); communities];
        for (node, &c) in membership.iter().enumerate() {
            self_loops[c] += self.self_loops[node];
            for &(other, w) in &self.adjacency[node] {
                if other <= node {
                    continue;
                }
                let d = membership[other];
                if c == d {
                    self_loops[c] += w;
                } else {
                    *weights[c].entry(d).or_default() += w;
                    *weights[d].entry(c).or_default() += w;
                }
            }
        }
        Self {
            adjacency: weights.into_iter().map(|m| m.into_iter().collect()).collect(),
            self_loops,
            total_weight: self.total_weight,
        }
    }
}

pub(crate) fn check_resolution(resolution: f64) -> Result<(), CommunityError> {
    if resolution.is_finite() && resolution > 0.0 {
        Ok(())
    } else {
        Err(CommunityError::InvalidResolution(resolution))
    }
}

/// Output of one detector run on an [`UndirectedGraph`].
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Community of each node, numbered densely by first appearance.
    pub membership: Vec<usize>,
    pub modularity: f64,
    pub community_count: usize,
    /// Number of aggregation levels that moved at least one node.
    pub levels: usize,
}

/// Run Fast Unfolding with a seeded visit order.
pub fn louvain(graph: &UndirectedGraph, resolution: f64, seed: u64) -> Result<Clustering, CommunityError> {
    check_resolution(resolution)?;
    if graph.total_weight <= 0.0 {
        return Err(CommunityError::NoEdges);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut membership: Vec<usize> = (0..graph.node_count()).collect();
    let mut level_graph = graph.clone();
    let mut levels = 0;
    loop {
        let (local, moved) = local_moves(&level_graph, resolution, &mut rng);
        if !moved {
            break;
        }
        levels += 1;
        let (local, count) = renumber(&local);
        for c in membership.iter_mut() {
            *c = local[*c];
        }
        level_graph = level_graph.aggregate(&local, count);
    }
    let (membership, community_count) = renumber(&membership);
    let modularity = graph.modularity(&membership, resolution)?;
    Ok(Clustering {
        membership,
        modularity,
        community_count,
        levels,
    })
}

fn local_moves(graph: &UndirectedGraph, resolution: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let n = graph.node_count();
    let m = graph.total_weight;
    let degree: Vec<f64> = (0..n).map(|i| graph.degree(i)).collect();
    let mut community: Vec<usize> = (0..n).collect();
    let mut total: Vec<f64> = degree.clone();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut link = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut moved_any = false;
    loop {
        let mut moves = 0;
        for &node in &order {
            let home = community[node];
            for &(other, w) in graph.neighbors(node) {
                let c = community[other];
                if !touched.contains(&c) {
                    touched.push(c);
                }
                link[c] += w;
            }
            total[home] -= degree[node];
            let scale = resolution * degree[node] / (2.0 * m);
            let gain = |c: usize, total: &[f64]| link[c] - scale * total[c];

            let mut best = home;
            let mut best_gain = gain(home, &total);
            touched.sort_unstable();
            for &c in &touched {
                if c == home {
                    continue;
                }
                let g = gain(c, &total);
                if g > best_gain + GAIN_EPSILON {
                    best = c;
                    best_gain = g;
                }
            }
            total[best] += degree[node];
            if best != home {
                community[node] = best;
                moves += 1;
            }
            for c in touched.drain(..) {
                link[c] = 0.0;
            }
        }
        if moves == 0 {
            break;
        }
        moved_any = true;
    }
    (community, moved_any)
}

/// Dense relabelling in order of first appearance.
pub(crate) fn renumber(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = std::collections::HashMap::new();
    let out = labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect();
    (out, map.len())
}
