//! Seeded generators for the random graph families used in datasets.
//!
//! Every generator is a pure function of its arguments. Randomness comes from
//! ChaCha8 seeded through [`rng_for`]; independent streams for sub-tasks of
//! one graph (structure, weights, attempts) are derived with [`derive_seed`],
//! a SplitMix64 mix of the parent seed and a stream index.

mod planarity;

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use planarity::{is_planar, is_three_connected};

use crate::{Error, Result};

pub type GraphRng = ChaCha8Rng;

/// RNG for a seed.
pub fn rng_for(seed: u64) -> GraphRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 of `seed` combined with `stream`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Ba,
    BaBipartite,
    Er,
    Star,
    Lobster,
    TriconnPlanar,
}

impl Family {
    pub const GRAPH_FAMILIES: [Family; 5] = [
        Family::Ba,
        Family::Er,
        Family::Star,
        Family::Lobster,
        Family::TriconnPlanar,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Ba => "ba",
            Family::BaBipartite => "ba_bipartite",
            Family::Er => "er",
            Family::Star => "star",
            Family::Lobster => "lobster",
            Family::TriconnPlanar => "triconn_planar",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ba" => Family::Ba,
            "ba_bipartite" => Family::BaBipartite,
            "er" => Family::Er,
            "star" => Family::Star,
            "lobster" => Family::Lobster,
            "triconn_planar" | "3con" => Family::TriconnPlanar,
            other => return Err(Error::InvalidConfig(format!("unknown family `{other}`"))),
        })
    }
}

/// Simple undirected graph; edges are stored as sorted `(u, v)` with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph, normalising edge orientation and removing duplicates.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let set: BTreeSet<(usize, usize)> = edges
            .into_iter()
            .filter(|(u, v)| u != v)
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        Self {
            n,
            edges: set.into_iter().collect(),
        }
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }
}

/// Bipartite graph given by the LHS neighbourhood of every RHS node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    pub n_lhs: usize,
    pub rhs_adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn n_rhs(&self) -> usize {
        self.rhs_adj.len()
    }

    pub fn lhs_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_lhs];
        for nbrs in &self.rhs_adj {
            for &v in nbrs {
                deg[v] += 1;
            }
        }
        deg
    }

    /// RHS nodes adjacent to each LHS node.
    pub fn lhs_adj(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_lhs];
        for (u, nbrs) in self.rhs_adj.iter().enumerate() {
            for &v in nbrs {
                adj[v].push(u);
            }
        }
        adj
    }
}

/// Draws `k` distinct indices, each draw proportional to `weights` among the
/// indices not yet drawn; falls back to uniform when the remaining mass is 0.
fn sample_proportional_distinct(rng: &mut GraphRng, weights: &[f64], k: usize) -> Vec<usize> {
    let mut taken = vec![false; weights.len()];
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let mass: f64 = (0..weights.len())
            .filter(|&i| !taken[i])
            .map(|i| weights[i])
            .sum();
        let pick = if mass > 0.0 {
            let mut target = rng.gen::<f64>() * mass;
            let mut chosen = None;
            for i in (0..weights.len()).filter(|&i| !taken[i] && weights[i] > 0.0) {
                chosen = Some(i);
                if target < weights[i] {
                    break;
                }
                target -= weights[i];
            }
            chosen.expect("positive mass has a positive entry")
        } else {
            let free: Vec<usize> = (0..weights.len()).filter(|&i| !taken[i]).collect();
            free[rng.gen_range(0..free.len())]
        };
        taken[pick] = true;
        out.push(pick);
    }
    out
}

/// Barabási–Albert preferential attachment with `m` drawn uniformly from
/// `[attach_lo, attach_hi]`. The seed core is a clique on `m` nodes.
pub fn gen_ba(n: usize, attach_lo: usize, attach_hi: usize, seed: u64) -> Result<Graph> {
    if attach_lo < 1 || attach_lo > attach_hi || attach_hi >= n {
        return Err(Error::InvalidConfig(format!(
            "attachment range [{attach_lo}, {attach_hi}] invalid for n = {n}"
        )));
    }
    let mut rng = rng_for(seed);
    let m = rng.gen_range(attach_lo..=attach_hi);
    let mut edges = Vec::new();
    let mut deg = vec![0.0; n];
    for u in 0..m {
        for v in u + 1..m {
            edges.push((u, v));
            deg[u] += 1.0;
            deg[v] += 1.0;
        }
    }
    for new in m..n {
        let targets = sample_proportional_distinct(&mut rng, &deg[..new], m);
        for t in targets {
            edges.push((t, new));
            deg[t] += 1.0;
            deg[new] += 1.0;
        }
    }
    Ok(Graph::new(n, edges))
}

/// Bipartite preferential attachment: each RHS node picks `b` distinct LHS
/// nodes, each draw with probability proportional to `degree + 1`.
pub fn gen_ba_bipartite(n_lhs: usize, m_rhs: usize, b: usize, seed: u64) -> Result<BipartiteGraph> {
    if b < 1 || b > n_lhs {
        return Err(Error::InvalidConfig(format!(
            "b = {b} must lie in [1, n_lhs = {n_lhs}]"
        )));
    }
    let mut rng = rng_for(seed);
    let mut deg = vec![0.0; n_lhs];
    let mut rhs_adj = Vec::with_capacity(m_rhs);
    for _ in 0..m_rhs {
        let smoothed: Vec<f64> = deg.iter().map(|d| d + 1.0).collect();
        let mut nbrs = sample_proportional_distinct(&mut rng, &smoothed, b);
        for &v in &nbrs {
            deg[v] += 1.0;
        }
        nbrs.sort_unstable();
        rhs_adj.push(nbrs);
    }
    Ok(BipartiteGraph { n_lhs, rhs_adj })
}

/// Erdős–Rényi `G(n, p)` with `p` drawn uniformly from `[p_lo, p_hi]`.
pub fn gen_er(n: usize, p_lo: f64, p_hi: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p_lo) || !(0.0..=1.0).contains(&p_hi) || p_lo > p_hi {
        return Err(Error::InvalidConfig(format!(
            "edge probability range [{p_lo}, {p_hi}] invalid"
        )));
    }
    let mut rng = rng_for(seed);
    let p = if p_lo == p_hi {
        p_lo
    } else {
        rng.gen_range(p_lo..=p_hi)
    };
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::new(n, edges))
}

/// Star forest joined into one connected graph, with the star centres.
#[derive(Debug, Clone)]
pub struct StarGraph {
    pub graph: Graph,
    pub centers: Vec<usize>,
    pub parts: Vec<Vec<usize>>,
}

/// Partitions the nodes into 1 to 5 groups, makes each group a star and
/// links the star centres with a random tree.
pub fn gen_star_parts(n: usize, seed: u64) -> Result<StarGraph> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("star graph needs n >= 2, got {n}")));
    }
    let mut rng = rng_for(seed);
    let k = rng.gen_range(1..=5.min(n));
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(&mut rng);
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(&mut rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(k - 1).collect();
    cuts.sort_unstable();
    let mut parts = Vec::with_capacity(k);
    let mut start = 0;
    for end in cuts.into_iter().chain([n]) {
        parts.push(nodes[start..end].to_vec());
        start = end;
    }
    let centers: Vec<usize> = parts.iter().map(|p| p[0]).collect();
    let mut edges = Vec::new();
    for part in &parts {
        for &leaf in &part[1..] {
            edges.push((part[0], leaf));
        }
    }
    for i in 1..k {
        let j = rng.gen_range(0..i);
        edges.push((centers[i], centers[j]));
    }
    Ok(StarGraph {
        graph: Graph::new(n, edges),
        centers,
        parts,
    })
}

pub fn gen_star(n: usize, seed: u64) -> Result<Graph> {
    gen_star_parts(n, seed).map(|s| s.graph)
}

/// Lobster with a backbone length drawn from `[1, n-1]`.
pub fn gen_lobster(n: usize, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("lobster needs n >= 2, got {n}")));
    }
    let mut rng = rng_for(seed);
    let backbone = rng.gen_range(1..n);
    Ok(lobster_from(&mut rng, n, backbone))
}

/// Lobster with a fixed backbone length `m` in `[1, n-1]`.
pub fn gen_lobster_with_backbone(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if m < 1 || m >= n {
        return Err(Error::InvalidConfig(format!(
            "backbone length {m} must lie in [1, {}]",
            n.saturating_sub(1)
        )));
    }
    let mut rng = rng_for(seed);
    Ok(lobster_from(&mut rng, n, m))
}

/// Backbone path `0..m`, then `k` branch nodes on uniform backbone nodes,
/// then the rest on uniform branch nodes.
fn lobster_from(rng: &mut GraphRng, n: usize, m: usize) -> Graph {
    let k = rng.gen_range(1..=n - m);
    let mut edges: Vec<(usize, usize)> = (1..m).map(|i| (i - 1, i)).collect();
    for b in m..m + k {
        edges.push((rng.gen_range(0..m), b));
    }
    for leaf in m + k..n {
        edges.push((rng.gen_range(m..m + k), leaf));
    }
    Graph::new(n, edges)
}

/// Random 3-regular graph from the pairing model, resampled until simple.
pub fn gen_cubic(n: usize, rng: &mut GraphRng) -> Result<Graph> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::InvalidConfig(format!(
            "3-regular graphs need an even n >= 4, got {n}"
        )));
    }
    loop {
        let mut points: Vec<usize> = (0..3 * n).map(|p| p / 3).collect();
        points.shuffle(rng);
        let mut edges = BTreeSet::new();
        let simple = points.chunks(2).all(|pair| {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            u != v && edges.insert((u, v))
        });
        if simple {
            return Ok(Graph::new(n, edges));
        }
    }
}

pub const PLANAR_ATTEMPTS: usize = 100;

/// First random cubic graph (out of 100 attempts) that is planar and
/// 3-connected, or `None`.
pub fn gen_3con_planar(n: usize, seed: u64) -> Result<Option<Graph>> {
    let mut rng = rng_for(seed);
    for _ in 0..PLANAR_ATTEMPTS {
        let g = gen_cubic(n, &mut rng)?;
        if is_planar(&g) && is_three_connected(&g) {
            return Ok(Some(g));
        }
    }
    Ok(None)
}

/// `n` weights uniform on `[0, 1)`.
pub fn sample_weights(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed);
    (0..n).map(|_| rng.gen::<f64>()).collect()
}
