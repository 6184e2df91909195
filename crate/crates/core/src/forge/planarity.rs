//! Left-right planarity test and an exhaustive 3-connectivity check.
//!
//! The planarity test follows the LR criterion: orient the graph by DFS,
//! compute lowpoints and nesting depths, then check that return edges can be
//! split into left and right sides without conflicts. Only the yes/no answer
//! is produced; no embedding is built.

use super::Graph;

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Interval {
    low: Option<usize>,
    high: Option<usize>,
}

impl Interval {
    fn is_empty(&self) -> bool {
        self.low.is_none() && self.high.is_none()
    }
}

#[derive(Clone, Copy, Debug)]
struct ConflictPair {
    id: usize,
    left: Interval,
    right: Interval,
}

impl ConflictPair {
    fn swap(&mut self) {
        std::mem::swap(&mut self.left, &mut self.right);
    }
}

struct LrState {
    n: usize,
    /// adjacency as (neighbour, undirected edge id)
    adj: Vec<Vec<(usize, usize)>>,
    /// orientation: edge id -> (source, target), NONE until oriented
    src: Vec<usize>,
    dst: Vec<usize>,
    height: Vec<usize>,
    parent_edge: Vec<usize>,
    lowpt: Vec<usize>,
    lowpt2: Vec<usize>,
    nesting_depth: Vec<usize>,
    ordered_out: Vec<Vec<usize>>,
    lowpt_edge: Vec<usize>,
    reference: Vec<Option<usize>>,
    stack_bottom: Vec<Option<usize>>,
    stack: Vec<ConflictPair>,
    next_pair_id: usize,
}

impl LrState {
    fn new(g: &Graph) -> Self {
        let m = g.edges.len();
        let mut adj = vec![Vec::new(); g.n];
        for (id, &(u, v)) in g.edges.iter().enumerate() {
            adj[u].push((v, id));
            adj[v].push((u, id));
        }
        Self {
            n: g.n,
            adj,
            src: vec![NONE; m],
            dst: vec![NONE; m],
            height: vec![NONE; g.n],
            parent_edge: vec![NONE; g.n],
            lowpt: vec![0; m],
            lowpt2: vec![0; m],
            nesting_depth: vec![0; m],
            ordered_out: vec![Vec::new(); g.n],
            lowpt_edge: vec![NONE; m],
            reference: vec![None; m],
            stack_bottom: vec![None; m],
            stack: Vec::new(),
            next_pair_id: 0,
        }
    }

    fn orient(&mut self, v: usize) {
        let e = self.parent_edge[v];
        for i in 0..self.adj[v].len() {
            let (w, id) = self.adj[v][i];
            if self.src[id] != NONE {
                continue;
            }
            self.src[id] = v;
            self.dst[id] = w;
            self.lowpt[id] = self.height[v];
            self.lowpt2[id] = self.height[v];
            if self.height[w] == NONE {
                self.parent_edge[w] = id;
                self.height[w] = self.height[v] + 1;
                self.orient(w);
            } else {
                self.lowpt[id] = self.height[w];
            }
            self.nesting_depth[id] = 2 * self.lowpt[id];
            if self.lowpt2[id] < self.height[v] {
                self.nesting_depth[id] += 1;
            }
            if e != NONE {
                if self.lowpt[id] < self.lowpt[e] {
                    self.lowpt2[e] = self.lowpt[e].min(self.lowpt2[id]);
                    self.lowpt[e] = self.lowpt[id];
                } else if self.lowpt[id] > self.lowpt[e] {
                    self.lowpt2[e] = self.lowpt2[e].min(self.lowpt[id]);
                } else {
                    self.lowpt2[e] = self.lowpt2[e].min(self.lowpt2[id]);
                }
            }
        }
    }

    fn conflicting(&self, interval: &Interval, edge: usize) -> bool {
        match interval.high {
            Some(h) if !interval.is_empty() => self.lowpt[h] > self.lowpt[edge],
            _ => false,
        }
    }

    fn lowest(&self, pair: &ConflictPair) -> usize {
        if pair.left.is_empty() {
            return self.lowpt[pair.right.low.expect("non-empty right")];
        }
        if pair.right.is_empty() {
            return self.lowpt[pair.left.low.expect("non-empty left")];
        }
        self.lowpt[pair.left.low.unwrap()].min(self.lowpt[pair.right.low.unwrap()])
    }

    fn top_id(&self) -> Option<usize> {
        self.stack.last().map(|p| p.id)
    }

    fn new_pair(&mut self, left: Interval, right: Interval) -> ConflictPair {
        let id = self.next_pair_id;
        self.next_pair_id += 1;
        ConflictPair { id, left, right }
    }

    fn test(&mut self, v: usize) -> bool {
        let e = self.parent_edge[v];
        let out = self.ordered_out[v].clone();
        for (i, &ei) in out.iter().enumerate() {
            let w = self.dst[ei];
            self.stack_bottom[ei] = self.top_id();
            if ei == self.parent_edge[w] {
                if !self.test(w) {
                    return false;
                }
            } else {
                self.lowpt_edge[ei] = ei;
                let right = Interval {
                    low: Some(ei),
                    high: Some(ei),
                };
                let pair = self.new_pair(Interval::default(), right);
                self.stack.push(pair);
            }
            if self.lowpt[ei] < self.height[v] {
                if i == 0 {
                    self.lowpt_edge[e] = self.lowpt_edge[ei];
                } else if !self.add_constraints(ei, e) {
                    return false;
                }
            }
        }
        if e != NONE {
            self.remove_back_edges(e);
        }
        true
    }

    fn add_constraints(&mut self, ei: usize, e: usize) -> bool {
        let mut p = self.new_pair(Interval::default(), Interval::default());
        loop {
            let mut q = self.stack.pop().expect("return edges of ei are on the stack");
            if !q.left.is_empty() {
                q.swap();
            }
            if !q.left.is_empty() {
                return false;
            }
            let q_low = q.right.low.expect("non-empty right interval");
            if self.lowpt[q_low] > self.lowpt[e] {
                if p.right.is_empty() {
                    p.right = q.right;
                } else {
                    self.reference[p.right.low.unwrap()] = q.right.high;
                }
                p.right.low = q.right.low;
            } else {
                self.reference[q_low] = Some(self.lowpt_edge[e]);
            }
            if self.top_id() == self.stack_bottom[ei] {
                break;
            }
        }
        while let Some(top) = self.stack.last() {
            if !(self.conflicting(&top.left, ei) || self.conflicting(&top.right, ei)) {
                break;
            }
            let mut q = self.stack.pop().unwrap();
            if self.conflicting(&q.right, ei) {
                q.swap();
            }
            if self.conflicting(&q.right, ei) {
                return false;
            }
            if let Some(low) = p.right.low {
                self.reference[low] = q.right.high;
            }
            if q.right.low.is_some() {
                p.right.low = q.right.low;
            }
            if p.left.is_empty() {
                p.left = q.left;
            } else if let Some(low) = p.left.low {
                self.reference[low] = q.left.high;
            }
            p.left.low = q.left.low;
        }
        if !(p.left.is_empty() && p.right.is_empty()) {
            self.stack.push(p);
        }
        true
    }

    fn remove_back_edges(&mut self, e: usize) {
        let u = self.src[e];
        while let Some(top) = self.stack.last() {
            if self.lowest(top) != self.height[u] {
                break;
            }
            self.stack.pop();
        }
        if let Some(mut p) = self.stack.pop() {
            while let Some(h) = p.left.high {
                if self.dst[h] != u {
                    break;
                }
                p.left.high = self.reference[h];
            }
            if p.left.high.is_none() {
                if let Some(low) = p.left.low {
                    self.reference[low] = p.right.low;
                    p.left.low = None;
                }
            }
            while let Some(h) = p.right.high {
                if self.dst[h] != u {
                    break;
                }
                p.right.high = self.reference[h];
            }
            if p.right.high.is_none() {
                if let Some(low) = p.right.low {
                    self.reference[low] = p.left.low;
                    p.right.low = None;
                }
            }
            self.stack.push(p);
        }
        if self.lowpt[e] < self.height[u] {
            if let Some(top) = self.stack.last() {
                let (hl, hr) = (top.left.high, top.right.high);
                self.reference[e] = match (hl, hr) {
                    (Some(l), Some(r)) if self.lowpt[l] > self.lowpt[r] => Some(l),
                    (Some(l), None) => Some(l),
                    _ => hr,
                };
            }
        }
    }
}

/// Left-right planarity test for a simple graph.
pub fn is_planar(g: &Graph) -> bool {
    let n = g.n;
    if n > 2 && g.edges.len() > 3 * n - 6 {
        return false;
    }
    let mut state = LrState::new(g);
    let mut roots = Vec::new();
    for v in 0..n {
        if state.height[v] == NONE {
            state.height[v] = 0;
            roots.push(v);
            state.orient(v);
        }
    }
    for v in 0..state.n {
        let mut out: Vec<usize> = state.adj[v]
            .iter()
            .map(|&(_, id)| id)
            .filter(|&id| state.src[id] == v)
            .collect();
        out.sort_by_key(|&id| state.nesting_depth[id]);
        state.ordered_out[v] = out;
    }
    roots.into_iter().all(|r| state.test(r))
}

/// True iff the graph has at least 4 vertices and stays connected after
/// removing any two of them.
pub fn is_three_connected(g: &Graph) -> bool {
    let n = g.n;
    if n < 4 || !g.is_connected() {
        return false;
    }
    let adj = g.adjacency();
    let connected_without = |a: usize, b: usize| {
        let start = (0..n).find(|&v| v != a && v != b).expect("n >= 4");
        let mut seen = vec![false; n];
        seen[a] = true;
        seen[b] = true;
        seen[start] = true;
        let mut stack = vec![start];
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n - 2
    };
    (0..n).all(|a| (a + 1..n).all(|b| connected_without(a, b)))
}
