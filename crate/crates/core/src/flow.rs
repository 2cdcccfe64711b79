//! Integral max flow (Dinic) and feasibility of flows with lower bounds.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: i64,
}

/// Residual network; edge `2i` is the forward arc of the i-th added edge and
/// `2i + 1` its reverse.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    original: Vec<i64>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { adj: vec![Vec::new(); nodes], edges: Vec::new(), original: Vec::new() }
    }

    pub fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    /// Adds `u -> v` with capacity `cap` and returns its handle.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: i64) -> usize {
        let id = self.original.len();
        self.adj[u].push(self.edges.len());
        self.edges.push(Edge { to: v, cap });
        self.adj[v].push(self.edges.len());
        self.edges.push(Edge { to: u, cap: 0 });
        self.original.push(cap);
        id
    }

    /// Flow currently routed through edge `id`.
    pub fn flow(&self, id: usize) -> i64 {
        self.original[id] - self.edges[2 * id].cap
    }

    fn levels(&self, s: usize, t: usize) -> Option<Vec<usize>> {
        let mut level = vec![usize::MAX; self.adj.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let Edge { to, cap } = self.edges[e];
                if cap > 0 && level[to] == usize::MAX {
                    level[to] = level[u] + 1;
                    queue.push_back(to);
                }
            }
        }
        (level[t] != usize::MAX).then_some(level)
    }

    fn augment(&mut self, u: usize, t: usize, pushed: i64, level: &[usize], next: &mut [usize]) -> i64 {
        if u == t {
            return pushed;
        }
        while next[u] < self.adj[u].len() {
            let e = self.adj[u][next[u]];
            let Edge { to, cap } = self.edges[e];
            if cap > 0 && level[to] == level[u] + 1 {
                let got = self.augment(to, t, pushed.min(cap), level, next);
                if got > 0 {
                    self.edges[e].cap -= got;
                    self.edges[e ^ 1].cap += got;
                    return got;
                }
            }
            next[u] += 1;
        }
        0
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        while let Some(level) = self.levels(s, t) {
            let mut next = vec![0; self.adj.len()];
            loop {
                let f = self.augment(s, t, i64::MAX, &level, &mut next);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
        total
    }
}

/// A network whose edges carry `[lower, upper]` bounds, solved as a
/// circulation through an auxiliary source and sink.
#[derive(Debug, Clone)]
pub struct BoundedNetwork {
    net: FlowNetwork,
    excess: Vec<i64>,
    lower: Vec<i64>,
}

impl BoundedNetwork {
    pub fn new(nodes: usize) -> Self {
        BoundedNetwork { net: FlowNetwork::new(nodes), excess: vec![0; nodes], lower: Vec::new() }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, lower: i64, upper: i64) -> usize {
        debug_assert!(0 <= lower && lower <= upper);
        self.excess[v] += lower;
        self.excess[u] -= lower;
        self.lower.push(lower);
        self.net.add_edge(u, v, upper - lower)
    }

    /// Whether a circulation meeting every bound exists. On success the flow
    /// on each edge is available through [`BoundedNetwork::flow`].
    pub fn feasible(&mut self) -> bool {
        let s = self.net.add_node();
        let t = self.net.add_node();
        let mut need = 0;
        for v in 0..self.excess.len() {
            let e = self.excess[v];
            if e > 0 {
                self.net.add_edge(s, v, e);
                need += e;
            } else if e < 0 {
                self.net.add_edge(v, t, -e);
            }
        }
        self.net.max_flow(s, t) == need
    }

    pub fn flow(&self, id: usize) -> i64 {
        self.lower[id] + self.net.flow(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_max_flow() {
        let mut g = FlowNetwork::new(4);
        let a = g.add_edge(0, 1, 3);
        g.add_edge(0, 2, 2);
        g.add_edge(1, 2, 1);
        g.add_edge(1, 3, 2);
        g.add_edge(2, 3, 3);
        assert_eq!(g.max_flow(0, 3), 5);
        assert_eq!(g.flow(a), 3);
    }

    #[test]
    fn lower_bounds_force_flow() {
        // s -> a [2, 5], a -> t [0, 1], t -> s [0, inf]: infeasible.
        let mut g = BoundedNetwork::new(3);
        g.add_edge(0, 1, 2, 5);
        g.add_edge(1, 2, 0, 1);
        g.add_edge(2, 0, 0, i64::MAX / 4);
        assert!(!g.feasible());

        let mut g = BoundedNetwork::new(3);
        let e = g.add_edge(0, 1, 2, 5);
        g.add_edge(1, 2, 0, 3);
        g.add_edge(2, 0, 0, i64::MAX / 4);
        assert!(g.feasible());
        assert!((2..=3).contains(&g.flow(e)));
    }
}
