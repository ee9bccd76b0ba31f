//! Maximum flow on a bipartite graph with real capacities (Dinic).

const EPS: f64 = 1e-15;

struct Edge {
    to: usize,
    cap: f64,
}

struct Network {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    cursor: Vec<usize>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Self {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
            level: vec![0; nodes],
            cursor: vec![0; nodes],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: f64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge { to: from, cap: 0.0 });
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let Edge { to, cap } = self.edges[e];
                if cap > EPS && self.level[to] < 0 {
                    self.level[to] = self.level[v] + 1;
                    queue.push_back(to);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, v: usize, t: usize, pushed: f64) -> f64 {
        if v == t {
            return pushed;
        }
        while self.cursor[v] < self.adj[v].len() {
            let e = self.adj[v][self.cursor[v]];
            let Edge { to, cap } = self.edges[e];
            if cap > EPS && self.level[to] == self.level[v] + 1 {
                let got = self.dfs(to, t, pushed.min(cap));
                if got > EPS {
                    self.edges[e].cap -= got;
                    self.edges[e ^ 1].cap += got;
                    return got;
                }
            }
            self.cursor[v] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        while self.bfs(s, t) {
            self.cursor.iter_mut().for_each(|c| *c = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= EPS {
                    break;
                }
                total += f;
            }
        }
        total
    }
}

/// Largest mass a subcoupling of `left` and `right` can put on the pairs
/// `(i, j)` with `allowed(i, j)`.
pub(crate) fn bipartite_max_flow(
    left: &[f64],
    right: &[f64],
    allowed: impl Fn(usize, usize) -> bool,
) -> f64 {
    let (m, n) = (left.len(), right.len());
    let (s, t) = (m + n, m + n + 1);
    let mut net = Network::new(m + n + 2);
    for (i, &a) in left.iter().enumerate() {
        net.add_edge(s, i, a);
    }
    for (j, &b) in right.iter().enumerate() {
        net.add_edge(m + j, t, b);
    }
    for i in 0..m {
        for j in 0..n {
            if allowed(i, j) {
                net.add_edge(i, m + j, f64::INFINITY);
            }
        }
    }
    net.max_flow(s, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let full = bipartite_max_flow(&[0.5, 0.5], &[0.3, 0.7], |_, _| true);
        assert!((full - 1.0).abs() < 1e-15);
        let diag = bipartite_max_flow(&[0.5, 0.5], &[0.3, 0.7], |i, j| i == j);
        assert!((diag - 0.8).abs() < 1e-15);
        let none = bipartite_max_flow(&[1.0], &[1.0], |_, _| false);
        assert_eq!(none, 0.0);
    }

    #[test]
    fn needs_rerouting() {
        // Greedy first match 0->0 blocks 1; max flow must reroute 0->1.
        let f = bipartite_max_flow(&[0.5, 0.5], &[0.5, 0.5], |i, j| i == 0 || j == 0);
        assert!((f - 1.0).abs() < 1e-15);
    }
}
