//! Exact Edmonds–Karp max flow on small graphs with rational capacities.

use std::collections::VecDeque;

use crate::rational::Rational;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    /// `None` is an uncapacitated edge.
    cap: Option<Rational>,
    flow: Rational,
}

#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub(crate) fn new(nodes: usize) -> Self {
        FlowNetwork { edges: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    /// Returns the id of the forward edge.
    pub(crate) fn add_edge(&mut self, from: usize, to: usize, cap: Option<Rational>) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, flow: Rational::zero() });
        self.adj[from].push(id);
        self.edges.push(Edge { to: from, cap: Some(Rational::zero()), flow: Rational::zero() });
        self.adj[to].push(id + 1);
        id
    }

    fn residual(&self, id: usize) -> Option<Rational> {
        let e = &self.edges[id];
        if id % 2 == 1 {
            // Reverse edge: can undo the forward flow.
            let fwd = &self.edges[id - 1];
            return fwd.flow.is_positive().then(|| fwd.flow.clone());
        }
        match &e.cap {
            None => Some(Rational::from_integer(i64::MAX)),
            Some(c) => {
                let r = c - &e.flow;
                r.is_positive().then_some(r)
            }
        }
    }

    pub(crate) fn flow_on(&self, id: usize) -> &Rational {
        &self.edges[id].flow
    }

    pub(crate) fn max_flow(&mut self, source: usize, sink: usize) -> Rational {
        let mut total = Rational::zero();
        loop {
            let mut parent: Vec<Option<usize>> = vec![None; self.adj.len()];
            let mut seen = vec![false; self.adj.len()];
            seen[source] = true;
            let mut queue = VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                if u == sink {
                    break;
                }
                for &id in &self.adj[u] {
                    let v = self.edges[id].to;
                    if !seen[v] && self.residual(id).is_some() {
                        seen[v] = true;
                        parent[v] = Some(id);
                        queue.push_back(v);
                    }
                }
            }
            if !seen[sink] {
                return total;
            }
            let mut path = Vec::new();
            let mut v = sink;
            while let Some(id) = parent[v] {
                path.push(id);
                v = self.edges[id ^ 1].to;
            }
            let push = path.iter().filter_map(|&id| self.residual(id)).min().expect("nonempty augmenting path");
            for &id in &path {
                if id % 2 == 0 {
                    self.edges[id].flow += &push;
                } else {
                    self.edges[id - 1].flow -= &push;
                }
            }
            total += push;
        }
    }

    /// Nodes reachable from `source` in the residual graph (the source side of a min cut).
    pub(crate) fn reachable(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[source] = true;
        let mut stack = vec![source];
        while let Some(u) = stack.pop() {
            for &id in &self.adj[u] {
                let v = self.edges[id].to;
                if !seen[v] && self.residual(id).is_some() {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}
