//! Integral maximum flow with Dinic's algorithm.
//!
//! Edges live in one vector; edge `e` owns residual arcs `2e` (forward,
//! residual `cap - flow`) and `2e + 1` (backward, residual `flow`).

use std::collections::VecDeque;
use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowEdge {
    pub from: usize,
    pub to: usize,
    pub cap: i64,
    pub flow: i64,
    /// Witness point id carried by shift edges.
    pub label: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    source: usize,
    sink: usize,
    edges: Vec<FlowEdge>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(vertices: usize, source: usize, sink: usize) -> Self {
        assert!(source < vertices && sink < vertices && source != sink);
        Self {
            source,
            sink,
            edges: Vec::new(),
            adj: vec![Vec::new(); vertices],
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64, label: Option<usize>) -> usize {
        assert!(cap >= 0, "negative capacity");
        let id = self.edges.len();
        self.edges.push(FlowEdge {
            from,
            to,
            cap,
            flow: 0,
            label,
        });
        self.adj[from].push(2 * id);
        self.adj[to].push(2 * id + 1);
        id
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn edges(&self) -> &[FlowEdge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &FlowEdge {
        &self.edges[id]
    }

    pub fn set_capacity(&mut self, id: usize, cap: i64) {
        assert!(cap >= 0, "negative capacity");
        self.edges[id].cap = cap;
    }

    pub fn reset_flows(&mut self) {
        for e in &mut self.edges {
            e.flow = 0;
        }
    }

    /// Net flow leaving the source.
    pub fn value(&self) -> i64 {
        self.edges
            .iter()
            .map(|e| {
                let out = if e.from == self.source { e.flow } else { 0 };
                let back = if e.to == self.source { e.flow } else { 0 };
                out - back
            })
            .sum()
    }

    /// Checks capacity constraints and conservation at every vertex except
    /// the source and sink.
    pub fn is_valid_flow(&self) -> bool {
        let mut excess = vec![0i64; self.vertex_count()];
        for e in &self.edges {
            if e.flow < 0 || e.flow > e.cap {
                return false;
            }
            excess[e.from] -= e.flow;
            excess[e.to] += e.flow;
        }
        excess
            .iter()
            .enumerate()
            .all(|(v, &x)| v == self.source || v == self.sink || x == 0)
    }

    /// Writes one edge per line: `from to cap flow label` (`-` when unlabeled).
    pub fn dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        for e in &self.edges {
            match e.label {
                Some(l) => writeln!(w, "{} {} {} {} {}", e.from, e.to, e.cap, e.flow, l)?,
                None => writeln!(w, "{} {} {} {} -", e.from, e.to, e.cap, e.flow)?,
            }
        }
        Ok(())
    }

    #[inline]
    fn residual(&self, arc: usize) -> i64 {
        let e = &self.edges[arc / 2];
        if arc.is_multiple_of(2) {
            e.cap - e.flow
        } else {
            e.flow
        }
    }

    #[inline]
    fn head(&self, arc: usize) -> usize {
        let e = &self.edges[arc / 2];
        if arc.is_multiple_of(2) {
            e.to
        } else {
            e.from
        }
    }

    #[inline]
    fn tail(&self, arc: usize) -> usize {
        let e = &self.edges[arc / 2];
        if arc.is_multiple_of(2) {
            e.from
        } else {
            e.to
        }
    }

    #[inline]
    fn push(&mut self, arc: usize, amount: i64) {
        let e = &mut self.edges[arc / 2];
        if arc.is_multiple_of(2) {
            e.flow += amount;
        } else {
            e.flow -= amount;
        }
    }

    fn levels(&self) -> Option<Vec<u32>> {
        let mut level = vec![u32::MAX; self.vertex_count()];
        let mut queue = VecDeque::new();
        level[self.source] = 0;
        queue.push_back(self.source);
        while let Some(v) = queue.pop_front() {
            for &arc in &self.adj[v] {
                let w = self.head(arc);
                if level[w] == u32::MAX && self.residual(arc) > 0 {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        (level[self.sink] != u32::MAX).then_some(level)
    }
}

/// Maximum source-to-sink flow, starting from the network's current flow.
/// Leaves the maximizing flow on the edges and returns its value.
///
/// Each phase builds a BFS level graph and then repeatedly advances along
/// admissible arcs, retreats out of dead ends (removing the arc from the
/// phase), and augments when the sink is reached.
pub fn dinic_max_flow(net: &mut FlowNetwork) -> i64 {
    let (source, sink) = (net.source, net.sink);
    while let Some(level) = net.levels() {
        let mut next_arc = vec![0usize; net.vertex_count()];
        let mut path: Vec<usize> = Vec::new();
        loop {
            let v = path.last().map_or(source, |&a| net.head(a));
            if v == sink {
                // augment
                let amount = path.iter().map(|&a| net.residual(a)).min().expect("nonempty path");
                for &a in &path {
                    net.push(a, amount);
                }
                let first_saturated = path.iter().position(|&a| net.residual(a) == 0).expect("bottleneck arc");
                path.truncate(first_saturated);
                continue;
            }
            // advance
            let mut advanced = false;
            while next_arc[v] < net.adj[v].len() {
                let arc = net.adj[v][next_arc[v]];
                let w = net.head(arc);
                if net.residual(arc) > 0 && level[w] == level[v] + 1 {
                    path.push(arc);
                    advanced = true;
                    break;
                }
                next_arc[v] += 1;
            }
            if advanced {
                continue;
            }
            // retreat
            match path.pop() {
                Some(arc) => next_arc[net.tail(arc)] += 1,
                None => break,
            }
        }
    }
    net.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_network() {
        let mut net = FlowNetwork::new(6, 0, 5);
        net.add_edge(0, 1, 10, None);
        net.add_edge(0, 2, 10, None);
        net.add_edge(1, 3, 4, None);
        net.add_edge(1, 4, 8, None);
        net.add_edge(2, 4, 9, None);
        net.add_edge(3, 5, 10, None);
        net.add_edge(4, 3, 6, None);
        net.add_edge(4, 5, 10, None);
        assert_eq!(dinic_max_flow(&mut net), 19);
        assert!(net.is_valid_flow());
    }

    #[test]
    fn disconnected_and_trivial() {
        let mut net = FlowNetwork::new(4, 0, 3);
        net.add_edge(0, 1, 10, None);
        net.add_edge(2, 3, 5, None);
        assert_eq!(dinic_max_flow(&mut net), 0);

        let mut net = FlowNetwork::new(2, 0, 1);
        net.add_edge(0, 1, 7, None);
        assert_eq!(dinic_max_flow(&mut net), 7);
    }

    #[test]
    fn needs_flow_cancellation() {
        // The greedy path 0-1-2-3 blocks the optimum unless flow on 1->2 is undone.
        let mut net = FlowNetwork::new(4, 0, 3);
        net.add_edge(0, 1, 1, None);
        net.add_edge(0, 2, 1, None);
        net.add_edge(1, 2, 1, None);
        net.add_edge(1, 3, 1, None);
        net.add_edge(2, 3, 1, None);
        assert_eq!(dinic_max_flow(&mut net), 2);
        assert!(net.is_valid_flow());
    }

    #[test]
    fn rerun_after_capacity_edit() {
        let mut net = FlowNetwork::new(3, 0, 2);
        let e = net.add_edge(0, 1, 1, None);
        net.add_edge(1, 2, 5, None);
        assert_eq!(dinic_max_flow(&mut net), 1);
        net.set_capacity(e, 4);
        assert_eq!(dinic_max_flow(&mut net), 4);
        net.reset_flows();
        assert_eq!(net.value(), 0);
    }

    #[test]
    fn dump_format() {
        let mut net = FlowNetwork::new(3, 0, 2);
        net.add_edge(0, 1, 1, Some(42));
        net.add_edge(1, 2, 2, None);
        dinic_max_flow(&mut net);
        let mut out = Vec::new();
        net.dump(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "0 1 1 1 42\n1 2 2 1 -\n");
    }
}
