//! Edge-labelled multigraphs with loops: seed graphs and their quotients.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} has {count} edge ends labelled {label}")]
    NotRegular { vertex: usize, label: usize, count: usize },
    #[error("edge ({0}, {1}) refers to a missing vertex")]
    MissingVertex(usize, usize),
}

/// An undirected edge; `label` is one-based, `u <= v`, and `u == v` is a loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub label: usize,
}

impl Edge {
    pub fn new(u: usize, v: usize, label: usize) -> Self {
        Edge { u: u.min(v), v: u.max(v), label }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelledGraph {
    /// Payload digests, one per vertex.
    pub vertices: Vec<String>,
    /// Human-readable payloads, parallel to `vertices`.
    pub annotations: Vec<String>,
    pub edges: Vec<Edge>,
}

impl LabelledGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, digest: String, annotation: String) -> usize {
        self.vertices.push(digest);
        self.annotations.push(annotation);
        self.vertices.len() - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize, label: usize) {
        self.edges.push(Edge::new(u, v, label));
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn loops(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.u == e.v)
    }

    /// `(vertex, label) -> neighbour`; loops map a vertex to itself.
    pub fn neighbour_map(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut out: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for e in &self.edges {
            out.entry((e.u, e.label)).or_default().push(e.v);
            if e.u != e.v {
                out.entry((e.v, e.label)).or_default().push(e.u);
            }
        }
        out
    }

    pub fn neighbour(&self, v: usize, label: usize) -> Option<usize> {
        self.edges.iter().find_map(|e| {
            if e.label != label {
                None
            } else if e.u == v {
                Some(e.v)
            } else if e.v == v {
                Some(e.u)
            } else {
                None
            }
        })
    }

    /// Checks that every vertex has exactly one edge end for each label in
    /// `labels`, counting a loop once, and no ends for other labels.
    pub fn check_regular(&self, labels: &[usize]) -> Result<(), GraphError> {
        let n = self.num_vertices();
        let mut count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for e in &self.edges {
            if e.v >= n {
                return Err(GraphError::MissingVertex(e.u, e.v));
            }
            *count.entry((e.u, e.label)).or_default() += 1;
            if e.u != e.v {
                *count.entry((e.v, e.label)).or_default() += 1;
            }
        }
        for v in 0..n {
            for &l in labels {
                let c = count.get(&(v, l)).copied().unwrap_or(0);
                if c != 1 {
                    return Err(GraphError::NotRegular { vertex: v, label: l, count: c });
                }
            }
        }
        let allowed: BTreeSet<usize> = labels.iter().copied().collect();
        if let Some((&(vertex, label), &count)) = count.iter().find(|((_, l), _)| !allowed.contains(l)) {
            return Err(GraphError::NotRegular { vertex, label, count });
        }
        Ok(())
    }

    pub fn is_regular(&self, labels: &[usize]) -> bool {
        self.check_regular(labels).is_ok()
    }

    /// Connected components, each sorted, ordered by least vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.num_vertices();
        let adj = self.adjacency();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &(w, _) in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.num_vertices()];
        for e in &self.edges {
            adj[e.u].push((e.v, e.label));
            if e.u != e.v {
                adj[e.v].push((e.u, e.label));
            }
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
        }
        adj
    }

    /// Label-preserving isomorphism `self -> other` as a vertex map, if any.
    ///
    /// Works for graphs in which each vertex has at most one edge end per
    /// label: the image of one vertex in a component then determines the
    /// whole component, so each candidate is checked by propagation.
    pub fn isomorphism(&self, other: &LabelledGraph) -> Option<Vec<usize>> {
        if self.num_vertices() != other.num_vertices() || self.num_edges() != other.num_edges() {
            return None;
        }
        let a = self.neighbour_map();
        let b = other.neighbour_map();
        if a.values().chain(b.values()).any(|v| v.len() > 1) {
            return None;
        }
        let step = |m: &BTreeMap<(usize, usize), Vec<usize>>, v: usize, l: usize| m.get(&(v, l)).map(|x| x[0]);
        let labels: BTreeSet<usize> = self.edges.iter().map(|e| e.label).collect();

        let mut map = vec![usize::MAX; self.num_vertices()];
        let mut used = vec![false; other.num_vertices()];
        for comp in self.components() {
            let root = comp[0];
            let mut found = false;
            for cand in 0..other.num_vertices() {
                if used[cand] {
                    continue;
                }
                let mut trial: BTreeMap<usize, usize> = BTreeMap::from([(root, cand)]);
                let mut taken: BTreeSet<usize> = BTreeSet::from([cand]);
                let mut queue = VecDeque::from([root]);
                let mut ok = true;
                'bfs: while let Some(v) = queue.pop_front() {
                    let fv = trial[&v];
                    for &l in &labels {
                        match (step(&a, v, l), step(&b, fv, l)) {
                            (None, None) => {}
                            (Some(w), Some(fw)) => match trial.get(&w) {
                                Some(&x) if x == fw => {}
                                Some(_) => {
                                    ok = false;
                                    break 'bfs;
                                }
                                None => {
                                    if used[fw] || !taken.insert(fw) {
                                        ok = false;
                                        break 'bfs;
                                    }
                                    trial.insert(w, fw);
                                    queue.push_back(w);
                                }
                            },
                            _ => {
                                ok = false;
                                break 'bfs;
                            }
                        }
                    }
                }
                if ok && trial.len() == comp.len() {
                    for (v, fv) in trial {
                        map[v] = fv;
                        used[fv] = true;
                    }
                    found = true;
                    break;
                }
            }
            if !found {
                return None;
            }
        }
        Some(map)
    }

    pub fn is_isomorphic(&self, other: &LabelledGraph) -> bool {
        self.isomorphism(other).is_some()
    }

    /// Graphviz rendering. Vertices are numbered from 1; with `annotate` each
    /// vertex carries its payload text.
    pub fn to_dot(&self, name: &str, annotate: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "graph {} {{", dot_id(name));
        for (v, ann) in self.annotations.iter().enumerate() {
            if annotate {
                let _ = writeln!(out, "  {} [label={}];", v + 1, dot_string(&format!("{}: {}", v + 1, ann)));
            } else {
                let _ = writeln!(out, "  {};", v + 1);
            }
        }
        for e in &self.edges {
            let _ = writeln!(out, "  {} -- {} [label=\"{}\"];", e.u + 1, e.v + 1, e.label);
        }
        out.push_str("}\n");
        out
    }
}

fn dot_id(name: &str) -> String {
    if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        name.to_string()
    } else {
        dot_string(name)
    }
}

fn dot_string(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize, usize)]) -> LabelledGraph {
        let mut g = LabelledGraph::new();
        for v in 0..n {
            g.add_vertex(format!("v{v}"), String::new());
        }
        for &(u, v, l) in edges {
            g.add_edge(u - 1, v - 1, l);
        }
        g
    }

    fn decagon(shift: usize) -> LabelledGraph {
        let edges: Vec<_> = (0..10).map(|k| ((k + shift) % 10 + 1, (k + shift + 1) % 10 + 1, k % 2 + 1)).collect();
        graph(10, &edges)
    }

    #[test]
    fn regularity() {
        let g = graph(1, &[(1, 1, 1), (1, 1, 2)]);
        assert!(g.is_regular(&[1, 2]));
        assert!(!g.is_regular(&[1, 2, 3]));
        let bad = graph(2, &[(1, 2, 1), (1, 2, 1)]);
        assert_eq!(bad.check_regular(&[1]), Err(GraphError::NotRegular { vertex: 0, label: 1, count: 2 }));
        assert!(decagon(0).is_regular(&[1, 2]));
    }

    #[test]
    fn isomorphism_by_propagation() {
        assert!(decagon(0).is_isomorphic(&decagon(3)));
        let mut broken = decagon(1);
        broken.edges[0].label = 3 - broken.edges[0].label;
        assert!(!decagon(0).is_isomorphic(&broken));
        let a = graph(2, &[(1, 2, 1), (1, 2, 2)]);
        let b = graph(2, &[(1, 1, 1), (2, 2, 1), (1, 2, 2)]);
        assert!(!a.is_isomorphic(&b));
        let two = graph(4, &[(1, 2, 1), (3, 4, 1), (1, 1, 2), (2, 2, 2), (3, 3, 2), (4, 4, 2)]);
        let map = two.isomorphism(&graph(4, &[(1, 1, 2), (2, 2, 2), (3, 3, 2), (4, 4, 2), (4, 2, 1), (3, 1, 1)])).unwrap();
        assert_eq!(map.iter().collect::<BTreeSet<_>>().len(), 4);
    }

    #[test]
    fn dot_output() {
        let g = graph(1, &[(1, 1, 1), (1, 1, 2)]);
        let dot = g.to_dot("quotient", false);
        assert_eq!(dot, "graph quotient {\n  1;\n  1 -- 1 [label=\"1\"];\n  1 -- 1 [label=\"2\"];\n}\n");
    }
}
