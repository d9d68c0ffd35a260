//! The system model: connection graph G, precedence graph D on the edges of
//! G, and the per-part / per-connection parameters.
//!
//! An arc `(i, j)` means edge `j` has to be broken before edge `i` can be.
//! On the wire an arc is written `{"from": i, "to": j}` with both edges given
//! by their endpoint labels.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::{EdgeSet, VertexSet, MAX_VERTICES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawVertex {
    pub id: String,
    pub cost: f64,
    pub rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawEdge {
    pub u: String,
    pub v: String,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawArc {
    pub from: [String; 2],
    pub to: [String; 2],
}

/// Unvalidated instance as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RawInstance {
    pub vertices: Vec<RawVertex>,
    pub edges: Vec<RawEdge>,
    #[serde(default)]
    pub arcs: Vec<RawArc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub label: String,
    pub name: Option<String>,
    /// Purchase cost ℓ(v).
    pub cost: f64,
    /// Failure rate λ(v).
    pub rate: f64,
}

/// An undirected connection with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    /// Break-and-reconnect cost w(e).
    pub w: f64,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn shared_vertex(&self, o: &Edge) -> Option<usize> {
        let a = [self.u, self.v];
        let b = [o.u, o.v];
        let common: Vec<usize> = a.iter().copied().filter(|x| b.contains(x)).collect();
        (common.len() == 1).then(|| common[0])
    }
}

/// A validated system instance. Immutable once built.
#[derive(Debug, Clone)]
pub struct SystemInstance {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    arcs: Vec<(usize, usize)>,
    adjacency: Vec<VertexSet>,
    incident: Vec<EdgeSet>,
    edge_index: HashMap<(usize, usize), usize>,
    meta: Option<serde_json::Value>,
}

fn check_positive(x: f64, what: &'static str, element: impl FnOnce() -> String) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveParameter { what, element: element() })
    }
}

impl SystemInstance {
    /// Validate a raw instance.
    pub fn validate(raw: &RawInstance) -> Result<Self> {
        if raw.vertices.len() > MAX_VERTICES {
            return Err(Error::InstanceTooLarge(format!(
                "{} vertices; at most {MAX_VERTICES} are supported",
                raw.vertices.len()
            )));
        }
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut vertices = Vec::with_capacity(raw.vertices.len());
        for (i, v) in raw.vertices.iter().enumerate() {
            if index.insert(v.id.as_str(), i).is_some() {
                return Err(Error::DuplicateVertex(v.id.clone()));
            }
            check_positive(v.cost, "part cost", || v.id.clone())?;
            check_positive(v.rate, "failure rate", || v.id.clone())?;
            vertices.push(Vertex { label: v.id.clone(), name: v.name.clone(), cost: v.cost, rate: v.rate });
        }
        let lookup = |s: &str| index.get(s).copied().ok_or_else(|| Error::UnknownVertex(s.to_string()));
        let mut edges = Vec::with_capacity(raw.edges.len());
        let mut edge_index = HashMap::new();
        for e in &raw.edges {
            let (a, b) = (lookup(&e.u)?, lookup(&e.v)?);
            if a == b {
                return Err(Error::SelfLoop(e.u.clone()));
            }
            let (u, v) = (a.min(b), a.max(b));
            if edge_index.insert((u, v), edges.len()).is_some() {
                return Err(Error::DuplicateEdge(format!("{{{},{}}}", e.u, e.v)));
            }
            check_positive(e.w, "edge weight", || format!("{{{},{}}}", e.u, e.v))?;
            edges.push(Edge { u, v, w: e.w });
        }
        let edge_of = |pair: &[String; 2]| -> Result<usize> {
            let (a, b) = (lookup(&pair[0])?, lookup(&pair[1])?);
            edge_index
                .get(&(a.min(b), a.max(b)))
                .copied()
                .ok_or_else(|| Error::UnknownEdge(format!("{{{},{}}}", pair[0], pair[1])))
        };
        let mut arcs = Vec::with_capacity(raw.arcs.len());
        let mut seen = HashSet::new();
        for a in &raw.arcs {
            let (i, j) = (edge_of(&a.from)?, edge_of(&a.to)?);
            let label = |p: &[String; 2]| format!("{{{},{}}}", p[0], p[1]);
            if edges[i].shared_vertex(&edges[j]).is_none() {
                return Err(Error::NonAdjacentArc { from: label(&a.from), to: label(&a.to) });
            }
            if !seen.insert((i, j)) {
                return Err(Error::DuplicateArc { from: label(&a.from), to: label(&a.to) });
            }
            arcs.push((i, j));
        }
        Self::from_parts(vertices, edges, arcs, raw.meta.clone())
    }

    /// Build from already-indexed parts, checking every invariant.
    pub fn from_parts(
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
        arcs: Vec<(usize, usize)>,
        meta: Option<serde_json::Value>,
    ) -> Result<Self> {
        let n = vertices.len();
        if n > MAX_VERTICES {
            return Err(Error::InstanceTooLarge(format!("{n} vertices; at most {MAX_VERTICES} are supported")));
        }
        let mut adjacency = vec![VertexSet::EMPTY; n];
        let mut incident = vec![EdgeSet::with_capacity(edges.len()); n];
        let mut edge_index = HashMap::new();
        for (k, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(Error::UnknownVertex(format!("#{}", e.u.max(e.v))));
            }
            if e.u == e.v {
                return Err(Error::SelfLoop(vertices[e.u].label.clone()));
            }
            if e.u > e.v {
                return Err(Error::DuplicateEdge(format!("edge #{k} is not stored with u < v")));
            }
            if edge_index.insert((e.u, e.v), k).is_some() {
                return Err(Error::DuplicateEdge(format!("{{{},{}}}", vertices[e.u].label, vertices[e.v].label)));
            }
            adjacency[e.u].insert(e.v);
            adjacency[e.v].insert(e.u);
            incident[e.u].insert(k);
            incident[e.v].insert(k);
        }
        let inst = SystemInstance { vertices, edges, arcs, adjacency, incident, edge_index, meta };
        for v in &inst.vertices {
            check_positive(v.cost, "part cost", || v.label.clone())?;
            check_positive(v.rate, "failure rate", || v.label.clone())?;
        }
        for e in &inst.edges {
            check_positive(e.w, "edge weight", || inst.edge_label(inst.edge_index[&(e.u, e.v)]))?;
        }
        let mut seen = HashSet::new();
        for &(i, j) in &inst.arcs {
            if i >= inst.edges.len() || j >= inst.edges.len() {
                return Err(Error::UnknownEdge(format!("#{}", i.max(j))));
            }
            if inst.edges[i].shared_vertex(&inst.edges[j]).is_none() {
                return Err(Error::NonAdjacentArc { from: inst.edge_label(i), to: inst.edge_label(j) });
            }
            if !seen.insert((i, j)) {
                return Err(Error::DuplicateArc { from: inst.edge_label(i), to: inst.edge_label(j) });
            }
        }
        inst.topological_order()?;
        Ok(inst)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawInstance = serde_json::from_str(s)?;
        Self::validate(&raw)
    }

    pub fn to_raw(&self) -> RawInstance {
        let pair = |e: usize| {
            let ed = &self.edges[e];
            [self.vertices[ed.u].label.clone(), self.vertices[ed.v].label.clone()]
        };
        RawInstance {
            vertices: self
                .vertices
                .iter()
                .map(|v| RawVertex { id: v.label.clone(), cost: v.cost, rate: v.rate, name: v.name.clone() })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| RawEdge { u: self.vertices[e.u].label.clone(), v: self.vertices[e.v].label.clone(), w: e.w })
                .collect(),
            arcs: self.arcs.iter().map(|&(i, j)| RawArc { from: pair(i), to: pair(j) }).collect(),
            meta: self.meta.clone(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("instance serialises")
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Vertex {
        &self.vertices[v]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn meta(&self) -> Option<&serde_json::Value> {
        self.meta.as_ref()
    }

    pub fn with_meta(mut self, meta: Option<serde_json::Value>) -> Self {
        self.meta = meta;
        self
    }

    pub fn all_vertices(&self) -> VertexSet {
        VertexSet::full(self.num_vertices())
    }

    pub fn neighbors(&self, v: usize) -> VertexSet {
        self.adjacency[v]
    }

    pub fn incident_edges(&self, v: usize) -> &EdgeSet {
        &self.incident[v]
    }

    pub fn vertex_index(&self, label: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.label == label)
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    /// Edge index for a pair of vertex labels.
    pub fn edge_by_labels(&self, a: &str, b: &str) -> Option<usize> {
        self.edge_between(self.vertex_index(a)?, self.vertex_index(b)?)
    }

    pub fn edge_label(&self, e: usize) -> String {
        let ed = &self.edges[e];
        format!("{{{},{}}}", self.vertices[ed.u].label, self.vertices[ed.v].label)
    }

    pub fn edge_pair_labels(&self, e: usize) -> [String; 2] {
        let ed = &self.edges[e];
        [self.vertices[ed.u].label.clone(), self.vertices[ed.v].label.clone()]
    }

    pub fn set_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<VertexSet> {
        let mut s = VertexSet::EMPTY;
        for l in labels {
            let v = self.vertex_index(l.as_ref()).ok_or_else(|| Error::UnknownVertex(l.as_ref().to_string()))?;
            s.insert(v);
        }
        Ok(s)
    }

    pub fn labels_of(&self, q: VertexSet) -> Vec<String> {
        q.iter().map(|v| self.vertices[v].label.clone()).collect()
    }

    pub fn rate_of(&self, q: VertexSet) -> f64 {
        q.iter().map(|v| self.vertices[v].rate).sum()
    }

    pub fn cost_of(&self, q: VertexSet) -> f64 {
        q.iter().map(|v| self.vertices[v].cost).sum()
    }

    pub fn weight_of(&self, edges: &EdgeSet) -> f64 {
        edges.ones().map(|e| self.edges[e].w).sum()
    }

    /// Whether `q` induces a connected subgraph of G. The empty set is not connected.
    pub fn is_connected_set(&self, q: VertexSet) -> bool {
        match q.first() {
            None => false,
            Some(s) => self.reach_within(VertexSet::singleton(s), q) == q,
        }
    }

    /// Vertices of `within` reachable from `from` using only vertices of `within`.
    pub fn reach_within(&self, from: VertexSet, within: VertexSet) -> VertexSet {
        let mut seen = from.intersection(within);
        let mut frontier = seen;
        while !frontier.is_empty() {
            let mut next = VertexSet::EMPTY;
            for v in frontier.iter() {
                next = next.union(self.adjacency[v]);
            }
            next = next.intersection(within).difference(seen);
            seen = seen.union(next);
            frontier = next;
        }
        seen
    }

    /// Connected components of the subgraph induced by `q`, ordered by
    /// smallest member.
    pub fn components_of(&self, q: VertexSet) -> Vec<VertexSet> {
        let mut rest = q;
        let mut out = Vec::new();
        while let Some(s) = rest.first() {
            let c = self.reach_within(VertexSet::singleton(s), rest);
            out.push(c);
            rest = rest.difference(c);
        }
        out
    }

    /// Kahn topological order of D (arc i -> j puts i before j).
    fn topological_order(&self) -> Result<Vec<usize>> {
        let m = self.edges.len();
        let mut indeg = vec![0usize; m];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); m];
        for &(i, j) in &self.arcs {
            out[i].push(j);
            indeg[j] += 1;
        }
        let mut stack: Vec<usize> = (0..m).rev().filter(|&e| indeg[e] == 0).collect();
        let mut order = Vec::with_capacity(m);
        while let Some(e) = stack.pop() {
            order.push(e);
            for &z in &out[e] {
                indeg[z] -= 1;
                if indeg[z] == 0 {
                    stack.push(z);
                }
            }
        }
        if order.len() < m {
            let bad = (0..m).find(|&e| indeg[e] > 0).expect("some edge stays on a cycle");
            return Err(Error::CyclicPrecedence(self.edge_label(bad)));
        }
        Ok(order)
    }

    /// Split G into connected components, each with its induced precedence arcs.
    pub fn connected_components(&self) -> Vec<Component> {
        let comps = self.components_of(self.all_vertices());
        if comps.len() == 1 {
            return vec![Component { instance: self.clone(), vertex_map: (0..self.num_vertices()).collect() }];
        }
        comps
            .into_iter()
            .map(|c| {
                let vertex_map: Vec<usize> = c.iter().collect();
                let mut local = vec![usize::MAX; self.num_vertices()];
                for (i, &v) in vertex_map.iter().enumerate() {
                    local[v] = i;
                }
                let vertices = vertex_map.iter().map(|&v| self.vertices[v].clone()).collect();
                let mut edge_map = vec![usize::MAX; self.edges.len()];
                let mut edges = Vec::new();
                for (k, e) in self.edges.iter().enumerate() {
                    if c.contains(e.u) {
                        edge_map[k] = edges.len();
                        edges.push(Edge { u: local[e.u], v: local[e.v], w: e.w });
                    }
                }
                let arcs = self
                    .arcs
                    .iter()
                    .filter(|&&(i, _)| edge_map[i] != usize::MAX)
                    .map(|&(i, j)| (edge_map[i], edge_map[j]))
                    .collect();
                let instance = SystemInstance::from_parts(vertices, edges, arcs, self.meta.clone())
                    .expect("a component of a valid instance is valid");
                Component { instance, vertex_map }
            })
            .collect()
    }

    /// B(Q): edges with exactly one endpoint in `q`.
    pub fn boundary_edges(&self, q: VertexSet) -> Result<EdgeSet> {
        if q.is_empty() {
            return Err(Error::EmptyLru);
        }
        Ok(self.boundary_unchecked(q))
    }

    pub(crate) fn boundary_unchecked(&self, q: VertexSet) -> EdgeSet {
        let mut b = EdgeSet::with_capacity(self.edges.len());
        for v in q.iter() {
            b.symmetric_difference_with(&self.incident[v]);
        }
        b
    }
}

/// A connected component together with the original index of each of its vertices.
#[derive(Debug, Clone)]
pub struct Component {
    pub instance: SystemInstance,
    pub vertex_map: Vec<usize>,
}

impl Component {
    pub fn lift(&self, q: VertexSet) -> VertexSet {
        q.iter().map(|v| self.vertex_map[v]).collect()
    }
}

/// H(e) for every edge: `e` plus every edge reachable from `e` in D.
#[derive(Debug, Clone)]
pub struct SuccessorSets {
    h: Vec<EdgeSet>,
}

impl SuccessorSets {
    pub fn compute(inst: &SystemInstance) -> Self {
        let m = inst.num_edges();
        let order = inst.topological_order().expect("validated instances are acyclic");
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); m];
        for &(i, j) in inst.arcs() {
            succ[i].push(j);
        }
        let mut h = vec![EdgeSet::with_capacity(m); m];
        for &e in order.iter().rev() {
            let mut s = EdgeSet::with_capacity(m);
            s.insert(e);
            for &z in &succ[e] {
                s.union_with(&h[z]);
            }
            h[e] = s;
        }
        SuccessorSets { h }
    }

    pub fn get(&self, e: usize) -> &EdgeSet {
        &self.h[e]
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Γ(Q): union of H(e) over the boundary edges of `q`.
    pub fn removal_set(&self, inst: &SystemInstance, q: VertexSet) -> Result<EdgeSet> {
        let b = inst.boundary_edges(q)?;
        Ok(self.closure_of(&b))
    }

    /// Union of H(e) over `edges`.
    pub fn closure_of(&self, edges: &EdgeSet) -> EdgeSet {
        let mut g = EdgeSet::with_capacity(self.h.len());
        for e in edges.ones() {
            g.union_with(&self.h[e]);
        }
        g
    }
}
