//! Metric-network data model and its JSON form.

pub mod function;
pub mod generators;

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generators::{
    build_hexagonal_lattice, build_interval, build_random_line_network, build_star,
    random_line_network_from_segments, Segment,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    #[default]
    Kirchhoff,
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    pub position: Option<[f64; 2]>,
    pub bc: BoundaryCondition,
}

impl Node {
    pub fn new(id: usize) -> Self {
        Self {
            id,
            position: None,
            bc: BoundaryCondition::Kirchhoff,
        }
    }

    pub fn at(id: usize, x: f64, y: f64) -> Self {
        Self {
            id,
            position: Some([x, y]),
            bc: BoundaryCondition::Kirchhoff,
        }
    }
}

/// An edge parameterized by `x in [0, length]`; `x = 0` sits at `tail`,
/// `x = length` at `head`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
    pub length: f64,
    /// Carried through I/O only; no solver reads it.
    pub weight: Option<f64>,
}

impl Edge {
    pub fn new(id: usize, tail: usize, head: usize, length: f64) -> Self {
        Self {
            id,
            tail,
            head,
            length,
            weight: None,
        }
    }

    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum End {
    Tail,
    Head,
}

/// One endpoint of an edge, as seen from the node it attaches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeEnd {
    /// Position of the edge in [`MetricNetwork::edges`].
    pub edge: usize,
    pub end: End,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricNetwork {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    node_index: HashMap<usize, usize>,
}

impl MetricNetwork {
    /// Validates and builds a network. Node and edge ids must be unique,
    /// lengths finite and positive, endpoints must exist and the network
    /// must be connected.
    pub fn new(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self> {
        if nodes.is_empty() || edges.is_empty() {
            return Err(Error::InvalidNetwork("a network needs at least one edge".into()));
        }
        let mut node_index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if node_index.insert(n.id, i).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate node id {}", n.id)));
            }
            if let Some([x, y]) = n.position {
                if !x.is_finite() || !y.is_finite() {
                    return Err(Error::InvalidNetwork(format!("node {} has a non-finite position", n.id)));
                }
            }
        }
        let mut edge_ids = std::collections::HashSet::with_capacity(edges.len());
        for e in &edges {
            if !edge_ids.insert(e.id) {
                return Err(Error::InvalidNetwork(format!("duplicate edge id {}", e.id)));
            }
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(Error::InvalidNetwork(format!(
                    "edge {} has length {}, expected 0 < length < inf",
                    e.id, e.length
                )));
            }
            if let Some(w) = e.weight {
                if !(w.is_finite() && w > 0.0) {
                    return Err(Error::InvalidNetwork(format!("edge {} has weight {w}", e.id)));
                }
            }
            for end in [e.tail, e.head] {
                if !node_index.contains_key(&end) {
                    return Err(Error::InvalidNetwork(format!(
                        "edge {} references missing node {end}",
                        e.id
                    )));
                }
            }
        }
        let net = Self {
            nodes,
            edges,
            node_index,
        };
        let components = net.component_count();
        if components != 1 {
            return Err(Error::InvalidNetwork(format!(
                "network has {components} connected components (isolated nodes included)"
            )));
        }
        Ok(net)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Position of the node with the given id in [`Self::nodes`].
    pub fn node_position(&self, id: usize) -> Option<usize> {
        self.node_index.get(&id).copied()
    }

    pub fn edge_position(&self, id: usize) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for e in &self.edges {
            deg[self.node_index[&e.tail]] += 1;
            deg[self.node_index[&e.head]] += 1;
        }
        deg
    }

    pub fn is_all_kirchhoff(&self) -> bool {
        self.nodes.iter().all(|n| n.bc == BoundaryCondition::Kirchhoff)
    }

    pub fn kirchhoff_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.bc == BoundaryCondition::Kirchhoff).count()
    }

    /// Incident edge ends for every node (indexed like [`Self::nodes`]),
    /// ordered by edge id with the tail of a loop before its head.
    pub fn incident_ends(&self) -> Vec<Vec<EdgeEnd>> {
        let mut ends = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            ends[self.node_index[&e.tail]].push(EdgeEnd { edge: i, end: End::Tail });
            ends[self.node_index[&e.head]].push(EdgeEnd { edge: i, end: End::Head });
        }
        for list in &mut ends {
            list.sort_by_key(|ee| (self.edges[ee.edge].id, ee.end == End::Head));
        }
        ends
    }

    /// Node positions (in `nodes()`) of an edge's tail and head.
    pub fn endpoints(&self, edge: usize) -> (usize, usize) {
        let e = &self.edges[edge];
        (self.node_index[&e.tail], self.node_index[&e.head])
    }

    pub fn with_boundary_condition(mut self, node_id: usize, bc: BoundaryCondition) -> Result<Self> {
        let i = self
            .node_position(node_id)
            .ok_or_else(|| Error::InvalidParameter(format!("no node with id {node_id}")))?;
        self.nodes[i].bc = bc;
        Ok(self)
    }

    pub fn with_all_boundary_conditions(mut self, bc: BoundaryCondition) -> Self {
        for n in &mut self.nodes {
            n.bc = bc;
        }
        self
    }

    /// Inserts a degree-2 Kirchhoff node at `fraction * length` along an edge.
    /// The original edge keeps its id and tail; the new piece gets a fresh id.
    pub fn split_edge(&self, edge_id: usize, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::InvalidParameter(format!("split fraction {fraction} not in (0, 1)")));
        }
        let pos = self
            .edge_position(edge_id)
            .ok_or_else(|| Error::InvalidParameter(format!("no edge with id {edge_id}")))?;
        let new_node = self.nodes.iter().map(|n| n.id).max().unwrap_or(0) + 1;
        let new_edge = self.edges.iter().map(|e| e.id).max().unwrap_or(0) + 1;
        let old = self.edges[pos].clone();
        let mut nodes = self.nodes.clone();
        let position = match (self.position_of(old.tail), self.position_of(old.head)) {
            (Some(a), Some(b)) => Some([a[0] + fraction * (b[0] - a[0]), a[1] + fraction * (b[1] - a[1])]),
            _ => None,
        };
        nodes.push(Node {
            id: new_node,
            position,
            bc: BoundaryCondition::Kirchhoff,
        });
        let mut edges = self.edges.clone();
        edges[pos] = Edge {
            head: new_node,
            length: old.length * fraction,
            ..old.clone()
        };
        edges.push(Edge {
            id: new_edge,
            tail: new_node,
            head: old.head,
            length: old.length * (1.0 - fraction),
            weight: old.weight,
        });
        Self::new(nodes, edges)
    }

    fn position_of(&self, node_id: usize) -> Option<[f64; 2]> {
        self.node_position(node_id).and_then(|i| self.nodes[i].position)
    }

    fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.nodes.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let a = find(&mut parent, self.node_index[&e.tail]);
            let b = find(&mut parent, self.node_index[&e.head]);
            if a != b {
                parent[a] = b;
            }
        }
        (0..self.nodes.len()).filter(|&i| find(&mut parent, i) == i).count()
    }

    pub fn to_json(&self) -> String {
        let file = NetworkFile {
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    id: n.id,
                    bc: n.bc,
                    x: n.position.map(|p| p[0]),
                    y: n.position.map(|p| p[1]),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    id: e.id,
                    tail: e.tail,
                    head: e.head,
                    length: e.length,
                    weight: e.weight,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("network serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(text)?;
        let nodes = file
            .nodes
            .into_iter()
            .map(|r| {
                let position = match (r.x, r.y) {
                    (Some(x), Some(y)) => Ok(Some([x, y])),
                    (None, None) => Ok(None),
                    _ => Err(Error::Parse(format!("node {} has only one coordinate", r.id))),
                }?;
                Ok(Node {
                    id: r.id,
                    position,
                    bc: r.bc,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let edges = file
            .edges
            .into_iter()
            .map(|r| Edge {
                id: r.id,
                tail: r.tail,
                head: r.head,
                length: r.length,
                weight: r.weight,
            })
            .collect();
        Self::new(nodes, edges)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: usize,
    #[serde(default)]
    bc: BoundaryCondition,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    y: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    id: usize,
    tail: usize,
    head: usize,
    length: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    weight: Option<f64>,
}
