//! Network generators: interval, star, hexagonal lattice, random lines.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Edge, MetricNetwork, Node};
use crate::error::{invalid, Error, Result};

/// Two Kirchhoff nodes joined by one edge (tail = node 0, head = node 1).
pub fn build_interval(length: f64) -> Result<MetricNetwork> {
    if !(length.is_finite() && length > 0.0) {
        return Err(invalid(format!("interval length must be positive, got {length}")));
    }
    MetricNetwork::new(
        vec![Node::at(0, 0.0, 0.0), Node::at(1, length, 0.0)],
        vec![Edge::new(0, 0, 1, length)],
    )
}

/// Star with `num_edges` leaves. Leaves are nodes `0..num_edges`, the hub is
/// node `num_edges`; edge `i` runs from leaf `i` (x = 0) to the hub (x = l).
pub fn build_star(num_edges: usize, length: f64) -> Result<MetricNetwork> {
    if num_edges < 1 {
        return Err(invalid("a star needs at least one edge"));
    }
    build_star_with_lengths(&vec![length; num_edges])
}

pub fn build_star_with_lengths(lengths: &[f64]) -> Result<MetricNetwork> {
    if lengths.is_empty() {
        return Err(invalid("a star needs at least one edge"));
    }
    if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(invalid(format!("star edge length must be positive, got {l}")));
    }
    let m = lengths.len();
    let mut nodes: Vec<Node> = lengths
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let angle = std::f64::consts::TAU * i as f64 / m as f64;
            Node::at(i, l * angle.cos(), l * angle.sin())
        })
        .collect();
    nodes.push(Node::at(m, 0.0, 0.0));
    let edges = lengths
        .iter()
        .enumerate()
        .map(|(i, &l)| Edge::new(i, i, m, l))
        .collect();
    MetricNetwork::new(nodes, edges)
}

/// Hexagonal lattice of `rows x cols` unit-edge hexagons.
///
/// The layout is the "brick" arrangement: columns of nodes `i in 0..=cols`,
/// each with `2 rows + 2` nodes, joined vertically within a column and
/// horizontally where `i` and `j` have equal parity, minus the two dangling
/// corner nodes. With `rows = 5` and `cols in {8, 12, 16, 32, ..., 512}` this
/// yields `(N, M) = (106, 145), (154, 213), (202, 281), ..., (6154, 8713)`.
pub fn build_hexagonal_lattice(rows: usize, cols: usize) -> Result<MetricNetwork> {
    if rows < 1 || cols < 1 {
        return Err(invalid(format!("hexagonal lattice needs rows, cols >= 1 (got {rows} x {cols})")));
    }
    let height = 2 * rows + 2;
    let removed = [(0, height - 1), (cols, (height - 1) * (cols % 2))];
    let mut ids = BTreeMap::new();
    let mut nodes = Vec::new();
    let h = 3f64.sqrt() / 2.0;
    for i in 0..=cols {
        for j in 0..height {
            if removed.contains(&(i, j)) {
                continue;
            }
            let x = 0.5 + i as f64 + (i / 2) as f64 + (j % 2) as f64 * ((i % 2) as f64 - 0.5);
            let y = h * j as f64;
            ids.insert((i, j), nodes.len());
            nodes.push(Node::at(nodes.len(), x, y));
        }
    }
    let mut edges = Vec::new();
    let mut push = |a: (usize, usize), b: (usize, usize)| {
        if let (Some(&u), Some(&v)) = (ids.get(&a), ids.get(&b)) {
            let id = edges.len();
            edges.push(Edge::new(id, u, v, 1.0));
        }
    };
    for i in 0..=cols {
        for j in 0..height - 1 {
            push((i, j), (i, j + 1));
        }
    }
    for i in 0..cols {
        for j in (0..height).filter(|j| i % 2 == j % 2) {
            push((i, j), (i + 1, j));
        }
    }
    MetricNetwork::new(nodes, edges)
}

/// A needle: straight segment from `a` to `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Segment {
    fn length(&self) -> f64 {
        (self.b[0] - self.a[0]).hypot(self.b[1] - self.a[1])
    }

    fn point(&self, t: f64) -> [f64; 2] {
        [
            self.a[0] + t * (self.b[0] - self.a[0]),
            self.a[1] + t * (self.b[1] - self.a[1]),
        ]
    }

    /// Parameters `(s, t)` of a proper crossing with `other`, if any.
    fn crossing(&self, other: &Segment) -> Option<(f64, f64)> {
        let r = [self.b[0] - self.a[0], self.b[1] - self.a[1]];
        let q = [other.b[0] - other.a[0], other.b[1] - other.a[1]];
        let denom = r[0] * q[1] - r[1] * q[0];
        if denom.abs() < 1e-14 * (r[0].hypot(r[1]) * q[0].hypot(q[1])) {
            return None;
        }
        let d = [other.a[0] - self.a[0], other.a[1] - self.a[1]];
        let s = (d[0] * q[1] - d[1] * q[0]) / denom;
        let t = (d[0] * r[1] - d[1] * r[0]) / denom;
        ((0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t)).then_some((s, t))
    }
}

/// Random-line network: `num_needles` needles of length `needle_length` with
/// uniform centers in the unit square and uniform orientations.
///
/// Nodes are the pairwise crossings; edges are needle pieces between
/// consecutive crossings (dangling needle ends are dropped) and only the
/// largest connected component is kept. Deterministic for a given seed.
pub fn build_random_line_network(num_needles: usize, needle_length: f64, seed: u64) -> Result<MetricNetwork> {
    if num_needles < 2 {
        return Err(invalid(format!("need at least two needles, got {num_needles}")));
    }
    if !(needle_length.is_finite() && needle_length > 0.0) {
        return Err(invalid(format!("needle length must be positive, got {needle_length}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let segments: Vec<Segment> = (0..num_needles)
        .map(|_| {
            let cx: f64 = rng.random();
            let cy: f64 = rng.random();
            let theta = rng.random::<f64>() * std::f64::consts::PI;
            let (dx, dy) = (0.5 * needle_length * theta.cos(), 0.5 * needle_length * theta.sin());
            Segment {
                a: [cx - dx, cy - dy],
                b: [cx + dx, cy + dy],
            }
        })
        .collect();
    random_line_network_from_segments(&segments)
}

pub fn random_line_network_from_segments(segments: &[Segment]) -> Result<MetricNetwork> {
    // crossings[i] = (parameter along needle i, crossing index)
    let mut crossings: Vec<Vec<(f64, usize)>> = vec![Vec::new(); segments.len()];
    let mut points = Vec::new();
    for i in 0..segments.len() {
        for j in i + 1..segments.len() {
            if let Some((s, t)) = segments[i].crossing(&segments[j]) {
                let c = points.len();
                points.push(segments[i].point(s));
                crossings[i].push((s, c));
                crossings[j].push((t, c));
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    // (tail crossing, head crossing, length)
    let mut pieces = Vec::new();
    for (i, list) in crossings.iter_mut().enumerate() {
        list.sort_by(|a, b| a.0.total_cmp(&b.0));
        let len = segments[i].length();
        for w in list.windows(2) {
            pieces.push((w[0].1, w[1].1, (w[1].0 - w[0].0) * len));
        }
    }
    if pieces.is_empty() {
        return Err(Error::EmptyNetwork);
    }

    let mut parent: Vec<usize> = (0..points.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(u, v, _) in &pieces {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
        }
    }
    let mut edge_count: BTreeMap<usize, usize> = BTreeMap::new();
    for &(u, _, _) in &pieces {
        *edge_count.entry(find(&mut parent, u)).or_default() += 1;
    }
    // largest by edges; ties go to the component containing the earliest crossing
    let mut best: Option<(usize, usize)> = None;
    for c in 0..points.len() {
        let root = find(&mut parent, c);
        let size = edge_count.get(&root).copied().unwrap_or(0);
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((root, size));
        }
    }
    let (root, _) = best.expect("at least one crossing");

    let mut renumber = BTreeMap::new();
    let mut nodes = Vec::new();
    for c in 0..points.len() {
        if find(&mut parent, c) == root {
            renumber.insert(c, nodes.len());
            nodes.push(Node::at(nodes.len(), points[c][0], points[c][1]));
        }
    }
    let edges = pieces
        .iter()
        .filter(|(u, _, _)| renumber.contains_key(u))
        .enumerate()
        .map(|(id, &(u, v, l))| Edge::new(id, renumber[&u], renumber[&v], l))
        .collect();
    MetricNetwork::new(nodes, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_counts() {
        let net = build_interval(1.0).unwrap();
        assert_eq!((net.node_count(), net.edge_count()), (2, 1));
        assert_eq!(net.total_length(), 1.0);
        assert_eq!(build_interval(2.0).unwrap().total_length(), 2.0);
        assert!(build_interval(0.0).is_err());
        assert!(build_interval(-1.0).is_err());
    }

    #[test]
    fn star_counts() {
        let s3 = build_star(3, 1.0).unwrap();
        assert_eq!((s3.node_count(), s3.edge_count()), (4, 3));
        assert_eq!(s3.degrees()[3], 3);
        assert_eq!(s3.total_length(), 3.0);
        let s4 = build_star(4, 1.0).unwrap();
        assert_eq!((s4.node_count(), s4.edge_count()), (5, 4));
        assert!(build_star(0, 1.0).is_err());
    }

    #[test]
    fn one_edge_star_is_an_interval() {
        let s = build_star(1, 1.0).unwrap();
        let i = build_interval(1.0).unwrap();
        assert_eq!(s.node_count(), i.node_count());
        assert_eq!(s.edges()[0].length, i.edges()[0].length);
        assert_eq!(s.degrees(), i.degrees());
    }

    #[test]
    fn hexagonal_sizes_match_reference_list() {
        let single = build_hexagonal_lattice(1, 1).unwrap();
        assert_eq!((single.node_count(), single.edge_count()), (6, 6));
        for (cols, n, m) in [(8, 106, 145), (12, 154, 213), (16, 202, 281), (32, 394, 553)] {
            let net = build_hexagonal_lattice(5, cols).unwrap();
            assert_eq!((net.node_count(), net.edge_count()), (n, m), "cols = {cols}");
            assert_eq!(net.total_length(), m as f64);
        }
        assert!(build_hexagonal_lattice(0, 3).is_err());
    }

    #[test]
    fn hexagonal_embedding_has_unit_edges() {
        let net = build_hexagonal_lattice(3, 4).unwrap();
        for e in net.edges() {
            let a = net.nodes()[net.node_position(e.tail).unwrap()].position.unwrap();
            let b = net.nodes()[net.node_position(e.head).unwrap()].position.unwrap();
            assert!(((a[0] - b[0]).hypot(a[1] - b[1]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn parallel_needles_give_an_empty_network() {
        let segs = [
            Segment { a: [0.0, 0.2], b: [1.0, 0.2] },
            Segment { a: [0.0, 0.6], b: [1.0, 0.6] },
        ];
        assert!(matches!(random_line_network_from_segments(&segs), Err(Error::EmptyNetwork)));
    }

    #[test]
    fn hash_pattern_of_needles() {
        // two horizontal, two vertical: a single square with 4 crossings
        let segs = [
            Segment { a: [0.0, 0.25], b: [1.0, 0.25] },
            Segment { a: [0.0, 0.75], b: [1.0, 0.75] },
            Segment { a: [0.25, 0.0], b: [0.25, 1.0] },
            Segment { a: [0.75, 0.0], b: [0.75, 1.0] },
        ];
        let net = random_line_network_from_segments(&segs).unwrap();
        assert_eq!((net.node_count(), net.edge_count()), (4, 4));
        assert!((net.total_length() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn random_lines_are_deterministic() {
        let a = build_random_line_network(3, 1.0, 11).unwrap();
        let b = build_random_line_network(3, 1.0, 11).unwrap();
        assert_eq!(a, b);
        assert!(build_random_line_network(1, 1.0, 0).is_err());
    }
}
