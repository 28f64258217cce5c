//! Two-dimensional simplicial meshes refined by newest-vertex bisection.
//!
//! Every triangle stores its vertices as `[v0, v1, v2]` where `(v0, v1)` is the
//! refinement edge and `v2` is the newest vertex. Bisection never deletes an
//! element: the parent is kept in the forest and flagged as dead, so the leaf
//! set is the current triangulation while the full history stays auditable.
//!
//! Refinement is split in two phases. [`Mesh::refine`] bisects each marked leaf
//! exactly once and may leave hanging nodes; [`Mesh::complete`] removes them by
//! further bisections only.

pub mod io;
pub mod presets;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::Point;

pub use presets::{initial_mesh, DomainPreset};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vertex {
    pub x: f64,
    pub y: f64,
}

impl Vertex {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn point(&self) -> Point {
        [self.x, self.y]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Triangle {
    /// `(v[0], v[1])` is the refinement edge, `v[2]` the newest vertex.
    pub v: [usize; 3],
    pub generation: u32,
    /// `true` for leaves, `false` once bisected.
    pub alive: bool,
    pub parent: Option<usize>,
    pub children: Option<[usize; 2]>,
}

impl Triangle {
    fn root(v: [usize; 3]) -> Self {
        Self {
            v,
            generation: 0,
            alive: true,
            parent: None,
            children: None,
        }
    }

    /// The three edges, refinement edge first.
    pub fn edges(&self) -> [EdgeKey; 3] {
        let [a, b, c] = self.v;
        [EdgeKey::new(a, b), EdgeKey::new(b, c), EdgeKey::new(c, a)]
    }

    pub fn refinement_edge(&self) -> EdgeKey {
        EdgeKey::new(self.v[0], self.v[1])
    }
}

/// Undirected edge, stored as `(min, max)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey(pub usize, pub usize);

impl EdgeKey {
    pub fn new(a: usize, b: usize) -> Self {
        if a < b {
            EdgeKey(a, b)
        } else {
            EdgeKey(b, a)
        }
    }
}

/// Leaves selected for one bisection each.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MarkSet(BTreeSet<usize>);

impl MarkSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, element: usize) -> bool {
        self.0.insert(element)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<usize> for MarkSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        MarkSet(iter.into_iter().collect())
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Vertex>,
    triangles: Vec<Triangle>,
    /// Leaf triangles incident to each edge of the leaf set.
    edge_map: HashMap<EdgeKey, Vec<usize>>,
    /// Midpoint vertex of every edge that has been bisected.
    midpoints: HashMap<EdgeKey, usize>,
    /// Edges (at any level) lying on the domain boundary.
    boundary: HashSet<EdgeKey>,
    leaf_count: usize,
    initial_count: usize,
    initial_vertex_count: usize,
}

pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

/// Smallest interior angle of a triangle, in radians.
pub fn min_triangle_angle(p: [Point; 3]) -> f64 {
    (0..3)
        .map(|i| {
            let a = p[i];
            let b = p[(i + 1) % 3];
            let c = p[(i + 2) % 3];
            let u = [b[0] - a[0], b[1] - a[1]];
            let w = [c[0] - a[0], c[1] - a[1]];
            let cross = u[0] * w[1] - u[1] * w[0];
            let dot = u[0] * w[0] + u[1] * w[1];
            cross.abs().atan2(dot)
        })
        .fold(f64::INFINITY, f64::min)
}

impl Mesh {
    /// Builds an initial (generation 0) mesh.
    ///
    /// The triangulation must be conforming and its refinement-edge flags
    /// compatible: an interior refinement edge is the refinement edge of both
    /// adjacent triangles. Clockwise triangles are reoriented by swapping
    /// `v0` and `v1`, which keeps the refinement edge.
    pub fn new(vertices: Vec<Vertex>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        for (i, v) in vertices.iter().enumerate() {
            if !(v.x.is_finite() && v.y.is_finite()) {
                return Err(Error::NonFiniteVertex(i));
            }
        }
        let mut tris = Vec::with_capacity(triangles.len());
        for (t, mut v) in triangles.into_iter().enumerate() {
            for &i in &v {
                if i >= vertices.len() {
                    return Err(Error::VertexOutOfRange {
                        triangle: t,
                        vertex: i,
                        count: vertices.len(),
                    });
                }
            }
            if v[0] == v[1] || v[1] == v[2] || v[0] == v[2] {
                return Err(Error::DegenerateTriangle(t));
            }
            let area = signed_area(
                vertices[v[0]].point(),
                vertices[v[1]].point(),
                vertices[v[2]].point(),
            );
            if area == 0.0 || !area.is_finite() {
                return Err(Error::DegenerateTriangle(t));
            }
            if area < 0.0 {
                v.swap(0, 1);
            }
            tris.push(Triangle::root(v));
        }
        if tris.is_empty() {
            return Err(Error::InvalidParameter("mesh has no triangles".into()));
        }

        let mut edge_map: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
        for (t, tri) in tris.iter().enumerate() {
            for e in tri.edges() {
                edge_map.entry(e).or_default().push(t);
            }
        }
        let mut boundary = HashSet::new();
        for (e, ts) in &edge_map {
            match ts.len() {
                1 => {
                    boundary.insert(*e);
                }
                2 => {}
                _ => return Err(Error::NotConforming),
            }
        }
        // A vertex strictly inside a boundary edge is a hanging node.
        for e in &boundary {
            let a = vertices[e.0].point();
            let b = vertices[e.1].point();
            let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
            for (i, v) in vertices.iter().enumerate() {
                if i == e.0 || i == e.1 {
                    continue;
                }
                let p = v.point();
                let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                if cross.abs() > 1e-12 * len2 {
                    continue;
                }
                let s = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / len2;
                if s > 1e-12 && s < 1.0 - 1e-12 {
                    return Err(Error::NotConforming);
                }
            }
        }

        let n = tris.len();
        let mesh = Mesh {
            initial_vertex_count: vertices.len(),
            vertices,
            triangles: tris,
            edge_map,
            midpoints: HashMap::new(),
            boundary,
            leaf_count: n,
            initial_count: n,
        };
        if let Some(e) = mesh.incompatible_edge() {
            return Err(Error::IncompatibleFlags(e.0, e.1));
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// All triangles of the forest, dead parents included.
    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn triangle(&self, id: usize) -> Option<&Triangle> {
        self.triangles.get(id)
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    /// Number of elements of the initial mesh.
    pub fn initial_count(&self) -> usize {
        self.initial_count
    }

    pub fn initial_vertex_count(&self) -> usize {
        self.initial_vertex_count
    }

    /// Leaf ids in increasing order.
    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        self.triangles
            .iter()
            .enumerate()
            .filter(|(_, t)| t.alive)
            .map(|(i, _)| i)
    }

    pub fn leaf_ids(&self) -> Vec<usize> {
        self.leaves().collect()
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        self.triangles.get(id).is_some_and(|t| t.alive)
    }

    pub fn corners(&self, id: usize) -> [Point; 3] {
        let v = self.triangles[id].v;
        [
            self.vertices[v[0]].point(),
            self.vertices[v[1]].point(),
            self.vertices[v[2]].point(),
        ]
    }

    pub fn area(&self, id: usize) -> f64 {
        let [a, b, c] = self.corners(id);
        signed_area(a, b, c).abs()
    }

    /// `h_T = |T|^{1/2}`.
    pub fn element_size(&self, id: usize) -> f64 {
        self.area(id).sqrt()
    }

    /// Sum of leaf areas.
    pub fn total_area(&self) -> f64 {
        self.leaves().map(|t| self.area(t)).sum()
    }

    /// Area of the domain, summed over the initial elements.
    pub fn domain_area(&self) -> f64 {
        (0..self.initial_count).map(|t| self.area(t)).sum()
    }

    pub fn max_initial_area(&self) -> f64 {
        (0..self.initial_count)
            .map(|t| self.area(t))
            .fold(0.0, f64::max)
    }

    /// Minimum interior angle over the leaves.
    pub fn min_angle(&self) -> f64 {
        self.leaves()
            .map(|t| min_triangle_angle(self.corners(t)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimum angle over all NVB descendants of the initial elements up to
    /// generation 2. NVB produces finitely many similarity classes and this
    /// minimum bounds every later generation.
    pub fn similarity_class_min_angle(&self) -> f64 {
        let mut min = f64::INFINITY;
        for t in 0..self.initial_count {
            let mut level = vec![self.corners(t)];
            for _ in 0..=2 {
                let mut next = Vec::with_capacity(level.len() * 2);
                for p in level {
                    min = min.min(min_triangle_angle(p));
                    let m = [0.5 * (p[0][0] + p[1][0]), 0.5 * (p[0][1] + p[1][1])];
                    next.push([p[2], p[0], m]);
                    next.push([p[1], p[2], m]);
                }
                level = next;
            }
        }
        min
    }

    /// Bisects a leaf along its refinement edge.
    ///
    /// With parent `[v0, v1, v2]` and `m` the midpoint of `(v0, v1)`, the
    /// children are `[v2, v0, m]` and `[v1, v2, m]`; `m` is their newest vertex.
    pub fn bisect(&mut self, id: usize) -> Result<(usize, usize)> {
        let tri = self.triangles.get(id).ok_or(Error::InvalidElement(id))?;
        if !tri.alive {
            return Err(Error::NotALeaf(id));
        }
        let [a, b, c] = tri.v;
        let generation = tri.generation + 1;
        let key = EdgeKey::new(a, b);
        let m = match self.midpoints.get(&key) {
            Some(&m) => m,
            None => {
                let (pa, pb) = (self.vertices[a], self.vertices[b]);
                let m = self.vertices.len();
                self.vertices
                    .push(Vertex::new(0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)));
                self.midpoints.insert(key, m);
                if self.boundary.contains(&key) {
                    self.boundary.insert(EdgeKey::new(a, m));
                    self.boundary.insert(EdgeKey::new(m, b));
                }
                m
            }
        };

        let first = self.triangles.len();
        let children = [[c, a, m], [b, c, m]];
        for e in self.triangles[id].edges() {
            self.unlink(e, id);
        }
        for (k, v) in children.into_iter().enumerate() {
            let child = Triangle {
                v,
                generation,
                alive: true,
                parent: Some(id),
                children: None,
            };
            for e in child.edges() {
                self.edge_map.entry(e).or_default().push(first + k);
            }
            self.triangles.push(child);
        }
        let parent = &mut self.triangles[id];
        parent.alive = false;
        parent.children = Some([first, first + 1]);
        self.leaf_count += 1;
        Ok((first, first + 1))
    }

    fn unlink(&mut self, e: EdgeKey, t: usize) {
        if let Some(ts) = self.edge_map.get_mut(&e) {
            ts.retain(|&x| x != t);
            if ts.is_empty() {
                self.edge_map.remove(&e);
            }
        }
    }

    /// Bisects every marked leaf once. Returns the number of bisections.
    ///
    /// Afterwards `leaf_count` has grown by exactly `marks.len()`; the mesh may
    /// contain hanging nodes.
    pub fn refine(&mut self, marks: &MarkSet) -> Result<usize> {
        for t in marks.iter() {
            if t >= self.triangles.len() {
                return Err(Error::InvalidElement(t));
            }
            if !self.triangles[t].alive {
                return Err(Error::NotALeaf(t));
            }
        }
        for t in marks.iter() {
            self.bisect(t)?;
        }
        Ok(marks.len())
    }

    /// True if one of the leaf's edges has been split by a neighbour.
    pub fn has_hanging_node(&self, id: usize) -> bool {
        self.triangles[id]
            .edges()
            .iter()
            .any(|e| self.midpoints.contains_key(e))
    }

    /// Removes all hanging nodes by newest-vertex bisection. Returns the
    /// number of additional bisections.
    ///
    /// Any leaf with a split edge is bisected along its refinement edge; its
    /// children and the neighbour across the refinement edge are re-examined.
    pub fn complete(&mut self) -> Result<usize> {
        let cap = 64 * self.leaf_count;
        let mut queue: VecDeque<usize> = self
            .leaves()
            .filter(|&t| self.has_hanging_node(t))
            .collect();
        let mut count = 0;
        while let Some(t) = queue.pop_front() {
            if !self.triangles[t].alive || !self.has_hanging_node(t) {
                continue;
            }
            let refinement_edge = self.triangles[t].refinement_edge();
            let (c1, c2) = self.bisect(t)?;
            count += 1;
            if count > cap {
                return Err(Error::CompletionDiverged(cap));
            }
            queue.push_back(c1);
            queue.push_back(c2);
            if let Some(ts) = self.edge_map.get(&refinement_edge) {
                queue.extend(ts.iter().copied());
            }
        }
        Ok(count)
    }

    /// Conformity audit from scratch: every leaf edge is shared by exactly two
    /// leaves, or by one leaf when it lies on the boundary.
    pub fn is_conforming(&self) -> bool {
        let mut counts: HashMap<EdgeKey, usize> = HashMap::with_capacity(2 * self.leaf_count);
        for t in self.leaves() {
            for e in self.triangles[t].edges() {
                *counts.entry(e).or_default() += 1;
            }
        }
        counts.iter().all(|(e, &n)| match n {
            1 => self.boundary.contains(e),
            2 => true,
            _ => false,
        })
    }

    /// Checks that every interior leaf edge which is a refinement edge is the
    /// refinement edge of both adjacent leaves. Meaningful on initial meshes;
    /// refined NVB meshes generally do not keep this property.
    pub fn check_flag_compatibility(&self) -> bool {
        self.incompatible_edge().is_none()
    }

    fn incompatible_edge(&self) -> Option<EdgeKey> {
        for t in self.leaves() {
            let e = self.triangles[t].refinement_edge();
            if let Some(ts) = self.edge_map.get(&e) {
                for &n in ts {
                    if n != t && self.triangles[n].refinement_edge() != e {
                        return Some(e);
                    }
                }
            }
        }
        None
    }

    /// Leaf triangles incident to an edge of the leaf set.
    pub fn edge_leaves(&self, e: EdgeKey) -> &[usize] {
        self.edge_map.get(&e).map_or(&[], |v| v.as_slice())
    }

    pub fn is_boundary_edge(&self, e: EdgeKey) -> bool {
        self.boundary.contains(&e)
    }

    /// Rebuilds the leaf edge map from the triangle list and compares it with
    /// the incrementally maintained one.
    pub fn edge_map_is_consistent(&self) -> bool {
        let mut fresh: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
        for t in self.leaves() {
            for e in self.triangles[t].edges() {
                fresh.entry(e).or_default().push(t);
            }
        }
        if fresh.len() != self.edge_map.len() {
            return false;
        }
        fresh.iter().all(|(e, ts)| {
            self.edge_map.get(e).is_some_and(|m| {
                let mut a = m.clone();
                let mut b = ts.clone();
                a.sort_unstable();
                b.sort_unstable();
                a == b
            })
        })
    }

    /// Ancestor chain of `id` in the forest, nearest first.
    pub fn ancestors(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.triangles[id].parent;
        while let Some(p) = cur {
            out.push(p);
            cur = self.triangles[p].parent;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_right() -> Mesh {
        // refinement edge (0,0)-(1,0), newest vertex (0,1)
        Mesh::new(
            vec![
                Vertex::new(0.0, 0.0),
                Vertex::new(1.0, 0.0),
                Vertex::new(0.0, 1.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    fn sorted_angles(p: [Point; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            let a = p[i];
            let b = p[(i + 1) % 3];
            let c = p[(i + 2) % 3];
            let u = [b[0] - a[0], b[1] - a[1]];
            let w = [c[0] - a[0], c[1] - a[1]];
            let cos = (u[0] * w[0] + u[1] * w[1])
                / ((u[0] * u[0] + u[1] * u[1]).sqrt() * (w[0] * w[0] + w[1] * w[1]).sqrt());
            out[i] = cos.acos();
        }
        out.sort_by(f64::total_cmp);
        out
    }

    #[test]
    fn bisect_creates_edge_midpoint() {
        let mut m = unit_right();
        let (c1, c2) = m.bisect(0).unwrap();
        let mid = m.triangles()[c1].v[2];
        assert_eq!(mid, m.triangles()[c2].v[2]);
        assert_eq!(m.vertices()[mid], Vertex::new(0.5, 0.0));
        assert_eq!(m.triangles()[c1].generation, 1);
        assert!(!m.triangles()[0].alive);
        assert_eq!(m.leaf_count(), 2);
        assert!((m.area(c1) - 0.25).abs() < 1e-15);
        assert!((m.area(c2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn grandchildren_are_similar_to_root() {
        // right isoceles triangle, hypotenuse as refinement edge
        let mut m = Mesh::new(
            vec![
                Vertex::new(0.0, 0.0),
                Vertex::new(1.0, 0.0),
                Vertex::new(0.0, 1.0),
            ],
            vec![[1, 2, 0]],
        )
        .unwrap();
        let root = sorted_angles(m.corners(0));
        let (c1, c2) = m.bisect(0).unwrap();
        for c in [c1, c2] {
            let (g1, g2) = m.bisect(c).unwrap();
            for g in [g1, g2] {
                let a = sorted_angles(m.corners(g));
                for k in 0..3 {
                    assert!((a[k] - root[k]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn bisect_rejects_non_leaf_and_bad_id() {
        let mut m = unit_right();
        m.bisect(0).unwrap();
        assert!(matches!(m.bisect(0), Err(Error::NotALeaf(0))));
        assert!(matches!(m.bisect(99), Err(Error::InvalidElement(99))));
    }

    #[test]
    fn element_size_of_unit_right_triangle() {
        let m = unit_right();
        assert!((m.area(0) - 0.5).abs() < 1e-15);
        assert!((m.element_size(0) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn refine_counts() {
        let mut m = initial_mesh(&DomainPreset::LShape).unwrap();
        assert_eq!(m.refine(&MarkSet::new()).unwrap(), 0);
        assert_eq!(m.leaf_count(), 6);
        let marks: MarkSet = [0, 2, 4].into_iter().collect();
        assert_eq!(m.refine(&marks).unwrap(), 3);
        assert_eq!(m.leaf_count(), 9);

        let mut m = initial_mesh(&DomainPreset::LShape).unwrap();
        let all: MarkSet = m.leaves().collect();
        m.refine(&all).unwrap();
        assert_eq!(m.leaf_count(), 12);
    }

    #[test]
    fn refine_rejects_dead_marks() {
        let mut m = initial_mesh(&DomainPreset::Square).unwrap();
        m.bisect(0).unwrap();
        let marks: MarkSet = [0].into_iter().collect();
        assert!(matches!(m.refine(&marks), Err(Error::NotALeaf(0))));
    }

    #[test]
    fn completion_on_square() {
        let mut m = initial_mesh(&DomainPreset::Square).unwrap();
        assert_eq!(m.complete().unwrap(), 0);
        let marks: MarkSet = [0].into_iter().collect();
        m.refine(&marks).unwrap();
        assert!(!m.is_conforming());
        assert_eq!(m.complete().unwrap(), 1);
        assert_eq!(m.leaf_count(), 4);
        assert!(m.is_conforming());
        assert_eq!(m.complete().unwrap(), 0);
    }

    #[test]
    fn corner_refinement_stays_conforming() {
        let mut m = initial_mesh(&DomainPreset::LShape).unwrap();
        let area = m.total_area();
        for _ in 0..10 {
            let corner = m
                .leaves()
                .find(|&t| m.triangles()[t].v.iter().any(|&v| m.vertices()[v] == Vertex::new(0.0, 0.0)))
                .unwrap();
            let marks: MarkSet = [corner].into_iter().collect();
            m.refine(&marks).unwrap();
            m.complete().unwrap();
            assert!(m.is_conforming());
            assert!(m.edge_map_is_consistent());
            assert!((m.total_area() - area).abs() < 1e-12 * area);
        }
    }

    #[test]
    fn predicates_on_presets() {
        for preset in [
            DomainPreset::Square,
            DomainPreset::LShape,
            DomainPreset::Slit,
            DomainPreset::CenteredSquare,
        ] {
            let m = initial_mesh(&preset).unwrap();
            assert!(m.is_conforming(), "{preset:?}");
            assert!(m.check_flag_compatibility(), "{preset:?}");
        }
    }

    #[test]
    fn square_min_angle() {
        let m = initial_mesh(&DomainPreset::Square).unwrap();
        assert!((m.min_angle() - PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_degenerate_and_incompatible() {
        let v = vec![
            Vertex::new(0.0, 0.0),
            Vertex::new(1.0, 0.0),
            Vertex::new(2.0, 0.0),
        ];
        assert!(matches!(
            Mesh::new(v, vec![[0, 1, 2]]),
            Err(Error::DegenerateTriangle(0))
        ));

        // Diagonal is the refinement edge of the first triangle only.
        let v = vec![
            Vertex::new(0.0, 0.0),
            Vertex::new(1.0, 0.0),
            Vertex::new(1.0, 1.0),
            Vertex::new(0.0, 1.0),
        ];
        assert!(matches!(
            Mesh::new(v, vec![[2, 0, 1], [3, 0, 2]]),
            Err(Error::IncompatibleFlags(0, 2))
        ));
    }

    #[test]
    fn rejects_hanging_node_in_input() {
        let v = vec![
            Vertex::new(0.0, 0.0),
            Vertex::new(2.0, 0.0),
            Vertex::new(0.0, 2.0),
            Vertex::new(1.0, 1.0),
            Vertex::new(2.0, 2.0),
        ];
        // Edge (1, 2) of the last triangle passes through vertex 3.
        let tris = vec![[1, 3, 0], [3, 2, 0], [1, 4, 2]];
        assert!(matches!(Mesh::new(v, tris), Err(Error::NotConforming)));
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let m = Mesh::new(
            vec![
                Vertex::new(0.0, 0.0),
                Vertex::new(0.0, 1.0),
                Vertex::new(1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let [a, b, c] = m.corners(0);
        assert!(signed_area(a, b, c) > 0.0);
        assert_eq!(m.triangles()[0].refinement_edge(), EdgeKey::new(0, 1));
    }
}
