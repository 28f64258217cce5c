//! Continuous degree-p Lagrange interpolation on the leaves of a mesh.

use std::collections::HashMap;

use crate::mesh::{EdgeKey, Mesh};
use crate::Point;

/// Barycentric lattice `(i, j, k)/p` with `i + j + k = p`, in a fixed order:
/// vertices, then edge nodes per edge `(0,1), (1,2), (2,0)`, then interior.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LagrangeNodes {
    pub p: u32,
    pub lattice: Vec<[u32; 3]>,
}

impl LagrangeNodes {
    pub fn new(p: u32) -> Self {
        assert!(p >= 1, "polynomial degree must be at least 1");
        let mut lattice = vec![[p, 0, 0], [0, p, 0], [0, 0, p]];
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            for q in 1..p {
                let mut n = [0; 3];
                n[a] = p - q;
                n[b] = q;
                lattice.push(n);
            }
        }
        for i in 1..p {
            for j in 1..(p - i) {
                lattice.push([i, j, p - i - j]);
            }
        }
        Self { p, lattice }
    }

    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    /// Values of every basis function at barycentric coordinates `l`.
    pub fn basis(&self, l: [f64; 3]) -> Vec<f64> {
        let p = self.p as f64;
        self.lattice
            .iter()
            .map(|n| (0..3).map(|a| silvester(n[a], p * l[a])).product())
            .collect()
    }

    /// Gradients of every basis function at `l`, given `∇λ_a`.
    pub fn basis_gradients(&self, l: [f64; 3], grad_l: [[f64; 2]; 3]) -> Vec<[f64; 2]> {
        let p = self.p as f64;
        self.lattice
            .iter()
            .map(|n| {
                let f: [(f64, f64); 3] = std::array::from_fn(|a| {
                    let (v, dv) = silvester_with_derivative(n[a], p * l[a]);
                    (v, p * dv)
                });
                let mut g = [0.0; 2];
                for a in 0..3 {
                    let others = f[(a + 1) % 3].0 * f[(a + 2) % 3].0;
                    g[0] += f[a].1 * others * grad_l[a][0];
                    g[1] += f[a].1 * others * grad_l[a][1];
                }
                g
            })
            .collect()
    }
}

/// `Π_{l<m} (z - l)/(l + 1)`.
fn silvester(m: u32, z: f64) -> f64 {
    (0..m).map(|l| (z - l as f64) / (l + 1) as f64).product()
}

fn silvester_with_derivative(m: u32, z: f64) -> (f64, f64) {
    let mut v = 1.0;
    let mut d = 0.0;
    for l in 0..m {
        let f = (z - l as f64) / (l + 1) as f64;
        d = d * f + v / (l + 1) as f64;
        v *= f;
    }
    (v, d)
}

/// Barycentric coordinates of `x` and the constant gradients `∇λ_a`.
pub fn barycentric(tri: [Point; 3], x: Point) -> ([f64; 3], [[f64; 2]; 3]) {
    let [a, b, c] = tri;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let grad = [
        [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
        [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
        [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
    ];
    let l1 = grad[1][0] * (x[0] - a[0]) + grad[1][1] * (x[1] - a[1]);
    let l2 = grad[2][0] * (x[0] - a[0]) + grad[2][1] * (x[1] - a[1]);
    ([1.0 - l1 - l2, l1, l2], grad)
}

/// Global numbering of the Lagrange nodes of the leaf set: mesh vertices
/// first, then edge nodes, then element interiors.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub p: u32,
    pub nodes: LagrangeNodes,
    /// Node coordinates by global index.
    pub coords: Vec<Point>,
    /// Leaf id and local-to-global map, in leaf order.
    pub elements: Vec<(usize, Vec<usize>)>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, p: u32) -> Self {
        let nodes = LagrangeNodes::new(p);
        let verts = mesh.vertices();
        let mut coords: Vec<Point> = verts.iter().map(|v| v.point()).collect();
        let mut edge_start: HashMap<EdgeKey, usize> = HashMap::new();
        let mut elements = Vec::with_capacity(mesh.leaf_count());
        let pf = p as f64;
        for t in mesh.leaves() {
            let v = mesh.triangles()[t].v;
            let mut map = Vec::with_capacity(nodes.len());
            map.extend_from_slice(&v);
            for (a, b) in [(0, 1), (1, 2), (2, 0)] {
                let key = EdgeKey::new(v[a], v[b]);
                let start = *edge_start.entry(key).or_insert_with(|| {
                    let start = coords.len();
                    let (lo, hi) = (verts[key.0].point(), verts[key.1].point());
                    // Node q sits at λ_lo = q/p.
                    for q in 1..p {
                        let s = q as f64 / pf;
                        coords.push([s * lo[0] + (1.0 - s) * hi[0], s * lo[1] + (1.0 - s) * hi[1]]);
                    }
                    start
                });
                for q in 1..p {
                    // Local node with weight p-q on v[a] and q on v[b].
                    let lo_weight = if v[a] == key.0 { p - q } else { q };
                    map.push(start + (lo_weight - 1) as usize);
                }
            }
            let corners = mesh.corners(t);
            for n in &nodes.lattice[3 + 3 * (p as usize - 1)..] {
                let l = n.map(|k| k as f64 / pf);
                map.push(coords.len());
                coords.push([
                    l[0] * corners[0][0] + l[1] * corners[1][0] + l[2] * corners[2][0],
                    l[0] * corners[0][1] + l[1] * corners[1][1] + l[2] * corners[2][1],
                ]);
            }
            elements.push((t, map));
        }
        Self {
            p,
            nodes,
            coords,
            elements,
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Nodal values `f(x_n)` for every global node.
pub fn interpolate(dofs: &DofMap, f: impl Fn(Point) -> f64) -> Vec<f64> {
    dofs.coords.iter().map(|&x| f(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{initial_mesh, DomainPreset, MarkSet};

    #[test]
    fn node_counts() {
        for p in 1..=5 {
            assert_eq!(LagrangeNodes::new(p).len() as u32, (p + 1) * (p + 2) / 2);
        }
    }

    #[test]
    fn basis_is_nodal_and_sums_to_one() {
        for p in 1..=4 {
            let nodes = LagrangeNodes::new(p);
            for (i, n) in nodes.lattice.iter().enumerate() {
                let l = n.map(|k| k as f64 / p as f64);
                let b = nodes.basis(l);
                for (j, v) in b.iter().enumerate() {
                    assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
                }
            }
            let l = [0.2, 0.3, 0.5];
            assert!((nodes.basis(l).iter().sum::<f64>() - 1.0).abs() < 1e-13);
            let tri = [[0.0, 0.0], [1.0, 0.2], [0.3, 0.9]];
            let (_, gl) = barycentric(tri, [0.4, 0.4]);
            let g = nodes.basis_gradients(l, gl);
            let s = g.iter().fold([0.0, 0.0], |a, v| [a[0] + v[0], a[1] + v[1]]);
            assert!(s[0].abs() < 1e-12 && s[1].abs() < 1e-12);
        }
    }

    #[test]
    fn gradients_match_differences() {
        let nodes = LagrangeNodes::new(3);
        let tri = [[0.1, 0.0], [1.0, 0.3], [0.2, 0.8]];
        let x = [0.4, 0.35];
        let (l, gl) = barycentric(tri, x);
        let g = nodes.basis_gradients(l, gl);
        let h = 1e-6;
        for (k, gk) in g.iter().enumerate() {
            let fx = (nodes.basis(barycentric(tri, [x[0] + h, x[1]]).0)[k]
                - nodes.basis(barycentric(tri, [x[0] - h, x[1]]).0)[k])
                / (2.0 * h);
            let fy = (nodes.basis(barycentric(tri, [x[0], x[1] + h]).0)[k]
                - nodes.basis(barycentric(tri, [x[0], x[1] - h]).0)[k])
                / (2.0 * h);
            assert!((gk[0] - fx).abs() < 1e-7 && (gk[1] - fy).abs() < 1e-7);
        }
    }

    #[test]
    fn shared_edge_nodes_coincide() {
        let mut m = initial_mesh(&DomainPreset::LShape).unwrap();
        m.refine(&MarkSet::from_iter([0, 3])).unwrap();
        m.complete().unwrap();
        let p = 4;
        let dofs = DofMap::new(&m, p);
        let nodes = &dofs.nodes;
        for (t, map) in &dofs.elements {
            let c = m.corners(*t);
            for (n, &g) in nodes.lattice.iter().zip(map) {
                let l = n.map(|k| k as f64 / p as f64);
                let x = [
                    l[0] * c[0][0] + l[1] * c[1][0] + l[2] * c[2][0],
                    l[0] * c[0][1] + l[1] * c[1][1] + l[2] * c[2][1],
                ];
                assert!((x[0] - dofs.coords[g][0]).abs() < 1e-14);
                assert!((x[1] - dofs.coords[g][1]).abs() < 1e-14);
            }
        }
        // Euler: interior + boundary counts for a conforming P4 space.
        let leaves = m.leaf_count();
        let mut edges = std::collections::BTreeSet::new();
        for (t, _) in &dofs.elements {
            for e in m.triangles()[*t].edges() {
                edges.insert(e);
            }
        }
        let expected = m.vertices().len() + 3 * edges.len() + 3 * leaves;
        assert_eq!(dofs.len(), expected);
    }
}
