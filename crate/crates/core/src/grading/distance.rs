use crate::Point;

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let d = [ap[0] - t * ab[0], ap[1] - t * ab[1]];
    d[0].hypot(d[1])
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Euclidean distance from `p` to the closed triangle; zero inside.
pub fn point_triangle_distance(p: Point, tri: [Point; 3]) -> f64 {
    let [a, b, c] = tri;
    let (d0, d1, d2) = (orient(a, b, p), orient(b, c, p), orient(c, a, p));
    let has_neg = d0 < 0.0 || d1 < 0.0 || d2 < 0.0;
    let has_pos = d0 > 0.0 || d1 > 0.0 || d2 > 0.0;
    if !(has_neg && has_pos) {
        return 0.0;
    }
    segment_distance(p, a, b)
        .min(segment_distance(p, b, c))
        .min(segment_distance(p, c, a))
}

/// `r_T = min_i dist(x_i, T)`; `+∞` for an empty point set.
pub fn element_distance(tri: [Point; 3], points: &[Point]) -> f64 {
    points
        .iter()
        .map(|&x| point_triangle_distance(x, tri))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const UNIT: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn vertex_point_has_zero_distance() {
        for v in UNIT {
            assert_eq!(point_triangle_distance(v, UNIT), 0.0);
        }
        assert_eq!(point_triangle_distance([0.2, 0.2], UNIT), 0.0);
    }

    #[test]
    fn nearest_feature_is_a_vertex() {
        assert_eq!(point_triangle_distance([2.0, 0.0], UNIT), 1.0);
        assert!((point_triangle_distance([1.0, 1.0], UNIT) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn empty_point_set_is_infinitely_far() {
        assert_eq!(element_distance(UNIT, &[]), f64::INFINITY);
        assert_eq!(element_distance(UNIT, &[[3.0, 0.0], [0.0, -0.5]]), 0.5);
    }

    /// Dense barycentric sampling bounds the distance from above.
    #[test]
    fn matches_sampling_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let tri: [Point; 3] = std::array::from_fn(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            // Keep clear of the bounding box: sampling error is second order
            // in the lattice spacing only away from the triangle.
            let (lo_x, hi_x) = (tri.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min), tri.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max));
            let (lo_y, hi_y) = (tri.iter().map(|v| v[1]).fold(f64::INFINITY, f64::min), tri.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max));
            let p = loop {
                let p = [rng.gen_range(-2.5..2.5), rng.gen_range(-2.5..2.5)];
                if p[0] < lo_x - 0.1 || p[0] > hi_x + 0.1 || p[1] < lo_y - 0.1 || p[1] > hi_y + 0.1 {
                    break p;
                }
            };
            let exact = point_triangle_distance(p, tri);
            // Lattice of ~10⁶ barycentric samples, including the boundary.
            let n = 1400;
            let mut best = f64::INFINITY;
            for i in 0..=n {
                for j in 0..=(n - i) {
                    let (l1, l2) = (i as f64 / n as f64, j as f64 / n as f64);
                    let l0 = 1.0 - l1 - l2;
                    let x = l0 * tri[0][0] + l1 * tri[1][0] + l2 * tri[2][0];
                    let y = l0 * tri[0][1] + l1 * tri[1][1] + l2 * tri[2][1];
                    best = best.min((x - p[0]).hypot(y - p[1]));
                }
            }
            assert!(best >= exact - 1e-12);
            assert!(best - exact < 1e-4, "exact {exact} sampled {best}");
        }
    }
}
