//! Quadrature on the reference triangle `(0,0), (1,0), (0,1)` and
//! singularity-aware composite rules on physical triangles.

use std::f64::consts::PI;

use crate::mesh::signed_area;
use crate::Point;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    /// Reference coordinates.
    pub points: Vec<Point>,
    /// Sum to the reference area `1/2`.
    pub weights: Vec<f64>,
    pub degree: u32,
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // Three-term recurrence for P_n and its derivative.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

impl QuadratureRule {
    /// Symmetric 12-point rule of degree 6.
    pub fn symmetric_degree_6() -> Self {
        let mut points = Vec::with_capacity(12);
        let mut weights = Vec::with_capacity(12);
        for (w, a) in [
            (0.116_786_275_726_379, 0.249_286_745_170_910),
            (0.050_844_906_370_207, 0.063_089_014_491_502),
        ] {
            let b = 1.0 - 2.0 * a;
            for p in [[a, a], [b, a], [a, b]] {
                points.push(p);
                weights.push(0.5 * w);
            }
        }
        let (w, a, b) = (0.082_851_075_618_374, 0.053_145_049_844_817, 0.310_352_451_033_784);
        let c = 1.0 - a - b;
        for p in [[a, b], [b, a], [a, c], [c, a], [b, c], [c, b]] {
            points.push(p);
            weights.push(0.5 * w);
        }
        Self {
            points,
            weights,
            degree: 6,
        }
    }

    /// Conical product of Gauss–Legendre rules, exact to degree `degree`.
    pub fn collapsed_gauss(degree: u32) -> Self {
        let n = (degree as usize + 2).div_ceil(2);
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let u = x[i];
                points.push([u, x[j] * (1.0 - u)]);
                weights.push(w[i] * w[j] * (1.0 - u));
            }
        }
        Self {
            points,
            weights,
            degree,
        }
    }

    /// Smallest available rule of at least the given degree.
    pub fn for_degree(degree: u32) -> Self {
        if degree <= 6 {
            Self::symmetric_degree_6()
        } else {
            Self::collapsed_gauss(degree)
        }
    }

    /// `∫_T f` on a physical triangle.
    pub fn integrate<const N: usize>(&self, tri: [Point; 3], f: impl Fn(Point) -> [f64; N]) -> [f64; N] {
        let [a, b, c] = tri;
        let jac = 2.0 * signed_area(a, b, c).abs();
        let mut acc = [0.0; N];
        for (p, &w) in self.points.iter().zip(&self.weights) {
            let x = [
                a[0] + p[0] * (b[0] - a[0]) + p[1] * (c[0] - a[0]),
                a[1] + p[0] * (b[1] - a[1]) + p[1] * (c[1] - a[1]),
            ];
            let v = f(x);
            for k in 0..N {
                acc[k] += w * jac * v[k];
            }
        }
        acc
    }
}

/// Options for the composite rule on elements touching a singular point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularQuadrature {
    /// Gauss points per direction in each geometric cell.
    pub order: usize,
    pub tolerance: f64,
    pub max_levels: u32,
    /// Radial substitution `s = w^β` that flattens `s^{2γ-1}`.
    pub beta: f64,
}

impl Default for SingularQuadrature {
    fn default() -> Self {
        Self {
            order: 12,
            tolerance: 1e-8,
            max_levels: 40,
            beta: 1.0,
        }
    }
}

impl SingularQuadrature {
    /// `β = 1/(2γ)` clamped to `[1, 16]`, where `γ` is the smallest
    /// effective singular exponent.
    pub fn for_exponent(gamma: f64) -> Self {
        Self {
            beta: (0.5 / gamma).clamp(1.0, 16.0),
            ..Self::default()
        }
    }
}

/// Result of a composite integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Composite<const N: usize> {
    pub value: [f64; N],
    pub levels: u32,
    pub converged: bool,
}

const CHECKPOINTS: [u32; 5] = [4, 8, 16, 32, 40];

/// Integrates over the triangle `(apex, b, c)` in collapsed coordinates
/// `x = apex + s((b - apex) + t(c - b))`, splitting `s` into geometric
/// cells `[2^{-k-1}, 2^{-k}]` (after `s = w^β`) toward the apex.
///
/// The level count runs through 4, 8, 16, 32, 40 until the relative change
/// of every component drops below the tolerance.
pub fn integrate_toward_apex<const N: usize>(
    apex: Point,
    b: Point,
    c: Point,
    opts: &SingularQuadrature,
    f: &impl Fn(Point) -> [f64; N],
) -> Composite<N> {
    let jac = 2.0 * signed_area(apex, b, c).abs();
    let (x, w) = gauss_legendre(opts.order);
    let beta = opts.beta;
    // ∫_{w0}^{w1} ∫_0^1 f(x(s,t)) · jac · s · β w^{β-1} dt dw, s = w^β.
    let cell = |w0: f64, w1: f64| {
        let mut acc = [0.0; N];
        let h = w1 - w0;
        for (xi, wi) in x.iter().zip(&w) {
            let ww = w0 + h * xi;
            let s = ww.powf(beta);
            let ds = beta * ww.powf(beta - 1.0);
            for (xj, wj) in x.iter().zip(&w) {
                let t = *xj;
                let p = [
                    apex[0] + s * ((b[0] - apex[0]) + t * (c[0] - b[0])),
                    apex[1] + s * ((b[1] - apex[1]) + t * (c[1] - b[1])),
                ];
                let v = f(p);
                let weight = wi * wj * h * jac * s * ds;
                for k in 0..N {
                    acc[k] += weight * v[k];
                }
            }
        }
        acc
    };
    let mut strips = [0.0; N];
    let mut done = 0u32;
    let mut previous: Option<[f64; N]> = None;
    let mut last = [0.0; N];
    let mut levels = 0;
    for &l in CHECKPOINTS.iter().filter(|&&l| l <= opts.max_levels.max(4)) {
        while done < l {
            let v = cell(0.5f64.powi(done as i32 + 1), 0.5f64.powi(done as i32));
            for k in 0..N {
                strips[k] += v[k];
            }
            done += 1;
        }
        let inner = cell(0.0, 0.5f64.powi(l as i32));
        let mut total = [0.0; N];
        for k in 0..N {
            total[k] = strips[k] + inner[k];
        }
        levels = l;
        if let Some(prev) = previous {
            let settled = (0..N).all(|k| {
                (total[k] - prev[k]).abs() <= opts.tolerance * total[k].abs() + 1e-300
            });
            if settled {
                return Composite {
                    value: total,
                    levels,
                    converged: true,
                };
            }
        }
        previous = Some(total);
        last = total;
    }
    Composite {
        value: last,
        levels,
        converged: false,
    }
}

fn point_in_closed_triangle(p: Point, tri: [Point; 3]) -> bool {
    let [a, b, c] = tri;
    let d = [signed_area(a, b, p), signed_area(b, c, p), signed_area(c, a, p)];
    let scale = signed_area(a, b, c).abs() * 1e-14;
    !(d.iter().any(|&v| v < -scale) && d.iter().any(|&v| v > scale))
}

/// `∫_T f` for `f` singular at `x`, which lies in the closed triangle.
///
/// `T` is split into the sub-triangles with apex `x` (one per edge not
/// containing `x`), each integrated by [`integrate_toward_apex`].
pub fn integrate_singular<const N: usize>(
    tri: [Point; 3],
    x: Point,
    opts: &SingularQuadrature,
    f: &impl Fn(Point) -> [f64; N],
) -> Composite<N> {
    debug_assert!(point_in_closed_triangle(x, tri));
    let area = signed_area(tri[0], tri[1], tri[2]).abs();
    let mut out = Composite {
        value: [0.0; N],
        levels: 0,
        converged: true,
    };
    for i in 0..3 {
        let (b, c) = (tri[i], tri[(i + 1) % 3]);
        if signed_area(x, b, c).abs() <= 1e-14 * area {
            continue;
        }
        let part = integrate_toward_apex(x, b, c, opts, f);
        for k in 0..N {
            out.value[k] += part.value[k];
        }
        out.levels = out.levels.max(part.levels);
        out.converged &= part.converged;
    }
    out
}
