//! Interpolation error in the H¹ seminorm, ring statistics and
//! convergence sweeps.

pub mod lagrange;
pub mod quadrature;

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::Problem;
use crate::grading::{
    bdd_ledger_check, grade, point_triangle_distance, verify_marked_bound, verify_size_lemma,
    verify_size_lemma_scaled, ComplexityLedger, GradingParams,
};
use crate::mesh::{MarkSet, Mesh};
use crate::Point;

pub use lagrange::{barycentric, interpolate, DofMap, LagrangeNodes};
pub use quadrature::{
    gauss_legendre, integrate_singular, integrate_toward_apex, QuadratureRule, SingularQuadrature,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorOptions {
    /// Exactness of the standard rule; defaults to `max(2p, 6)`.
    pub rule_degree: Option<u32>,
    pub tolerance: f64,
    pub max_levels: u32,
    /// Gauss points per direction in each cell of the singular rule.
    pub order: usize,
}

impl Default for ErrorOptions {
    fn default() -> Self {
        Self {
            rule_degree: None,
            tolerance: 1e-8,
            max_levels: 40,
            order: 12,
        }
    }
}

impl ErrorOptions {
    fn rule(&self, p: u32) -> QuadratureRule {
        QuadratureRule::for_degree(self.rule_degree.unwrap_or(6).max(2 * p))
    }

    fn singular(&self, problem: &Problem) -> SingularQuadrature {
        let gamma = problem
            .terms
            .iter()
            .map(|t| if t.log_power > 0 { t.gamma / 2.0 } else { t.gamma })
            .fold(f64::INFINITY, f64::min);
        SingularQuadrature {
            order: self.order,
            tolerance: self.tolerance,
            max_levels: self.max_levels,
            ..SingularQuadrature::for_exponent(gamma)
        }
    }
}

/// Squared H¹-seminorm errors on one leaf.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementError {
    pub element: usize,
    pub total: f64,
    pub regular: f64,
    pub singular: f64,
    /// `r_T`.
    pub distance: f64,
    /// Geometric levels used; 0 on elements away from singular points.
    pub levels: u32,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub p: u32,
    pub elements: Vec<ElementError>,
    /// `|u - I u|_{H¹(Ω)}`.
    pub total: f64,
    /// `|u₀ - I u₀|_{H¹(Ω)}`.
    pub regular: f64,
    /// `|Σuᵢ - I Σuᵢ|_{H¹(Ω)}`.
    pub singular: f64,
    pub leaf_count: usize,
    pub initial_count: usize,
}

impl ErrorReport {
    /// `#T - #T₀`.
    pub fn cardinality(&self) -> usize {
        self.leaf_count - self.initial_count
    }

    /// Elements whose singular quadrature did not settle.
    pub fn flagged(&self) -> Vec<usize> {
        self.elements
            .iter()
            .filter(|e| !e.converged)
            .map(|e| e.element)
            .collect()
    }

    /// Largest over median squared element error; 0 when all vanish.
    pub fn spread(&self) -> f64 {
        let mut v: Vec<f64> = self.elements.iter().map(|e| e.total).collect();
        if v.is_empty() {
            return 0.0;
        }
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        };
        let max = v[n - 1];
        if max == 0.0 {
            0.0
        } else {
            max / median
        }
    }
}

/// `∫_T f` for every leaf in leaf order, with the singular composite rule
/// on leaves touching one of `points`. Returns the values together with
/// levels used and convergence per leaf.
fn integrate_leaves<const N: usize, F>(
    mesh: &Mesh,
    leaves: &[usize],
    points: &[Point],
    rule: &QuadratureRule,
    singular: &SingularQuadrature,
    f: F,
) -> Vec<([f64; N], f64, u32, bool)>
where
    F: Fn(usize, Point) -> [f64; N] + Sync,
{
    leaves
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let tri = mesh.corners(t);
            let g = |x: Point| f(i, x);
            let nearest = points
                .iter()
                .map(|&x| (point_triangle_distance(x, tri), x))
                .min_by(|a, b| a.0.total_cmp(&b.0));
            match nearest {
                Some((d, x)) if d == 0.0 => {
                    let c = integrate_singular(tri, x, singular, &g);
                    (c.value, 0.0, c.levels, c.converged)
                }
                other => (
                    rule.integrate(tri, g),
                    other.map_or(f64::INFINITY, |o| o.0),
                    0,
                    true,
                ),
            }
        })
        .collect()
}

fn dot(a: [f64; 2]) -> f64 {
    a[0] * a[0] + a[1] * a[1]
}

/// `|u - I_T u|²_{H¹(T)}` on every leaf, split into regular and singular
/// parts, for degree-`p` Lagrange interpolation.
pub fn h1_error(mesh: &Mesh, p: u32, problem: &Problem, opts: &ErrorOptions) -> Result<ErrorReport> {
    if p < 1 {
        return Err(Error::InvalidParameter("polynomial degree must be at least 1".into()));
    }
    if !mesh.is_conforming() {
        return Err(Error::NotConforming);
    }
    let dofs = DofMap::new(mesh, p);
    let reg = interpolate(&dofs, |x| problem.regular.eval(x));
    let sing = interpolate(&dofs, |x| problem.singular_eval(x));
    let leaves: Vec<usize> = dofs.elements.iter().map(|e| e.0).collect();
    let points = problem.singular_points();
    let integrand = |i: usize, x: Point| {
        let (t, map) = &dofs.elements[i];
        let (l, gl) = barycentric(mesh.corners(*t), x);
        let grads = dofs.nodes.basis_gradients(l, gl);
        let mut ir = [0.0; 2];
        let mut is = [0.0; 2];
        for (g, &n) in grads.iter().zip(map) {
            ir[0] += reg[n] * g[0];
            ir[1] += reg[n] * g[1];
            is[0] += sing[n] * g[0];
            is[1] += sing[n] * g[1];
        }
        let gr = problem.regular.grad(x);
        let gs = problem.singular_grad(x).unwrap_or([f64::NAN; 2]);
        let er = [gr[0] - ir[0], gr[1] - ir[1]];
        let es = [gs[0] - is[0], gs[1] - is[1]];
        [dot([er[0] + es[0], er[1] + es[1]]), dot(er), dot(es)]
    };
    let values = integrate_leaves(
        mesh,
        &leaves,
        &points,
        &opts.rule(p),
        &opts.singular(problem),
        integrand,
    );
    let elements: Vec<ElementError> = leaves
        .iter()
        .zip(values)
        .map(|(&t, (v, distance, levels, converged))| ElementError {
            element: t,
            total: v[0],
            regular: v[1],
            singular: v[2],
            distance,
            levels,
            converged,
        })
        .collect();
    let sum = |f: fn(&ElementError) -> f64| elements.iter().map(f).sum::<f64>().sqrt();
    Ok(ErrorReport {
        p,
        total: sum(|e| e.total),
        regular: sum(|e| e.regular),
        singular: sum(|e| e.singular),
        elements,
        leaf_count: mesh.leaf_count(),
        initial_count: mesh.initial_count(),
    })
}

/// `|u|²_{H¹(Ω)}` over the leaves, with the same quadrature as [`h1_error`].
/// Returns the value and whether every singular element converged.
pub fn seminorm_squared(mesh: &Mesh, problem: &Problem, opts: &ErrorOptions) -> (f64, bool) {
    let leaves = mesh.leaf_ids();
    let values = integrate_leaves(
        mesh,
        &leaves,
        &problem.singular_points(),
        &opts.rule(1),
        &opts.singular(problem),
        |_, x| [dot(problem.grad(x).unwrap_or([f64::NAN; 2]))],
    );
    let ok = values.iter().all(|v| v.3);
    (values.iter().map(|v| v.0[0]).sum(), ok)
}

/// Ring index of a leaf at distance `dist`: `ℓ` with
/// `2^{-(ℓ+1)/d} < dist ≤ 2^{-ℓ/d}`, 0 beyond `2^{-1/d}`, and `d(K+1)` for
/// `dist ≤ 2^{-(K+1)}`.
pub fn ring_index(dist: f64, k: u32, d: u32) -> u32 {
    let last = d * (k + 1);
    let radius = |l: u32| 2f64.powf(-(l as f64) / d as f64);
    if dist <= radius(last) {
        return last;
    }
    if dist > radius(1) {
        return 0;
    }
    let mut l = ((-(d as f64) * dist.log2()).floor() as i64).clamp(1, last as i64 - 1) as u32;
    while l > 1 && dist > radius(l) {
        l -= 1;
    }
    while l + 1 < last && dist <= radius(l + 1) {
        l += 1;
    }
    l
}

/// `(leaf, ring)` for every leaf, distance taken to the nearest center.
pub fn ring_decomposition(mesh: &Mesh, centers: &[Point], k: u32, d: u32) -> Vec<(usize, u32)> {
    mesh.leaves()
        .map(|t| {
            let tri = mesh.corners(t);
            let r = centers
                .iter()
                .map(|&x| point_triangle_distance(x, tri))
                .fold(f64::INFINITY, f64::min);
            (t, ring_index(r, k, d))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RingStats {
    pub ring: u32,
    pub count: usize,
    pub sum: f64,
    pub max: f64,
    pub mean: f64,
}

/// Per-ring statistics of the squared element errors; empty rings omitted.
pub fn equidistribution_stats(report: &ErrorReport, k: u32, d: u32) -> Vec<RingStats> {
    let last = d * (k + 1);
    let mut stats: Vec<RingStats> = (0..=last)
        .map(|ring| RingStats {
            ring,
            count: 0,
            sum: 0.0,
            max: 0.0,
            mean: 0.0,
        })
        .collect();
    for e in &report.elements {
        let s = &mut stats[ring_index(e.distance, k, d) as usize];
        s.count += 1;
        s.sum += e.total;
        s.max = s.max.max(e.total);
    }
    stats.retain(|s| s.count > 0);
    for s in &mut stats {
        s.mean = s.sum / s.count as f64;
    }
    stats
}

pub fn ring_stats_csv(stats: &[RingStats]) -> String {
    let mut s = String::from("ring,count,sum,max,mean\n");
    for r in stats {
        writeln!(s, "{},{},{:.10e},{:.10e},{:.10e}", r.ring, r.count, r.sum, r.max, r.mean).unwrap();
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    pub k: u32,
    pub leaves: usize,
    pub cardinality: usize,
    pub error_total: f64,
    pub error_regular: f64,
    pub error_singular: f64,
    pub slope_running: f64,
    pub flagged_elements: usize,
    pub spread: f64,
    /// Present for graded rows.
    pub grading: Option<GradingSummary>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradingSummary {
    pub ledger: ComplexityLedger,
    pub first_loop_passed: bool,
    pub size_lemma_violations: usize,
    /// Violations with the threshold exponent scaled by 1.1.
    pub control_violations: usize,
    pub max_marked_constant: f64,
    /// `(#T - #T₀) δ^d`.
    pub total_constant: f64,
    pub bdd_ratio: f64,
    pub conforming: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub p: u32,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope with the two coarsest rows left out.
    pub slope: f64,
}

pub const CONVERGENCE_HEADER: &str = "delta,cardinality,error_total,error_regular,error_singular,slope_running";

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{CONVERGENCE_HEADER}\n");
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{:.10e},{:.10e},{:.10e},{}",
                r.delta,
                r.cardinality,
                r.error_total,
                r.error_regular,
                r.error_singular,
                if r.slope_running.is_nan() {
                    String::new()
                } else {
                    format!("{:.6}", r.slope_running)
                }
            )
            .unwrap();
        }
        s
    }
}

/// Least-squares slope of `ln y` against `ln x`, ignoring non-positive
/// entries; NaN with fewer than two usable points.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

const SKIPPED_COARSE_ROWS: usize = 2;

fn finish_table(p: u32, mut rows: Vec<SweepRow>) -> ConvergenceTable {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.cardinality as f64, r.error_total))
        .collect();
    for i in 0..rows.len() {
        rows[i].slope_running = if i >= SKIPPED_COARSE_ROWS {
            fit_slope(&pts[SKIPPED_COARSE_ROWS..=i])
        } else {
            f64::NAN
        };
    }
    let slope = rows.last().map_or(f64::NAN, |r| r.slope_running);
    ConvergenceTable { p, rows, slope }
}

fn check_deltas(deltas: &[f64]) -> Result<()> {
    if deltas.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "a convergence sweep needs at least 4 values of delta, got {}",
            deltas.len()
        )));
    }
    if deltas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("delta values must decrease strictly".into()));
    }
    Ok(())
}

/// Grades `initial` for every `δ` and measures the interpolation error.
pub fn convergence_sweep(
    initial: &Mesh,
    problem: &Problem,
    p: u32,
    deltas: &[f64],
    sharp: bool,
    opts: &ErrorOptions,
) -> Result<ConvergenceTable> {
    check_deltas(deltas)?;
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let params = GradingParams::from_terms(delta, p, &problem.terms, sharp)?;
        let mut mesh = initial.clone();
        let run = grade(&mut mesh, &params)?;
        let report = h1_error(&mesh, p, problem, opts)?;
        let marked = verify_marked_bound(&run.ledger, &params);
        rows.push(SweepRow {
            delta,
            k: params.k,
            leaves: report.leaf_count,
            cardinality: report.cardinality(),
            error_total: report.total,
            error_regular: report.regular,
            error_singular: report.singular,
            slope_running: f64::NAN,
            flagged_elements: report.flagged().len(),
            spread: report.spread(),
            grading: Some(GradingSummary {
                first_loop_passed: run.first_loop.passed(),
                size_lemma_violations: verify_size_lemma(&mesh, &params).violations.len(),
                control_violations: verify_size_lemma_scaled(&mesh, &params, 1.1).violations.len(),
                max_marked_constant: marked.max_constant,
                total_constant: marked.total_constant,
                bdd_ratio: bdd_ledger_check(&run.ledger).ratio,
                conforming: mesh.is_conforming(),
                ledger: run.ledger,
            }),
        });
    }
    Ok(finish_table(p, rows))
}

/// Bisects every leaf, then completes, until all leaves have `|T| ≤ δ²`.
pub fn uniform_refinement(mesh: &mut Mesh, delta: f64) -> Result<()> {
    let limit = delta * delta;
    while mesh.leaves().any(|t| mesh.area(t) > limit) {
        let all: MarkSet = mesh.leaves().collect();
        mesh.refine(&all)?;
        mesh.complete()?;
    }
    Ok(())
}

/// Same measurements on uniformly refined meshes with `h_T ≤ δ`.
pub fn uniform_sweep(
    initial: &Mesh,
    problem: &Problem,
    p: u32,
    deltas: &[f64],
    opts: &ErrorOptions,
) -> Result<ConvergenceTable> {
    check_deltas(deltas)?;
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let mut mesh = initial.clone();
        uniform_refinement(&mut mesh, delta)?;
        let report = h1_error(&mesh, p, problem, opts)?;
        rows.push(SweepRow {
            delta,
            k: 0,
            leaves: report.leaf_count,
            cardinality: report.cardinality(),
            error_total: report.total,
            error_regular: report.regular,
            error_singular: report.singular,
            slope_running: f64::NAN,
            flagged_elements: report.flagged().len(),
            spread: report.spread(),
            grading: None,
        });
    }
    Ok(finish_table(p, rows))
}
