//! Two-loop construction of graded meshes.
//!
//! The first loop bisects every leaf with `h_T > δ` until none is left. The
//! second loop runs `ℓ = 1, …, d(K+1)-1` and bisects, once per iteration,
//! the leaves with `r_T ≤ 2^{-ℓ/d}` and `h_T > δ·2^{2ℓ(γ-p-1)/(d(2p+d))}`,
//! where `r_T` is the distance from `T` to the nearest singular point. Each
//! refine step is followed by a completion.

pub mod distance;
pub mod verify;

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mesh::{MarkSet, Mesh};
use crate::singular::SingularTerm;
use crate::Point;

pub use distance::{element_distance, point_triangle_distance};
pub use verify::{
    bdd_ledger_check, verify_first_loop, verify_marked_bound, verify_size_lemma,
    verify_size_lemma_scaled, BddReport, FirstLoopReport, MarkedBoundReport, SizeLemmaReport,
};

/// Exponent `(2γ+d-2)/(2p+d)` shared by the choice of `K` and the
/// marked-count bound.
pub fn rate_exponent(gamma: f64, p: u32, d: u32) -> f64 {
    (2.0 * gamma + d as f64 - 2.0) / (2.0 * p as f64 + d as f64)
}

/// The unique `K ≥ 0` with `2^{-(K+1)e} ≤ δ < 2^{-Ke}`, `e = (2γ+d-2)/(2p+d)`.
///
/// A `δ` that hits the left bound exactly (up to a relative `1e-12`) belongs
/// to that `K`.
pub fn compute_k(delta: f64, gamma: f64, p: u32, d: u32) -> Result<u32> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    if p < 1 {
        return Err(Error::InvalidParameter("polynomial degree must be at least 1".into()));
    }
    if d != 2 && d != 3 {
        return Err(Error::InvalidParameter(format!("dimension must be 2 or 3, got {d}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1) for some K >= 0 to exist, got {delta}"
        )));
    }
    let e = rate_exponent(gamma, p, d);
    let t = (1.0 / delta).log2() / e;
    let nearest = t.round();
    let mut k = if (t - nearest).abs() <= 1e-12 * t.max(1.0) {
        nearest - 1.0
    } else {
        t.ceil() - 1.0
    }
    .max(0.0) as i64;
    // Settle floating-point disagreements with the inequalities themselves.
    let left = |k: i64| 2f64.powf(-((k + 1) as f64) * e) <= delta * (1.0 + 1e-12);
    let right = |k: i64| delta < 2f64.powf(-(k as f64) * e);
    while k > 0 && !right(k) {
        k -= 1;
    }
    while !left(k) {
        k += 1;
    }
    Ok(k as u32)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradingParams {
    pub delta: f64,
    pub p: u32,
    pub d: u32,
    pub gamma: f64,
    pub singular_points: Vec<Point>,
    pub k: u32,
}

impl GradingParams {
    pub fn new(delta: f64, p: u32, d: u32, gamma: f64, singular_points: Vec<Point>) -> Result<Self> {
        let k = compute_k(delta, gamma, p, d)?;
        Ok(Self {
            delta,
            p,
            d,
            gamma,
            singular_points,
            k,
        })
    }

    /// Derives `γ` from the singular terms: `min γᵢ / 2`, or `min γᵢ` when
    /// `sharp` is set, which requires every log power `kᵢ` to be zero.
    /// Without terms the second loop never marks anything and `γ = 1`.
    pub fn from_terms(delta: f64, p: u32, terms: &[SingularTerm], sharp: bool) -> Result<Self> {
        if sharp && terms.iter().any(|t| t.log_power > 0) {
            return Err(Error::InvalidParameter(
                "the sharp grading exponent requires all log powers to be zero".into(),
            ));
        }
        let min = terms.iter().map(|t| t.gamma).fold(f64::INFINITY, f64::min);
        let gamma = if terms.is_empty() {
            1.0
        } else if sharp {
            min
        } else {
            min / 2.0
        };
        let mut points: Vec<Point> = Vec::new();
        for t in terms {
            if !points.contains(&t.center) {
                points.push(t.center);
            }
        }
        Self::new(delta, p, 2, gamma, points)
    }

    /// `d(K+1)`, the index of the innermost ring.
    pub fn levels(&self) -> u32 {
        self.d * (self.k + 1)
    }

    /// `δ^d · 2^{2ℓ(γ-p-1)/(2p+d)}`: area bound at level `ℓ`.
    pub fn area_threshold(&self, level: u32) -> f64 {
        self.area_threshold_scaled(level, 1.0)
    }

    pub(crate) fn area_threshold_scaled(&self, level: u32, exponent_scale: f64) -> f64 {
        let (p, d) = (self.p as f64, self.d as f64);
        let exponent = 2.0 * level as f64 * (self.gamma - p - 1.0) / (2.0 * p + d);
        self.delta.powi(self.d as i32) * 2f64.powf(exponent_scale * exponent)
    }

    /// `2^{-ℓ/d}`: radius of `Ω_ℓ`.
    pub fn ring_radius(&self, level: u32) -> f64 {
        2f64.powf(-(level as f64) / self.d as f64)
    }

    /// Checks `#T₀ ≤ δ^{-d}` and that every singular point is a vertex of `T₀`.
    pub fn validate_for(&self, mesh: &Mesh) -> Result<()> {
        let limit = self.delta.powi(-(self.d as i32));
        if mesh.initial_count() as f64 > limit {
            return Err(Error::InvalidParameter(format!(
                "delta {} too large: the initial mesh has {} elements but delta^-d = {limit:.3}",
                self.delta,
                mesh.initial_count()
            )));
        }
        for x in &self.singular_points {
            let is_vertex = mesh.vertices()[..mesh.initial_vertex_count()]
                .iter()
                .any(|v| v.x == x[0] && v.y == x[1]);
            if !is_vertex {
                return Err(Error::InvalidParameter(format!(
                    "singular point ({}, {}) is not a vertex of the initial mesh",
                    x[0], x[1]
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoopId {
    First,
    Second,
}

impl LoopId {
    fn code(self) -> u8 {
        match self {
            LoopId::First => 1,
            LoopId::Second => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LedgerRow {
    pub loop_id: LoopId,
    /// `j` in the first loop, `ℓ` in the second.
    pub iter: u32,
    pub marks: usize,
    pub leaves_before: usize,
    pub leaves_after_refine: usize,
    pub leaves_after_complete: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComplexityLedger {
    pub initial_leaves: usize,
    pub rows: Vec<LedgerRow>,
}

pub const LEDGER_HEADER: &str =
    "loop,iter,marks,leaves_before,leaves_after_refine,leaves_after_complete";

impl ComplexityLedger {
    pub fn rows_of(&self, loop_id: LoopId) -> impl Iterator<Item = &LedgerRow> {
        self.rows.iter().filter(move |r| r.loop_id == loop_id)
    }

    pub fn total_marks(&self) -> usize {
        self.rows.iter().map(|r| r.marks).sum()
    }

    pub fn final_leaves(&self) -> usize {
        self.rows
            .last()
            .map_or(self.initial_leaves, |r| r.leaves_after_complete)
    }

    /// Rows violating `leaves_after_refine - leaves_before = marks`.
    pub fn identity_violations(&self) -> Vec<LedgerRow> {
        self.rows
            .iter()
            .filter(|r| r.leaves_after_refine != r.leaves_before + r.marks)
            .copied()
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{LEDGER_HEADER}").unwrap();
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{},{},{}",
                r.loop_id.code(),
                r.iter,
                r.marks,
                r.leaves_before,
                r.leaves_after_refine,
                r.leaves_after_complete
            )
            .unwrap();
        }
        s
    }

    /// Parses the CSV written by [`ComplexityLedger::to_csv`]; the initial
    /// leaf count is taken from the first row.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == LEDGER_HEADER => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header `{LEDGER_HEADER}`"),
                })
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |m: &str| Error::Parse {
                line: i + 1,
                message: m.to_string(),
            };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad("expected 6 fields"));
            }
            let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad("invalid integer"));
            let loop_id = match f[0].trim() {
                "1" => LoopId::First,
                "2" => LoopId::Second,
                _ => return Err(bad("loop must be 1 or 2")),
            };
            rows.push(LedgerRow {
                loop_id,
                iter: num(f[1])? as u32,
                marks: num(f[2])?,
                leaves_before: num(f[3])?,
                leaves_after_refine: num(f[4])?,
                leaves_after_complete: num(f[5])?,
            });
        }
        let initial_leaves = rows.first().map_or(0, |r| r.leaves_before);
        Ok(Self {
            initial_leaves,
            rows,
        })
    }
}

fn refine_and_complete(
    mesh: &mut Mesh,
    marks: &MarkSet,
    loop_id: LoopId,
    iter: u32,
) -> Result<LedgerRow> {
    let leaves_before = mesh.leaf_count();
    mesh.refine(marks)?;
    let leaves_after_refine = mesh.leaf_count();
    mesh.complete()?;
    Ok(LedgerRow {
        loop_id,
        iter,
        marks: marks.len(),
        leaves_before,
        leaves_after_refine,
        leaves_after_complete: mesh.leaf_count(),
    })
}

/// Global refinement until every leaf satisfies `h_T ≤ δ`.
///
/// The marking test `h_T > δ` is evaluated as `|T| > δ^d`. The final
/// iteration, which marks nothing, is recorded too.
pub fn first_loop(mesh: &mut Mesh, params: &GradingParams) -> Result<Vec<LedgerRow>> {
    let limit = params.delta.powi(params.d as i32);
    let mut rows = Vec::new();
    for j in 0.. {
        let marks: MarkSet = mesh.leaves().filter(|&t| mesh.area(t) > limit).collect();
        let row = refine_and_complete(mesh, &marks, LoopId::First, j)?;
        rows.push(row);
        if marks.is_empty() {
            break;
        }
    }
    Ok(rows)
}

/// Selective refinement by distance to the singular points, for
/// `ℓ = 1, …, d(K+1)-1`.
pub fn second_loop(mesh: &mut Mesh, params: &GradingParams) -> Result<Vec<LedgerRow>> {
    let mut rows = Vec::new();
    for level in 1..params.levels() {
        let radius = params.ring_radius(level);
        let limit = params.area_threshold(level);
        let marks: MarkSet = mesh
            .leaves()
            .filter(|&t| {
                mesh.area(t) > limit
                    && element_distance(mesh.corners(t), &params.singular_points) <= radius
            })
            .collect();
        rows.push(refine_and_complete(mesh, &marks, LoopId::Second, level)?);
    }
    Ok(rows)
}

#[derive(Clone, Debug)]
pub struct GradingRun {
    pub ledger: ComplexityLedger,
    pub first_loop: FirstLoopReport,
}

/// Runs both loops on a conforming, flag-compatible initial mesh.
pub fn grade(mesh: &mut Mesh, params: &GradingParams) -> Result<GradingRun> {
    params.validate_for(mesh)?;
    let initial_leaves = mesh.leaf_count();
    let max_initial_area = mesh.max_initial_area();
    let domain_area = mesh.domain_area();
    let mut rows = first_loop(mesh, params)?;
    let max_area = mesh.leaves().map(|t| mesh.area(t)).fold(0.0, f64::max);
    let first = verify_first_loop(&rows, params, domain_area, max_initial_area, max_area);
    // With no singular points the second loop cannot mark anything.
    if !params.singular_points.is_empty() {
        rows.extend(second_loop(mesh, params)?);
    }
    Ok(GradingRun {
        ledger: ComplexityLedger {
            initial_leaves,
            rows,
        },
        first_loop: first,
    })
}

/// For each leaf, the leaf of `coarse` that contains it, found through the
/// forest. Both meshes must share their bisection history up to `coarse`.
pub fn coarse_ancestor(mesh: &Mesh, coarse: &Mesh, leaf: usize) -> Option<usize> {
    let n = coarse.triangles().len();
    let mut cur = Some(leaf);
    while let Some(t) = cur {
        if t < n && coarse.is_leaf(t) {
            return Some(t);
        }
        cur = mesh.triangles()[t].parent;
    }
    None
}
