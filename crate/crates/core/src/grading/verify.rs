//! Runtime checks of the complexity and grading bounds.

use rayon::prelude::*;

use super::{element_distance, rate_exponent, ComplexityLedger, GradingParams, LedgerRow, LoopId};
use crate::mesh::Mesh;

#[derive(Clone, Debug, PartialEq)]
pub struct FirstLoopReport {
    /// Iterations that marked at least one element.
    pub rounds: usize,
    /// `log2(max_{T∈T₀} |T| / δ^d) + 1`.
    pub rounds_bound: f64,
    pub total_marks: usize,
    /// `2|Ω| δ^{-d}`.
    pub marks_bound: f64,
    pub max_area: f64,
    pub area_limit: f64,
}

impl FirstLoopReport {
    pub fn passed(&self) -> bool {
        self.rounds as f64 <= self.rounds_bound + 1e-12
            && self.total_marks as f64 <= self.marks_bound
            && self.max_area <= self.area_limit * (1.0 + 1e-12)
    }
}

/// Termination, marked-count and size bounds of the first loop.
///
/// The exit condition is checked in the non-strict form `|T| ≤ δ^d`: the
/// marking predicate `h_T > δ` leaves elements with `h_T = δ` alone.
pub fn verify_first_loop(
    rows: &[LedgerRow],
    params: &GradingParams,
    domain_area: f64,
    max_initial_area: f64,
    max_area: f64,
) -> FirstLoopReport {
    let area_limit = params.delta.powi(params.d as i32);
    let first = rows.iter().filter(|r| r.loop_id == LoopId::First);
    FirstLoopReport {
        rounds: first.clone().filter(|r| r.marks > 0).count(),
        rounds_bound: (max_initial_area / area_limit).log2().max(0.0) + 1.0,
        total_marks: first.map(|r| r.marks).sum(),
        marks_bound: 2.0 * domain_area / area_limit,
        max_area,
        area_limit,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SizeViolation {
    pub element: usize,
    pub level: u32,
    pub distance: f64,
    pub area: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SizeLemmaReport {
    pub leaves_checked: usize,
    pub levels: u32,
    pub violations: Vec<SizeViolation>,
}

impl SizeLemmaReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("element,level,distance,area,threshold\n");
        for v in &self.violations {
            s.push_str(&format!(
                "{},{},{:.16e},{:.16e},{:.16e}\n",
                v.element, v.level, v.distance, v.area, v.threshold
            ));
        }
        s
    }
}

/// For every leaf and every `0 ≤ ℓ ≤ d(K+1)`: `r_T < 2^{-ℓ/d}` implies
/// `|T| < δ^d 2^{2ℓ(γ-p-1)/(2p+d)}`.
pub fn verify_size_lemma(mesh: &Mesh, params: &GradingParams) -> SizeLemmaReport {
    verify_size_lemma_scaled(mesh, params, 1.0)
}

/// Same check with the threshold exponent multiplied by `exponent_scale`.
/// Scales above one tighten the bound and serve as a negative control.
pub fn verify_size_lemma_scaled(
    mesh: &Mesh,
    params: &GradingParams,
    exponent_scale: f64,
) -> SizeLemmaReport {
    let levels = params.levels();
    let leaves = mesh.leaf_ids();
    let violations = leaves
        .par_iter()
        .flat_map_iter(|&t| {
            let r = element_distance(mesh.corners(t), &params.singular_points);
            let area = mesh.area(t);
            (0..=levels).filter_map(move |level| {
                let threshold = params.area_threshold_scaled(level, exponent_scale);
                (r < params.ring_radius(level) && !(area < threshold)).then_some(SizeViolation {
                    element: t,
                    level,
                    distance: r,
                    area,
                    threshold,
                })
            })
        })
        .collect();
    SizeLemmaReport {
        leaves_checked: leaves.len(),
        levels,
        violations,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkedBoundReport {
    /// `(ℓ, c_ℓ)` with `c_ℓ = #M_ℓ δ^d 2^{ℓ(2γ+d-2)/(2p+d)}`.
    pub constants: Vec<(u32, f64)>,
    pub max_constant: f64,
    /// `(#T - #T₀) δ^d`.
    pub total_constant: f64,
}

/// Empirical constants of the marked-count bound of the second loop and of
/// the total complexity bound.
pub fn verify_marked_bound(ledger: &ComplexityLedger, params: &GradingParams) -> MarkedBoundReport {
    let e = rate_exponent(params.gamma, params.p, params.d);
    let scale = params.delta.powi(params.d as i32);
    let constants: Vec<(u32, f64)> = ledger
        .rows_of(LoopId::Second)
        .map(|r| (r.iter, r.marks as f64 * scale * 2f64.powf(r.iter as f64 * e)))
        .collect();
    let max_constant = constants.iter().map(|c| c.1).fold(0.0, f64::max);
    let added = ledger.final_leaves() as f64 - ledger.initial_leaves as f64;
    MarkedBoundReport {
        constants,
        max_constant,
        total_constant: added * scale,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BddReport {
    pub added: usize,
    pub total_marks: usize,
    /// `(#T_final - #T₀) / Σ #M`, zero when nothing was marked.
    pub ratio: f64,
}

/// Ratio of elements created (marks plus completion) to elements marked.
pub fn bdd_ledger_check(ledger: &ComplexityLedger) -> BddReport {
    let added = ledger.final_leaves() - ledger.initial_leaves;
    let total_marks = ledger.total_marks();
    BddReport {
        added,
        total_marks,
        ratio: if total_marks == 0 {
            0.0
        } else {
            added as f64 / total_marks as f64
        },
    }
}

/// Parent/child pairs `(child, parent)` whose distances violate
/// `T ⊂ T' ⟹ r_T ≥ r_{T'}`.
pub fn distance_monotonicity_violations(mesh: &Mesh, points: &[[f64; 2]]) -> Vec<(usize, usize)> {
    mesh.triangles()
        .iter()
        .enumerate()
        .filter_map(|(i, t)| {
            let parent = t.parent?;
            let rc = element_distance(mesh.corners(i), points);
            let rp = element_distance(mesh.corners(parent), points);
            // Points on a shared edge can land a rounding error outside the
            // child; that is not a real decrease.
            let slack = 1e-12 * mesh.element_size(parent);
            (rc < rp - slack).then_some((i, parent))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::{first_loop, grade};
    use crate::mesh::{initial_mesh, DomainPreset};

    fn l_shape_params(delta: f64) -> GradingParams {
        GradingParams::new(delta, 1, 2, 1.0 / 3.0, vec![[0.0, 0.0]]).unwrap()
    }

    #[test]
    fn square_first_loop_rounds_within_bound() {
        let mut m = initial_mesh(&DomainPreset::Square).unwrap();
        let params = GradingParams::new(0.3, 1, 2, 1.0, vec![]).unwrap();
        let rows = first_loop(&mut m, &params).unwrap();
        let max_area = m.leaves().map(|t| m.area(t)).fold(0.0, f64::max);
        let report = verify_first_loop(&rows, &params, 1.0, 0.5, max_area);
        assert!((report.rounds_bound - ((0.5f64 / 0.09).log2() + 1.0)).abs() < 1e-12);
        assert!(report.rounds <= 3);
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn l_shape_first_loop_marks_bounded() {
        let mut m = initial_mesh(&DomainPreset::LShape).unwrap();
        let run = grade(&mut m, &l_shape_params(0.1)).unwrap();
        assert_eq!(run.first_loop.marks_bound.round(), 600.0);
        assert!(run.first_loop.passed(), "{:?}", run.first_loop);
    }

    #[test]
    fn graded_l_shape_satisfies_size_lemma() {
        let mut m = initial_mesh(&DomainPreset::LShape).unwrap();
        let params = l_shape_params(0.2);
        grade(&mut m, &params).unwrap();
        assert!(m.is_conforming());
        let report = verify_size_lemma(&m, &params);
        assert!(report.passed(), "{:?}", &report.violations[..report.violations.len().min(5)]);
        assert!(!verify_size_lemma_scaled(&m, &params, 1.1).passed());
    }

    #[test]
    fn level_zero_is_first_loop_post() {
        let params = l_shape_params(0.2);
        assert_eq!(params.area_threshold(0), 0.2f64.powi(2));
    }

    #[test]
    fn no_marks_gives_zero_constants() {
        let ledger = ComplexityLedger {
            initial_leaves: 6,
            rows: vec![LedgerRow {
                loop_id: LoopId::Second,
                iter: 1,
                marks: 0,
                leaves_before: 6,
                leaves_after_refine: 6,
                leaves_after_complete: 6,
            }],
        };
        let report = verify_marked_bound(&ledger, &l_shape_params(0.4));
        assert_eq!(report.constants, vec![(1, 0.0)]);
        assert_eq!(bdd_ledger_check(&ledger).ratio, 0.0);
    }

    #[test]
    fn uniform_first_loop_bdd_ratio_at_most_two() {
        for preset in [DomainPreset::Square, DomainPreset::LShape, DomainPreset::Slit] {
            let mut m = initial_mesh(&preset).unwrap();
            let params = GradingParams::new(0.05, 1, 2, 1.0, vec![]).unwrap();
            let run = grade(&mut m, &params).unwrap();
            let bdd = bdd_ledger_check(&run.ledger);
            assert!(bdd.ratio > 0.0 && bdd.ratio <= 2.0, "{preset:?}: {bdd:?}");
        }
    }

    #[test]
    fn distances_grow_under_refinement() {
        let mut m = initial_mesh(&DomainPreset::LShape).unwrap();
        let params = l_shape_params(0.2);
        grade(&mut m, &params).unwrap();
        assert!(distance_monotonicity_violations(&m, &params.singular_points).is_empty());
        assert!(distance_monotonicity_violations(&m, &[[0.3, 0.4]]).is_empty());
    }
}
