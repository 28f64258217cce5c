use std::f64::consts::{FRAC_PI_2, PI, TAU};

use gradmesh::error_analysis::{h1_error, ring_index, ErrorOptions, QuadratureRule};
use gradmesh::field::{Problem, RegularPart};
use gradmesh::grading::verify::distance_monotonicity_violations;
use gradmesh::grading::{compute_k, point_triangle_distance, rate_exponent};
use gradmesh::mesh::io::{from_text, to_text};
use gradmesh::mesh::{initial_mesh, DomainPreset, MarkSet, Mesh};
use gradmesh::singular::{check_constraints, kellogg_mu, kellogg_solve};
use proptest::prelude::*;

fn preset() -> impl Strategy<Value = DomainPreset> {
    prop_oneof![
        Just(DomainPreset::Square),
        Just(DomainPreset::LShape),
        Just(DomainPreset::Slit),
        Just(DomainPreset::CenteredSquare),
    ]
}

/// Picks leaves by position so the choices stay valid as the mesh grows.
fn marks_from(mesh: &Mesh, picks: &[prop::sample::Index]) -> MarkSet {
    let leaves = mesh.leaf_ids();
    picks.iter().map(|i| leaves[i.index(leaves.len())]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refine_complete_invariants(
        preset in preset(),
        rounds in prop::collection::vec(prop::collection::vec(any::<prop::sample::Index>(), 1..5), 1..14),
    ) {
        let mut mesh = initial_mesh(&preset).unwrap();
        let area = mesh.total_area();
        let bound = mesh.similarity_class_min_angle();
        for picks in &rounds {
            let marks = marks_from(&mesh, picks);
            let before = mesh.leaf_count();
            prop_assert_eq!(mesh.refine(&marks).unwrap(), marks.len());
            prop_assert_eq!(mesh.leaf_count(), before + marks.len());
            mesh.complete().unwrap();
            prop_assert!(mesh.is_conforming());
            prop_assert!(mesh.edge_map_is_consistent());
            prop_assert_eq!(mesh.complete().unwrap(), 0);
            prop_assert!((mesh.total_area() - area).abs() <= 1e-12 * area);
            prop_assert!(mesh.min_angle() >= bound - 1e-12);
        }
        for (i, t) in mesh.triangles().iter().enumerate() {
            if let Some([a, b]) = t.children {
                let half = 0.5 * mesh.area(i);
                prop_assert!((mesh.area(a) - half).abs() <= 1e-14 * half);
                prop_assert!((mesh.area(b) - half).abs() <= 1e-14 * half);
                prop_assert_eq!(mesh.triangles()[a].generation, t.generation + 1);
            }
        }
    }

    #[test]
    fn text_format_round_trips(
        preset in preset(),
        rounds in prop::collection::vec(prop::collection::vec(any::<prop::sample::Index>(), 1..4), 0..6),
    ) {
        let mut mesh = initial_mesh(&preset).unwrap();
        for picks in &rounds {
            mesh.refine(&marks_from(&mesh, picks)).unwrap();
            mesh.complete().unwrap();
        }
        let text = to_text(&mesh);
        let back = from_text(&text).unwrap();
        prop_assert_eq!(to_text(&back), text);
    }

    #[test]
    fn compute_k_satisfies_both_inequalities(
        delta in 1e-4f64..0.999,
        gamma in 0.01f64..2.0,
        p in 1u32..5,
        d in 2u32..4,
    ) {
        let e = rate_exponent(gamma, p, d);
        let k = compute_k(delta, gamma, p, d).unwrap() as f64;
        prop_assert!(2f64.powf(-(k + 1.0) * e) <= delta * (1.0 + 1e-12));
        prop_assert!(delta < 2f64.powf(-k * e) * (1.0 + 1e-12));
    }

    #[test]
    fn distance_is_exact_and_bounded(
        tri in prop::array::uniform3(prop::array::uniform2(-2.0f64..2.0)),
        p in prop::array::uniform2(-3.0f64..3.0),
        w in prop::array::uniform3(0.0f64..1.0),
    ) {
        let area = (tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1])
            - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]);
        prop_assume!(area.abs() > 1e-3);
        let d = point_triangle_distance(p, tri);
        prop_assert!(d >= 0.0);
        // No point of the triangle is closer than d.
        let s = w[0] + w[1] + w[2] + 1e-12;
        let q = [
            (w[0] * tri[0][0] + w[1] * tri[1][0] + w[2] * tri[2][0]) / s,
            (w[0] * tri[0][1] + w[1] * tri[1][1] + w[2] * tri[2][1]) / s,
        ];
        prop_assert!((q[0] - p[0]).hypot(q[1] - p[1]) >= d - 1e-12);
        prop_assert!(point_triangle_distance(q, tri) <= 1e-12);
    }

    #[test]
    fn rings_are_monotone_in_distance(a in 0.0f64..1.5, b in 0.0f64..1.5, k in 0u32..12) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(ring_index(lo, k, 2) >= ring_index(hi, k, 2));
        prop_assert!(ring_index(lo, k, 2) <= 2 * (k + 1));
    }

    #[test]
    fn quadrature_exact_on_random_polynomials(
        coeffs in prop::collection::vec(-1.0f64..1.0, 28),
    ) {
        // Degree-6 polynomial on a physical triangle, against a higher rule.
        let tri = [[0.1, -0.2], [1.3, 0.4], [-0.2, 0.9]];
        let f = |x: [f64; 2]| {
            let mut v = 0.0;
            let mut n = 0;
            for i in 0..=6 {
                for j in 0..=(6 - i) {
                    v += coeffs[n] * x[0].powi(i) * x[1].powi(j);
                    n += 1;
                }
            }
            [v]
        };
        let a = QuadratureRule::symmetric_degree_6().integrate(tri, f)[0];
        let b = QuadratureRule::collapsed_gauss(14).integrate(tri, f)[0];
        prop_assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
    }

    #[test]
    fn polynomials_are_reproduced(
        p in 1u32..4,
        coeffs in prop::collection::vec(-1.0f64..1.0, 10),
    ) {
        let mut terms = Vec::new();
        let mut n = 0;
        for i in 0..=p {
            for j in 0..=(p - i) {
                terms.push((coeffs[n], i, j));
                n += 1;
            }
        }
        let mut mesh = initial_mesh(&DomainPreset::LShape).unwrap();
        mesh.refine(&MarkSet::from_iter([0, 2, 4])).unwrap();
        mesh.complete().unwrap();
        let u = Problem::new(RegularPart::polynomial(&terms), vec![]);
        let r = h1_error(&mesh, p, &u, &ErrorOptions::default()).unwrap();
        prop_assert!(r.total < 1e-12);
    }

    #[test]
    fn parent_child_distances_are_monotone(
        x in prop::array::uniform2(-1.2f64..1.2),
        rounds in prop::collection::vec(prop::collection::vec(any::<prop::sample::Index>(), 1..4), 1..8),
    ) {
        let mut mesh = initial_mesh(&DomainPreset::LShape).unwrap();
        for picks in &rounds {
            mesh.refine(&marks_from(&mesh, picks)).unwrap();
            mesh.complete().unwrap();
        }
        prop_assert!(distance_monotonicity_violations(&mesh, &[x]).is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kellogg_solutions_are_consistent(gamma in 0.05f64..1.0) {
        let sol = kellogg_solve(gamma).unwrap();
        prop_assert!(sol.residual < 1e-10);
        check_constraints(&sol).unwrap();
        for b in [FRAC_PI_2, PI, 1.5 * PI] {
            let jump = kellogg_mu(b - 1e-12, &sol) - kellogg_mu(b + 1e-12, &sol);
            prop_assert!(jump.abs() < 1e-9);
        }
        prop_assert!((kellogg_mu(0.0, &sol) - kellogg_mu(TAU - 1e-12, &sol)).abs() < 1e-9);
    }
}
