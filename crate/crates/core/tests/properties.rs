use std::f64::consts::PI;

use graphnls::asymptotics::{build_barrier, maximum_principle_check, MaxPrincipleClass};
use graphnls::coeff::Coefficient;
use graphnls::graph::{four_star, interval, load_graph, star_graph, tadpole, three_bridge, EdgeId, GraphDocument, GraphPoint};
use graphnls::morse::{default_morse_h, morse_index};
use graphnls::nls::{
    build_four_star_family, build_line_soliton, build_three_bridge_eigenfunction, count_nodal_zones,
    weak_residual_battery, FourStarVariant,
};
use graphnls::ode::{integrate, soliton, soliton_state, Tolerance};
use graphnls::spectral::eigenvalues;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn three_bridge_index_is_3k_minus_2(k in 1u32..=3, b in 0.2f64..3.0, flip in any::<bool>()) {
        let b = if flip { -b } else { b };
        let ex = build_three_bridge_eigenfunction(k, [0.0, b, -b, 0.0]).unwrap();
        let (g, c) = (&ex.graph, &ex.candidate);
        prop_assert!(c.report().passes(1e-9), "{:?}", c.report());
        let m = morse_index(g, c, default_morse_h(g, c.lambda()), None).unwrap();
        prop_assert_eq!(m.index, 3 * k as usize - 2);
        let nodal = count_nodal_zones(g, c.u(), &c.prob().rho);
        prop_assert!(nodal.outside_g0 <= m.index);
        prop_assert!(weak_residual_battery(g, c, 20, k as u64).unwrap() <= 1e-6);
    }

    #[test]
    fn four_star_families_are_unstable(lambda in 30.0f64..400.0, near in any::<bool>()) {
        let variant = if near { FourStarVariant::Near } else { FourStarVariant::Far };
        let ex = build_four_star_family(4.0, lambda, variant).unwrap();
        let (g, c) = (&ex.graph, &ex.candidate);
        let m = morse_index(g, c, default_morse_h(g, lambda), None).unwrap();
        let nodal = count_nodal_zones(g, c.u(), &c.prob().rho);
        prop_assert!(m.index >= 1);
        prop_assert!(nodal.outside_g0 <= m.index, "{} > {}", nodal.outside_g0, m.index);
    }

    #[test]
    fn barrier_satisfies_maximum_principle(lambda in 2e3f64..1e4, s in 0.35f64..0.65, edge in 0usize..3) {
        let g = three_bridge();
        let center = GraphPoint::new(&g, EdgeId(edge), s).unwrap();
        let b = build_barrier(&g, lambda, &[center], 8.0).unwrap();
        prop_assert!(b.report.all(), "{:?}", b.report);
        let (sub, phi) = b.to_graph_function(&g, 200).unwrap();
        let w = Coefficient::constant(&sub, lambda / 2.0);
        prop_assert_eq!(maximum_principle_check(&sub, &w, &phi), MaxPrincipleClass::Nonneg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn integrated_soliton_follows_closed_form(p in 2.5f64..8.0, lambda in 0.2f64..20.0) {
        let init = soliton_state(p, lambda, 0.0).unwrap();
        let len = 6.0 / lambda.sqrt();
        let traj = integrate(
            |_, u| lambda * u - u.abs().powf(p - 2.0) * u,
            0.0,
            init,
            len,
            Tolerance::default(),
        )
        .unwrap();
        let peak = init.u;
        for j in 0..=100 {
            let x = len * j as f64 / 100.0;
            let exact = soliton(p, lambda, x).unwrap();
            prop_assert!((traj.eval(x).u - exact).abs() <= 1e-7 * peak, "x = {x}");
        }
    }

    #[test]
    fn soliton_candidates_solve_the_weak_form(p in 2.5f64..8.0, lambda in 0.5f64..50.0) {
        let ex = build_line_soliton(p, lambda).unwrap();
        prop_assert!(ex.candidate.report().passes(1e-8), "{:?}", ex.candidate.report());
        prop_assert!(weak_residual_battery(&ex.graph, &ex.candidate, 20, 1).unwrap() <= 1e-6);
    }

    #[test]
    fn graph_documents_round_trip(k in 1usize..6, len in 0.1f64..10.0, which in 0usize..4) {
        let g = match which {
            0 => star_graph(k).unwrap(),
            1 => tadpole(len, k).unwrap(),
            2 => interval(len).unwrap(),
            _ => four_star(),
        };
        let back = load_graph(&GraphDocument::from_graph(&g).to_json()).unwrap();
        prop_assert_eq!(back.vertex_count(), g.vertex_count());
        prop_assert_eq!(back.edge_count(), g.edge_count());
        for (a, b) in g.edges().iter().zip(back.edges()) {
            prop_assert_eq!(a.length, b.length);
            prop_assert_eq!(&a.name, &b.name);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn interval_spectrum_is_neumann(len in 0.5f64..4.0) {
        let g = interval(len).unwrap();
        let cells = 1000;
        let h = len / cells as f64;
        let s = eigenvalues(&g, &Coefficient::constant(&g, 0.0), 5, h).unwrap();
        for (k, v) in s.values.iter().enumerate() {
            let c = (k as f64 * PI / cells as f64).cos();
            let discrete = 6.0 / (h * h) * (1.0 - c) / (2.0 + c);
            prop_assert!((v - discrete).abs() <= 1e-8 * discrete.max(1.0), "{k}: {v} vs {discrete}");
            let exact = (k as f64 * PI / len).powi(2);
            prop_assert!(*v >= exact - 1e-9);
        }
    }
}
