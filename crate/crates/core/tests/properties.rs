use gp_core::generators::{random_fixture, random_function, random_region};
use gp_core::green::{green_direct, green_series, transition};
use gp_core::io::{parse_function, parse_graph, write_function, write_graph};
use gp_core::operators::{grad_sq, inner, integral, kato_check, laplacian, laplacian_function, square_identity_check};
use gp_core::rng::SeedStream;
use gp_core::solvers::dirichlet_solve;
use gp_core::spectral::{lambda1, rayleigh, DirichletForm};
use gp_core::{Config, Edge, GraphFunction, Potential, WeightedGraph};
use proptest::prelude::*;

fn fixture(seed: u64) -> (WeightedGraph, SeedStream) {
    let mut rng = SeedStream::new(seed);
    let g = random_fixture(&mut rng, 40).unwrap();
    (g, rng)
}

fn scaled(g: &WeightedGraph, c: f64) -> WeightedGraph {
    WeightedGraph::with_vertices(g.vertices(), g.edges().map(|e| Edge::new(e.x, e.y, e.weight * c))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_is_linear(seed: u64, a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let (g, mut rng) = fixture(seed);
        let u = random_function(&g, &mut rng);
        let v = random_function(&g, &mut rng);
        let w = u.combine(a, &v, b).unwrap();
        for &x in g.vertices() {
            let lhs = laplacian(&g, &w, x).unwrap();
            let rhs = a * laplacian(&g, &u, x).unwrap() + b * laplacian(&g, &v, x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn laplacian_is_self_adjoint(seed: u64) {
        let (g, mut rng) = fixture(seed);
        let u = random_function(&g, &mut rng);
        let v = random_function(&g, &mut rng);
        let luv = inner(&g, &laplacian_function(&g, &u), &v).unwrap();
        let ulv = inner(&g, &u, &laplacian_function(&g, &v)).unwrap();
        prop_assert!((luv - ulv).abs() <= 1e-11 * (1.0 + luv.abs()));
    }

    #[test]
    fn divergence_theorem(seed: u64) {
        let (g, mut rng) = fixture(seed);
        let u = random_function(&g, &mut rng);
        let total = integral(&g, &laplacian_function(&g, &u), g.vertices()).unwrap();
        prop_assert!(total.abs() <= 1e-11);
        // Green's identity: ∫ uΔu = -½ Σ_x d_x |∇u|²(x)
        let energy: f64 = g.vertices().iter().map(|&x| g.degree(x).unwrap() * grad_sq(&g, &u, x).unwrap()).sum();
        let ulu = inner(&g, &u, &laplacian_function(&g, &u)).unwrap();
        prop_assert!((ulu + energy / 2.0).abs() <= 1e-11 * (1.0 + energy));
    }

    #[test]
    fn kato_inequalities_hold(seed: u64) {
        let (g, mut rng) = fixture(seed);
        let u = random_function(&g, &mut rng);
        let cfg = Config::default();
        let k = kato_check(&g, &u, &cfg).unwrap();
        prop_assert!(k.pass, "{k:?}");
        let l = square_identity_check(&g, &u, &cfg).unwrap();
        prop_assert!(l.pass, "{l:?}");
    }

    #[test]
    fn lambda1_decreases_with_domain(seed: u64) {
        let (g, mut rng) = fixture(seed);
        let big = random_region(&g, &mut rng, 20);
        let cfg = Config::default();
        let sub: Vec<_> = big[..big.len().div_ceil(2)].to_vec();
        let outer = g.region_from_interior(&big).unwrap();
        let l_big = lambda1(&DirichletForm::assemble(&outer, &Potential::Zero).unwrap(), &cfg).unwrap().lambda;
        for part in components(&g, &sub) {
            let inner_region = g.region_from_interior(&part).unwrap();
            let l_small = lambda1(&DirichletForm::assemble(&inner_region, &Potential::Zero).unwrap(), &cfg).unwrap().lambda;
            prop_assert!(l_small >= l_big - 1e-12, "{l_small} < {l_big}");
        }
    }

    #[test]
    fn lambda1_is_invariant_under_weight_scaling(seed: u64, c in 0.01..100.0f64) {
        let (g, mut rng) = fixture(seed);
        let s = random_region(&g, &mut rng, 20);
        let h = scaled(&g, c);
        let cfg = Config::default();
        let a = lambda1(&DirichletForm::assemble(&g.region_from_interior(&s).unwrap(), &Potential::Zero).unwrap(), &cfg).unwrap();
        let b = lambda1(&DirichletForm::assemble(&h.region_from_interior(&s).unwrap(), &Potential::Zero).unwrap(), &cfg).unwrap();
        prop_assert!((a.lambda - b.lambda).abs() <= 1e-10 * (1.0 + a.lambda));
    }

    #[test]
    fn rayleigh_quotient_is_minimised_by_eigenfunction(seed: u64, q in 0.0..2.0f64) {
        let (g, mut rng) = fixture(seed);
        let s = random_region(&g, &mut rng, 20);
        let region = g.region_from_interior(&s).unwrap();
        let form = DirichletForm::assemble(&region, &Potential::Constant(q)).unwrap();
        let pair = lambda1(&form, &Config::default()).unwrap();
        let at_eigen = rayleigh(&form, &pair.eigenfunction).unwrap();
        prop_assert!((at_eigen - pair.lambda).abs() <= 1e-10 * (1.0 + pair.lambda));
        let trial = GraphFunction::from_fn(region.interior(), |_| rng.uniform_in(0.1, 1.0));
        prop_assert!(rayleigh(&form, &trial).unwrap() >= pair.lambda - 1e-12);
    }

    #[test]
    fn maximum_principle(seed: u64) {
        let (g, mut rng) = fixture(seed);
        let s = random_region(&g, &mut rng, 20);
        let region = g.region_from_interior(&s).unwrap();
        let bc = GraphFunction::from_fn(region.boundary(), |_| rng.uniform_in(-1.0, 1.0));
        let f = GraphFunction::constant(region.interior(), 0.0);
        let cfg = Config::default();
        let u = dirichlet_solve(&region, &Potential::Zero, &f, &bc, &cfg).unwrap();
        let lo = bc.iter().map(|(_, v)| v).fold(f64::INFINITY, f64::min);
        let hi = bc.iter().map(|(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
        for x in region.interior() {
            let v = u.get(x).unwrap();
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }

    #[test]
    fn green_kernel_is_symmetric_and_routes_agree(seed: u64) {
        let (g, mut rng) = fixture(seed);
        let s = random_region(&g, &mut rng, 20);
        let region = g.region_from_interior(&s).unwrap();
        let cfg = Config::default();
        let direct = green_direct(&region, &cfg).unwrap();
        let series = green_series(&region, cfg.series_max_terms, cfg.series_tol, &cfg).unwrap();
        prop_assert!(series.is_converged());
        prop_assert!((series.green().matrix() - direct.matrix()).abs().max() <= 1e-10);
        for &x in &s {
            for &y in &s {
                let a = direct.kernel(x, y).unwrap();
                let b = direct.kernel(y, x).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
        prop_assert!(direct.identity_residual(&transition(&region).unwrap()) <= 1e-10);
    }

    #[test]
    fn graph_round_trip(seed: u64) {
        let (g, mut rng) = fixture(seed);
        let back = parse_graph(&write_graph(&g)).unwrap();
        prop_assert_eq!(back.vertices(), g.vertices());
        let a: Vec<Edge> = g.edges().collect();
        let b: Vec<Edge> = back.edges().collect();
        prop_assert_eq!(a, b);
        let u = random_function(&g, &mut rng);
        prop_assert_eq!(parse_function(&write_function(&u)).unwrap(), u);
    }
}

/// Connected pieces of `part` in the subgraph it induces.
fn components(g: &WeightedGraph, part: &[u64]) -> Vec<Vec<u64>> {
    let mut left: Vec<u64> = part.to_vec();
    let mut out = Vec::new();
    while let Some(start) = left.pop() {
        let mut comp = vec![start];
        let mut i = 0;
        while i < comp.len() {
            for (y, _) in g.neighbors(comp[i]).unwrap() {
                if let Some(k) = left.iter().position(|&z| z == y) {
                    comp.push(left.swap_remove(k));
                }
            }
            i += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}
