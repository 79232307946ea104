mod common;

use common::*;
use mexp_core::cheeger::{asymptotic_profile, cheeger_conductance, cheeger_vertex};
use mexp_core::poincare::{lp_energy_ratio, mean_zero_identity, PoincareForm};
use mexp_core::rational::{int, ratio, Rational};
use mexp_core::spectral::{delta_operator, lambda_operator, SpectralConfig};
use mexp_core::theorems::{self, VerifyConfig};
use mexp_core::walk::{heat_kernel_measure, verify_auxiliary_conditions};
use mexp_core::{EnumerationConfig, Error, MeasuredGraph, ReversibleWalk, VertexSubset};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn cfg() -> EnumerationConfig {
    EnumerationConfig::default()
}

fn subsets(n: usize) -> impl Iterator<Item = VertexSubset> {
    (0..1u64 << n).map(move |mask| VertexSubset::from_mask(n, mask))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn boundaries_are_consistent(n in 1usize..=9, seed in any::<u64>()) {
        let g = any_graph(n, &mut rng(seed));
        for a in subsets(n) {
            let vb = g.vertex_boundary(&a);
            prop_assert!(vb.is_disjoint(&a));
            for r in 1..=3 {
                prop_assert!(vb.is_subset(&g.r_boundary(&a, r).unwrap()));
            }
            prop_assert_eq!(g.edge_boundary(&a), g.edge_boundary(&a.complement()));
        }
    }

    #[test]
    fn hop_distance_is_a_metric(n in 1usize..=10, seed in any::<u64>()) {
        let g = any_graph(n, &mut rng(seed));
        let d = g.all_distances();
        let (comp, _) = g.components();
        for x in 0..n {
            for y in 0..n {
                prop_assert_eq!(d[x][y].is_some(), comp[x] == comp[y]);
                prop_assert_eq!(d[x][y], d[y][x]);
                prop_assert_eq!(d[x][y] == Some(0), x == y);
                for z in 0..n {
                    if let (Some(a), Some(b), Some(c)) = (d[x][z], d[x][y], d[y][z]) {
                        prop_assert!(a <= b + c);
                    }
                }
            }
        }
    }

    #[test]
    fn ratio_bound_is_sharp(n in 2usize..=10, seed in any::<u64>()) {
        let g = connected_graph(n, &mut rng(seed));
        let s = g.stats().ratio_bound.unwrap();
        let mut tight = false;
        for (u, v) in g.edges() {
            for (a, b) in [(u, v), (v, u)] {
                prop_assert!(&s * g.m(a) <= *g.m(b));
                tight |= &s * g.m(a) == *g.m(b);
            }
        }
        prop_assert!(tight);
    }

    #[test]
    fn walks_are_reversible(n in 2usize..=9, seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = connected_graph(n, &mut r);
        let walk = random_walk(&g, &mut r);
        prop_assert!(walk.check_invariants());
        let aux = ReversibleWalk::auxiliary(&g).unwrap();
        let by_formula = ReversibleWalk::from_conductance(&g, |u, v| Some(g.m(u) + g.m(v))).unwrap();
        prop_assert_eq!(aux, by_formula);
    }

    #[test]
    fn edge_area_is_bounded_by_vertex_boundary(n in 2usize..=10, seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = connected_graph(n, &mut r);
        let walk = random_walk(&g, &mut r);
        for a in subsets(n) {
            let area = walk.area(&g.edge_boundary(&a));
            let outer: Rational = g.vertex_boundary(&a).iter().map(|v| &walk.stationary()[v]).sum();
            prop_assert!(area <= outer);
        }
        let with_mu = g.with_measure(walk.stationary().to_vec()).unwrap();
        let conductance = cheeger_conductance(&walk, walk.stationary(), &cfg()).unwrap().value;
        prop_assert!(conductance <= cheeger_vertex(&with_mu, &cfg()).unwrap().value);
    }

    #[test]
    fn heat_kernel_is_a_matrix_power(n in 2usize..=8, steps in 0usize..6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = connected_graph(n, &mut r);
        let start = r.random_range(0..n);
        let got = heat_kernel_measure(&g, start, steps).unwrap();
        // Dense row-stochastic matrix P, then e_start · P^steps.
        let p: Vec<Vec<Rational>> = (0..n)
            .map(|u| (0..n).map(|v| {
                if g.has_edge(u, v) { ratio(1, g.valency(u) as i64) } else { Rational::zero() }
            }).collect())
            .collect();
        let mut power: Vec<Vec<Rational>> = (0..n)
            .map(|u| (0..n).map(|v| if u == v { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        for _ in 0..steps {
            power = (0..n)
                .map(|u| (0..n).map(|v| (0..n).map(|k| &power[u][k] * &p[k][v]).sum()).collect())
                .collect();
        }
        prop_assert_eq!(got, power[start].clone());
    }

    #[test]
    fn cheeger_is_scale_invariant(n in 2usize..=9, num in 1i64..50, den in 1i64..50, seed in any::<u64>()) {
        let g = connected_graph(n, &mut rng(seed));
        let k = ratio(num, den);
        let scaled = g.with_measure(g.measure().iter().map(|x| x * &k).collect()).unwrap();
        prop_assert_eq!(
            cheeger_vertex(&g, &cfg()).unwrap().value,
            cheeger_vertex(&scaled, &cfg()).unwrap().value
        );
    }

    #[test]
    fn cheeger_positive_iff_support_connected(n in 2usize..=9, seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = any_graph(n, &mut r);
        let mut m = g.measure().to_vec();
        for x in m.iter_mut() {
            if r.random_bool(0.3) {
                *x = Rational::zero();
            }
        }
        if m.iter().all(Zero::is_zero) {
            m[0] = int(1);
        }
        let g = g.with_measure(m).unwrap();
        let support = g.support();
        let restricted = g.induced_subgraph(&support).unwrap();
        match cheeger_vertex(&g, &cfg()) {
            Ok(cert) => {
                prop_assert_eq!(cert.value > Rational::zero(), restricted.is_connected());
                prop_assert_eq!(cert.value, cheeger_vertex(&restricted, &cfg()).unwrap().value);
            }
            Err(Error::NoFeasibleSubset) => {
                prop_assert!(cheeger_vertex(&restricted, &cfg()).is_err());
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn profile_is_monotone(n in 3usize..=9, seed in any::<u64>()) {
        let g = connected_graph(n, &mut rng(seed));
        let alphas = [ratio(1, 2), ratio(1, 3), ratio(1, 8)];
        let prof = asymptotic_profile(&g, &alphas, &cfg()).unwrap();
        let cell = |a: &Rational, r: usize| prof.iter().find(|e| &e.alpha == a && e.radius == r).unwrap().value.clone();
        for a in &alphas {
            for r in 1..g.diameter() {
                if let (Some(x), Some(y)) = (cell(a, r), cell(a, r + 1)) {
                    prop_assert!(x <= y);
                }
            }
        }
        for r in 1..=g.diameter() {
            for w in alphas.windows(2) {
                if let (Some(x), Some(y)) = (cell(&w[0], r), cell(&w[1], r)) {
                    prop_assert!(y <= x);
                }
            }
        }
    }

    #[test]
    fn spectra_are_consistent(n in 2usize..=10, seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = any_graph(n, &mut r);
        if (0..n).any(|v| g.valency(v) == 0) {
            return Ok(());
        }
        let walk = random_walk(&g, &mut r);
        let op = delta_operator(&walk);
        let spec = op.spectrum(&SpectralConfig::default()).unwrap();
        let (comp, count) = g.components();
        prop_assert_eq!(spec.zero_multiplicity, count);
        for (lambda, v) in spec.eigenvalues.iter().zip(&spec.eigenvectors) {
            prop_assert!(*lambda > -1e-9 && *lambda < 2.0 + 1e-9);
            let lv = op.stiffness.mul_vec(v);
            let residual: f64 = lv.iter().zip(v).zip(&op.mass)
                .map(|((l, x), m)| (l - lambda * m * x).powi(2)).sum::<f64>().sqrt();
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!(residual <= 1e-8 * norm.max(1.0));
            if *lambda < 1e-9 {
                for c in 0..count {
                    let vals: Vec<f64> = (0..n).filter(|&u| comp[u] == c).map(|u| v[u]).collect();
                    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                    let var = vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / vals.len() as f64;
                    prop_assert!(var < 1e-9);
                }
            }
        }
    }

    #[test]
    fn measured_gap_is_the_best_constant(n in 2usize..=9, seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = connected_graph(n, &mut r);
        let op = lambda_operator(&g).unwrap();
        let spec = op.spectrum(&SpectralConfig::default()).unwrap();
        let gap = spec.gap.unwrap();
        let m: Vec<f64> = g.measure().iter().map(mexp_core::rational::to_f64).collect();
        let total: f64 = m.iter().sum();
        for _ in 0..20 {
            let mut f: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
            let mean = f.iter().zip(&m).map(|(x, w)| x * w).sum::<f64>() / total;
            f.iter_mut().for_each(|x| *x -= mean);
            prop_assert!(op.quadratic_form(&f) >= gap * op.mass_norm_sq(&f) * (1.0 - 1e-9));
        }
        let v = spec.gap_vector().unwrap();
        prop_assert!(op.quadratic_form(v) < gap * (1.0 + 1e-6) * op.mass_norm_sq(v));
    }

    #[test]
    fn energy_conventions_agree(n in 2usize..=9, p in 1.0f64..4.0, seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = connected_graph(n, &mut r);
        let walk = random_walk(&g, &mut r);
        let form = PoincareForm::from_walk(&walk);
        let f: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
        let e = form.edge_energy(&f, p);
        prop_assert!((form.ordered_energy(&f, p) - 2.0 * e).abs() <= 1e-12 * e.max(1.0));
    }

    #[test]
    fn vector_energy_obeys_the_gap(n in 2usize..=9, d in 1usize..=4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = connected_graph(n, &mut r);
        let walk = random_walk(&g, &mut r);
        let gap = delta_operator(&walk).spectrum(&SpectralConfig::default()).unwrap().gap.unwrap();
        let form = PoincareForm::from_walk(&walk);
        let f: Vec<Vec<f64>> = (0..d).map(|_| (0..n).map(|_| StandardNormal.sample(&mut r)).collect()).collect();
        let (energy, pair) = form.vector_energies(&f, 2.0);
        prop_assert!(energy >= gap * pair * (1.0 - 1e-9));
        let mu: Vec<f64> = walk.stationary().iter().map(mexp_core::rational::to_f64).collect();
        let total: f64 = mu.iter().sum();
        let centred: Vec<Vec<f64>> = f.iter().map(|c| {
            let mean = c.iter().zip(&mu).map(|(x, w)| x * w).sum::<f64>() / total;
            c.iter().map(|x| x - mean).collect()
        }).collect();
        let (lhs, rhs) = mean_zero_identity(&mu, &centred);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
        prop_assert!(lp_energy_ratio(&walk, &centred[0], 2.0).unwrap() >= gap * (1.0 - 1e-9));
    }

    #[test]
    fn verifiers_hold_on_random_instances(n in 2usize..=9, seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = connected_graph(n, &mut r);
        let vc = VerifyConfig::default();
        let walk = some_walk(&g, &mut r);
        prop_assert!(theorems::verify_cheeger_sandwich(&walk, &vc).unwrap().holds);
        prop_assert!(theorems::verify_measured_sandwich(&g, &vc).unwrap().holds);
        prop_assert!(theorems::verify_gap_controls(&g, &vc).unwrap().holds);
        prop_assert!(theorems::verify_poincare_to_cheeger_measured(&g, &vc).unwrap().holds);
        prop_assert!(verify_auxiliary_conditions(&g, &ReversibleWalk::auxiliary(&g).unwrap(), &cfg()).unwrap().all_hold());
        let heat = heat_kernel_measure(&g, r.random_range(0..n), r.random_range(0..5)).unwrap();
        // A point mass admits no feasible subset.
        match theorems::verify_cheeger_lower_bound(&walk, &heat, &vc) {
            Ok(report) => prop_assert!(report.holds),
            Err(Error::NoFeasibleSubset) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}

#[test]
fn measured_graph_examples_stay_valid() {
    let g = MeasuredGraph::from_edges(2, &[(0, 1)], vec![int(2), int(2)]).unwrap();
    let (lhs, rhs) = mean_zero_identity(&[2.0, 2.0], &[vec![1.0, -1.0]]);
    assert_eq!((lhs, rhs), (8.0, 8.0));
    assert!(g.is_connected());
}
