use proptest::prelude::*;

use ss_inventory::model::{self, expected_shifted_cost, quasiconvex_witness, smallest_argmin};
use ss_inventory::{instances, DemandPmf, Error, Grid, HoldingCost, ProblemSpec};

fn abs_cost(lo: i64, hi: i64) -> HoldingCost {
    HoldingCost::from_fn(Grid::new(lo, hi).unwrap(), |x| x.abs() as f64, 1.0, 1.0).unwrap()
}

#[test]
fn below_grid_uses_left_slope() {
    let h = HoldingCost::new(0, vec![0.0; 5], 1.0, 1.0).unwrap();
    let d = DemandPmf::new(vec![(1, 1.0)]).unwrap();
    assert_eq!(expected_shifted_cost(&h, &d, 0), h.eval(0) + 1.0);
}

#[test]
fn abs_cost_two_point_demand() {
    let d = DemandPmf::new(vec![(1, 0.5), (2, 0.5)]).unwrap();
    assert_eq!(expected_shifted_cost(&abs_cost(-5, 5), &d, 0), 1.5);
}

#[test]
fn canon1_expected_cost_by_direct_summation() {
    let p = instances::canon1();
    let h = |y: i64| if y >= 0 { y as f64 } else { -3.0 * y as f64 };
    for x in [-48, -3, 0, 2, 7, 50] {
        let direct = 0.5 * h(x - 1) + 0.3 * h(x - 2) + 0.2 * h(x - 3);
        assert!((p.expected_holding(x) - direct).abs() < 1e-12, "x = {x}");
    }
}

#[test]
fn transformed_cost_identity_over_the_grid() {
    let p = instances::canon1();
    for alpha in [0.1, 0.5, 0.95, 1.0] {
        let view = model::transformed_expected_cost(&p, alpha).unwrap();
        for x in p.grid().points() {
            let expect = p.expected_holding(x) + (1.0 - alpha) * 2.0 * x as f64 + alpha * 2.0 * 1.7;
            assert!((view.at(x) - expect).abs() < 1e-12);
        }
    }
}

#[test]
fn transformed_cost_hand_point() {
    let p = instances::canon1();
    let view = model::transformed_expected_cost(&p, 0.9).unwrap();
    assert!((view.at(10) - (p.expected_holding(10) + 5.06)).abs() < 1e-12);
}

#[test]
fn transformed_cost_rejects_alpha_outside_half_open_interval() {
    let p = instances::canon1();
    assert!(matches!(model::transformed_expected_cost(&p, 0.0), Err(Error::InvalidAlpha(_))));
    assert!(matches!(model::transformed_expected_cost(&p, 1.01), Err(Error::InvalidAlpha(_))));
}

#[test]
fn hand_quasiconvexity_examples() {
    let a = [5.0, 3.0, 1.0, 2.0, 4.0];
    assert_eq!(quasiconvex_witness(&a), None);
    assert_eq!(smallest_argmin(&a), 2);
    assert_eq!(quasiconvex_witness(&[1.0, 0.0, 1.0, 0.0, 2.0]), Some((1, 2, 3)));
}

fn brute_force_violation(f: &[f64]) -> bool {
    let n = f.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if f[j] > f[i].max(f[k]) {
                    return true;
                }
            }
        }
    }
    false
}

proptest! {
    #[test]
    fn quasiconvexity_matches_all_triples(v in prop::collection::vec(0u8..6, 1..12)) {
        let f: Vec<f64> = v.iter().map(|&x| x as f64).collect();
        let w = quasiconvex_witness(&f);
        prop_assert_eq!(w.is_some(), brute_force_violation(&f));
        if let Some((i, j, k)) = w {
            prop_assert!(i < j && j < k);
            prop_assert!(f[j] > f[i].max(f[k]));
        }
    }
}

#[test]
fn r_alpha_matches_exhaustive_scan() {
    let p = instances::canon1();
    let rep = model::check_assumptions(&p, 0.9).unwrap();
    assert!(rep.passed_strict());
    let view = model::transformed_expected_cost(&p, 0.9).unwrap();
    let mut best = p.grid().min;
    for x in p.grid().points() {
        if view.at(x) < view.at(best) {
            best = x;
        }
    }
    assert_eq!(rep.r_alpha, best);
    assert!(rep.s_star_alpha >= rep.r_alpha);
}

#[test]
fn s_star_is_first_point_past_k_above_min() {
    let p = instances::canon1();
    let alpha = 0.9;
    let rep = model::check_assumptions(&p, alpha).unwrap();
    let f = |x| p.transformed_cost_at(alpha, x);
    let level = p.fixed_cost + f(rep.r_alpha);
    let tie = 1e-12 * (1.0 + level.abs());
    assert!(f(rep.s_star_alpha) >= level - tie);
    assert!((rep.r_alpha + 1..rep.s_star_alpha).all(|x| f(x) < level - tie));
}

#[test]
fn r_alpha_is_monotone_in_alpha() {
    for p in [instances::canon1(), instances::quasiconvex_sqrt(), instances::convex_geometric()] {
        let mut prev = i64::MIN;
        for k in 1..=40 {
            let alpha = k as f64 / 40.0;
            let r = model::check_assumptions(&p, alpha).unwrap().r_alpha;
            assert!(r >= prev, "r_alpha decreased at alpha = {alpha}");
            prev = r;
        }
    }
}

#[test]
fn convex_cost_passes_above_alpha_star() {
    // Backlog slope 1 below a unit price of 2: alpha* = 1/2.
    let grid = Grid::new(-30, 30).unwrap();
    let h = HoldingCost::from_fn(grid, |x| if x >= 0 { x as f64 } else { -(x as f64) }, 1.0, 1.0).unwrap();
    let demand = DemandPmf::new(vec![(1, 0.5), (2, 0.3), (3, 0.2)]).unwrap();
    let p = ProblemSpec::new(10.0, 2.0, demand, h).unwrap();
    let a_star = model::alpha_star_for_convex(&p).unwrap();
    assert_eq!(a_star, 0.5);
    for alpha in [0.51, 0.6, 0.75, 0.9, 0.99, 1.0] {
        assert!(model::check_assumptions(&p, alpha).unwrap().passed(), "alpha = {alpha}");
    }
    // Below alpha* the transformed cost decreases without bound on the left.
    let rep = model::check_assumptions(&p, 0.3).unwrap();
    assert!(!rep.left_limit_ok);
    assert_eq!(rep.left_limit, ss_inventory::LeftLimit::MinusInfinity);
}

#[test]
fn alpha_star_closed_form_cases() {
    let with = |sigma_l: f64, c: f64| {
        let grid = Grid::new(-10, 10).unwrap();
        let h = HoldingCost::from_fn(grid, |x| if x >= 0 { x as f64 } else { -sigma_l * x as f64 }, sigma_l, 1.0).unwrap();
        ProblemSpec::new(1.0, c, DemandPmf::point_mass(1).unwrap(), h).unwrap()
    };
    assert_eq!(model::alpha_star_for_convex(&with(3.0, 2.0)).unwrap(), 0.0);
    assert_eq!(model::alpha_star_for_convex(&with(1.0, 2.0)).unwrap(), 0.5);
    assert_eq!(model::alpha_star_for_convex(&with(2.0, 2.0)).unwrap(), 0.0);
}

#[test]
fn nonconvex_cost_has_no_alpha_star() {
    let p = instances::quasiconvex_sqrt();
    assert!(matches!(model::alpha_star_for_convex(&p), Err(Error::NonConvex { .. })));
}

#[test]
fn demand_invariants_are_enforced() {
    assert!(DemandPmf::new(vec![(0, 1.0)]).is_err());
    assert!(DemandPmf::new(vec![(1, 0.5), (1, 0.5)]).is_err());
    assert!(DemandPmf::new(vec![(-1, 0.5), (2, 0.5)]).is_err());
    assert!(DemandPmf::new(vec![(1, 0.5), (2, 0.4)]).is_err());
    let d = DemandPmf::new(vec![(0, 0.25), (3, 0.75)]).unwrap();
    assert!((d.mean() - 2.25).abs() < 1e-15);
}

#[test]
fn negative_probability_names_the_atom() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/bad_probability.json")).unwrap();
    let err = ProblemSpec::from_json_str(&text).unwrap_err().to_string();
    assert!(err.contains("demand[0]") && err.contains("value 1"), "{err}");
}

#[test]
fn problem_files_round_trip() {
    for name in instances::NAMES {
        let p = instances::by_name(name).unwrap();
        let back = ProblemSpec::from_json_str(&p.to_json_string().unwrap()).unwrap();
        assert_eq!(back, p, "{name}");
        let path = format!("{}/../../data/{name}.json", env!("CARGO_MANIFEST_DIR"));
        let on_disk = ProblemSpec::from_json_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(on_disk, p, "{name}");
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let mut v: serde_json::Value = serde_json::from_str(&instances::canon1().to_json_string().unwrap()).unwrap();
    v["discount"] = 0.9.into();
    assert!(matches!(ProblemSpec::from_json_str(&v.to_string()), Err(Error::Json(_))));
}

#[test]
fn non_quasiconvex_file_is_detected() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/two_valleys.json")).unwrap();
    let p = ProblemSpec::from_json_str(&text).unwrap();
    let rep = model::check_assumptions(&p, 0.9).unwrap();
    assert!(!rep.quasiconvex);
    let (x, y, z) = rep.witness.unwrap();
    let f = |t| p.transformed_cost_at(0.9, t);
    assert!(x < y && y < z && f(y) > f(x).max(f(z)));
}

#[test]
fn default_window_is_clipped_interior() {
    let p = instances::canon1();
    let (lo, hi) = model::default_interior_window(&p).unwrap();
    let s1 = model::check_assumptions(&p, 1.0).unwrap().s_star_alpha;
    assert_eq!(lo, -50 + 6);
    assert_eq!(hi, (s1 + 6).min(50));
}
