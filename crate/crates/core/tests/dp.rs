use ss_inventory::dp::{self, DEFAULT_MAX_ITER};
use ss_inventory::model::{self, Grid};
use ss_inventory::policy::{self, Criterion, SearchWindow};
use ss_inventory::{instances, Error, GTable, ProblemSpec, ProblemSpec32, SsPolicy, Terminal, ValueTable};

const TOL: f64 = 1e-10;

/// Independent right-hand side: min over every admissible order quantity.
fn rhs_min(p: &ProblemSpec, v: &ValueTable, alpha: f64, x: i64) -> f64 {
    let grid = p.grid();
    let mut best = f64::INFINITY;
    for y in x..=grid.max {
        let stage = if y > x { p.fixed_cost + p.unit_cost * (y - x) as f64 } else { 0.0 };
        let next: f64 = p.demand.atoms().iter().map(|&(d, q)| q * v.eval(y - d)).sum();
        best = best.min(stage + p.expected_holding(y) + alpha * next);
    }
    best
}

#[test]
fn g_with_zero_value_is_order_up_to_cost() {
    let p = instances::canon1();
    let zero = ValueTable::zeros(p.grid());
    for alpha in [0.0, 0.7] {
        let g = dp::build_g(&zero, &p, alpha);
        for x in p.grid().points() {
            // below-grid extension of the zero table is linear, so only
            // states whose successors stay on the grid are exact zeros
            if x - 3 >= p.grid().min || alpha == 0.0 {
                let want = 2.0 * x as f64 + p.expected_holding(x);
                assert!((g.at(x) - want).abs() < 1e-12, "alpha {alpha} x {x}");
            }
        }
    }
}

#[test]
fn vi_fixed_point_matches_brute_force_rhs() {
    for p in [instances::canon1(), instances::quasiconvex_sqrt(), instances::convex_geometric()] {
        let alpha = 0.9;
        let sol = dp::value_iteration_discounted(&p, alpha, TOL, DEFAULT_MAX_ITER).unwrap();
        assert!(sol.residual <= 2.0 * TOL, "residual {}", sol.residual);
        for x in p.grid().points() {
            let r = rhs_min(&p, &sol.v, alpha, x);
            assert!((r - sol.v.at(x)).abs() <= 2.0 * TOL, "x {x}: {r} vs {}", sol.v.at(x));
        }
    }
}

#[test]
fn vi_value_equals_exact_policy_evaluation() {
    let p = instances::canon1();
    for alpha in [0.5, 0.9, 0.99] {
        let sol = dp::value_iteration_discounted(&p, alpha, TOL, DEFAULT_MAX_ITER).unwrap();
        let pol = SsPolicy::new(sol.s, sol.big_s).unwrap();
        let ev = policy::evaluate_discounted(&pol, &p, alpha).unwrap();
        let gap = ev.value.sup_distance(&sol.v);
        assert!(gap < 1e-8, "alpha {alpha}: gap {gap}");
    }
}

#[test]
fn greedy_actions_are_of_ss_form() {
    let p = instances::quasiconvex_sqrt();
    let sol = dp::value_iteration_discounted(&p, 0.95, TOL, DEFAULT_MAX_ITER).unwrap();
    assert_eq!(dp::ss_policy_violation(&sol.g, p.fixed_cost, sol.s, sol.big_s), None);
    for (i, x) in p.grid().points().enumerate() {
        let a = sol.actions[i];
        if x < sol.s {
            assert_eq!(x + a, sol.big_s, "x {x}");
        } else {
            assert_eq!(a, 0, "x {x}");
        }
    }
}

#[test]
fn transformed_model_recovers_original_values() {
    let p = instances::canon1();
    let (lo, hi) = model::default_interior_window(&p).unwrap();
    for alpha in [0.6, 0.9, 0.97] {
        let orig = dp::value_iteration_discounted(&p, alpha, 1e-11, DEFAULT_MAX_ITER).unwrap();
        let tr = dp::transformed_model_vi(&p, alpha, 1e-11, DEFAULT_MAX_ITER).unwrap();
        for x in lo..=hi {
            let v = tr.v.at(x) - 2.0 * x as f64;
            assert!((v - orig.v.at(x)).abs() < 1e-7, "alpha {alpha} x {x}");
            assert!((tr.g.at(x) - orig.g.at(x)).abs() < 1e-7, "alpha {alpha} x {x}");
        }
        assert_eq!((tr.s, tr.big_s), (orig.s, orig.big_s));
    }
}

#[test]
fn transformed_model_at_zero_discount_is_myopic() {
    let p = instances::canon1();
    let sol = dp::transformed_model_vi(&p, 0.0, TOL, DEFAULT_MAX_ITER).unwrap();
    for x in p.grid().points() {
        assert!((sol.g.at(x) - p.transformed_cost_at(0.0, x)).abs() < 1e-12);
    }
    assert!(matches!(dp::transformed_model_vi(&p, 1.0, TOL, 10), Err(Error::InvalidAlpha(_))));
}

fn deterministic_gain(p: &ProblemSpec, s: i64, big_s: i64) -> f64 {
    // D = 1: the post-order level runs S, S-1, ..., s and then reorders.
    let n = (big_s - s + 1) as f64;
    let holding: f64 = (s..=big_s).map(|y| p.holding.eval(y - 1)).sum();
    (p.fixed_cost + p.unit_cost * n + holding) / n
}

#[test]
fn rvi_matches_cycle_enumeration_on_unit_demand() {
    for k in [1.0, 5.0, 20.0] {
        let p = instances::deterministic_unit(k, 1.0);
        let mut best = f64::INFINITY;
        for s in -8..=4 {
            for b in s..=10 {
                best = best.min(deterministic_gain(&p, s, b));
            }
        }
        let avg = dp::relative_value_iteration(&p, 1e-10, DEFAULT_MAX_ITER).unwrap();
        assert!((avg.w - best).abs() < 1e-7, "K {k}: {} vs {best}", avg.w);
        let pol = SsPolicy::new(avg.s, avg.big_s).unwrap();
        assert!((deterministic_gain(&p, avg.s, avg.big_s) - best).abs() < 1e-9);
        let ev = policy::evaluate_average(&pol, &p).unwrap();
        assert!((ev.gain.unwrap() - best).abs() < 1e-8);
    }
}

#[test]
fn rvi_gain_matches_exhaustive_search() {
    let p = instances::canon1();
    let avg = dp::relative_value_iteration(&p, 1e-10, DEFAULT_MAX_ITER).unwrap();
    let window = SearchWindow::default_for(&p, Criterion::Average, 5).unwrap();
    let best = policy::exhaustive_ss_search(&p, Criterion::Average, window).unwrap();
    assert!((best.value - avg.w).abs() < 1e-6, "{} vs {}", best.value, avg.w);
    assert!(avg.acoe_residual <= 5e-10);
    let gap = dp::acoe_gap(&avg.u, avg.w, &p, avg.window);
    assert!(gap <= 5e-10, "acoe gap {gap}");
}

#[test]
fn large_fixed_cost_vi_matches_search() {
    let p = instances::deterministic_unit(40.0, 1.0);
    let alpha = 0.95;
    let sol = dp::value_iteration_discounted(&p, alpha, TOL, DEFAULT_MAX_ITER).unwrap();
    let window = SearchWindow::default_for(&p, Criterion::Discounted(alpha), 3).unwrap();
    let best = policy::exhaustive_ss_search(&p, Criterion::Discounted(alpha), window).unwrap();
    let mid = p.grid().midpoint();
    assert!((best.value - sol.v.at(mid)).abs() < 1e-8, "{} vs {}", best.value, sol.v.at(mid));
}

#[test]
fn finite_horizon_minus_cx_respects_threshold_chain() {
    let p = instances::canon1();
    let alpha = 0.9;
    let rep = model::check_assumptions(&p, alpha).unwrap();
    let stages = dp::finite_horizon(&p, alpha, 40, Terminal::MinusCx).unwrap();
    assert_eq!(stages.len(), 40);
    assert_eq!(stages[0].periods_to_go, 40);
    assert_eq!(stages[39].periods_to_go, 1);
    for st in &stages {
        let chain = [st.s, rep.r_alpha, st.big_s, rep.s_star_alpha];
        assert!(chain.windows(2).all(|w| w[0] <= w[1]), "n {}: {chain:?}", st.periods_to_go);
    }
}

#[test]
fn finite_horizon_converges_to_infinite_horizon() {
    let p = instances::canon1();
    let alpha = 0.8;
    let sol = dp::value_iteration_discounted(&p, alpha, TOL, DEFAULT_MAX_ITER).unwrap();
    let stages = dp::finite_horizon(&p, alpha, 200, Terminal::Zero).unwrap();
    assert!(stages[0].v.sup_distance(&sol.v) < 1e-8);
    assert_eq!((stages[0].s, stages[0].big_s), (sol.s, sol.big_s));
    assert!(dp::finite_horizon(&p, alpha, 0, Terminal::Zero).is_err());
    assert_eq!("minus_cx".parse::<Terminal>().unwrap(), Terminal::MinusCx);
}

#[test]
fn one_period_stage_is_bellman_of_terminal() {
    let p = instances::canon1();
    let stages = dp::finite_horizon(&p, 0.9, 1, Terminal::Zero).unwrap();
    let direct = dp::bellman_discounted(&ValueTable::zeros(p.grid()), &p, 0.9).unwrap();
    assert!(stages[0].v.sup_distance(&direct) == 0.0);
}

fn table(values: &[f64]) -> GTable {
    GTable { alpha: 0.9, grid: Grid::new(0, values.len() as i64 - 1).unwrap(), values: values.to_vec() }
}

#[test]
fn threshold_extraction_examples() {
    let g = table(&[9.0, 6.0, 3.0, 1.0, 0.0, 2.0, 5.0]);
    assert_eq!(dp::extract_thresholds(&g, 2.5), (3, 4));
    assert_eq!(dp::extract_thresholds(&g, 3.0), (2, 4));
    assert_eq!(dp::extract_thresholds(&g, 100.0), (0, 4));
    let flat = table(&[1.0; 5]);
    assert_eq!(dp::extract_thresholds(&flat, 1.0), (0, 0));
}

#[test]
fn single_precision_tracks_double() {
    let p = instances::canon1();
    let p32: ProblemSpec32 = p.cast();
    let s64 = dp::value_iteration_discounted(&p, 0.9, 1e-9, DEFAULT_MAX_ITER).unwrap();
    let s32 = dp::value_iteration_discounted(&p32, 0.9f32, 1e-3, DEFAULT_MAX_ITER).unwrap();
    assert_eq!((s32.s, s32.big_s), (s64.s, s64.big_s));
    for x in p.grid().points() {
        let rel = (s32.v.at(x) as f64 - s64.v.at(x)).abs() / (1.0 + s64.v.at(x).abs());
        assert!(rel < 1e-4, "x {x}: rel {rel}");
    }
}

#[test]
fn iteration_cap_reports_not_converged() {
    let p = instances::canon1();
    assert!(matches!(
        dp::value_iteration_discounted(&p, 0.99, 1e-12, 2),
        Err(Error::NotConverged { iterations: 2, .. })
    ));
    assert!(matches!(dp::relative_value_iteration(&p, 1e-12, 2), Err(Error::NotConverged { .. })));
    assert!(matches!(dp::value_iteration_discounted(&p, 1.0, 1e-9, 10), Err(Error::InvalidAlpha(_))));
}

#[test]
fn solution_serializers_emit_every_state() {
    let p = instances::canon1();
    let sol = dp::value_iteration_discounted(&p, 0.9, TOL, DEFAULT_MAX_ITER).unwrap();
    let mut buf = Vec::new();
    sol.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 1 + p.grid().len());
    let v: serde_json::Value = serde_json::from_str(&sol.to_json().unwrap()).unwrap();
    assert_eq!(v["s"], sol.s);
}
