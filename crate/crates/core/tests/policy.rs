use ss_inventory::dp::{self, DEFAULT_MAX_ITER};
use ss_inventory::policy::{self, Criterion, SearchWindow};
use ss_inventory::{instances, ProblemSpec, SsPolicy};

fn transition_step(p: &ProblemSpec, pol: &SsPolicy, alpha: f64, v: &[f64], x: i64) -> f64 {
    // One-step Bellman equation for a fixed policy, computed from raw parts.
    let y = x + pol.action(x);
    let order = if y > x { p.fixed_cost + p.unit_cost * (y - x) as f64 } else { 0.0 };
    let grid = p.grid();
    let next: f64 = p
        .demand
        .atoms()
        .iter()
        .map(|&(d, q)| {
            let z = y - d;
            let val = if z < grid.min {
                // below the grid the policy orders straight up to S
                v[(pol.big_s - grid.min) as usize] + p.fixed_cost + p.unit_cost * (pol.big_s - z) as f64
            } else {
                v[(z - grid.min) as usize]
            };
            q * val
        })
        .sum();
    order + p.expected_holding(y) + alpha * next
}

#[test]
fn discounted_evaluation_solves_policy_equation() {
    let p = instances::canon1();
    for &(s, b) in &[(0, 6), (-3, 2), (4, 20)] {
        let pol = SsPolicy::new(s, b).unwrap();
        let alpha = 0.9;
        let ev = policy::evaluate_discounted(&pol, &p, alpha).unwrap();
        for x in p.grid().points() {
            let rhs = transition_step(&p, &pol, alpha, &ev.value.values, x);
            assert!((rhs - ev.value.at(x)).abs() < 1e-9, "({s},{b}) x {x}");
        }
    }
}

#[test]
fn every_policy_costs_at_least_the_optimum() {
    let p = instances::canon1();
    let alpha = 0.9;
    let sol = dp::value_iteration_discounted(&p, alpha, 1e-10, DEFAULT_MAX_ITER).unwrap();
    for s in [-10, -2, 0, 1, 3] {
        for b in [s, s + 2, 6, 12, 25] {
            let Ok(pol) = SsPolicy::new(s, b) else { continue };
            let ev = policy::evaluate_discounted(&pol, &p, alpha).unwrap();
            for x in p.grid().points() {
                assert!(ev.value.at(x) >= sol.v.at(x) - 1e-8, "({s},{b}) x {x}");
            }
        }
    }
}

#[test]
fn average_evaluation_agrees_with_renewal_and_rvi() {
    for p in [instances::canon1(), instances::quasiconvex_sqrt(), instances::convex_geometric()] {
        let avg = dp::relative_value_iteration(&p, 1e-10, DEFAULT_MAX_ITER).unwrap();
        let pol = SsPolicy::new(avg.s, avg.big_s).unwrap();
        let ev = policy::evaluate_average(&pol, &p).unwrap();
        let gain = ev.gain.unwrap();
        assert!((gain - avg.w).abs() < 1e-6, "{gain} vs {}", avg.w);
        assert!((policy::average_cost_renewal(&pol, &p) - gain).abs() < 1e-9);
        let window = SearchWindow::default_for(&p, Criterion::Average, 4).unwrap();
        let best = policy::exhaustive_ss_search(&p, Criterion::Average, window).unwrap();
        assert!((best.value - avg.w).abs() < 1e-6);
    }
}

#[test]
fn gain_does_not_depend_on_grid_size() {
    let pol = SsPolicy::new(0, 6).unwrap();
    let a = policy::average_cost_renewal(&pol, &instances::canon1());
    let b = policy::average_cost_renewal(&pol, &instances::canon1_on(-60, 60));
    assert!((a - b).abs() < 1e-10);
}

#[test]
fn window_of_one_pair_evaluates_that_pair() {
    let p = instances::canon1();
    let w = SearchWindow { s_lo: 1, s_hi: 1, big_s_lo: 7, big_s_hi: 7 };
    let r = policy::exhaustive_ss_search(&p, Criterion::Average, w).unwrap();
    assert_eq!(r.evaluated, 1);
    assert_eq!((r.policy.s, r.policy.big_s), (1, 7));
    assert_eq!(r.value, policy::average_cost_renewal(&SsPolicy::new(1, 7).unwrap(), &p));
    let empty = SearchWindow { s_lo: 5, s_hi: 5, big_s_lo: 0, big_s_hi: 3 };
    assert!(policy::exhaustive_ss_search(&p, Criterion::Average, empty).is_err());
}

#[test]
fn simulation_brackets_optimal_gain() {
    let p = instances::canon1();
    let avg = dp::relative_value_iteration(&p, 1e-10, DEFAULT_MAX_ITER).unwrap();
    let pol = SsPolicy::new(avg.s, avg.big_s).unwrap();
    let st = policy::simulate(&pol, &p, 1_000_000, 8, 7).unwrap();
    assert!(st.confidence_halfwidth > 0.0);
    assert!(st.covers(avg.w), "{} ± {} vs {}", st.mean_cost_per_period, st.confidence_halfwidth, avg.w);
    assert!(st.min_inventory >= avg.s - 3 && st.max_inventory <= avg.big_s);
}

#[test]
fn single_replication_uses_batch_means() {
    let p = instances::canon1();
    let st = policy::simulate(&SsPolicy::new(0, 6).unwrap(), &p, 200_000, 1, 3).unwrap();
    assert!(st.confidence_halfwidth > 0.0 && st.confidence_halfwidth.is_finite());
}

#[test]
fn deterministic_demand_simulation_is_exact() {
    let p = instances::deterministic_unit(5.0, 1.0);
    let pol = SsPolicy::new(0, 3).unwrap();
    let st = policy::simulate(&pol, &p, 4000, 3, 11).unwrap();
    // 1000 cycles of holding 2 + 1 + 0 + 1; the path starts at S, so the
    // first cycle carries no order and the rest pay K + 4c.
    let want = (1000.0 * 4.0 + 999.0 * 9.0) / 4000.0;
    assert_eq!(st.confidence_halfwidth, 0.0);
    assert!((st.mean_cost_per_period - want).abs() < 1e-12, "{} vs {want}", st.mean_cost_per_period);
    assert!((st.order_frequency - 999.0 / 4000.0).abs() < 1e-15);
}

#[test]
fn simulation_is_reproducible_per_seed() {
    let p = instances::canon1();
    let pol = SsPolicy::new(0, 6).unwrap();
    let a = policy::simulate(&pol, &p, 50_000, 4, 99).unwrap();
    let b = policy::simulate(&pol, &p, 50_000, 4, 99).unwrap();
    let c = policy::simulate(&pol, &p, 50_000, 4, 100).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.replication_means, c.replication_means);
    assert!(policy::simulate(&pol, &p, 0, 4, 1).is_err());
}

#[test]
fn renewal_u_bar_matches_relative_transformed_values() {
    let p = instances::canon1();
    for alpha in [0.8, 0.95, 0.99] {
        let tr = dp::transformed_model_vi(&p, alpha, 1e-11, DEFAULT_MAX_ITER).unwrap();
        for x in [tr.s - 4, tr.s, tr.s + 1, tr.s + 3, tr.big_s, tr.big_s + 5] {
            let u = policy::renewal_u_bar(&p, alpha, &tr, x).unwrap();
            let want = tr.v.at(x) - tr.m_alpha;
            assert!((u - want).abs() < 1e-6, "alpha {alpha} x {x}: {u} vs {want}");
        }
        let at_s = policy::renewal_u_bar(&p, alpha, &tr, tr.big_s).unwrap();
        assert!(at_s.abs() < 1e-7, "u_bar(S) = {at_s}");
        assert_eq!(policy::renewal_u_bar(&p, alpha, &tr, tr.s - 1).unwrap(), p.fixed_cost);
    }
}

#[test]
fn renewal_u_bar_hand_enumeration_above_s() {
    // From s + 1 the chain survives one more period only when D = 1.
    let p = instances::canon1();
    let alpha = 0.9;
    let tr = dp::transformed_model_vi(&p, alpha, 1e-11, DEFAULT_MAX_ITER).unwrap();
    let x = tr.s + 1;
    let f = |y| p.transformed_cost_at(alpha, y) - (1.0 - alpha) * tr.m_alpha;
    let want = f(x) + alpha * 0.5 * f(x - 1) + p.fixed_cost * (1.0 - (1.0 - alpha) * (1.0 + alpha * 0.5));
    let got = policy::renewal_u_bar(&p, alpha, &tr, x).unwrap();
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
}

#[test]
fn policy_constructor_and_actions() {
    assert!(SsPolicy::new(3, 2).is_err());
    let pol = SsPolicy::new(2, 5).unwrap();
    assert_eq!(pol.action(1), 4);
    assert_eq!(pol.action(2), 0);
    let eager = pol.ordering_at_s();
    assert_eq!(eager.action(2), 3);
    assert_eq!(eager.action(3), 0);
    let deg = SsPolicy::new(4, 4).unwrap().ordering_at_s();
    assert_eq!(deg.action(4), 0);
}

#[test]
fn discounted_search_agrees_with_vi() {
    let p = instances::canon1();
    let alpha = 0.9;
    let sol = dp::value_iteration_discounted(&p, alpha, 1e-10, DEFAULT_MAX_ITER).unwrap();
    let w = SearchWindow::default_for(&p, Criterion::Discounted(alpha), 3).unwrap();
    let best = policy::exhaustive_ss_search(&p, Criterion::Discounted(alpha), w).unwrap();
    assert!((best.value - sol.v.at(best.reference_state)).abs() < 1e-8);
}
