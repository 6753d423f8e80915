//! Two classical counterexamples: a one-period problem without terminal
//! cost whose optimal policy is not of (s, S) type in general, and a
//! deterministic chain whose discounted relative values oscillate as the
//! discount factor tends to one.

use std::io::Write;

use serde::Serialize;

use crate::dp::{finite_horizon, ss_policy_violation, value_iteration_discounted, Terminal, DEFAULT_MAX_ITER};
use crate::error::{Error, Result};
use crate::instances;
use crate::model::{check_assumptions, transformed_expected_cost};
use crate::policy::{evaluate_discounted, SsPolicy};

/// Block boundaries `D(k) = 1! + 2! + … + k!` and the 0/1 sequence that is
/// 1 exactly on `[D(2k-1), D(2k))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZSequence {
    /// `D(1), D(2), …` up to the first value exceeding `horizon`.
    pub boundaries: Vec<u64>,
    pub horizon: u64,
}

impl ZSequence {
    pub fn new(horizon: u64) -> Self {
        let mut boundaries = Vec::new();
        let mut fact: u64 = 1;
        let mut sum: u64 = 0;
        for k in 1u64.. {
            fact = fact.saturating_mul(k);
            sum = sum.saturating_add(fact);
            boundaries.push(sum);
            if sum > horizon || sum == u64::MAX {
                break;
            }
        }
        Self { boundaries, horizon }
    }

    /// `D(k)` for `k ≥ 1`.
    pub fn block(&self, k: usize) -> u64 {
        self.boundaries[k - 1]
    }

    /// Half-open intervals `[D(2k-1), D(2k))` where `z = 1`.
    pub fn ones(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.boundaries.chunks(2).filter(|c| c.len() == 2).map(|c| (c[0], c[1]))
    }

    pub fn z(&self, n: u64) -> u8 {
        assert!(n <= self.horizon, "index {n} beyond horizon {}", self.horizon);
        self.ones().any(|(a, b)| a <= n && n < b) as u8
    }

    /// Stage cost `ẑ_n`: `z_0 + 1` at 0 and `z_n - z_{n-1} + 1` after.
    pub fn z_hat(&self, n: u64) -> i64 {
        if n == 0 {
            self.z(0) as i64 + 1
        } else {
            self.z(n) as i64 - self.z(n - 1) as i64 + 1
        }
    }
}

/// `(1-α) Σ_{i ≥ n} z_i α^{i-n}` from the block structure, with every block
/// starting at or beyond `n + cutoff` dropped; returns the sum and the bound
/// `α^{cutoff}` on what was dropped.
fn tail_sum(alpha: f64, n: u64, tail_tol: f64) -> (f64, f64, u64) {
    let mut total = 0.0;
    let mut k = 1i32;
    let mut fact: u64 = 1;
    let mut d_prev: u64 = 0;
    let mut start = 0u64;
    loop {
        fact = fact.saturating_mul(k as u64);
        let d = d_prev.saturating_add(fact);
        if k % 2 == 1 {
            start = d;
        } else {
            let (a, b) = (start.max(n), d);
            if b > n {
                let lead = alpha.powf((a - n) as f64);
                if lead <= tail_tol || a - n > 1 << 40 {
                    return (total, lead, a);
                }
                total += lead - alpha.powf((b - n) as f64);
            }
        }
        d_prev = d;
        k += 1;
        if d == u64::MAX {
            return (total, 0.0, u64::MAX);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FValue {
    pub alpha: f64,
    pub value: f64,
    /// Upper bound on the neglected tail.
    pub truncation_bound: f64,
    /// Index from which terms were dropped.
    pub terms: u64,
}

/// `f(α) = (1 - α) Σ z_i α^i`, summed block by block as `Σ_k (α^{D(2k-1)} - α^{D(2k)})`
/// until the next block contributes at most `tail_tol`.
pub fn f_alpha(alpha: f64, tail_tol: f64) -> Result<FValue> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let (value, bound, terms) = tail_sum(alpha, 0, tail_tol);
    Ok(FValue {
        alpha,
        value,
        truncation_bound: bound,
        terms,
    })
}

/// Relative values on `{-2, -1, 0, …, n_report}` from the closed form and
/// from value iteration on the chain truncated after `n_trunc + n_report`
/// continuation states (absorbing with cost 1 beyond).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeValues {
    pub alpha: f64,
    pub n_trunc: usize,
    /// Entry `i` is state `i - 2`.
    pub closed_form: Vec<f64>,
    pub value_iteration: Vec<f64>,
    pub max_gap: f64,
    /// `α^{n_trunc}`, the truncation error bound on the reported states.
    pub truncation_bound: f64,
    pub vi_iterations: usize,
}

impl RelativeValues {
    pub fn at(&self, n: i64) -> f64 {
        self.closed_form[(n + 2) as usize]
    }

    pub fn agrees(&self) -> bool {
        self.max_gap <= self.truncation_bound + 1e-10
    }
}

/// Smallest `N` with `α^N ≤ tol`.
pub fn truncation_length(alpha: f64, tol: f64) -> usize {
    if alpha == 0.0 {
        return 1;
    }
    (tol.ln() / alpha.ln()).ceil().max(1.0) as usize
}

pub fn example62_relative_values(alpha: f64, n_trunc: usize, n_report: usize) -> Result<RelativeValues> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let bound = alpha.powi(n_trunc as i32);
    if bound > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "truncation {n_trunc} too short: alpha^N = {bound:e} exceeds 1e-12"
        )));
    }
    let len = n_trunc + n_report;
    let z = ZSequence::new(len as u64 + 1);

    let mut closed = vec![0.0, 1.0];
    for n in 0..=n_report as u64 {
        let (tail, _, _) = tail_sum(alpha, n, 1e-18);
        let prev = if n == 0 { 0.0 } else { z.z(n - 1) as f64 };
        closed.push(tail - prev + 1.0);
    }

    // states: -2, -1, 0..len-1, then an absorbing state of cost 1
    let nstates = len + 3;
    let absorbing = 1.0 / (1.0 - alpha);
    let cost: Vec<f64> = (0..len as u64).map(|n| z.z_hat(n) as f64).collect();
    let mut v = vec![0.0; nstates];
    let stop = 1e-12 * (1.0 - alpha) / alpha.max(1e-300);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut next = vec![0.0; nstates];
        next[nstates - 1] = absorbing;
        for i in (0..len).rev() {
            next[i + 2] = cost[i] + alpha * v[i + 3];
        }
        // at -1: stop (stay, cost 1) or continue to 0 (cost 1)
        next[1] = 1.0 + alpha * v[1].min(v[2]);
        next[0] = alpha * v[1];
        let change = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if change <= stop || alpha == 0.0 {
            break;
        }
        if iterations > 50_000_000 / nstates.max(1) + 1_000_000 {
            return Err(Error::NotConverged {
                iterations,
                residual: change,
            });
        }
    }
    let m = v.iter().copied().fold(f64::INFINITY, f64::min);
    let vi: Vec<f64> = v[..n_report + 3].iter().map(|x| x - m).collect();
    let max_gap = vi
        .iter()
        .zip(&closed)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(RelativeValues {
        alpha,
        n_trunc,
        closed_form: closed,
        value_iteration: vi,
        max_gap,
        truncation_bound: bound,
        vi_iterations: iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationRow {
    pub alpha: f64,
    pub f_alpha: f64,
    pub u0: f64,
    pub truncation_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationReport {
    pub rows: Vec<OscillationRow>,
    pub spread: f64,
    /// Required spread of `f` over the rows.
    pub required_spread: f64,
    pub passed: bool,
}

impl OscillationReport {
    /// Columns `alpha, f_alpha, u0, truncation_bound`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["alpha", "f_alpha", "u0", "truncation_bound"])?;
        for r in &self.rows {
            wtr.write_record([
                format!("{:?}", r.alpha),
                format!("{:?}", r.f_alpha),
                format!("{:?}", r.u0),
                format!("{:?}", r.truncation_bound),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// `α = 1 - 1/D(k)` for `k = 2..=6`.
pub fn suggested_oscillation_schedule() -> Vec<f64> {
    let z = ZSequence::new(1000);
    (2..=6).map(|k| 1.0 - 1.0 / z.block(k) as f64).collect()
}

/// Tabulates `f(α)` and `u_α(0) = f(α) + 1`; passes when `f` spreads by at
/// least 0.5 over the points.
pub fn oscillation_report(alphas: &[f64]) -> Result<OscillationReport> {
    let rows = alphas
        .iter()
        .map(|&a| {
            let f = f_alpha(a, 1e-15)?;
            Ok(OscillationRow {
                alpha: a,
                f_alpha: f.value,
                u0: f.value + 1.0,
                truncation_bound: f.truncation_bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let hi = rows.iter().map(|r| r.f_alpha).fold(f64::NEG_INFINITY, f64::max);
    let lo = rows.iter().map(|r| r.f_alpha).fold(f64::INFINITY, f64::min);
    let spread = if rows.is_empty() { 0.0 } else { hi - lo };
    Ok(OscillationReport {
        rows,
        spread,
        required_spread: 0.5,
        passed: spread >= 0.5,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example38Report {
    pub alpha: f64,
    /// Every grid state prefers not ordering in the one-period problem.
    pub one_period_never_orders: bool,
    pub one_period_offender: Option<i64>,
    /// One-period costs at `x = 0` of ordering 2 units and of not ordering.
    pub one_period_cost_order_two: f64,
    pub one_period_cost_no_order: f64,
    /// Largest deviation of `E[h_α(x - D)]` from `|x - 1|/2 + x/4 + 3/4`.
    pub transformed_cost_error: f64,
    pub transformed_cost_convex: bool,
    /// The step-0 policy with terminal cost `-c x` is (s, S).
    pub terminal_cost_is_ss: bool,
    pub terminal_cost_thresholds: (i64, i64),
    pub terminal_cost_offender: Option<i64>,
    /// The infinite-horizon optimum is attained by (s_α, S_α).
    pub infinite_horizon_is_ss: bool,
    pub infinite_horizon_thresholds: (i64, i64),
    pub infinite_horizon_value_gap: f64,
    pub passed: bool,
}

/// Builds K = 1, c = 1, D ≡ 1, h = |x|/2 at α = 3/4 and checks the three
/// claims about it exactly (tolerance 1e-10).
pub fn example38_check() -> Result<Example38Report> {
    const TOL: f64 = 1e-10;
    let p = instances::example38();
    let alpha = 0.75;
    let grid = p.grid();

    let one = &finite_horizon(&p, alpha, 1, Terminal::Zero)?[0];
    let cost = |x: i64, a: i64| {
        let order = if a > 0 { p.fixed_cost + p.unit_cost * a as f64 } else { 0.0 };
        order + p.expected_holding(x + a)
    };
    let mut offender = None;
    for x in grid.points() {
        let idle = cost(x, 0);
        let beaten = (1..=grid.max - x).any(|a| cost(x, a) < idle - TOL);
        if beaten || one.actions[grid.index(x)] != 0 {
            offender.get_or_insert(x);
        }
    }

    let view = transformed_expected_cost(&p, alpha)?;
    let formula = |x: i64| 0.5 * ((x - 1) as f64).abs() + 0.25 * x as f64 + 0.75;
    let transformed_cost_error = grid
        .points()
        .map(|x| (view.at(x) - formula(x)).abs())
        .fold(0.0, f64::max);
    let transformed_cost_convex = view
        .values
        .windows(3)
        .all(|w| w[2] - 2.0 * w[1] + w[0] >= -TOL);
    let assumptions_hold = check_assumptions(&p, alpha)?.passed();

    let term = &finite_horizon(&p, alpha, 1, Terminal::MinusCx)?[0];
    let term_offender = ss_policy_violation(&term.g, p.fixed_cost, term.s, term.big_s);

    let sol = value_iteration_discounted(&p, alpha, 1e-12, DEFAULT_MAX_ITER)?;
    let inf_offender = ss_policy_violation(&sol.g, p.fixed_cost, sol.s, sol.big_s);
    let eval = evaluate_discounted(&SsPolicy::new(sol.s, sol.big_s)?, &p, alpha)?;
    let value_gap = eval.value.sup_distance(&sol.v);

    let one_period_never_orders = offender.is_none();
    let passed = one_period_never_orders
        && transformed_cost_error <= TOL
        && transformed_cost_convex
        && assumptions_hold
        && term_offender.is_none()
        && inf_offender.is_none()
        && value_gap <= TOL;
    Ok(Example38Report {
        alpha,
        one_period_never_orders,
        one_period_offender: offender,
        one_period_cost_order_two: cost(0, 2),
        one_period_cost_no_order: cost(0, 0),
        transformed_cost_error,
        transformed_cost_convex,
        terminal_cost_is_ss: term_offender.is_none(),
        terminal_cost_thresholds: (term.s, term.big_s),
        terminal_cost_offender: term_offender,
        infinite_horizon_is_ss: inf_offender.is_none(),
        infinite_horizon_thresholds: (sol.s, sol.big_s),
        infinite_horizon_value_gap: value_gap,
        passed,
    })
}
