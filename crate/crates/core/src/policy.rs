//! Independent oracles: exact (s, S) policy evaluation, exhaustive threshold
//! search, Monte Carlo simulation and the renewal expansion of `ū_α`.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dp::{BellmanSolution, ValueTable};
use crate::error::{Error, Result};
use crate::model::{check_assumptions, require_alpha_discount, require_alpha_open, ProblemSpec};
use crate::scalar::Scalar;

/// Order up to `S` below `s`; optionally also at `s` itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SsPolicy {
    pub s: i64,
    #[serde(rename = "S")]
    pub big_s: i64,
    pub order_at_s: bool,
}

impl SsPolicy {
    pub fn new(s: i64, big_s: i64) -> Result<Self> {
        if s > big_s {
            return Err(Error::InvalidArgument(format!("policy needs s <= S, got s = {s}, S = {big_s}")));
        }
        Ok(Self {
            s,
            big_s,
            order_at_s: false,
        })
    }

    pub fn ordering_at_s(mut self) -> Self {
        self.order_at_s = true;
        self
    }

    /// Lowest state at which the policy does not order.
    #[inline]
    pub fn lowest_idle(&self) -> i64 {
        if self.order_at_s && self.s < self.big_s {
            self.s + 1
        } else {
            self.s
        }
    }

    #[inline]
    pub fn orders(&self, x: i64) -> bool {
        x < self.lowest_idle()
    }

    /// Order quantity at `x`.
    #[inline]
    pub fn action(&self, x: i64) -> i64 {
        if self.orders(x) {
            self.big_s - x
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalKind {
    Discounted,
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMethod {
    LinearSolve,
    Iterative,
    Stationary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct EvalResult<T: Scalar = f64> {
    pub kind: EvalKind,
    pub method: EvalMethod,
    pub policy: SsPolicy,
    pub alpha: Option<T>,
    /// Discounted value (discounted) or bias with `b(S) = 0` (average).
    pub value: ValueTable<T>,
    pub gain: Option<T>,
    /// `sup |v - c_π - α P_π v|` on the grid (discounted), or the
    /// forward-substitution consistency defect of the bias (average).
    pub residual: T,
}

impl<T: Scalar> EvalResult<T> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One-period expected cost of `pol` at `x`.
#[inline]
fn stage_cost<T: Scalar>(pol: &SsPolicy, p: &ProblemSpec<T>, x: i64) -> T {
    let a = pol.action(x);
    let order = if a > 0 {
        p.fixed_cost + p.unit_cost * T::of_i64(a)
    } else {
        T::zero()
    };
    order + p.expected_holding(x + a)
}

/// Values of the non-ordering states `[lo, hi]` as affine functions
/// `a + b·B` of the unknown `B`, where ordering states are worth
/// `K + c (S - x) + B`. Each state depends only on states below it, with
/// zero demand handled by dividing out the self-loop.
fn affine_forward<T: Scalar>(
    pol: &SsPolicy,
    p: &ProblemSpec<T>,
    alpha: T,
    lo: i64,
    hi: i64,
    stage: impl Fn(i64) -> T,
    order_coef: (T, T),
) -> Vec<(T, T)> {
    let n = (hi - lo + 1).max(0) as usize;
    let mut out: Vec<(T, T)> = Vec::with_capacity(n);
    let p0 = p.demand.prob_zero();
    let self_loop = T::one() - alpha * p0;
    let ordered = |y: i64| {
        (p.fixed_cost + p.unit_cost * T::of_i64(pol.big_s - y) + order_coef.0, order_coef.1)
    };
    for x in lo..=hi {
        let mut a = stage(x);
        let mut b = T::zero();
        for &(d, q) in p.demand.atoms() {
            if d == 0 {
                continue;
            }
            let y = x - d;
            let (ya, yb) = if y < lo { ordered(y) } else { out[(y - lo) as usize] };
            a = a + alpha * q * ya;
            b = b + alpha * q * yb;
        }
        out.push((a / self_loop, b / self_loop));
    }
    out
}

/// Exact discounted value of an (s, S) policy on the whole integer line,
/// reported on the grid.
pub fn evaluate_discounted<T: Scalar>(pol: &SsPolicy, p: &ProblemSpec<T>, alpha: T) -> Result<EvalResult<T>> {
    require_alpha_discount(alpha)?;
    let grid = p.grid();
    let lo = pol.lowest_idle();
    let hi = grid.max.max(pol.big_s);
    let table = affine_forward(pol, p, alpha, lo, hi, |x| p.expected_holding(x), (T::zero(), T::one()));
    // B = v(S) where S does not order.
    let (a, b) = table[(pol.big_s - lo) as usize];
    let big_b = a / (T::one() - b);
    let value_at = |x: i64| {
        if x < lo {
            p.fixed_cost + p.unit_cost * T::of_i64(pol.big_s - x) + big_b
        } else {
            let (a, b) = table[(x - lo) as usize];
            a + b * big_b
        }
    };
    let values: Vec<T> = grid.points().map(value_at).collect();
    let v = ValueTable {
        grid,
        values,
        below_grid_slope: if lo > grid.min { p.unit_cost } else { T::zero() },
    };
    let residual = grid
        .points()
        .map(|x| {
            let y = x + pol.action(x);
            let next = p.demand.expect(|d| value_at(y - d));
            (value_at(x) - stage_cost(pol, p, x) - alpha * next).abs()
        })
        .fold(T::zero(), T::max);
    Ok(EvalResult {
        kind: EvalKind::Discounted,
        method: EvalMethod::LinearSolve,
        policy: *pol,
        alpha: Some(alpha),
        value: v,
        gain: None,
        residual,
    })
}

/// Expected number of periods, per ordering cycle, spent at post-order
/// level `S - k` for `k = 0..=S - lowest_idle`.
fn renewal_mass<T: Scalar>(pol: &SsPolicy, p: &ProblemSpec<T>, discount: T) -> Vec<T> {
    let span = (pol.big_s - pol.lowest_idle()).max(0) as usize;
    let self_loop = T::one() - discount * p.demand.prob_zero();
    let mut m = vec![T::zero(); span + 1];
    for k in 0..=span {
        let mut acc = if k == 0 { T::one() } else { T::zero() };
        for &(d, q) in p.demand.atoms() {
            let d = d as usize;
            if d == 0 || d > k {
                continue;
            }
            acc = acc + discount * q * m[k - d];
        }
        m[k] = acc / self_loop;
    }
    m
}

/// Long-run average cost of an (s, S) policy from the renewal-reward
/// theorem; exact and independent of the grid.
pub fn average_cost_renewal<T: Scalar>(pol: &SsPolicy, p: &ProblemSpec<T>) -> T {
    let m = renewal_mass(pol, p, T::one());
    let mut length = T::zero();
    let mut holding = T::zero();
    for (k, &mk) in m.iter().enumerate() {
        length = length + mk;
        holding = holding + mk * p.expected_holding(pol.big_s - k as i64);
    }
    p.unit_cost * p.demand.mean() + (p.fixed_cost + holding) / length
}

/// Average cost via the stationary distribution of the policy chain on the
/// grid (damped power iteration), plus the bias normalized at `S`.
pub fn evaluate_average<T: Scalar>(pol: &SsPolicy, p: &ProblemSpec<T>) -> Result<EvalResult<T>> {
    let grid = p.grid();
    let dmax = p.demand.max_value();
    let lo_reach = pol.lowest_idle() - dmax;
    if lo_reach < grid.min {
        return Err(Error::Degenerate(format!(
            "policy (s = {}, S = {}) reaches {lo_reach}, below the grid minimum {}",
            pol.s, pol.big_s, grid.min
        )));
    }
    if pol.big_s > grid.max {
        return Err(Error::Degenerate(format!(
            "order-up-to level {} exceeds the grid maximum {}",
            pol.big_s, grid.max
        )));
    }
    let n = grid.len();
    let next_of = |x: i64| x + pol.action(x);
    check_single_class(pol, p)?;

    let mut pi = vec![T::zero(); n];
    pi[grid.index(pol.big_s)] = T::one();
    let half = T::lit(0.5);
    let mut step = vec![T::zero(); n];
    let mut converged = false;
    for _ in 0..2_000_000 {
        step.iter_mut().for_each(|v| *v = T::zero());
        for (i, &mass) in pi.iter().enumerate() {
            if mass == T::zero() {
                continue;
            }
            let y = next_of(grid.point(i));
            for &(d, q) in p.demand.atoms() {
                let j = grid.index(y - d);
                step[j] = step[j] + q * mass;
            }
        }
        let mut change = T::zero();
        for i in 0..n {
            let new = half * pi[i] + half * step[i];
            change = change + (new - pi[i]).abs();
            pi[i] = new;
        }
        if change <= T::tol(1e-14) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged {
            iterations: 2_000_000,
            residual: f64::NAN,
        });
    }
    let gain = grid
        .points()
        .zip(&pi)
        .map(|(x, &m)| m * stage_cost(pol, p, x))
        .sum::<T>();

    // Bias: b(x) = K + c(S - x) + b(S) for ordering states, b(S) = 0.
    let lo = pol.lowest_idle();
    let table = affine_forward(
        pol,
        p,
        T::one(),
        lo,
        grid.max,
        |x| p.expected_holding(x) - gain,
        (T::zero(), T::zero()),
    );
    let bias_at = |x: i64| {
        if x < lo {
            p.fixed_cost + p.unit_cost * T::of_i64(pol.big_s - x)
        } else {
            table[(x - lo) as usize].0
        }
    };
    let residual = bias_at(pol.big_s).abs();
    let value = ValueTable {
        grid,
        values: grid.points().map(bias_at).collect(),
        below_grid_slope: p.unit_cost,
    };
    Ok(EvalResult {
        kind: EvalKind::Average,
        method: EvalMethod::Stationary,
        policy: *pol,
        alpha: None,
        value,
        gain: Some(gain),
        residual,
    })
}

/// Every state reachable from `S` can reach an ordering state. All ordering
/// states share one successor distribution, so this leaves a single closed
/// class.
fn check_single_class<T: Scalar>(pol: &SsPolicy, p: &ProblemSpec<T>) -> Result<()> {
    let grid = p.grid();
    let n = grid.len();
    let start = grid.index(pol.big_s);
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    while let Some(i) = stack.pop() {
        let y = grid.point(i) + pol.action(grid.point(i));
        for &(d, q) in p.demand.atoms() {
            if q > T::zero() && grid.contains(y - d) {
                let j = grid.index(y - d);
                preds[j].push(i);
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    let mut back = vec![false; n];
    let mut stack: Vec<usize> = (0..n)
        .filter(|&i| seen[i] && pol.orders(grid.point(i)))
        .collect();
    for &i in &stack {
        back[i] = true;
    }
    while let Some(j) = stack.pop() {
        for &i in &preds[j] {
            if !back[i] {
                back[i] = true;
                stack.push(i);
            }
        }
    }
    if let Some(i) = (0..n).find(|&i| seen[i] && !back[i]) {
        return Err(Error::Reducible(format!(
            "state {} is reachable from S = {} but never triggers an order",
            grid.point(i),
            pol.big_s
        )));
    }
    Ok(())
}

/// Objective for exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "criterion", content = "alpha", rename_all = "snake_case")]
pub enum Criterion {
    Discounted(f64),
    Average,
}

/// Rectangle of candidate thresholds; pairs with `s > S` are skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchWindow {
    pub s_lo: i64,
    pub s_hi: i64,
    pub big_s_lo: i64,
    pub big_s_hi: i64,
}

impl SearchWindow {
    /// `x_min ≤ s ≤ S ≤ S*_α + margin` with `α = 1` for the average criterion.
    pub fn default_for<T: Scalar>(p: &ProblemSpec<T>, criterion: Criterion, margin: i64) -> Result<Self> {
        let alpha = match criterion {
            Criterion::Discounted(a) => T::lit(a),
            Criterion::Average => T::one(),
        };
        let rep = check_assumptions(p, alpha)?;
        let grid = p.grid();
        let hi = (rep.s_star_alpha + margin).min(grid.max);
        Ok(Self {
            s_lo: grid.min,
            s_hi: hi,
            big_s_lo: grid.min,
            big_s_hi: hi,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct SearchResult<T: Scalar = f64> {
    pub policy: SsPolicy,
    /// Value at the reference state (discounted) or gain (average).
    pub value: T,
    pub reference_state: i64,
    pub evaluated: usize,
}

/// Brute force over every (s, S) in the window. Discounted pairs are ranked
/// by their value at the grid midpoint; average pairs by exact gain.
pub fn exhaustive_ss_search<T: Scalar>(
    p: &ProblemSpec<T>,
    criterion: Criterion,
    window: SearchWindow,
) -> Result<SearchResult<T>> {
    let reference = p.grid().midpoint();
    let pairs: Vec<(i64, i64)> = (window.s_lo..=window.s_hi)
        .flat_map(|s| (s.max(window.big_s_lo)..=window.big_s_hi).map(move |b| (s, b)))
        .collect();
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("search window contains no pair with s <= S".into()));
    }
    let scored: Vec<Result<(usize, T)>> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, &(s, b))| {
            let pol = SsPolicy::new(s, b)?;
            let v = match criterion {
                Criterion::Discounted(a) => one_state_value(&pol, p, T::lit(a), reference)?,
                Criterion::Average => average_cost_renewal(&pol, p),
            };
            Ok((i, v))
        })
        .collect();
    let mut best: Option<(usize, T)> = None;
    for r in scored {
        let (i, v) = r?;
        match best {
            Some((_, bv)) if !(v < bv - T::tol(1e-13) * (T::one() + bv.abs())) => {}
            _ => best = Some((i, v)),
        }
    }
    let (i, value) = best.expect("nonempty");
    Ok(SearchResult {
        policy: SsPolicy::new(pairs[i].0, pairs[i].1)?,
        value,
        reference_state: reference,
        evaluated: pairs.len(),
    })
}

/// Discounted value of `pol` at a single state, without building the table.
fn one_state_value<T: Scalar>(pol: &SsPolicy, p: &ProblemSpec<T>, alpha: T, x: i64) -> Result<T> {
    require_alpha_discount(alpha)?;
    let lo = pol.lowest_idle();
    let hi = x.max(pol.big_s);
    let table = affine_forward(pol, p, alpha, lo, hi, |y| p.expected_holding(y), (T::zero(), T::one()));
    let (a, b) = table[(pol.big_s - lo) as usize];
    let big_b = a / (T::one() - b);
    Ok(if x < lo {
        p.fixed_cost + p.unit_cost * T::of_i64(pol.big_s - x) + big_b
    } else {
        let (a, b) = table[(x - lo) as usize];
        a + b * big_b
    })
}

/// Outcome of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimStats {
    pub horizon: usize,
    pub replications: usize,
    pub seed: u64,
    pub mean_cost_per_period: f64,
    /// Half width of the 95% Student-t interval: across replications when
    /// there are at least two, otherwise over 20 batch means.
    pub confidence_halfwidth: f64,
    pub replication_means: Vec<f64>,
    pub order_frequency: f64,
    pub mean_inventory: f64,
    pub min_inventory: i64,
    pub max_inventory: i64,
}

impl SimStats {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `|mean - target| ≤ halfwidth`.
    pub fn covers(&self, target: f64) -> bool {
        (self.mean_cost_per_period - target).abs() <= self.confidence_halfwidth
    }
}

pub(crate) const BATCHES: usize = 20;

/// One replication's path summary.
pub(crate) struct PathSummary {
    pub costs_sum: f64,
    pub batch_means: Vec<f64>,
    pub orders: usize,
    pub inventory_sum: f64,
    pub min_inv: i64,
    pub max_inv: i64,
}

pub(crate) fn demand_sampler<T: Scalar>(p: &ProblemSpec<T>) -> (Vec<i64>, WeightedIndex<f64>) {
    let values = p.demand.atoms().iter().map(|a| a.0).collect();
    let weights: Vec<f64> = p.demand.atoms().iter().map(|a| a.1.as_f64()).collect();
    (values, WeightedIndex::new(weights).expect("valid demand weights"))
}

pub(crate) fn replication_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

/// Runs `step(rng) -> (cost, ordered, inventory)` for `horizon` periods.
pub(crate) fn run_path(
    horizon: usize,
    rng: &mut ChaCha8Rng,
    mut step: impl FnMut(&mut ChaCha8Rng) -> (f64, bool, i64),
) -> PathSummary {
    let batch_len = (horizon / BATCHES).max(1);
    let mut out = PathSummary {
        costs_sum: 0.0,
        batch_means: Vec::with_capacity(BATCHES),
        orders: 0,
        inventory_sum: 0.0,
        min_inv: i64::MAX,
        max_inv: i64::MIN,
    };
    let mut batch = 0.0;
    let mut in_batch = 0usize;
    for _ in 0..horizon {
        let (cost, ordered, inv) = step(rng);
        out.costs_sum += cost;
        out.orders += ordered as usize;
        out.inventory_sum += inv as f64;
        out.min_inv = out.min_inv.min(inv);
        out.max_inv = out.max_inv.max(inv);
        batch += cost;
        in_batch += 1;
        if in_batch == batch_len && out.batch_means.len() < BATCHES {
            out.batch_means.push(batch / batch_len as f64);
            batch = 0.0;
            in_batch = 0;
        }
    }
    out
}

fn student_halfwidth(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        return 0.0;
    }
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    t * (var / n as f64).sqrt()
}

pub(crate) fn collect_stats(horizon: usize, seed: u64, paths: Vec<PathSummary>) -> SimStats {
    let reps = paths.len();
    let means: Vec<f64> = paths.iter().map(|p| p.costs_sum / horizon as f64).collect();
    let mean = means.iter().sum::<f64>() / reps as f64;
    let halfwidth = if reps >= 2 {
        student_halfwidth(&means)
    } else {
        student_halfwidth(&paths[0].batch_means)
    };
    let total = (horizon * reps) as f64;
    SimStats {
        horizon,
        replications: reps,
        seed,
        mean_cost_per_period: mean,
        confidence_halfwidth: halfwidth,
        replication_means: means,
        order_frequency: paths.iter().map(|p| p.orders as f64).sum::<f64>() / total,
        mean_inventory: paths.iter().map(|p| p.inventory_sum).sum::<f64>() / total,
        min_inventory: paths.iter().map(|p| p.min_inv).min().unwrap_or(0),
        max_inventory: paths.iter().map(|p| p.max_inv).max().unwrap_or(0),
    }
}

/// Simulates the policy from `x_0 = S` with one independent demand stream
/// per replication split off the master seed.
pub fn simulate<T: Scalar>(
    pol: &SsPolicy,
    p: &ProblemSpec<T>,
    horizon: usize,
    replications: usize,
    seed: u64,
) -> Result<SimStats> {
    if horizon == 0 || replications == 0 {
        return Err(Error::InvalidArgument("horizon and replications must be positive".into()));
    }
    let (values, dist) = demand_sampler(p);
    let k = p.fixed_cost.as_f64();
    let c = p.unit_cost.as_f64();
    let paths: Vec<PathSummary> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(seed, rep);
            let mut x = pol.big_s;
            run_path(horizon, &mut rng, |rng| {
                let a = pol.action(x);
                let d = values[dist.sample(rng)];
                let y = x + a;
                let mut cost = p.holding.eval(y - d).as_f64();
                if a > 0 {
                    cost += k + c * a as f64;
                }
                x = y - d;
                (cost, a > 0, x)
            })
        })
        .collect();
    Ok(collect_stats(horizon, seed, paths))
}

/// `ū_α(x)` from its renewal expansion
/// `Σ_{k ≤ x-s} M(k) (E[h_α(x - k - D)] - (1-α) m̄) + K (1 - (1-α) Σ_{k ≤ x-s} M(k))`
/// with `M(k) = Σ_j α^j P(S_j = k)`, which is exact for integer demand.
/// Below `s` the relative value is `K`.
pub fn renewal_u_bar<T: Scalar>(p: &ProblemSpec<T>, alpha: T, sol: &BellmanSolution<T>, x: i64) -> Result<T> {
    require_alpha_open(alpha)?;
    if x < sol.s {
        return Ok(p.fixed_cost);
    }
    let m_bar = sol.m_alpha;
    let pol = SsPolicy::new(sol.s, x)?;
    let masses = renewal_mass(&pol, p, alpha);
    let one_minus = T::one() - alpha;
    let mut total = T::zero();
    let mut acc = T::zero();
    for (k, &mk) in masses.iter().enumerate() {
        total = total + mk;
        acc = acc + mk * (p.transformed_cost_at(alpha, x - k as i64) - one_minus * m_bar);
    }
    Ok(acc + p.fixed_cost * (T::one() - one_minus * total))
}
