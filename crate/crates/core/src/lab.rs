//! Discount-factor sweeps and numerical checks of the vanishing-discount
//! limit theory: threshold convergence, gain limits, relative-value
//! convergence, ACOE residuals and the uniqueness set of lower thresholds.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::dp::{
    acoe_gap, build_h, extract_thresholds, transformed_model_vi, value_iteration_discounted, AverageSolution,
    BellmanSolution, GTable, ValueTable, DEFAULT_MAX_ITER,
};
use crate::error::{Error, Result};
use crate::model::{check_assumptions, default_interior_window, ProblemSpec};
use crate::policy::{evaluate_average, SsPolicy};
use crate::scalar::Scalar;

/// Default tolerance for membership in the lower-threshold set.
pub const GCAL_REL_TOL: f64 = 1e-7;
/// Tolerance for the pointwise lemma inequalities.
pub const LEMMA_TOL: f64 = 1e-8;

/// `α_k = 1 - 2^-k`, `k = 1..=n`.
pub fn default_schedule(n: u32) -> Vec<f64> {
    (1..=n).map(|k| 1.0 - 0.5f64.powi(k as i32)).collect()
}

/// Per-discount-factor diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct SweepRecord<T: Scalar = f64> {
    pub alpha: T,
    pub s_alpha: i64,
    #[serde(rename = "S_alpha")]
    pub big_s_alpha: i64,
    pub r_alpha: i64,
    #[serde(rename = "S_star_alpha")]
    pub s_star_alpha: i64,
    pub m_alpha: T,
    pub m_bar_alpha: T,
    pub scaled_gain: T,
    pub scaled_gain_bar: T,
    pub h_alpha_at_s: T,
    /// `u_α = v_α - m_α`.
    pub u_alpha: ValueTable<T>,
    #[serde(skip)]
    pub solution: BellmanSolution<T>,
    #[serde(skip)]
    pub transformed: BellmanSolution<T>,
}

impl<T: Scalar> SweepRecord<T> {
    pub fn policy(&self) -> SsPolicy {
        SsPolicy {
            s: self.s_alpha,
            big_s: self.big_s_alpha,
            order_at_s: false,
        }
    }
}

/// Solves the original and the transformed discounted model at one `α`.
pub fn sweep_point<T: Scalar>(p: &ProblemSpec<T>, alpha: T, tol: T) -> Result<SweepRecord<T>> {
    let sol = value_iteration_discounted(p, alpha, tol, DEFAULT_MAX_ITER)?;
    let bar = transformed_model_vi(p, alpha, tol, DEFAULT_MAX_ITER)?;
    let rep = check_assumptions(p, alpha)?;
    let one_minus = T::one() - alpha;
    Ok(SweepRecord {
        alpha,
        s_alpha: sol.s,
        big_s_alpha: sol.big_s,
        r_alpha: rep.r_alpha,
        s_star_alpha: rep.s_star_alpha,
        m_alpha: sol.m_alpha,
        m_bar_alpha: bar.m_alpha,
        scaled_gain: one_minus * sol.m_alpha,
        scaled_gain_bar: one_minus * bar.m_alpha,
        h_alpha_at_s: p.transformed_cost_at(alpha, sol.s),
        u_alpha: sol.v.shifted(-sol.m_alpha),
        solution: sol,
        transformed: bar,
    })
}

/// One record per `α`, computed concurrently; a failing `α` yields an error
/// in its slot without aborting the others.
pub fn run_sweep<T: Scalar>(p: &ProblemSpec<T>, schedule: &[T], tol: T) -> Result<Vec<Result<SweepRecord<T>>>> {
    for (i, &a) in schedule.iter().enumerate() {
        if !(a > T::zero() && a < T::one()) {
            return Err(Error::InvalidAlpha(a.as_f64()));
        }
        if i > 0 && !(a > schedule[i - 1]) {
            return Err(Error::InvalidArgument(format!(
                "schedule must be strictly increasing; entry {i} is {a}"
            )));
        }
    }
    Ok(schedule.par_iter().map(|&a| sweep_point(p, a, tol)).collect())
}

pub fn write_sweep_csv<T: Scalar, W: Write>(records: &[SweepRecord<T>], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record([
        "alpha",
        "s_alpha",
        "S_alpha",
        "r_alpha",
        "S_star_alpha",
        "m_alpha",
        "m_bar_alpha",
        "scaled_gain",
        "scaled_gain_bar",
        "h_alpha_at_s",
    ])?;
    let f = |v: T| format!("{:?}", v.as_f64());
    for r in records {
        wtr.write_record([
            f(r.alpha),
            r.s_alpha.to_string(),
            r.big_s_alpha.to_string(),
            r.r_alpha.to_string(),
            r.s_star_alpha.to_string(),
            f(r.m_alpha),
            f(r.m_bar_alpha),
            f(r.scaled_gain),
            f(r.scaled_gain_bar),
            f(r.h_alpha_at_s),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

/// Outcome of one check with its numbers and any offending points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub status: Status,
    pub metrics: BTreeMap<String, f64>,
    pub witnesses: Vec<String>,
}

impl CheckReport {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            status: Status::Pass,
            metrics: BTreeMap::new(),
            witnesses: Vec::new(),
        }
    }

    fn metric(&mut self, key: &str, v: f64) -> &mut Self {
        self.metrics.insert(key.to_string(), v);
        self
    }

    fn fail(&mut self, why: String) {
        self.status = Status::Fail;
        self.witnesses.push(why);
    }

    fn inconclusive(name: &str, why: &str) -> Self {
        let mut r = Self::new(name);
        r.status = Status::Inconclusive;
        r.witnesses.push(why.to_string());
        r
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}

/// Stabilization of `s_α`, agreement with the average-cost thresholds and
/// near-optimality of the last discounted policy for the average criterion.
pub fn check_threshold_convergence<T: Scalar>(
    records: &[SweepRecord<T>],
    avg: &AverageSolution<T>,
    p: &ProblemSpec<T>,
) -> Result<CheckReport> {
    const NAME: &str = "threshold_convergence";
    if records.len() < 4 {
        return Ok(CheckReport::inconclusive(NAME, "needs at least 4 sweep records"));
    }
    let mut rep = CheckReport::new(NAME);
    let last = &records[records.len() - 1];
    let tail = &records[records.len() - 4..];
    if let Some(r) = tail.iter().find(|r| r.s_alpha != last.s_alpha) {
        rep.fail(format!("s_alpha = {} at alpha = {} differs from {}", r.s_alpha, r.alpha, last.s_alpha));
    }
    if (last.s_alpha - avg.s).abs() > 1 {
        rep.fail(format!("s_alpha = {} vs average-cost s = {}", last.s_alpha, avg.s));
    }
    let r1 = check_assumptions(p, T::one())?.r_alpha;
    if last.s_alpha > r1 {
        rep.fail(format!("s_alpha = {} exceeds r_1 = {r1}", last.s_alpha));
    }
    let (lo, hi) = default_interior_window(p)?;
    for r in records {
        if r.s_alpha < lo || r.big_s_alpha > hi {
            rep.fail(format!(
                "thresholds ({}, {}) at alpha = {} leave the interior window [{lo}, {hi}]",
                r.s_alpha, r.big_s_alpha, r.alpha
            ));
        }
    }
    let eval = evaluate_average(&last.policy(), p)?;
    let w_pol = eval.gain.expect("average evaluation has a gain");
    let gap = (w_pol - avg.w).abs();
    let tol = T::lit(1e-4) * (T::one() + avg.w.abs());
    if gap > tol {
        rep.fail(format!("policy gain {w_pol} vs w = {} (gap {gap})", avg.w));
    }
    rep.metric("s_last", last.s_alpha as f64)
        .metric("S_last", last.big_s_alpha as f64)
        .metric("s_average", avg.s as f64)
        .metric("r_1", r1 as f64)
        .metric("policy_gain", w_pol.as_f64())
        .metric("gain_gap", gap.as_f64());
    Ok(rep)
}

/// Terminal gaps of `(1-α) m_α`, `(1-α) m̄_α` and `E[h_α(s_α - D)]` to `w`,
/// each required to be small and decreasing over the last three records.
pub fn check_gain_limits<T: Scalar>(records: &[SweepRecord<T>], avg: &AverageSolution<T>) -> CheckReport {
    const NAME: &str = "gain_limits";
    if records.len() < 3 {
        return CheckReport::inconclusive(NAME, "needs at least 3 sweep records");
    }
    let mut rep = CheckReport::new(NAME);
    let w = avg.w;
    let tol = T::lit(1e-2) * (T::one() + w.abs());
    type Getter<T> = fn(&SweepRecord<T>) -> T;
    let seqs: [(&str, Getter<T>); 3] = [
        ("scaled_gain", |r| r.scaled_gain),
        ("scaled_gain_bar", |r| r.scaled_gain_bar),
        ("h_alpha_at_s", |r| r.h_alpha_at_s),
    ];
    let n = records.len();
    for (name, get) in seqs {
        let gaps: Vec<T> = records[n - 3..].iter().map(|r| (get(r) - w).abs()).collect();
        rep.metric(&format!("{name}_terminal_gap"), gaps[2].as_f64());
        if gaps[2] > tol {
            rep.fail(format!("{name}: terminal gap {} above {}", gaps[2], tol));
        }
        if !(gaps[1] < gaps[0] && gaps[2] < gaps[1]) {
            rep.fail(format!(
                "{name}: last three gaps {:?} are not decreasing",
                gaps.iter().map(|g| g.as_f64()).collect::<Vec<_>>()
            ));
        }
    }
    rep.metric("w", w.as_f64());
    rep
}

/// Discrete bracket around `(1-α)(m̄_α + K) = E[h_α(s_α - D)]`.
pub fn check_lemma_value_identity<T: Scalar>(record: &SweepRecord<T>, p: &ProblemSpec<T>) -> CheckReport {
    let mut rep = CheckReport::new("value_identity_bracket");
    let a = record.alpha;
    let s = record.s_alpha;
    let g = &record.transformed.g;
    let mid = (T::one() - a) * (record.m_bar_alpha + p.fixed_cost);
    let at_s = p.transformed_cost_at(a, s);
    let below = p.transformed_cost_at(a, s - 1);
    let eps = if g.grid.contains(s - 1) {
        g.at(s - 1) - g.at(s)
    } else {
        T::infinity()
    };
    let upper_gap = at_s - mid;
    let lower_gap = mid - below;
    rep.metric("alpha", a.as_f64())
        .metric("grid_epsilon", eps.as_f64())
        .metric("upper_gap", upper_gap.as_f64())
        .metric("lower_gap", lower_gap.as_f64())
        .metric("bracket_width", (below - at_s).abs().as_f64());
    let slack = T::tol(1e-9) * (T::one() + mid.abs());
    if upper_gap > eps + slack {
        rep.fail(format!("E[h_a(s - D)] - (1-a)(m_bar + K) = {upper_gap} exceeds {eps}"));
    }
    if lower_gap > eps + slack {
        rep.fail(format!("(1-a)(m_bar + K) - E[h_a(s - 1 - D)] = {lower_gap} exceeds {eps}"));
    }
    rep
}

/// Points `x ≥ s` such that `G(y)` equals `K + G(S)` within tolerance for
/// every `y ∈ [s, x]`; may be empty on the integer grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GcalSet {
    /// Discount factor, or `None` for the average-cost `H` table.
    pub alpha: Option<f64>,
    pub s: i64,
    #[serde(rename = "S")]
    pub big_s: i64,
    pub level: f64,
    pub tolerance: f64,
    pub members: Vec<i64>,
}

pub fn compute_gcal<T: Scalar>(g: &GTable<T>, k: T, rel_tol: f64, average: bool) -> GcalSet {
    let (s, big_s) = extract_thresholds(g, k);
    let level = k + g.at(big_s);
    let tol = T::lit(rel_tol) * (T::one() + level.abs());
    let members = (s..=big_s)
        .take_while(|&x| (g.at(x) - level).abs() <= tol)
        .collect();
    GcalSet {
        alpha: (!average).then(|| g.alpha.as_f64()),
        s,
        big_s,
        level: level.as_f64(),
        tolerance: tol.as_f64(),
        members,
    }
}

/// `sup` over the window of `|u_α - u|`, decreasing on the last three
/// records and small at the last; also the linear structure of `u` below `s`.
pub fn check_u_convergence<T: Scalar>(
    records: &[SweepRecord<T>],
    avg: &AverageSolution<T>,
    p: &ProblemSpec<T>,
    window: (i64, i64),
) -> CheckReport {
    const NAME: &str = "u_convergence";
    if records.len() < 3 {
        return CheckReport::inconclusive(NAME, "needs at least 3 sweep records");
    }
    let mut rep = CheckReport::new(NAME);
    let n = records.len();
    let (lo, hi) = window;
    let mut gaps = Vec::new();
    let mut worst_x = lo;
    for r in &records[n - 3..] {
        let mut g = T::zero();
        for x in lo..=hi {
            let d = (r.u_alpha.at(x) - avg.u.at(x)).abs();
            if d > g {
                g = d;
                worst_x = x;
            }
        }
        gaps.push(g);
    }
    let max_u = (lo..=hi).map(|x| avg.u.at(x)).fold(T::zero(), T::max);
    let tol = T::lit(1e-2) * (T::one() + max_u);
    rep.metric("terminal_sup_gap", gaps[2].as_f64())
        .metric("tolerance", tol.as_f64())
        .metric("worst_x", worst_x as f64);
    if gaps[2] > tol {
        rep.fail(format!("terminal sup gap {} at x = {worst_x} exceeds {tol}", gaps[2]));
    }
    if !(gaps[1] < gaps[0] && gaps[2] < gaps[1]) {
        rep.fail(format!(
            "sup gaps {:?} over the last three records are not decreasing",
            gaps.iter().map(|g| g.as_f64()).collect::<Vec<_>>()
        ));
    }
    // Linear region: every state below s orders up to S, so on the integers
    // u(x) - u(s - 1) = c (s - 1 - x) for x < s. The step from s - 1 to s
    // carries the discreteness defect and is only reported.
    let anchor = avg.s - 1;
    let mut slope_err = T::zero();
    for x in lo..anchor.min(hi + 1) {
        let d = avg.u.at(x) - avg.u.at(anchor) - p.unit_cost * T::of_i64(anchor - x);
        slope_err = slope_err.max(d.abs());
    }
    let defect = avg.u.at(anchor) - avg.u.at(avg.s) - p.unit_cost;
    rep.metric("linear_region_error", slope_err.as_f64())
        .metric("step_defect_at_s", defect.as_f64());
    if slope_err > T::lit(1e-8) * (T::one() + max_u) {
        rep.fail(format!("u is not linear with slope -c below s (error {slope_err})"));
    }
    rep
}

/// Modulus of continuity `max |u_α(x) - u_α(y)|` over `|x - y| ≤ delta` in
/// the window, per record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusReport {
    pub delta: i64,
    pub window: (i64, i64),
    pub alphas: Vec<f64>,
    pub moduli: Vec<f64>,
    /// Largest modulus over the second half of the sweep (the family
    /// `α ∈ [β, 1)` with `β` the median sweep point) relative to the modulus
    /// at `β`.
    pub growth: f64,
    pub bounded: bool,
}

pub fn modulus<T: Scalar>(u: &ValueTable<T>, delta: i64, window: (i64, i64)) -> T {
    let (lo, hi) = window;
    let mut m = T::zero();
    for x in lo..=hi {
        for y in x + 1..=(x + delta).min(hi) {
            m = m.max((u.at(x) - u.at(y)).abs());
        }
    }
    m
}

pub fn equicontinuity_probe<T: Scalar>(records: &[SweepRecord<T>], delta: i64, window: (i64, i64)) -> ModulusReport {
    let moduli: Vec<f64> = records
        .iter()
        .map(|r| modulus(&r.u_alpha, delta.max(0), window).as_f64())
        .collect();
    let half = moduli.len() / 2;
    let base = moduli.get(half).copied().unwrap_or(0.0);
    let tail = moduli[half.min(moduli.len())..].iter().copied().fold(0.0, f64::max);
    let growth = if base > 0.0 { tail / base } else if tail > 0.0 { f64::INFINITY } else { 1.0 };
    ModulusReport {
        delta,
        window,
        alphas: records.iter().map(|r| r.alpha.as_f64()).collect(),
        moduli,
        growth,
        bounded: growth <= 1.1,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcoeReport {
    pub residual: f64,
    pub window: (i64, i64),
    /// `H(s) - K - H(S)`: zero in the continuous model, a discreteness
    /// defect on the grid.
    pub both_actions_gap: f64,
    /// Thresholds re-extracted from `H` agree with the solution.
    pub thresholds_consistent: bool,
}

/// Recomputes both sides of the average-cost optimality equation from `u`.
pub fn acoe_residual<T: Scalar>(avg: &AverageSolution<T>, p: &ProblemSpec<T>, window: (i64, i64)) -> AcoeReport {
    let residual = acoe_gap(&avg.u, avg.w, p, window);
    let h = build_h(&avg.u, p);
    let (s, big_s) = extract_thresholds(&h, p.fixed_cost);
    AcoeReport {
        residual: residual.as_f64(),
        window,
        both_actions_gap: (h.at(s) - p.fixed_cost - h.at(big_s)).as_f64(),
        thresholds_consistent: (s, big_s) == (avg.s, avg.big_s),
    }
}

/// Pointwise structural inequalities at one discount factor:
/// K-bounded monotonicity of `v̄`, the increment bound on `Ḡ`, the
/// nonincreasing region left of `r_α`, nonnegativity of `v`, the threshold
/// bound chain and the `m̄_α` bracket.
pub fn check_lemmas_discounted<T: Scalar>(record: &SweepRecord<T>, p: &ProblemSpec<T>, window: (i64, i64)) -> CheckReport {
    let mut rep = CheckReport::new("lemmas_discounted");
    let tol = T::lit(LEMMA_TOL);
    let a = record.alpha;
    let k = p.fixed_cost;
    let vb = &record.transformed.v;
    let gb = &record.transformed.g;
    let (lo, hi) = window;
    let mut violations = 0usize;
    let mut first = |rep: &mut CheckReport, msg: String| {
        violations += 1;
        if rep.witnesses.len() < 10 {
            rep.fail(msg);
        } else {
            rep.status = Status::Fail;
        }
    };

    // v̄(x) ≤ v̄(y) + K for x ≤ y.
    let mut suffix = T::infinity();
    for x in (lo..=hi).rev() {
        suffix = suffix.min(vb.at(x));
        if vb.at(x) > suffix + k + tol {
            first(&mut rep, format!("v_bar({x}) exceeds min_(y>=x) v_bar(y) + K"));
        }
    }
    // Ḡ(y) - Ḡ(x) ≥ E[h_α(y-D)] - E[h_α(x-D)] - αK, x ≤ y.
    let f = |x: i64| gb.at(x) - p.transformed_cost_at(a, x);
    let mut prefix = T::neg_infinity();
    for y in lo..=hi {
        prefix = prefix.max(f(y));
        if f(y) + a * k + tol < prefix {
            first(&mut rep, format!("G_bar increment bound fails at y = {y}"));
        }
    }
    // Nonincreasing on [lo, r_α].
    for x in lo..record.r_alpha.min(hi) {
        if vb.at(x + 1) > vb.at(x) + tol {
            first(&mut rep, format!("v_bar increases at {x} left of r_alpha"));
        }
        if gb.at(x + 1) > gb.at(x) + tol {
            first(&mut rep, format!("G_bar increases at {x} left of r_alpha"));
        }
    }
    if let Some(x) = record.solution.v.grid.points().find(|&x| record.solution.v.at(x) < -tol) {
        first(&mut rep, format!("v_alpha({x}) is negative"));
    }
    let chain = [record.s_alpha, record.r_alpha, record.big_s_alpha, record.s_star_alpha];
    if !chain.windows(2).all(|w| w[0] <= w[1]) {
        first(&mut rep, format!("bound chain s <= r <= S <= S* fails: {chain:?}"));
    }
    let c = p.unit_cost;
    let lower = record.m_alpha + c * T::of_i64(record.s_alpha);
    let upper = record.m_alpha + c * T::of_i64(record.solution.v.argmin());
    let slack = tol * (T::one() + record.m_alpha.abs());
    if record.m_bar_alpha < lower - slack || record.m_bar_alpha > upper + slack {
        first(&mut rep, format!("m_bar = {} outside [{lower}, {upper}]", record.m_bar_alpha));
    }
    rep.metric("alpha", a.as_f64()).metric("violations", violations as f64);
    rep
}

/// The average-cost counterparts: `H` nonincreasing left of `r_1`, the
/// increment bound on `H`, and the K-bounded structure of `u(x) + c x`.
pub fn check_lemmas_average<T: Scalar>(avg: &AverageSolution<T>, p: &ProblemSpec<T>, window: (i64, i64)) -> Result<CheckReport> {
    let mut rep = CheckReport::new("lemmas_average");
    let tol = T::lit(LEMMA_TOL);
    let k = p.fixed_cost;
    let c = p.unit_cost;
    let (lo, hi) = window;
    let r1 = check_assumptions(p, T::one())?.r_alpha;
    let h = &avg.h;
    let mut violations = 0usize;
    for x in lo..r1.min(hi) {
        if h.at(x + 1) > h.at(x) + tol {
            violations += 1;
            rep.fail(format!("H increases at {x} left of r_1"));
        }
    }
    let f = |x: i64| h.at(x) - p.expected_holding(x);
    let mut prefix = T::neg_infinity();
    for y in lo..=hi {
        prefix = prefix.max(f(y));
        if f(y) + k + tol < prefix {
            violations += 1;
            rep.fail(format!("H increment bound fails at y = {y}"));
        }
    }
    let mut suffix = T::infinity();
    for x in (lo..=hi).rev() {
        let val = avg.u.at(x) + c * T::of_i64(x);
        suffix = suffix.min(val);
        if val > suffix + k + tol {
            violations += 1;
            rep.fail(format!("u(x) + c x exceeds min_(y>=x) [u(y) + c y] + K at {x}"));
        }
    }
    rep.metric("violations", violations as f64);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(values: &[f64]) -> GTable {
        GTable {
            alpha: 0.5,
            grid: crate::model::Grid::new(0, values.len() as i64 - 1).unwrap(),
            values: values.to_vec(),
        }
    }

    #[test]
    fn gcal_hand_examples() {
        let g = compute_gcal(&table(&[5.0, 3.0, 2.0, 1.0, 2.0]), 1.0, GCAL_REL_TOL, false);
        assert_eq!((g.s, g.big_s, g.members.clone()), (2, 3, vec![2]));
        let g = compute_gcal(&table(&[4.0, 2.0, 2.0, 1.0, 3.0]), 1.0, GCAL_REL_TOL, false);
        assert_eq!(g.members, vec![1, 2]);
    }

    #[test]
    fn default_schedule_values() {
        let s = default_schedule(12);
        assert_eq!(s.len(), 12);
        assert_eq!(s[0], 0.5);
        assert_eq!(s[11], 1.0 - 1.0 / 4096.0);
    }

    #[test]
    fn zero_delta_modulus() {
        let u = ValueTable {
            grid: crate::model::Grid::new(0, 3).unwrap(),
            values: vec![1.0, 2.0, 0.0, 5.0],
            below_grid_slope: 1.0,
        };
        assert_eq!(modulus(&u, 0, (0, 3)), 0.0);
        assert_eq!(modulus(&u, 1, (0, 3)), 5.0);
    }

    #[test]
    fn empty_schedule() {
        let p = crate::instances::canon1();
        assert!(run_sweep(&p, &[], 1e-9).unwrap().is_empty());
        assert!(run_sweep(&p, &[0.9, 0.8], 1e-9).is_err());
    }
}
