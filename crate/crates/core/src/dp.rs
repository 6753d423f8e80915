//! Bellman operators and solvers: finite horizon, discounted infinite horizon
//! (original and zero-unit-cost transformed model) and average cost.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    default_interior_window, require_alpha_closed, require_alpha_discount, require_alpha_open, Grid,
    ProblemSpec,
};
use crate::scalar::Scalar;

/// Relative tie tolerance for threshold comparisons.
pub const THRESHOLD_TIE_REL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 500_000;
/// Damping for the average-cost operator.
pub const RVI_DAMPING: f64 = 0.5;

/// Value function tabulated on the grid. Below `x_min` it continues
/// linearly: `v(x) = v(x_min) + below_grid_slope · (x_min - x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct ValueTable<T: Scalar = f64> {
    pub grid: Grid,
    pub values: Vec<T>,
    pub below_grid_slope: T,
}

impl<T: Scalar> ValueTable<T> {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![T::zero(); grid.len()],
            below_grid_slope: T::zero(),
        }
    }

    /// Value at any `x ≤ x_max`; points above the grid are clamped.
    #[inline]
    pub fn eval(&self, x: i64) -> T {
        if x < self.grid.min {
            self.values[0] + self.below_grid_slope * T::of_i64(self.grid.min - x)
        } else if x > self.grid.max {
            self.values[self.values.len() - 1]
        } else {
            self.values[(x - self.grid.min) as usize]
        }
    }

    #[inline]
    pub fn at(&self, x: i64) -> T {
        self.values[self.grid.index(x)]
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    /// Grid point of the smallest minimum.
    pub fn argmin(&self) -> i64 {
        let m = self.min_value();
        self.grid.point(self.values.iter().position(|&v| v == m).unwrap_or(0))
    }

    /// The same function shifted by a constant.
    pub fn shifted(&self, by: T) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| v + by).collect(),
            below_grid_slope: self.below_grid_slope,
        }
    }

    pub fn sup_distance(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }
}

/// `G(x) = c x + E[h(x - D)] + α E[v(x - D)]` on the grid (or its transformed
/// counterpart with stage cost `E[h_α(x - D)]`).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct GTable<T: Scalar = f64> {
    pub alpha: T,
    pub grid: Grid,
    pub values: Vec<T>,
}

impl<T: Scalar> GTable<T> {
    #[inline]
    pub fn at(&self, x: i64) -> T {
        self.values[self.grid.index(x)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct BellmanSolution<T: Scalar = f64> {
    pub alpha: T,
    pub v: ValueTable<T>,
    pub g: GTable<T>,
    pub s: i64,
    #[serde(rename = "S")]
    pub big_s: i64,
    pub iterations: usize,
    /// `sup |T v - v|` at the returned table.
    pub residual: T,
    /// Guaranteed sup-norm distance to the exact fixed point.
    pub error_bound: T,
    pub m_alpha: T,
    /// Order quantity chosen at each grid point.
    pub actions: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct AverageSolution<T: Scalar = f64> {
    pub w: T,
    /// Relative values, normalized so that `min u = 0`.
    pub u: ValueTable<T>,
    /// `H(x) = c x + E[h(x - D)] + E[u(x - D)]`.
    pub h: GTable<T>,
    pub s: i64,
    #[serde(rename = "S")]
    pub big_s: i64,
    pub iterations: usize,
    /// Span of `T u - u` at termination.
    pub span: T,
    /// Largest ACOE gap over the interior window.
    pub acoe_residual: T,
    pub window: (i64, i64),
    pub actions: Vec<i64>,
}

/// One stage of a finite-horizon solve, `periods_to_go` periods before the end.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct HorizonStage<T: Scalar = f64> {
    pub periods_to_go: usize,
    pub v: ValueTable<T>,
    pub g: GTable<T>,
    pub s: i64,
    #[serde(rename = "S")]
    pub big_s: i64,
    pub actions: Vec<i64>,
}

/// Terminal cost for finite-horizon problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    Zero,
    MinusCx,
}

impl std::str::FromStr for Terminal {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Self::Zero),
            "minus_cx" => Ok(Self::MinusCx),
            other => Err(Error::InvalidArgument(format!("unknown terminal cost {other:?}"))),
        }
    }
}

/// Stage cost, linear term and discount of one Bellman operator.
struct Operator<'a, T: Scalar> {
    p: &'a ProblemSpec<T>,
    alpha: T,
    /// `c x + E[h(x - D)]` or `E[h_α(x - D)]`.
    stage: Vec<T>,
    /// Coefficient of `-x` after minimization: `c` or 0.
    unit: T,
}

impl<'a, T: Scalar> Operator<'a, T> {
    fn original(p: &'a ProblemSpec<T>, alpha: T) -> Self {
        let c = p.unit_cost;
        let stage = p
            .grid()
            .points()
            .map(|x| c * T::of_i64(x) + p.expected_holding(x))
            .collect();
        Self { p, alpha, stage, unit: c }
    }

    fn transformed(p: &'a ProblemSpec<T>, alpha: T) -> Self {
        let stage = p.grid().points().map(|x| p.transformed_cost_at(alpha, x)).collect();
        Self {
            p,
            alpha,
            stage,
            unit: T::zero(),
        }
    }

    fn g(&self, v: &ValueTable<T>) -> GTable<T> {
        let grid = self.p.grid();
        let atoms = self.p.demand.atoms();
        let values = grid
            .points()
            .zip(&self.stage)
            .map(|(x, &st)| {
                let mut ev = T::zero();
                for &(d, q) in atoms {
                    ev = ev + q * v.eval(x - d);
                }
                st + self.alpha * ev
            })
            .collect();
        GTable {
            alpha: self.alpha,
            grid,
            values,
        }
    }

    /// `min{K + min_{y > x} G(y), G(x)} - unit·x` plus the chosen order quantity.
    fn improve(&self, g: &GTable<T>) -> (ValueTable<T>, Vec<i64>) {
        minimize(g, self.p.fixed_cost, self.unit)
    }

    fn apply(&self, v: &ValueTable<T>) -> (ValueTable<T>, GTable<T>, Vec<i64>) {
        let g = self.g(v);
        let (tv, actions) = self.improve(&g);
        (tv, g, actions)
    }
}

/// Suffix-minimum evaluation of the order/no-order choice.
/// Ties keep the no-order action and the lowest order-up-to level.
fn minimize<T: Scalar>(g: &GTable<T>, k: T, unit: T) -> (ValueTable<T>, Vec<i64>) {
    let n = g.values.len();
    let mut values = vec![T::zero(); n];
    let mut actions = vec![0i64; n];
    let mut best = T::infinity();
    let mut best_idx = n;
    for i in (0..n).rev() {
        let stay = g.values[i];
        let x = g.grid.point(i);
        let order = k + best;
        if best_idx < n && order < stay {
            values[i] = order - unit * T::of_i64(x);
            actions[i] = (best_idx - i) as i64;
        } else {
            values[i] = stay - unit * T::of_i64(x);
        }
        if stay <= best {
            best = stay;
            best_idx = i;
        }
    }
    (
        ValueTable {
            grid: g.grid,
            values,
            below_grid_slope: unit,
        },
        actions,
    )
}

/// `G(x) = c x + E[h(x - D)] + α E[v(x - D)]`, extending `v` below the grid.
pub fn build_g<T: Scalar>(v: &ValueTable<T>, p: &ProblemSpec<T>, alpha: T) -> GTable<T> {
    Operator::original(p, alpha).g(v)
}

/// `Ḡ(x) = E[h_α(x - D)] + α E[v̄(x - D)]` for the zero-unit-cost model.
pub fn build_g_transformed<T: Scalar>(v: &ValueTable<T>, p: &ProblemSpec<T>, alpha: T) -> GTable<T> {
    Operator::transformed(p, alpha).g(v)
}

/// One application of the discounted Bellman operator (`α = 1` gives the
/// undiscounted operator used for average cost).
pub fn bellman_discounted<T: Scalar>(v: &ValueTable<T>, p: &ProblemSpec<T>, alpha: T) -> Result<ValueTable<T>> {
    require_alpha_closed(alpha)?;
    Ok(Operator::original(p, alpha).apply(v).0)
}

/// One application of the zero-unit-cost operator.
pub fn bellman_transformed<T: Scalar>(v: &ValueTable<T>, p: &ProblemSpec<T>, alpha: T) -> Result<ValueTable<T>> {
    require_alpha_discount(alpha)?;
    Ok(Operator::transformed(p, alpha).apply(v).0)
}

/// Order quantities that minimize the right-hand side for a given `G`.
pub fn greedy_actions<T: Scalar>(g: &GTable<T>, k: T) -> Vec<i64> {
    minimize(g, k, T::zero()).1
}

/// Tie tolerance for threshold comparisons at level `K + G(S)`.
#[inline]
pub fn threshold_tie_tol<T: Scalar>(level: T) -> T {
    T::tol(THRESHOLD_TIE_REL) * (T::one() + level.abs())
}

/// `S` = smallest minimizer of `g`; `s` = smallest `x ≤ S` with
/// `g(x) ≤ K + g(S)` (up to the tie tolerance).
pub fn extract_thresholds<T: Scalar>(g: &GTable<T>, k: T) -> (i64, i64) {
    let vals = &g.values;
    let min = vals.iter().copied().fold(T::infinity(), T::min);
    let tol = threshold_tie_tol(k + min);
    let big = vals.iter().position(|&v| v <= min + tol).unwrap_or(0);
    let level = k + vals[big];
    let tol = threshold_tie_tol(level);
    let small = (0..=big).find(|&i| vals[i] <= level + tol).unwrap_or(big);
    (g.grid.point(small), g.grid.point(big))
}

/// First grid state where the `(s, S)` action is not a minimizer of the
/// right-hand side built from `g`, if any.
pub fn ss_policy_violation<T: Scalar>(g: &GTable<T>, k: T, s: i64, big_s: i64) -> Option<i64> {
    let n = g.values.len();
    let mut best = T::infinity();
    let mut out = None;
    for i in (0..n).rev() {
        let x = g.grid.point(i);
        let optimal = g.values[i].min(k + best);
        let chosen = if x < s {
            if big_s <= x {
                T::infinity()
            } else {
                k + g.at(big_s)
            }
        } else {
            g.values[i]
        };
        if chosen > optimal + threshold_tie_tol(optimal) {
            out = Some(x);
        }
        best = best.min(g.values[i]);
    }
    out
}

fn span_and_mid<T: Scalar>(a: &[T], b: &[T]) -> (T, T) {
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for (x, y) in a.iter().zip(b) {
        let d = *x - *y;
        lo = lo.min(d);
        hi = hi.max(d);
    }
    (hi - lo, (hi + lo) / T::lit(2.0))
}

fn precision_floor<T: Scalar>(values: &[T]) -> T {
    let scale = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    T::epsilon() * T::lit(64.0) * (T::one() + scale)
}

fn solve_discounted<T: Scalar>(op: Operator<'_, T>, tol: T, max_iter: usize) -> Result<BellmanSolution<T>> {
    let alpha = op.alpha;
    let grid = op.p.grid();
    let factor = alpha / (T::one() - alpha);
    let reference = grid.index(grid.midpoint());
    let mut u = ValueTable::zeros(grid);
    for it in 1..=max_iter {
        let (w, _, _) = op.apply(&u);
        let (span, mid) = span_and_mid(&w.values, &u.values);
        let bound = factor * span;
        if bound <= tol || span <= precision_floor(&w.values) {
            // MacQueen bounds: v* lies in [Tu + f·min(Tu-u), Tu + f·max(Tu-u)].
            let v = w.shifted(factor * mid);
            let (tv, g, actions) = op.apply(&v);
            let residual = tv.sup_distance(&v);
            let (s, big_s) = extract_thresholds(&g, op.p.fixed_cost);
            return Ok(BellmanSolution {
                alpha,
                m_alpha: v.min_value(),
                v,
                g,
                s,
                big_s,
                iterations: it,
                residual,
                error_bound: factor * span / T::lit(2.0),
                actions,
            });
        }
        let offset = w.values[reference];
        u = w.shifted(-offset);
        if it == max_iter {
            return Err(Error::NotConverged {
                iterations: it,
                residual: bound.as_f64(),
            });
        }
    }
    Err(Error::NotConverged {
        iterations: 0,
        residual: f64::INFINITY,
    })
}

/// Discounted value iteration from `v ≡ 0`. Stops once the sup-norm distance
/// to the fixed point is certified to be at most `tol`.
pub fn value_iteration_discounted<T: Scalar>(
    p: &ProblemSpec<T>,
    alpha: T,
    tol: T,
    max_iter: usize,
) -> Result<BellmanSolution<T>> {
    require_alpha_open(alpha)?;
    solve_discounted(Operator::original(p, alpha), tol, max_iter)
}

/// Value iteration for the model with stage cost `E[h_α(x - D)]` and no
/// per-unit ordering cost; the solution holds `v̄_α`, `Ḡ_α` and `m̄_α`.
pub fn transformed_model_vi<T: Scalar>(
    p: &ProblemSpec<T>,
    alpha: T,
    tol: T,
    max_iter: usize,
) -> Result<BellmanSolution<T>> {
    require_alpha_discount(alpha)?;
    solve_discounted(Operator::transformed(p, alpha), tol, max_iter)
}

/// Backward recursion over `n` periods. Entry `t` of the result is the
/// stage with `n - t` periods to go, so entry 0 is the decision at time 0.
pub fn finite_horizon<T: Scalar>(
    p: &ProblemSpec<T>,
    alpha: T,
    n: usize,
    terminal: Terminal,
) -> Result<Vec<HorizonStage<T>>> {
    if n == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    require_alpha_closed(alpha)?;
    let grid = p.grid();
    let op = Operator::original(p, alpha);
    let mut v = match terminal {
        Terminal::Zero => ValueTable::zeros(grid),
        Terminal::MinusCx => ValueTable {
            grid,
            values: grid.points().map(|x| -p.unit_cost * T::of_i64(x)).collect(),
            below_grid_slope: p.unit_cost,
        },
    };
    let mut stages = Vec::with_capacity(n);
    for k in 1..=n {
        let (tv, g, actions) = op.apply(&v);
        let (s, big_s) = extract_thresholds(&g, p.fixed_cost);
        stages.push(HorizonStage {
            periods_to_go: k,
            v: tv.clone(),
            g,
            s,
            big_s,
            actions,
        });
        v = tv;
    }
    stages.reverse();
    Ok(stages)
}

/// `H(x) = c x + E[h(x - D)] + E[u(x - D)]`.
pub fn build_h<T: Scalar>(u: &ValueTable<T>, p: &ProblemSpec<T>) -> GTable<T> {
    build_g(u, p, T::one())
}

/// Largest `|w + u(x) - (T u)(x)|` over `[lo, hi]` for the undiscounted operator.
pub fn acoe_gap<T: Scalar>(u: &ValueTable<T>, w: T, p: &ProblemSpec<T>, window: (i64, i64)) -> T {
    let (tu, _, _) = Operator::original(p, T::one()).apply(u);
    (window.0..=window.1)
        .map(|x| (w + u.at(x) - tu.at(x)).abs())
        .fold(T::zero(), T::max)
}

/// Relative value iteration for the average-cost problem, on the damped
/// operator `(1 - λ) I + λ T` and normalized at the grid midpoint.
pub fn relative_value_iteration<T: Scalar>(p: &ProblemSpec<T>, tol: T, max_iter: usize) -> Result<AverageSolution<T>> {
    let grid = p.grid();
    let op = Operator::original(p, T::one());
    let lambda = T::lit(RVI_DAMPING);
    let reference = grid.index(grid.midpoint());
    let mut u = ValueTable::zeros(grid);
    for it in 1..=max_iter {
        let (tu, _, _) = op.apply(&u);
        let (span, mid) = span_and_mid(&tu.values, &u.values);
        if span <= tol || span <= precision_floor(&tu.values) {
            let u = u.shifted(-u.min_value());
            let h = op.g(&u);
            let (_, actions) = op.improve(&h);
            let (s, big_s) = extract_thresholds(&h, p.fixed_cost);
            let window = default_interior_window(p)?;
            let acoe_residual = acoe_gap(&u, mid, p, window);
            return Ok(AverageSolution {
                w: mid,
                u,
                h,
                s,
                big_s,
                iterations: it,
                span,
                acoe_residual,
                window,
                actions,
            });
        }
        let slope = (T::one() - lambda) * u.below_grid_slope + lambda * tu.below_grid_slope;
        let mut values: Vec<T> = u
            .values
            .iter()
            .zip(&tu.values)
            .map(|(&a, &b)| (T::one() - lambda) * a + lambda * b)
            .collect();
        let offset = values[reference];
        for v in &mut values {
            *v = *v - offset;
        }
        u = ValueTable {
            grid,
            values,
            below_grid_slope: slope,
        };
        if it == max_iter {
            return Err(Error::NotConverged {
                iterations: it,
                residual: span.as_f64(),
            });
        }
    }
    Err(Error::NotConverged {
        iterations: 0,
        residual: f64::INFINITY,
    })
}

fn write_table<T: Scalar, W: Write>(out: W, v: &ValueTable<T>, g: &GTable<T>, actions: &[i64]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["x", "v", "G", "action"])?;
    for (i, x) in v.grid.points().enumerate() {
        wtr.write_record([
            x.to_string(),
            format!("{:?}", v.values[i].as_f64()),
            format!("{:?}", g.values[i].as_f64()),
            actions[i].to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

impl<T: Scalar> BellmanSolution<T> {
    /// Columns `x, v, G, action`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_table(out, &self.v, &self.g, &self.actions)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl<T: Scalar> AverageSolution<T> {
    /// Columns `x, v, G, action` with `v = u` and `G = H`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_table(out, &self.u, &self.h, &self.actions)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    fn table(values: &[f64]) -> GTable {
        GTable {
            alpha: 0.0,
            grid: Grid::new(0, values.len() as i64 - 1).unwrap(),
            values: values.to_vec(),
        }
    }

    #[test]
    fn suffix_min_hand_example() {
        let (v, a) = minimize(&table(&[5.0, 3.0, 1.0, 2.0, 4.0]), 1.0, 0.0);
        assert_eq!(v.values, vec![2.0, 2.0, 1.0, 2.0, 4.0]);
        assert_eq!(a, vec![2, 1, 0, 0, 0]);
    }

    #[test]
    fn increasing_g_never_orders() {
        let (v, a) = minimize(&table(&[1.0, 2.0, 3.0, 4.0]), 0.5, 1.0);
        assert_eq!(v.values, vec![1.0, 1.0, 1.0, 1.0]);
        assert!(a.iter().all(|&q| q == 0));
    }

    #[test]
    fn thresholds_hand_examples() {
        assert_eq!(extract_thresholds(&table(&[5.0, 3.0, 1.0, 2.0, 4.0]), 1.0), (2, 2));
        assert_eq!(extract_thresholds(&table(&[2.0, 1.5, 1.0, 2.0, 4.0]), 1.0), (0, 2));
        assert_eq!(extract_thresholds(&table(&[3.0; 5]), 1.0), (0, 0));
    }

    #[test]
    fn g_of_zero_table() {
        let p = instances::canon1();
        let g = build_g(&ValueTable::zeros(p.grid()), &p, 0.7);
        for x in p.grid().points() {
            assert_eq!(g.at(x), 2.0 * x as f64 + p.expected_holding(x));
        }
        let v = bellman_discounted(&ValueTable::zeros(p.grid()), &p, 0.9).unwrap();
        let g0 = build_g(&v, &p, 0.0);
        assert_eq!(g0.values, g.values);
    }

    #[test]
    fn g_matches_scalar_recomputation() {
        let p = instances::canon1();
        let v = bellman_discounted(&ValueTable::zeros(p.grid()), &p, 0.9).unwrap();
        let g = build_g(&v, &p, 0.9);
        for x in p.grid().points() {
            let mut acc = 2.0 * x as f64;
            for &(d, q) in p.demand.atoms() {
                let y = x - d;
                let h = if y >= 0 { y as f64 } else { -3.0 * y as f64 };
                let vy = if y < -50 { v.at(-50) + 2.0 * (-50 - y) as f64 } else { v.at(y) };
                acc += q * (h + 0.9 * vy);
            }
            assert!((g.at(x) - acc).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn finite_horizon_one_period_is_direct_minimization() {
        let p = instances::canon1();
        let st = finite_horizon(&p, 0.9, 1, Terminal::Zero).unwrap();
        for x in p.grid().points() {
            let mut best = p.expected_holding(x);
            for y in x + 1..=p.grid().max {
                best = best.min(10.0 + 2.0 * (y - x) as f64 + p.expected_holding(y));
            }
            assert!((st[0].v.at(x) - best).abs() < 1e-12);
        }
    }

    #[test]
    fn vi_is_fixed_point() {
        let p = instances::canon1();
        let sol = value_iteration_discounted(&p, 0.9, 1e-9, DEFAULT_MAX_ITER).unwrap();
        let tv = bellman_discounted(&sol.v, &p, 0.9).unwrap();
        assert!(tv.sup_distance(&sol.v) <= 2e-9);
        assert!(sol.s <= sol.big_s);
        assert!(sol.v.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn f32_solver_tracks_f64() {
        let p = instances::canon1();
        let p32 = p.cast::<f32>();
        let a = value_iteration_discounted(&p, 0.9, 1e-9, DEFAULT_MAX_ITER).unwrap();
        let b = value_iteration_discounted(&p32, 0.9f32, 1e-3, DEFAULT_MAX_ITER).unwrap();
        assert_eq!((a.s, a.big_s), (b.s, b.big_s));
        assert!((a.m_alpha - b.m_alpha as f64).abs() < 1e-2 * a.m_alpha);
    }

    #[test]
    fn csv_has_declared_columns() {
        let p = instances::canon1();
        let sol = value_iteration_discounted(&p, 0.8, 1e-9, DEFAULT_MAX_ITER).unwrap();
        let mut buf = Vec::new();
        sol.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,v,G,action\n"));
        assert_eq!(text.lines().count(), 1 + p.grid().len());
    }
}
