//! Problem instances: integer grid, demand distribution, holding/backlog cost
//! with linear tails, the discount-transformed stage cost and the standing
//! structural checks (quasiconvexity, left-tail coercivity, strict decrease).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{argmin_first, Scalar};

/// Relative tolerance for cost comparisons.
pub const COST_REL_TOL: f64 = 1e-9;
/// Absolute tolerance for probability sums.
pub const PROB_TOL: f64 = 1e-12;
/// Relative tolerance used to break argmin ties toward the smallest point.
pub(crate) const TIE_REL_TOL: f64 = 1e-12;

/// Closed integer interval of inventory levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub min: i64,
    pub max: i64,
}

impl Grid {
    pub fn new(min: i64, max: i64) -> Result<Self> {
        if min >= max {
            return Err(Error::InvalidProblem(format!(
                "grid requires x_min < x_max, got [{min}, {max}]"
            )));
        }
        Ok(Self { min, max })
    }

    #[inline]
    pub fn len(&self) -> usize {
        (self.max - self.min + 1) as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn contains(&self, x: i64) -> bool {
        x >= self.min && x <= self.max
    }

    /// Offset of `x` from the left end. Panics outside the grid.
    #[inline]
    pub fn index(&self, x: i64) -> usize {
        assert!(self.contains(x), "{x} outside grid [{}, {}]", self.min, self.max);
        (x - self.min) as usize
    }

    #[inline]
    pub fn point(&self, i: usize) -> i64 {
        self.min + i as i64
    }

    pub fn points(&self) -> impl Iterator<Item = i64> + Clone {
        self.min..=self.max
    }

    /// Grid midpoint, rounded toward `min`.
    pub fn midpoint(&self) -> i64 {
        self.min + (self.max - self.min) / 2
    }

    /// Intersection with `[lo, hi]`, if nonempty.
    pub fn clip(&self, lo: i64, hi: i64) -> Option<(i64, i64)> {
        let lo = lo.max(self.min);
        let hi = hi.min(self.max);
        (lo <= hi).then_some((lo, hi))
    }
}

/// Finite distribution of a nonnegative integer demand.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct DemandPmf<T: Scalar = f64> {
    atoms: Vec<(i64, T)>,
    mean: T,
}

impl<T: Scalar> DemandPmf<T> {
    /// Validates and sorts the atoms by value.
    pub fn new(mut atoms: Vec<(i64, T)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDemand("no atoms".into()));
        }
        for (i, &(d, p)) in atoms.iter().enumerate() {
            if d < 0 {
                return Err(Error::InvalidDemand(format!(
                    "demand[{i}]: value {d} is negative"
                )));
            }
            if !p.is_finite() || p < T::zero() {
                return Err(Error::InvalidDemand(format!(
                    "demand[{i}] (value {d}): probability {p} is negative or not finite"
                )));
            }
            if p > T::one() {
                return Err(Error::InvalidDemand(format!(
                    "demand[{i}] (value {d}): probability {p} exceeds 1"
                )));
            }
        }
        atoms.sort_by_key(|a| a.0);
        if let Some(w) = atoms.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidDemand(format!(
                "value {} appears more than once",
                w[0].0
            )));
        }
        let total: T = atoms.iter().map(|a| a.1).sum();
        if (total - T::one()).abs() > T::tol(PROB_TOL) {
            return Err(Error::InvalidDemand(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        if !atoms.iter().any(|&(d, p)| d > 0 && p > T::zero()) {
            return Err(Error::InvalidDemand(
                "demand is zero almost surely; need P(D > 0) > 0".into(),
            ));
        }
        Ok(Self::from_sorted_unchecked(atoms))
    }

    pub fn point_mass(d: i64) -> Result<Self> {
        Self::new(vec![(d, T::one())])
    }

    fn from_sorted_unchecked(atoms: Vec<(i64, T)>) -> Self {
        let mean = atoms.iter().map(|&(d, p)| T::of_i64(d) * p).sum();
        Self { atoms, mean }
    }

    #[inline]
    pub fn atoms(&self) -> &[(i64, T)] {
        &self.atoms
    }

    #[inline]
    pub fn mean(&self) -> T {
        self.mean
    }

    /// Largest atom value.
    pub fn max_value(&self) -> i64 {
        self.atoms.last().map(|a| a.0).unwrap_or(0)
    }

    /// Probability of zero demand.
    pub fn prob_zero(&self) -> T {
        self.atoms
            .iter()
            .find(|a| a.0 == 0)
            .map(|a| a.1)
            .unwrap_or_else(T::zero)
    }

    /// `Σ_d p(d) f(d)`.
    #[inline]
    pub fn expect(&self, mut f: impl FnMut(i64) -> T) -> T {
        let mut acc = T::zero();
        for &(d, p) in &self.atoms {
            acc = acc + p * f(d);
        }
        acc
    }

    /// Distribution of the sum of two independent draws.
    pub fn convolve(&self, other: &Self) -> Self {
        let n = (self.max_value() + other.max_value() + 1) as usize;
        let mut dense = vec![T::zero(); n];
        for &(a, p) in &self.atoms {
            for &(b, q) in &other.atoms {
                dense[(a + b) as usize] = dense[(a + b) as usize] + p * q;
            }
        }
        let atoms = dense
            .into_iter()
            .enumerate()
            .filter(|(_, p)| *p > T::zero())
            .map(|(d, p)| (d as i64, p))
            .collect();
        Self::from_sorted_unchecked(atoms)
    }

    /// Same distribution measured in units `1/factor` as large.
    pub fn scaled(&self, factor: i64) -> Self {
        let atoms = self.atoms.iter().map(|&(d, p)| (d * factor, p)).collect();
        Self::from_sorted_unchecked(atoms)
    }

    pub fn cast<U: Scalar>(&self) -> DemandPmf<U> {
        DemandPmf::from_sorted_unchecked(
            self.atoms
                .iter()
                .map(|&(d, p)| (d, U::lit(p.as_f64())))
                .collect(),
        )
    }
}

/// Holding/backlog cost tabulated on the grid, extended linearly outside it.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct HoldingCost<T: Scalar = f64> {
    x_min: i64,
    table: Vec<T>,
    left_slope: T,
    right_slope: T,
}

impl<T: Scalar> HoldingCost<T> {
    pub fn new(x_min: i64, table: Vec<T>, left_slope: T, right_slope: T) -> Result<Self> {
        if table.len() < 2 {
            return Err(Error::InvalidHolding("table needs at least two points".into()));
        }
        for (i, v) in table.iter().enumerate() {
            if !v.is_finite() || *v < T::zero() {
                return Err(Error::InvalidHolding(format!(
                    "table[{i}] (x = {}): value {v} is negative or not finite",
                    x_min + i as i64
                )));
            }
        }
        if !(left_slope > T::zero()) || !left_slope.is_finite() {
            return Err(Error::InvalidHolding(format!(
                "left_slope must be positive, got {left_slope}"
            )));
        }
        if !(right_slope > T::zero()) || !right_slope.is_finite() {
            return Err(Error::InvalidHolding(format!(
                "right_slope must be positive, got {right_slope}"
            )));
        }
        Ok(Self {
            x_min,
            table,
            left_slope,
            right_slope,
        })
    }

    /// Tabulates `f` on `grid`.
    pub fn from_fn(grid: Grid, f: impl Fn(i64) -> T, left_slope: T, right_slope: T) -> Result<Self> {
        Self::new(grid.min, grid.points().map(f).collect(), left_slope, right_slope)
    }

    #[inline]
    pub fn x_min(&self) -> i64 {
        self.x_min
    }

    #[inline]
    pub fn x_max(&self) -> i64 {
        self.x_min + self.table.len() as i64 - 1
    }

    pub fn grid(&self) -> Grid {
        Grid {
            min: self.x_min,
            max: self.x_max(),
        }
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }

    pub fn left_slope(&self) -> T {
        self.left_slope
    }

    pub fn right_slope(&self) -> T {
        self.right_slope
    }

    /// `h(x)` for any integer `x`.
    #[inline]
    pub fn eval(&self, x: i64) -> T {
        if x < self.x_min {
            self.table[0] + self.left_slope * T::of_i64(self.x_min - x)
        } else if x > self.x_max() {
            self.table[self.table.len() - 1] + self.right_slope * T::of_i64(x - self.x_max())
        } else {
            self.table[(x - self.x_min) as usize]
        }
    }

    /// `h` at the fractional point `x / denom`, linear between grid points.
    fn eval_fraction(&self, x: i64, denom: i64) -> T {
        let lo = x.div_euclid(denom);
        let rem = x.rem_euclid(denom);
        if rem == 0 {
            return self.eval(lo);
        }
        let t = T::of_i64(rem) / T::of_i64(denom);
        self.eval(lo) * (T::one() - t) + self.eval(lo + 1) * t
    }

    /// Index of the first grid point where the table fails discrete
    /// convexity, including compatibility with the tail slopes.
    pub fn convexity_violation(&self) -> Option<i64> {
        let tol = |a: T| T::tol(COST_REL_TOL) * (T::one() + a.abs());
        let n = self.table.len();
        let first = self.table[1] - self.table[0];
        if first < -self.left_slope - tol(self.table[0]) {
            return Some(self.x_min);
        }
        for i in 1..n - 1 {
            let second = self.table[i + 1] - self.table[i] * T::lit(2.0) + self.table[i - 1];
            if second < -tol(self.table[i]) {
                return Some(self.x_min + i as i64);
            }
        }
        let last = self.table[n - 1] - self.table[n - 2];
        if last > self.right_slope + tol(self.table[n - 1]) {
            return Some(self.x_max());
        }
        None
    }

    pub fn cast<U: Scalar>(&self) -> HoldingCost<U> {
        HoldingCost {
            x_min: self.x_min,
            table: self.table.iter().map(|v| U::lit(v.as_f64())).collect(),
            left_slope: U::lit(self.left_slope.as_f64()),
            right_slope: U::lit(self.right_slope.as_f64()),
        }
    }
}

/// `E[h(x - D)]`, using the linear tails wherever `x - d` leaves the table.
#[inline]
pub fn expected_shifted_cost<T: Scalar>(h: &HoldingCost<T>, d: &DemandPmf<T>, x: i64) -> T {
    d.expect(|dv| h.eval(x - dv))
}

/// A complete inventory model instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct ProblemSpec<T: Scalar = f64> {
    /// Setup cost `K` charged whenever a positive amount is ordered.
    pub fixed_cost: T,
    /// Per-unit ordering cost.
    pub unit_cost: T,
    pub demand: DemandPmf<T>,
    pub holding: HoldingCost<T>,
}

impl<T: Scalar> ProblemSpec<T> {
    pub fn new(fixed_cost: T, unit_cost: T, demand: DemandPmf<T>, holding: HoldingCost<T>) -> Result<Self> {
        if !(fixed_cost > T::zero()) || !fixed_cost.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "K must be positive, got {fixed_cost}"
            )));
        }
        if !(unit_cost > T::zero()) || !unit_cost.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "c_unit must be positive, got {unit_cost}"
            )));
        }
        let grid = holding.grid();
        if grid.max - grid.min <= 2 * demand.max_value() {
            return Err(Error::InvalidProblem(format!(
                "grid [{}, {}] must be wider than twice the largest demand {}",
                grid.min,
                grid.max,
                demand.max_value()
            )));
        }
        Ok(Self {
            fixed_cost,
            unit_cost,
            demand,
            holding,
        })
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.holding.grid()
    }

    /// `E[h(x - D)]` at any integer `x`.
    #[inline]
    pub fn expected_holding(&self, x: i64) -> T {
        expected_shifted_cost(&self.holding, &self.demand, x)
    }

    /// `E[h(x - D)]` on every grid point.
    pub fn expected_holding_table(&self) -> Vec<T> {
        self.grid().points().map(|x| self.expected_holding(x)).collect()
    }

    /// `E[h_α(x - D)] = E[h(x - D)] + (1 - α) c x + α c E[D]` at any integer `x`.
    #[inline]
    pub fn transformed_cost_at(&self, alpha: T, x: i64) -> T {
        let c = self.unit_cost;
        self.expected_holding(x) + (T::one() - alpha) * c * T::of_i64(x) + alpha * c * self.demand.mean()
    }

    /// Rescales so that one grid unit is `1/factor` of the current unit.
    /// Stock quantities are multiplied by `factor`, per-unit prices divided,
    /// and the holding table is linearly interpolated.
    pub fn refine(&self, factor: i64) -> Result<Self> {
        if factor < 1 {
            return Err(Error::InvalidArgument(format!("refinement factor {factor} < 1")));
        }
        let grid = self.grid();
        let fine = Grid::new(grid.min * factor, grid.max * factor)?;
        let f = T::of_i64(factor);
        let holding = HoldingCost::from_fn(
            fine,
            |x| self.holding.eval_fraction(x, factor),
            self.holding.left_slope / f,
            self.holding.right_slope / f,
        )?;
        Self::new(self.fixed_cost, self.unit_cost / f, self.demand.scaled(factor), holding)
    }

    pub fn cast<U: Scalar>(&self) -> ProblemSpec<U> {
        ProblemSpec {
            fixed_cost: U::lit(self.fixed_cost.as_f64()),
            unit_cost: U::lit(self.unit_cost.as_f64()),
            demand: self.demand.cast(),
            holding: self.holding.cast(),
        }
    }

    /// Parses the problem JSON document and validates it.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: ProblemFile = serde_json::from_str(s)?;
        raw.into_spec()
    }

    pub fn to_file(&self) -> ProblemFile {
        let grid = self.grid();
        ProblemFile {
            fixed_cost: self.fixed_cost.as_f64(),
            c_unit: self.unit_cost.as_f64(),
            demand: self.demand.atoms().iter().map(|&(d, p)| (d, p.as_f64())).collect(),
            holding: HoldingFile {
                x_min: grid.min,
                x_max: grid.max,
                table: self.holding.table().iter().map(|v| v.as_f64()).collect(),
                left_slope: self.holding.left_slope().as_f64(),
                right_slope: self.holding.right_slope().as_f64(),
            },
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }
}

/// On-disk problem document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(rename = "K")]
    pub fixed_cost: f64,
    pub c_unit: f64,
    pub demand: Vec<(i64, f64)>,
    pub holding: HoldingFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoldingFile {
    pub x_min: i64,
    pub x_max: i64,
    pub table: Vec<f64>,
    pub left_slope: f64,
    pub right_slope: f64,
}

impl ProblemFile {
    pub fn into_spec<T: Scalar>(self) -> Result<ProblemSpec<T>> {
        let h = &self.holding;
        let expected = h.x_max - h.x_min + 1;
        if expected < 1 || h.table.len() as i64 != expected {
            return Err(Error::InvalidHolding(format!(
                "holding.table has {} entries but [x_min, x_max] = [{}, {}] needs {}",
                h.table.len(),
                h.x_min,
                h.x_max,
                expected.max(0)
            )));
        }
        let demand = DemandPmf::new(self.demand.iter().map(|&(d, p)| (d, T::lit(p))).collect())?;
        let holding = HoldingCost::new(
            h.x_min,
            h.table.iter().map(|&v| T::lit(v)).collect(),
            T::lit(h.left_slope),
            T::lit(h.right_slope),
        )?;
        ProblemSpec::new(T::lit(self.fixed_cost), T::lit(self.c_unit), demand, holding)
    }
}

/// `E[h_α(x - D)]` tabulated on the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct TransformedCostView<T: Scalar = f64> {
    pub alpha: T,
    pub grid: Grid,
    pub values: Vec<T>,
}

impl<T: Scalar> TransformedCostView<T> {
    #[inline]
    pub fn at(&self, x: i64) -> T {
        self.values[self.grid.index(x)]
    }
}

fn check_alpha<T: Scalar>(alpha: T, allow_zero: bool, allow_one: bool) -> Result<()> {
    let ok_low = if allow_zero { alpha >= T::zero() } else { alpha > T::zero() };
    let ok_high = if allow_one { alpha <= T::one() } else { alpha < T::one() };
    if alpha.is_finite() && ok_low && ok_high {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha.as_f64()))
    }
}

pub(crate) fn require_alpha_open<T: Scalar>(alpha: T) -> Result<()> {
    check_alpha(alpha, false, false)
}

pub(crate) fn require_alpha_discount<T: Scalar>(alpha: T) -> Result<()> {
    check_alpha(alpha, true, false)
}

pub(crate) fn require_alpha_closed<T: Scalar>(alpha: T) -> Result<()> {
    check_alpha(alpha, true, true)
}

pub(crate) fn require_alpha_half_open<T: Scalar>(alpha: T) -> Result<()> {
    check_alpha(alpha, false, true)
}

/// Tabulates `E[h_α(x - D)]` for `α ∈ (0, 1]`.
pub fn transformed_expected_cost<T: Scalar>(p: &ProblemSpec<T>, alpha: T) -> Result<TransformedCostView<T>> {
    require_alpha_half_open(alpha)?;
    let grid = p.grid();
    Ok(TransformedCostView {
        alpha,
        grid,
        values: grid.points().map(|x| p.transformed_cost_at(alpha, x)).collect(),
    })
}

/// Behaviour of `E[h_α(x - D)]` as `x → -∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum LeftLimit {
    PlusInfinity,
    Finite(f64),
    MinusInfinity,
}

/// Result of checking the structural assumptions at one discount factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct AssumptionReport<T: Scalar = f64> {
    pub alpha: T,
    pub quasiconvex: bool,
    /// Grid points `x < y < z` with `f(y) > max(f(x), f(z))` when not quasiconvex.
    pub witness: Option<(i64, i64, i64)>,
    pub left_limit: LeftLimit,
    pub left_limit_ok: bool,
    pub strictly_decreasing_left_of_r: bool,
    pub r_alpha: i64,
    pub s_star_alpha: i64,
    pub alpha_star_bound: T,
}

impl<T: Scalar> AssumptionReport<T> {
    /// Quasiconvexity and the left-limit condition.
    pub fn passed(&self) -> bool {
        self.quasiconvex && self.left_limit_ok
    }

    /// Everything including strict decrease left of `r_α`.
    pub fn passed_strict(&self) -> bool {
        self.passed() && self.strictly_decreasing_left_of_r
    }
}

/// Grid quasiconvexity: nonincreasing, then nondecreasing, plateaus allowed.
/// Returns a violating index triple `(i, j, k)` with `f[j] > max(f[i], f[k])`.
pub fn quasiconvex_witness<T: Scalar>(values: &[T]) -> Option<(usize, usize, usize)> {
    let slack = |a: T, b: T| T::tol(COST_REL_TOL) * (T::one() + a.abs().max(b.abs()));
    let rises = |i: usize| values[i] > values[i - 1] + slack(values[i], values[i - 1]);
    let falls = |i: usize| values[i] < values[i - 1] - slack(values[i], values[i - 1]);
    let first_rise = (1..values.len()).find(|&i| rises(i))?;
    let fall = (first_rise + 1..values.len()).find(|&i| falls(i))?;
    Some((first_rise - 1, fall - 1, fall))
}

/// Smallest minimizer of a tabulated function; ties go left.
pub fn smallest_argmin<T: Scalar>(values: &[T]) -> usize {
    argmin_first(values, TIE_REL_TOL)
}

/// Checks quasiconvexity, the left-limit condition and strict decrease on
/// `[x_min, r_α]` for `E[h_α(x - D)]`; also locates `r_α` and `S*_α`.
pub fn check_assumptions<T: Scalar>(p: &ProblemSpec<T>, alpha: T) -> Result<AssumptionReport<T>> {
    let view = transformed_expected_cost(p, alpha)?;
    let grid = view.grid;
    let values = &view.values;

    let witness = quasiconvex_witness(values)
        .map(|(i, j, k)| (grid.point(i), grid.point(j), grid.point(k)));

    let r_idx = smallest_argmin(values);
    let r_alpha = grid.point(r_idx);
    let min_value = values[r_idx];
    let target = p.fixed_cost + min_value;

    // Below x_min - max demand every term lives on the left tail, where
    // E[h_α(x - D)] is affine with slope (1 - α) c - σ_L.
    let growth = p.holding.left_slope() - (T::one() - alpha) * p.unit_cost;
    let growth_tol = T::tol(COST_REL_TOL) * (T::one() + p.holding.left_slope());
    let left_limit = if growth > growth_tol {
        LeftLimit::PlusInfinity
    } else if growth < -growth_tol {
        LeftLimit::MinusInfinity
    } else {
        let far = grid.min - p.demand.max_value() - 1;
        LeftLimit::Finite(p.transformed_cost_at(alpha, far).as_f64())
    };
    let left_limit_ok = match left_limit {
        LeftLimit::PlusInfinity => true,
        LeftLimit::MinusInfinity => false,
        LeftLimit::Finite(v) => v > target.as_f64(),
    };

    let strictly_decreasing_left_of_r = (1..=r_idx).all(|i| {
        values[i - 1] - values[i] > T::tol(COST_REL_TOL) * (T::one() + values[i].abs())
    });

    // S*_α may lie beyond x_max; the right tail keeps the search finite.
    let mut s_star = r_alpha + 1;
    let cap = grid.max + 1_000_000;
    while s_star < cap && p.transformed_cost_at(alpha, s_star) < target - T::tol(TIE_REL_TOL) * (T::one() + target.abs()) {
        s_star += 1;
    }

    let alpha_star_bound = (T::one() - p.holding.left_slope() / p.unit_cost).max(T::zero());

    Ok(AssumptionReport {
        alpha,
        quasiconvex: witness.is_none(),
        witness,
        left_limit,
        left_limit_ok,
        strictly_decreasing_left_of_r,
        r_alpha,
        s_star_alpha: s_star,
        alpha_star_bound,
    })
}

/// Window `[x_min + 2·max demand, S*_1 + 2·max demand]`, clipped to the grid,
/// on which truncation effects stay out of invariant checks.
pub fn default_interior_window<T: Scalar>(p: &ProblemSpec<T>) -> Result<(i64, i64)> {
    let rep = check_assumptions(p, T::one())?;
    let grid = p.grid();
    let d = p.demand.max_value();
    let lo = grid.min + 2 * d;
    let hi = (rep.s_star_alpha + 2 * d).min(grid.max);
    if lo > hi {
        return Err(Error::Degenerate(format!(
            "interior window [{lo}, {hi}] is empty; enlarge the grid"
        )));
    }
    Ok((lo, hi))
}

/// `max{1 - σ_L / c, 0}` for a convex holding cost, i.e. the lower end of the
/// admissible range of `α*` when the left tail is linear with slope `σ_L`.
pub fn alpha_star_for_convex<T: Scalar>(p: &ProblemSpec<T>) -> Result<T> {
    if let Some(at) = p.holding.convexity_violation() {
        return Err(Error::NonConvex { at });
    }
    Ok((T::one() - p.holding.left_slope() / p.unit_cost).max(T::zero()))
}
