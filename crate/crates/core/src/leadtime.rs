//! Positive lead times: reduction to the zero-lead-time model through the
//! convolved cost `h*(x) = E[h^L(x - D_1 - … - D_L)]`, an augmented-state
//! value iteration used as an oracle, and a pipeline simulator.

use rand::distributions::Distribution;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{require_alpha_open, DemandPmf, Grid, HoldingCost, ProblemFile, ProblemSpec};
use crate::policy::{collect_stats, demand_sampler, replication_rng, run_path, SimStats, SsPolicy};
use crate::scalar::Scalar;

/// Largest convolved holding cost accepted before it is treated as infinite.
pub const FINITE_COST_CAP: f64 = 1e100;
/// Default cap on the number of augmented states.
pub const DEFAULT_STATE_CAP: usize = 400_000;

/// Zero-lead-time instance whose holding cost is read as `h^L`, plus `L`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct LeadTimeSpec<T: Scalar = f64> {
    pub base: ProblemSpec<T>,
    #[serde(rename = "L")]
    pub lead: usize,
}

impl<T: Scalar> LeadTimeSpec<T> {
    pub fn new(base: ProblemSpec<T>, lead: usize) -> Result<Self> {
        if lead == 0 {
            return Err(Error::InvalidProblem("lead time L must be at least 1".into()));
        }
        Ok(Self { base, lead })
    }

    /// The problem JSON document with an extra integer field `"L"`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let mut value: serde_json::Value = serde_json::from_str(s)?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::InvalidProblem("expected a JSON object".into()))?;
        let lead = obj
            .remove("L")
            .ok_or_else(|| Error::InvalidProblem("missing field `L`".into()))?;
        let lead = lead
            .as_u64()
            .ok_or_else(|| Error::InvalidProblem(format!("field `L` must be a positive integer, got {lead}")))?;
        let file: ProblemFile = serde_json::from_value(value)?;
        Self::new(file.into_spec()?, lead as usize)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut value = serde_json::to_value(self.base.to_file())?;
        value
            .as_object_mut()
            .expect("problem document is an object")
            .insert("L".into(), self.lead.into());
        Ok(serde_json::to_string_pretty(&value)?)
    }
}

/// On-hand stock and outstanding orders, oldest first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PipelineState {
    pub on_hand: i64,
    pub pending: Vec<i64>,
}

impl PipelineState {
    pub fn new(on_hand: i64, pending: Vec<i64>) -> Result<Self> {
        if pending.iter().any(|&a| a < 0) {
            return Err(Error::InvalidArgument("pending orders must be nonnegative".into()));
        }
        Ok(Self { on_hand, pending })
    }

    /// Inventory position `x + Σ pending`.
    pub fn position(&self) -> i64 {
        self.on_hand + self.pending.iter().sum::<i64>()
    }
}

/// Distribution of `D_1 + … + D_L`.
pub fn convolve_demand<T: Scalar>(d: &DemandPmf<T>, lead: usize) -> Result<DemandPmf<T>> {
    if lead == 0 {
        return Err(Error::InvalidArgument("lead time must be at least 1".into()));
    }
    let mut acc = d.clone();
    for _ in 1..lead {
        acc = acc.convolve(d);
    }
    Ok(acc)
}

/// Zero-lead-time model on the inventory position: same demand and prices,
/// holding cost `h*`, grid extended left by `L · max demand`.
pub fn reduce<T: Scalar>(spec: &LeadTimeSpec<T>) -> Result<ProblemSpec<T>> {
    let base = &spec.base;
    let sum = convolve_demand(&base.demand, spec.lead)?;
    let grid = base.grid();
    let reduced = Grid::new(grid.min - spec.lead as i64 * base.demand.max_value(), grid.max)?;
    let cap = T::lit(FINITE_COST_CAP);
    let table: Vec<T> = reduced
        .points()
        .map(|x| sum.expect(|d| base.holding.eval(x - d)))
        .collect();
    if let Some(i) = table.iter().position(|v| !v.is_finite() || *v > cap) {
        return Err(Error::InfiniteCost(format!(
            "convolved holding cost at x = {} is {}",
            reduced.point(i),
            table[i]
        )));
    }
    let holding = HoldingCost::new(
        reduced.min,
        table,
        base.holding.left_slope(),
        base.holding.right_slope(),
    )?;
    ProblemSpec::new(base.fixed_cost, base.unit_cost, base.demand.clone(), holding)
}

/// Expected discounted cost of the first `L` periods, which is fixed by the
/// initial pipeline: `Σ_{t<L} α^t (K 1{p_t > 0} + c p_t + E[h^L(x_0 + p_0 + … + p_t - D_1 - … - D_{t+1})])`.
pub fn offset<T: Scalar>(spec: &LeadTimeSpec<T>, state: &PipelineState, alpha: T) -> Result<T> {
    if state.pending.len() != spec.lead {
        return Err(Error::InvalidArgument(format!(
            "pipeline has {} pending orders, expected L = {}",
            state.pending.len(),
            spec.lead
        )));
    }
    let base = &spec.base;
    let mut sum = base.demand.clone();
    let mut level = state.on_hand;
    let mut disc = T::one();
    let mut total = T::zero();
    for (t, &p) in state.pending.iter().enumerate() {
        if t > 0 {
            sum = sum.convolve(&base.demand);
        }
        level += p;
        let mut cost = sum.expect(|d| base.holding.eval(level - d));
        if p > 0 {
            cost = cost + base.fixed_cost + base.unit_cost * T::of_i64(p);
        }
        total = total + disc * cost;
        disc = disc * alpha;
    }
    Ok(total)
}

/// Optimal values of the augmented chain on a bounded box of pipeline states.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct AugmentedSolution<T: Scalar = f64> {
    pub alpha: T,
    pub lead: usize,
    pub x_range: (i64, i64),
    pub pending_max: i64,
    /// Largest admissible inventory position after ordering.
    pub position_max: i64,
    pub iterations: usize,
    pub residual: T,
    values: Vec<T>,
}

impl<T: Scalar> AugmentedSolution<T> {
    fn index(&self, x: i64, pending: &[i64]) -> Option<usize> {
        if x < self.x_range.0 || x > self.x_range.1 {
            return None;
        }
        let base = (self.pending_max + 1) as usize;
        let mut idx = (x - self.x_range.0) as usize;
        for &p in pending {
            if p < 0 || p > self.pending_max {
                return None;
            }
            idx = idx * base + p as usize;
        }
        Some(idx)
    }

    pub fn value(&self, state: &PipelineState) -> Option<T> {
        self.index(state.on_hand, &state.pending).map(|i| self.values[i])
    }
}

/// Exact value iteration over `(x, p_1, …, p_L)`. Positions are kept at or
/// below the reduced grid's maximum so that the order-up-to cap matches the
/// reduced model; leaving the box costs a large constant.
pub fn augmented_vi<T: Scalar>(
    spec: &LeadTimeSpec<T>,
    alpha: T,
    tol: T,
    state_cap: usize,
) -> Result<AugmentedSolution<T>> {
    require_alpha_open(alpha)?;
    let base = &spec.base;
    let lead = spec.lead;
    let red = reduce(spec)?.grid();
    let dmax = base.demand.max_value();
    let x_lo = red.min - (lead as i64 + 1) * dmax - 1;
    let x_hi = red.max;
    let pmax = red.max - red.min + dmax;
    let nx = (x_hi - x_lo + 1) as usize;
    let np = (pmax + 1) as usize;
    let size = np
        .checked_pow(lead as u32)
        .and_then(|v| v.checked_mul(nx))
        .unwrap_or(usize::MAX);
    if size > state_cap {
        return Err(Error::StateSpaceTooLarge { size, cap: state_cap });
    }
    let big = T::lit(1e12);
    let mut sol = AugmentedSolution {
        alpha,
        lead,
        x_range: (x_lo, x_hi),
        pending_max: pmax,
        position_max: red.max,
        iterations: 0,
        residual: T::infinity(),
        values: vec![T::zero(); size],
    };
    let atoms = base.demand.atoms().to_vec();
    let decode = |i: usize| -> (i64, Vec<i64>) {
        let mut rest = i;
        let mut pend = vec![0i64; lead];
        for slot in (0..lead).rev() {
            pend[slot] = (rest % np) as i64;
            rest /= np;
        }
        (x_lo + rest as i64, pend)
    };
    // Per state: stage cost of receiving p_1 and the successor base index
    // (without the new order) for each demand atom.
    let mut stage = vec![T::zero(); size];
    let mut positions = vec![0i64; size];
    let mut succ: Vec<Vec<Option<usize>>> = Vec::with_capacity(size);
    for (i, st) in stage.iter_mut().enumerate() {
        let (x, pend) = decode(i);
        let p1 = pend[0];
        let mut c = base.demand.expect(|d| base.holding.eval(x + p1 - d));
        if p1 > 0 {
            c = c + base.fixed_cost + base.unit_cost * T::of_i64(p1);
        }
        *st = c;
        positions[i] = x + pend.iter().sum::<i64>();
        let mut shifted: Vec<i64> = pend[1..].to_vec();
        shifted.push(0);
        succ.push(
            atoms
                .iter()
                .map(|&(d, _)| sol.index(x + p1 - d, &shifted))
                .collect(),
        );
    }
    let max_iter = 1_000_000usize;
    let stop = tol * (T::one() - alpha) / (T::lit(2.0) * alpha);
    let mut next = vec![T::zero(); size];
    for it in 1..=max_iter {
        let v = &sol.values;
        next.par_iter_mut().enumerate().for_each(|(i, out)| {
            // ordering nothing is always allowed
            let amax = (sol.position_max - positions[i]).min(pmax).max(0);
            let mut best = T::infinity();
            for a in 0..=amax {
                let mut ev = T::zero();
                for (k, &(_, q)) in atoms.iter().enumerate() {
                    let val = match succ[i][k] {
                        // the new order fills the last, least significant slot
                        Some(j) => v[j + a as usize],
                        None => big,
                    };
                    ev = ev + q * val;
                }
                let cost = stage[i] + alpha * ev;
                if cost < best {
                    best = cost;
                }
            }
            *out = best.min(big);
        });
        let mut change = T::zero();
        for (a, b) in next.iter().zip(&sol.values) {
            if *a < big / T::lit(2.0) {
                change = change.max((*a - *b).abs());
            }
        }
        std::mem::swap(&mut sol.values, &mut next);
        if change <= stop {
            sol.iterations = it;
            sol.residual = change;
            return Ok(sol);
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: f64::NAN,
    })
}

/// `|Ṽ(x, p) - f(x, p) - α^L v_red(x + Σ p)|` at one pipeline state.
pub fn identity_gap<T: Scalar>(
    spec: &LeadTimeSpec<T>,
    aug: &AugmentedSolution<T>,
    reduced_v: &crate::dp::ValueTable<T>,
    state: &PipelineState,
) -> Result<T> {
    let total = aug
        .value(state)
        .ok_or_else(|| Error::InvalidArgument(format!("state {state:?} outside the augmented box")))?;
    let f = offset(spec, state, aug.alpha)?;
    let y = state.position();
    let scale = aug.alpha.powi(spec.lead as i32);
    Ok((total - f - scale * reduced_v.eval(y)).abs())
}

/// Initial pipelines with `x_0` in the reduced grid and position at most its
/// maximum, on which the identity is checked.
pub fn checked_states<T: Scalar>(spec: &LeadTimeSpec<T>, aug: &AugmentedSolution<T>, stride: i64) -> Vec<PipelineState> {
    let base_grid = spec.base.grid();
    let ymax = aug.position_max;
    let mut out = Vec::new();
    let stride = stride.max(1);
    let mut rec = |pend: Vec<i64>| {
        let used: i64 = pend.iter().sum();
        let mut x = base_grid.min;
        while x + used <= ymax && x <= base_grid.max {
            out.push(PipelineState {
                on_hand: x,
                pending: pend.clone(),
            });
            x += stride;
        }
    };
    let span = ymax - base_grid.min;
    match spec.lead {
        1 => {
            let mut p = 0;
            while p <= span {
                rec(vec![p]);
                p += stride;
            }
        }
        _ => {
            let mut p = 0;
            while p <= span {
                let mut q = 0;
                while p + q <= span {
                    let mut pend = vec![p, q];
                    pend.resize(spec.lead, 0);
                    rec(pend);
                    q += stride;
                }
                p += stride;
            }
        }
    }
    out
}

/// Physical pipeline: orders placed from the inventory position arrive `L`
/// periods later; each period pays `K 1{p_1 > 0} + c p_1 + h^L(x + p_1 - D)`
/// for the arriving order `p_1`.
pub fn simulate_pipeline<T: Scalar>(
    pol_on_y: &SsPolicy,
    spec: &LeadTimeSpec<T>,
    horizon: usize,
    replications: usize,
    seed: u64,
) -> Result<SimStats> {
    if horizon < spec.lead || replications == 0 {
        return Err(Error::InvalidArgument(format!(
            "horizon must be at least L = {} and replications positive",
            spec.lead
        )));
    }
    let base = &spec.base;
    let (values, dist) = demand_sampler(base);
    let k = base.fixed_cost.as_f64();
    let c = base.unit_cost.as_f64();
    let lead = spec.lead;
    let paths = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(seed, rep);
            let mut x = pol_on_y.big_s;
            let mut pending = std::collections::VecDeque::from(vec![0i64; lead]);
            run_path(horizon, &mut rng, |rng| {
                let y = x + pending.iter().sum::<i64>();
                let a = pol_on_y.action(y);
                let arriving = pending.pop_front().expect("pipeline has L slots");
                pending.push_back(a);
                let d = values[dist.sample(rng)];
                let mut cost = base.holding.eval(x + arriving - d).as_f64();
                if arriving > 0 {
                    cost += k + c * arriving as f64;
                }
                x = x + arriving - d;
                (cost, a > 0, x)
            })
        })
        .collect();
    Ok(collect_stats(horizon, seed, paths))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    #[test]
    fn point_mass_and_binomial() {
        let d = DemandPmf::<f64>::point_mass(2).unwrap();
        assert_eq!(convolve_demand(&d, 2).unwrap().atoms(), &[(4, 1.0)]);
        let b = DemandPmf::new(vec![(0, 0.5), (1, 0.5)]).unwrap();
        assert_eq!(convolve_demand(&b, 2).unwrap().atoms(), &[(0, 0.25), (1, 0.5), (2, 0.25)]);
    }

    #[test]
    fn unit_lead_deterministic_is_shift() {
        let p = instances::deterministic_unit(5.0, 1.0);
        let spec = LeadTimeSpec::new(p.clone(), 1).unwrap();
        let r = reduce(&spec).unwrap();
        for x in r.grid().points() {
            assert_eq!(r.holding.eval(x), p.holding.eval(x - 1));
        }
    }

    #[test]
    fn json_round_trip() {
        let spec = LeadTimeSpec::new(instances::canon1(), 2).unwrap();
        let back = LeadTimeSpec::<f64>::from_json_str(&spec.to_json_string().unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn zero_pipeline_position() {
        let s = PipelineState::new(4, vec![0, 0]).unwrap();
        assert_eq!(s.position(), 4);
    }
}
