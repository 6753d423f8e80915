//! Reference problem instances used across tests, benches and the CLI.

use crate::model::{DemandPmf, Grid, HoldingCost, ProblemSpec};

fn piecewise_linear(grid: Grid, hold: f64, backlog: f64) -> HoldingCost {
    HoldingCost::from_fn(
        grid,
        |x| if x >= 0 { hold * x as f64 } else { -backlog * x as f64 },
        backlog,
        hold,
    )
    .expect("valid holding cost")
}

/// K = 10, c = 2, D ∈ {1, 2, 3} w.p. (.5, .3, .2), h(x) = x⁺ + 3x⁻ on [-50, 50].
pub fn canon1() -> ProblemSpec {
    let grid = Grid::new(-50, 50).unwrap();
    let demand = DemandPmf::new(vec![(1, 0.5), (2, 0.3), (3, 0.2)]).unwrap();
    ProblemSpec::new(10.0, 2.0, demand, piecewise_linear(grid, 1.0, 3.0)).unwrap()
}

/// CANON-1 on a smaller grid, for state-space-hungry oracles.
pub fn canon1_on(x_min: i64, x_max: i64) -> ProblemSpec {
    let grid = Grid::new(x_min, x_max).unwrap();
    let demand = DemandPmf::new(vec![(1, 0.5), (2, 0.3), (3, 0.2)]).unwrap();
    ProblemSpec::new(10.0, 2.0, demand, piecewise_linear(grid, 1.0, 3.0)).unwrap()
}

/// Convex piecewise-linear cost (backlog slope 3, holding slope 1) with
/// geometric demand P(D = k) ∝ 2^-k truncated to {0, …, 6}.
pub fn convex_geometric() -> ProblemSpec {
    let grid = Grid::new(-40, 40).unwrap();
    let weights: Vec<f64> = (0..=6).map(|k| 0.5f64.powi(k)).collect();
    let total: f64 = weights.iter().sum();
    let demand = DemandPmf::new(
        weights
            .iter()
            .enumerate()
            .map(|(k, w)| (k as i64, w / total))
            .collect(),
    )
    .unwrap();
    ProblemSpec::new(8.0, 1.0, demand, piecewise_linear(grid, 1.0, 3.0)).unwrap()
}

/// Non-convex holding cost: h(x) = 4√x for x ≥ 0 and 3|x| for x < 0.
/// The expected transformed cost remains quasiconvex.
pub fn quasiconvex_sqrt() -> ProblemSpec {
    let grid = Grid::new(-50, 60).unwrap();
    let right = 2.0 / (grid.max as f64).sqrt();
    let holding = HoldingCost::from_fn(
        grid,
        |x| if x >= 0 { 4.0 * (x as f64).sqrt() } else { -3.0 * x as f64 },
        3.0,
        right,
    )
    .unwrap();
    let demand = DemandPmf::new(vec![(1, 0.5), (2, 0.3), (3, 0.2)]).unwrap();
    ProblemSpec::new(10.0, 2.0, demand, holding).unwrap()
}

/// K = 1, c = 1, D ≡ 1, h(x) = |x|/2; used with discount factor 3/4.
pub fn example38() -> ProblemSpec {
    let grid = Grid::new(-20, 20).unwrap();
    let demand = DemandPmf::point_mass(1).unwrap();
    ProblemSpec::new(1.0, 1.0, demand, piecewise_linear(grid, 0.5, 0.5)).unwrap()
}

/// Deterministic unit demand with h(x) = |x| on a small grid.
pub fn deterministic_unit(fixed_cost: f64, unit_cost: f64) -> ProblemSpec {
    let grid = Grid::new(-12, 12).unwrap();
    let demand = DemandPmf::point_mass(1).unwrap();
    ProblemSpec::new(fixed_cost, unit_cost, demand, piecewise_linear(grid, 1.0, 1.0)).unwrap()
}

/// Instance looked up by name, for the CLI and data files.
pub fn by_name(name: &str) -> Option<ProblemSpec> {
    Some(match name {
        "canon1" => canon1(),
        "convex_geometric" => convex_geometric(),
        "quasiconvex_sqrt" => quasiconvex_sqrt(),
        "example38" => example38(),
        "deterministic_unit" => deterministic_unit(5.0, 1.0),
        _ => return None,
    })
}

pub const NAMES: &[&str] = &[
    "canon1",
    "convex_geometric",
    "quasiconvex_sqrt",
    "example38",
    "deterministic_unit",
];
