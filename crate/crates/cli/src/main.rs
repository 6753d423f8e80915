//! `ssinv`: validate, solve and study (s, S) inventory problems.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 a check failed,
//! 3 a solver did not converge.

use std::fmt;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ss_inventory::counterexamples as cx;
use ss_inventory::{dp, lab, leadtime, model, policy};
use ss_inventory::{Error as SolverError, LeadTimeSpec, ProblemSpec, SsPolicy};

#[derive(Parser, Debug)]
#[command(name = "ssinv", version, about = "(s,S) inventory solver and verification lab")]
struct Cli {
    /// Problem JSON document.
    #[arg(long, global = true)]
    problem: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Solver tolerance.
    #[arg(long, global = true, default_value_t = 1e-9, value_parser = positive_f64)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads for the sweep command (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    fn csv(self) -> bool {
        self != Format::Json
    }
    fn json(self) -> bool {
        self != Format::Csv
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check quasiconvexity and the left-limit condition of E[h_a(x - D)].
    Validate {
        #[arg(long, default_value_t = 1.0, value_parser = alpha_half_open)]
        alpha: f64,
    },
    /// Solve the discounted or the average-cost problem.
    Solve {
        #[command(flatten)]
        criterion: CriterionArgs,
        #[arg(long, default_value_t = dp::DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Discount-factor sweep with the limit checks.
    Sweep {
        /// Number of points of the schedule a_k = 1 - 2^-k.
        #[arg(long, default_value_t = 12, conflicts_with = "schedule")]
        points: u32,
        /// Explicit comma-separated schedule, strictly increasing in (0, 1).
        #[arg(long, value_delimiter = ',', value_parser = alpha_open)]
        schedule: Option<Vec<f64>>,
        #[arg(long, default_value_t = dp::DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Reduce a lead-time problem and cross-check the reduction.
    Leadtime {
        /// Lead time; overrides the "L" field of the problem file.
        #[arg(long = "L", value_parser = clap::value_parser!(u32).range(1..))]
        lead: Option<u32>,
        /// Discount factor for the augmented-state identity check.
        #[arg(long, default_value_t = 0.9, value_parser = alpha_open)]
        alpha: f64,
        #[arg(long, default_value_t = 1_000_000)]
        horizon: usize,
        #[arg(long, default_value_t = 8)]
        replications: usize,
        #[arg(long, default_value_t = leadtime::DEFAULT_STATE_CAP)]
        state_cap: usize,
    },
    /// The two built-in counterexamples.
    Examples {
        /// Reported states 0..=n of the oscillating chain.
        #[arg(long, default_value_t = 50)]
        n_report: usize,
    },
    /// Evaluate a given (s, S) policy, or search for the best one.
    Evaluate {
        #[command(flatten)]
        criterion: CriterionArgs,
        #[arg(long, allow_negative_numbers = true, required_unless_present = "search")]
        s: Option<i64>,
        #[arg(long = "S", allow_negative_numbers = true, required_unless_present = "search")]
        big_s: Option<i64>,
        /// Search every (s, S) pair instead.
        #[arg(long)]
        search: bool,
    },
    /// Monte Carlo simulation of an (s, S) policy.
    Simulate {
        #[arg(long, allow_negative_numbers = true)]
        s: i64,
        #[arg(long = "S", allow_negative_numbers = true)]
        big_s: i64,
        #[arg(long, default_value_t = 100_000)]
        horizon: usize,
        #[arg(long, default_value_t = 8)]
        replications: usize,
    },
}

#[derive(Args, Debug, Clone, Copy)]
#[group(required = true, multiple = false)]
struct CriterionArgs {
    #[arg(long, value_parser = alpha_open)]
    alpha: Option<f64>,
    #[arg(long)]
    average: bool,
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.trim().parse::<f64>().map_err(|e| format!("{s:?} is not a number: {e}"))
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

fn alpha_open(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("discount factor {v} must lie in (0, 1)"))
    }
}

fn alpha_half_open(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("discount factor {v} must lie in (0, 1]"))
    }
}

/// A check-class failure, reported with exit code 2.
#[derive(Debug)]
struct CheckFailed(String);

impl fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "check failed: {}", self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<CheckFailed>().is_some() {
        return 2;
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<SolverError>() {
            return match e {
                SolverError::NotConverged { .. } => 3,
                _ => 1,
            };
        }
    }
    1
}

struct Ctx {
    out: PathBuf,
    tol: f64,
    seed: u64,
    format: Format,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_json<S: Serialize>(&self, name: &str, value: &S) -> Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        self.write_text(name, &(text + "\n"))
    }

    fn write_text(&self, name: &str, text: &str) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    fn writer(&self, name: &str) -> Result<BufWriter<fs::File>> {
        let path = self.path(name);
        let f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(f))
    }
}

fn read_problem(path: Option<&Path>) -> Result<ProblemSpec> {
    let path = path.context("--problem is required for this command")?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ProblemSpec::from_json_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_leadtime(path: Option<&Path>, lead: Option<u32>) -> Result<LeadTimeSpec> {
    let path = path.context("--problem is required for this command")?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let has_lead = parsed.get("L").is_some();
    let spec = match (has_lead, lead) {
        (true, override_lead) => {
            let spec = LeadTimeSpec::from_json_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            match override_lead {
                Some(l) => LeadTimeSpec::new(spec.base, l as usize)?,
                None => spec,
            }
        }
        (false, Some(l)) => {
            let base = ProblemSpec::from_json_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            LeadTimeSpec::new(base, l as usize)?
        }
        (false, None) => bail!("{} has no \"L\" field; pass --L", path.display()),
    };
    Ok(spec)
}

fn fmt_f(x: f64) -> String {
    format!("{x:.10}")
}

fn cmd_validate(ctx: &Ctx, p: &ProblemSpec, alpha: f64) -> Result<()> {
    let rep = model::check_assumptions(p, alpha)?;
    println!("alpha             {alpha}");
    println!("quasiconvex       {}", rep.quasiconvex);
    if let Some((x, y, z)) = rep.witness {
        println!("witness           x = {x}, y = {y}, z = {z} (f(y) > max(f(x), f(z)))");
    }
    println!("left limit        {:?} ({})", rep.left_limit, if rep.left_limit_ok { "ok" } else { "too small" });
    println!("strict decrease   {}", rep.strictly_decreasing_left_of_r);
    println!("r_alpha           {}", rep.r_alpha);
    println!("S*_alpha          {}", rep.s_star_alpha);
    println!("alpha* bound      {}", rep.alpha_star_bound);
    ctx.write_json("assumptions.json", &rep)?;
    if !rep.passed() {
        let why = match rep.witness {
            Some((x, y, z)) => format!("E[h_a(x - D)] is not quasiconvex: witness ({x}, {y}, {z})"),
            None => "left-limit condition fails".to_string(),
        };
        return Err(CheckFailed(why).into());
    }
    Ok(())
}

fn cmd_solve(ctx: &Ctx, p: &ProblemSpec, crit: CriterionArgs, max_iter: usize) -> Result<()> {
    let reference = p.grid().midpoint();
    if let Some(alpha) = crit.alpha {
        let sol = dp::value_iteration_discounted(p, alpha, ctx.tol, max_iter)?;
        let rep = model::check_assumptions(p, alpha)?;
        println!("alpha      {alpha}");
        println!("s          {}", sol.s);
        println!("S          {}", sol.big_s);
        println!("v({reference}) {}", fmt_f(sol.v.at(reference)));
        println!("iterations {}", sol.iterations);
        println!("bounds     s <= r <= S <= S*: {} <= {} <= {} <= {}", sol.s, rep.r_alpha, sol.big_s, rep.s_star_alpha);
        if ctx.format.csv() {
            sol.write_csv(ctx.writer("solution.csv")?)?;
        }
        if ctx.format.json() {
            ctx.write_text("solution.json", &(sol.to_json()? + "\n"))?;
        }
        let chain = [sol.s, rep.r_alpha, sol.big_s, rep.s_star_alpha];
        if !chain.windows(2).all(|w| w[0] <= w[1]) {
            return Err(CheckFailed(format!("bound chain violated: {chain:?}")).into());
        }
    } else {
        let avg = dp::relative_value_iteration(p, ctx.tol, max_iter)?;
        let acoe = lab::acoe_residual(&avg, p, avg.window);
        println!("w          {}", fmt_f(avg.w));
        println!("s          {}", avg.s);
        println!("S          {}", avg.big_s);
        println!("u({reference}) {}", fmt_f(avg.u.at(reference)));
        println!("iterations {}", avg.iterations);
        println!("acoe       {:e} on [{}, {}]", acoe.residual, avg.window.0, avg.window.1);
        if ctx.format.csv() {
            avg.write_csv(ctx.writer("solution.csv")?)?;
        }
        if ctx.format.json() {
            ctx.write_text("solution.json", &(avg.to_json()? + "\n"))?;
        }
        if acoe.residual > ctx.tol {
            return Err(CheckFailed(format!("ACOE residual {:e} above tolerance {:e}", acoe.residual, ctx.tol)).into());
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepReport {
    checks: Vec<lab::CheckReport>,
    acoe: lab::AcoeReport,
    gcal: lab::GcalSet,
    equicontinuity: lab::ModulusReport,
    failed_alphas: Vec<(f64, String)>,
}

fn cmd_sweep(ctx: &Ctx, p: &ProblemSpec, points: u32, schedule: Option<Vec<f64>>, max_iter: usize) -> Result<()> {
    let schedule = schedule.unwrap_or_else(|| lab::default_schedule(points));
    let results = lab::run_sweep(p, &schedule, ctx.tol)?;
    let mut records = Vec::new();
    let mut failed = Vec::new();
    let mut not_converged = None;
    for (alpha, r) in schedule.iter().zip(results) {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                failed.push((*alpha, e.to_string()));
                if matches!(e, SolverError::NotConverged { .. }) && not_converged.is_none() {
                    not_converged = Some(e);
                }
            }
        }
    }
    let avg = dp::relative_value_iteration(p, ctx.tol, max_iter)?;
    let window = model::default_interior_window(p)?;
    println!("{:>14} {:>5} {:>5} {:>5} {:>5} {:>14} {:>14} {:>14}", "alpha", "s", "S", "r", "S*", "(1-a)m", "(1-a)m_bar", "E[h_a(s-D)]");
    for r in &records {
        println!(
            "{:>14.10} {:>5} {:>5} {:>5} {:>5} {:>14.8} {:>14.8} {:>14.8}",
            r.alpha, r.s_alpha, r.big_s_alpha, r.r_alpha, r.s_star_alpha, r.scaled_gain, r.scaled_gain_bar, r.h_alpha_at_s
        );
    }
    println!("average cost w = {} with (s, S) = ({}, {})", fmt_f(avg.w), avg.s, avg.big_s);

    let mut checks = vec![
        lab::check_threshold_convergence(&records, &avg, p)?,
        lab::check_gain_limits(&records, &avg),
        lab::check_u_convergence(&records, &avg, p, window),
        lab::check_lemmas_average(&avg, p, window)?,
    ];
    for r in &records {
        checks.push(lab::check_lemmas_discounted(r, p, window));
        checks.push(lab::check_lemma_value_identity(r, p));
    }
    let acoe = lab::acoe_residual(&avg, p, window);
    let gcal = lab::compute_gcal(&avg.h, p.fixed_cost, lab::GCAL_REL_TOL, true);
    let equicontinuity = lab::equicontinuity_probe(&records, 1, window);
    let mut failures: Vec<String> = checks
        .iter()
        .filter(|c| c.failed())
        .map(|c| format!("{}: {}", c.name, c.witnesses.join("; ")))
        .collect();
    if acoe.residual > 5.0 * ctx.tol {
        failures.push(format!("acoe residual {:e} above {:e}", acoe.residual, 5.0 * ctx.tol));
    }
    let mut seen = std::collections::BTreeSet::new();
    for c in &checks {
        if seen.insert(c.name.clone()) {
            let status = if checks.iter().filter(|d| d.name == c.name).any(|d| d.failed()) {
                "FAIL"
            } else if c.passed() {
                "PASS"
            } else {
                "INCONCLUSIVE"
            };
            println!("{status:<12} {}", c.name);
        }
    }
    println!("{:<12} acoe_residual {:e}", if acoe.residual <= 5.0 * ctx.tol { "PASS" } else { "FAIL" }, acoe.residual);
    println!("lower-threshold set {:?} (s = {})", gcal.members, gcal.s);

    if ctx.format.csv() {
        lab::write_sweep_csv(&records, ctx.writer("sweep.csv")?)?;
    }
    if ctx.format.json() {
        ctx.write_json("sweep.json", &records)?;
    }
    ctx.write_json(
        "checks.json",
        &SweepReport {
            checks,
            acoe,
            gcal,
            equicontinuity,
            failed_alphas: failed,
        },
    )?;
    if let Some(e) = not_converged {
        return Err(e.into());
    }
    if !failures.is_empty() {
        return Err(CheckFailed(failures.join(" | ")).into());
    }
    Ok(())
}

#[derive(Serialize)]
struct LeadTimeReport {
    lead: usize,
    reduced_grid: (i64, i64),
    average_cost: f64,
    s: i64,
    #[serde(rename = "S")]
    big_s: i64,
    alpha: f64,
    bound_chain: [i64; 4],
    identity_states: Option<usize>,
    identity_max_gap: Option<f64>,
    identity_skipped: Option<String>,
    simulation: policy::SimStats,
    simulation_covers_w: bool,
}

fn cmd_leadtime(ctx: &Ctx, spec: &LeadTimeSpec, alpha: f64, horizon: usize, replications: usize, cap: usize) -> Result<()> {
    let red = leadtime::reduce(spec)?;
    ctx.write_text("reduced.json", &(red.to_json_string()? + "\n"))?;
    let avg = dp::relative_value_iteration(&red, ctx.tol, dp::DEFAULT_MAX_ITER)?;
    let sol = dp::value_iteration_discounted(&red, alpha, ctx.tol, dp::DEFAULT_MAX_ITER)?;
    let rep = model::check_assumptions(&red, alpha)?;
    let chain = [sol.s, rep.r_alpha, sol.big_s, rep.s_star_alpha];
    let mut failures = Vec::new();
    if !chain.windows(2).all(|w| w[0] <= w[1]) {
        failures.push(format!("reduced bound chain violated at alpha = {alpha}: {chain:?}"));
    }
    let (mut states, mut gap, mut skipped) = (None, None, None);
    match leadtime::augmented_vi(spec, alpha, ctx.tol, cap) {
        Ok(aug) => {
            let checked = leadtime::checked_states(spec, &aug, 1);
            let mut worst: f64 = 0.0;
            for st in &checked {
                worst = worst.max(leadtime::identity_gap(spec, &aug, &sol.v, st)?);
            }
            if worst > 1e-6 {
                failures.push(format!("augmented identity gap {worst:e} above 1e-6"));
            }
            states = Some(checked.len());
            gap = Some(worst);
        }
        Err(SolverError::StateSpaceTooLarge { size, cap }) => {
            skipped = Some(format!("augmented state space {size} exceeds cap {cap}"));
        }
        Err(e) => return Err(e.into()),
    }
    let pol = SsPolicy::new(avg.s, avg.big_s)?;
    let sim = leadtime::simulate_pipeline(&pol, spec, horizon, replications, ctx.seed)?;
    let covers = sim.covers(avg.w);
    if !covers {
        failures.push(format!(
            "simulated cost {} +- {} misses reduced w = {}",
            sim.mean_cost_per_period, sim.confidence_halfwidth, avg.w
        ));
    }
    println!("L               {}", spec.lead);
    println!("reduced grid    [{}, {}]", red.grid().min, red.grid().max);
    println!("reduced w       {}", fmt_f(avg.w));
    println!("reduced (s, S)  ({}, {}) on the inventory position", avg.s, avg.big_s);
    println!("bound chain     {chain:?} at alpha = {alpha}");
    match (&gap, &skipped) {
        (Some(g), _) => println!("identity        max gap {g:e} over {} pipeline states", states.unwrap_or(0)),
        (None, Some(why)) => println!("identity        skipped: {why}"),
        _ => {}
    }
    println!(
        "simulation      {} +- {} ({})",
        fmt_f(sim.mean_cost_per_period),
        fmt_f(sim.confidence_halfwidth),
        if covers { "covers w" } else { "misses w" }
    );
    ctx.write_json(
        "leadtime.json",
        &LeadTimeReport {
            lead: spec.lead,
            reduced_grid: (red.grid().min, red.grid().max),
            average_cost: avg.w,
            s: avg.s,
            big_s: avg.big_s,
            alpha,
            bound_chain: chain,
            identity_states: states,
            identity_max_gap: gap,
            identity_skipped: skipped,
            simulation: sim,
            simulation_covers_w: covers,
        },
    )?;
    if !failures.is_empty() {
        return Err(CheckFailed(failures.join(" | ")).into());
    }
    Ok(())
}

#[derive(Serialize)]
struct ExamplesReport {
    one_period: cx::Example38Report,
    relative_values: Vec<cx::RelativeValues>,
    oscillation: cx::OscillationReport,
}

fn cmd_examples(ctx: &Ctx, n_report: usize) -> Result<()> {
    let mut failures = Vec::new();
    let e38 = cx::example38_check()?;
    println!(
        "one-period counterexample: never orders {}, terminal-cost (s,S) {:?} {}, infinite-horizon (s,S) {:?} {}",
        e38.one_period_never_orders,
        e38.terminal_cost_thresholds,
        e38.terminal_cost_is_ss,
        e38.infinite_horizon_thresholds,
        e38.infinite_horizon_is_ss
    );
    if !e38.passed {
        failures.push("one-period counterexample".to_string());
    }
    let mut tables = Vec::new();
    for alpha in [0.5, 0.9, 1.0 - 1.0 / 33.0, 1.0 - 1.0 / 153.0] {
        let n = cx::truncation_length(alpha, 1e-12);
        let rv = cx::example62_relative_values(alpha, n, n_report)?;
        println!(
            "relative values alpha = {alpha:.10}: u(0) = {}, closed form vs VI gap {:e} (bound {:e})",
            fmt_f(rv.at(0)),
            rv.max_gap,
            rv.truncation_bound + 1e-10
        );
        if !rv.agrees() {
            failures.push(format!("relative values disagree at alpha = {alpha}"));
        }
        if rv.closed_form.iter().any(|v| !(0.0..=2.0).contains(v)) {
            failures.push(format!("relative values leave [0, 2] at alpha = {alpha}"));
        }
        tables.push(rv);
    }
    let osc = cx::oscillation_report(&cx::suggested_oscillation_schedule())?;
    for r in &osc.rows {
        println!("f({:.10}) = {}", r.alpha, fmt_f(r.f_alpha));
    }
    println!("spread {} (required {})", fmt_f(osc.spread), osc.required_spread);
    if !osc.passed {
        failures.push(format!("oscillation spread {} below {}", osc.spread, osc.required_spread));
    }
    if ctx.format.csv() {
        osc.write_csv(ctx.writer("oscillation.csv")?)?;
    }
    if ctx.format.json() {
        ctx.write_json(
            "examples.json",
            &ExamplesReport {
                one_period: e38,
                relative_values: tables,
                oscillation: osc,
            },
        )?;
    }
    if !failures.is_empty() {
        return Err(CheckFailed(failures.join(" | ")).into());
    }
    Ok(())
}

fn cmd_evaluate(ctx: &Ctx, p: &ProblemSpec, crit: CriterionArgs, pair: Option<(i64, i64)>) -> Result<()> {
    let criterion = match crit.alpha {
        Some(a) => policy::Criterion::Discounted(a),
        None => policy::Criterion::Average,
    };
    let pol = match pair {
        Some((s, big_s)) => SsPolicy::new(s, big_s)?,
        None => {
            let window = policy::SearchWindow::default_for(p, criterion, 5)?;
            let best = policy::exhaustive_ss_search(p, criterion, window)?;
            println!("searched   {} pairs", best.evaluated);
            if ctx.format.json() {
                ctx.write_json("search.json", &best)?;
            }
            best.policy
        }
    };
    let ev = match crit.alpha {
        Some(a) => policy::evaluate_discounted(&pol, p, a)?,
        None => policy::evaluate_average(&pol, p)?,
    };
    let reference = p.grid().midpoint();
    println!("policy     (s, S) = ({}, {})", pol.s, pol.big_s);
    if let Some(w) = ev.gain {
        println!("gain       {}", fmt_f(w));
    }
    println!("value({reference}) {}", fmt_f(ev.value.at(reference)));
    println!("residual   {:e}", ev.residual);
    if ctx.format.csv() {
        let mut out = String::from("x,value\n");
        for x in ev.value.grid.points() {
            out.push_str(&format!("{x},{:?}\n", ev.value.at(x)));
        }
        ctx.write_text("evaluation.csv", &out)?;
    }
    if ctx.format.json() {
        ctx.write_text("evaluation.json", &(ev.to_json()? + "\n"))?;
    }
    Ok(())
}

fn cmd_simulate(ctx: &Ctx, p: &ProblemSpec, pol: SsPolicy, horizon: usize, replications: usize) -> Result<()> {
    let stats = policy::simulate(&pol, p, horizon, replications, ctx.seed)?;
    println!("policy            (s, S) = ({}, {})", pol.s, pol.big_s);
    println!("mean cost/period  {}", fmt_f(stats.mean_cost_per_period));
    println!("95% halfwidth     {}", fmt_f(stats.confidence_halfwidth));
    println!("order frequency   {}", fmt_f(stats.order_frequency));
    println!("mean inventory    {}", fmt_f(stats.mean_inventory));
    if ctx.format.csv() {
        let mut out = String::from("replication,mean_cost\n");
        for (i, m) in stats.replication_means.iter().enumerate() {
            out.push_str(&format!("{i},{m:?}\n"));
        }
        ctx.write_text("simulation.csv", &out)?;
    }
    if ctx.format.json() {
        ctx.write_text("simulation.json", &(stats.to_json()? + "\n"))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let threads = match cli.command {
        Command::Sweep { .. } => cli.jobs.map(usize::from).unwrap_or(0),
        _ => 1,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("starting the worker pool")?;
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let ctx = Ctx {
        out: cli.out.clone(),
        tol: cli.tol,
        seed: cli.seed,
        format: cli.format,
    };
    let problem = cli.problem.as_deref();
    match cli.command {
        Command::Validate { alpha } => cmd_validate(&ctx, &read_problem(problem)?, alpha),
        Command::Solve { criterion, max_iter } => cmd_solve(&ctx, &read_problem(problem)?, criterion, max_iter),
        Command::Sweep {
            points,
            schedule,
            max_iter,
        } => cmd_sweep(&ctx, &read_problem(problem)?, points, schedule, max_iter),
        Command::Leadtime {
            lead,
            alpha,
            horizon,
            replications,
            state_cap,
        } => cmd_leadtime(&ctx, &read_leadtime(problem, lead)?, alpha, horizon, replications, state_cap),
        Command::Examples { n_report } => cmd_examples(&ctx, n_report),
        Command::Evaluate {
            criterion,
            s,
            big_s,
            search,
        } => {
            let pair = if search { None } else { s.zip(big_s) };
            cmd_evaluate(&ctx, &read_problem(problem)?, criterion, pair)
        }
        Command::Simulate {
            s,
            big_s,
            horizon,
            replications,
        } => cmd_simulate(&ctx, &read_problem(problem)?, SsPolicy::new(s, big_s)?, horizon, replications),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
