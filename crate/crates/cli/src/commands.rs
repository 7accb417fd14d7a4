//! Per-subcommand runners; each returns the finished CSV text.

use refmarket::abm::{simulate_abm, AbmMode, AbmTrajectory};
use refmarket::dist::mix;
use refmarket::dynamics::{
    self, simulate, steady_state, GroupState, SteadyOptions,
};
use refmarket::equilibrium::{self, MarketPrimitives};
use refmarket::firing::solve_firing;
use refmarket::metrics;
use refmarket::policy::{self, MacroShock};
use refmarket::report::{self, CsvMeta};

use crate::config::Scenario;
use crate::CliError;

fn fmt(x: f64) -> String {
    format!("{:.16e}", x)
}

pub fn primitives(sc: &Scenario, state: &GroupState) -> Result<MarketPrimitives, CliError> {
    let (m_b, m_g) = dynamics::referral_means(state, &sc.params);
    let pmf_b = sc.family.pmf_from_mean(m_b)?;
    let pmf_g = sc.family.pmf_from_mean(m_g)?;
    let aggregate = mix(&pmf_b, &pmf_g, sc.params.n_b, sc.params.n_g)?;
    Ok(MarketPrimitives::new(
        sc.values.clone(),
        aggregate,
        sc.params.n(),
        sc.w_min,
    )?)
}

pub fn equilibrium(sc: &Scenario, meta: &CsvMeta) -> Result<String, CliError> {
    let prim = primitives(sc, &sc.state0)?;
    let eq = equilibrium::solve_threshold(&prim, sc.r)?;
    Ok(report::equilibrium_csv(&prim, &eq, meta))
}

pub fn dynamics(sc: &Scenario, meta: &CsvMeta) -> Result<String, CliError> {
    let traj = simulate(&sc.state0, &sc.params, &sc.values, sc.w_min, sc.r, sc.run.periods)?;
    Ok(report::trajectory_csv(&traj, &sc.params, &sc.values, sc.w_min, meta))
}

/// One first-period trajectory row, used by sweeps.
pub fn dynamics_single_row(sc: &Scenario, state: &GroupState) -> Result<String, CliError> {
    let traj = simulate(state, &sc.params, &sc.values, sc.w_min, sc.r, 1)?;
    let meta = CsvMeta {
        version: String::new(),
        config_hash: 0,
    };
    let csv = report::trajectory_csv(&traj, &sc.params, &sc.values, sc.w_min, &meta);
    Ok(csv.lines().nth(2).unwrap_or_default().to_string())
}

pub fn steady(sc: &Scenario, meta: &CsvMeta, extra_starts: usize) -> Result<String, CliError> {
    let mut starts = vec![sc.state0];
    // Deterministic extra starts spread over the feasible box.
    let mut seed = 0x2545f4914f6cdd1du64;
    for _ in 0..extra_starts {
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        let e_b = next() * sc.params.n_b.min(1.0);
        let e_g = next() * sc.params.n_g.min(1.0 - e_b).max(0.0);
        starts.push(GroupState::new(e_b, e_g));
    }
    let mut opts = SteadyOptions::default();
    if let Some(tol) = sc.run.tolerance {
        opts.tolerance = tol;
    }
    if let Some(max) = sc.run.max_iterations {
        opts.max_iterations = max;
    }
    let report = steady_state(&sc.params, &sc.values, sc.w_min, sc.r, &starts, &opts)?;
    let mut out = meta.comment_line();
    out.push_str("start_e_b,start_e_g,converged,final_e_b,final_e_g,iterations,cycle_period\n");
    let cycle = report
        .cycle
        .as_ref()
        .map(|c| c.period.to_string())
        .unwrap_or_default();
    for sr in &report.per_start {
        let (converged, fe_b, fe_g) = match sr.converged {
            Some(s) => ("true", fmt(s.e_b), fmt(s.e_g)),
            None => ("false", String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{converged},{fe_b},{fe_g},{},{cycle}\n",
            fmt(sr.start.e_b),
            fmt(sr.start.e_g),
            sr.iterations,
        ));
    }
    Ok(out)
}

pub fn policy(sc: &Scenario, meta: &CsvMeta, compare: bool) -> Result<String, CliError> {
    let kind = sc.aa_kind()?;
    let size = sc.aa_size()?;
    if compare {
        let cmp = policy::compare_aa_trajectories(
            &sc.state0,
            &sc.params,
            &sc.values,
            sc.w_min,
            sc.r,
            kind,
            size,
            sc.run.periods,
        )?;
        return Ok(report::policy_csv(&cmp, meta));
    }
    // One-time intervention inside the trajectory at the configured period.
    let period = sc.policy.as_ref().and_then(|p| p.aa_period).unwrap_or(0);
    if period >= sc.run.periods {
        return Err(CliError::Config(format!(
            "section [policy]: aa_period {period} outside the {}-period run",
            sc.run.periods
        )));
    }
    let pol = policy::AaPolicy { kind, size, period };
    let mut outcomes = Vec::with_capacity(sc.run.periods);
    let mut state = sc.state0;
    for t in 0..sc.run.periods {
        let outcome = if t == period {
            policy::apply_aa(&state, &sc.params, &sc.values, sc.w_min, sc.r, &pol)?
        } else {
            dynamics::step(&state, &sc.params, &sc.values, sc.w_min, sc.r)?.1
        };
        state = outcome.next_state();
        outcomes.push(outcome);
    }
    Ok(report::trajectory_csv(&outcomes, &sc.params, &sc.values, sc.w_min, meta))
}

pub fn firing(sc: &Scenario, meta: &CsvMeta, lambda: Option<f64>) -> Result<String, CliError> {
    let lambda = match lambda {
        Some(l) => l,
        None => sc.lambda()?,
    };
    let feq = solve_firing(&sc.params, &sc.state0, &sc.values, sc.w_min, lambda)?;
    Ok(report::firing_csv(&[feq], &sc.params, meta))
}

pub fn firing_row(sc: &Scenario, lambda: f64) -> Result<String, CliError> {
    let csv = firing(
        sc,
        &CsvMeta {
            version: String::new(),
            config_hash: 0,
        },
        Some(lambda),
    )?;
    Ok(csv.lines().nth(2).unwrap_or_default().to_string())
}

pub fn macro_shock(sc: &Scenario, meta: &CsvMeta, kappa: Option<f64>) -> Result<String, CliError> {
    let kappa = match kappa {
        Some(k) => k,
        None => sc.kappa()?,
    };
    let mut out = meta.comment_line();
    out.push_str(macro_header());
    out.push_str(&macro_row(sc, kappa)?);
    Ok(out)
}

pub fn macro_header() -> &'static str {
    "kappa,production_base,production_shocked,per_worker_base,per_worker_shocked,\
     wage_fosd_baseline_dominates,screened_loss_b,screened_loss_g,e_g_base,e_g_shocked\n"
}

pub fn macro_row(sc: &Scenario, kappa: f64) -> Result<String, CliError> {
    let shock = MacroShock::new(kappa)?;
    let rep = policy::macro_shock(&sc.state0, &sc.params, &sc.values, sc.w_min, sc.r, &shock)?;
    Ok(format!(
        "{},{},{},{},{},{},{},{},{},{}\n",
        fmt(kappa),
        fmt(rep.baseline.production.total_production),
        fmt(rep.shocked.production.total_production),
        fmt(rep.baseline.production.per_worker_productivity),
        fmt(rep.shocked.production.per_worker_productivity),
        rep.wage_fosd_baseline_dominates,
        fmt(rep.screened_loss_b),
        fmt(rep.screened_loss_g),
        fmt(rep.baseline.green.next_employment),
        fmt(rep.shocked.green.next_employment),
    ))
}

pub fn abm(
    sc: &Scenario,
    meta: &CsvMeta,
    seed: Option<u64>,
    compare: bool,
) -> Result<String, CliError> {
    let cfg = sc.abm_config(seed)?;
    let traj = simulate_abm(&cfg)?;
    if !compare {
        return Ok(report::abm_csv(&traj, meta));
    }
    let mut base_cfg = cfg.clone();
    base_cfg.mode = AbmMode::Myopic;
    let base = simulate_abm(&base_cfg)?;
    Ok(abm_compare_csv(&base, &traj, meta))
}

/// Paired myopic-vs-configured-mode trajectories.
fn abm_compare_csv(base: &AbmTrajectory, other: &AbmTrajectory, meta: &CsvMeta) -> String {
    let mut out = meta.comment_line();
    out.push_str(
        "period,e_g_myopic,e_g_mode,wage_gap_myopic,wage_gap_mode,production_myopic,\
         production_mode,redraw_draws_total,redraw_cost_total,seed\n",
    );
    for (i, (b, o)) in base.periods.iter().zip(&other.periods).enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            i + 1,
            fmt(b.e_g),
            fmt(o.e_g),
            fmt(b.mean_wage_b - b.mean_wage_g),
            fmt(o.mean_wage_b - o.mean_wage_g),
            fmt(b.production),
            fmt(o.production),
            o.redraw_draws,
            fmt(o.redraw_cost),
            other.seed,
        ));
    }
    out
}

/// Invariant suite over the configured scenario; one line per check.
pub fn check(sc: &Scenario) -> Result<String, CliError> {
    run_checks(sc)?;
    Ok(String::new())
}

fn run_checks(sc: &Scenario) -> Result<(), CliError> {
    let prim = primitives(sc, &sc.state0)?;
    let eq = equilibrium::solve_threshold(&prim, sc.r)?;
    let mut failed = false;
    let mut report_line = |name: &str, ok: bool, detail: String| {
        eprintln!("check {name}: {} ({detail})", if ok { "ok" } else { "FAIL" });
        failed |= !ok;
    };

    let found = equilibrium::uniqueness_scan(&prim, sc.r);
    report_line(
        "uniqueness",
        found.len() == 1,
        format!("{} validating regimes", found.len()),
    );

    let gap = equilibrium::lemons_gap(&prim, &eq);
    report_line("lemons", gap > 0.0, format!("gap = {gap:.6e}"));

    let pv = equilibrium::pool_value(&prim.values, prim.referrals.p0(), eq.threshold, eq.mixing_r)?;
    let residual = (eq.threshold - pv.max(prim.w_min)).abs();
    report_line(
        "fixed_point",
        residual < 1e-10,
        format!("residual = {residual:.3e}"),
    );

    let plan = equilibrium::planner_threshold(&prim, sc.r)?;
    report_line(
        "planner_equivalence",
        equilibrium::decision_equivalent(eq.cut, plan.cut),
        format!("planner cut {:?} vs equilibrium {:?}", plan.cut, eq.cut),
    );

    let (next, outcome) = dynamics::step(&sc.state0, &sc.params, &sc.values, sc.w_min, sc.r)?;
    let hires = outcome.blue.hire_referral
        + outcome.green.hire_referral
        + outcome.blue.hire_pool
        + outcome.green.hire_pool;
    let conserved = hires <= 1.0 + 1e-10
        && (!outcome.equilibrium.pool_hiring.hires() || (hires - 1.0).abs() < 1e-10)
        && (next.e_b + next.e_g - hires).abs() < 1e-10;
    report_line("mass_conservation", conserved, format!("hired = {hires:.12}"));

    let both = metrics::total_production(&prim, &eq);
    let identity_ok = both
        .identity_production
        .map(|p| (p - both.total_production).abs() < 1e-10)
        .unwrap_or(true);
    report_line(
        "production_identity",
        identity_ok,
        format!("direct = {:.12}", both.total_production),
    );

    if failed {
        Err(CliError::Compute("invariant suite failed".into()))
    } else {
        Ok(())
    }
}
