//! Two-group (blue/green) homophily economy: the per-period transition map,
//! multi-period simulation, steady states with cycle diagnostics, group
//! outcome comparisons, and the correlated-values steady state.

use std::collections::HashMap;

use crate::dist::{mix, FosdVerdict, ReferralFamily, ValueDistribution};
use crate::equilibrium::{self, Equilibrium, MarketPrimitives, PoolHiring};
use crate::error::Error;
use crate::metrics::{self, ProductionReport};
use crate::tol::Tolerances;
use crate::Result;

/// Group masses, homophily parameters, and the shared referral family.
#[derive(Debug, Clone)]
pub struct GroupParams {
    pub n_b: f64,
    pub n_g: f64,
    pub h_b: f64,
    pub h_g: f64,
    pub family: ReferralFamily,
}

impl GroupParams {
    /// Standard construction enforcing `h_b >= 1 - h_g`, which rules out
    /// referral reversals between the groups.
    pub fn new(n_b: f64, n_g: f64, h_b: f64, h_g: f64, family: ReferralFamily) -> Result<Self> {
        let p = Self::new_unchecked(n_b, n_g, h_b, h_g, family)?;
        if p.h_b < 1.0 - p.h_g - 1e-12 {
            return Err(Error::InvalidPrimitives(format!(
                "h_b = {h_b} < 1 - h_g = {}; use new_unchecked to study reversals",
                1.0 - h_g
            )));
        }
        Ok(p)
    }

    /// Same validation minus the `h_b >= 1 - h_g` assumption, for
    /// deliberately exploring non-convergent reversal dynamics.
    pub fn new_unchecked(
        n_b: f64,
        n_g: f64,
        h_b: f64,
        h_g: f64,
        family: ReferralFamily,
    ) -> Result<Self> {
        if n_b <= 0.0 || n_g <= 0.0 {
            return Err(Error::InvalidPrimitives("group masses must be positive".into()));
        }
        for (name, h) in [("h_b", h_b), ("h_g", h_g)] {
            if !(0.0..=1.0).contains(&h) {
                return Err(Error::InvalidPrimitives(format!("{name} = {h} outside [0, 1]")));
            }
        }
        Ok(Self {
            n_b,
            n_g,
            h_b,
            h_g,
            family,
        })
    }

    pub fn n(&self) -> f64 {
        self.n_b + self.n_g
    }
}

/// Employed masses of the two groups at the start of a period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupState {
    pub e_b: f64,
    pub e_g: f64,
}

impl GroupState {
    pub fn new(e_b: f64, e_g: f64) -> Self {
        Self { e_b, e_g }
    }

    pub fn validate(&self, params: &GroupParams) -> Result<()> {
        if self.e_b < 0.0 || self.e_g < 0.0 {
            return Err(Error::InvalidPrimitives("employment must be nonnegative".into()));
        }
        if self.e_b > params.n_b + 1e-12 || self.e_g > params.n_g + 1e-12 {
            return Err(Error::InvalidPrimitives(
                "employment exceeds group population".into(),
            ));
        }
        if self.e_b + self.e_g > 1.0 + 1e-9 {
            return Err(Error::InvalidPrimitives(
                "total employment exceeds unit firm mass".into(),
            ));
        }
        Ok(())
    }

    pub fn sup_distance(&self, other: &GroupState) -> f64 {
        (self.e_b - other.e_b)
            .abs()
            .max((self.e_g - other.e_g).abs())
    }
}

/// Mean referral counts implied by current employment:
/// `m_b = (h_b e_b + (1 - h_g) e_g) / n_b` and symmetrically for greens.
pub fn referral_means(state: &GroupState, params: &GroupParams) -> (f64, f64) {
    let m_b = (params.h_b * state.e_b + (1.0 - params.h_g) * state.e_g) / params.n_b;
    let m_g = (params.h_g * state.e_g + (1.0 - params.h_b) * state.e_b) / params.n_g;
    (m_b, m_g)
}

/// Referral totals each group would receive at population-proportional
/// employment, and whether they are balanced (`R_b / R_g = n_b / n_g`).
pub fn referral_balance(params: &GroupParams) -> (f64, f64, bool) {
    let n = params.n();
    let r_b = (params.h_b * params.n_b + (1.0 - params.h_g) * params.n_g) / n;
    let r_g = (params.h_g * params.n_g + (1.0 - params.h_b) * params.n_b) / n;
    let balanced = (r_b / r_g - params.n_b / params.n_g).abs() <= Tolerances::DEFAULT.indifference;
    (r_b, r_g, balanced)
}

/// Per-group slice of a period outcome.
#[derive(Debug, Clone)]
pub struct GroupSide {
    pub m: f64,
    pub p0: f64,
    pub p1: f64,
    pub p2_plus: f64,
    pub hire_referral: f64,
    pub hire_pool: f64,
    pub next_employment: f64,
    /// Total value of this group's hires this period.
    pub employed_value: f64,
    /// Employed wage levels and masses; the floor first, then referral
    /// premium wages per atom above the threshold.
    pub wage_atoms: Vec<(f64, f64)>,
    pub pool_mass: f64,
    pub pool_mean: f64,
}

impl GroupSide {
    /// Wage bill per population member, unemployed valued at the floor.
    pub fn per_capita_wage(&self, n_gamma: f64, w_min: f64) -> f64 {
        let bill: f64 = self.wage_atoms.iter().map(|&(w, m)| w * m).sum();
        (bill + (n_gamma - self.next_employment) * w_min) / n_gamma
    }

    /// Full per-capita wage distribution, unemployed at the floor.
    pub fn wage_distribution_per_capita(&self, n_gamma: f64, w_min: f64) -> Vec<(f64, f64)> {
        let mut atoms = self.wage_atoms.clone();
        atoms.push((w_min, n_gamma - self.next_employment));
        atoms
    }
}

/// Everything one application of the period map produces.
#[derive(Debug, Clone)]
pub struct GroupOutcome {
    pub blue: GroupSide,
    pub green: GroupSide,
    pub equilibrium: Equilibrium,
    pub production: ProductionReport,
    pub aggregate_p0: f64,
}

impl GroupOutcome {
    pub fn next_state(&self) -> GroupState {
        GroupState {
            e_b: self.blue.next_employment,
            e_g: self.green.next_employment,
        }
    }
}

/// Knobs for shocked or overridden steps; `Default` is the base model.
#[derive(Debug, Clone, Copy)]
pub struct StepOptions {
    /// Void each referral independently with this probability.
    pub thin_kappa: f64,
    /// Mass of firms hiring this period.
    pub firm_mass: f64,
    /// Whether pool-indifferent firms hire (the base-model default).
    pub indifference_hires: bool,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            thin_kappa: 0.0,
            firm_mass: 1.0,
            indifference_hires: true,
        }
    }
}

/// One period of the economy: group referral distributions, the aggregate
/// equilibrium, referral and pool hires by group, wages, pool compositions.
pub fn step(
    state: &GroupState,
    params: &GroupParams,
    values: &ValueDistribution,
    w_min: f64,
    r: f64,
) -> Result<(GroupState, GroupOutcome)> {
    step_with(state, params, values, w_min, r, &StepOptions::default())
}

/// [`step`] with shock and override knobs. Mixing at an atom exactly at the
/// threshold applies uniformly within each group: firms cannot condition the
/// tie-break on color.
pub fn step_with(
    state: &GroupState,
    params: &GroupParams,
    values: &ValueDistribution,
    w_min: f64,
    r: f64,
    opts: &StepOptions,
) -> Result<(GroupState, GroupOutcome)> {
    state.validate(params)?;
    let (m_b, m_g) = referral_means(state, params);
    let mut pmf_b = params.family.pmf_from_mean(m_b)?;
    let mut pmf_g = params.family.pmf_from_mean(m_g)?;
    if opts.thin_kappa > 0.0 {
        pmf_b = pmf_b.thin(opts.thin_kappa)?;
        pmf_g = pmf_g.thin(opts.thin_kappa)?;
    }
    let aggregate = mix(&pmf_b, &pmf_g, params.n_b, params.n_g)?;
    let n = params.n();
    let prim = MarketPrimitives::with_firm_mass(
        values.clone(),
        aggregate,
        n,
        w_min,
        opts.firm_mass,
    )?;
    let mut eq = equilibrium::solve_threshold(&prim, r)?;
    if eq.pool_hiring == PoolHiring::Indifferent && !opts.indifference_hires {
        eq.mass_hired_pool = 0.0;
        eq.employment_mass = eq.mass_hired_referral;
    }

    let hires = eq.pool_hiring.hires() && eq.mass_hired_pool > 0.0;
    let q = if hires { eq.pool_hire_prob(n) } else { 0.0 };

    let side = |n_gamma: f64, pmf: &crate::dist::ReferralPmf, m: f64| -> GroupSide {
        let p0 = pmf.p0();
        let x = equilibrium::hired_prob(values, eq.cut, eq.mixing_r);
        let hire_referral = n_gamma * (1.0 - p0) * x;
        let referral_value =
            n_gamma * (1.0 - p0) * equilibrium::hired_value(values, eq.cut, eq.mixing_r);
        let shares = equilibrium::pool_shares(values, p0, eq.cut, eq.mixing_r);
        let pool_mass: f64 = shares.iter().sum::<f64>() * n_gamma;
        let pool_value_sum: f64 = shares
            .iter()
            .zip(values.atoms())
            .map(|(s, &(v, _))| s * v)
            .sum::<f64>()
            * n_gamma;
        let pool_mean = pool_value_sum / pool_mass;
        let hire_pool = q * pool_mass;
        let next_employment = hire_referral + hire_pool;
        let employed_value = referral_value + hire_pool * pool_mean;

        // Wages: multi-referral workers hired above the threshold earn the
        // premium; everybody else employed earns the floor.
        let mut premium: Vec<(f64, f64)> = Vec::new();
        let mut premium_mass = 0.0;
        for (j, &(v, f)) in values.atoms().iter().enumerate().skip(eq.cut.first_hired()) {
            debug_assert!(j >= eq.cut.first_hired());
            let mass = n_gamma * pmf.p2_plus() * f;
            if mass > 0.0 {
                premium.push((v - eq.threshold + w_min, mass));
                premium_mass += mass;
            }
        }
        // An atom exactly at the threshold is hired at rate r but earns the
        // floor; it needs no separate premium entry.
        let floor_mass = (next_employment - premium_mass).max(0.0);
        let mut wage_atoms = vec![(w_min, floor_mass)];
        wage_atoms.extend(premium);

        GroupSide {
            m,
            p0,
            p1: pmf.p1(),
            p2_plus: pmf.p2_plus(),
            hire_referral,
            hire_pool,
            next_employment,
            employed_value,
            wage_atoms,
            pool_mass,
            pool_mean,
        }
    };

    let blue = side(params.n_b, &pmf_b, m_b);
    let green = side(params.n_g, &pmf_g, m_g);

    // Aggregation invariants: group masses must reproduce the aggregate
    // equilibrium masses.
    let ref_sum = blue.hire_referral + green.hire_referral;
    if (ref_sum - eq.mass_hired_referral).abs() > 1e-10 {
        return Err(Error::Invariant(format!(
            "group referral hires {ref_sum} != aggregate {}",
            eq.mass_hired_referral
        )));
    }
    let pool_sum = blue.hire_pool + green.hire_pool;
    if (pool_sum - eq.mass_hired_pool).abs() > 1e-10 {
        return Err(Error::Invariant(format!(
            "group pool hires {pool_sum} != aggregate {}",
            eq.mass_hired_pool
        )));
    }
    let next = GroupState {
        e_b: blue.next_employment,
        e_g: green.next_employment,
    };
    if hires && (next.e_b + next.e_g - opts.firm_mass).abs() > 1e-10 {
        return Err(Error::Invariant(
            "pool hiring must fill the firm mass exactly".into(),
        ));
    }

    let production = metrics::total_production(&prim, &eq);
    let outcome = GroupOutcome {
        aggregate_p0: prim.referrals.p0(),
        blue,
        green,
        equilibrium: eq,
        production,
    };
    Ok((next, outcome))
}

/// `T` deterministic applications of [`step`].
pub fn simulate(
    state0: &GroupState,
    params: &GroupParams,
    values: &ValueDistribution,
    w_min: f64,
    r: f64,
    periods: usize,
) -> Result<Vec<GroupOutcome>> {
    if periods == 0 {
        return Err(Error::Domain("need at least one period".into()));
    }
    let mut out = Vec::with_capacity(periods);
    let mut state = *state0;
    for _ in 0..periods {
        let (next, outcome) = step(&state, params, values, w_min, r)?;
        out.push(outcome);
        state = next;
    }
    Ok(out)
}

/// A detected cycle of the period map.
#[derive(Debug, Clone)]
pub struct CycleInfo {
    pub period: usize,
    pub states: Vec<GroupState>,
    pub pool_hiring: Vec<PoolHiring>,
}

#[derive(Debug, Clone)]
pub struct StartResult {
    pub start: GroupState,
    pub converged: Option<GroupState>,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SteadyStateReport {
    /// Common limit when every start converged to the same state.
    pub state: Option<GroupState>,
    pub per_start: Vec<StartResult>,
    pub cycle: Option<CycleInfo>,
    pub all_converged_same: bool,
    /// Fixed points of the one-dimensional section along `e_b + e_g = 1`,
    /// located by sign-change bracketing; a uniqueness cross-check.
    pub diagonal_fixed_points: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SteadyOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            tolerance: Tolerances::DEFAULT.convergence,
        }
    }
}

/// Iterate the period map from each start until the state stabilizes, with
/// cycle detection by state-history hashing and a damped retry on
/// oscillation. Non-convergence is reported as a diagnostic, not a failure.
pub fn steady_state(
    params: &GroupParams,
    values: &ValueDistribution,
    w_min: f64,
    r: f64,
    starts: &[GroupState],
    opts: &SteadyOptions,
) -> Result<SteadyStateReport> {
    if starts.is_empty() {
        return Err(Error::Domain("need at least one start".into()));
    }
    let res = Tolerances::DEFAULT.cycle_resolution;
    let mut per_start = Vec::with_capacity(starts.len());
    let mut cycle: Option<CycleInfo> = None;

    for &start in starts {
        let mut state = start;
        let mut seen: HashMap<(i64, i64), (usize, GroupState)> = HashMap::new();
        let mut converged = None;
        let mut iterations = 0;
        let mut damping = 1.0;

        for t in 0..opts.max_iterations {
            iterations = t + 1;
            let key = (
                (state.e_b / res).round() as i64,
                (state.e_g / res).round() as i64,
            );
            if let Some(&(prev_t, prev_state)) = seen.get(&key) {
                if state.sup_distance(&prev_state) <= res && t > prev_t {
                    let period = t - prev_t;
                    if period >= 2 && cycle.is_none() {
                        cycle = Some(trace_cycle(&state, params, values, w_min, r, period)?);
                    }
                    if period >= 2 && damping == 1.0 {
                        // Damped retry; fixed points of the damped map
                        // coincide with fixed points of the raw map.
                        damping = 0.5;
                        seen.clear();
                    } else if period >= 2 {
                        break; // damping did not resolve the cycle
                    }
                }
            }
            seen.insert(key, (t, state));
            let (next, _) = step(&state, params, values, w_min, r)?;
            let delta = next.sup_distance(&state);
            let damped = GroupState {
                e_b: state.e_b + damping * (next.e_b - state.e_b),
                e_g: state.e_g + damping * (next.e_g - state.e_g),
            };
            state = damped;
            if delta < opts.tolerance {
                converged = Some(state);
                break;
            }
        }
        per_start.push(StartResult {
            start,
            converged,
            iterations,
        });
    }

    let mut all_same = true;
    let mut common: Option<GroupState> = None;
    for sr in &per_start {
        match (sr.converged, common) {
            (Some(s), None) => common = Some(s),
            (Some(s), Some(c)) => {
                if s.sup_distance(&c) > 1e-8 {
                    all_same = false;
                }
            }
            (None, _) => all_same = false,
        }
    }

    let diagonal_fixed_points = diagonal_scan(params, values, w_min, r)?;

    Ok(SteadyStateReport {
        state: if all_same { common } else { None },
        per_start,
        cycle,
        all_converged_same: all_same && common.is_some(),
        diagonal_fixed_points,
    })
}

fn trace_cycle(
    from: &GroupState,
    params: &GroupParams,
    values: &ValueDistribution,
    w_min: f64,
    r: f64,
    period: usize,
) -> Result<CycleInfo> {
    let mut states = Vec::with_capacity(period);
    let mut hiring = Vec::with_capacity(period);
    let mut state = *from;
    for _ in 0..period {
        states.push(state);
        let (next, outcome) = step(&state, params, values, w_min, r)?;
        hiring.push(outcome.equilibrium.pool_hiring);
        state = next;
    }
    Ok(CycleInfo {
        period,
        states,
        pool_hiring: hiring,
    })
}

fn diagonal_scan(
    params: &GroupParams,
    values: &ValueDistribution,
    w_min: f64,
    r: f64,
) -> Result<Vec<f64>> {
    let lo = (1.0 - params.n_b).max(0.0) + 1e-9;
    let hi = params.n_g.min(1.0) - 1e-9;
    if hi <= lo {
        return Ok(Vec::new());
    }
    let excess = |e_g: f64| -> Result<f64> {
        let state = GroupState {
            e_b: 1.0 - e_g,
            e_g,
        };
        let (next, _) = step(&state, params, values, w_min, r)?;
        Ok(next.e_g - e_g)
    };
    let steps = 200;
    let mut roots = Vec::new();
    let mut prev_x = lo;
    let mut prev_f = excess(lo)?;
    for i in 1..=steps {
        let x = lo + (hi - lo) * i as f64 / steps as f64;
        let f = excess(x)?;
        if prev_f == 0.0 {
            roots.push(prev_x);
        } else if prev_f * f < 0.0 {
            // Bisection refine.
            let (mut a, mut b, mut fa) = (prev_x, x, prev_f);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                let fm = excess(m)?;
                if fa * fm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_x = x;
        prev_f = f;
    }
    Ok(roots)
}

/// Side-by-side welfare comparison of the groups for one period outcome.
#[derive(Debug, Clone)]
pub struct GroupComparison {
    pub wage_fosd: FosdVerdict,
    pub wage_fosd_strict: bool,
    pub employment_rate_b: f64,
    pub employment_rate_g: f64,
    pub employed_mean_b: f64,
    pub employed_mean_g: f64,
    pub unemployed_mean_b: f64,
    pub unemployed_mean_g: f64,
}

impl GroupComparison {
    /// The four orderings that define a blue advantage:
    /// blue wages dominate, blue employment rate weakly higher, employed
    /// blues weakly more productive, unemployed greens weakly more
    /// productive.
    pub fn blue_advantaged(&self, tol: f64) -> bool {
        matches!(self.wage_fosd, FosdVerdict::ADominates | FosdVerdict::Equal)
            && self.employment_rate_b >= self.employment_rate_g - tol
            && self.employed_mean_b >= self.employed_mean_g - tol
            && self.unemployed_mean_g >= self.unemployed_mean_b - tol
    }

    pub fn strictly_blue_advantaged(&self, tol: f64) -> bool {
        self.wage_fosd == FosdVerdict::ADominates
            && self.wage_fosd_strict
            && self.employment_rate_b > self.employment_rate_g + tol
            && self.employed_mean_b > self.employed_mean_g + tol
            && self.unemployed_mean_g > self.unemployed_mean_b + tol
    }
}

/// Compare per-capita wage distributions and group productivities.
pub fn group_comparison(
    outcome: &GroupOutcome,
    params: &GroupParams,
    w_min: f64,
) -> GroupComparison {
    let blue = &outcome.blue;
    let green = &outcome.green;
    let wb = blue.wage_distribution_per_capita(params.n_b, w_min);
    let wg = green.wage_distribution_per_capita(params.n_g, w_min);
    let (verdict, strict) = wage_fosd(&wb, &wg);
    GroupComparison {
        wage_fosd: verdict,
        wage_fosd_strict: strict,
        employment_rate_b: blue.next_employment / params.n_b,
        employment_rate_g: green.next_employment / params.n_g,
        employed_mean_b: blue.employed_value / blue.next_employment,
        employed_mean_g: green.employed_value / green.next_employment,
        unemployed_mean_b: blue.pool_mean,
        unemployed_mean_g: green.pool_mean,
    }
}

/// First-order dominance over weighted wage atoms (unnormalized masses are
/// normalized internally). Returns the verdict and whether any CDF gap is
/// strict.
pub fn wage_fosd(a: &[(f64, f64)], b: &[(f64, f64)]) -> (FosdVerdict, bool) {
    let tol = Tolerances::DEFAULT.indifference;
    let ta: f64 = a.iter().map(|&(_, m)| m).sum();
    let tb: f64 = b.iter().map(|&(_, m)| m).sum();
    let mut support: Vec<f64> = a.iter().chain(b.iter()).map(|&(w, _)| w).collect();
    support.sort_by(|x, y| x.partial_cmp(y).unwrap());
    support.dedup_by(|x, y| (*x - *y).abs() <= tol);
    let cdf = |atoms: &[(f64, f64)], total: f64, w: f64| -> f64 {
        atoms
            .iter()
            .filter(|&&(wi, _)| wi <= w + tol)
            .map(|&(_, m)| m)
            .sum::<f64>()
            / total
    };
    let mut a_le = true;
    let mut b_le = true;
    let mut strict = false;
    for &w in &support {
        let ca = cdf(a, ta, w);
        let cb = cdf(b, tb, w);
        if ca > cb + tol {
            a_le = false;
        }
        if cb > ca + tol {
            b_le = false;
        }
        if (ca - cb).abs() > tol {
            strict = true;
        }
    }
    let verdict = match (a_le, b_le) {
        (true, true) => FosdVerdict::Equal,
        (true, false) => FosdVerdict::ADominates,
        (false, true) => FosdVerdict::BDominates,
        (false, false) => FosdVerdict::Incomparable,
    };
    (verdict, strict)
}

/// Concentration diagnostics along an employment grid with `e_b = 1 - e_g`.
#[derive(Debug, Clone)]
pub struct ConcentrationReport {
    pub p0_convex: bool,
    pub p2_convex: bool,
    pub p0_values: Vec<f64>,
    pub p2_values: Vec<f64>,
    /// Grid point minimizing the aggregate `P(0)`.
    pub argmin_e_g: f64,
    /// Employment equalizing the group referral means, when unique.
    pub equalizer_e_g: Option<f64>,
    pub hypothesis_ok: bool,
}

/// Verify the aggregate `P(0)` and `P(2+)` are convex along the grid and
/// minimized at the mean-equalizing employment split.
pub fn concentration_check(
    params: &GroupParams,
    e_grid: &[f64],
) -> Result<ConcentrationReport> {
    if e_grid.len() < 3 || e_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "need a strictly increasing grid of at least 3 points".into(),
        ));
    }
    // Hypothesis check on the family itself over the induced mean range.
    let mut means: Vec<f64> = Vec::new();
    for &e_g in e_grid {
        let state = GroupState {
            e_b: 1.0 - e_g,
            e_g,
        };
        let (m_b, m_g) = referral_means(&state, params);
        means.push(m_b);
        means.push(m_g);
    }
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    means.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let hypothesis_ok = if means.len() >= 3 {
        let rep = crate::dist::convexity_scan(&params.family, &means)?;
        rep.p0.convex && rep.p2_plus.convex
    } else {
        true
    };

    let mut p0_values = Vec::with_capacity(e_grid.len());
    let mut p2_values = Vec::with_capacity(e_grid.len());
    for &e_g in e_grid {
        let state = GroupState {
            e_b: 1.0 - e_g,
            e_g,
        };
        let (m_b, m_g) = referral_means(&state, params);
        let pb = params.family.pmf_from_mean(m_b)?;
        let pg = params.family.pmf_from_mean(m_g)?;
        let agg = mix(&pb, &pg, params.n_b, params.n_g)?;
        p0_values.push(agg.p0());
        p2_values.push(agg.p2_plus());
    }
    let convex = |y: &[f64]| -> bool {
        (1..y.len() - 1).all(|i| {
            let left = (y[i] - y[i - 1]) / (e_grid[i] - e_grid[i - 1]);
            let right = (y[i + 1] - y[i]) / (e_grid[i + 1] - e_grid[i]);
            right - left >= -1e-10
        })
    };
    let argmin = |y: &[f64]| -> f64 {
        let (mut idx, mut best) = (0usize, f64::INFINITY);
        for (i, &v) in y.iter().enumerate() {
            if v < best {
                best = v;
                idx = i;
            }
        }
        e_grid[idx]
    };
    let c = params.h_b + params.h_g - 1.0;
    let equalizer = if c.abs() < 1e-12 {
        None
    } else {
        Some((params.n_g * params.h_b - params.n_b * (1.0 - params.h_b)) / (c * params.n()))
    };
    Ok(ConcentrationReport {
        p0_convex: convex(&p0_values),
        p2_convex: convex(&p2_values),
        argmin_e_g: argmin(&p0_values),
        p0_values,
        p2_values,
        equalizer_e_g: equalizer,
        hypothesis_ok,
    })
}

/// Steady-state employment of high-value workers in the correlated-values
/// variant (two values, equal masses, single-referral process): the closed
/// form `(1 + a - sqrt((1 - a)(5 - a))) / (2 (2a - 1))`, with the `a = 1/2`
/// limit solved directly from the steady-state equation.
pub fn value_homophily_steady(alpha: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!(
            "inbreeding bias {alpha} outside [1/2, 1]"
        )));
    }
    if (alpha - 0.5).abs() < 1e-12 {
        // p = 1/2 regardless of employment; solve e = p + (1-p)^2/(2-p).
        let p = 0.5f64;
        return Ok(p + (1.0 - p) * (1.0 - p) / (2.0 - p));
    }
    let disc = ((1.0 - alpha) * (5.0 - alpha)).sqrt();
    Ok((1.0 + alpha - disc) / (2.0 * (2.0 * alpha - 1.0)))
}

/// Transition map of the correlated-values variant.
pub fn value_homophily_map(alpha: f64, e_h: f64) -> f64 {
    let p = e_h * alpha + (1.0 - e_h) * (1.0 - alpha);
    p + (1.0 - p) * (1.0 - p) / (2.0 - p)
}

/// Independent route to the same steady state, solving the fixed point of
/// the transition map numerically.
///
/// Works on the unemployment deficit `s = 1 - e_H`, where the transition
/// reads exactly `s' = (1 - p) / (2 - p)` with `p = alpha - s (2 alpha - 1)`.
/// The fixed-point residual simplifies (pure rearrangement, writing
/// `a = 1 - alpha`, `b = 2 alpha - 1`) to
/// `h(s) = (a (1 - 3 s) - b s^2) / (1 + a + b s)`,
/// which is cancellation-free, so bracketing drives `s` to full precision.
/// Plain iteration of `e_H` itself stalls against the rounding floor near
/// full employment when `alpha = 1`; the deficit form does not.
pub fn value_homophily_iterate(alpha: f64, tol: f64, budget: usize) -> Result<f64> {
    if !(0.5..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!(
            "inbreeding bias {alpha} outside [1/2, 1]"
        )));
    }
    let a = 1.0 - alpha;
    let b = 2.0 * alpha - 1.0;
    let residual = |s: f64| (a * (1.0 - 3.0 * s) - b * s * s) / (1.0 + a + b * s);
    let map = |s: f64| {
        let one_minus_p = a + s * b;
        one_minus_p / (1.0 + one_minus_p)
    };
    // h(0) = a / (1 + a): zero exactly when alpha = 1 (full employment);
    // otherwise positive, with h(1/2) < 0, so a bracket always exists.
    let s = if residual(0.0) <= 0.0 {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0f64, 0.5f64);
        for _ in 0..budget.min(200) {
            let mid = 0.5 * (lo + hi);
            if residual(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < f64::EPSILON * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let drift = (map(s) - s).abs();
    if drift > tol.max(1e-12) {
        return Err(Error::Solver {
            message: format!("deficit map does not fix the bracketed root at alpha = {alpha}"),
            lo: s,
            hi: s + drift,
        });
    }
    Ok(1.0 - s)
}
