//! Firing extension: firms may fire a pool hire after fraction `1 - lambda`
//! of the period and rehire from a second pool. Solves the coupled
//! two-threshold equilibrium exactly by nested regime enumeration, with a
//! damped two-dimensional iteration as an independent cross-check.
//!
//! Production figures here are firm-side (hired values only, excluding the
//! outside option of the unemployed): that is the quantity the two-stage
//! accounting identity pins down. With a zero wage floor it coincides with
//! the economy-wide production of the metrics module.

use crate::dist::{mix, ReferralPmf, ValueDistribution};
use crate::dynamics::{referral_means, GroupParams, GroupState};
use crate::equilibrium::{self, ThresholdCut};
use crate::error::Error;
use crate::tol::Tolerances;
use crate::Result;

/// Per-group employment block measured at one stage of the period.
#[derive(Debug, Clone, Copy)]
pub struct StageEmployment {
    pub e_b: f64,
    pub e_g: f64,
}

impl StageEmployment {
    /// Employment-rate bias toward blues.
    pub fn bias(&self, params: &GroupParams) -> f64 {
        self.e_b / params.n_b - self.e_g / params.n_g
    }
}

/// Solved two-threshold equilibrium.
#[derive(Debug, Clone)]
pub struct FiringEquilibrium {
    pub lambda: f64,
    /// Referral hiring threshold.
    pub v1: f64,
    /// Firing threshold.
    pub v2: f64,
    pub r1: f64,
    pub r2: f64,
    pub pool1_value: f64,
    pub pool2_value: f64,
    pub production_pre: f64,
    pub production_post: f64,
    pub production_total: f64,
    pub pre: StageEmployment,
    pub post: StageEmployment,
    pub cut1: ThresholdCut,
    pub cut2: ThresholdCut,
    /// Standing assumption flags: hiring worthwhile in each pool.
    pub pool1_active: bool,
    pub pool2_active: bool,
    /// Mass fired (and refilled from pool 2).
    pub fired_mass: f64,
}

struct Scenario {
    values: ValueDistribution,
    p0_agg: f64,
    pmf_b: ReferralPmf,
    pmf_g: ReferralPmf,
    n: f64,
    w_min: f64,
}

fn build_scenario(
    params: &GroupParams,
    state: &GroupState,
    values: &ValueDistribution,
    w_min: f64,
) -> Result<Scenario> {
    state.validate(params)?;
    let (m_b, m_g) = referral_means(state, params);
    let pmf_b = params.family.pmf_from_mean(m_b)?;
    let pmf_g = params.family.pmf_from_mean(m_g)?;
    let aggregate = mix(&pmf_b, &pmf_g, params.n_b, params.n_g)?;
    if w_min >= values.max_value() {
        return Err(Error::InvalidPrimitives(
            "w_min not below the max of the support".into(),
        ));
    }
    Ok(Scenario {
        values: values.clone(),
        p0_agg: aggregate.p0(),
        pmf_b,
        pmf_g,
        n: params.n(),
        w_min,
    })
}

/// Evaluate the two equilibrium conditions at arbitrary `(v1, v2)`,
/// returning the clamped right-hand sides. Shared by the residual check and
/// the iterative cross-check.
fn eval_conditions(sc: &Scenario, lambda: f64, v1: f64, v2: f64, r1: f64, r2: f64) -> (f64, f64) {
    let tol = Tolerances::DEFAULT.indifference;
    let values = &sc.values;
    let cut1 = cut_at(values, v1, tol);
    let shares1 = equilibrium::pool_shares(values, sc.p0_agg, cut1, r1);
    let s1: f64 = shares1.iter().sum();
    let pi1: f64 = shares1
        .iter()
        .zip(values.atoms())
        .map(|(s, &(v, _))| s * v)
        .sum::<f64>()
        / s1;
    let h = sc.n * (1.0 - sc.p0_agg) * equilibrium::hired_prob(values, cut1, r1);
    let q1 = ((1.0 - h) / (sc.n - h)).clamp(0.0, 1.0);
    // Pool 2: unhired pool-1 members plus fired pool-1 hires below v2.
    let cut2 = cut_at(values, v2, tol);
    let mut mass2 = 0.0;
    let mut value2 = 0.0;
    for (j, (&s, &(v, _))) in shares1.iter().zip(values.atoms()).enumerate() {
        let stay = s * (1.0 - q1);
        let fired_share = if j < cut2.below {
            1.0
        } else if cut2.at && j == cut2.below {
            1.0 - r2
        } else {
            0.0
        };
        let m = stay + s * q1 * fired_share;
        mass2 += m;
        value2 += m * v;
    }
    let pi2 = value2 / mass2;
    let emax: f64 = shares1
        .iter()
        .zip(values.atoms())
        .map(|(s, &(v, _))| s * v.max(v2))
        .sum::<f64>()
        / s1;
    let rhs1 = ((1.0 - lambda) * pi1 + lambda * emax).max(sc.w_min);
    let rhs2 = pi2.max(sc.w_min);
    (rhs1, rhs2)
}

fn cut_at(values: &ValueDistribution, v: f64, tol: f64) -> ThresholdCut {
    match values.atom_at(v, tol) {
        Some(j) => ThresholdCut { below: j, at: true },
        None => ThresholdCut {
            below: values.atoms().iter().filter(|&&(a, _)| a < v).count(),
            at: false,
        },
    }
}

/// Residuals of the two equilibrium conditions at the solved thresholds.
pub fn residuals(
    params: &GroupParams,
    state: &GroupState,
    values: &ValueDistribution,
    w_min: f64,
    feq: &FiringEquilibrium,
) -> Result<(f64, f64)> {
    let sc = build_scenario(params, state, values, w_min)?;
    let (rhs1, rhs2) = eval_conditions(&sc, feq.lambda, feq.v1, feq.v2, feq.r1, feq.r2);
    Ok(((feq.v1 - rhs1).abs(), (feq.v2 - rhs2).abs()))
}

/// Everything one joint regime evaluation produces.
struct RegimeEval {
    rhs1: f64,
    v2: f64,
    pi1: f64,
    pi2: f64,
    cut2_ok: bool,
}

/// Evaluate pools and both right-hand sides for a fixed joint regime
/// `(cut1, r1, cut2)`.
fn eval_regime(
    sc: &Scenario,
    lambda: f64,
    cut1: ThresholdCut,
    r1: f64,
    cut2: ThresholdCut,
    tol: f64,
) -> Option<RegimeEval> {
    let values = &sc.values;
    let shares1 = equilibrium::pool_shares(values, sc.p0_agg, cut1, r1);
    let s1: f64 = shares1.iter().sum();
    let pi1: f64 = shares1
        .iter()
        .zip(values.atoms())
        .map(|(s, &(v, _))| s * v)
        .sum::<f64>()
        / s1;
    let h = sc.n * (1.0 - sc.p0_agg) * equilibrium::hired_prob(values, cut1, r1);
    if h > 1.0 + 1e-9 {
        return None;
    }
    let q1 = ((1.0 - h) / (sc.n - h)).clamp(0.0, 1.0);
    let mut mass2 = 0.0;
    let mut value2 = 0.0;
    for (j, (&s, &(v, _))) in shares1.iter().zip(values.atoms()).enumerate() {
        let m = s * (1.0 - q1) + if j < cut2.below { s * q1 } else { 0.0 };
        mass2 += m;
        value2 += m * v;
    }
    let pi2 = value2 / mass2;
    let v2 = pi2.max(sc.w_min);
    let cut2_ok = class_contains(values, cut2.below, v2, tol);
    let emax: f64 = shares1
        .iter()
        .zip(values.atoms())
        .map(|(s, &(v, _))| s * v.max(v2))
        .sum::<f64>()
        / s1;
    let rhs1 = ((1.0 - lambda) * pi1 + lambda * emax).max(sc.w_min);
    Some(RegimeEval {
        rhs1,
        v2,
        pi1,
        pi2,
        cut2_ok,
    })
}

/// Solve the coupled thresholds by exact nested regime enumeration: for each
/// candidate cut of the referral threshold over the atoms (between atoms, or
/// pinned at an atom with an interior mixing parameter solved by bisection),
/// derive pool 1, then solve the inner firing cut over pool 2, and keep the
/// jointly consistent pair. Exactly one joint regime validates on valid
/// inputs.
pub fn solve_firing(
    params: &GroupParams,
    state: &GroupState,
    values: &ValueDistribution,
    w_min: f64,
    lambda: f64,
) -> Result<FiringEquilibrium> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("lambda = {lambda} outside [0, 1]")));
    }
    let sc = build_scenario(params, state, values, w_min)?;
    let tol = Tolerances::DEFAULT;
    let k = values.len();
    let r2 = 1.0;

    // The base model nests at lambda = 0: no firing stage ever happens, both
    // thresholds conventionally equal the one-threshold fixed point.
    if lambda == 0.0 {
        return solve_lambda_zero(params, state, values, w_min, &sc);
    }

    struct Candidate {
        v1: f64,
        v2: f64,
        r1: f64,
        cut1: ThresholdCut,
        cut2: ThresholdCut,
        pi1: f64,
        pi2: f64,
    }
    let mut found: Vec<Candidate> = Vec::new();

    for below2 in 0..=k {
        let cut2 = ThresholdCut {
            below: below2,
            at: false,
        };
        // Interval regimes: threshold strictly between atoms, full hiring
        // above it (r1 = 1 is payoff-equivalent for interval cuts).
        for below1 in 0..=k {
            let cut1 = ThresholdCut {
                below: below1,
                at: false,
            };
            let Some(ev) = eval_regime(&sc, lambda, cut1, 1.0, cut2, tol.indifference) else {
                continue;
            };
            if !ev.cut2_ok || !class_contains(values, below1, ev.rhs1, tol.indifference) {
                continue;
            }
            found.push(Candidate {
                v1: ev.rhs1,
                v2: ev.v2,
                r1: 1.0,
                cut1,
                cut2,
                pi1: ev.pi1,
                pi2: ev.pi2,
            });
        }
        // At-atom regimes: the referral threshold pinned at an atom, the
        // mixing parameter solving the first condition. These occupy open
        // lambda-windows, unlike the knife edges of the base model.
        for a in 0..k {
            let v_a = values.value(a);
            let cut1 = ThresholdCut { below: a, at: true };
            let g = |r1: f64| -> Option<f64> {
                eval_regime(&sc, lambda, cut1, r1, cut2, tol.indifference).map(|ev| ev.rhs1 - v_a)
            };
            let (Some(g0), Some(g1)) = (g(0.0), g(1.0)) else {
                continue;
            };
            if g0.abs() <= tol.indifference || g1.abs() <= tol.indifference {
                // Endpoint solutions coincide with interval regimes above.
                continue;
            }
            if g0 * g1 > 0.0 {
                continue;
            }
            let (mut lo, mut hi, mut glo) = (0.0f64, 1.0f64, g0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid).unwrap();
                if glo * gm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            let r1 = 0.5 * (lo + hi);
            let ev = eval_regime(&sc, lambda, cut1, r1, cut2, tol.indifference).unwrap();
            if !ev.cut2_ok {
                continue;
            }
            found.push(Candidate {
                v1: v_a,
                v2: ev.v2,
                r1,
                cut1,
                cut2,
                pi1: ev.pi1,
                pi2: ev.pi2,
            });
        }
    }

    found.sort_by(|a, b| (a.v1, a.v2).partial_cmp(&(b.v1, b.v2)).unwrap());
    found.dedup_by(|a, b| {
        (a.v1 - b.v1).abs() <= tol.indifference && (a.v2 - b.v2).abs() <= tol.indifference
    });
    let c = match found.len() {
        1 => &found[0],
        0 => {
            return Err(Error::Solver {
                message: format!("no validating joint regime at lambda = {lambda}"),
                lo: values.min_value(),
                hi: values.max_value(),
            })
        }
        more => {
            return Err(Error::Solver {
                message: format!("{more} validating joint regimes at lambda = {lambda}"),
                lo: values.min_value(),
                hi: values.max_value(),
            })
        }
    };

    // Per-group stage flows.
    let x = equilibrium::hired_prob(values, c.cut1, c.r1);
    let h = sc.n * (1.0 - sc.p0_agg) * x;
    let q1 = ((1.0 - h) / (sc.n - h)).clamp(0.0, 1.0);
    let pool1_active = c.v1 >= sc.w_min - tol.indifference && {
        let emax: f64 = {
            let shares1 = equilibrium::pool_shares(values, sc.p0_agg, c.cut1, c.r1);
            let s1: f64 = shares1.iter().sum();
            shares1
                .iter()
                .zip(values.atoms())
                .map(|(s, &(v, _))| s * v.max(c.v2))
                .sum::<f64>()
                / s1
        };
        (1.0 - lambda) * c.pi1 + lambda * emax >= sc.w_min - tol.indifference
    };
    let pool2_active = c.pi2 >= sc.w_min - tol.indifference;

    let group_flow = |n_gamma: f64, pmf: &ReferralPmf| -> (f64, f64, f64, f64) {
        let p0 = pmf.p0();
        let hire_ref = n_gamma * (1.0 - p0) * x;
        let shares = equilibrium::pool_shares(values, p0, c.cut1, c.r1);
        let pool1_mass: f64 = shares.iter().sum::<f64>() * n_gamma;
        let pool1_hire = q1 * pool1_mass;
        let fired: f64 = shares
            .iter()
            .take(c.cut2.below)
            .sum::<f64>()
            * n_gamma
            * q1;
        (hire_ref, pool1_mass, pool1_hire, fired)
    };
    let (ref_b, pool1_b, p1hire_b, fired_b) = group_flow(params.n_b, &sc.pmf_b);
    let (ref_g, pool1_g, p1hire_g, fired_g) = group_flow(params.n_g, &sc.pmf_g);
    let fired_mass = fired_b + fired_g;
    let pool2_b = (pool1_b - p1hire_b) + fired_b;
    let pool2_g = (pool1_g - p1hire_g) + fired_g;
    let q2 = if pool2_active && fired_mass > 0.0 {
        fired_mass / (pool2_b + pool2_g)
    } else {
        0.0
    };
    let pre = StageEmployment {
        e_b: ref_b + p1hire_b,
        e_g: ref_g + p1hire_g,
    };
    let post = StageEmployment {
        e_b: ref_b + (p1hire_b - fired_b) + q2 * pool2_b,
        e_g: ref_g + (p1hire_g - fired_g) + q2 * pool2_g,
    };

    // Firm-side productions.
    let ref_value = sc.n * (1.0 - sc.p0_agg) * equilibrium::hired_value(values, c.cut1, c.r1);
    let shares1 = equilibrium::pool_shares(values, sc.p0_agg, c.cut1, c.r1);
    let pool1_hire_value: f64 = shares1
        .iter()
        .zip(values.atoms())
        .map(|(s, &(v, _))| s * v)
        .sum::<f64>()
        * sc.n
        * q1;
    let kept_value: f64 = shares1
        .iter()
        .zip(values.atoms())
        .enumerate()
        .filter(|&(j, _)| j >= c.cut2.below)
        .map(|(_, (s, &(v, _)))| s * v)
        .sum::<f64>()
        * sc.n
        * q1;
    let production_pre = ref_value + pool1_hire_value;
    let production_post = ref_value + kept_value + q2 * (pool2_b + pool2_g) * c.pi2;
    let production_total = (1.0 - lambda) * production_pre + lambda * production_post;

    let feq = FiringEquilibrium {
        lambda,
        v1: c.v1,
        v2: c.v2,
        r1: c.r1,
        r2,
        pool1_value: c.pi1,
        pool2_value: c.pi2,
        production_pre,
        production_post,
        production_total,
        pre,
        post,
        cut1: c.cut1,
        cut2: c.cut2,
        pool1_active,
        pool2_active,
        fired_mass,
    };

    // Kept referral hires all sit above both thresholds: firing never touches
    // them. This is the ordering assertion on outputs.
    if lambda > 0.0 && feq.cut1.first_hired() < feq.cut2.below {
        return Err(Error::Invariant(
            "a referral hire would be fired: threshold ordering violated".into(),
        ));
    }
    Ok(feq)
}

fn class_contains(values: &ValueDistribution, below: usize, v: f64, tol: f64) -> bool {
    let k = values.len();
    let lo_ok = below == 0 || v >= values.value(below - 1) - tol;
    let hi_ok = below == k || v <= values.value(below) + tol;
    lo_ok && hi_ok
}

/// Degenerate case: with no time left after the firing stage, nobody fires
/// and both thresholds collapse onto the base-model fixed point.
fn solve_lambda_zero(
    params: &GroupParams,
    state: &GroupState,
    values: &ValueDistribution,
    w_min: f64,
    sc: &Scenario,
) -> Result<FiringEquilibrium> {
    let (_, base) = crate::dynamics::step(state, params, values, w_min, 1.0)?;
    let eq = &base.equilibrium;
    let pre = StageEmployment {
        e_b: base.blue.next_employment,
        e_g: base.green.next_employment,
    };
    let ref_value =
        sc.n * (1.0 - sc.p0_agg) * equilibrium::hired_value(values, eq.cut, eq.mixing_r);
    let production = ref_value + eq.mass_hired_pool * eq.pool_value;
    Ok(FiringEquilibrium {
        lambda: 0.0,
        v1: eq.threshold,
        v2: eq.threshold,
        r1: eq.mixing_r,
        r2: 1.0,
        pool1_value: eq.pool_value,
        pool2_value: eq.pool_value,
        production_pre: production,
        production_post: production,
        production_total: production,
        pre,
        post: pre,
        cut1: eq.cut,
        cut2: eq.cut,
        pool1_active: eq.pool_hiring.hires(),
        pool2_active: eq.pool_hiring.hires(),
        fired_mass: 0.0,
    })
}

/// Independent cross-check: damped fixed-point iteration on `(v1, v2)`.
pub fn solve_firing_iterative(
    params: &GroupParams,
    state: &GroupState,
    values: &ValueDistribution,
    w_min: f64,
    lambda: f64,
    tol: f64,
    budget: usize,
) -> Result<(f64, f64)> {
    let sc = build_scenario(params, state, values, w_min)?;
    let mut v1 = values.mean();
    let mut v2 = w_min.max(values.min_value());
    let damping = 0.5;
    for _ in 0..budget {
        let (rhs1, rhs2) = eval_conditions(&sc, lambda, v1, v2, 1.0, 1.0);
        let n1 = v1 + damping * (rhs1 - v1);
        let n2 = v2 + damping * (rhs2 - v2);
        let delta = (n1 - v1).abs().max((n2 - v2).abs());
        v1 = n1;
        v2 = n2;
        if delta < tol {
            return Ok((v1, v2));
        }
    }
    Err(Error::Solver {
        message: format!("firing iteration did not converge at lambda = {lambda}"),
        lo: values.min_value(),
        hi: values.max_value(),
    })
}

/// Comparative statics along a `lambda` grid.
#[derive(Debug, Clone)]
pub struct FiringComparative {
    pub rows: Vec<FiringEquilibrium>,
    pub total_production_nondecreasing: bool,
    pub strict_vs_zero: bool,
    pub pre_bias_nonincreasing: bool,
    pub pre_production_nonincreasing: bool,
    pub post_production_nondecreasing: bool,
}

pub fn firing_comparative(
    params: &GroupParams,
    state: &GroupState,
    values: &ValueDistribution,
    w_min: f64,
    lambda_grid: &[f64],
) -> Result<FiringComparative> {
    if !lambda_grid.contains(&0.0) {
        return Err(Error::Domain("lambda grid must include 0".into()));
    }
    if lambda_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("lambda grid must be strictly increasing".into()));
    }
    let rows: Vec<FiringEquilibrium> = lambda_grid
        .iter()
        .map(|&l| solve_firing(params, state, values, w_min, l))
        .collect::<Result<_>>()?;
    let eps = 1e-12;
    let mut total_nondec = true;
    let mut pre_bias_noninc = true;
    let mut pre_prod_noninc = true;
    let mut post_prod_nondec = true;
    for w in rows.windows(2) {
        if w[1].production_total < w[0].production_total - eps {
            total_nondec = false;
        }
        if w[1].pre.bias(params) > w[0].pre.bias(params) + eps {
            pre_bias_noninc = false;
        }
        if w[1].production_pre > w[0].production_pre + eps {
            pre_prod_noninc = false;
        }
        if w[1].production_post < w[0].production_post - eps {
            post_prod_nondec = false;
        }
    }
    let strict_vs_zero = rows
        .iter()
        .skip(1)
        .all(|r| r.production_total > rows[0].production_total + eps);
    Ok(FiringComparative {
        rows,
        total_production_nondecreasing: total_nondec,
        strict_vs_zero,
        pre_bias_nonincreasing: pre_bias_noninc,
        pre_production_nonincreasing: pre_prod_noninc,
        post_production_nondecreasing: post_prod_nondec,
    })
}
