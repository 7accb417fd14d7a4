//! Productivity, inequality, and profit analytics over equilibria and
//! trajectories.

use crate::dist::{ReferralPmf, ValueDistribution};
use crate::equilibrium::{self, Equilibrium, MarketPrimitives};
use crate::error::Error;
use crate::tol::Tolerances;
use crate::Result;

/// Production accounting for one period: total value of employed workers plus
/// the outside option (`w_min`) for every unemployed worker.
#[derive(Debug, Clone, Copy)]
pub struct ProductionReport {
    pub total_production: f64,
    /// Mean value of employed workers.
    pub per_worker_productivity: f64,
    pub employment_mass: f64,
    /// Second route, defined when pool hiring is active: `n E[v]` minus the
    /// value left with the not-hired pool remainder. Must agree with the
    /// direct sum.
    pub identity_production: Option<f64>,
}

/// Compute production for a solved equilibrium by direct summation, plus the
/// accounting-identity route when the pool is active.
pub fn total_production(prim: &MarketPrimitives, eq: &Equilibrium) -> ProductionReport {
    let p0 = prim.referrals.p0();
    let ref_value =
        prim.n * (1.0 - p0) * equilibrium::hired_value(&prim.values, eq.cut, eq.mixing_r);
    let employed_value = ref_value + eq.mass_hired_pool * eq.pool_value;
    let employment = eq.employment_mass;
    let direct = employed_value + (prim.n - employment) * prim.w_min;
    let identity = if eq.pool_hiring.hires() {
        let employed = prim.n * prim.values.mean() - (prim.n - employment) * eq.pool_value;
        Some(employed + (prim.n - employment) * prim.w_min)
    } else {
        None
    };
    ProductionReport {
        total_production: direct,
        per_worker_productivity: if employment > 0.0 {
            employed_value / employment
        } else {
            0.0
        },
        employment_mass: employment,
        identity_production: identity,
    }
}

/// One row of the comparative statics in the no-referral probability.
#[derive(Debug, Clone, Copy)]
pub struct P0Row {
    pub p0: f64,
    pub production: f64,
    pub pool_value: f64,
}

#[derive(Debug, Clone)]
pub struct P0MonotonicityReport {
    pub rows: Vec<P0Row>,
    pub production_nonincreasing: bool,
    pub pool_value_nondecreasing: bool,
    /// Strict movement wherever P(0) strictly increases.
    pub production_strict: bool,
    pub pool_value_strict: bool,
}

/// Concentrating referrals (raising `P(0)`) weakly lowers production and
/// weakly raises the pool value; strictly when `P(0)` strictly rises.
pub fn production_vs_p0<B>(
    values: &ValueDistribution,
    n: f64,
    w_min: f64,
    p0_grid: &[f64],
    pmf_builder: B,
) -> Result<P0MonotonicityReport>
where
    B: Fn(f64) -> Result<ReferralPmf>,
{
    if p0_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("p0 grid must be sorted ascending".into()));
    }
    let mut rows = Vec::with_capacity(p0_grid.len());
    for &p0 in p0_grid {
        let pmf = pmf_builder(p0)?;
        if (pmf.p0() - p0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "builder returned P(0) = {} for requested {p0}",
                pmf.p0()
            )));
        }
        let prim = MarketPrimitives::new(values.clone(), pmf, n, w_min)?;
        let eq = equilibrium::solve_threshold(&prim, 1.0)?;
        rows.push(P0Row {
            p0,
            production: total_production(&prim, &eq).total_production,
            pool_value: eq.pool_value,
        });
    }
    let tol = 1e-12;
    let mut production_nonincreasing = true;
    let mut pool_value_nondecreasing = true;
    let mut production_strict = true;
    let mut pool_value_strict = true;
    for w in rows.windows(2) {
        if w[1].production > w[0].production + tol {
            production_nonincreasing = false;
        }
        if w[1].pool_value < w[0].pool_value - tol {
            pool_value_nondecreasing = false;
        }
        if w[1].p0 > w[0].p0 + tol {
            if w[1].production >= w[0].production - tol {
                production_strict = false;
            }
            if w[1].pool_value <= w[0].pool_value + tol {
                pool_value_strict = false;
            }
        }
    }
    Ok(P0MonotonicityReport {
        rows,
        production_nonincreasing,
        pool_value_nondecreasing,
        production_strict,
        pool_value_strict,
    })
}

/// Inputs of the closed-form two-point Gini.
#[derive(Debug, Clone, Copy)]
pub struct GiniInputs {
    /// Fraction earning the high wage.
    pub pi_h: f64,
    pub w_h: f64,
    pub w_min: f64,
}

impl GiniInputs {
    pub fn pi_l(&self) -> f64 {
        1.0 - self.pi_h
    }
    /// Total income of high earners.
    pub fn i_h(&self) -> f64 {
        self.pi_h * self.w_h
    }
    /// Total income of low earners.
    pub fn i_l(&self) -> f64 {
        self.pi_l() * self.w_min
    }
}

/// Closed form: `pi_H pi_L (w_H - w_min) / (pi_H w_H + pi_L w_min)`.
pub fn gini_two_point(inputs: &GiniInputs) -> Result<f64> {
    let GiniInputs { pi_h, w_h, w_min } = *inputs;
    if !(0.0..=1.0).contains(&pi_h) {
        return Err(Error::Domain(format!("pi_h = {pi_h} outside [0, 1]")));
    }
    if w_min < 0.0 || w_h < w_min {
        return Err(Error::Domain(format!(
            "need w_h >= w_min >= 0, got w_h = {w_h}, w_min = {w_min}"
        )));
    }
    let pi_l = 1.0 - pi_h;
    let mean_income = pi_h * w_h + pi_l * w_min;
    if mean_income == 0.0 {
        return Ok(0.0);
    }
    Ok(pi_h * pi_l * (w_h - w_min) / mean_income)
}

/// Exact weighted mean-absolute-difference Gini over wage atoms. This is the
/// oracle definition the closed form must reproduce.
pub fn gini_general(wage_atoms: &[(f64, f64)]) -> Result<f64> {
    let total: f64 = wage_atoms.iter().map(|&(_, m)| m).sum();
    if total <= 0.0 {
        return Err(Error::Domain("total mass must be positive".into()));
    }
    if wage_atoms.iter().any(|&(w, m)| w < 0.0 || m < 0.0) {
        return Err(Error::Domain("wages and masses must be nonnegative".into()));
    }
    let mean: f64 = wage_atoms.iter().map(|&(w, m)| w * m).sum::<f64>() / total;
    if mean == 0.0 {
        return Ok(0.0);
    }
    let mut mad = 0.0;
    for &(wi, mi) in wage_atoms {
        for &(wj, mj) in wage_atoms {
            mad += (mi / total) * (mj / total) * (wi - wj).abs();
        }
    }
    Ok(mad / (2.0 * mean))
}

/// Which referral statistic a sensitivity probe moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GiniDirection {
    /// Raise P(0), take the mass from P(1), hold P(2+).
    RaiseP0,
    /// Raise P(2+), take the mass from P(1), hold P(0).
    RaiseP2Plus,
}

/// A two-value economy pinned down enough to evaluate the wage Gini.
#[derive(Debug, Clone, Copy)]
pub struct TwoValueEconomy {
    pub f_h: f64,
    pub v_l: f64,
    pub v_h: f64,
    pub w_min: f64,
    pub n: f64,
    pub p0: f64,
    pub p2_plus: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct GiniSensitivity {
    pub baseline_gini: f64,
    pub delta_gini: f64,
    pub i_l_pi_l: f64,
    pub i_h_pi_h: f64,
}

fn two_value_gini(econ: &TwoValueEconomy, p0: f64, p2: f64) -> Result<(f64, GiniInputs)> {
    let p1 = 1.0 - p0 - p2;
    if p1 < 0.0 {
        return Err(Error::Domain("P(1) went negative".into()));
    }
    let values = ValueDistribution::two_point(econ.v_l, econ.v_h, econ.f_h)?;
    let pmf = ReferralPmf::new(vec![p0, p1, p2], 0.0)?;
    let prim = MarketPrimitives::new(values, pmf, econ.n, econ.w_min)?;
    let eq = equilibrium::solve_threshold(&prim, 1.0)?;
    if !(econ.v_l < eq.threshold && eq.threshold < econ.v_h) || !eq.pool_hiring.hires() {
        return Err(Error::Domain(
            "economy not in the interior two-wage regime".into(),
        ));
    }
    let inputs = GiniInputs {
        pi_h: p2 * econ.f_h,
        w_h: econ.v_h - eq.threshold + econ.w_min,
        w_min: econ.w_min,
    };
    Ok((gini_two_point(&inputs)?, inputs))
}

/// Finite-difference check of the signed Gini responses around the given
/// two-value economy.
pub fn gini_sensitivity(
    econ: &TwoValueEconomy,
    direction: GiniDirection,
) -> Result<GiniSensitivity> {
    let delta = 1e-6;
    let (base, inputs) = two_value_gini(econ, econ.p0, econ.p2_plus)?;
    let bumped = match direction {
        GiniDirection::RaiseP0 => two_value_gini(econ, econ.p0 + delta, econ.p2_plus)?,
        GiniDirection::RaiseP2Plus => two_value_gini(econ, econ.p0, econ.p2_plus + delta)?,
    };
    Ok(GiniSensitivity {
        baseline_gini: base,
        delta_gini: bumped.0 - base,
        i_l_pi_l: inputs.i_l() * inputs.pi_l(),
        i_h_pi_h: inputs.i_h() * inputs.pi_h,
    })
}

/// Wage Gini with firm profits distributed uniformly: every worker's income
/// rises by `profit / n`. A uniform addition compresses relative differences,
/// so the adjusted Gini is weakly lower than the wage-only one.
pub fn gini_with_profit_incidence(
    wage_atoms: &[(f64, f64)],
    profit: f64,
    n: f64,
) -> Result<f64> {
    if n <= 0.0 {
        return Err(Error::Domain("worker mass must be positive".into()));
    }
    if profit < 0.0 {
        return Err(Error::Domain("profit incidence expects nonnegative profits".into()));
    }
    let per_head = profit / n;
    let shifted: Vec<(f64, f64)> = wage_atoms
        .iter()
        .map(|&(w, m)| (w + per_head, m))
        .collect();
    gini_general(&shifted)
}

/// Firm profits in the two-value, pool-active regime, evaluated verbatim:
/// `n P(1) f_H v_H + (1 - P(1) f_H) v_tilde - w_min`.
pub fn profits(
    p1: f64,
    f_h: f64,
    v_h: f64,
    v_tilde: f64,
    w_min: f64,
    n: f64,
) -> Result<f64> {
    if v_tilde < w_min - Tolerances::DEFAULT.indifference {
        return Err(Error::Domain(format!(
            "profit formula requires pool value {v_tilde} >= w_min {w_min}"
        )));
    }
    Ok(n * p1 * f_h * v_h + (1.0 - p1 * f_h) * v_tilde - w_min)
}
