//! One-period hiring game: the unique threshold/mixing fixed point, pool
//! (lemons) value, wages, and the planner benchmark.
//!
//! Because the value distribution is discrete, the pool value is piecewise
//! constant in the threshold between atoms. The solver therefore enumerates
//! candidate decision regimes (cut below each atom, at each atom, above all,
//! and the wage-floor-binding regime) and checks the fixed-point condition in
//! each; exactly one regime validates on valid inputs.

use crate::dist::{ReferralPmf, ValueDistribution};
use crate::error::Error;
use crate::tol::Tolerances;
use crate::Result;

/// Everything the pool-value equation needs: the value distribution, the
/// aggregate referral distribution, worker mass, and the wage floor.
///
/// `firm_mass` is 1 in the base model; macro shocks reduce it.
#[derive(Debug, Clone)]
pub struct MarketPrimitives {
    pub values: ValueDistribution,
    pub referrals: ReferralPmf,
    pub n: f64,
    pub w_min: f64,
    pub firm_mass: f64,
}

impl MarketPrimitives {
    pub fn new(
        values: ValueDistribution,
        referrals: ReferralPmf,
        n: f64,
        w_min: f64,
    ) -> Result<Self> {
        Self::with_firm_mass(values, referrals, n, w_min, 1.0)
    }

    pub fn with_firm_mass(
        values: ValueDistribution,
        referrals: ReferralPmf,
        n: f64,
        w_min: f64,
        firm_mass: f64,
    ) -> Result<Self> {
        if !n.is_finite() || n < 1.0 {
            return Err(Error::InvalidPrimitives(format!("worker mass {n} < 1")));
        }
        if !(0.0..=1.0).contains(&firm_mass) || firm_mass <= 0.0 {
            return Err(Error::InvalidPrimitives(format!(
                "firm mass {firm_mass} outside (0, 1]"
            )));
        }
        if w_min >= values.max_value() {
            return Err(Error::InvalidPrimitives(format!(
                "w_min = {w_min} not below the max of the support {}",
                values.max_value()
            )));
        }
        let p0 = referrals.p0();
        if !(p0 > 0.0 && p0 < 1.0) {
            return Err(Error::InvalidPrimitives(format!(
                "need 1 > P(0) > 0, got {p0}"
            )));
        }
        Ok(Self {
            values,
            referrals,
            n,
            w_min,
            firm_mass,
        })
    }
}

/// Hire/no-hire decision of pool firms at the fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolHiring {
    Hire,
    NoHire,
    /// Pool value equals the wage floor within tolerance. Firms hire by
    /// default; dynamics scenarios may override to exercise cycles.
    Indifferent,
}

impl PoolHiring {
    pub fn hires(&self) -> bool {
        matches!(self, PoolHiring::Hire | PoolHiring::Indifferent)
    }
}

/// Decision regime over the sorted atoms: `below` atoms are strictly under
/// the threshold; when `at` is set, atom `below` sits exactly at it and the
/// mixing parameter applies there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdCut {
    pub below: usize,
    pub at: bool,
}

impl ThresholdCut {
    /// Index of the first atom hired with certainty.
    pub fn first_hired(&self) -> usize {
        self.below + usize::from(self.at)
    }
}

/// Solved one-period equilibrium.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub threshold: f64,
    pub mixing_r: f64,
    /// Expected value of workers in the pool at the fixed point (below
    /// `w_min` exactly when the pool shuts).
    pub pool_value: f64,
    pub pool_hiring: PoolHiring,
    pub cut: ThresholdCut,
    pub mass_hired_referral: f64,
    pub mass_hired_pool: f64,
    pub employment_mass: f64,
    pub firm_mass: f64,
    /// Probability a referral-holding worker is hired: Pr(v > threshold) plus
    /// the mixed share of any atom at the threshold.
    pub referred_hire_prob: f64,
}

impl Equilibrium {
    /// Probability a pool member is hired.
    pub fn pool_hire_prob(&self, n: f64) -> f64 {
        let pool_workers = n - self.mass_hired_referral;
        if pool_workers <= 0.0 {
            0.0
        } else {
            self.mass_hired_pool / pool_workers
        }
    }
}

/// Expected value of workers in the pool for an arbitrary threshold `v`
/// and mixing `r`: weight `p0` on the unconditional mean,
/// the rest on referred workers rejected under `(v, r)`.
pub fn pool_value(values: &ValueDistribution, p0: f64, v: f64, r: f64) -> Result<f64> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::Domain(format!("p0 = {p0} outside (0, 1)")));
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("r = {r} outside [0, 1]")));
    }
    let tol = Tolerances::DEFAULT.indifference;
    let at = values.atom_at(v, tol);
    let below = match at {
        Some(j) => j,
        None => values.atoms().iter().filter(|&&(a, _)| a < v).count(),
    };
    let cut = ThresholdCut {
        below,
        at: at.is_some(),
    };
    Ok(pool_mean(values, p0, cut, r))
}

/// Pool composition as per-atom shares of total worker mass.
pub(crate) fn pool_shares(
    values: &ValueDistribution,
    p0: f64,
    cut: ThresholdCut,
    r: f64,
) -> Vec<f64> {
    let mut shares = Vec::with_capacity(values.len());
    for (j, &(_, f)) in values.atoms().iter().enumerate() {
        let mut s = p0 * f;
        if j < cut.below {
            s += (1.0 - p0) * f;
        } else if cut.at && j == cut.below {
            s += (1.0 - p0) * f * (1.0 - r);
        }
        shares.push(s);
    }
    shares
}

pub(crate) fn pool_mean(values: &ValueDistribution, p0: f64, cut: ThresholdCut, r: f64) -> f64 {
    let shares = pool_shares(values, p0, cut, r);
    let total: f64 = shares.iter().sum();
    let value: f64 = shares
        .iter()
        .zip(values.atoms())
        .map(|(s, &(v, _))| s * v)
        .sum();
    value / total
}

/// Probability a referral-holder is hired under `(cut, r)`.
pub(crate) fn hired_prob(values: &ValueDistribution, cut: ThresholdCut, r: f64) -> f64 {
    let above: f64 = values
        .atoms()
        .iter()
        .skip(cut.first_hired())
        .map(|&(_, f)| f)
        .sum();
    let at = if cut.at { values.prob(cut.below) * r } else { 0.0 };
    above + at
}

/// Sum of `v * f` over hired atoms under `(cut, r)`.
pub(crate) fn hired_value(values: &ValueDistribution, cut: ThresholdCut, r: f64) -> f64 {
    let above: f64 = values
        .atoms()
        .iter()
        .skip(cut.first_hired())
        .map(|&(v, f)| v * f)
        .sum();
    let at = if cut.at {
        values.value(cut.below) * values.prob(cut.below) * r
    } else {
        0.0
    };
    above + at
}

/// Solve the fixed point `v = max(w_min, pool_value(v, r))`.
///
/// `default_r` is recorded as the mixing parameter: it is payoff-irrelevant
/// at the fixed point but determines group composition downstream.
pub fn solve_threshold(prim: &MarketPrimitives, default_r: f64) -> Result<Equilibrium> {
    if !(0.0..=1.0).contains(&default_r) {
        return Err(Error::Domain(format!("r = {default_r} outside [0, 1]")));
    }
    let tol = Tolerances::DEFAULT;
    let values = &prim.values;
    let p0 = prim.referrals.p0();
    let k = values.len();

    struct Candidate {
        threshold: f64,
        pool_value: f64,
        cut: ThresholdCut,
        hiring: PoolHiring,
        r: f64,
    }
    let mut candidates: Vec<Candidate> = Vec::new();

    // Pool-hiring regimes: the threshold equals the pool value induced by
    // rejecting exactly the `below` lowest atoms.
    for below in 0..=k {
        let cut = ThresholdCut { below, at: false };
        let pi = pool_mean(values, p0, cut, default_r);
        if pi < prim.w_min - tol.indifference {
            continue;
        }
        // Position consistency: rejected atoms strictly below, hired strictly
        // above (within the indifference tolerance an atom sits at the cut).
        let lo_ok = below == 0 || values.value(below - 1) <= pi + tol.indifference;
        let hi_ok = below == k || values.value(below) >= pi - tol.indifference;
        if !(lo_ok && hi_ok) {
            continue;
        }
        let hiring = if pi > prim.w_min + tol.indifference {
            PoolHiring::Hire
        } else {
            PoolHiring::Indifferent
        };
        // Knife edges: the pool value coincides with an atom, so the atom is
        // at the threshold and the mixing parameter applies there.
        let at_lower = below > 0 && (values.value(below - 1) - pi).abs() <= tol.indifference;
        let at_upper = below < k && (values.value(below) - pi).abs() <= tol.indifference;
        let cut = if at_upper {
            ThresholdCut { below, at: true }
        } else if at_lower {
            ThresholdCut {
                below: below - 1,
                at: true,
            }
        } else {
            cut
        };
        candidates.push(Candidate {
            threshold: pi,
            pool_value: pi,
            cut,
            hiring,
            r: default_r,
        });
    }

    // Wage-floor-binding regime: threshold at w_min, pool shut (or exactly
    // indifferent, which the loop above also produces and dedup handles).
    {
        let at = values.atom_at(prim.w_min, tol.indifference);
        let below = match at {
            Some(j) => j,
            None => values
                .atoms()
                .iter()
                .filter(|&&(a, _)| a < prim.w_min)
                .count(),
        };
        let cut = ThresholdCut {
            below,
            at: at.is_some(),
        };
        let pi = pool_mean(values, p0, cut, default_r);
        if pi <= prim.w_min + tol.indifference {
            let hiring = if pi < prim.w_min - tol.indifference {
                PoolHiring::NoHire
            } else {
                PoolHiring::Indifferent
            };
            candidates.push(Candidate {
                threshold: prim.w_min,
                pool_value: pi,
                cut,
                hiring,
                r: default_r,
            });
        }
    }

    // Dedupe threshold-equivalent candidates (knife edges produce the same
    // fixed point from adjacent regimes).
    candidates.sort_by(|a, b| a.threshold.partial_cmp(&b.threshold).unwrap());
    // Knife edges surface the same fixed point from adjacent regimes (and
    // the indifferent pool regime coincides with the floor-binding one); the
    // first candidate is the canonical hire-on-indifference representative.
    candidates.dedup_by(|a, b| (a.threshold - b.threshold).abs() <= tol.indifference);

    let chosen = match candidates.len() {
        1 => &candidates[0],
        0 => {
            return Err(Error::Solver {
                message: "no validating regime".into(),
                lo: values.min_value(),
                hi: values.max_value(),
            })
        }
        _ => {
            return Err(Error::Solver {
                message: format!(
                    "{} distinct validating regimes at thresholds {:?}",
                    candidates.len(),
                    candidates.iter().map(|c| c.threshold).collect::<Vec<_>>()
                ),
                lo: values.min_value(),
                hi: values.max_value(),
            })
        }
    };

    let x = hired_prob(values, chosen.cut, chosen.r);
    let mass_hired_referral = prim.n * (1.0 - p0) * x;
    if mass_hired_referral > prim.firm_mass + 1e-9 {
        return Err(Error::Invariant(format!(
            "referral hires {mass_hired_referral} exceed firm mass {}",
            prim.firm_mass
        )));
    }
    let pool_firms = (prim.firm_mass - mass_hired_referral).max(0.0);
    let mass_hired_pool = if chosen.hiring.hires() { pool_firms } else { 0.0 };
    let employment_mass = mass_hired_referral + mass_hired_pool;

    Ok(Equilibrium {
        threshold: chosen.threshold,
        mixing_r: chosen.r,
        pool_value: chosen.pool_value,
        pool_hiring: chosen.hiring,
        cut: chosen.cut,
        mass_hired_referral,
        mass_hired_pool,
        employment_mass,
        firm_mass: prim.firm_mass,
        referred_hire_prob: x,
    })
}

/// Equilibrium wage of a hired worker with value `v` and `k_referrals`
/// referrals: competition bids the wage up only for multi-referral workers
/// hired on the referral market; everyone else earns the floor.
pub fn wage(v: f64, k_referrals: usize, eq: &Equilibrium, w_min: f64) -> Result<f64> {
    let tol = Tolerances::DEFAULT.indifference;
    let referral_hired = k_referrals >= 1 && v >= eq.threshold - tol;
    let pool_hired_possible = eq.pool_hiring.hires();
    if !referral_hired && !pool_hired_possible {
        return Err(Error::Contract(format!(
            "worker (v = {v}, k = {k_referrals}) cannot be hired: below threshold {} and pool shut",
            eq.threshold
        )));
    }
    if k_referrals >= 2 && referral_hired {
        Ok((v - eq.threshold).max(0.0) + w_min)
    } else {
        Ok(w_min)
    }
}

/// `mean(F) - pool value`: strictly positive in equilibrium (the lemons
/// effect).
pub fn lemons_gap(prim: &MarketPrimitives, eq: &Equilibrium) -> f64 {
    prim.values.mean() - eq.pool_value
}

/// Planner benchmark: production-maximizing threshold by exhaustive scan over
/// decision-distinct regimes (the discrete analogue of a grid-plus-bisection
/// search; production is piecewise constant between atoms).
#[derive(Debug, Clone)]
pub struct PlannerSolution {
    pub threshold: f64,
    pub production: f64,
    pub cut: ThresholdCut,
    pub pool_hires: bool,
}

pub fn planner_threshold(prim: &MarketPrimitives, default_r: f64) -> Result<PlannerSolution> {
    let values = &prim.values;
    let p0 = prim.referrals.p0();
    let k = values.len();
    let mut best: Option<PlannerSolution> = None;

    let mut consider = |threshold: f64, cut: ThresholdCut, r: f64| {
        let x = hired_prob(values, cut, r);
        let h = prim.n * (1.0 - p0) * x;
        if h > prim.firm_mass + 1e-9 {
            return; // infeasible: more referral hires than firms
        }
        let ref_value = prim.n * (1.0 - p0) * hired_value(values, cut, r);
        let pi = pool_mean(values, p0, cut, r);
        let pool_firms = (prim.firm_mass - h).max(0.0);
        let pool_hires = pi >= prim.w_min;
        let hired_pool = if pool_hires { pool_firms } else { 0.0 };
        let production =
            ref_value + hired_pool * pi + (prim.n - h - hired_pool) * prim.w_min;
        let better = match &best {
            None => true,
            Some(b) => production > b.production + 1e-15,
        };
        if better {
            best = Some(PlannerSolution {
                threshold,
                production,
                cut,
                pool_hires,
            });
        }
    };

    // Interval regimes: a threshold strictly between atoms (or outside the
    // support); representative value is the induced pool decision itself.
    for below in 0..=k {
        let cut = ThresholdCut { below, at: false };
        let rep = if below == 0 {
            values.min_value() - 1.0
        } else if below == k {
            values.max_value() + 1.0
        } else {
            0.5 * (values.value(below - 1) + values.value(below))
        };
        consider(rep, cut, default_r);
    }
    // At-atom regimes with the default mixing.
    for j in 0..k {
        let cut = ThresholdCut { below: j, at: true };
        consider(values.value(j), cut, default_r);
    }

    best.ok_or_else(|| Error::Solver {
        message: "planner scan found no feasible regime".into(),
        lo: values.min_value(),
        hi: values.max_value(),
    })
}

/// Same hire/reject decision for every atom, ignoring mixing at an atom that
/// sits exactly at either threshold.
pub fn decision_equivalent(a: ThresholdCut, b: ThresholdCut) -> bool {
    let (a_lo, a_hi) = (a.below, a.first_hired());
    let (b_lo, b_hi) = (b.below, b.first_hired());
    // Atoms strictly rejected by one must not be strictly hired by the other.
    a_lo.max(b_lo) <= a_hi.min(b_hi)
}

/// One point of the pool-value profile: the value at a non-equilibrium
/// threshold, ranged over the mixing parameter when an atom sits at `v`.
#[derive(Debug, Clone, Copy)]
pub struct ProfilePoint {
    pub v: f64,
    pub pool_lo: f64,
    pub pool_hi: f64,
}

/// Evaluate the pool value over a sorted threshold grid: the profile is
/// piecewise constant with jumps only at atoms and is V-shaped around the
/// equilibrium threshold (weakly decreasing below it, weakly increasing
/// above).
pub fn pool_value_profile(prim: &MarketPrimitives, grid: &[f64]) -> Result<Vec<ProfilePoint>> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("profile grid must be strictly increasing".into()));
    }
    let p0 = prim.referrals.p0();
    grid.iter()
        .map(|&v| {
            let a = pool_value(&prim.values, p0, v, 0.0)?;
            let b = pool_value(&prim.values, p0, v, 1.0)?;
            Ok(ProfilePoint {
                v,
                pool_lo: a.min(b),
                pool_hi: a.max(b),
            })
        })
        .collect()
}

/// Exhaustive fixed-point scan over the `2k + 1` decision-distinct threshold
/// classes; returns the validating thresholds (deduped). Uniqueness means the
/// result has length one.
pub fn uniqueness_scan(prim: &MarketPrimitives, r: f64) -> Vec<f64> {
    let tol = Tolerances::DEFAULT;
    let values = &prim.values;
    let p0 = prim.referrals.p0();
    let k = values.len();
    let mut found: Vec<f64> = Vec::new();

    let mut check = |cut: ThresholdCut, lo: f64, hi: f64, exact_at: Option<f64>| {
        let pi = pool_mean(values, p0, cut, r);
        let t = pi.max(prim.w_min);
        let ok = match exact_at {
            Some(v) => (t - v).abs() <= tol.indifference,
            None => t > lo + tol.indifference && t < hi - tol.indifference,
        };
        if ok {
            found.push(t);
        }
    };

    for below in 0..=k {
        let cut = ThresholdCut { below, at: false };
        let lo = if below == 0 {
            f64::NEG_INFINITY
        } else {
            values.value(below - 1)
        };
        let hi = if below == k {
            f64::INFINITY
        } else {
            values.value(below)
        };
        check(cut, lo, hi, None);
    }
    for j in 0..k {
        let cut = ThresholdCut { below: j, at: true };
        check(cut, 0.0, 0.0, Some(values.value(j)));
    }

    found.sort_by(|a, b| a.partial_cmp(b).unwrap());
    found.dedup_by(|a, b| (*a - *b).abs() <= tol.indifference);
    found
}
