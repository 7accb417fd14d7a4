//! Affirmative-action interventions, their dynamic trajectory comparisons,
//! the optimal-direction rule, and macroeconomic firm-removal shocks.

use crate::dist::ValueDistribution;
use crate::dynamics::{
    self, wage_fosd, GroupOutcome, GroupParams, GroupSide, GroupState, StepOptions,
};
use crate::dist::FosdVerdict;
use crate::error::Error;
use crate::metrics::ProductionReport;
use crate::Result;

/// Which margin the intervention moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AaKind {
    /// Force hiring of below-threshold green referrals, highest value first.
    PromoteGreen,
    /// Divert firms holding above-threshold blue referrals to the pool.
    DemoteBlue,
}

/// A one-time intervention applied at `period`, changing a mass `size` of
/// hiring decisions.
#[derive(Debug, Clone, Copy)]
pub struct AaPolicy {
    pub kind: AaKind,
    pub size: f64,
    pub period: usize,
}

/// Mass of firms removed from hiring.
#[derive(Debug, Clone, Copy)]
pub struct MacroShock {
    pub kappa: f64,
}

impl MacroShock {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&kappa) {
            return Err(Error::Domain(format!("kappa = {kappa} outside [0, 1)")));
        }
        Ok(Self { kappa })
    }
}

/// Run one period with the intervention distorting hiring. The equilibrium
/// threshold stays at its no-policy fixed point (firms are surprised by the
/// one-shot policy); pool composition, matching probability, wages, and all
/// downstream masses are re-derived exactly.
pub fn apply_aa(
    state: &GroupState,
    params: &GroupParams,
    values: &ValueDistribution,
    w_min: f64,
    r: f64,
    policy: &AaPolicy,
) -> Result<GroupOutcome> {
    if policy.size < 0.0 {
        return Err(Error::Domain("policy size must be nonnegative".into()));
    }
    let (_, base) = dynamics::step(state, params, values, w_min, r)?;
    if policy.size == 0.0 {
        return Ok(base);
    }
    let eq = &base.equilibrium;
    let n = params.n();
    let h = eq.mass_hired_referral;
    let delta = policy.size;

    // Mutable copies of the per-group accounts.
    let mut blue = base.blue.clone();
    let mut green = base.green.clone();
    let mut blue_ref_value = referral_value_of(&base.blue);
    let mut green_ref_value = referral_value_of(&base.green);
    let mut blue_pool_sum = blue.pool_mass * blue.pool_mean;
    let mut green_pool_sum = green.pool_mass * green.pool_mean;

    let pool_firms_delta = match policy.kind {
        AaKind::DemoteBlue => {
            let cap = base.blue.hire_referral;
            if delta > cap + 1e-12 {
                return Err(Error::Policy {
                    requested: delta,
                    cap,
                    cap_name: "blue referral hires".into(),
                });
            }
            // Firms are chosen uniformly at random over above-threshold blue
            // referrals, so the demoted mass carries the mean hired value.
            let mean_hired = blue_ref_value / base.blue.hire_referral;
            blue.hire_referral -= delta;
            blue_ref_value -= delta * mean_hired;
            blue.pool_mass += delta;
            blue_pool_sum += delta * mean_hired;
            // Premium wages shrink proportionally: selection cannot condition
            // on the wage a hire would have earned.
            let keep = blue.hire_referral / base.blue.hire_referral;
            for atom in blue.wage_atoms.iter_mut().skip(1) {
                atom.1 *= keep;
            }
            delta
        }
        AaKind::PromoteGreen => {
            // Below-threshold green referral holders, per rejected atom.
            let rejected = rejected_green_masses(&base.green, values, eq.cut, eq.mixing_r, params);
            let cap: f64 = rejected.iter().map(|&(_, m)| m).sum();
            if delta > cap + 1e-12 {
                return Err(Error::Policy {
                    requested: delta,
                    cap,
                    cap_name: "below-threshold green referral holders".into(),
                });
            }
            // Highest value first.
            let mut remaining = delta;
            let mut promoted_value = 0.0;
            for &(v, m) in rejected.iter().rev() {
                if remaining <= 0.0 {
                    break;
                }
                let take = remaining.min(m);
                promoted_value += take * v;
                remaining -= take;
            }
            green.hire_referral += delta;
            green_ref_value += promoted_value;
            green.pool_mass -= delta;
            green_pool_sum -= promoted_value;
            // Forced hires face no competition: they earn the floor, which is
            // already where new floor mass accumulates.
            -delta
        }
    };

    // Pool matching with the adjusted firm and worker counts.
    let pool_firms = (eq.firm_mass - h + pool_firms_delta).max(0.0);
    let pool_workers = n - h + pool_firms_delta;
    let hires = eq.pool_hiring.hires();
    let q = if hires && pool_workers > 0.0 {
        pool_firms / pool_workers
    } else {
        0.0
    };

    for side in [&mut blue, &mut green] {
        side.hire_pool = q * side.pool_mass;
        side.next_employment = side.hire_referral + side.hire_pool;
        if side.next_employment < -1e-12 || side.pool_mass < -1e-12 {
            return Err(Error::Invariant("negative mass after policy".into()));
        }
    }
    blue.pool_mean = blue_pool_sum / blue.pool_mass;
    green.pool_mean = green_pool_sum / green.pool_mass;
    blue.employed_value = blue_ref_value + blue.hire_pool * blue.pool_mean;
    green.employed_value = green_ref_value + green.hire_pool * green.pool_mean;
    for side in [&mut blue, &mut green] {
        let premium: f64 = side.wage_atoms.iter().skip(1).map(|&(_, m)| m).sum();
        side.wage_atoms[0].1 = (side.next_employment - premium).max(0.0);
    }

    let employment = blue.next_employment + green.next_employment;
    let employed_value = blue.employed_value + green.employed_value;
    let combined_pool_mass = blue.pool_mass + green.pool_mass;
    let combined_pool_mean = (blue_pool_sum + green_pool_sum) / combined_pool_mass;
    let identity = if hires {
        Some(n * values.mean() - (n - employment) * combined_pool_mean
            + (n - employment) * w_min)
    } else {
        None
    };
    let production = ProductionReport {
        total_production: employed_value + (n - employment) * w_min,
        per_worker_productivity: if employment > 0.0 {
            employed_value / employment
        } else {
            0.0
        },
        employment_mass: employment,
        identity_production: identity,
    };

    let mut eq = base.equilibrium.clone();
    eq.mass_hired_referral = blue.hire_referral + green.hire_referral;
    eq.mass_hired_pool = blue.hire_pool + green.hire_pool;
    eq.employment_mass = employment;

    Ok(GroupOutcome {
        aggregate_p0: base.aggregate_p0,
        blue,
        green,
        equilibrium: eq,
        production,
    })
}

fn referral_value_of(side: &GroupSide) -> f64 {
    side.employed_value - side.hire_pool * side.pool_mean
}

/// Employed-blue composition of a period outcome: referral hires at their
/// atom values plus pool hires at the blue pool's atom shares.
fn employed_blue_atoms(
    outcome: &GroupOutcome,
    values: &ValueDistribution,
    params: &GroupParams,
) -> Vec<(f64, f64)> {
    let eq = &outcome.equilibrium;
    let side = &outcome.blue;
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    let first = eq.cut.first_hired();
    for (j, &(v, f)) in values.atoms().iter().enumerate() {
        let mut mass = 0.0;
        if j >= first {
            mass += params.n_b * (1.0 - side.p0) * f;
        } else if eq.cut.at && j == eq.cut.below {
            mass += params.n_b * (1.0 - side.p0) * f * eq.mixing_r;
        }
        atoms.push((v, mass));
    }
    // Pool hires carry the blue pool composition.
    if side.hire_pool > 0.0 && side.pool_mass > 0.0 {
        let q = side.hire_pool / side.pool_mass;
        let shares = crate::equilibrium::pool_shares(values, side.p0, eq.cut, eq.mixing_r);
        for (slot, &s) in atoms.iter_mut().zip(&shares) {
            slot.1 += q * s * params.n_b;
        }
    }
    atoms
}

/// Sum of values of the top-`take` mass, highest value first.
fn top_value_mass(atoms: &[(f64, f64)], take: f64, cap_name: &str) -> Result<f64> {
    let total: f64 = atoms.iter().map(|&(_, m)| m).sum();
    if take > total + 1e-12 {
        return Err(Error::Policy {
            requested: take,
            cap: total,
            cap_name: cap_name.into(),
        });
    }
    let mut remaining = take;
    let mut value = 0.0;
    for &(v, m) in atoms.iter().rev() {
        if remaining <= 0.0 {
            break;
        }
        let grab = remaining.min(m);
        value += grab * v;
        remaining -= grab;
    }
    Ok(value)
}

/// Rejected green referral holders by atom, ascending in value.
fn rejected_green_masses(
    side: &GroupSide,
    values: &ValueDistribution,
    cut: crate::equilibrium::ThresholdCut,
    r: f64,
    _params: &GroupParams,
) -> Vec<(f64, f64)> {
    let referred = side.pool_mass_referred();
    let mut out = Vec::new();
    let rejected_prob: f64 = values.partial_prob(cut.below)
        + if cut.at {
            values.prob(cut.below) * (1.0 - r)
        } else {
            0.0
        };
    if rejected_prob <= 0.0 {
        return out;
    }
    for (j, &(v, f)) in values.atoms().iter().enumerate() {
        let share = if j < cut.below {
            f
        } else if cut.at && j == cut.below {
            f * (1.0 - r)
        } else {
            0.0
        };
        if share > 0.0 {
            out.push((v, referred * share / rejected_prob));
        }
    }
    out
}

impl GroupSide {
    /// Mass of this group's pool members who held a referral and were
    /// rejected (as opposed to holding no referral at all).
    pub fn pool_mass_referred(&self) -> f64 {
        // pool = n_gamma P(0) + rejected; n_gamma P(0) = pool_mass - rejected.
        // hire_referral = n_gamma (1 - P(0)) X. Recover n_gamma from the
        // identity pool_mass + hire_referral = n_gamma.
        let n_gamma = self.pool_mass + self.hire_referral;
        self.pool_mass - n_gamma * self.p0
    }
}

/// The optimal-direction rule: prefer promoting green referral hires iff
/// `(1 - f_g) / (v_tilde - v_l) > f_g / (v_h - v_tilde)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AaDirection {
    PromoteGreen,
    DemoteBlue,
    Indifferent,
}

#[derive(Debug, Clone, Copy)]
pub struct DirectionReport {
    pub direction: AaDirection,
    /// Green-employment gain per unit production lost, promoting.
    pub promote_ratio: f64,
    /// Green-employment gain per unit production lost, demoting.
    pub demote_ratio: f64,
}

pub fn optimal_aa_direction(
    f_g: f64,
    v_tilde: f64,
    v_l: f64,
    v_h: f64,
) -> Result<DirectionReport> {
    if !(0.0..=1.0).contains(&f_g) {
        return Err(Error::Domain(format!("f_g = {f_g} outside [0, 1]")));
    }
    if !(v_l < v_tilde && v_tilde < v_h) {
        return Err(Error::Domain(format!(
            "need v_l < v_tilde < v_h, got {v_l}, {v_tilde}, {v_h}"
        )));
    }
    let promote_ratio = (1.0 - f_g) / (v_tilde - v_l);
    let demote_ratio = f_g / (v_h - v_tilde);
    let direction = if (promote_ratio - demote_ratio).abs() <= 1e-12 * promote_ratio.max(demote_ratio)
    {
        AaDirection::Indifferent
    } else if promote_ratio > demote_ratio {
        AaDirection::PromoteGreen
    } else {
        AaDirection::DemoteBlue
    };
    Ok(DirectionReport {
        direction,
        promote_ratio,
        demote_ratio,
    })
}

/// Production lost per unit of net green-employment gain, by direction, in
/// the two-value replacement accounting.
pub fn aa_cost_per_green(kind: AaKind, f_g: f64, v_tilde: f64, v_l: f64, v_h: f64) -> f64 {
    match kind {
        AaKind::DemoteBlue => (v_h - v_tilde) / f_g,
        AaKind::PromoteGreen => (v_tilde - v_l) / (1.0 - f_g),
    }
}

/// One compared period of the baseline-vs-policy experiment.
#[derive(Debug, Clone, Copy)]
pub struct ComparisonRow {
    pub period: usize,
    pub e_g_base: f64,
    pub e_g_policy: f64,
    pub wage_gap_base: f64,
    pub wage_gap_policy: f64,
    pub production_base: f64,
    pub production_policy: f64,
}

/// Trajectory comparison after a one-time shift of green employment.
#[derive(Debug, Clone)]
pub struct AaComparison {
    /// Period 0: the intervention period. Productions are the workforce
    /// valuation at the starting states, the policy side charged with the
    /// replacement cost of the shift.
    pub period0: ComparisonRow,
    pub rows: Vec<ComparisonRow>,
    pub shift: f64,
    pub kind: AaKind,
}

/// Compare the baseline trajectory against one whose period-0 green
/// employment is raised by `delta_e` (blues reduced one-for-one), the shift
/// implemented by the chosen intervention and charged to period-0 production
/// at its replacement cost.
#[allow(clippy::too_many_arguments)]
pub fn compare_aa_trajectories(
    state0: &GroupState,
    params: &GroupParams,
    values: &ValueDistribution,
    w_min: f64,
    r: f64,
    kind: AaKind,
    delta_e: f64,
    periods: usize,
) -> Result<AaComparison> {
    if delta_e < 0.0 || delta_e > state0.e_b {
        return Err(Error::Domain(format!(
            "shift {delta_e} outside [0, e_b = {}]",
            state0.e_b
        )));
    }
    let shifted = GroupState {
        e_b: state0.e_b - delta_e,
        e_g: state0.e_g + delta_e,
    };
    shifted.validate(params)?;
    let base = dynamics::simulate(state0, params, values, w_min, r, periods)?;
    let policy = dynamics::simulate(&shifted, params, values, w_min, r, periods)?;

    // Intervention cost: the shift swaps a mass delta_e of employed blues
    // for greens within the period-0 workforce, valued at the equilibrium
    // composition of the round at the starting state. Demoting targets the
    // highest-value blue hires (their replacements are green pool draws);
    // promoting forces the highest-value rejected greens into jobs that
    // average blues would have filled.
    let round0 = &base[0];
    let cost = match kind {
        AaKind::DemoteBlue => {
            let removed = top_value_mass(
                &employed_blue_atoms(round0, values, params),
                delta_e,
                "employed blue workers",
            )?;
            removed - delta_e * round0.green.pool_mean
        }
        AaKind::PromoteGreen => {
            let rejected = rejected_green_masses(
                &round0.green,
                values,
                round0.equilibrium.cut,
                round0.equilibrium.mixing_r,
                params,
            );
            let promoted = top_value_mass(
                &rejected,
                delta_e,
                "below-threshold green referral holders",
            )?;
            let blue_mean = round0.blue.employed_value / round0.blue.next_employment;
            delta_e * blue_mean - promoted
        }
    };
    let production0 = round0.production.total_production;
    let period0 = ComparisonRow {
        period: 0,
        e_g_base: state0.e_g,
        e_g_policy: shifted.e_g,
        wage_gap_base: wage_gap(&base[0], params, w_min),
        wage_gap_policy: wage_gap(&policy[0], params, w_min),
        production_base: production0,
        production_policy: production0 - cost,
    };
    let rows = base
        .iter()
        .zip(policy.iter())
        .enumerate()
        .map(|(i, (b, p))| ComparisonRow {
            period: i + 1,
            e_g_base: b.green.next_employment,
            e_g_policy: p.green.next_employment,
            wage_gap_base: wage_gap(b, params, w_min),
            wage_gap_policy: wage_gap(p, params, w_min),
            production_base: b.production.total_production,
            production_policy: p.production.total_production,
        })
        .collect();
    Ok(AaComparison {
        period0,
        rows,
        shift: delta_e,
        kind,
    })
}

/// Blue minus green per-capita mean wage.
pub fn wage_gap(outcome: &GroupOutcome, params: &GroupParams, w_min: f64) -> f64 {
    outcome.blue.per_capita_wage(params.n_b, w_min)
        - outcome.green.per_capita_wage(params.n_g, w_min)
}

/// Result of probing the one-time-policy multiplier on a grid of shift sizes.
#[derive(Debug, Clone)]
pub struct MultiplierReport {
    pub per_epsilon: Vec<(f64, bool)>,
    /// Largest grid shift for which every future period improved.
    pub largest_passing: Option<f64>,
}

/// Strict dominance of `policy` over `base` as far as the floating-point
/// grid can represent it: strictly greater every period until the geometric
/// contraction of the period map collapses the gap to exactly zero, never
/// below, and strict in the first period.
pub fn dominates_until_merge(policy: &[f64], base: &[f64]) -> bool {
    let mut merged = false;
    for (i, (&p, &b)) in policy.iter().zip(base).enumerate() {
        if p < b {
            return false;
        }
        if p == b {
            merged = true;
            if i == 0 {
                return false;
            }
        } else if merged {
            // Re-divergence after an exact merge would be a bug.
            return false;
        }
    }
    true
}

/// For each `epsilon`, does shifting period-0 green employment up by
/// `epsilon` raise green employment and production in every period of the
/// horizon (strictly, up to floating-point merge of the trajectories)?
pub fn aa_multiplier_check(
    state0: &GroupState,
    params: &GroupParams,
    values: &ValueDistribution,
    w_min: f64,
    r: f64,
    epsilon_grid: &[f64],
    horizon: usize,
) -> Result<MultiplierReport> {
    if horizon < 1 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    let base = dynamics::simulate(state0, params, values, w_min, r, horizon)?;
    let base_eg: Vec<f64> = base.iter().map(|o| o.green.next_employment).collect();
    let base_prod: Vec<f64> = base
        .iter()
        .map(|o| o.production.total_production)
        .collect();
    let mut per_epsilon = Vec::with_capacity(epsilon_grid.len());
    let mut largest = None;
    for &eps in epsilon_grid {
        if eps == 0.0 {
            // Identical trajectories by definition.
            per_epsilon.push((eps, true));
            largest = Some(largest.unwrap_or(0.0f64).max(0.0));
            continue;
        }
        let shifted = GroupState {
            e_b: state0.e_b - eps,
            e_g: state0.e_g + eps,
        };
        if shifted.e_b < 0.0 || shifted.validate(params).is_err() {
            per_epsilon.push((eps, false));
            continue;
        }
        let pert = dynamics::simulate(&shifted, params, values, w_min, r, horizon)?;
        let pert_eg: Vec<f64> = pert.iter().map(|o| o.green.next_employment).collect();
        let pert_prod: Vec<f64> = pert
            .iter()
            .map(|o| o.production.total_production)
            .collect();
        let ok = dominates_until_merge(&pert_eg, &base_eg)
            && dominates_until_merge(&pert_prod, &base_prod);
        per_epsilon.push((eps, ok));
        if ok {
            largest = Some(largest.unwrap_or(0.0f64).max(eps));
        }
    }
    Ok(MultiplierReport {
        per_epsilon,
        largest_passing: largest,
    })
}

/// Baseline vs. shocked period under removal of a mass `kappa` of firms.
#[derive(Debug, Clone)]
pub struct MacroShockReport {
    pub baseline: GroupOutcome,
    pub shocked: GroupOutcome,
    pub production_strictly_down: bool,
    pub per_worker_strictly_up: bool,
    pub wage_fosd_baseline_dominates: bool,
    pub wage_fosd_strict: bool,
    /// Fraction of referral-screened workers each group loses.
    pub screened_loss_b: f64,
    pub screened_loss_g: f64,
}

/// Remove a mass `kappa` of firms: every referral is voided independently
/// with probability `kappa` (binomial thinning) and the hiring firm mass
/// becomes `1 - kappa`; pool matching is recomputed with the reduced mass.
pub fn macro_shock(
    state: &GroupState,
    params: &GroupParams,
    values: &ValueDistribution,
    w_min: f64,
    r: f64,
    shock: &MacroShock,
) -> Result<MacroShockReport> {
    let (_, baseline) = dynamics::step(state, params, values, w_min, r)?;
    if !baseline.equilibrium.pool_hiring.hires() {
        return Err(Error::Contract(
            "macro shock comparison requires active pool hiring at baseline".into(),
        ));
    }
    let opts = StepOptions {
        thin_kappa: shock.kappa,
        firm_mass: 1.0 - shock.kappa,
        indifference_hires: true,
    };
    let (_, shocked) = dynamics::step_with(state, params, values, w_min, r, &opts)?;

    let production_strictly_down = shocked.production.total_production
        < baseline.production.total_production - 1e-12
        || shock.kappa == 0.0;
    let per_worker_strictly_up = shocked.production.per_worker_productivity
        > baseline.production.per_worker_productivity + 1e-12
        || shock.kappa == 0.0;

    let combined = |o: &GroupOutcome| -> Vec<(f64, f64)> {
        let mut atoms = o.blue.wage_distribution_per_capita(params.n_b, w_min);
        atoms.extend(o.green.wage_distribution_per_capita(params.n_g, w_min));
        atoms
    };
    let (verdict, strict) = wage_fosd(&combined(&baseline), &combined(&shocked));
    let dominates = matches!(verdict, FosdVerdict::ADominates | FosdVerdict::Equal);

    let loss = |b: &GroupSide, s: &GroupSide| -> f64 {
        let screened = 1.0 - b.p0;
        if screened <= 0.0 {
            0.0
        } else {
            (s.p0 - b.p0) / screened
        }
    };
    Ok(MacroShockReport {
        screened_loss_b: loss(&baseline.blue, &shocked.blue),
        screened_loss_g: loss(&baseline.green, &shocked.green),
        baseline,
        shocked,
        production_strictly_down,
        per_worker_strictly_up,
        wage_fosd_baseline_dominates: dominates,
        wage_fosd_strict: strict,
    })
}
