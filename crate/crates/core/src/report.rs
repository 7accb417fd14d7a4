//! CSV serialization of results: comma-separated, LF line endings, UTF-8,
//! 17-significant-digit floats, one comment line carrying the tool version
//! and config hash, then a header row. Output is byte-stable for identical
//! inputs.

use crate::abm::AbmTrajectory;
use crate::dynamics::{GroupOutcome, GroupParams};
use crate::equilibrium::{Equilibrium, MarketPrimitives, PoolHiring};
use crate::firing::FiringEquilibrium;
use crate::metrics;
use crate::policy::AaComparison;

pub use crate::dist::ValueDistribution;

/// Provenance stamp carried by every CSV.
#[derive(Debug, Clone)]
pub struct CsvMeta {
    pub version: String,
    pub config_hash: u64,
}

impl CsvMeta {
    pub fn comment_line(&self) -> String {
        format!(
            "# version={} config_hash={:016x}\n",
            self.version, self.config_hash
        )
    }
}

/// FNV-1a over raw bytes; used to fingerprint config files.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn f(x: f64) -> String {
    format!("{:.16e}", x)
}

/// One row per period: employment, equilibrium quantities, hires by channel
/// and group, per-capita mean wages, and the appended metrics columns
/// (per-worker productivity, Gini, profits; profits empty outside its
/// two-value pool-active regime).
pub fn trajectory_csv(
    outcomes: &[GroupOutcome],
    params: &GroupParams,
    values: &ValueDistribution,
    w_min: f64,
    meta: &CsvMeta,
) -> String {
    let mut out = meta.comment_line();
    out.push_str(
        "period,e_b,e_g,threshold,pool_value,hire_ref_b,hire_ref_g,hire_pool_b,hire_pool_g,\
         mean_wage_b,mean_wage_g,production,per_worker_productivity,gini,profits\n",
    );
    for (i, o) in outcomes.iter().enumerate() {
        out.push_str(&trajectory_row(i + 1, o, params, values, w_min));
    }
    out
}

fn trajectory_row(
    period: usize,
    o: &GroupOutcome,
    params: &GroupParams,
    values: &ValueDistribution,
    w_min: f64,
) -> String {
    let mut atoms = o.blue.wage_distribution_per_capita(params.n_b, w_min);
    atoms.extend(o.green.wage_distribution_per_capita(params.n_g, w_min));
    let gini = metrics::gini_general(&atoms).unwrap_or(0.0);
    let profits = profits_field(o, params, values, w_min);
    format!(
        "{period},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        f(o.blue.next_employment),
        f(o.green.next_employment),
        f(o.equilibrium.threshold),
        f(o.equilibrium.pool_value),
        f(o.blue.hire_referral),
        f(o.green.hire_referral),
        f(o.blue.hire_pool),
        f(o.green.hire_pool),
        f(o.blue.per_capita_wage(params.n_b, w_min)),
        f(o.green.per_capita_wage(params.n_g, w_min)),
        f(o.production.total_production),
        f(o.production.per_worker_productivity),
        f(gini),
        profits,
    )
}

fn profits_field(
    o: &GroupOutcome,
    params: &GroupParams,
    values: &ValueDistribution,
    w_min: f64,
) -> String {
    if values.len() != 2 || !matches!(o.equilibrium.pool_hiring, PoolHiring::Hire) {
        return String::new();
    }
    let n = params.n();
    let p1 = (params.n_b * o.blue.p1 + params.n_g * o.green.p1) / n;
    let f_h = values.prob(1);
    let v_h = values.value(1);
    match metrics::profits(p1, f_h, v_h, o.equilibrium.threshold, w_min, n) {
        Ok(pi) => f(pi),
        Err(_) => String::new(),
    }
}

/// Per-capita wage distribution of a solved one-period equilibrium: referral
/// premium wages for multi-referral hires above the threshold, the floor for
/// everyone else (unemployed at the outside option).
pub fn equilibrium_wage_atoms(prim: &MarketPrimitives, eq: &Equilibrium) -> Vec<(f64, f64)> {
    let p2 = prim.referrals.p2_plus();
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    let mut premium_mass = 0.0;
    for (j, &(v, fj)) in prim.values.atoms().iter().enumerate() {
        if j >= eq.cut.first_hired() {
            let mass = prim.n * p2 * fj;
            atoms.push((v - eq.threshold + prim.w_min, mass));
            premium_mass += mass;
        }
    }
    atoms.push((prim.w_min, (prim.n - premium_mass).max(0.0)));
    atoms
}

/// Single-row summary of a solved equilibrium.
pub fn equilibrium_csv(prim: &MarketPrimitives, eq: &Equilibrium, meta: &CsvMeta) -> String {
    let production = metrics::total_production(prim, eq);
    let gini = metrics::gini_general(&equilibrium_wage_atoms(prim, eq)).unwrap_or(0.0);
    let hiring = match eq.pool_hiring {
        PoolHiring::Hire => "hire",
        PoolHiring::NoHire => "no-hire",
        PoolHiring::Indifferent => "indifferent",
    };
    let mut out = meta.comment_line();
    out.push_str(
        "threshold,mixing_r,pool_value,pool_hiring,mass_hired_referral,mass_hired_pool,\
         employment_mass,lemons_gap,production,per_worker_productivity,gini\n",
    );
    out.push_str(&format!(
        "{},{},{},{hiring},{},{},{},{},{},{},{}\n",
        f(eq.threshold),
        f(eq.mixing_r),
        f(eq.pool_value),
        f(eq.mass_hired_referral),
        f(eq.mass_hired_pool),
        f(eq.employment_mass),
        f(crate::equilibrium::lemons_gap(prim, eq)),
        f(production.total_production),
        f(production.per_worker_productivity),
        f(gini),
    ));
    out
}

/// Paired baseline/policy trajectory with deltas.
pub fn policy_csv(cmp: &AaComparison, meta: &CsvMeta) -> String {
    let mut out = meta.comment_line();
    out.push_str(
        "period,e_g_base,e_g_policy,wage_gap_base,wage_gap_policy,production_base,\
         production_policy,delta_e_g,delta_wage_gap,delta_production\n",
    );
    let mut write = |r: &crate::policy::ComparisonRow| {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.period,
            f(r.e_g_base),
            f(r.e_g_policy),
            f(r.wage_gap_base),
            f(r.wage_gap_policy),
            f(r.production_base),
            f(r.production_policy),
            f(r.e_g_policy - r.e_g_base),
            f(r.wage_gap_policy - r.wage_gap_base),
            f(r.production_policy - r.production_base),
        ));
    };
    write(&cmp.period0);
    for r in &cmp.rows {
        write(r);
    }
    out
}

/// One row per lambda of the firing comparative table.
pub fn firing_csv(
    rows: &[FiringEquilibrium],
    params: &GroupParams,
    meta: &CsvMeta,
) -> String {
    let mut out = meta.comment_line();
    out.push_str(
        "lambda,v1,v2,pool1_value,pool2_value,production_pre,production_post,\
         production_total,bias_pre,bias_post\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            f(r.lambda),
            f(r.v1),
            f(r.v2),
            f(r.pool1_value),
            f(r.pool2_value),
            f(r.production_pre),
            f(r.production_post),
            f(r.production_total),
            f(r.pre.bias(params)),
            f(r.post.bias(params)),
        ));
    }
    out
}

/// Trajectory schema plus sampling-error and redraw columns.
pub fn abm_csv(traj: &AbmTrajectory, meta: &CsvMeta) -> String {
    let mut out = meta.comment_line();
    out.push_str(
        "period,e_b,e_g,threshold,pool_value,hire_ref_b,hire_ref_g,hire_pool_b,hire_pool_g,\
         mean_wage_b,mean_wage_g,production,stderr_e_g,redraw_draws_total,redraw_cost_total,seed\n",
    );
    for (i, p) in traj.periods.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            i + 1,
            f(p.e_b),
            f(p.e_g),
            f(p.threshold),
            f(p.pool_value),
            f(p.hire_ref_b),
            f(p.hire_ref_g),
            f(p.hire_pool_b),
            f(p.hire_pool_g),
            f(p.mean_wage_b),
            f(p.mean_wage_g),
            f(p.production),
            f(p.stderr_e_g),
            p.redraw_draws,
            f(p.redraw_cost),
            traj.seed,
        ));
    }
    out
}
