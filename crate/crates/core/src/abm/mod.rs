//! Finite-agent Monte Carlo of the hiring market: validates the continuum
//! model by sampling, and runs the forward-looking experiment where firms
//! pay search costs to redraw from the pool hunting for green workers.
//!
//! Determinism contract: with a fixed seed the output is byte-identical
//! across runs and thread counts. All randomness is counter-based (keyed by
//! seed, stream, period, and agent id); phases that mutate shared state run
//! sequentially in a fixed order.

pub mod rng;

use rayon::prelude::*;

use crate::dist::{mix, ValueDistribution};
use crate::dynamics::{self, GroupParams, GroupState};
use crate::equilibrium::{self, MarketPrimitives};
use crate::error::Error;
use crate::Result;
use rng::Stream;

/// Pool behavior of unmatched firms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbmMode {
    /// Keep whatever the pool deals.
    Myopic,
    /// Redraw while the expected green premium exceeds the firm's cost.
    Redraw,
}

/// Market scenario the agents live in.
#[derive(Debug, Clone)]
pub struct AbmScenario {
    pub values: ValueDistribution,
    pub params: GroupParams,
    pub state0: GroupState,
    pub w_min: f64,
    pub r: f64,
}

#[derive(Debug, Clone)]
pub struct AbmConfig {
    pub firm_count: usize,
    pub scenario: AbmScenario,
    pub mode: AbmMode,
    pub periods: usize,
    pub seed: u64,
}

/// Sampled analog of one period outcome, in firm-mass units.
#[derive(Debug, Clone, Copy)]
pub struct AbmPeriod {
    pub e_b: f64,
    pub e_g: f64,
    pub threshold: f64,
    pub pool_value: f64,
    pub hire_ref_b: f64,
    pub hire_ref_g: f64,
    pub hire_pool_b: f64,
    pub hire_pool_g: f64,
    /// Per-capita mean wages (unemployed at the floor).
    pub mean_wage_b: f64,
    pub mean_wage_g: f64,
    pub production: f64,
    /// Binomial standard error of the green employment mass.
    pub stderr_e_g: f64,
    pub redraw_draws: u64,
    pub redraw_cost: f64,
}

#[derive(Debug, Clone)]
pub struct AbmTrajectory {
    pub periods: Vec<AbmPeriod>,
    pub seed: u64,
    pub firm_count: usize,
    /// Periods in which the pool ran out while firms were still searching.
    pub exhaustion_events: u64,
}

const GROUP_BLUE: u8 = 0;
const GROUP_GREEN: u8 = 1;

pub fn simulate_abm(config: &AbmConfig) -> Result<AbmTrajectory> {
    let n_f = config.firm_count;
    if n_f < 1 {
        return Err(Error::Domain("need at least one firm".into()));
    }
    if config.periods < 1 {
        return Err(Error::Domain("need at least one period".into()));
    }
    let sc = &config.scenario;
    sc.state0.validate(&sc.params)?;
    let seed = config.seed;

    let n_b = (sc.params.n_b * n_f as f64).round() as usize;
    let n_g = (sc.params.n_g * n_f as f64).round() as usize;
    let n_w = n_b + n_g;
    let group_of = |w: usize| -> u8 {
        if w < n_b {
            GROUP_BLUE
        } else {
            GROUP_GREEN
        }
    };

    // Initial employees, matched to shuffled firms so redraw costs carry no
    // index bias in period 0.
    let e_b0 = (sc.state0.e_b * n_f as f64).round() as usize;
    let e_g0 = (sc.state0.e_g * n_f as f64).round() as usize;
    if e_b0 + e_g0 > n_f {
        return Err(Error::Domain("initial employment exceeds firm count".into()));
    }
    let mut firm_ids: Vec<u32> = (0..n_f as u32).collect();
    rng::shuffle(&mut firm_ids, seed, Stream::InitialMatch, 0);
    // (firm, group) of each current employee.
    let mut employed: Vec<(u32, u8)> = firm_ids[..e_b0]
        .iter()
        .map(|&f| (f, GROUP_BLUE))
        .chain(firm_ids[e_b0..e_b0 + e_g0].iter().map(|&f| (f, GROUP_GREEN)))
        .collect();
    drop(firm_ids);

    // Cumulative atom probabilities for value sampling.
    let cum: Vec<f64> = {
        let mut acc = 0.0;
        sc.values
            .atoms()
            .iter()
            .map(|&(_, p)| {
                acc += p;
                acc
            })
            .collect()
    };
    let atom_values: Vec<f64> = sc.values.atoms().iter().map(|&(v, _)| v).collect();

    let mut periods = Vec::with_capacity(config.periods);
    let mut exhaustion_events = 0u64;

    let mut values_idx: Vec<u8> = vec![0; n_w];
    let mut ref_count: Vec<u32> = vec![0; n_w];
    let mut chosen_firm: Vec<u32> = vec![0; n_w];

    for t in 0..config.periods as u64 {
        let e_b_cnt = employed.iter().filter(|&&(_, g)| g == GROUP_BLUE).count();
        let e_g_cnt = employed.len() - e_b_cnt;
        let state = GroupState {
            e_b: e_b_cnt as f64 / n_f as f64,
            e_g: e_g_cnt as f64 / n_f as f64,
        };

        // Analytic equilibrium at the sampled employment shares.
        let (m_b, m_g) = dynamics::referral_means(&state, &sc.params);
        let pmf_b = sc.params.family.pmf_from_mean(m_b)?;
        let pmf_g = sc.params.family.pmf_from_mean(m_g)?;
        let aggregate = mix(&pmf_b, &pmf_g, sc.params.n_b, sc.params.n_g)?;
        let prim = MarketPrimitives::new(
            sc.values.clone(),
            aggregate,
            sc.params.n(),
            sc.w_min,
        )?;
        let eq = equilibrium::solve_threshold(&prim, sc.r)?;
        let first_hired = eq.cut.first_hired();
        let at_atom = if eq.cut.at { Some(eq.cut.below) } else { None };
        let pool_hiring = eq.pool_hiring.hires();

        // Group pool means drive the redraw premium.
        let pool_mean_of = |p0: f64| -> f64 {
            let shares = equilibrium::pool_shares(&sc.values, p0, eq.cut, eq.mixing_r);
            let tot: f64 = shares.iter().sum();
            shares
                .iter()
                .zip(sc.values.atoms())
                .map(|(s, &(v, _))| s * v)
                .sum::<f64>()
                / tot
        };
        let green_premium = pool_mean_of(pmf_g.p0()) - pool_mean_of(pmf_b.p0());

        // Phase 1: sample the new generation's values (parallel, keyed).
        values_idx
            .par_chunks_mut(1 << 14)
            .enumerate()
            .for_each(|(chunk, slot)| {
                let base = chunk << 14;
                for (i, s) in slot.iter_mut().enumerate() {
                    let u = rng::uniform(seed, Stream::WorkerValue, t, (base + i) as u64, 0);
                    let mut idx = (cum.len() - 1) as u8;
                    for (j, &c) in cum.iter().enumerate() {
                        if u < c {
                            idx = j as u8;
                            break;
                        }
                    }
                    *s = idx;
                }
            });

        // Phase 2: referrals. Each employee refers one next-generation
        // worker: own group with probability h, uniform within the group.
        let pairs: Vec<(u32, u32)> = employed
            .par_iter()
            .map(|&(firm, group)| {
                let h = if group == GROUP_BLUE {
                    sc.params.h_b
                } else {
                    sc.params.h_g
                };
                let own = rng::bernoulli(seed, Stream::ReferralCoin, t, firm as u64, 0, h);
                let target_group = if own == (group == GROUP_BLUE) {
                    GROUP_BLUE
                } else {
                    GROUP_GREEN
                };
                let (off, size) = if target_group == GROUP_BLUE {
                    (0usize, n_b)
                } else {
                    (n_b, n_g)
                };
                // Tiny populations can round a group to zero members; the
                // referral then lands in the other group.
                let (off, size) = if size == 0 {
                    if off == 0 {
                        (n_b, n_g)
                    } else {
                        (0, n_b)
                    }
                } else {
                    (off, size)
                };
                let w =
                    off as u64 + rng::below(seed, Stream::ReferralTarget, t, firm as u64, 0, size as u64);
                (w as u32, firm)
            })
            .collect();

        // Phase 3: tally referral counts and pick each worker's accepting
        // firm by reservoir sampling (sequential: the reservoir depends on
        // arrival order, which is fixed by the employee list).
        ref_count.iter_mut().for_each(|c| *c = 0);
        for &(w, firm) in &pairs {
            let w = w as usize;
            ref_count[w] += 1;
            let cnt = ref_count[w];
            // Reservoir: the arriving firm wins with probability 1/cnt.
            if cnt == 1
                || rng::below(seed, Stream::OfferAccept, t, w as u64, cnt as u64, cnt as u64) == 0
            {
                chosen_firm[w] = firm;
            }
        }

        // Phase 4: referral hiring at the analytic threshold.
        let mut employed_next: Vec<(u32, u8)> = Vec::with_capacity(n_f);
        let mut firm_matched = vec![false; n_f];
        let mut worker_hired = vec![false; n_w];
        let mut hire_ref = [0usize; 2];
        let mut wage_bill = [0.0f64; 2];
        let mut hired_value_sum = 0.0f64;
        for w in 0..n_w {
            let k = ref_count[w];
            if k == 0 {
                continue;
            }
            let atom = values_idx[w] as usize;
            let hired = if atom >= first_hired {
                true
            } else if Some(atom) == at_atom {
                rng::bernoulli(seed, Stream::ThresholdMix, t, w as u64, 0, eq.mixing_r)
            } else {
                false
            };
            if !hired {
                continue;
            }
            let g = group_of(w);
            let firm = chosen_firm[w];
            employed_next.push((firm, g));
            firm_matched[firm as usize] = true;
            worker_hired[w] = true;
            hire_ref[g as usize] += 1;
            let v = atom_values[atom];
            hired_value_sum += v;
            wage_bill[g as usize] += if k >= 2 {
                v - eq.threshold + sc.w_min
            } else {
                sc.w_min
            };
        }

        // Phase 5: the pool. Unmatched firms draw without replacement from a
        // seeded shuffle of the unhired workers.
        let mut pool_workers: Vec<u32> = (0..n_w as u32)
            .filter(|&w| !worker_hired[w as usize])
            .collect();
        rng::shuffle(&mut pool_workers, seed, Stream::PoolShuffle, t);
        let pool_firms: Vec<u32> = (0..n_f as u32)
            .filter(|&f| !firm_matched[f as usize])
            .collect();

        let mut hire_pool = [0usize; 2];
        let mut redraw_draws = 0u64;
        let mut redraw_cost = 0.0f64;
        if pool_hiring {
            match config.mode {
                AbmMode::Myopic => {
                    let take = pool_firms.len().min(pool_workers.len());
                    if pool_firms.len() > pool_workers.len() {
                        exhaustion_events += 1;
                    }
                    for i in 0..take {
                        let w = pool_workers[i] as usize;
                        let g = group_of(w);
                        employed_next.push((pool_firms[i], g));
                        hire_pool[g as usize] += 1;
                        wage_bill[g as usize] += sc.w_min;
                        hired_value_sum += atom_values[values_idx[w] as usize];
                    }
                }
                AbmMode::Redraw => {
                    use std::collections::VecDeque;
                    let mut queue: VecDeque<u32> = pool_workers.iter().copied().collect();
                    let mut greens_left =
                        queue.iter().filter(|&&w| group_of(w as usize) == GROUP_GREEN).count();
                    let draw_cap = queue.len();
                    for &firm in &pool_firms {
                        let cost = firm as f64 / n_f as f64;
                        let Some(mut w) = queue.pop_front() else {
                            exhaustion_events += 1;
                            continue;
                        };
                        let mut is_green = group_of(w as usize) == GROUP_GREEN;
                        if is_green {
                            greens_left -= 1;
                        }
                        let mut extra = 0usize;
                        while !is_green
                            && green_premium > cost
                            && greens_left > 0
                            && extra < draw_cap
                        {
                            queue.push_back(w);
                            redraw_draws += 1;
                            redraw_cost += cost;
                            extra += 1;
                            w = queue.pop_front().expect("greens_left > 0");
                            is_green = group_of(w as usize) == GROUP_GREEN;
                            if is_green {
                                greens_left -= 1;
                            }
                        }
                        let g = group_of(w as usize);
                        employed_next.push((firm, g));
                        hire_pool[g as usize] += 1;
                        wage_bill[g as usize] += sc.w_min;
                        hired_value_sum += atom_values[values_idx[w as usize] as usize];
                    }
                }
            }
        }

        // Phase 6: per-period statistics.
        let next_b = hire_ref[0] + hire_pool[0];
        let next_g = hire_ref[1] + hire_pool[1];
        let scale = 1.0 / n_f as f64;
        let unemployed = n_w - next_b - next_g;
        let production =
            (hired_value_sum + unemployed as f64 * sc.w_min) * scale;
        let mean_wage = |g: usize, pop: usize, next: usize| -> f64 {
            (wage_bill[g] + (pop - next) as f64 * sc.w_min) / pop as f64
        };

        // Binomial standard error of green employment at the analytic state:
        // referral channel plus hypergeometric pool channel.
        let x = eq.referred_hire_prob;
        let q_ref = (1.0 - pmf_g.p0()) * x;
        let var_ref = n_g as f64 * q_ref * (1.0 - q_ref);
        let pool_green_mass = sc.params.n_g * (1.0 - (1.0 - pmf_g.p0()) * x);
        let pool_total_mass = sc.params.n() - eq.mass_hired_referral;
        let f_g = pool_green_mass / pool_total_mass;
        let draws = (eq.mass_hired_pool * n_f as f64).max(0.0);
        let pool_n = pool_total_mass * n_f as f64;
        let var_pool = if pool_n > 1.0 {
            draws * f_g * (1.0 - f_g) * (pool_n - draws).max(0.0) / (pool_n - 1.0)
        } else {
            0.0
        };
        let stderr_e_g = (var_ref + var_pool).sqrt() * scale;

        periods.push(AbmPeriod {
            e_b: next_b as f64 * scale,
            e_g: next_g as f64 * scale,
            threshold: eq.threshold,
            pool_value: eq.pool_value,
            hire_ref_b: hire_ref[0] as f64 * scale,
            hire_ref_g: hire_ref[1] as f64 * scale,
            hire_pool_b: hire_pool[0] as f64 * scale,
            hire_pool_g: hire_pool[1] as f64 * scale,
            mean_wage_b: mean_wage(0, n_b, next_b),
            mean_wage_g: mean_wage(1, n_g, next_g),
            production,
            stderr_e_g,
            redraw_draws,
            redraw_cost,
        });
        employed = employed_next;
    }

    Ok(AbmTrajectory {
        periods,
        seed,
        firm_count: n_f,
        exhaustion_events,
    })
}

/// Error-versus-size study: max absolute deviation of the sampled green
/// employment from the analytic trajectory, against firm count.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub firm_count: usize,
    pub mean_max_abs_err: f64,
    pub per_seed: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln err` against `ln N`.
    pub slope: f64,
}

pub fn convergence_study(
    config: &AbmConfig,
    firm_counts: &[usize],
    seeds: &[u64],
) -> Result<ConvergenceReport> {
    if config.mode != AbmMode::Myopic {
        return Err(Error::Domain("convergence study requires myopic mode".into()));
    }
    if firm_counts.len() < 2 || seeds.is_empty() {
        return Err(Error::Domain("need >= 2 sizes and >= 1 seed".into()));
    }
    let mut rows = Vec::with_capacity(firm_counts.len());
    for &n_f in firm_counts {
        let mut errs = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let mut cfg = config.clone();
            cfg.firm_count = n_f;
            cfg.seed = seed;
            // Analytic trajectory from the same rounded initial state.
            let e_b0 = (cfg.scenario.state0.e_b * n_f as f64).round() / n_f as f64;
            let e_g0 = (cfg.scenario.state0.e_g * n_f as f64).round() / n_f as f64;
            let start = GroupState { e_b: e_b0, e_g: e_g0 };
            let analytic = dynamics::simulate(
                &start,
                &cfg.scenario.params,
                &cfg.scenario.values,
                cfg.scenario.w_min,
                cfg.scenario.r,
                cfg.periods,
            )?;
            let sampled = simulate_abm(&cfg)?;
            let err = sampled
                .periods
                .iter()
                .zip(analytic.iter())
                .map(|(s, a)| (s.e_g - a.green.next_employment).abs())
                .fold(0.0f64, f64::max);
            errs.push(err);
        }
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        rows.push(ConvergenceRow {
            firm_count: n_f,
            mean_max_abs_err: mean,
            per_seed: errs,
        });
    }
    // ln-ln regression.
    let xs: Vec<f64> = rows.iter().map(|r| (r.firm_count as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_max_abs_err.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(ConvergenceReport {
        rows,
        slope: sxy / sxx,
    })
}
