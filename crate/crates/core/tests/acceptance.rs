//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//! Tolerances and thresholds are pinned here, in code.

use std::time::Instant;

use refmarket::abm::{self, AbmConfig, AbmMode, AbmScenario};
use refmarket::dist::{FosdVerdict, ReferralFamily, ReferralPmf, ValueDistribution};
use refmarket::dynamics::{
    self, group_comparison, steady_state, value_homophily_iterate, value_homophily_steady,
    wage_fosd, GroupOutcome, GroupParams, GroupState, SteadyOptions, StepOptions,
};
use refmarket::equilibrium::{self, MarketPrimitives};
use refmarket::firing;
use refmarket::metrics::{self, GiniDirection, GiniInputs, TwoValueEconomy};
use refmarket::policy::{self, AaKind};

/// Deterministic xorshift for randomized instances.
struct TestRng(u64);

impl TestRng {
    fn new(seed: u64) -> Self {
        Self(seed.max(1))
    }
    fn next_f64(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
    fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

fn random_values(rng: &mut TestRng) -> ValueDistribution {
    let count = 2 + (rng.next_f64() * 5.0) as usize; // 2..=6
    let mut vals: Vec<f64> = (0..count).map(|_| rng.in_range(0.0, 2.0)).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Enforce separation so atoms stay distinct.
    for i in 1..vals.len() {
        if vals[i] - vals[i - 1] < 0.05 {
            vals[i] = vals[i - 1] + 0.05;
        }
    }
    let mut probs: Vec<f64> = (0..count).map(|_| rng.in_range(0.05, 1.0)).collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    ValueDistribution::new(vals.into_iter().zip(probs).collect()).unwrap()
}

fn two_value_setup() -> (GroupParams, ValueDistribution, GroupState) {
    let params = GroupParams::new(1.0, 1.0, 1.0, 1.0, ReferralFamily::poisson()).unwrap();
    let values = ValueDistribution::new(vec![(0.0, 0.95), (1.0, 0.05)]).unwrap();
    (params, values, GroupState::new(0.7, 0.3))
}

#[test]
fn criterion_01_equilibrium_uniqueness_and_lemons() {
    let start = Instant::now();
    let mut rng = TestRng::new(0xA1);
    for trial in 0..1000 {
        let values = random_values(&mut rng);
        let p0 = rng.in_range(0.05, 0.95);
        let pmf = ReferralPmf::new(vec![p0, 1.0 - p0], 0.0).unwrap();
        let n = rng.in_range(1.0, (1.0 / (1.0 - p0)).min(4.0));
        let w_min = rng.in_range(0.0, 0.9 * values.max_value());
        let prim = MarketPrimitives::new(values.clone(), pmf, n, w_min).unwrap();

        let found = equilibrium::uniqueness_scan(&prim, 1.0);
        assert_eq!(
            found.len(),
            1,
            "trial {trial}: expected exactly one regime, got {found:?}"
        );

        let eq = equilibrium::solve_threshold(&prim, 1.0).unwrap();
        assert!(
            eq.pool_value < values.mean(),
            "trial {trial}: lemons effect must be strict"
        );
        let pv =
            equilibrium::pool_value(&values, prim.referrals.p0(), eq.threshold, eq.mixing_r)
                .unwrap();
        let residual = (eq.threshold - pv.max(w_min)).abs();
        assert!(residual < 1e-10, "trial {trial}: residual {residual}");
        assert!((found[0] - eq.threshold).abs() < 1e-10);
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "runtime {elapsed:?} exceeds 5 s"
    );
    println!("criterion 01 (equilibrium uniqueness & lemons, 1000 instances): PASS ({elapsed:?})");
}

#[test]
fn criterion_02_regime_switch_sweep() {
    let start = Instant::now();
    let third = 1.0 / 3.0;
    let params = GroupParams::new(0.7, 0.7, 1.0, 1.0, ReferralFamily::poisson()).unwrap();
    let values =
        ValueDistribution::new(vec![(0.0, third), (third, third), (1.0, 1.0 - 2.0 * third)])
            .unwrap();
    let mut prev: Option<(f64, usize, f64)> = None;
    let mut switch: Option<(f64, f64, f64)> = None;
    for i in 0..=100 {
        let e_g = 0.30 + i as f64 * 1e-3;
        let state = GroupState::new(1.0 - e_g, e_g);
        let (next, outcome) = dynamics::step(&state, &params, &values, 0.0, 1.0).unwrap();
        let first_hired = outcome.equilibrium.cut.first_hired();
        if let Some((prev_eg, prev_cut, prev_next)) = prev {
            if prev_cut == 2 && first_hired == 1 {
                switch = Some((prev_eg, prev_next, next.e_g));
            }
        }
        prev = Some((e_g, first_hired, next.e_g));
    }
    let (switch_at, below_next, above_next) =
        switch.expect("middle-value regime switch inside [0.30, 0.40]");
    assert!(
        (switch_at - 0.355).abs() <= 0.01,
        "switch at {switch_at}, expected 0.355 +/- 0.01"
    );
    assert!(
        above_next < below_next,
        "next-period green employment must be strictly lower just above the switch \
         ({above_next} vs {below_next})"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 2.0, "runtime {elapsed:?} exceeds 2 s");
    println!(
        "criterion 02 (regime switch at {switch_at:.3}, drop {below_next:.4} -> {above_next:.4}): PASS ({elapsed:?})"
    );
}

/// Independent spreadsheet-style oracle for the two-value Poisson economy.
fn two_value_oracle_step(e_b: f64, e_g: f64) -> (f64, f64, f64) {
    let p0_b = (-e_b).exp();
    let p0_g = (-e_g).exp();
    let p0 = 0.5 * (p0_b + p0_g);
    let threshold = 0.05 * p0 / (0.95 + 0.05 * p0);
    let hire_b = (1.0 - p0_b) * 0.05;
    let hire_g = (1.0 - p0_g) * 0.05;
    let h = hire_b + hire_g;
    let q = (1.0 - h) / (2.0 - h);
    (
        hire_b + q * (1.0 - hire_b),
        hire_g + q * (1.0 - hire_g),
        threshold,
    )
}

#[test]
fn criterion_03_policy_trajectory_comparison() {
    let start = Instant::now();
    let (params, values, state0) = two_value_setup();
    let cmp = policy::compare_aa_trajectories(
        &state0,
        &params,
        &values,
        0.0,
        1.0,
        AaKind::DemoteBlue,
        0.1,
        20,
    )
    .unwrap();

    // Baseline trajectory against the hand-computed oracle recursion.
    let (mut e_b, mut e_g) = (0.7, 0.3);
    for row in &cmp.rows {
        let (ob, og, _) = two_value_oracle_step(e_b, e_g);
        assert!(
            (row.e_g_base - og).abs() < 1e-12,
            "period {}: {} vs oracle {og}",
            row.period,
            row.e_g_base
        );
        e_b = ob;
        e_g = og;
    }
    assert!((cmp.rows[0].e_g_base - 0.4969).abs() < 1e-3);

    // Period-0 production strictly lower under the intervention.
    assert!(cmp.period0.production_policy < cmp.period0.production_base);

    // Periods 1-20: higher green employment, smaller wage gap, higher
    // production — strict until the trajectories merge at machine precision.
    let eg_p: Vec<f64> = cmp.rows.iter().map(|r| r.e_g_policy).collect();
    let eg_b: Vec<f64> = cmp.rows.iter().map(|r| r.e_g_base).collect();
    assert!(policy::dominates_until_merge(&eg_p, &eg_b), "green employment");
    let pr_p: Vec<f64> = cmp.rows.iter().map(|r| r.production_policy).collect();
    let pr_b: Vec<f64> = cmp.rows.iter().map(|r| r.production_base).collect();
    assert!(policy::dominates_until_merge(&pr_p, &pr_b), "production");
    let gap_b: Vec<f64> = cmp.rows.iter().map(|r| r.wage_gap_base).collect();
    let gap_p: Vec<f64> = cmp.rows.iter().map(|r| r.wage_gap_policy).collect();
    assert!(policy::dominates_until_merge(&gap_b, &gap_p), "wage gap");
    assert_eq!(cmp.rows.len(), 20);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 2.0, "runtime {elapsed:?} exceeds 2 s");
    println!("criterion 03 (policy trajectory comparison, 20 periods): PASS ({elapsed:?})");
}

#[test]
fn criterion_04_direction_rule_is_optimal() {
    let mut rng = TestRng::new(0xA4);
    for trial in 0..500 {
        let v_l = rng.in_range(0.0, 1.0);
        let v_h = v_l + rng.in_range(0.05, 2.0);
        let v_tilde = rng.in_range(v_l + 1e-6, v_h - 1e-6);
        let f_g = rng.in_range(0.05, 0.95);
        let rep = policy::optimal_aa_direction(f_g, v_tilde, v_l, v_h).unwrap();
        let delta = 1e-3;
        let cost_d = delta * policy::aa_cost_per_green(AaKind::DemoteBlue, f_g, v_tilde, v_l, v_h);
        let cost_p =
            delta * policy::aa_cost_per_green(AaKind::PromoteGreen, f_g, v_tilde, v_l, v_h);
        let cost_mix = 0.5 * cost_d + 0.5 * cost_p;
        let chosen = match rep.direction {
            policy::AaDirection::DemoteBlue => cost_d,
            policy::AaDirection::PromoteGreen => cost_p,
            policy::AaDirection::Indifferent => cost_d.min(cost_p),
        };
        // Weakly higher period-0 production = weakly lower cost.
        assert!(
            chosen <= cost_d + 1e-12 && chosen <= cost_p + 1e-12 && chosen <= cost_mix + 1e-12,
            "trial {trial}: chosen direction must be cheapest"
        );
    }
    // Symmetric point: equality within 1e-9.
    let (v_l, v_h) = (0.25, 1.75);
    let mid = 0.5 * (v_l + v_h);
    let cost_d = policy::aa_cost_per_green(AaKind::DemoteBlue, 0.5, mid, v_l, v_h);
    let cost_p = policy::aa_cost_per_green(AaKind::PromoteGreen, 0.5, mid, v_l, v_h);
    assert!((cost_d - cost_p).abs() < 1e-9);
    assert_eq!(
        policy::optimal_aa_direction(0.5, mid, v_l, v_h)
            .unwrap()
            .direction,
        policy::AaDirection::Indifferent
    );
    println!("criterion 04 (direction rule optimal vs opposite and mixture, 500 draws): PASS");
}

#[test]
fn criterion_05_steady_state_and_cycle() {
    // Balanced scenario: 100 random starts reach a common balanced state.
    let (params, values, _) = two_value_setup();
    let mut rng = TestRng::new(0xA5);
    let mut starts = Vec::with_capacity(100);
    for _ in 0..100 {
        let e_b = rng.in_range(0.0, 1.0);
        let e_g = rng.in_range(0.0, 1.0 - e_b);
        starts.push(GroupState::new(e_b, e_g));
    }
    let report =
        steady_state(&params, &values, 0.0, 1.0, &starts, &SteadyOptions::default()).unwrap();
    assert!(report.all_converged_same, "all 100 starts must converge");
    let s = report.state.unwrap();
    assert!(
        (s.e_b / s.e_g - 1.0).abs() < 1e-8,
        "steady employment must match population shares: {s:?}"
    );

    // Cycle scenario: the pool shuts at equal full employment and reopens
    // after the bust.
    let cyc_params = GroupParams::new(0.75, 0.75, 1.0, 1.0, ReferralFamily::poisson()).unwrap();
    let cyc_values = ValueDistribution::new(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap();
    let cyc = steady_state(
        &cyc_params,
        &cyc_values,
        0.36,
        1.0,
        &[GroupState::new(0.5, 0.5)],
        &SteadyOptions::default(),
    )
    .unwrap();
    let cycle = cyc.cycle.expect("period-2 cycle must be detected");
    assert_eq!(cycle.period, 2);
    let hires: Vec<bool> = cycle.pool_hiring.iter().map(|h| h.hires()).collect();
    assert!(hires.contains(&true) && hires.contains(&false));
    println!(
        "criterion 05 (steady state from 100 starts; period-2 pool cycle): PASS (limit {:.6}, {:.6})",
        s.e_b, s.e_g
    );
}

#[test]
fn criterion_06_production_monotone_in_p0() {
    let mut rng = TestRng::new(0xA6);
    let mut switches = 0;
    for trial in 0..30 {
        let values = random_values(&mut rng);
        let mut grid: Vec<f64> = (0..6).map(|_| rng.in_range(0.1, 0.9)).collect();
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        if grid.len() < 3 {
            continue;
        }
        let n = rng.in_range(1.0, (1.0 / (1.0 - grid[0])).min(3.0));
        let builder = |p0: f64| ReferralPmf::new(vec![p0, 1.0 - p0], 0.0);

        // Pin the wage floor between the endpoint pool values so the grid
        // crosses the pool-shutdown regime switch.
        let pv = |p0: f64| {
            let prim =
                MarketPrimitives::new(values.clone(), builder(p0).unwrap(), n, 0.0).unwrap();
            equilibrium::solve_threshold(&prim, 1.0).unwrap().pool_value
        };
        let (lo, hi) = (pv(grid[0]), pv(*grid.last().unwrap()));
        assert!(hi > lo, "pool value must rise in P(0)");
        let w_min = 0.5 * (lo + hi);

        let report =
            metrics::production_vs_p0(&values, n, w_min, &grid, builder).unwrap();
        assert!(
            report.production_nonincreasing && report.production_strict,
            "trial {trial}: production must fall strictly"
        );
        assert!(
            report.pool_value_nondecreasing && report.pool_value_strict,
            "trial {trial}: pool value must rise strictly"
        );
        let shut = report.rows.iter().filter(|r| r.pool_value < w_min).count();
        if shut > 0 && shut < report.rows.len() {
            switches += 1;
        }
    }
    assert!(
        switches >= 10,
        "most trials must actually cross the shutdown switch (got {switches})"
    );
    println!("criterion 06 (production/pool-value monotone in P(0), incl. {switches} regime switches): PASS");
}

#[test]
fn criterion_07_gini_closed_form_and_sensitivity() {
    let mut rng = TestRng::new(0xA7);
    for trial in 0..10_000 {
        let pi_h = rng.in_range(0.0, 1.0);
        let w_min = rng.in_range(0.0, 2.0);
        let w_h = w_min + rng.in_range(0.0, 4.0);
        let inputs = GiniInputs { pi_h, w_h, w_min };
        let closed = metrics::gini_two_point(&inputs).unwrap();
        let oracle =
            metrics::gini_general(&[(w_min, 1.0 - pi_h), (w_h, pi_h)]).unwrap();
        assert!(
            (closed - oracle).abs() < 1e-12,
            "trial {trial}: {closed} vs {oracle}"
        );
    }

    // Signed finite-difference checks, both regimes of the reversal. Half
    // the draws lean toward many multi-referral high earners, where the
    // top's income share flips the sign.
    let mut regular = 0;
    let mut reversed = 0;
    for trial in 0..200 {
        let econ = if trial % 2 == 0 {
            TwoValueEconomy {
                f_h: rng.in_range(0.03, 0.5),
                v_l: 0.0,
                v_h: rng.in_range(0.5, 3.0),
                w_min: rng.in_range(0.02, 0.2),
                n: rng.in_range(1.0, 2.0),
                p0: rng.in_range(0.3, 0.7),
                p2_plus: rng.in_range(0.05, 0.25),
            }
        } else {
            TwoValueEconomy {
                f_h: rng.in_range(0.6, 0.97),
                v_l: 0.0,
                v_h: rng.in_range(2.0, 5.0),
                w_min: rng.in_range(0.005, 0.03),
                n: rng.in_range(1.0, 1.5),
                p0: rng.in_range(0.2, 0.4),
                p2_plus: rng.in_range(0.35, 0.55),
            }
        };
        let Ok(up0) = metrics::gini_sensitivity(&econ, GiniDirection::RaiseP0) else {
            continue;
        };
        let up2 = metrics::gini_sensitivity(&econ, GiniDirection::RaiseP2Plus).unwrap();
        assert!(up0.delta_gini < 0.0, "raising P(0) must lower the Gini");
        if up2.i_l_pi_l > up2.i_h_pi_h {
            assert!(up2.delta_gini > 0.0, "I_L pi_L > I_H pi_H: Gini must rise");
            regular += 1;
        } else if up2.i_l_pi_l < up2.i_h_pi_h {
            assert!(up2.delta_gini < 0.0, "I_L pi_L < I_H pi_H: Gini must fall");
            reversed += 1;
        }
    }
    assert!(
        regular >= 10 && reversed >= 10,
        "both sides of the reversal must occur (regular {regular}, reversed {reversed})"
    );
    println!(
        "criterion 07 (gini closed form == oracle on 10k economies; sensitivity signs \
         {regular}/{reversed} split): PASS"
    );
}

#[test]
fn criterion_08_firing_grid() {
    let mut rng = TestRng::new(0xA8);
    let grid: Vec<f64> = (0..=9).map(|i| i as f64 * 0.1).collect();
    for trial in 0..40 {
        let v_mid = rng.in_range(0.1, 0.7);
        let p_low = rng.in_range(0.3, 0.7);
        let p_mid = (1.0 - p_low) * rng.in_range(0.3, 0.7);
        let p_hi = 1.0 - p_low - p_mid;
        let values =
            ValueDistribution::new(vec![(0.0, p_low), (v_mid, p_mid), (1.0, p_hi)]).unwrap();
        let params = GroupParams::new(
            1.0,
            1.0,
            rng.in_range(0.7, 1.0),
            rng.in_range(0.7, 1.0),
            ReferralFamily::poisson(),
        )
        .unwrap();
        let state = GroupState::new(rng.in_range(0.3, 0.7), rng.in_range(0.1, 0.3));

        let base_threshold = dynamics::step(&state, &params, &values, 0.0, 1.0)
            .unwrap()
            .1
            .equilibrium
            .threshold;
        let rep =
            firing::firing_comparative(&params, &state, &values, 0.0, &grid).unwrap();
        for row in rep.rows.iter().skip(1) {
            assert!(
                row.v2 < base_threshold + 1e-12 && base_threshold < row.v1 + 1e-12,
                "trial {trial}, lambda {}: ordering v2 < v < v1",
                row.lambda
            );
            let (r1, r2) =
                firing::residuals(&params, &state, &values, 0.0, row).unwrap();
            assert!(
                r1 < 1e-10 && r2 < 1e-10,
                "trial {trial}, lambda {}: residuals {r1}, {r2}",
                row.lambda
            );
        }
        assert!(rep.strict_vs_zero, "trial {trial}: production up vs lambda = 0");
        assert!(rep.total_production_nondecreasing, "trial {trial}");
        assert!(rep.pre_bias_nonincreasing, "trial {trial}: pre-firing bias");
        assert!(rep.pre_production_nonincreasing, "trial {trial}");
        assert!(rep.post_production_nondecreasing, "trial {trial}");
    }
    println!("criterion 08 (firing grid: ordering, residuals, comparative statics, 40 instances): PASS");
}

#[test]
fn criterion_09_macro_shocks() {
    let (params, values, state) = two_value_setup();
    let grid = [0.0, 0.1, 0.2, 0.4];
    let mut outcomes: Vec<GroupOutcome> = Vec::new();
    for &kappa in &grid {
        let opts = StepOptions {
            thin_kappa: kappa,
            firm_mass: 1.0 - kappa,
            indifference_hires: true,
        };
        let (_, o) = dynamics::step_with(&state, &params, &values, 0.0, 1.0, &opts).unwrap();
        outcomes.push(o);
    }
    let dist = |o: &GroupOutcome| {
        let mut d = o.blue.wage_distribution_per_capita(params.n_b, 0.0);
        d.extend(o.green.wage_distribution_per_capita(params.n_g, 0.0));
        d
    };
    for w in outcomes.windows(2) {
        assert!(
            w[1].production.total_production < w[0].production.total_production - 1e-12,
            "production must fall strictly with kappa"
        );
        assert!(
            w[1].production.per_worker_productivity
                > w[0].production.per_worker_productivity + 1e-12,
            "per-worker productivity must rise strictly with kappa"
        );
        let (verdict, strict) = wage_fosd(&dist(&w[0]), &dist(&w[1]));
        assert_eq!(verdict, FosdVerdict::ADominates);
        assert!(strict, "wage dominance must be strict for kappa > 0");
    }
    println!("criterion 09 (macro shocks on kappa grid {{0, 0.1, 0.2, 0.4}}): PASS");
}

#[test]
fn criterion_10_correlated_values() {
    let mut last = 0.0;
    for i in 0..=5 {
        let alpha = 0.5 + i as f64 * 0.1;
        let closed = value_homophily_steady(alpha).unwrap();
        let iterated = value_homophily_iterate(alpha, 1e-13, 100_000).unwrap();
        assert!(
            (closed - iterated).abs() < 1e-10,
            "alpha {alpha}: closed {closed} vs iterated {iterated}"
        );
        if i > 0 {
            assert!(closed > last, "e_H must increase strictly at alpha = {alpha}");
        }
        last = closed;
    }
    assert!((value_homophily_steady(1.0).unwrap() - 1.0).abs() < 1e-12);
    println!("criterion 10 (correlated values: closed form == iterated fixed point): PASS");
}

fn abm_demo_config(firm_count: usize, mode: AbmMode, periods: usize, seed: u64) -> AbmConfig {
    let (params, values, state0) = two_value_setup();
    AbmConfig {
        firm_count,
        scenario: AbmScenario {
            values,
            params,
            state0,
            w_min: 0.0,
            r: 1.0,
        },
        mode,
        periods,
        seed,
    }
}

#[test]
fn criterion_11_abm_consistency_and_performance() {
    // (a) Myopic consistency at one million firms: every sampled green
    // employment within five binomial standard errors of the analytic path.
    let cfg = abm_demo_config(1_000_000, AbmMode::Myopic, 10, 2718);
    let traj = abm::simulate_abm(&cfg).unwrap();
    let analytic = dynamics::simulate(
        &cfg.scenario.state0,
        &cfg.scenario.params,
        &cfg.scenario.values,
        0.0,
        1.0,
        10,
    )
    .unwrap();
    for (t, (s, a)) in traj.periods.iter().zip(&analytic).enumerate() {
        let dev = (s.e_g - a.green.next_employment).abs();
        assert!(
            dev <= 5.0 * s.stderr_e_g,
            "period {t}: |dev| = {dev:.3e} exceeds 5 sigma = {:.3e}",
            5.0 * s.stderr_e_g
        );
    }

    // (b) Redraw mode reproduces the directional claims over 5 paired seeds.
    // The search effect is systematic in the transient (both arms converge
    // to the balanced state within a period, where the green premium
    // vanishes and no firm redraws); afterwards the paired arms may differ
    // only by sampling noise, so the weak inequalities carry noise-scaled
    // slack while the transient effects must clear it outright.
    let seeds = [11u64, 12, 13, 14, 15];
    let mut gain_e_g = 0.0;
    let mut gain_production = 0.0;
    let mut gain_wage_next = 0.0;
    for &seed in &seeds {
        let myopic =
            abm::simulate_abm(&abm_demo_config(1_000_000, AbmMode::Myopic, 10, seed)).unwrap();
        let redraw =
            abm::simulate_abm(&abm_demo_config(1_000_000, AbmMode::Redraw, 10, seed)).unwrap();
        assert!(redraw.periods[0].redraw_draws > 0);
        assert!(redraw.periods[0].redraw_cost > 0.0);
        for (t, (r, m)) in redraw.periods.iter().zip(&myopic.periods).enumerate() {
            assert!(
                r.e_g >= m.e_g - 5.0 * m.stderr_e_g,
                "seed {seed} period {t}: green employment {} vs myopic {}",
                r.e_g,
                m.e_g
            );
            assert!(
                r.mean_wage_g >= m.mean_wage_g - 5e-4,
                "seed {seed} period {t}: green wage {} vs {}",
                r.mean_wage_g,
                m.mean_wage_g
            );
            assert!(
                r.production >= m.production - 1.5e-3,
                "seed {seed} period {t}: production {} vs {}",
                r.production,
                m.production
            );
        }
        assert!(
            redraw.periods[0].e_g > myopic.periods[0].e_g + 3.0 * myopic.periods[0].stderr_e_g,
            "seed {seed}: first-period redraw effect must clear 3 sigma"
        );
        gain_e_g += redraw.periods[0].e_g - myopic.periods[0].e_g;
        gain_production += redraw.periods[0].production - myopic.periods[0].production;
        gain_wage_next += redraw.periods[1].mean_wage_g - myopic.periods[1].mean_wage_g;
    }
    gain_e_g /= seeds.len() as f64;
    gain_production /= seeds.len() as f64;
    gain_wage_next /= seeds.len() as f64;
    assert!(gain_e_g > 0.0, "mean first-period green employment gain");
    assert!(gain_production > 0.0, "mean first-period production gain");
    assert!(gain_wage_next > 0.0, "mean next-period green wage gain");

    // (c) Ten million firms, ten periods, myopic: within the wall-clock
    // budget and byte-identical across runs.
    let big = abm_demo_config(10_000_000, AbmMode::Myopic, 10, 99);
    let start = Instant::now();
    let run1 = abm::simulate_abm(&big).unwrap();
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "10^7-firm run took {elapsed:?}, budget 60 s"
    );
    let run2 = abm::simulate_abm(&big).unwrap();
    let meta = refmarket::report::CsvMeta {
        version: "acceptance".into(),
        config_hash: 0,
    };
    assert_eq!(
        refmarket::report::abm_csv(&run1, &meta),
        refmarket::report::abm_csv(&run2, &meta),
        "identical seeds must give byte-identical output"
    );
    println!(
        "criterion 11 (ABM: 5-sigma consistency; redraw gains e_g {gain_e_g:.4}, production \
         {gain_production:.2e}, next wage {gain_wage_next:.2e}; 10^7 firms in {elapsed:?}): PASS"
    );
}

#[test]
fn supporting_prop1_orderings_on_random_instances() {
    // Randomized immobility suite: bias plus imbalance toward blues yields
    // all four orderings, strict when strict.
    let mut rng = TestRng::new(0xB1);
    let mut checked = 0;
    let mut strict_checked = 0;
    for _ in 0..300 {
        let h_b = rng.in_range(0.5, 1.0);
        let h_g = rng.in_range((1.0 - h_b).max(0.3), 1.0);
        let n_b = rng.in_range(0.5, 1.5);
        let n_g = rng.in_range(0.5, 1.5);
        let params =
            GroupParams::new(n_b, n_g, h_b, h_g, ReferralFamily::poisson()).unwrap();
        let values = random_values(&mut rng);
        let e_b = rng.in_range(0.1, n_b.min(0.9));
        let e_g = rng.in_range(0.05, (n_g).min(1.0 - e_b));
        let state = GroupState::new(e_b, e_g);
        if state.validate(&params).is_err() {
            continue;
        }
        let (r_b, r_g, _) = dynamics::referral_balance(&params);
        let biased = e_b / e_g >= n_b / n_g && r_b / r_g >= n_b / n_g;
        let strict = e_b / e_g > n_b / n_g + 1e-9 || r_b / r_g > n_b / n_g + 1e-9;
        if !biased {
            continue;
        }
        let w_min = rng.in_range(0.0, 0.5 * values.max_value());
        let Ok((_, outcome)) = dynamics::step(&state, &params, &values, w_min, 1.0) else {
            continue;
        };
        let cmp = group_comparison(&outcome, &params, w_min);
        assert!(cmp.blue_advantaged(1e-9), "orderings must favor blues");
        // With an active pool and a clear referral-mean gap, every ordering
        // is strict (a shut pool ties the employed-productivity comparison:
        // both groups then employ exactly the above-threshold values).
        let (m_b, m_g) = dynamics::referral_means(&state, &params);
        if strict && outcome.equilibrium.pool_hiring.hires() && m_b > m_g + 1e-6 {
            assert!(
                cmp.strictly_blue_advantaged(1e-12),
                "strict bias with active pool must order strictly"
            );
            strict_checked += 1;
        }
        checked += 1;
    }
    assert!(checked >= 100, "need enough biased instances, got {checked}");
    assert!(strict_checked >= 30, "need strict instances, got {strict_checked}");
    println!(
        "supporting (prop-1 orderings on {checked} biased instances, {strict_checked} strict): PASS"
    );
}

#[test]
fn supporting_monotone_approach_under_balance() {
    // From below the steady state with pure homophily and symmetric masses,
    // green employment never overshoots on its way up.
    let (params, values, _) = two_value_setup();
    let mut state = GroupState::new(0.9, 0.1);
    let mut last = state.e_g;
    for _ in 0..60 {
        let (next, _) = dynamics::step(&state, &params, &values, 0.0, 1.0).unwrap();
        assert!(next.e_g >= last - 1e-12, "no overshoot");
        assert!(next.e_g <= 0.5 + 1e-12);
        last = next.e_g;
        state = next;
    }
    println!("supporting (monotone approach under referral balance): PASS");
}

#[test]
fn supporting_aa_multiplier_epsilon_grid() {
    let (params, values, state0) = two_value_setup();
    let rep = policy::aa_multiplier_check(
        &state0,
        &params,
        &values,
        0.0,
        1.0,
        &[0.0, 0.002, 0.01, 0.05, 0.1],
        20,
    )
    .unwrap();
    assert!(rep.per_epsilon.iter().all(|&(_, ok)| ok));
    assert_eq!(rep.largest_passing, Some(0.1));
    println!("supporting (one-time policy multiplier over epsilon grid): PASS");
}
