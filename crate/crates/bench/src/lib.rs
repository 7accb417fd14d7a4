//! Shared scenario builders for the benchmark targets.

use refmarket::dist::{ReferralFamily, ReferralPmf, ValueDistribution};
use refmarket::dynamics::{GroupParams, GroupState};
use refmarket::equilibrium::MarketPrimitives;

pub fn two_value_market() -> MarketPrimitives {
    let values = ValueDistribution::new(vec![(0.0, 0.95), (1.0, 0.05)]).unwrap();
    let pmf = ReferralPmf::new(vec![0.6, 0.3, 0.1], 0.0).unwrap();
    MarketPrimitives::new(values, pmf, 2.0, 0.0).unwrap()
}

pub fn six_atom_market() -> MarketPrimitives {
    let values = ValueDistribution::new(vec![
        (0.0, 0.3),
        (0.2, 0.2),
        (0.45, 0.15),
        (0.8, 0.15),
        (1.3, 0.1),
        (2.0, 0.1),
    ])
    .unwrap();
    let pmf = ReferralPmf::new(vec![0.55, 0.3, 0.15], 0.0).unwrap();
    MarketPrimitives::new(values, pmf, 1.8, 0.1).unwrap()
}

pub fn two_value_scenario() -> (GroupParams, ValueDistribution, GroupState) {
    let params = GroupParams::new(1.0, 1.0, 1.0, 1.0, ReferralFamily::poisson()).unwrap();
    let values = ValueDistribution::new(vec![(0.0, 0.95), (1.0, 0.05)]).unwrap();
    (params, values, GroupState::new(0.7, 0.3))
}
