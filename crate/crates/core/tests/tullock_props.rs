use ledger_equilibria::tullock::{c_star, c_star_asym, residual, CostProfile};
use proptest::prelude::*;

proptest! {
    #[test]
    fn shares_sum_to_one(costs in prop::collection::vec(0.01f64..100.0, 2..8)) {
        let s = c_star(&costs).unwrap();
        prop_assert!(residual(&costs, s.c_star).abs() <= 1e-12);
        let sum: f64 = s.shares.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-9);
        for (x, c) in s.shares.iter().zip(&costs) {
            prop_assert!(*x >= 0.0);
            prop_assert!((*x > 0.0) == (*c < s.c_star));
        }
    }

    #[test]
    fn cheaper_miners_win_larger_shares(costs in prop::collection::vec(0.01f64..10.0, 2..8)) {
        let s = c_star(&costs).unwrap();
        for i in 0..costs.len() {
            for j in 0..costs.len() {
                if costs[i] < costs[j] {
                    prop_assert!(s.shares[i] >= s.shares[j]);
                }
            }
        }
    }

    #[test]
    fn common_write_cost_factors_out(
        costs in prop::collection::vec(0.1f64..5.0, 2..6),
        r in 0.2f64..2.0,
        cw in 0.0f64..0.15,
        b in 0.0f64..3.0,
    ) {
        let n = costs.len();
        let sym = c_star(&costs).unwrap();
        let asym = c_star_asym(&CostProfile {
            resource_costs: costs,
            write_costs: Some(vec![cw; n]),
            block_reward: b,
            reference_price: r,
        }).unwrap();
        prop_assert!((asym.c_star * (r + b - cw) - sym.c_star).abs() <= 1e-9 * sym.c_star);
        for (a, s) in asym.shares.iter().zip(&sym.shares) {
            prop_assert!((a - s).abs() <= 1e-9);
        }
    }
}
