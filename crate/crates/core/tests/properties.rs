use proptest::prelude::*;
use svcauction_core::mechanisms::{split_payment, trade_reduction, CandidateMatch, Trade};
use svcauction_core::{Interval, RequestKey, ScenarioConfig, SplitVector};

const TOL: f64 = 1e-9;

fn candidates(pairs: &[(f64, f64)]) -> Vec<CandidateMatch> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, &(bid, ask))| CandidateMatch::new(RequestKey::new(i as u32, 1), (i % 3) as u32, bid, ask))
        .collect()
}

fn trade_of(trades: &[Trade], i: usize) -> Option<&Trade> {
    trades
        .iter()
        .find(|t| t.candidate.request == RequestKey::new(i as u32, 1))
}

/// Bids and asks on a 0.25 grid so ties are common.
fn market() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0u32..=16, 0u32..=8), 0..12).prop_map(|v| {
        v.into_iter()
            .map(|(b, a)| (b as f64 / 4.0, a as f64 / 4.0))
            .collect()
    })
}

proptest! {
    #[test]
    fn trade_reduction_is_rational_and_balanced(pairs in market()) {
        let cands = candidates(&pairs);
        let (trades, thresholds) = trade_reduction(&cands);
        for t in &trades {
            prop_assert!(t.buyer_charge <= t.candidate.bid + TOL);
            prop_assert!(t.seller_payment >= t.candidate.ask - TOL);
            prop_assert!(t.buyer_charge >= t.seller_payment - TOL);
            prop_assert!(cands.contains(&t.candidate));
        }
        if !trades.is_empty() {
            prop_assert!(thresholds.unwrap().k >= 2);
        }
    }

    #[test]
    fn no_buyer_gains_by_misreporting(pairs in market(), pick in 0usize..12, report in 0u32..=20) {
        prop_assume!(!pairs.is_empty());
        let i = pick % pairs.len();
        let value = pairs[i].0;
        let utility = |pairs: &[(f64, f64)]| {
            let (trades, _) = trade_reduction(&candidates(pairs));
            trade_of(&trades, i).map_or(0.0, |t| value - t.buyer_charge)
        };
        let mut lie = pairs.clone();
        lie[i].0 = report as f64 / 4.0;
        prop_assert!(utility(&lie) <= utility(&pairs) + TOL);
    }

    #[test]
    fn no_seller_gains_by_misreporting(pairs in market(), pick in 0usize..12, report in 0u32..=20) {
        prop_assume!(!pairs.is_empty());
        let i = pick % pairs.len();
        let cost = pairs[i].1;
        let utility = |pairs: &[(f64, f64)]| {
            let (trades, _) = trade_reduction(&candidates(pairs));
            trade_of(&trades, i).map_or(0.0, |t| t.seller_payment - cost)
        };
        let mut lie = pairs.clone();
        lie[i].1 = report as f64 / 4.0;
        prop_assert!(utility(&lie) <= utility(&pairs) + TOL);
    }

    #[test]
    fn config_json_round_trips(
        buyers in 0usize..40,
        per in 1usize..4,
        sellers in 0usize..6,
        bands in 0usize..10,
        lo in 0.1f64..5.0,
        width in 0.0f64..5.0,
        seed in any::<u64>(),
    ) {
        let mut c = ScenarioConfig::reference().with_bands(bands).with_seed(seed);
        c.buyers = buyers;
        c.requests_per_buyer = per;
        c.sellers = sellers;
        c.bid = Interval::new(lo, lo + width);
        prop_assert_eq!(ScenarioConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn split_shares_sum_to_charge(charge in 0.0f64..100.0, weights in prop::collection::vec(1u32..10, 1..5)) {
        let total: u32 = weights.iter().sum();
        let mut fractions: Vec<f64> = weights.iter().map(|&w| w as f64 / total as f64).collect();
        let head: f64 = fractions[..fractions.len() - 1].iter().sum();
        *fractions.last_mut().unwrap() = 1.0 - head;
        prop_assume!(SplitVector::new(fractions.clone()).is_ok());
        let groups: Vec<Vec<u32>> = (0..fractions.len() as u32).map(|g| (0..=g).map(|j| 10 * g + j).collect()).collect();
        let shares = split_payment(charge, &fractions, &groups).unwrap();
        prop_assert!((shares.values().sum::<f64>() - charge).abs() <= 1e-9 * charge.max(1.0));
    }
}
