use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::netmodel::{SellerId, SplitVector};

/// Splits a buyer's charge across the seller groups serving it.
///
/// Group `g` receives `fractions[g] * charge`, divided equally among its
/// sellers. Fractions must be nonnegative and sum to one, and every group
/// with a positive fraction needs at least one seller.
pub fn split_payment(
    charge: f64,
    fractions: &[f64],
    groups: &[Vec<SellerId>],
) -> Result<BTreeMap<SellerId, f64>> {
    let split = SplitVector::new(fractions.to_vec())?;
    if groups.len() != split.fractions().len() {
        return Err(Error::Validation(format!(
            "{} split fractions for {} seller groups",
            split.fractions().len(),
            groups.len()
        )));
    }
    let mut out = BTreeMap::new();
    for (g, (group, f)) in groups.iter().zip(split.fractions()).enumerate() {
        if group.is_empty() {
            if *f > 0.0 {
                return Err(Error::Validation(format!(
                    "seller group {g} is empty but has fraction {f}"
                )));
            }
            continue;
        }
        let each = f * charge / group.len() as f64;
        for &seller in group {
            *out.entry(seller).or_insert(0.0) += each;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_way_split() {
        let out = split_payment(3.0, &[0.2, 0.3, 0.5], &[vec![0], vec![1], vec![2]]).unwrap();
        let got: Vec<f64> = out.values().copied().collect();
        for (g, want) in got.iter().zip([0.6, 0.9, 1.5]) {
            assert!((g - want).abs() < 1e-12);
        }
        assert!((got.iter().sum::<f64>() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn whole_charge_to_one_group() {
        let out = split_payment(2.5, &[1.0], &[vec![4]]).unwrap();
        assert_eq!(out.get(&4), Some(&2.5));
    }

    #[test]
    fn group_share_is_divided_equally() {
        let out = split_payment(4.0, &[0.5, 0.5], &[vec![0, 1], vec![2]]).unwrap();
        assert_eq!(out.get(&0), Some(&1.0));
        assert_eq!(out.get(&1), Some(&1.0));
        assert_eq!(out.get(&2), Some(&2.0));
    }

    #[test]
    fn empty_group_needs_zero_fraction() {
        assert!(split_payment(1.0, &[0.5, 0.5], &[vec![0], vec![]]).is_err());
        let out = split_payment(1.0, &[1.0, 0.0], &[vec![0], vec![]]).unwrap();
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn bad_fractions_are_rejected() {
        assert!(split_payment(1.0, &[0.5, 0.6], &[vec![0], vec![1]]).is_err());
        assert!(split_payment(1.0, &[0.5, 0.5], &[vec![0]]).is_err());
    }
}
