use serde::Serialize;

use crate::error::{Error, Result};

/// Split of a multiset into a high and a low group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition2 {
    /// Input indices of the larger values, in ascending value order.
    pub high: Vec<usize>,
    /// Input indices of the smaller values, in ascending value order.
    pub low: Vec<usize>,
    /// Split gap minus the largest gap left inside either group.
    pub gap: f64,
}

impl Partition2 {
    /// Whether every internal gap is strictly smaller than the gap between
    /// the groups, i.e. the split is a genuine 2-clustering.
    pub fn is_two_clustering(&self) -> bool {
        self.gap > 0.0
    }
}

/// Splits `values` at the largest gap between consecutive sorted values.
///
/// Ties between equal largest gaps go to the lowest split. Whenever the
/// input admits a 2-clustering (two nonempty groups whose internal gaps are
/// all smaller than every cross-group distance) it is unique and this is it.
pub fn two_clus(values: &[f64]) -> Result<Partition2> {
    if values.len() < 2 {
        return Err(Error::arg(format!("2-clustering needs at least 2 values, got {}", values.len())));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::arg("2-clustering input contains NaN"));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let gaps: Vec<f64> = order.windows(2).map(|w| values[w[1]] - values[w[0]]).collect();
    let mut split = 0;
    for (k, &g) in gaps.iter().enumerate() {
        if g > gaps[split] {
            split = k;
        }
    }
    if gaps[split] == 0.0 {
        return Err(Error::Degenerate);
    }
    let internal = gaps
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != split)
        .map(|(_, &g)| g)
        .fold(0.0, f64::max);
    Ok(Partition2 {
        high: order[split + 1..].to_vec(),
        low: order[..=split].to_vec(),
        gap: gaps[split] - internal,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    /// Exhaustive search over all 2-partitions for a valid 2-clustering,
    /// returned as the indicator of the high group.
    fn brute_force(values: &[f64]) -> Option<Vec<bool>> {
        let k = values.len();
        let max_gap = |members: &[f64]| {
            let mut v = members.to_vec();
            v.sort_by(f64::total_cmp);
            v.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
        };
        let mut found = None;
        for mask in 1u32..(1 << k) - 1 {
            let high: Vec<f64> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| values[i]).collect();
            let low: Vec<f64> = (0..k).filter(|i| mask >> i & 1 == 0).map(|i| values[i]).collect();
            let cross = high
                .iter()
                .flat_map(|a| low.iter().map(move |b| (a - b).abs()))
                .fold(f64::INFINITY, f64::min);
            let larger = high.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                > low.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if larger && max_gap(&high) < cross && max_gap(&low) < cross {
                assert!(found.is_none(), "two valid partitions of {values:?}");
                found = Some((0..k).map(|i| mask >> i & 1 == 1).collect());
            }
        }
        found
    }

    #[test]
    fn hand_examples() {
        let p = two_clus(&[0.0, 0.0, 10.0, 10.0]).unwrap();
        assert_eq!((p.high.clone(), p.low.clone(), p.gap), (vec![2, 3], vec![0, 1], 10.0));
        let p = two_clus(&[1.0, 2.0, 9.0, 10.0]).unwrap();
        assert_eq!((p.high, p.low), (vec![2, 3], vec![0, 1]));
        assert_eq!(p.gap, 6.0);
    }

    #[test]
    fn ties_split_leftmost() {
        let p = two_clus(&[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(p.high, vec![1, 2]);
        assert_eq!(p.gap, 0.0);
        assert!(!p.is_two_clustering());
    }

    #[test]
    fn error_cases() {
        assert!(matches!(two_clus(&[1.0]), Err(Error::InvalidArgument(_))));
        assert!(matches!(two_clus(&[3.0, 3.0, 3.0]), Err(Error::Degenerate)));
        assert!(two_clus(&[1.0, f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn agrees_with_exhaustive_search(values in prop::collection::vec(-6i32..6, 2..=10)) {
            let values: Vec<f64> = values.into_iter().map(f64::from).collect();
            let oracle = brute_force(&values);
            match two_clus(&values) {
                Err(Error::Degenerate) => prop_assert!(oracle.is_none()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
                Ok(p) => {
                    prop_assert_eq!(p.high.len() + p.low.len(), values.len());
                    let max_low = p.low.iter().map(|&i| values[i]).fold(f64::NEG_INFINITY, f64::max);
                    let min_high = p.high.iter().map(|&i| values[i]).fold(f64::INFINITY, f64::min);
                    prop_assert!(min_high > max_low);
                    prop_assert_eq!(p.is_two_clustering(), oracle.is_some());
                    if let Some(high) = oracle {
                        for &i in &p.high {
                            prop_assert!(high[i]);
                        }
                        prop_assert_eq!(p.high.len(), high.iter().filter(|&&h| h).count());
                    }
                }
            }
        }
    }
}
