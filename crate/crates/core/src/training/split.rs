use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub seed: u64,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Partitions `item_ids` into train and test sets with
/// `round(test_fraction * N)` test items. Both halves keep input order.
pub fn split_dataset(item_ids: &[String], test_fraction: f64, seed: u64) -> Result<Split> {
    if item_ids.is_empty() {
        return Err(Error::Config("cannot split an empty dataset".into()));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test_fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n = item_ids.len();
    let n_test = (test_fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut is_test = vec![false; n];
    for &i in &order[..n_test] {
        is_test[i] = true;
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (id, t) in item_ids.iter().zip(is_test) {
        if t {
            test.push(id.clone());
        } else {
            train.push(id.clone());
        }
    }
    Ok(Split { seed, train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{i:04}")).collect()
    }

    #[test]
    fn ten_items_at_one_fifth() {
        let s = split_dataset(&ids(10), 0.2, 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (8, 2));
        assert_eq!(s, split_dataset(&ids(10), 0.2, 1).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(split_dataset(&[], 0.2, 1).is_err());
        assert!(split_dataset(&ids(3), 0.0, 1).is_err());
        assert!(split_dataset(&ids(3), 1.0, 1).is_err());
    }

    proptest! {
        #[test]
        fn partition_is_exact(n in 1usize..60, f in 0.01..0.99f64, seed: u64) {
            let all = ids(n);
            let s = split_dataset(&all, f, seed).unwrap();
            prop_assert_eq!(s.test.len(), (f * n as f64).round() as usize);
            let mut union: Vec<String> = s.train.iter().chain(&s.test).cloned().collect();
            union.sort();
            prop_assert_eq!(union, all);
        }
    }
}
