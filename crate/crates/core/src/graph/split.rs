use serde::{Deserialize, Serialize};

use crate::error::{Result, RslError};
use crate::rng::Rng;

/// Node index sets for one experiment. `val_*` and `test_*` partition `wild`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitMasks {
    pub known_id: Vec<usize>,
    pub wild: Vec<usize>,
    pub val_in: Vec<usize>,
    pub val_out: Vec<usize>,
    pub test_in: Vec<usize>,
    pub test_out: Vec<usize>,
}

impl SplitMasks {
    pub fn validation(&self) -> impl Iterator<Item = usize> + '_ {
        self.val_in.iter().chain(&self.val_out).copied()
    }

    pub fn test(&self) -> impl Iterator<Item = usize> + '_ {
        self.test_in.iter().chain(&self.test_out).copied()
    }
}

/// Assigns wild nodes to validation and test, one class at a time.
///
/// Each class is shuffled and its first `⌈len/3⌉` members go to validation.
/// All output sets are returned sorted.
pub fn stratified_split(
    known_id: Vec<usize>,
    wild: Vec<usize>,
    wild_is_ood: &[bool],
    seed: u64,
) -> Result<SplitMasks> {
    if wild.len() != wild_is_ood.len() {
        return Err(RslError::dim(format!(
            "{} wild nodes but {} OOD flags",
            wild.len(),
            wild_is_ood.len()
        )));
    }
    let mut ids: Vec<usize> = Vec::new();
    let mut oods: Vec<usize> = Vec::new();
    for (&v, &ood) in wild.iter().zip(wild_is_ood) {
        if ood {
            oods.push(v)
        } else {
            ids.push(v)
        }
    }
    if ids.is_empty() || oods.is_empty() {
        return Err(RslError::Split(format!(
            "wild set needs both classes (ID {}, OOD {})",
            ids.len(),
            oods.len()
        )));
    }
    let mut rng = Rng::new(seed);
    let mut take = |mut class: Vec<usize>| {
        rng.shuffle(&mut class);
        let n_val = class.len().div_ceil(3);
        let mut test = class.split_off(n_val);
        class.sort_unstable();
        test.sort_unstable();
        (class, test)
    };
    let (val_in, test_in) = take(ids);
    let (val_out, test_out) = take(oods);
    let mut wild = wild;
    wild.sort_unstable();
    let mut known_id = known_id;
    known_id.sort_unstable();
    if let Some(v) = known_id.iter().find(|v| wild.binary_search(v).is_ok()) {
        return Err(RslError::Split(format!("node {v} is both known and wild")));
    }
    Ok(SplitMasks {
        known_id,
        wild,
        val_in,
        val_out,
        test_in,
        test_out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn thirty_and_thirty() {
        let wild: Vec<usize> = (0..60).collect();
        let flags: Vec<bool> = (0..60).map(|i| i >= 30).collect();
        let s = stratified_split(vec![], wild, &flags, 1).unwrap();
        assert_eq!((s.val_in.len(), s.val_out.len()), (10, 10));
        assert_eq!((s.test_in.len(), s.test_out.len()), (20, 20));
    }

    #[test]
    fn missing_class_is_error() {
        let r = stratified_split(vec![], vec![0, 1], &[false, false], 1);
        assert!(matches!(r, Err(RslError::Split(_))));
    }

    #[test]
    fn deterministic() {
        let wild: Vec<usize> = (10..70).collect();
        let flags: Vec<bool> = (0..60).map(|i| i % 3 == 0).collect();
        let a = stratified_split(vec![0, 1], wild.clone(), &flags, 9).unwrap();
        let b = stratified_split(vec![0, 1], wild, &flags, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn known_overlapping_wild_is_error() {
        assert!(stratified_split(vec![0], vec![0, 1], &[false, true], 1).is_err());
    }

    proptest! {
        #[test]
        fn preserves_class_counts(n_in in 1usize..80, n_out in 1usize..80, seed in 0u64..500) {
            let wild: Vec<usize> = (0..n_in + n_out).collect();
            let flags: Vec<bool> = (0..n_in + n_out).map(|i| i >= n_in).collect();
            let s = stratified_split(vec![], wild, &flags, seed).unwrap();
            prop_assert_eq!(s.val_in.len() + s.test_in.len(), n_in);
            prop_assert_eq!(s.val_out.len() + s.test_out.len(), n_out);
            prop_assert_eq!(s.val_in.len(), n_in.div_ceil(3));
            // pairwise disjoint, union = wild
            let mut all: Vec<usize> = s.validation().chain(s.test()).collect();
            all.sort_unstable();
            prop_assert_eq!(all, s.wild.clone());
        }
    }
}
