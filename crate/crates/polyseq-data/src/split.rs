//! Train/test splitting: hold-out routed by a column value, or k-fold
//! cross-validation with a seeded shuffle and contiguous fold slices.

use polyseq_smiles::sample::Rng;

use crate::error::DataError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitPlan {
    /// Route each record by its split-column value (e.g. year 2018 ->
    /// train, 2019 -> test).
    HoldoutByColumn {
        train_values: Vec<String>,
        test_values: Vec<String>,
    },
    KFold {
        k: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub fold: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Deterministic splits over records `0..n`. `split_values` must be given
/// for hold-out plans (one value per record, from the schema's split
/// column).
pub fn make_splits(
    n_records: usize,
    split_values: Option<&[String]>,
    plan: &SplitPlan,
) -> Result<Vec<FoldSplit>, DataError> {
    match plan {
        SplitPlan::HoldoutByColumn {
            train_values,
            test_values,
        } => {
            let values = split_values.ok_or(DataError::NoSplitColumn)?;
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (i, value) in values.iter().enumerate() {
                if train_values.contains(value) {
                    train.push(i);
                } else if test_values.contains(value) {
                    test.push(i);
                } else {
                    return Err(DataError::UnmappedSplitValue(value.clone()));
                }
            }
            if train.is_empty() {
                return Err(DataError::EmptySplit("train".into()));
            }
            if test.is_empty() {
                return Err(DataError::EmptySplit("test".into()));
            }
            Ok(vec![FoldSplit {
                fold: 0,
                train,
                test,
            }])
        }
        SplitPlan::KFold { k, seed } => {
            let k = *k;
            if k < 2 {
                return Err(DataError::Schema("k-fold needs k >= 2".into()));
            }
            if n_records < k {
                return Err(DataError::EmptySplit("test".into()));
            }
            let mut order: Vec<usize> = (0..n_records).collect();
            let mut rng = Rng::new(*seed);
            rng.shuffle(&mut order);

            // contiguous slices over the shuffled order; the first
            // n_records % k folds take one extra record
            let base = n_records / k;
            let extra = n_records % k;
            let mut folds = Vec::with_capacity(k);
            let mut start = 0usize;
            for fold in 0..k {
                let size = base + usize::from(fold < extra);
                let test: Vec<usize> = order[start..start + size].to_vec();
                let train: Vec<usize> = order[..start]
                    .iter()
                    .chain(&order[start + size..])
                    .copied()
                    .collect();
                if test.is_empty() || train.is_empty() {
                    return Err(DataError::EmptySplit(format!("fold {fold}")));
                }
                folds.push(FoldSplit { fold, train, test });
                start += size;
            }
            Ok(folds)
        }
    }
}
