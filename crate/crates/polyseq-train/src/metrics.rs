//! Regression metrics and the metrics CSV format.

use std::path::Path;

use polyseq_tensor::io::atomic_write;

use crate::error::TrainError;

/// RMSE in label units plus the coefficient of determination. `r2` is
/// `None` when every label is identical (SST = 0), reported downstream as
/// not-a-value with a warning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub rmse: f64,
    pub r2: Option<f64>,
}

pub fn evaluate(preds: &[f64], labels: &[f64]) -> Result<Metrics, TrainError> {
    if preds.len() != labels.len() || preds.is_empty() {
        return Err(TrainError::LengthMismatch {
            preds: preds.len(),
            labels: labels.len(),
        });
    }
    let n = labels.len() as f64;
    let sse: f64 = preds
        .iter()
        .zip(labels)
        .map(|(p, y)| (p - y) * (p - y))
        .sum();
    let mean = labels.iter().sum::<f64>() / n;
    let sst: f64 = labels.iter().map(|y| (y - mean) * (y - mean)).sum();
    let r2 = if sst == 0.0 {
        None
    } else {
        Some(1.0 - sse / sst)
    };
    Ok(Metrics {
        rmse: (sse / n).sqrt(),
        r2,
    })
}

/// One row of the metrics CSV (`run_id, dataset, fold, epoch, split, rmse,
/// r2`). `fold`/`epoch` are free-form so summary rows can say `mean`.
#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub run_id: String,
    pub dataset: String,
    pub fold: String,
    pub epoch: String,
    pub split: String,
    pub rmse: f64,
    pub r2: Option<f64>,
}

pub fn write_metrics_csv(path: &Path, rows: &[MetricsRow]) -> Result<(), TrainError> {
    let mut text = String::from("run_id,dataset,fold,epoch,split,rmse,r2\n");
    for row in rows {
        let r2 = row.r2.map_or_else(|| "NaN".to_string(), |v| format!("{v}"));
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.run_id, row.dataset, row.fold, row.epoch, row.split, row.rmse, r2
        ));
    }
    atomic_write(path, text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let m = evaluate(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.rmse, 0.0);
        assert_eq!(m.r2, Some(1.0));
    }

    #[test]
    fn mean_predictor_scores_zero() {
        let labels = [1.0, 2.0, 3.0, 6.0];
        let mean = labels.iter().sum::<f64>() / 4.0;
        let m = evaluate(&[mean; 4], &labels).unwrap();
        assert!((m.r2.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn hand_arithmetic_case() {
        let m = evaluate(&[1.5, 2.0, 2.5], &[1.0, 2.0, 3.0]).unwrap();
        assert!((m.rmse - (1.0f64 / 6.0).sqrt()).abs() < 1e-12);
        assert!((m.r2.unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn constant_labels_have_no_r2() {
        let m = evaluate(&[1.0, 2.0], &[5.0, 5.0]).unwrap();
        assert_eq!(m.r2, None);
        assert!(m.rmse > 0.0);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(evaluate(&[1.0], &[1.0, 2.0]).is_err());
        assert!(evaluate(&[], &[]).is_err());
    }

    #[test]
    fn csv_layout() {
        let dir = std::env::temp_dir().join(format!("polyseq-metrics-{}", std::process::id()));
        let path = dir.join("metrics.csv");
        write_metrics_csv(
            &path,
            &[
                MetricsRow {
                    run_id: "r1".into(),
                    dataset: "mini".into(),
                    fold: "0".into(),
                    epoch: "best".into(),
                    split: "test".into(),
                    rmse: 0.5,
                    r2: Some(0.75),
                },
                MetricsRow {
                    run_id: "r1".into(),
                    dataset: "mini".into(),
                    fold: "mean".into(),
                    epoch: "best".into(),
                    split: "test".into(),
                    rmse: 0.6,
                    r2: None,
                },
            ],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "run_id,dataset,fold,epoch,split,rmse,r2");
        assert_eq!(lines[1], "r1,mini,0,best,test,0.5,0.75");
        assert_eq!(lines[2], "r1,mini,mean,best,test,0.6,NaN");
        std::fs::remove_dir_all(&dir).ok();
    }
}
