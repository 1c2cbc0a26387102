//! CSV report writers for experiment outputs.

use std::path::Path;

use crate::attacks::PrCurve;
use crate::defense::TradeoffPoint;
use crate::error::Result;

/// Flat name/value metric table.
pub fn write_metrics_csv(path: &Path, rows: &[(String, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["metric", "value"])?;
    for (name, value) in rows {
        w.write_record([name.as_str(), &value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Threshold sweep as (tau, precision, recall) rows.
pub fn write_pr_curve_csv(path: &Path, curve: &PrCurve) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["tau", "precision", "recall"])?;
    for p in &curve.points {
        w.write_record([p.tau.to_string(), p.precision.to_string(), p.recall.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Square confusion matrix with class names on both axes.
pub fn write_confusion_csv(path: &Path, classes: &[String], counts: &[Vec<usize>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["true\\predicted".to_string()];
    header.extend(classes.iter().cloned());
    w.write_record(&header)?;
    for (name, row) in classes.iter().zip(counts) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(|c| c.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Defense trade-off curve rows.
pub fn write_tradeoff_csv(path: &Path, points: &[TradeoffPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["interval_ms", "packet_overhead", "mean_added_delay_ms", "attack_accuracy"])?;
    for p in points {
        w.write_record([
            (p.interval_ns as f64 / 1e6).to_string(),
            p.packet_overhead.to_string(),
            (p.mean_added_delay_ns / 1e6).to_string(),
            p.attack_accuracy.map(|a| a.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::pr_sweep;

    #[test]
    fn metrics_csv_round_trip_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_metrics_csv(&path, &[("acc".into(), 0.97), ("auc".into(), 0.99)]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("acc,0.97"));
    }

    #[test]
    fn pr_csv_has_one_row_per_point() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pr.csv");
        let c = pr_sweep(&[1.0, 2.0, 3.0, 4.0], &[false, false, true, true]);
        write_pr_curve_csv(&path, &c).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1 + c.points.len());
    }

    #[test]
    fn confusion_is_square() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_confusion_csv(
            &path,
            &["a".into(), "b".into()],
            &[vec![9, 1], vec![0, 10]],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("a,9,1"));
        assert!(text.contains("b,0,10"));
    }
}
