use std::collections::BTreeMap;
use std::path::Path;

use super::kpca::KpcaMap;
use super::similarity::SimilarityKernel;
use crate::error::Result;

fn cell(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "NaN".to_string()
    }
}

/// Square matrix with a header row of labels; the first column repeats them.
pub fn write_kernel_csv(kernel: &SimilarityKernel, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["label".to_string()];
    header.extend(kernel.labels.iter().cloned());
    w.write_record(&header)?;
    for (i, label) in kernel.labels.iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend(kernel.k.row(i).iter().map(|&v| cell(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `label, pc1..pcC`, plus `rmse` when errors are supplied.
pub fn write_map_csv(map: &KpcaMap, rmse: Option<&BTreeMap<String, f64>>, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let c = map.coordinates.ncols();
    let mut header = vec!["label".to_string()];
    header.extend((1..=c).map(|i| format!("pc{i}")));
    if rmse.is_some() {
        header.push("rmse".into());
    }
    w.write_record(&header)?;
    for (i, label) in map.labels.iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend(map.coordinates.row(i).iter().map(|&v| cell(v)));
        if let Some(errors) = rmse {
            row.push(cell(errors.get(label).copied().unwrap_or(f64::NAN)));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
