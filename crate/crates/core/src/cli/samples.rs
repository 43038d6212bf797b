//! Accuracy-sample files: `s_1..s_N, eps_1..eps_N, accuracy, weight`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::fit::AccuracySample;
use crate::model::StrategyProfile;
use crate::scalar::Scalar;

use super::output::{numbered, Table};

pub fn samples_table<S: Scalar>(samples: &[AccuracySample<S>]) -> Table {
    let n = samples.first().map_or(0, |s| s.s.len());
    let header = numbered("s", n)
        .chain(numbered("eps", n))
        .chain(["accuracy".to_string(), "weight".to_string()]);
    let mut table = Table::new(header);
    for smp in samples {
        let row = smp
            .s
            .iter()
            .map(|v| v.to_string())
            .chain(smp.eps.iter().map(|e| e.to_string()))
            .chain([smp.observed_accuracy.to_string(), smp.weight.to_string()]);
        table.row(row);
    }
    table
}

pub fn write_samples<S: Scalar>(path: &Path, samples: &[AccuracySample<S>]) -> Result<()> {
    samples_table(samples).save(path)
}

/// Reads a sample file. The `weight` column is optional and defaults to 1.
pub fn read_samples<S: Scalar>(path: &Path) -> Result<Vec<AccuracySample<S>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_samples(&text, &path.display().to_string())
}

pub fn parse_samples<S: Scalar>(text: &str, origin: &str) -> Result<Vec<AccuracySample<S>>> {
    let format_err = |message: String| Error::Format {
        path: origin.to_string(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| format_err(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let column = |name: &str| header.iter().position(|h| h == name);
    let n = (1..).take_while(|i| column(&format!("s_{i}")).is_some()).count();
    if n == 0 {
        return Err(format_err("missing column `s_1`".into()));
    }
    let mut s_cols = Vec::with_capacity(n);
    let mut eps_cols = Vec::with_capacity(n);
    for i in 1..=n {
        s_cols.push(column(&format!("s_{i}")).expect("counted above"));
        let eps = format!("eps_{i}");
        eps_cols.push(column(&eps).ok_or_else(|| format_err(format!("missing column `{eps}`")))?);
    }
    let acc_col = column("accuracy").ok_or_else(|| format_err("missing column `accuracy`".into()))?;
    let weight_col = column("weight");

    let mut samples = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| format_err(format!("line {line}: {e}")))?;
        let field = |col: usize| record.get(col).unwrap_or("");
        let real = |col: usize| -> Result<f64> {
            field(col).parse::<f64>().map_err(|_| {
                format_err(format!(
                    "line {line}, column `{}`: `{}` is not a number",
                    header[col],
                    field(col)
                ))
            })
        };
        let s = s_cols
            .iter()
            .map(|&c| {
                field(c).parse::<u64>().map_err(|_| {
                    format_err(format!(
                        "line {line}, column `{}`: `{}` is not a non-negative integer",
                        header[c],
                        field(c)
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let eps = eps_cols
            .iter()
            .map(|&c| real(c).map(S::lit))
            .collect::<Result<Vec<_>>>()?;
        let mut sample = AccuracySample::new(StrategyProfile::new(s), eps, S::lit(real(acc_col)?));
        if let Some(c) = weight_col {
            sample.weight = S::lit(real(c)?);
        }
        samples.push(sample);
    }
    Ok(samples)
}
