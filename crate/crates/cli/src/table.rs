//! Reading the CSV files emitted by sibling commands.

use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let mut reader = csv::Reader::from_path(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let headers = reader
            .headers()
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = reader
            .records()
            .map(|r| {
                r.map(|rec| rec.iter().map(str::to_string).collect())
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { headers, rows })
    }

    pub fn index_of(&self, name: &str) -> Result<usize, CliError> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::Config(format!(
                "expected a `{name}` column, found {}",
                self.headers.join(",")
            ))
        })
    }

    /// Requires the header to be exactly `expected`.
    pub fn expect_schema(&self, expected: &[&str]) -> Result<(), CliError> {
        if self
            .headers
            .iter()
            .map(String::as_str)
            .eq(expected.iter().copied())
        {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "schema mismatch: expected `{}`, found `{}`",
                expected.join(","),
                self.headers.join(",")
            )))
        }
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let i = self.index_of(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row.get(i).and_then(|v| v.parse().ok()).ok_or_else(|| {
                    CliError::Config(format!("row {}: `{name}` is not a number", r + 1))
                })
            })
            .collect()
    }
}
