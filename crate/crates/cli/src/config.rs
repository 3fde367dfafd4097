//! Optional JSON config file and grid-spec parsing.
//!
//! Precedence is flag > config file > built-in default; the effective values
//! are echoed in every report's metadata.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::CliError;

/// Fields a config file may set. Unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dim: Option<usize>,
    pub lambda: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub max_iters: Option<usize>,
    pub target: Option<f64>,
    pub format: Option<String>,
    pub dims: Option<String>,
    pub lambdas: Option<String>,
    pub lambda_offset: Option<f64>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))
}

/// Parses a dimension spec: "2..8" (inclusive range), "2,3,5", or "4".
pub fn parse_dims(spec: &str) -> Result<Vec<usize>, CliError> {
    let spec = spec.trim();
    let bad = |msg: String| CliError::Config(msg);
    let dims: Vec<usize> = if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad range start in dimension spec '{spec}'")))?;
        let hi: usize = hi
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad range end in dimension spec '{spec}'")))?;
        if lo > hi {
            return Err(bad(format!("empty dimension range '{spec}'")));
        }
        (lo..=hi).collect()
    } else {
        spec.split(',')
            .map(|part| {
                part.trim()
                    .parse()
                    .map_err(|_| bad(format!("bad dimension '{part}' in spec '{spec}'")))
            })
            .collect::<Result<_, _>>()?
    };
    if dims.is_empty() {
        return Err(bad("dimension spec is empty".into()));
    }
    Ok(dims)
}

/// Parses a comma-separated list of Werner weights.
pub fn parse_lambdas(spec: &str) -> Result<Vec<f64>, CliError> {
    let values: Vec<f64> = spec
        .split(',')
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad weight '{part}' in list '{spec}'")))
        })
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(CliError::Config("weight list is empty".into()));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dim_specs() {
        assert_eq!(parse_dims("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_dims("7").unwrap(), vec![7]);
        assert_eq!(parse_dims("2, 3, 5").unwrap(), vec![2, 3, 5]);
        assert!(parse_dims("5..2").is_err());
        assert!(parse_dims("x..3").is_err());
        assert!(parse_dims("").is_err());
    }

    #[test]
    fn lambda_lists() {
        assert_eq!(parse_lambdas("0.5,0.9").unwrap(), vec![0.5, 0.9]);
        assert!(parse_lambdas("0.5,?").is_err());
    }
}
