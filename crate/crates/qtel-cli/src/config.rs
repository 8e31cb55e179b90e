//! Scenario configuration files.
//!
//! Configs are TOML with four typed sections. Complex numbers are written as
//! `"re,im"` strings so matrices stay diffable line by line.

use serde::Deserialize;

use qtel_core::{Complex64, Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub name: String,
    /// Optional cross-check: (input dim, resource sender dim, receiver dim).
    pub dims: Option<[usize; 3]>,
    pub resource: ResourceSection,
    #[serde(default)]
    pub phases: PhasesSection,
    pub input: InputSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ResourceSection {
    /// Balanced diagonal resource on `dim` levels.
    Maximal { dim: usize },
    /// Tensor power of `pairs` balanced two-level pairs.
    EprProduct { pairs: usize },
    /// Sender level s paired with receiver level `targets[s-1]`.
    Injection {
        dim_receiver: usize,
        targets: Vec<usize>,
    },
    /// Explicit coefficient matrix, rows of "re,im" entries.
    Matrix { rows: Vec<Vec<String>> },
}

#[derive(Debug, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PhasesSection {
    #[default]
    Fourier,
    /// Flattened (i, j, k) order, length n1 * n1 * n2.
    Explicit { values: Vec<String> },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InputSection {
    /// Reproducible random input; the dimension is the support length when a
    /// support is given, otherwise `dim`.
    Seeded {
        dim: usize,
        support: Option<Vec<usize>>,
    },
    /// Explicit unit vector over the physical input space.
    Amplitudes {
        values: Vec<String>,
        support: Option<Vec<usize>>,
    },
    /// Physical basis vector e_level.
    Basis {
        dim: usize,
        level: usize,
        support: Option<Vec<usize>>,
    },
}

#[derive(Debug, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum RunSection {
    #[default]
    Exhaustive,
    Sampled { count: usize, seed: Option<u64> },
    Session {
        transport: Option<String>,
        seed: Option<u64>,
    },
}

/// Parses one "re,im" entry.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let (re, im) = text
        .split_once(',')
        .ok_or_else(|| Error::Validation(format!("expected \"re,im\", got {text:?}")))?;
    let re: f64 = re
        .trim()
        .parse()
        .map_err(|_| Error::Validation(format!("bad real part in {text:?}")))?;
    let im: f64 = im
        .trim()
        .parse()
        .map_err(|_| Error::Validation(format!("bad imaginary part in {text:?}")))?;
    if !re.is_finite() || !im.is_finite() {
        return Err(Error::Validation(format!("non-finite entry {text:?}")));
    }
    Ok(Complex64::new(re, im))
}

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e| Error::Validation(format!("config error: {e}")))
}

pub fn load_config(path: &std::path::Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_entries_parse_both_parts() {
        let z = parse_complex("0.5,-1.25").unwrap();
        assert_eq!(z, Complex64::new(0.5, -1.25));
        assert!(parse_complex("0.5").is_err());
        assert!(parse_complex("a,b").is_err());
        assert!(parse_complex("inf,0").is_err());
    }

    #[test]
    fn minimal_config_defaults_to_fourier_exhaustive() {
        let cfg = parse_config(
            r#"
name = "t"
[resource]
kind = "maximal"
dim = 2
[input]
kind = "seeded"
dim = 2
"#,
        )
        .unwrap();
        assert!(matches!(cfg.phases, PhasesSection::Fourier));
        assert!(matches!(cfg.run, RunSection::Exhaustive));
        assert!(cfg.dims.is_none());
    }

    #[test]
    fn unknown_top_level_fields_are_rejected() {
        let err = parse_config(
            r#"
name = "t"
bogus = 1
[resource]
kind = "maximal"
dim = 2
[input]
kind = "seeded"
dim = 2
"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn malformed_toml_reports_the_location() {
        let err = parse_config("name = \"t\"\n[resource\n").unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("line"), "diagnostic was {msg:?}");
    }
}
