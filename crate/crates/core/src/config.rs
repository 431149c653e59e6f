use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::SwitchedModel;

/// Parse and validate a model document.
pub fn parse_config(document: &str) -> Result<SwitchedModel> {
    SwitchedModel::from_json_str(document)
}

/// A loaded model plus the path it came from.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model_path: Option<PathBuf>,
    pub model: SwitchedModel,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        let model = parse_config(&text).map_err(|e| match e {
            Error::Config { path: p, reason } => Error::config(format!("{}: {p}", path.display()), reason),
            other => other,
        })?;
        Ok(RunConfig {
            model_path: Some(path.to_path_buf()),
            model,
        })
    }

    /// The bundled example when no path is given.
    pub fn load_or_bundled(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(RunConfig {
                model_path: None,
                model: SwitchedModel::paper_example(),
            }),
        }
    }
}

/// α ∈ (0, 1).
pub fn check_alpha(alpha: f64) -> Result<f64> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(alpha)
    } else {
        Err(Error::AlphaRange(alpha))
    }
}

pub fn check_positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(name, format!("must be positive, got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let m = SwitchedModel::paper_example();
        let back = parse_config(&m.to_json_string().unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn bad_shape_reports_path() {
        let mut doc: serde_json::Value = serde_json::from_str(&SwitchedModel::paper_example().to_json_string().unwrap()).unwrap();
        doc["modes"][0]["A"] = serde_json::json!([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        match parse_config(&doc.to_string()) {
            Err(Error::Dim { context, .. }) => assert_eq!(context, "modes[0].A"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_field_is_config_error() {
        let err = parse_config(r#"{"dims": {"n1": 1, "n2": 1, "nu": 1, "p": 1, "q": 1}, "bogus": 1}"#).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
        assert_eq!(err.exit_code(), 2);
        assert!(check_alpha(1.2).is_err() && check_positive("tau", 0.0).is_err());
    }
}
