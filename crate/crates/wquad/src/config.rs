//! Run configuration shared by the CLI flags and the JSON config file.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    DeriveRules,
    Assemble,
    Study,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    EigConvergence,
    Spectrum,
    Poisson,
}

/// Which bilinear forms a command touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindSelect {
    Mass,
    Stiffness,
    Both,
}

impl KindSelect {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mass" => Ok(Self::Mass),
            "stiffness" => Ok(Self::Stiffness),
            "both" => Ok(Self::Both),
            other => Err(Error::Config(format!("unknown kind '{other}'"))),
        }
    }
}

/// One validated run; unknown JSON fields are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(default)]
    pub study: Option<StudyKind>,
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub dimension: Option<usize>,
    #[serde(default)]
    pub mesh: Option<usize>,
    #[serde(default)]
    pub meshes: Option<Vec<usize>>,
    #[serde(default)]
    pub strategy: Option<String>,
    #[serde(default)]
    pub kind: Option<KindSelect>,
    #[serde(default)]
    pub omega1: Option<f64>,
    #[serde(default)]
    pub eigen_index: Option<usize>,
    #[serde(default)]
    pub solution: Option<String>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<String>,
    #[serde(default)]
    pub check_oracle: Option<bool>,
    #[serde(default)]
    pub ratios: Option<bool>,
    #[serde(default)]
    pub unsafe_newton: Option<bool>,
    #[serde(default)]
    pub start: Option<String>,
    /// Max exactness residual accepted by derive-rules (default 1e-12).
    #[serde(default)]
    pub tol_residual: Option<f64>,
    /// Max weighted-vs-oracle entry difference (default 1e-12).
    #[serde(default)]
    pub tol_oracle: Option<f64>,
    /// Fitted-rate tolerance (default 0.3 for p=2, 0.4 for p=3).
    #[serde(default)]
    pub rate_tol: Option<f64>,
    /// Spectrum eigenvalue agreement tolerance (default 1e-9).
    #[serde(default)]
    pub tol_spectrum: Option<f64>,
}

impl RunConfig {
    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("config file {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn degree_checked(&self) -> Result<usize> {
        match self.degree {
            Some(p @ (2 | 3)) => Ok(p),
            Some(p) => Err(Error::Config(format!("degree must be 2 or 3, got {p}"))),
            None => Err(Error::Config("degree is required".into())),
        }
    }

    pub fn dimension_checked(&self) -> Result<usize> {
        match self.dimension {
            Some(d @ 1..=3) => Ok(d),
            Some(d) => Err(Error::Config(format!("dimension must be 1, 2 or 3, got {d}"))),
            None => Err(Error::Config("dimension is required".into())),
        }
    }

    pub fn default_rate_tol(&self, p: usize) -> f64 {
        self.rate_tol.unwrap_or(if p == 2 { 0.3 } else { 0.4 })
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn validate(&self) -> Result<()> {
        match self.command {
            CommandKind::DeriveRules => {
                self.degree_checked()?;
            }
            CommandKind::Assemble => {
                self.degree_checked()?;
                self.dimension_checked()?;
                if self.mesh.is_none() {
                    return Err(Error::Config("assemble requires a mesh size".into()));
                }
                if let Some(s) = &self.strategy {
                    crate::assemble::Strategy::parse(s)?;
                }
            }
            CommandKind::Study => {
                let study = self
                    .study
                    .ok_or_else(|| Error::Config("study requires a study name".into()))?;
                self.degree_checked()?;
                match study {
                    StudyKind::EigConvergence | StudyKind::Poisson => {
                        self.dimension_checked()?;
                        let meshes = self
                            .meshes
                            .as_ref()
                            .ok_or_else(|| Error::Config("study requires mesh sizes".into()))?;
                        if meshes.len() < 2 {
                            return Err(Error::Config("need at least two meshes".into()));
                        }
                    }
                    StudyKind::Spectrum => {
                        if self.mesh.is_none() {
                            return Err(Error::Config("spectrum requires a mesh size".into()));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Parse a comma-separated mesh list.
pub fn parse_meshes(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("invalid mesh size '{t}'")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_rejected() {
        let text = r#"{"command": "derive-rules", "degree": 2, "bogus": 1}"#;
        assert!(serde_json::from_str::<RunConfig>(text).is_err());
    }

    #[test]
    fn valid_config_parses() {
        let text = r#"{"command": "study", "study": "spectrum", "degree": 3, "mesh": 1000}"#;
        let cfg: RunConfig = serde_json::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.study, Some(StudyKind::Spectrum));
    }

    #[test]
    fn invalid_degree_rejected() {
        let text = r#"{"command": "derive-rules", "degree": 5}"#;
        let cfg: RunConfig = serde_json::from_str(text).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn mesh_list_parsing() {
        assert_eq!(parse_meshes("8,16, 32").unwrap(), vec![8, 16, 32]);
        assert!(parse_meshes("8,x").is_err());
    }
}
