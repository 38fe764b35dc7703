//! Parameter resolution with per-field provenance.
//!
//! Precedence, highest first: command-line flags, the file named by
//! `KAONBELL_PARAMS`, the file given with `--params`, built-in defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use kaonbell::params::{default_params, validate, PartialParams};
use kaonbell::{ParamError, ParameterSet};
use serde::{Serialize, Serializer};

pub const PARAMS_ENV: &str = "KAONBELL_PARAMS";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Default,
    File(PathBuf),
    Env(PathBuf),
    Flag,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Default => f.write_str("default"),
            Provenance::File(p) => write!(f, "file:{}", p.display()),
            Provenance::Env(p) => write!(f, "env:{}", p.display()),
            Provenance::Flag => f.write_str("flag"),
        }
    }
}

impl Serialize for Provenance {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldProvenance {
    pub gamma_s: Provenance,
    pub gamma_l: Provenance,
    pub delta_m: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedParams {
    #[serde(flatten)]
    pub params: ParameterSet,
    pub provenance: FieldProvenance,
}

#[derive(Debug, Clone, Default)]
pub struct ParamSources<'a> {
    pub file: Option<&'a Path>,
    pub env: Option<&'a Path>,
    pub flags: PartialParams,
}

fn overlay(
    layer: &PartialParams,
    source: &Provenance,
    params: &mut ParameterSet,
    prov: &mut FieldProvenance,
) {
    if let Some(v) = layer.gamma_s {
        params.gamma_s = v;
        prov.gamma_s = source.clone();
    }
    if let Some(v) = layer.gamma_l {
        params.gamma_l = v;
        prov.gamma_l = source.clone();
    }
    if let Some(v) = layer.delta_m {
        params.delta_m = v;
        prov.delta_m = source.clone();
    }
}

pub fn resolve_params(sources: &ParamSources<'_>) -> Result<ResolvedParams, ParamError> {
    let mut params = default_params();
    let mut prov = FieldProvenance {
        gamma_s: Provenance::Default,
        gamma_l: Provenance::Default,
        delta_m: Provenance::Default,
    };
    if let Some(path) = sources.file {
        let layer = PartialParams::read(path)?;
        overlay(
            &layer,
            &Provenance::File(path.to_path_buf()),
            &mut params,
            &mut prov,
        );
    }
    if let Some(path) = sources.env {
        let layer = PartialParams::read(path)?;
        overlay(
            &layer,
            &Provenance::Env(path.to_path_buf()),
            &mut params,
            &mut prov,
        );
    }
    overlay(&sources.flags, &Provenance::Flag, &mut params, &mut prov);
    Ok(ResolvedParams {
        params: validate(params)?,
        provenance: prov,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn cfg(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn defaults_only() {
        let r = resolve_params(&ParamSources::default()).unwrap();
        assert_eq!(r.params, default_params());
        assert_eq!(r.provenance.delta_m, Provenance::Default);
        assert_eq!(r.provenance.gamma_s.to_string(), "default");
    }

    #[test]
    fn precedence_flag_env_file_default() {
        let file = cfg("gamma_l = 0.0\ndelta_m = 0.1\ngamma_s = 2.0\n");
        let env = cfg("delta_m = 0.2\ngamma_l = 0.01\n");
        let flags = PartialParams {
            delta_m: Some(0.0),
            ..Default::default()
        };
        let r = resolve_params(&ParamSources {
            file: Some(file.path()),
            env: Some(env.path()),
            flags,
        })
        .unwrap();
        assert_eq!(r.params.gamma_s, 2.0);
        assert_eq!(r.params.gamma_l, 0.01);
        assert_eq!(r.params.delta_m, 0.0);
        assert_eq!(r.provenance.gamma_s, Provenance::File(file.path().into()));
        assert_eq!(r.provenance.gamma_l, Provenance::Env(env.path().into()));
        assert_eq!(r.provenance.delta_m, Provenance::Flag);
        assert!(r.provenance.gamma_l.to_string().starts_with("env:"));
    }

    #[test]
    fn merged_values_are_validated() {
        let flags = PartialParams {
            gamma_l: Some(5.0),
            ..Default::default()
        };
        let err = resolve_params(&ParamSources {
            flags,
            ..Default::default()
        })
        .unwrap_err();
        assert!(matches!(err, ParamError::OrderedWidth { .. }));
    }
}
