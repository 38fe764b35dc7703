//! Run manifests: enough to re-run a command and get the same bytes back.

use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use kaonbell::ParameterSet;

use crate::{Cli, CliError, Command, Rendered};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: Option<String>,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// The command line as typed.
    pub command: Vec<String>,
    /// Self-contained command line that reproduces the output.
    pub replay: Vec<String>,
    /// Parameter file to expose as `$KAONBELL_PARAMS` when replaying.
    pub replay_env: Option<String>,
    pub params: ParameterSet,
    pub provenance: serde_json::Value,
    pub seed: Option<u64>,
    pub status: u8,
    pub output: OutputRecord,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

/// Canonical arguments for `cli`: every parameter and option spelled out,
/// output flags dropped.
pub fn replay_args(cli: &Cli, params: &ParameterSet) -> Vec<String> {
    let g = &cli.global;
    let mut a = vec!["kaonbell".to_string()];
    if let Command::Params = cli.command {
        // provenance is part of this output, so keep the original sources
        if let Some(p) = &g.params {
            a.push(format!("--params={}", p.display()));
        }
        for (flag, v) in [
            ("gamma-s", g.gamma_s),
            ("gamma-l", g.gamma_l),
            ("delta-m", g.delta_m),
        ] {
            if let Some(v) = v {
                a.push(format!("--{flag}={v:?}"));
            }
        }
        a.push("params".into());
        return a;
    }
    a.push(format!("--gamma-s={:?}", params.gamma_s));
    a.push(format!("--gamma-l={:?}", params.gamma_l));
    a.push(format!("--delta-m={:?}", params.delta_m));
    a.push(format!("--seed={}", g.seed));
    match &cli.command {
        Command::Curve(c) => {
            a.push("curve".into());
            a.push(value_name(&c.kind));
            a.push(format!("--alpha={:?}", c.alpha));
            a.push(format!("--mode={}", value_name(&c.mode)));
            a.push(format!("--p={:?}", c.p));
            a.push(format!("--from={:?}", c.from));
            a.push(format!("--to={:?}", c.to));
            a.push(format!("--steps={}", c.steps));
        }
        Command::Scan(s) => {
            a.push("scan".into());
            a.push(format!("--objective={}", value_name(&s.objective)));
            a.push(format!("--from={:?}", s.from));
            a.push(format!("--to={:?}", s.to));
            a.push(format!("--tol={:?}", s.tol));
            a.push(format!("--grid={}", s.grid));
            if s.stable {
                a.push("--stable".into());
            }
        }
        Command::Simulate(s) => {
            a.push("simulate".into());
            a.push(format!("--model={}", s.model));
            a.push(format!("--tau1={:?}", s.tau1));
            a.push(format!("--tau2={:?}", s.tau2));
            a.push(format!("--events={}", s.events));
        }
        Command::Params | Command::Replay { .. } => unreachable!(),
    }
    a
}

impl RunManifest {
    pub fn new(cli: &Cli, argv: &[String], env_params: Option<&Path>, rendered: &Rendered) -> Self {
        let replay_env = match cli.command {
            Command::Params => env_params.map(|p| p.display().to_string()),
            _ => None,
        };
        RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: argv.to_vec(),
            replay: replay_args(cli, &rendered.resolved.params),
            replay_env,
            params: rendered.resolved.params,
            provenance: serde_json::to_value(&rendered.resolved.provenance)
                .expect("provenance serializes"),
            seed: matches!(cli.command, Command::Simulate(_)).then_some(cli.global.seed),
            status: rendered.status,
            output: OutputRecord {
                path: cli.global.out.as_ref().map(|p| p.display().to_string()),
                bytes: rendered.bytes.len(),
                sha256: sha256_hex(&rendered.bytes),
            },
        }
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Manifest {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn verify(&self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        let got = sha256_hex(bytes);
        if got == self.output.sha256 {
            Ok(())
        } else {
            Err(CliError::Manifest {
                path: path.to_path_buf(),
                message: format!(
                    "replay checksum {got} differs from recorded {}",
                    self.output.sha256
                ),
            })
        }
    }
}
