//! `extract` hands image feature extraction to an external program.
//!
//! The program is taken from `RANDNET_EXTRACTOR` if set, otherwise
//! `randnet-extract` on `PATH`. It receives the flags below unchanged plus
//! anything after `--`.

use std::env;
use std::ffi::OsString;
use std::path::PathBuf;
use std::process::Command;

use clap::Args;
use thiserror::Error;

pub const EXTRACTOR_ENV: &str = "RANDNET_EXTRACTOR";
pub const EXTRACTOR_PROGRAM: &str = "randnet-extract";

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("extractor not installed: set {EXTRACTOR_ENV} or put `{EXTRACTOR_PROGRAM}` on PATH")]
    NotInstalled,
    #[error("extractor not installed: {EXTRACTOR_ENV} points at {0}, which does not exist")]
    MissingOverride(PathBuf),
    #[error("cannot start extractor {path}: {source}")]
    Spawn {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("extractor {path} failed ({status})")]
    Failed { path: PathBuf, status: String },
}

#[derive(Args)]
pub struct ExtractArgs {
    /// Image root with one subfolder per class.
    #[arg(long)]
    images: PathBuf,
    /// Dataset output path (`.csv` or binary).
    #[arg(long)]
    out: PathBuf,
    /// Fine-tune the backbone before extracting.
    #[arg(long)]
    finetune: bool,
    /// Fine-tuning mini-batch size.
    #[arg(long, default_value_t = 10)]
    batch_size: u32,
    /// Fine-tuning epochs.
    #[arg(long, default_value_t = 1)]
    epochs: u32,
    /// Fine-tuning learning rate.
    #[arg(long, default_value_t = 1e-4)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Passed through to the extractor verbatim.
    #[arg(last = true)]
    extra: Vec<OsString>,
}

fn locate() -> Result<PathBuf, ExtractError> {
    if let Some(p) = env::var_os(EXTRACTOR_ENV).filter(|p| !p.is_empty()) {
        let p = PathBuf::from(p);
        return if p.is_file() {
            Ok(p)
        } else {
            Err(ExtractError::MissingOverride(p))
        };
    }
    which::which(EXTRACTOR_PROGRAM).map_err(|_| ExtractError::NotInstalled)
}

fn arguments(a: &ExtractArgs) -> Vec<OsString> {
    let mut args: Vec<OsString> = vec![
        "--images".into(),
        a.images.clone().into(),
        "--out".into(),
        a.out.clone().into(),
        "--batch-size".into(),
        a.batch_size.to_string().into(),
        "--epochs".into(),
        a.epochs.to_string().into(),
        "--lr".into(),
        a.lr.to_string().into(),
        "--seed".into(),
        a.seed.to_string().into(),
    ];
    if a.finetune {
        args.push("--finetune".into());
    }
    args.extend(a.extra.iter().cloned());
    args
}

pub fn run(a: &ExtractArgs) -> Result<(), ExtractError> {
    let path = locate()?;
    let status = Command::new(&path)
        .args(arguments(a))
        .status()
        .map_err(|source| ExtractError::Spawn {
            path: path.clone(),
            source,
        })?;
    if status.success() {
        Ok(())
    } else {
        Err(ExtractError::Failed {
            path,
            status: status.to_string(),
        })
    }
}
