//! Library half of the `chaoslab` command: config parsing, the verification
//! battery and the convergence experiments. `main.rs` only wires these to
//! the command line.

pub mod config;
pub mod run;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind};
pub use run::{
    battery, fmt_float, run_gamma, run_normal, run_spectral, run_verify, spectral_rows, RunError,
    RunOutput, GAMMA_HEADER, NORMAL_HEADER, SPECTRAL_HEADER,
};

/// Built-in configuration used when `--config` is omitted.
pub fn default_config(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Verify => include_str!("../configs/verify.conf"),
        ExperimentKind::Normal => include_str!("../configs/normal.conf"),
        ExperimentKind::Gamma => include_str!("../configs/gamma.conf"),
        ExperimentKind::Spectral => include_str!("../configs/spectral.conf"),
    }
}

/// Seed precedence: `--seed`, then `CHAOSLAB_SEED`, then the config, then 0.
pub fn resolve_seed(
    flag: Option<u64>,
    env: Option<&str>,
    cfg: &ExperimentConfig,
) -> Result<u64, ConfigError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(text) = env {
        return text
            .trim()
            .parse()
            .map_err(|_| ConfigError::general(format!("CHAOSLAB_SEED is not a u64: `{text}`")));
    }
    Ok(cfg.seed.unwrap_or(0))
}

/// Parses `text` and runs `kind`.
pub fn execute(kind: ExperimentKind, cfg: &ExperimentConfig, seed: u64) -> Result<RunOutput, RunError> {
    if let Some(declared) = cfg.kind {
        if declared != kind {
            return Err(RunError::Config(cfg.error(
                "kind",
                format!("config is for `{declared}`, not `{kind}`"),
            )));
        }
    }
    match kind {
        ExperimentKind::Verify => run_verify(cfg, seed),
        ExperimentKind::Normal => run_normal(cfg, seed),
        ExperimentKind::Gamma => run_gamma(cfg, seed),
        ExperimentKind::Spectral => run_spectral(cfg),
    }
}
