#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fno_fsi::dataset::FrameRange;
use fno_fsi::harness::{PipelineConfig, VesicleRole};

pub const BIN: &str = env!("CARGO_BIN_EXE_fno-fsi");

/// Desk profile shrunk to seconds of runtime: 8^3 grid, 30 frames, tiny
/// operator, two epochs.
pub fn mini_config() -> PipelineConfig {
    let mut cfg = PipelineConfig::desk();
    cfg.grid.n = 8;
    cfg.frames = 30;
    cfg.flow.reversal_frame = 10;
    cfg.vesicles.retain(|v| v.role == VesicleRole::Train);
    cfg.fno.modes = 2;
    cfg.fno.width = 4;
    cfg.fno.layers = 1;
    cfg.fno.proj_width = 8;
    cfg.training.epochs = 2;
    cfg.ranges.without_steady_state = FrameRange::new(10, 8);
    cfg.ranges.with_steady_state = FrameRange::new(10, 14);
    cfg.eval.sets.inter = 12;
    cfg.eval.sets.mix = 16;
    cfg.eval.sets.extra = 20;
    cfg.eval.sets.horizon = 4;
    cfg
}

/// Write `cfg` as `config.json` in `dir`, with outputs under `dir`.
pub fn write_config(dir: &Path, cfg: &PipelineConfig) -> PathBuf {
    let mut cfg = cfg.clone();
    cfg.paths.data_dir = "data".into();
    cfg.paths.model_dir = "models".into();
    cfg.paths.report_dir = "report".into();
    let path = dir.join("config.json");
    cfg.save(&path).unwrap();
    path
}

pub fn run(config: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--config")
        .arg(config)
        .arg("--quiet")
        .args(args)
        .output()
        .expect("spawn fno-fsi")
}

pub fn run_ok(config: &Path, args: &[&str]) -> Output {
    let out = run(config, args);
    assert!(
        out.status.success(),
        "fno-fsi {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}
