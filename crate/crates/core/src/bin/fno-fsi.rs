use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use fno_fsi::dataset::{eval_input, EvalSet, ExperimentId, Frame, Trajectory};
use fno_fsi::fno::load_checkpoint;
use fno_fsi::harness::{
    evaluate_all, fsi_rollout, generate, load_dataset, load_models, report_from_index, train_experiment,
    PipelineConfig,
};
use fno_fsi::mesh::write_off;

#[derive(Parser)]
#[command(name = "fno-fsi", version, about = "Vesicle FSI ground truth, FNO surrogate training and evaluation")]
struct Cli {
    /// Pipeline configuration (JSON).
    #[arg(long, global = true, default_value = "configs/desk.json")]
    config: PathBuf,
    /// Seed for initialization and batch shuffling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Suppress progress lines on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate every configured vesicle and write the trajectories.
    GenData,
    /// Train one experiment (or all four).
    Train {
        #[arg(long, value_parser = parse_experiment_arg)]
        experiment: Target,
    },
    /// Roll a trained model out from an evaluation set.
    Predict {
        #[arg(long, value_parser = parse_set)]
        set: EvalSet,
        #[arg(long, default_value = "fno4", value_parser = parse_experiment)]
        experiment: ExperimentId,
    },
    /// Drive the vesicle with a model's predictions.
    Fsi {
        #[arg(long, default_value = "inter", value_parser = parse_set)]
        set: EvalSet,
        #[arg(long, default_value = "fno4", value_parser = parse_experiment)]
        experiment: ExperimentId,
    },
    /// Evaluate all trained models on all sets and write the report bundle.
    Evaluate,
    /// Rebuild the ordering summary from an existing evaluation.
    Report,
}

#[derive(Clone, Copy)]
enum Target {
    One(ExperimentId),
    All,
}

fn parse_experiment(s: &str) -> Result<ExperimentId, String> {
    s.parse().map_err(|e: fno_fsi::Error| e.to_string())
}

fn parse_experiment_arg(s: &str) -> Result<Target, String> {
    if s == "all" {
        Ok(Target::All)
    } else {
        parse_experiment(s).map(Target::One)
    }
}

fn parse_set(s: &str) -> Result<EvalSet, String> {
    s.parse().map_err(|e: fno_fsi::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = PipelineConfig::load(&cli.config).with_context(|| format!("loading {}", cli.config.display()))?;
    let progress = !cli.quiet;
    match cli.command {
        Command::GenData => {
            let g = generate(&cfg, progress)?;
            println!("wrote {}", g.manifest.display());
            if !g.failures.is_empty() {
                for (id, e) in &g.failures {
                    eprintln!("{id}: {e}");
                }
                bail!("{} of {} simulations failed; partial trajectories kept", g.failures.len(), cfg.vesicles.len());
            }
        }
        Command::Train { experiment } => {
            let data = load_dataset(&cfg)?;
            let ids = match experiment {
                Target::One(id) => vec![id],
                Target::All => ExperimentId::ALL.to_vec(),
            };
            for id in ids {
                let t = train_experiment(&cfg, &data, id, cli.seed, progress)?;
                let best = t.report.best_epoch.map(|e| t.report.history[e]);
                println!(
                    "{id}: {} samples, {} epochs, best loss {}  -> {}",
                    t.samples,
                    t.report.history.len(),
                    best.map_or("n/a".to_string(), |l| format!("{l:.6}")),
                    t.checkpoint.display()
                );
            }
        }
        Command::Predict { set, experiment } => {
            let data = load_dataset(&cfg)?;
            let model = load_checkpoint(&cfg.checkpoint_path(experiment))?;
            let v = data.get(&cfg.eval.vesicle)?;
            let r = fsi_rollout(&model, &v.trajectory, &v.mesh, set, &cfg.eval.sets, cfg.flow.rate)?;
            let ev = eval_input(&v.trajectory, set, &cfg.eval.sets, model.config().in_steps)?;
            let dir = cfg.report_dir();
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let tag = format!("{}_{}", experiment.slug(), set.slug());
            let mut out = Trajectory::new(v.trajectory.n(), v.mesh.vertex_count(), v.trajectory.dt_record(), v.trajectory.reversal_frame());
            for (frame, mesh) in r.rollout.frames.iter().zip(&r.meshes[1..]) {
                out.push(Frame {
                    velocity: frame.iter().map(|&x| x as f32).collect(),
                    positions: mesh.vertices().iter().flatten().map(|&x| x as f32).collect(),
                })?;
            }
            let path = dir.join(format!("predict_{tag}.vfsi"));
            out.save(&path)?;
            println!("step,mae_x,rel_l2");
            for (h, (m, e)) in r.rollout.mae_x.iter().zip(&r.rollout.rel_l2).enumerate() {
                println!("{},{m},{e}", h + 1);
            }
            eprintln!(
                "{experiment} on {set}: inputs {:?}, {} invocations, wrote {}",
                ev.inputs,
                r.rollout.invocations,
                path.display()
            );
        }
        Command::Fsi { set, experiment } => {
            let data = load_dataset(&cfg)?;
            let model = load_checkpoint(&cfg.checkpoint_path(experiment))?;
            let v = data.get(&cfg.eval.vesicle)?;
            let r = fsi_rollout(&model, &v.trajectory, &v.mesh, set, &cfg.eval.sets, cfg.flow.rate)?;
            let dir = cfg.report_dir();
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(format!("fsi_{}_{}.off", experiment.slug(), set.slug()));
            write_off(r.meshes.last().expect("initial mesh"), &path)?;
            println!("step,vesicle_mean_err,ibm_vesicle_mean_err");
            for (h, (a, b)) in r.vesicle_err.iter().zip(&r.baseline_err).enumerate() {
                println!("{},{a},{b}", h + 1);
            }
            eprintln!("final mesh written to {}", path.display());
        }
        Command::Evaluate => {
            let data = load_dataset(&cfg)?;
            let models = load_models(&cfg)?;
            if models.iter().all(|(_, m)| m.is_none()) {
                bail!("no trained models in {}; run train first", cfg.model_dir().display());
            }
            for (id, m) in &models {
                if m.is_none() {
                    eprintln!("warning: {id} has no checkpoint; its rows are marked absent");
                }
            }
            let report = evaluate_all(&cfg, &data, &models)?;
            print!("{}", fno_fsi::harness::summary_text(&report.checks));
            println!("report written to {} ({} files)", report.dir.display(), report.files.len());
        }
        Command::Report => {
            let (path, summary) = report_from_index(&cfg)?;
            print!("{summary}");
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}
