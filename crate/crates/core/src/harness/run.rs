//! Command implementations behind the CLI: train, eval, heatmap.
//!
//! Training writes three artifacts into the output directory: a live
//! `metrics.csv`, a `config.txt` fingerprint, and a `checkpoint.bin`
//! refreshed after every epoch. Resuming restores parameters, optimizer
//! moments, and step counters exactly; the replay buffer refills from
//! empty and the exploration streams restart, which perturbs the rollout
//! sequence but not the learning setup.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::combat::{self, CombatAction, CombatState, Outcome};
use crate::env::nav;
use crate::error::{Error, Result};
use crate::harness::checkpoint::Checkpoint;
use crate::harness::config::{EnvKind, ModelKind, RunConfig};
use crate::harness::heatmap::{write_matrix_text, write_pgm, write_ppm};
use crate::harness::metrics::{format_row_for_stdout, CsvWriter};
use crate::model::{
    DenseBaseline, DqnBaseline, ImageQNet, MultiManet, NoCommBaseline, SingleManet, TeamQNet,
};
use crate::nn::tensor::Tensor;
use crate::nn::Tape;
use crate::rl::{
    epsilon_greedy, evaluate_combat, evaluate_nav, greedy, sub_seed, CombatTrainer, NavTrainer,
};

const INIT_TAG: u64 = 5;

fn init_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(seed, INIT_TAG))
}

#[derive(Clone, Debug)]
pub struct TrainArgs {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub resume: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct EvalArgs {
    pub checkpoint: PathBuf,
    pub episodes: u32,
    pub epsilon: f64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct HeatmapArgs {
    pub checkpoint: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub episodes: u32,
}

pub fn load_config(args: &TrainArgs) -> Result<RunConfig> {
    let text = fs::read_to_string(&args.config).map_err(|e| Error::io(&args.config, e))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(seed) = args.seed {
        cfg.train.seed = seed;
    }
    Ok(cfg)
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let cfg = load_config(args)?;
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let fingerprint = args.out.join("config.txt");
    fs::write(&fingerprint, cfg.dump()).map_err(|e| Error::io(&fingerprint, e))?;
    let mut rng = init_rng(cfg.train.seed);
    match (cfg.env, cfg.model) {
        (EnvKind::Nav, ModelKind::Manet | ModelKind::SingleAttention) => {
            let model = SingleManet::new(cfg.single_config()?, &mut rng)?;
            train_nav(&cfg, model, args)
        }
        (EnvKind::Nav, ModelKind::Dqn) => {
            let model = DqnBaseline::new(
                [nav::IMAGE_SIDE, nav::IMAGE_SIDE, nav::CHANNELS],
                &cfg.dqn_hidden,
                nav::NUM_ACTIONS,
                &mut rng,
            )?;
            train_nav(&cfg, model, args)
        }
        (EnvKind::Combat, ModelKind::Manet) => {
            let model = MultiManet::new(cfg.multi_config()?, &mut rng)?;
            train_combat(&cfg, model, args)
        }
        (EnvKind::Combat, ModelKind::NoComm) => {
            let model = NoCommBaseline::new(cfg.multi_config()?, &mut rng)?;
            train_combat(&cfg, model, args)
        }
        (EnvKind::Combat, ModelKind::Dense) => {
            let model = DenseBaseline::new(
                combat::TEAM_SIZE,
                combat::OBS_LEN,
                &cfg.dense_hidden,
                combat::NUM_ACTIONS,
                &mut rng,
            )?;
            train_combat(&cfg, model, args)
        }
        (env, model) => Err(Error::Config(format!(
            "model {} is not available for env {}",
            model.name(),
            env.name()
        ))),
    }
}

fn train_nav<M: ImageQNet>(cfg: &RunConfig, model: M, args: &TrainArgs) -> Result<()> {
    let mut trainer = NavTrainer::new(cfg.train.clone(), model)?;
    let csv_path = args.out.join("metrics.csv");
    let mut csv = if let Some(resume) = &args.resume {
        let ck = Checkpoint::load(resume)?;
        check_same_setup(&ck, cfg)?;
        ck.apply_to(trainer.model_mut().params_mut())?;
        trainer.restore(ck.global_step, ck.epoch, ck.opt_step, ck.first_moments, ck.second_moments)?;
        CsvWriter::append(&csv_path)?
    } else {
        CsvWriter::create(&csv_path)?
    };
    let ck_path = args.out.join("checkpoint.bin");
    while trainer.epoch() < cfg.epochs {
        let m = trainer.run_epoch()?;
        csv.write_row(&m)?;
        println!("{}", format_row_for_stdout(&m));
        Checkpoint::capture(
            cfg.dump(),
            trainer.global_step(),
            trainer.epoch(),
            trainer.model().params(),
            trainer.optimizer(),
        )
        .save(&ck_path)?;
    }
    Ok(())
}

fn train_combat<M: TeamQNet>(cfg: &RunConfig, model: M, args: &TrainArgs) -> Result<()> {
    let mut trainer = CombatTrainer::new(cfg.train.clone(), model, cfg.raw_observations)?;
    let csv_path = args.out.join("metrics.csv");
    let mut csv = if let Some(resume) = &args.resume {
        let ck = Checkpoint::load(resume)?;
        check_same_setup(&ck, cfg)?;
        ck.apply_to(trainer.model_mut().params_mut())?;
        trainer.restore(ck.global_step, ck.epoch, ck.opt_step, ck.first_moments, ck.second_moments)?;
        CsvWriter::append(&csv_path)?
    } else {
        CsvWriter::create(&csv_path)?
    };
    let ck_path = args.out.join("checkpoint.bin");
    while trainer.epoch() < cfg.epochs {
        let m = trainer.run_epoch()?;
        csv.write_row(&m)?;
        println!("{}", format_row_for_stdout(&m));
        Checkpoint::capture(
            cfg.dump(),
            trainer.global_step(),
            trainer.epoch(),
            trainer.model().params(),
            trainer.optimizer(),
        )
        .save(&ck_path)?;
    }
    Ok(())
}

/// `epochs` is a stop condition, not part of the learning setup; raising
/// it is the whole point of resuming. Everything else must match.
fn check_same_setup(ck: &Checkpoint, cfg: &RunConfig) -> Result<()> {
    let strip = |text: &str| -> String {
        text.lines().filter(|l| !l.starts_with("epochs =")).collect::<Vec<_>>().join("\n")
    };
    if strip(&ck.config_text) != strip(&cfg.dump()) {
        return Err(Error::Config(
            "resume checkpoint was produced by a different configuration".into(),
        ));
    }
    Ok(())
}

/// Rebuild the model a checkpoint was trained with. Initial weights come
/// from the recorded seed and are then overwritten by the stored values.
fn rebuild(ck: &Checkpoint) -> Result<(RunConfig, RebuiltModel)> {
    let cfg = RunConfig::parse(&ck.config_text)?;
    let mut rng = init_rng(cfg.train.seed);
    let model = match (cfg.env, cfg.model) {
        (EnvKind::Nav, ModelKind::Manet | ModelKind::SingleAttention) => {
            let mut m = SingleManet::new(cfg.single_config()?, &mut rng)?;
            ck.apply_to(m.params_mut())?;
            RebuiltModel::NavAttention(m)
        }
        (EnvKind::Nav, ModelKind::Dqn) => {
            let mut m = DqnBaseline::new(
                [nav::IMAGE_SIDE, nav::IMAGE_SIDE, nav::CHANNELS],
                &cfg.dqn_hidden,
                nav::NUM_ACTIONS,
                &mut rng,
            )?;
            ck.apply_to(m.params_mut())?;
            RebuiltModel::NavPlain(m)
        }
        (EnvKind::Combat, ModelKind::Manet) => {
            let mut m = MultiManet::new(cfg.multi_config()?, &mut rng)?;
            ck.apply_to(m.params_mut())?;
            RebuiltModel::TeamAttention(m)
        }
        (EnvKind::Combat, ModelKind::NoComm) => {
            let mut m = NoCommBaseline::new(cfg.multi_config()?, &mut rng)?;
            ck.apply_to(m.params_mut())?;
            RebuiltModel::TeamPlain(m)
        }
        (EnvKind::Combat, ModelKind::Dense) => {
            let mut m = DenseBaseline::new(
                combat::TEAM_SIZE,
                combat::OBS_LEN,
                &cfg.dense_hidden,
                combat::NUM_ACTIONS,
                &mut rng,
            )?;
            ck.apply_to(m.params_mut())?;
            RebuiltModel::TeamDense(m)
        }
        (env, model) => {
            return Err(Error::Config(format!(
                "model {} is not available for env {}",
                model.name(),
                env.name()
            )))
        }
    };
    Ok((cfg, model))
}

pub enum RebuiltModel {
    NavAttention(SingleManet),
    NavPlain(DqnBaseline),
    TeamAttention(MultiManet),
    TeamPlain(NoCommBaseline),
    TeamDense(DenseBaseline),
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let ck = Checkpoint::load(&args.checkpoint)?;
    let (cfg, model) = rebuild(&ck)?;
    let summary = match &model {
        RebuiltModel::NavAttention(m) => evaluate_nav(m, args.seed, args.episodes, args.epsilon)?,
        RebuiltModel::NavPlain(m) => evaluate_nav(m, args.seed, args.episodes, args.epsilon)?,
        RebuiltModel::TeamAttention(m) => {
            evaluate_combat(m, cfg.raw_observations, args.seed, args.episodes, args.epsilon)?
        }
        RebuiltModel::TeamPlain(m) => {
            evaluate_combat(m, cfg.raw_observations, args.seed, args.episodes, args.epsilon)?
        }
        RebuiltModel::TeamDense(m) => {
            evaluate_combat(m, cfg.raw_observations, args.seed, args.episodes, args.epsilon)?
        }
    };
    match summary.win_rate {
        Some(w) => println!(
            "episodes={} mean_score={} win_rate={} threshold={} met={}",
            args.episodes,
            summary.mean_score,
            w,
            cfg.threshold,
            w > cfg.threshold
        ),
        None => println!(
            "episodes={} mean_score={} threshold={} met={}",
            args.episodes,
            summary.mean_score,
            cfg.threshold,
            summary.mean_score > cfg.threshold
        ),
    }
    Ok(())
}

pub fn cmd_heatmap(args: &HeatmapArgs) -> Result<()> {
    let ck = Checkpoint::load(&args.checkpoint)?;
    let (cfg, model) = rebuild(&ck)?;
    if !cfg.model.has_attention() {
        return Err(Error::Usage(format!(
            "model {} has no attention weights to visualize",
            cfg.model.name()
        )));
    }
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    match &model {
        RebuiltModel::NavAttention(m) => {
            let steps = trace_nav_episode(m, args.seed, &args.out)?;
            let (rate, counted) =
                attention_match_rate(m, args.seed, args.episodes, cfg.train.eval_epsilon)?;
            println!(
                "traced_steps={steps} attention_match_rate={rate} episodes={} steps_counted={counted}",
                args.episodes
            );
        }
        RebuiltModel::TeamAttention(m) => {
            let (steps, outcome) = trace_combat_episode(m, cfg.raw_observations, args.seed, &args.out)?;
            println!("traced_steps={steps} outcome={outcome:?}");
        }
        _ => unreachable!("has_attention models are attention variants"),
    }
    Ok(())
}

/// One greedy navigation episode; per step, a PPM of the rendered board
/// and per attention layer a PGM over the 8x8 patch grid plus the exact
/// weights as text.
fn trace_nav_episode(model: &SingleManet, seed: u64, out: &Path) -> Result<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = nav::reset(&mut rng);
    let mut steps = 0u32;
    loop {
        let obs = nav::render(&state);
        write_ppm(&out.join(format!("step{steps:03}_frame.ppm")), &obs, 4)?;
        let mut tape = Tape::new();
        let (q, attn) = model.forward_one(&mut tape, &obs)?;
        let attn = attn.expect("attention model always yields weights");
        let weights = tape.value(attn);
        for layer in 0..weights.rows() {
            let grid = Tensor::new(&[nav::GRID, nav::GRID], weights.row_slice(layer).to_vec());
            write_pgm(&out.join(format!("step{steps:03}_focus{layer}.pgm")), &grid, 16)?;
            write_matrix_text(&out.join(format!("step{steps:03}_focus{layer}.txt")), &grid)?;
        }
        let action = greedy(tape.value(q).row_slice(0));
        let (next, _, done) = nav::step(&state, nav::NavAction::from_index(action)?)?;
        state = next;
        steps += 1;
        if done {
            break;
        }
    }
    Ok(steps)
}

/// Fraction of evaluation steps in which the set of per-layer attention
/// argmax cells equals {agent cell, next waypoint cell}. Returns the rate
/// and how many steps were counted.
pub fn attention_match_rate(
    model: &SingleManet,
    seed: u64,
    episodes: u32,
    epsilon: f64,
) -> Result<(f64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matched = 0u64;
    let mut counted = 0u64;
    for _ in 0..episodes {
        let mut state = nav::reset(&mut rng);
        loop {
            let obs = nav::render(&state);
            let mut tape = Tape::new();
            let (q, attn) = model.forward_one(&mut tape, &obs)?;
            let attn = attn.expect("attention model always yields weights");
            let weights = tape.value(attn);
            let mut argmaxes: Vec<usize> =
                (0..weights.rows()).map(|r| greedy(weights.row_slice(r))).collect();
            argmaxes.sort_unstable();
            argmaxes.dedup();
            let agent_cell = state.agent.row as usize * nav::GRID + state.agent.col as usize;
            let wp = state.next_waypoint().expect("non-terminal state has a next waypoint");
            let wp_cell =
                state.waypoints[wp].row as usize * nav::GRID + state.waypoints[wp].col as usize;
            let mut expect = [agent_cell, wp_cell];
            expect.sort_unstable();
            if argmaxes == expect {
                matched += 1;
            }
            counted += 1;
            let action = epsilon_greedy(&mut rng, epsilon, tape.value(q).row_slice(0));
            let (next, _, done) = nav::step(&state, nav::NavAction::from_index(action)?)?;
            state = next;
            if done {
                break;
            }
        }
    }
    Ok((matched as f64 / counted as f64, counted))
}

/// Board snapshot as a [rows, cols, 3] image: model team in green, bots
/// in red, brightness by remaining health.
fn combat_frame(state: &CombatState) -> Tensor {
    let side = combat::GRID as usize;
    let mut img = Tensor::zeros(&[side, side, 3]);
    for (team_channel, units) in [(1usize, &state.model), (0usize, &state.bots)] {
        for u in units.iter().filter(|u| u.alive()) {
            let base = (u.row as usize * side + u.col as usize) * 3;
            img.data_mut()[base + team_channel] = u.health as f64 / combat::MAX_HEALTH as f64;
        }
    }
    img
}

/// One greedy combat episode; per step, the board frame and the 5x5
/// agent-to-agent attention matrix.
fn trace_combat_episode(
    model: &MultiManet,
    raw: bool,
    seed: u64,
    out: &Path,
) -> Result<(u32, Outcome)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = combat::reset(&mut rng);
    let mut steps = 0u32;
    loop {
        write_ppm(&out.join(format!("step{steps:03}_frame.ppm")), &combat_frame(&state), 16)?;
        let obs = combat::observe_team(&state, raw);
        let mut tape = Tape::new();
        let (q, attn) = model.forward_one(&mut tape, &obs)?;
        let attn = attn.expect("attention model always yields weights");
        write_pgm(&out.join(format!("step{steps:03}_comm.pgm")), tape.value(attn), 32)?;
        write_matrix_text(&out.join(format!("step{steps:03}_comm.txt")), tape.value(attn))?;
        let mut actions = [CombatAction::Noop; combat::TEAM_SIZE];
        for slot in 0..combat::TEAM_SIZE {
            if state.model[slot].alive() {
                actions[slot] = CombatAction::from_index(greedy(tape.value(q).row_slice(slot)))?;
            }
        }
        let (next, _, done, outcome) = combat::step(&state, actions, &mut rng)?;
        state = next;
        steps += 1;
        if done {
            return Ok((steps, outcome));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(dir: &Path, text: &str) -> PathBuf {
        let path = dir.join("run.cfg");
        fs::write(&path, text).unwrap();
        path
    }

    fn tiny_nav_text(model: &str) -> String {
        format!(
            "env = nav\nmodel = {model}\nseed = 5\nepochs = 1\nsteps_per_epoch = 12\n\
             warmup_steps = 4\nbatch_size = 2\nreplay_capacity = 64\neval_episodes = 1\n\
             epsilon_decay_steps = 10\nfeature_hidden = 6\nkey_width = 4\nvalue_width = 4\n\
             q_hidden = 8\ndqn_hidden = 8\n"
        )
    }

    fn tiny_combat_text(model: &str) -> String {
        format!(
            "env = combat\nmodel = {model}\nseed = 5\nepochs = 1\nsteps_per_epoch = 10\n\
             warmup_steps = 4\nbatch_size = 2\nreplay_capacity = 64\neval_episodes = 1\n\
             epsilon_decay_steps = 10\nfeature_hidden = 8\nkey_width = 4\nvalue_width = 6\n\
             q_hidden = 8\ndense_hidden = 8\n"
        )
    }

    #[test]
    fn train_writes_metrics_config_and_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        let args = TrainArgs {
            config: write_config(dir.path(), &tiny_nav_text("manet")),
            out: dir.path().join("out"),
            seed: None,
            resume: None,
        };
        cmd_train(&args).unwrap();
        let csv = fs::read_to_string(args.out.join("metrics.csv")).unwrap();
        assert!(csv.starts_with("epoch,global_steps,mean_score,win_rate,mean_loss,epsilon\n"));
        assert_eq!(csv.lines().count(), 2);
        assert!(args.out.join("checkpoint.bin").exists());
        assert!(args.out.join("config.txt").exists());
    }

    #[test]
    fn reruns_with_the_same_seed_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path(), &tiny_combat_text("manet"));
        let run = |out: PathBuf| {
            cmd_train(&TrainArgs { config: config.clone(), out: out.clone(), seed: None, resume: None })
                .unwrap();
            fs::read_to_string(out.join("metrics.csv")).unwrap()
        };
        let a = run(dir.path().join("a"));
        let b = run(dir.path().join("b"));
        assert_eq!(a, b);
    }

    #[test]
    fn seed_override_changes_the_run() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path(), &tiny_nav_text("dqn"));
        let run = |out: PathBuf, seed: Option<u64>| {
            cmd_train(&TrainArgs { config: config.clone(), out: out.clone(), seed, resume: None }).unwrap();
            fs::read_to_string(out.join("metrics.csv")).unwrap()
        };
        let base = run(dir.path().join("a"), None);
        let same = run(dir.path().join("b"), Some(5));
        let other = run(dir.path().join("c"), Some(6));
        assert_eq!(base, same, "explicit seed equal to the config seed");
        assert_ne!(base, other);
    }

    #[test]
    fn eval_reproduces_after_checkpoint_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let args = TrainArgs {
            config: write_config(dir.path(), &tiny_combat_text("nocomm")),
            out: dir.path().join("out"),
            seed: None,
            resume: None,
        };
        cmd_train(&args).unwrap();
        let ck = Checkpoint::load(&args.out.join("checkpoint.bin")).unwrap();
        let (cfg, model) = rebuild(&ck).unwrap();
        let RebuiltModel::TeamPlain(m) = model else { panic!("wrong model kind") };
        let a = evaluate_combat(&m, cfg.raw_observations, 42, 2, 0.05).unwrap();
        let b = evaluate_combat(&m, cfg.raw_observations, 42, 2, 0.05).unwrap();
        assert_eq!(a.mean_score.to_bits(), b.mean_score.to_bits());
    }

    #[test]
    fn resume_continues_to_the_requested_epochs() {
        let dir = tempfile::tempdir().unwrap();
        let mut text = tiny_nav_text("manet");
        text.push_str("update_every = 3\n");
        let config = write_config(dir.path(), &text);
        let out = dir.path().join("out");
        cmd_train(&TrainArgs { config: config.clone(), out: out.clone(), seed: None, resume: None })
            .unwrap();

        // Raise the epoch budget, then resume from the epoch-1 checkpoint.
        let more = fs::read_to_string(&config).unwrap().replace("epochs = 1", "epochs = 2");
        fs::write(&config, more).unwrap();
        cmd_train(&TrainArgs {
            config,
            out: out.clone(),
            seed: None,
            resume: Some(out.join("checkpoint.bin")),
        })
        .unwrap();
        let csv = fs::read_to_string(out.join("metrics.csv")).unwrap();
        assert_eq!(csv.lines().count(), 3, "header plus one row per epoch");
        let ck = Checkpoint::load(&out.join("checkpoint.bin")).unwrap();
        assert_eq!(ck.epoch, 2);
    }

    #[test]
    fn resume_rejects_a_different_configuration() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path(), &tiny_nav_text("manet"));
        let out = dir.path().join("out");
        cmd_train(&TrainArgs { config: config.clone(), out: out.clone(), seed: None, resume: None })
            .unwrap();
        let other = write_config(dir.path(), &tiny_nav_text("single"));
        let err = cmd_train(&TrainArgs {
            config: other,
            out: dir.path().join("out2"),
            seed: None,
            resume: Some(out.join("checkpoint.bin")),
        })
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn heatmap_writes_frames_and_focus_maps() {
        let dir = tempfile::tempdir().unwrap();
        let args = TrainArgs {
            config: write_config(dir.path(), &tiny_nav_text("manet")),
            out: dir.path().join("out"),
            seed: None,
            resume: None,
        };
        cmd_train(&args).unwrap();
        let maps = dir.path().join("maps");
        cmd_heatmap(&HeatmapArgs {
            checkpoint: args.out.join("checkpoint.bin"),
            out: maps.clone(),
            seed: 3,
            episodes: 1,
        })
        .unwrap();
        for name in ["step000_frame.ppm", "step000_focus0.pgm", "step000_focus1.pgm", "step000_focus0.txt"] {
            assert!(maps.join(name).exists(), "missing {name}");
        }
    }

    #[test]
    fn heatmap_refuses_attention_free_models() {
        let dir = tempfile::tempdir().unwrap();
        let args = TrainArgs {
            config: write_config(dir.path(), &tiny_nav_text("dqn")),
            out: dir.path().join("out"),
            seed: None,
            resume: None,
        };
        cmd_train(&args).unwrap();
        let err = cmd_heatmap(&HeatmapArgs {
            checkpoint: args.out.join("checkpoint.bin"),
            out: dir.path().join("maps"),
            seed: 0,
            episodes: 1,
        })
        .unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn match_rate_is_a_probability_over_counted_steps() {
        let mut rng = init_rng(3);
        let mut cfg = crate::model::SingleManetConfig::nav_default();
        cfg.feature_hidden = 6;
        cfg.key_width = 4;
        cfg.value_width = 4;
        cfg.q_hidden = 8;
        let model = SingleManet::new(cfg, &mut rng).unwrap();
        let (rate, steps) = attention_match_rate(&model, 1, 2, 0.05).unwrap();
        assert!((0.0..=1.0).contains(&rate));
        assert!(steps >= 2, "at least one step per episode");
    }
}
