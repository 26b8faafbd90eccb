use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lion::checkpoint::{Artifact, Td3bcModel};
use lion::dataset_io::{load_dataset, save_dataset};
use lion::envs::{collect, AnyEnv, EnvConfig, EnvFile};
use lion::reports::{self, TrainLog};
use lion::service::{serve, ServiceConfig};
use lion::threads::Threads;
use lion_core::data::{compute_norm_stats, split, Dataset};
use lion_core::envs::GoalPolicyConfig;
use lion_core::evalsuite::{
    aggregation_report, beta_configs, beta_report, discrete_collection_report, eta_configs, eta_report, lambda_grid,
    lambda_sweep, lambda_td3bc_report, mean_stderr, return_conditioned_report, train_aggregation,
    train_discrete_collection, train_ensemble, train_lambda_td3bc, train_return_conditioned, train_settings,
    user_strategy_env, RvsConfig, SweepConfig, Td3bcConfig,
};
use lion_core::lion::{train_lion_observed, LionPolicy, LionTrainConfig};
use lion_core::models::{train_behavior, Aggregation, BehaviorConfig, BehaviorNet, DynamicsConfig, DynamicsEnsemble, RecurrentConfig};
use lion_core::rng::derive_seed;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "lion", version, about = "Lambda-conditioned offline RL at desk scale")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Collect a goal-policy dataset.
    Collect(CollectArgs),
    /// Dataset utilities.
    Data {
        #[command(subcommand)]
        command: DataCommand,
    },
    /// Train the behavior clone.
    TrainBc(TrainBcArgs),
    /// Train the dynamics ensemble.
    TrainDynamics(TrainDynamicsArgs),
    /// Train the lambda-conditioned policy.
    TrainPolicy(TrainPolicyArgs),
    /// Evaluate a policy over a lambda grid.
    EvalSweep(EvalSweepArgs),
    /// Run the stepwise operator strategy against the true environment.
    Strategy(StrategyArgs),
    /// Independently trained fixed-lambda policies.
    BaselineDiscrete(BaselineDiscreteArgs),
    /// Return-conditioned supervised policy.
    BaselineRvs(BaselineRvsArgs),
    /// Model-free lambda-TD3+BC.
    BaselineTd3bc(BaselineTd3bcArgs),
    /// Offline tuning ablations.
    Ablate {
        #[command(subcommand)]
        command: AblateCommand,
    },
    /// Host deployment sessions over HTTP.
    Serve(ServeArgs),
}

#[derive(Subcommand)]
enum DataCommand {
    /// Load, check and summarize a dataset file.
    Validate { path: PathBuf },
}

#[derive(Subcommand)]
enum AblateCommand {
    /// Symmetric Beta(a, a) lambda sampler.
    Beta(AblateBetaArgs),
    /// Data-anchor weight.
    Eta(AblateEtaArgs),
    /// Ensemble reward aggregation.
    Aggregation(AblateAggregationArgs),
}

#[derive(Args, Clone)]
struct EnvArgs {
    /// Registered environment name.
    #[arg(long, default_value = "world2d")]
    env: String,
    /// TOML environment config; overrides --env.
    #[arg(long)]
    env_config: Option<PathBuf>,
}

impl EnvArgs {
    fn file(&self) -> Result<EnvFile> {
        match &self.env_config {
            Some(p) => Ok(EnvFile::load(p)?),
            None => Ok(EnvFile {
                env: EnvConfig::by_name(&self.env)?,
                data_policy: GoalPolicyConfig::default(),
            }),
        }
    }

    fn build(&self) -> Result<AnyEnv> {
        Ok(self.file()?.env.build()?)
    }
}

#[derive(Args)]
struct CollectArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long, default_value_t = 1000)]
    n_interactions: usize,
    /// Exploration probability of the goal policy (overrides the config file).
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainBcArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    lr_decay: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Min,
    Mean,
    Single,
}

impl From<Mode> for Aggregation {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Min => Aggregation::Min,
            Mode::Mean => Aggregation::Mean,
            Mode::Single => Aggregation::Single,
        }
    }
}

#[derive(Args)]
struct TrainDynamicsArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value_t = 4)]
    ensemble_size: usize,
    #[arg(long, value_enum, default_value = "min")]
    mode: Mode,
    /// Member i uses a seed derived from (seed, i).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.9)]
    split_ratio: f64,
    /// Recurrent members with a tanh cell.
    #[arg(long)]
    recurrent: bool,
    /// Warm-up history length G.
    #[arg(long, default_value_t = 30)]
    history: usize,
    /// Prediction window F.
    #[arg(long, default_value_t = 50)]
    window: usize,
    #[arg(long, default_value_t = 30)]
    cell_size: usize,
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

/// Every [`LionTrainConfig`] field; unset flags keep the defaults.
#[derive(Args, Clone, Default)]
struct LionArgs {
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    beta_a: Option<f64>,
    #[arg(long)]
    beta_b: Option<f64>,
    #[arg(long)]
    updates: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    anchor_batch: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    policy_hidden: Option<Vec<usize>>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    lr_decay: Option<f64>,
    #[arg(long)]
    decay_every: Option<usize>,
    #[arg(long)]
    rollout_chunks: Option<usize>,
    #[arg(long)]
    train_seed: Option<u64>,
}

impl LionArgs {
    fn config(&self) -> LionTrainConfig {
        let d = LionTrainConfig::default();
        LionTrainConfig {
            gamma: self.gamma.unwrap_or(d.gamma),
            horizon: self.horizon.unwrap_or(d.horizon),
            eta: self.eta.unwrap_or(d.eta),
            beta_a: self.beta_a.unwrap_or(d.beta_a),
            beta_b: self.beta_b.unwrap_or(d.beta_b),
            updates: self.updates.unwrap_or(d.updates),
            batch: self.batch.unwrap_or(d.batch),
            anchor_batch: self.anchor_batch.unwrap_or(d.anchor_batch),
            hidden: self.policy_hidden.clone().unwrap_or(d.hidden),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            lr_decay: self.lr_decay.unwrap_or(d.lr_decay),
            decay_every: self.decay_every.unwrap_or(d.decay_every),
            rollout_chunks: self.rollout_chunks.unwrap_or(d.rollout_chunks),
            seed: self.train_seed.unwrap_or(d.seed),
        }
    }
}

#[derive(Args)]
struct ModelPaths {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long)]
    behavior: PathBuf,
}

#[derive(Args)]
struct TrainPolicyArgs {
    #[command(flatten)]
    paths: ModelPaths,
    #[command(flatten)]
    lion: LionArgs,
    /// Training log (JSON lines, one record per update).
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct SweepArgs {
    /// Grid spacing of the lambda sweep.
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[arg(long, default_value_t = 50)]
    episodes: usize,
    #[arg(long, default_value_t = 1000)]
    eval_seed: u64,
    #[arg(long, default_value_t = 1000)]
    distance_states: usize,
}

impl SweepArgs {
    fn config(&self) -> SweepConfig {
        SweepConfig {
            grid: lambda_grid(self.step),
            episodes: self.episodes,
            seed: self.eval_seed,
            distance_states: self.distance_states,
        }
    }
}

#[derive(Args)]
struct EvalSweepArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long)]
    policy: PathBuf,
    #[arg(long)]
    behavior: PathBuf,
    /// Dataset whose states measure the distance to behavior.
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    sweep: SweepArgs,
    /// Output stem: writes <stem>.jsonl and <stem>.plot.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StrategyArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long)]
    policy: PathBuf,
    /// Return to beat; defaults to the mean episode return of --dataset.
    #[arg(long)]
    baseline_return: Option<f64>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[arg(long, default_value_t = 50)]
    episodes: usize,
    #[arg(long, default_value_t = 1000)]
    eval_seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BaselineDiscreteArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[command(flatten)]
    paths: ModelPaths,
    /// λ-conditioned policy compared on the same grid.
    #[arg(long)]
    policy: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    lambdas: Vec<f64>,
    #[command(flatten)]
    lion: LionArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BaselineRvsArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    behavior: PathBuf,
    /// Normalized return-to-go values to condition on.
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    grid: Vec<f64>,
    #[arg(long, default_value_t = 300)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    sweep: SweepArgs,
    /// Also save the trained policy.
    #[arg(long)]
    save: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BaselineTd3bcArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    behavior: PathBuf,
    #[arg(long)]
    updates: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long)]
    save: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AblateBetaArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[command(flatten)]
    paths: ModelPaths,
    #[arg(long, value_delimiter = ',', default_value = "0.1,1")]
    params: Vec<f64>,
    #[command(flatten)]
    lion: LionArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AblateEtaArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[command(flatten)]
    paths: ModelPaths,
    #[arg(long, value_delimiter = ',', default_value = "0,0.1")]
    etas: Vec<f64>,
    #[command(flatten)]
    lion: LionArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AblateAggregationArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[command(flatten)]
    paths: ModelPaths,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "min,mean,single")]
    modes: Vec<Mode>,
    #[command(flatten)]
    lion: LionArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value = ".")]
    artifact_dir: PathBuf,
    /// Static files served at / (the dashboard bundle).
    #[arg(long)]
    static_dir: Option<PathBuf>,
    /// Auto-run cap in steps per second.
    #[arg(long, default_value_t = 20.0)]
    rate_cap: f64,
}

struct Models {
    dataset: Dataset,
    ensemble: DynamicsEnsemble,
    behavior: BehaviorNet,
}

fn load_models(p: &ModelPaths) -> Result<Models> {
    Ok(Models {
        dataset: load_dataset(&p.dataset)?,
        ensemble: DynamicsEnsemble::load(&p.ensemble).with_context(|| format!("loading {}", p.ensemble.display()))?,
        behavior: BehaviorNet::load(&p.behavior).with_context(|| format!("loading {}", p.behavior.display()))?,
    })
}

fn report_out(report: &reports::Report, out: &Path) -> Result<()> {
    let (a, b) = report.write(out)?;
    println!("wrote {} and {}", a.display(), b.display());
    for r in report.records.iter().filter(|r| r["record"] == "finding") {
        println!(
            "finding {}: observed={} ({})",
            r["name"].as_str().unwrap_or(""),
            r["observed"],
            r["detail"].as_str().unwrap_or("")
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    let cli = Cli::parse();
    let exec = cli.threads.map(Threads::new).unwrap_or_default();
    match cli.command {
        Command::Collect(a) => {
            let file = a.env.file()?;
            let mut policy = file.data_policy.clone();
            if let Some(eps) = a.eps {
                policy.explore_eps = eps;
            }
            let env = file.env.build()?;
            let d = collect(&env, &policy, a.n_interactions, a.seed)?;
            save_dataset(&d, &a.out)?;
            println!("{} transitions in {} trajectories -> {}", d.n_transitions(), d.trajectories.len(), a.out.display());
        }
        Command::Data {
            command: DataCommand::Validate { path },
        } => {
            let d = load_dataset(&path)?;
            let norm = compute_norm_stats(&d)?;
            let returns: Vec<f64> = d.trajectories.iter().map(|t| t.transitions.iter().map(|x| x.reward).sum()).collect();
            let (mean, _) = mean_stderr(&returns);
            let summary = json!({
                "valid": true,
                "state_dim": d.state_dim,
                "action_dim": d.action_dim,
                "trajectories": d.trajectories.len(),
                "transitions": d.n_transitions(),
                "mean_episode_return": mean,
                "norm": norm,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::TrainBc(a) => {
            let d = load_dataset(&a.dataset)?;
            let base = BehaviorConfig::default();
            let cfg = BehaviorConfig {
                hidden: a.hidden.unwrap_or(base.hidden),
                epochs: a.epochs.unwrap_or(base.epochs),
                batch_size: a.batch_size.unwrap_or(base.batch_size),
                learning_rate: a.learning_rate.unwrap_or(base.learning_rate),
                lr_decay: a.lr_decay.unwrap_or(base.lr_decay),
            };
            let t = train_behavior(&d, &cfg, a.seed)?;
            t.net.save(&a.out, json!({ "config": cfg, "seed": a.seed, "final_mse": t.final_mse() }))?;
            println!("behavior clone mse {:.6} -> {}", t.final_mse(), a.out.display());
        }
        Command::TrainDynamics(a) => {
            let d = load_dataset(&a.dataset)?;
            let base = DynamicsConfig::default();
            let cfg = DynamicsConfig {
                hidden: a.hidden.unwrap_or(base.hidden),
                epochs: a.epochs.unwrap_or(base.epochs),
                batch_size: a.batch_size.unwrap_or(base.batch_size),
                learning_rate: a.learning_rate.unwrap_or(base.learning_rate),
                lr_decay: base.lr_decay,
                patience: a.patience.or(base.patience),
                recurrent: a.recurrent.then_some(RecurrentConfig {
                    cell_size: a.cell_size,
                    history: a.history,
                    window: a.window,
                    stride: 1,
                }),
            };
            if a.ensemble_size == 0 {
                bail!("ensemble_size must be positive");
            }
            let norm = compute_norm_stats(&d)?;
            let (train, val) = split(&d, a.split_ratio, derive_seed(a.seed, 11))?;
            let seeds: Vec<u64> = (0..a.ensemble_size as u64).map(|i| derive_seed(a.seed, 100 + i)).collect();
            let (ens, reports) = train_ensemble(&train, &val, &norm, &cfg, &seeds, a.mode.into(), &exec)?;
            let val_mse: Vec<f64> = reports.iter().map(|r| r.best_val_mse).collect();
            ens.save(&a.out, json!({ "config": cfg, "seed": a.seed, "split_ratio": a.split_ratio, "best_val_mse": val_mse }))?;
            println!("ensemble of {} (val mse {:?}) -> {}", ens.members.len(), val_mse, a.out.display());
        }
        Command::TrainPolicy(a) => {
            let m = load_models(&a.paths)?;
            let cfg = a.lion.config();
            let mut log = a.log.as_ref().map(|p| TrainLog::create(p, json!(cfg))).transpose()?;
            let mut io_err = None;
            let t = train_lion_observed(&m.dataset, &m.ensemble, &m.behavior, &cfg, &exec, |r, _| {
                if let (Some(l), None) = (log.as_mut(), &io_err) {
                    io_err = l.record(r).err();
                }
            })?;
            if let Some(e) = io_err {
                bail!("writing training log: {e}");
            }
            if let Some(l) = log {
                l.finish()?;
            }
            t.policy.save(&a.out, json!({ "config": cfg }))?;
            let last = t.log.last().map(|r| r.loss).unwrap_or(f64::NAN);
            println!("{} updates, final loss {:.6} -> {}", t.log.len(), last, a.out.display());
        }
        Command::EvalSweep(a) => {
            let env = a.env.build()?;
            let policy = LionPolicy::load(&a.policy)?;
            let behavior = BehaviorNet::load(&a.behavior)?;
            let d = load_dataset(&a.dataset)?;
            let cfg = a.sweep.config();
            let s = lambda_sweep(&env, &policy, &behavior, &d, &cfg)?;
            report_out(&reports::sweep_report(&s, json!({ "sweep": cfg, "env": env.name() })), &a.out)?;
        }
        Command::Strategy(a) => {
            let env = a.env.build()?;
            let policy = LionPolicy::load(&a.policy)?;
            let baseline = match (a.baseline_return, &a.dataset) {
                (Some(b), _) => b,
                (None, Some(p)) => {
                    let d = load_dataset(p)?;
                    let r: Vec<f64> = d.trajectories.iter().map(|t| t.transitions.iter().map(|x| x.reward).sum()).collect();
                    mean_stderr(&r).0
                }
                (None, None) => bail!("pass --baseline-return or --dataset"),
            };
            let s = user_strategy_env(&env, &policy, a.step, baseline, a.episodes, a.eval_seed)?;
            println!("{}", s.describe());
            report_out(&reports::strategy_report(&s, json!({ "step": a.step, "episodes": a.episodes })), &a.out)?;
        }
        Command::BaselineDiscrete(a) => {
            let env = a.env.build()?;
            let m = load_models(&a.paths)?;
            let lion = LionPolicy::load(&a.policy)?;
            let cfg = a.lion.config();
            let sweep = a.sweep.config();
            let policies = train_discrete_collection(&m.dataset, &m.ensemble, &m.behavior, &a.lambdas, &cfg, &exec)?;
            let b = discrete_collection_report(&env, &m.dataset, &m.behavior, &lion, &a.lambdas, &policies, &sweep)?;
            let reference = lambda_sweep(&env, &lion, &m.behavior, &m.dataset, &SweepConfig { grid: a.lambdas.clone(), ..sweep.clone() })?;
            report_out(&reports::baseline_report(&b, Some(&reference), json!({ "lion": cfg, "sweep": sweep })), &a.out)?;
        }
        Command::BaselineRvs(a) => {
            let env = a.env.build()?;
            let d = load_dataset(&a.dataset)?;
            let behavior = BehaviorNet::load(&a.behavior)?;
            let cfg = RvsConfig {
                epochs: a.epochs,
                seed: a.seed,
                ..RvsConfig::default()
            };
            let sweep = a.sweep.config();
            let p = train_return_conditioned(&d, &cfg)?;
            if let Some(path) = &a.save {
                p.save(path, json!({ "config": cfg }))?;
            }
            let b = return_conditioned_report(&env, &d, &behavior, &p, &a.grid, &sweep)?;
            report_out(&reports::baseline_report(&b, None, json!({ "rvs": cfg, "sweep": sweep })), &a.out)?;
        }
        Command::BaselineTd3bc(a) => {
            let env = a.env.build()?;
            let d = load_dataset(&a.dataset)?;
            let behavior = BehaviorNet::load(&a.behavior)?;
            let base = Td3bcConfig::default();
            let cfg = Td3bcConfig {
                updates: a.updates.unwrap_or(base.updates),
                alpha: a.alpha.unwrap_or(base.alpha),
                seed: a.seed,
                ..base
            };
            let sweep = a.sweep.config();
            let t = train_lambda_td3bc(&d, &cfg)?;
            if let Some(path) = &a.save {
                Td3bcModel {
                    policy: t.policy.clone(),
                    critics: t.critics.clone(),
                }
                .save(path, json!({ "config": cfg }))?;
            }
            let b = lambda_td3bc_report(&env, &d, &behavior, &t, &sweep)?;
            report_out(&reports::baseline_report(&b, None, json!({ "td3bc": cfg, "sweep": sweep })), &a.out)?;
        }
        Command::Ablate { command } => ablate(command, &exec)?,
        Command::Serve(a) => {
            let cfg = ServiceConfig {
                artifact_dir: a.artifact_dir,
                static_dir: a.static_dir,
                rate_cap: a.rate_cap,
            };
            let addr: std::net::SocketAddr = format!("{}:{}", a.host, a.port).parse().context("bad --host/--port")?;
            tokio::runtime::Runtime::new()?.block_on(serve(cfg, addr))?;
        }
    }
    Ok(())
}

fn ablate(command: AblateCommand, exec: &Threads) -> Result<()> {
    match command {
        AblateCommand::Beta(a) => {
            let m = load_models(&a.paths)?;
            let sweep = a.sweep.config();
            let (settings, cfgs) = beta_configs(&a.lion.config(), &a.params)?;
            let policies = train_settings(&m.dataset, &m.ensemble, &m.behavior, cfgs, exec)?;
            let r = beta_report(&settings, &policies, &m.behavior, &m.dataset, &sweep)?;
            report_out(&reports::ablation_report(&r, config(&a.lion, &sweep)), &a.out)
        }
        AblateCommand::Eta(a) => {
            let m = load_models(&a.paths)?;
            let sweep = a.sweep.config();
            let (settings, cfgs) = eta_configs(&a.lion.config(), &a.etas)?;
            let policies = train_settings(&m.dataset, &m.ensemble, &m.behavior, cfgs, exec)?;
            let r = eta_report(&settings, &policies, &m.behavior, &m.dataset, &sweep)?;
            report_out(&reports::ablation_report(&r, config(&a.lion, &sweep)), &a.out)
        }
        AblateCommand::Aggregation(a) => {
            let env = a.env.build()?;
            let m = load_models(&a.paths)?;
            let sweep = a.sweep.config();
            let modes: Vec<Aggregation> = a.modes.iter().map(|&m| m.into()).collect();
            let cfg = a.lion.config();
            let policies = train_aggregation(&m.dataset, &m.ensemble, &m.behavior, &modes, &cfg, exec)?;
            let r = aggregation_report(&env, &modes, &policies, &m.behavior, &m.dataset, &sweep, exec)?;
            report_out(&reports::aggregation_report(&r, config(&a.lion, &sweep)), &a.out)
        }
    }
}

fn config(lion: &LionArgs, sweep: &SweepConfig) -> Value {
    json!({ "lion": lion.config(), "sweep": sweep })
}
