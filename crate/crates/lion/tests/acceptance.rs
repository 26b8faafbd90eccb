//! End-to-end acceptance suite. Each test prints one PASS/FAIL line and then asserts.
//!
//! The 2D pipeline (1000 interactions, default models, default LION training) is
//! trained once and shared; the ablation and baseline trainings reuse its frozen models.

use std::sync::OnceLock;
use std::time::Instant;

use lion::reports::{self, validate_plot, validate_report, Report};
use lion::service::{LambdaChange, Session, SessionSpec};
use lion::threads::Threads;
use lion_core::data::NormStats;
use lion_core::diffcore::{finite_diff_check, mlp_mse_loss_and_grad, mse, Matrix, NetworkSpec, OutputActivation, ParamVector, Tape};
use lion_core::envs::World2D;
use lion_core::evalsuite::{
    aggregation_report, beta_configs, beta_report, collect_2d, discrete_collection_report, eta_configs, eta_report,
    evaluate_controller, ks_critical_01, ks_uniform, lambda_sweep, lambda_td3bc_report, return_conditioned_report,
    spearman, train_aggregation, train_discrete_collection, train_lambda_td3bc, train_models, train_return_conditioned,
    train_settings, user_strategy, AblationReport, Artifacts, LambdaSweepResult, PipelineConfig, RvsConfig,
    StopReason, SweepConfig, Td3bcConfig,
};
use lion_core::lion::{rollout_loss, train_lion_observed, Conditioning, LambdaSampler, LionPolicy, LionTrainConfig, RolloutStart};
use lion_core::models::{aggregate, Aggregation, BehaviorNet, DynamicsEnsemble, DynamicsMember};
use lion_core::rng::{index, seeded, uniform, Rng};
use serde_json::json;

fn verdict(n: u32, name: &str, pass: bool, detail: impl std::fmt::Display) -> bool {
    println!("criterion {n:>2} {}: {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

struct Pipeline {
    cfg: PipelineConfig,
    env: World2D,
    models: Artifacts,
    policy: LionPolicy,
    sweep: LambdaSweepResult,
    behavior_return: f64,
}

fn threads() -> Threads {
    Threads::available()
}

fn pipeline() -> &'static Pipeline {
    static P: OnceLock<Pipeline> = OnceLock::new();
    P.get_or_init(|| {
        let t = Instant::now();
        let cfg = PipelineConfig::default();
        let env = World2D::new(cfg.env.clone());
        let models = train_models(collect_2d(&cfg), &cfg, &threads()).unwrap();
        eprintln!("models trained in {:.0?}", t.elapsed());
        let policy = train_lion_observed(&models.dataset, &models.ensemble, &models.behavior, &cfg.lion, &threads(), |_, _| {})
            .unwrap()
            .policy;
        eprintln!("policy trained in {:.0?}", t.elapsed());
        let sc = SweepConfig::default();
        let sweep = lambda_sweep(&env, &policy, &models.behavior, &models.dataset, &sc).unwrap();
        let behavior = &models.behavior;
        let behavior_return = evaluate_controller(&env, |s| Ok(behavior.act(s)), sc.episodes, sc.seed).unwrap().mean_return;
        Pipeline {
            cfg,
            env,
            models,
            policy,
            sweep,
            behavior_return,
        }
    })
}

fn random_matrix(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| uniform(rng, -1.0, 1.0)).collect())
}

fn unrolled_loss(spec: &NetworkSpec, params: &ParamVector, xs: &[Matrix], targets: &[Matrix]) -> lion_core::Result<(f64, Vec<f64>)> {
    let mut tape = Tape::new();
    let net = spec.bind(&mut tape, params, true)?;
    let mut h = tape.constant(Matrix::zeros(xs[0].rows(), spec.cell_size().unwrap()));
    let mut total = None;
    for (x, y) in xs.iter().zip(targets) {
        let x = tape.constant(x.clone());
        let (out, next) = net.step(&mut tape, x, h)?;
        h = next;
        let y = tape.constant(y.clone());
        let l = mse(&mut tape, out, y);
        total = Some(match total {
            None => l,
            Some(acc) => tape.add(acc, l),
        });
    }
    let total = total.unwrap();
    let grads = tape.backward(total)?;
    Ok((tape.scalar(total), net.gradient(&tape, &grads)))
}

#[test]
fn c01_gradient_correctness() {
    let t = Instant::now();
    let mut rng = seeded(101);
    let mut worst_mlp: f64 = 0.0;
    for _ in 0..20 {
        let input = 1 + index(&mut rng, 5);
        let hidden: Vec<usize> = (0..index(&mut rng, 4)).map(|_| 2 + index(&mut rng, 9)).collect();
        let output = 1 + index(&mut rng, 3);
        let act = if index(&mut rng, 2) == 0 { OutputActivation::Identity } else { OutputActivation::Tanh };
        let spec = NetworkSpec::mlp(input, &hidden, output, act);
        let params = spec.init(&mut rng);
        let rows = 2 + index(&mut rng, 8);
        let x = random_matrix(&mut rng, rows, input);
        let y = random_matrix(&mut rng, rows, output);
        let err = finite_diff_check(&params, 1e-5, |p| mlp_mse_loss_and_grad(&spec, p, &x, &y)).unwrap();
        worst_mlp = worst_mlp.max(err);
    }
    let mut worst_rec: f64 = 0.0;
    for _ in 0..5 {
        let input = 1 + index(&mut rng, 4);
        let cell = 2 + index(&mut rng, 6);
        let hidden: Vec<usize> = (0..index(&mut rng, 2)).map(|_| 2 + index(&mut rng, 6)).collect();
        let output = 1 + index(&mut rng, 3);
        let steps = 2 + index(&mut rng, 9);
        let spec = NetworkSpec::recurrent(input, cell, &hidden, output);
        let params = spec.init(&mut rng);
        let rows = 2 + index(&mut rng, 4);
        let xs: Vec<Matrix> = (0..steps).map(|_| random_matrix(&mut rng, rows, input)).collect();
        let ys: Vec<Matrix> = (0..steps).map(|_| random_matrix(&mut rng, rows, output)).collect();
        let err = finite_diff_check(&params, 1e-5, |p| unrolled_loss(&spec, p, &xs, &ys)).unwrap();
        worst_rec = worst_rec.max(err);
    }
    let pass = worst_mlp < 1e-4 && worst_rec < 1e-3 && t.elapsed().as_secs() < 60;
    assert!(verdict(
        1,
        "finite differences",
        pass,
        format!("max rel err {worst_mlp:.2e} over 20 MLPs, {worst_rec:.2e} over 5 recurrent unrolls, {:.1?}", t.elapsed())
    ));
}

fn small_norm() -> NormStats {
    NormStats {
        state_mean: vec![5.0, 5.0],
        state_std: vec![2.9, 2.9],
        reward_min: 0.0,
        reward_max: 0.07,
        floored_dims: vec![],
    }
}

fn random_ensemble(mode: Aggregation, rng: &mut Rng) -> DynamicsEnsemble {
    let spec = NetworkSpec::mlp(4, &[10, 6], 3, OutputActivation::Identity);
    let members = (0..4)
        .map(|_| DynamicsMember {
            params: spec.init(rng),
            spec: spec.clone(),
        })
        .collect();
    DynamicsEnsemble::new(members, mode, small_norm(), 2).unwrap()
}

fn reward_head_indices(m: &DynamicsMember) -> Vec<usize> {
    let last = m.spec.hidden_layers.len();
    let (w_off, w) = m.params.offset_of(&format!("layer{last}.weight")).unwrap();
    let (b_off, b) = m.params.offset_of(&format!("layer{last}.bias")).unwrap();
    let mut out: Vec<usize> = (0..w.rows).map(|r| w_off + r * w.cols + w.cols - 1).collect();
    out.push(b_off + b.cols - 1);
    out
}

/// `r ↦ c·r + δ` on every member.
fn map_reward_heads(e: &mut DynamicsEnsemble, c: f64, delta: f64) {
    for m in &mut e.members {
        let idx = reward_head_indices(m);
        let bias = *idx.last().unwrap();
        for &i in &idx {
            m.params.values[i] *= c;
        }
        m.params.values[bias] += delta;
    }
}

fn perturb_reward_heads(e: &mut DynamicsEnsemble, rng: &mut Rng) {
    for m in &mut e.members {
        for i in reward_head_indices(m) {
            m.params.values[i] += uniform(rng, -2.0, 2.0);
        }
    }
}

#[test]
fn c02_boundary_identities() {
    let cfg = LionTrainConfig {
        horizon: 8,
        hidden: vec![12, 12],
        ..Default::default()
    };
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for seed in 0..10u64 {
        for mode in Aggregation::ALL {
            let mut rng = seeded(seed);
            let policy = LionPolicy::init(&small_norm(), 2, &cfg.hidden, Conditioning::Input, &mut rng);
            let ensemble = random_ensemble(mode, &mut rng);
            let bspec = NetworkSpec::mlp(2, &[8], 2, OutputActivation::Identity);
            let behavior = BehaviorNet {
                params: bspec.init(&mut rng),
                spec: bspec,
                norm: small_norm(),
            };
            let starts: Vec<RolloutStart> =
                (0..6).map(|_| RolloutStart::new(vec![uniform(&mut rng, 0.0, 10.0), uniform(&mut rng, 0.0, 10.0)])).collect();
            let loss = |e: &DynamicsEnsemble, b: &BehaviorNet, l: f64| {
                rollout_loss(&policy, e, b, &starts, &vec![l; starts.len()], &cfg, &mut seeded(seed + 500)).unwrap()
            };

            let base0 = loss(&ensemble, &behavior, 0.0);
            let mut moved = ensemble.clone();
            if mode == Aggregation::Min {
                // Order-preserving change: the minimum also selects the next state.
                map_reward_heads(&mut moved, uniform(&mut rng, 0.1, 10.0), uniform(&mut rng, -3.0, 3.0));
            } else {
                perturb_reward_heads(&mut moved, &mut rng);
            }
            worst = worst.max((loss(&moved, &behavior, 0.0) - base0).abs());

            let base1 = loss(&ensemble, &behavior, 1.0);
            let mut b2 = behavior.clone();
            b2.params.values.iter_mut().for_each(|v| *v += uniform(&mut rng, -1.0, 1.0));
            worst = worst.max((loss(&ensemble, &b2, 1.0) - base1).abs());
            checked += 1;
        }
    }
    assert!(verdict(2, "boundary identities", worst <= 1e-12, format!("max |Δloss| {worst:.1e} over {checked} setups")));
}

fn mean_final_distance(finals: &[Vec<f64>], target: [f64; 2]) -> f64 {
    finals.iter().map(|s| ((s[0] - target[0]).powi(2) + (s[1] - target[1]).powi(2)).sqrt()).sum::<f64>() / finals.len() as f64
}

#[test]
fn c03_lambda_zero_reproduces_behavior() {
    let p = pipeline();
    let i0 = p.sweep.at(0.0).unwrap();
    let d0 = p.sweep.mean_distance[i0];
    let r0 = p.sweep.mean_return[i0];
    let rel = (r0 - p.behavior_return).abs() / p.behavior_return.abs();
    let pass = d0 < 0.0025 && rel <= 0.1;
    assert!(verdict(
        3,
        "lambda = 0 tracks the behavior clone",
        pass,
        format!(
            "distance {d0:.5} (< 0.0025), return {r0:.4} vs clone {:.4} ({:.1}% off, <= 10%)",
            p.behavior_return,
            100.0 * rel
        )
    ));
}

#[test]
fn c04_lambda_one_seeks_reward() {
    let p = pipeline();
    let (i0, i1) = (p.sweep.at(0.0).unwrap(), p.sweep.at(1.0).unwrap());
    let (r0, r1) = (p.sweep.mean_return[i0], p.sweep.mean_return[i1]);
    let center = p.cfg.env.reward_center;
    let dist = mean_final_distance(&p.sweep.final_observations[i1], center);
    let pass = r1 > r0 && dist < 1.0 && p.sweep.episodes == 50;
    assert!(verdict(
        4,
        "lambda = 1 seeks reward",
        pass,
        format!("return {r1:.4} at 1 vs {r0:.4} at 0, final distance to {center:?} {dist:.3} (< 1.0)")
    ));
}

#[test]
fn c05_distance_monotone_in_lambda() {
    let p = pipeline();
    let rho = spearman(&p.sweep.grid, &p.sweep.mean_distance);
    let pass = p.sweep.grid.len() == 21 && rho >= 0.9;
    assert!(verdict(5, "distance rises with lambda", pass, format!("Spearman {rho:.4} over {} points", p.sweep.grid.len())));
}

/// P(λ < x) for Beta(a, a), x <= 0.5, by Simpson quadrature after substituting
/// λ = u^(1/a); normalized by the half mass P(λ < 0.5) = 0.5.
fn beta_lower_tail(a: f64, x: f64) -> f64 {
    let unnormalized = |x: f64| {
        let upper = x.powf(a);
        let n = 20_000;
        let h = upper / n as f64;
        let f = |u: f64| (1.0 - u.powf(1.0 / a)).powf(a - 1.0);
        let mut s = f(0.0) + f(upper);
        for i in 1..n {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    0.5 * unnormalized(x) / unnormalized(0.5)
}

#[test]
fn c06_beta_sampler() {
    let bathtub = LambdaSampler { a: 0.1, b: 0.1 };
    let mut rng = seeded(6);
    let n = 100_000;
    let edge = (0..n).filter(|_| {
        let l = bathtub.sample(&mut rng);
        !(0.05..=0.95).contains(&l)
    });
    let observed = edge.count() as f64 / n as f64;
    let oracle = 2.0 * beta_lower_tail(0.1, 0.05);
    let half_arcsine = beta_lower_tail(0.5, 0.25);
    let oracle_ok = (half_arcsine - 2.0 / std::f64::consts::PI * 0.5f64.asin()).abs() < 1e-4;

    let uniform_sampler = LambdaSampler { a: 1.0, b: 1.0 };
    let mut rng = seeded(7);
    let samples: Vec<f64> = (0..n).map(|_| uniform_sampler.sample(&mut rng)).collect();
    let ks = ks_uniform(&samples);
    let crit = ks_critical_01(n);
    let pass = oracle_ok && (observed - oracle).abs() <= 0.02 && ks < crit;
    assert!(verdict(
        6,
        "Beta sampler",
        pass,
        format!("edge mass {observed:.4} vs quadrature {oracle:.4} (±0.02); uniform KS {ks:.5} < {crit:.5}")
    ));
}

struct Ablations {
    beta: AblationReport,
    eta: AblationReport,
}

fn ablations() -> &'static Ablations {
    static A: OnceLock<Ablations> = OnceLock::new();
    A.get_or_init(|| {
        let p = pipeline();
        let m = &p.models;
        let base = &p.cfg.lion;
        let (betas, beta_cfgs) = beta_configs(base, &[0.1, 1.0]).unwrap();
        let (etas, eta_cfgs) = eta_configs(base, &[0.0, 0.1]).unwrap();
        // Beta(0.1, 0.1) with η = 0.1 is the shared pipeline policy.
        let fresh = vec![beta_cfgs[1].clone(), eta_cfgs[0].clone()];
        let t = Instant::now();
        let trained = train_settings(&m.dataset, &m.ensemble, &m.behavior, fresh, &threads()).unwrap();
        eprintln!("ablation policies trained in {:.0?}", t.elapsed());
        let sc = SweepConfig::default();
        let beta_policies = vec![p.policy.clone(), trained[0].clone()];
        let eta_policies = vec![trained[1].clone(), p.policy.clone()];
        Ablations {
            beta: beta_report(&betas, &beta_policies, &m.behavior, &m.dataset, &sc).unwrap(),
            eta: eta_report(&etas, &eta_policies, &m.behavior, &m.dataset, &sc).unwrap(),
        }
    })
}

#[test]
fn c07_bathtub_beats_uniform_at_lambda_zero() {
    let a = ablations();
    let (bathtub, flat) = (&a.beta.scores[0], &a.beta.scores[1]);
    let pass = bathtub.setting == 0.1 && flat.setting == 1.0 && flat.behavior_mismatch > bathtub.behavior_mismatch;
    assert!(verdict(
        7,
        "Beta ablation",
        pass,
        format!("lambda = 0 mismatch {:.5} under Beta(1,1) vs {:.5} under Beta(0.1,0.1)", flat.behavior_mismatch, bathtub.behavior_mismatch)
    ));
}

#[test]
fn c08_anchor_improves_adherence() {
    let a = ablations();
    let (zero, tenth) = (&a.eta.scores[0], &a.eta.scores[1]);
    let pass = zero.setting == 0.0 && tenth.setting == 0.1 && zero.dataset_action_mse > tenth.dataset_action_mse;
    assert!(verdict(
        8,
        "anchor ablation",
        pass,
        format!("lambda = 0 dataset-action MSE {:.5} at eta = 0 vs {:.5} at eta = 0.1", zero.dataset_action_mse, tenth.dataset_action_mse)
    ));
}

#[test]
fn c09_min_aggregation_is_pessimistic() {
    let mut rng = seeded(9);
    let min_e = random_ensemble(Aggregation::Min, &mut rng);
    let mut violations = 0;
    for _ in 0..10_000 {
        let s = [uniform(&mut rng, -2.0, 12.0), uniform(&mut rng, -2.0, 12.0)];
        let a = [uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0)];
        let preds = min_e.member_predictions(&mut min_e.context(), &s, &a).unwrap();
        let rewards: Vec<f64> = preds.iter().map(|p| p.0).collect();
        let min_r = min_e.predict(&mut min_e.context(), &s, &a, &mut rng).unwrap().reward;
        let (mean_r, _) = aggregate(&rewards, Aggregation::Mean, &mut rng);
        if rewards.iter().any(|&r| min_r > r) || min_r > mean_r {
            violations += 1;
        }
    }
    assert!(verdict(9, "pessimism", violations == 0, format!("{violations} violations over 10000 (s, a)")));
}

#[test]
fn c10_user_strategy_examples() {
    let rising = user_strategy(0.05, 0.0, |l| Ok(1.0 + l)).unwrap();
    let drop = user_strategy(0.05, 0.5, |l| Ok(if l <= 0.4 + 1e-9 { 1.0 + l } else { 0.2 })).unwrap();
    let flat = user_strategy(0.05, 2.0, |_| Ok(2.0)).unwrap();
    let pass = rising.final_lambda == 1.0
        && rising.stop_reason == StopReason::ReachedEnd
        && drop.final_lambda == 0.4
        && *drop.visited.last().unwrap() == 0.45
        && flat.final_lambda == 0.0;
    assert!(verdict(
        10,
        "operator strategy",
        pass,
        format!("rising -> {}, drop at 0.45 -> {}, flat at baseline -> {}", rising.final_lambda, drop.final_lambda, flat.final_lambda)
    ));
}

fn check_written(report: &Report, dir: &std::path::Path, stem: &str) -> Result<Vec<serde_json::Value>, String> {
    let (jsonl, plot) = report.write(&dir.join(stem)).map_err(|e| e.to_string())?;
    validate_report(&std::fs::read_to_string(jsonl).unwrap()).map_err(|e| format!("{stem}: {e}"))?;
    validate_plot(&std::fs::read_to_string(plot).unwrap()).map_err(|e| format!("{stem} plot: {e}"))?;
    Ok(report.records.iter().filter(|r| r["record"] == "finding").cloned().collect())
}

#[test]
fn c11_baseline_and_ablation_reports() {
    let p = pipeline();
    let m = &p.models;
    let sc = SweepConfig::default();
    let cfg = &p.cfg.lion;
    let t = Instant::now();
    let lambdas = [0.0, 0.25, 0.5, 0.75, 1.0];
    let (discrete, aggregation) = std::thread::scope(|s| {
        let d = s.spawn(|| train_discrete_collection(&m.dataset, &m.ensemble, &m.behavior, &lambdas, cfg, &threads()).unwrap());
        let modes = [Aggregation::Mean, Aggregation::Single];
        let a = train_aggregation(&m.dataset, &m.ensemble, &m.behavior, &modes, cfg, &threads()).unwrap();
        (d.join().unwrap(), a)
    });
    eprintln!("baseline policies trained in {:.0?}", t.elapsed());
    let rvs = train_return_conditioned(&m.dataset, &RvsConfig::default()).unwrap();
    let td3 = train_lambda_td3bc(&m.dataset, &Td3bcConfig::default()).unwrap();
    eprintln!("rvs and td3bc trained in {:.0?}", t.elapsed());

    let disc = discrete_collection_report(&p.env, &m.dataset, &m.behavior, &p.policy, &lambdas, &discrete, &sc).unwrap();
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    let rvs_r = return_conditioned_report(&p.env, &m.dataset, &m.behavior, &rvs, &grid, &sc).unwrap();
    let td3_r = lambda_td3bc_report(&p.env, &m.dataset, &m.behavior, &td3, &sc).unwrap();
    let policies = vec![p.policy.clone(), aggregation[0].clone(), aggregation[1].clone()];
    let agg = aggregation_report(&p.env, &Aggregation::ALL, &policies, &m.behavior, &m.dataset, &sc, &threads()).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let built = [
        ("discrete", reports::baseline_report(&disc, Some(&p.sweep), json!({ "lambdas": lambdas }))),
        ("rvs", reports::baseline_report(&rvs_r, Some(&p.sweep), json!({ "grid": grid }))),
        ("td3bc", reports::baseline_report(&td3_r, Some(&p.sweep), json!({ "updates": Td3bcConfig::default().updates }))),
        ("aggregation", reports::aggregation_report(&agg, json!({ "modes": ["min", "mean", "single"] }))),
    ];
    let mut problems = Vec::new();
    let mut findings = Vec::new();
    for (stem, report) in &built {
        match check_written(report, dir.path(), stem) {
            Ok(f) if f.is_empty() => problems.push(format!("{stem}: no findings recorded")),
            Ok(f) => findings.extend(f.into_iter().map(|f| (stem.to_string(), f))),
            Err(e) => problems.push(e),
        }
    }
    let well_formed = disc.is_well_formed() && rvs_r.is_well_formed() && td3_r.is_well_formed() && agg.is_well_formed();
    if !well_formed {
        problems.push("a report is not well formed".into());
    }
    for (stem, f) in &findings {
        println!("    {stem}: {} observed={} ({})", f["name"], f["observed"], f["detail"]);
    }
    assert!(verdict(
        11,
        "baseline and ablation reports",
        problems.is_empty(),
        if problems.is_empty() { format!("4 reports schema-valid, {} findings recorded", findings.len()) } else { problems.join("; ") }
    ));
}

#[test]
fn c12_session_replay_is_bit_identical() {
    let norm = NormStats {
        state_mean: vec![5.0, 5.0],
        state_std: vec![2.9, 2.9],
        reward_min: 0.0,
        reward_max: 0.07,
        floored_dims: vec![],
    };
    let policy = LionPolicy::init(&norm, 2, &[16, 16], Conditioning::Input, &mut seeded(12));
    let bspec = NetworkSpec::mlp(2, &[8], 2, OutputActivation::Identity);
    let behavior = BehaviorNet {
        params: bspec.init(&mut seeded(13)),
        spec: bspec,
        norm,
    };
    let spec = SessionSpec {
        env: lion::envs::EnvConfig::by_name("world2d").unwrap(),
        seed: 42,
        window: 20,
    };
    let schedule = [(0usize, 0.0), (13, 0.3), (40, 1.4), (41, 0.6), (77, -0.2), (90, 0.95)];
    let total = 150;
    let run = || {
        let mut s = Session::new(spec.clone(), policy.clone(), behavior.clone()).unwrap();
        let mut events = Vec::new();
        for (i, &(at, l)) in schedule.iter().enumerate() {
            events.extend(s.step_n(at - s.steps() as usize).unwrap());
            s.set_lambda(l).unwrap();
            if i == schedule.len() - 1 {
                events.extend(s.step_n(total - at).unwrap());
            }
        }
        (serde_json::to_string(&events).unwrap(), s.lambda_log().to_vec())
    };
    let (first, log) = run();
    let (second, _) = run();
    let log: Vec<LambdaChange> = log;
    let replayed = Session::replay(spec.clone(), policy.clone(), behavior.clone(), &log, total as u64).unwrap();
    let replayed = serde_json::to_string(&replayed).unwrap();
    let pass = first == second && first == replayed && first.len() > 1000;
    assert!(verdict(12, "session replay", pass, format!("{total} events from seed 42 and {} lambda changes", log.len())));
}
