//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cogniplay::formats::weights_to_json;
use cogniplay_core::{
    decide, expert_iteration, move_match, probe_positions, rng, search, self_consistency_ceiling,
    self_play_game, strength_match, Action, Agent, AgentConfig, FeatureSet, GameSpec, GameState,
    MoveDataset, MoveEntry, PartitionParams, PolicyDist, SearchConfig, Searcher, TrainConfig,
    TrainReport, UniformRandom,
};
use oracle::policy;
use rand::Rng;

const TTT: GameSpec = GameSpec::TIC_TAC_TOE;
const GOMOKU: GameSpec = GameSpec::GOMOKU;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn report(name: &str, started: Instant, outcome: Outcome, failures: &mut Vec<String>) {
    let tag = if outcome.pass { "PASS" } else { "FAIL" };
    println!(
        "{tag} {name}: {} [{:.1}s]",
        outcome.detail,
        started.elapsed().as_secs_f64()
    );
    if !outcome.pass {
        failures.push(name.to_string());
    }
}

fn a(s: &str) -> Action {
    s.parse().unwrap()
}

fn random_state(spec: GameSpec, r: &mut rng::Rng, max_plies: usize) -> GameState {
    let plies = r.gen_range(0..=max_plies);
    let mut s = GameState::new(spec);
    for _ in 0..plies {
        let legal = s.legal_actions().unwrap();
        let next = s.apply(legal[r.gen_range(0..legal.len())]).unwrap();
        if next.is_terminal() {
            break;
        }
        s = next;
    }
    s
}

fn random_target(actions: Vec<Action>, r: &mut rng::Rng) -> PolicyDist {
    if r.gen_bool(0.3) {
        let pick = actions[r.gen_range(0..actions.len())];
        return PolicyDist::one_hot(actions, pick);
    }
    let raw: Vec<f64> = actions.iter().map(|_| r.gen::<f64>().powi(3)).collect();
    let sum: f64 = raw.iter().sum();
    PolicyDist {
        actions,
        probs: raw.into_iter().map(|x| x / sum).collect(),
    }
}

fn tactics() -> Outcome {
    let positions = oracle::one_move_wins();
    let mut cfg = AgentConfig::vanilla(&TTT);
    cfg.search.iterations = 20_000;
    let fs = cfg.initial_features().unwrap();
    let mut solved = 0;
    let mut missed = Vec::new();
    for (board, win) in &positions {
        let moves: Vec<Action> = oracle::move_order(board).iter().map(|m| a(m)).collect();
        let state = GameState::from_moves(TTT, &moves).unwrap();
        let d = decide(&state, &fs, &cfg).unwrap();
        if d.action == a(&oracle::cell_name(*win)) {
            solved += 1;
        } else {
            missed.push(format!(
                "{} -> {}",
                oracle::move_order(board).join(" "),
                d.action
            ));
        }
    }
    check(
        positions.len() == 24 && solved == 24 && cfg.search.node_cap >= 6000,
        format!(
            "{solved}/{} one-move wins found (B={}, C={}) {}",
            positions.len(),
            cfg.search.iterations,
            cfg.search.node_cap,
            missed.join("; ")
        ),
    )
}

struct Trained {
    fs: FeatureSet,
    report: TrainReport,
    checkpoints: Vec<FeatureSet>,
    cfg: AgentConfig,
    train: TrainConfig,
    elapsed: Duration,
}

fn train_ttt() -> Trained {
    let cfg = AgentConfig::vanilla(&TTT);
    let train = TrainConfig::default();
    assert_eq!((train.iterations, train.games_per_iter), (10, 100));
    let probe = probe_positions(&TTT, 200, 2024);
    let mut checkpoints = vec![cfg.initial_features().unwrap()];
    let start = Instant::now();
    let (fs, report) = expert_iteration(&TTT, &cfg, &train, &probe, |_, f| {
        checkpoints.push(f.clone())
    })
    .unwrap();
    Trained {
        fs,
        report,
        checkpoints,
        cfg,
        train,
        elapsed: start.elapsed(),
    }
}

fn never_lose(t: &Trained) -> Outcome {
    let start = Instant::now();
    let mut agent = Agent::new(&t.fs, t.cfg.clone());
    let mut random = UniformRandom;
    let r = strength_match(&mut agent, &mut random, &TTT, 200, 77).unwrap();
    let total = t.elapsed + start.elapsed();
    check(
        r.wins_b == 0 && r.games == 200 && total < Duration::from_secs(600),
        format!(
            "trained agent vs random over {} games: {} wins, {} draws, {} losses; train+match {:.0}s",
            r.games,
            r.wins_a,
            r.draws,
            r.wins_b,
            total.as_secs_f64()
        ),
    )
}

fn memory_bound() -> Outcome {
    let fs = FeatureSet::init_atomic(2, 2000).unwrap();
    let cfg = SearchConfig {
        iterations: 50_000,
        node_cap: 2000,
        ..SearchConfig::vanilla(&GOMOKU)
    };
    let mut searcher = Searcher::new();
    let s = GameState::from_moves(GOMOKU, &[a("h8"), a("i9")]).unwrap();
    let r = searcher
        .search(&s, &fs, &cfg, &PartitionParams::default())
        .unwrap();
    let bounded = r.stats.peak_live <= 2000 && searcher.pool().peak_live() <= 2000;
    check(
        bounded && r.stats.iterations == 50_000,
        format!(
            "peak live nodes {} of 2000 over {} iterations, {} recycled",
            r.stats.peak_live, r.stats.iterations, r.stats.recycled
        ),
    )
}

fn memory_strength() -> Outcome {
    let fs = FeatureSet::init_atomic(2, 2000).unwrap();
    let mut big = AgentConfig::vanilla(&GOMOKU);
    big.search.node_cap = 100_000;
    let mut small = big.clone();
    small.search.node_cap = 200;
    let r = strength_match(
        &mut Agent::new(&fs, big),
        &mut Agent::new(&fs, small),
        &GOMOKU,
        200,
        31,
    )
    .unwrap();
    check(
        r.score_a() >= 0.5,
        format!(
            "C=100000 vs C=200 at B=2000: {}-{}-{} (score {:.3})",
            r.wins_a,
            r.draws,
            r.wins_b,
            r.score_a()
        ),
    )
}

fn bypass_decisions(t: &Trained) -> Outcome {
    let mut agent = Agent::new(&t.fs, t.cfg.clone());
    let mut r = rng::from_seed(99);
    let (mut certain, mut violations, mut points) = (0, 0, 0);
    while points < 1000 {
        let s = random_state(TTT, &mut r, 8);
        if s.is_terminal() {
            continue;
        }
        points += 1;
        let (_, part) = agent.partition(&s).unwrap();
        let before = agent.search_calls();
        let d = agent.decide(&s, points as u64).unwrap();
        let calls = agent.search_calls() - before;
        if part.certain {
            certain += 1;
            if calls != 0 || d.search.is_some() || !d.certain || d.action != part.good[0] {
                violations += 1;
            }
        } else if calls != 1 || d.certain {
            violations += 1;
        }
    }
    check(
        violations == 0 && certain > 0,
        format!("{points} decision points, {certain} certain, {violations} violations"),
    )
}

/// Replays part of each training iteration with the weights that iteration
/// started from and checks every sample sits at a doubtful state.
fn bypass_samples(t: &Trained) -> Outcome {
    let params = t.cfg.partition_params();
    let (mut samples, mut bad) = (0usize, 0usize);
    for iteration in 1..=t.train.iterations {
        let fs = &t.checkpoints[iteration as usize - 1];
        let mut player = Agent::new(fs, t.cfg.clone());
        for g in 0..10u64 {
            let seed = rng::derive(t.train.seed, ((iteration as u64) << 32) | g);
            let (_, got) =
                self_play_game(&mut player, &TTT, seed, (&t.train).into(), iteration).unwrap();
            for s in &got {
                samples += 1;
                let pi = fs.policy(&s.state).unwrap();
                if cogniplay_core::partition(&pi, params.tau, params.chunk_cap).certain {
                    bad += 1;
                }
            }
        }
    }
    let from_run = t.report.samples_from_certain;
    check(
        from_run == 0 && bad == 0 && samples > 0,
        format!(
            "training run reports {from_run} samples from certain states; {samples} replayed samples, {bad} at certain states"
        ),
    )
}

fn learning(t: &Trained) -> Outcome {
    let first = &t.report.rows[0];
    let last = t.report.rows.last().unwrap();
    let reduction = 1.0 - last.heldout_ce / last.heldout_baseline;
    let (p0, p1) = (
        first.probe_certain_fraction.unwrap(),
        last.probe_certain_fraction.unwrap(),
    );
    check(
        reduction >= 0.2 && p1 > p0,
        format!(
            "held-out CE {:.3} vs ln(mean legal) {:.3} on {} samples ({:.1}% lower); probe certain fraction {:.3} -> {:.3}",
            last.heldout_ce,
            last.heldout_baseline,
            last.heldout_n,
            reduction * 100.0,
            p0,
            p1
        ),
    )
}

fn gradient() -> Outcome {
    let mut r = rng::from_seed(2718);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let spec = if case % 2 == 0 { TTT } else { GOMOKU };
        let mut fs = FeatureSet::init_atomic(2, 2000).unwrap();
        let grow: Vec<_> = (0..4)
            .map(|_| {
                let s = random_state(spec, &mut r, 12);
                let pi = fs.policy(&s).unwrap();
                let t = random_target(pi.actions.clone(), &mut r);
                (s, t, pi)
            })
            .collect();
        fs.grow_features(&grow, 24, 2);
        for f in 0..fs.len() {
            fs.set_weight(f, r.gen_range(-1.5..1.5));
        }
        let n = r.gen_range(1..=3);
        let samples: Vec<(GameState, PolicyDist)> = (0..n)
            .map(|_| {
                let s = random_state(spec, &mut r, 20);
                let t = random_target(s.legal_actions().unwrap(), &mut r);
                (s, t)
            })
            .collect();
        let (_, grad) = fs
            .loss_and_gradient(samples.iter().map(|(s, t)| (s, t)))
            .unwrap();
        let batch: Vec<_> = samples
            .iter()
            .map(|(s, t)| (policy::activations(&fs, s), t.probs.clone()))
            .collect();
        let w: Vec<f64> = fs.weights().collect();
        let fd = policy::fd_gradient(&w, &batch, 1e-5);
        worst = worst.max(policy::relative_error(&grad, &fd));
    }
    check(
        worst < 1e-6,
        format!("worst relative error {worst:.2e} over 100 cases"),
    )
}

fn entry(moves: &[&str], played: &str) -> MoveEntry {
    MoveEntry {
        spec: TTT,
        moves: moves.iter().map(|m| a(m)).collect(),
        played: a(played),
        strength: None,
    }
}

fn ceiling() -> Outcome {
    let fixture = MoveDataset {
        source: "fixture".into(),
        entries: vec![
            entry(&["a1"], "b2"),
            entry(&["a1"], "b2"),
            entry(&["a1"], "c3"),
            entry(&["a1", "b2"], "c1"),
        ],
    };
    let unique = MoveDataset {
        source: "unique".into(),
        entries: vec![
            entry(&[], "b2"),
            entry(&["b2"], "a1"),
            entry(&["b2", "a1"], "c3"),
            entry(&["a1"], "b2"),
        ],
    };
    let (c, u) = (
        self_consistency_ceiling(&fixture),
        self_consistency_ceiling(&unique),
    );
    check(
        c == 0.75 && u == 1.0,
        format!("fixture {c}, all-unique {u}"),
    )
}

fn determinism() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    let fs = train_small(5).0;
    let s = GameState::from_moves(GOMOKU, &[a("h8"), a("h9"), a("j10")]).unwrap();
    let cfg = SearchConfig {
        iterations: 3000,
        node_cap: 500,
        ..SearchConfig::human(&GOMOKU)
    }
    .with_seed(8);
    let gomoku_fs = FeatureSet::init_atomic(2, 2000).unwrap();
    let x = search(&s, &gomoku_fs, &cfg, &PartitionParams::default()).unwrap();
    let mut reused = Searcher::new();
    reused
        .search(
            &s,
            &gomoku_fs,
            &cfg.clone().with_seed(1),
            &PartitionParams::default(),
        )
        .unwrap();
    let y = reused
        .search(&s, &gomoku_fs, &cfg, &PartitionParams::default())
        .unwrap();
    let same_search = x == y && x.root_value.to_bits() == y.root_value.to_bits();
    ok &= same_search;
    notes.push(format!("search result identical: {same_search}"));

    let (a1, b1) = (train_small(5).1, train_small(5).1);
    let same_ckpt = a1 == b1;
    ok &= same_ckpt;
    notes.push(format!(
        "{} checkpoints byte-identical: {same_ckpt}",
        a1.len()
    ));

    let tally = || {
        let mut p = AgentConfig::vanilla(&TTT);
        p.search.iterations = 300;
        let mut q = AgentConfig::human(&TTT);
        q.search.iterations = 300;
        let r = strength_match(
            &mut Agent::new(&fs, p),
            &mut Agent::new(&fs, q),
            &TTT,
            20,
            4,
        )
        .unwrap();
        (r.wins_a, r.draws, r.wins_b)
    };
    let (t1, t2) = (tally(), tally());
    ok &= t1 == t2;
    notes.push(format!("strength tallies {t1:?} and {t2:?}"));

    let mut ds = MoveDataset {
        source: "det".into(),
        entries: vec![entry(&[], "b2"), entry(&["a1"], "b2"), entry(&["b2"], "a1")],
    };
    let mut agent = Agent::new(&fs, AgentConfig::vanilla(&TTT));
    let m1 = move_match(&ds, &mut agent, &[1, 3], 3).unwrap();
    ds.entries.reverse();
    let m2 = move_match(&ds, &mut agent, &[1, 3], 3).unwrap();
    ok &= m1.top1 == m2.top1 && m1.topk == m2.topk;
    notes.push(format!("move match top1 {} and {}", m1.top1, m2.top1));

    check(ok, notes.join("; "))
}

fn train_small(seed: u64) -> (FeatureSet, Vec<Vec<u8>>) {
    let mut cfg = AgentConfig::vanilla(&TTT);
    cfg.search.iterations = 300;
    let train = TrainConfig {
        iterations: 3,
        games_per_iter: 12,
        seed,
        ..TrainConfig::default()
    };
    let mut bytes = Vec::new();
    let (fs, _) = expert_iteration(&TTT, &cfg, &train, &[], |_, f| {
        bytes.push(weights_to_json(f).into_bytes())
    })
    .unwrap();
    (fs, bytes)
}

fn human_depth() -> Outcome {
    let cfg = AgentConfig::human(&GOMOKU);
    let fs = cfg.initial_features().unwrap();
    let depth_cap = cfg.search.depth_cap;
    let mut agent = Agent::new(&fs, cfg);
    let (mut searches, mut deepest, mut over) = (0u64, 0u32, 0u64);
    for g in 0..100u64 {
        let mut s = GameState::new(GOMOKU);
        while !s.is_terminal() {
            let d = agent
                .decide(&s, rng::derive(g, s.stone_count() as u64))
                .unwrap();
            if let Some(r) = &d.search {
                let depth = r.stats.max_depth_reached;
                searches += 1;
                deepest = deepest.max(depth);
                if depth > 5 {
                    over += 1;
                }
            }
            s.play(d.action).unwrap();
        }
    }
    check(
        depth_cap == Some(5) && over == 0 && searches > 0,
        format!("{searches} searches over 100 games, deepest {deepest} plies, {over} beyond 5"),
    )
}

fn main() -> ExitCode {
    let mut failures = Vec::new();
    let t = Instant::now();
    report("oracle tactics", t, tactics(), &mut failures);

    let t = Instant::now();
    let trained = train_ttt();
    println!(
        "     (trained {} iterations in {:.0}s)",
        trained.report.rows.len(),
        trained.elapsed.as_secs_f64()
    );
    report("never lose", t, never_lose(&trained), &mut failures);
    let t = Instant::now();
    report("memory bound", t, memory_bound(), &mut failures);
    let t = Instant::now();
    report("memory strength", t, memory_strength(), &mut failures);
    let t = Instant::now();
    report(
        "bypass decisions",
        t,
        bypass_decisions(&trained),
        &mut failures,
    );
    let t = Instant::now();
    report("bypass samples", t, bypass_samples(&trained), &mut failures);
    let t = Instant::now();
    report("learning signal", t, learning(&trained), &mut failures);
    let t = Instant::now();
    report("gradient", t, gradient(), &mut failures);
    let t = Instant::now();
    report("ceiling", t, ceiling(), &mut failures);
    let t = Instant::now();
    report("determinism", t, determinism(), &mut failures);
    let t = Instant::now();
    report("human depth", t, human_depth(), &mut failures);

    if failures.is_empty() {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failures.join(", "));
        ExitCode::FAILURE
    }
}
