//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails. Pass criterion numbers as arguments
//! to run a subset.

use std::net::{TcpListener, TcpStream};
use std::os::unix::net::UnixStream;
use std::thread;
use std::time::{Duration, Instant};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use bcns::codes::{dual_basis, generate_parity_check, gv_failure_bound, min_distance_bruteforce, LinearCode, ParityCheck};
use bcns::estimate::{estimate_probabilities, SourceRates};
use bcns::hashing::{extract, sample_hash_seed, HashSeed};
use bcns::net::{run_alice, run_bob};
use bcns::photon::RoundChannel;
use bcns::protocol::{
    bc_commit, bob_precheck, bob_verify, cheating_alice_open, run_local, AliceInputs, CodeSource, Reason, SessionConfig,
};
use bcns::security::entropy::{classical_min_entropy, depolarizing_capacity, depolarizing_strong_converse, max_over_s, uncertainty_rate};
use bcns::security::optimize::log_grid;
use bcns::security::region::max_tolerable_p_err;
use bcns::security::repro::{reproduce, ExperimentInputs};
use bcns::security::storage::optimal_split;
use bcns::security::{security_region, Axis, AxisSpec, RegionParams, StorageAssumption};
use bcns::symmetrize::{adjusted_no_click, apply_symmetrization, solve_keep_probabilities, DetectorCounts};
use bcns::transcript::{replay_bob, Transcript};
use bcns::wire::{decode_stream, Message, DIGEST_LEN};
use bcns::BitString;

struct Check {
    pass: bool,
    detail: String,
}

impl Check {
    fn new() -> Self {
        Self {
            pass: true,
            detail: String::new(),
        }
    }

    /// Records a named condition with the values that decided it.
    fn expect(&mut self, ok: bool, what: impl std::fmt::Display) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        if !ok {
            self.detail.push_str("MISS ");
        }
        self.detail.push_str(&what.to_string());
        self.pass &= ok;
    }
}

fn within(actual: f64, target: f64, tol: f64) -> bool {
    (actual - target).abs() <= tol
}

// Parameter estimation from the published rates.
fn criterion_1() -> Check {
    let mut c = Check::new();
    let rates = SourceRates::new(23758.0, 22227.0, 2997.0, 3e-9);
    let start = Instant::now();
    let p = estimate_probabilities(&rates).expect("valid rates");
    let elapsed = start.elapsed();
    c.expect(within(p.p_sent_0, 0.875, 1e-3), format!("p_sent_0 = {:.5} (0.875 +- 0.001)", p.p_sent_0));
    c.expect(
        within(p.p_sent_multi, 5.32e-4, 0.02 * 5.32e-4),
        format!("p_sent_multi = {:.4e} (5.32e-4 +- 2%)", p.p_sent_multi),
    );
    c.expect(within(p.p_sent_1, 0.125, 1e-3), format!("p_sent_1 = {:.5} (0.125 +- 0.001)", p.p_sent_1));
    c.expect(within(p.p_noclick_h, 0.875, 1e-3), format!("p_noclick = {:.5} (0.875 +- 0.001)", p.p_noclick_h));
    c.expect(elapsed < Duration::from_millis(1), format!("estimate in {elapsed:?} (< 1 ms)"));
    c
}

// Symmetrization: the adjusted loss rate and flattened cells on biased counts.
fn criterion_2() -> Check {
    let mut c = Check::new();
    let adjusted = adjusted_no_click(0.875, 0.729646);
    c.expect(within(adjusted, 0.909, 5e-4), format!("adjusted no-click = {adjusted:.5} (0.909 +- 5e-4)"));

    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let bias = WeightedIndex::new([0.31, 0.22, 0.26, 0.21]).unwrap();
    let events: Vec<(bool, bool)> = (0..1_000_000)
        .map(|_| {
            let cell = bias.sample(&mut rng);
            (cell >= 2, cell % 2 == 1)
        })
        .collect();
    let mut counts = DetectorCounts::default();
    for &(x, th) in &events {
        counts.record(x, th);
    }
    let keep = solve_keep_probabilities(&counts).expect("all cells populated");
    let kept = apply_symmetrization(events, |e| *e, &keep, &mut rng);
    let mut after = DetectorCounts::default();
    for &(x, th) in &kept {
        after.record(x, th);
    }
    let total = after.total() as f64;
    let sigma = (0.25 * 0.75 / total).sqrt();
    let freqs = after.frequencies();
    let worst = freqs.iter().flatten().map(|f| (f - 0.25).abs()).fold(0.0, f64::max);
    c.expect(
        worst <= 3.0 * sigma,
        format!("max |cell - 1/4| = {worst:.2e} over {} kept (3 sigma = {:.2e})", kept.len(), 3.0 * sigma),
    );
    c
}

// The published five-step parameter pipeline.
fn criterion_3() -> Check {
    let mut c = Check::new();
    let r = reproduce(&ExperimentInputs::published()).expect("published inputs are feasible");
    c.expect(within(r.lambda_hat, 0.469133, 1e-6), format!("lambda_hat = {:.7} (0.469133 +- 1e-6)", r.lambda_hat));
    c.expect(r.r_max >= 0.531, format!("R_max = {:.5} (>= 0.531)", r.r_max));
    // Equal up to the rounding of the f64 sum.
    c.expect(
        (r.total_error - 2.0e-5).abs() <= 4.0 * f64::EPSILON * 2.0e-5,
        format!("eps_total = {:e} (2e-5)", r.total_error),
    );
    let near = |s: Option<u64>, target: i64| s.is_some_and(|v| (v as i64 - target).abs() <= 2);
    c.expect(near(r.s_bounded, 928), format!("S_bounded = {:?} (928 +- 2)", r.s_bounded));
    c.expect(near(r.s_noisy, 972), format!("S_noisy = {:?} (972 +- 2)", r.s_noisy));
    c.expect(within(r.delta_min, 0.0998, 5e-4), format!("delta_min = {:.5} (0.0998 +- 5e-4)", r.delta_min));
    c
}

/// Lowest secure `axis2` per `axis1` row.
fn thresholds(region: &bcns::security::Region) -> Vec<Option<f64>> {
    region.secure_range().into_iter().map(|(_, r)| r.map(|(lo, _)| lo)).collect()
}

fn ceilings(region: &bcns::security::Region) -> Vec<Option<f64>> {
    region.secure_range().into_iter().map(|(_, r)| r.map(|(_, hi)| hi)).collect()
}

/// Row by row, the harder setting is no more permissive than the easier one,
/// and a row secure somewhere under the harder setting is also secure under
/// the easier one.
fn dominated(harder: &[Option<f64>], easier: &[Option<f64>], threshold: bool) -> bool {
    harder.iter().zip(easier).all(|(h, e)| match (h, e) {
        (Some(h), Some(e)) => {
            if threshold {
                h >= e
            } else {
                h <= e
            }
        }
        (Some(_), None) => false,
        _ => true,
    })
}

fn secure_cells(region: &bcns::security::Region) -> usize {
    region.cells.iter().filter(|c| c.verdict.secure).count()
}

// Security regions on 50x50 grids.
fn criterion_4() -> Check {
    let mut c = Check::new();
    let steps = 50;

    // Minimum secure p1 over p-tilde, for increasing p_err at S = 2500.
    let s2500 = RegionParams {
        storage: StorageAssumption::Depolarizing { qubits: 2500.0, r: 0.9 },
        ..Default::default()
    };
    let errors = [0.0, 0.01, 0.02, 0.03];
    let grids: Vec<_> = errors
        .iter()
        .map(|&e| {
            security_region(
                AxisSpec::new(Axis::PNoclickH, 0.0, 0.9, steps),
                AxisSpec::new(Axis::PSent1, 0.0, 1.0, steps),
                &RegionParams { p_err: e, ..s2500 },
            )
            .expect("region")
        })
        .collect();
    let th: Vec<_> = grids.iter().map(thresholds).collect();
    let monotone = th.windows(2).all(|w| dominated(&w[1], &w[0], true));
    let shrinking = grids.windows(2).all(|w| secure_cells(&w[1]) < secure_cells(&w[0]));
    c.expect(
        monotone && shrinking,
        format!(
            "S=2500 p1 threshold rises with p_err (secure cells {:?})",
            grids.iter().map(secure_cells).collect::<Vec<_>>()
        ),
    );

    // Tolerable p_err per storage size at the ideal source.
    let grid = security_region(
        AxisSpec::new(Axis::Storage, 0.0, 20_000.0, steps),
        AxisSpec::new(Axis::PErr, 0.0, 0.06, steps),
        &RegionParams::default(),
    )
    .expect("region");
    let ceil = ceilings(&grid);
    let falls = ceil.windows(2).all(|w| dominated(&w[1..], &w[..1], false));
    let first = ceil[0].unwrap_or(f64::NAN);
    let last_secure = ceil.iter().rev().find_map(|v| *v).unwrap_or(f64::NAN);
    c.expect(
        falls && last_secure < first,
        format!("ideal source: tolerable p_err {first:.4} at S=0 falls to {last_secure:.4}"),
    );

    // The experiment-like source at several loss rates.
    let mut fig4 = true;
    let mut spans = Vec::new();
    for p_tilde in [0.0, 0.3, 0.6] {
        let fixed = RegionParams {
            p_sent_1: 0.765,
            p_noclick_d: 0.234,
            p_noclick_h: p_tilde,
            ..Default::default()
        };
        let grid = security_region(
            AxisSpec::new(Axis::Storage, 0.0, 20_000.0, steps),
            AxisSpec::new(Axis::PErr, 0.0, 0.06, steps),
            &fixed,
        )
        .expect("region");
        let ceil = ceilings(&grid);
        fig4 &= ceil.windows(2).all(|w| dominated(&w[1..], &w[..1], false));
        let defined: Vec<f64> = ceil.iter().flatten().copied().collect();
        fig4 &= defined.len() >= 2 && defined.last() < defined.first();
        spans.push(format!("{p_tilde}: {:.4}->{:.4}", defined.first().unwrap_or(&f64::NAN), defined.last().unwrap_or(&f64::NAN)));
    }
    c.expect(fig4, format!("p1=0.765 tolerable p_err decreasing in S ({})", spans.join(", ")));

    let p = max_tolerable_p_err(&RegionParams::default()).expect("evaluates").unwrap_or(f64::NAN);
    c.expect(within(p, 0.046, 0.003), format!("max tolerable p_err at S=0 = {p:.4} (0.046 +- 0.003)"));
    c
}

fn completeness_config() -> SessionConfig {
    let code = CodeSource::from_code(generate_parity_check(10_000, 5310, 1).expect("code"));
    SessionConfig::for_block(5e-4, 10_000, 0.909, 0.0412, code, 1).expect("config")
}

fn honest_inputs(s: u64, commit: bool, channel: RoundChannel) -> AliceInputs {
    AliceInputs {
        commit: BitString::from_bits([commit]),
        seed: s,
        channel_seed: 1_000_000 + s,
        channel,
        flips: vec![],
    }
}

// Honest sessions over TCP loopback.
fn criterion_5() -> Check {
    let mut c = Check::new();
    let sessions = 10_000u64;
    let cfg = completeness_config();
    let channel = RoundChannel::new(0.909, 0.0412).expect("channel");
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind loopback");
    let addr = listener.local_addr().unwrap();
    let alice_cfg = cfg.clone();
    let server = thread::spawn(move || {
        for s in 0..sessions {
            let (mut stream, _) = listener.accept().expect("accept");
            stream.set_nodelay(true).unwrap();
            run_alice(&mut stream, &alice_cfg, honest_inputs(s, s % 2 == 0, channel)).expect("alice");
        }
    });
    let mut rejected = 0u64;
    let mut wrong_bit = 0u64;
    for s in 0..sessions {
        let mut stream = TcpStream::connect(addr).expect("connect");
        stream.set_nodelay(true).unwrap();
        let bob = run_bob(&mut stream, &cfg, 2_000_000 + s).expect("bob").outcome;
        match bob.verdict.opened {
            Some(bits) if bob.verdict.accepted => wrong_bit += (bits.get(0) != (s % 2 == 0)) as u64,
            _ => rejected += 1,
        }
    }
    server.join().expect("server thread");
    let target = 2.0 * 5e-4;
    let mean = target * sessions as f64;
    let allowed = mean + 3.0 * (mean * (1.0 - target)).sqrt();
    c.expect(
        (rejected as f64) <= allowed,
        format!("{rejected} rejections in {sessions} sessions (allowed {allowed:.1})"),
    );
    c.expect(wrong_bit == 0, format!("{wrong_bit} wrong openings"));
    c
}

fn codewords(code: &LinearCode) -> Vec<BitString> {
    let basis = dual_basis(code.rows(), code.n());
    (1u64..1 << basis.len())
        .map(|mask| {
            basis
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .fold(BitString::zeros(code.n()), |acc, (_, b)| acc.xor(b).unwrap())
        })
        .collect()
}

/// One binding trial with p_err = 0: Bob tests a uniform `m`-subset of the
/// positions where his basis matched, and tolerates no error.
fn cheat_trial(code: &LinearCode, flips: &[usize], m: usize, rng: &mut ChaCha20Rng) -> Reason {
    let n = code.n();
    let x = BitString::random(n, rng);
    let commitment = bc_commit(&x, code, &BitString::from_bits([true]), rng).unwrap();
    // Sessions where Bob aborts before the opening are redrawn.
    let indices = loop {
        let matched: Vec<usize> = (0..n).filter(|_| rng.gen()).collect();
        if let Some(indices) = bob_precheck(&matched, m, rng) {
            break indices;
        }
    };
    let z = x.select(&indices);
    let opened = cheating_alice_open(&x, flips);
    bob_verify(&opened, &commitment, code, &z, &indices, 0.0, 0.0).unwrap().reason
}

// Empirical binding on small codes.
fn criterion_6() -> Check {
    let mut c = Check::new();
    let trials = 100_000;
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    for (n, k, seed) in [(16, 4, 1), (20, 5, 2), (24, 6, 3)] {
        let code = generate_parity_check(n, k, seed).unwrap();
        let d = min_distance_bruteforce(&code).unwrap();
        let words = codewords(&code);
        let bound = 0.5f64.powf(d as f64 / 2.0 - 1.0);
        let m = n / 4;
        let mut worst = 0.0f64;
        for w in &words {
            let flips: Vec<usize> = (0..n).filter(|&i| w.get(i)).collect();
            let accepted = (0..trials).filter(|_| cheat_trial(&code, &flips, m, &mut rng) == Reason::Ok).count();
            worst = worst.max(accepted as f64 / trials as f64);
        }
        c.expect(
            worst <= bound && words.len() == (1 << k) - 1,
            format!("[{n},{k},d={d}] worst codeword acceptance {worst:.4} over {} words (bound {bound:.4})", words.len()),
        );

        let mut always_caught = true;
        let mut tried = 0;
        while tried < 10_000 {
            let pattern = BitString::random(n, &mut rng);
            if code.syndrome(&pattern).unwrap().weight() == 0 {
                continue;
            }
            tried += 1;
            let flips: Vec<usize> = (0..n).filter(|&i| pattern.get(i)).collect();
            always_caught &= cheat_trial(&code, &flips, m, &mut rng) == Reason::SyndromeMismatch;
        }
        c.expect(always_caught, format!("[{n},{k}] {tried} non-codeword flips all rejected by syndrome"));
    }
    c
}

// Two-universality and linearity of the extractor.
fn criterion_7() -> Check {
    let mut c = Check::new();
    let (n, l) = (12usize, 3usize);
    let seed_len = n + l - 1;
    let seeds: Vec<HashSeed> = (0u64..1 << seed_len)
        .map(|s| HashSeed::new(n, l, BitString::from_words(seed_len, vec![s])).unwrap())
        .collect();
    let input = |v: u64| BitString::from_words(n, vec![v]);
    // Ext(x) = Ext(x') exactly when Ext(x XOR x') = 0, so each distinct pair
    // is covered by its nonzero difference. Linearity is checked below.
    let zero = BitString::zeros(l);
    let worst = (1u64..1 << n)
        .map(|diff| {
            let x = input(diff);
            seeds.iter().filter(|s| extract(&x, s).unwrap() == zero).count()
        })
        .max()
        .unwrap();
    let worst_p = worst as f64 / seeds.len() as f64;
    c.expect(
        worst_p <= 0.125,
        format!("worst collision probability {worst_p:.5} over {} differences x {} seeds (<= 1/8)", (1 << n) - 1, seeds.len()),
    );

    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let mut direct = true;
    for _ in 0..200 {
        let (a, b) = (rng.gen_range(0..1u64 << n), rng.gen_range(0..1u64 << n));
        if a == b {
            continue;
        }
        let hits = seeds
            .iter()
            .filter(|s| extract(&input(a), s).unwrap() == extract(&input(b), s).unwrap())
            .count();
        direct &= hits as f64 / seeds.len() as f64 <= 0.125;
    }
    c.expect(direct, "200 sampled pairs checked directly");

    let mut linear = true;
    for _ in 0..1000 {
        let n = rng.gen_range(1..300);
        let l = rng.gen_range(1..=n.min(40));
        let seed = sample_hash_seed(n, l, &mut rng).unwrap();
        let (x, y) = (BitString::random(n, &mut rng), BitString::random(n, &mut rng));
        let lhs = extract(&x.xor(&y).unwrap(), &seed).unwrap();
        let rhs = extract(&x, &seed).unwrap().xor(&extract(&y, &seed).unwrap()).unwrap();
        linear &= lhs == rhs;
    }
    c.expect(linear, "Ext(x ^ y) = Ext(x) ^ Ext(y) on 1000 random triples");
    c
}

// Distance of random codes against the Gilbert-Varshamov style bound.
fn criterion_8() -> Check {
    let mut c = Check::new();
    let (n, k, seeds) = (16usize, 8usize, 1000u64);
    let bad = (0..seeds)
        .filter(|&s| min_distance_bruteforce(&generate_parity_check(n, k, s).unwrap()).unwrap() <= 2)
        .count();
    let frac = bad as f64 / seeds as f64;
    let bound = gv_failure_bound(0.5, 2.0 / 16.0, 16);
    c.expect(frac <= bound, format!("{bad}/{seeds} codes with d <= 2, fraction {frac:.3} (bound {bound:.3})"));
    c
}

/// Brute-force maximum of `f` on `grid`, then again on a uniform grid
/// spanning the neighbours of the best point.
fn brute_max(f: impl Fn(f64) -> f64, grid: &[f64], fine: usize) -> f64 {
    let (i, _) = grid
        .iter()
        .map(|&x| f(x))
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    (0..=fine)
        .map(|j| f(lo + (hi - lo) * j as f64 / fine as f64))
        .chain(grid.iter().map(|&x| f(x)))
        .fold(f64::NEG_INFINITY, f64::max)
}

// Optimizers against dense-grid brute force.
fn criterion_9() -> Check {
    let mut c = Check::new();
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let log_uniform = |rng: &mut ChaCha20Rng, lo: f64, hi: f64| (rng.gen_range(lo.ln()..hi.ln())).exp();

    let s_grid = log_grid(1e-9, 1.0, 100_000);
    let mut worst_s = 0.0f64;
    for _ in 0..100 {
        let rounds = log_uniform(&mut rng, 1e3, 3e5);
        let penalty = rng.gen_range(5.0..60.0);
        let f = |s: f64| rounds * uncertainty_rate(s) - penalty / s;
        worst_s = worst_s.max((max_over_s(rounds, penalty).value - brute_max(f, &s_grid, 100_000)).abs());
    }
    c.expect(worst_s <= 1e-6, format!("s: max |opt - brute| = {worst_s:.2e}"));

    let t_grid = log_grid(1e-6, 1e6, 100_000);
    let mut worst_a = 0.0f64;
    for _ in 0..100 {
        let r = rng.gen_range(0.5..0.99);
        let rate = rng.gen_range(0.2..1.5);
        let f = |t: f64| (t / (1.0 + t)) * (rate - depolarizing_capacity(r, 1.0 + t));
        let brute = brute_max(f, &t_grid, 100_000)
            .max(rate - depolarizing_capacity(r, f64::INFINITY))
            .max(0.0);
        worst_a = worst_a.max((depolarizing_strong_converse(r, rate) - brute).abs());
    }
    c.expect(worst_a <= 1e-6, format!("alpha: max |opt - brute| = {worst_a:.2e}"));

    let mut f_grid: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
    f_grid.extend(log_grid(1e-9, 1e-3, 300).into_iter().map(|u| 1.0 - u));
    f_grid.sort_by(f64::total_cmp);
    let mut worst_e = 0.0f64;
    for _ in 0..100 {
        let rounds = log_uniform(&mut rng, 1e4, 4e5);
        let budget = log_uniform(&mut rng, 1e-7, 1e-3);
        let f = |f: f64| classical_min_entropy(rounds, f * budget) - (1.0 / ((1.0 - f) * budget)).log2();
        worst_e = worst_e.max((optimal_split(rounds, budget).exponent - brute_max(f, &f_grid, 500)).abs());
    }
    c.expect(worst_e <= 1e-6, format!("eps split: max |opt - brute| = {worst_e:.2e}"));
    c
}

fn random_message(rng: &mut ChaCha20Rng) -> Message {
    let bits = |rng: &mut ChaCha20Rng| {
        let len = rng.gen_range(0..300);
        BitString::random(len, rng)
    };
    let list = |rng: &mut ChaCha20Rng| {
        let len = rng.gen_range(0..50);
        (0..len).map(|_| rng.gen()).collect()
    };
    let reason = |rng: &mut ChaCha20Rng| Reason::ALL[rng.gen_range(0..Reason::ALL.len())];
    match rng.gen_range(0..11) {
        0 => {
            let mut digest = [0u8; DIGEST_LEN];
            rng.fill(&mut digest);
            Message::Hello { session: rng.gen(), digest }
        }
        1 => {
            let len = rng.gen_range(0..300);
            Message::ChannelBatch {
                x: BitString::random(len, rng),
                theta: BitString::random(len, rng),
                click: BitString::random(len, rng),
                flip: BitString::random(len, rng),
            }
        }
        2 => Message::Missing(list(rng)),
        3 => Message::Basis(bits(rng)),
        4 => Message::Syndrome(bits(rng)),
        5 => Message::Seed(bits(rng)),
        6 => Message::Mask(bits(rng)),
        7 => Message::Open(bits(rng)),
        8 => Message::Verdict {
            accepted: rng.gen(),
            reason: reason(rng),
            opened: bits(rng),
        },
        9 => Message::Abort(reason(rng)),
        _ => Message::Truncation(list(rng)),
    }
}

// Wire round trips, socket vs in-process equality, and replay.
fn criterion_10() -> Check {
    let mut c = Check::new();
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    let messages: Vec<Message> = (0..100_000).map(|_| random_message(&mut rng)).collect();
    let mut stream = Vec::new();
    let mut single = true;
    for m in &messages {
        let frame = m.to_frame();
        single &= Message::from_frame(&frame).is_ok_and(|(back, used)| back == *m && used == frame.len());
        stream.extend_from_slice(&frame);
    }
    let whole = decode_stream(&stream).is_ok_and(|back| back == messages);
    c.expect(single && whole, format!("{} random messages round trip ({} bytes)", messages.len(), stream.len()));

    let code = CodeSource::from_code(generate_parity_check(2000, 1000, 4).unwrap());
    let cfg = SessionConfig::for_block(1e-3, 2000, 0.6, 0.03, code, 1).unwrap();
    let channel = RoundChannel::new(0.6, 0.03).unwrap();
    let mut identical = true;
    let mut replayed = true;
    for s in 0..5u64 {
        let local = run_local(&cfg, honest_inputs(s, s % 2 == 1, channel), 50 + s, true).unwrap();
        let (mut a, mut b) = UnixStream::pair().unwrap();
        let acfg = cfg.clone();
        let alice = thread::spawn(move || run_alice(&mut a, &acfg, honest_inputs(s, s % 2 == 1, channel)).unwrap());
        let bob = run_bob(&mut b, &cfg, 50 + s).unwrap();
        let alice = alice.join().unwrap();
        let wire = |t: &Transcript| -> Vec<u8> {
            t.records.iter().flat_map(|r| [vec![r.direction as u8], r.message.to_frame()].concat()).collect()
        };
        let recorded = local.transcript.as_ref().unwrap();
        identical &= alice.outcome == local.alice
            && bob.outcome == local.bob
            && wire(&alice.transcript) == wire(recorded)
            && wire(&bob.transcript) == wire(recorded);

        let parsed = Transcript::from_bytes(&bob.transcript.to_bytes()).unwrap();
        replayed &= replay_bob(&cfg, 50 + s, &parsed).is_ok_and(|o| o.verdict == bob.outcome.verdict && o == bob.outcome);
    }
    c.expect(identical, "socket runs equal in-process runs bit for bit (5 seeds)");
    c.expect(replayed, "transcript replay reproduces the verdict (5 seeds)");
    c
}

type Criterion = (u32, &'static str, u64, fn() -> Check);

const CRITERIA: [Criterion; 10] = [
    (1, "parameter estimation", 1, criterion_1),
    (2, "symmetrization", 5, criterion_2),
    (3, "parameter pipeline", 30, criterion_3),
    (4, "security regions", 300, criterion_4),
    (5, "completeness", 600, criterion_5),
    (6, "binding", 120, criterion_6),
    (7, "hashing", 60, criterion_7),
    (8, "random-code bound", 60, criterion_8),
    (9, "optimizer oracles", 60, criterion_9),
    (10, "wire and transcript", 120, criterion_10),
];

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (id, name, limit, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let mut check = run();
        let elapsed = start.elapsed();
        check.expect(elapsed <= Duration::from_secs(limit), format!("{:.2}s (limit {limit}s)", elapsed.as_secs_f64()));
        let status = if check.pass { "PASS" } else { "FAIL" };
        println!("criterion {id} ({name}): {status}: {}", check.detail);
        if !check.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
