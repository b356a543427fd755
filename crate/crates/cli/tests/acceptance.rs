//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Run with `cargo test -p qwalk --test acceptance`.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qwalk_core::classical::{crw_disordered_step, crw_exact, crw_exact_count, ClassicalDistribution};
use qwalk_core::disorder::DEFAULT_TAIL_BOUND;
use qwalk_core::walk::{evolve, Jumps};
use qwalk_core::{
    ensemble_average, fit_exponent, CoinKind, CoinOperator, DisorderMode, DisorderSpec, Distribution, EnsembleResult, Protocol,
    QuantumWalk, Walker, WalkerState,
};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Geometric, Hypergeometric, NegativeBinomial, Poisson, Binomial};

/// Master seed for every ensemble in this suite.
const SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn poisson(lambda: f64) -> DisorderSpec {
    DisorderSpec::with_default_tail(Distribution::Poisson { lambda }).unwrap()
}

fn desk_protocol(min_realizations: usize) -> Protocol {
    Protocol { min_realizations, master_seed: SEED, ..Protocol::default() }
}

/// Memoized ensembles, keyed by a label, with their wall time.
#[derive(Default)]
struct Ensembles {
    runs: HashMap<String, (EnsembleResult, Duration)>,
}

impl Ensembles {
    fn get(&mut self, key: &str, walker: Walker, spec: &DisorderSpec, min_realizations: usize) -> (EnsembleResult, Duration) {
        if let Some(hit) = self.runs.get(key) {
            return hit.clone();
        }
        let start = Instant::now();
        let result = ensemble_average(&walker, Some(spec), &desk_protocol(min_realizations)).unwrap();
        let entry = (result, start.elapsed());
        self.runs.insert(key.to_string(), entry.clone());
        entry
    }

    fn quantum(&mut self, kind: CoinKind, mode: DisorderMode, spec: &DisorderSpec, min_realizations: usize) -> (EnsembleResult, Duration) {
        let key = format!("{kind}/{mode:?}/{}", spec.distribution());
        self.get(&key, Walker::Quantum(QuantumWalk::preset(kind, 50, mode)), spec, min_realizations)
    }
}

fn describe(label: &str, r: &EnsembleResult, took: Duration) -> String {
    format!(
        "{label} α={:.3}±{:.3} (n={}, {}, {:.0}s)",
        r.fit.alpha,
        r.fit.ci95,
        r.realizations,
        if r.converged { "converged" } else { "unconverged" },
        took.as_secs_f64()
    )
}

fn unitarity() -> Outcome {
    let start = Instant::now();
    let spec = poisson(1.0);
    let mut worst = 0.0f64;
    for kind in [CoinKind::Grover, CoinKind::Fourier, CoinKind::Hadamard] {
        let coin = CoinOperator::preset(kind);
        let mut state = WalkerState::preset(kind);
        let traj = evolve(&mut state, &coin, Jumps::Clean, 50, &[]).unwrap();
        worst = traj.norm.iter().fold(worst, |w, n| w.max((n - 1.0).abs()));
        for seed in 0..20 {
            let seq = spec.sample_sequence(50, seed);
            let mut state = WalkerState::preset(kind);
            let traj = evolve(&mut state, &coin, Jumps::Dynamic(&seq), 50, &[]).unwrap();
            worst = traj.norm.iter().fold(worst, |w, n| w.max((n - 1.0).abs()));
        }
    }
    let took = start.elapsed();
    outcome(worst <= 1e-9 && took < Duration::from_secs(60), format!("max |ΣP−1| = {worst:.2e} over 63 runs, {:.1}s", took.as_secs_f64()))
}

fn worked_amplitudes() -> Outcome {
    let coin = CoinOperator::preset(CoinKind::Grover);
    let q = |v: f64| Complex64::new(v, 0.0);
    let mut problems = Vec::new();
    for (j1, j2) in [(1u32, 1u32), (1, 2), (2, 1)] {
        let mut s = WalkerState::preset(CoinKind::Grover);
        s.step(&coin, j1);
        let a = j1 as i64;
        let psi1 = [((a, 0, 0), -0.5), ((-a, 0, 1), -0.5), ((0, a, 2), 0.5), ((0, -a, 3), 0.5)];
        for ((x, y, c), v) in psi1 {
            if s.amplitude(x, y, c) != q(v) {
                problems.push(format!("Ψ(1) J₁={j1} ({x},{y};{c}) = {}", s.amplitude(x, y, c).re));
            }
        }
        s.step(&coin, j2);
        let b = j2 as i64;
        // coin-0 component (−|J₂+J₁,0⟩ − |J₂−J₁,0⟩ + |J₂,J₁⟩ − |J₂,−J₁⟩)/4
        let expected: HashMap<(i64, i64), f64> = [((b + a, 0), -0.25), ((b - a, 0), -0.25), ((b, a), 0.25), ((b, -a), -0.25)].into();
        let reach = (a + b) + 1;
        for x in -reach..=reach {
            for y in -reach..=reach {
                let want = expected.get(&(x, y)).copied().unwrap_or(0.0);
                let got = s.amplitude(x, y, 0);
                if got != q(want) {
                    problems.push(format!("Ψ(2) (J₁,J₂)=({j1},{j2}) at ({x},{y}): got {:+}, expected {want:+}", got.re));
                }
            }
        }
    }
    if problems.is_empty() {
        outcome(true, "Ψ(1) and Ψ(2) coin-0 exact for (1,1), (1,2), (2,1)")
    } else {
        outcome(false, format!("{} mismatches; first: {}", problems.len(), problems[0]))
    }
}

fn clean_scaling() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for kind in [CoinKind::Grover, CoinKind::Fourier, CoinKind::Hadamard] {
        let sigma = QuantumWalk::preset(kind, 50, DisorderMode::None).sigma_series(None, 0, 0).unwrap();
        let series: Vec<(f64, f64)> = sigma.iter().enumerate().map(|(t, &s)| (t as f64, s)).collect();
        let fit = fit_exponent(&series, 18.0, 50.0).unwrap();
        pass &= within(fit.alpha, 1.0, 0.02);
        parts.push(format!("{kind} α={:.4}", fit.alpha));
    }
    let took = start.elapsed();
    pass &= took < Duration::from_secs(120);
    outcome(pass, format!("{} (target 1.00±0.02), {:.1}s", parts.join(", "), took.as_secs_f64()))
}

fn poisson_exponents(ens: &mut Ensembles) -> Outcome {
    let cases = [
        (CoinKind::Grover, 1.0, 0.96),
        (CoinKind::Fourier, 1.0, 0.89),
        (CoinKind::Hadamard, 1.0, 0.77),
        (CoinKind::Grover, 0.7, 0.99),
        (CoinKind::Hadamard, 2.0, 0.72),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    let mut alpha = HashMap::new();
    for (kind, lambda, target) in cases {
        let (r, took) = ens.quantum(kind, DisorderMode::Dynamic, &poisson(lambda), 200);
        let ok = within(r.fit.alpha, target, 0.05) && r.fit.alpha > 0.5 && r.fit.alpha <= 1.0 && r.realizations >= 200;
        pass &= ok;
        alpha.insert((kind, lambda.to_bits()), r.fit.alpha);
        parts.push(format!("{} [{target}] {}", describe(&format!("{kind}/P({lambda})"), &r, took), if ok { "ok" } else { "off" }));
    }
    let a = |k| alpha[&(k, 1.0f64.to_bits())];
    let ordered = a(CoinKind::Grover) > a(CoinKind::Fourier) && a(CoinKind::Fourier) > a(CoinKind::Hadamard);
    pass &= ordered;
    parts.push(format!("ordering G>F>H {}", if ordered { "holds" } else { "violated" }));
    outcome(pass, parts.join("; "))
}

fn distribution_families(ens: &mut Ensembles) -> Outcome {
    let hyper = DisorderSpec::with_default_tail(Distribution::Hypergeometric { population: 20, successes: 5, draws: 4 }).unwrap();
    let geo = DisorderSpec::with_default_tail(Distribution::Geometric { p: 0.5 }).unwrap();
    let (h, th) = ens.quantum(CoinKind::Grover, DisorderMode::Dynamic, &hyper, 200);
    let (g, tg) = ens.quantum(CoinKind::Grover, DisorderMode::Dynamic, &geo, 200);
    let (p, _) = ens.quantum(CoinKind::Grover, DisorderMode::Dynamic, &poisson(1.0), 200);
    let hyper_ok = within(h.fit.alpha, 0.99, 0.05);
    let geo_ok = within(g.fit.alpha, 0.91, 0.05);
    let ordered = h.fit.alpha > p.fit.alpha && p.fit.alpha > g.fit.alpha;
    outcome(
        hyper_ok && geo_ok && ordered,
        format!(
            "{} [0.99] {}; {} [0.91] {}; ordering hyper {:.3} > poisson {:.3} > geometric {:.3} {}",
            describe("hypergeometric", &h, th),
            if hyper_ok { "ok" } else { "off" },
            describe("geometric", &g, tg),
            if geo_ok { "ok" } else { "off" },
            h.fit.alpha,
            p.fit.alpha,
            g.fit.alpha,
            if ordered { "holds" } else { "violated" }
        ),
    )
}

fn one_dimensional(ens: &mut Ensembles) -> Outcome {
    let sigma = QuantumWalk::preset(CoinKind::Hadamard2, 200, DisorderMode::None).sigma_series(None, 0, 0).unwrap();
    let ratio = sigma[200] / 200.0;
    let target = (1.0 - std::f64::consts::FRAC_1_SQRT_2).sqrt();
    let clean_ok = (ratio / target - 1.0).abs() <= 0.02;
    let (line, tl) = ens.quantum(CoinKind::Hadamard2, DisorderMode::Dynamic, &poisson(1.0), 200);
    let line_ok = within(line.fit.alpha, 0.75, 0.05);
    let (grover, _) = ens.quantum(CoinKind::Grover, DisorderMode::Dynamic, &poisson(1.0), 200);
    let gap = grover.fit.alpha - line.fit.alpha;
    outcome(
        clean_ok && line_ok && gap >= 0.1,
        format!(
            "σ(200)/200 = {ratio:.4} vs {target:.4} {}; {} [0.75] {}; 2D−1D gap {gap:.3} {}",
            if clean_ok { "ok" } else { "off" },
            describe("1D/P(1)", &line, tl),
            if line_ok { "ok" } else { "off" },
            if gap >= 0.1 { "ok" } else { "off" }
        ),
    )
}

fn classical(ens: &mut Ensembles) -> Outcome {
    let mut enumeration_ok = true;
    for t in 0..=8usize {
        let mut ends: HashMap<(i64, i64), u128> = HashMap::new();
        for mut code in 0..4usize.pow(t as u32) {
            let (mut x, mut y) = (0i64, 0i64);
            for _ in 0..t {
                match code % 4 {
                    0 => x += 1,
                    1 => x -= 1,
                    2 => y += 1,
                    _ => y -= 1,
                }
                code /= 4;
            }
            *ends.entry((x, y)).or_default() += 1;
        }
        let r = t as i64 + 1;
        for x in -r..=r {
            for y in -r..=r {
                enumeration_ok &= crw_exact_count(t, x, y) == ends.get(&(x, y)).copied().unwrap_or(0);
            }
        }
    }
    let mut p = ClassicalDistribution::point_mass();
    let mut map_err = 0.0f64;
    for t in 1..=50usize {
        p = crw_disordered_step(&p, 1);
        let r = t as i64;
        for x in -r..=r {
            for y in -r..=r {
                map_err = map_err.max((p.get(x, y) - crw_exact(t, x, y)).abs());
            }
        }
    }
    let clean = qwalk_core::classical::classical_sigma_series(None, 50, 0, 0).unwrap();
    let series: Vec<(f64, f64)> = clean.iter().enumerate().map(|(t, &s)| (t as f64, s)).collect();
    let clean_fit = fit_exponent(&series, 18.0, 50.0).unwrap();
    let (dis, took) = ens.get("classical/P(1)", Walker::Classical { steps: 50 }, &poisson(1.0), 200);
    let pass = enumeration_ok && map_err <= 1e-12 && within(clean_fit.alpha, 0.5, 0.03) && within(dis.fit.alpha, 0.5, 0.03);
    outcome(
        pass,
        format!(
            "enumeration t≤8 {}; map vs closed form max err {map_err:.1e}; clean α={:.4}; {}",
            if enumeration_ok { "exact" } else { "MISMATCH" },
            clean_fit.alpha,
            describe("P(1)", &dis, took)
        ),
    )
}

fn static_disorder(ens: &mut Ensembles) -> Outcome {
    let (st, took) = ens.quantum(CoinKind::Grover, DisorderMode::Static, &poisson(1.0), 100);
    let (dy, _) = ens.quantum(CoinKind::Grover, DisorderMode::Dynamic, &poisson(1.0), 200);
    let inside = st.fit.alpha > 0.5 && st.fit.alpha < 1.0;
    let close = (st.fit.alpha - dy.fit.alpha).abs() <= 0.1;
    outcome(
        inside && close && st.realizations >= 100,
        format!("{}; dynamic α={:.3}; |Δ|={:.3}", describe("static P(1)", &st, took), dy.fit.alpha, (st.fit.alpha - dy.fit.alpha).abs()),
    )
}

fn oracle_pmf(d: &Distribution, k: u64) -> f64 {
    match *d {
        Distribution::Poisson { lambda } => Poisson::new(lambda).unwrap().pmf(k),
        Distribution::Binomial { n, p } => Binomial::new(p, n).unwrap().pmf(k),
        Distribution::Hypergeometric { population, successes, draws } => Hypergeometric::new(population, successes, draws).unwrap().pmf(k),
        Distribution::NegativeBinomial { r, p } => NegativeBinomial::new(r as f64, p).unwrap().pmf(k),
        Distribution::Geometric { p } => Geometric::new(p).unwrap().pmf(k + 1),
    }
}

fn sampler() -> Outcome {
    const DRAWS: usize = 1_000_000;
    let dists = [
        Distribution::Poisson { lambda: 1.0 },
        Distribution::Binomial { n: 5, p: 0.2 },
        Distribution::Hypergeometric { population: 20, successes: 5, draws: 4 },
        Distribution::NegativeBinomial { r: 1, p: 0.5 },
        Distribution::Geometric { p: 0.5 },
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, d) in dists.iter().enumerate() {
        let spec = DisorderSpec::with_default_tail(*d).unwrap();
        let radius = spec.truncation_radius();
        let mut cdf = 0.0;
        let oracle_radius = (0u64..).find(|&k| {
            cdf += oracle_pmf(d, k);
            1.0 - cdf <= DEFAULT_TAIL_BOUND
        });
        let radius_ok = oracle_radius == Some(radius as u64);

        let mut counts = vec![0u64; radius as usize + 1];
        let mut stream = qwalk_core::rng::seeded(SEED + i as u64);
        for _ in 0..DRAWS {
            counts[spec.sample_jump(&mut stream) as usize] += 1;
        }
        let n = DRAWS as f64;
        let mean = counts.iter().enumerate().map(|(k, &c)| k as f64 * c as f64).sum::<f64>() / n;
        let var = counts.iter().enumerate().map(|(k, &c)| (k as f64 - mean).powi(2) * c as f64).sum::<f64>() / (n - 1.0);
        let exact = d.exact_moments();
        let z = (mean - exact.mean) / (exact.variance / n).sqrt();
        let fano = var / mean;
        let fano_ok = match exact.fano {
            f if f < 1.0 => fano < 1.0,
            f if f > 1.0 => fano > 1.0,
            _ => (fano - 1.0).abs() < 0.01,
        };
        let total: f64 = (0..=radius as u64).map(|k| oracle_pmf(d, k)).sum();
        let (mut chi2, mut cells, mut obs, mut exp) = (0.0, 0usize, 0.0, 0.0);
        for (k, &c) in counts.iter().enumerate() {
            obs += c as f64;
            exp += n * oracle_pmf(d, k as u64) / total;
            if exp >= 5.0 || k == radius as usize {
                chi2 += (obs - exp).powi(2) / exp;
                cells += 1;
                obs = 0.0;
                exp = 0.0;
            }
        }
        let p_value = 1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(chi2);
        let ok = radius_ok && z.abs() <= 4.0 && fano_ok && p_value > 1e-3;
        pass &= ok;
        parts.push(format!("{} R={radius} z={z:+.2} F={fano:.3} p={p_value:.3}{}", d.name(), if ok { "" } else { " FAIL" }));
    }
    outcome(pass, parts.join("; "))
}

fn fit_recovery() -> Outcome {
    let mut rng = qwalk_core::rng::seeded(SEED);
    let mut worst = 0.0f64;
    for b in [0.5, 0.75, 1.0] {
        for _ in 0..20 {
            let series: Vec<(f64, f64)> =
                (1..=50).map(|t| (t as f64, 1.7 * (t as f64).powf(b) * (1.0 + 1e-3 * rng.random_range(-1.0..1.0)))).collect();
            worst = worst.max((fit_exponent(&series, 18.0, 50.0).unwrap().alpha - b).abs());
        }
    }
    let mut residual = 0.0f64;
    for b in [0.5, 0.75, 1.0] {
        let series: Vec<(f64, f64)> = (1..=50).map(|t| (t as f64, 2.0 * (t as f64).powf(b))).collect();
        let fit = fit_exponent(&series, 18.0, 50.0).unwrap();
        residual = residual.max(fit.lsq_error);
    }
    // zero up to double-precision rounding of the logarithms
    outcome(worst <= 0.01 && residual <= 1e-24, format!("max |α−b| under 0.1% noise {worst:.2e}; exact-law mean sq residual {residual:.1e}"))
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let runs = [
        vec!["ensemble", "--coin", "fourier", "--disorder", "poisson:lambda=1", "--batch", "10", "--max-realizations", "30"],
        vec!["ensemble", "--coin", "grover", "--disorder", "geometric:p=0.5", "--static", "--batch", "5", "--max-realizations", "10"],
        vec!["classical", "--disorder", "binomial:n=5,p=0.2", "--batch", "10", "--max-realizations", "20"],
    ];
    let mut differing = Vec::new();
    for args in &runs {
        let mut snapshots = Vec::new();
        for threads in ["1", "2"] {
            let _ = std::fs::remove_dir_all(&out);
            let status = Command::new(env!("CARGO_BIN_EXE_qwalk"))
                .args(args)
                .args(["--seed", "77", "--threads", threads, "--out", out.to_str().unwrap()])
                .env("SOURCE_DATE_EPOCH", "1700000000")
                .output()
                .unwrap();
            assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
            snapshots.push(read_dir(&out));
        }
        if snapshots[0] != snapshots[1] {
            differing.push(args[..3].join(" "));
        }
    }
    outcome(differing.is_empty(), if differing.is_empty() { "3 configs × 2 runs byte-identical".into() } else { format!("differs: {differing:?}") })
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn main() {
    let mut ens = Ensembles::default();
    let criteria: Vec<(&str, Box<dyn FnOnce(&mut Ensembles) -> Outcome>)> = vec![
        ("unitarity suite", Box::new(|_| unitarity())),
        ("worked-amplitude oracle", Box::new(|_| worked_amplitudes())),
        ("clean scaling", Box::new(|_| clean_scaling())),
        ("poisson exponents by coin", Box::new(poisson_exponents)),
        ("exponents by distribution family", Box::new(distribution_families)),
        ("1D baseline", Box::new(one_dimensional)),
        ("classical oracle", Box::new(classical)),
        ("static disorder", Box::new(static_disorder)),
        ("sampler suite", Box::new(|_| sampler())),
        ("fit recovery", Box::new(|_| fit_recovery())),
        ("reproducibility", Box::new(|_| reproducibility())),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = check(&mut ens);
        println!("[{}] {name}: {}", if result.pass { "PASS" } else { "FAIL" }, result.detail);
        failed += usize::from(!result.pass);
    }
    println!("acceptance: {failed} of 11 criteria failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
