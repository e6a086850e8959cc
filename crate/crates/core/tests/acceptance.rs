//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::path::PathBuf;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tensoralt::alternative::{matrix_alternative, matrix_to_tensor, AltOutcome, AltSettings};
use tensoralt::cli::{self, Options};
use tensoralt::popt::{solve_exact_sos, PopInstance, PopSettings};
use tensoralt::sdp::{kkt_residual, random_instance_with_optimum, solve, SdpSettings, SdpStatus};
use tensoralt::sos::{sos_check, SosSettings, SosVerdict};
use tensoralt::{enumerate_monomials, Exponent, MonomialMode, Polynomial, SymmetricTensor};

type Outcome = Result<String, String>;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run_json(command: &str, file: &str) -> Result<Value, String> {
    let out = cli::run(command, &data(file), &Options::default());
    if out.exit_code != 0 {
        return Err(format!("exit code {}: {}", out.exit_code, out.text.trim()));
    }
    Ok(out.json)
}

fn num(v: &Value, key: &str) -> Result<f64, String> {
    v[key].as_f64().ok_or_else(|| format!("missing numeric field '{key}'"))
}

fn vector(v: &Value, key: &str) -> Result<Vec<f64>, String> {
    v[key]
        .as_array()
        .and_then(|a| a.iter().map(Value::as_f64).collect())
        .ok_or_else(|| format!("missing vector field '{key}'"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ep3() -> Outcome {
    let start = Instant::now();
    let j = run_json("solve", "ep3.txt")?;
    let secs = start.elapsed().as_secs_f64();
    let bound = num(&j, "bound")?;
    let fx = num(&j, "objective_at_recovered")?;
    let x = vector(&j, "recovered")?;
    ensure((bound + 1.0).abs() <= 1e-4, || format!("bound {bound}"))?;
    ensure(j["validation"] == "EXACT", || format!("validation {}", j["validation"]))?;
    ensure((fx + 1.0).abs() <= 1e-4, || format!("f0(x) = {fx}"))?;
    ensure(x.iter().map(|v| v.powi(6)).sum::<f64>() <= 1.0 + 1e-6, || format!("x = {x:?} infeasible"))?;
    ensure(secs < 30.0, || format!("took {secs:.1}s"))?;
    Ok(format!("bound {bound:.9}, f0(x) {fx:.9}, {secs:.2}s"))
}

fn ep2() -> Outcome {
    let j = run_json("solve", "ep2.txt")?;
    let bound = num(&j, "bound")?;
    let expect = 1.0 - 27f64.powf(0.25);
    let x = vector(&j, "recovered")?;
    ensure((bound - expect).abs() <= 1e-3, || format!("bound {bound} vs {expect}"))?;
    ensure(j["validation"] == "EXACT", || format!("validation {}", j["validation"]))?;
    let kkt = x[1].abs().max((x[2] - 3f64.powf(0.25) * x[0]).abs());
    ensure(kkt <= 1e-2, || format!("x = {x:?} off the KKT family by {kkt}"))?;
    Ok(format!("bound {bound:.6} (expected {expect:.6}), KKT deviation {kkt:.1e}"))
}

fn ep1() -> Outcome {
    let j = run_json("solve", "ep1.txt")?;
    let bound = num(&j, "bound")?;
    let oracle = num(&j, "oracle_value")?;
    ensure(bound < -1e-3, || format!("bound {bound}"))?;
    ensure(oracle >= -1e-6, || format!("oracle {oracle}"))?;
    ensure(j["gap"] == true, || "GAP not flagged".into())?;
    Ok(format!("bound {bound:.6}, oracle {oracle:.2e}, GAP"))
}

fn motzkin() -> Outcome {
    let j = run_json("sos", "motzkin.txt")?;
    ensure(j["verdict"] == "NOT_SOS", || format!("verdict {}", j["verdict"]))?;
    let f = Polynomial::from_terms(
        3,
        [(vec![0, 0, 6], 1.0), (vec![4, 2, 0], 1.0), (vec![2, 4, 0], 1.0), (vec![2, 2, 2], -3.0)],
    )
    .map_err(|e| e.to_string())?;
    let mut y = std::collections::BTreeMap::new();
    for entry in j["moments"].as_array().ok_or("no moments")? {
        let exps: Vec<u32> = entry["exps"]
            .as_array()
            .ok_or("bad exps")?
            .iter()
            .map(|v| v.as_u64().map(|u| u as u32))
            .collect::<Option<_>>()
            .ok_or("bad exps")?;
        y.insert(Exponent::new(exps), entry["value"].as_f64().ok_or("bad value")?);
    }
    let get = |a: &Exponent| y.get(a).copied().unwrap_or(0.0);
    // independent recomputation of <y, f> and M(y) from the printed moments
    let pairing: f64 = f.terms().map(|(a, c)| c * get(a)).sum();
    let basis = enumerate_monomials(3, 3, MonomialMode::Exact);
    let mm = DMatrix::from_fn(basis.len(), basis.len(), |i, k| get(&basis[i].add(&basis[k])));
    let lmin = mm.symmetric_eigenvalues().min();
    ensure(pairing < -1e-9, || format!("<y,f> = {pairing}"))?;
    ensure(lmin >= -1e-7, || format!("min eig M(y) = {lmin}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut lowest = f64::INFINITY;
    for _ in 0..10_000 {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        lowest = lowest.min(f.evaluate(&x).map_err(|e| e.to_string())?);
    }
    ensure(lowest >= -1e-9, || format!("sampled value {lowest}"))?;
    Ok(format!("<y,f> {pairing:.3e}, min eig M(y) {lmin:.1e}, sampled min {lowest:.1e}"))
}

fn random_tensor(rng: &mut ChaCha8Rng, n: usize, m: usize, enp: bool) -> SymmetricTensor {
    let entries: Vec<(Exponent, f64)> = enumerate_monomials(n, m as u32, MonomialMode::Exact)
        .into_iter()
        .map(|a| {
            let v = if enp && a.pure_power_index(m as u32).is_none() {
                -rng.random_range(0.0..1.0)
            } else {
                rng.random_range(-1.0..1.0)
            };
            (a, v)
        })
        .collect();
    SymmetricTensor::from_entries(m, n, entries).expect("valid entries")
}

fn transform_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(1..=3);
        let m = 2 * rng.random_range(1..=3);
        let a = random_tensor(&mut rng, n, m, false);
        let p = DMatrix::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ptx: Vec<f64> = (p.transpose() * DVector::from_column_slice(&x)).iter().copied().collect();
        let lhs = a.evaluate(&ptx).map_err(|e| e.to_string())?;
        let rhs = a.transform(&p).and_then(|b| b.evaluate(&x)).map_err(|e| e.to_string())?;
        // |<A, z^m>| ≤ max|A| (Σ|z_i|)^m bounds the magnitudes involved
        let z1: f64 = ptx.iter().map(|v| v.abs()).sum();
        let scale = 1.0 + a.max_abs_entry() * z1.powi(m as i32) * (n as f64).powi(m as i32);
        let rel = (lhs - rhs).abs() / scale;
        ensure(rel <= 1e-10, || format!("n={n} m={m}: |{lhs} - {rhs}| / {scale}"))?;
        worst = worst.max(rel);
    }
    Ok(format!("200 cases, worst scaled error {worst:.1e}"))
}

fn holder_inequality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let n = rng.random_range(1..=3);
        let m = 2 * rng.random_range(1..=3);
        let f = random_tensor(&mut rng, n, m, true);
        let terms = enumerate_monomials(n, m as u32, MonomialMode::Exact).len();
        let k = rng.random_range(1..=terms);
        let mut x = SymmetricTensor::zeros(m, n).map_err(|e| e.to_string())?;
        for _ in 0..k {
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
            let w = rng.random_range(0.0..1.0);
            x = x
                .add(&SymmetricTensor::rank_one(&v, m).map_err(|e| e.to_string())?.scale(w))
                .map_err(|e| e.to_string())?;
        }
        let root = x.diagonal_root_vector().map_err(|e| e.to_string())?;
        let lhs = f.evaluate(&root).map_err(|e| e.to_string())?;
        let rhs = f.inner(&x).map_err(|e| e.to_string())?;
        ensure(lhs <= rhs + 1e-9, || format!("n={n} m={m}: {lhs} > {rhs}"))?;
        worst = worst.max(lhs - rhs);
    }
    Ok(format!("200 cases, max F(xbar) - <F,X> = {worst:.2e}"))
}

/// ENP polynomial of degree ≤ m with positive pure powers `lo..hi`.
fn random_enp_poly(rng: &mut ChaCha8Rng, n: usize, m: usize, lo: f64, hi: f64, mixed: f64) -> Polynomial {
    let mut p = Polynomial::zero(n);
    for i in 0..n {
        p.add_term(Exponent::pure_power(n, i, m as u32), rng.random_range(lo..hi));
    }
    let all = enumerate_monomials(n, m as u32, MonomialMode::UpTo);
    let count = rng.random_range(1..=4);
    for _ in 0..count {
        let a = all[rng.random_range(0..all.len())].clone();
        if a.is_zero() || a.pure_power_index(m as u32).is_some() {
            continue;
        }
        p.add_term(a, -rng.random_range(0.0..mixed));
    }
    p
}

fn enp_sweep() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut close = 0;
    let mut worst_gap: f64 = 0.0;
    for case in 0..50 {
        let n = rng.random_range(1..=3);
        let m = if rng.random_bool(0.5) { 4 } else { 6 };
        let p = rng.random_range(1..=2);
        let f0 = random_enp_poly(&mut rng, n, m, 0.2, 2.0, 1.5);
        let mut cons = Vec::new();
        for l in 0..p {
            // mixed terms below the smallest pure power keep the set bounded
            let (lo, mixed) = if l == 0 { (1.0, 0.9 / 4.0) } else { (-0.5, 0.5) };
            let mut g = random_enp_poly(&mut rng, n, m, lo, 2.0, mixed);
            g.add_term(Exponent::zero(n), -rng.random_range(0.5..2.0));
            cons.push(g);
        }
        let inst = PopInstance::new(f0.clone(), cons, m)
            .and_then(|i| i.with_slater_point(vec![0.0; n]))
            .map_err(|e| format!("case {case}: {e}"))?;
        let report = solve_exact_sos(&inst, &PopSettings::default()).map_err(|e| format!("case {case}: {e}"))?;
        let oracle = report.oracle_value().ok_or_else(|| format!("case {case}: oracle found nothing"))?;
        let scale = 1.0 + f0.max_abs_coeff();
        ensure(report.bound <= oracle + 1e-6 * scale, || {
            format!("case {case}: bound {} above oracle {oracle}", report.bound)
        })?;
        let gap = oracle - report.bound;
        worst_gap = worst_gap.max(gap);
        if gap <= 1e-2 {
            close += 1;
        }
    }
    ensure(close >= 45, || format!("only {close}/50 within 1e-2"))?;
    Ok(format!("{close}/50 within 1e-2 of the oracle, largest gap {worst_gap:.1e}"))
}

fn random_z_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = rng.random_range(-1.0..2.0);
        for j in i + 1..n {
            let v = if rng.random_bool(0.3) { 0.0 } else { -rng.random_range(0.0..1.0) };
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

/// `max_{t ∈ [0,1]} λ_min(t A_1 + (1−t) A_2)` by a grid refined with
/// golden-section search (the function is concave in `t`).
fn best_combination(mats: &[DMatrix<f64>]) -> f64 {
    let g = |t: f64| -> f64 {
        let m = if mats.len() == 1 { mats[0].clone() } else { &mats[0] * t + &mats[1] * (1.0 - t) };
        m.symmetric_eigenvalues().min()
    };
    if mats.len() == 1 {
        return g(1.0);
    }
    let grid = 400;
    let mut best = (0.0, g(0.0));
    for k in 1..=grid {
        let t = k as f64 / grid as f64;
        let v = g(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    let (mut lo, mut hi) = ((best.0 - 1.0 / grid as f64).max(0.0), (best.0 + 1.0 / grid as f64).min(1.0));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if g(a) < g(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    best.1.max(g(0.5 * (lo + hi)))
}

fn matrix_corollary() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut agreed = 0;
    let mut resampled = 0;
    let mut counts = [0usize; 2];
    while agreed < 100 {
        let n = rng.random_range(1..=4);
        let p = rng.random_range(1..=2);
        let mats: Vec<DMatrix<f64>> = (0..p).map(|_| random_z_matrix(&mut rng, n)).collect();
        let margin = best_combination(&mats);
        // numerically undecidable: the decision tolerance of the SOS step is 1e-6
        if margin.abs() < 1e-5 {
            resampled += 1;
            continue;
        }
        let expect = if margin >= 0.0 { AltOutcome::StatementII } else { AltOutcome::StatementI };
        let cert = matrix_alternative(&mats, None, &AltSettings::default()).map_err(|e| e.to_string())?;
        ensure(cert.outcome == expect, || {
            format!("n={n} p={p}: got {}, oracle margin {margin}", cert.outcome.label())
        })?;
        let tensors: Vec<SymmetricTensor> = mats.iter().map(|a| matrix_to_tensor(a).unwrap()).collect();
        ensure(cert.validate(&tensors), || format!("n={n} p={p}: certificate did not validate"))?;
        counts[usize::from(expect == AltOutcome::StatementII)] += 1;
        agreed += 1;
    }
    Ok(format!(
        "100 agree ({} statement I, {} statement II), {resampled} near-degenerate draws resampled",
        counts[0], counts[1]
    ))
}

fn dominant_enp_sos() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut boundary = 0;
    for case in 0..50 {
        let n = rng.random_range(2..=3);
        let m = if rng.random_bool(0.5) { 4 } else { 6 };
        let forms = enumerate_monomials(n, m as u32, MonomialMode::Exact);
        let mut f = Polynomial::zero(n);
        let mut need = vec![0.0; n];
        for _ in 0..rng.random_range(1..=4) {
            let a = forms[rng.random_range(0..forms.len())].clone();
            if a.pure_power_index(m as u32).is_some() {
                continue;
            }
            let c = rng.random_range(0.1..1.0);
            for (i, need_i) in need.iter_mut().enumerate() {
                *need_i += c * a.get(i) as f64 / m as f64;
            }
            f.add_term(a, -c);
        }
        // AM-GM: |x^a| ≤ Σ (a_i/m) x_i^m, so these pure powers dominate
        let tight = rng.random_bool(0.2);
        if tight {
            boundary += 1;
        }
        for (i, need_i) in need.iter().enumerate() {
            let slack = if tight { 0.0 } else { rng.random_range(0.0..0.5) };
            f.add_term(Exponent::pure_power(n, i, m as u32), need_i + slack);
        }
        ensure(f.enp_violations(m as u32).is_empty() && f.hat(m as u32).max_coeff_diff(&f) == 0.0, || {
            format!("case {case}: construction is not ENP")
        })?;
        match sos_check(&f, m, &SosSettings::default()).map_err(|e| e.to_string())? {
            SosVerdict::Sos(cert) => ensure(cert.is_valid_for(&f), || format!("case {case}: invalid certificate"))?,
            other => return Err(format!("case {case}: {f} gave {other:?}")),
        }
    }
    Ok(format!("50/50 certified SOS ({boundary} with zero slack)"))
}

fn sdp_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let settings = SdpSettings::default();
    let mut worst_err: f64 = 0.0;
    let mut worst_kkt: f64 = 0.0;
    for case in 0..100 {
        let blocks = rng.random_range(1..=3);
        let sizes: Vec<usize> = (0..blocks).map(|_| rng.random_range(1..=6)).collect();
        let k = rng.random_range(1..=10);
        let (problem, optimum) = random_instance_with_optimum(&mut rng, &sizes, k);
        let a = solve(&problem, &settings).map_err(|e| e.to_string())?;
        let b = solve(&problem, &settings).map_err(|e| e.to_string())?;
        ensure(a.status == SdpStatus::Optimal, || format!("case {case} {sizes:?}: {:?}", a.status))?;
        let err = (a.primal_objective - optimum).abs();
        let kkt = kkt_residual(&problem, &a);
        ensure(err <= 1e-6, || format!("case {case}: objective error {err}"))?;
        ensure(kkt <= 1e-7, || format!("case {case}: KKT residual {kkt}"))?;
        ensure(a.x == b.x && a.y == b.y && a.iterations == b.iterations, || {
            format!("case {case}: repeated solves differ")
        })?;
        worst_err = worst_err.max(err);
        worst_kkt = worst_kkt.max(kkt);
    }
    Ok(format!("100 Optimal, max objective error {worst_err:.1e}, max KKT {worst_kkt:.1e}, deterministic"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("EP3 reproduction", ep3),
        ("EP2 reproduction", ep2),
        ("EP1 exactness gap", ep1),
        ("Motzkin is not SOS", motzkin),
        ("transform identity", transform_identity),
        ("diagonal-root inequality", holder_inequality),
        ("ENP exactness sweep", enp_sweep),
        ("matrix alternative vs eigenvalue oracle", matrix_corollary),
        ("dominant ENP forms are SOS", dominant_enp_sos),
        ("SDP solver suite", sdp_suite),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2}s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.2}s]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
