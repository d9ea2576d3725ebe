//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::{PI, SQRT_2};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use caccioppoli::functional::{builtin, evaluate_functional, SymmetryCheck, BUILTIN_NAMES};
use caccioppoli::labels::{embed_field, EmbeddedSegment};
use caccioppoli::lifting::{
    fiber_identity_check, polar_identity_check, standard_battery, BatteryFunction, LiftedIntegrand, TestFunction,
};
use caccioppoli::random::{random_partition, RandomSpec};
use caccioppoli::sequences::{gen_remark, remark_limit};
use caccioppoli::{
    run_convergence_experiment, CutoffProfile, FDelta, LabelSet, LiftingMeasure, Partition, QuadratureSpec,
    SequenceFamily,
};
use nalgebra::DMatrix;

// criterion 1
const REMARK_TV_TOL: f64 = 1e-14;
const REMARK_L1_TOL: f64 = 1e-12;
// criteria 2 and 3
const IDENTITY_TOL: f64 = 1e-12;
const SEGMENT_TOL: f64 = 1e-14;
const RANDOM_PARTITIONS: u64 = 200;
// criterion 4
const LIFTING_TOL: f64 = 1e-10;
const LIFTING_PARTITIONS: u64 = 50;
// criterion 5
const DELTAS: [f64; 3] = [0.1, 0.05, 0.025];
const SANDWICH_PARTITIONS: usize = 20;
const ROUND_OFF: f64 = 1e-12;
const HALVING_RATIO: (f64, f64) = (0.4, 0.6);
// criterion 6
const FUNCTIONAL_REL: f64 = 5e-3;
const PROXY_REL: f64 = 4e-5;
// criterion 7
const REMARK_GAP_TOL: f64 = 1e-12;
const SAWTOOTH_GAP_TOL: f64 = 1e-10;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_2d(seed: u64) -> (LabelSet, Partition) {
    random_partition(seed, &RandomSpec { dim: 2, max_cells: 20, max_labels: 5, ..RandomSpec::default() })
}

fn remark_reproduction() -> Outcome {
    let z = LabelSet::scalar(&[0.0, 1.0, 2.0]).map_err(|e| e.to_string())?;
    let limit: Partition = remark_limit().into();
    let lim_per = limit.perimeter().map_err(|e| e.to_string())?;
    let lim_tv = limit.total_variation(&z).map_err(|e| e.to_string())?;
    ensure(lim_per == 1.0, || format!("H0(S_u) = {lim_per}"))?;
    ensure((lim_tv - 2.0).abs() <= REMARK_TV_TOL, || format!("|Du| = {lim_tv}"))?;
    for n in 3..=64 {
        let u: Partition = gen_remark(n).map_err(|e| e.to_string())?.into();
        let per = u.perimeter().map_err(|e| e.to_string())?;
        let tv = u.total_variation(&z).map_err(|e| e.to_string())?;
        let l1 = u.l1_distance(&limit, &z).map_err(|e| e.to_string())?;
        ensure(per == 2.0, || format!("n = {n}: H0(S_un) = {per}"))?;
        ensure((tv - 2.0).abs() <= REMARK_TV_TOL, || format!("n = {n}: |Du_n| = {tv}"))?;
        ensure((l1 - 3.0 / n as f64).abs() <= REMARK_L1_TOL, || format!("n = {n}: L1 gap {l1}"))?;
    }
    Ok("n = 3..64: H0 = 2 vs 1, |Du| = 2, L1 gap = 3/n".into())
}

fn decomposition_identities() -> Outcome {
    let mut worst = (0.0f64, 0.0f64);
    for seed in 0..RANDOM_PARTITIONS {
        let (z, u) = random_2d(seed);
        let per = u.perimeter().map_err(|e| e.to_string())?;
        let half = u.perimeter_half_sum(&z).map_err(|e| e.to_string())?;
        let tv = u.total_variation(&z).map_err(|e| e.to_string())?;
        let pair = u.total_variation_pairwise(&z).map_err(|e| e.to_string())?;
        worst.0 = worst.0.max((per - half).abs());
        worst.1 = worst.1.max((tv - pair).abs());
    }
    ensure(worst.0 <= IDENTITY_TOL && worst.1 <= IDENTITY_TOL, || {
        format!("max deviations {:e}, {:e}", worst.0, worst.1)
    })?;
    Ok(format!("{RANDOM_PARTITIONS} partitions, max deviations {:.1e} (perimeter), {:.1e} (|Du|)", worst.0, worst.1))
}

fn embedding_mass() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..RANDOM_PARTITIONS {
        let (z, u) = random_2d(seed);
        let (tz, tu) = embed_field(&z, &u).map_err(|e| e.to_string())?;
        let mass = tu.total_variation(&tz).map_err(|e| e.to_string())?;
        let per = u.perimeter().map_err(|e| e.to_string())?;
        worst = worst.max((mass - SQRT_2 * per).abs());
    }
    ensure(worst <= IDENTITY_TOL, || format!("max | |DT(u)| - √2·H1 | = {worst:e}"))?;
    let mut seg_worst = 0.0f64;
    for q in 2..=8 {
        for i in 0..q {
            for j in (i + 1)..q {
                let s = EmbeddedSegment::new(i, j, q).map_err(|e| e.to_string())?;
                seg_worst = seg_worst.max((SQRT_2 * s.core_length() - 1.0).abs());
            }
        }
    }
    ensure(seg_worst <= SEGMENT_TOL, || format!("max |√2·H1(L_ij) - 1| = {seg_worst:e}"))?;
    Ok(format!("max deviation {worst:.1e}; √2·H1(L_ij) within {seg_worst:.1e} for q ≤ 8"))
}

/// A lifted integrand built from a battery entry, depending on the direction too.
struct Weighted<'a>(&'a BatteryFunction);

impl LiftedIntegrand for Weighted<'_> {
    fn value(&self, x: &[f64], y: &[f64], xi: &DMatrix<f64>) -> caccioppoli::Result<f64> {
        Ok(self.0.eval(x, y) * (1.0 + xi[(0, 0)] * xi[(0, 0)] + xi[(xi.nrows() - 1, xi.ncols() - 1)]))
    }
}

fn lifting_identities() -> Outcome {
    let quad = QuadratureSpec::default();
    let (mut polar_worst, mut fiber_worst) = (0.0f64, 0.0f64);
    for seed in 0..LIFTING_PARTITIONS {
        let (z, u) = random_2d(1000 + seed);
        let lift = LiftingMeasure::of_embedded(&u, &z).map_err(|e| e.to_string())?;
        let battery = standard_battery(&u.bounding_box(), z.len(), seed);
        polar_worst = polar_worst.max(polar_identity_check(&lift, &battery, &quad).map_err(|e| e.to_string())?);
        for phi in &battery {
            let (lhs, rhs) = fiber_identity_check(&lift, &Weighted(phi), &quad).map_err(|e| e.to_string())?;
            fiber_worst = fiber_worst.max((lhs - rhs).abs());
        }
    }
    ensure(polar_worst <= LIFTING_TOL && fiber_worst <= LIFTING_TOL, || {
        format!("polar residual {polar_worst:e}, fiber gap {fiber_worst:e}")
    })?;
    Ok(format!("{LIFTING_PARTITIONS} partitions: polar residual {polar_worst:.1e}, fiber gap {fiber_worst:.1e}"))
}

fn fdelta_sandwich() -> Outcome {
    let quad = QuadratureSpec::default();
    let (mut checked, mut ratio_lo, mut ratio_hi, mut skipped) = (0usize, f64::INFINITY, 0.0f64, 0usize);
    let mut seed = 2000u64;
    let mut used = 0;
    while used < SANDWICH_PARTITIONS {
        let (z, u) = random_2d(seed);
        seed += 1;
        let per = u.perimeter().map_err(|e| e.to_string())?;
        if per == 0.0 {
            continue;
        }
        used += 1;
        let lift = LiftingMeasure::of_embedded(&u, &z).map_err(|e| e.to_string())?;
        for name in BUILTIN_NAMES {
            let g = builtin(name, &z, &u.bounding_box()).map_err(|e| e.to_string())?;
            let energy = evaluate_functional(&u, &z, &g, &quad).map_err(|e| e.to_string())?;
            let gaps = DELTAS
                .iter()
                .map(|&d| {
                    let f = FDelta::new(CutoffProfile::new(d)?, g.clone(), z.clone());
                    Ok(fiber_identity_check(&lift, &f, &quad)?.0 - energy)
                })
                .collect::<caccioppoli::Result<Vec<f64>>>()
                .map_err(|e| e.to_string())?;
            let c = gaps[0] / (DELTAS[0] * per);
            for (gap, d) in gaps.iter().zip(DELTAS) {
                ensure(*gap >= -ROUND_OFF && *gap <= c * d * per + ROUND_OFF, || {
                    format!("seed {}, {name}, δ = {d}: gap {gap:e} outside [0, {:e}]", seed - 1, c * d * per)
                })?;
            }
            if gaps[0] <= ROUND_OFF {
                // g vanishes on every facet: nothing to compare
                skipped += 1;
                continue;
            }
            for w in gaps.windows(2) {
                let r = w[1] / w[0];
                ratio_lo = ratio_lo.min(r);
                ratio_hi = ratio_hi.max(r);
            }
            checked += 1;
        }
    }
    ensure(ratio_lo >= HALVING_RATIO.0 && ratio_hi <= HALVING_RATIO.1, || {
        format!("halving ratios in [{ratio_lo}, {ratio_hi}]")
    })?;
    Ok(format!(
        "{checked} (partition, integrand) pairs, halving ratios in [{ratio_lo:.12}, {ratio_hi:.12}], {skipped} with F = 0"
    ))
}

fn theorem_sweep() -> Outcome {
    let quad = QuadratureSpec::default();
    let symmetry = SymmetryCheck::default();
    let mut notes = Vec::new();

    // remark with g = |a − b|: the energy is |Du| and converges
    let remark = SequenceFamily::remark();
    let jump =
        builtin("jump", remark.labels(), &remark.region().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let rep = run_convergence_experiment(
        &remark,
        std::slice::from_ref(&jump),
        &remark.default_n_values(),
        &quad,
        &remark.default_tolerances(),
        &symmetry,
    )
    .map_err(|e| e.to_string())?;
    let gap = rep.final_gap("jump").unwrap();
    ensure(rep.verdict.strict && gap < FUNCTIONAL_REL * jump.declared_bound() * rep.limit_perimeter, || {
        format!("remark/jump: strict {} gap {gap:e}", rep.verdict.strict)
    })?;

    let r = 0.5;
    let proxy_gap = 2.0 * PI * r - 2.0 * 1024.0 * r * (PI / 1024.0).sin();
    ensure(proxy_gap < PROXY_REL * r, || format!("proxy perimeter gap {proxy_gap:e}"))?;

    let families = [
        (SequenceFamily::ngon(r, 1024).map_err(|e| e.to_string())?, vec![8, 16, 32, 64, 128, 256]),
        (SequenceFamily::by_name("sawtooth-shrink", None, None).map_err(|e| e.to_string())?, vec![4, 8, 16, 32, 64]),
    ];
    for (family, ns) in &families {
        let region = family.region().map_err(|e| e.to_string())?;
        let gs = BUILTIN_NAMES
            .iter()
            .map(|g| builtin(g, family.labels(), &region))
            .collect::<caccioppoli::Result<Vec<_>>>()
            .map_err(|e| e.to_string())?;
        let rep = run_convergence_experiment(family, &gs, ns, &quad, &family.default_tolerances(), &symmetry)
            .map_err(|e| e.to_string())?;
        ensure(rep.verdict.jump_strict, || format!("{}: jump-strict flag not set", family.name()))?;
        let mut worst = 0.0f64;
        for g in &gs {
            let gap = rep.final_gap(g.name()).unwrap();
            let tol = FUNCTIONAL_REL * g.declared_bound() * rep.limit_perimeter;
            ensure(gap < tol, || format!("{}: {} gap {gap:e} ≥ {tol:e}", family.name(), g.name()))?;
            worst = worst.max(gap / tol);
        }
        notes.push(format!("{} worst gap/tol {worst:.2e}", family.name()));
    }
    Ok(format!("remark/jump gap {gap:.1e}; {}; proxy gap {proxy_gap:.1e}", notes.join("; ")))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run_cli(args: &[&str]) -> Result<(i32, serde_json::Value), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("report.json");
    let o = Command::new(env!("CARGO_BIN_EXE_caccioppoli"))
        .args(args)
        .args(["--format", "json", "--out", out.to_str().unwrap()])
        .output()
        .map_err(|e| e.to_string())?;
    let code = o.status.code().ok_or("killed")?;
    let text = std::fs::read_to_string(&out)
        .map_err(|e| format!("no report ({e}); stderr: {}", String::from_utf8_lossy(&o.stderr)))?;
    Ok((code, serde_json::from_str(&text).map_err(|e| e.to_string())?))
}

fn expected_non_convergence(report: &serde_json::Value, integrand: &str) -> bool {
    report["findings"]
        .as_array()
        .is_some_and(|f| f.iter().any(|f| f["kind"] == "expected-non-convergence" && f["integrand"] == integrand))
}

fn necessity_exhibits() -> Outcome {
    let (code, v) = run_cli(&["run", scenario("remark.json").to_str().unwrap()])?;
    let rep = &v["report"];
    let gap =
        rep["rows"].as_array().and_then(|r| r.last()).map(|r| r["f_gaps"][0].as_f64().unwrap()).ok_or("no rows")?;
    ensure(code == 0, || format!("remark exit {code}"))?;
    ensure(rep["verdict"]["strict"] == true, || "remark: strict flag not set".into())?;
    ensure((gap - 1.0).abs() <= REMARK_GAP_TOL, || format!("remark F-gap {gap}"))?;
    ensure(expected_non_convergence(rep, "one"), || "remark: no expected-non-convergence finding".into())?;

    let (code, v) = run_cli(&["run", scenario("sawtooth-const.json").to_str().unwrap()])?;
    let rep = &v["report"];
    let k = rep["integrands"].as_array().and_then(|a| a.iter().position(|g| g == "one")).ok_or("no 'one' column")?;
    let saw =
        rep["rows"].as_array().and_then(|r| r.last()).map(|r| r["f_gaps"][k].as_f64().unwrap()).ok_or("no rows")?;
    ensure(code == 0, || format!("sawtooth-const exit {code}"))?;
    ensure(rep["verdict"]["l1"] == true, || "sawtooth-const: L1 flag not set".into())?;
    ensure((saw - (SQRT_2 - 1.0)).abs() <= SAWTOOTH_GAP_TOL, || format!("sawtooth-const F-gap {saw}"))?;
    ensure(expected_non_convergence(rep, "one"), || "sawtooth-const: no expected-non-convergence finding".into())?;
    Ok(format!("remark F-gap {gap}, sawtooth-const F-gap √2−1 {:+.1e}, both exit 0", saw - (SQRT_2 - 1.0)))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs: Vec<Vec<Vec<u8>>> = Vec::new();
    let runs = [("1", 0), ("1", 1), ("1", 2), ("4", 0), ("4", 1)];
    for (k, (jobs, _)) in runs.iter().enumerate() {
        let mut files = Vec::new();
        for (fmt, name) in [("csv", "ss.csv"), ("json", "ss.json")] {
            let out = dir.path().join(format!("{k}-{name}"));
            let st = Command::new(env!("CARGO_BIN_EXE_caccioppoli"))
                .args([
                    "--jobs",
                    jobs,
                    "run",
                    scenario("sawtooth-shrink.json").to_str().unwrap(),
                    "--format",
                    fmt,
                    "--out",
                ])
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?;
            ensure(st.status.success(), || format!("run failed: {}", String::from_utf8_lossy(&st.stderr)))?;
            files.push(std::fs::read(&out).map_err(|e| e.to_string())?);
            if fmt == "csv" {
                let mut side = out.into_os_string();
                side.push(".lifting.csv");
                files.push(std::fs::read(side).map_err(|e| e.to_string())?);
            }
        }
        outputs.push(files);
    }
    ensure(outputs.windows(2).all(|w| w[0] == w[1]), || "outputs differ between runs".into())?;
    Ok(format!("{} runs (--jobs 1 ×3, --jobs 4 ×2), CSV, lifting CSV and JSON byte-identical", runs.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 remark reproduction", Duration::from_secs(1), remark_reproduction),
        ("2 decomposition identities", Duration::from_secs(10), decomposition_identities),
        ("3 embedding mass", Duration::from_secs(10), embedding_mass),
        ("4 lifting identities", Duration::from_secs(30), lifting_identities),
        ("5 f_delta sandwich", Duration::from_secs(120), fdelta_sandwich),
        ("6 theorem-consistency sweep", Duration::from_secs(120), theorem_sweep),
        ("7 necessity exhibits", Duration::from_secs(120), necessity_exhibits),
        ("8 determinism", Duration::from_secs(120), determinism),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > limit => Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{elapsed:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why} [{elapsed:.2?}]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 8 acceptance criteria passed");
}
