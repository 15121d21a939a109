//! One line per acceptance criterion; exits non-zero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use devoc::config::Config;
use devoc::features::{extract_features, FEATURE_LEN};
use devoc::nn::{load_model, save_model, train_scg, Mlp, Sample, StopReason, TrainConfig};
use devoc::pipeline::prepare;
use devoc::raster::{draw_line, thin_to_convergence, BinaryImage};
use devoc::structural::{
    detect_shirorekha, detect_spines, straightness, trace_from_rightmost, ShirorekhaKind, SpineKind,
    StructuralConfig,
};
use devoc::synth::{builtin_templates, generate_corpus, render, sample_seed, JitterSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Verdict + 'a>;

fn ensure(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn components(img: &BinaryImage) -> usize {
    let w = img.width();
    let mut seen = vec![false; w * img.height()];
    let mut count = 0;
    for (r, c) in img.foreground() {
        if seen[r * w + c] {
            continue;
        }
        count += 1;
        seen[r * w + c] = true;
        let mut stack = vec![(r as isize, c as isize)];
        while let Some((r, c)) = stack.pop() {
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (nr, nc) = (r + dr, c + dc);
                    if img.at(nr, nc) && !seen[nr as usize * w + nc as usize] {
                        seen[nr as usize * w + nc as usize] = true;
                        stack.push((nr, nc));
                    }
                }
            }
        }
    }
    count
}

fn has_2x2_block(img: &BinaryImage) -> bool {
    (1..img.height()).any(|r| {
        (1..img.width()).any(|c| img.get(r, c) && img.get(r - 1, c) && img.get(r, c - 1) && img.get(r - 1, c - 1))
    })
}

fn blob(rng: &mut ChaCha8Rng) -> BinaryImage {
    let mut img = BinaryImage::new(200, 200);
    for _ in 0..rng.gen_range(1..=6) {
        let (cr, cc) = (rng.gen_range(0.0..200.0), rng.gen_range(0.0..200.0));
        let (ar, ac) = (rng.gen_range(3.0..50.0), rng.gen_range(3.0..50.0));
        let hole: f64 = if rng.gen_bool(0.3) { rng.gen_range(0.3..0.7) } else { 0.0 };
        for r in 0..200 {
            for c in 0..200 {
                let d = ((r as f64 - cr) / ar).powi(2) + ((c as f64 - cc) / ac).powi(2);
                if d <= 1.0 && d >= hole * hole {
                    img.set(r, c, true);
                }
            }
        }
    }
    img
}

fn skeleton(rng: &mut ChaCha8Rng) -> BinaryImage {
    let mut img = BinaryImage::new(100, 100);
    for _ in 0..rng.gen_range(1..=5) {
        let mut p = (rng.gen_range(0..100isize), rng.gen_range(0..100isize));
        for _ in 0..rng.gen_range(1..=4) {
            let q = (rng.gen_range(0..100isize), rng.gen_range(0..100isize));
            draw_line(&mut img, p, q);
            p = q;
        }
    }
    thin_to_convergence(&img)
}

fn c1_skeleton_invariants() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut blocks, mut split, mut slowest) = (0, 0, Duration::ZERO);
    for _ in 0..200 {
        let img = blob(&mut rng);
        let start = Instant::now();
        let thin = thin_to_convergence(&img);
        slowest = slowest.max(start.elapsed());
        blocks += has_2x2_block(&thin) as usize;
        split += (components(&thin) != components(&img)) as usize;
    }
    ensure(
        blocks == 0 && split == 0 && slowest < Duration::from_millis(50),
        format!("2x2 blocks in {blocks}, component changes in {split}, slowest {slowest:.1?}"),
    )
}

fn straight_oracle(d: &[usize], step_tol: usize, drift_tol: usize) -> bool {
    let steps_ok = d.windows(2).all(|w| w[0].abs_diff(w[1]) <= step_tol);
    let drift_ok = d.iter().all(|a| d.iter().all(|b| a.abs_diff(*b) <= drift_tol));
    steps_ok && drift_ok
}

fn c2_straightness_oracle() -> Verdict {
    let (mut checked, mut mismatches) = (0u64, 0u64);
    for len in 0..=8u32 {
        for code in 0..5usize.pow(len) {
            let d: Vec<usize> = (0..len).map(|i| code / 5usize.pow(i) % 5).collect();
            for step_tol in 0..=4 {
                for drift_tol in 0..=4 {
                    checked += 1;
                    if straightness(&d, step_tol, drift_tol).is_near_straight != straight_oracle(&d, step_tol, drift_tol) {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    ensure(mismatches == 0, format!("{mismatches} mismatches over {checked} (list, tolerance) cases"))
}

fn c3_trace_monotone() -> Verdict {
    let cfg = Config::default();
    let samples = generate_corpus(&builtin_templates(), 40, 2.0, 3);
    let mut violations = 0;
    for s in samples.iter().take(500) {
        let skel = prepare(&s.image, &cfg).map_err(|e| e.to_string())?.skeleton;
        let a = trace_from_rightmost(&skel, 2).map_err(|e| e.to_string())?;
        let b = trace_from_rightmost(&skel, 2).map_err(|e| e.to_string())?;
        violations += (a != b) as usize;
        violations += a.points.windows(2).filter(|w| w[1].1 > w[0].1).count();
    }
    ensure(violations == 0, format!("{violations} violations over 500 skeletons"))
}

fn c4_spine_rules() -> Verdict {
    let cfg = StructuralConfig::default();
    let spines = |img: &BinaryImage| {
        let shiro = detect_shirorekha(img, &cfg).unwrap();
        (shiro.kind, detect_spines(img, &shiro, &cfg).unwrap())
    };
    let with_headline = |bar_rows: usize| {
        let mut img = BinaryImage::new(100, 100);
        draw_line(&mut img, (0, 0), (0, 99));
        draw_line(&mut img, (0, 90), (bar_rows as isize - 1, 90));
        draw_line(&mut img, (99, 10), (99, 12));
        draw_line(&mut img, (40, 10), (99, 11));
        img
    };
    let mut failed = Vec::new();
    let min = cfg.min_spine_len(100);
    if spines(&with_headline(min)).1.spine_col != Some(90) {
        failed.push("bar of ceil(0.75 h) rows rejected");
    }
    if spines(&with_headline(min - 1)).1.kind != SpineKind::NoSpine {
        failed.push("bar one row short accepted");
    }
    let mut no_head = BinaryImage::new(100, 100);
    draw_line(&mut no_head, (0, 99), (99, 99));
    draw_line(&mut no_head, (0, 60), (99, 60));
    draw_line(&mut no_head, (50, 0), (99, 40));
    let (kind, res) = spines(&no_head);
    if kind != ShirorekhaKind::None || res.kind != SpineKind::NoSpine {
        failed.push("spine reported without a headline");
    }
    let mut two = BinaryImage::new(100, 100);
    draw_line(&mut two, (0, 0), (0, 99));
    draw_line(&mut two, (0, 99), (99, 99));
    draw_line(&mut two, (0, 70), (99, 70));
    draw_line(&mut two, (40, 20), (40, 70));
    let res = spines(&two).1;
    if res.matra_col != Some(99) || res.spine_col != Some(70) {
        failed.push("rightmost of two bars is not the matra");
    }
    ensure(failed.is_empty(), if failed.is_empty() { "4 rule checks".into() } else { failed.join("; ") })
}

fn c5_recovery() -> Verdict {
    let cfg = Config::default();
    let templates = builtin_templates();
    let group = |img: &BinaryImage| prepare(img, &cfg).map(|p| p.group());
    let clean = templates
        .iter()
        .filter(|t| group(&render(t, JitterSpec::NONE)).ok() == Some(t.truth))
        .count();
    let mut misses: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
    for i in 0..500 {
        let t = &templates[i % templates.len()];
        let seed = sample_seed(2024, &t.id, i);
        if group(&render(t, JitterSpec { amplitude: 2.0, seed })).ok() != Some(t.truth) {
            misses.entry(&t.id).or_default().push(seed);
        }
    }
    let wrong: usize = misses.values().map(Vec::len).sum();
    let rate = (500 - wrong) as f64 / 5.0;
    ensure(
        clean == templates.len() && rate >= 98.0,
        format!("zero jitter {clean}/{}, amplitude 2 {rate:.1}% of 500, misses {misses:?}", templates.len()),
    )
}

fn c6_features() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = 0;
    for _ in 0..200 {
        let img = skeleton(&mut rng);
        let v = extract_features(&img).map_err(|e| e.to_string())?;
        let (mut inter, mut ends, mut naive) = (0u32, 0u32, [0u32; 32]);
        for (r, c) in img.foreground() {
            let n = img.neighbor_count(r, c).unwrap();
            let tile = (r / 25) * 4 + c / 25;
            if n == 1 {
                ends += 1;
                naive[2 * tile + 1] += 1;
            } else if n >= 3 {
                inter += 1;
                naive[2 * tile] += 1;
            }
        }
        let sums = (
            v.values().iter().step_by(2).sum::<u32>(),
            v.values().iter().skip(1).step_by(2).sum::<u32>(),
        );
        bad += (v.values().len() != FEATURE_LEN || *v.values() != naive || sums != (inter, ends)) as usize;
    }
    ensure(bad == 0, format!("{bad} of 200 skeletons disagree"))
}

fn c7_gradient() -> Verdict {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let net = Mlp::init(40, 5, seed).map_err(|e| e.to_string())?;
        let batch: Vec<Sample> = (0..8)
            .map(|_| Sample {
                x: (0..32).map(|_| rng.gen_range(0.0..1.0)).collect(),
                label: rng.gen_range(0..5),
            })
            .collect();
        let (_, grad) = net.loss_and_gradient(&batch).map_err(|e| e.to_string())?;
        let base = net.params();
        let mut probe = net.clone();
        let mut loss_at = |p: &[f64]| {
            probe.set_params(p).unwrap();
            probe.loss_and_gradient(&batch).unwrap().0
        };
        for i in 0..base.len() {
            let mut p = base.clone();
            p[i] += h;
            let up = loss_at(&p);
            p[i] = base[i] - h;
            let numeric = (up - loss_at(&p)) / (2.0 * h);
            let denom = grad[i].abs().max(numeric.abs()).max(1e-8);
            worst = worst.max((grad[i] - numeric).abs() / denom);
        }
    }
    ensure(worst < 1e-4, format!("max relative error {worst:.2e} over 10 nets of 32-40-5"))
}

fn c8_trainer() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut increases = 0;
    for seed in 0..5 {
        let data: Vec<Sample> = (0..30)
            .map(|_| Sample {
                x: (0..32).map(|_| rng.gen_range(0.0..1.0)).collect(),
                label: rng.gen_range(0..3),
            })
            .collect();
        let net = Mlp::init(40, 3, seed).map_err(|e| e.to_string())?;
        let (_, rep) = train_scg(&net, &data, &TrainConfig::default()).map_err(|e| e.to_string())?;
        increases += rep.loss_history.windows(2).filter(|w| w[1] > w[0]).count();
    }
    // identical inputs with both labels: the zero net sits at a stationary point
    let flat = Mlp::zeros(32, 4, 2).map_err(|e| e.to_string())?;
    let x = vec![0.5; 32];
    let data = [Sample { x: x.clone(), label: 0 }, Sample { x, label: 1 }];
    let (_, rep) = train_scg(&flat, &data, &TrainConfig::default()).map_err(|e| e.to_string())?;
    let stop_ok = rep.stop_reason == StopReason::MinGradient && rep.final_gradient_norm <= 1e-8;

    let defaults = Config::load(Path::new("/nonexistent/devoc.conf")).map_err(|e| e.to_string())?.train;
    let defaults_ok = defaults.learning_rate == 0.01 && defaults.momentum == 0.95 && defaults.min_gradient == 1e-8;
    ensure(
        increases == 0 && stop_ok && defaults_ok,
        format!(
            "loss increases {increases}, min-gradient stop at |g| {:.1e}, defaults lr {} momentum {} min_gradient {:e}",
            rep.final_gradient_norm, defaults.learning_rate, defaults.momentum, defaults.min_gradient
        ),
    )
}

fn devoc(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_devoc"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("devoc {args:?}: {}", String::from_utf8_lossy(&out.stderr).trim()))
    }
}

/// synth, train and eval into `root`; returns the wall time.
fn full_run(root: &Path) -> Result<Duration, String> {
    let corpus = root.join("corpus");
    let models = root.join("models");
    let s = |p: &PathBuf| p.to_str().unwrap().to_string();
    let start = Instant::now();
    devoc(&["--quiet", "--seed", "42", "synth", "--out", &s(&corpus), "--per-class", "100"])?;
    devoc(&["--quiet", "--seed", "42", "train", &s(&corpus), "--models", &s(&models)])?;
    devoc(&["--quiet", "--seed", "42", "eval", &s(&corpus), "--models", &s(&models)])?;
    Ok(start.elapsed())
}

fn c9_end_to_end(root: &Path) -> Verdict {
    let elapsed = full_run(root)?;
    let csv = fs::read_to_string(root.join("models/report.csv")).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    let mut ok = elapsed < Duration::from_secs(300);
    for line in csv.lines().skip(1).filter(|l| !l.starts_with("overall")) {
        let f: Vec<&str> = line.split(',').collect();
        let test: f64 = f[1].parse().unwrap_or(0.0);
        let train: f64 = f[2].parse().unwrap_or(0.0);
        ok &= test >= 90.0 && train >= 98.0;
        rows.push(format!("{} {test:.2}/{train:.2}", f[0]));
    }
    ok &= rows.len() == 4;
    ensure(ok, format!("{} in {elapsed:.1?} (test/train %)", rows.join(", ")))
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn c10_determinism(first: &Path, second: &Path) -> Verdict {
    full_run(second)?;
    let (a, b) = (tree(&first.join("models")), tree(&second.join("models")));
    let corpus_same = tree(&first.join("corpus")) == tree(&second.join("corpus"));
    let differing: Vec<String> = a
        .keys()
        .chain(b.keys())
        .filter(|k| a.get(*k) != b.get(*k))
        .map(|k| k.display().to_string())
        .collect();
    ensure(
        corpus_same && differing.is_empty() && !a.is_empty(),
        format!("{} model/report files compared, corpus identical {corpus_same}, differing {differing:?}", a.len()),
    )
}

fn c11_round_trip(dir: &Path) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut mismatched = 0;
    for i in 0..20u64 {
        let (hidden, out) = (rng.gen_range(1..64), rng.gen_range(2..10));
        let net = Mlp::init(hidden, out, i).map_err(|e| e.to_string())?;
        let labels: Vec<String> = (0..out).map(|k| format!("class{k}")).collect();
        let path = dir.join(format!("net{i}.mlp"));
        save_model(&path, &net, &labels).map_err(|e| e.to_string())?;
        let (back, back_labels) = load_model(&path).map_err(|e| e.to_string())?;
        let bits = |n: &Mlp| n.params().iter().map(|p| p.to_bits()).collect::<Vec<_>>();
        mismatched += (bits(&back) != bits(&net) || back_labels != labels) as usize;
    }
    ensure(mismatched == 0, format!("{mismatched} of 20 networks differ after save/load"))
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temp dir");
    let (run_a, run_b) = (tmp.path().join("a"), tmp.path().join("b"));
    let criteria: Vec<(&str, Check)> = vec![
        ("skeleton invariants on 200 blobs", Box::new(c1_skeleton_invariants)),
        ("straightness matches brute-force oracle", Box::new(c2_straightness_oracle)),
        ("trace determinism and monotonicity", Box::new(c3_trace_monotone)),
        ("spine rules", Box::new(c4_spine_rules)),
        ("structural ground-truth recovery", Box::new(c5_recovery)),
        ("feature partition and oracle", Box::new(c6_features)),
        ("gradient check", Box::new(c7_gradient)),
        ("trainer contract", Box::new(c8_trainer)),
        ("end-to-end synthetic benchmark", Box::new(|| c9_end_to_end(&run_a))),
        ("end-to-end determinism", Box::new(|| c10_determinism(&run_a, &run_b))),
        ("model round trip", Box::new(|| c11_round_trip(tmp.path()))),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
