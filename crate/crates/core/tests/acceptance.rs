//! Acceptance gate. Prints one PASS/FAIL line per criterion and fails if any
//! criterion fails. Reference values come from oracles written here, not
//! from the library.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use cayley_potts::model::{check_consistency, propagate_fields, random_fields, FieldVector, ModelParams};
use cayley_potts::period2::{
    descartes_positive_root_bound, f_scalar, p_coefficients, proposition_sign_check, system6_map, theta_cr, ScalarMap,
    ZVector,
};
use cayley_potts::solver::{find_h_roots, DEFAULT_GRID};
use cayley_potts::tree::build_tree;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

/// `f(x) = (((θ+1)x + 1) / (2x + θ))^k`, straight from the definition.
fn f_oracle(x: f64, theta: f64, k: u32) -> f64 {
    (((theta + 1.0) * x + 1.0) / (2.0 * x + theta)).powi(k as i32)
}

/// One step of the four-component system, straight from the definition.
fn system_oracle(z: [f64; 4], theta: f64, k: u32) -> [f64; 4] {
    let r = |a: f64, b: f64| ((theta * a + b + 1.0) / (a + b + theta)).powi(k as i32);
    [r(z[2], z[3]), r(z[3], z[2]), r(z[0], z[1]), r(z[1], z[0])]
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// `n` points evenly spaced over `[lo, hi]`, endpoints included.
fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Fourth-order central difference.
fn derivative(f: impl Fn(f64) -> f64, x: f64, step: f64) -> f64 {
    (f(x - 2.0 * step) - 8.0 * f(x - step) + 8.0 * f(x + step) - f(x + 2.0 * step)) / (12.0 * step)
}

fn root_counts_below_threshold() -> Outcome {
    let mut worst_residual: f64 = 0.0;
    let mut worst_closure: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for k in 3..=5u32 {
        let crit = (k as f64 - 2.0) / (k as f64 + 1.0);
        for theta in linspace(0.02, 0.98 * crit, 10) {
            let rep = match find_h_roots(theta, k, DEFAULT_GRID) {
                Ok(r) => r,
                Err(e) => return outcome(false, format!("k={k} theta={theta}: {e}")),
            };
            let xs = rep.xs();
            if xs.len() != 3 || !(xs[0] < 1.0 && xs[1] == 1.0 && 1.0 < xs[2]) {
                return outcome(false, format!("k={k} theta={theta}: roots {xs:?}"));
            }
            // x0 and x2 must swap under f
            let image = f_oracle(xs[0], theta, k);
            worst_oracle = worst_oracle.max(rel(image, xs[2]));
            worst_closure = worst_closure.max((f_oracle(image, theta, k) - xs[0]).abs());
            for r in &rep.roots {
                worst_residual = worst_residual.max(r.residual);
            }
        }
    }
    outcome(
        worst_residual <= 1e-10 && worst_closure <= 1e-8 && worst_oracle <= 1e-8,
        format!(
            "30 cases, max residual {worst_residual:.2e}, max closure {worst_closure:.2e}, f(x0) vs x2 {worst_oracle:.2e}"
        ),
    )
}

fn critical_parameter() -> Outcome {
    let got = [theta_cr(3), theta_cr(4), theta_cr(10)];
    let want = [0.25, 0.4, 8.0 / 11.0];
    let ok = got.iter().zip(want).all(|(g, w)| g.as_ref().ok() == Some(&w));
    outcome(ok, format!("{got:?}"))
}

fn consistency_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    // The violation is an absolute difference of single-configuration
    // probabilities, so its size under a fixed perturbation shrinks with the
    // number of configurations. The 1e-3 threshold applies to the q = 3,
    // n = 2 ball; on the 2^10-configuration ball the control only has to
    // stand far above the clean violations.
    let mut control = [f64::INFINITY; 2];
    for (setting, (k, q, n)) in [(2usize, 3usize, 2usize), (2, 2, 3)].into_iter().enumerate() {
        let tree = build_tree(k, n).unwrap();
        let target = tree.level_range(n - 1).unwrap().start;
        for theta in [0.3, 0.7, 1.0, 2.0] {
            let params = ModelParams::from_theta(k, q, theta).unwrap();
            for draw in 0..20 {
                let leaf = random_fields(tree.leaves().len(), q, 2.0, &mut rng);
                let mut fields = propagate_fields(&tree, &leaf, &params).unwrap();
                worst = worst.max(check_consistency(&tree, &fields, &params).unwrap());
                if draw == 0 {
                    let mut bumped = fields[target].components().to_vec();
                    bumped[0] += 0.3;
                    fields[target] = FieldVector::new(bumped).unwrap();
                    let v = check_consistency(&tree, &fields, &params).unwrap();
                    control[setting] = control[setting].min(v);
                }
            }
        }
    }
    outcome(
        worst <= 1e-12 && control[0] > 1e-3 && control[1] > 1e6 * worst.max(1e-16),
        format!(
            "160 draws, max violation {worst:.2e}; perturbed control min {:.2e} (q=3, n=2), {:.2e} (q=2, n=3)",
            control[0], control[1]
        ),
    )
}

fn inverse_and_derivative() -> Outcome {
    let mut worst_gf: f64 = 0.0;
    let mut worst_fg: f64 = 0.0;
    let mut worst_dh: f64 = 0.0;
    for k in 3..=5u32 {
        for theta in [0.05, 0.1, 0.2] {
            let map = ScalarMap::new(theta, k).unwrap();
            let (lo, hi) = (map.domain().lower(), map.domain().upper());
            // g(f(x)) on a log grid over [0.01, 100]; further out f(x) creeps
            // towards θ₁ and the inversion is ill-conditioned
            for s in linspace(-2.0, 2.0, 100) {
                let x = 10f64.powf(s);
                worst_gf = worst_gf.max(rel(map.g(map.f(x).unwrap()).unwrap(), x));
            }
            // f(g(x)) on an interior log grid of (θ₁, θ₂)
            for s in linspace(0.0, 1.0, 102).into_iter().skip(1).take(100) {
                let x = (lo.ln() + s * (hi.ln() - lo.ln())).exp();
                worst_fg = worst_fg.max(rel(map.f(map.g(x).unwrap()).unwrap(), x));
            }
            // h' against a difference quotient on an interior grid
            let h = |x: f64| map.h(x).unwrap();
            for s in linspace(0.0, 1.0, 102).into_iter().skip(1).take(100) {
                let x = (lo.ln() + s * (hi.ln() - lo.ln())).exp();
                let step = 1e-3 * (x - lo).min(hi - x).min(x);
                let numeric = derivative(h, x, step);
                let analytic = map.h_prime(x).unwrap();
                worst_dh = worst_dh.max(rel(numeric, analytic));
            }
        }
    }
    outcome(
        worst_gf <= 1e-12 && worst_fg <= 1e-12 && worst_dh <= 1e-6,
        format!("g(f(x)) {worst_gf:.2e}, f(g(x)) {worst_fg:.2e}, h' vs difference {worst_dh:.2e}"),
    )
}

fn sign_relations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = 0;
    let mut disagreements = 0;
    for _ in 0..10_000 {
        let theta = rng.gen_range(1e-6..1.0 - 1e-6);
        let k = rng.gen_range(3..=10u32);
        let z: [f64; 4] = [(); 4].map(|_| rng.gen_range(-4.0f64..4.0).exp());
        let out = system_oracle(z, theta, k);
        // direct statement of the three relations
        let sign = |v: f64| (v > 0.0) as i8 - (v < 0.0) as i8;
        let ordering = sign(out[0] - out[1]) == -sign(z[2] - z[3]);
        let side = |input: f64, output: f64| (input < 1.0 || output <= 1.0) && (input > 1.0 || output >= 1.0);
        let direct = ordering && side(z[2], out[0]) && side(z[3], out[1]);
        if !direct {
            failures += 1;
        }
        let zin = ZVector::new(z).unwrap();
        let zout = system6_map(&zin, theta, k).unwrap();
        if !proposition_sign_check(&zin, &zout, theta).unwrap().all() {
            disagreements += 1;
        }
    }
    outcome(
        failures == 0 && disagreements == 0,
        format!("10000 trials, {failures} oracle failures, {disagreements} library failures"),
    )
}

fn descartes_bound() -> Outcome {
    let mut bad = Vec::new();
    for k in 3..=12u32 {
        for i in 1..=50 {
            let theta = i as f64 / 51.0;
            let terms = p_coefficients(theta, k).unwrap();
            let mut ordered = terms.clone();
            ordered.sort_by_key(|t| std::cmp::Reverse(t.degree));
            let signs: Vec<bool> = ordered
                .iter()
                .filter(|t| t.coeff != 0.0)
                .map(|t| t.coeff > 0.0)
                .collect();
            let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
            let library = descartes_positive_root_bound(&terms).unwrap();
            if changes != 2 || library != 2 {
                bad.push((k, theta, changes, library));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("500 (k, theta) pairs, {} with a count other than 2 {bad:?}", bad.len()),
    )
}

fn invariant_set() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_eq: f64 = 0.0;
    let mut worst_f: f64 = 0.0;
    for _ in 0..1000 {
        let theta = rng.gen_range(0.01..0.99);
        let k = rng.gen_range(3..=8u32);
        let x = rng.gen_range(-3.0f64..3.0).exp();
        let y = rng.gen_range(-3.0f64..3.0).exp();
        let out = system6_map(&ZVector::new([x, x, y, y]).unwrap(), theta, k).unwrap();
        worst_eq = worst_eq.max(rel(out[0], out[1])).max(rel(out[2], out[3]));
        worst_f = worst_f
            .max(rel(out[0], f_oracle(y, theta, k)))
            .max(rel(out[2], f_oracle(x, theta, k)))
            .max(rel(out[0], f_scalar(y, theta, k).unwrap()))
            .max(rel(out[2], f_scalar(x, theta, k).unwrap()));
    }
    outcome(
        worst_eq <= 1e-14 && worst_f <= 1e-12,
        format!("1000 draws, component equality {worst_eq:.2e}, match with (f(y), f(x)) {worst_f:.2e}"),
    )
}

fn boundary_behaviour() -> Outcome {
    let mut bad = Vec::new();
    let mut cases = 0;
    for k in 3..=5u32 {
        let crit = (k as f64 - 2.0) / (k as f64 + 1.0);
        for theta in linspace(0.02, 0.98 * crit, 10) {
            let map = ScalarMap::new(theta, k).unwrap();
            let (lo, hi) = (map.domain().lower(), map.domain().upper());
            for d in [1e-4, 1e-6, 1e-8] {
                cases += 2;
                for x in [lo * (1.0 + d), hi * (1.0 - d)] {
                    let slope = map.h_prime(x).unwrap();
                    if slope <= 0.0 || slope.is_nan() {
                        bad.push(format!("h'({x}) = {slope} at k={k} theta={theta}"));
                    }
                }
            }
            cases += 1;
            let at_one = map.h_prime(1.0).unwrap();
            if at_one >= 0.0 || at_one.is_nan() {
                bad.push(format!("h'(1) = {at_one} at k={k} theta={theta}"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{cases} evaluations, {} wrong sign {bad:?}", bad.len()),
    )
}

fn above_threshold() -> Outcome {
    let mut bad = Vec::new();
    for k in 3..=5u32 {
        let crit = (k as f64 - 2.0) / (k as f64 + 1.0);
        for theta in linspace(1.02 * crit, 0.95, 10) {
            match find_h_roots(theta, k, DEFAULT_GRID) {
                Ok(rep) if rep.xs() == [1.0] => {}
                Ok(rep) => bad.push(format!("k={k} theta={theta}: {:?}", rep.xs())),
                Err(e) => bad.push(format!("k={k} theta={theta}: {e}")),
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("30 cases, {} with more than one root {bad:?}", bad.len()),
    )
}

fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_cayley-potts"))
            .args(["scan", "--k", "3", "--theta", "0.05:0.95:19", "--format", "csv"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let golden_path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/scan_k3.csv");
    let golden = std::fs::read(golden_path).expect("golden file");
    let ok = a.status.success() && b.status.success() && a.stdout == b.stdout && a.stdout == golden;
    outcome(
        ok,
        format!(
            "exit {:?}/{:?}, runs identical: {}, matches golden: {}",
            a.status.code(),
            b.status.code(),
            a.stdout == b.stdout,
            a.stdout == golden
        ),
    )
}

#[test]
fn acceptance_criteria() {
    type Criterion = (&'static str, fn() -> Outcome, Duration);
    let criteria: [Criterion; 10] = [
        (
            "three roots below theta_cr",
            root_counts_below_threshold,
            Duration::from_secs(5),
        ),
        ("theta_cr formula", critical_parameter, Duration::from_secs(1)),
        (
            "consistency of propagated fields",
            consistency_oracle,
            Duration::from_secs(30),
        ),
        (
            "inverse and derivative identities",
            inverse_and_derivative,
            Duration::from_secs(1),
        ),
        ("sign relations", sign_relations, Duration::from_secs(1)),
        ("Descartes sign changes", descartes_bound, Duration::from_secs(1)),
        ("invariant set", invariant_set, Duration::from_secs(1)),
        ("boundary slopes of h", boundary_behaviour, Duration::from_secs(1)),
        ("one root above threshold", above_threshold, Duration::from_secs(5)),
        ("deterministic scan output", determinism, Duration::from_secs(5)),
    ];

    // Written straight to stdout so the lines show up without --nocapture.
    let mut stdout = std::io::stdout().lock();
    let mut failed = Vec::new();
    for (i, (name, check, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let ok = result.ok && elapsed <= budget;
        let verdict = if ok { "PASS" } else { "FAIL" };
        let _ = writeln!(
            stdout,
            "{verdict} [{:>2}] {name}: {} ({:.3} s, budget {} s)",
            i + 1,
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        if !ok {
            failed.push(i + 1);
        }
    }
    let _ = stdout.flush();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
