//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use optolaser::dynamics::{integrate, IntegratorConfig};
use optolaser::model::{phase_rotate, rhs, ModeState, SystemParams};
use optolaser::oracle::{compare_with_analytic, solve_stationary};
use optolaser::stability::{assess, numeric_threshold, GOLDSTONE_TOL};
use optolaser::steady_state::{
    all_branches, excitation_class, jump_magnitude, laser_curve_analytic, linspace, max_jump,
    max_residual, nonzero_branch, omega_ex, omega_th, sin_phi, ExcitationClass, Sign,
};
use optolaser::stochastic::{ensemble_curve, time_average, NoiseConfig};
use optolaser::sweep::{
    class_grid, largest_step, laser_curve_dynamic, LaserCurve, Map2DSpec, SweepMode, SweepSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Preset = (&'static str, fn() -> SystemParams);

const SETS: [Preset; 3] = [
    ("fig1a", SystemParams::fig1a),
    ("fig1b", SystemParams::fig1b),
    ("fig1c", SystemParams::fig1c),
];

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

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    SystemParams {
        delta_omega1: rng.random_range(-5e-3..5e-3),
        delta_omega2: rng.random_range(1e-3..8e-3),
        omega_b: rng.random_range(1e-3..8e-3),
        gamma1: rng.random_range(5e-3..2e-2),
        gamma2: rng.random_range(5e-4..2e-3),
        gamma_b: rng.random_range(5e-4..2e-3),
        g: rng.random_range(5e-3..2e-2),
        omega_drive_amp: 0.0,
    }
}

fn thresholds() -> Outcome {
    let expected = [5.4918e-3, 5.2e-3, 5.4918e-3];
    let mut worst = 0.0f64;
    let mut worst_golden = 0.0f64;
    for ((_, make), golden) in SETS.iter().zip(expected) {
        let p = make();
        let th = omega_th(&p);
        let numeric = match numeric_threshold(&p, 0.5 * th, 2.0 * th) {
            Ok(v) => v,
            Err(e) => return check(false, format!("bisection failed: {e}")),
        };
        worst = worst.max(rel(numeric, th));
        worst_golden = worst_golden.max(rel(th, golden));
    }
    check(
        worst < 1e-6 && worst_golden < 1e-4,
        format!("max rel(eigen vs closed form) = {worst:.2e}, max rel(closed form vs quoted) = {worst_golden:.2e}"),
    )
}

fn fresh_curves() -> Vec<(&'static str, SystemParams, LaserCurve)> {
    let spec = SweepSpec::new(4e-3, 8e-3, 60, SweepMode::Fresh);
    SETS.iter()
        .map(|(name, make)| {
            let p = make();
            (
                *name,
                p,
                laser_curve_dynamic(&p, &spec).expect("valid sweep"),
            )
        })
        .collect()
}

fn dynamic_vs_analytic(curves: &[(&str, SystemParams, LaserCurve)], seconds: f64) -> Outcome {
    let mut worst = 0.0f64;
    let mut compared = 0;
    let mut skipped = 0;
    for (_, p, curve) in curves {
        let th = omega_th(p);
        for pt in curve.points.iter().filter(|pt| pt.omega > 1.05 * th) {
            if !pt.converged {
                skipped += 1;
                continue;
            }
            let plus =
                nonzero_branch(&p.with_drive(pt.omega), Sign::Plus).expect("above threshold");
            worst = worst.max(rel(pt.i2, plus.intensity_a2));
            compared += 1;
        }
    }
    check(
        worst < 1e-2 && compared > 0 && seconds < 120.0,
        format!("{compared} points, max rel error {worst:.2e}, {skipped} unconverged skipped, {seconds:.1} s"),
    )
}

fn jumps(curves: &[(&str, SystemParams, LaserCurve)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, p, curve) in curves {
        let Some(j) = curve.largest_step() else {
            return check(false, format!("{name}: no finite samples"));
        };
        let ok = if excitation_class(p) == ExcitationClass::Hard {
            let th = omega_th(p);
            j.delta_i2 >= 0.18 && j.omega_below < th && th < j.omega_above
        } else {
            j.delta_i2.abs() < 0.05
        };
        pass &= ok;
        let analytic = laser_curve_analytic(p, 4e-3, 8e-3, 60).expect("valid range");
        let reference =
            largest_step(&linspace(4e-3, 8e-3, 60), &analytic.stable_intensity()).expect("finite");
        let unconverged = curve.points.iter().filter(|pt| !pt.converged).count();
        parts.push(format!(
            "{name} max dI2 = {:.4} on [{:.5e}, {:.5e}] (closed form {:.4}, {unconverged} unconverged)",
            j.delta_i2, j.omega_below, j.omega_above, reference.delta_i2
        ));
    }
    check(pass, parts.join("; "))
}

fn classification() -> Outcome {
    let base = SystemParams::fig1c();
    let grid = linspace(-5e-3, 5e-3, 10);
    let mut mismatches = 0;
    for &d1 in &grid {
        for &d2 in &grid {
            let p = SystemParams {
                delta_omega1: d1,
                delta_omega2: d2,
                ..base
            };
            let margin = d1 * (d2 + p.omega_b) - p.gamma1 * (p.gamma2 + p.gamma_b);
            let expected = if margin > 0.0 {
                ExcitationClass::Hard
            } else if margin < 0.0 {
                ExcitationClass::Soft
            } else {
                ExcitationClass::Boundary
            };
            mismatches += usize::from(excitation_class(&p) != expected);
        }
    }
    let spec = Map2DSpec {
        omega_min: 4e-3,
        omega_max: 8e-3,
        omega_steps: 10,
        delta_omega1_min: -5e-3,
        delta_omega1_max: 5e-3,
        delta_omega1_steps: 10,
        offset: 2e-3,
        integrator: IntegratorConfig::default(),
    };
    for (d1, class) in spec
        .delta_omega1_values()
        .into_iter()
        .zip(class_grid(&base, &spec))
    {
        mismatches += usize::from(class != excitation_class(&spec.row_params(&base, d1)));
    }
    let boundary = excitation_class(&SystemParams::fig1b()) == ExcitationClass::Boundary;
    check(
        mismatches == 0 && boundary,
        format!(
            "{mismatches} mismatches over 10x10 grid and map rows, fig1b boundary = {boundary}"
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_dev = 0.0f64;
    let mut worst_res = 0.0f64;
    let mut failures = 0;
    for case in 0..50 {
        let base = random_params(&mut rng);
        let p = base.with_drive(rng.random_range(0.0..2.0) * omega_th(&base));
        let roots = solve_stationary(&p, 200, case);
        let cmp = compare_with_analytic(&p, &roots, 1e-8);
        if !cmp.all_matched(1e-8) {
            failures += 1;
        }
        worst_dev = worst_dev.max(cmp.max_deviation);
        for bp in all_branches(&p) {
            worst_res = worst_res.max(max_residual(&p, &bp) / p.omega_drive_amp.max(1.0));
        }
    }
    check(
        failures == 0 && worst_dev < 1e-8 && worst_res < 1e-10,
        format!("{failures}/50 cases unmatched, max deviation {worst_dev:.2e}, max branch residual {worst_res:.2e}"),
    )
}

fn structural_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = Vec::new();
    let mut note = |what: &str| {
        if !violations.contains(&what.to_string()) {
            violations.push(what.to_string());
        }
    };
    for _ in 0..200 {
        let base = random_params(&mut rng);
        let scale: f64 = rng.random_range(0.2..2.5);
        let p = base.with_drive(scale * omega_th(&base));

        let ex = omega_ex(&p);
        if (p.omega_drive_amp - ex).abs() > 1e-12
            && (sin_phi(&p).abs() <= 1.0) != (p.omega_drive_amp >= ex)
        {
            note("sin phi vs existence");
        }
        for sign in [Sign::Plus, Sign::Minus] {
            let Some(bp) = nonzero_branch(&p, sign) else {
                continue;
            };
            let ratio = bp.a2_mod.powi(2) * p.gamma2 - bp.b_mod.powi(2) * p.gamma_b;
            if ratio.abs() > 1e-12 * bp.a2_mod.powi(2).max(1e-3) {
                note("intensity ratio");
            }
            if (p.gamma_b * bp.delta2 - p.gamma2 * bp.delta_b).abs() > 1e-15 {
                note("detuning lock");
            }
            match assess(&p, &bp) {
                Ok(r) => {
                    let goldstone = r.goldstone_index.map(|k| r.eigenvalues[k].re.abs());
                    if !matches!(goldstone, Some(re) if re < GOLDSTONE_TOL) {
                        note("goldstone");
                    }
                }
                Err(_) => note("stability assessment"),
            }
        }

        let s = ModeState::new(
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        );
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let undriven = p.with_drive(0.0);
        let lhs = rhs(&undriven, &phase_rotate(&s, theta));
        let rhs_rot = phase_rotate(&rhs(&undriven, &s), theta);
        if (lhs - rhs_rot).max_abs() > 1e-12 {
            note("U(1) equivariance");
        }
    }
    let p = SystemParams::fig1c().with_drive(6e-3);
    let cfg = IntegratorConfig {
        t_end: 1e3,
        seed_amplitude: 0.0,
        ..Default::default()
    };
    let start = ModeState::new(Complex64::new(0.3, -0.1), Complex64::ZERO, Complex64::ZERO);
    let traj = integrate(&p, start, &cfg).expect("finite");
    if traj
        .states
        .iter()
        .any(|s| s.a2 != Complex64::ZERO || s.b != Complex64::ZERO)
    {
        note("zero manifold");
    }
    check(
        violations.is_empty(),
        if violations.is_empty() {
            "200 random parameter sets, all six invariants hold".to_string()
        } else {
            format!("violated: {}", violations.join(", "))
        },
    )
}

fn stochastic_robustness() -> Outcome {
    let omegas = linspace(4e-3, 8e-3, 40);
    let cfg = NoiseConfig {
        dt: 0.05,
        ..NoiseConfig::default().with_occupation(1e-3)
    };
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, make, want_jump) in [
        ("fig1c", SystemParams::fig1c as fn() -> SystemParams, true),
        ("fig1a", SystemParams::fig1a, false),
    ] {
        let curve = match ensemble_curve(&make(), &omegas, &cfg) {
            Ok(c) => c,
            Err(e) => return check(false, format!("{name}: {e}")),
        };
        let j = largest_step(&curve.omegas(), &curve.mean_i2()).expect("finite samples");
        pass &= if want_jump {
            j.delta_i2 > 0.1
        } else {
            j.delta_i2.abs() < 0.05
        };
        parts.push(format!("{name} noisy max dI2 = {:.4}", j.delta_i2));
    }

    let n = 1e-3;
    let free = SystemParams::fig1c().with_coupling(0.0);
    let ou = NoiseConfig {
        dt: 0.05,
        t_end: 4e4,
        transient_fraction: 0.25,
        ..NoiseConfig::default().with_occupation(n)
    };
    let samples: Vec<[f64; 3]> = (0..16)
        .map(|r| time_average(&free, ModeState::ZERO, &ou, r).expect("finite"))
        .collect();
    for (k, label) in ["a1", "a2", "b"].iter().enumerate() {
        let xs: Vec<f64> = samples.iter().map(|s| s[k]).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        let sigma = (var / xs.len() as f64).sqrt();
        let z = (mean - n).abs() / sigma;
        pass &= z < 3.0;
        parts.push(format!("OU <|{label}|^2> = {mean:.4e} ({z:.1} sigma)"));
    }
    check(pass, parts.join("; "))
}

fn golden_numbers() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    let mut expect = |what: &str, got: f64, golden: f64, tol: f64| {
        let ok = if golden == 0.0 {
            got.abs() < tol
        } else {
            rel(got, golden) < tol
        };
        pass &= ok;
        if !ok {
            parts.push(format!("{what}: {got:.7e} vs {golden:.7e}"));
        }
    };
    let (a, b, c) = (
        SystemParams::fig1a(),
        SystemParams::fig1b(),
        SystemParams::fig1c(),
    );
    expect("omega_ex 1a", omega_ex(&a), 4.6e-3, 1e-6);
    expect("omega_ex 1b", omega_ex(&b), 5.2e-3, 1e-6);
    expect("omega_ex 1c", omega_ex(&c), 5.4e-3, 1e-6);
    expect("omega_th 1a", omega_th(&a), 5.491812e-3, 1e-6);
    expect("omega_th 1b", omega_th(&b), 5.2e-3, 1e-6);
    expect("jump 1c", jump_magnitude(&c), 0.2, 1e-9);
    expect("jump 1b", jump_magnitude(&b), 0.0, 1e-12);
    expect("max jump 1c", max_jump(&c), 0.8, 1e-9);

    for (name, p, golden) in [("1c", c, 0.361534), ("1a", a, 0.085227)] {
        let p = p.with_drive(6e-3);
        let formula = nonzero_branch(&p, Sign::Plus)
            .expect("above threshold")
            .intensity_a2;
        expect(&format!("plus I2 {name} formula"), formula, golden, 1e-5);
        let roots = solve_stationary(&p, 200, 11);
        let best = roots
            .iter()
            .map(|r| r.a2.norm_sqr())
            .min_by(|x, y| (x - formula).abs().total_cmp(&(y - formula).abs()))
            .unwrap_or(f64::NAN);
        expect(&format!("plus I2 {name} oracle"), best, formula, 1e-8);
    }
    check(
        pass,
        if parts.is_empty() {
            "thresholds, jumps and branch intensities agree with frozen values and the Newton oracle".to_string()
        } else {
            parts.join("; ")
        },
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 threshold reproduction", thresholds()));

    let started = Instant::now();
    let curves = fresh_curves();
    let seconds = started.elapsed().as_secs_f64();
    results.push((
        "2 dynamic vs closed-form curve",
        dynamic_vs_analytic(&curves, seconds),
    ));
    results.push(("3 hard-mode jump", jumps(&curves)));
    results.push(("4 classification boundary", classification()));
    results.push(("5 oracle equivalence", oracle_equivalence()));
    results.push(("6 structural invariants", structural_invariants()));
    results.push(("7 stochastic robustness", stochastic_robustness()));
    results.push(("8 frozen numbers cross-checked", golden_numbers()));

    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
