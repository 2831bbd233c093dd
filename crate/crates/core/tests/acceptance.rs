//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use fdp_core::envelopes::{confidence_thresholds, exact_confidence_set, exact_envelope, m10_envelope};
use fdp_core::examples::EXAMPLE1;
use fdp_core::simulation::{run_validation, ValidationReport, ValidationTarget};
use fdp_core::thresholds::{bh_threshold, simple_thresholds, SimpleKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn summarize(reports: &[ValidationReport]) -> Outcome {
    let mut detail = Vec::new();
    for r in reports {
        for c in &r.checks {
            detail.push(format!(
                "{}/{}: {:.6} in [{:.6}, {:.6}]{}",
                r.target,
                c.name,
                c.statistic,
                c.lower,
                c.upper,
                if c.passed { "" } else { " FAILED" }
            ));
        }
    }
    Outcome {
        passed: reports.iter().all(|r| r.passed),
        detail: detail.join("; "),
    }
}

fn run(targets: &[ValidationTarget]) -> Outcome {
    let mut reports = Vec::new();
    for &t in targets {
        match run_validation(t, None) {
            Ok(r) => reports.push(r),
            Err(e) => {
                return Outcome {
                    passed: false,
                    detail: format!("{}: error {e}", t.name()),
                }
            }
        }
    }
    summarize(&reports)
}

fn example_one() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut expect = |cond: bool, note: String| {
        ok &= cond;
        notes.push(if cond { note } else { format!("{note} FAILED") });
    };
    let bh = bh_threshold(&EXAMPLE1, 0.05).unwrap();
    expect(bh.t == 0.0095 && bh.rejected == Some(4), format!("bh t={} r={:?}", bh.t, bh.rejected));
    let bonf = simple_thresholds(&EXAMPLE1, 0.05, SimpleKind::Bonferroni).unwrap();
    expect(bonf.rejected == Some(3), format!("bonferroni r={:?}", bonf.rejected));
    let set = exact_confidence_set(&EXAMPLE1, 0.05).unwrap();
    let env = exact_envelope(&set, &EXAMPLE1).unwrap();
    let min = confidence_thresholds(&env, None).unwrap();
    let z = min.z.unwrap();
    expect(
        (min.t - 0.324).abs() < 1e-12 && (z - 0.111).abs() <= 0.002,
        format!("min-rate T={} Z={z:.4}", min.t),
    );
    let floor = env.gamma_bar.values().iter().copied().fold(f64::INFINITY, f64::min);
    expect(floor >= 0.05, format!("min envelope {floor:.4}"));
    let at_bh = env.eval(0.0095).unwrap();
    let at_left = env.eval_left(0.4262).unwrap();
    expect(at_bh <= 0.25 && at_left <= 0.25, format!("env(0.0095)={at_bh:.4} env(0.4262-)={at_left:.4}"));
    Outcome {
        passed: ok,
        detail: notes.join("; "),
    }
}

/// P{V_(2) ≤ c} = α for k uniforms, by bisection on the closed form.
fn critical(k: usize, alpha: f64) -> f64 {
    let f = |c: f64| 1.0 - (1.0 - c).powi(k as i32) - k as f64 * c * (1.0 - c).powi(k as i32 - 1);
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < alpha {
            lo = mid
        } else {
            hi = mid
        }
    }
    hi
}

fn exact_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let alpha = 0.05;
    for instance in 0..200 {
        let m = rng.gen_range(1..=12);
        let p: Vec<f64> = (0..m)
            .map(|_| match rng.gen_range(0..3) {
                0 => rng.gen::<f64>().powi(4),
                1 => rng.gen_range(0..10) as f64 / 10.0,
                _ => rng.gen(),
            })
            .collect();
        let set = exact_confidence_set(&p, alpha).unwrap();
        let env = exact_envelope(&set, &p).unwrap();
        let counts = m10_envelope(&env, m).unwrap();
        let mut accepted = Vec::new();
        let mut m0 = vec![false; m + 1];
        for mask in 0u32..1 << m {
            let alt: Vec<bool> = (0..m).map(|i| mask >> i & 1 == 1).collect();
            let mut nulls: Vec<f64> = (0..m).filter(|&i| !alt[i]).map(|i| p[i]).collect();
            nulls.sort_by(f64::total_cmp);
            let k = nulls.len();
            let accept = k <= 1 || nulls[1] > critical(k, alpha);
            if set.contains(&p, &alt).unwrap() != accept {
                return fail(format!("instance {instance}: membership differs for mask {mask:b}"));
            }
            if accept {
                m0[k] = true;
                accepted.push(alt);
            }
        }
        let expected: Vec<usize> = (0..=m).filter(|&k| m0[k]).collect();
        if set.null_counts() != expected {
            return fail(format!("instance {instance}: plausible null counts differ"));
        }
        for &t in &p {
            for left in [false, true] {
                let inside = |x: f64| if left { x < t } else { x <= t };
                let r = p.iter().filter(|&&x| inside(x)).count();
                let best = accepted
                    .iter()
                    .map(|alt| (0..m).filter(|&i| !alt[i] && inside(p[i])).count())
                    .max()
                    .unwrap();
                let gamma = if r == 0 { 0.0 } else { best as f64 / r as f64 };
                let (g, c) = if left {
                    (env.gamma_bar.eval_left(t), counts.eval_left(t))
                } else {
                    (env.gamma_bar.eval(t), counts.eval(t))
                };
                if g != gamma || c != best as f64 {
                    return fail(format!("instance {instance}: envelope differs at t={t} left={left}"));
                }
            }
        }
    }
    Outcome {
        passed: true,
        detail: "200 instances, membership, null counts, envelope and count envelope match enumeration".into(),
    }
}

fn fail(detail: String) -> Outcome {
    Outcome { passed: false, detail }
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags such as --nocapture; a name filter
    // that matches nothing skips the suite
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !filter.is_empty() && !filter.iter().any(|f| "acceptance".contains(f.as_str())) {
        return ExitCode::SUCCESS;
    }
    type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);
    let criteria: Vec<Criterion> = vec![
        ("1 example one exact reproduction", Box::new(example_one)),
        ("2 exact-set oracle equivalence", Box::new(exact_oracle)),
        (
            "3 coverage suites",
            Box::new(|| {
                run(&[
                    ValidationTarget::AstarCoverage,
                    ValidationTarget::ExactSetCoverage,
                    ValidationTarget::AsymptoticEnvelopeCoverage,
                ])
            }),
        ),
        ("4 mean fdp formula", Box::new(|| run(&[ValidationTarget::FdpMean]))),
        (
            "5 kernel validation",
            Box::new(|| {
                run(&[
                    ValidationTarget::FdpKernel,
                    ValidationTarget::QKernel,
                    ValidationTarget::StoreyKernel,
                    ValidationTarget::QInverseIdentity,
                ])
            }),
        ),
        (
            "6 plug-in validity",
            Box::new(|| run(&[ValidationTarget::PluginKnownA, ValidationTarget::PluginStorey])),
        ),
        ("7 known-a rate-ceiling threshold", Box::new(|| run(&[ValidationTarget::RateCeilingKnownA]))),
        ("8 example two qualitative reproduction", Box::new(|| run(&[ValidationTarget::ExampleTwo]))),
        (
            "9 estimation properties",
            Box::new(|| {
                run(&[
                    ValidationTarget::ProjectionBound,
                    ValidationTarget::LcmContraction,
                    ValidationTarget::StoreyVariance,
                ])
            }),
        ),
    ];
    let mut all = true;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        all &= outcome.passed;
        println!(
            "{} criterion {name} ({:.1}s): {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
