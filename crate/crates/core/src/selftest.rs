//! Quick end-to-end consistency checks behind `wppan selftest`.

use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::allocator::{self, concavity_probe, grid_oracle, midpoint_concavity_gap, AllocationProblem, SolverConfig};
use crate::experiments::{run_paired, Strategy};
use crate::harvest::{harvested_power, EhParams, HarvestMatrix};
use crate::scenario::SystemConfig;

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Random allocation problem with `Psi * Phi` spread over three decades.
pub fn random_problem(rng: &mut ChaCha8Rng, users: usize, slots: usize) -> AllocationProblem {
    let rows = (0..users)
        .map(|_| (0..slots).map(|_| log_uniform(rng, 1e-3, 1.0)).collect())
        .collect();
    let psi = (0..users).map(|_| log_uniform(rng, 5.0, 500.0)).collect();
    AllocationProblem::new(HarvestMatrix::from_rows(rows).expect("positive entries"), psi, 1.0).expect("valid problem")
}

fn eh_points() -> CheckResult {
    let p = EhParams::default();
    let zero = harvested_power(0.0, &p).unwrap_or(f64::NAN);
    let at_b = harvested_power(p.b, &p).unwrap_or(f64::NAN);
    let expect = p.p_max_w * -(-p.a * p.b).exp_m1() / 2.0;
    let rel = ((at_b - expect) / expect).abs();
    CheckResult {
        name: "eh-model",
        passed: zero == 0.0 && rel <= 1e-12,
        detail: format!("phi(0) = {zero:e}, phi(b) relative error {rel:.1e}"),
    }
}

fn oracle_agreement(instances: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);
    let cfg = SolverConfig::default();
    let mut worst = 0.0f64;
    let mut failures = 0;
    for i in 0..instances {
        let (users, slots) = [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3)][i % 5];
        let problem = random_problem(&mut rng, users, slots);
        let resolution = if slots == 1 { 1.0 / 4096.0 } else { 1.0 / 128.0 };
        match (allocator::solve(&problem, &cfg), grid_oracle(&problem, resolution)) {
            (Ok(s), Ok(o)) => {
                let excess = (o - s.min_rate) / 1e-3f64.max(1e-4 * o);
                worst = worst.max(excess);
            }
            _ => failures += 1,
        }
    }
    CheckResult {
        name: "oracle",
        passed: failures == 0 && worst <= 1.0,
        detail: format!("{instances} instances, {failures} errors, worst shortfall {worst:.3} of tolerance"),
    }
}

fn concavity(samples: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0cc);
    let mut worst_eig = f64::NEG_INFINITY;
    for _ in 0..samples / 10 {
        let psi = log_uniform(&mut rng, 0.1, 10.0);
        let pts: Vec<(f64, f64)> = (0..10)
            .map(|_| (log_uniform(&mut rng, 0.1, 10.0), log_uniform(&mut rng, 0.1, 10.0)))
            .collect();
        worst_eig = worst_eig.max(concavity_probe(psi, &pts).max_eigenvalue);
    }
    let mut worst_gap = f64::INFINITY;
    for _ in 0..samples {
        let problem = random_problem(&mut rng, 2, 2);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            let raw: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            raw.iter().map(|v| v / sum).collect()
        };
        let (x, y) = (draw(&mut rng), draw(&mut rng));
        worst_gap = worst_gap.min(midpoint_concavity_gap(&problem, &x, &y));
    }
    CheckResult {
        name: "concavity",
        passed: worst_eig <= 1e-6 && worst_gap >= -1e-12,
        detail: format!("max Hessian eigenvalue {worst_eig:.2e}, min midpoint gap {worst_gap:.2e}"),
    }
}

fn nesting(trials: u64) -> CheckResult {
    let cfg = SystemConfig::reference_scenario();
    let tol = cfg.solver.rel_tol;
    let mut violations = 0;
    let mut errors = 0;
    for t in 0..trials {
        match run_paired(&cfg, t, &[Strategy::Search, Strategy::Greedy, Strategy::Naive]) {
            Ok(r) => {
                let s = r[0].min_rate;
                if r[1].min_rate > s * (1.0 + tol) || r[2].min_rate > s * (1.0 + tol) {
                    violations += 1;
                }
            }
            Err(_) => errors += 1,
        }
    }
    CheckResult {
        name: "nesting",
        passed: violations == 0 && errors == 0,
        detail: format!("{trials} paired trials, {violations} ordering violations, {errors} errors"),
    }
}

/// Run every check, writing one line per check to `out`. Returns whether all
/// passed.
pub fn run(out: &mut impl Write) -> std::io::Result<bool> {
    let checks = [eh_points(), oracle_agreement(20), concavity(200), nesting(20)];
    let mut ok = true;
    for c in &checks {
        writeln!(
            out,
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        )?;
        ok &= c.passed;
    }
    Ok(ok)
}
