//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run alone with `cargo test -p hammerstein-cli --test acceptance`.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use hammerstein::certificate::{certify, EpsilonChoice, Factors};
use hammerstein::kernel::Kernel;
use hammerstein::oracle::ode_reference;
use hammerstein::problem::{
    check_assumptions, solve_eta, solve_xi, Nonlinearity, ProblemInstance, SamplingPlan, SourceSpec, WeightField,
};
use hammerstein::solver::{solve, uniqueness_probe, Solution, SolveOptions};
use hammerstein::space::{DiscreteMeasureSpace, GridFunction, TimeGrid};
use nalgebra::DMatrix;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);
type RootCase = (&'static str, f64, Box<dyn Fn(f64) -> f64>, f64);

fn check(ok: bool, msg: String) -> Verdict {
    if ok { Ok(msg) } else { Err(msg) }
}

fn two_state() -> Kernel {
    let space = Arc::new(DiscreteMeasureSpace::finite(&[0.5, 0.5]).unwrap());
    Kernel::matrix_semigroup(space, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])).unwrap()
}

fn stochastic_desk() -> ProblemInstance {
    ProblemInstance::new(
        two_state(),
        TimeGrid::new(5.0, 200).unwrap(),
        Nonlinearity::power(0.5).unwrap(),
        WeightField::canonical_mixture(1.0, 0.5, vec![0.5]).unwrap(),
        SourceSpec::Constant(0.25),
        5.0,
    )
    .unwrap()
}

fn damped_desk(steps: usize) -> ProblemInstance {
    let space = Arc::new(DiscreteMeasureSpace::finite(&[1.0]).unwrap());
    let kernel = Kernel::matrix_semigroup(space, DMatrix::zeros(1, 1)).unwrap().damp(1.0).unwrap();
    ProblemInstance::new(
        kernel,
        TimeGrid::new(2.0, steps).unwrap(),
        Nonlinearity::power(0.5).unwrap(),
        WeightField::constant(1.0).unwrap(),
        SourceSpec::Constant(1.0),
        2.0,
    )
    .unwrap()
}

fn tight(record: bool) -> SolveOptions {
    SolveOptions { tol: 1e-12, max_iter: 500, record_iterates: record, ..Default::default() }
}

fn solve_timed(p: &ProblemInstance, opts: &SolveOptions) -> Result<(Solution, Duration), String> {
    let start = Instant::now();
    let s = solve(p, opts).map_err(|e| e.to_string())?;
    Ok((s, start.elapsed()))
}

fn bound_domination(p: &ProblemInstance) -> Result<(f64, f64, f64, Factors), String> {
    let cert = certify(p, EpsilonChoice::Auto, 31).map_err(|e| e.to_string())?;
    let s = solve(p, &tight(true)).map_err(|e| e.to_string())?;
    if !s.converged {
        return Err("reference solve did not converge".into());
    }
    let gaps = s.distances_to_final();
    let worst = (0..=30)
        .map(|m| gaps.get(m).copied().unwrap_or(0.0) - cert.error_bound(m))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((cert.k, cert.c, worst, cert.factors))
}

fn criterion_1() -> Verdict {
    let p = stochastic_desk();
    let (s, elapsed) = solve_timed(&p, &tight(true))?;
    let worst = s.iterates.windows(2).map(|w| w[1].max_excess_over(&w[0])).fold(0.0, f64::max);
    check(
        s.converged && worst <= 1e-12 && elapsed < Duration::from_secs(5),
        format!("{} iterations, max(u_(m+1) - u_m) = {worst:.3e}, {:.3} s", s.iterations, elapsed.as_secs_f64()),
    )
}

fn criterion_2() -> Verdict {
    let p = stochastic_desk();
    let (k, c, worst, factors) = bound_domination(&p)?;
    let Factors::Stochastic { sigma_star, .. } = factors else { return Err("wrong regime".into()) };
    check(
        sigma_star > 0.0 && sigma_star < 1.0 && k > 0.0 && k < 1.0 && worst <= 0.0,
        format!("sigma* = {sigma_star:.6}, k = {k:.6}, C = {c:.6}, max(gap - bound) over m <= 30 = {worst:.3e}"),
    )
}

fn criterion_3() -> Verdict {
    let p = damped_desk(200);
    let eta = solve_eta(p.nonlinearity(), 1.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let golden_sq = (3.0 + 5f64.sqrt()) / 2.0;
    let (k, _, worst, factors) = bound_domination(&p)?;
    let Factors::Substochastic { sigma_sharp, sigma_hash } = factors else { return Err("wrong regime".into()) };
    let inside = |v: f64| v > 0.0 && v < 1.0;
    check(
        (eta - golden_sq).abs() <= 1e-10 && inside(sigma_sharp) && inside(sigma_hash) && inside(k) && worst <= 0.0,
        format!(
            "|eta - (3+sqrt5)/2| = {:.1e}, sigma_sharp = {sigma_sharp:.6}, sigma_hash = {sigma_hash:.6}, k = {k:.6}, max(gap - bound) = {worst:.3e}",
            (eta - golden_sq).abs()
        ),
    )
}

fn ode_gap(steps: usize) -> Result<f64, String> {
    let p = damped_desk(steps);
    let u = solve(&p, &SolveOptions { tol: 1e-13, ..Default::default() }).map_err(|e| e.to_string())?.u;
    let q = p.kernel().effective_generator().unwrap();
    // g ≡ 1 is the mild solution of u' = −u + 1, u(0) = 1
    let f = GridFunction::constant(1, p.nodes(), 1.0);
    let reference = ode_reference(&q, &[1.0], &f, p.weight(), p.nonlinearity(), p.grid(), 16).map_err(|e| e.to_string())?;
    Ok(u.sup_distance(&reference))
}

fn criterion_4() -> Verdict {
    let start = Instant::now();
    let coarse = ode_gap(200)?;
    let fine = ode_gap(400)?;
    let elapsed = start.elapsed();
    let ratio = coarse / fine;
    check(
        coarse <= 1e-3 && (3.2..=4.8).contains(&ratio) && elapsed < Duration::from_secs(10),
        format!("gap {coarse:.3e} at dt = 1e-2, {fine:.3e} at dt = 5e-3, ratio {ratio:.3}, {:.3} s", elapsed.as_secs_f64()),
    )
}

fn criterion_5() -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, p) in [("stochastic", stochastic_desk()), ("damped", damped_desk(200))] {
        let r = uniqueness_probe(&p, 1e-12, 500).map_err(|e| e.to_string())?;
        ok &= r.gap <= 1e-8 && r.order_violation <= 1e-12;
        lines.push(format!("{name}: gap {:.3e}, order violation {:.3e}", r.gap, r.order_violation));
    }
    check(ok, lines.join("; "))
}

/// Bracket on a 10⁶-step uniform scan, then bisect the bracketing cell.
fn scan_bisect(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    const STEPS: usize = 1_000_000;
    let h = (hi - lo) / STEPS as f64;
    let mut a = lo;
    let mut fa = f(a);
    for i in 1..=STEPS {
        let b = lo + i as f64 * h;
        let fb = f(b);
        if fa <= 0.0 && fb > 0.0 {
            let (mut a, mut b) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if f(mid) <= 0.0 { a = mid } else { b = mid }
            }
            return 0.5 * (a + b);
        }
        a = b;
        fa = fb;
    }
    f64::NAN
}

fn criterion_6() -> Verdict {
    let sqrt = Nonlinearity::power(0.5).unwrap();
    let cases: [RootCase; 3] = [
        ("xi(beta=2)", 4.0, Box::new(|u: f64| u - u.sqrt() - 2.0), solve_xi(&sqrt, 2.0).map_err(|e| e.to_string())?),
        ("xi(beta=0)", 1.0, Box::new(|u: f64| u - u.sqrt()), solve_xi(&sqrt, 0.0).map_err(|e| e.to_string())?),
        ("eta(0, 2, 1)", 4.0, Box::new(|u: f64| u - 2.0 * u.sqrt()), solve_eta(&sqrt, 0.0, 2.0, 1.0).map_err(|e| e.to_string())?),
    ];
    let mut ok = true;
    let mut lines = Vec::new();
    for (name, expected, f, got) in cases {
        // start the scan just right of the trivial root at 0
        let oracle = scan_bisect(f, 1e-3, 10.0);
        ok &= (got - expected).abs() <= 1e-10 && (oracle - expected).abs() <= 1e-10;
        lines.push(format!("{name} = {got:.12} (oracle {oracle:.12})"));
    }
    check(ok, lines.join("; "))
}

fn criterion_7() -> Verdict {
    let ts = [0.1, 1.0, 10.0];
    let space3 = Arc::new(DiscreteMeasureSpace::finite(&[0.2, 0.3, 0.5]).unwrap());
    let three = Kernel::matrix_semigroup(space3, DMatrix::from_row_slice(3, 3, &[2.0, -1.5, -0.5, -0.3, 0.3, 0.0, -1.0, -1.0, 2.0]))
        .unwrap();
    let mut worst_conservative = 0.0f64;
    for k in [two_state(), three.clone()] {
        for x in 0..k.space().len() {
            for &t in &ts {
                worst_conservative = worst_conservative.max((k.mass(x, t).map_err(|e| e.to_string())? - 1.0).abs());
            }
        }
    }
    let mut worst_damped = 0.0f64;
    for (k, m) in [(two_state().damp(0.7).unwrap(), 0.7), (three.damp(1.3).unwrap(), 1.3)] {
        for x in 0..k.space().len() {
            for &t in &ts {
                worst_damped = worst_damped.max((k.mass(x, t).map_err(|e| e.to_string())? - (-m * t).exp()).abs());
            }
        }
    }
    let box1 = Arc::new(DiscreteMeasureSpace::unit_box(1, 33, 1.0).unwrap());
    let neumann = Kernel::neumann_box(box1, 1.0, 64).unwrap();
    let mut worst_neumann = 0.0f64;
    for x in 0..33 {
        for &t in &ts {
            worst_neumann = worst_neumann.max((neumann.mass(x, t).map_err(|e| e.to_string())? - 1.0).abs());
        }
    }
    check(
        worst_conservative <= 1e-10 && worst_damped <= 1e-10 && worst_neumann <= 1e-6,
        format!("conservative {worst_conservative:.1e}, damped {worst_damped:.1e}, neumann {worst_neumann:.1e}"),
    )
}

fn criterion_8() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut lines = Vec::new();

    let pass = common::hvsolve(dir.path(), "check", &common::desk(), &[]);
    let all_pass = pass.summary["assumptions"]["entries"]
        .as_array()
        .is_some_and(|es| !es.is_empty() && es.iter().all(|e| e["pass"] == true));
    ok &= pass.code == 0 && all_pass;
    lines.push(format!("all-pass exit {}", pass.code));
    // library verdict agrees with the binary
    ok &= check_assumptions(&stochastic_desk(), &SamplingPlan::default()).pass();

    for (what, cfg, entry) in common::failures() {
        let r = common::hvsolve(dir.path(), "check", &cfg, &[]);
        let names = common::failing(&r.summary);
        let named = names.iter().any(|n| n == entry);
        ok &= r.code == 1 && named;
        lines.push(format!("{what}: exit {}, failing {names:?}", r.code));
    }
    check(ok, lines.join("; "))
}

fn criterion_9() -> Verdict {
    let box_space = Arc::new(DiscreteMeasureSpace::unit_box(1, 17, 1.0).unwrap());
    let box_problem = ProblemInstance::new(
        Kernel::neumann_box(box_space, 0.5, 64).unwrap(),
        TimeGrid::new(3.0, 120).unwrap(),
        Nonlinearity::saturating(2.0, 0.5).unwrap(),
        WeightField::canonical_mixture(2.0, 0.3, (0..17).map(|i| i as f64 / 16.0).collect()).unwrap(),
        SourceSpec::Duhamel { u0: (0..17).map(|i| 0.2 + 0.05 * i as f64).collect(), forcing: hammerstein::problem::Forcing::Constant(0.1) },
        3.0,
    )
    .map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut lines = Vec::new();
    for (name, p) in [("two-state", stochastic_desk()), ("neumann box", box_problem)] {
        let s = solve(&p, &tight(false)).map_err(|e| e.to_string())?;
        let g = p.source().values();
        let xi = solve_xi(p.nonlinearity(), p.source().beta()).map_err(|e| e.to_string())?;
        let gap = xi - p.source().beta();
        let below = g.max_excess_over(&s.u);
        let above = s.u.max_excess_over(&g.map(|v| v + gap));
        ok &= s.converged && below <= 1e-10 && above <= 1e-10;
        lines.push(format!("{name}: g - u <= {below:.1e}, u - (g + xi - beta) <= {above:.1e}"));
    }
    check(ok, lines.join("; "))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("monotone decrease", criterion_1),
        ("geometric bound domination", criterion_2),
        ("substochastic certificate", criterion_3),
        ("ODE oracle equivalence", criterion_4),
        ("uniqueness probe", criterion_5),
        ("root solvers", criterion_6),
        ("kernel mass sandwich", criterion_7),
        ("assumption checker soundness", criterion_8),
        ("solution sandwich", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let verdict = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let (tag, detail) = match verdict {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {} [{tag}] {name}: {detail}", i + 1);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
