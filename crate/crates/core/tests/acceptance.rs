//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! fails at the end if any criterion failed.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toda_mirror::chevgroup::{gauss_minus_plus, lower_upper, GroupElement};
use toda_mirror::cli::{identity_suite, IdentityCheck};
use toda_mirror::crit::{find_critical_with, find_negative_critical, find_positive_critical, peterson_check, CriticalKind, SolverOptions};
use toda_mirror::integrate::{braid_compare, s_gamma, CycleSpec};
use toda_mirror::reps::Group;
use toda_mirror::rootsys::{weyl_dimension, WeylWord};
use toda_mirror::toda::bessel::{bessel_i0, bessel_k0};
use toda_mirror::toda::{verify, ResidualOptions};
use toda_mirror::C64;

// Tolerances and budgets.
const AC1_TOL: f64 = 1e-10;
const AC1_TIME: Duration = Duration::from_secs(1);
const AC2_TOL: f64 = 1e-6;
const AC2_TIME: Duration = Duration::from_secs(5);
const AC3_MATCH_TOL: f64 = 1e-8;
const AC3_RESIDUAL_TOL: f64 = 1e-5;
const AC3_TIME: Duration = Duration::from_secs(10);
const AC4_TOL: f64 = 1e-6;
const AC4_REFINE_TOL: f64 = 1e-8;
const AC4_TIME: Duration = Duration::from_secs(300);
const AC5_A2_TOL: f64 = 1e-10;
const AC5_B2_TOL: f64 = 1e-9;
const AC6_TOL: f64 = 1e-8;
const AC7_TOL: f64 = 1e-12;
const AC8_PARAM_TOL: f64 = 1e-8;
const AC8_GRAD_TOL: f64 = 1e-10;
const AC8_PETERSON_TOL: f64 = 1e-8;
const AC9_PRODUCT_TOL: f64 = 1e-12;
const AC9_PULLBACK_TOL: f64 = 1e-6;
const AC9_WHITTAKER_VECTOR_TOL: f64 = 1e-6;
const AC9_CONDITION_TOL: f64 = 1e-10;
const AC9_TRANSLATION_TOL: f64 = 1e-12;
const AC10_DENSE_TOL: f64 = 1e-12;
const AC10_RECONSTRUCT_TOL: f64 = 1e-10;

struct Outcome {
    id: &'static str,
    title: &'static str,
    passed: bool,
    detail: String,
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn cvec(h: &[f64]) -> Vec<C64> {
    h.iter().map(|&x| c(x)).collect()
}

fn group(t: &str) -> Group {
    Group::parse(t).unwrap()
}

fn word(s: &str) -> WeylWord {
    WeylWord::parse_one_based(s).unwrap()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn ac1() -> Outcome {
    let g = group("A1");
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for alpha in [-1.0, 0.0, 0.5, 1.0] {
        let s = s_gamma(&g, &CycleSpec::torus(&g.w0).with_nodes(64), &[c(alpha / 2.0)], 1.0).unwrap().s();
        let oracle = C64::new(0.0, 2.0 * PI * bessel_i0(2.0 * (alpha / 2.0f64).exp()).unwrap());
        worst = worst.max(rel(s, oracle));
    }
    let t = start.elapsed();
    Outcome {
        id: "AC1",
        title: "A1 torus integral against 2 pi i I0",
        passed: worst <= AC1_TOL && t < AC1_TIME,
        detail: format!("max rel err {worst:.2e}, {t:.2?}"),
    }
}

fn ac2() -> Outcome {
    let g = group("A1");
    let spec = CycleSpec::torus(&g.w0).with_nodes(64);
    let start = Instant::now();
    let mut res = Vec::new();
    for step in [1e-2, 5e-3] {
        for h in [-0.3, 0.1, 0.4] {
            let opts = ResidualOptions { fd_step: step, tol: AC2_TOL, ..Default::default() };
            res.push(verify(&g, &spec, &[h], 1.0, &opts).unwrap().residual_rel);
        }
    }
    let t = start.elapsed();
    let worst = res.iter().copied().fold(0.0, f64::max);
    Outcome {
        id: "AC2",
        title: "A1 Toda residual on the torus cycle, steps 1e-2 and 5e-3",
        passed: worst <= AC2_TOL && t < AC2_TIME,
        detail: format!("max residual {worst:.2e}, {t:.2?}"),
    }
}

fn ac3() -> Outcome {
    let g = group("A1");
    let start = Instant::now();
    let spec = CycleSpec::positive(&g.w0);
    let mut worst_match: f64 = 0.0;
    for alpha in [-1.0, 0.0, 0.5, 1.0] {
        let s = s_gamma(&g, &spec, &[c(alpha / 2.0)], 1.0).unwrap().s();
        let oracle = c(spec.orientation as f64 * 2.0 * bessel_k0(2.0 * (alpha / 2.0f64).exp()).unwrap());
        worst_match = worst_match.max(rel(s, oracle));
    }
    let opts = ResidualOptions { tol: AC3_RESIDUAL_TOL, ..Default::default() };
    let residual = verify(&g, &spec, &[0.15], 1.0, &opts).unwrap().residual_rel;
    let t = start.elapsed();
    Outcome {
        id: "AC3",
        title: "A1 positive cycle against 2 K0 and its Toda residual",
        passed: worst_match <= AC3_MATCH_TOL && residual <= AC3_RESIDUAL_TOL && t < AC3_TIME,
        detail: format!("orientation {:+}, max rel err {worst_match:.2e}, residual {residual:.2e}, {t:.2?}", spec.orientation),
    }
}

fn ac4() -> Outcome {
    let g = group("A2");
    // alpha_1(h) = 0.25, alpha_2(h) = -0.2
    let h = [0.1, -0.05];
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let start = Instant::now();
    let (report, s24) = pool.install(|| {
        let spec = CycleSpec::torus(&g.w0).with_nodes(32);
        let opts = ResidualOptions { tol: AC4_TOL, ..Default::default() };
        let report = verify(&g, &spec, &h, 1.0, &opts).unwrap();
        let s24 = s_gamma(&g, &CycleSpec::torus(&g.w0).with_nodes(24), &cvec(&h), 1.0).unwrap().s();
        (report, s24)
    });
    let t = start.elapsed();
    let s32 = report.quadrature.s();
    let refine = rel(s24, s32);
    Outcome {
        id: "AC4",
        title: "A2 Toda residual on the torus cycle, 32^3 nodes, one thread",
        passed: report.residual_rel <= AC4_TOL && refine <= AC4_REFINE_TOL && t < AC4_TIME,
        detail: format!("residual {:.2e}, 24 vs 32 delta {refine:.2e}, {t:.2?}", report.residual_rel),
    }
}

fn ac5() -> Outcome {
    let a2 = group("A2");
    let ra = braid_compare(&a2, &cvec(&[0.1, -0.2]), 1.0, &word("1,2,1"), &word("2,1,2"), 32).unwrap();
    let b2 = group("B2");
    let rb = braid_compare(&b2, &cvec(&[0.1, -0.05]), 1.0, &word("1,2,1,2"), &word("2,1,2,1"), 32).unwrap();
    Outcome {
        id: "AC5",
        title: "independence of the reduced word (A2, B2)",
        passed: ra.relative_difference <= AC5_A2_TOL && rb.relative_difference <= AC5_B2_TOL,
        detail: format!("A2 {:.2e}, B2 {:.2e}", ra.relative_difference, rb.relative_difference),
    }
}

fn ac6() -> Outcome {
    let g = group("A2");
    let h = cvec(&[0.2, -0.1]);
    let s1 = s_gamma(&g, &CycleSpec::torus(&g.w0).with_nodes(48), &h, 1.0).unwrap().s();
    let s2 = s_gamma(&g, &CycleSpec::torus(&g.w0).with_nodes(48).with_radii(&[0.7, 1.3, 1.0]), &h, 1.0).unwrap().s();
    let d = rel(s2, s1);
    Outcome {
        id: "AC6",
        title: "A2 torus radius invariance, 48^3 nodes",
        passed: d <= AC6_TOL,
        detail: format!("rel diff {d:.2e}"),
    }
}

fn ac7() -> Outcome {
    let mut worst: f64 = 0.0;
    for t in ["A1", "A2", "B2"] {
        let g = group(t);
        let mut spec = CycleSpec::torus(&g.w0).with_nodes(8);
        spec.bare = true;
        let v = s_gamma(&g, &spec, &vec![c(0.3); g.rank()], 1.0).unwrap().s();
        worst = worst.max(rel(v, C64::new(0.0, 2.0 * PI).powi(g.n_pos() as i32)));
    }
    Outcome {
        id: "AC7",
        title: "bare form over the torus cycle equals (2 pi i)^N",
        passed: worst <= AC7_TOL,
        detail: format!("max rel err {worst:.2e}"),
    }
}

fn ac8() -> Outcome {
    let a1 = group("A1");
    let mut param_err: f64 = 0.0;
    let mut peterson_ok = true;
    for alpha in [-0.8f64, 0.0, 0.6] {
        let h = [0.5 * alpha];
        let expect = (0.5 * alpha).exp();
        for cp in [find_positive_critical(&a1, &h, 1.0, &a1.w0).unwrap(), find_negative_critical(&a1, &h, 1.0, &a1.w0).unwrap()] {
            param_err = param_err.max((cp.params[0] - expect).abs() / expect);
            peterson_ok &= peterson_check(&a1, &cp, AC8_PETERSON_TOL).unwrap().passed();
        }
    }
    let a2 = group("A2");
    let h = [0.2, -0.1];
    let mut grad: f64 = 0.0;
    for kind in [CriticalKind::Positive, CriticalKind::Negative] {
        let cp = find_critical_with(&a2, &h, 1.0, &a2.w0, kind, &SolverOptions::default()).unwrap();
        grad = grad.max(cp.gradient_norm);
        if kind == CriticalKind::Positive {
            peterson_ok &= peterson_check(&a2, &cp, AC8_PETERSON_TOL).unwrap().passed();
        }
    }
    Outcome {
        id: "AC8",
        title: "critical points and the Peterson/Kim cross-check",
        passed: param_err <= AC8_PARAM_TOL && grad <= AC8_GRAD_TOL && peterson_ok,
        detail: format!("A1 param err {param_err:.2e}, A2 gradient {grad:.2e}, peterson {}", if peterson_ok { "ok" } else { "failed" }),
    }
}

fn defect(checks: &[IdentityCheck], prefix: &str) -> f64 {
    checks.iter().find(|c| c.name.starts_with(prefix)).map(|c| c.max_defect).unwrap_or(f64::INFINITY)
}

fn ac9() -> Outcome {
    let mut failures = Vec::new();
    let mut line = Vec::new();
    for t in ["A1", "A2", "A3", "B2", "C2", "G2"] {
        let g = group(t);
        let checks = identity_suite(&g, 100, 17).unwrap();
        let mut req: Vec<(&str, f64)> = vec![("Whittaker vector psi_+", AC9_WHITTAKER_VECTOR_TOL), ("translation law", AC9_TRANSLATION_TOL)];
        if matches!(t, "A2" | "B2" | "G2") {
            req.push(("product u y_i(s)", AC9_PRODUCT_TOL));
        }
        if matches!(t, "A2" | "A3") {
            req.push(("chart volume form", AC9_PULLBACK_TOL));
            req.push(("weighted volume form U+", AC9_PULLBACK_TOL));
            req.push(("weighted volume form torus", AC9_PULLBACK_TOL));
        }
        if matches!(t, "A1" | "A2") {
            req.push(("Whittaker vector psi_-", AC9_WHITTAKER_VECTOR_TOL));
        }
        if matches!(t, "A1" | "A2" | "B2") {
            req.push(("Whittaker condition", AC9_CONDITION_TOL));
        }
        let mut worst_ratio: f64 = 0.0;
        for (name, tol) in req {
            let d = defect(&checks, name);
            worst_ratio = worst_ratio.max(d / tol);
            if d > tol {
                failures.push(format!("{t} {name} {d:.2e}"));
            }
        }
        line.push(format!("{t} {worst_ratio:.1e}"));
    }
    Outcome {
        id: "AC9",
        title: "identity suites",
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("worst defect/tol: {}", line.join(", "))
        } else {
            failures.join("; ")
        },
    }
}

/// Unpivoted elimination of a dense real matrix; returns the unit lower factor.
fn dense_lower(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut w = a.clone();
    let mut l = DMatrix::<f64>::identity(n, n);
    for k in 0..n {
        for r in k + 1..n {
            let f = w[(r, k)] / w[(k, k)];
            l[(r, k)] = f;
            for j in k..n {
                w[(r, j)] -= f * w[(k, j)];
            }
        }
    }
    l
}

fn random_element(g: &Group, rng: &mut ChaCha8Rng, complex: bool) -> GroupElement {
    let mut m = g.identity();
    for _ in 0..2 * g.n_pos() {
        let i = rng.gen_range(0..g.rank());
        let im = if complex { rng.gen_range(-0.3..0.3) } else { 0.0 };
        let s = C64::new(rng.gen_range(-1.0..1.0), im);
        m = if rng.gen_bool(0.5) { &m * &g.x(i, s) } else { &m * &g.y(i, s) };
    }
    m
}

fn ac10() -> Outcome {
    let mut dims_ok = true;
    for t in ["A1", "A2", "A3", "B2", "C2", "G2"] {
        let g = group(t);
        for (i, m) in g.modules.iter().enumerate() {
            let mut lambda = vec![0; g.rank()];
            lambda[i] = 1;
            dims_ok &= m.dim as i64 == weyl_dimension(&g.datum, &g.roots, &lambda).to_integer();
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut dense: f64 = 0.0;
    for t in ["A1", "A2", "A3"] {
        let g = group(t);
        for _ in 0..20 {
            let m = random_element(&g, &mut rng, false);
            let l = dense_lower(&m.blocks[0].map(|z| z.re));
            let gf = gauss_minus_plus(&m).unwrap();
            for i in 0..g.rank() {
                dense = dense.max((gf.fstar[i] - l[(i + 1, i)]).norm() / (1.0 + l[(i + 1, i)].abs()));
            }
        }
    }
    let mut recon: f64 = 0.0;
    for t in ["B2", "G2"] {
        let g = group(t);
        for _ in 0..20 {
            let m = random_element(&g, &mut rng, true);
            gauss_minus_plus(&m).unwrap();
            let (y, b) = lower_upper(&m).unwrap();
            recon = recon.max((&y * &b).max_abs_diff(&m) / m.max_abs().max(1.0));
        }
    }
    Outcome {
        id: "AC10",
        title: "module dimensions and Gaussian decompositions",
        passed: dims_ok && dense <= AC10_DENSE_TOL && recon <= AC10_RECONSTRUCT_TOL,
        detail: format!("dims {}, type A vs dense {dense:.2e}, B2/G2 reconstruction {recon:.2e}", if dims_ok { "ok" } else { "mismatch" }),
    }
}

// Runs without the libtest harness so the criterion lines are never captured.
fn main() {
    let runs: [fn() -> Outcome; 10] = [ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10];
    let mut failed = Vec::new();
    for run in runs {
        let o = run();
        println!("[{}] {} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.id, o.title, o.detail);
        if !o.passed {
            failed.push(o.id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
