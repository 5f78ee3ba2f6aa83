//! Totally positive and totally negative critical points of the superpotential
//! over a fixed `h`, the Kim constants of motion in type A, and the Peterson
//! cross-check.
//!
//! Positive kind: `u = x_{i_1}(c_1) ... x_{i_N}(c_N)` with `c > 0`, so `u^{-1}` is
//! the chart point with the reversed word and coordinates `-rev(c)`.
//! Negative kind: the chart point `u^{-1} = x(a)` itself with `a > 0`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::mirror::{root_values, Chart};
use crate::reps::Group;
use crate::rootsys::{Series, WeylWord};
use crate::{Error, Result, C64};

const HESSIAN_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Positive,
    Negative,
}

impl std::str::FromStr for CriticalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "positive" => Ok(CriticalKind::Positive),
            "negative" => Ok(CriticalKind::Negative),
            other => Err(Error::OutOfRange(format!("unknown critical point kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Stop once the parameter gradient is below `tol * max(1, |F|)`.
    pub tol: f64,
    /// Accept a stalled run if the gradient is below `accept * max(1, |F|)`.
    pub accept: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_iter: 200, tol: 1e-13, accept: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub kind: CriticalKind,
    /// Word of the parameterization: `u = x_word(c)` for positive, `u^{-1} = x_word(a)` for negative.
    pub word: WeylWord,
    /// `c` or `a`, all positive.
    pub params: Vec<f64>,
    /// Coroot coordinates.
    pub h: Vec<f64>,
    pub z: f64,
    pub value: f64,
    /// Euclidean norm of the gradient with respect to `params`.
    pub gradient_norm: f64,
    /// Positive definite for a positive minimum, negative definite for a negative maximum.
    pub hessian_definite: bool,
    /// Every summand of `z F` has the sign of the kind.
    pub sign_consistent: bool,
    pub e_part: Vec<f64>,
    pub f_part: Vec<f64>,
    pub iterations: usize,
}

impl CriticalPoint {
    /// Word and coordinates of `u^{-1}` in the chart convention of [`crate::mirror`].
    pub fn chart(&self) -> (WeylWord, Vec<C64>) {
        let word = self.word.clone();
        match self.kind {
            CriticalKind::Negative => (word, self.params.iter().map(|&x| C64::new(x, 0.0)).collect()),
            CriticalKind::Positive => (word.reversed(), self.params.iter().rev().map(|&x| C64::new(-x, 0.0)).collect()),
        }
    }

    /// `u` in the defining representation (type A only).
    pub fn u_defining(&self, g: &Group) -> Result<DMatrix<f64>> {
        check_type_a(g)?;
        let n = g.rank() + 1;
        let x = |i: usize, t: f64| {
            let mut m = DMatrix::identity(n, n);
            m[(i, i + 1)] = t;
            m
        };
        let prod = self.word.letters.iter().zip(&self.params).fold(DMatrix::identity(n, n), |acc, (&i, &t)| acc * x(i, t));
        Ok(match self.kind {
            CriticalKind::Positive => prod,
            CriticalKind::Negative => prod.try_inverse().expect("unipotent"),
        })
    }
}

/// Real objective in log coordinates `t = log(params)`, oriented so that the
/// critical point is a minimum of `sign * F`.
struct Objective<'g> {
    chart: Chart<'g>,
    kind: CriticalKind,
}

impl<'g> Objective<'g> {
    fn new(g: &'g Group, word: &WeylWord, h: &[f64], z: f64, kind: CriticalKind) -> Result<Self> {
        let hc: Vec<C64> = h.iter().map(|&x| C64::new(x, 0.0)).collect();
        let chart_word = match kind {
            CriticalKind::Positive => word.reversed(),
            CriticalKind::Negative => word.clone(),
        };
        Ok(Objective { chart: Chart::new(g, &chart_word, &hc, z)?, kind })
    }

    fn sign(&self) -> f64 {
        match self.kind {
            CriticalKind::Positive => 1.0,
            CriticalKind::Negative => -1.0,
        }
    }

    fn chart_coords(&self, p: &[f64]) -> Vec<C64> {
        match self.kind {
            CriticalKind::Negative => p.iter().map(|&x| C64::new(x, 0.0)).collect(),
            CriticalKind::Positive => p.iter().rev().map(|&x| C64::new(-x, 0.0)).collect(),
        }
    }

    /// `F` and its gradient with respect to the parameters.
    fn param_grad(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (v, ga) = self.chart.value_grad(&self.chart_coords(p))?;
        let n = p.len();
        let g = match self.kind {
            CriticalKind::Negative => ga.iter().map(|x| x.re).collect(),
            CriticalKind::Positive => (0..n).map(|j| -ga[n - 1 - j].re).collect(),
        };
        Ok((v.re, g))
    }

    fn value(&self, t: &[f64]) -> Result<f64> {
        let p: Vec<f64> = t.iter().map(|x| x.exp()).collect();
        Ok(self.sign() * self.chart.value(&self.chart_coords(&p))?.re)
    }

    fn log_grad(&self, t: &[f64]) -> Result<DVector<f64>> {
        let p: Vec<f64> = t.iter().map(|x| x.exp()).collect();
        let (_, g) = self.param_grad(&p)?;
        Ok(DVector::from_iterator(t.len(), g.iter().zip(&p).map(|(gi, pi)| self.sign() * gi * pi)))
    }

    fn log_hessian(&self, t: &[f64]) -> Result<DMatrix<f64>> {
        let n = t.len();
        let mut hess = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut tp = t.to_vec();
            let mut tm = t.to_vec();
            tp[k] += HESSIAN_STEP;
            tm[k] -= HESSIAN_STEP;
            let col = (self.log_grad(&tp)? - self.log_grad(&tm)?) / (2.0 * HESSIAN_STEP);
            hess.set_column(k, &col);
        }
        Ok(0.5 * (&hess + hess.transpose()))
    }
}

fn initial_params(g: &Group, word: &WeylWord, h: &[f64]) -> Vec<f64> {
    let hc: Vec<C64> = h.iter().map(|&x| C64::new(x, 0.0)).collect();
    let roots = root_values(g, &hc);
    word.letters.iter().map(|&i| (0.5 * roots[i].re).exp().max(1.0)).collect()
}

fn validate(g: &Group, word: &WeylWord, h: &[f64], z: f64) -> Result<()> {
    word.check_w0(&g.datum, &g.roots)?;
    if h.len() != g.rank() {
        return Err(Error::DimensionMismatch { expected: g.rank(), got: h.len() });
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::OutOfRange("h must be finite".into()));
    }
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::OutOfRange(format!("z must be positive, got {z}")));
    }
    Ok(())
}

fn solve(obj: &Objective, t0: Vec<f64>, opts: &SolverOptions) -> Result<(Vec<f64>, usize)> {
    let n = t0.len();
    let mut t = t0;
    let mut f = obj.value(&t)?;
    let mut radius = 1.0;
    let mut mu = 0.0;
    let grad_norm = |t: &[f64]| -> Result<(f64, f64)> {
        let p: Vec<f64> = t.iter().map(|x| x.exp()).collect();
        let (v, g) = obj.param_grad(&p)?;
        Ok((g.iter().map(|x| x * x).sum::<f64>().sqrt(), v.abs().max(1.0)))
    };
    for it in 0..opts.max_iter {
        let (gn, scale) = grad_norm(&t)?;
        if gn <= opts.tol * scale {
            return Ok((t, it));
        }
        let grad = obj.log_grad(&t)?;
        let hess = obj.log_hessian(&t)?;
        let mut accepted = false;
        for _ in 0..60 {
            let shifted = &hess + DMatrix::identity(n, n) * mu;
            let step = match shifted.clone().cholesky() {
                Some(ch) => -ch.solve(&grad),
                None => {
                    mu = (2.0 * mu).max(1e-3 * hess.amax().max(1.0));
                    continue;
                }
            };
            let len = step.norm();
            let step = if len > radius { step * (radius / len) } else { step };
            let trial: Vec<f64> = t.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            match obj.value(&trial) {
                Ok(ft) if ft <= f + 1e-14 * f.abs().max(1.0) => {
                    let (gt, _) = grad_norm(&trial)?;
                    if ft < f || gt < gn {
                        t = trial;
                        f = ft;
                        mu *= 0.25;
                        if mu < 1e-12 {
                            mu = 0.0;
                        }
                        radius = (2.0 * radius).min(4.0);
                        accepted = true;
                        break;
                    }
                    radius *= 0.5;
                    mu = (4.0 * mu).max(1e-6);
                }
                _ => {
                    radius *= 0.5;
                    mu = (4.0 * mu).max(1e-6);
                }
            }
            if radius < 1e-14 {
                break;
            }
        }
        if !accepted {
            let (gn, scale) = grad_norm(&t)?;
            if gn <= opts.accept * scale {
                return Ok((t, it));
            }
            return Err(Error::NoConvergence { iterations: it, residual: gn });
        }
    }
    let (gn, scale) = grad_norm(&t)?;
    if gn <= opts.accept * scale {
        Ok((t, opts.max_iter))
    } else {
        Err(Error::NoConvergence { iterations: opts.max_iter, residual: gn })
    }
}

fn finish(
    g: &Group,
    obj: &Objective,
    word: &WeylWord,
    h: &[f64],
    z: f64,
    t: Vec<f64>,
    iterations: usize,
) -> Result<CriticalPoint> {
    let params: Vec<f64> = t.iter().map(|x| x.exp()).collect();
    let (value, grad) = obj.param_grad(&params)?;
    let hessian_definite = obj.log_hessian(&t)?.cholesky().is_some();
    let parts = obj.chart.parts(&obj.chart_coords(&params))?;
    let e_part: Vec<f64> = parts.e_part.iter().map(|x| x.re).collect();
    let f_part: Vec<f64> = parts.f_part.iter().map(|x| x.re).collect();
    let s = obj.sign();
    let sign_consistent = e_part.iter().chain(&f_part).all(|x| s * x > 0.0);
    let _ = g;
    Ok(CriticalPoint {
        kind: obj.kind,
        word: word.clone(),
        params,
        h: h.to_vec(),
        z,
        value,
        gradient_norm: grad.iter().map(|x| x * x).sum::<f64>().sqrt(),
        hessian_definite,
        sign_consistent,
        e_part,
        f_part,
        iterations,
    })
}

fn find_critical(g: &Group, h: &[f64], z: f64, word: &WeylWord, kind: CriticalKind, opts: &SolverOptions) -> Result<CriticalPoint> {
    validate(g, word, h, z)?;
    let obj = Objective::new(g, word, h, z, kind)?;
    let t0: Vec<f64> = initial_params(g, word, h).iter().map(|x| x.ln()).collect();
    let (t, iterations) = solve(&obj, t0, opts)?;
    finish(g, &obj, word, h, z, t, iterations)
}

/// Minimum of the superpotential over `u = x_word(c)`, `c > 0`.
pub fn find_positive_critical(g: &Group, h: &[f64], z: f64, word: &WeylWord) -> Result<CriticalPoint> {
    find_critical(g, h, z, word, CriticalKind::Positive, &SolverOptions::default())
}

/// Maximum of the superpotential over the chart `u^{-1} = x_word(a)`, `a > 0`.
pub fn find_negative_critical(g: &Group, h: &[f64], z: f64, word: &WeylWord) -> Result<CriticalPoint> {
    find_critical(g, h, z, word, CriticalKind::Negative, &SolverOptions::default())
}

pub fn find_critical_with(
    g: &Group,
    h: &[f64],
    z: f64,
    word: &WeylWord,
    kind: CriticalKind,
    opts: &SolverOptions,
) -> Result<CriticalPoint> {
    find_critical(g, h, z, word, kind, opts)
}

fn check_type_a(g: &Group) -> Result<()> {
    if g.datum.series != Series::A {
        return Err(Error::Unsupported(format!(
            "the matrix coadjoint model is implemented for type A only, got {}",
            g.cartan_type()
        )));
    }
    Ok(())
}

/// A point of the Kim family in type A.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KimPoint {
    pub q: Vec<f64>,
    /// Diagonal entries of the Cartan component in the defining representation.
    pub hstar: Vec<f64>,
    pub invariants: Vec<f64>,
}

/// `E + diag(hstar) - sum_i q_i E_{i+1,i}` with `E` the sum of the superdiagonal units.
pub fn kim_matrix(q: &[f64], hstar: &[f64]) -> Result<DMatrix<f64>> {
    let n = hstar.len();
    if q.len() + 1 != n {
        return Err(Error::DimensionMismatch { expected: n.saturating_sub(1), got: q.len() });
    }
    let mut l = DMatrix::from_diagonal(&DVector::from_column_slice(hstar));
    for i in 0..q.len() {
        l[(i, i + 1)] = 1.0;
        l[(i + 1, i)] = -q[i];
    }
    Ok(l)
}

/// Elementary symmetric functions `e_1 .. e_n` of the eigenvalues (Faddeev-LeVerrier).
pub fn elementary_invariants(l: &DMatrix<f64>) -> Vec<f64> {
    let n = l.nrows();
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut c = vec![1.0; n + 1];
    for k in 1..=n {
        m = l * &m + DMatrix::identity(n, n) * c[k - 1];
        c[k] = -(l * &m).trace() / k as f64;
    }
    // det(x - L) = sum_k c_k x^{n-k}, c_k = (-1)^k e_k
    (1..=n).map(|k| if k % 2 == 0 { c[k] } else { -c[k] }).collect()
}

/// The constants of motion `Sigma_k = -e_k(L)` for `k = 2 .. rank + 1`.
///
/// For rank one this is `x^2 - q` at `hstar = (x, -x)`.
pub fn kim_invariants(q: &[f64], hstar: &[f64]) -> Result<KimPoint> {
    if let Some(i) = q.iter().position(|&x| x == 0.0) {
        return Err(Error::OutOfRange(format!("q_{} must be non-zero", i + 1)));
    }
    let l = kim_matrix(q, hstar)?;
    let invariants = elementary_invariants(&l).into_iter().skip(1).map(|x| -x).collect();
    Ok(KimPoint { q: q.to_vec(), hstar: hstar.to_vec(), invariants })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PetersonReport {
    /// `u^{-1} F u` in the defining representation, row-major.
    pub matrix: Vec<Vec<f64>>,
    /// Largest entry above the superdiagonal.
    pub upper_defect: f64,
    pub q: Vec<f64>,
    pub q_expected: Vec<f64>,
    pub q_rel_error: f64,
    pub kim: KimPoint,
    pub invariant_max: f64,
    pub tol: f64,
    pub upper_ok: bool,
    pub q_ok: bool,
    pub invariants_ok: bool,
}

impl PetersonReport {
    pub fn passed(&self) -> bool {
        self.upper_ok && self.q_ok && self.invariants_ok
    }
}

/// Forms `X = u^{-1} F u` with `F = sum_i f_i` (the trace-form image of
/// `sum_i e_i^*`) and checks that `X` lies in the Peterson slice with
/// `q_i = -X_{i,i+1} = e^{alpha_i(h)}` and vanishing constants of motion.
pub fn peterson_check(g: &Group, cp: &CriticalPoint, tol: f64) -> Result<PetersonReport> {
    check_type_a(g)?;
    let n = g.rank() + 1;
    let u = cp.u_defining(g)?;
    let u_inv = u.clone().try_inverse().expect("unipotent");
    let mut f = DMatrix::<f64>::zeros(n, n);
    for i in 0..n - 1 {
        f[(i + 1, i)] = 1.0;
    }
    let x = &u_inv * f * &u;
    let mut upper_defect: f64 = 0.0;
    for j in 0..n {
        for k in j + 2..n {
            upper_defect = upper_defect.max(x[(j, k)].abs());
        }
    }
    let q: Vec<f64> = (0..n - 1).map(|i| -x[(i, i + 1)]).collect();
    let hc: Vec<C64> = cp.h.iter().map(|&v| C64::new(v, 0.0)).collect();
    let q_expected: Vec<f64> = root_values(g, &hc).iter().map(|a| a.re.exp()).collect();
    let q_rel_error = q.iter().zip(&q_expected).map(|(a, b)| (a - b).abs() / b.abs()).fold(0.0, f64::max);
    let hstar: Vec<f64> = (0..n).map(|i| x[(i, i)]).collect();
    let kim = if q.iter().all(|&v| v != 0.0) {
        kim_invariants(&q, &hstar)?
    } else {
        KimPoint { q: q.clone(), hstar, invariants: vec![f64::INFINITY; n - 1] }
    };
    // Degree-k invariants scale like q^{k/2}.
    let qs = q_expected.iter().copied().fold(1.0, f64::max);
    let invariant_max =
        kim.invariants.iter().enumerate().map(|(k, v)| v.abs() / qs.powf(0.5 * (k + 2) as f64)).fold(0.0, f64::max);
    let matrix = (0..n).map(|r| (0..n).map(|c| x[(r, c)]).collect()).collect();
    Ok(PetersonReport {
        matrix,
        upper_defect,
        q,
        q_expected,
        q_rel_error,
        upper_ok: upper_defect <= tol,
        q_ok: q_rel_error <= tol,
        invariants_ok: invariant_max <= tol,
        kim,
        invariant_max,
        tol,
    })
}

/// Complex critical points of the superpotential on one chart, found by Newton
/// from random starts and clustered at `1e-6`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalSearch {
    pub word: WeylWord,
    pub starts: usize,
    pub converged: usize,
    /// Chart coordinates of the distinct points, as `(re, im)` pairs.
    pub points: Vec<Vec<(f64, f64)>>,
    pub values: Vec<(f64, f64)>,
}

const CLUSTER_TOL: f64 = 1e-6;

fn complex_newton(chart: &Chart, mut a: Vec<C64>, max_iter: usize) -> Option<Vec<C64>> {
    let n = a.len();
    let step = 1e-6;
    for _ in 0..max_iter {
        let (_, g) = chart.value_grad(&a).ok()?;
        let gn: f64 = g.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let scale = a.iter().map(|x| x.norm()).fold(1.0, f64::max);
        if !gn.is_finite() {
            return None;
        }
        if gn < 1e-12 * scale {
            return Some(a);
        }
        let mut jac = DMatrix::<C64>::zeros(n, n);
        for k in 0..n {
            let h = step * a[k].norm().max(1.0);
            let mut ap = a.clone();
            let mut am = a.clone();
            ap[k] += h;
            am[k] -= h;
            let (_, gp) = chart.value_grad(&ap).ok()?;
            let (_, gm) = chart.value_grad(&am).ok()?;
            for r in 0..n {
                jac[(r, k)] = (gp[r] - gm[r]) / (2.0 * h);
            }
        }
        let delta = jac.lu().solve(&DVector::from_vec(g))?;
        let dn = delta.norm();
        let damp = if dn > 0.5 * scale { 0.5 * scale / dn } else { 1.0 };
        for k in 0..n {
            a[k] -= delta[k] * damp;
            if a[k].norm() < 1e-10 {
                return None;
            }
        }
    }
    None
}

pub fn critical_search(g: &Group, h: &[f64], z: f64, word: &WeylWord, starts: usize, seed: u64) -> Result<CriticalSearch> {
    validate(g, word, h, z)?;
    let hc: Vec<C64> = h.iter().map(|&x| C64::new(x, 0.0)).collect();
    let chart = Chart::new(g, word, &hc, z)?;
    let n = word.length();
    let inits: Vec<Vec<C64>> = {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..starts)
            .map(|_| {
                (0..n)
                    .map(|_| C64::from_polar(rng.gen_range(-1.5f64..1.5).exp(), rng.gen_range(0.0..std::f64::consts::TAU)))
                    .collect()
            })
            .collect()
    };
    let found: Vec<Option<Vec<C64>>> = inits.into_par_iter().map(|a| complex_newton(&chart, a, 100)).collect();
    let converged = found.iter().filter(|x| x.is_some()).count();
    let mut points: Vec<Vec<C64>> = Vec::new();
    for a in found.into_iter().flatten() {
        let dup = points.iter().any(|p| {
            let scale = p.iter().map(|x| x.norm()).fold(1.0, f64::max);
            p.iter().zip(&a).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) < CLUSTER_TOL * scale
        });
        if !dup {
            points.push(a);
        }
    }
    points.sort_by(|p, q| {
        let key = |v: &Vec<C64>| v.iter().map(|x| (x.re, x.im)).collect::<Vec<_>>();
        key(p).partial_cmp(&key(q)).unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = points.iter().map(|p| chart.value(p).map(|v| (v.re, v.im))).collect::<Result<Vec<_>>>()?;
    Ok(CriticalSearch {
        word: word.clone(),
        starts,
        converged,
        points: points.iter().map(|p| p.iter().map(|x| (x.re, x.im)).collect()).collect(),
        values,
    })
}

/// Boundedness of sublevel sets `{z F <= level}` along rays in log coordinates
/// from the positive critical point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SublevelProbe {
    pub level: f64,
    pub rays: usize,
    /// Largest log-distance at which a ray was still inside the sublevel set.
    pub max_extent: f64,
    /// Every ray left the set before `max_radius`.
    pub bounded: bool,
}

pub fn sublevel_probe(
    g: &Group,
    h: &[f64],
    z: f64,
    word: &WeylWord,
    levels: &[f64],
    rays: usize,
    max_radius: f64,
    seed: u64,
) -> Result<Vec<SublevelProbe>> {
    let cp = find_positive_critical(g, h, z, word)?;
    let obj = Objective::new(g, word, h, z, CriticalKind::Positive)?;
    let n = word.length();
    let t0: Vec<f64> = cp.params.iter().map(|x| x.ln()).collect();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for k in 0..n {
        for s in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[k] = s;
            dirs.push(d);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while dirs.len() < rays.max(2 * n) {
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            dirs.push(d.iter().map(|x| x / norm).collect());
        }
    }
    let step = 0.05;
    levels
        .iter()
        .map(|&level| {
            let mut max_extent: f64 = 0.0;
            let mut bounded = true;
            for d in &dirs {
                let mut r = 0.0;
                let mut exited = false;
                while r <= max_radius {
                    let t: Vec<f64> = t0.iter().zip(d).map(|(a, b)| a + r * b).collect();
                    let v = z * obj.value(&t)?;
                    if v > level {
                        exited = true;
                        break;
                    }
                    max_extent = max_extent.max(r);
                    r += step;
                }
                bounded &= exited;
            }
            Ok(SublevelProbe { level, rays: dirs.len(), max_extent, bounded })
        })
        .collect()
}
