//! Group-level algorithms on the matrix model: simple coordinates of unipotent
//! elements, Gaussian decompositions, factorization along reduced words and
//! total positivity.
//!
//! In every fundamental module the basis is ordered by depth, so `U-` is unit
//! lower triangular and `B+` is upper triangular. Gaussian decompositions are
//! therefore blockwise LU factorizations without pivoting.

use nalgebra::{DMatrix, DVector};

use crate::reps::{Group, RepElement};
use crate::rootsys::WeylWord;
use crate::{Error, Result, C64};

pub type GroupElement = RepElement;

const UNIPOTENT_TOL: f64 = 1e-10;
const BIG_CELL_TOL: f64 = 1e-12;

fn check_unipotent(u: &GroupElement, i: usize) -> Result<()> {
    let m = u.blocks[i][(0, 0)];
    if (m - 1.0).norm() > UNIPOTENT_TOL {
        return Err(Error::NotUnipotent { node: i + 1, minor: m.norm() });
    }
    Ok(())
}

/// `e_i^*(u)`: the coefficient of `v+` in `u F_i v+` inside `V(omega_i)`.
pub fn estar(u: &GroupElement, i: usize) -> Result<C64> {
    check_unipotent(u, i)?;
    Ok(u.blocks[i][(0, 1)])
}

/// `f_i^*(u)`: the coefficient of `F_i v+` in `u v+` inside `V(omega_i)`.
pub fn fstar(u: &GroupElement, i: usize) -> Result<C64> {
    check_unipotent(u, i)?;
    Ok(u.blocks[i][(1, 0)])
}

/// Data of the decomposition `M = ybar b` with `ybar` in `U-` and `b` in `B+`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussFactors {
    pub fstar: Vec<C64>,
    pub principal_minors: Vec<C64>,
    pub success: bool,
    /// First node whose principal minor vanishes, if any.
    pub failed_node: Option<usize>,
}

impl GaussFactors {
    /// Computes the factors without failing; inspect `success`.
    pub fn compute(m: &GroupElement) -> Self {
        let rank = m.blocks.len();
        let mut fstar = Vec::with_capacity(rank);
        let mut minors = Vec::with_capacity(rank);
        let mut failed_node = None;
        for (i, blk) in m.blocks.iter().enumerate() {
            let col = blk.column(0);
            let scale = col.norm();
            let minor = col[0];
            minors.push(minor);
            if minor.norm() <= BIG_CELL_TOL * scale || scale == 0.0 {
                failed_node.get_or_insert(i);
                fstar.push(C64::new(f64::NAN, f64::NAN));
            } else {
                fstar.push(col[1] / minor);
            }
        }
        GaussFactors { fstar, principal_minors: minors, success: failed_node.is_none(), failed_node }
    }
}

/// Opposite Gaussian decomposition data of `M`, failing off the big cell `U- B+`.
pub fn gauss_minus_plus(m: &GroupElement) -> Result<GaussFactors> {
    let gf = GaussFactors::compute(m);
    match gf.failed_node {
        None => Ok(gf),
        Some(i) => Err(Error::OffBigCell { node: i + 1, magnitude: gf.principal_minors[i].norm() }),
    }
}

/// Doolittle LU without pivoting of one block.
fn lu_block(a: &DMatrix<C64>, node: usize) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let n = a.nrows();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut l = DMatrix::<C64>::identity(n, n);
    let mut u = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        for j in k..n {
            let mut s = a[(k, j)];
            for p in 0..k {
                s -= l[(k, p)] * u[(p, j)];
            }
            u[(k, j)] = s;
        }
        if u[(k, k)].norm() <= BIG_CELL_TOL * scale.powi(1) {
            return Err(Error::OffBigCell { node: node + 1, magnitude: u[(k, k)].norm() });
        }
        for r in k + 1..n {
            let mut s = a[(r, k)];
            for p in 0..k {
                s -= l[(r, p)] * u[(p, k)];
            }
            l[(r, k)] = s / u[(k, k)];
        }
    }
    Ok((l, u))
}

/// Full decomposition `M = ybar b`, `ybar` in `U-`, `b` in `B+`.
pub fn lower_upper(m: &GroupElement) -> Result<(GroupElement, GroupElement)> {
    let mut ls = Vec::new();
    let mut us = Vec::new();
    for (i, blk) in m.blocks.iter().enumerate() {
        let (l, u) = lu_block(blk, i)?;
        ls.push(l);
        us.push(u);
    }
    Ok((RepElement { blocks: ls }, RepElement { blocks: us }))
}

fn reverse(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |r, c| m[(n - 1 - r, n - 1 - c)])
}

/// Decomposition `M = u b-`, `u` in `U+`, `b-` in `B-`.
pub fn upper_lower(m: &GroupElement) -> Result<(GroupElement, GroupElement)> {
    let mut ups = Vec::new();
    let mut lows = Vec::new();
    for (i, blk) in m.blocks.iter().enumerate() {
        let (l, u) = lu_block(&reverse(blk), i)?;
        ups.push(reverse(&l));
        lows.push(reverse(&u));
    }
    Ok((RepElement { blocks: ups }, RepElement { blocks: lows }))
}

fn nilpotent_log(blk: &DMatrix<C64>) -> DMatrix<C64> {
    let n = blk.nrows();
    let nil = blk - DMatrix::<C64>::identity(n, n);
    let mut out = DMatrix::<C64>::zeros(n, n);
    let mut p = nil.clone();
    for k in 1..=n {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        out += &p * C64::new(sign / k as f64, 0.0);
        p = &p * &nil;
    }
    out
}

fn nilpotent_exp(x: &DMatrix<C64>) -> DMatrix<C64> {
    let n = x.nrows();
    let mut out = DMatrix::<C64>::identity(n, n);
    let mut p = DMatrix::<C64>::identity(n, n);
    for k in 1..=n {
        p = &p * x / C64::new(k as f64, 0.0);
        out += &p;
    }
    out
}

/// Blockwise logarithm of a unipotent element.
pub fn log_unipotent(u: &GroupElement) -> Vec<DMatrix<C64>> {
    u.blocks.iter().map(nilpotent_log).collect()
}

/// Blockwise exponential of nilpotent blocks.
pub fn exp_nilpotent(x: &[DMatrix<C64>]) -> GroupElement {
    RepElement { blocks: x.iter().map(nilpotent_exp).collect() }
}

/// Options for [`factorize_unipotent_with`].
#[derive(Debug, Clone)]
pub struct FactorOptions {
    pub max_iter: usize,
    /// Relative residual at which iteration stops.
    pub tol: f64,
    /// Relative residual accepted once the iteration stalls.
    pub accept: f64,
    pub homotopy_steps: usize,
}

impl Default for FactorOptions {
    fn default() -> Self {
        FactorOptions { max_iter: 200, tol: 1e-13, accept: 1e-9, homotopy_steps: 16 }
    }
}

fn residual(g: &Group, word: &WeylWord, a: &[C64], target: &GroupElement) -> DVector<C64> {
    let x = g.x_word(word, a);
    let mut out = Vec::new();
    for (xb, tb) in x.blocks.iter().zip(&target.blocks) {
        let n = xb.nrows();
        for c in 0..n {
            for r in 0..c {
                out.push(xb[(r, c)] - tb[(r, c)]);
            }
        }
    }
    DVector::from_vec(out)
}

fn jacobian(g: &Group, word: &WeylWord, a: &[C64]) -> DMatrix<C64> {
    let n = a.len();
    let mut cols: Vec<Vec<C64>> = vec![Vec::new(); n];
    for m in &g.modules {
        let d = m.dim;
        let factors: Vec<DMatrix<C64>> =
            word.letters.iter().zip(a).map(|(&i, &t)| m.exp_generator(true, i, t)).collect();
        let mut suffix = vec![DMatrix::<C64>::identity(d, d); n + 1];
        for k in (0..n).rev() {
            suffix[k] = &factors[k] * &suffix[k + 1];
        }
        let mut prefix = DMatrix::<C64>::identity(d, d);
        for k in 0..n {
            let e = m.e_f64(word.letters[k]).map(|v| C64::new(v, 0.0));
            let dk = &prefix * e * &suffix[k];
            for c in 0..d {
                for r in 0..c {
                    cols[k].push(dk[(r, c)]);
                }
            }
            prefix = &prefix * &factors[k];
        }
    }
    let rows = cols[0].len();
    DMatrix::from_fn(rows, n, |r, c| cols[c][r])
}

fn lm_solve(
    g: &Group,
    word: &WeylWord,
    target: &GroupElement,
    seed: Vec<C64>,
    opts: &FactorOptions,
) -> std::result::Result<Vec<C64>, (Vec<C64>, f64)> {
    let scale = target.max_abs().max(1.0);
    let mut a = seed;
    let mut r = residual(g, word, &a, target);
    let mut cost = r.norm();
    let mut lambda = 1e-3;
    for _ in 0..opts.max_iter {
        if cost <= opts.tol * scale {
            return Ok(a);
        }
        let j = jacobian(g, word, &a);
        let jh = j.adjoint();
        let jtj = &jh * &j;
        let grad = &jh * &r;
        let mut improved = false;
        for _ in 0..30 {
            let mut lhs = jtj.clone();
            let damp = lambda * (1.0 + jtj.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max));
            for k in 0..lhs.nrows() {
                lhs[(k, k)] += damp;
            }
            let Some(step) = lhs.lu().solve(&(-&grad)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<C64> = a.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
            let rt = residual(g, word, &trial, target);
            let ct = rt.norm();
            if ct.is_finite() && ct < cost {
                a = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / 5.0).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 8.0;
        }
        if !improved {
            break;
        }
    }
    if cost <= opts.accept * scale {
        Ok(a)
    } else {
        Err((a, cost / scale))
    }
}

const HOMOTOPY_DETOURS: [f64; 7] = [0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0];

/// Follows `x(a0) exp(tau log)` with `tau = t + i detour t (1 - t)` from `t = 0` to 1.
fn continuation(
    g: &Group,
    word: &WeylWord,
    start: &GroupElement,
    log: &[DMatrix<C64>],
    a0: &[C64],
    detour: f64,
    opts: &FactorOptions,
) -> std::result::Result<Vec<C64>, f64> {
    let mut a = a0.to_vec();
    for step in 1..=opts.homotopy_steps {
        let t = step as f64 / opts.homotopy_steps as f64;
        let tau = C64::new(t, detour * t * (1.0 - t));
        let scaled: Vec<DMatrix<C64>> = log.iter().map(|l| l * tau).collect();
        let target = start * &exp_nilpotent(&scaled);
        a = lm_solve(g, word, &target, a, opts).map_err(|(_, res)| res)?;
    }
    Ok(a)
}

/// Coordinates `a` with `x_{i_1}(a_1) ... x_{i_N}(a_N) = u`.
pub fn factorize_unipotent(g: &Group, u: &GroupElement, word: &WeylWord, hint: Option<&[C64]>) -> Result<Vec<C64>> {
    factorize_unipotent_with(g, u, word, hint, &FactorOptions::default())
}

/// As [`factorize_unipotent`] with explicit solver options.
///
/// Levenberg-Marquardt on the strictly upper entries of `x(a) - u`, seeded by
/// `hint` and then by all ones. If both fail, the solve is continued along the
/// path `x(a0) exp(tau log(x(a0)^{-1} u))`, first with real `tau` from 0 to 1
/// and then along complex detours.
pub fn factorize_unipotent_with(
    g: &Group,
    u: &GroupElement,
    word: &WeylWord,
    hint: Option<&[C64]>,
    opts: &FactorOptions,
) -> Result<Vec<C64>> {
    for i in 0..g.rank() {
        check_unipotent(u, i)?;
    }
    if word.letters.iter().any(|&l| l >= g.rank()) {
        return Err(Error::NodeOutOfRange { node: word.letters.iter().max().unwrap() + 1, rank: g.rank() });
    }
    let ones = vec![C64::new(1.0, 0.0); word.length()];
    let mut seeds = Vec::new();
    match hint {
        Some(h) if h.len() == word.length() => seeds.push(h.to_vec()),
        Some(h) => return Err(Error::DimensionMismatch { expected: word.length(), got: h.len() }),
        None => {}
    }
    if seeds.first() != Some(&ones) {
        seeds.push(ones);
    }
    let mut last = f64::INFINITY;
    for a0 in &seeds {
        match lm_solve(g, word, u, a0.clone(), opts) {
            Ok(a) => return finish_factorization(a),
            Err((_, res)) => last = last.min(res),
        }
    }
    for a0 in &seeds {
        let start = g.x_word(word, a0);
        let log = log_unipotent(&(&start.inverse().expect("unipotent") * u));
        // A real path can cross the locus where a coordinate vanishes; complex detours avoid it.
        for detour in HOMOTOPY_DETOURS {
            match continuation(g, word, &start, &log, a0, detour, opts) {
                Ok(a) => return finish_factorization(a),
                Err(res) => last = last.min(res),
            }
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual: last })
}

fn finish_factorization(solved: Vec<C64>) -> Result<Vec<C64>> {
    let scale = solved.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if let Some((idx, z)) = solved.iter().enumerate().find(|(_, z)| z.norm() < 1e-8 * scale) {
        return Err(Error::OffChart { index: idx + 1, magnitude: z.norm() });
    }
    Ok(solved)
}

/// The factorization `u y_i(s) = b_s u_s` with `b_s` in `B-` and `u_s` in `U+`.
pub fn lemma_yi(g: &Group, u: &GroupElement, i: usize, s: C64) -> Result<(GroupElement, GroupElement)> {
    let k = 1.0 + s * estar(u, i)?;
    if k.norm() < 1e-14 {
        return Err(Error::SingularParameter(k.norm()));
    }
    let b = &g.coroot_power(i, k) * &g.y(i, s * k);
    let us = &(&(&g.y(i, -s * k) * &g.coroot_power(i, 1.0 / k)) * u) * &g.y(i, s);
    Ok((b, us))
}

/// Whether `u` factors along `word` with real positive coordinates; also returns the coordinates.
pub fn is_totally_positive(g: &Group, u: &GroupElement, word: &WeylWord) -> Result<(bool, Vec<C64>)> {
    let a = factorize_unipotent(g, u, word, None)?;
    let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let pos = a.iter().all(|z| z.re > 0.0 && z.im.abs() <= 1e-10 * scale);
    Ok((pos, a))
}

/// Whether every block is unit upper triangular up to `tol`.
pub fn is_upper_unipotent(u: &GroupElement, tol: f64) -> bool {
    u.blocks.iter().all(|b| {
        let n = b.nrows();
        (0..n).all(|r| {
            (0..=r).all(|c| {
                let target = if r == c { 1.0 } else { 0.0 };
                (b[(r, c)] - target).norm() <= tol
            })
        })
    })
}
