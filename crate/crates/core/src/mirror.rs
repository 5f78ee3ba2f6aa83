//! Mirror fibers in reduced-word charts, the superpotential, volume-form
//! transformation laws and the Whittaker functions on the fiber over `h = 0`.
//!
//! Chart convention: the coordinates `a` parameterize `u^{-1} = x_{i_1}(a_1) ... x_{i_N}(a_N)`.
//! The decomposition `e^{-h} x(a) w0 = ybar b` determines `ubar = ybar^{-1}`.
//! With this convention the rank one superpotential reads `-(a + e^{alpha(h)}/a)/z`.

use nalgebra::DMatrix;

use crate::chevgroup::{
    estar, factorize_unipotent, fstar, gauss_minus_plus, lemma_yi, upper_lower, GaussFactors, GroupElement,
};
use crate::reps::Group;
use crate::rootsys::WeylWord;
use crate::{Error, Result, C64};

const CHART_TOL: f64 = 1e-14;
const MINOR_TOL: f64 = 1e-12;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// `alpha_i(h)` for every node, `h` in coroot coordinates.
pub fn root_values(g: &Group, h: &[C64]) -> Vec<C64> {
    (0..g.rank()).map(|i| g.form.root_value(i, h)).collect()
}

/// `rho(h)` for `h` in coroot coordinates.
pub fn rho_value(h: &[C64]) -> C64 {
    h.iter().sum()
}

/// A point of the fiber over `h` in the chart of `word`.
#[derive(Debug, Clone)]
pub struct MirrorPoint {
    pub word: WeylWord,
    pub a: Vec<C64>,
    pub h: Vec<C64>,
    pub z: f64,
    pub gauss: GaussFactors,
}

impl MirrorPoint {
    pub fn new(g: &Group, word: &WeylWord, a: &[C64], h: &[C64], z: f64) -> Result<Self> {
        word.check_w0(&g.datum, &g.roots)?;
        if a.len() != word.length() {
            return Err(Error::DimensionMismatch { expected: word.length(), got: a.len() });
        }
        if h.len() != g.rank() {
            return Err(Error::DimensionMismatch { expected: g.rank(), got: h.len() });
        }
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::OutOfRange(format!("z must be positive, got {z}")));
        }
        if let Some((k, x)) = a.iter().enumerate().find(|(_, x)| x.norm() < CHART_TOL) {
            return Err(Error::OffChart { index: k + 1, magnitude: x.norm() });
        }
        let gauss = gauss_minus_plus(&chart_matrix(g, word, a, h))?;
        Ok(MirrorPoint { word: word.clone(), a: a.to_vec(), h: h.to_vec(), z, gauss })
    }

    /// `u^{-1} = x(a)`.
    pub fn u_inv(&self, g: &Group) -> GroupElement {
        g.x_word(&self.word, &self.a)
    }

    pub fn u(&self, g: &Group) -> GroupElement {
        self.u_inv(g).inverse().expect("unipotent")
    }

    /// `ybar = ubar^{-1}` from the full decomposition.
    pub fn ybar(&self, g: &Group) -> Result<GroupElement> {
        Ok(crate::chevgroup::lower_upper(&chart_matrix(g, &self.word, &self.a, &self.h))?.0)
    }

    /// `g = u e^h ubar^{-1}`.
    pub fn group_point(&self, g: &Group) -> Result<GroupElement> {
        Ok(&(&self.u(g) * &g.torus(&self.h)) * &self.ybar(g)?)
    }

    /// Largest deviation of `g v+` from the lowest weight line, relative to its size.
    pub fn fiber_defect(&self, g: &Group) -> Result<f64> {
        let pt = self.group_point(g)?;
        let mut worst: f64 = 0.0;
        for i in 0..g.rank() {
            let (low, _) = g.lowest(i);
            let col = pt.blocks[i].column(0);
            let off: f64 = col.iter().enumerate().filter(|(k, _)| *k != low).map(|(_, z)| z.norm()).fold(0.0, f64::max);
            worst = worst.max(off / col[low].norm());
        }
        Ok(worst)
    }

    /// The action of `h` on the family: same chart coordinates, base point `h + h'`.
    pub fn translate(&self, g: &Group, h: &[C64]) -> Result<MirrorPoint> {
        let moved: Vec<C64> = self.h.iter().zip(h).map(|(x, y)| x + y).collect();
        MirrorPoint::new(g, &self.word, &self.a, &moved, self.z)
    }
}

/// `e^{-h} x(a) w0`.
pub fn chart_matrix(g: &Group, word: &WeylWord, a: &[C64], h: &[C64]) -> GroupElement {
    let neg: Vec<C64> = h.iter().map(|x| -x).collect();
    &(&g.torus(&neg) * &g.x_word(word, a)) * g.w0_rep()
}

/// Superpotential with its per-node summands.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpotentialValue {
    pub total: C64,
    /// `e_i^*(u)`.
    pub e_part: Vec<C64>,
    /// `f_i^*(ubar)`.
    pub f_part: Vec<C64>,
}

pub fn superpotential(g: &Group, p: &MirrorPoint) -> SuperpotentialValue {
    let mut e_part = vec![zero(); g.rank()];
    for (&l, &x) in p.word.letters.iter().zip(&p.a) {
        e_part[l] -= x;
    }
    let f_part: Vec<C64> = p.gauss.fstar.iter().map(|x| -x).collect();
    let total = (e_part.iter().sum::<C64>() + f_part.iter().sum::<C64>()) / p.z;
    SuperpotentialValue { total, e_part, f_part }
}

/// Fast evaluation of the superpotential on one chart over a fixed `h`.
///
/// `f_i^*(ybar) = e^{alpha_i(h)} w_1 / w_0` with `w = x(a) v-` in `V(omega_i)`.
#[derive(Debug, Clone)]
pub struct Chart<'g> {
    pub group: &'g Group,
    pub word: WeylWord,
    pub h: Vec<C64>,
    pub z: f64,
    root_exp: Vec<C64>,
}

impl<'g> Chart<'g> {
    pub fn new(g: &'g Group, word: &WeylWord, h: &[C64], z: f64) -> Result<Self> {
        word.check_w0(&g.datum, &g.roots)?;
        if h.len() != g.rank() {
            return Err(Error::DimensionMismatch { expected: g.rank(), got: h.len() });
        }
        let root_exp = root_values(g, h).into_iter().map(|x| x.exp()).collect();
        Ok(Chart { group: g, word: word.clone(), h: h.to_vec(), z, root_exp })
    }

    pub fn dim(&self) -> usize {
        self.word.length()
    }

    fn lowest_vector(&self, i: usize) -> Vec<C64> {
        let m = &self.group.modules[i];
        let mut v = vec![zero(); m.dim];
        v[self.group.lowest(i).0] = C64::new(1.0, 0.0);
        v
    }

    fn ratio(&self, i: usize, w: &[C64]) -> Result<C64> {
        let scale = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if w[0].norm() <= MINOR_TOL * scale {
            return Err(Error::OffBigCell { node: i + 1, magnitude: w[0].norm() });
        }
        Ok(w[1] / w[0])
    }

    /// `f_i^*(ybar)` for every node.
    pub fn fstar_bar(&self, a: &[C64]) -> Result<Vec<C64>> {
        (0..self.group.rank())
            .map(|i| {
                let m = &self.group.modules[i];
                let mut w = self.lowest_vector(i);
                for (&l, &t) in self.word.letters.iter().zip(a).rev() {
                    m.apply_x(l, t, &mut w);
                }
                Ok(self.root_exp[i] * self.ratio(i, &w)?)
            })
            .collect()
    }

    pub fn parts(&self, a: &[C64]) -> Result<SuperpotentialValue> {
        let mut e_part = vec![zero(); self.group.rank()];
        for (&l, &x) in self.word.letters.iter().zip(a) {
            e_part[l] -= x;
        }
        let f_part: Vec<C64> = self.fstar_bar(a)?.into_iter().map(|x| -x).collect();
        let total = (e_part.iter().sum::<C64>() + f_part.iter().sum::<C64>()) / self.z;
        Ok(SuperpotentialValue { total, e_part, f_part })
    }

    /// The superpotential at chart coordinates `a`.
    pub fn value(&self, a: &[C64]) -> Result<C64> {
        let f: C64 = self.fstar_bar(a)?.into_iter().sum();
        let e: C64 = a.iter().sum();
        Ok(-(e + f) / self.z)
    }

    /// Value and holomorphic gradient with respect to `a`.
    pub fn value_grad(&self, a: &[C64]) -> Result<(C64, Vec<C64>)> {
        let n = a.len();
        let mut grad = vec![C64::new(-1.0, 0.0); n];
        let mut fsum = zero();
        for i in 0..self.group.rank() {
            let m = &self.group.modules[i];
            // suffix[k] = X_k ... X_N v-
            let mut suffix = vec![self.lowest_vector(i); n + 1];
            for k in (0..n).rev() {
                let mut w = suffix[k + 1].clone();
                m.apply_x(self.word.letters[k], a[k], &mut w);
                suffix[k] = w;
            }
            let w = &suffix[0];
            let rat = self.ratio(i, w)?;
            fsum += self.root_exp[i] * rat;
            // rows 0 and 1 of X_1 ... X_{k-1}
            let mut r0 = vec![zero(); m.dim];
            let mut r1 = vec![zero(); m.dim];
            r0[0] = C64::new(1.0, 0.0);
            r1[1] = C64::new(1.0, 0.0);
            for k in 0..n {
                let ev = m.apply_e(self.word.letters[k], &suffix[k]);
                let d0: C64 = r0.iter().zip(&ev).map(|(x, y)| x * y).sum();
                let d1: C64 = r1.iter().zip(&ev).map(|(x, y)| x * y).sum();
                let drat = (d1 * w[0] - w[1] * d0) / (w[0] * w[0]);
                grad[k] -= self.root_exp[i] * drat;
                m.apply_x_row(self.word.letters[k], a[k], &mut r0);
                m.apply_x_row(self.word.letters[k], a[k], &mut r1);
            }
        }
        let e: C64 = a.iter().sum();
        for gk in grad.iter_mut() {
            *gk /= self.z;
        }
        Ok((-(e + fsum) / self.z, grad))
    }
}

/// Left translations acting on flags `x(a) B-`.
#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    X(usize, C64),
    Y(usize, C64),
    /// `exp(h)`, coroot coordinates.
    Torus(Vec<C64>),
}

impl Transform {
    pub fn element(&self, g: &Group) -> GroupElement {
        match self {
            Transform::X(i, s) => g.x(*i, *s),
            Transform::Y(i, s) => g.y(*i, *s),
            Transform::Torus(h) => g.torus(h),
        }
    }
}

/// Numeric and predicted pullback factors of a volume form under a left translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianCheck {
    pub numeric: C64,
    pub predicted: C64,
}

impl JacobianCheck {
    pub fn relative_error(&self) -> f64 {
        (self.numeric - self.predicted).norm() / self.predicted.norm()
    }
}

/// Chart coordinates of the flag `t x(a) B-`.
pub fn transformed_coordinates(g: &Group, word: &WeylWord, t: &GroupElement, a: &[C64], hint: Option<&[C64]>) -> Result<Vec<C64>> {
    let (u, _) = upper_lower(&(t * &g.x_word(word, a)))?;
    factorize_unipotent(g, &u, word, hint)
}

fn det(m: DMatrix<C64>) -> C64 {
    m.lu().determinant()
}

fn numeric_factor(g: &Group, word: &WeylWord, t: &GroupElement, a: &[C64]) -> Result<(C64, Vec<C64>)> {
    let n = a.len();
    let base = transformed_coordinates(g, word, t, a, Some(a))?;
    let mut jac = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let step = 1e-5 * a[k].norm().max(1e-3);
        let mut plus = a.to_vec();
        let mut minus = a.to_vec();
        plus[k] += step;
        minus[k] -= step;
        let ap = transformed_coordinates(g, word, t, &plus, Some(&base))?;
        let am = transformed_coordinates(g, word, t, &minus, Some(&base))?;
        for r in 0..n {
            jac[(r, k)] = (ap[r] - am[r]) / (2.0 * step);
        }
    }
    let pa: C64 = a.iter().product();
    let pb: C64 = base.iter().product();
    Ok((det(jac) * pa / pb, base))
}

/// Pullback factor of `omega = prod da_j / a_j` under the translation.
pub fn chart_jacobian_ratio(g: &Group, word: &WeylWord, tr: &Transform, a: &[C64]) -> Result<JacobianCheck> {
    let t = tr.element(g);
    let (numeric, _) = numeric_factor(g, word, &t, a)?;
    let u = g.x_word(word, a);
    let predicted = match tr {
        Transform::Torus(_) => C64::new(1.0, 0.0),
        Transform::Y(i, s) => 1.0 / (1.0 + s * estar(&u, *i)?),
        Transform::X(i, s) => {
            let m = &g.modules[*i];
            let mut w = vec![zero(); m.dim];
            w[g.lowest(*i).0] = C64::new(1.0, 0.0);
            for (&l, &x) in word.letters.iter().zip(a).rev() {
                m.apply_x(l, x, &mut w);
            }
            1.0 / (1.0 + s * w[1] / w[0])
        }
    };
    Ok(JacobianCheck { numeric, predicted })
}

/// The weight `<u v-_rho, v+_rho>` of the volume form that is invariant under `U+`.
pub fn gklo_weight(g: &Group, u: &GroupElement) -> C64 {
    g.rho_minor(u)
}

/// Pullback factor of the weighted form `<u v-_rho, v+_rho> omega`.
pub fn gklo_jacobian_ratio(g: &Group, word: &WeylWord, tr: &Transform, a: &[C64]) -> Result<JacobianCheck> {
    let t = tr.element(g);
    let (numeric, base) = numeric_factor(g, word, &t, a)?;
    let w_new = gklo_weight(g, &g.x_word(word, &base));
    let w_old = gklo_weight(g, &g.x_word(word, a));
    let predicted = match tr {
        Transform::Torus(h) => (2.0 * rho_value(h)).exp(),
        _ => C64::new(1.0, 0.0),
    };
    Ok(JacobianCheck { numeric: numeric * w_new / w_old, predicted })
}

/// `psi_+ = exp(sum_i e_i^*(u) / z)` on the fiber over `h = 0`.
pub fn psi_plus(g: &Group, p: &MirrorPoint) -> Result<C64> {
    require_zero_h(p)?;
    let u = p.u(g);
    let s: C64 = (0..g.rank()).map(|i| estar(&u, i)).sum::<Result<C64>>()?;
    Ok((s / p.z).exp())
}

/// `psi_- = exp(sum_i f_i^*(ubar) / z) / <u^{-1} v-_rho, v+_rho>` on the fiber over `h = 0`.
pub fn psi_minus(g: &Group, p: &MirrorPoint) -> Result<C64> {
    require_zero_h(p)?;
    let minor = g.rho_minor(&p.u_inv(g));
    if minor.norm() < MINOR_TOL {
        return Err(Error::Pole(minor.norm()));
    }
    let s: C64 = p.gauss.fstar.iter().map(|x| -x).sum();
    Ok((s / p.z).exp() / minor)
}

fn require_zero_h(p: &MirrorPoint) -> Result<()> {
    if p.h.iter().any(|x| x.norm() > 0.0) {
        return Err(Error::OutOfRange("the Whittaker functions live on the fiber over h = 0".into()));
    }
    Ok(())
}

/// Which Whittaker function and generator to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WhittakerKind {
    /// `psi_+` under `e_i`.
    Plus,
    /// `psi_-` under `f_i`.
    Minus,
}

/// `psi = exp(exponent) / denominator` at the point `exp(-s X) u^{-1}`, with `X = e_i` or `f_i`.
fn psi_moved(g: &Group, p: &MirrorPoint, kind: WhittakerKind, i: usize, s: f64) -> Result<(C64, C64)> {
    let s = C64::new(s, 0.0);
    match kind {
        WhittakerKind::Plus => {
            let u_new = (&g.x(i, -s) * &p.u_inv(g)).inverse().expect("unipotent");
            let e: C64 = (0..g.rank()).map(|k| estar(&u_new, k)).sum::<Result<C64>>()?;
            Ok((e / p.z, C64::new(1.0, 0.0)))
        }
        WhittakerKind::Minus => {
            // y_i(-s) u^{-1} = u_s^{-1} b_s^{-1}
            let (b, us) = lemma_yi(g, &p.u(g), i, s)?;
            let us_inv = us.inverse().expect("unipotent");
            let gf = gauss_minus_plus(&(&us_inv * g.w0_rep()))?;
            let minor = g.rho_minor(&us_inv);
            if minor.norm() < MINOR_TOL {
                return Err(Error::Pole(minor.norm()));
            }
            let chi: C64 = gf.fstar.iter().map(|x| -x).sum();
            let rho_b: C64 = (0..g.rank()).map(|k| b.blocks[k][(0, 0)]).product();
            Ok((chi / p.z, minor * rho_b))
        }
    }
}

/// Relative defect `|X psi - psi / z| / |psi|` of the Whittaker-vector identity.
///
/// The derivative is taken on `log psi` by central differences at `fd_step`
/// and `fd_step / 2`, combined by Richardson extrapolation.
pub fn whittaker_vector_check(g: &Group, kind: WhittakerKind, i: usize, p: &MirrorPoint, fd_step: f64) -> Result<f64> {
    match kind {
        WhittakerKind::Plus => psi_plus(g, p)?,
        WhittakerKind::Minus => psi_minus(g, p)?,
    };
    let log_derivative = |h: f64| -> Result<C64> {
        let (ep, dp) = psi_moved(g, p, kind, i, h)?;
        let (em, dm) = psi_moved(g, p, kind, i, -h)?;
        Ok(((ep - em) - (dp / dm).ln()) / (2.0 * h))
    };
    let d = (4.0 * log_derivative(0.5 * fd_step)? - log_derivative(fd_step)?) / 3.0;
    Ok((d - 1.0 / p.z).norm())
}

/// Extension of `e^F` to the big cell: with `g = u+ t u-`,
/// `W(g) = exp((sum e_i^*(u+) - sum f_i^*(u-)) / z)`.
pub fn trivial_whittaker(g: &Group, elt: &GroupElement, z: f64) -> Result<C64> {
    let (up, bm) = upper_lower(elt)?;
    let um = strip_torus(&bm);
    let mut s = zero();
    for i in 0..g.rank() {
        s += estar(&up, i)? - fstar(&um, i)?;
    }
    Ok((s / z).exp())
}

/// `u-` from `b- = t u-`: each row divided by its diagonal entry.
fn strip_torus(b: &GroupElement) -> GroupElement {
    GroupElement {
        blocks: b
            .blocks
            .iter()
            .map(|m| {
                let n = m.nrows();
                DMatrix::from_fn(n, n, |r, c| m[(r, c)] / m[(r, r)])
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn h_for_alpha(g: &Group, alpha: f64) -> Vec<C64> {
        // A1: alpha(h) = 2 c
        assert_eq!(g.rank(), 1);
        vec![c(alpha / 2.0)]
    }

    #[test]
    fn a1_superpotential_oracle() {
        let g = Group::parse("A1").unwrap();
        for (alpha, a, z) in [(0.0, 1.0, 1.0), (0.7, 1.3, 2.0), (-0.4, 0.6, 0.5)] {
            let h = h_for_alpha(&g, alpha);
            let p = MirrorPoint::new(&g, &g.w0, &[c(a)], &h, z).unwrap();
            let v = superpotential(&g, &p);
            let expect = -(a + alpha.exp() / a) / z;
            assert!((v.total - expect).norm() < 1e-14);
            let chart = Chart::new(&g, &g.w0, &h, z).unwrap();
            assert!((chart.value(&[c(a)]).unwrap() - expect).norm() < 1e-14);
        }
        let p = MirrorPoint::new(&g, &g.w0, &[c(1.0)], &[c(0.0)], 3.0).unwrap();
        assert!((superpotential(&g, &p).total + 2.0 / 3.0).norm() < 1e-15);
    }

    #[test]
    fn off_chart_points_rejected() {
        let g = Group::parse("A2").unwrap();
        let h = vec![c(0.0); 2];
        assert!(matches!(MirrorPoint::new(&g, &g.w0, &[c(0.0), c(1.0), c(1.0)], &h, 1.0), Err(Error::OffChart { index: 1, .. })));
        assert!(MirrorPoint::new(&g, &WeylWord::new(vec![0, 1]), &[c(1.0), c(1.0)], &h, 1.0).is_err());
    }

    fn random_a(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
        (0..n).map(|_| C64::new(rng.gen_range(0.3..1.8), rng.gen_range(-0.5..0.5))).collect()
    }

    #[test]
    fn chart_evaluator_matches_group_path_and_lies_on_fiber() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for t in ["A2", "A3", "B2", "C2", "G2"] {
            let g = Group::parse(t).unwrap();
            let h: Vec<C64> = (0..g.rank()).map(|_| C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.2..0.2))).collect();
            let a = random_a(&mut rng, g.n_pos());
            let p = MirrorPoint::new(&g, &g.w0, &a, &h, 1.3).unwrap();
            let slow = superpotential(&g, &p);
            let chart = Chart::new(&g, &g.w0, &h, 1.3).unwrap();
            let fast = chart.parts(&a).unwrap();
            assert!((slow.total - fast.total).norm() < 1e-11 * (1.0 + slow.total.norm()), "{t}");
            let sum = (slow.e_part.iter().sum::<C64>() + slow.f_part.iter().sum::<C64>()) / 1.3;
            assert!((sum - slow.total).norm() < 1e-14 * (1.0 + sum.norm()));
            assert!(p.fiber_defect(&g).unwrap() < 1e-10, "{t}");
        }
    }

    #[test]
    fn analytic_gradient_matches_complex_step_and_real_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for t in ["A1", "A2", "B2", "G2"] {
            let g = Group::parse(t).unwrap();
            let h: Vec<C64> = (0..g.rank()).map(|_| c(rng.gen_range(-0.5..0.5))).collect();
            let chart = Chart::new(&g, &g.w0, &h, 0.8).unwrap();
            let a = random_a(&mut rng, g.n_pos());
            let (v, grad) = chart.value_grad(&a).unwrap();
            assert!((v - chart.value(&a).unwrap()).norm() < 1e-13 * (1.0 + v.norm()));
            for k in 0..a.len() {
                let eps = 1e-6;
                let shift = |d: C64| {
                    let mut b = a.clone();
                    b[k] += d;
                    chart.value(&b).unwrap()
                };
                let real = (shift(c(eps)) - shift(c(-eps))) / (2.0 * eps);
                let imag = (shift(C64::new(0.0, eps)) - shift(C64::new(0.0, -eps))) / C64::new(0.0, 2.0 * eps);
                assert!((real - imag).norm() < 1e-8 * (1.0 + real.norm()), "{t}: holomorphy");
                assert!((real - grad[k]).norm() < 1e-8 * (1.0 + real.norm()), "{t}: gradient");
            }
        }
    }

    #[test]
    fn braid_invariance_of_superpotential() {
        let g = Group::parse("A2").unwrap();
        let h = vec![c(0.3), c(-0.2)];
        let (a1, a2, a3) = (0.7, 1.4, 0.9);
        let s = a1 + a3;
        let w1 = Chart::new(&g, &WeylWord::new(vec![0, 1, 0]), &h, 1.0).unwrap();
        let w2 = Chart::new(&g, &WeylWord::new(vec![1, 0, 1]), &h, 1.0).unwrap();
        let v1 = w1.value(&[c(a1), c(a2), c(a3)]).unwrap();
        let v2 = w2.value(&[c(a2 * a3 / s), c(s), c(a1 * a2 / s)]).unwrap();
        assert!((v1 - v2).norm() < 1e-10 * v1.norm());
    }

    #[test]
    fn positive_chart_summands_are_nonpositive() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for t in ["A2", "A3", "B2", "C2", "G2"] {
            let g = Group::parse(t).unwrap();
            let h: Vec<C64> = (0..g.rank()).map(|_| c(rng.gen_range(-1.0..1.0))).collect();
            let chart = Chart::new(&g, &g.w0, &h, 1.0).unwrap();
            for _ in 0..10 {
                let a: Vec<C64> = (0..g.n_pos()).map(|_| c(rng.gen_range(-3.0f64..3.0).exp())).collect();
                let v = chart.parts(&a).unwrap();
                for x in v.e_part.iter().chain(&v.f_part) {
                    assert!(x.im.abs() < 1e-12 * (1.0 + x.re.abs()) && x.re <= 0.0, "{t}: {x}");
                }
            }
        }
    }

    #[test]
    fn translation_scales_f_part() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for t in ["A1", "A2", "B2", "G2"] {
            let g = Group::parse(t).unwrap();
            let zero_h = vec![c(0.0); g.rank()];
            let a = random_a(&mut rng, g.n_pos());
            let p0 = MirrorPoint::new(&g, &g.w0, &a, &zero_h, 1.0).unwrap();
            let dh: Vec<C64> = (0..g.rank()).map(|_| c(rng.gen_range(-0.8..0.8))).collect();
            let same = p0.translate(&g, &zero_h).unwrap();
            assert_eq!(same.a, p0.a);
            assert_eq!(superpotential(&g, &same), superpotential(&g, &p0));
            let p1 = p0.translate(&g, &dh).unwrap();
            assert_eq!(p1.a, p0.a);
            let v0 = superpotential(&g, &p0);
            let v1 = superpotential(&g, &p1);
            let q = root_values(&g, &dh);
            for i in 0..g.rank() {
                assert!((v1.f_part[i] - q[i].exp() * v0.f_part[i]).norm() < 1e-12 * (1.0 + v1.f_part[i].norm()), "{t}");
                assert!((v1.e_part[i] - v0.e_part[i]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn jacobian_factors_a2() {
        let g = Group::parse("A2").unwrap();
        let a = vec![c(0.8), c(1.3), c(0.6)];
        for tr in [
            Transform::Y(0, c(0.1)),
            Transform::Y(1, c(-0.2)),
            Transform::X(0, c(0.1)),
            Transform::X(1, c(0.3)),
            Transform::Torus(vec![c(0.2), c(-0.1)]),
        ] {
            let chk = chart_jacobian_ratio(&g, &g.w0, &tr, &a).unwrap();
            assert!(chk.relative_error() < 1e-6, "{tr:?}: {chk:?}");
            let gk = gklo_jacobian_ratio(&g, &g.w0, &tr, &a).unwrap();
            if !matches!(tr, Transform::Y(..)) {
                assert!(gk.relative_error() < 1e-6, "{tr:?}: {gk:?}");
            }
        }
    }

    #[test]
    fn jacobian_factors_g2() {
        // Seed 5 includes a translation whose real factorization path is singular.
        let g = Group::parse("G2").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..6 {
            let a: Vec<C64> = (0..6).map(|_| c(rng.gen_range(0.5..1.5))).collect();
            let i = rng.gen_range(0..2);
            let s = c(rng.gen_range(-0.3..0.3));
            let h: Vec<C64> = (0..2).map(|_| c(rng.gen_range(-0.5..0.5))).collect();
            for tr in [Transform::X(i, s), Transform::Y(i, s), Transform::Torus(h)] {
                let chk = chart_jacobian_ratio(&g, &g.w0, &tr, &a).unwrap();
                assert!(chk.relative_error() < 1e-6, "{tr:?}: {chk:?}");
            }
        }
    }

    #[test]
    fn gklo_weight_examples() {
        let g = Group::parse("A1").unwrap();
        assert_eq!(gklo_weight(&g, &g.identity()), c(0.0));
        assert!((gklo_weight(&g, &g.x(0, c(1.7))) - 1.7).norm() < 1e-15);
    }

    #[test]
    fn psi_a1_closed_forms() {
        let g = Group::parse("A1").unwrap();
        let (a, z) = (1.4, 0.7);
        let p = MirrorPoint::new(&g, &g.w0, &[c(a)], &[c(0.0)], z).unwrap();
        assert!((psi_plus(&g, &p).unwrap() - (-a / z).exp()).norm() < 1e-14);
        assert!((psi_minus(&g, &p).unwrap() - (-1.0 / (a * z)).exp() / a).norm() < 1e-14);
    }

    #[test]
    fn exp_superpotential_factors_through_psi() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for t in ["A1", "A2", "B2", "G2"] {
            let g = Group::parse(t).unwrap();
            let a = random_a(&mut rng, g.n_pos());
            let p = MirrorPoint::new(&g, &g.w0, &a, &vec![c(0.0); g.rank()], 1.1).unwrap();
            let lhs = superpotential(&g, &p).total.exp();
            let rhs = psi_plus(&g, &p).unwrap() * psi_minus(&g, &p).unwrap() * g.rho_minor(&p.u_inv(&g));
            assert!((lhs - rhs).norm() < 1e-12 * lhs.norm(), "{t}");
        }
    }

    #[test]
    fn whittaker_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for t in ["A1", "A2", "B2", "G2"] {
            let g = Group::parse(t).unwrap();
            let a = random_a(&mut rng, g.n_pos());
            for z in [1.0, 2.0] {
                let p = MirrorPoint::new(&g, &g.w0, &a, &vec![c(0.0); g.rank()], z).unwrap();
                for i in 0..g.rank() {
                    let r = whittaker_vector_check(&g, WhittakerKind::Plus, i, &p, 1e-2).unwrap();
                    assert!(r < 1e-8, "{t} plus {i}: {r}");
                    let r = whittaker_vector_check(&g, WhittakerKind::Minus, i, &p, 1e-2).unwrap();
                    assert!(r < 1e-6, "{t} minus {i}: {r}");
                }
            }
        }
    }

    #[test]
    fn trivial_whittaker_matches_superpotential_on_fiber() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for t in ["A1", "A2", "B2"] {
            let g = Group::parse(t).unwrap();
            let a = random_a(&mut rng, g.n_pos());
            let h: Vec<C64> = (0..g.rank()).map(|_| c(rng.gen_range(-0.5..0.5))).collect();
            let p = MirrorPoint::new(&g, &g.w0, &a, &h, 0.9).unwrap();
            let pt = p.group_point(&g).unwrap();
            let w = trivial_whittaker(&g, &pt, 0.9).unwrap();
            let f = superpotential(&g, &p).total.exp();
            assert!((w - f).norm() < 1e-10 * f.norm(), "{t}");
        }
    }
}
