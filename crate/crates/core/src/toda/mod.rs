//! The quantum Toda Hamiltonian `(1/2) Laplacian - (1/z^2) sum_i k_i e^{alpha_i}` as a
//! finite-difference operator on functions of `h`, and residual checks of the
//! integrals against it.
//!
//! With Chevalley generators the quadratic Casimir pairs `e_i` with
//! `<alpha_i, alpha_i>/2 f_i`, so the integrals satisfy the equation with
//! `k_i = <alpha_i, alpha_i>/2` ([`PotentialWeights::RootLength`], the default).
//! In simply laced types this is `k_i = 1`. Otherwise the unit-weight operator
//! ([`PotentialWeights::Unit`]) is the same equation after the translation
//! `alpha_i(h) -> alpha_i(h) + log k_i`.

pub mod bessel;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chevgroup::GroupElement;
use crate::integrate::{decay_scan, s_gamma, Complex, CycleKind, CycleSpec, QuadratureResult};
use crate::mirror::root_values;
use crate::reps::Group;
use crate::{Error, Result, C64};

pub const DEFAULT_FD_STEP: f64 = 1e-2;

/// Second-difference scheme for the Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FdScheme {
    /// Plain central second differences, error `O(step^2)`.
    Central,
    /// `(4 D(step/2) - D(step)) / 3`, error `O(step^4)`.
    Richardson,
}

impl std::str::FromStr for FdScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "central" => Ok(FdScheme::Central),
            "richardson" => Ok(FdScheme::Richardson),
            other => Err(Error::OutOfRange(format!("unknown finite-difference scheme '{other}'"))),
        }
    }
}

/// Coefficients `k_i` of the exponential potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialWeights {
    /// `k_i = 1`.
    Unit,
    /// `k_i = <alpha_i, alpha_i> / 2`.
    RootLength,
}

impl std::str::FromStr for PotentialWeights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unit" => Ok(PotentialWeights::Unit),
            "root-length" => Ok(PotentialWeights::RootLength),
            other => Err(Error::OutOfRange(format!("unknown potential weights '{other}'"))),
        }
    }
}

impl PotentialWeights {
    pub fn values(self, g: &Group) -> Vec<f64> {
        (0..g.rank())
            .map(|i| match self {
                PotentialWeights::Unit => 1.0,
                PotentialWeights::RootLength => 0.5 * crate::rootsys::rat_f64(g.datum.gram_hstar[i][i]),
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct TodaOperator<'g> {
    pub group: &'g Group,
    pub z: f64,
    pub fd_step: f64,
    pub scheme: FdScheme,
    pub weights: PotentialWeights,
    /// Columns: an orthonormal basis of `h_R` written in coroot coordinates.
    pub basis: DMatrix<f64>,
}

/// The pieces of `H S` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianTerms {
    pub s: C64,
    pub laplacian: C64,
    /// `(1/z^2) sum_i e^{alpha_i(h)}`.
    pub potential: f64,
    /// `(1/2) laplacian - potential * s`.
    pub value: C64,
}

impl HamiltonianTerms {
    /// `|H S| / max(|S| / z^2, |potential S|)`.
    pub fn relative(&self, z: f64) -> f64 {
        let scale = (self.s.norm() / (z * z)).max((self.potential * self.s).norm());
        self.value.norm() / scale
    }
}

impl<'g> TodaOperator<'g> {
    pub fn new(group: &'g Group, z: f64, fd_step: f64) -> Result<Self> {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::OutOfRange(format!("z must be positive, got {z}")));
        }
        if !(fd_step > 0.0 && fd_step.is_finite()) {
            return Err(Error::OutOfRange(format!("fd_step must be positive, got {fd_step}")));
        }
        Ok(TodaOperator {
            group,
            z,
            fd_step,
            scheme: FdScheme::Richardson,
            weights: PotentialWeights::RootLength,
            basis: group.form.to_coroot.clone(),
        })
    }

    pub fn with_weights(mut self, weights: PotentialWeights) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_scheme(mut self, scheme: FdScheme) -> Self {
        self.scheme = scheme;
        self
    }

    /// Replaces the orthonormal basis by its image under an orthogonal matrix.
    pub fn rotated(mut self, q: &DMatrix<f64>) -> Self {
        self.basis = &self.basis * q;
        self
    }

    /// `basis^T G basis`, which must be the identity.
    pub fn basis_gram(&self) -> DMatrix<f64> {
        self.basis.transpose() * &self.group.form.gram * &self.basis
    }

    fn shifted(&self, h0: &[f64], k: usize, step: f64) -> Vec<f64> {
        h0.iter().enumerate().map(|(j, x)| x + step * self.basis[(j, k)]).collect()
    }

    /// Applies the Hamiltonian to `s` at `h0` (coroot coordinates).
    pub fn apply<F>(&self, s: F, h0: &[f64]) -> Result<HamiltonianTerms>
    where
        F: Fn(&[f64]) -> Result<C64> + Sync,
    {
        let n = self.group.rank();
        if h0.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: h0.len() });
        }
        let steps: Vec<f64> = match self.scheme {
            FdScheme::Central => vec![self.fd_step],
            FdScheme::Richardson => vec![self.fd_step, 0.5 * self.fd_step],
        };
        let mut points = vec![h0.to_vec()];
        for &st in &steps {
            for k in 0..n {
                points.push(self.shifted(h0, k, st));
                points.push(self.shifted(h0, k, -st));
            }
        }
        let values: Vec<C64> = points.par_iter().map(|p| s(p)).collect::<Result<Vec<_>>>()?;
        let s0 = values[0];
        let second = |which: usize| -> C64 {
            let st = steps[which];
            let base = 1 + which * 2 * n;
            (0..n).map(|k| values[base + 2 * k] - 2.0 * s0 + values[base + 2 * k + 1]).sum::<C64>() / (st * st)
        };
        let laplacian = match self.scheme {
            FdScheme::Central => second(0),
            FdScheme::Richardson => (4.0 * second(1) - second(0)) / 3.0,
        };
        let hc: Vec<C64> = h0.iter().map(|&x| C64::new(x, 0.0)).collect();
        let potential: f64 = root_values(self.group, &hc)
            .iter()
            .zip(self.weights.values(self.group))
            .map(|(a, k)| k * a.re.exp())
            .sum::<f64>()
            / (self.z * self.z);
        Ok(HamiltonianTerms { s: s0, laplacian, potential, value: 0.5 * laplacian - potential * s0 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    #[serde(rename = "type")]
    pub cartan_type: String,
    pub rank: usize,
    pub word: Vec<usize>,
    /// Coroot coordinates.
    pub h: Vec<f64>,
    pub h_orthonormal: Vec<f64>,
    pub z: f64,
    pub cycle: CycleKind,
    pub nodes: usize,
    pub fd_step: f64,
    pub fd_scheme: FdScheme,
    pub potential_weights: PotentialWeights,
    #[serde(rename = "S")]
    pub s: Complex,
    pub laplacian: Complex,
    pub potential: f64,
    pub residual_abs: f64,
    pub residual_rel: f64,
    pub tol: f64,
    pub verdict: String,
    pub quadrature: QuadratureResult,
}

impl ResidualReport {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualOptions {
    pub fd_step: f64,
    pub scheme: FdScheme,
    pub weights: PotentialWeights,
    pub tol: f64,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        ResidualOptions {
            fd_step: DEFAULT_FD_STEP,
            scheme: FdScheme::Richardson,
            weights: PotentialWeights::RootLength,
            tol: 1e-6,
        }
    }
}

/// Computes `S` over the cycle on the finite-difference stencil around `h0` and
/// reports the Toda residual.
pub fn verify(g: &Group, spec: &CycleSpec, h0: &[f64], z: f64, opts: &ResidualOptions) -> Result<ResidualReport> {
    let ResidualOptions { fd_step, scheme, weights, tol } = *opts;
    let op = TodaOperator::new(g, z, fd_step)?.with_scheme(scheme).with_weights(weights);
    let to_c = |h: &[f64]| -> Vec<C64> { h.iter().map(|&x| C64::new(x, 0.0)).collect() };
    let mut spec = spec.clone();
    if spec.kind == CycleKind::Positive && spec.log_window.is_none() {
        // One window for the whole stencil.
        let mut w = decay_scan(g, &spec.word, &to_c(h0), z)?.window;
        for (lo, hi) in w.iter_mut() {
            *lo -= 1.0;
            *hi += 1.0;
        }
        spec.log_window = Some(w);
    }
    let center = s_gamma(g, &spec, &to_c(h0), z)?;
    let terms = op.apply(|h| s_gamma(g, &spec, &to_c(h), z).map(|r| r.s()), h0)?;
    let residual_rel = terms.relative(z);
    Ok(ResidualReport {
        cartan_type: g.cartan_type().to_string(),
        rank: g.rank(),
        word: spec.word.one_based(),
        h: h0.to_vec(),
        h_orthonormal: g.form.orthonormal_from_coroot(h0),
        z,
        cycle: spec.kind,
        nodes: spec.nodes_per_dim,
        fd_step,
        fd_scheme: scheme,
        potential_weights: weights,
        s: terms.s.into(),
        laplacian: terms.laplacian.into(),
        potential: terms.potential,
        residual_abs: terms.value.norm(),
        residual_rel,
        tol,
        verdict: if residual_rel <= tol { "pass" } else { "fail" }.to_string(),
        quadrature: center,
    })
}

/// A generic element of `U+` or `U-`: one pass along the longest word.
fn random_unipotent(g: &Group, rng: &mut ChaCha8Rng, raising: bool) -> GroupElement {
    let t: Vec<C64> = (0..g.n_pos()).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
    if raising {
        g.x_word(&g.w0, &t)
    } else {
        g.y_word(&g.w0, &t)
    }
}

/// Largest relative defect of `f(u+ e^h u-) = e^{chi+(u+)} f(e^h) e^{chi-(u-)}`
/// with `chi+ = sum e_i^* / z` and `chi- = -sum f_i^* / z`, over random unipotent
/// factors and the given `h` values (coroot coordinates).
pub fn whittaker_condition_check<F>(g: &Group, f: F, hs: &[Vec<C64>], samples: usize, z: f64, seed: u64) -> Result<f64>
where
    F: Fn(&GroupElement) -> Result<C64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for h in hs {
        let base = g.torus(h);
        let f0 = f(&base)?;
        for _ in 0..samples {
            let up = random_unipotent(g, &mut rng, true);
            let um = random_unipotent(g, &mut rng, false);
            let mut chi = C64::new(0.0, 0.0);
            for i in 0..g.rank() {
                chi += crate::chevgroup::estar(&up, i)? - crate::chevgroup::fstar(&um, i)?;
            }
            let lhs = f(&(&(&up * &base) * &um))?;
            let rhs = (chi / z).exp() * f0;
            worst = worst.max((lhs - rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::bessel::{bessel_i0, bessel_k0};
    use super::*;
    use crate::mirror::trivial_whittaker;

    fn a1() -> Group {
        Group::parse("A1").unwrap()
    }

    #[test]
    fn basis_is_orthonormal() {
        for t in ["A1", "A2", "B2", "G2"] {
            let g = Group::parse(t).unwrap();
            let op = TodaOperator::new(&g, 1.0, 1e-2).unwrap();
            assert!((op.basis_gram() - DMatrix::identity(g.rank(), g.rank())).abs().max() < 1e-12);
        }
    }

    #[test]
    fn constants_see_only_the_potential() {
        let g = Group::parse("A2").unwrap();
        let op = TodaOperator::new(&g, 2.0, 1e-2).unwrap();
        let h = [0.3, -0.1];
        let t = op.apply(|_| Ok(C64::new(3.0, 0.0)), &h).unwrap();
        let q: f64 = root_values(&g, &[C64::new(0.3, 0.0), C64::new(-0.1, 0.0)]).iter().map(|x| x.re.exp()).sum();
        assert!((t.value - C64::new(-3.0 * q / 4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn bessel_solutions_are_annihilated() {
        let g = a1();
        for z in [1.0, 0.6] {
            let op = TodaOperator::new(&g, z, 1e-2).unwrap();
            // alpha(h) = 2 c for h = c alpha^vee
            let i0 = |h: &[f64]| bessel_i0(2.0 * h[0].exp() / z).map(|v| C64::new(v, 0.0));
            let k0 = |h: &[f64]| bessel_k0(2.0 * h[0].exp() / z).map(|v| C64::new(v, 0.0));
            assert!(op.apply(i0, &[0.2]).unwrap().relative(z) < 1e-8);
            assert!(op.apply(k0, &[0.2]).unwrap().relative(z) < 1e-8);
        }
    }

    #[test]
    fn central_scheme_is_second_order() {
        let g = a1();
        let f = |h: &[f64]| bessel_i0(2.0 * h[0].exp()).map(|v| C64::new(v, 0.0));
        let r1 = TodaOperator::new(&g, 1.0, 1e-2).unwrap().with_scheme(FdScheme::Central).apply(f, &[0.2]).unwrap();
        let r2 = TodaOperator::new(&g, 1.0, 5e-3).unwrap().with_scheme(FdScheme::Central).apply(f, &[0.2]).unwrap();
        let ratio = r1.value.norm() / r2.value.norm();
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn residual_is_basis_independent() {
        let g = Group::parse("A2").unwrap();
        let spec = CycleSpec::torus(&g.w0).with_nodes(16);
        let s = |h: &[f64]| {
            let hc: Vec<C64> = h.iter().map(|&x| C64::new(x, 0.0)).collect();
            s_gamma(&g, &spec, &hc, 1.0).map(|r| r.s())
        };
        let (c, sn) = (0.6f64.cos(), 0.6f64.sin());
        let q = DMatrix::from_row_slice(2, 2, &[c, -sn, sn, c]);
        let h = [0.1, -0.05];
        let a = TodaOperator::new(&g, 1.0, 1e-2).unwrap().apply(s, &h).unwrap();
        let b = TodaOperator::new(&g, 1.0, 1e-2).unwrap().rotated(&q).apply(s, &h).unwrap();
        // The stencils differ, so agreement is up to truncation and quadrature noise.
        assert!((a.laplacian - b.laplacian).norm() / a.s.norm() < 1e-7);
        assert!(a.relative(1.0) < 1e-6 && b.relative(1.0) < 1e-6);
    }

    #[test]
    fn a1_verify_torus() {
        let g = a1();
        let rep = verify(&g, &CycleSpec::torus(&g.w0).with_nodes(64), &[0.2], 1.0, &ResidualOptions::default()).unwrap();
        assert!(rep.passed(), "{rep:?}");
        let oracle = 2.0 * std::f64::consts::PI * bessel_i0(2.0 * 0.2f64.exp()).unwrap();
        assert!((rep.s.im - oracle).abs() < 1e-10 * oracle && rep.s.re.abs() < 1e-10 * oracle);
        let json = serde_json::to_value(&rep).unwrap();
        for key in ["type", "rank", "word", "h", "z", "cycle", "nodes", "fd_step", "S", "residual_abs", "residual_rel", "verdict"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn weights_agree_in_simply_laced_types() {
        for t in ["A1", "A2", "A3"] {
            let g = Group::parse(t).unwrap();
            assert!(PotentialWeights::RootLength.values(&g).iter().all(|&k| k == 1.0));
        }
        let b2 = Group::parse("B2").unwrap();
        assert_eq!(PotentialWeights::RootLength.values(&b2), vec![1.0, 0.5]);
        let g2 = Group::parse("G2").unwrap();
        let k = PotentialWeights::RootLength.values(&g2);
        assert!((k[0] - 1.0 / 3.0).abs() < 1e-15 && k[1] == 1.0);
    }

    #[test]
    fn b2_residual_needs_root_length_weights() {
        let g = Group::parse("B2").unwrap();
        let spec = CycleSpec::torus(&g.w0).with_nodes(24);
        let h = [0.1, -0.05];
        let rl = verify(&g, &spec, &h, 1.0, &ResidualOptions::default()).unwrap();
        assert!(rl.passed(), "{}", rl.residual_rel);
        let unit = ResidualOptions { weights: PotentialWeights::Unit, ..Default::default() };
        let u = verify(&g, &spec, &h, 1.0, &unit).unwrap();
        assert!(u.residual_rel > 1e-2);
    }

    #[test]
    fn whittaker_condition_for_trivial_function() {
        let g = Group::parse("A1").unwrap();
        let z = 0.8;
        let hs = vec![vec![C64::new(0.0, 0.0)], vec![C64::new(0.3, 0.0)], vec![C64::new(-0.4, 0.1)]];
        let w = |e: &GroupElement| trivial_whittaker(&g, e, z);
        assert!(whittaker_condition_check(&g, w, &hs, 20, z, 1).unwrap() < 1e-10);
        assert_eq!(whittaker_condition_check(&g, w, &hs, 0, z, 1).unwrap(), 0.0);
        let constant = |_: &GroupElement| Ok(C64::new(1.0, 0.0));
        assert!(whittaker_condition_check(&g, constant, &hs, 20, z, 1).unwrap() > 1e-3);
    }
}
