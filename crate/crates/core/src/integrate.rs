//! Integration cycles and quadrature of `S(h, z) = integral of e^F omega`.
//!
//! * Torus kind: `a_j = r_j e^{i theta_j}`, product trapezoid rule in the angles.
//!   The form contributes `i^N prod d theta_j`.
//! * Positive kind: `a_j = e^{t_j}` with real `t_j` on a truncated window,
//!   product trapezoid rule in `t`. The orientation is that of `dt_1 ... dt_N`.
//!
//! Sums go through [`crate::reduce::map_reduce`], so values do not depend on
//! the number of threads.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;

use crate::mirror::Chart;
use crate::reduce::map_reduce;
use crate::reps::Group;
use crate::rootsys::WeylWord;
use crate::{Error, Result, C64};

/// Largest supported integration dimension.
pub const MAX_DIM: usize = 6;
pub const DEFAULT_TORUS_NODES: usize = 32;
pub const DEFAULT_POSITIVE_NODES: usize = 201;
/// Drop of `F` (in absolute units) at which the positive window is cut.
pub const WINDOW_MARGIN: f64 = 40.0;
const SCAN_STEP: f64 = 0.05;
const SCAN_RANGE: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleKind {
    Torus,
    Positive,
}

impl std::str::FromStr for CycleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "torus" => Ok(CycleKind::Torus),
            "positive" => Ok(CycleKind::Positive),
            other => Err(Error::InvalidCycle(format!("unknown cycle kind '{other}'"))),
        }
    }
}

/// Complex number in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for Complex {
    fn from(z: C64) -> Self {
        Complex { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleSpec {
    pub kind: CycleKind,
    pub word: WeylWord,
    /// Torus radii, one per coordinate.
    pub radii: Vec<f64>,
    pub nodes_per_dim: usize,
    /// Window in `t = log a` per coordinate; chosen by [`decay_scan`] when absent.
    pub log_window: Option<Vec<(f64, f64)>>,
    pub orientation: i8,
    /// Integrate the bare form (`F` replaced by 0).
    pub bare: bool,
}

impl CycleSpec {
    pub fn torus(word: &WeylWord) -> Self {
        CycleSpec {
            kind: CycleKind::Torus,
            word: word.clone(),
            radii: vec![1.0; word.length()],
            nodes_per_dim: DEFAULT_TORUS_NODES,
            log_window: None,
            orientation: 1,
            bare: false,
        }
    }

    pub fn positive(word: &WeylWord) -> Self {
        CycleSpec {
            kind: CycleKind::Positive,
            word: word.clone(),
            radii: vec![1.0; word.length()],
            nodes_per_dim: DEFAULT_POSITIVE_NODES,
            log_window: None,
            orientation: 1,
            bare: false,
        }
    }

    pub fn with_nodes(mut self, n: usize) -> Self {
        self.nodes_per_dim = n;
        self
    }

    pub fn with_radii(mut self, radii: &[f64]) -> Self {
        self.radii = radii.to_vec();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.word.length();
        if n > MAX_DIM {
            return Err(Error::TooManyDimensions(n));
        }
        if self.orientation != 1 && self.orientation != -1 {
            return Err(Error::InvalidCycle(format!("orientation must be +1 or -1, got {}", self.orientation)));
        }
        if self.nodes_per_dim < 2 {
            return Err(Error::InvalidCycle("at least two nodes per dimension are required".into()));
        }
        match self.kind {
            CycleKind::Torus => {
                if self.radii.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: self.radii.len() });
                }
                if self.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
                    return Err(Error::InvalidCycle("radii must be positive and finite".into()));
                }
            }
            CycleKind::Positive => {
                if let Some(w) = &self.log_window {
                    if w.len() != n {
                        return Err(Error::DimensionMismatch { expected: n, got: w.len() });
                    }
                    if w.iter().any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
                        return Err(Error::InvalidCycle("log window must be finite with lo < hi".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: Complex,
    pub node_count: usize,
    pub nodes_per_dim: usize,
    /// Relative change against the rule on every other node, when that rule exists.
    pub refinement_delta: Option<f64>,
    pub failures: usize,
    pub log_window: Option<Vec<(f64, f64)>>,
}

impl QuadratureResult {
    pub fn s(&self) -> C64 {
        C64::new(self.value.re, self.value.im)
    }
}

#[derive(Clone, Copy)]
struct Acc {
    full: C64,
    sub: C64,
    failures: usize,
    first_failure: usize,
}

fn combine(x: Acc, y: Acc) -> Acc {
    Acc {
        full: x.full + y.full,
        sub: x.sub + y.sub,
        failures: x.failures + y.failures,
        first_failure: x.first_failure.min(y.first_failure),
    }
}

fn digits(mut k: usize, n: usize, dim: usize, out: &mut [usize]) {
    for d in out.iter_mut().take(dim) {
        *d = k % n;
        k /= n;
    }
}

/// Node coordinates `a` and the quadrature-coordinate vector for flat index `k`.
fn node(spec: &CycleSpec, window: &[(f64, f64)], k: usize, idx: &mut [usize]) -> (Vec<C64>, Vec<f64>) {
    let n = spec.nodes_per_dim;
    let dim = spec.word.length();
    digits(k, n, dim, idx);
    match spec.kind {
        CycleKind::Torus => {
            let th: Vec<f64> = idx.iter().map(|&d| 2.0 * PI * d as f64 / n as f64).collect();
            let a = th.iter().zip(&spec.radii).map(|(&t, &r)| C64::from_polar(r, t)).collect();
            (a, th)
        }
        CycleKind::Positive => {
            let ts: Vec<f64> = idx
                .iter()
                .zip(window)
                .map(|(&d, &(lo, hi))| lo + (hi - lo) * d as f64 / (n - 1) as f64)
                .collect();
            let a = ts.iter().map(|&t| C64::new(t.exp(), 0.0)).collect();
            (a, ts)
        }
    }
}

fn total_nodes(spec: &CycleSpec) -> Result<usize> {
    let dim = spec.word.length() as u32;
    spec.nodes_per_dim
        .checked_pow(dim)
        .filter(|&t| t <= 1usize << 34)
        .ok_or_else(|| Error::InvalidCycle(format!("{}^{} nodes is too many", spec.nodes_per_dim, dim)))
}

fn require_real(h: &[C64]) -> Result<()> {
    if h.iter().any(|x| x.im != 0.0) {
        return Err(Error::InvalidCycle("the positive cycle needs a real h".into()));
    }
    Ok(())
}

/// `S_Gamma(h, z)` by product quadrature; `h` in coroot coordinates.
pub fn s_gamma(g: &Group, spec: &CycleSpec, h: &[C64], z: f64) -> Result<QuadratureResult> {
    spec.validate()?;
    let chart = Chart::new(g, &spec.word, h, z)?;
    let dim = spec.word.length();
    let window: Vec<(f64, f64)> = match spec.kind {
        CycleKind::Torus => Vec::new(),
        CycleKind::Positive => {
            require_real(h)?;
            match &spec.log_window {
                Some(w) => w.clone(),
                None => decay_scan(g, &spec.word, h, z)?.window,
            }
        }
    };
    let total = total_nodes(spec)?;
    let n = spec.nodes_per_dim;
    let zero = C64::new(0.0, 0.0);
    let acc = map_reduce(
        total,
        |k| {
            let mut idx = vec![0usize; dim];
            let (a, _) = node(spec, &window, k, &mut idx);
            let on_sub = idx.iter().all(|d| d % 2 == 0);
            let v = if spec.bare {
                Ok(C64::new(1.0, 0.0))
            } else {
                chart.value(&a).map(|f| f.exp())
            };
            match v {
                Ok(v) if v.is_finite() => Acc { full: v, sub: if on_sub { v } else { zero }, failures: 0, first_failure: usize::MAX },
                _ => Acc { full: zero, sub: zero, failures: 1, first_failure: k },
            }
        },
        combine,
        Acc { full: zero, sub: zero, failures: 0, first_failure: usize::MAX },
    );
    if acc.failures > 0 {
        let mut idx = vec![0usize; dim];
        let (_, coords) = node(spec, &window, acc.first_failure, &mut idx);
        return Err(Error::QuadratureFailure { failures: acc.failures, first: coords });
    }
    let sign = spec.orientation as f64;
    let (value, sub, refinable) = match spec.kind {
        CycleKind::Torus => {
            let pre = C64::new(0.0, 1.0).powi(dim as i32) * sign;
            let w = (2.0 * PI / n as f64).powi(dim as i32);
            let w_sub = (4.0 * PI / n as f64).powi(dim as i32);
            (pre * w * acc.full, pre * w_sub * acc.sub, n % 2 == 0)
        }
        CycleKind::Positive => {
            let w: f64 = window.iter().map(|(lo, hi)| (hi - lo) / (n - 1) as f64).product();
            let w_sub = w * 2f64.powi(dim as i32);
            (sign * w * acc.full, sign * w_sub * acc.sub, n % 2 == 1)
        }
    };
    let refinement_delta = refinable.then(|| (value - sub).norm() / value.norm().max(f64::MIN_POSITIVE));
    Ok(QuadratureResult {
        value: value.into(),
        node_count: total,
        nodes_per_dim: n,
        refinement_delta,
        failures: 0,
        log_window: (spec.kind == CycleKind::Positive).then_some(window),
    })
}

/// Ray scan along one coordinate direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayScan {
    pub coordinate: usize,
    /// `-1` towards `a -> 0`, `+1` towards `a -> infinity`.
    pub direction: i8,
    /// Offset in `t = log a` where `F` has dropped by the margin; `None` if never.
    pub knee: Option<f64>,
    /// Whether `F` kept decreasing from the knee to the end of the ray.
    pub monotone_beyond_knee: bool,
    /// Largest value of any single summand (`e_part` or `f_part`, real part) seen on the ray.
    pub max_summand: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub center: Vec<f64>,
    pub center_value: f64,
    pub rays: Vec<RayScan>,
    pub window: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

impl DecayReport {
    pub fn all_diverge(&self) -> bool {
        self.rays.iter().all(|r| r.knee.is_some() && r.monotone_beyond_knee)
    }
}

/// Highest point of `F` on the positive chart, by coordinate ascent in `log a`.
fn positive_peak(chart: &Chart, dim: usize) -> Vec<f64> {
    let f = |t: &[f64]| -> f64 {
        let a: Vec<C64> = t.iter().map(|x| C64::new(x.exp(), 0.0)).collect();
        chart.value(&a).map(|v| v.re).unwrap_or(f64::NEG_INFINITY)
    };
    let mut t = vec![0.0; dim];
    let mut step = 1.0;
    let mut best = f(&t);
    while step > 1e-6 {
        let mut moved = false;
        for j in 0..dim {
            for dir in [1.0, -1.0] {
                let mut trial = t.clone();
                trial[j] += dir * step;
                let v = f(&trial);
                if v > best {
                    best = v;
                    t = trial;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    t
}

/// Scans the superpotential along coordinate rays of the positive chart and
/// picks the quadrature window.
pub fn decay_scan(g: &Group, word: &WeylWord, h: &[C64], z: f64) -> Result<DecayReport> {
    require_real(h)?;
    let chart = Chart::new(g, word, h, z)?;
    let dim = word.length();
    let center = positive_peak(&chart, dim);
    let eval = |t: &[f64]| -> Result<(f64, f64)> {
        let a: Vec<C64> = t.iter().map(|x| C64::new(x.exp(), 0.0)).collect();
        let parts = chart.parts(&a)?;
        let max_summand = parts.e_part.iter().chain(&parts.f_part).map(|x| x.re).fold(f64::NEG_INFINITY, f64::max);
        Ok((parts.total.re, max_summand))
    };
    let (center_value, _) = eval(&center)?;
    let mut rays = Vec::new();
    let mut window = Vec::new();
    let mut warnings = Vec::new();
    for j in 0..dim {
        let mut ends = [0.0f64; 2];
        for (slot, dir) in [(0usize, -1i8), (1, 1)] {
            let mut knee = None;
            let mut monotone = true;
            let mut prev = center_value;
            let mut max_summand = f64::NEG_INFINITY;
            let steps = (SCAN_RANGE / SCAN_STEP) as usize;
            for s in 1..=steps {
                let off = s as f64 * SCAN_STEP;
                let mut t = center.clone();
                t[j] += dir as f64 * off;
                let (v, ms) = match eval(&t) {
                    Ok(x) => x,
                    Err(_) => break,
                };
                max_summand = max_summand.max(ms);
                if knee.is_some() && v > prev + 1e-12 * prev.abs() {
                    monotone = false;
                }
                if knee.is_none() && v <= center_value - WINDOW_MARGIN {
                    knee = Some(off);
                    // keep scanning a little to confirm monotone decay
                }
                if let Some(k) = knee {
                    if off >= k + 2.0 {
                        break;
                    }
                }
                prev = v;
            }
            if knee.is_none() {
                warnings.push(format!(
                    "coordinate {} direction {}: no decay by {} within |log a| <= {}",
                    j + 1,
                    dir,
                    WINDOW_MARGIN,
                    SCAN_RANGE
                ));
            }
            ends[slot] = knee.unwrap_or(SCAN_RANGE);
            rays.push(RayScan { coordinate: j, direction: dir, knee, monotone_beyond_knee: monotone, max_summand });
        }
        // Rays through the peak can underestimate a tilted region; widen by a quarter.
        window.push((center[j] - 1.25 * ends[0], center[j] + 1.25 * ends[1]));
    }
    Ok(DecayReport { center, center_value, rays, window, warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BraidComparison {
    pub word1: WeylWord,
    pub word2: WeylWord,
    pub s1: Complex,
    pub s2: Complex,
    /// Combined sign of form and cycle under the braid moves; always `+1` for the torus cycle.
    pub predicted_sign: i8,
    pub relative_difference: f64,
}

/// Compares `S` over the torus cycles of two reduced words.
pub fn braid_compare(g: &Group, h: &[C64], z: f64, w1: &WeylWord, w2: &WeylWord, nodes: usize) -> Result<BraidComparison> {
    w1.check_w0(&g.datum, &g.roots)?;
    w2.check_w0(&g.datum, &g.roots)?;
    let s1 = s_gamma(g, &CycleSpec::torus(w1).with_nodes(nodes), h, z)?.s();
    let s2 = s_gamma(g, &CycleSpec::torus(w2).with_nodes(nodes), h, z)?.s();
    let predicted_sign = 1i8;
    let rel = (s1 - predicted_sign as f64 * s2).norm() / s1.norm();
    Ok(BraidComparison {
        word1: w1.clone(),
        word2: w2.clone(),
        s1: s1.into(),
        s2: s2.into(),
        predicted_sign,
        relative_difference: rel,
    })
}

/// Writes integrand samples (quadrature coordinates, `F`, `e^F`) as CSV, at most `limit` rows.
pub fn write_samples_csv(path: &Path, g: &Group, spec: &CycleSpec, h: &[C64], z: f64, limit: usize) -> Result<usize> {
    spec.validate()?;
    let chart = Chart::new(g, &spec.word, h, z)?;
    let dim = spec.word.length();
    let window = match (&spec.kind, &spec.log_window) {
        (CycleKind::Torus, _) => Vec::new(),
        (CycleKind::Positive, Some(w)) => w.clone(),
        (CycleKind::Positive, None) => decay_scan(g, &spec.word, h, z)?.window,
    };
    let total = total_nodes(spec)?.min(limit);
    let mut wtr = csv::Writer::from_path(path)?;
    let label = if spec.kind == CycleKind::Torus { "theta" } else { "t" };
    let mut header: Vec<String> = (1..=dim).map(|j| format!("{label}{j}")).collect();
    header.extend(["F_re", "F_im", "expF_re", "expF_im"].map(String::from));
    wtr.write_record(&header)?;
    let mut idx = vec![0usize; dim];
    for k in 0..total {
        let (a, coords) = node(spec, &window, k, &mut idx);
        let f = chart.value(&a)?;
        let e = f.exp();
        let mut row: Vec<String> = coords.iter().map(|x| format!("{x:.17e}")).collect();
        row.extend([f.re, f.im, e.re, e.im].map(|x| format!("{x:.17e}")));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toda::bessel::{bessel_i0, bessel_k0};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn a1_torus_matches_bessel_i0() {
        let g = Group::parse("A1").unwrap();
        for alpha in [-1.0, 0.0, 0.5, 1.0] {
            for z in [1.0, 0.7] {
                let r = s_gamma(&g, &CycleSpec::torus(&g.w0).with_nodes(64), &[c(alpha / 2.0)], z).unwrap();
                let expect = C64::new(0.0, 2.0 * PI) * bessel_i0(2.0 * (alpha / 2.0f64).exp() / z).unwrap();
                assert!((r.s() - expect).norm() < 1e-12 * expect.norm(), "{alpha} {z}: {:?}", r.value);
            }
        }
    }

    #[test]
    fn a1_positive_matches_bessel_k0() {
        let g = Group::parse("A1").unwrap();
        for alpha in [-0.6, 0.0, 0.8] {
            let r = s_gamma(&g, &CycleSpec::positive(&g.w0), &[c(alpha / 2.0)], 1.0).unwrap();
            let expect = 2.0 * bessel_k0(2.0 * (alpha / 2.0f64).exp()).unwrap();
            assert!((r.s() - expect).norm() < 1e-10 * expect, "{alpha}: {:?} vs {expect}", r.value);
            assert!(r.refinement_delta.unwrap() < 1e-8);
        }
    }

    #[test]
    fn radius_invariance_a1() {
        let g = Group::parse("A1").unwrap();
        let h = [c(0.2)];
        let s1 = s_gamma(&g, &CycleSpec::torus(&g.w0).with_nodes(64), &h, 1.0).unwrap().s();
        let s2 = s_gamma(&g, &CycleSpec::torus(&g.w0).with_nodes(64).with_radii(&[0.5]), &h, 1.0).unwrap().s();
        assert!((s1 - s2).norm() < 1e-10 * s1.norm());
    }

    #[test]
    fn bare_form_gives_powers_of_two_pi_i() {
        for t in ["A1", "A2"] {
            let g = Group::parse(t).unwrap();
            let mut spec = CycleSpec::torus(&g.w0).with_nodes(4);
            spec.bare = true;
            let v = s_gamma(&g, &spec, &vec![c(0.0); g.rank()], 1.0).unwrap().s();
            let expect = C64::new(0.0, 2.0 * PI).powi(g.n_pos() as i32);
            assert!((v - expect).norm() < 1e-12 * expect.norm());
        }
    }

    #[test]
    fn torus_refinement_shrinks() {
        let g = Group::parse("A2").unwrap();
        let h = [c(0.2), c(-0.3)];
        let mut prev = f64::INFINITY;
        for n in [4, 8, 16] {
            let d = s_gamma(&g, &CycleSpec::torus(&g.w0).with_nodes(n), &h, 1.0).unwrap().refinement_delta.unwrap();
            assert!(d < prev / 10.0 || d < 1e-13, "{n}: {d}");
            prev = d;
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let g = Group::parse("A2").unwrap();
        let h = [c(0.0), c(0.0)];
        let bad = CycleSpec::torus(&g.w0).with_radii(&[1.0, -1.0, 1.0]);
        assert!(matches!(s_gamma(&g, &bad, &h, 1.0), Err(Error::InvalidCycle(_))));
        let mut bad = CycleSpec::torus(&g.w0);
        bad.orientation = 0;
        assert!(s_gamma(&g, &bad, &h, 1.0).is_err());
        let pos = CycleSpec::positive(&g.w0);
        assert!(s_gamma(&g, &pos, &[C64::new(0.0, 0.1), c(0.0)], 1.0).is_err());
    }

    #[test]
    fn decay_scan_a1_and_a2() {
        let g = Group::parse("A1").unwrap();
        let rep = decay_scan(&g, &g.w0, &[c(0.25)], 1.0).unwrap();
        assert!(rep.all_diverge());
        assert!((rep.center[0] - 0.25).abs() < 1e-5);
        let g = Group::parse("A2").unwrap();
        let rep = decay_scan(&g, &g.w0, &[c(0.0), c(0.0)], 1.0).unwrap();
        assert_eq!(rep.rays.len(), 6);
        assert!(rep.all_diverge(), "{rep:?}");
        assert!(rep.rays.iter().all(|r| r.max_summand <= 0.0));
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let g = Group::parse("A1").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let n = write_samples_csv(&path, &g, &CycleSpec::torus(&g.w0).with_nodes(8), &[c(0.0)], 1.0, 100).unwrap();
        assert_eq!(n, 8);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("theta1,F_re,F_im,expF_re,expF_im"));
        assert_eq!(text.lines().count(), 9);
    }
}
