//! Fundamental representations and the matrix model of the group.
//!
//! `V(omega_i)` is built level by level from the highest weight vector: at each
//! level the candidates `F_j b` are compared through the contravariant form
//! (`<F_j u, v> = <u, E_j v>`), a maximal independent subset becomes the new
//! basis and every other candidate is expressed in it. Vectors in the radical
//! of the form are thereby identified with zero, which yields the irreducible
//! quotient. Everything in this step is exact.
//!
//! The basis is ordered by depth below the highest weight, so `F_j` is strictly
//! lower triangular and `E_j` strictly upper triangular. Basis vector 0 is
//! `v+` and basis vector 1 is `F_i v+`.

use std::collections::HashMap;
use std::ops::Mul;

use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde_json::json;

use crate::rootsys::{
    build_cartan, invariant_form_h, positive_roots, rat_f64, rational_det, reduced_word_w0,
    CartanDatum, CartanType, InvariantForm, RootSystem, WeylWord,
};
use crate::{Error, Result, C64};

pub const DEFAULT_DIM_CAP: usize = 64;

type Rat = Rational64;
type Sparse = Vec<(usize, Rat)>;

/// The fundamental representation `V(omega_label)`.
#[derive(Debug, Clone)]
pub struct WeightModule {
    pub label: usize,
    pub dim: usize,
    /// Weights in fundamental-weight coordinates.
    pub weights: Vec<Vec<i64>>,
    /// Number of simple roots subtracted from the highest weight.
    pub depth: Vec<usize>,
    pub e: Vec<DMatrix<Rat>>,
    pub f: Vec<DMatrix<Rat>>,
    /// Diagonal Cartan action `<weight, alpha_i^vee>`.
    pub h: Vec<DMatrix<Rat>>,
    /// Contravariant form on the basis, normalized by `<v+, v+> = 1`.
    pub form: DMatrix<Rat>,
    pub highest_index: usize,
    e_pow: Vec<Vec<DMatrix<f64>>>,
    f_pow: Vec<Vec<DMatrix<f64>>>,
    e_sparse: Vec<Vec<(usize, usize, f64)>>,
}

fn axpy(acc: &mut Sparse, coef: Rat, v: &[(usize, Rat)]) {
    if coef.is_zero() {
        return;
    }
    for &(k, x) in v {
        if let Some(slot) = acc.iter_mut().find(|(j, _)| *j == k) {
            slot.1 += coef * x;
        } else {
            acc.push((k, coef * x));
        }
    }
    acc.retain(|(_, x)| !x.is_zero());
}

fn solve_rational(a: &[Vec<Rat>], b: &[Rat]) -> Vec<Rat> {
    let n = a.len();
    let mut m: Vec<Vec<Rat>> = a.iter().zip(b).map(|(r, &x)| {
        let mut row = r.clone();
        row.push(x);
        row
    }).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero()).expect("nonsingular Gram block");
        m.swap(piv, col);
        let p = m[col][col];
        for c in col..=n {
            m[col][c] /= p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let fac = m[r][col];
                for c in col..=n {
                    let v = m[col][c];
                    m[r][c] -= fac * v;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n]).collect()
}

/// Builds `V(omega_i)` with the default dimension cap.
pub fn build_fundamental(datum: &CartanDatum, i: usize) -> Result<WeightModule> {
    build_fundamental_capped(datum, i, DEFAULT_DIM_CAP)
}

pub fn build_fundamental_capped(datum: &CartanDatum, i: usize, cap: usize) -> Result<WeightModule> {
    let r = datum.rank;
    if i >= r {
        return Err(Error::NodeOutOfRange { node: i + 1, rank: r });
    }
    let alphas: Vec<Vec<i64>> = (0..r).map(|j| datum.simple_root_weight(j)).collect();
    let mut top = vec![0i64; r];
    top[i] = 1;

    let mut weights = vec![top];
    let mut depth = vec![0usize];
    // e_img[l][b]: E_l applied to basis vector b, f_img[j][b] likewise.
    let mut e_img: Vec<Vec<Sparse>> = vec![vec![Vec::new()]; r];
    let mut f_img: Vec<Vec<Sparse>> = vec![vec![Vec::new()]; r];
    // gram[b]: nonzero form values <b, p> (only same-weight p).
    let mut gram: Vec<Sparse> = vec![vec![(0, Rat::one())]];
    let mut level: Vec<usize> = vec![0];
    let mut d = 0;

    while !level.is_empty() {
        d += 1;
        struct Cand {
            parent: usize,
            node: usize,
            e: Vec<Sparse>,
        }
        let mut groups: Vec<(Vec<i64>, Vec<Cand>)> = Vec::new();
        for &b in &level {
            for j in 0..r {
                let w: Vec<i64> = weights[b].iter().zip(&alphas[j]).map(|(x, y)| x - y).collect();
                let mut e = Vec::with_capacity(r);
                for l in 0..r {
                    // E_l F_j b = F_j E_l b + delta_lj <wt b, alpha_j^vee> b
                    let mut acc: Sparse = Vec::new();
                    for &(p, c) in &e_img[l][b] {
                        axpy(&mut acc, c, &f_img[j][p]);
                    }
                    if l == j {
                        axpy(&mut acc, Rat::from(weights[b][j]), &[(b, Rat::one())]);
                    }
                    e.push(acc);
                }
                let cand = Cand { parent: b, node: j, e };
                match groups.iter_mut().find(|(gw, _)| *gw == w) {
                    Some((_, v)) => v.push(cand),
                    None => groups.push((w, vec![cand])),
                }
            }
        }

        let mut next = Vec::new();
        for (w, cands) in groups {
            let m = cands.len();
            // <c_a, c_b> = <parent_a, E_{node_a} c_b>
            let mut g = vec![vec![Rat::zero(); m]; m];
            for (a, ca) in cands.iter().enumerate() {
                for (bidx, cb) in cands.iter().enumerate() {
                    let mut s = Rat::zero();
                    for &(p, x) in &cb.e[ca.node] {
                        if let Some(&(_, gv)) = gram[ca.parent].iter().find(|(q, _)| *q == p) {
                            s += x * gv;
                        }
                    }
                    g[a][bidx] = s;
                }
            }
            let mut sel: Vec<usize> = Vec::new();
            for k in 0..m {
                let mut trial = sel.clone();
                trial.push(k);
                let sub: Vec<Vec<Rat>> =
                    trial.iter().map(|&x| trial.iter().map(|&y| g[x][y]).collect()).collect();
                if !rational_det(&sub).is_zero() {
                    sel = trial;
                }
            }
            let base = weights.len();
            for (slot, &k) in sel.iter().enumerate() {
                let idx = base + slot;
                weights.push(w.clone());
                depth.push(d);
                for l in 0..r {
                    e_img[l].push(cands[k].e[l].clone());
                    f_img[l].push(Vec::new());
                }
                gram.push(
                    sel.iter()
                        .enumerate()
                        .filter(|(_, &y)| !g[k][y].is_zero())
                        .map(|(s2, &y)| (base + s2, g[k][y]))
                        .collect(),
                );
                next.push(idx);
            }
            if weights.len() > cap {
                return Err(Error::DimensionCap { cap });
            }
            let gsel: Vec<Vec<Rat>> =
                sel.iter().map(|&x| sel.iter().map(|&y| g[x][y]).collect()).collect();
            for (n, c) in cands.iter().enumerate() {
                let img: Sparse = if sel.is_empty() {
                    Vec::new()
                } else {
                    let rhs: Vec<Rat> = sel.iter().map(|&x| g[x][n]).collect();
                    solve_rational(&gsel, &rhs)
                        .into_iter()
                        .enumerate()
                        .filter(|(_, x)| !x.is_zero())
                        .map(|(s2, x)| (base + s2, x))
                        .collect()
                };
                f_img[c.node][c.parent] = img;
            }
        }
        level = next;
    }

    let dim = weights.len();
    let mut e = vec![DMatrix::<Rat>::zeros(dim, dim); r];
    let mut f = vec![DMatrix::<Rat>::zeros(dim, dim); r];
    let mut h = vec![DMatrix::<Rat>::zeros(dim, dim); r];
    let mut form = DMatrix::<Rat>::zeros(dim, dim);
    for b in 0..dim {
        for l in 0..r {
            for &(p, x) in &e_img[l][b] {
                e[l][(p, b)] = x;
            }
            for &(p, x) in &f_img[l][b] {
                f[l][(p, b)] = x;
            }
            h[l][(b, b)] = Rat::from(weights[b][l]);
        }
        for &(p, x) in &gram[b] {
            form[(b, p)] = x;
        }
    }
    let to_f64 = |m: &DMatrix<Rat>| m.map(rat_f64);
    let powers = |m: &DMatrix<Rat>| {
        let base = to_f64(m);
        let mut out = vec![DMatrix::identity(dim, dim)];
        let mut cur = DMatrix::identity(dim, dim);
        for k in 1..=dim {
            cur = &cur * &base / k as f64;
            if cur.iter().all(|x| *x == 0.0) {
                break;
            }
            out.push(cur.clone());
        }
        out
    };
    let e_pow = e.iter().map(powers).collect();
    let f_pow = f.iter().map(powers).collect();
    let e_sparse = e
        .iter()
        .map(|m| {
            let mut v = Vec::new();
            for c in 0..dim {
                for row in 0..dim {
                    if !m[(row, c)].is_zero() {
                        v.push((row, c, rat_f64(m[(row, c)])));
                    }
                }
            }
            v
        })
        .collect();
    Ok(WeightModule { label: i, dim, weights, depth, e, f, h, form, highest_index: 0, e_pow, f_pow, e_sparse })
}

impl WeightModule {
    /// `exp(t E_i)` if `raising`, else `exp(t F_i)`.
    pub fn exp_generator(&self, raising: bool, i: usize, t: C64) -> DMatrix<C64> {
        let pows = if raising { &self.e_pow[i] } else { &self.f_pow[i] };
        let mut out = DMatrix::<C64>::zeros(self.dim, self.dim);
        let mut tk = C64::new(1.0, 0.0);
        for p in pows {
            out += p.map(|x| tk * x);
            tk *= t;
        }
        out
    }

    /// Applies `exp(t E_i)` to `v` in place using the sparse generator.
    pub fn apply_x(&self, i: usize, t: C64, v: &mut [C64]) {
        let mut term: Vec<C64> = v.to_vec();
        for k in 1..=self.dim {
            let mut next = vec![C64::new(0.0, 0.0); self.dim];
            let mut any = false;
            for &(row, col, x) in &self.e_sparse[i] {
                if term[col] != C64::new(0.0, 0.0) {
                    next[row] += term[col] * x;
                    any = true;
                }
            }
            if !any {
                break;
            }
            let scale = t / k as f64;
            for (slot, n) in v.iter_mut().zip(next.iter_mut()) {
                *n *= scale;
                *slot += *n;
            }
            term = next;
        }
    }

    /// Replaces the row vector `r` by `r exp(t E_i)`.
    pub fn apply_x_row(&self, i: usize, t: C64, r: &mut [C64]) {
        let mut term: Vec<C64> = r.to_vec();
        for k in 1..=self.dim {
            let mut next = vec![C64::new(0.0, 0.0); self.dim];
            let mut any = false;
            for &(row, col, x) in &self.e_sparse[i] {
                if term[row] != C64::new(0.0, 0.0) {
                    next[col] += term[row] * x;
                    any = true;
                }
            }
            if !any {
                break;
            }
            let scale = t / k as f64;
            for (slot, n) in r.iter_mut().zip(next.iter_mut()) {
                *n *= scale;
                *slot += *n;
            }
            term = next;
        }
    }

    /// Applies `E_i` to `v`.
    pub fn apply_e(&self, i: usize, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for &(row, col, x) in &self.e_sparse[i] {
            out[row] += v[col] * x;
        }
        out
    }

    pub fn e_f64(&self, i: usize) -> DMatrix<f64> {
        self.e[i].map(rat_f64)
    }

    pub fn f_f64(&self, i: usize) -> DMatrix<f64> {
        self.f[i].map(rat_f64)
    }

    /// JSON dump of weights, depths and action matrices (entries as `p/q` strings).
    pub fn to_json(&self) -> serde_json::Value {
        let mat = |m: &DMatrix<Rat>| -> Vec<Vec<String>> {
            (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)].to_string()).collect()).collect()
        };
        json!({
            "label": self.label + 1,
            "dim": self.dim,
            "weights": self.weights,
            "depth": self.depth,
            "E": self.e.iter().map(mat).collect::<Vec<_>>(),
            "F": self.f.iter().map(mat).collect::<Vec<_>>(),
            "form": mat(&self.form),
        })
    }
}

/// A group element stored as its matrix in every fundamental representation.
#[derive(Debug, Clone, PartialEq)]
pub struct RepElement {
    pub blocks: Vec<DMatrix<C64>>,
}

impl RepElement {
    pub fn identity_like(dims: &[usize]) -> Self {
        RepElement { blocks: dims.iter().map(|&d| DMatrix::identity(d, d)).collect() }
    }

    pub fn inverse(&self) -> Option<Self> {
        self.blocks
            .iter()
            .map(|b| b.clone().try_inverse())
            .collect::<Option<Vec<_>>>()
            .map(|blocks| RepElement { blocks })
    }

    /// Largest entrywise difference over all blocks.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().flat_map(|b| b.iter().map(|z| z.norm())).fold(0.0, f64::max)
    }
}

impl Mul for &RepElement {
    type Output = RepElement;

    fn mul(self, rhs: &RepElement) -> RepElement {
        RepElement { blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a * b).collect() }
    }
}

impl Mul for RepElement {
    type Output = RepElement;

    fn mul(self, rhs: RepElement) -> RepElement {
        &self * &rhs
    }
}

/// Which one-parameter subgroup: `x_i` (raising) or `y_i` (lowering).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Coefficient of basis vector `b` in `v`.
pub fn coeff(v: &[C64], b: usize) -> C64 {
    v[b]
}

/// Root datum plus the fundamental representations: the matrix model of `G`.
#[derive(Debug, Clone)]
pub struct Group {
    pub datum: CartanDatum,
    pub roots: RootSystem,
    pub form: InvariantForm,
    pub modules: Vec<WeightModule>,
    /// Pinned reduced word for the longest element.
    pub w0: WeylWord,
    w0_rep: RepElement,
    /// Index and scalar of `w0 v+` in each module.
    lowest: Vec<(usize, C64)>,
}

impl Group {
    pub fn new(ct: CartanType) -> Result<Self> {
        let datum = build_cartan(ct.series, ct.rank)?;
        let roots = positive_roots(&datum);
        let form = invariant_form_h(&datum);
        let modules = (0..datum.rank).map(|i| build_fundamental(&datum, i)).collect::<Result<Vec<_>>>()?;
        let w0 = reduced_word_w0(&datum);
        let mut g = Group {
            datum,
            roots,
            form,
            modules,
            w0: w0.clone(),
            w0_rep: RepElement { blocks: Vec::new() },
            lowest: Vec::new(),
        };
        g.w0_rep = g.weyl_rep(&w0)?;
        g.lowest = (0..g.rank()).map(|i| g.extremal_from(&g.w0_rep, i)).collect();
        Ok(g)
    }

    pub fn parse(s: &str) -> Result<Self> {
        Group::new(s.parse()?)
    }

    pub fn cartan_type(&self) -> CartanType {
        self.datum.cartan_type()
    }

    pub fn rank(&self) -> usize {
        self.datum.rank
    }

    /// Number of positive roots, the complex dimension of the mirror fibers.
    pub fn n_pos(&self) -> usize {
        self.roots.n
    }

    pub fn dims(&self) -> Vec<usize> {
        self.modules.iter().map(|m| m.dim).collect()
    }

    pub fn identity(&self) -> RepElement {
        RepElement::identity_like(&self.dims())
    }

    pub fn one_param(&self, sign: Sign, i: usize, t: C64) -> RepElement {
        let raising = sign == Sign::Plus;
        RepElement { blocks: self.modules.iter().map(|m| m.exp_generator(raising, i, t)).collect() }
    }

    pub fn x(&self, i: usize, t: C64) -> RepElement {
        self.one_param(Sign::Plus, i, t)
    }

    pub fn y(&self, i: usize, t: C64) -> RepElement {
        self.one_param(Sign::Minus, i, t)
    }

    /// `x_{i_1}(a_1) ... x_{i_N}(a_N)`.
    pub fn x_word(&self, word: &WeylWord, a: &[C64]) -> RepElement {
        word.letters.iter().zip(a).fold(self.identity(), |acc, (&i, &t)| &acc * &self.x(i, t))
    }

    pub fn y_word(&self, word: &WeylWord, a: &[C64]) -> RepElement {
        word.letters.iter().zip(a).fold(self.identity(), |acc, (&i, &t)| &acc * &self.y(i, t))
    }

    /// `exp(h)` for `h` in coroot coordinates.
    pub fn torus(&self, h: &[C64]) -> RepElement {
        RepElement {
            blocks: self
                .modules
                .iter()
                .map(|m| {
                    DMatrix::from_diagonal(&DVector::from_iterator(
                        m.dim,
                        m.weights.iter().map(|w| {
                            w.iter().zip(h).map(|(&wj, &cj)| cj * wj as f64).sum::<C64>().exp()
                        }),
                    ))
                })
                .collect(),
        }
    }

    /// `k^{alpha_i^vee}`: scales a weight vector of weight `mu` by `k^{<mu, alpha_i^vee>}`.
    pub fn coroot_power(&self, i: usize, k: C64) -> RepElement {
        RepElement {
            blocks: self
                .modules
                .iter()
                .map(|m| {
                    DMatrix::from_diagonal(&DVector::from_iterator(
                        m.dim,
                        m.weights.iter().map(|w| k.powi(w[i] as i32)),
                    ))
                })
                .collect(),
        }
    }

    /// `x_i(-1) y_i(1) x_i(-1)`.
    pub fn sdot(&self, i: usize) -> RepElement {
        let m1 = C64::new(-1.0, 0.0);
        let p1 = C64::new(1.0, 0.0);
        &(&self.x(i, m1) * &self.y(i, p1)) * &self.x(i, m1)
    }

    /// Product of the `sdot` factors along a reduced word.
    pub fn weyl_rep(&self, word: &WeylWord) -> Result<RepElement> {
        if let Some(&l) = word.letters.iter().find(|&&l| l >= self.rank()) {
            return Err(Error::NodeOutOfRange { node: l + 1, rank: self.rank() });
        }
        if !word.is_reduced(&self.datum, &self.roots) {
            return Err(Error::NotReduced(word.to_string()));
        }
        Ok(word.letters.iter().fold(self.identity(), |acc, &i| &acc * &self.sdot(i)))
    }

    pub fn w0_rep(&self) -> &RepElement {
        &self.w0_rep
    }

    fn extremal_from(&self, w: &RepElement, i: usize) -> (usize, C64) {
        let col = w.blocks[i].column(0);
        let (idx, _) = col
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bv), (k, z)| if z.norm() > bv { (k, z.norm()) } else { (bi, bv) });
        (idx, col[idx])
    }

    /// Basis index and scalar of `w v+` in `V(omega_i)`.
    pub fn extremal(&self, i: usize, word: &WeylWord) -> Result<(usize, C64)> {
        Ok(self.extremal_from(&self.weyl_rep(word)?, i))
    }

    /// Index of the lowest weight vector `v- = w0 v+` and its scalar.
    pub fn lowest(&self, i: usize) -> (usize, C64) {
        self.lowest[i]
    }

    /// `<g w_right v+, w_left v+>` in `V(omega_i)`.
    pub fn minor(&self, g: &RepElement, i: usize, w_left: &WeylWord, w_right: &WeylWord) -> Result<C64> {
        let right = self.weyl_rep(w_right)?;
        let v: DVector<C64> = &g.blocks[i] * right.blocks[i].column(0);
        let (idx, scale) = self.extremal(i, w_left)?;
        Ok(coeff(v.as_slice(), idx) / scale)
    }

    /// `<g v-_{omega_i}, v+_{omega_i}>`.
    pub fn lowest_minor(&self, g: &RepElement, i: usize) -> C64 {
        let (idx, scale) = self.lowest[i];
        g.blocks[i][(0, idx)] * scale
    }

    /// `<g v-_rho, v+_rho>` as the product of the fundamental minors.
    pub fn rho_minor(&self, g: &RepElement) -> C64 {
        (0..self.rank()).map(|i| self.lowest_minor(g, i)).product()
    }

    /// Basis index of each weight in module `i`, for lookup.
    pub fn weight_index(&self, i: usize) -> HashMap<Vec<i64>, Vec<usize>> {
        let mut out: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (k, w) in self.modules[i].weights.iter().enumerate() {
            out.entry(w.clone()).or_default().push(k);
        }
        out
    }
}
