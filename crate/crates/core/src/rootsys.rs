//! Cartan data, root systems and Weyl group combinatorics.
//!
//! All structure data is exact (integers and rationals). Nodes are 0-based
//! internally; [`WeylWord`] displays them 1-based.
//!
//! Labeling convention for rank two: in `B2` node 1 is long and node 2 is
//! short, in `C2` node 1 is short and node 2 is long, in `G2` node 1 is short.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Series {
    A,
    B,
    C,
    G,
}

impl Series {
    pub fn letter(self) -> char {
        match self {
            Series::A => 'A',
            Series::B => 'B',
            Series::C => 'C',
            Series::G => 'G',
        }
    }
}

/// A Cartan type such as `A2` or `G2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CartanType {
    pub series: Series,
    pub rank: usize,
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.series.letter(), self.rank)
    }
}

impl FromStr for CartanType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut chars = s.chars();
        let letter = chars.next().unwrap_or(' ').to_ascii_uppercase();
        let rank: usize = chars.as_str().parse().map_err(|_| Error::UnsupportedType {
            series: letter,
            rank: 0,
        })?;
        let series = match letter {
            'A' => Series::A,
            'B' => Series::B,
            'C' => Series::C,
            'G' => Series::G,
            other => return Err(Error::UnsupportedType { series: other, rank }),
        };
        Ok(CartanType { series, rank })
    }
}

/// Cartan matrix, symmetrizers and the normalized invariant form on simple roots.
///
/// `cartan[i][j] = <alpha_i^vee, alpha_j> = 2 (alpha_i, alpha_j) / (alpha_i, alpha_i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CartanDatum {
    pub series: Series,
    pub rank: usize,
    pub cartan: Vec<Vec<i64>>,
    pub d: Vec<i64>,
    pub gram_hstar: Vec<Vec<Rational64>>,
}

fn q(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// Builds the Cartan datum for a supported type.
///
/// Supported: `A1..A4`, `B2..B4`, `C2..C4`, `G2`.
pub fn build_cartan(series: Series, rank: usize) -> Result<CartanDatum> {
    let supported = match series {
        Series::A => (1..=4).contains(&rank),
        Series::B | Series::C => (2..=4).contains(&rank),
        Series::G => rank == 2,
    };
    if !supported {
        return Err(Error::UnsupportedType { series: series.letter(), rank });
    }
    let n = rank;
    let mut gram = vec![vec![Rational64::zero(); n]; n];
    match series {
        Series::A => {
            for i in 0..n {
                gram[i][i] = q(2, 1);
                if i + 1 < n {
                    gram[i][i + 1] = q(-1, 1);
                    gram[i + 1][i] = q(-1, 1);
                }
            }
        }
        Series::B => {
            for i in 0..n {
                gram[i][i] = if i + 1 == n { q(1, 1) } else { q(2, 1) };
                if i + 1 < n {
                    gram[i][i + 1] = q(-1, 1);
                    gram[i + 1][i] = q(-1, 1);
                }
            }
        }
        Series::C => {
            for i in 0..n {
                gram[i][i] = if i + 1 == n { q(2, 1) } else { q(1, 1) };
                if i + 1 < n {
                    let v = if i + 2 == n { q(-1, 1) } else { q(-1, 2) };
                    gram[i][i + 1] = v;
                    gram[i + 1][i] = v;
                }
            }
        }
        Series::G => {
            gram[0][0] = q(2, 3);
            gram[1][1] = q(2, 1);
            gram[0][1] = q(-1, 1);
            gram[1][0] = q(-1, 1);
        }
    }
    let mut cartan = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let v = q(2, 1) * gram[i][j] / gram[i][i];
            debug_assert!(v.is_integer());
            cartan[i][j] = v.to_integer();
        }
    }
    let min_norm = gram.iter().enumerate().map(|(i, r)| r[i]).min().unwrap();
    let d = (0..n)
        .map(|i| {
            let r = gram[i][i] / min_norm;
            debug_assert!(r.is_integer());
            r.to_integer()
        })
        .collect();
    let datum = CartanDatum { series, rank, cartan, d, gram_hstar: gram };
    datum.validate()?;
    Ok(datum)
}

impl CartanDatum {
    pub fn cartan_type(&self) -> CartanType {
        CartanType { series: self.series, rank: self.rank }
    }

    fn validate(&self) -> Result<()> {
        let n = self.rank;
        let bad = || Error::Unsupported(format!("invalid Cartan datum for {}", self.cartan_type()));
        for i in 0..n {
            if self.cartan[i][i] != 2 {
                return Err(bad());
            }
            for j in 0..n {
                if i != j && self.cartan[i][j] > 0 {
                    return Err(bad());
                }
                if self.d[i] * self.cartan[i][j] != self.d[j] * self.cartan[j][i] {
                    return Err(bad());
                }
                if self.gram_hstar[i][j] != self.gram_hstar[j][i] {
                    return Err(bad());
                }
            }
        }
        // Sylvester: all leading principal minors positive.
        for k in 1..=n {
            let m: Vec<Vec<Rational64>> =
                (0..k).map(|i| self.gram_hstar[i][..k].to_vec()).collect();
            if rational_det(&m) <= Rational64::zero() {
                return Err(bad());
            }
        }
        Ok(())
    }

    /// Simple root `alpha_j` in fundamental-weight coordinates (column `j` of the Cartan matrix).
    pub fn simple_root_weight(&self, j: usize) -> Vec<i64> {
        (0..self.rank).map(|i| self.cartan[i][j]).collect()
    }

    /// `<beta, alpha_i^vee>` for `beta` in simple-root coordinates.
    pub fn pair_coroot(&self, beta: &[i64], i: usize) -> i64 {
        beta.iter().enumerate().map(|(j, b)| b * self.cartan[i][j]).sum()
    }

    /// Simple reflection acting on simple-root coordinates.
    pub fn reflect(&self, i: usize, beta: &[i64]) -> Vec<i64> {
        let c = self.pair_coroot(beta, i);
        let mut out = beta.to_vec();
        out[i] -= c;
        out
    }

    /// Order of `s_i s_j`.
    pub fn braid_length(&self, i: usize, j: usize) -> usize {
        if i == j {
            return 1;
        }
        match self.cartan[i][j] * self.cartan[j][i] {
            0 => 2,
            1 => 3,
            2 => 4,
            3 => 6,
            _ => unreachable!("finite type"),
        }
    }

    /// `(beta, gamma)` for vectors in simple-root coordinates.
    pub fn inner_roots(&self, beta: &[i64], gamma: &[i64]) -> Rational64 {
        let mut acc = Rational64::zero();
        for i in 0..self.rank {
            for j in 0..self.rank {
                acc += self.gram_hstar[i][j] * Rational64::from(beta[i] * gamma[j]);
            }
        }
        acc
    }

    /// Pinned reduced word for `w0`, 0-based.
    pub fn pinned_w0_letters(&self) -> Option<Vec<usize>> {
        match (self.series, self.rank) {
            (Series::A, 1) => Some(vec![0]),
            (Series::A, 2) => Some(vec![0, 1, 0]),
            (Series::A, 3) => Some(vec![0, 1, 0, 2, 1, 0]),
            (Series::B, 2) | (Series::C, 2) => Some(vec![0, 1, 0, 1]),
            (Series::G, 2) => Some(vec![0, 1, 0, 1, 0, 1]),
            _ => None,
        }
    }
}

pub(crate) fn rational_det(m: &[Vec<Rational64>]) -> Rational64 {
    let n = m.len();
    let mut a: Vec<Vec<Rational64>> = m.to_vec();
    let mut det = Rational64::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational64::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for r in col + 1..n {
            let f = a[r][col] / p;
            if f.is_zero() {
                continue;
            }
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
        }
    }
    det
}

/// Positive roots in simple-root coordinates, sorted by height.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootSystem {
    pub positive_roots: Vec<Vec<i64>>,
    pub n: usize,
    pub highest_root: Vec<i64>,
}

pub fn positive_roots(datum: &CartanDatum) -> RootSystem {
    let r = datum.rank;
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut queue: VecDeque<Vec<i64>> = VecDeque::new();
    for i in 0..r {
        let mut e = vec![0; r];
        e[i] = 1;
        seen.insert(e.clone());
        queue.push_back(e);
    }
    while let Some(beta) = queue.pop_front() {
        for i in 0..r {
            let img = datum.reflect(i, &beta);
            if img.iter().all(|&c| c >= 0) && seen.insert(img.clone()) {
                queue.push_back(img);
            }
        }
    }
    let mut roots: Vec<Vec<i64>> = seen.into_iter().collect();
    roots.sort_by(|a, b| {
        let ha: i64 = a.iter().sum();
        let hb: i64 = b.iter().sum();
        ha.cmp(&hb).then_with(|| b.cmp(a))
    });
    let highest_root = roots.last().cloned().unwrap_or_default();
    RootSystem { n: roots.len(), positive_roots: roots, highest_root }
}

/// A word in the simple reflections. Serialized as its 1-based letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "Vec<usize>")]
pub struct WeylWord {
    pub letters: Vec<usize>,
}

impl From<WeylWord> for Vec<usize> {
    fn from(w: WeylWord) -> Self {
        w.one_based()
    }
}

impl WeylWord {
    pub fn new(letters: Vec<usize>) -> Self {
        WeylWord { letters }
    }

    /// Parses a 1-based, comma separated word such as `1,2,1`.
    pub fn parse_one_based(s: &str) -> Result<Self> {
        let letters = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .ok()
                    .filter(|&v| v >= 1)
                    .map(|v| v - 1)
                    .ok_or_else(|| Error::OutOfRange(format!("bad letter '{t}' in word")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WeylWord { letters })
    }

    pub fn length(&self) -> usize {
        self.letters.len()
    }

    pub fn reversed(&self) -> Self {
        WeylWord { letters: self.letters.iter().rev().copied().collect() }
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.letters.iter().map(|l| l + 1).collect()
    }

    /// Image of `beta` under the product `s_{i1} ... s_{ik}`.
    pub fn act(&self, datum: &CartanDatum, beta: &[i64]) -> Vec<i64> {
        self.letters.iter().rev().fold(beta.to_vec(), |b, &i| datum.reflect(i, &b))
    }

    /// Length of the Weyl element represented by this word.
    pub fn element_length(&self, datum: &CartanDatum, roots: &RootSystem) -> usize {
        roots
            .positive_roots
            .iter()
            .filter(|b| self.act(datum, b).iter().any(|&c| c < 0))
            .count()
    }

    pub fn is_reduced(&self, datum: &CartanDatum, roots: &RootSystem) -> bool {
        self.letters.iter().all(|&l| l < datum.rank)
            && self.element_length(datum, roots) == self.length()
    }

    pub fn is_reduced_w0(&self, datum: &CartanDatum, roots: &RootSystem) -> bool {
        self.length() == roots.n && self.is_reduced(datum, roots)
    }

    /// Checks the word is a reduced word for `w0`.
    pub fn check_w0(&self, datum: &CartanDatum, roots: &RootSystem) -> Result<()> {
        if let Some(&l) = self.letters.iter().find(|&&l| l >= datum.rank) {
            return Err(Error::NodeOutOfRange { node: l + 1, rank: datum.rank });
        }
        if !self.is_reduced(datum, roots) {
            return Err(Error::NotReduced(self.to_string()));
        }
        if self.length() != roots.n {
            return Err(Error::NotLongestWord(self.to_string()));
        }
        Ok(())
    }
}

impl fmt::Display for WeylWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", l + 1)?;
        }
        write!(f, ")")
    }
}

/// A reduced word for the longest element: the pinned word for desk-scope
/// types, otherwise the greedy descent from `rho` to `-rho`.
pub fn reduced_word_w0(datum: &CartanDatum) -> WeylWord {
    if let Some(letters) = datum.pinned_w0_letters() {
        return WeylWord::new(letters);
    }
    let r = datum.rank;
    let mut lambda = vec![1i64; r];
    let mut letters = Vec::new();
    while let Some(i) = (0..r).find(|&i| lambda[i] > 0) {
        let c = lambda[i];
        for (k, l) in lambda.iter_mut().enumerate() {
            *l -= c * datum.cartan[k][i];
        }
        letters.push(i);
    }
    WeylWord::new(letters)
}

/// Applies the braid relation starting at `position`.
///
/// Returns the new word and the braid length `m` (2 for commuting letters).
pub fn braid_move(datum: &CartanDatum, word: &WeylWord, position: usize) -> Result<(WeylWord, usize)> {
    let no_move = || Error::NoBraidMove { position, word: word.to_string() };
    let l = &word.letters;
    if position + 1 >= l.len() {
        return Err(no_move());
    }
    let (i, j) = (l[position], l[position + 1]);
    if i == j || i >= datum.rank || j >= datum.rank {
        return Err(no_move());
    }
    let m = datum.braid_length(i, j);
    if position + m > l.len() {
        return Err(no_move());
    }
    let alternating = (0..m).all(|k| l[position + k] == if k % 2 == 0 { i } else { j });
    if !alternating {
        return Err(no_move());
    }
    let mut out = l.clone();
    for k in 0..m {
        out[position + k] = if k % 2 == 0 { j } else { i };
    }
    Ok((WeylWord::new(out), m))
}

/// All words reachable from `word` by braid moves (breadth first).
pub fn braid_class(datum: &CartanDatum, word: &WeylWord) -> Vec<WeylWord> {
    let mut seen: HashSet<WeylWord> = HashSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([word.clone()]);
    seen.insert(word.clone());
    while let Some(w) = queue.pop_front() {
        for p in 0..w.length() {
            if let Ok((next, _)) = braid_move(datum, &w, p) {
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        order.push(w);
    }
    order
}

/// The invariant form on `h` in the coroot basis together with an
/// orthonormalizing change of basis.
#[derive(Debug, Clone)]
pub struct InvariantForm {
    /// `<alpha_i^vee, alpha_j^vee>`, exact.
    pub gram_coroot: Vec<Vec<Rational64>>,
    pub gram: DMatrix<f64>,
    /// Columns express an orthonormal basis in coroot coordinates: `B^T G B = I`.
    pub to_coroot: DMatrix<f64>,
    /// Inverse of `to_coroot`.
    pub to_orthonormal: DMatrix<f64>,
    cartan: Vec<Vec<i64>>,
}

pub fn invariant_form_h(datum: &CartanDatum) -> InvariantForm {
    let n = datum.rank;
    let four = Rational64::from(4);
    let gram_coroot: Vec<Vec<Rational64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    four * datum.gram_hstar[i][j]
                        / (datum.gram_hstar[i][i] * datum.gram_hstar[j][j])
                })
                .collect()
        })
        .collect();
    let gram = DMatrix::from_fn(n, n, |i, j| rat_f64(gram_coroot[i][j]));
    let chol = gram.clone().cholesky().expect("invariant form is positive definite");
    let l = chol.l();
    let l_inv = l.clone().try_inverse().expect("triangular factor invertible");
    let to_coroot = l_inv.transpose();
    let to_orthonormal = l.transpose();
    InvariantForm { gram_coroot, gram, to_coroot, to_orthonormal, cartan: datum.cartan.clone() }
}

pub(crate) fn rat_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl InvariantForm {
    pub fn rank(&self) -> usize {
        self.gram.nrows()
    }

    pub fn coroot_from_orthonormal(&self, s: &[f64]) -> Vec<f64> {
        let v = &self.to_coroot * nalgebra::DVector::from_column_slice(s);
        v.iter().copied().collect()
    }

    pub fn orthonormal_from_coroot(&self, c: &[f64]) -> Vec<f64> {
        let v = &self.to_orthonormal * nalgebra::DVector::from_column_slice(c);
        v.iter().copied().collect()
    }

    /// `alpha_i(h)` for `h` in coroot coordinates.
    pub fn root_value<T>(&self, i: usize, c: &[T]) -> T
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::iter::Sum<T>,
    {
        c.iter().enumerate().map(|(j, &cj)| cj * self.cartan[j][i] as f64).sum()
    }

    /// The simple root `alpha_i` as a covector in orthonormal coordinates.
    pub fn root_covector(&self, i: usize) -> Vec<f64> {
        let n = self.rank();
        (0..n)
            .map(|k| (0..n).map(|j| self.cartan[j][i] as f64 * self.to_coroot[(j, k)]).sum())
            .collect()
    }
}

/// Weyl dimension formula for a dominant weight given in fundamental-weight coordinates.
pub fn weyl_dimension(datum: &CartanDatum, roots: &RootSystem, lambda: &[i64]) -> Rational64 {
    // <mu, beta^vee> = sum_k c_k mu_k (alpha_k, alpha_k) / (beta, beta)
    let mut num = Rational64::one();
    let mut den = Rational64::one();
    for beta in &roots.positive_roots {
        let bb = datum.inner_roots(beta, beta);
        let mut lr = Rational64::zero();
        let mut r = Rational64::zero();
        for k in 0..datum.rank {
            let w = Rational64::from(beta[k]) * datum.gram_hstar[k][k] / bb;
            lr += w * Rational64::from(lambda[k] + 1);
            r += w;
        }
        num *= lr;
        den *= r;
    }
    let out = num / den;
    debug_assert!(!out.is_negative());
    out
}
