//! Vandermonde products, Slater determinants, alternants and Schur values,
//! Pfaffians, and the torus inner product.
//!
//! The exact object for antisymmetric polynomials is the alternant
//! `a_alpha(x) = det[x_i^{alpha_j}]` indexed by a strictly decreasing exponent
//! vector. `schur_value` divides by the standard `a_delta` denominator.

use std::collections::BTreeMap;
use std::ops::{AddAssign, Neg};

use nalgebra::DMatrix;
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::partitions::Partition;
use crate::{factorial, C64};

/// Cap on `n * nodes^n` point evaluations for [`fourier_coeff`].
pub const FOURIER_EVAL_CAP: usize = 1 << 27;

/// Below this pairwise distance `schur_value` leaves the bialternant ratio.
pub const COINCIDENCE_TOL: f64 = 1e-8;

/// Points on the unit circle, one per particle.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleConfig {
    points: Vec<C64>,
}

impl CircleConfig {
    pub fn new(points: Vec<C64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("configuration needs at least one point".into()));
        }
        Ok(CircleConfig { points })
    }

    pub fn from_angles(theta: &[f64]) -> Result<Self> {
        Self::new(theta.iter().map(|&t| C64::from_polar(1.0, t)).collect())
    }

    /// i.i.d. uniform angles.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let points = (0..n)
            .map(|_| C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        CircleConfig { points }
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_on_circle(&self, tol: f64) -> bool {
        self.points.iter().all(|z| (z.norm() - 1.0).abs() <= tol)
    }

    /// `(sigma.x)_i = x_{sigma(i)}`.
    pub fn permuted(&self, sigma: &[usize]) -> Self {
        CircleConfig { points: sigma.iter().map(|&i| self.points[i]).collect() }
    }

    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                best = best.min((self.points[i] - self.points[j]).norm());
            }
        }
        best
    }
}

/// Sign of a permutation given as an image vector.
pub fn permutation_sign(sigma: &[usize]) -> i8 {
    let mut seen = vec![false; sigma.len()];
    let mut sign = 1i8;
    for start in 0..sigma.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = sigma[i];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// Sorts an exponent vector into strictly decreasing order and returns the
/// sign of the sorting permutation, or `None` when an entry repeats.
pub fn canonicalize(v: &[u32]) -> Option<(Vec<u32>, i8)> {
    let mut inversions = 0usize;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            match v[i].cmp(&v[j]) {
                std::cmp::Ordering::Equal => return None,
                std::cmp::Ordering::Less => inversions += 1,
                std::cmp::Ordering::Greater => {}
            }
        }
    }
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    Some((sorted, if inversions % 2 == 0 { 1 } else { -1 }))
}

/// `delta = (n-1, ..., 1, 0)`.
pub fn staircase(n: usize) -> Vec<u32> {
    (0..n as u32).rev().collect()
}

/// Coefficient types usable in [`AntisymCoeffs`].
pub trait Coeff: Clone + Zero + Neg<Output = Self> + AddAssign + PartialEq {}
impl<T: Clone + Zero + Neg<Output = T> + AddAssign + PartialEq> Coeff for T {}

/// Sparse antisymmetric polynomial `sum_alpha c_alpha * det[x_i^{alpha_j}]`,
/// keyed by strictly decreasing exponent vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct AntisymCoeffs<T = C64> {
    n: usize,
    coeffs: BTreeMap<Vec<u32>, T>,
}

impl<T: Coeff> AntisymCoeffs<T> {
    pub fn new(n: usize) -> Self {
        AntisymCoeffs { n, coeffs: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u32>, &T)> {
        self.coeffs.iter()
    }

    /// Adds `c * x^v` antisymmetrized; `v` need not be sorted. Repeated
    /// entries contribute nothing.
    pub fn add_term(&mut self, v: &[u32], c: T) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch { left: v.len(), right: self.n });
        }
        let Some((key, sign)) = canonicalize(v) else {
            return Ok(());
        };
        let c = if sign < 0 { -c } else { c };
        let slot = self.coeffs.entry(key).or_insert_with(T::zero);
        *slot += c;
        Ok(())
    }

    /// Coefficient at a canonical key.
    pub fn get(&self, alpha: &[u32]) -> T {
        self.coeffs.get(alpha).cloned().unwrap_or_else(T::zero)
    }

    /// `<H, x^v>` up to the `N!`-free normalization: the signed canonical
    /// coefficient, zero when `v` repeats an entry.
    pub fn coefficient_of(&self, v: &[u32]) -> T {
        match canonicalize(v) {
            None => T::zero(),
            Some((key, sign)) => {
                let c = self.get(&key);
                if sign < 0 {
                    -c
                } else {
                    c
                }
            }
        }
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> AntisymCoeffs<U> {
        AntisymCoeffs { n: self.n, coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), f(v))).collect() }
    }
}

impl AntisymCoeffs<i64> {
    pub fn to_complex(&self) -> AntisymCoeffs<C64> {
        self.map(|&c| C64::new(c as f64, 0.0))
    }
}

impl AntisymCoeffs<C64> {
    pub fn eval(&self, x: &CircleConfig) -> C64 {
        self.coeffs.iter().map(|(alpha, c)| c * alternant_value(alpha, x.points())).sum()
    }

    /// Largest exponent appearing in any key.
    pub fn max_exponent(&self) -> u32 {
        self.coeffs.keys().filter_map(|k| k.first().copied()).max().unwrap_or(0)
    }
}

/// Sparse univariate polynomial orbital.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Orbital {
    coeffs: BTreeMap<u32, C64>,
}

impl Orbital {
    pub fn new(coeffs: BTreeMap<u32, C64>) -> Self {
        let mut o = Orbital { coeffs };
        o.coeffs.retain(|_, c| *c != C64::zero());
        o
    }

    pub fn monomial(degree: u32, c: C64) -> Self {
        Self::new(BTreeMap::from([(degree, c)]))
    }

    /// Coefficients listed from degree 0 upward.
    pub fn from_dense(coeffs: &[C64]) -> Self {
        Self::new(coeffs.iter().enumerate().map(|(k, &c)| (k as u32, c)).collect())
    }

    pub fn coeff(&self, k: u32) -> C64 {
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, C64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.keys().next_back().copied().unwrap_or(0)
    }

    pub fn eval(&self, z: C64) -> C64 {
        // Horner over the dense range keeps the pair ordering fixed
        let mut acc = C64::zero();
        let deg = self.degree();
        for k in (0..=deg).rev() {
            acc = acc * z + self.coeff(k);
        }
        acc
    }

    pub fn mul(&self, other: &Orbital) -> Orbital {
        let mut out: BTreeMap<u32, C64> = BTreeMap::new();
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                *out.entry(a + b).or_default() += ca * cb;
            }
        }
        Orbital::new(out)
    }

    pub fn add(&self, other: &Orbital) -> Orbital {
        let mut out = self.coeffs.clone();
        for (b, cb) in other.terms() {
            *out.entry(b).or_default() += cb;
        }
        Orbital::new(out)
    }

    pub fn pow(&self, e: u32) -> Orbital {
        (0..e).fold(Orbital::monomial(0, C64::new(1.0, 0.0)), |acc, _| acc.mul(self))
    }

    /// The orbital `z -> self(r z)`.
    pub fn scale_input(&self, r: f64) -> Orbital {
        Orbital::new(self.terms().map(|(k, c)| (k, c * r.powi(k as i32))).collect())
    }
}

/// `det` by partially pivoted LU.
pub fn det(m: &DMatrix<C64>) -> C64 {
    if m.nrows() == 0 {
        return C64::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

/// `prod_{i<j} (x_j - x_i)` in lexicographic pair order.
pub fn vandermonde(x: &CircleConfig) -> C64 {
    let p = x.points();
    let mut acc = C64::new(1.0, 0.0);
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            acc *= p[j] - p[i];
        }
    }
    acc
}

/// `(1/N!) det[f_i(x_j)]`.
pub fn slater_value(orbitals: &[Orbital], x: &CircleConfig) -> Result<C64> {
    let n = x.len();
    if orbitals.len() != n {
        return Err(Error::DimensionMismatch { left: orbitals.len(), right: n });
    }
    let m = DMatrix::from_fn(n, n, |i, j| orbitals[i].eval(x.points()[j]));
    Ok(det(&m) / factorial(n))
}

/// `det[x_i^{alpha_j}]` for any exponent vector.
pub fn alternant_value(alpha: &[u32], x: &[C64]) -> C64 {
    let n = x.len();
    let m = DMatrix::from_fn(n, n, |i, j| x[i].powu(alpha[j]));
    det(&m)
}

/// `lambda + delta`, padded to `n` entries.
pub fn shifted_exponents(lambda: &Partition, n: usize) -> Result<Vec<u32>> {
    if lambda.len() > n {
        return Err(Error::TooLong { length: lambda.len(), n });
    }
    Ok((0..n).map(|j| lambda.part(j) + (n - 1 - j) as u32).collect())
}

/// Exact expansion of `a_{lambda+delta}`: a single key with coefficient +1.
pub fn alternant_coeffs(lambda: &Partition, n: usize) -> Result<AntisymCoeffs<i64>> {
    let key = shifted_exponents(lambda, n)?;
    let mut out = AntisymCoeffs::new(n);
    out.add_term(&key, 1)?;
    Ok(out)
}

/// Complete homogeneous symmetric polynomials `h_0..=h_kmax` at `x`.
pub fn complete_homogeneous(x: &[C64], kmax: usize) -> Vec<C64> {
    let mut h = vec![C64::zero(); kmax + 1];
    h[0] = C64::new(1.0, 0.0);
    for &xi in x {
        for k in 1..=kmax {
            let prev = h[k - 1];
            h[k] += xi * prev;
        }
    }
    h
}

/// Schur polynomial by the Jacobi-Trudi determinant `det[h_{lambda_i - i + j}]`.
pub fn schur_jacobi_trudi(lambda: &Partition, x: &[C64]) -> C64 {
    if lambda.len() > x.len() {
        return C64::zero();
    }
    let l = lambda.len();
    if l == 0 {
        return C64::new(1.0, 0.0);
    }
    let kmax = lambda.largest() as usize + l;
    let h = complete_homogeneous(x, kmax);
    let m = DMatrix::from_fn(l, l, |i, j| {
        let idx = lambda.part(i) as i64 - i as i64 + j as i64;
        if idx < 0 {
            C64::zero()
        } else {
            h[idx as usize]
        }
    });
    det(&m)
}

/// Standard Schur value `a_{lambda+delta}(x) / a_delta(x)`; zero when
/// `l(lambda) > N`. Near-coincident points switch to Jacobi-Trudi.
pub fn schur_value(lambda: &Partition, x: &CircleConfig) -> C64 {
    let n = x.len();
    if lambda.len() > n {
        return C64::zero();
    }
    if x.min_pairwise_distance() < COINCIDENCE_TOL {
        return schur_jacobi_trudi(lambda, x.points());
    }
    let top = shifted_exponents(lambda, n).expect("length checked");
    alternant_value(&top, x.points()) / alternant_value(&staircase(n), x.points())
}

/// `<A, B> = N! sum_alpha c_alpha(A) conj(c_alpha(B))`.
pub fn antisym_inner(a: &AntisymCoeffs<C64>, b: &AntisymCoeffs<C64>) -> Result<C64> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { left: a.n(), right: b.n() });
    }
    let s: C64 = a.iter().map(|(k, ca)| ca * b.get(k).conj()).sum();
    Ok(s * factorial(a.n()))
}

/// Integer version of [`antisym_inner`].
pub fn antisym_inner_exact(a: &AntisymCoeffs<i64>, b: &AntisymCoeffs<i64>) -> Result<i128> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { left: a.n(), right: b.n() });
    }
    let s: i128 = a.iter().map(|(k, &ca)| ca as i128 * b.get(k) as i128).sum();
    let nf: i128 = (1..=a.n() as i128).product();
    Ok(s * nf)
}

/// Exact expansion of the Slater determinant `(1/N!) det[f_i(x_j)]`:
/// `c_alpha = (1/N!) det[coeff(f_i, alpha_j)]`.
pub fn slater_coeffs(orbitals: &[Orbital]) -> AntisymCoeffs<C64> {
    let n = orbitals.len();
    let mut support: Vec<u32> = orbitals.iter().flat_map(|o| o.terms().map(|(k, _)| k)).collect();
    support.sort_unstable_by(|a, b| b.cmp(a));
    support.dedup();
    let mut out = AntisymCoeffs::new(n);
    let nf = factorial(n);
    let mut cur = Vec::with_capacity(n);
    fn rec(
        start: usize,
        support: &[u32],
        orbitals: &[Orbital],
        cur: &mut Vec<u32>,
        out: &mut AntisymCoeffs<C64>,
        nf: f64,
    ) {
        let n = orbitals.len();
        if cur.len() == n {
            let m = DMatrix::from_fn(n, n, |i, j| orbitals[i].coeff(cur[j]));
            let c = det(&m) / nf;
            if c != C64::zero() {
                out.add_term(cur, c).expect("length matches");
            }
            return;
        }
        for s in start..support.len() {
            cur.push(support[s]);
            rec(s + 1, support, orbitals, cur, out, nf);
            cur.pop();
        }
    }
    rec(0, &support, orbitals, &mut cur, &mut out, nf);
    out
}

/// `<H, x^alpha>` by tensor-grid quadrature on `M^N` equispaced nodes, with
/// `M` the next power of two above the degree bound. Exact for polynomials of
/// per-variable degree below `M`.
pub fn fourier_coeff(h: &dyn Fn(&[C64]) -> C64, n: usize, alpha: &[u32], degree_bound: usize) -> Result<C64> {
    if alpha.len() != n {
        return Err(Error::DimensionMismatch { left: alpha.len(), right: n });
    }
    let top = alpha.iter().copied().max().unwrap_or(0) as usize;
    let m = (degree_bound.max(top) + 1).next_power_of_two();
    let total = (m as f64).powi(n as i32) * n as f64;
    if total > FOURIER_EVAL_CAP as f64 {
        return Err(Error::BudgetExceeded { what: "fourier_coeff grid", cap: FOURIER_EVAL_CAP });
    }
    let roots: Vec<C64> = (0..m).map(|j| C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / m as f64)).collect();
    let mut idx = vec![0usize; n];
    let mut pt = vec![roots[0]; n];
    let mut acc = C64::zero();
    loop {
        for i in 0..n {
            pt[i] = roots[idx[i]];
        }
        // conj(x^alpha) = w^{-sum alpha_i j_i}
        let phase = idx.iter().zip(alpha).map(|(&j, &a)| j * (a as usize % m)).sum::<usize>() % m;
        acc += h(&pt) * roots[(m - phase) % m];
        let mut d = 0;
        loop {
            if d == n {
                return Ok(acc / (m as f64).powi(n as i32));
            }
            idx[d] += 1;
            if idx[d] < m {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

fn check_skew(a: &DMatrix<C64>) -> Result<()> {
    let (rows, cols) = a.shape();
    if rows != cols || rows % 2 != 0 {
        return Err(Error::NotEvenSquare { rows, cols });
    }
    let scale = a.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let mut defect = 0.0f64;
    for i in 0..rows {
        for j in 0..cols {
            defect = defect.max((a[(i, j)] + a[(j, i)]).norm());
        }
    }
    if defect > 1e-12 * scale {
        return Err(Error::NotSkew { defect });
    }
    Ok(())
}

fn pfaffian_expand(a: &DMatrix<C64>, idx: &[usize]) -> C64 {
    if idx.is_empty() {
        return C64::new(1.0, 0.0);
    }
    let first = idx[0];
    let mut acc = C64::zero();
    let mut rest = Vec::with_capacity(idx.len() - 2);
    for (pos, &j) in idx.iter().enumerate().skip(1) {
        rest.clear();
        rest.extend(idx[1..].iter().copied().filter(|&k| k != j));
        let term = a[(first, j)] * pfaffian_expand(a, &rest);
        if pos % 2 == 1 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

fn pfaffian_ltl(mut a: DMatrix<C64>) -> C64 {
    let n = a.nrows();
    let mut pf = C64::new(1.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        let mut best = a[(k + 1, k)].norm();
        for i in k + 2..n {
            let v = a[(i, k)].norm();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let pivot = a[(k, k + 1)];
        if pivot == C64::zero() {
            return C64::zero();
        }
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<C64> = (k + 2..n).map(|j| a[(k, j)] / pivot).collect();
            let col: Vec<C64> = (k + 2..n).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    a[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

/// Pfaffian of an even-dimensional skew-symmetric matrix: row expansion up to
/// dimension 8, Parlett-Reid elimination above.
pub fn pfaffian(a: &DMatrix<C64>) -> Result<C64> {
    check_skew(a)?;
    let n = a.nrows();
    if n <= 8 {
        let idx: Vec<usize> = (0..n).collect();
        Ok(pfaffian_expand(a, &idx))
    } else {
        Ok(pfaffian_ltl(a.clone()))
    }
}

/// Parlett-Reid elimination at any dimension (used to cross-check the
/// expansion path).
pub fn pfaffian_elimination(a: &DMatrix<C64>) -> Result<C64> {
    check_skew(a)?;
    Ok(pfaffian_ltl(a.clone()))
}

/// `[(r x_i - r x_j) / (1 - r^4 x_i^2 x_j^2)]`.
pub fn pfaffian_kernel(x: &CircleConfig, r: f64) -> DMatrix<C64> {
    let p = x.points();
    let n = p.len();
    let r4 = r.powi(4);
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::zero()
        } else {
            let s = p[i] * p[j];
            (p[i] - p[j]) * r / (1.0 - s * s * r4)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::enumerate_partitions;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
    }

    #[test]
    fn vandermonde_examples() {
        let x = CircleConfig::new(vec![c(0.6, 0.8), c(0.0, 1.0)]).unwrap();
        assert_eq!(vandermonde(&x), c(0.0, 1.0) - c(0.6, 0.8));
        let rep = CircleConfig::new(vec![c(1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(vandermonde(&rep), C64::zero());
        let x = CircleConfig::new(vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]).unwrap();
        let want = (c(0.0, 1.0) - c(1.0, 0.0)) * c(-2.0, 0.0) * c(-1.0, -1.0);
        assert!(close(vandermonde(&x), want, 1e-15));
    }

    #[test]
    fn slater_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = CircleConfig::random(2, &mut rng);
        let orb = vec![Orbital::monomial(1, c(1.0, 0.0)), Orbital::monomial(0, c(1.0, 0.0))];
        let v = slater_value(&orb, &x).unwrap();
        assert!(close(v, (x.points()[0] - x.points()[1]) / 2.0, 1e-15));
        let swapped = x.permuted(&[1, 0]);
        assert!(close(slater_value(&orb, &swapped).unwrap(), -v, 1e-15));

        // f_i(z) = z^{4-i}: det[x_j^{4-i}] = a_delta = (-1)^6 V = V
        let x = CircleConfig::random(4, &mut rng);
        let orb: Vec<Orbital> = (1..=4).map(|i| Orbital::monomial(4 - i, c(1.0, 0.0))).collect();
        let want = vandermonde(&x) / 24.0;
        assert!(close(slater_value(&orb, &x).unwrap(), want, 1e-12));
        assert!(slater_value(&orb[..3], &x).is_err());
    }

    #[test]
    fn alternant_examples() {
        let a = alternant_coeffs(&Partition::empty(), 2).unwrap();
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![(&vec![1, 0], &1)]);
        let a = alternant_coeffs(&p(&[4, 4, 2, 2]), 4).unwrap();
        assert_eq!(a.get(&[7, 6, 3, 2]), 1);
        assert_eq!(a.len(), 1);
        let a = alternant_coeffs(&p(&[2, 2]), 2).unwrap();
        assert_eq!(a.get(&[3, 2]), 1);
        assert!(matches!(alternant_coeffs(&p(&[1, 1, 1]), 2), Err(Error::TooLong { .. })));
    }

    #[test]
    fn alternant_expansion_matches_determinant() {
        // det[[x1^3, x1^2],[x2^3, x2^2]] = x1^3 x2^2 - x1^2 x2^3
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = CircleConfig::random(2, &mut rng);
        let (x1, x2) = (x.points()[0], x.points()[1]);
        let want = x1.powu(3) * x2.powu(2) - x1.powu(2) * x2.powu(3);
        let got = alternant_coeffs(&p(&[2, 2]), 2).unwrap().to_complex().eval(&x);
        assert!(close(got, want, 1e-14));
    }

    #[test]
    fn canonicalize_signs() {
        assert_eq!(canonicalize(&[3, 1, 2]), Some((vec![3, 2, 1], -1)));
        assert_eq!(canonicalize(&[1, 2, 3]), Some((vec![3, 2, 1], -1)));
        assert_eq!(canonicalize(&[2, 3, 1, 0]), Some((vec![3, 2, 1, 0], -1)));
        assert_eq!(canonicalize(&[2, 2]), None);
        assert_eq!(permutation_sign(&[1, 0, 2]), -1);
        assert_eq!(permutation_sign(&[1, 2, 0]), 1);
    }

    #[test]
    fn schur_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = CircleConfig::random(3, &mut rng);
        assert!(close(schur_value(&Partition::empty(), &x), c(1.0, 0.0), 1e-12));
        let x2 = CircleConfig::random(2, &mut rng);
        let s = schur_value(&p(&[1]), &x2);
        assert!(close(s, x2.points()[0] + x2.points()[1], 1e-12));
        // the V-denominator convention flips the sign at N = 2
        let flipped = alternant_value(&[2, 0], x2.points()) / vandermonde(&x2);
        assert!(close(flipped, -s, 1e-12));
        assert_eq!(schur_value(&p(&[1, 1, 1]), &x2), C64::zero());
    }

    #[test]
    fn schur_homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = CircleConfig::random(2, &mut rng);
        let r: f64 = 0.7;
        let scaled = CircleConfig::new(x.points().iter().map(|z| z * r).collect()).unwrap();
        let lam = p(&[2, 2]);
        assert!(close(schur_value(&lam, &scaled), schur_value(&lam, &x) * r.powi(4), 1e-12));
    }

    #[test]
    fn schur_fallback_matches_bialternant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x = CircleConfig::random(4, &mut rng);
            for k in 0..=6 {
                for lam in enumerate_partitions(k, Some(4)).unwrap() {
                    let a = schur_value(&lam, &x);
                    let b = schur_jacobi_trudi(&lam, x.points());
                    assert!(close(a, b, 1e-9), "{lam}: {a} vs {b}");
                }
            }
        }
        // coincident points: s_(1)(z, z) = 2z
        let z = C64::from_polar(1.0, 0.3);
        let x = CircleConfig::new(vec![z, z]).unwrap();
        assert!(close(schur_value(&p(&[1]), &x), z * 2.0, 1e-14));
    }

    #[test]
    fn inner_examples() {
        let e = alternant_coeffs(&Partition::empty(), 2).unwrap();
        let d = alternant_coeffs(&p(&[2, 2]), 2).unwrap();
        assert_eq!(antisym_inner_exact(&e, &e).unwrap(), 2);
        assert_eq!(antisym_inner_exact(&d, &e).unwrap(), 0);
        let f = alternant_coeffs(&p(&[4, 4, 2, 2]), 4).unwrap();
        assert_eq!(antisym_inner_exact(&f, &f).unwrap(), 24);
        assert_eq!(antisym_inner(&f.to_complex(), &f.to_complex()).unwrap(), c(24.0, 0.0));
        assert!(antisym_inner_exact(&e, &f).is_err());
    }

    #[test]
    fn inner_of_expanded_alternant_by_quadrature() {
        // <a, a> = N! recovered from the N! signed monomials by quadrature
        let a = alternant_coeffs(&p(&[4, 4, 2, 2]), 4).unwrap().to_complex();
        let h = |x: &[C64]| alternant_value(&[7, 6, 3, 2], x);
        let mut total = 0.0;
        let perms = [[7u32, 6, 3, 2], [6, 7, 3, 2], [2, 3, 6, 7]];
        for v in perms {
            let q = fourier_coeff(&h, 4, &v, 7).unwrap();
            assert_abs_diff_eq!(q.re, a.coefficient_of(&v).re, epsilon = 1e-10);
            assert_abs_diff_eq!(q.im, 0.0, epsilon = 1e-10);
            total += q.norm_sqr();
        }
        assert_abs_diff_eq!(total, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn fourier_examples() {
        let h = |x: &[C64]| x[0];
        assert!(close(fourier_coeff(&h, 2, &[1, 0], 1).unwrap(), c(1.0, 0.0), 1e-12));
        let v = |x: &[C64]| x[1] - x[0];
        assert!(close(fourier_coeff(&v, 2, &[1, 0], 1).unwrap(), c(-1.0, 0.0), 1e-12));
        assert!(fourier_coeff(&v, 2, &[1, 1], 1).unwrap().norm() < 1e-12);
        assert!(matches!(fourier_coeff(&v, 12, &[0; 12], 40), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn slater_coeffs_match_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let orb: Vec<Orbital> = (0..3)
            .map(|_| Orbital::from_dense(&(0..5).map(|_| c(rng.gen(), rng.gen())).collect::<Vec<_>>()))
            .collect();
        let coeffs = slater_coeffs(&orb);
        for _ in 0..5 {
            let x = CircleConfig::random(3, &mut rng);
            assert!(close(coeffs.eval(&x), slater_value(&orb, &x).unwrap(), 1e-12));
        }
    }

    #[test]
    fn pfaffian_examples() {
        let a = DMatrix::from_row_slice(2, 2, &[C64::zero(), c(2.0, 1.0), c(-2.0, -1.0), C64::zero()]);
        assert_eq!(pfaffian(&a).unwrap(), c(2.0, 1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_skew(4, &mut rng);
        let want = m[(0, 1)] * m[(2, 3)] - m[(0, 2)] * m[(1, 3)] + m[(0, 3)] * m[(1, 2)];
        assert!(close(pfaffian(&m).unwrap(), want, 1e-14));
        assert!(close(pfaffian_elimination(&m).unwrap(), want, 1e-12));
        let odd = DMatrix::<C64>::zeros(3, 3);
        assert!(matches!(pfaffian(&odd), Err(Error::NotEvenSquare { .. })));
        let mut bad = random_skew(4, &mut rng);
        bad[(0, 1)] += c(1.0, 0.0);
        assert!(matches!(pfaffian(&bad), Err(Error::NotSkew { .. })));
        assert_eq!(pfaffian(&DMatrix::<C64>::zeros(0, 0)).unwrap(), c(1.0, 0.0));
    }

    fn random_skew(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        let mut m = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        m
    }

    #[test]
    fn pfaffian_squares_to_det_both_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [2usize, 4, 6, 8, 10, 12] {
            for _ in 0..10 {
                let m = random_skew(n, &mut rng);
                let d = det(&m);
                let pf = pfaffian(&m).unwrap();
                assert!((pf * pf - d).norm() <= 1e-8 * d.norm().max(1e-300));
                let pe = pfaffian_elimination(&m).unwrap();
                assert!(close(pf, pe, 1e-10));
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = CircleConfig::random(4, &mut rng);
        assert!(pfaffian_kernel(&x, 0.0).iter().all(|z| *z == C64::zero()));
        let k = pfaffian_kernel(&x, 0.5);
        assert!((k.clone() + k.transpose()).iter().all(|z| *z == C64::zero()));
        let x2 = CircleConfig::random(2, &mut rng);
        let (a, b) = (x2.points()[0], x2.points()[1]);
        let want = (a - b) * 0.5 / (1.0 - a * a * b * b * 0.0625);
        assert!(close(pfaffian_kernel(&x2, 0.5)[(0, 1)], want, 1e-15));
    }

    #[test]
    fn orbital_algebra() {
        let o = Orbital::from_dense(&[c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(o.degree(), 2);
        assert_eq!(o.num_terms(), 2);
        let z = c(0.3, -0.4);
        assert!(close(o.eval(z), c(1.0, 0.0) + z * z * 2.0, 1e-15));
        assert!(close(o.pow(3).eval(z), o.eval(z).powu(3), 1e-14));
        assert!(close(o.scale_input(0.5).eval(z), o.eval(z * 0.5), 1e-15));
        assert!(close(o.add(&o).eval(z), o.eval(z) * 2.0, 1e-15));
    }
}
