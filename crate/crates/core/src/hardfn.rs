//! The hard function G in Jastrow/Pfaffian form and as a truncated sum of
//! alternants over doubly-even partitions, with its normalization constant.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::visit_partitions_in_box;
use crate::symfunc::{det, pfaffian, pfaffian_kernel, slater_value, CircleConfig, Orbital};
use crate::{factorial, ln_factorial, C64};

/// Hard cap on the number of alternant terms in a Schur-sum evaluation.
pub const SCHUR_TERM_CAP: usize = 200_000;

/// Cap on truncation indices when searching for a certified tail.
const SERIES_INDEX_CAP: usize = 50_000_000;

pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// `1 - 1/(8N^4 + 8)`.
pub fn choose_r(n: usize) -> f64 {
    let n4 = (n as f64).powi(4);
    1.0 - 1.0 / (8.0 * n4 + 8.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CMode {
    ClosedForm,
    ExactRestricted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitalFamily {
    Phi,
    Psi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Jastrow,
    SchurTruncated,
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Certified bound on `sum_{k >= kmin} p(k, <= m parts) q^k`.
///
/// Uses `p(k, <= m) <= C(k+m-1, m-1)`; the ratio of consecutive majorant
/// terms `q (k+m)/(k+1)` decreases in k, so the tail is geometric once it
/// drops below 1.
pub fn restricted_tail_bound(q: f64, m: usize, kmin: usize) -> f64 {
    if q == 0.0 {
        return if kmin == 0 { 1.0 } else { 0.0 };
    }
    let m = m.max(1);
    let rho = q * (kmin + m) as f64 / (kmin + 1) as f64;
    if rho >= 1.0 {
        return f64::INFINITY;
    }
    // ln_factorial is a plain sum; keep it cheap for large kmin
    let ln_a = ln_binomial_large(kmin + m - 1, m - 1) + kmin as f64 * q.ln();
    ln_a.exp() / (1.0 - rho)
}

fn ln_binomial_large(n: usize, k: usize) -> f64 {
    if n < 2000 {
        return ln_binomial(n, k);
    }
    // C(n, k) with small k: sum of ln((n-k+i)/i)
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

/// Terms `p(k, <= m) q^k` for `k = 0..=kmax`, by the bounded-part DP with
/// weights carried in floating point.
pub fn restricted_series(q: f64, m: usize, kmax: usize) -> Vec<f64> {
    let mut w = vec![0.0; kmax + 1];
    w[0] = 1.0;
    for part in 1..=m.min(kmax.max(1)) {
        let qp = q.powi(part as i32);
        for n in part..=kmax {
            w[n] += w[n - part] * qp;
        }
    }
    w
}

/// Exact value of the restricted generating function: `prod_{i<=m} 1/(1-q^i)`.
pub fn restricted_product(q: f64, m: usize) -> f64 {
    (1..=m).map(|i| 1.0 / (1.0 - q.powi(i as i32))).product()
}

/// `sum_{k >= 1} ln(1 - q^k)` truncated once the remainder is certified below
/// `tail_tol`; returns (value, terms used, tail bound).
pub fn ln_euler_product(q: f64, tail_tol: f64) -> Result<(f64, usize, f64)> {
    ln_euler_product_from(q, 1, tail_tol)
}

/// `sum_{k >= start} ln(1 - q^k)` with a certified remainder bound
/// `q^{K+1} / ((1-q)(1-q^{K+1}))` on the omitted part.
pub fn ln_euler_product_from(q: f64, start: usize, tail_tol: f64) -> Result<(f64, usize, f64)> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("q = {q} outside [0, 1)")));
    }
    let mut acc = 0.0;
    let mut qk = q.powi(start as i32);
    let mut k = start;
    loop {
        acc += (-qk).ln_1p();
        let next = qk * q;
        let tail = next / ((1.0 - q) * (1.0 - next));
        if tail <= tail_tol {
            return Ok((acc, k - start + 1, tail));
        }
        if k - start > SERIES_INDEX_CAP {
            return Err(Error::TruncationTooCoarse { tail, tol: tail_tol });
        }
        qk = next;
        k += 1;
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalizationReport {
    pub mode: CMode,
    pub c: f64,
    pub ln_c: f64,
    pub c_closed_form: f64,
    pub ln_c_closed_form: f64,
    pub product_terms: usize,
    pub product_tail_bound: f64,
    /// `None` when the restricted series could not be certified.
    pub c_exact_restricted: Option<f64>,
    pub ln_c_exact_restricted: Option<f64>,
    pub series_max_weight: Option<usize>,
    pub series_sum: Option<f64>,
    pub series_tail_bound: Option<f64>,
    /// Same restricted sum from its finite product form.
    pub restricted_product_value: f64,
    /// `|C_closed - C_exact| / C_exact`.
    pub rel_discrepancy: Option<f64>,
    /// `||G||^2` that the closed-form constant actually produces.
    pub closed_form_norm_sq: f64,
}

struct Series {
    kmax: usize,
    sum: f64,
    tail: f64,
}

fn certified_restricted_sum(q: f64, m: usize, max_weight: Option<usize>, tail_tol: f64) -> Result<Series> {
    let kmax = match max_weight {
        Some(w) => w / 4,
        None => {
            // smallest kmax with relative certified tail below tolerance
            let mut hi = 1usize;
            while restricted_tail_bound(q, m, hi + 1) > tail_tol {
                if hi > SERIES_INDEX_CAP {
                    return Err(Error::TruncationTooCoarse { tail: restricted_tail_bound(q, m, hi + 1), tol: tail_tol });
                }
                hi *= 2;
            }
            let mut lo = 0usize;
            while lo < hi {
                let mid = (lo + hi) / 2;
                if restricted_tail_bound(q, m, mid + 1) <= tail_tol {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            lo
        }
    };
    let terms = restricted_series(q, m, kmax);
    let sum: f64 = terms.iter().sum();
    let tail = restricted_tail_bound(q, m, kmax + 1);
    if tail / sum > tail_tol {
        return Err(Error::TruncationTooCoarse { tail: tail / sum, tol: tail_tol });
    }
    Ok(Series { kmax, sum, tail })
}

/// Normalization constant C of G, in either mode, with both values reported.
pub fn normalization_c(
    n: usize,
    r: f64,
    mode: CMode,
    max_weight: Option<usize>,
    tail_tol: f64,
) -> Result<(f64, NormalizationReport)> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!("r = {r} must lie in (0, 1)")));
    }
    let nn = (n * (n - 1)) as f64;
    let q = r.powi(8);
    let m = n / 2;

    let (ln_prod, product_terms, product_tail_bound) = ln_euler_product(q, tail_tol)?;
    let ln_c_closed = 0.5 * (-nn * r.ln() + ln_prod);

    let series = certified_restricted_sum(q, m, max_weight, tail_tol);
    let series = match (mode, series) {
        (CMode::ExactRestricted, Err(e)) => return Err(e),
        (_, s) => s.ok(),
    };
    let ln_c_exact = series.as_ref().map(|s| 0.5 * (-nn * r.ln() - s.sum.ln()));
    let restricted_product_value = restricted_product(q, m);
    let closed_form_norm_sq = (2.0 * ln_c_closed + nn * r.ln()).exp() * restricted_product_value;

    let ln_c = match mode {
        CMode::ClosedForm => ln_c_closed,
        CMode::ExactRestricted => ln_c_exact.expect("checked above"),
    };
    let report = NormalizationReport {
        mode,
        c: ln_c.exp(),
        ln_c,
        c_closed_form: ln_c_closed.exp(),
        ln_c_closed_form: ln_c_closed,
        product_terms,
        product_tail_bound,
        c_exact_restricted: ln_c_exact.map(f64::exp),
        ln_c_exact_restricted: ln_c_exact,
        series_max_weight: series.as_ref().map(|s| 4 * s.kmax),
        series_sum: series.as_ref().map(|s| s.sum),
        series_tail_bound: series.as_ref().map(|s| s.tail),
        restricted_product_value,
        rel_discrepancy: ln_c_exact.map(|le| (ln_c_closed - le).exp_m1().abs()),
        closed_form_norm_sq,
    };
    Ok((report.c, report))
}

/// Parameters of G.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HardFnParams {
    pub n: usize,
    pub r: f64,
    pub c: f64,
    pub ln_c: f64,
    pub c_mode: CMode,
    /// Schur-sum truncation weight, `None` when the sum is unavailable at
    /// this r within [`SCHUR_TERM_CAP`].
    pub max_weight: Option<usize>,
    pub tail_tol: f64,
    /// Certified sup-norm bound on the omitted Schur terms.
    pub schur_tail_bound: Option<f64>,
    /// The same bound relative to the sup of the leading term.
    pub schur_relative_tail: Option<f64>,
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!("N = {n} must be even and at least 2")));
    }
    Ok(())
}

/// `sum_{k <= kmax} p(k, <= m)`: the number of alternant terms kept.
fn schur_term_count(m: usize, kmax: usize) -> f64 {
    restricted_series(1.0, m, kmax).iter().sum()
}

/// C-free sup bound `N! r^{N(N-1)/2} sum_{k > kmax} r^{4k} p(k, <= N/2)`.
fn schur_sup_tail(n: usize, r: f64, kmax: usize) -> f64 {
    let base = factorial(n) * r.powi((n * (n - 1) / 2) as i32);
    base * restricted_tail_bound(r.powi(4), n / 2, kmax + 1)
}

/// Relative tail `sum_{k > kmax} r^{4k} p(k, <= N/2)`: the omitted sup mass
/// measured in units of the leading (lambda = empty) term.
pub fn schur_relative_tail(n: usize, r: f64, kmax: usize) -> f64 {
    restricted_tail_bound(r.powi(4), n / 2, kmax + 1)
}

/// Smallest multiple of 4 whose relative tail is at most `tol`, or `None`
/// once the term count passes the cap.
pub fn schur_max_weight(n: usize, r: f64, tol: f64) -> Option<usize> {
    let mut kmax = 0usize;
    loop {
        if schur_relative_tail(n, r, kmax) <= tol {
            return Some(4 * kmax);
        }
        kmax += 1;
        if schur_term_count(n / 2, kmax) > SCHUR_TERM_CAP as f64 {
            return None;
        }
    }
}

impl HardFnParams {
    /// Default construction: C from `c_mode`, Schur truncation certified to
    /// [`DEFAULT_TAIL_TOL`] relative to the leading term.
    pub fn new(n: usize, r: f64, c_mode: CMode) -> Result<Self> {
        Self::with_options(n, r, c_mode, None, DEFAULT_TAIL_TOL)
    }

    pub fn with_options(n: usize, r: f64, c_mode: CMode, max_weight: Option<usize>, tail_tol: f64) -> Result<Self> {
        check_n(n)?;
        let (c, rep) = normalization_c(n, r, c_mode, None, tail_tol)?;
        let scale = c * factorial(n).sqrt() / factorial(n);
        let max_weight = match max_weight {
            Some(w) => {
                if w % 4 != 0 {
                    return Err(Error::InvalidParameter(format!("max_weight {w} is not a multiple of 4")));
                }
                Some(w)
            }
            None => schur_max_weight(n, r, tail_tol),
        };
        let schur_tail_bound = max_weight.map(|w| scale * schur_sup_tail(n, r, w / 4));
        let schur_relative_tail = max_weight.map(|w| schur_relative_tail(n, r, w / 4));
        Ok(HardFnParams {
            n,
            r,
            c,
            ln_c: rep.ln_c,
            c_mode,
            max_weight,
            tail_tol,
            schur_tail_bound,
            schur_relative_tail,
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_n(self.n)?;
        if !(self.r > 0.0 && self.r < 1.0) || !(self.c > 0.0) {
            return Err(Error::InvalidParameter("need 0 < r < 1 and C > 0".into()));
        }
        if let Some(w) = self.max_weight {
            if w % 4 != 0 {
                return Err(Error::InvalidParameter("max_weight must be a multiple of 4".into()));
            }
        }
        Ok(())
    }
}

/// Orbitals of the Jastrow form (`Phi`) or their two-term row-reduced
/// variant (`Psi`), both with the input scaling `z -> r z` applied.
///
/// In the `Psi` family the rows `j = 1` and `j = N/2 + 1` are the single
/// monomials left after the row reduction; the display `(1 + (rz)^0)` there
/// would double those rows.
pub fn orbitals(n: usize, r: f64, family: OrbitalFamily) -> Result<Vec<Orbital>> {
    check_n(n)?;
    let one = C64::new(1.0, 0.0);
    let half = n / 2;
    let mut out = Vec::with_capacity(n);
    for j in 1..=n {
        let (lead, e) = if j <= half { (1 + 2 * (half - j) as u32, j - 1) } else { (2 * (n - j) as u32, j - 1 - half) };
        let lead = Orbital::monomial(lead, one);
        let tail = match family {
            OrbitalFamily::Phi => Orbital::from_dense(&[one, C64::default(), C64::default(), C64::default(), one])
                .pow(e as u32),
            OrbitalFamily::Psi if e == 0 => Orbital::monomial(0, one),
            OrbitalFamily::Psi => Orbital::monomial(0, one).add(&Orbital::monomial(4 * e as u32, one)),
        };
        out.push(lead.mul(&tail).scale_input(r));
    }
    Ok(out)
}

/// Sign relating the orbital determinant to the alternant sum: the leading
/// exponents of the orbitals run `N-1, N-3, .., 1, N-2, .., 0`, and sorting
/// them costs `(-1)^{m(m-1)/2}` with `m = N/2`.
pub fn orbital_order_sign(n: usize) -> f64 {
    let m = n / 2;
    if (m * (m.saturating_sub(1)) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `prod_{i<j} 1/(1 - r^4 x_i^2 x_j^2)` in lexicographic pair order.
pub fn jastrow_prefactor(x: &CircleConfig, r: f64) -> C64 {
    let p = x.points();
    let r4 = r.powi(4);
    let mut acc = C64::new(1.0, 0.0);
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            acc /= 1.0 - p[i] * p[i] * p[j] * p[j] * r4;
        }
    }
    acc
}

/// Precomputed alternant expansion of G truncated at a weight.
#[derive(Clone, Debug)]
pub struct SchurSum {
    n: usize,
    /// (lambda + delta, r^{|lambda| + N(N-1)/2})
    terms: Vec<(Vec<u32>, f64)>,
    max_exp: u32,
}

impl SchurSum {
    /// All doubly-even lambda with `|lambda| <= max_weight`, `l(lambda) <= N`.
    pub fn new(n: usize, r: f64, max_weight: usize) -> Result<Self> {
        check_n(n)?;
        let kmax = max_weight / 4;
        if schur_term_count(n / 2, kmax) > SCHUR_TERM_CAP as f64 {
            return Err(Error::SchurUnavailable(format!(
                "more than {SCHUR_TERM_CAP} alternant terms at max_weight {max_weight}"
            )));
        }
        let base = (n * (n - 1) / 2) as i32;
        let mut terms = Vec::new();
        let mut max_exp = 0;
        for k in 0..=kmax {
            visit_partitions_in_box(k, k, n / 2, &mut |mu| {
                let mut key = vec![0u32; n];
                for (i, &a) in mu.iter().enumerate() {
                    key[2 * i] = 2 * a;
                    key[2 * i + 1] = 2 * a;
                }
                for (j, v) in key.iter_mut().enumerate() {
                    *v += (n - 1 - j) as u32;
                }
                max_exp = max_exp.max(key[0]);
                terms.push((key, r.powi(4 * k as i32 + base)));
            });
        }
        Ok(SchurSum { n, terms, max_exp })
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// `sum r^{|lambda| + N(N-1)/2} a_{lambda+delta}(x)` (no C, no 1/sqrt(N!)).
    pub fn eval(&self, x: &CircleConfig) -> C64 {
        let n = self.n;
        let p = x.points();
        let width = self.max_exp as usize + 1;
        let mut pow = vec![C64::new(1.0, 0.0); n * width];
        for i in 0..n {
            for e in 1..width {
                pow[i * width + e] = pow[i * width + e - 1] * p[i];
            }
        }
        let mut acc = C64::default();
        for (key, w) in &self.terms {
            let m = nalgebra::DMatrix::from_fn(n, n, |i, j| pow[i * width + key[j] as usize]);
            acc += det(&m) * *w;
        }
        acc
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GValue {
    pub value: C64,
    /// Certified bound on the omitted part (0 in Jastrow mode).
    pub tail_bound: f64,
}

/// `C sqrt(N!) prod 1/(1 - r^4 x_i^2 x_j^2) (1/N!) det[phi_i(x_j)]` without C.
pub fn jastrow_form_c_free(x: &CircleConfig, n: usize, r: f64, phi: &[Orbital]) -> Result<C64> {
    if x.len() != n {
        return Err(Error::DimensionMismatch { left: x.len(), right: n });
    }
    Ok(orbital_order_sign(n) * factorial(n).sqrt() * jastrow_prefactor(x, r) * slater_value(phi, x)?)
}

/// G at x.
pub fn eval_g(x: &CircleConfig, params: &HardFnParams, mode: EvalMode) -> Result<GValue> {
    let n = params.n;
    if x.len() != n {
        return Err(Error::DimensionMismatch { left: x.len(), right: n });
    }
    match mode {
        EvalMode::Jastrow => {
            let phi = orbitals(n, params.r, OrbitalFamily::Phi)?;
            Ok(GValue { value: params.c * jastrow_form_c_free(x, n, params.r, &phi)?, tail_bound: 0.0 })
        }
        EvalMode::SchurTruncated => {
            let w = params.max_weight.ok_or_else(|| {
                Error::SchurUnavailable(format!("r = {} needs more than {SCHUR_TERM_CAP} terms", params.r))
            })?;
            let rel = params.schur_relative_tail.unwrap_or(f64::INFINITY);
            if rel > params.tail_tol {
                return Err(Error::TruncationTooCoarse { tail: rel, tol: params.tail_tol });
            }
            let tail = params.schur_tail_bound.unwrap_or(f64::INFINITY);
            let sum = SchurSum::new(n, params.r, w)?;
            let scale = params.c / factorial(n).sqrt();
            Ok(GValue { value: sum.eval(x) * scale, tail_bound: tail })
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PfaffianReport {
    pub n: usize,
    pub r: f64,
    pub trials: usize,
    pub max_weight: usize,
    pub schur_terms: usize,
    /// C-free sup bound on the omitted Schur terms.
    pub tail_bound: f64,
    pub max_rel_disagreement: f64,
    pub max_schur_vs_pfaffian: f64,
    pub max_pfaffian_vs_jastrow: f64,
    pub max_schur_vs_jastrow: f64,
    pub tol: f64,
    pub pass: bool,
}

fn rel_gap(a: C64, b: C64, scale: f64) -> f64 {
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// Three-way check of Schur sum, Pfaffian and Jastrow form at random points.
pub fn verify_pfaffian_identity(n: usize, r: f64, trials: usize, tol: f64, seed: u64) -> Result<PfaffianReport> {
    check_n(n)?;
    if !(0.0..1.0).contains(&r) {
        return Err(Error::InvalidParameter(format!("r = {r} outside [0, 1)")));
    }
    let max_weight = if r == 0.0 {
        0
    } else {
        schur_max_weight(n, r, 1e-3 * tol)
            .ok_or_else(|| Error::SchurUnavailable(format!("r = {r} too close to 1 for the Schur sum")))?
    };
    let tail_bound = if r == 0.0 { 0.0 } else { schur_sup_tail(n, r, max_weight / 4) };
    let sum = SchurSum::new(n, r, max_weight)?;
    let phi = orbitals(n, r, OrbitalFamily::Phi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sp, mut pj, mut sj) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..trials {
        let x = CircleConfig::random(n, &mut rng);
        let a = sum.eval(&x);
        let b = pfaffian(&pfaffian_kernel(&x, r))?;
        let c = orbital_order_sign(n) * jastrow_prefactor(&x, r) * slater_value(&phi, &x)? * factorial(n);
        let scale = a.norm().max(b.norm()).max(c.norm());
        sp = sp.max(rel_gap(a, b, scale));
        pj = pj.max(rel_gap(b, c, scale));
        sj = sj.max(rel_gap(a, c, scale));
    }
    let worst = sp.max(pj).max(sj);
    Ok(PfaffianReport {
        n,
        r,
        trials,
        max_weight,
        schur_terms: sum.num_terms(),
        tail_bound,
        max_rel_disagreement: worst,
        max_schur_vs_pfaffian: sp,
        max_pfaffian_vs_jastrow: pj,
        max_schur_vs_jastrow: sj,
        tol,
        pass: worst < tol,
    })
}

/// Monte-Carlo estimate of `||G||^2` with its standard error.
pub fn monte_carlo_norm_sq(params: &HardFnParams, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let phi = orbitals(params.n, params.r, OrbitalFamily::Phi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vals = Vec::with_capacity(samples);
    for _ in 0..samples {
        let x = CircleConfig::random(params.n, &mut rng);
        let g = params.c * jastrow_form_c_free(&x, params.n, params.r, &phi)?;
        vals.push(g.norm_sqr());
    }
    let mean = vals.iter().sum::<f64>() / samples as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples as f64 - 1.0);
    Ok((mean, (var / samples as f64).sqrt()))
}
