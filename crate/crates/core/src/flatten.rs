//! Flattening of antisymmetric coefficient tensors into matrices over
//! odd-exponent rows and even-exponent columns, low-rank errors, and the
//! separation lower bounds.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardfn::{ln_euler_product_from, restricted_product, CMode, HardFnParams};
use crate::partitions::{big_ln, partition_count, partition_counts, visit_partitions_in_box};
use crate::symfunc::{canonicalize, AntisymCoeffs, Orbital};
use crate::{factorial, ln_factorial, C64};

/// Cap on the number of row (or column) indices.
pub const INDEX_CAP: usize = 200_000;

/// Row and column index sets of a flattening.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatIndex {
    pub n: usize,
    pub max_exp: u32,
    /// strictly decreasing, all odd, descending lexicographic
    pub rows: Vec<Vec<u32>>,
    /// strictly decreasing, all even, descending lexicographic
    pub cols: Vec<Vec<u32>>,
    row_pos: HashMap<Vec<u32>, usize>,
    col_pos: HashMap<Vec<u32>, usize>,
}

fn descending_subsets(values: &[u32], len: usize, cap: usize) -> Result<Vec<Vec<u32>>> {
    let count = binomial_f64(values.len(), len);
    if count > cap as f64 {
        return Err(Error::BudgetExceeded { what: "flatten index", cap });
    }
    fn rec(start: usize, values: &[u32], len: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for s in start..values.len() {
            if values.len() - s < len - cur.len() {
                break;
            }
            cur.push(values[s]);
            rec(s + 1, values, len, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, values, len, &mut Vec::with_capacity(len), &mut out);
    Ok(out)
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
}

/// Row `beta` and column `gamma` index sets with entries at most `max_exp`.
pub fn build_index(n: usize, max_exp: u32) -> Result<FlatIndex> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!("N = {n} must be even and at least 2")));
    }
    if (max_exp as usize) < n - 1 {
        return Err(Error::InvalidParameter(format!("max_exp {max_exp} < N - 1")));
    }
    let odd: Vec<u32> = (0..=max_exp).rev().filter(|v| v % 2 == 1).collect();
    let even: Vec<u32> = (0..=max_exp).rev().filter(|v| v % 2 == 0).collect();
    let rows = descending_subsets(&odd, n / 2, INDEX_CAP)?;
    let cols = descending_subsets(&even, n / 2, INDEX_CAP)?;
    let row_pos = rows.iter().enumerate().map(|(i, b)| (b.clone(), i)).collect();
    let col_pos = cols.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect();
    Ok(FlatIndex { n, max_exp, rows, cols, row_pos, col_pos })
}

impl FlatIndex {
    pub fn row_of(&self, beta: &[u32]) -> Option<usize> {
        self.row_pos.get(beta).copied()
    }

    pub fn col_of(&self, gamma: &[u32]) -> Option<usize> {
        self.col_pos.get(gamma).copied()
    }

    /// The row paired with column `j`: `gamma^{(j)} + 1`.
    pub fn paired_row(&self, j: usize) -> Option<usize> {
        let shifted: Vec<u32> = self.cols[j].iter().map(|g| g + 1).collect();
        self.row_of(&shifted)
    }
}

/// A flattened matrix with sparse entries and an optional rank-one factorization.
#[derive(Clone, Debug)]
pub struct FlatMatrix {
    pub index: FlatIndex,
    pub entries: BTreeMap<(usize, usize), C64>,
    pub factors: Option<(Vec<C64>, Vec<C64>)>,
}

impl FlatMatrix {
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries.get(&(i, j)).copied().unwrap_or_default()
    }

    pub fn nrows(&self) -> usize {
        self.index.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.index.cols.len()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries.values().map(|z| z.norm_sqr()).sum()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.nrows(), self.ncols());
        for (&(i, j), &v) in &self.entries {
            m[(i, j)] = v;
        }
        m
    }

    /// True when every row and every column holds at most one nonzero.
    pub fn is_monomial(&self) -> bool {
        let mut rows = vec![false; self.nrows()];
        let mut cols = vec![false; self.ncols()];
        for &(i, j) in self.entries.keys() {
            if rows[i] || cols[j] {
                return false;
            }
            rows[i] = true;
            cols[j] = true;
        }
        true
    }

    /// Entries off the pairing `(gamma + 1, gamma)`.
    pub fn off_pairing_entries(&self) -> Vec<(usize, usize, C64)> {
        self.entries
            .iter()
            .filter(|(&(i, j), _)| self.index.paired_row(j) != Some(i))
            .map(|(&(i, j), &v)| (i, j, v))
            .collect()
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        if self.is_monomial() {
            let mut s: Vec<f64> = self.entries.values().map(|z| z.norm()).collect();
            s.sort_by(|a, b| b.total_cmp(a));
            return s;
        }
        let mut s: Vec<f64> = self.to_dense().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }
}

/// `<H, x^{beta ∪ gamma}>` by canonical lookup.
pub fn flat_entry(h: &AntisymCoeffs<C64>, beta: &[u32], gamma: &[u32]) -> C64 {
    let v: Vec<u32> = beta.iter().chain(gamma).copied().collect();
    h.coefficient_of(&v)
}

/// Flattening of an antisymmetric polynomial: each canonical key with exactly
/// N/2 odd entries lands at one (beta, gamma) cell with the sign of the
/// permutation sorting `beta ∪ gamma`.
pub fn flatten_antisym(h: &AntisymCoeffs<C64>, max_exp: u32) -> Result<FlatMatrix> {
    let index = build_index(h.n(), max_exp)?;
    let half = h.n() / 2;
    let mut entries = BTreeMap::new();
    for (alpha, &c) in h.iter() {
        if c == C64::zero() || alpha[0] > max_exp {
            continue;
        }
        let beta: Vec<u32> = alpha.iter().copied().filter(|a| a % 2 == 1).collect();
        if beta.len() != half {
            continue;
        }
        let gamma: Vec<u32> = alpha.iter().copied().filter(|a| a % 2 == 0).collect();
        let concat: Vec<u32> = beta.iter().chain(&gamma).copied().collect();
        let (_, sign) = canonicalize(&concat).expect("alpha has distinct entries");
        let (i, j) = (index.row_of(&beta).expect("in range"), index.col_of(&gamma).expect("in range"));
        entries.insert((i, j), if sign < 0 { -c } else { c });
    }
    Ok(FlatMatrix { index, entries, factors: None })
}

/// Truncated alternant expansion of G: doubly-even lambda with
/// `lambda_1 + N - 1 <= max_exp` and `l(lambda) <= N`.
pub fn g_coeffs(params: &HardFnParams, max_exp: u32) -> Result<AntisymCoeffs<C64>> {
    let n = params.n;
    let r = params.r;
    let mut out = AntisymCoeffs::new(n);
    if (max_exp as usize) < n - 1 {
        return Ok(out);
    }
    let top = (max_exp as usize + 1 - n) / 2;
    let scale = params.c / factorial(n).sqrt();
    let base = (n * (n - 1) / 2) as i32;
    let max_k = top * (n / 2);
    let count: f64 = crate::hardfn::restricted_series(1.0, n / 2, max_k).iter().sum();
    if count > 4.0 * INDEX_CAP as f64 {
        return Err(Error::BudgetExceeded { what: "flatten_g terms", cap: 4 * INDEX_CAP });
    }
    for k in 0..=max_k {
        visit_partitions_in_box(k, top, n / 2, &mut |mu| {
            let mut key = vec![0u32; n];
            for (i, &a) in mu.iter().enumerate() {
                key[2 * i] = 2 * a;
                key[2 * i + 1] = 2 * a;
            }
            for (j, v) in key.iter_mut().enumerate() {
                *v += (n - 1 - j) as u32;
            }
            let w = C64::new(scale * r.powi(4 * k as i32 + base), 0.0);
            out.add_term(&key, w).expect("length n");
        });
    }
    Ok(out)
}

/// `M(G)` over the index set with entries at most `max_exp`.
pub fn flatten_g(params: &HardFnParams, max_exp: u32) -> Result<FlatMatrix> {
    flatten_antisym(&g_coeffs(params, max_exp)?, max_exp)
}

/// `M(f_1 ⊗ ... ⊗ f_N) = u v^T`, with `u_beta = prod_n coeff(f_n, beta_n)`
/// and `v_gamma = prod_n coeff(f_{N/2+n}, gamma_n)`.
pub fn flatten_slater(orbitals: &[Orbital], max_exp: u32) -> Result<FlatMatrix> {
    let n = orbitals.len();
    let index = build_index(n, max_exp)?;
    let half = n / 2;
    let u: Vec<C64> = index
        .rows
        .iter()
        .map(|b| b.iter().enumerate().map(|(k, &e)| orbitals[k].coeff(e)).product())
        .collect();
    let v: Vec<C64> = index
        .cols
        .iter()
        .map(|g| g.iter().enumerate().map(|(k, &e)| orbitals[half + k].coeff(e)).product())
        .collect();
    let mut entries = BTreeMap::new();
    for (i, &ui) in u.iter().enumerate() {
        if ui == C64::zero() {
            continue;
        }
        for (j, &vj) in v.iter().enumerate() {
            let e = ui * vj;
            if e != C64::zero() {
                entries.insert((i, j), e);
            }
        }
    }
    Ok(FlatMatrix { index, entries, factors: Some((u, v)) })
}

/// Frobenius distance from `m` to its best rank-`budget` approximation.
pub fn low_rank_error(m: &FlatMatrix, budget: usize) -> f64 {
    m.singular_values().iter().skip(budget).map(|s| s * s).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparationMode {
    PaperChain,
    ExactTruncated,
}

/// One link of the inequality chain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainLink {
    pub label: String,
    pub value: f64,
    /// whether this link is at most the previous one (true for the first)
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeparationReport {
    pub mode: SeparationMode,
    pub n: usize,
    pub r: f64,
    pub ln_l: f64,
    /// certified lower bound on `min_F ||F - G||^2`
    pub value: f64,
    /// rank condition `L N! <= p(N^4)` (chain mode only)
    pub applicable: bool,
    pub ln_rank_budget: f64,
    pub ln_p_n4: Option<f64>,
    pub links: Vec<ChainLink>,
    /// exact-truncated details
    pub rank_budget: Option<usize>,
    pub max_exp: Option<u32>,
    pub captured_mass: Option<f64>,
    pub truncation_residual: Option<f64>,
}

/// `ceil(e^x)` as a big integer; `None` when `e^x` overflows f64.
pub fn ceil_exp(x: f64) -> Option<BigUint> {
    BigUint::from_f64(x.exp().ceil())
}

/// Lower bound on `min_F ||F - G||^2` over Slater sums with L terms.
pub fn separation_lower_bound(n: usize, r: f64, l: &BigUint, mode: SeparationMode) -> Result<SeparationReport> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!("N = {n} must be even and at least 2")));
    }
    if l.is_zero() {
        return Err(Error::InvalidParameter("L must be at least 1".into()));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!("r = {r} must lie in (0, 1)")));
    }
    match mode {
        SeparationMode::PaperChain => paper_chain(n, r, l),
        SeparationMode::ExactTruncated => exact_truncated(n, r, l, None),
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn paper_chain(n: usize, r: f64, l: &BigUint) -> Result<SeparationReport> {
    let n4 = n.pow(4);
    let q = r.powi(8);
    let ln_q = 8.0 * r.ln();
    let ln_l = big_ln(l);
    let ln_budget = ln_l + ln_factorial(n);
    let counts = partition_counts(n4, None);
    let ln_p: Vec<f64> = counts.iter().map(big_ln).collect();
    let ln_p_n4 = ln_p[n4];
    let applicable = ln_budget <= ln_p_n4;

    // closed-form C: C^2 r^{N(N-1)} = prod_{k>=1} (1 - q^k)
    let (ln_full, _, _) = ln_euler_product_from(q, 1, 1e-17)?;
    let terms: Vec<f64> = ln_p.iter().enumerate().map(|(k, lp)| lp + k as f64 * ln_q).collect();
    let ln_head = log_sum_exp(&terms);
    // 1 - prod(1-q^k) * sum_{k<=N^4} q^k p(k)
    let a = -(ln_full + ln_head).exp_m1();
    // 1 - prod_{k > N^4} (1 - q^k)
    let (ln_tail_prod, _, _) = ln_euler_product_from(q, n4 + 1, 1e-17)?;
    let b = -ln_tail_prod.exp_m1();
    // r^{8N^4 + 8}
    let c = ((8 * n4 + 8) as f64 * r.ln()).exp();
    let d = (15.0f64 / 16.0).powi(16);
    let vals = [
        ("1 - C^2 r^{N(N-1)} sum_{k<=N^4} r^{8k} p(k)", a),
        ("1 - prod_{k>N^4} (1 - r^{8k})", b),
        ("r^{8N^4+8}", c),
        ("(15/16)^16", d),
    ];
    let mut links = Vec::new();
    let mut value = if applicable { a } else { 0.0 };
    let mut prev = f64::INFINITY;
    let mut chain_ok = applicable;
    for (label, v) in vals {
        // tiny slack for the rounding of values that agree to all digits
        let holds = v <= prev * (1.0 + 1e-12);
        links.push(ChainLink { label: label.to_string(), value: v, holds });
        if chain_ok && holds {
            value = v;
        } else {
            chain_ok = false;
        }
        prev = v;
    }
    Ok(SeparationReport {
        mode: SeparationMode::PaperChain,
        n,
        r,
        ln_l,
        value,
        applicable,
        ln_rank_budget: ln_budget,
        ln_p_n4: Some(ln_p_n4),
        links,
        rank_budget: None,
        max_exp: None,
        captured_mass: None,
        truncation_residual: None,
    })
}

/// Smallest odd `max_exp` whose omitted diagonal mass is below `tol` (with
/// `C` from exact-restricted mode).
pub fn exact_max_exp(n: usize, r: f64, tol: f64) -> u32 {
    let q = r.powi(8);
    let m = n / 2;
    // every omitted lambda has lambda_1 >= 2(top+1), hence weight >= 4(top+1)
    let mut top = 0usize;
    loop {
        let tail = crate::hardfn::restricted_tail_bound(q, m, top + 1) / restricted_product(q, m);
        if tail <= tol {
            return (2 * top + n - 1) as u32;
        }
        top += 1;
    }
}

/// `N! * low_rank_error(M(G_trunc), L N!)^2`, reported with the truncation
/// residual so that the certified bound is one-sided.
pub fn exact_truncated(n: usize, r: f64, l: &BigUint, max_exp: Option<u32>) -> Result<SeparationReport> {
    let budget_big = l * BigUint::from((1..=n as u64).product::<u64>());
    let mut rep = exact_truncated_budget(n, r, budget_big.to_usize().unwrap_or(usize::MAX), max_exp)?;
    rep.ln_l = big_ln(l);
    rep.ln_rank_budget = big_ln(&budget_big);
    Ok(rep)
}

/// [`exact_truncated`] with the rank budget given directly.
pub fn exact_truncated_budget(n: usize, r: f64, budget: usize, max_exp: Option<u32>) -> Result<SeparationReport> {
    let params = HardFnParams::new(n, r, CMode::ExactRestricted)?;
    let max_exp = max_exp.unwrap_or_else(|| exact_max_exp(n, r, 1e-12));
    let m = flatten_g(&params, max_exp)?;
    let nf = factorial(n);
    let err = low_rank_error(&m, budget);
    let value = nf * err * err;
    let captured = nf * m.frobenius_sq();
    // norm is 1 up to the certified relative error of C
    let residual = (1.0 - captured).max(0.0);
    Ok(SeparationReport {
        mode: SeparationMode::ExactTruncated,
        n,
        r,
        ln_l: ((budget as f64) / nf).ln(),
        value,
        applicable: true,
        ln_rank_budget: (budget as f64).ln(),
        ln_p_n4: None,
        links: Vec::new(),
        rank_budget: Some(budget),
        max_exp: Some(max_exp),
        captured_mass: Some(captured),
        truncation_residual: Some(residual),
    })
}

/// One inequality with its two sides (natural-log scale).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LogInequality {
    pub label: String,
    pub ln_lhs: f64,
    pub ln_rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarotiReport {
    pub n: usize,
    pub p_n4_digits: usize,
    pub checks: Vec<LogInequality>,
    pub pass: bool,
}

/// Checks `N^N <= e^{N^2}/14`, `e^{2N^2}/14 <= p(N^4)` and
/// `e^{N^2} N! <= p(N^4)` with exact `p(N^4)` compared in log space.
pub fn verify_maroti_chain(n: usize) -> Result<MarotiReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("N = {n} must be at least 2")));
    }
    let nf = n as f64;
    let p = partition_count(n.pow(4), None);
    let ln_p = big_ln(&p);
    let ln14 = 14f64.ln();
    let mk = |label: &str, l: f64, r: f64| LogInequality { label: label.to_string(), ln_lhs: l, ln_rhs: r, holds: l <= r };
    let checks = vec![
        mk("N^N <= e^{N^2}/14", nf * nf.ln(), nf * nf - ln14),
        mk("e^{2N^2}/14 <= p(N^4)", 2.0 * nf * nf - ln14, ln_p),
        mk("e^{N^2} N! <= p(N^4)", nf * nf + ln_factorial(n), ln_p),
    ];
    let pass = checks.iter().all(|c| c.holds);
    Ok(MarotiReport { n, p_n4_digits: p.to_string().len(), checks, pass })
}
