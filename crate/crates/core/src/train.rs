//! Complex-valued Slater and Jastrow ansatz networks trained by full-batch
//! gradient descent against the C-free hard function.
//!
//! Gradients follow the adjoint convention `adj(z) = dL/dRe z + i dL/dIm z`.
//! A holomorphic map `w = f(z)` pulls back as `adj(z) = conj(f'(z)) adj(w)`,
//! and a gradient step subtracts `lr * adj` from each complex parameter.

use std::time::Instant;

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hardfn::{jastrow_form_c_free, orbitals, CMode, HardFnParams, OrbitalFamily};
use crate::symfunc::CircleConfig;
use crate::{factorial, C64};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;
const DIVERGENCE_LOSS: f64 = 1e6;
const ANTISYM_CHECK_EVERY: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Act {
    /// `a + bi -> relu(a) + relu(b) i`
    CRelu,
    Identity,
}

/// How a complex scalar is fed to the first layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    Raw,
    /// `(1, z, .., z^d)`
    Powers(usize),
}

#[derive(Clone, Debug)]
pub struct Layer {
    pub w_re: Array2<f64>,
    pub w_im: Array2<f64>,
    pub b_re: Array1<f64>,
    pub b_im: Array1<f64>,
}

impl Layer {
    fn zeros(out: usize, inp: usize) -> Self {
        Layer {
            w_re: Array2::zeros((out, inp)),
            w_im: Array2::zeros((out, inp)),
            b_re: Array1::zeros(out),
            b_im: Array1::zeros(out),
        }
    }

    fn param_count(&self) -> usize {
        2 * (self.w_re.len() + self.b_re.len())
    }
}

/// Fully connected complex network; hidden layers use `act`, the output layer
/// is linear.
#[derive(Clone, Debug)]
pub struct ComplexMLP {
    pub sizes: Vec<usize>,
    pub layers: Vec<Layer>,
    pub act: Act,
    pub encoding: Encoding,
}

pub struct MlpCache {
    inputs: Vec<(Array2<f64>, Array2<f64>)>,
    pres: Vec<(Array2<f64>, Array2<f64>)>,
}

fn relu(v: f64) -> f64 {
    v.max(0.0)
}

impl ComplexMLP {
    /// Complex Glorot initialization: real and imaginary parts independent
    /// with variance `1/(fan_in + fan_out)`, zero biases.
    pub fn glorot<R: Rng + ?Sized>(sizes: &[usize], act: Act, rng: &mut R) -> Self {
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (inp, out) = (w[0], w[1]);
                let normal = Normal::new(0.0, (1.0 / (inp + out) as f64).sqrt()).expect("positive variance");
                let mut l = Layer::zeros(out, inp);
                l.w_re.mapv_inplace(|_| normal.sample(rng));
                l.w_im.mapv_inplace(|_| normal.sample(rng));
                l
            })
            .collect();
        ComplexMLP { sizes: sizes.to_vec(), layers, act, encoding: Encoding::Raw }
    }

    /// One linear layer on power features: `z -> sum_k coeffs[k] z^k`.
    pub fn polynomial(coeffs: &[C64]) -> Self {
        let d = coeffs.len().max(1) - 1;
        let mut l = Layer::zeros(1, d + 1);
        for (k, c) in coeffs.iter().enumerate() {
            l.w_re[(0, k)] = c.re;
            l.w_im[(0, k)] = c.im;
        }
        ComplexMLP { sizes: vec![d + 1, 1], layers: vec![l], act: Act::Identity, encoding: Encoding::Powers(d) }
    }

    pub fn input_dim(&self) -> usize {
        match self.encoding {
            Encoding::Raw => self.sizes[0],
            Encoding::Powers(_) => 1,
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    pub fn write_params(&self, out: &mut Vec<f64>) {
        for l in &self.layers {
            out.extend(l.w_re.iter());
            out.extend(l.w_im.iter());
            out.extend(l.b_re.iter());
            out.extend(l.b_im.iter());
        }
    }

    /// Reads parameters in [`write_params`](Self::write_params) order and
    /// returns how many were consumed.
    pub fn read_params(&mut self, src: &[f64]) -> usize {
        let mut it = src.iter();
        for l in &mut self.layers {
            for v in l.w_re.iter_mut().chain(l.w_im.iter_mut()).chain(l.b_re.iter_mut()).chain(l.b_im.iter_mut()) {
                *v = *it.next().expect("parameter slice too short");
            }
        }
        src.len() - it.len()
    }

    fn encode(&self, z_re: &Array2<f64>, z_im: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
        match self.encoding {
            Encoding::Raw => (z_re.clone(), z_im.clone()),
            Encoding::Powers(d) => {
                let b = z_re.ncols();
                let mut re = Array2::zeros((d + 1, b));
                let mut im = Array2::zeros((d + 1, b));
                for c in 0..b {
                    let z = C64::new(z_re[(0, c)], z_im[(0, c)]);
                    let mut p = C64::new(1.0, 0.0);
                    for k in 0..=d {
                        re[(k, c)] = p.re;
                        im[(k, c)] = p.im;
                        p *= z;
                    }
                }
                (re, im)
            }
        }
    }

    /// Batched forward; inputs and outputs are `(features, batch)`.
    pub fn forward_batch(&self, z_re: &Array2<f64>, z_im: &Array2<f64>) -> (Array2<f64>, Array2<f64>, MlpCache) {
        let (mut zr, mut zi) = self.encode(z_re, z_im);
        let last = self.layers.len() - 1;
        let mut cache = MlpCache { inputs: Vec::with_capacity(self.layers.len()), pres: Vec::with_capacity(last) };
        for (idx, l) in self.layers.iter().enumerate() {
            let mut pr = l.w_re.dot(&zr) - l.w_im.dot(&zi);
            let mut pi = l.w_re.dot(&zi) + l.w_im.dot(&zr);
            pr += &l.b_re.view().insert_axis(Axis(1));
            pi += &l.b_im.view().insert_axis(Axis(1));
            cache.inputs.push((zr, zi));
            if idx < last && self.act == Act::CRelu {
                zr = pr.mapv(relu);
                zi = pi.mapv(relu);
                cache.pres.push((pr, pi));
            } else {
                zr = pr;
                zi = pi;
            }
        }
        (zr, zi, cache)
    }

    pub fn eval(&self, inputs: &[C64]) -> C64 {
        let zr = Array2::from_shape_fn((inputs.len(), 1), |(i, _)| inputs[i].re);
        let zi = Array2::from_shape_fn((inputs.len(), 1), |(i, _)| inputs[i].im);
        let (r, i, _) = self.forward_batch(&zr, &zi);
        C64::new(r[(0, 0)], i[(0, 0)])
    }

    /// Accumulates the parameter adjoint into `grad` (layout of
    /// [`write_params`](Self::write_params)); returns the input adjoint.
    pub fn backward(
        &self,
        cache: &MlpCache,
        mut ar: Array2<f64>,
        mut ai: Array2<f64>,
        grad: &mut [f64],
    ) -> (Array2<f64>, Array2<f64>) {
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut o = 0;
        for l in &self.layers {
            offsets.push(o);
            o += l.param_count();
        }
        for idx in (0..self.layers.len()).rev() {
            let l = &self.layers[idx];
            if idx + 1 < self.layers.len() && self.act == Act::CRelu {
                let (pr, pi) = &cache.pres[idx];
                ndarray::Zip::from(&mut ar).and(pr).for_each(|a, &p| {
                    if p <= 0.0 {
                        *a = 0.0
                    }
                });
                ndarray::Zip::from(&mut ai).and(pi).for_each(|a, &p| {
                    if p <= 0.0 {
                        *a = 0.0
                    }
                });
            }
            let (zr, zi) = &cache.inputs[idx];
            let gw_re = ar.dot(&zr.t()) + ai.dot(&zi.t());
            let gw_im = ai.dot(&zr.t()) - ar.dot(&zi.t());
            let gb_re = ar.sum_axis(Axis(1));
            let gb_im = ai.sum_axis(Axis(1));
            let mut g = grad[offsets[idx]..].iter_mut();
            for v in gw_re.iter().chain(gw_im.iter()).chain(gb_re.iter()).chain(gb_im.iter()) {
                *g.next().expect("gradient slice too short") += v;
            }
            let nr = l.w_re.t().dot(&ar) + l.w_im.t().dot(&ai);
            let ni = l.w_re.t().dot(&ai) - l.w_im.t().dot(&ar);
            ar = nr;
            ai = ni;
        }
        (ar, ai)
    }
}

/// Determinant and cofactor matrix of a small row-major complex matrix.
pub fn det_and_cofactors(a: &[C64], n: usize) -> (C64, Vec<C64>) {
    let d = small_det(a.to_vec(), n);
    if n == 1 {
        return (d, vec![C64::new(1.0, 0.0)]);
    }
    let mut cof = vec![C64::default(); n * n];
    let mut minor = Vec::with_capacity((n - 1) * (n - 1));
    for i in 0..n {
        for j in 0..n {
            minor.clear();
            for r in (0..n).filter(|&r| r != i) {
                for c in (0..n).filter(|&c| c != j) {
                    minor.push(a[r * n + c]);
                }
            }
            let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            cof[i * n + j] = small_det(minor.clone(), n - 1) * s;
        }
    }
    (d, cof)
}

fn small_det(mut m: Vec<C64>, n: usize) -> C64 {
    let mut det = C64::new(1.0, 0.0);
    for k in 0..n {
        let p = (k..n).max_by(|&a, &b| m[a * n + k].norm().total_cmp(&m[b * n + k].norm())).expect("nonempty");
        if m[p * n + k] == C64::default() {
            return C64::default();
        }
        if p != k {
            for c in 0..n {
                m.swap(k * n + c, p * n + c);
            }
            det = -det;
        }
        let piv = m[k * n + k];
        det *= piv;
        for r in k + 1..n {
            let f = m[r * n + k] / piv;
            for c in k..n {
                let v = m[k * n + c];
                m[r * n + c] -= f * v;
            }
        }
    }
    det
}

/// Circle samples and their C-free targets.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub n: usize,
    /// row-major `(samples, n)`
    pub xs: Vec<C64>,
    pub targets: Vec<C64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn point(&self, s: usize) -> &[C64] {
        &self.xs[s * self.n..(s + 1) * self.n]
    }

    /// `mean |y|^2`, the loss of the zero predictor.
    pub fn zero_loss(&self) -> f64 {
        self.targets.iter().map(|t| t.norm_sqr()).sum::<f64>() / self.len() as f64
    }
}

/// `count` i.i.d. uniform circle configurations with targets `G(x)/C`.
pub fn sample_dataset(n: usize, count: usize, params: &HardFnParams, seed: u64) -> Result<Dataset> {
    if params.n != n {
        return Err(Error::DimensionMismatch { left: n, right: params.n });
    }
    let phi = orbitals(n, params.r, OrbitalFamily::Phi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(n * count);
    let mut targets = Vec::with_capacity(count);
    for _ in 0..count {
        let x = CircleConfig::random(n, &mut rng);
        targets.push(jastrow_form_c_free(&x, n, params.r, &phi)?);
        xs.extend_from_slice(x.points());
    }
    Ok(Dataset { n, xs, targets })
}

#[derive(Clone, Debug)]
pub struct SlaterModel {
    pub n: usize,
    /// `orbitals[l][i]`
    pub orbitals: Vec<Vec<ComplexMLP>>,
}

#[derive(Clone, Debug)]
pub struct JastrowModel {
    pub n: usize,
    pub orbitals: Vec<ComplexMLP>,
    /// pair network `C^2 -> C`
    pub pair: ComplexMLP,
}

#[derive(Clone, Debug)]
pub enum Model {
    Slater(SlaterModel),
    Jastrow(JastrowModel),
}

fn row(values: &[C64]) -> (Array2<f64>, Array2<f64>) {
    (
        Array2::from_shape_fn((1, values.len()), |(_, c)| values[c].re),
        Array2::from_shape_fn((1, values.len()), |(_, c)| values[c].im),
    )
}

/// Product of the pair factors in a canonical order, so the result is exactly
/// invariant under relabeling the particles.
fn sym_product(factors: &[C64]) -> C64 {
    let mut v = factors.to_vec();
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v.iter().product()
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Inputs `(x_i, x_j)` then `(x_j, x_i)` for every sample and pair.
fn pair_inputs(data: &Dataset) -> (Array2<f64>, Array2<f64>) {
    let pr = pairs(data.n);
    let b = data.len() * pr.len() * 2;
    let mut re = Array2::zeros((2, b));
    let mut im = Array2::zeros((2, b));
    let mut c = 0;
    for s in 0..data.len() {
        let x = data.point(s);
        for &(i, j) in &pr {
            for (a, bb) in [(x[i], x[j]), (x[j], x[i])] {
                re[(0, c)] = a.re;
                im[(0, c)] = a.im;
                re[(1, c)] = bb.re;
                im[(1, c)] = bb.im;
                c += 1;
            }
        }
    }
    (re, im)
}

impl Model {
    pub fn n(&self) -> usize {
        match self {
            Model::Slater(m) => m.n,
            Model::Jastrow(m) => m.n,
        }
    }

    fn mlps(&self) -> Vec<&ComplexMLP> {
        match self {
            Model::Slater(m) => m.orbitals.iter().flatten().collect(),
            Model::Jastrow(m) => m.orbitals.iter().chain(std::iter::once(&m.pair)).collect(),
        }
    }

    fn mlps_mut(&mut self) -> Vec<&mut ComplexMLP> {
        match self {
            Model::Slater(m) => m.orbitals.iter_mut().flatten().collect(),
            Model::Jastrow(m) => m.orbitals.iter_mut().chain(std::iter::once(&mut m.pair)).collect(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.mlps().iter().map(|m| m.param_count()).sum()
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for m in self.mlps() {
            m.write_params(&mut out);
        }
        out
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let mut off = 0;
        for m in self.mlps_mut() {
            off += m.read_params(&p[off..]);
        }
    }

    /// SHA-256 of the little-endian parameter bytes.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for v in self.params() {
            h.update(v.to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Orbital matrices `A[s][i][j] = f_i(x_{s,j})`, row-major per sample.
    fn orbital_matrices(orbs: &[ComplexMLP], data: &Dataset, keep: bool) -> (Vec<C64>, Vec<MlpCache>) {
        let n = data.n;
        let (zr, zi) = row(&data.xs);
        let mut a = vec![C64::default(); data.len() * n * n];
        let mut caches = Vec::new();
        for (i, f) in orbs.iter().enumerate() {
            let (or, oi, cache) = f.forward_batch(&zr, &zi);
            for s in 0..data.len() {
                for j in 0..n {
                    a[s * n * n + i * n + j] = C64::new(or[(0, s * n + j)], oi[(0, s * n + j)]);
                }
            }
            if keep {
                caches.push(cache);
            }
        }
        (a, caches)
    }

    fn pair_values(pair: &ComplexMLP, data: &Dataset) -> (Array2<f64>, Array2<f64>, MlpCache) {
        let (re, im) = pair_inputs(data);
        pair.forward_batch(&re, &im)
    }

    /// Symmetrized pair factors `s_ij` per sample in pair order.
    fn pair_factors(hr: &Array2<f64>, hi: &Array2<f64>, samples: usize, npairs: usize) -> Vec<C64> {
        (0..samples * npairs)
            .map(|p| 0.5 * (C64::new(hr[(0, 2 * p)], hi[(0, 2 * p)]) + C64::new(hr[(0, 2 * p + 1)], hi[(0, 2 * p + 1)])))
            .collect()
    }

    pub fn forward(&self, data: &Dataset) -> Result<Vec<C64>> {
        let n = self.n();
        if data.n != n {
            return Err(Error::DimensionMismatch { left: data.n, right: n });
        }
        let nf = factorial(n);
        let nn = n * n;
        match self {
            Model::Slater(m) => {
                let mut out = vec![C64::default(); data.len()];
                for orbs in &m.orbitals {
                    let (a, _) = Self::orbital_matrices(orbs, data, false);
                    for (s, o) in out.iter_mut().enumerate() {
                        *o += small_det(a[s * nn..(s + 1) * nn].to_vec(), n) / nf;
                    }
                }
                Ok(out)
            }
            Model::Jastrow(m) => {
                let (a, _) = Self::orbital_matrices(&m.orbitals, data, false);
                let np = pairs(n).len();
                let (hr, hi, _) = Self::pair_values(&m.pair, data);
                let sf = Self::pair_factors(&hr, &hi, data.len(), np);
                Ok((0..data.len())
                    .map(|s| {
                        let p = sym_product(&sf[s * np..(s + 1) * np]);
                        p * small_det(a[s * nn..(s + 1) * nn].to_vec(), n) / nf
                    })
                    .collect())
            }
        }
    }

    /// The symmetric prefactor alone (Jastrow models).
    pub fn prefactor(&self, x: &[C64]) -> Option<C64> {
        match self {
            Model::Slater(_) => None,
            Model::Jastrow(m) => {
                let fac: Vec<C64> = pairs(m.n)
                    .into_iter()
                    .map(|(i, j)| 0.5 * (m.pair.eval(&[x[i], x[j]]) + m.pair.eval(&[x[j], x[i]])))
                    .collect();
                Some(sym_product(&fac))
            }
        }
    }

    pub fn eval(&self, x: &[C64]) -> Result<C64> {
        let d = Dataset { n: self.n(), xs: x.to_vec(), targets: vec![C64::default()] };
        Ok(self.forward(&d)?[0])
    }

    /// Mean squared error and its gradient in [`params`](Self::params) order.
    pub fn loss_and_grad(&self, data: &Dataset) -> Result<(f64, Vec<f64>)> {
        if data.is_empty() {
            return Err(Error::Training("empty dataset".into()));
        }
        let n = self.n();
        let nn = n * n;
        let nf = factorial(n);
        let f = self.forward(data)?;
        let sn = data.len() as f64;
        let loss = f.iter().zip(&data.targets).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / sn;
        if !loss.is_finite() {
            return Err(Error::Training(format!("non-finite loss {loss}")));
        }
        let adj_f: Vec<C64> = f.iter().zip(&data.targets).map(|(a, b)| 2.0 * (a - b) / sn).collect();
        let mut grad = vec![0.0; self.param_count()];
        let mut off = 0;
        let backprop_orbitals = |orbs: &[ComplexMLP], adj_d: &[C64], grad: &mut [f64], off: &mut usize| {
            let (a, caches) = Self::orbital_matrices(orbs, data, true);
            let mut adj_a = vec![C64::default(); a.len()];
            for s in 0..data.len() {
                let (_, cof) = det_and_cofactors(&a[s * nn..(s + 1) * nn], n);
                for k in 0..nn {
                    adj_a[s * nn + k] = cof[k].conj() * adj_d[s];
                }
            }
            for (i, (orb, cache)) in orbs.iter().zip(&caches).enumerate() {
                let b = data.len() * n;
                let ar = Array2::from_shape_fn((1, b), |(_, c)| adj_a[(c / n) * nn + i * n + c % n].re);
                let ai = Array2::from_shape_fn((1, b), |(_, c)| adj_a[(c / n) * nn + i * n + c % n].im);
                let pc = orb.param_count();
                orb.backward(cache, ar, ai, &mut grad[*off..*off + pc]);
                *off += pc;
            }
        };
        match self {
            Model::Slater(m) => {
                let adj_d: Vec<C64> = adj_f.iter().map(|a| a / nf).collect();
                for orbs in &m.orbitals {
                    backprop_orbitals(orbs, &adj_d, &mut grad, &mut off);
                }
            }
            Model::Jastrow(m) => {
                let (a, _) = Self::orbital_matrices(&m.orbitals, data, false);
                let np = pairs(n).len();
                let (hr, hi, hcache) = Self::pair_values(&m.pair, data);
                let sf = Self::pair_factors(&hr, &hi, data.len(), np);
                let mut adj_d = vec![C64::default(); data.len()];
                let mut adj_h_re = Array2::zeros((1, 2 * np * data.len()));
                let mut adj_h_im = Array2::zeros((1, 2 * np * data.len()));
                for s in 0..data.len() {
                    let fac = &sf[s * np..(s + 1) * np];
                    let p = sym_product(fac);
                    let d = small_det(a[s * nn..(s + 1) * nn].to_vec(), n) / nf;
                    adj_d[s] = p.conj() / nf * adj_f[s];
                    let adj_p = d.conj() * adj_f[s];
                    for q in 0..np {
                        let others: C64 = fac.iter().enumerate().filter(|&(k, _)| k != q).map(|(_, v)| v).product();
                        let adj_s = others.conj() * adj_p * 0.5;
                        for c in [2 * (s * np + q), 2 * (s * np + q) + 1] {
                            adj_h_re[(0, c)] = adj_s.re;
                            adj_h_im[(0, c)] = adj_s.im;
                        }
                    }
                }
                backprop_orbitals(&m.orbitals, &adj_d, &mut grad, &mut off);
                let pc = m.pair.param_count();
                m.pair.backward(&hcache, adj_h_re, adj_h_im, &mut grad[off..off + pc]);
            }
        }
        Ok((loss, grad))
    }

    /// `max |F(x with x_0, x_1 swapped) + F(x)|` relative to `1 + |F(x)|`.
    pub fn antisymmetry_defect(&self, data: &Dataset, samples: usize) -> Result<f64> {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for s in 0..samples.min(data.len()) {
            let x = data.point(s).to_vec();
            let mut y = x.clone();
            y.swap(0, n - 1);
            let (a, b) = (self.eval(&x)?, self.eval(&y)?);
            worst = worst.max((a + b).norm() / (1.0 + a.norm()));
        }
        Ok(worst)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Slater { determinants: usize },
    Jastrow,
}

impl ModelSpec {
    pub fn label(&self) -> String {
        match self {
            ModelSpec::Slater { determinants } => format!("slater_l{determinants}"),
            ModelSpec::Jastrow => "jastrow".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub r: f64,
    pub c_mode: CMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub schema_version: u32,
    pub n: usize,
    pub samples: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    pub model: ModelSpec,
    pub target: TargetSpec,
}

impl TrainConfig {
    /// 20000 iterations on 2000 samples.
    pub fn desk(n: usize, model: ModelSpec, seed: u64) -> Self {
        TrainConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            n,
            samples: 2000,
            iterations: 20_000,
            learning_rate: 5e-4,
            seed,
            hidden_width: 30,
            hidden_layers: 2,
            model,
            target: TargetSpec { r: 0.9, c_mode: CMode::ClosedForm },
        }
    }

    /// 200000 iterations on 10000 samples.
    pub fn full(n: usize, model: ModelSpec, seed: u64) -> Self {
        TrainConfig { samples: 10_000, iterations: 200_000, ..Self::desk(n, model, seed) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::InvalidParameter(format!(
                "schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.n < 2 || self.samples == 0 || self.hidden_width == 0 || !(self.learning_rate > 0.0) {
            return Err(Error::InvalidParameter("n >= 2, samples, width and learning rate must be positive".into()));
        }
        if let ModelSpec::Slater { determinants: 0 } = self.model {
            return Err(Error::InvalidParameter("at least one determinant".into()));
        }
        Ok(())
    }

    fn sizes(&self, inputs: usize) -> Vec<usize> {
        let mut s = vec![inputs];
        s.extend(std::iter::repeat(self.hidden_width).take(self.hidden_layers));
        s.push(1);
        s
    }

    /// Freshly initialized model; the seed drives both data and weights.
    pub fn build_model(&self) -> Result<Model> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5eed_0f_7a11);
        let orb = self.sizes(1);
        Ok(match self.model {
            ModelSpec::Slater { determinants } => Model::Slater(SlaterModel {
                n: self.n,
                orbitals: (0..determinants)
                    .map(|_| (0..self.n).map(|_| ComplexMLP::glorot(&orb, Act::CRelu, &mut rng)).collect())
                    .collect(),
            }),
            ModelSpec::Jastrow => Model::Jastrow(JastrowModel {
                n: self.n,
                orbitals: (0..self.n).map(|_| ComplexMLP::glorot(&orb, Act::CRelu, &mut rng)).collect(),
                pair: ComplexMLP::glorot(&self.sizes(2), Act::CRelu, &mut rng),
            }),
        })
    }

    pub fn dataset(&self) -> Result<Dataset> {
        let params = HardFnParams::new(self.n, self.target.r, self.target.c_mode)?;
        sample_dataset(self.n, self.samples, &params, self.seed)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: TrainConfig,
    pub label: String,
    /// normalized MSE before each update and after the last one
    pub trajectory: Vec<f64>,
    pub final_normalized_mse: f64,
    pub param_digest: String,
    pub wall_clock_secs: f64,
    pub antisymmetry_max_defect: f64,
    pub aborted: Option<String>,
}

/// Plain full-batch gradient descent with a fixed step.
pub fn train_run(config: &TrainConfig) -> Result<RunRecord> {
    let data = config.dataset()?;
    let model = config.build_model()?;
    train_model(config, model, &data)
}

pub fn train_model(config: &TrainConfig, mut model: Model, data: &Dataset) -> Result<RunRecord> {
    let start = Instant::now();
    let zero = data.zero_loss();
    let mut trajectory = Vec::with_capacity(config.iterations + 1);
    let mut defect = model.antisymmetry_defect(data, 4)?;
    let mut aborted = None;
    let mut params = model.params();
    for it in 0..=config.iterations {
        let last = it == config.iterations;
        let step = if last {
            model.forward(data).map(|f| {
                let l = f.iter().zip(&data.targets).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / data.len() as f64;
                (l, Vec::new())
            })
        } else {
            model.loss_and_grad(data)
        };
        let (loss, grad) = match step {
            Ok(v) => v,
            Err(e) => {
                aborted = Some(e.to_string());
                break;
            }
        };
        if !loss.is_finite() || loss > DIVERGENCE_LOSS {
            aborted = Some(format!("diverged at iteration {it}: loss {loss}"));
            break;
        }
        trajectory.push(loss / zero);
        if last {
            break;
        }
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= config.learning_rate * g;
        }
        model.set_params(&params);
        if (it + 1) % ANTISYM_CHECK_EVERY == 0 {
            defect = defect.max(model.antisymmetry_defect(data, 4)?);
        }
    }
    Ok(RunRecord {
        config: config.clone(),
        label: config.model.label(),
        final_normalized_mse: trajectory.last().copied().unwrap_or(f64::NAN),
        trajectory,
        param_digest: model.digest(),
        wall_clock_secs: start.elapsed().as_secs_f64(),
        antisymmetry_max_defect: defect,
        aborted,
    })
}

/// Seconds per gradient step measured over `probe` steps, and the implied
/// wall clock for the configured iteration count.
pub fn project_runtime(config: &TrainConfig, probe: usize) -> Result<(f64, f64)> {
    let data = config.dataset()?;
    let mut model = config.build_model()?;
    let mut params = model.params();
    let start = Instant::now();
    for _ in 0..probe.max(1) {
        let (_, g) = model.loss_and_grad(&data)?;
        for (p, gv) in params.iter_mut().zip(&g) {
            *p -= config.learning_rate * gv;
        }
        model.set_params(&params);
    }
    let per = start.elapsed().as_secs_f64() / probe.max(1) as f64;
    Ok((per, per * (config.iterations + 1) as f64))
}

/// Largest deviation between the analytic gradient and central differences
/// (step 1e-6), relative to the largest gradient entry.
///
/// Biases are randomized first: with zero biases an input that kills every
/// hidden unit puts the next pre-activation exactly on the ReLU kink, where
/// the one-sided quotient and the zero subgradient legitimately differ. With
/// `zero_targets` the loss stays on the scale of the model output, so the
/// difference quotient is not swamped by cancellation.
pub fn gradient_check(cfg: &TrainConfig, zero_targets: bool) -> Result<f64> {
    let mut data = cfg.dataset()?;
    if zero_targets {
        data.targets.iter_mut().for_each(|t| *t = C64::default());
    }
    let mut model = cfg.build_model()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(17));
    let normal = Normal::new(0.0, 0.3).expect("positive variance");
    let mut p0 = model.params();
    p0.iter_mut().for_each(|v| *v += normal.sample(&mut rng));
    model.set_params(&p0);
    let (_, g) = model.loss_and_grad(&data)?;
    let h = 1e-6;
    let gmax = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut worst: f64 = 0.0;
    for k in 0..p0.len() {
        let mut p = p0.clone();
        p[k] += h;
        model.set_params(&p);
        let lp = model.loss_and_grad(&data)?.0;
        p[k] -= 2.0 * h;
        model.set_params(&p);
        let lm = model.loss_and_grad(&data)?.0;
        worst = worst.max(((lp - lm) / (2.0 * h) - g[k]).abs() / gmax);
    }
    Ok(worst)
}

/// A small configuration for gradient and symmetry checks.
pub fn tiny_config(n: usize, model: ModelSpec, width: usize, seed: u64) -> TrainConfig {
    TrainConfig { samples: 12, iterations: 3, hidden_width: width, ..TrainConfig::desk(n, model, seed) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfunc::slater_value;

    fn tiny(n: usize, model: ModelSpec, width: usize, seed: u64) -> TrainConfig {
        tiny_config(n, model, width, seed)
    }

    #[test]
    fn gradient_matches_central_differences() {
        for model in [ModelSpec::Slater { determinants: 2 }, ModelSpec::Jastrow] {
            let e = gradient_check(&tiny(2, model.clone(), 4, 3), false).unwrap();
            assert!(e < 1e-5, "{model:?}: {e}");
        }
        for model in [ModelSpec::Slater { determinants: 2 }, ModelSpec::Jastrow] {
            let e = gradient_check(&tiny(4, model.clone(), 3, 4), true).unwrap();
            assert!(e < 1e-5, "{model:?}: {e}");
        }
    }

    #[test]
    fn cofactors_expand_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a: Vec<C64> = (0..16).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let (d, cof) = det_and_cofactors(&a, 4);
        for i in 0..4 {
            let e: C64 = (0..4).map(|j| a[i * 4 + j] * cof[i * 4 + j]).sum();
            assert!((e - d).norm() < 1e-12);
        }
        let m = nalgebra::DMatrix::from_row_slice(4, 4, &a);
        assert!((crate::symfunc::det(&m) - d).norm() < 1e-12);
    }

    #[test]
    fn models_are_antisymmetric() {
        for model in [ModelSpec::Slater { determinants: 3 }, ModelSpec::Jastrow] {
            let cfg = tiny(4, model, 8, 5);
            let m = cfg.build_model().unwrap();
            let data = cfg.dataset().unwrap();
            assert!(m.antisymmetry_defect(&data, 12).unwrap() < 1e-9);
        }
    }

    #[test]
    fn prefactor_is_permutation_invariant() {
        let cfg = tiny(4, ModelSpec::Jastrow, 8, 6);
        let m = cfg.build_model().unwrap();
        let data = cfg.dataset().unwrap();
        let x = data.point(0).to_vec();
        let y = vec![x[2], x[0], x[3], x[1]];
        assert_eq!(m.prefactor(&x).unwrap(), m.prefactor(&y).unwrap());
    }

    #[test]
    fn zero_model_has_unit_normalized_mse() {
        let cfg = tiny(4, ModelSpec::Slater { determinants: 1 }, 4, 7);
        let mut m = cfg.build_model().unwrap();
        let p = vec![0.0; m.param_count()];
        m.set_params(&p);
        let data = cfg.dataset().unwrap();
        let (loss, _) = m.loss_and_grad(&data).unwrap();
        assert_eq!(loss / data.zero_loss(), 1.0);
    }

    #[test]
    fn loss_ignores_sample_order() {
        let cfg = tiny(2, ModelSpec::Jastrow, 4, 8);
        let m = cfg.build_model().unwrap();
        let data = cfg.dataset().unwrap();
        let mut rev = data.clone();
        rev.targets.reverse();
        let xs: Vec<C64> = (0..data.len()).rev().flat_map(|s| data.point(s).to_vec()).collect();
        rev.xs = xs;
        let (a, _) = m.loss_and_grad(&data).unwrap();
        let (b, _) = m.loss_and_grad(&rev).unwrap();
        assert!((a - b).abs() <= 1e-14 * a);
    }

    #[test]
    fn frozen_polynomial_orbitals_reproduce_slater_value() {
        let r = 0.9;
        let phi = orbitals(4, r, OrbitalFamily::Phi).unwrap();
        let nets = phi
            .iter()
            .map(|o| ComplexMLP::polynomial(&(0..=o.degree()).map(|k| o.coeff(k)).collect::<Vec<_>>()))
            .collect();
        let model = Model::Slater(SlaterModel { n: 4, orbitals: vec![nets] });
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let x = CircleConfig::random(4, &mut rng);
            let want = slater_value(&phi, &x).unwrap();
            let got = model.eval(x.points()).unwrap();
            assert!((got - want).norm() < 1e-12 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn dataset_contract() {
        let params = HardFnParams::new(4, 0.9, CMode::ClosedForm).unwrap();
        let a = sample_dataset(4, 50, &params, 1).unwrap();
        let b = sample_dataset(4, 50, &params, 1).unwrap();
        assert_eq!(a, b);
        let phi = orbitals(4, 0.9, OrbitalFamily::Phi).unwrap();
        for s in 0..5 {
            let x = a.point(s);
            let swapped = CircleConfig::new(vec![x[1], x[0], x[2], x[3]]).unwrap();
            let t = jastrow_form_c_free(&swapped, 4, 0.9, &phi).unwrap();
            assert!((t + a.targets[s]).norm() < 1e-10 * (1.0 + t.norm()));
        }
    }

    #[test]
    fn zero_iterations_and_determinism() {
        let cfg = TrainConfig { iterations: 0, ..tiny(2, ModelSpec::Jastrow, 4, 10) };
        let rec = train_run(&cfg).unwrap();
        assert_eq!(rec.trajectory.len(), 1);
        let cfg = TrainConfig { iterations: 5, ..cfg };
        let a = train_run(&cfg).unwrap();
        let b = train_run(&cfg).unwrap();
        assert_eq!(a.trajectory, b.trajectory);
        assert_eq!(a.param_digest, b.param_digest);
        assert_eq!(a.trajectory.len(), 6);
    }

    #[test]
    fn divergence_aborts_with_partial_record() {
        let cfg = TrainConfig { learning_rate: 1e4, iterations: 50, ..tiny(2, ModelSpec::Slater { determinants: 1 }, 8, 11) };
        let rec = train_run(&cfg).unwrap();
        assert!(rec.aborted.is_some());
        assert!(rec.trajectory.len() < 51);
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = TrainConfig::desk(4, ModelSpec::Slater { determinants: 4 }, 1);
        let s = serde_json::to_string(&cfg).unwrap();
        assert!(s.contains("\"schema_version\":1"));
        let back: TrainConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cfg);
        let bad = TrainConfig { schema_version: 9, ..cfg };
        assert!(bad.validate().is_err());
    }
}
