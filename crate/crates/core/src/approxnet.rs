//! Roots-of-unity monomial networks, the pair network for the Jastrow factor,
//! the assembled approximation Ĝ and its error budget.

use std::f64::consts::{E, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardfn::{jastrow_form_c_free, orbital_order_sign, orbitals, OrbitalFamily};
use crate::hiprec::{Hc, HpCtx};
use crate::symfunc::{det, CircleConfig, Orbital};
use crate::{factorial, ln_factorial, C64};

const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Exp,
    SinPlusCos,
    SinhShift,
}

impl Activation {
    pub const ALL: [Activation; 3] = [Activation::Exp, Activation::SinPlusCos, Activation::SinhShift];

    pub fn eval(self, z: C64) -> C64 {
        match self {
            Activation::Exp => z.exp(),
            Activation::SinPlusCos => z.sin() + z.cos(),
            Activation::SinhShift => (z + 1.0).sinh(),
        }
    }

    fn eval_hp(self, ctx: &mut HpCtx, z: &Hc) -> Hc {
        match self {
            Activation::Exp => ctx.exp(z),
            Activation::SinPlusCos => ctx.sin_plus_cos(z),
            Activation::SinhShift => ctx.sinh_shift(z),
        }
    }

    /// Numerator of the k-th Taylor coefficient (`c_k = num_k / k!`).
    fn numerator(self, k: u32) -> f64 {
        match self {
            Activation::Exp => 1.0,
            Activation::SinPlusCos => {
                if k % 4 < 2 {
                    1.0
                } else {
                    -1.0
                }
            }
            Activation::SinhShift => {
                if k % 2 == 1 {
                    1f64.cosh()
                } else {
                    1f64.sinh()
                }
            }
        }
    }

    /// `ln |c_k|`.
    pub fn ln_abs_coeff(self, k: u32) -> f64 {
        self.numerator(k).abs().ln() - ln_factorial(k as usize)
    }

    /// Upper bound on `|activation(z)|`.
    fn magnitude_bound(self, z: C64) -> f64 {
        match self {
            Activation::Exp => z.re.exp(),
            Activation::SinPlusCos => 2.0 * z.im.abs().cosh(),
            Activation::SinhShift => (z.re + 1.0).abs().cosh() * z.im.abs().cosh().max(1.0),
        }
    }
}

/// The k-th Taylor coefficient of the activation.
pub fn activation_coeff(activation: Activation, k: u32) -> f64 {
    activation.numerator(k) / factorial(k as usize)
}

/// The scale `t` with `c_k t^k = 1`: `|c_k|^{-1/k}`, rotated by `e^{i pi/k}`
/// when `c_k < 0`.
pub fn input_scale(activation: Activation, k: u32) -> C64 {
    let c = activation_coeff(activation, k);
    let m = (-activation.ln_abs_coeff(k) / k as f64).exp();
    if c > 0.0 {
        C64::new(m, 0.0)
    } else {
        C64::from_polar(m, std::f64::consts::PI / k as f64)
    }
}

/// `f(xi) = sum_j (g^{-kj}/J) sigma(g^j t xi)` with `g` a primitive J-th root
/// of unity; `k = 0` is the constant 1.
#[derive(Clone, Debug)]
pub struct RootsOfUnityNet {
    pub k: u32,
    pub j: usize,
    pub activation: Activation,
    pub t: C64,
    pub weights: Vec<C64>,
    pub rotations: Vec<C64>,
}

impl RootsOfUnityNet {
    pub fn eval(&self, xi: C64) -> C64 {
        if self.k == 0 {
            return C64::new(1.0, 0.0);
        }
        let z = self.t * xi;
        self.weights.iter().zip(&self.rotations).map(|(w, g)| w * self.activation.eval(g * z)).sum()
    }

    /// Value with a running bound on its floating-point rounding error.
    pub fn eval_with_allowance(&self, xi: C64) -> (C64, f64) {
        if self.k == 0 {
            return (C64::new(1.0, 0.0), 0.0);
        }
        let z = self.t * xi;
        let mut acc = C64::default();
        let mut mass = 0.0;
        for (w, g) in self.weights.iter().zip(&self.rotations) {
            let arg = g * z;
            acc += w * self.activation.eval(arg);
            mass += w.norm() * self.activation.magnitude_bound(arg);
        }
        (acc, (self.j as f64 + 8.0) * UNIT_ROUNDOFF * mass)
    }

    /// Neuron count.
    pub fn width(&self) -> usize {
        if self.k == 0 {
            0
        } else {
            self.j
        }
    }
}

/// Builds the degree-k net, enforcing `J > 2ek` for `k >= 1`.
pub fn build_monomial_net(k: u32, j: usize, activation: Activation) -> Result<RootsOfUnityNet> {
    if k >= 1 && (j as f64) <= 2.0 * E * k as f64 {
        return Err(Error::Hypothesis(format!("J = {j} must exceed 2ek = {:.3}", 2.0 * E * k as f64)));
    }
    Ok(build_monomial_net_unchecked(k, j, activation))
}

/// Same construction without the width hypothesis.
pub fn build_monomial_net_unchecked(k: u32, j: usize, activation: Activation) -> RootsOfUnityNet {
    if k == 0 {
        return RootsOfUnityNet { k, j, activation, t: C64::new(1.0, 0.0), weights: Vec::new(), rotations: Vec::new() };
    }
    let t = input_scale(activation, k);
    let jf = j as f64;
    let rotations: Vec<C64> = (0..j).map(|i| C64::from_polar(1.0, TAU * i as f64 / jf)).collect();
    let weights: Vec<C64> = (0..j)
        .map(|i| C64::from_polar(1.0 / jf, -TAU * ((k as usize * i) % j) as f64 / jf))
        .collect();
    RootsOfUnityNet { k, j, activation, t, weights, rotations }
}

/// The lemma's bound `2 (2ek/J)^J`.
pub fn lemma_bound(k: u32, j: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    2.0 * (2.0 * E * k as f64 / j as f64).powi(j as i32)
}

/// `ln sum_{i>=1} |c_{iJ+k}| (rho |t|)^{iJ+k}`: the exact aliasing tail
/// majorant on the disk of radius rho.
pub fn ln_series_bound(activation: Activation, k: u32, j: usize, rho: f64) -> f64 {
    if k == 0 {
        return f64::NEG_INFINITY;
    }
    let ln_st = (rho * input_scale(activation, k).norm()).ln();
    let mut terms = Vec::new();
    let mut i = 1usize;
    loop {
        let n = i * j + k as usize;
        let lt = activation.ln_abs_coeff(n as u32) + n as f64 * ln_st;
        terms.push(lt);
        // terms eventually fall super-exponentially
        if i > 2 && lt < terms[0] - 60.0 {
            break;
        }
        if i > 10_000 {
            break;
        }
        i += 1;
    }
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + terms.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub fn series_bound(activation: Activation, k: u32, j: usize, rho: f64) -> f64 {
    ln_series_bound(activation, k, j, rho).exp()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupErrorReport {
    pub k: u32,
    pub j: usize,
    pub activation: Activation,
    pub radius: f64,
    pub grid_points: usize,
    /// sup over the grid evaluated in extended precision
    pub measured: f64,
    /// the same sup evaluated in f64 (floored by roundoff)
    pub measured_f64: f64,
    pub precision_bits: usize,
    pub lemma_bound: f64,
    pub series_bound: f64,
    pub hypothesis_holds: bool,
}

fn grid_shape(j: usize, grid_points: usize) -> (usize, usize) {
    let rings = 4usize;
    let per_sector = grid_points.div_ceil(rings * j.max(1)).max(1);
    (rings, per_sector)
}

/// `sup |f(xi) - xi^k|` over a ring-and-angle grid of the disk.
///
/// `f(g xi) = g^k f(xi)` for the J-th root of unity `g`, so the error is
/// invariant under rotation by `2 pi / J`; the extended-precision pass visits
/// one sector of the full grid. The f64 pass visits the whole grid.
pub fn monomial_sup_error(net: &RootsOfUnityNet, radius: f64, grid_points: usize) -> SupErrorReport {
    let (rings, per_sector) = grid_shape(net.j, grid_points);
    let angles = per_sector * net.j.max(1);
    let lemma = lemma_bound(net.k, net.j);
    let series = series_bound(net.activation, net.k, net.j, radius);
    let base = SupErrorReport {
        k: net.k,
        j: net.j,
        activation: net.activation,
        radius,
        grid_points: rings * angles,
        measured: 0.0,
        measured_f64: 0.0,
        precision_bits: 53,
        lemma_bound: lemma,
        series_bound: series,
        hypothesis_holds: net.k == 0 || (net.j as f64) > 2.0 * E * net.k as f64,
    };
    if net.k == 0 {
        return base;
    }

    let mut measured_f64 = 0.0f64;
    for ring in 1..=rings {
        let rho = radius * ring as f64 / rings as f64;
        for a in 0..angles {
            let xi = C64::from_polar(rho, TAU * a as f64 / angles as f64);
            measured_f64 = measured_f64.max((net.eval(xi) - xi.powu(net.k)).norm());
        }
    }

    // precision: resolve the expected error below the largest activation value
    let ln_series = ln_series_bound(net.activation, net.k, net.j, radius);
    let swing = radius * net.t.norm() + 1.0;
    let bits = 96.0 + (swing - ln_series.min(0.0)) / std::f64::consts::LN_2;
    let mut ctx = HpCtx::new(bits.ceil() as usize);
    let jf = net.j as f64;
    let two_pi = {
        let pi = ctx.pi();
        pi.mul(&ctx.real(2.0), ctx.p, astro_float::RoundingMode::ToEven)
    };
    let div = |ctx: &HpCtx, x: &astro_float::BigFloat, d: f64| x.div(&ctx.real(d), ctx.p, astro_float::RoundingMode::ToEven);
    let mut rot = Vec::with_capacity(net.j);
    let mut wts = Vec::with_capacity(net.j);
    for i in 0..net.j {
        let th = div(&ctx, &two_pi.mul(&ctx.real(i as f64), ctx.p, astro_float::RoundingMode::ToEven), jf);
        rot.push(ctx.cis(&th));
        let e = ((net.k as usize * i) % net.j) as f64;
        let th = div(&ctx, &two_pi.mul(&ctx.real(-e), ctx.p, astro_float::RoundingMode::ToEven), jf);
        let w = ctx.cis(&th);
        wts.push(Hc { re: div(&ctx, &w.re, jf), im: div(&ctx, &w.im, jf) });
    }
    let t = scale_hp(&mut ctx, net.activation, net.k);
    let mut measured = 0.0f64;
    for ring in 1..=rings {
        let rho = radius * ring as f64 / rings as f64;
        for a in 0..per_sector {
            let th = div(&ctx, &two_pi.mul(&ctx.real(a as f64), ctx.p, astro_float::RoundingMode::ToEven), (angles) as f64);
            let xi = ctx.cis(&th);
            let xi = ctx.scale(&xi, &ctx.real(rho));
            let z = ctx.mul(&t, &xi);
            let mut acc = ctx.from_f64(0.0, 0.0);
            for (w, g) in wts.iter().zip(&rot) {
                let arg = ctx.mul(g, &z);
                let s = net.activation.eval_hp(&mut ctx, &arg);
                acc = ctx.add(&acc, &ctx.mul(w, &s));
            }
            let d = ctx.sub(&acc, &ctx.powu(&xi, net.k));
            measured = measured.max(ctx.abs_f64(&d));
        }
    }
    SupErrorReport { measured, measured_f64, precision_bits: ctx.p, ..base }
}

/// `t` in extended precision: `|c_k|^{-1/k}` times the principal k-th root
/// of `sign(c_k)`.
fn scale_hp(ctx: &mut HpCtx, activation: Activation, k: u32) -> Hc {
    use astro_float::RoundingMode::ToEven;
    let p = ctx.p;
    // |c_k| = |num| / k!
    let mut kf = ctx.real(1.0);
    for i in 2..=k {
        kf = kf.mul(&ctx.real(i as f64), p, ToEven);
    }
    let num = match activation {
        Activation::Exp | Activation::SinPlusCos => ctx.real(1.0),
        Activation::SinhShift => {
            let mut cc = astro_float::Consts::new().expect("constants cache");
            let one = ctx.real(1.0);
            if k % 2 == 1 {
                one.cosh(p, ToEven, &mut cc)
            } else {
                one.sinh(p, ToEven, &mut cc)
            }
        }
    };
    let inv_abs = kf.div(&num, p, ToEven);
    let mut cc = astro_float::Consts::new().expect("constants cache");
    let ln = inv_abs.ln(p, ToEven, &mut cc).div(&ctx.real(k as f64), p, ToEven);
    let root = ln.exp(p, ToEven, &mut cc);
    if activation_coeff(activation, k) > 0.0 {
        Hc { re: root, im: ctx.real(0.0) }
    } else {
        let pi = ctx.pi();
        let th = pi.div(&ctx.real(k as f64), p, ToEven);
        let c = ctx.cis(&th);
        ctx.scale(&c, &root)
    }
}

/// DFT of `f(e^{i theta}) - e^{ik theta}` on `m` nodes: coefficient magnitudes
/// by frequency `0..m`.
pub fn residual_spectrum(net: &RootsOfUnityNet, m: usize) -> Vec<f64> {
    let vals: Vec<C64> = (0..m)
        .map(|a| {
            let xi = C64::from_polar(1.0, TAU * a as f64 / m as f64);
            net.eval(xi) - xi.powu(net.k)
        })
        .collect();
    (0..m)
        .map(|f| {
            let s: C64 = vals
                .iter()
                .enumerate()
                .map(|(a, v)| v * C64::from_polar(1.0, -TAU * ((f * a) % m) as f64 / m as f64))
                .sum();
            s.norm() / m as f64
        })
        .collect()
}

/// `g(x, y) = 1 + sum_{k=1}^K r^{4k} f^{(2k)}(y)` with `y` the halved
/// polarization `(f2(x+y) - f2(x) - f2(y)) / 2`.
#[derive(Clone, Debug)]
pub struct PairNet {
    pub r: f64,
    pub k_terms: usize,
    pub j: usize,
    pub activation: Activation,
    pub f2: RootsOfUnityNet,
    /// degrees 2, 4, ..., 2K
    pub nets: Vec<RootsOfUnityNet>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairBound {
    /// bound on `|y - x_i x_j|`
    pub eps_y: f64,
    /// rigorous series form
    pub delta1: f64,
    /// the displayed order-of-magnitude form with unit constants
    pub delta1_displayed_form: f64,
}

pub fn build_pair_net(r: f64, k_terms: usize, j: usize, activation: Activation) -> Result<PairNet> {
    if !(r.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!("|r| = {} must be below 1", r.abs())));
    }
    if (j as f64) <= 4.0 * E * k_terms.max(1) as f64 {
        return Err(Error::Hypothesis(format!("J = {j} must exceed 4eK = {:.3}", 4.0 * E * k_terms as f64)));
    }
    let f2 = build_monomial_net(2, j, activation)?;
    let nets = (1..=k_terms).map(|k| build_monomial_net(2 * k as u32, j, activation)).collect::<Result<Vec<_>>>()?;
    Ok(PairNet { r, k_terms, j, activation, f2, nets })
}

impl PairNet {
    /// `(f2(x+y) - f2(x) - f2(y)) / 2`, which approximates `xy`.
    pub fn y(&self, x: C64, y: C64) -> C64 {
        0.5 * (self.f2.eval(x + y) - (self.f2.eval(x) + self.f2.eval(y)))
    }

    pub fn eval(&self, x: C64, y: C64) -> C64 {
        let yv = self.y(x, y);
        let r4 = self.r.powi(4);
        let mut acc = C64::new(1.0, 0.0);
        let mut w = 1.0;
        for net in &self.nets {
            w *= r4;
            acc += net.eval(yv) * w;
        }
        acc
    }

    /// Value and a running floating-point rounding allowance.
    pub fn eval_with_allowance(&self, x: C64, y: C64) -> (C64, f64) {
        let (a, ea) = self.f2.eval_with_allowance(x + y);
        let (b, eb) = self.f2.eval_with_allowance(x);
        let (c, ec) = self.f2.eval_with_allowance(y);
        let yv = 0.5 * (a - (b + c));
        let ey = 0.5 * (ea + eb + ec) + 4.0 * UNIT_ROUNDOFF * (a.norm() + b.norm() + c.norm());
        let r4 = self.r.powi(4);
        let mut acc = C64::new(1.0, 0.0);
        let mut err = 0.0;
        let mut w = 1.0;
        let rho = yv.norm() + ey;
        for net in &self.nets {
            w *= r4;
            let (v, ev) = net.eval_with_allowance(yv);
            acc += v * w;
            let deg = net.k as f64;
            // propagated input error through a degree-2k monomial
            let slope = deg * rho.max(1.0).powf(deg - 1.0);
            err += w * (ev + slope * ey) + 2.0 * UNIT_ROUNDOFF * w * v.norm();
        }
        (acc, err + UNIT_ROUNDOFF * acc.norm())
    }

    pub fn bound(&self) -> PairBound {
        let a = self.activation;
        let j = self.j;
        let eps_y = 0.5 * (series_bound(a, 2, j, 2.0) + 2.0 * series_bound(a, 2, j, 1.0));
        let rho = 1.0 + eps_y;
        let r4 = self.r.powi(4);
        let mut delta1 = 0.0;
        let mut displayed = 0.0;
        let jf = j as f64;
        for k in 1..=self.k_terms {
            let deg = 2 * k as u32;
            let w = r4.powi(k as i32);
            delta1 += w * (series_bound(a, deg, j, rho) + deg as f64 * rho.powi(deg as i32 - 1) * eps_y);
            let kf = k as f64;
            displayed += w * (2.0 * (2.0 * E * kf / jf).powf(jf) + 2.0 * kf * 4f64.powf(kf) * 6.0 * (4.0 * kf / jf).powf(jf));
        }
        let kk = self.k_terms as i32;
        delta1 += r4.powi(kk + 1) / (1.0 - r4);
        displayed += r4.powi(kk) / (1.0 - self.r.abs());
        PairBound { eps_y, delta1, delta1_displayed_form: displayed }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairErrorReport {
    pub measured_sup: f64,
    pub max_rounding_allowance: f64,
    pub bound: PairBound,
    pub points: usize,
    /// `measured <= delta1 + allowance` at every point
    pub pass: bool,
    pub symmetric: bool,
}

/// Measures `|g(x, y) - 1/(1 - r^4 x^2 y^2)|` on a torus lattice plus samples.
pub fn pair_net_error(net: &PairNet, lattice: usize, samples: usize, seed: u64) -> PairErrorReport {
    let bound = net.bound();
    let r4 = net.r.powi(4);
    let mut pts = Vec::new();
    for a in 0..lattice {
        for b in 0..lattice {
            pts.push((TAU * a as f64 / lattice as f64, TAU * b as f64 / lattice as f64));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        use rand::Rng;
        pts.push((rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU)));
    }
    let mut measured: f64 = 0.0;
    let mut allowance: f64 = 0.0;
    let mut pass = true;
    let mut symmetric = true;
    for &(s, t) in &pts {
        let (x, y) = (C64::from_polar(1.0, s), C64::from_polar(1.0, t));
        let (g, ag) = net.eval_with_allowance(x, y);
        let exact = 1.0 / (1.0 - x * x * y * y * r4);
        let err = (g - exact).norm();
        measured = measured.max(err);
        allowance = allowance.max(ag);
        if err > bound.delta1 + ag + 4.0 * UNIT_ROUNDOFF * exact.norm() {
            pass = false;
        }
        if net.eval(y, x) != g {
            symmetric = false;
        }
    }
    PairErrorReport { measured_sup: measured, max_rounding_allowance: allowance, bound, points: pts.len(), pass, symmetric }
}

/// Parameters of Ĝ.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GhatParams {
    pub n: usize,
    pub r: f64,
    pub c: f64,
    pub k_terms: usize,
    pub j: usize,
    pub activation: Activation,
}

impl GhatParams {
    /// Whether `J >= 12 e K` and `K >= 2`, the sizing rule of the asymptotic
    /// argument (not needed for the bounds computed here).
    pub fn meets_budget_rule(&self) -> bool {
        self.k_terms >= 2 && self.j as f64 >= 12.0 * E * self.k_terms as f64
    }
}

/// ψ̂_j as a linear combination of monomial nets.
#[derive(Clone, Debug)]
pub struct NetOrbital {
    pub terms: Vec<(C64, RootsOfUnityNet)>,
}

impl NetOrbital {
    pub fn eval(&self, z: C64) -> C64 {
        self.terms.iter().map(|(c, net)| c * net.eval(z)).sum()
    }
}

#[derive(Clone, Debug)]
pub enum PairPart {
    Network(PairNet),
    Exact,
}

#[derive(Clone, Debug)]
pub enum OrbitalPart {
    Network(Vec<NetOrbital>),
    Exact,
}

#[derive(Clone, Debug)]
pub struct Ghat {
    pub params: GhatParams,
    pub pair: PairPart,
    pub orbitals: OrbitalPart,
    psi: Vec<Orbital>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GhatBounds {
    pub delta1: f64,
    pub delta2: f64,
    pub delta1_displayed_form: f64,
    pub delta2_displayed_form: f64,
    /// `C sqrt(N!) (N 3^{N-1} d2 A^{N^2} + N A^{N^2-1} d1 2^N)`, `A = 2/(1-r)`
    pub bound_sup: f64,
    /// `sqrt(N!) N 3^N A^{N^2} (d1 + d2)`
    pub bound_sup_displayed: f64,
    pub meets_budget_rule: bool,
    pub parameter_count: usize,
}

pub fn build_ghat(params: GhatParams) -> Result<Ghat> {
    build_ghat_parts(params, false, false)
}

/// Ĝ with either part optionally replaced by its exact counterpart.
pub fn build_ghat_parts(params: GhatParams, exact_pair: bool, exact_orbitals: bool) -> Result<Ghat> {
    let psi = orbitals(params.n, params.r, OrbitalFamily::Psi)?;
    let pair = if exact_pair {
        PairPart::Exact
    } else {
        PairPart::Network(build_pair_net(params.r, params.k_terms, params.j, params.activation)?)
    };
    let orb = if exact_orbitals {
        OrbitalPart::Exact
    } else {
        let nets = psi
            .iter()
            .map(|o| {
                let terms = o
                    .terms()
                    .map(|(deg, c)| Ok((c, build_monomial_net(deg, params.j, params.activation)?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(NetOrbital { terms })
            })
            .collect::<Result<Vec<_>>>()?;
        OrbitalPart::Network(nets)
    };
    Ok(Ghat { params, pair, orbitals: orb, psi })
}

impl Ghat {
    fn pair_value(&self, x: C64, y: C64) -> C64 {
        match &self.pair {
            PairPart::Network(net) => net.eval(x, y),
            PairPart::Exact => 1.0 / (1.0 - x * x * y * y * self.params.r.powi(4)),
        }
    }

    fn orbital_value(&self, i: usize, z: C64) -> C64 {
        match &self.orbitals {
            OrbitalPart::Network(nets) => nets[i].eval(z),
            OrbitalPart::Exact => self.psi[i].eval(z),
        }
    }

    /// `C sqrt(N!) prod_{i<j} g(x_i, x_j) (1/N!) det[psi_i(x_j)]`, with the
    /// orbital ordering sign.
    pub fn eval(&self, x: &CircleConfig) -> Result<C64> {
        let n = self.params.n;
        if x.len() != n {
            return Err(Error::DimensionMismatch { left: x.len(), right: n });
        }
        let p = x.points();
        let mut pref = C64::new(1.0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                pref *= self.pair_value(p[i], p[j]);
            }
        }
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| self.orbital_value(i, p[j]));
        let nf = factorial(n);
        Ok(orbital_order_sign(n) * self.params.c * nf.sqrt() * pref * det(&m) / nf)
    }

    pub fn bounds(&self) -> GhatBounds {
        let GhatParams { n, r, c, j, activation, .. } = self.params;
        let (delta1, delta1_displayed_form) = match &self.pair {
            PairPart::Network(net) => {
                let b = net.bound();
                (b.delta1, b.delta1_displayed_form)
            }
            PairPart::Exact => (0.0, 0.0),
        };
        let (delta2, delta2_displayed_form) = match &self.orbitals {
            OrbitalPart::Network(nets) => {
                let d2 = nets
                    .iter()
                    .map(|o| o.terms.iter().map(|(c, net)| c.norm() * series_bound(activation, net.k, j, 1.0)).sum::<f64>())
                    .fold(0.0, f64::max);
                (d2, (6.0 * E * n as f64 / j as f64).powi(j as i32))
            }
            OrbitalPart::Exact => (0.0, 0.0),
        };
        let nf = n as f64;
        let a = 2.0 / (1.0 - r);
        let n2 = (n * n) as i32;
        let sq = factorial(n).sqrt();
        let bound_sup =
            c * sq * (nf * 3f64.powi(n as i32 - 1) * delta2 * a.powi(n2) + nf * a.powi(n2 - 1) * delta1 * 2f64.powi(n as i32));
        let bound_sup_displayed = sq * nf * 3f64.powi(n as i32) * a.powi(n2) * (delta1 + delta2);
        let parameter_count = self.parameter_count();
        GhatBounds {
            delta1,
            delta2,
            delta1_displayed_form,
            delta2_displayed_form,
            bound_sup,
            bound_sup_displayed,
            meets_budget_rule: self.params.meets_budget_rule(),
            parameter_count,
        }
    }

    /// Neurons times (input weight, output weight) across all monomial nets.
    pub fn parameter_count(&self) -> usize {
        let pairs = match &self.pair {
            PairPart::Network(net) => net.f2.width() + net.nets.iter().map(|m| m.width()).sum::<usize>(),
            PairPart::Exact => 0,
        };
        let orbs = match &self.orbitals {
            OrbitalPart::Network(nets) => nets.iter().flat_map(|o| o.terms.iter().map(|(_, m)| m.width())).sum(),
            OrbitalPart::Exact => 0,
        };
        2 * (pairs + orbs)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApproxErrorReport {
    pub delta1: f64,
    pub delta2: f64,
    pub measured_sup: f64,
    pub bound_sup: f64,
    pub bound_sup_displayed: f64,
    pub samples: usize,
    pub lattice_points: usize,
    pub meets_budget_rule: bool,
    pub parameter_count: usize,
}

/// `sup |G - Ĝ|` over a torus lattice (`lattice^N` points) and random samples.
pub fn ghat_error(ghat: &Ghat, lattice: usize, samples: usize, seed: u64) -> Result<ApproxErrorReport> {
    let n = ghat.params.n;
    let r = ghat.params.r;
    let phi = orbitals(n, r, OrbitalFamily::Phi)?;
    let mut measured: f64 = 0.0;
    let mut check = |x: &CircleConfig| -> Result<()> {
        let g = ghat.params.c * jastrow_form_c_free(x, n, r, &phi)?;
        measured = measured.max((g - ghat.eval(x)?).norm());
        Ok(())
    };
    let lattice_points = if lattice == 0 { 0 } else { lattice.pow(n as u32) };
    let mut idx = vec![0usize; n];
    for _ in 0..lattice_points {
        // offset each coordinate so that lattice points never coincide
        let theta: Vec<f64> =
            idx.iter().enumerate().map(|(d, &a)| TAU * (a as f64 + 0.5 * d as f64 / n as f64) / lattice as f64).collect();
        check(&CircleConfig::from_angles(&theta)?)?;
        for v in idx.iter_mut() {
            *v += 1;
            if *v < lattice {
                break;
            }
            *v = 0;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        check(&CircleConfig::random(n, &mut rng))?;
    }
    let b = ghat.bounds();
    Ok(ApproxErrorReport {
        delta1: b.delta1,
        delta2: b.delta2,
        measured_sup: measured,
        bound_sup: b.bound_sup,
        bound_sup_displayed: b.bound_sup_displayed,
        samples,
        lattice_points,
        meets_budget_rule: b.meets_budget_rule,
        parameter_count: b.parameter_count,
    })
}

/// Smallest `K >= (N^4 ln(c0/eps) + N^7)/4` and `J = ceil(12 e K)`.
pub fn k_budget_with_constant(n: usize, epsilon: f64, c0: f64) -> Result<(u64, u64)> {
    if n < 6 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!("N = {n} must be even and at least 6")));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} outside (0, 1]")));
    }
    let nf = n as f64;
    let k = ((nf.powi(4) * (c0 / epsilon).ln() + nf.powi(7)) / 4.0).ceil().max(2.0);
    let j = (12.0 * E * k).ceil();
    Ok((k as u64, j as u64))
}

/// [`k_budget_with_constant`] with the unspecified constant set to 1.
pub fn k_budget(n: usize, epsilon: f64) -> Result<(u64, u64)> {
    k_budget_with_constant(n, epsilon, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardfn::{CMode, HardFnParams};
    use crate::symfunc::permutation_sign;

    #[test]
    fn coefficient_examples() {
        assert!((activation_coeff(Activation::Exp, 3) - 1.0 / 6.0).abs() < 1e-16);
        assert_eq!(activation_coeff(Activation::SinPlusCos, 2), -0.5);
        assert!((activation_coeff(Activation::SinhShift, 2) - 1f64.sinh() / 2.0).abs() < 1e-16);
        assert!((activation_coeff(Activation::SinhShift, 3) - 1f64.cosh() / 6.0).abs() < 1e-16);
    }

    #[test]
    fn coefficients_match_finite_difference_taylor() {
        // k-th derivative at 0 by complex contour average: c_k = mean f(e^{i th}) e^{-ik th}
        for act in Activation::ALL {
            for k in 0..8u32 {
                let m = 64;
                let s: C64 = (0..m)
                    .map(|a| {
                        let z = C64::from_polar(1.0, TAU * a as f64 / m as f64);
                        act.eval(z) * z.powi(-(k as i32))
                    })
                    .sum::<C64>()
                    / m as f64;
                assert!((s.re - activation_coeff(act, k)).abs() < 1e-13, "{act:?} k={k}");
            }
        }
    }

    #[test]
    fn scale_normalizes_leading_term() {
        for act in Activation::ALL {
            for k in 1..10u32 {
                let t = input_scale(act, k);
                let lead = t.powu(k) * activation_coeff(act, k);
                assert!((lead - C64::new(1.0, 0.0)).norm() < 1e-12, "{act:?} k={k}");
            }
        }
    }

    #[test]
    fn k_zero_is_constant() {
        let net = build_monomial_net(0, 8, Activation::Exp).unwrap();
        assert_eq!(net.eval(C64::new(0.3, 0.9)), C64::new(1.0, 0.0));
    }

    #[test]
    fn hypothesis_enforced() {
        assert!(matches!(build_monomial_net(2, 10, Activation::Exp), Err(Error::Hypothesis(_))));
        assert!(build_monomial_net(2, 11, Activation::Exp).is_ok());
    }

    #[test]
    fn k1_j8_grid_below_bound() {
        let net = build_monomial_net(1, 8, Activation::Exp).unwrap();
        let rep = monomial_sup_error(&net, 1.0, 4096);
        assert!((rep.lemma_bound - 2.0 * (2.0 * E / 8.0).powi(8)).abs() < 1e-15);
        assert!(rep.lemma_bound > 0.09 && rep.lemma_bound < 0.092);
        assert!(rep.measured <= rep.lemma_bound);
        assert!((rep.measured - rep.measured_f64).abs() < 1e-12);
        assert!(rep.measured <= rep.series_bound * (1.0 + 1e-9));
    }

    #[test]
    fn k2_j32_extended_precision() {
        for act in [Activation::Exp, Activation::SinPlusCos] {
            let net = build_monomial_net(2, 32, act).unwrap();
            let rep = monomial_sup_error(&net, 1.0, 1024);
            assert!(rep.lemma_bound < 3e-15);
            assert!(rep.measured <= rep.lemma_bound, "{rep:?}");
            assert!(rep.measured <= rep.series_bound * (1.0 + 1e-9));
            // the aliasing tail is dominated by its first term on the boundary
            assert!(rep.measured >= 0.5 * rep.series_bound, "{rep:?}");
        }
    }

    #[test]
    fn aliasing_filter_spectrum() {
        for act in Activation::ALL {
            for (k, j) in [(1u32, 8usize), (2, 12), (3, 20)] {
                let net = build_monomial_net(k, j, act).unwrap();
                let spec = residual_spectrum(&net, 256);
                let lead = spec[j + k as usize];
                let want = (activation_coeff(act, j as u32 + k) * net.t.powu(j as u32 + k)).norm();
                assert!((lead - want).abs() < 1e-10 * want.max(1e-3) + 1e-14, "{act:?} {k} {j}");
                for (f, &v) in spec.iter().enumerate().take(j + k as usize) {
                    assert!(v < 1e-12, "{act:?} k={k} J={j} freq {f}: {v}");
                }
            }
        }
    }

    #[test]
    fn pair_net_zero_r_is_one() {
        let net = build_pair_net(0.0, 3, 64, Activation::Exp).unwrap();
        let (x, y) = (C64::from_polar(1.0, 0.4), C64::from_polar(1.0, 2.0));
        assert_eq!(net.eval(x, y), C64::new(1.0, 0.0));
    }

    #[test]
    fn pair_net_hypothesis() {
        assert!(matches!(build_pair_net(0.5, 20, 200, Activation::Exp), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn pair_net_error_within_delta1() {
        let net = build_pair_net(0.5, 20, 256, Activation::Exp).unwrap();
        let rep = pair_net_error(&net, 16, 64, 5);
        assert!(rep.pass, "{rep:?}");
        assert!(rep.symmetric);
        assert!(rep.bound.delta1 <= 1.0);
    }

    #[test]
    fn exact_parts_collapse_to_g() {
        let hp = HardFnParams::new(4, 0.9, CMode::ExactRestricted).unwrap();
        let params = GhatParams { n: 4, r: 0.9, c: hp.c, k_terms: 4, j: 64, activation: Activation::Exp };
        let ghat = build_ghat_parts(params, true, true).unwrap();
        let rep = ghat_error(&ghat, 0, 50, 1).unwrap();
        assert!(rep.measured_sup < 1e-9, "{rep:?}");
        assert_eq!(rep.delta1, 0.0);
        assert_eq!(rep.delta2, 0.0);
    }

    #[test]
    fn ghat_antisymmetric() {
        let params = GhatParams { n: 4, r: 0.7, c: 1.0, k_terms: 6, j: 96, activation: Activation::SinPlusCos };
        let ghat = build_ghat(params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for sigma in [[1usize, 0, 2, 3], [2, 3, 0, 1], [3, 1, 2, 0]] {
            let x = CircleConfig::random(4, &mut rng);
            let a = ghat.eval(&x).unwrap();
            let b = ghat.eval(&x.permuted(&sigma)).unwrap();
            let s = permutation_sign(&sigma) as f64;
            assert!((b - a * s).norm() < 1e-10 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn budget_formula() {
        let (k, j) = k_budget(6, 0.5).unwrap();
        let want = ((1296.0 * 2f64.ln() + 279936.0) / 4.0f64).ceil() as u64;
        assert_eq!(k, want);
        assert_eq!(j, (12.0 * E * k as f64).ceil() as u64);
        assert!(k_budget(4, 0.5).is_err());
        assert!(k_budget(6, 1.5).is_err());
    }
}
