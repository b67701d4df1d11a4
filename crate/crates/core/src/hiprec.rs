//! Minimal arbitrary-precision complex arithmetic on top of `astro-float`,
//! used where f64 roundoff would swamp the quantity being measured.

use astro_float::{BigFloat, Consts, RoundingMode};

const RM: RoundingMode = RoundingMode::ToEven;

/// Working precision and constants cache.
pub struct HpCtx {
    pub p: usize,
    cc: Consts,
}

#[derive(Clone, Debug)]
pub struct Hc {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl HpCtx {
    /// `bits` is rounded up to a whole number of 64-bit words.
    pub fn new(bits: usize) -> Self {
        let p = bits.div_ceil(64).max(2) * 64;
        HpCtx { p, cc: Consts::new().expect("constants cache") }
    }

    pub fn real(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    pub fn from_f64(&self, re: f64, im: f64) -> Hc {
        Hc { re: self.real(re), im: self.real(im) }
    }

    pub fn pi(&mut self) -> BigFloat {
        self.cc.pi(self.p, RM)
    }

    pub fn add(&self, a: &Hc, b: &Hc) -> Hc {
        Hc { re: a.re.add(&b.re, self.p, RM), im: a.im.add(&b.im, self.p, RM) }
    }

    pub fn sub(&self, a: &Hc, b: &Hc) -> Hc {
        Hc { re: a.re.sub(&b.re, self.p, RM), im: a.im.sub(&b.im, self.p, RM) }
    }

    pub fn mul(&self, a: &Hc, b: &Hc) -> Hc {
        let p = self.p;
        let re = a.re.mul(&b.re, p, RM).sub(&a.im.mul(&b.im, p, RM), p, RM);
        let im = a.re.mul(&b.im, p, RM).add(&a.im.mul(&b.re, p, RM), p, RM);
        Hc { re, im }
    }

    pub fn scale(&self, a: &Hc, s: &BigFloat) -> Hc {
        Hc { re: a.re.mul(s, self.p, RM), im: a.im.mul(s, self.p, RM) }
    }

    pub fn powu(&self, a: &Hc, k: u32) -> Hc {
        let mut acc = self.from_f64(1.0, 0.0);
        for _ in 0..k {
            acc = self.mul(&acc, a);
        }
        acc
    }

    /// `cos(theta) + i sin(theta)`.
    pub fn cis(&mut self, theta: &BigFloat) -> Hc {
        let p = self.p;
        Hc { re: theta.cos(p, RM, &mut self.cc), im: theta.sin(p, RM, &mut self.cc) }
    }

    pub fn exp(&mut self, z: &Hc) -> Hc {
        let p = self.p;
        let m = z.re.exp(p, RM, &mut self.cc);
        let c = self.cis(&z.im);
        self.scale(&c, &m)
    }

    /// `sin z + cos z`.
    pub fn sin_plus_cos(&mut self, z: &Hc) -> Hc {
        let p = self.p;
        let (sa, ca) = (z.re.sin(p, RM, &mut self.cc), z.re.cos(p, RM, &mut self.cc));
        let (shb, chb) = (z.im.sinh(p, RM, &mut self.cc), z.im.cosh(p, RM, &mut self.cc));
        // sin(a+ib) = sin a cosh b + i cos a sinh b
        // cos(a+ib) = cos a cosh b - i sin a sinh b
        let re = sa.mul(&chb, p, RM).add(&ca.mul(&chb, p, RM), p, RM);
        let im = ca.mul(&shb, p, RM).sub(&sa.mul(&shb, p, RM), p, RM);
        Hc { re, im }
    }

    /// `sinh(z + 1)`.
    pub fn sinh_shift(&mut self, z: &Hc) -> Hc {
        let p = self.p;
        let a = z.re.add(&self.real(1.0), p, RM);
        let (sha, cha) = (a.sinh(p, RM, &mut self.cc), a.cosh(p, RM, &mut self.cc));
        let (sb, cb) = (z.im.sin(p, RM, &mut self.cc), z.im.cos(p, RM, &mut self.cc));
        Hc { re: sha.mul(&cb, p, RM), im: cha.mul(&sb, p, RM) }
    }

    /// `|z|` rounded to f64.
    pub fn abs_f64(&self, z: &Hc) -> f64 {
        let (re, im) = (to_f64(&z.re), to_f64(&z.im));
        // rescale so that tiny magnitudes survive squaring
        let m = re.abs().max(im.abs());
        if m == 0.0 {
            return 0.0;
        }
        m * ((re / m).powi(2) + (im / m).powi(2)).sqrt()
    }
}

/// Nearest-ish f64 of a BigFloat (top mantissa word; 64 significant bits
/// are more than f64 can hold).
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let Some((m, _, sign, e, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let top = *m.last().expect("normalized mantissa") as f64;
    let mag = top * 2f64.powi(e - 64);
    if sign.is_negative() {
        -mag
    } else {
        mag
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_functions() {
        let mut ctx = HpCtx::new(256);
        for v in [1.0, -3.25, 1e-200, 12345.678] {
            assert_eq!(to_f64(&ctx.real(v)), v);
        }
        let z = ctx.from_f64(0.3, -0.7);
        let e = ctx.exp(&z);
        let want = num_complex::Complex64::new(0.3, -0.7).exp();
        assert!((to_f64(&e.re) - want.re).abs() < 1e-15);
        assert!((to_f64(&e.im) - want.im).abs() < 1e-15);
        let s = ctx.sin_plus_cos(&z);
        let w = num_complex::Complex64::new(0.3, -0.7);
        let want = w.sin() + w.cos();
        assert!((to_f64(&s.re) - want.re).abs() < 1e-15);
        assert!((to_f64(&s.im) - want.im).abs() < 1e-15);
        let s = ctx.sinh_shift(&z);
        let want = (w + 1.0).sinh();
        assert!((to_f64(&s.re) - want.re).abs() < 1e-15);
        assert!((to_f64(&s.im) - want.im).abs() < 1e-15);
        let pi = ctx.pi();
        assert!((to_f64(&pi) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn cancellation_survives() {
        // (1 + 1e-100) - 1 is exactly representable at 512 bits
        let ctx = HpCtx::new(512);
        let a = ctx.from_f64(1.0, 0.0);
        let tiny = ctx.from_f64(1e-100, 0.0);
        let d = ctx.sub(&ctx.add(&a, &tiny), &a);
        assert!((ctx.abs_f64(&d) / 1e-100 - 1.0).abs() < 1e-15);
    }
}
