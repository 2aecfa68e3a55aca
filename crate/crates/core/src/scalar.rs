//! Coefficient rings for forms and chains.
//!
//! Two backends share every algebraic routine: [`Complex64`] for analytic
//! evaluation and [`GaussRational`] (exact `a + bi`, `a, b` rational) for
//! identity checks. The exact backend works in angular coordinates
//! `y = 2πx`, where `d(e^{i⟨m,y⟩}) = i m_k e^{i⟨m,y⟩} dy^k` has rational
//! coefficients; [`Coeff::deriv_unit`] carries that difference.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};

pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_int(v: i64) -> Self;
    fn imag_unit() -> Self;
    /// Factor multiplying `m_k` when differentiating a Fourier mode.
    fn deriv_unit() -> Self;
    fn to_c64(&self) -> Complex64;
    fn abs(&self) -> f64 {
        self.to_c64().norm()
    }
    fn scale_int(&self, k: i64) -> Self {
        self.clone() * Self::from_int(k)
    }
}

impl Coeff for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_int(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn deriv_unit() -> Self {
        Complex64::new(0.0, std::f64::consts::TAU)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn abs(&self) -> f64 {
        self.norm()
    }
}

/// Exact Gaussian rational `(re + i·im) / den` with `den > 0` and
/// `gcd(re, im, den) = 1`. Arithmetic panics on `i128` overflow.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GaussRational {
    re: i128,
    im: i128,
    den: i128,
}

impl GaussRational {
    pub fn new(re: i128, im: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let mut g = GaussRational { re, im, den };
        g.normalize();
        g
    }

    pub fn from_parts(re: (i64, i64), im: (i64, i64)) -> Self {
        let (a, b) = (re.0 as i128, re.1 as i128);
        let (c, d) = (im.0 as i128, im.1 as i128);
        GaussRational::new(a * d, c * b, b * d)
    }

    pub fn re_parts(&self) -> (i128, i128) {
        let g = self.re.gcd(&self.den).max(1);
        (self.re / g, self.den / g)
    }

    pub fn im_parts(&self) -> (i128, i128) {
        let g = self.im.gcd(&self.den).max(1);
        (self.im / g, self.den / g)
    }

    pub fn numerators(&self) -> (i128, i128, i128) {
        (self.re, self.im, self.den)
    }

    fn normalize(&mut self) {
        if self.den < 0 {
            self.re = -self.re;
            self.im = -self.im;
            self.den = -self.den;
        }
        if self.re == 0 && self.im == 0 {
            self.den = 1;
            return;
        }
        if self.den != 1 {
            let g = self.re.gcd(&self.im).gcd(&self.den);
            if g > 1 {
                self.re /= g;
                self.im /= g;
                self.den /= g;
            }
        }
    }
}

fn ck_mul(a: i128, b: i128) -> i128 {
    a.checked_mul(b).expect("exact coefficient overflow")
}

fn ck_add(a: i128, b: i128) -> i128 {
    a.checked_add(b).expect("exact coefficient overflow")
}

impl Add for GaussRational {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        if self.den == o.den {
            let mut r = GaussRational {
                re: ck_add(self.re, o.re),
                im: ck_add(self.im, o.im),
                den: self.den,
            };
            r.normalize();
            return r;
        }
        let re = ck_add(ck_mul(self.re, o.den), ck_mul(o.re, self.den));
        let im = ck_add(ck_mul(self.im, o.den), ck_mul(o.im, self.den));
        GaussRational::new(re, im, ck_mul(self.den, o.den))
    }
}

impl AddAssign for GaussRational {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for GaussRational {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for GaussRational {
    type Output = Self;
    fn neg(self) -> Self {
        GaussRational {
            re: -self.re,
            im: -self.im,
            den: self.den,
        }
    }
}

impl Mul for GaussRational {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let re = ck_add(ck_mul(self.re, o.re), -ck_mul(self.im, o.im));
        let im = ck_add(ck_mul(self.re, o.im), ck_mul(self.im, o.re));
        let den = ck_mul(self.den, o.den);
        if den == 1 {
            return GaussRational { re, im, den };
        }
        GaussRational::new(re, im, den)
    }
}

impl Coeff for GaussRational {
    fn zero() -> Self {
        GaussRational { re: 0, im: 0, den: 1 }
    }
    fn one() -> Self {
        GaussRational { re: 1, im: 0, den: 1 }
    }
    fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }
    fn from_int(v: i64) -> Self {
        GaussRational { re: v as i128, im: 0, den: 1 }
    }
    fn imag_unit() -> Self {
        GaussRational { re: 0, im: 1, den: 1 }
    }
    fn deriv_unit() -> Self {
        Self::imag_unit()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re as f64 / self.den as f64,
            self.im as f64 / self.den as f64,
        )
    }
    fn scale_int(&self, k: i64) -> Self {
        match k {
            1 => *self,
            -1 => -*self,
            _ => *self * Self::from_int(k),
        }
    }
}

impl fmt::Debug for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.re_parts();
        let (c, d) = self.im_parts();
        let part = |n: i128, m: i128| {
            if m == 1 {
                format!("{n}")
            } else {
                format!("{n}/{m}")
            }
        };
        if c == 0 {
            write!(f, "{}", part(a, b))
        } else if a == 0 {
            write!(f, "{}i", part(c, d))
        } else {
            write!(f, "{}{}{}i", part(a, b), if c < 0 { "" } else { "+" }, part(c, d))
        }
    }
}

/// Gaussian integer `a + bi`. The chain differentials only ever multiply by
/// `±1` and `i·m_k`, so basis words stay integral under them; this is the
/// fast exact ring for the exhaustive identity checks.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GaussInt {
    pub re: i64,
    pub im: i64,
}

impl Add for GaussInt {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        GaussInt { re: self.re.checked_add(o.re).expect(OVERFLOW), im: self.im.checked_add(o.im).expect(OVERFLOW) }
    }
}

impl AddAssign for GaussInt {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for GaussInt {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + -o
    }
}

impl Neg for GaussInt {
    type Output = Self;
    fn neg(self) -> Self {
        GaussInt { re: -self.re, im: -self.im }
    }
}

impl Mul for GaussInt {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let m = |a: i64, b: i64| a.checked_mul(b).expect(OVERFLOW);
        GaussInt {
            re: m(self.re, o.re).checked_sub(m(self.im, o.im)).expect(OVERFLOW),
            im: m(self.re, o.im).checked_add(m(self.im, o.re)).expect(OVERFLOW),
        }
    }
}

impl Coeff for GaussInt {
    fn zero() -> Self {
        GaussInt { re: 0, im: 0 }
    }
    fn one() -> Self {
        GaussInt { re: 1, im: 0 }
    }
    fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }
    fn from_int(v: i64) -> Self {
        GaussInt { re: v, im: 0 }
    }
    fn imag_unit() -> Self {
        GaussInt { re: 0, im: 1 }
    }
    fn deriv_unit() -> Self {
        Self::imag_unit()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re as f64, self.im as f64)
    }
    fn scale_int(&self, k: i64) -> Self {
        match k {
            1 => *self,
            -1 => -*self,
            _ => *self * Self::from_int(k),
        }
    }
}

impl fmt::Debug for GaussInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i", self.re, self.im)
    }
}

impl From<GaussInt> for GaussRational {
    fn from(v: GaussInt) -> Self {
        GaussRational::new(v.re as i128, v.im as i128, 1)
    }
}

const OVERFLOW: &str = "exact coefficient overflow";

/// Parses a decimal-free rational `"p"` or `"p/q"`.
pub fn parse_rational(s: &str) -> Result<(i64, i64)> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p = i64::from_str(p).map_err(|e| Error::Parse(format!("rational numerator {p:?}: {e}")))?;
    let q = i64::from_str(q).map_err(|e| Error::Parse(format!("rational denominator {q:?}: {e}")))?;
    if q == 0 {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok((p, q))
}
