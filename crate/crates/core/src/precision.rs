//! Double-double scalars for the extended-precision paths.
//!
//! [`Dd`] wraps [`twofloat::TwoFloat`] and replaces its division, whose
//! reciprocal step drops the residual and is only accurate to `f64` level.

use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_complex::{Complex, Complex64};
use num_traits::{Num, One, Zero};
use twofloat::TwoFloat;

/// Unit roundoff of [`Dd`] arithmetic, `2^-104`.
pub const DD_UNIT_ROUNDOFF: f64 = 4.930380657631324e-32;

#[derive(Clone, Copy, PartialEq, PartialOrd)]
pub struct Dd(TwoFloat);

pub type CDd = Complex<Dd>;

impl Dd {
    pub const ZERO: Dd = Dd(TwoFloat::from_f64(0.0));
    pub const ONE: Dd = Dd(TwoFloat::from_f64(1.0));

    pub const fn new(x: f64) -> Self {
        Dd(TwoFloat::from_f64(x))
    }

    /// Nearest `f64`.
    pub fn hi(self) -> f64 {
        self.0.hi()
    }

    pub fn lo(self) -> f64 {
        self.0.lo()
    }

    pub fn abs(self) -> Self {
        Dd(self.0.abs())
    }

    pub fn sqrt(self) -> Self {
        Dd(self.0.sqrt())
    }

    pub fn exp(self) -> Self {
        Dd(self.0.exp())
    }

    pub fn sin_cos(self) -> (Self, Self) {
        let (s, c) = self.0.sin_cos();
        (Dd(s), Dd(c))
    }

    pub fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { Dd::ONE / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    pub fn max(self, other: Self) -> Self {
        if other > self { other } else { self }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self { other } else { self }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::new(x)
    }
}

impl From<Dd> for f64 {
    fn from(x: Dd) -> f64 {
        x.hi()
    }
}

impl Default for Dd {
    fn default() -> Self {
        Dd::ZERO
    }
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi(), self.lo())
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, rhs: Dd) -> Dd {
        Dd(self.0 + rhs.0)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, rhs: Dd) -> Dd {
        Dd(self.0 - rhs.0)
    }
}

/// Exact product `a·b = p + e`. Without a hardware FMA the libm `fma`
/// fallback is emulated in software, so use Dekker's splitting instead.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    if cfg!(target_feature = "fma") {
        return (p, a.mul_add(b, -p));
    }
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0;
    if a.abs() > 6.69692879491417e299 {
        let s = a * 3.7252902984619140625e-09;
        let t = SPLITTER * s;
        let hi = t - (t - s);
        return (hi * 268_435_456.0, (s - hi) * 268_435_456.0);
    }
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn mul_parts(ah: f64, al: f64, bh: f64, bl: f64) -> Dd {
    let (p, e) = two_prod(ah, bh);
    if !p.is_finite() {
        return Dd::new(p);
    }
    let e = e + (ah * bl + al * bh);
    Dd(TwoFloat::new_add(p, e))
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, rhs: Dd) -> Dd {
        mul_parts(self.hi(), self.lo(), rhs.hi(), rhs.lo())
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, rhs: f64) -> Dd {
        mul_parts(self.hi(), self.lo(), rhs, 0.0)
    }
}

impl Div for Dd {
    type Output = Dd;
    /// `q₁ = a_hi/b_hi`, then one correction from the exact residual `a − b·q₁`.
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi() / rhs.hi();
        if !q1.is_finite() {
            return Dd::new(q1);
        }
        let r = self - rhs * q1;
        let q2 = r.hi() / rhs.hi();
        let r2 = r - rhs * q2;
        let q3 = r2.hi() / rhs.hi();
        Dd(TwoFloat::new_add(q1, q2) + q3)
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, rhs: Dd) -> Dd {
        let q = Dd((self / rhs).0.trunc());
        self - q * rhs
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd(-self.0)
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for Dd {
            fn $m(&mut self, rhs: Dd) {
                *self = *self $op rhs;
            }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /, RemAssign rem_assign %);

impl Zero for Dd {
    fn zero() -> Self {
        Dd::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi() == 0.0 && self.lo() == 0.0
    }
}

impl One for Dd {
    fn one() -> Self {
        Dd::ONE
    }
}

impl Num for Dd {
    type FromStrRadixErr = num_traits::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Dd::new)
    }
}

impl std::iter::Sum for Dd {
    fn sum<I: Iterator<Item = Dd>>(iter: I) -> Dd {
        iter.fold(Dd::ZERO, |a, b| a + b)
    }
}

/// Arithmetic shared by the `f64` and [`Dd`] versions of generic kernels.
pub trait Real:
    Copy + PartialOrd + Num + Neg<Output = Self> + AddAssign + SubAssign + MulAssign + DivAssign + Send + Sync + fmt::Debug + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Real for Dd {
    fn from_f64(x: f64) -> Self {
        Dd::new(x)
    }
    fn to_f64(self) -> f64 {
        self.hi()
    }
}

pub fn cdd(z: Complex64) -> CDd {
    CDd::new(Dd::new(z.re), Dd::new(z.im))
}

pub fn creal(x: Dd) -> CDd {
    CDd::new(x, Dd::ZERO)
}

pub fn to_c64(z: CDd) -> Complex64 {
    Complex64::new(z.re.hi(), z.im.hi())
}

/// `|z|` to `f64` precision.
pub fn cabs(z: CDd) -> f64 {
    to_c64(z).norm()
}

/// `zⁿ` for any integer `n`, by repeated squaring.
pub fn cpowi(z: CDd, n: i32) -> CDd {
    let mut base = if n < 0 { CDd::one() / z } else { z };
    let mut e = n.unsigned_abs();
    let mut acc = CDd::one();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}
