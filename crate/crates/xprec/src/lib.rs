//! Fixed-point extended-precision arithmetic for test oracles.
//!
//! Values are stored as a big integer scaled by `2^FRAC_BITS` (256 fractional
//! bits, roughly 77 significant decimal digits near unity). Every elementary
//! function here is evaluated from its Taylor series or by Newton iteration, so
//! the results are independent of the platform `libm` used by the library under
//! test. Nothing here is tuned for speed.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Number of fractional bits carried by every [`Fixed`].
pub const FRAC_BITS: u32 = 256;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fixed(BigInt);

impl fmt::Debug for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fixed({})", self.to_decimal(40))
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(30))
    }
}

impl Fixed {
    pub fn zero() -> Self {
        Fixed(BigInt::zero())
    }

    pub fn one() -> Self {
        Fixed(BigInt::one() << FRAC_BITS)
    }

    pub fn from_int(n: i64) -> Self {
        Fixed(BigInt::from(n) << FRAC_BITS)
    }

    /// Exact rational `num / den`, truncated toward zero at the last bit.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Fixed((BigInt::from(num) << FRAC_BITS) / BigInt::from(den))
    }

    /// Exact conversion of a finite binary64 value.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite input {x}");
        if x == 0.0 {
            return Self::zero();
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let exp_field = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exp) = if exp_field == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_field - 1075)
        };
        let m = BigInt::from(mantissa);
        let shift = exp + FRAC_BITS as i64;
        let raw = if shift >= 0 {
            m << shift as u32
        } else {
            m >> (-shift) as u32
        };
        Fixed(if negative { -raw } else { raw })
    }

    /// Nearest-ish binary64 value (error below 2^-60 relative).
    pub fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        let mag = self.0.abs();
        let bits = mag.bits() as i64;
        let keep = 62i64;
        let (top, shift) = if bits > keep {
            (&mag >> (bits - keep) as u32, bits - keep)
        } else {
            (mag.clone(), 0)
        };
        let top = top.to_u64().expect("fits in u64") as f64;
        let value = top * 2f64.powi((shift - FRAC_BITS as i64) as i32);
        if self.0.sign() == Sign::Minus {
            -value
        } else {
            value
        }
    }

    /// Decimal expansion truncated to `digits` places after the point.
    pub fn to_decimal(&self, digits: usize) -> String {
        let neg = self.0.sign() == Sign::Minus;
        let mag = self.0.abs();
        let int_part: BigInt = &mag >> FRAC_BITS;
        let mut frac: BigInt = &mag - (&int_part << FRAC_BITS);
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(&int_part.to_string());
        out.push('.');
        let ten = BigInt::from(10);
        for _ in 0..digits {
            frac *= &ten;
            let d: BigInt = &frac >> FRAC_BITS;
            frac -= &d << FRAC_BITS;
            out.push_str(&d.to_string());
        }
        out
    }

    pub fn is_negative(&self) -> bool {
        self.0.sign() == Sign::Minus
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn abs(&self) -> Self {
        Fixed(self.0.abs())
    }

    fn shr(&self, k: u32) -> Self {
        Fixed(&self.0 >> k)
    }

    fn shl(&self, k: u32) -> Self {
        Fixed(&self.0 << k)
    }

    pub fn mul_int(&self, k: i64) -> Self {
        Fixed(&self.0 * BigInt::from(k))
    }

    pub fn div_int(&self, k: i64) -> Self {
        Fixed(&self.0 / BigInt::from(k))
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn recip(&self) -> Self {
        &Fixed::one() / self
    }

    pub fn sqrt(&self) -> Self {
        assert!(!self.is_negative(), "sqrt of negative value");
        Fixed((&self.0 << FRAC_BITS).sqrt())
    }

    pub fn exp(&self) -> Self {
        // Scale into |r| < 2^-12, sum the series, then square back up.
        let mut halvings = 0u32;
        let limit = Fixed::one().shr(12);
        let mut r = self.clone();
        while r.abs() > limit {
            r = r.shr(1);
            halvings += 1;
        }
        let mut sum = Fixed::one();
        let mut term = Fixed::one();
        let mut k = 1i64;
        loop {
            term = (&term * &r).div_int(k);
            if term.is_zero() {
                break;
            }
            sum = &sum + &term;
            k += 1;
        }
        for _ in 0..halvings {
            sum = sum.square();
        }
        sum
    }

    pub fn ln(&self) -> Self {
        assert!(
            !self.is_negative() && !self.is_zero(),
            "ln of non-positive value"
        );
        // Halley iteration on exp(y) = x, started from the binary64 estimate.
        let mut y = Fixed::from_f64(self.to_f64().ln());
        for _ in 0..6 {
            let e = y.exp();
            let step = (self - &e).shl(1) / (self + &e);
            y = &y + &step;
        }
        y
    }

    pub fn powf(&self, p: &Fixed) -> Self {
        (p * &self.ln()).exp()
    }

    pub fn sin(&self) -> Self {
        self.trig_series(true)
    }

    pub fn cos(&self) -> Self {
        self.trig_series(false)
    }

    fn trig_series(&self, odd: bool) -> Self {
        assert!(
            self.abs() < Fixed::from_int(16),
            "argument outside oracle range"
        );
        let x2 = self.square();
        let (mut term, mut k) = if odd {
            (self.clone(), 1i64)
        } else {
            (Fixed::one(), 0i64)
        };
        let mut sum = term.clone();
        loop {
            term = -(&term * &x2).div_int((k + 1) * (k + 2));
            k += 2;
            if term.is_zero() {
                break;
            }
            sum = &sum + &term;
        }
        sum
    }

    pub fn tan(&self) -> Self {
        &self.sin() / &self.cos()
    }

    pub fn atan(&self) -> Self {
        if self.is_negative() {
            return -(-self).atan();
        }
        if *self > Fixed::one() {
            return &pi().shr(1) - &self.recip().atan();
        }
        // Two half-angle reductions bring the argument below tan(pi/16).
        let mut x = self.clone();
        let mut doublings = 0u32;
        for _ in 0..3 {
            x = &x / &(&Fixed::one() + &(&Fixed::one() + &x.square()).sqrt());
            doublings += 1;
        }
        let x2 = x.square();
        let mut power = x.clone();
        let mut sum = x.clone();
        let mut k = 1i64;
        loop {
            power = -(&power * &x2);
            let term = power.div_int(2 * k + 1);
            if term.is_zero() {
                break;
            }
            sum = &sum + &term;
            k += 1;
        }
        sum.shl(doublings)
    }

    pub fn acos(&self) -> Self {
        let one = Fixed::one();
        assert!(self.abs() <= one, "acos argument outside [-1, 1]");
        ((&one - self) / (&one + self)).sqrt().atan().shl(1)
    }

    pub fn sinh(&self) -> Self {
        let e = self.exp();
        (&e - &e.recip()).shr(1)
    }

    pub fn cosh(&self) -> Self {
        let e = self.exp();
        (&e + &e.recip()).shr(1)
    }

    pub fn tanh(&self) -> Self {
        let e2 = self.shl(1).exp();
        (&e2 - &Fixed::one()) / (&e2 + &Fixed::one())
    }

    pub fn acosh(&self) -> Self {
        assert!(*self >= Fixed::one(), "acosh argument below 1");
        (self + &(&self.square() - &Fixed::one()).sqrt()).ln()
    }
}

/// The circle constant from Machin's formula.
pub fn pi() -> Fixed {
    let a = Fixed::ratio(1, 5).atan_series_small();
    let b = Fixed::ratio(1, 239).atan_series_small();
    &a.mul_int(16) - &b.mul_int(4)
}

impl Fixed {
    // Plain Taylor series; only used for the Machin arguments.
    fn atan_series_small(&self) -> Fixed {
        let x2 = self.square();
        let mut power = self.clone();
        let mut sum = self.clone();
        let mut k = 1i64;
        loop {
            power = -(&power * &x2);
            let term = power.div_int(2 * k + 1);
            if term.is_zero() {
                break;
            }
            sum = &sum + &term;
            k += 1;
        }
        sum
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl<'a> $trait<&'a Fixed> for &'a Fixed {
            type Output = Fixed;
            fn $method(self, rhs: &'a Fixed) -> Fixed {
                let f: fn(&Fixed, &Fixed) -> Fixed = $body;
                f(self, rhs)
            }
        }
        impl $trait<Fixed> for Fixed {
            type Output = Fixed;
            fn $method(self, rhs: Fixed) -> Fixed {
                let f: fn(&Fixed, &Fixed) -> Fixed = $body;
                f(&self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| Fixed(&a.0 + &b.0));
forward_binop!(Sub, sub, |a, b| Fixed(&a.0 - &b.0));
forward_binop!(Mul, mul, |a, b| Fixed((&a.0 * &b.0) >> FRAC_BITS));
forward_binop!(Div, div, |a, b| {
    assert!(!b.0.is_zero(), "division by zero");
    Fixed((&a.0 << FRAC_BITS) / &b.0)
});

impl Neg for Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed(-self.0)
    }
}

impl Neg for &Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed(-&self.0)
    }
}

impl PartialEq<f64> for Fixed {
    fn eq(&self, other: &f64) -> bool {
        *self == Fixed::from_f64(*other)
    }
}

impl PartialOrd<f64> for Fixed {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        Some(self.cmp(&Fixed::from_f64(*other)))
    }
}

/// Shorthand for exact decimal literals such as `x("0.1")`.
pub fn x(literal: &str) -> Fixed {
    let (int_part, frac_part) = match literal.split_once('.') {
        Some((i, f)) => (i, f),
        None => (literal, ""),
    };
    let neg = int_part.starts_with('-');
    let digits = format!("{}{}", int_part.trim_start_matches('-'), frac_part);
    let num: BigInt = digits.parse().expect("decimal literal");
    let den = BigInt::from(10).pow(frac_part.len() as u32);
    let v = Fixed((num << FRAC_BITS) / den);
    if neg {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Fixed, b: &Fixed, bits: u32) -> bool {
        (a - b).abs() <= Fixed::one().shr(bits)
    }

    #[test]
    fn pi_digits() {
        assert!(pi()
            .to_decimal(40)
            .starts_with("3.1415926535897932384626433832795028841971"));
    }

    #[test]
    fn exp_ln_roundtrip() {
        for v in ["0.001", "0.5", "1", "2.75", "10"] {
            let a = x(v);
            assert!(close(&a.ln().exp(), &a, 230), "{v}");
        }
        assert!(Fixed::one()
            .exp()
            .to_decimal(35)
            .starts_with("2.71828182845904523536028747135266249"));
    }

    #[test]
    fn trig_identities() {
        let a = x("0.7");
        let s = a.sin();
        let c = a.cos();
        assert!(close(&(&s.square() + &c.square()), &Fixed::one(), 240));
        assert!(close(&a.tan().atan(), &a, 240));
        assert!(close(&(&pi().shr(2)), &Fixed::one().atan(), 240));
        assert!(close(&x("0.5").acos(), &pi().div_int(3), 240));
    }

    #[test]
    fn hyperbolic_identities() {
        let a = x("1.3");
        assert!(close(
            &(&a.cosh().square() - &a.sinh().square()),
            &Fixed::one(),
            230
        ));
        assert!(close(&a.cosh().acosh(), &a, 200));
    }

    #[test]
    fn f64_conversion_is_exact() {
        for v in [0.1, -3.75, 1e-9, 123456.789] {
            assert_eq!(Fixed::from_f64(v).to_f64(), v);
        }
    }
}
