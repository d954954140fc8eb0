//! Scalar abstraction shared by the native (`f64`) and extended-precision
//! evaluation paths.
//!
//! Every computational kernel in the crate is written once against [`Real`]
//! and instantiated either with `f64` or with [`Extended`], a thin wrapper
//! around an `astro_float::BigFloat` carrying its working precision.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode};
use serde::{Serialize, Serializer};

/// Precision a value was actually computed with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Precision {
    #[default]
    Native,
    Extended { bits: u32 },
}

impl Precision {
    pub fn bits(self) -> u32 {
        match self {
            Precision::Native => f64::MANTISSA_DIGITS,
            Precision::Extended { bits } => bits,
        }
    }

    /// The wider of two precisions.
    pub fn max(self, other: Precision) -> Precision {
        if other.bits() > self.bits() {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Native => f.write_str("native"),
            Precision::Extended { bits } => write!(f, "extended:{bits}"),
        }
    }
}

impl Serialize for Precision {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Real field operations needed by the linear algebra and the
/// reconstruction kernels.
pub trait Real:
    Clone
    + fmt::Debug
    + Send
    + Sync
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Whatever is needed to materialize constants at the right precision.
    type Ctx: Copy + fmt::Debug + Send + Sync;

    fn lift(v: f64, ctx: Self::Ctx) -> Self;
    fn to_f64(&self) -> f64;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn abs(&self) -> Self;
    fn is_finite(&self) -> bool;
    fn ctx(&self) -> Self::Ctx;
    /// Unit roundoff of the arithmetic, `2^-bits`.
    fn unit_roundoff(ctx: Self::Ctx) -> f64;
    fn precision(ctx: Self::Ctx) -> Precision;
    /// Largest `z` for which `exp(z)` is finite.
    fn max_exp_arg(ctx: Self::Ctx) -> f64;
}

impl Real for f64 {
    type Ctx = ();

    #[inline]
    fn lift(v: f64, _: ()) -> f64 {
        v
    }
    #[inline]
    fn to_f64(&self) -> f64 {
        *self
    }
    #[inline]
    fn exp(&self) -> f64 {
        f64::exp(*self)
    }
    #[inline]
    fn ln(&self) -> f64 {
        f64::ln(*self)
    }
    #[inline]
    fn sqrt(&self) -> f64 {
        f64::sqrt(*self)
    }
    #[inline]
    fn abs(&self) -> f64 {
        f64::abs(*self)
    }
    #[inline]
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    #[inline]
    fn ctx(&self) {}
    fn unit_roundoff(_: ()) -> f64 {
        f64::EPSILON / 2.0
    }
    fn precision(_: ()) -> Precision {
        Precision::Native
    }
    fn max_exp_arg(_: ()) -> f64 {
        709.0
    }
}

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// Working precision of an [`Extended`] value, in mantissa bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bits(pub usize);

/// Multiple-precision real with a fixed working precision.
///
/// Binary operations run at the wider of the two operand precisions.
#[derive(Clone)]
pub struct Extended {
    value: BigFloat,
    bits: usize,
}

impl Extended {
    pub fn new(v: f64, bits: usize) -> Self {
        Extended {
            value: BigFloat::from_f64(v, bits),
            bits,
        }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    fn wrap(value: BigFloat, bits: usize) -> Self {
        Extended { value, bits }
    }
}

impl fmt::Debug for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Extended({:e}, {} bits)", self.to_f64(), self.bits)
    }
}

impl PartialEq for Extended {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

macro_rules! ext_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Extended {
            type Output = Extended;
            fn $method(self, rhs: Extended) -> Extended {
                let bits = self.bits.max(rhs.bits);
                Extended::wrap(self.value.$method(&rhs.value, bits, RM), bits)
            }
        }
    };
}

ext_binop!(Add, add);
ext_binop!(Sub, sub);
ext_binop!(Mul, mul);
ext_binop!(Div, div);

impl Neg for Extended {
    type Output = Extended;
    fn neg(self) -> Extended {
        Extended::wrap(self.value.neg(), self.bits)
    }
}

impl Real for Extended {
    type Ctx = Bits;

    fn lift(v: f64, ctx: Bits) -> Self {
        Extended::new(v, ctx.0)
    }

    fn to_f64(&self) -> f64 {
        let v = &self.value;
        if v.is_nan() {
            return f64::NAN;
        }
        if v.is_inf_pos() {
            return f64::INFINITY;
        }
        if v.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some((words, _, sign, exponent, _)) = v.as_raw_parts() else {
            return f64::NAN;
        };
        let len = words.len();
        if len == 0 || v.is_zero() {
            return 0.0;
        }
        // value = 0.mantissa * 2^exponent, most significant word last
        let hi = words[len - 1] as f64;
        let lo = if len > 1 { words[len - 2] as f64 } else { 0.0 };
        let frac = hi * 2f64.powi(-64) + lo * 2f64.powi(-128);
        let e = exponent;
        // split the scaling so intermediate powers stay representable
        let half = e / 2;
        let magnitude = frac * 2f64.powi(half) * 2f64.powi(e - half);
        if sign.is_negative() {
            -magnitude
        } else {
            magnitude
        }
    }

    fn exp(&self) -> Self {
        let v = CONSTS.with(|cc| self.value.exp(self.bits, RM, &mut cc.borrow_mut()));
        Extended::wrap(v, self.bits)
    }

    fn ln(&self) -> Self {
        let v = CONSTS.with(|cc| self.value.ln(self.bits, RM, &mut cc.borrow_mut()));
        Extended::wrap(v, self.bits)
    }

    fn sqrt(&self) -> Self {
        Extended::wrap(self.value.sqrt(self.bits, RM), self.bits)
    }

    fn abs(&self) -> Self {
        Extended::wrap(self.value.abs(), self.bits)
    }

    fn is_finite(&self) -> bool {
        !(self.value.is_nan() || self.value.is_inf())
    }

    fn ctx(&self) -> Bits {
        Bits(self.bits)
    }

    fn unit_roundoff(ctx: Bits) -> f64 {
        2f64.powi(-(ctx.0 as i32))
    }

    fn precision(ctx: Bits) -> Precision {
        Precision::Extended {
            bits: ctx.0 as u32,
        }
    }

    fn max_exp_arg(_: Bits) -> f64 {
        // astro-float exponents are i32 powers of two
        1.0e9
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_round_trips_f64() {
        for &v in &[1.0, -3.5, 1e-300, 6.02214076e23, -2.0f64.sqrt(), 0.0] {
            assert_eq!(Extended::new(v, 256).to_f64(), v, "value {v}");
        }
    }

    #[test]
    fn extended_arithmetic_is_more_accurate() {
        let one = Extended::new(1.0, 256);
        let tiny = Extended::new(1e-30, 256);
        let diff = (one.clone() + tiny.clone()) - one;
        assert!((diff.to_f64() - 1e-30).abs() < 1e-45);
        assert_eq!((1.0f64 + 1e-30) - 1.0, 0.0);
    }

    #[test]
    fn extended_transcendentals() {
        let x = Extended::new(2.0, 192);
        assert!((x.exp().to_f64() - 2f64.exp()).abs() < 1e-15);
        assert!((x.ln().to_f64() - 2f64.ln()).abs() < 1e-16);
        assert!((x.sqrt().to_f64() - 2f64.sqrt()).abs() < 1e-16);
        let big = Extended::new(800.0, 192).exp();
        assert!(big.is_finite());
        assert!(big.to_f64().is_infinite());
    }

    #[test]
    fn precision_display() {
        assert_eq!(Precision::Native.to_string(), "native");
        assert_eq!(Precision::Extended { bits: 256 }.to_string(), "extended:256");
        assert_eq!(
            Precision::Native.max(Precision::Extended { bits: 128 }),
            Precision::Extended { bits: 128 }
        );
    }
}
