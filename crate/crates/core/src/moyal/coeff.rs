use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact complex rational.
pub type QC = Complex<BigRational>;

/// Coefficient ring of the polynomial engine.
pub trait Coeff:
    Clone
    + PartialEq
    + Debug
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn ratio(num: i64, den: i64) -> Self;
    fn imag_unit() -> Self;
    /// Human-readable form used in reports.
    fn render(&self) -> String;
    /// Size used to rank offending monomials.
    fn magnitude(&self) -> f64;
}

impl Coeff for QC {
    fn ratio(num: i64, den: i64) -> Self {
        Complex::new(BigRational::new(BigInt::from(num), BigInt::from(den)), BigRational::zero())
    }

    fn imag_unit() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }

    fn render(&self) -> String {
        let part = |r: &BigRational| {
            if r.denom().is_one() {
                r.numer().to_string()
            } else {
                format!("{}/{}", r.numer(), r.denom())
            }
        };
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => part(&self.re),
            (true, false) => format!("{}i", part(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                format!("({} {} {}i)", part(&self.re), sign, part(&self.im.abs()))
            }
        }
    }

    fn magnitude(&self) -> f64 {
        use num_traits::ToPrimitive;
        let re = self.re.to_f64().unwrap_or(f64::INFINITY);
        let im = self.im.to_f64().unwrap_or(f64::INFINITY);
        re.hypot(im)
    }
}

impl Coeff for Complex<f64> {
    fn ratio(num: i64, den: i64) -> Self {
        Complex::new(num as f64 / den as f64, 0.0)
    }

    fn imag_unit() -> Self {
        Complex::i()
    }

    fn render(&self) -> String {
        format!("({:e}{:+e}i)", self.re, self.im)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Exact rational `num/den` as a [`QC`].
pub fn q(num: i64, den: i64) -> QC {
    QC::ratio(num, den)
}
