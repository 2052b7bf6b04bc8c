//! Numeric carriers: explicit-precision binary floats and exact rationals.
//!
//! All approximate computation in this crate flows through [`PrecFloat`], a
//! binary float with an explicit precision in bits. Every elementary
//! operation on inputs of precision `p` is correctly rounded at `p` bits
//! (round-to-even), so its relative error is at most `2^(1-p)`, well inside
//! the documented `2^(2-p)` contract. Exact quantities (series weights,
//! Pochhammer values, polynomial coefficients, moments) are carried by
//! [`BigRational`] and never rounded.
//!
//! Callers own the error budget: an operation that sums `N` terms at target
//! precision `p` computes internally at `p + ceil(log2(N)) + 32` bits (see
//! [`guard_bits`]).

use std::sync::Mutex;
use std::sync::OnceLock;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};

use crate::Error;

pub type BigRational = num_rational::BigRational;

/// Minimum working precision accepted anywhere in the crate.
pub const MIN_PRECISION_BITS: u32 = 64;

const RM: RoundingMode = RoundingMode::ToEven;

fn consts() -> &'static Mutex<Consts> {
    static CONSTS: OnceLock<Mutex<Consts>> = OnceLock::new();
    CONSTS.get_or_init(|| Mutex::new(Consts::new().expect("constants cache allocation")))
}

/// Working precision for summing `terms` values at target precision `bits`.
pub fn guard_bits(bits: u32, terms: u64) -> u32 {
    let log_terms = 64 - terms.max(1).leading_zeros();
    bits + log_terms + 32
}

/// An arbitrary-precision binary float plus the precision it was computed at.
///
/// Immutable after construction; all operations return new values and are
/// safe to call from multiple threads.
#[derive(Debug, Clone)]
pub struct PrecFloat {
    value: BigFloat,
    precision_bits: u32,
}

impl PrecFloat {
    fn wrap(value: BigFloat, precision_bits: u32) -> Self {
        debug_assert!(
            !value.is_nan() && !value.is_inf(),
            "non-finite PrecFloat: {value:?}"
        );
        PrecFloat { value, precision_bits }
    }

    pub fn zero(bits: u32) -> Self {
        Self::wrap(BigFloat::new(bits.max(MIN_PRECISION_BITS) as usize), bits)
    }

    pub fn from_u64(v: u64, bits: u32) -> Self {
        let bits = bits.max(MIN_PRECISION_BITS);
        Self::wrap(BigFloat::from_u64(v, bits as usize), bits)
    }

    pub fn from_i64(v: i64, bits: u32) -> Self {
        let bits = bits.max(MIN_PRECISION_BITS);
        Self::wrap(BigFloat::from_i64(v, bits as usize), bits)
    }

    /// Exact conversion; the result carries `max(bits, v.bits())` precision.
    pub fn from_bigint_exact(v: &BigInt, bits: u32) -> Self {
        let sign = if v.is_negative() { Sign::Neg } else { Sign::Pos };
        let mag = v.magnitude();
        if mag.is_zero() {
            return Self::zero(bits);
        }
        let words = mag.to_u64_digits();
        let bit_len = mag.bits();
        // from_words reads the exponent relative to the top of the word
        // container: value = int(words) * 2^(e - 64*len).
        let container_bits = words.len() as u64 * 64;
        assert!(container_bits < i32::MAX as u64, "integer too large for exponent range");
        let value = BigFloat::from_words(&words, sign, container_bits as i32);
        Self::wrap(value, bits.max(bit_len as u32).max(MIN_PRECISION_BITS))
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.value.is_negative()
    }

    /// Decomposition `|self| = mantissa * 2^(exp2 - mantissa_bits)` with the
    /// mantissa normalized to whole words. Returns `None` for zero.
    fn magnitude_parts(&self) -> Option<(BigUint, i64, i64)> {
        if self.value.is_zero() {
            return None;
        }
        let (words, _n, _s, e, _inexact) =
            self.value.as_raw_parts().expect("finite value has raw parts");
        let mantissa = BigUint::from_slice(
            &words
                .iter()
                .flat_map(|w| [*w as u32, (*w >> 32) as u32])
                .collect::<Vec<_>>(),
        );
        let total_bits = (words.len() * 64) as i64;
        Some((mantissa, e as i64, total_bits))
    }

    /// The exact (dyadic) rational value of the stored float.
    pub fn to_rational_exact(&self) -> BigRational {
        match self.magnitude_parts() {
            None => BigRational::zero(),
            Some((m, e, w)) => {
                let mut num = BigInt::from(m);
                if self.is_negative() {
                    num = -num;
                }
                let shift = e - w;
                if shift >= 0 {
                    BigRational::from_integer(num << shift)
                } else {
                    BigRational::new(num, BigInt::from(1u8) << (-shift))
                }
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        // astro-float has no direct to_f64; go through a short decimal.
        // Only used for diagnostics, never in budgets.
        self.to_decimal_string(25).parse().unwrap_or(f64::NAN)
    }

    fn binop(&self, rhs: &Self, f: impl FnOnce(&BigFloat, &BigFloat, usize) -> BigFloat) -> Self {
        let p = self.precision_bits.max(rhs.precision_bits);
        Self::wrap(f(&self.value, &rhs.value, p as usize), p)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.binop(rhs, |a, b, p| a.add(b, p, RM))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.binop(rhs, |a, b, p| a.sub(b, p, RM))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        self.binop(rhs, |a, b, p| a.mul(b, p, RM))
    }

    /// Panics on an exactly-zero divisor; callers validate domains.
    pub fn div(&self, rhs: &Self) -> Self {
        assert!(!rhs.is_zero(), "division by zero");
        self.binop(rhs, |a, b, p| a.div(b, p, RM))
    }

    pub fn neg(&self) -> Self {
        Self::wrap(self.value.neg(), self.precision_bits)
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.value.abs(), self.precision_bits)
    }

    /// Exact scaling by `2^k`.
    pub fn mul_pow2(&self, k: i32) -> Self {
        if self.value.is_zero() {
            return self.clone();
        }
        let mut v = self.value.clone();
        let e = v.exponent().expect("finite value has an exponent");
        v.set_exponent(e.checked_add(k).expect("exponent overflow"));
        Self::wrap(v, self.precision_bits)
    }

    /// Panics for negative input.
    pub fn sqrt(&self) -> Self {
        assert!(!self.is_negative(), "sqrt of negative value");
        let p = self.precision_bits as usize;
        Self::wrap(self.value.sqrt(p, RM), self.precision_bits)
    }

    /// Natural logarithm. Panics unless `self > 0`.
    pub fn ln(&self) -> Self {
        assert!(!self.is_zero() && !self.is_negative(), "ln requires a positive argument");
        let p = self.precision_bits as usize;
        let mut cc = consts().lock().unwrap();
        Self::wrap(self.value.ln(p, RM, &mut cc), self.precision_bits)
    }

    pub fn exp(&self) -> Self {
        let p = self.precision_bits as usize;
        let mut cc = consts().lock().unwrap();
        Self::wrap(self.value.exp(p, RM, &mut cc), self.precision_bits)
    }

    /// Real power. Panics if the base is negative and the result would be
    /// complex; integer exponents are fine either way.
    pub fn pow(&self, exponent: &Self) -> Self {
        let p = self.precision_bits.max(exponent.precision_bits);
        let mut cc = consts().lock().unwrap();
        let r = self.value.pow(&exponent.value, p as usize, RM, &mut cc);
        assert!(!r.is_nan(), "pow produced an undefined result");
        Self::wrap(r, p)
    }

    pub fn powi(&self, n: u64) -> Self {
        let p = self.precision_bits as usize;
        Self::wrap(self.value.powi(n as usize, p, RM), self.precision_bits)
    }

    /// pi at the given precision (shared cache).
    pub fn pi(bits: u32) -> Self {
        let bits = bits.max(MIN_PRECISION_BITS);
        let mut cc = consts().lock().unwrap();
        Self::wrap(cc.pi(bits as usize, RM), bits)
    }

    /// ln 2 at the given precision (shared cache).
    pub fn ln_2(bits: u32) -> Self {
        let bits = bits.max(MIN_PRECISION_BITS);
        let mut cc = consts().lock().unwrap();
        Self::wrap(cc.ln_2(bits as usize, RM), bits)
    }

    /// Re-rounds to a (usually lower) precision.
    pub fn with_precision(&self, bits: u32) -> Self {
        let bits = bits.max(MIN_PRECISION_BITS);
        let mut v = self.value.clone();
        v.set_precision(bits as usize, RM).expect("set_precision");
        Self::wrap(v, bits)
    }

    /// True iff `|self| <= 2^k`.
    pub fn abs_le_pow2(&self, k: i64) -> bool {
        match self.magnitude_parts() {
            None => true,
            // |x| < 2^e <= 2^k when e <= k; conservative on the boundary.
            Some((_, e, _)) => e <= k,
        }
    }

    /// True iff `|self| >= 2^k`.
    pub fn abs_ge_pow2(&self, k: i64) -> bool {
        match self.magnitude_parts() {
            None => false,
            // |x| >= 2^(e-1) >= 2^k when e - 1 >= k.
            Some((_, e, _)) => e - 1 >= k,
        }
    }

    /// Scientific rendering with `sig` significant digits, truncated toward
    /// zero; exact integer arithmetic, deterministic for a stored value.
    pub fn to_sci_string(&self, sig: u32) -> String {
        assert!(sig >= 1);
        let (m, e, w) = match self.magnitude_parts() {
            None => return "0".into(),
            Some(parts) => parts,
        };
        let sign = if self.is_negative() { "-" } else { "" };
        // |x| lives in [2^(e-1), 2^e); start near floor((e-1) log10 2)
        let mut d10 = ((e - 1) * 30103).div_euclid(100000);
        let lead = loop {
            // D = floor(|x| * 10^(sig-1-d10))
            let k = sig as i64 - 1 - d10;
            let mut num = BigUint::from(m.clone());
            let mut den = BigUint::from(1u8);
            if k >= 0 {
                num *= BigUint::from(10u8).pow(k as u32);
            } else {
                den *= BigUint::from(10u8).pow((-k) as u32);
            }
            let shift = e - w;
            if shift >= 0 {
                num <<= shift;
            } else {
                den <<= -shift;
            }
            let d = num / den;
            let lo = BigUint::from(10u8).pow(sig - 1);
            if d < lo {
                d10 -= 1;
            } else if d >= &lo * BigUint::from(10u8) {
                d10 += 1;
            } else {
                break d;
            }
        };
        let digits = lead.to_string();
        if sig == 1 {
            format!("{sign}{digits}e{d10}")
        } else {
            format!("{sign}{}.{}e{}", &digits[..1], &digits[1..], d10)
        }
    }

    /// Fixed-point decimal rendering with `frac_digits` digits after the
    /// point, truncated toward zero. Deterministic for a given stored value.
    pub fn to_decimal_string(&self, frac_digits: u32) -> String {
        let sign = if self.is_negative() { "-" } else { "" };
        let (m, e, w) = match self.magnitude_parts() {
            None => return format!("0.{}", "0".repeat(frac_digits as usize)),
            Some(parts) => parts,
        };
        // floor(|x| * 10^frac) with |x| = m * 2^(e-w)
        let scaled = BigUint::from(m) * BigUint::from(10u8).pow(frac_digits);
        let shift = e - w;
        let scaled = if shift >= 0 { scaled << shift } else { scaled >> (-shift) };
        let digits = scaled.to_string();
        let f = frac_digits as usize;
        if digits.len() > f {
            let (int_part, frac_part) = digits.split_at(digits.len() - f);
            format!("{sign}{int_part}.{frac_part}")
        } else {
            format!("{sign}0.{}{}", "0".repeat(f - digits.len()), digits)
        }
    }
}

impl PartialEq for PrecFloat {
    fn eq(&self, other: &Self) -> bool {
        self.value.cmp(&other.value) == Some(0)
    }
}

impl PartialOrd for PrecFloat {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.value.cmp(&other.value).map(|c| c.cmp(&0))
    }
}

/// Rounds an exact rational to `bits` bits. Correctly rounded: the relative
/// error is at most `2^(-bits)`, inside the documented `2^(1-bits)` bound.
pub fn to_precfloat(x: &BigRational, bits: u32) -> PrecFloat {
    assert!(bits >= MIN_PRECISION_BITS, "precision below {MIN_PRECISION_BITS} bits");
    if x.is_zero() {
        return PrecFloat::zero(bits);
    }
    let num = PrecFloat::from_bigint_exact(x.numer(), bits);
    let den = PrecFloat::from_bigint_exact(x.denom(), bits);
    // Correctly rounded quotient of two exact operands.
    PrecFloat::wrap(num.value.div(&den.value, bits as usize, RM), bits)
}

/// Base-16 digits of the fractional expansion of `x` in `[0, 1)`.
///
/// Position 0 is the first digit after the point. Digits are read off the
/// stored rounded value by exact integer arithmetic, so ties and boundary
/// cases resolve exactly as the stored value dictates. Requires
/// `precision_bits >= 4*(start+count) + 64` so every requested digit is
/// backed by real mantissa bits.
pub fn hex_digits_of_fraction(x: &PrecFloat, start: u64, count: u32) -> Result<String, Error> {
    if count == 0 {
        return Err(Error::InvalidArgument("digit count must be positive".into()));
    }
    // x < 1 exactly when the binary exponent is <= 0.
    if x.is_negative() || x.abs_ge_pow2(0) {
        return Err(Error::OutOfDomain {
            value: x.to_decimal_string(8),
            domain: "[0, 1)".into(),
        });
    }
    let need = 4 * (start + count as u64) + 64;
    if (x.precision_bits as u64) < need {
        return Err(Error::InsufficientPrecision {
            have: x.precision_bits,
            need: need.min(u32::MAX as u64) as u32,
        });
    }
    let (m, e, w) = match x.magnitude_parts() {
        None => return Ok("0".repeat(count as usize)),
        Some(parts) => parts,
    };
    // floor(x * 16^(start+count)) mod 16^count, as count hex digits.
    let shift = e - w + 4 * (start + count as u64) as i64;
    let shifted = if shift >= 0 { m << shift } else { m >> (-shift) };
    let window = shifted & ((BigUint::from(1u8) << (4 * count)) - 1u8);
    Ok(format!("{:0>width$X}", window, width = count as usize))
}
