//! Digamma evaluation route for the pi/4 tail, plus numeric verification
//! of the two lemmas it rests on.
//!
//! The tail satisfies `4 R_n = (-1)^n (psi((2n+3)/4) - psi((2n+1)/4))`,
//! and averaging each digamma through the multiplication formula with
//! m = 8 gives the equivalent 16-term form whose logarithms cancel. Both
//! are computed here, independently of the series route.
//!
//! psi itself uses upward recurrence to a precision-dependent threshold
//! followed by the Bernoulli asymptotic series
//! `psi(t) ~ ln t - 1/(2t) - sum B_{2k}/(2k t^{2k})`. For real t > 0 the
//! asymptotic remainder after any truncation is bounded in magnitude by
//! the first omitted term, which drives the stopping rule.

use std::sync::Mutex;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{to_precfloat, BigRational, PrecFloat};

use crate::{Error, TailIndex};

/// Tuning knobs for the digamma evaluation.
#[derive(Debug, Clone, Copy)]
pub struct DigammaConfig {
    /// Minimum argument before the asymptotic series applies (>= 8).
    pub shift_threshold: u32,
    /// Cap on asymptotic terms before giving up (>= 4).
    pub bernoulli_terms: u32,
}

impl DigammaConfig {
    /// Threshold 0.4*bits keeps the smallest reachable asymptotic term far
    /// below 2^-(bits+8); the term cap is never hit in practice.
    pub fn for_bits(bits: u32) -> Self {
        DigammaConfig {
            shift_threshold: 8.max(bits * 2 / 5 + 1),
            bernoulli_terms: 4.max(bits),
        }
    }
}

fn bernoulli_cache() -> &'static Mutex<Vec<BigRational>> {
    static CACHE: OnceLock<Mutex<Vec<BigRational>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(vec![BigRational::one()]))
}

/// B_0, B_1, ..., B_{2*count}, exactly, via the defining recurrence
/// `sum_{k=0}^{m} C(m+1, k) B_k = 0` with B_0 = 1 (so B_1 = -1/2).
pub fn bernoulli_numbers(count: u32) -> Vec<BigRational> {
    let upto = 2 * count as usize;
    let mut cache = bernoulli_cache().lock().unwrap();
    while cache.len() <= upto {
        let m = cache.len();
        // binom(m+1, k) built incrementally across the row
        let mut binom = BigInt::one();
        let mut acc = BigRational::zero();
        for (k, b) in cache.iter().enumerate() {
            acc += b * BigRational::from_integer(binom.clone());
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        let next = -acc / BigRational::from_integer(BigInt::from(m as u64 + 1));
        cache.push(next);
    }
    cache[..=upto].to_vec()
}

/// psi(x) for x > 0 with absolute error at most `2^(4-bits) * max(1, |psi(x)|)`.
pub fn digamma(x: &PrecFloat, bits: u32) -> Result<PrecFloat, Error> {
    digamma_with(DigammaConfig::for_bits(bits), x, bits)
}

pub fn digamma_with(cfg: DigammaConfig, x: &PrecFloat, bits: u32) -> Result<PrecFloat, Error> {
    if x.is_zero() || x.is_negative() {
        return Err(Error::OutOfDomain {
            value: x.to_decimal_string(8),
            domain: "(0, inf)".into(),
        });
    }
    let wp = bits + 48;
    let threshold = PrecFloat::from_u64(cfg.shift_threshold as u64, wp);

    // psi(x) = psi(x + s) - sum_{i=0}^{s-1} 1/(x+i)
    let one = PrecFloat::from_u64(1, wp);
    let mut t = x.with_precision(wp);
    let mut shift_sum = PrecFloat::zero(wp);
    while t < threshold {
        shift_sum = shift_sum.add(&one.div(&t));
        t = t.add(&one);
    }

    // asymptotic series at t >= threshold
    let mut acc = t.ln().sub(&one.div(&t.mul_pow2(1)));
    let inv2 = one.div(&t.mul(&t));
    let mut pw = inv2.clone();
    let mut reached_target = false;
    let mut prev_mag: Option<PrecFloat> = None;
    for k in 1..=cfg.bernoulli_terms {
        let b2k = bernoulli_numbers(k).pop().expect("cache holds B_2k");
        let coeff = b2k / BigRational::from_integer(BigInt::from(2 * k));
        let term = to_precfloat(&coeff, wp).mul(&pw);
        let mag = term.abs();
        // divergence guard: magnitudes must keep shrinking until target
        if let Some(prev) = &prev_mag {
            if mag > *prev {
                break;
            }
        }
        acc = acc.sub(&term);
        if mag.abs_le_pow2(-(bits as i64) - 8) {
            reached_target = true;
            break;
        }
        prev_mag = Some(mag);
        pw = pw.mul(&inv2);
    }
    if !reached_target {
        return Err(Error::AsymptoticCap { cap: cfg.bernoulli_terms });
    }
    Ok(acc.sub(&shift_sum).with_precision(bits))
}

/// Plain partial sum of `sum_t (-1)^t/(t+z)` with midpoint averaging of the
/// final two partial sums (applied when `terms >= 2`; a single-term request
/// returns the bare first term). Error is about `1/(2 (terms+z)^2)`.
pub fn alt_sum_direct(z: &PrecFloat, terms: u64) -> Result<PrecFloat, Error> {
    if z.is_zero() || z.is_negative() {
        return Err(Error::OutOfDomain {
            value: z.to_decimal_string(8),
            domain: "(0, inf)".into(),
        });
    }
    if terms == 0 {
        return Err(Error::InvalidArgument("terms must be >= 1".into()));
    }
    let wp = z.precision_bits().max(96);
    let one = PrecFloat::from_u64(1, wp);
    let mut acc = PrecFloat::zero(wp);
    let mut denom = z.with_precision(wp);
    let mut last = PrecFloat::zero(wp);
    for t in 0..terms {
        last = one.div(&denom);
        if t % 2 == 1 {
            last = last.neg();
        }
        acc = acc.add(&last);
        denom = denom.add(&one);
    }
    if terms >= 2 {
        // midpoint of S_{terms-1} and S_{terms}
        acc = acc.sub(&last.mul_pow2(-1));
    }
    Ok(acc)
}

/// `sum_t (-1)^t/(t+z)` by the Cohen-Rodriguez Villegas-Zagier Chebyshev
/// acceleration, exact in rational arithmetic until the final rounding.
///
/// For z > 0 the terms 1/(t+z) = integral of x^(t+z-1) over [0,1] form a
/// Hausdorff moment sequence, so the scheme's error after N steps is below
/// `2 a_0 / (3+sqrt 8)^N` with a_0 = 1/z. N is chosen so that this is
/// under `2^-(bits+16)`.
pub fn alt_sum_accelerated(z: &BigRational, bits: u32) -> Result<PrecFloat, Error> {
    if !z.is_positive() {
        return Err(Error::OutOfDomain {
            value: z.to_string(),
            domain: "(0, inf)".into(),
        });
    }
    // log2(3+sqrt 8) = 2.543...; 0.3933 > 1/2.543 covers the ceiling.
    let a0_bits = (z.denom().bits() as i64 - z.numer().bits() as i64).max(0) as u32;
    let n = ((bits + 18 + a0_bits) as f64 * 0.3933).ceil() as u64 + 2;

    // d = ((3+sqrt8)^n + (3-sqrt8)^n)/2 via d_{j+1} = 6 d_j - d_{j-1}
    let mut d_prev = BigInt::one();
    let mut d = BigInt::from(3);
    for _ in 1..n {
        let next = BigInt::from(6) * &d - &d_prev;
        d_prev = std::mem::replace(&mut d, next);
    }

    let mut b = -BigRational::one();
    let mut c = -BigRational::from_integer(d.clone());
    let mut s = BigRational::zero();
    for k in 0..n {
        c = &b - &c;
        let kq = BigRational::from_integer(BigInt::from(k));
        let a_k = (kq.clone() + z).recip();
        s += &c * a_k;
        // b *= (k+n)(k-n) / ((k+1/2)(k+1))
        let num = BigRational::from_integer(BigInt::from(k + n) * (BigInt::from(k) - BigInt::from(n)));
        let den = (kq.clone() + BigRational::new(BigInt::one(), BigInt::from(2)))
            * (kq + BigRational::one());
        b = b * num / den;
    }
    Ok(to_precfloat(&(s / BigRational::from_integer(d)), bits + 8))
}

/// Residual of the alternating-sum transformation
/// `sum_t (-1)^t/(t+z) = (psi((z+1)/2) - psi(z/2))/2` at a rational z > 0.
pub fn verify_lemma1(z: &BigRational, bits: u32) -> Result<PrecFloat, Error> {
    let wp = bits + 8;
    let lhs = alt_sum_accelerated(z, bits)?;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let upper = digamma(&to_precfloat(&((z + BigRational::one()) * &half), wp), wp)?;
    let lower = digamma(&to_precfloat(&(z * &half), wp), wp)?;
    let rhs = upper.sub(&lower).mul_pow2(-1);
    Ok(lhs.sub(&rhs).abs().with_precision(bits))
}

/// Residual of Gauss's multiplication formula
/// `psi(mz) = (1/m) sum_{r<m} psi(z + r/m) + ln m` at a rational z > 0.
pub fn verify_gauss(m: u32, z: &BigRational, bits: u32) -> Result<PrecFloat, Error> {
    if m < 1 {
        return Err(Error::InvalidArgument("multiplication order must be >= 1".into()));
    }
    let wp = bits + 8;
    let mz = z * BigRational::from_integer(BigInt::from(m));
    let lhs = digamma(&to_precfloat(&mz, wp), wp)?;
    let mut sum = PrecFloat::zero(wp);
    for r in 0..m {
        let arg = z + BigRational::new(BigInt::from(r), BigInt::from(m));
        sum = sum.add(&digamma(&to_precfloat(&arg, wp), wp)?);
    }
    let avg = sum.div(&PrecFloat::from_u64(m as u64, wp));
    let log_m = PrecFloat::from_u64(m as u64, wp).ln();
    Ok(lhs.sub(&avg).sub(&log_m).abs().with_precision(bits))
}

/// R_n = (-1)^n/4 (psi((2n+3)/4) - psi((2n+1)/4)).
pub fn remainder_via_digamma(n: TailIndex, bits: u32) -> PrecFloat {
    let wp = bits + 16;
    let nn = 2 * n.get() as i64;
    let upper = digamma(&to_precfloat(&rat(nn + 3, 4), wp), wp).expect("positive argument");
    let lower = digamma(&to_precfloat(&rat(nn + 1, 4), wp), wp).expect("positive argument");
    let diff = upper.sub(&lower).mul_pow2(-2);
    signed_for(n, diff).with_precision(bits)
}

/// R_n from the m = 8 averaged digamma form (Gauss multiplication applied
/// to both digammas; the log terms cancel):
/// `(-1)^n/32 sum_{r=0}^{7} (psi((2n+3)/32 + r/8) - psi((2n+1)/32 + r/8))`.
pub fn remainder_via_averaged_form(n: TailIndex, bits: u32) -> PrecFloat {
    let wp = bits + 16;
    let nn = 2 * n.get() as i64;
    let mut acc = PrecFloat::zero(wp);
    for r in 0..8i64 {
        let hi = rat(nn + 3, 32) + rat(r, 8);
        let lo = rat(nn + 1, 32) + rat(r, 8);
        let hi = digamma(&to_precfloat(&hi, wp), wp).expect("positive argument");
        let lo = digamma(&to_precfloat(&lo, wp), wp).expect("positive argument");
        acc = acc.add(&hi.sub(&lo));
    }
    signed_for(n, acc.mul_pow2(-5)).with_precision(bits)
}

fn signed_for(n: TailIndex, magnitude: PrecFloat) -> PrecFloat {
    if n.get() % 2 == 1 {
        magnitude.neg()
    } else {
        magnitude
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
