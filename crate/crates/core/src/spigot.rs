//! Hex digit extraction at arbitrary positions without computing earlier
//! digits.
//!
//! Every value handled here is a weighted combination of channels
//! `T_c = sum_k 16^-k/(8k+c)`. For digits at position d the spigot forms
//! `frac(16^p T_c)` per channel: terms with k <= p reduce 16^(p-k) modulo
//! (8k+c) so only the fractional part survives, later terms are added
//! directly, and everything lives in a fixed-point accumulator wide enough
//! that the weighted combination keeps ~96 bits of headroom below the
//! requested window.
//!
//! The Pochhammer tails become channels through the partial-fraction
//! bridge: `(2n-1)! c_j = (-1)^j binom(2n-1, j)` turns each table weight
//! K(q) into integer channel weights at offsets c = q+j (the log-2 table
//! is premultiplied by 8 to clear its denominators; the final 2^-3 is
//! folded into the window position). Digits are always reported for
//! |value| with the tail's sign carried separately.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::BigRational;
use crate::{Error, TailIndex};

/// Margins below 2^-20 mark a digit window as untrustworthy.
pub const CONFIDENCE_THRESHOLD: f64 = 1.0 / (1u64 << 20) as f64;

/// The two constants whose tails have built-in channel decompositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailConstant {
    Pi,
    Log2,
}

/// Sign of the value whose absolute digits were extracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailSign {
    Positive,
    Negative,
}

impl std::fmt::Display for TailSign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TailSign::Positive => "+",
            TailSign::Negative => "-",
        })
    }
}

/// One `w / (8k+c)` spigot channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelSpec {
    /// Offset c >= 1 in the denominator 8k+c.
    pub offset: u64,
    /// Integer weight, nonzero.
    pub weight: BigInt,
    /// Power-of-16 prefactor applied to the whole channel sum.
    pub scale_pow16: i32,
}

/// Digits of |value| starting at `position`, plus the sign and how far the
/// window sat from the nearest carry boundary (in units of the last digit).
#[derive(Debug, Clone)]
pub struct DigitResult {
    pub digits: String,
    pub position: u64,
    pub sign: TailSign,
    pub confidence_margin: f64,
}

impl DigitResult {
    pub fn low_confidence(&self) -> bool {
        self.confidence_margin < CONFIDENCE_THRESHOLD
    }
}

/// The four channels of the classic base-16 formula for pi.
pub fn channels_for_pi() -> Vec<ChannelSpec> {
    [(1u64, 4i64), (4, -2), (5, -1), (6, -1)]
        .into_iter()
        .map(|(offset, w)| ChannelSpec {
            offset,
            weight: BigInt::from(w),
            scale_pow16: 0,
        })
        .collect()
}

const PI_INT_WEIGHTS: [(u64, i64); 6] = [(1, 8), (3, -4), (4, -4), (5, -2), (7, 1), (8, 1)];
// log-2 table weights premultiplied by 8
const LOG2_INT_WEIGHTS: [(u64, i64); 6] = [(1, 8), (2, 8), (3, 4), (5, -2), (6, -2), (7, -1)];

/// Raw (q, j) channel expansion of a tail: offsets q+j with weights
/// `K_int(q) * (-1)^j * binom(2n-1, j)`, sorted by (offset, weight).
/// Duplicate offsets are kept; extraction merges them.
pub fn channels_for_tail(constant: TailConstant, n: TailIndex) -> Vec<ChannelSpec> {
    let (weights, scale) = match constant {
        TailConstant::Pi => (&PI_INT_WEIGHTS, -1),
        TailConstant::Log2 => (&LOG2_INT_WEIGHTS, 0),
    };
    let len = 2 * n.get() as u64;
    let mut channels = Vec::new();
    for (q, k_int) in weights {
        // binom(2n-1, j) built incrementally
        let mut binom = BigInt::one();
        for j in 0..len {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            channels.push(ChannelSpec {
                offset: q + j,
                weight: BigInt::from(*k_int * sign) * &binom,
                scale_pow16: scale,
            });
            binom = binom * BigInt::from(len - 1 - j) / BigInt::from(j + 1);
        }
    }
    channels.sort_by(|a, b| (a.offset, &a.weight).cmp(&(b.offset, &b.weight)));
    channels
}

/// 16^e mod m by binary exponentiation in 128-bit intermediate arithmetic.
fn pow16_mod(e: u64, m: u64) -> u64 {
    debug_assert!(m >= 1 && m < (1 << 63));
    if m == 1 {
        return 0;
    }
    let mut result: u128 = 1;
    let mut base: u128 = 16 % m as u128;
    let mut e = e;
    let m = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    result as u64
}

/// Fixed-point value (frac_bits fractional bits) of
/// `frac(sum_{k>=0} 16^(pos-k) / (8k+c))`, underestimating each term by
/// less than one ulp and neglecting terms past `pos + tail_terms`.
fn fixed_frac_channel(c: u64, pos: i64, tail_terms: u32, frac_bits: u32) -> BigUint {
    let mask = (BigUint::one() << frac_bits) - 1u8;
    let mut acc = BigUint::zero();
    // modular phase: k <= pos keeps only the fractional part of each term
    if pos >= 0 {
        for k in 0..=pos as u64 {
            let m = 8 * k + c;
            let r = pow16_mod(pos as u64 - k, m);
            acc += (BigUint::from(r) << frac_bits) / BigUint::from(m);
            acc &= &mask;
        }
    }
    // direct phase: k > pos contributes 16^(pos-k)/(8k+c) < 1
    let start = (pos + 1).max(0) as u64;
    for k in start..start + tail_terms as u64 {
        let shift = 4 * (k as i64 - pos) as u64;
        if shift >= frac_bits as u64 {
            break;
        }
        let m = 8 * k + c;
        acc += (BigUint::one() << (frac_bits as u64 - shift)) / BigUint::from(m);
    }
    acc & mask
}

/// Fractional part of `sum_k 16^(d-k)/(8k+c)` as an exact snapshot of the
/// fixed-point accumulator (at least 96 fractional bits).
pub fn frac_channel(c: u64, d: u64, tail_terms: u32, bits: u32) -> Result<BigRational, Error> {
    if c < 1 {
        return Err(Error::InvalidArgument("channel offset must be >= 1".into()));
    }
    if tail_terms < 1 {
        return Err(Error::InvalidArgument("tail_terms must be >= 1".into()));
    }
    let frac_bits = bits.max(96);
    let fixed = fixed_frac_channel(c, d as i64, tail_terms, frac_bits);
    Ok(BigRational::new(
        BigInt::from(fixed),
        BigInt::one() << frac_bits,
    ))
}

/// Shared window extraction.
///
/// `sigma` is the total binary right-shift from the weighted channel sum V
/// to the target value x = V * 2^-sigma (4 per power of 16 in the channel
/// scale, plus 3 for the log-2 table's cleared denominator). The window is
/// anchored at hex position p = floor((4d - sigma)/4) of V and shifted left
/// by the remaining 0..3 bits, so the first window bit is exactly bit 4d+1
/// of x.
fn extract(
    channels: &[ChannelSpec],
    sigma: u32,
    value_is_negative: bool,
    d: u64,
    count: u32,
    sign: TailSign,
) -> DigitResult {
    // merge duplicate offsets; zero weights drop out
    let mut merged: Vec<(u64, BigInt)> = Vec::new();
    for ch in channels {
        match merged.iter_mut().find(|(c, _)| *c == ch.offset) {
            Some((_, w)) => *w += &ch.weight,
            None => merged.push((ch.offset, ch.weight.clone())),
        }
    }
    merged.retain(|(_, w)| !w.is_zero());
    merged.sort_by(|a, b| a.0.cmp(&b.0));

    let sum_w_bits: u64 = merged
        .iter()
        .fold(BigUint::zero(), |acc, (_, w)| acc + w.magnitude())
        .bits();
    // enough direct terms that the weighted neglected tail stays ~2^-32
    // below the last digit of the window
    let tail_terms = 8 + count + (sum_w_bits as u32).div_ceil(4);

    let p = (4 * d as i64 - sigma as i64).div_euclid(4);
    let skip = (4 * (d as i64 - p) - sigma as i64) as u32;
    debug_assert!(skip < 4);

    let terms = (p.max(0) as u64) + tail_terms as u64 + 2;
    let frac_bits = 96
        + 4 * count
        + sum_w_bits as u32
        + (64 - (merged.len() as u64 * terms).leading_zeros())
        + 16;

    // weighted combination mod 1
    let modulus = BigInt::one() << frac_bits;
    let mut acc = BigInt::zero();
    for (c, w) in &merged {
        let s = fixed_frac_channel(*c, p, tail_terms, frac_bits);
        acc += BigInt::from(s) * w;
    }
    if value_is_negative {
        acc = -acc;
    }
    let frac = acc.mod_floor(&modulus).magnitude().clone();

    // align the window and read the digits
    let mask = (BigUint::one() << frac_bits) - 1u8;
    let window = (frac << skip) & mask;
    let digit_bits = 4 * count;
    let window_digits = &window >> (frac_bits - digit_bits);
    let digits = format!("{:0>width$X}", window_digits, width = count as usize);

    // distance from the nearest carry boundary at the last digit
    let residual_bits = frac_bits - digit_bits;
    let residual = window & ((BigUint::one() << residual_bits) - 1u8);
    let gamma = if residual_bits >= 64 {
        (&residual >> (residual_bits - 64)).to_u64().unwrap_or(0) as f64 / 2f64.powi(64)
    } else {
        residual.to_u64().unwrap_or(0) as f64 / 2f64.powi(residual_bits as i32)
    };
    let confidence_margin = gamma.min(1.0 - gamma);

    DigitResult {
        digits,
        position: d,
        sign,
        confidence_margin,
    }
}

/// Hex digits of the fractional part of pi at positions d..d+count-1.
pub fn hex_digits_pi(d: u64, count: u32) -> Result<DigitResult, Error> {
    check_count(count)?;
    Ok(extract(&channels_for_pi(), 0, false, d, count, TailSign::Positive))
}

/// Hex digits of |R_n| (pi) or |R'_n| (log 2) at positions d..d+count-1,
/// with the tail's sign reported separately.
pub fn hex_digits_tail(
    constant: TailConstant,
    n: TailIndex,
    d: u64,
    count: u32,
) -> Result<DigitResult, Error> {
    check_count(count)?;
    let channels = channels_for_tail(constant, n);
    let (sigma, sign) = match constant {
        // scale 16^-1, bracket sum positive, value sign (-1)^n
        TailConstant::Pi => (
            4,
            if n.get() % 2 == 1 { TailSign::Negative } else { TailSign::Positive },
        ),
        // weights carry the factor 8, so x = V * 2^-3; value sign (-1)^(n-1)
        TailConstant::Log2 => (
            3,
            if n.get() % 2 == 0 { TailSign::Negative } else { TailSign::Positive },
        ),
    };
    Ok(extract(&channels, sigma, false, d, count, sign))
}

fn check_count(count: u32) -> Result<(), Error> {
    if count < 1 || count > 8 {
        return Err(Error::InvalidArgument(
            "digit count must be between 1 and 8 (single fixed-point window)".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{hex_digits_of_fraction, to_precfloat};
    use num_traits::Signed;
    use crate::series::reference_pi;
    use crate::series::{bracket_term, reference_tail_log2, reference_tail_pi, BBPWeightTable};
    use proptest::prelude::*;

    fn n(v: u32) -> TailIndex {
        TailIndex::new(v).unwrap()
    }

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn pi_channels_match_classic_formula() {
        let ch = channels_for_pi();
        assert_eq!(ch.len(), 4);
        assert!(ch.iter().all(|c| c.offset <= 8 && c.scale_pow16 == 0));
        // sum of w/c at k=0 is 4 - 1/2 - 1/5 - 1/6 = 47/15
        let total: BigRational = ch
            .iter()
            .map(|c| BigRational::new(c.weight.clone(), BigInt::from(c.offset)))
            .sum();
        assert_eq!(total, rat(47, 15));
    }

    #[test]
    fn tail_channels_n1_raw_expansion() {
        let ch = channels_for_tail(TailConstant::Pi, n(1));
        let got: Vec<(u64, i64)> = ch
            .iter()
            .map(|c| (c.offset, c.weight.to_i64().unwrap()))
            .collect();
        let expect = vec![
            (1, 8),
            (2, -8),
            (3, -4),
            (4, -4),
            (4, 4),
            (5, -2),
            (5, 4),
            (6, 2),
            (7, 1),
            (8, -1),
            (8, 1),
            (9, -1),
        ];
        assert_eq!(got, expect);
        assert!(ch.iter().all(|c| c.scale_pow16 == -1));
    }

    #[test]
    fn tail_channels_weights_cancel_per_offset_block() {
        // sum_j (-1)^j binom(2n-1, j) = 0, so each q block sums to zero
        for nn in [1u32, 2, 5, 9] {
            for constant in [TailConstant::Pi, TailConstant::Log2] {
                let ch = channels_for_tail(constant, n(nn));
                let total: BigInt = ch.iter().map(|c| c.weight.clone()).sum();
                assert!(total.is_zero());
            }
        }
    }

    #[test]
    fn tail_channels_n2_count_and_range() {
        let ch = channels_for_tail(TailConstant::Pi, n(2));
        assert_eq!(ch.len(), 24, "6 q-values x 4 j-values");
        assert!(ch.iter().all(|c| (1..=11).contains(&c.offset)));
    }

    #[test]
    fn channel_sum_reproduces_bracket_terms_exactly() {
        // sum over channels of w 16^scale sum_{k<=30} 16^-k/(8k+c), in exact
        // rationals, equals |sum_{k<=30} bracket_term(k)| after the scale
        // conventions (x8 for log2), for small n
        for (constant, table, shift) in [
            (TailConstant::Pi, BBPWeightTable::pi_tail(), 0u64),
            (TailConstant::Log2, BBPWeightTable::log2_tail(), 3),
        ] {
            for nn in 1..=3u32 {
                let ch = channels_for_tail(constant, n(nn));
                let mut channel_sum = BigRational::zero();
                for c in &ch {
                    let mut sub = BigRational::zero();
                    for k in 0..=30u64 {
                        sub += BigRational::new(
                            BigInt::one(),
                            BigInt::from(8 * k + c.offset) << (4 * k),
                        );
                    }
                    channel_sum += BigRational::from_integer(c.weight.clone()) * sub;
                }
                let scale = ch[0].scale_pow16;
                if scale < 0 {
                    channel_sum /=
                        BigRational::from_integer(BigInt::one() << (4 * (-scale) as u64));
                }
                channel_sum /= BigRational::from_integer(BigInt::one() << shift);

                let bracket: BigRational =
                    (0..=30).map(|k| bracket_term(&table, k, n(nn))).sum();
                assert_eq!(channel_sum, bracket.abs(), "channel identity fails at n={nn}");
            }
        }
    }

    #[test]
    fn frac_channel_against_exact_series() {
        // oracle: exact rational partial sum over the same term range
        // (k <= d + tail_terms), so only per-term floor error remains
        for (c, d) in [(1u64, 0u64), (7, 0), (1, 3), (5, 10)] {
            let got = frac_channel(c, d, 12, 160).unwrap();
            let mut exact = BigRational::zero();
            for k in 0..=(d + 12) {
                exact += BigRational::new(BigInt::one(), BigInt::from(8 * k + c))
                    * BigRational::new(BigInt::one() << (4 * d), BigInt::one() << (4 * k));
            }
            let frac_exact = exact.fract();
            let diff = (got - frac_exact).abs();
            let bound = BigRational::new(BigInt::from(2 * (d + 14)), BigInt::one() << 160u32);
            assert!(diff < bound, "frac_channel far from exact series at c={c}, d={d}");
        }
    }

    #[test]
    fn frac_channel_leading_term() {
        // at d=0 the k=0 term dominates: frac close to frac(1/c)
        let got = frac_channel(7, 0, 8, 128).unwrap();
        assert!((got - rat(1, 7)).abs() < rat(1, 100));
        // c=1, d=0: frac(1 + 1/144 + 1/4352 + ...) = 0.0071844...
        let got = frac_channel(1, 0, 8, 128).unwrap();
        let approx = to_precfloat(&got, 128).to_decimal_string(7);
        assert!(approx.starts_with("0.0071844"), "got {approx}");
    }

    #[test]
    fn pi_digits_match_rendering_oracle() {
        let r = hex_digits_pi(0, 4).unwrap();
        assert_eq!(r.digits, "243F");
        assert_eq!(r.sign, TailSign::Positive);
        assert!(!r.low_confidence());

        // positions 10 and 100 against the rendering oracle
        for d in [10u64, 100] {
            let bits = 4 * (d as u32 + 4) + 96;
            let frac = reference_pi(bits).sub(&crate::PrecFloat::from_u64(3, bits));
            let expect = hex_digits_of_fraction(&frac, d, 4).unwrap();
            let got = hex_digits_pi(d, 4).unwrap();
            assert_eq!(got.digits, expect, "pi digits at d={d}");
            assert!(!got.low_confidence());
        }
    }

    #[test]
    fn tail_digits_match_rendering_oracle() {
        // pi tail n=1: |pi/4 - 1| = 0.2146018366... -> 36F0
        let r = hex_digits_tail(TailConstant::Pi, n(1), 0, 4).unwrap();
        assert_eq!(r.sign, TailSign::Negative);
        let bits = 4 * 8 + 512;
        let oracle = reference_tail_pi(n(1), bits).abs();
        let expect = hex_digits_of_fraction(&oracle, 0, 4).unwrap();
        assert_eq!(expect, "36F0");
        assert_eq!(r.digits, expect);

        // log2 tail n=1 is log 2 itself: 0xB172...
        let r = hex_digits_tail(TailConstant::Log2, n(1), 0, 4).unwrap();
        assert_eq!(r.sign, TailSign::Positive);
        let oracle = reference_tail_log2(n(1), bits).abs();
        let expect = hex_digits_of_fraction(&oracle, 0, 4).unwrap();
        assert_eq!(expect, "B172");
        assert_eq!(r.digits, expect);

        // a deeper spot: pi tail n=2 at d=25, count=8
        let d = 25u64;
        let bits = 4 * (d as u32 + 8) + 128;
        let oracle = reference_tail_pi(n(2), bits).abs();
        let expect = hex_digits_of_fraction(&oracle, d, 8).unwrap();
        let got = hex_digits_tail(TailConstant::Pi, n(2), d, 8).unwrap();
        assert_eq!(got.digits, expect);
        assert!(!got.low_confidence());
    }

    #[test]
    fn oracle_equivalence_grid() {
        // both constants, n in {1, 2, 5}, positions through 1000: digits
        // equal the rendering oracle and every margin is confident
        for d in [0u64, 10, 100, 1000] {
            let bits = 4 * (d as u32 + 4) + 96;
            for nn in [1u32, 2, 5] {
                let oracle = reference_tail_pi(n(nn), bits).abs();
                let expect = hex_digits_of_fraction(&oracle, d, 4).unwrap();
                let got = hex_digits_tail(TailConstant::Pi, n(nn), d, 4).unwrap();
                assert!(!got.low_confidence(), "(pi, {nn}, {d}) flagged");
                assert_eq!(got.digits, expect, "(pi, {nn}, {d})");

                let oracle = reference_tail_log2(n(nn), bits).abs();
                let expect = hex_digits_of_fraction(&oracle, d, 4).unwrap();
                let got = hex_digits_tail(TailConstant::Log2, n(nn), d, 4).unwrap();
                assert!(!got.low_confidence(), "(log2, {nn}, {d}) flagged");
                assert_eq!(got.digits, expect, "(log2, {nn}, {d})");
            }
        }
    }

    #[test]
    fn position_shift_concatenates() {
        for d in [0u64, 7, 40] {
            let whole = hex_digits_tail(TailConstant::Log2, n(3), d, 4).unwrap();
            let a = hex_digits_tail(TailConstant::Log2, n(3), d, 2).unwrap();
            let b = hex_digits_tail(TailConstant::Log2, n(3), d + 2, 2).unwrap();
            if !whole.low_confidence() && !a.low_confidence() && !b.low_confidence() {
                assert_eq!(format!("{}{}", a.digits, b.digits), whole.digits);
            }
        }
    }

    #[test]
    fn negated_channel_sum_uses_complement() {
        // digits of |-pi| must equal digits of pi when the combined channel
        // value is negative and the extractor is told so
        let negated: Vec<ChannelSpec> = channels_for_pi()
            .into_iter()
            .map(|c| ChannelSpec { weight: -c.weight, ..c })
            .collect();
        let got = extract(&negated, 0, true, 0, 4, TailSign::Negative);
        assert_eq!(got.digits, "243F");
    }

    #[test]
    fn count_limits_enforced() {
        assert!(hex_digits_pi(0, 9).is_err());
        assert!(hex_digits_pi(0, 0).is_err());
        assert!(hex_digits_tail(TailConstant::Pi, n(1), 0, 9).is_err());
    }

    proptest! {
        // modular core against the big-integer oracle
        #[test]
        fn pow16_mod_matches_bigint(e in 0u64..1_000_000, m in 1u64..(1 << 31)) {
            let m = m | 1; // odd
            let got = pow16_mod(e, m);
            let expect = BigUint::from(16u8)
                .modpow(&BigUint::from(e), &BigUint::from(m))
                .to_u64()
                .unwrap();
            prop_assert_eq!(got, expect);
        }
    }
}
