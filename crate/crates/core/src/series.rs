//! Partial sums, remainders, and the weighted base-16 Pochhammer tail
//! series, with rigorous truncation bounds.
//!
//! The tail of the Madhava-Gregory-Leibniz series after `n` terms is
//!
//! ```text
//! R_n  = (-1)^n (2n-1)!/16 * sum_k 16^-k [ 8/(8k+1)_{2n} - 4/(8k+3)_{2n}
//!        - 4/(8k+4)_{2n} - 2/(8k+5)_{2n} + 1/(8k+7)_{2n} + 1/(8k+8)_{2n} ]
//! ```
//!
//! and the alternating-harmonic tail R'_n has the analogous expansion with
//! weights {1, 1, 1/2, -1/4, -1/4, -1/8} at offsets {1, 2, 3, 5, 6, 7} and
//! sign (-1)^(n-1). Both series gain a fixed base-16 digit per term, so a
//! term-count rule with a geometric bound covers any requested precision.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{guard_bits, to_precfloat, BigRational, PrecFloat};
use crate::TailIndex;

/// Rising factorial (a)_m = a (a+1) ... (a+m-1), with (a)_0 = 1.
pub fn pochhammer_rising(a: &BigRational, m: u64) -> BigRational {
    let mut acc = BigRational::one();
    let mut factor = a.clone();
    for _ in 0..m {
        acc *= &factor;
        factor += BigRational::one();
    }
    acc
}

/// Sign prefactor attached to a weight table's series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignRule {
    /// (-1)^n: tails starting at an even index are positive.
    AlternatingFromNegative,
    /// (-1)^(n-1): tails starting at an odd index are positive.
    AlternatingFromPositive,
}

impl SignRule {
    pub fn sign_for(self, n: TailIndex) -> i32 {
        let parity = match self {
            SignRule::AlternatingFromNegative => n.get() % 2,
            SignRule::AlternatingFromPositive => (n.get() + 1) % 2,
        };
        if parity == 0 {
            1
        } else {
            -1
        }
    }
}

/// Weights K(q) of one base-16 Pochhammer series, the global rational
/// scale, and the sign rule. The `(2n-1)!` factor is part of the series
/// definition, not the table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BBPWeightTable {
    entries: Vec<(u8, BigRational)>,
    global_scale: BigRational,
    sign_rule: SignRule,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl BBPWeightTable {
    pub fn new(entries: Vec<(u8, BigRational)>, global_scale: BigRational, sign_rule: SignRule) -> Self {
        let mut seen = [false; 9];
        for (q, _) in &entries {
            assert!((1..=8).contains(q), "offset {q} outside 1..8");
            assert!(!seen[*q as usize], "duplicate offset {q}");
            seen[*q as usize] = true;
        }
        BBPWeightTable { entries, global_scale, sign_rule }
    }

    /// Weights of the pi/4 tail: {1:8, 3:-4, 4:-4, 5:-2, 7:1, 8:1},
    /// scale 1/16, sign (-1)^n (times (2n-1)!).
    pub fn pi_tail() -> Self {
        Self::new(
            vec![
                (1, rat(8, 1)),
                (3, rat(-4, 1)),
                (4, rat(-4, 1)),
                (5, rat(-2, 1)),
                (7, rat(1, 1)),
                (8, rat(1, 1)),
            ],
            rat(1, 16),
            SignRule::AlternatingFromNegative,
        )
    }

    /// Weights of the log-2 tail: {1:1, 2:1, 3:1/2, 5:-1/4, 6:-1/4, 7:-1/8},
    /// scale 1, sign (-1)^(n-1) (times (2n-1)!).
    pub fn log2_tail() -> Self {
        Self::new(
            vec![
                (1, rat(1, 1)),
                (2, rat(1, 1)),
                (3, rat(1, 2)),
                (5, rat(-1, 4)),
                (6, rat(-1, 4)),
                (7, rat(-1, 8)),
            ],
            rat(1, 1),
            SignRule::AlternatingFromPositive,
        )
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), BigRational::one(), SignRule::AlternatingFromNegative)
    }

    pub fn entries(&self) -> &[(u8, BigRational)] {
        &self.entries
    }

    pub fn global_scale(&self) -> &BigRational {
        &self.global_scale
    }

    pub fn sign_rule(&self) -> SignRule {
        self.sign_rule
    }
}

/// One evaluated series: the value, how many terms were summed, and a
/// rigorous bound on everything left out.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub value: PrecFloat,
    pub terms_used: u64,
    pub truncation_bound: PrecFloat,
    pub route: &'static str,
}

/// S_n = sum_{m=0}^{n-1} (-1)^m/(2m+1), summed exactly then rounded.
pub fn partial_sum_mgl(n: TailIndex, bits: u32) -> PrecFloat {
    to_precfloat(&partial_sum_mgl_exact(n), bits)
}

pub fn partial_sum_mgl_exact(n: TailIndex) -> BigRational {
    let mut acc = BigRational::zero();
    for m in 0..n.get() as i64 {
        acc += rat(if m % 2 == 0 { 1 } else { -1 }, 2 * m + 1);
    }
    acc
}

/// S'_n = sum_{k=1}^{n-1} (-1)^(k-1)/k, with S'_1 = 0.
pub fn partial_sum_alt_harmonic(n: TailIndex, bits: u32) -> PrecFloat {
    to_precfloat(&partial_sum_alt_harmonic_exact(n), bits)
}

pub fn partial_sum_alt_harmonic_exact(n: TailIndex) -> BigRational {
    let mut acc = BigRational::zero();
    for k in 1..n.get() as i64 {
        acc += rat(if k % 2 == 1 { 1 } else { -1 }, k);
    }
    acc
}

/// pi from the classic base-16 formula
/// `sum_k 16^-k (4/(8k+1) - 2/(8k+4) - 1/(8k+5) - 1/(8k+6))`,
/// with total error at most `2^(4-bits)`.
pub fn reference_pi(bits: u32) -> PrecFloat {
    // Each term is below 8 * 16^-k, so k up to (bits+12)/4 leaves a tail
    // under 2^(-bits-8).
    let terms = (bits + 12) / 4 + 1;
    let wp = guard_bits(bits, terms as u64);
    let mut acc = PrecFloat::zero(wp);
    for k in 0..terms as i64 {
        let bracket = rat(4, 8 * k + 1) - rat(2, 8 * k + 4) - rat(1, 8 * k + 5) - rat(1, 8 * k + 6);
        let term = bracket / BigRational::from_integer(BigInt::one() << (4 * k as u64));
        acc = acc.add(&to_precfloat(&term, wp));
    }
    acc.with_precision(bits)
}

/// log 2 as `sum_{k>=1} 1/(k 2^k)`, with total error at most `2^(4-bits)`.
pub fn reference_log2(bits: u32) -> PrecFloat {
    // Term k is below 2^-k; bits+8 terms leave a tail under 2^(-bits-8)*2.
    let terms = bits + 8;
    let wp = guard_bits(bits, terms as u64);
    let mut acc = PrecFloat::zero(wp);
    for k in 1..=terms as u64 {
        let term = BigRational::new(BigInt::one(), BigInt::from(k) << k);
        acc = acc.add(&to_precfloat(&term, wp));
    }
    acc.with_precision(bits)
}

/// Integer rising factorial for integer bases; avoids rational reductions
/// in the k-loop.
fn pochhammer_int(base: u64, m: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..m {
        acc *= BigInt::from(base + i);
    }
    acc
}

/// Exact value of term `k` of the full tail series, with all prefactors
/// (16^-k, the sign, (2n-1)!, and the table's global scale) included, so
/// that `sum_k bracket_term(k) = R_n` (resp. R'_n).
pub fn bracket_term(table: &BBPWeightTable, k: u64, n: TailIndex) -> BigRational {
    let bracket: BigRational = table
        .entries()
        .iter()
        .map(|(q, w)| w / BigRational::from_integer(pochhammer_int(8 * k + *q as u64, 2 * n.get() as u64)))
        .sum();
    prefactor(table, n) * bracket / BigRational::from_integer(BigInt::one() << (4 * k))
}

/// sign * (2n-1)! * global_scale
fn prefactor(table: &BBPWeightTable, n: TailIndex) -> BigRational {
    let mut fact = BigInt::one();
    for i in 2..=(2 * n.get() as i64 - 1) {
        fact *= BigInt::from(i);
    }
    let sign = BigInt::from(table.sign_rule().sign_for(n));
    table.global_scale() * BigRational::from_integer(sign * fact)
}

/// Sum of absolute channel values at index k: U(k) = sum_q |K(q)|/(8k+q)_{2n}.
/// Strictly decreasing in k because every Pochhammer factor grows with k.
fn abs_bracket(table: &BBPWeightTable, k: u64, n: TailIndex) -> BigRational {
    table
        .entries()
        .iter()
        .map(|(q, w)| {
            w.abs()
                / BigRational::from_integer(pochhammer_int(8 * k + *q as u64, 2 * n.get() as u64))
        })
        .sum()
}

/// Rigorous bound on `sum_{k>=K} |bracket_term(k)|`.
///
/// Since (8k+q)_{2n} is strictly increasing in k, U(k) = sum_q
/// |K(q)|/(8k+q)_{2n} decreases in k, so |bracket_term(k)| <=
/// prefactor * 16^-k * U(K) for k >= K and the geometric sum gives
///
/// ```text
/// B(K) = |prefactor| * 16^-K * U(K) * 16/15 >= sum_{k>=K} |bracket_term(k)|.
/// ```
///
/// B(K) >= |bracket_term(K)| because U majorizes the signed bracket, and
/// B(K+1) <= B(K) because both factors shrink.
pub fn truncation_bound(table: &BBPWeightTable, n: TailIndex, start: u64) -> Result<BigRational, crate::Error> {
    if start == 0 {
        return Err(crate::Error::InvalidArgument(
            "truncation bound start index must be >= 1".into(),
        ));
    }
    Ok(truncation_bound_from(table, n, start))
}

fn truncation_bound_from(table: &BBPWeightTable, n: TailIndex, start: u64) -> BigRational {
    let u = abs_bracket(table, start, n);
    let geom = rat(16, 15);
    prefactor(table, n).abs() * u * geom / BigRational::from_integer(BigInt::one() << (4 * start))
}

/// Shared evaluator for both tails.
///
/// Each k computes the six Pochhammer values once and reuses them for both
/// the signed bracket and the absolute majorant U(k) driving the stop rule.
/// The bound reported for stopping after terms 0..=k uses U(k) in place of
/// U(k+1); U is decreasing in k, so this stays a valid upper bound.
fn eval_tail(table: &BBPWeightTable, n: TailIndex, bits: u32, route: &'static str) -> EvalReport {
    // Generous cap: one hex digit per term plus slack; the stop rule below
    // almost always exits much earlier.
    let cap = (bits as u64 + 64) / 4 + 2 * n.get() as u64 + 8;
    let wp = guard_bits(bits, cap);
    let pre = prefactor(table, n);
    let pre_abs = pre.abs();
    let m = 2 * n.get() as u64;
    let mut acc = PrecFloat::zero(wp);
    let mut terms_used = 0u64;
    let mut bound = BigRational::zero();
    for k in 0.. {
        let mut signed = BigRational::zero();
        let mut majorant = BigRational::zero();
        for (q, w) in table.entries() {
            let poch = BigRational::from_integer(pochhammer_int(8 * k + *q as u64, m));
            signed += w / &poch;
            majorant += w.abs() / poch;
        }
        let pow16 = BigRational::from_integer(BigInt::one() << (4 * k));
        let term = &pre * signed / &pow16;
        acc = acc.add(&to_precfloat(&term, wp));
        terms_used = k + 1;
        // Everything from k+1 on is below |pre| * 16^-(k+1) * U(k) * 16/15.
        bound = &pre_abs * majorant * rat(16, 15) / (pow16 * BigRational::from_integer(BigInt::from(16)));
        let bound_f = to_precfloat(&bound, 64);
        let floor = acc.abs().with_precision(64);
        let threshold = if floor.abs_ge_pow2(-(bits as i64)) {
            floor.mul_pow2(-(bits as i32) - 8)
        } else {
            PrecFloat::from_u64(1, 64).mul_pow2(-2 * (bits as i32) - 8)
        };
        if bound_f <= threshold || terms_used >= cap {
            break;
        }
    }
    EvalReport {
        value: acc.with_precision(bits),
        terms_used,
        truncation_bound: to_precfloat(&bound, 64),
        route,
    }
}

/// R_n = pi/4 - S_n through the weighted Pochhammer series.
pub fn bbp_tail_pi(n: TailIndex, bits: u32) -> EvalReport {
    eval_tail(&BBPWeightTable::pi_tail(), n, bits, "bbp-series")
}

/// R'_n = log 2 - S'_n through the weighted Pochhammer series.
pub fn bbp_tail_log2(n: TailIndex, bits: u32) -> EvalReport {
    eval_tail(&BBPWeightTable::log2_tail(), n, bits, "bbp-series")
}

/// R_n by the reference route: reference_pi/4 - S_n.
pub fn reference_tail_pi(n: TailIndex, bits: u32) -> PrecFloat {
    let wp = bits + 16;
    reference_pi(wp)
        .mul_pow2(-2)
        .sub(&partial_sum_mgl(n, wp))
        .with_precision(bits)
}

/// R'_n by the reference route: reference_log2 - S'_n.
pub fn reference_tail_log2(n: TailIndex, bits: u32) -> PrecFloat {
    let wp = bits + 16;
    reference_log2(wp)
        .sub(&partial_sum_alt_harmonic(n, wp))
        .with_precision(bits)
}
