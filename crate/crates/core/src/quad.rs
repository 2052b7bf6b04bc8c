//! Integral evaluation route: tanh-sinh quadrature on (0,1) at working
//! precision, the per-offset series components through their beta-integral
//! representation, both tails through their closed integral forms, and the
//! exact moment linear forms alpha + beta pi + gamma log 2.
//!
//! Quadrature results are oracles: the achieved agreement between the last
//! two mesh levels is reported and folded into downstream tolerances, never
//! silently trusted.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{to_precfloat, BigRational, PrecFloat};
use crate::poly::RationalPoly;
use crate::series::pochhammer_rising;
use crate::{Error, TailIndex};

/// Mesh control for [`quad01`].
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    /// Halving depth of the double-exponential mesh (>= 5).
    pub max_level: u32,
    /// Absolute two-level agreement required to stop.
    pub target_eps: PrecFloat,
}

impl QuadratureConfig {
    pub fn for_bits(bits: u32) -> Self {
        QuadratureConfig {
            max_level: 12,
            target_eps: PrecFloat::from_u64(1, 64).mul_pow2(-(bits as i32) - 8),
        }
    }
}

/// A converged quadrature value plus how well the last two levels agreed.
#[derive(Debug, Clone)]
pub struct QuadEstimate {
    pub value: PrecFloat,
    pub achieved_agreement: PrecFloat,
    pub levels_used: u32,
}

/// One abscissa pair of the double-exponential mesh.
struct Node {
    /// u(t) in [1/2, 1); the mirror point u(-t) = 1 - u(t).
    u_plus: PrecFloat,
    u_minus: PrecFloat,
    weight: PrecFloat,
    /// t = 0 contributes a single point.
    center: bool,
}

type NodeCache = Mutex<HashMap<(u32, u32), Arc<Vec<Node>>>>;

fn node_cache() -> &'static NodeCache {
    static CACHE: OnceLock<NodeCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Nodes introduced at `level` (step h = 2^-level): every multiple of h at
/// level 0, odd multiples only afterwards. Generation stops once weights
/// drop below 2^-(wp+24).
fn nodes_for(wp: u32, level: u32) -> Arc<Vec<Node>> {
    if let Some(hit) = node_cache().lock().unwrap().get(&(wp, level)) {
        return hit.clone();
    }
    let one = PrecFloat::from_u64(1, wp);
    let half_pi = PrecFloat::pi(wp).mul_pow2(-1);
    let mut nodes = Vec::new();
    let (mut j, stride) = if level == 0 { (0u64, 1u64) } else { (1, 2) };
    loop {
        // t = j * 2^-level
        let t = PrecFloat::from_u64(j, wp).mul_pow2(-(level as i32));
        let et = t.exp();
        let inv_et = one.div(&et);
        let sinh = et.sub(&inv_et).mul_pow2(-1);
        let cosh = et.add(&inv_et).mul_pow2(-1);
        let a = half_pi.mul(&sinh);
        // u(t) = 1/(1+e^-2a), u(-t) = e^-2a/(1+e^-2a), both cancellation-free
        let q = a.mul_pow2(1).neg().exp();
        let denom = one.add(&q);
        let u_plus = one.div(&denom);
        let u_minus = q.div(&denom);
        // du/dt = (pi/2) cosh t / cosh^2((pi/2) sinh t), halved for (0,1)
        let ea = a.exp();
        let cosh_a = ea.add(&one.div(&ea)).mul_pow2(-1);
        let weight = half_pi.mul(&cosh).div(&cosh_a.mul(&cosh_a)).mul_pow2(-1);
        let negligible = weight.abs_le_pow2(-(wp as i64) - 24);
        nodes.push(Node { u_plus, u_minus, weight, center: j == 0 });
        if negligible && j > 0 {
            break;
        }
        j += stride;
    }
    let nodes = Arc::new(nodes);
    node_cache().lock().unwrap().insert((wp, level), nodes.clone());
    nodes
}

/// Integral of `f` over (0,1) by tanh-sinh level doubling.
///
/// Levels double until two successive estimates agree within
/// `cfg.target_eps` (absolute) or `cfg.max_level` is reached, in which
/// case non-convergence is signalled with the best achieved agreement.
pub fn quad01(
    f: &dyn Fn(&PrecFloat) -> PrecFloat,
    cfg: &QuadratureConfig,
    bits: u32,
) -> Result<QuadEstimate, Error> {
    if cfg.max_level < 5 {
        return Err(Error::InvalidArgument("max_level must be >= 5".into()));
    }
    let wp = bits + 32;
    let mut estimate: Option<PrecFloat> = None;
    let mut sum_all = PrecFloat::zero(wp);
    let mut last_gap: Option<PrecFloat> = None;
    for level in 0..=cfg.max_level {
        let nodes = nodes_for(wp, level);
        for node in nodes.iter() {
            let mut contrib = f(&node.u_plus);
            if !node.center {
                contrib = contrib.add(&f(&node.u_minus));
            }
            sum_all = sum_all.add(&node.weight.mul(&contrib));
        }
        // I_level = h * accumulated weighted sum, h = 2^-level
        let current = sum_all.mul_pow2(-(level as i32));
        if let Some(prev) = estimate {
            let gap = current.sub(&prev).abs();
            // early levels can agree by accident; require some depth
            if level >= 3 && gap <= cfg.target_eps {
                return Ok(QuadEstimate {
                    value: current.with_precision(bits),
                    achieved_agreement: gap.with_precision(64),
                    levels_used: level,
                });
            }
            last_gap = Some(gap);
        }
        estimate = Some(current);
    }
    Err(Error::QuadratureDidNotConverge {
        max_level: cfg.max_level,
        achieved: last_gap
            .map(|g| g.to_decimal_string(40))
            .unwrap_or_else(|| "n/a".into()),
    })
}

/// S_{q,n} = sum_k 16^-k / (8k+q)_{2n} through its integral form
/// `(1/(2n-1)!) * integral of u^(q-1) (1-u)^(2n-1) / (1 - u^8/16)`.
pub fn s_qn_via_integral(q: u32, n: TailIndex, bits: u32) -> Result<PrecFloat, Error> {
    if q < 1 {
        return Err(Error::InvalidArgument("offset q must be >= 1".into()));
    }
    let wp = bits + 32;
    let one = PrecFloat::from_u64(1, wp);
    let est = quad01(
        &|u: &PrecFloat| {
            let num = u.powi(q as u64 - 1).mul(&one.sub(u).powi(2 * n.get() as u64 - 1));
            let den = one.sub(&u.powi(8).mul_pow2(-4));
            num.div(&den)
        },
        &QuadratureConfig::for_bits(bits),
        bits + 8,
    )?;
    let fact = to_precfloat(&factorial(2 * n.get() as u64 - 1), wp);
    Ok(est.value.div(&fact).with_precision(bits))
}

/// The same S_{q,n} by direct summation of the series, as an independent
/// oracle; terms are exact rationals and the geometric stop leaves a tail
/// below 2^-(bits+8) relative to the leading term.
pub fn s_qn_direct_series(q: u32, n: TailIndex, bits: u32) -> PrecFloat {
    let m = 2 * n.get() as u64;
    let wp = bits + 48;
    let mut acc = PrecFloat::zero(wp);
    let mut k = 0u64;
    loop {
        let poch = pochhammer_rising(&BigRational::from_integer(BigInt::from(8 * k + q as u64)), m);
        let term = BigRational::new(BigInt::one(), BigInt::one() << (4 * k)) / poch;
        acc = acc.add(&to_precfloat(&term, wp));
        // terms shrink at least 16x per step
        if 4 * k > bits as u64 + 16 {
            break;
        }
        k += 1;
    }
    acc.with_precision(bits)
}

/// R_n = (-1)^n * integral of v^{2n}/(1+v^2) over (0,1).
pub fn remainder_via_integral(n: TailIndex, bits: u32) -> Result<PrecFloat, Error> {
    Ok(remainder_via_integral_detailed(n, bits)?.value)
}

/// Same, keeping the quadrature agreement for downstream budgets.
pub fn remainder_via_integral_detailed(n: TailIndex, bits: u32) -> Result<QuadEstimate, Error> {
    let wp = bits + 32;
    let one = PrecFloat::from_u64(1, wp);
    let mut est = quad01(
        &|v: &PrecFloat| v.powi(2 * n.get() as u64).div(&one.add(&v.mul(v))),
        &QuadratureConfig::for_bits(bits),
        bits + 8,
    )?;
    est.value = apply_sign(est.value, n.get() % 2 == 1).with_precision(bits);
    Ok(est)
}

/// R'_n = (-1)^(n-1) * integral of 2 v^{2n-1}/(1+v^2) over (0,1).
pub fn log2_tail_via_integral(n: TailIndex, bits: u32) -> Result<PrecFloat, Error> {
    Ok(log2_tail_via_integral_detailed(n, bits)?.value)
}

/// Same, keeping the quadrature agreement for downstream budgets.
pub fn log2_tail_via_integral_detailed(n: TailIndex, bits: u32) -> Result<QuadEstimate, Error> {
    let wp = bits + 32;
    let one = PrecFloat::from_u64(1, wp);
    let mut est = quad01(
        &|v: &PrecFloat| {
            v.powi(2 * n.get() as u64 - 1)
                .mul_pow2(1)
                .div(&one.add(&v.mul(v)))
        },
        &QuadratureConfig::for_bits(bits),
        bits + 8,
    )?;
    est.value = apply_sign(est.value, n.get() % 2 == 0).with_precision(bits);
    Ok(est)
}

fn apply_sign(v: PrecFloat, negate: bool) -> PrecFloat {
    if negate {
        v.neg()
    } else {
        v
    }
}

fn factorial(m: u64) -> BigRational {
    let mut acc = BigInt::one();
    for i in 2..=m {
        acc *= BigInt::from(i);
    }
    BigRational::from_integer(acc)
}

/// An exact value of the form `alpha + beta pi + gamma log 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentTriple {
    pub alpha: BigRational,
    pub beta: BigRational,
    pub gamma: BigRational,
}

impl MomentTriple {
    pub fn zero() -> Self {
        MomentTriple {
            alpha: BigRational::zero(),
            beta: BigRational::zero(),
            gamma: BigRational::zero(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        MomentTriple {
            alpha: &self.alpha + &rhs.alpha,
            beta: &self.beta + &rhs.beta,
            gamma: &self.gamma + &rhs.gamma,
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        MomentTriple {
            alpha: &self.alpha * c,
            beta: &self.beta * c,
            gamma: &self.gamma * c,
        }
    }

    /// Numeric value using the series references for pi and log 2.
    pub fn eval(&self, bits: u32) -> PrecFloat {
        let wp = bits + 16;
        let pi = crate::series::reference_pi(wp);
        let ln2 = crate::series::reference_log2(wp);
        to_precfloat(&self.alpha, wp)
            .add(&to_precfloat(&self.beta, wp).mul(&pi))
            .add(&to_precfloat(&self.gamma, wp).mul(&ln2))
            .with_precision(bits)
    }
}

/// J_m = integral of x^m/(1+x^2) over (0,1), exactly, via
/// J_0 = pi/4, J_1 = (log 2)/2, and J_m = 1/(m-1) - J_{m-2}.
pub fn moment_exact(m: u64) -> MomentTriple {
    let mut current = if m % 2 == 0 {
        MomentTriple {
            alpha: BigRational::zero(),
            beta: BigRational::new(BigInt::one(), BigInt::from(4)),
            gamma: BigRational::zero(),
        }
    } else {
        MomentTriple {
            alpha: BigRational::zero(),
            beta: BigRational::zero(),
            gamma: BigRational::new(BigInt::one(), BigInt::from(2)),
        }
    };
    let mut idx = m % 2;
    while idx < m {
        idx += 2;
        let lead = MomentTriple {
            alpha: BigRational::new(BigInt::one(), BigInt::from(idx - 1)),
            beta: BigRational::zero(),
            gamma: BigRational::zero(),
        };
        current = lead.add(&current.scale(&-BigRational::one()));
    }
    current
}

/// L = integral of Q(1-x) x^{2n} / (1+x^2) over (0,1), exactly, by
/// expanding the numerator into monomials and summing moments.
pub fn linear_form(q: &RationalPoly, n: TailIndex) -> MomentTriple {
    let one_minus_x = RationalPoly::from_integers(&[1, -1]);
    let numerator = q.compose(&one_minus_x).shift_up(2 * n.get() as usize);
    let mut acc = MomentTriple::zero();
    for (m, c) in numerator.coeffs().iter().enumerate() {
        if !c.is_zero() {
            acc = acc.add(&moment_exact(m as u64).scale(c));
        }
    }
    acc
}

/// The linear-form integrand Q(1-x) x^{2n} / (1+x^2), for cross-checks.
pub fn linear_form_integrand(
    q: &RationalPoly,
    n: TailIndex,
    bits: u32,
) -> impl Fn(&PrecFloat) -> PrecFloat + '_ {
    let wp = bits + 32;
    move |x: &PrecFloat| {
        let one = PrecFloat::from_u64(1, wp);
        let qval = eval_poly(q, &one.sub(x));
        qval.mul(&x.powi(2 * n.get() as u64)).div(&one.add(&x.mul(x)))
    }
}

fn eval_poly(p: &RationalPoly, x: &PrecFloat) -> PrecFloat {
    let wp = x.precision_bits();
    let mut acc = PrecFloat::zero(wp);
    for c in p.coeffs().iter().rev() {
        acc = acc.mul(x).add(&to_precfloat(c, wp));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{
        bbp_tail_log2, bbp_tail_pi, reference_log2, reference_pi, reference_tail_log2,
    };

    fn n(v: u32) -> TailIndex {
        TailIndex::new(v).unwrap()
    }

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn quad_constant_and_linear() {
        let cfg = QuadratureConfig::for_bits(192);
        let one = quad01(&|_| PrecFloat::from_u64(1, 224), &cfg, 200).unwrap();
        assert!(one.value.sub(&PrecFloat::from_u64(1, 224)).abs_le_pow2(-190));
        let lin = quad01(&|u| u.clone(), &cfg, 200).unwrap();
        let half = to_precfloat(&rat(1, 2), 224);
        assert!(lin.value.sub(&half).abs_le_pow2(-190));
    }

    #[test]
    fn quad_arctangent_kernel() {
        // integral of 1/(1+u^2) = pi/4, to well past 30 decimals at 256 bits
        let cfg = QuadratureConfig::for_bits(256);
        let one = PrecFloat::from_u64(1, 296);
        let est = quad01(&|u| one.div(&one.add(&u.mul(u))), &cfg, 264).unwrap();
        let expect = reference_pi(296).mul_pow2(-2);
        assert!(est.value.sub(&expect).abs_le_pow2(-220));
        assert!(est.achieved_agreement.abs_le_pow2(-256));
    }

    #[test]
    fn quad_signals_nonconvergence() {
        // 5 levels cannot reach 2^-520 agreement
        let cfg = QuadratureConfig {
            max_level: 5,
            target_eps: PrecFloat::from_u64(1, 64).mul_pow2(-520),
        };
        let one = PrecFloat::from_u64(1, 576);
        let err = quad01(&|u| one.div(&one.add(&u.mul(u))), &cfg, 544);
        assert!(matches!(err, Err(Error::QuadratureDidNotConverge { .. })));
    }

    #[test]
    fn s_qn_integral_matches_direct_series() {
        for (q, nn) in [(1u32, 1u32), (8, 1), (1, 2), (4, 3)] {
            let via_int = s_qn_via_integral(q, n(nn), 256).unwrap();
            let direct = s_qn_direct_series(q, n(nn), 256);
            assert!(
                via_int.sub(&direct).abs_le_pow2(-150),
                "S_qn mismatch at q={q}, n={nn}"
            );
        }
        // leading terms of the cited examples
        let s11 = s_qn_direct_series(1, n(1), 128);
        assert!(s11.sub(&to_precfloat(&rat(1, 2), 160)).abs() < to_precfloat(&rat(1, 100), 64));
        let s81 = s_qn_direct_series(8, n(1), 128);
        assert!(s81.sub(&to_precfloat(&rat(1, 72), 160)).abs() < to_precfloat(&rat(1, 1000), 64));
        let s12 = s_qn_direct_series(1, n(2), 128);
        assert!(s12.sub(&to_precfloat(&rat(1, 24), 160)).abs() < to_precfloat(&rat(1, 10000), 64));
    }

    #[test]
    fn integral_route_matches_paper_value() {
        let r = remainder_via_integral(n(1), 192).unwrap();
        assert!(r.to_decimal_string(9).starts_with("-0.214601836"));
        let s = bbp_tail_pi(n(3), 256);
        let r3 = remainder_via_integral(n(3), 256).unwrap();
        assert!(r3.sub(&s.value).abs_le_pow2(-150));
    }

    #[test]
    fn integral_route_log2() {
        let r = log2_tail_via_integral(n(1), 192).unwrap();
        assert!(r.to_decimal_string(9).starts_with("0.693147180"));
        let want = reference_log2(224).sub(&PrecFloat::from_u64(1, 224));
        let r2 = log2_tail_via_integral(n(2), 192).unwrap();
        assert!(r2.sub(&want).abs_le_pow2(-150));
        let s = bbp_tail_log2(n(4), 256);
        let r4 = log2_tail_via_integral(n(4), 256).unwrap();
        assert!(r4.sub(&s.value).abs_le_pow2(-150));
        assert!(r4.sub(&reference_tail_log2(n(4), 256)).abs_le_pow2(-150));
    }

    #[test]
    fn route_agreement_through_n10() {
        // integral route sits on the series route to 30+ decimals
        for nn in 1..=10u32 {
            let s = bbp_tail_pi(n(nn), 192).value;
            let i = remainder_via_integral(n(nn), 192).unwrap();
            assert!(i.sub(&s).abs_le_pow2(-120), "pi integral route off at n={nn}");
            let s = bbp_tail_log2(n(nn), 192).value;
            let i = log2_tail_via_integral(n(nn), 192).unwrap();
            assert!(i.sub(&s).abs_le_pow2(-120), "log2 integral route off at n={nn}");
        }
    }

    #[test]
    fn moment_base_cases_and_recurrence() {
        assert_eq!(
            moment_exact(0),
            MomentTriple { alpha: rat(0, 1), beta: rat(1, 4), gamma: rat(0, 1) }
        );
        assert_eq!(
            moment_exact(1),
            MomentTriple { alpha: rat(0, 1), beta: rat(0, 1), gamma: rat(1, 2) }
        );
        assert_eq!(
            moment_exact(2),
            MomentTriple { alpha: rat(1, 1), beta: rat(-1, 4), gamma: rat(0, 1) }
        );
        // telescoping: J_m + J_{m-2} = 1/(m-1), exactly
        for m in 2..=50u64 {
            let sum = moment_exact(m).add(&moment_exact(m - 2));
            assert_eq!(
                sum,
                MomentTriple {
                    alpha: BigRational::new(BigInt::one(), BigInt::from(m - 1)),
                    beta: rat(0, 1),
                    gamma: rat(0, 1)
                },
                "telescoping fails at m={m}"
            );
        }
    }

    #[test]
    fn moments_match_quadrature() {
        let cfg = QuadratureConfig::for_bits(192);
        for m in [0u64, 1, 2, 5, 8] {
            let exact = moment_exact(m).eval(232);
            let one = PrecFloat::from_u64(1, 232);
            let est = quad01(&|x| x.powi(m).div(&one.add(&x.mul(x))), &cfg, 200).unwrap();
            assert!(exact.sub(&est.value).abs_le_pow2(-150), "moment m={m}");
        }
    }

    #[test]
    fn linear_form_examples() {
        let q1 = RationalPoly::from_integers(&[1]);
        assert_eq!(
            linear_form(&q1, n(1)),
            MomentTriple { alpha: rat(1, 1), beta: rat(-1, 4), gamma: rat(0, 1) }
        );
        assert_eq!(
            linear_form(&q1, n(2)),
            MomentTriple { alpha: rat(-2, 3), beta: rat(1, 4), gamma: rat(0, 1) }
        );
        let qu = RationalPoly::from_integers(&[0, 1]);
        assert_eq!(
            linear_form(&qu, n(1)),
            MomentTriple { alpha: rat(1, 2), beta: rat(-1, 4), gamma: rat(1, 2) }
        );
    }

    #[test]
    fn linear_form_matches_quadrature() {
        let q = RationalPoly::new(vec![rat(2, 3), rat(-1, 2), rat(0, 1), rat(5, 7)]);
        for nn in [1u32, 3] {
            let exact = linear_form(&q, n(nn)).eval(232);
            let integrand = linear_form_integrand(&q, n(nn), 200);
            let est = quad01(&integrand, &QuadratureConfig::for_bits(192), 200).unwrap();
            assert!(
                exact.sub(&est.value).abs_le_pow2(-150),
                "linear form mismatch at n={nn}"
            );
        }
    }
}
