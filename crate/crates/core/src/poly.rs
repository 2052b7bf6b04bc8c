//! Exact rational-polynomial engine.
//!
//! Mechanically verifies the algebraic identities the tail series rest on,
//! in cross-multiplied polynomial form (coefficient comparison decides
//! equality; no rational-function normal forms needed), and produces the
//! partial-fraction data that turns Pochhammer denominators into
//! per-offset spigot channels.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::BigRational;
use crate::series::BBPWeightTable;
use crate::TailIndex;

/// Dense polynomial over exact rationals; index i holds the coefficient of u^i.
///
/// Canonical form: the highest stored coefficient is nonzero unless the
/// polynomial is zero. Equality is coefficient-wise on canonical forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        RationalPoly { coeffs }
    }

    pub fn zero() -> Self {
        RationalPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the zero polynomial is reported as 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Returns a copy with coefficient `i` replaced (re-canonicalized).
    pub fn with_coeff(&self, i: usize, c: BigRational) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() <= i {
            coeffs.resize(i + 1, BigRational::zero());
        }
        coeffs[i] = c;
        Self::new(coeffs)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + rhs.coeff(i));
        }
        Self::new(out)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(&BigRational::from_integer((-1).into())))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Multiplies by u^k.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); k];
        out.extend(self.coeffs.iter().cloned());
        Self::new(out)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Substitutes `inner` for u (polynomial composition by Horner).
    pub fn compose(&self, inner: &Self) -> Self {
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&Self::constant(c.clone()));
        }
        acc
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// P(u) = sum_q K(q) u^(q-1) from a weight table.
pub fn poly_from_weights(table: &BBPWeightTable) -> RationalPoly {
    let mut coeffs = Vec::new();
    for (offset, weight) in table.entries() {
        let i = (*offset - 1) as usize;
        if coeffs.len() <= i {
            coeffs.resize(i + 1, BigRational::zero());
        }
        coeffs[i] = weight.clone();
    }
    RationalPoly::new(coeffs)
}

/// (u^2+2u+2)(u^2-2u+2) = u^4 + 4, exactly.
pub fn verify_sophie_germain() -> bool {
    sophie_germain_product(&RationalPoly::from_integers(&[2, 2, 1]))
}

fn sophie_germain_product(left: &RationalPoly) -> bool {
    let right = RationalPoly::from_integers(&[2, -2, 1]);
    left.mul(&right) == RationalPoly::from_integers(&[4, 0, 0, 0, 1])
}

/// P(u) (1 + u^4/4) = (-4)(u-1)(u^2+2u+2)(1 - u^8/16), exactly, for the
/// built-in pi weight table.
pub fn verify_core_identity_pi() -> bool {
    verify_core_identity_pi_with(&poly_from_weights(&BBPWeightTable::pi_tail()))
}

/// Same check against an arbitrary candidate polynomial (mutation tests).
pub fn verify_core_identity_pi_with(p: &RationalPoly) -> bool {
    let lhs = p.mul(&RationalPoly::new(vec![
        BigRational::one(),
        BigRational::zero(),
        BigRational::zero(),
        BigRational::zero(),
        rat(1, 4),
    ]));
    let u_minus_1 = RationalPoly::from_integers(&[-1, 1]);
    let quad = RationalPoly::from_integers(&[2, 2, 1]);
    let mut one_minus_u8_16 = vec![BigRational::zero(); 9];
    one_minus_u8_16[0] = BigRational::one();
    one_minus_u8_16[8] = rat(-1, 16);
    let rhs = u_minus_1
        .mul(&quad)
        .mul(&RationalPoly::new(one_minus_u8_16))
        .scale(&rat(-4, 1));
    lhs == rhs
}

/// P'(u) (u^2-2u+2) = 2 (1 - u^8/16), exactly, for the built-in log-2
/// weight table.
pub fn verify_core_identity_log2() -> bool {
    verify_core_identity_log2_with(&poly_from_weights(&BBPWeightTable::log2_tail()))
}

/// Same check against an arbitrary candidate polynomial (mutation tests).
pub fn verify_core_identity_log2_with(p: &RationalPoly) -> bool {
    let lhs = p.mul(&RationalPoly::from_integers(&[2, -2, 1]));
    let mut rhs = vec![BigRational::zero(); 9];
    rhs[0] = rat(2, 1);
    rhs[8] = rat(-1, 8);
    lhs == RationalPoly::new(rhs)
}

/// The absorption step: 4(u^2+2u+2)(u^2-2u+2) = 4(u^4+4) together with
/// (u-1)^2 + 1 = u^2 - 2u + 2.
pub fn verify_absorption_chain() -> bool {
    verify_absorption_chain_with(&RationalPoly::from_integers(&[2, -2, 1]))
}

/// Same check against an arbitrary candidate kernel (mutation tests).
pub fn verify_absorption_chain_with(kernel: &RationalPoly) -> bool {
    let four = rat(4, 1);
    let lhs = RationalPoly::from_integers(&[2, 2, 1]).mul(kernel).scale(&four);
    let rhs = RationalPoly::from_integers(&[4, 0, 0, 0, 1]).scale(&four);
    if lhs != rhs {
        return false;
    }
    // (u-1)^2 + 1 expands to the kernel
    let u_minus_1 = RationalPoly::from_integers(&[-1, 1]);
    let expanded = u_minus_1.mul(&u_minus_1).add(&RationalPoly::from_integers(&[1]));
    expanded == *kernel
}

/// Partial fractions of 1/((x+q)(x+q+1)...(x+q+2n-1)).
///
/// The expansion is `sum_j c_j / (x+q+j)` with the closed-form residues
/// `c_j = (-1)^j / (j! (2n-1-j)!)`; `(2n-1)! c_j = (-1)^j binom(2n-1, j)`
/// is the integer-weight bridge digit extraction relies on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialFractionExpansion {
    pub n: TailIndex,
    pub q: u32,
    /// Pairs (j, c_j) for j = 0..2n-1.
    pub terms: Vec<(u32, BigRational)>,
}

impl PartialFractionExpansion {
    /// Evaluates sum_j c_j/(x+q+j) at a rational point (must avoid poles).
    pub fn eval(&self, x: &BigRational) -> BigRational {
        let q = BigRational::from_integer(self.q.into());
        self.terms
            .iter()
            .map(|(j, c)| c / (x + &q + BigRational::from_integer((*j).into())))
            .sum()
    }
}

/// Closed-form residues of 1/((x+q)_{2n}).
pub fn pochhammer_partial_fractions(q: u32, n: TailIndex) -> PartialFractionExpansion {
    assert!(q >= 1, "offset must be positive");
    let len = 2 * n.get();
    let mut fact = vec![BigInt::one(); len as usize];
    for i in 1..len as usize {
        fact[i] = &fact[i - 1] * BigInt::from(i);
    }
    let terms = (0..len)
        .map(|j| {
            let denom = &fact[j as usize] * &fact[(len - 1 - j) as usize];
            let sign = if j % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            (j, BigRational::new(sign, denom))
        })
        .collect();
    PartialFractionExpansion { n, q, terms }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::pochhammer_rising;
    use proptest::prelude::*;

    fn ri(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn weight_tables_map_to_proof_polynomials() {
        let p = poly_from_weights(&BBPWeightTable::pi_tail());
        assert_eq!(
            p,
            RationalPoly::new(vec![
                ri(8),
                ri(0),
                ri(-4),
                ri(-4),
                ri(-2),
                ri(0),
                ri(1),
                ri(1),
            ])
        );
        let p2 = poly_from_weights(&BBPWeightTable::log2_tail());
        assert_eq!(
            p2,
            RationalPoly::new(vec![
                ri(1),
                ri(1),
                rat(1, 2),
                ri(0),
                rat(-1, 4),
                rat(-1, 4),
                rat(-1, 8),
            ])
        );
        assert!(poly_from_weights(&BBPWeightTable::empty()).is_zero());
    }

    #[test]
    fn identity_verifiers_pass_on_builtins() {
        assert!(verify_sophie_germain());
        assert!(verify_core_identity_pi());
        assert!(verify_core_identity_log2());
        assert!(verify_absorption_chain());
    }

    #[test]
    fn sophie_germain_spot_checks() {
        // perturbed left factor must be detected
        assert!(!sophie_germain_product(&RationalPoly::from_integers(&[3, 2, 1])));
        // evaluation spot check at u=1: 5*1 = 1+4
        let left = RationalPoly::from_integers(&[2, 2, 1]);
        let right = RationalPoly::from_integers(&[2, -2, 1]);
        assert_eq!(left.eval(&ri(1)) * right.eval(&ri(1)), ri(5));
    }

    #[test]
    fn core_identity_spot_checks() {
        let p = poly_from_weights(&BBPWeightTable::pi_tail());
        assert_eq!(p.eval(&ri(0)), ri(8));
        let p2 = poly_from_weights(&BBPWeightTable::log2_tail());
        assert_eq!(p2.eval(&ri(0)), ri(1));
        // single-weight mutation K(3) = -5 must be detected
        assert!(!verify_core_identity_pi_with(&p.with_coeff(2, ri(-5))));
        // mutated constant term P'(0) = 2 must be detected
        assert!(!verify_core_identity_log2_with(&p2.with_coeff(0, ri(2))));
        // kernel mutation u^2-2u+3 must be detected
        assert!(!verify_absorption_chain_with(&RationalPoly::from_integers(&[3, -2, 1])));
    }

    #[test]
    fn every_coefficient_mutation_is_rejected() {
        let p = poly_from_weights(&BBPWeightTable::pi_tail());
        for i in 0..=p.degree() {
            for delta in [ri(1), ri(-1)] {
                let mutated = p.with_coeff(i, p.coeff(i) + delta);
                assert!(
                    !verify_core_identity_pi_with(&mutated),
                    "pi identity accepted mutation at u^{i}"
                );
            }
        }
        let p2 = poly_from_weights(&BBPWeightTable::log2_tail());
        for i in 0..=p2.degree() {
            for delta in [ri(1), ri(-1)] {
                let mutated = p2.with_coeff(i, p2.coeff(i) + delta);
                assert!(
                    !verify_core_identity_log2_with(&mutated),
                    "log2 identity accepted mutation at u^{i}"
                );
            }
        }
    }

    #[test]
    fn partial_fractions_small_cases() {
        let n1 = TailIndex::new(1).unwrap();
        let pf = pochhammer_partial_fractions(1, n1);
        assert_eq!(pf.terms, vec![(0, ri(1)), (1, ri(-1))]);

        let n2 = TailIndex::new(2).unwrap();
        let pf = pochhammer_partial_fractions(3, n2);
        let expect = vec![(0, rat(1, 6)), (1, rat(-1, 2)), (2, rat(1, 2)), (3, rat(-1, 6))];
        assert_eq!(pf.terms, expect);
    }

    #[test]
    fn residues_sum_to_zero() {
        for n in 1..=20u32 {
            let pf = pochhammer_partial_fractions(5, TailIndex::new(n).unwrap());
            let total: BigRational = pf.terms.iter().map(|(_, c)| c.clone()).sum();
            assert!(total.is_zero(), "residues at n={n} do not cancel");
        }
    }

    #[test]
    fn expansion_reproduces_pochhammer_reciprocal() {
        // multi-point audit at 2n+1 rational points avoiding poles
        for q in 1..=8u32 {
            for n in [1u32, 2, 3, 5, 8] {
                let tail = TailIndex::new(n).unwrap();
                let pf = pochhammer_partial_fractions(q, tail);
                let points: Vec<BigRational> = (0..(2 * n + 1))
                    .map(|i| ri(1) + rat(i as i64 * 7 + 1, 2) + rat(1, 7 + i as i64))
                    .collect();
                for x in points {
                    let direct = pochhammer_rising(
                        &(x.clone() + BigRational::from_integer(q.into())),
                        2 * n as u64,
                    );
                    assert_eq!(pf.eval(&x), direct.recip(), "q={q} n={n}");
                }
            }
        }
    }

    #[test]
    fn integer_weight_bridge() {
        // (2n-1)! c_j = (-1)^j binom(2n-1, j)
        for n in 1..=20u32 {
            let pf = pochhammer_partial_fractions(1, TailIndex::new(n).unwrap());
            let mut fact = BigInt::one();
            for i in 1..=(2 * n as i64 - 1) {
                fact *= BigInt::from(i);
            }
            let mut binom = BigInt::one();
            for (j, c) in &pf.terms {
                let scaled = c * BigRational::from_integer(fact.clone());
                let sign = if j % 2 == 0 { 1 } else { -1 };
                assert_eq!(scaled, BigRational::from_integer(&binom * BigInt::from(sign)));
                // binom(2n-1, j+1) from binom(2n-1, j)
                let jj = BigInt::from(*j);
                binom = &binom * (BigInt::from(2 * n as i64 - 1) - &jj)
                    / (jj + BigInt::one());
            }
        }
    }

    fn small_poly() -> impl Strategy<Value = RationalPoly> {
        prop::collection::vec((-6i64..=6, 1i64..=4), 0..5)
            .prop_map(|cs| RationalPoly::new(cs.into_iter().map(|(n, d)| rat(n, d)).collect()))
    }

    proptest! {
        #[test]
        fn ring_laws(a in small_poly(), b in small_poly(), c in small_poly()) {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }

        #[test]
        fn eval_is_a_ring_morphism(a in small_poly(), b in small_poly(), x in (-9i64..=9, 1i64..=5)) {
            let x = rat(x.0, x.1);
            prop_assert_eq!(a.add(&b).eval(&x), a.eval(&x) + b.eval(&x));
            prop_assert_eq!(a.mul(&b).eval(&x), a.eval(&x) * b.eval(&x));
        }
    }
}
