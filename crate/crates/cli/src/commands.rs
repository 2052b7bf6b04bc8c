//! Command implementations. Each returns the run report plus the process
//! exit code (0 ok, 1 verification failure, 2 usage, 3 numeric failure).

use std::str::FromStr;

use clap::ValueEnum;
use num_bigint::BigInt;

use bbp_tails::digamma::{remainder_via_averaged_form, remainder_via_digamma, verify_gauss, verify_lemma1};
use bbp_tails::poly::{
    poly_from_weights, verify_absorption_chain,
    verify_core_identity_log2, verify_core_identity_pi, verify_sophie_germain, RationalPoly,
};
use bbp_tails::quad::{
    linear_form, linear_form_integrand, log2_tail_via_integral_detailed, quad01,
    remainder_via_integral_detailed, QuadratureConfig,
};
use bbp_tails::series::{
    bbp_tail_log2, bbp_tail_pi, reference_tail_log2, reference_tail_pi, BBPWeightTable, EvalReport,
};
use bbp_tails::spigot::{hex_digits_pi, hex_digits_tail, DigitResult, TailConstant};
use bbp_tails::{BigRational, Error, PrecFloat, TailIndex};

use crate::report::{RunReport, Status, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, EXIT_VERIFY_FAILED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstantArg {
    Pi,
    Log2,
}

impl ConstantArg {
    fn name(self) -> &'static str {
        match self {
            ConstantArg::Pi => "pi",
            ConstantArg::Log2 => "log2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Bbp,
    Digamma,
    Integral,
    Reference,
    All,
}

impl RouteArg {
    fn name(self) -> &'static str {
        match self {
            RouteArg::Bbp => "bbp",
            RouteArg::Digamma => "digamma",
            RouteArg::Integral => "integral",
            RouteArg::Reference => "reference",
            RouteArg::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Identities,
    Lemmas,
    Oracles,
}

impl SuiteArg {
    fn name(self) -> &'static str {
        match self {
            SuiteArg::Identities => "identities",
            SuiteArg::Lemmas => "lemmas",
            SuiteArg::Oracles => "oracles",
        }
    }
}

fn usage_error(mut report: RunReport, message: &str) -> (RunReport, i32) {
    report.output("error", message);
    report.status = Status::Error;
    (report, EXIT_USAGE)
}

fn numeric_error(mut report: RunReport, err: &Error) -> (RunReport, i32) {
    report.output("error", err);
    report.status = Status::Error;
    let code = match err {
        Error::QuadratureDidNotConverge { .. } | Error::AsymptoticCap { .. } => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    };
    (report, code)
}

fn value_decimals(bits: u32) -> u32 {
    ((bits as u64 * 301 / 1000).saturating_sub(8) as u32).max(12)
}

fn dec(v: &PrecFloat, bits: u32) -> String {
    v.to_decimal_string(value_decimals(bits))
}

fn pow2(k: i32) -> PrecFloat {
    PrecFloat::from_u64(1, 64).mul_pow2(k)
}

fn validate_eval(n: u64, bits: u32) -> Result<TailIndex, String> {
    if bits < 64 {
        return Err(format!("bits must be >= 64 (got {bits})"));
    }
    if bits > 65536 {
        return Err(format!("bits must be <= 65536 (got {bits})"));
    }
    if n < 1 || n > u32::MAX as u64 {
        return Err(format!("n must be a positive tail index (got {n})"));
    }
    Ok(TailIndex::new(n as u32).expect("validated"))
}

struct RouteValue {
    name: &'static str,
    value: PrecFloat,
    budget: PrecFloat,
}

fn eval_routes(
    constant: ConstantArg,
    n: TailIndex,
    bits: u32,
    route: RouteArg,
) -> Result<Vec<RouteValue>, Error> {
    let mut out = Vec::new();
    let want = |r: RouteArg| route == RouteArg::All || route == r;
    if want(RouteArg::Bbp) {
        let EvalReport { value, truncation_bound, .. } = match constant {
            ConstantArg::Pi => bbp_tail_pi(n, bits),
            ConstantArg::Log2 => bbp_tail_log2(n, bits),
        };
        let budget = truncation_bound.add(&value.abs().mul_pow2(4 - bits as i32));
        out.push(RouteValue { name: "bbp", value, budget });
    }
    if want(RouteArg::Digamma) {
        // pi-only; the caller has already rejected log2+digamma
        if constant == ConstantArg::Pi {
            let value = remainder_via_digamma(n, bits);
            out.push(RouteValue { name: "digamma", value, budget: pow2(8 - bits as i32) });
            if route == RouteArg::All {
                let value = remainder_via_averaged_form(n, bits);
                out.push(RouteValue {
                    name: "digamma_averaged",
                    value,
                    budget: pow2(8 - bits as i32),
                });
            }
        }
    }
    if want(RouteArg::Integral) {
        let est = match constant {
            ConstantArg::Pi => remainder_via_integral_detailed(n, bits)?,
            ConstantArg::Log2 => log2_tail_via_integral_detailed(n, bits)?,
        };
        let budget = est.achieved_agreement.add(&pow2(4 - bits as i32));
        out.push(RouteValue { name: "integral", value: est.value, budget });
    }
    if want(RouteArg::Reference) {
        let value = match constant {
            ConstantArg::Pi => reference_tail_pi(n, bits),
            ConstantArg::Log2 => reference_tail_log2(n, bits),
        };
        out.push(RouteValue { name: "reference", value, budget: pow2(6 - bits as i32) });
    }
    Ok(out)
}

pub fn cmd_eval(constant: ConstantArg, n: u64, bits: u32, route: RouteArg) -> (RunReport, i32) {
    let mut report = RunReport::new("eval");
    report
        .input("constant", constant.name())
        .input("n", n)
        .input("bits", bits)
        .input("route", route.name());

    let tail = match validate_eval(n, bits) {
        Ok(t) => t,
        Err(msg) => return usage_error(report, &msg),
    };
    if constant == ConstantArg::Log2 && route == RouteArg::Digamma {
        return usage_error(report, "the digamma route is defined for pi only");
    }

    let routes = match eval_routes(constant, tail, bits, route) {
        Ok(r) => r,
        Err(e) => return numeric_error(report, &e),
    };
    for rv in &routes {
        let key = format!("value_{}", rv.name);
        report.output(&key, dec(&rv.value, bits));
        report.budget(&key, rv.budget.to_sci_string(3));
    }

    if routes.len() > 1 {
        let mut max_disc = PrecFloat::zero(64);
        for i in 0..routes.len() {
            for j in (i + 1)..routes.len() {
                let d = routes[i].value.sub(&routes[j].value).abs();
                if d > max_disc {
                    max_disc = d;
                }
            }
        }
        let summed = routes
            .iter()
            .fold(PrecFloat::zero(64), |acc, rv| acc.add(&rv.budget));
        report.output("max_discrepancy", max_disc.to_sci_string(3));
        report.budget("max_discrepancy", summed.to_sci_string(3));
        if max_disc > summed {
            report.status = Status::Error;
            return (report, EXIT_VERIFY_FAILED);
        }
    }
    (report, EXIT_OK)
}

pub fn cmd_digits(
    constant: ConstantArg,
    n: u64,
    pos: u64,
    count: u32,
    strict: bool,
) -> (RunReport, i32) {
    let mut report = RunReport::new("digits");
    report
        .input("constant", constant.name())
        .input("n", n)
        .input("pos", pos)
        .input("count", count);

    if n > u32::MAX as u64 {
        return usage_error(report, "n out of range");
    }
    let result: Result<DigitResult, Error> = match (constant, n) {
        (ConstantArg::Pi, 0) => hex_digits_pi(pos, count),
        // R'_1 = log 2 exactly, so the full constant reuses the n=1 tail
        (ConstantArg::Log2, 0) => {
            hex_digits_tail(TailConstant::Log2, TailIndex::new(1).expect("1 >= 1"), pos, count)
        }
        (c, n) => {
            let tail = TailIndex::new(n as u32).expect("n >= 1 here");
            let constant = match c {
                ConstantArg::Pi => TailConstant::Pi,
                ConstantArg::Log2 => TailConstant::Log2,
            };
            hex_digits_tail(constant, tail, pos, count)
        }
    };
    let digits = match result {
        Ok(d) => d,
        Err(e) => return numeric_error(report, &e),
    };
    report
        .output("digits", &digits.digits)
        .output("sign", digits.sign)
        .output("position", digits.position)
        .output("confidence_margin", format!("{:.6e}", digits.confidence_margin));
    report
        .budget("digits", format!("exact unless margin < 2^-20; margin {:.6e}", digits.confidence_margin))
        .budget("sign", "exact")
        .budget("position", "exact")
        .budget("confidence_margin", "measured");
    if digits.low_confidence() {
        report.status = Status::LowConfidence;
        let code = if strict { EXIT_NUMERIC } else { EXIT_VERIFY_FAILED };
        return (report, code);
    }
    (report, EXIT_OK)
}

pub fn cmd_verify(suite: SuiteArg, n_max: u64, bits: u32) -> (RunReport, i32) {
    let mut report = RunReport::new("verify");
    report
        .input("suite", suite.name())
        .input("n_max", n_max)
        .input("bits", bits);
    if n_max < 1 {
        return usage_error(report, "n_max must be >= 1");
    }
    if bits < 64 {
        return usage_error(report, "bits must be >= 64");
    }
    match suite {
        SuiteArg::Identities => verify_identities(report),
        SuiteArg::Lemmas => verify_lemmas(report, bits),
        SuiteArg::Oracles => verify_oracles(report, n_max as u32, bits),
    }
}

fn verify_identities(mut report: RunReport) -> (RunReport, i32) {
    let checks = [
        ("sophie_germain", verify_sophie_germain()),
        ("core_identity_pi", verify_core_identity_pi()),
        ("core_identity_log2", verify_core_identity_log2()),
        ("absorption_chain", verify_absorption_chain()),
    ];
    let mut all_pass = true;
    for (name, pass) in checks {
        report.output(name, if pass { "pass" } else { "fail" });
        report.budget(name, "exact");
        all_pass &= pass;
    }
    // the proof polynomials themselves, for the record
    let p = poly_from_weights(&BBPWeightTable::pi_tail());
    let p2 = poly_from_weights(&BBPWeightTable::log2_tail());
    report.output("weight_poly_pi_degree", p.degree());
    report.output("weight_poly_log2_degree", p2.degree());
    report.budget("weight_poly_pi_degree", "exact");
    report.budget("weight_poly_log2_degree", "exact");
    if !all_pass {
        report.status = Status::Error;
        return (report, EXIT_VERIFY_FAILED);
    }
    (report, EXIT_OK)
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn verify_lemmas(mut report: RunReport, bits: u32) -> (RunReport, i32) {
    let bound = pow2(8 - bits as i32);
    let mut failed = false;
    let lemma1_grid = [(1i64, 4i64), (1, 2), (1, 1), (3, 2), (17, 2)];
    for (num, den) in lemma1_grid {
        let key = format!("lemma1[z={num}/{den}]");
        match verify_lemma1(&rational(num, den), bits) {
            Ok(r) => {
                failed |= r > bound;
                report.output(&key, r.to_sci_string(3));
                report.budget(&key, bound.to_sci_string(3));
            }
            Err(e) => return numeric_error(report, &e),
        }
    }
    // the multiplication-formula arguments the averaged form instantiates
    for m in [1u32, 2, 3, 4, 8] {
        for (num, den) in [(3i64, 32i64), (5, 32)] {
            let key = format!("gauss[m={m},z={num}/{den}]");
            match verify_gauss(m, &rational(num, den), bits) {
                Ok(r) => {
                    failed |= r > bound;
                    report.output(&key, r.to_sci_string(3));
                    report.budget(&key, bound.to_sci_string(3));
                }
                Err(e) => return numeric_error(report, &e),
            }
        }
    }
    if failed {
        report.status = Status::Error;
        return (report, EXIT_VERIFY_FAILED);
    }
    (report, EXIT_OK)
}

fn verify_oracles(mut report: RunReport, n_max: u32, bits: u32) -> (RunReport, i32) {
    let mut failed = Vec::new();
    for nn in 1..=n_max {
        let tail = TailIndex::new(nn).expect("nn >= 1");
        for constant in [ConstantArg::Pi, ConstantArg::Log2] {
            let routes = match eval_routes(constant, tail, bits, RouteArg::All) {
                Ok(r) => r,
                Err(e) => return numeric_error(report, &e),
            };
            let mut max_disc = PrecFloat::zero(64);
            for i in 0..routes.len() {
                for j in (i + 1)..routes.len() {
                    let d = routes[i].value.sub(&routes[j].value).abs();
                    if d > max_disc {
                        max_disc = d;
                    }
                }
            }
            let summed = routes
                .iter()
                .fold(PrecFloat::zero(64), |acc, rv| acc.add(&rv.budget));
            let key = format!("{}[n={nn:02}]", constant.name());
            report.output(&key, max_disc.to_sci_string(3));
            report.budget(&key, summed.to_sci_string(3));
            if max_disc > summed {
                failed.push(key);
            }
        }
    }
    if !failed.is_empty() {
        report.output("failed", failed.join(", "));
        report.status = Status::Error;
        return (report, EXIT_VERIFY_FAILED);
    }
    (report, EXIT_OK)
}

pub fn cmd_linear_form(poly_csv: &str, n: u64) -> (RunReport, i32) {
    let mut report = RunReport::new("linear-form");
    report.input("poly", poly_csv).input("n", n);

    let tail = match validate_eval(n, 256) {
        Ok(t) => t,
        Err(msg) => return usage_error(report, &msg),
    };
    let mut coeffs = Vec::new();
    for tok in poly_csv.split(',') {
        match BigRational::from_str(tok.trim()) {
            Ok(c) => coeffs.push(c),
            Err(_) => {
                return usage_error(
                    report,
                    &format!("cannot parse coefficient {:?} as a rational (p/q or integer)", tok.trim()),
                )
            }
        }
    }
    let q = RationalPoly::new(coeffs);
    let triple = linear_form(&q, tail);

    let bits = 256;
    let numeric = triple.eval(bits);
    let integrand = linear_form_integrand(&q, tail, bits);
    let est = match quad01(&integrand, &QuadratureConfig::for_bits(bits), bits + 8) {
        Ok(e) => e,
        Err(e) => return numeric_error(report, &e),
    };
    let residual = numeric.sub(&est.value).abs();
    let budget = est.achieved_agreement.add(&pow2(8 - bits as i32));

    report
        .output("alpha", &triple.alpha)
        .output("beta", &triple.beta)
        .output("gamma", &triple.gamma)
        .output("numeric_value", dec(&numeric, bits))
        .output("quadrature_residual", residual.to_sci_string(3));
    report
        .budget("alpha", "exact")
        .budget("beta", "exact")
        .budget("gamma", "exact")
        .budget("numeric_value", pow2(6 - bits as i32).to_sci_string(3))
        .budget("quadrature_residual", budget.to_sci_string(3));
    if residual > budget {
        report.status = Status::Error;
        return (report, EXIT_VERIFY_FAILED);
    }
    (report, EXIT_OK)
}
