//! The two lambda-invariant criteria for a split odd prime: the generator
//! congruence in the split embedding, and the L-value congruence. Also the
//! closed congruences for the fields of sqrt(1-p) and sqrt(4-p).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::lvalues::{self, rational_string};
use crate::numth::{self, kronecker, mul_mod, pow_mod, Rational};
use crate::quadforms::{self, fundamental_from_radicand, FundamentalDiscriminant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LambdaValue {
    #[serde(rename = "one")]
    One,
    #[serde(rename = "gt1")]
    GreaterThanOne,
}

impl LambdaValue {
    pub fn as_str(self) -> &'static str {
        match self {
            LambdaValue::One => "one",
            LambdaValue::GreaterThanOne => "gt1",
        }
    }
}

impl fmt::Display for LambdaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sands,
    #[serde(rename = "lvalue")]
    LValue,
    Both,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Sands => "sands",
            Method::LValue => "lvalue",
            Method::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LambdaVerdict {
    pub value: LambdaValue,
    pub method: Method,
    /// Labeled integers and rationals, rendered as strings.
    pub witnesses: BTreeMap<String, String>,
}

impl LambdaVerdict {
    fn new(value: LambdaValue, method: Method) -> Self {
        LambdaVerdict {
            value,
            method,
            witnesses: BTreeMap::new(),
        }
    }

    fn witness(mut self, key: &str, value: impl ToString) -> Self {
        self.witnesses.insert(key.to_string(), value.to_string());
        self
    }
}

/// A split prime `p` in `Q(sqrt D)` with its Hensel root, the order of its
/// class, and a generator of the `s`-th power when `p` does not divide `s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitPrimeContext {
    pub p: u64,
    pub d: FundamentalDiscriminant,
    /// Root of `D` mod `p^2`, oriented so that `e_minus(xi)` is a unit.
    pub r: u64,
    pub s: u64,
    pub xi: Option<(BigInt, BigInt)>,
}

/// `(x +- y r)/2 mod p^2`.
fn embed(x: &BigInt, y: &BigInt, r: u64, p2: u64, minus: bool) -> u64 {
    let m = BigInt::from(p2);
    let xr = x.mod_floor(&m).to_u64().expect("reduced");
    let yr = mul_mod(y.mod_floor(&m).to_u64().expect("reduced"), r, p2);
    let num = if minus {
        (xr + p2 - yr) % p2
    } else {
        (xr + yr) % p2
    };
    let half = (p2 + 1) / 2;
    mul_mod(num, half, p2)
}

impl SplitPrimeContext {
    pub fn e_minus(&self) -> Option<u64> {
        let (x, y) = self.xi.as_ref()?;
        Some(embed(x, y, self.r, self.p * self.p, true))
    }

    pub fn e_plus(&self) -> Option<u64> {
        let (x, y) = self.xi.as_ref()?;
        Some(embed(x, y, self.r, self.p * self.p, false))
    }
}

pub fn split_context(d: FundamentalDiscriminant, p: u64) -> Result<SplitPrimeContext> {
    split_context_with(d, p, &Budget::default())
}

pub fn split_context_with(
    d: FundamentalDiscriminant,
    p: u64,
    budget: &Budget,
) -> Result<SplitPrimeContext> {
    let r = numth::hensel_sqrt_mod_p2(d.value(), p)?;
    let s = quadforms::ideal_class_order_with(d, p, budget)?;
    let mut ctx = SplitPrimeContext {
        p,
        d,
        r,
        s,
        xi: None,
    };
    if s % p != 0 {
        ctx.xi = Some(quadforms::principal_generator_with(d, p, s, budget)?);
        if ctx.e_minus().expect("xi present") % p == 0 {
            ctx.r = p * p - r;
        }
        let (em, ep) = (ctx.e_minus().unwrap(), ctx.e_plus().unwrap());
        if em % p == 0 || ep % p != 0 {
            return Err(Error::IntegralityViolation(format!(
                "generator of the class above {p} in D={d} has embeddings {ep}, {em} mod {}",
                p * p
            )));
        }
    }
    Ok(ctx)
}

/// Generator congruence: `lambda > 1` iff `e_minus(xi)^(p-1) = 1 mod p^2`
/// or `p | h`.
pub fn sands_test(ctx: &SplitPrimeContext, h: u64) -> Result<LambdaVerdict> {
    let p = ctx.p;
    if ctx.s % p == 0 {
        return Err(Error::Inapplicable(format!(
            "{p} divides the order {} of its prime class",
            ctx.s
        )));
    }
    let em = ctx
        .e_minus()
        .ok_or_else(|| Error::Inapplicable("no generator in context".into()))?;
    let p2 = p * p;
    let pw = pow_mod(em, p - 1, p2);
    let value = if pw == 1 || h % p == 0 {
        LambdaValue::GreaterThanOne
    } else {
        LambdaValue::One
    };
    Ok(LambdaVerdict::new(value, Method::Sands)
        .witness("e_minus", em)
        .witness("e_minus_pow", pw)
        .witness("h", h)
        .witness("s", ctx.s))
}

fn require_split(d: FundamentalDiscriminant, p: u64) -> Result<()> {
    if p == 2 || !numth::is_prime(p) {
        return Err(Error::precondition(format!("{p} is not an odd prime")));
    }
    if kronecker(d.value(), p as i64) != 1 {
        return Err(Error::NotSplit { d: d.value(), p });
    }
    Ok(())
}

/// L-value congruence: `lambda = 1` iff `L(1-p, chi_D)/p` is nonzero mod `p`.
pub fn lvalue_test(d: FundamentalDiscriminant, p: u64) -> Result<LambdaVerdict> {
    lvalue_test_with(d, p, &Budget::default())
}

pub fn lvalue_test_with(d: FundamentalDiscriminant, p: u64, budget: &Budget) -> Result<LambdaVerdict> {
    require_split(d, p)?;
    let l = lvalues::l_value_neg_with(p, d, budget)?;
    let q: Rational = &l / Rational::from_integer(BigInt::from(p));
    let residue = numth::rational_mod(&q, p).ok_or_else(|| {
        Error::IntegralityViolation(format!("L(1-{p}, chi_{d})/{p} = {q} is not {p}-integral"))
    })?;
    let value = if residue != 0 {
        LambdaValue::One
    } else {
        LambdaValue::GreaterThanOne
    };
    Ok(LambdaVerdict::new(value, Method::LValue)
        .witness("l_value", rational_string(&l))
        .witness("residue", residue))
}

/// Runs the L-value test as authority and the generator test as a
/// cross-check whenever it applies and fits the budget.
pub fn classify_lambda(d: FundamentalDiscriminant, p: u64) -> Result<LambdaVerdict> {
    classify_lambda_with(d, p, &Budget::default())
}

fn sands_if_applicable(
    d: FundamentalDiscriminant,
    p: u64,
    budget: &Budget,
) -> Result<Option<LambdaVerdict>> {
    let ctx = match split_context_with(d, p, budget) {
        Ok(c) => c,
        Err(Error::BudgetExceeded(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if ctx.s % p == 0 {
        return Ok(None);
    }
    let h = match quadforms::class_number(d, budget) {
        Ok(h) => h,
        Err(Error::BudgetExceeded(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    sands_test(&ctx, h).map(Some)
}

pub fn classify_lambda_with(
    d: FundamentalDiscriminant,
    p: u64,
    budget: &Budget,
) -> Result<LambdaVerdict> {
    require_split(d, p)?;
    let lv = match lvalue_test_with(d, p, budget) {
        Ok(v) => Some(v),
        Err(Error::BudgetExceeded(_)) => None,
        Err(e) => return Err(e),
    };
    let sands = sands_if_applicable(d, p, budget)?;
    match (lv, sands) {
        (Some(l), Some(s)) => {
            if l.value != s.value {
                return Err(Error::CriterionDisagreement {
                    d: d.value(),
                    p,
                    lvalue: l.value.to_string(),
                    sands: s.value.to_string(),
                });
            }
            let mut v = l;
            v.method = Method::Both;
            v.witnesses.extend(s.witnesses);
            Ok(v)
        }
        (Some(l), None) => Ok(l),
        (None, Some(s)) => Ok(s),
        (None, None) => Err(Error::budget(format!(
            "neither criterion fits the budget for D={d}, p={p}"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClosedKind {
    OneMinusP,
    FourMinusP,
}

/// True on the `lambda > 1` side of the closed congruence for the field of
/// `sqrt(1-p)` or `sqrt(4-p)`.
pub fn closed_congruence(kind: ClosedKind, p: u64) -> bool {
    let p2 = p * p;
    match kind {
        ClosedKind::OneMinusP => pow_mod(2, 2 * p - 1, p2) == (2 + p2 - p) % p2,
        ClosedKind::FourMinusP => {
            let a = (pow_mod(2, 4 * p - 1, p2) + p2 - 8 % p2 + p) % p2;
            let b = (pow_mod(2, 4 * p - 2, p2) + mul_mod(pow_mod(2, 4 * p - 5, p2), p, p2) + p2
                - 4 % p2)
                % p2;
            a == 0 && b == 0
        }
    }
}

/// Field discriminant of `Q(sqrt t)`; panics on degenerate `t`.
fn field_of(t: i64) -> FundamentalDiscriminant {
    fundamental_from_radicand(t)
        .expect("radicand of an imaginary quadratic field")
        .0
}

/// A field with `lambda_p = 1` in which `p` splits: that of `sqrt(1-p)`, or
/// of `sqrt(4-p)` when the first has `lambda_p > 1`.
pub fn find_d0(p: u64) -> Result<FundamentalDiscriminant> {
    if p <= 3 || !numth::is_prime(p) {
        return Err(Error::precondition(format!("{p} is not a prime > 3")));
    }
    let pi = p as i64;
    Ok(if closed_congruence(ClosedKind::OneMinusP, p) {
        field_of(4 - pi)
    } else {
        field_of(1 - pi)
    })
}

pub fn wieferich(p: u64) -> bool {
    pow_mod(2, p - 1, p * p) == 1
}

/// Least prime factor `q1` of `p - 2` with `q1^(p-1) != 1 mod p^2`.
pub fn find_q1(p: u64) -> Result<u64> {
    if p < 5 || !numth::is_prime(p) {
        return Err(Error::precondition(format!("{p} is not a prime >= 5")));
    }
    let f = numth::factorize((p - 2) as i64)?;
    let found = f.primes().find(|&q| pow_mod(q, p - 1, p * p) != 1);
    found.ok_or_else(|| Error::NotFound(format!("no prime factor q1 of {} for p={p}", p - 2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FamilyShape {
    /// `Q(sqrt(x1^2 - p^n))`
    X2MinusPn,
    /// `Q(sqrt(x1^2 - 4 p^n))`, `x1` odd
    X2Minus4Pn,
}

/// Field of the family member; checks the shape's preconditions.
pub fn family_field(p: u64, x1: u64, n: u32, shape: FamilyShape) -> Result<FundamentalDiscriminant> {
    if p == 2 || !numth::is_prime(p) {
        return Err(Error::precondition(format!("{p} is not an odd prime")));
    }
    if n < 2 || (n as u64).gcd(&p) != 1 || x1 == 0 || x1.gcd(&p) != 1 {
        return Err(Error::precondition(format!(
            "need n > 1, gcd(p, n) = gcd(p, x1) = 1; got p={p}, x1={x1}, n={n}"
        )));
    }
    let pn = (p as i128).pow(n);
    let x2 = (x1 as i128) * (x1 as i128);
    let t = match shape {
        FamilyShape::X2MinusPn => x2 - pn,
        FamilyShape::X2Minus4Pn => {
            if x1 % 2 == 0 {
                return Err(Error::precondition("x1 must be odd for x1^2 - 4p^n"));
            }
            x2 - 4 * pn
        }
    };
    if t >= 0 {
        return Err(Error::precondition("radicand must be negative"));
    }
    let t = i64::try_from(t).map_err(|_| Error::budget("radicand exceeds 64 bits"))?;
    Ok(fundamental_from_radicand(t)?.0)
}

/// `lambda_p = 1` iff `p` does not divide `h` and `(2 x1)^(p-1)` (or
/// `x1^(p-1)` for the second shape) is not 1 mod `p^2`.
pub fn family_criterion(p: u64, x1: u64, n: u32, shape: FamilyShape) -> Result<LambdaVerdict> {
    family_criterion_with(p, x1, n, shape, &Budget::default())
}

pub fn family_criterion_with(
    p: u64,
    x1: u64,
    n: u32,
    shape: FamilyShape,
    budget: &Budget,
) -> Result<LambdaVerdict> {
    let d = family_field(p, x1, n, shape)?;
    let h = quadforms::class_number(d, budget)?;
    Ok(family_criterion_from_h(p, x1, shape, d, h))
}

/// The family criterion for a field whose class number is already known.
pub fn family_criterion_from_h(
    p: u64,
    x1: u64,
    shape: FamilyShape,
    d: FundamentalDiscriminant,
    h: u64,
) -> LambdaVerdict {
    let p2 = p * p;
    let base = match shape {
        FamilyShape::X2MinusPn => 2 * x1,
        FamilyShape::X2Minus4Pn => x1,
    };
    let pw = pow_mod(base % p2, p - 1, p2);
    let value = if h % p != 0 && pw != 1 {
        LambdaValue::One
    } else {
        LambdaValue::GreaterThanOne
    };
    LambdaVerdict::new(value, Method::Sands)
        .witness("d", d)
        .witness("h", h)
        .witness("h_mod_p", h % p)
        .witness("power_mod_p2", pw)
}
