//! Explicit families of imaginary quadratic fields in which `p` splits:
//! `A_{p,n}`, the six radicand templates, order checks for the class above
//! `p`, collision scans, power witnesses and finite-window Diophantine checks.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::lambda::{find_q1, wieferich};
use crate::numth::{self, big_square_root, kronecker, pow_mod};
use crate::quadforms::{self, fundamental_from_radicand, FundamentalDiscriminant};

/// Longest `A_{p,n}` that `a_set` will materialize.
const A_SET_MAX_LEN: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FamilyKind {
    /// `1 - 4p^n`
    OneMinus4Pn,
    /// `a^2 - 4p^(2n)`, `a` in `A_{p,n}`
    SandsASq,
    /// `1 - p^n`
    OneMinusPn,
    /// `4 - p^n`
    FourMinusPn,
    /// `q1^2 - p^n`
    Q1SqMinusPn,
    /// `4 q1^2 - p^n`
    FourQ1SqMinusPn,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 6] = [
        FamilyKind::OneMinus4Pn,
        FamilyKind::SandsASq,
        FamilyKind::OneMinusPn,
        FamilyKind::FourMinusPn,
        FamilyKind::Q1SqMinusPn,
        FamilyKind::FourQ1SqMinusPn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::OneMinus4Pn => "one-minus-4pn",
            FamilyKind::SandsASq => "sands-a-sq",
            FamilyKind::OneMinusPn => "one-minus-pn",
            FamilyKind::FourMinusPn => "four-minus-pn",
            FamilyKind::Q1SqMinusPn => "q1sq-minus-pn",
            FamilyKind::FourQ1SqMinusPn => "four-q1sq-minus-pn",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        FamilyKind::ALL.into_iter().find(|k| k.name() == s)
    }

    fn uses_q1(self) -> bool {
        matches!(self, FamilyKind::Q1SqMinusPn | FamilyKind::FourQ1SqMinusPn)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyMember {
    pub kind: FamilyKind,
    pub p: u64,
    pub n: u32,
    pub a_or_q1: Option<u64>,
    pub radicand: i64,
    pub d: FundamentalDiscriminant,
    /// `radicand = d.radicand() * m^2`
    pub m: u64,
}

impl FamilyMember {
    /// The element `alpha = (c + sqrt(radicand))/den` of norm `p^n`
    /// (`p^(2n)` for `SandsASq`), in the coordinates `pth_power_witness`
    /// takes: doubled when `D = 1 mod 4`.
    pub fn alpha(&self) -> (BigInt, BigInt) {
        let (c, den): (u64, u64) = match self.kind {
            FamilyKind::OneMinus4Pn => (1, 2),
            FamilyKind::SandsASq => (self.a_or_q1.expect("a present"), 2),
            FamilyKind::OneMinusPn => (1, 1),
            FamilyKind::FourMinusPn => (2, 1),
            FamilyKind::Q1SqMinusPn => (self.a_or_q1.expect("q1 present"), 1),
            FamilyKind::FourQ1SqMinusPn => (2 * self.a_or_q1.expect("q1 present"), 1),
        };
        let scale = if self.d.value() % 4 == 0 { 1 } else { 2 };
        (
            BigInt::from(c * scale / den),
            BigInt::from(self.m * scale / den),
        )
    }

    /// Exponent `e` with `N(alpha) = p^e`.
    pub fn alpha_norm_exponent(&self) -> u32 {
        match self.kind {
            FamilyKind::SandsASq => 2 * self.n,
            _ => self.n,
        }
    }
}

fn require_odd_prime(p: u64) -> Result<()> {
    if p == 2 || !numth::is_prime(p) {
        return Err(Error::precondition(format!("{p} is not an odd prime")));
    }
    Ok(())
}

fn checked_pow(p: u64, n: u32) -> Result<u64> {
    p.checked_pow(n)
        .filter(|&v| v <= i64::MAX as u64 / 4)
        .ok_or_else(|| Error::budget(format!("{p}^{n} exceeds 64 bits")))
}

/// `{0 < a < 2p^n : p does not divide a, a^(p-1) = 1 mod p^2}`, ascending.
pub fn a_set(p: u64, n: u32) -> Result<Vec<u64>> {
    require_odd_prime(p)?;
    if n < 2 {
        return Err(Error::precondition(format!("need n >= 2, got {n}")));
    }
    let pn = checked_pow(p, n)?;
    let p2 = p * p;
    let len = 2 * (p - 1) * (pn / p2);
    if len > A_SET_MAX_LEN {
        return Err(Error::budget(format!("|A_(p,n)| = {len}")));
    }
    // the solutions mod p^2 are exactly the p-th powers of units
    let mut roots: Vec<u64> = (1..p).map(|t| pow_mod(t, p, p2)).collect();
    roots.sort_unstable();
    let mut out = Vec::with_capacity(len as usize);
    let mut base = 0;
    while base < 2 * pn {
        out.extend(roots.iter().map(|&r| base + r));
        base += p2;
    }
    Ok(out)
}

fn radicand_of(kind: FamilyKind, p: u64, n: u32, param: Option<u64>) -> Result<i128> {
    let pn = checked_pow(p, n)? as i128;
    let par = |what: &str| param.ok_or_else(|| Error::precondition(format!("{what} missing")));
    Ok(match kind {
        FamilyKind::OneMinus4Pn => 1 - 4 * pn,
        FamilyKind::SandsASq => {
            let a = par("a")? as i128;
            a * a - 4 * pn * pn
        }
        FamilyKind::OneMinusPn => 1 - pn,
        FamilyKind::FourMinusPn => 4 - pn,
        FamilyKind::Q1SqMinusPn => {
            let q = par("q1")? as i128;
            q * q - pn
        }
        FamilyKind::FourQ1SqMinusPn => {
            let q = par("q1")? as i128;
            4 * q * q - pn
        }
    })
}

/// Builds and validates a member. For the `q1` kinds a missing parameter is
/// filled in by `find_q1`.
pub fn member(kind: FamilyKind, p: u64, n: u32, a_or_q1: Option<u64>) -> Result<FamilyMember> {
    require_odd_prime(p)?;
    if n < 2 {
        return Err(Error::precondition(format!("n must be at least 2, got {n}")));
    }
    let param = match kind {
        FamilyKind::SandsASq => {
            let a = a_or_q1.ok_or_else(|| Error::precondition("a missing"))?;
            if (n as u64).gcd(&p) != 1 {
                return Err(Error::precondition(format!("gcd({p}, {n}) != 1")));
            }
            if a == 0 || a >= 2 * checked_pow(p, n)? || a % p == 0 || pow_mod(a, p - 1, p * p) != 1
            {
                return Err(Error::precondition(format!("{a} is not in A_({p},{n})")));
            }
            Some(a)
        }
        k if k.uses_q1() => {
            let q = match a_or_q1 {
                Some(q) => {
                    if !numth::is_prime(q) || (p - 2) % q != 0 || pow_mod(q, p - 1, p * p) == 1 {
                        return Err(Error::precondition(format!(
                            "{q} is not an admissible q1 for p={p}"
                        )));
                    }
                    q
                }
                None => find_q1(p)?,
            };
            Some(q)
        }
        _ => None,
    };
    let t = radicand_of(kind, p, n, param)?;
    if t >= 0 {
        return Err(Error::precondition(format!("radicand {t} is not negative")));
    }
    let t = i64::try_from(t).map_err(|_| Error::budget("radicand exceeds 64 bits"))?;
    let (d, m) = fundamental_from_radicand(t)?;
    if kronecker(d.value(), p as i64) != 1 {
        return Err(Error::NotSplit { d: d.value(), p });
    }
    Ok(FamilyMember {
        kind,
        p,
        n,
        a_or_q1: param,
        radicand: t,
        d,
        m,
    })
}

/// Order `s` of the class above `p`, and whether it is the order the
/// theorem predicts. Members outside the theorem's hypotheses give
/// `ExcludedField` carrying `s`.
pub fn verify_order(m: &FamilyMember) -> Result<(u64, bool)> {
    verify_order_with(m, &Budget::default())
}

pub fn verify_order_with(m: &FamilyMember, budget: &Budget) -> Result<(u64, bool)> {
    let s = quadforms::ideal_class_order_with(m.d, m.p, budget)?;
    let (p, n) = (m.p, m.n as u64);
    let composite = !numth::is_prime(n);
    let gaussian = m.d.value() == -4;
    let expected: std::result::Result<u64, &str> = match m.kind {
        FamilyKind::OneMinusPn if p % 4 != 3 => Err("needs p = 3 mod 4"),
        FamilyKind::OneMinusPn if n % 2 == 0 => Err("needs n odd"),
        FamilyKind::OneMinusPn if (p, n) == (3, 5) => Ok(1),
        FamilyKind::OneMinusPn => Ok(n),
        FamilyKind::Q1SqMinusPn if p % 4 != 3 || !wieferich(p) => {
            Err("needs p = 3 mod 4 and 2^(p-1) = 1 mod p^2")
        }
        FamilyKind::Q1SqMinusPn if n % 2 == 0 || !composite => Err("needs n odd composite"),
        FamilyKind::Q1SqMinusPn => Ok(n),
        FamilyKind::FourMinusPn if p % 4 != 1 => Err("needs p = 1 mod 4"),
        FamilyKind::FourMinusPn if gaussian => Err("field is Q(sqrt -1)"),
        FamilyKind::FourMinusPn => Ok(n),
        FamilyKind::FourQ1SqMinusPn if p % 4 != 1 || !wieferich(p) => {
            Err("needs p = 1 mod 4 and 2^(p-1) = 1 mod p^2")
        }
        FamilyKind::FourQ1SqMinusPn if !composite => Err("needs n composite"),
        FamilyKind::FourQ1SqMinusPn if gaussian => Err("field is Q(sqrt -1)"),
        FamilyKind::FourQ1SqMinusPn => Ok(n),
        FamilyKind::OneMinus4Pn if n <= 8 => Err("needs n > 8"),
        FamilyKind::OneMinus4Pn => Ok(n),
        FamilyKind::SandsASq => Err("no order statement for this family"),
    };
    match expected {
        Ok(e) => Ok((s, s == e)),
        Err(reason) => Err(Error::ExcludedField {
            s,
            reason: reason.to_string(),
        }),
    }
}

/// All pairs `n1 < n2` in `ns` whose members share a field.
pub fn collision_scan(
    kind: FamilyKind,
    p: u64,
    ns: &[u32],
    param: Option<u64>,
) -> Result<Vec<(u32, u32)>> {
    let ds: Vec<(u32, i64)> = ns
        .par_iter()
        .map(|&n| member(kind, p, n, param).map(|m| (n, m.d.value())))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (i, &(n1, d1)) in ds.iter().enumerate() {
        for &(n2, d2) in &ds[i + 1..] {
            if d1 == d2 {
                out.push((n1.min(n2), n1.max(n2)));
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PowerWitness {
    pub u: BigInt,
    pub v: BigInt,
    /// `(u, v)` are doubled coordinates: the element is `(u + v sqrt d0)/2`.
    pub doubled: bool,
    /// The power equals `-target`.
    pub negated: bool,
}

/// `(x1 + y1 w)(x2 + y2 w)` with `w = sqrt d0`, divided by `den`.
fn mul_scaled(d0: &BigInt, den: &BigInt, a: &(BigInt, BigInt), b: &(BigInt, BigInt)) -> (BigInt, BigInt) {
    (
        (&a.0 * &b.0 + d0 * &a.1 * &b.1) / den,
        (&a.0 * &b.1 + &a.1 * &b.0) / den,
    )
}

fn pow_scaled(d0: &BigInt, den: &BigInt, base: &(BigInt, BigInt), mut k: u64) -> (BigInt, BigInt) {
    let mut acc = (den.clone(), BigInt::zero());
    let mut b = base.clone();
    while k > 0 {
        if k & 1 == 1 {
            acc = mul_scaled(d0, den, &acc, &b);
        }
        k >>= 1;
        if k > 0 {
            b = mul_scaled(d0, den, &b, &b);
        }
    }
    acc
}

/// Searches for `beta` of norm `norm_root` with `beta^p4 = +-target`.
/// `target = x + y sqrt d0`, in doubled coordinates when `D = 1 mod 4`.
pub fn pth_power_witness(
    d: FundamentalDiscriminant,
    target: (&BigInt, &BigInt),
    p4: u64,
    norm_root: u64,
    budget: &Budget,
) -> Result<Option<PowerWitness>> {
    if !numth::is_prime(p4) {
        return Err(Error::precondition(format!("{p4} is not prime")));
    }
    let d0 = d.radicand();
    let ad0 = d0.unsigned_abs();
    let doubled = d.value() % 4 != 0;
    let den = BigInt::from(if doubled { 2 } else { 1 });
    // norm in these coordinates is den^2 times the true norm
    let scale = if doubled { 4u64 } else { 1 };
    let (x, y) = target;
    let lhs = x * x + BigInt::from(ad0) * y * y;
    let want = BigInt::from(scale) * BigInt::from(norm_root).pow(p4 as u32);
    if lhs != want {
        return Err(Error::precondition(format!(
            "target norm {} is not {norm_root}^{p4}",
            lhs / BigInt::from(scale)
        )));
    }
    let n = scale as u128 * norm_root as u128;
    let vmax = numth::isqrt_u128(n / ad0 as u128) as u64 + 1;
    if vmax > budget.search_max_abs_d {
        return Err(Error::budget(format!("witness search over |v| <= {vmax}")));
    }
    let d0b = BigInt::from(d0);
    let neg_target = (-x, -y);
    for v in -(vmax as i64)..=(vmax as i64) {
        let rest = n as i128 - ad0 as i128 * (v as i128) * (v as i128);
        if rest < 0 {
            continue;
        }
        let Some(r) = numth::is_square_u128(rest as u128) else {
            continue;
        };
        let r = r as i128;
        let us: Vec<i128> = if r == 0 { vec![0] } else { vec![-r, r] };
        for u in us {
            if doubled && (u - v as i128) % 2 != 0 {
                continue;
            }
            let base = (BigInt::from(u), BigInt::from(v));
            let pw = pow_scaled(&d0b, &den, &base, p4);
            let hit = if (&pw.0, &pw.1) == (x, y) {
                Some(false)
            } else if (&pw.0, &pw.1) == (&neg_target.0, &neg_target.1) {
                Some(true)
            } else {
                None
            };
            if let Some(negated) = hit {
                return Ok(Some(PowerWitness {
                    u: base.0,
                    v: base.1,
                    doubled,
                    negated,
                }));
            }
        }
    }
    Ok(None)
}

/// Positive solutions `(x, y)`, `1 <= y <= y_max`, of `d1 x^2 + d2 = p^y`.
pub fn diophantine_count(d1: u64, d2: u64, p: u64, y_max: u32) -> Vec<(BigInt, u32)> {
    let (d1b, d2b, pb) = (BigInt::from(d1), BigInt::from(d2), BigInt::from(p));
    let mut out = Vec::new();
    let mut py = BigInt::one();
    for y in 1..=y_max {
        py *= &pb;
        let rest = &py - &d2b;
        if !rest.is_positive() || !rest.is_multiple_of(&d1b) {
            continue;
        }
        if let Some(x) = big_square_root(&(rest / &d1b)) {
            if x.is_positive() {
                out.push((x, y));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Pm1Shape {
    /// `4 q^2 - 3 p^x = +-1`
    FourQSq,
    /// `16 q^2 - 3 p^x = +-1`
    SixteenQSq,
}

/// True when no `1 <= x <= x_max` solves the shape's equation.
pub fn no_pm1_solution(shape: Pm1Shape, q: u64, p: u64, x_max: u32) -> bool {
    let c = match shape {
        Pm1Shape::FourQSq => 4,
        Pm1Shape::SixteenQSq => 16,
    };
    let lead = BigInt::from(c) * BigInt::from(q) * BigInt::from(q);
    let pb = BigInt::from(p);
    let mut three_px = BigInt::from(3);
    for _ in 1..=x_max {
        three_px *= &pb;
        let diff: BigInt = &lead - &three_px;
        if diff.abs().is_one() {
            return false;
        }
        if diff < BigInt::from(-1) {
            break;
        }
    }
    true
}

/// `alpha` of a member expressed against its own field, for
/// `pth_power_witness`.
pub fn member_power_witness(
    m: &FamilyMember,
    p4: u64,
    budget: &Budget,
) -> Result<Option<PowerWitness>> {
    let e = m.alpha_norm_exponent();
    if e as u64 % p4 != 0 {
        return Err(Error::precondition(format!("{p4} does not divide {e}")));
    }
    let root = m
        .p
        .checked_pow(e / p4 as u32)
        .ok_or_else(|| Error::budget("norm root exceeds 64 bits"))?;
    let (x, y) = m.alpha();
    pth_power_witness(m.d, (&x, &y), p4, root, budget)
}

/// `p`-part helper for callers that only have `alpha` and need its order
/// bound: `alpha` generates `P^e`, so the class order divides `e`.
pub fn order_divides_norm_exponent(m: &FamilyMember, s: u64) -> bool {
    (m.alpha_norm_exponent() as u64) % s == 0
}
