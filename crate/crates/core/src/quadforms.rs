//! Positive-definite binary quadratic forms and the form class group of a
//! negative fundamental discriminant.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::numth::{self, ext_gcd, kronecker, Rational};

/// Fundamental discriminant of an imaginary quadratic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct FundamentalDiscriminant(i64);

impl FundamentalDiscriminant {
    pub fn new(d: i64) -> Result<Self> {
        if is_fundamental(d) {
            Ok(FundamentalDiscriminant(d))
        } else {
            Err(Error::InvalidDiscriminant(d))
        }
    }

    pub fn value(self) -> i64 {
        self.0
    }

    pub fn abs(self) -> u64 {
        self.0.unsigned_abs()
    }

    /// The squarefree part d0 with `Q(sqrt d0)` the field.
    pub fn radicand(self) -> i64 {
        if self.0 % 4 == 0 {
            self.0 / 4
        } else {
            self.0
        }
    }
}

impl fmt::Display for FundamentalDiscriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// True for fundamental discriminants of either sign (1 excluded).
pub fn is_fundamental_any(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => numth::is_squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && numth::is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// True for negative fundamental discriminants.
pub fn is_fundamental(d: i64) -> bool {
    d < 0 && is_fundamental_any(d)
}

/// Field discriminant of `Q(sqrt t)` for negative `t`, with `t = d0 * m^2`
/// and `d0` squarefree.
pub fn fundamental_from_radicand(t: i64) -> Result<(FundamentalDiscriminant, u64)> {
    if t >= 0 {
        if numth::is_square_u128(t as u128).is_some() {
            return Err(Error::PerfectSquare(t));
        }
        return Err(Error::InvalidDiscriminant(t));
    }
    let (d0, m) = numth::squarefree_decompose(t)?;
    let d = if d0.rem_euclid(4) == 1 { d0 } else { 4 * d0 };
    Ok((FundamentalDiscriminant(d), m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct QuadraticForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

impl QuadraticForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        QuadraticForm { a, b, c }
    }

    pub fn discriminant(&self) -> i128 {
        self.b as i128 * self.b as i128 - 4 * self.a as i128 * self.c as i128
    }

    /// The identity class `(1, b0, c0)`.
    pub fn principal(d: FundamentalDiscriminant) -> Self {
        let d = d.value();
        let b = d.rem_euclid(2);
        QuadraticForm::new(1, b, (b * b - d) / 4)
    }

    pub fn inverse(&self) -> Self {
        QuadraticForm::new(self.a, -self.b, self.c).reduced()
    }

    pub fn is_reduced(&self) -> bool {
        let QuadraticForm { a, b, c } = *self;
        a > 0 && b.abs() <= a && a <= c && !((b.abs() == a || a == c) && b < 0)
    }

    pub fn reduced(&self) -> Self {
        let (a, b, c) = reduce_i128(self.a as i128, self.b as i128, self.c as i128);
        QuadraticForm::new(a as i64, b as i64, c as i64)
    }

    /// Value at `(x, y)`.
    pub fn eval(&self, x: i128, y: i128) -> i128 {
        self.a as i128 * x * x + self.b as i128 * x * y + self.c as i128 * y * y
    }
}

fn reduce_i128(mut a: i128, mut b: i128, mut c: i128) -> (i128, i128, i128) {
    loop {
        if b > a || b <= -a {
            let k = (a - b).div_euclid(2 * a);
            c += a * k * k + b * k;
            b += 2 * a * k;
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
            b = -b;
            continue;
        }
        break;
    }
    if a == c && b < 0 {
        b = -b;
    }
    (a, b, c)
}

/// Gauss composition followed by reduction.
pub fn compose(f: &QuadraticForm, g: &QuadraticForm) -> Result<QuadraticForm> {
    let d = f.discriminant();
    if d != g.discriminant() {
        return Err(Error::DiscriminantMismatch(d as i64, g.discriminant() as i64));
    }
    Ok(compose_unchecked(f, g, d))
}

fn compose_unchecked(f: &QuadraticForm, g: &QuadraticForm, d: i128) -> QuadraticForm {
    let (a1, b1) = (f.a as i128, f.b as i128);
    let (a2, b2) = (g.a as i128, g.b as i128);
    let beta = (b1 + b2) / 2;
    let (g1, j1, k1) = ext_gcd(a1, a2);
    let (gg, u, l) = ext_gcd(g1, beta);
    let (j, k) = (u * j1, u * k1);
    let a3 = a1 * a2 / (gg * gg);
    let num = j * a1 * b2 + k * a2 * b1 + l * ((b1 * b2 + d) / 2);
    let b3 = (num / gg).rem_euclid(2 * a3);
    let c3 = (b3 * b3 - d) / (4 * a3);
    let (a, b, c) = reduce_i128(a3, b3, c3);
    QuadraticForm::new(a as i64, b as i64, c as i64)
}

pub fn power(f: &QuadraticForm, mut n: u64, d: FundamentalDiscriminant) -> QuadraticForm {
    let dd = d.value() as i128;
    let mut acc = QuadraticForm::principal(d);
    let mut base = f.reduced();
    while n > 0 {
        if n & 1 == 1 {
            acc = compose_unchecked(&acc, &base, dd);
        }
        base = compose_unchecked(&base, &base, dd);
        n >>= 1;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplittingType {
    Split,
    Inert,
    Ramified,
}

pub fn splitting_type(d: FundamentalDiscriminant, q: u64) -> SplittingType {
    match kronecker(d.value(), q as i64) {
        1 => SplittingType::Split,
        -1 => SplittingType::Inert,
        _ => SplittingType::Ramified,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassGroup {
    pub discriminant: FundamentalDiscriminant,
    /// All reduced forms, sorted by `(a, b)`.
    pub forms: Vec<QuadraticForm>,
    pub invariant_factors: Vec<u64>,
    pub h: u64,
}

impl ClassGroup {
    pub fn contains(&self, f: &QuadraticForm) -> bool {
        self.forms.binary_search(f).is_ok()
    }
}

fn check_class_group_budget(d: FundamentalDiscriminant, budget: &Budget) -> Result<()> {
    if d.abs() > budget.class_group_max_abs_d {
        return Err(Error::budget(format!(
            "|D| = {} exceeds class-group limit {}",
            d.abs(),
            budget.class_group_max_abs_d
        )));
    }
    Ok(())
}

/// All reduced forms of discriminant `d`, sorted.
pub fn reduced_forms(d: FundamentalDiscriminant, budget: &Budget) -> Result<Vec<QuadraticForm>> {
    check_class_group_budget(d, budget)?;
    let n = d.abs();
    let a_max = numth::isqrt(n / 3);
    let parity = n % 2;
    let mut forms = Vec::new();
    for a in 1..=a_max {
        let four_a = 4 * a;
        // track (b^2 + |D|) mod 4a incrementally over b = parity, parity+2, ...
        let mut b = parity;
        let mut r = (b * b + n) % four_a;
        while b <= a {
            if r == 0 {
                let c = (b * b + n) / four_a;
                if c >= a {
                    let (ai, bi, ci) = (a as i64, b as i64, c as i64);
                    forms.push(QuadraticForm::new(ai, bi, ci));
                    if b != 0 && b != a && a != c {
                        forms.push(QuadraticForm::new(ai, -bi, ci));
                    }
                }
            }
            r += 4 * b + 4;
            while r >= four_a {
                r -= four_a;
            }
            b += 2;
        }
    }
    forms.sort_unstable();
    Ok(forms)
}

pub fn class_number(d: FundamentalDiscriminant, budget: &Budget) -> Result<u64> {
    Ok(reduced_forms(d, budget)?.len() as u64)
}

/// Order of `f` in a group of order `h`.
fn element_order(f: &QuadraticForm, h: u64, h_primes: &[u64], d: FundamentalDiscriminant) -> u64 {
    let id = QuadraticForm::principal(d);
    let mut ord = h;
    for &q in h_primes {
        while ord % q == 0 && power(f, ord / q, d) == id {
            ord /= q;
        }
    }
    ord
}

/// Invariant factors `d1 | d2 | ...` (trivial factors omitted) from the
/// multiset of element orders.
fn invariant_factors_from_orders(orders: &[u64], h: u64) -> Vec<u64> {
    if h == 1 {
        return Vec::new();
    }
    let hf = numth::factorize(h as i64).expect("class number factors");
    // for each prime q, exps[q] lists cyclic q-part exponents, largest first
    let mut per_prime: Vec<(u64, Vec<u32>)> = Vec::new();
    for &(q, e) in &hf.factors {
        // |G[q^k]| for k = 0..=e
        let mut counts = vec![0u64; e as usize + 1];
        for &o in orders {
            let mut v = 0u32;
            let mut o = o;
            while o % q == 0 {
                o /= q;
                v += 1;
            }
            for c in counts.iter_mut().skip(v as usize) {
                *c += 1;
            }
        }
        // number of cyclic factors with exponent >= k
        let mut at_least: Vec<u32> = Vec::new();
        for k in 1..=e as usize {
            let ratio = counts[k] / counts[k - 1];
            let mut r = 0u32;
            let mut x = ratio;
            while x > 1 {
                x /= q;
                r += 1;
            }
            at_least.push(r);
        }
        let rank = at_least.first().copied().unwrap_or(0);
        let mut exps = Vec::new();
        for i in 0..rank {
            let ex = at_least.iter().filter(|&&c| c > i).count() as u32;
            exps.push(ex);
        }
        per_prime.push((q, exps));
    }
    let len = per_prime.iter().map(|(_, e)| e.len()).max().unwrap_or(0);
    // combine: factor i (from the largest) takes the i-th largest q-part
    let mut factors = vec![1u64; len];
    for (q, exps) in &per_prime {
        for (i, &ex) in exps.iter().enumerate() {
            factors[i] *= q.pow(ex);
        }
    }
    factors.reverse();
    factors
}

pub fn class_group(d: FundamentalDiscriminant) -> Result<ClassGroup> {
    class_group_with(d, &Budget::default())
}

pub fn class_group_with(d: FundamentalDiscriminant, budget: &Budget) -> Result<ClassGroup> {
    let forms = reduced_forms(d, budget)?;
    let h = forms.len() as u64;
    let h_primes: Vec<u64> = numth::factorize(h as i64)?.primes().collect();
    let orders: Vec<u64> = forms
        .iter()
        .map(|f| element_order(f, h, &h_primes, d))
        .collect();
    let invariant_factors = invariant_factors_from_orders(&orders, h);
    Ok(ClassGroup {
        discriminant: d,
        forms,
        invariant_factors,
        h,
    })
}

/// The form `(p, b, c)` attached to a prime above the split prime `p`, with
/// `0 < b < p` reduced to the correct parity.
pub fn prime_form(d: FundamentalDiscriminant, p: u64) -> Result<QuadraticForm> {
    if kronecker(d.value(), p as i64) != 1 {
        return Err(Error::NotSplit { d: d.value(), p });
    }
    let dv = d.value();
    let mut b = numth::sqrt_mod_prime(dv.rem_euclid(p as i64) as u64, p)
        .ok_or(Error::NotSplit { d: dv, p })? as i64;
    if (b - dv).rem_euclid(2) != 0 {
        b = p as i64 - b;
    }
    let pi = p as i128;
    let c = (b as i128 * b as i128 - dv as i128) / (4 * pi);
    Ok(QuadraticForm::new(p as i64, b, c as i64))
}

/// Order of the class of a prime ideal above `p`.
pub fn ideal_class_order(d: FundamentalDiscriminant, p: u64) -> Result<u64> {
    ideal_class_order_with(d, p, &Budget::default())
}

pub fn ideal_class_order_with(d: FundamentalDiscriminant, p: u64, budget: &Budget) -> Result<u64> {
    let f = prime_form(d, p)?.reduced();
    check_class_group_budget(d, budget)?;
    let id = QuadraticForm::principal(d);
    let dd = d.value() as i128;
    // h never exceeds the analytic bound, so the walk terminates before it
    let limit = if d.abs() > 4 {
        analytic_h_bound(d)?.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
    } else {
        1
    };
    let mut g = f;
    for s in 1..=limit {
        if g == id {
            return Ok(s);
        }
        g = compose_unchecked(&g, &f, dd);
    }
    Err(Error::budget(format!(
        "order of the prime class above {p} not found below {limit}"
    )))
}

/// Reduces a big form, tracking `M` with `f(M v) = g(v)`.
fn reduce_tracking(mut a: BigInt, mut b: BigInt, mut c: BigInt) -> (BigInt, [BigInt; 4]) {
    let mut m = [BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one()];
    let two = BigInt::from(2);
    loop {
        if b > a || b <= -&a {
            let k = (&a - &b).div_floor(&(&two * &a));
            c += &a * &k * &k + &b * &k;
            b += &two * &a * &k;
            // M <- M [[1, k], [0, 1]]
            m[1] += &m[0] * &k;
            m[3] += &m[2] * &k;
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
            b = -b;
            // M <- M [[0, -1], [1, 0]]
            let (m0, m2) = (m[0].clone(), m[2].clone());
            m[0] = m[1].clone();
            m[2] = m[3].clone();
            m[1] = -m0;
            m[3] = -m2;
            continue;
        }
        break;
    }
    (a, m)
}

/// Product of `(x1 + y1 sqrt D)/2` and `(x2 + y2 sqrt D)/2` in doubled
/// coordinates.
fn mul_doubled(d: i64, (x1, y1): (&BigInt, &BigInt), (x2, y2): (&BigInt, &BigInt)) -> (BigInt, BigInt) {
    let x = (x1 * x2 + BigInt::from(d) * y1 * y2) / 2;
    let y = (x1 * y2 + x2 * y1) / 2;
    (x, y)
}

/// `(x, y)` with `4 p^s = x^2 + |D| y^2` and `(x + y sqrt D)/2` generating a
/// prime power above `p`; the least positive `y`, then `x >= 0`.
pub fn principal_generator(d: FundamentalDiscriminant, p: u64, s: u64) -> Result<(BigInt, BigInt)> {
    principal_generator_with(d, p, s, &Budget::default())
}

pub fn principal_generator_with(
    d: FundamentalDiscriminant,
    p: u64,
    s: u64,
    budget: &Budget,
) -> Result<(BigInt, BigInt)> {
    let dv = d.value();
    if kronecker(dv, p as i64) != 1 {
        return Err(Error::NotSplit { d: dv, p });
    }
    let ps = BigInt::from(p).pow(s as u32);
    let four_ps: BigInt = &ps * 4;
    if four_ps.bits() > budget.generator_max_bits {
        return Err(Error::budget(format!(
            "4*{p}^{s} has {} bits, limit {}",
            four_ps.bits(),
            budget.generator_max_bits
        )));
    }
    let no_rep = Error::NoRepresentation { d: dv, p, s };
    let db = BigInt::from(dv);
    let mut r0 = numth::sqrt_mod_prime_power(&db, p, s as u32).ok_or(no_rep.clone())?;
    if (&r0 - &db).is_odd() {
        r0 = &ps - &r0;
    }
    let c0 = (&r0 * &r0 - &db) / (&ps * 4);
    let (a_red, m) = reduce_tracking(ps.clone(), r0.clone(), c0);
    if !a_red.is_one() {
        return Err(no_rep);
    }
    let (big_x, big_y) = (&m[0], &m[2]);
    let x0: BigInt = BigInt::from(2) * &ps * big_x + &r0 * big_y;
    let y0: BigInt = -big_y.clone();
    if &x0 * &x0 - &db * &y0 * &y0 != four_ps {
        return Err(no_rep);
    }
    let unit: Option<(BigInt, BigInt)> = match dv {
        -4 => Some((BigInt::zero(), BigInt::one())),
        -3 => Some((BigInt::one(), BigInt::one())),
        _ => None,
    };
    let unit_count = match dv {
        -4 => 4,
        -3 => 6,
        _ => 2,
    };
    let mut candidates = Vec::new();
    let mut cur = (x0, y0);
    for _ in 0..unit_count {
        candidates.push(cur.clone());
        candidates.push((cur.0.clone(), -cur.1.clone()));
        cur = match &unit {
            Some((ux, uy)) => mul_doubled(dv, (&cur.0, &cur.1), (ux, uy)),
            None => (-cur.0.clone(), -cur.1.clone()),
        };
    }
    let best = candidates
        .into_iter()
        .filter(|(x, y)| y.is_positive() && !x.is_negative())
        .min_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
        .ok_or(no_rep)?;
    debug_assert_eq!(&best.0 * &best.0 - &db * &best.1 * &best.1, &ps * 4);
    Ok(best)
}

/// Upper bound for `h(D)` from `L(1, chi) <= log|D|/2 + log log|D| + 2.8`,
/// rounded outward to an exact rational.
pub fn analytic_h_bound(d: FundamentalDiscriminant) -> Result<Rational> {
    if d.abs() <= 4 {
        return Err(Error::DomainTooSmall(d.value()));
    }
    let n = d.abs() as f64;
    let l = n.ln();
    let v = n.sqrt() / std::f64::consts::PI * (0.5 * l + l.ln() + 2.8);
    // f64 evaluation error is far below this margin
    let upper = v * (1.0 + 1e-9) + 1e-9;
    Ok(BigRational::from_float(upper).expect("finite bound"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn fd(d: i64) -> FundamentalDiscriminant {
        FundamentalDiscriminant::new(d).unwrap()
    }

    /// Independent grid search over all (a, b) without parity shortcuts.
    fn brute_forms(d: i64) -> BTreeSet<QuadraticForm> {
        let n = -d;
        let mut out = BTreeSet::new();
        let mut a = 1;
        while 3 * a * a <= n {
            for b in -a..=a {
                let num = b * b - d;
                if num % (4 * a) == 0 {
                    let f = QuadraticForm::new(a, b, num / (4 * a));
                    if f.is_reduced() {
                        out.insert(f);
                    }
                }
            }
            a += 1;
        }
        out
    }

    fn brute_generator(d: i64, p: u64, s: u32) -> (i128, i128) {
        let four_ps = 4 * (p as i128).pow(s);
        let mut y = 1i128;
        loop {
            let rest = four_ps - (-d as i128) * y * y;
            assert!(rest >= 0, "no representation");
            if let Some(x) = numth::is_square_u128(rest as u128) {
                let x = x as i128;
                if x % p as i128 != 0 || y % p as i128 != 0 {
                    return (x, y);
                }
            }
            y += 1;
        }
    }

    #[test]
    fn radicand_examples() {
        assert_eq!(fundamental_from_radicand(-2186).unwrap(), (fd(-8744), 1));
        assert_eq!(fundamental_from_radicand(-23).unwrap(), (fd(-23), 1));
        assert_eq!(fundamental_from_radicand(-121).unwrap(), (fd(-4), 11));
        assert_eq!(fundamental_from_radicand(16), Err(Error::PerfectSquare(16)));
        assert_eq!(fundamental_from_radicand(-410).unwrap().0, fd(-1640));
    }

    #[test]
    fn class_group_examples() {
        let g = class_group(fd(-23)).unwrap();
        assert_eq!(g.h, 3);
        assert_eq!(g.invariant_factors, vec![3]);
        let expected: BTreeSet<_> = [(1, 1, 6), (2, 1, 3), (2, -1, 3)]
            .into_iter()
            .map(|(a, b, c)| QuadraticForm::new(a, b, c))
            .collect();
        assert_eq!(g.forms.iter().copied().collect::<BTreeSet<_>>(), expected);
        let g = class_group(fd(-4)).unwrap();
        assert_eq!((g.h, g.invariant_factors.clone()), (1, vec![]));
        let g = class_group(fd(-8744)).unwrap();
        assert_eq!((g.h, g.invariant_factors.clone()), (42, vec![42]));
        let g = class_group(fd(-1640)).unwrap();
        assert_eq!((g.h, g.invariant_factors.clone()), (16, vec![2, 8]));
    }

    #[test]
    fn class_group_budget() {
        let b = Budget::default().with_class_group_max_abs_d(100);
        assert!(matches!(
            class_group_with(fd(-8744), &b),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn compose_examples() {
        let d = fd(-23);
        let f = QuadraticForm::new(2, 1, 3);
        let g = QuadraticForm::new(2, -1, 3);
        let id = QuadraticForm::principal(d);
        assert_eq!(compose(&id, &f).unwrap(), f);
        assert_eq!(compose(&f, &g).unwrap(), id);
        assert_eq!(compose(&f, &f).unwrap(), g);
        assert!(matches!(
            compose(&f, &QuadraticForm::principal(fd(-4))),
            Err(Error::DiscriminantMismatch(..))
        ));
    }

    #[test]
    fn splitting_examples() {
        assert_eq!(splitting_type(fd(-23), 3), SplittingType::Split);
        assert_eq!(splitting_type(fd(-23), 5), SplittingType::Inert);
        assert_eq!(splitting_type(fd(-4), 2), SplittingType::Ramified);
    }

    #[test]
    fn order_examples() {
        assert_eq!(ideal_class_order(fd(-23), 3).unwrap(), 3);
        assert_eq!(ideal_class_order(fd(-8), 3).unwrap(), 1);
        assert_eq!(ideal_class_order(fd(-8744), 3).unwrap(), 7);
        assert!(matches!(
            ideal_class_order(fd(-23), 5),
            Err(Error::NotSplit { .. })
        ));
    }

    #[test]
    fn generator_examples() {
        let g = |d, p, s| {
            let (x, y) = principal_generator(fd(d), p, s).unwrap();
            (x.to_i64().unwrap(), y.to_i64().unwrap())
        };
        assert_eq!(g(-8, 3, 1), (2, 1));
        assert_eq!(g(-35, 3, 2), (1, 1));
        assert_eq!(g(-4, 13, 1), (6, 2));
        for (d, p, s) in [(-8, 3, 1), (-35, 3, 2), (-4, 13, 1), (-3, 13, 1), (-23, 3, 3)] {
            let (bx, by) = brute_generator(d, p, s as u32);
            assert_eq!(g(d, p, s), (bx as i64, by as i64), "D={d} p={p}");
        }
        assert!(matches!(
            principal_generator(fd(-23), 3, 1),
            Err(Error::NoRepresentation { .. })
        ));
        assert!(matches!(
            principal_generator(fd(-8), 3, 100),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn generator_matches_search_for_small_fields() {
        for n in 3..700i64 {
            let d = -n;
            if !is_fundamental(d) {
                continue;
            }
            for p in [3u64, 5, 7, 11] {
                if kronecker(d, p as i64) != 1 {
                    continue;
                }
                let s = ideal_class_order(fd(d), p).unwrap();
                if 4 * (p as u128).pow(s as u32) > 1u128 << 60 {
                    continue;
                }
                let (x, y) = principal_generator(fd(d), p, s).unwrap();
                let (bx, by) = brute_generator(d, p, s as u32);
                assert_eq!((x.to_i128().unwrap(), y.to_i128().unwrap()), (bx, by), "D={d} p={p}");
            }
        }
    }

    #[test]
    fn analytic_bound_examples() {
        let b = analytic_h_bound(fd(-23)).unwrap();
        let v = b.to_f64().unwrap();
        assert!((v - 8.41).abs() < 0.02, "{v}");
        assert!(v >= 3.0);
        assert!(analytic_h_bound(fd(-8)).unwrap() >= Rational::from_integer(1.into()));
        assert_eq!(analytic_h_bound(fd(-4)), Err(Error::DomainTooSmall(-4)));
        assert_eq!(analytic_h_bound(fd(-3)), Err(Error::DomainTooSmall(-3)));
        let (d, _) = fundamental_from_radicand(1 - 1093).unwrap();
        assert!(analytic_h_bound(d).unwrap() < Rational::from_integer(1093.into()));
    }

    #[test]
    fn enumeration_matches_grid_and_closes() {
        for n in 3..5000i64 {
            let d = -n;
            if !is_fundamental(d) {
                continue;
            }
            let g = class_group(fd(d)).unwrap();
            assert_eq!(
                g.forms.iter().copied().collect::<BTreeSet<_>>(),
                brute_forms(d),
                "D={d}"
            );
            assert_eq!(g.invariant_factors.iter().product::<u64>(), g.h);
            for w in g.invariant_factors.windows(2) {
                assert_eq!(w[1] % w[0], 0);
            }
            if n < 1500 {
                for f in &g.forms {
                    for h in &g.forms {
                        assert!(g.contains(&compose(f, h).unwrap()));
                    }
                }
            }
        }
    }

    #[test]
    fn bound_sweep_small() {
        for n in 5..3000i64 {
            if is_fundamental(-n) {
                let d = fd(-n);
                let h = class_number(d, &Budget::default()).unwrap();
                assert!(Rational::from_integer(h.into()) <= analytic_h_bound(d).unwrap());
            }
        }
    }

    /// (D, p) pairs with D fundamental, |D| < limit and p split.
    fn split_pairs(limit: i64, primes: &[u64]) -> Vec<(i64, u64)> {
        let mut out = Vec::new();
        for n in 3..limit {
            if is_fundamental(-n) {
                for &p in primes {
                    if kronecker(-n, p as i64) == 1 {
                        out.push((-n, p));
                    }
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn order_divides_h_and_conjugates_agree(
            (d, p) in prop::sample::select(split_pairs(20_000, &[3, 5, 7, 11, 13, 17]))
        ) {
            let dd = fd(d);
            let s = ideal_class_order(dd, p).unwrap();
            let h = class_number(dd, &Budget::default()).unwrap();
            prop_assert_eq!(h % s, 0);
            let f = prime_form(dd, p).unwrap();
            let conj = f.inverse();
            prop_assert_eq!(power(&conj, s, dd), QuadraticForm::principal(dd));
            for k in 1..s {
                prop_assert_ne!(power(&conj, k, dd), QuadraticForm::principal(dd));
            }
        }

        #[test]
        fn generator_norm_identity(
            (d, p) in prop::sample::select(split_pairs(5000, &[3, 5, 7, 13]))
        ) {
            let dd = fd(d);
            let s = ideal_class_order(dd, p).unwrap();
            if let Ok((x, y)) = principal_generator(dd, p, s) {
                let ps = BigInt::from(p).pow(s as u32);
                prop_assert_eq!(&x * &x + BigInt::from(-d) * &y * &y, &ps * 4);
                prop_assert!((&x - &y * BigInt::from(d)).is_even());
            }
        }
    }
}
