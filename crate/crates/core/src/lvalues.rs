//! Generalized Bernoulli numbers, L-values at negative integers, Cohen's
//! numbers H(r, N), truncated q-series with twist/U/V operators, Sturm
//! bounds and the level constants of the Eisenstein argument.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::numth::{self, kronecker, Rational};
use crate::quadforms::{is_fundamental_any, FundamentalDiscriminant};

fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn binomial_row(n: u64) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for k in 0..n {
        let next = row[k as usize].clone() * BigInt::from(n - k) / BigInt::from(k + 1);
        row.push(next);
    }
    row
}

/// `S_j = sum_{a=1}^{f} chi(a) a^j` for `j = 0..=n`.
fn power_sums(d: i64, n: u64) -> Vec<BigInt> {
    let f = d.unsigned_abs();
    let chi: Vec<(u64, i8)> = (1..=f)
        .filter_map(|a| {
            let c = kronecker(d, a as i64);
            (c != 0).then_some((a, c))
        })
        .collect();
    let bits_needed = (n + 2) as f64 * (f.max(2) as f64).log2();
    if bits_needed < 120.0 {
        let mut sums = vec![0i128; n as usize + 1];
        for &(a, c) in &chi {
            let mut pw: i128 = 1;
            for s in sums.iter_mut() {
                if c > 0 {
                    *s += pw;
                } else {
                    *s -= pw;
                }
                pw *= a as i128;
            }
        }
        return sums.into_iter().map(BigInt::from).collect();
    }
    let mut sums = vec![BigInt::zero(); n as usize + 1];
    for &(a, c) in &chi {
        let mut pw = BigInt::one();
        for s in sums.iter_mut() {
            if c > 0 {
                *s += &pw;
            } else {
                *s -= &pw;
            }
            pw *= a;
        }
    }
    sums
}

/// `B_{n, chi_d}` for any fundamental discriminant `d` of either sign, or
/// `d = 1` for the trivial character.
pub(crate) fn generalized_bernoulli_any(n: u64, d: i64, budget: &Budget) -> Result<Rational> {
    if n == 0 {
        return Err(Error::precondition("generalized Bernoulli index must be positive"));
    }
    if n > budget.lvalue_max_n {
        return Err(Error::budget(format!(
            "L-value index {n} > {}",
            budget.lvalue_max_n
        )));
    }
    let f = d.unsigned_abs();
    if f > budget.lvalue_max_abs_d {
        return Err(Error::budget(format!(
            "conductor {f} > {}",
            budget.lvalue_max_abs_d
        )));
    }
    let sums = power_sums(d, n);
    let binom = binomial_row(n);
    let fb = BigInt::from(f);
    let mut total = Rational::zero();
    for k in 0..=n {
        let bk = numth::bernoulli_with(k, budget)?;
        if bk.is_zero() {
            continue;
        }
        let s = &sums[(n - k) as usize];
        if s.is_zero() {
            continue;
        }
        // f^(k-1), with k = 0 giving 1/f
        let term = if k == 0 {
            Rational::new(s.clone(), fb.clone())
        } else {
            Rational::from_integer(s * fb.pow(k as u32 - 1))
        };
        total += bk * term * &binom[k as usize];
    }
    Ok(total)
}

/// Exact `B(n, chi_D)`.
pub fn generalized_bernoulli(n: u64, d: FundamentalDiscriminant) -> Result<Rational> {
    generalized_bernoulli_with(n, d, &Budget::default())
}

pub fn generalized_bernoulli_with(
    n: u64,
    d: FundamentalDiscriminant,
    budget: &Budget,
) -> Result<Rational> {
    generalized_bernoulli_any(n, d.value(), budget)
}

/// Exact `L(1 - n, chi_D) = -B(n, chi_D)/n`.
pub fn l_value_neg(n: u64, d: FundamentalDiscriminant) -> Result<Rational> {
    l_value_neg_with(n, d, &Budget::default())
}

pub fn l_value_neg_with(n: u64, d: FundamentalDiscriminant, budget: &Budget) -> Result<Rational> {
    Ok(-generalized_bernoulli_with(n, d, budget)? / rat(n as i64))
}

fn l_value_neg_any(n: u64, d: i64, budget: &Budget) -> Result<Rational> {
    Ok(-generalized_bernoulli_any(n, d, budget)? / rat(n as i64))
}

/// Writes `t = D m^2` with `D` a fundamental discriminant (or 1); `None`
/// when `t` is 2 or 3 mod 4.
pub fn discriminant_split(t: i64) -> Result<Option<(i64, u64)>> {
    if matches!(t.rem_euclid(4), 2 | 3) {
        return Ok(None);
    }
    let (d0, m) = numth::squarefree_decompose(t)?;
    if d0.rem_euclid(4) == 1 {
        return Ok(Some((d0, m)));
    }
    // d0 is 2 or 3 mod 4, so m is even
    debug_assert!(m % 2 == 0);
    let d = 4 * d0;
    debug_assert!(d == 1 || is_fundamental_any(d));
    Ok(Some((d, m / 2)))
}

/// Cohen's number `H(r, N)`.
pub fn cohen_h(r: u64, n: u64) -> Result<Rational> {
    cohen_h_with(r, n, &Budget::default(), &mut HashMap::new())
}

/// As [`cohen_h`], memoizing `L(1 - r, chi_D)` per `D` in `cache`.
pub fn cohen_h_with(
    r: u64,
    n: u64,
    budget: &Budget,
    cache: &mut HashMap<i64, Rational>,
) -> Result<Rational> {
    if r < 2 {
        return Err(Error::precondition("H(r, N) needs r >= 2"));
    }
    if n == 0 {
        let b = numth::bernoulli_with(2 * r, budget)?;
        return Ok(-b / rat(2 * r as i64));
    }
    let t = if r % 2 == 0 { n as i64 } else { -(n as i64) };
    let Some((d, m)) = discriminant_split(t)? else {
        return Ok(Rational::zero());
    };
    let l = match cache.get(&d) {
        Some(v) => v.clone(),
        None => {
            let v = l_value_neg_any(r, d, budget)?;
            cache.insert(d, v.clone());
            v
        }
    };
    let sum = divisor_sum(d, m, r)?;
    Ok(l * Rational::from_integer(sum))
}

/// `sum_{d | m} mu(d) chi_D(d) d^(r-1) sigma_{2r-1}(m/d)`.
fn divisor_sum(d: i64, m: u64, r: u64) -> Result<BigInt> {
    if m == 1 {
        return Ok(BigInt::one());
    }
    let f = numth::factorize(m as i64)?;
    let mut total = BigInt::zero();
    for e in f.divisors() {
        let mu = numth::mobius(e);
        if mu == 0 {
            continue;
        }
        let chi = kronecker(d, e as i64);
        if chi == 0 {
            continue;
        }
        let term = BigInt::from(e).pow(r as u32 - 1) * numth::sigma(2 * r as u32 - 1, m / e);
        if (mu * chi) > 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total)
}

/// Denominator-clearing constant for `H(p, N)/p` on `A_1`.
pub fn alpha(p: u64) -> u64 {
    if p == 3 {
        14
    } else {
        6 * (2 * p + 1)
    }
}

/// `N` with `(-N/p) = 1`.
pub fn in_a1(n: u64, p: u64) -> bool {
    kronecker(-(n as i64), p as i64) == 1
}

/// Truncated q-expansion `sum_{N <= bound} c(N) q^N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    pub bound: u64,
    coeffs: Vec<Rational>,
    /// Level bookkeeping only; never checked.
    pub level_tag: Option<u64>,
}

impl QSeries {
    pub fn from_coefficients(coeffs: Vec<Rational>, level_tag: Option<u64>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least the constant term");
        QSeries {
            bound: coeffs.len() as u64 - 1,
            coeffs,
            level_tag,
        }
    }

    pub fn zero(bound: u64) -> Self {
        QSeries::from_coefficients(vec![Rational::zero(); bound as usize + 1], None)
    }

    /// Coefficient at `n`; zero past the bound.
    pub fn coeff(&self, n: u64) -> Rational {
        self.coeffs
            .get(n as usize)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn map_indexed(&self, f: impl Fn(u64, &Rational) -> Rational) -> QSeries {
        QSeries {
            bound: self.bound,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| f(n as u64, c))
                .collect(),
            level_tag: self.level_tag,
        }
    }

    /// Keeps coefficients where `keep(N)` holds.
    pub fn restrict(&self, keep: impl Fn(u64) -> bool) -> QSeries {
        self.map_indexed(|n, c| if keep(n) { c.clone() } else { Rational::zero() })
    }

    pub fn truncate(&self, bound: u64) -> QSeries {
        let bound = bound.min(self.bound);
        QSeries {
            bound,
            coeffs: self.coeffs[..=bound as usize].to_vec(),
            level_tag: self.level_tag,
        }
    }

    pub fn scale(&self, k: &Rational) -> QSeries {
        self.map_indexed(|_, c| c * k)
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})q^{n}")?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(q^{})", self.bound + 1)
    }
}

/// Characters used for twisting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TwistCharacter {
    /// `(N / p3)` for an odd prime `p3`.
    Legendre(u64),
    /// The mod-4 character with `psi(1) = 1`, `psi(3) = -1`.
    Psi4,
    /// The Kronecker character modulo 8.
    Chi8,
}

impl TwistCharacter {
    pub fn eval(self, n: u64) -> i8 {
        match self {
            TwistCharacter::Legendre(q) => kronecker(n as i64, q as i64),
            TwistCharacter::Psi4 => match n % 4 {
                1 => 1,
                3 => -1,
                _ => 0,
            },
            TwistCharacter::Chi8 => kronecker(8, n as i64),
        }
    }

    pub fn modulus(self) -> u64 {
        match self {
            TwistCharacter::Legendre(q) => q,
            TwistCharacter::Psi4 => 4,
            TwistCharacter::Chi8 => 8,
        }
    }
}

pub fn series_twist(g: &QSeries, ch: TwistCharacter) -> QSeries {
    let mut out = g.map_indexed(|n, c| match ch.eval(n) {
        0 => Rational::zero(),
        1 => c.clone(),
        _ => -c.clone(),
    });
    out.level_tag = g.level_tag.map(|l| l * ch.modulus() * ch.modulus());
    out
}

/// `U_l`: `c(N) -> c(lN)`; the bound shrinks to `bound / l`.
pub fn series_u(g: &QSeries, l: u64) -> QSeries {
    assert!(l > 0);
    let bound = g.bound / l;
    let coeffs = (0..=bound).map(|n| g.coeff(l * n)).collect();
    QSeries {
        bound,
        coeffs,
        level_tag: g.level_tag.map(|x| x * l),
    }
}

/// `V_l`: `c(N) -> c(N/l)` on multiples of `l`; the bound grows to
/// `bound * l`.
pub fn series_v(g: &QSeries, l: u64) -> QSeries {
    assert!(l > 0);
    let bound = g.bound * l;
    let coeffs = (0..=bound)
        .map(|n| {
            if n % l == 0 {
                g.coeff(n / l)
            } else {
                Rational::zero()
            }
        })
        .collect();
    QSeries {
        bound,
        coeffs,
        level_tag: g.level_tag.map(|x| x * l),
    }
}

/// `a*g + b*h`, truncated to the smaller bound.
pub fn series_combine(a: &Rational, g: &QSeries, b: &Rational, h: &QSeries) -> QSeries {
    let bound = g.bound.min(h.bound);
    let coeffs = (0..=bound).map(|n| a * g.coeff(n) + b * h.coeff(n)).collect();
    let level_tag = match (g.level_tag, h.level_tag) {
        (Some(x), Some(y)) => Some(x.lcm(&y)),
        (x, y) => x.or(y),
    };
    QSeries {
        bound,
        coeffs,
        level_tag,
    }
}

/// Coefficients `alpha(p) H(p, N)/p` for `0 <= N <= bound`; integral on `A_1`.
pub fn build_scaled_series(p: u64, bound: u64) -> Result<QSeries> {
    build_scaled_series_with(p, bound, &Budget::default())
}

pub fn build_scaled_series_with(p: u64, bound: u64, budget: &Budget) -> Result<QSeries> {
    let scale = Rational::new(BigInt::from(alpha(p)), BigInt::from(p));
    // disjoint N ranges in parallel, each with its own L-value cache
    let chunk = 256u64;
    let chunks: Vec<(u64, u64)> = (0..=bound / chunk)
        .map(|i| (i * chunk, ((i + 1) * chunk).min(bound + 1)))
        .collect();
    let parts: Vec<Result<Vec<Rational>>> = chunks
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut cache = HashMap::new();
            (lo..hi)
                .map(|n| {
                    let c = cohen_h_with(p, n, budget, &mut cache)? * &scale;
                    if in_a1(n, p) && !c.is_integer() {
                        return Err(Error::IntegralityViolation(format!(
                            "alpha({p}) H({p}, {n})/{p} = {c}"
                        )));
                    }
                    Ok(c)
                })
                .collect()
        })
        .collect();
    let mut coeffs = Vec::with_capacity(bound as usize + 1);
    for part in parts {
        coeffs.extend(part?);
    }
    Ok(QSeries::from_coefficients(coeffs, Some(4 * p)))
}

/// Index `[Gamma_0(1) : Gamma_0(N1)]` and Sturm bound `(k/12)` times it,
/// for weight `k = k_times_2 / 2`.
pub fn sturm_data(k_times_2: u64, n1: u64) -> Result<(u64, Rational)> {
    if n1 == 0 || k_times_2 == 0 {
        return Err(Error::precondition("weight and level must be positive"));
    }
    if k_times_2 % 2 == 1 && n1 % 4 != 0 {
        return Err(Error::precondition("half-integral weight needs 4 | N1"));
    }
    let f = numth::factorize(n1 as i64)?;
    let mut index = n1;
    for q in f.primes() {
        index = index / q * (q + 1);
    }
    let bound = Rational::new(BigInt::from(k_times_2 * index), BigInt::from(24));
    Ok((index, bound))
}

/// The admissible `(A, B)` congruence classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ModClass {
    OneMod8,
    FiveMod8,
    EightMod16,
}

impl ModClass {
    pub fn from_pair(a: u64, b: u64) -> Result<Self> {
        match (a, b) {
            (1, 8) => Ok(ModClass::OneMod8),
            (5, 8) => Ok(ModClass::FiveMod8),
            (8, 16) => Ok(ModClass::EightMod16),
            _ => Err(Error::precondition(format!(
                "(A, B) = ({a}, {b}) is not one of (1,8), (5,8), (8,16)"
            ))),
        }
    }

    pub fn pair(self) -> (u64, u64) {
        match self {
            ModClass::OneMod8 => (1, 8),
            ModClass::FiveMod8 => (5, 8),
            ModClass::EightMod16 => (8, 16),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KappaConstants {
    pub kappa: BigInt,
    pub p1: BigInt,
    pub p2: BigInt,
    pub p3: BigInt,
}

fn check_prime_sets(splus: &[u64], sminus: &[u64], q: Option<u64>) -> Result<BTreeSet<u64>> {
    let mut all = BTreeSet::new();
    for &r in splus.iter().chain(sminus).chain(q.iter()) {
        if r == 2 || !numth::is_prime(r) {
            return Err(Error::precondition(format!("{r} is not an odd prime")));
        }
        if !all.insert(r) {
            return Err(Error::precondition(format!("{r} appears twice in the prime sets")));
        }
    }
    Ok(all)
}

/// `kappa`, `P1`, `P2`, `P3` for the given prime sets and class.
pub fn kappa_constants(
    p: u64,
    splus: &[u64],
    sminus: &[u64],
    q: u64,
    ab: ModClass,
) -> Result<KappaConstants> {
    if !splus.contains(&p) {
        return Err(Error::precondition(format!("{p} must lie in the split set")));
    }
    let all = check_prime_sets(splus, sminus, Some(q))?;
    let m4 = match ab {
        ModClass::OneMod8 | ModClass::FiveMod8 => 10u32,
        ModClass::EightMod16 => 6,
    };
    let mut prod = BigInt::one();
    let mut p1 = BigInt::one();
    let mut rad = BigInt::one();
    for &r in &all {
        let rb = BigInt::from(r);
        prod *= rb.pow(3) * (r + 1);
        p1 *= rb.pow(4);
        rad *= rb;
    }
    let kappa = BigInt::one() + BigInt::from(2).pow(m4) * (2 * p + 1) * prod;
    let p2 = match ab {
        ModClass::EightMod16 => BigInt::from(4).pow(5) * &p1,
        _ => BigInt::from(4).pow(7) * &p1,
    };
    let p3 = BigInt::from(ab.pair().1) * rad;
    Ok(KappaConstants { kappa, p1, p2, p3 })
}

/// `N` in `A_2`: `(-N/r) = 1` on the split set, `-1` on the inert set and
/// `Q`.
pub fn in_a2(n: u64, splus: &[u64], sminus: &[u64], q: Option<u64>) -> bool {
    let t = -(n as i64);
    splus.iter().all(|&r| kronecker(t, r as i64) == 1)
        && sminus
            .iter()
            .chain(q.iter())
            .all(|&r| kronecker(t, r as i64) == -1)
}

/// The twist/U/V pipeline isolating `N = -A mod B`, `N` in `A_2`, applied to
/// `base` (normally [`build_scaled_series`]).
pub fn eisenstein_pipeline(
    base: &QSeries,
    splus: &[u64],
    sminus: &[u64],
    q: Option<u64>,
    ab: ModClass,
) -> Result<QSeries> {
    check_prime_sets(splus, sminus, q)?;
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let mut g = base.clone();
    let signed = splus
        .iter()
        .map(|&r| (r, 1i64))
        .chain(sminus.iter().chain(q.iter()).map(|&r| (r, -1i64)));
    for (r, want) in signed {
        // (-N/r) = want  <=>  (N/r) = want * (-1/r)
        let delta = want * kronecker(-1, r as i64) as i64;
        let g1 = series_twist(&g, TwistCharacter::Legendre(r));
        let g1t = series_twist(&g1, TwistCharacter::Legendre(r));
        g = series_combine(&half, &g1t, &(&half * rat(delta)), &g1);
    }
    match ab {
        ModClass::OneMod8 | ModClass::FiveMod8 => {
            let delta = if ab == ModClass::OneMod8 { 1 } else { -1 };
            let g4 = series_twist(&g, TwistCharacter::Chi8);
            let g4t = series_twist(&g4, TwistCharacter::Chi8);
            Ok(series_combine(&half, &g4t, &(&half * rat(delta)), &g4))
        }
        ModClass::EightMod16 => {
            let g6 = series_combine(
                &Rational::one(),
                &g,
                &Rational::one(),
                &series_twist(&g, TwistCharacter::Psi4),
            );
            let by8 = series_v(&series_u(&g6, 8), 8);
            let by16 = series_v(&series_u(&g6, 16), 16);
            Ok(series_combine(&Rational::one(), &by8, &-Rational::one(), &by16))
        }
    }
}

/// Direct filter of `base` to `N = -A mod B`, `N` in `A_2`.
pub fn direct_filter(
    base: &QSeries,
    splus: &[u64],
    sminus: &[u64],
    q: Option<u64>,
    ab: ModClass,
) -> QSeries {
    let (a, b) = ab.pair();
    base.restrict(|n| (n + a) % b == 0 && in_a2(n, splus, sminus, q))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum CongruenceOutcome {
    Pass,
    Mismatch { n: u64, left: u64, right: u64 },
}

/// Compares `g` and `h` coefficientwise modulo `modulus` for `N <= upto`.
pub fn congruence_check(
    g: &QSeries,
    h: &QSeries,
    modulus: u64,
    upto: u64,
) -> Result<CongruenceOutcome> {
    if upto > g.bound || upto > h.bound {
        return Err(Error::precondition(format!(
            "comparison up to {upto} exceeds series bounds {} / {}",
            g.bound, h.bound
        )));
    }
    if modulus == 0 {
        return Err(Error::precondition("modulus must be positive"));
    }
    for n in 0..=upto {
        let (x, y) = (g.coeff(n), h.coeff(n));
        if x == y {
            // still demand integrality at the modulus
            if numth::rational_mod(&x, modulus).is_none() {
                return Err(Error::NonIntegralCoefficient(n));
            }
            continue;
        }
        let left = numth::rational_mod(&x, modulus).ok_or(Error::NonIntegralCoefficient(n))?;
        let right = numth::rational_mod(&y, modulus).ok_or(Error::NonIntegralCoefficient(n))?;
        if left != right {
            return Ok(CongruenceOutcome::Mismatch { n, left, right });
        }
    }
    Ok(CongruenceOutcome::Pass)
}

/// Renders a rational as `num/den` (or `num` when integral).
pub fn rational_string(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// True when the denominator of `q` is coprime to `p`.
pub fn is_p_integral(q: &Rational, p: u64) -> bool {
    !q.denom().is_multiple_of(&BigInt::from(p))
}

/// Residue of an exact rational at a prime, as a signed integer helper for
/// reporting.
pub fn residue_i64(q: &Rational, m: u64) -> Option<i64> {
    numth::rational_mod(q, m).and_then(|r| r.to_i64())
}
