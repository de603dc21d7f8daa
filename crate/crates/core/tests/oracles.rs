//! Library results against naive recomputations.

use iqlam_core::numth::{self, kronecker};
use iqlam_core::quadforms::{self, FundamentalDiscriminant};
use iqlam_core::{lvalues, Budget, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

fn naive_fundamental(d: i64) -> bool {
    let sqfree = |n: i64| (2..).take_while(|q| q * q <= n).all(|q| n % (q * q) != 0);
    match d.rem_euclid(4) {
        1 => sqfree(-d),
        0 => matches!((d / 4).rem_euclid(4), 2 | 3) && sqfree(-d / 4),
        _ => false,
    }
}

fn discs(limit: i64) -> Vec<FundamentalDiscriminant> {
    (3..=limit)
        .map(|n| -n)
        .filter(|&d| naive_fundamental(d))
        .map(|d| FundamentalDiscriminant::new(d).unwrap())
        .collect()
}

/// Counts reduced forms by scanning every (a, b) pair.
fn naive_h(d: i64) -> u64 {
    let n = -d;
    let mut h = 0;
    for a in 1..=n {
        if 3 * a * a > n {
            break;
        }
        for b in -a + 1..=a {
            if (b * b - d) % (4 * a) != 0 {
                continue;
            }
            let c = (b * b - d) / (4 * a);
            if c < a || (b < 0 && a == c) {
                continue;
            }
            let g = num_integer::gcd(num_integer::gcd(a, b.abs()), c);
            if g == 1 {
                h += 1;
            }
        }
    }
    h
}

/// Class number formula `h = -(w/2|D|) sum chi(a) a`.
fn dirichlet_h(d: i64) -> u64 {
    let n = -d;
    let s: i64 = (1..n).map(|a| kronecker(d, a) as i64 * a).sum();
    let w = match d {
        -3 => 6,
        -4 => 4,
        _ => 2,
    };
    (-s * w / (2 * n)) as u64
}

fn legendre(a: i64, p: i64) -> i8 {
    let r = numth::pow_mod_signed(a, ((p - 1) / 2) as u64, p as u64);
    match r {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

/// Bernoulli numbers by Akiyama-Tanigawa, with `B_1 = -1/2`.
fn naive_bernoulli(n: usize) -> Vec<Rational> {
    let mut out = Vec::new();
    let mut row: Vec<Rational> = Vec::new();
    for m in 0..=n {
        row.push(Rational::new(BigInt::one(), BigInt::from(m + 1)));
        for j in (1..=m).rev() {
            row[j - 1] = (&row[j - 1] - &row[j]) * Rational::from_integer(BigInt::from(j));
        }
        out.push(row[0].clone());
    }
    if n >= 1 {
        out[1] = -out[1].clone();
    }
    out
}

fn binom(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// `B(n, chi) = f^(n-1) sum_a chi(a) B_n(a/f)`.
fn naive_gen_bernoulli(n: u64, d: i64, b: &[Rational]) -> Rational {
    let f = -d;
    let mut total = Rational::zero();
    for a in 1..=f {
        let chi = kronecker(d, a);
        if chi == 0 {
            continue;
        }
        let x = Rational::new(BigInt::from(a), BigInt::from(f));
        let mut poly = Rational::zero();
        for k in 0..=n {
            let xp = num_traits::pow(x.clone(), (n - k) as usize);
            poly += Rational::from_integer(binom(n, k)) * &b[k as usize] * xp;
        }
        total += poly * Rational::from_integer(BigInt::from(chi));
    }
    total * Rational::from_integer(BigInt::from(f).pow(n as u32 - 1))
}

#[test]
fn fundamental_discriminants_match_definition() {
    for d in -5000..0 {
        assert_eq!(quadforms::is_fundamental(d), naive_fundamental(d), "{d}");
    }
}

#[test]
fn class_number_matches_form_count_and_formula() {
    let budget = Budget::default();
    for d in discs(3000) {
        let h = quadforms::class_number(d, &budget).unwrap();
        assert_eq!(h, naive_h(d.value()), "D={}", d.value());
        assert_eq!(h, dirichlet_h(d.value()), "D={}", d.value());
    }
}

#[test]
fn class_group_shape_is_consistent() {
    for d in discs(1500) {
        let g = quadforms::class_group(d).unwrap();
        assert_eq!(g.forms.len() as u64, g.h);
        assert_eq!(g.invariant_factors.iter().product::<u64>().max(1), g.h);
        for w in g.invariant_factors.windows(2) {
            assert_eq!(w[1] % w[0], 0, "D={}", d.value());
        }
        // the 2-rank is (number of prime divisors of D) - 1
        let t = numth::factorize(d.value()).unwrap().factors.len() as u32;
        let two_rank = g.invariant_factors.iter().filter(|&&e| e % 2 == 0).count() as u32;
        assert_eq!(two_rank, t - 1, "D={}", d.value());
    }
}

#[test]
fn kronecker_matches_euler_criterion() {
    for p in numth::primes_up_to(200).into_iter().filter(|&p| p > 2) {
        for a in -300..300 {
            assert_eq!(kronecker(a, p as i64), legendre(a, p as i64), "({a}/{p})");
        }
    }
}

#[test]
fn bernoulli_matches_akiyama_tanigawa() {
    let b = naive_bernoulli(60);
    for n in 2..=60u64 {
        assert_eq!(numth::bernoulli(n).unwrap(), b[n as usize], "B_{n}");
    }
}

#[test]
fn generalized_bernoulli_matches_polynomial_sum() {
    let b = naive_bernoulli(12);
    for d in discs(120) {
        for n in 1..=9u64 {
            let want = naive_gen_bernoulli(n, d.value(), &b);
            assert_eq!(lvalues::generalized_bernoulli(n, d).unwrap(), want, "n={n} D={}", d.value());
        }
        let h = BigInt::from(dirichlet_h(d.value()));
        let w = BigInt::from(match d.value() {
            -3 => 6,
            -4 => 4,
            _ => 2,
        });
        let b1 = lvalues::generalized_bernoulli(1, d).unwrap();
        assert_eq!(b1, Rational::new(-2 * h, w));
    }
}

/// Least `k` with `4 p^k = x^2 + |D| y^2` and `p` not dividing both.
fn naive_order(d: i64, p: u64, kmax: u32) -> Option<u64> {
    let n = (-d) as u128;
    for k in 1..=kmax {
        let target = 4 * (p as u128).pow(k);
        let mut y: u128 = 1;
        while n * y * y <= target {
            let x2 = target - n * y * y;
            if let Some(x) = numth::is_square_u128(x2) {
                if x % p as u128 != 0 || y % p as u128 != 0 {
                    return Some(k as u64);
                }
            }
            y += 1;
        }
    }
    None
}

#[test]
fn ideal_class_order_matches_norm_equation() {
    let mut checked = 0;
    for d in discs(700) {
        let h = quadforms::class_number(d, &Budget::default()).unwrap();
        for p in [3u64, 5, 7, 11, 13] {
            if kronecker(d.value(), p as i64) != 1 || (p as f64).powi(h as i32) > 1e9 {
                continue;
            }
            let s = quadforms::ideal_class_order(d, p).unwrap();
            assert_eq!(Some(s), naive_order(d.value(), p, h as u32), "D={} p={p}", d.value());
            assert_eq!(h % s, 0);
            let (x, y) = quadforms::principal_generator(d, p, s).unwrap();
            let lhs = &x * &x + BigInt::from(-d.value()) * &y * &y;
            assert_eq!(lhs, BigInt::from(4) * BigInt::from(p).pow(s as u32));
            assert!(y.is_positive() && !x.is_negative());
            checked += 1;
        }
    }
    assert!(checked > 200, "{checked}");
}

#[test]
fn arithmetic_functions_match_naive() {
    for n in 1..400u64 {
        let divs: Vec<u64> = (1..=n).filter(|k| n % k == 0).collect();
        for k in 0..4u32 {
            let want: BigInt = divs.iter().map(|&e| BigInt::from(e).pow(k)).sum();
            assert_eq!(numth::sigma(k, n), want);
        }
        let mut f = numth::factorize(n as i64).unwrap().divisors();
        f.sort();
        assert_eq!(f, divs);
        let mu = if (2..=n).any(|q| n % (q * q) == 0) {
            0
        } else {
            let omega = (2..=n).filter(|&q| n % q == 0 && numth::is_prime(q)).count();
            if omega % 2 == 0 { 1 } else { -1 }
        };
        assert_eq!(numth::mobius(n), mu, "mu({n})");
        let naive_prime = n > 1 && (2..n).all(|q| n % q != 0);
        assert_eq!(numth::is_prime(n), naive_prime);
    }
}

#[test]
fn square_roots_mod_prime_powers() {
    for p in numth::primes_up_to(60).into_iter().filter(|&p| p > 2) {
        let p2 = p * p;
        for d in (-400..0).filter(|&d| kronecker(d, p as i64) == 1) {
            let r = numth::hensel_sqrt_mod_p2(d, p).unwrap();
            assert_eq!((r as i128 * r as i128 - d as i128).rem_euclid(p2 as i128), 0);
            let naive = (0..p2).filter(|&x| (x * x) as i64 % p2 as i64 == d.rem_euclid(p2 as i64)).count();
            assert_eq!(naive, 2, "D={d} p={p}");
        }
    }
}
