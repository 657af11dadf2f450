//! Montgomery arithmetic modulo odd `n < 2^128`, probable-prime tests and
//! Pollard–Brent factor search.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Arithmetic in Montgomery form for a fixed odd modulus.
pub trait MontRing: Sized {
    type E: Copy + Eq;
    fn new(n: u128) -> Self;
    fn modulus(&self) -> u128;
    fn to_mont(&self, a: u128) -> Self::E;
    fn from_mont(&self, a: Self::E) -> u128;
    fn one(&self) -> Self::E;
    fn mul(&self, a: Self::E, b: Self::E) -> Self::E;
    fn add(&self, a: Self::E, b: Self::E) -> Self::E;
    fn sub(&self, a: Self::E, b: Self::E) -> Self::E;
    /// A value whose gcd with `n` equals that of the represented residue.
    fn raw(&self, a: Self::E) -> u128;

    fn pow(&self, mut a: Self::E, mut e: u128) -> Self::E {
        let mut r = self.one();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }
}

pub struct Mont64 {
    n: u64,
    ninv: u64,
    r2: u64,
}

impl Mont64 {
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.ninv);
        let (s, carry) = t.overflowing_add(m as u128 * self.n as u128);
        let mut r = (s >> 64) as u64;
        if carry {
            // true value is r + 2^64, which exceeds n
            r = r.wrapping_sub(self.n);
        } else if r >= self.n {
            r -= self.n;
        }
        r
    }
}

impl MontRing for Mont64 {
    type E = u64;

    fn new(n: u128) -> Self {
        let n = n as u64;
        debug_assert!(n % 2 == 1);
        // −n^{−1} mod 2^64 by Newton
        let mut inv: u64 = n;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(n.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % n as u128) as u64;
        let r2 = ((r as u128 * r as u128) % n as u128) as u64;
        Mont64 {
            n,
            ninv: inv.wrapping_neg(),
            r2,
        }
    }

    fn modulus(&self) -> u128 {
        self.n as u128
    }

    fn to_mont(&self, a: u128) -> u64 {
        let a = (a % self.n as u128) as u64;
        self.redc(a as u128 * self.r2 as u128)
    }

    fn from_mont(&self, a: u64) -> u128 {
        self.redc(a as u128) as u128
    }

    fn one(&self) -> u64 {
        self.to_mont(1)
    }

    fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    fn add(&self, a: u64, b: u64) -> u64 {
        let (s, c) = a.overflowing_add(b);
        if c || s >= self.n {
            s.wrapping_sub(self.n)
        } else {
            s
        }
    }

    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a.wrapping_sub(b).wrapping_add(self.n)
        }
    }

    fn raw(&self, a: u64) -> u128 {
        a as u128
    }
}

/// 128×128 → 256-bit product as (high, low).
#[inline]
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    let (a1, a0) = (a >> 64, a & u64::MAX as u128);
    let (b1, b0) = (b >> 64, b & u64::MAX as u128);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 & u64::MAX as u128) + (p10 & u64::MAX as u128);
    let lo = (p00 & u64::MAX as u128) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

pub struct Mont128 {
    n: u128,
    ninv: u128,
    r2: u128,
}

impl Mont128 {
    fn redc(&self, hi: u128, lo: u128) -> u128 {
        let m = lo.wrapping_mul(self.ninv);
        let (mh, ml) = mul_wide(m, self.n);
        let (_, c1) = lo.overflowing_add(ml);
        let (s, c2) = hi.overflowing_add(mh);
        let (s, c3) = s.overflowing_add(c1 as u128);
        if c2 || c3 || s >= self.n {
            s.wrapping_sub(self.n)
        } else {
            s
        }
    }

    fn add_mod(&self, a: u128, b: u128) -> u128 {
        let (s, c) = a.overflowing_add(b);
        if c || s >= self.n {
            s.wrapping_sub(self.n)
        } else {
            s
        }
    }
}

impl MontRing for Mont128 {
    type E = u128;

    fn new(n: u128) -> Self {
        debug_assert!(n % 2 == 1);
        let mut inv: u128 = n;
        for _ in 0..7 {
            inv = inv.wrapping_mul(2u128.wrapping_sub(n.wrapping_mul(inv)));
        }
        let mut ring = Mont128 {
            n,
            ninv: inv.wrapping_neg(),
            r2: 0,
        };
        // R mod n, then doubled 128 times to R² mod n
        let mut r = (u128::MAX % n + 1) % n;
        for _ in 0..128 {
            r = ring.add_mod(r, r);
        }
        ring.r2 = r;
        ring
    }

    fn modulus(&self) -> u128 {
        self.n
    }

    fn to_mont(&self, a: u128) -> u128 {
        let (hi, lo) = mul_wide(a % self.n, self.r2);
        self.redc(hi, lo)
    }

    fn from_mont(&self, a: u128) -> u128 {
        self.redc(0, a)
    }

    fn one(&self) -> u128 {
        self.to_mont(1)
    }

    fn mul(&self, a: u128, b: u128) -> u128 {
        let (hi, lo) = mul_wide(a, b);
        self.redc(hi, lo)
    }

    fn add(&self, a: u128, b: u128) -> u128 {
        self.add_mod(a, b)
    }

    fn sub(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a.wrapping_sub(b).wrapping_add(self.n)
        }
    }

    fn raw(&self, a: u128) -> u128 {
        a
    }
}

pub fn gcd(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

const SMALL_PRIMES: [u128; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Below this bound the first 13 prime bases decide primality exactly.
pub const DETERMINISTIC_LIMIT: u128 = 3_317_044_064_679_887_385_961_981;

/// Random strong-test rounds used above [`DETERMINISTIC_LIMIT`].
pub const RANDOM_ROUNDS: usize = 64;

fn strong_test<R: MontRing>(ring: &R, d: u128, s: u32, a: u128) -> bool {
    let n = ring.modulus();
    let a = a % n;
    if a == 0 {
        return true;
    }
    let one = ring.one();
    let minus_one = ring.sub(ring.to_mont(0), one);
    let mut x = ring.pow(ring.to_mont(a), d);
    if x == one || x == minus_one {
        return true;
    }
    for _ in 1..s {
        x = ring.mul(x, x);
        if x == minus_one {
            return true;
        }
        if x == one {
            return false;
        }
    }
    false
}

fn battery<R: MontRing>(n: u128) -> bool {
    let ring = R::new(n);
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let bases: &[u128] = if n < 1 << 64 { &SMALL_PRIMES[..12] } else { &SMALL_PRIMES };
    if !bases.iter().all(|&a| strong_test(&ring, d, s, a)) {
        return false;
    }
    if n < DETERMINISTIC_LIMIT {
        return true;
    }
    let mut seed = [0u8; 32];
    seed[..16].copy_from_slice(&n.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(seed);
    (0..RANDOM_ROUNDS).all(|_| {
        let r = ((rng.next_u64() as u128) << 64) | rng.next_u64() as u128;
        strong_test(&ring, d, s, 2 + r % (n - 3))
    })
}

/// Strong probable-prime battery: exact below 3.3·10^24, 13 fixed plus 64
/// seeded random bases above.
pub fn is_probable_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    if n < 1 << 64 {
        battery::<Mont64>(n)
    } else {
        battery::<Mont128>(n)
    }
}

/// Iteration budget of one Brent run.
const BRENT_MAX_R: u128 = 1 << 26;
const BRENT_BATCH: u128 = 128;
/// Polynomial constants tried before giving up.
pub const RHO_RESTARTS: u64 = 12;

fn brent<R: MontRing>(ring: &R, c: u128, x0: u128) -> Option<u128> {
    let n = ring.modulus();
    let c = ring.to_mont(c);
    let f = |v: R::E| ring.add(ring.mul(v, v), c);
    let mut y = ring.to_mont(x0);
    let mut x = y;
    let mut ys = y;
    let mut q = ring.one();
    let mut g = 1u128;
    let mut r: u128 = 1;
    while g == 1 && r <= BRENT_MAX_R {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..BRENT_BATCH.min(r - k) {
                y = f(y);
                q = ring.mul(q, ring.sub(x, y));
            }
            g = gcd(ring.raw(q), n);
            k += BRENT_BATCH;
        }
        r *= 2;
    }
    if g == 1 {
        return None;
    }
    if g == n {
        // backtrack one step at a time from the last batch start
        loop {
            ys = f(ys);
            g = gcd(ring.raw(ring.sub(x, ys)), n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

/// A nontrivial factor of the composite `n`, by Pollard rho with Brent's
/// cycle detection, restarted with new constants. `None` if the budget runs out.
pub fn find_factor(n: u128) -> Option<u128> {
    if n % 2 == 0 {
        return Some(2);
    }
    for attempt in 0..RHO_RESTARTS {
        let c = 1 + attempt as u128;
        let x0 = 2 + 3 * attempt as u128;
        let hit = if n < 1 << 64 {
            brent(&Mont64::new(n), c, x0)
        } else {
            brent(&Mont128::new(n), c, x0)
        };
        if let Some(d) = hit {
            return Some(d);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn small_range_matches_trial_division() {
        for n in 0..20_000u64 {
            assert_eq!(is_probable_prime(n as u128), naive_prime(n), "n = {n}");
        }
    }

    #[test]
    fn known_primes_and_pseudoprimes() {
        assert!(is_probable_prime(1_000_000_000_000_000_009)); // 10^18 + 9
        assert!(is_probable_prime((1u128 << 61) - 1));
        assert!(is_probable_prime((1u128 << 89) - 1));
        assert!(is_probable_prime((1u128 << 127) - 1));
        assert!(!is_probable_prime(3_215_031_751)); // strong pseudoprime to 2,3,5,7
        assert!(!is_probable_prime(3_317_044_064_679_887_385_961_981)); // psp to bases ≤ 41
        assert!(!is_probable_prime(((1u128 << 61) - 1) * ((1u128 << 61) - 1)));
    }

    #[test]
    fn montgomery_matches_plain_arithmetic() {
        let n: u128 = (1u128 << 127) - 1;
        let ring = Mont128::new(n);
        let a = 0x1234_5678_9abc_def0_1122_3344_5566_7788u128 % n;
        let b = 0x0fed_cba9_8765_4321_0011_2233_4455_6677u128 % n;
        let prod = ring.from_mont(ring.mul(ring.to_mont(a), ring.to_mont(b)));
        // check against repeated doubling
        let mut acc = 0u128;
        let mut x = a;
        let mut e = b;
        while e > 0 {
            if e & 1 == 1 {
                acc = ring.add_mod(acc, x);
            }
            x = ring.add_mod(x, x);
            e >>= 1;
        }
        assert_eq!(prod, acc);
        let r64 = Mont64::new(1_000_000_007);
        let v = r64.from_mont(r64.pow(r64.to_mont(3), 1_000_000_006));
        assert_eq!(v, 1);
    }

    #[test]
    fn rho_splits_products() {
        let p = 1_000_003u128;
        let q = 1_000_033u128;
        let d = find_factor(p * q).unwrap();
        assert!(d == p || d == q);
        let big = 1_000_000_000_039u128 * 1_000_000_000_000_000_003u128;
        let d = find_factor(big).unwrap();
        assert!(big % d == 0 && d > 1 && d < big);
    }

    #[test]
    fn gcd_basics() {
        assert_eq!(gcd(0, 5), 5);
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(gcd(1 << 100, 1 << 70), 1 << 70);
    }
}
