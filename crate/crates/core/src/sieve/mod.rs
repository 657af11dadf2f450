//! Rough-number census: segmented sieving of a narrow range, then
//! classification of the survivors into primes, semiprimes and triprimes.

mod checkpoint;
pub mod modarith;

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use crate::consts::exp_minus_gamma_bits;
use crate::dickman::p2_fast;
use crate::error::{Error, Result};
use crate::precision::{BigReal, Precision};

pub use checkpoint::{Checkpoint, SegmentRecord};
pub use modarith::{find_factor, is_probable_prime};

/// Integers per segment, one bit each.
pub const SEGMENT_BITS: u64 = 1 << 25;
/// Largest accepted `n2 − n1`.
pub const MAX_WIDTH: u128 = 1 << 40;
/// Largest accepted sieving bound.
pub const MAX_BOUND: u64 = 1 << 32;
/// The cofactor sieve is used while `n2^{1/3}` stays below this.
pub const COFACTOR_LIMIT: u64 = 1 << 30;

/// Work limits of [`bruteforce_census`].
pub const BRUTE_MAX_WIDTH: u128 = 10_000_000;
pub const BRUTE_MAX_N2: u128 = 10_000_000_000_000;

/// Inclusive range `[n1, n2]` sieved by the primes below `bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveRange {
    n1: u128,
    n2: u128,
    bound: u64,
}

impl SieveRange {
    pub fn new(n1: u128, n2: u128, bound: u64) -> Result<Self> {
        if bound < 2 || bound > MAX_BOUND {
            return Err(Error::Config(format!("bound B = {bound} must lie in [2, 2^32]")));
        }
        if n2 <= n1 {
            return Err(Error::Config(format!("empty range: n2 = {n2} must exceed n1 = {n1}")));
        }
        if (n1 as f64) <= (bound as f64).powf(0.8) {
            return Err(Error::Config(format!("n1 = {n1} must exceed B^(4/5) for B = {bound}")));
        }
        if n2 - n1 > MAX_WIDTH {
            return Err(Error::Config(format!("width {} exceeds the limit 2^40", n2 - n1)));
        }
        Ok(SieveRange { n1, n2, bound })
    }

    /// The range `[n2 − width, n2]` with `B = ⌈n2^{1/4}⌉`.
    pub fn ending_at(n2: u128, width: u128) -> Result<Self> {
        if width == 0 || width >= n2 {
            return Err(Error::Config(format!("width {width} must lie in [1, n2)")));
        }
        let b = iroot(n2, 4);
        let b = if b.pow(4) < n2 { b + 1 } else { b };
        let b = u64::try_from(b).map_err(|_| Error::Config("bound overflow".into()))?;
        SieveRange::new(n2 - width, n2, b)
    }

    pub fn n1(&self) -> u128 {
        self.n1
    }

    pub fn n2(&self) -> u128 {
        self.n2
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Number of integers in the range.
    pub fn len(&self) -> u128 {
        self.n2 - self.n1 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `B⁴ ≥ n2`: every survivor then has at most three prime factors.
    pub fn three_factor_guarantee(&self) -> bool {
        (self.bound as u128).checked_pow(4).map_or(true, |b4| b4 >= self.n2)
    }

    fn require_guarantee(&self) -> Result<()> {
        if self.three_factor_guarantee() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "B^4 < n2 for B = {}, n2 = {}: survivors may have more than three prime factors",
                self.bound, self.n2
            )))
        }
    }

    pub fn segment_count(&self) -> u64 {
        self.len().div_ceil(SEGMENT_BITS as u128) as u64
    }

    /// Bounds of segment `i`.
    pub fn segment(&self, i: u64) -> (u128, u128) {
        let lo = self.n1 + i as u128 * SEGMENT_BITS as u128;
        let hi = (lo + SEGMENT_BITS as u128 - 1).min(self.n2);
        (lo, hi)
    }
}

impl fmt::Display for SieveRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] B={}", self.n1, self.n2, self.bound)
    }
}

/// ⌊n^{1/k}⌋.
pub fn iroot(n: u128, k: u32) -> u128 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / k as f64) as u128;
    while r.checked_pow(k).map_or(true, |v| v > n) {
        r -= 1;
    }
    while (r + 1).checked_pow(k).is_some_and(|v| v <= n) {
        r += 1;
    }
    r
}

/// All primes below `limit` by an odd-only sieve of Eratosthenes.
pub fn primes_below(limit: u64) -> Vec<u32> {
    assert!(limit <= MAX_BOUND + 1);
    if limit <= 2 {
        return Vec::new();
    }
    // bit i stands for 2i + 1
    let half = (limit / 2) as usize;
    let mut composite = vec![0u64; half.div_ceil(64)];
    let mut i = 1usize;
    while (2 * i + 1) * (2 * i + 1) < limit as usize {
        if composite[i / 64] >> (i % 64) & 1 == 0 {
            let p = 2 * i + 1;
            let mut j = (p * p) / 2;
            while j < half {
                composite[j / 64] |= 1 << (j % 64);
                j += p;
            }
        }
        i += 1;
    }
    let mut out = vec![2u32];
    for i in 1..half {
        if composite[i / 64] >> (i % 64) & 1 == 0 && ((2 * i + 1) as u64) < limit {
            out.push((2 * i + 1) as u32);
        }
    }
    out
}

/// Bitmap of one segment: bit `i` set iff `lo + i` has no prime factor in `primes`.
fn sieve_segment(lo: u128, hi: u128, primes: &[u32]) -> Vec<u64> {
    let len = (hi - lo + 1) as usize;
    let mut bits = vec![u64::MAX; len.div_ceil(64)];
    if len % 64 != 0 {
        *bits.last_mut().unwrap() = (1u64 << (len % 64)) - 1;
    }
    for &p in primes {
        let p = p as usize;
        let r = (lo % p as u128) as usize;
        let mut j = if r == 0 { 0 } else { p - r };
        while j < len {
            bits[j / 64] &= !(1u64 << (j % 64));
            j += p;
        }
    }
    bits
}

fn set_bits(bits: &[u64]) -> impl Iterator<Item = usize> + '_ {
    bits.iter().enumerate().flat_map(|(w, &word)| {
        let mut x = word;
        std::iter::from_fn(move || {
            if x == 0 {
                return None;
            }
            let t = x.trailing_zeros() as usize;
            x &= x - 1;
            Some(w * 64 + t)
        })
    })
}

/// Increasing stream of the integers in a range with no prime factor below B.
pub struct Survivors {
    range: SieveRange,
    primes: Vec<u32>,
    next_segment: u64,
    current: std::vec::IntoIter<u128>,
}

impl Iterator for Survivors {
    type Item = u128;

    fn next(&mut self) -> Option<u128> {
        loop {
            if let Some(n) = self.current.next() {
                return Some(n);
            }
            if self.next_segment >= self.range.segment_count() {
                return None;
            }
            let (lo, hi) = self.range.segment(self.next_segment);
            self.next_segment += 1;
            let bits = sieve_segment(lo, hi, &self.primes);
            self.current = set_bits(&bits).map(|i| lo + i as u128).collect::<Vec<_>>().into_iter();
        }
    }
}

/// Survivors of the range, one segment of [`SEGMENT_BITS`] at a time.
/// Accepts any bound; the three-factor guarantee is only needed to classify.
pub fn segmented_sieve(range: &SieveRange) -> Survivors {
    Survivors {
        range: *range,
        primes: primes_below(range.bound),
        next_segment: 0,
        current: Vec::new().into_iter(),
    }
}

/// A rough survivor with its prime factors in ascending order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorClass {
    Prime(u128),
    Semiprime(u128, u128),
    Triprime(u128, u128, u128),
}

impl FactorClass {
    pub fn factors(&self) -> Vec<u128> {
        match *self {
            FactorClass::Prime(p) => vec![p],
            FactorClass::Semiprime(p, q) => vec![p, q],
            FactorClass::Triprime(p, q, r) => vec![p, q, r],
        }
    }

    /// Number of prime factors with multiplicity.
    pub fn omega(&self) -> usize {
        match self {
            FactorClass::Prime(_) => 1,
            FactorClass::Semiprime(..) => 2,
            FactorClass::Triprime(..) => 3,
        }
    }
}

fn split(n: u128) -> Result<(u128, u128)> {
    let d = find_factor(n).ok_or(Error::FactorBudget { n })?;
    let e = n / d;
    Ok((d.min(e), d.max(e)))
}

/// Classifies a survivor of a sieve with bound `bound`. Inputs with four or
/// more prime factors, or a factor below the bound, are rejected.
pub fn classify_survivor(n: u128, bound: u64) -> Result<FactorClass> {
    if n < 2 {
        return Err(Error::domain("classify_survivor", format!("n = {n} has no prime factor")));
    }
    let rough = |f: u128| {
        if f < bound as u128 {
            Err(Error::domain(
                "classify_survivor",
                format!("n = {n} has the factor {f} below B = {bound}"),
            ))
        } else {
            Ok(())
        }
    };
    if is_probable_prime(n) {
        return Ok(FactorClass::Prime(n));
    }
    let (a, b) = split(n)?;
    let class = match (is_probable_prime(a), is_probable_prime(b)) {
        (true, true) => FactorClass::Semiprime(a, b),
        (pa, _) => {
            let (prime, composite) = if pa { (a, b) } else { (b, a) };
            let (c, d) = split(composite)?;
            if !is_probable_prime(c) || !is_probable_prime(d) {
                return Err(Error::domain(
                    "classify_survivor",
                    format!("n = {n} has more than three prime factors"),
                ));
            }
            let mut f = [prime, c, d];
            f.sort_unstable();
            FactorClass::Triprime(f[0], f[1], f[2])
        }
    };
    for f in class.factors() {
        rough(f)?;
    }
    Ok(class)
}

/// How survivors are split into classes. Both give identical counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Cofactor sieve when `n2^{1/3}` is small enough, else rho.
    #[default]
    Auto,
    /// Pollard–Brent on every composite survivor.
    Rho,
    /// Sieve once more by the primes in `[B, n2^{1/3}]` and test the cofactor.
    Cofactor,
}

/// Execution options of [`census_with`].
#[derive(Debug, Clone, Default)]
pub struct CensusOptions {
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
    pub strategy: Strategy,
    /// Completed segments are appended here and skipped on a rerun.
    pub checkpoint: Option<PathBuf>,
}

/// Counts of a census with its theory comparisons.
#[derive(Debug, Clone)]
pub struct SieveReport {
    pub range: SieveRange,
    pub survivors: u64,
    pub c0: u64,
    pub c1: u64,
    pub c2: u64,
    /// Survivors with four or more prime factors, possible only when `B⁴ < n2`.
    pub c_higher: u64,
    pub mertens_estimate: BigReal,
    pub pnt_estimate: BigReal,
    pub target_log3: BigReal,
    pub target_p23: BigReal,
}

/// Working precision of the report estimates.
const REPORT_DIGITS: u32 = 30;

impl SieveReport {
    pub fn from_counts(range: SieveRange, counts: Counts) -> Result<Self> {
        let p = Precision::digits(REPORT_DIGITS);
        let bits = p.bits();
        let ln_n2 = BigReal::from_u128(range.n2, bits).ln()?;
        let ln_b = BigReal::from_u64(range.bound, bits).ln()?;
        let pnt_estimate = BigReal::from_u128(range.n2 - range.n1, bits) / &ln_n2;
        // survivors ≈ width·e^{−γ}/log B and c0 ≈ width/log n2
        let mertens_estimate = if ln_b.is_positive() {
            exp_minus_gamma_bits(bits) * (&ln_n2 / &ln_b) * BigReal::from_u64(counts.c0, bits)
        } else {
            BigReal::zero(bits)
        };
        Ok(SieveReport {
            range,
            survivors: counts.survivors,
            c0: counts.c0,
            c1: counts.c1,
            c2: counts.c2,
            c_higher: counts.c_higher,
            mertens_estimate,
            pnt_estimate,
            target_log3: BigReal::from_u64(3, bits).ln()?,
            target_p23: p2_fast(&BigReal::from_u64(3, bits), p)?,
        })
    }

    pub fn counts(&self) -> Counts {
        Counts {
            survivors: self.survivors,
            c0: self.c0,
            c1: self.c1,
            c2: self.c2,
            c_higher: self.c_higher,
        }
    }

    pub fn c1_over_c0(&self) -> f64 {
        self.c1 as f64 / self.c0 as f64
    }

    pub fn c2_over_c0(&self) -> f64 {
        self.c2 as f64 / self.c0 as f64
    }

    pub const CSV_HEADER: &'static str =
        "n1,n2,B,survivors,c0,c1,c2,c1_over_c0,c2_over_c0,target_log3,target_p23";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.10},{:.10},{},{}",
            self.range.n1,
            self.range.n2,
            self.range.bound,
            self.survivors,
            self.c0,
            self.c1,
            self.c2,
            self.c1_over_c0(),
            self.c2_over_c0(),
            self.target_log3.to_sci_string(20),
            self.target_p23.to_sci_string(20),
        )
    }

    /// Header plus one row.
    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::CSV_HEADER, self.csv_row())
    }
}

impl PartialEq for SieveReport {
    fn eq(&self, other: &Self) -> bool {
        self.range == other.range && self.counts() == other.counts()
    }
}

/// Raw census counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub survivors: u64,
    pub c0: u64,
    pub c1: u64,
    pub c2: u64,
    pub c_higher: u64,
}

impl Counts {
    fn add(&mut self, other: &Counts) {
        self.survivors += other.survivors;
        self.c0 += other.c0;
        self.c1 += other.c1;
        self.c2 += other.c2;
        self.c_higher += other.c_higher;
    }

    fn tally(&mut self, omega: usize) {
        self.survivors += 1;
        match omega {
            1 => self.c0 += 1,
            2 => self.c1 += 1,
            3 => self.c2 += 1,
            _ => self.c_higher += 1,
        }
    }
}

struct Plan {
    primes: Vec<u32>,
    /// Primes in `[B, n2^{1/3}]` for the cofactor strategy.
    medium: Option<Vec<u32>>,
}

impl Plan {
    fn new(range: &SieveRange, strategy: Strategy) -> Self {
        let cube = iroot(range.n2, 3) as u64;
        let cofactor = match strategy {
            Strategy::Rho => false,
            Strategy::Cofactor => true,
            Strategy::Auto => cube <= COFACTOR_LIMIT,
        };
        let all = primes_below(range.bound.max(cube.saturating_add(1)).min(MAX_BOUND + 1));
        let split = all.partition_point(|&p| (p as u64) < range.bound);
        let medium = cofactor.then(|| {
            all[split..]
                .iter()
                .copied()
                .take_while(|&p| p as u64 <= cube)
                .collect()
        });
        let mut primes = all;
        primes.truncate(split);
        Plan { primes, medium }
    }

    fn run_segment(&self, range: &SieveRange, i: u64) -> Result<SegmentRecord> {
        let (lo, hi) = range.segment(i);
        let bits = sieve_segment(lo, hi, &self.primes);
        let mut counts = Counts::default();
        match &self.medium {
            Some(medium) => {
                let len = (hi - lo + 1) as usize;
                let mut smallest: HashMap<u32, u32> = HashMap::new();
                for &p in medium {
                    let pu = p as usize;
                    let r = (lo % p as u128) as usize;
                    let mut j = if r == 0 { 0 } else { pu - r };
                    while j < len {
                        if bits[j / 64] >> (j % 64) & 1 == 1 {
                            smallest.entry(j as u32).or_insert(p);
                        }
                        j += pu;
                    }
                }
                for j in set_bits(&bits) {
                    let n = lo + j as u128;
                    let omega = match smallest.get(&(j as u32)) {
                        None => {
                            if is_probable_prime(n) {
                                1
                            } else {
                                2
                            }
                        }
                        Some(&p) => {
                            let m = n / p as u128;
                            if m == 1 {
                                1
                            } else if is_probable_prime(m) {
                                2
                            } else {
                                3
                            }
                        }
                    };
                    counts.tally(omega);
                }
            }
            None => {
                for j in set_bits(&bits) {
                    counts.tally(classify_survivor(lo + j as u128, range.bound)?.omega());
                }
            }
        }
        Ok(SegmentRecord {
            start: lo,
            end: hi,
            counts,
        })
    }
}

/// Full pipeline with default options.
pub fn census(range: &SieveRange) -> Result<SieveReport> {
    census_with(range, &CensusOptions::default())
}

/// Sieves and classifies every segment, in parallel when enabled. Counts do
/// not depend on the worker count or on segment completion order.
pub fn census_with(range: &SieveRange, opts: &CensusOptions) -> Result<SieveReport> {
    range.require_guarantee()?;
    let plan = Plan::new(range, opts.strategy);
    let ckpt = match &opts.checkpoint {
        Some(path) => Some(Checkpoint::open(path, range)?),
        None => None,
    };
    let done: HashMap<u128, SegmentRecord> = ckpt
        .as_ref()
        .map(|c| c.completed().iter().map(|r| (r.start, *r)).collect())
        .unwrap_or_default();
    let todo: Vec<u64> = (0..range.segment_count())
        .filter(|&i| !done.contains_key(&range.segment(i).0))
        .collect();
    let work = |i: u64| -> Result<SegmentRecord> {
        let rec = plan.run_segment(range, i)?;
        if let Some(c) = &ckpt {
            c.append(&rec)?;
        }
        Ok(rec)
    };
    let fresh = run_all(&todo, opts.workers, work)?;
    let mut counts = Counts::default();
    for rec in done.values().chain(&fresh) {
        counts.add(&rec.counts);
    }
    SieveReport::from_counts(*range, counts)
}

#[cfg(feature = "parallel")]
fn run_all<F>(todo: &[u64], workers: usize, work: F) -> Result<Vec<SegmentRecord>>
where
    F: Fn(u64) -> Result<SegmentRecord> + Sync,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| todo.par_iter().map(|&i| work(i)).collect())
}

#[cfg(not(feature = "parallel"))]
fn run_all<F>(todo: &[u64], _workers: usize, work: F) -> Result<Vec<SegmentRecord>>
where
    F: Fn(u64) -> Result<SegmentRecord>,
{
    todo.iter().map(|&i| work(i)).collect()
}

/// Complete trial-division classification of every integer in the range.
/// Independent of the sieve; four or more factors land in `c_higher`.
pub fn bruteforce_census(range: &SieveRange) -> Result<SieveReport> {
    if range.n2 - range.n1 > BRUTE_MAX_WIDTH || range.n2 > BRUTE_MAX_N2 {
        return Err(Error::Config(format!(
            "bruteforce_census refuses {range}: needs n2 − n1 ≤ 10^7 and n2 ≤ 10^13"
        )));
    }
    let n2 = range.n2 as u64;
    let divisors = TrialDivisors::new(iroot(range.n2, 2) as u64 + 1);
    let mut counts = Counts::default();
    for n in range.n1 as u64..=n2 {
        if let Some(omega) = divisors.rough_omega(n, range.bound) {
            counts.tally(omega);
        }
    }
    SieveReport::from_counts(*range, counts)
}

/// Odd primes with precomputed inverses: `p | n` iff `n·p⁻¹ mod 2^64 ≤ ⌊(2^64−1)/p⌋`.
struct TrialDivisors {
    odd: Vec<(u64, u64, u64)>,
}

impl TrialDivisors {
    fn new(limit: u64) -> Self {
        let odd = primes_below(limit + 1)
            .into_iter()
            .skip(1)
            .map(|p| {
                let p = p as u64;
                let mut inv = p;
                for _ in 0..6 {
                    inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
                }
                (p, inv, u64::MAX / p)
            })
            .collect();
        TrialDivisors { odd }
    }

    /// Ω(n) if every prime factor of `n` is at least `bound`, else `None`.
    fn rough_omega(&self, mut n: u64, bound: u64) -> Option<usize> {
        if n < 2 {
            return None;
        }
        let mut omega = 0;
        if n % 2 == 0 {
            if 2 < bound {
                return None;
            }
            while n % 2 == 0 {
                n /= 2;
                omega += 1;
            }
        }
        for &(p, inv, lim) in &self.odd {
            if p * p > n {
                break;
            }
            if n.wrapping_mul(inv) <= lim {
                if p < bound {
                    return None;
                }
                while n.wrapping_mul(inv) <= lim {
                    n = n.wrapping_mul(inv);
                    omega += 1;
                }
            }
        }
        if n > 1 {
            if n < bound {
                return None;
            }
            omega += 1;
        }
        Some(omega)
    }
}
