//! Furry probabilities `P_k(u)` and the Dickman/Buchstab functions built from them.
//!
//! `σ(u) = 1 + Σ_{0<k<u} P_k(u)` and `ρ(u) = 1 + Σ_{0<k<u} (−1)^k P_k(u)`.

use crate::consts::zeta_bits;
use crate::error::{Error, Result};
use crate::furry::FurryTable;
use crate::mpl::{m_jn_family, multipolylog, MultiPolylogSpec};
use crate::polylog::{factorial, li};
use crate::precision::{BigReal, Precision};

/// Crossover between the nested-sum route and the expansion route for `P_4`.
pub const U_CRITICAL: f64 = 6.5;

/// Largest `u − k` the automatic dispatcher hands to [`pk_direct`].
pub const DIRECT_SPAN: f64 = 2.0;

fn ceil_index(u: &BigReal) -> usize {
    u.ceil().to_i64().expect("argument fits i64").max(0) as usize
}

/// Digits to carry so that `ρ(u)` keeps `target` digits after cancellation.
pub fn guard_digits(target: u32, u: f64) -> u32 {
    target + (u * u.max(2.0).log10()).ceil().max(0.0) as u32 + 50
}

/// Upper bound `log^{k}(u)/k!` on an omitted weight-`k` term.
pub fn head_bound(k: usize, u: f64) -> f64 {
    let mut b = 1.0;
    for i in 1..=k {
        b *= u.ln() / i as f64;
    }
    b
}

/// `[P_0(u), …, P_m(u)]` with `m = min(K, ceil(u)−1)`, at table precision.
///
/// Uses `P_k(u) = Σ_{j≤k} (−1)^j P_{k−j}(n−j) M_{j,n}(n−u)` with `n = ceil(u)`;
/// one family of `M_{j,n}` serves every weight.
pub fn pk_all(u: &BigReal, table: &FurryTable) -> Result<Vec<BigReal>> {
    let bits = table.bits();
    let u = u.with_bits(bits);
    if u.is_negative() {
        return Err(Error::domain("pk_all", "u must be non-negative"));
    }
    let n = ceil_index(&u).max(1);
    if n > table.n_max() {
        return Err(Error::TableExhausted {
            needed: n,
            available: table.n_max(),
        });
    }
    let kmax = table.k_max().min(n - 1);
    if u.is_integer() {
        return (0..=kmax).map(|k| table.get(k, n)).collect();
    }
    let y = BigReal::from_u64(n as u64, bits) - &u;
    let m = m_jn_family(kmax, n, &y)?;
    let mut out = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let mut acc = BigReal::zero(bits);
        for j in 0..=k {
            let t = &table.get(k - j, n - j)? * &m[j];
            if j % 2 == 0 {
                acc += t;
            } else {
                acc -= t;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// `P_k(u)` from the table. `P_k(k) = 0`; `u < k` is outside the support.
pub fn pk(k: usize, u: &BigReal, table: &FurryTable) -> Result<BigReal> {
    let bits = table.bits();
    let kk = BigReal::from_u64(k as u64, bits);
    if *u < kk {
        return Err(Error::domain("pk", format!("P_{k} needs u >= {k}")));
    }
    if *u == kk {
        return Ok(if k == 0 { BigReal::one(bits) } else { BigReal::zero(bits) });
    }
    if k > table.k_max() {
        return Err(Error::domain(
            "pk",
            format!("weight {k} above stored K = {}", table.k_max()),
        ));
    }
    let all = pk_all(u, table)?;
    Ok(all[k].clone())
}

/// Omitted-weight diagnostic of a partial sum over `P_k(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTruncation {
    pub u: f64,
    pub k_max: usize,
    /// Bound on the first omitted term `P_{K+1}(u)`.
    pub bound: f64,
}

impl From<WeightTruncation> for Error {
    fn from(w: WeightTruncation) -> Self {
        Error::WeightTruncated {
            u: w.u,
            k_max: w.k_max,
            bound: w.bound,
        }
    }
}

/// `1 + Σ_{0<k<u} s^k P_k(u)` with `s = ±1`, plus a warning if the table
/// stops short of weight `ceil(u)−1`.
fn signed_sum(u: &BigReal, table: &FurryTable, alternate: bool) -> Result<(BigReal, Option<WeightTruncation>)> {
    let bits = table.bits();
    if u.is_negative() {
        return Err(Error::domain("rho/sigma", "u must be non-negative"));
    }
    if *u <= BigReal::one(bits) {
        return Ok((BigReal::one(bits), None));
    }
    let ps = pk_all(u, table)?;
    let mut acc = BigReal::zero(bits);
    for (k, p) in ps.iter().enumerate() {
        if alternate && k % 2 == 1 {
            acc -= p;
        } else {
            acc += p;
        }
    }
    let needed = ceil_index(u) - 1;
    let warn = (needed > table.k_max()).then(|| {
        let uf = u.to_f64();
        WeightTruncation {
            u: uf,
            k_max: table.k_max(),
            bound: head_bound(table.k_max() + 1, uf),
        }
    });
    Ok((acc, warn))
}

/// Dickman ρ(u); fails if the table lacks weights needed at `u`.
pub fn rho(u: &BigReal, table: &FurryTable) -> Result<BigReal> {
    match rho_lenient(u, table)? {
        (v, None) => Ok(v),
        (_, Some(w)) => Err(w.into()),
    }
}

/// ρ(u) from whatever weights the table holds, with a truncation warning.
pub fn rho_lenient(u: &BigReal, table: &FurryTable) -> Result<(BigReal, Option<WeightTruncation>)> {
    signed_sum(u, table, true)
}

/// σ(u) = (u+1)ω(u+1).
pub fn sigma(u: &BigReal, table: &FurryTable) -> Result<BigReal> {
    match sigma_lenient(u, table)? {
        (v, None) => Ok(v),
        (_, Some(w)) => Err(w.into()),
    }
}

pub fn sigma_lenient(u: &BigReal, table: &FurryTable) -> Result<(BigReal, Option<WeightTruncation>)> {
    signed_sum(u, table, false)
}

/// Buchstab ω(u) = σ(u−1)/u for u ≥ 1.
pub fn omega(u: &BigReal, table: &FurryTable) -> Result<BigReal> {
    let bits = table.bits();
    let one = BigReal::one(bits);
    if *u < one {
        return Err(Error::domain("omega", "ω is defined here for u >= 1"));
    }
    Ok(sigma(&(u - &one), table)? / u.with_bits(bits))
}

pub fn omega_lenient(u: &BigReal, table: &FurryTable) -> Result<(BigReal, Option<WeightTruncation>)> {
    let bits = table.bits();
    let one = BigReal::one(bits);
    if *u < one {
        return Err(Error::domain("omega", "ω is defined here for u >= 1"));
    }
    let (s, w) = sigma_lenient(&(u - &one), table)?;
    Ok((s / u.with_bits(bits), w))
}

/// `P_k(u) = Σ_{n_1>…>n_k>0} Π z_i^{n_i}/n_i` with `z_i = 1 − 1/(u−k+i)`,
/// for `u ≥ k > 0`, at the precision of `p`.
pub fn pk_direct(k: usize, u: &BigReal, p: Precision) -> Result<BigReal> {
    let bits = p.bits();
    if k == 0 {
        return Err(Error::domain("pk_direct", "weight must be positive"));
    }
    let u = u.with_bits(bits);
    let y = &u - &BigReal::from_u64(k as u64, bits);
    if y.is_negative() {
        return Err(Error::domain("pk_direct", format!("P_{k} needs u >= {k}")));
    }
    if y.is_zero() {
        return Ok(BigReal::zero(bits));
    }
    let one = BigReal::one(bits);
    let z = (1..=k)
        .map(|i| &one - &(&y + &BigReal::from_u64(i as u64, bits)).recip())
        .collect();
    multipolylog(&MultiPolylogSpec::new(vec![1; k], z)?, p)
}

/// `P_k(u)` by the cheapest available route: closed forms for `k ≤ 4`,
/// the nested sum for `u − k ≤ 2`, the table otherwise.
pub fn pk_auto(k: usize, u: &BigReal, table: &FurryTable) -> Result<BigReal> {
    let p = table.precision();
    let bits = table.bits();
    let y = (u - &BigReal::from_u64(k as u64, bits)).to_f64();
    if y < 0.0 {
        return Err(Error::domain("pk", format!("P_{k} needs u >= {k}")));
    }
    match k {
        0 => Ok(BigReal::one(bits)),
        1 => u.with_bits(bits).ln(),
        2 => p2_fast(u, p),
        3 => p3_fast(u, p),
        4 => p4_fast(u, p),
        _ if y <= DIRECT_SPAN => pk_direct(k, u, p),
        _ => pk(k, u, table),
    }
}

fn need_at_least(op: &'static str, u: &BigReal, lo: i64) -> Result<()> {
    if *u < BigReal::from_i64(lo, u.bits()) {
        return Err(Error::domain(op, format!("needs u >= {lo}")));
    }
    Ok(())
}

/// `P_2(u) = (log²u − ζ_2)/2 + Li_2(1/u)` for `u ≥ 2`.
pub fn p2_fast(u: &BigReal, p: Precision) -> Result<BigReal> {
    let bits = p.bits();
    let u = u.with_bits(bits);
    need_at_least("p2_fast", &u, 2)?;
    let l = u.ln()?;
    Ok((l.square() - zeta_bits(2, bits)?).div_int(2) + li(2, &u.recip())?)
}

/// Weight 3 through four classical polylogarithms, for `u ≥ 3`.
pub fn p3_fast(u: &BigReal, p: Precision) -> Result<BigReal> {
    let bits = p.bits();
    let work = bits + 16;
    let u = u.with_bits(work);
    need_at_least("p3_fast", &u, 3)?;
    let two = BigReal::from_u64(2, work);
    let two_minus_u = &two - &u;
    let lu = u.ln()?;
    let lu2 = (&u - &two).ln()?;
    let v = li(3, &(&u * &two_minus_u).recip())?.div_int(2) - li(3, &u.recip())?
        - li(3, &two_minus_u.recip())?
        + &li(2, &u.recip())? * &lu2
        + zeta_bits(3, work)?.div_int(3)
        - (&zeta_bits(2, work)? * &lu).div_int(2)
        + (&lu + &lu2).powi(3).div_int(12)
        - (&lu2.square() * &lu).div_int(2);
    Ok(v.with_bits(bits))
}

/// The elementary part of the weight-4 expansion, `0 < y ≤ 1/2`.
pub fn e4(y: &BigReal) -> Result<BigReal> {
    let bits = y.bits();
    let my = -y;
    let ly = y.ln()?;
    let li1 = -(BigReal::one(bits) + y).ln()?;
    Ok(zeta_bits(4, bits)?.mul_int(19).div_int(16) - li(4, &my)?.mul_int(3)
        + (&li(3, &my)? * &ly).mul_int(3)
        - (&li(2, &my)? * &ly.square()).mul_int(3).div_int(2)
        + (&li1 * &ly.powi(3)).div_int(2)
        + ly.powi(4).div_int(8))
}

fn lim(s: &[u32], z: &[&BigReal], p: Precision) -> Result<BigReal> {
    let spec = MultiPolylogSpec::new(s.to_vec(), z.iter().map(|v| (*v).clone()).collect())?;
    multipolylog(&spec, p)
}

/// Coefficients of `H_4(y) = C_2 log²y/2 + C_3 log y + C_4`, for small `y`.
pub fn h4_coefficients(y: &BigReal, p: Precision) -> Result<[BigReal; 3]> {
    let bits = y.bits();
    let one = BigReal::one(bits);
    let two = BigReal::from_u64(2, bits);
    let m_one = -&one;
    let m_two = -&two;
    let half_m = BigReal::ratio(-1, 2, bits);
    let my = -y;
    let m2y = y.mul_int(-2);
    let c2 = li(2, &m2y)? + lim(&[1, 1], &[&my, &two], p)?;
    let c3 = li(3, y)? - li(3, &m2y)? + lim(&[1, 2], &[&my, &m_one], p)?
        - lim(&[2, 1], &[&my, &two], p)?;
    let c4 = li(4, &m2y)? - li(4, y)? + lim(&[2, 2], &[&m2y, &half_m], p)?
        - lim(&[2, 2], &[&my, &m_one], p)?
        + lim(&[3, 1], &[&m2y, &half_m], p)?
        + lim(&[3, 1], &[&my, &two], p)?
        + lim(&[3, 1], &[y, &m_two], p)?
        + lim(&[1, 1, 2], &[&my, &two, &half_m], p)?
        + lim(&[1, 2, 1], &[&my, &m_one, &m_two], p)?
        + lim(&[1, 2, 1], &[&my, &two, &half_m], p)?;
    Ok([c2, c3, c4])
}

/// `H_4(y)` by its multiple-polylogarithm expansion (valid for `y < 0.45`).
pub fn h4(y: &BigReal, p: Precision) -> Result<BigReal> {
    let [c2, c3, c4] = h4_coefficients(y, p)?;
    let ly = y.ln()?;
    Ok((&c2 * &ly.square()).div_int(2) + &c3 * &ly + c4)
}

/// The weight-4 combination `P_3(u−1) log u + ζ_2/4 (2 Li_2(1−1/u) + log²u)`
/// that precedes `−E_4(y) − H_4(y)`.
fn p4_elementary(u: &BigReal, p3_shift: &BigReal) -> Result<BigReal> {
    let bits = u.bits();
    let lu = u.ln()?;
    let one = BigReal::one(bits);
    let l2 = li(2, &(&one - &u.recip()))?;
    Ok(p3_shift * &lu + (&zeta_bits(2, bits)? * &(l2.mul_int(2) + lu.square())).div_int(4))
}

/// `P_4(u)` for `u ≥ 4`: the nested sum up to `u_c`, the `E_4/H_4` route above.
pub fn p4_fast(u: &BigReal, p: Precision) -> Result<BigReal> {
    let bits = p.bits();
    let work = p.plus(8);
    let u = u.with_bits(work.bits());
    need_at_least("p4_fast", &u, 4)?;
    if u.to_f64() <= U_CRITICAL {
        return Ok(pk_direct(4, &u, p)?.with_bits(bits));
    }
    let one = BigReal::one(work.bits());
    let y = (&u - &BigReal::from_u64(2, work.bits())).recip();
    let p3 = p3_fast(&(&u - &one), work)?;
    let v = p4_elementary(&u, &p3)? - e4(&y)? - h4(&y, work)?;
    Ok(v.with_bits(bits))
}

/// `H_4(1/2)` read off the weight-4 identity at `u = 4`, where `P_4(4) = P_3(3) = 0`.
pub fn h4_half_from_boundary(p: Precision) -> Result<BigReal> {
    let bits = p.bits();
    let four = BigReal::from_u64(4, bits);
    let zero = BigReal::zero(bits);
    Ok(p4_elementary(&four, &zero)? - e4(&BigReal::ratio(1, 2, bits))?)
}

/// Right-hand side of the integer relation for `16 H_4(1/2)`.
pub fn h4_half_relation(p: Precision) -> Result<BigReal> {
    let bits = p.bits();
    let q = BigReal::ratio(1, 4, bits);
    let l2 = BigReal::ln2(bits);
    let l3 = BigReal::from_u64(3, bits).ln()?;
    let z2 = zeta_bits(2, bits)?;
    let z3 = zeta_bits(3, bits)?;
    let li2q = li(2, &q)?;
    Ok(zeta_bits(4, bits)? + li(4, &BigReal::ratio(-1, 2, bits))?.mul_int(48)
        - (&z2 * &li2q).mul_int(8)
        + &(li(3, &q)?.mul_int(12) + (&z2 * &l3).mul_int(16) - z3.mul_int(42)) * &l2
        + &(li2q.mul_int(12) - z2.mul_int(4)) * &l2.square()
        - (&l3 * &l2.powi(3)).mul_int(8)
        + l2.powi(4).mul_int(10))
}

/// `2Li_3(1/3) − Li_3(−1/3) − (13ζ_3 − π² log 3 + log³3)/6`, which vanishes.
pub fn trilog_identity_residual(p: Precision) -> Result<BigReal> {
    let bits = p.bits();
    let l3 = BigReal::from_u64(3, bits).ln()?;
    let pi2 = BigReal::pi(bits).square();
    let lhs = li(3, &BigReal::ratio(1, 3, bits))?.mul_int(2) - li(3, &BigReal::ratio(-1, 3, bits))?;
    let rhs = (zeta_bits(3, bits)?.mul_int(13) - &pi2 * &l3 + l3.powi(3)).div_int(6);
    Ok(lhs - rhs)
}

/// Five-term trilogarithm reduction at `x = −1, y = 1/3`, which vanishes.
pub fn five_term_residual(p: Precision) -> Result<BigReal> {
    let bits = p.bits();
    let l3 = BigReal::from_u64(3, bits).ln()?;
    let pi2 = BigReal::pi(bits).square();
    let lhs = crate::polylog::li_inverted(3, &BigReal::from_i64(-3, bits))?
        - li(3, &BigReal::from_i64(-1, bits))?.mul_int(6)
        - li(3, &BigReal::ratio(1, 3, bits))?.mul_int(6)
        + li(3, &BigReal::ratio(-1, 3, bits))?.mul_int(2)
        + zeta_bits(3, bits)?.mul_int(2);
    let rhs = (&pi2 * &l3 - l3.powi(3).mul_int(2)).div_int(3);
    Ok(lhs - rhs)
}

/// `F_k(u) = Σ_{j<k} (−1)^{k−j−1} P_{k−j}(u−j) F_j(u)`, with `F_0 = 1`.
/// Requires `u > k` for `k ≥ 1`.
pub fn fk(k: usize, u: &BigReal, table: &FurryTable) -> Result<BigReal> {
    Ok(fk_all(k, u, table)?.pop().expect("non-empty"))
}

/// `[F_0(u), …, F_k(u)]`.
pub fn fk_all(k: usize, u: &BigReal, table: &FurryTable) -> Result<Vec<BigReal>> {
    let bits = table.bits();
    let u = u.with_bits(bits);
    if u.is_negative() {
        return Err(Error::domain("fk", "u must be non-negative"));
    }
    if k >= 1 && u <= BigReal::from_u64(k as u64, bits) {
        return Err(Error::domain("fk", format!("F_{k} needs u > {k}")));
    }
    // p[j][w] = P_w(u−j), w ≥ 1
    let shifted: Vec<Vec<BigReal>> = (0..k)
        .map(|j| pk_all(&(&u - &BigReal::from_u64(j as u64, bits)), table))
        .collect::<Result<_>>()?;
    let mut f = vec![BigReal::one(bits)];
    for m in 1..=k {
        let mut acc = BigReal::zero(bits);
        for j in 0..m {
            let w = m - j;
            let pv = shifted[j].get(w).ok_or(Error::domain(
                "fk",
                format!("weight {w} above stored K = {}", table.k_max()),
            ))?;
            let t = pv * &f[j];
            if (m - j - 1) % 2 == 0 {
                acc += t;
            } else {
                acc -= t;
            }
        }
        f.push(acc);
    }
    Ok(f)
}

/// Taylor coefficients `D_0..D_K` of `e^{−γz}/Γ(1+z)`.
#[derive(Debug, Clone)]
pub struct DickmanConstants {
    pub digits: u32,
    pub d: Vec<BigReal>,
}

impl DickmanConstants {
    pub fn k_max(&self) -> usize {
        self.d.len() - 1
    }
}

/// `D_k` by exponentiating `Σ_{m≥2} (−1)^{m+1} ζ_m z^m/m` with
/// `k E_k = Σ_m m a_m E_{k−m}`.
pub fn dickman_constants(k_max: usize, p: Precision) -> Result<DickmanConstants> {
    let bits = p.plus(10).bits();
    let a: Vec<BigReal> = (0..=k_max)
        .map(|m| {
            if m < 2 {
                Ok(BigReal::zero(bits))
            } else {
                let z = zeta_bits(m as i64, bits)?.div_int(m as i64);
                Ok(if m % 2 == 0 { -z } else { z })
            }
        })
        .collect::<Result<_>>()?;
    let mut e = vec![BigReal::one(bits)];
    for k in 1..=k_max {
        let mut acc = BigReal::zero(bits);
        for m in 2..=k {
            acc += (&a[m] * &e[k - m]).mul_int(m as i64);
        }
        e.push(acc.div_int(k as i64));
    }
    Ok(DickmanConstants {
        digits: p.decimal_digits(),
        d: e.into_iter().map(|v| v.with_bits(p.bits())).collect(),
    })
}

/// The closed ζ-form of `D_9`.
pub fn d9_closed_form(p: Precision) -> Result<BigReal> {
    let bits = p.plus(10).bits();
    let z = |k: i64| zeta_bits(k, bits);
    let z3 = z(3)?;
    let v = z(9)?.div_int(9) - (&z(7)? * &z(2)?).div_int(14) + (&z(5)? * &z(4)?).div_int(80)
        - (&z3 * &z(6)?).mul_int(5).div_int(384)
        + z3.powi(3).div_int(162);
    Ok(v.with_bits(p.bits()))
}

/// Leading asymptotic `Σ_{j≤k} D_{k−j} log^j(u)/j!`.
pub fn pk_asymptotic(k: usize, u: &BigReal, dc: &DickmanConstants) -> Result<BigReal> {
    if k > dc.k_max() {
        return Err(Error::domain("pk_asymptotic", "not enough constants"));
    }
    let bits = dc.d[0].bits().min(u.bits());
    let l = u.with_bits(bits).ln()?;
    let mut acc = BigReal::zero(bits);
    for j in 0..=k {
        acc += &dc.d[k - j] * &(l.powi(j as u32) / factorial(j as u32, bits));
    }
    Ok(acc)
}

/// Digits used by the quadrature side of [`theorem6_check`].
pub const QUADRATURE_DIGITS: u32 = 30;

/// Both sides of
/// `∫_k^u P_{k−n−1}(x−n−1) F_n(x)/(x−n) dx = Σ_{j≤n} (−1)^{n−j} P_{k−j}(u−j) F_j(u)`
/// for `u ≥ k > n ≥ 0`: the integral by adaptive quadrature at 30 digits,
/// the sum from the table.
pub fn theorem6_check(k: usize, n: usize, u: &BigReal, table: &FurryTable) -> Result<(BigReal, BigReal)> {
    let bits = table.bits();
    let u = u.with_bits(bits);
    if n >= k || u < BigReal::from_u64(k as u64, bits) {
        return Err(Error::domain("theorem6_check", format!("need u >= k > n >= 0, got k = {k}, n = {n}")));
    }
    let f = fk_all(n, &u, table)?;
    let mut rhs = BigReal::zero(bits);
    for (j, fj) in f.iter().enumerate() {
        let t = &pk(k - j, &(&u - &BigReal::from_u64(j as u64, bits)), table)? * fj;
        if (n - j) % 2 == 0 {
            rhs += t;
        } else {
            rhs -= t;
        }
    }
    let small = table.reduced(QUADRATURE_DIGITS);
    let qbits = small.bits();
    let shift_p = BigReal::from_u64((n + 1) as u64, qbits);
    let shift_f = BigReal::from_u64(n as u64, qbits);
    let w = k - n - 1;
    let integrand = |x: &BigReal| -> Result<BigReal> {
        let head = if w == 0 { BigReal::one(qbits) } else { pk(w, &(x - &shift_p), &small)? };
        Ok(&head * &fk(n, x, &small)? / (x - &shift_f))
    };
    let rule = crate::quad::GaussLegendre::new(20, qbits);
    let tol = BigReal::ten_pow(-25, qbits);
    let lhs = crate::quad::integrate_piecewise(
        &rule,
        &BigReal::from_u64(k as u64, qbits),
        &u.with_bits(qbits),
        &tol,
        &integrand,
    )?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::furry::build_table;
    use std::sync::OnceLock;

    fn table() -> &'static FurryTable {
        static T: OnceLock<FurryTable> = OnceLock::new();
        T.get_or_init(|| build_table(16, 15, Precision::new(60).unwrap()).unwrap())
    }

    fn r(s: &str, bits: usize) -> BigReal {
        BigReal::parse(s, bits).unwrap()
    }

    fn agree(a: &BigReal, b: &BigReal, digits: f64) -> bool {
        (a - b).abs().log10_abs() < -digits
    }

    #[test]
    fn closed_forms_on_first_interval() {
        let t = table();
        let bits = t.bits();
        for s in ["1.1", "1.5", "1.9"] {
            let u = r(s, bits);
            let lu = u.ln().unwrap();
            assert!(agree(&rho(&u, t).unwrap(), &(BigReal::one(bits) - &lu), 58.0));
            assert!(agree(&sigma(&u, t).unwrap(), &(BigReal::one(bits) + &lu), 58.0));
        }
        assert_eq!(rho(&r("0.5", bits), t).unwrap(), BigReal::one(bits));
        assert!(rho(&r("-0.5", bits), t).is_err());
    }

    #[test]
    fn pk_examples() {
        let t = table();
        let bits = t.bits();
        let u = r("7.3", bits);
        assert!(agree(&pk(1, &u, t).unwrap(), &u.ln().unwrap(), 58.0));
        assert!(pk(2, &BigReal::from_u64(2, bits), t).unwrap().is_zero());
        assert_eq!(pk(2, &BigReal::from_u64(3, bits), t).unwrap().to_sci_string(5), "1.4722e-1");
        assert!(pk(3, &r("2.5", bits), t).is_err());
        assert!(matches!(pk(1, &r("16.5", bits), t), Err(Error::TableExhausted { .. })));
    }

    #[test]
    fn methods_agree_where_domains_overlap() {
        let t = table();
        let p = t.precision();
        let bits = t.bits();
        for k in 2..=4usize {
            for s in ["0.3", "1", "1.5", "2"] {
                let u = BigReal::from_u64(k as u64, bits) + r(s, bits);
                let a = pk(k, &u, t).unwrap();
                let b = pk_direct(k, &u, p).unwrap();
                let c = match k {
                    2 => p2_fast(&u, p),
                    3 => p3_fast(&u, p),
                    _ => p4_fast(&u, p),
                }
                .unwrap();
                assert!(agree(&a, &b, 50.0), "k={k} u={s}: {a} vs {b}");
                assert!(agree(&a, &c, 50.0), "k={k} u={s}: {a} vs {c}");
            }
        }
        let eleven = BigReal::from_u64(11, bits);
        assert!(agree(&pk(10, &eleven, t).unwrap(), &pk_direct(10, &eleven, p).unwrap(), 55.0));
    }

    #[test]
    fn weight_four_expansion_route_matches_table() {
        let t = table();
        let p = t.precision();
        let bits = t.bits();
        for s in ["6.75", "8", "11.2", "15.5"] {
            let u = r(s, bits);
            let a = pk(4, &u, t).unwrap();
            let b = p4_fast(&u, p).unwrap();
            assert!(agree(&a, &b, 50.0), "u={s}: {a} vs {b}");
        }
    }

    #[test]
    fn fast_paths_vanish_at_their_thresholds() {
        let p = Precision::new(60).unwrap();
        let bits = p.bits();
        assert!(p2_fast(&BigReal::from_u64(2, bits), p).unwrap().abs().log10_abs() < -58.0);
        assert!(p3_fast(&BigReal::from_u64(3, bits), p).unwrap().abs().log10_abs() < -58.0);
        assert!(p4_fast(&BigReal::from_u64(4, bits), p).unwrap().is_zero());
        assert!(p3_fast(&r("2.9", bits), p).is_err());
    }

    #[test]
    fn identities_vanish() {
        let p = Precision::new(60).unwrap();
        assert!(trilog_identity_residual(p).unwrap().abs().log10_abs() < -58.0);
        assert!(five_term_residual(p).unwrap().abs().log10_abs() < -58.0);
        let h = h4_half_from_boundary(p).unwrap().mul_int(16);
        assert!((h - h4_half_relation(p).unwrap()).abs().log10_abs() < -58.0);
    }

    #[test]
    fn f_recursion_values() {
        let t = table();
        let bits = t.bits();
        assert_eq!(fk(0, &r("0.5", bits), t).unwrap(), BigReal::one(bits));
        let e = BigReal::one(bits).exp();
        assert!(agree(&fk(1, &e, t).unwrap(), &BigReal::one(bits), 58.0));
        // F_2(5) = log 4 log 5 − P_2(5) = ∫_2^5 log x/(x−1) dx ≈ 1.547473
        let five = BigReal::from_u64(5, bits);
        let f2 = fk(2, &five, t).unwrap();
        let expect = &BigReal::from_u64(4, bits).ln().unwrap() * &five.ln().unwrap()
            - pk(2, &five, t).unwrap();
        assert!(agree(&f2, &expect, 58.0));
        assert!((f2.to_f64() - 1.547473).abs() < 1e-6);
        assert!(fk(3, &BigReal::from_u64(3, bits), t).is_err());
    }

    #[test]
    fn dickman_constant_values() {
        let p = Precision::new(60).unwrap();
        let dc = dickman_constants(9, p).unwrap();
        assert_eq!(dc.d[0], BigReal::one(p.bits()));
        assert!(dc.d[1].is_zero());
        let d2 = -zeta_bits(2, p.bits()).unwrap().div_int(2);
        assert!(agree(&dc.d[2], &d2, 58.0));
        assert!(dc.d[3].is_positive());
        assert!(agree(&dc.d[9], &d9_closed_form(p).unwrap(), 58.0));
        assert_eq!(dc.d[9].to_sci_string(5), "1.6850e-3");
    }

    #[test]
    fn asymptotic_gap_shrinks() {
        let t = table();
        let dc = dickman_constants(6, t.precision()).unwrap();
        for k in 2..=3usize {
            let gap = |u: u64| {
                let u = BigReal::from_u64(u, t.bits());
                (pk(k, &u, t).unwrap() - pk_asymptotic(k, &u, &dc).unwrap()).abs().to_f64()
            };
            assert!(gap(8) > gap(12) && gap(12) > gap(16), "k = {k}");
        }
    }

    #[test]
    fn truncated_table_warns() {
        let t = build_table(10, 3, Precision::new(30).unwrap()).unwrap();
        let u = r("6.5", t.bits());
        assert!(matches!(rho(&u, &t), Err(Error::WeightTruncated { k_max: 3, .. })));
        let (_, w) = sigma_lenient(&u, &t).unwrap();
        assert!(w.unwrap().bound > 0.0);
        assert!(sigma(&r("3.5", t.bits()), &t).is_ok());
    }

    #[test]
    fn theorem6_sides_agree() {
        let t = table();
        let bits = t.bits();
        for (k, n, u) in [(3usize, 0usize, "4.5"), (3, 1, "4.5"), (4, 3, "5.25")] {
            let (lhs, rhs) = theorem6_check(k, n, &r(u, bits), t).unwrap();
            assert!((&lhs - &rhs).abs().log10_abs() < -20.0, "({k},{n},{u}): {lhs} vs {rhs}");
            if n == 0 {
                assert!(agree(&rhs, &pk(k, &r(u, bits), t).unwrap(), 55.0));
            }
            if n == k - 1 {
                assert!(agree(&rhs, &fk(k, &r(u, bits), t).unwrap(), 55.0));
            }
        }
        assert!(theorem6_check(3, 3, &r("4", bits), t).is_err());
        assert!(theorem6_check(3, 1, &r("2.5", bits), t).is_err());
    }
}
