//! Multiple polylogarithms
//!
//! ```text
//! Li_{s_1..s_d}(z_1..z_d) = Σ_{n_1 > … > n_d > 0} Π z_i^{n_i} / n_i^{s_i}
//! ```
//!
//! with the outermost index first. Evaluation works in prefix-product
//! coordinates `w_i = z_1·…·z_i`: writing `Π z_i^{n_i} = Π w_i^{n_i − n_{i+1}}`
//! (with `n_{d+1} = 0`) every factor has modulus below one because each gap
//! `n_i − n_{i+1} ≥ 1`. Individual arguments may exceed one (as in `M_{j,n}`),
//! the prefix products may not.

use crate::error::{Error, Result};
use crate::precision::{BigReal, Precision};

/// Admissibility threshold on every prefix product.
pub const RHO_MAX: f64 = 0.99;

/// Exponents and arguments of a nested sum, outermost first.
#[derive(Debug, Clone)]
pub struct MultiPolylogSpec {
    s: Vec<u32>,
    z: Vec<BigReal>,
}

impl MultiPolylogSpec {
    pub fn new(s: Vec<u32>, z: Vec<BigReal>) -> Result<Self> {
        if s.is_empty() || s.len() != z.len() {
            return Err(Error::domain(
                "MultiPolylogSpec::new",
                format!("need equal non-empty exponent/argument lists, got {} and {}", s.len(), z.len()),
            ));
        }
        if s.contains(&0) {
            return Err(Error::domain("MultiPolylogSpec::new", "exponents must be positive"));
        }
        Ok(MultiPolylogSpec { s, z })
    }

    /// Convenience constructor from rational arguments `(num, den)`.
    pub fn rational(s: &[u32], z: &[(i64, i64)], bits: usize) -> Result<Self> {
        Self::new(
            s.to_vec(),
            z.iter().map(|&(a, b)| BigReal::ratio(a, b, bits)).collect(),
        )
    }

    pub fn depth(&self) -> usize {
        self.s.len()
    }

    pub fn weight(&self) -> u32 {
        self.s.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.s
    }

    pub fn arguments(&self) -> &[BigReal] {
        &self.z
    }

    /// `w_i = z_1 ⋯ z_i`.
    pub fn prefix_products(&self) -> Vec<BigReal> {
        let mut out = Vec::with_capacity(self.z.len());
        let mut acc: Option<BigReal> = None;
        for z in &self.z {
            let w = match &acc {
                None => z.clone(),
                Some(a) => a * z,
            };
            out.push(w.clone());
            acc = Some(w);
        }
        out
    }

    pub fn check_admissible(&self) -> Result<()> {
        for (i, w) in self.prefix_products().iter().enumerate() {
            let m = w.abs().to_f64();
            if m > RHO_MAX {
                return Err(Error::Inadmissible {
                    index: i + 1,
                    modulus: m,
                    limit: RHO_MAX,
                });
            }
        }
        Ok(())
    }
}

/// Outer cutoff and the analytic bound on what it discards.
#[derive(Debug, Clone)]
pub struct TruncationPlan {
    pub cutoff: usize,
    pub tail_bound: BigReal,
}

impl TruncationPlan {
    /// Smallest `N` with `ρ^N (1+ln N)^{d−1}/(1−ρ) < 2^−target`, where
    /// `ρ = max |w_i|` and `target = bits + max(0, −log2 |first term|)`, so the
    /// bound is relative to the leading term (and never weaker than absolute).
    pub fn for_prefix(w_abs: &[f64], s: &[u32], bits: usize) -> Self {
        let d = w_abs.len();
        if w_abs.iter().any(|&w| w == 0.0) {
            return TruncationPlan {
                cutoff: d,
                tail_bound: BigReal::zero(bits),
            };
        }
        let rho = w_abs.iter().cloned().fold(0.0f64, f64::max);
        let lead_log2: f64 = w_abs.iter().map(|w| w.log2()).sum::<f64>()
            - s.iter()
                .enumerate()
                .map(|(i, &si)| si as f64 * ((d - i) as f64).log2())
                .sum::<f64>();
        let target = bits as f64 + (-lead_log2).max(0.0);
        let bound_log2 = |n: f64| {
            n * rho.log2() + (d as f64 - 1.0) * (1.0 + n.ln()).log2() - (1.0 - rho).log2()
        };
        let mut n = d.max(1) as f64;
        let mut step = 64.0f64;
        // coarse-to-fine search for the first N under the target
        while bound_log2(n) >= -target {
            n += step;
            step *= 1.5;
        }
        let mut lo = (n - step / 1.5).max(d as f64);
        let mut hi = n;
        while hi - lo > 1.0 {
            let mid = ((lo + hi) / 2.0).floor();
            if bound_log2(mid) < -target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let cutoff = hi as usize;
        TruncationPlan {
            cutoff,
            tail_bound: BigReal::pow2(bound_log2(hi).ceil() as i64, bits),
        }
    }

    pub fn for_spec(spec: &MultiPolylogSpec, bits: usize) -> Self {
        let w: Vec<f64> = spec.prefix_products().iter().map(|w| w.abs().to_f64()).collect();
        Self::for_prefix(&w, &spec.s, bits)
    }
}

/// Value of the nested sum at precision `p`.
pub fn multipolylog(spec: &MultiPolylogSpec, p: Precision) -> Result<BigReal> {
    spec.check_admissible()?;
    let bits = p.bits();
    let plan = TruncationPlan::for_spec(spec, bits);
    Ok(prefix_dp(spec, plan.cutoff, bits))
}

/// Inner-to-outer recursion on prefix products.
///
/// `h[l](n) = Σ_{m<n} w_l^{n−m} h[l+1](m)/m^{s_{l+1}}` for `l < d` and
/// `h[d](n) = w_d^n`; the sum is `Σ_n h[1](n)/n^{s_1}`. Each step is
/// `h[l](n+1) = w_l (h[l](n) + h[l+1](n)/n^{s_{l+1}})`.
fn prefix_dp(spec: &MultiPolylogSpec, cutoff: usize, bits: usize) -> BigReal {
    let d = spec.depth();
    let work = bits + 16 + (usize::BITS - cutoff.leading_zeros()) as usize;
    let w: Vec<BigReal> = spec
        .prefix_products()
        .iter()
        .map(|x| x.with_bits(work))
        .collect();
    let max_s = *spec.s.iter().max().expect("non-empty");
    // h[1..=d]; h[0] unused
    let mut h: Vec<BigReal> = vec![BigReal::zero(work); d + 1];
    h[d] = w[d - 1].clone();
    let mut total = BigReal::zero(work);
    let mut inv_pows: Vec<BigReal> = Vec::with_capacity(max_s as usize + 1);
    for n in 1..=cutoff {
        let inv = BigReal::from_u64(n as u64, work).recip();
        inv_pows.clear();
        inv_pows.push(BigReal::one(work));
        for e in 1..=max_s as usize {
            let next = &inv_pows[e - 1] * &inv;
            inv_pows.push(next);
        }
        total += &h[1] * &inv_pows[spec.s[0] as usize];
        for l in 1..d {
            let inner = &h[l + 1] * &inv_pows[spec.s[l] as usize];
            h[l] = &w[l - 1] * &(&h[l] + &inner);
        }
        h[d] = &h[d] * &w[d - 1];
    }
    total.with_bits(bits)
}

/// Literal nested loop over `cutoff ≥ n_1 > … > n_d ≥ 1`. Test oracle only:
/// cost grows like `cutoff^d / d!`.
pub fn multipolylog_bruteforce(spec: &MultiPolylogSpec, cutoff: usize) -> Result<BigReal> {
    let d = spec.depth();
    if cutoff < d {
        return Err(Error::domain("multipolylog_bruteforce", "cutoff below depth"));
    }
    let bits = spec.z.iter().map(|z| z.bits()).min().expect("non-empty") + 32;
    // term[i][m] = z_i^m / m^{s_i}
    let terms: Vec<Vec<BigReal>> = spec
        .z
        .iter()
        .zip(&spec.s)
        .map(|(z, &s)| {
            let z = z.with_bits(bits);
            let mut pw = BigReal::one(bits);
            let mut row = vec![BigReal::zero(bits)];
            for m in 1..=cutoff as u64 {
                pw *= &z;
                row.push(&pw / &crate::polylog::int_pow(m, s, bits));
            }
            row
        })
        .collect();
    fn nest(terms: &[Vec<BigReal>], level: usize, upper: usize, prod: &BigReal, acc: &mut BigReal) {
        let d = terms.len();
        let lowest = d - level;
        for m in lowest..upper {
            let p = prod * &terms[level][m];
            if level + 1 == d {
                *acc += &p;
            } else {
                nest(terms, level + 1, m, &p, acc);
            }
        }
    }
    let mut acc = BigReal::zero(bits);
    nest(&terms, 0, cutoff + 1, &BigReal::one(bits), &mut acc);
    Ok(acc)
}

fn check_mjn(j: usize, n: usize, y: &BigReal) -> Result<()> {
    if j == 0 || j >= n {
        return Err(Error::domain("m_jn", format!("need n > j > 0, got j = {j}, n = {n}")));
    }
    if y.is_negative() || *y > BigReal::one(y.bits()) {
        return Err(Error::domain("m_jn", format!("y = {} outside [0, 1]", y.to_sci_string(10))));
    }
    Ok(())
}

/// The spec of `M_{j,n}(y)`: unit exponents, `z_1 = y/n`, `z_i = (n+2−i)/(n+1−i)`.
pub fn m_jn_spec(j: usize, n: usize, y: &BigReal) -> Result<MultiPolylogSpec> {
    check_mjn(j, n, y)?;
    let bits = y.bits();
    let mut z = vec![y.div_int(n as i64)];
    for i in 2..=j {
        z.push(BigReal::ratio((n + 2 - i) as i64, (n + 1 - i) as i64, bits));
    }
    MultiPolylogSpec::new(vec![1; j], z)
}

/// `M_{j,n}(y)` for `n > j > 0` and `0 ≤ y ≤ 1`.
pub fn m_jn(j: usize, n: usize, y: &BigReal, p: Precision) -> Result<BigReal> {
    let y = y.with_bits(p.bits());
    multipolylog(&m_jn_spec(j, n, &y)?, p)
}

/// `[M_{0,n}(y), M_{1,n}(y), …, M_{jmax,n}(y)]` in one pass, at the precision of `y`.
///
/// Runs outer-to-inner over the truncated outer range so that every depth is
/// read off the same sweep: with `O_1(m) = 1/m`,
/// `O_{i+1}(m) = (1/m) Σ_{p>m} O_i(p) w_i^{p−m}` and `M_i = Σ_m O_i(m) w_i^m`,
/// where `w_i = y/(n+1−i)`.
pub fn m_jn_family(jmax: usize, n: usize, y: &BigReal) -> Result<Vec<BigReal>> {
    let bits = y.bits();
    let mut out = vec![BigReal::one(bits)];
    if jmax == 0 {
        return Ok(out);
    }
    check_mjn(jmax, n, y)?;
    if y.is_zero() {
        out.extend((0..jmax).map(|_| BigReal::zero(bits)));
        return Ok(out);
    }
    let yf = y.to_f64();
    let w_abs: Vec<f64> = (1..=jmax).map(|i| yf / (n + 1 - i) as f64).collect();
    let plan = TruncationPlan::for_prefix(&w_abs, &vec![1; jmax], bits);
    let cutoff = plan.cutoff;
    let work = bits + 16 + (usize::BITS - cutoff.leading_zeros()) as usize;
    let y = y.with_bits(work);
    let inv: Vec<BigReal> = (0..=cutoff)
        .map(|m| {
            if m == 0 {
                BigReal::zero(work)
            } else {
                BigReal::from_u64(m as u64, work).recip()
            }
        })
        .collect();
    // level 1
    let mut o: Vec<BigReal> = inv.clone();
    for i in 1..=jmax {
        let w = y.div_int((n + 1 - i) as i64);
        // M_i = Σ_m O_i(m) w^m
        let mut pw = w.clone();
        let mut acc = BigReal::zero(work);
        for m in 1..=cutoff {
            acc += &o[m] * &pw;
            pw *= &w;
        }
        out.push(acc.with_bits(bits));
        if i == jmax {
            break;
        }
        // O_{i+1}(m) = T(m)/m with T(m) = w (O_i(m+1) + T(m+1)), T(cutoff) = 0
        let mut t = BigReal::zero(work);
        let mut next = vec![BigReal::zero(work); cutoff + 1];
        for m in (1..cutoff).rev() {
            t = &w * &(&o[m + 1] + &t);
            next[m] = &t * &inv[m];
        }
        o = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polylog::li;

    fn bits(d: u32) -> usize {
        Precision::new(d).unwrap().bits()
    }

    fn close(a: &BigReal, b: &BigReal, digits: f64) -> bool {
        (a - b).abs().log10_abs() < -digits
    }

    #[test]
    fn depth_one_reduces_to_classical() {
        let p = Precision::new(50).unwrap();
        let spec = MultiPolylogSpec::rational(&[2], &[(1, 4)], p.bits()).unwrap();
        let v = multipolylog(&spec, p).unwrap();
        let c = li(2, &BigReal::ratio(1, 4, p.bits())).unwrap();
        assert!(close(&v, &c, 49.0));
    }

    #[test]
    fn bruteforce_literal_examples() {
        let b = bits(60);
        let spec = MultiPolylogSpec::rational(&[1], &[(1, 2)], b).unwrap();
        let v = multipolylog_bruteforce(&spec, 200).unwrap();
        assert!(close(&v, &BigReal::ln2(b), 50.0));
        let spec = MultiPolylogSpec::rational(&[2], &[(1, 1)], b).unwrap();
        let v = multipolylog_bruteforce(&spec, 10).unwrap();
        assert_eq!(v.to_sci_string(8), "1.5497677e0");
        assert!(multipolylog_bruteforce(&spec, 0).is_err());
    }

    #[test]
    fn inadmissible_reports_prefix_index() {
        let b = bits(30);
        let spec = MultiPolylogSpec::rational(&[1, 1], &[(1, 2), (2, 1)], b).unwrap();
        match multipolylog(&spec, Precision::new(30).unwrap()) {
            Err(Error::Inadmissible { index, .. }) => assert_eq!(index, 2),
            other => panic!("expected admissibility error, got {other:?}"),
        }
    }

    #[test]
    fn spec_validation() {
        assert!(MultiPolylogSpec::rational(&[], &[], 64).is_err());
        assert!(MultiPolylogSpec::rational(&[0], &[(1, 2)], 64).is_err());
        assert!(MultiPolylogSpec::rational(&[1, 2], &[(1, 2)], 64).is_err());
        let s = MultiPolylogSpec::rational(&[1, 2, 1], &[(-1, 5), (-1, 1), (-2, 1)], 64).unwrap();
        assert_eq!(s.weight(), 4);
        assert_eq!(s.depth(), 3);
    }

    #[test]
    fn mjn_single_sum_is_log() {
        let p = Precision::new(40).unwrap();
        let y = BigReal::ratio(3, 4, p.bits());
        for n in [2usize, 5, 11] {
            let v = m_jn(1, n, &y, p).unwrap();
            let nn = BigReal::from_u64(n as u64, p.bits());
            let expect = (&nn / &(&nn - &y)).ln().unwrap();
            assert!(close(&v, &expect, 39.0), "n = {n}");
        }
        assert!(m_jn(2, 3, &BigReal::zero(p.bits()), p).unwrap().is_zero());
        assert!(m_jn(3, 3, &y, p).is_err());
        assert!(m_jn(1, 3, &BigReal::from_u64(2, p.bits()), p).is_err());
    }

    #[test]
    fn mjn_matches_bruteforce() {
        let p = Precision::new(40).unwrap();
        let y = BigReal::one(p.bits());
        let fast = m_jn(2, 3, &y, p).unwrap();
        let brute = multipolylog_bruteforce(&m_jn_spec(2, 3, &y).unwrap(), 400).unwrap();
        assert!(close(&fast, &brute, 25.0));
    }

    #[test]
    fn family_matches_single_evaluations() {
        let p = Precision::new(50).unwrap();
        for (n, y) in [(7usize, (1, 1)), (9, (3, 10)), (4, (999, 1000))] {
            let y = BigReal::ratio(y.0, y.1, p.bits());
            let fam = m_jn_family(n - 1, n, &y).unwrap();
            assert!(fam[0] == BigReal::one(p.bits()));
            for j in 1..n {
                let single = m_jn(j, n, &y, p).unwrap();
                let rel = ((&fam[j] - &single) / &single).abs();
                assert!(rel.log10_abs() < -48.0, "j = {j}, n = {n}: {rel:?}");
            }
        }
    }

    #[test]
    fn plan_tail_bound_is_below_target() {
        let plan = TruncationPlan::for_prefix(&[0.5, 0.25], &[1, 1], 200);
        assert!(plan.tail_bound.log10_abs() < -60.0);
        let shorter = TruncationPlan::for_prefix(&[0.5, 0.25], &[1, 1], 100);
        assert!(shorter.cutoff < plan.cutoff);
    }
}
