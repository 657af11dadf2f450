//! Mertens discrepancy, tail sums and weight tables.

use crate::consts::{euler_gamma_bits, exp_gamma_bits, exp_minus_gamma_bits};
use crate::dickman::{pk_all, rho, sigma, sigma_lenient, WeightTruncation};
use crate::error::{Error, Result};
use crate::furry::FurryTable;
use crate::precision::{BigReal, Precision};

/// `Δ(u) = (u+1)e^{−γ} − σ(u)`, for `u ≥ 0`.
pub fn delta(u: &BigReal, table: &FurryTable) -> Result<BigReal> {
    let bits = table.bits();
    let u = u.with_bits(bits);
    if u.is_negative() {
        return Err(Error::domain("delta", "u must be non-negative"));
    }
    let lin = &(&u + &BigReal::one(bits)) * &exp_minus_gamma_bits(bits);
    Ok(lin - sigma(&u, table)?)
}

/// A solution of `Δ(u) = 0` with `u > 1`.
#[derive(Debug, Clone)]
pub struct ZeroRecord {
    pub index: usize,
    pub u: BigReal,
    pub lo: BigReal,
    pub hi: BigReal,
    pub residual: BigReal,
}

const SCAN_STEP_TENTHS: i64 = 1;
const MAX_NEWTON: usize = 200;

/// Newton on `Δ` with `uΔ'(u) = Δ(u−1)`, kept inside `[lo, hi]` by bisection.
fn polish_zero(mut lo: BigReal, mut hi: BigReal, table: &FurryTable) -> Result<(BigReal, BigReal)> {
    let bits = table.bits();
    let one = BigReal::one(bits);
    let floor = BigReal::ten_pow(-(table.digits() as i64 - 10), bits);
    let d_lo = delta(&lo, table)?;
    let lo_positive = d_lo.is_positive();
    let mut u = (&lo + &hi).div_int(2);
    for _ in 0..MAX_NEWTON {
        let d = delta(&u, table)?;
        if d.abs() < floor {
            return Ok((u, d.abs()));
        }
        if d.is_positive() == lo_positive {
            lo = u.clone();
        } else {
            hi = u.clone();
        }
        let slope = delta(&(&u - &one), table)? / &u;
        let mut next = &u - &(&d / &slope);
        if slope.is_zero() || next <= lo || next >= hi {
            next = (&lo + &hi).div_int(2);
        }
        let width = (&hi - &lo).abs();
        if (&next - &u).abs() < floor || width < floor {
            let d = delta(&next, table)?;
            return Ok((next, d.abs()));
        }
        u = next;
    }
    Err(Error::NoConvergence {
        op: "find_zeros",
        iterations: MAX_NEWTON,
    })
}

/// The first `count` zeros of Δ above `u = 1`, bracketed on a 0.1 grid.
pub fn find_zeros(count: usize, table: &FurryTable) -> Result<Vec<ZeroRecord>> {
    if count == 0 {
        return Err(Error::domain("find_zeros", "count must be at least 1"));
    }
    let bits = table.bits();
    let at = |i: i64| BigReal::ratio(10 + i * SCAN_STEP_TENTHS, 10, bits);
    let mut out = Vec::with_capacity(count);
    let mut i = 0i64;
    let mut prev = delta(&at(0), table)?;
    while out.len() < count {
        let u = at(i + 1);
        let d = delta(&u, table)?;
        if d.is_zero() || d.is_positive() != prev.is_positive() {
            let lo = at(i);
            let (z, residual) = if d.is_zero() { (u.clone(), d.clone()) } else { polish_zero(lo.clone(), u.clone(), table)? };
            out.push(ZeroRecord {
                index: out.len() + 1,
                u: z,
                lo,
                hi: u,
                residual,
            });
        }
        prev = d;
        i += 1;
    }
    Ok(out)
}

/// `(u, Δ(u))` at the local extremum following the zero `u_n`: `Δ'(u_n + 1) = 0`.
pub fn extremum_after(zero: &ZeroRecord, table: &FurryTable) -> Result<(BigReal, BigReal)> {
    let u = &zero.u + &BigReal::one(zero.u.bits());
    let d = delta(&u, table)?;
    Ok((u, d))
}

/// Global minimum of Δ: coarse grid on `[1, hi]`, then Newton on `Δ(u−1) = 0`
/// (the condition `Δ'(u) = 0`) from the best grid point.
pub fn delta_minimum(hi: f64, table: &FurryTable) -> Result<(BigReal, BigReal)> {
    let bits = table.bits();
    let steps = ((hi - 1.0) * 20.0).ceil().max(1.0) as i64;
    let mut best: Option<(BigReal, BigReal)> = None;
    for i in 0..=steps {
        let u = BigReal::ratio(20 + i, 20, bits);
        let d = delta(&u, table)?;
        if best.as_ref().map_or(true, |(_, b)| d < *b) {
            best = Some((u, d));
        }
    }
    let (mut u, _) = best.expect("grid is non-empty");
    let one = BigReal::one(bits);
    let floor = BigReal::ten_pow(-(table.digits() as i64 - 10), bits);
    // Δ'(u) = Δ(u−1)/u; solve g(u) = Δ(u−1) = 0 with g'(u) = Δ(u−2)/(u−1)
    // (on [1,2] that is the constant e^{−γ})
    for _ in 0..MAX_NEWTON {
        let g = delta(&(&u - &one), table)?;
        let um1 = &u - &one;
        let dg = if um1 <= one {
            exp_minus_gamma_bits(bits)
        } else {
            delta(&(&um1 - &one), table)? / &um1
        };
        let step = &g / &dg;
        u -= &step;
        if step.abs() < floor {
            let d = delta(&u, table)?;
            return Ok((u, d));
        }
    }
    Err(Error::NoConvergence {
        op: "delta_minimum",
        iterations: MAX_NEWTON,
    })
}

/// `a(u) = log ρ(u)/u + log u`.
pub fn a_diag(u: &BigReal, table: &FurryTable) -> Result<BigReal> {
    let u = u.with_bits(table.bits());
    Ok(rho(&u, table)?.ln()? / &u + u.ln()?)
}

/// `b(u) = log J(u)/u + log u` with `J(u) = ∫_u^∞ ρ`.
pub fn b_diag(u: &BigReal, table: &FurryTable) -> Result<BigReal> {
    let u = u.with_bits(table.bits());
    Ok(tail_integral(&u, table)?.ln()? / &u + u.ln()?)
}

/// `J(u) = ∫_u^∞ ρ(x) dx = Σ_{m≥1} (u+m) ρ(u+m)`.
///
/// Terms are summed until one falls below `10^{−(D−10)}` for table digits `D`
/// (ρ is decreasing, and consecutive terms shrink by more than half past `u = 2`,
/// so the discarded tail is smaller still). If the table ends first and `u` is
/// an integer `N`, the sum rule `J(N) = e^γ − Σ_{n≤N} nρ(n)` is used instead.
pub fn tail_integral(u: &BigReal, table: &FurryTable) -> Result<BigReal> {
    let bits = table.bits();
    let u = u.with_bits(bits);
    if u.is_negative() {
        return Err(Error::domain("tail_integral", "u must be non-negative"));
    }
    let threshold = BigReal::ten_pow(-(table.digits() as i64 - 10), bits);
    let mut acc = BigReal::zero(bits);
    let mut m = 1u64;
    loop {
        let x = &u + &BigReal::from_u64(m, bits);
        let r = match rho(&x, table) {
            Ok(r) => r,
            Err(Error::TableExhausted { needed, available }) => {
                return if u.is_integer() {
                    Ok(sum_rule(u.to_i64().expect("small") as usize, table)?.1)
                } else {
                    Err(Error::TableExhausted { needed, available })
                };
            }
            Err(e) => return Err(e),
        };
        let term = &x * &r;
        acc += &term;
        if term.abs() < threshold {
            return Ok(acc);
        }
        m += 1;
    }
}

/// `(Σ_{n≤N} nρ(n), e^γ − Σ_{n≤N} nρ(n))`.
pub fn sum_rule(n_max: usize, table: &FurryTable) -> Result<(BigReal, BigReal)> {
    let bits = table.bits();
    if n_max < 1 {
        return Err(Error::domain("sum_rule", "N must be at least 1"));
    }
    if n_max > table.n_max() {
        return Err(Error::TableExhausted {
            needed: n_max,
            available: table.n_max(),
        });
    }
    let mut partial = BigReal::zero(bits);
    for n in 1..=n_max {
        partial += rho(&BigReal::from_u64(n as u64, bits), table)?.mul_int(n as i64);
    }
    let defect = exp_gamma_bits(bits) - &partial;
    Ok((partial, defect))
}

/// Shares `P_k(u)/σ(u)` and their moments.
#[derive(Debug, Clone)]
pub struct WeightDistribution {
    pub u: BigReal,
    pub shares: Vec<BigReal>,
    pub ppt: Vec<i64>,
    pub mean: BigReal,
    pub sd: BigReal,
    pub truncation: Option<WeightTruncation>,
}

/// `round(x)` with halves away from zero.
pub fn round_half_away(x: &BigReal) -> i64 {
    let half = BigReal::ratio(1, 2, x.bits());
    let r = if x.is_negative() {
        -(&(-x) + &half).floor()
    } else {
        (x + &half).floor()
    };
    r.to_i64().expect("rounded value fits i64")
}

pub fn weight_distribution(u: &BigReal, table: &FurryTable) -> Result<WeightDistribution> {
    let bits = table.bits();
    let u = u.with_bits(bits);
    if u < BigReal::from_u64(2, bits) {
        return Err(Error::domain("weight_distribution", "needs u >= 2"));
    }
    let (s, truncation) = sigma_lenient(&u, table)?;
    let ps = pk_all(&u, table)?;
    let n = u.ceil().to_i64().expect("small") as usize;
    let shares: Vec<BigReal> = ps.iter().take(n).map(|p| p / &s).collect();
    let ppt = shares.iter().map(|x| round_half_away(&x.mul_int(1000))).collect();
    let mut mean = BigReal::zero(bits);
    let mut second = BigReal::zero(bits);
    for (k, x) in shares.iter().enumerate() {
        let kx = x.mul_int(k as i64);
        second += kx.mul_int(k as i64);
        mean += kx;
    }
    let var = second - mean.square();
    let sd = if var.is_negative() { BigReal::zero(bits) } else { var.sqrt()? };
    Ok(WeightDistribution {
        u,
        shares,
        ppt,
        mean,
        sd,
        truncation,
    })
}

/// `(u+1)e^{−γ} − Σ_{0<k<u} P_k(u) = 1 + Δ(u)` for integer `u ≥ 1`.
pub fn furry_approximation(u: usize, table: &FurryTable) -> Result<BigReal> {
    if u < 1 {
        return Err(Error::domain("furry_approximation", "u must be at least 1"));
    }
    let bits = table.bits();
    let uu = BigReal::from_u64(u as u64, bits);
    let lin = &(&uu + &BigReal::one(bits)) * &exp_minus_gamma_bits(bits);
    let ps = pk_all(&uu, table)?;
    if u - 1 > table.k_max() {
        return Err(Error::WeightTruncated {
            u: u as f64,
            k_max: table.k_max(),
            bound: crate::dickman::head_bound(table.k_max() + 1, u as f64),
        });
    }
    Ok(ps.iter().skip(1).fold(lin, |acc, p| acc - p))
}

/// `K = (2/3)(1 + log 2)`.
pub fn bm_constant(p: Precision) -> BigReal {
    let bits = p.bits();
    (BigReal::one(bits) + BigReal::ln2(bits)).mul_int(2).div_int(3)
}

/// `e^{−γ} − γ`, the value of Δ at its minimum `u = e^γ`.
pub fn delta_minimum_closed_form(p: Precision) -> (BigReal, BigReal) {
    let bits = p.bits();
    (exp_gamma_bits(bits), exp_minus_gamma_bits(bits) - euler_gamma_bits(bits))
}

/// Sampled curve for one of the three plots.
#[derive(Debug, Clone)]
pub struct FigureSeries {
    pub id: u8,
    pub samples: Vec<(BigReal, BigReal)>,
    pub u_min: BigReal,
    pub u_max: BigReal,
    pub step: BigReal,
}

/// Default `u` range of a figure: `a(u)` and `a(u)−b(u)` on [6, 101],
/// `Δ(u)/ρ(u+3)` on [6, 21] clipped to `N−4`.
pub fn figure_range(id: u8, table: &FurryTable) -> Result<(f64, f64)> {
    match id {
        1 | 2 => Ok((6.0, 101.0)),
        3 => Ok((6.0, 21f64.min(table.n_max() as f64 - 4.0))),
        _ => Err(Error::domain("figure_series", format!("unknown figure id {id}"))),
    }
}

fn figure_value(id: u8, u: &BigReal, table: &FurryTable) -> Result<BigReal> {
    match id {
        1 => a_diag(u, table),
        2 => Ok(a_diag(u, table)? - b_diag(u, table)?),
        _ => {
            let three = BigReal::from_u64(3, table.bits());
            Ok(delta(u, table)? / rho(&(u + &three), table)?)
        }
    }
}

/// Samples figure `id` every `step` from the start of its range up to
/// `u_max` (default: the end of the range).
pub fn figure_series(id: u8, step: &BigReal, u_max: Option<f64>, table: &FurryTable) -> Result<FigureSeries> {
    let bits = table.bits();
    let (lo, hi_default) = figure_range(id, table)?;
    let hi = u_max.unwrap_or(hi_default);
    if !step.is_positive() {
        return Err(Error::domain("figure_series", "step must be positive"));
    }
    if hi < lo {
        return Err(Error::TableExhausted {
            needed: lo as usize + 4,
            available: table.n_max(),
        });
    }
    let u_min = BigReal::from_f64(lo, bits);
    let u_top = BigReal::from_f64(hi, bits);
    let mut grid = Vec::new();
    let mut i = 0i64;
    loop {
        let u = &u_min + &step.mul_int(i);
        if u > u_top {
            break;
        }
        grid.push(u);
        i += 1;
    }
    let eval = |u: &BigReal| figure_value(id, u, table).map(|v| (u.clone(), v));
    #[cfg(feature = "parallel")]
    let samples: Result<Vec<_>> = {
        use rayon::prelude::*;
        grid.par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let samples: Result<Vec<_>> = grid.iter().map(eval).collect();
    Ok(FigureSeries {
        id,
        samples: samples?,
        u_min,
        u_max: u_top,
        step: step.with_bits(bits),
    })
}
