//! The table of constants `P_k(n)` at integer arguments.
//!
//! Built by the λ-polynomial recursion
//!
//! ```text
//! S_1 = 1,   S_n = S_{n−1} − Σ_{j=1}^{n−1} (−λ)^j S_{n−j} M_{j,n}(1)
//! ```
//!
//! truncated at degree `K`; the coefficient of `λ^k` in `S_n` is `P_k(n)`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::mpl::m_jn_family;
use crate::precision::{BigReal, Precision};

/// Extra digits carried while building, dropped when the table is sealed.
pub const BUILD_GUARD_DIGITS: u32 = 20;

const MAGIC: &str = "FURRYTABLE";
const FORMAT_VERSION: u32 = 1;

/// Polynomial in λ truncated at a fixed degree.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaPoly {
    coefficients: Vec<BigReal>,
}

impl LambdaPoly {
    pub fn one(degree: usize, bits: usize) -> Self {
        let mut coefficients = vec![BigReal::zero(bits); degree + 1];
        coefficients[0] = BigReal::one(bits);
        LambdaPoly { coefficients }
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[BigReal] {
        &self.coefficients
    }

    /// `self += c·λ^shift·other`, dropping powers above the degree.
    pub fn add_shifted(&mut self, other: &LambdaPoly, shift: usize, c: &BigReal) {
        let deg = self.degree();
        for (k, o) in other.coefficients.iter().enumerate() {
            if k + shift > deg {
                break;
            }
            if !o.is_zero() {
                self.coefficients[k + shift] += o * c;
            }
        }
    }

    /// Value at λ = 1.
    pub fn at_one(&self) -> BigReal {
        self.coefficients.iter().cloned().sum()
    }
}

/// `P_k(n)` for `0 ≤ k < n ≤ N`, `k ≤ K`, stored to `digits` significant digits.
#[derive(Debug, Clone, PartialEq)]
pub struct FurryTable {
    n_max: usize,
    k_max: usize,
    digits: u32,
    // rows[n-1][k] = P_k(n)
    rows: Vec<Vec<BigReal>>,
}

impl FurryTable {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn precision(&self) -> Precision {
        Precision::digits(self.digits)
    }

    pub fn bits(&self) -> usize {
        self.precision().bits()
    }

    /// `P_k(n)`; zero when `k ≥ n` (outside the support).
    pub fn get(&self, k: usize, n: usize) -> Result<BigReal> {
        if n == 0 || n > self.n_max {
            return Err(Error::TableExhausted {
                needed: n,
                available: self.n_max,
            });
        }
        if k >= n {
            return Ok(BigReal::zero(self.bits()));
        }
        if k > self.k_max {
            return Err(Error::domain(
                "FurryTable::get",
                format!("weight {k} above stored K = {}", self.k_max),
            ));
        }
        Ok(self.rows[n - 1][k].clone())
    }

    /// Number of stored constants, the `P_0` column included.
    pub fn record_count(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    /// Same constants rounded to fewer digits.
    pub fn reduced(&self, digits: u32) -> FurryTable {
        let digits = digits.min(self.digits);
        let bits = Precision::digits(digits).bits();
        FurryTable {
            n_max: self.n_max,
            k_max: self.k_max,
            digits,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|v| canonical(v, digits, bits)).collect())
                .collect(),
        }
    }

    /// Writes the cache text format.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "{MAGIC} {FORMAT_VERSION} N={} K={} DIGITS={}",
            self.n_max, self.k_max, self.digits
        )?;
        for (i, row) in self.rows.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                writeln!(w, "P {k} {} {}", i + 1, v.to_sci_string(self.digits as usize))?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| parse_err(1, "empty table file"))??;
        let (n_max, k_max, digits) = parse_header(&header)?;
        let bits = Precision::digits(digits).bits();
        let mut rows: Vec<Vec<Option<BigReal>>> =
            (1..=n_max).map(|n| vec![None; (n).min(k_max + 1)]).collect();
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 || f[0] != "P" {
                return Err(parse_err(lineno, "expected `P <k> <n> <value>`"));
            }
            let k: usize = f[1].parse().map_err(|_| parse_err(lineno, "bad weight"))?;
            let n: usize = f[2].parse().map_err(|_| parse_err(lineno, "bad argument"))?;
            if n == 0 || n > n_max || k >= n || k > k_max {
                return Err(parse_err(lineno, format!("P {k} {n} outside the declared table")));
            }
            let v = BigReal::parse(f[3], bits).map_err(|e| parse_err(lineno, e.to_string()))?;
            if rows[n - 1][k].replace(v).is_some() {
                return Err(parse_err(lineno, format!("duplicate record P {k} {n}")));
            }
        }
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                r.into_iter()
                    .enumerate()
                    .map(|(k, v)| v.ok_or_else(|| parse_err(0, format!("missing record P {k} {}", i + 1))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FurryTable {
            n_max,
            k_max,
            digits,
            rows,
        })
    }
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

fn parse_header(h: &str) -> Result<(usize, usize, u32)> {
    let f: Vec<&str> = h.split_whitespace().collect();
    if f.len() != 5 || f[0] != MAGIC {
        return Err(parse_err(1, "not a table file"));
    }
    if f[1] != FORMAT_VERSION.to_string() {
        return Err(parse_err(1, format!("unsupported format version {}", f[1])));
    }
    let field = |s: &str, key: &str| -> Result<u64> {
        s.strip_prefix(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| parse_err(1, format!("expected {key}<int>, got {s:?}")))
    };
    let n = field(f[2], "N=")? as usize;
    let k = field(f[3], "K=")? as usize;
    let d = field(f[4], "DIGITS=")? as u32;
    if n < 1 || (n >= 2 && (k < 1 || k >= n)) || d < Precision::MIN_DIGITS {
        return Err(parse_err(1, "inconsistent N/K/DIGITS"));
    }
    Ok((n, k, d))
}

/// Round to `digits` significant decimal digits and back, so the stored value
/// is exactly what the text format reproduces.
fn canonical(v: &BigReal, digits: u32, bits: usize) -> BigReal {
    if v.is_zero() {
        return BigReal::zero(bits);
    }
    BigReal::parse(&v.to_sci_string(digits as usize), bits).expect("own output parses")
}

/// `M_{j,n}(1)` for `j = 1..=min(K, n−1)`, one family per `n` in `2..=N`.
fn auxiliary_families(n_max: usize, k_max: usize, bits: usize) -> Result<Vec<Vec<BigReal>>> {
    let one = BigReal::one(bits);
    let job = |n: usize| m_jn_family(k_max.min(n - 1), n, &one);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (2..=n_max).into_par_iter().map(job).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (2..=n_max).map(job).collect()
    }
}

/// Runs the recursion for `2 ≤ n ≤ N` keeping weights up to `K`.
pub fn build_table(n_max: usize, k_max: usize, p: Precision) -> Result<FurryTable> {
    if n_max < 2 {
        return Err(Error::domain("build_table", format!("need N >= 2, got {n_max}")));
    }
    if k_max < 1 || k_max >= n_max {
        return Err(Error::domain(
            "build_table",
            format!("need 1 <= K <= N-1, got K = {k_max}, N = {n_max}"),
        ));
    }
    let digits = p.decimal_digits();
    let work = p.plus(BUILD_GUARD_DIGITS).bits();
    let fams = auxiliary_families(n_max, k_max, work)?;
    let mut s: Vec<LambdaPoly> = vec![LambdaPoly::one(k_max, work)];
    for n in 2..=n_max {
        let m = &fams[n - 2];
        let mut next = s[n - 2].clone();
        for j in 1..=k_max.min(n - 1) {
            // −(−1)^j M_{j,n}
            let c = if j % 2 == 0 { -&m[j] } else { m[j].clone() };
            next.add_shifted(&s[n - 1 - j], j, &c);
        }
        s.push(next);
    }
    let bits = p.bits();
    let rows = s
        .iter()
        .enumerate()
        .map(|(i, poly)| {
            let n = i + 1;
            poly.coefficients()[..n.min(k_max + 1)]
                .iter()
                .map(|v| canonical(v, digits, bits))
                .collect()
        })
        .collect();
    Ok(FurryTable {
        n_max,
        k_max,
        digits,
        rows,
    })
}
