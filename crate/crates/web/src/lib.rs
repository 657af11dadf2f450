//! Browser bindings: density curves, weight shares and the Mertens
//! discrepancy, computed from one constant table kept per page.

use std::cell::RefCell;

use dickman::analysis::{delta, weight_distribution};
use dickman::dickman::{rho_lenient, sigma_lenient};
use dickman::furry::{build_table, FurryTable};
use dickman::{BigReal, Precision};
use wasm_bindgen::prelude::*;

/// Largest `u` the page may ask for.
pub const MAX_U: f64 = 24.0;
const DIGITS: u32 = 40;
const MAX_SAMPLES: usize = 2000;

type Res<T> = Result<T, String>;

thread_local! {
    static TABLE: RefCell<Option<FurryTable>> = const { RefCell::new(None) };
}

fn text(e: dickman::Error) -> String {
    e.to_string()
}

/// Runs `f` with a table reaching at least `u`, building a larger one when needed.
fn with_table<T>(u: f64, f: impl FnOnce(&FurryTable) -> Res<T>) -> Res<T> {
    if !(u.is_finite() && u <= MAX_U) {
        return Err(format!("u must be finite and at most {MAX_U}"));
    }
    let n = (u.ceil() as usize + 4).max(8);
    TABLE.with(|cell| {
        let mut slot = cell.borrow_mut();
        if slot.as_ref().map_or(true, |t| t.n_max() < n) {
            *slot = Some(build_table(n, n - 1, Precision::digits(DIGITS)).map_err(text)?);
        }
        f(slot.as_ref().expect("just built"))
    })
}

fn grid(u_min: f64, u_max: f64, step: f64) -> Res<Vec<f64>> {
    if !(step > 0.0 && u_max >= u_min && u_min >= 0.0) {
        return Err("need 0 <= u_min <= u_max and step > 0".into());
    }
    let count = ((u_max - u_min) / step + 1e-9).floor() as usize + 1;
    if count > MAX_SAMPLES {
        return Err(format!("at most {MAX_SAMPLES} samples"));
    }
    Ok((0..count).map(|i| u_min + i as f64 * step).collect())
}

/// Interleaved `[u, log10 ρ(u), log10 σ(u), ...]` on the grid.
pub fn density_values(u_min: f64, u_max: f64, step: f64) -> Res<Vec<f64>> {
    let us = grid(u_min, u_max, step)?;
    with_table(u_max, |t| {
        let mut out = Vec::with_capacity(3 * us.len());
        for &u in &us {
            let x = BigReal::from_f64(u, t.bits());
            let r = rho_lenient(&x, t).map_err(text)?.0;
            let s = sigma_lenient(&x, t).map_err(text)?.0;
            out.extend([u, r.log10_abs(), s.log10_abs()]);
        }
        Ok(out)
    })
}

/// Shares `P_k(u)/σ(u)` for `k = 0, 1, …`, then their mean and standard deviation.
pub fn share_values(u: f64) -> Res<Vec<f64>> {
    with_table(u, |t| {
        let w = weight_distribution(&BigReal::from_f64(u, t.bits()), t).map_err(text)?;
        let mut out: Vec<f64> = w.shares.iter().map(BigReal::to_f64).collect();
        out.extend([w.mean.to_f64(), w.sd.to_f64()]);
        Ok(out)
    })
}

/// Interleaved `[u, Δ(u), ...]` with `Δ(u) = (u+1)e^{−γ} − σ(u)`.
pub fn discrepancy_values(u_min: f64, u_max: f64, step: f64) -> Res<Vec<f64>> {
    let us = grid(u_min.max(1.0), u_max, step)?;
    with_table(u_max, |t| {
        let mut out = Vec::with_capacity(2 * us.len());
        for &u in &us {
            let d = delta(&BigReal::from_f64(u, t.bits()), t).map_err(text)?;
            out.extend([u, d.to_f64()]);
        }
        Ok(out)
    })
}

/// `ρ(u)` with up to 25 significant digits.
pub fn rho_text(u: f64, digits: usize) -> Res<String> {
    with_table(u, |t| {
        let r = rho_lenient(&BigReal::from_f64(u, t.bits()), t).map_err(text)?.0;
        Ok(r.to_sci_string(digits.clamp(1, 25)))
    })
}

fn js<T>(r: Res<T>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn density_curve(u_min: f64, u_max: f64, step: f64) -> Result<Vec<f64>, JsError> {
    js(density_values(u_min, u_max, step))
}

#[wasm_bindgen]
pub fn weight_shares(u: f64) -> Result<Vec<f64>, JsError> {
    js(share_values(u))
}

#[wasm_bindgen]
pub fn discrepancy_curve(u_min: f64, u_max: f64, step: f64) -> Result<Vec<f64>, JsError> {
    js(discrepancy_values(u_min, u_max, step))
}

#[wasm_bindgen]
pub fn rho_decimal(u: f64, digits: usize) -> Result<String, JsError> {
    js(rho_text(u, digits))
}
