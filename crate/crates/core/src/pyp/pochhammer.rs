use crate::error::{Error, Result};

/// `log (x)_n = log Π_{i<n} (x + i)`.
pub fn log_pochhammer(x: f64, n: u64) -> Result<f64> {
    log_pochhammer_step(x, 1.0, n)
}

/// `log (x|y)_n = log Π_{i<n} (x + i·y)`.
pub fn log_pochhammer_step(x: f64, y: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    let last = x + (n - 1) as f64 * y;
    if !(x > 0.0 && last > 0.0) {
        return Err(Error::invalid(format!(
            "Pochhammer ({x}|{y})_{n} has a non-positive factor"
        )));
    }
    if y == 1.0 && n > 16 {
        // Γ(x+n)/Γ(x); exact enough and O(1) for the long totals.
        return Ok(statrs::function::gamma::ln_gamma(x + n as f64)
            - statrs::function::gamma::ln_gamma(x));
    }
    if y == 0.0 {
        return Ok(n as f64 * x.ln());
    }
    if n > 64 && y > 0.0 {
        // (x|y)_n = y^n Γ(x/y + n) / Γ(x/y)
        let z = x / y;
        return Ok(n as f64 * y.ln() + statrs::function::gamma::ln_gamma(z + n as f64)
            - statrs::function::gamma::ln_gamma(z));
    }
    Ok((0..n).map(|i| (x + i as f64 * y).ln()).sum())
}
