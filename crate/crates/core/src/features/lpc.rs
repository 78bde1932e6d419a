//! Linear prediction by the autocorrelation method and the LPC-to-cepstrum
//! recursion.
//!
//! Predictor convention: `x[n] ~ sum_{k=1..p} a_k x[n-k]`, so the normal
//! equations read `sum_k a_k R(|i-k|) = R(i)` for `i = 1..p`.

use super::spectrum::LOG_FLOOR;
use crate::error::{Error, Result};

/// `R(i) = 1/(N-1) * sum_{n=0}^{N-1-i} y[n] y[n+i]` for `i = 0..=max_lag`.
pub fn autocorrelation(frame: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = frame.len();
    if n < 2 {
        return Err(Error::Argument(format!(
            "autocorrelation needs at least 2 samples, got {n}"
        )));
    }
    if max_lag >= n {
        return Err(Error::Argument(format!(
            "lag {max_lag} is not below the frame length {n}"
        )));
    }
    let scale = 1.0 / (n - 1) as f64;
    Ok((0..=max_lag)
        .map(|i| {
            frame[..n - i]
                .iter()
                .zip(&frame[i..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                * scale
        })
        .collect())
}

/// Outcome of an LPC analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct LpcResult {
    /// Predictor coefficients `a_1..a_p`.
    pub coefficients: Vec<f64>,
    /// Final prediction-error energy `R(0) - sum a_k R(k)`.
    pub gain: f64,
    pub order: usize,
    /// Set when the input frame was identically zero; coefficients and gain are
    /// then all zero.
    pub degenerate: bool,
}

impl LpcResult {
    fn degenerate(order: usize) -> Self {
        Self {
            coefficients: vec![0.0; order],
            gain: 0.0,
            order,
            degenerate: true,
        }
    }
}

/// Levinson-Durbin state after running as far as the error stays positive.
pub(crate) struct Levinson {
    pub coefficients: Vec<f64>,
    pub error: f64,
    /// Highest order solved before the prediction error stopped being positive.
    pub reached: usize,
}

pub(crate) fn levinson_durbin(r: &[f64], order: usize) -> Levinson {
    let mut a = vec![0.0; order + 1];
    let mut tmp = vec![0.0; order + 1];
    let mut err = r[0];
    for i in 1..=order {
        let acc = r[i] - (1..i).map(|j| a[j] * r[i - j]).sum::<f64>();
        let k = acc / err;
        let next_err = err * (1.0 - k * k);
        if !(next_err > 0.0) || !k.is_finite() {
            return Levinson {
                coefficients: a[1..].to_vec(),
                error: err,
                reached: i - 1,
            };
        }
        tmp[..i].copy_from_slice(&a[..i]);
        for j in 1..i {
            a[j] = tmp[j] - k * tmp[i - j];
        }
        a[i] = k;
        err = next_err;
    }
    Levinson {
        coefficients: a[1..].to_vec(),
        error: err,
        reached: order,
    }
}

/// Solves the order-`order` normal equations of a windowed frame by the
/// Levinson-Durbin recursion.
pub fn lpc(frame: &[f64], order: usize) -> Result<LpcResult> {
    if order == 0 {
        return Err(Error::Argument("LPC order must be at least 1".into()));
    }
    if frame.len() <= order {
        return Err(Error::Argument(format!(
            "frame of {} samples is too short for order {order}",
            frame.len()
        )));
    }
    let r = autocorrelation(frame, order)?;
    if r[0] == 0.0 {
        return Ok(LpcResult::degenerate(order));
    }
    let sol = levinson_durbin(&r, order);
    if sol.reached < order {
        return Err(Error::Conditioning(format!(
            "prediction error vanished at order {} of {order}",
            sol.reached + 1
        )));
    }
    Ok(LpcResult {
        coefficients: sol.coefficients,
        gain: sol.error,
        order,
        degenerate: false,
    })
}

/// Cepstral coefficients `c_0..c_count` of the all-pole model.
///
/// `c_0 = ln(gain)` (the log floor when the gain is zero), and for `m >= 1`
/// `c_m = a_m + sum_{k=1}^{m-1} (k/m) c_k a_{m-k}`, with `a_j = 0` for `j > p`.
pub fn lpcc(lpc: &LpcResult, count: usize) -> Vec<f64> {
    let a = &lpc.coefficients;
    let p = a.len();
    let mut c = Vec::with_capacity(count + 1);
    c.push(if lpc.gain > 0.0 {
        lpc.gain.ln()
    } else {
        LOG_FLOOR.ln()
    });
    for m in 1..=count {
        let mut acc = if m <= p { a[m - 1] } else { 0.0 };
        for k in 1..m {
            let lag = m - k;
            if lag <= p {
                acc += (k as f64 / m as f64) * c[k] * a[lag - 1];
            }
        }
        c.push(acc);
    }
    c
}
