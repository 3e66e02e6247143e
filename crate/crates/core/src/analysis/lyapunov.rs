use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LyapunovConfig {
    /// Scaling constant; `None` means `1/N`.
    pub k: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    pub lambda: f64,
    pub k: f64,
    pub pairs_used: usize,
    /// Pairs whose input distance was zero.
    pub skipped_zero_input: usize,
    /// Pairs whose state distance was zero (log undefined).
    pub skipped_zero_state: usize,
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `λ = k Σ_j ln(‖x_j − x_ĵ‖ / ‖u_j − u_ĵ‖)` where `ĵ` is the exhaustive
/// L2 nearest neighbour of `u_j` among the other inputs.
pub fn lyapunov_exponent(
    inputs: &[Vec<f64>],
    states: &[Vec<f64>],
    cfg: &LyapunovConfig,
) -> Result<LyapunovResult> {
    if inputs.len() != states.len() {
        return Err(Error::DimensionMismatch {
            what: "states",
            expected: inputs.len(),
            got: states.len(),
        });
    }
    let n = inputs.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "at least two samples are needed".into(),
        ));
    }
    let k = cfg.k.unwrap_or(1.0 / n as f64);
    let mut sum = 0.0;
    let mut used = 0;
    let mut zero_input = 0;
    let mut zero_state = 0;
    for j in 0..n {
        let (nn, du) = (0..n)
            .filter(|&i| i != j)
            .map(|i| (i, l2(&inputs[j], &inputs[i])))
            .fold((usize::MAX, f64::INFINITY), |best, cand| {
                if cand.1 < best.1 {
                    cand
                } else {
                    best
                }
            });
        if du == 0.0 {
            zero_input += 1;
            continue;
        }
        let dx = l2(&states[j], &states[nn]);
        if dx == 0.0 {
            zero_state += 1;
            continue;
        }
        sum += (dx / du).ln();
        used += 1;
    }
    if used == 0 {
        return Err(Error::DegenerateLyapunov(n));
    }
    Ok(LyapunovResult {
        lambda: k * sum,
        k,
        pairs_used: used,
        skipped_zero_input: zero_input,
        skipped_zero_state: zero_state,
    })
}
