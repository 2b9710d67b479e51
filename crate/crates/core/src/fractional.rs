//! Weight tables for the L1 Caputo scheme and the fractional centered difference.

use statrs::function::gamma::gamma;

use crate::domain::check_order;
use crate::error::{Error, Result};

/// L1 weights `b_j = (j+1)^{1-gamma} - j^{1-gamma}`, `j = 0..M-1`, with scale
/// `beta = tau^{-gamma} / Gamma(2 - gamma)`.
///
/// The discrete Caputo derivative at `t_n` reads
/// `beta * sum_{k=0}^{n-1} b_{n-1-k} (w^{k+1} - w^k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Weights {
    gamma: f64,
    b: Vec<f64>,
    beta: f64,
}

impl L1Weights {
    pub fn new(gamma_order: f64, steps: usize, tau: f64) -> Result<Self> {
        check_order("gamma", gamma_order)?;
        if steps == 0 {
            return Err(Error::Domain("L1 weights need at least one step".into()));
        }
        if !(tau > 0.0) {
            return Err(Error::Domain(format!(
                "time step must be positive, got {tau}"
            )));
        }
        let p = 1.0 - gamma_order;
        let b = (0..steps)
            .map(|j| {
                if j == 0 {
                    // 0^0 would make this 0 at gamma = 1
                    1.0
                } else {
                    let j = j as f64;
                    (j + 1.0).powf(p) - j.powf(p)
                }
            })
            .collect();
        let beta = tau.powf(-gamma_order) / gamma(2.0 - gamma_order);
        Ok(Self {
            gamma: gamma_order,
            b,
            beta,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// History coefficients `d_m = b_{m-1} - b_m` for `m = 1..M-1`; entry 0 is unused.
    ///
    /// In the implicit step, `w^k` (`1 <= k < n`) enters the right-hand side
    /// with factor `beta * d_{n-k}` and `w^0` with `beta * b_{n-1}`.
    pub fn history(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.b.windows(2).map(|w| w[0] - w[1]))
            .collect()
    }
}

/// Gamma function, exact at small positive integers.
fn gamma_fn(x: f64) -> f64 {
    if x.fract() == 0.0 && (1.0..=20.0).contains(&x) {
        (1..x as u32).map(f64::from).product()
    } else {
        gamma(x)
    }
}

/// Fractional centered difference weights `c_0..=c_K` for `(-Delta)^s` in 1D.
///
/// `c_m = (-1)^m Gamma(2s+1) / (Gamma(s-m+1) Gamma(s+m+1))`, evaluated by the
/// recurrence `c_{m+1} = c_m (m - s) / (m + s + 1)`.
pub fn fcd_weights(s: f64, k: usize) -> Result<Vec<f64>> {
    check_order("s", s)?;
    if k == 0 {
        return Err(Error::Domain(
            "need at least one off-diagonal weight".into(),
        ));
    }
    let mut c = Vec::with_capacity(k + 1);
    let g = gamma_fn(s + 1.0);
    c.push(gamma_fn(2.0 * s + 1.0) / (g * g));
    for m in 0..k {
        let m = m as f64;
        let next = c[c.len() - 1] * (m - s) / (m + s + 1.0);
        c.push(next);
    }
    Ok(c)
}
