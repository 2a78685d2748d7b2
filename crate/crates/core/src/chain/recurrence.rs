//! Exact recurrences for the moments of the leaf height and hop count.
//!
//! With `I ~ q*(n, .)` the state after the first jump,
//!
//! ```text
//! t[n]    = (1 + sum_i t[i] / (n - i)) / h[n-1]
//! m2[n]   = 2 t[n] / h[n-1] + sum_i q*(n, i) m2[i]
//! thop[n] = 1 + sum_i q*(n, i) thop[i]
//! ```
//!
//! The second line follows from `D_n = E + D_I` with `E ~ Exponential(h[n-1])`
//! independent of `I`.

use serde::Serialize;

use crate::error::Result;
use crate::numeric::{format_g17, CompensatedSum};
use crate::split::SplitLaw;

/// Moment tables indexed by `n` (entry 0 unused and zero).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Moments {
    pub t: Vec<f64>,
    pub m2: Vec<f64>,
    pub var: Vec<f64>,
    pub thop: Vec<f64>,
}

fn reversed_inverses(n_max: usize) -> Vec<f64> {
    // w[k] = 1 / (n_max - k), so w[n_max - n + i] = 1 / (n - i)
    (0..n_max).map(|k| 1.0 / (n_max - k) as f64).collect()
}

/// All three recurrences in one pass, `O(N^2)` with compensated accumulation.
pub fn moments(n_max: usize) -> Result<Moments> {
    let law = SplitLaw::for_size(n_max);
    law.check_size(n_max)?;
    let len = n_max.max(1) + 1;
    let mut t = vec![0.0; len];
    let mut m2 = vec![0.0; len];
    let mut thop = vec![0.0; len];
    let w = reversed_inverses(n_max.max(1));
    let top = n_max.max(1);
    for n in 2..=n_max {
        let wn = &w[top - n + 1..top];
        let (mut st, mut sm, mut sh) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
        for (k, &wk) in wn.iter().enumerate() {
            let i = k + 1;
            st.add(t[i] * wk);
            sm.add(m2[i] * wk);
            sh.add(thop[i] * wk);
        }
        let h = law.h(n - 1);
        t[n] = (1.0 + st.value()) / h;
        m2[n] = 2.0 * t[n] / h + sm.value() / h;
        thop[n] = 1.0 + sh.value() / h;
    }
    let var = t.iter().zip(&m2).map(|(t, m)| m - t * t).collect();
    Ok(Moments { t, m2, var, thop })
}

/// `t[1..=N]`, the mean height of a uniform random leaf of CTCS(n).
pub fn depth_mean_recurrence(n_max: usize) -> Result<Vec<f64>> {
    Ok(moments(n_max)?.t)
}

/// `(m2, var)` tables.
pub fn depth_second_moment_recurrence(n_max: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = moments(n_max)?;
    Ok((m.m2, m.var))
}

/// Mean hop count of a uniform random leaf of DTCS(n).
pub fn hop_mean_recurrence(n_max: usize) -> Result<Vec<f64>> {
    Ok(moments(n_max)?.thop)
}

/// `t[1..=N]` by online FFT convolution, `O(N log^2 N)`.
pub fn depth_mean_fast(n_max: usize) -> Result<Vec<f64>> {
    let law = SplitLaw::for_size(n_max);
    law.check_size(n_max)?;
    // x[k] = t[k + 1]
    let (x, _) = super::conv::solve(n_max, |k, s| if k == 0 { 0.0 } else { (1.0 + s) / law.h(k) });
    let mut t = vec![0.0];
    t.extend(x);
    Ok(t)
}

/// Exact recurrence outputs for CSV emission.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericTable {
    pub h: Vec<f64>,
    pub moments: Moments,
}

impl NumericTable {
    pub fn new(n_max: usize) -> Result<Self> {
        let moments = moments(n_max)?;
        let law = SplitLaw::for_size(n_max);
        Ok(NumericTable {
            h: law.harmonic().as_slice()[..=n_max].to_vec(),
            moments,
        })
    }

    pub fn n_max(&self) -> usize {
        self.moments.t.len() - 1
    }

    /// Columns `n,h_n_minus_1,t,m2,var,thop` for `n = 1..=N`.
    pub fn to_csv(&self) -> String {
        let m = &self.moments;
        let mut out = String::from("n,h_n_minus_1,t,m2,var,thop\n");
        for n in 1..=self.n_max() {
            out.push_str(&format!(
                "{n},{},{},{},{},{}\n",
                format_g17(self.h[n - 1]),
                format_g17(m.t[n]),
                format_g17(m.m2[n]),
                format_g17(m.var[n]),
                format_g17(m.thop[n])
            ));
        }
        out
    }
}
