//! Sample moments with jackknife standard errors.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// Number of standard errors between the estimate and `target`.
    pub fn z(&self, target: f64) -> f64 {
        if self.se == 0.0 {
            if self.value == target { 0.0 } else { f64::INFINITY }
        } else {
            (self.value - target) / self.se
        }
    }

    pub fn within(&self, target: f64, k: f64) -> bool {
        self.z(target).abs() <= k
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Moments {
    pub n: usize,
    pub mean: Estimate,
    pub variance: Estimate,
    pub skewness: Estimate,
    pub excess_kurtosis: Estimate,
}

#[derive(Clone, Copy)]
struct Raw {
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

fn central(n: f64, t1: f64, t2: f64, t3: f64, t4: f64) -> Raw {
    let mu = t1 / n;
    let (a2, a3, a4) = (t2 / n, t3 / n, t4 / n);
    Raw {
        mean: mu,
        m2: a2 - mu * mu,
        m3: a3 - 3.0 * mu * a2 + 2.0 * mu.powi(3),
        m4: a4 - 4.0 * mu * a3 + 6.0 * mu * mu * a2 - 3.0 * mu.powi(4),
    }
}

fn stats_of(r: Raw, n: f64) -> [f64; 4] {
    [
        r.mean,
        r.m2 * n / (n - 1.0),
        r.m3 / r.m2.powf(1.5),
        r.m4 / (r.m2 * r.m2) - 3.0,
    ]
}

/// Mean, variance, skewness and excess kurtosis; standard errors by leave-one-out jackknife.
pub fn moments(xs: &[f64]) -> Result<Moments> {
    let n = xs.len();
    if n < 3 {
        return Err(Error::InsufficientSamples { n, min: 3 });
    }
    let shift = xs.iter().sum::<f64>() / n as f64;
    let mut s = [0.0; 4];
    for &x in xs {
        let y = x - shift;
        let y2 = y * y;
        s[0] += y;
        s[1] += y2;
        s[2] += y2 * y;
        s[3] += y2 * y2;
    }
    let nf = n as f64;
    let full = stats_of(central(nf, s[0], s[1], s[2], s[3]), nf);

    let m = nf - 1.0;
    let mut acc = [0.0; 4];
    let mut acc2 = [0.0; 4];
    for &x in xs {
        let y = x - shift;
        let y2 = y * y;
        let r = central(m, s[0] - y, s[1] - y2, s[2] - y2 * y, s[3] - y2 * y2);
        let t = stats_of(r, m);
        for k in 0..4 {
            acc[k] += t[k];
            acc2[k] += t[k] * t[k];
        }
    }
    let se = |k: usize| {
        let mean = acc[k] / nf;
        let var = (acc2[k] / nf - mean * mean).max(0.0);
        ((nf - 1.0) * var).sqrt()
    };
    Ok(Moments {
        n,
        mean: Estimate { value: full[0] + shift, se: se(0) },
        variance: Estimate { value: full[1], se: se(1) },
        skewness: Estimate { value: full[2], se: se(2) },
        excess_kurtosis: Estimate { value: full[3], se: se(3) },
    })
}

/// Sample mean with its classical standard error.
pub fn mean(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let mu = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Estimate { value: mu, se: (var / n).sqrt() }
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}
