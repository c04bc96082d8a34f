//! Monotone logistic remapping before RMSE.
//!
//! The fitted family is `f(x) = a + b * tanh(c * u)` with `u` the
//! standardized `x` and `c >= 0`; `c -> 0` recovers the affine fit, which is
//! included as a candidate. For fixed `c` the best `(a, b)` is an ordinary
//! least-squares line, so only `c` is searched: a log-spaced grid, then
//! golden-section refinement around the best grid point.

use super::corr::plcc;
use crate::error::Result;

fn line_rss(z: &[f64], y: &[f64]) -> f64 {
    let n = z.len() as f64;
    let mz = z.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut szz, mut szy) = (0.0, 0.0);
    for (a, b) in z.iter().zip(y) {
        szz += (a - mz) * (a - mz);
        szy += (a - mz) * (b - my);
    }
    let slope = if szz > 0.0 { szy / szz } else { 0.0 };
    z.iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (my + slope * (a - mz));
            r * r
        })
        .sum()
}

fn rss_at(c: f64, u: &[f64], y: &[f64]) -> f64 {
    if c == 0.0 {
        return line_rss(u, y);
    }
    let z: Vec<f64> = u.iter().map(|v| (c * v).tanh()).collect();
    line_rss(&z, y)
}

/// RMSE of `y` against the best monotone logistic function of `x`.
pub fn rmse_after_fit(x: &[f64], y: &[f64]) -> Result<f64> {
    plcc(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let sx = (x.iter().map(|v| (v - mx).powi(2)).sum::<f64>() / n).sqrt();
    let u: Vec<f64> = x.iter().map(|v| (v - mx) / sx).collect();

    let grid: Vec<f64> = std::iter::once(0.0)
        .chain((-12..=12).map(|k| 2f64.powf(k as f64 / 2.0)))
        .collect();
    let scores: Vec<f64> = grid.iter().map(|&c| rss_at(c, &u, y)).collect();
    let (best, mut best_rss) = scores.iter().enumerate().fold(
        (0, f64::INFINITY),
        |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc },
    );

    if best > 0 {
        let lo = grid[best - 1].max(grid[1] / 2.0).ln();
        let hi = grid.get(best + 1).copied().unwrap_or(grid[best] * 2.0).ln();
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (lo, hi);
        let mut c1 = b - phi * (b - a);
        let mut c2 = a + phi * (b - a);
        let mut f1 = rss_at(c1.exp(), &u, y);
        let mut f2 = rss_at(c2.exp(), &u, y);
        for _ in 0..60 {
            if f1 < f2 {
                b = c2;
                c2 = c1;
                f2 = f1;
                c1 = b - phi * (b - a);
                f1 = rss_at(c1.exp(), &u, y);
            } else {
                a = c1;
                c1 = c2;
                f1 = f2;
                c2 = a + phi * (b - a);
                f2 = rss_at(c2.exp(), &u, y);
            }
        }
        best_rss = best_rss.min(f1).min(f2);
    }
    Ok((best_rss.max(0.0) / n).sqrt())
}
