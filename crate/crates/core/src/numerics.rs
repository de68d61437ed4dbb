//! Small numerical utilities shared by the diagnostics: deterministic
//! compensated summation and least-squares rate fitting.

/// Neumaier-compensated accumulator.
///
/// Summation order is the iteration order, so any fixed-order reduction
/// over a field is bit-reproducible across runs and thread counts.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Least-squares slope of `log(y)` against `log(x)`.
///
/// Returns `None` when fewer than two points are given or any value is
/// non-positive.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// Quintic smoothstep `6t^5 - 15t^4 + 10t^3`, clamped to `[0, 1]`.
#[inline]
pub fn smoothstep5(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (t * (6.0 * t - 15.0) + 10.0)
    }
}

/// Trapezoidal cumulative integral of samples `y` at abscissae `t`.
pub fn cumulative_trapezoid(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = CompensatedSum::new();
    for k in 0..t.len() {
        if k > 0 {
            acc.add(0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]));
        }
        out.push(acc.value());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let vals = [1.0, 1e-16, 1e-16, 1e-16, -1.0];
        assert!((sum(vals) - 3e-16).abs() < 1e-30);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [0.1, 0.05, 0.025, 0.0125];
        let y: Vec<f64> = x.iter().map(|h: &f64| 3.0 * h.powf(1.7)).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 1.7).abs() < 1e-12);
        assert!(loglog_slope(&x[..1], &y[..1]).is_none());
        assert!(loglog_slope(&x, &[1.0, 0.0, 1.0, 1.0]).is_none());
    }

    #[test]
    fn smoothstep_endpoints() {
        assert_eq!(smoothstep5(-1.0), 0.0);
        assert_eq!(smoothstep5(0.0), 0.0);
        assert_eq!(smoothstep5(1.0), 1.0);
        assert!((smoothstep5(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_of_linear() {
        let t = [0.0, 0.5, 1.0];
        let y = [0.0, 1.0, 2.0];
        assert_eq!(cumulative_trapezoid(&t, &y), vec![0.0, 0.25, 1.0]);
    }
}
