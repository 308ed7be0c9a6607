//! Shape-preserving cubic Hermite interpolation.

/// Piecewise cubic Hermite interpolant through `(xs[i], ys[i])` whose node
/// slopes are limited so the curve is monotone on every cell where the data
/// are monotone.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// Fritsch-Butland slopes (weighted harmonic mean of neighbouring secants,
    /// zero at local extrema) with the usual one-sided end conditions.
    ///
    /// `xs` must be strictly increasing with at least two entries.
    pub fn pchip(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert_eq!(xs.len(), ys.len());
        let n = xs.len();
        assert!(n >= 2, "need at least two nodes");
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes.fill(delta[0]);
            return Self { xs, ys, slopes };
        }
        for k in 1..n - 1 {
            let (d0, d1) = (delta[k - 1], delta[k]);
            if d0 * d1 <= 0.0 {
                slopes[k] = 0.0;
            } else {
                let w1 = 2.0 * h[k] + h[k - 1];
                let w2 = h[k] + 2.0 * h[k - 1];
                slopes[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
            }
        }
        slopes[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        slopes[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        Self { xs, ys, slopes }
    }

    /// Hermite interpolant with caller-supplied node slopes, limited per
    /// Fritsch-Carlson so that each cell is monotone. Cells with a flat secant
    /// get zero slopes at both ends.
    pub fn with_slopes(xs: Vec<f64>, ys: Vec<f64>, mut slopes: Vec<f64>) -> Self {
        assert!(xs.len() == ys.len() && ys.len() == slopes.len());
        let n = xs.len();
        assert!(n >= 2, "need at least two nodes");
        for k in 0..n - 1 {
            let delta = (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]);
            if delta == 0.0 {
                slopes[k] = 0.0;
                slopes[k + 1] = 0.0;
                continue;
            }
            // Slopes of the wrong sign break monotonicity outright.
            if slopes[k] * delta < 0.0 {
                slopes[k] = 0.0;
            }
            if slopes[k + 1] * delta < 0.0 {
                slopes[k + 1] = 0.0;
            }
            let a = slopes[k] / delta;
            let b = slopes[k + 1] / delta;
            let r2 = a * a + b * b;
            if r2 > 9.0 {
                let tau = 3.0 / r2.sqrt();
                slopes[k] = tau * a * delta;
                slopes[k + 1] = tau * b * delta;
            }
        }
        Self { xs, ys, slopes }
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    fn cell(&self, x: f64) -> usize {
        let n = self.xs.len();
        self.xs.partition_point(|&xi| xi <= x).clamp(1, n - 1) - 1
    }

    /// Value at `x`. Outside the node range the end cubic is extended.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.cell(x);
        self.eval_in_cell(k, x)
    }

    /// Value at `x` using cell `k` (`xs[k] <= x <= xs[k+1]`).
    pub fn eval_in_cell(&self, k: usize, x: f64) -> f64 {
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        hermite(
            t,
            h,
            self.ys[k],
            self.ys[k + 1],
            self.slopes[k],
            self.slopes[k + 1],
        )
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let k = self.cell(x);
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let (y0, y1, d0, d1) = (
            self.ys[k],
            self.ys[k + 1],
            self.slopes[k],
            self.slopes[k + 1],
        );
        let t2 = t * t;
        (6.0 * t2 - 6.0 * t) / h * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) / h * y1
            + (3.0 * t2 - 2.0 * t) * d1
    }
}

/// Cubic Hermite basis evaluation on a cell of width `h` at local `t`.
#[inline]
pub(crate) fn hermite(t: f64, h: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_nodes_and_linear_data() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let p = MonotoneCubic::pchip(xs.clone(), ys.clone());
        for (x, y) in xs.iter().zip(&ys) {
            assert!((p.eval(*x) - y).abs() < 1e-14);
        }
        assert!((p.eval(1.05) - 1.1).abs() < 1e-14);
        assert!((p.derivative(1.05) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_data_converges() {
        let n = 1001;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin()).collect();
        let p = MonotoneCubic::pchip(xs, ys);
        let worst = (0..999)
            .map(|i| {
                let x = (i as f64 + 0.5) / 999.0;
                (p.eval(x) - (3.0 * x).sin()).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "worst {worst}");
    }

    #[test]
    fn flat_cells_stay_flat() {
        let xs = vec![0.0, 1.0, 2.0, 3.0];
        let ys = vec![0.0, 0.5, 0.5, 1.0];
        let p = MonotoneCubic::with_slopes(xs, ys, vec![1.0, 1.0, 1.0, 1.0]);
        for i in 0..=20 {
            let x = 1.0 + i as f64 / 20.0;
            assert_eq!(p.eval(x), 0.5);
        }
    }

    proptest! {
        #[test]
        fn monotone_data_gives_monotone_curve(steps in proptest::collection::vec(0.0f64..3.0, 3..40)) {
            let mut ys = vec![0.0];
            for s in &steps {
                ys.push(ys.last().unwrap() + s);
            }
            let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
            let p = MonotoneCubic::pchip(xs.clone(), ys.clone());
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=(xs.len() - 1) * 17 {
                let v = p.eval(i as f64 / 17.0);
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
