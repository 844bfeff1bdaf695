//! Small sample-statistics helpers shared by the Monte Carlo estimators.

/// Running first and second central moments (Welford).
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        (self.variance() / self.n as f64).sqrt()
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// `Var(x)/Mean(x)²` with a delta-method standard error.
///
/// Returns `None` when the mean is zero or there are fewer than three samples.
pub fn normalized_variance(xs: &[f64]) -> Option<(f64, f64)> {
    let m: Moments = xs.iter().copied().collect();
    let n = xs.len();
    if n < 3 || m.mean() == 0.0 {
        return None;
    }
    let mean = m.mean();
    let var = m.variance();
    let nv = var / (mean * mean);
    // Influence function of var/mean² at the empirical distribution.
    let infl: Moments = xs
        .iter()
        .map(|&x| {
            let d = x - mean;
            (d * d - var) / (mean * mean) - 2.0 * var * d / (mean * mean * mean)
        })
        .collect();
    Some((nv, infl.variance().sqrt() / (n as f64).sqrt()))
}
