//! Streaming mean and variance.

/// Welford accumulator; partial results merge with Chan's update, so a fixed
/// merge order gives bit-identical results.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        let weight = other.count as f64 / total as f64;
        self.mean += delta * weight;
        self.m2 += other.m2 + delta * delta * self.count as f64 * weight;
        self.count = total;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Sample standard deviation over `√count`.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Standard error of the mean of `a − b` for paired samples.
pub fn paired_std_error(a: &[f64], b: &[f64]) -> f64 {
    let mut w = Welford::new();
    for (x, y) in a.iter().zip(b) {
        w.push(x - y);
    }
    w.std_error()
}

/// `√(se₁² + se₂²)`.
pub fn combined_std_error(se1: f64, se2: f64) -> f64 {
    se1.hypot(se2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_samples_have_zero_error() {
        let mut a = Welford::new();
        let mut b = Welford::new();
        for _ in 0..1000 {
            a.push(0.3);
            b.push(0.3);
        }
        a.merge(&b);
        assert_eq!(a.mean(), 0.3);
        assert_eq!(a.std_error(), 0.0);
    }

    #[test]
    fn known_values() {
        let mut w = Welford::new();
        for x in [1.0, 2.0, 3.0, 4.0] {
            w.push(x);
        }
        assert_eq!(w.mean(), 2.5);
        assert!((w.variance() - 5.0 / 3.0).abs() < 1e-15);
        assert!((w.std_error() - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(Welford::new().std_error(), 0.0);
        assert!((paired_std_error(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]) - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(combined_std_error(3.0, 4.0), 5.0);
    }

    proptest! {
        #[test]
        fn merge_matches_single_pass(xs in prop::collection::vec(-1e3f64..1e3, 1..200), split in 0usize..200) {
            let split = split.min(xs.len());
            let mut whole = Welford::new();
            xs.iter().for_each(|&x| whole.push(x));
            let mut left = Welford::new();
            let mut right = Welford::new();
            xs[..split].iter().for_each(|&x| left.push(x));
            xs[split..].iter().for_each(|&x| right.push(x));
            left.merge(&right);
            prop_assert_eq!(left.count(), whole.count());
            prop_assert!((left.mean() - whole.mean()).abs() <= 1e-9 * (1.0 + whole.mean().abs()));
            prop_assert!((left.variance() - whole.variance()).abs() <= 1e-7 * (1.0 + whole.variance()));
        }
    }
}
