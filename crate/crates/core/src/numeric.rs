//! Small numeric helpers shared across modules: libm-backed float functions,
//! compensated summation, and rigorous intervals.

/// Natural logarithm.
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// Exponential.
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// `x^y` for real exponents.
#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// Square root.
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// Absolute value.
#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// Kahan compensated accumulator. Summation order is the caller's contract;
/// every reduction in this crate feeds it in a fixed documented order so that
/// results are bit-reproducible.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Closed interval `[lo, hi]` used for certified tail sums and constants.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval endpoints out of order");
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// True when `other` lies inside `self` (used to assert bracket nesting).
    pub fn encloses(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

/// Ordinary least squares slope of `y` against `x`, with the largest absolute
/// residual of the fit. Returns `None` when fewer than two distinct abscissae
/// are present.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mut sx = KahanSum::new();
    let mut sy = KahanSum::new();
    for &(x, y) in points {
        sx.add(x);
        sy.add(y);
    }
    let mx = sx.value() / nf;
    let my = sy.value() / nf;
    let mut sxx = KahanSum::new();
    let mut sxy = KahanSum::new();
    for &(x, y) in points {
        sxx.add((x - mx) * (x - mx));
        sxy.add((x - mx) * (y - my));
    }
    if sxx.value() <= 0.0 {
        return None;
    }
    let slope = sxy.value() / sxx.value();
    let intercept = my - slope * mx;
    let mut max_resid = 0.0f64;
    for &(x, y) in points {
        let r = abs(y - (slope * x + intercept));
        if r > max_resid {
            max_resid = r;
        }
    }
    Some((slope, max_resid))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_matches_exact_small_sum() {
        let mut k = KahanSum::new();
        for _ in 0..10 {
            k.add(0.1);
        }
        assert!((k.value() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn slope_of_exact_line() {
        let pts: alloc::vec::Vec<(f64, f64)> =
            (1..=8).map(|i| (i as f64, 3.0 - 0.75 * i as f64)).collect();
        let (slope, resid) = least_squares_slope(&pts).unwrap();
        assert!((slope + 0.75).abs() < 1e-12);
        assert!(resid < 1e-12);
    }

    #[test]
    fn degenerate_abscissae_rejected() {
        let pts = [(1.0, 2.0), (1.0, 3.0)];
        assert!(least_squares_slope(&pts).is_none());
    }
}
