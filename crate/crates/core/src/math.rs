//! Small numeric helpers shared by every module.

/// `−x·log2(x)` with the convention `0·log 0 = 0`.
///
/// Inputs below [`ZERO_FLOOR`] count as exact zeros.
#[inline]
pub fn neg_x_log2_x(x: f64) -> f64 {
    if x <= ZERO_FLOOR {
        0.0
    } else {
        -x * libm::log2(x)
    }
}

/// Probabilities at or below this value are treated as exact zeros when
/// evaluating entropy.
pub const ZERO_FLOOR: f64 = 1e-15;

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl core::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of an iterator of `f64`.
pub fn sum(iter: impl IntoIterator<Item = f64>) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// `floor(x)`, except that values within a relative `1e-9` of the next
/// integer snap up to it. Guards index computations such as `⌊π/p̂⌋` against
/// floating-point drift just below an exact integer.
pub fn snapped_floor(x: f64) -> f64 {
    let r = libm::round(x);
    if libm::fabs(x - r) <= 1e-9 * libm::fmax(1.0, libm::fabs(x)) {
        r
    } else {
        libm::floor(x)
    }
}

/// `ceil(x)` with the same integer snapping as [`snapped_floor`].
pub fn snapped_ceil(x: f64) -> f64 {
    let r = libm::round(x);
    if libm::fabs(x - r) <= 1e-9 * libm::fmax(1.0, libm::fabs(x)) {
        r
    } else {
        libm::ceil(x)
    }
}

/// Binomial coefficient `C(n, k)`, or `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// Multiset coefficient `((n k)) = C(n + k − 1, k)`.
pub fn multichoose(n: u64, k: u64) -> Option<u128> {
    if n == 0 {
        return Some(if k == 0 { 1 } else { 0 });
    }
    binomial(n.checked_add(k)? - 1, k)
}

/// `k!` as a float; exact for `k ≤ 18`.
pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}
