//! Small numerical helpers shared by the grid, moment and transform code.

use num_complex::Complex64;

/// Neumaier-compensated accumulator. Summation order is the caller's
/// iteration order, so results are reproducible bit for bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
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

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSumComplex {
    re: KahanSum,
    im: KahanSum,
}

impl KahanSumComplex {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn kahan_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = KahanSum::new();
    for x in iter {
        acc.add(x);
    }
    acc.value()
}

pub fn kahan_sum_complex<I: IntoIterator<Item = Complex64>>(iter: I) -> Complex64 {
    let mut acc = KahanSumComplex::new();
    for z in iter {
        acc.add(z);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut v = vec![1.0e16];
        v.extend(std::iter::repeat_n(1.0, 1000));
        v.push(-1.0e16);
        assert_eq!(kahan_sum(v.iter().copied()), 1000.0);
    }

    #[test]
    fn complex_sum() {
        let z = kahan_sum_complex((0..10).map(|k| Complex64::new(k as f64, -(k as f64))));
        assert_eq!(z, Complex64::new(45.0, -45.0));
    }
}
