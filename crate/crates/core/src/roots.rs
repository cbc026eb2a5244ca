use num_complex::Complex64;

/// Precomputed n-th roots of unity, `omega_n^k = exp(2 pi i k / n)`.
#[derive(Debug, Clone)]
pub struct RootTable {
    n: u64,
    table: Vec<Complex64>,
}

impl RootTable {
    pub fn new(n: u64) -> Self {
        assert!(n > 0);
        let table = (0..n)
            .map(|k| {
                let (s, c) = (std::f64::consts::TAU * k as f64 / n as f64).sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        RootTable { n, table }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn pow(&self, k: u64) -> Complex64 {
        self.table[(k % self.n) as usize]
    }

    /// `omega_n^{-k}`.
    #[inline]
    pub fn pow_neg(&self, k: u64) -> Complex64 {
        self.table[((self.n - k % self.n) % self.n) as usize]
    }
}
