//! Work limits shared by every operation that can blow up.
//!
//! The defaults are sized so that every table row and sweep in the test
//! suite fits; long scans can raise them.

/// Effort limits. `Budget::default()` is what the library and CLI use unless
/// overridden.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Largest |D| for which reduced forms are enumerated.
    pub class_group_max_abs_d: u64,
    /// Largest conductor |D| for generalized Bernoulli numbers.
    pub lvalue_max_abs_d: u64,
    /// Largest index n for generalized Bernoulli numbers.
    pub lvalue_max_n: u64,
    /// Largest index for the Bernoulli cache.
    pub bernoulli_max_n: u64,
    /// Bit length cap on 4p^s when solving for a principal generator.
    pub generator_max_bits: u64,
    /// Pollard rho iteration cap per composite cofactor.
    pub factor_rho_iterations: u64,
    /// Largest |D| visited when searching for a D0.
    pub search_max_abs_d: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            class_group_max_abs_d: 16_000_000_000,
            lvalue_max_abs_d: 20_000_000,
            lvalue_max_n: 50,
            bernoulli_max_n: 10_000,
            generator_max_bits: 126,
            factor_rho_iterations: 1 << 22,
            search_max_abs_d: 10_000_000,
        }
    }
}

impl Budget {
    /// Budget with the L-value index cap lifted to `n`.
    pub fn with_lvalue_max_n(mut self, n: u64) -> Self {
        self.lvalue_max_n = n;
        self
    }

    pub fn with_generator_max_bits(mut self, bits: u64) -> Self {
        self.generator_max_bits = bits;
        self
    }

    pub fn with_class_group_max_abs_d(mut self, d: u64) -> Self {
        self.class_group_max_abs_d = d;
        self
    }
}
