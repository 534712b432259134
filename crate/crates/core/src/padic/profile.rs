//! The precision schedule `N1..N5`.

/// Working precisions for one run.
///
/// `N1`: digits needed for the final Weil polynomial coefficients.
/// `N2`: digits of the Frobenius matrix. `N3`: `x`-adic truncation of the
/// series. `N4`: `p`-adic truncation of the series. `N5`: digits carried by
/// the reduction rules.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionProfile {
    pub n1: u32,
    pub n2: u32,
    pub n3: u32,
    pub n4: u32,
    pub n5: u32,
    pub delta: u32,
    pub tau: u32,
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub preset: Preset,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Rigorous,
    Fast,
    Custom,
}

/// Upward bias for real logarithms; overestimating a precision is safe.
const BIAS: f64 = 1e-9;

fn log_p_up(p: u64, x: f64) -> f64 {
    let v = libm::log(x) / libm::log(p as f64);
    v + v.abs() * BIAS + BIAS
}

/// `floor(log_p m)` for an integer `m >= 1`, exactly.
pub fn floor_log(p: u64, m: u64) -> u32 {
    let mut k = 0;
    let mut pk = p as u128;
    while pk <= m as u128 {
        pk *= p as u128;
        k += 1;
    }
    k
}

/// The constant `tau(p)` of the denominator bound.
pub fn tau(p: u64) -> u32 {
    match p {
        3 => 5,
        5 => 3,
        7 | 11 | 13 => 1,
        _ => 0,
    }
}

impl PrecisionProfile {
    /// The full schedule.
    pub fn rigorous(p: u64, n: usize) -> Self {
        let n = n as u32;
        let tau = tau(p);
        let delta = 11 * (floor_log(p, 63) + tau);
        let n1 = floor_log(p, 30) + 2 * n + 1;
        let c1 = 6.0 + log_p_up(p, 80.0) + delta as f64;
        let c = libm::floor(c1 + log_p_up(p, c1 + log_p_up(p, 2.0 * c1))) + 1.0;
        let n2 = n1 + (6 * n - 1) * c as u32;
        let c2 = c1 + n2 as f64;
        let inner = c2 + log_p_up(p, 2.0 * c2);
        let n3 = libm::floor(16.0 * p as f64 * inner) as u32 + 1;
        let n4 = libm::floor(n2 as f64 + c1 + log_p_up(p, inner)) as u32 + 1;
        let n5 = n4 + 8 * floor_log(p, n3 as u64) + 14;
        PrecisionProfile { n1, n2, n3, n4, n5, delta, tau, c, c1, c2, preset: Preset::Rigorous }
    }

    /// Small preset for tests and quick runs: `N4 = 2n + 6`,
    /// `N3 = 16p(N4 + 2)`, `N5 = N4 + 8 floor(log_p N3) + 14`, `N2 = N1`.
    pub fn fast(p: u64, n: usize) -> Self {
        let n4 = 2 * n as u32 + 6;
        let n3 = 16 * p as u32 * (n4 + 2);
        let n5 = n4 + 8 * floor_log(p, n3 as u64) + 14;
        let mut prof = Self::custom(p, n, n3, n4, n5);
        prof.preset = Preset::Fast;
        prof
    }

    /// Explicit `N3, N4, N5`; `N1` from the schedule and `N2 = N1`.
    pub fn custom(p: u64, n: usize, n3: u32, n4: u32, n5: u32) -> Self {
        let base = Self::rigorous(p, n);
        PrecisionProfile { n2: base.n1, n3, n4, n5, preset: Preset::Custom, ..base }
    }

    /// Checks the ordering invariants.
    pub fn validate(&self) -> Result<(), alloc::string::String> {
        if self.n3 == 0 || self.n4 == 0 {
            return Err("N3 and N4 must be positive".into());
        }
        if self.n5 < self.n4 {
            return Err(alloc::format!("N5 = {} must be at least N4 = {}", self.n5, self.n4));
        }
        if self.n4 < self.n2 {
            return Err(alloc::format!("N4 = {} must be at least N2 = {}", self.n4, self.n2));
        }
        if self.n2 < self.n1 {
            return Err("N2 must be at least N1".into());
        }
        Ok(())
    }
}

/// The instance `d = 4p` of the Newton convergence schedule:
/// `delta_j = (4j + 1) d` and `Delta_{i,j} = (i + 4j) d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvergenceSchedule {
    pub d: u64,
}

impl ConvergenceSchedule {
    pub fn for_prime(p: u64) -> Self {
        ConvergenceSchedule { d: 4 * p }
    }

    pub fn delta(&self, j: u64) -> u64 {
        (4 * j + 1) * self.d
    }

    pub fn big_delta(&self, i: u64, j: u64) -> u64 {
        (i + 4 * j) * self.d
    }

    /// Degree bound `d_k = (k + 1) d` on the coefficients of `Z^k`.
    pub fn degree_bound(&self, k: u64) -> u64 {
        (k + 1) * self.d
    }

    /// Checks the four schedule conditions for `i, j, k` up to `limit`.
    pub fn check_conditions(&self, limit: u64) -> bool {
        for n in 1..=limit {
            for j in 0..=limit {
                let rhs = (0..=j).map(|l| self.big_delta(n, j - l) + self.delta(l)).max().unwrap();
                if self.big_delta(n + 1, j) < rhs {
                    return false;
                }
            }
        }
        if self.delta(0) < self.degree_bound(0) {
            return false;
        }
        for j in 1..=limit {
            if self.delta(j) - self.delta(j - 1) < self.degree_bound(1) {
                return false;
            }
        }
        for k in 2..=limit {
            for j in 0..=limit {
                if self.delta(k - 1 + j) < self.big_delta(k, j) + self.degree_bound(k) {
                    return false;
                }
            }
        }
        (1..=limit).all(|n| self.big_delta(1, n) == self.delta(n))
    }
}
