//! Expectation and variance of prime counts in short intervals, for
//! quadratic fields (boxes under the sup norm) and for the integers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::primes::{build_grid, PrefixGrid};
use crate::singular::residue_rk;

/// How the centers `x` with `||x|| <= X` are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Sampler {
    /// Every integer point of `[-X, X]^2`.
    Exhaustive,
    /// `q x q` strata per unit cell of `[-X, X)^2`, one uniform point in each.
    StratifiedJitter { q: u32, seed: u64 },
}

impl Sampler {
    pub fn name(&self) -> &'static str {
        match self {
            Sampler::Exhaustive => "exhaustive",
            Sampler::StratifiedJitter { .. } => "stratified-jitter",
        }
    }

    pub fn sample_count(&self, x: i64) -> u64 {
        match *self {
            Sampler::Exhaustive => ((2 * x + 1) as u64).pow(2),
            Sampler::StratifiedJitter { q, .. } => ((2 * x) as u64 * q as u64).pow(2),
        }
    }
}

/// Running sums over sampled centers.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub sum_count: f64,
    pub sum_count_sq: f64,
    pub sum_count_weight: f64,
    pub sum_weight: f64,
    pub sum_weight_sq: f64,
    /// `sum (count - weight/r)^2`, accumulated directly.
    pub sum_deviation_sq: f64,
}

impl Moments {
    fn push(&mut self, count: f64, weight: f64, inv_r: f64) {
        self.n += 1;
        self.sum_count += count;
        self.sum_count_sq += count * count;
        self.sum_count_weight += count * weight;
        self.sum_weight += weight;
        self.sum_weight_sq += weight * weight;
        let dev = count - weight * inv_r;
        self.sum_deviation_sq += dev * dev;
    }

    fn merge(&mut self, other: &Moments) {
        self.n += other.n;
        self.sum_count += other.sum_count;
        self.sum_count_sq += other.sum_count_sq;
        self.sum_count_weight += other.sum_count_weight;
        self.sum_weight += other.sum_weight;
        self.sum_weight_sq += other.sum_weight_sq;
        self.sum_deviation_sq += other.sum_deviation_sq;
    }

    pub fn expectation(&self) -> f64 {
        self.sum_count / self.n as f64
    }

    pub fn variance(&self) -> f64 {
        self.sum_deviation_sq / self.n as f64
    }

    /// The variance from the expanded square, for cross-checking.
    pub fn variance_expanded(&self, residue: f64) -> f64 {
        let n = self.n as f64;
        self.sum_count_sq / n - 2.0 * self.sum_count_weight / (n * residue)
            + self.sum_weight_sq / (n * residue * residue)
    }
}

fn check_extent(grid: &PrefixGrid, x: i64, height: f64) -> Result<()> {
    if x < 0 || !(height >= 0.0) {
        return Err(Error::InvalidArgument(format!("need X >= 0 and H >= 0, got X={x} H={height}")));
    }
    // jittered centers reach X, so the box reaches floor(X + H)
    let reach = (x as f64 + height).floor() as i64;
    if reach > grid.extent() {
        return Err(Error::OutOfExtent {
            lo: -reach,
            hi: reach,
            extent: grid.extent(),
        });
    }
    Ok(())
}

/// Accumulates counts and weights of the boxes `||m - x|| <= H` over the
/// centers chosen by `sampler`. Rows of centers are processed independently
/// and merged in row order.
pub fn sample_moments(grid: &PrefixGrid, x: i64, height: f64, sampler: Sampler, residue: f64) -> Result<Moments> {
    check_extent(grid, x, height)?;
    let inv_r = 1.0 / residue;
    let rows: Vec<Moments> = match sampler {
        Sampler::Exhaustive => {
            let h = height.floor() as i64;
            (-x..=x)
                .into_par_iter()
                .map(|c2| {
                    let mut m = Moments::default();
                    for c1 in -x..=x {
                        let count = grid.rect_count(c1 - h, c1 + h, c2 - h, c2 + h) as f64;
                        let weight = grid.rect_weight(c1 - h, c1 + h, c2 - h, c2 + h);
                        m.push(count, weight, inv_r);
                    }
                    m
                })
                .collect()
        }
        Sampler::StratifiedJitter { q, seed } => {
            if q == 0 {
                return Err(Error::InvalidArgument("jitter needs q >= 1".into()));
            }
            let q_f = q as f64;
            // one stream per row of strata keeps results independent of scheduling
            let strata_rows = 2 * x * q as i64;
            (0..strata_rows)
                .into_par_iter()
                .map(|row| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(row as u64);
                    let mut m = Moments::default();
                    let y0 = -x as f64 + row as f64 / q_f;
                    for col in 0..strata_rows {
                        let x0 = -x as f64 + col as f64 / q_f;
                        let cx = x0 + rng.gen::<f64>() / q_f;
                        let cy = y0 + rng.gen::<f64>() / q_f;
                        let lo1 = (cx - height).ceil() as i64;
                        let hi1 = (cx + height).floor() as i64;
                        let lo2 = (cy - height).ceil() as i64;
                        let hi2 = (cy + height).floor() as i64;
                        let (count, weight) = if lo1 > hi1 || lo2 > hi2 {
                            (0.0, 0.0)
                        } else {
                            (
                                grid.rect_count(lo1, hi1, lo2, hi2) as f64,
                                grid.rect_weight(lo1, hi1, lo2, hi2),
                            )
                        };
                        m.push(count, weight, inv_r);
                    }
                    m
                })
                .collect()
        }
    };
    let mut total = Moments::default();
    for r in &rows {
        total.merge(r);
    }
    Ok(total)
}

/// `E_K(X; H)`, the mean prime count over sampled centers.
#[allow(non_snake_case)]
pub fn expectation_E(grid: &PrefixGrid, x: i64, height: f64, sampler: Sampler) -> Result<f64> {
    Ok(sample_moments(grid, x, height, sampler, 1.0)?.expectation())
}

/// The asymptotic expectation `vol(B_H) / (r_K log vol(B_X)) = (2H)^2 / (r_K log (2X)^2)`.
pub fn expectation_reference(x: f64, height: f64, residue: f64) -> f64 {
    (2.0 * height).powi(2) / (residue * (2.0 * x).powi(2).ln())
}

/// `V_K(X; H)`, the mean of `(pi_K - r_K^{-1} sum 1/log|N|)^2`.
#[allow(non_snake_case)]
pub fn variance_V(grid: &PrefixGrid, x: i64, height: f64, sampler: Sampler, residue: f64) -> Result<f64> {
    Ok(sample_moments(grid, x, height, sampler, residue)?.variance())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceRow {
    pub field: String,
    #[serde(rename = "X")]
    pub x: i64,
    pub delta: f64,
    #[serde(rename = "H")]
    pub height: f64,
    pub n_samples: u64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub ratio: f64,
    pub target: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VarianceProfile {
    pub rows: Vec<VarianceRow>,
    pub residue: f64,
    pub residue_error: f64,
    pub grid_extent: i64,
}

/// Rows of `V/E` against `1 - delta` for `H = X^delta`, all from one grid.
pub fn variance_profile(field: &FieldSpec, x: i64, deltas: &[f64], sampler: Sampler) -> Result<VarianceProfile> {
    if let Some(d) = deltas.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {d}")));
    }
    if x < 1 {
        return Err(Error::InvalidArgument(format!("X must be at least 1, got {x}")));
    }
    let top = deltas.iter().cloned().fold(0.0, f64::max);
    let extent = x + (x as f64).powf(top).ceil() as i64 + 2;
    let grid = build_grid(field, extent)?;
    let residue = residue_rk(field, 1e-8)?;
    let rows = variance_rows(&grid, x, deltas, sampler, residue.value)?;
    Ok(VarianceProfile {
        rows,
        residue: residue.value,
        residue_error: residue.error_bound,
        grid_extent: extent,
    })
}

pub fn variance_rows(grid: &PrefixGrid, x: i64, deltas: &[f64], sampler: Sampler, residue: f64) -> Result<Vec<VarianceRow>> {
    deltas
        .iter()
        .map(|&delta| {
            let height = (x as f64).powf(delta);
            let m = sample_moments(grid, x, height, sampler, residue)?;
            let (e, v) = (m.expectation(), m.variance());
            Ok(VarianceRow {
                field: grid.field().label(),
                x,
                delta,
                height,
                n_samples: m.n,
                e,
                v,
                ratio: v / e,
                target: 1.0 - delta,
            })
        })
        .collect()
}

/// Prefix tables on `0..=n` for the integer baseline.
struct IntegerTables {
    prime_count: Vec<u32>,
    log_weight: Vec<f64>,
    psi: Vec<f64>,
}

impl IntegerTables {
    fn new(n: usize) -> Self {
        let spf = arith::smallest_prime_factors(n);
        let mut prime_count = vec![0u32; n + 1];
        let mut log_weight = vec![0.0f64; n + 1];
        let mut psi = vec![0.0f64; n + 1];
        for m in 2..=n {
            let p = spf[m] as usize;
            let prime = p == m;
            prime_count[m] = prime_count[m - 1] + prime as u32;
            log_weight[m] = log_weight[m - 1] + 1.0 / (m as f64).ln();
            // Lambda(m) = log p when m is a power of its least prime
            let mut r = m;
            while r % p == 0 {
                r /= p;
            }
            psi[m] = psi[m - 1] + if r == 1 { (p as f64).ln() } else { 0.0 };
        }
        IntegerTables {
            prime_count,
            log_weight,
            psi,
        }
    }
}

fn check_integer_args(x: u64, height: u64) -> Result<()> {
    if x < 2 {
        return Err(Error::InvalidArgument(format!("X must be at least 2, got {x}")));
    }
    if x + height > 400_000_000 {
        return Err(Error::budget("integer baseline sieve", (x + height) as u128, 400_000_000));
    }
    Ok(())
}

/// Exact averages over `x in [0, X)` for integer `H`, where the integrands
/// are constant on each `[k, k+1)`. Returns `(E_N, V_N, V_Lambda)`.
pub fn integer_statistics(x: u64, height: u64) -> Result<(f64, f64, f64)> {
    check_integer_args(x, height)?;
    let t = IntegerTables::new((x + height) as usize);
    let h = height as usize;
    let (mut e, mut v, mut vl) = (0.0, 0.0, 0.0);
    for k in 0..x as usize {
        let count = (t.prime_count[k + h] - t.prime_count[k]) as f64;
        let weight = t.log_weight[k + h] - t.log_weight[k];
        let lam = t.psi[k + h] - t.psi[k] - height as f64;
        e += count;
        v += (count - weight) * (count - weight);
        vl += lam * lam;
    }
    let n = x as f64;
    Ok((e / n, v / n, vl / n))
}

/// `V_N(X; H)`.
pub fn variance_rational_prime(x: u64, height: u64) -> Result<f64> {
    Ok(integer_statistics(x, height)?.1)
}

/// `E_N(X; H)`.
pub fn expectation_rational(x: u64, height: u64) -> Result<f64> {
    Ok(integer_statistics(x, height)?.0)
}

/// `(1/X) sum_k (psi(k+H) - psi(k) - H)^2`.
pub fn variance_rational_lambda(x: u64, height: u64) -> Result<f64> {
    Ok(integer_statistics(x, height)?.2)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZBaselineRow {
    #[serde(rename = "X")]
    pub x: u64,
    #[serde(rename = "H")]
    pub height: u64,
    pub delta: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub v_prime: f64,
    pub v_lambda: f64,
    /// `V_N / ((1 - delta) E_N)`.
    pub ratio_prime: f64,
    /// `V_Lambda / (H (log X - log H))`.
    pub ratio_lambda: f64,
    /// `|sqrt(V_Lambda)/log X - sqrt(V_N)| / sqrt(V_N)`.
    pub relative_gap: f64,
}

/// The integer baseline at `H = floor(X^delta)`.
pub fn z_baseline(x: u64, delta: f64) -> Result<ZBaselineRow> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
    }
    let height = (x as f64).powf(delta).floor() as u64;
    let (e, v_prime, v_lambda) = integer_statistics(x, height)?;
    let (lx, lh) = ((x as f64).ln(), (height as f64).ln());
    Ok(ZBaselineRow {
        x,
        height,
        delta,
        e,
        v_prime,
        v_lambda,
        ratio_prime: v_prime / ((1.0 - delta) * e),
        ratio_lambda: v_lambda / (height as f64 * (lx - lh)),
        relative_gap: (v_lambda.sqrt() / lx - v_prime.sqrt()).abs() / v_prime.sqrt(),
    })
}

/// `1/k` if `n = p^k` with `k >= 2`, else 0.
fn prime_power_weight(n: u64) -> f64 {
    if n < 4 {
        return 0.0;
    }
    let mut p = 2;
    while p * p <= n && n % p != 0 {
        p += 1;
    }
    if n % p != 0 {
        return 0.0;
    }
    let (mut r, mut k) = (n, 0u32);
    while r % p == 0 {
        r /= p;
        k += 1;
    }
    if r == 1 && k >= 2 {
        1.0 / k as f64
    } else {
        0.0
    }
}

/// `sum over x < p^k <= x + H, k >= 2, of 1/k`.
pub fn prime_power_correction(x: u64, height: u64) -> f64 {
    (x + 1..=x + height).map(prime_power_weight).sum()
}

/// `max over 1 <= x <= X of correction(x, H) / (H x^{-1/2})`.
pub fn prime_power_constant(x_max: u64, height: u64) -> Result<f64> {
    check_integer_args(x_max, height)?;
    let n = (x_max + height) as usize;
    let spf = arith::smallest_prime_factors(n);
    let mut prefix = vec![0.0f64; n + 1];
    for m in 2..=n {
        let p = spf[m] as usize;
        let (mut r, mut k) = (m, 0u32);
        while r % p == 0 {
            r /= p;
            k += 1;
        }
        prefix[m] = prefix[m - 1] + if r == 1 && k >= 2 { 1.0 / k as f64 } else { 0.0 };
    }
    let h = height as usize;
    Ok((1..=x_max as usize)
        .map(|x| (prefix[x + h] - prefix[x]) / (height as f64 / (x as f64).sqrt()))
        .fold(0.0, f64::max))
}
