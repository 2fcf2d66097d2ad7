//! Singular series over quadratic fields and over the integers, the residue
//! of the Dedekind zeta function, and the smoothed sums built from them.
//!
//! Both the per-element path and the box sieve evaluate the truncated Euler
//! product as `B(P) * prod corr(p)`, where `B(P)` is the product of the
//! generic factors `(1 - 2/Np)/(1 - 1/Np)^2` and `corr(p)` switches one factor
//! to `(1 - 1/Np)/(1 - 1/Np)^2` for each prime ideal containing the shift.
//! Corrections are applied in ascending `(norm, p, root)` order in both
//! paths, so the sieve reproduces the per-element value bit for bit.

use rayon::prelude::*;

use crate::arith;
use crate::error::{Error, Result};
use crate::field::{FieldSpec, QuadInt};
use crate::ideals::{enumerate_prime_ideals, for_each_squarefree, PrimeIdeal};
use crate::smoothing::TestFunction;

/// Largest Euler-product cutoff accepted (one byte of sieve per integer).
pub const MAX_CUTOFF: u64 = 400_000_000;

/// Largest sieved box, in entries.
pub const MAX_BOX_ENTRIES: u128 = 100_000_000;

/// Largest number of series terms `residue_rk` will sum.
pub const MAX_RESIDUE_TERMS: u128 = 10_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidueValue {
    pub value: f64,
    pub error_bound: f64,
    pub method: &'static str,
    pub terms: u64,
}

/// `Res_{s=1} zeta_K(s) = L(1, chi_d)` by summing whole periods of the
/// Kronecker character, with the tail replaced by its mean-value part.
///
/// With `S(n)` the partial sums of `chi` and `s` their mean over a period,
/// `sum_{n>N} chi(n)/n = s/(N+1) + sum_{n>N} (S(n) - s)/(n(n+1))` for `N` a
/// multiple of the period, and a second summation by parts bounds the last
/// sum by `M/((N+1)(N+2))` where `M` is the largest partial sum of `S - s`.
pub fn residue_rk(field: &FieldSpec, tol: f64) -> Result<ResidueValue> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let d = field.discriminant();
    let q = d.unsigned_abs();
    let chi: Vec<i8> = (0..q)
        .map(|n| if n == 0 { 0 } else { arith::kronecker(d, n) as i8 })
        .collect();

    let mut s = 0i64;
    let mut partial = Vec::with_capacity(q as usize);
    for n in 1..=q {
        s += chi[(n % q) as usize] as i64;
        partial.push(s as f64);
    }
    debug_assert_eq!(s, 0);
    let mean = partial.iter().sum::<f64>() / q as f64;
    let mut t = 0.0f64;
    let mut m = 0.0f64;
    for &sn in &partial {
        t += sn - mean;
        m = m.max(t.abs());
    }
    // room for the rounding of the dropped part
    let m = m + 1e-9 * q as f64;

    // naive summation inside a block of q terms, compensated across blocks
    let rounding = |n: f64| f64::EPSILON * (q as f64 + 2.0) * (1.0 + n.ln());
    let mut periods: u64 = 1;
    loop {
        let n = (periods * q) as f64;
        let bound = m / ((n + 1.0) * (n + 2.0)) + rounding(n);
        if bound <= tol {
            break;
        }
        if rounding(n) > tol / 2.0 {
            return Err(Error::budget(
                "residue tolerance below rounding floor",
                (periods * q) as u128,
                MAX_RESIDUE_TERMS,
            ));
        }
        // the truncation term scales as 1/N^2
        let want = ((2.0 * m / tol).sqrt() / q as f64).ceil() as u64;
        periods = want.max(periods * 2);
        if (periods as u128) * (q as u128) > MAX_RESIDUE_TERMS {
            return Err(Error::budget("residue series terms", periods as u128 * q as u128, MAX_RESIDUE_TERMS));
        }
    }

    let terms = periods * q;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for block in 0..periods {
        let offset = block * q;
        let mut block_sum = 0.0f64;
        for r in 1..q {
            let c = chi[r as usize];
            if c != 0 {
                block_sum += c as f64 / (offset + r) as f64;
            }
        }
        // Neumaier summation across blocks
        let next = sum + block_sum;
        if sum.abs() >= block_sum.abs() {
            comp += (sum - next) + block_sum;
        } else {
            comp += (block_sum - next) + sum;
        }
        sum = next;
    }
    let n = terms as f64;
    let value = sum + comp + mean / (n + 1.0);
    let error_bound = m / ((n + 1.0) * (n + 2.0)) + rounding(n);
    Ok(ResidueValue {
        value,
        error_bound,
        method: "kronecker-series-abel2",
        terms,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularValue {
    pub value: f64,
    pub cutoff: u64,
    /// The untruncated product lies in `value * [1 - tail_bound, 1 + tail_bound]`.
    pub tail_bound: f64,
}

/// Multiplicative tail bound for a shift of absolute norm `norm_abs`.
///
/// Factors above `P` for prime ideals not containing the shift lie in
/// `[1 - 1/(N-1)^2, 1]`; at most two prime ideals share a norm, so their
/// product is at least `1 - 2/(P-1)`. At most `log|N eta| / log(P+1)` prime
/// ideals above `P` contain the shift, each contributing at most `1 + 1/P`.
fn tail_bound(cutoff: u64, norm_abs: f64) -> f64 {
    let p = cutoff as f64;
    let lower = 2.0 / (p - 1.0);
    let k = if norm_abs > p { (norm_abs.ln() / (p + 1.0).ln()).floor() } else { 0.0 };
    let upper = (1.0 + 1.0 / p).powf(k) - 1.0;
    lower.max(upper)
}

/// Generic and corrected local factors; `(1 - nu/N)/(1 - 1/N)^2`.
fn local_factor(norm: u64, nu: u32) -> f64 {
    let n = norm as f64;
    (1.0 - nu as f64 / n) / ((1.0 - 1.0 / n) * (1.0 - 1.0 / n))
}

/// Truncated singular series of one field at one cutoff.
#[derive(Clone, Debug)]
pub struct SingularSeries {
    field: FieldSpec,
    cutoff: u64,
    ideals: Vec<PrimeIdeal>,
    corrections: Vec<f64>,
    base: f64,
}

impl SingularSeries {
    pub fn new(field: &FieldSpec, cutoff: u64) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::InvalidArgument(format!("cutoff must be at least 2, got {cutoff}")));
        }
        if cutoff > MAX_CUTOFF {
            return Err(Error::budget("Euler product cutoff", cutoff as u128, MAX_CUTOFF as u128));
        }
        let ideals = enumerate_prime_ideals(field, cutoff);
        let mut base = 1.0f64;
        let mut corrections = Vec::with_capacity(ideals.len());
        for q in &ideals {
            if q.norm() == 2 {
                corrections.push(2.0);
            } else {
                base *= local_factor(q.norm(), 2);
                corrections.push(local_factor(q.norm(), 1) / local_factor(q.norm(), 2));
            }
        }
        Ok(SingularSeries {
            field: *field,
            cutoff,
            ideals,
            corrections,
            base,
        })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn ideals(&self) -> &[PrimeIdeal] {
        &self.ideals
    }

    /// Product of the generic factors over prime ideals of norm `3..=P`.
    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn eval(&self, eta: &QuadInt) -> Result<SingularValue> {
        if eta.field() != self.field {
            return Err(Error::FieldMismatch(eta.field().label(), self.field.label()));
        }
        if eta.is_zero() {
            return Err(Error::ZeroShift);
        }
        let norm_abs = eta.norm()?.unsigned_abs();
        Ok(SingularValue {
            value: self.value_with_norm(eta.k1, eta.k2, norm_abs),
            cutoff: self.cutoff,
            tail_bound: tail_bound(self.cutoff, norm_abs as f64),
        })
    }

    fn value_with_norm(&self, k1: i64, k2: i64, norm_abs: u128) -> f64 {
        let mut v = self.base;
        for (q, &corr) in self.ideals.iter().zip(&self.corrections) {
            let member = q.contains_coords(k1, k2);
            if q.norm() == 2 {
                v *= if member { corr } else { 0.0 };
            } else if q.norm() as u128 > norm_abs {
                break;
            } else if member {
                v *= corr;
            }
        }
        v
    }

    /// The same product taken factor by factor over every prime ideal of
    /// norm `<= P`; agrees with [`SingularSeries::eval`] up to rounding.
    pub fn eval_naive(&self, eta: &QuadInt) -> Result<f64> {
        if eta.is_zero() {
            return Err(Error::ZeroShift);
        }
        let mut v = 1.0;
        for q in &self.ideals {
            let nu = if q.contains(eta)? { 1 } else { 2 };
            v *= local_factor(q.norm(), nu);
        }
        Ok(v)
    }

    pub fn tail_bound_for_norm(&self, norm_abs: f64) -> f64 {
        tail_bound(self.cutoff, norm_abs)
    }

    /// Values on the box `[-extent, extent]^2` by walking each prime ideal's
    /// residue class row by row.
    pub fn sieve_box(&self, extent: i64) -> Result<SingularBox> {
        if extent < 1 {
            return Err(Error::InvalidArgument(format!("box radius must be at least 1, got {extent}")));
        }
        let side = 2 * extent as u128 + 1;
        if side * side > MAX_BOX_ENTRIES {
            return Err(Error::budget("sieved singular box", side * side, MAX_BOX_ENTRIES));
        }
        let side = side as usize;
        let max_norm = (self.field.norm_form_bound() * (extent as f64) * (extent as f64)).ceil() as u64;
        let live = self.ideals.partition_point(|q| q.norm() <= max_norm);
        let ideals = &self.ideals[..live];
        let corrections = &self.corrections[..live];

        let mut values = vec![0.0f64; side * side];
        values.par_chunks_mut(side).enumerate().for_each(|(row, cells)| {
            let k2 = row as i64 - extent;
            cells.fill(self.base);
            for (q, &corr) in ideals.iter().zip(corrections) {
                let p = q.p() as i64;
                if q.norm() == 2 {
                    for (i, cell) in cells.iter_mut().enumerate() {
                        let member = q.contains_coords(i as i64 - extent, k2);
                        *cell *= if member { corr } else { 0.0 };
                    }
                    continue;
                }
                let first = match q.root() {
                    None => {
                        if k2 % p != 0 {
                            continue;
                        }
                        0
                    }
                    Some(r) => (-(r as i128) * k2 as i128).rem_euclid(p as i128) as i64,
                };
                // smallest k1 >= -extent with k1 = first (mod p)
                let mut k1 = -extent + (first + extent).rem_euclid(p);
                while k1 <= extent {
                    cells[(k1 + extent) as usize] *= corr;
                    k1 += p;
                }
            }
        });
        values[extent as usize * side + extent as usize] = f64::NAN;
        Ok(SingularBox {
            field: self.field,
            cutoff: self.cutoff,
            extent,
            values,
        })
    }
}

/// `S(eta)` for one shift at cutoff `P`.
pub fn singular_series(eta: &QuadInt, cutoff: u64) -> Result<SingularValue> {
    if eta.is_zero() {
        return Err(Error::ZeroShift);
    }
    SingularSeries::new(&eta.field(), cutoff)?.eval(eta)
}

/// Sieved singular-series values on a coordinate box; the origin is absent.
#[derive(Clone, Debug)]
pub struct SingularBox {
    field: FieldSpec,
    cutoff: u64,
    extent: i64,
    values: Vec<f64>,
}

/// A smoothed sum with its accumulated truncation uncertainty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothedSum {
    pub height: f64,
    pub sum: f64,
    pub uncertainty: f64,
    /// `-w(0) r_K log(H^2)`.
    pub target: f64,
}

impl SmoothedSum {
    pub fn ratio(&self) -> f64 {
        self.sum / self.target
    }
}

impl SingularBox {
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn extent(&self) -> i64 {
        self.extent
    }

    pub fn get(&self, k1: i64, k2: i64) -> Option<f64> {
        let e = self.extent;
        if (k1, k2) == (0, 0) || k1.abs() > e || k2.abs() > e {
            return None;
        }
        let side = (2 * e + 1) as usize;
        Some(self.values[(k2 + e) as usize * side + (k1 + e) as usize])
    }

    /// `sum over eta != 0 of (S(eta) - 1) w(m(eta)/H)`, with rows summed
    /// independently and combined in row order.
    pub fn smoothed_sum(&self, w: &TestFunction, height: f64, residue: f64) -> Result<SmoothedSum> {
        if w.dimension() != 2 {
            return Err(Error::InvalidArgument(format!("{} weight is one-dimensional", w.kind().name())));
        }
        if !(height > 0.0) {
            return Err(Error::InvalidArgument(format!("H must be positive, got {height}")));
        }
        let reach = (w.support_radius() * height).floor() as i64;
        if reach > self.extent {
            return Err(Error::OutOfExtent {
                lo: -reach,
                hi: reach,
                extent: self.extent,
            });
        }
        let e = self.extent;
        let side = (2 * e + 1) as usize;
        let rows: Vec<(f64, f64)> = (-reach..=reach)
            .into_par_iter()
            .map(|k2| {
                let row = &self.values[(k2 + e) as usize * side..][..side];
                let mut sum = 0.0;
                let mut unc = 0.0;
                for k1 in -reach..=reach {
                    if (k1, k2) == (0, 0) {
                        continue;
                    }
                    let weight = w.eval2(k1 as f64 / height, k2 as f64 / height);
                    if weight == 0.0 {
                        continue;
                    }
                    let v = row[(k1 + e) as usize];
                    sum += (v - 1.0) * weight;
                    if v != 0.0 {
                        let norm_abs = self.field.norm_of(k1, k2).unsigned_abs() as f64;
                        unc += v * tail_bound(self.cutoff, norm_abs) * weight;
                    }
                }
                (sum, unc)
            })
            .collect();
        let (sum, uncertainty) = rows.iter().fold((0.0, 0.0), |acc, r| (acc.0 + r.0, acc.1 + r.1));
        Ok(SmoothedSum {
            height,
            sum,
            uncertainty,
            target: -w.value_at_zero() * residue * (height * height).ln(),
        })
    }
}

/// Main-theorem sums for several heights from one sieve, with the residue
/// computed at tolerance `1e-10`.
pub fn singular_sums_smoothed(
    field: &FieldSpec,
    w: &TestFunction,
    heights: &[f64],
    cutoff: u64,
) -> Result<Vec<SmoothedSum>> {
    let residue = residue_rk(field, 1e-10)?.value;
    let top = heights.iter().cloned().fold(0.0, f64::max);
    let extent = ((w.support_radius() * top).floor() as i64).max(1);
    let sieved = SingularSeries::new(field, cutoff)?.sieve_box(extent)?;
    heights.iter().map(|&h| sieved.smoothed_sum(w, h, residue)).collect()
}

pub fn singular_sum_smoothed(field: &FieldSpec, w: &TestFunction, height: f64, cutoff: u64) -> Result<SmoothedSum> {
    if !(height >= 2.0) {
        return Err(Error::InvalidArgument(format!("H must be at least 2, got {height}")));
    }
    Ok(singular_sums_smoothed(field, w, &[height], cutoff)?[0])
}

/// The Hardy-Littlewood series `S(h)` truncated at `P`.
#[derive(Clone, Debug)]
pub struct RationalSingularSeries {
    cutoff: u64,
    odd_primes: Vec<u64>,
    corrections: Vec<f64>,
    base: f64,
}

impl RationalSingularSeries {
    pub fn new(cutoff: u64) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::InvalidArgument(format!("cutoff must be at least 2, got {cutoff}")));
        }
        if cutoff > MAX_CUTOFF {
            return Err(Error::budget("Euler product cutoff", cutoff as u128, MAX_CUTOFF as u128));
        }
        let odd_primes: Vec<u64> = arith::primes_up_to(cutoff).into_iter().skip(1).collect();
        let mut base = 1.0f64;
        let corrections = odd_primes
            .iter()
            .map(|&p| {
                base *= local_factor(p, 2);
                local_factor(p, 1) / local_factor(p, 2)
            })
            .collect();
        Ok(RationalSingularSeries {
            cutoff,
            odd_primes,
            corrections,
            base,
        })
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn eval(&self, h: i64) -> Result<SingularValue> {
        if h == 0 {
            return Err(Error::ZeroShift);
        }
        let h_abs = h.unsigned_abs();
        let mut v = if h_abs % 2 == 0 { self.base * 2.0 } else { 0.0 };
        if v != 0.0 {
            for (&p, &corr) in self.odd_primes.iter().zip(&self.corrections) {
                if p > h_abs {
                    break;
                }
                if h_abs % p == 0 {
                    v *= corr;
                }
            }
        }
        Ok(SingularValue {
            value: v,
            cutoff: self.cutoff,
            tail_bound: self.tail_bound(h_abs),
        })
    }

    fn tail_bound(&self, h_abs: u64) -> f64 {
        let p = self.cutoff as f64;
        let lower = 1.0 / (p - 1.0);
        let k = if h_abs as f64 > p { ((h_abs as f64).ln() / (p + 1.0).ln()).floor() } else { 0.0 };
        lower.max((1.0 + 1.0 / p).powf(k) - 1.0)
    }

    /// Factor-by-factor product over all primes `<= P`.
    pub fn eval_naive(&self, h: i64) -> Result<f64> {
        if h == 0 {
            return Err(Error::ZeroShift);
        }
        let mut v = local_factor(2, if h % 2 == 0 { 1 } else { 2 });
        for &p in &self.odd_primes {
            v *= local_factor(p, if h % p as i64 == 0 { 1 } else { 2 });
        }
        Ok(v)
    }

    /// `S(h)` for `h = 1..=hmax` (index `h - 1`) by walking multiples.
    pub fn sieve(&self, hmax: u64) -> Result<Vec<f64>> {
        if hmax as u128 > MAX_BOX_ENTRIES {
            return Err(Error::budget("rational singular sieve", hmax as u128, MAX_BOX_ENTRIES));
        }
        let mut values: Vec<f64> = (1..=hmax)
            .map(|h| if h % 2 == 0 { self.base * 2.0 } else { 0.0 })
            .collect();
        for (&p, &corr) in self.odd_primes.iter().zip(&self.corrections) {
            if p > hmax {
                break;
            }
            // odd multiples stay 0 either way
            let mut h = 2 * p;
            while h <= hmax {
                values[h as usize - 1] *= corr;
                h += 2 * p;
            }
        }
        Ok(values)
    }
}

pub fn singular_series_rational(h: i64, cutoff: u64) -> Result<SingularValue> {
    if h == 0 {
        return Err(Error::ZeroShift);
    }
    RationalSingularSeries::new(cutoff)?.eval(h)
}

/// `sum_{h=1}^{H} (S(h) - 1)(1 - h/H)` from precomputed `S(1..)`.
pub fn montgomery_from_values(values: &[f64], height: u64) -> Result<f64> {
    if height < 2 {
        return Err(Error::InvalidArgument(format!("H must be at least 2, got {height}")));
    }
    if values.len() < height as usize {
        return Err(Error::InvalidArgument(format!(
            "need S(h) for h <= {height}, have {}",
            values.len()
        )));
    }
    let h_f = height as f64;
    Ok(values[..height as usize]
        .iter()
        .enumerate()
        .map(|(i, &s)| (s - 1.0) * (1.0 - (i + 1) as f64 / h_f))
        .sum())
}

pub fn montgomery_sum(height: u64, cutoff: u64) -> Result<f64> {
    let series = RationalSingularSeries::new(cutoff)?;
    montgomery_from_values(&series.sieve(height)?, height)
}

/// Montgomery sums at several heights sharing one sieve.
pub fn montgomery_table(heights: &[u64], cutoff: u64) -> Result<Vec<f64>> {
    let top = heights.iter().cloned().max().unwrap_or(2);
    let values = RationalSingularSeries::new(cutoff)?.sieve(top)?;
    heights.iter().map(|&h| montgomery_from_values(&values, h)).collect()
}

/// Largest `Y` accepted by [`mobius_phi_partial_sums`].
pub const MAX_PARTIAL_SUM_NORM: u64 = 100_000_000;

/// `sum over squarefree q with Nq <= Y of 1/phi(q)` for each `Y`, unit ideal included.
pub fn mobius_phi_partial_sums(field: &FieldSpec, ys: &[u64]) -> Result<Vec<f64>> {
    let top = ys.iter().cloned().max().unwrap_or(1);
    if ys.iter().any(|&y| y == 0) {
        return Err(Error::InvalidArgument("Y must be at least 1".into()));
    }
    if top > MAX_PARTIAL_SUM_NORM {
        return Err(Error::budget("squarefree ideal enumeration", top as u128, MAX_PARTIAL_SUM_NORM as u128));
    }
    let primes = enumerate_prime_ideals(field, top);
    let mut by_norm = vec![0.0f64; top as usize + 1];
    for_each_squarefree(&primes, top, |norm, _, phi, _| {
        by_norm[norm as usize] += 1.0 / phi as f64;
    });
    let mut prefix = Vec::with_capacity(by_norm.len());
    let mut acc = 0.0;
    for v in by_norm {
        acc += v;
        prefix.push(acc);
    }
    Ok(ys.iter().map(|&y| prefix[y as usize]).collect())
}

pub fn mobius_phi_partial_sum(field: &FieldSpec, y: u64) -> Result<f64> {
    Ok(mobius_phi_partial_sums(field, &[y])?[0])
}
