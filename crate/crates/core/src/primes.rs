//! Prime elements of quadratic rings and prefix grids over coordinate boxes.
//!
//! A `PrefixGrid` of extent `R` holds, for every `(k1, k2)` in `[-R, R]^2`,
//! the number of prime elements and the sum of `1/log|N(alpha)|` over
//! `|N(alpha)| > 1`, both taken over all coordinates componentwise `<=
//! (k1, k2)`. Any axis-parallel rectangle is then four lookups.
//!
//! Grid file layout, all little-endian:
//!
//! ```text
//! b"SINF"  u32 version (1)  i64 D  u8 basis (0 = sqrt D, 1 = half)  u32 R
//! (2R+1)^2 u32 counts, row-major with k2 the row and k1 the column, both ascending
//! (2R+1)^2 f64 weights, same order
//! ```

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::arith;
use crate::error::{Error, Result};
use crate::field::{BasisKind, FieldSpec, QuadInt};

/// Largest grid (entries per table) that `build_grid` will allocate.
pub const MAX_GRID_ENTRIES: u128 = 60_000_000;

/// Norms up to this bound are classified through a sieve; larger ones fall
/// back to Miller-Rabin.
const NORM_SIEVE_LIMIT: u64 = 1 << 28;

const MAGIC: &[u8; 4] = b"SINF";
const VERSION: u32 = 1;

/// Whether `p` is inert in the field, i.e. `(d_K | p) = -1`.
fn is_inert(field: &FieldSpec, p: u64) -> bool {
    arith::kronecker(field.discriminant(), p) == -1
}

fn isqrt(m: u128) -> u128 {
    let mut s = (m as f64).sqrt() as u128;
    while s * s > m {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= m {
        s += 1;
    }
    s
}

/// `(alpha)` is a prime ideal: `|N alpha|` is a rational prime, or `alpha`
/// is an associate of an inert rational prime.
pub fn is_prime_element(alpha: &QuadInt) -> bool {
    let Ok(norm) = alpha.norm() else {
        return false;
    };
    let m = norm.unsigned_abs();
    if m < 2 {
        return false;
    }
    if m <= u64::MAX as u128 && arith::is_prime(m as u64) {
        return true;
    }
    let s = isqrt(m);
    if s * s != m || s > u64::MAX as u128 || !arith::is_prime(s as u64) || !is_inert(&alpha.field(), s as u64) {
        return false;
    }
    let p = alpha.field().element(s as i64, 0);
    match alpha.divide_exact(&p) {
        Ok(Some(q)) => q.is_unit().unwrap_or(false),
        _ => false,
    }
}

/// Prime test on coordinates with rational primality supplied by `is_rational_prime`.
fn classify(field: &FieldSpec, k1: i64, k2: i64, is_rational_prime: &dyn Fn(u64) -> bool) -> (bool, u64) {
    let m = field.norm_of(k1, k2).unsigned_abs() as u64;
    if m < 2 {
        return (false, m);
    }
    if is_rational_prime(m) {
        return (true, m);
    }
    let s = isqrt(m as u128) as u64;
    if s * s != m || !is_rational_prime(s) || !is_inert(field, s) {
        return (false, m);
    }
    // N(alpha / s) = +-1, so alpha / s is a unit once it is integral
    let s = s as i64;
    (k1 % s == 0 && k2 % s == 0, m)
}

#[derive(Clone, Debug)]
pub struct PrefixGrid {
    field: FieldSpec,
    extent: i64,
    /// Side of the padded tables, `2R + 2`; index 0 is the zero row/column.
    stride: usize,
    counts: Vec<u32>,
    weights: Vec<f64>,
}

impl PrefixGrid {
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn extent(&self) -> i64 {
        self.extent
    }

    #[inline]
    fn index(&self, k1: i64, k2: i64) -> usize {
        // coordinate c maps to padded index c + R + 1
        (k2 + self.extent + 1) as usize * self.stride + (k1 + self.extent + 1) as usize
    }

    /// Cumulative count over coordinates `<= (k1, k2)`; `-R-1` gives 0.
    pub fn prefix_count(&self, k1: i64, k2: i64) -> u32 {
        self.counts[self.index(k1, k2)]
    }

    pub fn prefix_weight(&self, k1: i64, k2: i64) -> f64 {
        self.weights[self.index(k1, k2)]
    }

    pub fn total_count(&self) -> u64 {
        self.prefix_count(self.extent, self.extent) as u64
    }

    pub fn total_weight(&self) -> f64 {
        self.prefix_weight(self.extent, self.extent)
    }

    fn integer_box(&self, center: (f64, f64), height: f64) -> Result<Option<[i64; 4]>> {
        if !(height >= 0.0) || !center.0.is_finite() || !center.1.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bad query: center ({}, {}), H {height}",
                center.0, center.1
            )));
        }
        let lo1 = (center.0 - height).ceil() as i64;
        let hi1 = (center.0 + height).floor() as i64;
        let lo2 = (center.1 - height).ceil() as i64;
        let hi2 = (center.1 + height).floor() as i64;
        if lo1 > hi1 || lo2 > hi2 {
            return Ok(None);
        }
        let r = self.extent;
        for (lo, hi) in [(lo1, hi1), (lo2, hi2)] {
            if lo < -r || hi > r {
                return Err(Error::OutOfExtent { lo, hi, extent: r });
            }
        }
        Ok(Some([lo1, hi1, lo2, hi2]))
    }

    /// Count over the integer rectangle `[lo1, hi1] x [lo2, hi2]`, which must
    /// be nonempty and inside the extent.
    #[inline]
    pub fn rect_count(&self, lo1: i64, hi1: i64, lo2: i64, hi2: i64) -> u32 {
        let c = &self.counts;
        let (a, b) = (self.index(hi1, hi2), self.index(lo1 - 1, hi2));
        let (e, f) = (self.index(hi1, lo2 - 1), self.index(lo1 - 1, lo2 - 1));
        // intermediate differences may wrap; the final value is exact
        c[a].wrapping_sub(c[b]).wrapping_sub(c[e]).wrapping_add(c[f])
    }

    #[inline]
    pub fn rect_weight(&self, lo1: i64, hi1: i64, lo2: i64, hi2: i64) -> f64 {
        let w = &self.weights;
        let (a, b) = (self.index(hi1, hi2), self.index(lo1 - 1, hi2));
        let (e, f) = (self.index(hi1, lo2 - 1), self.index(lo1 - 1, lo2 - 1));
        (w[a] - w[b]) - (w[e] - w[f])
    }

    /// Prime elements with `||m(omega) - x||_sup <= H`, boundary included.
    pub fn count_primes_box(&self, center: (f64, f64), height: f64) -> Result<u64> {
        Ok(match self.integer_box(center, height)? {
            None => 0,
            Some([lo1, hi1, lo2, hi2]) => self.rect_count(lo1, hi1, lo2, hi2) as u64,
        })
    }

    /// `sum 1/log|N alpha|` over `|N alpha| > 1` in the same closed box.
    pub fn log_weight_box(&self, center: (f64, f64), height: f64) -> Result<f64> {
        Ok(match self.integer_box(center, height)? {
            None => 0.0,
            Some([lo1, hi1, lo2, hi2]) => self.rect_weight(lo1, hi1, lo2, hi2),
        })
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&self.field.d().to_le_bytes())?;
        let basis: u8 = match self.field.basis() {
            BasisKind::SqrtD => 0,
            BasisKind::HalfBasis => 1,
        };
        out.write_all(&[basis])?;
        out.write_all(&(self.extent as u32).to_le_bytes())?;
        let r = self.extent;
        for k2 in -r..=r {
            for k1 in -r..=r {
                out.write_all(&self.prefix_count(k1, k2).to_le_bytes())?;
            }
        }
        for k2 in -r..=r {
            for k1 in -r..=r {
                out.write_all(&self.prefix_weight(k1, k2).to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(input: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        input.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        input.read_exact(&mut b8)?;
        let d = i64::from_le_bytes(b8);
        let mut b1 = [0u8; 1];
        input.read_exact(&mut b1)?;
        let basis = match b1[0] {
            0 => BasisKind::SqrtD,
            1 => BasisKind::HalfBasis,
            other => return Err(Error::Format(format!("unknown basis tag {other}"))),
        };
        let field = FieldSpec::new(d, basis)?;
        input.read_exact(&mut b4)?;
        let extent = u32::from_le_bytes(b4) as i64;
        let side = 2 * extent as u128 + 1;
        if side * side > MAX_GRID_ENTRIES {
            return Err(Error::budget("prefix grid", side * side, MAX_GRID_ENTRIES));
        }
        let mut grid = PrefixGrid::zeroed(field, extent);
        for k2 in -extent..=extent {
            for k1 in -extent..=extent {
                input.read_exact(&mut b4)?;
                let i = grid.index(k1, k2);
                grid.counts[i] = u32::from_le_bytes(b4);
            }
        }
        for k2 in -extent..=extent {
            for k1 in -extent..=extent {
                input.read_exact(&mut b8)?;
                let i = grid.index(k1, k2);
                grid.weights[i] = f64::from_le_bytes(b8);
            }
        }
        if input.read(&mut b1)? != 0 {
            return Err(Error::Format("trailing bytes".into()));
        }
        Ok(grid)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let mut input = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut input)
    }

    fn zeroed(field: FieldSpec, extent: i64) -> Self {
        let stride = 2 * extent as usize + 2;
        PrefixGrid {
            field,
            extent,
            stride,
            counts: vec![0; stride * stride],
            weights: vec![0.0; stride * stride],
        }
    }
}

fn check_grid_budget(extent: i64) -> Result<()> {
    if extent < 0 {
        return Err(Error::InvalidArgument(format!("extent must be nonnegative, got {extent}")));
    }
    let stride = 2 * extent as u128 + 2;
    if stride * stride > MAX_GRID_ENTRIES {
        return Err(Error::budget("prefix grid", stride * stride, MAX_GRID_ENTRIES));
    }
    Ok(())
}

/// Builds the grid with a caller-supplied classifier returning
/// `(counted, weight)` per coordinate pair.
pub fn build_grid_with<F>(field: &FieldSpec, extent: i64, cell: F) -> Result<PrefixGrid>
where
    F: Fn(i64, i64) -> (bool, f64) + Sync,
{
    check_grid_budget(extent)?;
    let mut grid = PrefixGrid::zeroed(*field, extent);
    let stride = grid.stride;
    let r = extent;

    // row prefixes in parallel, skipping the padding row
    grid.counts[stride..]
        .par_chunks_mut(stride)
        .zip(grid.weights[stride..].par_chunks_mut(stride))
        .enumerate()
        .for_each(|(row, (counts, weights))| {
            let k2 = row as i64 - r;
            let mut c = 0u32;
            let (mut s, mut comp) = (0.0f64, 0.0f64);
            for k1 in -r..=r {
                let (prime, w) = cell(k1, k2);
                c += prime as u32;
                // Kahan
                let y = w - comp;
                let t = s + y;
                comp = (t - s) - y;
                s = t;
                let i = (k1 + r + 1) as usize;
                counts[i] = c;
                weights[i] = s;
            }
        });

    // column accumulation, compensated per column
    let mut comp = vec![0.0f64; stride];
    for row in 2..stride {
        let (above, here) = grid.weights.split_at_mut(row * stride);
        let above = &above[(row - 1) * stride..];
        for i in 1..stride {
            let y = above[i] - comp[i];
            let t = here[i] + y;
            comp[i] = (t - here[i]) - y;
            here[i] = t;
        }
        let (above, here) = grid.counts.split_at_mut(row * stride);
        let above = &above[(row - 1) * stride..];
        for i in 1..stride {
            here[i] += above[i];
        }
    }
    Ok(grid)
}

/// Prefix grid of prime elements and `1/log|N|` weights over `[-R, R]^2`.
pub fn build_grid(field: &FieldSpec, extent: i64) -> Result<PrefixGrid> {
    check_grid_budget(extent)?;
    let max_norm = (field.norm_form_bound() * (extent as f64).powi(2)).ceil() as u64;
    let sieve = if max_norm <= NORM_SIEVE_LIMIT {
        let spf = arith::smallest_prime_factors(max_norm.max(2) as usize);
        Some(spf)
    } else {
        None
    };
    let test = |n: u64| -> bool {
        match &sieve {
            Some(spf) => (n as usize) < spf.len() && n >= 2 && spf[n as usize] as u64 == n,
            None => arith::is_prime(n),
        }
    };
    build_grid_with(field, extent, |k1, k2| {
        let (prime, m) = classify(field, k1, k2, &test);
        let w = if m > 1 { 1.0 / (m as f64).ln() } else { 0.0 };
        (prime, w)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gauss() -> FieldSpec {
        FieldSpec::quadratic(-1).unwrap()
    }

    /// Textbook Gaussian-prime test.
    fn classical_gaussian_prime(a: i64, b: i64) -> bool {
        let n = (a * a + b * b) as u64;
        if a != 0 && b != 0 {
            return arith::is_prime(n);
        }
        let c = (a + b).unsigned_abs();
        arith::is_prime(c) && c % 4 == 3
    }

    #[test]
    fn element_examples() {
        let k = gauss();
        assert!(is_prime_element(&k.element(1, 1)));
        assert!(is_prime_element(&k.element(3, 0)));
        assert!(is_prime_element(&k.element(0, -7)));
        assert!(!is_prime_element(&k.element(2, 0)));
        assert!(!is_prime_element(&k.element(5, 0)));
        assert!(!is_prime_element(&k.zero()));
        assert!(!is_prime_element(&k.one()));
        // 3 + 3i has norm 18
        assert!(!is_prime_element(&k.element(3, 3)));
    }

    #[test]
    fn gaussian_primes_match_classical_rule() {
        let k = gauss();
        for a in -100..=100 {
            for b in -100..=100 {
                assert_eq!(is_prime_element(&k.element(a, b)), classical_gaussian_prime(a, b), "({a},{b})");
            }
        }
    }

    #[test]
    fn real_field_associates_of_inert_primes() {
        // 3 is inert in Q(sqrt 2); (1 + sqrt 2) * 3 = 3 + 3 sqrt 2 is prime
        let k = FieldSpec::quadratic(2).unwrap();
        assert!(is_prime_element(&k.element(3, 3)));
        assert!(is_prime_element(&k.element(3, 0)));
        // 7 splits: 7 = (3 + sqrt 2)(3 - sqrt 2), so 7 itself is not prime
        assert!(!is_prime_element(&k.element(7, 0)));
        assert!(is_prime_element(&k.element(3, 1)));
    }

    #[test]
    fn fast_classifier_agrees_with_definition() {
        for d in [-1, -3, -5, -7, 2, 3, 10, 5] {
            let k = FieldSpec::quadratic(d).unwrap();
            let r = 40;
            let g = build_grid(&k, r).unwrap();
            let mut total = 0;
            for k2 in -r..=r {
                for k1 in -r..=r {
                    let p = is_prime_element(&k.element(k1, k2));
                    let cell = g.rect_count(k1, k1, k2, k2);
                    assert_eq!(cell == 1, p, "D={d} ({k1},{k2})");
                    total += p as u64;
                }
            }
            assert_eq!(g.total_count(), total);
        }
    }

    #[test]
    fn small_gaussian_grid() {
        let k = gauss();
        let g = build_grid(&k, 2).unwrap();
        // +-1 +-i, +-2 +-i, +-1 +-2i
        assert_eq!(g.total_count(), 12);
        assert_eq!(g.count_primes_box((0.0, 0.0), 1.5).unwrap(), 4);
        assert_eq!(g.count_primes_box((0.0, 0.0), 2.0).unwrap(), 12);
        let zero = build_grid(&k, 0).unwrap();
        assert_eq!(zero.total_count(), 0);
        assert_eq!(zero.total_weight(), 0.0);
    }

    #[test]
    fn weights_match_scan() {
        for d in [-1, 3, 5] {
            let k = FieldSpec::quadratic(d).unwrap();
            let r = 60;
            let g = build_grid(&k, r).unwrap();
            let mut direct = 0.0;
            for k2 in -r..=r {
                for k1 in -r..=r {
                    let m = k.norm_of(k1, k2).unsigned_abs();
                    if m > 1 {
                        direct += 1.0 / (m as f64).ln();
                    }
                }
            }
            assert!((g.total_weight() - direct).abs() <= 1e-12 * direct);
            // only units and zero near the origin
            assert!(g.log_weight_box((0.0, 0.0), 0.0).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn tables_are_monotone() {
        let k = FieldSpec::quadratic(-7).unwrap();
        let g = build_grid(&k, 25).unwrap();
        for k2 in -25..=25 {
            for k1 in -25..=25 {
                assert!(g.prefix_count(k1, k2) >= g.prefix_count(k1 - 1, k2));
                assert!(g.prefix_count(k1, k2) >= g.prefix_count(k1, k2 - 1));
                assert!(g.prefix_weight(k1, k2) >= g.prefix_weight(k1 - 1, k2));
                assert!(g.prefix_weight(k1, k2) >= g.prefix_weight(k1, k2 - 1));
            }
        }
    }

    #[test]
    fn random_boxes_match_brute_force() {
        let k = gauss();
        let r = 80;
        let g = build_grid(&k, r).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let h: f64 = rng.gen_range(1.0..30.0);
            let reach = r as f64 - h;
            let x = (rng.gen_range(-reach..reach), rng.gen_range(-reach..reach));
            let mut want = 0;
            for k2 in -r..=r {
                for k1 in -r..=r {
                    if (k1 as f64 - x.0).abs() <= h && (k2 as f64 - x.1).abs() <= h {
                        want += is_prime_element(&k.element(k1, k2)) as u64;
                    }
                }
            }
            assert_eq!(g.count_primes_box(x, h).unwrap(), want);
            // reflected box
            assert_eq!(g.count_primes_box((-x.0, -x.1), h).unwrap(), want);
        }
    }

    #[test]
    fn boundary_ties_are_included() {
        let k = gauss();
        let g = build_grid(&k, 10).unwrap();
        // the closed box [0, 1]^2 reaches 1 + i exactly at distance H
        assert_eq!(g.count_primes_box((0.5, 0.5), 0.5).unwrap(), 1);
        assert_eq!(g.count_primes_box((0.5, 0.5), 0.49).unwrap(), 0);
        assert_eq!(g.count_primes_box((0.5, 0.5), 0.25).unwrap(), 0);
    }

    #[test]
    fn additivity_and_extent() {
        let k = FieldSpec::quadratic(-3).unwrap();
        let g = build_grid(&k, 30).unwrap();
        let left = g.rect_weight(-10, 0, -5, 5);
        let right = g.rect_weight(1, 10, -5, 5);
        let both = g.rect_weight(-10, 10, -5, 5);
        assert!((left + right - both).abs() < 1e-9);
        assert_eq!(g.count_primes_box((0.0, 0.0), 30.0).unwrap(), g.total_count());
        assert!(matches!(
            g.count_primes_box((25.0, 0.0), 6.0),
            Err(Error::OutOfExtent { .. })
        ));
        assert!(g.count_primes_box((0.0, 0.0), -1.0).is_err());
    }

    #[test]
    fn file_round_trip() {
        let k = FieldSpec::quadratic(5).unwrap();
        let g = build_grid(&k, 12).unwrap();
        let mut buf = Vec::new();
        g.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 8 + 1 + 4 + 25 * 25 * 12);
        assert_eq!(&buf[..4], b"SINF");
        assert_eq!(buf[16], 1);
        let back = PrefixGrid::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back.field(), k);
        assert_eq!(back.counts, g.counts);
        assert_eq!(back.weights, g.weights);
        buf[0] = b'X';
        assert!(matches!(PrefixGrid::read_from(&mut buf.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn budget_refused_before_allocation() {
        let k = gauss();
        assert!(matches!(build_grid(&k, 1_000_000), Err(Error::Budget { .. })));
        assert!(build_grid(&k, -1).is_err());
    }
}
