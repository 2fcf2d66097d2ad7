//! Prime ideals of quadratic rings of integers via splitting of rational
//! primes, squarefree ideals with their Möbius, totient and norm values,
//! Ramanujan sums over ideals, and the coordinate lattices `{m(alpha) : alpha in q}`.
//!
//! A prime ideal of degree one is `(p, w - r)` where `w` is the second basis
//! element and `r` a root of its minimal polynomial mod `p`; membership of
//! `k1 + k2 w` is the congruence `k1 + r k2 = 0 (mod p)`. An inert prime is
//! the principal ideal `(p)` of norm `p^2`.

use std::cmp::Ordering;

use crate::arith;
use crate::error::{Error, Result};
use crate::field::{BasisKind, FieldSpec, QuadInt};
use crate::smoothing::{TestFunction, WeightKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SplitType {
    Split,
    Inert,
    Ramified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeIdeal {
    field: FieldSpec,
    p: u64,
    split: SplitType,
    norm: u64,
    root: Option<u64>,
}

impl PrimeIdeal {
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn split_type(&self) -> SplitType {
        self.split
    }

    pub fn norm(&self) -> u64 {
        self.norm
    }

    pub fn root(&self) -> Option<u64> {
        self.root
    }

    fn sort_key(&self) -> (u64, u64, Option<u64>) {
        (self.norm, self.p, self.root)
    }

    /// Membership of the element with coordinates `(k1, k2)`.
    #[inline]
    pub fn contains_coords(&self, k1: i64, k2: i64) -> bool {
        let p = self.p as i128;
        match self.root {
            None => (k1 as i128) % p == 0 && (k2 as i128) % p == 0,
            Some(r) => (k1 as i128 + r as i128 * k2 as i128) % p == 0,
        }
    }

    pub fn contains(&self, eta: &QuadInt) -> Result<bool> {
        if eta.field() != self.field {
            return Err(Error::FieldMismatch(eta.field().label(), self.field.label()));
        }
        Ok(self.contains_coords(eta.k1, eta.k2))
    }

    /// Hermite basis of the coordinate lattice of this ideal.
    pub fn lattice(&self) -> IdealLattice {
        match self.root {
            None => IdealLattice::from_hnf(self.p as i64, 0, self.p as i64),
            Some(r) => {
                let p = self.p as i64;
                IdealLattice::from_hnf(p, (p - r as i64) % p, 1)
            }
        }
    }
}

impl PartialOrd for PrimeIdeal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PrimeIdeal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

/// Roots of the minimal polynomial of the second basis element mod `p`,
/// ascending, with multiplicity collapsed.
fn min_poly_roots(field: &FieldSpec, p: u64) -> Vec<u64> {
    let (t, n) = field.min_poly();
    if p == 2 {
        // x^2 - t x - n over F_2: test both residues
        return (0..2u64)
            .filter(|&x| (x * x + (t.rem_euclid(2) as u64) * x + n.rem_euclid(2) as u64) % 2 == 0)
            .collect();
    }
    // x = (t +- s)/2 with s^2 = t^2 + 4n, which is D for both bases
    let disc = (t * t + 4 * n).rem_euclid(p as i64) as u64;
    let Some(s) = arith::sqrt_mod(disc, p) else {
        return Vec::new();
    };
    let half = (p + 1) / 2;
    let t = t.rem_euclid(p as i64) as u64;
    let r1 = ((t + s) % p) * half % p;
    let r2 = ((t + p - s) % p) * half % p;
    let mut roots = vec![r1.min(r2), r1.max(r2)];
    roots.dedup();
    roots
}

/// The prime ideals above the rational prime `p`.
pub fn split_prime(p: u64, field: &FieldSpec) -> Result<Vec<PrimeIdeal>> {
    if !arith::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let chi = arith::kronecker(field.discriminant(), p);
    let roots = min_poly_roots(field, p);
    let ideals = match chi {
        1 => {
            debug_assert_eq!(roots.len(), 2);
            roots
                .iter()
                .map(|&r| PrimeIdeal {
                    field: *field,
                    p,
                    split: SplitType::Split,
                    norm: p,
                    root: Some(r),
                })
                .collect()
        }
        0 => {
            debug_assert_eq!(roots.len(), 1);
            vec![PrimeIdeal {
                field: *field,
                p,
                split: SplitType::Ramified,
                norm: p,
                root: Some(roots[0]),
            }]
        }
        _ => {
            debug_assert!(roots.is_empty());
            vec![PrimeIdeal {
                field: *field,
                p,
                split: SplitType::Inert,
                norm: p.checked_mul(p).ok_or(Error::Overflow("prime ideal norm"))?,
                root: None,
            }]
        }
    };
    Ok(ideals)
}

/// All prime ideals of norm `<= max_norm`, ordered by `(norm, p, root)`.
pub fn enumerate_prime_ideals(field: &FieldSpec, max_norm: u64) -> Vec<PrimeIdeal> {
    let mut out: Vec<PrimeIdeal> = arith::primes_up_to(max_norm)
        .into_iter()
        .flat_map(|p| split_prime(p, field).expect("sieved primes are prime"))
        .filter(|q| q.norm <= max_norm)
        .collect();
    out.sort();
    out
}

/// A squarefree ideal, stored as its sorted list of distinct prime factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SquarefreeIdeal {
    field: FieldSpec,
    factors: Vec<PrimeIdeal>,
    norm: u64,
    phi: u64,
}

impl SquarefreeIdeal {
    pub fn unit(field: &FieldSpec) -> Self {
        SquarefreeIdeal {
            field: *field,
            factors: Vec::new(),
            norm: 1,
            phi: 1,
        }
    }

    pub fn from_factors(field: &FieldSpec, mut factors: Vec<PrimeIdeal>) -> Result<Self> {
        factors.sort();
        if factors.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("repeated prime factor".into()));
        }
        if let Some(f) = factors.iter().find(|f| f.field != *field) {
            return Err(Error::FieldMismatch(f.field.label(), field.label()));
        }
        let mut norm = 1u64;
        let mut phi = 1u64;
        for f in &factors {
            norm = norm.checked_mul(f.norm).ok_or(Error::Overflow("ideal norm"))?;
            phi *= f.norm - 1;
        }
        Ok(SquarefreeIdeal {
            field: *field,
            factors,
            norm,
            phi,
        })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn factors(&self) -> &[PrimeIdeal] {
        &self.factors
    }

    pub fn norm(&self) -> u64 {
        self.norm
    }

    pub fn mu(&self) -> i64 {
        if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    #[inline]
    pub fn contains_coords(&self, k1: i64, k2: i64) -> bool {
        self.factors.iter().all(|f| f.contains_coords(k1, k2))
    }

    /// All divisors, as `(divisor, complement)` pairs. The order is fixed:
    /// bit `i` of the enumeration index selects factor `i` into the divisor.
    pub fn divisor_pairs(&self) -> Vec<(SquarefreeIdeal, SquarefreeIdeal)> {
        let k = self.factors.len();
        (0..1usize << k)
            .map(|mask| {
                let (inside, outside): (Vec<_>, Vec<_>) = self
                    .factors
                    .iter()
                    .enumerate()
                    .partition(|(i, _)| mask >> i & 1 == 1);
                let pick = |v: Vec<(usize, &PrimeIdeal)>| {
                    SquarefreeIdeal::from_factors(&self.field, v.into_iter().map(|(_, f)| *f).collect())
                        .expect("sub-products of a valid ideal are valid")
                };
                (pick(inside), pick(outside))
            })
            .collect()
    }
}

/// Visits every squarefree ideal of norm `<= max_norm` built from `primes`
/// (which must be sorted by norm), depth first, starting with the unit ideal.
/// The callback receives `(norm, mu, phi, factors)`.
pub fn for_each_squarefree<F>(primes: &[PrimeIdeal], max_norm: u64, mut visit: F)
where
    F: FnMut(u64, i64, u64, &[PrimeIdeal]),
{
    fn rec<F: FnMut(u64, i64, u64, &[PrimeIdeal])>(
        primes: &[PrimeIdeal],
        start: usize,
        max_norm: u64,
        norm: u64,
        mu: i64,
        phi: u64,
        stack: &mut Vec<PrimeIdeal>,
        visit: &mut F,
    ) {
        visit(norm, mu, phi, stack);
        for i in start..primes.len() {
            let q = primes[i];
            let Some(next) = norm.checked_mul(q.norm).filter(|n| *n <= max_norm) else {
                break;
            };
            stack.push(q);
            rec(primes, i + 1, max_norm, next, -mu, phi * (q.norm - 1), stack, visit);
            stack.pop();
        }
    }
    let mut stack = Vec::new();
    rec(primes, 0, max_norm, 1, 1, 1, &mut stack, &mut visit);
}

/// All squarefree ideals of norm `<= max_norm`, including the unit ideal,
/// ordered by norm and then by factor list.
pub fn enumerate_squarefree_ideals(field: &FieldSpec, max_norm: u64) -> Vec<SquarefreeIdeal> {
    if max_norm == 0 {
        return Vec::new();
    }
    let primes = enumerate_prime_ideals(field, max_norm);
    let mut out = Vec::new();
    for_each_squarefree(&primes, max_norm, |norm, _, phi, factors| {
        out.push(SquarefreeIdeal {
            field: *field,
            factors: factors.to_vec(),
            norm,
            phi,
        });
    });
    out.sort_by(|a, b| (a.norm, &a.factors).cmp(&(b.norm, &b.factors)));
    out
}

/// `c_q(eta)` as the product of the prime values `N p - 1` (`eta in p`) and `-1`.
pub fn ramanujan_sum(q: &SquarefreeIdeal, eta: &QuadInt) -> i64 {
    ramanujan_sum_coords(q, eta.k1, eta.k2)
}

#[inline]
pub fn ramanujan_sum_coords(q: &SquarefreeIdeal, k1: i64, k2: i64) -> i64 {
    q.factors
        .iter()
        .map(|f| {
            if f.contains_coords(k1, k2) {
                f.norm as i64 - 1
            } else {
                -1
            }
        })
        .product()
}

/// `c_q(eta)` straight from its definition, `sum over ab = q, eta in b of mu(a) N b`,
/// with membership in `b` decided by the coordinate lattice of `b`.
pub fn ramanujan_sum_by_definition(q: &SquarefreeIdeal, eta: &QuadInt) -> i64 {
    q.divisor_pairs()
        .iter()
        .filter(|(b, _)| ideal_lattice(b).contains(eta.k1, eta.k2))
        .map(|(b, a)| a.mu() * b.norm() as i64)
        .sum()
}

/// `sum over q | c of c_q(eta)`; equals `N c` when `eta in c` and 0 otherwise.
pub fn condensation_sum(c: &SquarefreeIdeal, eta: &QuadInt) -> i64 {
    c.divisor_pairs()
        .iter()
        .map(|(q, _)| ramanujan_sum(q, eta))
        .sum()
}

/// A rank-two lattice in Hermite normal form, columns `(a, 0)` and `(b, c)`
/// with `a, c > 0` and `0 <= b < a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IdealLattice {
    a: i64,
    b: i64,
    c: i64,
}

impl IdealLattice {
    pub fn identity() -> Self {
        IdealLattice { a: 1, b: 0, c: 1 }
    }

    fn from_hnf(a: i64, b: i64, c: i64) -> Self {
        debug_assert!(a > 0 && c > 0 && (0..a).contains(&b));
        IdealLattice { a, b, c }
    }

    /// Hermite normal form of the lattice spanned by two independent columns.
    pub fn from_columns(u: (i128, i128), v: (i128, i128)) -> Result<Self> {
        let (g, x, y) = arith::ext_gcd(u.1, v.1);
        let (w1, z1) = if g == 0 {
            // both columns lie on the first axis
            return Err(Error::InvalidArgument("columns are dependent".into()));
        } else {
            let w1 = x * u.0 + y * v.0;
            let z1 = (v.1 / g) * u.0 - (u.1 / g) * v.0;
            (w1, z1)
        };
        if z1 == 0 {
            return Err(Error::InvalidArgument("columns are dependent".into()));
        }
        let a = z1.abs();
        let b = w1.rem_euclid(a);
        let narrow = |v: i128| i64::try_from(v).map_err(|_| Error::Overflow("lattice basis"));
        Ok(IdealLattice {
            a: narrow(a)?,
            b: narrow(b)?,
            c: narrow(g)?,
        })
    }

    pub fn columns(&self) -> [(i64, i64); 2] {
        [(self.a, 0), (self.b, self.c)]
    }

    pub fn det(&self) -> u64 {
        (self.a as u64) * (self.c as u64)
    }

    pub fn contains(&self, k1: i64, k2: i64) -> bool {
        if k2.rem_euclid(self.c) != 0 {
            return false;
        }
        let t = (k2 / self.c) as i128;
        (k1 as i128 - t * self.b as i128).rem_euclid(self.a as i128) == 0
    }

    fn scaled(&self, p: i64) -> Result<Self> {
        let [u, v] = self.columns();
        Self::from_columns(
            (u.0 as i128 * p as i128, 0),
            (v.0 as i128 * p as i128, v.1 as i128 * p as i128),
        )
    }

    /// Intersection with `{k : k1 + r k2 = 0 (mod p)}`.
    fn intersect_functional(&self, p: i64, r: i64) -> Result<Self> {
        let [u, v] = self.columns();
        let (p128, r128) = (p as i128, r as i128);
        let fu = (u.0 as i128 + r128 * u.1 as i128).rem_euclid(p128);
        let fv = (v.0 as i128 + r128 * v.1 as i128).rem_euclid(p128);
        // kernel of (x, y) -> x fu + y fv mod p, as two integer columns
        let kernel: [(i128, i128); 2] = if fu == 0 && fv == 0 {
            return Ok(*self);
        } else if fu != 0 {
            let inv = arith::inv_mod(fu as u64, p as u64).expect("p prime") as i128;
            let s = (-fv * inv).rem_euclid(p128);
            [(p128, 0), (s, 1)]
        } else {
            [(1, 0), (0, p128)]
        };
        let apply = |k: (i128, i128)| {
            (
                u.0 as i128 * k.0 + v.0 as i128 * k.1,
                u.1 as i128 * k.0 + v.1 as i128 * k.1,
            )
        };
        Self::from_columns(apply(kernel[0]), apply(kernel[1]))
    }

    /// Calls `f(k1, k2)` for every lattice point with `|k1| <= bound1` and
    /// `|k2| <= bound2`, rows (`k2`) ascending and `k1` ascending within a row.
    pub fn for_each_point_in_box<F: FnMut(i64, i64)>(&self, bound1: i64, bound2: i64, mut f: F) {
        let t_lo = (-bound2).div_euclid(self.c) + i64::from((-bound2).rem_euclid(self.c) != 0);
        let t_hi = bound2.div_euclid(self.c);
        for t in t_lo..=t_hi {
            let k2 = t * self.c;
            let shift = (t as i128 * self.b as i128).rem_euclid(self.a as i128) as i64;
            // smallest k1 >= -bound1 with k1 = shift (mod a)
            let mut k1 = -bound1 + (shift + bound1).rem_euclid(self.a);
            while k1 <= bound1 {
                f(k1, k2);
                k1 += self.a;
            }
        }
    }
}

/// The coordinate lattice of `q`, built by intersecting `Z^2` with one prime
/// ideal at a time and re-reducing to Hermite form.
pub fn ideal_lattice(q: &SquarefreeIdeal) -> IdealLattice {
    let mut lattice = IdealLattice::identity();
    for f in &q.factors {
        lattice = match f.root {
            None => lattice.scaled(f.p as i64),
            Some(r) => lattice.intersect_functional(f.p as i64, r as i64),
        }
        .expect("ideal lattices of small norm stay in range");
    }
    lattice
}

/// Work limit for the enumeration in [`dual_lattice_count`].
pub const DUAL_COUNT_BUDGET: u128 = 50_000_000;

/// Relative slack on the closed ball in [`dual_lattice_count`], so that
/// points exactly on the sphere are not lost to rounding of `r^2`.
const BALL_SLACK: f64 = 1e-12;

/// Number of nonzero dual-lattice vectors of Euclidean length `<= r`.
pub fn dual_lattice_count(lattice: &IdealLattice, r: f64) -> Result<u64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    let (a, b, c) = (lattice.a as f64, lattice.b as i128, lattice.c as f64);
    // (ac) L^{-T} has integer columns (c, -b), (0, a); y = that * w / (ac)
    let w1_max = (r * a).floor() as i128;
    let w2_span = 2.0 * r * c + 2.0;
    let work = (2 * w1_max + 1) as f64 * w2_span;
    if work > DUAL_COUNT_BUDGET as f64 {
        return Err(Error::budget("dual lattice enumeration", work as u128, DUAL_COUNT_BUDGET));
    }
    let scale = a * c;
    let limit = r * r * scale * scale * (1.0 + BALL_SLACK);
    let (ai, ci) = (lattice.a as i128, lattice.c as i128);
    let mut count = 0u64;
    for w1 in -w1_max..=w1_max {
        let x = (ci * w1) as f64;
        let rest = limit - x * x;
        if rest < 0.0 {
            continue;
        }
        let s = rest.sqrt();
        let center = (b * w1) as f64;
        let lo = ((center - s) / a).floor() as i128 - 1;
        let hi = ((center + s) / a).ceil() as i128 + 1;
        for w2 in lo..=hi {
            if w1 == 0 && w2 == 0 {
                continue;
            }
            let y2 = -b * w1 + ai * w2;
            let len2 = (ci * w1) * (ci * w1) + y2 * y2;
            if (len2 as f64) <= limit {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// `N(a) * lambda_1(dual)^2`: the squared length of the shortest nonzero
/// dual vector scaled by the determinant. Gauss-Lagrange reduction, exact.
pub fn dual_minimum_scaled(lattice: &IdealLattice) -> f64 {
    let mut u = (lattice.c as i128, -(lattice.b as i128));
    let mut v = (0i128, lattice.a as i128);
    let dot = |x: (i128, i128), y: (i128, i128)| x.0 * y.0 + x.1 * y.1;
    if dot(u, u) > dot(v, v) {
        std::mem::swap(&mut u, &mut v);
    }
    loop {
        let uu = dot(u, u);
        // nearest-integer multiple
        let m = {
            let num = dot(u, v);
            (2 * num + uu).div_euclid(2 * uu)
        };
        v = (v.0 - m * u.0, v.1 - m * u.1);
        if dot(v, v) >= uu {
            break;
        }
        std::mem::swap(&mut u, &mut v);
    }
    let shortest = dot(u, u) as f64;
    shortest / (lattice.a as f64 * lattice.c as f64)
}

/// Sup-norm coordinate bound for lattice points that can carry weight.
fn support_bound(w: &TestFunction, height: f64) -> i64 {
    (w.support_radius() * height).floor() as i64
}

fn require_planar(w: &TestFunction) -> Result<()> {
    if w.dimension() != 2 {
        return Err(Error::InvalidArgument(format!(
            "{} weight is one-dimensional",
            w.kind().name()
        )));
    }
    Ok(())
}

/// `sum over eta in q of w(m(eta)/H)`, exact lattice enumeration.
pub fn ideal_smoothed_count(q: &SquarefreeIdeal, w: &TestFunction, height: f64) -> Result<f64> {
    require_planar(w)?;
    if !(height > 0.0) {
        return Err(Error::InvalidArgument(format!("H must be positive, got {height}")));
    }
    let bound = support_bound(w, height);
    let lattice = ideal_lattice(q);
    let mut total = 0.0;
    lattice.for_each_point_in_box(bound, bound, |k1, k2| {
        total += w.eval2(k1 as f64 / height, k2 as f64 / height);
    });
    Ok(total)
}

/// Integer form of [`ideal_smoothed_count`] for the square weight at an
/// integer height `h`: `h^2 * sum w(m(eta)/h) = sum (2h - |k1|)(2h - |k2|)`.
pub fn ideal_smoothed_count_exact(q: &SquarefreeIdeal, h: i64) -> Result<i128> {
    if h <= 0 {
        return Err(Error::InvalidArgument(format!("H must be positive, got {h}")));
    }
    let lattice = ideal_lattice(q);
    let mut total = 0i128;
    lattice.for_each_point_in_box(2 * h, 2 * h, |k1, k2| {
        total += (2 * h - k1.abs()) as i128 * (2 * h - k2.abs()) as i128;
    });
    Ok(total)
}

/// Norm threshold `C H^2` above which only `eta = 0` survives in
/// [`ideal_smoothed_count`]: nonzero `eta in q` has `|N eta| >= N q`, and
/// `|N eta| <= K sup(m(eta))^2`.
pub fn smoothed_count_threshold(field: &FieldSpec, w: &TestFunction, height: f64) -> f64 {
    let reach = w.support_radius() * height;
    field.norm_form_bound() * reach * reach
}

/// `S_q(H) = sum over eta of c_q(eta) w(m(eta)/H)`, evaluated by Möbius
/// inversion: `S_q = sum over ab = q of mu(a) N b * sum over eta in b of w(m(eta)/H)`.
pub fn ramanujan_smoothed_sum(q: &SquarefreeIdeal, w: &TestFunction, height: f64) -> Result<f64> {
    let mut total = 0.0;
    for (b, a) in q.divisor_pairs() {
        total += (a.mu() * b.norm() as i64) as f64 * ideal_smoothed_count(&b, w, height)?;
    }
    Ok(total)
}

/// Integer form of [`ramanujan_smoothed_sum`] for the square weight, scaled by `h^2`.
pub fn ramanujan_smoothed_sum_exact(q: &SquarefreeIdeal, h: i64) -> Result<i128> {
    let mut total = 0i128;
    for (b, a) in q.divisor_pairs() {
        total += (a.mu() as i128) * b.norm() as i128 * ideal_smoothed_count_exact(&b, h)?;
    }
    Ok(total)
}

impl WeightKind {
    /// Whether the integer path ([`ideal_smoothed_count_exact`]) applies.
    pub fn has_exact_lattice_sums(&self) -> bool {
        matches!(self, WeightKind::SquareAutocorr)
    }
}

/// Which basis element the root refers to; exposed for diagnostics.
pub fn root_meaning(field: &FieldSpec) -> &'static str {
    match field.basis() {
        BasisKind::SqrtD => "sqrt(D) = r (mod p)",
        BasisKind::HalfBasis => "(1 + sqrt(D))/2 = r (mod p)",
    }
}
