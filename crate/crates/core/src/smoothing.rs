//! Smoothing weights `w = 1_U * 1_U` (autocorrelations of a convex body)
//! and a quadrature probe of their Fourier transforms.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeightKind {
    /// `U = [-1, 1]^2`; `w(x) = prod (2 - |x_i|)_+`.
    SquareAutocorr,
    /// `U` the Euclidean unit disc.
    DiscAutocorr,
    /// `w(t) = (1 - |t|)_+` on the line, for the rational-integer baseline.
    Triangle1D,
}

impl WeightKind {
    pub fn name(&self) -> &'static str {
        match self {
            WeightKind::SquareAutocorr => "square",
            WeightKind::DiscAutocorr => "disc",
            WeightKind::Triangle1D => "triangle",
        }
    }
}

impl std::str::FromStr for WeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(WeightKind::SquareAutocorr),
            "disc" => Ok(WeightKind::DiscAutocorr),
            "triangle" => Ok(WeightKind::Triangle1D),
            other => Err(Error::InvalidArgument(format!("unknown weight {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestFunction {
    kind: WeightKind,
    amplitude: f64,
}

impl TestFunction {
    pub fn new(kind: WeightKind) -> Self {
        TestFunction {
            kind,
            amplitude: 1.0,
        }
    }

    pub fn square() -> Self {
        Self::new(WeightKind::SquareAutocorr)
    }

    pub fn disc() -> Self {
        Self::new(WeightKind::DiscAutocorr)
    }

    pub fn triangle() -> Self {
        Self::new(WeightKind::Triangle1D)
    }

    /// `c * w`. A zero amplitude gives the zero function.
    pub fn scaled(self, c: f64) -> Self {
        TestFunction {
            amplitude: self.amplitude * c,
            ..self
        }
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn dimension(&self) -> usize {
        match self.kind {
            WeightKind::Triangle1D => 1,
            _ => 2,
        }
    }

    /// `vol(U)`, which is `w(0)`.
    fn unit_volume(&self) -> f64 {
        match self.kind {
            WeightKind::SquareAutocorr => 4.0,
            WeightKind::DiscAutocorr => PI,
            // (1 - |t|)_+ = 1_[-1/2,1/2] * 1_[-1/2,1/2]
            WeightKind::Triangle1D => 1.0,
        }
    }

    pub fn value_at_zero(&self) -> f64 {
        self.amplitude * self.unit_volume()
    }

    /// `w^(0) = integral of w = vol(U)^2` (times the amplitude).
    pub fn fourier_at_zero(&self) -> f64 {
        self.amplitude * self.unit_volume() * self.unit_volume()
    }

    /// `w(x) = 0` whenever the relevant norm of `x` exceeds this radius
    /// (sup norm for the square and the triangle, Euclidean for the disc).
    pub fn support_radius(&self) -> f64 {
        match self.kind {
            WeightKind::Triangle1D => 1.0,
            _ => 2.0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension() {
            return Err(Error::InvalidArgument(format!(
                "{} weight takes {} coordinates, got {}",
                self.kind.name(),
                self.dimension(),
                x.len()
            )));
        }
        Ok(match self.kind {
            WeightKind::Triangle1D => self.eval1(x[0]),
            _ => self.eval2(x[0], x[1]),
        })
    }

    #[inline]
    pub fn eval1(&self, t: f64) -> f64 {
        debug_assert_eq!(self.dimension(), 1);
        self.amplitude * (1.0 - t.abs()).max(0.0)
    }

    #[inline]
    pub fn eval2(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            WeightKind::SquareAutocorr => {
                self.amplitude * (2.0 - x.abs()).max(0.0) * (2.0 - y.abs()).max(0.0)
            }
            WeightKind::DiscAutocorr => self.amplitude * disc_overlap((x * x + y * y).sqrt()),
            WeightKind::Triangle1D => {
                debug_assert!(false, "eval2 on a one-dimensional weight");
                f64::NAN
            }
        }
    }
}

/// Area of the intersection of two unit discs at centre distance `r`.
#[inline]
fn disc_overlap(r: f64) -> f64 {
    if r >= 2.0 {
        return 0.0;
    }
    let h = r / 2.0;
    2.0 * h.acos() - h * (4.0 - r * r).sqrt()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Result of [`fourier_probe`]: `w^(xi)`, the decay statistic
/// `|w^(xi)| |xi|^(n+1)`, and a quadrature error estimate.
#[derive(Clone, Copy, Debug)]
pub struct FourierProbe {
    pub value: f64,
    pub decay_statistic: f64,
    pub error_estimate: f64,
}

const PANEL_NODES: usize = 16;

/// Composite Gauss-Legendre rule on `[lo, hi]`, panels split at `breaks`.
fn axis_rule(lo: f64, hi: f64, breaks: &[f64], panels_per_piece: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(PANEL_NODES);
    let mut cuts = vec![lo];
    cuts.extend(breaks.iter().copied().filter(|b| *b > lo && *b < hi));
    cuts.push(hi);
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for piece in cuts.windows(2) {
        let h = (piece[1] - piece[0]) / panels_per_piece as f64;
        for k in 0..panels_per_piece {
            let a = piece[0] + k as f64 * h;
            for (x, w) in gx.iter().zip(&gw) {
                xs.push(a + 0.5 * h * (x + 1.0));
                ws.push(0.5 * h * w);
            }
        }
    }
    (xs, ws)
}

fn panels_for(freq: f64, width: f64, refine: usize) -> usize {
    // at least 128 nodes per axis, and about two panels per oscillation
    let oscillations = freq.abs() * width;
    refine * (4usize).max((2.0 * oscillations).ceil() as usize)
}

fn transform_once(w: &TestFunction, xi: &[f64], refine: usize) -> f64 {
    let r = w.support_radius();
    match w.kind {
        WeightKind::Triangle1D => {
            let (xs, ws) = axis_rule(-r, r, &[0.0], panels_for(xi[0], r, refine));
            xs.iter()
                .zip(&ws)
                .map(|(x, wt)| wt * w.eval1(*x) * (2.0 * PI * x * xi[0]).cos())
                .sum()
        }
        _ => {
            let (xs, wxs) = axis_rule(-r, r, &[0.0], panels_for(xi[0], r, refine));
            let (ys, wys) = axis_rule(-r, r, &[0.0], panels_for(xi[1], r, refine));
            let mut total = 0.0;
            for (x, wx) in xs.iter().zip(&wxs) {
                let mut row = 0.0;
                for (y, wy) in ys.iter().zip(&wys) {
                    let v = w.eval2(*x, *y);
                    if v != 0.0 {
                        // w is even, so the transform is the cosine transform
                        row += wy * v * (2.0 * PI * (x * xi[0] + y * xi[1])).cos();
                    }
                }
                total += wx * row;
            }
            total
        }
    }
}

/// Numerical `w^(xi) = integral e(-x.xi) w(x) dx` by tensor Gauss-Legendre
/// (at least 128 nodes per axis, panels refined with frequency). The error
/// estimate is the change under one doubling of the panel count; estimates
/// above `tolerance` are reported as an error.
pub fn fourier_probe(w: &TestFunction, xi: &[f64], tolerance: f64) -> Result<FourierProbe> {
    if xi.len() != w.dimension() {
        return Err(Error::InvalidArgument(format!(
            "frequency has {} coordinates, weight has dimension {}",
            xi.len(),
            w.dimension()
        )));
    }
    let coarse = transform_once(w, xi, 2);
    let fine = transform_once(w, xi, 4);
    let error_estimate = (fine - coarse).abs();
    if error_estimate > tolerance {
        return Err(Error::Quadrature {
            estimate: error_estimate,
            tolerance,
        });
    }
    let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(FourierProbe {
        value: fine,
        decay_statistic: fine.abs() * norm.powi(w.dimension() as i32 + 1),
        error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_zero() {
        assert_eq!(TestFunction::square().eval(&[0.0, 0.0]).unwrap(), 4.0);
        assert!((TestFunction::disc().eval(&[0.0, 0.0]).unwrap() - PI).abs() < 1e-15);
        assert_eq!(TestFunction::triangle().eval(&[0.0]).unwrap(), 1.0);
        assert!(TestFunction::square().eval(&[0.0]).is_err());
    }

    #[test]
    fn disc_overlap_values() {
        let w = TestFunction::disc();
        assert_eq!(w.eval2(2.0, 0.0), 0.0);
        assert_eq!(w.eval2(0.0, 3.0), 0.0);
        let want = 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0;
        assert!((w.eval2(1.0, 0.0) - want).abs() < 1e-12);
        assert!((want - 1.228370).abs() < 1e-6);
    }

    #[test]
    fn disc_overlap_matches_monte_carlo_grid() {
        // Independent overlap estimate: midpoint grid over the first disc.
        let step = 2e-3;
        let count = |dist: f64| -> f64 {
            let n = (2.0 / step) as i64;
            let mut inside = 0u64;
            for i in 0..n {
                let x = -1.0 + (i as f64 + 0.5) * step;
                for j in 0..n {
                    let y = -1.0 + (j as f64 + 0.5) * step;
                    if x * x + y * y <= 1.0 && (x - dist).powi(2) + y * y <= 1.0 {
                        inside += 1;
                    }
                }
            }
            inside as f64 * step * step
        };
        for dist in [0.3, 1.0, 1.7] {
            let w = TestFunction::disc().eval2(dist, 0.0);
            assert!((count(dist) - w).abs() < 5e-3, "dist {dist}");
        }
    }

    #[test]
    fn square_matches_brute_force_overlap() {
        let step = 1e-3;
        let w = TestFunction::square();
        for (x, y) in [(0.5, 0.25), (1.5, -0.7), (-1.9, 1.9), (0.0, 1.0)] {
            // overlap of [-1,1]^2 and its translate by (x, y), on a 1e-3 grid
            let axis = |s: f64| -> f64 {
                let n = (2.0 / step) as i64;
                (0..n)
                    .filter(|i| {
                        let t = -1.0 + (*i as f64 + 0.5) * step;
                        (t - s).abs() <= 1.0
                    })
                    .count() as f64
                    * step
            };
            let brute = axis(x) * axis(y);
            assert!((brute - w.eval2(x, y)).abs() < 1e-2 * 4.0);
        }
    }

    #[test]
    fn even_and_supported() {
        for w in [TestFunction::square(), TestFunction::disc()] {
            for (x, y) in [(0.3, 1.1), (1.9, -0.2), (2.5, 0.0), (1.5, 1.5)] {
                assert_eq!(w.eval2(x, y), w.eval2(-x, -y));
                assert!(w.eval2(x, y) >= 0.0);
            }
            assert_eq!(w.eval2(2.01, 0.0), 0.0);
        }
        assert_eq!(TestFunction::square().eval2(1.5, 1.5), 0.25);
        let t = TestFunction::triangle();
        assert_eq!(t.eval1(0.25), t.eval1(-0.25));
        assert_eq!(t.eval1(1.0), 0.0);
    }

    #[test]
    fn disc_is_monotone_in_radius() {
        let w = TestFunction::disc();
        let mut prev = f64::INFINITY;
        for i in 0..=400 {
            let v = w.eval2(i as f64 * 0.005, 0.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn zero_amplitude_is_zero_function() {
        let w = TestFunction::disc().scaled(0.0);
        assert_eq!(w.value_at_zero(), 0.0);
        assert_eq!(w.eval2(0.5, 0.5), 0.0);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((m - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn transform_at_zero_is_volume_squared() {
        let sq = fourier_probe(&TestFunction::square(), &[0.0, 0.0], 1e-6).unwrap();
        assert!((sq.value - 16.0).abs() < 1e-9);
        let disc = fourier_probe(&TestFunction::disc(), &[0.0, 0.0], 1e-3).unwrap();
        assert!((disc.value - PI * PI).abs() < 1e-3, "{}", disc.value);
        assert_eq!(TestFunction::disc().fourier_at_zero(), PI * PI);
        let tri = fourier_probe(&TestFunction::triangle(), &[0.0], 1e-9).unwrap();
        assert!((tri.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_transform_is_sinc_squared() {
        let t = TestFunction::triangle();
        for k in 1..=8 {
            let probe = fourier_probe(&t, &[k as f64], 1e-9).unwrap();
            assert!(probe.value.abs() <= 1e-6);
        }
        for xi in [0.3, 1.5, 2.25, 7.7] {
            let probe = fourier_probe(&t, &[xi], 1e-9).unwrap();
            let s = (PI * xi).sin() / (PI * xi);
            assert!((probe.value - s * s).abs() < 1e-9);
        }
    }

    #[test]
    fn square_fails_niceness_on_axis() {
        // On the axis the transform is 4 (sin 2 pi t / (pi t))^2, so at
        // t = k + 1/4 the statistic |w^| t^3 grows linearly in t.
        let w = TestFunction::square();
        let mut stats = Vec::new();
        for j in 0..=6 {
            let t = (1u32 << j) as f64 + 0.25;
            let probe = fourier_probe(&w, &[t, 0.0], 1e-6).unwrap();
            let want = 4.0 / (PI * PI * t * t);
            assert!((probe.value - want).abs() < 1e-8, "t={t}");
            stats.push(probe.decay_statistic / t);
        }
        for s in &stats {
            assert!((s - 4.0 / (PI * PI)).abs() < 0.1);
        }
    }

    #[test]
    fn disc_transform_decays_like_cube() {
        let w = TestFunction::disc();
        let mut max_stat: f64 = 0.0;
        for j in 0..5 {
            let t = (1u32 << j) as f64 + 0.37;
            let probe = fourier_probe(&w, &[t * 0.6, t * 0.8], 1e-3).unwrap();
            max_stat = max_stat.max(probe.decay_statistic);
        }
        assert!(max_stat < 1.0, "{max_stat}");
    }
}
