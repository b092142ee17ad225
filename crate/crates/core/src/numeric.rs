// SPDX-License-Identifier: MIT OR Apache-2.0

//! Numerical building blocks: normal density and distribution function,
//! adaptive Gauss-Kronrod quadrature, bracketed root finding and compensated
//! summation.

use crate::{Error, Result};

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard normal distribution function, accurate in both tails.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// `Φ(x) - 1/2` without cancellation near zero.
#[inline]
pub fn norm_cdf_centered(x: f64) -> f64 {
    0.5 * libm::erf(x * FRAC_1_SQRT_2)
}

/// `E[X⁺]` for `X ~ Normal(mean, sd²)`.
pub fn normal_positive_part_mean(mean: f64, sd: f64) -> f64 {
    if sd <= 0.0 {
        return mean.max(0.0);
    }
    let z = mean / sd;
    sd * norm_pdf(z) + mean * norm_cdf(z)
}

/// `E[X⁻] = E[max(-X, 0)]` for `X ~ Normal(mean, sd²)`.
pub fn normal_negative_part_mean(mean: f64, sd: f64) -> f64 {
    normal_positive_part_mean(-mean, sd)
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadTol {
    pub rel: f64,
    pub abs: f64,
    pub max_depth: u32,
}

impl Default for QuadTol {
    fn default() -> Self {
        Self {
            rel: 1e-10,
            abs: 1e-14,
            max_depth: 40,
        }
    }
}

impl QuadTol {
    pub fn rel(rel: f64) -> Self {
        Self {
            rel,
            ..Self::default()
        }
    }
}

// Gauss-Kronrod 10/21 nodes and weights.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        // Gauss nodes are the odd-indexed Kronrod nodes.
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let result = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (result, err)
}

/// Adaptive Gauss-Kronrod (10/21) quadrature of `f` over `[a, b]`.
///
/// Subintervals are bisected until each meets its share of
/// `max(abs, rel·|I|)`, where `I` is the running estimate of the whole
/// integral. Returns the integral and the accumulated error estimate.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: QuadTol) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    if b < a {
        let (v, e) = integrate(f, b, a, tol);
        return (-v, e);
    }
    let (whole, whole_err) = gk21(&mut f, a, b);
    // Work list of (a, b, estimate, error, depth); refine the worst interval
    // until the global error target holds.
    let mut pieces = vec![(a, b, whole, whole_err, 0u32)];
    let mut total = whole;
    let mut total_err = whole_err;
    let mut evals = 0usize;
    loop {
        let target = tol.abs.max(tol.rel * total.abs());
        if total_err <= target || evals > 20_000 {
            break;
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .filter(|(_, p)| p.4 < tol.max_depth)
            .fold((usize::MAX, -1.0), |acc, (i, p)| {
                if p.3 > acc.1 {
                    (i, p.3)
                } else {
                    acc
                }
            });
        if idx == usize::MAX {
            break;
        }
        let (pa, pb, pv, pe, depth) = pieces.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        let (lv, le) = gk21(&mut f, pa, mid);
        let (rv, re) = gk21(&mut f, mid, pb);
        evals += 2;
        total += lv + rv - pv;
        total_err += le + re - pe;
        pieces.push((pa, mid, lv, le, depth + 1));
        pieces.push((mid, pb, rv, re, depth + 1));
    }
    // Re-add in a fixed order to wash out drift from the incremental updates.
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut sum = KahanSum::default();
    let mut err = 0.0;
    for p in &pieces {
        sum.add(p.2);
        err += p.3;
    }
    (sum.value(), err)
}

/// Integral over `[a, b]` split at the given interior break points (kinks or
/// peaks of the integrand).
pub fn integrate_split<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: QuadTol,
) -> (f64, f64) {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| *x > a && *x < b)
        .collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(b);
    let mut total = 0.0;
    let mut err = 0.0;
    for w in pts.windows(2) {
        let (v, e) = integrate(&mut f, w[0], w[1], tol);
        total += v;
        err += e;
    }
    (total, err)
}

/// Brent's method for a root of `f` in `[a, b]`; `f(a)` and `f(b)` must have
/// opposite signs (or one of them vanish).
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64, rtol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::Convergence(format!(
            "root not bracketed on [{a}, {b}]: f = ({fa}, {fb})"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * (xtol + rtol * b.abs());
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::Convergence(format!("non-finite function value at {b}")));
        }
    }
    Err(Error::Convergence("Brent iteration limit".into()))
}

/// Kahan-Babuska compensated accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
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

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_tails() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((norm_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-14);
        // Φ(-10) ≈ 7.6198530241605e-24
        assert!((norm_cdf(-10.0) / 7.619_853_024_160_527e-24 - 1.0).abs() < 1e-10);
        assert!((norm_cdf_centered(1e-9) - 1e-9 / SQRT_2PI).abs() < 1e-24);
    }

    #[test]
    fn gaussian_moments_by_quadrature() {
        let (m0, _) = integrate(norm_pdf, -40.0, 40.0, QuadTol::default());
        let (m2, _) = integrate(|x| x * x * norm_pdf(x), -40.0, 40.0, QuadTol::default());
        assert!((m0 - 1.0).abs() < 1e-12);
        assert!((m2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_of_kinked_integrand() {
        let (v, _) = integrate_split(
            |x: f64| x.max(0.0) * norm_pdf(x),
            -30.0,
            30.0,
            &[0.0],
            QuadTol::default(),
        );
        assert!((v - 1.0 / SQRT_2PI).abs() < 1e-13);
    }

    #[test]
    fn brent_finds_roots() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 1e-15, 1e-15).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-14);
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 0.0).is_err());
    }

    #[test]
    fn positive_part_mean_matches_quadrature() {
        for &(m, s) in &[(0.0, 1.0), (1.5, 2.0), (-3.0, 0.7)] {
            let (q, _) = integrate_split(
                |x: f64| x.max(0.0) * norm_pdf((x - m) / s) / s,
                m - 40.0 * s,
                m + 40.0 * s,
                &[0.0],
                QuadTol::default(),
            );
            assert!((normal_positive_part_mean(m, s) - q).abs() < 1e-12);
        }
    }

    #[test]
    fn kahan_beats_naive_summation() {
        let mut k = KahanSum::default();
        k.add(1.0);
        for _ in 0..1_000_000 {
            k.add(1e-16);
        }
        assert!((k.value() - (1.0 + 1e-10)).abs() < 1e-22 + 1e-16);
    }
}
