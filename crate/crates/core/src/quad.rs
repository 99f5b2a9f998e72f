//! Globally adaptive 21-point Gauss–Kronrod quadrature.
//!
//! Intervals are kept in a max-heap keyed on their error estimate; the worst
//! interval is bisected until the summed error meets
//! `max(abs_tol, rel_tol * |I|)`. Several disjoint segments can share one
//! error budget, each with its own coordinate (see [`Integrator::integrate_segments`]).

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

// Needed where the toolchain lacks float math in `core`.
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

// Kronrod abscissae (descending), Kronrod weights, and the weights of the
// embedded 10-point Gauss rule on the odd-indexed abscissae.
#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_643_474_262,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Result of a quadrature: value and estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_err: f64,
    pub evaluations: usize,
}

/// Tolerances and limits for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-10,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    segment: usize,
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    // Set once the panel is too narrow to bisect in floating point.
    exhausted: bool,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // Exhausted panels sink to the bottom of the heap.
        match (self.exhausted, other.exhausted) {
            (false, true) => Ordering::Greater,
            (true, false) => Ordering::Less,
            _ => self.err.total_cmp(&other.err),
        }
    }
}

/// One 21-point Kronrod evaluation on `[a, b]`. Returns (value, error).
pub fn kronrod21<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_k = f_center * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let round = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && err < round {
        err = round;
    }
    (value, err)
}

impl Integrator {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_max_intervals(mut self, max_intervals: usize) -> Self {
        self.max_intervals = max_intervals;
        self
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<Estimate> {
        self.integrate_segments(|_, x| f(x), &[(a, b)])
    }

    /// Integrates `f` over `[points[0], points[last]]` with the interior
    /// points used as initial panel boundaries (kinks, steps, peaks).
    pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        points: &[f64],
    ) -> Result<Estimate> {
        let segments: alloc::vec::Vec<(f64, f64)> = points
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| (w[0], w[1]))
            .collect();
        self.integrate_segments(|_, x| f(x), &segments)
    }

    /// Sums the integrals of `f(i, ·)` over `segments[i]` under a single
    /// error budget. The segment index lets each piece use its own
    /// change of variables.
    pub fn integrate_segments<F: FnMut(usize, f64) -> f64>(
        &self,
        mut f: F,
        segments: &[(f64, f64)],
    ) -> Result<Estimate> {
        let mut heap = BinaryHeap::with_capacity(segments.len() * 2 + 16);
        let mut evaluations = 0;
        for (i, &(a, b)) in segments.iter().enumerate() {
            if b == a {
                continue;
            }
            let (value, err) = kronrod21(|x| f(i, x), a, b);
            evaluations += 21;
            heap.push(Panel {
                segment: i,
                a,
                b,
                value,
                err,
                exhausted: false,
            });
        }

        loop {
            let (total, total_err) = heap
                .iter()
                .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err));
            let requested = self.abs_tol.max(self.rel_tol * total.abs());
            if total_err <= requested {
                return Ok(Estimate {
                    value: total,
                    abs_err: total_err,
                    evaluations,
                });
            }
            let worst = match heap.peek() {
                Some(p) if !p.exhausted && heap.len() < self.max_intervals => heap.pop().unwrap(),
                _ => {
                    // Nothing left to refine: accept roundoff-limited results.
                    let floor = 1e3 * f64::EPSILON * heap.iter().map(|p| p.value.abs()).sum::<f64>();
                    if total_err <= requested.max(floor) {
                        return Ok(Estimate {
                            value: total,
                            abs_err: total_err,
                            evaluations,
                        });
                    }
                    return Err(Error::QuadratureNotConverged {
                        value: total,
                        abs_err: total_err,
                        requested,
                    });
                }
            };
            let mid = 0.5 * (worst.a + worst.b);
            let tiny = (worst.b - worst.a).abs()
                <= 1e3 * f64::EPSILON * worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE);
            if tiny || mid <= worst.a || mid >= worst.b {
                heap.push(Panel {
                    exhausted: true,
                    ..worst
                });
                continue;
            }
            let seg = worst.segment;
            let (v1, e1) = kronrod21(|x| f(seg, x), worst.a, mid);
            let (v2, e2) = kronrod21(|x| f(seg, x), mid, worst.b);
            evaluations += 42;
            heap.push(Panel {
                segment: seg,
                a: worst.a,
                b: mid,
                value: v1,
                err: e1,
                exhausted: false,
            });
            heap.push(Panel {
                segment: seg,
                a: mid,
                b: worst.b,
                value: v2,
                err: e2,
                exhausted: false,
            });
        }
    }
}
