#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{Integral, Integrand, Tolerance};

// Abscissae and weights of the 21-point Kronrod extension of the 10-point Gauss rule.
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
    0.123_491_976_262_065_851_077_208_980_242_500,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Single 21-point Kronrod panel on `[a, b]`; error is `|K21 - G10|`.
pub fn gk21<T, V, F>(f: &F, a: T, b: T) -> Integral<V, T>
where
    T: Scalar,
    V: Integrand<T>,
    F: Fn(T) -> V,
{
    let half = (b - a) * T::lit(0.5);
    let center = (a + b) * T::lit(0.5);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[10]);
    let mut gauss = V::zero();
    for i in 0..10 {
        let dx = half * T::lit(XGK[i]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * T::lit(WGK[i]);
        if i % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[i / 2]);
        }
    }
    let value = kronrod * half;
    let error = (kronrod - gauss).magnitude() * half.abs();
    Integral { value, error, evaluations: 21 }
}

struct Panel<V, T> {
    a: T,
    b: T,
    value: V,
    error: T,
}

/// Globally adaptive bisection driven by 21-point Kronrod panels.
///
/// Bisects the panel with the largest error estimate until the summed error meets `tol`.
pub fn gauss_kronrod<T, V, F>(f: F, a: T, b: T, tol: Tolerance<T>) -> Result<Integral<V, T>>
where
    T: Scalar,
    V: Integrand<T>,
    F: Fn(T) -> V,
{
    let first = gk21(&f, a, b);
    let mut evaluations = first.evaluations;
    let mut panels = vec![Panel { a, b, value: first.value, error: first.error }];
    loop {
        let (value, error) = panels.iter().fold((V::zero(), T::zero()), |(v, e), p| (v + p.value, e + p.error));
        if !value.magnitude().is_finite() || !error.is_finite() {
            return Err(Error::Quadrature { achieved: error.as_f64(), requested: tol.target(T::one()).as_f64() });
        }
        if error <= tol.target(value.magnitude()) {
            return Ok(Integral { value, error, evaluations });
        }
        if panels.len() >= tol.max_subdivisions {
            return Err(Error::Quadrature {
                achieved: error.as_f64(),
                requested: tol.target(value.magnitude()).as_f64(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let mid = (p.a + p.b) * T::lit(0.5);
        if mid <= p.a || mid >= p.b {
            // panel too narrow to split further in this precision
            return Err(Error::Quadrature {
                achieved: error.as_f64(),
                requested: tol.target(value.magnitude()).as_f64(),
            });
        }
        for (lo, hi) in [(p.a, mid), (mid, p.b)] {
            let r = gk21(&f, lo, hi);
            evaluations += r.evaluations;
            panels.push(Panel { a: lo, b: hi, value: r.value, error: r.error });
        }
    }
}
