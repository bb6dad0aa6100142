//! Scalar special functions: Gamma, Bessel J0, factorials and complete
//! homogeneous symmetric polynomials.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Arguments above this overflow `f64` in `gamma`.
pub const GAMMA_OVERFLOW: f64 = 171.624_376_956_302_7;

/// `sin(pi * x)` with exact argument reduction, so that zeros at the
/// integers are hit exactly and values near them keep full relative accuracy.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    // r in [-1, 1], exact
    let r = x - 2.0 * (x * 0.5).round();
    let y = if r > 0.5 {
        1.0 - r
    } else if r < -0.5 {
        -1.0 - r
    } else {
        r
    };
    (PI * y).sin()
}

/// `cos(pi * x)` with exact argument reduction.
pub fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

/// Below this the Lanczos approximation is used, above it Stirling's series.
const STIRLING_MIN: f64 = 10.0;

/// `ln Gamma(x) - (x - 1/2) ln x + x - ln(2 pi)/2` by its asymptotic
/// series; seven terms reach double precision for `x >= 10`.
fn stirling_correction(x: f64) -> f64 {
    const COEFFS: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    for c in COEFFS.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv
}

fn lanczos_sum(z: f64) -> f64 {
    let mut sum = LANCZOS_COEFFS[0];
    for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += c / (z + k as f64);
    }
    sum
}

/// The Gamma function on the real line.
///
/// Positive integers up to 171 return the exactly rounded factorial. Other
/// arguments use a Lanczos approximation below 10 and Stirling's series
/// above, with reflection below 1/2. Poles
/// (non-positive integers) return NaN.
pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == x.floor() {
        if x <= 0.0 {
            return f64::NAN;
        }
        if x <= 171.0 {
            return factorial(x as usize - 1);
        }
        return f64::INFINITY;
    }
    if x < 0.5 {
        let s = sin_pi(x);
        return PI / (s * gamma(1.0 - x));
    }
    if x > GAMMA_OVERFLOW {
        return f64::INFINITY;
    }
    if x >= STIRLING_MIN {
        // split the power to delay overflow near the upper limit
        let half = x.powf(0.5 * (x - 0.5));
        return (2.0 * PI).sqrt() * half * (half * (-x).exp()) * stirling_correction(x).exp();
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
}

/// `ln |Gamma(x)|` together with the sign of `Gamma(x)`.
pub fn ln_gamma(x: f64) -> (f64, f64) {
    if x.is_nan() || (x <= 0.0 && x == x.floor()) {
        return (f64::NAN, f64::NAN);
    }
    if x < 0.5 {
        let s = sin_pi(x);
        let (lg, sg) = ln_gamma(1.0 - x);
        return ((PI / s.abs()).ln() - lg, s.signum() * sg);
    }
    if x < 20.0 {
        let g = gamma(x);
        return (g.abs().ln(), g.signum());
    }
    (
        0.5 * (2.0 * PI).ln() + (x - 0.5) * x.ln() - x + stirling_correction(x),
        1.0,
    )
}

/// `k!` as a double; exact up to 22! and correctly rounded beyond.
pub fn factorial(k: usize) -> f64 {
    if k > 170 {
        return f64::INFINITY;
    }
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// `ln(k!)`.
pub fn ln_factorial(k: usize) -> f64 {
    if k <= 170 {
        factorial(k).ln()
    } else {
        ln_gamma(k as f64 + 1.0).0
    }
}

/// Zero-order Bessel function of the first kind.
///
/// Evaluated from `J0(x) = (1/2pi) * integral over a full period of
/// cos(x sin t) dt` with the periodic trapezoidal rule. The node count
/// exceeds `|x|` by a margin that pushes the aliasing terms `J_N(x)` below
/// double precision, so the error is dominated by rounding of `x sin t`.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax == 0.0 {
        return 1.0;
    }
    let nodes = (ax + 12.0 * ax.cbrt() + 40.0).ceil() as usize;
    // even count: t and t + pi contribute identical terms
    let nodes = nodes + nodes % 2;
    let half = nodes / 2;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for k in 0..half {
        let t = 2.0 * PI * k as f64 / nodes as f64;
        let y = (ax * t.sin()).cos() - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    sum / half as f64
}

/// Complete homogeneous symmetric polynomials `h_0 .. h_degree` of `vars`.
pub fn complete_homogeneous(vars: &[f64], degree: usize) -> Vec<f64> {
    let mut h = vec![0.0; degree + 1];
    h[0] = 1.0;
    for &v in vars {
        for d in 1..=degree {
            h[d] += v * h[d - 1];
        }
    }
    h
}

/// Elementary symmetric polynomials `e_0 .. e_len` of `vars`.
pub fn elementary_symmetric(vars: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; vars.len() + 1];
    e[0] = 1.0;
    for (count, &v) in vars.iter().enumerate() {
        for d in (1..=count + 1).rev() {
            e[d] += v * e[d - 1];
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_reference_values() {
        let cases = [
            (0.5, 1.772_453_850_905_516_027_3),
            (1e-4, 9_999.422_883_231_624_190_8),
            (-0.5, -3.544_907_701_811_032_054_6),
            (-1.0001, 9_999.577_356_844_993_790_2),
            (3.7, 4.170_651_783_796_603_165_4),
            (10.5, 1_133_278.388_948_785_567_3),
            (170.5, 5.562_092_414_559_999_610_7e305),
            (-2.9999, -1_666.876_057_810_536_656_4),
        ];
        for (x, expected) in cases {
            assert!(rel(gamma(x), expected) < 1e-13, "gamma({x}) = {}", gamma(x));
        }
    }

    #[test]
    fn gamma_integers_and_poles() {
        assert_eq!(gamma(1.0), 1.0);
        assert_eq!(gamma(5.0), 24.0);
        assert!(gamma(0.0).is_nan());
        assert!(gamma(-3.0).is_nan());
        assert!(gamma(172.0).is_infinite());
    }

    #[test]
    fn ln_gamma_large_arguments() {
        assert!(rel(ln_gamma(200.5).0, 860.582_203_509_782_491_94) < 1e-14);
        assert!(rel(ln_gamma(1000.0).0, 5_905.220_423_209_181_211_8) < 1e-14);
        let (lg, sg) = ln_gamma(-2.9999);
        assert_eq!(sg, -1.0);
        assert!(rel(lg.exp(), 1_666.876_057_810_536_656_4) < 1e-12);
    }

    #[test]
    fn gamma_near_poles_matches_leading_behaviour() {
        // Gamma(s - k) ~ (-1)^k / (k! s) for small s
        for k in 0..4usize {
            let s = 1e-7;
            let approx = (-1f64).powi(k as i32) / (factorial(k) * s);
            assert!(rel(gamma(s - k as f64), approx) < 1e-5);
        }
    }

    #[test]
    fn sin_pi_is_exact_at_integers() {
        for k in -5..=5 {
            assert_eq!(sin_pi(k as f64), 0.0);
        }
        assert!((sin_pi(0.5) - 1.0).abs() < 1e-16);
        assert!((cos_pi(1.0) + 1.0).abs() < 1e-16);
    }

    #[test]
    fn bessel_j0_reference_values() {
        let expected = [
            -0.304_242_177_644_093_864_2,
            0.157_507_392_482_138_438_75,
            -0.105_625_244_786_202_416_98,
            0.079_377_411_303_609_034_726,
            -0.063_559_940_200_603_497_581,
            0.052_992_723_848_455_709_44,
            -0.045_435_782_250_670_278_507,
            0.039_763_930_312_826_518_962,
            -0.035_350_353_569_402_015_68,
        ];
        for (d, value) in expected.iter().enumerate() {
            let d = (d + 1) as f64;
            let got = bessel_j0(PI * d * d);
            assert!((got - value).abs() < 1e-14, "J0(pi*{d}^2) = {got}");
        }
    }

    #[test]
    fn bessel_j0_matches_power_series_for_small_arguments() {
        for &x in &[0.1, 0.7, 1.5, 2.4048, 3.0] {
            let q = -(x * x) / 4.0;
            let mut term = 1.0;
            let mut series = 1.0;
            for k in 1..40 {
                term *= q / (k * k) as f64;
                series += term;
            }
            assert!((bessel_j0(x) - series).abs() < 1e-15);
        }
        assert_eq!(bessel_j0(0.0), 1.0);
    }

    #[test]
    fn symmetric_polynomials() {
        let v = [1.0, 2.0, 3.0];
        let h = complete_homogeneous(&v, 2);
        assert_eq!(h, vec![1.0, 6.0, 25.0]);
        let e = elementary_symmetric(&v);
        assert_eq!(e, vec![1.0, 6.0, 11.0, 6.0]);
    }
}
