//! Frank's associative copula family and the xor family derived from it.
//!
//! `frank_and` is the copula `A_s`, `frank_or` its dual `R_s = x + y - A_s`,
//! and `xor_f` is `F_s = R_s - A_s`. The parameter `s` runs over `(0, inf)`
//! with the limits `A_0 = min`, `A_1 = product` and `A_inf = max(x + y - 1, 0)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Values within this distance of `[0, 1]` are clamped instead of rejected.
pub const UNIT_EPS: f64 = 1e-12;
/// `|s - 1|` below this is evaluated with the product copula.
pub const ONE_THRESHOLD: f64 = 1e-6;
/// `s` below this is evaluated with the `min` limit.
pub const ZERO_THRESHOLD: f64 = 1e-8;
/// `s` above this is evaluated with the Lukasiewicz limit.
pub const INFINITY_THRESHOLD: f64 = 1e8;
/// Residual accepted by [`solve_s`].
pub const SOLVE_TOL: f64 = 1e-9;
const SOLVE_MAX_ITERS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CopulaError {
    #[error("value {0} is outside [0, 1]")]
    OutOfUnit(f64),
    #[error("copula parameter must be a positive number, 0, 1 or inf; got {0}")]
    InvalidParam(String),
    #[error("p = {p} is outside the Frechet bounds [{lower}, {upper}]")]
    Infeasible { p: f64, lower: f64, upper: f64 },
    #[error(
        "p = {p} lies between a limit and the nearest representable finite s; \
         closest parameter {closest} leaves residual {residual:e}"
    )]
    NotRepresentable {
        p: f64,
        closest: CopulaParam,
        residual: f64,
    },
}

/// A probability-like value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct UnitValue(f64);

impl UnitValue {
    pub const ZERO: UnitValue = UnitValue(0.0);
    pub const ONE: UnitValue = UnitValue(1.0);

    /// Accepts `v` in `[-1e-12, 1 + 1e-12]`, clamping the slack away.
    pub fn new(v: f64) -> Result<Self, CopulaError> {
        if !(-UNIT_EPS..=1.0 + UNIT_EPS).contains(&v) {
            return Err(CopulaError::OutOfUnit(v));
        }
        Ok(UnitValue(v.clamp(0.0, 1.0)))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for UnitValue {
    type Error = CopulaError;

    fn try_from(v: f64) -> Result<Self, Self::Error> {
        UnitValue::new(v)
    }
}

impl From<UnitValue> for f64 {
    fn from(u: UnitValue) -> f64 {
        u.0
    }
}

impl fmt::Display for UnitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// The Frank parameter `s`, with its three limits as distinct variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CopulaParam {
    Zero,
    One,
    Infinity,
    /// `0 < s < inf` and `|s - 1| >= ONE_THRESHOLD`.
    Finite(f64),
}

impl CopulaParam {
    /// Builds a parameter from a raw `s >= 0`, mapping `0`, `inf` and values
    /// within the one-threshold of `1` onto the limit variants.
    pub fn new(s: f64) -> Result<Self, CopulaError> {
        if s.is_nan() || s < 0.0 {
            return Err(CopulaError::InvalidParam(s.to_string()));
        }
        Ok(if s == 0.0 {
            CopulaParam::Zero
        } else if s == f64::INFINITY {
            CopulaParam::Infinity
        } else if (s - 1.0).abs() < ONE_THRESHOLD {
            CopulaParam::One
        } else {
            CopulaParam::Finite(s)
        })
    }

    /// The numeric value of `s` (`0`, `1` or `inf` for the limits).
    pub fn value(self) -> f64 {
        match self {
            CopulaParam::Zero => 0.0,
            CopulaParam::One => 1.0,
            CopulaParam::Infinity => f64::INFINITY,
            CopulaParam::Finite(s) => s,
        }
    }

    /// The variant actually used for evaluation after threshold dispatch.
    fn effective(self) -> CopulaParam {
        match self {
            CopulaParam::Finite(s) if s < ZERO_THRESHOLD => CopulaParam::Zero,
            CopulaParam::Finite(s) if s > INFINITY_THRESHOLD => CopulaParam::Infinity,
            CopulaParam::Finite(s) if (s - 1.0).abs() < ONE_THRESHOLD => CopulaParam::One,
            other => other,
        }
    }
}

impl fmt::Display for CopulaParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CopulaParam::Zero => write!(f, "0"),
            CopulaParam::One => write!(f, "1"),
            CopulaParam::Infinity => write!(f, "inf"),
            CopulaParam::Finite(s) => write!(f, "{s}"),
        }
    }
}

impl FromStr for CopulaParam {
    type Err = CopulaError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let t = text.trim().to_ascii_lowercase();
        match t.as_str() {
            "inf" | "infinity" | "∞" => Ok(CopulaParam::Infinity),
            _ => {
                let s: f64 = t
                    .parse()
                    .map_err(|_| CopulaError::InvalidParam(text.to_string()))?;
                CopulaParam::new(s)
            }
        }
    }
}

/// Closed form for finite `s`, using `exp_m1`/`ln_1p` so that the
/// `(s^x - 1)` factors and the outer logarithm keep precision near `s = 1`.
///
/// For `s < 1` both `ln(...)` and `ln s` are negative and the quotient is
/// still the base-`s` logarithm.
fn frank_closed_form(s: f64, x: f64, y: f64) -> f64 {
    // ln_1p only helps near s = 1; far from it `s - 1` loses the low bits of s.
    let ln_s = if (s - 1.0).abs() < 0.5 { (s - 1.0).ln_1p() } else { s.ln() };
    let fx = (x * ln_s).exp_m1();
    let fy = (y * ln_s).exp_m1();
    let denom = ln_s.exp_m1();
    (fx * fy / denom).ln_1p() / ln_s
}

fn clamp_unit(v: f64) -> UnitValue {
    // Rounding in the closed form can overshoot [0, 1] by a few ulps.
    UnitValue(v.clamp(0.0, 1.0))
}

pub(crate) fn and_raw(s: CopulaParam, x: f64, y: f64) -> f64 {
    match s.effective() {
        CopulaParam::Zero => x.min(y),
        CopulaParam::One => x * y,
        CopulaParam::Infinity => (x + y - 1.0).max(0.0),
        CopulaParam::Finite(s) => frank_closed_form(s, x, y).clamp(0.0, x.min(y)),
    }
}

pub(crate) fn xor_raw(s: CopulaParam, x: f64, y: f64) -> f64 {
    match s.effective() {
        CopulaParam::Zero => (x - y).abs(),
        CopulaParam::One => x + y - 2.0 * x * y,
        CopulaParam::Infinity => (x + y).min(1.0) - (x + y - 1.0).max(0.0),
        CopulaParam::Finite(_) => x + y - 2.0 * and_raw(s, x, y),
    }
}

/// Frank's copula `A_s(x, y)`: the probability of "x and y".
pub fn frank_and(s: CopulaParam, x: UnitValue, y: UnitValue) -> UnitValue {
    clamp_unit(and_raw(s, x.0, y.0))
}

/// The dual `R_s(x, y) = x + y - A_s(x, y)`: the probability of "x or y".
pub fn frank_or(s: CopulaParam, x: UnitValue, y: UnitValue) -> UnitValue {
    clamp_unit(x.0 + y.0 - and_raw(s, x.0, y.0))
}

/// The xor family `F_s(x, y) = x + y - 2 A_s(x, y)`.
pub fn xor_f(s: CopulaParam, x: UnitValue, y: UnitValue) -> UnitValue {
    clamp_unit(xor_raw(s, x.0, y.0))
}

/// Finds `s` with `A_s(x, y) = p`.
///
/// `A_s` is non-increasing in `s`, so the search bisects over
/// `t = s / (1 + s)` between the dispatch thresholds. Values of `p` at a
/// Frechet bound (within [`SOLVE_TOL`]) map to `Zero` or `Infinity`.
pub fn solve_s(x: UnitValue, y: UnitValue, p: UnitValue) -> Result<CopulaParam, CopulaError> {
    let (x, y, p) = (x.0, y.0, p.0);
    let upper = x.min(y);
    let lower = (x + y - 1.0).max(0.0);
    if p > upper + SOLVE_TOL || p < lower - SOLVE_TOL {
        return Err(CopulaError::Infeasible { p, lower, upper });
    }
    if (p - upper).abs() < SOLVE_TOL {
        return Ok(CopulaParam::Zero);
    }
    if (p - lower).abs() < SOLVE_TOL {
        return Ok(CopulaParam::Infinity);
    }
    if (p - x * y).abs() < SOLVE_TOL {
        return Ok(CopulaParam::One);
    }

    let eval = |t: f64| {
        let s = t / (1.0 - t);
        and_raw(CopulaParam::Finite(s), x, y)
    };
    let mut lo = ZERO_THRESHOLD / (1.0 + ZERO_THRESHOLD);
    let mut hi = INFINITY_THRESHOLD / (1.0 + INFINITY_THRESHOLD);
    let (a_lo, a_hi) = (eval(lo), eval(hi));
    if p > a_lo || p < a_hi {
        let (closest, residual) = if p > a_lo {
            (CopulaParam::Finite(ZERO_THRESHOLD), p - a_lo)
        } else {
            (CopulaParam::Finite(INFINITY_THRESHOLD), a_hi - p)
        };
        return Err(CopulaError::NotRepresentable {
            p,
            closest,
            residual,
        });
    }
    let mut best = (f64::INFINITY, 0.5);
    for _ in 0..SOLVE_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        let a = eval(mid);
        let residual = (a - p).abs();
        if residual < best.0 {
            best = (residual, mid);
        }
        if residual < SOLVE_TOL * 1e-3 || hi - lo < f64::EPSILON {
            break;
        }
        if a > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = best.1 / (1.0 - best.1);
    let param = CopulaParam::new(s)?;
    if best.0 >= SOLVE_TOL {
        return Err(CopulaError::NotRepresentable {
            p,
            closest: param,
            residual: best.0,
        });
    }
    Ok(param)
}

/// Heaviside step with `u(0) = 0`.
pub fn heaviside(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(v: f64) -> UnitValue {
        UnitValue::new(v).unwrap()
    }

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }

    const REPRESENTATIVE: [f64; 6] = [0.01, 0.5, 0.75, 1.25, 2.0, 20.0];

    fn params() -> Vec<CopulaParam> {
        let mut v = vec![CopulaParam::Zero, CopulaParam::One, CopulaParam::Infinity];
        v.extend(REPRESENTATIVE.iter().map(|&s| CopulaParam::new(s).unwrap()));
        v
    }

    #[test]
    fn unit_value_construction() {
        assert_eq!(u(1.0 + 5e-13).get(), 1.0);
        assert_eq!(u(-5e-13).get(), 0.0);
        assert!(UnitValue::new(1.0 + 1e-9).is_err());
        assert!(UnitValue::new(f64::NAN).is_err());
    }

    #[test]
    fn param_parsing_and_dispatch() {
        assert_eq!("inf".parse::<CopulaParam>().unwrap(), CopulaParam::Infinity);
        assert_eq!("0".parse::<CopulaParam>().unwrap(), CopulaParam::Zero);
        assert_eq!("1".parse::<CopulaParam>().unwrap(), CopulaParam::One);
        assert_eq!("1.0000001".parse::<CopulaParam>().unwrap(), CopulaParam::One);
        assert_eq!("2".parse::<CopulaParam>().unwrap(), CopulaParam::Finite(2.0));
        assert!("-1".parse::<CopulaParam>().is_err());
        assert!("abc".parse::<CopulaParam>().is_err());
        assert_eq!(CopulaParam::Finite(1e-9).effective(), CopulaParam::Zero);
        assert_eq!(CopulaParam::Finite(1e9).effective(), CopulaParam::Infinity);
    }

    #[test]
    fn and_point_values() {
        assert_eq!(frank_and(CopulaParam::One, u(0.5), u(0.5)).get(), 0.25);
        assert!((frank_and(CopulaParam::Infinity, u(0.4), u(0.7)).get() - 0.1).abs() < 1e-15);
        // High-precision oracle values of the closed form.
        let cases = [
            (2.0, 0.5, 0.5, 0.228_446_696_836_388_03),
            (2.0, 0.3, 0.8, 0.228_112_340_481_184_40),
            (0.5, 0.25, 0.75, 0.199_255_466_318_375_85),
            (20.0, 0.6, 0.7, 0.354_518_240_667_541_63),
        ];
        for (s, x, y, want) in cases {
            let got = frank_and(CopulaParam::Finite(s), u(x), u(y)).get();
            assert!((got - want).abs() < 1e-14, "A_{s}({x},{y}) = {got}, want {want}");
        }
    }

    #[test]
    fn sub_one_quadrant_uses_negative_logs() {
        // For s < 1 numerator and denominator logs are both negative.
        let s = 0.25f64;
        let arg: f64 = 1.0 + (s.powf(0.4) - 1.0) * (s.powf(0.6) - 1.0) / (s - 1.0);
        assert!(arg.ln() < 0.0 && s.ln() < 0.0);
        let direct = arg.ln() / s.ln();
        let got = frank_and(CopulaParam::Finite(s), u(0.4), u(0.6)).get();
        assert!((got - direct).abs() < 1e-14);
        assert!(got > 0.4 * 0.6 && got <= 0.4);
    }

    #[test]
    fn or_point_values() {
        assert_eq!(frank_or(CopulaParam::One, u(0.5), u(0.5)).get(), 0.75);
        assert_eq!(frank_or(CopulaParam::Infinity, u(0.4), u(0.7)).get(), 1.0);
        for s in params() {
            for t in grid(11) {
                assert!((frank_or(s, u(0.0), u(t)).get() - t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn xor_point_values() {
        let (x, y) = (u(0.75), u(0.25));
        assert_eq!(xor_f(CopulaParam::Zero, x, y).get(), 0.5);
        assert_eq!(xor_f(CopulaParam::One, x, y).get(), 0.625);
        assert_eq!(xor_f(CopulaParam::Infinity, x, y).get(), 1.0);
        for s in params() {
            assert!((xor_f(s, u(1.0), u(0.0)).get() - 1.0).abs() < 1e-12);
            assert!((xor_f(s, u(0.0), u(1.0)).get() - 1.0).abs() < 1e-12);
            assert!(xor_f(s, u(1.0), u(1.0)).get().abs() < 1e-12);
            assert!(xor_f(s, u(0.0), u(0.0)).get().abs() < 1e-12);
        }
        // A_s(0.5, 0.5) = 0.3 at s ~ 0.193, so F_s(0.5, 0.5) = 1 - 0.6.
        let s = solve_s(u(0.5), u(0.5), u(0.3)).unwrap();
        assert!((xor_f(s, u(0.5), u(0.5)).get() - 0.4).abs() < 1e-9);
        let f = xor_f(CopulaParam::Finite(0.193), u(0.5), u(0.5)).get();
        assert!((f - 0.4).abs() < 1e-3);
    }

    #[test]
    fn solve_s_examples() {
        let s = solve_s(u(0.5), u(0.5), u(0.3)).unwrap();
        let CopulaParam::Finite(v) = s else { panic!("expected finite s, got {s}") };
        assert!((v - 0.193).abs() < 1e-3, "s = {v}");
        // High-precision root of A_s(0.5, 0.5) = 0.3.
        assert!((v - 0.193_142_606_601_928_59).abs() < 1e-7);
        assert!((frank_and(s, u(0.5), u(0.5)).get() - 0.3).abs() < SOLVE_TOL);

        assert_eq!(solve_s(u(0.5), u(0.5), u(0.25)).unwrap(), CopulaParam::One);
        assert_eq!(solve_s(u(0.4), u(0.7), u(0.1)).unwrap(), CopulaParam::Infinity);
        assert_eq!(solve_s(u(0.4), u(0.7), u(0.4)).unwrap(), CopulaParam::Zero);
    }

    #[test]
    fn solve_s_recovers_parameters() {
        for s in [0.001, 0.05, 0.5, 0.9, 1.1, 3.0, 50.0, 1e5] {
            for (x, y) in [(0.3, 0.6), (0.5, 0.5), (0.8, 0.45)] {
                let p = frank_and(CopulaParam::Finite(s), u(x), u(y));
                let found = solve_s(u(x), u(y), p).unwrap();
                assert!((frank_and(found, u(x), u(y)).get() - p.get()).abs() < SOLVE_TOL);
            }
        }
    }

    #[test]
    fn solve_s_errors() {
        let err = solve_s(u(0.5), u(0.5), u(0.6)).unwrap_err();
        assert_eq!(
            err,
            CopulaError::Infeasible {
                p: 0.6,
                lower: 0.0,
                upper: 0.5
            }
        );
        assert!(matches!(
            solve_s(u(0.4), u(0.7), u(0.05)),
            Err(CopulaError::Infeasible { .. })
        ));
        // Between A_0 and A_{1e-8}: no parameter reaches it within tolerance.
        assert!(matches!(
            solve_s(u(0.5), u(0.5), u(0.49)),
            Err(CopulaError::NotRepresentable { .. })
        ));
    }

    #[test]
    fn heaviside_values() {
        assert_eq!(heaviside(0.0), 0.0);
        assert_eq!(heaviside(5.0), 1.0);
        assert_eq!(heaviside(-1e-300), 0.0);
    }

    #[test]
    fn heaviside_identities_away_from_ties() {
        let g = grid(21);
        for &x in &g {
            for &y in &g {
                if x == y {
                    continue;
                }
                let min = x * heaviside(y - x) + y * heaviside(x - y);
                let max = x * heaviside(x - y) + y * heaviside(y - x);
                assert_eq!(min, x.min(y));
                assert_eq!(max, x.max(y));
                assert_eq!(max - min, (x - y).abs());
                let sum = (x * heaviside(y - x) + x * heaviside(x - y))
                    + (y * heaviside(y - x) + y * heaviside(x - y));
                assert_eq!(sum, x + y);
            }
            assert_eq!(x * heaviside(x) + x * heaviside(-x), x);
            assert_eq!(x * heaviside(x) + (-x) * heaviside(-x), x.abs());
        }
        // At a tie every indicator vanishes under u(0) = 0.
        assert_eq!(0.5 * heaviside(0.0) + 0.5 * heaviside(0.0), 0.0);
    }

    #[test]
    fn copula_laws_on_grid() {
        let g = grid(21);
        for s in params() {
            for &x in &g {
                for &y in &g {
                    let (ux, uy) = (u(x), u(y));
                    let a = frank_and(s, ux, uy).get();
                    let r = frank_or(s, ux, uy).get();
                    assert!((a + r - (x + y)).abs() < 1e-12, "s={s} x={x} y={y}");
                    let lo = frank_and(CopulaParam::Infinity, ux, uy).get();
                    let hi = frank_and(CopulaParam::Zero, ux, uy).get();
                    assert!(lo - 1e-10 <= a && a <= hi + 1e-10);
                    let f = xor_f(s, ux, uy).get();
                    let f0 = xor_f(CopulaParam::Zero, ux, uy).get();
                    let finf = xor_f(CopulaParam::Infinity, ux, uy).get();
                    assert!(f0 - 1e-10 <= f && f <= finf + 1e-10, "s={s} x={x} y={y}");
                }
                let ux = u(x);
                assert!(frank_and(s, u(0.0), ux).get().abs() < 1e-12);
                assert!(frank_and(s, ux, u(0.0)).get().abs() < 1e-12);
                assert!((frank_and(s, u(1.0), ux).get() - x).abs() < 1e-12);
                assert!((frank_and(s, ux, u(1.0)).get() - x).abs() < 1e-12);
                assert!((frank_or(s, ux, u(0.0)).get() - x).abs() < 1e-12);
                assert!((frank_or(s, u(1.0), ux).get() - 1.0).abs() < 1e-12);
                assert!((xor_f(s, ux, u(0.0)).get() - x).abs() < 1e-12);
                assert!((xor_f(s, u(0.0), ux).get() - x).abs() < 1e-12);
                assert!((xor_f(s, ux, u(1.0)).get() - (1.0 - x)).abs() < 1e-12);
                assert!((xor_f(s, u(1.0), ux).get() - (1.0 - x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn limit_forms_match_closed_xor() {
        for &x in &grid(11) {
            for &y in &grid(11) {
                let f0 = xor_f(CopulaParam::Zero, u(x), u(y)).get();
                let max_min = x.max(y) - x.min(y);
                assert!((f0 - max_min).abs() < 1e-15);
                let finf = xor_f(CopulaParam::Infinity, u(x), u(y)).get();
                assert!((finf - (x + y - 2.0 * (x + y - 1.0).max(0.0))).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn continuity_near_one() {
        for &x in &grid(21) {
            for &y in &grid(21) {
                let one = frank_and(CopulaParam::One, u(x), u(y)).get();
                for s in [1.0 + 1e-6, 1.0 - 1e-6, 1.0 + 1e-5, 1.0 - 1e-5] {
                    let near = and_raw(CopulaParam::Finite(s), x, y);
                    assert!((near - one).abs() < 1e-5, "s={s} x={x} y={y}");
                }
            }
        }
    }

    #[test]
    fn convergence_towards_zero_and_infinity_limits() {
        // The family approaches its outer limits only logarithmically:
        // the gap is at most ln 2 / |ln s| and is attained on the tie lines.
        for (s, limit) in [(1e-8, CopulaParam::Zero), (1e8, CopulaParam::Infinity)] {
            let bound = std::f64::consts::LN_2 / f64::ln(s).abs();
            let mut worst: f64 = 0.0;
            for &x in &grid(21) {
                for &y in &grid(21) {
                    let near = and_raw(CopulaParam::Finite(s), x, y);
                    let lim = and_raw(limit, x, y);
                    worst = worst.max((near - lim).abs());
                }
            }
            assert!(worst <= bound + 1e-12, "s={s}: {worst} > {bound}");
            assert!(worst > 1e-4);
        }
        // Oracle values at the thresholds, from high-precision evaluation.
        assert!((and_raw(CopulaParam::Finite(1e-8), 0.5, 0.5) - 0.462_376_678_951_610_18).abs() < 1e-12);
        assert!((and_raw(CopulaParam::Finite(1e8), 0.5, 0.5) - 0.037_623_321_048_389_816).abs() < 1e-12);
    }

    #[test]
    fn commutative_and_associative() {
        let pts = [0.05, 0.2, 0.37, 0.5, 0.64, 0.81, 0.99];
        for s in params() {
            for &x in &pts {
                for &y in &pts {
                    let xy = frank_and(s, u(x), u(y)).get();
                    assert!((xy - frank_and(s, u(y), u(x)).get()).abs() < 1e-10);
                    for &z in &pts {
                        let left = frank_and(s, frank_and(s, u(x), u(y)), u(z)).get();
                        let right = frank_and(s, u(x), frank_and(s, u(y), u(z))).get();
                        assert!((left - right).abs() < 1e-10, "s={s} ({x},{y},{z})");
                    }
                }
            }
        }
    }
}
