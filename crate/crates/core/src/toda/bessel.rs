//! Modified Bessel functions of orders 0 and 1 for real non-negative arguments.
//!
//! `I`: power series up to `x = 40`, Hankel asymptotic expansion beyond.
//! `K`: series for `x < 2`, Steed's continued fraction (Temme's form) otherwise.

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_ARG: f64 = 700.0;
const SERIES_LIMIT: f64 = 40.0;

fn check(x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(Error::OutOfRange(format!("Bessel argument must be non-negative, got {x}")));
    }
    if x > MAX_ARG {
        return Err(Error::OutOfRange(format!("Bessel argument {x} exceeds {MAX_ARG} (overflow range)")));
    }
    Ok(())
}

fn i_series(nu: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = (0.5 * x).powi(nu as i32) / (1..=nu).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..500 {
        term *= q / (k as f64 * (k + nu) as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

fn i_asymptotic(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    x.exp() / (2.0 * std::f64::consts::PI * x).sqrt() * sum
}

pub fn bessel_i0(x: f64) -> Result<f64> {
    check(x)?;
    Ok(if x <= SERIES_LIMIT { i_series(0, x) } else { i_asymptotic(0, x) })
}

pub fn bessel_i1(x: f64) -> Result<f64> {
    check(x)?;
    Ok(if x <= SERIES_LIMIT { i_series(1, x) } else { i_asymptotic(1, x) })
}

/// `(K_0(x), K_1(x))`.
fn k01(x: f64) -> (f64, f64) {
    if x < 2.0 {
        let q = 0.25 * x * x;
        let lg = (0.5 * x).ln();
        // K0 = -(ln(x/2) + gamma) I0 + sum q^k/(k!)^2 H_k
        let mut term = 1.0;
        let mut harmonic = 0.0;
        let mut k0 = -(lg + EULER_GAMMA);
        // K1 = 1/x + ln(x/2) I1 - (x/4) sum (psi(k+1) + psi(k+2)) q^k / (k!(k+1)!)
        let mut t1 = 1.0;
        let mut psi_sum = 2.0 * (-EULER_GAMMA) + 1.0;
        let mut k1_sum = psi_sum;
        for k in 1..60 {
            let kf = k as f64;
            term *= q / (kf * kf);
            harmonic += 1.0 / kf;
            k0 += term * (harmonic - lg - EULER_GAMMA);
            t1 *= q / (kf * (kf + 1.0));
            psi_sum += 1.0 / kf + 1.0 / (kf + 1.0);
            k1_sum += t1 * psi_sum;
            if term < 1e-18 && t1 < 1e-18 {
                break;
            }
        }
        let k1 = 1.0 / x + lg * i_series(1, x) - 0.25 * x * k1_sum;
        (k0, k1)
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..100_000 {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < 1e-17 {
                break;
            }
        }
        let h = a1 * h;
        let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
        let k1 = k0 * (x + 0.5 - h) / x;
        (k0, k1)
    }
}

pub fn bessel_k0(x: f64) -> Result<f64> {
    check(x)?;
    if x == 0.0 {
        return Err(Error::OutOfRange("K0 is singular at 0".into()));
    }
    Ok(k01(x).0)
}

pub fn bessel_k1(x: f64) -> Result<f64> {
    check(x)?;
    if x == 0.0 {
        return Err(Error::OutOfRange("K1 is singular at 0".into()));
    }
    Ok(k01(x).1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn reference_values() {
        assert_eq!(bessel_i0(0.0).unwrap(), 1.0);
        assert!(rel(bessel_i0(1.0).unwrap(), 1.266_065_877_752_008_4) < 1e-15);
        // Tabulated values.
        assert!(rel(bessel_i0(10.0).unwrap(), 2815.716_628_466_254) < 1e-13);
        assert!(rel(bessel_i1(1.0).unwrap(), 0.565_159_103_992_485_0) < 1e-14);
        assert!(rel(bessel_k0(1.0).unwrap(), 0.421_024_438_240_708_3) < 1e-14);
        assert!(rel(bessel_k1(1.0).unwrap(), 0.601_907_230_197_234_6) < 1e-14);
        assert!(rel(bessel_k0(2.0).unwrap(), 0.113_893_872_749_533_4) < 1e-14);
        assert!(rel(bessel_k0(5.0).unwrap(), 3.691_098_334_042_594e-3) < 1e-14);
        assert!(rel(bessel_k1(0.1).unwrap(), 9.853_844_780_870_606) < 1e-14);
    }

    #[test]
    fn small_argument_limit_of_k0() {
        let x = 1e-8;
        let approx = -(x / 2.0f64).ln() - EULER_GAMMA;
        assert!(rel(bessel_k0(x).unwrap(), approx) < 1e-14);
    }

    #[test]
    fn wronskian() {
        for x in [0.05, 0.5, 1.0, 1.99, 2.0, 3.7, 12.0, 39.9, 40.1, 80.0] {
            let w = bessel_i1(x).unwrap() * bessel_k0(x).unwrap() + bessel_i0(x).unwrap() * bessel_k1(x).unwrap();
            assert!(rel(w, 1.0 / x) < 2e-14, "x = {x}: {w}");
        }
    }

    #[test]
    fn series_and_asymptotic_agree_at_the_switch() {
        for nu in [0, 1] {
            assert!(rel(i_asymptotic(nu, 40.0), i_series(nu, 40.0)) < 1e-14);
        }
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(bessel_i0(-1.0).is_err());
        assert!(bessel_i0(701.0).is_err());
        assert!(bessel_k0(0.0).is_err());
        assert!(bessel_i0(f64::NAN).is_err());
    }
}
