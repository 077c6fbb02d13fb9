use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln √(2π)
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Principal-branch log Γ(z) (Lanczos, g = 7), with reflection for Re z < 1/2.
pub fn complex_log_gamma(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return Err(Error::Pole { z });
    }
    if z.re < 0.5 {
        // ln Γ(z) = ln π − ln sin(πz) − ln Γ(1 − z)
        let sin = (z * PI).sin();
        let rest = complex_log_gamma(Complex64::new(1.0, 0.0) - z)?;
        let mut value = Complex64::new(PI.ln(), 0.0) - sin.ln() - rest;
        // Keep the imaginary part on the branch continuous from the right half-plane.
        value.im = reflection_branch(z, value.im);
        return Ok(value);
    }
    let z = z - 1.0;
    let mut series = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(HALF_LN_TWO_PI + (z + 0.5) * t.ln() - t + series.ln())
}

/// For real negative arguments the principal log of a negative Γ value has
/// imaginary part ±π; we pin it to the sign pattern of Γ on (−k−1, −k).
fn reflection_branch(z: Complex64, im: f64) -> f64 {
    if z.im != 0.0 {
        return im;
    }
    let negative = (z.re.floor() as i64).rem_euclid(2) == 1;
    if negative {
        PI
    } else {
        0.0
    }
}

/// Real log Γ(x), x > 0.
pub fn ln_gamma_real(x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::NonpositiveArgument(x));
    }
    Ok(complex_log_gamma(Complex64::new(x, 0.0))?.re)
}
