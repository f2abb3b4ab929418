#![allow(dead_code)]

//! Reference implementations that share no code with the library.

/// Modified Bessel function I0 by its power series.
pub fn bessel_i0(z: f64) -> f64 {
    let q = z * z / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Density of `|h|²` for a unit-mean Rician channel with linear K-factor `k`.
pub fn rician_power_pdf(k: f64, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    (k + 1.0) * (-k - (k + 1.0) * x).exp() * bessel_i0(2.0 * (k * (k + 1.0) * x).sqrt())
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `P(|h|² <= rho)` by integrating the density.
pub fn rician_power_cdf_quadrature(k_db: f64, rho: f64) -> f64 {
    let k = 10f64.powf(k_db / 10.0);
    integrate(&|x| rician_power_pdf(k, x), 0.0, rho, 1e-13)
}

/// Bit error rate of coherent BPSK in AWGN, `Q(sqrt(2 g))`, via the
/// trapezoid-free Craig form `1/pi * int_0^{pi/2} exp(-g / sin^2 t) dt`.
pub fn bpsk_awgn_ber(snr_db: f64) -> f64 {
    let g = 10f64.powf(snr_db / 10.0);
    integrate(
        &|t: f64| {
            let s = t.sin();
            if s == 0.0 {
                0.0
            } else {
                (-g / (s * s)).exp()
            }
        },
        0.0,
        std::f64::consts::FRAC_PI_2,
        // The integrand peaks at exp(-g); keep the tolerance relative.
        1e-14 * (-g).exp(),
    ) / std::f64::consts::PI
}

/// Average BPSK bit error rate over flat Rayleigh fading.
pub fn bpsk_rayleigh_ber(snr_db: f64) -> f64 {
    let g = 10f64.powf(snr_db / 10.0);
    0.5 * (1.0 - (g / (1.0 + g)).sqrt())
}

/// End-to-end error rate of two cascaded binary symmetric channels.
pub fn bsc_cascade(p1: f64, p2: f64) -> f64 {
    p1 + p2 - 2.0 * p1 * p2
}
