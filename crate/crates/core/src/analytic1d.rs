//! Closed-form solutions of the one-dimensional film on an elastic foundation.
//!
//! The bar `(-L, L)` with modulus `mu`, adhesion `beta` and toughness `Gc` is
//! loaded by `g(t, x) = t x`. A crack-free minimizer has energy `t^2 F(L)` with
//! `F(L) = mu (L - tanh(kL)/k)` and `k = sqrt(2 beta / mu)`; a configuration
//! with `m` equally spaced cracks costs `m Gc + t^2 (m+1) F(L/(m+1))`. From these
//! follow the critical transition times, the dyadic halving sequence and the
//! width of the boundary layer near the bar ends.

use crate::error::{Error, Result};

/// Default upper bound on the crack count searched by [`optimal_crack_count`].
pub const DEFAULT_M_MAX: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar1DParams {
    pub half_length: f64,
    pub mu: f64,
    pub beta: f64,
    pub toughness: f64,
}

impl Bar1DParams {
    pub fn new(half_length: f64, mu: f64, beta: f64, toughness: f64) -> Result<Self> {
        for (field, value) in [
            ("L", half_length),
            ("mu", mu),
            ("beta", beta),
            ("Gc", toughness),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::param(field, format!("must be positive, got {value}")));
            }
        }
        Ok(Self {
            half_length,
            mu,
            beta,
            toughness,
        })
    }

    pub fn with_half_length(self, half_length: f64) -> Self {
        Self { half_length, ..self }
    }

    /// Parameters of the reference experiments: `mu = 1, beta = 0.15, Gc = 1`.
    pub fn reference(half_length: f64) -> Self {
        Self {
            half_length,
            mu: 1.0,
            beta: 0.15,
            toughness: 1.0,
        }
    }
}

/// Reference point `x*` of a boundary layer computed on a bar of half-length `L*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer1DQuery {
    pub x_star: f64,
    pub l_star: f64,
}

impl Layer1DQuery {
    pub fn new(x_star: f64, l_star: f64) -> Result<Self> {
        if !(0.0 < x_star && x_star < l_star) {
            return Err(Error::param("xstar", format!("need 0 < x* < L*, got x*={x_star}, L*={l_star}")));
        }
        Ok(Self { x_star, l_star })
    }
}

/// Inverse decay length `k = sqrt(2 beta / mu)` of the crack-free solution.
pub fn decay_rate(params: &Bar1DParams) -> f64 {
    (2.0 * params.beta / params.mu).sqrt()
}

/// Crack-free Neumann solution `u(t, x) = t (x - sinh(kx) / (k cosh(kL)))`.
pub fn u_continuous(t: f64, x: f64, params: &Bar1DParams) -> f64 {
    let k = decay_rate(params);
    let l = params.half_length;
    // sinh(kx)/cosh(kL) written to stay finite for large kL
    let ratio = if (k * l) > 20.0 {
        let s = (k * (x.abs() - l)).exp() * (1.0 - (-2.0 * k * x.abs()).exp())
            / (1.0 + (-2.0 * k * l).exp());
        s.copysign(x)
    } else {
        (k * x).sinh() / (k * l).cosh()
    };
    t * (x - ratio / k)
}

/// Strain `u'(1, x) = 1 - cosh(kx)/cosh(kL)` of the crack-free solution at unit time.
pub fn strain_continuous(x: f64, params: &Bar1DParams) -> f64 {
    let k = decay_rate(params);
    1.0 - cosh_ratio(k * x, k * params.half_length)
}

fn cosh_ratio(a: f64, b: f64) -> f64 {
    // cosh(a)/cosh(b), stable for large arguments
    let (a, b) = (a.abs(), b.abs());
    (a - b).exp() * (1.0 + (-2.0 * a).exp()) / (1.0 + (-2.0 * b).exp())
}

/// `tanh(z)/z` with its Taylor expansion near zero.
fn tanh_over(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 3.0 + 2.0 * z2 * z2 / 15.0
    } else {
        z.tanh() / z
    }
}

/// Crack-free energy at unit time, `F(L) = mu (L - tanh(kL)/k)`.
pub fn f_hat(half_length: f64, params: &Bar1DParams) -> f64 {
    let k = decay_rate(params);
    let z = k * half_length;
    if z < 1e-3 {
        // L - tanh(z)/k = L (1 - tanh(z)/z); series avoids cancellation
        let z2 = z * z;
        params.mu * half_length * (z2 / 3.0 - 2.0 * z2 * z2 / 15.0 + 17.0 * z2 * z2 * z2 / 315.0)
    } else {
        params.mu * half_length * (1.0 - tanh_over(z))
    }
}

/// Energy gap `F(L) - 2 F(L/2) = (mu/k)(2 tanh(kL/2) - tanh(kL))` between no crack and one crack.
pub fn delta2(half_length: f64, params: &Bar1DParams) -> f64 {
    let k = decay_rate(params);
    let z = k * half_length;
    if z < 1e-3 {
        // 2 tanh(z/2) - tanh(z) = z^3/4 - 5 z^5/48 + ...
        let z3 = z * z * z;
        params.mu / k * (z3 / 4.0 - 5.0 * z3 * z * z / 48.0)
    } else {
        params.mu / k * (2.0 * (0.5 * z).tanh() - z.tanh())
    }
}

/// Energy of the configuration with `m` equally spaced cracks at time `t`.
pub fn crack_energy(t: f64, half_length: f64, m: usize, params: &Bar1DParams) -> f64 {
    let pieces = (m + 1) as f64;
    m as f64 * params.toughness + t * t * pieces * f_hat(half_length / pieces, params)
}

/// Time at which the `m`-crack energy equals the crack-free energy.
pub fn critical_time(half_length: f64, m: usize, params: &Bar1DParams) -> Result<f64> {
    if m == 0 {
        return Err(Error::param("m", "crack count must be at least 1"));
    }
    if !(half_length > 0.0) {
        return Err(Error::param("L", format!("must be positive, got {half_length}")));
    }
    let denom = if m == 1 {
        delta2(half_length, params)
    } else {
        let pieces = (m + 1) as f64;
        f_hat(half_length, params) - pieces * f_hat(half_length / pieces, params)
    };
    if !(denom > 0.0) {
        return Err(Error::Domain(format!(
            "non-positive energy gap {denom:e} for L={half_length}, m={m}"
        )));
    }
    Ok((m as f64 * params.toughness / denom).sqrt())
}

/// Dyadic halving sequence `[t_L, t_{L/2}, ..., t_{L/2^(K-1)}]`.
pub fn halving_times(half_length: f64, count: usize, params: &Bar1DParams) -> Result<Vec<f64>> {
    (0..count)
        .map(|k| critical_time(half_length / 2f64.powi(k as i32), 1, params))
        .collect()
}

/// Point `x >= 0` on a bar of half-length `L` with the same strain as `x*` on `L*`.
///
/// Solves `cosh(kx) = cosh(kL) cosh(kx*) / cosh(kL*)`.
pub fn layer_point(query: &Layer1DQuery, half_length: f64, params: &Bar1DParams) -> Result<f64> {
    let k = decay_rate(params);
    // log of the right-hand side, kept in log form so large kL cannot overflow
    let log_rhs = log_cosh(k * half_length) + log_cosh(k * query.x_star) - log_cosh(k * query.l_star);
    if log_rhs < -1e-14 {
        return Err(Error::Domain(format!(
            "cosh identity has no solution: right-hand side exp({log_rhs:e}) < 1"
        )));
    }
    let log_rhs = log_rhs.max(0.0);
    let rhs_minus_one = log_rhs.exp_m1();
    if rhs_minus_one < 1e-12 {
        return Ok(bisect_layer(log_rhs, k, half_length));
    }
    // acosh(y) = ln(y + sqrt(y^2 - 1)) = log_rhs + ln(1 + sqrt(1 - y^-2))
    let inv2 = (-2.0 * log_rhs).exp();
    Ok((log_rhs + (1.0 + (1.0 - inv2).sqrt()).ln()) / k)
}

fn bisect_layer(log_rhs: f64, k: f64, half_length: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, half_length.max(1.0 / k));
    while log_cosh(k * hi) < log_rhs {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_cosh(k * mid) < log_rhs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn log_cosh(z: f64) -> f64 {
    let z = z.abs();
    z + (-2.0 * z).exp().ln_1p() - std::f64::consts::LN_2
}

/// Asymptotic layer width `b = -ln(cosh(kx*)/cosh(kL*)) / k`, the limit of `L - x` as `L` grows.
pub fn layer_width(query: &Layer1DQuery, params: &Bar1DParams) -> f64 {
    let k = decay_rate(params);
    (log_cosh(k * query.l_star) - log_cosh(k * query.x_star)) / k
}

/// Crack count minimizing `m Gc + t^2 (m+1) F(L/(m+1))` over `0..=m_max`. Ties go to the smaller count.
pub fn optimal_crack_count(t: f64, half_length: f64, params: &Bar1DParams, m_max: usize) -> usize {
    let mut best = (0, crack_energy(t, half_length, 0, params));
    for m in 1..=m_max {
        let e = crack_energy(t, half_length, m, params);
        if e < best.1 {
            best = (m, e);
        }
    }
    best.0
}

/// Energies of a single crack splitting the bar into pieces of half-lengths
/// `l1` and `l2` (off-center), and of a centered crack on the same bar, at unit time.
pub fn verify_centered_optimality(l1: f64, l2: f64, params: &Bar1DParams) -> (f64, f64) {
    let off_center = params.toughness + f_hat(l1, params) + f_hat(l2, params);
    let centered = params.toughness + 2.0 * f_hat(0.5 * (l1 + l2), params);
    (off_center, centered)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> Bar1DParams {
        Bar1DParams::reference(6.5)
    }

    // Composite Simpson evaluation of 1/2 int mu |u'|^2 + beta |u - x|^2 on (-L, L) at t = 1.
    fn energy_by_quadrature(l: f64, p: &Bar1DParams) -> f64 {
        let p = p.with_half_length(l);
        let n = 20_000;
        let h = 2.0 * l / n as f64;
        let integrand = |x: f64| {
            let du = strain_continuous(x, &p);
            let gap = u_continuous(1.0, x, &p) - x;
            0.5 * p.mu * du * du + p.beta * gap * gap
        };
        let mut sum = integrand(-l) + integrand(l);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * integrand(-l + i as f64 * h);
        }
        sum * h / 3.0
    }

    #[test]
    fn decay_rate_values() {
        let mut p = reference();
        assert!((decay_rate(&p) - 0.5477226).abs() < 1e-7);
        p.beta = 0.5;
        assert!((decay_rate(&p) - 1.0).abs() < 1e-15);
        p.beta = 0.15;
        p.mu = 4.0;
        assert!((decay_rate(&p) - 0.2738613).abs() < 1e-7);
    }

    #[test]
    fn u_continuous_shape() {
        let p = reference();
        assert_eq!(u_continuous(3.0, 0.0, &p), 0.0);
        let h = 1e-6;
        for x in [-6.5, 6.5] {
            let d = (u_continuous(1.0, x + h, &p) - u_continuous(1.0, x - h, &p)) / (2.0 * h);
            assert!(d.abs() < 1e-8, "u'({x}) = {d}");
        }
        let k = decay_rate(&p);
        let tip = u_continuous(1.0, 6.5, &p);
        assert!((tip - (6.5 - (k * 6.5).tanh() / k)).abs() < 1e-12);
        assert!((tip - 4.67721).abs() < 1e-5);
        // large-argument branch agrees with the direct one
        let far = Bar1DParams::reference(40.0);
        let x = 39.0;
        let direct = x - (decay_rate(&far) * x).sinh() / ((decay_rate(&far) * 40.0).cosh() * decay_rate(&far));
        assert!((u_continuous(1.0, x, &far) - direct).abs() < 1e-10);
    }

    #[test]
    fn f_hat_matches_quadrature_oracle() {
        let p = reference();
        assert!(f_hat(1e-8, &p) < 1e-12);
        for (l, expected) in [(6.5, 4.67721), (12.5, 10.67421)] {
            let closed = f_hat(l, &p);
            assert!((closed - expected).abs() < 1e-4, "F({l}) = {closed}");
            assert!((closed - energy_by_quadrature(l, &p)).abs() < 1e-6);
        }
        // series and direct branches join continuously
        let k = decay_rate(&p);
        let l = 1e-3 / k;
        let direct = p.mu * (l - (k * l).tanh() / k);
        assert!((f_hat(l * 0.999999, &p) - direct).abs() < 1e-13);
    }

    #[test]
    fn delta2_values() {
        let p = reference();
        assert!(delta2(1e-8, &p).abs() < 1e-12);
        let oracle = energy_by_quadrature(6.5, &p) - 2.0 * energy_by_quadrature(3.25, &p);
        assert!((delta2(6.5, &p) - oracle).abs() < 1e-6);
        assert!((delta2(6.5, &p) - 1.62674).abs() < 1e-4);
        assert!(delta2(6.5, &p) < delta2(12.5, &p));
    }

    #[test]
    fn critical_time_matches_energy_crossing() {
        let p = reference();
        let t1 = critical_time(6.5, 1, &p).unwrap();
        // closed form sqrt(1/1.6267854) = 0.7840340
        assert!((t1 - 0.784034).abs() < 1e-6, "{t1}");
        assert!((t1 - (1.0 / delta2(6.5, &p)).sqrt()).abs() < 1e-12);
        // bisection on F(t, u_0) = F(t, u_1)
        let gap = |t: f64| crack_energy(t, 6.5, 0, &p) - crack_energy(t, 6.5, 1, &p);
        let (mut lo, mut hi) = (0.0, 5.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if gap(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((0.5 * (lo + hi) - t1).abs() < 1e-10);
        for l in [6.5, 12.5] {
            let times: Vec<f64> = (1..=10).map(|m| critical_time(l, m, &p).unwrap()).collect();
            assert!(times.windows(2).all(|w| w[1] > w[0]), "{times:?}");
        }
        assert!(critical_time(6.5, 0, &p).is_err());
    }

    #[test]
    fn halving_sequence() {
        let p = reference();
        let times = halving_times(6.5, 4, &p).unwrap();
        assert_eq!(times.len(), 4);
        assert_eq!(times[0], critical_time(6.5, 1, &p).unwrap());
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        let oracle = energy_by_quadrature(3.25, &p) - 2.0 * energy_by_quadrature(1.625, &p);
        assert!((times[1] - (1.0 / oracle).sqrt()).abs() < 1e-6);
    }

    fn bisection_layer_oracle(q: &Layer1DQuery, l: f64, p: &Bar1DParams) -> f64 {
        let k = decay_rate(p);
        let target = (k * l).cosh() * (k * q.x_star).cosh() / (k * q.l_star).cosh();
        let (mut lo, mut hi) = (0.0, l);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (k * mid).cosh() < target {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn layer_point_values() {
        let p = reference();
        let q = Layer1DQuery::new(0.5, 6.5).unwrap();
        assert!((layer_point(&q, 6.5, &p).unwrap() - 0.5).abs() < 1e-9);
        let x = layer_point(&q, 12.5, &p).unwrap();
        assert!((x - bisection_layer_oracle(&q, 12.5, &p)).abs() < 1e-9);
        assert!((x - 7.33).abs() < 0.01, "{x}");
        assert!((12.5 - x - 5.17).abs() < 0.01);
        let gaps: Vec<f64> = (0..=20)
            .map(|i| 10.0 + 0.5 * i as f64)
            .map(|l| l - bisection_layer_oracle(&q, l, &p))
            .collect();
        let spread = gaps.iter().cloned().fold(f64::MIN, f64::max) - gaps.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 0.05, "{spread}");
        // too short a bar: the identity has no solution
        assert!(matches!(layer_point(&q, 0.1, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn layer_point_near_unity_uses_bisection() {
        let p = reference();
        let q = Layer1DQuery::new(1e-7, 6.5).unwrap();
        let x = layer_point(&q, 6.5, &p).unwrap();
        assert!((x - 1e-7).abs() < 1e-6);
    }

    #[test]
    fn layer_width_values() {
        let p = reference();
        let q = Layer1DQuery::new(0.5, 6.5).unwrap();
        let b = layer_width(&q, &p);
        assert!((b - 5.17).abs() < 0.01, "{b}");
        assert!((b - (20.0 - layer_point(&q, 20.0, &p).unwrap())).abs() < 0.02);
        let near = Layer1DQuery::new(6.5 - 1e-9, 6.5).unwrap();
        assert!(layer_width(&near, &p) < 1e-8);
        // for fixed (x*, L*) the width grows toward L* - x* as beta increases
        let stiff = Bar1DParams { beta: 0.6, ..p };
        let b_stiff = layer_width(&q, &stiff);
        assert!(b_stiff > b && b_stiff < 6.0, "{b_stiff}");
    }

    #[test]
    fn crack_count_predictor() {
        let p = reference();
        assert_eq!(optimal_crack_count(0.0, 6.5, &p, DEFAULT_M_MAX), 0);
        let t1 = critical_time(6.5, 1, &p).unwrap();
        let brute = |t: f64| {
            (0..=10)
                .map(|m| (m, crack_energy(t, 6.5, m, &p)))
                .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
                .0
        };
        assert_eq!(optimal_crack_count(0.99 * t1, 6.5, &p, 10), 0);
        assert_eq!(brute(0.99 * t1), 0);
        assert_eq!(optimal_crack_count(1.01 * t1, 6.5, &p, 10), 1);
        assert_eq!(brute(1.01 * t1), 1);
        let (off, centered) = verify_centered_optimality(2.5, 4.0, &p);
        assert!(off > centered);
    }
}
