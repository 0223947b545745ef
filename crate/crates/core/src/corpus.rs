//! Named perturbation functions with closed-form integrals.
//!
//! * `spike(beta)`: zero on `[0, 2]`, then on each `[n, n+1]` a symmetric
//!   triangle of height `n^beta` and half-width `n^-(beta+1)` centred at
//!   `n + 1/2`, so every unit window carries mass `1/n`.
//! * `osc(alpha, beta)`: `e^{alpha t} sin(e^{beta t})` with `0 < alpha < beta`.
//!   Its integrals are evaluated after the substitution `u = e^{beta t}`.
//! * `geometric-window(ratio)`: `ratio^floor(t)`.
//! * `exp-decay(rate)`, `const(c)`, `zero`, `sqrt-spike(beta)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::func::{Constant, ScalarFunction, SharedFn, SqrtOf, Zero};
use crate::quad::adaptive_simpson_panels;

pub const DEFAULT_SPIKE_BETA: f64 = 0.32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spike {
    beta: f64,
}

impl Spike {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!("spike needs beta > 0, got {beta}")));
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Peak height `h_n = n^beta`.
    pub fn height(&self, n: u64) -> f64 {
        (n as f64).powf(self.beta)
    }

    /// Plateau gap `a_n = 1/2 - n^-(beta+1)`.
    pub fn gap(&self, n: u64) -> f64 {
        0.5 - self.half_width(n)
    }

    pub fn half_width(&self, n: u64) -> f64 {
        (n as f64).powf(-(self.beta + 1.0))
    }

    /// `∫_n^{n+u} g` for `u ∈ [0, 1]`.
    fn partial(&self, n: u64, u: f64) -> f64 {
        if n < 2 || u <= 0.0 {
            return 0.0;
        }
        let (h, w) = (self.height(n), self.half_width(n));
        let left = 0.5 - w;
        let right = 0.5 + w;
        if u <= left {
            0.0
        } else if u <= 0.5 {
            let s = u - left;
            0.5 * h / w * s * s
        } else if u < right {
            let s = right - u;
            h * w - 0.5 * h / w * s * s
        } else {
            h * w
        }
    }

    /// `∫_n^{n+u} g²` for `u ∈ [0, 1]`.
    fn partial_square(&self, n: u64, u: f64) -> f64 {
        if n < 2 || u <= 0.0 {
            return 0.0;
        }
        let (h, w) = (self.height(n), self.half_width(n));
        let left = 0.5 - w;
        let right = 0.5 + w;
        let ramp = |s: f64| h * h * s * s * s / (3.0 * w * w);
        if u <= left {
            0.0
        } else if u <= 0.5 {
            ramp(u - left)
        } else if u < right {
            2.0 * ramp(w) - ramp(right - u)
        } else {
            2.0 * ramp(w)
        }
    }

    fn piecewise(&self, a: f64, b: f64, part: impl Fn(u64, f64) -> f64) -> f64 {
        if b <= a {
            return -self.piecewise(b, a, part);
        }
        let (a, b) = (a.max(0.0), b.max(0.0));
        let first = a.floor() as u64;
        let last = b.floor() as u64;
        let mut acc = 0.0;
        for n in first..=last {
            let lo = (a - n as f64).max(0.0);
            let hi = (b - n as f64).min(1.0);
            if hi > lo {
                acc += part(n, hi) - part(n, lo);
            }
        }
        acc
    }
}

impl ScalarFunction for Spike {
    fn eval(&self, t: f64) -> f64 {
        if !(t > 2.0) {
            return 0.0;
        }
        let n = t.floor() as u64;
        let d = (t - n as f64 - 0.5).abs();
        let w = self.half_width(n);
        if d >= w {
            0.0
        } else {
            self.height(n) * (1.0 - d / w)
        }
    }

    fn integral(&self, a: f64, b: f64) -> Option<f64> {
        Some(self.piecewise(a, b, |n, u| self.partial(n, u)))
    }

    fn square_integral(&self, a: f64, b: f64) -> Option<f64> {
        Some(self.piecewise(a, b, |n, u| self.partial_square(n, u)))
    }
}

pub fn spike_g(beta: f64) -> Result<Spike> {
    Spike::new(beta)
}

/// `∫_n^{n+1} g = 1/n`.
pub fn spike_window_exact(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("spike windows start at n = 2, got {n}")));
    }
    Ok(1.0 / n as f64)
}

fn check_spike_index(n: u64, beta: f64) -> Result<()> {
    Spike::new(beta)?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "spike peaks exceed 1 only from n = 2, got {n}"
        )));
    }
    Ok(())
}

/// `1/n - 2/n^{beta+1} + 1/n^{2 beta+1}`, which equals `∫_n^{n+1} (g - 1)_+`.
pub fn spike_truncated_mass(n: u64, beta: f64) -> Result<f64> {
    check_spike_index(n, beta)?;
    let n = n as f64;
    Ok(1.0 / n - 2.0 / n.powf(beta + 1.0) + 1.0 / n.powf(2.0 * beta + 1.0))
}

/// `∫_n^{n+1} g 1{g >= 1} = 1/n - 1/n^{2 beta+1}`.
pub fn spike_superlevel_mass(n: u64, beta: f64) -> Result<f64> {
    check_spike_index(n, beta)?;
    let n = n as f64;
    Ok(1.0 / n - 1.0 / n.powf(2.0 * beta + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Osc {
    alpha: f64,
    beta: f64,
}

/// Beyond this value of `u` the asymptotic antiderivative is used.
const U_SWITCH: f64 = 40.0;
const OSC_TOL: f64 = 1e-14;

impl Osc {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && 0.0 < alpha && alpha < beta) {
            return Err(Error::InvalidParameter(format!(
                "osc needs 0 < alpha < beta, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// `∫_{u0}^{u1} u^a e^{iu} du` for `0 < u0 <= u1`.
fn power_exp_integral(a: f64, u0: f64, u1: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    if u0 < U_SWITCH {
        let hi = u1.min(U_SWITCH);
        let panels = ((hi - u0) * 2.0).ceil() as usize + 1;
        let re = adaptive_simpson_panels(|u| u.powf(a) * u.cos(), u0, hi, panels, OSC_TOL);
        let im = adaptive_simpson_panels(|u| u.powf(a) * u.sin(), u0, hi, panels, OSC_TOL);
        acc += Complex64::new(re, im);
    }
    if u1 > U_SWITCH {
        let lo = u0.max(U_SWITCH);
        acc += asymptotic_antiderivative(a, u1) - asymptotic_antiderivative(a, lo);
    }
    acc
}

/// `-i e^{iu} u^a Σ_k i^k [a]_k u^{-k}` with `[a]_k` the falling factorial,
/// truncated at the smallest term.
fn asymptotic_antiderivative(a: f64, u: f64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut c = 1.0_f64;
    let mut ik = Complex64::new(1.0, 0.0);
    for k in 0..60 {
        sum += ik * c;
        let next = c * (a - k as f64) / u;
        if next.abs() >= c.abs() || next.abs() < 1e-18 * sum.norm() {
            break;
        }
        c = next;
        ik *= Complex64::i();
    }
    -Complex64::i() * Complex64::from_polar(1.0, u) * u.powf(a) * sum
}

impl ScalarFunction for Osc {
    fn eval(&self, t: f64) -> f64 {
        (self.alpha * t).exp() * (self.beta * t).exp().sin()
    }

    fn integral(&self, a: f64, b: f64) -> Option<f64> {
        if b < a {
            return self.integral(b, a).map(|v| -v);
        }
        let g = self.alpha / self.beta;
        let (u0, u1) = ((self.beta * a).exp(), (self.beta * b).exp());
        Some(power_exp_integral(g - 1.0, u0, u1).im / self.beta)
    }

    fn square_integral(&self, a: f64, b: f64) -> Option<f64> {
        if b < a {
            return self.square_integral(b, a).map(|v| -v);
        }
        let (al, be) = (self.alpha, self.beta);
        let g = al / be;
        let main = ((2.0 * al * b).exp() - (2.0 * al * a).exp()) / (4.0 * al);
        let (v0, v1) = (2.0 * (be * a).exp(), 2.0 * (be * b).exp());
        let cos_part = power_exp_integral(2.0 * g - 1.0, v0, v1).re;
        Some(main - 0.5 / be * 2f64.powf(-2.0 * g) * cos_part)
    }
}

/// `ratio^floor(t)`, so the mass on `[n, n+1]` is `ratio^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricWindow {
    ratio: f64,
}

impl GeometricWindow {
    pub fn new(ratio: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "geometric-window needs ratio > 0, got {ratio}"
            )));
        }
        Ok(Self { ratio })
    }

    fn primitive(&self, t: f64, power: i32) -> f64 {
        let r = self.ratio.powi(power);
        let n = t.floor();
        let whole = if (r - 1.0).abs() < 1e-15 {
            n
        } else {
            (1.0 - r.powf(n)) / (1.0 - r)
        };
        whole + r.powf(n) * (t - n)
    }
}

impl ScalarFunction for GeometricWindow {
    fn eval(&self, t: f64) -> f64 {
        self.ratio.powf(t.max(0.0).floor())
    }

    fn integral(&self, a: f64, b: f64) -> Option<f64> {
        Some(self.primitive(b.max(0.0), 1) - self.primitive(a.max(0.0), 1))
    }

    fn square_integral(&self, a: f64, b: f64) -> Option<f64> {
        Some(self.primitive(b.max(0.0), 2) - self.primitive(a.max(0.0), 2))
    }
}

/// `e^{-rate t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpDecay {
    rate: f64,
}

impl ExpDecay {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidParameter(format!("exp-decay needs rate > 0, got {rate}")));
        }
        Ok(Self { rate })
    }
}

impl ScalarFunction for ExpDecay {
    fn eval(&self, t: f64) -> f64 {
        (-self.rate * t).exp()
    }

    fn integral(&self, a: f64, b: f64) -> Option<f64> {
        Some(((-self.rate * a).exp() - (-self.rate * b).exp()) / self.rate)
    }

    fn square_integral(&self, a: f64, b: f64) -> Option<f64> {
        let r = 2.0 * self.rate;
        Some(((-r * a).exp() - (-r * b).exp()) / r)
    }
}

/// A corpus function together with its canonical name.
#[derive(Debug, Clone)]
pub struct NamedFn {
    pub name: String,
    pub func: SharedFn,
}

/// Positional or `key=value` arguments.
type CallArgs = Vec<(Option<String>, f64)>;

fn parse_call(spec: &str) -> Result<(String, CallArgs)> {
    let spec = spec.trim();
    let bad = || Error::UnknownFunction(spec.to_string());
    let (name, args) = match spec.find('(') {
        None => (spec, ""),
        Some(i) => {
            let rest = spec[i + 1..].strip_suffix(')').ok_or_else(bad)?;
            (&spec[..i], rest)
        }
    };
    let mut out = Vec::new();
    for part in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = match part.split_once('=') {
            Some((k, v)) => (Some(k.trim().to_string()), v.trim()),
            None => (None, part),
        };
        let value: f64 = value.parse().map_err(|_| bad())?;
        out.push((key, value));
    }
    Ok((name.trim().to_string(), out))
}

fn bind(
    spec: &str,
    args: &[(Option<String>, f64)],
    names: &[&str],
    defaults: &[Option<f64>],
) -> Result<Vec<f64>> {
    let mut slots: Vec<Option<f64>> = vec![None; names.len()];
    let mut by_key: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, n) in names.iter().enumerate() {
        by_key.insert(n, i);
    }
    for (pos, (key, v)) in args.iter().enumerate() {
        let i = match key {
            Some(k) => *by_key
                .get(k.as_str())
                .ok_or_else(|| Error::UnknownFunction(format!("{spec}: unknown argument `{k}`")))?,
            None => pos,
        };
        if i >= names.len() || slots[i].is_some() {
            return Err(Error::UnknownFunction(format!("{spec}: bad argument list")));
        }
        slots[i] = Some(*v);
    }
    slots
        .iter()
        .zip(defaults)
        .zip(names)
        .map(|((s, d), n)| {
            s.or(*d)
                .ok_or_else(|| Error::UnknownFunction(format!("{spec}: missing argument `{n}`")))
        })
        .collect()
}

/// Resolves names such as `spike(beta=0.32)`, `osc(0.1,0.5)` or `const(c=1)`.
pub fn parse_function(spec: &str) -> Result<NamedFn> {
    let (name, args) = parse_call(spec)?;
    let (canonical, func): (String, SharedFn) = match name.as_str() {
        "zero" => {
            bind(spec, &args, &[], &[])?;
            ("zero".into(), Arc::new(Zero))
        }
        "const" => {
            let v = bind(spec, &args, &["c"], &[None])?;
            (format!("const(c={})", v[0]), Arc::new(Constant(v[0])))
        }
        "spike" => {
            let v = bind(spec, &args, &["beta"], &[Some(DEFAULT_SPIKE_BETA)])?;
            (format!("spike(beta={})", v[0]), Arc::new(Spike::new(v[0])?))
        }
        "sqrt-spike" => {
            let v = bind(spec, &args, &["beta"], &[Some(DEFAULT_SPIKE_BETA)])?;
            (
                format!("sqrt-spike(beta={})", v[0]),
                Arc::new(SqrtOf(Arc::new(Spike::new(v[0])?))),
            )
        }
        "osc" => {
            let v = bind(spec, &args, &["alpha", "beta"], &[None, None])?;
            (
                format!("osc(alpha={},beta={})", v[0], v[1]),
                Arc::new(Osc::new(v[0], v[1])?),
            )
        }
        "geometric-window" => {
            let v = bind(spec, &args, &["ratio"], &[Some(0.5)])?;
            (
                format!("geometric-window(ratio={})", v[0]),
                Arc::new(GeometricWindow::new(v[0])?),
            )
        }
        "exp-decay" => {
            let v = bind(spec, &args, &["rate"], &[Some(1.0)])?;
            (format!("exp-decay(rate={})", v[0]), Arc::new(ExpDecay::new(v[0])?))
        }
        _ => return Err(Error::UnknownFunction(spec.to_string())),
    };
    Ok(NamedFn {
        name: canonical,
        func,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_simpson;
    use approx::assert_abs_diff_eq;

    #[test]
    fn spike_shape() {
        let g = Spike::new(0.32).unwrap();
        assert_eq!(g.eval(1.7), 0.0);
        assert_eq!(g.eval(2.0), 0.0);
        assert_eq!(g.eval(4.5), 4f64.powf(0.32));
        assert!(g.eval(4.0 + g.gap(4)).abs() < 1e-12);
    }

    #[test]
    fn spike_integrals_match_quadrature() {
        let g = Spike::new(0.32).unwrap();
        for n in 2..20u64 {
            let n0 = n as f64;
            assert_abs_diff_eq!(g.integral(n0, n0 + 1.0).unwrap(), 1.0 / n0, epsilon = 1e-14);
            let brute = adaptive_simpson(|t| g.eval(t).powi(2), n0, n0 + 1.0, 1e-12);
            assert_abs_diff_eq!(g.square_integral(n0, n0 + 1.0).unwrap(), brute, epsilon = 1e-8);
        }
        let brute = adaptive_simpson(|t| g.eval(t), 3.2, 5.6, 1e-12);
        assert_abs_diff_eq!(g.integral(3.2, 5.6).unwrap(), brute, epsilon = 1e-9);
    }

    #[test]
    fn truncated_masses() {
        let g = Spike::new(0.32).unwrap();
        let n = 10u64;
        let pos = adaptive_simpson(|t| (g.eval(t) - 1.0).max(0.0), 10.0, 11.0, 1e-13);
        let sup = adaptive_simpson(
            |t| {
                let v = g.eval(t);
                if v >= 1.0 { v } else { 0.0 }
            },
            10.0,
            11.0,
            1e-13,
        );
        assert_abs_diff_eq!(spike_truncated_mass(n, 0.32).unwrap(), pos, epsilon = 1e-7);
        assert_abs_diff_eq!(spike_superlevel_mass(n, 0.32).unwrap(), sup, epsilon = 1e-6);
        assert!(spike_truncated_mass(1, 0.32).is_err());
        assert!(spike_window_exact(1).is_err());
    }

    #[test]
    fn osc_integrals_match_quadrature() {
        let f = Osc::new(0.1, 0.5).unwrap();
        assert_eq!(f.eval(0.0), 1f64.sin());
        for &(a, b) in &[(0.0, 1.0), (3.0, 4.5), (7.0, 7.3), (9.0, 10.0)] {
            let panels = 2000;
            let brute = adaptive_simpson_panels(|t| f.eval(t), a, b, panels, 1e-13);
            assert_abs_diff_eq!(f.integral(a, b).unwrap(), brute, epsilon = 1e-9);
            let brute2 = adaptive_simpson_panels(|t| f.eval(t).powi(2), a, b, panels, 1e-13);
            assert_abs_diff_eq!(f.square_integral(a, b).unwrap(), brute2, epsilon = 1e-8);
        }
        assert!(Osc::new(0.5, 0.1).is_err());
    }

    #[test]
    fn geometric_window_mass() {
        let f = GeometricWindow::new(0.5).unwrap();
        for n in 0..10 {
            let n0 = n as f64;
            assert_abs_diff_eq!(f.integral(n0, n0 + 1.0).unwrap(), 0.5f64.powi(n), epsilon = 1e-15);
        }
        assert_abs_diff_eq!(f.integral(0.5, 1.5).unwrap(), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn names() {
        assert_eq!(parse_function("spike(beta=0.32)").unwrap().name, "spike(beta=0.32)");
        assert_eq!(parse_function("osc(0.1,0.5)").unwrap().name, "osc(alpha=0.1,beta=0.5)");
        assert_eq!(parse_function("const(c=1)").unwrap().func.eval(3.0), 1.0);
        assert!(parse_function("zero").unwrap().func.is_zero());
        assert!(parse_function("osc(alpha=0.5,beta=0.1)").is_err());
        assert!(parse_function("nope(1)").is_err());
        assert!(parse_function("spike(gamma=1)").is_err());
    }
}
