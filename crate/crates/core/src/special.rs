//! Special functions and summation helpers.

use std::f64::consts::PI;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Γ(1/4) = 3.62560990822190831193068515586767200299516768288006…
/// (tabulated value; cross-checked in tests against an independent
/// log-gamma evaluation).
pub const GAMMA_QUARTER: f64 = 3.625_609_908_221_908;

/// `π²/6 = Li₂(1) = ζ(2)`.
pub const ZETA2: f64 = PI * PI / 6.0;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl Extend<f64> for KahanSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

/// Order-fixed compensated sum of a slice.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut s = KahanSum::new();
    s.extend(xs.iter().copied());
    s.value()
}

/// Exponential integral `E₁(x) = ∫_x^∞ e^{−t}/t dt` for `x > 0`.
///
/// Power series below 1, modified-Lentz continued fraction above; absolute
/// error below 1e-14 on the whole range.
pub fn exp_integral_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 needs x > 0, got {x}");
    if x < 1.0 {
        // E₁(x) = −γ − ln x − Σ_{n≥1} (−x)^n / (n · n!)
        let mut term = 1.0;
        let mut sum = KahanSum::new();
        for n in 1..200 {
            term *= -x / n as f64;
            let t = term / n as f64;
            sum.add(t);
            if t.abs() < 1e-18 {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum.value()
    } else {
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Dilogarithm `Li₂(z) = Σ z^n/n²` for `0 ≤ z ≤ 1`.
pub fn dilog(z: f64) -> f64 {
    assert!((0.0..=1.0).contains(&z), "dilog implemented on [0, 1], got {z}");
    if z == 1.0 {
        return ZETA2;
    }
    if z <= 0.5 {
        dilog_series(z)
    } else {
        // Li₂(z) + Li₂(1−z) = π²/6 − ln z · ln(1−z)
        ZETA2 - z.ln() * (1.0 - z).ln() - dilog_series(1.0 - z)
    }
}

/// `Li₂(e^{−c})` for `c > 0` without forming `1 − e^{−c}` by subtraction.
pub fn dilog_exp_neg(c: f64) -> f64 {
    assert!(c > 0.0);
    if c >= std::f64::consts::LN_2 {
        dilog_series((-c).exp())
    } else {
        let one_minus = -(-c).exp_m1();
        ZETA2 - (-c) * one_minus.ln() - dilog_series(one_minus)
    }
}

fn dilog_series(z: f64) -> f64 {
    let mut pow = 1.0;
    let mut sum = KahanSum::new();
    for n in 1..2000 {
        pow *= z;
        let t = pow / (n * n) as f64;
        sum.add(t);
        if t < 1e-18 * sum.value().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    sum.value()
}

/// Harmonic number `H_n`, `H_0 = 0`.
pub fn harmonic(n: usize) -> f64 {
    let mut s = KahanSum::new();
    for k in (1..=n).rev() {
        s.add(1.0 / k as f64);
    }
    s.value()
}
