//! Special functions and seeded random streams.
//!
//! Every tail probability and every random draw in the crate goes through
//! this module. The special functions are accurate to a few ulps in the
//! ranges the tests use; the random streams are ChaCha8 keystreams addressed
//! by `(seed, stream_id)` so that any unit of parallel work can own an
//! independent, reproducible stream.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 100_000;

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("normal_cdf: non-finite input {x}")));
    }
    Ok(phi(x))
}

/// Upper tail `1 - Φ(x)`, computed without cancellation.
pub fn normal_sf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("normal_sf: non-finite input {x}")));
    }
    Ok(phi(-x))
}

pub(crate) fn phi(x: f64) -> f64 {
    // Φ(x) = erfc(-x/√2)/2 with erfc(z) = Q(1/2, z²) for z ≥ 0.
    let z2 = 0.5 * x * x;
    if x < 0.0 {
        0.5 * gamma_q_half(z2)
    } else {
        0.5 + 0.5 * gamma_p_half(z2)
    }
}

/// Regularized lower incomplete gamma P(1/2, z).
fn gamma_p_half(z: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else if z < 1.5 {
        half_series(z)
    } else {
        1.0 - half_continued_fraction(z)
    }
}

/// Regularized upper incomplete gamma Q(1/2, z).
fn gamma_q_half(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else if z < 1.5 {
        1.0 - half_series(z)
    } else {
        half_continued_fraction(z)
    }
}

fn half_series(z: f64) -> f64 {
    let a = 0.5;
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= z / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    // z^a e^{-z} / Γ(a), Γ(1/2) = √π
    sum * (-z + a * z.ln()).exp() / SQRT_PI
}

fn half_continued_fraction(z: f64) -> f64 {
    let a = 0.5;
    let mut b = z + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (-z + a * z.ln()).exp() * h / SQRT_PI
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
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

/// Natural log of the gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) || !(b > 0.0 && b.is_finite()) {
        return Err(Error::domain(format!(
            "incomplete beta: shape parameters must be positive, got a={a}, b={b}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!(
            "incomplete beta: x={x} outside [0, 1]"
        )));
    }
    Ok(inc_beta(a, b, x, 1.0 - x))
}

/// `I_x(a, b)` where the caller supplies both `x` and `y = 1 - x`, so that
/// values of `x` near one keep full relative precision in `y`.
pub(crate) fn inc_beta(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * y.ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, y) / b
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Survival function `P(T > t)` of Student's t distribution with `dof`
/// degrees of freedom.
pub fn student_t_sf(t: f64, dof: f64) -> Result<f64> {
    if !(dof > 0.0) || dof.is_nan() {
        return Err(Error::domain(format!(
            "student_t_sf: degrees of freedom must be positive, got {dof}"
        )));
    }
    if t.is_nan() {
        return Err(Error::domain("student_t_sf: t is NaN"));
    }
    Ok(t_sf(t, dof))
}

pub(crate) fn t_sf(t: f64, dof: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 0.0 } else { 1.0 };
    }
    let t2 = t * t;
    let x = dof / (dof + t2);
    let y = t2 / (dof + t2);
    // P(|T| > |t|) = I_x(dof/2, 1/2)
    let half_tail = 0.5 * inc_beta(0.5 * dof, 0.5, x, y);
    if t > 0.0 {
        half_tail
    } else {
        1.0 - half_tail
    }
}

/// Two-sided Student-t p-value `P(|T| ≥ |t|)`.
pub(crate) fn t_two_sided(t: f64, dof: f64) -> f64 {
    (2.0 * t_sf(t.abs(), dof)).min(1.0)
}

/// SplitMix64 finalizer; a bijective 64-bit mixer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a hash, used to derive stable stream identifiers from
/// content rather than from positions.
pub fn fingerprint(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// A reproducible random stream addressed by `(seed, stream_id)`.
///
/// Two streams with the same address produce identical draws; different
/// stream ids select disjoint ChaCha keystreams under the same key.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    /// Stream for one repetition of one keyed unit of work.
    pub fn derived(seed: u64, key: u64, index: u64) -> Self {
        Self::new(seed, mix64(key ^ mix64(index)))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random()
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }

    /// Selects a uniformly random subset of size `amount` in random order and
    /// returns it; the rest of `values` is left permuted.
    pub fn choose_subset<'a, T>(&mut self, values: &'a mut [T], amount: usize) -> &'a mut [T] {
        values.partial_shuffle(&mut self.rng, amount).0
    }
}

/// Draws one standard normal variate from `rng`.
pub fn draw_standard_normal(rng: &mut RngStream) -> f64 {
    rng.standard_normal()
}
