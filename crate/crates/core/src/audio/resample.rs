//! Rational-ratio polyphase resampling with a Kaiser-windowed sinc kernel.
//!
//! For an up/down ratio `L/M` (reduced), output sample `n` sits at input
//! position `n * M / L`. Its integer part picks the input neighbourhood and
//! the remainder `(n * M) mod L` picks one of `L` precomputed filter phases.
//! The low-pass cutoff is `ROLLOFF * min(1, L/M)` of the input Nyquist
//! frequency and the kernel spans `ZERO_CROSSINGS` sinc lobes on each side.
//! Samples outside the input are treated as zero.

use std::f64::consts::PI;

const ZERO_CROSSINGS: f64 = 32.0;
const ROLLOFF: f64 = 0.95;
const KAISER_BETA: f64 = 8.6;
/// Above this many phases the taps are computed per output sample.
const MAX_CACHED_PHASES: usize = 4096;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..64 {
        term *= (half / k as f64).powi(2);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

pub struct SincResampler {
    up: usize,
    down: usize,
    cutoff: f64,
    half_width: usize,
    phases: Option<Vec<Vec<f64>>>,
}

impl SincResampler {
    pub fn new(from_rate: u32, to_rate: u32) -> Self {
        let g = gcd(from_rate as u64, to_rate as u64).max(1);
        let up = (to_rate as u64 / g) as usize;
        let down = (from_rate as u64 / g) as usize;
        let cutoff = ROLLOFF * (up as f64 / down as f64).min(1.0);
        let half_width = (ZERO_CROSSINGS / cutoff).ceil() as usize;
        let mut r = Self {
            up,
            down,
            cutoff,
            half_width,
            phases: None,
        };
        if up <= MAX_CACHED_PHASES {
            r.phases = Some((0..up).map(|p| r.compute_taps(p)).collect());
        }
        r
    }

    /// Taps for input offsets `1 - half_width ..= half_width` relative to the
    /// integer part of the output position, normalized to unit DC gain.
    fn compute_taps(&self, phase: usize) -> Vec<f64> {
        let frac = phase as f64 / self.up as f64;
        let hw = self.half_width as f64;
        let beta_norm = bessel_i0(KAISER_BETA);
        let mut taps: Vec<f64> = (1 - self.half_width as i64..=self.half_width as i64)
            .map(|i| {
                let x = i as f64 - frac;
                let r = x / hw;
                if r.abs() >= 1.0 {
                    0.0
                } else {
                    let window = bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / beta_norm;
                    self.cutoff * sinc(self.cutoff * x) * window
                }
            })
            .collect();
        let sum: f64 = taps.iter().sum();
        taps.iter_mut().for_each(|t| *t /= sum);
        taps
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        ((input_len as f64) * self.up as f64 / self.down as f64).round() as usize
    }

    pub fn process(&self, input: &[f32]) -> Vec<f32> {
        if self.up == self.down {
            return input.to_vec();
        }
        let out_len = self.output_len(input.len());
        let mut scratch = Vec::new();
        (0..out_len)
            .map(|n| {
                let pos = n as u64 * self.down as u64;
                let base = (pos / self.up as u64) as i64;
                let phase = (pos % self.up as u64) as usize;
                let taps: &[f64] = match &self.phases {
                    Some(p) => &p[phase],
                    None => {
                        scratch = self.compute_taps(phase);
                        &scratch
                    }
                };
                let first = base + 1 - self.half_width as i64;
                let mut acc = 0.0;
                for (i, &tap) in taps.iter().enumerate() {
                    let j = first + i as i64;
                    if j >= 0 && (j as usize) < input.len() {
                        acc += tap * input[j as usize] as f64;
                    }
                }
                acc as f32
            })
            .collect()
    }
}

pub fn resample(input: &[f32], from_rate: u32, to_rate: u32) -> Vec<f32> {
    if from_rate == to_rate {
        return input.to_vec();
    }
    SincResampler::new(from_rate, to_rate).process(input)
}
