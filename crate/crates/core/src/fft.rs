//! Complex FFT used by the circulant-embedding sampler.
//!
//! Power-of-two sizes run an iterative radix-2 transform; everything else is
//! handled by Bluestein's chirp-z reduction onto a padded power of two, so
//! embeddings of any length transform exactly.

use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

    #[inline]
    pub fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    #[inline]
    pub fn conj(self) -> Self {
        Complex {
            re: self.re,
            im: -self.im,
        }
    }

    #[inline]
    fn mul(self, other: Complex) -> Complex {
        Complex {
            re: self.re * other.re - self.im * other.im,
            im: self.re * other.im + self.im * other.re,
        }
    }

    #[inline]
    fn add(self, other: Complex) -> Complex {
        Complex {
            re: self.re + other.re,
            im: self.im + other.im,
        }
    }

    #[inline]
    fn sub(self, other: Complex) -> Complex {
        Complex {
            re: self.re - other.re,
            im: self.im - other.im,
        }
    }

    #[inline]
    fn scale(self, s: f64) -> Complex {
        Complex {
            re: self.re * s,
            im: self.im * s,
        }
    }
}

/// Unit root e^{-i pi phase} with `phase` given in half-turns.
#[inline]
fn cis_half_turns(phase: f64) -> Complex {
    let angle = -core::f64::consts::PI * phase;
    Complex::new(fmath::cos(angle), fmath::sin(angle))
}

/// Planned forward DFT of a fixed size.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Identity,
    Radix2 {
        twiddles: Vec<Complex>,
    },
    Bluestein {
        // chirp[k] = exp(-i pi k^2 / n), with k^2 reduced mod 2n exactly
        chirp: Vec<Complex>,
        inner: Vec<Complex>, // forward FFT of the wrapped conjugate chirp
        pad: usize,
        pad_twiddles: Vec<Complex>,
    },
}

impl Fft {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "FFT size must be at least 1");
        if n == 1 {
            return Fft {
                n,
                kind: Kind::Identity,
            };
        }
        if n.is_power_of_two() {
            return Fft {
                n,
                kind: Kind::Radix2 {
                    twiddles: half_twiddles(n),
                },
            };
        }
        let pad = (2 * n - 1).next_power_of_two();
        let pad_twiddles = half_twiddles(pad);
        let chirp: Vec<Complex> = (0..n)
            .map(|k| {
                let k2 = ((k as u128 * k as u128) % (2 * n as u128)) as f64;
                cis_half_turns(k2 / n as f64)
            })
            .collect();
        let mut b = vec![Complex::ZERO; pad];
        b[0] = chirp[0].conj();
        for k in 1..n {
            let c = chirp[k].conj();
            b[k] = c;
            b[pad - k] = c;
        }
        radix2_in_place(&mut b, &pad_twiddles);
        Fft {
            n,
            kind: Kind::Bluestein {
                chirp,
                inner: b,
                pad,
                pad_twiddles,
            },
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place forward transform X_k = sum_j x_j e^{-2 pi i jk / n}.
    pub fn forward(&self, data: &mut [Complex]) {
        assert_eq!(data.len(), self.n, "buffer length must match FFT size");
        match &self.kind {
            Kind::Identity => {}
            Kind::Radix2 { twiddles } => radix2_in_place(data, twiddles),
            Kind::Bluestein {
                chirp,
                inner,
                pad,
                pad_twiddles,
            } => {
                let mut a = vec![Complex::ZERO; *pad];
                for k in 0..self.n {
                    a[k] = data[k].mul(chirp[k]);
                }
                radix2_in_place(&mut a, pad_twiddles);
                for (ak, bk) in a.iter_mut().zip(inner.iter()) {
                    *ak = ak.mul(*bk);
                }
                // inverse pad transform via conjugation
                for v in a.iter_mut() {
                    *v = v.conj();
                }
                radix2_in_place(&mut a, pad_twiddles);
                let inv = 1.0 / *pad as f64;
                for k in 0..self.n {
                    data[k] = a[k].conj().scale(inv).mul(chirp[k]);
                }
            }
        }
    }
}

/// Twiddles e^{-2 pi i k / n} for k < n/2.
fn half_twiddles(n: usize) -> Vec<Complex> {
    (0..n / 2)
        .map(|k| cis_half_turns(2.0 * k as f64 / n as f64))
        .collect()
}

fn radix2_in_place(data: &mut [Complex], twiddles: &[Complex]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    // bit-reversal permutation
    let shift = usize::BITS - n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> shift;
        if j > i {
            data.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        let mut start = 0;
        while start < n {
            for k in 0..half {
                let w = twiddles[k * stride];
                let lo = data[start + k];
                let hi = data[start + k + half].mul(w);
                data[start + k] = lo.add(hi);
                data[start + k + half] = lo.sub(hi);
            }
            start += len;
        }
        len *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex]) -> Vec<Complex> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let mut acc = Complex::ZERO;
                for (j, &xj) in x.iter().enumerate() {
                    let phase = 2.0 * ((j as u128 * k as u128) % n as u128) as f64 / n as f64;
                    acc = acc.add(xj.mul(cis_half_turns(phase)));
                }
                acc
            })
            .collect()
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<Complex> {
        // splitmix64 expansion, no rand dependency needed here
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z = z ^ (z >> 31);
            (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        (0..n).map(|_| Complex::new(next(), next())).collect()
    }

    #[test]
    fn matches_naive_dft_across_sizes() {
        for &n in &[
            1usize, 2, 3, 4, 5, 6, 7, 8, 12, 16, 30, 31, 64, 100, 255, 510,
        ] {
            let x = pseudo_random(n, n as u64);
            let mut y = x.clone();
            let fft = Fft::new(n);
            fft.forward(&mut y);
            let want = naive_dft(&x);
            let scale = (n as f64).sqrt();
            for (got, want) in y.iter().zip(want.iter()) {
                assert!(
                    (got.re - want.re).abs() < 1e-10 * scale
                        && (got.im - want.im).abs() < 1e-10 * scale,
                    "size {n}: got ({}, {}), want ({}, {})",
                    got.re,
                    got.im,
                    want.re,
                    want.im
                );
            }
        }
    }

    #[test]
    fn conjugate_symmetric_input_gives_real_output() {
        // a_k with a_{n-k} = conj(a_k) must transform to a real vector
        let n = 10;
        let mut a = vec![Complex::ZERO; n];
        a[0] = Complex::new(0.7, 0.0);
        a[5] = Complex::new(-0.3, 0.0);
        for k in 1..5 {
            let v = Complex::new(0.1 * k as f64, -0.05 * k as f64);
            a[k] = v;
            a[n - k] = v.conj();
        }
        Fft::new(n).forward(&mut a);
        for v in &a {
            assert!(v.im.abs() < 1e-12, "imag residue {}", v.im);
        }
    }
}
