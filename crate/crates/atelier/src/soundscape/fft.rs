//! Radix-2 decimation-in-time FFT, implemented here rather than pulled in
//! as a dependency so the naive-DFT oracle in the tests checks a real
//! implementation and results stay identical everywhere.

use super::{SoundError, Spectrum, WindowKind};

/// Magnitude spectrum of one frame: `|X[k]|` for `k = 0 ..= N/2`, raw
/// transform moduli with no normalization. `bin_hz` is 0 because a bare
/// frame has no time base; [`super::spectrogram`] fills it in.
pub fn fft_magnitude(frame: &[f64], window: WindowKind) -> Result<Spectrum, SoundError> {
    let n = frame.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(SoundError::NotPowerOfTwo(n));
    }
    let windowed = apply_window(frame, window);
    let mut re = windowed;
    let mut im = vec![0.0; n];
    fft_in_place(&mut re, &mut im);
    let magnitudes = (0..=n / 2)
        .map(|k| (re[k] * re[k] + im[k] * im[k]).sqrt())
        .collect();
    Ok(Spectrum {
        bin_hz: 0.0,
        magnitudes,
    })
}

pub(super) fn apply_window(frame: &[f64], window: WindowKind) -> Vec<f64> {
    match window {
        WindowKind::Rectangular => frame.to_vec(),
        WindowKind::Hann => {
            let n = frame.len();
            if n == 1 {
                return frame.to_vec();
            }
            frame
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let w = 0.5
                        * (1.0
                            - (std::f64::consts::TAU * i as f64 / (n as f64 - 1.0)).cos());
                    x * w
                })
                .collect()
        }
    }
}

/// Iterative radix-2 DIT transform over split real/imaginary buffers.
/// Length must be a power of two.
pub(super) fn fft_in_place(re: &mut [f64], im: &mut [f64]) {
    let n = re.len();
    debug_assert!(n.is_power_of_two() && im.len() == n);
    if n <= 1 {
        return;
    }

    // Bit-reversal permutation.
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = (i as u64).reverse_bits() >> (64 - bits) as u64;
        let j = j as usize;
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
    }

    let mut len = 2;
    while len <= n {
        let angle = -std::f64::consts::TAU / len as f64;
        let (w_re, w_im) = (angle.cos(), angle.sin());
        for start in (0..n).step_by(len) {
            let mut cur_re = 1.0f64;
            let mut cur_im = 0.0f64;
            for k in 0..len / 2 {
                let a = start + k;
                let b = a + len / 2;
                let t_re = cur_re * re[b] - cur_im * im[b];
                let t_im = cur_re * im[b] + cur_im * re[b];
                re[b] = re[a] - t_re;
                im[b] = im[a] - t_im;
                re[a] += t_re;
                im[a] += t_im;
                let next_re = cur_re * w_re - cur_im * w_im;
                cur_im = cur_re * w_im + cur_im * w_re;
                cur_re = next_re;
            }
        }
        len <<= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Straightforward O(N^2) DFT used as the oracle.
    fn naive_dft(frame: &[f64]) -> Vec<(f64, f64)> {
        let n = frame.len();
        (0..n)
            .map(|k| {
                let mut re = 0.0;
                let mut im = 0.0;
                for (j, &x) in frame.iter().enumerate() {
                    let angle = -std::f64::consts::TAU * (k * j) as f64 / n as f64;
                    re += x * angle.cos();
                    im += x * angle.sin();
                }
                (re, im)
            })
            .collect()
    }

    #[test]
    fn dc_only_signal() {
        let spec = fft_magnitude(&[1.0; 4], WindowKind::Rectangular).unwrap();
        assert_eq!(spec.magnitudes.len(), 3);
        assert!((spec.magnitudes[0] - 4.0).abs() < 1e-12);
        assert!(spec.magnitudes[1].abs() < 1e-12);
        assert!(spec.magnitudes[2].abs() < 1e-12);
    }

    #[test]
    fn pure_cosine_hits_one_bin() {
        let n = 64;
        let k = 5;
        let frame: Vec<f64> = (0..n)
            .map(|i| (std::f64::consts::TAU * k as f64 * i as f64 / n as f64).cos())
            .collect();
        let spec = fft_magnitude(&frame, WindowKind::Rectangular).unwrap();
        for (bin, mag) in spec.magnitudes.iter().enumerate() {
            if bin == k {
                assert!((mag - n as f64 / 2.0).abs() < 1e-9, "bin {bin}: {mag}");
            } else {
                assert!(*mag <= 1e-9, "bin {bin}: {mag}");
            }
        }
    }

    #[test]
    fn matches_naive_dft_on_random_frames() {
        let mut rng = crate::rng::SplitMix64::new(99);
        for &n in &[16usize, 256, 1024] {
            let frame: Vec<f64> = (0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
            let spec = fft_magnitude(&frame, WindowKind::Rectangular).unwrap();
            let oracle = naive_dft(&frame);
            for (k, (mag, (re, im))) in spec.magnitudes.iter().zip(&oracle).enumerate() {
                let expect = (re * re + im * im).sqrt();
                assert!((mag - expect).abs() <= 1e-9 * n as f64, "n={n} bin {k}");
            }
        }
    }

    #[test]
    fn parseval_identity() {
        let mut rng = crate::rng::SplitMix64::new(7);
        let n = 256;
        let frame: Vec<f64> = (0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
        let spec = fft_magnitude(&frame, WindowKind::Rectangular).unwrap();
        let time_energy: f64 = frame.iter().map(|x| x * x).sum();
        // Real input: reconstruct the full spectrum energy from the half.
        let mut freq_energy = spec.magnitudes[0].powi(2) + spec.magnitudes[n / 2].powi(2);
        for k in 1..n / 2 {
            freq_energy += 2.0 * spec.magnitudes[k].powi(2);
        }
        freq_energy /= n as f64;
        assert!(
            ((time_energy - freq_energy) / time_energy).abs() < 1e-6,
            "{time_energy} vs {freq_energy}"
        );
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(
            fft_magnitude(&[0.0; 12], WindowKind::Rectangular),
            Err(SoundError::NotPowerOfTwo(12))
        ));
        assert!(fft_magnitude(&[], WindowKind::Rectangular).is_err());
    }

    #[test]
    fn hann_window_tapers_ends() {
        let w = apply_window(&[1.0; 8], WindowKind::Hann);
        assert_eq!(w[0], 0.0);
        assert!(w[7].abs() < 1e-12);
        assert!(w[3] > 0.9);
    }
}
