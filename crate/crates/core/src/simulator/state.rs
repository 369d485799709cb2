use num_complex::Complex64;
use rayon::prelude::*;

use crate::bitstring::Bitstring;

const PARALLEL_THRESHOLD: usize = 1 << 14;

/// Dense amplitude vector; qubit 0 is the most significant bit of the index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    qubit_count: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(qubit_count: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubit_count];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self { qubit_count, amplitudes }
    }

    pub fn basis(bits: &Bitstring) -> Self {
        let mut state = Self::zero(bits.len());
        state.amplitudes[0] = Complex64::new(0.0, 0.0);
        state.amplitudes[bits.to_index()] = Complex64::new(1.0, 0.0);
        state
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        assert!(amplitudes.len().is_power_of_two(), "length must be a power of two");
        let qubit_count = amplitudes.len().trailing_zeros() as usize;
        Self { qubit_count, amplitudes }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, bits: &Bitstring) -> Complex64 {
        self.amplitudes[bits.to_index()]
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Basis indices with probability above `eps`.
    pub fn support(&self, eps: f64) -> Vec<usize> {
        (0..self.amplitudes.len()).filter(|&i| self.amplitudes[i].norm_sqr() > eps).collect()
    }

    pub(crate) fn mask(&self, qubit: usize) -> usize {
        1 << (self.qubit_count - 1 - qubit)
    }

    /// Calls `f(index_of_low, low, high)` for every amplitude pair differing only in `mask`.
    pub(crate) fn for_each_pair<F>(&mut self, mask: usize, f: F)
    where
        F: Fn(usize, &mut Complex64, &mut Complex64) + Sync,
    {
        let block = mask << 1;
        let body = |(c, chunk): (usize, &mut [Complex64])| {
            let (lo, hi) = chunk.split_at_mut(mask);
            for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                f(c * block + k, a, b);
            }
        };
        if self.amplitudes.len() >= PARALLEL_THRESHOLD {
            if block == self.amplitudes.len() {
                let (lo, hi) = self.amplitudes.split_at_mut(mask);
                lo.par_iter_mut()
                    .zip(hi.par_iter_mut())
                    .enumerate()
                    .with_min_len(1 << 10)
                    .for_each(|(k, (a, b))| f(k, a, b));
            } else {
                self.amplitudes.par_chunks_mut(block).enumerate().for_each(body);
            }
        } else {
            self.amplitudes.chunks_mut(block).enumerate().for_each(body);
        }
    }

    pub(crate) fn for_each_amplitude<F>(&mut self, f: F)
    where
        F: Fn(usize, &mut Complex64) + Sync,
    {
        if self.amplitudes.len() >= PARALLEL_THRESHOLD {
            self.amplitudes
                .par_iter_mut()
                .enumerate()
                .with_min_len(1 << 10)
                .for_each(|(i, a)| f(i, a));
        } else {
            self.amplitudes.iter_mut().enumerate().for_each(|(i, a)| f(i, a));
        }
    }

    pub(crate) fn permute<F>(&mut self, map: F)
    where
        F: Fn(usize) -> usize + Sync,
    {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            out[map(i)] = *a;
        }
        self.amplitudes = out;
    }
}
