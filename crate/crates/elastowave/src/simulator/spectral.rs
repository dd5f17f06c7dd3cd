//! 2-D pseudospectral engine on a periodic square grid: forward/inverse
//! transforms (rayon-parallel over rows), signed wavenumber tables, the
//! 2/3-rule dealias mask, and pair-packed transforms of real fields (two
//! real fields ride one complex FFT via Hermitian splitting).
//!
//! Forward transforms carry the 1/(n·n) normalization so that a plane wave
//! a·e^{ik·x} has û(k) = a.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct Spectral {
    pub n: [usize; 2],
    pub length: f64,
    fwd: [Arc<dyn Fft<f64>>; 2],
    inv: [Arc<dyn Fft<f64>>; 2],
    /// Signed wavenumbers per axis, in physical units 2π/L·(lattice index).
    pub k: [Vec<f64>; 2],
    /// 2/3-rule mask (1.0 keep, 0.0 zero), per-axis cutoff floor(n/3).
    pub dealias: Vec<f64>,
    /// Largest |k| surviving the dealias mask.
    pub k_max_dealiased: f64,
}

fn signed_wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let base = 2.0 * std::f64::consts::PI / length;
    (0..n)
        .map(|i| {
            let s = if i <= n / 2 { i as isize } else { i as isize - n as isize };
            base * s as f64
        })
        .collect()
}

impl Spectral {
    pub fn new(n: [usize; 2], length: f64) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = [
            planner.plan_fft_forward(n[0]),
            planner.plan_fft_forward(n[1]),
        ];
        let inv = [
            planner.plan_fft_inverse(n[0]),
            planner.plan_fft_inverse(n[1]),
        ];
        let k = [signed_wavenumbers(n[0], length), signed_wavenumbers(n[1], length)];
        let cut = [n[0] / 3, n[1] / 3];
        let base = 2.0 * std::f64::consts::PI / length;
        let mut dealias = vec![0.0; n[0] * n[1]];
        let mut k_max: f64 = 0.0;
        for i0 in 0..n[0] {
            let s0 = if i0 <= n[0] / 2 { i0 as isize } else { i0 as isize - n[0] as isize };
            for i1 in 0..n[1] {
                let s1 = if i1 <= n[1] / 2 { i1 as isize } else { i1 as isize - n[1] as isize };
                if s0.unsigned_abs() <= cut[0] && s1.unsigned_abs() <= cut[1] {
                    dealias[i0 * n[1] + i1] = 1.0;
                    let kk = base * ((s0 * s0 + s1 * s1) as f64).sqrt();
                    k_max = k_max.max(kk);
                }
            }
        }
        Spectral {
            n,
            length,
            fwd,
            inv,
            k,
            dealias,
            k_max_dealiased: k_max,
        }
    }

    pub fn cells(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n[0] as f64
    }

    /// Flat index of an integer lattice wavevector (units of 2π/L).
    pub fn index_of_lattice(&self, k: [i64; 2]) -> usize {
        let i0 = k[0].rem_euclid(self.n[0] as i64) as usize;
        let i1 = k[1].rem_euclid(self.n[1] as i64) as usize;
        i0 * self.n[1] + i1
    }

    fn fft_rows(&self, buf: &mut [Complex64], axis1_len: usize, plan: &Arc<dyn Fft<f64>>) {
        buf.par_chunks_mut(axis1_len).for_each_init(
            || vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()],
            |scratch, row| plan.process_with_scratch(row, scratch),
        );
    }

    fn transpose(&self, src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
        dst.par_chunks_mut(rows).enumerate().for_each(|(j, out)| {
            for (i, o) in out.iter_mut().enumerate() {
                *o = src[i * cols + j];
            }
        });
    }

    /// In-place 2-D transform; `forward` includes the 1/(n0·n1) scale.
    pub fn fft2(&self, buf: &mut Vec<Complex64>, scratch: &mut Vec<Complex64>, forward: bool) {
        let [n0, n1] = self.n;
        let plans = if forward { &self.fwd } else { &self.inv };
        self.fft_rows(buf, n1, &plans[1]);
        scratch.resize(buf.len(), Complex64::new(0.0, 0.0));
        self.transpose(buf, scratch, n0, n1);
        self.fft_rows(scratch, n0, &plans[0]);
        self.transpose(scratch, buf, n1, n0);
        if forward {
            let s = 1.0 / (n0 * n1) as f64;
            buf.par_iter_mut().for_each(|v| *v *= s);
        }
    }

    /// Forward transform of two real fields packed as a + i·b; returns their
    /// spectra by Hermitian splitting.
    pub fn forward_pair(
        &self,
        a: &[f64],
        b: &[f64],
        spec_a: &mut Vec<Complex64>,
        spec_b: &mut Vec<Complex64>,
        work: &mut Vec<Complex64>,
        scratch: &mut Vec<Complex64>,
    ) {
        let nn = self.cells();
        work.resize(nn, Complex64::new(0.0, 0.0));
        work.par_iter_mut()
            .zip(a.par_iter().zip(b.par_iter()))
            .for_each(|(w, (x, y))| *w = Complex64::new(*x, *y));
        self.fft2(work, scratch, true);
        spec_a.resize(nn, Complex64::new(0.0, 0.0));
        spec_b.resize(nn, Complex64::new(0.0, 0.0));
        let [n0, n1] = self.n;
        let half = Complex64::new(0.5, 0.0);
        let half_i = Complex64::new(0.0, -0.5);
        // û_a(k) = (c(k) + conj(c(−k)))/2, û_b(k) = (c(k) − conj(c(−k)))/(2i)
        spec_a
            .par_chunks_mut(n1)
            .zip(spec_b.par_chunks_mut(n1))
            .enumerate()
            .for_each(|(i0, (ra, rb))| {
                let i0n = (n0 - i0) % n0;
                for i1 in 0..n1 {
                    let i1n = (n1 - i1) % n1;
                    let c = work[i0 * n1 + i1];
                    let cn = work[i0n * n1 + i1n].conj();
                    ra[i1] = (c + cn) * half;
                    rb[i1] = (c - cn) * half_i;
                }
            });
    }

    /// Inverse transform of two conjugate-symmetric spectra packed as
    /// â + i·b̂; writes the two real fields.
    pub fn inverse_pair(
        &self,
        spec_a: &[Complex64],
        spec_b: &[Complex64],
        a: &mut [f64],
        b: &mut [f64],
        work: &mut Vec<Complex64>,
        scratch: &mut Vec<Complex64>,
    ) {
        let nn = self.cells();
        work.resize(nn, Complex64::new(0.0, 0.0));
        work.par_iter_mut()
            .zip(spec_a.par_iter().zip(spec_b.par_iter()))
            .for_each(|(w, (x, y))| *w = x + Complex64::new(0.0, 1.0) * y);
        self.fft2(work, scratch, false);
        a.par_iter_mut()
            .zip(b.par_iter_mut())
            .zip(work.par_iter())
            .for_each(|((xa, xb), w)| {
                *xa = w.re;
                *xb = w.im;
            });
    }

    /// Forward transform of one real field.
    pub fn forward_real(
        &self,
        a: &[f64],
        spec: &mut Vec<Complex64>,
        scratch: &mut Vec<Complex64>,
    ) {
        let nn = self.cells();
        spec.resize(nn, Complex64::new(0.0, 0.0));
        spec.par_iter_mut()
            .zip(a.par_iter())
            .for_each(|(s, v)| *s = Complex64::new(*v, 0.0));
        self.fft2(spec, scratch, true);
    }

    /// Inverse transform of one conjugate-symmetric spectrum to a real field.
    pub fn inverse_real(
        &self,
        spec: &[Complex64],
        a: &mut [f64],
        work: &mut Vec<Complex64>,
        scratch: &mut Vec<Complex64>,
    ) {
        work.clear();
        work.extend_from_slice(spec);
        self.fft2(work, scratch, false);
        a.par_iter_mut().zip(work.par_iter()).for_each(|(x, w)| *x = w.re);
    }

    /// Zero everything outside the 2/3 band.
    pub fn apply_dealias(&self, spec: &mut [Complex64]) {
        spec.par_iter_mut()
            .zip(self.dealias.par_iter())
            .for_each(|(s, m)| *s *= *m);
    }

    /// Multiply by i·k_axis (spectral derivative along one axis).
    pub fn derivative_spectrum(&self, spec: &[Complex64], axis: usize, out: &mut Vec<Complex64>) {
        let [_, n1] = self.n;
        out.resize(spec.len(), Complex64::new(0.0, 0.0));
        out.par_chunks_mut(n1)
            .zip(spec.par_chunks(n1))
            .enumerate()
            .for_each(|(i0, (o, s))| {
                for i1 in 0..n1 {
                    let kv = if axis == 0 { self.k[0][i0] } else { self.k[1][i1] };
                    o[i1] = Complex64::new(0.0, kv) * s[i1];
                }
            });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn roundtrip_and_plane_wave_amplitude() {
        let sp = Spectral::new([16, 16], 2.0 * std::f64::consts::PI);
        let n = sp.cells();
        let mut f = vec![0.0; n];
        for i0 in 0..16 {
            for i1 in 0..16 {
                let x = i0 as f64 * sp.dx();
                let y = i1 as f64 * sp.dx();
                f[i0 * 16 + i1] = 0.7 * (3.0 * x - 2.0 * y).cos();
            }
        }
        let mut spec = Vec::new();
        let mut scratch = Vec::new();
        sp.forward_real(&f, &mut spec, &mut scratch);
        // one-sided amplitude 0.35 at lattice (3, −2)
        let idx = sp.index_of_lattice([3, -2]);
        assert_relative_eq!(spec[idx].re, 0.35, epsilon = 1e-12);
        let mut back = vec![0.0; n];
        let mut work = Vec::new();
        sp.inverse_real(&spec, &mut back, &mut work, &mut scratch);
        for (a, b) in f.iter().zip(&back) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn pair_packing_matches_singles() {
        let sp = Spectral::new([12, 20], 3.0);
        let n = sp.cells();
        let a: Vec<f64> = (0..n).map(|i| ((i * 7 % 13) as f64).sin()).collect();
        let b: Vec<f64> = (0..n).map(|i| ((i * 5 % 11) as f64).cos()).collect();
        let (mut sa, mut sb, mut work, mut scratch) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        sp.forward_pair(&a, &b, &mut sa, &mut sb, &mut work, &mut scratch);
        let mut sa1 = Vec::new();
        let mut sb1 = Vec::new();
        sp.forward_real(&a, &mut sa1, &mut scratch);
        sp.forward_real(&b, &mut sb1, &mut scratch);
        for i in 0..n {
            assert!((sa[i] - sa1[i]).norm() < 1e-12);
            assert!((sb[i] - sb1[i]).norm() < 1e-12);
        }
        let mut ra = vec![0.0; n];
        let mut rb = vec![0.0; n];
        sp.inverse_pair(&sa, &sb, &mut ra, &mut rb, &mut work, &mut scratch);
        for i in 0..n {
            assert_relative_eq!(ra[i], a[i], epsilon = 1e-12);
            assert_relative_eq!(rb[i], b[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn spectral_derivative_exact_for_band_limited() {
        let sp = Spectral::new([32, 32], 2.0 * std::f64::consts::PI);
        let n = sp.cells();
        let mut f = vec![0.0; n];
        let mut dfdx = vec![0.0; n];
        for i0 in 0..32 {
            for i1 in 0..32 {
                let x = i0 as f64 * sp.dx();
                let y = i1 as f64 * sp.dx();
                f[i0 * 32 + i1] = (4.0 * x + y).sin();
                dfdx[i0 * 32 + i1] = 4.0 * (4.0 * x + y).cos();
            }
        }
        let (mut spec, mut dspec, mut work, mut scratch) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        sp.forward_real(&f, &mut spec, &mut scratch);
        sp.derivative_spectrum(&spec, 0, &mut dspec);
        let mut out = vec![0.0; n];
        sp.inverse_real(&dspec, &mut out, &mut work, &mut scratch);
        for i in 0..n {
            assert_relative_eq!(out[i], dfdx[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn dealias_mask_cutoff() {
        let sp = Spectral::new([24, 24], 1.0);
        // cutoff floor(24/3) = 8: |k| index 8 kept, 9 zeroed
        assert_eq!(sp.dealias[sp.index_of_lattice([8, 0])], 1.0);
        assert_eq!(sp.dealias[sp.index_of_lattice([9, 0])], 0.0);
        assert_eq!(sp.dealias[sp.index_of_lattice([-8, 8])], 1.0);
        assert_eq!(sp.dealias[sp.index_of_lattice([0, -9])], 0.0);
    }
}
