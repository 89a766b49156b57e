//! Three-dimensional complex FFT on a periodic grid, built from 1-D passes.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::lattice::WaveVector;

/// Smallest integer `>= n` whose only prime factors are 2, 3 and 5.
pub fn smooth_at_least(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

pub struct Grid3 {
    dims: [usize; 3],
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
}

impl std::fmt::Debug for Grid3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid3").field("dims", &self.dims).finish()
    }
}

impl Grid3 {
    pub fn new(dims: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = dims.map(|n| planner.plan_fft_forward(n));
        let inv = dims.map(|n| planner.plan_fft_inverse(n));
        Self { dims, fwd, inv }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.len()]
    }

    /// Flat index of the grid slot holding wavevector `n` (indices taken mod N).
    pub fn slot(&self, n: WaveVector) -> usize {
        let mut off = 0;
        for i in 0..3 {
            let d = self.dims[i] as i32;
            off = off * self.dims[i] + n.0[i].rem_euclid(d) as usize;
        }
        off
    }

    /// Spectral to physical: `f(x_j) = Σ_k c_k e^{i k·x_j}` (unnormalised).
    pub fn to_physical(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inv);
    }

    /// Physical to spectral, normalised so that `to_spectral ∘ to_physical = id`.
    pub fn to_spectral(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fwd);
        let s = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }

    fn transform(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 3]) {
        let [n0, n1, n2] = self.dims;
        assert_eq!(data.len(), n0 * n1 * n2);
        // last axis is contiguous
        plans[2].process(data);
        let mut line = Vec::new();
        // middle axis
        line.resize(n0 * n2 * n1, Complex64::new(0.0, 0.0));
        for a in 0..n0 {
            for c in 0..n2 {
                let base = (a * n2 + c) * n1;
                for b in 0..n1 {
                    line[base + b] = data[(a * n1 + b) * n2 + c];
                }
            }
        }
        plans[1].process(&mut line);
        for a in 0..n0 {
            for c in 0..n2 {
                let base = (a * n2 + c) * n1;
                for b in 0..n1 {
                    data[(a * n1 + b) * n2 + c] = line[base + b];
                }
            }
        }
        // first axis
        for b in 0..n1 {
            for c in 0..n2 {
                let base = (b * n2 + c) * n0;
                for a in 0..n0 {
                    line[base + a] = data[(a * n1 + b) * n2 + c];
                }
            }
        }
        plans[0].process(&mut line);
        for b in 0..n1 {
            for c in 0..n2 {
                let base = (b * n2 + c) * n0;
                for a in 0..n0 {
                    data[(a * n1 + b) * n2 + c] = line[base + a];
                }
            }
        }
    }
}
