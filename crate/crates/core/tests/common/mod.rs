#![allow(dead_code)]

use covcd_core::linalg::{hermitian_eigen, ComplexMatrix, C64};
use covcd_core::quantum::{DensityMatrix, LuedersInstrument, Povm};
use proptest::prelude::*;

/// Enough uniform draws to build any object below for `d <= 6`.
pub const POOL: usize = 512;

pub fn pool() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, POOL)
}

/// Draws values off a pool in order.
pub struct Draw<'a> {
    values: &'a [f64],
    at: usize,
}

impl<'a> Draw<'a> {
    pub fn new(values: &'a [f64]) -> Self {
        Self { values, at: 0 }
    }

    pub fn next(&mut self) -> f64 {
        let v = self.values[self.at % self.values.len()];
        self.at += 1;
        v
    }

    pub fn unit(&mut self) -> f64 {
        0.5 * (self.next() + 1.0)
    }

    pub fn ket(&mut self, dim: usize) -> Vec<C64> {
        loop {
            let v: Vec<C64> = (0..dim).map(|_| C64::new(self.next(), self.next())).collect();
            let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n > 1e-3 {
                return v.iter().map(|z| z / n).collect();
            }
        }
    }

    pub fn general(&mut self, dim: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(dim, |_, _| C64::new(self.next(), self.next()))
    }

    /// `G G^dagger`, positive semidefinite.
    pub fn psd(&mut self, dim: usize) -> ComplexMatrix {
        let g = self.general(dim);
        &g * &g.adjoint()
    }

    pub fn density(&mut self, dim: usize) -> DensityMatrix {
        let m = self.psd(dim);
        let t = m.trace().re;
        DensityMatrix::new(m.scale(1.0 / t)).unwrap()
    }

    pub fn pure(&mut self, dim: usize) -> DensityMatrix {
        DensityMatrix::pure(&self.ket(dim)).unwrap()
    }

    /// `E_i = S^{-1/2} A_i S^{-1/2}` with `S = sum_i A_i`.
    pub fn povm(&mut self, dim: usize, outcomes: usize) -> Povm {
        let parts: Vec<ComplexMatrix> =
            (0..outcomes).map(|_| &self.psd(dim) + &ComplexMatrix::identity(dim).scale(1e-3)).collect();
        let mut total = ComplexMatrix::zeros(dim);
        for p in &parts {
            total = &total + p;
        }
        let inv_sqrt = hermitian_eigen(&total).unwrap().map_values(|l| 1.0 / l.sqrt());
        let effects: Vec<ComplexMatrix> =
            parts.iter().map(|p| (&(&inv_sqrt * p) * &inv_sqrt).hermitian_part()).collect();
        let labels = (0..outcomes).map(|i| i as f64).collect();
        Povm::from_matrices(effects, labels).unwrap()
    }

    /// Two-outcome POVM with random eigenbasis and spectrum, labels `+1`, `-1`.
    pub fn dichotomic(&mut self, dim: usize) -> Povm {
        let mut h = self.general(dim);
        h = h.hermitian_part();
        let eig = hermitian_eigen(&h).unwrap();
        let spectrum: Vec<f64> = (0..dim).map(|_| self.unit()).collect();
        let mut i = 0;
        let plus = eig.map_values(|_| {
            let v = spectrum[i];
            i += 1;
            v
        });
        let minus = &ComplexMatrix::identity(dim) - &plus;
        Povm::from_matrices(vec![plus.hermitian_part(), minus.hermitian_part()], vec![1.0, -1.0]).unwrap()
    }

    pub fn instrument(&mut self, dim: usize, outcomes: usize) -> LuedersInstrument {
        LuedersInstrument::new(self.povm(dim, outcomes)).unwrap()
    }

    pub fn bloch(&mut self) -> [f64; 3] {
        loop {
            let v = [self.next(), self.next(), self.next()];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 1e-3 && n <= 1.0 {
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    }
}
