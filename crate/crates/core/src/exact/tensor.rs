use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::poly::PolyFunction;
use super::scalar::{Rational, Scalar};

/// Fully symmetric tensor stored by sorted index tuples.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SymTensor {
    rank: usize,
    dim: usize,
    entries: BTreeMap<Vec<usize>, Scalar>,
}

pub fn factorial(k: u32) -> Rational {
    (1..=k).fold(Rational::from_integer(1.into()), |acc, v| acc * Rational::from_integer(v.into()))
}

impl SymTensor {
    pub fn zero(rank: usize, dim: usize) -> Self {
        SymTensor { rank, dim, entries: BTreeMap::new() }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &Scalar)> {
        self.entries.iter()
    }

    pub fn get(&self, idx: &[usize]) -> Scalar {
        let mut k = idx.to_vec();
        k.sort_unstable();
        self.entries.get(&k).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn set(&mut self, idx: &[usize], v: Scalar) {
        assert_eq!(idx.len(), self.rank, "rank mismatch");
        assert!(idx.iter().all(|&i| i < self.dim), "index out of range");
        let mut k = idx.to_vec();
        k.sort_unstable();
        if v.is_zero() {
            self.entries.remove(&k);
        } else {
            self.entries.insert(k, v);
        }
    }

    /// Tensor `P` of a homogeneous polynomial written as `(1/k!) P_{i1..ik} y^{i1}..y^{ik}`.
    pub fn from_homogeneous(p: &PolyFunction, rank: usize) -> Self {
        let mut t = SymTensor::zero(rank, p.dim());
        for (e, c) in p.terms() {
            assert_eq!(e.iter().sum::<u32>() as usize, rank, "polynomial is not homogeneous of the requested degree");
            let weight = e.iter().fold(Rational::from_integer(1.into()), |acc, &k| acc * factorial(k));
            let mut idx = Vec::with_capacity(rank);
            for (i, &k) in e.iter().enumerate() {
                idx.extend(std::iter::repeat_n(i, k as usize));
            }
            t.set(&idx, c.scale(&weight));
        }
        t
    }

    /// Inverse of [`SymTensor::from_homogeneous`].
    pub fn to_polynomial(&self) -> PolyFunction {
        let mut p = PolyFunction::zero(self.dim);
        for (idx, c) in &self.entries {
            let mut e = vec![0u32; self.dim];
            for &i in idx {
                e[i] += 1;
            }
            let weight = e.iter().fold(Rational::from_integer(1.into()), |acc, &k| acc * factorial(k));
            p.add_term(e, c.scale(&(Rational::from_integer(1.into()) / weight)));
        }
        p
    }

    /// Apply a linear change of variables `y = A y'` to the tensor slots.
    pub fn transform(&self, a: &super::linalg::RMatrix) -> Self {
        let subs: Vec<PolyFunction> = (0..self.dim)
            .map(|i| {
                let mut p = PolyFunction::zero(a.cols());
                for j in 0..a.cols() {
                    p.add_term(
                        {
                            let mut e = vec![0; a.cols()];
                            e[j] = 1;
                            e
                        },
                        Scalar::real(a[(i, j)].clone()),
                    );
                }
                p
            })
            .collect();
        SymTensor::from_homogeneous(&self.to_polynomial().compose(&subs), self.rank)
    }
}
