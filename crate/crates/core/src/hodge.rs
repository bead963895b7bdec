//! Hodge star on basis blades of an oriented orthonormal basis of R^m.
//!
//! A blade `±e_{i1} ∧ … ∧ e_{ik}` is stored as its sorted index list and a
//! sign. The star maps it to the complementary index set, signed by the
//! parity of the permutation `[i1 … ik, j1 … j(m-k)]`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HodgeError {
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("index {index} outside 1..={dim}")]
    OutOfRange { index: usize, dim: usize },
    #[error("index {0} appears more than once")]
    Duplicate(usize),
    #[error("sign must be +1 or -1, got {0}")]
    BadSign(i8),
}

/// Signed basis k-vector in R^m. The empty index list is the scalar blade.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisBlade {
    dim: usize,
    indices: Vec<usize>,
    sign: i8,
}

impl BasisBlade {
    /// Builds a blade from 1-based indices. The indices are sorted; the
    /// sign absorbs the parity of that sort, so `new(3, [2, 1], 1)` is
    /// `-e1∧e2`.
    pub fn new(dim: usize, indices: &[usize], sign: i8) -> Result<Self, HodgeError> {
        if dim == 0 {
            return Err(HodgeError::ZeroDimension);
        }
        if sign != 1 && sign != -1 {
            return Err(HodgeError::BadSign(sign));
        }
        for &i in indices {
            if i == 0 || i > dim {
                return Err(HodgeError::OutOfRange { index: i, dim });
            }
        }
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(HodgeError::Duplicate(w[0]));
        }
        let parity = inversion_parity(indices);
        Ok(Self {
            dim,
            indices: sorted,
            sign: sign * parity,
        })
    }

    /// The scalar `±1` in `Λ^0(R^m)`.
    pub fn scalar(dim: usize, sign: i8) -> Result<Self, HodgeError> {
        Self::new(dim, &[], sign)
    }

    /// `e1 ∧ … ∧ em`.
    pub fn volume(dim: usize) -> Result<Self, HodgeError> {
        let all: Vec<usize> = (1..=dim).collect();
        Self::new(dim, &all, 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn grade(&self) -> usize {
        self.indices.len()
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// Complementary indices, increasing.
    pub fn complement(&self) -> Vec<usize> {
        let mut present = vec![false; self.dim + 1];
        for &i in &self.indices {
            present[i] = true;
        }
        (1..=self.dim).filter(|&j| !present[j]).collect()
    }
}

impl fmt::Display for BasisBlade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign > 0 { '+' } else { '-' };
        if self.indices.is_empty() {
            return write!(f, "{s}1");
        }
        let body: Vec<String> = self.indices.iter().map(|i| format!("e{i}")).collect();
        write!(f, "{s}{}", body.join("∧"))
    }
}

/// Hodge dual of a basis blade.
pub fn hodge_star(blade: &BasisBlade) -> BasisBlade {
    let comp = blade.complement();
    // Both halves are sorted, so the only inversions are (i, j) pairs across
    // the split with i > j.
    let crossings: usize = blade
        .indices
        .iter()
        .map(|&i| comp.iter().take_while(|&&j| j < i).count())
        .sum();
    let parity = if crossings.is_multiple_of(2) { 1 } else { -1 };
    BasisBlade {
        dim: blade.dim,
        indices: comp,
        sign: blade.sign * parity,
    }
}

/// Sign of the permutation that sorts `seq` (entries assumed distinct).
fn inversion_parity(seq: &[usize]) -> i8 {
    let mut inv = 0usize;
    for a in 0..seq.len() {
        for b in a + 1..seq.len() {
            if seq[a] > seq[b] {
                inv += 1;
            }
        }
    }
    if inv.is_multiple_of(2) {
        1
    } else {
        -1
    }
}
