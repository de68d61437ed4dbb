use serde::{Deserialize, Serialize};

use super::{Result, SolverError};

/// Uniform periodic grid on the torus `[0, L)^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    #[serde(with = "length_bits")]
    length_bits: u64,
}

// Stored as bits so the grid can be `Eq`/`Hash`.
mod length_bits {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(f64::from_bits(*bits))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        Ok(f64::deserialize(d)?.to_bits())
    }
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(SolverError::InvalidConfig(format!("dim must be 1, 2 or 3, got {dim}")));
        }
        if n < 4 {
            return Err(SolverError::InvalidConfig(format!("n must be >= 4, got {n}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(SolverError::InvalidConfig(format!("length must be positive, got {length}")));
        }
        Ok(Self { dim, n, length_bits: length.to_bits() })
    }

    /// Unit torus.
    pub fn unit(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        f64::from_bits(self.length_bits)
    }

    pub fn num_cells(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Cell width `L / n`.
    pub fn h(&self) -> f64 {
        self.length() / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    pub fn domain_volume(&self) -> f64 {
        self.length().powi(self.dim as i32)
    }

    /// Flat-index stride of `axis` (axis 0 varies slowest).
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.dim - 1 - axis) as u32)
    }

    #[inline]
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            idx[axis] = rem % self.n;
            rem /= self.n;
        }
        idx
    }

    #[inline]
    pub fn flat_index(&self, idx: [usize; 3]) -> usize {
        (0..self.dim).fold(0, |acc, axis| acc * self.n + idx[axis])
    }

    /// Periodic neighbour of `flat` one cell forward (`+1`) or back (`-1`)
    /// along `axis`.
    #[inline]
    pub fn neighbor(&self, flat: usize, axis: usize, forward: bool) -> usize {
        let stride = self.stride(axis);
        let i = (flat / stride) % self.n;
        if forward {
            if i + 1 == self.n {
                flat + stride - self.n * stride
            } else {
                flat + stride
            }
        } else if i == 0 {
            flat + (self.n - 1) * stride
        } else {
            flat - stride
        }
    }

    /// Cell-centre coordinates; components beyond `dim` are zero.
    pub fn center(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let h = self.h();
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = (idx[axis] as f64 + 0.5) * h;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Grid::new(0, 8, 1.0).is_err());
        assert!(Grid::new(4, 8, 1.0).is_err());
        assert!(Grid::new(1, 3, 1.0).is_err());
        assert!(Grid::new(1, 8, 0.0).is_err());
        let g = Grid::new(2, 8, 2.0).unwrap();
        assert_eq!(g.num_cells(), 64);
        assert_eq!(g.cell_volume(), 0.0625);
    }

    #[test]
    fn index_round_trip_and_neighbors() {
        let g = Grid::unit(3, 5).unwrap();
        for flat in 0..g.num_cells() {
            assert_eq!(g.flat_index(g.multi_index(flat)), flat);
            for axis in 0..3 {
                let f = g.neighbor(flat, axis, true);
                assert_eq!(g.neighbor(f, axis, false), flat);
                let (a, b) = (g.multi_index(flat), g.multi_index(f));
                assert_eq!(b[axis], (a[axis] + 1) % 5);
            }
        }
        let g1 = Grid::unit(1, 4).unwrap();
        assert_eq!(g1.neighbor(3, 0, true), 0);
        assert_eq!(g1.neighbor(0, 0, false), 3);
        assert_eq!(g1.center(0), [0.125, 0.0, 0.0]);
    }
}
