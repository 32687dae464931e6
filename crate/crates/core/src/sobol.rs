//! Sobol low-discrepancy points with an optional modulo-1 random shift.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const MAX_DIMS: usize = 8;
const BITS: usize = 32;

// new-joe-kuo-6.21201: (a, m_1..m_s) for dimensions 2..=8. Dimension 1 is
// the van der Corput sequence.
const DIRECTION_PARAMS: [(u32, &[u32]); MAX_DIMS - 1] = [
    (0, &[1]),
    (1, &[1, 3]),
    (1, &[1, 3, 1]),
    (2, &[1, 1, 1]),
    (1, &[1, 1, 3, 3]),
    (4, &[1, 3, 5, 13]),
    (2, &[1, 1, 5, 5, 17]),
];

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = 1 << (31 - i);
        }
        return v;
    }
    let (a, m) = DIRECTION_PARAMS[dim - 1];
    let s = m.len();
    for i in 0..s {
        v[i] = m[i] << (31 - i);
    }
    for i in s..BITS {
        v[i] = v[i - s] ^ (v[i - s] >> s);
        for k in 1..s {
            if (a >> (s - 1 - k)) & 1 == 1 {
                v[i] ^= v[i - k];
            }
        }
    }
    v
}

/// Gray-code Sobol generator over `[0,1)^d`.
#[derive(Debug, Clone)]
pub struct Sobol {
    v: Vec<[u32; BITS]>,
    x: Vec<u32>,
    index: u64,
}

impl Sobol {
    pub fn new(dims: usize) -> Result<Self> {
        if dims == 0 || dims > MAX_DIMS {
            return Err(Error::SobolDims {
                got: dims,
                max: MAX_DIMS,
            });
        }
        Ok(Sobol {
            v: (0..dims).map(direction_numbers).collect(),
            x: vec![0; dims],
            index: 0,
        })
    }

    pub fn dims(&self) -> usize {
        self.v.len()
    }

    /// Writes the next point into `out`. The first point is the origin.
    pub fn next_into(&mut self, out: &mut [f64]) {
        const SCALE: f64 = 1.0 / 4_294_967_296.0;
        for (o, &x) in out.iter_mut().zip(&self.x) {
            *o = x as f64 * SCALE;
        }
        let c = self.index.trailing_ones() as usize;
        for (x, v) in self.x.iter_mut().zip(&self.v) {
            *x ^= v[c.min(BITS - 1)];
        }
        self.index += 1;
    }
}

/// Sobol stream with a Cranley-Patterson shift mapped into a box.
#[derive(Debug, Clone)]
pub struct ShiftedSobol {
    sobol: Sobol,
    shift: Vec<f64>,
    buf: Vec<f64>,
}

impl ShiftedSobol {
    pub fn new(dims: usize, shift: Vec<f64>) -> Result<Self> {
        if shift.len() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                got: shift.len(),
            });
        }
        Ok(ShiftedSobol {
            sobol: Sobol::new(dims)?,
            buf: vec![0.0; dims],
            shift,
        })
    }

    pub fn unshifted(dims: usize) -> Result<Self> {
        Self::new(dims, vec![0.0; dims])
    }

    /// Stream whose shift is drawn from `(seed, stream)`.
    pub fn seeded(dims: usize, seed: u64, stream: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let shift = (0..dims).map(|_| rng.random::<f64>()).collect();
        Self::new(dims, shift)
    }

    /// Next point affinely mapped into `bounds`.
    pub fn next_in(&mut self, bounds: &[(f64, f64)], out: &mut [f64]) {
        self.sobol.next_into(&mut self.buf);
        for i in 0..out.len() {
            let mut u = self.buf[i] + self.shift[i];
            if u >= 1.0 {
                u -= 1.0;
            }
            let (lo, hi) = bounds[i];
            out[i] = lo + (hi - lo) * u;
        }
    }
}

/// First `m` points of a shifted Sobol stream inside `bounds`.
pub fn sobol_points(bounds: &[(f64, f64)], m: usize, seed: u64, stream: u64) -> Result<Vec<Vec<f64>>> {
    let d = bounds.len();
    let mut s = ShiftedSobol::seeded(d, seed, stream)?;
    Ok((0..m)
        .map(|_| {
            let mut p = vec![0.0; d];
            s.next_in(bounds, &mut p);
            p
        })
        .collect())
}
