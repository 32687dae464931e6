//! Big-endian encoding between basis-state indices, grid coordinates and
//! continuous hyper-rectangles of the discretized integration domain.
//!
//! Axis 1 (index 0 in every coordinate slice) occupies the least-significant
//! bit block of a linear index and axis `d` the most-significant one, so for
//! `qubits = [q_1, .., q_d]` the linear index of a cell is
//! `x_1 + x_2 * 2^q_1 + x_3 * 2^(q_1 + q_2) + ...`.
//!
//! Coordinates are always stored in axis order `[x_1, .., x_d]`. Bitstrings
//! written left to right read `x_d .. x_1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register simulated by default; a statevector of `2^26` complex
/// amplitudes takes 1 GiB.
pub const DEFAULT_MAX_QUBITS: u32 = 26;

/// Hard limit imposed by carrying linear indices in a `u64`.
const INDEX_BITS: u32 = 63;

/// Discretization of a `d`-dimensional box into `2^n` equal cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpecRepr", into = "GridSpecRepr")]
pub struct GridSpec {
    qubits: Vec<u32>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    offsets: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct GridSpecRepr {
    dims: usize,
    qubits: Vec<u32>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<GridSpecRepr> for GridSpec {
    type Error = Error;

    fn try_from(r: GridSpecRepr) -> Result<Self> {
        if r.dims != r.qubits.len() {
            return Err(Error::InvalidGrid(format!(
                "dims = {} but {} qubit counts given",
                r.dims,
                r.qubits.len()
            )));
        }
        GridSpec::new(r.qubits, r.lower, r.upper)
    }
}

impl From<GridSpec> for GridSpecRepr {
    fn from(g: GridSpec) -> Self {
        GridSpecRepr {
            dims: g.dims(),
            qubits: g.qubits,
            lower: g.lower,
            upper: g.upper,
        }
    }
}

impl GridSpec {
    /// Builds a grid with the default qubit limit.
    pub fn new(qubits: Vec<u32>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Self::with_max_qubits(qubits, lower, upper, DEFAULT_MAX_QUBITS)
    }

    pub fn with_max_qubits(
        qubits: Vec<u32>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        max_qubits: u32,
    ) -> Result<Self> {
        let d = qubits.len();
        if d == 0 {
            return Err(Error::InvalidGrid("at least one dimension required".into()));
        }
        if lower.len() != d || upper.len() != d {
            return Err(Error::InvalidGrid(format!(
                "{} qubit counts but {} lower and {} upper bounds",
                d,
                lower.len(),
                upper.len()
            )));
        }
        if let Some(i) = qubits.iter().position(|&q| q == 0) {
            return Err(Error::InvalidGrid(format!("axis {} has zero qubits", i + 1)));
        }
        for i in 0..d {
            if !(lower[i].is_finite() && upper[i].is_finite() && upper[i] > lower[i]) {
                return Err(Error::InvalidGrid(format!(
                    "axis {} has invalid bounds [{}, {}]",
                    i + 1,
                    lower[i],
                    upper[i]
                )));
            }
        }
        let n: u32 = qubits.iter().sum();
        let max = max_qubits.min(INDEX_BITS);
        if n > max {
            return Err(Error::TooManyQubits { qubits: n, max });
        }
        let offsets = qubits
            .iter()
            .scan(0u32, |acc, &q| {
                let off = *acc;
                *acc += q;
                Some(off)
            })
            .collect();
        Ok(GridSpec {
            qubits,
            lower,
            upper,
            offsets,
        })
    }

    /// Unit hypercube `[0,1]^d` with the given qubit split.
    pub fn unit(qubits: Vec<u32>) -> Result<Self> {
        let d = qubits.len();
        Self::new(qubits, vec![0.0; d], vec![1.0; d])
    }

    pub fn dims(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[u32] {
        &self.qubits
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn total_qubits(&self) -> u32 {
        self.qubits.iter().sum()
    }

    pub fn num_cells(&self) -> u64 {
        1u64 << self.total_qubits()
    }

    /// Number of cells along axis `axis` (0-based).
    pub fn axis_cells(&self, axis: usize) -> u64 {
        1u64 << self.qubits[axis]
    }

    /// Stride of axis `axis` in linear-index space.
    pub fn axis_stride(&self, axis: usize) -> u64 {
        1u64 << self.offsets[axis]
    }

    pub fn domain_volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| b - a)
            .product()
    }

    pub fn cell_widths(&self) -> Vec<f64> {
        (0..self.dims()).map(|i| self.cell_width(i)).collect()
    }

    pub fn cell_width(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.axis_cells(axis) as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dims()).map(|i| self.cell_width(i)).product()
    }

    pub fn linear_to_coords(&self, linear: u64) -> Result<Vec<u64>> {
        let mut coords = vec![0; self.dims()];
        self.decode_into(linear, &mut coords)?;
        Ok(coords)
    }

    /// Allocation-free variant of [`GridSpec::linear_to_coords`].
    pub fn decode_into(&self, linear: u64, coords: &mut [u64]) -> Result<()> {
        let cells = self.num_cells();
        if linear >= cells {
            return Err(Error::IndexOutOfRange {
                index: linear,
                cells,
            });
        }
        for (axis, c) in coords.iter_mut().enumerate() {
            let mask = self.axis_cells(axis) - 1;
            *c = (linear >> self.offsets[axis]) & mask;
        }
        Ok(())
    }

    pub fn coords_to_linear(&self, coords: &[u64]) -> Result<u64> {
        self.check_coords(coords)?;
        Ok(coords
            .iter()
            .zip(&self.offsets)
            .fold(0u64, |acc, (&c, &off)| acc | (c << off)))
    }

    pub fn check_coords(&self, coords: &[u64]) -> Result<()> {
        if coords.len() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                got: coords.len(),
            });
        }
        for (axis, &c) in coords.iter().enumerate() {
            let cells = self.axis_cells(axis);
            if c >= cells {
                return Err(Error::CoordOutOfRange {
                    axis,
                    value: c,
                    cells,
                });
            }
        }
        Ok(())
    }

    /// Continuous per-axis interval of the cell at `coords`.
    pub fn cell_bounds(&self, coords: &[u64]) -> Result<Vec<(f64, f64)>> {
        self.check_coords(coords)?;
        Ok(coords
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let w = self.cell_width(i);
                (self.lower[i] + x as f64 * w, self.lower[i] + (x + 1) as f64 * w)
            })
            .collect())
    }

    /// Continuous per-axis interval covered by a rect of cells.
    pub fn rect_bounds(&self, rect: &HyperRect) -> Vec<(f64, f64)> {
        (0..self.dims())
            .map(|i| {
                let w = self.cell_width(i);
                (
                    self.lower[i] + rect.lo[i] as f64 * w,
                    self.lower[i] + (rect.hi[i] + 1) as f64 * w,
                )
            })
            .collect()
    }

    pub fn rect_volume(&self, rect: &HyperRect) -> f64 {
        rect.cell_count() as f64 * self.cell_volume()
    }

    /// Rect spanning the whole grid.
    pub fn full_rect(&self) -> HyperRect {
        HyperRect {
            lo: vec![0; self.dims()],
            hi: (0..self.dims()).map(|i| self.axis_cells(i) - 1).collect(),
        }
    }
}

/// Axis-aligned block of grid cells, inclusive on both ends, in grid units.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HyperRect {
    pub lo: Vec<u64>,
    pub hi: Vec<u64>,
}

impl HyperRect {
    pub fn new(lo: Vec<u64>, hi: Vec<u64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if let Some(i) = lo.iter().zip(&hi).position(|(l, h)| l > h) {
            return Err(Error::InvalidGrid(format!(
                "rect has lo > hi on axis {}",
                i + 1
            )));
        }
        Ok(HyperRect { lo, hi })
    }

    pub fn single(coords: Vec<u64>) -> Self {
        HyperRect {
            hi: coords.clone(),
            lo: coords,
        }
    }

    pub fn dims(&self) -> usize {
        self.lo.len()
    }

    pub fn extent(&self, axis: usize) -> u64 {
        self.hi[axis] - self.lo[axis] + 1
    }

    pub fn cell_count(&self) -> u64 {
        (0..self.dims()).map(|i| self.extent(i)).product()
    }

    pub fn contains(&self, coords: &[u64]) -> bool {
        coords
            .iter()
            .enumerate()
            .all(|(i, &c)| self.lo[i] <= c && c <= self.hi[i])
    }

    pub fn fits(&self, spec: &GridSpec) -> bool {
        self.dims() == spec.dims()
            && (0..self.dims()).all(|i| self.lo[i] <= self.hi[i] && self.hi[i] < spec.axis_cells(i))
    }

    /// Linear indices of every cell in the rect, ascending.
    pub fn linear_indices<'a>(&'a self, spec: &'a GridSpec) -> impl Iterator<Item = u64> + 'a {
        let d = self.dims();
        let total = self.cell_count();
        let base: u64 = (0..d).map(|i| self.lo[i] * spec.axis_stride(i)).sum();
        (0..total).map(move |mut k| {
            let mut linear = base;
            for i in 0..d {
                let e = self.extent(i);
                linear += (k % e) * spec.axis_stride(i);
                k /= e;
            }
            linear
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit2(q: u32) -> GridSpec {
        GridSpec::unit(vec![q, q]).unwrap()
    }

    #[test]
    fn widths() {
        assert_eq!(GridSpec::unit(vec![5]).unwrap().cell_widths(), vec![0.03125]);
        assert_eq!(unit2(2).cell_widths(), vec![0.25, 0.25]);
        let g = GridSpec::new(vec![8, 4, 4], vec![0.0; 3], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(g.cell_width(0), 1.0 / 256.0);
    }

    // Coordinates are written [x_1, x_2]; "linear 6 -> (x_2, x_1) = (1, 2)".
    #[test]
    fn linear_coords_examples() {
        let g = unit2(2);
        assert_eq!(g.linear_to_coords(0).unwrap(), vec![0, 0]);
        assert_eq!(g.linear_to_coords(6).unwrap(), vec![2, 1]);
        assert_eq!(g.linear_to_coords(15).unwrap(), vec![3, 3]);
        assert_eq!(g.coords_to_linear(&[0, 0]).unwrap(), 0);
        assert_eq!(g.coords_to_linear(&[2, 1]).unwrap(), 6);
        assert!(matches!(
            g.linear_to_coords(16),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            g.coords_to_linear(&[4, 0]),
            Err(Error::CoordOutOfRange { axis: 0, .. })
        ));
    }

    #[test]
    fn exhaustive_round_trip() {
        for qubits in [vec![12], vec![3, 4, 5], vec![1, 2, 3, 2, 4], vec![6, 6]] {
            let g = GridSpec::unit(qubits).unwrap();
            for k in 0..g.num_cells() {
                let c = g.linear_to_coords(k).unwrap();
                assert_eq!(g.coords_to_linear(&c).unwrap(), k);
            }
        }
    }

    #[test]
    fn bounds_examples() {
        let g = unit2(2);
        let b = g.cell_bounds(&[2, 1]).unwrap();
        assert_eq!(b, vec![(0.5, 0.75), (0.25, 0.5)]);
        let g = GridSpec::new(vec![2, 3], vec![-1.0, 2.0], vec![1.0, 6.0]).unwrap();
        let b = g.cell_bounds(&[0, 0]).unwrap();
        assert_eq!(b, vec![(-1.0, -0.5), (2.0, 2.5)]);
    }

    #[test]
    fn cells_tile_domain_exactly() {
        // Sorted per-axis edges of all cells must chain from a_i to b_i and
        // every point of a fine probe lattice must land in exactly one cell.
        let g = GridSpec::new(vec![2, 3, 1], vec![0.0, -1.0, 2.0], vec![1.0, 1.0, 5.0]).unwrap();
        let cells: Vec<_> = (0..g.num_cells())
            .map(|k| g.cell_bounds(&g.linear_to_coords(k).unwrap()).unwrap())
            .collect();
        let probe = |t: f64, i: usize| g.lower()[i] + t * (g.upper()[i] - g.lower()[i]);
        for a in 0..13 {
            for b in 0..13 {
                for c in 0..13 {
                    let x = [
                        probe((a as f64 + 0.37) / 13.0, 0),
                        probe((b as f64 + 0.37) / 13.0, 1),
                        probe((c as f64 + 0.37) / 13.0, 2),
                    ];
                    let hits = cells
                        .iter()
                        .filter(|bd| bd.iter().zip(&x).all(|(&(lo, hi), &v)| lo < v && v < hi))
                        .count();
                    assert_eq!(hits, 1);
                }
            }
        }
        let total: f64 = (0..g.num_cells())
            .map(|k| g.rect_volume(&HyperRect::single(g.linear_to_coords(k).unwrap())))
            .sum();
        assert!((total - g.domain_volume()).abs() < 1e-12 * g.domain_volume());
    }

    #[test]
    fn rect_volumes() {
        let g = unit2(5);
        assert_eq!(g.rect_volume(&HyperRect::single(vec![3, 7])), 1.0 / 1024.0);
        let g2 = GridSpec::new(vec![3, 2], vec![0.0, 1.0], vec![2.0, 4.0]).unwrap();
        assert!((g2.rect_volume(&g2.full_rect()) - 6.0).abs() < 1e-15);
        let r = HyperRect::new(vec![0, 1], vec![3, 2]).unwrap();
        assert_eq!(r.cell_count(), 8);
        assert_eq!(unit2(2).rect_volume(&r), 0.5);
    }

    #[test]
    fn volume_sum_by_summation() {
        let g = GridSpec::new(vec![4, 6, 6], vec![0.0, 0.0, -2.0], vec![3.0, 0.7, 2.0]).unwrap();
        let v = g.cell_volume();
        let vols: Vec<f64> = (0..g.num_cells()).map(|_| v).collect();
        let total = crate::stats::pairwise_sum(&vols);
        assert!((total - g.domain_volume()).abs() < 1e-12 * g.domain_volume());
    }

    #[test]
    fn rect_linear_indices() {
        let g = unit2(2);
        let r = HyperRect::new(vec![1, 0], vec![3, 1]).unwrap();
        let idx: Vec<_> = r.linear_indices(&g).collect();
        assert_eq!(idx, vec![1, 2, 3, 5, 6, 7]);
    }

    #[test]
    fn invalid_specs() {
        assert!(GridSpec::unit(vec![]).is_err());
        assert!(GridSpec::unit(vec![0, 2]).is_err());
        assert!(GridSpec::new(vec![2], vec![1.0], vec![1.0]).is_err());
        assert!(matches!(
            GridSpec::unit(vec![14, 13]),
            Err(Error::TooManyQubits { qubits: 27, max: 26 })
        ));
        assert!(GridSpec::with_max_qubits(vec![14, 13], vec![0.0; 2], vec![1.0; 2], 40).is_ok());
    }

    #[test]
    fn serde_keys() {
        let g = GridSpec::new(vec![8, 4, 4], vec![0.0; 3], vec![1.0; 3]).unwrap();
        let s = toml::to_string(&g).unwrap();
        assert!(s.contains("dims = 3"));
        assert!(s.contains("qubits = [8, 4, 4]"));
        let back: GridSpec = toml::from_str(&s).unwrap();
        assert_eq!(back, g);
        let bad = "dims = 2\nqubits = [1]\nlower = [0.0]\nupper = [1.0]\n";
        assert!(toml::from_str::<GridSpec>(bad).is_err());
    }

    proptest! {
        #[test]
        fn random_round_trip(qubits in proptest::collection::vec(1u32..=5, 1..=5), seed in any::<u64>()) {
            let g = GridSpec::unit(qubits).unwrap();
            let k = seed % g.num_cells();
            let c = g.linear_to_coords(k).unwrap();
            prop_assert_eq!(g.coords_to_linear(&c).unwrap(), k);
        }

        #[test]
        fn axis1_neighbours_are_adjacent(q1 in 1u32..8, q2 in 1u32..5, seed in any::<u64>()) {
            let g = GridSpec::unit(vec![q1, q2]).unwrap();
            let k = seed % g.num_cells();
            let c = g.linear_to_coords(k).unwrap();
            prop_assume!(c[0] + 1 < g.axis_cells(0));
            let a = g.cell_bounds(&c).unwrap();
            let b = g.cell_bounds(&g.linear_to_coords(k + 1).unwrap()).unwrap();
            prop_assert_eq!(a[0].1, b[0].0);
            prop_assert_eq!(a[1], b[1]);
        }
    }
}
