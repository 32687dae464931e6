//! Completion of a sparse set of measured cells to an exact partition of the
//! grid. Every run of unmeasured cells between two measured states, in
//! linear order, is covered greedily by hyper-rectangles and attached to the
//! following measured state.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, HyperRect};
use crate::statevector::ShotCounts;

/// Measured basis states sorted by linear index, with their shot counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasuredSet {
    entries: Vec<(u64, u64)>,
    total: u64,
}

impl MeasuredSet {
    /// Sorts `entries` and validates them.
    pub fn new(mut entries: Vec<(u64, u64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyMeasuredSet);
        }
        entries.sort_unstable_by_key(|e| e.0);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicateState(w[0].0));
            }
        }
        if let Some(e) = entries.iter().find(|e| e.1 == 0) {
            return Err(Error::Config(format!("state {} has zero count", e.0)));
        }
        let total = entries.iter().map(|e| e.1).sum();
        Ok(MeasuredSet { entries, total })
    }

    pub fn from_counts(counts: &ShotCounts) -> Result<Self> {
        Self::new(counts.entries().to_vec())
    }

    pub fn entries(&self) -> &[(u64, u64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn contains(&self, index: u64) -> bool {
        self.entries.binary_search_by_key(&index, |e| e.0).is_ok()
    }

    fn check_fits(&self, spec: &GridSpec) -> Result<()> {
        let last = self.entries[self.entries.len() - 1].0;
        if last >= spec.num_cells() {
            return Err(Error::IndexOutOfRange {
                index: last,
                cells: spec.num_cells(),
            });
        }
        Ok(())
    }
}

/// Tile shape grown from `start` by the greedy rule, and the number of cells
/// it holds. The cells are exactly the next `filled` linear indices.
pub fn greedy_expand(spec: &GridSpec, start: &[u64], delta: u64) -> Result<(Vec<u64>, u64)> {
    spec.check_coords(start)?;
    if delta == 0 {
        return Err(Error::Config("greedy expansion needs delta >= 1".into()));
    }
    let d = spec.dims();
    let mut shape = vec![1u64; d];
    shape[0] = delta.min(spec.axis_cells(0) - start[0]);
    let mut comb_vol = 1u64;
    for a in 1..d {
        comb_vol *= spec.axis_cells(a - 1);
        if start[a - 1] == 0 && shape[a - 1] == spec.axis_cells(a - 1) {
            let ext = delta / comb_vol;
            if ext > 0 {
                shape[a] = (spec.axis_cells(a) - start[a]).min(ext);
            }
        } else {
            break;
        }
    }
    let filled = shape.iter().product();
    Ok((shape, filled))
}

/// Rects covering the `delta` consecutive cells starting at `from`.
pub fn gap_tiles(spec: &GridSpec, from: u64, delta: u64) -> Result<Vec<HyperRect>> {
    if from.checked_add(delta).is_none_or(|end| end > spec.num_cells()) {
        return Err(Error::IndexOutOfRange {
            index: from.saturating_add(delta),
            cells: spec.num_cells(),
        });
    }
    let mut rects = Vec::new();
    let mut pos = from;
    let mut left = delta;
    let mut coords = vec![0u64; spec.dims()];
    while left > 0 {
        spec.decode_into(pos, &mut coords)?;
        let (shape, filled) = greedy_expand(spec, &coords, left)?;
        let hi = coords.iter().zip(&shape).map(|(c, s)| c + s - 1).collect();
        rects.push(HyperRect {
            lo: coords.clone(),
            hi,
        });
        pos += filled;
        left -= filled;
    }
    Ok(rects)
}

/// A measured anchor cell together with the unmeasured tiles merged into it.
#[derive(Debug, Clone, PartialEq)]
pub struct TileGroup {
    pub anchor: u64,
    pub count: u64,
    /// Anchor cell first, then gap tiles in linear order.
    pub rects: Vec<HyperRect>,
    /// Number of gap rects contributed by each gap attached to this group.
    pub gap_rects: Vec<usize>,
    pub cells: u64,
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TileCoverage {
    pub groups: Vec<TileGroup>,
}

impl TileCoverage {
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn total_volume(&self) -> f64 {
        self.groups.iter().map(|g| g.volume).sum()
    }

    pub fn total_cells(&self) -> u64 {
        self.groups.iter().map(|g| g.cells).sum()
    }

    pub fn rect_count(&self) -> usize {
        self.groups.iter().map(|g| g.rects.len()).sum()
    }

    /// One row per rect: group, anchor, rect index, lo/hi per axis, cells, volume.
    pub fn write_csv<W: Write>(&self, spec: &GridSpec, out: W) -> Result<()> {
        let d = spec.dims();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["group".to_string(), "anchor".into(), "rect".into()];
        header.extend((1..=d).map(|i| format!("lo_{i}")));
        header.extend((1..=d).map(|i| format!("hi_{i}")));
        header.extend(["cells".into(), "volume".into()]);
        w.write_record(&header)?;
        for (g, group) in self.groups.iter().enumerate() {
            for (r, rect) in group.rects.iter().enumerate() {
                let mut row = vec![g.to_string(), group.anchor.to_string(), r.to_string()];
                row.extend(rect.lo.iter().map(u64::to_string));
                row.extend(rect.hi.iter().map(u64::to_string));
                row.push(rect.cell_count().to_string());
                row.push(format!("{:e}", spec.rect_volume(rect)));
                w.write_record(&row)?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, spec: &GridSpec, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(spec, std::io::BufWriter::new(f))
    }
}

/// Signature of a gap tiler, so checks can run against alternative
/// implementations.
pub type GapTiler = fn(&GridSpec, u64, u64) -> Result<Vec<HyperRect>>;

pub fn full_coverage(spec: &GridSpec, measured: &MeasuredSet) -> Result<TileCoverage> {
    full_coverage_with(spec, measured, gap_tiles)
}

pub fn full_coverage_with(spec: &GridSpec, measured: &MeasuredSet, tiler: GapTiler) -> Result<TileCoverage> {
    measured.check_fits(spec)?;
    let entries = measured.entries();
    let m = entries.len();
    let cells = spec.num_cells();
    let groups = (0..m)
        .into_par_iter()
        .map(|k| -> Result<TileGroup> {
            let (anchor, count) = entries[k];
            let mut rects = vec![HyperRect::single(spec.linear_to_coords(anchor)?)];
            let mut gap_rects = Vec::new();
            let gap_start = if k == 0 { 0 } else { entries[k - 1].0 + 1 };
            let mut gaps = vec![(gap_start, anchor - gap_start)];
            if k + 1 == m {
                gaps.push((anchor + 1, cells - anchor - 1));
            }
            for (from, delta) in gaps {
                if delta > 0 {
                    let tiles = tiler(spec, from, delta)?;
                    gap_rects.push(tiles.len());
                    rects.extend(tiles);
                }
            }
            let n_cells = rects.iter().map(HyperRect::cell_count).sum::<u64>();
            Ok(TileGroup {
                anchor,
                count,
                volume: n_cells as f64 * spec.cell_volume(),
                cells: n_cells,
                rects,
                gap_rects,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TileCoverage { groups })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Important,
    Boundary,
    Noise,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Region::Important => "important",
            Region::Boundary => "boundary",
            Region::Noise => "noise",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct RegionCounts {
    pub important: usize,
    pub boundary: usize,
    pub noise: usize,
}

impl RegionCounts {
    pub fn from_labels(labels: &[Region]) -> Self {
        let mut c = RegionCounts::default();
        for l in labels {
            match l {
                Region::Important => c.important += 1,
                Region::Boundary => c.boundary += 1,
                Region::Noise => c.noise += 1,
            }
        }
        c
    }
}

/// Labels each measured cell (in `measured` order). Noise: no measured
/// axis neighbour. Important: a neighbour and at least `kappa * N / M` shots.
pub fn classify_regions(spec: &GridSpec, measured: &MeasuredSet, kappa: f64) -> Result<Vec<Region>> {
    measured.check_fits(spec)?;
    let threshold = kappa * measured.total() as f64 / measured.len() as f64;
    let d = spec.dims();
    let mut coords = vec![0u64; d];
    let mut labels = Vec::with_capacity(measured.len());
    for &(idx, count) in measured.entries() {
        spec.decode_into(idx, &mut coords)?;
        let mut neighbour = false;
        for a in 0..d {
            let stride = spec.axis_stride(a);
            if (coords[a] > 0 && measured.contains(idx - stride))
                || (coords[a] + 1 < spec.axis_cells(a) && measured.contains(idx + stride))
            {
                neighbour = true;
                break;
            }
        }
        labels.push(if !neighbour {
            Region::Noise
        } else if count as f64 >= threshold {
            Region::Important
        } else {
            Region::Boundary
        });
    }
    Ok(labels)
}

/// First property violation found for a coverage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Uncovered(u64),
    Overlap(u64),
    OutsideGrid,
    TooManyRects { anchor: u64, rects: usize, bound: usize },
    AnchorNotFirst(u64),
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Uncovered(c) => write!(f, "cell {c} is not covered"),
            Violation::Overlap(c) => write!(f, "cell {c} is covered more than once"),
            Violation::OutsideGrid => write!(f, "a rect leaves the grid"),
            Violation::TooManyRects { anchor, rects, bound } => {
                write!(f, "a gap of group {anchor} uses {rects} rects, bound {bound}")
            }
            Violation::AnchorNotFirst(a) => write!(f, "group {a} does not start with its anchor cell"),
        }
    }
}

pub fn rect_bound(d: usize) -> usize {
    2 * (d - 1) + 1
}

/// Checks the partition and per-gap rect bound by enumerating every cell.
pub fn verify_coverage(spec: &GridSpec, coverage: &TileCoverage) -> std::result::Result<(), Violation> {
    let bound = rect_bound(spec.dims());
    let mut seen = vec![false; spec.num_cells() as usize];
    for g in &coverage.groups {
        let own = HyperRect::single(spec.linear_to_coords(g.anchor).map_err(|_| Violation::OutsideGrid)?);
        if g.rects.first() != Some(&own) {
            return Err(Violation::AnchorNotFirst(g.anchor));
        }
        if let Some(&r) = g.gap_rects.iter().find(|&&r| r > bound) {
            return Err(Violation::TooManyRects {
                anchor: g.anchor,
                rects: r,
                bound,
            });
        }
        for rect in &g.rects {
            if !rect.fits(spec) {
                return Err(Violation::OutsideGrid);
            }
            for c in rect.linear_indices(spec) {
                if std::mem::replace(&mut seen[c as usize], true) {
                    return Err(Violation::Overlap(c));
                }
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(c) => Err(Violation::Uncovered(c as u64)),
        None => Ok(()),
    }
}

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    pub trials: usize,
    pub min_dims: usize,
    pub max_dims: usize,
    pub max_qubits: u32,
    /// Cap on the number of measured states per trial.
    pub max_measured: usize,
    pub seed: u64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            trials: 1000,
            min_dims: 1,
            max_dims: 5,
            max_qubits: 16,
            max_measured: 4096,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FuzzFailure {
    pub trial: usize,
    /// Seed that regenerates this trial through [`fuzz_trial`].
    pub trial_seed: u64,
    pub qubits: Vec<u32>,
    pub measured: Vec<u64>,
    pub violation: String,
}

#[derive(Debug, Clone, Default)]
pub struct FuzzReport {
    pub trials: usize,
    pub failures: Vec<FuzzFailure>,
    /// Largest per-gap rect count seen, by dimension (index 0 is d = 1).
    pub max_gap_rects: Vec<usize>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn trial_seed(master: u64, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial as u64);
    rng.random()
}

/// Random spec and measured set for one fuzz trial.
pub fn fuzz_case(cfg: &FuzzConfig, seed: u64) -> (GridSpec, MeasuredSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(cfg.min_dims..=cfg.max_dims);
    let n = rng.random_range(d as u32..=cfg.max_qubits.max(d as u32));
    let mut q = vec![1u32; d];
    for _ in 0..(n - d as u32) {
        q[rng.random_range(0..d)] += 1;
    }
    let spec = GridSpec::unit(q).expect("fuzz spec within limits");
    let cells = spec.num_cells() as usize;
    // Log-uniform M so both sparse and dense records occur.
    let cap = cells.min(cfg.max_measured).max(1);
    let m = ((cap as f64).ln() * rng.random::<f64>()).exp().round().clamp(1.0, cap as f64) as usize;
    let picks = rand::seq::index::sample(&mut rng, cells, m);
    let entries = picks
        .into_iter()
        .map(|i| (i as u64, rng.random_range(1..=10u64)))
        .collect();
    (spec, MeasuredSet::new(entries).expect("distinct picks"))
}

pub fn fuzz_trial(cfg: &FuzzConfig, seed: u64, tiler: GapTiler) -> std::result::Result<(usize, usize), String> {
    let (spec, measured) = fuzz_case(cfg, seed);
    let cov = full_coverage_with(&spec, &measured, tiler).map_err(|e| e.to_string())?;
    verify_coverage(&spec, &cov).map_err(|v| v.to_string())?;
    let max = cov
        .groups
        .iter()
        .flat_map(|g| g.gap_rects.iter().copied())
        .max()
        .unwrap_or(0);
    Ok((spec.dims(), max))
}

/// Runs the partition and rect-bound properties over random cases.
pub fn fuzz_check(cfg: &FuzzConfig, tiler: GapTiler) -> FuzzReport {
    let results: Vec<_> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(cfg.seed, t);
            (t, seed, fuzz_trial(cfg, seed, tiler))
        })
        .collect();
    let mut report = FuzzReport {
        trials: cfg.trials,
        failures: Vec::new(),
        max_gap_rects: vec![0; cfg.max_dims],
    };
    for (trial, seed, r) in results {
        match r {
            Ok((d, max)) => {
                let slot = &mut report.max_gap_rects[d - 1];
                *slot = (*slot).max(max);
            }
            Err(violation) => {
                let (spec, measured) = fuzz_case(cfg, seed);
                report.failures.push(FuzzFailure {
                    trial,
                    trial_seed: seed,
                    qubits: spec.qubits().to_vec(),
                    measured: measured.entries().iter().map(|e| e.0).collect(),
                    violation,
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid4() -> GridSpec {
        GridSpec::unit(vec![2, 2]).unwrap()
    }

    // Coordinates below are in axis order [x_1, x_2]; the tuple (x_2, x_1)
    // reads them the other way round.
    fn rect(lo: [u64; 2], hi: [u64; 2]) -> HyperRect {
        HyperRect::new(vec![lo[1], lo[0]], vec![hi[1], hi[0]]).unwrap()
    }

    #[test]
    fn greedy_hand_traces() {
        let g = grid4();
        assert_eq!(greedy_expand(&g, &[1, 0], 14).unwrap(), (vec![3, 1], 3));
        assert_eq!(greedy_expand(&g, &[0, 1], 11).unwrap(), (vec![4, 2], 8));
        assert_eq!(greedy_expand(&g, &[0, 3], 3).unwrap(), (vec![3, 1], 3));
    }

    #[test]
    fn gap_hand_trace() {
        let g = grid4();
        let tiles = gap_tiles(&g, 1, 14).unwrap();
        assert_eq!(
            tiles,
            vec![rect([0, 1], [0, 3]), rect([1, 0], [2, 3]), rect([3, 0], [3, 2])]
        );
        assert!(gap_tiles(&g, 3, 0).unwrap().is_empty());
        assert!(gap_tiles(&g, 3, 14).is_err());
    }

    #[test]
    fn one_dimensional_gaps_are_single_rects() {
        let g = GridSpec::unit(vec![6]).unwrap();
        for from in 0..64 {
            for delta in 1..=(64 - from) {
                assert_eq!(gap_tiles(&g, from, delta).unwrap().len(), 1);
            }
        }
    }

    #[test]
    fn corners_of_4x4() {
        let g = grid4();
        let m = MeasuredSet::new(vec![(15, 2), (0, 3)]).unwrap();
        let cov = full_coverage(&g, &m).unwrap();
        assert_eq!(cov.groups[0].anchor, 0);
        assert_eq!(cov.groups[0].cells, 1);
        assert_eq!(cov.groups[0].rects.len(), 1);
        let g15 = &cov.groups[1];
        assert_eq!(g15.cells, 15);
        assert_eq!(g15.rects[0], HyperRect::single(vec![3, 3]));
        assert_eq!(&g15.rects[1..], &gap_tiles(&g, 1, 14).unwrap()[..]);
        assert_eq!(cov.total_cells(), 16);
        verify_coverage(&g, &cov).unwrap();
    }

    #[test]
    fn everything_measured() {
        let g = GridSpec::unit(vec![2, 1, 1]).unwrap();
        let m = MeasuredSet::new((0..16).map(|i| (i, 1)).collect()).unwrap();
        let cov = full_coverage(&g, &m).unwrap();
        assert_eq!(cov.len(), 16);
        assert!(cov.groups.iter().all(|g| g.rects.len() == 1 && g.gap_rects.is_empty()));
    }

    #[test]
    fn single_state_takes_whole_line() {
        let g = GridSpec::unit(vec![3]).unwrap();
        let cov = full_coverage(&g, &MeasuredSet::new(vec![(5, 7)]).unwrap()).unwrap();
        let grp = &cov.groups[0];
        assert_eq!(grp.cells, 8);
        assert_eq!(
            grp.rects,
            vec![
                HyperRect::single(vec![5]),
                HyperRect::new(vec![0], vec![4]).unwrap(),
                HyperRect::new(vec![6], vec![7]).unwrap(),
            ]
        );
        assert!((cov.total_volume() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn measured_set_validation() {
        assert!(matches!(MeasuredSet::new(vec![]), Err(Error::EmptyMeasuredSet)));
        assert!(matches!(MeasuredSet::new(vec![(1, 1), (1, 2)]), Err(Error::DuplicateState(1))));
        assert!(MeasuredSet::new(vec![(1, 0)]).is_err());
        let g = grid4();
        assert!(full_coverage(&g, &MeasuredSet::new(vec![(16, 1)]).unwrap()).is_err());
    }

    #[test]
    fn regions() {
        let g = GridSpec::unit(vec![4, 4]).unwrap();
        let iso = MeasuredSet::new(vec![(g.coords_to_linear(&[7, 7]).unwrap(), 100)]).unwrap();
        assert_eq!(classify_regions(&g, &iso, 1.0).unwrap(), vec![Region::Noise]);

        let mut block = Vec::new();
        for x in 3..6 {
            for y in 8..11 {
                block.push((g.coords_to_linear(&[x, y]).unwrap(), 5));
            }
        }
        let m = MeasuredSet::new(block.clone()).unwrap();
        assert!(classify_regions(&g, &m, 1.0).unwrap().iter().all(|&r| r == Region::Important));

        // Low-count neighbour becomes Boundary; a far-away cell stays Noise.
        block.push((g.coords_to_linear(&[6, 8]).unwrap(), 1));
        block.push((g.coords_to_linear(&[0, 0]).unwrap(), 50));
        let m = MeasuredSet::new(block).unwrap();
        let labels = classify_regions(&g, &m, 1.0).unwrap();
        let of = |c: [u64; 2]| {
            let idx = g.coords_to_linear(&c).unwrap();
            labels[m.entries().iter().position(|e| e.0 == idx).unwrap()]
        };
        assert_eq!(of([6, 8]), Region::Boundary);
        assert_eq!(of([0, 0]), Region::Noise);
        // Wrapping along axis 1 is not adjacency.
        let wrap = MeasuredSet::new(vec![(15, 1), (16, 1)]).unwrap();
        assert_eq!(classify_regions(&g, &wrap, 1.0).unwrap(), vec![Region::Noise; 2]);
    }

    #[test]
    fn csv_rows() {
        let g = grid4();
        let cov = full_coverage(&g, &MeasuredSet::new(vec![(0, 1), (15, 1)]).unwrap()).unwrap();
        let mut buf = Vec::new();
        cov.write_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "group,anchor,rect,lo_1,lo_2,hi_1,hi_2,cells,volume");
        assert_eq!(lines.len(), 1 + 5);
        assert_eq!(lines[3], "1,15,1,1,0,3,0,3,1.875e-1");
    }

    #[test]
    fn fuzz_default_small() {
        let cfg = FuzzConfig {
            trials: 200,
            ..Default::default()
        };
        let report = fuzz_check(&cfg, gap_tiles);
        assert!(report.passed(), "{:?}", report.failures.first());
    }

    fn overlapping_tiler(spec: &GridSpec, from: u64, delta: u64) -> Result<Vec<HyperRect>> {
        let mut rects = gap_tiles(spec, from, delta)?;
        if delta > 1 {
            rects.push(HyperRect::single(spec.linear_to_coords(from)?));
        }
        Ok(rects)
    }

    #[test]
    fn fuzz_catches_injected_overlap() {
        let cfg = FuzzConfig {
            trials: 50,
            ..Default::default()
        };
        let report = fuzz_check(&cfg, overlapping_tiler);
        assert!(!report.passed());
        let f = &report.failures[0];
        assert!(f.violation.contains("more than once") || f.violation.contains("rects"));
        assert!(fuzz_trial(&cfg, f.trial_seed, overlapping_tiler).is_err());
        assert!(fuzz_trial(&cfg, f.trial_seed, gap_tiles).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn expansion_fills_consecutive_cells(
            q in prop::collection::vec(1u32..=3, 1..=4),
            start_frac in 0.0f64..1.0,
            delta_frac in 0.0f64..1.0,
        ) {
            let g = GridSpec::unit(q).unwrap();
            let cells = g.num_cells();
            let start = ((start_frac * cells as f64) as u64).min(cells - 1);
            let delta = 1 + ((delta_frac * (cells - start) as f64) as u64).min(cells - start - 1);
            let coords = g.linear_to_coords(start).unwrap();
            let (shape, filled) = greedy_expand(&g, &coords, delta).unwrap();
            prop_assert!(filled >= 1 && filled <= delta);
            let hi: Vec<u64> = coords.iter().zip(&shape).map(|(c, s)| c + s - 1).collect();
            let r = HyperRect::new(coords.clone(), hi).unwrap();
            let got: Vec<u64> = r.linear_indices(&g).collect();
            let want: Vec<u64> = (start..start + filled).collect();
            prop_assert_eq!(got, want);
        }

        #[test]
        fn coverage_ignores_input_order(seed in any::<u64>()) {
            let cfg = FuzzConfig { max_qubits: 10, max_dims: 4, ..Default::default() };
            let (spec, m) = fuzz_case(&cfg, seed);
            let mut rev = m.entries().to_vec();
            rev.reverse();
            let a = full_coverage(&spec, &m).unwrap();
            let b = full_coverage(&spec, &MeasuredSet::new(rev).unwrap()).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
