//! Exact n-qubit statevector simulation of the layered ansatz, probability
//! extraction and shot sampling.
//!
//! Qubit `l` is wire `l` in big-endian order: it controls bit `n - 1 - l` of
//! the basis-state index, so qubit 0 is the most significant bit.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DEFAULT_MAX_QUBITS;

/// Tolerance on `sum(p) == 1` accepted by [`sample`].
pub const PMF_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: u32,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Uniform superposition over all `2^n` basis states.
    pub fn uniform(n: u32) -> Result<Self> {
        check_register(n)?;
        let len = 1usize << n;
        let a = Complex64::new((len as f64).sqrt().recip(), 0.0);
        Ok(StateVector {
            n,
            amps: vec![a; len],
        })
    }

    pub fn basis(n: u32, index: u64) -> Result<Self> {
        check_register(n)?;
        let len = 1usize << n;
        if index >= len as u64 {
            return Err(Error::IndexOutOfRange {
                index,
                cells: len as u64,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); len];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two and the
    /// vector normalized to `1e-12`.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::PmfLength {
                got: len,
                expected: len.next_power_of_two().max(2),
            });
        }
        let n = len.trailing_zeros();
        check_register(n)?;
        let sum: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Unnormalized { sum });
        }
        Ok(StateVector { n, amps })
    }

    pub fn num_qubits(&self) -> u32 {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Basis-state probabilities `|c_k|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn bit(&self, qubit: usize) -> Result<usize> {
        if qubit >= self.n as usize {
            return Err(Error::InvalidQubit { qubit, n: self.n });
        }
        Ok(self.n as usize - 1 - qubit)
    }

    /// `exp(-i theta P_i P_j)` for a Pauli axis `P`.
    pub fn apply_two_qubit_rotation(
        &mut self,
        axis: Pauli,
        i: usize,
        j: usize,
        theta: f64,
    ) -> Result<()> {
        if i == j {
            return Err(Error::RepeatedQubit(i));
        }
        let mask = (1usize << self.bit(i)?) | (1usize << self.bit(j)?);
        let (s, c) = theta.sin_cos();
        match axis {
            Pauli::Z => {
                // ZZ has eigenvalue +1 on equal bits, -1 otherwise.
                let same = Complex64::new(c, -s);
                let diff = Complex64::new(c, s);
                for (k, a) in self.amps.iter_mut().enumerate() {
                    let parity = (k & mask).count_ones() & 1;
                    *a *= if parity == 0 { same } else { diff };
                }
            }
            Pauli::X | Pauli::Y => {
                // PP maps |k> to sign * |k ^ mask>; XX has sign +1, YY has
                // sign -1 on equal bits and +1 on differing bits.
                let low = mask & mask.wrapping_neg();
                for k in 0..self.amps.len() {
                    if k & low != 0 {
                        continue;
                    }
                    let k2 = k ^ mask;
                    let sign = match axis {
                        Pauli::Y if (k & mask).count_ones() & 1 == 0 => -1.0,
                        _ => 1.0,
                    };
                    let mix = Complex64::new(0.0, -s * sign);
                    let (a, b) = (self.amps[k], self.amps[k2]);
                    self.amps[k] = a * c + b * mix;
                    self.amps[k2] = b * c + a * mix;
                }
            }
        }
        Ok(())
    }

    /// `exp(-i beta Z) exp(-i alpha Y) exp(-i gamma Z)` on `qubit`, with
    /// the gamma rotation applied first.
    pub fn apply_u3(&mut self, qubit: usize, alpha: f64, beta: f64, gamma: f64) -> Result<()> {
        let bit = self.bit(qubit)?;
        let m = u3_matrix(alpha, beta, gamma);
        self.apply_single(bit, &m);
        Ok(())
    }

    fn apply_single(&mut self, bit: usize, m: &[[Complex64; 2]; 2]) {
        let stride = 1usize << bit;
        for chunk in self.amps.chunks_mut(stride << 1) {
            let (lo, hi) = chunk.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a0, *a1);
                *a0 = m[0][0] * x + m[0][1] * y;
                *a1 = m[1][0] * x + m[1][1] * y;
            }
        }
    }
}

fn check_register(n: u32) -> Result<()> {
    if n == 0 || n > DEFAULT_MAX_QUBITS {
        return Err(Error::TooManyQubits {
            qubits: n,
            max: DEFAULT_MAX_QUBITS,
        });
    }
    Ok(())
}

pub(crate) fn u3_matrix(alpha: f64, beta: f64, gamma: f64) -> [[Complex64; 2]; 2] {
    let (sa, ca) = alpha.sin_cos();
    let eb = Complex64::from_polar(1.0, -beta);
    let eg = Complex64::from_polar(1.0, -gamma);
    // diag(eb, eb*) * [[ca, -sa], [sa, ca]] * diag(eg, eg*)
    [
        [eb * eg * ca, -(eb * eg.conj()) * sa],
        [eb.conj() * eg * sa, eb.conj() * eg.conj() * ca],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// One layer of the ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    /// All-pairs `exp(-i theta_ij P_i P_j)`, one angle per pair `i < j`.
    Entangler(Pauli),
    /// Per-qubit three-angle rotation.
    Rotation,
}

impl Layer {
    pub fn num_params(&self, n: u32) -> usize {
        let n = n as usize;
        match self {
            Layer::Entangler(_) => n * (n - 1) / 2,
            Layer::Rotation => 3 * n,
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Layer::Entangler(Pauli::X) => f.write_str("EX"),
            Layer::Entangler(Pauli::Y) => f.write_str("EY"),
            Layer::Entangler(Pauli::Z) => f.write_str("EZ"),
            Layer::Rotation => f.write_str("U3"),
        }
    }
}

impl FromStr for Layer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "EX" | "E(X)" | "XX" => Ok(Layer::Entangler(Pauli::X)),
            "EY" | "E(Y)" | "YY" => Ok(Layer::Entangler(Pauli::Y)),
            "EZ" | "E(Z)" | "ZZ" => Ok(Layer::Entangler(Pauli::Z)),
            "U3" | "R" => Ok(Layer::Rotation),
            other => Err(Error::Parse(format!(
                "unknown layer {other:?} (expected EX, EY, EZ or U3)"
            ))),
        }
    }
}

impl Serialize for Layer {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Layer {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnsatzSpec {
    pub layers: Vec<Layer>,
}

impl AnsatzSpec {
    pub fn new(layers: Vec<Layer>) -> Self {
        AnsatzSpec { layers }
    }

    /// Parses a comma- or whitespace-separated layer list such as `"EZ,U3,EX,U3"`.
    pub fn parse(s: &str) -> Result<Self> {
        let layers = s
            .split(|c: char| c == ',' || c.is_whitespace() || c == '>' || c == '-')
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        if layers.is_empty() {
            return Err(Error::Parse("empty ansatz".into()));
        }
        Ok(AnsatzSpec { layers })
    }

    pub fn num_params(&self, n: u32) -> usize {
        self.layers.iter().map(|l| l.num_params(n)).sum()
    }
}

impl fmt::Display for AnsatzSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.layers.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Flat list of angles in layer order. Entangler angles follow pairs
/// `(i, j)`, `i < j`, lexicographically; rotation angles are
/// `(gamma, alpha, beta)` per qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn zeros(len: usize) -> Self {
        ParamVector(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Prepares the uniform superposition and applies every layer in order.
pub fn run_ansatz(spec: &AnsatzSpec, n: u32, params: &[f64]) -> Result<StateVector> {
    let expected = spec.num_params(n);
    if params.len() != expected {
        return Err(Error::ParamLength {
            got: params.len(),
            expected,
        });
    }
    let mut state = StateVector::uniform(n)?;
    let nq = n as usize;
    let mut it = params.iter().copied();
    for layer in &spec.layers {
        match *layer {
            Layer::Entangler(axis) => {
                for i in 0..nq {
                    for j in i + 1..nq {
                        state.apply_two_qubit_rotation(axis, i, j, it.next().unwrap())?;
                    }
                }
            }
            Layer::Rotation => {
                for l in 0..nq {
                    let gamma = it.next().unwrap();
                    let alpha = it.next().unwrap();
                    let beta = it.next().unwrap();
                    state.apply_u3(l, alpha, beta, gamma)?;
                }
            }
        }
    }
    Ok(state)
}

/// Shot record: basis-state index to occurrence count, ascending by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotCounts {
    entries: Vec<(u64, u64)>,
    total: u64,
}

impl ShotCounts {
    pub fn from_sorted(entries: Vec<(u64, u64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        let total = entries.iter().map(|e| e.1).sum();
        ShotCounts { entries, total }
    }

    pub fn entries(&self) -> &[(u64, u64)] {
        &self.entries
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct states observed.
    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: u64) -> u64 {
        self.entries
            .binary_search_by_key(&index, |e| e.0)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    pub fn into_entries(self) -> Vec<(u64, u64)> {
        self.entries
    }
}

/// Draws `shots` independent outcomes from `pmf` by inverse CDF.
pub fn sample(pmf: &[f64], shots: u64, seed: u64) -> Result<ShotCounts> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(pmf, shots, &mut rng)
}

pub fn sample_with<R: Rng + ?Sized>(pmf: &[f64], shots: u64, rng: &mut R) -> Result<ShotCounts> {
    let cdf = cumulative(pmf)?;
    let total = *cdf.last().unwrap();
    let mut draws: Vec<u64> = Vec::with_capacity(shots as usize);
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let k = cdf.partition_point(|&c| c <= u).min(pmf.len() - 1);
        draws.push(k as u64);
    }
    draws.sort_unstable();
    let mut entries: Vec<(u64, u64)> = Vec::new();
    for k in draws {
        match entries.last_mut() {
            Some(last) if last.0 == k => last.1 += 1,
            _ => entries.push((k, 1)),
        }
    }
    Ok(ShotCounts::from_sorted(entries))
}

fn cumulative(pmf: &[f64]) -> Result<Vec<f64>> {
    if pmf.is_empty() {
        return Err(Error::Unnormalized { sum: 0.0 });
    }
    let mut acc = 0.0;
    let mut cdf = Vec::with_capacity(pmf.len());
    for &p in pmf {
        if !(p >= 0.0) {
            return Err(Error::Unnormalized { sum: f64::NAN });
        }
        acc += p;
        cdf.push(acc);
    }
    if (acc - 1.0).abs() > PMF_TOLERANCE {
        return Err(Error::Unnormalized { sum: acc });
    }
    Ok(cdf)
}

/// Trained-parameter record persisted as TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub n: u32,
    pub qubits: Vec<u32>,
    pub layers: AnsatzSpec,
    pub seed: u64,
    pub final_kl: f64,
    pub params: Vec<f64>,
}

impl ParamsFile {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("params file is always representable")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let f: ParamsFile = toml::from_str(&s).map_err(|e| Error::Parse(e.to_string()))?;
        let expected = f.layers.num_params(f.n);
        if f.params.len() != expected {
            return Err(Error::ParamLength {
                got: f.params.len(),
                expected,
            });
        }
        if f.qubits.iter().sum::<u32>() != f.n {
            return Err(Error::Parse(format!(
                "qubit split {:?} does not sum to n = {}",
                f.qubits, f.n
            )));
        }
        Ok(f)
    }

    pub fn state(&self) -> Result<StateVector> {
        run_ansatz(&self.layers, self.n, &self.params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn uniform_init() {
        let s = StateVector::uniform(1).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(s.amplitudes().iter().all(|a| close(a.re, r, 1e-15) && a.im == 0.0));
        let s = StateVector::uniform(3).unwrap();
        assert_eq!(s.amplitudes().len(), 8);
        assert!(close(s.norm_sqr(), 1.0, 1e-15));
        assert!(s.probabilities().iter().all(|&p| close(p, 0.125, 1e-15)));
        assert!(StateVector::uniform(0).is_err());
        assert!(StateVector::uniform(27).is_err());
    }

    #[test]
    fn zz_is_diagonal() {
        let mut s = StateVector::basis(3, 5).unwrap();
        s.apply_two_qubit_rotation(Pauli::Z, 0, 2, 0.7).unwrap();
        let p = s.probabilities();
        assert!(close(p[5], 1.0, 1e-15));
    }

    #[test]
    fn xx_examples() {
        let mut s = StateVector::basis(2, 0).unwrap();
        s.apply_two_qubit_rotation(Pauli::X, 0, 1, FRAC_PI_2).unwrap();
        let a = s.amplitudes()[3];
        assert!(close(a.re, 0.0, 1e-15) && close(a.im, -1.0, 1e-15));

        let mut s = StateVector::basis(2, 0).unwrap();
        s.apply_two_qubit_rotation(Pauli::X, 0, 1, FRAC_PI_4).unwrap();
        let p = s.probabilities();
        assert!(close(p[0], 0.5, 1e-15) && close(p[3], 0.5, 1e-15));
    }

    #[test]
    fn two_qubit_errors() {
        let mut s = StateVector::uniform(2).unwrap();
        assert!(matches!(
            s.apply_two_qubit_rotation(Pauli::X, 1, 1, 0.1),
            Err(Error::RepeatedQubit(1))
        ));
        assert!(matches!(
            s.apply_two_qubit_rotation(Pauli::X, 0, 2, 0.1),
            Err(Error::InvalidQubit { qubit: 2, .. })
        ));
        assert!(s.apply_u3(5, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn u3_examples() {
        let mut s = StateVector::uniform(2).unwrap();
        let before = s.clone();
        s.apply_u3(1, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(s, before);

        let mut s = StateVector::basis(1, 0).unwrap();
        s.apply_u3(0, FRAC_PI_2, 0.0, 0.0).unwrap();
        assert!(close(s.probabilities()[1], 1.0, 1e-15));

        let mut s = StateVector::uniform(2).unwrap();
        s.apply_u3(0, 0.0, 1.3, -0.4).unwrap();
        assert!(s.probabilities().iter().all(|&p| close(p, 0.25, 1e-15)));
    }

    #[test]
    fn param_counts() {
        let one = AnsatzSpec::parse("EZ,U3").unwrap();
        assert_eq!(one.num_params(5), 25);
        let two = AnsatzSpec::parse("EZ,U3,EX,U3").unwrap();
        assert_eq!(two.num_params(16), 336);
        assert_eq!(two.num_params(19), 456);
        // Single E(Z)+U3 block on 16 qubits: 120 + 48.
        assert_eq!(one.num_params(16), 168);
    }

    #[test]
    fn zero_params_give_uniform() {
        let spec = AnsatzSpec::parse("EZ,U3,EX,U3,EY,U3").unwrap();
        let n = 4;
        let s = run_ansatz(&spec, n, &vec![0.0; spec.num_params(n)]).unwrap();
        assert!(s.probabilities().iter().all(|&p| close(p, 1.0 / 16.0, 1e-14)));
        assert!(matches!(
            run_ansatz(&spec, n, &[0.0; 3]),
            Err(Error::ParamLength { got: 3, .. })
        ));
    }

    #[test]
    fn layer_parsing() {
        let a = AnsatzSpec::parse("E(Z) -> U3 -> E(X) -> R").unwrap();
        assert_eq!(a.to_string(), "EZ,U3,EX,U3");
        assert!(AnsatzSpec::parse("EZ,QQ").is_err());
        assert!(AnsatzSpec::parse("").is_err());
    }

    #[test]
    fn sampling_indicator_and_determinism() {
        let mut pmf = vec![0.0; 8];
        pmf[5] = 1.0;
        let c = sample(&pmf, 1000, 3).unwrap();
        assert_eq!(c.entries(), &[(5, 1000)]);

        let pmf = vec![0.1, 0.2, 0.3, 0.4];
        assert_eq!(sample(&pmf, 5000, 9).unwrap(), sample(&pmf, 5000, 9).unwrap());
        assert!(matches!(
            sample(&[0.5, 0.4], 10, 0),
            Err(Error::Unnormalized { .. })
        ));
    }

    #[test]
    fn sampling_binomial_band() {
        let n = 1_000_000u64;
        let c = sample(&[0.5, 0.5], n, 11).unwrap();
        assert_eq!(c.total(), n);
        let k0 = c.get(0) as f64;
        assert!((k0 - 5e5).abs() < 5.0 * (n as f64 * 0.25).sqrt());
    }

    #[test]
    fn params_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let layers = AnsatzSpec::parse("EZ,U3").unwrap();
        let f = ParamsFile {
            n: 3,
            qubits: vec![2, 1],
            params: (0..layers.num_params(3)).map(|i| 0.1 * i as f64 + 1e-17).collect(),
            layers,
            seed: 7,
            final_kl: 0.123456789012345678,
        };
        let path = dir.path().join("p.toml");
        f.write(&path).unwrap();
        assert_eq!(ParamsFile::read(&path).unwrap(), f);
    }
}
