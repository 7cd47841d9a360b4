//! Mirror-transfer amplitudes of r-excitation basis states.
//!
//! The XX chain maps onto free fermions, so the amplitude to carry the
//! excitations at `ℓ_1 < … < ℓ_r` onto their mirror images is the
//! determinant of the `r x r` matrix of single-particle amplitudes
//! `A[i][j] = ⟨n+1-ℓ_j| U(t) |ℓ_i⟩`. Only magnitudes enter the transfer
//! conditions, so fermionic ordering signs are not tracked here.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, PgstError, Result};
use crate::linalg;
use crate::spectral::{eigensystem, ChainSpec};

/// Strictly increasing 1-based excited-site positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExcitationConfig {
    positions: Vec<usize>,
}

impl ExcitationConfig {
    pub fn new(positions: Vec<usize>) -> Result<Self> {
        if positions.first() == Some(&0) {
            return Err(domain("site positions are 1-based"));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain(format!(
                "positions {positions:?} are not strictly increasing"
            )));
        }
        Ok(Self { positions })
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// Excitation number.
    pub fn r(&self) -> usize {
        self.positions.len()
    }

    /// Image under `ℓ -> n+1-ℓ`, sorted ascending.
    pub fn mirror(&self, n: usize) -> Self {
        let mut positions: Vec<usize> = self.positions.iter().rev().map(|&l| n + 1 - l).collect();
        debug_assert!(positions.windows(2).all(|w| w[0] < w[1]));
        positions.shrink_to_fit();
        Self { positions }
    }

    /// Occupation bitmask, bit `ℓ-1` set for every excited site.
    pub fn bitmask(&self) -> u64 {
        self.positions
            .iter()
            .fold(0u64, |acc, &l| acc | 1 << (l - 1))
    }

    pub(crate) fn check_fits(&self, spec: ChainSpec) -> Result<()> {
        match self.positions.last() {
            None => Err(domain("configuration has no excitations")),
            Some(&last) if last > spec.n() => Err(domain(format!(
                "configuration {self} exceeds chain of {} sites",
                spec.n()
            ))),
            Some(_) => Ok(()),
        }
    }
}

impl fmt::Display for ExcitationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, p) in self.positions.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(")")
    }
}

/// All `C(m, r)` increasing r-tuples over `1..=m`, lexicographic.
pub fn enumerate_configs(m: usize, r: usize) -> Result<Vec<ExcitationConfig>> {
    if r == 0 || r > m {
        return Err(domain(format!("need 1 <= r <= m, got r={r}, m={m}")));
    }
    let mut out = Vec::new();
    let mut current: Vec<usize> = (1..=r).collect();
    loop {
        out.push(ExcitationConfig {
            positions: current.clone(),
        });
        // advance the rightmost position that still has room
        let Some(i) = (0..r).rev().find(|&i| current[i] < m - (r - 1 - i)) else {
            break;
        };
        current[i] += 1;
        for k in i + 1..r {
            current[k] = current[k - 1] + 1;
        }
    }
    Ok(out)
}

/// Matrix of single-particle amplitudes whose determinant is the
/// r-excitation mirror amplitude. Row `i` is the source `ℓ_i`, column `j`
/// the target `n+1-ℓ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaterMatrix {
    entries: DMatrix<Complex64>,
}

impl SlaterMatrix {
    /// Builds the matrix for distinct sites given in any order.
    pub fn from_sites(spec: ChainSpec, sites: &[usize], t: f64) -> Result<Self> {
        for &s in sites {
            spec.check_site(s)?;
        }
        for (i, a) in sites.iter().enumerate() {
            if sites[i + 1..].contains(a) {
                return Err(domain(format!("site {a} repeated")));
            }
        }
        if !t.is_finite() {
            return Err(domain("time must be finite"));
        }
        let eig = eigensystem(spec);
        let phases = eig.phases(t);
        let r = sites.len();
        let entries = DMatrix::from_fn(r, r, |i, j| {
            eig.transfer_with_phases(sites[i], spec.mirror(sites[j]), &phases)
        });
        Ok(Self { entries })
    }

    pub fn new(spec: ChainSpec, config: &ExcitationConfig, t: f64) -> Result<Self> {
        config.check_fits(spec)?;
        Self::from_sites(spec, config.positions(), t)
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn determinant(&self) -> Complex64 {
        linalg::lu_determinant(&self.entries)
    }
}

/// Mirror-transfer amplitude of an r-excitation basis state (Slater
/// determinant of single-particle amplitudes).
pub fn slater_amplitude(spec: ChainSpec, config: &ExcitationConfig, t: f64) -> Result<Complex64> {
    Ok(SlaterMatrix::new(spec, config, t)?.determinant())
}

/// The `2^m - 1` transfer magnitudes at one time, keyed by configuration.
///
/// Ordered by excitation number, then lexicographically: the `m` single
/// excitations come first.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionSet {
    entries: Vec<(ExcitationConfig, f64)>,
}

impl ConditionSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ExcitationConfig, f64)> {
        self.entries.iter().map(|(c, v)| (c, *v))
    }

    pub fn get(&self, config: &ExcitationConfig) -> Option<f64> {
        self.entries
            .iter()
            .find(|(c, _)| c == config)
            .map(|(_, v)| *v)
    }

    pub fn min(&self) -> f64 {
        self.entries
            .iter()
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Precomputed evaluator of the transfer conditions for a fixed `(n, m)`.
///
/// Holds the products `v_k(ℓ) v_k(n+1-ℓ')` for every sender pair so that a
/// time point costs `n` complex exponentials plus `m² n` multiply-adds and
/// one small determinant per configuration.
#[derive(Debug, Clone)]
pub struct ConditionEvaluator {
    spec: ChainSpec,
    m: usize,
    eigenvalues: Vec<f64>,
    /// `weights[(i*m + j)*n + k] = v_{k+1}(i+1) · v_{k+1}(n-j)`.
    weights: Vec<f64>,
    configs: Vec<ExcitationConfig>,
}

impl ConditionEvaluator {
    pub fn new(spec: ChainSpec, m: usize) -> Result<Self> {
        spec.check_blocks(m)?;
        let n = spec.n();
        let eig = eigensystem(spec);
        let mut weights = vec![0.0; m * m * n];
        for i in 0..m {
            for j in 0..m {
                for k in 0..n {
                    weights[(i * m + j) * n + k] =
                        eig.component(k + 1, i + 1) * eig.component(k + 1, spec.mirror(j + 1));
                }
            }
        }
        let mut configs = Vec::with_capacity((1usize << m) - 1);
        for r in 1..=m {
            configs.extend(enumerate_configs(m, r)?);
        }
        Ok(Self {
            spec,
            m,
            eigenvalues: eig.eigenvalues().to_vec(),
            weights,
            configs,
        })
    }

    pub fn spec(&self) -> ChainSpec {
        self.spec
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Condition labels in evaluation order.
    pub fn configs(&self) -> &[ExcitationConfig] {
        &self.configs
    }

    /// `A[i*m + j] = ⟨n-j| U(t) |i+1⟩` for `i, j < m`.
    pub fn amplitude_block(&self, t: f64) -> Vec<Complex64> {
        let n = self.spec.n();
        let m = self.m;
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&l| Complex64::from_polar(1.0, -l * t))
            .collect();
        let mut block = vec![Complex64::new(0.0, 0.0); m * m];
        for (idx, out) in block.iter_mut().enumerate() {
            let w = &self.weights[idx * n..(idx + 1) * n];
            let mut re = 0.0;
            let mut im = 0.0;
            for (wk, p) in w.iter().zip(&phases) {
                re += wk * p.re;
                im += wk * p.im;
            }
            *out = Complex64::new(re, im);
        }
        block
    }

    fn for_each_value(&self, t: f64, mut visit: impl FnMut(usize, f64)) {
        let m = self.m;
        let block = self.amplitude_block(t);
        let mut scratch = Vec::with_capacity(m * m);
        for (idx, config) in self.configs.iter().enumerate() {
            let pos = config.positions();
            let value = if pos.len() == 1 {
                let i = pos[0] - 1;
                block[i * m + i].norm()
            } else {
                scratch.clear();
                for &a in pos {
                    for &b in pos {
                        scratch.push(block[(a - 1) * m + (b - 1)]);
                    }
                }
                linalg::lu_determinant_in_place(&mut scratch, pos.len()).norm()
            };
            visit(idx, value);
        }
    }

    /// Magnitudes of all conditions, in [`ConditionEvaluator::configs`] order.
    pub fn values(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.configs.len()];
        self.for_each_value(t, |i, v| out[i] = v);
        out
    }

    pub fn condition_set(&self, t: f64) -> ConditionSet {
        ConditionSet {
            entries: self.configs.iter().cloned().zip(self.values(t)).collect(),
        }
    }

    /// Smallest condition magnitude at `t`.
    pub fn min_fidelity(&self, t: f64) -> f64 {
        let mut lowest = f64::INFINITY;
        self.for_each_value(t, |_, v| lowest = lowest.min(v));
        lowest
    }
}

/// All `2^m - 1` transfer magnitudes at time `t`.
pub fn pgst_condition_set(spec: ChainSpec, m: usize, t: f64) -> Result<ConditionSet> {
    if !t.is_finite() {
        return Err(domain("time must be finite"));
    }
    Ok(ConditionEvaluator::new(spec, m)?.condition_set(t))
}

/// Minimum over [`pgst_condition_set`]; PGST at tolerance ε holds at `t`
/// iff this exceeds `1 - ε`.
pub fn min_condition_fidelity(spec: ChainSpec, m: usize, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(domain("time must be finite"));
    }
    Ok(ConditionEvaluator::new(spec, m)?.min_fidelity(t))
}

/// Ostrowski's lower bound `Π_i (|a_ii| - Σ_{j≠i} |a_ij|) <= |det A|` for a
/// strictly row diagonally dominant matrix.
pub fn ostrowski_bound(a: &DMatrix<Complex64>) -> Result<f64> {
    if !a.is_square() {
        return Err(domain("matrix must be square"));
    }
    let mut bound = 1.0;
    for i in 0..a.nrows() {
        let diag = a[(i, i)].norm();
        let off: f64 = (0..a.ncols())
            .filter(|&j| j != i)
            .map(|j| a[(i, j)].norm())
            .sum();
        if diag <= off {
            return Err(PgstError::Precondition(format!(
                "row {} is not strictly diagonally dominant (|a_ii| = {diag}, off-diagonal sum = {off})",
                i + 1
            )));
        }
        bound *= diag - off;
    }
    Ok(bound)
}
