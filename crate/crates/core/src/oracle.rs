//! Brute-force reference path.
//!
//! The chain Hamiltonian conserves the number of excitations, so it is block
//! diagonal over sectors of fixed excitation number `r`. Each block is built
//! densely in the occupation basis and evolved through a numerical
//! eigendecomposition. Nothing here uses the closed-form spectrum or the
//! Slater determinant, which is what makes it an oracle for both.
//!
//! Register conventions: index bit `j-1` of a sender amplitude marks site `j`
//! excited; index bit `q-1` of a receiver amplitude marks receiver qubit `q`,
//! which the receiver reads from site `n+1-q`.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{domain, PgstError, Result};
use crate::multiexcitation::{enumerate_configs, slater_amplitude, ExcitationConfig};
use crate::spectral::ChainSpec;

/// Largest sector dimension the oracle will build.
pub const SECTOR_LIMIT: usize = 10_000;

fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Fails with [`PgstError::Resource`] when `C(n, r)` exceeds [`SECTOR_LIMIT`].
pub fn check_sector_size(n: usize, r: usize) -> Result<()> {
    let dim = binomial(n, r);
    if dim > SECTOR_LIMIT as u128 {
        return Err(PgstError::Resource {
            n,
            r,
            dim,
            limit: SECTOR_LIMIT,
        });
    }
    Ok(())
}

/// Occupation basis of the `r`-excitation sector of an `n`-site chain.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    n: usize,
    r: usize,
    configs: Vec<ExcitationConfig>,
    index: HashMap<u64, usize>,
}

impl SectorBasis {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(domain(format!("oracle supports 1..=64 sites, got {n}")));
        }
        if r > n {
            return Err(domain(format!("excitation number {r} exceeds {n} sites")));
        }
        check_sector_size(n, r)?;
        let configs = if r == 0 {
            vec![ExcitationConfig::new(Vec::new())?]
        } else {
            enumerate_configs(n, r)?
        };
        let index = configs
            .iter()
            .enumerate()
            .map(|(i, c)| (c.bitmask(), i))
            .collect();
        Ok(Self {
            n,
            r,
            configs,
            index,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn configs(&self) -> &[ExcitationConfig] {
        &self.configs
    }

    pub fn index_of_mask(&self, mask: u64) -> Option<usize> {
        self.index.get(&mask).copied()
    }

    pub fn index_of(&self, config: &ExcitationConfig) -> Option<usize> {
        self.index_of_mask(config.bitmask())
    }
}

/// Dense block of the chain Hamiltonian on one excitation sector.
#[derive(Debug, Clone)]
pub struct SectorHamiltonian {
    basis: SectorBasis,
    matrix: DMatrix<f64>,
}

impl SectorHamiltonian {
    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Eigendecomposition for repeated evolution of the same block.
    pub fn evolver(&self) -> SectorEvolver {
        let eig = SymmetricEigen::new(self.matrix.clone());
        SectorEvolver {
            eigenvalues: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }
}

/// `e^{-iHt} = V e^{-iΛt} Vᵀ` for a fixed sector block.
#[derive(Debug, Clone)]
pub struct SectorEvolver {
    eigenvalues: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl SectorEvolver {
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn evolve(&self, v: &DVector<Complex64>, t: f64) -> Result<DVector<Complex64>> {
        let dim = self.eigenvalues.len();
        if v.len() != dim {
            return Err(domain(format!(
                "state has dimension {}, sector has {dim}",
                v.len()
            )));
        }
        let mut modes = DVector::<Complex64>::zeros(dim);
        for k in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..dim {
                acc += v[i] * self.vectors[(i, k)];
            }
            modes[k] = acc * Complex64::from_polar(1.0, -self.eigenvalues[k] * t);
        }
        let mut out = DVector::<Complex64>::zeros(dim);
        for i in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                acc += modes[k] * self.vectors[(i, k)];
            }
            out[i] = acc;
        }
        Ok(out)
    }
}

/// Builds the `r`-excitation block: unit entries between configurations that
/// differ by one excitation hopping to an empty neighbouring site.
pub fn build_sector(n: usize, r: usize) -> Result<SectorHamiltonian> {
    let basis = SectorBasis::new(n, r)?;
    let dim = basis.len();
    let mut matrix = DMatrix::<f64>::zeros(dim, dim);
    for (col, config) in basis.configs().iter().enumerate() {
        let mask = config.bitmask();
        for &site in config.positions() {
            let bit = 1u64 << (site - 1);
            let mut hop = |target: usize| {
                let tbit = 1u64 << (target - 1);
                if mask & tbit == 0 {
                    let row = basis
                        .index_of_mask(mask & !bit | tbit)
                        .expect("hop stays in sector");
                    matrix[(row, col)] = 1.0;
                }
            };
            if site > 1 {
                hop(site - 1);
            }
            if site < n {
                hop(site + 1);
            }
        }
    }
    Ok(SectorHamiltonian { basis, matrix })
}

/// `e^{-iHt} v` within one sector.
pub fn evolve_sector(
    h: &SectorHamiltonian,
    v: &DVector<Complex64>,
    t: f64,
) -> Result<DVector<Complex64>> {
    if v.len() != h.dim() {
        return Err(domain(format!(
            "state has dimension {}, sector has {}",
            v.len(),
            h.dim()
        )));
    }
    h.evolver().evolve(v, t)
}

/// `|⟨mirror(config)| e^{-iHt} |config⟩|` by dense sector evolution.
pub fn oracle_transfer_magnitude(n: usize, config: &ExcitationConfig, t: f64) -> Result<f64> {
    let h = build_sector(n, config.r())?;
    transfer_magnitude_with(&h.evolver(), h.basis(), config, t)
}

fn transfer_magnitude_with(
    evolver: &SectorEvolver,
    basis: &SectorBasis,
    config: &ExcitationConfig,
    t: f64,
) -> Result<f64> {
    let source = basis
        .index_of(config)
        .ok_or_else(|| domain(format!("configuration {config} not in sector")))?;
    let target = basis
        .index_of(&config.mirror(basis.n()))
        .ok_or_else(|| domain(format!("mirror of {config} not in sector")))?;
    let mut v = DVector::<Complex64>::zeros(basis.len());
    v[source] = Complex64::new(1.0, 0.0);
    Ok(evolver.evolve(&v, t)?[target].norm())
}

/// Normalised `m`-qubit sender state, `2^m` amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct InputState {
    m: usize,
    amplitudes: Vec<Complex64>,
}

impl InputState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(domain(format!("{len} amplitudes is not 2^m for m >= 1")));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(domain(format!("squared norm {norm} differs from 1")));
        }
        Ok(Self {
            m: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    /// Random state with independent uniform real and imaginary parts,
    /// normalised.
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let mut amplitudes: Vec<Complex64> = (0..1usize << m)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amplitudes {
            *a /= norm;
        }
        Self { m, amplitudes }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Amplitude of the basis state whose excited sender sites form `mask`.
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
}

/// Reduced state of the receiver register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(domain("density matrix must be square"));
        }
        Ok(Self { matrix })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(state: &InputState) -> Self {
        let psi = DVector::from_column_slice(state.amplitudes());
        Self {
            matrix: &psi * psi.adjoint(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `max |ρ - ρ^H|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let adj = self.matrix.adjoint();
        self.matrix
            .iter()
            .zip(adj.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `⟨ψ|ρ|ψ⟩` (real part).
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, pa) in psi.iter().enumerate() {
            for (b, pb) in psi.iter().enumerate() {
                acc += pa.conj() * self.matrix[(a, b)] * pb;
            }
        }
        acc.re
    }
}

/// Reverses site order: site `s` moves to position `n+1-s`.
fn reverse_sites(mask: u64, n: usize) -> u64 {
    mask.reverse_bits() >> (64 - n)
}

/// Output state of the receiver after time `t`.
///
/// `|ψ_in⟩ ⊗ |0…0⟩` is evolved sector by sector (`r = 0..=m`), the site
/// order is reversed to model the receiver reading its block back to front,
/// and the first `n - m` reversed qubits are traced out.
pub fn rho_out(n: usize, m: usize, input: &InputState, t: f64) -> Result<DensityMatrix> {
    ChainSpec::new(n)?.check_blocks(m)?;
    if n == 1 || n > 64 {
        return Err(domain(format!(
            "oracle output state needs 2..=64 sites, got {n}"
        )));
    }
    if input.m() != m {
        return Err(domain(format!(
            "input register has {} qubits, sender block has {m}",
            input.m()
        )));
    }
    // refuse before spending time on the smaller sectors
    for r in 0..=m {
        check_sector_size(n, r)?;
    }
    let receiver_mask = (1u64 << m) - 1;
    // environment pattern -> (receiver index, amplitude); BTreeMap keeps the
    // accumulation order fixed
    let mut by_env: BTreeMap<u64, Vec<(usize, Complex64)>> = BTreeMap::new();
    for r in 0..=m {
        let h = build_sector(n, r)?;
        let basis = h.basis();
        let mut v = DVector::<Complex64>::zeros(basis.len());
        let mut occupied = false;
        for (mask, &amp) in input.amplitudes().iter().enumerate() {
            if (mask as u64).count_ones() as usize == r && amp != Complex64::new(0.0, 0.0) {
                let idx = basis
                    .index_of_mask(mask as u64)
                    .expect("sender pattern in sector");
                v[idx] = amp;
                occupied = true;
            }
        }
        if !occupied {
            continue;
        }
        let evolved = evolve_sector(&h, &v, t)?;
        for (config, amp) in basis.configs().iter().zip(evolved.iter()) {
            let reversed = reverse_sites(config.bitmask(), n);
            let receiver = (reversed & receiver_mask) as usize;
            let env = reversed >> m;
            by_env.entry(env).or_default().push((receiver, *amp));
        }
    }

    let dim = 1usize << m;
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    for terms in by_env.values() {
        for &(a, amp_a) in terms {
            for &(b, amp_b) in terms {
                rho[(a, b)] += amp_a * amp_b.conj();
            }
        }
    }
    Ok(DensityMatrix { matrix: rho })
}

/// How the receiver's register is compared with the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    /// `⟨ψ_in|ρ|ψ_in⟩` as is.
    Raw,
    /// Best `⟨ψ_in|D(θ) ρ D(θ)†|ψ_in⟩` over one angle θ, where `D(θ)`
    /// multiplies the `r`-excitation sector by `e^{-irθ}`.
    SectorPhase,
    /// As [`Readout::SectorPhase`] with `D(θ)` also carrying the sign
    /// `(-1)^{r(r-1)/2}` that the mirror image of an `r`-fermion state picks
    /// up from reordering.
    ParitySectorPhase,
}

impl Readout {
    fn sector_sign(self, r: usize) -> f64 {
        match self {
            Readout::ParitySectorPhase if (r * r.saturating_sub(1) / 2) % 2 == 1 => -1.0,
            _ => 1.0,
        }
    }
}

const PHASE_GRID: usize = 4096;
const PHASE_RESOLUTION: f64 = 1e-9;

/// Figure of merit `⟨ψ_in|ρ|ψ_in⟩`, optionally after per-sector phase repair.
pub fn fidelity(input: &InputState, rho: &DensityMatrix, readout: Readout) -> Result<f64> {
    let dim = input.amplitudes().len();
    if rho.dim() != dim {
        return Err(domain(format!(
            "input has dimension {dim}, density matrix has {}",
            rho.dim()
        )));
    }
    let psi = input.amplitudes();
    match readout {
        Readout::Raw => Ok(rho.expectation(psi)),
        Readout::SectorPhase | Readout::ParitySectorPhase => {
            // value(θ) = Re Σ_Δ C_Δ e^{iΔθ}, Δ = r_b - r_a
            let m = input.m();
            let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * m + 1];
            let sector = |mask: usize| mask.count_ones() as usize;
            for a in 0..dim {
                for b in 0..dim {
                    let (ra, rb) = (sector(a), sector(b));
                    let sign = readout.sector_sign(ra) * readout.sector_sign(rb);
                    let term = psi[a].conj() * rho.matrix()[(a, b)] * psi[b] * sign;
                    coeffs[rb + m - ra] += term;
                }
            }
            let value = |theta: f64| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        (c * Complex64::from_polar(1.0, (i as f64 - m as f64) * theta)).re
                    })
                    .sum::<f64>()
            };
            Ok(maximise_periodic(value, PHASE_GRID, PHASE_RESOLUTION))
        }
    }
}

/// Maximum of a `2π`-periodic function: uniform grid, then golden-section
/// search within one cell of the best sample.
fn maximise_periodic(f: impl Fn(f64) -> f64, grid: usize, resolution: f64) -> f64 {
    let step = 2.0 * PI / grid as f64;
    let (mut best_x, mut best) = (0.0, f64::NEG_INFINITY);
    for i in 0..grid {
        let x = i as f64 * step;
        let v = f(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (best_x - step, best_x + step);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > resolution {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    best.max(f1).max(f2)
}

/// Outcome of comparing Slater amplitudes with dense sector evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub comparisons: usize,
    pub max_discrepancy: f64,
    /// `(n, config, t)` at the largest discrepancy.
    pub worst: Option<(usize, ExcitationConfig, f64)>,
}

/// Compares `|slater_amplitude|` against [`oracle_transfer_magnitude`] for
/// every chain `2 <= n <= n_max`, every `r <= min(r_max, n/2)` and every
/// configuration over the sender block `1..=n/2`, at `trials` times drawn
/// uniformly from `[0, t_max)`.
pub fn validate_slater<R: Rng + ?Sized>(
    n_max: usize,
    r_max: usize,
    trials: usize,
    t_max: f64,
    rng: &mut R,
) -> Result<ValidationReport> {
    if r_max == 0 {
        return Err(domain("r_max must be at least 1"));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(domain("time window must be positive"));
    }
    for n in 2..=n_max {
        for r in 1..=r_max.min(n / 2) {
            check_sector_size(n, r)?;
        }
    }
    let mut report = ValidationReport {
        comparisons: 0,
        max_discrepancy: 0.0,
        worst: None,
    };
    for n in 2..=n_max {
        let spec = ChainSpec::new(n)?;
        let sender = n / 2;
        for r in 1..=r_max.min(sender) {
            let h = build_sector(n, r)?;
            let evolver = h.evolver();
            for config in enumerate_configs(sender, r)? {
                for _ in 0..trials {
                    let t = rng.random_range(0.0..t_max);
                    let oracle = transfer_magnitude_with(&evolver, h.basis(), &config, t)?;
                    let slater = slater_amplitude(spec, &config, t)?.norm();
                    let gap = (oracle - slater).abs();
                    report.comparisons += 1;
                    if gap > report.max_discrepancy || report.worst.is_none() {
                        report.max_discrepancy = report.max_discrepancy.max(gap);
                        report.worst = Some((n, config.clone(), t));
                    }
                }
            }
        }
    }
    Ok(report)
}
