//! Closed-form single-excitation dynamics of the uniform XX chain.
//!
//! In the one-excitation sector the chain Hamiltonian is the adjacency
//! matrix of the path graph on `n` vertices (coupling `J = 1`). Its spectrum
//! is `λ_k = 2 cos(kπ/(n+1))` with eigenvectors
//! `v_k(j) = sqrt(2/(n+1)) sin(jkπ/(n+1))`, so every propagator entry is a
//! finite spectral sum and no matrix exponential is ever formed.
//!
//! Sites and mode indices are 1-based in the public API, matching the
//! physical labelling of the chain. Evolution is `U(t) = exp(-iHt)`; the
//! opposite sign convention gives complex-conjugate amplitudes and therefore
//! identical transfer magnitudes.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, PgstError, Result};
use crate::linalg;

/// A uniformly coupled chain of `n` sites (`J = 1`, `ħ = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChainSpec {
    n: usize,
}

impl ChainSpec {
    pub const COUPLING: f64 = 1.0;

    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(domain("chain length must be at least 1"));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Mirror image `n + 1 - site` of a 1-based site.
    pub fn mirror(&self, site: usize) -> usize {
        self.n + 1 - site
    }

    pub(crate) fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.n {
            return Err(domain(format!("site {site} outside 1..={}", self.n)));
        }
        Ok(())
    }

    /// Sender block `1..=m` and receiver block `n-m+1..=n` must not intersect.
    /// The single-site chain is accepted with `m = 1` as the degenerate case.
    pub(crate) fn check_blocks(&self, m: usize) -> Result<()> {
        if m == 0 {
            return Err(domain("sender width m must be at least 1"));
        }
        if self.n == 1 && m == 1 {
            return Ok(());
        }
        if self.n < 2 * m {
            return Err(PgstError::RegionsOverlap { n: self.n, m });
        }
        Ok(())
    }
}

/// Spectrum and eigenvectors of the single-excitation block.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    n: usize,
    eigenvalues: Vec<f64>,
    /// Row `k-1` holds `v_k(1..=n)`.
    components: Vec<f64>,
}

impl Eigensystem {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `λ_1 > λ_2 > … > λ_n`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `v_k(j)` for 1-based mode `k` and site `j`.
    pub fn component(&self, k: usize, j: usize) -> f64 {
        self.components[(k - 1) * self.n + (j - 1)]
    }

    /// `exp(-iλ_k t)` for every mode.
    pub fn phases(&self, t: f64) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .map(|&lambda| Complex64::from_polar(1.0, -lambda * t))
            .collect()
    }

    /// `⟨l| exp(-iHt) |j⟩` given precomputed [`Eigensystem::phases`].
    pub fn transfer_with_phases(&self, j: usize, l: usize, phases: &[Complex64]) -> Complex64 {
        let n = self.n;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, phase) in phases.iter().enumerate() {
            let w = self.components[k * n + (j - 1)] * self.components[k * n + (l - 1)];
            acc += phase * w;
        }
        acc
    }

    /// Largest deviation of `Σ_j v_k(j) v_k'(j)` from `δ_kk'`.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = (0..n)
                    .map(|j| self.components[a * n + j] * self.components[b * n + j])
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Closed-form eigensystem of the path-graph hopping matrix.
pub fn eigensystem(spec: ChainSpec) -> Eigensystem {
    let n = spec.n;
    let denom = (n + 1) as f64;
    // λ_{n+1-k} = -λ_k exactly, and the middle mode of an odd chain is 0.
    let mut eigenvalues = vec![0.0; n];
    for k in 1..=n {
        if 2 * k == n + 1 {
            eigenvalues[k - 1] = 0.0;
        } else if 2 * k < n + 1 {
            let lambda = 2.0 * ChainSpec::COUPLING * (k as f64 * PI / denom).cos();
            eigenvalues[k - 1] = lambda;
            eigenvalues[n - k] = -lambda;
        }
    }
    let scale = (2.0 / denom).sqrt();
    let mut components = vec![0.0; n * n];
    for k in 1..=n {
        for j in 1..=n {
            // reduce jk mod 2(n+1) to keep the sine argument small
            let arg = ((j * k) % (2 * (n + 1))) as f64 * PI / denom;
            components[(k - 1) * n + (j - 1)] = scale * arg.sin();
        }
    }
    Eigensystem {
        n,
        eigenvalues,
        components,
    }
}

/// Transfer amplitude `⟨l| exp(-iHt) |j⟩` between 1-based sites.
pub fn amplitude(spec: ChainSpec, j: usize, l: usize, t: f64) -> Result<Complex64> {
    spec.check_site(j)?;
    spec.check_site(l)?;
    if !t.is_finite() {
        return Err(domain("time must be finite"));
    }
    let eig = eigensystem(spec);
    Ok(eig.transfer_with_phases(j, l, &eig.phases(t)))
}

/// The full single-excitation propagator `U(t)` at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    t: f64,
    entries: DMatrix<Complex64>,
}

impl Propagator {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `U[l][j] = ⟨l|U(t)|j⟩`, 1-based.
    pub fn get(&self, l: usize, j: usize) -> Complex64 {
        self.entries[(l - 1, j - 1)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// `max |(U U^H - I)_{ab}|`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.n();
        let prod = &self.entries * self.entries.adjoint();
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((prod[(a, b)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

pub fn propagator(spec: ChainSpec, t: f64) -> Propagator {
    let eig = eigensystem(spec);
    let phases = eig.phases(t);
    let n = spec.n;
    let mut entries = DMatrix::zeros(n, n);
    for l in 1..=n {
        for j in l..=n {
            let a = eig.transfer_with_phases(j, l, &phases);
            entries[(l - 1, j - 1)] = a;
            entries[(j - 1, l - 1)] = a;
        }
    }
    Propagator { t, entries }
}

/// `|⟨n+1-j| U(t) |j⟩|` for `j = 1..=m`.
pub fn mirror_fidelities(spec: ChainSpec, m: usize, t: f64) -> Result<Vec<f64>> {
    spec.check_blocks(m)?;
    if !t.is_finite() {
        return Err(domain("time must be finite"));
    }
    let eig = eigensystem(spec);
    let phases = eig.phases(t);
    Ok((1..=m)
        .map(|j| eig.transfer_with_phases(j, spec.mirror(j), &phases).norm())
        .collect())
}

/// Distance of `U(t)` from the set `{γF : |γ| = 1}`, `F` the mirror flip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorDistance {
    /// Minimising unit-modulus phase.
    pub gamma: Complex64,
    /// `‖U(t) - γF‖₂` at `gamma`.
    pub distance: f64,
    /// `‖U(t) - γF‖_F` at `gamma`; never below `distance`.
    pub frobenius_bound: f64,
}

const GAMMA_GRID: usize = 1024;
const GAMMA_RESOLUTION: f64 = 1e-6;

fn shifted_flip(u: &DMatrix<Complex64>, gamma: Complex64) -> DMatrix<Complex64> {
    let n = u.nrows();
    let mut d = u.clone();
    for j in 0..n {
        d[(n - 1 - j, j)] -= gamma;
    }
    d
}

/// Minimises `‖U(t) - γF‖₂` over `γ = e^{iθ}`: uniform 1024-point θ grid,
/// then golden-section refinement within one grid cell of the best sample.
pub fn mirror_distance(spec: ChainSpec, t: f64) -> MirrorDistance {
    let u = propagator(spec, t).entries;
    let dist =
        |theta: f64| linalg::spectral_norm(&shifted_flip(&u, Complex64::from_polar(1.0, theta)));

    let step = 2.0 * PI / GAMMA_GRID as f64;
    let (mut best_theta, mut best) = (0.0, f64::INFINITY);
    for i in 0..GAMMA_GRID {
        let theta = i as f64 * step;
        let d = dist(theta);
        if d < best {
            best = d;
            best_theta = theta;
        }
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (best_theta - step, best_theta + step);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (dist(x1), dist(x2));
    while hi - lo > GAMMA_RESOLUTION {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = dist(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = dist(x2);
        }
    }
    let (theta, refined) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if refined < best {
        best = refined;
        best_theta = theta;
    }

    let gamma = Complex64::from_polar(1.0, best_theta.rem_euclid(2.0 * PI));
    MirrorDistance {
        gamma,
        distance: best,
        frobenius_bound: linalg::frobenius_norm(&shifted_flip(&u, gamma)),
    }
}
