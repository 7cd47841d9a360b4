//! Chain-length classification, first-passage time search and sweeps.

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::multiexcitation::{ConditionEvaluator, ConditionSet};
use crate::spectral::ChainSpec;

/// Deterministic primality for every `u64` (Miller-Rabin with the first
/// twelve primes as witnesses, which is exact below 3.3·10^24).
pub fn is_prime(q: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if q < 2 {
        return false;
    }
    for p in WITNESSES {
        if q.is_multiple_of(p) {
            return q == p;
        }
    }
    let mut d = q - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in WITNESSES {
        let mut x = pow_mod(a, d, q);
        if x == 1 || x == q - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, q);
            if x == q - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// One arithmetic form of a chain length that admits PGST.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LengthClause {
    /// `n = p - 1`, `p` prime.
    PMinus1 { p: u64 },
    /// `n = 2p - 1`, `p` prime.
    TwoPMinus1 { p: u64 },
    /// `n = 2^k - 1`, `k >= 1`.
    PowerMinus1 { k: u32 },
}

impl LengthClause {
    pub fn name(&self) -> &'static str {
        match self {
            LengthClause::PMinus1 { .. } => "PMinus1",
            LengthClause::TwoPMinus1 { .. } => "TwoPMinus1",
            LengthClause::PowerMinus1 { .. } => "PowerMinus1",
        }
    }

    /// `p=<prime>` or `k=<exponent>`.
    pub fn witness(&self) -> String {
        match self {
            LengthClause::PMinus1 { p } | LengthClause::TwoPMinus1 { p } => format!("p={p}"),
            LengthClause::PowerMinus1 { k } => format!("k={k}"),
        }
    }
}

/// Every clause a chain length satisfies; no clause means no PGST.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LengthClass {
    pub n: u64,
    pub clauses: Vec<LengthClause>,
}

impl LengthClass {
    pub fn is_pgst(&self) -> bool {
        !self.clauses.is_empty()
    }
}

/// Classifies a chain length against `n = p-1`, `n = 2p-1` and `n = 2^k-1`.
pub fn classify_length(n: u64) -> Result<LengthClass> {
    if n == 0 {
        return Err(domain("chain length must be at least 1"));
    }
    let mut clauses = Vec::new();
    let succ = n as u128 + 1;
    if succ <= u64::MAX as u128 && is_prime(succ as u64) {
        clauses.push(LengthClause::PMinus1 { p: succ as u64 });
    }
    if succ.is_multiple_of(2) && is_prime((succ / 2) as u64) {
        clauses.push(LengthClause::TwoPMinus1 {
            p: (succ / 2) as u64,
        });
    }
    if succ.is_power_of_two() {
        clauses.push(LengthClause::PowerMinus1 {
            k: succ.trailing_zeros(),
        });
    }
    Ok(LengthClass { n, clauses })
}

/// Time-grid parameters for the first-passage search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    pub dt: f64,
    /// Scan horizon; `None` selects [`GridParams::default_horizon`].
    pub t_max: Option<f64>,
    pub refine_tol: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_max: None,
            refine_tol: 1e-6,
        }
    }
}

impl GridParams {
    /// Ten times the fitted growth law `0.29·e^{0.6852 n}` (at least 10).
    pub fn default_horizon(n: usize) -> f64 {
        10.0 * f64::max(1.0, 0.29 * (0.6852 * n as f64).exp())
    }

    pub fn horizon(&self, n: usize) -> f64 {
        self.t_max.unwrap_or_else(|| Self::default_horizon(n))
    }
}

/// A validated first-passage search request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgstQuery {
    n: usize,
    m: usize,
    eps: f64,
    t_max: f64,
    dt: f64,
    refine_tol: f64,
}

impl PgstQuery {
    pub fn new(n: usize, m: usize, eps: f64, grid: &GridParams) -> Result<Self> {
        ChainSpec::new(n)?.check_blocks(m)?;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(domain(format!("tolerance must lie in (0, 1), got {eps}")));
        }
        let t_max = grid.horizon(n);
        let dt = grid.dt;
        if !(dt > 0.0 && dt < t_max && t_max.is_finite()) {
            return Err(domain(format!(
                "need 0 < dt < t_max, got dt={dt}, t_max={t_max}"
            )));
        }
        if !(grid.refine_tol > 0.0 && grid.refine_tol <= dt) {
            return Err(domain(format!(
                "need 0 < refine_tol <= dt, got refine_tol={}",
                grid.refine_tol
            )));
        }
        Ok(Self {
            n,
            m,
            eps,
            t_max,
            dt,
            refine_tol: grid.refine_tol,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn t_max(&self) -> f64 {
        self.t_max
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn refine_tol(&self) -> f64 {
        self.refine_tol
    }
    pub fn threshold(&self) -> f64 {
        1.0 - self.eps
    }
}

/// Outcome of [`find_t_min`].
///
/// When nothing on the grid clears the threshold, `found` is false and
/// `t_min`, `min_fidelity` and `fidelities` describe the grid point with the
/// best minimum fidelity, so `margin <= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TminResult {
    pub found: bool,
    pub t_min: f64,
    pub min_fidelity: f64,
    /// `min_fidelity - (1 - ε)`.
    pub margin: f64,
    pub fidelities: ConditionSet,
}

const SCAN_CHUNK: usize = 8192;

/// Smallest time at which all `2^m - 1` conditions exceed `1 - ε`.
///
/// Scans `t = dt, 2dt, …, <= t_max`; the first satisfying grid point `t_i`
/// is refined by bisection on `[t_i - dt, t_i]` down to `refine_tol`,
/// keeping the right end satisfied. Grid chunks are evaluated in parallel
/// but the reduction picks the earliest index, so the result does not
/// depend on the thread count.
pub fn find_t_min(query: &PgstQuery) -> Result<TminResult> {
    let spec = ChainSpec::new(query.n)?;
    let eval = ConditionEvaluator::new(spec, query.m)?;
    let threshold = query.threshold();
    let dt = query.dt;
    let points = (query.t_max / dt + 1e-9).floor() as usize;

    let mut best: Option<(usize, f64)> = None;
    let mut start = 1usize;
    while start <= points {
        let end = (start + SCAN_CHUNK - 1).min(points);
        let values: Vec<f64> = (start..=end)
            .into_par_iter()
            .map(|i| eval.min_fidelity(i as f64 * dt))
            .collect();
        if let Some(offset) = values.iter().position(|&v| v > threshold) {
            let i = start + offset;
            let t = refine_crossing(
                &eval,
                threshold,
                (i - 1) as f64 * dt,
                i as f64 * dt,
                query.refine_tol,
            );
            let fidelities = eval.condition_set(t);
            let min_fidelity = fidelities.min();
            return Ok(TminResult {
                found: true,
                t_min: t,
                min_fidelity,
                margin: min_fidelity - threshold,
                fidelities,
            });
        }
        for (offset, &v) in values.iter().enumerate() {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((start + offset, v));
            }
        }
        start = end + 1;
    }

    let t = best.map_or(query.t_max, |(i, _)| i as f64 * dt);
    let fidelities = eval.condition_set(t);
    let min_fidelity = fidelities.min();
    Ok(TminResult {
        found: false,
        t_min: t,
        min_fidelity,
        margin: min_fidelity - threshold,
        fidelities,
    })
}

fn refine_crossing(
    eval: &ConditionEvaluator,
    threshold: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eval.min_fidelity(mid) > threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// One row of a sweep; failures stay local to their row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<K> {
    pub key: K,
    pub result: Result<TminResult>,
}

/// `t_min` for each chain length, in input order.
pub fn sweep_n(lengths: &[usize], m: usize, eps: f64, grid: &GridParams) -> Vec<SweepRow<usize>> {
    lengths
        .par_iter()
        .map(|&n| SweepRow {
            key: n,
            result: PgstQuery::new(n, m, eps, grid).and_then(|q| find_t_min(&q)),
        })
        .collect()
}

/// `t_min` for each tolerance at a fixed chain length, in input order.
pub fn sweep_eps(n: usize, m: usize, tolerances: &[f64], grid: &GridParams) -> Vec<SweepRow<f64>> {
    tolerances
        .par_iter()
        .map(|&eps| SweepRow {
            key: eps,
            result: PgstQuery::new(n, m, eps, grid).and_then(|q| find_t_min(&q)),
        })
        .collect()
}

/// `t ≈ a·e^{b n}` from ordinary least squares on `ln t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub a: f64,
    pub b: f64,
}

impl ExpFit {
    pub fn predict(&self, n: f64) -> f64 {
        self.a * (self.b * n).exp()
    }
}

pub fn exp_fit(rows: &[(f64, f64)]) -> Result<ExpFit> {
    if rows.len() < 2 {
        return Err(domain("exponential fit needs at least two rows"));
    }
    if let Some(&(n, t)) = rows.iter().find(|(_, t)| !(*t > 0.0 && t.is_finite())) {
        return Err(domain(format!("t_min must be positive, got {t} at n={n}")));
    }
    let count = rows.len() as f64;
    let mean_x = rows.iter().map(|r| r.0).sum::<f64>() / count;
    let mean_y = rows.iter().map(|r| r.1.ln()).sum::<f64>() / count;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, t) in rows {
        let dx = x - mean_x;
        sxx += dx * dx;
        sxy += dx * (t.ln() - mean_y);
    }
    if sxx == 0.0 {
        return Err(domain(
            "exponential fit needs at least two distinct lengths",
        ));
    }
    let b = sxy / sxx;
    Ok(ExpFit {
        a: (mean_y - b * mean_x).exp(),
        b,
    })
}
