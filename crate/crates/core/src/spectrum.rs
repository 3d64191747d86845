//! Instantaneous spectrum and adiabatic branch following.
//!
//! The branch is followed by overlap continuity, not by picking the lowest
//! eigenvalue at each R: levels from different z-parity sectors cross on the
//! standard schedules and the driving never couples those sectors. When the
//! previous vector lands in a (near-)degenerate eigenvalue cluster we
//! continue with its projection onto that cluster, which carries the branch
//! through exact crossings.

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::spin_algebra::{ensure_hermitian, BasisOrder, ComplexMatrix, Parity, StateVector};

/// Real, gauge-fixed branch vector.
pub type RealVector = DVector<f64>;

/// Eigenvalues closer than this (times the spectral scale) form one cluster.
const CLUSTER_TOL: f64 = 1e-8;
const HERMITIAN_TOL: f64 = 1e-12;
const COMPLEX_RAY_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Eigen {
    /// Ascending.
    pub energies: Vec<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `energies`.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> StateVector {
        self.vectors.column(k).into_owned()
    }

    fn scale(&self) -> f64 {
        self.energies.iter().fold(1.0f64, |m, e| m.max(e.abs()))
    }

    /// Groups of indices whose eigenvalues agree to `CLUSTER_TOL * scale`.
    fn clusters(&self) -> Vec<Vec<usize>> {
        let tol = CLUSTER_TOL * self.scale();
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (k, &e) in self.energies.iter().enumerate() {
            match out.last_mut() {
                Some(last) if e - self.energies[*last.last().unwrap()] <= tol => last.push(k),
                _ => out.push(vec![k]),
            }
        }
        out
    }
}

/// Full eigendecomposition of a Hermitian matrix, energies ascending.
pub fn eigensolve(h: &ComplexMatrix) -> Result<Eigen> {
    let scale = h.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    ensure_hermitian(h, HERMITIAN_TOL * scale)?;
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(h.nrows(), h.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Eigen { energies, vectors })
}

/// Removes the global phase of an eigenvector whose ray is real and returns
/// the real unit vector. The sign follows `previous` when given, otherwise
/// the largest-magnitude component is made positive.
pub fn fix_gauge(v: &StateVector, previous: Option<&RealVector>) -> Result<RealVector> {
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::NotNormalized(0.0));
    }
    // e^{-iθ} with θ = arg(Σ v_k²)/2 maximizes the real part of the ray.
    let s: C64 = v.iter().map(|z| z * z).sum();
    let phase = C64::from_polar(1.0, -0.5 * s.arg());
    let rotated = v.map(|z| z * phase / norm);
    let residue = rotated.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
    if residue > COMPLEX_RAY_TOL {
        return Err(Error::ComplexRay(residue));
    }
    let mut real = rotated.map(|z| z.re);
    real /= real.norm();
    let flip = match previous {
        Some(p) => real.dot(p) < 0.0,
        None => {
            let (mut best, mut val) = (0.0f64, 0.0);
            for &x in real.iter() {
                if x.abs() > best + 1e-12 {
                    best = x.abs();
                    val = x;
                }
            }
            val < 0.0
        }
    };
    if flip {
        real.neg_mut();
    }
    Ok(real)
}

fn complexify(v: &RealVector) -> StateVector {
    v.map(|x| C64::new(x, 0.0))
}

/// Eigendecomposition restricted to basis indices `idx`, embedded back.
fn eigensolve_block(h: &ComplexMatrix, idx: &[usize]) -> Result<Eigen> {
    let n = idx.len();
    let block = ComplexMatrix::from_fn(n, n, |r, c| h[(idx[r], idx[c])]);
    let eig = eigensolve(&block)?;
    let mut vectors = ComplexMatrix::zeros(h.nrows(), n);
    for c in 0..n {
        for r in 0..n {
            vectors[(idx[r], c)] = eig.vectors[(r, c)];
        }
    }
    Ok(Eigen { energies: eig.energies, vectors })
}

/// Diagonalizes parity blocks separately when `h` has no elements between
/// the even and odd sectors, so eigenvectors never mix sectors through
/// roundoff at near-crossings. Falls back to [`eigensolve`] otherwise.
pub fn eigensolve_sectors(h: &ComplexMatrix, basis: &BasisOrder) -> Result<Eigen> {
    let even = basis.sector(Parity::Even);
    let odd = basis.sector(Parity::Odd);
    let coupled = even.iter().any(|&r| odd.iter().any(|&c| h[(r, c)] != C64::new(0.0, 0.0)));
    if coupled || odd.is_empty() {
        return eigensolve(h);
    }
    let a = eigensolve_block(h, &even)?;
    let b = eigensolve_block(h, &odd)?;
    let mut merged: Vec<(f64, StateVector)> = (0..a.energies.len())
        .map(|k| (a.energies[k], a.vector(k)))
        .chain((0..b.energies.len()).map(|k| (b.energies[k], b.vector(k))))
        .collect();
    merged.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = h.nrows();
    let energies = merged.iter().map(|m| m.0).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| merged[c].1[r]);
    Ok(Eigen { energies, vectors })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum InitialSelection {
    /// Ground state of one z-parity sector. Every operator in these models
    /// conserves parity, so the sector is kept for the whole run.
    Sector(Parity),
    /// Lowest level of the full spectrum; a degenerate ground level is split
    /// by first-order perturbation theory in dH0/dR.
    LowestFirstOrder,
}

/// Picks the initial branch vector at `r0`, resolving a degenerate ground
/// level. `delta` is the probe step used to cross-check the choice.
pub fn resolve_initial_degeneracy(
    model: &Model,
    r0: f64,
    delta: f64,
    selection: InitialSelection,
) -> Result<RealVector> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidParameter("probe step must be positive".into()));
    }
    let solve = |r: f64| -> Result<Eigen> {
        let h = model.h0(r);
        match selection {
            InitialSelection::Sector(p) => eigensolve_block(&h, &model.basis().sector(p)),
            InitialSelection::LowestFirstOrder => eigensolve_sectors(&h, model.basis()),
        }
    };
    let eig = solve(r0)?;
    let ground = &eig.clusters()[0];
    let candidate: StateVector = if ground.len() == 1 {
        eig.vector(ground[0])
    } else {
        let sub = ComplexMatrix::from_fn(eig.vectors.nrows(), ground.len(), |r, c| {
            eig.vectors[(r, ground[c])]
        });
        let projected = sub.adjoint() * model.dh0_dr() * &sub;
        let split = eigensolve(&projected)?;
        let tol = CLUSTER_TOL * split.scale().max(eig.scale());
        if split.energies[1] - split.energies[0] <= tol {
            return Err(Error::UnresolvedDegeneracy(r0));
        }
        let chosen = &sub * split.vector(0);
        let probe = solve(r0 + delta)?;
        let g = probe.vector(0);
        let overlap = g.dotc(&chosen).norm_sqr();
        if overlap < 0.99 {
            return Err(Error::AmbiguousDegeneracy(r0));
        }
        chosen
    };
    fix_gauge(&candidate, None)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Derivative {
    /// (f(r+h) - f(r-h)) / 2h
    Central,
    /// Five-point stencil, one Richardson step on top of `Central`.
    Richardson,
}

#[derive(Copy, Clone, Debug)]
pub struct TrackOptions {
    /// Minimum |⟨C(R_k), C(R_{k+1})⟩|² between consecutive samples.
    pub min_overlap: f64,
    /// Probe step for ∂_R C, relative to max(grid span, 1).
    pub relative_step: f64,
    pub derivative: Derivative,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions { min_overlap: 0.99, relative_step: 1e-4, derivative: Derivative::Richardson }
    }
}

#[derive(Clone, Debug)]
pub struct BranchSample {
    pub r: f64,
    pub energy: f64,
    pub vector: RealVector,
    pub d_vector: RealVector,
}

#[derive(Clone, Debug)]
pub struct AdiabaticBranch {
    pub samples: Vec<BranchSample>,
    /// Probe step used for the derivatives.
    pub step: f64,
}

impl AdiabaticBranch {
    pub fn r_grid(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.r).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Dominant z-parity of the branch (all weight sits in one sector).
    pub fn parity(&self, model: &Model) -> Parity {
        let v = &self.samples[0].vector;
        let even: f64 = model.basis().sector(Parity::Even).iter().map(|&i| v[i] * v[i]).sum();
        if even >= 0.5 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Continues a branch vector to `r`: returns (energy, gauge-fixed vector,
/// captured weight |P prev|²).
pub fn follow(model: &Model, r: f64, previous: &RealVector) -> Result<(f64, RealVector, f64)> {
    let h = model.h0(r);
    let eig = eigensolve_sectors(&h, model.basis())?;
    let prev = complexify(previous);
    let mut ranked: Vec<(f64, StateVector, f64)> = eig
        .clusters()
        .into_iter()
        .map(|cluster| {
            let mut p = StateVector::zeros(prev.len());
            for &k in &cluster {
                let v = eig.vector(k);
                p += &v * v.dotc(&prev);
            }
            let mean = cluster.iter().map(|&k| eig.energies[k]).sum::<f64>() / cluster.len() as f64;
            (p.norm_squared(), p, mean)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (weight, p, _) = ranked.swap_remove(0);
    let vector = fix_gauge(&p, Some(previous))?;
    let cv = complexify(&vector);
    let energy = cv.dotc(&(&h * &cv)).re;
    Ok((energy, vector, weight))
}

fn derivative_at(
    model: &Model,
    r: f64,
    c: &RealVector,
    h: f64,
    kind: Derivative,
) -> Result<RealVector> {
    let at = |dr: f64| follow(model, r + dr, c).map(|(_, v, _)| v);
    let central = |step: f64| -> Result<RealVector> { Ok((at(step)? - at(-step)?) / (2.0 * step)) };
    match kind {
        Derivative::Central => central(h),
        Derivative::Richardson => {
            let fine = central(h)?;
            let coarse = central(2.0 * h)?;
            Ok((fine * 4.0 - coarse) / 3.0)
        }
    }
}

/// Follows the branch through `r_grid` (non-decreasing) starting from
/// `initial`, an eigenvector of H0 at `r_grid[0]`.
pub fn track_branch(
    model: &Model,
    r_grid: &[f64],
    initial: &RealVector,
    opts: &TrackOptions,
) -> Result<AdiabaticBranch> {
    let first = *r_grid
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty R grid".into()))?;
    if r_grid.windows(2).any(|w| w[1].partial_cmp(&w[0]).is_none_or(|o| o.is_lt())) {
        return Err(Error::InvalidParameter("R grid must be non-decreasing".into()));
    }
    let span = r_grid[r_grid.len() - 1] - first;
    let step = opts.relative_step * span.max(1.0);

    let (energy, vector, weight) = follow(model, first, initial)?;
    if weight < opts.min_overlap {
        return Err(Error::GridTooCoarse { overlap: weight, from: first, to: first });
    }
    let mut points = vec![(first, energy, vector)];
    for w in r_grid.windows(2) {
        let prev = &points.last().unwrap().2;
        let (energy, vector, weight) = follow(model, w[1], prev)?;
        if weight < opts.min_overlap {
            return Err(Error::GridTooCoarse { overlap: weight, from: w[0], to: w[1] });
        }
        points.push((w[1], energy, vector));
    }

    let samples = points
        .into_iter()
        .map(|(r, energy, vector)| {
            let d_vector = derivative_at(model, r, &vector, step, opts.derivative)?;
            Ok(BranchSample { r, energy, vector, d_vector })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AdiabaticBranch { samples, step })
}

/// Resolves the initial vector at `r_grid[0]` and tracks from there.
pub fn track_from_start(
    model: &Model,
    r_grid: &[f64],
    selection: InitialSelection,
    opts: &TrackOptions,
) -> Result<AdiabaticBranch> {
    let r0 = *r_grid
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty R grid".into()))?;
    let delta = 1e-4 * model.spec().j0.abs().max(1.0);
    let initial = resolve_initial_degeneracy(model, r0, delta, selection)?;
    track_branch(model, r_grid, &initial, opts)
}

/// Uniform grid of `n` points on [lo, hi].
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|k| if k == n - 1 { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// All eigenvalues of H0(r), ascending.
pub fn spectrum_at(model: &Model, r: f64) -> Result<Vec<f64>> {
    Ok(eigensolve(&model.h0(r))?.energies)
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GapSample {
    pub r: f64,
    pub energy: f64,
    /// Distance to the nearest other level of the full spectrum.
    pub gap: f64,
    /// Distance to the nearest other level in the branch's parity sector.
    pub sector_gap: f64,
}

fn nearest_other(levels: &[f64], energy: f64) -> f64 {
    let own = levels
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - energy).abs().total_cmp(&(b.1 - energy).abs()))
        .map(|(k, _)| k);
    levels
        .iter()
        .enumerate()
        .filter(|(k, _)| Some(*k) != own)
        .map(|(_, e)| (e - energy).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Gaps of the level at `energy` in H0(r); `parity` names its sector.
pub fn gap_at(model: &Model, r: f64, energy: f64, parity: Parity) -> Result<GapSample> {
    let h = model.h0(r);
    let full = eigensolve(&h)?.energies;
    let inside = eigensolve_block(&h, &model.basis().sector(parity))?.energies;
    Ok(GapSample {
        r,
        energy,
        gap: nearest_other(&full, energy),
        sector_gap: nearest_other(&inside, energy),
    })
}

pub fn gap_report(model: &Model, branch: &AdiabaticBranch) -> Result<Vec<GapSample>> {
    let parity = branch.parity(model);
    branch.samples.iter().map(|s| gap_at(model, s.r, s.energy, parity)).collect()
}
