//! Time magnification and integration of the fast-forward Schrödinger
//! equation i∂ψ/∂t = [H0(R(t)) + v(t) H̃(R(t))] ψ with ħ = 1.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{DrivingCoefficients, Model};
use crate::regularization::CoefficientTable;
use crate::spectrum::{follow, track_from_start, uniform_grid, AdiabaticBranch, InitialSelection, RealVector, TrackOptions};
use crate::spin_algebra::{ComplexMatrix, StateVector};

/// Above this the run is rejected.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct FastForwardProfile {
    pub v_bar: f64,
    pub t_ff: f64,
    /// Finite magnification ᾱ, only used by the α(t)/Λ(t) diagnostics.
    pub alpha_bar: Option<f64>,
}

/// sin and cos of 2π·s, reduced so that integer s gives exact 0 and ±1.
fn turn(s: f64) -> (f64, f64) {
    let x = 2.0 * PI * (s - s.round());
    x.sin_cos()
}

impl FastForwardProfile {
    pub fn new(v_bar: f64, t_ff: f64) -> Result<Self> {
        if !(v_bar > 0.0 && v_bar.is_finite()) {
            return Err(Error::InvalidParameter("v_bar must be positive".into()));
        }
        if !(t_ff > 0.0 && t_ff.is_finite()) {
            return Err(Error::InvalidParameter("t_ff must be positive".into()));
        }
        Ok(FastForwardProfile { v_bar, t_ff, alpha_bar: None })
    }

    pub fn with_alpha_bar(mut self, alpha_bar: f64) -> Self {
        self.alpha_bar = Some(alpha_bar);
        self
    }

    fn check(&self, t: f64) -> Result<()> {
        if t >= 0.0 && t <= self.t_ff {
            Ok(())
        } else {
            Err(Error::TimeOutOfRange { t, t_ff: self.t_ff })
        }
    }

    /// Total schedule advance R(T_FF) - R0 = v̄·T_FF.
    pub fn span(&self) -> f64 {
        self.v_bar * self.t_ff
    }

    /// R(Λ(t)) = R0 + 2v̄(t/2 - T sin(2πt/T)/(4π)).
    pub fn r_of_t(&self, r0: f64, t: f64) -> Result<f64> {
        self.check(t)?;
        let (sin, _) = turn(t / self.t_ff);
        Ok(r0 + 2.0 * self.v_bar * (0.5 * t - self.t_ff * sin / (4.0 * PI)))
    }

    /// v(t) = v̄(1 - cos(2πt/T)) = dR/dt.
    pub fn v_of_t(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let (_, cos) = turn(t / self.t_ff);
        Ok(self.v_bar * (1.0 - cos))
    }

    fn alpha_bar(&self) -> Result<f64> {
        match self.alpha_bar {
            Some(a) if a >= 1.0 => Ok(a),
            Some(a) => Err(Error::InvalidParameter(format!("alpha_bar = {a} < 1"))),
            None => Err(Error::InvalidParameter("alpha_bar not set".into())),
        }
    }

    /// α(t) = ᾱ - (ᾱ - 1) cos(2πt/T).
    pub fn alpha_of_t(&self, t: f64) -> Result<f64> {
        let a = self.alpha_bar()?;
        self.check(t)?;
        let (_, cos) = turn(t / self.t_ff);
        Ok(a - (a - 1.0) * cos)
    }

    /// Λ(t) = ∫α = ᾱt - (ᾱ - 1)(T/2π) sin(2πt/T).
    pub fn lambda_of_t(&self, t: f64) -> Result<f64> {
        let a = self.alpha_bar()?;
        self.check(t)?;
        let (sin, _) = turn(t / self.t_ff);
        Ok(a * t - (a - 1.0) * self.t_ff / (2.0 * PI) * sin)
    }
}

/// |⟨branch|ψ⟩|² for unit vectors.
pub fn fidelity(psi: &StateVector, branch: &StateVector) -> Result<f64> {
    for v in [psi, branch] {
        let n = v.norm();
        if (n - 1.0).abs() > NORM_DRIFT_LIMIT {
            return Err(Error::NotNormalized(n));
        }
    }
    Ok(branch.dotc(psi).norm_sqr().min(1.0))
}

#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub r: f64,
    pub v: f64,
    /// Coefficients applied at this instant (zero when driving is off).
    pub coeffs: DrivingCoefficients,
    pub psi: StateVector,
    pub norm: f64,
    pub fidelity: f64,
    pub branch_energy: f64,
    pub branch: RealVector,
}

impl TrajectoryRecord {
    pub fn populations(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn branch_populations(&self) -> Vec<f64> {
        self.branch.iter().map(|x| x * x).collect()
    }
}

#[derive(Copy, Clone, Debug)]
pub struct FastForwardOptions {
    /// Samples of the uniform R grid used for the branch and coefficient table.
    pub grid_points: usize,
    pub selection: InitialSelection,
    pub track: TrackOptions,
    /// When false the v(t)·H̃ term is left out (negative control).
    pub driving: bool,
}

impl Default for FastForwardOptions {
    fn default() -> Self {
        FastForwardOptions {
            grid_points: 2001,
            selection: InitialSelection::Sector(crate::spin_algebra::Parity::Even),
            track: TrackOptions::default(),
            driving: true,
        }
    }
}

/// Everything needed to evaluate H_FF(t) and to compare against the branch.
#[derive(Clone, Debug)]
pub struct FastForward {
    pub model: Model,
    pub profile: FastForwardProfile,
    pub branch: AdiabaticBranch,
    pub table: CoefficientTable,
    pub driving: bool,
}

impl FastForward {
    pub fn new(model: Model, profile: FastForwardProfile, opts: &FastForwardOptions) -> Result<Self> {
        if opts.grid_points < 3 {
            return Err(Error::InvalidParameter("grid_points must be at least 3".into()));
        }
        let r0 = model.spec().r0;
        let grid = uniform_grid(r0, r0 + profile.span(), opts.grid_points);
        let branch = track_from_start(&model, &grid, opts.selection, &opts.track)?;
        let table = CoefficientTable::from_branch(&model, &branch)?;
        Ok(FastForward { model, profile, branch, table, driving: opts.driving })
    }

    pub fn r0(&self) -> f64 {
        self.model.spec().r0
    }

    /// (R, v, coefficients in use) at time t.
    pub fn schedule(&self, t: f64) -> Result<(f64, f64, DrivingCoefficients)> {
        let r = self.profile.r_of_t(self.r0(), t)?;
        let v = self.profile.v_of_t(t)?;
        let coeffs = if self.driving { self.table.at(r)? } else { DrivingCoefficients::ZERO };
        Ok((r, v, coeffs))
    }

    pub fn h_ff(&self, t: f64) -> Result<ComplexMatrix> {
        let (r, v, coeffs) = self.schedule(t)?;
        Ok(self.model.h_driven(r, v, &coeffs))
    }

    /// Branch energy and vector at schedule parameter `r`, continued from the
    /// nearest tabulated sample.
    pub fn branch_at(&self, r: f64) -> Result<(f64, RealVector)> {
        let samples = &self.branch.samples;
        let k = samples.partition_point(|s| s.r < r);
        let nearest = match k {
            0 => 0,
            k if k >= samples.len() => samples.len() - 1,
            k if (samples[k].r - r).abs() < (r - samples[k - 1].r).abs() => k,
            k => k - 1,
        };
        let (energy, vector, _) = follow(&self.model, r, &samples[nearest].vector)?;
        Ok((energy, vector))
    }

    pub fn initial_state(&self) -> StateVector {
        self.branch.samples[0].vector.map(|x| C64::new(x, 0.0))
    }

    fn record(&self, t: f64, psi: &StateVector) -> Result<TrajectoryRecord> {
        let (r, v, coeffs) = self.schedule(t)?;
        let (branch_energy, branch) = self.branch_at(r)?;
        let norm = psi.norm();
        let cb = branch.map(|x| C64::new(x, 0.0));
        Ok(TrajectoryRecord {
            t,
            r,
            v,
            coeffs,
            psi: psi.clone(),
            norm,
            fidelity: fidelity(psi, &cb)?,
            branch_energy,
            branch,
        })
    }

    /// Fixed-step RK4 over [0, T_FF] with `steps` steps, recording every
    /// `stride` steps and at the final time. No renormalization is applied.
    pub fn integrate(&self, initial: &StateVector, steps: usize, stride: usize) -> Result<Vec<TrajectoryRecord>> {
        let stride = stride.max(1);
        let mut psi = initial.clone();
        let mut records = vec![self.record(0.0, &psi)?];
        if steps == 0 {
            return Ok(records);
        }
        let t_ff = self.profile.t_ff;
        let dt = t_ff / steps as f64;
        let minus_i = C64::new(0.0, -1.0);
        let mut h_start = self.h_ff(0.0)?;
        let mut drift = 0.0f64;
        for k in 0..steps {
            let t = k as f64 * dt;
            let t_next = if k + 1 == steps { t_ff } else { (k + 1) as f64 * dt };
            let h_mid = self.h_ff(t + 0.5 * dt)?;
            let h_end = self.h_ff(t_next)?;
            let k1 = (&h_start * &psi) * minus_i;
            let k2 = (&h_mid * (&psi + &k1 * C64::new(0.5 * dt, 0.0))) * minus_i;
            let k3 = (&h_mid * (&psi + &k2 * C64::new(0.5 * dt, 0.0))) * minus_i;
            let k4 = (&h_end * (&psi + &k3 * C64::new(dt, 0.0))) * minus_i;
            psi += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);
            h_start = h_end;
            drift = drift.max((psi.norm() - 1.0).abs());
            if drift > NORM_DRIFT_LIMIT {
                return Err(Error::NormDrift(drift));
            }
            if (k + 1) % stride == 0 || k + 1 == steps {
                records.push(self.record(t_next, &psi)?);
            }
        }
        Ok(records)
    }

    /// Integrates from the branch state at R0.
    pub fn run(&self, steps: usize, stride: usize) -> Result<Vec<TrajectoryRecord>> {
        self.integrate(&self.initial_state(), steps, stride)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelKind, ModelSpec};

    fn standard_profile() -> FastForwardProfile {
        FastForwardProfile::new(10.0, 1.0).unwrap()
    }

    #[test]
    fn schedule_endpoints() {
        let p = standard_profile();
        assert_eq!(p.r_of_t(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(p.r_of_t(0.0, 1.0).unwrap(), 10.0);
        assert_eq!(p.r_of_t(2.0, 0.5).unwrap(), 7.0);
        assert_eq!(p.v_of_t(0.0).unwrap(), 0.0);
        assert_eq!(p.v_of_t(1.0).unwrap(), 0.0);
        assert_eq!(p.v_of_t(0.5).unwrap(), 20.0);
        assert!(matches!(p.r_of_t(0.0, 1.5), Err(Error::TimeOutOfRange { .. })));
        assert!(p.v_of_t(-0.1).is_err());
    }

    #[test]
    fn velocity_is_derivative_of_schedule() {
        let p = standard_profile();
        let n = 1001;
        let h = 1e-6;
        for k in 1..n - 1 {
            let t = k as f64 / (n - 1) as f64;
            let fd = (p.r_of_t(0.0, t + h).unwrap() - p.r_of_t(0.0, t - h).unwrap()) / (2.0 * h);
            assert!((fd - p.v_of_t(t).unwrap()).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn magnification() {
        let p = FastForwardProfile::new(10.0, 2.0).unwrap().with_alpha_bar(5.0);
        assert_eq!(p.alpha_of_t(0.0).unwrap(), 1.0);
        assert_eq!(p.alpha_of_t(1.0).unwrap(), 9.0);
        assert_eq!(p.lambda_of_t(2.0).unwrap(), 10.0);
        assert!(standard_profile().with_alpha_bar(0.5).alpha_of_t(0.0).is_err());
        assert!(standard_profile().alpha_of_t(0.0).is_err());
    }

    #[test]
    fn invalid_profile() {
        assert!(FastForwardProfile::new(10.0, -1.0).is_err());
        assert!(FastForwardProfile::new(0.0, 1.0).is_err());
    }

    #[test]
    fn fidelity_basics() {
        let a = StateVector::from_vec(vec![C64::new(1.0, 0.0), C64::default()]);
        let b = StateVector::from_vec(vec![C64::default(), C64::new(0.0, 1.0)]);
        assert_eq!(fidelity(&a, &a).unwrap(), 1.0);
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
        let c = a.clone() * C64::new(2.0, 0.0);
        assert!(matches!(fidelity(&c, &a), Err(Error::NotNormalized(_))));
    }

    fn small_run(kind: ModelKind) -> FastForward {
        let opts = FastForwardOptions { grid_points: 401, ..Default::default() };
        FastForward::new(Model::new(ModelSpec::standard(kind)).unwrap(), standard_profile(), &opts).unwrap()
    }

    #[test]
    fn endpoints_pin_the_hamiltonian() {
        for kind in [ModelKind::TwoSpinXY, ModelKind::ThreeSpinKagome] {
            let ff = small_run(kind);
            assert_eq!(ff.h_ff(0.0).unwrap(), ff.model.h0(0.0));
            assert_eq!(ff.h_ff(1.0).unwrap(), ff.model.h0(10.0));
        }
    }

    #[test]
    fn zero_steps_returns_initial_record() {
        let ff = small_run(ModelKind::TwoSpinXY);
        let recs = ff.run(0, 1).unwrap();
        assert_eq!(recs.len(), 1);
        assert!((recs[0].fidelity - 1.0).abs() < 1e-14);
    }

    #[test]
    fn norm_drift_is_reported() {
        let ff = small_run(ModelKind::ThreeSpinKagome);
        // dt·‖H‖ far beyond RK4 stability.
        assert!(matches!(ff.run(3, 1), Err(Error::NormDrift(_))));
    }
}
