//! Driving coefficients from the core equation H̃ C = i(∂_R C - (C·∂_R C) C).
//!
//! `solve_core` is the authoritative route: a real least-squares fit of the
//! candidate operators to the target. The closed form for two spins and the
//! component formulas for three spins are independent cross-checks.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::interp::CubicSpline;
use crate::model::{DrivingCoefficients, Model, ModelKind, ModelSpec};
use crate::spectrum::{AdiabaticBranch, RealVector};

/// Above this residual the candidate operators do not span the target.
pub const ANSATZ_TOL: f64 = 1e-6;
const RANK_TOL: f64 = 1e-12;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CoreSolution {
    pub coeffs: DrivingCoefficients,
    /// ‖H̃(coeffs) C - target‖.
    pub residual: f64,
    /// C·∂_R C, the term removed from the target.
    pub correction: f64,
    /// Set when the design matrix lost rank; coeffs are then minimum-norm.
    pub rank_deficient: bool,
}

pub fn solve_core(model: &Model, c: &RealVector, dc: &RealVector) -> Result<CoreSolution> {
    let norm = c.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(norm));
    }
    let correction = c.dot(dc);
    let tangent = dc - c * correction;
    let dim = c.len();
    let cc = c.map(|x| C64::new(x, 0.0));

    let generators = model.candidate_generators();
    let k = generators.len();
    // Real least squares: rows are Re and Im parts of each component.
    let mut design = DMatrix::<f64>::zeros(2 * dim, k);
    for (col, g) in generators.iter().enumerate() {
        let gc = g * &cc;
        for r in 0..dim {
            design[(r, col)] = gc[r].re;
            design[(dim + r, col)] = gc[r].im;
        }
    }
    // target = i·tangent: zero real part, imaginary part = tangent.
    let mut rhs = nalgebra::DVector::<f64>::zeros(2 * dim);
    for r in 0..dim {
        rhs[dim + r] = tangent[r];
    }

    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = RANK_TOL * smax.max(1.0);
    let rank_deficient = svd.singular_values.iter().any(|&s| s <= cutoff);
    let weights = svd
        .solve(&rhs, cutoff)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let residual = (&design * &weights - &rhs).norm();
    if residual > ANSATZ_TOL {
        return Err(Error::AnsatzInsufficient(residual));
    }
    Ok(CoreSolution {
        coeffs: model.coefficients_from(weights.as_slice()),
        residual,
        correction,
        rank_deficient,
    })
}

/// [Bz(J1' - J2') + Bz'(J2 - J1)] / [2(Bz² + (J1 - J2)²)], or `None` when
/// the denominator vanishes.
pub fn xy_amplitude(j1: f64, j2: f64, bz: f64, dj1: f64, dj2: f64, dbz: f64) -> Option<f64> {
    let denominator = 2.0 * (bz * bz + (j1 - j2) * (j1 - j2));
    if denominator < 1e-12 {
        return None;
    }
    Some((bz * (dj1 - dj2) + dbz * (j2 - j1)) / denominator)
}

/// [`xy_amplitude`] on the model ramps, primes read as d/dR.
///
/// This is the amplitude of the ⟨↑↑|H̃|↓↓⟩ = -i·W element, i.e. twice the
/// coefficient of (σ₁ˣσ₂ʸ + σ₁ʸσ₂ˣ).
pub fn printed_two_spin_amplitude(spec: &ModelSpec, r: f64) -> Result<f64> {
    if spec.kind != ModelKind::TwoSpinXY {
        return Err(Error::InvalidParameter("closed form is for the two-spin model".into()));
    }
    xy_amplitude(
        spec.j1(r),
        spec.j2(r),
        spec.bz(r),
        ModelSpec::DJ1_DR,
        ModelSpec::DJ2_DR,
        ModelSpec::DBZ_DR,
    )
    .ok_or(Error::Singular(r))
}

/// Closed-form two-spin driving in operator-coefficient convention.
pub fn closed_form_two_spin(spec: &ModelSpec, r: f64) -> Result<DrivingCoefficients> {
    let amplitude = printed_two_spin_amplitude(spec, r)?;
    Ok(DrivingCoefficients { w1: 0.5 * amplitude, w2: 0.0, bz_tilde: 0.0 })
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ComponentForm {
    pub coeffs: DrivingCoefficients,
    /// Largest imaginary part left over by the complex formulas.
    pub max_imag: f64,
}

const COMPONENT_EPS: f64 = 1e-10;

/// W̃ = -i(a C4 + b C1) / (2(C1² - C4²)), a = i∂C1, b = i∂C4.
pub fn component_form_two_spin(c: &RealVector, dc: &RealVector) -> Result<ComponentForm> {
    let (c1, c4) = (c[0], c[3]);
    let i = C64::new(0.0, 1.0);
    let (a, b) = (i * dc[0], i * dc[3]);
    let den = c1 * c1 - c4 * c4;
    if den.abs() <= COMPONENT_EPS {
        return Err(Error::ComponentFormSingular(c1));
    }
    let w = -i * (a * c4 + b * c1) / (2.0 * den);
    Ok(ComponentForm {
        coeffs: DrivingCoefficients { w1: w.re, w2: 0.0, bz_tilde: 0.0 },
        max_imag: w.im.abs(),
    })
}

/// Three-spin W̃1, W̃2 from the branch components C1, C4, C6 and their
/// R-derivatives (a, b, c = i∂C1, i∂C4, i∂C6).
pub fn component_form_three_spin(c: &RealVector, dc: &RealVector) -> Result<ComponentForm> {
    let (c1, c4, c6) = (c[0], c[3], c[5]);
    let i = C64::new(0.0, 1.0);
    let (a, b, cc) = (i * dc[0], i * dc[3], i * dc[5]);
    let shape = 3.0 * c1 * c1 - 2.0 * c4 * c4 - c6 * c6;
    if c1.abs() <= COMPONENT_EPS || shape.abs() <= COMPONENT_EPS {
        return Err(Error::ComponentFormSingular(c1));
    }
    let den = 2.0 * c1 * shape;
    let w1 = -i * (a * c4 * c1 + 3.0 * b * c1 * c1 - b * c6 * c6 + cc * c4 * c6) / den;
    let w2 = -i * (a * c6 * c1 + 2.0 * b * c4 * c6 + 3.0 * cc * c1 * c1 - 2.0 * cc * c4 * c4) / den;
    Ok(ComponentForm {
        coeffs: DrivingCoefficients { w1: w1.re, w2: w2.re, bz_tilde: 0.0 },
        max_imag: w1.im.abs().max(w2.im.abs()),
    })
}

/// Driving coefficients tabulated along a branch, with spline lookup in R.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    pub r: Vec<f64>,
    pub solutions: Vec<CoreSolution>,
    w1: CubicSpline,
    w2: CubicSpline,
    bz: CubicSpline,
}

impl CoefficientTable {
    pub fn from_branch(model: &Model, branch: &AdiabaticBranch) -> Result<Self> {
        let solutions = branch
            .samples
            .iter()
            .map(|s| solve_core(model, &s.vector, &s.d_vector))
            .collect::<Result<Vec<_>>>()?;
        let r = branch.r_grid();
        let column = |f: fn(&DrivingCoefficients) -> f64| -> Result<CubicSpline> {
            CubicSpline::new(r.clone(), solutions.iter().map(|s| f(&s.coeffs)).collect())
        };
        Ok(CoefficientTable {
            w1: column(|c| c.w1)?,
            w2: column(|c| c.w2)?,
            bz: column(|c| c.bz_tilde)?,
            r,
            solutions,
        })
    }

    pub fn at(&self, r: f64) -> Result<DrivingCoefficients> {
        Ok(DrivingCoefficients {
            w1: self.w1.eval(r)?,
            w2: self.w2.eval(r)?,
            bz_tilde: self.bz.eval(r)?,
        })
    }

    pub fn max_residual(&self) -> f64 {
        self.solutions.iter().map(|s| s.residual).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{track_from_start, uniform_grid, InitialSelection, TrackOptions};
    use crate::spin_algebra::Parity;

    fn even() -> InitialSelection {
        InitialSelection::Sector(Parity::Even)
    }

    #[test]
    fn closed_form_at_start() {
        let spec = ModelSpec::standard(ModelKind::TwoSpinXY);
        // (0·(-2) + (-1)(0 - 10)) / (2·100)
        assert!((printed_two_spin_amplitude(&spec, 0.0).unwrap() - 0.05).abs() < 1e-15);
        assert!((closed_form_two_spin(&spec, 0.0).unwrap().w1 - 0.025).abs() < 1e-15);
    }

    #[test]
    fn closed_form_without_field_vanishes() {
        for (j1, j2) in [(10.0, 0.0), (3.0, 7.0), (-2.0, 5.0)] {
            assert_eq!(xy_amplitude(j1, j2, 0.0, -1.0, 1.0, 0.0), Some(0.0));
        }
    }

    #[test]
    fn closed_form_singular_point() {
        // Bz = 0 and J1 = J2 together need B0 = R = J0/2.
        let spec = ModelSpec { kind: ModelKind::TwoSpinXY, j0: 10.0, b0: 5.0, r0: 0.0 };
        assert_eq!(closed_form_two_spin(&spec, 5.0), Err(Error::Singular(5.0)));
        let three = ModelSpec::standard(ModelKind::ThreeSpinKagome);
        assert!(closed_form_two_spin(&three, 1.0).is_err());
    }

    #[test]
    fn flat_branch_gives_zero() {
        let model = Model::new(ModelSpec::standard(ModelKind::ThreeSpinKagome)).unwrap();
        let mut c = RealVector::zeros(8);
        c[0] = 1.0;
        let dc = RealVector::zeros(8);
        let sol = solve_core(&model, &c, &dc).unwrap();
        assert_eq!(sol.coeffs.max_abs_diff(&DrivingCoefficients::ZERO), 0.0);
        let cf = component_form_three_spin(&c, &dc).unwrap();
        assert_eq!(cf.coeffs.w1, 0.0);
        assert_eq!(cf.coeffs.w2, 0.0);
    }

    #[test]
    fn unnormalized_input_rejected() {
        let model = Model::new(ModelSpec::standard(ModelKind::TwoSpinXY)).unwrap();
        let c = RealVector::from_vec(vec![1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(solve_core(&model, &c, &c), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn ansatz_insufficient_detected() {
        // A tangent pointing into the odd sector cannot be produced by the candidate.
        let model = Model::new(ModelSpec::standard(ModelKind::TwoSpinXY)).unwrap();
        let c = RealVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let dc = RealVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(solve_core(&model, &c, &dc), Err(Error::AnsatzInsufficient(_))));
    }

    #[test]
    fn two_spin_solution_at_start_and_gauge() {
        let model = Model::new(ModelSpec::standard(ModelKind::TwoSpinXY)).unwrap();
        let grid = uniform_grid(0.0, 10.0, 101);
        let branch = track_from_start(&model, &grid, even(), &TrackOptions::default()).unwrap();
        let s = &branch.samples[0];
        let sol = solve_core(&model, &s.vector, &s.d_vector).unwrap();
        assert!((sol.coeffs.w1 - 0.025).abs() < 1e-10);
        assert!(sol.coeffs.bz_tilde.abs() < 1e-10);
        assert!(sol.residual < 1e-8);
        let flipped = solve_core(&model, &(-&s.vector), &(-&s.d_vector)).unwrap();
        assert!(flipped.coeffs.max_abs_diff(&sol.coeffs) < 1e-15);
        let cf = component_form_two_spin(&branch.samples[10].vector, &branch.samples[10].d_vector).unwrap();
        let core = solve_core(&model, &branch.samples[10].vector, &branch.samples[10].d_vector).unwrap();
        assert!((cf.coeffs.w1 - core.coeffs.w1).abs() < 1e-8);
    }

    #[test]
    fn three_spin_component_form_singular_at_start() {
        let model = Model::new(ModelSpec::standard(ModelKind::ThreeSpinKagome)).unwrap();
        let grid = uniform_grid(0.0, 10.0, 101);
        let branch = track_from_start(&model, &grid, even(), &TrackOptions::default()).unwrap();
        let s = &branch.samples[0];
        // |C1| = 1/2 there, so 3C1² - 2C4² - C6² = 4C1² - 1 = 0.
        assert!(matches!(
            component_form_three_spin(&s.vector, &s.d_vector),
            Err(Error::ComponentFormSingular(_))
        ));
        assert!(solve_core(&model, &s.vector, &s.d_vector).unwrap().residual < 1e-8);
    }
}
