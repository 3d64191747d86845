//! XY models on two spins and on a three-spin Kagome triangle.
//!
//! Couplings follow linear ramps in the schedule parameter R:
//! J1 = J0 - R, J2 = R, Bz = B0 - R.

use crate::error::{Error, Result};
use crate::spin_algebra::{pair_coupling, total_z, Axis, BasisOrder, ComplexMatrix};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    TwoSpinXY,
    ThreeSpinKagome,
}

impl ModelKind {
    pub fn n_spins(self) -> usize {
        match self {
            ModelKind::TwoSpinXY => 2,
            ModelKind::ThreeSpinKagome => 3,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub j0: f64,
    pub b0: f64,
    pub r0: f64,
}

impl ModelSpec {
    /// J0 = 10, B0 = 0, R0 = 0.
    pub fn standard(kind: ModelKind) -> Self {
        ModelSpec { kind, j0: 10.0, b0: 0.0, r0: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("j0", self.j0), ("b0", self.b0), ("r0", self.r0)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    pub fn j1(&self, r: f64) -> f64 {
        self.j0 - r
    }

    pub fn j2(&self, r: f64) -> f64 {
        r
    }

    pub fn bz(&self, r: f64) -> f64 {
        self.b0 - r
    }

    pub const DJ1_DR: f64 = -1.0;
    pub const DJ2_DR: f64 = 1.0;
    pub const DBZ_DR: f64 = -1.0;
}

/// Driving ("regularization") coefficients. For two spins `w1` is W̃ and
/// `w2` is unused (always 0).
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct DrivingCoefficients {
    pub w1: f64,
    pub w2: f64,
    pub bz_tilde: f64,
}

impl DrivingCoefficients {
    pub const ZERO: DrivingCoefficients = DrivingCoefficients { w1: 0.0, w2: 0.0, bz_tilde: 0.0 };

    pub fn scaled(self, s: f64) -> Self {
        DrivingCoefficients { w1: s * self.w1, w2: s * self.w2, bz_tilde: s * self.bz_tilde }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.w1 - other.w1)
            .abs()
            .max((self.w2 - other.w2).abs())
            .max((self.bz_tilde - other.bz_tilde).abs())
    }
}

/// A model with its fixed operators prebuilt.
#[derive(Clone, Debug)]
pub struct Model {
    spec: ModelSpec,
    basis: BasisOrder,
    /// Operator multiplying J1.
    j1_term: ComplexMatrix,
    /// Operator multiplying J2.
    j2_term: ComplexMatrix,
    /// ½ Σ σᶻ, multiplies Bz and B̃z.
    half_z: ComplexMatrix,
    /// Candidate operators multiplying W̃1 and W̃2 (empty W̃2 slot for two spins).
    nn_drive: ComplexMatrix,
    nnn_drive: Option<ComplexMatrix>,
}

fn xy_sym(i: usize, j: usize, basis: &BasisOrder) -> ComplexMatrix {
    pair_coupling(Axis::X, Axis::Y, i, j, basis).expect("distinct sites")
        + pair_coupling(Axis::Y, Axis::X, i, j, basis).expect("distinct sites")
}

impl Model {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        spec.validate()?;
        let basis = BasisOrder::standard(spec.kind.n_spins())?;
        let pc = |a, b, i, j| pair_coupling(a, b, i, j, &basis).expect("distinct sites");
        let half_z = total_z(&basis).scale(0.5);
        let model = match spec.kind {
            ModelKind::TwoSpinXY => Model {
                j1_term: pc(Axis::X, Axis::X, 1, 2),
                j2_term: pc(Axis::Y, Axis::Y, 1, 2),
                nn_drive: xy_sym(1, 2, &basis),
                nnn_drive: None,
                half_z,
                spec,
                basis,
            },
            ModelKind::ThreeSpinKagome => Model {
                j1_term: pc(Axis::X, Axis::X, 1, 2) + pc(Axis::X, Axis::X, 2, 3),
                j2_term: pc(Axis::Y, Axis::Y, 3, 1),
                nn_drive: xy_sym(1, 2, &basis) + xy_sym(2, 3, &basis),
                nnn_drive: Some(xy_sym(3, 1, &basis)),
                half_z,
                spec,
                basis,
            },
        };
        Ok(model)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn basis(&self) -> &BasisOrder {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Original Hamiltonian at schedule parameter `r`.
    pub fn h0(&self, r: f64) -> ComplexMatrix {
        let s = &self.spec;
        self.j1_term.scale(s.j1(r)) + self.j2_term.scale(s.j2(r)) + self.half_z.scale(s.bz(r))
    }

    /// Exact dH0/dR. The ramps are linear so this does not depend on R.
    pub fn dh0_dr(&self) -> ComplexMatrix {
        self.j1_term.scale(ModelSpec::DJ1_DR)
            + self.j2_term.scale(ModelSpec::DJ2_DR)
            + self.half_z.scale(ModelSpec::DBZ_DR)
    }

    pub fn h_candidate(&self, coeffs: &DrivingCoefficients) -> ComplexMatrix {
        let mut m = self.nn_drive.scale(coeffs.w1) + self.half_z.scale(coeffs.bz_tilde);
        if let Some(nnn) = &self.nnn_drive {
            m += nnn.scale(coeffs.w2);
        }
        m
    }

    /// Candidate operators in coefficient order w1, then w2 (three spins only), then bz_tilde.
    pub fn candidate_generators(&self) -> Vec<ComplexMatrix> {
        let mut g = vec![self.nn_drive.clone()];
        if let Some(nnn) = &self.nnn_drive {
            g.push(nnn.clone());
        }
        g.push(self.half_z.clone());
        g
    }

    /// Packs solved generator weights back into named coefficients.
    pub fn coefficients_from(&self, weights: &[f64]) -> DrivingCoefficients {
        match self.spec.kind {
            ModelKind::TwoSpinXY => {
                DrivingCoefficients { w1: weights[0], w2: 0.0, bz_tilde: weights[1] }
            }
            ModelKind::ThreeSpinKagome => {
                DrivingCoefficients { w1: weights[0], w2: weights[1], bz_tilde: weights[2] }
            }
        }
    }

    /// H0(r) + v·H̃(coeffs), the fast-forward Hamiltonian at one instant.
    pub fn h_driven(&self, r: f64, v: f64, coeffs: &DrivingCoefficients) -> ComplexMatrix {
        let mut h = self.h0(r);
        if v != 0.0 {
            h += self.h_candidate(&coeffs.scaled(v));
        }
        h
    }
}
