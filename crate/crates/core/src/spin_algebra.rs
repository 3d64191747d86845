//! Pauli operators on small spin clusters.
//!
//! Kets are stored as bit patterns: site 1 is the most significant bit and a
//! set bit means spin down. [`BasisOrder::standard`] is therefore the usual
//! binary-counting Kronecker order |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩, which is also the
//! order in which the model matrices are written.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<C64>;
pub type StateVector = DVector<C64>;

const MAX_SPINS: usize = 10;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    /// Image of a single-spin ket under this Pauli matrix: (flipped?, amplitude).
    fn act(self, down: bool) -> (bool, C64) {
        match (self, down) {
            (Axis::X, _) => (true, C64::new(1.0, 0.0)),
            (Axis::Y, false) => (true, C64::new(0.0, 1.0)),
            (Axis::Y, true) => (true, C64::new(0.0, -1.0)),
            (Axis::Z, false) => (false, C64::new(1.0, 0.0)),
            (Axis::Z, true) => (false, C64::new(-1.0, 0.0)),
        }
    }

    fn matrix(self) -> ComplexMatrix {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Axis::X => ComplexMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            Axis::Y => ComplexMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            Axis::Z => ComplexMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }
}

/// z-parity of a ket, (-1)^(number of down spins).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_ket(ket: u32) -> Parity {
        if ket.count_ones().is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Ordered list of z-basis kets spanning the cluster's Hilbert space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisOrder {
    n_spins: usize,
    kets: Vec<u32>,
    position: Vec<usize>,
}

impl BasisOrder {
    pub fn standard(n_spins: usize) -> Result<Self> {
        if n_spins == 0 || n_spins > MAX_SPINS {
            return Err(Error::UnsupportedSize(n_spins));
        }
        Self::from_kets(n_spins, (0..1u32 << n_spins).collect())
    }

    pub fn from_kets(n_spins: usize, kets: Vec<u32>) -> Result<Self> {
        if n_spins == 0 || n_spins > MAX_SPINS {
            return Err(Error::UnsupportedSize(n_spins));
        }
        let dim = 1usize << n_spins;
        if kets.len() != dim {
            return Err(Error::InvalidParameter(format!(
                "basis order has {} kets, expected {dim}",
                kets.len()
            )));
        }
        let mut position = vec![usize::MAX; dim];
        for (idx, &k) in kets.iter().enumerate() {
            let slot = position
                .get_mut(k as usize)
                .ok_or_else(|| Error::InvalidParameter(format!("ket {k:#b} out of range")))?;
            if *slot != usize::MAX {
                return Err(Error::InvalidParameter(format!("ket {k:#b} listed twice")));
            }
            *slot = idx;
        }
        Ok(BasisOrder { n_spins, kets, position })
    }

    /// Parses labels such as `"↑↓↑"` (or `"udu"`), site 1 leftmost.
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let first = labels
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty basis".into()))?;
        let n_spins = first.as_ref().chars().count();
        let mut kets = Vec::with_capacity(labels.len());
        for label in labels {
            let label = label.as_ref();
            if label.chars().count() != n_spins {
                return Err(Error::InvalidParameter(format!("label {label:?} has wrong length")));
            }
            let mut ket = 0u32;
            for c in label.chars() {
                let down = match c {
                    '↑' | 'u' | 'U' | '0' => 0,
                    '↓' | 'd' | 'D' | '1' => 1,
                    _ => return Err(Error::InvalidParameter(format!("bad spin label {c:?}"))),
                };
                ket = (ket << 1) | down;
            }
            kets.push(ket);
        }
        Self::from_kets(n_spins, kets)
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.kets.len()
    }

    pub fn ket(&self, index: usize) -> u32 {
        self.kets[index]
    }

    pub fn index_of(&self, ket: u32) -> usize {
        self.position[ket as usize]
    }

    pub fn label(&self, index: usize) -> String {
        let ket = self.kets[index];
        (0..self.n_spins)
            .map(|s| if ket >> (self.n_spins - 1 - s) & 1 == 1 { '↓' } else { '↑' })
            .collect()
    }

    /// Basis indices whose kets have the given z-parity.
    pub fn sector(&self, parity: Parity) -> Vec<usize> {
        (0..self.dim()).filter(|&i| Parity::of_ket(self.kets[i]) == parity).collect()
    }

    pub fn parity_of_index(&self, index: usize) -> Parity {
        Parity::of_ket(self.kets[index])
    }

    /// Rewrites a matrix given in standard Kronecker order into this order.
    pub fn permute(&self, standard: &ComplexMatrix) -> ComplexMatrix {
        let dim = self.dim();
        ComplexMatrix::from_fn(dim, dim, |a, b| {
            standard[(self.kets[a] as usize, self.kets[b] as usize)]
        })
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.n_spins {
            Err(Error::InvalidSite { site, n_spins: self.n_spins })
        } else {
            Ok(())
        }
    }
}

/// σ^axis acting on `site` (1-based), built directly in `order`.
pub fn pauli_on_site(axis: Axis, site: usize, order: &BasisOrder) -> Result<ComplexMatrix> {
    order.check_site(site)?;
    let dim = order.dim();
    let shift = order.n_spins - site;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let ket = order.ket(col);
        let (flip, amp) = axis.act(ket >> shift & 1 == 1);
        let image = if flip { ket ^ (1 << shift) } else { ket };
        m[(order.index_of(image), col)] = amp;
    }
    Ok(m)
}

/// Same operator as [`pauli_on_site`], built as a Kronecker product in
/// standard order and then permuted. Kept as an independent route.
pub fn pauli_via_kron(axis: Axis, site: usize, order: &BasisOrder) -> Result<ComplexMatrix> {
    order.check_site(site)?;
    let id = ComplexMatrix::identity(2, 2);
    let mut acc = ComplexMatrix::identity(1, 1);
    for s in 1..=order.n_spins {
        let factor = if s == site { axis.matrix() } else { id.clone() };
        acc = acc.kronecker(&factor);
    }
    Ok(order.permute(&acc))
}

/// σ_i^a σ_j^b for distinct sites.
pub fn pair_coupling(
    axis_i: Axis,
    axis_j: Axis,
    i: usize,
    j: usize,
    order: &BasisOrder,
) -> Result<ComplexMatrix> {
    if i == j {
        return Err(Error::SameSite(i));
    }
    Ok(pauli_on_site(axis_i, i, order)? * pauli_on_site(axis_j, j, order)?)
}

/// Sum of σ^z over all sites.
pub fn total_z(order: &BasisOrder) -> ComplexMatrix {
    let dim = order.dim();
    let mut m = ComplexMatrix::zeros(dim, dim);
    for s in 1..=order.n_spins {
        m += pauli_on_site(Axis::Z, s, order).expect("site in range");
    }
    m
}

/// Largest entrywise |M - M†|.
pub fn hermiticity_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub fn ensure_hermitian(m: &ComplexMatrix, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotHermitian(f64::INFINITY));
    }
    let dev = hermiticity_deviation(m);
    if dev > tol {
        Err(Error::NotHermitian(dev))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn max_abs(m: &ComplexMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn sigma_z_site_one_two_spins() {
        let order = BasisOrder::standard(2).unwrap();
        let z1 = pauli_on_site(Axis::Z, 1, &order).unwrap();
        let expected = [1.0, 1.0, -1.0, -1.0];
        for r in 0..4 {
            for col in 0..4 {
                let want = if r == col { c(expected[r], 0.0) } else { c(0.0, 0.0) };
                assert_eq!(z1[(r, col)], want);
            }
        }
    }

    #[test]
    fn pauli_involution() {
        let order = BasisOrder::standard(3).unwrap();
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            for site in 1..=3 {
                let p = pauli_on_site(axis, site, &order).unwrap();
                let sq = &p * &p;
                assert!(max_abs(&(sq - ComplexMatrix::identity(8, 8))) < 1e-15);
                assert!(hermiticity_deviation(&p) < 1e-15);
            }
        }
    }

    #[test]
    fn yy_element_matches_printed_minus_j2() {
        let order = BasisOrder::standard(3).unwrap();
        let yy = pair_coupling(Axis::Y, Axis::Y, 1, 3, &order).unwrap();
        let up = order.index_of(0b000);
        let dud = order.index_of(0b101);
        assert_eq!((up, dud), (0, 5));
        assert_eq!(yy[(up, dud)], c(-1.0, 0.0));
    }

    #[test]
    fn xy_plus_yx_element() {
        let order = BasisOrder::standard(2).unwrap();
        let m = pair_coupling(Axis::X, Axis::Y, 1, 2, &order).unwrap()
            + pair_coupling(Axis::Y, Axis::X, 1, 2, &order).unwrap();
        assert_eq!(m[(0, 3)], c(0.0, -2.0));
        assert_eq!(m[(3, 0)], c(0.0, 2.0));
    }

    #[test]
    fn xx_antidiagonal_pattern() {
        let order = BasisOrder::standard(2).unwrap();
        let m = pair_coupling(Axis::X, Axis::X, 1, 2, &order).unwrap();
        for r in 0..4 {
            for col in 0..4 {
                let want = if r + col == 3 { 1.0 } else { 0.0 };
                assert_eq!(m[(r, col)], c(want, 0.0));
            }
        }
    }

    #[test]
    fn pair_products_are_traceless() {
        let order = BasisOrder::standard(3).unwrap();
        for a in [Axis::X, Axis::Y] {
            for b in [Axis::X, Axis::Y] {
                for (i, j) in [(1, 2), (2, 3), (3, 1)] {
                    let m = pair_coupling(a, b, i, j, &order).unwrap();
                    assert!(m.trace().norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn bad_sites_rejected() {
        let order = BasisOrder::standard(2).unwrap();
        assert_eq!(
            pauli_on_site(Axis::X, 3, &order),
            Err(Error::InvalidSite { site: 3, n_spins: 2 })
        );
        assert_eq!(pauli_on_site(Axis::X, 0, &order).unwrap_err(), Error::InvalidSite { site: 0, n_spins: 2 });
        assert_eq!(pair_coupling(Axis::X, Axis::Y, 2, 2, &order), Err(Error::SameSite(2)));
    }

    #[test]
    fn labels_round_trip() {
        let order = BasisOrder::standard(3).unwrap();
        let labels: Vec<String> = (0..8).map(|i| order.label(i)).collect();
        assert_eq!(labels[0], "↑↑↑");
        assert_eq!(labels[3], "↑↓↓");
        assert_eq!(labels[4], "↓↑↑");
        assert_eq!(BasisOrder::from_labels(&labels).unwrap(), order);
        assert!(BasisOrder::from_labels(&["↑↑", "↑↑", "↓↑", "↓↓"]).is_err());
    }

    #[test]
    fn parity_sectors() {
        let order = BasisOrder::standard(3).unwrap();
        assert_eq!(order.sector(Parity::Even), vec![0, 3, 5, 6]);
        assert_eq!(order.sector(Parity::Odd), vec![1, 2, 4, 7]);
    }

    #[test]
    fn non_hermitian_detected() {
        let mut m = ComplexMatrix::identity(2, 2);
        m[(0, 1)] = c(0.0, 1.0);
        assert!(matches!(ensure_hermitian(&m, 1e-12), Err(Error::NotHermitian(_))));
    }
}
