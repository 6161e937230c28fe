//! Measurement geometries, the light-amplitude operators `D` and `B`, and
//! the jump channels built from them.
//!
//! Site indices are 0-based. A physical site label `j` (counted from 1)
//! is index `j - 1`, so `OddSites` lights indices 0, 2, 4, ... and
//! `Alternating` carries `+1` on index 0.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fock::{hop_op, weighted_density, weighted_magnetization, FockBasis, SparseOperator, Species};
use crate::model::LatticeSpec;
use crate::C64;

/// Spatial profile of the probe light.
#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    /// `J_jj = 1` on odd physical sites, 0 elsewhere.
    OddSites,
    /// `J_jj = (-1)^(j+1)`, so `D = N_odd - N_even`.
    Alternating,
    /// `J_jj = exp(i 2 pi j / R)`.
    RMode(usize),
    CustomDiagonal(Vec<C64>),
    /// Nearest-neighbour coefficients `(i, j, J_ij)`, giving `B`.
    InterSite(Vec<(usize, usize, C64)>),
}

impl Geometry {
    pub fn is_diagonal(&self) -> bool {
        !matches!(self, Geometry::InterSite(_))
    }
}

/// Measurement strength, either given directly or through the cavity
/// parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coupling {
    Direct { gamma: f64 },
    Rayleigh { omega10: f64, a0: C64, delta_p: f64, kappa: f64 },
}

impl Coupling {
    pub fn validated(self) -> Result<Self> {
        match self {
            Coupling::Direct { gamma } if !(gamma >= 0.0) || !gamma.is_finite() => {
                Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")))
            }
            Coupling::Rayleigh { omega10, a0, delta_p, kappa } => {
                rayleigh_coefficient(omega10, a0, delta_p, kappa)?;
                Ok(self)
            }
            _ => Ok(self),
        }
    }

    /// `gamma = |C|^2 kappa`.
    pub fn gamma(&self) -> f64 {
        match *self {
            Coupling::Direct { gamma } => gamma,
            Coupling::Rayleigh { omega10, a0, delta_p, kappa } => {
                rayleigh_coefficient(omega10, a0, delta_p, kappa).map(|c| c.norm_sqr() * kappa).unwrap_or(f64::NAN)
            }
        }
    }

    /// Amplitude multiplying the measured operator in the jump operator:
    /// `sqrt(2 kappa) C`, or `sqrt(2 gamma)` when `gamma` is given.
    pub fn prefactor(&self) -> Result<C64> {
        match *self {
            Coupling::Direct { gamma } => Ok(C64::new((2.0 * gamma).sqrt(), 0.0)),
            Coupling::Rayleigh { omega10, a0, delta_p, kappa } => {
                Ok(rayleigh_coefficient(omega10, a0, delta_p, kappa)? * (2.0 * kappa).sqrt())
            }
        }
    }
}

/// `C = i Omega10 a0 / (i Delta_p - kappa)`.
pub fn rayleigh_coefficient(omega10: f64, a0: C64, delta_p: f64, kappa: f64) -> Result<C64> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidParameter(format!("kappa must be > 0, got {kappa}")));
    }
    Ok(C64::i() * omega10 * a0 / C64::new(-kappa, delta_p))
}

/// Which on-site quantity a diagonal channel measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelKind {
    /// `rho_j = n_up + n_down` (plain `n_j` for bosons).
    Density,
    /// `m_j = n_up - n_down`.
    Magnetization,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    pub geometry: Geometry,
    pub coupling: Coupling,
    pub channels: Vec<ChannelKind>,
}

impl Probe {
    pub fn new(geometry: Geometry, coupling: Coupling) -> Self {
        Self { geometry, coupling, channels: vec![ChannelKind::Density] }
    }

    /// Two polarizations: one channel for the density, one for the
    /// magnetization, sharing the same profile.
    pub fn fermion_dual(geometry: Geometry, coupling: Coupling) -> Self {
        Self { geometry, coupling, channels: vec![ChannelKind::Density, ChannelKind::Magnetization] }
    }

    pub fn gamma(&self) -> f64 {
        self.coupling.gamma()
    }
}

/// A jump operator `c = prefactor * (M - shift)` for a measured operator `M`.
#[derive(Clone, Debug)]
pub struct JumpChannel {
    pub label: String,
    prefactor: C64,
    measured: SparseOperator,
    op: SparseOperator,
}

impl JumpChannel {
    pub fn new(label: impl Into<String>, prefactor: C64, measured: SparseOperator) -> Self {
        let op = measured.scale(prefactor);
        Self { label: label.into(), prefactor, measured, op }
    }

    pub fn op(&self) -> &SparseOperator {
        &self.op
    }

    pub fn measured(&self) -> &SparseOperator {
        &self.measured
    }

    pub fn prefactor(&self) -> C64 {
        self.prefactor
    }

    /// `c^dagger c`.
    pub fn decay_operator(&self) -> Result<SparseOperator> {
        Ok(self.op.adjoint().matmul(&self.op)?.with_hermitian_flag(true))
    }

    /// `<x|c^dagger c|x>` for an unnormalized `x`.
    pub fn rate(&self, x: &[C64]) -> f64 {
        crate::linalg::norm_sqr(&self.op.apply(x))
    }

    /// The same channel with the measured operator shifted by a constant,
    /// `prefactor * (M - shift)`. For a Hermitian `M` and real `shift` the
    /// master equation is unchanged while the no-jump evolution loses the
    /// overall decay rate proportional to `shift`.
    pub fn recentered(&self, shift: f64) -> Result<Self> {
        let id = SparseOperator::identity(self.measured.tag(), self.measured.dim()).scale(C64::new(shift, 0.0));
        let measured = self.measured.sub_op(&id)?.with_hermitian_flag(self.measured.hermitian());
        Ok(Self::new(self.label.clone(), self.prefactor, measured))
    }
}

/// Diagonal coefficients `J_jj` of a diagonal geometry on `sites` sites.
pub fn diagonal_coefficients(geometry: &Geometry, sites: usize) -> Result<Vec<C64>> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    match geometry {
        Geometry::OddSites => Ok((0..sites).map(|k| if k % 2 == 0 { one } else { zero }).collect()),
        Geometry::Alternating => Ok((0..sites).map(|k| if k % 2 == 0 { one } else { -one }).collect()),
        Geometry::RMode(r) => {
            if *r < 1 {
                return Err(Error::InvalidParameter("R must be >= 1".into()));
            }
            Ok((0..sites).map(|k| C64::from_polar(1.0, 2.0 * PI * (k + 1) as f64 / *r as f64)).collect())
        }
        Geometry::CustomDiagonal(v) => {
            if v.len() != sites {
                return Err(Error::GeometryLength { expected: sites, got: v.len() });
            }
            Ok(v.clone())
        }
        Geometry::InterSite(_) => Err(Error::InvalidParameter("inter-site geometry has no diagonal profile".into())),
    }
}

/// `D = sum_j J_jj n_j`.
pub fn build_d(basis: &FockBasis, geometry: &Geometry) -> Result<SparseOperator> {
    let w = diagonal_coefficients(geometry, basis.sites())?;
    let real = w.iter().all(|z| z.im == 0.0);
    Ok(weighted_density(basis, &w)?.with_hermitian_flag(real))
}

/// `B = sum_<ij> J_ij b_i^dagger b_j` over the listed nearest-neighbour
/// pairs. The hermitian flag reflects whether `J_ij = conj(J_ji)` holds.
pub fn build_b(basis: &FockBasis, lattice: &LatticeSpec, terms: &[(usize, usize, C64)]) -> Result<SparseOperator> {
    let mut trip = Vec::new();
    for &(i, j, c) in terms {
        basis.check_site(i)?;
        basis.check_site(j)?;
        if !lattice.are_neighbors(i, j) {
            return Err(Error::NotNearestNeighbor(i, j));
        }
        trip.extend(hop_op(basis, i, j, None)?.entries().map(|(r, k, v)| (r, k, v * c)));
    }
    let op = SparseOperator::from_triplets(basis.tag(), basis.dim(), trip);
    let pattern_hermitian = terms.iter().all(|&(i, j, c)| {
        let back: C64 = terms.iter().filter(|t| t.0 == j && t.1 == i).map(|t| t.2).sum();
        (back.conj() - c).norm() < 1e-14
    });
    Ok(op.with_hermitian_flag(pattern_hermitian))
}

/// Density channel `D_x` and magnetization channel `D_y` for spin-1/2
/// fermions, sharing one diagonal profile.
pub fn build_fermion_channels(
    basis: &FockBasis,
    geometry: &Geometry,
    coupling: &Coupling,
) -> Result<(JumpChannel, JumpChannel)> {
    if basis.species() != Species::FermionSpinHalf {
        return Err(Error::Species("density/magnetization channels need fermions".into()));
    }
    let w = diagonal_coefficients(geometry, basis.sites())?;
    let pre = coupling.prefactor()?;
    let x = JumpChannel::new("D_x", pre, weighted_density(basis, &w)?);
    let y = JumpChannel::new("D_y", pre, weighted_magnetization(basis, &w)?);
    Ok((x, y))
}

/// All jump channels of a probe.
pub fn build_channels(basis: &FockBasis, lattice: &LatticeSpec, probe: &Probe) -> Result<Vec<JumpChannel>> {
    let pre = probe.coupling.validated()?.prefactor()?;
    if let Geometry::InterSite(terms) = &probe.geometry {
        return Ok(vec![JumpChannel::new("B", pre, build_b(basis, lattice, terms)?)]);
    }
    let w = diagonal_coefficients(&probe.geometry, basis.sites())?;
    let fermions = basis.species() == Species::FermionSpinHalf;
    let mut out = Vec::new();
    for kind in &probe.channels {
        let ch = match (kind, fermions) {
            (ChannelKind::Density, false) => JumpChannel::new("D", pre, weighted_density(basis, &w)?),
            (ChannelKind::Density, true) => JumpChannel::new("D_x", pre, weighted_density(basis, &w)?),
            (ChannelKind::Magnetization, _) => JumpChannel::new("D_y", pre, weighted_magnetization(basis, &w)?),
        };
        out.push(ch);
    }
    Ok(out)
}

/// Number of distinct mode components sharing one `|D|^2` value for an
/// R-mode profile: 2 for `R = 2`, `2R` beyond.
pub fn component_multiplicity(r: usize) -> Result<usize> {
    match r {
        0 | 1 => Err(Error::InvalidParameter(format!("R must be >= 2, got {r}"))),
        2 => Ok(2),
        _ => Ok(2 * r),
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse()
        .map_err(|_| Error::InvalidParameter(format!("line {line}: cannot parse '{tok}' as a number")))
}

/// One complex coefficient per line as `re im`. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_diagonal_profile(text: &str) -> Result<Vec<C64>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::InvalidParameter(format!("line {}: expected 're im'", n + 1)));
        }
        out.push(C64::new(parse_f64(toks[0], n + 1)?, parse_f64(toks[1], n + 1)?));
    }
    Ok(out)
}

/// Inter-site coefficients, one `i j re im` entry per line (0-based).
pub fn parse_intersite_profile(text: &str) -> Result<Vec<(usize, usize, C64)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 4 {
            return Err(Error::InvalidParameter(format!("line {}: expected 'i j re im'", n + 1)));
        }
        let idx = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("line {}: bad site index '{t}'", n + 1)))
        };
        out.push((idx(toks[0])?, idx(toks[1])?, C64::new(parse_f64(toks[2], n + 1)?, parse_f64(toks[3], n + 1)?)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{number_op, FockBasis};
    use crate::model::bose_hubbard;

    fn eig(op: &SparseOperator, basis: &FockBasis, occ: &[u8]) -> C64 {
        let k = basis.index_of(occ).unwrap();
        op.get(k, k)
    }

    #[test]
    fn rayleigh_examples() {
        let c = rayleigh_coefficient(1.0, C64::new(1.0, 0.0), 1.0, 1.0).unwrap();
        assert!((c - C64::new(0.5, -0.5)).norm() < 1e-15);
        let c = rayleigh_coefficient(2.0, C64::new(0.5, 0.0), 0.0, 4.0).unwrap();
        assert!((c - C64::new(0.0, -0.25)).norm() < 1e-15);
        let (w, a0, dp, k) = (1.3, C64::new(0.2, -0.7), 0.4, 2.5);
        let c = rayleigh_coefficient(w, a0, dp, k).unwrap();
        assert!((c.norm_sqr() - w * w * a0.norm_sqr() / (dp * dp + k * k)).abs() < 1e-14);
        assert!(rayleigh_coefficient(1.0, a0, 0.0, 0.0).is_err());
    }

    #[test]
    fn diagonal_profiles() {
        let b = FockBasis::bosons(4, 4).unwrap();
        let d = build_d(&b, &Geometry::OddSites).unwrap();
        assert_eq!(eig(&d, &b, &[1, 1, 1, 1]), C64::new(2.0, 0.0));
        let d = build_d(&b, &Geometry::Alternating).unwrap();
        assert_eq!(eig(&d, &b, &[1, 1, 1, 1]), C64::new(0.0, 0.0));
        assert_eq!(eig(&d, &b, &[2, 0, 2, 0]), C64::new(4.0, 0.0));
        let b3 = FockBasis::bosons(3, 3).unwrap();
        let d = build_d(&b3, &Geometry::RMode(3)).unwrap();
        assert!(eig(&d, &b3, &[1, 1, 1]).norm() < 1e-14);
        assert!(matches!(
            build_d(&b, &Geometry::CustomDiagonal(vec![C64::new(1.0, 0.0); 3])),
            Err(Error::GeometryLength { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn d_commutes_with_densities() {
        let b = FockBasis::bosons(5, 3).unwrap();
        for g in [Geometry::OddSites, Geometry::Alternating, Geometry::RMode(3)] {
            let d = build_d(&b, &g).unwrap();
            for j in 0..5 {
                assert!(d.commutator_norm(&number_op(&b, j, None).unwrap()).unwrap() < 1e-14);
            }
        }
    }

    #[test]
    fn two_site_bond_operator() {
        let b = FockBasis::bosons(2, 1).unwrap();
        let lat = LatticeSpec::new(2, 1.0, 0.0).unwrap();
        let one = C64::new(1.0, 0.0);
        let op = build_b(&b, &lat, &[(0, 1, one), (1, 0, one)]).unwrap();
        assert!(op.hermitian());
        let left = b.index_of(&[1, 0]).unwrap();
        let right = b.index_of(&[0, 1]).unwrap();
        assert_eq!(op.get(right, left), one);
        let ev = crate::linalg::dense_eigenvalues(&op);
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
        let lat3 = LatticeSpec::new(3, 1.0, 0.0).unwrap();
        let b3 = FockBasis::bosons(3, 1).unwrap();
        assert!(matches!(build_b(&b3, &lat3, &[(0, 2, one)]), Err(Error::NotNearestNeighbor(0, 2))));
        assert!(!build_b(&b, &lat, &[(0, 1, one)]).unwrap().hermitian());
    }

    #[test]
    fn periodic_bond_operator_commutes_with_free_hamiltonian() {
        let lat = LatticeSpec::new(4, 1.0, 0.0).unwrap().periodic();
        let one = C64::new(1.0, 0.0);
        let terms: Vec<_> = lat.bonds().iter().flat_map(|&(i, j)| [(i, j, one), (j, i, one)]).collect();
        for n in [1, 2] {
            let b = FockBasis::bosons(4, n).unwrap();
            let op = build_b(&b, &lat, &terms).unwrap();
            let h = bose_hubbard(&b, &lat).unwrap();
            assert!(op.commutator_norm(&h).unwrap() < 1e-12);
        }
        // single-particle spectrum is 2 cos(2 pi m / L)
        let b = FockBasis::bosons(4, 1).unwrap();
        let ev = crate::linalg::dense_eigenvalues(&build_b(&b, &lat, &terms).unwrap());
        let mut expect: Vec<f64> = (0..4).map(|m| 2.0 * (2.0 * PI * m as f64 / 4.0).cos()).collect();
        expect.sort_by(f64::total_cmp);
        for (a, e) in ev.iter().zip(expect) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn fermion_channel_eigenvalues() {
        let b = FockBasis::fermions(2, 1, 1).unwrap();
        let (x, y) = build_fermion_channels(&b, &Geometry::OddSites, &Coupling::Direct { gamma: 0.5 }).unwrap();
        let k = b.fock_index(&[1, 0], Some(&[1, 0])).unwrap();
        assert_eq!(x.measured().get(k, k), C64::new(2.0, 0.0));
        assert_eq!(y.measured().get(k, k), C64::new(0.0, 0.0));
        let b = FockBasis::fermions(2, 1, 0).unwrap();
        let (x, y) = build_fermion_channels(&b, &Geometry::OddSites, &Coupling::Direct { gamma: 0.5 }).unwrap();
        let k = b.fock_index(&[1, 0], Some(&[0, 0])).unwrap();
        assert_eq!(x.measured().get(k, k), C64::new(1.0, 0.0));
        assert_eq!(y.measured().get(k, k), C64::new(1.0, 0.0));
        let bosons = FockBasis::bosons(2, 1).unwrap();
        assert!(build_fermion_channels(&bosons, &Geometry::OddSites, &Coupling::Direct { gamma: 1.0 }).is_err());
    }

    #[test]
    fn rate_identity() {
        let b = FockBasis::bosons(4, 2).unwrap();
        let lat = LatticeSpec::new(4, 1.0, 0.0).unwrap();
        let (kappa, om, a0, dp) = (0.7, 1.1, C64::new(0.3, 0.4), -0.2);
        let coupling = Coupling::Rayleigh { omega10: om, a0, delta_p: dp, kappa };
        let chans = build_channels(&b, &lat, &Probe::new(Geometry::Alternating, coupling)).unwrap();
        let c = rayleigh_coefficient(om, a0, dp, kappa).unwrap();
        let d = build_d(&b, &Geometry::Alternating).unwrap();
        let x: Vec<C64> = (0..b.dim()).map(|k| C64::new((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let x = crate::linalg::normalized(&x);
        let dd = crate::linalg::norm_sqr(&d.apply(&x));
        assert!((chans[0].rate(&x) - 2.0 * kappa * c.norm_sqr() * dd).abs() < 1e-12);
        assert!((coupling.gamma() - c.norm_sqr() * kappa).abs() < 1e-15);
    }

    #[test]
    fn recentering_shifts_the_spectrum() {
        let b = FockBasis::bosons(3, 2).unwrap();
        let lat = LatticeSpec::new(3, 1.0, 0.0).unwrap();
        let ch = build_channels(&b, &lat, &Probe::new(Geometry::OddSites, Coupling::Direct { gamma: 2.0 })).unwrap();
        let r = ch[0].recentered(1.0).unwrap();
        let k = b.index_of(&[1, 1, 0]).unwrap();
        assert!(r.op().get(k, k).norm() < 1e-15);
        let k = b.index_of(&[2, 0, 0]).unwrap();
        assert!((r.op().get(k, k) - C64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn multiplicity_rule() {
        assert_eq!(component_multiplicity(2).unwrap(), 2);
        assert_eq!(component_multiplicity(3).unwrap(), 6);
        assert_eq!(component_multiplicity(4).unwrap(), 8);
        assert!(component_multiplicity(1).is_err());
    }

    #[test]
    fn profile_files() {
        let v = parse_diagonal_profile("# odd\n1 0\n0 0\n\n1 0.5\n").unwrap();
        assert_eq!(v, vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.5)]);
        assert!(parse_diagonal_profile("1\n").is_err());
        let m = parse_intersite_profile("0 1 1 0\n1 0 1 0\n").unwrap();
        assert_eq!(m[1], (1, 0, C64::new(1.0, 0.0)));
        assert!(parse_intersite_profile("0 x 1 0").is_err());
    }
}
