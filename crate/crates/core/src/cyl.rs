//! Reduced configuration spaces, cylindrical functions and flux operators.
//!
//! A reduced configuration space is coordinatized by a frame of hoops (or,
//! on the unconstrained side, graph edges); coordinates of a field sample
//! are the frame's κ values. Cylindrical functions are exact polynomials in
//! those coordinates, and a flux operator acts as the constant vector field
//! whose components are the ε values of the frame.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::flux;
use crate::hoop::{decompose_hoop, Chain, HoopSet};
use crate::linalg::{self, Matrix};
use crate::poly::Poly;
use crate::rational::{self, Rational};
use crate::substrate::{FaceId, FieldSample, Scene, SubstrateError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CylError {
    #[error("frame carries no independence certificate")]
    UncertifiedFrame,
    #[error("frames are not comparable: coarse hoop {index} does not decompose over the finer frame")]
    NotComparable { index: usize },
    #[error("{momenta} momenta against a frame of {frame} hoops")]
    DimensionMismatch { momenta: usize, frame: usize },
    #[error("polynomial uses x{var} but the frame has dimension {dim}")]
    VariableOutOfFrame { var: usize, dim: usize },
    #[error("point has {got} coordinates, frame has {dim}")]
    WrongArity { got: usize, dim: usize },
    #[error(transparent)]
    Substrate(#[from] SubstrateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    /// independent hoops: the constrained side
    Hoops,
    /// edges of a graph: the unconstrained side
    Edges,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedConfigSpace {
    frame: HoopSet,
    kind: FrameKind,
}

impl ReducedConfigSpace {
    pub fn hoops(frame: HoopSet) -> ReducedConfigSpace {
        ReducedConfigSpace { frame, kind: FrameKind::Hoops }
    }

    pub fn edges(frame: HoopSet) -> ReducedConfigSpace {
        ReducedConfigSpace { frame, kind: FrameKind::Edges }
    }

    pub fn frame(&self) -> &HoopSet {
        &self.frame
    }

    pub fn kind(&self) -> FrameKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.frame.hoops().iter().map(|h| h.label.as_str()).collect()
    }
}

pub fn kappa_eval(c: &Chain, a: &FieldSample) -> Rational {
    c.iter().map(|(s, k)| a.get(s) * rational::rat(*k)).sum()
}

pub fn coordinate_map(space: &ReducedConfigSpace, a: &FieldSample) -> Vec<Rational> {
    space.frame.chains().map(|c| kappa_eval(c, a)).collect()
}

/// A field sample with the prescribed coordinates, supported on the
/// frame's exclusive segments.
pub fn preimage(space: &ReducedConfigSpace, x: &[Rational]) -> Result<FieldSample, CylError> {
    let cert = space.frame.certificate().ok_or(CylError::UncertifiedFrame)?;
    if x.len() != space.dim() {
        return Err(CylError::WrongArity { got: x.len(), dim: space.dim() });
    }
    let mut a = FieldSample::new();
    for ((s, sign), xi) in cert.iter().zip(x) {
        a.set(s.clone(), xi * rational::rat(sign));
    }
    Ok(a)
}

/// Ψ = pr*ψ: a polynomial in the frame coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylFunction {
    pub space: ReducedConfigSpace,
    pub poly: Poly,
}

impl CylFunction {
    pub fn new(space: ReducedConfigSpace, poly: Poly) -> Result<CylFunction, CylError> {
        if poly.nvars() > space.dim() {
            return Err(CylError::VariableOutOfFrame { var: poly.nvars(), dim: space.dim() });
        }
        Ok(CylFunction { space, poly })
    }

    /// The d.o.f. κ of frame member `i`.
    pub fn coordinate(space: &ReducedConfigSpace, i: usize) -> CylFunction {
        CylFunction { space: space.clone(), poly: Poly::var(i) }
    }

    pub fn eval(&self, a: &FieldSample) -> Rational {
        self.poly.eval(&coordinate_map(&self.space, a))
    }

    fn with_poly(&self, poly: Poly) -> CylFunction {
        CylFunction { space: self.space.clone(), poly }
    }
}

/// Σ α_i φ̂_{S_i}, with faces merged and zero coefficients dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FluxCombo(BTreeMap<FaceId, Rational>);

impl FluxCombo {
    pub fn zero() -> FluxCombo {
        FluxCombo::default()
    }

    pub fn single(face: impl Into<FaceId>) -> FluxCombo {
        FluxCombo::from_terms([(Rational::one(), face.into())])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Rational, FaceId)>) -> FluxCombo {
        let mut map: BTreeMap<FaceId, Rational> = BTreeMap::new();
        for (a, f) in terms {
            *map.entry(f).or_insert_with(Rational::zero) += a;
        }
        map.retain(|_, a| !a.is_zero());
        FluxCombo(map)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FaceId, &Rational)> {
        self.0.iter()
    }

    pub fn coefficient(&self, face: &FaceId) -> Rational {
        self.0.get(face).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, other: &FluxCombo) -> FluxCombo {
        let merged = self.0.iter().chain(other.0.iter()).map(|(f, a)| (a.clone(), f.clone()));
        FluxCombo::from_terms(merged)
    }

    pub fn scale(&self, k: &Rational) -> FluxCombo {
        FluxCombo::from_terms(self.0.iter().map(|(f, a)| (a * k, f.clone())))
    }
}

impl fmt::Display for FluxCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> =
            self.0.iter().map(|(s, a)| format!("{}*{s}", rational::format_rational(a))).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// φ̂κ_c for each chain: Σ_i α_i ε(S_i, c).
pub fn epsilon_row<'a>(
    scene: &Scene,
    combo: &FluxCombo,
    chains: impl IntoIterator<Item = &'a Chain>,
) -> Result<Vec<Rational>, CylError> {
    chains
        .into_iter()
        .map(|c| {
            let mut total = Rational::zero();
            for (face, a) in combo.terms() {
                total += a * flux::epsilon_in(scene, face, c)?.to_rational();
            }
            Ok(total)
        })
        .collect()
}

pub fn flux_apply(scene: &Scene, face: &FaceId, psi: &CylFunction) -> Result<CylFunction, CylError> {
    combo_apply(scene, &FluxCombo::single(face.clone()), psi)
}

pub fn combo_apply(scene: &Scene, combo: &FluxCombo, psi: &CylFunction) -> Result<CylFunction, CylError> {
    if psi.space.frame.certificate().is_none() {
        return Err(CylError::UncertifiedFrame);
    }
    let dir = epsilon_row(scene, combo, psi.space.frame.chains())?;
    Ok(psi.with_poly(psi.poly.directional(&dir)))
}

/// An ordered basis of flux combinations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MomentumSpace {
    basis: Vec<FluxCombo>,
}

impl MomentumSpace {
    pub fn new(basis: Vec<FluxCombo>) -> MomentumSpace {
        MomentumSpace { basis }
    }

    pub fn basis(&self) -> &[FluxCombo] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Every face any basis element mentions, sorted.
    pub fn faces(&self) -> Vec<FaceId> {
        let mut fs: Vec<FaceId> = self.basis.iter().flat_map(|c| c.terms().map(|(f, _)| f.clone())).collect();
        fs.sort();
        fs.dedup();
        fs
    }

    /// ε-rows of the basis against `chains`.
    pub fn epsilon_matrix<'a>(
        &self,
        scene: &Scene,
        chains: impl IntoIterator<Item = &'a Chain> + Clone,
    ) -> Result<Matrix, CylError> {
        self.basis.iter().map(|c| epsilon_row(scene, c, chains.clone())).collect()
    }

    /// Independence as operators, judged on the probing hoops.
    pub fn is_independent_on(&self, scene: &Scene, probe: &[Chain]) -> Result<bool, CylError> {
        let m = self.epsilon_matrix(scene, probe.iter())?;
        Ok(linalg::rank(&m, probe.len()) == self.dim())
    }
}

/// Coordinates of each combo over a list of faces.
pub fn face_coordinates(combos: &[FluxCombo], faces: &[FaceId]) -> Matrix {
    combos.iter().map(|c| faces.iter().map(|f| c.coefficient(f)).collect()).collect()
}

/// x_I = Σ_{I'} n_{I I'} x'_{I'}: rows follow the coarse frame, columns the fine one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    pub rows: Vec<Vec<i64>>,
    pub fine_dim: usize,
}

impl Projection {
    pub fn identity(n: usize) -> Projection {
        Projection { rows: (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect(), fine_dim: n }
    }

    pub fn apply(&self, fine: &[Rational]) -> Vec<Rational> {
        self.rows
            .iter()
            .map(|row| row.iter().zip(fine).map(|(n, x)| rational::rat(*n) * x).sum())
            .collect()
    }

    /// `self ∘ inner`, where `inner` lands in the space `self` starts from.
    pub fn after(&self, inner: &Projection) -> Projection {
        Projection {
            rows: linalg::mat_mul_i64(&self.rows, &inner.rows, inner.rows.len(), inner.fine_dim),
            fine_dim: inner.fine_dim,
        }
    }
}

pub fn projection_between(
    scene: &Scene,
    finer: &ReducedConfigSpace,
    coarser: &ReducedConfigSpace,
) -> Result<Projection, CylError> {
    let fine = finer.frame.rebase(scene);
    if fine.certificate().is_none() {
        return Err(CylError::UncertifiedFrame);
    }
    let rows = coarser
        .frame
        .chains()
        .enumerate()
        .map(|(index, c)| {
            decompose_hoop(&scene.resolve_chain(c), &fine).map_err(|_| CylError::NotComparable { index })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Projection { rows, fine_dim: finer.dim() })
}

/// ψ ∘ pr: the same function written in the finer coordinates.
pub fn pullback(p: &Projection, psi: &CylFunction, finer: &ReducedConfigSpace) -> CylFunction {
    let subs: Vec<Poly> = p
        .rows
        .iter()
        .map(|row| Poly::linear(&row.iter().map(|n| rational::rat(*n)).collect::<Vec<_>>()))
        .collect();
    CylFunction { space: finer.clone(), poly: psi.poly.substitute(&subs) }
}

/// G_{JI} = φ̂_J κ_I with its exact determinant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GMatrix {
    pub entries: Matrix,
    pub determinant: Rational,
}

impl GMatrix {
    pub fn from_entries(entries: Matrix) -> GMatrix {
        let determinant = linalg::determinant(&entries);
        GMatrix { entries, determinant }
    }

    pub fn is_nondegenerate(&self) -> bool {
        !self.determinant.is_zero()
    }

    pub fn is_identity(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, row)| {
            row.iter().enumerate().all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() })
        })
    }
}

pub fn g_matrix(scene: &Scene, momenta: &MomentumSpace, frame: &HoopSet) -> Result<GMatrix, CylError> {
    if momenta.dim() != frame.len() {
        return Err(CylError::DimensionMismatch { momenta: momenta.dim(), frame: frame.len() });
    }
    Ok(GMatrix::from_entries(momenta.epsilon_matrix(scene, frame.chains())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hoop::Hoop;
    use crate::rational::{rat, ratio};
    use crate::substrate::{Crossing, End, Face, Loop, Side};

    const IN_ABOVE: Crossing = Crossing::Transversal { end: End::AtTarget, side: Side::Above };
    const OUT_BELOW: Crossing = Crossing::Transversal { end: End::AtSource, side: Side::Below };

    /// Two triangles sharing vertex o; S pierces the first at a/b, T the second at d/e.
    fn bowtie() -> (Scene, HoopSet) {
        let mut s = Scene::new();
        for (id, a, b) in [("a", "o", "p"), ("b", "p", "q"), ("c", "q", "o"), ("d", "o", "r"), ("e", "r", "t"), ("f", "t", "o")] {
            s.add_segment(id, a, b).unwrap();
        }
        s.add_face(Face::new("S").with("a", IN_ABOVE).with("b", OUT_BELOW)).unwrap();
        s.add_face(Face::new("T").with("e", IN_ABOVE)).unwrap();
        let l1 = Loop::parse(&s, "a b c").unwrap();
        let l2 = Loop::parse(&s, "d e f").unwrap();
        let frame = HoopSet::certify(vec![Hoop::from_loop("l1", &l1), Hoop::from_loop("l2", &l2)]).unwrap();
        (s, frame)
    }

    #[test]
    fn coordinates_and_preimages() {
        let (_, frame) = bowtie();
        let space = ReducedConfigSpace::hoops(frame);
        let a = FieldSample::new().with("a", rat(2)).with("b", rat(3)).with("e", ratio(1, 2));
        assert_eq!(coordinate_map(&space, &a), vec![rat(5), ratio(1, 2)]);
        assert_eq!(coordinate_map(&space, &FieldSample::new()), vec![rat(0), rat(0)]);
        let target = vec![ratio(-7, 3), rat(4)];
        let pre = preimage(&space, &target).unwrap();
        assert_eq!(coordinate_map(&space, &pre), target);
    }

    #[test]
    fn flux_is_a_constant_vector_field() {
        let (s, frame) = bowtie();
        let space = ReducedConfigSpace::hoops(frame);
        let psi = CylFunction::new(space.clone(), &Poly::var(0) * &Poly::var(1)).unwrap();
        // ε(S) = (1, 0), ε(T) = (0, 1/2)
        let out = flux_apply(&s, &"S".into(), &psi).unwrap();
        assert_eq!(out.poly, Poly::var(1));
        let out = flux_apply(&s, &"T".into(), &psi).unwrap();
        assert_eq!(out.poly, Poly::var(0).scale(&ratio(1, 2)));
        let c = CylFunction::new(space.clone(), Poly::constant(rat(9))).unwrap();
        assert!(flux_apply(&s, &"S".into(), &c).unwrap().poly.is_zero());

        let two = FluxCombo::from_terms([(rat(2), "S".into()), (rat(-2), "T".into())]);
        let split = FluxCombo::single("S").add(&FluxCombo::single("S")).add(&FluxCombo::single("T").scale(&rat(-2)));
        assert_eq!(two, split);
        assert_eq!(combo_apply(&s, &FluxCombo::zero(), &psi).unwrap().poly, Poly::zero());

        let uncertified = CylFunction::new(
            ReducedConfigSpace::hoops(HoopSet::uncertified(space.frame().hoops().to_vec())),
            Poly::var(0),
        )
        .unwrap();
        assert_eq!(flux_apply(&s, &"S".into(), &uncertified), Err(CylError::UncertifiedFrame));
    }

    #[test]
    fn projections_compose_and_pull_back() {
        let (s, frame) = bowtie();
        let fine = ReducedConfigSpace::hoops(frame.clone());
        let l1 = frame.hoops()[0].chain.clone();
        let l2 = frame.hoops()[1].chain.clone();
        let sum = HoopSet::certify(vec![Hoop::from_chain("l1+l2", &l1 + &l2)]).unwrap();
        let coarse = ReducedConfigSpace::hoops(sum);
        let p = projection_between(&s, &fine, &coarse).unwrap();
        assert_eq!(p.rows, vec![vec![1, 1]]);
        assert_eq!(projection_between(&s, &fine, &fine).unwrap(), Projection::identity(2));
        assert_eq!(p.after(&Projection::identity(2)), p);
        assert!(matches!(projection_between(&s, &coarse, &fine), Err(CylError::NotComparable { index: 0 })));

        let psi = CylFunction::new(coarse, Poly::var(0).pow(2)).unwrap();
        let pulled = pullback(&p, &psi, &fine);
        let a = FieldSample::new().with("a", rat(1)).with("f", rat(2));
        assert_eq!(pulled.eval(&a), psi.eval(&a));
        let lhs = flux_apply(&s, &"S".into(), &pulled).unwrap().poly;
        let rhs = pullback(&p, &flux_apply(&s, &"S".into(), &psi).unwrap(), &fine).poly;
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn g_matrix_detects_degeneracy() {
        let (s, frame) = bowtie();
        let m = MomentumSpace::new(vec![FluxCombo::single("S"), FluxCombo::single("T")]);
        let g = g_matrix(&s, &m, &frame).unwrap();
        assert_eq!(g.determinant, ratio(1, 2));
        assert!(g.is_nondegenerate());
        let dup = MomentumSpace::new(vec![FluxCombo::single("S"), FluxCombo::single("S")]);
        assert!(!g_matrix(&s, &dup, &frame).unwrap().is_nondegenerate());
        let short = MomentumSpace::new(vec![FluxCombo::single("S")]);
        assert_eq!(g_matrix(&s, &short, &frame), Err(CylError::DimensionMismatch { momenta: 1, frame: 2 }));
        assert!(m.is_independent_on(&s, &frame.chains().cloned().collect::<Vec<_>>()).unwrap());
    }
}
