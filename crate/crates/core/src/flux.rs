//! Signed face–loop intersection numbers.
//!
//! Two independent routes compute ε(S, l):
//!
//! * [`epsilon_loop`] walks the loop step by step and tallies the four
//!   crossing counts t⁺, s⁺, t⁻, s⁻;
//! * [`epsilon_hoop`] works on the chain alone, weighting each segment's
//!   coefficient by its crossing record.
//!
//! Their agreement on every representative of a hoop is the statement that
//! ε is well defined on hoops; the test suite checks it on randomized
//! rewrites.

use thiserror::Error;

use crate::hoop::{chain_of, Chain};
use crate::rational::HalfInt;
use crate::substrate::{Crossing, End, Face, FaceId, Loop, Path, Scene, Side, SubstrateError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FluxError {
    /// None of the offered loops pierces the face; this does not show the
    /// face is invalid, only that it was not proven valid.
    #[error("no witness loop with nonzero ε for face `{0}`")]
    NoWitness(FaceId),
}

/// Per-occurrence tallies of transversal steps along a path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CrossingCounts {
    /// end on the face, rest above
    pub t_plus: u64,
    /// start on the face, rest above
    pub s_plus: u64,
    /// end on the face, rest below
    pub t_minus: u64,
    /// start on the face, rest below
    pub s_minus: u64,
}

impl CrossingCounts {
    pub fn of(face: &Face, path: &Path) -> CrossingCounts {
        let mut n = CrossingCounts::default();
        for step in path.steps() {
            if let Crossing::Transversal { end, side } = face.crossing(&step.segment).along(step.direction) {
                match (end, side) {
                    (End::AtTarget, Side::Above) => n.t_plus += 1,
                    (End::AtSource, Side::Above) => n.s_plus += 1,
                    (End::AtTarget, Side::Below) => n.t_minus += 1,
                    (End::AtSource, Side::Below) => n.s_minus += 1,
                }
            }
        }
        n
    }

    /// ½(t⁺ − s⁺ − (t⁻ − s⁻)).
    pub fn epsilon(&self) -> HalfInt {
        let twice = self.t_plus as i64 - self.s_plus as i64 - (self.t_minus as i64 - self.s_minus as i64);
        HalfInt::from_twice(twice)
    }
}

pub fn epsilon_loop(face: &Face, l: &Loop) -> HalfInt {
    CrossingCounts::of(face, l.path()).epsilon()
}

/// ε computed from chain coefficients alone.
pub fn epsilon_hoop(face: &Face, c: &Chain) -> HalfInt {
    HalfInt::from_twice(c.iter().map(|(s, k)| k * face.crossing(s).weight()).sum())
}

/// The integer n − m of an edge: transversal pieces that start on the face
/// below or end on it above, minus the other two kinds.
///
/// A full piercing contributes ±2 here and ±1 to ε of any loop through it.
pub fn epsilon_edge(face: &Face, e: &Path) -> i64 {
    e.steps().iter().map(|s| face.crossing(&s.segment).along(s.direction).weight()).sum()
}

/// ε against a face named in `scene`, with `c` brought up to date with the
/// scene's refinements first.
pub fn epsilon_in(scene: &Scene, face: &FaceId, c: &Chain) -> Result<HalfInt, SubstrateError> {
    Ok(epsilon_hoop(scene.face(face)?, &scene.resolve_chain(c)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceWitness {
    pub index: usize,
    pub epsilon: HalfInt,
}

/// First non-trivial loop in `witnesses` with ε(S, l) ≠ 0.
pub fn face_validity(face: &Face, witnesses: &[Loop]) -> Result<FaceWitness, FluxError> {
    witnesses
        .iter()
        .enumerate()
        .filter(|(_, l)| !chain_of(l.path()).is_empty())
        .map(|(index, l)| FaceWitness { index, epsilon: epsilon_loop(face, l) })
        .find(|w| !w.epsilon.is_zero())
        .ok_or_else(|| FluxError::NoWitness(face.id.clone()))
}
