//! Torus maps as finite compositions of generators.

use crate::generator::Generator;
use crate::geometry::{Mat2, Point2};

/// `chain[0] ∘ chain[1] ∘ … ∘ chain[n-1]`: the last generator is applied first.
///
/// Evaluation goes through the lift on R², so integer displacements
/// accumulated by translations are preserved. An empty chain is the identity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TorusMap {
    chain: Vec<Generator>,
}

impl TorusMap {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn new(chain: Vec<Generator>) -> Self {
        Self { chain }
    }

    pub fn from_generator(g: Generator) -> Self {
        Self { chain: vec![g] }
    }

    pub fn chain(&self) -> &[Generator] {
        &self.chain
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    pub fn lift(&self, p: Point2) -> Point2 {
        self.chain.iter().rev().fold(p, |acc, g| g.apply(acc))
    }

    /// `lift(p) - p`
    pub fn displacement(&self, p: Point2) -> Point2 {
        self.lift(p) - p
    }

    pub fn jacobian(&self, p: Point2) -> Mat2 {
        self.lift_with_jacobian(p).1
    }

    /// Image and chain-rule Jacobian in one pass.
    pub fn lift_with_jacobian(&self, p: Point2) -> (Point2, Mat2) {
        self.chain
            .iter()
            .rev()
            .fold((p, Mat2::IDENTITY), |(x, jac), g| {
                let (y, dg) = g.apply_with_jacobian(x);
                (y, dg * jac)
            })
    }

    /// `self ∘ inner`
    pub fn compose(&self, inner: &TorusMap) -> TorusMap {
        let mut chain = Vec::with_capacity(self.len() + inner.len());
        chain.extend_from_slice(&self.chain);
        chain.extend_from_slice(&inner.chain);
        TorusMap { chain }
    }

    /// `g ∘ self`, i.e. apply `g` after this map.
    pub fn then(&self, g: Generator) -> TorusMap {
        let mut chain = Vec::with_capacity(self.len() + 1);
        chain.push(g);
        chain.extend_from_slice(&self.chain);
        TorusMap { chain }
    }

    /// q-fold self composition. `iterate(0)` is the identity.
    pub fn iterate(&self, q: usize) -> TorusMap {
        let mut chain = Vec::with_capacity(self.len() * q);
        for _ in 0..q {
            chain.extend_from_slice(&self.chain);
        }
        TorusMap { chain }
    }

    pub fn inverse(&self) -> TorusMap {
        TorusMap {
            chain: self.chain.iter().rev().map(Generator::inverse).collect(),
        }
    }

    /// Apply the lift `q` times by repeated forward evaluation.
    pub fn lift_iterated(&self, p: Point2, q: usize) -> Point2 {
        (0..q).fold(p, |acc, _| self.lift(acc))
    }

    /// Whether every generator is the identity near `p`, so the whole chain is.
    pub fn fixes_neighbourhood_of(&self, p: Point2) -> bool {
        self.chain.iter().rev().all(|g| g.fixes_neighbourhood_of(p))
    }
}

impl From<Generator> for TorusMap {
    fn from(g: Generator) -> Self {
        TorusMap::from_generator(g)
    }
}

impl FromIterator<Generator> for TorusMap {
    fn from_iter<I: IntoIterator<Item = Generator>>(iter: I) -> Self {
        TorusMap::new(iter.into_iter().collect())
    }
}
