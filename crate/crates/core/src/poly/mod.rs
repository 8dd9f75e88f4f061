//! Sparse multivariate polynomials with exact coefficients.
//!
//! [`Polynomial`] is generic over the variable type and the coefficient
//! [`Ring`]; the engine mostly works with [`crate::Poly`] (SEM indeterminates,
//! rational coefficients) and [`crate::SymbolicPoly`] (coefficients that are
//! themselves polynomials in criterion weights and utility coefficients).

mod monomial;
mod ring;
mod symbol;
mod text;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use thiserror::Error;

pub use monomial::Monomial;
pub use ring::{parse_decimal, rational_from_decimal, Ring};
pub use symbol::{Indeterminate, UtilitySymbol, Variable, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("replacement for `{0}` contains `{0}`")]
    SelfReference(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("cannot parse polynomial term `{0}`")]
    Parse(String),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polynomial<V, C> {
    terms: BTreeMap<Monomial<V>, C>,
}

impl<V: Variable, C: Ring> Default for Polynomial<V, C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<V: Variable, C: Ring> Polynomial<V, C> {
    pub fn zero() -> Self {
        Polynomial { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn var(v: V) -> Self {
        Self::term(Monomial::var(v), C::one())
    }

    pub fn term(m: Monomial<V>, c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { terms }
    }

    /// Sums the given terms, merging equal monomials.
    pub fn from_terms<I: IntoIterator<Item = (Monomial<V>, C)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial<V>, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(slot) => {
                let sum = std::mem::replace(slot, C::zero()) + c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *slot = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in descending graded-lex order (the canonical output order).
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial<V>, &C)> + ExactSizeIterator {
        self.terms.iter().rev()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial<V>> {
        self.terms.keys().rev()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial<V>, C)> {
        self.terms.into_iter().rev()
    }

    pub fn coefficient(&self, m: &Monomial<V>) -> Option<&C> {
        self.terms.get(m)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().next_back().map_or(0, |m| m.degree())
    }

    pub fn variables(&self) -> BTreeSet<V> {
        self.terms.keys().flat_map(|m| m.variables().cloned()).collect()
    }

    pub fn contains_var(&self, v: &V) -> bool {
        self.terms.keys().any(|m| m.contains(v))
    }

    /// Highest exponent of `v` over all terms.
    pub fn degree_in(&self, v: &V) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, a)| (m.clone(), a.clone() * c.clone())))
    }

    pub fn mul_monomial(&self, m: &Monomial<V>, c: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(n, a)| (n.mul(m), a.clone() * c.clone())))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Replaces every `target^k` by `replacement^k`.
    pub fn substitute(&self, target: &V, replacement: &Self) -> Result<Self, PolyError> {
        if replacement.contains_var(target) {
            return Err(PolyError::SelfReference(target.to_string()));
        }
        let mut powers: Vec<Self> = vec![Self::one()];
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let (rest, k) = m.without(target);
            if k == 0 {
                out.add_term(rest, c.clone());
                continue;
            }
            while powers.len() <= k as usize {
                let next = &powers[powers.len() - 1] * replacement;
                powers.push(next);
            }
            for (pm, pc) in &powers[k as usize].terms {
                out.add_term(rest.mul(pm), c.clone() * pc.clone());
            }
        }
        Ok(out)
    }

    pub fn map_coefficients<D: Ring, F: Fn(&C) -> D>(&self, f: F) -> Polynomial<V, D> {
        Polynomial::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    pub fn map_variables<W: Variable, F: Fn(&V) -> W>(&self, f: F) -> Polynomial<W, C> {
        Polynomial::from_terms(self.terms.iter().map(|(m, c)| (m.map_variables(&f), c.clone())))
    }

    /// Evaluates in any ring `T`, given values for variables and an embedding of coefficients.
    pub fn evaluate<T, FV, FC>(&self, var: FV, coef: FC) -> T
    where
        T: Ring,
        FV: Fn(&V) -> T,
        FC: Fn(&C) -> T,
    {
        let mut acc = T::zero();
        for (m, c) in &self.terms {
            let mut t = coef(c);
            for (v, e) in m.factors() {
                t = t * var(v).pow_u32(*e);
            }
            acc = acc + t;
        }
        acc
    }
}

impl<V: Variable, C: Ring> Zero for Polynomial<V, C> {
    fn zero() -> Self {
        Polynomial::zero()
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<V: Variable, C: Ring> One for Polynomial<V, C> {
    fn one() -> Self {
        Polynomial::one()
    }
}

impl<V: Variable, C: Ring> Add for &Polynomial<V, C> {
    type Output = Polynomial<V, C>;

    fn add(self, rhs: Self) -> Polynomial<V, C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<V: Variable, C: Ring> Add for Polynomial<V, C> {
    type Output = Polynomial<V, C>;

    fn add(mut self, rhs: Self) -> Polynomial<V, C> {
        if self.terms.len() < rhs.terms.len() {
            return rhs + self;
        }
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl<V: Variable, C: Ring> Neg for Polynomial<V, C> {
    type Output = Polynomial<V, C>;

    fn neg(self) -> Polynomial<V, C> {
        Polynomial { terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect() }
    }
}

impl<V: Variable, C: Ring> Sub for &Polynomial<V, C> {
    type Output = Polynomial<V, C>;

    fn sub(self, rhs: Self) -> Polynomial<V, C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<V: Variable, C: Ring> Sub for Polynomial<V, C> {
    type Output = Polynomial<V, C>;

    fn sub(self, rhs: Self) -> Polynomial<V, C> {
        &self - &rhs
    }
}

impl<V: Variable, C: Ring> Mul for &Polynomial<V, C> {
    type Output = Polynomial<V, C>;

    fn mul(self, rhs: Self) -> Polynomial<V, C> {
        let mut out = Polynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<V: Variable, C: Ring> Mul for Polynomial<V, C> {
    type Output = Polynomial<V, C>;

    fn mul(self, rhs: Self) -> Polynomial<V, C> {
        &self * &rhs
    }
}

impl<V: Variable, C: Ring> Ring for Polynomial<V, C> {
    fn from_count(n: u64) -> Self {
        Polynomial::constant(C::from_count(n))
    }

    fn pow_u32(&self, exp: u32) -> Self {
        self.pow(exp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Poly, Rational};

    fn p(s: &str) -> Poly {
        s.parse().unwrap()
    }

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn add_cancels_and_merges() {
        let x = Poly::var(Indeterminate::intercept(1));
        let a = &x + &Poly::constant(q(1));
        let b = &(-x) + &Poly::constant(q(2));
        assert_eq!(&a + &b, Poly::constant(q(3)));
        assert_eq!(&a + &Poly::zero(), a);
        assert_eq!(&p("t01 + t12") + &p("t12"), p("t01 + 2 * t12"));
    }

    #[test]
    fn mul_identities() {
        let a = p("t04' + t01' * t14");
        assert_eq!(&a * &Poly::one(), a);
        assert!((&a * &Poly::zero()).is_zero());
        assert_eq!(&a * &a, p("t04'^2 + t01'^2 * t14^2 + 2 * t01' * t14 * t04'"));
    }

    #[test]
    fn pow_binomial() {
        assert_eq!(p("t01 + t12").pow(0), Poly::one());
        assert_eq!(p("t01 + t12").pow(2), p("t01^2 + 2 * t01 * t12 + t12^2"));
    }

    #[test]
    fn substitute_replaces_powers() {
        let before = p("t23 * y2");
        let after = before.substitute(&Indeterminate::placeholder(2), &p("t02' + t12 * y1")).unwrap();
        assert_eq!(after, p("t23 * t02' + t23 * t12 * y1"));
        let sq = p("y1^2 + 3").substitute(&Indeterminate::placeholder(1), &p("t01 + e1")).unwrap();
        assert_eq!(sq, p("t01^2 + 2 * t01 * e1 + e1^2 + 3"));
    }

    #[test]
    fn substitute_absent_is_noop() {
        let a = p("t01 * t12 + psi1");
        assert_eq!(a.substitute(&Indeterminate::placeholder(3), &p("t03")).unwrap(), a);
    }

    #[test]
    fn self_reference_rejected() {
        let err = p("y1").substitute(&Indeterminate::placeholder(1), &p("y1 + t01")).unwrap_err();
        assert_eq!(err, PolyError::SelfReference("y1".into()));
    }

    #[test]
    fn generic_evaluation() {
        let a = p("2 * t01^2 * t12 + 1/2");
        let val: f64 = a.evaluate(
            |v| if *v == Indeterminate::intercept(1) { 3.0 } else { 0.5 },
            |c| num_traits::ToPrimitive::to_f64(c).unwrap(),
        );
        assert_eq!(val, 2.0 * 9.0 * 0.5 + 0.5);
    }

    #[test]
    fn nested_coefficients() {
        type Coef = Polynomial<UtilitySymbol, Rational>;
        let k: Coef = Coef::var("k1".parse().unwrap());
        let x: Polynomial<Indeterminate, Coef> = Polynomial::term(Monomial::var(Indeterminate::intercept(1)), k);
        let sq = x.pow(2);
        assert_eq!(sq.to_string(), "k1^2 * t01^2");
        let two = Polynomial::<Indeterminate, Coef>::from_count(2);
        assert_eq!((&sq + &two).to_string(), "k1^2 * t01^2 + 2");
    }
}
