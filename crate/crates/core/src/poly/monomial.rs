use std::cmp::Ordering;
use std::fmt;

use super::Variable;

/// Power product of variables, stored sparsely and sorted by variable.
///
/// Ordered graded-lexicographically: total degree first, then the exponent of
/// the smallest variable, and so on.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial<V> {
    factors: Vec<(V, u32)>,
    degree: u32,
}

impl<V: Variable> Monomial<V> {
    pub fn one() -> Self {
        Monomial { factors: Vec::new(), degree: 0 }
    }

    pub fn var(v: V) -> Self {
        Self::power(v, 1)
    }

    pub fn power(v: V, exp: u32) -> Self {
        if exp == 0 {
            return Self::one();
        }
        Monomial { factors: vec![(v, exp)], degree: exp }
    }

    /// Builds a monomial from arbitrary (variable, exponent) pairs, merging repeats.
    pub fn from_factors<I: IntoIterator<Item = (V, u32)>>(factors: I) -> Self {
        let mut raw: Vec<(V, u32)> = factors.into_iter().filter(|(_, e)| *e > 0).collect();
        raw.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(V, u32)> = Vec::with_capacity(raw.len());
        for (v, e) in raw {
            match merged.last_mut() {
                Some((last, acc)) if *last == v => *acc += e,
                _ => merged.push((v, e)),
            }
        }
        let degree = merged.iter().map(|(_, e)| e).sum();
        Monomial { factors: merged, degree }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn factors(&self) -> &[(V, u32)] {
        &self.factors
    }

    pub fn variables(&self) -> impl Iterator<Item = &V> {
        self.factors.iter().map(|(v, _)| v)
    }

    pub fn exponent(&self, v: &V) -> u32 {
        self.factors
            .binary_search_by(|(w, _)| w.cmp(v))
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    pub fn contains(&self, v: &V) -> bool {
        self.exponent(v) > 0
    }

    /// True when no exponent exceeds one.
    pub fn is_square_free(&self) -> bool {
        self.factors.iter().all(|(_, e)| *e == 1)
    }

    /// Removes `v`, returning the remaining monomial and the exponent removed.
    pub fn without(&self, v: &V) -> (Self, u32) {
        match self.factors.binary_search_by(|(w, _)| w.cmp(v)) {
            Ok(i) => {
                let mut factors = self.factors.clone();
                let (_, e) = factors.remove(i);
                (Monomial { factors, degree: self.degree - e }, e)
            }
            Err(_) => (self.clone(), 0),
        }
    }

    /// Splits into the factors that satisfy `pred` and those that do not.
    pub fn partition<F: Fn(&V) -> bool>(&self, pred: F) -> (Self, Self) {
        let (yes, no): (Vec<_>, Vec<_>) = self.factors.iter().cloned().partition(|(v, _)| pred(v));
        (Self::from_sorted(yes), Self::from_sorted(no))
    }

    fn from_sorted(factors: Vec<(V, u32)>) -> Self {
        let degree = factors.iter().map(|(_, e)| e).sum();
        Monomial { factors, degree }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            let (a, ea) = &self.factors[i];
            let (b, eb) = &other.factors[j];
            match a.cmp(b) {
                Ordering::Less => {
                    out.push((a.clone(), *ea));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b.clone(), *eb));
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a.clone(), ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.factors[i..]);
        out.extend_from_slice(&other.factors[j..]);
        Monomial { factors: out, degree: self.degree + other.degree }
    }

    pub fn pow(&self, exp: u32) -> Self {
        if exp == 0 {
            return Self::one();
        }
        Monomial {
            factors: self.factors.iter().map(|(v, e)| (v.clone(), e * exp)).collect(),
            degree: self.degree * exp,
        }
    }

    /// `self` divides `other`.
    pub fn divides(&self, other: &Self) -> bool {
        self.factors.iter().all(|(v, e)| other.exponent(v) >= *e)
    }

    /// Maps variables through `f`; the result is re-sorted and merged.
    pub fn map_variables<W: Variable, F: Fn(&V) -> W>(&self, f: F) -> Monomial<W> {
        Monomial::from_factors(self.factors.iter().map(|(v, e)| (f(v), *e)))
    }
}

impl<V: Variable> PartialOrd for Monomial<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<V: Variable> Ord for Monomial<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree.cmp(&other.degree).then_with(|| {
            for (a, b) in self.factors.iter().zip(other.factors.iter()) {
                let ord = match a.0.cmp(&b.0) {
                    // The monomial holding the smaller variable has the larger
                    // exponent at that position.
                    Ordering::Less => Ordering::Greater,
                    Ordering::Greater => Ordering::Less,
                    Ordering::Equal => a.1.cmp(&b.1),
                };
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            self.factors.len().cmp(&other.factors.len())
        })
    }
}

impl<V: Variable> fmt::Display for Monomial<V> {
    /// `t01^2 * t12`; the empty monomial prints as `1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (n, (v, e)) in self.factors.iter().enumerate() {
            if n > 0 {
                f.write_str(" * ")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

impl<V: Variable> serde::Serialize for Monomial<V> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
