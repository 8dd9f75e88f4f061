//! Canonical text form: `2 * t01 * t04 * t14 + t01^2`.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;

use super::{parse_decimal, Monomial, PolyError, Polynomial, Ring, Variable};

impl<V: Variable, C: Ring + fmt::Display> fmt::Display for Polynomial<V, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (m, c)) in self.terms().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write_term(f, m, c)?;
        }
        Ok(())
    }
}

fn write_term<V: Variable, C: Ring + fmt::Display>(
    f: &mut fmt::Formatter<'_>,
    m: &Monomial<V>,
    c: &C,
) -> fmt::Result {
    let coef = c.to_string();
    let coef = if coef.contains(" + ") { format!("({coef})") } else { coef };
    if m.is_one() {
        return f.write_str(&coef);
    }
    if *c != C::one() {
        write!(f, "{coef} * ")?;
    }
    write!(f, "{m}")
}

impl<V> FromStr for Polynomial<V, BigRational>
where
    V: Variable + FromStr<Err = PolyError>,
{
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "0" {
            return Ok(Polynomial::zero());
        }
        let s = s.replace(" - ", " + -");
        let mut out = Polynomial::zero();
        for term in s.split(" + ") {
            let (m, c) = parse_term::<V>(term)?;
            out.add_term(m, c);
        }
        Ok(out)
    }
}

/// Parses `coeff * sym^e * ...`; numeric factors may appear anywhere.
pub(crate) fn parse_term<V>(term: &str) -> Result<(Monomial<V>, BigRational), PolyError>
where
    V: Variable + FromStr<Err = PolyError>,
{
    let term = term.trim();
    if term.is_empty() {
        return Err(PolyError::Parse(term.to_string()));
    }
    let mut coef = BigRational::from_count(1);
    let mut factors = Vec::new();
    for factor in term.split('*').map(str::trim) {
        if factor.is_empty() {
            return Err(PolyError::Parse(term.to_string()));
        }
        let starts_numeric = factor.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '.');
        if starts_numeric {
            let value = parse_decimal(factor).ok_or_else(|| PolyError::Parse(term.to_string()))?;
            coef = coef * value;
            continue;
        }
        let (name, exp) = match factor.split_once('^') {
            Some((name, e)) => (name, e.parse::<u32>().map_err(|_| PolyError::Parse(term.to_string()))?),
            None => (factor, 1),
        };
        factors.push((name.parse::<V>()?, exp));
    }
    Ok((Monomial::from_factors(factors), coef))
}
