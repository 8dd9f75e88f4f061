//! Named indeterminates: SEM parameters and utility constants.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PolyError;

/// Anything usable as a polynomial variable. Ordering defines the monomial order.
pub trait Variable: Clone + Ord + fmt::Debug + fmt::Display + Send + Sync {}

impl<T: Clone + Ord + fmt::Debug + fmt::Display + Send + Sync> Variable for T {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A parameter indeterminate of a structural equation model.
///
/// Variant order is the kind rank; derived `Ord` then compares vertex and
/// parent (or term index), giving the canonical total order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Indeterminate {
    /// θ0i
    Intercept(VertexId),
    /// θji for the edge parent → child
    Edge { child: VertexId, parent: VertexId },
    /// θ_{i a} of a polynomial structural equation with a non-linear exponent vector
    Coefficient { vertex: VertexId, term: u32 },
    /// εi
    Error(VertexId),
    /// ψi
    Variance(VertexId),
    /// θ'0i = θ0i + εi
    AugmentedIntercept(VertexId),
    /// Unsubstituted variable Yi; never present in a finished CEU.
    Placeholder(VertexId),
}

impl Indeterminate {
    pub fn edge(parent: u32, child: u32) -> Self {
        Indeterminate::Edge { child: VertexId(child), parent: VertexId(parent) }
    }

    pub fn intercept(v: u32) -> Self {
        Indeterminate::Intercept(VertexId(v))
    }

    pub fn augmented(v: u32) -> Self {
        Indeterminate::AugmentedIntercept(VertexId(v))
    }

    pub fn error(v: u32) -> Self {
        Indeterminate::Error(VertexId(v))
    }

    pub fn variance(v: u32) -> Self {
        Indeterminate::Variance(VertexId(v))
    }

    pub fn placeholder(v: u32) -> Self {
        Indeterminate::Placeholder(VertexId(v))
    }

    /// The vertex whose panel owns this indeterminate (the child, for edges).
    pub fn vertex(&self) -> VertexId {
        match *self {
            Indeterminate::Intercept(v)
            | Indeterminate::Error(v)
            | Indeterminate::Variance(v)
            | Indeterminate::AugmentedIntercept(v)
            | Indeterminate::Placeholder(v) => v,
            Indeterminate::Edge { child, .. } => child,
            Indeterminate::Coefficient { vertex, .. } => vertex,
        }
    }

    pub fn parent(&self) -> Option<VertexId> {
        match *self {
            Indeterminate::Edge { parent, .. } => Some(parent),
            _ => None,
        }
    }

    /// Random model parameters (as opposed to errors, θ' and placeholders).
    pub fn is_parameter(&self) -> bool {
        matches!(
            self,
            Indeterminate::Intercept(_)
                | Indeterminate::Edge { .. }
                | Indeterminate::Coefficient { .. }
                | Indeterminate::Variance(_)
        )
    }
}

fn join_ids(f: &mut fmt::Formatter<'_>, prefix: &str, ids: &[u32]) -> fmt::Result {
    f.write_str(prefix)?;
    if ids.iter().all(|&i| i < 10) {
        for i in ids {
            write!(f, "{i}")?;
        }
    } else {
        for (n, i) in ids.iter().enumerate() {
            if n > 0 {
                f.write_str("_")?;
            }
            write!(f, "{i}")?;
        }
    }
    Ok(())
}

impl fmt::Display for Indeterminate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Indeterminate::Intercept(v) => write!(f, "t0{v}"),
            Indeterminate::Edge { child, parent } => join_ids(f, "t", &[parent.0, child.0]),
            Indeterminate::Coefficient { vertex, term } => write!(f, "a{vertex}_{term}"),
            Indeterminate::Error(v) => write!(f, "e{v}"),
            Indeterminate::Variance(v) => write!(f, "psi{v}"),
            Indeterminate::AugmentedIntercept(v) => write!(f, "t0{v}'"),
            Indeterminate::Placeholder(v) => write!(f, "y{v}"),
        }
    }
}

fn parse_id(text: &str) -> Option<u32> {
    if text.is_empty() || !text.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    text.parse().ok().filter(|&v| v > 0)
}

/// Splits `12` into `[1, 2]`, or `1_12` into `[1, 12]`.
fn parse_id_list(text: &str) -> Option<Vec<u32>> {
    if text.contains('_') {
        text.split('_').map(parse_id).collect()
    } else {
        text.chars().map(|c| parse_id(&c.to_string())).collect()
    }
}

impl FromStr for Indeterminate {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PolyError::UnknownSymbol(s.to_string());
        if let Some(rest) = s.strip_prefix("psi") {
            return parse_id(rest).map(|v| Indeterminate::variance(v)).ok_or_else(bad);
        }
        if let Some(rest) = s.strip_prefix('e') {
            return parse_id(rest).map(Indeterminate::error).ok_or_else(bad);
        }
        if let Some(rest) = s.strip_prefix('y') {
            return parse_id(rest).map(Indeterminate::placeholder).ok_or_else(bad);
        }
        if let Some(rest) = s.strip_prefix('a') {
            let (v, t) = rest.split_once('_').ok_or_else(bad)?;
            let vertex = parse_id(v).ok_or_else(bad)?;
            let term: u32 = t.parse().map_err(|_| bad())?;
            return Ok(Indeterminate::Coefficient { vertex: VertexId(vertex), term });
        }
        if let Some(rest) = s.strip_prefix("t0") {
            if let Some(v) = rest.strip_suffix('\'') {
                return parse_id(v).map(Indeterminate::augmented).ok_or_else(bad);
            }
            return parse_id(rest).map(Indeterminate::intercept).ok_or_else(bad);
        }
        if let Some(rest) = s.strip_prefix('t') {
            let ids = parse_id_list(rest).ok_or_else(bad)?;
            return match ids.as_slice() {
                [p, c] => Ok(Indeterminate::edge(*p, *c)),
                _ => Err(bad()),
            };
        }
        Err(bad())
    }
}

/// Per-policy utility constants that appear in the symbolic master CEU.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UtilitySymbol {
    /// Criterion weight k_I, I sorted ascending.
    Weight(Vec<VertexId>),
    /// Marginal utility coefficient ρ_ij of y_i^j.
    Rho { vertex: VertexId, degree: u32 },
}

impl fmt::Display for UtilitySymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UtilitySymbol::Weight(set) => {
                let ids: Vec<u32> = set.iter().map(|v| v.0).collect();
                join_ids(f, "k", &ids)
            }
            UtilitySymbol::Rho { vertex, degree } => join_ids(f, "rho", &[vertex.0, *degree]),
        }
    }
}

impl FromStr for UtilitySymbol {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PolyError::UnknownSymbol(s.to_string());
        if let Some(rest) = s.strip_prefix("rho") {
            let ids = parse_id_list(rest).ok_or_else(bad)?;
            return match ids.as_slice() {
                [v, j] => Ok(UtilitySymbol::Rho { vertex: VertexId(*v), degree: *j }),
                _ => Err(bad()),
            };
        }
        if let Some(rest) = s.strip_prefix('k') {
            let mut ids = parse_id_list(rest).ok_or_else(bad)?;
            let n = ids.len();
            ids.sort_unstable();
            ids.dedup();
            if ids.is_empty() || ids.len() != n {
                return Err(bad());
            }
            return Ok(UtilitySymbol::Weight(ids.into_iter().map(VertexId).collect()));
        }
        Err(bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_follow_reference_code() {
        assert_eq!(Indeterminate::intercept(1).to_string(), "t01");
        assert_eq!(Indeterminate::edge(2, 3).to_string(), "t23");
        assert_eq!(Indeterminate::edge(2, 13).to_string(), "t2_13");
        assert_eq!(Indeterminate::variance(4).to_string(), "psi4");
        assert_eq!(Indeterminate::augmented(2).to_string(), "t02'");
        assert_eq!(UtilitySymbol::Weight(vec![VertexId(1), VertexId(3), VertexId(4)]).to_string(), "k134");
        assert_eq!(UtilitySymbol::Rho { vertex: VertexId(3), degree: 2 }.to_string(), "rho32");
    }

    #[test]
    fn names_parse_back() {
        for s in ["t01", "t012", "t14", "t2_13", "e3", "psi12", "t04'", "y2", "a3_1"] {
            let v: Indeterminate = s.parse().unwrap();
            assert_eq!(v.to_string(), s);
        }
        for s in ["k1", "k1234", "k1_12", "rho11", "rho12_2"] {
            let v: UtilitySymbol = s.parse().unwrap();
            assert_eq!(v.to_string(), s);
        }
        assert!("t1".parse::<Indeterminate>().is_err());
        assert!("t00".parse::<Indeterminate>().is_err());
        assert!("q1".parse::<Indeterminate>().is_err());
        assert!("k11".parse::<UtilitySymbol>().is_err());
    }

    #[test]
    fn kind_rank_then_vertex_then_parent() {
        let mut v = vec![
            Indeterminate::variance(1),
            Indeterminate::edge(2, 3),
            Indeterminate::edge(1, 3),
            Indeterminate::edge(1, 2),
            Indeterminate::intercept(4),
            Indeterminate::intercept(1),
            Indeterminate::error(1),
        ];
        v.sort();
        let names: Vec<String> = v.iter().map(|s| s.to_string()).collect();
        assert_eq!(names, ["t01", "t04", "t12", "t13", "t23", "e1", "psi1"]);
    }
}
