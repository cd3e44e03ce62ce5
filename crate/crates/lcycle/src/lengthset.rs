//! Admissible cycle-length sets L ⊆ {3, 4, …} and the generating function
//! λ_L(z) = Σ_{ℓ∈L} z^ℓ/(2ℓ) evaluated inside the unit disk.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{domain, parse_err, Error, Result};

/// Hard cap on termwise summation, so `lambda` stays total even for radii
/// extremely close to 1 (the tail bound would otherwise demand astronomically
/// many terms).
const MAX_TERMS: u64 = 50_000_000;

/// Symbolic description of a set of admissible cycle lengths.
///
/// Every member is ≥ 3. `Complement` is taken relative to {3, 4, …}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LengthSet {
    /// Finite list, strictly increasing, all members ≥ 3. May be empty.
    Finite(Vec<u64>),
    /// All lengths ≥ `min` (with `min` ≥ 3).
    AllAtLeast(u64),
    /// Lengths ℓ ≥ `min` with ℓ ≡ `a` (mod `m`), `m` ≥ 2, `min` ≥ 3.
    Residue { a: u64, m: u64, min: u64 },
    /// Complement of `inner` within {3, 4, …}.
    Complement(Box<LengthSet>),
}

impl LengthSet {
    /// The empty set (λ ≡ 0, so X ≡ 0).
    pub fn empty() -> Self {
        LengthSet::Finite(Vec::new())
    }

    /// All lengths ≥ 3.
    pub fn all() -> Self {
        LengthSet::AllAtLeast(3)
    }

    /// Finite set; values are sorted and deduplicated. Errors if any value < 3.
    pub fn finite(mut values: Vec<u64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|&&v| v < 3) {
            return Err(domain(format!("cycle length {bad} < 3 in finite set")));
        }
        values.sort_unstable();
        values.dedup();
        Ok(LengthSet::Finite(values))
    }

    /// All lengths ≥ `min`; errors if `min` < 3.
    pub fn all_at_least(min: u64) -> Result<Self> {
        if min < 3 {
            return Err(domain(format!("minimum length {min} < 3")));
        }
        Ok(LengthSet::AllAtLeast(min))
    }

    /// Residue class a (mod m) restricted to lengths ≥ `min`.
    pub fn residue(a: u64, m: u64, min: u64) -> Result<Self> {
        if m < 2 {
            return Err(domain(format!("residue modulus {m} < 2")));
        }
        if min < 3 {
            return Err(domain(format!("minimum length {min} < 3")));
        }
        Ok(LengthSet::Residue { a: a % m, m, min })
    }

    /// Complement within {3, 4, …}. Double complements simplify away.
    pub fn complement(inner: LengthSet) -> Self {
        match inner {
            LengthSet::Complement(x) => *x,
            other => LengthSet::Complement(Box::new(other)),
        }
    }

    /// Complement of `self` (convenience for λ_{Lᶜ} = λ_all − λ_L).
    pub fn complemented(&self) -> Self {
        Self::complement(self.clone())
    }

    /// Membership test. Total for all ℓ ≥ 3; ℓ < 3 is a domain error.
    pub fn contains(&self, l: u64) -> Result<bool> {
        if l < 3 {
            return Err(domain(format!("cycle length {l} < 3")));
        }
        Ok(self.contains_unchecked(l))
    }

    /// Membership for ℓ already known to be ≥ 3 (cycle lengths from the
    /// component census are always ≥ 3).
    pub(crate) fn contains_unchecked(&self, l: u64) -> bool {
        match self {
            LengthSet::Finite(v) => v.binary_search(&l).is_ok(),
            LengthSet::AllAtLeast(min) => l >= *min,
            LengthSet::Residue { a, m, min } => l >= *min && l % m == *a,
            LengthSet::Complement(inner) => !inner.contains_unchecked(l),
        }
    }

    /// λ_L(z) = Σ_{ℓ∈L} z^ℓ/(2ℓ) for |z| < 1, within `tol` of the exact sum
    /// (up to rounding). Finite sets are summed exactly; `AllAtLeast(3)` uses
    /// the closed form λ(z) = −½log(1−z) − z/2 − z²/4 on the principal
    /// branch; everything else is summed termwise until the geometric tail
    /// bound |z|^{K+1}/(2(K+1)(1−|z|)) ≤ tol.
    pub fn lambda(&self, z: Complex64, tol: f64) -> Result<Complex64> {
        if !(tol > 0.0) {
            return Err(domain(format!("tolerance {tol} must be positive")));
        }
        if !z.re.is_finite() || !z.im.is_finite() || z.norm() >= 1.0 {
            return Err(domain(format!("argument {z} outside the open unit disk")));
        }
        self.lambda_inner(z, tol)
    }

    /// λ_L at a real argument t ∈ (−1, 1).
    pub fn lambda_real(&self, t: f64, tol: f64) -> Result<f64> {
        Ok(self.lambda(Complex64::new(t, 0.0), tol)?.re)
    }

    fn lambda_inner(&self, z: Complex64, tol: f64) -> Result<Complex64> {
        match self {
            LengthSet::Finite(v) => {
                let mut s = Complex64::new(0.0, 0.0);
                for &l in v {
                    s += z.powu(l as u32) / (2.0 * l as f64);
                }
                Ok(s)
            }
            LengthSet::AllAtLeast(min) => {
                let mut s = lambda_all_closed(z);
                // Strip the finitely many lengths below `min`.
                for l in 3..*min {
                    s -= z.powu(l as u32) / (2.0 * l as f64);
                }
                Ok(s)
            }
            LengthSet::Residue { a, m, min } => {
                if z.norm() == 0.0 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let mut l = *min + (a + m - min % m) % m;
                debug_assert!(l % m == *a && l >= *min);
                let r = z.norm();
                let zm = z.powu(*m as u32);
                let mut zp = z.powu(l as u32);
                let mut s = Complex64::new(0.0, 0.0);
                loop {
                    s += zp / (2.0 * l as f64);
                    // Tail bound over *all* lengths > l majorizes the subset.
                    if r.powi((l + 1) as i32) / (2.0 * (l + 1) as f64 * (1.0 - r)) <= tol {
                        return Ok(s);
                    }
                    if l > MAX_TERMS {
                        return Err(crate::error::numeric(format!(
                            "lambda series did not reach tolerance {tol} within {MAX_TERMS} terms at |z| = {r}"
                        )));
                    }
                    l += m;
                    zp *= zm;
                }
            }
            LengthSet::Complement(inner) => {
                Ok(lambda_all_closed(z) - inner.lambda_inner(z, tol)?)
            }
        }
    }
}

/// Closed form λ(z) = −½log(1−z) − z/2 − z²/4, valid for |z| < 1 where the
/// principal branch is safe (Re(1−z) > 0 whenever |z| < 1).
fn lambda_all_closed(z: Complex64) -> Complex64 {
    -0.5 * (Complex64::new(1.0, 0.0) - z).ln() - z / 2.0 - z * z / 4.0
}

impl fmt::Display for LengthSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthSet::Finite(v) if v.is_empty() => write!(f, "none"),
            LengthSet::Finite(v) => {
                let parts: Vec<String> = v.iter().map(|l| l.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
            LengthSet::AllAtLeast(3) => write!(f, "all"),
            LengthSet::AllAtLeast(min) => write!(f, "ge:{min}"),
            LengthSet::Residue { a: 0, m: 2, min: 3 } => write!(f, "even"),
            LengthSet::Residue { a: 1, m: 2, min: 3 } => write!(f, "odd"),
            LengthSet::Residue { a, m, min: 3 } => write!(f, "mod:{a}:{m}"),
            LengthSet::Residue { a, m, min } => write!(f, "mod:{a}:{m}:{min}"),
            LengthSet::Complement(inner) => write!(f, "not:{inner}"),
        }
    }
}

impl FromStr for LengthSet {
    type Err = Error;

    /// Grammar (case-insensitive, whitespace ignored):
    /// `"3,4,5"` finite list · `"all"` · `"none"` · `"ge:K"` · `"mod:a:m"`
    /// (min 3; an optional fourth field overrides the minimum) · `"even"` ·
    /// `"odd"` · `"not:<spec>"`.
    fn from_str(s: &str) -> Result<Self> {
        let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let lower = cleaned.to_ascii_lowercase();
        parse_spec(&lower)
    }
}

fn parse_spec(s: &str) -> Result<LengthSet> {
    if s.is_empty() {
        return Err(parse_err("empty length-set specification"));
    }
    if let Some(rest) = s.strip_prefix("not:") {
        return Ok(LengthSet::complement(parse_spec(rest)?));
    }
    match s {
        "all" => return LengthSet::all_at_least(3),
        "none" => return Ok(LengthSet::empty()),
        "even" => return LengthSet::residue(0, 2, 3),
        "odd" => return LengthSet::residue(1, 2, 3),
        _ => {}
    }
    if let Some(rest) = s.strip_prefix("ge:") {
        let min = parse_u64(rest)?;
        return LengthSet::all_at_least(min).map_err(as_parse);
    }
    if let Some(rest) = s.strip_prefix("mod:") {
        let fields: Vec<&str> = rest.split(':').collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(parse_err(format!(
                "expected mod:a:m or mod:a:m:min, got \"mod:{rest}\""
            )));
        }
        let a = parse_u64(fields[0])?;
        let m = parse_u64(fields[1])?;
        let min = if fields.len() == 3 { parse_u64(fields[2])? } else { 3 };
        return LengthSet::residue(a, m, min).map_err(as_parse);
    }
    let values = s
        .split(',')
        .map(parse_u64)
        .collect::<Result<Vec<u64>>>()?;
    LengthSet::finite(values).map_err(as_parse)
}

fn parse_u64(s: &str) -> Result<u64> {
    s.parse::<u64>()
        .map_err(|_| parse_err(format!("\"{s}\" is not a nonnegative integer")))
}

/// Constructor domain errors become parse errors when they arise from text.
fn as_parse(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Parse(m),
        other => other,
    }
}
