//! Closed-form Fisher-information expressions for two to four photons,
//! evaluated term by term.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use crate::error::{Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Step of the symmetric Richardson limit at removable singularities.
const LIMIT_STEP: f64 = 1e-3;

/// Relative size below which a denominator counts as vanishing.
const SINGULAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CatalogId {
    /// `½ ε (1−p) I`.
    F2,
    /// Three photons, star always present, independent `I₂`, `I₃`.
    F3Loss,
    /// Three photons with the single-loss list derived for identical photons.
    F3Identical,
    /// Three photons with the nine-term single-loss list for distinct
    /// distinguishabilities.
    F3Distinct,
    /// Four identical photons with single- and double-loss lists.
    F4Identical,
}

impl CatalogId {
    pub const ALL: [CatalogId; 5] = [
        CatalogId::F2,
        CatalogId::F3Loss,
        CatalogId::F3Identical,
        CatalogId::F3Distinct,
        CatalogId::F4Identical,
    ];

    /// Total photon number the expression describes.
    pub fn photons(self) -> usize {
        match self {
            CatalogId::F2 => 2,
            CatalogId::F3Loss | CatalogId::F3Identical | CatalogId::F3Distinct => 3,
            CatalogId::F4Identical => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CatalogId::F2 => "F2",
            CatalogId::F3Loss => "F3_loss",
            CatalogId::F3Identical => "F3_identical",
            CatalogId::F3Distinct => "F3_distinct",
            CatalogId::F4Identical => "F4_identical",
        }
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Arguments of a closed-form evaluation. `indist` holds `I₂..I_N`; a single
/// value is applied to every ground photon.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormParams {
    pub phi: f64,
    pub p: f64,
    pub epsilon: f64,
    pub indist: Vec<f64>,
}

/// One evaluated term together with the number of detected photons of the
/// events it accounts for.
#[derive(Debug, Clone, PartialEq)]
pub struct TermValue {
    pub name: String,
    pub detected: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy)]
struct Args {
    p: f64,
    q: f64,
    e: f64,
    i2: f64,
    i3: f64,
    a2: f64,
    a3: f64,
    b2: f64,
    b3: f64,
}

type Part = fn(&Args, f64) -> f64;

struct Term {
    name: &'static str,
    detected: usize,
    num: Part,
    den: Part,
}

fn one(_: &Args, _: f64) -> f64 {
    1.0
}

macro_rules! term {
    ($name:expr, $d:expr, |$a:ident, $x:ident| $num:expr, $den:expr) => {
        Term {
            name: $name,
            detected: $d,
            num: |$a: &Args, $x: f64| $num,
            den: |$a: &Args, $x: f64| {
                let _ = ($a, $x);
                $den
            },
        }
    };
    ($name:expr, $d:expr, |$a:ident, $x:ident| $num:expr) => {
        Term {
            name: $name,
            detected: $d,
            num: |$a: &Args, $x: f64| $num,
            den: one,
        }
    };
}

fn sq(x: f64) -> f64 {
    x * x
}

fn f2_terms() -> Vec<Term> {
    vec![term!("main", 2, |a, _x| 0.5 * a.e * a.q * a.i2)]
}

fn f3_main_terms() -> Vec<Term> {
    vec![
        term!("main", 3, |a, x| 0.5 * a.e * sq(a.q) * 6.0 * (1.0 + x.cos()) * a.i2 * a.i3, 5.0 + 4.0 * x.cos()),
        term!("main_distinguishable", 3, |a, _x| 0.5
            * a.e
            * sq(a.q)
            * ((a.i2 + a.i3) - 2.0 * a.i2 * a.i3)),
    ]
}

fn f3_loss_terms() -> Vec<Term> {
    let mut terms = f3_main_terms();
    terms.push(term!("single_loss", 2, |a, _x| 0.5 * a.p * a.q * (a.i2 + a.i3)));
    terms
}

fn f3_identical_terms() -> Vec<Term> {
    // The identical list is derived for I = 1; it is weighted by the mean
    // indistinguishability so that ε = 1 recovers the lossy three-photon law.
    let mut terms = f3_main_terms();
    terms.extend([
        term!(
            "F2^1",
            2,
            |a, x| 0.5 * (a.i2 + a.i3) * sq(a.e) * sq(a.p) * sq(a.q) * sq(x.sin()),
            3.0 * (a.e * a.p * a.q * (1.0 + x.cos()) + 4.0 * (1.0 - a.e) * sq(a.q))
        ),
        term!(
            "F2^2",
            2,
            |a, x| 0.5 * (a.i2 + a.i3) * sq(a.e) * sq(a.p) * sq(a.q) * sq(x.sin() + SQRT3 * x.cos()),
            3.0 * (2.0 * a.e * a.p * a.q * (2.0 + SQRT3 * x.sin() - x.cos()) + 4.0 * (1.0 - a.e) * sq(a.q))
        ),
        term!(
            "F2^3",
            2,
            |a, x| 0.5 * (a.i2 + a.i3) * sq(a.e) * sq(a.p) * sq(a.q) * sq(x.sin() - SQRT3 * x.cos()),
            3.0 * (2.0 * a.e * a.p * a.q * (2.0 - SQRT3 * x.sin() - x.cos()) + 4.0 * (1.0 - a.e) * sq(a.q))
        ),
    ]);
    terms
}

fn f3_distinct_terms() -> Vec<Term> {
    let mut terms = f3_main_terms();
    terms.extend([
        term!(
            "F2^1",
            2,
            |a, x| a.a2.powi(4) * a.b3.powi(4) * sq(a.e) * sq(a.p) * sq(a.q) * sq(x.sin()),
            6.0 * (a.e * a.p * a.q * sq(a.a2) * sq(a.b3) * (1.0 + x.cos())
                + 4.0 * (1.0 - a.e) * sq(a.q) * sq(a.a2) * sq(a.a3))
        ),
        term!(
            "F2^2",
            2,
            |a, x| a.a3.powi(4) * a.b2.powi(4) * sq(a.e) * sq(a.p) * sq(a.q) * sq(x.sin()),
            6.0 * (sq(a.a3) * sq(a.b2) * a.e * a.p * a.q * (1.0 + x.cos())
                + 4.0 * sq(a.a2) * sq(a.a3) * sq(a.q) * (1.0 - a.e))
        ),
        term!(
            "F2^3",
            2,
            |a, x| a.a3.powi(4) * a.a2.powi(4) * sq(a.e) * sq(a.p) * sq(a.q) * sq(x.sin()),
            3.0 * (4.0 * sq(a.a2) * sq(a.a3) * sq(a.q) * (1.0 - a.e)
                + sq(a.a2) * sq(a.a3) * a.e * a.p * a.q * (1.0 + x.cos()))
        ),
        term!(
            "F2^4",
            2,
            |a, x| a.a2.powi(4) * a.b3.powi(4) * sq(a.e) * sq(a.p) * sq(a.q) * sq(x.sin() - SQRT3 * x.cos()),
            6.0 * (2.0 * sq(a.a2) * sq(a.b3) * a.e * a.p * a.q * (2.0 - SQRT3 * x.sin() - x.cos())
                + 4.0 * sq(a.a2) * sq(a.a3) * sq(a.q) * (1.0 - a.e))
        ),
        term!(
            "F2^5",
            2,
            |a, x| a.a3.powi(4) * a.b2.powi(4) * sq(a.e) * sq(a.p) * sq(a.q) * sq(x.sin() + SQRT3 * x.cos()),
            6.0 * (2.0 * sq(a.a3) * sq(a.b2) * a.p * a.q * a.e * (2.0 + SQRT3 * x.sin() - x.cos())
                + 4.0 * sq(a.a2) * sq(a.a3) * sq(a.q) * (1.0 - a.e))
        ),
        term!(
            "F2^6",
            2,
            |a, x| a.a2.powi(4) * a.a3.powi(4) * sq(a.e) * sq(a.p) * sq(a.q) * sq(x.sin() - SQRT3 * x.cos()),
            3.0 * (4.0 * sq(a.a2) * sq(a.a3) * sq(a.q) * (1.0 - a.e)
                + 2.0 * sq(a.a2) * sq(a.a3) * a.p * a.q * a.e * (2.0 - SQRT3 * x.sin() - x.cos()))
        ),
        term!(
            "F2^7",
            2,
            |a, x| a.a3.powi(4) * a.a2.powi(4) * sq(a.e) * sq(a.p) * sq(a.q) * sq(x.sin() + SQRT3 * x.cos()),
            3.0 * (4.0 * sq(a.a2) * sq(a.a3) * sq(a.q) * (1.0 - a.e)
                + 2.0 * sq(a.a2) * sq(a.a3) * a.p * a.q * a.e * (2.0 + SQRT3 * x.sin() - x.cos()))
        ),
        term!(
            "F2^8",
            2,
            |a, x| a.a2.powi(4) * a.b3.powi(4) * sq(a.e) * sq(a.p) * sq(a.q) * sq(x.sin() + SQRT3 * x.cos()),
            6.0 * (2.0 * sq(a.a2) * sq(a.b3) * a.p * a.q * a.e * (2.0 + SQRT3 * x.sin() - x.cos())
                + 4.0 * sq(a.a2) * sq(a.a3) * sq(a.q) * (1.0 - a.e))
        ),
        term!(
            "F2^9",
            2,
            |a, x| a.a3.powi(4) * a.b2.powi(4) * sq(a.e) * sq(a.p) * sq(a.q) * sq(x.sin() - SQRT3 * x.cos()),
            6.0 * (2.0 * sq(a.a3) * sq(a.b2) * a.p * a.q * a.e * (2.0 - SQRT3 * x.sin() - x.cos())
                + 4.0 * sq(a.a2) * sq(a.a3) * sq(a.q) * (1.0 - a.e))
        ),
    ]);
    terms
}

fn f4_identical_terms() -> Vec<Term> {
    // Common factors of the double-loss list.
    fn n2(a: &Args) -> f64 {
        a.p.powi(4) * sq(a.q) * sq(a.e)
    }
    fn d2(a: &Args, trig: f64, absent: f64) -> f64 {
        sq(a.p) * a.q * a.e * trig + absent * a.p * sq(a.q) * (1.0 - a.e)
    }
    fn n3(a: &Args) -> f64 {
        sq(a.e) * sq(a.p) * a.q.powi(4)
    }
    vec![
        term!("main", 4, |a, x| 3.0 * a.e * a.q.powi(3) * (9.0 + 7.0 * x.cos()), 8.0 * (5.0 + 3.0 * x.cos())),
        term!(
            "F3^1",
            3,
            |a, x| n3(a) * sq(x.cos()),
            4.0 * (2.0 * (1.0 - a.e) * a.q.powi(3) + a.e * a.p * sq(a.q) * (1.0 - x.sin()))
        ),
        term!(
            "F3^2",
            3,
            |a, x| n3(a) * sq(x.cos()),
            4.0 * (2.0 * (1.0 - a.e) * a.q.powi(3) + a.e * a.p * sq(a.q) * (1.0 + x.sin()))
        ),
        term!(
            "F3^3",
            3,
            |a, x| 6.0 * n3(a) * sq(x.sin()),
            4.0 * (18.0 * (1.0 - a.e) * a.q.powi(3) + a.e * a.p * sq(a.q) * (5.0 + 4.0 * x.cos()))
        ),
        term!(
            "F3^4",
            3,
            |a, x| n3(a) * sq(x.sin()),
            2.0 * (2.0 * (1.0 - a.e) * a.q.powi(3) + a.e * a.p * sq(a.q) * (5.0 - 4.0 * x.cos()))
        ),
        term!(
            "F3^5",
            3,
            |a, x| n3(a) * sq(x.sin() + x.cos()),
            2.0 * (4.0 * (1.0 - a.e) * a.q.powi(3)
                + 2.0 * a.e * a.p * sq(a.q) * (3.0 + 2.0 * x.sin() - 2.0 * x.cos()))
        ),
        term!(
            "F3^6",
            3,
            |a, x| n3(a) * sq(x.sin() - x.cos()),
            2.0 * (4.0 * (1.0 - a.e) * a.q.powi(3)
                + 2.0 * a.e * a.p * sq(a.q) * (3.0 - 2.0 * x.sin() - 2.0 * x.cos()))
        ),
        term!("F2^1", 2, |a, x| n2(a) * sq(x.sin()), 8.0 * d2(a, 1.0 + x.cos(), 4.0)),
        term!("F2^2", 2, |a, x| n2(a) * sq(x.sin()), 16.0 * d2(a, 1.0 - x.cos(), 2.0)),
        term!("F2^3", 2, |a, x| n2(a) * sq(x.cos()), 16.0 * d2(a, 1.0 + x.sin(), 2.0)),
        term!("F2^4", 2, |a, x| n2(a) * sq(x.sin()), 16.0 * d2(a, 1.0 - x.cos(), 2.0)),
        term!("F2^5", 2, |a, x| n2(a) * sq(x.cos()), 16.0 * d2(a, 1.0 - x.sin(), 2.0)),
        term!("F2^6", 2, |a, x| 3.0 * n2(a) * sq(x.sin()), 32.0 * d2(a, 1.0 - x.cos(), 4.0)),
        term!("F2^7", 2, |a, x| 3.0 * n2(a) * sq(x.sin()), 32.0 * d2(a, 1.0 + x.cos(), 4.0)),
        term!("F2^8", 2, |a, x| n2(a) * sq(x.sin()), 8.0 * d2(a, x.cos() + 1.0, 4.0)),
        term!("F2^9", 2, |a, x| n2(a) * sq(x.sin()), 16.0 * d2(a, 1.0 - x.cos(), 2.0)),
        term!("F2^10", 2, |a, x| n2(a) * sq(x.cos()), 16.0 * d2(a, x.sin() + 1.0, 2.0)),
        term!("F2^11", 2, |a, x| n2(a) * sq(x.sin()), 16.0 * d2(a, 1.0 - x.cos(), 2.0)),
        term!("F2^12", 2, |a, x| n2(a) * sq(x.cos()), 16.0 * d2(a, 1.0 - x.sin(), 2.0)),
        term!("F2^13", 2, |a, x| n2(a) * sq(x.sin()), 32.0 * d2(a, x.cos() + 1.0, 4.0)),
        term!("F2^14", 2, |a, x| n2(a) * sq(x.sin()), 32.0 * d2(a, 1.0 - x.cos(), 4.0)),
        term!("F2^15", 2, |a, _x| 0.5 * a.q * sq(a.p) * a.e),
    ]
}

fn terms_of(id: CatalogId) -> Vec<Term> {
    match id {
        CatalogId::F2 => f2_terms(),
        CatalogId::F3Loss => f3_loss_terms(),
        CatalogId::F3Identical => f3_identical_terms(),
        CatalogId::F3Distinct => f3_distinct_terms(),
        CatalogId::F4Identical => f4_identical_terms(),
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::DomainError(format!("{name} must be in [0, 1], got {v}")))
    }
}

fn args_for(id: CatalogId, params: &ClosedFormParams) -> Result<Args> {
    if !params.phi.is_finite() {
        return Err(Error::DomainError(format!("phi must be finite, got {}", params.phi)));
    }
    check_unit("p", params.p)?;
    check_unit("epsilon", params.epsilon)?;
    let ground = id.photons() - 1;
    let indist: Vec<f64> = match params.indist.len() {
        1 => vec![params.indist[0]; ground],
        n if n == ground => params.indist.clone(),
        n => {
            return Err(Error::DomainError(format!(
                "{id} takes {ground} indistinguishability values, got {n}"
            )))
        }
    };
    for &i in &indist {
        check_unit("indistinguishability", i)?;
    }
    if id == CatalogId::F4Identical && indist.iter().any(|&i| i != 1.0) {
        return Err(Error::DomainError(
            "F4_identical is defined for fully indistinguishable photons only".into(),
        ));
    }
    let i2 = indist[0];
    let i3 = indist.get(1).copied().unwrap_or(1.0);
    Ok(Args {
        p: params.p,
        q: 1.0 - params.p,
        e: params.epsilon,
        i2,
        i3,
        a2: i2.sqrt(),
        a3: i3.sqrt(),
        b2: (1.0 - i2).sqrt(),
        b3: (1.0 - i3).sqrt(),
    })
}

fn ratio(term: &Term, a: &Args, phi: f64) -> f64 {
    (term.num)(a, phi) / (term.den)(a, phi)
}

fn evaluate(term: &Term, a: &Args, phi: f64) -> f64 {
    let den = (term.den)(a, phi);
    let scale = [0.0, FRAC_PI_2, PI, -FRAC_PI_2, 2.0 * PI / 3.0, -2.0 * PI / 3.0, phi]
        .iter()
        .map(|&x| (term.den)(a, x).abs())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    if den.abs() > SINGULAR_TOL * scale {
        return (term.num)(a, phi) / den;
    }
    // Removable singularity in φ: symmetric Richardson limit.
    let g = |h: f64| 0.5 * (ratio(term, a, phi + h) + ratio(term, a, phi - h));
    (4.0 * g(LIMIT_STEP / 2.0) - g(LIMIT_STEP)) / 3.0
}

/// Every term of a catalog entry, in the order they are written.
pub fn closed_form_terms(id: CatalogId, params: &ClosedFormParams) -> Result<Vec<TermValue>> {
    let a = args_for(id, params)?;
    Ok(terms_of(id)
        .iter()
        .map(|t| TermValue {
            name: t.name.to_string(),
            detected: t.detected,
            value: evaluate(t, &a, params.phi),
        })
        .collect())
}

pub fn closed_form(id: CatalogId, params: &ClosedFormParams) -> Result<f64> {
    Ok(closed_form_terms(id, params)?.iter().map(|t| t.value).sum())
}
