//! Bosonic mode bookkeeping and exact Fock-basis expansion.
//!
//! Photons are described by linear forms over creation operators. A product
//! of such forms acting on the vacuum is expanded as a polynomial in the mode
//! symbols; the coefficient of the monomial `Π_m x_m^{n_m}` times `√(Π n_m!)`
//! is the amplitude of the occupation vector `n`.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;
use std::hash::BuildHasherDefault;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients below this magnitude are dropped after every substitution.
pub const PRUNE_EPS: f64 = 1e-15;

/// Largest number of photons the polynomial expansion accepts.
pub const MAX_PHOTONS: usize = 6;

const NORM_TOL: f64 = 1e-12;

/// Where a mode lives: at a detector on either side of the array, or in the
/// fiber-loss environment on either side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModeKind {
    /// `a` operators.
    DetectorLeft,
    /// `b` operators.
    DetectorRight,
    /// `c` operators.
    EnvLeft,
    /// `d` operators.
    EnvRight,
}

impl ModeKind {
    pub fn is_detector(self) -> bool {
        matches!(self, ModeKind::DetectorLeft | ModeKind::DetectorRight)
    }

    pub fn is_environment(self) -> bool {
        !self.is_detector()
    }

    pub fn is_left(self) -> bool {
        matches!(self, ModeKind::DetectorLeft | ModeKind::EnvLeft)
    }

    /// Same role on the opposite side.
    pub fn mirrored(self) -> Self {
        match self {
            ModeKind::DetectorLeft => ModeKind::DetectorRight,
            ModeKind::DetectorRight => ModeKind::DetectorLeft,
            ModeKind::EnvLeft => ModeKind::EnvRight,
            ModeKind::EnvRight => ModeKind::EnvLeft,
        }
    }

    fn symbol(self) -> char {
        match self {
            ModeKind::DetectorLeft => 'a',
            ModeKind::DetectorRight => 'b',
            ModeKind::EnvLeft => 'c',
            ModeKind::EnvRight => 'd',
        }
    }
}

/// Internal spatio-temporal label. `Mu` is the star photon's wave packet;
/// `Nu(j)` is the part of ground photon `j` orthogonal to it. `Nu(0)` is the
/// single shared orthogonal label used when ground photons are identical to
/// each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Mu,
    Nu(u8),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Mu => write!(f, "mu"),
            Label::Nu(0) => write!(f, "nu"),
            Label::Nu(j) => write!(f, "nu{j}"),
        }
    }
}

/// One bosonic mode. Ordering is (kind, slot, label), which fixes the
/// canonical order of occupation vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode {
    pub kind: ModeKind,
    pub slot: u8,
    pub label: Label,
}

impl Mode {
    pub const fn new(kind: ModeKind, slot: u8, label: Label) -> Self {
        Mode { kind, slot, label }
    }

    pub fn with_label(self, label: Label) -> Self {
        Mode { label, ..self }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}:{}", self.kind.symbol(), self.slot, self.label)
    }
}

/// A single photon written as a linear combination of creation operators.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhotonForm {
    terms: BTreeMap<Mode, Complex64>,
}

impl PhotonForm {
    /// Builds a form from (mode, coefficient) pairs, merging repeated modes
    /// and pruning negligible coefficients. No normalization check; partial
    /// forms (such as one half of the star photon) are legitimate.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Mode, Complex64)>,
    {
        let mut merged: BTreeMap<Mode, Complex64> = BTreeMap::new();
        for (mode, c) in terms {
            *merged.entry(mode).or_default() += c;
        }
        merged.retain(|_, c| c.norm() >= PRUNE_EPS);
        PhotonForm { terms: merged }
    }

    /// Like [`PhotonForm::from_terms`] but rejects forms whose squared norm
    /// is not 1.
    pub fn normalized<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Mode, Complex64)>,
    {
        let form = Self::from_terms(terms);
        let n = form.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(form)
    }

    pub fn single(mode: Mode) -> Self {
        Self::from_terms([(mode, Complex64::new(1.0, 0.0))])
    }

    pub fn coefficient(&self, mode: &Mode) -> Complex64 {
        self.terms.get(mode).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &Complex64)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Mode> {
        self.terms.keys()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (*m, c * factor)))
    }

    pub fn plus(&self, other: &PhotonForm) -> Self {
        Self::from_terms(self.terms.iter().chain(other.terms.iter()).map(|(m, c)| (*m, *c)))
    }
}

/// Linear substitution rule `input ↦ Σ_out c · out` on creation operators.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearMap {
    entries: BTreeMap<Mode, Vec<(Mode, Complex64)>>,
}

impl LinearMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, input: Mode, outputs: Vec<(Mode, Complex64)>) {
        self.entries.insert(input, outputs);
    }

    pub fn identity<I: IntoIterator<Item = Mode>>(modes: I) -> Self {
        let mut map = Self::new();
        map.add_identity(modes);
        map
    }

    /// Adds pass-through entries for every listed mode not already mapped.
    pub fn add_identity<I: IntoIterator<Item = Mode>>(&mut self, modes: I) {
        for m in modes {
            self.entries
                .entry(m)
                .or_insert_with(|| vec![(m, Complex64::new(1.0, 0.0))]);
        }
    }

    pub fn outputs(&self, input: &Mode) -> Option<&[(Mode, Complex64)]> {
        self.entries.get(input).map(Vec::as_slice)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &Mode> {
        self.entries.keys()
    }

    /// Discrete Fourier multiport on the detector modes of one side:
    /// input slot `j` maps to `Σ_k ω^{jk}/√n · slot k` with `ω = e^{2πi/n}`,
    /// for each listed label.
    pub fn qft(n: usize, kind: ModeKind, labels: &[Label]) -> Self {
        let mut map = Self::new();
        let scale = 1.0 / (n as f64).sqrt();
        for &label in labels {
            for j in 1..=n {
                let outputs = (1..=n)
                    .map(|k| {
                        let angle = 2.0 * PI * ((j * k) % n) as f64 / n as f64;
                        (
                            Mode::new(kind, k as u8, label),
                            Complex64::from_polar(scale, angle),
                        )
                    })
                    .collect();
                map.insert(Mode::new(kind, j as u8, label), outputs);
            }
        }
        map
    }

    /// Splits the `Mu` mode of `slot` on each listed kind into
    /// `√I·Mu + √(1−I)·nu`.
    pub fn distinguishability(slot: u8, indist: f64, nu: Label, kinds: &[ModeKind]) -> Self {
        let mut map = Self::new();
        let keep = Complex64::new(indist.sqrt(), 0.0);
        let orth = Complex64::new((1.0 - indist).max(0.0).sqrt(), 0.0);
        for &kind in kinds {
            map.insert(
                Mode::new(kind, slot, Label::Mu),
                vec![(Mode::new(kind, slot, Label::Mu), keep), (Mode::new(kind, slot, nu), orth)],
            );
        }
        map
    }

    /// Beam-splitter loss model for one fiber: each detector-bound mode of
    /// `slot` keeps amplitude `η` and leaks `√(1−η²)` into the environment
    /// mode on the same side with the same label.
    pub fn loss(slot: u8, eta: f64, labels: &[Label]) -> Self {
        let mut map = Self::new();
        let keep = Complex64::new(eta, 0.0);
        let leak = Complex64::new((1.0 - eta * eta).max(0.0).sqrt(), 0.0);
        for &label in labels {
            for (det, env) in [
                (ModeKind::DetectorLeft, ModeKind::EnvLeft),
                (ModeKind::DetectorRight, ModeKind::EnvRight),
            ] {
                map.insert(
                    Mode::new(det, slot, label),
                    vec![(Mode::new(det, slot, label), keep), (Mode::new(env, slot, label), leak)],
                );
            }
        }
        map
    }

    /// Largest entry of `|U†U − I|` over the mapped inputs. Zero for a map
    /// whose columns are orthonormal.
    pub fn isometry_defect(&self) -> f64 {
        let inputs: Vec<&Mode> = self.entries.keys().collect();
        let mut worst = 0.0f64;
        for (a, ma) in inputs.iter().enumerate() {
            let col_a = &self.entries[*ma];
            for mb in inputs.iter().skip(a) {
                let col_b = &self.entries[*mb];
                let mut dot = Complex64::default();
                for (out_a, ca) in col_a {
                    for (out_b, cb) in col_b {
                        if out_a == out_b {
                            dot += ca.conj() * cb;
                        }
                    }
                }
                let target = if ma == mb { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }
}

/// Applies `map` to every creation operator in `form`.
pub fn substitute(form: &PhotonForm, map: &LinearMap) -> Result<PhotonForm> {
    let mut out = Vec::with_capacity(form.len() * 2);
    for (mode, c) in form.iter() {
        let outputs = map.outputs(mode).ok_or(Error::UnknownMode(*mode))?;
        out.extend(outputs.iter().map(|(m, a)| (*m, c * a)));
    }
    Ok(PhotonForm::from_terms(out))
}

/// Canonically ordered occupation vector: (mode, count) pairs with nonzero
/// counts, sorted by mode.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Occupation(Vec<(Mode, u8)>);

impl Occupation {
    pub fn from_modes<I: IntoIterator<Item = Mode>>(modes: I) -> Self {
        let mut counts: BTreeMap<Mode, u8> = BTreeMap::new();
        for m in modes {
            *counts.entry(m).or_default() += 1;
        }
        Occupation(counts.into_iter().collect())
    }

    pub fn from_counts<I: IntoIterator<Item = (Mode, u8)>>(counts: I) -> Self {
        let mut merged: BTreeMap<Mode, u8> = BTreeMap::new();
        for (m, n) in counts {
            *merged.entry(m).or_default() += n;
        }
        merged.retain(|_, n| *n > 0);
        Occupation(merged.into_iter().collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Mode, u8)> {
        self.0.iter()
    }

    pub fn count(&self, mode: &Mode) -> u8 {
        self.0
            .binary_search_by(|(m, _)| m.cmp(mode))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|(_, n)| *n as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Maps every mode through `project`, dropping modes mapped to `None`
    /// and merging counts of modes that collide.
    pub fn project<F>(&self, project: F) -> Occupation
    where
        F: Fn(&Mode) -> Option<Mode>,
    {
        Occupation::from_counts(self.0.iter().filter_map(|(m, n)| project(m).map(|p| (p, *n))))
    }

    fn factorial_weight(&self) -> f64 {
        self.0
            .iter()
            .map(|(_, n)| (1..=*n as u32).map(f64::from).product::<f64>())
            .product::<f64>()
            .sqrt()
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "-");
        }
        for (i, (m, n)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{m}")?;
            if *n > 1 {
                write!(f, "^{n}")?;
            }
        }
        Ok(())
    }
}

/// Pure state in the Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    amplitudes: BTreeMap<Occupation, Complex64>,
    photon_count: usize,
}

impl FockState {
    pub fn photon_count(&self) -> usize {
        self.photon_count
    }

    pub fn amplitude(&self, occupation: &Occupation) -> Complex64 {
        self.amplitudes.get(occupation).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|c| c.norm_sqr()).sum()
    }
}

type FixedHasher = BuildHasherDefault<DefaultHasher>;

/// Product of photon forms kept in monomial form so it can be extended by
/// further factors. Hashing is seeded deterministically, so summation order
/// (and therefore every rounded bit) is reproducible across runs.
#[derive(Debug, Clone)]
pub struct Polynomial {
    terms: HashMap<Vec<Mode>, Complex64, FixedHasher>,
    degree: usize,
}

impl Polynomial {
    /// The vacuum: a single empty monomial with coefficient 1.
    pub fn one() -> Self {
        let mut terms = HashMap::with_hasher(FixedHasher::default());
        terms.insert(Vec::new(), Complex64::new(1.0, 0.0));
        Polynomial { terms, degree: 0 }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn times(&self, form: &PhotonForm) -> Result<Polynomial> {
        if self.degree + 1 > MAX_PHOTONS {
            return Err(Error::CapacityExceeded {
                max: MAX_PHOTONS,
                got: self.degree + 1,
            });
        }
        let mut terms: HashMap<Vec<Mode>, Complex64, FixedHasher> =
            HashMap::with_capacity_and_hasher(self.terms.len() * form.len(), FixedHasher::default());
        // Iterate in sorted key order so accumulation order is independent of
        // the table layout of `self`.
        let mut keys: Vec<(&Vec<Mode>, &Complex64)> = self.terms.iter().collect();
        keys.sort_unstable_by(|a, b| a.0.cmp(b.0));
        for (mono, c) in keys {
            for (mode, a) in form.iter() {
                let pos = mono.partition_point(|m| m <= mode);
                let mut next = Vec::with_capacity(mono.len() + 1);
                next.extend_from_slice(&mono[..pos]);
                next.push(*mode);
                next.extend_from_slice(&mono[pos..]);
                *terms.entry(next).or_default() += c * a;
            }
        }
        Ok(Polynomial {
            terms,
            degree: self.degree + 1,
        })
    }

    pub fn product(forms: &[PhotonForm]) -> Result<Polynomial> {
        if forms.len() > MAX_PHOTONS {
            return Err(Error::CapacityExceeded {
                max: MAX_PHOTONS,
                got: forms.len(),
            });
        }
        forms.iter().try_fold(Polynomial::one(), |acc, f| acc.times(f))
    }

    /// Converts monomial coefficients into Fock amplitudes via `√(Π n!)`.
    pub fn into_state(self) -> FockState {
        let amplitudes = self
            .terms
            .into_iter()
            .filter_map(|(mono, c)| {
                let occ = Occupation::from_modes(mono);
                let amp = c * occ.factorial_weight();
                (amp.norm() >= PRUNE_EPS).then_some((occ, amp))
            })
            .collect();
        FockState {
            amplitudes,
            photon_count: self.degree,
        }
    }
}

/// Expands `Π_i form_i |0⟩` into Fock amplitudes.
pub fn expand_product(forms: &[PhotonForm]) -> Result<FockState> {
    Ok(Polynomial::product(forms)?.into_state())
}

/// Outcome distribution obtained by projecting every occupation vector
/// through `project` (unobserved modes map to `None`) and summing `|amp|²`
/// over vectors with the same projection. Distinct occupation vectors are
/// orthogonal, so this is the Born-rule marginal.
pub fn marginal_distribution<F>(state: &FockState, project: F) -> BTreeMap<Occupation, f64>
where
    F: Fn(&Mode) -> Option<Mode>,
{
    let mut out: BTreeMap<Occupation, f64> = BTreeMap::new();
    for (occ, amp) in state.iter() {
        *out.entry(occ.project(&project)).or_default() += amp.norm_sqr();
    }
    out
}
