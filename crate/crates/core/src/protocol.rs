//! The telescope network: input photons, distinguishability, fiber loss and
//! the Fourier multiports at both receivers, evaluated into exact
//! φ-parametrized outcome tables.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{self, Label, LinearMap, Mode, ModeKind, Occupation, PhotonForm, Polynomial};

/// Largest total photon number (star included) the protocol builder accepts.
pub const MAX_N: usize = 5;

/// How the orthogonal remainder of each ground photon is labelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NuPolicy {
    /// Every ground photon `j` gets its own orthogonal label `ν_j`.
    #[default]
    DistinctNu,
    /// All ground photons share one orthogonal label, so they remain
    /// identical to each other.
    SharedNu,
}

impl NuPolicy {
    pub fn nu_label(self, slot: u8) -> Label {
        match self {
            NuPolicy::DistinctNu => Label::Nu(slot),
            NuPolicy::SharedNu => Label::Nu(0),
        }
    }
}

/// Whether detectors tell the star's wave packet apart from the orthogonal
/// ground-photon labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelResolution {
    /// Counts are recorded per internal label (`d = (d^μ, d^ν)`).
    #[default]
    Resolved,
    /// Counts are summed over internal labels.
    Summed,
}

/// How lost ground photons enter the outcome space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossAccounting {
    /// Star-present outcomes are split by which ground photons were lost,
    /// so Fisher information adds over loss configurations with binomial
    /// weights. The star-absent branch enters through its detector marginal.
    #[default]
    PerConfiguration,
    /// The environment is traced out; outcomes are detector counts only.
    Traced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Observation {
    pub labels: LabelResolution,
    pub loss: LossAccounting,
}

/// Full description of one telescope configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Total photon number including the star photon.
    pub n: usize,
    /// Probability that the star mode holds a photon in a coherence interval.
    pub epsilon: f64,
    /// Indistinguishability of ground photons `2..=n` from the star photon.
    pub indist: Vec<f64>,
    pub nu_policy: NuPolicy,
    pub wavelength_m: f64,
    pub attenuation_length_m: f64,
    /// Baseline in units of the attenuation length, `L / L0`.
    pub alpha: f64,
    pub phi: f64,
    pub observation: Observation,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 2,
            epsilon: 1.0,
            indist: vec![1.0],
            nu_policy: NuPolicy::DistinctNu,
            wavelength_m: 628e-9,
            attenuation_length_m: 10e3,
            alpha: 4.0,
            phi: 0.0,
            observation: Observation::default(),
        }
    }
}

impl ExperimentConfig {
    /// Configuration with `n` photons, all ground photons sharing the same
    /// indistinguishability, other fields at their defaults.
    pub fn uniform(n: usize, epsilon: f64, indist: f64, alpha: f64) -> Self {
        ExperimentConfig {
            n,
            epsilon,
            indist: vec![indist; n.saturating_sub(1)],
            alpha,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        if !(2..=MAX_N).contains(&self.n) {
            return bad(format!("N must be in 2..={MAX_N}, got {}", self.n));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad(format!("epsilon must be in [0, 1], got {}", self.epsilon));
        }
        if self.indist.len() != self.n - 1 {
            return bad(format!(
                "expected {} indistinguishability values, got {}",
                self.n - 1,
                self.indist.len()
            ));
        }
        if let Some(i) = self.indist.iter().find(|i| !(0.0..=1.0).contains(*i)) {
            return bad(format!("indistinguishability must be in [0, 1], got {i}"));
        }
        if !(self.wavelength_m > 0.0 && self.wavelength_m.is_finite()) {
            return bad(format!("wavelength must be positive, got {}", self.wavelength_m));
        }
        if !(self.attenuation_length_m > 0.0 && self.attenuation_length_m.is_finite()) {
            return bad(format!(
                "attenuation length must be positive, got {}",
                self.attenuation_length_m
            ));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be finite and non-negative, got {}", self.alpha));
        }
        if !self.phi.is_finite() {
            return bad(format!("phi must be finite, got {}", self.phi));
        }
        Ok(())
    }

    /// Fiber amplitude transmissivity `η = e^{−α/4}`.
    pub fn eta(&self) -> f64 {
        (-self.alpha / 4.0).exp()
    }

    /// Single-photon loss probability `p = 1 − η² = 1 − e^{−α/2}`.
    pub fn loss_probability(&self) -> f64 {
        loss_probability(self.alpha)
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        ExperimentConfig {
            alpha,
            ..self.clone()
        }
    }

    pub fn with_phi(&self, phi: f64) -> Self {
        ExperimentConfig { phi, ..self.clone() }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        ExperimentConfig {
            epsilon,
            ..self.clone()
        }
    }
}

pub fn loss_probability(alpha: f64) -> f64 {
    -(-alpha / 2.0).exp_m1()
}

/// Baseline giving loss probability `p`; inverse of [`loss_probability`].
pub fn alpha_for_loss(p: f64) -> f64 {
    -2.0 * (-p).ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    /// `ρ₀`: no star photon in the coherence interval.
    StarAbsent,
    /// `ρ₁`: one star photon.
    StarPresent,
}

/// One observable outcome: the detector occupation (per internal label
/// unless labels are summed) and, under per-configuration loss accounting,
/// the slots of the ground photons that were lost.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DetectorSignature {
    pub detected: Occupation,
    pub lost: Vec<u8>,
}

impl DetectorSignature {
    /// Number of detected photons `D`.
    pub fn detected_count(&self) -> usize {
        self.detected.total()
    }

    /// The same outcome with the loss herald dropped.
    pub fn detector_part(&self) -> DetectorSignature {
        DetectorSignature {
            detected: self.detected.clone(),
            lost: Vec::new(),
        }
    }

    /// Photon counts per detector, summed over labels: left detectors
    /// `1..=n` followed by right detectors `1..=n`.
    pub fn counts(&self, n: usize) -> Vec<u8> {
        let mut counts = vec![0u8; 2 * n];
        for (mode, k) in self.detected.iter() {
            let idx = mode.slot as usize - 1;
            match mode.kind {
                ModeKind::DetectorLeft => counts[idx] += k,
                ModeKind::DetectorRight => counts[n + idx] += k,
                _ => {}
            }
        }
        counts
    }

    /// Swaps left and right detectors.
    pub fn mirrored(&self) -> DetectorSignature {
        DetectorSignature {
            detected: self
                .detected
                .project(|m| Some(Mode::new(m.kind.mirrored(), m.slot, m.label))),
            lost: self.lost.clone(),
        }
    }

    fn from_projected(occ: &Occupation) -> Self {
        let detected = occ.project(|m| m.kind.is_detector().then_some(*m));
        let lost = occ
            .iter()
            .filter(|(m, _)| m.kind.is_environment())
            .map(|(m, _)| m.slot)
            .collect();
        DetectorSignature { detected, lost }
    }
}

impl fmt::Display for DetectorSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.detected)?;
        if !self.lost.is_empty() {
            let lost: Vec<String> = self.lost.iter().map(u8::to_string).collect();
            write!(f, " | lost {}", lost.join(","))?;
        }
        Ok(())
    }
}

/// `P(φ) = A + B cos φ + C sin φ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrigProbability {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Relative gap `(A − R)/A` below which a trig probability is treated as
/// touching zero.
const TOUCH_TOL: f64 = 1e-12;

impl TrigProbability {
    pub fn constant(a: f64) -> Self {
        TrigProbability { a, b: 0.0, c: 0.0 }
    }

    /// Recovers the coefficients from samples at `0`, `π/2` and `π`.
    pub fn from_samples(at_zero: f64, at_half_pi: f64, at_pi: f64) -> Self {
        let a = 0.5 * (at_zero + at_pi);
        TrigProbability {
            a,
            b: 0.5 * (at_zero - at_pi),
            c: at_half_pi - a,
        }
    }

    pub fn value(&self, phi: f64) -> f64 {
        self.a + self.b * phi.cos() + self.c * phi.sin()
    }

    pub fn derivative(&self, phi: f64) -> f64 {
        -self.b * phi.sin() + self.c * phi.cos()
    }

    /// Oscillation amplitude `√(B² + C²)`.
    pub fn amplitude(&self) -> f64 {
        self.b.hypot(self.c)
    }

    pub fn is_constant(&self) -> bool {
        self.b == 0.0 && self.c == 0.0
    }

    /// Whether the minimum over φ is zero (`R = A`).
    pub fn touches_zero(&self) -> bool {
        self.a > 0.0 && self.a - self.amplitude() <= TOUCH_TOL * self.a
    }

    pub fn scaled(&self, factor: f64) -> Self {
        TrigProbability {
            a: self.a * factor,
            b: self.b * factor,
            c: self.c * factor,
        }
    }

    pub fn plus(&self, other: &TrigProbability) -> Self {
        TrigProbability {
            a: self.a + other.a,
            b: self.b + other.b,
            c: self.c + other.c,
        }
    }

    /// `(∂P/∂φ)² / P`, continuously extended through zeros of `P`. When the
    /// curve touches zero, `(P')² = P(2A − P)` exactly, so the ratio is
    /// `2A − P`; otherwise `P ≥ A − R > 0`.
    pub fn fisher_density(&self, phi: f64) -> f64 {
        if self.a <= 0.0 {
            return 0.0;
        }
        let p = self.value(phi).max(0.0);
        if self.touches_zero() {
            (2.0 * self.a - p).max(0.0)
        } else {
            let d = self.derivative(phi);
            d * d / p
        }
    }
}

/// Outcome table of one branch of the star-mode mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchTable {
    pub branch: Branch,
    pub n: usize,
    /// Loss probability `p` the table was evaluated at.
    pub loss_probability: f64,
    pub entries: BTreeMap<DetectorSignature, TrigProbability>,
}

impl BranchTable {
    pub fn get(&self, signature: &DetectorSignature) -> Option<&TrigProbability> {
        self.entries.get(signature)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DetectorSignature, &TrigProbability)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(Σ A, Σ B, Σ C)` over all entries.
    pub fn sums(&self) -> (f64, f64, f64) {
        self.entries
            .values()
            .fold((0.0, 0.0, 0.0), |(a, b, c), t| (a + t.a, b + t.b, c + t.c))
    }

    /// Entries merged over loss heralds, keyed by detector outcome only.
    pub fn detector_marginal(&self) -> BTreeMap<DetectorSignature, TrigProbability> {
        let mut out: BTreeMap<DetectorSignature, TrigProbability> = BTreeMap::new();
        for (sig, t) in &self.entries {
            let e = out.entry(sig.detector_part()).or_default();
            *e = e.plus(t);
        }
        out
    }

    /// Exact re-evaluation at a different loss probability. Every outcome
    /// with `g` detected and `l` lost ground photons scales as
    /// `(1−p)^g p^l`; outcomes whose weight vanishes are dropped.
    pub fn rescaled(&self, p: f64) -> BranchTable {
        let p_ref = self.loss_probability;
        let star = usize::from(self.branch == Branch::StarPresent);
        let ground = self.n - 1;
        let mut entries = BTreeMap::new();
        for (sig, t) in &self.entries {
            let kept = sig.detected_count() - star;
            let lost = ground - kept;
            let factor = loss_factor(p, p_ref, kept, lost);
            if factor > 0.0 {
                entries.insert(sig.clone(), t.scaled(factor));
            }
        }
        BranchTable {
            branch: self.branch,
            n: self.n,
            loss_probability: p,
            entries,
        }
    }
}

/// The star photon kept as two halves so φ stays symbolic:
/// `fixed + e^{iφ} · phased`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarForm {
    pub fixed: PhotonForm,
    pub phased: PhotonForm,
}

impl StarForm {
    pub fn at(&self, phi: f64) -> PhotonForm {
        self.fixed.plus(&self.phased.scaled(Complex64::from_polar(1.0, phi)))
    }
}

/// Output-side photon forms of one branch.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolForms {
    pub star: Option<StarForm>,
    pub ground: Vec<PhotonForm>,
}

impl ProtocolForms {
    pub fn at(&self, phi: f64) -> Vec<PhotonForm> {
        self.star
            .iter()
            .map(|s| s.at(phi))
            .chain(self.ground.iter().cloned())
            .collect()
    }
}

fn labels_in_use(config: &ExperimentConfig) -> Vec<Label> {
    let mut labels = vec![Label::Mu];
    for slot in 2..=config.n as u8 {
        let nu = config.nu_policy.nu_label(slot);
        if !labels.contains(&nu) {
            labels.push(nu);
        }
    }
    labels
}

/// Fourier multiports on both sides for every label, with the environment
/// modes passed through.
fn network_map(config: &ExperimentConfig) -> LinearMap {
    let labels = labels_in_use(config);
    let mut map = LinearMap::qft(config.n, ModeKind::DetectorLeft, &labels);
    let right = LinearMap::qft(config.n, ModeKind::DetectorRight, &labels);
    for input in right.inputs() {
        map.insert(*input, right.outputs(input).unwrap().to_vec());
    }
    for slot in 2..=config.n as u8 {
        for &label in &labels {
            map.add_identity([
                Mode::new(ModeKind::EnvLeft, slot, label),
                Mode::new(ModeKind::EnvRight, slot, label),
            ]);
        }
    }
    map
}

/// Photon forms after distinguishability, loss and mixing for one branch.
pub fn build_forms(config: &ExperimentConfig, branch: Branch) -> Result<ProtocolForms> {
    config.validate()?;
    let network = network_map(config);
    let eta = config.eta();
    let half = Complex64::new(FRAC_1_SQRT_2, 0.0);

    let star = match branch {
        Branch::StarAbsent => None,
        Branch::StarPresent => {
            let fixed = PhotonForm::from_terms([(Mode::new(ModeKind::DetectorLeft, 1, Label::Mu), half)]);
            let phased = PhotonForm::from_terms([(Mode::new(ModeKind::DetectorRight, 1, Label::Mu), half)]);
            Some(StarForm {
                fixed: fock::substitute(&fixed, &network)?,
                phased: fock::substitute(&phased, &network)?,
            })
        }
    };

    let sides = [ModeKind::DetectorLeft, ModeKind::DetectorRight];
    let mut ground = Vec::with_capacity(config.n - 1);
    for (idx, &indist) in config.indist.iter().enumerate() {
        let slot = (idx + 2) as u8;
        let nu = config.nu_policy.nu_label(slot);
        let input = PhotonForm::normalized(sides.map(|k| (Mode::new(k, slot, Label::Mu), half)))?;
        let split = fock::substitute(&input, &LinearMap::distinguishability(slot, indist, nu, &sides))?;
        let lossy = fock::substitute(&split, &LinearMap::loss(slot, eta, &[Label::Mu, nu]))?;
        ground.push(fock::substitute(&lossy, &network)?);
    }
    Ok(ProtocolForms { star, ground })
}

fn projector(observation: Observation) -> impl Fn(&Mode) -> Option<Mode> {
    move |m: &Mode| {
        if m.kind.is_detector() {
            Some(match observation.labels {
                LabelResolution::Resolved => *m,
                LabelResolution::Summed => m.with_label(Label::Mu),
            })
        } else {
            match observation.loss {
                LossAccounting::PerConfiguration => Some(Mode::new(ModeKind::EnvLeft, m.slot, Label::Mu)),
                LossAccounting::Traced => None,
            }
        }
    }
}

fn distribution(poly: &Polynomial, observation: Observation) -> BTreeMap<DetectorSignature, f64> {
    let state = poly.clone().into_state();
    fock::marginal_distribution(&state, projector(observation))
        .into_iter()
        .map(|(occ, p)| (DetectorSignature::from_projected(&occ), p))
        .collect()
}

/// Outcome probabilities of one branch at a single phase, by direct
/// expansion of the full network.
pub fn probabilities_at(
    config: &ExperimentConfig,
    branch: Branch,
    phi: f64,
) -> Result<BTreeMap<DetectorSignature, f64>> {
    let forms = build_forms(config, branch)?;
    let poly = Polynomial::product(&forms.at(phi))?;
    Ok(distribution(&poly, config.observation))
}

/// Exact trigonometric outcome table of one branch, extracted from direct
/// evaluations at `φ ∈ {0, π/2, π}`.
pub fn branch_table(config: &ExperimentConfig, branch: Branch) -> Result<BranchTable> {
    let forms = build_forms(config, branch)?;
    let ground = Polynomial::product(&forms.ground)?;
    let entries = match &forms.star {
        None => distribution(&ground, config.observation)
            .into_iter()
            .map(|(sig, p)| (sig, TrigProbability::constant(p)))
            .collect(),
        Some(star) => {
            let sample = |phi: f64| -> Result<BTreeMap<DetectorSignature, f64>> {
                Ok(distribution(&ground.times(&star.at(phi))?, config.observation))
            };
            let p0 = sample(0.0)?;
            let p_half = sample(FRAC_PI_2)?;
            let p_pi = sample(PI)?;
            let mut keys: Vec<&DetectorSignature> = p0.keys().chain(p_half.keys()).chain(p_pi.keys()).collect();
            keys.sort();
            keys.dedup();
            let at = |m: &BTreeMap<DetectorSignature, f64>, k: &DetectorSignature| m.get(k).copied().unwrap_or(0.0);
            keys.into_iter()
                .map(|k| (k.clone(), TrigProbability::from_samples(at(&p0, k), at(&p_half, k), at(&p_pi, k))))
                .collect()
        }
    };
    Ok(BranchTable {
        branch,
        n: config.n,
        loss_probability: config.loss_probability(),
        entries,
    })
}

/// `P_T(d) = (1−ε) P_A(d) + ε P_B(d, φ)` over detector outcomes.
pub fn mixture_probability(
    absent: &BranchTable,
    present: &BranchTable,
    epsilon: f64,
    phi: f64,
) -> BTreeMap<DetectorSignature, f64> {
    mixture_table(absent, present, epsilon)
        .into_iter()
        .map(|(sig, t)| (sig, t.value(phi)))
        .collect()
}

/// The mixture as trigonometric coefficients per detector outcome.
pub fn mixture_table(
    absent: &BranchTable,
    present: &BranchTable,
    epsilon: f64,
) -> BTreeMap<DetectorSignature, TrigProbability> {
    let mut out: BTreeMap<DetectorSignature, TrigProbability> = BTreeMap::new();
    for (table, weight) in [(absent, 1.0 - epsilon), (present, epsilon)] {
        if weight == 0.0 {
            continue;
        }
        for (sig, t) in table.detector_marginal() {
            let e = out.entry(sig).or_default();
            *e = e.plus(&t.scaled(weight));
        }
    }
    out
}

/// Loss probability at which [`TableSet`] expands the network.
pub const REFERENCE_LOSS: f64 = 0.5;

/// Flat form of a [`TableSet`] for repeated Fisher evaluations: every
/// present-branch outcome with its ground-photon detection and loss counts
/// and the index of its star-absent detector background.
#[derive(Debug, Clone, Default)]
pub(crate) struct CompiledTables {
    pub(crate) present: Vec<CompiledEntry>,
    /// `(ground photons detected, A)` of each absent-branch detector outcome.
    pub(crate) background: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CompiledEntry {
    pub(crate) detected: usize,
    pub(crate) kept: usize,
    pub(crate) lost: usize,
    pub(crate) trig: TrigProbability,
    pub(crate) background: Option<usize>,
}

impl CompiledTables {
    fn new(absent: &BranchTable, present: &BranchTable) -> Self {
        let marginal = absent.detector_marginal();
        let index: BTreeMap<&DetectorSignature, usize> = marginal.keys().enumerate().map(|(i, k)| (k, i)).collect();
        let background = marginal.iter().map(|(k, t)| (k.detected_count(), t.a)).collect();
        let ground = present.n - 1;
        let present = present
            .iter()
            .map(|(sig, t)| {
                let detected = sig.detected_count();
                CompiledEntry {
                    detected,
                    kept: detected - 1,
                    lost: ground + 1 - detected,
                    trig: *t,
                    background: index.get(&sig.detector_part()).copied(),
                }
            })
            .collect();
        CompiledTables { present, background }
    }
}

/// Weight change of an outcome with `kept` detected and `lost` lost ground
/// photons when the loss probability moves from `p_ref` to `p`.
pub(crate) fn loss_factor(p: f64, p_ref: f64, kept: usize, lost: usize) -> f64 {
    ((1.0 - p) / (1.0 - p_ref)).powi(kept as i32) * (p / p_ref).powi(lost as i32)
}

/// Both branch tables of one configuration, expanded once and rescaled
/// exactly to any baseline.
#[derive(Debug, Clone)]
pub struct TableSet {
    config: ExperimentConfig,
    absent: BranchTable,
    present: BranchTable,
    compiled: CompiledTables,
}

impl TableSet {
    /// Expands the network at [`REFERENCE_LOSS`]; `config.alpha` is ignored.
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        let reference = config.with_alpha(alpha_for_loss(REFERENCE_LOSS));
        let absent = branch_table(&reference, Branch::StarAbsent)?;
        let present = branch_table(&reference, Branch::StarPresent)?;
        let compiled = CompiledTables::new(&absent, &present);
        Ok(TableSet {
            config: config.clone(),
            absent,
            present,
            compiled,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub(crate) fn compiled(&self) -> &CompiledTables {
        &self.compiled
    }

    /// `(absent, present)` tables at loss probability `p`.
    pub fn at_loss(&self, p: f64) -> (BranchTable, BranchTable) {
        (self.absent.rescaled(p), self.present.rescaled(p))
    }

    pub fn at_alpha(&self, alpha: f64) -> (BranchTable, BranchTable) {
        self.at_loss(loss_probability(alpha))
    }
}
