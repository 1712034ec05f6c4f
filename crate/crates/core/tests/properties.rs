use std::collections::BTreeMap;
use std::f64::consts::PI;

use proptest::prelude::*;

use qtel::fisher::{fisher_at, resolution};
use qtel::fock::{Label, LinearMap, ModeKind};
use qtel::protocol::{
    alpha_for_loss, branch_table, mixture_probability, probabilities_at, Branch, DetectorSignature,
    ExperimentConfig, NuPolicy, TableSet,
};

fn config(n: usize, epsilon: f64, indist: Vec<f64>, alpha: f64, nu_policy: NuPolicy) -> ExperimentConfig {
    ExperimentConfig {
        n,
        epsilon,
        indist,
        alpha,
        nu_policy,
        ..ExperimentConfig::default()
    }
}

fn small_config() -> impl Strategy<Value = ExperimentConfig> {
    (2usize..=3, 0.0..=1.0f64, 0.0..6.0f64, any::<bool>())
        .prop_flat_map(|(n, eps, alpha, shared)| {
            let policy = if shared { NuPolicy::SharedNu } else { NuPolicy::DistinctNu };
            prop::collection::vec(0.0..=1.0f64, n - 1).prop_map(move |ind| config(n, eps, ind, alpha, policy))
        })
}

fn mixture(cfg: &ExperimentConfig, phi: f64) -> BTreeMap<DetectorSignature, f64> {
    let absent = branch_table(cfg, Branch::StarAbsent).unwrap();
    let present = branch_table(cfg, Branch::StarPresent).unwrap();
    mixture_probability(&absent, &present, cfg.epsilon, phi)
}

fn relabel_nu(sig: &DetectorSignature) -> DetectorSignature {
    DetectorSignature {
        detected: sig.detected.project(|m| {
            Some(match m.label {
                Label::Nu(_) => m.with_label(Label::Nu(0)),
                Label::Mu => *m,
            })
        }),
        lost: sig.lost.clone(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mixture_is_normalized(cfg in small_config(), phi in -PI..PI) {
        let total: f64 = mixture(&cfg, phi).values().sum();
        prop_assert!((total - 1.0).abs() < 1e-12, "sum {}", total);
    }

    #[test]
    fn mirror_reverses_phase(cfg in small_config(), phi in -PI..PI) {
        let forward = mixture(&cfg, phi);
        let backward = mixture(&cfg, -phi);
        for (sig, p) in &forward {
            let q = backward.get(&sig.mirrored()).copied().unwrap_or(0.0);
            prop_assert!((p - q).abs() < 1e-12, "{}: {} vs {}", sig, p, q);
        }
    }

    #[test]
    fn trig_reconstruction_is_exact(cfg in small_config(), phi in -PI..PI) {
        let table = branch_table(&cfg, Branch::StarPresent).unwrap();
        let direct = probabilities_at(&cfg, Branch::StarPresent, phi).unwrap();
        for (sig, t) in table.iter() {
            let exact = direct.get(sig).copied().unwrap_or(0.0);
            prop_assert!((t.value(phi) - exact).abs() < 1e-12);
        }
        for (sig, p) in &direct {
            prop_assert!(table.get(sig).is_some() || p.abs() < 1e-15);
        }
    }

    #[test]
    fn fisher_is_non_negative_and_additive(cfg in small_config(), phi in -PI..PI) {
        let f = fisher_at(&cfg.with_phi(phi)).unwrap();
        prop_assert!(f.total >= 0.0);
        prop_assert!(f.by_sector.values().all(|&v| v >= 0.0));
        let sum: f64 = f.by_sector.values().sum();
        prop_assert!((sum - f.total).abs() <= 1e-12 * f.total.max(1.0));
    }

    #[test]
    fn no_star_or_no_overlap_gives_no_information(cfg in small_config(), phi in -PI..PI) {
        let dark = ExperimentConfig { epsilon: 0.0, ..cfg.clone() };
        prop_assert_eq!(fisher_at(&dark.with_phi(phi)).unwrap().total, 0.0);
        let distinct = ExperimentConfig { indist: vec![0.0; cfg.n - 1], ..cfg };
        prop_assert!(fisher_at(&distinct.with_phi(phi)).unwrap().total.abs() < 1e-14);
    }

    #[test]
    fn resolution_scales_inversely_with_baseline(alpha in 0.1..20.0f64, f in 1e-6..1.0f64) {
        let cfg = ExperimentConfig::uniform(2, 1.0, 1.0, alpha);
        let r = resolution(&cfg, f).unwrap();
        let invariant = r.delta_theta_rad * alpha * f.sqrt();
        let expected = cfg.wavelength_m / (2.0 * PI * cfg.attenuation_length_m);
        prop_assert!((invariant / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shared_and_distinct_nu_agree_for_two_photons(eps in 0.0..=1.0f64, i in 0.0..=1.0f64, alpha in 0.0..6.0f64, phi in -PI..PI) {
        let distinct = mixture(&config(2, eps, vec![i], alpha, NuPolicy::DistinctNu), phi);
        let shared = mixture(&config(2, eps, vec![i], alpha, NuPolicy::SharedNu), phi);
        let mut relabeled: BTreeMap<DetectorSignature, f64> = BTreeMap::new();
        for (sig, p) in &distinct {
            *relabeled.entry(relabel_nu(sig)).or_default() += p;
        }
        for (sig, p) in &shared {
            let q = relabeled.get(sig).copied().unwrap_or(0.0);
            prop_assert!((p - q).abs() < 1e-12);
        }
    }
}

#[test]
fn linear_maps_are_isometries() {
    let labels = [Label::Mu, Label::Nu(2), Label::Nu(3)];
    for n in 2..=5 {
        assert!(LinearMap::qft(n, ModeKind::DetectorLeft, &labels).isometry_defect() < 1e-12);
    }
    for indist in [0.0, 0.3, 0.96, 1.0] {
        let m = LinearMap::distinguishability(2, indist, Label::Nu(2), &[ModeKind::DetectorLeft, ModeKind::DetectorRight]);
        assert!(m.isometry_defect() < 1e-12);
    }
    for eta in [0.0, 0.5, 0.9, 1.0] {
        assert!(LinearMap::loss(2, eta, &labels).isometry_defect() < 1e-12);
    }
}

#[test]
fn long_baseline_kills_information() {
    for n in 2..=3 {
        let cfg = ExperimentConfig::uniform(n, 1.0, 1.0, 60.0);
        assert!(fisher_at(&cfg).unwrap().total < 1e-12);
    }
}

#[test]
fn information_falls_with_loss() {
    for n in 2..=3 {
        let tables = TableSet::build(&ExperimentConfig::uniform(n, 1.0, 1.0, 0.0)).unwrap();
        let values: Vec<f64> = (0..50)
            .map(|k| tables.fisher(alpha_for_loss(k as f64 / 50.0), 0.3).total)
            .collect();
        assert!(values.windows(2).all(|w| w[1] <= w[0] + 1e-15), "N={n}: {values:?}");
    }
}

#[test]
fn ideal_fisher_is_even_in_phase() {
    for n in 2..=3 {
        let tables = TableSet::build(&ExperimentConfig::uniform(n, 1.0, 1.0, 0.0)).unwrap();
        for k in 1..12 {
            let phi = k as f64 * PI / 12.0;
            let plus = tables.fisher(0.0, phi).total;
            let minus = tables.fisher(0.0, -phi).total;
            assert!((plus - minus).abs() < 1e-12, "N={n} phi={phi}");
        }
    }
}
