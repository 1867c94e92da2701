//! Quick built-in checks against closed-form results, run by the
//! `selftest` subcommand.

use std::f64::consts::LN_2;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circstats::{current_field, extract_phases, resultant, WeightedPhaseSet};
use crate::entropy::{
    chi_squared, entropy_report, full_spectrum_energy, renyi, EntropyConfig, HistogramPMF,
};
use crate::models::{
    assemble_helmholtz, build_ellipse_grid, solve_cavity_modes, two_level_modes, CavitySpec, TwoLevelParams,
};
use crate::nonorth::{petermann, rigidity_report, ExtReal};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn random_pmf(rng: &mut ChaCha8Rng, n: usize) -> HistogramPMF {
    let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>().powi(3)).collect();
    HistogramPMF::from_weights(&w).expect("positive weights")
}

fn pmf_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = random_pmf(&mut rng, 720);
        let chi = chi_squared(&p);
        worst = worst.max((renyi(&p, 2.0) - (720f64.ln() - (1.0 + chi).ln())).abs());
        let sum_sq: f64 = p.probs().iter().map(|x| x * x).sum();
        worst = worst.max((full_spectrum_energy(&p) - 720.0 * sum_sq).abs());
    }
    check("histogram identities", worst < 1e-10, format!("worst deviation {worst:.3e}"))
}

fn two_level_numbers() -> Check {
    let detuned = two_level_modes(&TwoLevelParams::new(1.0, 1.0, 2.0));
    let ep = two_level_modes(&TwoLevelParams::new(0.0, 1.0, 2.0));
    match (detuned, ep) {
        (Ok([m, _]), Ok([e, _])) => {
            let r = rigidity_report(&m, None);
            let k = r.petermann.to_f64();
            let ep_k = rigidity_report(&e, None).petermann;
            let ok = (r.r_abs - 0.924).abs() < 5e-4 && (k - 1.171).abs() < 1e-3 && ep_k == ExtReal::Infinite;
            check("two-level rigidity", ok, format!("|r| = {:.4}, K = {k:.4}, K at EP = {ep_k}", r.r_abs))
        }
        (Err(e), _) | (_, Err(e)) => check("two-level rigidity", false, e.to_string()),
    }
}

fn real_mode_entropies() -> Check {
    let phases: Vec<f64> = (0..400).map(|i| if i % 2 == 0 { std::f64::consts::PI } else { 0.0 }).collect();
    let weights: Vec<f64> = (0..400).map(|i| 1.0 + ((i / 2) as f64 * 0.37).sin().abs()).collect();
    let s = WeightedPhaseSet::new(phases, weights).expect("valid set");
    match entropy_report(&s, &EntropyConfig::default()) {
        Ok(r) => {
            let ok = r.s_folded.abs() < 1e-12 && (r.s_unfolded - LN_2).abs() < 0.05 && resultant(&s, 2).r > 1.0 - 1e-12;
            check("real-mode entropies", ok, format!("folded {:.3e}, unfolded {:.4}", r.s_folded, r.s_unfolded))
        }
        Err(e) => check("real-mode entropies", false, e.to_string()),
    }
}

fn disc_modes() -> Check {
    let spec = CavitySpec::closed(0.0, 1.0, 0.04);
    let run = || -> Result<(f64, f64), String> {
        let g = Arc::new(build_ellipse_grid(&spec).map_err(|e| e.to_string())?);
        let op = assemble_helmholtz(&g, &spec);
        let modes = solve_cavity_modes(&op, &g, 2.0, 1).map_err(|e| e.to_string())?;
        let m = &modes[0];
        let j = current_field(m).map_err(|e| e.to_string())?.max_norm();
        let amp = m.values.as_slice().iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        Ok((m.eigen_k.re, j / (amp / spec.h)))
    };
    match run() {
        Ok((k, j)) => {
            let rel = (k - 2.404_825_557_695_773).abs() / 2.404_825_557_695_773;
            check("disc ground state", rel < 0.01 && j <= 1e-8, format!("k = {k:.5} (rel. error {rel:.2e}), current {j:.1e}"))
        }
        Err(e) => check("disc ground state", false, e),
    }
}

fn petermann_mapping() -> Check {
    let s = WeightedPhaseSet::new(vec![0.0, std::f64::consts::FRAC_PI_2], vec![0.5, 0.5]).expect("valid set");
    let ok = petermann(resultant(&s, 2).r).is_infinite() && petermann(0.5) == ExtReal::Finite(4.0);
    check("petermann mapping", ok, String::new())
}

fn phase_extraction() -> Check {
    let m = two_level_modes(&TwoLevelParams::new(0.4, 1.0, 1.0)).map(|[m, _]| m);
    match m.map_err(|e| e.to_string()).and_then(|m| extract_phases(&m, 0.0).map_err(|e| e.to_string()).map(|s| (m, s))) {
        Ok((m, s)) => {
            let rotated = extract_phases(&m.rotated(1.1), 0.0).expect("same support");
            let d = (resultant(&s, 2).r - resultant(&rotated, 2).r).abs();
            check("global phase invariance", d < 1e-14, format!("R2 change {d:.1e}"))
        }
        Err(e) => check("global phase invariance", false, e),
    }
}

/// Runs every check; takes well under a second in optimized builds.
pub fn run_selftest() -> Vec<Check> {
    vec![pmf_identities(), two_level_numbers(), real_mode_entropies(), petermann_mapping(), phase_extraction(), disc_modes()]
}
