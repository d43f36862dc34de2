//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any
//! criterion fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use vrsim::dynamics::{
    bare_initial_state, evolve, ground_initial_state, lindblad_rhs, prepare, run_driven_protocol,
    EvolveOptions, LindbladConfig, ProtocolOptions, TimeSeries,
};
use vrsim::linalg::hermitian_eigen;
use vrsim::model::{analytic_optomech_energy, optomech_block};
use vrsim::scenarios::analysis::{correlation, find_peaks, max_abs_diff, max_of};
use vrsim::spectra::{find_min_splitting, perturbative_coupling, SplittingResult};
use vrsim::{AtomState, BareLabel, DriveParams, HilbertSpace, ModelParams, Slot};

const TWO_PHOTON_BRACKET: (f64, f64) = (1.0, 1.1);
const ONE_PHOTON_BRACKET: (f64, f64) = (0.1, 0.3);
const LOCATION_TOL: f64 = 0.003;
const N_STATES: usize = 40;
const N_STATES_DRIVEN: usize = 100;

struct Outcome {
    passed: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            passed: true,
            details: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, what: String) {
        self.details.push(format!("{}{what}", if ok { "" } else { "!! " }));
        self.passed &= ok;
    }
}

fn space() -> HilbertSpace {
    HilbertSpace::default_truncation()
}

fn initial_label() -> BareLabel {
    BareLabel::new(0, 1, AtomState::G)
}

fn two_photon_split() -> SplittingResult {
    find_min_splitting(&ModelParams::two_photon_default(), &space(), TWO_PHOTON_BRACKET)
        .expect("two-photon anticrossing")
}

/// Free evolution from |0,1,g⟩ at the anticrossing.
fn free_run(
    base: ModelParams,
    bracket: (f64, f64),
    config: LindbladConfig,
    omega_eff_t_end: f64,
) -> (SplittingResult, TimeSeries) {
    let split = find_min_splitting(&base, &space(), bracket).expect("anticrossing");
    let params = base.with_omega_q(split.omega_q_min);
    let w = split.omega_eff();
    let setup = prepare(&params, &space(), Some(N_STATES)).expect("dressed operators");
    let (rho0, weight) =
        bare_initial_state(&initial_label(), &space(), &setup.dressed).expect("initial state");
    let times = vrsim::spectra::linspace(0.0, omega_eff_t_end / w, 801);
    let mut ts = evolve(
        &rho0,
        &times,
        &setup.dressed,
        &config,
        None,
        &EvolveOptions {
            omega_eff: w,
            ..EvolveOptions::default()
        },
    )
    .expect("evolution");
    ts.retained_weight = weight;
    (split, ts)
}

fn two_photon_anticrossing() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let split = two_photon_split();
    let elapsed = start.elapsed().as_secs_f64();
    o.require(
        ((split.gap - 6.8e-3) / 6.8e-3).abs() <= 0.10,
        format!("2Ω_eff = {:.4e} (6.8e-3 ± 10%)", split.gap),
    );
    o.require(
        (split.omega_q_min - 1.052).abs() <= LOCATION_TOL,
        format!("ωq = {:.6} (1.052 ± 0.003)", split.omega_q_min),
    );
    o.require(elapsed < 60.0, format!("runtime {elapsed:.2} s (< 60 s)"));
    o
}

fn perturbation_cross_check() -> Outcome {
    let mut o = Outcome::new();
    let split = two_photon_split();
    let base = ModelParams::two_photon_default();
    let pt = 2.0 * perturbative_coupling(&base.with_omega_q(split.omega_q_min)).unwrap().abs();
    o.require(
        ((pt - 6.96e-3) / 6.96e-3).abs() <= 0.005,
        format!("2|V_eff| = {pt:.4e} (≈ 6.96e-3)"),
    );
    let rel = (pt - split.gap).abs() / split.gap;
    o.require(rel <= 0.10, format!("vs numeric {:.2}% (≤ 10%)", 100.0 * rel));

    let mut grid: Vec<f64> = (1..=17).map(|i| 0.005 * i as f64).collect();
    grid.push(0.086);
    grid.extend((0..5).map(|i| 0.09 + 0.0075 * i as f64));
    let mut worst = (0.0, 0.0);
    let mut beyond = Vec::new();
    for &lambda in &grid {
        let p = base.with_couplings(lambda, lambda);
        let r = match find_min_splitting(&p, &space(), (0.98, 1.1)) {
            Ok(r) => r,
            Err(e) => {
                o.require(false, format!("λ = {lambda}: {e}"));
                continue;
            }
        };
        let v = 2.0 * perturbative_coupling(&p.with_omega_q(r.omega_q_min)).unwrap().abs();
        let rel = (v - r.gap).abs() / r.gap;
        if lambda >= 0.086 {
            beyond.push(rel);
        }
        if lambda <= 0.086 && rel > worst.1 {
            worst = (lambda, rel);
        }
    }
    o.require(
        beyond.windows(2).all(|w| w[1] > w[0]),
        format!(
            "discrepancy grows beyond 0.086: {}",
            beyond.iter().map(|x| format!("{:.1}%", 100.0 * x)).collect::<Vec<_>>().join(" ")
        ),
    );
    o.require(
        worst.1 <= 0.10,
        format!(
            "λ ≤ 0.086: worst {:.2}% at λ = {:.3} (≤ 10%)",
            100.0 * worst.1,
            worst.0
        ),
    );
    o
}

fn one_photon_anticrossing() -> Outcome {
    let mut o = Outcome::new();
    match find_min_splitting(&ModelParams::one_photon_default(), &space(), ONE_PHOTON_BRACKET) {
        Ok(split) => {
            o.require(
                ((split.gap - 1.55e-2) / 1.55e-2).abs() <= 0.10,
                format!("2Ω_eff = {:.4e} (1.55e-2 ± 10%)", split.gap),
            );
            o.require(
                (split.omega_q_min - 0.199).abs() <= LOCATION_TOL,
                format!("ωq = {:.6} (0.199 ± 0.003)", split.omega_q_min),
            );
        }
        Err(e) => o.require(false, format!("search failed: {e}")),
    }
    o
}

fn ideal_two_photon(runs: &mut Vec<(String, TimeSeries)>) -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let (split, ts) = free_run(
        ModelParams::two_photon_default(),
        TWO_PHOTON_BRACKET,
        LindbladConfig::ideal(),
        2.0 * PI,
    );
    let elapsed = start.elapsed().as_secs_f64();
    let t = FRAC_PI_2 / split.omega_eff();
    let atom = TimeSeries::interpolate(&ts.exp_atom, &ts.times, t).unwrap();
    let phonon = TimeSeries::interpolate(&ts.exp_phonon, &ts.times, t).unwrap();
    let photon = max_of(&ts.exp_photon);
    let purity = ts.purity.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max);
    o.require(atom >= 0.95, format!("⟨C⁻C⁺⟩(π/2) = {atom:.4} (≥ 0.95)"));
    o.require(phonon <= 0.05, format!("⟨B⁻B⁺⟩(π/2) = {phonon:.4} (≤ 0.05)"));
    o.require(photon <= 0.05, format!("max ⟨A⁻A⁺⟩ = {photon:.4} (≤ 0.05)"));
    o.require(purity <= 1e-7, format!("|Tr ρ² − 1| = {purity:.1e} (≤ 1e-7)"));
    o.require(elapsed < 120.0, format!("runtime {elapsed:.2} s (< 120 s)"));
    runs.push(("two-photon ideal".into(), ts));
    o
}

fn cavity_loss(runs: &mut Vec<(String, TimeSeries)>) -> Outcome {
    let mut o = Outcome::new();
    let config = LindbladConfig {
        gamma_a: 1e-2,
        gamma_m: 0.0,
        gamma_q: 0.0,
    };
    let (split, ts) = free_run(
        ModelParams::two_photon_default(),
        TWO_PHOTON_BRACKET,
        config,
        2.0 * PI,
    );
    let quarter = 0.25 * PI / split.omega_eff();
    let first = find_peaks(&ts.times, &ts.exp_atom, quarter, 0.05)
        .first()
        .map_or(f64::NAN, |p| p.value);
    o.require(first >= 0.9, format!("first atomic maximum {first:.4} (≥ 0.9)"));
    runs.push(("two-photon γa = 1e-2".into(), ts));
    o
}

fn one_photon_dynamics(runs: &mut Vec<(String, TimeSeries)>) -> Outcome {
    let mut o = Outcome::new();
    let base = ModelParams::one_photon_default();
    let (split, ts) = free_run(base, ONE_PHOTON_BRACKET, LindbladConfig::ideal(), 4.0 * PI);
    let photon = max_of(&ts.exp_photon);
    let atom = max_of(&ts.exp_atom);
    let corr = correlation(&ts.exp_photon, &ts.exp_atom);
    let dev = max_abs_diff(&ts.exp_atom, &ts.g2_qp);
    o.require(photon >= 0.9, format!("max ⟨A⁻A⁺⟩ = {photon:.4} (≥ 0.9)"));
    o.require(atom >= 0.9, format!("max ⟨C⁻C⁺⟩ = {atom:.4} (≥ 0.9)"));
    o.require(corr >= 0.95, format!("photon/atom correlation {corr:.4} (≥ 0.95)"));
    o.require(dev <= 0.05, format!("max |⟨C⁻C⁺⟩ − G²| = {dev:.4} (≤ 0.05)"));
    let mismatch = split.omega_q_min + base.omega_c - base.omega_m;
    o.require(
        mismatch.abs() <= LOCATION_TOL,
        format!("ωq + ωc − ωm = {mismatch:.4} (|·| ≤ 0.003)"),
    );
    runs.push(("one-photon ideal".into(), ts));
    o
}

fn driven_protocol(runs: &mut Vec<(String, TimeSeries)>) -> Outcome {
    let mut o = Outcome::new();
    let split = two_photon_split();
    let params = ModelParams::two_photon_default().with_omega_q(split.omega_q_min);
    let w = split.omega_eff();
    let sigma = 1.0 / (10.0 * w);
    let times = vrsim::spectra::linspace(0.0, (0.5 + 3.0 * PI) / w, 601);
    let run = |amplitude: f64| {
        let drive = DriveParams {
            amplitude,
            omega_d: params.omega_m,
            sigma_pulse: sigma,
            t0: 5.0 * sigma,
        };
        let options = ProtocolOptions {
            times: times.clone(),
            n_states: Some(N_STATES_DRIVEN),
            bracket: TWO_PHOTON_BRACKET,
            evolve: EvolveOptions::default(),
        };
        run_driven_protocol(&params, &space(), &LindbladConfig::uniform(1e-4), &drive, &options)
            .expect("driven run")
            .series
    };
    let (weak, strong) = std::thread::scope(|s| {
        let a = s.spawn(|| run(PI / 4.0));
        let b = s.spawn(|| run(PI));
        (a.join().unwrap(), b.join().unwrap())
    });
    let (pw, ps) = (max_of(&weak.exp_phonon), max_of(&strong.exp_phonon));
    o.require(
        ps > pw,
        format!("peak ⟨B⁻B⁺⟩: Λ=π {ps:.4} > Λ=π/4 {pw:.4}"),
    );
    for (name, ts) in [("π/4", &weak), ("π", &strong)] {
        let photon = max_of(&ts.exp_photon);
        o.require(
            photon <= 0.05,
            format!("Λ={name}: max ⟨A⁻A⁺⟩ = {photon:.4} (≤ 0.05)"),
        );
    }
    runs.push(("driven Λ=π/4".into(), weak));
    runs.push(("driven Λ=π".into(), strong));
    o
}

fn property_suite(runs: &[(String, TimeSeries)]) -> Outcome {
    let mut o = Outcome::new();

    // invariants over every dynamics run above plus a fully damped one
    let mut worst_trace = 0.0_f64;
    let mut worst_herm = 0.0_f64;
    let mut lowest_eig = f64::INFINITY;
    for (_, ts) in runs {
        worst_trace = worst_trace.max(ts.max_trace_error());
        worst_herm = worst_herm.max(ts.max_hermiticity_error());
        lowest_eig = lowest_eig.min(ts.min_eigenvalue());
    }
    o.require(
        worst_trace <= 1e-6,
        format!("|Tr ρ − 1| ≤ {worst_trace:.1e} over {} runs (≤ 1e-6)", runs.len()),
    );
    o.require(worst_herm <= 1e-8, format!("‖ρ − ρ†‖ ≤ {worst_herm:.1e} (≤ 1e-8)"));
    o.require(lowest_eig >= -1e-7, format!("min eig ρ = {lowest_eig:.1e} (≥ −1e-7)"));

    // dressed ground state under the full dissipative generator
    let params = ModelParams::two_photon_default().with_omega_q(two_photon_split().omega_q_min);
    let setup = prepare(&params, &space(), None).unwrap();
    let rho = ground_initial_state(&setup.dressed);
    let config = LindbladConfig {
        gamma_a: 1e-2,
        gamma_m: 1e-3,
        gamma_q: 5e-4,
    };
    let rhs = lindblad_rhs(
        &rho,
        0.0,
        &setup.dressed.hamiltonian(),
        &setup.dressed,
        &config,
        None,
    );
    let norm = rhs.norm();
    o.require(norm < 1e-8, format!("ground-state ‖ρ̇‖ = {norm:.1e} (< 1e-8)"));

    // analytic optomechanical spectrum with phonon headroom, k ≤ 6
    let wide = HilbertSpace::new(10, 20).unwrap();
    let p = ModelParams::two_photon_default();
    let block = optomech_block(&p, &wide).unwrap();
    let nm = wide.factor_dim(Slot::Mechanics);
    let mut worst_spec = 0.0_f64;
    for n in 0..wide.n_photon_max() {
        let sub = block.matrix().view((n * nm, n * nm), (nm, nm)).into_owned();
        let (vals, _) = hermitian_eigen(&sub);
        for k in 0..=6 {
            worst_spec = worst_spec.max((vals[k] - analytic_optomech_energy(n, k, &p)).abs());
        }
    }
    o.require(
        worst_spec <= 1e-6,
        format!("optomechanical spectrum error {worst_spec:.1e} (≤ 1e-6)"),
    );

    // cutoff increase by two
    let g0 = two_photon_split().gap;
    let g1 = find_min_splitting(
        &ModelParams::two_photon_default(),
        &space().enlarged(2),
        TWO_PHOTON_BRACKET,
    )
    .unwrap()
    .gap;
    let rel = (g1 - g0).abs() / g0;
    o.require(rel < 0.01, format!("gap change under cutoff +2: {rel:.1e} (< 1%)"));

    // dissipative dynamics is the same on the kept block as on the full space
    let (rho0, _) = bare_initial_state(&initial_label(), &space(), &setup.dressed).unwrap();
    let small = setup.dressed.truncated(N_STATES);
    let (rho_small, _) = bare_initial_state(&initial_label(), &space(), &small).unwrap();
    let times = vrsim::spectra::linspace(0.0, 600.0, 61);
    let opts = EvolveOptions::default();
    let full = evolve(&rho0, &times, &setup.dressed, &config, None, &opts).unwrap();
    let kept = evolve(&rho_small, &times, &small, &config, None, &opts).unwrap();
    let diff = max_abs_diff(&full.exp_atom, &kept.exp_atom);
    o.require(
        diff < 1e-3,
        format!("⟨C⁻C⁺⟩ with {N_STATES} vs all states: {diff:.1e} (< 1e-3)"),
    );
    o
}

fn main() {
    let mut runs = Vec::new();
    let criteria: Vec<(&str, Box<dyn FnOnce(&mut Vec<(String, TimeSeries)>) -> Outcome>)> = vec![
        ("two-photon anticrossing", Box::new(|_| two_photon_anticrossing())),
        ("perturbative coupling cross-check", Box::new(|_| perturbation_cross_check())),
        ("one-photon anticrossing", Box::new(|_| one_photon_anticrossing())),
        ("ideal two-photon dynamics", Box::new(ideal_two_photon)),
        ("cavity-loss robustness", Box::new(cavity_loss)),
        ("one-photon dynamics", Box::new(one_photon_dynamics)),
        ("driven protocol", Box::new(driven_protocol)),
        ("property suite", Box::new(|r: &mut Vec<(String, TimeSeries)>| property_suite(r))),
    ];
    let total = criteria.len();
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check(&mut runs);
        if !outcome.passed {
            failed += 1;
        }
        println!(
            "{} [{}] {name} ({:.1} s): {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64(),
            outcome.details.join("; ")
        );
    }
    println!("acceptance: {} of {total} criteria passed", total - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
