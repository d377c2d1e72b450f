use cascade_qed::correlator::{correlator_expansion, CorrelatorTerms};
use cascade_qed::ensemble::{
    cross_term_visibility, ensemble_indistinguishability_with, DiffusionSpec, EnsembleAverage,
};
use cascade_qed::rate::transfer_rate_r1;
use cascade_qed::{ensemble_efficiency, ensemble_indistinguishability, indistinguishability, Mode, SystemParams};

fn figure_sets() -> [SystemParams; 2] {
    [SystemParams::cascaded(500.0, 50.0, 3.0, 10.0), SystemParams::cascaded(500.0, 50.0, 150.0, 300.0)]
}

#[test]
fn node_count_has_converged_for_moderate_widths() {
    for p in figure_sets() {
        for fwhm in [100.0, 1000.0] {
            let s15 = DiffusionSpec::new(fwhm);
            let s31 = DiffusionSpec::new(fwhm).with_nodes(31);
            let de = ensemble_efficiency(&p, &s15).unwrap() - ensemble_efficiency(&p, &s31).unwrap();
            let di =
                ensemble_indistinguishability(&p, &s15).unwrap() - ensemble_indistinguishability(&p, &s31).unwrap();
            assert!(de.abs() < 1e-4 && di.abs() < 1e-4, "fwhm {fwhm}: {de} {di}");
        }
    }
}

#[test]
fn mixing_cannot_beat_the_best_component() {
    for p in figure_sets() {
        let spec = DiffusionSpec::new(1000.0);
        let grid = spec.grid();
        let best = grid
            .nodes
            .iter()
            .map(|x| indistinguishability(&p.with_delta(*x), Mode::Cavity2).unwrap().value)
            .fold(0.0, f64::max);
        for average in [EnsembleAverage::CrossTerms, EnsembleAverage::PerDetuningAverage] {
            let v = ensemble_indistinguishability_with(&p, &spec, average).unwrap();
            assert!(v <= best + 1e-9, "{average:?}: {v} > {best}");
        }
    }
}

#[test]
fn reflecting_the_distribution_changes_nothing() {
    let p = SystemParams::cascaded(500.0, 50.0, 150.0, 300.0);
    let spec = DiffusionSpec::new(500.0);
    let plus = p.with_delta(120.0);
    let minus = p.with_delta(-120.0);
    let de = ensemble_efficiency(&plus, &spec).unwrap() - ensemble_efficiency(&minus, &spec).unwrap();
    let di =
        ensemble_indistinguishability(&plus, &spec).unwrap() - ensemble_indistinguishability(&minus, &spec).unwrap();
    assert!(de.abs() < 1e-10 && di.abs() < 1e-10, "{de} {di}");
}

#[test]
fn wide_diffusion_halves_transfer_limited_efficiency() {
    // R1 ≪ γ, so η tracks the Lorentzian R1(δ); the Gaussian is twice as
    // wide as that Lorentzian, which needs more than the default 15 nodes.
    let p = SystemParams::cascaded(2.0, 50.0, 3.0, 10.0);
    let width = p.total_dephasing() + p.kappa1;
    let spec = DiffusionSpec::new(2.0 * width).with_nodes(31);
    let eta0 = cascade_qed::efficiency(&p).unwrap();
    let ratio = ensemble_efficiency(&p, &spec).unwrap() / eta0;
    assert!(ratio < 0.5, "{ratio}");
    let grid = spec.grid();
    let r0 = transfer_rate_r1(&p);
    let oracle: f64 =
        grid.nodes.iter().zip(&grid.weights).map(|(x, w)| w * transfer_rate_r1(&p.with_delta(*x)) / r0).sum();
    assert!((ratio / oracle - 1.0).abs() < 0.02, "{ratio} vs {oracle}");
}

#[test]
fn degenerate_two_point_distribution() {
    let p = SystemParams::cascaded(500.0, 50.0, 3.0, 10.0);
    let e = correlator_expansion(&p, Mode::Cavity2, CorrelatorTerms::Full).unwrap();
    let v = cross_term_visibility(&[0.5, 0.5], &[e.clone(), e]);
    let zero = ensemble_indistinguishability(&p, &DiffusionSpec::new(0.0)).unwrap();
    assert!((v - zero).abs() < 1e-12);
}

#[test]
fn parallel_evaluation_is_bit_stable() {
    let p = SystemParams::cascaded(500.0, 50.0, 150.0, 300.0);
    let spec = DiffusionSpec::new(800.0);
    let a = ensemble_indistinguishability(&p, &spec).unwrap();
    let b = ensemble_indistinguishability(&p, &spec).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
}
