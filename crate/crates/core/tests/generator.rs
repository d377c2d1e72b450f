use cascade_qed::model::liouvillian_generator;
use cascade_qed::numerics::{eigenvalues, CMat};
use cascade_qed::{build_liouvillian, SystemParams};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const E: usize = 0;
const A: usize = 1;
const B: usize = 2;

fn at(rho: &[[C64; 3]; 3], i: usize, j: usize) -> C64 {
    rho[i][j]
}

/// The single-excitation master equation written out element by element.
fn hand_rhs(p: &SystemParams, rho: &[[C64; 3]; 3]) -> [[C64; 3]; 3] {
    let i = C64::new(0.0, 1.0);
    let r = |a, b| at(rho, a, b);
    let (g1, g2, d) = (p.g1, p.g2, p.delta);
    let ee = -i * g1 * (r(A, E) - r(E, A)) - p.gamma * r(E, E);
    let ea = -i * (d * r(E, A) + g1 * r(A, A) - g1 * r(E, E) - g2 * r(E, B))
        - 0.5 * (p.gamma + p.gamma_star + p.kappa1) * r(E, A);
    let eb = -i * (d * r(E, B) + g1 * r(A, B) - g2 * r(E, A)) - 0.5 * (p.gamma + p.gamma_star + p.kappa2) * r(E, B);
    let aa = -i * (g1 * r(E, A) + g2 * r(B, A) - g1 * r(A, E) - g2 * r(A, B)) - p.kappa1 * r(A, A);
    let ab = -i * (g1 * r(E, B) + g2 * r(B, B) - g2 * r(A, A)) - 0.5 * (p.kappa1 + p.kappa2) * r(A, B);
    let bb = -i * g2 * (r(A, B) - r(B, A)) - p.kappa2 * r(B, B);
    [[ee, ea, eb], [ea.conj(), aa, ab], [eb.conj(), ab.conj(), bb]]
}

fn random_params(rng: &mut StdRng) -> SystemParams {
    SystemParams::cascaded(
        rng.gen_range(0.0..800.0),
        rng.gen_range(0.1..800.0),
        rng.gen_range(0.0..800.0),
        rng.gen_range(0.1..800.0),
    )
    .with_gamma(rng.gen_range(0.1..5.0))
    .with_gamma_star(rng.gen_range(0.0..1e4))
    .with_delta(rng.gen_range(-300.0..300.0))
}

fn random_hermitian(rng: &mut StdRng) -> [[C64; 3]; 3] {
    let mut rho = [[C64::new(0.0, 0.0); 3]; 3];
    for a in 0..3 {
        rho[a][a] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
        for b in a + 1..3 {
            let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            rho[a][b] = z;
            rho[b][a] = z.conj();
        }
    }
    rho
}

fn vectorise(rho: &[[C64; 3]; 3]) -> Vec<C64> {
    (0..9).map(|k| rho[k % 3][k / 3]).collect()
}

#[test]
fn generator_matches_elementwise_equations() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let rho = random_hermitian(&mut rng);
        let got = liouvillian_generator(&p).matvec(&vectorise(&rho));
        let want = vectorise(&hand_rhs(&p, &rho));
        let scale =
            [p.gamma, p.gamma_star, p.g1, p.kappa1, p.g2, p.kappa2, p.delta.abs()].into_iter().fold(0.0, f64::max);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() <= 1e-10 * scale, "{g} vs {w} for {p:?}");
        }
    }
}

#[test]
fn spectrum_is_closed_under_conjugation() {
    let mut rng = StdRng::seed_from_u64(12);
    for _ in 0..30 {
        let p = random_params(&mut rng);
        let values = eigenvalues(&liouvillian_generator(&p)).unwrap();
        let scale = p.fastest_scale();
        for v in &values {
            let nearest = values.iter().map(|w| (w - v.conj()).norm()).fold(f64::INFINITY, f64::min);
            assert!(nearest <= 1e-8 * scale, "no partner for {v} in {values:?}");
        }
    }
}

#[test]
fn cached_decomposition_reconstructs_generator() {
    let p = SystemParams::cascaded(500.0, 50.0, 10.0, 1.0);
    let l = build_liouvillian(&p).unwrap();
    let rebuilt = l.spectrum.reconstruct();
    let diff: f64 = (&rebuilt - &l.generator).norm_fro();
    assert!(diff <= 1e-9 * l.generator.norm_fro());
    // ρ_ea sits at vec index 0 + 3·1
    assert!((l.generator[(3, 3)].re + 5025.5).abs() < 1e-9);
}

fn psd_from(rng_vals: &[f64]) -> [[C64; 3]; 3] {
    // ρ = X X† for a random complex 3×3 X
    let x = CMat::from_fn(3, 3, |i, j| C64::new(rng_vals[2 * (3 * i + j)], rng_vals[2 * (3 * i + j) + 1]));
    let rho = x.matmul(&x.adjoint());
    let mut out = [[C64::new(0.0, 0.0); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = rho[(i, j)];
        }
    }
    out
}

proptest! {
    #[test]
    fn trace_never_increases(
        g1 in 0.0..1000.0f64,
        kappa1 in 0.1..1000.0f64,
        g2 in 0.0..1000.0f64,
        kappa2 in 0.1..1000.0f64,
        gamma_star in 0.0..1e4f64,
        delta in -500.0..500.0f64,
        x in proptest::collection::vec(-1.0..1.0f64, 18),
    ) {
        let p = SystemParams::cascaded(g1, kappa1, g2, kappa2).with_gamma_star(gamma_star).with_delta(delta);
        let rho = psd_from(&x);
        let d = liouvillian_generator(&p).matvec(&vectorise(&rho));
        let trace_rate = d[0] + d[4] + d[8];
        let leak = -(p.gamma * rho[0][0].re + p.kappa1 * rho[1][1].re + p.kappa2 * rho[2][2].re);
        let scale = p.fastest_scale() * x.iter().map(|v| v * v).sum::<f64>().max(1.0);
        prop_assert!((trace_rate.re - leak).abs() <= 1e-10 * scale);
        prop_assert!(trace_rate.im.abs() <= 1e-10 * scale);
        prop_assert!(trace_rate.re <= 1e-10 * scale);
    }
}
