//! The noise families, their Bell-label shift distributions, and sampling.
use qpa::{NoiseModel, Pauli};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn show(name: &str, m: &NoiseModel) {
    let s = m.label_shift_distribution();
    println!(
        "{name:<22} f00 {:.6}  shift (00 01 10 11): {:.6} {:.6} {:.6} {:.6}",
        m.fidelity(),
        s[0],
        s[1],
        s[2],
        s[3]
    );
}

fn main() -> qpa::Result<()> {
    show("product f0 = 0.97", &NoiseModel::from_one_qubit_depolarizing(0.97)?);
    show("one-sided f0 = 0.97", &NoiseModel::from_one_sided_depolarizing(0.97)?);
    show("uniform f00 = 0.97", &NoiseModel::from_uniform_residual(0.97)?);

    let m = NoiseModel::from_one_sided_depolarizing(0.9)?;
    let sampler = m.sampler();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 200_000;
    let mut counts = [0usize; 16];
    for _ in 0..n {
        let (mu, nu) = sampler.sample(&mut rng);
        counts[4 * mu.index() + nu.index()] += 1;
    }
    println!("\none-sided f0 = 0.9, {n} draws (Alice x Bob):");
    for mu in Pauli::ALL {
        let nu = Pauli::I;
        let k = 4 * mu.index() + nu.index();
        println!(
            "  {mu:?} x {nu:?}: empirical {:.4}  exact {:.4}",
            counts[k] as f64 / n as f64,
            m.probability(mu, nu)
        );
    }
    Ok(())
}
