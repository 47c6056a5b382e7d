//! Encodes one vector with each sparsifier and prints the resulting
//! messages: which coordinates survive, what values go on the wire, and
//! how the magnitude-proportional scheme assigns keep probabilities.
//!
//! Run with: cargo run --example encoders

use corrmean::sparsify::{wangni_probabilities, EncoderSpec};
use corrmean::{rng, DenseVector};

fn show(name: &str, indices: &[usize], values: &[f64]) {
    let pairs: Vec<String> = indices
        .iter()
        .zip(values)
        .map(|(j, v)| format!("{j}:{v:+.3}"))
        .collect();
    println!("  {name:<10} {}", pairs.join("  "));
}

fn main() -> corrmean::Result<()> {
    let x = DenseVector::new(vec![0.1, -2.4, 0.0, 3.2, -0.5, 0.9, -1.1, 0.2])?;
    let k = 3;
    println!("input x = {:?}, budget k = {k}", x.values());
    println!();

    let mut stream = rng::stream(7, "example.encoders");
    for encoder in [
        EncoderSpec::rand_k(k),
        EncoderSpec::top_k(k),
        EncoderSpec::wangni(k),
        EncoderSpec::induced(k, 0.5)?,
    ] {
        let msg = encoder.encode(&x, &mut stream)?;
        show(encoder.label(), msg.indices(), msg.values());
    }

    println!();
    println!("rand_k ships raw values; the decoder rescales by d/k.");
    println!("top_k keeps the largest magnitudes and is biased on its own.");
    println!("wangni pre-scales by 1/p_j so a plain average is unbiased:");
    let probs = wangni_probabilities(&x, k)?;
    let line: Vec<String> = probs.iter().map(|p| format!("{p:.3}")).collect();
    println!("  keep probabilities: [{}]  (sum = {:.3})", line.join(", "),
        probs.iter().sum::<f64>());
    let induced = EncoderSpec::induced(k, 0.5)?;
    println!(
        "induced runs top-{} then a scaled rand-{} pass on the residual,",
        induced.induced_top_budget()?,
        k - induced.induced_top_budget()?
    );
    println!("  which cancels the top stage's bias in expectation.");
    Ok(())
}
