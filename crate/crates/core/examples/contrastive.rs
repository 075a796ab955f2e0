//! The label-selected contrastive loss on hand-made latents: it is low when
//! same-class vectors point the same way, ln(N-1) when every vector is
//! identical, and blind to vector length.
//!
//!     cargo run --release --example contrastive -- [temperature]

use skelsign::data::GestureLabel::{Bi, Mono};
use skelsign::training::contrastive_loss;

fn main() -> skelsign::Result<()> {
    let tau: f64 = std::env::args()
        .nth(1)
        .map_or(0.5, |v| v.parse().expect("temperature"));
    let labels = [Mono, Mono, Bi, Bi];

    let clustered = [[1.0, 0.1], [0.9, -0.1], [-1.0, 0.05], [-0.8, -0.1]];
    let mixed = [[1.0, 0.1], [-1.0, 0.05], [0.9, -0.1], [-0.8, -0.1]];
    let same = [[1.0, 1.0]; 4];
    for (name, latents) in [
        ("clustered", &clustered),
        ("mixed", &mixed),
        ("identical", &same),
    ] {
        let c = contrastive_loss(latents, &labels, tau)?;
        println!("{name:<10} loss {:.4}", c.loss);
    }
    println!("ln 3 = {:.4}", 3f64.ln());

    let scaled: Vec<Vec<f64>> = clustered
        .iter()
        .map(|v| v.iter().map(|x| x * 10.0).collect())
        .collect();
    let c = contrastive_loss(&scaled, &labels, tau)?;
    println!("clustered ×10 loss {:.4}", c.loss);
    println!("gradient for the first latent {:?}", c.grads[0]);
    Ok(())
}
