use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zxrl_core::env::{observe, EnvConfig};
use zxrl_core::sampler::{sample_diagram, SamplerConfig};
use zxrl_nn::{CriticNet, GraphBatch, NetConfig, Network, PolicyNet};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let obs: Vec<_> = (0..256)
        .map(|_| observe(&sample_diagram(&SamplerConfig::with_spiders(5..=8), &mut rng), 100, &EnvConfig::default()))
        .collect();
    let refs: Vec<_> = obs.iter().collect();
    for hidden in [32, 64, 128] {
        let cfg = NetConfig { hidden, depth: 6 };
        let p = PolicyNet::new(cfg, &mut rng);
        let c = CriticNet::new(cfg, &mut rng);
        let t = Instant::now();
        for o in &refs {
            p.forward(&GraphBatch::new(&[o])).unwrap();
            c.forward(&GraphBatch::new(&[o])).unwrap();
        }
        let single = t.elapsed().as_secs_f64() / refs.len() as f64;
        let t = Instant::now();
        let b = GraphBatch::new(&refs);
        let f = p.forward(&b).unwrap();
        let mut g = p.zeros_like();
        let d: Vec<f64> = vec![0.01; b.mask.len()];
        p.backward(&b, &f, &d, &mut g);
        let fc = c.forward(&b).unwrap();
        let mut gc = c.zeros_like();
        c.backward(&b, &fc, &vec![0.1; refs.len()], &mut gc);
        let batched = t.elapsed().as_secs_f64() / refs.len() as f64;
        println!("hidden {hidden}: single fwd {:.1} us/obs, batched fwd+bwd {:.1} us/obs", single * 1e6, batched * 1e6);
    }
}
