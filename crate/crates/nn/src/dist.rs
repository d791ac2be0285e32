use rand::Rng;

/// Categorical distribution over logits where −∞ marks excluded entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Categorical {
    pub probs: Vec<f64>,
    pub log_probs: Vec<f64>,
}

impl Categorical {
    pub fn from_logits(logits: &[f64]) -> Categorical {
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(max.is_finite(), "no allowed action");
        let sum: f64 = logits.iter().map(|&l| (l - max).exp()).sum();
        let lse = max + sum.ln();
        let log_probs: Vec<f64> = logits.iter().map(|&l| l - lse).collect();
        let probs = log_probs.iter().map(|&lp| lp.exp()).collect();
        Categorical { probs, log_probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn entropy(&self) -> f64 {
        self.probs.iter().zip(&self.log_probs).filter(|(&p, _)| p > 0.0).map(|(&p, &lp)| -p * lp).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last = i;
                if u < acc {
                    return i;
                }
            }
        }
        last
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    /// Adds `scale · ∂ log p(action) / ∂ logits` to `out`.
    pub fn add_log_prob_grad(&self, action: usize, scale: f64, out: &mut [f64]) {
        for (o, &p) in out.iter_mut().zip(&self.probs) {
            *o -= scale * p;
        }
        out[action] += scale;
    }

    /// Adds `scale · ∂ H / ∂ logits` to `out`.
    pub fn add_entropy_grad(&self, scale: f64, out: &mut [f64]) {
        let h = self.entropy();
        for ((o, &p), &lp) in out.iter_mut().zip(&self.probs).zip(&self.log_probs) {
            if p > 0.0 {
                *o -= scale * p * (lp + h);
            }
        }
    }
}
