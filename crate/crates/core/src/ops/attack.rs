//! l∞-bounded adversarial perturbations: single-step FGSM from a random
//! start, and its iterated (PGD) form. Both clamp the perturbation back into
//! `[−ε, ε]` elementwise after every step, so containment holds exactly.

use crate::error::{Error, Result};
use crate::tensor::Tensor;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Anything that can report a loss and its gradient with respect to the
/// input, for a fixed label. Attacks never mutate the model.
pub trait GradientOracle {
    fn loss_and_input_grad(&self, input: &Tensor, label: usize) -> Result<(f64, Tensor)>;
}

/// Threat-model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    /// l∞ budget ε; 0 disables the perturbation entirely.
    pub epsilon: f64,
    /// Signed-gradient step size α.
    pub alpha: f64,
    /// Number of signed-gradient steps (1 = single-step FGSM).
    pub steps: usize,
    /// Start from a uniform draw in [−ε, ε] instead of zero.
    pub random_init: bool,
}

impl AttackConfig {
    /// Single-step attack with random start and the customary α = 1.25·ε.
    pub fn fgsm(epsilon: f64) -> AttackConfig {
        AttackConfig { epsilon, alpha: 1.25 * epsilon, steps: 1, random_init: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::Config(format!(
                "attack epsilon must be finite and non-negative, got {}",
                self.epsilon
            )));
        }
        if self.steps >= 1 && self.epsilon > 0.0 && !(self.alpha > 0.0) {
            return Err(Error::Config(format!(
                "attack alpha must be positive when stepping, got {}",
                self.alpha
            )));
        }
        if !self.alpha.is_finite() {
            return Err(Error::Config("attack alpha must be finite".into()));
        }
        if self.steps == 0 {
            return Err(Error::Config("attack needs at least one step".into()));
        }
        Ok(())
    }
}

fn signum_zero_aware(g: f64) -> f64 {
    if g > 0.0 {
        1.0
    } else if g < 0.0 {
        -1.0
    } else {
        0.0 // covers ±0.0; NaN is rejected before this is reached
    }
}

fn initial_delta<R: Rng>(shape: &[usize], cfg: &AttackConfig, rng: &mut R) -> Tensor {
    if cfg.random_init && cfg.epsilon > 0.0 {
        let len: usize = shape.iter().product();
        let data = (0..len).map(|_| rng.gen_range(-cfg.epsilon..cfg.epsilon)).collect();
        Tensor::from_vec(shape, data).expect("length matches shape")
    } else {
        Tensor::zeros(shape)
    }
}

fn signed_steps<M: GradientOracle + ?Sized>(
    model: &M,
    x: &Tensor,
    label: usize,
    cfg: &AttackConfig,
    mut delta: Tensor,
) -> Result<Tensor> {
    for _ in 0..cfg.steps {
        let perturbed = x.add(&delta)?;
        let (_, grad) = model.loss_and_input_grad(&perturbed, label)?;
        if !grad.all_finite() {
            return Err(Error::Attack("input gradient is not finite".into()));
        }
        for (d, g) in delta.data_mut().iter_mut().zip(grad.data()) {
            *d = (*d + cfg.alpha * signum_zero_aware(*g)).clamp(-cfg.epsilon, cfg.epsilon);
        }
    }
    Ok(delta)
}

/// Single-step FGSM from a random start:
/// `δ₀ ~ U(−ε, ε)` (or 0 with `random_init` off), then
/// `δ = clamp(δ₀ + α·sign(∇ₓ loss(x+δ₀, y)), −ε, ε)`.
pub fn fgsm_random_init<M: GradientOracle + ?Sized, R: Rng>(
    model: &M,
    x: &Tensor,
    label: usize,
    cfg: &AttackConfig,
    rng: &mut R,
) -> Result<Tensor> {
    cfg.validate()?;
    if cfg.steps != 1 {
        return Err(Error::Config(format!(
            "single-step attack requires steps = 1, got {}",
            cfg.steps
        )));
    }
    let delta = initial_delta(x.shape(), cfg, rng);
    signed_steps(model, x, label, cfg, delta)
}

/// Iterated signed-gradient attack with a per-step l∞ clamp. With `steps = 1`
/// and the same RNG state this reproduces [`fgsm_random_init`] bit-exactly.
pub fn pgd_attack<M: GradientOracle + ?Sized, R: Rng>(
    model: &M,
    x: &Tensor,
    label: usize,
    cfg: &AttackConfig,
    rng: &mut R,
) -> Result<Tensor> {
    cfg.validate()?;
    let delta = initial_delta(x.shape(), cfg, rng);
    signed_steps(model, x, label, cfg, delta)
}
