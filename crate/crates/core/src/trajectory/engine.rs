use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::integrator::{initial_step, Dp54, Schrodinger, Tolerances};
use crate::error::{Error, Result};
use crate::fock::SparseOperator;
use crate::linalg::norm_sqr;
use crate::probe::JumpChannel;
use crate::C64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum JumpMode {
    /// Draw thresholds and apply jumps.
    #[default]
    Stochastic,
    /// Postselect on zero detected photons: evolve under `H_eff` only.
    NoPhoton,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngineConfig {
    pub dt_max: f64,
    pub rtol: f64,
    pub atol: f64,
    pub jump_tol: f64,
    pub t_final: f64,
    pub sample_interval: f64,
    pub seed: u64,
    pub mode: JumpMode,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            dt_max: 0.1,
            rtol: 1e-8,
            atol: 1e-10,
            jump_tol: 1e-9,
            t_final: 1.0,
            sample_interval: 0.1,
            seed: 0,
            mode: JumpMode::Stochastic,
        }
    }
}

impl EngineConfig {
    pub fn validated(self) -> Result<Self> {
        let fields = [
            ("dt_max", self.dt_max),
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("jump_tol", self.jump_tol),
            ("t_final", self.t_final),
            ("sample_interval", self.sample_interval),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.jump_tol >= 1e-2 {
            return Err(Error::InvalidParameter(format!("jump_tol must be much smaller than 1, got {}", self.jump_tol)));
        }
        Ok(self)
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances { rtol: self.rtol, atol: self.atol, dt_max: self.dt_max }
    }

    /// Sample times `k * sample_interval` up to `t_final`.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.t_final / self.sample_interval * (1.0 + 1e-12)).floor() as usize;
        (0..=n).map(|k| k as f64 * self.sample_interval).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JumpEvent {
    pub t: f64,
    pub channel: usize,
    pub label: String,
}

/// Receives the normalized state at every sample time.
pub trait Sampler {
    fn sample(&mut self, t: f64, psi: &[C64]);

    /// Called at every jump with the normalized states around it.
    fn on_jump(&mut self, _event: &JumpEvent, _before: &[C64], _after: &[C64]) {}
}

/// A sampler that records nothing.
pub struct Discard;

impl Sampler for Discard {
    fn sample(&mut self, _t: f64, _psi: &[C64]) {}
}

impl<S: Sampler + ?Sized> Sampler for &mut S {
    fn sample(&mut self, t: f64, psi: &[C64]) {
        (**self).sample(t, psi)
    }

    fn on_jump(&mut self, event: &JumpEvent, before: &[C64], after: &[C64]) {
        (**self).on_jump(event, before, after)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub bisections: u64,
    pub evaluations: u64,
    /// Largest `| ||psi||^2 - r |` at a jump.
    pub max_threshold_miss: f64,
    /// Accepted steps whose squared norm grew beyond round-off.
    pub norm_increases: u64,
}

#[derive(Clone, Debug)]
pub struct TrajectoryOutcome {
    pub jumps: Vec<JumpEvent>,
    /// Normalized state at `t_final`.
    pub final_state: Vec<C64>,
    pub stats: StepStats,
}

/// Independent random stream for trajectory `index` of a seeded ensemble.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn draw_threshold(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let r: f64 = rng.random();
        if r > 0.0 {
            return r;
        }
    }
}

fn scaled(y: &[C64], s: f64) -> Vec<C64> {
    y.iter().map(|z| z * s).collect()
}

/// One quantum trajectory.
///
/// Between jumps `psi` follows `i d/dt psi = H_eff psi` without
/// renormalization. When `||psi||^2` falls to the current threshold `r`,
/// the crossing inside the last step is located by bisection, channel `k`
/// is picked with probability proportional to `||c_k psi||^2`, the state is
/// replaced by `c_k psi / ||c_k psi||` and a fresh `r` is drawn.
pub fn run_trajectory<S: Sampler>(
    psi0: &[C64],
    h_eff: &SparseOperator,
    channels: &[JumpChannel],
    cfg: &EngineConfig,
    index: u64,
    mut sampler: S,
) -> Result<TrajectoryOutcome> {
    let cfg = cfg.validated()?;
    let n0 = norm_sqr(psi0);
    if (n0 - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(n0.sqrt()));
    }
    for ch in channels {
        if ch.op().tag() != h_eff.tag() || ch.op().dim() != h_eff.dim() {
            return Err(Error::BasisMismatch { left: h_eff.tag(), right: ch.op().tag() });
        }
    }
    let tol = cfg.tolerances();
    let mut rng = trajectory_rng(cfg.seed, index);
    let stochastic = cfg.mode == JumpMode::Stochastic && !channels.is_empty();
    let mut r = if stochastic { draw_threshold(&mut rng) } else { 0.0 };

    let mut rk = Dp54::new(Schrodinger(h_eff), psi0.len(), tol, initial_step(h_eff, tol));
    let mut y = psi0.to_vec();
    let mut out = vec![C64::new(0.0, 0.0); y.len()];
    let mut stats = StepStats::default();
    let mut jumps = Vec::new();
    let mut weights = vec![0.0; channels.len()];

    let samples = cfg.sample_times();
    sampler.sample(0.0, &y);
    let mut next_sample = 1;
    let mut t = 0.0;
    let mut rejects = 0u32;

    while next_sample < samples.len() {
        let stop = samples[next_sample];
        let remaining = stop - t;
        let last = rk.h >= remaining * (1.0 - 1e-9);
        let h = if last { remaining } else { rk.h };
        let a = rk.attempt(&y, h, &mut out);
        if !a.err.is_finite() {
            return Err(Error::StepFailure { t, reason: "non-finite state".into() });
        }
        if a.err > 1.0 {
            stats.rejected += 1;
            rejects += 1;
            rk.h = rk.next_h(h, a.err).min(0.9 * h);
            if rejects > 60 || rk.h < 1e-15 * (1.0 + t) {
                return Err(Error::StepFailure { t, reason: "step size underflow".into() });
            }
            continue;
        }
        rejects = 0;
        stats.accepted += 1;
        let before = norm_sqr(&y);
        let after = norm_sqr(&out);
        if after > before * (1.0 + 10.0 * cfg.rtol) {
            stats.norm_increases += 1;
        }

        if stochastic && after <= r {
            // locate the crossing inside (t, t + h]
            let (mut lo, mut hi) = (0.0, h);
            let mut at = out.clone();
            let mut s = h;
            let mut miss = (after - r).abs();
            for _ in 0..60 {
                if miss < cfg.jump_tol {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                rk.attempt(&y, mid, &mut at);
                stats.bisections += 1;
                let nm = norm_sqr(&at);
                if nm > r {
                    lo = mid;
                } else {
                    hi = mid;
                }
                s = mid;
                miss = (nm - r).abs();
            }
            if miss >= cfg.jump_tol && s != hi {
                rk.attempt(&y, hi, &mut at);
                s = hi;
                miss = (norm_sqr(&at) - r).abs();
            }
            stats.max_threshold_miss = stats.max_threshold_miss.max(miss);
            let t_jump = t + s;

            let mut total = 0.0;
            for (w, ch) in weights.iter_mut().zip(channels) {
                *w = ch.rate(&at);
                total += *w;
            }
            let pick = rng.random::<f64>() * total;
            let mut k = 0;
            let mut acc = weights[0];
            while acc < pick && k + 1 < channels.len() {
                k += 1;
                acc += weights[k];
            }
            let jumped = channels[k].op().apply(&at);
            let nj = norm_sqr(&jumped);
            if !(nj > 0.0) || !nj.is_finite() {
                return Err(Error::ZeroNormJump { label: channels[k].label.clone(), t: t_jump });
            }
            let event = JumpEvent { t: t_jump, channel: k, label: channels[k].label.clone() };
            let post = scaled(&jumped, 1.0 / nj.sqrt());
            sampler.on_jump(&event, &scaled(&at, 1.0 / norm_sqr(&at).sqrt()), &post);
            jumps.push(event);
            y = post;
            rk.invalidate();
            t = t_jump;
            r = draw_threshold(&mut rng);
            if s == h && last {
                t = stop;
                sampler.sample(t, &y);
                next_sample += 1;
            }
            continue;
        }

        std::mem::swap(&mut y, &mut out);
        rk.accept();
        if !stochastic {
            let s = 1.0 / after.sqrt();
            y.iter_mut().for_each(|z| *z *= s);
            rk.rescale(s);
        }
        let suggested = rk.next_h(h, a.err);
        if last {
            t = stop;
            if suggested < rk.h {
                rk.h = suggested;
            }
            let nrm = norm_sqr(&y).sqrt();
            sampler.sample(t, &scaled(&y, 1.0 / nrm));
            next_sample += 1;
        } else {
            t += h;
            rk.h = suggested;
        }
    }

    stats.evaluations = rk.evaluations;
    let nrm = norm_sqr(&y).sqrt();
    Ok(TrajectoryOutcome { jumps, final_state: scaled(&y, 1.0 / nrm), stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{BasisTag, Particles};
    use crate::model::effective_hamiltonian;

    fn tag() -> BasisTag {
        BasisTag { sites: 2, particles: Particles::Bosons(1) }
    }

    fn drive(omega: f64) -> SparseOperator {
        SparseOperator::from_triplets(tag(), 2, vec![(0, 1, C64::new(omega, 0.0)), (1, 0, C64::new(omega, 0.0))])
    }

    fn projector_channel(gamma0: f64) -> JumpChannel {
        let p1 = SparseOperator::diagonal(tag(), vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        JumpChannel::new("n1", C64::new((2.0 * gamma0).sqrt(), 0.0), p1)
    }

    #[test]
    fn no_channels_means_no_jumps() {
        let h = drive(1.0);
        let cfg = EngineConfig { t_final: 5.0, ..Default::default() };
        let psi0 = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let out = run_trajectory(&psi0, &h, &[], &cfg, 0, Discard).unwrap();
        assert!(out.jumps.is_empty());
        let expect = (5.0f64).cos().powi(2);
        assert!((out.final_state[0].norm_sqr() - expect).abs() < 1e-7);
    }

    #[test]
    fn dark_state_is_stationary() {
        let h0 = SparseOperator::diagonal(tag(), vec![C64::new(0.3, 0.0), C64::new(1.0, 0.0)]);
        let ch = projector_channel(2.0);
        let heff = effective_hamiltonian(&h0, std::slice::from_ref(&ch)).unwrap();
        let psi0 = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let cfg = EngineConfig { t_final: 50.0, ..Default::default() };
        let out = run_trajectory(&psi0, &heff, &[ch], &cfg, 3, Discard).unwrap();
        assert!(out.jumps.is_empty());
        assert!((out.final_state[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jumps_hit_the_threshold_and_are_ordered() {
        let ch = projector_channel(0.5);
        let heff = effective_hamiltonian(&drive(1.0), std::slice::from_ref(&ch)).unwrap();
        let psi0 = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let cfg = EngineConfig { t_final: 40.0, ..Default::default() };
        let out = run_trajectory(&psi0, &heff, &[ch], &cfg, 0, Discard).unwrap();
        assert!(!out.jumps.is_empty());
        assert!(out.jumps.windows(2).all(|w| w[0].t < w[1].t));
        assert!(out.stats.max_threshold_miss < cfg.jump_tol);
        assert_eq!(out.stats.norm_increases, 0);
    }

    #[test]
    fn identical_seeds_reproduce_jump_logs() {
        let ch = projector_channel(0.5);
        let heff = effective_hamiltonian(&drive(1.0), std::slice::from_ref(&ch)).unwrap();
        let psi0 = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let cfg = EngineConfig { t_final: 30.0, seed: 11, ..Default::default() };
        let a = run_trajectory(&psi0, &heff, std::slice::from_ref(&ch), &cfg, 4, Discard).unwrap();
        let b = run_trajectory(&psi0, &heff, std::slice::from_ref(&ch), &cfg, 4, Discard).unwrap();
        let c = run_trajectory(&psi0, &heff, std::slice::from_ref(&ch), &cfg, 5, Discard).unwrap();
        assert_eq!(a.jumps, b.jumps);
        assert_ne!(a.jumps, c.jumps);
    }

    #[test]
    fn unnormalized_start_rejected() {
        let psi0 = vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        let r = run_trajectory(&psi0, &drive(1.0), &[], &EngineConfig::default(), 0, Discard);
        assert!(matches!(r, Err(Error::NotNormalized(_))));
    }

    #[test]
    fn sampler_sees_every_grid_point() {
        struct Times(Vec<f64>);
        impl Sampler for Times {
            fn sample(&mut self, t: f64, psi: &[C64]) {
                assert!((norm_sqr(psi) - 1.0).abs() < 1e-12);
                self.0.push(t);
            }
        }
        let ch = projector_channel(1.0);
        let heff = effective_hamiltonian(&drive(1.0), std::slice::from_ref(&ch)).unwrap();
        let psi0 = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let cfg = EngineConfig { t_final: 10.0, sample_interval: 0.25, ..Default::default() };
        let mut times = Times(Vec::new());
        run_trajectory(&psi0, &heff, &[ch], &cfg, 0, &mut times).unwrap();
        assert_eq!(times.0, cfg.sample_times());
        assert_eq!(times.0.len(), 41);
    }
}
