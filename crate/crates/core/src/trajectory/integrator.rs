use crate::error::{Error, Result};
use crate::fock::SparseOperator;
use crate::C64;

/// Right-hand side of an autonomous linear ODE `dy/dt = f(y)`.
pub trait Derivative {
    fn eval(&mut self, y: &[C64], dy: &mut [C64]);
}

/// `dy/dt = -i H y`.
pub struct Schrodinger<'a>(pub &'a SparseOperator);

impl Derivative for Schrodinger<'_> {
    fn eval(&mut self, y: &[C64], dy: &mut [C64]) {
        self.0.apply_into(y, dy);
        dy.iter_mut().for_each(|z| *z = C64::new(z.im, -z.re));
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub dt_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, dt_max: 0.1 }
    }
}

const A: [&[f64]; 6] = [
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
    &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive Dormand-Prince 5(4) stepper.
///
/// The first stage `f(y)` is cached across calls that start from the same
/// `y`; after an accepted step the last stage supplies it for free.
pub struct Dp54<F> {
    pub f: F,
    pub tol: Tolerances,
    k: Vec<Vec<C64>>,
    k1: Vec<C64>,
    k1_valid: bool,
    stage: Vec<C64>,
    /// Step-size suggestion for the next call.
    pub h: f64,
    pub evaluations: u64,
}

pub struct Attempt {
    pub err: f64,
}

impl<F: Derivative> Dp54<F> {
    pub fn new(f: F, dim: usize, tol: Tolerances, h0: f64) -> Self {
        let z = vec![C64::new(0.0, 0.0); dim];
        Self {
            f,
            tol,
            k: vec![z.clone(); 7],
            k1: z.clone(),
            k1_valid: false,
            stage: z,
            h: h0.min(tol.dt_max),
            evaluations: 0,
        }
    }

    /// Forgets the cached first stage (call after `y` changes externally).
    pub fn invalidate(&mut self) {
        self.k1_valid = false;
    }

    /// Rescales the cached first stage after `y` was multiplied by `s`.
    pub fn rescale(&mut self, s: f64) {
        self.k1.iter_mut().for_each(|z| *z *= s);
    }

    /// One trial step of size `h` from `y` into `out`, returning the scaled
    /// error estimate (accept when `<= 1`).
    pub fn attempt(&mut self, y: &[C64], h: f64, out: &mut [C64]) -> Attempt {
        if !self.k1_valid {
            self.f.eval(y, &mut self.k1);
            self.evaluations += 1;
            self.k1_valid = true;
        }
        self.k[0].copy_from_slice(&self.k1);
        for s in 0..6 {
            let row = A[s];
            for (i, st) in self.stage.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (j, a) in row.iter().enumerate() {
                    if *a != 0.0 {
                        acc += self.k[j][i] * *a;
                    }
                }
                *st = y[i] + acc * h;
            }
            self.f.eval(&self.stage, &mut self.k[s + 1]);
            self.evaluations += 1;
            if s == 5 {
                out.copy_from_slice(&self.stage);
            }
        }
        let n = y.len().max(1);
        let mut sum = 0.0;
        for i in 0..y.len() {
            let mut e = C64::new(0.0, 0.0);
            for (j, c) in E.iter().enumerate() {
                if *c != 0.0 {
                    e += self.k[j][i] * *c;
                }
            }
            let scale = self.tol.atol + self.tol.rtol * y[i].norm().max(out[i].norm());
            let r = (e * h).norm() / scale;
            sum += r * r;
        }
        Attempt { err: (sum / n as f64).sqrt() }
    }

    /// Marks the last attempt as accepted: its final stage becomes the next
    /// first stage.
    pub fn accept(&mut self) {
        std::mem::swap(&mut self.k1, &mut self.k[6]);
        self.k1_valid = true;
    }

    pub fn next_h(&self, h: f64, err: f64) -> f64 {
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        (h * factor).min(self.tol.dt_max)
    }

    /// Integrates `y` forward by `span` (landing exactly on the end point).
    pub fn advance(&mut self, y: &mut Vec<C64>, t0: f64, span: f64) -> Result<()> {
        let mut t = 0.0;
        let mut out = vec![C64::new(0.0, 0.0); y.len()];
        let mut rejects = 0;
        while t < span {
            let remaining = span - t;
            let last = self.h >= remaining * (1.0 - 1e-9);
            let h = if last { remaining } else { self.h };
            let a = self.attempt(y, h, &mut out);
            if !a.err.is_finite() {
                return Err(Error::StepFailure { t: t0 + t, reason: "non-finite state".into() });
            }
            if a.err <= 1.0 {
                std::mem::swap(y, &mut out);
                self.accept();
                t = if last { span } else { t + h };
                let suggested = self.next_h(h, a.err);
                if !last || suggested < self.h {
                    self.h = suggested;
                }
                rejects = 0;
            } else {
                self.h = self.next_h(h, a.err).min(0.9 * h);
                rejects += 1;
                if rejects > 60 || self.h < 1e-15 * (1.0 + t0 + t) {
                    return Err(Error::StepFailure { t: t0 + t, reason: "step size underflow".into() });
                }
            }
        }
        Ok(())
    }
}

/// `psi' = exp(-i H_eff dt) psi` by adaptive integration, without
/// renormalization.
pub fn evolve_nonhermitian(psi: &[C64], h_eff: &SparseOperator, dt: f64, tol: Tolerances) -> Result<Vec<C64>> {
    if crate::linalg::norm_sqr(psi) == 0.0 {
        return Err(Error::InvalidParameter("zero state vector".into()));
    }
    let h0 = initial_step(h_eff, tol);
    let mut rk = Dp54::new(Schrodinger(h_eff), psi.len(), tol, h0);
    let mut y = psi.to_vec();
    rk.advance(&mut y, 0.0, dt)?;
    Ok(y)
}

pub(crate) fn initial_step(h: &SparseOperator, tol: Tolerances) -> f64 {
    let scale = h.norm_inf();
    if scale > 0.0 {
        (0.1 / scale).min(tol.dt_max)
    } else {
        tol.dt_max
    }
}
