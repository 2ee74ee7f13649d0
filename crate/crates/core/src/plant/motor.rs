//! Squirrel-cage induction machine with stator currents and rotor flux
//! linkages as electrical states.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotorParams {
    /// Stator resistance, Ω.
    pub rs: f64,
    /// Rotor resistance referred to the stator, Ω.
    pub rr: f64,
    pub ls: f64,
    pub lr: f64,
    pub lm: f64,
    pub pole_pairs: u32,
    /// Rotor inertia, kg·m².
    pub inertia: f64,
    /// Viscous friction, N·m·s/rad.
    pub friction: f64,
}

impl Default for MotorParams {
    fn default() -> Self {
        Self {
            rs: 2.3,
            rr: 1.8,
            ls: 0.26,
            lr: 0.26,
            lm: 0.245,
            pole_pairs: 2,
            inertia: 0.01,
            friction: 0.001,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("motor.{0} must be positive and finite")]
    NotPositive(&'static str),
    #[error("motor.lm must not exceed min(ls, lr)")]
    MagnetizingTooLarge,
}

impl MotorParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let fields = [
            ("rs", self.rs),
            ("rr", self.rr),
            ("ls", self.ls),
            ("lr", self.lr),
            ("lm", self.lm),
            ("inertia", self.inertia),
            ("friction", self.friction),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(ParamError::NotPositive(name));
            }
        }
        if self.pole_pairs == 0 {
            return Err(ParamError::NotPositive("pole_pairs"));
        }
        if self.lm >= self.ls.min(self.lr) {
            return Err(ParamError::MagnetizingTooLarge);
        }
        Ok(())
    }

    /// Leakage coefficient σ = 1 − Lm²/(Ls·Lr).
    pub fn sigma(&self) -> f64 {
        1.0 - self.lm * self.lm / (self.ls * self.lr)
    }

    /// Rotor time constant Lr/Rr.
    pub fn tr(&self) -> f64 {
        self.lr / self.rr
    }

    /// Rs + Rr·(Lm/Lr)².
    pub fn r_sigma(&self) -> f64 {
        let k = self.lm / self.lr;
        self.rs + self.rr * k * k
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MotorState {
    pub i_alpha: f64,
    pub i_beta: f64,
    pub psi_alpha: f64,
    pub psi_beta: f64,
    /// Mechanical speed, rad/s.
    pub omega_m: f64,
    /// Mechanical angle in `[0, 2π)`.
    pub theta_m: f64,
}

impl MotorState {
    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.i_alpha,
            self.i_beta,
            self.psi_alpha,
            self.psi_beta,
            self.omega_m,
            self.theta_m,
        ]
    }

    fn from_array(x: [f64; 6]) -> Self {
        Self {
            i_alpha: x[0],
            i_beta: x[1],
            psi_alpha: x[2],
            psi_beta: x[3],
            omega_m: x[4],
            theta_m: x[5],
        }
    }

    /// Electromagnetic torque (3/2)·p·(Lm/Lr)·(ψα·iβ − ψβ·iα).
    pub fn torque(&self, params: &MotorParams) -> f64 {
        1.5 * params.pole_pairs as f64
            * (params.lm / params.lr)
            * (self.psi_alpha * self.i_beta - self.psi_beta * self.i_alpha)
    }

    /// Rotor current vector (ψr − Lm·is)/Lr.
    pub fn rotor_current(&self, params: &MotorParams) -> (f64, f64) {
        (
            (self.psi_alpha - params.lm * self.i_alpha) / params.lr,
            (self.psi_beta - params.lm * self.i_beta) / params.lr,
        )
    }
}

/// Stator voltage and load held constant over one integration step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PlantInputs {
    pub v_alpha: f64,
    pub v_beta: f64,
    pub load_torque: f64,
}

pub fn motor_derivatives(state: &MotorState, inputs: &PlantInputs, params: &MotorParams) -> [f64; 6] {
    let tr = params.tr();
    let sigma_ls = params.sigma() * params.ls;
    let k = params.lm / params.lr;
    let omega_e = params.pole_pairs as f64 * state.omega_m;
    let r_sigma = params.r_sigma();
    let (ia, ib, pa, pb) = (state.i_alpha, state.i_beta, state.psi_alpha, state.psi_beta);

    let dia = (inputs.v_alpha - r_sigma * ia + k / tr * pa + k * omega_e * pb) / sigma_ls;
    let dib = (inputs.v_beta - r_sigma * ib + k / tr * pb - k * omega_e * pa) / sigma_ls;
    let dpa = params.lm / tr * ia - pa / tr - omega_e * pb;
    let dpb = params.lm / tr * ib - pb / tr + omega_e * pa;
    let te = state.torque(params);
    let dw = (te - inputs.load_torque - params.friction * state.omega_m) / params.inertia;
    [dia, dib, dpa, dpb, dw, state.omega_m]
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("plant state became non-finite")]
pub struct NonFinite;

/// One classical Runge–Kutta step of length `h`; θ is wrapped to `[0, 2π)`.
pub fn integrate(
    state: &MotorState,
    inputs: &PlantInputs,
    h: f64,
    params: &MotorParams,
) -> Result<MotorState, NonFinite> {
    if h == 0.0 {
        return Ok(*state);
    }
    let x0 = state.as_array();
    let eval = |x: &[f64; 6]| motor_derivatives(&MotorState::from_array(*x), inputs, params);
    let offset = |k: &[f64; 6], s: f64| {
        let mut x = x0;
        for (xi, ki) in x.iter_mut().zip(k) {
            *xi += s * ki;
        }
        x
    };
    let k1 = eval(&x0);
    let k2 = eval(&offset(&k1, h / 2.0));
    let k3 = eval(&offset(&k2, h / 2.0));
    let k4 = eval(&offset(&k3, h));
    let mut x = x0;
    for i in 0..6 {
        x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    x[5] = x[5].rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if x[5] >= TAU {
        x[5] = 0.0;
    }
    let next = MotorState::from_array(x);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(NonFinite)
    }
}
