//! Trajectories on a uniform time grid with exponentially weighted norms.
//!
//! All trajectories carry a zero causal history: the state before the first
//! stored index is zero. The discrete time derivative is the backward
//! difference, whose causal inverse is the cumulative sum; the two compose to
//! the identity exactly. Norms use left-endpoint quadrature of the
//! exp(-2 rho t) weight, which makes the accretivity bound below hold with
//! the exact discrete constant `rho_tau`.

use crate::error::{Error, Result};
use crate::mesh::StateVector;

/// Time-indexed sequence of states; the state at position `i` lives at
/// t = (start_index + i) * tau.
#[derive(Debug, Clone)]
pub struct Trajectory {
    tau: f64,
    start_index: i64,
    rho: f64,
    states: Vec<StateVector>,
}

impl Trajectory {
    pub fn new(tau: f64, start_index: i64, rho: f64, states: Vec<StateVector>) -> Result<Trajectory> {
        if !(tau > 0.0) {
            return Err(Error::Validation(format!("tau must be > 0, got {tau}")));
        }
        if !(rho > 0.0) {
            return Err(Error::Validation(format!("rho must be > 0, got {rho}")));
        }
        if let Some(first) = states.first() {
            let (ne, nh) = (first.e.len(), first.h.len());
            for (i, s) in states.iter().enumerate() {
                if s.e.len() != ne || s.h.len() != nh {
                    return Err(Error::dim(ne + nh, s.len(), &format!("trajectory state {i}")));
                }
            }
        }
        Ok(Trajectory {
            tau,
            start_index,
            rho,
            states,
        })
    }

    pub fn from_fn(
        tau: f64,
        start_index: i64,
        rho: f64,
        steps: usize,
        mut f: impl FnMut(i64, f64) -> StateVector,
    ) -> Result<Trajectory> {
        let states = (0..steps)
            .map(|i| {
                let n = start_index + i as i64;
                f(n, n as f64 * tau)
            })
            .collect();
        Trajectory::new(tau, start_index, rho, states)
    }

    pub fn zeros(tau: f64, start_index: i64, rho: f64, steps: usize, ne: usize, nh: usize) -> Trajectory {
        Trajectory {
            tau,
            start_index,
            rho,
            states: (0..steps).map(|_| StateVector::zeros(ne, nh)).collect(),
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn start_index(&self) -> i64 {
        self.start_index
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &StateVector {
        &self.states[i]
    }

    pub fn state_mut(&mut self, i: usize) -> &mut StateVector {
        &mut self.states[i]
    }

    pub fn time_at(&self, i: usize) -> f64 {
        (self.start_index + i as i64) as f64 * self.tau
    }

    fn check_same_shape(&self, other: &Trajectory, context: &str) -> Result<()> {
        if self.len() != other.len()
            || self.start_index != other.start_index
            || (self.tau - other.tau).abs() > f64::EPSILON * self.tau
        {
            return Err(Error::Validation(format!(
                "trajectory windows differ in {context}"
            )));
        }
        Ok(())
    }

    /// Backward difference with zero history: v_n = (u_n - u_(n-1)) / tau.
    pub fn d0_apply(&self) -> Result<Trajectory> {
        if self.is_empty() {
            return Err(Error::DegenerateInput("d0 of an empty trajectory".into()));
        }
        let inv_tau = 1.0 / self.tau;
        let mut states = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let mut v = self.states[i].clone();
            if i > 0 {
                v.add_scaled(-1.0, &self.states[i - 1]);
            }
            v.scale(inv_tau);
            states.push(v);
        }
        Ok(Trajectory {
            tau: self.tau,
            start_index: self.start_index,
            rho: self.rho,
            states,
        })
    }

    /// Causal cumulative sum: v_n = tau * sum_(k<=n) u_k. Exact algebraic
    /// inverse of [`Trajectory::d0_apply`] under the zero-history convention.
    pub fn d0_inverse_apply(&self) -> Trajectory {
        let mut acc: Option<StateVector> = None;
        let mut states = Vec::with_capacity(self.len());
        for u in &self.states {
            let a = match acc.as_mut() {
                Some(a) => {
                    a.add_scaled(self.tau, u);
                    a.clone()
                }
                None => {
                    let mut a = u.clone();
                    a.scale(self.tau);
                    acc = Some(a.clone());
                    a
                }
            };
            states.push(a);
        }
        Trajectory {
            tau: self.tau,
            start_index: self.start_index,
            rho: self.rho,
            states,
        }
    }

    /// Weighted pairing sum_n tau exp(-2 rho t_n) <u_n, v_n>_H.
    pub fn weighted_inner(&self, other: &Trajectory, measure: f64) -> Result<f64> {
        self.check_same_shape(other, "weighted inner product")?;
        let mut acc = 0.0;
        for i in 0..self.len() {
            let w = (-2.0 * self.rho * self.time_at(i)).exp();
            acc += self.tau * w * measure * self.states[i].dot_euclid(&other.states[i]);
        }
        Ok(acc)
    }

    /// Weighted norm with left-endpoint quadrature.
    pub fn weighted_norm(&self, measure: f64) -> f64 {
        self.weighted_inner(self, measure)
            .expect("self-pairing always conforms")
            .max(0.0)
            .sqrt()
    }

    /// Pointwise difference of two trajectories on the same window.
    pub fn sub(&self, other: &Trajectory) -> Result<Trajectory> {
        self.check_same_shape(other, "difference")?;
        let states = self
            .states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| a.sub(b))
            .collect();
        Ok(Trajectory {
            tau: self.tau,
            start_index: self.start_index,
            rho: self.rho,
            states,
        })
    }

    /// self += c * other
    pub fn add_scaled(&mut self, c: f64, other: &Trajectory) -> Result<()> {
        self.check_same_shape(other, "axpy")?;
        for (a, b) in self.states.iter_mut().zip(&other.states) {
            a.add_scaled(c, b);
        }
        Ok(())
    }

    /// Apply a diagonal operator on the combined (E, H) space to every state.
    pub fn apply_combined_diagonal(&self, diag: &[f64]) -> Result<Trajectory> {
        let (ne, nh) = match self.states.first() {
            Some(s) => (s.e.len(), s.h.len()),
            None => (0, 0),
        };
        if diag.len() != ne + nh {
            return Err(Error::dim(ne + nh, diag.len(), "combined diagonal"));
        }
        let states = self
            .states
            .iter()
            .map(|s| {
                let e = s.e.iter().zip(&diag[..ne]).map(|(v, d)| v * d).collect();
                let h = s.h.iter().zip(&diag[ne..]).map(|(v, d)| v * d).collect();
                StateVector { e, h }
            })
            .collect();
        Ok(Trajectory {
            tau: self.tau,
            start_index: self.start_index,
            rho: self.rho,
            states,
        })
    }

    /// Largest spatial norm among states with t_n <= cutoff.
    pub fn max_space_norm_before(&self, cutoff: f64, measure: f64) -> f64 {
        let mut max = 0.0f64;
        for i in 0..self.len() {
            if self.time_at(i) <= cutoff {
                max = max.max(self.states[i].space_norm(measure));
            }
        }
        max
    }
}

/// The discrete accretivity constant of the backward difference:
/// rho_tau = (1 - exp(-2 rho tau)) / (2 tau). Always below rho, tends to rho
/// as tau goes to zero.
pub fn rho_tau(rho: f64, tau: f64) -> f64 {
    (-(-2.0 * rho * tau).exp_m1()) / (2.0 * tau)
}

/// Rayleigh quotient of the backward difference in the weighted pairing:
/// r = <u, d0 u>_rho / |u|_rho^2. Satisfies r >= rho_tau for every
/// zero-history trajectory and converges to rho under refinement for smooth u.
pub fn check_discrete_d0_positivity(traj: &Trajectory, measure: f64) -> Result<f64> {
    let norm2 = traj.weighted_inner(traj, measure)?;
    if norm2 <= 0.0 {
        return Err(Error::DegenerateInput(
            "d0 positivity quotient of a zero trajectory".into(),
        ));
    }
    let d0u = traj.d0_apply()?;
    Ok(traj.weighted_inner(&d0u, measure)? / norm2)
}
