//! Implicit causal time integration of (d0 M + N + A) u = F with zero history.
//!
//! Each step solves S u_n = F_n + (M/tau) u_(n-1) with S = M/tau + N + A.
//! The H block of M/tau is diagonal and strictly positive (mu > 0), so H is
//! eliminated and the Schur complement on the E block,
//!
//!   S_E = diag(M_E/tau + N_E) + curl0ᵀ diag(tau/mu) curl0,
//!
//! is symmetric positive definite even where the E mass vanishes (the
//! differential-algebraic eddy-current block is carried by N > 0 there). The
//! inner solver is Jacobi-preconditioned conjugate gradients warm-started
//! from the previous step; the contract is only the relative residual of the
//! full (E, H) system per step.
//!
//! Zero right-hand sides are propagated as exact zeros, which is what makes
//! causality hold to the last bit before the support of the forcing.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::mesh::{DofKind, SpaceInfo, StateVector};
use crate::ops::BlockOperatorA;
use crate::sparse::SparseOperator;
use crate::time::Trajectory;

/// Default relative residual tolerance of the inner linear solver.
pub const DEFAULT_LIN_TOL: f64 = 1e-10;

/// A fully assembled causal evolution problem on one combined DOF space.
#[derive(Debug, Clone)]
pub struct EvolutionProblem {
    m_diag: Vec<f64>,
    n_diag: Vec<f64>,
    a: BlockOperatorA,
    forcing: Trajectory,
    lin_tol: f64,
}

/// Solution trajectory plus per-step solver diagnostics.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub solution: Trajectory,
    pub per_step_linear_residuals: Vec<f64>,
    pub wall_time: Duration,
}

impl EvolutionProblem {
    /// Build a problem from diagonal M and N, the block operator and the
    /// forcing trajectory. tau, rho and the window come from the forcing;
    /// the step count times tau is the window length by construction.
    pub fn new(
        m: &SparseOperator,
        n: &SparseOperator,
        a: BlockOperatorA,
        forcing: Trajectory,
        lin_tol: f64,
    ) -> Result<EvolutionProblem> {
        let ne = a.e_count();
        let nh = a.h_count();
        let combined = SpaceInfo {
            kind: DofKind::Combined,
            count: ne + nh,
        };
        for (name, op) in [("M", m), ("N", n)] {
            if op.nrows() != combined.count || op.ncols() != combined.count {
                return Err(Error::dim(combined.count, op.nrows(), name));
            }
        }
        let m_diag = m
            .as_diagonal()
            .ok_or_else(|| Error::Validation("M must be diagonal".into()))?;
        let n_diag = n
            .as_diagonal()
            .ok_or_else(|| Error::Validation("N must be diagonal".into()))?;
        if forcing.is_empty() {
            return Err(Error::Validation("forcing trajectory is empty".into()));
        }
        for (i, s) in forcing.states().iter().enumerate() {
            if s.e.len() != ne || s.h.len() != nh {
                return Err(Error::dim(ne + nh, s.len(), &format!("forcing state {i}")));
            }
        }
        let problem = EvolutionProblem {
            m_diag,
            n_diag,
            a,
            forcing,
            lin_tol,
        };
        problem.step_diag_positivity()?;
        problem.weight_positivity()?;
        Ok(problem)
    }

    /// rho M + N must have a positive minimum: that minimum is the constant
    /// in the 1/c bound on the solution operator.
    fn weight_positivity(&self) -> Result<()> {
        let rho = self.rho();
        let ne = self.e_count();
        for (dof, (m, n)) in self.m_diag.iter().zip(&self.n_diag).enumerate() {
            let v = rho * m + n;
            if !(v > 0.0) {
                return Err(Error::ModelInvalid {
                    kind: if dof < ne { "E" } else { "H" },
                    dof: if dof < ne { dof } else { dof - ne },
                    value: v,
                    detail: "rho M + N has a non-positive diagonal".into(),
                });
            }
        }
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        self.forcing.tau()
    }

    pub fn rho(&self) -> f64 {
        self.forcing.rho()
    }

    pub fn t_end(&self) -> f64 {
        self.forcing.time_at(self.forcing.len().saturating_sub(1))
    }

    pub fn lin_tol(&self) -> f64 {
        self.lin_tol
    }

    pub fn forcing(&self) -> &Trajectory {
        &self.forcing
    }

    pub fn block_operator(&self) -> &BlockOperatorA {
        &self.a
    }

    pub fn e_count(&self) -> usize {
        self.a.e_count()
    }

    pub fn h_count(&self) -> usize {
        self.a.h_count()
    }

    /// Diagonal of M/tau + N; its minimum is the discrete well-posedness
    /// constant at weight 1/tau and must be positive for the step matrix to
    /// be invertible.
    fn step_diag(&self) -> Vec<f64> {
        let inv_tau = 1.0 / self.tau();
        self.m_diag
            .iter()
            .zip(&self.n_diag)
            .map(|(m, n)| m * inv_tau + n)
            .collect()
    }

    fn step_diag_positivity(&self) -> Result<()> {
        let diag = self.step_diag();
        if let Some((dof, &value)) = diag
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite step diagonal"))
        {
            if !(value > 0.0) {
                let ne = self.e_count();
                return Err(Error::ModelInvalid {
                    kind: if dof < ne { "E" } else { "H" },
                    dof: if dof < ne { dof } else { dof - ne },
                    value,
                    detail: "step matrix M/tau + N has a non-positive diagonal".into(),
                });
            }
        }
        Ok(())
    }
}

/// The one-step operator S = M/tau + N + A assembled on the combined space.
/// Its symmetric part equals diag(M/tau + N) exactly, which bounds the
/// smallest symmetric-part eigenvalue from below and makes S invertible.
pub fn step_matrix(problem: &EvolutionProblem) -> Result<SparseOperator> {
    problem.step_diag_positivity()?;
    let ne = problem.e_count();
    let combined = SpaceInfo {
        kind: DofKind::Combined,
        count: ne + problem.h_count(),
    };
    let mut triples: Vec<(usize, usize, f64)> = problem
        .step_diag()
        .into_iter()
        .enumerate()
        .map(|(i, v)| (i, i, v))
        .collect();
    for (f, e, v) in problem.a.curl0().iter() {
        triples.push((ne + f, e, v)); // +curl0 in the (H, E) block
        triples.push((e, ne + f, -v)); // -curl0ᵀ in the (E, H) block
    }
    SparseOperator::from_triples(combined, combined, triples)
}

struct SchurSolver<'a> {
    curl0: &'a SparseOperator,
    d_e: Vec<f64>,
    d_h: Vec<f64>,
    inv_d_h: Vec<f64>,
    inv_jacobi: Vec<f64>,
    // workspaces
    face_buf: Vec<f64>,
    edge_buf: Vec<f64>,
}

impl<'a> SchurSolver<'a> {
    fn new(problem: &'a EvolutionProblem) -> SchurSolver<'a> {
        let ne = problem.e_count();
        let nh = problem.h_count();
        let step_diag = problem.step_diag();
        let d_e = step_diag[..ne].to_vec();
        let d_h = step_diag[ne..].to_vec();
        let inv_d_h: Vec<f64> = d_h.iter().map(|&v| 1.0 / v).collect();
        let mut jacobi = d_e.clone();
        for (f, e, v) in problem.a.curl0().iter() {
            jacobi[e] += v * v * inv_d_h[f];
        }
        let inv_jacobi = jacobi.into_iter().map(|v| 1.0 / v).collect();
        SchurSolver {
            curl0: problem.a.curl0(),
            d_e,
            d_h,
            inv_d_h,
            inv_jacobi,
            face_buf: vec![0.0; nh],
            edge_buf: vec![0.0; ne],
        }
    }

    /// y = S_E x = d_e x + curl0ᵀ (inv_d_h (curl0 x))
    fn apply(&mut self, x: &[f64], y: &mut [f64]) {
        self.curl0.apply_into(x, &mut self.face_buf);
        for (b, inv) in self.face_buf.iter_mut().zip(&self.inv_d_h) {
            *b *= inv;
        }
        self.curl0.apply_transpose_into(&self.face_buf, y);
        for ((y, d), x) in y.iter_mut().zip(&self.d_e).zip(x) {
            *y += d * x;
        }
    }

    /// Preconditioned CG towards |g - S_E x| <= target (absolute). Returns
    /// the achieved residual norm.
    fn pcg(&mut self, g: &[f64], x: &mut [f64], target: f64, max_iters: usize) -> f64 {
        let n = g.len();
        if n == 0 {
            return 0.0;
        }
        let mut r = vec![0.0; n];
        let mut q = vec![0.0; n];
        self.apply(x, &mut q);
        for i in 0..n {
            r[i] = g[i] - q[i];
        }
        let mut rnorm = norm2(&r);
        if rnorm <= target {
            return rnorm;
        }
        let mut z: Vec<f64> = r.iter().zip(&self.inv_jacobi).map(|(r, j)| r * j).collect();
        let mut p = z.clone();
        let mut rz: f64 = dot(&r, &z);
        for _ in 0..max_iters {
            self.apply(&p, &mut q);
            let pq = dot(&p, &q);
            if pq <= 0.0 {
                break; // loss of positive definiteness: stop and report
            }
            let alpha = rz / pq;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            rnorm = norm2(&r);
            if rnorm <= target {
                break;
            }
            for i in 0..n {
                z[i] = r[i] * self.inv_jacobi[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        rnorm
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// March the implicit scheme over the forcing window. The returned
/// trajectory lives on the same window; every per-step relative residual of
/// the full system is at most `lin_tol`.
pub fn solve_evolution(problem: &EvolutionProblem) -> Result<SolveResult> {
    let start = Instant::now();
    let ne = problem.e_count();
    let nh = problem.h_count();
    let tau = problem.tau();
    let inv_tau = 1.0 / tau;
    let me_over_tau: Vec<f64> = problem.m_diag[..ne].iter().map(|m| m * inv_tau).collect();
    let mh_over_tau: Vec<f64> = problem.m_diag[ne..].iter().map(|m| m * inv_tau).collect();
    let mut schur = SchurSolver::new(problem);
    let max_iters = (4 * ne).max(1000);

    let steps = problem.forcing.len();
    let mut states: Vec<StateVector> = Vec::with_capacity(steps);
    let mut residuals = Vec::with_capacity(steps);
    let mut e_prev = vec![0.0; ne];
    let mut h_prev = vec![0.0; nh];
    let mut rhs_e = vec![0.0; ne];
    let mut rhs_h = vec![0.0; nh];
    let mut g = vec![0.0; ne];

    for step in 0..steps {
        let f = problem.forcing.state(step);
        for i in 0..ne {
            rhs_e[i] = f.e[i] + me_over_tau[i] * e_prev[i];
        }
        for i in 0..nh {
            rhs_h[i] = f.h[i] + mh_over_tau[i] * h_prev[i];
        }
        let rhs_norm = (norm2(&rhs_e).powi(2) + norm2(&rhs_h).powi(2)).sqrt();
        if rhs_norm == 0.0 {
            // exact zero propagation: quiescent history stays quiescent
            e_prev.iter_mut().for_each(|v| *v = 0.0);
            h_prev.iter_mut().for_each(|v| *v = 0.0);
            states.push(StateVector::zeros(ne, nh));
            residuals.push(0.0);
            continue;
        }

        // Schur right-hand side: g = rhs_e + curl0ᵀ (inv_d_h rhs_h)
        for ((buf, rh), inv) in schur.face_buf.iter_mut().zip(&rhs_h).zip(&schur.inv_d_h) {
            *buf = rh * inv;
        }
        problem.a.curl0().apply_transpose_into(&schur.face_buf, &mut g);
        for (gi, re) in g.iter_mut().zip(&rhs_e) {
            *gi += re;
        }

        // Solve, verify the full-system residual, tighten if necessary. The
        // inner target sits well below lin_tol so that per-step errors stay
        // small against quantities that accumulate over the whole window.
        let mut x = e_prev.clone();
        let mut target = 0.1 * problem.lin_tol * rhs_norm;
        let mut rel = f64::INFINITY;
        for _round in 0..4 {
            schur.pcg(&g, &mut x, target, max_iters);
            // h recovery; face_buf holds curl0 x afterwards
            problem.a.curl0().apply_into(&x, &mut schur.face_buf);
            for i in 0..nh {
                h_prev[i] = (rhs_h[i] - schur.face_buf[i]) * schur.inv_d_h[i];
            }
            // full-system residual (the H block is near-exact by recovery,
            // folded in anyway to keep the measurement honest)
            problem.a.curl0().apply_transpose_into(&h_prev, &mut schur.edge_buf);
            let mut resid2 = 0.0;
            for i in 0..ne {
                let r = rhs_e[i] - schur.d_e[i] * x[i] + schur.edge_buf[i];
                resid2 += r * r;
            }
            for i in 0..nh {
                let r = rhs_h[i] - schur.face_buf[i] - schur.d_h[i] * h_prev[i];
                resid2 += r * r;
            }
            rel = resid2.sqrt() / rhs_norm;
            if rel <= problem.lin_tol {
                break;
            }
            target *= 0.1;
        }
        if rel > problem.lin_tol {
            return Err(Error::SolverFailure {
                step,
                residual: rel,
                tolerance: problem.lin_tol,
            });
        }
        e_prev.copy_from_slice(&x);
        states.push(StateVector {
            e: x,
            h: h_prev.clone(),
        });
        residuals.push(rel);
    }

    let solution = Trajectory::new(tau, problem.forcing.start_index(), problem.rho(), states)?;
    Ok(SolveResult {
        solution,
        per_step_linear_residuals: residuals,
        wall_time: start.elapsed(),
    })
}

/// Solve and return the largest spatial norm of the solution at or before the
/// cutoff. The forcing must vanish on that early window; backward Euler with
/// zero history then propagates exact zeros, so the returned value is zero up
/// to the solver tolerance.
pub fn verify_causality(problem: &EvolutionProblem, cutoff: f64, measure: f64) -> Result<f64> {
    verify_causality_full(problem, cutoff, measure).map(|(early, _)| early)
}

/// As [`verify_causality`], additionally returning the full solve result for
/// report assembly.
pub fn verify_causality_full(
    problem: &EvolutionProblem,
    cutoff: f64,
    measure: f64,
) -> Result<(f64, SolveResult)> {
    for i in 0..problem.forcing.len() {
        if problem.forcing.time_at(i) <= cutoff {
            let s = problem.forcing.state(i);
            if s.e.iter().chain(&s.h).any(|&v| v != 0.0) {
                return Err(Error::Validation(format!(
                    "forcing does not vanish at t = {} <= cutoff {cutoff}",
                    problem.forcing.time_at(i)
                )));
            }
        }
    }
    let result = solve_evolution(problem)?;
    let early = result.solution.max_space_norm_before(cutoff, measure);
    Ok((early, result))
}

/// CSV export: step, time, E-norm, H-norm per line (norms in the spatial
/// space with the given cell measure).
pub fn write_trajectory_csv(
    traj: &Trajectory,
    measure: f64,
    writer: &mut impl std::io::Write,
) -> Result<()> {
    writeln!(writer, "step,time,e_norm,h_norm")?;
    for i in 0..traj.len() {
        let s = traj.state(i);
        let e_norm = (measure * s.e.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let h_norm = (measure * s.h.iter().map(|v| v * v).sum::<f64>()).sqrt();
        writeln!(
            writer,
            "{},{},{},{}",
            traj.start_index() + i as i64,
            traj.time_at(i),
            e_norm,
            h_norm
        )?;
    }
    Ok(())
}

/// Raw binary state dump: for each step in window order, the E block then the
/// H block as little-endian IEEE-754 f64, DOF order identical to the grid
/// index map. No header; the record length is 8 * (ne + nh) bytes.
pub fn write_trajectory_bin(traj: &Trajectory, writer: &mut impl std::io::Write) -> Result<()> {
    for s in traj.states() {
        for v in s.e.iter().chain(&s.h) {
            writer.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}
