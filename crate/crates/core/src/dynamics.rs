// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Lindblad master-equation integration under a pulse schedule.
//!
//! ```text
//! dρ/dt = −i[H(t), ρ] + Σ_q Γ1 D[σ−_q]ρ + Σ_q (Γφ/2) D[σz_q]ρ
//! D[L]ρ = LρL† − ½{L†L, ρ}
//! ```
//!
//! With this normalization the transverse coherence of a qubit decays as
//! `exp(−t/Tphi)` under pure dephasing and `exp(−t/2T1)` under relaxation.
//! Integration is fixed-step RK4. The step is chosen per segment between
//! schedule breakpoints so that it never exceeds `cfg.dt` nor
//! `1/(steps_per_radian · ω)`, where ω bounds the fastest rate active on the
//! segment.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{RegisterHamiltonian, SystemSpec};
use crate::numfmt::round_sig;
use crate::pulses::{GaussianPulse, PulseSchedule, ScheduleItem};
use crate::qcore::{eig_hermitian, DensityMatrix, Operator, PauliLabel};

const NEG_I: Complex64 = Complex64::new(0.0, -1.0);
/// Drift beyond this triggers symmetrization and trace renormalization.
const RENORM_TOL: f64 = 1e-9;
/// Drift beyond this aborts the integration.
const ABORT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Largest step, seconds.
    pub dt: f64,
    /// Steps per radian of the fastest active frequency; at least 20.
    pub steps_per_radian: f64,
    /// Record every n-th step; 0 records only the initial and final states.
    pub sample_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 10e-9,
            steps_per_radian: 100.0,
            sample_stride: 0,
        }
    }
}

impl IntegratorConfig {
    /// Default settings with `dt` tightened to the spec's static bandwidth.
    pub fn for_spec(spec: &SystemSpec) -> Result<Self> {
        let mut cfg = Self::default();
        let omega = Lindbladian::new(spec)?.static_rate();
        if omega > 0.0 {
            cfg.dt = cfg.dt.min(1.0 / (cfg.steps_per_radian * omega));
        }
        Ok(cfg)
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride;
        self
    }

    pub fn validate(&self, spec: &SystemSpec) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.steps_per_radian >= 20.0) {
            return Err(Error::InvalidArgument(format!(
                "steps_per_radian must be >= 20, got {}",
                self.steps_per_radian
            )));
        }
        let omega = Lindbladian::new(spec)?.static_rate();
        if omega > 0.0 && self.dt > 1.0 / (20.0 * omega) {
            return Err(Error::InvalidArgument(format!(
                "dt = {:e} s exceeds 1/(20·ω) = {:e} s for this system",
                self.dt,
                1.0 / (20.0 * omega)
            )));
        }
        Ok(())
    }

    fn step_for(&self, omega: f64) -> f64 {
        if omega > 0.0 {
            self.dt.min(1.0 / (self.steps_per_radian * omega))
        } else {
            self.dt
        }
    }
}

#[derive(Debug, Clone)]
struct Collapse {
    l: Operator,
    l_dag: Operator,
    l_dag_l: Operator,
    rate: f64,
}

/// Generator of the master equation for one register.
#[derive(Debug, Clone)]
pub struct Lindbladian {
    hamiltonian: RegisterHamiltonian,
    collapse: Vec<Collapse>,
    dim: usize,
}

#[derive(Debug)]
struct Scratch {
    a: Operator,
    b: Operator,
    c: Operator,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        Self {
            a: Operator::zeros(dim),
            b: Operator::zeros(dim),
            c: Operator::zeros(dim),
        }
    }
}

impl Lindbladian {
    pub fn new(spec: &SystemSpec) -> Result<Self> {
        let hamiltonian = RegisterHamiltonian::new(spec)?;
        let n = spec.n_qubits;
        let mut collapse = Vec::new();
        for (q, noise) in spec.noise.iter().enumerate() {
            let mut push = |l: Operator, rate: f64| {
                if rate > 0.0 {
                    let l_dag = l.dagger();
                    let l_dag_l = &l_dag * &l;
                    collapse.push(Collapse {
                        l,
                        l_dag,
                        l_dag_l,
                        rate,
                    });
                }
            };
            push(Operator::embed(&Operator::sigma_minus(), q, n)?, noise.gamma1());
            push(
                Operator::embed(&Operator::pauli(PauliLabel::Z), q, n)?,
                0.5 * noise.gamma_phi(),
            );
        }
        Ok(Self {
            hamiltonian,
            collapse,
            dim: spec.dim(),
        })
    }

    pub fn hamiltonian(&self) -> &RegisterHamiltonian {
        &self.hamiltonian
    }

    /// Static bandwidth plus total dissipative rate, rad/s.
    pub fn static_rate(&self) -> f64 {
        let rates: f64 = self.collapse.iter().map(|c| c.rate * c.l_dag_l.max_abs()).sum();
        self.hamiltonian.static_bandwidth() + rates
    }

    fn rhs_into(&self, rho: &Operator, h: &Operator, out: &mut Operator, s: &mut Scratch) {
        h.mul_into(rho, &mut s.a);
        rho.mul_into(h, &mut s.b);
        for ((o, a), b) in out.data_mut().iter_mut().zip(s.a.data()).zip(s.b.data()) {
            *o = NEG_I * (a - b);
        }
        for c in &self.collapse {
            c.l.mul_into(rho, &mut s.a);
            s.a.mul_into(&c.l_dag, &mut s.b);
            c.l_dag_l.mul_into(rho, &mut s.a);
            rho.mul_into(&c.l_dag_l, &mut s.c);
            for (((o, jump), left), right) in out
                .data_mut()
                .iter_mut()
                .zip(s.b.data())
                .zip(s.a.data())
                .zip(s.c.data())
            {
                *o += c.rate * (jump - 0.5 * (left + right));
            }
        }
    }

    /// dρ/dt for a given Hamiltonian.
    pub fn rhs(&self, rho: &Operator, h: &Operator) -> Result<Operator> {
        if rho.dim() != self.dim || h.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: if rho.dim() != self.dim { rho.dim() } else { h.dim() },
            });
        }
        let mut out = Operator::zeros(self.dim);
        let mut s = Scratch::new(self.dim);
        self.rhs_into(rho, h, &mut out, &mut s);
        Ok(out)
    }

    /// Stationary state of the generator with a constant Hamiltonian.
    pub fn steady_state(&self, h: &Operator) -> Result<DensityMatrix> {
        let d = self.dim;
        let n = d * d;
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        let mut basis = Operator::zeros(d);
        for j in 0..n {
            basis.data_mut().fill(Complex64::new(0.0, 0.0));
            basis.data_mut()[j] = Complex64::new(1.0, 0.0);
            let col = self.rhs(&basis, h)?;
            for (i, v) in col.data().iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        // replace one equation by the trace constraint
        for j in 0..n {
            m[(0, j)] = Complex64::new(0.0, 0.0);
        }
        for k in 0..d {
            m[(0, k * d + k)] = Complex64::new(1.0, 0.0);
        }
        let mut rhs = DVector::<Complex64>::zeros(n);
        rhs[0] = Complex64::new(1.0, 0.0);
        let x = m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Degenerate("steady state is not unique".into()))?;
        let op = Operator::new(d, x.iter().copied().collect())?.symmetrized();
        DensityMatrix::new(op)
    }
}

/// `−i[H, ρ] + dissipators`, built from the spec's noise channels.
pub fn lindblad_rhs(rho: &DensityMatrix, h: &Operator, spec: &SystemSpec) -> Result<Operator> {
    Lindbladian::new(spec)?.rhs(rho.op(), h)
}

/// Sampled trajectory of the register state.
#[derive(Debug, Clone, Serialize)]
pub struct EvolutionResult {
    #[serde(rename = "times_s")]
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl EvolutionResult {
    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("evolution always records the initial state")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with columns `time_s, re_r_c, im_r_c, …` in row-major order.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let dim = self.states.first().map(|s| s.dim()).unwrap_or(0);
        let mut header = vec!["time_s".to_string()];
        for r in 0..dim {
            for c in 0..dim {
                header.push(format!("re_{r}_{c}"));
                header.push(format!("im_{r}_{c}"));
            }
        }
        wtr.write_record(&header)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut row = vec![round_sig(*t).to_string()];
            for z in s.op().data() {
                row.push(round_sig(z.re).to_string());
                row.push(round_sig(z.im).to_string());
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let rounded: Vec<Vec<Vec<[f64; 2]>>> = self
            .states
            .iter()
            .map(|s| {
                let d = s.dim();
                (0..d)
                    .map(|r| {
                        (0..d)
                            .map(|c| {
                                let z = s.op()[(r, c)];
                                [round_sig(z.re), round_sig(z.im)]
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let v = serde_json::json!({
            "schema": "evolution-v1",
            "times_s": self.times.iter().map(|t| round_sig(*t)).collect::<Vec<_>>(),
            "states": rounded,
        });
        Ok(serde_json::to_string_pretty(&v)?)
    }
}

struct Segment {
    start: f64,
    end: f64,
    drives: Vec<(usize, GaussianPulse)>,
}

fn breakpoints(schedule: &PulseSchedule) -> Vec<f64> {
    let mut pts = vec![0.0, schedule.duration()];
    for e in schedule.entries() {
        pts.push(e.start);
        pts.push(e.end());
    }
    pts.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(pts.len());
    for t in pts {
        match out.last() {
            Some(&last) if t - last <= 1e-15_f64.max(1e-12 * last.abs()) => {}
            _ => out.push(t),
        }
    }
    out
}

fn segments(schedule: &PulseSchedule) -> Vec<Segment> {
    let pts = breakpoints(schedule);
    pts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let drives = schedule.active_pulses(mid).map(|(q, p)| (q, *p)).collect();
            Segment {
                start: w[0],
                end: w[1],
                drives,
            }
        })
        .collect()
}

struct Stepper<'a> {
    model: &'a Lindbladian,
    h: Operator,
    k: [Operator; 4],
    tmp: Operator,
    scratch: Scratch,
}

impl<'a> Stepper<'a> {
    fn new(model: &'a Lindbladian) -> Self {
        let d = model.dim;
        Self {
            model,
            h: Operator::zeros(d),
            k: std::array::from_fn(|_| Operator::zeros(d)),
            tmp: Operator::zeros(d),
            scratch: Scratch::new(d),
        }
    }

    fn step(&mut self, rho: &mut Operator, drives: &[(usize, GaussianPulse)], t: f64, dt: f64) {
        let model = self.model;
        let Self {
            h, k, tmp, scratch, ..
        } = self;
        let mut eval = |input: &Operator, t: f64, out: &mut Operator| {
            model.hamiltonian.eval_into(drives, t, h);
            model.rhs_into(input, h, out, scratch);
        };
        let [k1, k2, k3, k4] = k;
        eval(rho, t, k1);
        axpy_into(tmp, rho, k1, 0.5 * dt);
        eval(tmp, t + 0.5 * dt, k2);
        axpy_into(tmp, rho, k2, 0.5 * dt);
        eval(tmp, t + 0.5 * dt, k3);
        axpy_into(tmp, rho, k3, dt);
        eval(tmp, t + dt, k4);
        let w = dt / 6.0;
        for (i, r) in rho.data_mut().iter_mut().enumerate() {
            *r += w * (k1.data()[i] + 2.0 * k2.data()[i] + 2.0 * k3.data()[i] + k4.data()[i]);
        }
    }
}

fn axpy_into(out: &mut Operator, x: &Operator, y: &Operator, a: f64) {
    for ((o, x), y) in out.data_mut().iter_mut().zip(x.data()).zip(y.data()) {
        *o = x + y * a;
    }
}

/// Checks the state invariants; repairs small drift, rejects large drift.
fn checked_state(rho: &mut Operator, t: f64) -> Result<DensityMatrix> {
    let herm = rho.hermitian_deviation();
    let tr = rho.trace();
    let drift = herm.max((tr.re - 1.0).abs()).max(tr.im.abs());
    if !drift.is_finite() || drift > ABORT_TOL {
        return Err(Error::Integration {
            t,
            reason: format!("state invariants violated (hermiticity {herm:.3e}, trace {:.9})", tr.re),
        });
    }
    if drift > RENORM_TOL {
        *rho = rho.symmetrized().scale_real(1.0 / rho.trace().re);
    }
    let min = *eig_hermitian(&rho.symmetrized())?.values.last().expect("non-empty");
    if min < -ABORT_TOL {
        return Err(Error::Integration {
            t,
            reason: format!("state lost positivity (eigenvalue {min:.3e})"),
        });
    }
    Ok(DensityMatrix::new_unchecked(rho.symmetrized()))
}

/// Integrates the master equation from `rho0` over the whole schedule.
pub fn evolve(
    rho0: &DensityMatrix,
    schedule: &PulseSchedule,
    spec: &SystemSpec,
    cfg: &IntegratorConfig,
) -> Result<EvolutionResult> {
    cfg.validate(spec)?;
    if rho0.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: rho0.dim(),
        });
    }
    if schedule.n_qubits() > spec.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: spec.n_qubits,
            got: schedule.n_qubits(),
        });
    }
    schedule.validate()?;
    let model = Lindbladian::new(spec)?;
    let base_rate = model.static_rate();

    // instantaneous rotations, keyed by time
    let mut rotations: Vec<(f64, Operator)> = Vec::new();
    for e in schedule.entries() {
        if let ScheduleItem::Rotation(r) = &e.item {
            rotations.push((e.start, Operator::embed(&r.unitary(), r.target, spec.n_qubits)?));
        }
    }
    rotations.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut next_rotation = 0;

    let mut rho = rho0.op().clone();
    let mut times = vec![0.0];
    let mut states = vec![rho0.clone()];
    let mut stepper = Stepper::new(&model);
    let mut step_count: usize = 0;
    let mut t = 0.0;

    let segs = segments(schedule);
    for (si, seg) in segs.iter().enumerate() {
        while next_rotation < rotations.len() && rotations[next_rotation].0 <= seg.start + 1e-15 {
            rho = rho.conjugate_by(&rotations[next_rotation].1);
            next_rotation += 1;
        }
        let omega = base_rate + seg.drives.iter().map(|(_, p)| model.hamiltonian.peak_rabi(p)).sum::<f64>();
        let len = seg.end - seg.start;
        let n_steps = (len / cfg.step_for(omega)).ceil().max(1.0) as usize;
        let h = len / n_steps as f64;
        for k in 0..n_steps {
            let t0 = seg.start + k as f64 * h;
            stepper.step(&mut rho, &seg.drives, t0, h);
            step_count += 1;
            t = if k + 1 == n_steps { seg.end } else { t0 + h };
            let last = si + 1 == segs.len() && k + 1 == n_steps;
            if cfg.sample_stride > 0 && step_count.is_multiple_of(cfg.sample_stride) && !last {
                let s = checked_state(&mut rho, t)?;
                times.push(t);
                states.push(s);
            }
        }
    }
    // rotations scheduled at the very end
    while next_rotation < rotations.len() {
        rho = rho.conjugate_by(&rotations[next_rotation].1);
        next_rotation += 1;
    }
    let end = schedule.duration().max(t);
    if end > 0.0 || !rotations.is_empty() {
        let s = checked_state(&mut rho, end)?;
        if end > *times.last().expect("initial sample") {
            times.push(end);
            states.push(s);
        } else {
            *states.last_mut().expect("initial sample") = s;
        }
    }
    Ok(EvolutionResult { times, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{CouplingSpec, NoiseSpec};
    use crate::pulses::{build_sequence, SequenceKind};
    use crate::qcore::{partial_transpose, trace_distance, unitary_propagator};
    use std::f64::consts::PI;

    fn idle(n_qubits: usize, duration: f64) -> PulseSchedule {
        let mut s = PulseSchedule::new(n_qubits);
        s.push(0, 0.0, ScheduleItem::Idle { duration }).unwrap();
        s
    }

    fn z_expect(rho: &DensityMatrix, q: usize) -> f64 {
        Operator::embed(&Operator::pauli(PauliLabel::Z), q, rho.n_qubits())
            .unwrap()
            .expectation(rho.op())
    }

    #[test]
    fn rhs_zero_without_dynamics() {
        let spec = SystemSpec::new(2);
        let rho = DensityMatrix::basis(2, 1).unwrap();
        let out = lindblad_rhs(&rho, &Operator::zeros(4), &spec).unwrap();
        assert_eq!(out.max_abs(), 0.0);
        assert!(lindblad_rhs(&DensityMatrix::basis(1, 0).unwrap(), &Operator::zeros(4), &spec).is_err());
    }

    #[test]
    fn rhs_is_traceless() {
        let spec = SystemSpec::new(2)
            .with_noise(0, NoiseSpec { t1: 3e-6, tphi: 5e-6 })
            .with_noise(1, NoiseSpec { t1: 7e-6, tphi: 2e-6 });
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rho = DensityMatrix::from_real_pure(&[s, 0.0, 0.5, 0.5]).unwrap();
        let h = Operator::diagonal_real(&[1e6, -2e6, 0.5e6, 0.0]).unwrap();
        let out = lindblad_rhs(&rho, &h, &spec).unwrap();
        assert!(out.trace().norm() < 1e-12 * out.max_abs().max(1.0));
    }

    #[test]
    fn amplitude_damping_follows_exponential() {
        let t1 = 2e-6;
        let spec = SystemSpec::new(1).with_noise(0, NoiseSpec { t1, tphi: f64::INFINITY });
        let cfg = IntegratorConfig::for_spec(&spec).unwrap().with_stride(50);
        let res = evolve(&DensityMatrix::basis(1, 1).unwrap(), &idle(1, 5e-6), &spec, &cfg).unwrap();
        assert!(res.len() > 10);
        for (t, s) in res.times.iter().zip(&res.states) {
            let p1 = s.op()[(1, 1)].re;
            assert!((p1 - (-t / t1).exp()).abs() < 1e-9, "t={t}: {p1}");
        }
    }

    #[test]
    fn pure_dephasing_coherence_law() {
        let tphi = 3e-6;
        let spec = SystemSpec::new(1).with_noise(0, NoiseSpec { t1: f64::INFINITY, tphi });
        let cfg = IntegratorConfig::for_spec(&spec).unwrap().with_stride(25);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::from_real_pure(&[s, s]).unwrap();
        let res = evolve(&plus, &idle(1, 6e-6), &spec, &cfg).unwrap();
        let x = Operator::pauli(PauliLabel::X);
        for (t, st) in res.times.iter().zip(&res.states) {
            let sx = x.expectation(st.op());
            assert!((sx - (-t / tphi).exp()).abs() < 1e-9, "t={t}: {sx}");
        }
    }

    /// Product of short-slice exponentials of H(t), independent of RK4.
    fn slice_oracle(rho0: &DensityMatrix, sched: &PulseSchedule, spec: &SystemSpec, slices: usize) -> DensityMatrix {
        let total = sched.duration();
        let h = total / slices as f64;
        let mut rho = rho0.clone();
        for k in 0..slices {
            let mid = (k as f64 + 0.5) * h;
            let hm = crate::hamiltonian::build_hamiltonian(spec, sched, mid).unwrap();
            rho = rho.evolve_unitary(&unitary_propagator(&hm, h).unwrap());
        }
        rho
    }

    #[test]
    fn noiseless_ramsey_matches_slice_oracle() {
        let delta = 2.0 * PI * 1e6;
        let spec = SystemSpec::new(1).with_detuning(0, delta);
        let cfg = IntegratorConfig::for_spec(&spec).unwrap();
        let template = spec.pi_pulse(&Default::default());
        for k in 0..6 {
            let tau = k as f64 * 0.13e-6;
            let sched = build_sequence(SequenceKind::Ramsey { tau }, &template).unwrap();
            let rho0 = DensityMatrix::basis(1, 0).unwrap();
            let res = evolve(&rho0, &sched, &spec, &cfg).unwrap();
            let oracle = slice_oracle(&rho0, &sched, &spec, 40_000);
            let d = trace_distance(res.final_state().op(), oracle.op()).unwrap();
            assert!(d < 1e-6, "tau={tau}: distance {d:e}");
        }
        // with instantaneous pulses the fringe is exactly cos(δτ)
        let mut sched = PulseSchedule::new(1);
        let tau = 0.37e-6;
        let half = crate::pulses::IdealRotation::new(PI / 2.0, 0.0, 0);
        sched.push(0, 0.0, ScheduleItem::Rotation(half)).unwrap();
        sched.push(0, 0.0, ScheduleItem::Idle { duration: tau }).unwrap();
        sched.push(0, tau, ScheduleItem::Rotation(half)).unwrap();
        let res = evolve(&DensityMatrix::basis(1, 0).unwrap(), &sched, &spec, &cfg).unwrap();
        let p1 = res.final_state().op()[(1, 1)].re;
        assert!((p1 - 0.5 * (1.0 + (delta * tau).cos())).abs() < 1e-9, "{p1}");
    }

    #[test]
    fn hahn_echo_refocuses_detuning() {
        let template = SystemSpec::new(1).pi_pulse(&Default::default());
        for delta in [2.0 * PI * 0.2e6, 2.0 * PI * 1e6, -2.0 * PI * 0.5e6] {
            let spec = SystemSpec::new(1).with_detuning(0, delta);
            let cfg = IntegratorConfig::for_spec(&spec).unwrap();
            let sched = build_sequence(SequenceKind::HahnEcho { tau: 1.7e-6 }, &template).unwrap();
            let res = evolve(&DensityMatrix::basis(1, 0).unwrap(), &sched, &spec, &cfg).unwrap();
            let z = z_expect(res.final_state(), 0);
            // residual comes only from detuning during the finite pulses
            assert!((z + 1.0).abs() < 5e-3, "δ={delta}: ⟨σz⟩={z}");
        }
    }

    #[test]
    fn halving_dt_changes_little() {
        let spec = SystemSpec::new(2)
            .with_detuning(0, 2.0 * PI * 0.4e6)
            .with_noise(0, NoiseSpec { t1: 20e-6, tphi: 10e-6 })
            .with_noise(1, NoiseSpec { t1: 30e-6, tphi: 8e-6 })
            .with_coupling(CouplingSpec {
                pair: (0, 1),
                zz: 2.0 * PI * 50e3,
                exchange: 2.0 * PI * 100e3,
            });
        let template = spec.pi_pulse(&Default::default());
        let sched = build_sequence(SequenceKind::NvNvImpurity { tau: 0.8e-6 }, &template).unwrap();
        let rho0 = DensityMatrix::basis(2, 0).unwrap();
        let cfg = IntegratorConfig::for_spec(&spec).unwrap();
        let fine = IntegratorConfig {
            dt: cfg.dt / 2.0,
            steps_per_radian: cfg.steps_per_radian * 2.0,
            ..cfg
        };
        let a = evolve(&rho0, &sched, &spec, &cfg).unwrap();
        let b = evolve(&rho0, &sched, &spec, &fine).unwrap();
        let d = (a.final_state().op() - b.final_state().op()).max_abs();
        assert!(d < 1e-8, "{d:e}");
    }

    #[test]
    fn exchange_reaches_maximal_entanglement() {
        let a = 2.0 * PI * 100e3;
        let spec = SystemSpec::new(2).with_coupling(CouplingSpec {
            pair: (0, 1),
            zz: 0.0,
            exchange: a,
        });
        let cfg = IntegratorConfig::for_spec(&spec).unwrap();
        let pm = DensityMatrix::from_real_pure(&[0.5, -0.5, 0.5, -0.5]).unwrap();
        let t = PI / (4.0 * a);
        let res = evolve(&pm, &idle(2, t), &spec, &cfg).unwrap();
        let pt = partial_transpose(res.final_state().op(), 1).unwrap();
        let min = *eig_hermitian(&pt).unwrap().values.last().unwrap();
        assert!((min + 0.5).abs() < 1e-3, "{min}");
    }

    #[test]
    fn agrees_with_matrix_exponential() {
        let spec = SystemSpec::new(2)
            .with_detuning(0, 2.0 * PI * 0.3e6)
            .with_detuning(1, -2.0 * PI * 0.2e6)
            .with_coupling(CouplingSpec {
                pair: (0, 1),
                zz: 2.0 * PI * 80e3,
                exchange: 2.0 * PI * 60e3,
            });
        let cfg = IntegratorConfig::for_spec(&spec).unwrap();
        let rho0 = DensityMatrix::from_real_pure(&[0.3, 0.5, -0.6, 0.2]).unwrap();
        let t = 4e-6;
        let res = evolve(&rho0, &idle(2, t), &spec, &cfg).unwrap();
        let h = RegisterHamiltonian::new(&spec).unwrap().static_part().clone();
        let u = unitary_propagator(&h, t).unwrap();
        let exact = rho0.evolve_unitary(&u);
        let d = trace_distance(res.final_state().op(), exact.op()).unwrap();
        assert!(d < 1e-7, "{d:e}");
    }

    #[test]
    fn ideal_rotation_is_applied_instantly() {
        let spec = SystemSpec::new(1);
        let mut s = PulseSchedule::new(1);
        s.push(0, 0.0, ScheduleItem::Idle { duration: 1e-7 }).unwrap();
        s.push(0, 1e-7, ScheduleItem::Rotation(crate::pulses::IdealRotation::new(PI, 0.0, 0)))
            .unwrap();
        s.push(0, 1e-7, ScheduleItem::Idle { duration: 1e-7 }).unwrap();
        let res = evolve(&DensityMatrix::basis(1, 0).unwrap(), &s, &spec, &IntegratorConfig::default()).unwrap();
        assert!((z_expect(res.final_state(), 0) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn dt_bound_enforced() {
        let spec = SystemSpec::new(1).with_detuning(0, 2.0 * PI * 10e6);
        let cfg = IntegratorConfig {
            dt: 1e-8,
            ..Default::default()
        };
        assert!(cfg.validate(&spec).is_err());
        assert!(IntegratorConfig::for_spec(&spec).unwrap().validate(&spec).is_ok());
    }

    #[test]
    fn steady_state_of_driven_qubit() {
        // Bloch-equation steady state: ρ11 = ½ s / (1 + s + Δ²T2²), s = Ω² T1 T2
        let (t1, t2) = (20e-6, 15e-6);
        let noise = NoiseSpec::from_t2(t1, t2).unwrap();
        let omega = 2.0 * PI * 50e3;
        let delta = 2.0 * PI * 20e3;
        let spec = SystemSpec::new(1).with_noise(0, noise).with_detuning(0, delta);
        let model = Lindbladian::new(&spec).unwrap();
        let mut h = model.hamiltonian().static_part().clone();
        h.add_scaled(&Operator::pauli(PauliLabel::X), Complex64::new(omega / 2.0, 0.0));
        let ss = model.steady_state(&h).unwrap();
        let s = omega * omega * t1 * t2;
        let expected = 0.5 * s / (1.0 + s + delta * delta * t2 * t2);
        assert!((ss.op()[(1, 1)].re - expected).abs() < 1e-10);
    }

    #[test]
    fn csv_and_json_export() {
        let spec = SystemSpec::new(1).with_detuning(0, 1e6);
        let cfg = IntegratorConfig::for_spec(&spec).unwrap().with_stride(1000);
        let plus = DensityMatrix::from_real_pure(&[1.0, 1.0]).unwrap();
        let res = evolve(&plus, &idle(1, 2e-6), &spec, &cfg).unwrap();
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("time_s,re_0_0,im_0_0,re_0_1"));
        assert_eq!(text.lines().count(), res.len() + 1);
        let v: serde_json::Value = serde_json::from_str(&res.to_json().unwrap()).unwrap();
        assert_eq!(v["schema"], "evolution-v1");
        assert_eq!(v["states"].as_array().unwrap().len(), res.len());
    }

    #[test]
    fn sampled_times_strictly_increase() {
        let spec = SystemSpec::new(2).with_noise(1, NoiseSpec { t1: 5e-6, tphi: 4e-6 });
        let cfg = IntegratorConfig::for_spec(&spec).unwrap().with_stride(7);
        let template = spec.pi_pulse(&Default::default());
        let sched = build_sequence(SequenceKind::NuclearImpurity { tau: 0.5e-6 }, &template).unwrap();
        let res = evolve(&DensityMatrix::basis(2, 0).unwrap(), &sched, &spec, &cfg).unwrap();
        assert!(res.times.windows(2).all(|w| w[1] > w[0]));
        assert!((res.times.last().unwrap() - sched.duration()).abs() < 1e-18);
    }
}
