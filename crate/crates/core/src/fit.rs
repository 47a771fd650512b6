// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Nonlinear least-squares fitting for sweep and decay data.
//!
//! All fits run on internally normalized coordinates (x shifted and scaled
//! to order one, y standardized), start from a grid scan combined with a
//! linear solve for the linear parameters, and finish with damped
//! Gauss-Newton (Levenberg-Marquardt) iterations using central-difference
//! Jacobians.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;
/// Relative parameter change that ends the iteration.
pub const PARAM_TOL: f64 = 1e-8;
/// Relative step of the central-difference Jacobian.
pub const JACOBIAN_STEP: f64 = 1e-6;
/// Amplitudes below this fraction of the data spread are flagged degenerate.
const DEGENERATE_AMP: f64 = 1e-6;
/// Largest decay time considered resolvable, in units of the fit window.
pub const MAX_DECAY_WINDOWS: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepData {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl SweepData {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidArgument(format!(
                "sweep has {} x values but {} y values",
                x.len(),
                y.len()
            )));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("sweep contains non-finite values".into()));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn require(&self, n_params: usize) -> Result<()> {
        if self.len() < n_params + 1 {
            return Err(Error::InvalidArgument(format!(
                "need at least {} points for a {n_params}-parameter fit, got {}",
                n_params + 1,
                self.len()
            )));
        }
        Ok(())
    }

    fn x_range(&self) -> (f64, f64) {
        self.x
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// CSV with header `x,y`.
    pub fn write_csv<W: std::io::Write>(&self, w: W, x_name: &str, y_name: &str) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([x_name, y_name])?;
        for (x, y) in self.x.iter().zip(&self.y) {
            wtr.write_record([
                crate::numfmt::fmt_number(*x),
                crate::numfmt::fmt_number(*y),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `baseline + amp·(γ/2)² / ((x − f0)² + (γ/2)²)`
    Lorentzian,
    /// `baseline + amp·cos(2πx/period + phase)`
    Cosine,
    /// `baseline + amp·exp(−x/τ)·cos(2π·f·x + phase)`
    DampedSinusoid,
    /// `baseline + amp·exp(−x/τ)`
    Exponential,
}

impl FitModel {
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FitModel::Lorentzian => &["center", "width", "amplitude", "baseline"],
            FitModel::Cosine => &["period", "phase", "amplitude", "baseline"],
            FitModel::DampedSinusoid => &["frequency", "decay_rate", "amplitude", "phase", "baseline"],
            FitModel::Exponential => &["decay_rate", "amplitude", "baseline"],
        }
    }

    pub fn eval(self, x: f64, p: &[f64]) -> f64 {
        match self {
            FitModel::Lorentzian => {
                let hw = 0.5 * p[1];
                let d = x - p[0];
                p[3] + p[2] * hw * hw / (d * d + hw * hw)
            }
            FitModel::Cosine => p[3] + p[2] * (2.0 * PI * x / p[0] + p[1]).cos(),
            FitModel::DampedSinusoid => p[4] + p[2] * (-p[1] * x).exp() * (2.0 * PI * p[0] * x + p[3]).cos(),
            FitModel::Exponential => p[2] + p[1] * (-p[0] * x).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitFlag {
    /// The oscillation or peak amplitude is indistinguishable from zero.
    Degenerate,
    /// Less than a quarter period over the window.
    OnResonance,
    /// No resolvable decay over the window.
    NonDecaying,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedParam {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub params: Vec<NamedParam>,
    /// Euclidean norm of the residual vector in data units.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<FitFlag>,
}

impl FitResult {
    fn new(model: FitModel, values: &[f64], data: &SweepData, outcome: &LmOutcome) -> Self {
        let params = model
            .param_names()
            .iter()
            .zip(values)
            .map(|(n, v)| NamedParam {
                name: n.to_string(),
                value: *v,
            })
            .collect();
        let rss: f64 = data
            .x
            .iter()
            .zip(&data.y)
            .map(|(x, y)| (y - model.eval(*x, values)).powi(2))
            .sum();
        Self {
            model,
            params,
            residual_norm: rss.sqrt(),
            converged: outcome.converged,
            iterations: outcome.iterations,
            flags: Vec::new(),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }

    /// Like [`get`](Self::get) for names the model is known to have.
    pub fn param(&self, name: &str) -> f64 {
        self.get(name)
            .unwrap_or_else(|| panic!("{:?} fit has no parameter `{name}`", self.model))
    }

    pub fn values(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.value).collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.model.eval(x, &self.values())
    }

    pub fn has_flag(&self, f: FitFlag) -> bool {
        self.flags.contains(&f)
    }

    /// `period / 2` of a cosine fit.
    pub fn pi_amplitude(&self) -> Option<f64> {
        (self.model == FitModel::Cosine).then(|| 0.5 * self.param("period"))
    }

    /// `1 / decay_rate`, infinite when the rate is not positive.
    pub fn decay_time(&self) -> Option<f64> {
        let k = self.get("decay_rate")?;
        Some(if k > 0.0 { 1.0 / k } else { f64::INFINITY })
    }

    fn ensure_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::FitFailed(format!(
                "{:?} fit did not converge in {} iterations",
                self.model, self.iterations
            )))
        }
    }
}

/// Options of the damped Gauss-Newton engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    pub param_tol: f64,
    pub jacobian_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: MAX_ITERATIONS,
            param_tol: PARAM_TOL,
            jacobian_step: JACOBIAN_STEP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// Sum of squared residuals at `params`.
    pub cost: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Cost after each accepted step, starting with the initial cost.
    pub history: Vec<f64>,
}

fn cost_of(model: &dyn Fn(f64, &[f64]) -> f64, x: &[f64], y: &[f64], p: &[f64]) -> f64 {
    x.iter().zip(y).map(|(xi, yi)| (yi - model(*xi, p)).powi(2)).sum()
}

/// Minimizes `Σ (y − model(x, p))²` from `p0`.
pub fn levenberg_marquardt(
    model: &dyn Fn(f64, &[f64]) -> f64,
    x: &[f64],
    y: &[f64],
    p0: &[f64],
    opts: &LmOptions,
) -> LmOutcome {
    let n = x.len();
    let m = p0.len();
    let mut p = p0.to_vec();
    let mut cost = cost_of(model, x, y, &p);
    let mut history = vec![cost];
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut jac = DMatrix::<f64>::zeros(n, m);
    let mut resid = DVector::<f64>::zeros(n);
    let mut fresh = true;

    while iterations < opts.max_iterations {
        iterations += 1;
        if fresh {
            for i in 0..n {
                resid[i] = y[i] - model(x[i], &p);
            }
            let mut probe = p.clone();
            for k in 0..m {
                let h = opts.jacobian_step * p[k].abs().max(1.0);
                probe[k] = p[k] + h;
                let plus: Vec<f64> = x.iter().map(|&xi| model(xi, &probe)).collect();
                probe[k] = p[k] - h;
                for i in 0..n {
                    jac[(i, k)] = (plus[i] - model(x[i], &probe)) / (2.0 * h);
                }
                probe[k] = p[k];
            }
            fresh = false;
        }
        let jt = jac.transpose();
        let a = &jt * &jac;
        let g = &jt * &resid;
        let mut damped = a.clone();
        for k in 0..m {
            damped[(k, k)] += lambda * a[(k, k)].max(1e-12);
        }
        let step = damped
            .clone()
            .cholesky()
            .map(|c| c.solve(&g))
            .or_else(|| damped.lu().solve(&g));
        let Some(step) = step else {
            lambda *= 10.0;
            continue;
        };
        let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
        let trial_cost = cost_of(model, x, y, &trial);
        if trial_cost.is_finite() && trial_cost <= cost {
            let small = step
                .iter()
                .zip(&p)
                .all(|(d, v)| d.abs() <= opts.param_tol * (v.abs() + opts.param_tol));
            p = trial;
            cost = trial_cost;
            history.push(cost);
            lambda = (lambda / 3.0).max(1e-12);
            fresh = true;
            if small {
                converged = true;
                break;
            }
        } else {
            lambda *= 4.0;
            if lambda > 1e12 {
                // no descent direction left at working precision
                converged = true;
                break;
            }
        }
    }
    LmOutcome {
        params: p,
        cost,
        converged,
        iterations,
        history,
    }
}

/// Affine map of the data onto order-one coordinates.
#[derive(Debug, Clone, Copy)]
struct Frame {
    x0: f64,
    xs: f64,
    y0: f64,
    ys: f64,
}

impl Frame {
    fn new(data: &SweepData, center_x: bool) -> Self {
        let (lo, hi) = data.x_range();
        let (x0, xs) = if center_x {
            (0.5 * (lo + hi), 0.5 * (hi - lo))
        } else {
            (0.0, lo.abs().max(hi.abs()))
        };
        let n = data.len() as f64;
        let y0 = data.y.iter().sum::<f64>() / n;
        let var = data.y.iter().map(|v| (v - y0).powi(2)).sum::<f64>() / n;
        let ys = var.sqrt();
        let ys = if ys > 1e-300 && ys > 1e-14 * y0.abs() { ys } else { 1.0 };
        Self {
            x0,
            xs: if xs > 0.0 { xs } else { 1.0 },
            y0,
            ys,
        }
    }

    fn apply(&self, data: &SweepData) -> (Vec<f64>, Vec<f64>) {
        (
            data.x.iter().map(|x| (x - self.x0) / self.xs).collect(),
            data.y.iter().map(|y| (y - self.y0) / self.ys).collect(),
        )
    }
}

/// Least-squares coefficients of `y ≈ Σ c_k basis_k(x)`; rank-deficient
/// columns get zero weight.
fn linear_solve(columns: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let n = y.len();
    let m = columns.len();
    let a = DMatrix::from_fn(n, m, |i, k| columns[k][i]);
    let b = DVector::from_column_slice(y);
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(m));
    let r = &b - &a * &coef;
    (coef.iter().copied().collect(), r.norm_squared())
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn run_lm(model: FitModel, u: &[f64], v: &[f64], p0: &[f64]) -> LmOutcome {
    levenberg_marquardt(&|x, p| model.eval(x, p), u, v, p0, &LmOptions::default())
}

/// Fits `baseline + amp·(γ/2)²/((x − f0)² + (γ/2)²)`.
///
/// `init` is `[center, width, amplitude, baseline]` in data units.
pub fn fit_lorentzian(data: &SweepData, init: Option<&[f64]>) -> Result<FitResult> {
    let model = FitModel::Lorentzian;
    data.require(4)?;
    let fr = Frame::new(data, true);
    let (u, v) = fr.apply(data);
    let p0 = match init {
        Some(p) => vec![
            (p[0] - fr.x0) / fr.xs,
            p[1] / fr.xs,
            p[2] / fr.ys,
            (p[3] - fr.y0) / fr.ys,
        ],
        None => {
            let base = median(&v);
            let (k, _) = v
                .iter()
                .enumerate()
                .map(|(i, vi)| (i, (vi - base).abs()))
                .fold((0, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            let center = u[k];
            let mut best = (f64::INFINITY, vec![center, 0.1, v[k] - base, base]);
            // widths from a few sample spacings up to the full window
            let mut width = 2.0 * (2.0 / u.len() as f64);
            while width < 4.0 {
                let hw = 0.5 * width;
                let col: Vec<f64> = u.iter().map(|x| hw * hw / ((x - center).powi(2) + hw * hw)).collect();
                let (c, rss) = linear_solve(&[col, vec![1.0; u.len()]], &v);
                if rss < best.0 {
                    best = (rss, vec![center, width, c[0], c[1]]);
                }
                width *= 1.25;
            }
            best.1
        }
    };
    let out = run_lm(model, &u, &v, &p0);
    let p = &out.params;
    let values = [
        fr.x0 + fr.xs * p[0],
        (fr.xs * p[1]).abs(),
        fr.ys * p[2],
        fr.y0 + fr.ys * p[3],
    ];
    let mut res = FitResult::new(model, &values, data, &out);
    if p[2].abs() < DEGENERATE_AMP {
        res.flags.push(FitFlag::Degenerate);
        return Ok(res);
    }
    let (lo, hi) = data.x_range();
    if !(lo..=hi).contains(&values[0]) {
        return Err(Error::FitFailed(format!(
            "Lorentzian center {:e} outside the swept range [{lo:e}, {hi:e}]",
            values[0]
        )));
    }
    res.ensure_converged()
}

/// Best frequency (cycles per unit x) on a grid, with linear coefficients
/// for `[1, e^{−kx}cos, e^{−kx}sin]`.
fn scan_sinusoid(u: &[f64], v: &[f64], freqs: &[f64], rates: &[f64]) -> (f64, f64, [f64; 3]) {
    let mut best = (f64::INFINITY, 0.0, 0.0, [0.0; 3]);
    for &k in rates {
        for &f in freqs {
            let env: Vec<f64> = u.iter().map(|x| (-k * x).exp()).collect();
            let c: Vec<f64> = u.iter().zip(&env).map(|(x, e)| e * (2.0 * PI * f * x).cos()).collect();
            let s: Vec<f64> = u.iter().zip(&env).map(|(x, e)| e * (2.0 * PI * f * x).sin()).collect();
            let (coef, rss) = linear_solve(&[vec![1.0; u.len()], c, s], v);
            if rss < best.0 {
                best = (rss, f, k, [coef[0], coef[1], coef[2]]);
            }
        }
    }
    (best.1, best.2, best.3)
}

fn frequency_grid(u: &[f64], include_zero: bool) -> Vec<f64> {
    let span = u.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - u.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let span = if span > 0.0 { span } else { 1.0 };
    let nyquist = 0.5 * (u.len() as f64 - 1.0) / span;
    let df = 0.1 / span;
    let mut out = Vec::new();
    let mut f = if include_zero { 0.0 } else { 0.5 / span };
    while f <= nyquist + 1e-12 {
        out.push(f);
        f += df;
    }
    if out.is_empty() {
        out.push(0.5 / span);
    }
    out
}

/// `c·cos θ + s·sin θ = a·cos(θ + φ)` with `a ≥ 0`.
fn amp_phase(c: f64, s: f64) -> (f64, f64) {
    (c.hypot(s), (-s).atan2(c))
}

/// Fits `baseline + amp·cos(2πx/period + phase)`.
///
/// `init` is `[period, phase, amplitude, baseline]`.
pub fn fit_cosine(data: &SweepData, init: Option<&[f64]>) -> Result<FitResult> {
    let model = FitModel::Cosine;
    data.require(4)?;
    let fr = Frame::new(data, false);
    let (u, v) = fr.apply(data);
    let p0 = match init {
        Some(p) => vec![p[0] / fr.xs, p[1], p[2] / fr.ys, (p[3] - fr.y0) / fr.ys],
        None => {
            let (f, _, c) = scan_sinusoid(&u, &v, &frequency_grid(&u, false), &[0.0]);
            let (a, phi) = amp_phase(c[1], c[2]);
            vec![1.0 / f, phi, a, c[0]]
        }
    };
    let out = run_lm(model, &u, &v, &p0);
    let p = &out.params;
    let (mut period, mut phase, mut amp) = (fr.xs * p[0], p[1], fr.ys * p[2]);
    if period < 0.0 {
        period = -period;
        phase = -phase;
    }
    if amp < 0.0 {
        amp = -amp;
        phase += PI;
    }
    let phase = (phase + PI).rem_euclid(2.0 * PI) - PI;
    let values = [period, phase, amp, fr.y0 + fr.ys * p[3]];
    let mut res = FitResult::new(model, &values, data, &out);
    if p[2].abs() < DEGENERATE_AMP || fr.ys == 1.0 && data.y.iter().all(|y| *y == data.y[0]) {
        res.flags.push(FitFlag::Degenerate);
        return Ok(res);
    }
    res.ensure_converged()
}

/// Fits `baseline + amp·exp(−x·decay_rate)·cos(2π·frequency·x + phase)`.
///
/// `init` is `[frequency, decay_rate, amplitude, phase, baseline]`.
pub fn fit_damped_sinusoid(data: &SweepData, init: Option<&[f64]>) -> Result<FitResult> {
    let model = FitModel::DampedSinusoid;
    data.require(5)?;
    let fr = Frame::new(data, false);
    let (u, v) = fr.apply(data);
    let p0 = match init {
        Some(p) => vec![p[0] * fr.xs, p[1] * fr.xs, p[2] / fr.ys, p[3], (p[4] - fr.y0) / fr.ys],
        None => {
            let rates = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0];
            let (f, k, c) = scan_sinusoid(&u, &v, &frequency_grid(&u, true), &rates);
            let (a, phi) = amp_phase(c[1], c[2]);
            vec![f, k, a, phi, c[0]]
        }
    };
    let out = run_lm(model, &u, &v, &p0);
    let (lo, hi) = data.x_range();
    let p = &out.params;
    if init.is_none() && (!out.converged || (p[0] / fr.xs).abs() * (hi - lo) < 0.25) {
        // phase and amplitude are redundant at zero frequency; compare with
        // the pure-decay model and keep it unless oscillation fits better
        let pure = run_lm(FitModel::Exponential, &u, &v, &[p[1].max(0.0), p[2] * p[3].cos(), p[4]]);
        if !out.converged || pure.cost <= out.cost * (1.0 + 1e-6) + 1e-24 {
            let q = &pure.params;
            let (amp, phase) = if q[1] < 0.0 { (-q[1], PI) } else { (q[1], 0.0) };
            let values = [0.0, q[0] / fr.xs, fr.ys * amp, phase, fr.y0 + fr.ys * q[2]];
            let mut res = FitResult::new(model, &values, data, &pure);
            res.flags.push(FitFlag::OnResonance);
            return res.ensure_converged();
        }
    }
    let (mut f, mut phase, mut amp) = (p[0] / fr.xs, p[3], fr.ys * p[2]);
    if f < 0.0 {
        f = -f;
        phase = -phase;
    }
    if amp < 0.0 {
        amp = -amp;
        phase += PI;
    }
    let phase = (phase + PI).rem_euclid(2.0 * PI) - PI;
    let values = [f, p[1] / fr.xs, amp, phase, fr.y0 + fr.ys * p[4]];
    let mut res = FitResult::new(model, &values, data, &out);
    if f * (hi - lo) < 0.25 {
        res.flags.push(FitFlag::OnResonance);
    }
    if p[2].abs() < DEGENERATE_AMP {
        res.flags.push(FitFlag::Degenerate);
        return Ok(res);
    }
    res.ensure_converged()
}

/// Fits `baseline + amp·exp(−x·decay_rate)`.
///
/// `init` is `[decay_rate, amplitude, baseline]`.
pub fn fit_exponential(data: &SweepData, init: Option<&[f64]>) -> Result<FitResult> {
    let model = FitModel::Exponential;
    data.require(3)?;
    let fr = Frame::new(data, false);
    let (u, v) = fr.apply(data);
    let p0 = match init {
        Some(p) => vec![p[0] * fr.xs, p[1] / fr.ys, (p[2] - fr.y0) / fr.ys],
        None => {
            let mut best = (f64::INFINITY, vec![0.0, 0.0, 0.0]);
            let mut k = 1.0 / MAX_DECAY_WINDOWS;
            while k < 200.0 {
                let col: Vec<f64> = u.iter().map(|x| (-k * x).exp()).collect();
                let (c, rss) = linear_solve(&[col, vec![1.0; u.len()]], &v);
                if rss < best.0 {
                    best = (rss, vec![k, c[0], c[1]]);
                }
                k *= 1.15;
            }
            best.1
        }
    };
    let out = run_lm(model, &u, &v, &p0);
    let p = &out.params;
    let values = [p[0] / fr.xs, fr.ys * p[1], fr.y0 + fr.ys * p[2]];
    let mut res = FitResult::new(model, &values, data, &out);
    let (lo, hi) = data.x_range();
    if p[1].abs() < DEGENERATE_AMP || values[0] * (hi - lo).max(hi) < 1.0 / MAX_DECAY_WINDOWS {
        res.flags.push(FitFlag::NonDecaying);
        return Ok(res);
    }
    res.ensure_converged()
}
