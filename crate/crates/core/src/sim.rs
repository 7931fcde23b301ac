//! One-dimensional fluid-structure toy model.
//!
//! Heat-type fluid velocity `v` on `(0,1)` with a free (Neumann) end at 0,
//! coupled at `x = 1` to a damped wave `w_tt = w_xx − α w_t` on `(1,2)`,
//! clamped at `x = 2`. Interface conditions: `v(1) = w_t(1)` and
//! `v_x(1⁻) = w_x(1⁺)`.
//!
//! Space: lumped-mass P1 finite elements on a global node grid whose
//! interface node is shared by both subdomains, so velocity continuity holds
//! by construction and the flux balance is the interface momentum row.
//! Time: implicit midpoint on the first-order form, one banded solve per step.
//! With `E = ½VᵀMV + ½WᵀK_sW` the scheme satisfies exactly
//!
//! ```text
//! E^{n+1} − E^n = −dt (V_mᵀ K_f V_m + α V_mᵀ M_s V_m),   V_m = (V^{n+1} + V^n)/2.
//! ```

use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

use crate::band::{BandLu, BandMatrix};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    Coupled,
    /// Interface pinned: `v(1) = w_t(1) = w(1) = 0`. Fluid and solid decouple
    /// and the solid becomes a string clamped at both ends.
    ClampedInterface,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Zero,
    /// Fluid at rest, `w = sin(π(x−1))`, `w_t = 0`.
    SolidSine,
    /// Fluid at rest, `w = sin⁴(π(x−1))`, `w_t = 0`. Vanishes to fourth order
    /// at both ends, so it is compatible with the interface conditions.
    SolidBump,
    /// `v = cos(πx) + 1`, solid at rest.
    FluidCosine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ImplicitMidpoint,
}

/// Weights for the energy levels `{id, ∂t, ∂tt}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimWeights {
    pub c_id: Rational,
    pub c_dt: Rational,
    pub c_dtt: Rational,
}

fn f64_or_rational<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Num {
        F(f64),
        S(String),
    }
    match Num::deserialize(d)? {
        Num::F(x) => Ok(x),
        Num::S(s) => Rational::from_str(&s).map(|r| r.to_f64()).map_err(serde::de::Error::custom),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_f: usize,
    pub n_s: usize,
    #[serde(deserialize_with = "f64_or_rational")]
    pub dt: f64,
    #[serde(deserialize_with = "f64_or_rational")]
    pub t_end: f64,
    pub alpha: Rational,
    pub lambda: Rational,
    pub weights: SimWeights,
    pub profile: Profile,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default = "default_coupling")]
    pub coupling: Coupling,
    /// Fit window `[t0, t1]`; defaults to the second half of the run.
    #[serde(default)]
    pub fit_window: Option<(f64, f64)>,
}

fn default_scheme() -> Scheme {
    Scheme::ImplicitMidpoint
}

fn default_coupling() -> Coupling {
    Coupling::Coupled
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_f: 128,
            n_s: 128,
            dt: 1e-3,
            t_end: 40.0,
            alpha: Rational::frac(1, 2),
            lambda: Rational::frac(1, 8),
            weights: SimWeights { c_id: Rational::int(5), c_dt: Rational::frac(20, 3), c_dtt: Rational::frac(25, 3) },
            profile: Profile::SolidBump,
            scheme: Scheme::ImplicitMidpoint,
            coupling: Coupling::Coupled,
            fit_window: None,
        }
    }
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_f < 4 || self.n_s < 4 {
            return bad(format!("grid too coarse: n_f = {}, n_s = {} (need ≥ 4)", self.n_f, self.n_s));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive: {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= 10.0 * self.dt) {
            return bad(format!("t_end must be at least 10 dt: {}", self.t_end));
        }
        if !self.alpha.is_positive() {
            return bad(format!("alpha must be positive: {}", self.alpha));
        }
        if !self.lambda.is_positive() || self.lambda > Rational::one() {
            return bad(format!("lambda must lie in (0, 1]: {}", self.lambda));
        }
        if let Some((a, b)) = self.fit_window {
            if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b && b <= self.t_end + self.dt) {
                return bad(format!("fit window [{a}, {b}] outside [0, t_end]"));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or((self.t_end / 2.0, self.t_end))
    }

    /// `λ^{−c_S}` for `S = id, ∂t, ∂tt`.
    pub fn level_weights(&self) -> [f64; 3] {
        let l = self.lambda.to_f64();
        [&self.weights.c_id, &self.weights.c_dt, &self.weights.c_dtt].map(|c| l.powf(-c.to_f64()))
    }
}

/// Index map between grid nodes and unknowns.
///
/// Global nodes `g = 0..=N`, `N = n_f + n_s`; node `n_f` is the interface and
/// node `N` the clamped end. Fluid nodes `g < n_f` carry one unknown `V_g`;
/// nodes `n_f ≤ g < N` carry `V_g, W_g` in that order. Dimension `n_f + 2n_s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub n_f: usize,
    pub n_s: usize,
}

impl Layout {
    pub fn nodes(&self) -> usize {
        self.n_f + self.n_s
    }

    pub fn dim(&self) -> usize {
        self.n_f + 2 * self.n_s
    }

    pub fn v_index(&self, g: usize) -> Option<usize> {
        if g < self.n_f {
            Some(g)
        } else if g < self.nodes() {
            Some(self.n_f + 2 * (g - self.n_f))
        } else {
            None
        }
    }

    pub fn w_index(&self, g: usize) -> Option<usize> {
        if g >= self.n_f && g < self.nodes() {
            Some(self.n_f + 2 * (g - self.n_f) + 1)
        } else {
            None
        }
    }

    pub fn h_f(&self) -> f64 {
        1.0 / self.n_f as f64
    }

    pub fn h_s(&self) -> f64 {
        1.0 / self.n_s as f64
    }

    pub fn x(&self, g: usize) -> f64 {
        if g <= self.n_f {
            g as f64 * self.h_f()
        } else {
            1.0 + (g - self.n_f) as f64 * self.h_s()
        }
    }

    /// Lumped fluid and solid masses at node `g`.
    pub fn masses(&self, g: usize) -> (f64, f64) {
        let (hf, hs) = (self.h_f(), self.h_s());
        let mf = if g == 0 || g == self.n_f {
            hf / 2.0
        } else if g < self.n_f {
            hf
        } else {
            0.0
        };
        let ms = if g == self.n_f || g == self.nodes() {
            hs / 2.0
        } else if g > self.n_f {
            hs
        } else {
            0.0
        };
        (mf, ms)
    }
}

/// Physical fields on the two subgrids.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub time: f64,
    /// Fluid velocity at `x_i = i/n_f`, `i = 0..=n_f`.
    pub v: Vec<f64>,
    /// Solid displacement at `y_j = 1 + j/n_s`, `j = 0..=n_s`.
    pub w: Vec<f64>,
    pub wt: Vec<f64>,
}

impl SimState {
    pub fn zero(l: Layout) -> Self {
        Self { time: 0.0, v: vec![0.0; l.n_f + 1], w: vec![0.0; l.n_s + 1], wt: vec![0.0; l.n_s + 1] }
    }

    /// Sample initial data. Velocity continuity is imposed by taking the
    /// interface value from `wt`; the clamped end is set to zero.
    pub fn from_fns(l: Layout, v: impl Fn(f64) -> f64, w: impl Fn(f64) -> f64, wt: impl Fn(f64) -> f64) -> Self {
        let mut s = Self::zero(l);
        for i in 0..=l.n_f {
            s.v[i] = v(l.x(i));
        }
        for j in 0..l.n_s {
            let x = l.x(l.n_f + j);
            s.w[j] = w(x);
            s.wt[j] = wt(x);
        }
        s.v[l.n_f] = s.wt[0];
        s
    }

    pub fn from_profile(l: Layout, p: Profile) -> Self {
        use std::f64::consts::PI;
        match p {
            Profile::Zero => Self::zero(l),
            Profile::SolidSine => Self::from_fns(l, |_| 0.0, |x| (PI * (x - 1.0)).sin(), |_| 0.0),
            Profile::SolidBump => Self::from_fns(l, |_| 0.0, |x| (PI * (x - 1.0)).sin().powi(4), |_| 0.0),
            Profile::FluidCosine => Self::from_fns(l, |x| (PI * x).cos() + 1.0, |_| 0.0, |_| 0.0),
        }
    }

    pub fn pack(&self, l: Layout) -> Vec<f64> {
        let mut x = vec![0.0; l.dim()];
        for g in 0..l.n_f {
            x[g] = self.v[g];
        }
        for j in 0..l.n_s {
            let g = l.n_f + j;
            x[l.v_index(g).unwrap()] = self.wt[j];
            x[l.w_index(g).unwrap()] = self.w[j];
        }
        x
    }

    pub fn unpack(l: Layout, x: &[f64], time: f64) -> Self {
        let mut s = Self::zero(l);
        s.time = time;
        for g in 0..l.n_f {
            s.v[g] = x[g];
        }
        for j in 0..l.n_s {
            let g = l.n_f + j;
            s.wt[j] = x[l.v_index(g).unwrap()];
            s.w[j] = x[l.w_index(g).unwrap()];
        }
        s.v[l.n_f] = s.wt[0];
        s
    }
}

/// Assembled one-step operator `A x^{n+1} = B x^n`, with `A` factored.
#[derive(Clone, Debug)]
pub struct System {
    pub layout: Layout,
    pub coupling: Coupling,
    pub dt: f64,
    pub alpha: f64,
    lhs: BandMatrix,
    rhs: BandMatrix,
    lu: BandLu,
}

pub const HALF_BANDWIDTH: usize = 3;

/// Assemble and factor the monolithic step matrix.
///
/// Velocity row of node `g`:
/// `m_g V_g^{n+1} + dt/2 (K_f V + α M_s V + K_s W)_g^{n+1} = m_g V_g^n − dt/2 (…)_g^n`.
/// Displacement row: `W_g^{n+1} − dt/2 V_g^{n+1} = W_g^n + dt/2 V_g^n`.
/// With a clamped interface the interface rows become `V = 0`, `W = 0` and
/// their columns are dropped from every other row.
pub fn build_system(layout: Layout, dt: f64, alpha: f64, coupling: Coupling) -> Result<System> {
    if layout.n_f < 1 || layout.n_s < 1 || !(dt > 0.0) {
        return Err(Error::Config("degenerate grid or time step".into()));
    }
    let n = layout.dim();
    let b = HALF_BANDWIDTH;
    let mut lhs = BandMatrix::zeros(n, b, b);
    let mut rhs = BandMatrix::zeros(n, b, b);
    let pinned = |g: usize| coupling == Coupling::ClampedInterface && g == layout.n_f;
    let h = dt / 2.0;

    let mut add = |row: Option<usize>, col: Option<usize>, a: f64, r: f64| {
        if let (Some(i), Some(j)) = (row, col) {
            lhs.add(i, j, a);
            rhs.add(i, j, r);
        }
    };
    let vi = |g: usize| if pinned(g) { None } else { layout.v_index(g) };
    let wi = |g: usize| if pinned(g) { None } else { layout.w_index(g) };

    for g in 0..layout.nodes() {
        let (mf, ms) = layout.masses(g);
        let m = mf + ms;
        add(vi(g), vi(g), m + h * alpha * ms, m - h * alpha * ms);
        if wi(g).is_some() {
            add(wi(g), wi(g), 1.0, 1.0);
            add(wi(g), vi(g), -h, h);
        }
    }
    // Element stiffness, fluid then solid.
    let hf = layout.h_f();
    for e in 0..layout.n_f {
        let k = 1.0 / hf;
        for (a, b2, s) in [(e, e, k), (e, e + 1, -k), (e + 1, e, -k), (e + 1, e + 1, k)] {
            add(vi(a), vi(b2), h * s, -h * s);
        }
    }
    let hs = layout.h_s();
    for e in layout.n_f..layout.nodes() {
        let k = 1.0 / hs;
        for (a, b2, s) in [(e, e, k), (e, e + 1, -k), (e + 1, e, -k), (e + 1, e + 1, k)] {
            add(vi(a), wi(b2), h * s, -h * s);
        }
    }
    if coupling == Coupling::ClampedInterface {
        for idx in [layout.v_index(layout.n_f), layout.w_index(layout.n_f)].into_iter().flatten() {
            lhs.set(idx, idx, 1.0);
        }
    }
    let lu = lhs.factor()?;
    Ok(System { layout, coupling, dt, alpha, lhs, rhs, lu })
}

impl System {
    pub fn from_config(c: &SimConfig) -> Result<Self> {
        build_system(Layout { n_f: c.n_f, n_s: c.n_s }, c.dt, c.alpha.to_f64(), c.coupling)
    }

    pub fn lhs(&self) -> &BandMatrix {
        &self.lhs
    }

    pub fn rhs(&self) -> &BandMatrix {
        &self.rhs
    }

    /// Advance packed unknowns by one step.
    pub fn step_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut b = self.rhs.matvec(x);
        self.lu.solve_in_place(&mut b);
        b
    }

    /// Nonzero columns of each row of the step matrix, one line per row.
    pub fn row_pattern(&self) -> String {
        let a = &self.lhs;
        let mut out = format!("dim {} bandwidth {}\n", a.dim(), HALF_BANDWIDTH);
        for i in 0..a.dim() {
            let cols: Vec<String> = a.row_range(i).filter(|&j| a.get(i, j) != 0.0).map(|j| j.to_string()).collect();
            out.push_str(&format!("{i}: {}\n", cols.join(" ")));
        }
        out
    }

    /// `½VᵀMV + ½WᵀK_sW` on packed unknowns.
    pub fn energy(&self, x: &[f64]) -> f64 {
        let l = self.layout;
        let vel = |g: usize| l.v_index(g).map_or(0.0, |i| x[i]);
        let disp = |g: usize| l.w_index(g).map_or(0.0, |i| x[i]);
        let mut e = 0.0;
        for g in 0..l.nodes() {
            let (mf, ms) = l.masses(g);
            e += 0.5 * (mf + ms) * vel(g) * vel(g);
        }
        let hs = l.h_s();
        for g in l.n_f..l.nodes() {
            let d = disp(g + 1) - disp(g);
            e += 0.5 * d * d / hs;
        }
        e
    }

    /// `‖∂_x v‖² + α‖w_t‖²` on packed unknowns.
    pub fn dissipation(&self, x: &[f64]) -> f64 {
        let l = self.layout;
        let vel = |g: usize| l.v_index(g).map_or(0.0, |i| x[i]);
        let hf = l.h_f();
        let mut d = 0.0;
        for g in 0..l.n_f {
            let q = vel(g + 1) - vel(g);
            d += q * q / hf;
        }
        for g in l.n_f..l.nodes() {
            let ms = l.masses(g).1;
            d += self.alpha * ms * vel(g) * vel(g);
        }
        d
    }
}

pub fn step(state: &SimState, sys: &System) -> Result<SimState> {
    let x = sys.step_vec(&state.pack(sys.layout));
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::SolverBreakdown { step: i });
    }
    Ok(SimState::unpack(sys.layout, &x, state.time + sys.dt))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub e_id: f64,
    pub e_dt: f64,
    pub e_dtt: f64,
    /// Dissipation at the current level.
    pub d: f64,
    pub y: f64,
    /// Derivative energies not yet formed from enough stored levels.
    pub warmup: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyTrace {
    pub records: Vec<EnergyRecord>,
    /// Midpoint dissipation of step `k → k+1`.
    pub d_mid: Vec<f64>,
    pub dt: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Quantity {
    EId,
    Y,
}

impl EnergyTrace {
    /// Largest `|E^{k+1} − E^k + dt·D_mid| / E^k` over all steps.
    pub fn identity_defect(&self) -> f64 {
        self.records
            .windows(2)
            .zip(&self.d_mid)
            .map(|(w, d)| {
                let lhs = w[1].e_id - w[0].e_id + self.dt * d;
                if w[0].e_id > 0.0 {
                    lhs.abs() / w[0].e_id
                } else {
                    lhs.abs()
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn e_id_monotone(&self) -> bool {
        self.records.windows(2).all(|w| w[1].e_id <= w[0].e_id)
    }

    pub fn fit(&self, q: Quantity, window: (f64, f64)) -> Result<f64> {
        let (t, e): (Vec<f64>, Vec<f64>) = self
            .records
            .iter()
            .filter(|r| !r.warmup)
            .map(|r| (r.t, if q == Quantity::EId { r.e_id } else { r.y }))
            .unzip();
        fit_decay_rate(&t, &e, window)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,E_id,E_dt,E_dtt,D,Y\n");
        for r in &self.records {
            out.push_str(&format!("{:.6},{:e},{:e},{:e},{:e},{:e}\n", r.t, r.e_id, r.e_dt, r.e_dtt, r.d, r.y));
        }
        out
    }
}

/// Least-squares slope of `−ln E` against `t` over samples with `t` in
/// `[t0, t1]`.
pub fn fit_decay_rate(t: &[f64], e: &[f64], window: (f64, f64)) -> Result<f64> {
    assert_eq!(t.len(), e.len());
    let (t0, t1) = window;
    let slack = 1e-9 * (1.0 + t1.abs());
    let pts: Vec<(f64, f64)> =
        t.iter().zip(e).filter(|(t, _)| **t >= t0 - slack && **t <= t1 + slack).map(|(t, e)| (*t, *e)).collect();
    if pts.len() < 10 {
        return Err(Error::UndefinedFit(format!("{} samples in window [{t0}, {t1}] (need ≥ 10)", pts.len())));
    }
    if let Some((t, e)) = pts.iter().find(|(_, e)| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::UndefinedFit(format!("nonpositive energy {e} at t = {t}")));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| -p.1.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, e) in &pts {
        let dx = t - mt;
        sxy += dx * (-e.ln() - my);
        sxx += dx * dx;
    }
    Ok(sxy / sxx)
}

/// Simulate from the configured profile.
pub fn run(c: &SimConfig) -> Result<EnergyTrace> {
    c.validate()?;
    let sys = System::from_config(c)?;
    let init = SimState::from_profile(sys.layout, c.profile);
    run_from(c, &sys, &init)
}

/// Simulate from an explicit initial state.
pub fn run_from(c: &SimConfig, sys: &System, init: &SimState) -> Result<EnergyTrace> {
    let weights = c.level_weights();
    let steps = c.steps();
    let dt = c.dt;
    let mut records = Vec::with_capacity(steps + 1);
    let mut d_mid = Vec::with_capacity(steps);
    let mut x = init.pack(sys.layout);
    if sys.coupling == Coupling::ClampedInterface {
        for i in [sys.layout.v_index(sys.layout.n_f), sys.layout.w_index(sys.layout.n_f)].into_iter().flatten() {
            x[i] = 0.0;
        }
    }
    let mut prev: Option<Vec<f64>> = None;
    let mut prev2: Option<Vec<f64>> = None;
    for k in 0..=steps {
        let e_id = sys.energy(&x);
        let (e_dt, e_dtt) = match (&prev, &prev2) {
            (Some(p), Some(p2)) => {
                let d1: Vec<f64> = x.iter().zip(p).map(|(a, b)| (a - b) / dt).collect();
                let d2: Vec<f64> = x.iter().zip(p).zip(p2).map(|((a, b), c)| (a - 2.0 * b + c) / (dt * dt)).collect();
                (sys.energy(&d1), sys.energy(&d2))
            }
            (Some(p), None) => {
                let d1: Vec<f64> = x.iter().zip(p).map(|(a, b)| (a - b) / dt).collect();
                (sys.energy(&d1), 0.0)
            }
            _ => (0.0, 0.0),
        };
        let d = sys.dissipation(&x);
        let y = weights[0] * e_id + weights[1] * e_dt + weights[2] * e_dtt;
        for (q, v) in [("E_id", e_id), ("E_dt", e_dt), ("E_dtt", e_dtt), ("D", d), ("Y", y)] {
            if !v.is_finite() {
                return Err(Error::NonFinite { step: k, quantity: q });
            }
        }
        records.push(EnergyRecord { t: k as f64 * dt, e_id, e_dt, e_dtt, d, y, warmup: k < 2 });
        if k == steps {
            break;
        }
        let next = sys.step_vec(&x);
        let mid: Vec<f64> = x.iter().zip(&next).map(|(a, b)| 0.5 * (a + b)).collect();
        d_mid.push(sys.dissipation(&mid));
        prev2 = prev.take();
        prev = Some(std::mem::replace(&mut x, next));
    }
    Ok(EnergyTrace { records, d_mid, dt })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimSummary {
    pub steps: usize,
    pub window: (f64, f64),
    pub rate_e_id: f64,
    pub rate_y: f64,
    pub identity_defect: f64,
    pub e_id_monotone: bool,
    pub initial: EnergyRecord,
    #[serde(rename = "final")]
    pub last: EnergyRecord,
}

pub fn summarize(c: &SimConfig, tr: &EnergyTrace) -> Result<SimSummary> {
    let window = c.window();
    Ok(SimSummary {
        steps: tr.records.len() - 1,
        window,
        rate_e_id: tr.fit(Quantity::EId, window)?,
        rate_y: tr.fit(Quantity::Y, window)?,
        identity_defect: tr.identity_defect(),
        e_id_monotone: tr.e_id_monotone(),
        initial: tr.records[0].clone(),
        last: tr.records.last().unwrap().clone(),
    })
}
