//! Synthetic process data: a preheated, jacketed CSTR with an exothermic
//! first-order reaction A -> B, two PI loops (coolant flow holds reactor
//! temperature, outlet flow holds level), 19 measured variables and the
//! product concentration as the quality variable. Eight drift scenarios
//! perturb unmeasured parameters halfway through the horizon.
//!
//! The sensor map is deliberately affine in the latent states and inputs, so
//! with noise disabled the response lies exactly in the span of the measured
//! variables; redundancy (duplicate instruments, historian-derived filtered
//! and delayed channels) produces the heavy collinearity typical of plant
//! historians.

use crate::data::Dataset;
use crate::scalar::Real;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const N_SAMPLES: usize = 700;
pub const TRAIN_ROWS: usize = 300;
pub const DRIFT_ONSET: usize = 350;
pub const N_SENSORS: usize = 19;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("unknown drift scenario id {0}")]
    BadScenario(u8),
    #[error("cannot keep {k} of {r} variables")]
    TooManyVars { k: usize, r: usize },
    #[error("integration diverged at sample {0}")]
    Unstable(usize),
}

/// The nine drift scenarios; id 0 holds every parameter constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftScenario {
    None,
    FeedConcStep,
    FeedConcRamp,
    FeedConcRecurring,
    HeatTransferStep,
    HeatTransferRamp,
    FeedTempRamp,
    CatalystStep,
    CombinedSinusoid,
}

impl DriftScenario {
    pub const ALL: [DriftScenario; 9] = [
        DriftScenario::None,
        DriftScenario::FeedConcStep,
        DriftScenario::FeedConcRamp,
        DriftScenario::FeedConcRecurring,
        DriftScenario::HeatTransferStep,
        DriftScenario::HeatTransferRamp,
        DriftScenario::FeedTempRamp,
        DriftScenario::CatalystStep,
        DriftScenario::CombinedSinusoid,
    ];

    /// The eight drifting scenarios, ids 1 through 8.
    pub const DRIFTING: [DriftScenario; 8] = [
        DriftScenario::FeedConcStep,
        DriftScenario::FeedConcRamp,
        DriftScenario::FeedConcRecurring,
        DriftScenario::HeatTransferStep,
        DriftScenario::HeatTransferRamp,
        DriftScenario::FeedTempRamp,
        DriftScenario::CatalystStep,
        DriftScenario::CombinedSinusoid,
    ];

    pub fn id(self) -> u8 {
        Self::ALL.iter().position(|s| *s == self).unwrap() as u8
    }

    pub fn from_id(id: u8) -> Result<Self, SimError> {
        Self::ALL
            .get(id as usize)
            .copied()
            .ok_or(SimError::BadScenario(id))
    }

    pub fn label(self) -> &'static str {
        match self {
            DriftScenario::None => "no drift",
            DriftScenario::FeedConcStep => "feed concentration step",
            DriftScenario::FeedConcRamp => "feed concentration ramp",
            DriftScenario::FeedConcRecurring => "feed concentration recurring step",
            DriftScenario::HeatTransferStep => "heat transfer step (fouling)",
            DriftScenario::HeatTransferRamp => "heat transfer ramp (fouling)",
            DriftScenario::FeedTempRamp => "feed temperature ramp (seasonal)",
            DriftScenario::CatalystStep => "catalyst activity step",
            DriftScenario::CombinedSinusoid => "combined slow sinusoid",
        }
    }
}

/// Physical constants, controller tunings, excitation and noise settings.
/// All units are SI-derived with minutes as the time base and cubic meters
/// for volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SimConfig<T: Real> {
    /// Sampling interval, minutes.
    pub sample_interval: T,
    /// Integration substeps per sampling interval.
    pub substeps: usize,
    /// Samples discarded before recording starts.
    pub warmup_samples: usize,
    pub n_samples: usize,
    pub noise_enabled: bool,

    // vessel and feed
    pub tank_area: T,
    pub level_sp: T,
    pub feed_flow: T,
    pub feed_conc: T,
    pub feed_temp: T,

    // kinetics and energy
    pub arrhenius_k0: T,
    pub activation_temp: T,
    /// Adiabatic heat rise per unit reacted concentration, K m^3 / mol.
    pub heat_gain: T,
    /// UA / (rho cp) of the reactor side at nominal volume, 1/min.
    pub ua_reactor: T,
    /// UA / (rho cp V) of the jacket side, 1/min.
    pub ua_jacket: T,
    pub jacket_volume: T,
    pub coolant_feed_temp: T,
    /// Preheater effectiveness on the cold (feed) side.
    pub preheat_eff: T,
    /// Hot-side temperature drop ratio of the preheater.
    pub preheat_cap_ratio: T,

    // control
    pub temp_sp: T,
    pub coolant_flow_bias: T,
    pub coolant_flow_max: T,
    pub temp_kc: T,
    pub temp_ki: T,
    pub out_flow_bias: T,
    pub out_flow_max: T,
    pub level_kc: T,
    pub level_ki: T,

    // excitation of the measured disturbances
    pub feed_flow_excitation: T,
    pub feed_temp_excitation: T,

    // historian filters
    pub ewma_temp: T,
    pub ewma_flow: T,
}

impl<T: Real> SimConfig<T> {
    pub fn standard() -> Self {
        Self {
            sample_interval: T::of(1.0),
            substeps: 20,
            warmup_samples: 500,
            n_samples: N_SAMPLES,
            noise_enabled: true,

            tank_area: T::of(2.0),
            level_sp: T::of(0.5),
            feed_flow: T::of(0.1),
            feed_conc: T::of(1000.0),
            feed_temp: T::of(310.0),

            arrhenius_k0: T::of(7.2e10),
            activation_temp: T::of(8750.0),
            heat_gain: T::of(0.05),
            ua_reactor: T::of(0.2),
            ua_jacket: T::of(1.0),
            jacket_volume: T::of(0.2),
            coolant_feed_temp: T::of(290.0),
            preheat_eff: T::of(0.5),
            preheat_cap_ratio: T::of(0.9),

            temp_sp: T::of(350.0),
            coolant_flow_bias: T::of(0.05),
            coolant_flow_max: T::of(0.4),
            temp_kc: T::of(0.03),
            temp_ki: T::of(0.003),
            out_flow_bias: T::of(0.1),
            out_flow_max: T::of(0.5),
            level_kc: T::of(2.0),
            level_ki: T::of(0.2),

            feed_flow_excitation: T::of(0.20),
            feed_temp_excitation: T::of(5.0),

            ewma_temp: T::of(0.15),
            ewma_flow: T::of(0.1),
        }
    }
}

impl<T: Real> Default for SimConfig<T> {
    fn default() -> Self {
        Self::standard()
    }
}

/// Latent process state advanced by the integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessState<T> {
    pub conc_a: T,
    pub conc_b: T,
    pub temp: T,
    pub temp_jacket: T,
    pub level: T,
    pub int_temp: T,
    pub int_level: T,
}

#[derive(Debug, Clone, Copy)]
struct Exogenous<T> {
    feed_flow: T,
    feed_temp: T,
    feed_conc: T,
    ua_factor: T,
    activity: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SimOutput<T: Real> {
    pub dataset: Dataset<T>,
    pub scenario: DriftScenario,
    pub seed: u64,
    /// Relative magnitude of the drifting parameter per sample; diagnostics
    /// only, never an input to the learners.
    pub drift_trajectory: Vec<T>,
    /// Noise standard deviation per sensor (instrument range times the
    /// per-sensor noise fraction).
    pub noise_std: Vec<T>,
}

pub const SENSOR_NAMES: [&str; N_SENSORS] = [
    "flow_feed",
    "flow_out",
    "flow_coolant",
    "temp_feed",
    "temp_feed_preheated",
    "temp_reactor",
    "temp_jacket",
    "temp_hot_out",
    "level",
    "pressure_bottom",
    "analyzer_density",
    "analyzer_conductivity",
    "duty_jacket",
    "temp_reactor_filtered",
    "flow_feed_filtered",
    "temp_reactor_b",
    "analyzer_density_delayed",
    "valve_coolant",
    "valve_out",
];

/// Instrument full-scale ranges, fixed per sensor; noise std is the range
/// times the per-sensor fraction below. The analyzers carry wide full-scale
/// ranges relative to the process excursion, as composition instruments do.
fn instrument_ranges<T: Real>() -> [T; N_SENSORS] {
    [
        T::of(0.04),   // flow_feed
        T::of(0.04),   // flow_out
        T::of(0.15),   // flow_coolant
        T::of(20.0),   // temp_feed
        T::of(20.0),   // temp_feed_preheated
        T::of(10.0),   // temp_reactor
        T::of(15.0),   // temp_jacket
        T::of(20.0),   // temp_hot_out
        T::of(0.2),    // level
        T::of(2000.0), // pressure_bottom
        T::of(120.0),  // analyzer_density
        T::of(100.0),  // analyzer_conductivity
        T::of(12.0),   // duty_jacket
        T::of(10.0),   // temp_reactor_filtered (source noise only)
        T::of(0.04),   // flow_feed_filtered (source noise only)
        T::of(10.0),   // temp_reactor_b
        T::of(120.0),  // analyzer_density_delayed (source noise only)
        T::of(0.4),    // valve_coolant
        T::of(0.1),    // valve_out
    ]
}

/// Noise std as a fraction of the instrument range. The conventional field
/// instruments are noisier than the lab-grade composition analyzers, so a
/// model that leans on many field channels pays a variance price that a
/// model concentrated on the analyzers does not.
fn noise_fractions<T: Real>() -> [T; N_SENSORS] {
    let field = T::of(0.05);
    let analyzer = T::of(0.01);
    let mut f = [field; N_SENSORS];
    for j in [10, 11, 16] {
        f[j] = analyzer;
    }
    f
}

struct Drift<T> {
    /// (feed-conc factor, UA factor, feed-temp offset, activity factor)
    scenario: DriftScenario,
    onset_t: T,
    end_t: T,
}

impl<T: Real> Drift<T> {
    fn at(&self, t: T) -> (T, T, T, T) {
        let one = T::one();
        if t < self.onset_t {
            return (one, one, T::zero(), one);
        }
        let span = self.end_t - self.onset_t;
        let frac = ((t - self.onset_t) / span).min(one);
        match self.scenario {
            DriftScenario::None => (one, one, T::zero(), one),
            DriftScenario::FeedConcStep => (T::of(1.15), one, T::zero(), one),
            DriftScenario::FeedConcRamp => {
                (one + T::of(0.20) * frac, one, T::zero(), one)
            }
            DriftScenario::FeedConcRecurring => {
                // alternate 90-sample plateaus
                let phase = ((t - self.onset_t) / T::of(90.0)).floor().to_f64() as i64;
                if phase % 2 == 0 {
                    (T::of(1.15), one, T::zero(), one)
                } else {
                    (one, one, T::zero(), one)
                }
            }
            DriftScenario::HeatTransferStep => (one, T::of(0.60), T::zero(), one),
            DriftScenario::HeatTransferRamp => {
                (one, one - T::of(0.45) * frac, T::zero(), one)
            }
            DriftScenario::FeedTempRamp => (one, one, T::of(20.0) * frac, one),
            DriftScenario::CatalystStep => (one, one, T::zero(), T::of(0.85)),
            DriftScenario::CombinedSinusoid => {
                let ang = T::of(2.0 * std::f64::consts::PI) * (t - self.onset_t)
                    / T::of(280.0);
                (
                    one + T::of(0.10) * ang.sin(),
                    one,
                    T::of(5.0) * ang.sin(),
                    one,
                )
            }
        }
    }

    /// Scalar diagnostic: relative deviation of the active parameter.
    fn magnitude(&self, t: T) -> T {
        let (fc, ua, tf, act) = self.at(t);
        match self.scenario {
            DriftScenario::None => T::zero(),
            DriftScenario::FeedConcStep
            | DriftScenario::FeedConcRamp
            | DriftScenario::FeedConcRecurring
            | DriftScenario::CombinedSinusoid => fc - T::one(),
            DriftScenario::HeatTransferStep | DriftScenario::HeatTransferRamp => {
                ua - T::one()
            }
            DriftScenario::FeedTempRamp => tf / T::of(20.0),
            DriftScenario::CatalystStep => act - T::one(),
        }
    }
}

/// Multi-sine excitation with periods that divide half the horizon, so the
/// deterministic sensor means of the two halves match exactly. Phases are
/// seeded per run.
struct Excitation<T> {
    phases: [T; 6],
}

impl<T: Real> Excitation<T> {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        let mut phases = [T::zero(); 6];
        for p in phases.iter_mut() {
            *p = T::of(rng.gen_range(0.0..std::f64::consts::TAU));
        }
        Self { phases }
    }

    fn flow(&self, t: T) -> T {
        let tau = T::of(std::f64::consts::TAU);
        (tau * t / T::of(50.0) + self.phases[0]).sin()
            + T::of(0.6) * (tau * t / T::of(175.0) + self.phases[1]).sin()
            + T::of(0.4) * (tau * t / T::of(14.0) + self.phases[2]).sin()
    }

    fn temp(&self, t: T) -> T {
        let tau = T::of(std::f64::consts::TAU);
        (tau * t / T::of(70.0) + self.phases[3]).sin()
            + T::of(0.7) * (tau * t / T::of(25.0) + self.phases[4]).sin()
            + T::of(0.5) * (tau * t / T::of(350.0) + self.phases[5]).sin()
    }
}

fn clamp<T: Real>(v: T, lo: T, hi: T) -> T {
    v.max(lo).min(hi)
}

fn coolant_flow<T: Real>(cfg: &SimConfig<T>, s: &ProcessState<T>) -> T {
    clamp(
        cfg.coolant_flow_bias
            + cfg.temp_kc * (s.temp - cfg.temp_sp)
            + cfg.temp_ki * s.int_temp,
        T::zero(),
        cfg.coolant_flow_max,
    )
}

fn out_flow<T: Real>(cfg: &SimConfig<T>, s: &ProcessState<T>) -> T {
    clamp(
        cfg.out_flow_bias
            + cfg.level_kc * (s.level - cfg.level_sp)
            + cfg.level_ki * s.int_level,
        T::zero(),
        cfg.out_flow_max,
    )
}

fn derivs<T: Real>(
    cfg: &SimConfig<T>,
    s: &ProcessState<T>,
    u: &Exogenous<T>,
) -> ProcessState<T> {
    let f_out = out_flow(cfg, s);
    let f_c = coolant_flow(cfg, s);
    let v = cfg.tank_area * s.level;
    let k = u.activity * cfg.arrhenius_k0 * (-cfg.activation_temp / s.temp).exp();
    let t_in = u.feed_temp + cfg.preheat_eff * (s.temp - u.feed_temp);
    let dilution = u.feed_flow / v;
    ProcessState {
        conc_a: dilution * (u.feed_conc - s.conc_a) - k * s.conc_a,
        conc_b: -dilution * s.conc_b + k * s.conc_a,
        temp: dilution * (t_in - s.temp) + cfg.heat_gain * k * s.conc_a
            - cfg.ua_reactor * u.ua_factor / v * (s.temp - s.temp_jacket),
        temp_jacket: f_c / cfg.jacket_volume * (cfg.coolant_feed_temp - s.temp_jacket)
            + cfg.ua_jacket * u.ua_factor * (s.temp - s.temp_jacket),
        level: (u.feed_flow - f_out) / cfg.tank_area,
        int_temp: s.temp - cfg.temp_sp,
        int_level: s.level - cfg.level_sp,
    }
}

fn axpy<T: Real>(s: &ProcessState<T>, d: &ProcessState<T>, h: T) -> ProcessState<T> {
    ProcessState {
        conc_a: s.conc_a + h * d.conc_a,
        conc_b: s.conc_b + h * d.conc_b,
        temp: s.temp + h * d.temp,
        temp_jacket: s.temp_jacket + h * d.temp_jacket,
        level: s.level + h * d.level,
        int_temp: s.int_temp + h * d.int_temp,
        int_level: s.int_level + h * d.int_level,
    }
}

fn rk4_step<T: Real>(
    cfg: &SimConfig<T>,
    s: &ProcessState<T>,
    t: T,
    h: T,
    exo: &impl Fn(T) -> Exogenous<T>,
) -> ProcessState<T> {
    let half = h / T::of(2.0);
    let k1 = derivs(cfg, s, &exo(t));
    let k2 = derivs(cfg, &axpy(s, &k1, half), &exo(t + half));
    let k3 = derivs(cfg, &axpy(s, &k2, half), &exo(t + half));
    let k4 = derivs(cfg, &axpy(s, &k3, h), &exo(t + h));
    let sixth = h / T::of(6.0);
    let mut out = s.clone();
    out.conc_a += sixth * (k1.conc_a + T::of(2.0) * (k2.conc_a + k3.conc_a) + k4.conc_a);
    out.conc_b += sixth * (k1.conc_b + T::of(2.0) * (k2.conc_b + k3.conc_b) + k4.conc_b);
    out.temp += sixth * (k1.temp + T::of(2.0) * (k2.temp + k3.temp) + k4.temp);
    out.temp_jacket += sixth
        * (k1.temp_jacket + T::of(2.0) * (k2.temp_jacket + k3.temp_jacket) + k4.temp_jacket);
    out.level += sixth * (k1.level + T::of(2.0) * (k2.level + k3.level) + k4.level);
    out.int_temp +=
        sixth * (k1.int_temp + T::of(2.0) * (k2.int_temp + k3.int_temp) + k4.int_temp);
    out.int_level += sixth
        * (k1.int_level + T::of(2.0) * (k2.int_level + k3.int_level) + k4.int_level);
    out
}

/// Approximate operating point used to start the warm-up.
fn initial_state<T: Real>(cfg: &SimConfig<T>) -> ProcessState<T> {
    ProcessState {
        conc_a: T::of(91.0),
        conc_b: T::of(909.0),
        temp: cfg.temp_sp,
        temp_jacket: T::of(337.0),
        level: cfg.level_sp,
        int_temp: T::zero(),
        int_level: T::zero(),
    }
}

/// Noise-free sensor vector from the latent state and inputs. Historian
/// channels (filtered, delayed) are filled in by the caller from measured
/// values.
fn latent_sensors<T: Real>(
    cfg: &SimConfig<T>,
    s: &ProcessState<T>,
    u: &Exogenous<T>,
) -> [T; N_SENSORS] {
    let f_out = out_flow(cfg, s);
    let f_c = coolant_flow(cfg, s);
    let t_in = u.feed_temp + cfg.preheat_eff * (s.temp - u.feed_temp);
    let t_hot_out =
        s.temp - cfg.preheat_eff * cfg.preheat_cap_ratio * (s.temp - u.feed_temp);
    let mut out = [T::zero(); N_SENSORS];
    out[0] = u.feed_flow;
    out[1] = f_out;
    out[2] = f_c;
    out[3] = u.feed_temp;
    out[4] = t_in;
    out[5] = s.temp;
    out[6] = s.temp_jacket;
    out[7] = t_hot_out;
    out[8] = s.level;
    out[9] = T::of(9810.0) * s.level - T::of(5.0) * (s.temp - cfg.temp_sp);
    // both analyzers sit in a sample conditioning loop cooled from the
    // jacket circuit, so their readings carry a temperature cross
    // sensitivity that tracks the jacket side
    let t_sample = s.temp_jacket - T::of(337.0);
    out[10] = T::of(0.7) * s.conc_b + T::of(0.3) * s.conc_a - T::of(1.0) * t_sample;
    out[11] = T::of(0.5) * s.conc_b - T::of(0.4) * s.conc_a - T::of(0.8) * t_sample;
    out[12] = T::of(0.836) * (s.temp - s.temp_jacket);
    // 13, 14, 16 are historian-derived, filled by the caller
    out[15] = s.temp;
    out[17] = f_c / cfg.coolant_flow_max;
    out[18] = f_out / cfg.out_flow_max;
    out
}

pub fn simulate<T: Real>(scenario: DriftScenario, seed: u64) -> Result<SimOutput<T>, SimError> {
    simulate_with(scenario, seed, &SimConfig::standard())
}

pub fn simulate_with<T: Real>(
    scenario: DriftScenario,
    seed: u64,
    cfg: &SimConfig<T>,
) -> Result<SimOutput<T>, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let excite = Excitation::new(&mut rng);
    let dt_sample = cfg.sample_interval;
    let h = dt_sample / T::from_count(cfg.substeps);
    let onset_t = T::from_count(cfg.warmup_samples + DRIFT_ONSET) * dt_sample;
    let end_t = T::from_count(cfg.warmup_samples + cfg.n_samples) * dt_sample;
    let drift = Drift {
        scenario,
        onset_t,
        end_t,
    };

    let exo = |t: T| {
        let (fc_fac, ua_fac, tf_off, act) = drift.at(t);
        Exogenous {
            feed_flow: cfg.feed_flow
                * (T::one() + cfg.feed_flow_excitation * excite.flow(t) / T::of(2.0)),
            feed_temp: cfg.feed_temp + cfg.feed_temp_excitation * excite.temp(t) / T::of(2.2)
                + tf_off,
            feed_conc: cfg.feed_conc * fc_fac,
            ua_factor: ua_fac,
            activity: act,
        }
    };

    let ranges = instrument_ranges::<T>();
    let fractions = noise_fractions::<T>();
    let noise_std: Vec<T> = ranges
        .iter()
        .zip(fractions.iter())
        .map(|(r, f)| *r * *f)
        .collect();

    let mut state = initial_state(cfg);
    let mut t = T::zero();

    // warm-up: integrate without recording so controller transients die out
    for _ in 0..cfg.warmup_samples * cfg.substeps {
        state = rk4_step(cfg, &state, t, h, &exo);
        t += h;
    }

    let mut values = DMatrix::zeros(cfg.n_samples, N_SENSORS);
    let mut targets = DMatrix::zeros(cfg.n_samples, 1);
    let mut drift_traj = Vec::with_capacity(cfg.n_samples);
    let mut ewma_temp: Option<T> = None;
    let mut ewma_flow: Option<T> = None;
    let mut prev_density: Option<T> = None;

    for sample in 0..cfg.n_samples {
        let u = exo(t);
        let mut m = latent_sensors(cfg, &state, &u);
        if cfg.noise_enabled {
            for (j, v) in m.iter_mut().enumerate() {
                // historian channels carry their source's noise only
                if matches!(j, 13 | 14 | 16) {
                    continue;
                }
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += noise_std[j] * T::of(z);
            }
        }
        // historian channels from measured values
        let et = match ewma_temp {
            Some(prev) => cfg.ewma_temp * m[5] + (T::one() - cfg.ewma_temp) * prev,
            None => m[5],
        };
        let ef = match ewma_flow {
            Some(prev) => cfg.ewma_flow * m[0] + (T::one() - cfg.ewma_flow) * prev,
            None => m[0],
        };
        m[13] = et;
        m[14] = ef;
        m[16] = prev_density.unwrap_or(m[10]);
        ewma_temp = Some(et);
        ewma_flow = Some(ef);
        prev_density = Some(m[10]);

        for (j, v) in m.iter().enumerate() {
            if !v.is_finite() {
                return Err(SimError::Unstable(sample));
            }
            values[(sample, j)] = *v;
        }
        targets[(sample, 0)] = state.conc_b;
        drift_traj.push(drift.magnitude(t));

        for _ in 0..cfg.substeps {
            state = rk4_step(cfg, &state, t, h, &exo);
            t += h;
        }
        if !state.temp.is_finite() || state.level <= T::zero() {
            return Err(SimError::Unstable(sample));
        }
    }

    let mut dataset = Dataset::new(
        values,
        targets,
        SENSOR_NAMES.iter().map(|s| s.to_string()).collect(),
        vec!["conc_b".to_string()],
    )
    .expect("simulated dataset is well formed");
    dataset.sample_period = Some(cfg.sample_interval.to_f64());

    Ok(SimOutput {
        dataset,
        scenario,
        seed,
        drift_trajectory: drift_traj,
        noise_std,
    })
}

/// Repeated simulations with deterministically derived, distinct seeds.
pub fn repeat_batch<T: Real>(
    scenario: DriftScenario,
    n_reps: usize,
    base_seed: u64,
) -> Result<Vec<SimOutput<T>>, SimError> {
    (0..n_reps)
        .into_par_iter()
        .map(|rep| simulate(scenario, derive_seed(base_seed, rep)))
        .collect()
}

pub fn derive_seed(base_seed: u64, rep: usize) -> u64 {
    base_seed.wrapping_add((rep as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
}

/// Keep the `k` variables most correlated (in absolute value) with the
/// response on the training rows; ties break toward the lower index.
pub fn preselect_correlated<T: Real>(
    out: &SimOutput<T>,
    k: usize,
) -> Result<SimOutput<T>, SimError> {
    let r = out.dataset.n_vars();
    if k > r {
        return Err(SimError::TooManyVars { k, r });
    }
    let train = TRAIN_ROWS.min(out.dataset.n_rows());
    let y = out.dataset.targets.view((0, 0), (train, 1)).into_owned();
    let y_mean = y.iter().copied().sum::<T>() / T::from_count(train);
    let yc = DVector::from_fn(train, |i, _| y[(i, 0)] - y_mean);
    let y_norm = yc.norm();
    let mut scored: Vec<(T, usize)> = (0..r)
        .map(|j| {
            let col = out.dataset.values.view((0, j), (train, 1));
            let mean = col.iter().copied().sum::<T>() / T::from_count(train);
            let xc = DVector::from_fn(train, |i, _| col[(i, 0)] - mean);
            let denom = xc.norm() * y_norm;
            let corr = if denom > T::zero() {
                (xc.dot(&yc) / denom).abs()
            } else {
                T::zero()
            };
            (corr, j)
        })
        .collect();
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    let mut keep: Vec<usize> = scored.into_iter().take(k).map(|(_, j)| j).collect();
    keep.sort_unstable();
    Ok(SimOutput {
        dataset: out.dataset.select_vars(&keep),
        scenario: out.scenario,
        seed: out.seed,
        drift_trajectory: out.drift_trajectory.clone(),
        noise_std: keep.iter().map(|&j| out.noise_std[j]).collect(),
    })
}
