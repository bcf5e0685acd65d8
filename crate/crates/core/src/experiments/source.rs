//! Curve selection from `key=value` arguments and planned generation.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::plan::{chirp_plan, family_plan, hopf_initial, hopf_plan, spiral_plan, Plan};
use crate::curve::Curve;
use crate::curves::{
    gen_chirp_graph, gen_chirp_phase_curve, gen_phase_trajectory, gen_power_spiral, gen_reflected_graph,
    integrate_cubic_system, integrate_normal_form, system_height, trajectory_point, ChirpSpec, Focus,
    NormalFormSpec, PowerSpiralSpec, Sampling, Tolerances, TrajectoryFamilySpec, Trig,
};
use crate::error::{Error, Result};
use crate::fractal::{ScaleLadder, DEFAULT_FILL};

/// Parsed `key=value` pairs; every key must be consumed exactly once.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KeyValues {
    pairs: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse<S: AsRef<str>>(args: &[S]) -> Result<Self> {
        let mut pairs = BTreeMap::new();
        for arg in args {
            let arg = arg.as_ref();
            let (k, v) = arg
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {arg:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(Error::Parse(format!("empty key or value in {arg:?}")));
            }
            if pairs.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Parse(format!("key {k:?} given twice")));
            }
        }
        Ok(KeyValues { pairs })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.pairs.remove(key)
    }

    pub fn f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key)
            .map(|v| {
                let x: f64 = v
                    .parse()
                    .map_err(|_| Error::Parse(format!("{key}={v:?} is not a number")))?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(Error::Parse(format!("{key}={v:?} is not finite")))
                }
            })
            .transpose()
    }

    pub fn required_f64(&mut self, key: &str) -> Result<f64> {
        self.f64(key)?
            .ok_or_else(|| Error::Parse(format!("missing required key {key:?}")))
    }

    pub fn u32(&mut self, key: &str) -> Result<Option<u32>> {
        self.take(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Parse(format!("{key}={v:?} is not a non-negative integer")))
            })
            .transpose()
    }

    pub fn bool(&mut self, key: &str) -> Result<Option<bool>> {
        self.take(key)
            .map(|v| match v.as_str() {
                "true" | "1" => Ok(true),
                "false" | "0" => Ok(false),
                _ => Err(Error::Parse(format!("{key}={v:?} is not a boolean"))),
            })
            .transpose()
    }

    pub fn string(&mut self, key: &str) -> Option<String> {
        self.take(key)
    }

    /// Fails on any key not consumed.
    pub fn finish(self) -> Result<()> {
        match self.pairs.keys().next() {
            None => Ok(()),
            Some(k) => Err(Error::Parse(format!(
                "unknown key {k:?} (unused: {})",
                self.pairs.keys().cloned().collect::<Vec<_>>().join(", ")
            ))),
        }
    }
}

/// A curve the library can generate.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveSource {
    Spiral(PowerSpiralSpec),
    Chirp {
        spec: ChirpSpec,
        tau_max: f64,
    },
    ChirpPhase {
        spec: ChirpSpec,
        t0: f64,
    },
    /// Closed-form spatial trajectory.
    Family(TrajectoryFamilySpec),
    /// Integrated cubic system.
    Cubic(TrajectoryFamilySpec),
    Reflected(TrajectoryFamilySpec),
    Hopf {
        spec: NormalFormSpec,
        t_offset: f64,
    },
}

/// Source kinds accepted by [`CurveSource::parse`].
pub const SOURCE_KINDS: [&str; 7] = [
    "spiral",
    "chirp",
    "chirp-phase",
    "family",
    "cubic",
    "reflected",
    "hopf",
];

fn family_from(kv: &mut KeyValues) -> Result<TrajectoryFamilySpec> {
    let mut s = TrajectoryFamilySpec::new(kv.required_f64("alpha")?, kv.required_f64("gamma")?)?;
    s.k_slope = kv.f64("K")?.unwrap_or(s.k_slope);
    s.c1 = kv.f64("C1")?.unwrap_or(s.c1);
    s.c2 = kv.f64("C2")?.unwrap_or(s.c2);
    s.c3 = kv.f64("C3")?.unwrap_or(s.c3);
    let (k, l) = (kv.u32("k")?.unwrap_or(0), kv.u32("l")?.unwrap_or(0));
    s.log_p_exponent = k;
    s.log_q_exponent = l;
    s.t0 = match kv.f64("t0")? {
        Some(t0) => t0,
        None => s.default_t0(),
    };
    s.validate()?;
    Ok(s)
}

fn chirp_from(kv: &mut KeyValues) -> Result<ChirpSpec> {
    let mut s = ChirpSpec::new(kv.required_f64("alpha")?, kv.required_f64("beta")?)?;
    s.phase_shift = kv.f64("phase_shift")?.unwrap_or(0.0);
    s.trig = match kv.string("trig").as_deref() {
        None | Some("sin") => Trig::Sin,
        Some("cos") => Trig::Cos,
        Some(other) => return Err(Error::Parse(format!("trig={other:?} is not sin or cos"))),
    };
    s.validate()?;
    Ok(s)
}

impl CurveSource {
    pub fn parse<S: AsRef<str>>(kind: &str, args: &[S]) -> Result<Self> {
        let mut kv = KeyValues::parse(args)?;
        let source = match kind {
            "spiral" => {
                let mut s = PowerSpiralSpec::new(kv.required_f64("alpha")?)?;
                s.log_exponent = kv.f64("log_exponent")?.unwrap_or(0.0);
                s.phi_min = match kv.f64("phi_min")? {
                    Some(v) => v,
                    None => s.phi_min.max(s.decreasing_from()),
                };
                s.mirror = kv.bool("mirror")?.unwrap_or(false);
                s.validate()?;
                CurveSource::Spiral(s)
            }
            "chirp" => {
                let spec = chirp_from(&mut kv)?;
                CurveSource::Chirp {
                    spec,
                    tau_max: kv.f64("tau_max")?.unwrap_or(1.0),
                }
            }
            "chirp-phase" => {
                let spec = chirp_from(&mut kv)?;
                CurveSource::ChirpPhase {
                    spec,
                    t0: kv.f64("t0")?.unwrap_or(1.0),
                }
            }
            "family" => CurveSource::Family(family_from(&mut kv)?),
            "cubic" => CurveSource::Cubic(family_from(&mut kv)?),
            "reflected" => CurveSource::Reflected(family_from(&mut kv)?),
            "hopf" => {
                let l = kv.u32("l")?.unwrap_or(1);
                let p = kv
                    .u32("p")?
                    .ok_or_else(|| Error::Parse("missing required key \"p\"".into()))?
                    as usize;
                let mut spec = NormalFormSpec::reduced(l, p, kv.f64("b_p")?.unwrap_or(-1.0))?;
                spec.omega = kv.f64("omega")?.unwrap_or(1.0);
                spec.focus = match kv.string("focus").as_deref() {
                    None | Some("attracting") => Focus::Attracting,
                    Some("repelling") => Focus::Repelling,
                    Some(other) => {
                        return Err(Error::Parse(format!(
                            "focus={other:?} is not attracting or repelling"
                        )))
                    }
                };
                spec.validate()?;
                let t_offset = kv.f64("t_offset")?.unwrap_or(1.0);
                if !(t_offset > 0.0) {
                    return Err(Error::invalid("t_offset", format!("{t_offset} must be positive")));
                }
                CurveSource::Hopf { spec, t_offset }
            }
            _ => {
                return Err(Error::invalid(
                    "curve kind",
                    format!("{kind:?} is not one of {}", SOURCE_KINDS.join(", ")),
                ))
            }
        };
        kv.finish()?;
        Ok(source)
    }

    /// `(α, β)` of the planar phase curve, when the source has them.
    pub fn phase_exponents(&self) -> Option<(f64, f64)> {
        match self {
            CurveSource::ChirpPhase { spec, .. } => Some((spec.alpha, spec.beta)),
            CurveSource::Family(s) | CurveSource::Cubic(s) => Some((s.alpha, 1.0)),
            _ => None,
        }
    }
}

/// Generation settings; `None` fields take the planned values.
#[derive(Clone, Debug, PartialEq)]
pub struct BuildOptions {
    pub scale_count: usize,
    pub fill: f64,
    pub budget: usize,
    pub max_chord: Option<f64>,
    /// `r_min` for spirals, `tau_min` for chirps, `t_max` otherwise.
    pub end: Option<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            scale_count: ScaleLadder::DEFAULT_COUNT,
            fill: DEFAULT_FILL,
            budget: 20_000_000,
            max_chord: None,
            end: None,
            rel_tol: 1e-10,
            abs_tol: 1e-13,
        }
    }
}

/// End time for chirp phase curves without an explicit `t_max`.
pub const CHIRP_PHASE_T_MAX: f64 = 1000.0;

impl CurveSource {
    /// Generates the curve together with the plan its ladder should come from.
    pub fn build(&self, opts: &BuildOptions) -> Result<(Curve, Plan)> {
        let (count, fill) = (opts.scale_count, opts.fill);
        let sampling = |plan: &Plan| Sampling::new(opts.max_chord.unwrap_or(plan.chord()), opts.budget);
        let tol = || Tolerances::new(opts.rel_tol, opts.abs_tol);
        match self {
            CurveSource::Spiral(spec) => {
                let (plan, r_min) = spiral_plan(spec, count, fill)?;
                let curve = gen_power_spiral(spec, opts.end.unwrap_or(r_min), sampling(&plan)?)?;
                Ok((curve, plan))
            }
            CurveSource::Chirp { spec, tau_max } => {
                let (plan, tau_min) = chirp_plan(spec, *tau_max, count, fill)?;
                let curve = gen_chirp_graph(spec, *tau_max, opts.end.unwrap_or(tau_min), sampling(&plan)?)?;
                Ok((curve, plan))
            }
            CurveSource::ChirpPhase { spec, t0 } => {
                let t_max = opts.end.unwrap_or(CHIRP_PHASE_T_MAX);
                let pilot_end = (t0.powf(spec.beta) + 8.0 * PI).powf(1.0 / spec.beta).min(t_max);
                let pilot = gen_chirp_phase_curve(spec, *t0, pilot_end, Sampling::new(1e-3, opts.budget)?)?;
                let plan = Plan::new(pilot.diameter(), count, fill)?;
                Ok((gen_chirp_phase_curve(spec, *t0, t_max, sampling(&plan)?)?, plan))
            }
            CurveSource::Family(spec) => {
                let (plan, t_end) = family_plan(spec, count, fill)?;
                Ok((
                    gen_phase_trajectory(spec, opts.end.unwrap_or(t_end), sampling(&plan)?)?,
                    plan,
                ))
            }
            CurveSource::Cubic(spec) => {
                let (plan, t_end) = family_plan(spec, count, fill)?;
                let p = trajectory_point(spec, spec.t0)?;
                let init = [p[0], p[1], system_height(spec, spec.t0)];
                let range = (spec.t0, opts.end.unwrap_or(t_end));
                Ok((
                    integrate_cubic_system(spec, init, range, tol()?, sampling(&plan)?)?,
                    plan,
                ))
            }
            CurveSource::Reflected(spec) => {
                let chirp = ChirpSpec::new(spec.alpha, 1.0)?;
                let (plan, tau_min) = chirp_plan(&chirp, 1.0 / spec.t0, count, fill)?;
                let t_max = opts.end.unwrap_or(1.0 / tau_min);
                Ok((gen_reflected_graph(spec, t_max, sampling(&plan)?)?, plan))
            }
            CurveSource::Hopf { spec, t_offset } => {
                let init = hopf_initial(spec, *t_offset)?;
                let (plan, t_end) = hopf_plan(spec, *t_offset, count, fill)?;
                let range = (0.0, opts.end.unwrap_or(t_end));
                Ok((
                    integrate_normal_form(spec, init, range, tol()?, sampling(&plan)?)?,
                    plan,
                ))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_values_parse_and_reject() {
        let mut kv = KeyValues::parse(&["alpha=0.5", " beta = 2 "]).unwrap();
        assert_eq!(kv.f64("alpha").unwrap(), Some(0.5));
        assert_eq!(kv.required_f64("beta").unwrap(), 2.0);
        assert!(kv.finish().is_ok());
        assert!(KeyValues::parse(&["alpha"]).is_err());
        assert!(KeyValues::parse(&["alpha=1", "alpha=2"]).is_err());
        assert!(KeyValues::parse(&["=1"]).is_err());
        let mut kv = KeyValues::parse(&["alpha=nan"]).unwrap();
        assert!(kv.f64("alpha").is_err());
    }

    #[test]
    fn sources_parse() {
        match CurveSource::parse("spiral", &["alpha=0.5", "log_exponent=1"]).unwrap() {
            CurveSource::Spiral(s) => assert!((s.phi_min - std::f64::consts::E.powi(2)).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        match CurveSource::parse("hopf", &["p=4"]).unwrap() {
            CurveSource::Hopf { spec, .. } => {
                assert_eq!(spec.focus, Focus::Attracting);
                assert_eq!(spec.predicted_dimension(), Some(1.375));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            CurveSource::parse("family", &["alpha=0.5"]),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            CurveSource::parse("family", &["alpha=0.5", "gamma=1", "zeta=3"]),
            Err(Error::Parse(_))
        ));
        assert!(CurveSource::parse("family", &["alpha=-1", "gamma=1"]).is_err());
        assert!(CurveSource::parse("torus", &["alpha=1"]).is_err());
    }

    #[test]
    fn planned_build_respects_ladder() {
        let src = CurveSource::parse("chirp", &["alpha=0.5", "beta=1"]).unwrap();
        let opts = BuildOptions {
            scale_count: 10,
            budget: 200_000,
            ..BuildOptions::default()
        };
        let (curve, plan) = src.build(&opts).unwrap();
        plan.ladder().unwrap().check_curve(&curve).unwrap();
    }
}
