//! Scalar spectral maps and their orbit dynamics: fixed-point detection,
//! attractor classification, escape detection.
//!
//! A `SpectralMap` is the scalar function that drives a spectral transform:
//! it is total and finite on its declared domain interval, and carries an
//! escape bound beyond which an orbit counts as having left the spectrum.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Default numerical fixed-point tolerance for orbits.
pub const DEFAULT_FIXED_TOL: f64 = 1e-10;
/// Default orbit magnitude beyond which the orbit is declared escaping.
pub const DEFAULT_ESCAPE_BOUND: f64 = 1e6;
/// Consecutive sub-tolerance moves required before declaring convergence.
pub const CONFIRM_WINDOW: usize = 5;
/// How many recent orbit values are kept for cycle detection.
pub const CYCLE_MEMORY: usize = 64;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("orbit left the map domain: value {value} at step {at_step}")]
    LeftDomain { value: f64, at_step: usize },
    #[error("probe {probe} leaves the map domain")]
    ProbeOutsideDomain { probe: f64 },
    #[error("unknown map descriptor `{descriptor}`")]
    UnknownMap { descriptor: String },
    #[error("bad parameter in map descriptor `{descriptor}`: {reason}")]
    BadParameter { descriptor: String, reason: String },
}

/// A closed real interval; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    /// Panics if `lo > hi` or either endpoint is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(!lo.is_nan() && !hi.is_nan(), "interval endpoint is NaN");
        assert!(lo <= hi, "interval requires lo <= hi, got [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn all_reals() -> Self {
        Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A scalar map `f : domain → ℝ`, finite on its domain, with a name usable
/// from scenario files and an escape bound for orbit iteration.
#[derive(Clone)]
pub struct SpectralMap {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    name: String,
    escape_bound: f64,
    domain: Interval,
}

impl fmt::Debug for SpectralMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralMap")
            .field("name", &self.name)
            .field("escape_bound", &self.escape_bound)
            .field("domain", &self.domain)
            .finish()
    }
}

impl SpectralMap {
    pub fn new(
        name: impl Into<String>,
        domain: Interval,
        escape_bound: f64,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!(escape_bound > 0.0, "escape_bound must be positive");
        SpectralMap {
            eval: Arc::new(eval),
            name: name.into(),
            escape_bound,
            domain,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn escape_bound(&self) -> f64 {
        self.escape_bound
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn with_escape_bound(mut self, bound: f64) -> Self {
        assert!(bound > 0.0, "escape_bound must be positive");
        self.escape_bound = bound;
        self
    }

    // -- built-in named maps ------------------------------------------------

    /// x ↦ x²
    pub fn square() -> Self {
        SpectralMap::new("square", Interval::all_reals(), DEFAULT_ESCAPE_BOUND, |x| {
            x * x
        })
    }

    /// x ↦ x^k for integer k ≥ 2.
    pub fn power(k: u32) -> Self {
        assert!(k >= 2, "power map requires k >= 2");
        SpectralMap::new(
            format!("power:{k}"),
            Interval::all_reals(),
            DEFAULT_ESCAPE_BOUND,
            move |x| x.powi(k as i32),
        )
    }

    /// x ↦ a·x + b
    pub fn affine(a: f64, b: f64) -> Self {
        SpectralMap::new(
            format!("affine:{a},{b}"),
            Interval::all_reals(),
            DEFAULT_ESCAPE_BOUND,
            move |x| a * x + b,
        )
    }

    /// x ↦ e^{t·x}; the domain is clipped so the value stays finite.
    pub fn exp_scale(t: f64) -> Self {
        // exp overflows past ~709.78; keep a little margin.
        const EXP_ARG_MAX: f64 = 709.0;
        let domain = if t > 0.0 {
            Interval::new(f64::NEG_INFINITY, EXP_ARG_MAX / t)
        } else if t < 0.0 {
            Interval::new(EXP_ARG_MAX / t, f64::INFINITY)
        } else {
            Interval::all_reals()
        };
        SpectralMap::new(
            format!("exp_scale:{t}"),
            domain,
            DEFAULT_ESCAPE_BOUND,
            move |x| (t * x).exp(),
        )
    }

    /// x ↦ 1 + t0·x
    pub fn yosida(t0: f64) -> Self {
        SpectralMap::new(
            format!("yosida:{t0}"),
            Interval::all_reals(),
            DEFAULT_ESCAPE_BOUND,
            move |x| 1.0 + t0 * x,
        )
    }

    /// Parse a named-map descriptor: `square`, `power:k`, `affine:a,b`,
    /// `exp_scale:t`, `yosida:t0`.
    pub fn parse(descriptor: &str) -> Result<Self, MapError> {
        let bad = |reason: &str| MapError::BadParameter {
            descriptor: descriptor.to_string(),
            reason: reason.to_string(),
        };
        let (head, args) = match descriptor.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (descriptor.trim(), None),
        };
        match head {
            "square" => {
                if args.is_some() {
                    return Err(bad("square takes no parameters"));
                }
                Ok(SpectralMap::square())
            }
            "power" => {
                let k: u32 = args
                    .ok_or_else(|| bad("expected power:k"))?
                    .parse()
                    .map_err(|_| bad("k must be an integer"))?;
                if k < 2 {
                    return Err(bad("k must be >= 2"));
                }
                Ok(SpectralMap::power(k))
            }
            "affine" => {
                let args = args.ok_or_else(|| bad("expected affine:a,b"))?;
                let parts: Vec<&str> = args.split(',').map(str::trim).collect();
                if parts.len() != 2 {
                    return Err(bad("expected two parameters a,b"));
                }
                let a: f64 = parts[0].parse().map_err(|_| bad("a must be a number"))?;
                let b: f64 = parts[1].parse().map_err(|_| bad("b must be a number"))?;
                if !a.is_finite() || !b.is_finite() {
                    return Err(bad("parameters must be finite"));
                }
                Ok(SpectralMap::affine(a, b))
            }
            "exp_scale" => {
                let t: f64 = args
                    .ok_or_else(|| bad("expected exp_scale:t"))?
                    .parse()
                    .map_err(|_| bad("t must be a number"))?;
                if !t.is_finite() {
                    return Err(bad("t must be finite"));
                }
                Ok(SpectralMap::exp_scale(t))
            }
            "yosida" => {
                let t0: f64 = args
                    .ok_or_else(|| bad("expected yosida:t0"))?
                    .parse()
                    .map_err(|_| bad("t0 must be a number"))?;
                if !t0.is_finite() {
                    return Err(bad("t0 must be finite"));
                }
                Ok(SpectralMap::yosida(t0))
            }
            _ => Err(MapError::UnknownMap {
                descriptor: descriptor.to_string(),
            }),
        }
    }
}

/// Terminal state of a scalar orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrbitKind {
    /// The orbit settled at a numerical fixed point μ of the map.
    Converged(f64),
    /// The orbit magnitude exceeded the escape bound.
    Escaped { at_step: usize },
    /// A previously seen value recurred with the given period (≥ 2).
    Cycling { period: usize },
    /// Budget exhausted without a verdict.
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitOutcome {
    pub kind: OrbitKind,
    pub steps_used: usize,
}

/// Iterate `λ ↦ f(λ)` until the orbit converges, escapes, cycles, or the
/// iteration budget runs out. Convergence is declared only after
/// [`CONFIRM_WINDOW`] consecutive moves below `fixed_tol` *and* the final
/// iterate is itself fixed within `fixed_tol`.
pub fn scalar_limit(
    f: &SpectralMap,
    lambda: f64,
    fixed_tol: f64,
    max_iter: usize,
) -> Result<OrbitOutcome, MapError> {
    let (outcome, _) = scalar_limit_traced(f, lambda, fixed_tol, max_iter)?;
    Ok(outcome)
}

/// Same as [`scalar_limit`] but also returns the orbit values visited
/// (starting with `lambda`), in the exact floating-point sequence produced
/// by repeated application of `f.eval`.
pub fn scalar_limit_traced(
    f: &SpectralMap,
    lambda: f64,
    fixed_tol: f64,
    max_iter: usize,
) -> Result<(OrbitOutcome, Vec<f64>), MapError> {
    assert!(max_iter >= 1, "max_iter must be at least 1");
    if !f.domain().contains(lambda) {
        return Err(MapError::LeftDomain {
            value: lambda,
            at_step: 0,
        });
    }
    let mut orbit = vec![lambda];

    // Already fixed: converged in zero effective steps.
    if (f.eval(lambda) - lambda).abs() <= fixed_tol {
        return Ok((
            OrbitOutcome {
                kind: OrbitKind::Converged(lambda),
                steps_used: 0,
            },
            orbit,
        ));
    }

    let mut history: VecDeque<f64> = VecDeque::with_capacity(CYCLE_MEMORY);
    history.push_back(lambda);
    let mut cur = lambda;
    let mut small_moves = 0usize;

    for step in 1..=max_iter {
        let next = f.eval(cur);
        orbit.push(next);
        if next.abs() > f.escape_bound() {
            return Ok((
                OrbitOutcome {
                    kind: OrbitKind::Escaped { at_step: step },
                    steps_used: step,
                },
                orbit,
            ));
        }
        if !f.domain().contains(next) {
            return Err(MapError::LeftDomain {
                value: next,
                at_step: step,
            });
        }

        if (next - cur).abs() <= fixed_tol {
            small_moves += 1;
            if small_moves >= CONFIRM_WINDOW && (f.eval(next) - next).abs() <= fixed_tol {
                return Ok((
                    OrbitOutcome {
                        kind: OrbitKind::Converged(next),
                        steps_used: step,
                    },
                    orbit,
                ));
            }
        } else {
            small_moves = 0;
            // Cycle scan only on genuinely moving orbits, so a convergence
            // plateau is never misread as a short cycle.
            for back in 2..=history.len() {
                let seen = history[history.len() - back];
                if (next - seen).abs() <= fixed_tol {
                    return Ok((
                        OrbitOutcome {
                            kind: OrbitKind::Cycling { period: back },
                            steps_used: step,
                        },
                        orbit,
                    ));
                }
            }
        }

        if history.len() == CYCLE_MEMORY {
            history.pop_front();
        }
        history.push_back(next);
        cur = next;
    }

    Ok((
        OrbitOutcome {
            kind: OrbitKind::Undecided,
            steps_used: max_iter,
        },
        orbit,
    ))
}

/// Subset of `spectrum` fixed by `f` within `fixed_tol`, sorted ascending
/// and deduplicated within `fixed_tol`. Values outside the map domain are
/// skipped (callers are expected to satisfy the domain precondition).
pub fn fixed_points_on(f: &SpectralMap, spectrum: &[f64], fixed_tol: f64) -> Vec<f64> {
    let mut fixed: Vec<f64> = spectrum
        .iter()
        .copied()
        .filter(|&x| f.domain().contains(x) && (f.eval(x) - x).abs() <= fixed_tol)
        .collect();
    fixed.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(fixed.len());
    for x in fixed {
        match out.last() {
            Some(&last) if (x - last).abs() <= fixed_tol => {}
            _ => out.push(x),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Attracting,
    Repelling,
    Neutral,
}

/// Classify a fixed point ξ of `f` by the central-difference estimate of
/// |f′(ξ)| with probe step `probe_h`: attracting below `1 - h`, repelling
/// above `1 + h`, neutral otherwise.
pub fn classify_attractor(f: &SpectralMap, xi: f64, probe_h: f64) -> Result<Stability, MapError> {
    assert!(probe_h > 0.0, "probe_h must be positive");
    for probe in [xi + probe_h, xi - probe_h] {
        if !f.domain().contains(probe) {
            return Err(MapError::ProbeOutsideDomain { probe });
        }
    }
    let slope = ((f.eval(xi + probe_h) - f.eval(xi - probe_h)) / (2.0 * probe_h)).abs();
    if slope < 1.0 - probe_h {
        Ok(Stability::Attracting)
    } else if slope > 1.0 + probe_h {
        Ok(Stability::Repelling)
    } else {
        Ok(Stability::Neutral)
    }
}
