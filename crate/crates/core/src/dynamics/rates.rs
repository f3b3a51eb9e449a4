//! Edge activation and deactivation rates.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Arguments of a rate evaluation for one vertex pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateInput {
    pub time: f64,
    /// Types of the two endpoints.
    pub x: f64,
    pub y: f64,
    /// Triangle density of the current (unlabelled) graph.
    pub triangle_density: f64,
}

/// Bounded edge-switching rates.
///
/// `bound` must dominate both rates everywhere; the simulators use it as the
/// uniformization rate and abort if an evaluation exceeds it. Lipschitz
/// continuity of user-supplied rates is the caller's responsibility.
pub trait EdgeRates: Send + Sync {
    fn activation(&self, input: &RateInput) -> f64;
    fn deactivation(&self, input: &RateInput) -> f64;
    fn bound(&self) -> f64;
    /// Whether the rates read the graph state (triangle density).
    fn uses_graph(&self) -> bool;
}

/// `activation = lambda0 + lambda_tri * s(triangle)`,
/// `deactivation = mu_age * (x - y)^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSpec {
    pub lambda0: f64,
    pub lambda_tri: f64,
    pub mu_age: f64,
    pub cmax: f64,
}

impl RateSpec {
    pub fn new(lambda0: f64, lambda_tri: f64, mu_age: f64, cmax: f64) -> Result<Self> {
        let spec = Self { lambda0, lambda_tri, mu_age, cmax };
        spec.validate()?;
        Ok(spec)
    }

    /// The triangle-reinforced example: `4 + 60 s`, `120 (x - y)^2`.
    pub fn triangle_example() -> Self {
        Self { lambda0: 4.0, lambda_tri: 60.0, mu_age: 120.0, cmax: 120.0 }
    }

    /// Constant activation, no deactivation (the illustrative model).
    pub fn constant(lambda: f64) -> Result<Self> {
        Self::new(lambda, 0.0, 0.0, lambda.max(f64::MIN_POSITIVE))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda0", self.lambda0), ("lambda_tri", self.lambda_tri), ("mu_age", self.mu_age)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        if !(self.cmax > 0.0) || !self.cmax.is_finite() {
            return Err(invalid(format!("cmax must be positive, got {}", self.cmax)));
        }
        Ok(())
    }
}

impl EdgeRates for RateSpec {
    fn activation(&self, input: &RateInput) -> f64 {
        self.lambda0 + self.lambda_tri * input.triangle_density
    }

    fn deactivation(&self, input: &RateInput) -> f64 {
        let d = input.x - input.y;
        self.mu_age * d * d
    }

    fn bound(&self) -> f64 {
        self.cmax
    }

    fn uses_graph(&self) -> bool {
        self.lambda_tri != 0.0
    }
}

type RateFn = Box<dyn Fn(&RateInput) -> f64 + Send + Sync>;

/// Rates given by closures.
pub struct FnRates {
    activation: RateFn,
    deactivation: RateFn,
    bound: f64,
    uses_graph: bool,
}

impl FnRates {
    pub fn new(
        activation: impl Fn(&RateInput) -> f64 + Send + Sync + 'static,
        deactivation: impl Fn(&RateInput) -> f64 + Send + Sync + 'static,
        bound: f64,
        uses_graph: bool,
    ) -> Result<Self> {
        if !(bound > 0.0) || !bound.is_finite() {
            return Err(invalid(format!("rate bound must be positive, got {bound}")));
        }
        Ok(Self { activation: Box::new(activation), deactivation: Box::new(deactivation), bound, uses_graph })
    }
}

impl EdgeRates for FnRates {
    fn activation(&self, input: &RateInput) -> f64 {
        (self.activation)(input)
    }

    fn deactivation(&self, input: &RateInput) -> f64 {
        (self.deactivation)(input)
    }

    fn bound(&self) -> f64 {
        self.bound
    }

    fn uses_graph(&self) -> bool {
        self.uses_graph
    }
}
