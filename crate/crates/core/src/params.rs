//! Physical inputs, derived rates and closed-form squeezing predictions.
//!
//! All rates are dimensionless, measured in units of the excited-state
//! coherence decay `gamma_ag` (fixed to 1). The closed forms only depend on
//! rate ratios, so this convention loses nothing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default factor demanded of every `>>` inequality in [`regime_check`].
pub const DEFAULT_REGIME_THRESHOLD: f64 = 10.0;

/// Experiment-level inputs for the two-mode reduced model.
///
/// `n_atoms` is real-valued so scaling studies can sweep it continuously.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// Atom number N.
    pub n_atoms: f64,
    /// Vacuum coupling on the Stokes transition.
    pub g1: f64,
    /// Vacuum coupling on the anti-Stokes (EIT) transition.
    pub g2: f64,
    /// Classical Rabi frequency of the far-detuned drive.
    pub omega1: f64,
    /// Classical Rabi frequency of the resonant control field.
    pub omega2: f64,
    /// Single-photon detuning Delta (signed, nonzero).
    pub delta_big: f64,
    /// Two-photon detuning of the spin-wave mode.
    pub delta1: f64,
    /// Two-photon detuning of the polariton mode.
    pub delta2: f64,
    /// Excited-state coherence decay; the unit of time. Must be exactly 1.
    pub gamma_ag: f64,
    /// Bare ground-state coherence decay.
    pub gamma_gb: f64,
    /// Cavity amplitude decay rate.
    pub kappa: f64,
}

impl PhysicalParams {
    /// Checked constructor; see [`PhysicalParams::validate`].
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_atoms: f64,
        g1: f64,
        g2: f64,
        omega1: f64,
        omega2: f64,
        delta_big: f64,
        delta1: f64,
        delta2: f64,
        gamma_gb: f64,
        kappa: f64,
    ) -> Result<Self> {
        let p = Self {
            n_atoms,
            g1,
            g2,
            omega1,
            omega2,
            delta_big,
            delta1,
            delta2,
            gamma_ag: 1.0,
            gamma_gb,
            kappa,
        };
        p.validate()?;
        Ok(p)
    }

    /// Enforce the type invariants: everything finite, rates non-negative,
    /// `delta_big != 0`, `gamma_ag == 1`.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("n_atoms", self.n_atoms),
            ("g1", self.g1),
            ("g2", self.g2),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("delta_big", self.delta_big),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("gamma_ag", self.gamma_ag),
            ("gamma_gb", self.gamma_gb),
            ("kappa", self.kappa),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} is not finite")));
            }
        }
        if self.gamma_ag != 1.0 {
            return Err(Error::InvalidParams(format!(
                "gamma_ag defines the unit and must be exactly 1, got {}",
                self.gamma_ag
            )));
        }
        if self.n_atoms <= 0.0 {
            return Err(Error::InvalidParams("n_atoms must be positive".into()));
        }
        for (name, v) in [
            ("g1", self.g1),
            ("g2", self.g2),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("gamma_gb", self.gamma_gb),
            ("kappa", self.kappa),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be >= 0")));
            }
        }
        if self.delta_big == 0.0 {
            return Err(Error::ZeroDetuning);
        }
        Ok(())
    }

    /// Parse a parameter set from a JSON document carrying exactly the
    /// `PhysicalParams` field names. Unknown keys are rejected.
    pub fn from_json(doc: &str) -> Result<Self> {
        let p: PhysicalParams = serde_json::from_str(doc)
            .map_err(|e| Error::InvalidParams(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }
}

/// Every derived rate of the reduced model, in units of `gamma_ag`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedRates {
    /// Pair-generation coupling xi = (omega1 omega2 / Delta) g1 sqrt(N) / sqrt(g2^2 N + omega2^2).
    pub xi: f64,
    /// Optical pumping rate gamma_L = omega1^2 / Delta^2.
    pub gamma_l: f64,
    /// Group-velocity ratio eta = g2^2 N / omega2^2.
    pub eta: f64,
    /// Dressed ground-state coherence decay gamma_gb + gamma_L.
    pub gamma_gb_bar: f64,
    /// Light shift omega1^2 / Delta. Reported only; compensated in the level scheme.
    pub light_shift: f64,
    /// Polariton decay gamma_L + kappa/eta (slow-light limit).
    pub polariton_decay: f64,
    /// Cooperativity C = g2^2 N / kappa.
    pub cooperativity: f64,
    /// Photonic fraction of the dark polariton, omega2^2/(g2^2 N + omega2^2).
    pub mixing_angle_cos2: f64,
    /// Atomic fraction of the dark polariton, g2^2 N/(g2^2 N + omega2^2).
    pub mixing_angle_sin2: f64,
}

impl DerivedRates {
    /// Cavity leak through the polariton's photonic component, kappa/eta.
    pub fn kappa_over_eta(&self) -> f64 {
        self.polariton_decay - self.gamma_l
    }
}

/// Compute all derived rates from a parameter set.
pub fn derive_rates(p: &PhysicalParams) -> Result<DerivedRates> {
    p.validate()?;
    if p.delta_big == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    if p.omega2 == 0.0 {
        return Err(Error::ZeroControlField);
    }
    let g2n = p.g2 * p.g2 * p.n_atoms;
    if g2n == 0.0 {
        return Err(Error::ZeroEta);
    }
    let denom = (g2n + p.omega2 * p.omega2).sqrt();
    let xi = (p.omega1 * p.omega2 / p.delta_big) * p.g1 * p.n_atoms.sqrt() / denom;
    let gamma_l = p.omega1 * p.omega1 / (p.delta_big * p.delta_big);
    let eta = g2n / (p.omega2 * p.omega2);
    Ok(DerivedRates {
        xi,
        gamma_l,
        eta,
        gamma_gb_bar: p.gamma_gb + gamma_l,
        light_shift: p.omega1 * p.omega1 / p.delta_big,
        polariton_decay: gamma_l + p.kappa / eta,
        cooperativity: g2n / p.kappa,
        mixing_angle_cos2: p.omega2 * p.omega2 / (g2n + p.omega2 * p.omega2),
        mixing_angle_sin2: g2n / (g2n + p.omega2 * p.omega2),
    })
}

/// Closed-form variance of the squeezed joint quadrature for matched
/// couplings (g1 = g2), valid in the slow-light limit:
///
/// ```text
/// Var(t) = 1/2 { e^(-2 xi t) + 2 gamma_L/xi + (kappa/eta)/xi
///                + e^(2 xi t) ((gamma_L + kappa/eta)/(4 xi))^2 }
/// ```
pub fn predict_variance(d: &DerivedRates, t: f64) -> Result<f64> {
    if d.xi <= 0.0 {
        return Err(Error::NonPositiveXi(d.xi));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidParams(format!("t must be >= 0, got {t}")));
    }
    let koe = d.kappa_over_eta();
    let gd = d.gamma_l + koe;
    let x = d.xi * t;
    Ok(0.5
        * ((-2.0 * x).exp()
            + 2.0 * d.gamma_l / d.xi
            + koe / d.xi
            + (2.0 * x).exp() * (gd / (4.0 * d.xi)).powi(2)))
}

/// Interaction time of maximal squeezing, defined by
/// `e^(-2 xi t*) = (gamma_L + kappa/eta)/(4 xi)`.
pub fn predict_optimal_time(d: &DerivedRates) -> Result<f64> {
    if d.xi <= 0.0 {
        return Err(Error::NonPositiveXi(d.xi));
    }
    let gd = d.gamma_l + d.kappa_over_eta();
    if gd <= 0.0 {
        return Err(Error::UnboundedOptimalTime);
    }
    let ratio = gd / (4.0 * d.xi);
    if ratio >= 1.0 {
        return Err(Error::NoSqueezingWindow { ratio });
    }
    Ok(-ratio.ln() / (2.0 * d.xi))
}

/// Optimal single-photon detuning and the squeezing it yields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalDetuning {
    /// Positive root of the detuning that balances pumping against cavity leak.
    pub delta_opt: f64,
    /// Variance at the optimum, sqrt(15/4)/sqrt(C).
    pub variance_opt: f64,
}

/// Detuning that minimizes the achievable squeezed variance,
/// `Delta_opt = sqrt(5 omega1^2 / (3 omega2^2) * g2^2 N / kappa)` (gamma_ag = 1).
pub fn predict_optimal_detuning(p: &PhysicalParams) -> Result<OptimalDetuning> {
    p.validate()?;
    if p.omega2 == 0.0 {
        return Err(Error::ZeroControlField);
    }
    if p.kappa == 0.0 {
        return Err(Error::InvalidParams(
            "kappa must be positive for an optimal detuning".into(),
        ));
    }
    let g2n = p.g2 * p.g2 * p.n_atoms;
    if g2n == 0.0 {
        return Err(Error::ZeroEta);
    }
    let coop = g2n / p.kappa;
    let delta_opt =
        (5.0 * p.omega1 * p.omega1 / (3.0 * p.omega2 * p.omega2) * coop).sqrt();
    Ok(OptimalDetuning {
        delta_opt,
        variance_opt: (15.0f64 / 4.0).sqrt() / coop.sqrt(),
    })
}

/// One inequality of the validity regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheck {
    pub name: String,
    pub satisfied: bool,
    /// Left-hand side over right-hand side of the raw inequality.
    pub ratio: f64,
}

/// Outcome of [`regime_check`]: one entry per inequality plus the conjunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub checks: Vec<RegimeCheck>,
    pub overall: bool,
    /// Interpretation notes for under-specified symbols.
    pub note: String,
}

/// Check whether a parameter set sits in the regime where the reduced model
/// is trusted. Each `>>` inequality passes when its raw ratio reaches
/// `threshold`; the pair-threshold check `g2^2 N >= 2 kappa gamma` is exact.
pub fn regime_check(p: &PhysicalParams, threshold: f64) -> RegimeReport {
    let g2n = p.g2 * p.g2 * p.n_atoms;
    let eta = if p.omega2 > 0.0 {
        g2n / (p.omega2 * p.omega2)
    } else {
        f64::INFINITY
    };
    let div = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::INFINITY };
    let mut checks = Vec::new();
    let mut push = |name: &str, ratio: f64, required: f64| {
        checks.push(RegimeCheck {
            name: name.to_string(),
            satisfied: ratio >= required,
            ratio,
        });
    };
    push(
        "single_photon_detuning (|Delta| >> gamma_ag)",
        p.delta_big.abs() / p.gamma_ag,
        threshold,
    );
    push(
        "cooperativity (g2^2 N / (gamma_ag kappa) >> 1)",
        div(g2n, p.gamma_ag * p.kappa),
        threshold,
    );
    push("slow_light (eta >> 1)", eta, threshold);
    push(
        "eit_coupling (omega2^2 >> gamma_ag kappa)",
        div(p.omega2 * p.omega2, p.gamma_ag * p.kappa),
        threshold,
    );
    push(
        "pair_threshold (g2^2 N >= 2 kappa gamma_ag)",
        div(g2n, 2.0 * p.kappa * p.gamma_ag),
        1.0,
    );
    let overall = checks.iter().all(|c| c.satisfied);
    RegimeReport {
        checks,
        overall,
        note: "the unsubscripted gamma in the pair threshold is taken as gamma_ag"
            .to_string(),
    }
}
