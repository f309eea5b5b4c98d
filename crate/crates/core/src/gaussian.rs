//! Two-mode linear model and Gaussian covariance engine.
//!
//! The reduced dynamics couples the dark polariton P_D to the spin wave S_1
//! through a pair term, with loss on the polariton and compensating
//! loss/gain on the spin wave. Everything here is linear with Gaussian
//! noise, so first and second moments capture the state exactly and the
//! engine integrates a deterministic 4x4 covariance ODE.
//!
//! Quadratures are X = (a + a')/sqrt2, Y = i(a - a')/sqrt2 with [X, Y] = -i
//! and vacuum variance 1/2. The public mode basis is (X_D, Y_D, X_1, Y_1);
//! internally the engine works in the sum/difference basis
//! (X+, Y+, X-, Y-), where the squeezed combinations are coordinates and the
//! small variances never suffer cancellation against the amplified ones.

use nalgebra::{Matrix2, Matrix4, SMatrix, Vector4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::params::{DerivedRates, PhysicalParams};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Orthogonal map from the mode basis (X_D, Y_D, X_1, Y_1) to the
/// sum/difference basis (X+, Y+, X-, Y-).
#[rustfmt::skip]
fn pm_transform() -> Matrix4<f64> {
    let s = FRAC_1_SQRT_2;
    Matrix4::new(
        s, 0.0,  s, 0.0,
        0.0, s, 0.0,  s,
        s, 0.0, -s, 0.0,
        0.0, s, 0.0, -s,
    )
}

/// Symplectic form in either quadrature basis: [r_i, r_j] = i Omega_ij with
/// [X, Y] = -i per mode.
#[rustfmt::skip]
fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, -1.0, 0.0, 0.0,
        1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, -1.0,
        0.0, 0.0, 1.0, 0.0,
    )
}

/// One linear jump operator, `amp_a * a + amp_adag * a' + amp_s * s + amp_sdag * s'`,
/// in the gauged frame shared by engine and oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpSpec {
    pub amp_a: C64,
    pub amp_adag: C64,
    pub amp_s: C64,
    pub amp_sdag: C64,
}

impl JumpSpec {
    fn zero() -> Self {
        JumpSpec {
            amp_a: C64::new(0.0, 0.0),
            amp_adag: C64::new(0.0, 0.0),
            amp_s: C64::new(0.0, 0.0),
            amp_sdag: C64::new(0.0, 0.0),
        }
    }
}

/// Drift + noise decomposition of the reduced two-mode model.
///
/// The stored rates live in a fixed phase gauge: a constant phase rotation
/// of the polariton mode (recorded in `gauge_phase`) turns the pair coupling
/// real and positive, which makes Y+ the squeezed quadrature. Extremal
/// variances are gauge invariant, so reported quantities do not depend on
/// this convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    /// Signed pair coupling as derived from the parameters.
    pub xi_signed: f64,
    /// Gauged coupling |xi| entering the engine.
    pub xi: f64,
    /// Polariton amplitude loss (kappa + eta gamma_L)/(1 + eta).
    pub polariton_loss: f64,
    /// Polariton detuning eta delta2/(1 + eta).
    pub polariton_detuning: f64,
    /// Spin-wave amplitude loss gamma_L.
    pub spin_loss: f64,
    /// Spin-wave amplitude gain (g2/g1)^2 gamma_L.
    pub spin_gain: f64,
    /// Spin-wave detuning delta1.
    pub spin_detuning: f64,
    /// Rate of each balanced correlated loss-gain channel pair (see
    /// [`LinearModel::channels`]); zero when xi = 0.
    pub pair_noise_rate: f64,
    /// Phase rotation (polariton, spin wave) mapping the lab frame onto the
    /// gauged frame, radians.
    pub gauge_phase: [f64; 2],
    /// Multiplier on the engine diffusion matrix. 1.0 in normal operation;
    /// the validation harness uses it as a corruption hook.
    pub diffusion_scale: f64,
}

impl LinearModel {
    /// Model from explicit gauged rates. Rates must be non-negative.
    pub fn from_rates(
        xi: f64,
        polariton_loss: f64,
        polariton_detuning: f64,
        spin_loss: f64,
        spin_gain: f64,
        spin_detuning: f64,
        pair_noise_rate: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("polariton_loss", polariton_loss),
            ("spin_loss", spin_loss),
            ("spin_gain", spin_gain),
            ("pair_noise_rate", pair_noise_rate),
        ] {
            if !(v >= 0.0) {
                return Err(Error::NegativeRate { name, value: v });
            }
        }
        if !xi.is_finite() {
            return Err(Error::InvalidParams("xi is not finite".into()));
        }
        Ok(LinearModel {
            xi_signed: xi,
            xi: xi.abs(),
            polariton_loss,
            polariton_detuning,
            spin_loss,
            spin_gain,
            spin_detuning,
            pair_noise_rate,
            gauge_phase: [if xi >= 0.0 { -std::f64::consts::FRAC_PI_2 } else { std::f64::consts::FRAC_PI_2 }, 0.0],
            diffusion_scale: 1.0,
        })
    }

    /// Returns a copy with the diffusion matrix scaled by `scale`.
    /// Scale != 1 breaks the noise bookkeeping on purpose; the oracle
    /// comparison uses it as a negative control.
    pub fn with_diffusion_scale(mut self, scale: f64) -> Self {
        self.diffusion_scale = scale;
        self
    }

    /// Complex drift matrix on the vector (P_D, S_1') in the lab frame:
    ///
    /// ```text
    /// [ -(kappa + eta(gamma_L + i delta2))/(1 + eta)    i xi ]
    /// [ -i xi    (g2^2/g1^2) gamma_L - gamma_L - i delta1   ]
    /// ```
    pub fn drift(&self) -> Matrix2<C64> {
        Matrix2::new(
            C64::new(-self.polariton_loss, -self.polariton_detuning),
            C64::new(0.0, self.xi_signed),
            C64::new(0.0, -self.xi_signed),
            C64::new(self.spin_gain - self.spin_loss, -self.spin_detuning),
        )
    }

    /// Real 4x4 drift on (X_D, Y_D, X_1, Y_1) in the gauged frame.
    #[rustfmt::skip]
    pub fn real_drift(&self) -> Matrix4<f64> {
        let ga = self.polariton_loss;
        let da = self.polariton_detuning;
        let ps = self.spin_gain - self.spin_loss;
        let d1 = self.spin_detuning;
        let xi = self.xi;
        Matrix4::new(
            -ga, -da,  xi, 0.0,
             da, -ga, 0.0, -xi,
             xi, 0.0,  ps,  d1,
            0.0, -xi, -d1,  ps,
        )
    }

    /// Diffusion matrix D of dC/dt = A C + C A^T + D on the mode-basis
    /// quadratures. Each amplitude-loss channel at rate g contributes g on
    /// that mode's diagonal block, each gain channel likewise; the balanced
    /// correlated channel pair adds 2 nu per diagonal and an antidiagonal
    /// cross block diag(-2 nu, +2 nu) tying the polariton loss noise to the
    /// spin-wave gain noise.
    #[rustfmt::skip]
    pub fn diffusion_matrix(&self) -> Matrix4<f64> {
        let nu = self.pair_noise_rate;
        let daa = self.polariton_loss + 2.0 * nu;
        let dss = self.spin_loss + self.spin_gain + 2.0 * nu;
        self.diffusion_scale * Matrix4::new(
            daa, 0.0, -2.0 * nu, 0.0,
            0.0, daa, 0.0, 2.0 * nu,
            -2.0 * nu, 0.0, dss, 0.0,
            0.0, 2.0 * nu, 0.0, dss,
        )
    }

    /// Jump operators realizing the same drift and diffusion as a Lindblad
    /// generator (gauged frame): plain loss/gain channels plus the two
    /// balanced composites carrying the correlated noise.
    pub fn channels(&self) -> Vec<JumpSpec> {
        let mut out = Vec::new();
        if self.polariton_loss > 0.0 {
            out.push(JumpSpec {
                amp_a: C64::new((2.0 * self.polariton_loss).sqrt(), 0.0),
                ..JumpSpec::zero()
            });
        }
        if self.spin_loss > 0.0 {
            out.push(JumpSpec {
                amp_s: C64::new((2.0 * self.spin_loss).sqrt(), 0.0),
                ..JumpSpec::zero()
            });
        }
        if self.spin_gain > 0.0 {
            out.push(JumpSpec {
                amp_sdag: C64::new((2.0 * self.spin_gain).sqrt(), 0.0),
                ..JumpSpec::zero()
            });
        }
        if self.pair_noise_rate > 0.0 {
            let amp = C64::new((2.0 * self.pair_noise_rate).sqrt(), 0.0);
            out.push(JumpSpec {
                amp_a: amp,
                amp_sdag: amp,
                ..JumpSpec::zero()
            });
            out.push(JumpSpec {
                amp_s: amp,
                amp_adag: amp,
                ..JumpSpec::zero()
            });
        }
        out
    }

    /// Largest rate entering the drift; sets the integrator stability bound.
    pub fn binding_rate(&self) -> (&'static str, f64) {
        let candidates = [
            ("xi", self.xi),
            ("polariton_loss", self.polariton_loss),
            ("polariton_detuning", self.polariton_detuning.abs()),
            ("spin_loss", self.spin_loss),
            ("spin_gain", self.spin_gain),
            ("spin_detuning", self.spin_detuning.abs()),
            ("pair_noise_rate", self.pair_noise_rate),
        ];
        let mut best = candidates[0];
        for c in candidates {
            if c.1 > best.1 {
                best = c;
            }
        }
        best
    }

    /// Stability bound on the integrator step, 0.01 / max rate.
    pub fn max_step(&self) -> f64 {
        let (_, r) = self.binding_rate();
        if r > 0.0 {
            0.01 / r
        } else {
            f64::INFINITY
        }
    }
}

/// Build the reduced linear model from physical parameters.
///
/// The correlated-channel rate is set to (spin gain + kappa/eta)/8, which
/// makes the engine's quasi-steady noise floor on the squeezed quadrature
/// reproduce the closed form of [`crate::params::predict_variance`] for
/// matched couplings in the slow-light limit. Pure decay (xi = 0) carries no
/// pair drive, so the channel is absent and every mode relaxes to vacuum.
pub fn build_model(p: &PhysicalParams, d: &DerivedRates) -> Result<LinearModel> {
    p.validate()?;
    if p.delta_big == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    if d.eta <= 0.0 {
        return Err(Error::ZeroEta);
    }
    let gamma_l = d.gamma_l;
    let eta = d.eta;
    let polariton_loss = (p.kappa + eta * gamma_l) / (1.0 + eta);
    let polariton_detuning = eta * p.delta2 / (1.0 + eta);
    let spin_gain = if p.g1 > 0.0 {
        (p.g2 / p.g1).powi(2) * gamma_l
    } else {
        0.0
    };
    let kappa_over_eta = p.kappa / eta;
    let pair_noise_rate = if d.xi != 0.0 {
        (spin_gain + kappa_over_eta) / 8.0
    } else {
        0.0
    };
    let mut m = LinearModel::from_rates(
        d.xi,
        polariton_loss,
        polariton_detuning,
        gamma_l,
        spin_gain,
        p.delta1,
        pair_noise_rate,
    )?;
    m.xi_signed = d.xi;
    Ok(m)
}

/// Gaussian state of the two modes: quadrature means and symmetrized
/// covariances, stored in the sum/difference basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    time: f64,
    mean: Vector4<f64>,
    cov_pm: Matrix4<f64>,
}

impl GaussianState {
    /// Vacuum: zero mean, cov = I/2.
    pub fn vacuum() -> Self {
        GaussianState {
            time: 0.0,
            mean: Vector4::zeros(),
            cov_pm: Matrix4::identity() * 0.5,
        }
    }

    /// Lossless two-mode squeezed state with squeezing parameter r at time t.
    pub fn ideal(time: f64, r: f64) -> Self {
        let (vy, vx) = crate::ideal::ideal_variances(r);
        GaussianState {
            time,
            mean: Vector4::zeros(),
            cov_pm: Matrix4::from_diagonal(&Vector4::new(vx, vy, vy, vx)),
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Quadrature means (X_D, Y_D, X_1, Y_1).
    pub fn mean(&self) -> Vector4<f64> {
        let t = pm_transform();
        t.transpose() * self.mean
    }

    /// Covariance matrix on the mode-basis quadratures (X_D, Y_D, X_1, Y_1).
    pub fn cov(&self) -> Matrix4<f64> {
        let t = pm_transform();
        t.transpose() * self.cov_pm * t
    }

    /// Covariance in the internal sum/difference basis (X+, Y+, X-, Y-).
    pub fn cov_pm(&self) -> Matrix4<f64> {
        self.cov_pm
    }

    /// State with the given mode-basis covariance (for tests and the oracle
    /// comparison path).
    pub fn from_mode_cov(time: f64, mean: Vector4<f64>, cov: Matrix4<f64>) -> Self {
        let t = pm_transform();
        GaussianState {
            time,
            mean: t * mean,
            cov_pm: t * cov * t.transpose(),
        }
    }
}

/// Integrate dC/dt = A C + C A^T + D from vacuum with a fixed-step
/// classical 4th-order scheme. The final time is hit exactly; the last step
/// may be shorter. Every step is stored.
pub fn evolve(m: &LinearModel, t_final: f64, dt: f64) -> Result<Vec<GaussianState>> {
    if !(t_final >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "t_final must be >= 0, got {t_final}"
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParams(format!("dt must be > 0, got {dt}")));
    }
    let bound = m.max_step();
    if dt > bound {
        let (binding, _) = m.binding_rate();
        return Err(Error::StepSize { binding, bound, dt });
    }
    let t_pm = pm_transform();
    let a = t_pm * m.real_drift() * t_pm.transpose();
    let d = t_pm * m.diffusion_matrix() * t_pm.transpose();

    let mut states = Vec::new();
    let mut c = Matrix4::identity() * 0.5;
    let mut t = 0.0;
    states.push(GaussianState {
        time: 0.0,
        mean: Vector4::zeros(),
        cov_pm: c,
    });
    if t_final == 0.0 {
        return Ok(states);
    }
    let n_steps = (t_final / dt - 1e-12).ceil().max(1.0) as usize;
    let rhs = |c: &Matrix4<f64>| a * c + c * a.transpose() + d;
    for k in 0..n_steps {
        let h = if k + 1 == n_steps { t_final - t } else { dt };
        let k1 = rhs(&c);
        let k2 = rhs(&(c + k1 * (0.5 * h)));
        let k3 = rhs(&(c + k2 * (0.5 * h)));
        let k4 = rhs(&(c + k3 * h));
        c += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        // the update is symmetric up to roundoff; re-symmetrize to keep the
        // eigensolver on exactly symmetric input
        c = (c + c.transpose()) * 0.5;
        t += h;
        states.push(GaussianState {
            time: t,
            mean: Vector4::zeros(),
            cov_pm: c,
        });
    }
    Ok(states)
}

/// Variances of the joint quadratures X± = (X_D ± X_1)/sqrt2,
/// Y± = (Y_D ± Y_1)/sqrt2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Variances {
    pub y_plus: f64,
    pub y_minus: f64,
    pub x_plus: f64,
    pub x_minus: f64,
}

pub fn variances(s: &GaussianState) -> Variances {
    let c = s.cov_pm();
    Variances {
        x_plus: c[(0, 0)],
        y_plus: c[(1, 1)],
        x_minus: c[(2, 2)],
        y_minus: c[(3, 3)],
    }
}

/// Smallest variance over all normalized joint quadratures: the minimum
/// eigenvalue of the covariance matrix. Equals the squeezed-quadrature
/// variance in the engine's gauge and is invariant under mode phase
/// redefinitions.
///
/// Eigenvalues of a strongly amplified state (entries ~ e^(2 xi t)) are only
/// resolvable down to eps * ||C||; the result is floored there so
/// ill-conditioned late-time states cannot report spurious small or negative
/// variances into a minimum-over-time search.
pub fn minimal_variance(s: &GaussianState) -> f64 {
    let c = s.cov_pm();
    let resolution = 4.0 * f64::EPSILON * c.amax();
    c.symmetric_eigen().eigenvalues.min().max(resolution)
}

/// Per-mode occupation numbers ((X^2 + Y^2 - 1)/2 per mode).
///
/// Occupations below -1e-9 indicate a corrupted integration and error out.
pub fn excitations(s: &GaussianState) -> Result<(f64, f64)> {
    let c = s.cov();
    let mu = s.mean();
    let n_pol = 0.5 * (c[(0, 0)] + c[(1, 1)] + mu[0] * mu[0] + mu[1] * mu[1] - 1.0);
    let n_spin = 0.5 * (c[(2, 2)] + c[(3, 3)] + mu[2] * mu[2] + mu[3] * mu[3] - 1.0);
    for n in [n_pol, n_spin] {
        if n < -1e-9 {
            return Err(Error::NegativeOccupancy { value: n });
        }
    }
    Ok((n_pol, n_spin))
}

/// Smallest eigenvalue of C + (i/2) Omega. Non-negative (to tolerance) for
/// every physical state; checked through the real symmetric embedding
/// [[C, -Omega/2], [Omega/2, C]].
pub fn uncertainty_min_eigenvalue(s: &GaussianState) -> f64 {
    let c = s.cov_pm();
    let k = symplectic_form() * 0.5;
    let mut h = SMatrix::<f64, 8, 8>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            h[(i, j)] = c[(i, j)];
            h[(i + 4, j + 4)] = c[(i, j)];
            h[(i, j + 4)] = -k[(i, j)];
            h[(i + 4, j)] = k[(i, j)];
        }
    }
    h.symmetric_eigen().eigenvalues.min()
}

/// Format a float with 17 significant digits for the CSV interfaces.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

pub const SERIES_HEADER: &str =
    "t,xi_t,var_y_plus,var_y_minus,var_x_plus,var_x_minus,min_var,n_polariton,n_spinwave";

/// Write the time-series CSV for a covariance trajectory.
pub fn write_series_csv<W: Write>(
    w: &mut W,
    states: &[GaussianState],
    xi: f64,
) -> Result<()> {
    let io_err = |e: std::io::Error| Error::InvalidParams(format!("io error: {e}"));
    writeln!(w, "{SERIES_HEADER}").map_err(io_err)?;
    for s in states {
        let v = variances(s);
        let (np, ns) = excitations(s)?;
        let row = [
            s.time(),
            xi * s.time(),
            v.y_plus,
            v.y_minus,
            v.x_plus,
            v.x_minus,
            minimal_variance(s),
            np,
            ns,
        ];
        let line: Vec<String> = row.iter().map(|x| fmt_g17(*x)).collect();
        writeln!(w, "{}", line.join(",")).map_err(io_err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal;
    use crate::params::PhysicalParams;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn lossless(xi: f64) -> LinearModel {
        LinearModel::from_rates(xi, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap()
    }

    fn fig_params() -> PhysicalParams {
        let mut p =
            PhysicalParams::new(1e4, 1.0, 1.0, 1.0, 1.0, 100.0, 0.0, 0.0, 0.0, 1.0)
                .unwrap();
        p.delta_big = crate::params::predict_optimal_detuning(&p).unwrap().delta_opt;
        p
    }

    #[test]
    fn lossless_drift_is_pure_pair_coupling() {
        let m = lossless(0.7);
        let d = m.drift();
        assert_eq!(d[(0, 0)], C64::new(0.0, 0.0));
        assert_eq!(d[(0, 1)], C64::new(0.0, 0.7));
        assert_eq!(d[(1, 0)], C64::new(0.0, -0.7));
        assert_eq!(d[(1, 1)], C64::new(0.0, 0.0));
        assert_eq!(m.diffusion_matrix(), Matrix4::zeros());
    }

    #[test]
    fn matched_couplings_cancel_spin_drift() {
        let p = fig_params();
        let d = crate::params::derive_rates(&p).unwrap();
        let m = build_model(&p, &d).unwrap();
        assert_abs_diff_eq!(m.drift()[(1, 1)].re, 0.0, epsilon = 1e-18);
        assert_relative_eq!(m.spin_gain, m.spin_loss, max_relative = 1e-14);
    }

    #[test]
    fn slow_light_limit_of_polariton_diagonal() {
        // eta -> infinity pushes the polariton diagonal to -(gamma_L + i delta2)
        let mut p =
            PhysicalParams::new(1e12, 1.0, 1.0, 1.0, 1.0, 100.0, 0.0, 0.3, 0.0, 1.0)
                .unwrap();
        p.delta2 = 0.3;
        let d = crate::params::derive_rates(&p).unwrap();
        let m = build_model(&p, &d).unwrap();
        assert_relative_eq!(m.polariton_loss, d.gamma_l, max_relative = 1e-6);
        assert_relative_eq!(m.polariton_detuning, 0.3, max_relative = 1e-6);
    }

    #[test]
    fn negative_rates_rejected() {
        assert!(matches!(
            LinearModel::from_rates(1.0, -0.1, 0.0, 0.0, 0.0, 0.0, 0.0),
            Err(Error::NegativeRate { name: "polariton_loss", .. })
        ));
    }

    #[test]
    fn diffusion_blocks_match_channel_rates() {
        let p = fig_params();
        let d = crate::params::derive_rates(&p).unwrap();
        let m = build_model(&p, &d).unwrap();
        let dm = m.diffusion_matrix();
        let nu = m.pair_noise_rate;
        assert_relative_eq!(dm[(0, 0)], m.polariton_loss + 2.0 * nu, max_relative = 1e-14);
        assert_relative_eq!(
            dm[(2, 2)],
            m.spin_loss + m.spin_gain + 2.0 * nu,
            max_relative = 1e-14
        );
        assert_relative_eq!(dm[(1, 3)], 2.0 * nu, max_relative = 1e-14);
        assert_relative_eq!(dm[(0, 2)], -2.0 * nu, max_relative = 1e-14);
        // commutator bookkeeping: spin drift = gain - loss
        assert_relative_eq!(
            m.drift()[(1, 1)].re,
            m.spin_gain - m.spin_loss,
            max_relative = 1e-14
        );
    }

    /// Commutator preservation, algebraically: with K = J/2 per mode
    /// (J the 2x2 symplectic unit) the antisymmetric second-moment source
    /// from the channels exactly cancels A K + K A^T.
    #[test]
    fn commutator_preservation_identity() {
        let models = [
            lossless(0.9),
            LinearModel::from_rates(0.5, 0.03, 0.01, 0.02, 0.02, -0.04, 0.006).unwrap(),
            LinearModel::from_rates(0.0, 0.3, 0.0, 0.1, 0.0, 0.0, 0.0).unwrap(),
            LinearModel::from_rates(1.3, 0.08, -0.2, 0.01, 0.05, 0.1, 0.012).unwrap(),
        ];
        for m in models {
            let a = m.real_drift();
            let j = symplectic_form() * -1.0; // [[0,1],[-1,0]] blocks
            let k = j * 0.5;
            // net amplitude decay per mode = loss - gain; the balanced pair
            // channels cancel in the antisymmetric source.
            let net_a = m.polariton_loss;
            let net_s = m.spin_loss - m.spin_gain;
            let mut dc = Matrix4::zeros();
            dc[(0, 1)] = net_a;
            dc[(1, 0)] = -net_a;
            dc[(2, 3)] = net_s;
            dc[(3, 2)] = -net_s;
            let resid = a * k + k * a.transpose() + dc;
            assert!(resid.amax() < 1e-15, "residual {resid}");
        }
    }

    #[test]
    fn lossless_evolution_matches_ideal() {
        let m = lossless(0.31);
        let states = evolve(&m, 1.0 / 0.31, 1e-3 / 0.31).unwrap();
        let s = states.last().unwrap();
        let v = variances(s);
        let (vy_ideal, vx_ideal) = ideal::ideal_variances(1.0);
        assert_relative_eq!(v.y_plus, vy_ideal, max_relative = 1e-10);
        assert_relative_eq!(v.x_plus, vx_ideal, max_relative = 1e-10);
        assert_relative_eq!(v.x_minus, vy_ideal, max_relative = 1e-10);
        let (np, ns) = excitations(s).unwrap();
        assert_relative_eq!(np, ideal::ideal_excitations(1.0), max_relative = 1e-10);
        assert_relative_eq!(ns, np, max_relative = 1e-12);
    }

    #[test]
    fn lossless_excitation_growth_at_large_squeezing() {
        let m = lossless(1.0);
        let states = evolve(&m, 3.0, 1e-3).unwrap();
        let (np, ns) = excitations(states.last().unwrap()).unwrap();
        assert_relative_eq!(np, 100.35781806122796, max_relative = 1e-9);
        assert_relative_eq!(ns, 100.35781806122796, max_relative = 1e-9);
    }

    #[test]
    fn pure_decay_relaxes_to_vacuum() {
        let m = LinearModel::from_rates(0.0, 0.05, 0.0, 0.02, 0.0, 0.0, 0.0).unwrap();
        let states = evolve(&m, 700.0, 0.19).unwrap();
        let c = states.last().unwrap().cov_pm();
        assert!((c - Matrix4::identity() * 0.5).amax() < 1e-9);
        assert_eq!(m.pair_noise_rate, 0.0);
    }

    #[test]
    fn zero_horizon_yields_single_vacuum_row() {
        let m = lossless(1.0);
        let states = evolve(&m, 0.0, 0.001).unwrap();
        assert_eq!(states.len(), 1);
        assert_abs_diff_eq!(minimal_variance(&states[0]), 0.5);
        let v = variances(&states[0]);
        assert_abs_diff_eq!(v.y_plus, 0.5);
        assert_abs_diff_eq!(v.x_minus, 0.5);
    }

    #[test]
    fn step_bound_violation_names_binding_rate() {
        let m = lossless(2.0);
        match evolve(&m, 1.0, 0.01) {
            Err(Error::StepSize { binding, bound, .. }) => {
                assert_eq!(binding, "xi");
                assert_relative_eq!(bound, 0.005, max_relative = 1e-14);
            }
            other => panic!("expected step-size error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_variance_of_ideal_states() {
        for r in [0.0, 0.5, 1.0, 2.0] {
            let s = GaussianState::ideal(0.0, r);
            assert_relative_eq!(
                minimal_variance(&s),
                0.5 * (-2.0 * r).exp(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn minimal_variance_invariant_under_mode_phase_rotation() {
        let s = GaussianState::ideal(0.0, 1.2);
        let c = s.cov();
        let th = 0.77f64;
        let mut rot = Matrix4::identity();
        rot[(0, 0)] = th.cos();
        rot[(0, 1)] = th.sin();
        rot[(1, 0)] = -th.sin();
        rot[(1, 1)] = th.cos();
        let rotated = GaussianState::from_mode_cov(0.0, Vector4::zeros(), rot * c * rot.transpose());
        assert_relative_eq!(
            minimal_variance(&rotated),
            minimal_variance(&s),
            max_relative = 1e-10
        );
    }

    #[test]
    fn excitations_flag_corruption() {
        let bad = GaussianState::from_mode_cov(
            0.0,
            Vector4::zeros(),
            Matrix4::identity() * 0.4,
        );
        assert!(matches!(
            excitations(&bad),
            Err(Error::NegativeOccupancy { .. })
        ));
    }

    #[test]
    fn uncertainty_positive_along_lossy_trajectory() {
        let p = fig_params();
        let d = crate::params::derive_rates(&p).unwrap();
        let m = build_model(&p, &d).unwrap();
        let t_star = crate::params::predict_optimal_time(&d).unwrap();
        let states = evolve(&m, 1.2 * t_star, (t_star / 400.0).min(m.max_step())).unwrap();
        for s in &states {
            assert!(uncertainty_min_eigenvalue(s) >= -1e-9);
        }
    }

    #[test]
    fn csv_series_shape_and_header() {
        let m = lossless(1.0);
        let states = evolve(&m, 0.01, 0.005).unwrap();
        let mut buf = Vec::new();
        write_series_csv(&mut buf, &states, 1.0).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SERIES_HEADER);
        assert_eq!(lines.len(), states.len() + 1);
        assert!(lines[1].starts_with("0.0000000000000000e0,"));
    }

    proptest! {
        #[test]
        fn uncertainty_and_symmetry_hold_for_random_models(
            xi in 0.0f64..1.5,
            ga in 0.0f64..0.1,
            da in -0.2f64..0.2,
            gl in 0.0f64..0.1,
            gg in 0.0f64..0.1,
            d1 in -0.2f64..0.2,
        ) {
            let nu = (gg + 0.5 * ga) / 8.0;
            let m = LinearModel::from_rates(xi, ga, da, gl, gg, d1, nu).unwrap();
            let horizon = if xi > 0.05 { 2.0 / xi } else { 10.0 };
            let dt = (m.max_step() * 0.5).min(horizon / 50.0);
            let states = evolve(&m, horizon, dt).unwrap();
            for s in states.iter().step_by(10) {
                let c = s.cov_pm();
                prop_assert!((c - c.transpose()).amax() < 1e-12);
                prop_assert!(uncertainty_min_eigenvalue(s) >= -1e-9);
                let v = variances(s);
                prop_assert!(v.y_plus * v.x_plus >= 0.25 - 1e-9);
            }
        }
    }
}
