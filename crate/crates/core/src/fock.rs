//! Brute-force validation oracle on a truncated two-mode number basis.
//!
//! Integrates the master equation built from the same Hamiltonian and jump
//! channels as the covariance engine (see [`LinearModel::channels`]) and
//! compares moments. The oracle checks the engine's integration and noise
//! bookkeeping; it shares nothing with the covariance code path beyond the
//! model definition.

use nalgebra::{DMatrix, Matrix4, Vector4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{evolve, GaussianState, JumpSpec, LinearModel};

/// Sparse operator on the truncated two-mode space, kept as triplets.
/// Mode order: polariton (slow index) tensor spin wave (fast index).
#[derive(Debug, Clone)]
pub struct SparseOp {
    dim: usize,
    terms: Vec<(u32, u32, C64)>,
}

impl SparseOp {
    fn zeros(dim: usize) -> Self {
        SparseOp { dim, terms: Vec::new() }
    }

    /// Polariton annihilation operator on the product space.
    pub fn ann_polariton(cutoff: usize) -> Self {
        let d = cutoff + 1;
        let mut terms = Vec::new();
        for na in 1..=cutoff {
            for ns in 0..=cutoff {
                let col = (na * d + ns) as u32;
                let row = ((na - 1) * d + ns) as u32;
                terms.push((row, col, C64::new((na as f64).sqrt(), 0.0)));
            }
        }
        SparseOp { dim: d * d, terms }
    }

    /// Spin-wave annihilation operator on the product space.
    pub fn ann_spinwave(cutoff: usize) -> Self {
        let d = cutoff + 1;
        let mut terms = Vec::new();
        for na in 0..=cutoff {
            for ns in 1..=cutoff {
                let col = (na * d + ns) as u32;
                let row = (na * d + ns - 1) as u32;
                terms.push((row, col, C64::new((ns as f64).sqrt(), 0.0)));
            }
        }
        SparseOp { dim: d * d, terms }
    }

    fn dagger(&self) -> Self {
        SparseOp {
            dim: self.dim,
            terms: self.terms.iter().map(|&(i, j, v)| (j, i, v.conj())).collect(),
        }
    }

    fn add_scaled(&mut self, other: &SparseOp, scale: C64) {
        for &(i, j, v) in &other.terms {
            self.terms.push((i, j, v * scale));
        }
    }

    /// Merge duplicate entries; keeps apply costs proportional to true nnz.
    fn compress(mut self) -> Self {
        self.terms.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut out: Vec<(u32, u32, C64)> = Vec::with_capacity(self.terms.len());
        for (i, j, v) in self.terms {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => out.push((i, j, v)),
            }
        }
        out.retain(|&(_, _, v)| v.norm_sqr() > 0.0);
        self.terms = out;
        self
    }

    /// Sparse product self * other (both tiny nnz).
    fn mul(&self, other: &SparseOp) -> SparseOp {
        let mut by_row: Vec<Vec<(u32, C64)>> = vec![Vec::new(); self.dim];
        for &(i, j, v) in &other.terms {
            by_row[i as usize].push((j, v));
        }
        let mut out = SparseOp::zeros(self.dim);
        for &(i, k, v) in &self.terms {
            for &(j, w) in &by_row[k as usize] {
                out.terms.push((i, j, v * w));
            }
        }
        out.compress()
    }

    /// out = self * rho
    fn apply_left(&self, rho: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        out.fill(C64::new(0.0, 0.0));
        let n = self.dim;
        let src = rho.as_slice();
        let dst = out.as_mut_slice();
        for col in 0..n {
            let base = col * n;
            for &(i, k, v) in &self.terms {
                dst[base + i as usize] += v * src[base + k as usize];
            }
        }
    }

    /// out = rho * self^dagger
    fn apply_right_dagger(&self, rho: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        out.fill(C64::new(0.0, 0.0));
        let n = self.dim;
        let src = rho.as_slice();
        let dst = out.as_mut_slice();
        for &(j, k, v) in &self.terms {
            let vc = v.conj();
            let dbase = j as usize * n;
            let sbase = k as usize * n;
            for r in 0..n {
                dst[dbase + r] += vc * src[sbase + r];
            }
        }
    }

    /// tr(self * rho)
    fn trace_with(&self, rho: &DMatrix<C64>) -> C64 {
        let n = self.dim;
        let src = rho.as_slice();
        let mut acc = C64::new(0.0, 0.0);
        for &(i, k, v) in &self.terms {
            acc += v * src[i as usize * n + k as usize];
        }
        acc
    }

    fn from_jump(jump: &JumpSpec, cutoff: usize) -> SparseOp {
        let a = SparseOp::ann_polariton(cutoff);
        let s = SparseOp::ann_spinwave(cutoff);
        let mut op = SparseOp::zeros((cutoff + 1) * (cutoff + 1));
        op.add_scaled(&a, jump.amp_a);
        op.add_scaled(&a.dagger(), jump.amp_adag);
        op.add_scaled(&s, jump.amp_s);
        op.add_scaled(&s.dagger(), jump.amp_sdag);
        op.compress()
    }
}

/// Truncated two-mode density operator.
#[derive(Debug, Clone)]
pub struct FockState {
    pub cutoff: usize,
    pub time: f64,
    pub rho: DMatrix<C64>,
}

impl FockState {
    /// |0,0><0,0|
    pub fn vacuum(cutoff: usize) -> Self {
        let d = (cutoff + 1) * (cutoff + 1);
        let mut rho = DMatrix::zeros(d, d);
        rho[(0, 0)] = C64::new(1.0, 0.0);
        FockState { cutoff, time: 0.0, rho }
    }

    /// Pure product number state |n_pol, n_spin>.
    pub fn number_state(cutoff: usize, n_pol: usize, n_spin: usize) -> Self {
        assert!(n_pol <= cutoff && n_spin <= cutoff);
        let d = (cutoff + 1) * (cutoff + 1);
        let idx = n_pol * (cutoff + 1) + n_spin;
        let mut rho = DMatrix::zeros(d, d);
        rho[(idx, idx)] = C64::new(1.0, 0.0);
        FockState { cutoff, time: 0.0, rho }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rho.nrows()).map(|i| self.rho[(i, i)].re).sum()
    }

    /// Marginal populations of the top Fock layer of each mode.
    pub fn top_layer_populations(&self) -> (f64, f64) {
        let d = self.cutoff + 1;
        let mut pa = 0.0;
        let mut ps = 0.0;
        for m in 0..d {
            pa += self.rho[(self.cutoff * d + m, self.cutoff * d + m)].re;
            ps += self.rho[(m * d + self.cutoff, m * d + self.cutoff)].re;
        }
        (pa, ps)
    }

    /// Probability of n correlated pairs, <n,n|rho|n,n>.
    pub fn pair_probability(&self, n: usize) -> f64 {
        let d = self.cutoff + 1;
        self.rho[(n * d + n, n * d + n)].re
    }

    /// Smallest eigenvalue of rho (positivity witness).
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.rho.nrows();
        // Hermitian eigenproblem through the real symmetric 2n x 2n embedding
        let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let v = self.rho[(i, j)];
                h[(i, j)] = v.re;
                h[(i + n, j + n)] = v.re;
                h[(i, j + n)] = -v.im;
                h[(i + n, j)] = v.im;
            }
        }
        h.symmetric_eigen().eigenvalues.min()
    }

    /// Quadrature means and symmetrized covariance matrix on
    /// (X_D, Y_D, X_1, Y_1).
    pub fn moments(&self) -> (Vector4<f64>, Matrix4<f64>) {
        let quads = quadrature_ops(self.cutoff);
        let mut mean = Vector4::zeros();
        for (k, q) in quads.iter().enumerate() {
            mean[k] = q.trace_with(&self.rho).re;
        }
        let n = self.rho.nrows();
        let mut work = DMatrix::zeros(n, n);
        let mut cov = Matrix4::zeros();
        for j in 0..4 {
            quads[j].apply_left(&self.rho, &mut work);
            for i in 0..4 {
                let mij = quads[i].trace_with(&work).re; // Re tr(R_i R_j rho)
                cov[(i, j)] = mij;
            }
        }
        // symmetrize and subtract means: Re tr(R_i R_j rho) already equals
        // the symmetrized moment up to the antisymmetric (imaginary) part
        let cov_sym = (cov + cov.transpose()) * 0.5;
        let mut out = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out[(i, j)] = cov_sym[(i, j)] - mean[i] * mean[j];
            }
        }
        (mean, out)
    }

    /// Fourth-order cumulants <R^4> - 3 <R^2>^2 of the mode and joint
    /// quadratures (means vanish for this dynamics). Zero for Gaussian
    /// states up to truncation error.
    pub fn fourth_cumulants(&self) -> Vec<(String, f64)> {
        let d = self.cutoff + 1;
        let quads = quadrature_ops(self.cutoff);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let joint = |i: usize, j: usize, sign: f64| {
            let mut op = SparseOp::zeros(d * d);
            op.add_scaled(&quads[i], C64::new(s, 0.0));
            op.add_scaled(&quads[j], C64::new(sign * s, 0.0));
            op.compress()
        };
        let named: Vec<(String, SparseOp)> = vec![
            ("X_D".into(), quads[0].clone()),
            ("Y_D".into(), quads[1].clone()),
            ("X_1".into(), quads[2].clone()),
            ("Y_1".into(), quads[3].clone()),
            ("X_plus".into(), joint(0, 2, 1.0)),
            ("Y_plus".into(), joint(1, 3, 1.0)),
            ("X_minus".into(), joint(0, 2, -1.0)),
            ("Y_minus".into(), joint(1, 3, -1.0)),
        ];
        let n = self.rho.nrows();
        let mut w1 = DMatrix::zeros(n, n);
        let mut w2 = DMatrix::zeros(n, n);
        named
            .into_iter()
            .map(|(name, op)| {
                op.apply_left(&self.rho, &mut w1);
                let m2 = op.trace_with(&w1).re;
                op.apply_left(&w1, &mut w2);
                op.apply_left(&w2, &mut w1);
                let m4 = op.trace_with(&w1).re;
                (name, m4 - 3.0 * m2 * m2)
            })
            .collect()
    }
}

/// Mode-basis quadrature operators (X_D, Y_D, X_1, Y_1).
fn quadrature_ops(cutoff: usize) -> [SparseOp; 4] {
    let d = (cutoff + 1) * (cutoff + 1);
    let a = SparseOp::ann_polariton(cutoff);
    let s = SparseOp::ann_spinwave(cutoff);
    let inv_sqrt2 = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let i_inv_sqrt2 = C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    let build = |op: &SparseOp, xq: bool| {
        let mut out = SparseOp::zeros(d);
        if xq {
            out.add_scaled(op, inv_sqrt2);
            out.add_scaled(&op.dagger(), inv_sqrt2);
        } else {
            // Y = i(a - a')/sqrt2
            out.add_scaled(op, i_inv_sqrt2);
            out.add_scaled(&op.dagger(), -i_inv_sqrt2);
        }
        out.compress()
    };
    [build(&a, true), build(&a, false), build(&s, true), build(&s, false)]
}

/// Hamiltonian of the gauged model: i xi (a's' - a s) + Delta_pol a'a - delta1 s's.
fn hamiltonian(m: &LinearModel, cutoff: usize) -> SparseOp {
    let d = (cutoff + 1) * (cutoff + 1);
    let a = SparseOp::ann_polariton(cutoff);
    let s = SparseOp::ann_spinwave(cutoff);
    let ad = a.dagger();
    let sd = s.dagger();
    let mut h = SparseOp::zeros(d);
    h.add_scaled(&ad.mul(&sd), C64::new(0.0, m.xi));
    h.add_scaled(&a.mul(&s), C64::new(0.0, -m.xi));
    h.add_scaled(&ad.mul(&a), C64::new(m.polariton_detuning, 0.0));
    h.add_scaled(&sd.mul(&s), C64::new(-m.spin_detuning, 0.0));
    h.compress()
}

/// Oracle trajectory with truncation-health bookkeeping.
#[derive(Debug, Clone)]
pub struct FockSeries {
    pub states: Vec<FockState>,
    /// True when any stored state put more than 1e-6 population in the top
    /// Fock layer of either mode.
    pub flagged: bool,
    pub max_top_layer: f64,
    pub max_trace_error: f64,
}

/// Integrate the master equation for the model's channel set from vacuum.
///
/// `stride` controls how many steps sit between stored states (the final
/// state is always stored). Errors when the cutoff cannot hold the expected
/// occupation sinh^2(xi t_final) with a factor-6 margin, or when the trace
/// drifts by more than 1e-6.
pub fn oracle_evolve(
    m: &LinearModel,
    t_final: f64,
    dt: f64,
    cutoff: usize,
    stride: usize,
) -> Result<FockSeries> {
    if !(t_final >= 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidParams(
            "t_final must be >= 0 and dt > 0".into(),
        ));
    }
    if cutoff < 1 {
        return Err(Error::InvalidParams("cutoff must be >= 1".into()));
    }
    let expected = (m.xi * t_final).sinh().powi(2);
    if expected > cutoff as f64 / 6.0 {
        return Err(Error::CutoffTooSmall {
            cutoff,
            expected,
            suggested: (6.0 * expected).ceil() as usize,
        });
    }
    // rough RK4 stability guard: operator norms grow with the cutoff
    let scale = (cutoff as f64 + 1.0)
        * (m.xi
            + m.polariton_detuning.abs()
            + m.spin_detuning.abs()
            + 2.0 * (m.polariton_loss + m.spin_loss + m.spin_gain + 4.0 * m.pair_noise_rate));
    if scale * dt > 1.0 {
        return Err(Error::StepSize {
            binding: "fock operator norm",
            bound: 1.0 / scale,
            dt,
        });
    }

    let h = hamiltonian(m, cutoff);
    let jumps: Vec<SparseOp> = m
        .channels()
        .iter()
        .map(|j| SparseOp::from_jump(j, cutoff))
        .collect();
    let jdj: Vec<SparseOp> = jumps.iter().map(|l| l.dagger().mul(l)).collect();

    let n = (cutoff + 1) * (cutoff + 1);
    let mut rho = FockState::vacuum(cutoff).rho;
    let mut w1 = DMatrix::zeros(n, n);
    let mut w2 = DMatrix::zeros(n, n);
    let mut k = [
        DMatrix::zeros(n, n),
        DMatrix::zeros(n, n),
        DMatrix::zeros(n, n),
        DMatrix::zeros(n, n),
    ];
    let mut stage = DMatrix::zeros(n, n);

    let mut series = FockSeries {
        states: vec![FockState { cutoff, time: 0.0, rho: rho.clone() }],
        flagged: false,
        max_top_layer: 0.0,
        max_trace_error: 0.0,
    };
    if t_final == 0.0 {
        return Ok(series);
    }

    let rhs = |r: &DMatrix<C64>, out: &mut DMatrix<C64>, w1: &mut DMatrix<C64>, w2: &mut DMatrix<C64>| {
        // -i (H r - r H)
        h.apply_left(r, w1);
        h.apply_right_dagger(r, w2);
        out.fill(C64::new(0.0, 0.0));
        let minus_i = C64::new(0.0, -1.0);
        out.zip_zip_apply(w1, w2, |o, x, y| *o = minus_i * (x - y));
        for (l, ldl) in jumps.iter().zip(jdj.iter()) {
            l.apply_left(r, w1);
            l.apply_right_dagger(w1, w2);
            *out += &*w2;
            ldl.apply_left(r, w1);
            ldl.apply_right_dagger(r, w2);
            out.zip_zip_apply(w1, w2, |o, x, y| *o -= 0.5 * (x + y));
        }
    };

    let n_steps = (t_final / dt - 1e-12).ceil().max(1.0) as usize;
    let mut t = 0.0;
    for step in 0..n_steps {
        let hstep = if step + 1 == n_steps { t_final - t } else { dt };
        rhs(&rho, &mut k[0], &mut w1, &mut w2);
        stage.copy_from(&rho);
        stage.zip_apply(&k[0], |s, kv| *s += kv * (0.5 * hstep));
        rhs(&stage, &mut k[1], &mut w1, &mut w2);
        stage.copy_from(&rho);
        stage.zip_apply(&k[1], |s, kv| *s += kv * (0.5 * hstep));
        rhs(&stage, &mut k[2], &mut w1, &mut w2);
        stage.copy_from(&rho);
        stage.zip_apply(&k[2], |s, kv| *s += kv * hstep);
        rhs(&stage, &mut k[3], &mut w1, &mut w2);
        let (k1, rest) = k.split_at_mut(1);
        let (k2, rest) = rest.split_at_mut(1);
        let (k3, k4) = rest.split_at_mut(1);
        let w = hstep / 6.0;
        for idx in 0..rho.len() {
            rho[idx] += w
                * (k1[0][idx] + 2.0 * k2[0][idx] + 2.0 * k3[0][idx] + k4[0][idx]);
        }
        // keep rho Hermitian against roundoff
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (rho[(i, j)] + rho[(j, i)].conj());
                rho[(i, j)] = avg;
                rho[(j, i)] = avg.conj();
            }
            rho[(i, i)] = C64::new(rho[(i, i)].re, 0.0);
        }
        t += hstep;

        let st = FockState { cutoff, time: t, rho: rho.clone() };
        let tr_err = (st.trace() - 1.0).abs();
        series.max_trace_error = series.max_trace_error.max(tr_err);
        if tr_err > 1e-6 {
            return Err(Error::TraceDrift { drift: tr_err });
        }
        let (pa, ps) = st.top_layer_populations();
        series.max_top_layer = series.max_top_layer.max(pa.max(ps));
        if pa.max(ps) >= 1e-6 {
            series.flagged = true;
        }
        if step % stride.max(1) == stride.max(1) - 1 || step + 1 == n_steps {
            series.states.push(st);
        }
    }
    Ok(series)
}

/// One engine-vs-oracle moment comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentRow {
    pub name: String,
    pub engine: f64,
    pub oracle: f64,
    pub abs_dev: f64,
    pub rel_dev: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CumulantRow {
    pub name: String,
    pub value: f64,
    pub pass: bool,
}

/// Full cross-validation report, serializable to JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub t_final: f64,
    pub cutoff: usize,
    pub moments: Vec<MomentRow>,
    pub fourth_cumulants: Vec<CumulantRow>,
    pub truncation_flagged: bool,
    pub max_top_layer: f64,
    pub max_trace_error: f64,
    pub moments_pass: bool,
    pub cumulants_pass: bool,
    pub overall_pass: bool,
}

/// Tolerance for each moment: max(1e-4, 1e-3 |engine value|).
pub const MOMENT_ABS_TOL: f64 = 1e-4;
pub const MOMENT_REL_TOL: f64 = 1e-3;
/// Bound demanded of the oracle's fourth-order cumulants.
pub const CUMULANT_TOL: f64 = 1e-4;

/// Evolve both representations of `m` to `t_final` and compare all 14
/// independent first/second moments plus the Gaussianity cumulants.
pub fn compare_engine_oracle(
    m: &LinearModel,
    t_final: f64,
    dt_engine: f64,
    dt_oracle: f64,
    cutoff: usize,
) -> Result<ComparisonReport> {
    let engine_states = evolve(m, t_final, dt_engine)?;
    let engine_final = engine_states.last().unwrap();
    let series = oracle_evolve(m, t_final, dt_oracle, cutoff, usize::MAX)?;
    let oracle_final = series.states.last().unwrap();
    Ok(build_report(m, engine_final, oracle_final, &series, cutoff))
}

fn build_report(
    _m: &LinearModel,
    engine_final: &GaussianState,
    oracle_final: &FockState,
    series: &FockSeries,
    cutoff: usize,
) -> ComparisonReport {
    let eng_mean = engine_final.mean();
    let eng_cov = engine_final.cov();
    let (orc_mean, orc_cov) = oracle_final.moments();
    let quad_names = ["X_D", "Y_D", "X_1", "Y_1"];
    let mut moments = Vec::new();
    let mut row = |name: String, e: f64, o: f64| {
        let abs_dev = (e - o).abs();
        let tolerance = MOMENT_ABS_TOL.max(MOMENT_REL_TOL * e.abs());
        moments.push(MomentRow {
            name,
            engine: e,
            oracle: o,
            abs_dev,
            rel_dev: if e != 0.0 { abs_dev / e.abs() } else { abs_dev },
            tolerance,
            pass: abs_dev <= tolerance,
        });
    };
    for i in 0..4 {
        row(format!("mean({})", quad_names[i]), eng_mean[i], orc_mean[i]);
    }
    for i in 0..4 {
        for j in i..4 {
            row(
                format!("cov({},{})", quad_names[i], quad_names[j]),
                eng_cov[(i, j)],
                orc_cov[(i, j)],
            );
        }
    }
    let fourth_cumulants: Vec<CumulantRow> = oracle_final
        .fourth_cumulants()
        .into_iter()
        .map(|(name, value)| CumulantRow {
            name,
            value,
            pass: value.abs() < CUMULANT_TOL,
        })
        .collect();
    let moments_pass = moments.iter().all(|r| r.pass);
    let cumulants_pass = fourth_cumulants.iter().all(|c| c.pass);
    ComparisonReport {
        t_final: oracle_final.time,
        cutoff,
        moments,
        fourth_cumulants,
        truncation_flagged: series.flagged,
        max_top_layer: series.max_top_layer,
        max_trace_error: series.max_trace_error,
        moments_pass,
        cumulants_pass,
        overall_pass: moments_pass && cumulants_pass && !series.flagged,
    }
}

/// Negative-control comparison: engine diffusion deliberately scaled.
/// A scale of 1.5 must make the comparison fail on named moments.
pub fn compare_with_corrupted_diffusion(
    m: &LinearModel,
    t_final: f64,
    dt_engine: f64,
    dt_oracle: f64,
    cutoff: usize,
    scale: f64,
) -> Result<ComparisonReport> {
    let corrupted = m.clone().with_diffusion_scale(scale);
    let engine_states = evolve(&corrupted, t_final, dt_engine)?;
    let engine_final = engine_states.last().unwrap();
    let series = oracle_evolve(m, t_final, dt_oracle, cutoff, usize::MAX)?;
    let oracle_final = series.states.last().unwrap();
    Ok(build_report(m, engine_final, oracle_final, &series, cutoff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{minimal_variance, variances};
    use crate::ideal;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn vacuum_is_fixed_point_of_pure_loss() {
        let m = LinearModel::from_rates(0.0, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let series = oracle_evolve(&m, 5.0, 0.02, 3, 50).unwrap();
        let last = series.states.last().unwrap();
        assert_relative_eq!(last.trace(), 1.0, max_relative = 1e-10);
        assert_abs_diff_eq!(last.pair_probability(0), 1.0, epsilon = 1e-10);
        let (mean, cov) = last.moments();
        assert!(mean.amax() < 1e-12);
        assert!((cov - Matrix4::identity() * 0.5).amax() < 1e-10);
    }

    #[test]
    fn lossless_pair_distribution_matches_closed_form() {
        let xi = 0.8;
        let m = LinearModel::from_rates(xi, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let series = oracle_evolve(&m, 0.5 / xi, 5e-4 / xi, 12, usize::MAX).unwrap();
        let last = series.states.last().unwrap();
        let ideal_state =
            ideal::state_coefficients(0.5, ideal::auto_n_max(0.5)).unwrap();
        let p = ideal_state.pair_distribution();
        for n in 0..=6 {
            assert_abs_diff_eq!(last.pair_probability(n), p[n], epsilon = 1e-6);
        }
        assert!(!series.flagged);
    }

    #[test]
    fn lossless_moments_match_ideal_variances() {
        let xi = 0.8;
        let m = LinearModel::from_rates(xi, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let series = oracle_evolve(&m, 0.5 / xi, 5e-4 / xi, 12, usize::MAX).unwrap();
        let (_, cov) = series.states.last().unwrap().moments();
        let (vy, vx) = ideal::ideal_variances(0.5);
        // joint quadrature variances from the mode-basis covariance
        let var_yplus = 0.5 * (cov[(1, 1)] + cov[(3, 3)]) + cov[(1, 3)];
        let var_xplus = 0.5 * (cov[(0, 0)] + cov[(2, 2)]) + cov[(0, 2)];
        assert_abs_diff_eq!(var_yplus, vy, epsilon = 1e-6);
        assert_abs_diff_eq!(var_xplus, vx, epsilon = 1e-5);
    }

    #[test]
    fn injected_fock_state_has_known_variance() {
        let st = FockState::number_state(6, 1, 0);
        let (mean, cov) = st.moments();
        assert!(mean.amax() < 1e-14);
        assert_abs_diff_eq!(cov[(0, 0)], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(cov[(1, 1)], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(cov[(2, 2)], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(cov[(3, 3)], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn truncation_guard_rejects_small_cutoff() {
        let m = LinearModel::from_rates(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            oracle_evolve(&m, 2.0, 1e-3, 2, 1),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn engine_and_oracle_agree_at_moderate_losses() {
        // gamma_L/xi = 0.05, kappa/(eta xi) = 0.02 scaled down to xi t = 0.5
        // where a cutoff of 10 holds the tail comfortably.
        let xi = 1.0;
        let m = LinearModel::from_rates(
            xi,
            0.07,
            0.0,
            0.05,
            0.05,
            0.0,
            (0.05 + 0.02) / 8.0,
        )
        .unwrap();
        let report = compare_engine_oracle(&m, 0.5, 1e-4, 2e-4, 12).unwrap();
        assert!(report.moments_pass, "{:#?}", report.moments);
        assert!(!report.truncation_flagged);
        assert!(report.max_trace_error < 1e-8);
        for c in &report.fourth_cumulants {
            assert!(c.value.abs() < 1e-4, "{}: {}", c.name, c.value);
        }
    }

    #[test]
    fn corrupted_diffusion_is_detected() {
        let xi = 1.0;
        let m = LinearModel::from_rates(xi, 0.07, 0.0, 0.05, 0.05, 0.0, 0.00875).unwrap();
        let report =
            compare_with_corrupted_diffusion(&m, 0.5, 1e-4, 5e-4, 10, 1.5).unwrap();
        assert!(!report.moments_pass);
        let failing: Vec<&str> = report
            .moments
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.name.as_str())
            .collect();
        assert!(!failing.is_empty());
    }

    #[test]
    fn positivity_and_trace_along_lossy_run() {
        let m = LinearModel::from_rates(0.6, 0.05, 0.01, 0.03, 0.03, -0.02, 0.008).unwrap();
        let series = oracle_evolve(&m, 1.0, 1e-3, 8, 200).unwrap();
        for st in &series.states {
            assert!(st.min_eigenvalue() >= -1e-8);
            assert!((st.trace() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn oracle_matches_engine_minimal_variance_shape() {
        let xi = 1.0;
        let m = LinearModel::from_rates(xi, 0.05, 0.0, 0.04, 0.04, 0.0, 0.01).unwrap();
        let series = oracle_evolve(&m, 0.6, 5e-4, 10, usize::MAX).unwrap();
        let (mean, cov) = series.states.last().unwrap().moments();
        let gs = GaussianState::from_mode_cov(0.6, mean, cov);
        let eng = evolve(&m, 0.6, 1e-4).unwrap();
        let ve = variances(eng.last().unwrap());
        let vo = variances(&gs);
        assert_abs_diff_eq!(ve.y_plus, vo.y_plus, epsilon = 5e-5);
        assert_abs_diff_eq!(
            minimal_variance(eng.last().unwrap()),
            minimal_variance(&gs),
            epsilon = 5e-5
        );
    }
}
