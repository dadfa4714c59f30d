//! Multi-antenna sniffer: uniform linear array snapshot synthesis,
//! subspace bearing estimation via polynomial rooting, and the
//! single-shot move to range R along bearing theta.
//!
//! Bearings use the broadside convention: 0 degrees is perpendicular to
//! the array line, positive toward the +axis direction, valid in
//! (-90, 90). A linear array cannot tell front from back, so the final
//! move probes both mirror hypotheses and keeps the higher-SNR one.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::channel::{snr_at, snr_to_distance, Position2D, Scenario};
use crate::localize::{
    refine_into, LocalizationTrace, LocalizeError, SweepParams, TraceBuilder, UplinkChannel,
    MeasurementMode,
};
use crate::mcs::Modulation;
use crate::signal::Constellation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DoaError {
    #[error("bearing estimation failed: {0}")]
    EstimationFailed(String),
    #[error("invalid array config: {0}")]
    InvalidConfig(String),
}

/// Uniform linear array at the sniffer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UlaConfig {
    pub num_elements: usize,
    /// Element spacing in meters; `None` means half the carrier wavelength.
    pub element_spacing_m: Option<f64>,
    pub num_snapshots: usize,
}

impl Default for UlaConfig {
    fn default() -> Self {
        UlaConfig {
            num_elements: 10,
            element_spacing_m: None,
            num_snapshots: 128,
        }
    }
}

impl UlaConfig {
    pub fn spacing_m(&self, scenario: &Scenario) -> f64 {
        self.element_spacing_m
            .unwrap_or(scenario.wavelength_m() / 2.0)
    }

    pub fn validate(&self, scenario: &Scenario) -> Result<(), DoaError> {
        if self.num_elements < 2 {
            return Err(DoaError::InvalidConfig(
                "need at least 2 array elements".into(),
            ));
        }
        if self.num_snapshots < self.num_elements {
            return Err(DoaError::InvalidConfig(format!(
                "need at least as many snapshots ({}) as elements ({})",
                self.num_snapshots, self.num_elements
            )));
        }
        let d = self.spacing_m(scenario);
        let half_lambda = scenario.wavelength_m() / 2.0;
        if !(d > 0.0 && d <= half_lambda * (1.0 + 1e-9)) {
            return Err(DoaError::InvalidConfig(format!(
                "element spacing {d} m must be in (0, lambda/2 = {half_lambda} m]"
            )));
        }
        Ok(())
    }
}

/// Output of the multi-antenna single-shot move.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoaEstimate {
    /// Broadside bearing estimate in degrees.
    pub theta_deg: f64,
    /// Coarse range estimate in meters.
    pub range_m: f64,
    /// Chosen target position (after front/back disambiguation).
    pub target: Position2D,
    /// A mirror hypothesis existed and was resolved by probing.
    pub ambiguous: bool,
}

/// Synthesizes array snapshots x_k = a(theta) s_k + n_k with steering
/// a(theta)_m = exp(j 2 pi (d / lambda) m sin theta), unit-power random
/// QPSK symbols, and per-element AWGN at `snr_db` (+inf for noiseless).
/// Rows are elements, columns are snapshots.
pub fn ula_snapshots<R: Rng>(
    bearing_deg: f64,
    snr_db: f64,
    config: &UlaConfig,
    scenario: &Scenario,
    rng: &mut R,
) -> DMatrix<Complex64> {
    let m = config.num_elements;
    let k = config.num_snapshots;
    let phase_step = 2.0 * std::f64::consts::PI * config.spacing_m(scenario)
        / scenario.wavelength_m()
        * bearing_deg.to_radians().sin();
    let steering: Vec<Complex64> = (0..m)
        .map(|i| Complex64::from_polar(1.0, phase_step * i as f64))
        .collect();
    let constellation = Constellation::for_modulation(Modulation::Qpsk);
    let sigma = if snr_db == f64::INFINITY {
        0.0
    } else {
        (10f64.powf(-snr_db / 10.0) / 2.0).sqrt()
    };
    let mut x = DMatrix::<Complex64>::zeros(m, k);
    for col in 0..k {
        let s = constellation.points[rng.random_range(0..constellation.points.len())];
        for row in 0..m {
            let noise = if sigma > 0.0 {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(sigma * re, sigma * im)
            } else {
                Complex64::new(0.0, 0.0)
            };
            x[(row, col)] = steering[row] * s + noise;
        }
    }
    x
}

/// Sample covariance X X^H / K.
fn sample_covariance(snapshots: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let k = snapshots.ncols() as f64;
    (snapshots * snapshots.adjoint()) / Complex64::new(k, 0.0)
}

/// Subspace bearing estimate: eigendecompose the sample covariance, build
/// the noise-subspace polynomial from the diagonal sums of En En^H, root
/// it via the companion matrix, pick the root closest to the unit circle,
/// and polish the angle on the null spectrum. Returns degrees.
pub fn root_music(
    snapshots: &DMatrix<Complex64>,
    num_sources: usize,
    config: &UlaConfig,
    scenario: &Scenario,
) -> Result<f64, DoaError> {
    let m = snapshots.nrows();
    if m < 2 || snapshots.ncols() < 1 {
        return Err(DoaError::EstimationFailed("snapshot matrix too small".into()));
    }
    if num_sources == 0 || num_sources >= m {
        return Err(DoaError::EstimationFailed(format!(
            "num_sources {num_sources} must be in 1..{m}"
        )));
    }
    let r = sample_covariance(snapshots);
    if r.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(DoaError::EstimationFailed("covariance not finite".into()));
    }
    let eig = nalgebra::SymmetricEigen::new(r);
    // Ascending eigenvalue order; the smallest m - num_sources span the
    // noise subspace.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let noise_dim = m - num_sources;
    let mut en = DMatrix::<Complex64>::zeros(m, noise_dim);
    for (j, &idx) in order[..noise_dim].iter().enumerate() {
        en.set_column(j, &eig.eigenvectors.column(idx));
    }
    let c = &en * en.adjoint();

    // Diagonal sums: coefficient of z^l is the l-th superdiagonal sum.
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * m - 1];
    for l in 0..m {
        let mut sum = Complex64::new(0.0, 0.0);
        for row in 0..m - l {
            sum += c[(row, row + l)];
        }
        coeffs[(m - 1) + l] = sum;
        if l > 0 {
            coeffs[(m - 1) - l] = sum.conj();
        }
    }
    let roots = polynomial_roots(&coeffs)?;
    let unit_dist = |z: &Complex64| (z.norm() - 1.0).abs();
    let root = roots
        .iter()
        .filter(|z| z.norm() > 1e-9)
        .min_by(|a, b| unit_dist(a).total_cmp(&unit_dist(b)))
        .copied()
        .ok_or_else(|| DoaError::EstimationFailed("no usable polynomial root".into()))?;

    let phi = polish_null_spectrum(root.arg(), &coeffs, m);
    let scale = 2.0 * std::f64::consts::PI * config.spacing_m(scenario) / scenario.wavelength_m();
    let sin_theta = phi / scale;
    if !sin_theta.is_finite() || sin_theta.abs() > 1.0 + 1e-6 {
        return Err(DoaError::EstimationFailed(format!(
            "root phase maps outside the visible region (sin = {sin_theta})"
        )));
    }
    Ok(sin_theta.clamp(-1.0, 1.0).asin().to_degrees())
}

/// Roots of sum_k coeffs[k] z^k via companion-matrix eigenvalues.
fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>, DoaError> {
    let max_mag = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max_mag == 0.0 || !max_mag.is_finite() {
        return Err(DoaError::EstimationFailed("degenerate polynomial".into()));
    }
    let tiny = max_mag * 1e-14;
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|v| v.norm() < tiny) {
        c.pop();
    }
    // A root at the origin for each trimmed low-order coefficient; those
    // carry no bearing information, so just drop them.
    let skip = c.iter().take_while(|v| v.norm() < tiny).count();
    let c = &c[skip..];
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Err(DoaError::EstimationFailed("constant polynomial".into()));
    }
    let lead = c[n];
    let mut comp = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        comp[(i, n - 1)] = -c[i] / lead;
        if i + 1 < n {
            comp[(i + 1, i)] = Complex64::new(1.0, 0.0);
        }
    }
    let schur = comp
        .try_schur(1e-13, 10_000)
        .ok_or_else(|| DoaError::EstimationFailed("companion Schur did not converge".into()))?;
    let t = schur.unpack().1;
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Newton steps on the real null spectrum q(phi) = sum_l c_l e^{j l phi};
/// tightens the rooted angle to the local spectrum minimum (a conjugate
/// root pair merging on the unit circle is a double root, which limits
/// the raw root accuracy to roughly sqrt(eps)).
fn polish_null_spectrum(phi0: f64, coeffs: &[Complex64], m: usize) -> f64 {
    let derivs = |phi: f64| {
        let mut q1 = 0.0;
        let mut q2 = 0.0;
        for l in 1..m {
            let cl = coeffs[(m - 1) + l];
            let e = Complex64::from_polar(1.0, l as f64 * phi);
            q1 += -2.0 * l as f64 * (cl * e).im;
            q2 += -2.0 * (l * l) as f64 * (cl * e).re;
        }
        (q1, q2)
    };
    let max_step = std::f64::consts::PI / (2.0 * m as f64);
    let mut phi = phi0;
    for _ in 0..12 {
        let (q1, q2) = derivs(phi);
        if q2 <= 0.0 {
            break;
        }
        let step = q1 / q2;
        if !step.is_finite() || step.abs() > max_step {
            break;
        }
        phi -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    phi
}

/// Multi-antenna uplink localization: at the initial estimate, range the
/// user from one SNR measurement, estimate the bearing from array
/// snapshots, and move R along it in a single shot. The front/back mirror
/// is resolved by probing both candidates; a failed bearing estimate
/// falls back to the single-antenna refinement.
pub fn localize_with_ula(
    initial_estimate: Position2D,
    bob_position: Position2D,
    scenario: &Scenario,
    sweep_params: &SweepParams,
    ula: &UlaConfig,
    rng: &mut ChaCha8Rng,
) -> Result<LocalizationTrace, LocalizeError> {
    sweep_params.validate()?;
    ula.validate(scenario)
        .map_err(|e| LocalizeError::InvalidParams(e.to_string()))?;
    let ch_seed = rng.next_u64();
    let snap_seed = rng.next_u64();
    let mut ch = UplinkChannel::new(scenario, bob_position, sweep_params, ch_seed);
    let mut snap_rng = ChaCha8Rng::seed_from_u64(snap_seed);
    let mut tb = TraceBuilder::new();
    tb.set_initial(initial_estimate);
    localize_with_ula_into(initial_estimate, &mut ch, sweep_params, ula, &mut snap_rng, &mut tb)?;
    Ok(tb.finish())
}

/// Internal variant used by the harness to stitch the initial sweep and
/// the array step into one trace, sharing the measurement channel.
pub(crate) fn localize_with_ula_into(
    initial: Position2D,
    ch: &mut UplinkChannel,
    sweep_params: &SweepParams,
    ula: &UlaConfig,
    snap_rng: &mut ChaCha8Rng,
    tb: &mut TraceBuilder,
) -> Result<(), LocalizeError> {
    // Coarse ranging at the initial estimate.
    let snr0 = ch.measure(initial);
    tb.push_measurement(initial, snr0);
    if !snr0.is_finite() {
        tb.set_final(initial);
        return Ok(());
    }
    let range = snr_to_distance(snr0, ch.tx_power_w(), ch.scenario())?;
    tb.push_range(range.meters);
    let r = range.meters;

    // Array frame: boresight toward the base station at the origin.
    let boresight = {
        let norm = initial.norm();
        if norm < 1e-12 {
            Position2D::new(1.0, 0.0)
        } else {
            Position2D::new(-initial.x / norm, -initial.y / norm)
        }
    };
    let axis = Position2D::new(boresight.y, -boresight.x);

    // Ground truth enters only through snapshot synthesis, mirroring what
    // the array would physically receive.
    let bob = ch.target();
    let v = Position2D::new(bob.x - initial.x, bob.y - initial.y);
    let dist = v.norm().max(1e-12);
    let sin_psi = (v.x * axis.x + v.y * axis.y) / dist;
    let effective_bearing_deg = sin_psi.clamp(-1.0, 1.0).asin().to_degrees();
    let snap_snr_db = match sweep_params.mode {
        MeasurementMode::Oracle => f64::INFINITY,
        MeasurementMode::Estimated => snr_at(
            ch.tx_power_w(),
            dist.max(ch.scenario().reference_distance_m),
            ch.scenario(),
        )?,
    };
    let snapshots = ula_snapshots(effective_bearing_deg, snap_snr_db, ula, ch.scenario(), snap_rng);

    let theta_deg = match root_music(&snapshots, 1, ula, ch.scenario()) {
        Ok(t) => t,
        Err(_) => {
            // Bearing estimation failed: single-antenna refinement.
            return refine_into(initial, ch, sweep_params, tb);
        }
    };

    let (sin_t, cos_t) = {
        let t = theta_deg.to_radians();
        (t.sin(), t.cos())
    };
    let front = Position2D::new(
        initial.x + r * (cos_t * boresight.x + sin_t * axis.x),
        initial.y + r * (cos_t * boresight.y + sin_t * axis.y),
    );
    let mirror = Position2D::new(
        initial.x + r * (-cos_t * boresight.x + sin_t * axis.x),
        initial.y + r * (-cos_t * boresight.y + sin_t * axis.y),
    );

    // The array cannot tell front from back: probe both hypotheses.
    let ambiguous = front.distance_to(mirror) > 1e-9;
    let snr_front = ch.measure(front);
    tb.push_measurement(front, snr_front);
    let target = if ambiguous {
        let snr_mirror = ch.measure(mirror);
        tb.push_measurement(mirror, snr_mirror);
        if snr_mirror > snr_front {
            mirror
        } else {
            front
        }
    } else {
        front
    };
    tb.set_doa(DoaEstimate {
        theta_deg,
        range_m: r,
        target,
        ambiguous,
    });
    tb.set_final(target);
    Ok(())
}
