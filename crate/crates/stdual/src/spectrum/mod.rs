//! Action spectra `rho(S)`: finite Fourier sums of traces over the spin `j`.

pub mod cache;
pub mod peaks;

pub use cache::{TraceCache, TraceEntry, TraceKey};
pub use peaks::{assign_peaks, Peak, PeakAssignment, PeakSet, DIRICHLET_FWHM};

use crate::error::{Error, Result};
use crate::fit::{power_law_fit, PowerLawFit};
use crate::linalg::C64;
use crate::scalar::Real;
use crate::spin::dual::largest_dual_eigenpairs;
use crate::spin::orbits::PeriodicOrbit;
use crate::SpinChainParams;
use num_complex::Complex;

pub const DEFAULT_GRID: usize = 4096;

/// Marginal distance below which semiclassical heights are flagged.
pub const NEAR_MARGINAL: f64 = 0.05;

/// `(1/j_cut) sum_{j=1}^{j_cut} e^{-i(j+1/2)s} traces[j-1]`.
pub fn fourier_sum<T: Real>(traces: &[Complex<T>], s: T) -> Complex<T> {
    if traces.is_empty() {
        return Complex::new(T::zero(), T::zero());
    }
    let half = T::lit(0.5);
    let mut acc = Complex::new(T::zero(), T::zero());
    for (k, &tr) in traces.iter().enumerate() {
        let kappa = T::from_usize(k + 1).unwrap() + half;
        acc = acc + Complex::from_polar(T::one(), -kappa * s) * tr;
    }
    acc / T::from_usize(traces.len()).unwrap()
}

/// `rho(S)` on a uniform grid over `[0, 2 pi)` with the traces it was built from.
#[derive(Debug, Clone)]
pub struct ActionSpectrum {
    pub s_grid: Vec<f64>,
    pub rho: Vec<C64>,
    pub j_cut: usize,
    pub params: Option<SpinChainParams>,
    /// `traces[j-1]` for `j = 1..=j_cut`.
    pub traces: Vec<C64>,
    pub warnings: Vec<String>,
}

impl ActionSpectrum {
    pub fn from_traces(traces: Vec<C64>, grid_size: usize, params: Option<SpinChainParams>) -> Result<Self> {
        if traces.is_empty() {
            return Err(Error::InvalidParameter("j_cut must be >= 1".into()));
        }
        if grid_size < 3 {
            return Err(Error::InvalidParameter("grid needs at least 3 points".into()));
        }
        let h = std::f64::consts::TAU / grid_size as f64;
        let s_grid: Vec<f64> = (0..grid_size).map(|k| k as f64 * h).collect();
        let rho = s_grid.iter().map(|&s| fourier_sum(&traces, s)).collect();
        Ok(Self { s_grid, rho, j_cut: traces.len(), params, traces, warnings: Vec::new() })
    }

    pub fn eval(&self, s: f64) -> C64 {
        fourier_sum(&self.traces, s)
    }

    pub fn abs(&self) -> Vec<f64> {
        self.rho.iter().map(|z| z.norm()).collect()
    }

    pub fn grid_step(&self) -> f64 {
        std::f64::consts::TAU / self.s_grid.len() as f64
    }

    pub fn peaks(&self) -> PeakSet {
        peaks::detect(self)
    }

    /// Largest `|rho|` within `half_width` of `s_target`.
    pub fn peak_near(&self, s_target: f64, half_width: f64) -> Peak {
        peaks::local_max(self, s_target, half_width)
    }

    /// Spectrum of the first `j_cut` traces.
    pub fn truncated(&self, j_cut: usize, grid_size: usize) -> Result<Self> {
        if j_cut == 0 || j_cut > self.j_cut {
            return Err(Error::InvalidParameter(format!("j_cut {j_cut} outside 1..={}", self.j_cut)));
        }
        Self::from_traces(self.traces[..j_cut].to_vec(), grid_size, self.params)
    }
}

/// Parameters with the requested chain length and period; `two_j` is set per trace.
fn chain(params: &SpinChainParams, t: usize, n: usize, j_cut: usize) -> SpinChainParams {
    let mut p = params.with_t(t).with_n(n);
    p.j_cut = j_cut;
    p
}

/// `rho(S)` from `Tr U^T` for `j = 1..=j_cut`.
pub fn action_spectrum(params: &SpinChainParams, t: usize, n: usize, j_cut: usize, grid_size: usize, cache: &mut TraceCache) -> Result<ActionSpectrum> {
    let p = chain(params, t, n, j_cut);
    let js: Vec<usize> = (1..=j_cut).collect();
    let traces = cache.series(&p, &js)?;
    ActionSpectrum::from_traces(traces, grid_size, Some(p))
}

/// One semiclassical contribution `amplitude e^{i(j+1/2) action}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitTerm {
    pub action: f64,
    pub amplitude: f64,
    pub marginal_distance: f64,
}

/// `|D|` times the number of shifted copies for each orbit.
pub fn orbit_terms(orbits: &[PeriodicOrbit]) -> Vec<OrbitTerm> {
    orbits
        .iter()
        .map(|o| OrbitTerm {
            action: o.action,
            amplitude: o.family_size() as f64 * o.t_p as f64 / o.det_m_minus_1.abs().sqrt(),
            marginal_distance: o.marginal_distance(),
        })
        .collect()
}

/// Traces `sum_gamma |D_gamma| e^{i(j+1/2) S_gamma}` for `j = 1..=j_cut`.
pub fn semiclassical_traces(terms: &[OrbitTerm], j_cut: usize) -> Vec<C64> {
    (1..=j_cut)
        .map(|j| {
            let kappa = j as f64 + 0.5;
            terms.iter().map(|g| C64::from_polar(g.amplitude, kappa * g.action)).sum()
        })
        .collect()
}

/// Semiclassical `rho(S)`; phase indices are not modelled, so only `|rho|` is meaningful.
pub fn semiclassical_spectrum(terms: &[OrbitTerm], j_cut: usize, grid_size: usize) -> Result<ActionSpectrum> {
    let mut spec = ActionSpectrum::from_traces(semiclassical_traces(terms, j_cut), grid_size, None)?;
    for g in terms.iter().filter(|g| g.marginal_distance < NEAR_MARGINAL) {
        spec.warnings.push(format!(
            "orbit at S = {:.6} has a monodromy eigenvalue {:.3e} from one; its height is unreliable",
            g.action, g.marginal_distance
        ));
    }
    Ok(spec)
}

/// Peak height against `j_cut` with its power-law exponent.
#[derive(Debug, Clone)]
pub struct PeakScaling {
    pub j_cuts: Vec<usize>,
    pub positions: Vec<f64>,
    pub heights: Vec<f64>,
    pub fit: PowerLawFit<f64>,
}

/// Fits `|rho(S_target)| ~ j_cut^alpha`, the peak being followed within `pi/j_cut` of `s_target`.
pub fn scaling_from_traces(traces: &[C64], s_target: f64, j_cut_list: &[usize]) -> Result<PeakScaling> {
    if j_cut_list.len() < 4 {
        return Err(Error::DegenerateFit(format!("{} cut-offs, need at least 4", j_cut_list.len())));
    }
    let mut positions = Vec::with_capacity(j_cut_list.len());
    let mut heights = Vec::with_capacity(j_cut_list.len());
    for &jc in j_cut_list {
        if jc == 0 || jc > traces.len() {
            return Err(Error::DegenerateFit(format!("cut-off {jc} outside the available traces")));
        }
        let spec = ActionSpectrum { s_grid: Vec::new(), rho: Vec::new(), j_cut: jc, params: None, traces: traces[..jc].to_vec(), warnings: Vec::new() };
        let pk = spec.peak_near(s_target, std::f64::consts::PI / jc as f64);
        positions.push(pk.s);
        heights.push(pk.height);
    }
    let x: Vec<f64> = j_cut_list.iter().map(|&j| j as f64).collect();
    let fit = power_law_fit(&x, &heights)?;
    Ok(PeakScaling { j_cuts: j_cut_list.to_vec(), positions, heights, fit })
}

pub fn peak_scaling_fit(params: &SpinChainParams, t: usize, n: usize, s_target: f64, j_cut_list: &[usize], cache: &mut TraceCache) -> Result<PeakScaling> {
    let j_max = j_cut_list.iter().copied().max().unwrap_or(0);
    if j_max == 0 {
        return Err(Error::DegenerateFit("empty cut-off list".into()));
    }
    let p = chain(params, t, n, j_max);
    let js: Vec<usize> = (1..=j_max).collect();
    let traces = cache.series(&p, &js)?;
    scaling_from_traces(&traces, s_target, j_cut_list)
}

/// `Delta(j) = arg Tr U^T - (j+1/2) S_max mod 2 pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSeries {
    pub j: Vec<usize>,
    /// Values in `[0, 2 pi)`.
    pub delta: Vec<f64>,
    /// `j` values whose trace vanished.
    pub skipped: Vec<usize>,
    pub n: usize,
}

impl DeltaSeries {
    /// Circular standard deviation `sqrt(-2 ln R)` of `Delta` divided by `N`.
    pub fn spread_per_site(&self) -> f64 {
        if self.delta.is_empty() {
            return f64::NAN;
        }
        let m: C64 = self.delta.iter().map(|&d| C64::from_polar(1.0, d)).sum::<C64>() / self.delta.len() as f64;
        (-2.0 * m.norm().clamp(f64::MIN_POSITIVE, 1.0).ln()).sqrt() / self.n as f64
    }
}

pub fn delta_from_traces(j_list: &[usize], traces: &[C64], s_max: f64, n: usize) -> DeltaSeries {
    let mut out = DeltaSeries { j: Vec::new(), delta: Vec::new(), skipped: Vec::new(), n };
    for (&j, tr) in j_list.iter().zip(traces) {
        if tr.norm() < 1e-14 {
            out.skipped.push(j);
            continue;
        }
        out.j.push(j);
        out.delta.push((tr.arg() - (j as f64 + 0.5) * s_max).modulo(std::f64::consts::TAU));
    }
    out
}

pub fn phase_domination(params: &SpinChainParams, t: usize, n: usize, s_max: f64, j_list: &[usize], cache: &mut TraceCache) -> Result<DeltaSeries> {
    let p = chain(params, t, n, params.j_cut);
    let traces = cache.series(&p, j_list)?;
    Ok(delta_from_traces(j_list, &traces, s_max, n))
}

/// Exact spectrum next to the one built from the `nev` largest dual eigenvalues.
#[derive(Debug, Clone)]
pub struct EigenvalueApproximation {
    pub exact: ActionSpectrum,
    pub approx: ActionSpectrum,
    /// `max_S ||rho_exact| - |rho_approx||` over the grid.
    pub max_deviation: f64,
}

/// `Tr W^N ~ sum_{l < nev} lambda_l^N` for every `j`.
pub fn largest_eigenvalue_spectrum(
    params: &SpinChainParams,
    t: usize,
    n: usize,
    j_cut: usize,
    grid_size: usize,
    nev: usize,
    cache: &mut TraceCache,
) -> Result<EigenvalueApproximation> {
    let exact = action_spectrum(params, t, n, j_cut, grid_size, cache)?;
    let p = chain(params, t, n, j_cut);
    let mut traces = Vec::with_capacity(j_cut);
    for j in 1..=j_cut {
        let (vals, _) = largest_dual_eigenpairs(&p.with_two_j(2 * j as u32), nev.max(1), cache.cap())?;
        traces.push(vals.iter().map(|l| l.powu(n as u32)).sum());
    }
    let approx = ActionSpectrum::from_traces(traces, grid_size, Some(p))?;
    let max_deviation = exact.rho.iter().zip(&approx.rho).map(|(a, b)| (a.norm() - b.norm()).abs()).fold(0.0, f64::max);
    Ok(EigenvalueApproximation { exact, approx, max_deviation })
}
