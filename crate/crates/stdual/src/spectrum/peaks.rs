//! Peak detection on `|rho(S)|`.

use super::ActionSpectrum;
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Peak {
    /// Position in `[0, 2 pi)`.
    pub s: f64,
    pub height: f64,
    /// Full width at half maximum.
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PeakSet {
    /// Sorted by decreasing height.
    pub peaks: Vec<Peak>,
    /// Median of `|rho|` over the grid.
    pub noise_floor: f64,
}

impl PeakSet {
    /// Closest peak to `s` on the circle and its distance.
    pub fn nearest(&self, s: f64) -> Option<(Peak, f64)> {
        self.peaks
            .iter()
            .map(|p| (*p, circular_distance(p.s, s)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
    }
}

/// Distance of two actions modulo `2 pi`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Half-maximum crossing found by stepping from `s0` in direction `dir`, then bisecting.
fn half_crossing(spec: &ActionSpectrum, s0: f64, height: f64, dir: f64) -> f64 {
    let half = 0.5 * height;
    let step = PI / spec.j_cut as f64 / 16.0;
    let mut inside = 0.0;
    let mut outside = None;
    let mut x = step;
    while x <= PI {
        if spec.eval(s0 + dir * x).norm() < half {
            outside = Some(x);
            break;
        }
        inside = x;
        x += step;
    }
    let Some(mut hi) = outside else {
        return PI;
    };
    let mut lo = inside;
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        if spec.eval(s0 + dir * mid).norm() < half {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn fwhm(spec: &ActionSpectrum, s0: f64, height: f64) -> f64 {
    half_crossing(spec, s0, height, 1.0) + half_crossing(spec, s0, height, -1.0)
}

/// Golden-section maximisation of `|rho|` on `[a, b]`.
fn golden_max(spec: &ActionSpectrum, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let f = |s: f64| spec.eval(s).norm();
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-12 * (1.0 + b.abs()) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn make_peak(spec: &ActionSpectrum, s: f64) -> Peak {
    let height = spec.eval(s).norm();
    Peak { s: s.rem_euclid(TAU), height, width: fwhm(spec, s, height) }
}

/// Largest `|rho|` within `half_width` of `s_target`.
pub(crate) fn local_max(spec: &ActionSpectrum, s_target: f64, half_width: f64) -> Peak {
    let m = 64;
    let h = 2.0 * half_width / m as f64;
    let best = (0..=m)
        .map(|k| s_target - half_width + k as f64 * h)
        .max_by(|a, b| spec.eval(*a).norm().partial_cmp(&spec.eval(*b).norm()).unwrap())
        .unwrap();
    let lo = (best - h).max(s_target - half_width);
    let hi = (best + h).min(s_target + half_width);
    make_peak(spec, golden_max(spec, lo, hi))
}

/// Local maxima of `|rho|` above three times the median, refined by a parabola through the grid.
pub(crate) fn detect(spec: &ActionSpectrum) -> PeakSet {
    let a = spec.abs();
    let n = a.len();
    let noise_floor = median(&a);
    let h = spec.grid_step();
    let mut peaks = Vec::new();
    for k in 0..n {
        let (am, a0, ap) = (a[(k + n - 1) % n], a[k], a[(k + 1) % n]);
        if !(a0 > am && a0 >= ap && a0 > 3.0 * noise_floor) {
            continue;
        }
        let den = am - 2.0 * a0 + ap;
        let delta = if den < 0.0 { (0.5 * (am - ap) / den).clamp(-0.5, 0.5) } else { 0.0 };
        let pk = make_peak(spec, spec.s_grid[k] + delta * h);
        if pk.height > 3.0 * noise_floor {
            peaks.push(pk);
        }
    }
    peaks.sort_by(|x, y| y.height.partial_cmp(&x.height).unwrap());
    PeakSet { peaks, noise_floor }
}

/// Full width at half maximum of an isolated term `e^{i(j+1/2)S}`, times `j_cut`.
pub const DIRICHLET_FWHM: f64 = 7.581_977_07;

/// Peaks sorted into orbit matches, broad unexplained ghosts and narrow leftovers.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PeakAssignment {
    /// Highest peak within `pi/j_cut` of each action, with its distance.
    pub matched: Vec<Option<(Peak, f64)>>,
    /// One representative per cluster of broad unmatched peaks.
    pub ghosts: Vec<Peak>,
    /// Narrow unmatched peaks that are not sidelobes of a matched peak.
    pub unmatched: Vec<Peak>,
}

/// Assigns peaks to `actions`; unmatched peaks within `4 pi/j_cut` of a higher matched peak are
/// dropped as sidelobes, those wider than twice the isolated width are ghosts, merged when closer
/// than half the larger width.
pub fn assign_peaks(set: &PeakSet, actions: &[f64], j_cut: usize) -> PeakAssignment {
    let jc = j_cut.max(1) as f64;
    let tol = PI / jc;
    let matched: Vec<Option<(Peak, f64)>> = actions
        .iter()
        .map(|&s| {
            set.peaks
                .iter()
                .map(|p| (*p, circular_distance(p.s, s)))
                .filter(|(_, d)| *d <= tol)
                .max_by(|a, b| a.0.height.partial_cmp(&b.0.height).unwrap())
        })
        .collect();
    let hits: Vec<Peak> = matched.iter().flatten().map(|(p, _)| *p).collect();
    let rest = set.peaks.iter().filter(|p| !hits.contains(p)).filter(|p| {
        !hits.iter().any(|h| h.height > p.height && circular_distance(h.s, p.s) <= 4.0 * PI / jc)
    });
    let broad = 2.0 * DIRICHLET_FWHM / jc;
    let mut ghosts: Vec<Peak> = Vec::new();
    let mut unmatched = Vec::new();
    for p in rest {
        if p.width <= broad {
            unmatched.push(*p);
        } else if !ghosts.iter().any(|g| circular_distance(g.s, p.s) <= 0.5 * g.width.max(p.width)) {
            ghosts.push(*p);
        }
    }
    PeakAssignment { matched, ghosts, unmatched }
}
