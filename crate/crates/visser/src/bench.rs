//! Empirical scaling measurement: run a pipeline over a size ladder and fit
//! the polynomial degree on a log-log scale.

use std::time::Instant;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct BenchPoint {
    pub input_size: u64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub pipeline: String,
    pub ladder: Vec<BenchPoint>,
    pub fitted_degree: f64,
    pub max_degree: f64,
    pub pass: bool,
}

/// Least-squares slope of `ln t` against `ln n`.
pub fn fit_degree(points: &[BenchPoint]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| (p.input_size as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.wall_time_s.max(1e-9).ln()).collect();
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return 0.0;
    }
    (n * sxy - sx * sy) / denom
}

/// Runs `measure` at each ladder point, taking the best of `reps`
/// repetitions, and fits the degree. `measure` returns the effective input
/// size for the point.
pub fn run_ladder(
    pipeline: &str,
    sizes: &[usize],
    reps: usize,
    max_degree: f64,
    mut measure: impl FnMut(usize) -> u64,
) -> BenchReport {
    let mut ladder = Vec::new();
    for &n in sizes {
        let mut best = f64::INFINITY;
        let mut input_size = 0;
        for _ in 0..reps.max(1) {
            let t0 = Instant::now();
            input_size = measure(n);
            let dt = t0.elapsed().as_secs_f64();
            best = best.min(dt);
        }
        ladder.push(BenchPoint { input_size, wall_time_s: best });
    }
    let fitted_degree = fit_degree(&ladder);
    BenchReport {
        pipeline: pipeline.to_string(),
        ladder,
        fitted_degree,
        max_degree,
        pass: fitted_degree <= max_degree,
    }
}

/// Size ladder `start..=end` doubling.
pub fn doubling_ladder(start: usize, end: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = start.max(1);
    while n <= end {
        out.push(n);
        n *= 2;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_known_slopes() {
        // t = n^2 exactly
        let points: Vec<BenchPoint> = [8u64, 16, 32, 64, 128]
            .iter()
            .map(|&n| BenchPoint { input_size: n, wall_time_s: (n * n) as f64 * 1e-6 })
            .collect();
        let d = fit_degree(&points);
        assert!((d - 2.0).abs() < 1e-6, "{d}");
        // constant time fits degree ~0
        let flat: Vec<BenchPoint> = [8u64, 16, 32]
            .iter()
            .map(|&n| BenchPoint { input_size: n, wall_time_s: 1e-3 })
            .collect();
        assert!(fit_degree(&flat).abs() < 1e-6);
    }

    #[test]
    fn ladder_runs() {
        let report = run_ladder("noop", &doubling_ladder(4, 16), 2, 3.0, |n| n as u64);
        assert_eq!(report.ladder.len(), 3);
        assert!(report.pass);
    }
}
