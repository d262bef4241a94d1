//! Unnormalized multi-dimensional complex FFTs over the flat row-major layout
//! of [`TorusGrid`]. Each 1-d line is transformed independently, so the
//! output does not depend on how rayon schedules the lines.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::grid::TorusGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    /// `sum_x u(x) e^{-ikx}`
    Forward,
    /// `sum_k c_k e^{+ikx}`
    Inverse,
}

type PlanCache = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

pub(crate) fn plan(n: usize, direction: Direction) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<(FftPlanner<f64>, PlanCache)>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    let (planner, plans) = &mut *guard;
    let forward = direction == Direction::Forward;
    plans
        .entry((n, forward))
        .or_insert_with(|| {
            planner.plan_fft(
                n,
                if forward {
                    FftDirection::Forward
                } else {
                    FftDirection::Inverse
                },
            )
        })
        .clone()
}

/// Lines handed to one rayon task.
const MIN_TASK_ELEMS: usize = 1 << 13;

fn transform_lines(buf: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
    let n = fft.len();
    let lines_per_task = (MIN_TASK_ELEMS / n).max(1);
    buf.par_chunks_mut(n * lines_per_task).for_each(|chunk| {
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(chunk, &mut scratch);
    });
}

/// In-place transform along every axis.
pub(crate) fn transform(data: &mut [Complex64], grid: &TorusGrid, direction: Direction) {
    assert_eq!(data.len(), grid.len());
    let n = grid.n_per_axis();
    let dim = grid.dim();
    let fft = plan(n, direction);

    transform_lines(data, &fft);
    if dim == 1 {
        return;
    }

    let mut lines = vec![Complex64::default(); data.len()];
    for axis in 0..dim - 1 {
        let stride = n.pow((dim - 1 - axis) as u32);
        {
            let src = &*data;
            lines
                .par_chunks_mut(n)
                .with_min_len(64)
                .enumerate()
                .for_each(|(l, line)| {
                    let base = (l / stride) * n * stride + l % stride;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = src[base + j * stride];
                    }
                });
        }
        transform_lines(&mut lines, &fft);
        let src = &lines;
        data.par_chunks_mut(stride)
            .enumerate()
            .for_each(|(c, chunk)| {
                let (outer, j) = (c / n, c % n);
                for (o, v) in chunk.iter_mut().enumerate() {
                    *v = src[(outer * stride + o) * n + j];
                }
            });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(data: &[Complex64], grid: &TorusGrid, sign: f64) -> Vec<Complex64> {
        let n = grid.n_per_axis();
        let digits = |mut i: usize| {
            let mut d = vec![0usize; grid.dim()];
            for axis in (0..grid.dim()).rev() {
                d[axis] = i % n;
                i /= n;
            }
            d
        };
        (0..grid.len())
            .map(|out| {
                let ko = digits(out);
                (0..grid.len())
                    .map(|inp| {
                        let xi = digits(inp);
                        let phase: usize = ko.iter().zip(&xi).map(|(a, b)| a * b).sum();
                        data[inp]
                            * Complex64::cis(
                                sign * std::f64::consts::TAU * (phase % n) as f64 / n as f64,
                            )
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_direct_summation_in_3d() {
        let grid = TorusGrid::new(3, 4).unwrap();
        let data: Vec<Complex64> = (0..grid.len())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        for (dir, sign) in [(Direction::Forward, -1.0), (Direction::Inverse, 1.0)] {
            let mut fast = data.clone();
            transform(&mut fast, &grid, dir);
            let slow = naive_dft(&data, &grid, sign);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-12, "{a} vs {b}");
            }
        }
    }
}
