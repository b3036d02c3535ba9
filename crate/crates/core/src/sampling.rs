//! Seeded sample generation on the support of a measure.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // unused when std float methods are linked in
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hankel::MeasureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Iid,
    /// Tensor grid with `⌊N^{1/d}⌋` evenly spaced points per axis, endpoints included.
    Grid,
    /// Halton sequence, skipping the origin of the sequence.
    Halton,
}

impl core::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" => Ok(Scheme::Iid),
            "grid" => Ok(Scheme::Grid),
            "halton" => Ok(Scheme::Halton),
            other => Err(Error::Invalid(alloc::format!("unknown sampling scheme `{other}`"))),
        }
    }
}

fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= candidate).all(|&p| !candidate.is_multiple_of(p)) {
            out.push(candidate);
        }
        candidate += 1;
    }
    out
}

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut factor = inv;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * factor;
        index /= base;
        factor *= inv;
    }
    value
}

/// Points `1..=count` of the Halton sequence in `[0, 1)^d`.
pub fn halton(count: usize, d: usize) -> Vec<Vec<f64>> {
    let bases = primes(d);
    (1..=count as u64).map(|i| bases.iter().map(|&b| radical_inverse(i, b)).collect()).collect()
}

fn unit_ball_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            let radius = rng.random::<f64>().powf(1.0 / d as f64);
            return g.into_iter().map(|x| x / norm * radius).collect();
        }
    }
}

fn per_axis(count: usize, d: usize) -> usize {
    let mut k = (count as f64).powf(1.0 / d as f64).round() as usize;
    while k > 1 && k.checked_pow(d as u32).is_none_or(|v| v > count) {
        k -= 1;
    }
    while (k + 1).checked_pow(d as u32).is_some_and(|v| v <= count) {
        k += 1;
    }
    k.max(1)
}

fn tensor_grid(center: &[f64], radii: &[f64], k: usize) -> Vec<Vec<f64>> {
    let d = center.len();
    let total = k.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            (0..d)
                .map(|axis| {
                    let i = idx % k;
                    idx /= k;
                    if k == 1 {
                        center[axis]
                    } else {
                        center[axis] - radii[axis] + 2.0 * radii[axis] * i as f64 / (k - 1) as f64
                    }
                })
                .collect()
        })
        .collect()
}

/// `count` points from `measure`. Identical arguments give identical output.
///
/// Grid and Halton points ignore `seed`. For balls, grid points are the box
/// grid restricted to the ball and Halton points are drawn from the bounding
/// box and kept when inside. Empirical measures are resampled with replacement.
pub fn draw_samples(measure: &MeasureSpec, count: usize, scheme: Scheme, seed: u64) -> Result<Vec<Vec<f64>>> {
    measure.validate()?;
    if count == 0 {
        return Err(Error::Invalid("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = measure.dim();
    match (measure, scheme) {
        (MeasureSpec::UniformBox { center, radii, .. }, Scheme::Iid) => Ok((0..count)
            .map(|_| center.iter().zip(radii).map(|(c, r)| c + r * rng.random_range(-1.0..1.0)).collect())
            .collect()),
        (MeasureSpec::UniformBall { center, radius }, Scheme::Iid) => Ok((0..count)
            .map(|_| unit_ball_point(&mut rng, d).iter().zip(center).map(|(x, c)| c + radius * x).collect())
            .collect()),
        (MeasureSpec::UniformBox { center, radii, .. }, Scheme::Grid) => {
            Ok(tensor_grid(center, radii, per_axis(count, d)))
        }
        (MeasureSpec::UniformBall { center, radius }, Scheme::Grid) => {
            let radii = vec![*radius; d];
            let inside = |p: &Vec<f64>| {
                p.iter().zip(center).map(|(x, c)| (x - c) * (x - c)).sum::<f64>() <= radius * radius * (1.0 + 1e-12)
            };
            Ok(tensor_grid(center, &radii, per_axis(count, d)).into_iter().filter(inside).collect())
        }
        (MeasureSpec::UniformBox { center, radii, .. }, Scheme::Halton) => Ok(halton(count, d)
            .into_iter()
            .map(|h| h.iter().zip(center).zip(radii).map(|((u, c), r)| c + r * (2.0 * u - 1.0)).collect())
            .collect()),
        (MeasureSpec::UniformBall { center, radius }, Scheme::Halton) => {
            let bases = primes(d);
            let mut out = Vec::with_capacity(count);
            let mut index = 1u64;
            while out.len() < count {
                let y: Vec<f64> = bases.iter().map(|&b| 2.0 * radical_inverse(index, b) - 1.0).collect();
                index += 1;
                if y.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                    out.push(y.iter().zip(center).map(|(x, c)| c + radius * x).collect());
                }
            }
            Ok(out)
        }
        (MeasureSpec::Empirical { points }, Scheme::Iid) => {
            Ok((0..count).map(|_| points[rng.random_range(0..points.len())].clone()).collect())
        }
        (MeasureSpec::Empirical { .. }, _) => {
            Err(Error::Invalid("empirical measures only support iid resampling".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hankel::{moment_matrix, moment_matrix_exact};
    use crate::pushforward::gamma_check;

    #[test]
    fn grid_examples() {
        let mu = MeasureSpec::uniform_box(vec![0.0], vec![1.0]);
        assert_eq!(draw_samples(&mu, 3, Scheme::Grid, 0).unwrap(), vec![vec![-1.0], vec![0.0], vec![1.0]]);
        let square = MeasureSpec::uniform_box(vec![0.0, 0.0], vec![1.0, 2.0]);
        let pts = draw_samples(&square, 10, Scheme::Grid, 0).unwrap();
        assert_eq!(pts.len(), 9);
        assert!(pts.contains(&vec![1.0, -2.0]));
        assert_eq!(per_axis(1000, 3), 10);
        assert_eq!(per_axis(999, 3), 9);
    }

    #[test]
    fn determinism() {
        let mu = MeasureSpec::UniformBall { center: vec![0.1, 0.0, -0.2], radius: 0.5 };
        for scheme in [Scheme::Iid, Scheme::Grid, Scheme::Halton] {
            assert_eq!(draw_samples(&mu, 50, scheme, 9).unwrap(), draw_samples(&mu, 50, scheme, 9).unwrap());
        }
        assert_ne!(draw_samples(&mu, 5, Scheme::Iid, 1).unwrap(), draw_samples(&mu, 5, Scheme::Iid, 2).unwrap());
    }

    #[test]
    fn support_is_respected() {
        let ball = MeasureSpec::UniformBall { center: vec![1.0, 0.0], radius: 0.5 };
        for scheme in [Scheme::Iid, Scheme::Grid, Scheme::Halton] {
            for p in draw_samples(&ball, 400, scheme, 3).unwrap() {
                assert!(((p[0] - 1.0).powi(2) + p[1] * p[1]).sqrt() <= 0.5 + 1e-12);
            }
        }
    }

    #[test]
    fn halton_values() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
        assert_eq!(halton(2, 2), vec![vec![0.5, 1.0 / 3.0], vec![0.25, 2.0 / 3.0]]);
    }

    #[test]
    fn iid_moments() {
        let mu = MeasureSpec::uniform_box(vec![0.0], vec![1.0]);
        let pts = draw_samples(&mu, 20000, Scheme::Iid, 7).unwrap();
        for k in 0..=4 {
            let empirical = pts.iter().map(|p| p[0].powi(k)).sum::<f64>() / pts.len() as f64;
            let exact = if k % 2 == 0 { 1.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((empirical - exact).abs() < 0.02);
        }
    }

    #[test]
    fn ball_moments_match_exact() {
        let mu = MeasureSpec::UniformBall { center: vec![0.2, -0.1], radius: 0.7 };
        let pts = draw_samples(&mu, 40000, Scheme::Iid, 11).unwrap();
        let empirical = moment_matrix(&MeasureSpec::Empirical { points: pts }, 2).unwrap();
        let exact = moment_matrix_exact(&mu, 2).unwrap().to_f64();
        assert!((empirical - exact).abs().max() < 0.01);
    }

    #[test]
    fn halton_gamma() {
        let mu = MeasureSpec::uniform_box(vec![0.0], vec![1.0]);
        let pts = draw_samples(&mu, 500, Scheme::Halton, 0).unwrap();
        for n in 1..=3 {
            let d_mu = moment_matrix(&mu, n).unwrap();
            let d_hat = moment_matrix(&MeasureSpec::Empirical { points: pts.clone() }, n).unwrap();
            assert!(gamma_check(&d_mu, &d_hat).unwrap() <= 0.5);
        }
    }
}
