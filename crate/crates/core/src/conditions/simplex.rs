use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::random::random_distribution;

/// Strictly interior point of the probability simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint {
    probs: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
            return Err(Error::InvalidDistribution(format!("{probs:?} is not strictly interior")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("{probs:?} sums to {total}")));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }
}

/// Strictly positive compositions of `resolution` into `n` parts, scaled by
/// `1 / resolution`, in lexicographic order of the parts.
pub fn simplex_grid(n: usize, resolution: usize) -> SimplexGrid {
    let current = (n >= 1 && resolution >= n).then(|| {
        let mut parts = vec![1; n];
        parts[n - 1] = resolution - (n - 1);
        parts
    });
    SimplexGrid { resolution, current }
}

pub struct SimplexGrid {
    resolution: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for SimplexGrid {
    type Item = SimplexPoint;

    fn next(&mut self) -> Option<SimplexPoint> {
        let parts = self.current.take()?;
        let res = self.resolution as f64;
        let point = SimplexPoint { probs: parts.iter().map(|&k| k as f64 / res).collect() };

        let n = parts.len();
        let mut next = parts;
        let mut suffix: usize = next[n - 1];
        for i in (0..n.saturating_sub(1)).rev() {
            // parts after i can give up one unit while each stays >= 1
            if suffix > n - 1 - i {
                next[i] += 1;
                let remaining = suffix - 1;
                for part in next.iter_mut().take(n - 1).skip(i + 1) {
                    *part = 1;
                }
                next[n - 1] = remaining - (n - 2 - i);
                self.current = Some(next);
                break;
            }
            suffix += next[i];
        }
        Some(point)
    }
}

/// How "for all p" is approximated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Grid resolution; `None` picks a default from the ensemble size.
    pub resolution: Option<usize>,
    pub random_samples: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { resolution: None, random_samples: 2000, seed: 0 }
    }
}

impl SamplerConfig {
    pub fn resolution_for(&self, n: usize) -> usize {
        self.resolution.unwrap_or(match n {
            0..=3 => 50,
            4 => 20,
            _ => 10,
        })
    }

    /// Grid points in canonical order followed by seeded uniform interior points.
    pub fn points(&self, n: usize) -> Vec<SimplexPoint> {
        let mut points: Vec<SimplexPoint> = simplex_grid(n, self.resolution_for(n)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut drawn = 0;
        while drawn < self.random_samples {
            let mut probs = random_distribution(&mut rng, n);
            let total: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= total);
            if let Ok(point) = SimplexPoint::new(probs) {
                points.push(point);
                drawn += 1;
            }
        }
        points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn two_bins_resolution_four() {
        let points: Vec<Vec<f64>> = simplex_grid(2, 4).map(SimplexPoint::into_probs).collect();
        assert_eq!(points, vec![vec![0.25, 0.75], vec![0.5, 0.5], vec![0.75, 0.25]]);
    }

    #[test]
    fn three_bins_resolution_three_is_the_centre() {
        let points: Vec<_> = simplex_grid(3, 3).collect();
        assert_eq!(points.len(), 1);
        for p in points[0].probs() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_sizes_match_stars_and_bars() {
        for n in 2..=5 {
            for res in n..=12 {
                let points: Vec<_> = simplex_grid(n, res).collect();
                assert_eq!(points.len(), binomial(res - 1, n - 1), "n={n} res={res}");
                for p in &points {
                    assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
                    assert!(p.probs().iter().all(|&x| x > 0.0 && x < 1.0));
                }
                let mut sorted: Vec<Vec<f64>> = points.iter().map(|p| p.probs().to_vec()).collect();
                sorted.dedup();
                assert_eq!(sorted.len(), points.len());
            }
        }
        assert_eq!(simplex_grid(3, 2).count(), 0);
    }

    #[test]
    fn random_points_are_seeded_and_interior() {
        let config = SamplerConfig { resolution: Some(4), random_samples: 25, seed: 7 };
        let a = config.points(3);
        let b = config.points(3);
        assert_eq!(a, b);
        assert_eq!(a.len(), simplex_grid(3, 4).count() + 25);
        for p in &a {
            assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let other = SamplerConfig { seed: 8, ..config }.points(3);
        assert_ne!(a, other);
    }

    #[test]
    fn boundary_points_are_rejected() {
        assert!(SimplexPoint::new(vec![0.0, 1.0]).is_err());
        assert!(SimplexPoint::new(vec![0.5, 0.6]).is_err());
    }
}
