use super::InitError;

const MASS_TOLERANCE: f64 = 1e-9;

/// Distribution of population preferences over `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum PreferenceDistribution {
    /// Weighted points `(x, p)`.
    Points(Vec<(f64, f64)>),
    /// Bins `[edges[i], edges[i + 1])` carrying `masses[i]`.
    Histogram { edges: Vec<f64>, masses: Vec<f64> },
}

impl PreferenceDistribution {
    pub fn points(points: Vec<(f64, f64)>) -> Result<Self, InitError> {
        let d = PreferenceDistribution::Points(points);
        d.validate()?;
        Ok(d)
    }

    pub fn histogram(edges: Vec<f64>, masses: Vec<f64>) -> Result<Self, InitError> {
        let d = PreferenceDistribution::Histogram { edges, masses };
        d.validate()?;
        Ok(d)
    }

    /// Equal mass in `bins` equal-width bins across `[-1, 1]`.
    pub fn uniform(bins: usize) -> Self {
        let width = 2.0 / bins as f64;
        PreferenceDistribution::Histogram {
            edges: (0..=bins).map(|i| -1.0 + width * i as f64).collect(),
            masses: vec![1.0 / bins as f64; bins],
        }
    }

    pub fn validate(&self) -> Result<(), InitError> {
        let support_ok = |x: f64| (-1.0..=1.0).contains(&x);
        let masses: Vec<f64> = match self {
            PreferenceDistribution::Points(points) => {
                if let Some(&(x, _)) = points.iter().find(|(x, _)| !support_ok(*x)) {
                    return Err(InitError::OutOfSupport(x));
                }
                points.iter().map(|&(_, p)| p).collect()
            }
            PreferenceDistribution::Histogram { edges, masses } => {
                if edges.len() != masses.len() + 1 || masses.is_empty() {
                    return Err(InitError::InvalidDistribution(format!(
                        "{} bin edges for {} masses",
                        edges.len(),
                        masses.len()
                    )));
                }
                if let Some(&x) = edges.iter().find(|x| !support_ok(**x)) {
                    return Err(InitError::OutOfSupport(x));
                }
                if edges.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(InitError::InvalidDistribution("bin edges must increase".into()));
                }
                masses.clone()
            }
        };
        if masses.iter().any(|p| !(*p >= 0.0)) {
            return Err(InitError::InvalidDistribution("negative mass".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(InitError::Unnormalized(total));
        }
        Ok(())
    }
}

/// Mean preference: exact for point sets, bin-midpoint rule for histograms
/// (error at most half the widest bin).
pub fn expected_preference(d: &PreferenceDistribution) -> Result<f64, InitError> {
    d.validate()?;
    let mean = match d {
        PreferenceDistribution::Points(points) => points.iter().map(|&(x, p)| x * p).sum(),
        PreferenceDistribution::Histogram { edges, masses } => edges
            .windows(2)
            .zip(masses)
            .map(|(w, p)| 0.5 * (w[0] + w[1]) * p)
            .sum::<f64>(),
    };
    Ok(mean.clamp(-1.0, 1.0))
}
