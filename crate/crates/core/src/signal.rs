//! The piecewise constant signal, its translations and exact evaluation.

use num_traits::{One, Zero};

use crate::rational::{int, Rational};

/// One constant piece of the support: amplitude `g`, and a length of
/// `n - f` grid intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub amplitude: Rational,
    pub n: u32,
    pub f: Rational,
}

impl Region {
    pub fn new(amplitude: Rational, n: u32, f: Rational) -> Self {
        Region { amplitude, n, f }
    }

    /// `n - f`, in units of `T`.
    pub fn length(&self) -> Rational {
        int(self.n as i64) - &self.f
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("RegionViolation: a signal needs at least one region")]
    Empty,
    #[error("AmplitudeViolation (i={index}): {reason}")]
    AmplitudeViolation { index: usize, reason: &'static str },
    #[error("RegionViolation (i={index}): {reason}")]
    RegionViolation { index: usize, reason: &'static str },
    #[error("GenericityViolation (i={i},K={k}): f_{i} + ... + f_{end} is an integer", end = i + k)]
    GenericityViolation { i: usize, k: usize },
    #[error("RegionViolation: grid interval T must be positive")]
    NonPositiveInterval,
}

/// A validated spatially-limited piecewise constant signal.
///
/// Regions are 1-based in every accessor below, matching the usual
/// `g_1 .. g_m` numbering; `g_0 = g_{m+1} = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalSpec {
    regions: Vec<Region>,
    grid_interval: Rational,
}

impl SignalSpec {
    /// Validates amplitudes, region parameters and the genericity
    /// condition (no run of consecutive `f_i` sums to an integer).
    pub fn new(regions: Vec<Region>, grid_interval: Rational) -> Result<Self, SpecError> {
        validate_spec(&regions, &grid_interval)?;
        Ok(SignalSpec {
            regions,
            grid_interval,
        })
    }

    /// Same as [`SignalSpec::new`] with `T = 1`.
    pub fn unit(regions: Vec<Region>) -> Result<Self, SpecError> {
        Self::new(regions, Rational::one())
    }

    pub fn m(&self) -> usize {
        self.regions.len()
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    /// Region `i`, 1-based.
    pub fn region(&self, i: usize) -> &Region {
        &self.regions[i - 1]
    }

    pub fn grid_interval(&self) -> &Rational {
        &self.grid_interval
    }

    /// `g_i` for `i` in `0..=m+1`.
    pub fn amplitude(&self, i: usize) -> Rational {
        if i == 0 || i > self.m() {
            Rational::zero()
        } else {
            self.regions[i - 1].amplitude.clone()
        }
    }

    /// `[g_0, g_1, .., g_m, g_{m+1}]`.
    pub fn padded_amplitudes(&self) -> Vec<Rational> {
        (0..=self.m() + 1).map(|i| self.amplitude(i)).collect()
    }

    /// `[g_1, .., g_m]`.
    pub fn amplitudes(&self) -> Vec<Rational> {
        self.regions.iter().map(|r| r.amplitude.clone()).collect()
    }

    pub fn total_length(&self) -> Rational {
        self.regions.iter().map(Region::length).sum()
    }

    /// Discontinuity positions when discontinuity `l` is placed at zero.
    pub fn translation(&self, l: usize) -> Translation {
        assert!(l <= self.m(), "reference index {l} out of range");
        let mut positions = Vec::with_capacity(self.m() + 1);
        let mut acc = Rational::zero();
        positions.push(acc.clone());
        for r in &self.regions {
            acc += r.length();
            positions.push(acc.clone());
        }
        let offset = positions[l].clone();
        for p in &mut positions {
            *p -= &offset;
        }
        Translation { l, positions }
    }

    /// `g^(l)`: the signal translated so discontinuity `l` sits at zero.
    pub fn truth_function(&self, l: usize) -> PiecewiseFunction {
        let t = self.translation(l);
        PiecewiseFunction::new(t.positions, self.amplitudes())
    }

    /// The mirror image `t -> -t`: regions in reverse order.
    pub fn reversed(&self) -> SignalSpec {
        let mut regions = self.regions.clone();
        regions.reverse();
        SignalSpec {
            regions,
            grid_interval: self.grid_interval.clone(),
        }
    }
}

pub fn validate_spec(regions: &[Region], grid_interval: &Rational) -> Result<(), SpecError> {
    let m = regions.len();
    if m == 0 {
        return Err(SpecError::Empty);
    }
    if *grid_interval <= Rational::zero() {
        return Err(SpecError::NonPositiveInterval);
    }
    if regions[0].amplitude.is_zero() {
        return Err(SpecError::AmplitudeViolation {
            index: 1,
            reason: "g_1 must be nonzero",
        });
    }
    if regions[m - 1].amplitude.is_zero() {
        return Err(SpecError::AmplitudeViolation {
            index: m,
            reason: "g_m must be nonzero",
        });
    }
    for (idx, pair) in regions.windows(2).enumerate() {
        if pair[0].amplitude == pair[1].amplitude {
            return Err(SpecError::AmplitudeViolation {
                index: idx + 1,
                reason: "adjacent amplitudes g_i and g_{i+1} must differ",
            });
        }
    }
    for (idx, r) in regions.iter().enumerate() {
        if r.n < 2 {
            return Err(SpecError::RegionViolation {
                index: idx + 1,
                reason: "n_i must be at least 2",
            });
        }
        if r.f <= Rational::zero() || r.f >= Rational::one() {
            return Err(SpecError::RegionViolation {
                index: idx + 1,
                reason: "f_i must lie strictly between 0 and 1",
            });
        }
    }
    for i in 0..m {
        let mut sum = Rational::zero();
        for (k, r) in regions[i..].iter().enumerate() {
            sum += &r.f;
            if sum.is_integer() {
                return Err(SpecError::GenericityViolation { i: i + 1, k });
            }
        }
    }
    Ok(())
}

/// Positions `D_0 .. D_m` of the discontinuities for reference index `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Translation {
    pub l: usize,
    pub positions: Vec<Rational>,
}

/// A step function: `values[k]` on `[breakpoints[k], breakpoints[k+1])`,
/// zero outside `[breakpoints[0], breakpoints[last])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseFunction {
    breakpoints: Vec<Rational>,
    values: Vec<Rational>,
}

impl PiecewiseFunction {
    /// Panics unless breakpoints are strictly increasing and there is one
    /// value per interval.
    pub fn new(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Self {
        Self::try_new(breakpoints, values).expect("malformed piecewise function")
    }

    pub fn try_new(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Option<Self> {
        let shape_ok = if breakpoints.is_empty() {
            values.is_empty()
        } else {
            values.len() + 1 == breakpoints.len()
        };
        if !shape_ok || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return None;
        }
        Some(PiecewiseFunction {
            breakpoints,
            values,
        })
    }

    pub fn zero() -> Self {
        PiecewiseFunction {
            breakpoints: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// Iterates `(left, right, value)` over the interior intervals.
    pub fn pieces(&self) -> impl Iterator<Item = (&Rational, &Rational, &Rational)> {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| (&w[0], &w[1], v))
    }

    pub fn evaluate(&self, t: &Rational) -> Rational {
        if self.breakpoints.is_empty()
            || *t < self.breakpoints[0]
            || *t >= self.breakpoints[self.breakpoints.len() - 1]
        {
            return Rational::zero();
        }
        // index of the last breakpoint <= t
        let k = self.breakpoints.partition_point(|b| b <= t) - 1;
        self.values[k].clone()
    }

    /// `t -> f(t + shift)`.
    pub fn shifted(&self, shift: &Rational) -> Self {
        PiecewiseFunction {
            breakpoints: self.breakpoints.iter().map(|b| b - shift).collect(),
            values: self.values.clone(),
        }
    }

    /// `t -> f(-t)`, up to the values at breakpoints.
    pub fn mirrored(&self) -> Self {
        PiecewiseFunction {
            breakpoints: self.breakpoints.iter().rev().map(|b| -b).collect(),
            values: self.values.iter().rev().cloned().collect(),
        }
    }
}
