//! Paths of Hamiltonians `u ↦ H(u)`, `u ∈ [0, 1]`.

use crate::error::{Error, Result};
use crate::linalg::{check_unitary, eigh, CMatrix, HermitianMatrix, UnitaryLog};

/// One piece of a trajectory, parametrised by a local `s ∈ [0, 1]`.
#[derive(Debug, Clone)]
pub enum Segment {
    /// `(1 − s) A + s B` in coefficient space.
    Linear {
        from: HermitianMatrix,
        to: HermitianMatrix,
    },
    /// Fixed eigenvectors, eigenvalues moving linearly.
    Spectral {
        basis: CMatrix,
        from: Vec<f64>,
        to: Vec<f64>,
    },
    /// Fixed eigenvalues, eigenvectors `exp(t(s) L) X` with `L = log(Y X†)`
    /// and `t(s)` running linearly from `t0` to `t1`.
    Rotation {
        base: CMatrix,
        log: UnitaryLog,
        values: Vec<f64>,
        t0: f64,
        t1: f64,
    },
}

impl Segment {
    /// Eigenvalue-only morph in a fixed orthonormal basis.
    pub fn spectral(basis: CMatrix, from: Vec<f64>, to: Vec<f64>) -> Result<Self> {
        check_unitary(&basis)?;
        let n = basis.ncols();
        for v in [&from, &to] {
            if v.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
        }
        Ok(Segment::Spectral { basis, from, to })
    }

    /// Eigenvector-only geodesic from basis `from` to basis `to`, column `k`
    /// carrying eigenvalue `values[k]` throughout.
    pub fn rotation(from: CMatrix, to: &CMatrix, values: Vec<f64>) -> Result<Self> {
        check_unitary(&from)?;
        check_unitary(to)?;
        if values.len() != from.ncols() || to.ncols() != from.ncols() {
            return Err(Error::LengthMismatch {
                expected: from.ncols(),
                found: values.len(),
            });
        }
        let log = UnitaryLog::new(&(to * from.adjoint()))?;
        Ok(Segment::Rotation {
            base: from,
            log,
            values,
            t0: 0.0,
            t1: 1.0,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Segment::Linear { from, .. } => from.dim(),
            Segment::Spectral { basis, .. } => basis.nrows(),
            Segment::Rotation { base, .. } => base.nrows(),
        }
    }

    pub fn sample(&self, s: f64) -> HermitianMatrix {
        match self {
            Segment::Linear { from, to } => {
                if s == 0.0 {
                    from.clone()
                } else if s == 1.0 {
                    to.clone()
                } else {
                    &(from * (1.0 - s)) + &(to * s)
                }
            }
            Segment::Spectral { basis, from, to } => {
                let vals: Vec<f64> = from
                    .iter()
                    .zip(to)
                    .map(|(a, b)| if s == 1.0 { *b } else { (1.0 - s) * a + s * b })
                    .collect();
                HermitianMatrix::from_spectrum(basis, &vals)
            }
            Segment::Rotation {
                base,
                log,
                values,
                t0,
                t1,
            } => {
                let t = (1.0 - s) * t0 + s * t1;
                let u = log.power(t) * base;
                HermitianMatrix::from_spectrum(&u, values)
            }
        }
    }

    fn reversed(&self) -> Segment {
        match self {
            Segment::Linear { from, to } => Segment::Linear {
                from: to.clone(),
                to: from.clone(),
            },
            Segment::Spectral { basis, from, to } => Segment::Spectral {
                basis: basis.clone(),
                from: to.clone(),
                to: from.clone(),
            },
            Segment::Rotation {
                base,
                log,
                values,
                t0,
                t1,
            } => Segment::Rotation {
                base: base.clone(),
                log: log.clone(),
                values: values.clone(),
                t0: *t1,
                t1: *t0,
            },
        }
    }
}

/// A piecewise path: segment `i` covers `u ∈ [breaks[i], breaks[i+1]]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    segments: Vec<Segment>,
    breaks: Vec<f64>,
}

impl Trajectory {
    /// `breaks` must start at 0, end at 1 and increase strictly, with one
    /// more entry than `segments`.
    pub fn new(segments: Vec<Segment>, breaks: Vec<f64>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidArgument("trajectory needs a segment".into()));
        }
        if breaks.len() != segments.len() + 1 {
            return Err(Error::LengthMismatch {
                expected: segments.len() + 1,
                found: breaks.len(),
            });
        }
        if breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 || breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "breakpoints must increase strictly from 0 to 1".into(),
            ));
        }
        let d = segments[0].dim();
        if let Some(s) = segments.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: s.dim(),
            });
        }
        Ok(Self { segments, breaks })
    }

    /// Segments spread evenly over `[0, 1]`.
    pub fn uniform(segments: Vec<Segment>) -> Result<Self> {
        let k = segments.len();
        let breaks = (0..=k).map(|i| i as f64 / k as f64).collect();
        Self::new(segments, breaks)
    }

    pub fn constant(h: HermitianMatrix) -> Self {
        Self::linear(h.clone(), h)
    }

    pub fn linear(from: HermitianMatrix, to: HermitianMatrix) -> Self {
        Self {
            segments: vec![Segment::Linear { from, to }],
            breaks: vec![0.0, 1.0],
        }
    }

    /// Linear interpolation through keyframes placed at `breaks`.
    pub fn piecewise_linear(keyframes: Vec<HermitianMatrix>, breaks: Vec<f64>) -> Result<Self> {
        if keyframes.len() < 2 {
            return Err(Error::InvalidArgument("need at least two keyframes".into()));
        }
        let segments = keyframes
            .windows(2)
            .map(|w| Segment::Linear {
                from: w[0].clone(),
                to: w[1].clone(),
            })
            .collect();
        Self::new(segments, breaks)
    }

    pub fn dim(&self) -> usize {
        self.segments[0].dim()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn sample(&self, u: f64) -> HermitianMatrix {
        let u = u.clamp(0.0, 1.0);
        let last = self.segments.len() - 1;
        let i = (0..last)
            .find(|&i| u < self.breaks[i + 1])
            .unwrap_or(last);
        let (a, b) = (self.breaks[i], self.breaks[i + 1]);
        let s = if u >= b { 1.0 } else { (u - a) / (b - a) };
        self.segments[i].sample(s)
    }

    pub fn start(&self) -> HermitianMatrix {
        self.sample(0.0)
    }

    pub fn end(&self) -> HermitianMatrix {
        self.sample(1.0)
    }

    /// The same path traversed from `u = 1` to `u = 0`.
    pub fn reversed(&self) -> Self {
        let segments = self.segments.iter().rev().map(Segment::reversed).collect();
        let breaks = self.breaks.iter().rev().map(|b| 1.0 - b).collect();
        Self { segments, breaks }
    }

    /// Concatenation with `self` on `[0, split]` and `other` on `[split, 1]`.
    pub fn then(&self, other: &Trajectory, split: f64) -> Result<Self> {
        if !(split > 0.0 && split < 1.0) {
            return Err(Error::InvalidArgument("split must lie in (0, 1)".into()));
        }
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        let mut breaks: Vec<f64> = self.breaks.iter().map(|b| b * split).collect();
        breaks.pop();
        breaks.extend(other.breaks.iter().map(|b| split + b * (1.0 - split)));
        Self::new(segments, breaks)
    }
}

/// Hamiltonians `H^(0) … H^(N)` with their path labels.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub hamiltonians: Vec<HermitianMatrix>,
    pub u: Vec<f64>,
}

impl Schedule {
    /// Quenches at `u = m/N`, `m = 0..=N`.
    pub fn sampled(traj: &Trajectory, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("number of quenches must be at least 1".into()));
        }
        let u: Vec<f64> = (0..=n).map(|m| m as f64 / n as f64).collect();
        let hamiltonians = u.iter().map(|&x| traj.sample(x)).collect();
        Ok(Self { hamiltonians, u })
    }

    /// Labels `u = m / (len − 1)`.
    pub fn from_hamiltonians(hamiltonians: Vec<HermitianMatrix>) -> Result<Self> {
        if hamiltonians.len() < 2 {
            return Err(Error::InvalidArgument("schedule needs at least one quench".into()));
        }
        let n = hamiltonians.len() - 1;
        let u = (0..=n).map(|m| m as f64 / n as f64).collect();
        Ok(Self { hamiltonians, u })
    }

    /// Number of quenches.
    pub fn quenches(&self) -> usize {
        self.hamiltonians.len() - 1
    }

    pub fn reversed(&self) -> Self {
        Self {
            hamiltonians: self.hamiltonians.iter().rev().cloned().collect(),
            u: self.u.iter().rev().map(|x| 1.0 - x).collect(),
        }
    }
}

/// Spectrum of `h`, ascending.
pub fn spectrum(h: &HermitianMatrix) -> Vec<f64> {
    eigh(h).values
}
