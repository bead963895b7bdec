//! Truncated power series in `θ` and the Taylor-table machinery.
//!
//! A curvature function `c(θ)` is sent through the Möbius-type transform
//! `c̃ = e^{−c(θ)} e^{iθ}`; the quantity compared across candidates is the
//! Taylor series of `Re c̃ + Im c̃` at `θ = 0`. Candidates that blow up at
//! `θ = 0` (`p`, `q`) have no such series and are checked for flatness
//! instead.

use thiserror::Error;

use crate::curvature::{Candidate, ExtReal};

/// Truncation degree used when none is given.
pub const DEFAULT_DEGREE: usize = 12;

/// Coefficients below this magnitude count as zero when locating the first
/// deviating degree.
pub const GAP_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("candidate {0} has no power series at θ = 0")]
    Singular(&'static str),
    #[error("order {n} outside 2..={max} for truncation degree {degree}")]
    OrderOutOfRange { n: u32, max: usize, degree: usize },
    #[error("non-finite coefficient")]
    NonFinite,
}

/// `Σ_{k=0}^{D} c_k θ^k`, truncated at degree `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoly {
    coeffs: Vec<f64>,
}

impl SeriesPoly {
    pub fn new(coeffs: Vec<f64>) -> Result<Self, SeriesError> {
        if coeffs.is_empty() {
            return Err(SeriesError::DegreeMismatch(0, 0));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(SeriesError::NonFinite);
        }
        Ok(Self { coeffs })
    }

    pub fn zero(degree: usize) -> Self {
        Self {
            coeffs: vec![0.0; degree + 1],
        }
    }

    pub fn constant(c: f64, degree: usize) -> Self {
        let mut s = Self::zero(degree);
        s.coeffs[0] = c;
        s
    }

    /// The series `a·θ`.
    pub fn monomial(a: f64, degree: usize) -> Self {
        let mut s = Self::zero(degree);
        if degree >= 1 {
            s.coeffs[1] = a;
        }
        s
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    fn same_degree(&self, other: &Self) -> Result<(), SeriesError> {
        if self.degree() != other.degree() {
            return Err(SeriesError::DegreeMismatch(self.degree(), other.degree()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.same_degree(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.same_degree(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Cauchy product truncated at the common degree.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.same_degree(other)?;
        let d = self.degree();
        let mut out = vec![0.0; d + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.coeffs[..=d - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Ok(Self { coeffs: out })
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Self::constant(1.0, self.degree());
        for _ in 0..n {
            out = out.mul(self).expect("same degree");
        }
        out
    }

    /// `exp(s)`. The constant term is split off as the scalar `e^{c₀}`; the
    /// rest follows from `g' = s' g`.
    pub fn exp(&self) -> Self {
        let d = self.degree();
        let mut g = vec![0.0; d + 1];
        g[0] = 1.0;
        for k in 1..=d {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.coeffs[j] * g[k - j];
            }
            g[k] = acc / k as f64;
        }
        Self { coeffs: g }.scale(self.coeffs[0].exp())
    }

    /// `(sin s, cos s)` from `sin' = s' cos`, `cos' = −s' sin`.
    pub fn sin_cos(&self) -> (Self, Self) {
        let d = self.degree();
        let (mut s, mut c) = (vec![0.0; d + 1], vec![0.0; d + 1]);
        s[0] = self.coeffs[0].sin();
        c[0] = self.coeffs[0].cos();
        for k in 1..=d {
            let (mut as_, mut ac) = (0.0, 0.0);
            for j in 1..=k {
                let a = j as f64 * self.coeffs[j];
                as_ += a * c[k - j];
                ac -= a * s[k - j];
            }
            s[k] = as_ / k as f64;
            c[k] = ac / k as f64;
        }
        (Self { coeffs: s }, Self { coeffs: c })
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }

    /// `f(θ) ↦ f(aθ)`.
    pub fn rescale(&self, a: f64) -> Self {
        let mut p = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let v = c * p;
                p *= a;
                v
            })
            .collect();
        Self { coeffs }
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn eval(&self, theta: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * theta + c)
    }

    /// First degree whose coefficient exceeds `tol` in magnitude.
    pub fn leading(&self, tol: f64) -> Option<(usize, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| c.abs() > tol)
            .map(|(k, &c)| (k, c))
    }
}

/// Maclaurin series of `sin θ`.
pub fn sin_series(degree: usize) -> SeriesPoly {
    SeriesPoly::monomial(1.0, degree).sin()
}

/// Maclaurin series of `cos θ`.
pub fn cos_series(degree: usize) -> SeriesPoly {
    SeriesPoly::monomial(1.0, degree).cos()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeries {
    pub re: SeriesPoly,
    pub im: SeriesPoly,
}

impl ComplexSeries {
    pub fn new(re: SeriesPoly, im: SeriesPoly) -> Result<Self, SeriesError> {
        re.same_degree(&im)?;
        Ok(Self { re, im })
    }

    pub fn degree(&self) -> usize {
        self.re.degree()
    }
}

/// `e^{−c(θ)} (cos θ + i sin θ)`.
pub fn mobius_series(curv: &SeriesPoly) -> ComplexSeries {
    let d = curv.degree();
    let damp = curv.scale(-1.0).exp();
    let (s, c) = SeriesPoly::monomial(1.0, d).sin_cos();
    ComplexSeries {
        re: damp.mul(&c).expect("same degree"),
        im: damp.mul(&s).expect("same degree"),
    }
}

/// `Re + Im`, coefficient-wise.
pub fn taylor_sum(cs: &ComplexSeries) -> SeriesPoly {
    cs.re.add(&cs.im).expect("same degree")
}

/// Series of `sinⁿ(θ/2)·cos(θ/2)/(n − 1)`.
pub fn associated_series(n: u32, degree: usize) -> SeriesPoly {
    let (s, c) = SeriesPoly::monomial(0.5, degree).sin_cos();
    s.powi(n)
        .mul(&c)
        .expect("same degree")
        .scale(1.0 / (n as f64 - 1.0))
}

/// Series of a candidate curvature. `p` and `q` are rejected.
pub fn candidate_series(candidate: Candidate, degree: usize) -> Result<SeriesPoly, SeriesError> {
    let (s_half, c_half) = SeriesPoly::monomial(0.5, degree).sin_cos();
    match candidate {
        Candidate::F => Ok(c_half),
        Candidate::G => Ok(s_half.mul(&sin_series(degree))?.scale(0.5)),
        Candidate::P | Candidate::Q => Err(SeriesError::Singular(candidate.name())),
    }
}

/// `𝔗(c̃)` for a curvature with a power series.
pub fn transformed_taylor(curv: &SeriesPoly) -> SeriesPoly {
    taylor_sum(&mobius_series(curv))
}

/// `𝔗(c̃_n) − 𝔗(e^{iθ})` for the order-`n` associated curvature: its first
/// nonzero degree and coefficient.
pub fn order_gap(n: u32, degree: usize) -> Result<(usize, f64), SeriesError> {
    let max = degree.saturating_sub(1);
    if n < 2 || n as usize > max {
        return Err(SeriesError::OrderOutOfRange { n, max, degree });
    }
    let diff = transformed_taylor(&associated_series(n, degree))
        .sub(&transformed_taylor(&SeriesPoly::zero(degree)))?;
    diff.leading(GAP_TOLERANCE)
        .ok_or(SeriesError::OrderOutOfRange { n, max, degree })
}

/// Log-log slope of `|𝔗(c̃_n)(θ) − 𝔗(e^{iθ})(θ)|` on a small-angle grid,
/// for orders whose coefficients are too small to extract from a series.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub n: u32,
    pub slope: f64,
    /// Sign of the difference on the grid (all samples agree).
    pub sign: f64,
}

/// The difference is `expm1(−c_n(θ))·(cos θ + sin θ)`; it is sampled on a
/// geometric grid in `[0.01, 0.02]`, where the leading power dominates.
pub fn order_gap_slope(n: u32) -> Result<SlopeFit, SeriesError> {
    if n < 2 {
        return Err(SeriesError::OrderOutOfRange {
            n,
            max: usize::MAX,
            degree: 0,
        });
    }
    let m = 16;
    let mut pts = Vec::with_capacity(m);
    let mut sign = 0.0;
    for i in 0..m {
        let t = 0.01 * 2f64.powf(i as f64 / (m - 1) as f64);
        let h = 0.5 * t;
        let c = h.sin().powi(n as i32) * h.cos() / (n as f64 - 1.0);
        let d = (-c).exp_m1() * (t.cos() + t.sin());
        if d == 0.0 || !d.is_finite() {
            return Err(SeriesError::NonFinite);
        }
        if sign == 0.0 {
            sign = d.signum();
        } else if d.signum() != sign {
            return Err(SeriesError::NonFinite);
        }
        pts.push((t.ln(), d.abs().ln()));
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m as f64;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(SlopeFit {
        n,
        slope: sxy / sxx,
        sign,
    })
}

// ---------------------------------------------------------------------------
// Flatness of the singular candidates

#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub k: u32,
    /// `ln(e^{−c(θ)}/θ^k)` decreases as `θ` decreases along the grid.
    pub monotone: bool,
    /// `ln(e^{−c(θ)}/θ^k)` at the smallest grid angle.
    pub final_log_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatDecayReport {
    pub candidate: Candidate,
    pub rows: Vec<DecayRow>,
    pub passed: bool,
}

/// Largest power checked by [`flat_decay_check`].
pub const FLAT_MAX_POWER: u32 = 10;

/// The ratio must end below this (`ln` of it is compared).
pub const FLAT_RATIO_LIMIT: f64 = 1e-12;

/// Geometric grid of `count` angles in `[lo, 0.2]`.
pub fn flat_grid(lo: f64, count: usize) -> Vec<f64> {
    let hi: f64 = 0.2;
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1).max(1) as f64))
        .collect()
}

/// Checks `e^{−c(θ)}/θ^k → 0` as `θ → 0⁺` for `k = 0..=10`: on the grid
/// the log-ratio must fall monotonically towards the smallest angle and
/// end below `ln(1e−12)`. Everything is evaluated in log space, so the
/// tiny values of `e^{−q}` never underflow.
pub fn flat_decay_check(candidate: Candidate, grid: &[f64]) -> FlatDecayReport {
    let mut g: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|t| *t > 0.0 && *t <= 0.2)
        .collect();
    g.sort_by(f64::total_cmp);
    let curv: Vec<f64> = g
        .iter()
        .map(|&t| match candidate.eval(t) {
            Ok(ExtReal::Finite(c)) => c,
            _ => f64::INFINITY,
        })
        .collect();
    let rows: Vec<DecayRow> = (0..=FLAT_MAX_POWER)
        .map(|k| {
            let logs: Vec<f64> = g
                .iter()
                .zip(&curv)
                .map(|(&t, &c)| -c - k as f64 * t.ln())
                .collect();
            DecayRow {
                k,
                monotone: logs.windows(2).all(|w| w[0] < w[1]),
                final_log_ratio: logs.first().copied().unwrap_or(f64::NAN),
            }
        })
        .collect();
    let passed = !g.is_empty()
        && rows
            .iter()
            .all(|r| r.monotone && r.final_log_ratio <= FLAT_RATIO_LIMIT.ln());
    FlatDecayReport {
        candidate,
        rows,
        passed,
    }
}

// ---------------------------------------------------------------------------
// Tables

/// One row of the candidate table.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRow {
    pub name: &'static str,
    /// Value of the curvature at `θ = 0`.
    pub at_zero: ExtReal,
    /// `𝔗` coefficients, `None` for singular candidates.
    pub taylor: Option<SeriesPoly>,
    /// Essential-singularity prefactor of the singular candidates.
    pub prefactor: Option<&'static str>,
    /// Flatness verdict for singular candidates.
    pub flat: Option<bool>,
}

/// Rows for `θ` itself (zero curvature), `f`, `g`, `p`, `q`.
pub fn candidate_table(degree: usize) -> Vec<CandidateRow> {
    let grid = flat_grid(0.005, 40);
    let mut rows = vec![CandidateRow {
        name: "theta",
        at_zero: ExtReal::Finite(0.0),
        taylor: Some(transformed_taylor(&SeriesPoly::zero(degree))),
        prefactor: None,
        flat: None,
    }];
    for c in Candidate::ALL {
        let at_zero = c.eval(0.0).expect("0 is in range");
        let row = match candidate_series(c, degree) {
            Ok(s) => CandidateRow {
                name: c.name(),
                at_zero,
                taylor: Some(transformed_taylor(&s)),
                prefactor: None,
                flat: None,
            },
            Err(_) => CandidateRow {
                name: c.name(),
                at_zero,
                taylor: None,
                prefactor: Some(if c == Candidate::P {
                    "exp(-2/θ + O(θ))"
                } else {
                    "exp(-8/θ³ + O(θ))"
                }),
                flat: Some(flat_decay_check(c, &grid).passed),
            },
        };
        rows.push(row);
    }
    rows
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub n: u32,
    pub degree: usize,
    /// Leading coefficient from series arithmetic, when `n < D`.
    pub coeff: Option<f64>,
    /// Slope fit for orders beyond the truncation degree.
    pub slope: Option<SlopeFit>,
}

/// Order-gap rows: series coefficients for `n ≤ D − 1`, slope fits beyond.
pub fn order_gap_table(orders: &[u32], degree: usize) -> Result<Vec<GapRow>, SeriesError> {
    orders
        .iter()
        .map(|&n| {
            if (n as usize) < degree {
                let (d, c) = order_gap(n, degree)?;
                Ok(GapRow {
                    n,
                    degree: d,
                    coeff: Some(c),
                    slope: None,
                })
            } else {
                let fit = order_gap_slope(n)?;
                Ok(GapRow {
                    n,
                    degree: fit.slope.round() as usize,
                    coeff: None,
                    slope: Some(fit),
                })
            }
        })
        .collect()
}
