//! Linear elliptic problems `-∇·(e^κ(x,θ) ∇u) = f`, `B u = g`, their
//! reference solvers, observation operators and synthetic data.

mod data;
mod expansion;
mod fd2d;
mod fem1d;
mod forward;
mod operator;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use data::{forward_map, make_data, SyntheticData};
pub use expansion::{KlExpansion, KlMode};
pub use fd2d::boundary_flux_x1;
pub use forward::{ClosedFormConstantDiffusion, ForwardModel, SolverForward};
pub use operator::{
    apply_operator_to_kernel, cov_functional, gauss_legendre, LinearOp, OperatorPair,
    SpatialFunctional,
};

/// Minimum distance from a κ interface for operator evaluation points.
pub const INTERFACE_TOL: f64 = 1e-12;

/// Value of κ on one cell of a piecewise-constant field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellValue {
    Fixed(f64),
    /// Entry of the parameter vector.
    Param(usize),
}

/// Log-diffusion κ(x, θ); the PDE coefficient is `e^κ`. In two spatial
/// dimensions κ depends on `x₁` only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiffusionField {
    /// κ ≡ θ₀.
    Constant,
    /// `breakpoints` are the cell edges, `0 = b₀ < … < b_m = 1`; cell `i` is
    /// `[b_i, b_{i+1})` (the last one closed).
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        cells: Vec<CellValue>,
    },
    /// κ(x) = Σ √a_n θ_n b_n(x).
    Expansion(KlExpansion),
}

impl DiffusionField {
    /// κ = θ₁, θ₂ on the middle two of four equal cells, 0 and 1 on the ends.
    pub fn four_cell() -> Self {
        Self::pinned_cells(4)
    }

    /// `n_cells` equal cells with κ pinned to 0 (first) and 1 (last); the
    /// `n_cells - 2` middle cells are parameters.
    pub fn pinned_cells(n_cells: usize) -> Self {
        assert!(n_cells >= 3);
        let breakpoints = (0..=n_cells).map(|i| i as f64 / n_cells as f64).collect();
        let mut cells = vec![CellValue::Fixed(0.0)];
        cells.extend((0..n_cells - 2).map(CellValue::Param));
        cells.push(CellValue::Fixed(1.0));
        DiffusionField::PiecewiseConstant { breakpoints, cells }
    }

    pub fn dim_theta(&self) -> usize {
        match self {
            DiffusionField::Constant => 1,
            DiffusionField::PiecewiseConstant { cells, .. } => cells
                .iter()
                .filter_map(|c| match c {
                    CellValue::Param(i) => Some(i + 1),
                    CellValue::Fixed(_) => None,
                })
                .max()
                .unwrap_or(0),
            DiffusionField::Expansion(kl) => kl.modes().len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let DiffusionField::PiecewiseConstant { breakpoints, cells } = self {
            if breakpoints.len() != cells.len() + 1 || cells.is_empty() {
                return Err(Error::input("piecewise κ needs one more breakpoint than cells"));
            }
            if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
                return Err(Error::input("piecewise κ cells must partition [0, 1]"));
            }
            if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::input("piecewise κ breakpoints must be strictly increasing"));
            }
        }
        Ok(())
    }

    /// Interior cell edges (where κ may jump).
    pub fn interfaces(&self) -> &[f64] {
        match self {
            DiffusionField::PiecewiseConstant { breakpoints, .. } => {
                &breakpoints[1..breakpoints.len() - 1]
            }
            _ => &[],
        }
    }

    fn cell_index(breakpoints: &[f64], x: f64) -> usize {
        let m = breakpoints.len() - 1;
        (0..m).find(|&i| x < breakpoints[i + 1]).unwrap_or(m - 1)
    }

    fn cell_value(cell: CellValue, theta: &[f64]) -> f64 {
        match cell {
            CellValue::Fixed(v) => v,
            CellValue::Param(i) => theta[i],
        }
    }

    /// κ(x₁, θ).
    pub fn kappa(&self, x1: f64, theta: &[f64]) -> f64 {
        match self {
            DiffusionField::Constant => theta[0],
            DiffusionField::PiecewiseConstant { breakpoints, cells } => {
                Self::cell_value(cells[Self::cell_index(breakpoints, x1)], theta)
            }
            DiffusionField::Expansion(kl) => kl.value(x1, theta),
        }
    }

    /// ∂κ/∂x₁ away from interfaces.
    pub fn kappa_dx(&self, x1: f64, theta: &[f64]) -> f64 {
        match self {
            DiffusionField::Expansion(kl) => kl.derivative(x1, theta),
            _ => 0.0,
        }
    }

    /// `∫_a^b exp(sign · κ(x, θ)) dx`, exact for piecewise-constant fields.
    pub fn integrate_exp(&self, a: f64, b: f64, theta: &[f64], sign: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self {
            DiffusionField::Constant => (b - a) * (sign * theta[0]).exp(),
            DiffusionField::PiecewiseConstant { breakpoints, cells } => {
                let mut total = 0.0;
                for (i, cell) in cells.iter().enumerate() {
                    let lo = breakpoints[i].max(a);
                    let hi = breakpoints[i + 1].min(b);
                    if hi > lo {
                        total += (hi - lo) * (sign * Self::cell_value(*cell, theta)).exp();
                    }
                }
                total
            }
            DiffusionField::Expansion(kl) => {
                let (nodes, weights) = gauss_legendre(6);
                let half = 0.5 * (b - a);
                let mid = 0.5 * (a + b);
                nodes
                    .iter()
                    .zip(&weights)
                    .map(|(t, w)| w * half * (sign * kl.value(mid + half * t, theta)).exp())
                    .sum()
            }
        }
    }
}

/// `f(x) = constant + gradient · x`; independent of θ in all supported
/// problems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub constant: f64,
    #[serde(default)]
    pub gradient: Vec<f64>,
}

impl Source {
    pub fn constant(c: f64) -> Self {
        Source {
            constant: c,
            gradient: vec![],
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.gradient.iter().zip(x).map(|(g, v)| g * v).sum::<f64>()
    }
}

/// Boundary pieces of the unit interval (`Left`/`Right`) or unit square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    /// x₁ = 0
    Left,
    /// x₁ = 1
    Right,
    /// x₂ = 0
    Bottom,
    /// x₂ = 1
    Top,
}

impl Segment {
    /// Coordinate axis normal to the segment.
    pub fn normal_axis(self) -> usize {
        match self {
            Segment::Left | Segment::Right => 0,
            Segment::Bottom | Segment::Top => 1,
        }
    }

    pub fn contains(self, x: &[f64]) -> bool {
        let tol = 1e-12;
        match self {
            Segment::Left => x[0].abs() < tol,
            Segment::Right => (x[0] - 1.0).abs() < tol,
            Segment::Bottom => x.len() > 1 && x[1].abs() < tol,
            Segment::Top => x.len() > 1 && (x[1] - 1.0).abs() < tol,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// `u = g`
    Dirichlet,
    /// `∂u/∂x_normal = g`, derivative along the segment's normal axis.
    Neumann,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub segment: Segment,
    pub kind: BoundaryKind,
    pub value: f64,
}

/// Axis-aligned parameter box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ThetaBox {
    pub fn symmetric(dim: usize, half_width: f64) -> Self {
        ThetaBox {
            lower: vec![-half_width; dim],
            upper: vec![half_width; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.is_empty() || self.lower.len() != self.upper.len() {
            return Err(Error::input("theta box bounds must be nonempty and equal length"));
        }
        if self
            .lower
            .iter()
            .zip(&self.upper)
            .any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite())
        {
            return Err(Error::input("theta box must be bounded with lower < upper"));
        }
        Ok(())
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(t, (l, u))| *t >= *l && *t <= *u)
    }

    pub fn project(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(t, (l, u))| t.clamp(*l, *u))
            .collect()
    }

    /// Affine map from the unit cube.
    pub fn from_unit(&self, unit: &[f64]) -> Vec<f64> {
        unit.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(s, (l, u))| l + s * (u - l))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdeProblem {
    pub spatial_dim: usize,
    pub diffusion: DiffusionField,
    pub source: Source,
    pub boundary: Vec<BoundaryCondition>,
    pub theta_box: ThetaBox,
}

impl PdeProblem {
    /// `-(e^θ u')' = 1` on (0, 1), `u(0) = u(1) = 0`, θ ∈ [-1, 1].
    pub fn constant_diffusion() -> Self {
        PdeProblem {
            spatial_dim: 1,
            diffusion: DiffusionField::Constant,
            source: Source::constant(1.0),
            boundary: vec![
                BoundaryCondition {
                    segment: Segment::Left,
                    kind: BoundaryKind::Dirichlet,
                    value: 0.0,
                },
                BoundaryCondition {
                    segment: Segment::Right,
                    kind: BoundaryKind::Dirichlet,
                    value: 0.0,
                },
            ],
            theta_box: ThetaBox::symmetric(1, 1.0),
        }
    }

    /// `-(e^κ u')' = 4x`, `u(0) = 0`, `u(1) = 2` with the given κ.
    pub fn linear_source_1d(diffusion: DiffusionField) -> Self {
        let d = diffusion.dim_theta();
        PdeProblem {
            spatial_dim: 1,
            diffusion,
            source: Source {
                constant: 0.0,
                gradient: vec![4.0],
            },
            boundary: vec![
                BoundaryCondition {
                    segment: Segment::Left,
                    kind: BoundaryKind::Dirichlet,
                    value: 0.0,
                },
                BoundaryCondition {
                    segment: Segment::Right,
                    kind: BoundaryKind::Dirichlet,
                    value: 2.0,
                },
            ],
            theta_box: ThetaBox::symmetric(d, 1.0),
        }
    }

    /// Unit-square flow cell: `u = 1` at x₁ = 0, `u = 0` at x₁ = 1, no flux
    /// through x₂ ∈ {0, 1}, zero source.
    pub fn flow_cell(diffusion: DiffusionField) -> Self {
        let d = diffusion.dim_theta();
        let bc = |segment, kind, value| BoundaryCondition {
            segment,
            kind,
            value,
        };
        PdeProblem {
            spatial_dim: 2,
            diffusion,
            source: Source::constant(0.0),
            boundary: vec![
                bc(Segment::Left, BoundaryKind::Dirichlet, 1.0),
                bc(Segment::Right, BoundaryKind::Dirichlet, 0.0),
                bc(Segment::Bottom, BoundaryKind::Neumann, 0.0),
                bc(Segment::Top, BoundaryKind::Neumann, 0.0),
            ],
            theta_box: ThetaBox::symmetric(d, 1.0),
        }
    }

    pub fn dim_theta(&self) -> usize {
        self.theta_box.dim()
    }

    pub fn segments(&self) -> &'static [Segment] {
        if self.spatial_dim == 1 {
            &[Segment::Left, Segment::Right]
        } else {
            &[Segment::Left, Segment::Right, Segment::Bottom, Segment::Top]
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.spatial_dim) {
            return Err(Error::input("spatial_dim must be 1 or 2"));
        }
        self.diffusion.validate()?;
        self.theta_box.validate()?;
        if self.diffusion.dim_theta() > self.theta_box.dim() {
            return Err(Error::input(format!(
                "diffusion uses {} parameters but theta box has dimension {}",
                self.diffusion.dim_theta(),
                self.theta_box.dim()
            )));
        }
        for seg in self.segments() {
            let n = self.boundary.iter().filter(|b| b.segment == *seg).count();
            if n != 1 {
                return Err(Error::input(format!(
                    "boundary segment {seg:?} must carry exactly one condition, found {n}"
                )));
            }
        }
        if self.boundary.len() != self.segments().len() {
            return Err(Error::input("boundary condition on a segment outside the domain"));
        }
        Ok(())
    }

    pub fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim_theta() {
            return Err(Error::input(format!(
                "θ has dimension {}, expected {}",
                theta.len(),
                self.dim_theta()
            )));
        }
        if !self.theta_box.contains(theta) {
            return Err(Error::input(format!("θ = {theta:?} outside the parameter box")));
        }
        Ok(())
    }

    pub fn condition_on(&self, segment: Segment) -> &BoundaryCondition {
        self.boundary
            .iter()
            .find(|b| b.segment == segment)
            .expect("validated problem covers every segment")
    }

    /// Boundary condition active at `x`; Dirichlet wins at corners.
    pub fn condition_at(&self, x: &[f64]) -> Option<&BoundaryCondition> {
        let mut found: Option<&BoundaryCondition> = None;
        for seg in self.segments() {
            if seg.contains(x) {
                let bc = self.condition_on(*seg);
                if found.is_none() || bc.kind == BoundaryKind::Dirichlet {
                    found = Some(bc);
                }
            }
        }
        found
    }

    pub fn is_on_interface(&self, x: &[f64]) -> bool {
        self.diffusion
            .interfaces()
            .iter()
            .any(|b| (x[0] - b).abs() < INTERFACE_TOL)
    }

    /// Reference discrete solution at θ.
    pub fn solve_reference(&self, theta: &[f64], mesh_n: usize) -> Result<DiscreteSolution> {
        self.check_theta(theta)?;
        if mesh_n < 8 {
            return Err(Error::input("mesh_n must be at least 8"));
        }
        match self.spatial_dim {
            1 => fem1d::solve(self, theta, mesh_n),
            _ => fd2d::solve(self, theta, mesh_n),
        }
    }
}

/// Piecewise-linear (1D) or bilinear (2D) discrete solution.
#[derive(Clone, Debug, PartialEq)]
pub enum DiscreteSolution {
    OneD { nodes: Vec<f64>, values: Vec<f64> },
    /// Values on the `(n+1) × (n+1)` vertex grid, index `j * (n+1) + i`
    /// for node `(i/n, j/n)`.
    TwoD { n: usize, values: Vec<f64> },
}

impl DiscreteSolution {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            DiscreteSolution::OneD { nodes, values } => {
                let t = x[0].clamp(0.0, 1.0);
                let k = match nodes.binary_search_by(|p| p.partial_cmp(&t).unwrap()) {
                    Ok(i) => return values[i],
                    Err(i) => i.clamp(1, nodes.len() - 1),
                };
                let (x0, x1) = (nodes[k - 1], nodes[k]);
                let w = (t - x0) / (x1 - x0);
                (1.0 - w) * values[k - 1] + w * values[k]
            }
            DiscreteSolution::TwoD { n, values } => {
                let n = *n;
                let h = 1.0 / n as f64;
                let locate = |v: f64| {
                    let v = v.clamp(0.0, 1.0);
                    let i = ((v / h).floor() as usize).min(n - 1);
                    (i, v / h - i as f64)
                };
                let (i, s) = locate(x[0]);
                let (j, t) = locate(x[1]);
                let at = |i: usize, j: usize| values[j * (n + 1) + i];
                (1.0 - s) * (1.0 - t) * at(i, j)
                    + s * (1.0 - t) * at(i + 1, j)
                    + (1.0 - s) * t * at(i, j + 1)
                    + s * t * at(i + 1, j + 1)
            }
        }
    }

    /// Exact `∫_a^b u dx` of the piecewise-linear 1D solution.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        let DiscreteSolution::OneD { nodes, .. } = self else {
            return Err(Error::Capability("interval integrals need a 1D solution".into()));
        };
        let mut total = 0.0;
        for w in nodes.windows(2) {
            let lo = w[0].max(a);
            let hi = w[1].min(b);
            if hi > lo {
                total += 0.5 * (hi - lo) * (self.eval(&[lo]) + self.eval(&[hi]));
            }
        }
        Ok(total)
    }

    /// Rows of `(x..., u)` for debugging.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        match self {
            DiscreteSolution::OneD { nodes, values } => {
                w.write_record(["x", "u"])?;
                for (x, u) in nodes.iter().zip(values) {
                    w.write_record([x.to_string(), u.to_string()])?;
                }
            }
            DiscreteSolution::TwoD { n, values } => {
                w.write_record(["x1", "x2", "u"])?;
                for j in 0..=*n {
                    for i in 0..=*n {
                        w.write_record([
                            (i as f64 / *n as f64).to_string(),
                            (j as f64 / *n as f64).to_string(),
                            values[j * (n + 1) + i].to_string(),
                        ])?;
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// How the solution is observed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservationOperator {
    Pointwise { points: Vec<Vec<f64>> },
    /// `∫_{a_j}^{b_j} u dx` over disjoint subintervals of [0, 1].
    LocalAverage { intervals: Vec<[f64; 2]> },
}

impl ObservationOperator {
    /// `d_y` interior points `j / (d_y + 1)` of the unit interval.
    pub fn uniform_points(d_y: usize) -> Self {
        ObservationOperator::Pointwise {
            points: (1..=d_y).map(|j| vec![j as f64 / (d_y + 1) as f64]).collect(),
        }
    }

    /// [0, 1] split into `d_y` equal subintervals.
    pub fn uniform_intervals(d_y: usize) -> Self {
        ObservationOperator::LocalAverage {
            intervals: (0..d_y)
                .map(|j| [j as f64 / d_y as f64, (j + 1) as f64 / d_y as f64])
                .collect(),
        }
    }

    pub fn d_y(&self) -> usize {
        match self {
            ObservationOperator::Pointwise { points } => points.len(),
            ObservationOperator::LocalAverage { intervals } => intervals.len(),
        }
    }

    pub fn validate(&self, problem: &PdeProblem) -> Result<()> {
        match self {
            ObservationOperator::Pointwise { points } => {
                for p in points {
                    if p.len() != problem.spatial_dim
                        || p.iter().any(|v| !(0.0..=1.0).contains(v))
                    {
                        return Err(Error::input(format!(
                            "observation point {p:?} outside the closed domain"
                        )));
                    }
                }
            }
            ObservationOperator::LocalAverage { intervals } => {
                if problem.spatial_dim != 1 {
                    return Err(Error::Capability(
                        "interval observations are only defined in 1D".into(),
                    ));
                }
                let mut sorted = intervals.clone();
                sorted.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
                for iv in &sorted {
                    if !(0.0 <= iv[0] && iv[0] < iv[1] && iv[1] <= 1.0) {
                        return Err(Error::input(format!("bad observation interval {iv:?}")));
                    }
                }
                if sorted.windows(2).any(|w| w[1][0] < w[0][1]) {
                    return Err(Error::input("observation intervals overlap"));
                }
            }
        }
        Ok(())
    }

    /// Observed functionals of the unknown solution, in order.
    pub fn functionals(&self) -> Vec<SpatialFunctional> {
        match self {
            ObservationOperator::Pointwise { points } => points
                .iter()
                .map(|p| SpatialFunctional::Point {
                    x: p.clone(),
                    op: LinearOp::identity(p.len()),
                })
                .collect(),
            ObservationOperator::LocalAverage { intervals } => intervals
                .iter()
                .map(|iv| SpatialFunctional::Integral { a: iv[0], b: iv[1] })
                .collect(),
        }
    }

    pub fn observe(&self, sol: &DiscreteSolution) -> Result<Vec<f64>> {
        match self {
            ObservationOperator::Pointwise { points } => {
                Ok(points.iter().map(|p| sol.eval(p)).collect())
            }
            ObservationOperator::LocalAverage { intervals } => intervals
                .iter()
                .map(|iv| sol.integrate(iv[0], iv[1]))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn closed(x: f64, theta: f64) -> f64 {
        (x - x * x) / (2.0 * theta.exp())
    }

    #[test]
    fn constant_diffusion_midpoint() {
        let p = PdeProblem::constant_diffusion();
        let sol = p.solve_reference(&[0.0], 512).unwrap();
        assert!((sol.eval(&[0.5]) - 0.125).abs() <= 1e-6);
        let sol = p.solve_reference(&[0.314], 512).unwrap();
        assert!((sol.eval(&[0.5]) - 0.125 * (-0.314f64).exp()).abs() <= 1e-6);
    }

    #[test]
    fn theta_outside_box_rejected() {
        let p = PdeProblem::constant_diffusion();
        assert!(matches!(p.solve_reference(&[1.5], 64), Err(Error::Input(_))));
        assert!(matches!(p.solve_reference(&[0.0], 4), Err(Error::Input(_))));
    }

    #[test]
    fn fem_max_norm_error_is_second_order() {
        let p = PdeProblem::constant_diffusion();
        let theta = 0.3;
        let errs: Vec<f64> = [32, 64, 128, 256]
            .iter()
            .map(|&n| {
                let sol = p.solve_reference(&[theta], n).unwrap();
                (0..=4000)
                    .map(|i| {
                        let x = i as f64 / 4000.0;
                        (sol.eval(&[x]) - closed(x, theta)).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!(rate > 1.8 && rate < 2.2, "rate {rate}, errors {errs:?}");
        }
    }

    #[test]
    fn forward_map_is_continuous_in_theta() {
        let p = PdeProblem::linear_source_1d(DiffusionField::four_cell());
        let obs = ObservationOperator::uniform_points(6);
        let a = forward_map(&p, &obs, &[0.2, -0.1], 256).unwrap();
        let b = forward_map(&p, &obs, &[0.2 + 1e-6, -0.1], 256).unwrap();
        let diff = (a - b).amax();
        assert!(diff < 1e-5 && diff > 0.0);
    }

    #[test]
    fn boundary_coverage_enforced() {
        let mut p = PdeProblem::constant_diffusion();
        p.boundary.pop();
        assert!(p.validate().is_err());
        let mut p = PdeProblem::flow_cell(DiffusionField::four_cell());
        assert!(p.validate().is_ok());
        p.boundary[2].segment = Segment::Top;
        assert!(p.validate().is_err());
    }

    #[test]
    fn piecewise_kappa_lookup() {
        let f = DiffusionField::four_cell();
        let th = [0.3, -0.4];
        assert_eq!(f.kappa(0.1, &th), 0.0);
        assert_eq!(f.kappa(0.25, &th), 0.3);
        assert_eq!(f.kappa(0.6, &th), -0.4);
        assert_eq!(f.kappa(1.0, &th), 1.0);
        assert_eq!(f.dim_theta(), 2);
        assert_eq!(DiffusionField::pinned_cells(12).dim_theta(), 10);
        let exact = 0.25 * (1.0 + 0.3f64.exp() + (-0.4f64).exp() + 1f64.exp());
        assert_relative_eq!(f.integrate_exp(0.0, 1.0, &th, 1.0), exact, max_relative = 1e-14);
    }

    #[test]
    fn observation_validation() {
        let p = PdeProblem::constant_diffusion();
        let bad = ObservationOperator::LocalAverage {
            intervals: vec![[0.0, 0.6], [0.5, 1.0]],
        };
        assert!(bad.validate(&p).is_err());
        let bad = ObservationOperator::Pointwise {
            points: vec![vec![1.2]],
        };
        assert!(bad.validate(&p).is_err());
        assert!(ObservationOperator::uniform_intervals(16).validate(&p).is_ok());
    }
}
