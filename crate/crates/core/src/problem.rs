//! Problem data for `-eps Δu + b·∇u + c u = f` with Dirichlet and Neumann
//! boundary conditions, plus the built-in benchmark problems.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{BoundaryKind, Mesh, Point};
use crate::quadrature::TriangleRule;

pub type ScalarField = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;
pub type BoundaryClassifier = Arc<dyn Fn(Point) -> BoundaryKind + Send + Sync>;
/// Predicate selecting cells that need adaptive quadrature for the exact
/// error (cells touching a thin layer of the exact solution).
pub type LayerPredicate = Arc<dyn Fn(&[Point; 3]) -> bool + Send + Sync>;

#[derive(Clone)]
pub struct ExactSolution {
    pub value: ScalarField,
    pub gradient: VectorField,
}

#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub epsilon: f64,
    pub convection: VectorField,
    /// Analytic `div b`; central differences are used when absent.
    pub divergence: Option<ScalarField>,
    pub reaction: ScalarField,
    pub source: ScalarField,
    pub dirichlet: ScalarField,
    pub neumann: ScalarField,
    /// Lower bound of `c - div(b)/2`.
    pub sigma: f64,
    pub boundary: BoundaryClassifier,
    pub exact: Option<ExactSolution>,
    pub layer: Option<LayerPredicate>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("epsilon", &self.epsilon)
            .field("sigma", &self.sigma)
            .field("has_exact", &self.exact.is_some())
            .finish_non_exhaustive()
    }
}

impl Problem {
    /// Pure diffusion with zero data on an all-Dirichlet boundary; adjust
    /// with the `with_*` builders.
    pub fn new(name: impl Into<String>, epsilon: f64, sigma: f64) -> Self {
        Self {
            name: name.into(),
            epsilon,
            convection: Arc::new(|_| [0.0, 0.0]),
            divergence: Some(Arc::new(|_| 0.0)),
            reaction: Arc::new(|_| 0.0),
            source: Arc::new(|_| 0.0),
            dirichlet: Arc::new(|_| 0.0),
            neumann: Arc::new(|_| 0.0),
            sigma,
            boundary: Arc::new(|_| BoundaryKind::Dirichlet),
            exact: None,
            layer: None,
        }
    }

    /// Sets `b`. The divergence falls back to finite differences unless
    /// given with [`Problem::with_divergence`].
    pub fn with_convection(mut self, b: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static) -> Self {
        self.convection = Arc::new(b);
        self.divergence = None;
        self
    }

    pub fn with_divergence(mut self, div: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        self.divergence = Some(Arc::new(div));
        self
    }

    pub fn with_reaction(mut self, c: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        self.reaction = Arc::new(c);
        self
    }

    pub fn with_source(mut self, f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        self.source = Arc::new(f);
        self
    }

    pub fn with_dirichlet(mut self, u_d: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        self.dirichlet = Arc::new(u_d);
        self
    }

    pub fn with_neumann(mut self, g: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        self.neumann = Arc::new(g);
        self
    }

    pub fn with_boundary(mut self, classify: impl Fn(Point) -> BoundaryKind + Send + Sync + 'static) -> Self {
        self.boundary = Arc::new(classify);
        self
    }

    pub fn with_exact(
        mut self,
        value: impl Fn(Point) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        self.exact = Some(ExactSolution {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        });
        self
    }

    pub fn with_layer(mut self, layer: impl Fn(&[Point; 3]) -> bool + Send + Sync + 'static) -> Self {
        self.layer = Some(Arc::new(layer));
        self
    }

    /// Built-in problem by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "known_boundary_layer" | "boundary_layer" => Ok(known_boundary_layer()),
            "dmp_test" => Ok(dmp_test()),
            other => Err(Error::UnknownProblem(other.to_string())),
        }
    }

    pub fn names() -> &'static [&'static str] {
        &["known_boundary_layer", "dmp_test"]
    }

    /// The unit-square starting mesh with this problem's boundary tags.
    pub fn initial_mesh(&self) -> Mesh {
        let classify = self.boundary.clone();
        Mesh::unit_square(move |p| classify(p)).expect("unit square is valid")
    }

    pub fn div_convection(&self, p: Point) -> f64 {
        match &self.divergence {
            Some(div) => div(p),
            None => {
                let h = 1e-6;
                let b = &self.convection;
                (b([p[0] + h, p[1]])[0] - b([p[0] - h, p[1]])[0]) / (2.0 * h)
                    + (b([p[0], p[1] + h])[1] - b([p[0], p[1] - h])[1]) / (2.0 * h)
            }
        }
    }

    /// Checks `c - div(b)/2 >= sigma` at the quadrature points of every
    /// cell and reports the first violation.
    pub fn check_coercivity(&self, mesh: &Mesh, degree: usize) -> Result<()> {
        let rule = TriangleRule::of_degree(degree);
        // finite-difference divergence is only accurate to ~1e-9
        let slack = if self.divergence.is_some() { 0.0 } else { 1e-7 };
        for c in 0..mesh.num_cells() {
            let pts = mesh.cell_points(c);
            for l in &rule.points {
                let x = TriangleRule::map(&pts, l);
                let value = (self.reaction)(x) - 0.5 * self.div_convection(x);
                if value < self.sigma - slack {
                    return Err(Error::Coercivity {
                        value,
                        sigma: self.sigma,
                        x: x[0],
                        y: x[1],
                    });
                }
            }
        }
        Ok(())
    }

    pub fn verify_coercivity(&self, mesh: &Mesh) -> bool {
        self.check_coercivity(mesh, 4).is_ok()
    }
}

/// Exact solution of the boundary-layer benchmark,
/// `u = y(1-y) (x - (e^{(x-1)/eps} - e^{-1/eps}) / (1 - e^{-1/eps}))`.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryLayerSolution {
    pub epsilon: f64,
}

impl BoundaryLayerSolution {
    fn scale(&self) -> f64 {
        1.0 / (1.0 - (-1.0 / self.epsilon).exp())
    }

    // e^{(x-1)/eps}; the exponent is non-positive on the closed square.
    fn layer(&self, x: f64) -> f64 {
        ((x - 1.0) / self.epsilon).exp()
    }

    fn outer(&self, x: f64) -> f64 {
        x - (self.layer(x) - (-1.0 / self.epsilon).exp()) * self.scale()
    }

    pub fn value(&self, p: Point) -> f64 {
        let [x, y] = p;
        y * (1.0 - y) * self.outer(x)
    }

    pub fn gradient(&self, p: Point) -> [f64; 2] {
        let [x, y] = p;
        let q = self.outer(x);
        let dq = 1.0 - self.layer(x) * self.scale() / self.epsilon;
        [y * (1.0 - y) * dq, (1.0 - 2.0 * y) * q]
    }

    /// `f = -eps Δu + (2, 1)·∇u + u`.
    pub fn source(&self, p: Point) -> f64 {
        let [x, y] = p;
        let eps = self.epsilon;
        let py = y * (1.0 - y);
        let q = self.outer(x);
        // -eps u_xx + 2 u_x collapses to py (2 - e k / eps); -eps u_yy = 2 eps q.
        py * (2.0 - self.layer(x) * self.scale() / eps) + q * (2.0 * eps + (1.0 - 2.0 * y) + py)
    }
}

/// Boundary layer at `x = 1`: `eps = 1e-3`, `b = (2, 1)`, `c = 1`, zero
/// boundary data on the whole boundary.
pub fn known_boundary_layer() -> Problem {
    boundary_layer_with_epsilon(1e-3)
}

pub fn boundary_layer_with_epsilon(epsilon: f64) -> Problem {
    let exact = BoundaryLayerSolution { epsilon };
    let strip = 1.0 - 50.0 * epsilon;
    Problem::new("known_boundary_layer", epsilon, 1.0)
        .with_convection(|_| [2.0, 1.0])
        .with_divergence(|_| 0.0)
        .with_reaction(|_| 1.0)
        .with_source(move |p| exact.source(p))
        .with_exact(move |p| exact.value(p), move |p| exact.gradient(p))
        .with_layer(move |pts| pts.iter().any(|p| p[0] > strip))
}

/// Strongly convection-dominated transport of discontinuous inflow data,
/// used to check the discrete maximum principle: `eps = 1e-5`, `b = (2, 1)`,
/// `c = 0`, `f = 0`, `u_D = 1` on the bottom edge and the lower half of the
/// left edge, 0 elsewhere. `sigma = 0`, so the estimator does not apply.
pub fn dmp_test() -> Problem {
    Problem::new("dmp_test", 1e-5, 0.0)
        .with_convection(|_| [2.0, 1.0])
        .with_divergence(|_| 0.0)
        .with_dirichlet(|p| {
            if p[1] <= 1e-12 || (p[0] <= 1e-12 && p[1] <= 0.5) {
                1.0
            } else {
                0.0
            }
        })
}
