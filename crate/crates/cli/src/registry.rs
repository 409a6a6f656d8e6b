//! The benchmark registry: every problem carries its domain, forcing,
//! exact solution (when known in closed form), and training defaults.

use adfpinn_core::field::Field;
use adfpinn_core::geometry::{AdfMethod, Polygon};
use adfpinn_core::net::Activation;
use adfpinn_core::sample::{Domain, Strategy};
use adfpinn_core::solver::ResidualOp;
use std::f64::consts::PI;

/// How a problem is solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Collocation,
    Ritz,
    Eigen,
    Eikonal,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Collocation => "collocation",
            Method::Ritz => "ritz",
            Method::Eigen => "eigen",
            Method::Eikonal => "eikonal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "collocation" => Some(Method::Collocation),
            "ritz" => Some(Method::Ritz),
            "eigen" => Some(Method::Eigen),
            "eikonal" => Some(Method::Eikonal),
            _ => None,
        }
    }
}

/// Problem family; drives ansatz and loss assembly in `run`.
#[derive(Clone, Debug)]
pub enum Kind {
    /// 1D rod `u'' + b = 0` with Dirichlet conditions at both ends.
    RodDirichlet { g_left: f64, g_right: f64 },
    /// 1D rod with `u(0) = 1/2`, `u'(1) = 0` (superposed structure).
    RodMixedI,
    /// Unit point load at the origin on `(-1,1)`: Ritz with `-u(0)` work.
    RodPointLoad,
    /// Lowest vibration mode on `(0,1)` by Rayleigh-quotient descent.
    RodEigen,
    /// `u'' = alpha u'`, `u(0)=0`, `u(1)=1`.
    AdvectionDiffusion { alpha: f64 },
    /// Clamped beam with a unit point moment at `x = 1/2`.
    BeamPointMoment,
    /// `-lap u = sin(k pi x) sin(k pi y)` on the biunit square, `u = 0`.
    HeatSquare { k: i32 },
    /// Laplace on the unit square, `u = sin(pi x)` on the top edge.
    LaplaceSquareSin,
    /// Laplace on the annulus, `u = 1` outside, `u = 2` inside.
    AnnulusDirichlet,
    /// Same annulus with a Robin condition on the inner circle.
    AnnulusMixed,
    /// Harmonic coordinate of the corner vertex on the unit square.
    HarmonicSquare,
    /// Harmonic coordinate of the origin vertex on the L-shaped polygon
    /// (property mode: no closed-form reference).
    HarmonicLShape,
    /// Clamped unit-disk Kirchhoff plate under unit load.
    PlateDisk,
    /// Signed distance to the boundary of `(-1/2,1/2)^2` in the biunit box.
    EikonalSquare,
    /// Signed distance to an ellipse interface (property mode).
    EikonalEllipse,
    /// Signed distance to an L-shaped polygon interface (property mode).
    EikonalPolygon,
    /// Poisson on the 4D hypercube; `product = true` uses the plain
    /// product ansatz instead of the R-equivalence join.
    Poisson4d { product: bool },
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub kind: Kind,
    pub dim: usize,
    pub domain: Domain,
    pub residual_op: ResidualOp,
    pub forcing: Field,
    pub exact: Option<Field>,
    pub methods: &'static [Method],
    pub adf_choices: &'static [AdfMethod],
    pub default_method: Method,
    pub default_adf: AdfMethod,
    pub default_arch: &'static [usize],
    pub default_activation_collocation: Activation,
    pub default_epochs: usize,
    pub default_n_interior: usize,
    pub default_n_boundary: usize,
    pub default_strategy: Strategy,
    pub default_delta: f64,
    pub grid_per_axis: usize,
    /// Keep collocation points away from these singular forcing points.
    pub excluded_points: Vec<(Vec<f64>, f64)>,
}

fn unit_interval() -> Domain {
    Domain::Interval { a: 0.0, b: 1.0 }
}

fn x() -> Field {
    Field::x()
}

fn c(v: f64) -> Field {
    Field::constant(v)
}

pub fn unit_square_poly() -> Polygon {
    Polygon::simple(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
}

pub fn biunit_square_poly() -> Polygon {
    Polygon::simple(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap()
}

pub fn l_shape_poly() -> Polygon {
    Polygon::simple(vec![
        [0.0, 0.0],
        [1.0, 0.0],
        [1.0, 0.5],
        [0.5, 0.5],
        [0.5, 1.0],
        [0.0, 1.0],
    ])
    .unwrap()
}

pub fn interface_square_poly() -> Polygon {
    Polygon::simple(vec![[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]).unwrap()
}

fn r_field() -> Field {
    (Field::x() * Field::x() + Field::y() * Field::y()).sqrt()
}

/// Exact signed distance to the boundary of an axis-aligned square of
/// half-width `a` (negative inside).
fn box_sdf(a: f64) -> Field {
    let qx = Field::x().abs() - c(a);
    let qy = Field::y().abs() - c(a);
    let outside =
        (qx.relu() * qx.relu() + qy.relu() * qy.relu()).sqrt();
    let inside = qx.max(&qy).min(&c(0.0));
    outside + inside
}

/// Sum of two Gaussians used by the RBF rod example.
pub const RBF_GAMMAS: [f64; 2] = [9.0, 10.0];
pub const RBF_CENTERS: [f64; 2] = [0.25, 0.6];

fn gaussian_sum() -> Field {
    let mut u = c(0.0);
    for (g, a) in RBF_GAMMAS.iter().zip(RBF_CENTERS.iter()) {
        let d = x() - c(*a);
        u = u + (-(d.clone() * d).scale(*g)).exp();
    }
    u
}

fn gaussian_sum_forcing() -> Field {
    // b = -u'' = sum exp(-g d^2) (2g - 4 g^2 d^2)
    let mut b = c(0.0);
    for (g, a) in RBF_GAMMAS.iter().zip(RBF_CENTERS.iter()) {
        let d = x() - c(*a);
        let d2 = d.clone() * d;
        b = b + (-(d2.clone()).scale(*g)).exp() * (c(2.0 * g) - d2.scale(4.0 * g * g));
    }
    b
}

const COLL: &[Method] = &[Method::Collocation];
const RITZ: &[Method] = &[Method::Ritz];
const COLL_RITZ: &[Method] = &[Method::Collocation, Method::Ritz];
const EIG: &[Method] = &[Method::Eigen];
const EIK: &[Method] = &[Method::Eikonal];

const REQ_PRODUCT: &[AdfMethod] = &[AdfMethod::Req, AdfMethod::Product];
const REQ_MVP_PRODUCT: &[AdfMethod] = &[AdfMethod::Req, AdfMethod::Mvp, AdfMethod::Product];
const REQ_MVP: &[AdfMethod] = &[AdfMethod::Req, AdfMethod::Mvp];
const EXACT_REQ: &[AdfMethod] = &[AdfMethod::Exact, AdfMethod::Req];

fn rod(
    name: &'static str,
    description: &'static str,
    kind: Kind,
    domain: Domain,
    forcing: Field,
    exact: Option<Field>,
    arch: &'static [usize],
    methods: &'static [Method],
    default_method: Method,
) -> ProblemSpec {
    ProblemSpec {
        name,
        description,
        kind,
        dim: 1,
        domain,
        residual_op: ResidualOp::NegLaplacian,
        forcing,
        exact,
        methods,
        adf_choices: REQ_PRODUCT,
        default_method,
        default_adf: AdfMethod::Req,
        default_arch: arch,
        default_activation_collocation: Activation::Tanh,
        default_epochs: 10_000,
        default_n_interior: 100,
        default_n_boundary: 2,
        default_strategy: Strategy::Grid,
        default_delta: 0.01,
        grid_per_axis: 201,
        excluded_points: vec![],
    }
}

/// All registered benchmark problems.
pub fn registry() -> Vec<ProblemSpec> {
    let mut out = Vec::new();

    // --- 1D rod family ---
    let b1 = c(1.0) - x().scale(2.0) + x().powi(2).scale(10.0);
    let u1 = c(0.5) - x().powi(2).scale(0.5) + x().powi(3).scale(1.0 / 3.0)
        - x().powi(4).scale(10.0 / 12.0);
    out.push(rod(
        "rod-ex1",
        "elastic rod, quadratic body force, Dirichlet ends",
        Kind::RodDirichlet { g_left: 0.5, g_right: -0.5 },
        unit_interval(),
        b1.clone(),
        Some(u1),
        &[30, 30],
        COLL_RITZ,
        Method::Collocation,
    ));

    let u2 = c(0.5) + x().scale(10.0 / 3.0) - x().powi(2).scale(0.5)
        + x().powi(3).scale(1.0 / 3.0)
        - x().powi(4).scale(10.0 / 12.0);
    let mut ex2 = rod(
        "rod-ex2",
        "elastic rod, Dirichlet at x=0 and traction-free at x=1",
        Kind::RodMixedI,
        unit_interval(),
        b1,
        Some(u2),
        &[50, 50],
        COLL,
        Method::Collocation,
    );
    ex2.adf_choices = &[AdfMethod::Req];
    out.push(ex2);

    let k = 1.0;
    out.push(rod(
        "rod-ex3",
        "elastic rod, sinusoidal body force (spectral bias probe)",
        Kind::RodDirichlet { g_left: 0.0, g_right: 0.0 },
        unit_interval(),
        -(x().scale(k * PI)).sin(),
        Some(-(x().scale(k * PI)).sin().scale(1.0 / (PI * PI * k * k))),
        &[30, 30],
        COLL_RITZ,
        Method::Collocation,
    ));

    let mut ex4 = rod(
        "rod-ex4",
        "elastic rod, Heaviside body force",
        Kind::RodDirichlet { g_left: 0.0, g_right: -0.5 },
        Domain::Interval { a: -1.0, b: 1.0 },
        x().step(),
        Some(x().step() * (-x().powi(2).scale(0.5))),
        &[50, 50],
        COLL,
        Method::Collocation,
    );
    ex4.default_delta = 0.02;
    ex4.excluded_points = vec![(vec![0.0], 1e-6)];
    out.push(ex4);

    let mut ex5 = rod(
        "rod-ex5",
        "elastic rod, unit point load at the origin (Ritz energy -1/2)",
        Kind::RodPointLoad,
        Domain::Interval { a: -1.0, b: 1.0 },
        c(0.0),
        Some(c(1.0) + x() * (-x()).step()),
        &[50, 50],
        RITZ,
        Method::Ritz,
    );
    ex5.default_delta = 1e-4;
    out.push(ex5);

    let mut ex6 = rod(
        "rod-ex6",
        "elastic rod, weakly singular body force 2 x^(-4/3)/9",
        Kind::RodDirichlet { g_left: 0.0, g_right: 1.0 },
        unit_interval(),
        x().powf(-4.0 / 3.0).scale(2.0 / 9.0),
        Some(x().powf(2.0 / 3.0)),
        &[50, 50],
        COLL,
        Method::Collocation,
    );
    ex6.excluded_points = vec![(vec![0.0], 1e-6)];
    out.push(ex6);

    let u7 = gaussian_sum();
    let mut ex7 = rod(
        "rod-ex7",
        "elastic rod, Gaussian-sum solution on a fixed-center RBF network",
        Kind::RodDirichlet {
            g_left: u7.eval(&[0.0f64][..]),
            g_right: u7.eval(&[1.0f64][..]),
        },
        unit_interval(),
        gaussian_sum_forcing(),
        Some(u7),
        &[10],
        COLL_RITZ,
        Method::Collocation,
    );
    ex7.default_activation_collocation = Activation::Gaussian;
    out.push(ex7);

    let mut eig = rod(
        "rod-eigen",
        "lowest longitudinal vibration mode, Rayleigh quotient descent",
        Kind::RodEigen,
        unit_interval(),
        c(0.0),
        None,
        &[50, 50, 50],
        EIG,
        Method::Eigen,
    );
    eig.default_delta = 1e-4;
    out.push(eig);

    for alpha in [1.0, 5.0, 10.0, 50.0] {
        let name: &'static str = match alpha as i64 {
            1 => "advdiff-a1",
            5 => "advdiff-a5",
            10 => "advdiff-a10",
            _ => "advdiff-a50",
        };
        let arch: &'static [usize] = if alpha > 10.0 { &[50, 50, 50] } else { &[50, 50] };
        let exact = ((x().scale(alpha)).exp() - c(1.0)).scale(1.0 / (alpha.exp() - 1.0));
        let mut spec = rod(
            name,
            "advection-diffusion u'' = alpha u' with boundary layer",
            Kind::AdvectionDiffusion { alpha },
            unit_interval(),
            c(0.0),
            Some(exact),
            arch,
            COLL,
            Method::Collocation,
        );
        spec.residual_op = ResidualOp::AdvectionDiffusion { alpha };
        out.push(spec);
    }

    let beam_exact = (x() - c(0.5)).relu().powi(2).scale(0.5) + x().powi(2).scale(1.0 / 8.0)
        - x().powi(3).scale(0.25);
    let mut beam = rod(
        "beam-point-moment",
        "clamped Euler-Bernoulli beam, unit point moment at midspan",
        Kind::BeamPointMoment,
        unit_interval(),
        c(0.0),
        Some(beam_exact),
        &[50, 50],
        RITZ,
        Method::Ritz,
    );
    beam.residual_op = ResidualOp::Biharmonic;
    beam.default_delta = 1e-4;
    out.push(beam);

    // --- 2D problems ---
    for k in [1i32, 2] {
        let kk = k as f64;
        let f = (x().scale(kk * PI)).sin() * (Field::y().scale(kk * PI)).sin();
        out.push(ProblemSpec {
            name: if k == 1 { "heat-square-k1" } else { "heat-square-k2" },
            description: "steady heat conduction on the biunit square, homogeneous Dirichlet",
            kind: Kind::HeatSquare { k },
            dim: 2,
            domain: Domain::Rect { lo: [-1.0, -1.0], hi: [1.0, 1.0] },
            residual_op: ResidualOp::NegLaplacian,
            forcing: f.clone(),
            exact: Some(f.scale(1.0 / (2.0 * kk * kk * PI * PI))),
            methods: COLL_RITZ,
            adf_choices: REQ_MVP_PRODUCT,
            default_method: Method::Collocation,
            default_adf: AdfMethod::Req,
            default_arch: &[50, 50],
            default_activation_collocation: Activation::Tanh,
            default_epochs: 3000,
            default_n_interior: 5000,
            default_n_boundary: 400,
            default_strategy: Strategy::UniformRandom,
            default_delta: 0.02,
            grid_per_axis: 201,
            excluded_points: vec![],
        });
    }

    let denom = (-PI).exp() + PI.exp();
    out.push(ProblemSpec {
        name: "laplace-square-sin",
        description: "Laplace on the unit square with sin(pi x) on the top edge",
        kind: Kind::LaplaceSquareSin,
        dim: 2,
        domain: Domain::Rect { lo: [0.0, 0.0], hi: [1.0, 1.0] },
        residual_op: ResidualOp::NegLaplacian,
        forcing: c(0.0),
        exact: Some(
            ((-Field::y().scale(PI)).exp() + (Field::y().scale(PI)).exp())
                * (x().scale(PI)).sin()
                .scale(1.0 / denom),
        ),
        methods: COLL_RITZ,
        adf_choices: REQ_MVP,
        default_method: Method::Collocation,
        default_adf: AdfMethod::Req,
        default_arch: &[50, 50],
        default_activation_collocation: Activation::Tanh,
        default_epochs: 3000,
        default_n_interior: 5000,
        default_n_boundary: 400,
        default_strategy: Strategy::UniformRandom,
        default_delta: 0.01,
        grid_per_axis: 201,
        excluded_points: vec![],
    });

    let annulus_exact = c(1.0) - r_field().ln().scale(1.0 / 4.0f64.ln());
    out.push(ProblemSpec {
        name: "annulus-dirichlet",
        description: "Laplace on the annulus, u=1 outside, u=2 inside",
        kind: Kind::AnnulusDirichlet,
        dim: 2,
        domain: Domain::Annulus { r_inner: 0.25, r_outer: 1.0 },
        residual_op: ResidualOp::NegLaplacian,
        forcing: c(0.0),
        exact: Some(annulus_exact.clone()),
        methods: COLL_RITZ,
        adf_choices: EXACT_REQ,
        default_method: Method::Collocation,
        default_adf: AdfMethod::Exact,
        default_arch: &[50, 50],
        default_activation_collocation: Activation::Tanh,
        default_epochs: 6000,
        default_n_interior: 600,
        default_n_boundary: 96,
        default_strategy: Strategy::Halton,
        default_delta: 0.0,
        grid_per_axis: 201,
        excluded_points: vec![],
    });

    out.push(ProblemSpec {
        name: "annulus-mixed",
        description: "annulus with Dirichlet outside and Robin du/dn + u = 2 + 4/ln4 inside",
        kind: Kind::AnnulusMixed,
        dim: 2,
        domain: Domain::Annulus { r_inner: 0.25, r_outer: 1.0 },
        residual_op: ResidualOp::NegLaplacian,
        forcing: c(0.0),
        exact: Some(annulus_exact),
        methods: COLL,
        adf_choices: EXACT_REQ,
        default_method: Method::Collocation,
        default_adf: AdfMethod::Exact,
        default_arch: &[50, 50],
        default_activation_collocation: Activation::Tanh,
        default_epochs: 6000,
        default_n_interior: 600,
        default_n_boundary: 96,
        default_strategy: Strategy::Halton,
        default_delta: 0.0,
        grid_per_axis: 201,
        excluded_points: vec![],
    });

    out.push(ProblemSpec {
        name: "harmonic-square",
        description: "harmonic coordinate of the corner vertex on the unit square (Ritz)",
        kind: Kind::HarmonicSquare,
        dim: 2,
        domain: Domain::Rect { lo: [0.0, 0.0], hi: [1.0, 1.0] },
        residual_op: ResidualOp::NegLaplacian,
        forcing: c(0.0),
        exact: Some((c(1.0) - x()) * (c(1.0) - Field::y())),
        methods: RITZ,
        adf_choices: REQ_MVP,
        default_method: Method::Ritz,
        default_adf: AdfMethod::Req,
        default_arch: &[50, 50],
        default_activation_collocation: Activation::Tanh,
        default_epochs: 4000,
        default_n_interior: 5000,
        default_n_boundary: 400,
        default_strategy: Strategy::UniformRandom,
        default_delta: 1e-4,
        grid_per_axis: 201,
        excluded_points: vec![],
    });

    out.push(ProblemSpec {
        name: "harmonic-lshape",
        description: "harmonic coordinate of the origin vertex on the L-shaped polygon (Ritz, property mode)",
        kind: Kind::HarmonicLShape,
        dim: 2,
        domain: Domain::Poly(l_shape_poly()),
        residual_op: ResidualOp::NegLaplacian,
        forcing: c(0.0),
        exact: None,
        methods: RITZ,
        adf_choices: REQ_MVP,
        default_method: Method::Ritz,
        default_adf: AdfMethod::Req,
        default_arch: &[50, 50],
        default_activation_collocation: Activation::Tanh,
        default_epochs: 4000,
        default_n_interior: 4000,
        default_n_boundary: 400,
        default_strategy: Strategy::UniformRandom,
        default_delta: 1e-4,
        grid_per_axis: 201,
        excluded_points: vec![],
    });

    let r2 = Field::x() * Field::x() + Field::y() * Field::y();
    let plate_exact = (c(1.0) - r2.clone()) * (c(1.0) - r2) * c(1.0 / 64.0);
    out.push(ProblemSpec {
        name: "plate-clamped-disk",
        description: "clamped circular Kirchhoff plate under unit transverse load",
        kind: Kind::PlateDisk,
        dim: 2,
        domain: Domain::Disk { center: [0.0, 0.0], r: 1.0 },
        residual_op: ResidualOp::Biharmonic,
        forcing: c(1.0),
        exact: Some(plate_exact),
        methods: COLL_RITZ,
        adf_choices: &[AdfMethod::Req, AdfMethod::Exact, AdfMethod::Mvp],
        default_method: Method::Ritz,
        default_adf: AdfMethod::Req,
        default_arch: &[50, 50],
        default_activation_collocation: Activation::RePU3,
        default_epochs: 10_000,
        default_n_interior: 2800,
        default_n_boundary: 200,
        default_strategy: Strategy::UniformRandom,
        default_delta: 0.0,
        grid_per_axis: 201,
        excluded_points: vec![],
    });

    out.push(ProblemSpec {
        name: "eikonal-square",
        description: "signed distance to the boundary of the half-unit square",
        kind: Kind::EikonalSquare,
        dim: 2,
        domain: Domain::Rect { lo: [-1.0, -1.0], hi: [1.0, 1.0] },
        residual_op: ResidualOp::Eikonal,
        forcing: c(1.0),
        exact: Some(box_sdf(0.5)),
        methods: EIK,
        adf_choices: REQ_MVP,
        default_method: Method::Eikonal,
        default_adf: AdfMethod::Req,
        default_arch: &[30, 30, 30],
        default_activation_collocation: Activation::RePU3,
        default_epochs: 6000,
        default_n_interior: 10_000,
        default_n_boundary: 400,
        default_strategy: Strategy::UniformRandom,
        default_delta: 0.0,
        grid_per_axis: 201,
        excluded_points: vec![],
    });

    out.push(ProblemSpec {
        name: "eikonal-ellipse",
        description: "signed distance to an ellipse interface (property mode)",
        kind: Kind::EikonalEllipse,
        dim: 2,
        domain: Domain::Rect { lo: [-1.0, -1.0], hi: [1.0, 1.0] },
        residual_op: ResidualOp::Eikonal,
        forcing: c(1.0),
        exact: None,
        methods: EIK,
        adf_choices: REQ_MVP,
        default_method: Method::Eikonal,
        default_adf: AdfMethod::Req,
        default_arch: &[50, 50],
        default_activation_collocation: Activation::RePU3,
        default_epochs: 6000,
        default_n_interior: 10_000,
        default_n_boundary: 400,
        default_strategy: Strategy::UniformRandom,
        default_delta: 0.0,
        grid_per_axis: 201,
        excluded_points: vec![],
    });

    out.push(ProblemSpec {
        name: "eikonal-polygon",
        description: "signed distance to an L-shaped polygon interface (property mode)",
        kind: Kind::EikonalPolygon,
        dim: 2,
        domain: Domain::Rect { lo: [-1.0, -1.0], hi: [1.0, 1.0] },
        residual_op: ResidualOp::Eikonal,
        forcing: c(1.0),
        exact: None,
        methods: EIK,
        adf_choices: REQ_MVP,
        default_method: Method::Eikonal,
        default_adf: AdfMethod::Req,
        default_arch: &[50, 50],
        default_activation_collocation: Activation::RePU3,
        default_epochs: 6000,
        default_n_interior: 10_000,
        default_n_boundary: 400,
        default_strategy: Strategy::UniformRandom,
        default_delta: 0.0,
        grid_per_axis: 201,
        excluded_points: vec![],
    });

    let mut f4 = c(1.0);
    let mut u4 = c(1.0 / (4.0 * PI * PI));
    for i in 0..4 {
        f4 = f4 * (Field::coord(i).scale(PI)).sin();
        u4 = u4 * (Field::coord(i).scale(PI)).sin();
    }
    for product in [false, true] {
        out.push(ProblemSpec {
            name: if product { "poisson4d-product" } else { "poisson4d-req" },
            description: if product {
                "4D hypercube Poisson with the plain product ansatz (known not to converge)"
            } else {
                "4D hypercube Poisson with the R-equivalence ansatz"
            },
            kind: Kind::Poisson4d { product },
            dim: 4,
            domain: Domain::Hypercube { d: 4 },
            residual_op: ResidualOp::NegLaplacian,
            forcing: f4.clone(),
            exact: Some(u4.clone()),
            methods: COLL,
            adf_choices: if product { &[AdfMethod::Product] } else { REQ_PRODUCT },
            default_method: Method::Collocation,
            default_adf: if product { AdfMethod::Product } else { AdfMethod::Req },
            default_arch: &[100, 100],
            default_activation_collocation: Activation::Tanh,
            default_epochs: 2000,
            default_n_interior: 5000,
            default_n_boundary: 0,
            default_strategy: Strategy::UniformRandom,
            default_delta: 0.0,
            grid_per_axis: 9,
            excluded_points: vec![],
        });
    }

    out
}

/// Look a problem up by name.
pub fn find(name: &str) -> Option<ProblemSpec> {
    registry().into_iter().find(|p| p.name == name)
}
