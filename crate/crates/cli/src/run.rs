//! Problem assembly and execution.

use crate::registry::{self, Kind, Method, ProblemSpec};
use adfpinn_core::autodiff;
use adfpinn_core::field::{Field, FieldEval};
use adfpinn_core::geometry::{
    circle_adf, first_order_normalize, hypercube_adf, mvp_curve_adf, mvp_polygon_adf,
    polygon_adf_req, r_equivalence_join, segment_adf, transfinite_interpolant, AdfMethod,
    ParametricCurve, Point, Polygon, Segment,
};
use adfpinn_core::net::{Activation, Mlp, Network, RbfNet};
use adfpinn_core::sample::{eval_grid, sample_interior, Domain, PieceSamples, PointSet};
use adfpinn_core::solver::{
    eval_values, train, EvalGrid, LossSpec, PointTerm, Precision, ResidualOp, TrainConfig,
    TrainTrace,
};
use adfpinn_core::structures::Ansatz;
use anyhow::{anyhow, bail, Context, Result};

/// Which trial function the loss is built on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossMode {
    /// Boundary conditions exact in the ansatz; interior residual only.
    ExactBc,
    /// Bare network with boundary misfit terms.
    Standard,
}

#[derive(Clone, Debug)]
pub struct Options {
    pub method: Option<Method>,
    pub adf: Option<AdfMethod>,
    pub m: i32,
    pub p: i32,
    pub arch: Option<Vec<usize>>,
    pub activation: Option<Activation>,
    pub epochs: Option<usize>,
    pub lr: f64,
    pub seed: u64,
    pub n_interior: Option<usize>,
    pub n_boundary: Option<usize>,
    pub delta: Option<f64>,
    pub loss_mode: LossMode,
    pub loss_weight: Option<f64>,
    pub precision: Precision,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            method: None,
            adf: None,
            m: 1,
            p: 1,
            arch: None,
            activation: None,
            epochs: None,
            lr: 1e-3,
            seed: 0,
            n_interior: None,
            n_boundary: None,
            delta: None,
            loss_mode: LossMode::ExactBc,
            loss_weight: None,
            precision: Precision::F64,
        }
    }
}

#[derive(Debug)]
pub struct RunResult {
    pub name: String,
    pub method: Method,
    pub adf: AdfMethod,
    pub trace: TrainTrace,
    pub final_loss: f64,
    pub normalized_error: Option<f64>,
    pub max_abs_error: Option<f64>,
    /// Extracted natural frequency for the eigenproblem.
    pub omega: Option<f64>,
    /// Largest boundary-condition violation at check samples.
    pub boundary_misfit: Option<f64>,
    pub grid: Vec<Vec<f64>>,
    pub u_pred: Vec<f64>,
    pub u_exact: Option<Vec<f64>>,
    pub ansatz: Ansatz,
}

struct Assembled {
    ansatz: Ansatz,
    loss: LossSpec,
    /// rejection ADF for interior sampling, when the domain test alone
    /// is not enough
    sampling_adf: Option<Field>,
    /// boundary samples needed by the loss (standard mode), already
    /// matched to the piece indices in the loss spec
    boundary: Vec<PieceSamples>,
    /// boundary check set: points with expected values (exact BCs)
    checks: Vec<(Vec<f64>, f64)>,
    /// a point strictly inside the interface where the solution must be
    /// negative; picks between the two signs of an Eikonal minimizer
    sign_anchor: Option<Vec<f64>>,
}

fn affine_edge_data(seg: &Segment, va: f64, vb: f64) -> Field {
    let (a, b) = (seg.start(), seg.end());
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = ((Field::x() - Field::constant(a[0])).scale(d[0])
        + (Field::y() - Field::constant(a[1])).scale(d[1]))
    .scale(1.0 / len2);
    Field::constant(va) + t * Field::constant(vb - va)
}

fn interval_phis(domain: &Domain) -> (Field, Field) {
    match domain {
        Domain::Interval { a, b } => {
            (Field::x() - Field::constant(*a), Field::constant(*b) - Field::x())
        }
        _ => unreachable!("1D problems use interval domains"),
    }
}

fn join_1d(phi1: &Field, phi2: &Field, adf: AdfMethod, m: i32) -> Result<Field> {
    Ok(match adf {
        AdfMethod::Req => r_equivalence_join(&[phi1.clone(), phi2.clone()], m)?,
        AdfMethod::Product => phi1.clone() * phi2.clone(),
        other => bail!("ADF method {other:?} is not defined for interval domains"),
    })
}

fn polygon_phi(poly: &Polygon, adf: AdfMethod, m: i32) -> Result<Field> {
    Ok(match adf {
        AdfMethod::Req => polygon_adf_req(poly, m)?,
        AdfMethod::Mvp => mvp_polygon_adf(poly),
        other => bail!("ADF method {other:?} is not defined for polygon boundaries"),
    })
}

fn polygon_boundary_samples(poly: &Polygon, n_total: usize) -> Vec<PieceSamples> {
    let edges = poly.edges();
    let per = (n_total / edges.len()).max(2);
    edges
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let (a, b) = (e.start(), e.end());
            PieceSamples {
                piece: i,
                points: (0..per)
                    .map(|k| {
                        let t = (k as f64 + 0.5) / per as f64;
                        vec![a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
                    })
                    .collect(),
                measure: e.length(),
            }
        })
        .collect()
}

fn checks_from_pieces(pieces: &[PieceSamples], data: &[Field]) -> Vec<(Vec<f64>, f64)> {
    let mut out = Vec::new();
    for p in pieces {
        let g = &data[p.piece];
        for x in &p.points {
            out.push((x.clone(), g.eval(&x[..])));
        }
    }
    out
}

fn make_net(dim: usize, arch: &[usize], activation: Activation, seed: u64) -> Result<Network> {
    let mut widths = vec![dim];
    widths.extend_from_slice(arch);
    widths.push(1);
    Ok(Network::Mlp(Mlp::init(&widths, activation, seed)?))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    spec: &ProblemSpec,
    method: Method,
    adf: AdfMethod,
    opts: &Options,
    activation: Activation,
    arch: &[usize],
    n_boundary: usize,
) -> Result<Assembled> {
    let dim = spec.dim;
    let op = spec.residual_op;
    let mk_net = |seed_off: u64| make_net(dim, arch, activation, opts.seed.wrapping_add(seed_off));
    let zero = Field::constant(0.0);

    let standard_from = |pieces: Vec<PieceSamples>,
                         data: Vec<Field>,
                         net: Network|
     -> Result<Assembled> {
        let loss_data = pieces.iter().map(|p| (p.piece, data[p.piece].clone())).collect();
        let checks = checks_from_pieces(&pieces, &data);
        Ok(Assembled {
            ansatz: Ansatz::bare(net),
            loss: LossSpec::StandardPinn { op, data: loss_data, w: opts.loss_weight },
            sampling_adf: None,
            boundary: pieces,
            checks,
            sign_anchor: None,
        })
    };

    match &spec.kind {
        Kind::RodDirichlet { .. } | Kind::AdvectionDiffusion { .. } => {
            let (gl, gr) = match &spec.kind {
                Kind::RodDirichlet { g_left, g_right } => (*g_left, *g_right),
                _ => (0.0, 1.0),
            };
            let (phi1, phi2) = interval_phis(&spec.domain);
            let g = transfinite_interpolant(&[
                (phi1.clone(), Field::constant(gl), 1),
                (phi2.clone(), Field::constant(gr), 1),
            ])?;
            let (a, b) = match spec.domain {
                Domain::Interval { a, b } => (a, b),
                _ => unreachable!(),
            };
            if opts.loss_mode == LossMode::Standard {
                let pieces = spec.domain.sample_boundary(2);
                let data = vec![Field::constant(gl), Field::constant(gr)];
                let net = if spec.name == "rod-ex7" && activation == Activation::Gaussian {
                    rbf_net(opts.seed)
                } else {
                    mk_net(0)?
                };
                return standard_from(pieces, data, net);
            }
            let phi = join_1d(&phi1, &phi2, adf, opts.m)?;
            let net = if spec.name == "rod-ex7" && activation == Activation::Gaussian {
                rbf_net(opts.seed)
            } else {
                mk_net(0)?
            };
            let ansatz = Ansatz::dirichlet(&g, &phi, net);
            let loss = match method {
                Method::Ritz => LossSpec::RitzPoisson { robin: vec![], point_terms: vec![] },
                _ => LossSpec::Collocation { op },
            };
            Ok(Assembled {
                ansatz,
                loss,
                sampling_adf: None,
                boundary: vec![],
                checks: vec![(vec![a], gl), (vec![b], gr)],
                sign_anchor: None,
            })
        }
        Kind::RodMixedI => {
            let (phi1, phi2) = interval_phis(&spec.domain);
            let ansatz = Ansatz::mixed_i(
                &Field::constant(0.5),
                &zero,
                &zero,
                &phi1,
                &phi2,
                mk_net(0)?,
                None,
            );
            Ok(Assembled {
                ansatz,
                loss: LossSpec::Collocation { op },
                sampling_adf: None,
                boundary: vec![],
                checks: vec![(vec![0.0], 0.5)],
                sign_anchor: None,
            })
        }
        Kind::RodPointLoad => {
            let phi = Field::x() + Field::constant(1.0);
            let ansatz = Ansatz::dirichlet(&zero, &phi, mk_net(0)?);
            Ok(Assembled {
                ansatz,
                loss: LossSpec::RitzPoisson {
                    robin: vec![],
                    point_terms: vec![PointTerm {
                        point: vec![0.0],
                        value_coef: -1.0,
                        grad_coef: vec![],
                    }],
                },
                sampling_adf: None,
                boundary: vec![],
                checks: vec![(vec![-1.0], 0.0)],
                sign_anchor: None,
            })
        }
        Kind::RodEigen => {
            let (phi1, phi2) = interval_phis(&spec.domain);
            let phi = join_1d(&phi1, &phi2, adf, opts.m)?;
            let ansatz = Ansatz::dirichlet(&zero, &phi, mk_net(0)?);
            Ok(Assembled {
                ansatz,
                loss: LossSpec::Rayleigh,
                sampling_adf: None,
                boundary: vec![],
                checks: vec![(vec![0.0], 0.0), (vec![1.0], 0.0)],
                sign_anchor: None,
            })
        }
        Kind::BeamPointMoment => {
            let (phi1, phi2) = interval_phis(&spec.domain);
            let phi = join_1d(&phi1, &phi2, AdfMethod::Req, 1)?;
            let ansatz = Ansatz::clamped_plate(&phi, mk_net(0)?);
            Ok(Assembled {
                ansatz,
                loss: LossSpec::RitzPlate {
                    point_terms: vec![PointTerm {
                        point: vec![0.5],
                        value_coef: 0.0,
                        grad_coef: vec![1.0],
                    }],
                },
                sampling_adf: None,
                boundary: vec![],
                checks: vec![(vec![0.0], 0.0), (vec![1.0], 0.0)],
                sign_anchor: None,
            })
        }
        Kind::HeatSquare { .. } => {
            let poly = registry::biunit_square_poly();
            if opts.loss_mode == LossMode::Standard {
                let pieces = spec.domain.sample_boundary(n_boundary);
                let data = vec![zero.clone(), zero.clone(), zero.clone(), zero.clone()];
                return standard_from(pieces, data, mk_net(0)?);
            }
            let phi = match adf {
                AdfMethod::Product => {
                    (Field::constant(1.0) - Field::x() * Field::x())
                        * (Field::constant(1.0) - Field::y() * Field::y())
                }
                other => polygon_phi(&poly, other, opts.m)?,
            };
            let ansatz = Ansatz::dirichlet(&zero, &phi, mk_net(0)?);
            let loss = match method {
                Method::Ritz => LossSpec::RitzPoisson { robin: vec![], point_terms: vec![] },
                _ => LossSpec::Collocation { op },
            };
            let pieces = spec.domain.sample_boundary(400);
            let checks = pieces
                .iter()
                .flat_map(|p| p.points.iter().map(|x| (x.clone(), 0.0)))
                .collect();
            Ok(Assembled {
                ansatz,
                loss,
                sampling_adf: None,
                boundary: vec![],
                checks,
                sign_anchor: None,
            })
        }
        Kind::LaplaceSquareSin => {
            let poly = registry::unit_square_poly();
            let edges = poly.edges();
            // piece 2 is the top edge y = 1 carrying sin(pi x)
            let data: Vec<Field> = (0..4)
                .map(|i| {
                    if i == 2 {
                        (Field::x().scale(std::f64::consts::PI)).sin()
                    } else {
                        zero.clone()
                    }
                })
                .collect();
            if opts.loss_mode == LossMode::Standard {
                let pieces = spec.domain.sample_boundary(n_boundary);
                return standard_from(pieces, data, mk_net(0)?);
            }
            let g = transfinite_interpolant(
                &edges
                    .iter()
                    .zip(&data)
                    .map(|(e, d)| (segment_adf(e), d.clone(), 1))
                    .collect::<Vec<_>>(),
            )?;
            let phi = polygon_phi(&poly, adf, opts.m)?;
            let ansatz = Ansatz::dirichlet(&g, &phi, mk_net(0)?);
            let loss = match method {
                Method::Ritz => LossSpec::RitzPoisson { robin: vec![], point_terms: vec![] },
                _ => LossSpec::Collocation { op },
            };
            let pieces = polygon_boundary_samples(&poly, 400);
            let checks = checks_from_pieces(&pieces, &data);
            Ok(Assembled {
                ansatz,
                loss,
                sampling_adf: None,
                boundary: vec![],
                checks,
                sign_anchor: None,
            })
        }
        Kind::AnnulusDirichlet => {
            let r = (Field::x() * Field::x() + Field::y() * Field::y()).sqrt();
            let phi1 = Field::constant(1.0) - r.clone();
            let phi2 = r - Field::constant(0.25);
            let data = vec![Field::constant(1.0), Field::constant(2.0)];
            if opts.loss_mode == LossMode::Standard {
                let pieces = spec.domain.sample_boundary(n_boundary);
                return standard_from(pieces, data, mk_net(0)?);
            }
            let g = transfinite_interpolant(&[
                (phi1.clone(), data[0].clone(), 1),
                (phi2.clone(), data[1].clone(), 1),
            ])?;
            let phi = r_equivalence_join(&[phi1, phi2], opts.m)?;
            let ansatz = Ansatz::dirichlet(&g, &phi, mk_net(0)?);
            let loss = match method {
                Method::Ritz => LossSpec::RitzPoisson { robin: vec![], point_terms: vec![] },
                _ => LossSpec::Collocation { op },
            };
            let pieces = spec.domain.sample_boundary(400);
            let checks = checks_from_pieces(&pieces, &data);
            Ok(Assembled {
                ansatz,
                loss,
                sampling_adf: None,
                boundary: vec![],
                checks,
                sign_anchor: None,
            })
        }
        Kind::AnnulusMixed => {
            let r = (Field::x() * Field::x() + Field::y() * Field::y()).sqrt();
            let phi1 = Field::constant(1.0) - r.clone();
            let phi2 = r - Field::constant(0.25);
            let h = 2.0 + 4.0 / 4.0f64.ln();
            let ansatz = Ansatz::mixed_ii(
                &Field::constant(1.0),
                &Field::constant(1.0),
                &Field::constant(h),
                &phi1,
                &phi2,
                mk_net(0)?,
            );
            // Dirichlet is exact on the outer circle only
            let pieces = spec.domain.sample_boundary(400);
            let checks = pieces
                .iter()
                .filter(|p| p.piece == 0)
                .flat_map(|p| p.points.iter().map(|x| (x.clone(), 1.0)))
                .collect();
            Ok(Assembled {
                ansatz,
                loss: LossSpec::Collocation { op },
                sampling_adf: None,
                boundary: vec![],
                checks,
                sign_anchor: None,
            })
        }
        Kind::HarmonicSquare | Kind::HarmonicLShape => {
            let poly = match spec.kind {
                Kind::HarmonicSquare => registry::unit_square_poly(),
                _ => registry::l_shape_poly(),
            };
            let edges = poly.edges();
            // piecewise affine hat data: 1 at the origin vertex
            let hat = [0.0, 0.0];
            let data: Vec<Field> = edges
                .iter()
                .map(|e| {
                    let va = if e.start() == hat { 1.0 } else { 0.0 };
                    let vb = if e.end() == hat { 1.0 } else { 0.0 };
                    if va == 0.0 && vb == 0.0 {
                        zero.clone()
                    } else {
                        affine_edge_data(e, va, vb)
                    }
                })
                .collect();
            let g = transfinite_interpolant(
                &edges
                    .iter()
                    .zip(&data)
                    .map(|(e, d)| (segment_adf(e), d.clone(), 1))
                    .collect::<Vec<_>>(),
            )?;
            if opts.loss_mode == LossMode::Standard {
                let pieces = polygon_boundary_samples(&poly, n_boundary);
                return standard_from(pieces, data, mk_net(0)?);
            }
            let phi = polygon_phi(&poly, adf, opts.m)?;
            let sampling_adf = phi.clone();
            let ansatz = Ansatz::dirichlet(&g, &phi, mk_net(0)?);
            let pieces = polygon_boundary_samples(&poly, 500);
            let checks = checks_from_pieces(&pieces, &data);
            Ok(Assembled {
                ansatz,
                loss: LossSpec::RitzPoisson { robin: vec![], point_terms: vec![] },
                sampling_adf: Some(sampling_adf),
                boundary: vec![],
                checks,
                sign_anchor: None,
            })
        }
        Kind::PlateDisk => {
            let phi = match adf {
                AdfMethod::Mvp => {
                    mvp_curve_adf(&ParametricCurve::ellipse(1.0, 1.0), opts.p, 256)?
                }
                _ => circle_adf(&Point::xy(0.0, 0.0), 1.0)?,
            };
            let ansatz = Ansatz::clamped_plate(&phi, mk_net(0)?);
            let loss = match method {
                Method::Ritz => LossSpec::RitzPlate { point_terms: vec![] },
                _ => LossSpec::Collocation { op },
            };
            let pieces = spec.domain.sample_boundary(400);
            let checks = pieces
                .iter()
                .flat_map(|p| p.points.iter().map(|x| (x.clone(), 0.0)))
                .collect();
            Ok(Assembled {
                ansatz,
                loss,
                sampling_adf: None,
                boundary: vec![],
                checks,
                sign_anchor: None,
            })
        }
        Kind::EikonalSquare | Kind::EikonalPolygon => {
            let poly = match spec.kind {
                Kind::EikonalSquare => registry::interface_square_poly(),
                _ => {
                    // L-shape centered in the biunit square
                    let shifted: Vec<[f64; 2]> = registry::l_shape_poly().loops()[0]
                        .iter()
                        .map(|v| [v[0] - 0.5, v[1] - 0.5])
                        .collect();
                    Polygon::simple(shifted)?
                }
            };
            let pieces = polygon_boundary_samples(&poly, n_boundary.max(400));
            if opts.loss_mode == LossMode::Standard {
                let data = vec![zero.clone(); poly.edges().len()];
                return standard_from(pieces, data, mk_net(0)?);
            }
            let phi = polygon_phi(&poly, adf, opts.m)?;
            let ansatz = Ansatz::dirichlet(&zero, &phi, mk_net(0)?);
            let checks = pieces
                .iter()
                .flat_map(|p| p.points.iter().map(|x| (x.clone(), 0.0)))
                .collect();
            let anchor = match spec.kind {
                Kind::EikonalSquare => vec![0.0, 0.0],
                _ => vec![-0.25, -0.25],
            };
            Ok(Assembled {
                ansatz,
                loss: LossSpec::Collocation { op },
                sampling_adf: None,
                boundary: vec![],
                checks,
                sign_anchor: Some(anchor),
            })
        }
        Kind::EikonalEllipse => {
            let (a, b) = (0.25, 0.15);
            let phi = match adf {
                AdfMethod::Mvp => mvp_curve_adf(&ParametricCurve::ellipse(a, b), opts.p, 256)?,
                _ => {
                    let w = Field::constant(1.0)
                        - Field::x() * Field::x() * Field::constant(1.0 / (a * a))
                        - Field::y() * Field::y() * Field::constant(1.0 / (b * b));
                    first_order_normalize(&w)
                }
            };
            let ansatz = Ansatz::dirichlet(&zero, &phi, mk_net(0)?);
            let curve = ParametricCurve::ellipse(a, b);
            let checks = (0..400)
                .map(|k| {
                    let (p, _) = curve.at((k as f64 + 0.5) / 400.0);
                    (vec![p[0], p[1]], 0.0)
                })
                .collect();
            Ok(Assembled {
                ansatz,
                loss: LossSpec::Collocation { op },
                sampling_adf: None,
                boundary: vec![],
                checks,
                sign_anchor: Some(vec![0.0, 0.0]),
            })
        }
        Kind::Poisson4d { product } => {
            let phi = if *product || adf == AdfMethod::Product {
                let mut prod = Field::constant(1.0);
                for i in 0..4 {
                    prod = prod * (Field::constant(1.0) - Field::coord(i) * Field::coord(i));
                }
                prod
            } else {
                hypercube_adf(4, opts.m)?
            };
            let ansatz = Ansatz::dirichlet(&zero, &phi, mk_net(0)?);
            let pieces = spec.domain.sample_boundary(160);
            let checks = pieces
                .iter()
                .flat_map(|p| p.points.iter().map(|x| (x.clone(), 0.0)))
                .collect();
            Ok(Assembled {
                ansatz,
                loss: LossSpec::Collocation { op },
                sampling_adf: None,
                boundary: vec![],
                checks,
                sign_anchor: None,
            })
        }
    }
}

fn rbf_net(seed: u64) -> Network {
    let centers: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
    Network::Rbf(RbfNet::init(centers, seed))
}

fn resolve_activation(spec: &ProblemSpec, method: Method, opts: &Options) -> Activation {
    if let Some(a) = opts.activation {
        return a;
    }
    match method {
        Method::Ritz | Method::Eigen => {
            if spec.name == "rod-ex7" {
                Activation::Gaussian
            } else {
                Activation::RePU3
            }
        }
        _ => spec.default_activation_collocation,
    }
}

/// Execute one benchmark run.
pub fn run(name: &str, opts: &Options) -> Result<RunResult> {
    let spec = registry::find(name).ok_or_else(|| {
        anyhow!("unknown problem {name:?}; `list` prints the registry")
    })?;
    let method = opts.method.unwrap_or(spec.default_method);
    if !spec.methods.contains(&method) {
        let reason = match (spec.name, method) {
            ("rod-ex5", Method::Collocation) => {
                "the delta-function load has zero measure, so the pointwise residual \
                 never sees it; use --method ritz"
            }
            ("beam-point-moment", Method::Collocation) => {
                "the point moment enters only through its work term in the energy; \
                 use --method ritz"
            }
            _ => "method not supported for this problem",
        };
        bail!("{name}: method {} rejected: {reason}", method.name());
    }
    let adf = opts.adf.unwrap_or(spec.default_adf);
    if !spec.adf_choices.contains(&adf) && opts.loss_mode == LossMode::ExactBc {
        bail!(
            "{name}: ADF {:?} not available (choices: {:?})",
            adf,
            spec.adf_choices
        );
    }
    let activation = resolve_activation(&spec, method, opts);
    if matches!(method, Method::Collocation) && activation == Activation::ReLU {
        bail!(
            "{name}: ReLU rejected for collocation: its second derivative vanishes \
             almost everywhere, so second-order residuals cannot train"
        );
    }
    if matches!(spec.residual_op, ResidualOp::Biharmonic)
        && method == Method::Collocation
        && activation == Activation::Tanh
    {
        // allowed, but RePU3 is the tested default; keep going
    }
    let arch: Vec<usize> = opts.arch.clone().unwrap_or_else(|| spec.default_arch.to_vec());
    let n_interior = opts.n_interior.unwrap_or(spec.default_n_interior);
    let n_boundary = opts.n_boundary.unwrap_or(spec.default_n_boundary).max(2);
    let delta = opts.delta.unwrap_or(match method {
        Method::Ritz | Method::Eigen => {
            if spec.dim == 1 {
                1e-4
            } else {
                spec.default_delta.min(1e-4).max(1e-6)
            }
        }
        _ => spec.default_delta,
    });
    let epochs = opts.epochs.unwrap_or(spec.default_epochs);

    let mut asm = assemble(&spec, method, adf, opts, activation, &arch, n_boundary)?;

    // interior sampling, honoring exclusion balls around singular forcing
    let sample_seed = opts.seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
    let mut interior = sample_interior(
        &spec.domain,
        n_interior + spec.excluded_points.len() * 4,
        spec.default_strategy,
        delta,
        sample_seed,
        asm.sampling_adf.as_ref(),
    )
    .context("interior sampling failed")?;
    if !spec.excluded_points.is_empty() {
        interior.retain(|x| {
            spec.excluded_points.iter().all(|(p, rad)| {
                let d2: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                d2.sqrt() > *rad
            })
        });
    }
    interior.truncate(n_interior);
    let points = PointSet { interior, boundary: asm.boundary.clone() };

    // evaluation grid with exact values when available
    let grid_points = eval_grid(&spec.domain, spec.grid_per_axis);
    let exact_vals: Option<Vec<f64>> =
        spec.exact.as_ref().map(|u| grid_points.iter().map(|x| u.eval(&x[..])).collect());
    let grid = EvalGrid { points: grid_points.clone(), exact: exact_vals.clone() };

    let cfg = TrainConfig {
        epochs,
        lr: opts.lr,
        seed: opts.seed,
        precision: opts.precision,
        error_every: (epochs / 20).max(1),
    };
    let trace = train(
        &mut asm.ansatz,
        &asm.loss,
        &points,
        &spec.forcing,
        spec.domain.measure(),
        Some(&grid),
        &cfg,
    )?;

    // canonical sign for Eikonal solutions: negative inside the interface
    if let Some(anchor) = &asm.sign_anchor {
        if eval_values(&asm.ansatz, std::slice::from_ref(anchor))[0] > 0.0 {
            asm.ansatz.nets[0].negate_output();
        }
    }

    // field dump and error measures on the evaluation grid
    let u_pred = eval_values(&asm.ansatz, &grid_points);
    let (normalized_error, max_abs_error) = match &exact_vals {
        Some(ex) => {
            let mut num = 0.0;
            let mut den = 0.0;
            let mut maxe = 0.0f64;
            for (p, e) in u_pred.iter().zip(ex) {
                num += (p - e) * (p - e);
                den += e * e;
                maxe = maxe.max((p - e).abs());
            }
            let nerr =
                if den > 0.0 { (num / den).sqrt() } else { (num / ex.len() as f64).sqrt() };
            (Some(nerr), Some(maxe))
        }
        None => (None, None),
    };

    // boundary-condition misfit at the check samples
    let boundary_misfit = if asm.checks.is_empty() {
        None
    } else {
        let pts: Vec<Vec<f64>> = asm.checks.iter().map(|(x, _)| x.clone()).collect();
        let vals = eval_values(&asm.ansatz, &pts);
        Some(
            vals.iter()
                .zip(asm.checks.iter())
                .map(|(v, (_, g))| (v - g).abs())
                .fold(0.0f64, f64::max),
        )
    };

    // natural frequency for the eigenproblem
    let omega = if matches!(spec.kind, Kind::RodEigen) {
        let mut num = 0.0;
        let mut den = 0.0;
        for x in &points.interior {
            let g = autodiff::grad_input(&asm.ansatz, x)
                .map_err(|e| anyhow!("omega extraction failed: {e}"))?;
            let u = asm.ansatz.eval_s(&x[..]);
            num += g[0] * g[0];
            den += u * u;
        }
        Some((num / den).sqrt())
    } else {
        None
    };

    Ok(RunResult {
        name: name.to_string(),
        method,
        adf,
        final_loss: trace.final_loss(),
        trace,
        normalized_error,
        max_abs_error,
        omega,
        boundary_misfit,
        grid: grid_points,
        u_pred,
        u_exact: exact_vals,
        ansatz: asm.ansatz,
    })
}
