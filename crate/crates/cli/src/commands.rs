use std::f64::consts::{FRAC_PI_4, TAU};

use crownkit::config::Config;
use crownkit::crown::{
    boundary_classify, crown_contains, elliptic_point, from_quadric, match_orbits,
    random_crown_point, to_quadric, unipotent_point, xi_pm_contains, PairPoint, Sign,
};
use crownkit::horo::{
    ac_closed_form, convexity_scan, escape_curve, log_ac, trace_domain_contains,
    trace_domain_contains_sampled, trace_of_point, TraceDomainSpec,
};
use crownkit::lie::{complex_na_decompose, exp_lie, GroupElement, ProjPoint};
use crownkit::maass::{pipeline_demo, PeriodicStripFunction, SupBoundModel};
use crownkit::numerics::{finite_diff_complex, DiffOrder, QuadratureConfig};
use crownkit::principal::{
    apply_pi, continue_vk, continued_vk, d_pi, doubling_check, norm_growth, phi_lambda, phi_mehler,
    Direction, RepVector, SpectralParam,
};
use crownkit::sobolev::{invariant_upper_bound, sobolev_norm, SobolevSpec, Subgroup};
use crownkit::spectral::{
    gram_matrix, gutzmer_check, hardy_kernel, parseval_check, spherical_transform,
    spherical_transform_direct, KernelMeasure, LambdaGrid, OrbitGrid, RadialFunction,
    SpectralDensity,
};
use crownkit::suite::{run_criterion, Level, CRITERIA};
use crownkit::{Error, Result};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::output::{complex, exact, exact_complex, flag, gap, real, CommandResult};
use crate::{Command, ParamKind, PointArgs, RadialKind, SuiteLevel};

pub enum Failure {
    Usage(String),
    Numeric(Box<CommandResult>),
}

fn is_usage(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidInput(_)
            | Error::DomainError(_)
            | Error::NotInCrown
            | Error::NotOnBoundary
            | Error::PointAtInfinity
            | Error::DiagonalPoint
            | Error::StripExceeded { .. }
    )
}

fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::CrownCheck(_) => "crown-check",
        Command::Param { .. } => "param",
        Command::Match { .. } => "match",
        Command::Boundary { .. } => "boundary",
        Command::Quadric(_) => "quadric",
        Command::Aproj { .. } => "aproj",
        Command::Convexity { .. } => "convexity",
        Command::TraceDomain { .. } => "trace-domain",
        Command::Escape { .. } => "escape",
        Command::Phi { .. } => "phi",
        Command::Doubling { .. } => "doubling",
        Command::NormGrowth { .. } => "norm-growth",
        Command::DpiCheck { .. } => "dpi-check",
        Command::Sobolev { .. } => "sobolev",
        Command::InvariantBound { .. } => "invariant-bound",
        Command::Transform { .. } => "transform",
        Command::Parseval { .. } => "parseval",
        Command::Gutzmer { .. } => "gutzmer",
        Command::HardyKernel { .. } => "hardy-kernel",
        Command::Kernel { .. } => "kernel",
        Command::Maass { .. } => "maass",
        Command::Suite { .. } => "suite",
    }
}

pub fn run(cmd: &Command, cfg: &Config) -> std::result::Result<CommandResult, Failure> {
    let mut r = CommandResult::new(name(cmd));
    match dispatch(cmd, cfg, &mut r) {
        Ok(()) => Ok(r),
        Err(e) if is_usage(&e) => Err(Failure::Usage(e.to_string())),
        Err(e) => {
            r.fail(e.to_string());
            Err(Failure::Numeric(Box::new(r)))
        }
    }
}

fn proj(p: ProjPoint) -> Value {
    match p {
        ProjPoint::Finite(z) => exact_complex(z),
        ProjPoint::Infinity => json!("inf"),
    }
}

fn point(args: &PointArgs) -> Result<PairPoint> {
    PairPoint::new(args.z1, args.z2)
}

fn echo_point(r: &mut CommandResult, prefix: &str, z: &PairPoint) {
    r.input(&format!("{prefix}1"), z.first.to_string());
    r.input(&format!("{prefix}2"), z.second.to_string());
}

fn lam(l: f64) -> Result<SpectralParam> {
    SpectralParam::new(l)
}

fn tolerance_error(cfg: &QuadratureConfig, v: f64) -> f64 {
    cfg.abs_tol + cfg.rel_tol * v.abs()
}

fn rep(cfg: &Config) -> QuadratureConfig {
    cfg.quadrature(QuadratureConfig::representation())
}

fn geo(cfg: &Config) -> QuadratureConfig {
    cfg.quadrature(QuadratureConfig::geometry())
}

fn parse_real_element(s: &str) -> Result<GroupElement> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidInput(format!("cannot parse group element {s:?}")))?;
    match v.as_slice() {
        [a, b, c, d] => GroupElement::from_real(*a, *b, *c, *d),
        _ => Err(Error::InvalidInput(
            "group element needs four entries a,b,c,d".into(),
        )),
    }
}

fn radial(kind: RadialKind, width: f64) -> Result<RadialFunction> {
    match kind {
        RadialKind::Gaussian => RadialFunction::gaussian(width),
        RadialKind::PolyGauss => {
            if !(width > 0.0) {
                return Err(Error::InvalidInput("width must be positive".into()));
            }
            RadialFunction::new("poly-gauss", 7.0 * width, move |r: f64| {
                let s = (r / width).powi(2);
                (1.0 + s) * (-s).exp()
            })
        }
    }
}

fn dispatch(cmd: &Command, cfg: &Config, r: &mut CommandResult) -> Result<()> {
    match cmd {
        Command::CrownCheck(args) => {
            let z = point(args)?;
            echo_point(r, "z", &z);
            let inside = crown_contains(&z);
            r.output("inside", flag(inside))
                .output("xi_plus", flag(xi_pm_contains(&z, Sign::Plus)))
                .output("xi_minus", flag(xi_pm_contains(&z, Sign::Minus)))
                .method("sign test on the imaginary parts of the coordinates");
            if inside {
                r.output("trace", exact_complex(trace_of_point(&z)?));
            }
        }
        Command::Param { kind, t, g } => {
            let ge = parse_real_element(g)?;
            r.input("kind", format!("{kind:?}").to_lowercase())
                .input("t", t)
                .input("g", g);
            let z = match kind {
                ParamKind::Elliptic => elliptic_point(&ge, *t)?,
                ParamKind::Unipotent => unipotent_point(&ge, *t)?,
            };
            r.output("z1", proj(z.first))
                .output("z2", proj(z.second))
                .output("inside", flag(crown_contains(&z)))
                .method("Moebius action on both coordinates");
        }
        Command::Match { phi } => {
            r.input("phi", phi);
            let m = match_orbits(*phi)?;
            let e = m.g.as_real().expect("real element");
            r.output(
                "g",
                json!([
                    [exact(e[0][0]), exact(e[0][1])],
                    [exact(e[1][0]), exact(e[1][1])]
                ]),
            )
            .output("boost", exact(m.r))
            .output("residual", gap(m.residual))
            .output("capped", flag(m.capped))
            .method("quarter rotation and boost in the quadric, lifted to SL(2,R)")
            .check(m.residual < 1e-9 && !m.capped);
        }
        Command::Boundary { point: args, tol } => {
            let z = point(args)?;
            echo_point(r, "z", &z);
            r.input("tol", tol);
            let b = boundary_classify(&z, *tol)?;
            r.output("stratum", serde_json::to_value(b.stratum).expect("stratum"))
                .output(
                    "cone_data",
                    serde_json::to_value(b.cone_data).expect("cone data"),
                )
                .method("imaginary parts of the coordinates compared against the tolerance");
        }
        Command::Quadric(args) => {
            let z = point(args)?;
            echo_point(r, "z", &z);
            let q = to_quadric(&z)?;
            let back = from_quadric(&q)?;
            r.output(
                "coordinates",
                json!(q.0.iter().map(|c| exact_complex(*c)).collect::<Vec<_>>()),
            )
            .output("q", exact_complex(q.q()))
            .output("in_crown", flag(q.in_crown()))
            .output("round_trip", gap(back.distance(&z)))
            .method("symmetric-matrix model g g^T mapped to SO(1,2) coordinates")
            .check(back.distance(&z) < 1e-9);
        }
        Command::Aproj { z1, z2, theta, phi } => match (z1, z2, theta, phi) {
            (Some(a), Some(b), _, _) => {
                let z = PairPoint::new(*a, *b)?;
                echo_point(r, "z", &z);
                let h = log_ac(&z)?;
                let brute = complex_na_decompose(&z)?;
                let drift = ((2.0 * h.value).exp() - brute.a_square).norm() / brute.a_square.norm();
                r.output("log_ac", complex(h.value, drift.max(1e-15)))
                    .output("a_c", exact_complex(h.a_part()))
                    .output("path_steps", json!(h.path_steps))
                    .output("decomposition_gap", gap(drift))
                    .method("branch of log tracked along the segment from the base point")
                    .method("oracle: direct N_C A_C decomposition")
                    .check(drift < 1e-10);
            }
            (None, None, Some(t), Some(p)) => {
                r.input("theta", t).input("phi", p);
                let z = ac_closed_form(*t, *p)?;
                let g = GroupElement::k(*t) * GroupElement::a_complex(C64::from_polar(1.0, *p));
                let brute = complex_na_decompose(&g.act_pair(&PairPoint::base()))?.a_part;
                let d = (z - brute).norm().min((z + brute).norm());
                r.output("a_c", complex(z, d.max(1e-15)))
                    .output("decomposition_gap", gap(d))
                    .method("closed form on the K-orbit")
                    .method("oracle: direct N_C A_C decomposition, compared modulo sign")
                    .check(d < 1e-10);
            }
            _ => {
                return Err(Error::InvalidInput(
                    "give either --z1/--z2 or --theta/--phi".into(),
                ))
            }
        },
        Command::Convexity { phi, samples } => {
            r.input("phi", phi).input("samples", samples);
            let s = convexity_scan(*phi, *samples)?;
            r.output("min_im", exact(s.min_im))
                .output("max_im", exact(s.max_im))
                .output("overshoot", gap(s.overshoot))
                .output("endpoint_gap", gap(s.endpoint_gap))
                .method("closed form of a_C on equispaced K samples")
                .check(s.overshoot <= 1e-9 && s.endpoint_gap < 1e-6);
        }
        Command::TraceDomain {
            value,
            omega,
            doubled,
        } => {
            r.input("value", format!("{}{:+}i", value.re, value.im))
                .input("omega", omega)
                .input("doubled", doubled);
            let spec = match omega {
                Some(b) => TraceDomainSpec::new(*b, *doubled)?,
                None => TraceDomainSpec::full(*doubled),
            };
            let exact_test = trace_domain_contains(&spec, *value);
            let sampled = trace_domain_contains_sampled(&spec, *value, 1e-9);
            r.output("contains", flag(exact_test))
                .output("sampled_oracle", flag(sampled))
                .method("principal acosh of value/2 against the strip |Im w| < 2b")
                .method("oracle: dense parametric sample refined by Newton");
            if exact_test != sampled {
                r.warn();
            }
        }
        Command::Escape { phi, points } => {
            r.input("phi", phi).input("points", points);
            if *points < 2 {
                return Err(Error::InvalidInput("need at least two points".into()));
            }
            let sig: Vec<f64> = (0..*points)
                .map(|i| escape_curve(*phi, i as f64 / (*points - 1) as f64).map(|p| p.sigma))
                .collect::<Result<_>>()?;
            let last = sig[sig.len() - 1];
            let mono = sig.windows(2).all(|w| w[1] < w[0]);
            r.output("sigma_start", exact(sig[0]))
                .output("sigma_end", exact(last))
                .output("monotone", flag(mono))
                .output("start_is_two", flag((sig[0] - 2.0).abs() < 1e-12))
                .method("trace of gamma(s) exp(i phi h) x0 in the pair model")
                .check(mono && (last + 2.0).abs() < 1e-12);
            if (sig[0] - 2.0).abs() >= 1e-12 {
                r.warn();
            }
        }
        Command::Phi {
            lambda,
            point: args,
        } => {
            let z = point(args)?;
            echo_point(r, "z", &z);
            r.input("lambda", lambda);
            let q = rep(cfg);
            let v = phi_lambda(lam(*lambda)?, &z, &q)?;
            let zeta = (trace_of_point(&z)? * 0.5).acosh();
            let m = phi_mehler(lam(*lambda)?, zeta, &q)?;
            let d = (v - m).norm() / v.norm().max(1e-300);
            r.output(
                "phi",
                complex(v, tolerance_error(&q, v.norm()).max(d * v.norm())),
            )
            .output("mehler", complex(m, tolerance_error(&q, m.norm())))
            .output("relative_gap", gap(d))
            .method("K-integral of a_C^(1+i lambda) by adaptive Gauss-Kronrod")
            .method("cross-check: Mehler integral at the trace")
            .check(d < 1e-6);
        }
        Command::Doubling { lambda, t, phi } => {
            r.input("lambda", lambda).input("t", t).input("phi", phi);
            let q = rep(cfg).with_tolerances(1e-11, 1e-11);
            let d = doubling_check(lam(*lambda)?, *t, *phi, &q)?;
            r.output("lhs", complex(d.lhs, tolerance_error(&q, d.lhs.norm())))
                .output("rhs", complex(d.rhs, tolerance_error(&q, d.rhs.norm())))
                .output("gap", gap(d.gap))
                .method("spherical function at the doubled point against the pairing of half-continued vectors")
                .check(d.gap < 1e-5);
        }
        Command::NormGrowth { lambda, eps } => {
            r.input("lambda", lambda).input("eps", eps);
            let pts = norm_growth(lam(*lambda)?, eps, &rep(cfg))?;
            let rows: Vec<Value> = pts
                .iter()
                .map(|p| {
                    let rel = p.error / (2.0 * p.norm * p.norm);
                    json!({ "eps": p.eps, "norm": real(p.norm, rel * p.norm), "ratio": real(p.ratio, rel * p.ratio) })
                })
                .collect();
            let ratios: Vec<f64> = pts.iter().map(|p| p.ratio * p.ratio).collect();
            let (lo, hi) = ratios
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
            r.output("points", json!(rows))
                .output("ratio_spread", gap(hi / lo - 1.0))
                .method("norm of the continued spherical vector by adaptive quadrature");
        }
        Command::DpiCheck { lambda, alpha, x } => {
            r.input("lambda", lambda)
                .input("alpha", alpha)
                .input("x", x);
            let l = lam(*lambda)?;
            let f: RepVector = continued_vk(l, *alpha).into();
            let RepVector::Analytic(fa) = &f else {
                unreachable!("analytic input")
            };
            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for dir in Direction::ALL {
                let RepVector::Analytic(df) = d_pi(l, &dir.vector(), &f)? else {
                    unreachable!("analytic input stays analytic")
                };
                let mut dir_worst: f64 = 0.0;
                for &xv in x {
                    let fd = finite_diff_complex(
                        |t| match apply_pi(l, &exp_lie(&dir.vector(), C64::new(t, 0.0)), &f) {
                            Ok(RepVector::Analytic(a)) => a.value(xv),
                            _ => C64::new(f64::NAN, 0.0),
                        },
                        0.0,
                        DiffOrder::First,
                        1e-3,
                    )?;
                    let exact = df.value(xv);
                    dir_worst = dir_worst.max(
                        (fd - exact).norm() / (exact.norm() + fa.value(xv).norm()).max(1e-300),
                    );
                }
                worst = worst.max(dir_worst);
                rows.push(json!({ "direction": dir.name(), "relative_gap": gap(dir_worst) }));
            }
            r.output("directions", json!(rows))
                .method("closed-form differential operators")
                .method("oracle: central differences of the group action")
                .check(worst < 1e-6);
        }
        Command::Sobolev {
            lambda,
            eps,
            k,
            subgroup,
        } => {
            r.input("lambda", lambda)
                .input("eps", eps)
                .input("k", k)
                .input("subgroup", subgroup);
            let spec = match subgroup {
                Some(s) => SobolevSpec::restricted(*k, s.parse::<Subgroup>()?)?,
                None => SobolevSpec::full(*k)?,
            };
            let q = rep(cfg);
            let v = RepVector::Analytic(continue_vk(lam(*lambda)?, *eps)?);
            let n = sobolev_norm(lam(*lambda)?, &v, &spec, &q)?;
            r.output("norm", real(n, tolerance_error(&q, n))).method(
                "sum over monomials of derived operators, each norm by adaptive quadrature",
            );
        }
        Command::InvariantBound { lambda, eps, k, m } => {
            r.input("lambda", lambda)
                .input("eps", eps)
                .input("k", k)
                .input("m", m);
            let q = rep(cfg);
            let v = RepVector::Analytic(continue_vk(lam(*lambda)?, *eps)?);
            let b = invariant_upper_bound(lam(*lambda)?, &v, *k, *m, &q)?;
            r.output("bound", real(b.bound, tolerance_error(&q, b.bound)))
                .output(
                    "comparison",
                    real(b.comparison, tolerance_error(&q, b.comparison)),
                )
                .output("norm", real(b.norm, tolerance_error(&q, b.norm)))
                .output("m_origin", json!(b.m_origin))
                .output("m_infinity", json!(b.m_infinity))
                .output("m_criterion_met", flag(b.m_criterion_met))
                .method(
                    "dyadic partition in two charts, blocks measured after contracting dilations",
                );
            if !b.m_criterion_met {
                r.warn();
            }
        }
        Command::Transform {
            function,
            width,
            lambda,
        } => {
            r.input("function", format!("{function:?}").to_lowercase())
                .input("width", width)
                .input("lambda", lambda);
            let f = radial(*function, *width)?;
            let mut nodes = lambda.clone();
            nodes.sort_by(f64::total_cmp);
            nodes.dedup();
            let shown = nodes.len();
            if shown == 1 {
                nodes.push(nodes[0] + 1.0);
            }
            let grid = LambdaGrid::from_nodes(nodes)?;
            let q = geo(cfg);
            let abel = spherical_transform(&f, &grid, &q)?;
            let direct = spherical_transform_direct(&f, &grid, &q)?;
            let rows: Vec<Value> = (0..shown)
                .map(|i| {
                    let d = (abel.values[i] - direct.values[i]).norm();
                    json!({ "lambda": grid.nodes[i], "value": complex(abel.values[i], d.max(1e-12)), "route_gap": gap(d) })
                })
                .collect();
            let worst = (0..shown)
                .map(|i| (abel.values[i] - direct.values[i]).norm())
                .fold(0.0, f64::max);
            r.output("values", json!(rows))
                .method("Abel transform followed by a cosine transform")
                .method("cross-check: direct integral against the Mehler form")
                .check(worst < 1e-6);
        }
        Command::Parseval { function, width } => {
            r.input("function", format!("{function:?}").to_lowercase())
                .input("width", width);
            let w = cfg.weight()?;
            let p = parseval_check(
                &radial(*function, *width)?,
                &w,
                &LambdaGrid::standard(),
                &geo(cfg),
            )?;
            r.output("lhs", real(p.lhs, 1e-12 * p.lhs))
                .output("rhs", real(p.rhs, p.gap * p.lhs))
                .output("gap", gap(p.gap))
                .output("plancherel_constant", exact(w.calibration_constant))
                .method("L2 norm on X in polar coordinates against the weighted spectral integral")
                .method(&format!("plancherel constant: {}", cfg.plancherel_oracle))
                .check(p.gap < 1e-3);
        }
        Command::Gutzmer {
            center,
            width,
            r: frac,
        } => {
            r.input("center", center)
                .input("width", width)
                .input("r", frac);
            let grid = LambdaGrid::standard();
            let d = SpectralDensity::gaussian(&grid, *center, *width)?;
            let g = gutzmer_check(
                &d,
                &cfg.weight()?,
                frac * FRAC_PI_4,
                &OrbitGrid::default(),
                &geo(cfg),
            )?;
            r.output("lhs", real(g.lhs, g.gap * g.lhs))
                .output("rhs", real(g.rhs, 1e-10 * g.rhs))
                .output("gap", gap(g.gap))
                .method("orbit integral of |f|^2 over a shifted G-orbit in KA+K coordinates")
                .method("spectral side weighted by the spherical function at the doubled shift")
                .check(g.gap < 1e-2);
        }
        Command::HardyKernel { z, w1, w2 } => {
            let zp = point(z)?;
            let wp = PairPoint::new(*w1, *w2)?;
            echo_point(r, "z", &zp);
            echo_point(r, "w", &wp);
            let q = geo(cfg);
            let k = hardy_kernel(&zp, &wp, &q)?;
            let kt = hardy_kernel(&wp, &zp, &q)?;
            let h = (k - kt.conj()).norm();
            r.output("kernel", complex(k, tolerance_error(&q, k.norm()).max(h)))
                .output("hermitian_gap", gap(h))
                .method("spectral integral of the spherical function at the kernel trace")
                .check(h < 1e-10);
        }
        Command::Kernel { points, phi_max } => {
            r.input("seed", cfg.seed)
                .input("points", points)
                .input("phi_max", phi_max);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let pts: Vec<PairPoint> = (0..*points)
                .map(|_| random_crown_point(&mut rng, 1.0, *phi_max))
                .collect();
            let g = gram_matrix(&KernelMeasure::hardy(), &pts, &geo(cfg))?;
            r.output("hermitian_gap", gap(g.hermitian_gap))
                .output(
                    "min_eigenvalue",
                    real(g.min_eigenvalue, g.hermitian_gap * *points as f64),
                )
                .output(
                    "max_eigenvalue",
                    real(g.max_eigenvalue, g.hermitian_gap * *points as f64),
                )
                .output("trace", exact(g.trace))
                .method("Hermitian eigenvalues of the Gram matrix")
                .check(g.hermitian_gap < 1e-10 && g.min_eigenvalue >= -1e-7 * g.trace);
        }
        Command::Maass {
            y,
            modes,
            c,
            control,
        } => {
            r.input("y", y)
                .input("modes", modes)
                .input("c", c)
                .input("control", control);
            let f = if *control {
                let mut coeffs: Vec<(i64, C64)> = (2..=*modes)
                    .flat_map(|n| [n, -n])
                    .map(|n| (n, C64::from((-TAU * n.abs() as f64 * y).exp())))
                    .collect();
                coeffs.extend([(1, C64::new(1.0, 0.0)), (-1, C64::from((-TAU * y).exp()))]);
                PeriodicStripFunction::from_modes("control", *y, coeffs)?
            } else {
                PeriodicStripFunction::saturating(*y, *modes)?
            };
            let rep = pipeline_demo(&f, *y, &SupBoundModel::new(*c)?, *modes)?;
            let rows: Vec<Value> = rep
                .rows
                .iter()
                .map(|row| {
                    json!({ "n": row.n, "abs_coeff": real(row.abs_coeff, row.noise), "bound": exact(row.bound), "pass": row.pass })
                })
                .collect();
            r.output("fit", exact(rep.fit))
                .output("coefficients", json!(rows))
                .output("f0", exact(rep.f0))
                .output("sup_bound", exact(rep.sup_bound))
                .method("trapezoid rule on the contour shifted towards decay")
                .method("bound chain evaluated at eps = 1/y with the fitted constant")
                .check(rep.pass);
        }
        Command::Suite {
            level,
            only,
            timings,
        } => {
            let level = match level {
                SuiteLevel::Quick => Level::Quick,
                SuiteLevel::Full => Level::Full,
            };
            r.input("seed", cfg.seed)
                .input("level", level)
                .input("only", only);
            let ids: Vec<usize> = if only.is_empty() {
                (1..=CRITERIA).collect()
            } else {
                only.clone()
            };
            let mut rows = Vec::new();
            for id in ids {
                let row = run_criterion(id, level, cfg).ok_or_else(|| {
                    Error::InvalidInput(format!("no criterion {id}; valid ids are 1..={CRITERIA}"))
                })?;
                let mut v = serde_json::to_value(&row).expect("row");
                if !timings {
                    let obj = v.as_object_mut().expect("object");
                    obj.remove("seconds");
                }
                r.check(row.pass);
                rows.push(v);
            }
            r.output("rows", json!(rows))
                .method("acceptance checks with fixed seeds");
        }
    }
    Ok(())
}
