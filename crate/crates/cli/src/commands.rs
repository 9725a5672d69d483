use corners::dual::{check_poset, dualize};
use corners::geometry::{
    check_compatibility_diagram, glue_exp_maps, sample_grid, ExpMapGrid, GlueOptions,
};
use corners::localization::{
    dyadic_radii, family_continuity, fredholm_check, ideal_membership_profile, restricted_norm,
    tail_norm_bound,
};
use corners::operators::{
    extract_symbol, quantize, spectral_norm, CMatrix, LatticeModel, MultiplierSymbol,
};
use corners::symbols::{
    build_restricted_tuple, check_comp1, check_comp2, is_elliptic, EllipticOptions,
};
use corners::CornerError;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::schema::{self, from_matrix, to_matrix};
use crate::{CliError, Config, LocalizeCheck, Report};

pub fn validate(input: &str) -> Result<Report, CliError> {
    let c = schema::load_complex(input)?;
    let by_codim: Vec<usize> = (0..=c.ambient_dim).map(|k| c.faces_of_codim(k)).collect();
    let violations = c.validate();
    Ok(Report::pass(json!({
        "ambient_dim": c.ambient_dim,
        "depth": c.depth(),
        "faces_by_codim": by_codim,
        "valid": violations.is_empty(),
        "violations": violations,
    })))
}

pub fn dual(input: &str, check: bool) -> Result<Report, CliError> {
    let c = schema::load_complex(input)?;
    let d = dualize(&c);
    let by_dim: Vec<usize> = (0..c.ambient_dim).map(|k| d.strata_of_dim(k)).collect();
    let mut body = json!({ "strata_by_dim": by_dim, "dual": d });
    if !check {
        return Ok(Report::pass(body));
    }
    let cert = check_poset(&c, &d);
    let holds = cert.holds;
    body["certificate"] = json!(cert);
    Ok(Report { pass: holds, body })
}

/// Glues a face map; certificate failures become a failed report rather than an error.
fn glue_face(
    spec: &schema::FaceMapSpec,
    opts: &GlueOptions,
) -> Result<Result<ExpMapGrid, CornerError>, CliError> {
    match glue_exp_maps(
        spec.face,
        spec.base.clone(),
        spec.immersion.clone(),
        spec.charts.clone(),
        spec.partition.clone(),
        opts,
    ) {
        Ok(g) => Ok(Ok(g)),
        Err(
            e @ (CornerError::SingularJacobian { .. }
            | CornerError::ChartMismatch(_)
            | CornerError::Partition { .. }),
        ) => Ok(Err(e)),
        Err(e) => Err(e.into()),
    }
}

pub fn expmap(
    cfg: &Config,
    atlas: &str,
    face: usize,
    eps: f64,
    check_diagram: bool,
) -> Result<Report, CliError> {
    let atlas = schema::load_atlas(atlas)?;
    let find = |j: usize| {
        atlas.maps.iter().find(|m| m.face.0 == j).ok_or_else(|| {
            CliError::Input(format!("the atlas has no exponential map for face {j}"))
        })
    };
    let opts = GlueOptions {
        eps,
        grid: cfg.grid.unwrap_or(50),
        ..GlueOptions::default()
    };
    let grid = match glue_face(find(face)?, &opts)? {
        Ok(g) => g,
        Err(e) => {
            return Ok(Report::fail(
                json!({ "face": face, "eps": eps, "grid": opts.grid, "error": e.to_string() }),
            ))
        }
    };
    let exact = grid.zero_section_error <= 1e-12;
    let mut body = json!({
        "face": face,
        "eps": eps,
        "grid": opts.grid,
        "samples": grid.samples.len(),
        "zero_section_error": grid.zero_section_error,
        "min_abs_det": grid.min_abs_det,
        "det_tol": opts.det_tol,
        "injectivity_kappa": grid.injectivity_kappa,
    });
    let mut pass = exact;
    if check_diagram {
        let tol = cfg.tol.unwrap_or(1e-8);
        let n = cfg.grid.unwrap_or(20);
        let mut reports = Vec::new();
        for emb in atlas.embeddings.iter().filter(|e| e.face.0 == face) {
            let lower = match glue_face(find(emb.into.0)?, &opts)? {
                Ok(g) => g,
                Err(e) => {
                    pass = false;
                    reports.push(json!({ "into": emb.into, "error": e.to_string() }));
                    continue;
                }
            };
            let samples = sample_grid(&emb.base, grid.map.fiber_dim, eps, n);
            let r =
                check_compatibility_diagram(&grid.map, &lower.map, &emb.embedding, &samples, tol)?;
            pass &= r.pass;
            reports.push(json!({ "into": emb.into, "tol": tol, "report": r }));
        }
        if reports.is_empty() {
            return Err(CliError::Input(format!(
                "the atlas lists no embedding of face {face}"
            )));
        }
        body["diagrams"] = json!(reports);
    }
    Ok(Report { pass, body })
}

pub fn localize(cfg: &Config, path: &str, check: LocalizeCheck) -> Result<Report, CliError> {
    let file: schema::FamilyFile = schema::read_json(path)?;
    if file.format.is_some_and(|f| f != schema::FORMAT) {
        return Err(CliError::Input(format!("{path}: unsupported format")));
    }
    let space = &file.space;
    match check {
        LocalizeCheck::Norm => {
            let a = file.global()?;
            let set = file
                .set
                .clone()
                .unwrap_or_else(|| (0..space.len()).collect());
            if let Some(bad) = set.iter().find(|&&v| v >= space.len()) {
                return Err(CliError::Input(format!(
                    "set contains node {bad} of {}",
                    space.len()
                )));
            }
            let norm = restricted_norm(&a, space, &set)?;
            let pass = cfg.tol.is_none_or(|t| norm <= t);
            Ok(Report {
                pass,
                body: json!({ "set": set, "norm": norm, "tail_bound": tail_norm_bound(&a, space, &set), "bound": cfg.tol }),
            })
        }
        LocalizeCheck::Ideal => {
            let a = file.global()?;
            let node = file
                .node
                .ok_or_else(|| CliError::Input("the ideal check needs \"node\"".into()))?;
            if node >= space.len() {
                return Err(CliError::Input(format!("node {node} of {}", space.len())));
            }
            let (r0, k) = cfg.radii.unwrap_or((0.5, 6));
            let tol = cfg.tol.unwrap_or(1e-3);
            let p = ideal_membership_profile(&a, space, node, &dyadic_radii(r0, k), tol)?;
            Ok(Report {
                pass: p.in_ideal,
                body: json!({ "tol": tol, "profile": p }),
            })
        }
        LocalizeCheck::Continuity => {
            let eps = cfg.tol.unwrap_or(0.1);
            let r = family_continuity(&file.local_reps()?, space, eps)?;
            Ok(Report {
                pass: r.pass,
                body: json!({ "eps": eps, "report": r }),
            })
        }
        LocalizeCheck::Fredholm => {
            let tol = cfg.tol.unwrap_or(1e-3);
            let truncation = 1e-8;
            let r = fredholm_check(&file.global()?, &file.local_reps()?, space, tol, truncation)?;
            Ok(Report {
                pass: r.fredholm,
                body: json!({ "tol": tol, "truncation": truncation, "report": r }),
            })
        }
    }
}

pub fn symbols_build(
    expr: &str,
    model: Option<&str>,
    params: Option<usize>,
) -> Result<Report, CliError> {
    let file = schema::load_expr(expr)?;
    let name = model.unwrap_or(&file.model).to_string();
    let param_dim = params.unwrap_or(file.param_dim);
    let tuple = build_restricted_tuple(&file.symbol, &schema::model(&name)?, param_dim)?;
    Ok(Report::pass(json!({ "model": name, "tuple": tuple })))
}

pub fn symbols_check(cfg: &Config, path: &str, model: Option<&str>) -> Result<Report, CliError> {
    let file = schema::load_tuple(path)?;
    let m = schema::model(model.unwrap_or(&file.model))?;
    let tol = cfg.tol.unwrap_or(1e-9);
    let c1 = check_comp1(&file.tuple, &m, tol)?;
    let c2 = check_comp2(&file.tuple, &m, tol)?;
    Ok(Report {
        pass: c1.pass && c2.pass,
        body: json!({ "tol": tol, "comp1": c1, "comp2": c2 }),
    })
}

pub fn symbols_elliptic(cfg: &Config, path: &str, model: Option<&str>) -> Result<Report, CliError> {
    let file = schema::load_tuple(path)?;
    let m = schema::model(model.unwrap_or(&file.model))?;
    let defaults = EllipticOptions::default();
    let opts = EllipticOptions {
        tol: cfg.tol.unwrap_or(defaults.tol),
        annulus: cfg.annulus.unwrap_or(defaults.annulus),
        section_points: cfg.grid.unwrap_or(defaults.section_points),
        ..defaults
    };
    match is_elliptic(&file.tuple, &m, &opts) {
        Ok(r) => Ok(Report {
            pass: r.elliptic,
            body: json!({ "options": opts, "report": r }),
        }),
        Err(e @ CornerError::Incompatible(_)) => Ok(Report::fail(
            json!({ "options": opts, "error": e.to_string() }),
        )),
        Err(e) => Err(e.into()),
    }
}

/// First block-row of the circulant matrix: blocks `K(−m)`.
fn generator(model: &LatticeModel, kernel: &[CMatrix]) -> Vec<schema::JsonMatrix> {
    (0..model.nodes())
        .map(|m| {
            let neg: Vec<usize> = model
                .multi_index(m)
                .iter()
                .map(|&k| (model.n - k) % model.n)
                .collect();
            from_matrix(&kernel[model.flat_index(&neg)])
        })
        .collect()
}

fn random_symbol(rng: &mut ChaCha8Rng, model: LatticeModel) -> MultiplierSymbol {
    let b = model.base_dim;
    let values = (0..model.nodes())
        .map(|_| {
            CMatrix::from_fn(b, b, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            })
        })
        .collect();
    MultiplierSymbol { model, values }
}

pub fn operators(cfg: &Config, symbol: Option<&str>, count: usize) -> Result<Report, CliError> {
    let tol = cfg.tol.unwrap_or(1e-12);
    let Some(path) = symbol else {
        let n = cfg.grid.unwrap_or(64);
        let seed = cfg.seed.unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for i in 0..count {
            let model = LatticeModel::new(1, n, 1 + i % 8, 1.0)?;
            let sym = random_symbol(&mut rng, model);
            worst = worst.max(extract_symbol(&quantize(&sym)?)?.max_diff(&sym));
        }
        return Ok(Report {
            pass: worst <= tol,
            body: json!({ "sweep": { "count": count, "N": n, "seed": seed, "max_round_trip_error": worst }, "tol": tol }),
        });
    };
    let file = schema::load_symbol_file(path)?;
    if file.n > 1024 {
        return Err(CliError::Input(format!("N = {} exceeds 1024", file.n)));
    }
    let model = LatticeModel::new(file.d, file.n, file.base_dim, file.h)?;
    if file.values.len() != model.nodes() {
        return Err(CliError::Input(format!(
            "{} symbol values for {} frequencies",
            file.values.len(),
            model.nodes()
        )));
    }
    let values = file
        .values
        .iter()
        .map(to_matrix)
        .collect::<Result<Vec<_>, _>>()?;
    if values
        .iter()
        .any(|v| v.nrows() != file.base_dim || v.ncols() != file.base_dim)
    {
        return Err(CliError::Input(format!(
            "symbol values must be {0}×{0}",
            file.base_dim
        )));
    }
    let sym = MultiplierSymbol { model, values };
    let op = quantize(&sym)?;
    let round_trip = extract_symbol(&op)?.max_diff(&sym);
    let sup = sym.sup_norm();
    // The dense norm is only formed for moderate sizes.
    let op_norm = (model.dim() <= 1024).then(|| spectral_norm(&op.to_dense()));
    let norm_ok = op_norm.is_none_or(|n| (n - sup).abs() <= tol * (1.0 + sup));
    Ok(Report {
        pass: round_trip <= tol && norm_ok,
        body: json!({
            "tol": tol,
            "round_trip_error": round_trip,
            "symbol_sup_norm": sup,
            "operator_norm": op_norm,
            "generator": generator(&model, &op.kernel),
        }),
    })
}

pub fn example(name: &str) -> Result<Value, CliError> {
    crate::examples::example(name).ok_or_else(|| {
        CliError::Input(format!(
            "unknown example {name:?}; available: {}",
            crate::examples::NAMES.join(", ")
        ))
    })
}
