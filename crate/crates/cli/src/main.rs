//! `difflie`: load JSON descriptions, run exact verifications, print JSON reports.
//!
//! Exit codes: 0 when every residual in the report is zero, 1 when one is not
//! (or the math fails: obstruction, non-cocycle, nonzero composite), 2 on input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use serde_json::{json, Value};

use difflie::catalog;
use difflie::cohomology::{self, CochainComplexSpec, Flavor};
use difflie::deformations::{self, FormalIso, TruncatedDeformation};
use difflie::error::Error;
use difflie::extensions::{self, AbelianExtension};
use difflie::homotopy::{self, HomotopyDiffLie};
use difflie::lie::{adjoint_rep, residuals_vanish, DiffLieAlgebra, DiffRepresentation, LieActTriple, LieAlgebra, Residuals};
use difflie::linalg::Matrix;
use difflie::linfty::{self, bracket, Element, LInftyAlgebra, Part};
use difflie::multilinear::AltMap;
use difflie::scalar::{self, Scalar};

#[derive(Parser)]
#[command(name = "difflie", version, about = "Exact checks for differential Lie algebras of weight λ")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// Override the weight λ ("p/q").
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_scalar)]
    weight: Option<Scalar>,
    /// Seed for randomized sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Jacobi, weighted-derivation and representation residuals.
    CheckAxioms { path: PathBuf },
    /// Cochain complex dimensions and cohomology.
    Cohomology {
        path: PathBuf,
        #[arg(long, default_value = "difflie", value_parser = parse_flavor)]
        flavor: Flavor,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
    },
    /// Maurer-Cartan check for (π, d), or (χ, D) for a LieAct file.
    McCheck { path: PathBuf },
    /// Twisted differential against the DiffLie coboundary on basis cochains.
    Twist {
        path: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
    },
    /// Key composition formula, on a file or on random samples.
    KeyFormula {
        path: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Strictness of the absolute → relative and relative → absolute embeddings.
    MorphismCheck {
        #[arg(long, default_value_t = 1)]
        g_dim: usize,
        #[arg(long, default_value_t = 2)]
        h_dim: usize,
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
    #[command(subcommand)]
    Extension(ExtCmd),
    #[command(subcommand)]
    Deform(DeformCmd),
    /// Maurer-Cartan check of a homotopy differential Lie algebra.
    HomotopyCheck { path: PathBuf },
}

#[derive(Subcommand)]
enum ExtCmd {
    /// Extension from a 2-cocycle ("psi", "chi") next to an algebra and representation.
    Build { path: PathBuf },
    /// Representation and 2-cocycle of an extension.
    Extract { path: PathBuf },
    /// dim H̃² with the given coefficients.
    Classify { path: PathBuf },
}

#[derive(Subcommand)]
enum DeformCmd {
    /// Residuals of a truncated deformation, and its infinitesimal.
    Verify {
        path: PathBuf,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Iterates the rigidity step until constant or obstructed.
    Rigidify {
        path: PathBuf,
        #[arg(long)]
        order: Option<usize>,
    },
}

enum Failure {
    Input(String),
    Math(String, Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::DimensionMismatch(_) | Error::ArityMismatch { .. } | Error::LengthMismatch(..) => Failure::Input(e.to_string()),
            Error::NotCocycle { ref mc_residual, ref dc_residual } => {
                let v = json!({ "error": e.to_string(), "residual": { "f": scalar::vec_to_json(mc_residual), "g": scalar::vec_to_json(dc_residual) } });
                Failure::Math(e.to_string(), v)
            }
            Error::Obstructed { order, ref class } => {
                let v = json!({ "error": e.to_string(), "obstructed": { "order": order, "class": { "f": scalar::vec_to_json(&class.0), "g": scalar::vec_to_json(&class.1) } } });
                Failure::Math(e.to_string(), v)
            }
            _ => Failure::Math(e.to_string(), json!({ "error": e.to_string() })),
        }
    }
}

type Outcome = Result<(Value, bool), Failure>;

fn parse_scalar(s: &str) -> Result<Scalar, String> {
    scalar::parse(s).map_err(|e| e.to_string())
}

fn parse_flavor(s: &str) -> Result<Flavor, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn algebra(v: &Value, c: &Common) -> Result<DiffLieAlgebra, Failure> {
    let mut a = DiffLieAlgebra::from_json(v)?;
    if let Some(w) = &c.weight {
        a.weight = w.clone();
    }
    Ok(a)
}

/// The representation in the file, or the adjoint one.
fn coefficients(v: &Value, a: &DiffLieAlgebra) -> Result<DiffRepresentation, Failure> {
    Ok(DiffRepresentation::from_json(v, a.dim())?.unwrap_or_else(|| adjoint_rep(a)))
}

fn residuals_json(r: &Residuals) -> Value {
    let bad: Vec<Value> = r
        .iter()
        .filter(|(_, v)| !scalar::is_zero_vec(v))
        .map(|(idx, v)| json!({ "indices": idx.iter().map(|i| i + 1).collect::<Vec<_>>(), "residual": scalar::vec_to_json(v) }))
        .collect();
    Value::Array(bad)
}

fn check_axioms(path: &Path, c: &Common) -> Outcome {
    let v = load(path)?;
    let a = algebra(&v, c)?;
    let jac = a.algebra.jacobi_residual();
    let der = a.weighted_derivation_residual();
    let mut ok = residuals_vanish(&jac) && residuals_vanish(&der);
    let mut report = json!({ "jacobi": residuals_json(&jac), "weighted_derivation": residuals_json(&der) });
    if let Some(rep) = DiffRepresentation::from_json(&v, a.dim())? {
        let hom = rep.homomorphism_residual(&a.algebra);
        let comp = rep.compatibility_residual(&a);
        ok &= residuals_vanish(&hom) && residuals_vanish(&comp);
        report["representation"] = json!({ "homomorphism": residuals_json(&hom), "compatibility": residuals_json(&comp) });
    }
    report["ok"] = json!(ok);
    Ok((report, ok))
}

fn cohomology_cmd(path: &Path, flavor: Flavor, max_degree: usize, c: &Common) -> Outcome {
    let v = load(path)?;
    let a = algebra(&v, c)?;
    let rep = coefficients(&v, &a)?;
    let spec = CochainComplexSpec::new(a, rep, max_degree, flavor);
    let report = spec.build()?.report_json()?;
    Ok((report, true))
}

fn lieact(v: &Value) -> Result<(LieActTriple, Matrix), Failure> {
    let part = |k: &str| v.get(k).ok_or_else(|| Failure::Input(format!("LieAct file needs {k:?}")));
    let dim = |x: &Value, k: &str| x.get("dim").and_then(Value::as_u64).map(|d| d as usize).ok_or_else(|| Failure::Input(format!("{k:?} needs \"dim\"")));
    let (gv, hv) = (part("g")?, part("h")?);
    let (p, q) = (dim(gv, "g")?, dim(hv, "h")?);
    let g = LieAlgebra::brackets_from_json(p, gv.get("brackets"))?;
    let h = LieAlgebra::brackets_from_json(q, hv.get("brackets"))?;
    let mut rho = vec![Matrix::zeros(q, q); p];
    if let Some(r) = v.get("rho") {
        let obj = r.as_object().ok_or_else(|| Failure::Input("\"rho\" must be an object".into()))?;
        for (key, m) in obj {
            let i: usize = key.parse().ok().filter(|&i: &usize| i >= 1 && i <= p).ok_or_else(|| Failure::Input(format!("bad rho key {key:?}")))?;
            rho[i - 1] = Matrix::from_json(m, q, q)?;
        }
    }
    let d = match v.get("D") {
        Some(m) => Matrix::from_json(m, q, p)?,
        None => Matrix::zeros(q, p),
    };
    Ok((LieActTriple { g, h, rho }, d))
}

fn mc_check(path: &Path, c: &Common) -> Outcome {
    let v = load(path)?;
    if v.get("g").is_some() {
        let weight = match &c.weight {
            Some(w) => w.clone(),
            None => v.get("weight").map(scalar::from_json).transpose()?.unwrap_or_else(Scalar::default),
        };
        let (t, d) = lieact(&v)?;
        let rep = linfty::mc_check_relative(&t, &d, &weight)?;
        let mut out = rep.to_json();
            out["structure"] = json!("relative");
        return Ok((out, rep.is_mc()));
    }
    let a = algebra(&v, c)?;
    let rep = linfty::mc_check_absolute(&a.algebra.bracket, &a.d, &a.weight)?;
    let mut out = rep.to_json();
    out["structure"] = json!("absolute");
    Ok((out, rep.is_mc()))
}

fn basis(arity: usize, n: usize) -> Vec<AltMap> {
    let len = AltMap::zero(arity, n, n).coeffs.len();
    (0..len).map(|k| AltMap::unit(arity, n, n, k)).collect()
}

fn twist_cmd(path: &Path, max_degree: usize, c: &Common) -> Outcome {
    let v = load(path)?;
    let a = algebra(&v, c)?;
    let n = a.dim();
    let mut degrees = Vec::new();
    let mut ok = true;
    for deg in 0..=max_degree.min(n + 1) {
        let mut checked = 0;
        let mut first = None;
        let cases: Vec<(AltMap, Option<AltMap>)> = if deg == 0 {
            basis(0, n).into_iter().map(|f| (f, None)).collect()
        } else {
            let (zf, zg) = (AltMap::zero(deg, n, n), AltMap::zero(deg - 1, n, n));
            basis(deg, n).into_iter().map(|f| (f, Some(zg.clone()))).chain(basis(deg - 1, n).into_iter().map(|g| (zf.clone(), Some(g)))).collect()
        };
        for (f, g) in &cases {
            let (x, y) = linfty::twist_bridge_residual(&a, f, g.as_ref())?;
            checked += 1;
            if !(x.is_zero() && y.is_zero()) && first.is_none() {
                first = Some(json!({ "f": x.to_json(), "g": y.to_json() }));
            }
        }
        ok &= first.is_none();
        degrees.push(json!({ "degree": deg, "checked": checked, "ok": first.is_none(), "first_residual": first }));
    }
    let l = linfty::absolute_structure(n, a.weight.clone());
    let alpha = l.space().element(&[(Part::M, &a.algebra.bracket), (Part::A, &AltMap::from_matrix(&a.d))])?;
    let tw = linfty::twist(&l, alpha)?;
    let mut squared = true;
    for (b, block) in l.space().blocks.iter().enumerate() {
        for i in block.admissible() {
            let x = l.space().unit(b, i);
            squared &= bracket(&tw, &[&bracket(&tw, &[&x])]).is_zero();
        }
    }
    ok &= squared;
    Ok((json!({ "bridge": degrees, "l1_squared_zero": squared, "ok": ok }), ok))
}

fn key_formula(path: Option<&Path>, dim: usize, samples: usize, c: &Common) -> Outcome {
    if let Some(path) = path {
        let v = load(path)?;
        let n = v.get("dim").and_then(Value::as_u64).ok_or_else(|| Failure::Input("missing \"dim\"".into()))? as usize;
        let f = AltMap::from_json(v.get("f").ok_or_else(|| Failure::Input("missing \"f\"".into()))?, n, n)?;
        let xs = v.get("xis").and_then(Value::as_array).ok_or_else(|| Failure::Input("missing \"xis\" array".into()))?;
        let xis: Vec<AltMap> = xs.iter().map(|x| AltMap::from_json(x, n, n)).collect::<Result<_, _>>()?;
        let refs: Vec<&AltMap> = xis.iter().collect();
        let res = linfty::key_formula_check(&f, &refs)?;
        let ok = res.is_zero();
        return Ok((json!({ "residual": res.to_json(), "ok": ok }), ok));
    }
    let mut r = catalog::rng(c.seed);
    let mut failures = Vec::new();
    for k in 0..samples {
        let fa = r.gen_range(1..=dim.max(1));
        let rr = r.gen_range(1..=fa.min(3));
        let f = linfty::random_altmap(&mut r, fa, dim, dim, 2);
        let xis: Vec<AltMap> = (0..rr)
            .map(|_| {
                let a = r.gen_range(0..=dim);
                linfty::random_altmap(&mut r, a, dim, dim, 2)
            })
            .collect();
        let refs: Vec<&AltMap> = xis.iter().collect();
        if !linfty::key_formula_check(&f, &refs)?.is_zero() {
            failures.push(k);
        }
    }
    let ok = failures.is_empty();
    Ok((json!({ "dim": dim, "samples": samples, "seed": c.seed, "failing_samples": failures, "ok": ok }), ok))
}

fn random_elements(r: &mut impl Rng, space: &linfty::BlockSpace, k: usize, max_arity: usize) -> Vec<Element> {
    let degs: Vec<i32> = space.blocks.iter().filter(|b| b.arity <= max_arity).map(|b| b.degree).collect();
    (0..k)
        .map(|_| {
            let d = degs[r.gen_range(0..degs.len())];
            space.random_homogeneous(r, d, max_arity, 2)
        })
        .collect()
}

fn morphism_check(g_dim: usize, h_dim: usize, samples: usize, c: &Common) -> Outcome {
    if g_dim == 0 || h_dim == 0 {
        return Err(Failure::Input("dimensions must be positive".into()));
    }
    let lam = c.weight.clone().unwrap_or_else(scalar::one);
    let mut r = catalog::rng(c.seed);
    let src = linfty::absolute_structure(g_dim, lam.clone());
    let dst = linfty::relative_structure(g_dim, g_dim, lam.clone());
    let mut iota_fail = 0;
    for s in 0..samples {
        let xs = random_elements(&mut r, src.space(), 1 + s % 3, 2);
        let refs: Vec<&Element> = xs.iter().collect();
        if !linfty::morphism_residual(&src, &dst, |e| linfty::iota_morphism(g_dim, e), &refs).is_zero() {
            iota_fail += 1;
        }
    }
    let rel = linfty::relative_structure(g_dim, h_dim, lam.clone());
    let abs = linfty::absolute_structure(g_dim + h_dim, lam);
    let mut incl_fail = 0;
    let mut first = None;
    for s in 0..samples {
        let xs = random_elements(&mut r, rel.space(), 1 + s % 2, 2);
        let refs: Vec<&Element> = xs.iter().collect();
        let res = linfty::morphism_residual(&rel, &abs, |e| linfty::inclusion_morphism(g_dim, h_dim, e), &refs);
        if !res.is_zero() {
            incl_fail += 1;
            first.get_or_insert_with(|| json!({ "sample": s, "arity": xs.len(), "residual": res.to_json(abs.space()) }));
        }
    }
    let s = rel.space();
    let w = g_dim + h_dim;
    let mut pair_fail = Vec::new();
    if let (Some(mb), Some(ab)) = (s.find(Part::M, 2), s.find(Part::A, 1)) {
        let tuples = AltMap::zero(2, w, w).tuples();
        for i in s.blocks[mb].admissible() {
            let hits = s.blocks[ab].admissible().into_iter().any(|j| {
                let (x, y) = (s.unit(mb, i), s.unit(ab, j));
                !linfty::morphism_residual(&rel, &abs, |e| linfty::inclusion_morphism(g_dim, h_dim, e), &[&x, &y]).is_zero()
            });
            if hits {
                let t = &tuples[i / w];
                pair_fail.push(json!({ "inputs": [t[0] + 1, t[1] + 1], "output": i % w + 1 }));
            }
        }
    }
    let incl_ok = incl_fail == 0 && pair_fail.is_empty();
    let ok = iota_fail == 0 && incl_ok;
    let report = json!({
        "iota": { "dim": g_dim, "samples": samples, "failing": iota_fail, "ok": iota_fail == 0 },
        "inclusion": {
            "g_dim": g_dim, "h_dim": h_dim, "samples": samples, "failing": incl_fail, "first_failure": first,
            "failing_bracket_components": pair_fail, "ok": incl_ok,
        },
        "ok": ok,
    });
    Ok((report, ok))
}

fn extension_cmd(cmd: &ExtCmd, c: &Common) -> Outcome {
    match cmd {
        ExtCmd::Build { path } => {
            let v = load(path)?;
            let a = algebra(&v, c)?;
            let rep = coefficients(&v, &a)?;
            let (n, m) = (a.dim(), rep.space_dim);
            let get = |k: &str, arity: usize| -> Result<AltMap, Failure> {
                match v.get(k) {
                    Some(x) => Ok(AltMap::from_json(x, n, m)?),
                    None => Ok(AltMap::zero(arity, n, m)),
                }
            };
            let e = extensions::build_extension(&a, &rep, &get("psi", 2)?, &get("chi", 1)?)?;
            Ok((e.to_json(), true))
        }
        ExtCmd::Extract { path } => {
            let e = AbelianExtension::from_json(&load(path)?)?;
            let (rep, pair) = extensions::extract_cocycle(&e)?;
            Ok((json!({ "representation": rep.to_json(), "cocycle": pair.to_json(), "split": pair.is_zero() }), true))
        }
        ExtCmd::Classify { path } => {
            let v = load(path)?;
            let a = algebra(&v, c)?;
            let rep = coefficients(&v, &a)?;
            let dim = extensions::classify(&a, &rep)?;
            Ok((json!({ "dim_H2": dim }), true))
        }
    }
}

fn deformation(path: &Path, order: Option<usize>, c: &Common) -> Result<TruncatedDeformation, Failure> {
    let mut v = load(path)?;
    if let Some(n) = order {
        v["order"] = json!(n);
    }
    if let (Some(w), Some(base)) = (&c.weight, v.get_mut("base")) {
        base["weight"] = scalar::to_json(w);
    }
    let def = TruncatedDeformation::from_json(&v)?;
    def.check_shape()?;
    Ok(def)
}

fn deform_cmd(cmd: &DeformCmd, c: &Common) -> Outcome {
    match cmd {
        DeformCmd::Verify { path, order } => {
            let def = deformation(path, *order, c)?;
            let res = deformations::deformation_residuals(&def);
            let ok = res.iter().all(|r| r.is_zero());
            let orders: Vec<Value> = res
                .iter()
                .map(|r| json!({ "order": r.order, "jacobi": scalar::vec_to_json(&r.jacobi), "operator": scalar::vec_to_json(&r.operator), "ok": r.is_zero() }))
                .collect();
            let mut report = json!({ "orders": orders, "ok": ok });
            if def.order >= 1 {
                if let Ok(inf) = deformations::infinitesimal(&def) {
                    let cocycle = cohomology::cocycle_residual(&def.base, &adjoint_rep(&def.base), &inf)?.is_zero();
                    report["infinitesimal"] = json!({ "pair": inf.to_json(), "is_cocycle": cocycle });
                }
            }
            Ok((report, ok))
        }
        DeformCmd::Rigidify { path, order } => {
            let def = deformation(path, *order, c)?;
            let n = def.dim();
            let mut total = FormalIso::identity(n, def.order);
            let mut cur = def.clone();
            for _ in 0..def.order {
                if deformations::is_constant(&cur) {
                    break;
                }
                let (iso, next) = deformations::rigidify_step(&cur)?;
                total = total.compose(&iso);
                cur = next;
            }
            let ok = deformations::is_constant(&cur);
            Ok((json!({ "trivialized": ok, "iso": total.to_json(), "deformation": cur.to_json() }), ok))
        }
    }
}

fn homotopy_check(path: &Path, c: &Common) -> Outcome {
    let mut h = HomotopyDiffLie::from_json(&load(path)?)?;
    if let Some(w) = &c.weight {
        h.weight = w.clone();
    }
    let rep = homotopy::homotopy_mc_check(&h)?;
    let mut out = rep.to_json();
    out["residual_arity"] = json!(h.residual_arity());
    Ok((out, rep.maurer_cartan))
}

fn run(cli: &Cli) -> Outcome {
    let c = &cli.common;
    match &cli.cmd {
        Cmd::CheckAxioms { path } => check_axioms(path, c),
        Cmd::Cohomology { path, flavor, max_degree } => cohomology_cmd(path, *flavor, *max_degree, c),
        Cmd::McCheck { path } => mc_check(path, c),
        Cmd::Twist { path, max_degree } => twist_cmd(path, *max_degree, c),
        Cmd::KeyFormula { path, dim, samples } => key_formula(path.as_deref(), *dim, *samples, c),
        Cmd::MorphismCheck { g_dim, h_dim, samples } => morphism_check(*g_dim, *h_dim, *samples, c),
        Cmd::Extension(e) => extension_cmd(e, c),
        Cmd::Deform(d) => deform_cmd(d, c),
        Cmd::HomotopyCheck { path } => homotopy_check(path, c),
    }
}

fn emit(report: &Value, out: Option<&Path>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    println!("{text}");
    if let Some(p) = out {
        fs::write(p, format!("{text}\n")).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.common.json_out.as_deref();
    let (report, code) = match run(&cli) {
        Ok((report, ok)) => (report, if ok { 0 } else { 1 }),
        Err(Failure::Math(msg, report)) => {
            eprintln!("difflie: {msg}");
            (report, 1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("difflie: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&report, out) {
        eprintln!("difflie: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
