use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use wicklab_core::counting::{lemma_sum_verify, SumCase};
use wicklab_core::moments::{
    chaos_decomposition_check, default_shell_range, delta_moment, exact_table, fit_exponent, mc_moment,
    product_bound_check, regularity_report, shell_of, Factor, MomentTable, ObjectKind, ObjectSpec, ProductMethod,
    Target,
};
use wicklab_core::solver::{
    build_forcing, convergence_study, default_steps, fmt_num, picard_solve, ConvergenceOptions, ParamSet,
    PicardOptions,
};
use wicklab_core::spectral::{write_field, FreqVec};
use wicklab_core::stochastic::{sigma_n, wick_power, GaussianDraw, LinearSolution, WickSpec};
use wicklab_core::VERSION;

use crate::config::Resolved;
use crate::error::CliError;

pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [&'static str],
    pub run: fn(&Resolved) -> Result<(), CliError>,
}

const PARAM_KEYS: [&str; 4] = ["d", "k", "alpha", "beta"];

pub const COMMANDS: &[Command] = &[
    Command {
        name: "params",
        about: "Check admissibility and print the sigma window",
        keys: &PARAM_KEYS,
        run: params,
    },
    Command {
        name: "sample",
        about: "Sample the random linear solution Z_N(t)",
        keys: &["d", "N", "alpha", "beta", "t", "seed", "out"],
        run: sample,
    },
    Command {
        name: "wick",
        about: "Sample the Wick power :Z_N^ell:(t)",
        keys: &["d", "N", "alpha", "beta", "t", "ell", "seed", "out"],
        run: wick,
    },
    Command {
        name: "moments",
        about: "Shell second moments by exact oracle, Monte Carlo or time increments",
        keys: &[
            "d", "N", "k", "alpha", "beta", "t", "object", "ell", "k1", "k2", "method", "samples", "h", "seed", "out",
        ],
        run: moments,
    },
    Command {
        name: "fit",
        about: "Fit the decay exponent of a moment table",
        keys: &["input", "d", "shells"],
        run: fit,
    },
    Command {
        name: "prodcheck",
        about: "Product bound and chaos orthogonality checks",
        keys: &[
            "d", "N", "k", "alpha", "beta", "t", "factors", "check", "method", "samples", "seed", "out",
        ],
        run: prodcheck,
    },
    Command {
        name: "counting",
        about: "Verify lattice convolution bounds over a sweep",
        keys: &["d", "case", "a", "b", "c", "lo", "hi", "R", "out"],
        run: counting,
    },
    Command {
        name: "solve",
        about: "Solve the remainder equation by Picard iteration",
        keys: &[
            "d", "N", "k", "alpha", "beta", "sigma", "T", "seed", "steps", "tol", "max_iter", "out",
        ],
        run: solve,
    },
    Command {
        name: "converge",
        about: "Compare remainders along a ladder of cutoffs",
        keys: &[
            "d", "k", "alpha", "beta", "sigma", "T", "seed", "ladder", "steps", "tol", "max_iter", "control", "out",
        ],
        run: converge,
    },
    Command {
        name: "report",
        about: "Summarize an output directory",
        keys: &["out"],
        run: report,
    },
];

pub fn find(name: &str) -> Option<&'static Command> {
    COMMANDS.iter().find(|c| c.name == name)
}

fn param_set(cfg: &Resolved, cutoff: usize) -> Result<ParamSet, CliError> {
    let has = |k: &str| cfg.reads(k);
    let get = |k: &str, default: f64| if has(k) { cfg.f64(k) } else { Ok(default) };
    let base = ParamSet::default();
    let p = ParamSet {
        d: cfg.usize("d")?,
        k: if has("k") { cfg.usize("k")? } else { base.k },
        alpha: cfg.f64("alpha")?,
        beta: cfg.f64("beta")?,
        cutoff,
        horizon: get("T", base.horizon)?,
        sigma: get("sigma", base.sigma)?,
        seed: if has("seed") { cfg.u64("seed")? } else { base.seed },
    };
    p.validate()?;
    if cutoff == 0 {
        return Err(CliError::Usage("N must be at least 1".into()));
    }
    Ok(p)
}

/// Creates the output directory with the resolved config and version.
fn output_dir(cfg: &Resolved) -> Result<PathBuf, CliError> {
    let dir = PathBuf::from(cfg.raw("out")?);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.txt"), cfg.serialize())?;
    fs::write(dir.join("VERSION"), format!("wicklab {VERSION}\n"))?;
    Ok(dir)
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut put = |r: &[String]| w.write_record(r).map_err(|e| CliError::Runtime(e.to_string()));
    put(&header.iter().map(|s| s.to_string()).collect::<Vec<_>>())?;
    for r in rows {
        put(r)?;
    }
    w.flush()?;
    Ok(())
}

fn params(cfg: &Resolved) -> Result<(), CliError> {
    let d = cfg.usize("d")?;
    let k = cfg.usize("k")?;
    let (alpha, beta) = (cfg.f64("alpha")?, cfg.f64("beta")?);
    if !(1..=3).contains(&d) || k == 0 || alpha <= 0.0 {
        return Err(CliError::Usage("need d in 1..=3, k >= 1 and alpha > 0".into()));
    }
    println!("{}", wicklab_core::solver::admissible_params(d, k, alpha, beta));
    Ok(())
}

fn linear(cfg: &Resolved) -> Result<(ParamSet, LinearSolution<f64>, f64), CliError> {
    let p = param_set(cfg, cfg.usize("N")?)?;
    let t = cfg.f64("t")?;
    if t < 0.0 {
        return Err(CliError::Usage("t must be nonnegative".into()));
    }
    let draw = GaussianDraw::sample(p.lattice()?, p.seed);
    Ok((p.clone(), LinearSolution::new(draw, p.beta, p.alpha), t))
}

fn sample(cfg: &Resolved) -> Result<(), CliError> {
    let (p, lin, t) = linear(cfg)?;
    let dir = output_dir(cfg)?;
    let z = lin.at(t);
    write_field(dir.join("z.wlf"), &z)?;
    println!("sigma_N = {}", sigma_n(&p.lattice()?, p.beta));
    println!("|Z(t)|_L2^2 = {}", z.l2_sq());
    println!("wrote {}", dir.join("z.wlf").display());
    Ok(())
}

fn wick(cfg: &Resolved) -> Result<(), CliError> {
    let (p, lin, t) = linear(cfg)?;
    let ell = cfg.usize("ell")?;
    let sigma = sigma_n(&p.lattice()?, p.beta);
    let w = wick_power(&lin.at(t), WickSpec::new(ell, sigma)?)?;
    let dir = output_dir(cfg)?;
    let path = dir.join("wick.wlf");
    write_field(&path, &w)?;
    println!("sigma_N = {sigma}");
    println!("mean = {}", w.coeffs()[w.lattice().center()].re);
    println!("wrote {}", path.display());
    Ok(())
}

fn object_spec(cfg: &Resolved, p: ParamSet) -> Result<ObjectSpec, CliError> {
    let kind = match cfg.choice("object", &["z", "wick", "duhamel", "product"])? {
        "z" => ObjectKind::Z,
        "wick" => ObjectKind::WickPower(cfg.usize("ell")?),
        "duhamel" => ObjectKind::DuhamelWick(p.k),
        _ => ObjectKind::Product {
            k1: cfg.usize("k1")?,
            k2: cfg.usize("k2")?,
        },
    };
    let t = cfg.f64("t")?;
    Ok(ObjectSpec::new(kind, p, t)?)
}

fn moments(cfg: &Resolved) -> Result<(), CliError> {
    let p = param_set(cfg, cfg.usize("N")?)?;
    let spec = object_spec(cfg, p.clone())?;
    let method = cfg.choice("method", &["exact", "mc", "delta"])?;
    let top = shell_of(&[p.cutoff as i64]);
    let mut targets: Vec<Target> = (0..=top).map(Target::Shell).collect();
    if p.d == 1 {
        targets = (0..=p.cutoff as i64).map(|m| Target::Mode(FreqVec(vec![m]))).collect();
    }
    let (samples, seed) = (cfg.usize("samples")?, cfg.u64("seed")?);
    let table = match method {
        "exact" => exact_table(&spec, &targets)?,
        "mc" => mc_moment(&spec, &targets, samples, seed)?,
        _ => delta_moment(&spec, cfg.f64("h")?, &targets, samples, seed)?,
    };
    let dir = output_dir(cfg)?;
    let path = dir.join("moments.csv");
    table.write_csv(fs::File::create(&path)?)?;
    println!("{} targets, method {method}", table.len());
    println!("wrote {}", path.display());
    Ok(())
}

fn fit(cfg: &Resolved) -> Result<(), CliError> {
    let input = PathBuf::from(cfg.raw("input")?);
    let d = cfg.usize("d")?;
    let file = fs::File::open(&input).map_err(|e| CliError::Usage(format!("cannot open {}: {e}", input.display())))?;
    let table = MomentTable::read_csv(file)?;
    let range = match cfg.raw("shells")? {
        "auto" => {
            let cutoff = table
                .entries()
                .iter()
                .map(|e| match &e.target {
                    Target::Mode(n) => n.sup_norm() as usize,
                    Target::Shell(j) => 1usize << (j + 1),
                })
                .max()
                .unwrap_or(0);
            default_shell_range(cutoff)
        }
        s => {
            let bad = || CliError::Usage(format!("invalid value '{s}' for shells: expected lo..hi or auto"));
            let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
            (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?)
        }
    };
    let f = fit_exponent(&table, d, range)?;
    println!("slope {:.3}", f.slope);
    println!("stderr {:.3}", f.stderr);
    println!("shells {}..{} ({} used)", f.shell_range.0, f.shell_range.1, f.shells_used);
    println!("{}", regularity_report(&f, None));
    Ok(())
}

fn parse_factors(s: &str) -> Result<Vec<Factor>, CliError> {
    let bad = |x: &str| CliError::Usage(format!("invalid factor '{x}': expected z, wick:L, duhamel:K or delta:H"));
    s.split(',')
        .map(str::trim)
        .map(|x| {
            let (name, arg) = x.split_once(':').unwrap_or((x, ""));
            match name {
                "z" if arg.is_empty() => Ok(Factor::Wick(1)),
                "wick" => arg.parse().map(Factor::Wick).map_err(|_| bad(x)),
                "duhamel" => arg.parse().map(Factor::Duhamel).map_err(|_| bad(x)),
                "delta" => arg.parse().map(Factor::DeltaZ).map_err(|_| bad(x)),
                _ => Err(bad(x)),
            }
        })
        .collect()
}

fn prodcheck(cfg: &Resolved) -> Result<(), CliError> {
    let p = param_set(cfg, cfg.usize("N")?)?;
    let factors = parse_factors(cfg.raw("factors")?)?;
    let t = cfg.f64("t")?;
    let axis = |max: usize| -> Vec<FreqVec> {
        (0..=max as i64)
            .map(|m| {
                let mut v = vec![0; p.d];
                v[0] = m;
                FreqVec(v)
            })
            .collect()
    };
    let check = cfg.choice("check", &["bound", "decomposition"])?;
    let method = cfg.choice("method", &["exact", "mc"])?;
    let dir = output_dir(cfg)?;
    let path = dir.join("prodcheck.csv");
    if check == "bound" {
        let method = match method {
            "exact" => ProductMethod::Exact,
            _ => ProductMethod::MonteCarlo {
                samples: cfg.usize("samples")?,
                seed: cfg.u64("seed")?,
            },
        };
        let rep = product_bound_check(&factors, &p, t, &axis(p.cutoff), method)?;
        let rows: Vec<Vec<String>> = rep
            .rows
            .iter()
            .map(|r| {
                vec![
                    format!("{:?}", r.n.0),
                    r.lhs.to_string(),
                    r.lhs_stderr.to_string(),
                    r.rhs.to_string(),
                    r.ratio.to_string(),
                ]
            })
            .collect();
        write_csv(&path, &["n", "lhs", "lhs_stderr", "rhs", "ratio"], &rows)?;
        println!("sup ratio {}", rep.sup);
        println!("inf ratio {}", rep.inf);
        println!("spread {:.4}", rep.spread());
    } else {
        let mut rows = Vec::new();
        let mut worst: f64 = 0.0;
        for n in axis(p.cutoff) {
            let rep = chaos_decomposition_check(&factors, &p, t, &n.0)?;
            worst = worst.max(rep.relative_residual());
            rows.push(vec![
                format!("{:?}", n.0),
                rep.full.to_string(),
                rep.residual.to_string(),
                rep.relative_residual().to_string(),
            ]);
        }
        write_csv(&path, &["n", "full", "residual", "relative_residual"], &rows)?;
        println!("max relative residual {worst:.3e}");
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn counting(cfg: &Resolved) -> Result<(), CliError> {
    let d = cfg.usize("d")?;
    let (a, b) = (cfg.f64("a")?, cfg.f64("b")?);
    let case = match cfg.choice("case", &["pair", "triple"])? {
        "pair" => SumCase::Pair { a, b },
        _ => SumCase::Triple { a, b, c: cfg.f64("c")? },
    };
    let radius = match cfg.auto_usize("R")? {
        Some(r) => r,
        None if d == 1 && matches!(case, SumCase::Pair { .. }) => 1 << 16,
        None if d == 1 => 1 << 15,
        None => 1 << 9,
    };
    let rep = lemma_sum_verify(case, d, (cfg.f64("lo")?, cfg.f64("hi")?), radius)?;
    let dir = output_dir(cfg)?;
    let path = dir.join("counting.csv");
    rep.write_csv_file(&path)?;
    println!("case {case}, d = {d}, R = {radius}");
    println!("sup ratio {}", rep.sup);
    println!("inf ratio {}", rep.inf);
    println!("monotone over the top octave: {}", rep.monotone_top_octave);
    println!("growth flag: {}", rep.growth_flag);
    println!("wrote {}", path.display());
    Ok(())
}

fn picard_options(cfg: &Resolved) -> Result<PicardOptions, CliError> {
    let tol = cfg.f64("tol")?;
    if tol <= 0.0 {
        return Err(CliError::Usage("tol must be positive".into()));
    }
    Ok(PicardOptions {
        tol,
        max_iter: cfg.usize("max_iter")?,
    })
}

fn window_note(p: &ParamSet) {
    let adm = p.admissibility();
    println!("{adm}");
    if !adm.window().is_some_and(|w| w.contains(p.sigma)) {
        println!("warning: sigma = {} outside admissible window", fmt_num(p.sigma));
    }
}

fn solve(cfg: &Resolved) -> Result<(), CliError> {
    let p = param_set(cfg, cfg.usize("N")?)?;
    let opts = picard_options(cfg)?;
    let steps = match cfg.auto_usize("steps")? {
        Some(s) => s,
        None => default_steps(&p)?,
    };
    window_note(&p);
    let fam = build_forcing(&p, steps)?;
    let (v, rep) = picard_solve(&fam, opts)?;
    let dir = output_dir(cfg)?;
    let rows: Vec<Vec<String>> = rep
        .increments
        .iter()
        .enumerate()
        .map(|(i, inc)| {
            let ratio = if i == 0 { String::new() } else { rep.contraction_ratios[i - 1].to_string() };
            vec![(i + 1).to_string(), inc.to_string(), rep.iterate_norms[i].to_string(), ratio]
        })
        .collect();
    write_csv(&dir.join("picard.csv"), &["iteration", "increment", "norm", "ratio"], &rows)?;
    write_field(dir.join("v.wlf"), v.frames().last().expect("nonempty grid"))?;
    println!("steps {steps}");
    println!("||Xi||_Z = {}", fam.norm_z());
    println!("iterations {}", rep.increments.len());
    if let Some(r) = rep.contraction_ratios.iter().cloned().reduce(f64::max) {
        println!("max contraction ratio {r:.4}");
    }
    println!("final residual {:.3e}", rep.final_residual);
    println!("wrote {}", dir.display());
    if rep.converged {
        Ok(())
    } else {
        Err(CliError::Runtime(format!("Picard iteration did not converge in {} iterations", opts.max_iter)))
    }
}

fn converge(cfg: &Resolved) -> Result<(), CliError> {
    let ladder: Vec<usize> = cfg
        .raw("ladder")?
        .split(',')
        .map(|x| x.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage("ladder must be a comma-separated list of cutoffs".into()))?;
    let p = param_set(cfg, *ladder.first().unwrap_or(&1))?;
    let opts = ConvergenceOptions {
        steps: cfg.auto_usize("steps")?,
        picard: picard_options(cfg)?,
        control: cfg.bool("control")?,
    };
    window_note(&p);
    let rep = convergence_study(&p, &ladder, opts)?;
    let dir = output_dir(cfg)?;
    let path = dir.join("converge.csv");
    rep.write_csv(fs::File::create(&path)?)?;
    println!("steps {}", rep.steps);
    for r in &rep.rows {
        println!("N = {} -> {}: diff {:.4e}", r.n, r.next, r.diff_norm);
    }
    println!("strictly decreasing: {}", rep.strictly_decreasing);
    if let Some(g) = rep.gamma_hat {
        println!("gamma_hat {g:.3}");
    }
    if let Some(flag) = rep.flag() {
        println!("flag: {flag}");
    }
    println!("wrote {}", path.display());
    if rep.all_converged() {
        Ok(())
    } else {
        Err(CliError::Runtime("Picard iteration did not converge on every rung".into()))
    }
}

fn report(cfg: &Resolved) -> Result<(), CliError> {
    let dir = PathBuf::from(cfg.raw("out")?);
    let read = |name: &str| fs::read_to_string(dir.join(name));
    let version = read("VERSION").map_err(|_| CliError::Usage(format!("{} is not a wicklab output directory", dir.display())))?;
    let mut out = std::io::stdout().lock();
    write!(out, "{version}")?;
    if let Ok(c) = read("config.txt") {
        for line in c.lines() {
            writeln!(out, "  {line}")?;
        }
    }
    let mut files: Vec<_> = fs::read_dir(&dir)?.filter_map(|e| e.ok()).map(|e| e.path()).collect();
    files.sort();
    for f in files {
        let name = f.file_name().and_then(|s| s.to_str()).unwrap_or("").to_string();
        match f.extension().and_then(|s| s.to_str()) {
            Some("csv") => {
                let text = fs::read_to_string(&f)?;
                let header = text.lines().next().unwrap_or("");
                writeln!(out, "{name}: {} rows [{header}]", text.lines().count().saturating_sub(1))?;
            }
            Some("wlf") => writeln!(out, "{name}: {} bytes", fs::metadata(&f)?.len())?,
            _ => {}
        }
    }
    Ok(())
}
