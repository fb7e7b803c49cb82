//! Command-line front end: moments → Hankel spectra → bases → kernel sums →
//! duality → diagnostics, with stable scriptable file formats.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use moment_kernel::cli::{
    build_source, duality_json, eigenseq_csv, kernelsum_csv, parse_point, parse_radii,
    parse_source_spec, sweep_json, trend_json, write_atomic, RunConfig,
};
use moment_kernel::diagnostics::{bci_trend, r2_condition_suite, sweep, SweepOptions};
use moment_kernel::moment_source::save_table;
use moment_kernel::ortho_basis::KernelShape;
use moment_kernel::scalar::{cmp, parse_rat, pow2, to_dec_string, Complex, Prec, Rat};
use moment_kernel::{
    assemble, build_basis, build_torus_gram, duality_check, eigen_sequence, spectrum,
    BuildOptions, EigenOptions,
};

#[derive(Parser)]
#[command(
    name = "moment-kernel",
    version,
    about = "Hankel spectra, orthonormal bases, and reproducing-kernel diagnostics \
             for moment sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Source spec: JSON or shorthand (gaussian, lognormal:1,
    /// atomic:-1@0.5,1@0.5, table:PATH, scaled:R:SPEC, product:A|B)
    #[arg(long)]
    source: String,
    /// Output artifact path
    #[arg(long)]
    out: PathBuf,
    /// Working precision in bits
    #[arg(long, env = "MOMENT_KERNEL_PRECISION", default_value_t = 256)]
    precision_bits: usize,
    /// Ceiling for automatic precision escalation
    #[arg(long, default_value_t = 4096)]
    precision_ceiling: usize,
    /// Desk-scale dimension guard
    #[arg(long, default_value_t = 4)]
    max_dimension: usize,
}

impl Common {
    fn config(&self) -> RunConfig {
        RunConfig {
            precision_bits: self.precision_bits,
            precision_ceiling: self.precision_ceiling,
            max_dimension: self.max_dimension,
            ..RunConfig::default()
        }
    }

    fn eigen_options(&self) -> EigenOptions {
        EigenOptions::new(Prec::new(self.precision_bits)).with_ceiling(self.precision_ceiling)
    }

    fn build_options(&self) -> BuildOptions {
        BuildOptions::new(Prec::new(self.precision_bits)).with_ceiling(self.precision_ceiling)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Dump a source's moments up to a total degree as a JSON table
    Moments {
        #[command(flatten)]
        common: Common,
        /// Largest total degree to include
        #[arg(long)]
        max_degree: u32,
    },
    /// Smallest-eigenvalue sequence of the scaled Hankel truncations (CSV)
    Eigenseq {
        #[command(flatten)]
        common: Common,
        /// Scaling radius R (exact decimal or p/q)
        #[arg(long, default_value = "1")]
        radius: String,
        #[arg(long)]
        max_degree: u32,
    },
    /// Kernel partial sums Σ|P_{R,α}(z)|² at a point (CSV)
    Kernelsum {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "1")]
        radius: String,
        /// Shape bound: total-degree bound, or per-coordinate box bound
        #[arg(long)]
        max_degree: u32,
        /// Point in C^d: `re,im` pairs separated by `;`, or literals (`i,i`)
        #[arg(long)]
        point: String,
        /// Truncation shape: `total` or `box`
        #[arg(long, default_value = "total")]
        shape: String,
    },
    /// Verify the spectral duality λ_min(H)·λ_max(K) = 1 (JSON)
    Duality {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "1")]
        radius: String,
        #[arg(long)]
        max_degree: u32,
    },
    /// Determinacy diagnostics report (JSON); the verdict lives in the
    /// payload, never in the exit status
    Diagnose {
        #[command(flatten)]
        common: Common,
        /// Radius grid
        #[arg(long, default_value = "0.5,1,2")]
        radii: String,
        #[arg(long)]
        max_degree: u32,
        /// Sample points in (C\R)^d; repeatable
        #[arg(long = "points")]
        points: Vec<String>,
    },
    /// Run the built-in invariant suite on the builtin sources
    Check {
        /// Output artifact path
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "MOMENT_KERNEL_PRECISION", default_value_t = 256)]
        precision_bits: usize,
        #[arg(long, default_value_t = 4096)]
        precision_ceiling: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Moments { common, max_degree } => {
            common.config().validate()?;
            let spec = parse_source_spec(&common.source)?;
            // moments are dumped as-is; table loads for degree-N Hankel use
            // need entries to 2N, so callers pass the doubled degree here
            let source = build_source(&spec, &common.config(), max_degree.div_ceil(2))?;
            let json = save_table(&source, max_degree, Prec::new(common.precision_bits))?;
            write_atomic(&common.out, &json)?;
            println!(
                "moments: wrote {} (source={}, max_degree={})",
                common.out.display(),
                source.description(),
                max_degree
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Eigenseq {
            common,
            radius,
            max_degree,
        } => {
            common.config().validate()?;
            let spec = parse_source_spec(&common.source)?;
            let source = build_source(&spec, &common.config(), max_degree)?;
            let r = parse_rat(&radius)?;
            let seq = eigen_sequence(&source, &r, max_degree, &common.eigen_options())?;
            write_atomic(&common.out, &eigenseq_csv(&seq))?;
            println!(
                "eigenseq: wrote {} (source={}, R={}, N=0..{})",
                common.out.display(),
                source.description(),
                radius,
                max_degree
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Kernelsum {
            common,
            radius,
            max_degree,
            point,
            shape,
        } => {
            common.config().validate()?;
            let spec = parse_source_spec(&common.source)?;
            let shape: KernelShape = shape.parse()?;
            let r = parse_rat(&radius)?;
            let pt = parse_point(&point)?;
            let config = common.config();
            // a box bound n spans total degree d·n
            let probe = build_source(&spec, &config, 0)?;
            let d = probe.d();
            let basis_degree = match shape {
                KernelShape::TotalDegree => max_degree,
                KernelShape::Box => max_degree * d as u32,
            };
            let source = build_source(&spec, &config, basis_degree)?;
            if pt.len() != d {
                bail!(
                    "point has {} coordinates but the source has dimension {d}",
                    pt.len()
                );
            }
            let basis = build_basis(&source, &r, basis_degree, &common.build_options())?;
            let p = basis.prec();
            let z: Vec<Complex> = pt
                .iter()
                .map(|(re, im)| Complex::from_rat_parts(p, re, im))
                .collect();
            let ks = basis.kernel_sum(&z, shape, max_degree)?;
            write_atomic(&common.out, &kernelsum_csv(&ks.partial_sums))?;
            println!(
                "kernelsum: wrote {} (source={}, R={}, shape={}, bound={})",
                common.out.display(),
                source.description(),
                radius,
                shape,
                max_degree
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Duality {
            common,
            radius,
            max_degree,
        } => {
            common.config().validate()?;
            let spec = parse_source_spec(&common.source)?;
            let source = build_source(&spec, &common.config(), max_degree)?;
            let r = parse_rat(&radius)?;
            let basis = build_basis(&source, &r, max_degree, &common.build_options())?;
            let gram = build_torus_gram(&basis);
            let h = assemble(&source, &r, max_degree, Prec::new(common.precision_bits))?;
            let report = duality_check(&h, &gram, &common.eigen_options())?;
            write_atomic(&common.out, &duality_json(&report))?;
            println!(
                "duality: wrote {} (source={}, R={}, N={}, product={})",
                common.out.display(),
                source.description(),
                radius,
                max_degree,
                to_dec_string(&report.product)
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Diagnose {
            common,
            radii,
            max_degree,
            points,
        } => {
            common.config().validate()?;
            let spec = parse_source_spec(&common.source)?;
            let source = build_source(&spec, &common.config(), max_degree)?;
            let radii = parse_radii(&radii)?;
            let opts = SweepOptions {
                eigen: common.eigen_options(),
                ..SweepOptions::new(Prec::new(common.precision_bits))
            };
            let payload = if source.factors().is_some() {
                let pts: Vec<Vec<(Rat, Rat)>> = if points.is_empty() {
                    // default: (i, …, i)
                    vec![vec![
                        (Rat::from_integer(0.into()), Rat::from_integer(1.into()));
                        source.d()
                    ]]
                } else {
                    points
                        .iter()
                        .map(|s| parse_point(s))
                        .collect::<Result<_, _>>()?
                };
                let report = r2_condition_suite(&source, &radii, max_degree, &pts, &opts)?;
                println!(
                    "diagnose: {} → verdict `{}`",
                    source.description(),
                    report.verdict
                );
                serde_json::to_string_pretty(&report)?
            } else if source.d() == 1 {
                let report = bci_trend(&source, max_degree, &opts)?;
                println!(
                    "diagnose: {} → trend `{}`",
                    source.description(),
                    report.verdict
                );
                trend_json(source.description(), &report)
            } else {
                let table = sweep(&source, &radii, max_degree, &opts)?;
                println!(
                    "diagnose: {} → sweep over {} radii (no product structure)",
                    source.description(),
                    radii.len()
                );
                sweep_json(&table)
            };
            write_atomic(&common.out, &payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Check {
            out,
            precision_bits,
            precision_ceiling,
        } => {
            let report = run_check_suite(precision_bits, precision_ceiling)
                .context("running the invariant suite")?;
            let all_passed = report.checks.iter().all(|c| c.passed);
            for c in &report.checks {
                println!(
                    "check {:<28} {}",
                    c.name,
                    if c.passed { "pass" } else { "FAIL" }
                );
            }
            write_atomic(&out, &serde_json::to_string_pretty(&report)?)?;
            println!(
                "check: {}/{} passed → {}",
                report.checks.iter().filter(|c| c.passed).count(),
                report.checks.len(),
                out.display()
            );
            Ok(if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

#[derive(serde::Serialize)]
struct CheckReport {
    precision_bits: usize,
    all_passed: bool,
    checks: Vec<CheckItem>,
}

#[derive(serde::Serialize)]
struct CheckItem {
    name: String,
    passed: bool,
    detail: String,
}

fn run_check_suite(bits: usize, ceiling: usize) -> anyhow::Result<CheckReport> {
    use moment_kernel::moment_source::{
        atomic_moments, gaussian_moments, lognormal_moments, product, AtomicMeasure1D,
    };

    let p = Prec::new(bits);
    let eopts = EigenOptions::new(p).with_ceiling(ceiling);
    let bopts = BuildOptions::new(p).with_ceiling(ceiling);
    let one = Rat::from_integer(1.into());
    let mut checks: Vec<CheckItem> = Vec::new();
    let mut push = |name: &str, outcome: anyhow::Result<String>| {
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(e) => (false, format!("{e:#}")),
        };
        checks.push(CheckItem {
            name: name.to_string(),
            passed,
            detail,
        });
    };

    // 1. index order round-trip
    push("index-order-roundtrip", {
        (|| {
            for d in 1..=3usize {
                for n in 0..=6u32 {
                    let order = moment_kernel::enumerate(d, n)?;
                    for k in 0..order.len() {
                        if order.rank(order.index(k))? != k {
                            bail!("rank mismatch at d={d} n={n} k={k}");
                        }
                    }
                }
            }
            Ok("rank(enumerate[k]) = k for d<=3, N<=6".to_string())
        })()
    });

    // 2. closed-form spectrum of the degree-2 gaussian truncation
    push("gaussian-h2-spectrum", {
        (|| {
            let h = assemble(&gaussian_moments(), &one, 2, p)?;
            let s = spectrum(&h, &eopts)?;
            let sqrt2 = p.sqrt(&p.from_u64(2));
            let expect = [
                p.sub(&p.from_u64(2), &sqrt2),
                p.one(),
                p.add(&p.from_u64(2), &sqrt2),
            ];
            let tol = pow2(-199);
            for (have, want) in s.eigenvalues.iter().zip(&expect) {
                if cmp(&p.sub(have, want).abs(), &tol) != std::cmp::Ordering::Less {
                    bail!("eigenvalue off: {}", to_dec_string(have));
                }
            }
            Ok(format!("eigenvalues match {{2-sqrt2, 1, 2+sqrt2}} at {bits} bits"))
        })()
    });

    // 3. exact zero for the two-atom measure
    push("two-atom-exact-zero", {
        (|| {
            let sym = atomic_moments(AtomicMeasure1D::new(vec![
                (parse_rat("-1")?, parse_rat("1/2")?),
                (parse_rat("1")?, parse_rat("1/2")?),
            ])?);
            let seq = eigen_sequence(&sym, &one, 3, &eopts)?;
            if !seq[2].exact_zero || !seq[3].exact_zero || seq[1].exact_zero {
                bail!("exact-zero pattern wrong");
            }
            Ok("lambda hits exact 0 at N=2 and stays".to_string())
        })()
    });

    // 4 + 5. duality and interlacing over a small grid
    push("duality-and-interlacing", {
        (|| {
            let gaussian = gaussian_moments();
            let lognormal = lognormal_moments(one.clone())?;
            let mixed = product(vec![gaussian.clone(), lognormal.clone()])?;
            let grid: Vec<(&moment_kernel::MomentSource, Vec<Rat>, u32)> = vec![
                (&gaussian, parse_radii_str("1/2,1,2")?, 5),
                (&lognormal, vec![one.clone()], 4),
                (&mixed, vec![one.clone()], 3),
            ];
            let mut cells = 0usize;
            for (source, radii, n_max) in grid {
                for r in &radii {
                    let mut prev: Option<moment_kernel::SpectrumResult> = None;
                    for n in 0..=n_max {
                        let h = assemble(source, r, n, p)?;
                        let s = spectrum(&h, &eopts)?;
                        if let Some(prev) = &prev {
                            let slack = p.add(&prev.residual_abs, &s.residual_abs);
                            let bound = p.add(prev.lambda_min(), &slack);
                            if cmp(s.lambda_min(), &bound) == std::cmp::Ordering::Greater {
                                bail!("interlacing violated at N={n}");
                            }
                        }
                        let basis = build_basis(source, r, n, &bopts)?;
                        let gram = build_torus_gram(&basis);
                        let rep = duality_check(&h, &gram, &eopts)?;
                        let dev = p.sub(&rep.product, &p.one()).abs();
                        let tol = p.mul(&p.from_u64(10), &rep.residual_bound);
                        if cmp(&dev, &tol) == std::cmp::Ordering::Greater {
                            bail!(
                                "duality off at N={n}: product {}",
                                to_dec_string(&rep.product)
                            );
                        }
                        if cmp(&rep.residual_bound, &pow2(-20)) == std::cmp::Ordering::Greater {
                            bail!("duality bound too loose at N={n}");
                        }
                        prev = Some(s);
                        cells += 1;
                    }
                }
            }
            Ok(format!(
                "lambda_min(H)*lambda_max(K) = 1 within certified bounds on {cells} cells"
            ))
        })()
    });

    // 6. exact and float reproducing property
    push("reproducing-property", {
        (|| {
            use moment_kernel::RatPoly;
            let basis = build_basis(&gaussian_moments(), &one, 5, &bopts)?;
            let poly = RatPoly::new(1)
                .with_term(&[2], parse_rat("1")?)
                .with_term(&[0], parse_rat("-1")?);
            let y = parse_rat("3/2")?;
            let exact = basis.truncated_kernel_apply_exact(&poly, std::slice::from_ref(&y))?;
            let direct = poly.eval_rat(&[y])?;
            if exact != direct {
                bail!("exact reproducing failed");
            }
            let z = vec![Complex::new(p.zero(), p.one())];
            let v = basis.truncated_kernel_apply(&poly, &z)?;
            let want = p.from_i64(-2);
            if cmp(&p.sub(&v.re, &want).abs(), &pow2(-199)) != std::cmp::Ordering::Less {
                bail!("float reproducing failed");
            }
            Ok("kernel reproduces polynomials exactly (LDL path) and in floats".to_string())
        })()
    });

    // 7. tensor structure of a product basis
    push("tensor-factorization", {
        (|| {
            let g = gaussian_moments();
            let gg = product(vec![g.clone(), g.clone()])?;
            let b2 = build_basis(&gg, &one, 3, &bopts)?;
            let b1 = build_basis(&g, &one, 3, &bopts)?;
            let order = b2.order();
            let tol = pow2(-199);
            for i in 0..order.len() {
                let ai = order.index(i).exponents().to_vec();
                for j in 0..order.len() {
                    let gj = order.index(j).exponents().to_vec();
                    let want = p.mul(
                        b1.coefficients().get(ai[0] as usize, gj[0] as usize),
                        b1.coefficients().get(ai[1] as usize, gj[1] as usize),
                    );
                    let have = b2.coefficients().get(i, j);
                    if cmp(&p.sub(have, &want).abs(), &tol) != std::cmp::Ordering::Less {
                        bail!("tensor mismatch at ({ai:?},{gj:?})");
                    }
                }
            }
            Ok("product basis equals the tensor of 1-d bases".to_string())
        })()
    });

    // 8. box-kernel factorization
    push("kernel-box-factorization", {
        (|| {
            let l = lognormal_moments(one.clone())?;
            let ll = product(vec![l.clone(), l.clone()])?;
            let bound = 3u32;
            let b2 = build_basis(&ll, &one, 2 * bound, &bopts)?;
            let b1 = build_basis(&l, &one, bound, &bopts)?;
            let pp = b2.prec();
            let z = vec![
                Complex::new(pp.zero(), pp.one()),
                Complex::new(pp.zero(), pp.one()),
            ];
            let lhs = b2
                .kernel_sum(&z, KernelShape::Box, bound)?
                .partial_sums
                .last()
                .unwrap()
                .clone();
            let p1 = b1.prec();
            let s1 = b1
                .kernel_sum(
                    &[Complex::new(p1.zero(), p1.one())],
                    KernelShape::TotalDegree,
                    bound,
                )?
                .partial_sums
                .last()
                .unwrap()
                .clone();
            let rhs = pp.mul(&s1, &s1);
            let rel = pp.div(&pp.sub(&lhs, &rhs).abs(), &rhs);
            if cmp(&rel, &pow2(-160)) != std::cmp::Ordering::Less {
                bail!("box kernel mismatch: rel error {}", to_dec_string(&rel));
            }
            Ok("box kernel sum of the product factors into 1-d sums".to_string())
        })()
    });

    // 9. scaling covariance
    push("scaling-covariance", {
        (|| {
            let g = gaussian_moments();
            let b1 = build_basis(&g, &one, 4, &bopts)?;
            let tol = pow2(-199);
            for r_str in ["1/2", "2"] {
                let r = parse_rat(r_str)?;
                let br = build_basis(&g, &r, 4, &bopts)?;
                for (zr, zi) in [("1/3", "2/5"), ("-1/2", "1"), ("2", "-3/7")] {
                    let z = Complex::from_rat_parts(p, &parse_rat(zr)?, &parse_rat(zi)?);
                    let rz = z.scale(p, &p.from_rat(&r));
                    let left = br.evaluate(&[z])?;
                    let right = b1.evaluate(&[rz])?;
                    for (a, b) in left.iter().zip(&right) {
                        let dr = p.sub(&a.re, &b.re).abs();
                        let di = p.sub(&a.im, &b.im).abs();
                        if cmp(&dr, &tol) != std::cmp::Ordering::Less
                            || cmp(&di, &tol) != std::cmp::Ordering::Less
                        {
                            bail!("covariance off at R={r_str}");
                        }
                    }
                }
            }
            Ok("P_{R,a}(z) = P_a(Rz) across scalings".to_string())
        })()
    });

    // 10. torus-Gram entries against trapezoidal quadrature
    push("torus-quadrature-oracle", {
        (|| {
            let basis = build_basis(&gaussian_moments(), &one, 2, &bopts)?;
            let gram = build_torus_gram(&basis);
            let coeffs: Vec<Vec<f64>> = (0..basis.len())
                .map(|i| {
                    (0..basis.len())
                        .map(|j| moment_kernel::scalar::to_f64_lossy(basis.coefficients().get(i, j)))
                        .collect()
                })
                .collect();
            let nodes = 1 << 12;
            for a in 0..basis.len() {
                for b in 0..basis.len() {
                    let mut acc = (0.0f64, 0.0f64);
                    for k in 0..nodes {
                        let theta = 2.0 * std::f64::consts::PI * k as f64 / nodes as f64;
                        let z = (theta.cos(), theta.sin());
                        let pa = eval_poly_f64(&coeffs[a], z);
                        let pb = eval_poly_f64(&coeffs[b], z);
                        // pa * conj(pb)
                        acc.0 += pa.0 * pb.0 + pa.1 * pb.1;
                        acc.1 += pa.1 * pb.0 - pa.0 * pb.1;
                    }
                    let quad = acc.0 / nodes as f64;
                    let direct = moment_kernel::scalar::to_f64_lossy(gram.matrix().get(a, b));
                    if (quad - direct).abs() > 1e-8 {
                        bail!("quadrature mismatch at ({a},{b}): {quad} vs {direct}");
                    }
                }
            }
            Ok("K entries match 2^12-node trapezoid quadrature to 1e-8".to_string())
        })()
    });

    let all_passed = checks.iter().all(|c| c.passed);
    Ok(CheckReport {
        precision_bits: bits,
        all_passed,
        checks,
    })
}

fn eval_poly_f64(coeffs: &[f64], z: (f64, f64)) -> (f64, f64) {
    // Horner over ascending powers: coeffs[k] · z^k
    let mut acc = (0.0f64, 0.0f64);
    for &c in coeffs.iter().rev() {
        let re = acc.0 * z.0 - acc.1 * z.1 + c;
        let im = acc.0 * z.1 + acc.1 * z.0;
        acc = (re, im);
    }
    acc
}

fn parse_radii_str(s: &str) -> anyhow::Result<Vec<Rat>> {
    Ok(parse_radii(s)?)
}
