//! Batch front-end: constructs codes, runs sweeps, verifies bounds, and
//! emits machine-readable reports. Everything is deterministic; identical
//! invocations produce byte-identical output.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};

use fvlab::asymptotics::{geometric_grid, third_order_fit, RateVariant};
use fvlab::coding::{brute_force_eval, epsilon_rate, length_distribution, optimal_code};
use fvlab::converse::{
    converse_epsilon_lower_with, entropy_sphere_grid, j_functional, kraft_lp_optimal,
    mixture_log2_probs, tau_grid, worst_case_type_size_bits, KraftProfile,
};
use fvlab::guessing::{code_to_guesser, guesser_rate_bits, guesser_to_code};
use fvlab::laplace::{laplace_check, LaplaceCase};
use fvlab::numeric::{fmt_sig, log2_biguint};
use fvlab::oracles::{kraft_lp_bruteforce, kraft_test_profiles};
use fvlab::rates::code_rate_bits;
use fvlab::report::{
    dist_label, to_csv, to_json, ConverseRow, FitSummary, LaplaceRow, RateRow, SweepRow,
};
use fvlab::typeset::{c_minus, n_f_bound, type_class_size, TypeSet};
use fvlab::universal::{
    binary_interleave_code, one_bit_gap, two_stage_ranked_code, type_size_ranked_code,
    TwoStageVariant,
};
use fvlab::{CodeKind, Dist};

#[derive(Parser)]
#[command(
    name = "fvlab",
    version,
    about = "Exact finite-blocklength rates for universal fixed-to-variable source codes"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact epsilon-rates for selected codes at one operating point.
    Rates {
        /// Alphabet size.
        #[arg(long)]
        m: usize,
        /// Source probabilities, comma separated.
        #[arg(long)]
        dist: String,
        /// Blocklength.
        #[arg(long)]
        n: u32,
        /// Comma-separated epsilon list.
        #[arg(long)]
        eps: String,
        /// Comma-separated code list (optimal|type-size|2s-fv|2s-ff|interleave|all).
        #[arg(long, default_value = "all")]
        code: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Geometric blocklength sweep with a third-order regression per code.
    Sweep {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        dist: String,
        /// Blocklength range lo:hi (geometric, half-power-of-two steps) or a
        /// comma-separated list.
        #[arg(long)]
        n: String,
        /// Comma-separated epsilon list.
        #[arg(long)]
        eps: String,
        #[arg(long, default_value = "type-size")]
        code: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mixture converse bound on a constant-J manifold.
    Converse {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        dist: String,
        /// Comma-separated blocklength list.
        #[arg(long)]
        n: String,
        #[arg(long)]
        eps: String,
        /// Constant-J level; defaults to J(dist) at each n.
        #[arg(long)]
        gamma: Option<f64>,
        /// Number of rays used to discretize the manifold.
        #[arg(long, default_value_t = 160)]
        resolution: usize,
        /// Minimum coordinate kept on the manifold grid.
        #[arg(long, default_value_t = 0.02)]
        beta_floor: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full invariant suite; nonzero exit on any violation.
    Verify {
        /// Cap on the blocklength of sequence-level oracle comparisons.
        #[arg(long, default_value_t = 8)]
        max_n: u32,
    },
    /// Laplace approximation catalog checks.
    Laplace {
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_dist(m: usize, s: &str) -> Result<Dist, String> {
    let probs: Vec<f64> = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad probability {x:?}: {e}"))
        })
        .collect::<Result<_, _>>()?;
    if probs.len() != m {
        return Err(format!("--dist has {} entries, --m is {m}", probs.len()));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(format!("--dist sums to {sum}, expected 1 within 1e-9"));
    }
    Dist::normalized(probs).map_err(|e| e.to_string())
}

fn parse_eps_list(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for tok in s.split(',') {
        let e: f64 = tok
            .trim()
            .parse()
            .map_err(|err| format!("bad epsilon {tok:?}: {err}"))?;
        if !(e > 0.0 && e < 1.0) {
            return Err(format!("epsilon {e} outside (0, 1)"));
        }
        out.push(e);
    }
    Ok(out)
}

fn parse_codes(s: &str, m: usize) -> Result<Vec<CodeKind>, String> {
    if s == "all" {
        // the interleaved code only exists for binary alphabets
        return Ok(CodeKind::all()
            .into_iter()
            .filter(|k| m == 2 || *k != CodeKind::Interleave)
            .collect());
    }
    s.split(',')
        .map(|tok| CodeKind::from_str(tok.trim()).map_err(|e| e.to_string()))
        .collect()
}

fn parse_n_list(s: &str) -> Result<Vec<u32>, String> {
    if let Some((lo, hi)) = s.split_once(':') {
        let lo: u32 = lo.parse().map_err(|e| format!("bad range start: {e}"))?;
        let hi: u32 = hi.parse().map_err(|e| format!("bad range end: {e}"))?;
        if lo == 0 || hi < lo {
            return Err(format!("bad range {s:?}"));
        }
        return Ok(geometric_grid(lo, hi));
    }
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<u32>()
                .map_err(|e| format!("bad blocklength {tok:?}: {e}"))
        })
        .collect()
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => std::fs::write(path, content).map_err(|e| format!("writing {path:?}: {e}")),
    }
}

fn run() -> Result<(), String> {
    match Cli::parse().cmd {
        Cmd::Rates {
            m,
            dist,
            n,
            eps,
            code,
            format,
            out,
        } => {
            let p = parse_dist(m, &dist)?;
            let epses = parse_eps_list(&eps)?;
            let codes = parse_codes(&code, m)?;
            let ts = TypeSet::enumerate(n, m).map_err(|e| e.to_string())?;
            let mut rows = Vec::new();
            for &e in &epses {
                for &kind in &codes {
                    let r = code_rate_bits(kind, &ts, &p, e).map_err(|err| err.to_string())?;
                    rows.push(RateRow {
                        code: kind.name().to_string(),
                        n,
                        m,
                        dist: dist_label(p.probs()),
                        eps: e,
                        nr_bits: r.bits,
                        rate: r.rate,
                    });
                }
            }
            rows.sort_by(|a, b| {
                (a.n, a.eps, &a.code)
                    .partial_cmp(&(b.n, b.eps, &b.code))
                    .expect("row keys are finite")
            });
            let content = match format {
                Format::Csv => to_csv(&rows),
                Format::Json => to_json(&rows),
            };
            emit(&out, &content)
        }
        Cmd::Sweep {
            m,
            dist,
            n,
            eps,
            code,
            format,
            out,
        } => {
            let p = parse_dist(m, &dist)?;
            let epses = parse_eps_list(&eps)?;
            let codes = parse_codes(&code, m)?;
            let ns = parse_n_list(&n)?;
            let mut rows: Vec<SweepRow> = Vec::new();
            let mut fits: Vec<FitSummary> = Vec::new();
            for &e in &epses {
                for &kind in &codes {
                    let mut points = Vec::new();
                    for &nn in &ns {
                        let ts = TypeSet::enumerate(nn, m).map_err(|err| err.to_string())?;
                        let r = code_rate_bits(kind, &ts, &p, e).map_err(|err| err.to_string())?;
                        points.push((nn, r.bits));
                    }
                    let fit = third_order_fit(&points, &p, e).map_err(|err| err.to_string())?;
                    let variant = match kind {
                        CodeKind::Optimal | CodeKind::Interleave => RateVariant::Optimal,
                        CodeKind::TypeSize => RateVariant::TypeSize,
                        CodeKind::TwoStageFv | CodeKind::TwoStageFf => RateVariant::TwoStage,
                    };
                    let target = variant.third_order_coefficient(p.support_size());
                    let qi = fvlab::gaussian::q_inv(e).map_err(|err| err.to_string())?;
                    for &(nn, bits) in &points {
                        let nf = nn as f64;
                        rows.push(SweepRow {
                            variant: kind.name().to_string(),
                            n: nn,
                            nr_bits: bits,
                            y: bits as f64 - nf * p.entropy() - (nf * p.varentropy()).sqrt() * qi,
                        });
                    }
                    fits.push(FitSummary {
                        variant: kind.name().to_string(),
                        slope: fit.slope,
                        target_c: target,
                        pass: (fit.slope - target).abs() <= 0.35,
                    });
                }
            }
            rows.sort_by(|a, b| (a.n, &a.variant).cmp(&(b.n, &b.variant)));
            fits.sort_by(|a, b| a.variant.cmp(&b.variant));
            let content = match format {
                Format::Csv => format!("{}\n{}", to_csv(&rows), to_csv(&fits)),
                Format::Json => {
                    let v = serde_json::json!({
                        "rows": serde_json::from_str::<serde_json::Value>(&to_json(&rows))
                            .expect("rows json"),
                        "fits": serde_json::from_str::<serde_json::Value>(&to_json(&fits))
                            .expect("fits json"),
                    });
                    let mut s = serde_json::to_string_pretty(&v).expect("sweep json");
                    s.push('\n');
                    s
                }
            };
            emit(&out, &content)
        }
        Cmd::Converse {
            m,
            dist,
            n,
            eps,
            gamma,
            resolution,
            beta_floor,
            format,
            out,
        } => {
            let p = parse_dist(m, &dist)?;
            let epses = parse_eps_list(&eps)?;
            let ns = parse_n_list(&n)?;
            let support: Vec<usize> = p.support().to_vec();
            let mut rows = Vec::new();
            for &e in &epses {
                for &nn in &ns {
                    let g = match gamma {
                        Some(g) => g,
                        None => j_functional(&p, e, nn).map_err(|err| err.to_string())?,
                    };
                    let grid = entropy_sphere_grid(m, &support, g, e, nn, resolution, beta_floor)
                        .map_err(|err| err.to_string())?;
                    let ts = TypeSet::enumerate(nn, m).map_err(|err| err.to_string())?;
                    let k_bits =
                        worst_case_type_size_bits(&ts, &grid, e).map_err(|err| err.to_string())?;
                    let mix = mixture_log2_probs(&ts, &grid);
                    let (mut bound, mut tau_star) = (f64::NEG_INFINITY, 1.0);
                    for tau in tau_grid(nn) {
                        let b = converse_epsilon_lower_with(&ts, &mix, k_bits, tau);
                        if b > bound {
                            bound = b;
                            tau_star = tau;
                        }
                    }
                    rows.push(ConverseRow {
                        gamma: g,
                        eps: e,
                        n: nn,
                        k_bits,
                        tau_star,
                        bound,
                    });
                }
            }
            rows.sort_by(|a, b| {
                (a.n, a.eps)
                    .partial_cmp(&(b.n, b.eps))
                    .expect("row keys are finite")
            });
            let content = match format {
                Format::Csv => to_csv(&rows),
                Format::Json => to_json(&rows),
            };
            emit(&out, &content)
        }
        Cmd::Verify { max_n } => verify(max_n),
        Cmd::Laplace { format, out } => {
            let mut rows = Vec::new();
            for case in LaplaceCase::all() {
                for n in [64u32, 128, 256, 512, 1024] {
                    let r = laplace_check(case, n).map_err(|e| e.to_string())?;
                    rows.push(LaplaceRow {
                        case: case.name().to_string(),
                        n,
                        numeric: r.numeric,
                        asymptotic: r.asymptotic,
                        rel_err: r.rel_err,
                    });
                }
            }
            let content = match format {
                Format::Csv => to_csv(&rows),
                Format::Json => to_json(&rows),
            };
            emit(&out, &content)
        }
    }
}

/// The invariant suite behind `fvlab verify`.
fn verify(max_n: u32) -> Result<(), String> {
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool, detail: String| {
        if ok {
            println!("ok — {name}");
        } else {
            failures += 1;
            eprintln!("FAIL — {name}: {detail}");
        }
    };

    // class-size sandwich
    {
        let mut violations = Vec::new();
        for m in 2..=4usize {
            for n in 1..=100u32 {
                let ts = TypeSet::enumerate(n, m).expect("enumerate");
                let sizes = ts.exact_sizes();
                let cm = c_minus(m);
                for (id, size) in sizes.iter().enumerate() {
                    let nf = n_f_bound(&ts.type_vector(id));
                    let ls = log2_biguint(size);
                    if !(ls <= nf && ls >= nf + cm) {
                        violations.push(format!("m={m} n={n} t={:?}", ts.counts(id)));
                    }
                }
            }
        }
        check(
            "class-size sandwich (m=2..4, n<=100)",
            violations.is_empty(),
            violations.join("; "),
        );
    }

    // oracle equivalence across all five codes
    {
        let mut worst = 0.0f64;
        let mut detail = String::new();
        for m in 2..=3usize {
            let dists: Vec<Vec<f64>> = match m {
                2 => vec![vec![0.5, 0.5], vec![0.8, 0.2], vec![0.3, 0.7]],
                _ => vec![vec![0.5, 0.3, 0.2], vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]],
            };
            for n in 1..=max_n.min(8) {
                let ts = TypeSet::enumerate(n, m).expect("enumerate");
                for d in &dists {
                    let p = Dist::normalized(d.clone()).expect("dist");
                    let mut codes = vec![
                        ("optimal", optimal_code(&ts, &p)),
                        ("type-size", type_size_ranked_code(&ts)),
                        (
                            "2s-fv",
                            two_stage_ranked_code(TwoStageVariant::FixedVariable, &ts),
                        ),
                        (
                            "2s-ff",
                            two_stage_ranked_code(TwoStageVariant::FixedFixed, &ts),
                        ),
                    ];
                    if m == 2 {
                        codes.push(("interleave", binary_interleave_code(&ts).expect("binary")));
                    }
                    for (name, code) in codes {
                        let fast = length_distribution(&code, &ts, &p).expect("ld");
                        let slow = brute_force_eval(&code, &ts, &p).expect("oracle");
                        let tv = fast.tv_distance(&slow);
                        if tv > worst {
                            worst = tv;
                            detail = format!("{name} m={m} n={n} tv={tv:e}");
                        }
                    }
                }
            }
        }
        check(
            "oracle equivalence (five codes, brute force)",
            worst <= 1e-9,
            detail,
        );
    }

    // one-extra-bit guarantee
    {
        let mut violations = Vec::new();
        for n in 1..=14u32 {
            let ts = TypeSet::enumerate(n, 2).expect("enumerate");
            for pa in [0.05, 0.25, 0.5, 0.75, 0.95] {
                let p = Dist::new(vec![pa, 1.0 - pa]).expect("dist");
                for eps in [0.01, 0.1, 0.5] {
                    let (nr, nr_star) = one_bit_gap(&ts, &p, eps).expect("gap");
                    if nr > nr_star + 1 {
                        violations.push(format!("n={n} pa={pa} eps={eps}"));
                    }
                }
            }
        }
        for n in [20u32, 50, 100, 200] {
            let ts = TypeSet::enumerate(n, 2).expect("enumerate");
            for pa in [0.05, 0.35, 0.65, 0.95] {
                let p = Dist::new(vec![pa, 1.0 - pa]).expect("dist");
                for eps in [0.01, 0.1, 0.5] {
                    let (nr, nr_star) = one_bit_gap(&ts, &p, eps).expect("gap");
                    if nr > nr_star + 1 {
                        violations.push(format!("n={n} pa={pa} eps={eps}"));
                    }
                }
            }
        }
        check(
            "one-extra-bit guarantee of the interleaved code",
            violations.is_empty(),
            violations.join("; "),
        );
    }

    // guessing identities
    {
        let mut violations = Vec::new();
        for n in 1..=max_n.min(8) {
            let ts = TypeSet::enumerate(n, 2).expect("enumerate");
            for d in [vec![0.5, 0.5], vec![0.7, 0.3]] {
                let p = Dist::new(d).expect("dist");
                let code = optimal_code(&ts, &p);
                let g = code_to_guesser(&code).expect("guesser");
                let induced = guesser_to_code(&g);
                let ld_code = length_distribution(&code, &ts, &p).expect("ld");
                let ld_ind = length_distribution(&induced, &ts, &p).expect("ld");
                for eps in [0.03, 0.2, 0.6] {
                    let bits_g = guesser_rate_bits(&g, &ts, &p, eps).expect("bits");
                    let bits_code = epsilon_rate(&ld_code, eps, n).expect("rate").bits;
                    let bits_ind = epsilon_rate(&ld_ind, eps, n).expect("rate").bits;
                    if bits_g != bits_ind {
                        violations.push(format!("equality n={n} eps={eps}"));
                    }
                    if bits_g > bits_code {
                        violations.push(format!("inequality n={n} eps={eps}"));
                    }
                }
            }
        }
        check(
            "guessing equivalence (both directions)",
            violations.is_empty(),
            violations.join("; "),
        );
    }

    // Kraft LP closed form vs brute force
    {
        let mut worst = 0.0f64;
        let profiles = kraft_test_profiles(100);
        for ks in &profiles {
            let profile = KraftProfile::new(ks.clone()).expect("profile");
            let closed = kraft_lp_optimal(&profile);
            let brute = kraft_lp_bruteforce(&profile);
            worst = worst.max((closed - brute).abs());
        }
        check(
            &format!(
                "Kraft LP closed form vs vertex enumeration ({} profiles)",
                profiles.len()
            ),
            worst <= 1e-9,
            format!("worst diff {}", fmt_sig(worst)),
        );
    }

    // type-size formula vs explicit code
    {
        let mut violations = Vec::new();
        for (n, m, d) in [
            (4u32, 2usize, vec![0.7, 0.3]),
            (6, 2, vec![0.5, 0.5]),
            (6, 3, vec![0.5, 0.3, 0.2]),
        ] {
            let ts = TypeSet::enumerate(n, m).expect("enumerate");
            let p = Dist::new(d).expect("dist");
            let code = type_size_ranked_code(&ts);
            let ld = length_distribution(&code, &ts, &p).expect("ld");
            for eps in [0.05, 0.1, 0.2, 0.5] {
                let sol = fvlab::universal::type_size_solution(&ts, &p, eps).expect("solution");
                let via_code = epsilon_rate(&ld, eps, n).expect("rate").bits;
                if sol.bits != via_code {
                    violations.push(format!("n={n} m={m} eps={eps}"));
                }
            }
        }
        check(
            "Type Size formula equals explicit code rate",
            violations.is_empty(),
            violations.join("; "),
        );
    }

    // partition identity as a final exactness canary
    {
        let mut ok = true;
        let mut detail = String::new();
        for (n, m) in [(12u32, 2usize), (9, 3), (7, 4)] {
            let ts = TypeSet::enumerate(n, m).expect("enumerate");
            let total: num_bigint::BigUint = ts.exact_sizes().iter().sum();
            let expect = num_bigint::BigUint::from(m as u64).pow(n);
            if total != expect {
                ok = false;
                detail = format!("n={n} m={m}");
            }
            let tv = ts.type_vector(0);
            if type_class_size(&tv) != num_bigint::BigUint::from(1u32) {
                ok = false;
                detail = format!("constant type size wrong at n={n} m={m}");
            }
        }
        check("partition identity sum |T_t| = m^n", ok, detail);
    }

    std::io::stdout().flush().ok();
    if failures > 0 {
        Err(format!("{failures} invariant check(s) failed"))
    } else {
        Ok(())
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
