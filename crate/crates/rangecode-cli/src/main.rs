//! Batch command-line front end: encode array files, decode and query the
//! serialized structures, run verification suites, and emit CSV count and
//! timing tables.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rangecode::combinatorics::{
    self, binomial, count_nonneg_walks, count_ordered_partitions, count_returning_walks,
    entropy, partition_lower_bound, ub_topk_bits, WalkSpec,
};
use rangecode::error::Error;
use rangecode::minmax::{self, MinMaxEncoding};
use rangecode::perm;
use rangecode::topk::{self, TopKEncoding};
use rangecode::topkds::{self, TopKStructure};
use rangecode::verify::{self, Suite};
use rangecode::{parse_array_text, InputArray, QueryRange};

#[derive(Parser)]
#[command(name = "rangecode", version, about = "Range min-max and top-k encodings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode an array file (one integer per line) into a binary structure.
    Encode {
        /// Array file to read.
        #[arg(long)]
        input: PathBuf,
        /// Destination for the serialized structure.
        #[arg(long)]
        output: PathBuf,
        /// Structure kind: minmax, topk, or topk-ds.
        #[arg(long)]
        mode: String,
        /// Top-k parameter (required for topk and topk-ds).
        #[arg(short)]
        k: Option<usize>,
        /// Block length for topk-ds, or "auto".
        #[arg(short = 'B', default_value = "auto")]
        block: String,
    },
    /// Print a serialized structure's contents as CSV.
    Decode {
        #[arg(long)]
        input: PathBuf,
        /// Write here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Answer a file of queries ("i j" for top-k or min-max, "i j q" for
    /// selection) against a serialized structure.
    Query {
        #[arg(long)]
        input: PathBuf,
        /// Query file, one query per line.
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a module verification suite.
    Verify {
        /// Suite: minmax, topk-enc, topk-ds, or combinatorics.
        #[arg(long)]
        mode: String,
        /// Cap on enumeration sizes and randomized trials.
        #[arg(long, default_value_t = 5040)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Emit combinatorial count tables (exact counts next to bounds).
    Count {
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 40320)]
        budget: u64,
    },
    /// Build and query timing trends with space figures.
    Bench {
        /// Array sizes, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "256,1024")]
        sizes: Vec<usize>,
        /// Top-k parameters, comma separated.
        #[arg(short, value_delimiter = ',', default_value = "1,4")]
        k: Vec<usize>,
        /// Block lengths for the query structure ("auto" allowed).
        #[arg(short = 'B', value_delimiter = ',', default_value = "auto")]
        block: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random queries per configuration.
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> rangecode::Result<ExitCode> {
    match command {
        Command::Encode {
            input,
            output,
            mode,
            k,
            block,
        } => cmd_encode(&input, &output, &mode, k, &block),
        Command::Decode { input, output } => cmd_decode(&input, output.as_deref()),
        Command::Query {
            input,
            queries,
            output,
        } => cmd_query(&input, &queries, output.as_deref()),
        Command::Verify { mode, budget, seed } => cmd_verify(&mode, budget, seed),
        Command::Count { output, budget } => cmd_count(output.as_deref(), budget),
        Command::Bench {
            sizes,
            k,
            block,
            seed,
            trials,
            output,
        } => cmd_bench(&sizes, &k, &block, seed, trials, output.as_deref()),
    }
}

fn read_array(path: &Path) -> rangecode::Result<InputArray> {
    let text = fs::read_to_string(path)?;
    Ok(InputArray::normalize(&parse_array_text(&text)?))
}

fn write_text(path: Option<&Path>, content: &str) -> rangecode::Result<()> {
    match path {
        Some(p) => fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn parse_block(spec: &str, n: usize, k: usize) -> rangecode::Result<Option<usize>> {
    if spec == "auto" {
        return Ok(None);
    }
    let b: usize = spec
        .parse()
        .map_err(|e| Error::Argument(format!("block length {spec:?}: {e}")))?;
    let _ = (n, k);
    Ok(Some(b))
}

fn cmd_encode(
    input: &Path,
    output: &Path,
    mode: &str,
    k: Option<usize>,
    block: &str,
) -> rangecode::Result<ExitCode> {
    let a = read_array(input)?;
    let n = a.len();
    let mut file = Vec::new();
    let mut csv = String::from("mode,n,k,payload_bits,bound_bits,ratio\n");
    match mode {
        "minmax" => {
            let e = minmax::encode_minmax(&a);
            e.write_to(&mut file)?;
            let bound = (3 * n) as f64;
            let payload = e.total_bits();
            csv.push_str(&format!(
                "minmax,{n},,{payload},{bound},{}\n",
                ratio(payload as f64, bound)
            ));
        }
        "topk" => {
            let k = require_k(k)?;
            let e = topk::encode_topk(&a, k)?;
            e.write_to(&mut file)?;
            let bound = ub_topk_bits(n, k);
            let payload = e.bits().len();
            csv.push_str(&format!(
                "topk,{n},{k},{payload},{bound},{}\n",
                ratio(payload as f64, bound)
            ));
        }
        "topk-ds" => {
            let k = require_k(k)?;
            let ds = topkds::build(&a, k, parse_block(block, n, k)?)?;
            ds.write_to(&mut file)?;
            let report = ds.space_report();
            let bound = report.leading_term_bits
                + if report.block_index_term_bits.is_nan() {
                    0.0
                } else {
                    report.block_index_term_bits
                };
            let payload = report.total_measured_bits();
            csv.push_str(&format!(
                "topk-ds,{n},{k},{payload},{bound},{}\n",
                ratio(payload as f64, bound)
            ));
        }
        other => {
            return Err(Error::Argument(format!(
                "unknown mode {other:?}; expected minmax, topk, or topk-ds"
            )))
        }
    }
    fs::write(output, &file)?;
    print!("{csv}");
    Ok(ExitCode::SUCCESS)
}

fn require_k(k: Option<usize>) -> rangecode::Result<usize> {
    k.ok_or_else(|| Error::Argument("this mode requires -k".into()))
}

fn ratio(payload: f64, bound: f64) -> String {
    if bound > 0.0 {
        format!("{:.4}", payload / bound)
    } else {
        String::from("")
    }
}

/// The serialized kinds are distinguished by their leading magic bytes.
enum Loaded {
    MinMax(MinMaxEncoding),
    TopK(TopKEncoding),
    Structure(TopKStructure),
}

fn load_structure(path: &Path) -> rangecode::Result<Loaded> {
    let bytes = fs::read(path)?;
    if bytes.len() < 4 {
        return Err(Error::Format("file too short for a magic header".into()));
    }
    match &bytes[..4] {
        b"RCMM" => Ok(Loaded::MinMax(MinMaxEncoding::read_from(
            &mut bytes.as_slice(),
        )?)),
        b"RCTK" => Ok(Loaded::TopK(TopKEncoding::read_from(&mut bytes.as_slice())?)),
        b"RCDS" => Ok(Loaded::Structure(TopKStructure::read_from(
            &mut bytes.as_slice(),
        )?)),
        other => Err(Error::Format(format!("unknown magic {other:?}"))),
    }
}

fn cmd_decode(input: &Path, output: Option<&Path>) -> rangecode::Result<ExitCode> {
    let mut out = String::new();
    match load_structure(input)? {
        Loaded::MinMax(e) => {
            let trace = minmax::decode_minmax(&e)?;
            out.push_str("trace,bits\n");
            out.push_str(&format!("min,{}\n", trace.t_min.to_bit_string()));
            out.push_str(&format!("max,{}\n", trace.t_max.to_bit_string()));
        }
        Loaded::TopK(e) => {
            out.push_str("j,delta\n");
            for (j, d) in e.deltas()?.iter().enumerate() {
                out.push_str(&format!("{},{d}\n", j + 1));
            }
        }
        Loaded::Structure(ds) => {
            let r = ds.space_report();
            out.push_str("component,bits\n");
            out.push_str(&format!("block_index,{}\n", r.block_index_bits));
            out.push_str(&format!("e_int,{}\n", r.e_int_bits));
            out.push_str(&format!("e_win,{}\n", r.e_win_bits));
            out.push_str(&format!("diffs,{}\n", r.diff_bits));
            out.push_str(&format!("macro,{}\n", r.macro_bits));
            out.push_str(&format!("total,{}\n", r.total_measured_bits()));
            out.push_str(&format!("leading_term,{:.1}\n", r.leading_term_bits));
            out.push_str(&format!(
                "block_index_term,{:.1}\n",
                r.block_index_term_bits
            ));
        }
    }
    write_text(output, &out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_query(
    input: &Path,
    queries: &Path,
    output: Option<&Path>,
) -> rangecode::Result<ExitCode> {
    let loaded = load_structure(input)?;
    let index = match &loaded {
        Loaded::MinMax(e) => Some(minmax::build_index(e)?),
        _ => None,
    };
    let text = fs::read_to_string(queries)?;
    let mut out = String::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<usize> = line
            .split_whitespace()
            .map(|f| {
                f.parse::<usize>().map_err(|e| Error::Parse {
                    line: lineno + 1,
                    msg: format!("{f:?}: {e}"),
                })
            })
            .collect::<rangecode::Result<_>>()?;
        let (i, j, k1) = match fields[..] {
            [i, j] => (i, j, None),
            [i, j, k1] => (i, j, Some(k1)),
            _ => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: "expected \"i j\" or \"i j q\"".into(),
                })
            }
        };
        let with_line = |e: Error| Error::Parse {
            line: lineno + 1,
            msg: e.to_string(),
        };
        let r = QueryRange::new(i, j).map_err(with_line)?;
        let answer: Vec<usize> = match (&loaded, k1) {
            (Loaded::MinMax(_), None) => {
                let (argmax, argmin) =
                    index.as_ref().expect("built above").r_min_max(r).map_err(with_line)?;
                vec![argmax, argmin]
            }
            (Loaded::MinMax(_), Some(_)) => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: "selection queries need a top-k structure".into(),
                })
            }
            (Loaded::TopK(e), None) => {
                topk::query_topk(e, r).map_err(with_line)?.into_vec()
            }
            (Loaded::TopK(e), Some(k1)) => {
                vec![topk::query_select(e, r, k1).map_err(with_line)?]
            }
            (Loaded::Structure(ds), None) => ds.query(r).map_err(with_line)?.into_vec(),
            (Loaded::Structure(ds), Some(k1)) => {
                if k1 == 0 || k1 > ds.k().min(r.len()) {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("selection rank {k1} out of range"),
                    });
                }
                vec![ds.query(r).map_err(with_line)?[k1 - 1]]
            }
        };
        let words: Vec<String> = answer.iter().map(|p| p.to_string()).collect();
        out.push_str(&words.join(" "));
        out.push('\n');
    }
    write_text(output, &out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(mode: &str, budget: u64, seed: u64) -> rangecode::Result<ExitCode> {
    let suite = Suite::parse(mode)?;
    let report = verify::run_suite(suite, budget, seed);
    println!("suite,cases,failures,status");
    println!(
        "{},{},{},{}",
        report.suite,
        report.cases,
        report.failures.len(),
        if report.passed() { "pass" } else { "fail" }
    );
    for f in &report.failures {
        eprintln!("failure: {f}");
    }
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_count(output: Option<&Path>, budget: u64) -> rangecode::Result<ExitCode> {
    let mut out = String::from("family,params,exact,bound,ratio\n");
    for n in 1..=8usize {
        let Ok(count) = combinatorics::count_baxter(n, budget) else {
            break;
        };
        let bound = 1u128 << (3 * n);
        out.push_str(&format!(
            "baxter,n={n},{count},{bound},{}\n",
            ratio((count as f64).log2(), 3.0 * n as f64)
        ));
    }
    for n in 1..=7usize {
        for k in 1..=3usize {
            let Ok(tuples) = combinatorics::enumerate_valid_tuples(n, k, budget) else {
                continue;
            };
            let bound = binomial(((k + 1) * n) as i128, n as i128);
            out.push_str(&format!(
                "valid-tuples,n={n};k={k},{},{bound},{}\n",
                tuples.len(),
                ratio(tuples.len() as f64, bound as f64)
            ));
        }
    }
    for max_step in 1..=3i64 {
        for length in (4..=10usize).step_by(2) {
            let spec = WalkSpec::new(-max_step..=max_step, length)?;
            let nonneg = count_nonneg_walks(&spec);
            let returning = count_returning_walks(&spec);
            let bound = returning.div_ceil(length as u128);
            out.push_str(&format!(
                "walks,steps=[-{max_step}..{max_step}];len={length},{nonneg},{bound},{}\n",
                ratio(nonneg as f64, bound as f64)
            ));
        }
    }
    for (total, parts, max_part) in [(12u64, 6u64, 3u64), (24, 8, 4), (40, 10, 5)] {
        let exact = count_ordered_partitions(total, parts, max_part);
        let bound = partition_lower_bound(total, parts, max_part);
        out.push_str(&format!(
            "partitions,N={total};g={parts};B={max_part},{exact},{bound},{}\n",
            ratio(exact as f64, bound as f64)
        ));
    }
    for k in 2..=4usize {
        let coeff = (k + 1) as f64 * entropy(1.0 / (k + 1) as f64);
        out.push_str(&format!(
            "entropy-coefficient,k={k},{coeff:.6},{},{}\n",
            k + 1,
            ratio(coeff, (k + 1) as f64)
        ));
    }
    write_text(output, &out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(
    sizes: &[usize],
    ks: &[usize],
    blocks: &[String],
    seed: u64,
    trials: u64,
    output: Option<&Path>,
) -> rangecode::Result<ExitCode> {
    let mut out =
        String::from("structure,n,k,B,build_us,mean_query_us,payload_bits,bound_bits,ratio,bits_per_n\n");
    for &n in sizes {
        if n == 0 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
        let a = InputArray::from_permutation(perm::random_permutation(n, &mut rng))
            .expect("random permutation");
        let ranges: Vec<QueryRange> = (0..trials)
            .map(|_| {
                let i = rand::Rng::random_range(&mut rng, 1..=n);
                let j = rand::Rng::random_range(&mut rng, i..=n);
                QueryRange::new(i, j).expect("i <= j")
            })
            .collect();

        // Min-max encoding plus index.
        let t0 = Instant::now();
        let e = minmax::encode_minmax(&a);
        let index = minmax::build_index(&e)?;
        let build_us = t0.elapsed().as_micros();
        let t0 = Instant::now();
        for r in &ranges {
            std::hint::black_box(index.r_min_max(*r)?);
        }
        let query_us = mean_us(t0.elapsed().as_micros(), trials);
        let payload = e.total_bits();
        out.push_str(&format!(
            "minmax,{n},,,{build_us},{query_us:.2},{payload},{},{},{:.3}\n",
            3 * n,
            ratio(payload as f64, (3 * n) as f64),
            payload as f64 / n as f64
        ));

        for &k in ks {
            if k == 0 {
                continue;
            }
            // Flat encoding with replay queries.
            let t0 = Instant::now();
            let e = topk::encode_topk(&a, k)?;
            let build_us = t0.elapsed().as_micros();
            let t0 = Instant::now();
            for r in &ranges {
                std::hint::black_box(topk::query_topk(&e, *r)?);
            }
            let query_us = mean_us(t0.elapsed().as_micros(), trials);
            let payload = e.bits().len();
            let bound = ub_topk_bits(n, k);
            out.push_str(&format!(
                "topk,{n},{k},,{build_us},{query_us:.2},{payload},{bound:.1},{},{:.3}\n",
                ratio(payload as f64, bound),
                payload as f64 / n as f64
            ));

            for bspec in blocks {
                let block = parse_block(bspec, n, k)?;
                let t0 = Instant::now();
                let ds = topkds::build(&a, k, block)?;
                let build_us = t0.elapsed().as_micros();
                let t0 = Instant::now();
                for r in &ranges {
                    std::hint::black_box(ds.query(*r)?);
                }
                let query_us = mean_us(t0.elapsed().as_micros(), trials);
                let report = ds.space_report();
                let payload = report.total_measured_bits();
                let bound = report.leading_term_bits;
                out.push_str(&format!(
                    "topk-ds,{n},{k},{},{build_us},{query_us:.2},{payload},{bound:.1},{},{:.3}\n",
                    ds.block_len(),
                    ratio(payload as f64, bound),
                    payload as f64 / n as f64
                ));
            }
        }
    }
    write_text(output, &out)?;
    let _ = std::io::stdout().flush();
    Ok(ExitCode::SUCCESS)
}

fn mean_us(total_us: u128, trials: u64) -> f64 {
    if trials == 0 {
        0.0
    } else {
        total_us as f64 / trials as f64
    }
}
