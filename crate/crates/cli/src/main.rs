use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qebp_core::channel::{crossover_from_snr, parse_snr_grid, SnrPoint};
use qebp_core::harness::{
    decode_word, emit_csv, emit_json, run_bler_sweep, DecoderKind, ExperimentSpec, ParamMode, SyndromeCache,
};
use qebp_core::minsum::MinSumDecoder;
use qebp_core::optimize::optimize_parameters;
use qebp_core::qaoa::SignConvention;
use qebp_core::repetition::{
    bler_majority_vote, bler_one_sample, bler_post_selection, bler_ranking, expected_rounds_postselection,
    fit_exponential, RankingMode, RepParams, SumDomain, SHARED_BETA, SHARED_GAMMA,
};
use qebp_core::{Error, Syndrome, Word};

#[derive(Parser)]
#[command(
    name = "qebp-lab",
    version,
    about = "QAOA, belief propagation and QEBP decoding experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    MainText,
    Appendix,
}

impl From<Convention> for SignConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::MainText => SignConvention::MainText,
            Convention::Appendix => SignConvention::Appendix,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strategy {
    OneSample,
    PostSelection,
    Ranking,
    MajorityVote,
}

impl Strategy {
    fn name(self) -> &'static str {
        match self {
            Self::OneSample => "one_sample",
            Self::PostSelection => "post_selection",
            Self::Ranking => "ranking",
            Self::MajorityVote => "majority_vote",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BLER sweep described by a JSON experiment spec.
    BlerSweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the full record as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Decode one received word and print the result as JSON.
    Decode {
        #[arg(long)]
        code: String,
        #[arg(long, value_parser = parse_decoder)]
        decoder: DecoderKind,
        /// Received word as a bit string.
        #[arg(long)]
        y: String,
        /// Channel Eb/N0 in dB.
        #[arg(long, conflicts_with = "eps")]
        snr: Option<f64>,
        /// Channel crossover probability.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 2.0)]
        eta: f64,
        #[arg(long, default_value_t = 10_000)]
        shots: usize,
        #[arg(long, default_value_t = 10)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
        #[arg(long, value_enum, default_value = "main-text")]
        convention: Convention,
        /// Fixed QAOA angles instead of per-syndrome optimisation.
        #[arg(long, value_delimiter = ',', requires = "betas")]
        gammas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', requires = "gammas")]
        betas: Option<Vec<f64>>,
    },
    /// Optimise QAOA angles for one syndrome and print the result as JSON.
    OptimizeParams {
        #[arg(long)]
        code: String,
        #[arg(long)]
        syndrome: String,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 10)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 2.0)]
        eta: f64,
        #[arg(long, value_enum, default_value = "main-text")]
        convention: Convention,
    },
    /// Exact repetition-code BLER for a post-processing strategy (CSV).
    RepAnalytics {
        #[arg(long, value_enum)]
        strategy: Strategy,
        /// Code lengths, e.g. `3:23:2` or `3,5,7`.
        #[arg(long)]
        n_list: String,
        /// Eb/N0 grid in dB.
        #[arg(long)]
        snr: String,
        /// Shots per syndrome for the ranking strategy.
        #[arg(long, default_value_t = 1000)]
        rounds: usize,
        /// Sample the ranking counts with this seed instead of the
        /// infinite-shot limit.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = SHARED_GAMMA)]
        gamma: f64,
        #[arg(long, default_value_t = SHARED_BETA)]
        beta: f64,
        /// Include the two constant error strings in the sums.
        #[arg(long)]
        include_zero_error: bool,
    },
    /// Expected post-selection rounds and their exponential fit (CSV).
    Rounds {
        #[arg(long)]
        n_list: String,
        #[arg(long)]
        snr: f64,
        #[arg(long, default_value_t = SHARED_GAMMA)]
        gamma: f64,
        #[arg(long, default_value_t = SHARED_BETA)]
        beta: f64,
        #[arg(long)]
        include_zero_error: bool,
    },
}

fn parse_decoder(s: &str) -> Result<DecoderKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_lengths(text: &str) -> anyhow::Result<Vec<usize>> {
    parse_snr_grid(text)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                bail!("code length {v} is not a non-negative integer")
            }
        })
        .collect()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err)
            if err
                .downcast_ref::<std::io::Error>()
                .is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            let spec_failure = err
                .chain()
                .any(|e| matches!(e.downcast_ref::<Error>(), Some(Error::Spec(_))));
            ExitCode::from(if spec_failure { 2 } else { 3 })
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::BlerSweep { spec, out: csv, json } => {
            let spec = ExperimentSpec::load(&spec)?;
            let record = run_bler_sweep(&spec)?;
            emit_csv(std::slice::from_ref(&record), &csv)?;
            if let Some(path) = json {
                emit_json(&record, &path)?;
            }
        }
        Command::Decode {
            code,
            decoder,
            y,
            snr,
            eps,
            p,
            alpha,
            eta,
            shots,
            starts,
            seed,
            max_iter,
            convention,
            gammas,
            betas,
        } => {
            let eps = match (snr, eps) {
                (Some(db), None) => crossover_from_snr(SnrPoint::db(db))?.epsilon,
                (None, Some(e)) => e,
                _ => return Err(Error::Spec("give exactly one of --snr or --eps".into()).into()),
            };
            let mut spec = ExperimentSpec::new(&code, decoder, vec![0.0]);
            spec.p = p;
            spec.alpha = alpha;
            spec.eta = eta;
            spec.shots = shots;
            spec.starts = starts;
            spec.master_seed = seed;
            spec.max_iter = max_iter;
            spec.sign_convention = convention.into();
            if let (Some(gammas), Some(betas)) = (gammas, betas) {
                spec.param_mode = ParamMode::Fixed { gammas, betas };
            }
            let code = spec.validate()?;
            let y: Word = y.parse().context("parsing --y")?;
            let mut cache = SyndromeCache::new(code.clone(), spec.qaoa_settings());
            if decoder.uses_qaoa() {
                cache.ensure([code.syndrome(&y)?.to_index()])?;
            }
            let bp = MinSumDecoder::new(&code);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let result = decode_word(&spec, &code, &bp, Some(&cache), eps, &y, &mut rng)?;
            serde_json::to_writer_pretty(&mut out, &result)?;
            writeln!(out)?;
        }
        Command::OptimizeParams {
            code,
            syndrome,
            p,
            starts,
            seed,
            alpha,
            eta,
            convention,
        } => {
            let code = qebp_core::gf2::resolve_code(&code)?;
            let s: Syndrome = syndrome.parse().context("parsing --syndrome")?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = optimize_parameters(&code, &s, p, alpha, eta, convention.into(), starts, &mut rng)?;
            serde_json::to_writer_pretty(&mut out, &r)?;
            writeln!(out)?;
        }
        Command::RepAnalytics {
            strategy,
            n_list,
            snr,
            rounds,
            seed,
            gamma,
            beta,
            include_zero_error,
        } => {
            let lengths = parse_lengths(&n_list)?;
            let grid = parse_snr_grid(&snr)?;
            let params = RepParams::new(1.0, 2.0, gamma, beta);
            let domain = if include_zero_error {
                SumDomain::IncludeZeroError
            } else {
                SumDomain::ExcludeConstant
            };
            let mode = seed.map_or(RankingMode::Expected, |seed| RankingMode::MonteCarlo { seed });
            writeln!(out, "n,eb_n0_db,strategy,r,bler")?;
            for &db in &grid {
                let eps = crossover_from_snr(SnrPoint::db(db))?.epsilon;
                for &n in &lengths {
                    let bler = match strategy {
                        Strategy::OneSample => bler_one_sample(n, eps, &params, domain)?,
                        Strategy::PostSelection => bler_post_selection(n, eps, &params, domain)?,
                        Strategy::Ranking => bler_ranking(n, eps, rounds, &params, mode, domain)?,
                        Strategy::MajorityVote => bler_majority_vote(n, eps)?,
                    };
                    let r = if strategy == Strategy::Ranking {
                        rounds.to_string()
                    } else {
                        String::new()
                    };
                    writeln!(out, "{n},{db},{},{r},{bler}", strategy.name())?;
                }
            }
        }
        Command::Rounds {
            n_list,
            snr,
            gamma,
            beta,
            include_zero_error,
        } => {
            let lengths = parse_lengths(&n_list)?;
            let eps = crossover_from_snr(SnrPoint::db(snr))?.epsilon;
            let params = RepParams::new(1.0, 2.0, gamma, beta);
            let domain = if include_zero_error {
                SumDomain::IncludeZeroError
            } else {
                SumDomain::ExcludeConstant
            };
            let points = lengths
                .iter()
                .map(|&n| Ok((n as f64, expected_rounds_postselection(n, eps, &params, domain)?)))
                .collect::<qebp_core::Result<Vec<_>>>()?;
            let (a, b) = fit_exponential(&points)?;
            writeln!(out, "n,expected_rounds,fitted_a,fitted_b")?;
            for (n, r) in points {
                writeln!(out, "{n},{r},{a},{b}")?;
            }
        }
    }
    Ok(())
}
