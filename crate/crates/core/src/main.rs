use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dctseg::io::{read_ppm, read_tensor};
use dctseg::netshape::{self, NetSpec};
use dctseg::pipeline::{self, ConfigFile, OutputDType, PipelineConfig};
use dctseg::quant::build_qmatrix;
use dctseg::select::{preset, table3_catalog, SelectionSpec};
use dctseg::{Error, Result};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

#[derive(Parser)]
#[command(name = "dctseg", version, about = "DCT-domain tensor preprocessing for segmentation networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode PPM images (or directories of them) into FCRT tensors.
    Encode {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Decode an FCRT tensor back into a PPM image.
    Decode {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Treat dropped sub-bands of a selected tensor as zero.
        #[arg(long)]
        zero_fill: bool,
        /// The --scale used at encode time.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Print the quantization matrix for a quality factor.
    Qtable {
        #[arg(long, allow_negative_numbers = true)]
        qf: i64,
    },
    /// Print the channel indices a selection keeps.
    Select {
        #[arg(long, conflicts_with = "select")]
        preset: Option<String>,
        #[arg(long, value_parser = parse_triple)]
        select: Option<[u8; 3]>,
        #[arg(long)]
        square: bool,
        /// List the named presets instead.
        #[arg(long)]
        list: bool,
    },
    /// Feature-map shapes and multiply-adds of a network description.
    Complexity {
        /// JSON network description.
        #[arg(long, required_unless_present = "builtin", conflicts_with = "builtin")]
        spec: Option<PathBuf>,
        /// A shipped description: edanet or dct-edanet.
        #[arg(long)]
        builtin: Option<String>,
        /// Override the input dims as H,W,C.
        #[arg(long, value_parser = parse_dims)]
        input: Option<[usize; 3]>,
        /// Second description to compare against (JSON path or shipped name).
        #[arg(long)]
        against: Option<String>,
        /// Input override for the --against description.
        #[arg(long, value_parser = parse_dims)]
        against_input: Option<[usize; 3]>,
    },
    /// Mean squared value per channel of a tensor.
    Stats { input: PathBuf },
    /// Encode, decode and report PSNR in one step.
    Roundtrip {
        input: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Also write the reconstruction here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PipelineArgs {
    /// JSON config; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// JPEG quality factor in [1, 100]; omit for unquantized coefficients.
    #[arg(long, allow_negative_numbers = true)]
    qf: Option<i64>,
    /// Named component selection, e.g. M-36-16-16.
    #[arg(long, conflicts_with = "select")]
    preset: Option<String>,
    /// Component counts nY,nCb,nCr.
    #[arg(long, value_parser = parse_triple)]
    select: Option<[u8; 3]>,
    /// Select top-left squares instead of zigzag prefixes.
    #[arg(long)]
    square: bool,
    /// Row-major frequency-to-channel order instead of zigzag.
    #[arg(long)]
    raster: bool,
    /// Export dequantized coefficients instead of quantization levels.
    #[arg(long)]
    dequantize: bool,
    /// auto, f32 or i16.
    #[arg(long)]
    dtype: Option<String>,
    /// Multiply f32 output by this factor.
    #[arg(long)]
    scale: Option<f64>,
    /// Emit the non-rearranged layout keeping KxK coefficients per block.
    #[arg(long, value_name = "K")]
    condense: Option<usize>,
}

impl PipelineArgs {
    fn resolve(&self) -> Result<PipelineConfig> {
        let base = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let flags = ConfigFile {
            quality_factor: self.qf,
            preset: self.preset.clone(),
            selection: self.select,
            dequantize: self.dequantize.then_some(true),
            dtype: self.dtype.as_deref().map(str::parse::<OutputDType>).transpose()?,
            square: self.square.then_some(true),
            ordering: self.raster.then(|| "raster".to_string()),
            scale: self.scale,
            condense: self.condense,
        };
        PipelineConfig::from_file(&base.merge(flags))
    }
}

fn parse_list<T: std::str::FromStr, const N: usize>(s: &str) -> std::result::Result<[T; N], String> {
    let parts: Vec<T> = s
        .split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| format!("bad number {p:?}")))
        .collect::<std::result::Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|_| format!("expected {N} comma-separated values"))
}

fn parse_triple(s: &str) -> std::result::Result<[u8; 3], String> {
    parse_list(s)
}

fn parse_dims(s: &str) -> std::result::Result<[usize; 3], String> {
    parse_list(s)
}

fn load_net(source: &str, input: Option<[usize; 3]>) -> Result<NetSpec> {
    let spec = match netshape::builtin(source) {
        Some(s) if !Path::new(source).exists() => s,
        _ => NetSpec::from_json(&std::fs::read_to_string(source)?)?,
    };
    Ok(match input {
        Some(dims) => spec.with_input(dims),
        None => spec,
    })
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Encode {
            inputs,
            pipeline: args,
            out,
            jobs,
        } => {
            let cfg = args.resolve()?;
            std::fs::create_dir_all(&out)?;
            let inputs = pipeline::collect_inputs(&inputs)?;
            if inputs.is_empty() {
                return Err(Error::Config("no .ppm inputs found".into()));
            }
            let mut failed = 0;
            for (input, result) in pipeline::encode_batch(&inputs, &out, &cfg, jobs)? {
                match result {
                    Ok(path) => println!("{} -> {}", input.display(), path.display()),
                    Err(e) => {
                        failed += 1;
                        eprintln!("{}: {e}", input.display());
                    }
                }
            }
            Ok(if failed > 0 { EXIT_DATA } else { 0 })
        }
        Command::Decode {
            input,
            output,
            zero_fill,
            scale,
        } => {
            let img = pipeline::decode_file(&input, &output, zero_fill, scale)?;
            println!("{} -> {} ({}x{})", input.display(), output.display(), img.height(), img.width());
            Ok(0)
        }
        Command::Qtable { qf } => {
            let q = build_qmatrix(qf)?;
            for row in q.table().chunks(8) {
                let line: Vec<String> = row.iter().map(u16::to_string).collect();
                println!("{}", line.join(" "));
            }
            Ok(0)
        }
        Command::Select {
            preset: name,
            select,
            square,
            list,
        } => {
            if list {
                for p in table3_catalog() {
                    let [y, cb, cr] = p.counts;
                    println!("{}\t{y},{cb},{cr}\t{}", p.name, p.total());
                }
                return Ok(0);
            }
            let spec = match (name, select) {
                (Some(n), _) => preset(&n)?.selection(),
                (None, Some([y, cb, cr])) => SelectionSpec::prefix(y, cb, cr)?,
                (None, None) => return Err(Error::Config("give --preset, --select or --list".into())),
            };
            let spec = if square {
                spec.with_shape(dctseg::select::SelectionShape::Square)?
            } else {
                spec
            };
            let chans: Vec<String> = spec.channels().iter().map(usize::to_string).collect();
            println!("{}", chans.join(" "));
            Ok(0)
        }
        Command::Complexity {
            spec,
            builtin,
            input,
            against,
            against_input,
        } => {
            let source = match (&spec, &builtin) {
                (Some(p), _) => p.to_string_lossy().into_owned(),
                (None, Some(b)) => {
                    if netshape::builtin(b).is_none() {
                        return Err(Error::Config(format!(
                            "unknown builtin {b:?}; choose from {:?}",
                            netshape::BUILTIN_NAMES
                        )));
                    }
                    b.clone()
                }
                (None, None) => unreachable!("clap requires one"),
            };
            let a = load_net(&source, input)?;
            match against {
                Some(other) => {
                    let b = load_net(&other, against_input)?;
                    print!("{}", netshape::compare(&a, &b)?);
                }
                None => print!("{}", a.report()?),
            }
            Ok(0)
        }
        Command::Stats { input } => {
            for s in pipeline::stats(&read_tensor(&input)?)? {
                println!("{}\t{}\t{:.6}", s.channel, s.label, s.mean_square);
            }
            Ok(0)
        }
        Command::Roundtrip {
            input,
            pipeline: args,
            output,
        } => {
            let cfg = args.resolve()?;
            let image = read_ppm(&std::fs::read(&input)?)?;
            let tensor = pipeline::encode(&image, &cfg)?;
            let back = pipeline::decode(&tensor, true, cfg.scale)?;
            if let Some(out) = output {
                dctseg::io::write_atomic(&out, &dctseg::io::write_ppm(&back))?;
            }
            println!(
                "dims {}x{}x{}  bytes {}  psnr {:.3} dB  max-abs-diff {}",
                tensor.dims[0],
                tensor.dims[1],
                tensor.dims[2],
                tensor.encoded_len(),
                pipeline::psnr(&image, &back)?,
                pipeline::max_abs_diff(&image, &back)
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { EXIT_USAGE } else { EXIT_DATA })
        }
    }
}
