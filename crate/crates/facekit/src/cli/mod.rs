//! Command-line front end.
//!
//! Five subcommands: `filter` smooths a recorded stream, `evaluate` scores a
//! filtered stream against a reference, `distill` runs the label-corruption
//! training study, `bench` measures streaming throughput, and `synth`
//! generates test streams. Settings come from defaults, then an optional
//! `--config FILE`, then dotted `--key value` overrides, in that order of
//! increasing precedence. `-` means stdin or stdout.
//!
//! Exit codes: 0 success, 1 bad input data, 2 bad usage or configuration,
//! 3 training divergence.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use crate::config::ConfigMap;
use crate::error::{Error, Result};
use crate::filter::FilterConfig;
use crate::stream::{
    evaluate_run, filter_run, generate_stream, read_stream, write_stream, ChannelLayout,
    FrameSample, PipelineState, StreamFormat, SynthSpec, Waveform,
};
use crate::trainer::{run_distillation_experiment, ExperimentConfig};

const USAGE: &str = "\
usage: facekit <command> [options]

commands:
  filter    smooth a capture stream
  evaluate  score a filtered stream against its reference
  distill   run the teacher-student training study
  bench     measure streaming throughput
  synth     generate synthetic capture streams

common options:
  --config FILE     load `key = value` settings
  --KEY VALUE       override one setting (dotted keys, e.g. --kalman.q 0.02)
  --format csv|jsonl  stream encoding (default: by file extension, else csv)
  --help            show the command's options

run `facekit <command> --help` for the full list.
";

fn command_usage(cmd: &str) -> String {
    match cmd {
        "filter" => "\
usage: facekit filter --input FILE --output FILE [options]

  --input FILE      stream to smooth (`-` for stdin)
  --output FILE     where the smoothed stream goes (`-` for stdout)
  --threads N       split channels across N worker threads
  --report FILE     also write a quality report (JSON) comparing output to input
  --dump FILE       also write a per-channel raw/filtered CSV table
  --config FILE, --format, dotted overrides (see `facekit --help`)

settings: mode, kalman.model, kalman.q, kalman.r, kalman.p0,
          sg.radius, sg.order, sg.mode
"
        .into(),
        "evaluate" => "\
usage: facekit evaluate --reference FILE --input FILE [options]

  --reference FILE  clean or raw stream to compare against (`-` for stdin)
  --input FILE      filtered stream being scored
  --report FILE     write the JSON report here instead of stdout
  --format csv|jsonl
"
        .into(),
        "distill" => "\
usage: facekit distill [options]

  --report FILE     write the JSON metrics here instead of stdout
  --config FILE, dotted overrides

settings: train.epochs, train.batch, train.lr, train.warmup, train.rampdown,
          train.seed, distill.mu (auto|number), distill.v, distill.b,
          data.n_train, data.n_test, data.inputs, data.outputs, data.p,
          data.noise, data.seed
"
        .into(),
        "bench" => "\
usage: facekit bench [options]

  --frames N        frames to push through the pipeline (default 2000)
  --weights N       expression channels (default 52)
  --landmarks N     landmark points (default 70)
  --report FILE     write the JSON timing report here instead of stdout
  --config FILE, dotted filter overrides (same settings as `filter`)
"
        .into(),
        "synth" => "\
usage: facekit synth --out FILE [options]

  --out FILE        noisy stream destination (`-` for stdout)
  --clean FILE      also write the noise-free stream
  --wave NAME       step | pulse | sine | mixture (default mixture)
  --frames N        stream length (default 300)
  --sigma S         gaussian noise level (default 0.05)
  --amplitude A     waveform amplitude (default 1)
  --weights N       expression channels (default 1)
  --landmarks N     landmark points (default 1)
  --rate FPS        frame rate for the time column (default 60)
  --seed N          noise seed (default 17)
  --format csv|jsonl
"
        .into(),
        _ => USAGE.into(),
    }
}

/// Entry point for the binary: returns the process exit code.
pub fn run(args: &[String]) -> i32 {
    match dispatch(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(args: &[String]) -> Result<()> {
    let Some(command) = args.first() else {
        eprint!("{USAGE}");
        return Err(Error::InvalidConfig {
            msg: "no command given".into(),
        });
    };
    if command == "--help" || command == "-h" || command == "help" {
        print!("{USAGE}");
        return Ok(());
    }
    if command == "--version" {
        println!("facekit {}", env!("CARGO_PKG_VERSION"));
        return Ok(());
    }

    let parsed = ParsedArgs::parse(&args[1..])?;
    if parsed.help {
        print!("{}", command_usage(command));
        return Ok(());
    }
    match command.as_str() {
        "filter" => cmd_filter(parsed),
        "evaluate" => cmd_evaluate(parsed),
        "distill" => cmd_distill(parsed),
        "bench" => cmd_bench(parsed),
        "synth" => cmd_synth(parsed),
        other => {
            eprint!("{USAGE}");
            Err(Error::InvalidConfig {
                msg: format!("unknown command {other:?}"),
            })
        }
    }
}

/// Flags split into plain options (`--input x`) and dotted configuration
/// overrides (`--kalman.q 0.5`).
struct ParsedArgs {
    options: BTreeMap<String, String>,
    overrides: Vec<(String, String)>,
    help: bool,
}

impl ParsedArgs {
    fn parse(args: &[String]) -> Result<Self> {
        let mut options = BTreeMap::new();
        let mut overrides = Vec::new();
        let mut help = false;
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            if arg == "--help" || arg == "-h" {
                help = true;
                continue;
            }
            let Some(name) = arg.strip_prefix("--") else {
                return Err(Error::InvalidConfig {
                    msg: format!("unexpected argument {arg:?}; options start with --"),
                });
            };
            let (key, value) = match name.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let value = it.next().ok_or_else(|| Error::InvalidConfig {
                        msg: format!("option --{name} needs a value"),
                    })?;
                    (name.to_string(), value.clone())
                }
            };
            if key.is_empty() {
                return Err(Error::InvalidConfig {
                    msg: "empty option name".into(),
                });
            }
            if key.contains('.') {
                overrides.push((key, value));
            } else {
                options.insert(key, value);
            }
        }
        Ok(ParsedArgs {
            options,
            overrides,
            help,
        })
    }

    fn take(&mut self, name: &str) -> Option<String> {
        self.options.remove(name)
    }

    fn take_usize(&mut self, name: &str) -> Result<Option<usize>> {
        self.take_parsed(name, |raw| raw.parse::<usize>().ok())
    }

    fn take_u64(&mut self, name: &str) -> Result<Option<u64>> {
        self.take_parsed(name, |raw| raw.parse::<u64>().ok())
    }

    fn take_f64(&mut self, name: &str) -> Result<Option<f64>> {
        self.take_parsed(name, |raw| raw.parse::<f64>().ok())
    }

    fn take_parsed<T>(
        &mut self,
        name: &str,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<Option<T>> {
        match self.take(name) {
            None => Ok(None),
            Some(raw) => parse(&raw).map(Some).ok_or_else(|| Error::InvalidConfig {
                msg: format!("could not parse --{name} value {raw:?}"),
            }),
        }
    }

    /// Loads `--config` (if any), lays the flag overrides on top, and
    /// checks every key against the consumer's registry. Undotted registry
    /// keys (like `mode`) are claimed from the plain options here.
    fn settings(&mut self, known: &[&str]) -> Result<ConfigMap> {
        let mut map = match self.take("config") {
            Some(path) => ConfigMap::load(Path::new(&path))?,
            None => ConfigMap::new(),
        };
        for key in known.iter().filter(|k| !k.contains('.')) {
            if let Some(value) = self.options.remove(*key) {
                map.set((*key).to_string(), value);
            }
        }
        for (key, value) in self.overrides.drain(..) {
            map.set(key, value);
        }
        map.ensure_known(known)?;
        Ok(map)
    }

    /// Every option must have been consumed by now.
    fn finish(self) -> Result<()> {
        if let Some((name, _)) = self.options.into_iter().next() {
            return Err(Error::InvalidConfig {
                msg: format!("unknown option --{name}"),
            });
        }
        if let Some((key, _)) = self.overrides.into_iter().next() {
            return Err(Error::InvalidConfig {
                msg: format!("this command takes no --{key} setting"),
            });
        }
        Ok(())
    }
}

fn required(value: Option<String>, name: &str) -> Result<String> {
    value.ok_or_else(|| Error::InvalidConfig {
        msg: format!("missing required option --{name}"),
    })
}

/// Resolves the stream encoding: explicit `--format` wins, otherwise the
/// file extension decides, and stdio defaults to CSV.
fn resolve_format(explicit: Option<&str>, path: &str) -> Result<StreamFormat> {
    match explicit {
        Some(name) => StreamFormat::parse(name),
        None if path == "-" => Ok(StreamFormat::Csv),
        None => Ok(StreamFormat::from_path(Path::new(path))),
    }
}

fn read_stream_from(path: &str, format: StreamFormat) -> Result<Vec<FrameSample>> {
    if path == "-" {
        let stdin = std::io::stdin();
        read_stream(stdin.lock(), format)
    } else {
        let file = std::fs::File::open(path)?;
        read_stream(std::io::BufReader::new(file), format)
    }
}

fn write_stream_to(path: &str, samples: &[FrameSample], format: StreamFormat) -> Result<()> {
    if path == "-" {
        let stdout = std::io::stdout();
        write_stream(stdout.lock(), samples, format)
    } else {
        let file = std::fs::File::create(path)?;
        write_stream(std::io::BufWriter::new(file), samples, format)
    }
}

fn write_text_to(path: &str, text: &str) -> Result<()> {
    if path == "-" {
        print!("{text}");
        Ok(())
    } else {
        Ok(std::fs::write(path, text)?)
    }
}

fn emit_json<T: serde::Serialize>(report: &T, dest: Option<&str>) -> Result<()> {
    let mut json = serde_json::to_string_pretty(report).expect("report serialization");
    json.push('\n');
    match dest {
        None => {
            print!("{json}");
            Ok(())
        }
        Some(path) => write_text_to(path, &json),
    }
}

fn cmd_filter(mut args: ParsedArgs) -> Result<()> {
    let input = required(args.take("input"), "input")?;
    let output = required(args.take("output"), "output")?;
    let format_flag = args.take("format");
    let threads = args.take_usize("threads")?.unwrap_or(1);
    let report_path = args.take("report");
    let dump_path = args.take("dump");
    let cfg = FilterConfig::from_map(&args.settings(FilterConfig::CONFIG_KEYS)?)?;
    args.finish()?;

    let in_format = resolve_format(format_flag.as_deref(), &input)?;
    let out_format = resolve_format(format_flag.as_deref(), &output)?;
    let samples = read_stream_from(&input, in_format)?;
    let filtered = filter_run(&samples, &cfg, threads)?;
    write_stream_to(&output, &filtered, out_format)?;

    if let Some(path) = report_path {
        let report = evaluate_run(&samples, &filtered, &[])?;
        emit_json(&report, Some(&path))?;
    }
    if let Some(path) = dump_path {
        write_channel_dump(&path, &samples, &filtered)?;
    }
    Ok(())
}

/// Wide CSV with raw and filtered columns side by side for every channel.
fn write_channel_dump(path: &str, raw: &[FrameSample], filtered: &[FrameSample]) -> Result<()> {
    let mut text = String::new();
    let layout = raw.first().map(ChannelLayout::of).unwrap_or(ChannelLayout {
        n_weights: 0,
        n_landmarks: 0,
    });
    text.push_str("frame");
    for c in 0..layout.channels() {
        let name = layout.channel_name(c);
        text.push_str(&format!(",{name}_raw,{name}_filtered"));
    }
    text.push('\n');
    for (r, f) in raw.iter().zip(filtered) {
        text.push_str(&r.frame.to_string());
        for c in 0..layout.channels() {
            text.push_str(&format!(",{},{}", layout.value(r, c), layout.value(f, c)));
        }
        text.push('\n');
    }
    write_text_to(path, &text)
}

fn cmd_evaluate(mut args: ParsedArgs) -> Result<()> {
    let reference = required(args.take("reference"), "reference")?;
    let input = required(args.take("input"), "input")?;
    let format_flag = args.take("format");
    let report_path = args.take("report");
    args.finish()?;

    let ref_format = resolve_format(format_flag.as_deref(), &reference)?;
    let in_format = resolve_format(format_flag.as_deref(), &input)?;
    let reference = read_stream_from(&reference, ref_format)?;
    let filtered = read_stream_from(&input, in_format)?;
    let report = evaluate_run(&reference, &filtered, &[])?;
    emit_json(&report, report_path.as_deref())
}

fn cmd_distill(mut args: ParsedArgs) -> Result<()> {
    let report_path = args.take("report");
    let cfg = ExperimentConfig::from_map(&args.settings(ExperimentConfig::CONFIG_KEYS)?)?;
    args.finish()?;

    let outcome = run_distillation_experiment(&cfg)?;
    emit_json(&outcome.report, report_path.as_deref())
}

#[derive(serde::Serialize)]
struct BenchReport {
    frames: usize,
    channels: usize,
    threads: usize,
    elapsed_ms: f64,
    frames_per_second: f64,
    mean_frame_ms: f64,
    max_frame_ms: f64,
}

fn cmd_bench(mut args: ParsedArgs) -> Result<()> {
    let frames = args.take_usize("frames")?.unwrap_or(2000);
    let n_weights = args.take_usize("weights")?.unwrap_or(52);
    let n_landmarks = args.take_usize("landmarks")?.unwrap_or(70);
    let report_path = args.take("report");
    let cfg = FilterConfig::from_map(&args.settings(FilterConfig::CONFIG_KEYS)?)?;
    args.finish()?;

    let (noisy, _) = generate_stream(&SynthSpec {
        frames,
        n_weights,
        n_landmarks,
        ..SynthSpec::default()
    })?;

    let mut pipeline = PipelineState::new(n_weights, n_landmarks, &cfg)?;
    let mut max_frame_ms = 0.0f64;
    let start = Instant::now();
    for sample in &noisy {
        let frame_start = Instant::now();
        pipeline.process(sample)?;
        max_frame_ms = max_frame_ms.max(frame_start.elapsed().as_secs_f64() * 1e3);
    }
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    let report = BenchReport {
        frames,
        channels: pipeline.layout().channels(),
        threads: 1,
        elapsed_ms,
        frames_per_second: if elapsed_ms > 0.0 {
            frames as f64 / (elapsed_ms / 1e3)
        } else {
            f64::INFINITY
        },
        mean_frame_ms: if frames > 0 {
            elapsed_ms / frames as f64
        } else {
            0.0
        },
        max_frame_ms,
    };
    emit_json(&report, report_path.as_deref())
}

fn cmd_synth(mut args: ParsedArgs) -> Result<()> {
    let out = required(args.take("out"), "out")?;
    let clean_path = args.take("clean");
    let format_flag = args.take("format");
    let mut spec = SynthSpec::default();
    if let Some(name) = args.take("wave") {
        spec.wave = Waveform::parse(&name)?;
    }
    if let Some(frames) = args.take_usize("frames")? {
        spec.frames = frames;
    }
    if let Some(sigma) = args.take_f64("sigma")? {
        spec.sigma = sigma;
    }
    if let Some(amplitude) = args.take_f64("amplitude")? {
        spec.amplitude = amplitude;
    }
    if let Some(n) = args.take_usize("weights")? {
        spec.n_weights = n;
    }
    if let Some(n) = args.take_usize("landmarks")? {
        spec.n_landmarks = n;
    }
    if let Some(rate) = args.take_f64("rate")? {
        spec.frame_rate = rate;
    }
    if let Some(seed) = args.take_u64("seed")? {
        spec.seed = seed;
    }
    args.finish()?;

    let (noisy, clean) = generate_stream(&spec)?;
    let out_format = resolve_format(format_flag.as_deref(), &out)?;
    write_stream_to(&out, &noisy, out_format)?;
    if let Some(path) = clean_path {
        let clean_format = resolve_format(format_flag.as_deref(), &path)?;
        write_stream_to(&path, &clean, clean_format)?;
    }
    Ok(())
}
