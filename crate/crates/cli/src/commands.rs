use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use chaokey::cipher::{decrypt_image, encrypt_image, CipherImage};
use chaokey::dynamics::{
    bifurcation_scan, complexity_grid, lyapunov_spectrum, zero_one_test, GridConfig,
    LyapunovConfig, ParamName, ScanConfig, SAMPLE_STRIDE,
};
use chaokey::image_io::{read_image, write_image};
use chaokey::keystream::{
    derive_key, generate_sequences, quantize_bits, quantize_bytes, CipherKey, Role,
};
use chaokey::metrics::{chi_square_uniform, histogram, image_report, DEFAULT_PAIRS};
use chaokey::modbus::{build_frame, parse_frame, parse_hex, to_hex, CrcCipher, Verdict};
use chaokey::nist::{export_bits, nist_subset};
use chaokey::raster::Region;
use chaokey::system::{fmt_g17, simulate_flow, State, SystemParams, DEFAULT_TRANSIENT, DIM};
use serde_json::json;

use crate::settings::Settings;
use crate::*;

type Outcome = Result<(), Failure>;

pub fn run(cli: Cli) -> Outcome {
    let mut s = Settings::load(cli.config.as_deref())?;
    let t = Instant::now();
    let out = match cli.command {
        Command::Simulate(a) => simulate(&mut s, a),
        Command::Analyze(AnalyzeCommand::Lyapunov(a)) => lyapunov(&mut s, a),
        Command::Analyze(AnalyzeCommand::Bifurcation(a)) => bifurcation(&mut s, a),
        Command::Analyze(AnalyzeCommand::ZeroOne(a)) => zero_one(&mut s, a),
        Command::Analyze(AnalyzeCommand::Complexity(a)) => complexity(&mut s, a),
        Command::Encrypt(a) => encrypt(&mut s, a),
        Command::Decrypt(a) => decrypt(&mut s, a),
        Command::Frame(FrameCommand::Protect(a)) => frame_protect(&mut s, a),
        Command::Frame(FrameCommand::Verify(a)) => frame_verify(&mut s, a),
        Command::Keystream(a) => keystream(&mut s, a),
        Command::Metrics(a) => metrics(&mut s, a),
    };
    eprintln!("elapsed: {:.3} s", t.elapsed().as_secs_f64());
    out
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome {
    std::fs::write(path, bytes).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".config");
    PathBuf::from(name)
}

/// Effective settings next to a non-JSON artifact, and on stderr.
fn echo_sidecar(s: &Settings, path: &Path) -> Outcome {
    write_file(&sidecar_path(path), s.to_text().as_bytes())?;
    for (k, v) in s.effective() {
        eprintln!("config: {k}={v}");
    }
    Ok(())
}

fn emit_json(value: &serde_json::Value, out: Option<&Path>) -> Outcome {
    let text = serde_json::to_string_pretty(value).expect("json value serializes") + "\n";
    match out {
        Some(p) => write_file(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_init(text: &str) -> Result<State<f64>, Failure> {
    let vals: Vec<f64> = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::usage(format!("init `{text}`: {e}")))?;
    match vals.len() {
        1 => Ok(State::splat(vals[0])),
        DIM => Ok(State(std::array::from_fn(|i| vals[i]))),
        n => Err(Failure::usage(format!(
            "init needs 1 or {DIM} values, got {n}"
        ))),
    }
}

fn system(
    s: &mut Settings,
    a: &SystemArgs,
) -> Result<(SystemParams<f64>, State<f64>, f64), Failure> {
    let std = SystemParams::<f64>::standard();
    let p = SystemParams::new(
        s.get("a", a.a, std.a)?,
        s.get("b", a.b, std.b)?,
        s.get("c", a.c, std.c)?,
    )?
    .with_u4u8(s.get("include_u4u8", a.include_u4u8, false)?);
    let init = parse_init(&s.get("init", a.init.clone(), "0.1".to_string())?)?;
    let dt = s.get("dt", a.dt, 1e-3)?;
    Ok((p, init, dt))
}

fn component(s: &mut Settings, flag: Option<usize>) -> Result<usize, Failure> {
    let c = s.get("component", flag, 1)?;
    if !(1..=DIM).contains(&c) {
        return Err(Failure::usage(format!(
            "component must be in 1..={DIM}, got {c}"
        )));
    }
    Ok(c - 1)
}

fn simulate(s: &mut Settings, a: SimulateArgs) -> Outcome {
    let (p, init, dt) = system(s, &a.system)?;
    let steps = s.get("steps", a.steps, 100_000)?;
    let transient = s.get("transient", a.transient, DEFAULT_TRANSIENT)?;
    let stride = s.get("stride", a.stride, 1)?;
    let traj = simulate_flow(&p, init, dt, steps, transient, stride)?;
    let mut w = create(&a.out)?;
    traj.write_csv(&mut w)?;
    w.flush()?;
    echo_sidecar(s, &a.out)
}

fn sign_pattern(le: &[f64]) -> String {
    le.iter()
        .map(|&l| match l {
            l if l > 0.1 => "+",
            l if l.abs() < 0.05 => "0",
            l if l < -0.1 => "-",
            _ => "?",
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn lyapunov(s: &mut Settings, a: LyapunovArgs) -> Outcome {
    let (p, init, dt) = system(s, &a.system)?;
    let d = LyapunovConfig::<f64>::default();
    let trace_every = if a.trace.is_some() { 100 } else { 0 };
    let cfg = LyapunovConfig {
        dt,
        total_time: s.get("total_time", a.total_time, d.total_time)?,
        transient_time: s.get("transient_time", a.transient_time, d.transient_time)?,
        reorth_every: s.get("reorth_every", a.reorth_every, d.reorth_every)?,
        trace_every: s.get("trace_every", a.trace_every, trace_every)?,
    };
    let t = Instant::now();
    let spec = lyapunov_spectrum(&p, init, &cfg)?;
    let elapsed = t.elapsed().as_secs_f64();
    if let Some(path) = &a.trace {
        let mut w = create(path)?;
        spec.write_trace_csv(&mut w)?;
        w.flush()?;
        write_file(&sidecar_path(path), s.to_text().as_bytes())?;
    }
    let value = json!({
        "exponents": spec.exponents,
        "sum": spec.sum(),
        "divergence": p.divergence(),
        "sign_pattern": sign_pattern(&spec.exponents),
        "settle_time": spec.settle_time,
        "elapsed_s": elapsed,
        "config": s.to_json(),
    });
    emit_json(&value, a.out.as_deref())
}

fn bifurcation(s: &mut Settings, a: BifurcationArgs) -> Outcome {
    let (p, init, dt) = system(s, &a.system)?;
    let param: ParamName = s.get("param", a.param, "a".to_string())?.parse()?;
    let d = ScanConfig::<f64>::default();
    let lo = s.get("lo", a.lo, 20.0)?;
    let hi = s.get("hi", a.hi, 30.0)?;
    let points = s.get("points", a.points, 101)?;
    let comp = component(s, a.component)?;
    let cfg = ScanConfig {
        init,
        dt,
        steps: s.get("steps", a.steps, d.steps)?,
        transient: s.get("transient", a.transient, d.transient)?,
    };
    let data = bifurcation_scan(&p, param, lo, hi, points, comp, &cfg)?;
    let diverged = data.columns.iter().filter(|c| c.maxima.is_none()).count();
    if diverged > 0 {
        eprintln!("warning: {diverged} parameter values diverged and have no maxima");
    }
    let mut w = create(&a.out)?;
    data.write_csv(&mut w)?;
    w.flush()?;
    echo_sidecar(s, &a.out)
}

fn read_csv_column(path: &Path, col: usize) -> Result<Vec<f64>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Failure {
        code: Failure::FORMAT,
        msg: "empty CSV".into(),
    })?;
    // Trajectory files carry a leading time column.
    let offset = usize::from(header.starts_with("t,"));
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            l.split(',')
                .nth(col + offset)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Failure {
                    code: Failure::FORMAT,
                    msg: format!(
                        "{}: row {} lacks a numeric column {}",
                        path.display(),
                        n + 2,
                        col + 1
                    ),
                })
        })
        .collect()
}

fn zero_one(s: &mut Settings, a: ZeroOneArgs) -> Outcome {
    let comp = component(s, a.component)?;
    let x = match &a.input {
        Some(path) => {
            s.record("input", path.display());
            read_csv_column(path, comp)?
        }
        None => {
            let (p, init, dt) = system(s, &a.system)?;
            let n = s.get("samples", a.samples, 5000)?;
            let stride = s.get("stride", a.stride, SAMPLE_STRIDE)?;
            let transient = s.get("transient", a.transient, DEFAULT_TRANSIENT)?;
            simulate_flow(&p, init, dt, n, transient, stride)?.column(comp)
        }
    };
    let c01 = s.get_opt("c01", a.c01)?;
    let seed = s.get("seed", a.seed, 0)?;
    let r = zero_one_test(&x, c01, seed)?;
    if let Some(path) = &a.translation {
        let mut w = create(path)?;
        writeln!(w, "n,p,s")?;
        for (n, (p, q)) in r.p.iter().zip(&r.s).enumerate() {
            writeln!(w, "{},{},{}", n + 1, fmt_g17(*p), fmt_g17(*q))?;
        }
        w.flush()?;
    }
    let value = json!({
        "k": r.k,
        "c": r.c,
        "k_per_c": r.k_per_c,
        "samples": x.len(),
        "config": s.to_json(),
    });
    emit_json(&value, a.out.as_deref())
}

fn complexity(s: &mut Settings, a: ComplexityArgs) -> Outcome {
    if a.se_out.is_none() && a.c0_out.is_none() {
        return Err(Failure::usage("give --se-out and/or --c0-out"));
    }
    let (p, init, dt) = system(s, &a.system)?;
    let d = GridConfig::<f64>::default();
    let a_range = (s.get("a_lo", a.a_lo, 20.0)?, s.get("a_hi", a.a_hi, 30.0)?);
    let c_range = (s.get("c_lo", a.c_lo, 0.5)?, s.get("c_hi", a.c_hi, 2.0)?);
    let res = (s.get("na", a.na, 21)?, s.get("nc", a.nc, 16)?);
    let cfg = GridConfig {
        init,
        dt,
        transient: s.get("transient", a.transient, d.transient)?,
        len: s.get("len", a.len, d.len)?,
        stride: s.get("stride", a.stride, d.stride)?,
        component: component(s, a.component)?,
    };
    let grid = complexity_grid(a_range, c_range, p.b, res, &cfg)?;
    for (path, values) in [(&a.se_out, &grid.se), (&a.c0_out, &grid.c0)] {
        if let Some(path) = path {
            let mut w = create(path)?;
            grid.write_csv(values, &mut w)?;
            w.flush()?;
            echo_sidecar(s, path)?;
        }
    }
    Ok(())
}

fn read_key(path: &Path) -> Result<CipherKey, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::key(format!("key file {}: {e}", path.display())))?;
    Ok(CipherKey::from_key_file(&text)?)
}

fn encrypt(s: &mut Settings, a: EncryptArgs) -> Outcome {
    let img = read_image(&a.input)?;
    let region = s
        .get_opt("region", a.region)?
        .map(|r| r.parse::<Region>())
        .transpose()?;
    let pass = s.get_secret("passphrase", a.passphrase);
    let key = derive_key(&img, pass.as_deref().map(str::as_bytes))?;
    let t = Instant::now();
    let c = encrypt_image(&img, &key, region)?;
    eprintln!("encrypt: {:.3} s", t.elapsed().as_secs_f64());
    write_file(&a.out, &c.to_bytes())?;
    write_file(&a.key, key.to_key_file().as_bytes())?;
    if let Some(p) = &a.preview {
        write_image(&c.as_image(), p)?;
    }
    if let Some(p) = &a.metrics {
        let pairs = s.get("pairs", None, DEFAULT_PAIRS)?;
        let seed = s.get("seed", None, 0)?;
        let report = image_report(&c.as_image(), None, pairs, seed)?;
        let mut v = serde_json::to_value(&report).expect("report serializes");
        v["config"] = s.to_json();
        emit_json(&v, Some(p))?;
    }
    echo_sidecar(s, &a.out)
}

fn decrypt(s: &mut Settings, a: DecryptArgs) -> Outcome {
    let key = read_key(&a.key)?;
    let bytes =
        std::fs::read(&a.input).map_err(|e| Failure::io(format!("{}: {e}", a.input.display())))?;
    let c = CipherImage::from_bytes(&bytes)?;
    let t = Instant::now();
    let img = decrypt_image(&c, &key)?;
    eprintln!("decrypt: {:.3} s", t.elapsed().as_secs_f64());
    write_image(&img, &a.out)?;
    s.record(
        "region",
        format!(
            "{},{},{},{}",
            c.region.x, c.region.y, c.region.w, c.region.h
        ),
    );
    echo_sidecar(s, &a.out)
}

fn frame_protect(s: &mut Settings, a: FrameArgs) -> Outcome {
    let key = read_key(&a.key)?;
    let nonce = s.get("nonce", a.nonce, 0)?;
    let bytes = parse_hex(&a.hex)?;
    if bytes.len() < 2 {
        return Err(Failure::usage("need at least address and function bytes"));
    }
    let frame = build_frame(bytes[0], bytes[1], &bytes[2..])?;
    let sent = CrcCipher::new(&key)?.encrypt_crc(&frame, nonce)?;
    println!("{}", to_hex(&sent.to_bytes()));
    Ok(())
}

fn frame_verify(s: &mut Settings, a: FrameArgs) -> Outcome {
    let key = read_key(&a.key)?;
    let nonce = s.get("nonce", a.nonce, 0)?;
    let frame = parse_frame(&parse_hex(&a.hex)?)?;
    match CrcCipher::new(&key)?.verify(&frame, nonce) {
        Verdict::Accept => {
            println!("ACCEPT");
            Ok(())
        }
        Verdict::Reject => {
            println!("REJECT");
            Err(Failure {
                code: Failure::REJECT,
                msg: "frame rejected".into(),
            })
        }
    }
}

fn parse_role(r: &str) -> Result<Role, Failure> {
    Ok(match r.to_ascii_lowercase().as_str() {
        "a" => Role::A,
        "x" => Role::X,
        "y" => Role::Y,
        "h" => Role::H,
        "v" => Role::V,
        "m" => Role::M,
        other => {
            return Err(Failure::usage(format!(
                "unknown role `{other}`, expected a, x, y, h, v or m"
            )))
        }
    })
}

fn keystream(s: &mut Settings, a: KeystreamArgs) -> Outcome {
    let mut key = match &a.key {
        Some(path) => {
            s.record("key", path.display());
            read_key(path)?
        }
        None => {
            let (params, init, dt) = system(s, &a.system)?;
            CipherKey {
                params,
                init,
                dt,
                ..CipherKey::default()
            }
        }
    };
    key.transient_steps = s.get("transient", a.transient, key.transient_steps)?;
    key.validate()?;
    let n_bits = s.get("bits", a.bits, 1_000_000)?;
    let role_name = s.get("role", a.role, "a".to_string())?;
    let role = parse_role(&role_name)?;
    let seqs = generate_sequences(&key, n_bits.div_ceil(8).max(1))?;
    let scale = key.quantizer_scale as f64;
    let mut bits = quantize_bits(seqs.get(role), scale);
    bits.truncate(n_bits);
    if let Some(p) = &a.out {
        export_bits(&bits, p)?;
    }
    let chi = chi_square_uniform(&histogram(&quantize_bytes(seqs.get(role), scale)));
    let nist = if bits.len() >= chaokey::nist::MIN_BITS {
        nist_subset(&bits)?
    } else {
        eprintln!(
            "warning: fewer than {} bits, NIST subset skipped",
            chaokey::nist::MIN_BITS
        );
        Vec::new()
    };
    for r in &nist {
        eprintln!(
            "{:<16} p = {:.6}  {}",
            r.name,
            r.p_value,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    let value = json!({
        "bits": bits.len(),
        "byte_chi_square": chi,
        "nist": nist,
        "config": s.to_json(),
    });
    emit_json(&value, a.report.as_deref())
}

fn metrics(s: &mut Settings, a: MetricsArgs) -> Outcome {
    let img = read_image(&a.input)?;
    let other = a.other.as_deref().map(read_image).transpose()?;
    let pairs = s.get("pairs", a.pairs, DEFAULT_PAIRS)?;
    let seed = s.get("seed", a.seed, 0)?;
    let mut report = image_report(&img, other.as_ref(), pairs, seed)?;
    if a.nist {
        let bits = chaokey::keystream::bytes_to_bits(&img.to_interleaved());
        report.nist = nist_subset(&bits)?;
    }
    let mut v = serde_json::to_value(&report).expect("report serializes");
    v["config"] = s.to_json();
    emit_json(&v, a.out.as_deref())
}
