//! Experiment driver behind the `nhssh` binary.

pub mod config;

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::Path;

use nhssh::bloch::{spectrum_reality, Band, Reality, SshModel};
use nhssh::dynamics::{
    dirac_norm, evolve, fidelity, make_gwp, predict_trajectory, sample_flux, Carrier, Driven, EvolveOptions,
    FluxProtocol, WavepacketSpec,
};
use nhssh::eigen::{multiset_distance, spectrum};
use nhssh::io::{num, write_csv, Manifest};
use nhssh::lattice::{build_network, build_ssh_ring, ssh_ring_operator, virtual_decompose, NetworkSpec, SshRingSpec};
use nhssh::scatter::{confinement_prediction, run_scenario, ImpulseTiming, ScatterOptions, ScatterScenario};
use nhssh::zak::{xi_plus, zak_closed_form, zak_quadrature, zak_wilson_loop, WilsonOptions};
use nhssh::Error;

pub use config::{parse_config, CarrierKind, Command, ConfigError, ProtocolKind, RunConfig, TimingKind};

/// Spectral distance below which the network and its virtual chains count as equal.
pub const NETWORK_TOLERANCE: f64 = 1e-10;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Run(Error),
    /// The run finished but a built-in check failed.
    Check(String),
}

impl CliError {
    /// 2 for bad input, 3 for numerical failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(Error::Io(_)) => 4,
            CliError::Run(e) if e.is_numerical() => 3,
            CliError::Run(_) => 2,
            CliError::Check(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => e.fmt(f),
            CliError::Run(e) => e.fmt(f),
            CliError::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(Error::from(e))
    }
}

/// What a finished run reports back; the manifest is also written to disk.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub manifest: Manifest,
    /// Manifest key holding the one number worth tabulating in a sweep.
    pub headline: &'static str,
}

impl Outcome {
    pub fn headline_value(&self) -> &str {
        self.manifest.get(self.headline).unwrap_or("")
    }
}

/// Runs `cfg`, writing CSVs and `manifest.txt` into `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    fs::create_dir_all(out)?;
    let mut m = Manifest::new();
    m.set("tool", "nhssh");
    m.set("version", env!("CARGO_PKG_VERSION"));
    if let Ok(toml::Value::Table(t)) = toml::Value::try_from(cfg) {
        for (k, v) in t {
            m.set(&format!("config.{k}"), v);
        }
    }
    derived(cfg, &mut m);
    let res = match cfg.command {
        Command::Spectrum => run_spectrum(cfg, out, &mut m),
        Command::Zak => run_zak(cfg, out, &mut m),
        Command::Evolve => run_evolve(cfg, out, &mut m),
        Command::Scatter => run_scatter(cfg, out, &mut m),
        Command::NetworkCheck => run_network_check(cfg, out, &mut m),
    };
    match &res {
        Ok(_) => m.set("status", "ok"),
        Err(e) => m.set("status", format!("error: {e}")),
    };
    m.write(out.join("manifest.txt"))?;
    let headline = res?;
    Ok(Outcome { manifest: m, headline })
}

/// `ξ+` and the predicted scattering fractions, when the bulk spectrum is real.
fn derived(cfg: &RunConfig, m: &mut Manifest) {
    if cfg.gain.abs() < cfg.delta.abs() {
        if let Ok(xi) = xi_plus(cfg.delta, cfg.gain, cfg.n_quad) {
            m.set_num("derived.xi_plus", xi);
            m.set_num("derived.norm_gain_half_cycle", (2.0 * xi).exp());
        }
        if let Ok((t, c)) = confinement_prediction(cfg.delta, cfg.gain, cfg.n_quad) {
            m.set_num("derived.predicted_transmit_fraction", t);
            m.set_num("derived.predicted_confine_fraction", c);
        }
    } else {
        m.set("derived.xi_plus", "n/a (|Delta| >= |delta|)");
    }
}

fn model(cfg: &RunConfig) -> SshModel<f64> {
    SshModel::new(cfg.delta, cfg.gain, cfg.flux)
}

fn run_spectrum(cfg: &RunConfig, out: &Path, m: &mut Manifest) -> Result<&'static str, CliError> {
    let model = model(cfg);
    let rep = spectrum_reality(&model, cfg.n_k)?;
    m.set(
        "reality",
        match rep.class {
            Reality::FullyReal => "fully_real",
            Reality::Broken => "broken",
            Reality::EpOnGrid => "ep_on_grid",
        },
    );
    m.set_num("min_margin", rep.min_margin);
    m.set_num("min_modulus", rep.min_modulus);
    let ks = nhssh::bloch::k_grid::<f64>(cfg.n_k);
    let energies: Vec<_> = ks.iter().map(|&k| model.energy(k)).collect();
    write_csv(
        out.join("bloch_spectrum.csv"),
        &["k", "re_plus", "im_plus", "re_minus", "im_minus"],
        ks.iter().zip(&energies).map(|(&k, r)| vec![num(k), num(r.re), num(r.im), num(-r.re), num(-r.im)]),
    )?;
    if let Some(n) = cfg.n_cells {
        let spec = SshRingSpec { n_cells: n, delta: cfg.delta, gain: cfg.gain, flux: cfg.flux };
        let ev = spectrum(&build_ssh_ring(&spec)?)?;
        let mut bloch = Vec::with_capacity(2 * n);
        for k in nhssh::bloch::k_grid::<f64>(n) {
            let r = model.energy(k);
            bloch.extend([r, -r]);
        }
        m.set_num("ring_vs_bloch_distance", multiset_distance(&ev, &bloch));
        write_csv(
            out.join("ring_spectrum.csv"),
            &["index", "re", "im"],
            ev.iter().enumerate().map(|(i, e)| vec![i.to_string(), num(e.re), num(e.im)]),
        )?;
    }
    Ok("min_margin")
}

fn run_zak(cfg: &RunConfig, out: &Path, m: &mut Manifest) -> Result<&'static str, CliError> {
    let model = SshModel::new(cfg.delta, cfg.gain, 0.0);
    let mut rows = Vec::new();
    for (band, name) in [(Band::Plus, "plus"), (Band::Minus, "minus")] {
        let results = [
            zak_closed_form(cfg.delta, cfg.gain, band, cfg.n_quad)?,
            zak_quadrature(&model, band, cfg.n_quad)?,
            zak_wilson_loop(&model, band, cfg.n_k, &WilsonOptions::default())?,
        ];
        for z in results {
            m.set_num(&format!("z_{name}.{}.re", z.method.label()), z.value.re);
            m.set_num(&format!("z_{name}.{}.im", z.method.label()), z.value.im);
            rows.push(vec![
                z.method.label().to_string(),
                name.to_string(),
                num(z.value.re),
                num(z.value.im),
                z.n_k.to_string(),
            ]);
        }
    }
    write_csv(out.join("zak.csv"), &["method", "band", "re", "im", "n"], rows)?;
    Ok("z_plus.closed_form.im")
}

fn carrier(cfg: &RunConfig) -> Carrier<f64> {
    match cfg.carrier {
        CarrierKind::Literal => Carrier::Literal,
        CarrierKind::UpperBand => Carrier::UpperBand,
        CarrierKind::Dressed => Carrier::Dressed(SshModel::new(cfg.delta, cfg.gain, 0.0)),
    }
}

fn protocol(cfg: &RunConfig) -> FluxProtocol<f64> {
    let (start, end) = (cfg.flux, cfg.final_flux);
    match cfg.protocol {
        ProtocolKind::Constant => FluxProtocol::Constant { flux: start },
        ProtocolKind::Linear => FluxProtocol::Linear {
            rate: cfg.beta.unwrap_or(0.0),
            flux_start: start,
            flux_end: end,
            t_on: 0.0,
        },
        ProtocolKind::Erf => match FluxProtocol::erf_sweep(cfg.duration.unwrap_or(0.0)) {
            FluxProtocol::Erf { scale, center, duration, t_on, .. } => FluxProtocol::Erf {
                scale,
                center,
                duration,
                flux_start: start,
                flux_end: end,
                t_on,
            },
            p => p,
        },
    }
}

fn run_evolve(cfg: &RunConfig, out: &Path, m: &mut Manifest) -> Result<&'static str, CliError> {
    let n = cfg.n_cells.unwrap_or(0);
    let spec = SshRingSpec { n_cells: n, delta: cfg.delta, gain: cfg.gain, flux: cfg.flux };
    let center = cfg.center.unwrap_or(n as f64);
    let wp = WavepacketSpec { center, width: cfg.width, k0: cfg.k0, carrier: carrier(cfg) };
    let psi0 = make_gwp(&wp, spec.n_sites())?;
    let op = ssh_ring_operator(&spec)?;
    let p = protocol(cfg);
    p.validate()?;
    let total = match (cfg.total_time, p) {
        (Some(t), _) => t,
        (None, FluxProtocol::Constant { .. }) => {
            return Err(Error::InvalidParameter("a constant protocol needs `total_time`".into()).into())
        }
        (None, p) => p.end_time(),
    };
    let h = Driven { op: &op, protocol: p };
    let opts = EvolveOptions {
        stride: cfg.stride,
        ring: true,
        check_halving: cfg.check_halving,
        ..EvolveOptions::default()
    };
    let r = evolve(&h, &psi0, total, cfg.dt, &opts)?;
    let fl = sample_flux(&p, &r.times);
    let pred = match cfg.protocol {
        // the closed-form trajectory assumes a constant sweep rate
        ProtocolKind::Linear => Some(predict_trajectory(&spec, wp.cell_momentum(), cfg.beta.unwrap_or(1.0), center, &fl)),
        _ => None,
    };
    let rows = (0..r.times.len()).map(|i| {
        vec![
            num(r.times[i]),
            num(fl[i]),
            num(r.center_traj[i]),
            pred.as_ref().map(|x| num(x[i])).unwrap_or_default(),
            num(r.dirac_norm[i]),
        ]
    });
    write_csv(out.join("trajectory.csv"), &["t", "flux", "center", "predicted_center", "dirac_norm"], rows)?;
    let n0 = dirac_norm(&psi0);
    m.set_num("final_time", *r.times.last().unwrap_or(&0.0));
    m.set_num("final_norm_ratio", r.dirac_norm.last().copied().unwrap_or(n0) / n0);
    m.set_num("final_center", r.center_traj.last().copied().unwrap_or(center));
    m.set_num("fidelity_with_initial", fidelity(&psi0, &r.final_state)?.norm());
    let span = |x: &[f64]| x.iter().cloned().fold(f64::MIN, f64::max) - x.iter().cloned().fold(f64::MAX, f64::min);
    m.set_num("oscillation_amplitude", span(&r.center_traj));
    if let Some(x) = &pred {
        m.set_num("predicted_amplitude", span(x));
    }
    if let Some(c) = r.halving_change {
        m.set_num("halving_change", c);
    }
    Ok("final_norm_ratio")
}

fn network(cfg: &RunConfig) -> NetworkSpec<f64> {
    NetworkSpec {
        n_a: cfg.n_a.unwrap_or(0),
        n_b: cfg.n_b.unwrap_or(0),
        n_d: cfg.n_d.unwrap_or(0),
        delta: cfg.delta,
        gain: cfg.gain,
        flux: cfg.flux,
    }
}

fn run_scatter(cfg: &RunConfig, out: &Path, m: &mut Manifest) -> Result<&'static str, CliError> {
    let net = network(cfg);
    let s = ScatterScenario {
        network: net,
        wavepacket: WavepacketSpec {
            center: cfg.center.unwrap_or(net.n_a as f64),
            width: cfg.width,
            k0: cfg.k0,
            carrier: carrier(cfg),
        },
        protocol: protocol(cfg),
        timing: match cfg.timing {
            Some(TimingKind::DuringTransit) => ImpulseTiming::DuringTransit { ring_threshold: cfg.ring_threshold },
            _ => ImpulseTiming::BeforeArrival,
        },
        total_time: cfg.total_time,
    };
    let opts = ScatterOptions {
        stride: cfg.stride,
        check_halving: cfg.check_halving,
        max_imag_bound: cfg.max_imag_bound,
        ..ScatterOptions::default()
    };
    let r = run_scenario(&s, cfg.dt, &opts)?;
    let rows = (0..r.times.len()).map(|i| {
        vec![
            num(r.times[i]),
            num(r.flux[i]),
            num(r.prob_a[i]),
            num(r.prob_ring[i]),
            num(r.prob_d[i]),
            num(r.virtual_a[i]),
            num(r.virtual_b[i]),
            num(r.dirac_norm[i]),
        ]
    });
    write_csv(
        out.join("scatter.csv"),
        &["t", "flux", "prob_A", "prob_ring", "prob_D", "virtual_a", "virtual_b", "dirac_norm"],
        rows,
    )?;
    m.set_num("transmission", r.transmission);
    m.set_num("confinement", r.confinement);
    m.set_num("reflection", r.reflection);
    m.set_num("impulse_start", r.impulse_start);
    m.set_num("impulse_end", r.impulse_end);
    if let Some(f) = r.clone_fidelity {
        m.set_num("clone_fidelity", f);
    }
    if let Some(z) = r.arm_overlap {
        m.set_num("arm_overlap.re", z.re);
        m.set_num("arm_overlap.im", z.im);
    }
    if let Some(x) = r.arm_norm_ratio {
        m.set_num("arm_norm_ratio", x);
    }
    if let Some(x) = r.max_imag_energy {
        m.set_num("max_imag_energy", x);
    }
    if let Some(x) = r.halving_change {
        m.set_num("halving_change", x);
    }
    Ok("confinement")
}

fn run_network_check(cfg: &RunConfig, out: &Path, m: &mut Manifest) -> Result<&'static str, CliError> {
    let mut fluxes = vec![0.0, cfg.flux, PI];
    fluxes.dedup();
    fluxes.sort_by(f64::total_cmp);
    fluxes.dedup();
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for &phi in &fluxes {
        let spec = NetworkSpec { flux: phi, ..network(cfg) };
        let full = spectrum(&build_network(&spec)?)?;
        let v = virtual_decompose(&spec)?;
        let d = multiset_distance(&full, &spectrum(&v.assemble())?);
        worst = worst.max(d);
        let zero_required = phi == 0.0 || phi == PI;
        let ok = d < NETWORK_TOLERANCE && (!zero_required || v.t_bd.norm() == 0.0);
        if !ok {
            failures.push(phi);
        }
        rows.push(vec![
            num(phi),
            num(d),
            num(v.t_ad.re),
            num(v.t_ad.im),
            num(v.t_bd.re),
            num(v.t_bd.im),
            ok.to_string(),
        ]);
    }
    write_csv(
        out.join("network_check.csv"),
        &["flux", "spectral_distance", "t_ad_re", "t_ad_im", "t_bd_re", "t_bd_im", "pass"],
        rows,
    )?;
    m.set_num("max_distance", worst);
    m.set("pass", failures.is_empty());
    if failures.is_empty() {
        Ok("max_distance")
    } else {
        Err(CliError::Check(format!("network and virtual spectra differ at flux {failures:?}")))
    }
}

/// `key=start:stop:count`, evenly spaced and inclusive.
pub fn parse_sweep(s: &str) -> Result<(String, Vec<f64>), ConfigError> {
    let bad = || ConfigError::Validation(format!("sweep `{s}` is not of the form key=start:stop:count"));
    let (key, range) = s.split_once('=').ok_or_else(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    if key.is_empty() || parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    let values = (0..count)
        .map(|i| if count == 1 { start } else { start + (stop - start) * i as f64 / (count - 1) as f64 })
        .collect();
    Ok((key.trim().to_string(), values))
}

const INTEGER_KEYS: [&str; 7] = ["n_k", "n_quad", "n_cells", "n_a", "n_b", "n_d", "stride"];

/// Sets `key` in a raw config table, as an integer where the field expects one.
pub fn set_key(table: &mut toml::Table, key: &str, value: f64) -> Result<(), ConfigError> {
    let v = if INTEGER_KEYS.contains(&key) {
        if value.fract() != 0.0 || value < 0.0 {
            return Err(ConfigError::Validation(format!("`{key}` must be a non-negative integer, got {value}")));
        }
        toml::Value::Integer(value as i64)
    } else {
        toml::Value::Float(value)
    };
    table.insert(key.to_string(), v);
    Ok(())
}

/// Runs every sweep point in its own subdirectory and tabulates the headline values.
pub fn run_sweep(table: &toml::Table, key: &str, values: &[f64], out: &Path) -> Result<Vec<i32>, CliError> {
    fs::create_dir_all(out)?;
    let mut rows = Vec::new();
    let mut codes = Vec::new();
    let mut headline = "headline";
    for (i, &x) in values.iter().enumerate() {
        let mut t = table.clone();
        set_key(&mut t, key, x)?;
        let dir = out.join(format!("point_{i:03}"));
        let res = config::from_table(t).map_err(CliError::from).and_then(|c| run(&c, &dir));
        let (code, value) = match res {
            Ok(o) => {
                headline = o.headline;
                (0, o.headline_value().to_string())
            }
            Err(e) => {
                eprintln!("sweep point {i} ({key} = {x}): {e}");
                (e.exit_code(), String::new())
            }
        };
        codes.push(code);
        rows.push(vec![i.to_string(), num(x), code.to_string(), value]);
    }
    write_csv(out.join("sweep.csv"), &["index", key, "exit_code", headline], rows)?;
    Ok(codes)
}
