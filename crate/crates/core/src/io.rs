//! Configuration files, the run timeseries and snapshot formats, physical
//! pressure recovery, and plain-text report rendering.
//!
//! All formats are chosen for exact reproducibility: the config serializer
//! and both file writers emit decimal floats that parse back to the same
//! bits, snapshots store raw little-endian payloads, and every writer is
//! deterministic so byte-for-byte comparison of two runs is meaningful.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::diagnostics::{DiagnosticsRecord, EstimateReport};
use crate::error::Error;
use crate::grid::{FaceVectorField, Grid, ScalarField};
use crate::mms::{ManufacturedCase, StudyReport};
use crate::operators::{q_correction, Params};
use crate::scenarios::{Scenario, ScenarioKind};
use crate::timestepper::{Forcing, Reaction, RunSchedule, SolverOptions, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReactionKind {
    Zero,
    Constant,
    AnalyticPreset,
}

impl ReactionKind {
    pub fn name(self) -> &'static str {
        match self {
            ReactionKind::Zero => "zero",
            ReactionKind::Constant => "constant",
            ReactionKind::AnalyticPreset => "analytic_preset",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcingKind {
    Zero,
    Constant,
    Manufactured,
}

impl ForcingKind {
    pub fn name(self) -> &'static str {
        match self {
            ForcingKind::Zero => "zero",
            ForcingKind::Constant => "constant",
            ForcingKind::Manufactured => "manufactured",
        }
    }
}

/// Everything a run needs, one field per config key. `Default` is the
/// documented baseline that `print-defaults` dumps; a config file only
/// overrides the keys it mentions.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub params: Params,
    pub g_kind: ReactionKind,
    pub g_value: f64,
    pub forcing_kind: ForcingKind,
    pub fx: f64,
    pub fy: f64,
    pub scenario_kind: ScenarioKind,
    pub c0: f64,
    pub x0: f64,
    pub w: f64,
    pub a_pert: f64,
    pub mms_a: f64,
    pub mms_b: f64,
    pub mms_omega: f64,
    pub mms_sigma: f64,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: u64,
    pub snapshot_every: u64,
    pub cfl_override: bool,
    pub out_dir: String,
    pub tol: f64,
    pub max_iter: u64,
    pub precondition: bool,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Config {
        let params = Params::default();
        let scenario = Scenario::default();
        let case = ManufacturedCase::default();
        let solver = SolverOptions::default();
        Config {
            nx: 64,
            ny: 64,
            lx: 1.0,
            ly: 1.0,
            params,
            g_kind: ReactionKind::Zero,
            g_value: 0.0,
            forcing_kind: ForcingKind::Zero,
            fx: 0.0,
            fy: 0.0,
            scenario_kind: scenario.kind,
            c0: scenario.c0,
            x0: scenario.x0,
            w: scenario.w,
            a_pert: scenario.a_pert,
            mms_a: case.a,
            mms_b: case.b,
            mms_omega: case.omega,
            mms_sigma: case.sigma,
            dt: 1e-3,
            t_end: 1.0,
            record_every: 10,
            snapshot_every: 0,
            cfl_override: false,
            out_dir: "out".into(),
            tol: solver.cg_tol,
            max_iter: solver.cg_max_iter,
            precondition: solver.precondition,
            seed: 0,
        }
    }
}

impl Config {
    pub fn build_grid(&self) -> Result<Grid, Error> {
        Grid::new(self.nx, self.ny, self.lx, self.ly)
    }

    pub fn build_reaction(&self) -> Reaction {
        match self.g_kind {
            ReactionKind::Zero => Reaction::Zero,
            ReactionKind::Constant => Reaction::Constant(self.g_value),
            ReactionKind::AnalyticPreset => Reaction::Preset(self.g_value),
        }
    }

    pub fn manufactured_case(&self) -> ManufacturedCase {
        ManufacturedCase {
            a: self.mms_a,
            b: self.mms_b,
            omega: self.mms_omega,
            sigma: self.mms_sigma,
        }
    }

    pub fn build_forcing(&self) -> Forcing {
        match self.forcing_kind {
            ForcingKind::Zero => Forcing::Zero,
            ForcingKind::Constant => Forcing::Constant {
                fx: self.fx,
                fy: self.fy,
            },
            ForcingKind::Manufactured => Forcing::Manufactured(self.manufactured_case()),
        }
    }

    pub fn build_scenario(&self) -> Scenario {
        Scenario {
            kind: self.scenario_kind,
            c0: self.c0,
            x0: self.x0,
            w: self.w,
            a_pert: self.a_pert,
            seed: self.seed,
            case: self.manufactured_case(),
        }
    }

    pub fn build_schedule(&self) -> RunSchedule {
        RunSchedule {
            dt: self.dt,
            t_end: self.t_end,
            record_every: self.record_every,
            snapshot_every: self.snapshot_every,
        }
    }

    pub fn build_solver_options(&self) -> SolverOptions {
        SolverOptions {
            cg_tol: self.tol,
            cg_max_iter: self.max_iter,
            precondition: self.precondition,
            cfl_override: self.cfl_override,
        }
    }

    fn assign(&mut self, key: &str, value: &str, line: usize) -> Result<(), Error> {
        match key {
            "grid.nx" => self.nx = parse_usize(key, value)?,
            "grid.ny" => self.ny = parse_usize(key, value)?,
            "grid.lx" => self.lx = parse_f64(key, value)?,
            "grid.ly" => self.ly = parse_f64(key, value)?,
            "params.mu" => self.params.mu = parse_f64(key, value)?,
            "params.mu_e" => self.params.mu_e = parse_f64(key, value)?,
            "params.d" => self.params.d = parse_f64(key, value)?,
            "params.alpha" => self.params.alpha = parse_f64(key, value)?,
            "params.beta" => self.params.beta = parse_f64(key, value)?,
            "params.delta_hat" => self.params.delta_hat = parse_f64(key, value)?,
            "params.gamma" => self.params.gamma = parse_f64(key, value)?,
            "reaction.g_kind" => self.g_kind = parse_reaction_kind(key, value)?,
            "reaction.g_value" => self.g_value = parse_f64(key, value)?,
            "forcing.kind" => self.forcing_kind = parse_forcing_kind(key, value)?,
            "forcing.fx" => self.fx = parse_f64(key, value)?,
            "forcing.fy" => self.fy = parse_f64(key, value)?,
            "scenario.kind" => self.scenario_kind = parse_scenario_kind(key, value)?,
            "scenario.c0" => self.c0 = parse_f64(key, value)?,
            "scenario.x0" => self.x0 = parse_f64(key, value)?,
            "scenario.w" => self.w = parse_f64(key, value)?,
            "scenario.a_pert" => self.a_pert = parse_f64(key, value)?,
            "mms.a" => self.mms_a = parse_f64(key, value)?,
            "mms.b" => self.mms_b = parse_f64(key, value)?,
            "mms.omega" => self.mms_omega = parse_f64(key, value)?,
            "mms.sigma" => self.mms_sigma = parse_f64(key, value)?,
            "run.dt" => self.dt = parse_f64(key, value)?,
            "run.t_end" => self.t_end = parse_f64(key, value)?,
            "run.record_every" => self.record_every = parse_u64(key, value)?,
            "run.snapshot_every" => self.snapshot_every = parse_u64(key, value)?,
            "run.cfl_override" => self.cfl_override = parse_bool(key, value)?,
            "run.out_dir" => self.out_dir = value.to_string(),
            "solver.tol" => self.tol = parse_f64(key, value)?,
            "solver.max_iter" => self.max_iter = parse_u64(key, value)?,
            "solver.precondition" => self.precondition = parse_bool(key, value)?,
            "seed" => self.seed = parse_u64(key, value)?,
            _ => {
                return Err(Error::UnknownKey {
                    key: key.to_string(),
                    line,
                })
            }
        }
        Ok(())
    }

    /// Re-checks every model constraint with the config key it belongs to,
    /// so a bad file is reported in the user's own vocabulary.
    pub fn validate(&self) -> Result<(), Error> {
        self.build_grid()?;
        let positive = [
            ("params.mu", self.params.mu),
            ("params.mu_e", self.params.mu_e),
            ("params.d", self.params.d),
            ("params.alpha", self.params.alpha),
            ("params.delta_hat", self.params.delta_hat),
            ("params.gamma", self.params.gamma),
            ("run.dt", self.dt),
            ("run.t_end", self.t_end),
            ("solver.tol", self.tol),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(constraint(key, "must be > 0"));
            }
        }
        let nonnegative = [
            ("params.beta", self.params.beta),
            ("reaction.g_value", self.g_value),
            ("scenario.w", self.w),
            ("scenario.a_pert", self.a_pert),
        ];
        for (key, v) in nonnegative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(constraint(key, "must be >= 0"));
            }
        }
        if !(0.0..=1.0).contains(&self.c0) {
            return Err(constraint("scenario.c0", "must lie in [0, 1]"));
        }
        if !(0.0 <= self.x0 && self.x0 <= self.lx) {
            return Err(constraint("scenario.x0", "must lie inside [0, lx]"));
        }
        if self.record_every == 0 {
            return Err(constraint("run.record_every", "must be >= 1"));
        }
        Ok(())
    }
}

fn constraint(key: &str, rule: &str) -> Error {
    Error::ConstraintViolation {
        key: key.to_string(),
        rule: rule.to_string(),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, Error> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::TypeMismatch {
            key: key.to_string(),
            expected: "a finite number",
            got: value.to_string(),
        }),
    }
}

fn parse_u64(key: &str, value: &str) -> Result<u64, Error> {
    value.parse::<u64>().map_err(|_| Error::TypeMismatch {
        key: key.to_string(),
        expected: "a non-negative integer",
        got: value.to_string(),
    })
}

fn parse_usize(key: &str, value: &str) -> Result<usize, Error> {
    value.parse::<usize>().map_err(|_| Error::TypeMismatch {
        key: key.to_string(),
        expected: "a non-negative integer",
        got: value.to_string(),
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, Error> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::TypeMismatch {
            key: key.to_string(),
            expected: "true or false",
            got: value.to_string(),
        }),
    }
}

fn parse_reaction_kind(key: &str, value: &str) -> Result<ReactionKind, Error> {
    for kind in [
        ReactionKind::Zero,
        ReactionKind::Constant,
        ReactionKind::AnalyticPreset,
    ] {
        if value == kind.name() {
            return Ok(kind);
        }
    }
    Err(Error::TypeMismatch {
        key: key.to_string(),
        expected: "one of zero, constant, analytic_preset",
        got: value.to_string(),
    })
}

fn parse_forcing_kind(key: &str, value: &str) -> Result<ForcingKind, Error> {
    for kind in [
        ForcingKind::Zero,
        ForcingKind::Constant,
        ForcingKind::Manufactured,
    ] {
        if value == kind.name() {
            return Ok(kind);
        }
    }
    Err(Error::TypeMismatch {
        key: key.to_string(),
        expected: "one of zero, constant, manufactured",
        got: value.to_string(),
    })
}

fn parse_scenario_kind(key: &str, value: &str) -> Result<ScenarioKind, Error> {
    for kind in [
        ScenarioKind::Uniform,
        ScenarioKind::DisplacementStripe,
        ScenarioKind::MmsSlice,
        ScenarioKind::FreeDecay,
        ScenarioKind::DarcyLimit,
        ScenarioKind::StokesLimit,
    ] {
        if value == kind.name() {
            return Ok(kind);
        }
    }
    Err(Error::TypeMismatch {
        key: key.to_string(),
        expected:
            "one of uniform, displacement_stripe, mms_slice, free_decay, darcy_limit, stokes_limit",
        got: value.to_string(),
    })
}

/// Parses the flat `section.key = value` format. `#` starts a comment
/// anywhere on a line; blank lines are skipped; every key is optional and
/// falls back to the documented default; unknown keys are errors, not
/// warnings, so typos cannot silently revert a knob to its default.
pub fn parse_config(text: &str) -> Result<Config, Error> {
    let mut cfg = Config::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key_raw, value_raw)) = line.split_once('=') else {
            return Err(Error::BadConfigLine {
                line: line_no,
                text: line.to_string(),
            });
        };
        let key = key_raw.trim();
        let value = value_raw.trim();
        if key.is_empty() || value.is_empty() {
            return Err(Error::BadConfigLine {
                line: line_no,
                text: line.to_string(),
            });
        }
        cfg.assign(key, value, line_no)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Renders a config in the same format `parse_config` reads. Floats use the
/// shortest decimal form that parses back to identical bits, so
/// `parse(serialize(c)) == c` holds exactly.
pub fn serialize_config(cfg: &Config) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "grid.nx = {}", cfg.nx);
    let _ = writeln!(s, "grid.ny = {}", cfg.ny);
    let _ = writeln!(s, "grid.lx = {}", cfg.lx);
    let _ = writeln!(s, "grid.ly = {}", cfg.ly);
    s.push('\n');
    let _ = writeln!(s, "params.mu = {}", cfg.params.mu);
    let _ = writeln!(s, "params.mu_e = {}", cfg.params.mu_e);
    let _ = writeln!(s, "params.d = {}", cfg.params.d);
    let _ = writeln!(s, "params.alpha = {}", cfg.params.alpha);
    let _ = writeln!(s, "params.beta = {}", cfg.params.beta);
    let _ = writeln!(s, "params.delta_hat = {}", cfg.params.delta_hat);
    let _ = writeln!(s, "params.gamma = {}", cfg.params.gamma);
    s.push('\n');
    let _ = writeln!(s, "reaction.g_kind = {}", cfg.g_kind.name());
    let _ = writeln!(s, "reaction.g_value = {}", cfg.g_value);
    s.push('\n');
    let _ = writeln!(s, "forcing.kind = {}", cfg.forcing_kind.name());
    let _ = writeln!(s, "forcing.fx = {}", cfg.fx);
    let _ = writeln!(s, "forcing.fy = {}", cfg.fy);
    s.push('\n');
    let _ = writeln!(s, "scenario.kind = {}", cfg.scenario_kind.name());
    let _ = writeln!(s, "scenario.c0 = {}", cfg.c0);
    let _ = writeln!(s, "scenario.x0 = {}", cfg.x0);
    let _ = writeln!(s, "scenario.w = {}", cfg.w);
    let _ = writeln!(s, "scenario.a_pert = {}", cfg.a_pert);
    s.push('\n');
    let _ = writeln!(s, "mms.a = {}", cfg.mms_a);
    let _ = writeln!(s, "mms.b = {}", cfg.mms_b);
    let _ = writeln!(s, "mms.omega = {}", cfg.mms_omega);
    let _ = writeln!(s, "mms.sigma = {}", cfg.mms_sigma);
    s.push('\n');
    let _ = writeln!(s, "run.dt = {}", cfg.dt);
    let _ = writeln!(s, "run.t_end = {}", cfg.t_end);
    let _ = writeln!(s, "run.record_every = {}", cfg.record_every);
    let _ = writeln!(s, "run.snapshot_every = {}", cfg.snapshot_every);
    let _ = writeln!(s, "run.cfl_override = {}", cfg.cfl_override);
    let _ = writeln!(s, "run.out_dir = {}", cfg.out_dir);
    s.push('\n');
    let _ = writeln!(s, "solver.tol = {}", cfg.tol);
    let _ = writeln!(s, "solver.max_iter = {}", cfg.max_iter);
    let _ = writeln!(s, "solver.precondition = {}", cfg.precondition);
    s.push('\n');
    let _ = writeln!(s, "seed = {}", cfg.seed);
    s
}

/// Reads and parses a config file. If the `BKSIM_OUT` environment variable
/// is set and non-empty it overrides `run.out_dir`.
pub fn load_config(path: &Path) -> Result<Config, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = parse_config(&text)?;
    if let Ok(dir) = std::env::var("BKSIM_OUT") {
        if !dir.is_empty() {
            cfg.out_dir = dir;
        }
    }
    Ok(cfg)
}

pub const TIMESERIES_HEADER: &str = "t,l2_C,h1s_C,l2_U,h1s_U,energy,mass,div_residual,dt,cg_iters";

/// Renders the timeseries as CSV text: fixed header, one row per record,
/// floats at 17 significant digits so reading the file back reproduces the
/// in-memory values bit for bit, LF line endings.
pub fn format_timeseries(series: &[DiagnosticsRecord]) -> String {
    let mut s = String::with_capacity(64 + series.len() * 240);
    s.push_str(TIMESERIES_HEADER);
    s.push('\n');
    for r in series {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.t, r.l2_c, r.h1s_c, r.l2_u, r.h1s_u, r.energy, r.mass, r.div_residual, r.dt, r.cg_iters
        );
    }
    s
}

pub fn write_timeseries(path: &Path, series: &[DiagnosticsRecord]) -> Result<(), Error> {
    fs::write(path, format_timeseries(series)).map_err(|e| Error::io(path, e))
}

pub fn read_timeseries(path: &Path) -> Result<Vec<DiagnosticsRecord>, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let malformed = |line: usize, detail: &str| Error::MalformedTimeseries {
        path: path.display().to_string(),
        line,
        detail: detail.to_string(),
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == TIMESERIES_HEADER => {}
        _ => return Err(malformed(1, "missing or wrong header")),
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(malformed(line_no, "expected 10 comma-separated fields"));
        }
        let mut nums = [0.0f64; 9];
        for (slot, field) in nums.iter_mut().zip(&fields[..9]) {
            *slot = match field.parse::<f64>() {
                Ok(v) if v.is_finite() => v,
                _ => return Err(malformed(line_no, "unreadable or non-finite value")),
            };
        }
        let cg_iters = fields[9]
            .parse::<u64>()
            .map_err(|_| malformed(line_no, "unreadable iteration count"))?;
        out.push(DiagnosticsRecord {
            t: nums[0],
            l2_c: nums[1],
            h1s_c: nums[2],
            l2_u: nums[3],
            h1s_u: nums[4],
            energy: nums[5],
            mass: nums[6],
            div_residual: nums[7],
            dt: nums[8],
            cg_iters,
        });
    }
    Ok(out)
}

const SNAPSHOT_MAGIC: &str = "BKSIM1";

/// Writes a state as one ASCII header line (`BKSIM1 nx ny lx ly t`) followed
/// by raw little-endian float64 blocks: C, u, v, modified pressure.
pub fn write_snapshot(path: &Path, state: &State) -> Result<(), Error> {
    let g = state.grid();
    let payload_len = 8 * (2 * g.n_cells() + (g.nx + 1) * g.ny + g.nx * (g.ny + 1));
    let mut bytes = Vec::with_capacity(64 + payload_len);
    bytes.extend_from_slice(
        format!(
            "{} {} {} {} {} {}\n",
            SNAPSHOT_MAGIC, g.nx, g.ny, g.lx, g.ly, state.t
        )
        .as_bytes(),
    );
    for block in [
        state.c.as_slice(),
        state.u.u_slice(),
        state.u.v_slice(),
        state.p_tilde.as_slice(),
    ] {
        for v in block {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<State, Error> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let name = || path.display().to_string();
    let bad_payload = |detail: &str| Error::BadPayload {
        path: name(),
        detail: detail.to_string(),
    };

    // The header ends at the first newline and must be short and ASCII.
    let header_end = match bytes.iter().take(128).position(|&b| b == b'\n') {
        Some(pos) => pos,
        None => return Err(Error::BadMagic { path: name() }),
    };
    let header = match std::str::from_utf8(&bytes[..header_end]) {
        Ok(h) => h,
        Err(_) => return Err(Error::BadMagic { path: name() }),
    };
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.first() != Some(&SNAPSHOT_MAGIC) {
        return Err(Error::BadMagic { path: name() });
    }
    if tokens.len() != 6 {
        return Err(bad_payload("header needs 6 fields: magic nx ny lx ly t"));
    }
    let nx: usize = tokens[1]
        .parse()
        .map_err(|_| bad_payload("unreadable nx"))?;
    let ny: usize = tokens[2]
        .parse()
        .map_err(|_| bad_payload("unreadable ny"))?;
    let lx: f64 = tokens[3]
        .parse()
        .map_err(|_| bad_payload("unreadable lx"))?;
    let ly: f64 = tokens[4]
        .parse()
        .map_err(|_| bad_payload("unreadable ly"))?;
    let t: f64 = tokens[5].parse().map_err(|_| bad_payload("unreadable t"))?;
    if !t.is_finite() {
        return Err(Error::NonFinitePayload { path: name() });
    }
    let grid = Grid::new(nx, ny, lx, ly)?;

    let counts = [
        grid.n_cells(),
        (grid.nx + 1) * grid.ny,
        grid.nx * (grid.ny + 1),
        grid.n_cells(),
    ];
    let expected: usize = counts.iter().map(|n| 8 * n).sum();
    let payload = &bytes[header_end + 1..];
    if payload.len() != expected {
        return Err(Error::SizeMismatch {
            path: name(),
            detail: format!(
                "header promises {} payload bytes, file holds {}",
                expected,
                payload.len()
            ),
        });
    }

    let mut offset = 0;
    let mut blocks: Vec<Vec<f64>> = Vec::with_capacity(4);
    for count in counts {
        let mut block = Vec::with_capacity(count);
        for k in 0..count {
            let at = offset + 8 * k;
            let raw: [u8; 8] = payload[at..at + 8].try_into().unwrap();
            block.push(f64::from_le_bytes(raw));
        }
        if !block.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinitePayload { path: name() });
        }
        offset += 8 * count;
        blocks.push(block);
    }
    let p_tilde_vals = blocks.pop().unwrap();
    let v_vals = blocks.pop().unwrap();
    let u_vals = blocks.pop().unwrap();
    let c_vals = blocks.pop().unwrap();

    let mut c = ScalarField::zeros(grid);
    c.as_mut_slice().copy_from_slice(&c_vals);
    let mut p_tilde = ScalarField::zeros(grid);
    p_tilde.as_mut_slice().copy_from_slice(&p_tilde_vals);
    let mut u = FaceVectorField::zeros(grid);
    for j in 0..grid.ny {
        for i in 0..=grid.nx {
            u.set_u(i, j, u_vals[j * (grid.nx + 1) + i]);
        }
    }
    for j in 0..=grid.ny {
        for i in 0..grid.nx {
            u.set_v(i, j, v_vals[j * grid.nx + i]);
        }
    }
    Ok(State::new(t, u, c, p_tilde))
}

/// Recovers the physical pressure from the modified one: adds the
/// concentration-dependent correction absorbed into the pressure during the
/// momentum reduction, then recenters to zero mean. The only consumer of
/// the `gamma` parameter.
pub fn physical_pressure(p_tilde: &ScalarField, c: &ScalarField, p: &Params) -> ScalarField {
    let mut out = q_correction(c, p);
    out.add_scaled(1.0, p_tilde);
    out.recenter();
    out
}

/// One line per estimate: name, verdict, worst observed value against its
/// threshold, and the fitted slack order when a refinement study ran.
pub fn format_estimate_reports(reports: &[EstimateReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let verdict = if r.pass { "PASS" } else { "FAIL" };
        let _ = write!(
            s,
            "estimate {}: {} (worst {:.3e}, threshold {:.3e}",
            r.id.name(),
            verdict,
            r.worst,
            r.threshold
        );
        if let Some(order) = r.slack_order {
            let _ = write!(s, ", slack order {order:.2}");
        }
        let _ = writeln!(s, ") at index {}", r.worst_index);
    }
    s
}

pub const CONVERGENCE_HEADER: &str = "n,dt,err_C,err_U,order_C,order_U";

/// Renders a refinement study as CSV. Orders are blank on the first level,
/// where there is nothing to compare against.
pub fn format_convergence_csv(report: &StudyReport) -> String {
    let mut s = String::new();
    s.push_str(CONVERGENCE_HEADER);
    s.push('\n');
    for level in &report.levels {
        let _ = write!(
            s,
            "{},{:.16e},{:.16e},{:.16e}",
            level.n, level.dt, level.err_c, level.err_u
        );
        match level.order_c {
            Some(o) => {
                let _ = write!(s, ",{o:.6}");
            }
            None => s.push(','),
        }
        match level.order_u {
            Some(o) => {
                let _ = writeln!(s, ",{o:.6}");
            }
            None => s.push_str(",\n"),
        }
    }
    s
}

pub fn write_convergence_csv(path: &Path, report: &StudyReport) -> Result<(), Error> {
    fs::write(path, format_convergence_csv(report)).map_err(|e| Error::io(path, e))
}
