//! Run configuration: one key table per subcommand, shared by the command
//! line (`--key value`) and config files (`key = value`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use bcslab::potential::RadialPotential;
use bcslab::specfun::GridControls;

#[derive(Debug)]
pub enum CliError {
    Core(bcslab::Error),
    Config(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<bcslab::Error> for CliError {
    fn from(e: bcslab::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use bcslab::Error::*;
        match self {
            CliError::Core(Domain { .. }) => 2,
            CliError::Core(Accuracy { .. } | NonConvergence { .. }) => 3,
            CliError::Core(Config { .. } | InvalidParameter { .. }) | CliError::Config(_) => 4,
            CliError::Core(Numerical { .. }) | CliError::Io(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub help: &'static str,
    pub default: Option<&'static str>,
}

const fn key(name: &'static str, help: &'static str, default: Option<&'static str>) -> Key {
    Key { name, help, default }
}

const POTENTIAL: Key = key(
    "potential",
    "radial potential, e.g. gaussian:v=5,s=1 or square_well:v=2,R=1",
    Some("gaussian:v=5,s=1"),
);
const MU: Key = key("mu", "chemical potential", Some("1"));
const ELL_MAX: Key = key("ell-max", "largest angular momentum channel", Some("8"));
const CUTOFF: Key = key("cutoff", "momentum cutoff (default from mu and the potential range)", None);
const PANELS: Key = key("panels-per-decade", "grid panels per decade towards the Fermi surface", Some("3"));
const POINTS: Key = key("points-per-panel", "Gauss-Legendre points per panel", Some("12"));
const OUT: Key = key("out", "CSV output path (manifest goes next to it)", None);
const MANIFEST: Key = key("manifest", "JSON-lines manifest path", None);
const DIM: Key = key("dim", "spatial dimension of the GL torus", Some("2"));
const MODES: Key = key("modes", "plane-wave radius N (|k_i| <= N)", Some("16"));
const FIELDS: Key = key("fields", "external field file (W/A Fourier modes); empty means no fields", None);

pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: Vec<Key>,
}

/// Every subcommand with its keys.
pub fn commands() -> Vec<Command> {
    let common = [OUT, MANIFEST];
    let grid = [CUTOFF, PANELS, POINTS];
    let mk = |name, about, own: &[Key], with_grid: bool| {
        let mut keys = own.to_vec();
        if with_grid {
            keys.extend_from_slice(&grid);
        }
        keys.extend_from_slice(&common);
        Command { name, about, keys }
    };
    vec![
        mk(
            "gap",
            "solve the gap equation on a temperature ladder",
            &[
                POTENTIAL,
                MU,
                key("t", "temperature or comma-separated ladder (0 allowed)", Some("0")),
                key("ell", "angular momentum channel", Some("0")),
                key("tol", "relative fixed-point residual", Some("1e-12")),
                key("damping", "fixed-point damping in (0, 1]", Some("0.5")),
            ],
            true,
        ),
        mk(
            "tc",
            "critical temperature from the Birman-Schwinger criterion",
            &[
                POTENTIAL,
                MU,
                key("lambda", "coupling multiplier or ladder", Some("1")),
                ELL_MAX,
                key("rel-tol", "relative width of the final T bracket", Some("1e-6")),
            ],
            true,
        ),
        mk("emu", "channel eigenvalues e_l of V_mu", &[POTENTIAL, MU, ELL_MAX], false),
        mk(
            "bmu",
            "b_mu(lambda) and the weak-coupling T_c formula",
            &[POTENTIAL, MU, key("lambda", "coupling multiplier or ladder", Some("1")), ELL_MAX],
            false,
        ),
        mk(
            "scatlen",
            "scattering length of 2V",
            &[POTENTIAL, key("method", "resolvent, ode or both", Some("both"))],
            false,
        ),
        mk(
            "zerorange",
            "zero-range gap and critical temperature",
            &[
                key("a", "scattering length (negative)", Some("-1")),
                MU,
                key("t", "temperature ladder for the gap (empty: T_c only)", None),
            ],
            false,
        ),
        mk(
            "xi-ratio",
            "energy gap over T_c along a coupling ladder",
            &[POTENTIAL, MU, key("lambda", "coupling ladder", Some("0.6,0.45,0.35"))],
            true,
        ),
        mk(
            "glcoeff",
            "Ginzburg-Landau coefficients from the s-wave zero mode",
            &[
                POTENTIAL,
                MU,
                key("tc", "critical temperature (computed when absent)", None),
                key("scale", "multiplier of the normalized zero mode", Some("1")),
            ],
            true,
        ),
        mk(
            "dc",
            "critical parameter D_c for external fields",
            &[
                FIELDS,
                key("lambda1", "GL coefficient lambda1", Some("1")),
                key("lambda2", "GL coefficient lambda2", Some("1")),
                DIM,
                MODES,
            ],
            false,
        ),
        mk(
            "glmin",
            "minimize the GL functional on the torus",
            &[
                FIELDS,
                key("lambda1", "GL coefficient lambda1", Some("1")),
                key("lambda2", "GL coefficient lambda2", Some("1")),
                key("lambda3", "GL coefficient lambda3", Some("1")),
                key("d", "reduced temperature parameter D", Some("1")),
                DIM,
                key("modes", "plane-wave radius N (|k_i| <= N)", Some("8")),
                key("starts", "number of random starts", Some("4")),
                key("seed", "random seed", Some("0")),
                key("grad-tol", "gradient norm tolerance", Some("1e-10")),
            ],
            false,
        ),
        mk(
            "verify",
            "run named verification suites",
            &[key("suite", "suite name, comma-separated list, or all", Some("all"))],
            false,
        ),
    ]
}

/// Parse `key = value` lines; `#` starts a comment. Underscores in keys are
/// read as dashes.
pub fn parse_config_text(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("line {}: expected key = value, got {raw:?}", i + 1)))?;
        let k = k.trim().replace('_', "-");
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(bad(format!("line {}: duplicate key '{k}'", i + 1)));
        }
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Resolved parameters of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Merge defaults, config-file entries and command-line flags (in
    /// increasing priority). Keys the command does not know are rejected.
    pub fn resolve(
        cmd: &Command,
        file: &BTreeMap<String, String>,
        flags: &BTreeMap<String, String>,
    ) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for k in &cmd.keys {
            if let Some(d) = k.default {
                values.insert(k.name.to_string(), d.to_string());
            }
        }
        for (k, v) in file.iter().chain(flags) {
            if !cmd.keys.iter().any(|x| x.name == k) {
                return Err(bad(format!("unknown key '{k}' for '{}'", cmd.name)));
            }
            values.insert(k.clone(), v.clone());
        }
        Ok(RunConfig {
            command: cmd.name,
            values,
        })
    }

    pub fn raw(&self, k: &str) -> Option<&str> {
        self.values.get(k).map(String::as_str).filter(|s| !s.is_empty())
    }

    fn required(&self, k: &str) -> CliResult<&str> {
        self.raw(k).ok_or_else(|| bad(format!("missing value for '{k}'")))
    }

    pub fn f64(&self, k: &str) -> CliResult<f64> {
        parse_finite(k, self.required(k)?)
    }

    pub fn opt_f64(&self, k: &str) -> CliResult<Option<f64>> {
        self.raw(k).map(|s| parse_finite(k, s)).transpose()
    }

    pub fn usize(&self, k: &str) -> CliResult<usize> {
        let s = self.required(k)?;
        s.parse().map_err(|_| bad(format!("{k}: expected a non-negative integer, got '{s}'")))
    }

    pub fn u64(&self, k: &str) -> CliResult<u64> {
        let s = self.required(k)?;
        s.parse().map_err(|_| bad(format!("{k}: expected a non-negative integer, got '{s}'")))
    }

    pub fn string(&self, k: &str) -> CliResult<String> {
        self.required(k).map(str::to_string)
    }

    /// Comma-separated values, strictly increasing or strictly decreasing.
    pub fn ladder(&self, k: &str) -> CliResult<Vec<f64>> {
        match self.raw(k) {
            Some(s) => parse_ladder(k, s),
            None => Ok(Vec::new()),
        }
    }

    pub fn potential(&self) -> CliResult<RadialPotential> {
        Ok(self.required("potential")?.parse()?)
    }

    pub fn grid(&self) -> CliResult<GridControls> {
        Ok(GridControls {
            cutoff: self.opt_f64("cutoff")?,
            panels_per_decade: self.usize("panels-per-decade")?,
            points_per_panel: self.usize("points-per-panel")?,
            ..GridControls::default()
        })
    }
}

fn parse_finite(k: &str, s: &str) -> CliResult<f64> {
    match s.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(bad(format!("{k}: expected a finite number, got '{s}'"))),
    }
}

pub fn parse_ladder(k: &str, s: &str) -> CliResult<Vec<f64>> {
    let xs = s
        .split(',')
        .map(|t| parse_finite(k, t))
        .collect::<CliResult<Vec<f64>>>()?;
    let up = xs.windows(2).all(|w| w[1] > w[0]);
    let down = xs.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(bad(format!("{k}: ladder must be strictly monotone, got '{s}'")));
    }
    Ok(xs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladders_must_be_monotone() {
        assert_eq!(parse_ladder("t", "0.3, 0.2,0.1").unwrap(), vec![0.3, 0.2, 0.1]);
        assert!(parse_ladder("t", "0.1,0.3,0.2").is_err());
        assert!(parse_ladder("t", "0.1,0.1").is_err());
        assert!(parse_ladder("t", "1,nan").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let cmds = commands();
        let tc = cmds.iter().find(|c| c.name == "tc").unwrap();
        let file = parse_config_text("mu = 2\n# comment\nell_max = 3\n").unwrap();
        let cfg = RunConfig::resolve(tc, &file, &BTreeMap::new()).unwrap();
        assert_eq!(cfg.usize("ell-max").unwrap(), 3);
        let bogus = parse_config_text("temperature = 1").unwrap();
        assert!(RunConfig::resolve(tc, &bogus, &BTreeMap::new()).is_err());
    }
}
