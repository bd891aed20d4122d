//! Run configuration: flat `key = value` TOML sections, overridden by flags.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use wqed::coupling::CouplingModel;
use wqed::dynamics::{Normalization, SourceMethod};
use wqed::sweep::{CellSpec, GridOverrides, SweepSpec, DEFAULT_OMEGA0_OVER_GAMMA, DEFAULT_PULSE_AREA_TOL};
use wqed::{output, Error};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    Full,
    RwaCutoff,
    RwaConstg,
    RwaNegfreq,
}

impl ModelName {
    pub fn with_epsilon(self, epsilon: Option<f64>) -> wqed::Result<CouplingModel<f64>> {
        let m = match self {
            ModelName::Full => CouplingModel::Full,
            ModelName::RwaConstg => CouplingModel::RwaConstG,
            ModelName::RwaNegfreq => CouplingModel::RwaNegFreq,
            ModelName::RwaCutoff => CouplingModel::RwaCutoff {
                epsilon: epsilon.ok_or_else(|| Error::Config("model rwa-cutoff needs an epsilon".into()))?,
            },
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    pub gamma_over_delta: f64,
    pub k0l: f64,
    pub omega0_over_gamma: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self { gamma_over_delta: 1.0, k0l: std::f64::consts::FRAC_PI_4, omega0_over_gamma: DEFAULT_OMEGA0_OVER_GAMMA }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WavepacketSection {
    pub normalization: Normalization,
    pub source: SourceMethod,
}

impl Default for WavepacketSection {
    fn default() -> Self {
        Self { normalization: Normalization::UnitExcitation, source: SourceMethod::GaussianClosedForm }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingSection {
    pub model: ModelName,
    /// Infrared cutoff of `rwa-cutoff`, in units of `Γ`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl Default for CouplingSection {
    fn default() -> Self {
        Self { model: ModelName::Full, epsilon: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub span: f64,
    pub zero_pad: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = GridOverrides::<f64>::default();
        Self { dt: g.dt, span: g.span, zero_pad: g.zero_pad }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub max_rows: usize,
    pub plots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), max_rows: output::DEFAULT_MAX_ROWS, plots: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TolerancesSection {
    pub pulse_area: f64,
    pub warn_ratio: f64,
    pub fail_ratio: f64,
}

impl Default for TolerancesSection {
    fn default() -> Self {
        Self {
            pulse_area: DEFAULT_PULSE_AREA_TOL,
            warn_ratio: wqed::params::DEFAULT_WARN_RATIO,
            fail_ratio: wqed::params::DEFAULT_FAIL_RATIO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSection,
    pub wavepacket: WavepacketSection,
    pub coupling: CouplingSection,
    pub grid: GridSection,
    pub output: OutputSection,
    pub tolerances: TolerancesSection,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub gamma_over_delta: Option<f64>,
    pub k0l: Option<f64>,
    pub omega0_over_gamma: Option<f64>,
    pub model: Option<ModelName>,
    pub epsilon: Option<f64>,
    pub grid_dt: Option<f64>,
    pub grid_span: Option<f64>,
    pub zero_pad: Option<usize>,
    pub out: Option<PathBuf>,
    pub plots: bool,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        let p = &mut self.params;
        p.gamma_over_delta = o.gamma_over_delta.unwrap_or(p.gamma_over_delta);
        p.k0l = o.k0l.unwrap_or(p.k0l);
        p.omega0_over_gamma = o.omega0_over_gamma.unwrap_or(p.omega0_over_gamma);
        self.coupling.model = o.model.unwrap_or(self.coupling.model);
        self.coupling.epsilon = o.epsilon.or(self.coupling.epsilon);
        self.grid.dt = o.grid_dt.or(self.grid.dt);
        self.grid.span = o.grid_span.unwrap_or(self.grid.span);
        self.grid.zero_pad = o.zero_pad.unwrap_or(self.grid.zero_pad);
        if let Some(d) = &o.out {
            self.output.dir = d.clone();
        }
        self.output.plots |= o.plots;
    }

    pub fn cell(&self) -> wqed::Result<CellSpec<f64>> {
        let model = self.coupling.model.with_epsilon(self.coupling.epsilon)?;
        let p = &self.params;
        let mut cell = CellSpec::new(p.gamma_over_delta, p.k0l);
        cell.omega0_over_gamma = p.omega0_over_gamma;
        cell.model = model;
        cell.normalization = self.wavepacket.normalization;
        cell.source = self.wavepacket.source;
        cell.grid = GridOverrides { dt: self.grid.dt, span: self.grid.span, zero_pad: self.grid.zero_pad };
        cell.pulse_area_tol = self.tolerances.pulse_area;
        cell.warn_ratio = self.tolerances.warn_ratio;
        cell.fail_ratio = self.tolerances.fail_ratio;
        Ok(cell)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub gamma_over_delta: Vec<f64>,
    pub k0l: Vec<f64>,
    #[serde(default = "default_models")]
    pub models: Vec<ModelName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

fn default_models() -> Vec<ModelName> {
    vec![ModelName::Full]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepParamsSection {
    pub omega0_over_gamma: f64,
}

impl Default for SweepParamsSection {
    fn default() -> Self {
        Self { omega0_over_gamma: DEFAULT_OMEGA0_OVER_GAMMA }
    }
}

/// Sweep file: a `[sweep]` section with value lists; the other
/// sections apply to every cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub sweep: SweepSection,
    #[serde(default)]
    pub params: SweepParamsSection,
    #[serde(default)]
    pub wavepacket: WavepacketSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub tolerances: TolerancesSection,
}

impl SweepFile {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_spec(&self, out: Option<&Path>) -> wqed::Result<SweepSpec<f64>> {
        let mut base = RunConfig {
            params: ParamsSection { omega0_over_gamma: self.params.omega0_over_gamma, ..ParamsSection::default() },
            wavepacket: self.wavepacket,
            grid: self.grid,
            output: self.output.clone(),
            tolerances: self.tolerances,
            ..RunConfig::default()
        };
        base.coupling.epsilon = self.sweep.epsilon;
        let models =
            self.sweep.models.iter().map(|m| m.with_epsilon(self.sweep.epsilon)).collect::<wqed::Result<Vec<_>>>()?;
        let mut spec = SweepSpec::new(self.sweep.gamma_over_delta.clone(), self.sweep.k0l.clone());
        spec.models = models;
        spec.base = base.cell()?;
        spec.out_dir = Some(out.map_or_else(|| self.output.dir.clone(), Path::to_path_buf));
        spec.max_rows = self.output.max_rows;
        spec.plots = self.output.plots;
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_text_is_the_default_config() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn flags_win_over_file() {
        let mut c = RunConfig::parse("[params]\nk0l = 1.5\ngamma_over_delta = 2.0\n").unwrap();
        c.apply(&Overrides { k0l: Some(0.25), ..Overrides::default() });
        assert_eq!(c.params.k0l, 0.25);
        assert_eq!(c.params.gamma_over_delta, 2.0);
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let err = RunConfig::parse("[params]\nk0l = 1.0\nbogus = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn rwa_cutoff_requires_epsilon() {
        let c = RunConfig::parse("[coupling]\nmodel = \"rwa-cutoff\"\n").unwrap();
        assert!(c.cell().is_err());
        let c = RunConfig::parse("[coupling]\nmodel = \"rwa-cutoff\"\nepsilon = 1e-3\n").unwrap();
        assert!(matches!(c.cell().unwrap().model, CouplingModel::RwaCutoff { epsilon } if epsilon == 1e-3));
    }

    #[test]
    fn sweep_file_expands_cells() {
        let f = SweepFile::parse(
            "[sweep]\ngamma_over_delta = [0.02, 4.0]\nk0l = [0.5]\nmodels = [\"full\", \"rwa-negfreq\"]\n",
        )
        .unwrap();
        assert_eq!(f.to_spec(None).unwrap().cells().len(), 4);
    }

    fn model() -> impl Strategy<Value = ModelName> {
        prop_oneof![
            Just(ModelName::Full),
            Just(ModelName::RwaCutoff),
            Just(ModelName::RwaConstg),
            Just(ModelName::RwaNegfreq)
        ]
    }

    prop_compose! {
        fn config()(
            g in 0.0f64..100.0, x in 0.0f64..50.0, w in 1.0f64..1e8,
            m in model(), eps in proptest::option::of(1e-12f64..1.0),
            dt in proptest::option::of(1e-6f64..1.0), span in 0.5f64..4.0, pad in 1usize..32,
            rows in 1usize..100_000, plots in any::<bool>(), dir in "[a-z]{1,8}",
            pa in 1e-9f64..1.0, warn in 0.0f64..1.0, fail in 0.0f64..1.0,
            paper in any::<bool>(), quad in any::<bool>(),
        ) -> RunConfig {
            RunConfig {
                params: ParamsSection { gamma_over_delta: g, k0l: x, omega0_over_gamma: w },
                wavepacket: WavepacketSection {
                    normalization: if paper { Normalization::PaperPrefactor } else { Normalization::UnitExcitation },
                    source: if quad { SourceMethod::Quadrature } else { SourceMethod::GaussianClosedForm },
                },
                coupling: CouplingSection { model: m, epsilon: eps },
                grid: GridSection { dt, span, zero_pad: pad },
                output: OutputSection { dir: dir.into(), max_rows: rows, plots },
                tolerances: TolerancesSection { pulse_area: pa, warn_ratio: warn, fail_ratio: fail },
            }
        }
    }

    proptest! {
        #[test]
        fn config_round_trips(c in config()) {
            let text = c.to_toml();
            let back = RunConfig::parse(&text).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.to_toml(), text);
        }
    }
}
