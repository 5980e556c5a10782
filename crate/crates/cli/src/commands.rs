use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use dii_core::georef::find_sidecar;
use dii_core::impact::count_cells;
use dii_core::report::{impact_geojson, read_impact_csv, write_dii_csv, write_impact_csv, write_metrics_csv};
use dii_core::{
    compute_change_mask, compute_dii, eval_gridded, eval_pixelwise, generate_scenario, grid_truth, load_mask,
    make_grid, make_pair, save_mask, threshold_dii, ChangeMask, DiiGrid, EvalReport, ImpactMap,
};

use crate::settings::{FileConfig, Flags, InputRecord, Manifest, Settings};

/// A failed command together with its exit status.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or incompatible inputs, bad flags or config (exit 2).
    Input(anyhow::Error),
    /// The analysis itself failed (exit 1).
    Pipeline(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Pipeline(_) => 1,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Input(e) | Failure::Pipeline(e) => e,
        }
    }
}

impl From<dii_core::Error> for Failure {
    fn from(e: dii_core::Error) -> Self {
        if e.is_domain_error() {
            Failure::Pipeline(e.into())
        } else {
            Failure::Input(e.into())
        }
    }
}

type Outcome = Result<(), Failure>;

fn input(e: anyhow::Error) -> Failure {
    Failure::Input(e)
}

fn output<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Pipeline(e.into())
}

struct Context_ {
    settings: Settings,
    manifest: Manifest,
    out: PathBuf,
}

fn setup(command: &'static str, flags: &Flags) -> Result<Context_, Failure> {
    let file = match &flags.config {
        Some(path) => FileConfig::load(path).map_err(input)?,
        None => FileConfig::default(),
    };
    let settings = Settings::resolve(flags, &file).map_err(input)?;
    let mut manifest = Manifest::new(command);
    if let Some(path) = &flags.config {
        manifest.config_file = Some(InputRecord::of(path).map_err(input)?);
    }
    manifest.parameters = Some(settings.clone());
    Ok(Context_ {
        settings,
        manifest,
        out: flags.out.clone(),
    })
}

fn record_input(manifest: &mut Manifest, role: &'static str, path: &Path) -> Result<(), Failure> {
    manifest.inputs.insert(role, InputRecord::of(path).map_err(input)?);
    Ok(())
}

impl Context_ {
    fn create_out(&self) -> Outcome {
        fs::create_dir_all(&self.out)
            .with_context(|| format!("creating output directory {}", self.out.display()))
            .map_err(output)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Outcome {
        let path = self.path(name);
        fs::write(&path, contents)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(output)?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    fn write_mask(&mut self, name: &str, mask: &dii_core::BinaryMask) -> Outcome {
        save_mask(mask, self.path(name)).map_err(output)?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    fn finish(mut self) -> Outcome {
        self.manifest.outputs.push("manifest.json".into());
        let json = self.manifest.to_json();
        let path = self.path("manifest.json");
        fs::write(&path, json)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(output)
    }

    fn write_grid_outputs(&mut self, grid: &DiiGrid, impact: &ImpactMap, georef_source: &Path) -> Outcome {
        let world = find_sidecar(georef_source)?;
        if world.is_some() {
            self.manifest
                .notes
                .push(format!("polygons georeferenced by {}", dii_core::georef::sidecar_path(georef_source).display()));
        }
        if grid.spec().has_partial_cells() {
            self.manifest
                .notes
                .push("edge cells are partial and included in the region mean".into());
        }
        let mut csv = Vec::new();
        write_dii_csv(&mut csv, grid, impact).map_err(output)?;
        self.write("dii.csv", csv)?;
        let geojson = impact_geojson(grid, impact, world.as_ref()).map_err(output)?;
        let mut text = serde_json::to_string_pretty(&geojson).map_err(output)?;
        text.push('\n');
        self.write("impact.geojson", text)
    }
}

pub fn change(before: &Path, after: &Path, flags: &Flags) -> Outcome {
    let mut ctx = setup("change", flags)?;
    let pair = make_pair(load_mask(before)?, load_mask(after)?)?;
    record_input(&mut ctx.manifest, "before", before)?;
    record_input(&mut ctx.manifest, "after", after)?;

    let change = compute_change_mask(&pair, &ctx.settings.pipeline());
    ctx.create_out()?;
    ctx.write_mask("change.pgm", change.mask())?;
    println!(
        "{} change pixels written to {}",
        change.count_ones(),
        ctx.path("change.pgm").display()
    );
    ctx.finish()
}

pub fn dii(change_path: &Path, before_path: &Path, flags: &Flags) -> Outcome {
    let mut ctx = setup("dii", flags)?;
    let change = ChangeMask::from_mask(load_mask(change_path)?);
    let before = load_mask(before_path)?;
    record_input(&mut ctx.manifest, "change", change_path)?;
    record_input(&mut ctx.manifest, "before", before_path)?;

    let spec = make_grid(before.width(), before.height(), ctx.settings.grid_size.value)?;
    let grid = compute_dii(&change, &before, &spec)?;
    let impact = threshold_dii(&grid, ctx.settings.tau.value)?;
    ctx.create_out()?;
    ctx.write_grid_outputs(&grid, &impact, before_path)?;
    println!("{} of {} cells impacted", impact.impacted_count(), spec.num_cells());
    ctx.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EvalMode {
    /// Compare two change masks pixel by pixel
    Pixel,
    /// Compare two impact tables cell by cell
    Grid,
}

pub fn eval(pred: &Path, truth: &Path, mode: EvalMode, flags: &Flags) -> Outcome {
    let mut ctx = setup("eval", flags)?;
    let report = match mode {
        EvalMode::Pixel => {
            let p = ChangeMask::from_mask(load_mask(pred)?);
            let t = ChangeMask::from_mask(load_mask(truth)?);
            eval_pixelwise(&p, &t)?
        }
        EvalMode::Grid => eval_gridded(&read_impact_csv(pred)?, &read_impact_csv(truth)?)?,
    };
    record_input(&mut ctx.manifest, "pred", pred)?;
    record_input(&mut ctx.manifest, "truth", truth)?;
    ctx.create_out()?;
    let mut csv = Vec::new();
    write_metrics_csv(&mut csv, &[report]).map_err(output)?;
    print!("{}", String::from_utf8_lossy(&csv));
    ctx.write("metrics.csv", csv)?;
    ctx.finish()
}

pub fn synth(config_path: &Path, out: &Path) -> Outcome {
    let file = FileConfig::load(config_path).map_err(input)?;
    let config = file
        .synth
        .ok_or_else(|| anyhow!("{}: no [synth] table", config_path.display()))
        .map_err(input)?;
    config.validate()?;
    let scenario = generate_scenario(&config)?;

    let mut manifest = Manifest::new("synth");
    manifest.config_file = Some(InputRecord::of(config_path).map_err(input)?);
    manifest.scenario = Some(config.clone());
    let mut ctx = Context_ {
        settings: Settings::resolve(&Flags::default(), &FileConfig::default()).map_err(input)?,
        manifest,
        out: out.to_path_buf(),
    };
    ctx.create_out()?;
    ctx.write_mask("before.pgm", &scenario.before)?;
    ctx.write_mask("after.pgm", &scenario.after)?;
    ctx.write_mask("truth_change.pgm", scenario.truth_change.mask())?;

    let spec = config.grid()?;
    let counts = count_cells(&scenario.truth_change, &scenario.before, &spec)?;
    let index = compute_dii(&scenario.truth_change, &scenario.before, &spec).ok();
    let mut csv = Vec::new();
    write_impact_csv(&mut csv, &scenario.truth_impact, &counts, index.as_ref().map(DiiGrid::dii)).map_err(output)?;
    ctx.write("truth_impact.csv", csv)?;
    println!(
        "scenario written to {}: {} feature pixels, {} removed, {} cells impacted",
        out.display(),
        scenario.before.count_ones(),
        scenario.truth_change.count_ones(),
        scenario.truth_impact.impacted_count()
    );
    ctx.finish()
}

pub fn run(before_path: &Path, after_path: &Path, truth_path: Option<&Path>, flags: &Flags) -> Outcome {
    let mut ctx = setup("run", flags)?;
    let before = load_mask(before_path)?;
    let pair = make_pair(before.clone(), load_mask(after_path)?)?;
    record_input(&mut ctx.manifest, "before", before_path)?;
    record_input(&mut ctx.manifest, "after", after_path)?;

    let truth = match truth_path {
        Some(p) if p.exists() => {
            let mask = load_mask(p)?;
            if mask.dimensions() != before.dimensions() {
                return Err(dii_core::Error::DimensionMismatch {
                    left: before.dimensions(),
                    right: mask.dimensions(),
                }
                .into());
            }
            record_input(&mut ctx.manifest, "truth", p)?;
            Some(ChangeMask::from_mask(mask))
        }
        Some(p) => {
            eprintln!("warning: truth file {} not found; evaluation skipped", p.display());
            ctx.manifest
                .notes
                .push(format!("truth file {} not found; evaluation skipped", p.display()));
            None
        }
        None => None,
    };

    ctx.create_out()?;
    let change = compute_change_mask(&pair, &ctx.settings.pipeline());
    ctx.write_mask("change.pgm", change.mask())?;

    let spec = make_grid(before.width(), before.height(), ctx.settings.grid_size.value)?;
    let tau = ctx.settings.tau.value;
    let grid = compute_dii(&change, &before, &spec)?;
    let impact = threshold_dii(&grid, tau)?;
    ctx.write_grid_outputs(&grid, &impact, before_path)?;

    let mut summary = format!(
        "grid: {spec}\nregion mean: {} feature px per cell\nchange pixels: {}\nimpacted cells: {} of {}\n",
        grid.region_mean(),
        change.count_ones(),
        impact.impacted_count(),
        spec.num_cells()
    );

    if let Some(truth) = truth {
        let rule = ctx.settings.truth_rule.value;
        let truth_impact = grid_truth(&truth, &before, &spec, rule, tau)?;
        let counts = count_cells(&truth, &before, &spec)?;
        let truth_index = compute_dii(&truth, &before, &spec).ok();
        let mut csv = Vec::new();
        write_impact_csv(&mut csv, &truth_impact, &counts, truth_index.as_ref().map(DiiGrid::dii)).map_err(output)?;
        ctx.write("truth_impact.csv", csv)?;

        let reports = [eval_pixelwise(&change, &truth)?, eval_gridded(&impact, &truth_impact)?];
        let mut csv = Vec::new();
        write_metrics_csv(&mut csv, &reports).map_err(output)?;
        ctx.write("metrics.csv", csv)?;
        for r in &reports {
            summary.push_str(&format_report(r));
        }
    } else {
        summary.push_str("evaluation: skipped (no ground truth)\n");
    }
    print!("{summary}");
    ctx.write("summary.txt", summary)?;
    ctx.finish()
}

fn format_report(r: &EvalReport) -> String {
    format!(
        "{:<5} precision {:.4}  recall {:.4}  f1 {:.4}  iou {:.4}  (tp {} fp {} fn {} tn {})\n",
        r.setting.to_string(), r.precision, r.recall, r.f1, r.iou, r.counts.tp, r.counts.fp, r.counts.fn_, r.counts.tn
    )
}
