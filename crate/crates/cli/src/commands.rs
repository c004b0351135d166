//! Subcommand implementations. Each exposes its documented keys and a `run`
//! over resolved [`Settings`].

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cccpde_core::bayes::{BetaPosterior, ReportConfig};
use cccpde_core::data::{
    gen_mixture, heteroscedastic_sine, load_csv, noise_std, save_csv, Covariance, Dataset, MixtureComponent, Preset,
    SINE_DOMAIN,
};
use cccpde_core::eval::{density_grid, evaluate, write_density_grid, write_reports, write_roc_curves, GridBounds};
use cccpde_core::model::{
    glm_config, glm_fit_and_predict, load_model, save_model, train, CccpDeModel, FfnnModel, LossWeights, SavedModel,
    TrainConfig, TrainReport,
};
use cccpde_core::{Matrix, Rng};

use crate::settings::{usage, SettingKey, Settings};

fn required(key: &'static str, help: &'static str) -> SettingKey {
    (key, String::new(), help)
}

fn default(key: &'static str, value: impl ToString, help: &'static str) -> SettingKey {
    (key, value.to_string(), help)
}

fn out_dir(s: &Settings) -> Result<PathBuf> {
    let dir = PathBuf::from(s.raw("out")?);
    fs::create_dir_all(&dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_dataset(s: &Settings, key: &str) -> Result<Dataset> {
    let path = s.raw(key)?;
    load_csv(path).with_context(|| format!("loading {key} from {path}"))
}

fn load_kind(s: &Settings, key: &str) -> Result<SavedModel> {
    let path = s.raw(key)?;
    load_model(path).with_context(|| format!("loading model {path}"))
}

fn load_cccpde(s: &Settings, key: &str) -> Result<CccpDeModel> {
    match load_kind(s, key)? {
        SavedModel::Cccpde(m) => Ok(m),
        other => bail!("{} holds a {} model, expected cccpde", s.raw(key)?, other.kind_name()),
    }
}

fn load_ffnn(s: &Settings, key: &str) -> Result<FfnnModel> {
    match load_kind(s, key)? {
        SavedModel::Ffnn(m) => Ok(m),
        other => bail!("{} holds a {} model, expected ffnn", s.raw(key)?, other.kind_name()),
    }
}

// gen-data ------------------------------------------------------------------

pub const COMPONENT_PREFIX: &str = "component.";

pub fn gen_data_keys() -> Vec<SettingKey> {
    let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
    let preset_help: &'static str = Box::leak(format!("mixture preset: {}", names.join(", ")).into_boxed_str());
    vec![
        required("out", "output directory"),
        default("preset", Preset::Composite, preset_help),
        default("seed", 0, "root seed"),
        default("n_train", 2000, "training rows"),
        default("n_test", 2000, "test rows"),
    ]
}

/// `component.<id> = <class> <std> <count> <center...>`; rows are drawn
/// for both the train and the test file.
fn parse_component(key: &str, value: &str) -> Result<MixtureComponent> {
    let fields: Vec<&str> = value.split_whitespace().collect();
    if fields.len() < 4 {
        return usage(format!("{key}: expected `class std count center...`, got {value:?}"));
    }
    let bad = |what: &str| usage(format!("{key}: cannot parse {what} in {value:?}"));
    let Ok(class) = fields[0].parse() else { return bad("class") };
    let Ok(std) = fields[1].parse() else { return bad("std") };
    let Ok(count) = fields[2].parse() else { return bad("count") };
    let Ok(center) = fields[3..].iter().map(|f| f.parse()).collect::<Result<Vec<f64>, _>>() else {
        return bad("center");
    };
    Ok(MixtureComponent {
        class,
        center,
        covariance: Covariance::Isotropic(std),
        count,
    })
}

pub fn gen_data(s: &Settings) -> Result<String> {
    let seed: u64 = s.get("seed")?;
    let custom = s.prefixed();
    let (train_set, test_set) = if custom.is_empty() {
        let preset: Preset = s.get("preset")?;
        let data = preset.generate(s.get("n_train")?, s.get("n_test")?, seed)?;
        if let Some(label) = data.held_out_label {
            log::info!("test rows labelled {label} come from a class absent in training");
        }
        (data.train, data.test)
    } else {
        let components = custom
            .iter()
            .map(|(k, v)| parse_component(k, v))
            .collect::<Result<Vec<_>>>()?;
        (
            gen_mixture(&components, &mut Rng::derive(seed, "data/train"), "custom")?,
            gen_mixture(&components, &mut Rng::derive(seed, "data/test"), "custom")?,
        )
    };
    let dir = out_dir(s)?;
    save_csv(&train_set, dir.join("train.csv"))?;
    save_csv(&test_set, dir.join("test.csv"))?;
    write_text(&dir.join("gen_data.config.txt"), &s.render("gen-data"))?;
    Ok(format!(
        "wrote {} train and {} test rows to {}",
        train_set.len(),
        test_set.len(),
        dir.display()
    ))
}

// train ---------------------------------------------------------------------

fn train_config_keys(d: &TrainConfig) -> Vec<SettingKey> {
    vec![
        default("seed", d.seed, "root seed; init and shuffle streams derive from it"),
        default("epochs", d.epochs, "passes over the training set"),
        default("minibatch", d.minibatch, "rows per optimizer step"),
        default("learning_rate", d.learning_rate, "Adam step size"),
        default("hidden", d.hidden, "hidden width of the coupling s/t nets"),
        default("block_width", d.block_width, "width of the classifier blocks"),
        default("dropout", d.dropout, "classifier dropout rate"),
        default("base_depth", d.base_depth, "coupling layers in the shared base"),
        default("head_depth", d.head_depth, "coupling layers per class head"),
        default("weight_nll", d.weights.nll, "weight of the class-conditional NLL term"),
        default("weight_bce", d.weights.bce, "weight of the cross-entropy term"),
        default("standardize", d.standardize, "fit a per-feature standardizer on the training data"),
    ]
}

fn train_config(s: &Settings) -> Result<TrainConfig> {
    let config = TrainConfig {
        epochs: s.get("epochs")?,
        minibatch: s.get("minibatch")?,
        learning_rate: s.get("learning_rate")?,
        seed: s.get("seed")?,
        hidden: s.get("hidden")?,
        block_width: s.get("block_width")?,
        dropout: s.get("dropout")?,
        base_depth: s.get("base_depth")?,
        head_depth: s.get("head_depth")?,
        weights: LossWeights {
            nll: s.get("weight_nll")?,
            bce: s.get("weight_bce")?,
        },
        standardize: s.get("standardize")?,
    };
    if let Err(e) = config.validate() {
        return usage(e.to_string());
    }
    Ok(config)
}

pub fn train_keys() -> Vec<SettingKey> {
    let mut keys = vec![
        required("model", "model kind: ffnn or cccpde"),
        required("data", "training CSV"),
        required("out_model", "model file to write; sibling .loss.csv, .summary.txt and .config.txt are added"),
    ];
    keys.extend(train_config_keys(&TrainConfig::default()));
    keys
}

fn write_loss_trace(path: &Path, report: &TrainReport) -> Result<()> {
    let mut text = String::from("epoch,loss\n");
    for (i, l) in report.epoch_losses.iter().enumerate() {
        let _ = writeln!(text, "{},{l:?}", i + 1);
    }
    write_text(path, &text)
}

pub fn train_model(s: &Settings) -> Result<String> {
    let kind = s.raw("model")?.to_string();
    if kind != "cccpde" && kind != "ffnn" {
        return usage(format!("unknown model kind {kind:?}; expected ffnn or cccpde"));
    }
    let config = train_config(s)?;
    let data = load_dataset(s, "data")?;
    let mut init = Rng::derive(config.seed, "init");
    let mut shuffle = Rng::derive(config.seed, "shuffle");
    let (model, report) = match kind.as_str() {
        "cccpde" => {
            let mut m = CccpDeModel::new(data.dim(), data.num_classes(), &config, &mut init)?;
            let r = train(&mut m, &data, &config, &mut shuffle)?;
            (SavedModel::Cccpde(m), r)
        }
        "ffnn" => {
            let mut m = FfnnModel::new(data.dim(), &config, &mut init)?;
            let r = train(&mut m, &data, &config, &mut shuffle)?;
            (SavedModel::Ffnn(m), r)
        }
        _ => unreachable!("kind checked above"),
    };
    let path = PathBuf::from(s.raw("out_model")?);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    save_model(&model, &path)?;
    write_loss_trace(&path.with_extension("loss.csv"), &report)?;
    write_text(
        &path.with_extension("summary.txt"),
        &format!(
            "kind = {kind}\nrows = {}\ndim = {}\nclasses = {}\nsteps = {}\nfinal_loss = {:?}\n",
            data.len(),
            data.dim(),
            data.num_classes(),
            report.steps,
            report.final_loss
        ),
    )?;
    write_text(&path.with_extension("config.txt"), &s.render("train"))?;
    Ok(format!(
        "trained {kind} on {} rows, final loss {:.6}, saved {}",
        data.len(),
        report.final_loss,
        path.display()
    ))
}

// eval ----------------------------------------------------------------------

pub fn eval_keys() -> Vec<SettingKey> {
    let d = ReportConfig::new(1.0);
    vec![
        required("cccpde", "trained cccpde model file"),
        required("ffnn", "trained ffnn baseline model file"),
        required("data", "test CSV; labels >= 2 count as out-of-set"),
        required("out", "output directory"),
        default("threshold", d.threshold, "abstain when the credible interval is wider than this"),
        default("mass", d.mass, "credible-interval mass"),
        default(
            "volume_scale",
            cccpde_core::model::DEFAULT_VOLUME_SCALE,
            "neighborhood edge in training-std units; volume is the product over features",
        ),
        default("prior_a", d.prior.a(), "Beta prior pseudo-count for class 1"),
        default("prior_b", d.prior.b(), "Beta prior pseudo-count for class 0"),
        default("threads", 1, "worker threads for density evaluation"),
    ]
}

pub fn eval(s: &Settings, threads: usize) -> Result<String> {
    let cccpde = load_cccpde(s, "cccpde")?;
    let ffnn = load_ffnn(s, "ffnn")?;
    let test = load_dataset(s, "data")?;
    let prior = BetaPosterior::new(s.get("prior_a")?, s.get("prior_b")?).or_else(|e| usage(e.to_string()))?;
    let config = ReportConfig {
        prior,
        volume: cccpde.neighborhood_volume(s.get("volume_scale")?),
        mass: s.get("mass")?,
        threshold: s.get("threshold")?,
    };
    let e = evaluate(&cccpde, &ffnn, &test, &config, threads)?;
    let dir = out_dir(s)?;
    write_reports(create(&dir.join("reports.csv"))?, &e.rows)?;
    let full: Vec<_> = e.comparisons.iter().map(|c| (c.name.as_str(), &c.full)).collect();
    write_roc_curves(create(&dir.join("roc.csv"))?, &full)?;
    let kept: Vec<_> = e
        .comparisons
        .iter()
        .filter_map(|c| c.retained.as_ref().map(|r| (c.name.as_str(), r)))
        .collect();
    write_roc_curves(create(&dir.join("roc_filtered.csv"))?, &kept)?;

    let mut summary = format!(
        "test_rows = {}\nin_set_rows = {}\nretained = {}\nrejected = {}\nvolume = {:?}\n",
        test.len(),
        e.in_set.len(),
        e.partition.retained.len(),
        e.partition.rejected.len(),
        config.volume
    );
    if let Some(auc) = e.open_set_auc {
        let _ = writeln!(summary, "open_set_auc = {auc}");
    }
    for c in &e.comparisons {
        let retained = c.retained.as_ref().map_or(f64::NAN, |r| r.auc);
        let _ = writeln!(summary, "auc_full.{} = {}", c.name, c.full.auc);
        let _ = writeln!(summary, "auc_retained.{} = {retained}", c.name);
    }
    write_text(&dir.join("eval.summary.txt"), &summary)?;
    write_text(&dir.join("eval.config.txt"), &s.render("eval"))?;
    Ok(summary.trim_end().to_string())
}

// sample / density-grid -----------------------------------------------------

pub fn sample_keys() -> Vec<SettingKey> {
    vec![
        required("model", "trained cccpde model file"),
        required("class", "class head to sample from"),
        required("out", "output directory"),
        default("n", 10, "number of samples"),
        default("seed", 0, "root seed; the sampling stream derives from it"),
    ]
}

pub fn sample(s: &Settings) -> Result<String> {
    let model = load_cccpde(s, "model")?;
    let class: usize = s.get("class")?;
    let n: usize = s.get("n")?;
    if class >= model.num_classes() {
        return usage(format!("class {class} out of range; model has {} classes", model.num_classes()));
    }
    let x = model.sample(class, n, &mut Rng::derive(s.get("seed")?, "sampling"))?;
    let ds = Dataset::new(x, vec![class; n], model.num_classes(), format!("samples_class{class}"))?;
    let dir = out_dir(s)?;
    save_csv(&ds, dir.join("samples.csv"))?;
    write_text(&dir.join("sample.config.txt"), &s.render("sample"))?;
    Ok(format!("wrote {n} samples of class {class} to {}", dir.display()))
}

pub fn density_grid_keys() -> Vec<SettingKey> {
    vec![
        required("model", "trained cccpde model file (two features)"),
        required("out", "output directory"),
        default("resolution", 200, "grid points per axis"),
        default("x_min", "auto", "grid bounds; auto spans the training mean +- span_sigmas std"),
        default("x_max", "auto", ""),
        default("y_min", "auto", ""),
        default("y_max", "auto", ""),
        default("span_sigmas", 6, "half-width of automatic bounds in training std units"),
        default("threads", 1, "worker threads"),
    ]
}

fn bound(s: &Settings, key: &str, auto: f64) -> Result<f64> {
    if s.raw(key)? == "auto" {
        Ok(auto)
    } else {
        s.get(key)
    }
}

pub fn density(s: &Settings, threads: usize) -> Result<String> {
    let model = load_cccpde(s, "model")?;
    if model.dim() != 2 {
        return usage(format!("density grids need a two-feature model, this one has {}", model.dim()));
    }
    let k: f64 = s.get("span_sigmas")?;
    let (mean, std) = (model.standardizer.mean(), model.standardizer.std());
    let bounds = GridBounds {
        x: (bound(s, "x_min", mean[0] - k * std[0])?, bound(s, "x_max", mean[0] + k * std[0])?),
        y: (bound(s, "y_min", mean[1] - k * std[1])?, bound(s, "y_max", mean[1] + k * std[1])?),
    };
    let grid = density_grid(&model, bounds, s.get("resolution")?, threads)?;
    let dir = out_dir(s)?;
    write_density_grid(create(&dir.join("density_grid.csv"))?, &grid)?;
    let mut summary = format!(
        "x_range = {} {}\ny_range = {} {}\nmass_total = {}\n",
        bounds.x.0,
        bounds.x.1,
        bounds.y.0,
        bounds.y.1,
        grid.total_mass()
    );
    for c in 0..model.num_classes() {
        let _ = writeln!(summary, "mass_class.{c} = {}", grid.class_mass(c));
    }
    write_text(&dir.join("density_grid.summary.txt"), &summary)?;
    write_text(&dir.join("density_grid.config.txt"), &s.render("density-grid"))?;
    Ok(summary.trim_end().to_string())
}

// glm-demo ------------------------------------------------------------------

pub fn glm_demo_keys() -> Vec<SettingKey> {
    let d = glm_config();
    vec![
        required("out", "output directory"),
        default("seed", 0, "root seed"),
        default("n_train", 2000, "training points"),
        default("n_test", 5000, "held-out points for the coverage check"),
        default("grid", 601, "prediction grid points over the input domain"),
        default("epochs", d.epochs, "passes over the training set"),
        default("minibatch", d.minibatch, "rows per optimizer step"),
        default("learning_rate", d.learning_rate, "Adam step size"),
        default("hidden", d.hidden, "width of both hidden layers"),
    ]
}

pub fn glm_demo(s: &Settings) -> Result<String> {
    let seed: u64 = s.get("seed")?;
    let config = TrainConfig {
        seed,
        epochs: s.get("epochs")?,
        minibatch: s.get("minibatch")?,
        learning_rate: s.get("learning_rate")?,
        hidden: s.get("hidden")?,
        ..glm_config()
    };
    let points: usize = s.get("grid")?;
    if points < 2 {
        return usage("grid needs at least two points");
    }
    let train_data = heteroscedastic_sine(s.get("n_train")?, &mut Rng::derive(seed, "data/train"));
    let held_out = heteroscedastic_sine(s.get("n_test")?, &mut Rng::derive(seed, "data/test"));
    let (lo, hi) = SINE_DOMAIN;
    let xs: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
    let (model, pred, report) = glm_fit_and_predict(&train_data, &Matrix::column_vector(xs.clone()), &config)?;

    let dir = out_dir(s)?;
    let mut csv = String::from("x,mu,sigma,y_true\n");
    for (i, &x) in xs.iter().enumerate() {
        let _ = writeln!(csv, "{x:?},{:?},{:?},{:?}", pred.mean[i], pred.std[i], x.sin());
    }
    write_text(&dir.join("glm.csv"), &csv)?;

    let test_pred = model.predict(&held_out.x)?;
    let covered = (0..held_out.len())
        .filter(|&i| (held_out.y[i] - test_pred.mean[i]).abs() <= 2.0 * test_pred.std[i])
        .count();
    let mut sorted = pred.std.clone();
    sorted.sort_by(f64::total_cmp);
    let summary = format!(
        "coverage_2sigma = {}\nmedian_sigma = {}\nmean_true_sigma = {}\nfinal_loss = {:?}\n",
        covered as f64 / held_out.len().max(1) as f64,
        sorted[sorted.len() / 2],
        xs.iter().map(|&x| noise_std(x)).sum::<f64>() / xs.len() as f64,
        report.final_loss
    );
    write_text(&dir.join("glm_demo.summary.txt"), &summary)?;
    write_text(&dir.join("glm_demo.config.txt"), &s.render("glm-demo"))?;
    Ok(summary.trim_end().to_string())
}
