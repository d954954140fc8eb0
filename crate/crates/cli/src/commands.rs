//! The subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use reflectionless::scattering::{reflection_fit, transmission};
use reflectionless::verification::oracle_n1;
use reflectionless::{
    full_verify, scattering_state, BoundStateSet, Execution, PresetKind, Reconstruction, Spectrum,
};

use crate::config::{Command, RunConfig};
use crate::export::{export_plot_data, fmt_float, Dataset, FigureData, PlotStyle};
use crate::Failure;

/// Figure directories and their spectra, in output order.
pub const FIGURES: [(&str, &str); 5] = [
    ("sho", "sho"),
    ("isw", "isw"),
    ("hydrogen", "hydrogen"),
    ("power4", "power"),
    ("lost", "lost"),
];
/// Largest state count whose wave functions are exported by `figures`.
pub const FIGURE_WAVE_STATES: usize = 5;
/// Energies of the scattering checks in the oracle figure.
pub const ORACLE_ENERGIES: [f64; 4] = [0.5, 1.0, 5.0, 20.0];

pub fn run(cfg: &RunConfig) -> Result<(), Failure> {
    match cfg.command {
        Command::Potential => potential(cfg),
        Command::Bound => bound(cfg),
        Command::Scatter => scatter(cfg),
        Command::Verify => verify(cfg),
        Command::Figures => figures(cfg),
        Command::Presets => {
            print!("{}", presets_table()?);
            Ok(())
        }
    }
}

fn out_dir(path: impl AsRef<Path>) -> Result<PathBuf, Failure> {
    let path = path.as_ref();
    fs::create_dir_all(path).map_err(|e| Failure::Input(format!("cannot create {}: {e}", path.display())))?;
    Ok(path.to_path_buf())
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn levels_dataset(s: &Spectrum, energies: &[f64]) -> Result<Dataset, Failure> {
    Ok(Dataset::new()
        .with_column("n", (1..=energies.len()).map(|n| n as f64).collect())?
        .with_column("energy", energies.to_vec())?
        .with_column("kappa", s.kappas().to_vec())?)
}

fn states_dataset(states: &BoundStateSet, raw: bool) -> Result<Dataset, Failure> {
    let mut d = Dataset::new().with_column("x", states.grid().points())?;
    for n in 0..states.len() {
        let (name, values) = if raw {
            (format!("psi_{}", n + 1), states.raw(n).to_vec())
        } else {
            (format!("psi_{}/c_{}", n + 1, n + 1), states.normalized(n))
        };
        d = d.with_column(name, values)?;
    }
    Ok(d)
}

/// `potential.csv`, `levels.csv`, `potential.dat`, optionally
/// `potential.svg` and `bound.csv`.
fn write_figure(
    dir: &Path,
    title: &str,
    r: &Reconstruction,
    energies: &[f64],
    cfg: &RunConfig,
    with_states: bool,
) -> Result<Vec<PathBuf>, Failure> {
    let profile = r.potential_profile(&cfg.grid, &cfg.policy, Execution::Parallel)?;
    let x = cfg.grid.points();
    let mut written = vec![
        Dataset::new()
            .with_column("x", x.clone())?
            .with_column("V", profile.values.clone())?
            .write_csv(&dir.join("potential.csv"))?,
        levels_dataset(&r.spectrum, energies)?.write_csv(&dir.join("levels.csv"))?,
    ];
    let figure = FigureData {
        title: title.to_string(),
        x,
        potential: profile.values,
        levels: energies.to_vec(),
    };
    let style = PlotStyle {
        svg: cfg.svg,
        ..PlotStyle::default()
    };
    written.extend(export_plot_data(&figure, &style, dir, "potential")?);
    if with_states {
        let states = r.bound_states(&cfg.grid, &cfg.policy, Execution::Parallel)?;
        let d = states_dataset(&states, cfg.raw)?;
        written.push(d.write_csv(&dir.join("bound.csv"))?);
        let path = dir.join("bound.dat");
        fs::write(&path, d.to_dat())?;
        written.push(path);
    }
    Ok(written)
}

fn potential(cfg: &RunConfig) -> Result<(), Failure> {
    let src = cfg.source()?;
    let r = Reconstruction::new(src.spectrum()?)?;
    let energies = src.stated_energies()?;
    let dir = out_dir(&cfg.out_dir)?;
    let written = write_figure(&dir, &src.label(), &r, &energies, cfg, false)?;
    report_written(&written);
    Ok(())
}

fn bound(cfg: &RunConfig) -> Result<(), Failure> {
    let src = cfg.source()?;
    let r = Reconstruction::new(src.spectrum()?)?;
    let states = r.bound_states(&cfg.grid, &cfg.policy, Execution::Parallel)?;
    let dir = out_dir(&cfg.out_dir)?;
    let d = states_dataset(&states, cfg.raw)?;
    let csv = d.write_csv(&dir.join("bound.csv"))?;
    let dat = dir.join("bound.dat");
    fs::write(&dat, d.to_dat())?;
    println!(
        "{} states, precision {}, condition estimate {:.3e}",
        states.len(),
        states.precision(),
        states.max_condition()
    );
    report_written(&[csv, dat]);
    Ok(())
}

fn scatter(cfg: &RunConfig) -> Result<(), Failure> {
    let src = cfg.source()?;
    if cfg.energies.is_empty() {
        return Err(Failure::Input("scatter needs at least one --energy".into()));
    }
    let r = Reconstruction::new(src.spectrum()?)?;
    let states = r.bound_states(&cfg.grid, &cfg.policy, Execution::Parallel)?;
    let dir = out_dir(&cfg.out_dir)?;
    let mut written = Vec::new();
    for &e in &cfg.energies {
        let st = scattering_state(&states, e)?;
        let d = Dataset::new()
            .with_column("x", st.grid.points())?
            .with_column("re", st.psi.iter().map(|z| z.re).collect())?
            .with_column("im", st.psi.iter().map(|z| z.im).collect())?
            .with_column("density", st.density())?;
        written.push(d.write_csv(&dir.join(format!("scatter_{}.csv", fmt_float(e))))?);
        println!(
            "E = {}: transmission {:.12}, reflection fit {:.3e}, tail bound {:.3e}",
            fmt_float(e),
            transmission(&st),
            reflection_fit(&st).reflection_ratio(),
            st.tail_error_bound()
        );
    }
    report_written(&written);
    Ok(())
}

fn verify(cfg: &RunConfig) -> Result<(), Failure> {
    let src = cfg.source()?;
    let mut report = full_verify(&src.spectrum()?, &cfg.grid, &cfg.policy)?;
    report.subject = format!("{} ({})", src.label(), report.subject);
    print!("{}", report.render_table());
    if let Some(path) = &cfg.report {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            out_dir(parent)?;
        }
        fs::write(path, report.to_json() + "\n")?;
        println!("wrote {}", path.display());
    }
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(Failure::Verification(failed.join(", ")))
    }
}

fn figures(cfg: &RunConfig) -> Result<(), Failure> {
    let root = out_dir(&cfg.out_dir)?;
    let mut written = Vec::new();
    for (dir_name, tag) in FIGURES {
        let kind: PresetKind = tag.parse()?;
        let r = Reconstruction::from_preset(&kind)?;
        let dir = out_dir(root.join(dir_name))?;
        let with_states = r.spectrum.len() <= FIGURE_WAVE_STATES;
        written.extend(write_figure(&dir, &kind.describe(), &r, &kind.energies()?, cfg, with_states)?);
    }
    let r = Reconstruction::new(Spectrum::from_kappas(&[1.0])?)?;
    let dir = out_dir(root.join("oracle_n1"))?;
    written.extend(write_figure(&dir, "single state, kappa = 1", &r, &[-1.0], cfg, true)?);
    let oracle = oracle_n1(1.0, &cfg.grid, &ORACLE_ENERGIES);
    let path = dir.join("oracle.json");
    fs::write(&path, oracle.to_json() + "\n")?;
    written.push(path);
    report_written(&written);
    if oracle.passed {
        Ok(())
    } else {
        Err(Failure::Verification(format!("single-state oracle\n{}", oracle.render_table())))
    }
}

pub fn presets_table() -> Result<String, Failure> {
    let mut out = String::new();
    for tag in PresetKind::TAGS {
        let kind: PresetKind = tag.parse()?;
        let energies: Vec<String> = kind.energies()?.into_iter().map(fmt_float).collect();
        out.push_str(&format!("{tag:<10} {}\n           E = [{}]\n", kind.describe(), energies.join(", ")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_listed() {
        let t = presets_table().unwrap();
        for tag in PresetKind::TAGS {
            assert!(t.contains(tag));
        }
        assert!(t.contains("-42, -23, -16, -15, -8, -4"));
    }

    #[test]
    fn levels_keep_stated_values() {
        let s = PresetKind::isw().spectrum().unwrap();
        let d = levels_dataset(&s, &PresetKind::isw().energies().unwrap()).unwrap();
        assert_eq!(d.column("energy").unwrap(), &[-25.0, -22.0, -17.0, -10.0]);
        assert!(d.to_csv().starts_with("n,energy,kappa\n1,-25,5\n"));
    }
}
