//! Turns a finished run directory into per-figure CSVs and optional SVGs
//! under `<dir>/figures/`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{ApproxForm, Method};
use crate::error::{Error, Result};
use crate::experiment::{family_name, Manifest, MetricRow, Variant};
use crate::mcmc::Chain;
use crate::metrics::marginal_hist;
use crate::svg::{Heatmap, LinePlot, Series};

fn need(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::MissingArtifact(format!(
            "{} not found; run the experiment first",
            path.display()
        )))
    }
}

fn read_table(path: &Path) -> Result<Vec<Vec<f64>>> {
    need(path)?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    rdr.records()
        .map(|r| {
            r?.iter()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|e| Error::input(format!("{}: bad value {v:?}: {e}", path.display())))
                })
                .collect()
        })
        .collect()
}

fn read_chain(path: &Path) -> Result<Vec<Vec<f64>>> {
    need(path)?;
    Chain::read_samples(std::io::BufReader::new(fs::File::open(path)?))
}

struct Bundle {
    dir: PathBuf,
    svg: bool,
    files: Vec<PathBuf>,
}

impl Bundle {
    fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_path(self.dir.join(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.files.push(PathBuf::from("figures").join(name));
        Ok(())
    }

    fn svg(&mut self, name: &str, body: String) -> Result<()> {
        if self.svg {
            fs::write(self.dir.join(name), body)?;
            self.files.push(PathBuf::from("figures").join(name));
        }
        Ok(())
    }
}

fn series_key(v: &Variant, form: &str, x_axis: &str) -> String {
    let mut k = format!("{} {form}", family_name(v.family));
    if x_axis != "n" {
        k += &format!(" N={}", v.n);
    }
    if v.n_bar > 0 {
        if x_axis != "n_bar" {
            k += &format!(" N̄={}", v.n_bar);
        }
        if x_axis != "d_f" {
            k += &format!(" d_f={}", v.d_f);
        }
    }
    k
}

fn x_value(v: &Variant, x_axis: &str) -> f64 {
    match x_axis {
        "d_f" => v.d_f as f64,
        "n_bar" => v.n_bar as f64,
        _ => v.n as f64,
    }
}

fn sweep_axis(vs: &[Variant]) -> &'static str {
    let distinct = |f: fn(&Variant) -> usize| {
        let mut x: Vec<usize> = vs.iter().map(f).collect();
        x.sort_unstable();
        x.dedup();
        x.len()
    };
    if distinct(|v| v.n) > 1 {
        "n"
    } else if distinct(|v| v.d_f) > 1 {
        "d_f"
    } else if distinct(|v| v.n_bar) > 1 {
        "n_bar"
    } else {
        "n"
    }
}

fn metric(rows: &[MetricRow], variant: &str, form: &str, name: &str) -> Option<f64> {
    rows.iter()
        .find(|r| r.variant == variant && r.form == form && r.metric == name)
        .map(|r| r.value)
}

fn variant_cols(v: &Variant) -> Vec<String> {
    vec![
        v.id.clone(),
        family_name(v.family).into(),
        v.n.to_string(),
        v.n_bar.to_string(),
        v.d_f.to_string(),
    ]
}

fn header(extra: &[&str]) -> Vec<String> {
    ["variant", "family", "n", "n_bar", "d_f"]
        .iter()
        .chain(extra)
        .map(|s| s.to_string())
        .collect()
}

/// Line plot of a per-variant quantity against the sweep parameter.
fn sweep_plot(m: &Manifest, title: &str, y_label: &str, log_y: bool, value: impl Fn(&Variant, Option<ApproxForm>) -> Option<f64>, per_form: bool) -> LinePlot {
    let x_axis = sweep_axis(&m.variants);
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let forms: Vec<Option<ApproxForm>> = if per_form { m.forms.iter().map(|f| Some(*f)).collect() } else { vec![None] };
    for v in &m.variants {
        for f in &forms {
            if let Some(y) = value(v, *f) {
                let name = series_key(v, f.map_or("", |f| f.as_str()), x_axis);
                series.entry(name.trim().to_string()).or_default().push((x_value(v, x_axis), y));
            }
        }
    }
    LinePlot {
        title: title.into(),
        x_label: match x_axis {
            "d_f" => "d_f",
            "n_bar" => "N̄",
            _ => "N",
        }
        .into(),
        y_label: y_label.into(),
        log_y,
        markers: true,
        series: series
            .into_iter()
            .map(|(name, mut points)| {
                points.sort_by(|a, b| a.0.total_cmp(&b.0));
                Series {
                    dashed: name.contains("marginal"),
                    name,
                    points,
                }
            })
            .collect(),
    }
}

/// Writes the figure bundle for the run in `dir` and returns the files
/// created, relative to `dir`. Output is a pure function of the run
/// artifacts.
pub fn report(dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    let manifest_path = dir.join("manifest.json");
    need(&manifest_path)?;
    let m: Manifest = serde_json::from_str(&fs::read_to_string(&manifest_path)?)?;
    let metrics_path = dir.join("metrics.csv");
    need(&metrics_path)?;
    let rows: Vec<MetricRow> = csv::Reader::from_path(&metrics_path)?
        .deserialize()
        .collect::<std::result::Result<_, _>>()?;
    let fig = dir.join("figures");
    fs::create_dir_all(&fig)?;
    let mut b = Bundle {
        dir: fig,
        svg,
        files: Vec::new(),
    };

    // Emulator variance, shared by every method.
    let av: Vec<Vec<String>> = m
        .variants
        .iter()
        .filter_map(|v| {
            metric(&rows, &v.id, "", "avg_variance").map(|x| {
                let mut r = variant_cols(v);
                r.push(x.to_string());
                r
            })
        })
        .collect();
    b.csv("avg_variance.csv", &header(&["avg_variance"]), &av)?;
    b.svg(
        "avg_variance.svg",
        sweep_plot(&m, "Average emulator variance", "avg variance", true, |v, _| metric(&rows, &v.id, "", "avg_variance"), false).render(),
    )?;

    match (m.method, m.d_theta) {
        (Method::Grid, d) => {
            if m.has_reference {
                let mut hr = Vec::new();
                for v in &m.variants {
                    for f in &m.forms {
                        if let Some(h) = metric(&rows, &v.id, f.as_str(), "hellinger") {
                            let mut r = variant_cols(v);
                            r.extend([f.as_str().to_string(), h.to_string()]);
                            hr.push(r);
                        }
                    }
                }
                b.csv("hellinger.csv", &header(&["form", "hellinger"]), &hr)?;
                b.svg(
                    "hellinger.svg",
                    sweep_plot(&m, "Hellinger distance to the reference", "Hellinger", false, |v, f| {
                        metric(&rows, &v.id, f.unwrap().as_str(), "hellinger")
                    }, true)
                    .render(),
                )?;
            }
            if d == 1 {
                density_curves(dir, &m, &mut b)?;
            } else {
                contours(dir, &m, &mut b)?;
            }
        }
        (Method::Mala, _) => {
            marginals(dir, &m, &mut b)?;
            let mut sr = Vec::new();
            let mut ids: Vec<(String, String)> = Vec::new();
            if m.has_reference {
                ids.push(("reference".into(), String::new()));
            }
            for v in &m.variants {
                for f in &m.forms {
                    ids.push((v.id.clone(), f.as_str().into()));
                }
            }
            for (id, form) in &ids {
                for k in 0..m.d_theta {
                    let g = |name: &str| metric(&rows, id, form, &format!("{name}_{}", k + 1)).map_or(String::new(), |x| x.to_string());
                    sr.push(vec![
                        id.clone(),
                        form.clone(),
                        (k + 1).to_string(),
                        g("mean"),
                        g("sd"),
                        g("ess"),
                        m.theta_true[k].to_string(),
                    ]);
                }
            }
            let h: Vec<String> = ["variant", "form", "coord", "mean", "sd", "ess", "theta_true"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            b.csv("sample_summary.csv", &h, &sr)?;
        }
    }
    b.files.sort();
    Ok(b.files)
}

fn density_curves(dir: &Path, m: &Manifest, b: &mut Bundle) -> Result<()> {
    let reference = if m.has_reference {
        Some(read_table(&dir.join("reference/density.csv"))?)
    } else {
        None
    };
    for f in &m.forms {
        let mut cols: Vec<(String, Vec<Vec<f64>>)> = Vec::new();
        if let Some(r) = &reference {
            cols.push(("reference".into(), r.clone()));
        }
        for v in &m.variants {
            cols.push((v.id.clone(), read_table(&dir.join("variants").join(&v.id).join(f.as_str()).join("density.csv"))?));
        }
        let n = cols[0].1.len();
        if cols.iter().any(|c| c.1.len() != n) {
            return Err(Error::input("density files have different grids"));
        }
        let mut header = vec!["theta".to_string()];
        header.extend(cols.iter().map(|c| c.0.clone()));
        let rows: Vec<Vec<String>> = (0..n)
            .map(|i| {
                let mut r = vec![cols[0].1[i][0].to_string()];
                r.extend(cols.iter().map(|c| c.1[i][1].to_string()));
                r
            })
            .collect();
        b.csv(&format!("densities_{}.csv", f.as_str()), &header, &rows)?;
        let plot = LinePlot {
            title: format!("{}-based posteriors", f.as_str()),
            x_label: "θ".into(),
            y_label: "density".into(),
            log_y: false,
            markers: false,
            series: cols
                .iter()
                .map(|(name, t)| Series {
                    name: name.clone(),
                    points: t.iter().map(|r| (r[0], r[1])).collect(),
                    dashed: name == "reference",
                })
                .collect(),
        };
        b.svg(&format!("densities_{}.svg", f.as_str()), plot.render())?;
    }
    Ok(())
}

fn contours(dir: &Path, m: &Manifest, b: &mut Bundle) -> Result<()> {
    let mut sources: Vec<(String, PathBuf)> = Vec::new();
    if m.has_reference {
        sources.push(("reference".into(), dir.join("reference/density.csv")));
    }
    for v in &m.variants {
        for f in &m.forms {
            sources.push((
                format!("{}_{}", v.id, f.as_str()),
                dir.join("variants").join(&v.id).join(f.as_str()).join("density.csv"),
            ));
        }
    }
    for (name, path) in sources {
        let t = read_table(&path)?;
        let mut xs: Vec<f64> = t.iter().map(|r| r[0]).collect();
        xs.dedup();
        let ny = t.len() / xs.len().max(1);
        if xs.len() * ny != t.len() {
            return Err(Error::input(format!("{} is not a rectangular grid", path.display())));
        }
        let ys: Vec<f64> = t[..ny].iter().map(|r| r[1]).collect();
        let header: Vec<String> = ["theta1", "theta2", "density"].iter().map(|s| s.to_string()).collect();
        let rows: Vec<Vec<String>> = t.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
        b.csv(&format!("contour_{name}.csv"), &header, &rows)?;
        let hm = Heatmap {
            title: name.clone(),
            x: xs,
            y: ys,
            values: t.iter().map(|r| r[2]).collect(),
            marker: Some((m.theta_true[0], m.theta_true[1])),
        };
        b.svg(&format!("contour_{name}.svg"), hm.render())?;
    }
    Ok(())
}

fn marginals(dir: &Path, m: &Manifest, b: &mut Bundle) -> Result<()> {
    let reference = if m.has_reference {
        Some(read_chain(&dir.join("reference/chain.csv"))?)
    } else {
        None
    };
    for f in &m.forms {
        let mut chains: Vec<(String, Vec<Vec<f64>>)> = Vec::new();
        if let Some(r) = &reference {
            chains.push(("reference".into(), r.clone()));
        }
        for v in &m.variants {
            chains.push((v.id.clone(), read_chain(&dir.join("variants").join(&v.id).join(f.as_str()).join("chain.csv"))?));
        }
        for k in 0..m.d_theta {
            let hists = chains
                .iter()
                .map(|(name, s)| Ok((name.clone(), marginal_hist(s, k, m.histogram_bins, m.lower[k], m.upper[k])?)))
                .collect::<Result<Vec<_>>>()?;
            let edges = &hists[0].1.edges;
            let mut header = vec!["bin_lo".to_string(), "bin_hi".to_string()];
            header.extend(hists.iter().map(|h| h.0.clone()));
            let rows: Vec<Vec<String>> = (0..m.histogram_bins)
                .map(|i| {
                    let mut r = vec![edges[i].to_string(), edges[i + 1].to_string()];
                    r.extend(hists.iter().map(|h| h.1.density[i].to_string()));
                    r
                })
                .collect();
            let stem = format!("marginals_{}_theta{}", f.as_str(), k + 1);
            b.csv(&format!("{stem}.csv"), &header, &rows)?;
            let plot = LinePlot {
                title: format!("θ{} marginal, {}-based", k + 1, f.as_str()),
                x_label: format!("θ{}", k + 1),
                y_label: "density".into(),
                log_y: false,
                markers: false,
                series: hists
                    .iter()
                    .map(|(name, h)| Series {
                        name: name.clone(),
                        points: (0..h.density.len())
                            .flat_map(|i| [(h.edges[i], h.density[i]), (h.edges[i + 1], h.density[i])])
                            .collect(),
                        dashed: name == "reference",
                    })
                    .collect(),
            };
            b.svg(&format!("{stem}.svg"), plot.render())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_run_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        match report(dir.path(), false) {
            Err(Error::MissingArtifact(msg)) => assert!(msg.contains("manifest.json")),
            other => panic!("{other:?}"),
        }
    }
}
