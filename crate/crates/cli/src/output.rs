//! Deterministic CSV/JSON writers. Identical inputs produce byte-identical
//! files; wall-clock time appears only in the manifest.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use biphoton_core::pairgen::JsaGrid;
use serde::Serialize;

/// Format one numeric cell: fixed scientific notation so output is
/// deterministic and plot-ready at any magnitude.
pub fn cell(value: f64) -> String {
    if value == 0.0 {
        "0".to_string()
    } else if value.is_infinite() {
        if value > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{value:.9e}")
    }
}

/// CSV file with `# key = value` comment lines followed by a header row.
pub struct CsvFile {
    writer: BufWriter<File>,
    path: PathBuf,
}

impl CsvFile {
    pub fn create(
        path: &Path,
        comments: &[(&str, String)],
        columns: &[&str],
    ) -> io::Result<Self> {
        let mut writer = BufWriter::new(File::create(path)?);
        for (key, value) in comments {
            writeln!(writer, "# {key} = {value}")?;
        }
        writeln!(writer, "{}", columns.join(","))?;
        Ok(Self { writer, path: path.to_path_buf() })
    }

    pub fn row(&mut self, values: &[String]) -> io::Result<()> {
        writeln!(self.writer, "{}", values.join(","))
    }

    pub fn finish(mut self) -> io::Result<PathBuf> {
        self.writer.flush()?;
        Ok(self.path)
    }
}

/// Pretty-printed JSON document.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<PathBuf> {
    let mut writer = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut writer, value)?;
    writeln!(writer)?;
    writer.flush()?;
    Ok(path.to_path_buf())
}

/// Dense |f(ω₁, ω₂)| matrix with the axes recorded in the header comments:
/// rows run over ω₁, columns over ω₂.
pub fn write_jsa_csv(path: &Path, jsa: &JsaGrid, config_sha256: &str) -> io::Result<PathBuf> {
    let mut writer = BufWriter::new(File::create(path)?);
    writeln!(writer, "# config_sha256 = {config_sha256}")?;
    writeln!(writer, "# matrix = |f(omega1, omega2)|, row-major over omega1")?;
    let axis = |name: &str, pts: &[f64]| -> String {
        format!(
            "# {name}: start_rad_s = {}, step_rad_s = {}, n = {}",
            cell(pts[0]),
            cell(pts[1] - pts[0]),
            pts.len()
        )
    };
    writeln!(writer, "{}", axis("omega1", &jsa.omega1_rad_s))?;
    writeln!(writer, "{}", axis("omega2", &jsa.omega2_rad_s))?;
    let n2 = jsa.omega2_rad_s.len();
    for i in 0..jsa.omega1_rad_s.len() {
        let row: Vec<String> = (0..n2).map(|j| cell(jsa.value(i, j).norm())).collect();
        writeln!(writer, "{}", row.join(","))?;
    }
    writer.flush()?;
    Ok(path.to_path_buf())
}
