use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;

use kwidth_core::table::{json_string, Cell, Table};

use crate::args::{Format, OutputArgs};
use crate::error::CliError;

/// Everything one command produces. The first table is the main one.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub command: &'static str,
    pub config: Vec<(String, Cell)>,
    pub tables: Vec<(String, Table)>,
    /// Files written verbatim alongside the tables.
    pub documents: Vec<(String, String)>,
    pub summary: Vec<(String, Cell)>,
}

impl Artifacts {
    pub fn new(command: &'static str) -> Self {
        Artifacts {
            command,
            ..Artifacts::default()
        }
    }

    pub fn config(&mut self, key: &str, value: impl Into<Cell>) {
        self.config.push((key.to_string(), value.into()));
    }

    pub fn summary(&mut self, key: &str, value: impl Into<Cell>) {
        self.summary.push((key.to_string(), value.into()));
    }

    fn meta(&self) -> Vec<(String, Cell)> {
        let mut meta = vec![
            ("command".to_string(), Cell::from(self.command)),
            ("version".to_string(), Cell::from(env!("CARGO_PKG_VERSION"))),
        ];
        meta.extend(self.config.iter().cloned());
        meta
    }

    fn render(&self, table: &Table, format: Format) -> String {
        match format {
            Format::Csv => table.to_csv(),
            Format::Json => {
                let mut text = table.to_json(&self.meta());
                text.push('\n');
                text
            }
        }
    }

    fn sidecar(&self, files: &[String]) -> String {
        let object = |pairs: &[(String, Cell)]| {
            let body: Vec<String> = pairs
                .iter()
                .map(|(k, v)| format!("{}:{}", json_string(k), v.json()))
                .collect();
            format!("{{{}}}", body.join(","))
        };
        let names: Vec<String> = files.iter().map(|f| json_string(f)).collect();
        format!(
            "{{\"command\":{},\"version\":{},\"config\":{},\"summary\":{},\"files\":[{}]}}\n",
            json_string(self.command),
            json_string(env!("CARGO_PKG_VERSION")),
            object(&self.config),
            object(&self.summary),
            names.join(",")
        )
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes every artifact into `--out`, or prints the main table to stdout.
pub fn emit(artifacts: &Artifacts, output: &OutputArgs) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut stdout = stdout.lock();
    let Some(dir) = &output.out else {
        if let Some((_, table)) = artifacts.tables.first() {
            let text = artifacts.render(table, output.format);
            stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })?;
        }
        for (key, value) in &artifacts.summary {
            eprintln!("{key} = {}", value.csv());
        }
        return Ok(());
    };
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let mut files = Vec::new();
    for (name, table) in &artifacts.tables {
        let file = format!("{name}.{}", output.format.extension());
        write_file(&dir.join(&file), &artifacts.render(table, output.format))?;
        files.push(file);
    }
    for (file, contents) in &artifacts.documents {
        write_file(&dir.join(file), contents)?;
        files.push(file.clone());
    }
    let meta_file = format!("{}.meta.json", artifacts.command);
    write_file(&dir.join(&meta_file), &artifacts.sidecar(&files))?;
    files.push(meta_file);
    for file in &files {
        let path = dir.join(file);
        info!("wrote {}", path.display());
        let _ = writeln!(stdout, "{}", path.display());
    }
    for (key, value) in &artifacts.summary {
        eprintln!("{key} = {}", value.csv());
    }
    Ok(())
}
