//! Provenance headers and file emission.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A named output with its body, excluding the provenance header.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub body: String,
}

impl OutputFile {
    pub fn new(name: impl Into<String>, body: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            body: body.into(),
        }
    }
}

/// `#` lines naming the tool version, the command line and the seed,
/// followed by any extra lines.
pub fn header(command_line: &str, seed: u64, extra: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# gda {VERSION}");
    let _ = writeln!(s, "# command: {command_line}");
    let _ = writeln!(s, "# seed: {seed}");
    for line in extra {
        let _ = writeln!(s, "# {line}");
    }
    s
}

/// `gda` followed by the arguments, quoted where they contain spaces.
pub fn command_line(args: &[String]) -> String {
    let mut s = String::from("gda");
    for a in args.iter().skip(1) {
        s.push(' ');
        if a.contains(char::is_whitespace) || a.is_empty() {
            let _ = write!(s, "{a:?}");
        } else {
            s.push_str(a);
        }
    }
    s
}

/// Writes each file into `dir`, header first, in order.
pub fn write_all(dir: &Path, header: &str, files: &[OutputFile]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    files
        .iter()
        .map(|f| {
            let path = dir.join(&f.name);
            std::fs::write(&path, format!("{header}{}", f.body))
                .with_context(|| format!("writing {}", path.display()))?;
            Ok(path)
        })
        .collect()
}

pub fn print_all(header: &str, files: &[OutputFile]) {
    for (i, f) in files.iter().enumerate() {
        if files.len() > 1 {
            if i > 0 {
                println!();
            }
            println!("# file: {}", f.name);
        }
        print!("{header}{}", f.body);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_lines() {
        let h = header("gda fig1", 3, &["extra: x".into()]);
        let lines: Vec<&str> = h.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines.iter().all(|l| l.starts_with('#')));
        assert_eq!(lines[2], "# seed: 3");
    }

    #[test]
    fn command_line_quotes_spaces() {
        let args: Vec<String> = ["/x/gda", "run", "--out", "a b"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(command_line(&args), "gda run --out \"a b\"");
    }
}
