//! Staged output files.
//!
//! Every file is first written next to its destination as `.<name>.tmp`;
//! `commit` renames them all once everything has been written. Dropping a
//! `Staged` without committing removes the temporaries.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::CliError;

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NaN".to_string(), fmt_f64)
}

pub struct Staged {
    dir: PathBuf,
    pending: Vec<(PathBuf, PathBuf)>,
}

fn io_err(context: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: context.to_path_buf(),
        source,
    }
}

impl Staged {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            pending: Vec::new(),
        })
    }

    pub fn write(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
    ) -> Result<(), CliError> {
        let tmp = self.dir.join(format!(".{name}.tmp"));
        let target = self.dir.join(name);
        let file = File::create(&tmp).map_err(io_err(&tmp))?;
        self.pending.push((tmp.clone(), target));
        let mut w = BufWriter::new(file);
        body(&mut w).and_then(|_| w.flush()).map_err(io_err(&tmp))
    }

    pub fn commit(mut self) -> Result<Vec<PathBuf>, CliError> {
        let mut written = Vec::new();
        for (tmp, target) in std::mem::take(&mut self.pending) {
            fs::rename(&tmp, &target).map_err(io_err(&target))?;
            written.push(target);
        }
        Ok(written)
    }
}

impl Drop for Staged {
    fn drop(&mut self) {
        for (tmp, _) in &self.pending {
            let _ = fs::remove_file(tmp);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e0");
        assert_eq!(fmt_opt(None), "NaN");
        let x = 0.123_456_789_012_345_68_f64;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn uncommitted_files_are_removed() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut s = Staged::new(dir.path()).unwrap();
            s.write("a.csv", |w| writeln!(w, "x")).unwrap();
        }
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);

        let mut s = Staged::new(dir.path()).unwrap();
        s.write("a.csv", |w| writeln!(w, "x")).unwrap();
        let written = s.commit().unwrap();
        assert_eq!(written, vec![dir.path().join("a.csv")]);
        assert_eq!(fs::read_to_string(&written[0]).unwrap(), "x\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
