use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use moment_core::MomentSequence;

use crate::commands::Failure;

pub fn read_moments(path: &Path) -> Result<MomentSequence, Failure> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(Failure::io)?;
        s
    } else {
        fs::read_to_string(path).map_err(Failure::io)?
    };
    Ok(MomentSequence::from_json_str(&text)?)
}

/// Writes through a sibling temporary file and a rename, so readers never
/// see a partial document.
pub fn write_output(path: &Path, text: &str) -> Result<(), Failure> {
    if path.as_os_str() == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes()).map_err(Failure::io)?;
        return out.flush().map_err(Failure::io);
    }
    let name = path.file_name().ok_or_else(|| Failure::Usage(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, text).map_err(Failure::io)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Failure::io(e)
    })
}
