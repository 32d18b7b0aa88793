//! Image file input and output.
//!
//! Frames are read from binary PGM (P5) or PNG files; colour PNGs are reduced
//! to luminance on load. Sequences are directories of image files processed
//! in ascending filename order, so zero-padded frame numbers sort correctly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::frame::GrayFrame;
use crate::motion::BackgroundModel;

/// Reads a binary (P5) PGM file with maxval <= 255.
pub fn read_pgm(path: &Path) -> Result<GrayFrame> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&data).map_err(|msg| Error::parse(path.display().to_string(), msg))
}

fn parse_pgm(data: &[u8]) -> std::result::Result<GrayFrame, String> {
    let mut pos = 0usize;

    // Header tokens are separated by whitespace; '#' starts a comment that
    // runs to end of line.
    let mut next_token = |data: &[u8]| -> std::result::Result<String, String> {
        loop {
            while pos < data.len() && data[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < data.len() && data[pos] == b'#' {
                while pos < data.len() && data[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("unexpected end of header".into());
        }
        Ok(String::from_utf8_lossy(&data[start..pos]).into_owned())
    };

    let magic = next_token(data)?;
    if magic != "P5" {
        return Err(format!("expected P5 magic, got {magic:?}"));
    }
    let width: usize = next_token(data)?.parse().map_err(|_| "bad width")?;
    let height: usize = next_token(data)?.parse().map_err(|_| "bad height")?;
    let maxval: usize = next_token(data)?.parse().map_err(|_| "bad maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported maxval {maxval}"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let need = width.checked_mul(height).ok_or("image too large")?;
    if pos + need > data.len() {
        return Err(format!(
            "raster truncated: need {need} bytes, have {}",
            data.len().saturating_sub(pos)
        ));
    }
    GrayFrame::new(width, height, data[pos..pos + need].to_vec()).map_err(|e| e.to_string())
}

/// Writes a binary (P5) PGM file.
pub fn write_pgm(path: &Path, frame: &GrayFrame) -> Result<()> {
    let mut out = Vec::with_capacity(frame.pixels().len() + 32);
    write!(out, "P5\n{} {}\n255\n", frame.width(), frame.height()).expect("vec write");
    out.extend_from_slice(frame.pixels());
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a PNG file, converting colour data to luminance.
pub fn read_png(path: &Path) -> Result<GrayFrame> {
    let img = image::open(path)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    let rgb = img.to_rgb8();
    GrayFrame::from_rgb(rgb.width() as usize, rgb.height() as usize, rgb.as_raw())
}

/// Writes a grayscale PNG file.
pub fn write_png(path: &Path, frame: &GrayFrame) -> Result<()> {
    image::save_buffer(
        path,
        frame.pixels(),
        frame.width() as u32,
        frame.height() as u32,
        image::ColorType::L8,
    )
    .map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

/// Reads a frame, dispatching on the file extension (.pgm or .png).
pub fn read_frame(path: &Path) -> Result<GrayFrame> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("pgm") => read_pgm(path),
        Some(ext) if ext.eq_ignore_ascii_case("png") => read_png(path),
        _ => Err(Error::Data(format!(
            "{}: unsupported image extension (expected .pgm or .png)",
            path.display()
        ))),
    }
}

/// Lists the image files of a sequence directory in ascending filename order.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some(ext) if ext.eq_ignore_ascii_case("pgm") || ext.eq_ignore_ascii_case("png")
            )
        })
        .collect();
    if paths.is_empty() {
        return Err(Error::Data(format!(
            "{}: no .pgm or .png frames found",
            dir.display()
        )));
    }
    paths.sort();
    Ok(paths)
}

/// Persists a background model as `<path>` (PGM) plus a sidecar text file
/// `<path with .tolerance extension>` holding one `tolerance=<int>` line.
pub fn save_background(path: &Path, model: &BackgroundModel) -> Result<()> {
    write_pgm(path, model.mean())?;
    let sidecar = path.with_extension("tolerance");
    fs::write(&sidecar, format!("tolerance={}\n", model.tolerance()))
        .map_err(|e| Error::io(sidecar, e))
}

/// Loads a background model persisted by [`save_background`].
pub fn load_background(path: &Path) -> Result<BackgroundModel> {
    let mean = read_pgm(path)?;
    let sidecar = path.with_extension("tolerance");
    let text = fs::read_to_string(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
    let mut tolerance = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('=') {
            Some((key, value)) if key.trim() == "tolerance" => {
                let v: u32 = value.trim().parse().map_err(|_| {
                    Error::parse(sidecar.display().to_string(), format!("bad tolerance {value:?}"))
                })?;
                tolerance = Some(v);
            }
            _ => {
                return Err(Error::parse(
                    sidecar.display().to_string(),
                    format!("unexpected line {line:?}"),
                ))
            }
        }
    }
    let tolerance = tolerance.ok_or_else(|| {
        Error::parse(sidecar.display().to_string(), "missing tolerance line")
    })?;
    Ok(BackgroundModel::from_parts(mean, tolerance))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frame.pgm");
        let frame = GrayFrame::new(3, 2, vec![0, 60, 120, 180, 240, 255]).unwrap();
        write_pgm(&path, &frame).unwrap();
        assert_eq!(read_pgm(&path).unwrap(), frame);
    }

    #[test]
    fn pgm_parses_comments() {
        let data = b"P5 # magic\n# a comment line\n2 2\n255\n\x01\x02\x03\x04";
        let frame = parse_pgm(data).unwrap();
        assert_eq!(frame.pixels(), &[1, 2, 3, 4]);
    }

    #[test]
    fn pgm_rejects_truncation_and_magic() {
        assert!(parse_pgm(b"P2\n2 2\n255\n....").is_err());
        assert!(parse_pgm(b"P5\n2 2\n255\n\x01\x02").is_err());
        assert!(parse_pgm(b"P5\n2 2\n70000\n\x01\x02\x03\x04").is_err());
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frame.png");
        let frame = GrayFrame::new(2, 2, vec![10, 20, 30, 40]).unwrap();
        write_png(&path, &frame).unwrap();
        assert_eq!(read_png(&path).unwrap(), frame);
    }

    #[test]
    fn frame_listing_sorts_by_name() {
        let dir = tempfile::tempdir().unwrap();
        let frame = GrayFrame::filled(2, 2, 7).unwrap();
        for name in ["frame_0002.pgm", "frame_0000.pgm", "frame_0001.pgm"] {
            write_pgm(&dir.path().join(name), &frame).unwrap();
        }
        fs::write(dir.path().join("notes.txt"), "skip me").unwrap();
        let names: Vec<String> = list_frames(dir.path())
            .unwrap()
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, vec!["frame_0000.pgm", "frame_0001.pgm", "frame_0002.pgm"]);
    }
}
