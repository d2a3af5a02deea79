//! File formats: netpbm frames, raw frame stacks, event and activity CSV,
//! heatmap export, grid CSV and DVS spike scripts.

use std::fmt::{Display, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::retina::{BcGrid, MpOutput};
use crate::stimulus::{rgb_to_luma, DvsEvent, EventVolume, FrameSequence, Polarity};

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Netpbm header tokenizer: whitespace separated, `#` comments to EOL.
struct PnmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PnmCursor<'a> {
    fn token(&mut self) -> Option<&'a str> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.bytes[start..self.pos]).ok())?
    }

    fn number(&mut self, path: &Path, what: &str) -> Result<usize> {
        self.token()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::format(path, format!("missing or invalid {what}")))
    }
}

/// Reads an 8-bit netpbm image as grayscale. Accepts graymaps (`P2`, `P5`)
/// and pixmaps (`P3`, `P6`, converted with luma weights).
pub fn read_pnm(path: &Path) -> Result<Grid<u8>> {
    let bytes = read_bytes(path)?;
    let mut cur = PnmCursor {
        bytes: &bytes,
        pos: 0,
    };
    let magic = cur.token().unwrap_or_default().to_owned();
    let channels = match magic.as_str() {
        "P2" | "P5" => 1,
        "P3" | "P6" => 3,
        other => {
            return Err(Error::format(
                path,
                format!("unsupported netpbm magic {other:?}"),
            ))
        }
    };
    let cols = cur.number(path, "width")?;
    let rows = cur.number(path, "height")?;
    let maxval = cur.number(path, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::format(path, format!("maxval {maxval} is not 8-bit")));
    }
    let n = rows * cols * channels;
    let samples: Vec<u8> = if magic == "P5" || magic == "P6" {
        // exactly one whitespace byte separates the header from the raster
        let start = cur.pos + 1;
        let raster = bytes
            .get(start..start + n)
            .ok_or_else(|| Error::format(path, "raster shorter than header promises"))?;
        raster.to_vec()
    } else {
        (0..n)
            .map(|_| {
                cur.token()
                    .and_then(|t| t.parse::<u16>().ok())
                    .filter(|&v| usize::from(v) <= maxval)
                    .map(|v| v as u8)
                    .ok_or_else(|| Error::format(path, "bad ascii sample"))
            })
            .collect::<Result<_>>()?
    };
    let scale = |v: u8| -> u8 {
        if maxval == 255 {
            v
        } else {
            ((f64::from(v) * 255.0 / maxval as f64).round()) as u8
        }
    };
    let gray = if channels == 1 {
        samples.into_iter().map(scale).collect()
    } else {
        samples
            .chunks_exact(3)
            .map(|p| rgb_to_luma(scale(p[0]), scale(p[1]), scale(p[2])))
            .collect()
    };
    Ok(Grid::from_vec(rows, cols, gray))
}

/// Writes a binary (`P5`) graymap.
pub fn write_pgm(path: &Path, img: &Grid<u8>) -> Result<()> {
    let mut out = format!("P5\n{} {}\n255\n", img.cols(), img.rows()).into_bytes();
    out.extend_from_slice(img.as_slice());
    write_file(path, out)
}

fn frame_number(p: &Path) -> Option<u64> {
    let stem = p.file_stem()?.to_str()?;
    let digits: String = stem
        .chars()
        .rev()
        .skip_while(|c| !c.is_ascii_digit())
        .take_while(|c| c.is_ascii_digit())
        .collect();
    digits.chars().rev().collect::<String>().parse().ok()
}

/// Loads numbered netpbm files from a directory, ordered by the last run
/// of digits in each file name.
pub fn read_frame_dir(dir: &Path, fps: f64) -> Result<FrameSequence> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some("pgm" | "ppm" | "pnm")) {
            files.push(path);
        }
    }
    files.sort_by(|a, b| (frame_number(a), a).cmp(&(frame_number(b), b)));
    if files.is_empty() {
        return Err(Error::format(dir, "no netpbm frames found"));
    }
    let frames = files
        .iter()
        .map(|p| read_pnm(p))
        .collect::<Result<Vec<_>>>()?;
    FrameSequence::new(frames, fps)
}

/// Raw frame stack: an ASCII `H W T` line, then `T` row-major `u8` frames.
pub fn read_raw_frames(path: &Path, fps: f64) -> Result<FrameSequence> {
    let bytes = read_bytes(path)?;
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::format(path, "missing header line"))?;
    let header = std::str::from_utf8(&bytes[..nl])
        .map_err(|_| Error::format(path, "header is not ASCII"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::format(path, format!("bad header token {t:?}")))
        })
        .collect::<Result<_>>()?;
    let [rows, cols, steps] = dims[..] else {
        return Err(Error::format(path, "header must be `H W T`"));
    };
    let body = &bytes[nl + 1..];
    let frame_len = rows * cols;
    if body.len() != frame_len * steps {
        return Err(Error::format(
            path,
            format!(
                "expected {} frame bytes, found {}",
                frame_len * steps,
                body.len()
            ),
        ));
    }
    let frames = body
        .chunks_exact(frame_len.max(1))
        .take(steps)
        .map(|c| Grid::from_vec(rows, cols, c.to_vec()))
        .collect();
    FrameSequence::new(frames, fps)
}

pub fn write_raw_frames(path: &Path, seq: &FrameSequence) -> Result<()> {
    let (rows, cols) = seq.dims();
    let mut out = format!("{rows} {cols} {}\n", seq.len()).into_bytes();
    for f in seq.frames() {
        out.extend_from_slice(f.as_slice());
    }
    write_file(path, out)
}

/// A directory of netpbm frames or a raw frame stack.
pub fn load_frames(path: &Path, fps: f64) -> Result<FrameSequence> {
    let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if meta.is_dir() {
        read_frame_dir(path, fps)
    } else {
        read_raw_frames(path, fps)
    }
}

/// Event CSV, `t,x,y,polarity` with polarity `1` / `-1`, sorted by `t`,
/// then `y`, then `x`.
pub fn events_to_csv(events: &EventVolume) -> String {
    let mut out = String::from("t,x,y,polarity\n");
    for e in events.events() {
        let _ = writeln!(out, "{},{},{},{}", e.t, e.x, e.y, e.polarity.sign());
    }
    out
}

pub fn write_events_csv(path: &Path, events: &EventVolume) -> Result<()> {
    write_file(path, events_to_csv(events))
}

pub fn read_events_csv(path: &Path) -> Result<Vec<DvsEvent>> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::format(path, format!("line {}: expected t,x,y,polarity", i + 1));
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let [t, x, y, pol] = f[..] else {
            return Err(bad());
        };
        let polarity = match pol {
            "1" | "+1" => Polarity::On,
            "-1" => Polarity::Off,
            _ => return Err(bad()),
        };
        out.push(DvsEvent {
            t: t.parse().map_err(|_| bad())?,
            x: x.parse().map_err(|_| bad())?,
            y: y.parse().map_err(|_| bad())?,
            polarity,
        });
    }
    Ok(out)
}

/// Activity CSV `t,x,y,value`, every cell in `(t, x, y)` order.
pub fn mp_to_csv(mp: &MpOutput) -> String {
    let (steps, kx, ky) = mp.shape();
    let mut out = String::from("t,x,y,value\n");
    for t in 0..steps {
        for x in 0..kx {
            for y in 0..ky {
                let _ = writeln!(out, "{t},{x},{y},{}", mp.get(t, x, y));
            }
        }
    }
    out
}

pub fn write_mp_csv(path: &Path, mp: &MpOutput) -> Result<()> {
    write_file(path, mp_to_csv(mp))
}

/// Reads an activity CSV; the shape is taken from the largest indices.
pub fn read_mp_csv(path: &Path) -> Result<MpOutput> {
    let text = read_text(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::format(path, format!("line {}: expected t,x,y,value", i + 1));
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let [t, x, y, v] = f[..] else {
            return Err(bad());
        };
        let t: usize = t.parse().map_err(|_| bad())?;
        let x: usize = x.parse().map_err(|_| bad())?;
        let y: usize = y.parse().map_err(|_| bad())?;
        let v: f64 = v.parse().map_err(|_| bad())?;
        rows.push((t, x, y, v));
    }
    let dim =
        |f: fn(&(usize, usize, usize, f64)) -> usize| rows.iter().map(f).max().map_or(0, |m| m + 1);
    let (steps, kx, ky) = (dim(|r| r.0), dim(|r| r.1), dim(|r| r.2));
    if rows.len() != steps * kx * ky || rows.is_empty() {
        return Err(Error::format(
            path,
            "activity CSV is not a dense (t, x, y) grid",
        ));
    }
    let mut grid = BcGrid::zeros(steps, kx, ky)?;
    for (t, x, y, v) in rows {
        grid.set(t, x, y, v);
    }
    Ok(MpOutput(grid))
}

/// Renders one `P5` graymap per bin with a single min-max scale for the
/// whole sequence; the scale goes to `heatmap_scale.txt`.
pub fn write_heatmaps(dir: &Path, mp: &MpOutput) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (steps, kx, ky) = mp.shape();
    let values = mp.grid().as_slice();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if values.is_empty() {
        (0.0, 0.0)
    } else {
        (lo, hi)
    };
    let span = hi - lo;
    let mut written = Vec::with_capacity(steps);
    for t in 0..steps {
        let mut img = Grid::new(kx, ky);
        for x in 0..kx {
            for y in 0..ky {
                img[(x, y)] = if span > 0.0 {
                    ((mp.get(t, x, y) - lo) / span * 255.0).round() as u8
                } else {
                    0
                };
            }
        }
        let path = dir.join(format!("mp_{t:04}.pgm"));
        write_pgm(&path, &img)?;
        written.push(path);
    }
    write_file(
        &dir.join("heatmap_scale.txt"),
        format!("min={lo}\nmax={hi}\nbins={steps}\n"),
    )?;
    Ok(written)
}

/// Comma-separated rows; values printed in shortest round-trip form.
pub fn write_grid_csv<T: Display>(path: &Path, g: &Grid<T>) -> Result<()> {
    let mut out = String::new();
    for r in 0..g.rows() {
        let line: Vec<String> = g.row(r).iter().map(ToString::to_string).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    write_file(path, out)
}

pub fn read_grid_csv<T: FromStr>(path: &Path) -> Result<Grid<T>> {
    let text = read_text(path)?;
    let mut data = Vec::new();
    let mut rows = 0;
    let mut cols = None;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<T>()
                    .map_err(|_| Error::format(path, format!("line {}: bad value {v:?}", i + 1)))
            })
            .collect::<Result<Vec<T>>>()?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::format(path, format!("line {}: ragged row", i + 1)))
            }
            _ => {}
        }
        data.extend(row);
        rows += 1;
    }
    Ok(Grid::from_vec(rows, cols.unwrap_or(0), data))
}

/// DVS spike script for driving the digital array directly:
///
/// ```text
/// # comment
/// size 16
/// steps 5
/// 1 6 7      # step row col
/// ```
pub fn parse_spike_script(text: &str, origin: &Path) -> Result<Vec<Grid<f64>>> {
    let mut size = None;
    let mut steps = None;
    let mut spikes = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::format(origin, format!("line {}: {msg}", i + 1));
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[..] {
            ["size", n] => size = Some(n.parse::<usize>().map_err(|_| bad("bad size"))?),
            ["steps", n] => steps = Some(n.parse::<usize>().map_err(|_| bad("bad steps"))?),
            [t, r, c] => {
                let p = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| bad("expected `step row col`"))
                };
                spikes.push((p(t)?, p(r)?, p(c)?, i + 1));
            }
            _ => return Err(bad("expected `size N`, `steps T` or `step row col`")),
        }
    }
    let n = size.ok_or_else(|| Error::format(origin, "missing `size` line"))?;
    let steps = steps.ok_or_else(|| Error::format(origin, "missing `steps` line"))?;
    let mut frames = vec![Grid::new(n, n); steps];
    for (t, r, c, line) in spikes {
        if t >= steps || r >= n || c >= n {
            return Err(Error::format(
                origin,
                format!("line {line}: spike outside {n}x{n}x{steps}"),
            ));
        }
        frames[t][(r, c)] = 1.0;
    }
    Ok(frames)
}

pub fn read_spike_script(path: &Path) -> Result<Vec<Grid<f64>>> {
    parse_spike_script(&read_text(path)?, path)
}

pub fn spike_script_to_string(frames: &[Grid<f64>]) -> String {
    let n = frames.first().map_or(0, Grid::rows);
    let mut out = format!("size {n}\nsteps {}\n", frames.len());
    for (t, f) in frames.iter().enumerate() {
        for (r, c, &v) in f.iter_indexed() {
            if v > 0.0 {
                let _ = writeln!(out, "{t} {r} {c}");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stimulus::frames_to_events;

    #[test]
    fn pgm_roundtrip_and_ascii() {
        let dir = tempfile::tempdir().unwrap();
        let img = Grid::from_vec(2, 3, vec![0, 10, 20, 30, 40, 255]);
        let p = dir.path().join("a.pgm");
        write_pgm(&p, &img).unwrap();
        assert_eq!(read_pnm(&p).unwrap(), img);

        let q = dir.path().join("b.pgm");
        fs::write(&q, "P2\n# comment\n3 2\n255\n0 10 20\n30 40 255\n").unwrap();
        assert_eq!(read_pnm(&q).unwrap(), img);
    }

    #[test]
    fn ppm_converted_with_luma() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.ppm");
        let mut bytes = b"P6\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 0, 255, 255, 255]);
        fs::write(&p, bytes).unwrap();
        assert_eq!(read_pnm(&p).unwrap().as_slice(), &[76, 255]);
    }

    #[test]
    fn frame_dir_numeric_order() {
        let dir = tempfile::tempdir().unwrap();
        for (name, v) in [("f10.pgm", 3u8), ("f2.pgm", 2), ("f1.pgm", 1)] {
            write_pgm(&dir.path().join(name), &Grid::filled(1, 1, v)).unwrap();
        }
        let seq = read_frame_dir(dir.path(), 30.0).unwrap();
        let vals: Vec<u8> = seq.frames().iter().map(|f| f[(0, 0)]).collect();
        assert_eq!(vals, vec![1, 2, 3]);
    }

    #[test]
    fn raw_roundtrip_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let seq = FrameSequence::new(
            vec![
                Grid::from_vec(2, 2, vec![1, 2, 3, 4]),
                Grid::from_vec(2, 2, vec![5, 6, 7, 8]),
            ],
            60.0,
        )
        .unwrap();
        let p = dir.path().join("s.raw");
        write_raw_frames(&p, &seq).unwrap();
        assert_eq!(read_raw_frames(&p, 60.0).unwrap(), seq);
        fs::write(&p, b"2 2 2\n\x01\x02").unwrap();
        assert!(matches!(
            read_raw_frames(&p, 60.0),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn events_csv_sorted_and_parsed() {
        let seq = FrameSequence::new(
            vec![
                Grid::from_vec(2, 2, vec![0, 200, 200, 0]),
                Grid::from_vec(2, 2, vec![200, 0, 200, 0]),
            ],
            60.0,
        )
        .unwrap();
        let ev = frames_to_events(&seq, 50).unwrap();
        let csv = events_to_csv(&ev);
        assert_eq!(csv, "t,x,y,polarity\n0,0,0,1\n0,1,0,-1\n");
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        write_events_csv(&p, &ev).unwrap();
        assert_eq!(read_events_csv(&p).unwrap(), ev.events());
    }

    #[test]
    fn mp_csv_roundtrip() {
        let g = BcGrid::from_vec(2, 2, 1, vec![0.0, 0.125, 1e-17, 3.5]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("mp.csv");
        write_mp_csv(&p, &MpOutput(g.clone())).unwrap();
        assert_eq!(read_mp_csv(&p).unwrap().0, g);
    }

    #[test]
    fn heatmap_global_scaling() {
        let g = BcGrid::from_vec(2, 1, 2, vec![0.0, 1.0, 2.0, 4.0]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = write_heatmaps(dir.path(), &MpOutput(g)).unwrap();
        assert_eq!(read_pnm(&files[0]).unwrap().as_slice(), &[0, 64]);
        assert_eq!(read_pnm(&files[1]).unwrap().as_slice(), &[128, 255]);
        let scale = fs::read_to_string(dir.path().join("heatmap_scale.txt")).unwrap();
        assert_eq!(scale, "min=0\nmax=4\nbins=2\n");
    }

    #[test]
    fn spike_script_roundtrip_and_bounds() {
        let text = "size 4\nsteps 2\n# spikes\n1 2 3\n0 0 0\n";
        let frames = parse_spike_script(text, Path::new("x")).unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[1][(2, 3)], 1.0);
        let again = parse_spike_script(&spike_script_to_string(&frames), Path::new("x")).unwrap();
        assert_eq!(again, frames);
        assert!(parse_spike_script("size 4\nsteps 2\n2 0 0\n", Path::new("x")).is_err());
        assert!(parse_spike_script("steps 2\n", Path::new("x")).is_err());
    }
}
