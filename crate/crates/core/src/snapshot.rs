//! Text snapshots of spectral states. Every float is written with 17
//! significant digits, so a write/read round trip is bit-exact.
//!
//! ```text
//! geobal-snapshot 1
//! domain <L1> <L2> <L3>
//! lattice <radius> <inclusive|strict>
//! frame <rotated|lab>
//! time <t>
//! modes <count>
//! <n1> <n2> <n3> <-|0|+> <re> <im>
//! ```

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Branch, Domain, Frame, Lattice, ModeId, SpectralState, WaveVector};

pub const VERSION: u32 = 1;
const MAGIC: &str = "geobal-snapshot";

pub fn write_snapshot(state: &SpectralState, out: &mut impl Write) -> std::io::Result<()> {
    let lat = state.lattice();
    let [l1, l2, l3] = lat.domain().lengths();
    writeln!(out, "{MAGIC} {VERSION}")?;
    writeln!(out, "domain {l1:.16e} {l2:.16e} {l3:.16e}")?;
    writeln!(out, "lattice {:.16e} {}", lat.radius(), if lat.is_strict() { "strict" } else { "inclusive" })?;
    writeln!(out, "frame {}", state.frame().label())?;
    writeln!(out, "time {:.16e}", state.time())?;
    writeln!(out, "modes {}", lat.n_modes())?;
    for (m, c) in state.coeffs().iter().enumerate() {
        let id = lat.mode_id(m);
        let [a, b, k] = id.wave.0;
        writeln!(out, "{a} {b} {k} {} {:.16e} {:.16e}", id.branch.label(), c.re, c.im)?;
    }
    Ok(())
}

pub fn snapshot_string(state: &SpectralState) -> String {
    let mut out = Vec::new();
    write_snapshot(state, &mut out).expect("writing to memory");
    String::from_utf8(out).expect("ascii output")
}

struct Lines<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, offset: usize, msg: impl Into<String>) -> Error {
        Error::Parse { offset, msg: msg.into() }
    }

    /// Next line and its byte offset; a missing line is an error at EOF.
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        if self.pos >= self.text.len() {
            return Err(self.err(self.text.len(), format!("unexpected end of file, expected {what}")));
        }
        let start = self.pos;
        let rest = &self.text[start..];
        // every line is newline-terminated, so a missing newline means truncation
        let Some(i) = rest.find('\n') else {
            return Err(self.err(start, format!("unterminated line, file truncated while reading {what}")));
        };
        let (line, adv) = (&rest[..i], i + 1);
        self.pos += adv;
        Ok((start, line.trim_end_matches('\r')))
    }

    fn keyed(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (off, line) = self.next(key)?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(self.err(off, format!("expected `{key}` line")));
        }
        Ok((off, parts.collect()))
    }
}

fn num<T: std::str::FromStr>(lines: &Lines, off: usize, s: Option<&&str>, what: &str) -> Result<T> {
    s.and_then(|v| v.parse().ok()).ok_or_else(|| lines.err(off, format!("invalid or missing {what}")))
}

pub fn read_snapshot(text: &str) -> Result<SpectralState> {
    let mut lines = Lines { text, pos: 0 };
    let (off, head) = lines.keyed(MAGIC)?;
    let version: u32 = num(&lines, off, head.first(), "version")?;
    if version != VERSION {
        return Err(Error::Version { found: version, expected: VERSION });
    }
    let (off, d) = lines.keyed("domain")?;
    let ls: Vec<f64> = (0..3).map(|i| num(&lines, off, d.get(i), "domain length")).collect::<Result<_>>()?;
    let domain = Domain::new(ls[0], ls[1], ls[2]).map_err(|e| lines.err(off, e.to_string()))?;
    let (off, l) = lines.keyed("lattice")?;
    let radius: f64 = num(&lines, off, l.first(), "lattice radius")?;
    let lattice = match l.get(1) {
        Some(&"strict") => Lattice::below(domain, radius),
        Some(&"inclusive") => Lattice::new(domain, radius),
        _ => return Err(lines.err(off, "lattice kind must be `strict` or `inclusive`")),
    }
    .map_err(|e| lines.err(off, e.to_string()))?;
    let (off, f) = lines.keyed("frame")?;
    let frame = f.first().and_then(|s| Frame::parse(s)).ok_or_else(|| lines.err(off, "unknown frame"))?;
    let (off, t) = lines.keyed("time")?;
    let time: f64 = num(&lines, off, t.first(), "time")?;
    let (off, n) = lines.keyed("modes")?;
    let count: usize = num(&lines, off, n.first(), "mode count")?;
    let mut state = SpectralState::zeros(&lattice, frame, time);
    let mut seen = vec![false; lattice.n_modes()];
    for _ in 0..count {
        let (off, line) = lines.next("a mode line")?;
        let p: Vec<&str> = line.split_whitespace().collect();
        if p.len() != 6 {
            return Err(lines.err(off, format!("mode line needs 6 fields, found {}", p.len())));
        }
        let k: Vec<i32> = (0..3).map(|i| num(&lines, off, p.get(i), "wavenumber")).collect::<Result<_>>()?;
        let branch = Branch::parse(p[3]).ok_or_else(|| lines.err(off, format!("unknown branch `{}`", p[3])))?;
        let re: f64 = num(&lines, off, p.get(4), "real part")?;
        let im: f64 = num(&lines, off, p.get(5), "imaginary part")?;
        let wave = WaveVector::new(k[0], k[1], k[2]);
        if branch.is_fast() && k[2] == 0 {
            return Err(lines.err(
                off,
                format!("fast coefficient at {wave} violates the constraint that fast modes vanish when k3 = 0"),
            ));
        }
        let id = ModeId::new(wave, branch);
        let m = lattice
            .mode_index(id)
            .ok_or_else(|| lines.err(off, format!("mode {wave} {} is outside the lattice", branch.label())))?;
        if std::mem::replace(&mut seen[m], true) {
            return Err(lines.err(off, format!("duplicate mode {wave} {}", branch.label())));
        }
        state.coeffs_mut()[m] = Complex64::new(re, im);
    }
    if lines.pos < text.len() && !text[lines.pos..].trim().is_empty() {
        return Err(lines.err(lines.pos, "trailing content after the declared modes"));
    }
    Ok(state)
}

pub fn load_snapshot(path: &std::path::Path) -> Result<SpectralState> {
    read_snapshot(&std::fs::read_to_string(path)?)
}

pub fn save_snapshot(state: &SpectralState, path: &std::path::Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_snapshot(state, &mut f)?;
    f.flush()?;
    Ok(())
}
