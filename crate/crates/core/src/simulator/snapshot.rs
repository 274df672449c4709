//! State snapshots.
//!
//! Binary: a 16-byte header (`b"QCAS"`, then `d`, `N`, layout code as
//! little-endian `u32`) followed by `re, im` pairs of little-endian `f64`.
//! Text: optional `# d=<d> N=<N> layout=<single|ancilla>` header, then one
//! `index re im` line per amplitude; omitted indices are zero.

use std::fmt::Write as _;
use std::io::{Read, Write};

use super::{DenseState, Layout};
use crate::{Error, Result, C64};

const MAGIC: &[u8; 4] = b"QCAS";

pub fn write_snapshot(state: &DenseState, out: &mut impl Write) -> Result<()> {
    let mut buf = Vec::with_capacity(16 + 16 * state.amplitudes().len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&state.d().to_le_bytes());
    buf.extend_from_slice(&(state.n() as u32).to_le_bytes());
    buf.extend_from_slice(&state.layout().code().to_le_bytes());
    for a in state.amplitudes() {
        buf.extend_from_slice(&a.re.to_le_bytes());
        buf.extend_from_slice(&a.im.to_le_bytes());
    }
    out.write_all(&buf).map_err(Error::Io)
}

pub fn read_snapshot(input: &mut impl Read) -> Result<DenseState> {
    let mut buf = Vec::new();
    input.read_to_end(&mut buf).map_err(Error::Io)?;
    if buf.len() < 16 || &buf[0..4] != MAGIC {
        return Err(Error::Parse {
            line: 0,
            message: "missing QCAS snapshot header".into(),
        });
    }
    let word = |i: usize| u32::from_le_bytes(buf[i..i + 4].try_into().unwrap());
    let (d, n, code) = (word(4), word(8) as usize, word(12));
    let layout = Layout::from_code(code).ok_or_else(|| Error::Parse {
        line: 0,
        message: format!("unknown layout code {code}"),
    })?;
    let body = &buf[16..];
    if body.len() % 16 != 0 {
        return Err(Error::Parse {
            line: 0,
            message: "truncated amplitude data".into(),
        });
    }
    let amps = body
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    DenseState::from_amplitudes(d, n, layout, amps)
}

fn layout_name(l: Layout) -> &'static str {
    match l {
        Layout::Single => "single",
        Layout::DataPlusAncilla => "ancilla",
    }
}

/// Text snapshot; amplitudes with modulus below `1e-15` are skipped.
pub fn write_text_snapshot(state: &DenseState) -> String {
    let mut s = format!(
        "# d={} N={} layout={}\n",
        state.d(),
        state.n(),
        layout_name(state.layout())
    );
    for (i, a) in state.amplitudes().iter().enumerate() {
        if a.norm() >= 1e-15 {
            let _ = writeln!(s, "{i} {:?} {:?}", a.re, a.im);
        }
    }
    s
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses a text snapshot. `fallback` supplies `(d, N, layout)` when the
/// header is absent.
pub fn read_text_snapshot(text: &str, fallback: Option<(u32, usize, Layout)>) -> Result<DenseState> {
    let mut shape = fallback;
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            let mut d = None;
            let mut n = None;
            let mut layout = Layout::Single;
            for tok in header.split_whitespace() {
                match tok.split_once('=') {
                    Some(("d", v)) => d = v.parse().ok(),
                    Some(("N", v)) => n = v.parse().ok(),
                    Some(("layout", "single")) => layout = Layout::Single,
                    Some(("layout", "ancilla")) => layout = Layout::DataPlusAncilla,
                    Some(("layout", v)) => {
                        return Err(parse_err(line_no, format!("unknown layout `{v}`")))
                    }
                    _ => {}
                }
            }
            if let (Some(d), Some(n)) = (d, n) {
                shape = Some((d, n, layout));
            }
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(line_no, "expected `index re im`"));
        }
        let idx: usize = parts[0]
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad index `{}`", parts[0])))?;
        let re: f64 = parts[1]
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad real part `{}`", parts[1])))?;
        let im: f64 = parts[2]
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad imaginary part `{}`", parts[2])))?;
        entries.push((line_no, idx, C64::new(re, im)));
    }
    let (d, n, layout) =
        shape.ok_or_else(|| parse_err(0, "no `# d= N=` header and no shape given"))?;
    let sites = match layout {
        Layout::Single => n,
        Layout::DataPlusAncilla => 2 * n,
    };
    let dim = super::checked_dim(d, sites, super::DEFAULT_CAP)?;
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for (line_no, idx, a) in entries {
        if idx >= dim {
            return Err(parse_err(line_no, format!("index {idx} outside 0..{dim}")));
        }
        amps[idx] = a;
    }
    DenseState::from_amplitudes(d, n, layout, amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn binary_roundtrip_is_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let st = DenseState::random(3, 2, Layout::DataPlusAncilla, &mut rng).unwrap();
        let mut bytes = Vec::new();
        write_snapshot(&st, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 16 + 16 * 81);
        assert_eq!(&bytes[..4], b"QCAS");
        assert_eq!(read_snapshot(&mut bytes.as_slice()).unwrap(), st);
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let st = DenseState::random(2, 3, Layout::Single, &mut rng).unwrap();
        let text = write_text_snapshot(&st);
        assert_eq!(read_text_snapshot(&text, None).unwrap(), st);
    }

    #[test]
    fn text_errors_cite_lines() {
        let err = read_text_snapshot("# d=2 N=1\n0 1 0\n1 x 0\n", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = read_text_snapshot("0 0.5 0\n", None).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let st = read_text_snapshot("1 1 0\n", Some((2, 1, Layout::Single))).unwrap();
        assert_eq!(st.amplitudes()[1], C64::new(1.0, 0.0));
        assert!(read_snapshot(&mut &b"XXXX"[..]).is_err());
    }
}
