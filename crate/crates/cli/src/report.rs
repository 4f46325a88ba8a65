// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use spinbath::operators::CMatrix;

use crate::CliError;

/// Common report header; the command-specific body is flattened in.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub command: &'a str,
    pub config_digest: &'a str,
    pub wall_time_s: Option<f64>,
    #[serde(flatten)]
    pub body: T,
}

/// Row-major `[re, im]` pairs.
pub fn matrix_json(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(format!("write failed: {e}"))
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).map_err(io)?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

pub fn write_json<T: Serialize>(out: Option<&Path>, report: &T) -> Result<(), CliError> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, report).map_err(io)?;
    writeln!(w).map_err(io)?;
    w.flush().map_err(io)
}

pub fn write_csv<T: Serialize>(out: Option<&Path>, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use spinbath::operators::sigma_y;

    #[test]
    fn matrices_are_row_major_pairs() {
        let m = matrix_json(&sigma_y());
        assert_eq!(m[0][1], [0.0, -1.0]);
        assert_eq!(m[1][0], [0.0, 1.0]);
    }

    #[test]
    fn envelope_flattens_body_and_nulls_timing() {
        #[derive(Serialize)]
        struct Body {
            x: u32,
        }
        let e = Envelope {
            command: "build",
            config_digest: "ab",
            wall_time_s: None,
            body: Body { x: 3 },
        };
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(
            s,
            r#"{"command":"build","config_digest":"ab","wall_time_s":null,"x":3}"#
        );
    }
}
