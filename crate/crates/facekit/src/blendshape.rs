//! Linear blendshape model with simplex-constrained expression weights.
//!
//! A face rig is a neutral mesh plus `n` action-unit shapes over shared
//! topology. An expression assigns each non-neutral shape a weight in
//! `[0, 1]`; the weights may sum to at most 1 and the neutral weight is
//! whatever remains, so the full weight vector lies on the standard simplex
//! and every output vertex is a convex combination of the basis vertices.
//!
//! [`clamp_project`] is the bridge from unconstrained regressor output to
//! that simplex: clamp per weight, then rescale jointly when the sum
//! overshoots. It never rejects finite input, so a live pipeline always has
//! usable weights.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Slack allowed on every simplex check. Weights are accepted, and the
/// neutral weight clamped, within this distance of the exact constraint.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Action-unit count used by the capture rigs this crate ships defaults for.
pub const DEFAULT_UNIT_COUNT: usize = 52;

/// Fixed vertex positions for one shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 3]>,
}

impl Mesh {
    pub fn new(vertices: Vec<[f64; 3]>) -> Result<Self> {
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "mesh vertex",
            });
        }
        Ok(Mesh { vertices })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }
}

/// Neutral shape plus `n` action-unit shapes over shared topology.
///
/// Shape 0 is the neutral face. All shapes have the same vertex count.
#[derive(Debug, Clone, PartialEq)]
pub struct BlendshapeBasis {
    shapes: Vec<Mesh>,
}

impl BlendshapeBasis {
    /// Builds a basis from `n + 1` meshes, neutral first.
    pub fn new(shapes: Vec<Mesh>) -> Result<Self> {
        if shapes.len() < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: shapes.len(),
            });
        }
        let v = shapes[0].vertex_count();
        for (i, s) in shapes.iter().enumerate() {
            if s.vertex_count() != v {
                return Err(Error::TopologyMismatch {
                    shape: i,
                    expected: v,
                    got: s.vertex_count(),
                });
            }
        }
        Ok(BlendshapeBasis { shapes })
    }

    /// Number of non-neutral shapes (`n`).
    pub fn unit_count(&self) -> usize {
        self.shapes.len() - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.shapes[0].vertex_count()
    }

    pub fn neutral(&self) -> &Mesh {
        &self.shapes[0]
    }

    /// Shape `i` where 0 is neutral and `1..=n` are the action units.
    pub fn shape(&self, i: usize) -> &Mesh {
        &self.shapes[i]
    }

    /// Blends the basis under the given weights: every output vertex is the
    /// weighted sum of the corresponding basis vertices, neutral included.
    pub fn evaluate(&self, weights: &ExpressionWeights) -> Result<Mesh> {
        if weights.len() != self.unit_count() {
            return Err(Error::DimensionMismatch {
                expected: self.unit_count(),
                got: weights.len(),
            });
        }
        let full = weights.complete();
        let v = self.vertex_count();
        let mut out = vec![[0.0f64; 3]; v];
        for (w, shape) in full.iter().zip(&self.shapes) {
            if *w == 0.0 {
                continue;
            }
            for (acc, vert) in out.iter_mut().zip(shape.vertices()) {
                acc[0] += w * vert[0];
                acc[1] += w * vert[1];
                acc[2] += w * vert[2];
            }
        }
        Ok(Mesh { vertices: out })
    }
}

/// Weights for the non-neutral shapes of a basis.
///
/// Each weight lies in `[0, 1]` and the sum is at most 1, both up to
/// [`SIMPLEX_TOLERANCE`]. The neutral weight is not stored; it is defined as
/// one minus the sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionWeights {
    nonneutral: Vec<f64>,
}

impl ExpressionWeights {
    pub fn new(nonneutral: Vec<f64>) -> Result<Self> {
        validate_simplex(&nonneutral)?;
        Ok(ExpressionWeights { nonneutral })
    }

    /// The neutral expression for a rig with `n` units.
    pub fn neutral(n: usize) -> Self {
        ExpressionWeights {
            nonneutral: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.nonneutral.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nonneutral.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.nonneutral
    }

    /// Derived neutral weight, clamped into `[0, 1]` against rounding.
    pub fn neutral_weight(&self) -> f64 {
        let sum: f64 = self.nonneutral.iter().sum();
        (1.0 - sum).clamp(0.0, 1.0)
    }

    /// Full weight vector `[neutral, w1, .., wn]`, summing to 1.
    pub fn complete(&self) -> Vec<f64> {
        let mut full = Vec::with_capacity(self.nonneutral.len() + 1);
        full.push(self.neutral_weight());
        full.extend_from_slice(&self.nonneutral);
        full
    }
}

fn validate_simplex(weights: &[f64]) -> Result<()> {
    for (i, &w) in weights.iter().enumerate() {
        if !(w >= -SIMPLEX_TOLERANCE && w <= 1.0 + SIMPLEX_TOLERANCE) {
            return Err(Error::ConstraintViolation {
                detail: format!("weight {i} is {w}, outside [0, 1]"),
            });
        }
    }
    let sum: f64 = weights.iter().sum();
    if sum > 1.0 + SIMPLEX_TOLERANCE {
        return Err(Error::ConstraintViolation {
            detail: format!("weight sum is {sum}, greater than 1"),
        });
    }
    Ok(())
}

/// Validates `nonneutral` and returns the full `n + 1` weight vector with the
/// derived neutral weight first.
pub fn complete_weights(nonneutral: &[f64]) -> Result<Vec<f64>> {
    let w = ExpressionWeights::new(nonneutral.to_vec())?;
    Ok(w.complete())
}

/// Projects raw per-unit regressor output onto admissible weights.
///
/// Each value is clamped to `[0, 1]`; if the clamped sum still exceeds 1
/// beyond [`SIMPLEX_TOLERANCE`], all weights are scaled by the reciprocal of
/// the sum. Applying the projection twice gives exactly the same output as
/// applying it once.
pub fn clamp_project(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "raw expression weights",
        });
    }
    let mut out: Vec<f64> = raw.iter().map(|&v| v.clamp(0.0, 1.0)).collect();
    let sum: f64 = out.iter().sum();
    if sum > 1.0 + SIMPLEX_TOLERANCE {
        for w in &mut out {
            *w /= sum;
        }
    }
    Ok(out)
}

/// Reads a basis from the plain-text shape format.
///
/// Line 1 holds `nshapes nvertices`; then one `x y z` line per vertex, shape
/// after shape, neutral first. Blank lines between blocks are ignored.
pub fn load_basis(path: impl AsRef<Path>) -> Result<BlendshapeBasis> {
    read_basis(BufReader::new(File::open(path)?))
}

/// [`load_basis`] over any reader.
pub fn read_basis(reader: impl Read) -> Result<BlendshapeBasis> {
    let mut lines = BufReader::new(reader).lines();
    let mut line_no = 0usize;

    let header = loop {
        line_no += 1;
        match lines.next() {
            None => {
                return Err(Error::Parse {
                    line: line_no,
                    column: 1,
                    msg: "empty basis file".into(),
                })
            }
            Some(line) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
        }
    };

    let mut header_fields = header.split_whitespace();
    let nshapes = parse_field::<usize>(header_fields.next(), line_no, 1, "shape count")?;
    let nvertices = parse_field::<usize>(header_fields.next(), line_no, 2, "vertex count")?;
    if header_fields.next().is_some() {
        return Err(Error::Parse {
            line: line_no,
            column: 3,
            msg: "header has extra fields".into(),
        });
    }
    if nshapes < 2 || nvertices == 0 {
        return Err(Error::Parse {
            line: line_no,
            column: 1,
            msg: format!("basis needs at least 2 shapes and 1 vertex, header says {nshapes} {nvertices}"),
        });
    }

    let mut vertices: Vec<[f64; 3]> = Vec::with_capacity(nshapes * nvertices);
    for line in lines {
        line_no += 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let x = parse_field::<f64>(fields.next(), line_no, 1, "x")?;
        let y = parse_field::<f64>(fields.next(), line_no, 2, "y")?;
        let z = parse_field::<f64>(fields.next(), line_no, 3, "z")?;
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: line_no,
                column: 4,
                msg: "vertex line has extra fields".into(),
            });
        }
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::Parse {
                line: line_no,
                column: 1,
                msg: "vertex is not finite".into(),
            });
        }
        vertices.push([x, y, z]);
    }

    if vertices.len() != nshapes * nvertices {
        // Wrong total means some shape was short or long; report it as a
        // topology problem, not a syntax problem.
        return Err(Error::TopologyMismatch {
            shape: vertices.len() / nvertices.max(1),
            expected: nvertices,
            got: vertices.len() % nvertices.max(1),
        });
    }

    let shapes: Vec<Mesh> = vertices
        .chunks(nvertices)
        .map(|c| Mesh {
            vertices: c.to_vec(),
        })
        .collect();
    BlendshapeBasis::new(shapes)
}

fn parse_field<T: std::str::FromStr>(
    field: Option<&str>,
    line: usize,
    column: usize,
    what: &str,
) -> Result<T> {
    let text = field.ok_or_else(|| Error::Parse {
        line,
        column,
        msg: format!("missing {what}"),
    })?;
    text.parse().map_err(|_| Error::Parse {
        line,
        column,
        msg: format!("cannot parse {what} from {text:?}"),
    })
}

/// Writes a basis in the format accepted by [`load_basis`]. Values print in
/// shortest round-trip form, so a save/load cycle reproduces the basis
/// exactly.
pub fn save_basis(path: impl AsRef<Path>, basis: &BlendshapeBasis) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_basis(&mut out, basis)?;
    out.flush()?;
    Ok(())
}

/// [`save_basis`] over any writer.
pub fn write_basis(mut writer: impl Write, basis: &BlendshapeBasis) -> Result<()> {
    writeln!(
        writer,
        "{} {}",
        basis.shapes.len(),
        basis.vertex_count()
    )?;
    for shape in &basis.shapes {
        for v in shape.vertices() {
            writeln!(writer, "{} {} {}", v[0], v[1], v[2])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mesh(vertices: &[[f64; 3]]) -> Mesh {
        Mesh::new(vertices.to_vec()).unwrap()
    }

    fn two_shape_basis() -> BlendshapeBasis {
        BlendshapeBasis::new(vec![
            mesh(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
            mesh(&[[0.0, 2.0, 0.0], [1.0, 2.0, 2.0]]),
        ])
        .unwrap()
    }

    #[test]
    fn complete_weights_all_zero_gives_full_neutral() {
        let full = complete_weights(&vec![0.0; DEFAULT_UNIT_COUNT]).unwrap();
        assert_eq!(full.len(), DEFAULT_UNIT_COUNT + 1);
        assert_eq!(full[0], 1.0);
        assert!(full[1..].iter().all(|&w| w == 0.0));
    }

    #[test]
    fn complete_weights_single_full_unit_zeroes_neutral() {
        let mut w = vec![0.0; 52];
        w[3] = 1.0;
        let full = complete_weights(&w).unwrap();
        assert_eq!(full[0], 0.0);
        assert_eq!(full[4], 1.0);
    }

    #[test]
    fn complete_weights_partial_activation() {
        let full = complete_weights(&[0.25, 0.5]).unwrap();
        assert!((full[0] - 0.25).abs() < 1e-15);
        assert_eq!(&full[1..], &[0.25, 0.5]);
    }

    #[test]
    fn complete_weights_rejects_out_of_range_and_oversum() {
        assert!(matches!(
            complete_weights(&[-0.5, 0.2]),
            Err(Error::ConstraintViolation { .. })
        ));
        assert!(matches!(
            complete_weights(&[0.7, 0.7]),
            Err(Error::ConstraintViolation { .. })
        ));
        assert!(matches!(
            complete_weights(&[f64::NAN]),
            Err(Error::ConstraintViolation { .. })
        ));
    }

    #[test]
    fn complete_weights_accepts_values_inside_tolerance() {
        let full = complete_weights(&[-0.5e-9, 1.0 + 0.5e-9]).unwrap();
        assert_eq!(full.len(), 3);
    }

    #[test]
    fn clamp_project_clamps_per_weight() {
        assert_eq!(clamp_project(&[-0.1, 0.5]).unwrap(), vec![0.0, 0.5]);
        assert_eq!(clamp_project(&[1.2]).unwrap(), vec![1.0]);
    }

    #[test]
    fn clamp_project_rescales_oversum() {
        assert_eq!(clamp_project(&[0.8, 0.8]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn clamp_project_leaves_valid_weights_alone() {
        assert_eq!(clamp_project(&[0.2, 0.3]).unwrap(), vec![0.2, 0.3]);
    }

    #[test]
    fn clamp_project_rejects_non_finite() {
        assert!(matches!(
            clamp_project(&[f64::NAN]),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            clamp_project(&[f64::INFINITY, 0.0]),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn evaluate_neutral_returns_neutral_mesh() {
        let basis = two_shape_basis();
        let out = basis
            .evaluate(&ExpressionWeights::neutral(basis.unit_count()))
            .unwrap();
        assert_eq!(&out, basis.neutral());
    }

    #[test]
    fn evaluate_one_hot_returns_that_shape() {
        let basis = two_shape_basis();
        let w = ExpressionWeights::new(vec![1.0]).unwrap();
        let out = basis.evaluate(&w).unwrap();
        assert_eq!(&out, basis.shape(1));
    }

    #[test]
    fn evaluate_midpoint_blends_half_way() {
        let basis = two_shape_basis();
        let w = ExpressionWeights::new(vec![0.5]).unwrap();
        let out = basis.evaluate(&w).unwrap();
        for (v, (a, b)) in out
            .vertices()
            .iter()
            .zip(basis.neutral().vertices().iter().zip(basis.shape(1).vertices()))
        {
            for c in 0..3 {
                assert!((v[c] - 0.5 * (a[c] + b[c])).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn evaluate_rejects_wrong_weight_count() {
        let basis = two_shape_basis();
        let w = ExpressionWeights::new(vec![0.2, 0.2]).unwrap();
        assert!(matches!(
            basis.evaluate(&w),
            Err(Error::DimensionMismatch {
                expected: 1,
                got: 2
            })
        ));
    }

    #[test]
    fn read_basis_parses_two_shape_file() {
        let text = "2 2\n0 0 0\n1 0 0\n\n0 2 0\n1 2 2\n";
        let basis = read_basis(text.as_bytes()).unwrap();
        assert_eq!(basis.unit_count(), 1);
        assert_eq!(basis, two_shape_basis());
    }

    #[test]
    fn read_basis_reports_topology_mismatch() {
        // Header promises 2 shapes of 3 vertices but only 5 vertex lines follow.
        let text = "2 3\n0 0 0\n1 0 0\n2 0 0\n0 1 0\n1 1 0\n";
        assert!(matches!(
            read_basis(text.as_bytes()),
            Err(Error::TopologyMismatch { .. })
        ));
    }

    #[test]
    fn read_basis_reports_parse_error_with_line() {
        let text = "2 1\n0 0 zero\n1 1 1\n";
        match read_basis(text.as_bytes()) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(column, 3);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn basis_round_trips_exactly_through_text() {
        let basis = BlendshapeBasis::new(vec![
            mesh(&[[0.1, -2.5, 3.7e-3], [1.0 / 3.0, 0.2, 9.9]]),
            mesh(&[[-0.7, 0.0, 1e-12], [2.0, 0.25, -8.125]]),
            mesh(&[[5.5, 1.0, 2.0], [0.0, -1.0 / 7.0, 4.4]]),
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_basis(&mut buf, &basis).unwrap();
        let reread = read_basis(buf.as_slice()).unwrap();
        assert_eq!(reread, basis);
    }

    // Valid weight vectors: values in [0, 1] scaled so the sum stays <= 1.
    fn valid_weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
        (
            proptest::collection::vec(0.0f64..=1.0, n),
            0.0f64..=1.0,
        )
            .prop_map(|(raw, shrink)| {
                let sum: f64 = raw.iter().sum();
                if sum <= 1.0 {
                    raw
                } else {
                    raw.iter().map(|w| w * shrink / sum).collect()
                }
            })
    }

    proptest! {
        #[test]
        fn prop_clamp_project_output_is_always_valid(raw in proptest::collection::vec(-5.0f64..5.0, 1..60)) {
            let out = clamp_project(&raw).unwrap();
            prop_assert!(complete_weights(&out).is_ok());
        }

        #[test]
        fn prop_clamp_project_is_idempotent(raw in proptest::collection::vec(-5.0f64..5.0, 1..60)) {
            let once = clamp_project(&raw).unwrap();
            let twice = clamp_project(&once).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn prop_valid_weights_pass_through_clamp_unchanged(w in valid_weights(8)) {
            let out = clamp_project(&w).unwrap();
            prop_assert_eq!(out, w);
        }

        #[test]
        fn prop_evaluate_is_linear_in_weights(
            wa in valid_weights(2),
            wb in valid_weights(2),
            alpha in 0.0f64..=1.0,
        ) {
            let basis = BlendshapeBasis::new(vec![
                mesh(&[[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]]),
                mesh(&[[1.0, -1.0, 0.5], [0.0, 2.0, -2.0]]),
                mesh(&[[-3.0, 0.25, 1.5], [2.0, 0.0, 0.0]]),
            ]).unwrap();
            let mixed: Vec<f64> = wa.iter().zip(&wb)
                .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
                .collect();
            let fa = basis.evaluate(&ExpressionWeights::new(wa).unwrap()).unwrap();
            let fb = basis.evaluate(&ExpressionWeights::new(wb).unwrap()).unwrap();
            let fm = basis.evaluate(&ExpressionWeights::new(mixed).unwrap()).unwrap();
            for (m, (a, b)) in fm.vertices().iter().zip(fa.vertices().iter().zip(fb.vertices())) {
                for c in 0..3 {
                    prop_assert!((m[c] - (alpha * a[c] + (1.0 - alpha) * b[c])).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn prop_evaluate_stays_in_convex_hull(w in valid_weights(2)) {
            let basis = BlendshapeBasis::new(vec![
                mesh(&[[0.0, 0.0, 0.0]]),
                mesh(&[[1.0, -1.0, 0.5]]),
                mesh(&[[-3.0, 0.25, 1.5]]),
            ]).unwrap();
            let out = basis.evaluate(&ExpressionWeights::new(w).unwrap()).unwrap();
            let v = out.vertices()[0];
            for c in 0..3 {
                let lo = (0..3).map(|s| basis.shape(s).vertices()[0][c]).fold(f64::INFINITY, f64::min);
                let hi = (0..3).map(|s| basis.shape(s).vertices()[0][c]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(v[c] >= lo - 1e-9 && v[c] <= hi + 1e-9);
            }
        }
    }
}
