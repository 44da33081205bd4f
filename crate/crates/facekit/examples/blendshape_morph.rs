//! Evaluate a tiny face rig from raw, out-of-range weight estimates.
//!
//! A regressor's raw outputs can land outside [0, 1] or add up past 1.
//! `clamp_project` repairs them, `complete_weights` derives the neutral
//! weight, and `evaluate` blends the shapes into one mesh.
//!
//! ```bash
//! cargo run -p facekit --example blendshape_morph
//! ```

use facekit::blendshape::{clamp_project, BlendshapeBasis, ExpressionWeights, Mesh};

fn main() {
    // Neutral plus two expression shapes over four vertices. Only the mouth
    // corners (vertices 2 and 3) move.
    let neutral = mesh(&[
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.2, -1.0, 0.0],
        [0.8, -1.0, 0.0],
    ]);
    let smile = mesh(&[
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.1, -0.8, 0.2],
        [0.9, -0.8, 0.2],
    ]);
    let frown = mesh(&[
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.3, -1.2, -0.1],
        [0.7, -1.2, -0.1],
    ]);
    let basis = BlendshapeBasis::new(vec![neutral, smile, frown]).expect("basis");

    // Raw estimates: negative weight and a sum over 1.
    let raw = [-0.05, 0.9, 0.4];
    let repaired = clamp_project(&raw[1..]).expect("finite");
    println!("raw nonneutral weights   {:?}", &raw[1..]);
    println!("after clamp + rescale    {repaired:?}");

    let weights = ExpressionWeights::new(repaired).expect("valid");
    println!(
        "derived neutral weight   {:.4} (all {} weights sum to 1)",
        weights.neutral_weight(),
        weights.len() + 1
    );

    let face = basis.evaluate(&weights).expect("evaluate");
    println!("\nblended mouth corners:");
    for v in [2, 3] {
        let [x, y, z] = face.vertices()[v];
        println!("  vertex {v}: ({x:.4}, {y:.4}, {z:.4})");
    }

    // One-hot selection returns a basis shape untouched.
    let pure = basis
        .evaluate(&ExpressionWeights::new(vec![1.0, 0.0]).expect("valid"))
        .expect("evaluate");
    assert_eq!(pure.vertices(), basis.shape(1).vertices());
    println!("\nfull smile weight reproduces the smile shape exactly");
}

fn mesh(vertices: &[[f64; 3]]) -> Mesh {
    Mesh::new(vertices.to_vec()).expect("finite vertices")
}
