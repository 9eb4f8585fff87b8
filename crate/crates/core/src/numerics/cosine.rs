/// Result of a cosine computation that may involve a zero vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CosineOutcome {
    pub value: f64,
    /// Set when either input had zero norm; `value` is then 0.
    pub zero_vector: bool,
}

/// Cosine similarity; a zero vector on either side yields 0.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> f64 {
    cosine_similarity_checked(u, v).value
}

pub fn cosine_similarity_checked(u: &[f64], v: &[f64]) -> CosineOutcome {
    assert_eq!(u.len(), v.len(), "cosine of vectors with different dimensions");
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return CosineOutcome {
            value: 0.0,
            zero_vector: true,
        };
    }
    CosineOutcome {
        value: (dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0),
        zero_vector: false,
    }
}
