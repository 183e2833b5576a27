use core::hash::Hasher;

use fnv::FnvHasher;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Cosine similarity of two equally long vectors. Zero when either vector
/// has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let denom = norm(a) * norm(b);
    if denom == 0.0 {
        0.0
    } else {
        dot(a, b) / denom
    }
}

/// Incremental 64-bit FNV-1a digest used for dataset and config fingerprints.
#[derive(Default)]
pub(crate) struct Digest(FnvHasher);

impl Digest {
    pub(crate) fn field(&mut self, bytes: &[u8]) {
        self.0.write(bytes);
        // field separator, so ("ab","c") and ("a","bc") differ
        self.0.write_u8(0x1f);
    }

    pub(crate) fn finish(&self) -> u64 {
        self.0.finish()
    }
}

/// FNV-1a digest of a sequence of fields, each followed by a separator.
pub fn digest<'a>(fields: impl IntoIterator<Item = &'a [u8]>) -> u64 {
    let mut d = Digest::default();
    for f in fields {
        d.field(f);
    }
    d.finish()
}

/// Median of a non-empty slice of integers (mean of the two middle values for
/// even lengths).
pub(crate) fn median_i64(values: &mut [i64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid] as f64
    } else {
        (values[mid - 1] as f64 + values[mid] as f64) / 2.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_of_worked_pair() {
        assert!((cosine(&[1.0, 0.0, 1.0], &[1.0, 1.0, 0.0]) - 0.5).abs() < 1e-15);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 2.0]), 0.0);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median_i64(&mut [3, 1, 2]), Some(2.0));
        assert_eq!(median_i64(&mut [4, 1, 3, 2]), Some(2.5));
        assert_eq!(median_i64(&mut []), None);
    }
}
