/// Quadrature on the reference triangle in barycentric coordinates.
///
/// Weights sum to the reference area 1/2; multiply by `|det J|` to integrate
/// over a physical triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
    degree: usize,
}

impl QuadratureRule {
    /// Seven-point rule, exact for polynomials of degree 5.
    pub fn degree5() -> Self {
        let s = 15f64.sqrt();
        let a1 = (6.0 - s) / 21.0;
        let b1 = (9.0 + 2.0 * s) / 21.0;
        let a2 = (6.0 + s) / 21.0;
        let b2 = (9.0 - 2.0 * s) / 21.0;
        let w0 = 9.0 / 80.0;
        let w1 = (155.0 - s) / 2400.0;
        let w2 = (155.0 + s) / 2400.0;
        let third = 1.0 / 3.0;
        QuadratureRule {
            points: vec![
                [third, third, third],
                [a1, a1, b1],
                [a1, b1, a1],
                [b1, a1, a1],
                [a2, a2, b2],
                [a2, b2, a2],
                [b2, a2, a2],
            ],
            weights: vec![w0, w1, w1, w1, w2, w2, w2],
            degree: 5,
        }
    }

    /// One-point centroid rule, exact for degree 1.
    pub fn centroid() -> Self {
        let third = 1.0 / 3.0;
        QuadratureRule {
            points: vec![[third, third, third]],
            weights: vec![0.5],
            degree: 1,
        }
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 3], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::degree5()
    }
}

/// Three-point Gauss-Legendre rule on `[0, 1]`, exact for degree 5.
/// Weights sum to 1; multiply by the edge length.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRule {
    points: [f64; 3],
    weights: [f64; 3],
}

impl EdgeRule {
    pub fn gauss3() -> Self {
        let d = 0.5 * (0.6f64).sqrt();
        EdgeRule {
            points: [0.5 - d, 0.5, 0.5 + d],
            weights: [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

impl Default for EdgeRule {
    fn default() -> Self {
        Self::gauss3()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    // ∫_T x^a y^b over the reference triangle = a! b! / (a + b + 2)!
    fn exact_monomial(a: u32, b: u32) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    #[test]
    fn degree5_is_exact_up_to_degree_5() {
        let rule = QuadratureRule::degree5();
        assert!((rule.weights().iter().sum::<f64>() - 0.5).abs() < 1e-15);
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let q: f64 = rule
                    .iter()
                    .map(|(l, w)| w * l[1].powi(a as i32) * l[2].powi(b as i32))
                    .sum();
                assert!(
                    (q - exact_monomial(a, b)).abs() < 1e-14,
                    "x^{a} y^{b}: {q} vs {}",
                    exact_monomial(a, b)
                );
            }
        }
    }

    #[test]
    fn degree5_is_not_exact_at_degree_6() {
        let rule = QuadratureRule::degree5();
        let q: f64 = rule.iter().map(|(l, w)| w * l[1].powi(6)).sum();
        assert!((q - exact_monomial(6, 0)).abs() > 1e-8);
    }

    #[test]
    fn centroid_rule_is_exact_for_linears() {
        let rule = QuadratureRule::centroid();
        let q: f64 = rule.iter().map(|(l, w)| w * (1.0 + 2.0 * l[1] - l[2])).sum();
        assert!((q - (0.5 + 2.0 / 6.0 - 1.0 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn gauss3_is_exact_up_to_degree_5() {
        let rule = EdgeRule::gauss3();
        for k in 0..=5 {
            let q: f64 = rule.iter().map(|(t, w)| w * t.powi(k)).sum();
            assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-15);
        }
    }
}
