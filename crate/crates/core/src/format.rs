//! Number formatting shared by every CSV and summary writer.

/// Round-trip decimal form with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI, -2.5e-300, 1e300, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1.0), "1.0000000000000000e0");
    }
}
