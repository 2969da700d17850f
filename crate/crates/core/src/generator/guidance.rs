use super::GenError;

/// Classifier-free guidance: `uncond + scale · (cond − uncond)`.
pub fn cfg_combine(cond: &[f64], uncond: &[f64], scale: f64) -> Result<Vec<f64>, GenError> {
    if cond.len() != uncond.len() {
        return Err(GenError::LengthMismatch(cond.len(), uncond.len()));
    }
    Ok(cond.iter().zip(uncond).map(|(&c, &u)| u + scale * (c - u)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixed_points() {
        let c = [1.5, -2.0, 0.25];
        let u = [0.5, 3.0, -1.0];
        assert_eq!(cfg_combine(&c, &u, 1.0).unwrap(), c.to_vec());
        assert_eq!(cfg_combine(&c, &u, 0.0).unwrap(), u.to_vec());
        assert_eq!(cfg_combine(&[2.0, 0.0], &[0.0, 0.0], 5.0).unwrap(), vec![10.0, 0.0]);
    }

    #[test]
    fn mismatch() {
        assert_eq!(cfg_combine(&[1.0], &[1.0, 2.0], 5.0), Err(GenError::LengthMismatch(1, 2)));
    }

    proptest! {
        #[test]
        fn identical_branches_are_fixed(a in prop::collection::vec(-50.0f64..50.0, 1..20), s in -10.0f64..10.0) {
            let out = cfg_combine(&a, &a, s).unwrap();
            prop_assert_eq!(out, a);
        }

        #[test]
        fn linear_in_scale(
            pair in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..20),
            s1 in -5.0f64..5.0,
            s2 in -5.0f64..5.0,
        ) {
            let (c, u): (Vec<f64>, Vec<f64>) = pair.into_iter().unzip();
            let l1 = cfg_combine(&c, &u, s1).unwrap();
            let l2 = cfg_combine(&c, &u, s2).unwrap();
            let mid = cfg_combine(&c, &u, (s1 + s2) / 2.0).unwrap();
            for i in 0..c.len() {
                prop_assert!((mid[i] - (l1[i] + l2[i]) / 2.0).abs() < 1e-9);
            }
        }
    }
}
