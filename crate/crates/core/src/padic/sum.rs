use super::{ExpPolynomial, PAdicContext, PadicError, Weight};
use crate::poly::Poly;
use crate::presburger::{qe, Formula};
use crate::semilinear::{disjoint_dnf, sum_out, ElimError, Piece, Summand};

/// `s ↦ Σ_{λ ∈ Λ_s} p^{w(s, λ)}` in closed form on `param_domain`.
pub fn sum_closed_form(
    lambda: &Formula,
    lambda_vars: &[String],
    weight: &Weight,
    param_domain: &Formula,
    ctx: &PAdicContext,
) -> Result<ExpPolynomial, PadicError> {
    let f = Formula::and([qe(lambda), qe(param_domain)]).simplify();
    let exp = weight.exponent(lambda_vars);
    let mut out = Vec::new();
    for conj in disjoint_dnf(&f) {
        let mut pieces = vec![Piece { atoms: conj, terms: vec![Summand::new(Poly::one(), exp.clone())] }];
        for x in lambda_vars.iter().rev() {
            let mut next = Vec::new();
            for pc in &pieces {
                match sum_out(pc, x, ctx.p()) {
                    Ok(v) => next.extend(v),
                    Err(ElimError::Diverges(v)) => return Err(PadicError::Diverges(v)),
                }
            }
            pieces = next;
        }
        out.extend(pieces);
    }
    Ok(ExpPolynomial::from_pieces(out, ctx.p()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::LinearTerm;
    use crate::num::{int, pow_rat, rat, Rat};
    use crate::presburger::parse;
    use num_traits::One;

    fn weight(c: i64, b: &[i64]) -> Weight {
        Weight { r: int(1), c: LinearTerm::constant(c), b: b.iter().map(|v| int(*v)).collect() }
    }

    fn vars(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn delta_one() {
        for p in [2, 3, 5, 7] {
            let ctx = PAdicContext::new(p).unwrap();
            let e = sum_closed_form(&parse("l >= 0").unwrap(), &vars(&["l"]), &weight(-1, &[-1]), &Formula::True, &ctx)
                .unwrap();
            assert_eq!(e.eval(&|_| None, ctx.p()).unwrap(), rat(1, p - 1));
        }
    }

    #[test]
    fn flat_weight_diverges() {
        let ctx = PAdicContext::new(2).unwrap();
        let r = sum_closed_form(&parse("l >= 0").unwrap(), &vars(&["l"]), &weight(0, &[0]), &Formula::True, &ctx);
        assert_eq!(r, Err(PadicError::Diverges("l".into())));
    }

    #[test]
    fn truncated_geometric() {
        let ctx = PAdicContext::new(3).unwrap();
        let e = sum_closed_form(
            &parse("0 <= l /\\ l < s").unwrap(),
            &vars(&["l"]),
            &weight(-1, &[-1]),
            &parse("s >= 0").unwrap(),
            &ctx,
        )
        .unwrap();
        for s in 0..=30i64 {
            let want = (Rat::one() - pow_rat(&int(3), &int(-s))) / rat(2, 1);
            assert_eq!(e.eval_or_zero(&|_| Some(int(s)), ctx.p()).unwrap(), want, "s={s}");
        }
    }

    #[test]
    fn two_dimensional_cone() {
        // Σ_{0 <= l1 <= l2} 2^(-l1-l2) = Σ_{l2} (l2+1)... check against brute force.
        let ctx = PAdicContext::new(2).unwrap();
        let e = sum_closed_form(
            &parse("0 <= l1 /\\ l1 <= l2").unwrap(),
            &vars(&["l1", "l2"]),
            &weight(0, &[-1, -1]),
            &Formula::True,
            &ctx,
        )
        .unwrap();
        // Σ_{l1} 2^-l1 Σ_{l2>=l1} 2^-l2 = Σ 2^-2l1 * 2 = 2 * 4/3
        assert_eq!(e.eval(&|_| None, ctx.p()).unwrap(), rat(8, 3));
    }
}
