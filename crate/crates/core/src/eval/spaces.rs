//! Explicit construction of powersets and relation/function spaces, used only
//! when such a set is evaluated as a value (membership tests are lazy).

use super::{ENUM_LIMIT, POW_LIMIT};
use crate::ast::BinOp;
use crate::error::EvalError;
use crate::value::Value;

pub(crate) fn powerset(base: &[Value]) -> Result<Vec<Value>, EvalError> {
    if base.len() > POW_LIMIT {
        return Err(EvalError::PowLimit {
            size: base.len(),
            limit: POW_LIMIT,
        });
    }
    let n = base.len();
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u32..(1u32 << n) {
        // iterating bits low to high keeps each subset sorted
        let subset: Vec<Value> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| base[i].clone())
            .collect();
        out.push(Value::set_from_sorted(subset));
    }
    Ok(out)
}

fn count_limit(choices: usize, positions: usize) -> Result<(), EvalError> {
    let mut total: usize = 1;
    for _ in 0..positions {
        total = total.saturating_mul(choices);
        if total > ENUM_LIMIT {
            return Err(EvalError::EnumLimit { limit: ENUM_LIMIT });
        }
    }
    Ok(())
}

/// All members of `a <-> b`, `a --> b`, `a +-> b` or `a >+> b`.
pub(crate) fn function_space(op: BinOp, a: &[Value], b: &[Value]) -> Result<Vec<Value>, EvalError> {
    if op == BinOp::Relation {
        let mut product = Vec::with_capacity(a.len() * b.len());
        for x in a {
            for y in b {
                product.push(Value::pair(x.clone(), y.clone()));
            }
        }
        return powerset(&product);
    }
    let total = op == BinOp::TotalFn;
    let injective = op == BinOp::PartialInj;
    count_limit(b.len() + usize::from(!total), a.len())?;

    let mut out = Vec::new();
    let mut current: Vec<Value> = Vec::with_capacity(a.len());
    let mut used = vec![false; b.len()];
    #[allow(clippy::too_many_arguments)]
    fn go(
        i: usize,
        a: &[Value],
        b: &[Value],
        total: bool,
        injective: bool,
        current: &mut Vec<Value>,
        used: &mut [bool],
        out: &mut Vec<Value>,
    ) {
        if i == a.len() {
            out.push(Value::set_from_sorted(current.clone()));
            return;
        }
        if !total {
            go(i + 1, a, b, total, injective, current, used, out);
        }
        for (j, y) in b.iter().enumerate() {
            if injective && used[j] {
                continue;
            }
            used[j] = true;
            current.push(Value::pair(a[i].clone(), y.clone()));
            go(i + 1, a, b, total, injective, current, used, out);
            current.pop();
            used[j] = false;
        }
    }
    go(0, a, b, total, injective, &mut current, &mut used, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atoms(names: &[&str]) -> Vec<Value> {
        names.iter().map(|n| Value::atom(n)).collect()
    }

    #[test]
    fn space_sizes() {
        let a = atoms(&["a", "b"]);
        let b = atoms(&["x", "y", "z"]);
        assert_eq!(function_space(BinOp::TotalFn, &a, &b).unwrap().len(), 9);
        assert_eq!(function_space(BinOp::PartialFn, &a, &b).unwrap().len(), 16);
        // injective partial: 1 + 2*3 + 3*2 = 13
        assert_eq!(function_space(BinOp::PartialInj, &a, &b).unwrap().len(), 13);
        assert_eq!(function_space(BinOp::Relation, &a, &b).unwrap().len(), 64);
        assert_eq!(powerset(&a).unwrap().len(), 4);
    }

    #[test]
    fn limits() {
        let big: Vec<Value> = (0..17).map(Value::Int).collect();
        assert!(matches!(
            powerset(&big),
            Err(EvalError::PowLimit { size: 17, .. })
        ));
        let b: Vec<Value> = (0..10).map(Value::Int).collect();
        assert!(matches!(
            function_space(BinOp::TotalFn, &b, &b),
            Err(EvalError::EnumLimit { .. })
        ));
    }
}
