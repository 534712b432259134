//! The JSON curve description `{p, n, modulus?, g: [a0, a1, a2], h: [b0..b4]}`.

use quartic_zeta_core::field::Gf;
use quartic_zeta_core::CurveInput;
use serde_json::Value;

fn int_at(v: &Value, path: &str) -> Result<u64, String> {
    match v.as_u64() {
        Some(x) => Ok(x),
        None => Err(format!("{path}: expected a nonnegative integer, found {v}")),
    }
}

/// A coefficient: an integer when `n = 1`, else a length-`n` vector of
/// integers (coefficients in the generator `t`, low degree first).
fn coeff(v: &Value, p: u64, n: usize, path: &str) -> Result<Vec<u64>, String> {
    let digits: Vec<u64> = match v {
        Value::Array(items) => {
            if items.len() != n {
                return Err(format!("{path}: expected {n} components, found {}", items.len()));
            }
            items.iter().enumerate().map(|(k, x)| int_at(x, &format!("{path}[{k}]"))).collect::<Result<_, _>>()?
        }
        Value::Number(_) if n == 1 => vec![int_at(v, path)?],
        _ => {
            return Err(if n == 1 {
                format!("{path}: expected an integer, found {v}")
            } else {
                format!("{path}: expected a vector of {n} integers, found {v}")
            })
        }
    };
    if let Some(k) = digits.iter().position(|&d| d >= p) {
        return Err(format!("{path}: component {} is not in 0..{p}", digits[k]));
    }
    Ok(digits)
}

fn coeff_list(obj: &serde_json::Map<String, Value>, key: &str, len: usize, p: u64, n: usize) -> Result<Vec<Vec<u64>>, String> {
    let v = obj.get(key).ok_or_else(|| format!("missing field \"{key}\""))?;
    let items = v.as_array().ok_or_else(|| format!("{key}: expected an array of {len} coefficients"))?;
    if items.len() != len {
        return Err(format!("{key}: expected {len} coefficients, found {}", items.len()));
    }
    items.iter().enumerate().map(|(k, x)| coeff(x, p, n, &format!("{key}[{k}]"))).collect()
}

pub fn parse_curve(text: &str) -> Result<CurveInput, String> {
    let doc: Value = serde_json::from_str(text).map_err(|e| format!("malformed JSON at line {}, column {}: {e}", e.line(), e.column()))?;
    let obj = doc.as_object().ok_or("top level: expected an object")?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "p" | "n" | "modulus" | "g" | "h") {
            return Err(format!("unknown field \"{key}\""));
        }
    }
    let p = int_at(obj.get("p").ok_or("missing field \"p\"")?, "p")?;
    let n = int_at(obj.get("n").ok_or("missing field \"n\"")?, "n")?;
    if n == 0 || n > 64 {
        return Err(format!("n: extension degree {n} out of range"));
    }
    let n = n as usize;
    let modulus = match obj.get("modulus") {
        None | Some(Value::Null) => None,
        Some(Value::Array(items)) => {
            Some(items.iter().enumerate().map(|(k, x)| int_at(x, &format!("modulus[{k}]"))).collect::<Result<Vec<_>, _>>()?)
        }
        Some(v) => return Err(format!("modulus: expected an array, found {v}")),
    };
    let fq = Gf::new(p, n, modulus.as_deref()).map_err(|e| e.to_string())?;
    let g = coeff_list(obj, "g", 3, p, n)?;
    let h = coeff_list(obj, "h", 5, p, n)?;
    let g: [Vec<u64>; 3] = std::array::from_fn(|k| fq.from_coeffs(&g[k]));
    let h: [Vec<u64>; 5] = std::array::from_fn(|k| fq.from_coeffs(&h[k]));
    CurveInput::new(fq, g, h).map_err(|e| e.to_string())
}
