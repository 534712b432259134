use std::fmt::Write;

use quartic_zeta_core::zeta::{Computation, Step};
use serde::Serialize;

/// Predicted split/full cost ratios for steps 2, 3 and 4.
const PREDICTED: [(usize, f64); 3] = [(2, 0.45), (3, 0.36), (4, 0.30)];

#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub step1: f64,
    pub step2: f64,
    pub step3: f64,
    pub step4: f64,
    pub step5: f64,
}

impl Timings {
    pub fn set(&mut self, s: Step, ms: f64) {
        let ms = (ms * 1e3).round() / 1e3;
        match s {
            Step::Bezout => self.step1 = ms,
            Step::Lift => self.step2 = ms,
            Step::Reduce => self.step3 = ms,
            Step::Norm => self.step4 = ms,
            Step::Reconstruct => self.step5 = ms,
        }
    }

    fn get(&self, k: usize) -> f64 {
        [self.step1, self.step2, self.step3, self.step4, self.step5][k - 1]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CountEntry {
    pub r: usize,
    pub engine: i128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<i128>,
    #[serde(rename = "match", skip_serializing_if = "Option::is_none")]
    pub matches: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Bench {
    pub split_ms: Timings,
    pub full_ms: Timings,
    /// `split / full` for steps 2..4 next to the model prediction.
    pub ratios: Vec<BenchRatio>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRatio {
    pub step: usize,
    pub measured: Option<f64>,
    pub predicted: f64,
}

impl Bench {
    pub fn new(split_ms: Timings, full_ms: Timings) -> Self {
        let ratios = PREDICTED
            .iter()
            .map(|&(step, predicted)| {
                let full = full_ms.get(step);
                let measured = (full > 0.0).then(|| (split_ms.get(step) / full * 1e3).round() / 1e3);
                BenchRatio { step, measured, predicted }
            })
            .collect();
        Bench { split_ms, full_ms, ratios }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Orbits {
    #[serde(rename = "C")]
    pub c: Vec<usize>,
    #[serde(rename = "E")]
    pub e: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
#[allow(non_snake_case)]
pub struct Precisions {
    pub N1: u32,
    pub N2: u32,
    pub N3: u32,
    pub N4: u32,
    pub N5: u32,
}

#[derive(Clone, Debug, Serialize)]
#[allow(non_snake_case)]
pub struct Report {
    pub case: u8,
    pub delta_C: usize,
    pub delta_E: usize,
    pub orbits: Orbits,
    pub precisions: Precisions,
    pub P_E: Vec<i128>,
    pub P_2: Vec<i128>,
    pub P_V: Vec<i128>,
    pub P: Vec<i128>,
    pub counts: Vec<CountEntry>,
    pub timings_ms: Timings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench: Option<Bench>,
}

fn descending(v: &[i128]) -> Vec<i128> {
    v.iter().rev().copied().collect()
}

/// `X^6 - 2X^5 + 7` style rendering of a descending coefficient list.
fn render(desc: &[i128]) -> String {
    let d = desc.len().saturating_sub(1);
    let mut s = String::new();
    for (k, &c) in desc.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let e = d - k;
        let mag = c.unsigned_abs();
        if s.is_empty() {
            if c < 0 {
                s.push('-');
            }
        } else {
            s.push_str(if c < 0 { " - " } else { " + " });
        }
        match (e, mag) {
            (0, m) => write!(s, "{m}").unwrap(),
            (_, 1) => {}
            (_, m) => write!(s, "{m}").unwrap(),
        }
        match e {
            0 => {}
            1 => s.push('X'),
            _ => write!(s, "X^{e}").unwrap(),
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

impl Report {
    pub fn new(comp: &Computation, counts: Vec<CountEntry>, timings: Timings, bench: Option<Bench>) -> Self {
        let inf = &comp.curve.inf;
        let pr = &comp.profile;
        let w = &comp.weil;
        Report {
            case: comp.curve.case.number(),
            delta_C: inf.delta_c,
            delta_E: inf.delta_e,
            orbits: Orbits { c: inf.orbits_c.clone(), e: inf.orbits_e.clone() },
            precisions: Precisions { N1: pr.n1, N2: pr.n2, N3: pr.n3, N4: pr.n4, N5: pr.n5 },
            P_E: descending(&w.p_e),
            P_2: descending(&w.p_2),
            P_V: descending(&w.p_v),
            P: descending(&w.p),
            counts,
            timings_ms: timings,
            bench,
        }
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        let pr = &self.precisions;
        writeln!(s, "case {}  delta_C = {}  delta_E = {}", self.case, self.delta_C, self.delta_E).unwrap();
        writeln!(s, "orbits at infinity: C {:?}  E {:?}", self.orbits.c, self.orbits.e).unwrap();
        writeln!(s, "precisions: N1 = {} N2 = {} N3 = {} N4 = {} N5 = {}", pr.N1, pr.N2, pr.N3, pr.N4, pr.N5).unwrap();
        writeln!(s, "P_E = {}", render(&self.P_E)).unwrap();
        writeln!(s, "P_2 = {}", render(&self.P_2)).unwrap();
        writeln!(s, "P_V = {}", render(&self.P_V)).unwrap();
        writeln!(s, "P   = {}", render(&self.P)).unwrap();
        for c in &self.counts {
            write!(s, "#C(F_q^{}) = {}", c.r, c.engine).unwrap();
            match (c.oracle, c.matches) {
                (Some(o), Some(true)) => writeln!(s, "  enumeration {o}  match").unwrap(),
                (Some(o), _) => writeln!(s, "  enumeration {o}  MISMATCH").unwrap(),
                _ => writeln!(s).unwrap(),
            }
        }
        let t = &self.timings_ms;
        writeln!(
            s,
            "timings (ms): step1 {:.1}  step2 {:.1}  step3 {:.1}  step4 {:.1}  step5 {:.1}",
            t.step1, t.step2, t.step3, t.step4, t.step5
        )
        .unwrap();
        if let Some(b) = &self.bench {
            writeln!(s, "\nbench        split (ms)    full (ms)   ratio  predicted").unwrap();
            for k in 1..=5 {
                let (sp, fu) = (b.split_ms.get(k), b.full_ms.get(k));
                write!(s, "  step{k}  {sp:>14.1} {fu:>12.1}").unwrap();
                match b.ratios.iter().find(|r| r.step == k) {
                    Some(r) => {
                        let m = r.measured.map_or("-".to_string(), |m| format!("{m:.2}"));
                        writeln!(s, "  {m:>6}  {:>9.2}", r.predicted).unwrap();
                    }
                    None => writeln!(s).unwrap(),
                }
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::render;

    #[test]
    fn renders_polynomials() {
        assert_eq!(render(&[1, -2, 1, 12, 7, -98, 343]), "X^6 - 2X^5 + X^4 + 12X^3 + 7X^2 - 98X + 343");
        assert_eq!(render(&[1, 0, 7]), "X^2 + 7");
        assert_eq!(render(&[1]), "1");
        assert_eq!(render(&[-1, 1]), "-X + 1");
    }
}
