//! Plain-text weight file.
//!
//! ```text
//! PIMENET v1
//! policy <parameter count>
//! scaling_state <n> <lo> <hi> ...
//! scaling_setpoint <lo> <hi>
//! scaling_z <bound>
//! action_scale <v>
//! log_std <v> <lo> <hi>
//! stack main <layers>
//! layer <fan_in> <fan_out> <activation>
//! <fan_out rows of fan_in weights, row-major>
//! <fan_out biases>
//! ...
//! stack z <layers> ...
//! stack trunk <layers> ...
//! value <parameter count>
//! value_scale <v>
//! stack value <layers> ...
//! end
//! ```
//!
//! Floats are written in shortest round-trip form, so a save/load cycle is
//! bitwise lossless.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::dense::{Activation, Dense, Stack};
use super::modular::ModularNet;
use super::policy::GaussianPolicy;
use super::scaling::FeatureScaling;
use super::value::ValueNet;
use crate::{Error, Result};

pub const HEADER: &str = "PIMENET v1";

fn push_floats(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v:e}");
    }
    out.push('\n');
}

fn write_stack(out: &mut String, name: &str, stack: &Stack, params: &[f64]) {
    let _ = writeln!(out, "stack {name} {}", stack.layers.len());
    for l in &stack.layers {
        let _ = writeln!(out, "layer {} {} {}", l.fan_in, l.fan_out, l.activation.name());
        let nw = l.fan_in * l.fan_out;
        for row in params[l.offset..l.offset + nw].chunks_exact(l.fan_in) {
            push_floats(out, row);
        }
        push_floats(out, &params[l.offset + nw..l.offset + l.param_count()]);
    }
}

pub fn encode(policy: &GaussianPolicy, value: &ValueNet) -> String {
    let mut out = String::new();
    let p = policy.params();
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "policy {}", p.len());
    let _ = write!(out, "scaling_state {} ", policy.scaling.state.len());
    let flat: Vec<f64> = policy.scaling.state.iter().flat_map(|&(a, b)| [a, b]).collect();
    push_floats(&mut out, &flat);
    out.push_str("scaling_setpoint ");
    push_floats(&mut out, &[policy.scaling.setpoint.0, policy.scaling.setpoint.1]);
    out.push_str("scaling_z ");
    push_floats(&mut out, &[policy.scaling.z_bound]);
    out.push_str("action_scale ");
    push_floats(&mut out, &[policy.action_scale]);
    out.push_str("log_std ");
    push_floats(&mut out, &[policy.log_std(), policy.log_std_bounds.0, policy.log_std_bounds.1]);
    write_stack(&mut out, "main", &policy.net.main, p);
    write_stack(&mut out, "z", &policy.net.zbranch, p);
    write_stack(&mut out, "trunk", &policy.net.trunk, p);
    let _ = writeln!(out, "value {}", value.param_count());
    out.push_str("value_scale ");
    push_floats(&mut out, &[value.value_scale]);
    write_stack(&mut out, "value", &value.stack, value.params());
    out.push_str("end\n");
    out
}

struct Lines<'a> {
    iter: core::iter::Enumerate<core::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, detail: impl Into<String>) -> Error {
        Error::Parse { line: self.line, detail: detail.into() }
    }

    fn next_tokens(&mut self) -> Result<Vec<&'a str>> {
        for (i, l) in self.iter.by_ref() {
            self.line = i + 1;
            let t: Vec<&str> = l.split_whitespace().collect();
            if !t.is_empty() {
                return Ok(t);
            }
        }
        Err(self.err("unexpected end of file"))
    }

    /// Next line, which must start with `key`; returns the remaining tokens.
    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let t = self.next_tokens()?;
        if t[0] != key {
            return Err(self.err(alloc::format!("expected `{key}`, found `{}`", t[0])));
        }
        Ok(t[1..].to_vec())
    }

    fn floats(&self, toks: &[&str], n: usize) -> Result<Vec<f64>> {
        if toks.len() != n {
            return Err(self.err(alloc::format!("expected {n} values, found {}", toks.len())));
        }
        toks.iter()
            .map(|t| t.parse::<f64>().map_err(|_| self.err(alloc::format!("bad number `{t}`"))))
            .collect()
    }

    fn keyed_floats(&mut self, key: &str, n: usize) -> Result<Vec<f64>> {
        let toks = self.keyed(key)?;
        self.floats(&toks, n)
    }

    fn usize(&self, tok: Option<&&str>) -> Result<usize> {
        tok.and_then(|t| t.parse().ok()).ok_or_else(|| self.err("expected an integer"))
    }

    fn stack(&mut self, name: &str, offset: usize, params: &mut Vec<f64>) -> Result<Stack> {
        let head = self.keyed("stack")?;
        if head.first() != Some(&name) {
            return Err(self.err(alloc::format!("expected stack `{name}`")));
        }
        let n_layers = self.usize(head.get(1))?;
        let mut layers = Vec::with_capacity(n_layers);
        let mut at = offset;
        for _ in 0..n_layers {
            let spec = self.keyed("layer")?;
            let fan_in = self.usize(spec.first())?;
            let fan_out = self.usize(spec.get(1))?;
            let activation = spec
                .get(2)
                .and_then(|a| Activation::from_name(a))
                .ok_or_else(|| self.err("unknown activation"))?;
            if fan_in == 0 || fan_out == 0 {
                return Err(self.err("empty layer"));
            }
            for _ in 0..fan_out {
                let row = self.next_tokens()?;
                params.extend(self.floats(&row, fan_in)?);
            }
            let bias = self.next_tokens()?;
            params.extend(self.floats(&bias, fan_out)?);
            let layer = Dense { fan_in, fan_out, offset: at, activation };
            at += layer.param_count();
            layers.push(layer);
        }
        Ok(Stack::from_layers(layers))
    }
}

/// Parse a weight file, validating shapes and parameter counts.
pub fn decode(text: &str) -> Result<(GaussianPolicy, ValueNet)> {
    let mut r = Lines { iter: text.lines().enumerate(), line: 0 };
    let head = r.next_tokens()?;
    if head.join(" ") != HEADER {
        return Err(r.err(alloc::format!("missing `{HEADER}` header")));
    }
    let declared = r.keyed("policy")?;
    let n_policy = r.usize(declared.first())?;
    let st = r.keyed("scaling_state")?;
    let n_state = r.usize(st.first())?;
    let flat = r.floats(&st[1..], 2 * n_state)?;
    let sp = r.keyed_floats("scaling_setpoint", 2)?;
    let zb = r.keyed_floats("scaling_z", 1)?;
    let scaling = FeatureScaling {
        state: flat.chunks_exact(2).map(|c| (c[0], c[1])).collect(),
        setpoint: (sp[0], sp[1]),
        z_bound: zb[0],
    };
    scaling.validate()?;
    let action_scale = r.keyed_floats("action_scale", 1)?[0];
    let ls = r.keyed_floats("log_std", 3)?;

    let mut params = Vec::new();
    let main = r.stack("main", 0, &mut params)?;
    let zbranch = r.stack("z", main.end(), &mut params)?;
    let trunk = r.stack("trunk", zbranch.end(), &mut params)?;
    let net = ModularNet::from_stacks(main, zbranch, trunk)?;
    params.push(ls[0]);
    if params.len() != n_policy {
        return Err(Error::Structural(alloc::format!(
            "policy declares {n_policy} parameters but layers hold {}",
            params.len()
        )));
    }
    let policy = GaussianPolicy::from_parts(net, scaling.clone(), action_scale, (ls[1], ls[2]), params)?;

    let declared = r.keyed("value")?;
    let n_value = r.usize(declared.first())?;
    let value_scale = r.keyed_floats("value_scale", 1)?[0];
    let mut vparams = Vec::new();
    let stack = r.stack("value", 0, &mut vparams)?;
    if vparams.len() != n_value {
        return Err(Error::Structural(alloc::format!(
            "value network declares {n_value} parameters but layers hold {}",
            vparams.len()
        )));
    }
    let value = ValueNet::from_parts(stack, scaling, value_scale, vparams)?;
    r.keyed("end")?;
    Ok((policy, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuralnet::NetSizes;
    use crate::rng::substream;
    use rand::Rng;

    fn nets(seed: u64) -> (GaussianPolicy, ValueNet) {
        let scaling = FeatureScaling {
            state: alloc::vec![(0.0, 25.0), (0.0, 25.0)],
            setpoint: (1.0, 12.0),
            z_bound: 25.0,
        };
        let mut rng = substream(seed, &[]);
        let mut p = GaussianPolicy::new(scaling.clone(), &NetSizes::default(), 5.0, -0.69, (-8.0, 1.0), &mut rng).unwrap();
        // Perturb so the zero-initialized output layer is exercised too.
        let noisy: Vec<f64> = p.params().iter().map(|v| v + 1e-3 * (rng.random::<f64>() - 0.5)).collect();
        p.set_params(&noisy).unwrap();
        let v = ValueNet::new(scaling, &[64, 64], 100.0, &mut rng).unwrap();
        (p, v)
    }

    #[test]
    fn round_trip_is_bitwise() {
        let (p, v) = nets(4);
        let text = encode(&p, &v);
        assert!(text.starts_with("PIMENET v1\n"));
        let (p2, v2) = decode(&text).unwrap();
        assert_eq!(p, p2);
        assert_eq!(v, v2);
        assert!(p.params().iter().zip(p2.params()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let (p, v) = nets(5);
        let text = encode(&p, &v);
        let cut = &text[..text.len() / 2];
        assert!(decode(cut).is_err());
    }

    #[test]
    fn wrong_count_is_rejected() {
        let (p, v) = nets(6);
        let text = encode(&p, &v).replacen(
            &alloc::format!("policy {}", p.param_count()),
            &alloc::format!("policy {}", p.param_count() + 1),
            1,
        );
        assert!(matches!(decode(&text), Err(Error::Structural(_))));
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(matches!(decode("PIMENET v2\n"), Err(Error::Parse { line: 1, .. })));
    }
}
