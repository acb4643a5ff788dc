//! Minimal VCD reader producing per-signal change timelines.
//!
//! Scopes are flattened into dot-separated names (`top.u0.sig`). Signals can
//! also be looked up by their final path component when that component is
//! unambiguous across the whole dump.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::value::{Bit, Value};

#[derive(Debug, Error)]
pub enum VcdError {
    #[error("vcd parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("vcd line {line}: {message}")]
    Unsupported { line: usize, message: String },
}

#[derive(Debug, Clone)]
pub struct SignalTimeline {
    pub width: u32,
    /// Strictly increasing (time, value) change points.
    pub changes: Vec<(u64, Value)>,
}

impl SignalTimeline {
    /// Value in effect at `time`: last change at or before `time`, else all-x.
    pub fn value_at(&self, time: u64) -> Value {
        match self.changes.partition_point(|(t, _)| *t <= time) {
            0 => Value::all_x(self.width),
            n => self.changes[n - 1].1.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub timescale: Option<String>,
    pub end_time: u64,
    signals: BTreeMap<String, SignalTimeline>,
    /// Final path component -> full name, for components unique in the dump.
    short_names: HashMap<String, String>,
}

impl Trace {
    /// Resolve a signal by full dotted path or unambiguous short name.
    pub fn resolve(&self, name: &str) -> Option<&str> {
        if self.signals.contains_key(name) {
            return Some(self.signals.get_key_value(name)?.0);
        }
        self.short_names.get(name).map(String::as_str)
    }

    pub fn timeline(&self, name: &str) -> Option<&SignalTimeline> {
        let full = self.resolve(name)?;
        self.signals.get(full)
    }

    pub fn signal_names(&self) -> impl Iterator<Item = &str> {
        self.signals.keys().map(String::as_str)
    }

    /// Build a trace directly from timelines; used by tests and generators.
    pub fn from_timelines(signals: BTreeMap<String, SignalTimeline>) -> Trace {
        let end_time = signals
            .values()
            .flat_map(|t| t.changes.last().map(|(t, _)| *t))
            .max()
            .unwrap_or(0);
        let short_names = build_short_names(&signals);
        Trace {
            timescale: None,
            end_time,
            signals,
            short_names,
        }
    }
}

fn build_short_names(signals: &BTreeMap<String, SignalTimeline>) -> HashMap<String, String> {
    let mut counts: HashMap<&str, u32> = HashMap::new();
    for full in signals.keys() {
        let short = full.rsplit('.').next().unwrap_or(full);
        *counts.entry(short).or_default() += 1;
    }
    let mut map = HashMap::new();
    for full in signals.keys() {
        let short = full.rsplit('.').next().unwrap_or(full);
        if counts[short] == 1 && short != full {
            map.insert(short.to_string(), full.clone());
        }
    }
    map
}

struct VarDef {
    width: u32,
    /// Names sharing this id code (VCD aliases).
    names: Vec<String>,
}

pub fn parse_vcd(src: &str) -> Result<Trace, VcdError> {
    let mut lines = src.lines().enumerate().peekable();
    let mut timescale = None;
    let mut scope_stack: Vec<String> = Vec::new();
    let mut vars: HashMap<String, VarDef> = HashMap::new();
    let mut in_definitions = true;

    // Header section.
    while in_definitions {
        let Some((idx, line)) = lines.next() else {
            return Err(VcdError::Parse {
                line: 0,
                message: "missing $enddefinitions".to_string(),
            });
        };
        let lineno = idx + 1;
        let mut words = line.split_whitespace().peekable();
        let Some(first) = words.next() else { continue };
        match first {
            "$timescale" => {
                let mut parts: Vec<&str> = words.take_while(|w| *w != "$end").collect();
                if parts.is_empty() {
                    // Multi-line form: body then $end on following lines.
                    for (_, l) in lines.by_ref() {
                        let l = l.trim();
                        if l == "$end" {
                            break;
                        }
                        if !l.is_empty() {
                            parts.push(l);
                        }
                    }
                    timescale = Some(parts.join(" "));
                } else {
                    timescale = Some(parts.join(" "));
                }
            }
            "$scope" => {
                words.next(); // scope kind
                let name = words.next().ok_or_else(|| VcdError::Parse {
                    line: lineno,
                    message: "$scope without a name".to_string(),
                })?;
                scope_stack.push(name.to_string());
            }
            "$upscope" => {
                scope_stack.pop();
            }
            "$var" => {
                let kind = words.next().unwrap_or("");
                if matches!(kind, "real" | "realtime" | "event") {
                    return Err(VcdError::Unsupported {
                        line: lineno,
                        message: format!("variable kind `{kind}` is not supported"),
                    });
                }
                let width: u32 = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .filter(|w| *w > 0)
                    .ok_or_else(|| VcdError::Parse {
                        line: lineno,
                        message: "$var with invalid width".to_string(),
                    })?;
                let code = words
                    .next()
                    .ok_or_else(|| VcdError::Parse {
                        line: lineno,
                        message: "$var without id code".to_string(),
                    })?
                    .to_string();
                let name = words.next().ok_or_else(|| VcdError::Parse {
                    line: lineno,
                    message: "$var without a name".to_string(),
                })?;
                // Strip an attached range like sig[7:0] or sig [7:0].
                let base_name = name.split('[').next().unwrap_or(name);
                let full = if scope_stack.is_empty() {
                    base_name.to_string()
                } else {
                    format!("{}.{base_name}", scope_stack.join("."))
                };
                let entry = vars.entry(code).or_insert(VarDef {
                    width,
                    names: Vec::new(),
                });
                if entry.width != width {
                    return Err(VcdError::Parse {
                        line: lineno,
                        message: format!("id code reused with different widths for `{full}`"),
                    });
                }
                entry.names.push(full);
            }
            "$enddefinitions" => {
                in_definitions = false;
            }
            "$date" | "$version" | "$comment" => {
                // Skip to $end, possibly on a later line.
                if !line.contains("$end") {
                    for (_, l) in lines.by_ref() {
                        if l.contains("$end") {
                            break;
                        }
                    }
                }
            }
            _ => {}
        }
    }

    let mut timelines: HashMap<String, Vec<(u64, Value)>> = HashMap::new();
    for def in vars.values() {
        for n in &def.names {
            timelines.insert(n.clone(), Vec::new());
        }
    }
    let mut current_time = 0u64;
    let mut end_time = 0u64;

    let record = |vars: &HashMap<String, VarDef>,
                      timelines: &mut HashMap<String, Vec<(u64, Value)>>,
                      code: &str,
                      value: Value,
                      time: u64,
                      lineno: usize|
     -> Result<(), VcdError> {
        let def = vars.get(code).ok_or_else(|| VcdError::Parse {
            line: lineno,
            message: format!("value change for undeclared id code `{code}`"),
        })?;
        if value.width() > def.width {
            return Err(VcdError::Parse {
                line: lineno,
                message: format!(
                    "value wider than declared ({} > {}) for id code `{code}`",
                    value.width(),
                    def.width
                ),
            });
        }
        let value = extend_to_width(&value, def.width);
        for name in &def.names {
            let tl = timelines.get_mut(name).expect("timeline exists");
            match tl.last_mut() {
                // Same-time rewrite: last value wins, keep times strictly increasing.
                Some((t, v)) if *t == time => *v = value.clone(),
                _ => tl.push((time, value.clone())),
            }
        }
        Ok(())
    };

    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let first = words.next().unwrap();
        if let Some(ts) = first.strip_prefix('#') {
            let t: u64 = ts.parse().map_err(|_| VcdError::Parse {
                line: lineno,
                message: format!("invalid timestamp `#{ts}`"),
            })?;
            if t < current_time {
                return Err(VcdError::Parse {
                    line: lineno,
                    message: format!("timestamp #{t} goes backwards"),
                });
            }
            current_time = t;
            end_time = end_time.max(t);
            continue;
        }
        match first {
            "$dumpvars" | "$dumpall" | "$dumpon" | "$dumpoff" | "$end" => continue,
            "$comment" => {
                continue;
            }
            _ => {}
        }
        let mut chars = first.chars();
        let head = chars.next().unwrap();
        match head {
            '0' | '1' | 'x' | 'X' | 'z' | 'Z' => {
                let bit = Bit::from_char(head).unwrap();
                let code: String = chars.collect();
                if code.is_empty() {
                    return Err(VcdError::Parse {
                        line: lineno,
                        message: "scalar change without id code".to_string(),
                    });
                }
                record(
                    &vars,
                    &mut timelines,
                    &code,
                    Value::new(vec![bit]),
                    current_time,
                    lineno,
                )?;
            }
            'b' | 'B' => {
                let digits: String = chars.collect();
                let code = words.next().ok_or_else(|| VcdError::Parse {
                    line: lineno,
                    message: "vector change without id code".to_string(),
                })?;
                let mut bits = Vec::with_capacity(digits.len());
                // VCD writes MSB first; our storage is LSB first.
                for c in digits.chars().rev() {
                    let bit = Bit::from_char(c).ok_or_else(|| VcdError::Parse {
                        line: lineno,
                        message: format!("invalid vector digit `{c}`"),
                    })?;
                    bits.push(bit);
                }
                if bits.is_empty() {
                    return Err(VcdError::Parse {
                        line: lineno,
                        message: "vector change with no digits".to_string(),
                    });
                }
                record(
                    &vars,
                    &mut timelines,
                    code,
                    Value::new(bits),
                    current_time,
                    lineno,
                )?;
            }
            'r' | 'R' => {
                return Err(VcdError::Unsupported {
                    line: lineno,
                    message: "real value changes are not supported".to_string(),
                });
            }
            other => {
                return Err(VcdError::Parse {
                    line: lineno,
                    message: format!("unrecognized dump line starting with `{other}`"),
                });
            }
        }
    }

    let mut signals = BTreeMap::new();
    let mut widths: HashMap<&str, u32> = HashMap::new();
    for def in vars.values() {
        for n in &def.names {
            widths.insert(n, def.width);
        }
    }
    for (name, changes) in timelines {
        let width = widths[name.as_str()];
        signals.insert(name, SignalTimeline { width, changes });
    }
    let short_names = build_short_names(&signals);
    Ok(Trace {
        timescale,
        end_time,
        signals,
        short_names,
    })
}

/// VCD left-extension: pad with 0 unless the written MSB is x/z, which extends.
fn extend_to_width(value: &Value, width: u32) -> Value {
    if value.width() >= width {
        return value.clone();
    }
    let msb = value.bits()[value.bits().len() - 1];
    let fill = match msb {
        Bit::X => Bit::X,
        Bit::Z => Bit::Z,
        _ => Bit::Zero,
    };
    let mut bits = value.bits().to_vec();
    bits.resize(width as usize, fill);
    Value::new(bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
$timescale 1ns $end
$scope module top $end
$var wire 1 ! clk $end
$var wire 8 \" data [7:0] $end
$upscope $end
$enddefinitions $end
$dumpvars
0!
bxxxxxxxx \"
$end
#5
1!
b1010 \"
#10
0!
#15
1!
";

    #[test]
    fn parses_scalars_and_vectors() {
        let trace = parse_vcd(SMALL).unwrap();
        let clk = trace.timeline("top.clk").unwrap();
        assert_eq!(
            clk.changes.iter().map(|(t, _)| *t).collect::<Vec<_>>(),
            vec![0, 5, 10, 15]
        );
        let data = trace.timeline("data").unwrap();
        assert_eq!(data.width, 8);
        // b1010 zero-extends to 8 bits.
        assert_eq!(data.value_at(7).to_u64(), Some(0b1010));
        assert!(data.value_at(0).has_unknown());
        assert_eq!(trace.end_time, 15);
    }

    #[test]
    fn value_before_first_change_is_x() {
        let trace = parse_vcd(
            "$var wire 1 ! sig $end\n$enddefinitions $end\n#5\n1!\n",
        )
        .unwrap();
        let tl = trace.timeline("sig").unwrap();
        assert!(tl.value_at(4).has_unknown());
        assert_eq!(tl.value_at(5).to_u64(), Some(1));
    }

    #[test]
    fn short_name_resolution_requires_uniqueness() {
        let src = "\
$scope module a $end
$var wire 1 ! sig $end
$upscope $end
$scope module b $end
$var wire 1 \" sig $end
$var wire 1 # only $end
$upscope $end
$enddefinitions $end
";
        let trace = parse_vcd(src).unwrap();
        assert!(trace.resolve("sig").is_none());
        assert_eq!(trace.resolve("b.only"), Some("b.only"));
        assert_eq!(trace.resolve("only"), Some("b.only"));
    }

    #[test]
    fn aliases_share_changes() {
        let src = "\
$scope module top $end
$var wire 1 ! clk $end
$var wire 1 ! clk_mirror $end
$upscope $end
$enddefinitions $end
#0
1!
";
        let trace = parse_vcd(src).unwrap();
        assert_eq!(
            trace.timeline("clk_mirror").unwrap().value_at(0).to_u64(),
            Some(1)
        );
    }

    #[test]
    fn rejects_backwards_time_and_real_values() {
        let bad_time = "$var wire 1 ! s $end\n$enddefinitions $end\n#10\n#5\n";
        assert!(matches!(
            parse_vcd(bad_time),
            Err(VcdError::Parse { .. })
        ));
        let real = "$var real 64 ! v $end\n$enddefinitions $end\n";
        assert!(matches!(parse_vcd(real), Err(VcdError::Unsupported { .. })));
    }

    #[test]
    fn x_extension_for_vectors() {
        let src = "$var wire 4 ! v $end\n$enddefinitions $end\n#0\nbx1 !\n";
        let trace = parse_vcd(src).unwrap();
        let v = trace.timeline("v").unwrap().value_at(0);
        assert_eq!(format!("{v}"), "xxx1");
    }

    #[test]
    fn same_time_rewrite_keeps_last_value() {
        let src = "$var wire 1 ! s $end\n$enddefinitions $end\n#0\n0!\n1!\n";
        let trace = parse_vcd(src).unwrap();
        let tl = trace.timeline("s").unwrap();
        assert_eq!(tl.changes.len(), 1);
        assert_eq!(tl.value_at(0).to_u64(), Some(1));
    }
}
