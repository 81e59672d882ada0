//! Text serialization: one arc per line as
//! `src<TAB>dst<TAB>ilabel<TAB>olabel<TAB>weight[<TAB>tag]`, final states as
//! `state<TAB>weight`. Labels are written as symbols from the companion
//! tables. The start state's lines come first, so it is the source of the
//! first line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fst::semiring::Semiring;
use crate::fst::symbols::{SymbolTable, Symbols};
use crate::fst::wfst::{Arc, StateId, Wfst};

pub fn to_text<W: Semiring>(f: &Wfst<W>) -> String {
    let mut out = String::new();
    let Some(start) = f.start() else {
        return out;
    };
    if f.arcs(start).is_empty() && !f.is_final(start) {
        // Accepts nothing; written as the empty machine.
        return out;
    }
    let order = std::iter::once(start).chain(f.states().filter(|&s| s != start));
    for s in order {
        for a in f.arcs(s) {
            let i = f.isyms().symbol(a.ilabel).expect("validated label");
            let o = f.osyms().symbol(a.olabel).expect("validated label");
            let _ = write!(out, "{s}\t{}\t{i}\t{o}\t{}", a.nextstate, a.weight.value());
            if let Some(tag) = a.tag {
                let _ = write!(out, "\t{tag}");
            }
            out.push('\n');
        }
        if f.is_final(s) {
            let _ = writeln!(out, "{s}\t{}", f.final_weight(s).value());
        }
    }
    out
}

pub fn parse_text<W: Semiring>(text: &str, isyms: Symbols, osyms: Symbols) -> Result<Wfst<W>> {
    let mut b = Wfst::builder(isyms.clone(), osyms.clone());
    let ensure = |b: &mut crate::fst::wfst::WfstBuilder<W>, s: StateId| {
        while b.num_states() <= s as usize {
            b.add_state();
        }
    };
    let num = |line: usize, field: &str| -> Result<f64> {
        field
            .parse::<f64>()
            .map_err(|_| Error::parse(line, format!("bad weight {field:?}")))
    };
    let state = |line: usize, field: &str| -> Result<StateId> {
        field
            .parse::<StateId>()
            .map_err(|_| Error::parse(line, format!("bad state {field:?}")))
    };
    let mut first = true;
    for (n, line) in text.lines().enumerate() {
        let ln = n + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let src = state(ln, fields[0])?;
        ensure(&mut b, src);
        if first {
            b.set_start(src);
            first = false;
        }
        match fields.len() {
            1 => b.set_final(src, W::one()),
            2 => b.set_final(src, W::new(num(ln, fields[1])?)),
            5 | 6 => {
                let dst = state(ln, fields[1])?;
                ensure(&mut b, dst);
                let il = isyms
                    .get(fields[2])
                    .ok_or_else(|| Error::parse(ln, format!("unknown input symbol {:?}", fields[2])))?;
                let ol = osyms
                    .get(fields[3])
                    .ok_or_else(|| Error::parse(ln, format!("unknown output symbol {:?}", fields[3])))?;
                let mut arc = Arc::new(il, ol, W::new(num(ln, fields[4])?), dst);
                if let Some(tag) = fields.get(5) {
                    arc.tag = Some(
                        tag.parse()
                            .map_err(|_| Error::parse(ln, format!("bad tag {tag:?}")))?,
                    );
                }
                b.add_arc(src, arc);
            }
            k => return Err(Error::parse(ln, format!("expected 1, 2, 5 or 6 fields, got {k}"))),
        }
    }
    b.build()
}

/// Writes `<stem>.fst`, `<stem>.isyms` and `<stem>.osyms`.
pub fn write_fst<W: Semiring>(f: &Wfst<W>, stem: &Path) -> Result<()> {
    fs::write(stem.with_extension("fst"), to_text(f))?;
    fs::write(stem.with_extension("isyms"), f.isyms().to_text())?;
    fs::write(stem.with_extension("osyms"), f.osyms().to_text())?;
    Ok(())
}

pub fn read_fst<W: Semiring>(stem: &Path) -> Result<Wfst<W>> {
    let isyms = SymbolTable::parse_text(&fs::read_to_string(stem.with_extension("isyms"))?)?;
    let osyms = SymbolTable::parse_text(&fs::read_to_string(stem.with_extension("osyms"))?)?;
    let (isyms, osyms) = if isyms == osyms {
        let shared = isyms.into_shared();
        (shared.clone(), shared)
    } else {
        (isyms.into_shared(), osyms.into_shared())
    };
    parse_text(&fs::read_to_string(stem.with_extension("fst"))?, isyms, osyms)
}
