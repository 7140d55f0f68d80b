//! Known inclusions between the classes, used as a consistency oracle on reports.

use super::{Class, ClassReport, Verdict};

/// `premises ⊂ conclusion`: all premises supported ⇒ the conclusion must not be refuted.
#[derive(Debug, Clone, Copy)]
pub struct Implication {
    pub premises: &'static [Class],
    pub conclusion: Class,
    pub source: &'static str,
}

const fn imp(premises: &'static [Class], conclusion: Class, source: &'static str) -> Implication {
    Implication {
        premises,
        conclusion,
        source,
    }
}

const KNOWN: &str = "standard class relations";
const MAIN: &str = "J ∩ K ⊂ OS ∩ K ⊂ K*";

pub const IMPLICATIONS: [Implication; 15] = [
    imp(&[Class::S], Class::L, KNOWN),
    imp(&[Class::L], Class::K, KNOWN),
    imp(&[Class::S], Class::J, KNOWN),
    imp(&[Class::D], Class::J, KNOWN),
    imp(&[Class::J], Class::OS, KNOWN),
    imp(&[Class::S], Class::OS, KNOWN),
    imp(&[Class::D], Class::K, KNOWN),
    imp(&[Class::J, Class::L], Class::S, "S = J ∩ L"),
    imp(&[Class::OS], Class::OL, KNOWN),
    imp(&[Class::L], Class::OL, KNOWN),
    imp(&[Class::D], Class::DK1, "D bounds F̄ below by a power"),
    imp(&[Class::DK1], Class::Kstar, "powers dominate exponentials"),
    imp(&[Class::Kstar], Class::K, KNOWN),
    imp(&[Class::J, Class::K], Class::Kstar, MAIN),
    imp(&[Class::OS, Class::K], Class::Kstar, MAIN),
];

/// Violated implications; refuted or inconclusive premises never trigger.
pub fn lattice_check(report: &ClassReport) -> Vec<String> {
    IMPLICATIONS
        .iter()
        .filter(|i| {
            i.premises.iter().all(|&c| report.verdict(c) == Verdict::Supported)
                && report.verdict(i.conclusion) == Verdict::Refuted
        })
        .map(|i| {
            let lhs: Vec<String> = i.premises.iter().map(|c| c.to_string()).collect();
            format!(
                "{} supported but {} refuted ({} ⊂ {}: {})",
                lhs.join(" and "),
                i.conclusion,
                lhs.join(" ∩ "),
                i.conclusion,
                i.source
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::ClassVerdict;

    fn report(vs: &[(Class, Verdict)]) -> ClassReport {
        ClassReport {
            name: "t".into(),
            verdicts: vs
                .iter()
                .map(|&(class, verdict)| ClassVerdict {
                    class,
                    verdict,
                    reason: String::new(),
                    evidence: Vec::new(),
                    scale: String::new(),
                })
                .collect(),
            lattice_flags: Vec::new(),
            series: Vec::new(),
            profile: Vec::new(),
        }
    }

    #[test]
    fn main_inclusion_is_flagged() {
        let r = report(&[
            (Class::J, Verdict::Supported),
            (Class::K, Verdict::Supported),
            (Class::Kstar, Verdict::Refuted),
            (Class::OS, Verdict::Inconclusive),
        ]);
        let v = lattice_check(&r);
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].contains(MAIN));
    }

    #[test]
    fn inconclusive_never_triggers() {
        let all: Vec<_> = Class::ALL.iter().map(|&c| (c, Verdict::Inconclusive)).collect();
        assert!(lattice_check(&report(&all)).is_empty());
        let refuted: Vec<_> = Class::ALL.iter().map(|&c| (c, Verdict::Refuted)).collect();
        assert!(lattice_check(&report(&refuted)).is_empty());
    }
}
