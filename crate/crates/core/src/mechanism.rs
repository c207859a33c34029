//! The mechanism abstraction and descriptor parsing.

use std::path::Path;
use std::sync::Arc;

use crate::auction::{AuctionMechanism, AuctionRule};
use crate::error::{Error, Result};
use crate::house::{ConstantMechanism, DictatorialStructure, SequentialDictatorship};
use crate::model::{Group, Outcome, Problem, Setting, SettingKind};
use crate::priority::{PriorityMechanism, PriorityRule, TauKind};
use crate::reserves::{ReservesMechanism, ReservesRule};
use crate::vote::{VoteMechanism, VoteRule};

/// A deterministic map from feasible problems to feasible outcomes.
pub trait Mechanism: Send + Sync {
    /// The descriptor string the mechanism was built from.
    fn descriptor(&self) -> &str;

    fn setting(&self) -> &Setting;

    fn evaluate(&self, problem: &Problem) -> Result<Outcome>;

    /// Every restriction to `group` the mechanism can produce when members
    /// keep their reports in `problem` and non-members report anything, as
    /// packed restriction codes. Mechanisms with structure that makes this
    /// cheaper than enumerating counterpart profiles override it.
    fn achievable_fast(&self, _problem: &Problem, _group: Group) -> Option<Result<Vec<u64>>> {
        None
    }
}

pub type MechanismHandle = Arc<dyn Mechanism>;

/// Builds a mechanism from a descriptor such as `da`, `ar:e=2`,
/// `serial:order=0,1,2`, `majority:x=1` or `table:file=path.json`.
pub fn parse_mechanism(descriptor: &str, setting: &Setting) -> Result<MechanismHandle> {
    setting.validate()?;
    let desc = descriptor.trim();
    let (head, rest) = desc.split_once(':').unwrap_or((desc, ""));
    let mismatch = |expected: &str| {
        Err(Error::config(format!(
            "mechanism '{desc}' needs a {expected} setting, got {}",
            setting.name()
        )))
    };
    let handle: MechanismHandle = match (head, setting.kind) {
        ("da" | "da-obj" | "ia" | "ar" | "da-rep", SettingKind::Priority) => {
            let rule = match head {
                "da" => PriorityRule::Da,
                "da-obj" => PriorityRule::DaObjectProposing,
                "ia" => PriorityRule::Ia,
                "ar" => {
                    let e = parse_usize(param(rest, "e", desc)?, desc)?;
                    if e == 0 {
                        return Err(Error::config(
                            "application-rejection period e must be at least 1",
                        ));
                    }
                    PriorityRule::Ar(e)
                }
                _ => PriorityRule::DaRepresent(TauKind::parse(rest)?),
            };
            Arc::new(PriorityMechanism::new(desc, *setting, rule))
        }
        ("da" | "da-obj" | "ia" | "ar" | "da-rep", _) => return mismatch("priority"),
        ("serial" | "fixture", SettingKind::House) => Arc::new(SequentialDictatorship::new(
            desc,
            *setting,
            parse_structure(desc, setting.n)?,
        )),
        ("serial" | "fixture", _) => return mismatch("house"),
        ("constant", SettingKind::House | SettingKind::Priority) => {
            let assign = parse_list(param(rest, "assign", desc)?, desc)?;
            Arc::new(ConstantMechanism::new(
                desc,
                *setting,
                assign.into_iter().map(|x| x as u8).collect(),
            )?)
        }
        ("constant", _) => return mismatch("house or priority"),
        ("fpa" | "apa" | "spa", SettingKind::Auction { .. }) => {
            let rule = match head {
                "fpa" => AuctionRule::FirstPrice,
                "apa" => AuctionRule::AllPay,
                _ => AuctionRule::SecondPrice,
            };
            Arc::new(AuctionMechanism::new(desc, *setting, rule))
        }
        ("fpa" | "apa" | "spa", _) => return mismatch("auction"),
        ("majority" | "dictator" | "veto", SettingKind::Vote) => {
            let rule = match head {
                "majority" => {
                    let x = parse_usize(param(rest, "x", desc)?, desc)?;
                    if x > 1 {
                        return Err(Error::config(format!(
                            "majority outcome x must be 0 or 1, got {x}"
                        )));
                    }
                    VoteRule::Majority(x == 1)
                }
                "dictator" => {
                    let i = parse_usize(param(rest, "i", desc)?, desc)?;
                    if i >= setting.n {
                        return Err(Error::config(format!(
                            "dictator {i} out of range 0..{}",
                            setting.n
                        )));
                    }
                    VoteRule::Dictator(i)
                }
                _ => VoteRule::Veto,
            };
            Arc::new(VoteMechanism::new(desc, *setting, rule)?)
        }
        ("majority" | "dictator" | "veto", _) => return mismatch("vote"),
        ("rsf" | "osf", SettingKind::Reserves(_)) => {
            let rule = if head == "rsf" {
                ReservesRule::ReservedSeatsFirst
            } else {
                ReservesRule::OpenSeatsFirst
            };
            Arc::new(ReservesMechanism::new(desc, *setting, rule))
        }
        ("rsf" | "osf", _) => return mismatch("reserves"),
        ("table", _) => {
            let path = param(rest, "file", desc)?;
            crate::io::load_table_mechanism(desc, setting, Path::new(path))?
        }
        _ => {
            return Err(Error::config(format!(
                "unknown mechanism descriptor '{desc}'"
            )))
        }
    };
    Ok(handle)
}

/// The dictatorial structure named by a `serial:order=…`,
/// `fixture:swap:n=…` or `fixture:vice:n=…` descriptor, for `n` individuals.
pub fn parse_structure(descriptor: &str, n: usize) -> Result<DictatorialStructure> {
    let desc = descriptor.trim();
    let (head, rest) = desc.split_once(':').unwrap_or((desc, ""));
    match head {
        "serial" => {
            let order = parse_list(param(rest, "order", desc)?, desc)?;
            DictatorialStructure::serial(n, order.into_iter().map(|x| x as u8).collect())
        }
        "fixture" => {
            let (name, args) = rest.split_once(':').unwrap_or((rest, ""));
            let k = parse_usize(param(args, "n", desc)?, desc)?;
            if k != n {
                return Err(Error::config(format!(
                    "fixture '{desc}' is for n = {k} but the setting has n = {n}"
                )));
            }
            match name {
                "swap" => DictatorialStructure::swap_fixture(n),
                "vice" => DictatorialStructure::branching_vice(n),
                _ => Err(Error::config(format!(
                    "unknown fixture '{name}' in '{desc}'"
                ))),
            }
        }
        _ => Err(Error::config(format!(
            "'{desc}' does not name a dictatorial structure"
        ))),
    }
}

/// Value of `key=` in a descriptor argument string. The value runs to the
/// end of the string so that comma-separated lists stay intact.
fn param<'a>(rest: &'a str, key: &str, desc: &str) -> Result<&'a str> {
    rest.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| Error::config(format!("descriptor '{desc}' is missing '{key}=<value>'")))
}

fn parse_usize(s: &str, desc: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| {
        Error::config(format!(
            "descriptor '{desc}': '{s}' is not a non-negative integer"
        ))
    })
}

fn parse_list(s: &str, desc: &str) -> Result<Vec<usize>> {
    s.split(',').map(|x| parse_usize(x, desc)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_builtin() {
        let cases = [
            ("da", Setting::priority(3)),
            ("da-obj", Setting::priority(3)),
            ("ia", Setting::priority(3)),
            ("ar:e=2", Setting::priority(3)),
            ("da-rep:ar-2", Setting::priority(3)),
            ("da-rep:identity", Setting::priority(3)),
            ("constant:assign=1,0,2", Setting::house(3)),
            ("serial:order=2,0,1", Setting::house(3)),
            ("fixture:swap:n=4", Setting::house(4)),
            ("fixture:vice:n=5", Setting::house(5)),
            ("fpa", Setting::auction(3, 5)),
            ("spa", Setting::auction(3, 5)),
            ("majority:x=1", Setting::vote(3)),
            ("dictator:i=2", Setting::vote(3)),
            ("veto", Setting::vote(3)),
            (
                "rsf",
                Setting::reserves(4, 3, 1, Group::from_members([0, 1])),
            ),
        ];
        for (d, s) in cases {
            let m = parse_mechanism(d, &s).unwrap_or_else(|e| panic!("{d}: {e}"));
            assert_eq!(m.descriptor(), d);
        }
    }

    #[test]
    fn rejects_bad_descriptors() {
        let s = Setting::priority(3);
        for d in [
            "bogus",
            "ar:e=0",
            "ar",
            "da-rep:xyz",
            "fpa",
            "serial:order=0,1,2",
        ] {
            let e = parse_mechanism(d, &s).err().unwrap();
            assert_eq!(e.exit_code(), 3, "{d}: {e}");
        }
        assert!(parse_mechanism("majority:x=1", &Setting::vote(4)).is_err());
        assert!(parse_mechanism("fixture:swap:n=5", &Setting::house(4)).is_err());
    }
}
