use std::fmt;
use std::str::FromStr;

use super::{ShirorekhaResult, SpineResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShirorekhaKind {
    Full,
    Partial,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpineKind {
    EndSpine,
    MidSpine,
    NoSpine,
}

impl ShirorekhaKind {
    pub const ALL: [ShirorekhaKind; 3] = [Self::Full, Self::Partial, Self::None];

    fn slug(self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::Partial => "partial",
            Self::None => "none",
        }
    }

    fn title(self) -> &'static str {
        match self {
            Self::Full => "Total shirorekha",
            Self::Partial => "Partial shirorekha",
            Self::None => "No shirorekha",
        }
    }
}

impl SpineKind {
    pub const ALL: [SpineKind; 3] = [Self::EndSpine, Self::MidSpine, Self::NoSpine];

    fn slug(self) -> &'static str {
        match self {
            Self::EndSpine => "end",
            Self::MidSpine => "mid",
            Self::NoSpine => "none",
        }
    }

    fn title(self) -> &'static str {
        match self {
            Self::EndSpine => "End spine",
            Self::MidSpine => "Mid spine",
            Self::NoSpine => "No spine",
        }
    }
}

/// Structural group of a glyph. A spine requires a headline, so only 7 of the 9
/// combinations can be constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StructuralClass {
    shirorekha: ShirorekhaKind,
    spine: SpineKind,
}

impl StructuralClass {
    pub fn new(shirorekha: ShirorekhaKind, spine: SpineKind) -> Result<Self> {
        if shirorekha == ShirorekhaKind::None && spine != SpineKind::NoSpine {
            return Err(Error::InconsistentInputs);
        }
        Ok(Self { shirorekha, spine })
    }

    pub fn shirorekha(&self) -> ShirorekhaKind {
        self.shirorekha
    }

    pub fn spine(&self) -> SpineKind {
        self.spine
    }

    /// Every constructible group, in a fixed order.
    pub fn all() -> Vec<StructuralClass> {
        ShirorekhaKind::ALL
            .iter()
            .flat_map(|&s| SpineKind::ALL.iter().map(move |&p| (s, p)))
            .filter_map(|(s, p)| Self::new(s, p).ok())
            .collect()
    }

    /// Short identifier used in file names and CSV columns, e.g. `full_end`.
    pub fn slug(&self) -> String {
        format!("{}_{}", self.shirorekha.slug(), self.spine.slug())
    }

    /// Human-readable group name, e.g. `Total shirorekha, End spine`.
    pub fn title(&self) -> String {
        format!("{}, {}", self.shirorekha.title(), self.spine.title())
    }
}

impl fmt::Display for StructuralClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.slug())
    }
}

impl FromStr for StructuralClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once('_')
            .ok_or_else(|| Error::MalformedManifest(format!("bad group {s:?}")))?;
        let shiro = ShirorekhaKind::ALL
            .into_iter()
            .find(|k| k.slug() == a)
            .ok_or_else(|| Error::MalformedManifest(format!("bad shirorekha kind {a:?}")))?;
        let spine = SpineKind::ALL
            .into_iter()
            .find(|k| k.slug() == b)
            .ok_or_else(|| Error::MalformedManifest(format!("bad spine kind {b:?}")))?;
        Self::new(shiro, spine)
    }
}

/// Combines the two detector outcomes.
pub fn classify_group(shiro: &ShirorekhaResult, spine: &SpineResult) -> Result<StructuralClass> {
    StructuralClass::new(shiro.kind, spine.kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seven_reachable_groups() {
        let all = StructuralClass::all();
        assert_eq!(all.len(), 7);
        assert!(all
            .iter()
            .all(|g| g.shirorekha() != ShirorekhaKind::None || g.spine() == SpineKind::NoSpine));
    }

    #[test]
    fn names_match_report_rows() {
        let g = StructuralClass::new(ShirorekhaKind::Full, SpineKind::EndSpine).unwrap();
        assert_eq!(g.title(), "Total shirorekha, End spine");
        let g = StructuralClass::new(ShirorekhaKind::Partial, SpineKind::EndSpine).unwrap();
        assert_eq!(g.title(), "Partial shirorekha, End spine");
    }

    #[test]
    fn spine_without_headline_is_rejected() {
        assert!(matches!(
            StructuralClass::new(ShirorekhaKind::None, SpineKind::EndSpine),
            Err(Error::InconsistentInputs)
        ));
    }

    #[test]
    fn slug_round_trip() {
        for g in StructuralClass::all() {
            assert_eq!(g.slug().parse::<StructuralClass>().unwrap(), g);
        }
        assert!("none_end".parse::<StructuralClass>().is_err());
        assert!("total".parse::<StructuralClass>().is_err());
    }
}
