//! `pragma solidity` version ranges.

use std::fmt;

/// Compiler version triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Version {
    pub major: u32,
    pub minor: u32,
    pub patch: u32,
}

impl Version {
    pub const fn new(major: u32, minor: u32, patch: u32) -> Self {
        Version {
            major,
            minor,
            patch,
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        let mut parts = text.split('.');
        let major = parts.next()?.parse().ok()?;
        let minor = parts.next().map_or(Some(0), |p| p.parse().ok())?;
        let patch = parts.next().map_or(Some(0), |p| p.parse().ok())?;
        if parts.next().is_some() {
            return None;
        }
        Some(Version::new(major, minor, patch))
    }

    fn next_patch(self) -> Self {
        Version::new(self.major, self.minor, self.patch + 1)
    }

    /// Exclusive upper bound of `^self` (npm semantics, as used by solc).
    fn caret_limit(self) -> Self {
        if self.major > 0 {
            Version::new(self.major + 1, 0, 0)
        } else if self.minor > 0 {
            Version::new(0, self.minor + 1, 0)
        } else {
            self.next_patch()
        }
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.major, self.minor, self.patch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VersionOp {
    Exact,
    Caret,
    Tilde,
    Gt,
    Ge,
    Lt,
    Le,
}

impl VersionOp {
    pub fn symbol(self) -> &'static str {
        match self {
            VersionOp::Exact => "",
            VersionOp::Caret => "^",
            VersionOp::Tilde => "~",
            VersionOp::Gt => ">",
            VersionOp::Ge => ">=",
            VersionOp::Lt => "<",
            VersionOp::Le => "<=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VersionConstraint {
    pub op: VersionOp,
    pub version: Version,
}

/// Conjunction of version constraints, e.g. `>=0.4.22 <0.6.0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VersionRange {
    pub constraints: Vec<VersionConstraint>,
}

/// Compiler versions whose semantics this front end models.
pub const SUPPORTED_MIN: Version = Version::new(0, 4, 22);
pub const SUPPORTED_LIMIT: Version = Version::new(0, 6, 0);

impl VersionRange {
    /// Half-open interval `[lo, hi)` admitted by the range; `hi = None` is unbounded.
    pub fn interval(&self) -> (Version, Option<Version>) {
        let mut lo = Version::new(0, 0, 0);
        let mut hi: Option<Version> = None;
        let mut tighten_hi = |v: Version| {
            hi = Some(hi.map_or(v, |h| h.min(v)));
        };
        for c in &self.constraints {
            let v = c.version;
            match c.op {
                VersionOp::Exact => {
                    lo = lo.max(v);
                    tighten_hi(v.next_patch());
                }
                VersionOp::Caret => {
                    lo = lo.max(v);
                    tighten_hi(v.caret_limit());
                }
                VersionOp::Tilde => {
                    lo = lo.max(v);
                    tighten_hi(Version::new(v.major, v.minor + 1, 0));
                }
                VersionOp::Gt => lo = lo.max(v.next_patch()),
                VersionOp::Ge => lo = lo.max(v),
                VersionOp::Lt => tighten_hi(v),
                VersionOp::Le => tighten_hi(v.next_patch()),
            }
        }
        (lo, hi)
    }

    /// True when some version admitted by the pragma lies in the supported window.
    pub fn is_supported(&self) -> bool {
        let (lo, hi) = self.interval();
        let lo = lo.max(SUPPORTED_MIN);
        let hi = hi.map_or(SUPPORTED_LIMIT, |h| h.min(SUPPORTED_LIMIT));
        lo < hi
    }
}

impl fmt::Display for VersionRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.constraints.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}{}", c.op.symbol(), c.version)?;
        }
        Ok(())
    }
}
