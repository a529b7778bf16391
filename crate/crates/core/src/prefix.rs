//! IPv4 prefix algebra: canonical CIDR blocks, containment, and the two
//! textual notations used by the config grammar (`a.b.c.d/n` and
//! `a.b.c.d mask m.m.m.m`).

use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Errors produced when constructing or parsing a [`Prefix`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrefixError {
    #[error("invalid mask length {0}, must be 0..=32")]
    InvalidMaskLen(u8),
    #[error("address {address} has host bits set below /{masklen}")]
    HostBitsSet { address: Ipv4Addr, masklen: u8 },
    #[error("dotted mask {0} is not contiguous")]
    NonContiguousMask(Ipv4Addr),
    #[error("malformed IPv4 address '{0}'")]
    MalformedAddress(String),
    #[error("malformed prefix '{0}'")]
    Malformed(String),
}

/// A canonical IPv4 CIDR block: host bits below the mask are always zero.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prefix {
    address: Ipv4Addr,
    masklen: u8,
}

impl Prefix {
    /// Builds a prefix, rejecting non-canonical input (host bits set).
    pub fn new(address: Ipv4Addr, masklen: u8) -> Result<Self, PrefixError> {
        if masklen > 32 {
            return Err(PrefixError::InvalidMaskLen(masklen));
        }
        let bits = u32::from(address);
        if bits & !mask_bits(masklen) != 0 {
            return Err(PrefixError::HostBitsSet { address, masklen });
        }
        Ok(Prefix { address, masklen })
    }

    /// Builds a prefix by zeroing host bits. Parsing never uses this;
    /// it exists for mutation operators that derive new blocks.
    pub fn canonicalize(address: Ipv4Addr, masklen: u8) -> Result<Self, PrefixError> {
        if masklen > 32 {
            return Err(PrefixError::InvalidMaskLen(masklen));
        }
        let bits = u32::from(address) & mask_bits(masklen);
        Ok(Prefix {
            address: Ipv4Addr::from(bits),
            masklen,
        })
    }

    pub fn address(&self) -> Ipv4Addr {
        self.address
    }

    pub fn masklen(&self) -> u8 {
        self.masklen
    }

    /// True iff `inner`'s address range is a subset of `self`'s range:
    /// `self.masklen <= inner.masklen` and the first `self.masklen` bits agree.
    pub fn contains(&self, inner: &Prefix) -> bool {
        self.masklen <= inner.masklen
            && (u32::from(self.address) ^ u32::from(inner.address)) & mask_bits(self.masklen) == 0
    }

    /// True iff `addr` falls inside this block.
    pub fn contains_address(&self, addr: Ipv4Addr) -> bool {
        (u32::from(self.address) ^ u32::from(addr)) & mask_bits(self.masklen) == 0
    }

    /// The dotted-decimal netmask (`/24` -> `255.255.255.0`).
    pub fn dotted_mask(&self) -> Ipv4Addr {
        Ipv4Addr::from(mask_bits(self.masklen))
    }

    /// Renders as `a.b.c.d mask m.m.m.m`, the notation `network` stanzas use.
    pub fn to_mask_notation(&self) -> String {
        format!("{} mask {}", self.address, self.dotted_mask())
    }

    /// A host address inside the block, suitable for forwarding probes.
    /// Skips the all-zeros network address when the block is wide enough.
    pub fn representative(&self) -> Ipv4Addr {
        if self.masklen >= 31 {
            self.address
        } else {
            Ipv4Addr::from(u32::from(self.address) | 1)
        }
    }

    /// Probe addresses sampling each quarter sub-block, so any sub-prefix
    /// one or two bits more specific than this block covers at least one
    /// of them. Used to build reachability matrices.
    pub fn probe_addresses(&self) -> Vec<Ipv4Addr> {
        let base = u32::from(self.address);
        match self.masklen {
            32 => vec![self.address],
            31 => vec![Ipv4Addr::from(base), Ipv4Addr::from(base | 1)],
            30 => (0..4u32).map(|i| Ipv4Addr::from(base + i)).collect(),
            len => {
                let quarter = 1u32 << (30 - len);
                (0..4u32)
                    .map(|i| Ipv4Addr::from(base + i * quarter + 1))
                    .collect()
            }
        }
    }

    /// Converts a dotted netmask to a mask length, rejecting masks whose
    /// set bits are not a contiguous high run.
    pub fn mask_to_len(mask: Ipv4Addr) -> Result<u8, PrefixError> {
        let bits = u32::from(mask);
        let len = bits.leading_ones() as u8;
        if mask_bits(len) != bits {
            return Err(PrefixError::NonContiguousMask(mask));
        }
        Ok(len)
    }

    /// Parses either `a.b.c.d/n` or `a.b.c.d mask m.m.m.m`.
    /// Non-canonical input (host bits set) is rejected, not repaired.
    pub fn parse(text: &str) -> Result<Self, PrefixError> {
        let text = text.trim();
        if let Some((addr, len)) = text.split_once('/') {
            let address = parse_addr(addr)?;
            let masklen: u8 = len
                .parse()
                .map_err(|_| PrefixError::Malformed(text.to_string()))?;
            return Prefix::new(address, masklen);
        }
        let mut parts = text.split_whitespace();
        match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(addr), Some("mask"), Some(mask), None) => {
                let address = parse_addr(addr)?;
                let masklen = Prefix::mask_to_len(parse_addr(mask)?)?;
                Prefix::new(address, masklen)
            }
            _ => Err(PrefixError::Malformed(text.to_string())),
        }
    }
}

/// Parses an IPv4 address, mapping failures to [`PrefixError`].
pub fn parse_addr(text: &str) -> Result<Ipv4Addr, PrefixError> {
    Ipv4Addr::from_str(text).map_err(|_| PrefixError::MalformedAddress(text.to_string()))
}

fn mask_bits(masklen: u8) -> u32 {
    if masklen == 0 {
        0
    } else {
        u32::MAX << (32 - masklen as u32)
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.address, self.masklen)
    }
}

// Debug mirrors Display; prefixes read better as `208.65.152.0/22`.
impl fmt::Debug for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Prefix {
    type Err = PrefixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Prefix::parse(s)
    }
}

impl Serialize for Prefix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Prefix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Prefix::parse(&text).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str) -> Prefix {
        Prefix::parse(text).unwrap()
    }

    #[test]
    fn parses_slash_notation() {
        let pfx = p("208.65.152.0/22");
        assert_eq!(pfx.address(), Ipv4Addr::new(208, 65, 152, 0));
        assert_eq!(pfx.masklen(), 22);
    }

    #[test]
    fn parses_default_route() {
        assert_eq!(p("0.0.0.0/0").masklen(), 0);
    }

    #[test]
    fn parses_mask_notation() {
        assert_eq!(p("208.65.152.0 mask 255.255.252.0"), p("208.65.152.0/22"));
        assert_eq!(p("208.65.152.0 mask 255.255.255.0"), p("208.65.152.0/24"));
    }

    #[test]
    fn mask_length_table_matches_popcount() {
        // Independent oracle: a contiguous mask's length equals its popcount.
        for len in 0..=32u8 {
            let mask = Ipv4Addr::from(mask_bits(len));
            assert_eq!(Prefix::mask_to_len(mask).unwrap(), len);
            assert_eq!(u32::from(mask).count_ones() as u8, len);
        }
    }

    #[test]
    fn rejects_noncontiguous_mask() {
        assert!(matches!(
            Prefix::parse("10.0.0.0 mask 255.0.255.0"),
            Err(PrefixError::NonContiguousMask(_))
        ));
    }

    #[test]
    fn rejects_host_bits() {
        assert!(matches!(
            Prefix::parse("208.65.152.1/22"),
            Err(PrefixError::HostBitsSet { .. })
        ));
        // Not silently canonicalized.
        assert!(Prefix::new(Ipv4Addr::new(10, 0, 0, 1), 24).is_err());
    }

    #[test]
    fn rejects_bad_masklen() {
        assert!(matches!(
            Prefix::parse("10.0.0.0/33"),
            Err(PrefixError::InvalidMaskLen(33))
        ));
    }

    #[test]
    fn canonicalize_zeroes_host_bits() {
        let pfx = Prefix::canonicalize(Ipv4Addr::new(10, 0, 0, 77), 24).unwrap();
        assert_eq!(pfx, p("10.0.0.0/24"));
    }

    #[test]
    fn containment_paper_pair() {
        assert!(p("208.65.152.0/22").contains(&p("208.65.153.0/24")));
        assert!(!p("208.65.152.0/24").contains(&p("208.65.152.0/22")));
    }

    #[test]
    fn containment_reflexive() {
        let pfx = p("192.168.0.0/16");
        assert!(pfx.contains(&pfx));
    }

    #[test]
    fn containment_matches_range_oracle() {
        // Range-arithmetic oracle over all block pairs at masklens 20..=26
        // inside a /19: inner range subset <=> contains().
        let base = u32::from(Ipv4Addr::new(208, 65, 128, 0));
        let mut blocks = Vec::new();
        for len in 20..=26u8 {
            let size = 1u32 << (32 - len);
            let mut start = base;
            while start < base + (1 << 13) {
                blocks.push((start, len, size));
                start += size;
            }
        }
        for &(a_start, a_len, a_size) in &blocks {
            for &(b_start, b_len, b_size) in &blocks {
                let outer = Prefix::new(Ipv4Addr::from(a_start), a_len).unwrap();
                let inner = Prefix::new(Ipv4Addr::from(b_start), b_len).unwrap();
                let range_subset = a_start <= b_start
                    && (b_start as u64 + b_size as u64) <= (a_start as u64 + a_size as u64);
                assert_eq!(
                    outer.contains(&inner),
                    range_subset,
                    "mismatch for {outer} vs {inner}"
                );
            }
        }
    }

    #[test]
    fn probe_addresses_cover_quarters() {
        let pfx = p("208.65.152.0/22");
        let probes = pfx.probe_addresses();
        assert_eq!(probes.len(), 4);
        for sub_len in [23u8, 24u8] {
            let step = 1u32 << (32 - sub_len);
            let mut start = u32::from(pfx.address());
            while pfx.contains_address(Ipv4Addr::from(start)) {
                let sub = Prefix::new(Ipv4Addr::from(start), sub_len).unwrap();
                assert!(
                    probes.iter().any(|a| sub.contains_address(*a)),
                    "no probe inside {sub}"
                );
                match start.checked_add(step) {
                    Some(next) => start = next,
                    None => break,
                }
            }
        }
    }

    #[test]
    fn serde_round_trip() {
        let pfx = p("208.65.152.0/22");
        let json = serde_json::to_string(&pfx).unwrap();
        assert_eq!(json, "\"208.65.152.0/22\"");
        assert_eq!(serde_json::from_str::<Prefix>(&json).unwrap(), pfx);
    }
}
