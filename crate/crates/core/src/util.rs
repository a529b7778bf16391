//! Small shared helpers.

/// 64-bit FNV-1a over arbitrary bytes, hex encoded. Used for content
/// hashes in records and manifests; not cryptographic.
pub fn fnv64_hex(bytes: &[u8]) -> String {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    for byte in bytes {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(PRIME);
    }
    format!("{hash:016x}")
}
