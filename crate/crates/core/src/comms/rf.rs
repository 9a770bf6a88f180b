//! Short-range radio link with a shared-key authentication tag.
//!
//! Packets are `payload ‖ HMAC-SHA256(key, payload)[..16]`. The tag
//! authenticates the sender; the payload itself travels in the clear.

use hmac::{Hmac, KeyInit, Mac};
use serde::{Deserialize, Serialize};
use sha2::Sha256;

pub const KEY_LEN: usize = 16;
pub const TAG_LEN: usize = 16;

type HmacSha256 = Hmac<Sha256>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfLinkSpec {
    pub max_range: f64,
    /// Key held by the receiver.
    pub key: [u8; KEY_LEN],
    pub frequency_label: String,
}

impl Default for RfLinkSpec {
    fn default() -> Self {
        Self {
            max_range: 2_000.0,
            key: [0x2b; KEY_LEN],
            frequency_label: "868 MHz".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    OutOfRange,
    KeyMismatch,
}

impl DropReason {
    pub fn name(self) -> &'static str {
        match self {
            DropReason::OutOfRange => "out_of_range",
            DropReason::KeyMismatch => "key_mismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RfOutcome {
    Delivered(Vec<u8>),
    Dropped(DropReason),
}

fn mac(key: &[u8; KEY_LEN]) -> HmacSha256 {
    <HmacSha256 as KeyInit>::new_from_slice(key).expect("HMAC accepts any key length")
}

/// Appends the truncated tag.
pub fn seal(payload: &[u8], key: &[u8; KEY_LEN]) -> Vec<u8> {
    let mut m = mac(key);
    m.update(payload);
    let tag = m.finalize().into_bytes();
    let mut out = payload.to_vec();
    out.extend_from_slice(&tag[..TAG_LEN]);
    out
}

/// Verifies and strips the tag.
pub fn open(packet: &[u8], key: &[u8; KEY_LEN]) -> Option<Vec<u8>> {
    if packet.len() < TAG_LEN {
        return None;
    }
    let (payload, tag) = packet.split_at(packet.len() - TAG_LEN);
    let mut m = mac(key);
    m.update(payload);
    m.verify_truncated_left(tag).ok()?;
    Some(payload.to_vec())
}

/// Sends `payload` keyed with `sender_key` from one planar point to another.
pub fn rf_transmit(
    payload: &[u8],
    sender_key: &[u8; KEY_LEN],
    link: &RfLinkSpec,
    sender: (f64, f64),
    receiver: (f64, f64),
) -> RfOutcome {
    let distance = (receiver.0 - sender.0).hypot(receiver.1 - sender.1);
    if !(distance <= link.max_range) {
        return RfOutcome::Dropped(DropReason::OutOfRange);
    }
    let packet = seal(payload, sender_key);
    match open(&packet, &link.key) {
        Some(p) => RfOutcome::Delivered(p),
        None => RfOutcome::Dropped(DropReason::KeyMismatch),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delivered_at_zero_distance() {
        let l = RfLinkSpec::default();
        assert_eq!(
            rf_transmit(b"hello", &l.key, &l, (0.0, 0.0), (0.0, 0.0)),
            RfOutcome::Delivered(b"hello".to_vec())
        );
    }

    #[test]
    fn range_boundary() {
        let l = RfLinkSpec::default();
        assert!(matches!(rf_transmit(b"x", &l.key, &l, (0.0, 0.0), (2000.0, 0.0)), RfOutcome::Delivered(_)));
        assert_eq!(
            rf_transmit(b"x", &l.key, &l, (0.0, 0.0), (2001.0, 0.0)),
            RfOutcome::Dropped(DropReason::OutOfRange)
        );
    }

    #[test]
    fn wrong_key_is_a_distinct_drop() {
        let l = RfLinkSpec::default();
        let other = [0u8; KEY_LEN];
        assert_eq!(
            rf_transmit(b"x", &other, &l, (0.0, 0.0), (10.0, 0.0)),
            RfOutcome::Dropped(DropReason::KeyMismatch)
        );
        assert_eq!(DropReason::KeyMismatch.name(), "key_mismatch");
    }

    #[test]
    fn tampered_packet_fails() {
        let k = [7u8; KEY_LEN];
        let mut p = seal(b"payload", &k);
        assert_eq!(p.len(), 7 + TAG_LEN);
        p[0] ^= 1;
        assert_eq!(open(&p, &k), None);
    }

    #[test]
    fn hmac_known_answer() {
        // RFC 4231 test case 2, truncated to 16 bytes
        let mut m = <HmacSha256 as KeyInit>::new_from_slice(b"Jefe").unwrap();
        m.update(b"what do ya want for nothing?");
        let tag = m.finalize().into_bytes();
        assert_eq!(hex::encode(&tag[..16]), "5bdcc146bf60754e6a042426089575c7");
    }
}
