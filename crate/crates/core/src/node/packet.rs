//! SREQ/SREP wire format. All integers are big-endian.
//!
//! ```text
//! SREQ (14 bytes)
//!   0      type = 0x01
//!   1..3   origin
//!   3..7   seq
//!   7..11  session_seq
//!   11..13 requested service
//!   13     ttl
//!
//! SREP (13 + 4k bytes)
//!   0      type = 0x02
//!   1..3   responder
//!   3..5   destination
//!   5..7   in_reply_to origin
//!   7..11  in_reply_to seq
//!   11     ttl
//!   12     record count k, 1..=33
//!   13..   k × (service u16, provider u16); record 0 is the answer
//! ```

use thiserror::Error;

use crate::{NodeId, ServiceId};

pub const SREQ_TYPE: u8 = 0x01;
pub const SREP_TYPE: u8 = 0x02;
pub const SREQ_LEN: usize = 14;
pub const SREP_HEADER_LEN: usize = 13;
pub const RECORD_LEN: usize = 4;
pub const MAX_WIRE_RELATED: usize = 32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("empty buffer")]
    Empty,
    #[error("unknown packet type {0:#04x}")]
    BadType(u8),
    #[error("truncated packet: need {needed} bytes, have {have}")]
    Truncated { needed: usize, have: usize },
    #[error("reply carries no answer record")]
    NoRecords,
    #[error("reply carries {0} related records, limit is 32")]
    TooManyRelated(usize),
    #[error("{0} trailing bytes after packet")]
    Trailing(usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("reply with {0} related records cannot be encoded (limit 32)")]
pub struct EncodeError(pub usize);

/// Network-wide unique message id: originating node plus its sequence number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MsgId {
    pub origin: NodeId,
    pub seq: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sreq {
    pub msg_id: MsgId,
    pub session_seq: u32,
    pub requested: ServiceId,
    pub ttl: u8,
}

impl Sreq {
    pub fn origin(&self) -> NodeId {
        self.msg_id.origin
    }
}

/// A `(service, provider)` pair as carried on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WireRecord {
    pub service: ServiceId,
    pub provider: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Srep {
    pub in_reply_to: MsgId,
    pub responder: NodeId,
    pub destination: NodeId,
    pub answer: WireRecord,
    pub related: Vec<WireRecord>,
    pub ttl: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Packet {
    Sreq(Sreq),
    Srep(Srep),
}

impl Packet {
    pub fn encoded_len(&self) -> usize {
        match self {
            Packet::Sreq(_) => SREQ_LEN,
            Packet::Srep(r) => SREP_HEADER_LEN + RECORD_LEN * (1 + r.related.len()),
        }
    }

    pub fn encode(&self) -> Result<Vec<u8>, EncodeError> {
        let mut buf = Vec::with_capacity(self.encoded_len());
        match self {
            Packet::Sreq(q) => {
                buf.push(SREQ_TYPE);
                buf.extend_from_slice(&q.msg_id.origin.0.to_be_bytes());
                buf.extend_from_slice(&q.msg_id.seq.to_be_bytes());
                buf.extend_from_slice(&q.session_seq.to_be_bytes());
                buf.extend_from_slice(&q.requested.0.to_be_bytes());
                buf.push(q.ttl);
            }
            Packet::Srep(r) => {
                if r.related.len() > MAX_WIRE_RELATED {
                    return Err(EncodeError(r.related.len()));
                }
                buf.push(SREP_TYPE);
                buf.extend_from_slice(&r.responder.0.to_be_bytes());
                buf.extend_from_slice(&r.destination.0.to_be_bytes());
                buf.extend_from_slice(&r.in_reply_to.origin.0.to_be_bytes());
                buf.extend_from_slice(&r.in_reply_to.seq.to_be_bytes());
                buf.push(r.ttl);
                buf.push((1 + r.related.len()) as u8);
                for rec in std::iter::once(&r.answer).chain(&r.related) {
                    buf.extend_from_slice(&rec.service.0.to_be_bytes());
                    buf.extend_from_slice(&rec.provider.0.to_be_bytes());
                }
            }
        }
        Ok(buf)
    }

    pub fn decode(buf: &[u8]) -> Result<Packet, DecodeError> {
        let ty = *buf.first().ok_or(DecodeError::Empty)?;
        match ty {
            SREQ_TYPE => {
                let b = exact(buf, SREQ_LEN)?;
                Ok(Packet::Sreq(Sreq {
                    msg_id: MsgId {
                        origin: NodeId(be16(&b[1..3])),
                        seq: be32(&b[3..7]),
                    },
                    session_seq: be32(&b[7..11]),
                    requested: ServiceId(be16(&b[11..13])),
                    ttl: b[13],
                }))
            }
            SREP_TYPE => {
                if buf.len() < SREP_HEADER_LEN {
                    return Err(DecodeError::Truncated {
                        needed: SREP_HEADER_LEN,
                        have: buf.len(),
                    });
                }
                let k = buf[12] as usize;
                if k == 0 {
                    return Err(DecodeError::NoRecords);
                }
                if k - 1 > MAX_WIRE_RELATED {
                    return Err(DecodeError::TooManyRelated(k - 1));
                }
                let b = exact(buf, SREP_HEADER_LEN + RECORD_LEN * k)?;
                let mut records =
                    b[SREP_HEADER_LEN..]
                        .chunks_exact(RECORD_LEN)
                        .map(|c| WireRecord {
                            service: ServiceId(be16(&c[0..2])),
                            provider: NodeId(be16(&c[2..4])),
                        });
                let answer = records.next().expect("k >= 1");
                Ok(Packet::Srep(Srep {
                    responder: NodeId(be16(&b[1..3])),
                    destination: NodeId(be16(&b[3..5])),
                    in_reply_to: MsgId {
                        origin: NodeId(be16(&b[5..7])),
                        seq: be32(&b[7..11]),
                    },
                    ttl: b[11],
                    answer,
                    related: records.collect(),
                }))
            }
            other => Err(DecodeError::BadType(other)),
        }
    }
}

fn exact(buf: &[u8], len: usize) -> Result<&[u8], DecodeError> {
    match buf.len() {
        n if n < len => Err(DecodeError::Truncated {
            needed: len,
            have: n,
        }),
        n if n > len => Err(DecodeError::Trailing(n - len)),
        _ => Ok(buf),
    }
}

fn be16(b: &[u8]) -> u16 {
    u16::from_be_bytes([b[0], b[1]])
}

fn be32(b: &[u8]) -> u32 {
    u32::from_be_bytes([b[0], b[1], b[2], b[3]])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sreq() -> Packet {
        Packet::Sreq(Sreq {
            msg_id: MsgId {
                origin: NodeId(1),
                seq: 0,
            },
            session_seq: 0,
            requested: ServiceId(5),
            ttl: 4,
        })
    }

    fn srep(related: usize) -> Packet {
        let rec = |s: u16| WireRecord {
            service: ServiceId(s),
            provider: NodeId(s + 100),
        };
        Packet::Srep(Srep {
            in_reply_to: MsgId {
                origin: NodeId(1),
                seq: 7,
            },
            responder: NodeId(3),
            destination: NodeId(1),
            answer: rec(5),
            related: (0..related as u16).map(|i| rec(10 + i)).collect(),
            ttl: 8,
        })
    }

    #[test]
    fn sreq_bytes() {
        let bytes = sreq().encode().unwrap();
        assert_eq!(bytes, [1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 5, 4]);
        assert_eq!(Packet::decode(&bytes).unwrap(), sreq());
    }

    #[test]
    fn srep_length() {
        let p = srep(2);
        let bytes = p.encode().unwrap();
        assert_eq!(bytes.len(), SREP_HEADER_LEN + 3 * RECORD_LEN);
        assert_eq!(bytes.len(), 25);
        assert_eq!(bytes[12], 3);
        assert_eq!(Packet::decode(&bytes).unwrap(), p);
    }

    #[test]
    fn decode_errors() {
        assert_eq!(Packet::decode(&[]), Err(DecodeError::Empty));
        assert_eq!(Packet::decode(&[9, 0, 0]), Err(DecodeError::BadType(9)));
        let bytes = sreq().encode().unwrap();
        assert_eq!(
            Packet::decode(&bytes[..10]),
            Err(DecodeError::Truncated {
                needed: 14,
                have: 10
            })
        );
        let mut long = bytes.clone();
        long.push(0);
        assert_eq!(Packet::decode(&long), Err(DecodeError::Trailing(1)));

        let mut rep = srep(1).encode().unwrap();
        rep[12] = 0;
        assert_eq!(Packet::decode(&rep), Err(DecodeError::NoRecords));
        rep[12] = 34;
        assert_eq!(Packet::decode(&rep), Err(DecodeError::TooManyRelated(33)));
        rep[12] = 3;
        assert!(matches!(
            Packet::decode(&rep),
            Err(DecodeError::Truncated { .. })
        ));
    }

    #[test]
    fn related_limit() {
        assert!(srep(32).encode().is_ok());
        assert_eq!(srep(33).encode(), Err(EncodeError(33)));
    }
}
