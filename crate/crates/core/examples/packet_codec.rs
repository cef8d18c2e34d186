//! Encode a request and a reply to wire bytes and decode them again.

use corrdisc::node::{MsgId, Packet, Srep, Sreq, WireRecord};
use corrdisc::{NodeId, ServiceId};

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn main() -> anyhow::Result<()> {
    let msg_id = MsgId {
        origin: NodeId(4),
        seq: 17,
    };
    let sreq = Packet::Sreq(Sreq {
        msg_id,
        session_seq: 2,
        requested: ServiceId(3),
        ttl: 8,
    });
    let srep = Packet::Srep(Srep {
        in_reply_to: msg_id,
        responder: NodeId(11),
        destination: NodeId(4),
        answer: WireRecord {
            service: ServiceId(3),
            provider: NodeId(11),
        },
        related: vec![WireRecord {
            service: ServiceId(7),
            provider: NodeId(12),
        }],
        ttl: 8,
    });
    for p in [sreq, srep] {
        let bytes = p.encode()?;
        println!("{} bytes: {}", bytes.len(), hex(&bytes));
        assert_eq!(Packet::decode(&bytes)?, p);
        println!(
            "truncated -> {:?}",
            Packet::decode(&bytes[..bytes.len() - 1])
        );
    }
    Ok(())
}
