//! Mine frequent itemsets from a handful of consumer sessions and show which
//! services a responder would piggyback for each request.
//!
//!     cargo run --example mine_itemsets [support]

use corrdisc::mining::{
    brute_force_frequent_itemsets, mine_frequent_itemsets, related_support, txn, SupportThreshold,
};
use corrdisc::ServiceId;

fn main() -> anyhow::Result<()> {
    let support: SupportThreshold = std::env::args()
        .nth(1)
        .as_deref()
        .unwrap_or("0.6")
        .parse()?;
    let sessions = vec![
        txn(&[1, 2, 5]),
        txn(&[1, 2]),
        txn(&[1, 2, 3]),
        txn(&[2, 4]),
        txn(&[1, 2, 4, 5]),
    ];
    println!(
        "{} sessions, support {} (min count {})",
        sessions.len(),
        support.fraction(),
        support.min_count(sessions.len())
    );

    let itemsets = mine_frequent_itemsets(&sessions, support);
    for set in &itemsets {
        println!("  {set}");
    }
    assert_eq!(itemsets, brute_force_frequent_itemsets(&sessions, support)?);

    for s in 1..=5 {
        let related: Vec<String> = related_support(ServiceId(s), &itemsets)
            .iter()
            .map(|(id, count)| format!("{id} (support {count})"))
            .collect();
        println!("request for {s} -> piggyback [{}]", related.join(", "));
    }
    Ok(())
}
