//! Build an FP-tree and print its header table, node chains and prefix paths.

use corrdisc::mining::{build_fp_tree, txn};

fn main() {
    let db = [
        txn(&[1, 2, 5]),
        txn(&[2, 4]),
        txn(&[2, 3]),
        txn(&[1, 2, 4]),
        txn(&[1, 3]),
        txn(&[2, 3]),
        txn(&[1, 3]),
        txn(&[1, 2, 3, 5]),
        txn(&[1, 2, 3]),
    ];
    let tree = build_fp_tree(&db, 2);
    println!("{} nodes (including root)", tree.nodes().len());
    println!("header (descending frequency):");
    for h in tree.header() {
        let chain: Vec<String> = tree
            .chain(h.item)
            .map(|idx| {
                let path: Vec<String> = tree
                    .prefix_path(idx)
                    .iter()
                    .map(|s| s.to_string())
                    .collect();
                format!("<{}>:{}", path.join(" "), tree.node(idx).count)
            })
            .collect();
        println!(
            "  {} freq={} paths {}",
            h.item,
            h.frequency,
            chain.join(" ")
        );
    }
}
