//! Composing networks and the JSON format.

use euaf::gadgets::{identity_widen_net, square_net};
use euaf::Network;

fn main() {
    let sq = square_net();
    let padded = Network::compose(&identity_widen_net(1.0, 2).unwrap(), &sq).unwrap();
    println!("square then two identity layers: width {} depth {}, value at 0.6 = {}", padded.width(), padded.depth(), padded.eval1(0.6));
    let json = sq.to_json_pretty().unwrap();
    println!("{json}");
    let back = Network::from_json(&json).unwrap();
    assert_eq!(back, sq);
    println!("round trip exact: {}", back == sq);
}
