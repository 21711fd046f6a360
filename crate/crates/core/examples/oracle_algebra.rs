//! Black-box sparse matrix oracles: row/column queries, combinators, and
//! query counting.

use nalgebra::DMatrix;
use oscwalk::oracle::Oracle;

fn main() {
    // 4-cycle with a weighted chord
    let t = Oracle::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0), (0, 2, 0.5)]);
    println!("dim = {}, degree bound = {}", t.dim(), t.row_degree());

    for (w, x) in t.query_row(0).unwrap() {
        println!("T[0,{w}] = {x}");
    }

    let shifted = t.sum(&Oracle::scaled_identity(4, 6.0)).unwrap();
    let squared = shifted.product(&shifted).unwrap();
    println!("\n(T + 6I)^2 row 0:");
    for (w, x) in squared.query_row(0).unwrap() {
        println!("  [0,{w}] = {x}");
    }

    // one product row costs at most d+1 underlying queries
    shifted.reset_and_read_counter();
    let _ = squared.query_row(1).unwrap();
    println!("\nproduct row used {} shifted-oracle queries", shifted.queries());

    let dense = squared.dense().unwrap();
    let direct = {
        let td = t.dense().unwrap() + DMatrix::identity(4, 4) * 6.0;
        &td * &td
    };
    println!("max |oracle - dense| = {:e}", (dense - direct).amax());
}
