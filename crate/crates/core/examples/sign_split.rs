//! Sign-split embedding: a mixed-sign symmetric matrix becomes a
//! non-negative operator on a doubled index set, and antisymmetric states
//! evolve exactly as under the original.

use oscwalk::oracle::Oracle;
use oscwalk::sign_split::{embed_operator, embed_vector, project_back, split_pos_neg};

fn main() {
    let m = Oracle::from_edges(3, &[(0, 1, 1.5), (1, 2, -2.0), (0, 2, 0.25)]);
    let (pos, neg) = split_pos_neg(&m);
    let doubled = embed_operator(&pos, &neg).unwrap();

    println!("doubled operator (all entries >= 0):");
    let d = doubled.dense().unwrap();
    for i in 0..6 {
        let row: Vec<String> = (0..6).map(|j| format!("{:5.2}", d[(i, j)])).collect();
        println!("  {}", row.join(" "));
    }

    // (x, -x) under the doubled operator = (Mx, -Mx)
    let x = vec![1.0, -0.5, 2.0];
    let z = embed_vector(&x);
    let mut out = vec![0.0; 6];
    for (i, o) in out.iter_mut().enumerate() {
        for (j, w) in doubled.query_row(i).unwrap() {
            *o += w * z[j];
        }
    }
    let back = project_back(&out, 1e-12).unwrap();

    let direct: Vec<f64> = (0..3)
        .map(|i| {
            m.query_row(i)
                .unwrap()
                .into_iter()
                .map(|(j, w)| w * x[j])
                .sum()
        })
        .collect();
    println!("\nM x via doubled operator: {back:?}");
    println!("M x directly:             {direct:?}");
}
