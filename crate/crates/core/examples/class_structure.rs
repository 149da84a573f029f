//! Classes, basic flags and the longest chain of a reducible Metzler matrix.
//!
//! cargo run --example class_structure

use erlang_tails::classes::{is_block_upper_triangular, ChainQuery, ClassPartition, Digraph};
use erlang_tails::fixtures::example_matrix;
use erlang_tails::spectral::{block_abscissae, rothblum_check, spectral_abscissa};

fn main() -> erlang_tails::Result<()> {
    let a = example_matrix();
    let p = ClassPartition::of(&Digraph::from_matrix(&a, 0.0)?);
    let zeta = spectral_abscissa(&a)?;
    let blocks = block_abscissae(&a, &p)?;
    println!("spectral abscissa {zeta:.6}");
    let basic: Vec<bool> = blocks.iter().map(|&b| (b - zeta).abs() < 1e-8).collect();
    for (k, class) in p.classes().iter().enumerate() {
        let labels: Vec<usize> = class.iter().map(|v| v + 1).collect();
        println!("class {}: {:?} zeta {:.6}{}", k + 1, labels, blocks[k], if basic[k] { " basic" } else { "" });
    }
    let perm = p.block_permutation();
    println!("block order {:?}", perm.iter().map(|v| v + 1).collect::<Vec<_>>());
    println!("block upper triangular: {}", is_block_upper_triangular(&a, &p, &perm));
    println!("longest basic chain {}", p.longest_chain_length(&ChainQuery::new(basic))?);
    let r = rothblum_check(&a)?;
    println!("index of zeta {} (ranks {:?}), agrees: {}", r.index, r.rank_sequence, r.agree);
    Ok(())
}
