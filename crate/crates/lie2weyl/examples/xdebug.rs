use lie2weyl::lie::catalog;
use lie2weyl::pbw::{phi_from_oracle, Splitting};
use lie2weyl::realization::phi_series;

fn main() {
    let c = catalog("so3").unwrap();
    let oracle = phi_from_oracle(&c, 4, Splitting::RightInvariant);
    let phi = phi_series(&c, 4);
    for i in 1..=3usize {
        for j in 1..=3usize {
            let swapped = phi.entry(i, j).swap_automorphism();
            if oracle[i - 1][j - 1] != swapped {
                for d in 0..=4u32 {
                    let o = oracle[i - 1][j - 1].t_slice(d);
                    let s = swapped.t_slice(d);
                    if o != s {
                        println!("entry ({i},{j}) t^{d}:");
                        println!("  oracle: {o}");
                        println!("  swap  : {s}");
                    }
                }
            }
        }
    }
}
