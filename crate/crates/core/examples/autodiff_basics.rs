//! Reverse-mode differentiation and Adam on a tiny least-squares problem.
//!
//! cargo run --example autodiff_basics

use isogcl::autodiff::{AdamConfig, AdamState, ParamStore, Tape, Tensor};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Fit w in y = x w for three points on the line y = 2x.
    let x = Tensor::new(3, 1, vec![1.0, 2.0, 3.0])?;
    let y = Tensor::new(3, 1, vec![2.0, 4.0, 6.0])?;
    let mut store = ParamStore::new();
    let w = store.add("w", Tensor::scalar(0.0));
    let mut adam = AdamState::new(AdamConfig { lr: 0.1, ..AdamConfig::default() }, &store);

    for step in 0..=200 {
        let mut tape = Tape::new();
        let xv = tape.constant(x.clone());
        let yv = tape.constant(y.clone());
        let wv = tape.param(&store, w);
        let pred = tape.matmul(xv, wv)?;
        let err = tape.sub(pred, yv)?;
        let sq = tape.square(err);
        let loss = tape.mean_all(sq);
        let grads = tape.backward(loss)?;
        store.zero_grad();
        tape.accumulate(&grads, &mut store)?;
        if step % 50 == 0 {
            println!(
                "step {step:>3}: loss {:.6}  w {:.4}  dL/dw {:.4}",
                tape.value(loss).item()?,
                store.get(w).value.item()?,
                store.get(w).grad.item()?
            );
        }
        adam.step(&mut store)?;
    }
    Ok(())
}
