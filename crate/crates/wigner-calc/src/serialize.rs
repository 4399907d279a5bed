//! JSON wire formats for kernels, chaos expansions and gradients.
//!
//! Shapes:
//!
//! ```text
//! kernel    {"order": n, "entries": [{"idx": [i, …], "re": x, "im": y}, …]}
//! chaos     [<kernel record sorted by degree>, …]
//! gradient  [{"tuple": [j, …], "blocks": [{"degrees": [n, …], "kernel": <kernel>}, …]}, …]
//! ```
//!
//! Entries, degrees and tuples come out in lexicographic order (the sparse
//! maps iterate that way), so serialization is deterministic; floats take
//! the shortest representation that parses back to the same bits, making
//! round trips exact. Deserialization re-validates every structural
//! invariant instead of trusting the input.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chaos::ChaosExpansion;
use crate::kernel::{BasisIndex, Coeff, Kernel, MultiKernel};
use crate::malliavin::Gradient;

#[derive(Debug, Error)]
pub enum SerializeError {
    #[error("malformed JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("entry tuple {idx:?} has length {got}, kernel order is {order}")]
    EntryLength { idx: Vec<BasisIndex>, order: usize, got: usize },
    #[error("kernel of order {kernel_order} under degree vector {degrees:?} (sum {sum})")]
    BlockOrder { degrees: Vec<usize>, sum: usize, kernel_order: usize },
    #[error("component tuple {tuple:?} has length {got}, gradient order is {order}")]
    TupleLength { tuple: Vec<BasisIndex>, order: usize, got: usize },
    #[error("gradient records must share one tuple length; saw {0} and {1}")]
    MixedOrders(usize, usize),
    #[error("degree vector {degrees:?} has arity {got}, expected {expected}")]
    BlockArity { degrees: Vec<usize>, expected: usize, got: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryRecord {
    pub idx: Vec<BasisIndex>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelRecord {
    pub order: usize,
    pub entries: Vec<EntryRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockRecord {
    pub degrees: Vec<usize>,
    pub kernel: KernelRecord,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradientComponentRecord {
    pub tuple: Vec<BasisIndex>,
    pub blocks: Vec<BlockRecord>,
}

impl KernelRecord {
    pub fn from_kernel(k: &Kernel) -> Self {
        KernelRecord {
            order: k.order(),
            entries: k
                .iter()
                .map(|(idx, c)| EntryRecord { idx: idx.to_vec(), re: c.re, im: c.im })
                .collect(),
        }
    }

    pub fn into_kernel(self) -> Result<Kernel, SerializeError> {
        for e in &self.entries {
            if e.idx.len() != self.order {
                return Err(SerializeError::EntryLength {
                    idx: e.idx.clone(),
                    order: self.order,
                    got: e.idx.len(),
                });
            }
        }
        Ok(Kernel::from_entries(
            self.order,
            self.entries.into_iter().map(|e| (e.idx, Coeff::new(e.re, e.im))),
        )
        .expect("lengths checked above"))
    }
}

pub fn kernel_to_json(k: &Kernel) -> String {
    serde_json::to_string(&KernelRecord::from_kernel(k)).expect("record serializes")
}

pub fn kernel_from_json(text: &str) -> Result<Kernel, SerializeError> {
    let record: KernelRecord = serde_json::from_str(text)?;
    record.into_kernel()
}

pub fn chaos_records(f: &ChaosExpansion) -> Vec<KernelRecord> {
    f.components().map(|(_, k)| KernelRecord::from_kernel(k)).collect()
}

pub fn chaos_to_json(f: &ChaosExpansion) -> String {
    serde_json::to_string(&chaos_records(f)).expect("records serialize")
}

pub fn chaos_from_records(records: Vec<KernelRecord>) -> Result<ChaosExpansion, SerializeError> {
    let mut f = ChaosExpansion::zero();
    for record in records {
        f.add_component(&record.into_kernel()?);
    }
    Ok(f)
}

pub fn chaos_from_json(text: &str) -> Result<ChaosExpansion, SerializeError> {
    chaos_from_records(serde_json::from_str(text)?)
}

pub fn gradient_to_json(g: &Gradient) -> String {
    let records: Vec<GradientComponentRecord> = g
        .components()
        .map(|(tuple, m)| GradientComponentRecord {
            tuple: tuple.to_vec(),
            blocks: m
                .blocks()
                .map(|(degrees, k)| BlockRecord {
                    degrees: degrees.to_vec(),
                    kernel: KernelRecord::from_kernel(k),
                })
                .collect(),
        })
        .collect();
    serde_json::to_string(&records).expect("records serialize")
}

pub fn gradient_from_json(text: &str) -> Result<Gradient, SerializeError> {
    let records: Vec<GradientComponentRecord> = serde_json::from_str(text)?;
    let order = match records.first() {
        Some(r) => r.tuple.len(),
        None => return Ok(Gradient::zero(1)),
    };
    let mut g = Gradient::zero(order);
    for record in records {
        if record.tuple.len() != order {
            return Err(SerializeError::MixedOrders(order, record.tuple.len()));
        }
        let mut m = MultiKernel::zero(order + 1);
        for block in record.blocks {
            if block.degrees.len() != order + 1 {
                let got = block.degrees.len();
                return Err(SerializeError::BlockArity {
                    degrees: block.degrees,
                    expected: order + 1,
                    got,
                });
            }
            let sum: usize = block.degrees.iter().sum();
            if block.kernel.order != sum {
                return Err(SerializeError::BlockOrder {
                    degrees: block.degrees,
                    sum,
                    kernel_order: block.kernel.order,
                });
            }
            m.add_block(&block.degrees, &block.kernel.into_kernel()?);
        }
        g.add_component(&record.tuple, &m);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::malliavin::gradient_or_identity;
    use crate::sample;

    #[test]
    fn kernel_round_trip_is_exact() {
        let mut rng = sample::rng(3);
        for order in 0..=4usize {
            let k = sample::kernel(&mut rng, order, 5, 0.4);
            let back = kernel_from_json(&kernel_to_json(&k)).unwrap();
            assert_eq!(k, back);
        }
    }

    #[test]
    fn chaos_round_trip_is_exact() {
        let mut rng = sample::rng(5);
        for _ in 0..5 {
            let f = sample::chaos(&mut rng, 4, 5, 0.3);
            let back = chaos_from_json(&chaos_to_json(&f)).unwrap();
            assert_eq!(f, back);
            let trace = back.trace();
            assert_eq!(trace, f.trace());
        }
    }

    #[test]
    fn gradient_round_trip_is_exact() {
        let mut rng = sample::rng(7);
        for p in 1..=3usize {
            let f = sample::chaos(&mut rng, 4, 4, 0.4);
            let g = gradient_or_identity(&f, p);
            let back = gradient_from_json(&gradient_to_json(&g)).unwrap();
            assert_eq!(g, back);
        }
    }

    #[test]
    fn serialization_is_lexicographically_ordered() {
        let mut k = Kernel::zero(2);
        k.add_entry(&[3, 1], Coeff::new(1.0, 0.0));
        k.add_entry(&[0, 2], Coeff::new(2.0, 0.0));
        k.add_entry(&[0, 1], Coeff::new(3.0, 0.0));
        let record = KernelRecord::from_kernel(&k);
        let tuples: Vec<Vec<u32>> = record.entries.iter().map(|e| e.idx.clone()).collect();
        assert_eq!(tuples, vec![vec![0, 1], vec![0, 2], vec![3, 1]]);
    }

    #[test]
    fn rejects_inconsistent_records() {
        let bad = r#"{"order": 2, "entries": [{"idx": [1], "re": 1.0, "im": 0.0}]}"#;
        assert!(matches!(
            kernel_from_json(bad),
            Err(SerializeError::EntryLength { order: 2, got: 1, .. })
        ));

        let bad_block = r#"[{"tuple": [0], "blocks": [{"degrees": [1, 0],
            "kernel": {"order": 2, "entries": []}}]}]"#;
        assert!(matches!(
            gradient_from_json(bad_block),
            Err(SerializeError::BlockOrder { sum: 1, kernel_order: 2, .. })
        ));

        let garbage = "not json";
        assert!(matches!(kernel_from_json(garbage), Err(SerializeError::Parse(_))));
    }
}
