use super::types::{BlockId, Digest};

fn hash_pair(left: &Digest, right: &Digest) -> Digest {
    let mut buf = [0u8; 65];
    buf[0] = 0x01;
    buf[1..33].copy_from_slice(&left.0);
    buf[33..].copy_from_slice(&right.0);
    Digest::of(&buf)
}

fn hash_leaf(id: &BlockId) -> Digest {
    let mut buf = [0u8; 33];
    buf[1..].copy_from_slice(id.as_bytes());
    Digest::of(&buf)
}

/// Binary Merkle root over `leaves` in the given order. Leaves hash as
/// `H(0x00 ‖ id)`, inner nodes as `H(0x01 ‖ left ‖ right)`; an odd level
/// repeats its last node. The empty list maps to `H("")`.
pub fn merkle_root(leaves: &[BlockId]) -> Digest {
    if leaves.is_empty() {
        return Digest::of(b"");
    }
    let mut level: Vec<Digest> = leaves.iter().map(hash_leaf).collect();
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| hash_pair(&pair[0], pair.get(1).unwrap_or(&pair[0])))
            .collect();
    }
    level[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use sha2::{Digest as _, Sha256};

    /// Reference over raw byte arrays, written against sha2 directly.
    fn reference(leaves: &[[u8; 32]]) -> [u8; 32] {
        fn node(level: Vec<[u8; 32]>) -> [u8; 32] {
            if level.len() == 1 {
                return level[0];
            }
            let mut next = Vec::new();
            let mut i = 0;
            while i < level.len() {
                let l = level[i];
                let r = if i + 1 < level.len() { level[i + 1] } else { l };
                let mut h = Sha256::new();
                h.update([1u8]);
                h.update(l);
                h.update(r);
                next.push(h.finalize().into());
                i += 2;
            }
            node(next)
        }
        if leaves.is_empty() {
            return Sha256::digest([]).into();
        }
        node(
            leaves
                .iter()
                .map(|l| {
                    let mut h = Sha256::new();
                    h.update([0u8]);
                    h.update(l);
                    h.finalize().into()
                })
                .collect(),
        )
    }

    #[test]
    fn frozen_values() {
        assert_eq!(
            merkle_root(&[]).to_hex(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        let one = BlockId(Digest([0u8; 32]));
        assert_eq!(merkle_root(&[one]), hash_leaf(&one));
        let two = BlockId(Digest([1u8; 32]));
        assert_eq!(
            merkle_root(&[one, two, one]),
            hash_pair(
                &hash_pair(&hash_leaf(&one), &hash_leaf(&two)),
                &hash_pair(&hash_leaf(&one), &hash_leaf(&one))
            )
        );
    }

    proptest! {
        #[test]
        fn matches_reference(raw in prop::collection::vec(any::<[u8; 32]>(), 0..40)) {
            let ids: Vec<BlockId> = raw.iter().map(|b| BlockId(Digest(*b))).collect();
            prop_assert_eq!(merkle_root(&ids).0, reference(&raw));
        }

        #[test]
        fn order_sensitive(a in any::<[u8; 32]>(), b in any::<[u8; 32]>()) {
            prop_assume!(a != b);
            let (x, y) = (BlockId(Digest(a)), BlockId(Digest(b)));
            prop_assert_ne!(merkle_root(&[x, y]), merkle_root(&[y, x]));
        }
    }
}
