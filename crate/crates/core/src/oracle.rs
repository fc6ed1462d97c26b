//! Brute-force reference decoders.

use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::gf2::{LinearCode, Syndrome, Word};

/// Largest length searched by [`min_weight_syndrome_decode`].
pub const MAX_SYNDROME_SEARCH_N: usize = 20;

/// Minimum-distance decoding, which is maximum likelihood on a BSC with
/// crossover below one half. Ties go to the lexicographically smallest
/// codeword.
pub fn ml_decode(code: &LinearCode, y: &Word, eps: f64) -> Result<Word> {
    check_len(code.n(), y.len(), "received word length")?;
    if !(eps < 0.5) {
        return Err(Error::Domain(format!(
            "minimum distance is maximum likelihood only for crossover < 1/2, got {eps}"
        )));
    }
    let yi = y.to_index();
    let best = code
        .codewords()?
        .iter()
        .map(|c| ((c.to_index() ^ yi).count_ones(), c.to_index(), c))
        .min_by_key(|&(d, idx, _)| (d, idx))
        .expect("a code always contains the zero word");
    Ok(best.2.clone())
}

/// [`ml_decode`] with ties broken uniformly at random. With a fixed
/// transmitted word, a deterministic tie rule favours whichever codeword it
/// prefers; random ties give the decoder's true average error rate.
pub fn ml_decode_random_ties<R: Rng + ?Sized>(code: &LinearCode, y: &Word, eps: f64, rng: &mut R) -> Result<Word> {
    check_len(code.n(), y.len(), "received word length")?;
    if !(eps < 0.5) {
        return Err(Error::Domain(format!(
            "minimum distance is maximum likelihood only for crossover < 1/2, got {eps}"
        )));
    }
    let yi = y.to_index();
    let words = code.codewords()?;
    let dist = |c: &Word| (c.to_index() ^ yi).count_ones();
    let best = words
        .iter()
        .map(dist)
        .min()
        .expect("a code always contains the zero word");
    let tied: Vec<&Word> = words.iter().filter(|c| dist(c) == best).collect();
    Ok(tied[rng.gen_range(0..tied.len())].clone())
}

/// Smallest-weight error pattern with syndrome `s`, searched weight by weight
/// and in increasing index order within a weight.
pub fn min_weight_syndrome_decode(code: &LinearCode, s: &Syndrome) -> Result<Word> {
    let n = code.n();
    check_len(code.r(), s.len(), "syndrome length")?;
    if n > MAX_SYNDROME_SEARCH_N {
        return Err(Error::Capacity {
            what: "code length for syndrome search",
            actual: n,
            limit: MAX_SYNDROME_SEARCH_N,
        });
    }
    let masks = code.basis_row_masks();
    let target = s.to_index();
    let limit = 1u64 << n;
    for w in 0..=n {
        if w == 0 {
            if target == 0 {
                return Ok(Word::zeros(n));
            }
            continue;
        }
        // Gosper's hack walks same-popcount integers in increasing order
        let mut z = (1u64 << w) - 1;
        while z < limit {
            if code.syndrome_of_index(&masks, z) == target {
                return Ok(Word::from_index(z, n));
            }
            let c = z & z.wrapping_neg();
            let r = z + c;
            z = (((r ^ z) >> 2) / c) | r;
        }
    }
    Err(Error::Infeasible(s.to_string()))
}
