"""Independent brute-force helpers used as test oracles (plain lists and itertools only)."""

from itertools import combinations, product

# d=3 supports written out by hand from the lattice rules
D3_X_GAUGE = [[0, 1], [1, 2, 4, 5], [3, 4, 6, 7], [7, 8]]
D3_Z_STABS = [[0, 1, 3, 4], [4, 5, 7, 8], [2, 5], [3, 6]]
D3_X_STABS = [[0, 1, 3, 4, 6, 7], [1, 2, 4, 5, 7, 8]]


def to_int(indices):
    return sum(1 << k for k in set(indices))


def span_ints(generators):
    """Every XOR combination of the generator supports, as integers."""
    gens = [to_int(g) for g in generators]
    out = set()
    for mask in product((0, 1), repeat=len(gens)):
        v = 0
        for bit, g in zip(mask, gens):
            if bit:
                v ^= g
        out.add(v)
    return out


def coset_min(v, generators):
    return min(v ^ s for s in span_ints(generators))


def gf2_rank_bruteforce(rows):
    """Largest r such that some r rows have no nontrivial zero combination."""
    rows = list(rows)
    best = 0
    for r in range(1, len(rows) + 1):
        for sub in combinations(rows, r):
            independent = True
            for mask in range(1, 2**r):
                v = 0
                for k in range(r):
                    if mask >> k & 1:
                        v ^= sub[k]
                if v == 0:
                    independent = False
                    break
            if independent:
                best = r
                break
    return best


def parity_syndrome(v, stabs):
    return [bin(v & to_int(s)).count("1") % 2 for s in stabs]
