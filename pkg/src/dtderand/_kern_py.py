"""Pure-Python kernels for the dense exact-arithmetic hot loops.

Every function here operates on plain Python integers, so results are
exact at any magnitude.  The compiled twin (``_kern_c``) implements the
same contracts on 64-bit integers and raises ``OverflowError`` when a
result could leave that range; the dispatcher in ``kernel`` falls back
to this module in that case.  Keep the two lanes semantically identical.

Conventions:
  - dense input tables are indexed by the n-bit input mask x, where bit
    i (0-based) holds the value of variable i+1;
  - coefficient vectors are indexed by the subset mask S under the +/-1
    encoding (bit value 1 maps to +1);
  - subcube tables are indexed in base 3, one digit per variable:
    0 = free, 1 = fixed to 0, 2 = fixed to 1.
"""

from __future__ import annotations

KIND_LEAF = 0
KIND_DECISION = 1
KIND_STOCHASTIC = 2


def eval_table(kind, var0, child0, child1, leafnum, n, m):
    """Mean-value table of a flattened tree, scaled by 2^m.

    Returns ``t`` with ``t[x] = mu(x) * D * 2^m`` where ``leafnum`` holds
    leaf values scaled by the common denominator D.  Node 0 is the root.
    """
    size = 1 << n
    out = [0] * size
    for x in range(size):
        acc = 0
        stack = [(0, 0)]
        while stack:
            node, coins = stack.pop()
            while kind[node] == KIND_DECISION:
                node = child1[node] if (x >> var0[node]) & 1 else child0[node]
            if kind[node] == KIND_LEAF:
                acc += leafnum[node] << (m - coins)
            else:
                stack.append((child0[node], coins + 1))
                stack.append((child1[node], coins + 1))
        out[x] = acc
    return out


def coeffs_to_values(vec, n):
    """Evaluate a dense coefficient vector at every point of {0,1}^n."""
    out = list(vec)
    for b in range(n):
        step = 1 << b
        for base in range(0, 1 << n, step << 1):
            for i in range(base, base + step):
                j = i + step
                lo, hi = out[i], out[j]
                out[i] = lo - hi
                out[j] = lo + hi
    return out


def values_to_coeffs_scaled(vec, n):
    """Inverse of ``coeffs_to_values`` multiplied by 2^n (stays integral)."""
    out = list(vec)
    for b in range(n):
        step = 1 << b
        for base in range(0, 1 << n, step << 1):
            for i in range(base, base + step):
                j = i + step
                lo, hi = out[i], out[j]
                out[i] = lo + hi
                out[j] = hi - lo
    return out


def subcube_sums(vec, n):
    """Sums of ``vec`` over every subcube, indexed in base 3 (3^n entries)."""
    pow3 = [3**i for i in range(n + 1)]
    out = [0] * pow3[n]
    for x in range(1 << n):
        t = 0
        for i in range(n):
            t += (1 + ((x >> i) & 1)) * pow3[i]
        out[t] = vec[x]
    for i in range(n):
        p = pow3[i]
        outer = pow3[n] // (3 * p)
        for hi in range(outer):
            base = hi * 3 * p
            for lo in range(p):
                t = base + lo
                out[t] = out[t + p] + out[t + 2 * p]
    return out


def _subcube_points(n, fixed_mask, fixed_bits):
    free = [i for i in range(n) if not (fixed_mask >> i) & 1]
    for t in range(1 << len(free)):
        x = fixed_bits
        for pos, bit in enumerate(free):
            if (t >> pos) & 1:
                x |= 1 << bit
        yield x


def subcube_moments(vec, n, fixed_mask, fixed_bits):
    """(count, sum, sum of squares) of ``vec`` over one subcube."""
    count = s1 = s2 = 0
    for x in _subcube_points(n, fixed_mask, fixed_bits):
        v = vec[x]
        count += 1
        s1 += v
        s2 += v * v
    return count, s1, s2


def abs_diff_sums(vec, n, fixed_mask, fixed_bits):
    """Per-variable sums of |vec[x] - vec[x^i]| over one subcube.

    Entry i (0-based) is 0 for fixed variables; for free ones it sums
    over every subcube point, so each unordered pair counts twice.
    """
    out = [0] * n
    points = list(_subcube_points(n, fixed_mask, fixed_bits))
    for i in range(n):
        if (fixed_mask >> i) & 1:
            continue
        bit = 1 << i
        total = 0
        for x in points:
            total += abs(vec[x] - vec[x ^ bit])
        out[i] = total
    return out


def gram_matrix(vectors):
    """All pairwise dot products of the given equal-length int vectors."""
    k = len(vectors)
    out = [[0] * k for _ in range(k)]
    for i in range(k):
        vi = vectors[i]
        for j in range(i, k):
            vj = vectors[j]
            total = 0
            for a, b in zip(vi, vj):
                total += a * b
            out[i][j] = total
            out[j][i] = total
    return out


def _gf_mul(a, b, k, poly):
    r = 0
    top = 1 << k
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return r


def score_seeds(gram, k, c, trunc_bits, poly, start, stop):
    """Scan sampler seeds, scoring each candidate through the Gram matrix.

    Seed s encodes the pair (a, b) = (s >> k, s mod 2^k); the candidate's
    members are indexed by (a*g + b) truncated to ``trunc_bits`` low bits,
    with evaluation points g = 0..c-1.  The score is the quadratic form
    sum_{i,j} gram[idx_i][idx_j].  Returns (best seed, best score) over
    [start, stop), preferring the earliest seed on ties.
    """
    tmask = (1 << trunc_bits) - 1
    kmask = (1 << k) - 1
    best_seed = -1
    best_score = None
    prev_a = -1
    prods = None
    for seed in range(start, stop):
        a = seed >> k
        b = seed & kmask
        if a != prev_a:
            prods = [_gf_mul(a, g, k, poly) for g in range(c)]
            prev_a = a
        idxs = [(p ^ b) & tmask for p in prods]
        score = 0
        for i in idxs:
            row = gram[i]
            for j in idxs:
                score += row[j]
        if best_score is None or score < best_score:
            best_score = score
            best_seed = seed
    return best_seed, best_score
