# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: 64-bit twins of the functions in ``_kern_py``.

Each function pre-checks a conservative magnitude bound and raises
OverflowError when a result could leave the signed 64-bit range; the
dispatcher then retries on the pure-Python lane, so exactness is never
at risk.  Contracts and index conventions match ``_kern_py`` exactly.
"""

from cpython.mem cimport PyMem_Malloc, PyMem_Free

cdef long long LIMIT = (<long long> 1) << 62

KIND_LEAF = 0
KIND_DECISION = 1
KIND_STOCHASTIC = 2


cdef long long* _alloc(Py_ssize_t size) except NULL:
    cdef long long* buf = <long long*> PyMem_Malloc(size * sizeof(long long))
    if buf == NULL:
        raise MemoryError()
    return buf


cdef long long* _from_list(values, Py_ssize_t size) except NULL:
    cdef long long* buf = _alloc(size)
    cdef Py_ssize_t i
    try:
        for i in range(size):
            buf[i] = values[i]
    except BaseException:
        PyMem_Free(buf)
        raise
    return buf


cdef int* _ints_from_list(values, Py_ssize_t size) except NULL:
    cdef int* buf = <int*> PyMem_Malloc(size * sizeof(int))
    cdef Py_ssize_t i
    if buf == NULL:
        raise MemoryError()
    try:
        for i in range(size):
            buf[i] = values[i]
    except BaseException:
        PyMem_Free(buf)
        raise
    return buf


cdef long long _max_abs(long long* buf, Py_ssize_t size):
    cdef long long best = 0
    cdef long long v
    cdef Py_ssize_t i
    for i in range(size):
        v = buf[i]
        if v < 0:
            v = -v
        if v > best:
            best = v
    return best


def eval_table(kind, var0, child0, child1, leafnum, int n, int m):
    cdef Py_ssize_t nodes = len(kind)
    cdef Py_ssize_t size = (<Py_ssize_t> 1) << n
    cdef int* ckind = NULL
    cdef int* cvar = NULL
    cdef int* c0 = NULL
    cdef int* c1 = NULL
    cdef long long* cleaf = NULL
    cdef long long* out = NULL
    cdef int* snode = NULL
    cdef int* scoin = NULL
    cdef Py_ssize_t x, top
    cdef int node, coins
    cdef long long acc
    try:
        ckind = _ints_from_list(kind, nodes)
        cvar = _ints_from_list(var0, nodes)
        c0 = _ints_from_list(child0, nodes)
        c1 = _ints_from_list(child1, nodes)
        cleaf = _from_list(leafnum, nodes)
        if m >= 62 or _max_abs(cleaf, nodes) >= (LIMIT >> m):
            raise OverflowError("eval_table bound exceeded")
        snode = <int*> PyMem_Malloc((m + 2) * sizeof(int))
        scoin = <int*> PyMem_Malloc((m + 2) * sizeof(int))
        if snode == NULL or scoin == NULL:
            raise MemoryError()
        out = _alloc(size)
        for x in range(size):
            acc = 0
            snode[0] = 0
            scoin[0] = 0
            top = 1
            while top > 0:
                top -= 1
                node = snode[top]
                coins = scoin[top]
                while ckind[node] == 1:
                    if (x >> cvar[node]) & 1:
                        node = c1[node]
                    else:
                        node = c0[node]
                if ckind[node] == 0:
                    acc += cleaf[node] << (m - coins)
                else:
                    snode[top] = c0[node]
                    scoin[top] = coins + 1
                    top += 1
                    snode[top] = c1[node]
                    scoin[top] = coins + 1
                    top += 1
            out[x] = acc
        return [out[x] for x in range(size)]
    finally:
        PyMem_Free(ckind)
        PyMem_Free(cvar)
        PyMem_Free(c0)
        PyMem_Free(c1)
        PyMem_Free(cleaf)
        PyMem_Free(snode)
        PyMem_Free(scoin)
        PyMem_Free(out)


cdef _butterfly(vec, int n, bint inverse):
    cdef Py_ssize_t size = (<Py_ssize_t> 1) << n
    cdef long long* buf = _from_list(vec, size)
    cdef Py_ssize_t step, base, i, j
    cdef long long lo, hi
    cdef int b
    try:
        if n >= 62 or _max_abs(buf, size) >= (LIMIT >> n):
            raise OverflowError("butterfly bound exceeded")
        for b in range(n):
            step = (<Py_ssize_t> 1) << b
            base = 0
            while base < size:
                for i in range(base, base + step):
                    j = i + step
                    lo = buf[i]
                    hi = buf[j]
                    if inverse:
                        buf[i] = lo + hi
                        buf[j] = hi - lo
                    else:
                        buf[i] = lo - hi
                        buf[j] = lo + hi
                base += step << 1
        return [buf[i] for i in range(size)]
    finally:
        PyMem_Free(buf)


def coeffs_to_values(vec, int n):
    return _butterfly(vec, n, False)


def values_to_coeffs_scaled(vec, int n):
    return _butterfly(vec, n, True)


def subcube_sums(vec, int n):
    cdef Py_ssize_t size = (<Py_ssize_t> 1) << n
    cdef Py_ssize_t total = 1
    cdef int i
    for i in range(n):
        total *= 3
    cdef long long* buf = _from_list(vec, size)
    cdef long long* out = NULL
    cdef Py_ssize_t x, t, p, outer, hi, lo, base
    try:
        if n >= 62 or _max_abs(buf, size) >= (LIMIT >> n):
            raise OverflowError("subcube_sums bound exceeded")
        out = _alloc(total)
        for t in range(total):
            out[t] = 0
        for x in range(size):
            t = 0
            p = 1
            for i in range(n):
                t += (1 + ((x >> i) & 1)) * p
                p *= 3
        # p now equals 3^n; reuse loop below with fresh strides
            out[t] = buf[x]
        p = 1
        for i in range(n):
            outer = total // (3 * p)
            for hi in range(outer):
                base = hi * 3 * p
                for lo in range(p):
                    t = base + lo
                    out[t] = out[t + p] + out[t + 2 * p]
            p *= 3
        return [out[t] for t in range(total)]
    finally:
        PyMem_Free(buf)
        PyMem_Free(out)


cdef Py_ssize_t _fill_subcube(int n, long long fixed_mask, long long fixed_bits,
                              Py_ssize_t* points) :
    cdef int free_bits[64]
    cdef int nfree = 0
    cdef int i, pos
    cdef Py_ssize_t t, x, count
    for i in range(n):
        if not (fixed_mask >> i) & 1:
            free_bits[nfree] = i
            nfree += 1
    count = (<Py_ssize_t> 1) << nfree
    for t in range(count):
        x = <Py_ssize_t> fixed_bits
        for pos in range(nfree):
            if (t >> pos) & 1:
                x |= (<Py_ssize_t> 1) << free_bits[pos]
        points[t] = x
    return count


def subcube_moments(vec, int n, fixed_mask, fixed_bits):
    cdef Py_ssize_t size = (<Py_ssize_t> 1) << n
    cdef long long* buf = _from_list(vec, size)
    cdef Py_ssize_t* points = NULL
    cdef Py_ssize_t count, idx
    cdef long long v, s1, s2, bound
    try:
        points = <Py_ssize_t*> PyMem_Malloc(size * sizeof(Py_ssize_t))
        if points == NULL:
            raise MemoryError()
        count = _fill_subcube(n, fixed_mask, fixed_bits, points)
        bound = _max_abs(buf, size)
        if bound > 0 and count > (LIMIT // bound) // bound:
            raise OverflowError("subcube_moments bound exceeded")
        s1 = 0
        s2 = 0
        for idx in range(count):
            v = buf[points[idx]]
            s1 += v
            s2 += v * v
        return count, s1, s2
    finally:
        PyMem_Free(buf)
        PyMem_Free(points)


def abs_diff_sums(vec, int n, fixed_mask, fixed_bits):
    cdef Py_ssize_t size = (<Py_ssize_t> 1) << n
    cdef long long* buf = _from_list(vec, size)
    cdef Py_ssize_t* points = NULL
    cdef Py_ssize_t count, idx, bit
    cdef long long total, d, bound
    cdef int i
    out = []
    try:
        points = <Py_ssize_t*> PyMem_Malloc(size * sizeof(Py_ssize_t))
        if points == NULL:
            raise MemoryError()
        count = _fill_subcube(n, fixed_mask, fixed_bits, points)
        bound = _max_abs(buf, size)
        if bound > 0 and count > LIMIT // (2 * bound):
            raise OverflowError("abs_diff_sums bound exceeded")
        for i in range(n):
            if (fixed_mask >> i) & 1:
                out.append(0)
                continue
            bit = (<Py_ssize_t> 1) << i
            total = 0
            for idx in range(count):
                d = buf[points[idx]] - buf[points[idx] ^ bit]
                total += d if d >= 0 else -d
            out.append(total)
        return out
    finally:
        PyMem_Free(buf)
        PyMem_Free(points)


def gram_matrix(vectors):
    cdef Py_ssize_t k = len(vectors)
    cdef Py_ssize_t length = len(vectors[0]) if k else 0
    cdef long long* buf = NULL
    cdef Py_ssize_t i, j, t
    cdef long long total, bound
    try:
        buf = _alloc(k * length)
        for i in range(k):
            row = vectors[i]
            for t in range(length):
                buf[i * length + t] = row[t]
        bound = _max_abs(buf, k * length)
        if bound > 0 and length > (LIMIT // bound) // bound:
            raise OverflowError("gram_matrix bound exceeded")
        out = [[0] * k for _ in range(k)]
        for i in range(k):
            for j in range(i, k):
                total = 0
                for t in range(length):
                    total += buf[i * length + t] * buf[j * length + t]
                out[i][j] = total
                out[j][i] = total
        return out
    finally:
        PyMem_Free(buf)


cdef inline long long _gf_mul(long long a, long long b, int k, long long poly):
    cdef long long r = 0
    cdef long long top = (<long long> 1) << k
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return r


def score_seeds(gram, int k, int c, int trunc_bits, poly, start, stop):
    cdef Py_ssize_t tdim = (<Py_ssize_t> 1) << trunc_bits
    cdef long long* g = NULL
    cdef long long* prods = NULL
    cdef Py_ssize_t* idxs = NULL
    cdef long long cpoly = poly
    cdef Py_ssize_t seed, cstart = start, cstop = stop
    cdef long long a, b, prev_a = -1
    cdef long long kmask = ((<long long> 1) << k) - 1
    cdef long long tmask = ((<long long> 1) << trunc_bits) - 1
    cdef long long score, best_score = 0, bound
    cdef Py_ssize_t best_seed = -1
    cdef int i, j
    cdef bint have_best = False
    try:
        g = _alloc(tdim * tdim)
        for i in range(tdim):
            row = gram[i]
            for j in range(tdim):
                g[i * tdim + j] = row[j]
        bound = _max_abs(g, tdim * tdim)
        if bound > 0 and <long long> c * c > LIMIT // bound:
            raise OverflowError("score_seeds bound exceeded")
        prods = _alloc(c)
        idxs = <Py_ssize_t*> PyMem_Malloc(c * sizeof(Py_ssize_t))
        if idxs == NULL:
            raise MemoryError()
        for seed in range(cstart, cstop):
            a = seed >> k
            b = seed & kmask
            if a != prev_a:
                for i in range(c):
                    prods[i] = _gf_mul(a, i, k, cpoly)
                prev_a = a
            for i in range(c):
                idxs[i] = <Py_ssize_t> ((prods[i] ^ b) & tmask)
            score = 0
            for i in range(c):
                for j in range(c):
                    score += g[idxs[i] * tdim + idxs[j]]
            if not have_best or score < best_score:
                best_score = score
                best_seed = seed
                have_best = True
        if not have_best:
            return -1, None
        return best_seed, best_score
    finally:
        PyMem_Free(g)
        PyMem_Free(prods)
        PyMem_Free(idxs)
