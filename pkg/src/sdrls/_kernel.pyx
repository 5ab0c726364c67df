# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled trial loop.

Mirrors the step machines in ``algorithms.py`` draw for draw: same splitmix64
stream, same rejection sampling, same partial Fisher-Yates, same geometric
gaps. Any change here must be made there too; tests/test_engines.py compares
the two on every variant and problem kind.
"""

from array import array

from libc.math cimport floor, log, log1p
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport free, malloc

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double INV53 = 1.0 / 9007199254740992.0
cdef int64_t GEOM_CAP = 9007199254740992LL

# variant codes, in Variant enum order
cdef enum:
    RLS_STATIC = 0
    SD_RLS = 1
    SD_RLS_STAR = 2
    EA_ONE_ONE = 3
    FEA_BETA = 4
    SD_EA = 5
    RLS_12 = 6

# problem kinds
cdef enum:
    K_ONEMAX = 0
    K_JUMP = 1
    K_NGM = 2
    K_MST = 3

# events
cdef enum:
    E_IMPROVE = 0
    E_EQUAL = 1
    E_UP = 2
    E_DOWN = 3
    E_RADIUS_UP = 4
    E_RADIUS_N = 5
    E_RESET = 6


cdef inline uint64_t rng_next(uint64_t *st) noexcept nogil:
    st[0] += GOLDEN
    cdef uint64_t z = st[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t rng_below(uint64_t *st, uint64_t k) noexcept nogil:
    cdef uint64_t rem = (0 - k) % k
    cdef uint64_t v
    while True:
        v = rng_next(st)
        if v <= 0xFFFFFFFFFFFFFFFFULL - rem:
            return v % k


cdef inline double rng_double(uint64_t *st) noexcept nogil:
    return <double>(rng_next(st) >> 11) * INV53


cdef inline int64_t rng_geometric(uint64_t *st, double log_q) noexcept nogil:
    cdef double u = 1.0 - rng_double(st)
    cdef double v = log(u) / log_q
    if v < <double>GEOM_CAP:
        return <int64_t>floor(v)
    return GEOM_CAP


cdef struct Ctx:
    int n
    int kind
    int sign
    # ONEMAX / JUMP
    int jump_m
    int ones
    # NGM
    int plen
    int bsize
    int bcount
    int boundary
    # MST
    int V
    int E
    int64_t penalty
    int *eu
    int *ev
    int64_t *ew
    int *parent


cdef inline int64_t jump_value(int ones, int n, int m) noexcept nogil:
    if ones <= n - m or ones == n:
        return m + ones
    return n - ones


cdef int64_t eval_full(Ctx *c, unsigned char *x) noexcept nogil:
    cdef int i, k, lead, cnt, start, suff, inactive, valid, ones, ra, rb
    cdef int64_t e, w, comps
    if c.kind == K_ONEMAX:
        return c.ones
    if c.kind == K_JUMP:
        return jump_value(c.ones, c.n, c.jump_m)
    if c.kind == K_NGM:
        lead = 0
        while lead < c.plen and x[lead]:
            lead += 1
        valid = 1
        for i in range(lead, c.plen):
            if x[i]:
                valid = 0
                break
        suff = 0
        inactive = 0
        if valid:
            for k in range(c.bcount):
                start = c.plen + k * c.bsize
                cnt = 0
                for i in range(start, start + c.bsize):
                    cnt += x[i]
                if cnt == 2:
                    if inactive:
                        valid = 0
                        break
                    suff += 1
                elif cnt == 0:
                    inactive = 1
                else:
                    valid = 0
                    break
        if not valid:
            ones = 0
            for i in range(c.n):
                ones += x[i]
            return -ones
        if lead <= c.boundary:
            return <int64_t>c.n * c.n * suff + lead
        return <int64_t>c.n * c.n * c.bcount + lead + suff - c.n - 1
    # K_MST
    for i in range(c.V):
        c.parent[i] = i
    e = 0
    w = 0
    comps = c.V
    for i in range(c.E):
        if x[i]:
            e += 1
            w += c.ew[i]
            ra = c.eu[i]
            while c.parent[ra] != ra:
                c.parent[ra] = c.parent[c.parent[ra]]
                ra = c.parent[ra]
            rb = c.ev[i]
            while c.parent[rb] != rb:
                c.parent[rb] = c.parent[c.parent[rb]]
                rb = c.parent[rb]
            if ra != rb:
                c.parent[ra] = rb
                comps -= 1
    if e > c.V - 1:
        return (comps - 1) * c.penalty * c.penalty + (e - (c.V - 1)) * c.penalty + w
    return (comps - 1) * c.penalty * c.penalty + w


cdef inline void apply_flips(Ctx *c, unsigned char *x, int *flips, int k) noexcept nogil:
    cdef int j, i
    for j in range(k):
        i = flips[j]
        x[i] ^= 1
        if c.kind <= K_JUMP:
            if x[i]:
                c.ones += 1
            else:
                c.ones -= 1


cdef inline int choose(int *perm, int n, int s, int *flips, uint64_t *st) noexcept nogil:
    cdef int i, j, t
    for i in range(s):
        j = i + <int>rng_below(st, <uint64_t>(n - i))
        t = perm[i]
        perm[i] = perm[j]
        perm[j] = t
        flips[i] = perm[i]
    return s


cdef inline int bernoulli(int n, int64_t *residual, int64_t *res_key, int64_t key,
                          double log_q, int *flips, uint64_t *st) noexcept nogil:
    cdef int64_t pos
    cdef int k = 0
    if res_key[0] != key:
        residual[0] = rng_geometric(st, log_q)
        res_key[0] = key
    pos = residual[0]
    while pos < n:
        flips[k] = <int>pos
        k += 1
        pos += 1 + rng_geometric(st, log_q)
    residual[0] = pos - n
    return k


cdef inline int sample_alpha(double[::1] cdf, uint64_t *st) noexcept nogil:
    cdef double u = rng_double(st)
    cdef Py_ssize_t lo = 0, hi = cdf.shape[0] - 1, mid
    while lo < hi:
        mid = (lo + hi) // 2
        if u < cdf[mid]:
            hi = mid
        else:
            lo = mid + 1
    return <int>lo + 1


cdef inline void record(list trace, int64_t evals, int code, int s, int r, int64_t u,
                        int *flips, int k):
    trace.append((evals, code, s, r, u, tuple([flips[j] for j in range(k)])))


def run_loop(int variant, unsigned char[::1] x, long long fx0, long long evals0, long long budget,
             unsigned long long seed_state, int static_s, double rate, alpha_cdf, triggers, int rmax,
             int kind, iparams, eu, ev, ew, int sign, long long opt_value, bint want_trace):
    """Run a trial from an evaluated start point. Returns
    ``(evaluations, fitness, strict_improvements, max_strength, success, trace, rng_state)``."""
    cdef int n = x.shape[0]
    cdef unsigned char *xp = &x[0]
    cdef uint64_t st = seed_state
    cdef int64_t[::1] trig = array("q", triggers)
    cdef double[::1] cdf = array("d", alpha_cdf)
    cdef int64_t[::1] ip = array("q", iparams)
    cdef int[::1] eu_a = array("i", eu if len(eu) else [0])
    cdef int[::1] ev_a = array("i", ev if len(ev) else [0])
    cdef int64_t[::1] ew_a = array("q", ew if len(ew) else [0])
    cdef Ctx c
    cdef int *perm = <int *>malloc(n * sizeof(int))
    cdef int *flips = <int *>malloc((n + 1) * sizeof(int))
    cdef int *parent = NULL
    cdef double *log_q = <double *>malloc((n + 1) * sizeof(double))
    cdef int i, k, s = 1, r = 1, alpha, improved, equal_ok, max_s = 1
    cdef int64_t evals = evals0, u = 0, fx = fx0, fy, strict = 0, skip
    cdef int64_t residual = -1, res_key = -1
    cdef bint success = False
    cdef list trace = [] if want_trace else None

    c.n = n
    c.kind = kind
    c.sign = sign
    c.ones = 0
    c.jump_m = 0
    if kind <= K_JUMP:
        for i in range(n):
            c.ones += xp[i]
        if kind == K_JUMP:
            c.jump_m = <int>ip[1]
    elif kind == K_NGM:
        c.plen = <int>ip[1]
        c.bsize = <int>ip[2]
        c.bcount = <int>ip[3]
        c.boundary = <int>ip[4]
    else:
        c.V = <int>ip[0]
        c.penalty = ip[1]
        c.E = n
        c.eu = &eu_a[0]
        c.ev = &ev_a[0]
        c.ew = &ew_a[0]
        parent = <int *>malloc(c.V * sizeof(int))
        c.parent = parent
    for i in range(n):
        perm[i] = i
    # log1p(-rate) per rate key: EA uses key 0, FEA the power-law draw, SD-EA the rate strength
    log_q[0] = log1p(-rate)
    for i in range(1, n + 1):
        log_q[i] = log1p(-(<double>i / n))
    if variant == RLS_STATIC:
        s = static_s
        max_s = static_s

    try:
        while evals < budget:
            improved = 0
            # -- offspring -------------------------------------------------
            if variant == RLS_STATIC:
                k = choose(perm, n, s, flips, &st)
                equal_ok = 1
            elif variant == SD_RLS:
                k = choose(perm, n, s, flips, &st)
                equal_ok = s == 1
            elif variant == SD_RLS_STAR:
                k = choose(perm, n, s, flips, &st)
                equal_ok = r == 1
            elif variant == RLS_12:
                s = 1 + <int>(rng_next(&st) >> 63)
                if s > max_s:
                    max_s = s
                k = choose(perm, n, s, flips, &st)
                equal_ok = 1
            elif variant == EA_ONE_ONE:
                if res_key == 0 and residual >= n:
                    skip = residual // n
                    if skip > budget - evals:
                        skip = budget - evals
                    evals += skip
                    residual -= skip * n
                    continue
                k = bernoulli(n, &residual, &res_key, 0, log_q[0], flips, &st)
                equal_ok = 1
            elif variant == FEA_BETA:
                alpha = sample_alpha(cdf, &st)
                if alpha > max_s:
                    max_s = alpha
                k = bernoulli(n, &residual, &res_key, alpha, log_q[alpha], flips, &st)
                equal_ok = 1
            else:  # SD_EA
                k = bernoulli(n, &residual, &res_key, r, log_q[r], flips, &st)
                equal_ok = r == 1

            # -- evaluation and selection -------------------------------------
            if k:
                apply_flips(&c, xp, flips, k)
                fy = eval_full(&c, xp)
            else:
                fy = fx
            evals += 1
            if variant == SD_RLS or variant == SD_RLS_STAR or variant == SD_EA:
                u += 1
            if (fy > fx) if sign > 0 else (fy < fx):
                fx = fy
                strict += 1
                improved = 1
                if trace is not None:
                    record(trace, evals, E_IMPROVE, s, r, u, flips, k)
            elif fy == fx and equal_ok:
                if trace is not None and k:
                    record(trace, evals, E_EQUAL, s, r, u, flips, k)
            else:
                apply_flips(&c, xp, flips, k)

            # -- parameter control ------------------------------------------
            if variant == SD_RLS:
                if improved:
                    if trace is not None:
                        record(trace, evals, E_RESET, s, r, u, flips, 0)
                    s = 1
                    u = 0
                elif u >= trig[s]:
                    if trace is not None:
                        record(trace, evals, E_UP, s, r, u, flips, 0)
                    if s < n:
                        s += 1
                    u = 0
                    if s > max_s:
                        max_s = s
            elif variant == SD_RLS_STAR:
                if improved:
                    if trace is not None:
                        record(trace, evals, E_RESET, s, r, u, flips, 0)
                    s = 1
                    r = 1
                    u = 0
                elif u >= trig[s]:
                    if s == 1:
                        if 2 * r < n:
                            if trace is not None:
                                record(trace, evals, E_RADIUS_UP, s, r, u, flips, 0)
                            r += 1
                        else:
                            if trace is not None:
                                record(trace, evals, E_RADIUS_N, s, r, u, flips, 0)
                            r = n
                        s = r
                        if s > max_s:
                            max_s = s
                    else:
                        if trace is not None:
                            record(trace, evals, E_DOWN, s, r, u, flips, 0)
                        s -= 1
                    u = 0
            elif variant == SD_EA:
                if improved:
                    if trace is not None:
                        record(trace, evals, E_RESET, s, r, u, flips, 0)
                    r = 1
                    u = 0
                elif u >= trig[r]:
                    if trace is not None:
                        record(trace, evals, E_UP, s, r, u, flips, 0)
                    if r < rmax:
                        r += 1
                    u = 0
                    if r > max_s:
                        max_s = r

            if improved and fx == opt_value:
                success = True
                break
    finally:
        free(perm)
        free(flips)
        free(log_q)
        if parent != NULL:
            free(parent)
    return evals, fx, strict, max_s, success, trace, st
