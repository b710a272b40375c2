"""Single-source numerical kernels.

Every function here is written in the numba-compilable subset of Python.
The package wires them up in one of two ways (see kernels/__init__.py):
jitted with numba, or executed as plain Python on numpy scalars.  Only
mix64/ctr_value have a second implementation for the plain path, because
numpy >= 1.24 warns on uint64 scalar overflow while numba wraps silently.

Index conventions inside kernels: qubits, bonds and majorana modes are all
0-based.  Bond b acts on qubits (b, b+1) and majorana modes 4b..4b+3 do not
exist; modes 2b..2b+3 do.  Public modules translate to the 1-based indexing
used everywhere else.
"""

import math

import numpy as np

# ---------------------------------------------------------------------------
# constants

GOLDEN = np.uint64(0x9E3779B97F4A7C15)

EPS_PIVOT = 1e-12      # zero pivot threshold in Givens / left-right moves
EPS_ID = 1e-8          # identity detection on orthogonal payloads
EPS_BRANCH = 1e-6      # double cover sign branch in from_r_u

TWO_PI = 2.0 * math.pi

_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
_I2 = np.eye(2, dtype=np.complex128)

# Jordan-Wigner majoranas on two qubits
GAMMA = np.stack([
    np.kron(_X, _I2),
    np.kron(_Y, _I2),
    np.kron(_Z, _X),
    np.kron(_Z, _Y),
]).astype(np.complex128)


def _lmat(a, b):
    m = np.zeros((4, 4))
    m[a, b] = 1.0
    m[b, a] = -1.0
    return m


# so(4) = su(2)+ x su(2)-; these bases have [K1,K2] = -2 K3 etc. and [K,M]=0
KBASIS = np.stack([
    _lmat(1, 2) + _lmat(0, 3),
    _lmat(2, 0) + _lmat(1, 3),
    _lmat(0, 1) + _lmat(2, 3),
])
MBASIS = np.stack([
    _lmat(1, 2) - _lmat(0, 3),
    _lmat(2, 0) - _lmat(1, 3),
    _lmat(0, 1) - _lmat(2, 3),
])

# all permutations of 4 slots in lexicographic order, used by the braid
# disentangler (index into this table is the deterministic tie-break)
def _perm_table():
    import itertools
    return np.array(list(itertools.permutations(range(4))), dtype=np.int64)


PERM24 = _perm_table()

F6 = np.array([4, 5, 2, 3, 0, 1], dtype=np.int64)   # qubit mirror on 6 modes
G4 = np.array([2, 3, 0, 1], dtype=np.int64)         # qubit mirror on 4 modes


# ---------------------------------------------------------------------------
# counter rng (splitmix64 finalizer over key + (ctr+1)*golden)

def mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def ctr_value(key, ctr):
    return mix64(key + np.uint64(ctr + 1) * GOLDEN)


def u01(key, ctr):
    # strictly inside (0, 1) so both log() and coin comparisons are safe
    v = ctr_value(key, ctr) >> 11
    return (np.float64(v) + 0.5) * (2.0 ** -53)


def gauss_fill(key, ctr, out):
    """Box-Muller pairs; consumes 2 counter values per pair."""
    n = out.shape[0]
    i = 0
    while i < n:
        a = u01(key, ctr)
        b = u01(key, ctr + 1)
        ctr += 2
        r = math.sqrt(-2.0 * math.log(a))
        t = TWO_PI * b
        out[i] = r * math.cos(t)
        if i + 1 < n:
            out[i + 1] = r * math.sin(t)
        i += 2
    return ctr


def haar_r(key, ctr, out_r):
    """Haar SO(4) sample into out_r; consumes 16 counter values."""
    g = np.empty(16)
    ctr = gauss_fill(key, ctr, g)
    m = np.empty((4, 4))
    for i in range(16):
        m[i // 4, i % 4] = g[i]
    q, r = np.linalg.qr(m)
    for j in range(4):
        if r[j, j] < 0.0:
            for i in range(4):
                q[i, j] = -q[i, j]
    if np.linalg.det(q) < 0.0:
        for i in range(4):
            q[i, 3] = -q[i, 3]
    out_r[:, :] = q
    return ctr


# ---------------------------------------------------------------------------
# matchgate algebra

def mg_from_blocks(a, b):
    u = np.zeros((4, 4), dtype=np.complex128)
    u[0, 0] = a[0, 0]
    u[0, 3] = a[0, 1]
    u[3, 0] = a[1, 0]
    u[3, 3] = a[1, 1]
    u[1, 1] = b[0, 0]
    u[1, 2] = b[0, 1]
    u[2, 1] = b[1, 0]
    u[2, 2] = b[1, 1]
    return u


def phasenorm(u):
    """Canonical phase: first outer-column entry real positive.

    For a matchgate |u00|^2 + |u30|^2 = 1, so the pivot is well defined.
    phasenorm(u) == phasenorm(-u), which kills the double cover ambiguity.
    """
    p = u[0, 0]
    if abs(p) <= 1e-8:
        p = u[3, 0]
    ph = (p / abs(p)).conjugate()
    out = np.empty((4, 4), dtype=np.complex128)
    for i in range(4):
        for j in range(4):
            out[i, j] = u[i, j] * ph
    return out


def to_r(u):
    """Adjoint action on majoranas: R_ij = Re tr(u^+ g_i u g_j) / 4."""
    uh = np.conj(u).T
    r = np.empty((4, 4))
    for i in range(4):
        x = np.dot(uh, np.dot(GAMMA[i], u))
        for j in range(4):
            t = 0.0 + 0.0j
            for a in range(4):
                for b in range(4):
                    t += x[a, b] * GAMMA[j, b, a]
            r[i, j] = t.real * 0.25
    return r


def _quat_from_so3(o):
    """Unit quaternion (w,x,y,z) of a 3x3 rotation, largest-pivot branch."""
    t = o[0, 0] + o[1, 1] + o[2, 2]
    if t > 0.0:
        r = math.sqrt(1.0 + t)
        w = 0.5 * r
        x = (o[2, 1] - o[1, 2]) / (2.0 * r)
        y = (o[0, 2] - o[2, 0]) / (2.0 * r)
        z = (o[1, 0] - o[0, 1]) / (2.0 * r)
    elif o[0, 0] >= o[1, 1] and o[0, 0] >= o[2, 2]:
        r = math.sqrt(1.0 + o[0, 0] - o[1, 1] - o[2, 2])
        x = 0.5 * r
        w = (o[2, 1] - o[1, 2]) / (2.0 * r)
        y = (o[0, 1] + o[1, 0]) / (2.0 * r)
        z = (o[0, 2] + o[2, 0]) / (2.0 * r)
    elif o[1, 1] >= o[2, 2]:
        r = math.sqrt(1.0 - o[0, 0] + o[1, 1] - o[2, 2])
        y = 0.5 * r
        w = (o[0, 2] - o[2, 0]) / (2.0 * r)
        x = (o[0, 1] + o[1, 0]) / (2.0 * r)
        z = (o[1, 2] + o[2, 1]) / (2.0 * r)
    else:
        r = math.sqrt(1.0 - o[0, 0] - o[1, 1] + o[2, 2])
        z = 0.5 * r
        w = (o[1, 0] - o[0, 1]) / (2.0 * r)
        x = (o[0, 2] + o[2, 0]) / (2.0 * r)
        y = (o[1, 2] + o[2, 1]) / (2.0 * r)
    n = math.sqrt(w * w + x * x + y * y + z * z)
    q = np.empty(4)
    q[0] = w / n
    q[1] = x / n
    q[2] = y / n
    q[3] = z / n
    return q


def _su2_from_quat(q):
    # the sector generators act as -1 times the usual so(3) basis, so the
    # lifted SU(2) element is qw - i q.sigma
    m = np.empty((2, 2), dtype=np.complex128)
    m[0, 0] = q[0] - 1j * q[3]
    m[0, 1] = -1j * q[1] - q[2]
    m[1, 0] = -1j * q[1] + q[2]
    m[1, 1] = q[0] + 1j * q[3]
    return m


def _adjoint_block(r, basis):
    o = np.empty((3, 3))
    for a in range(3):
        for b in range(3):
            rb = np.dot(r, np.dot(basis[b], r.T))
            t = 0.0
            for i in range(4):
                for j in range(4):
                    t += basis[a][i, j] * rb[i, j]
            o[a, b] = 0.25 * t
    return o


def from_r_u(r):
    """Inverse of to_r up to overall phase; returns the canonical section."""
    qp = _quat_from_so3(_adjoint_block(r, KBASIS))
    qm = _quat_from_so3(_adjoint_block(r, MBASIS))
    a = _su2_from_quat(qp)
    b = _su2_from_quat(qm)
    u = mg_from_blocks(a, b)
    r2 = to_r(u)
    dm = 0.0
    dp = 0.0
    for i in range(4):
        for j in range(4):
            e = r2[i, j] - r[i, j]
            f = r2[i, j] + r[i, j]
            if abs(e) > dm:
                dm = abs(e)
            if abs(f) > dp:
                dp = abs(f)
    if dm < EPS_BRANCH:
        return phasenorm(u)
    if dp < EPS_BRANCH:
        for i in range(2):
            for j in range(2):
                b[i, j] = -b[i, j]
        return phasenorm(mg_from_blocks(a, b))
    raise ValueError("from_r_u: matrix is not the rotation of a matchgate")


def params_to_u(alpha, beta, p1, p2, p3, p4):
    """exp(i p3 Z) x exp(i p4 Z) . exp(i(a XX + b YY)) . exp(i p2 Z) x exp(i p1 Z)."""
    a = _zxz(p3 + p4, alpha - beta, p2 + p1)
    b = _zxz(p3 - p4, alpha + beta, p2 - p1)
    return mg_from_blocks(a, b)


def _zxz(s, t, r):
    ct = math.cos(t)
    st = math.sin(t)
    m = np.empty((2, 2), dtype=np.complex128)
    m[0, 0] = ct * complex(math.cos(s + r), math.sin(s + r))
    m[0, 1] = 1j * st * complex(math.cos(s - r), math.sin(s - r))
    m[1, 0] = 1j * st * complex(math.cos(r - s), math.sin(r - s))
    m[1, 1] = ct * complex(math.cos(-s - r), math.sin(-s - r))
    return m


def from_params_r4(alpha, beta, p1, p2):
    return to_r(params_to_u(alpha, beta, p1, p2, 0.0, 0.0))


def fuse_r(r_first, r_after):
    return np.dot(r_after, r_first)


def is_id_r(r, tol):
    d = 0.0
    for i in range(4):
        for j in range(4):
            e = r[i, j] - (1.0 if i == j else 0.0)
            if abs(e) > d:
                d = abs(e)
    return d <= tol


# ---------------------------------------------------------------------------
# exchange (Yang-Baxter) move on orthogonal payloads

def _rotrows6(m, i, j, c, s):
    for col in range(6):
        x = m[i, col]
        y = m[j, col]
        m[i, col] = c * x - s * y
        m[j, col] = s * x + c * y


def _emb_low(r):
    m = np.eye(6)
    for i in range(4):
        for j in range(4):
            m[i, j] = r[i, j]
    return m


def _emb_high(r):
    m = np.eye(6)
    for i in range(4):
        for j in range(4):
            m[i + 2, j + 2] = r[i, j]
    return m


def _mirror6(m):
    out = np.empty((6, 6))
    for i in range(6):
        for j in range(6):
            out[i, j] = m[F6[i], F6[j]]
    return out


def _mirror4(m):
    out = np.empty((4, 4))
    for i in range(4):
        for j in range(4):
            out[i, j] = m[G4[i], G4[j]]
    return out


def yb_r(ra, rb, rc, ltr):
    """Exchange a three-gate staircase triple.

    Inputs are the rotations of (last, mid, first) applied gates.  For
    ltr=True the bond pattern is (low, high, low) -> (high, low, high);
    for ltr=False it is the mirror image.  Returns (last, mid, first).
    """
    if ltr:
        m = np.dot(_emb_low(ra), np.dot(_emb_high(rb), _emb_low(rc)))
    else:
        m = np.dot(_emb_high(ra), np.dot(_emb_low(rb), _emb_high(rc)))
        m = _mirror6(m)

    cs = np.empty((9, 3))
    idx = 0
    for r in range(5, 0, -1):           # zero column 0
        x = m[r - 1, 0]
        y = m[r, 0]
        h = math.hypot(x, y)
        if h < EPS_PIVOT:
            c = 1.0
            s = 0.0
        else:
            c = x / h
            s = -y / h
        _rotrows6(m, r - 1, r, c, s)
        cs[idx, 0] = r
        cs[idx, 1] = c
        cs[idx, 2] = s
        idx += 1
    for r in range(5, 1, -1):           # zero column 1
        x = m[r - 1, 1]
        y = m[r, 1]
        h = math.hypot(x, y)
        if h < EPS_PIVOT:
            c = 1.0
            s = 0.0
        else:
            c = x / h
            s = -y / h
        _rotrows6(m, r - 1, r, c, s)
        cs[idx, 0] = r
        cs[idx, 1] = c
        cs[idx, 2] = s
        idx += 1

    # regroup the nine rotations into a low-block and a high-block factor;
    # cs rows 0..4 are E5..E1 (stage 1), rows 5..8 are E9..E6 (stage 2)
    w1 = np.eye(6)
    for t in (3, 4, 7, 8):              # E6 E7 E1 E2, rightmost first
        r = int(cs[t, 0])
        _rotrows6(w1, r - 1, r, cs[t, 1], cs[t, 2])
    w2 = np.eye(6)
    for t in (0, 1, 2, 5, 6):           # E8 E9 E3 E4 E5, rightmost first
        r = int(cs[t, 0])
        _rotrows6(w2, r - 1, r, cs[t, 1], cs[t, 2])

    rv = np.empty((4, 4))
    rvp = np.empty((4, 4))
    rvpp = np.empty((4, 4))
    for i in range(4):
        for j in range(4):
            rv[i, j] = w2[j + 2, i + 2]     # p^T
            rvp[i, j] = w1[j, i]            # q^T
            rvpp[i, j] = m[i + 2, j + 2]    # residual block
    if not ltr:
        rv = _mirror4(rv)
        rvp = _mirror4(rvp)
        rvpp = _mirror4(rvpp)
    return rv, rvp, rvpp


# ---------------------------------------------------------------------------
# left-right (vacuum fold) move on unitary payloads

def lr_u(ua, ub, ltr):
    """Rewrite a two-gate product acting on |000> of three adjacent qubits.

    ua is applied last, ub first.  ltr=True: ua on the low bond, ub on the
    high bond; outputs (v applied last on the high bond, v' applied first on
    the low bond).  ltr=False mirrors both.  Outputs are phase-normalized.
    """
    if ltr:
        c0 = ub[0, 0] * ua[0, 0]
        c6 = ub[0, 0] * ua[3, 0]
        c3 = ub[3, 0] * ua[1, 1]
        c5 = ub[3, 0] * ua[2, 1]
        mu = math.sqrt(abs(c0) ** 2 + abs(c3) ** 2)
        nu = math.sqrt(abs(c5) ** 2 + abs(c6) ** 2)
        if mu > EPS_PIVOT:
            al = c0 / mu
            be = c3 / mu
        else:
            al = 1.0 + 0.0j
            be = 0.0j
        if nu > EPS_PIVOT:
            ga = c6 / nu
            de = c5 / nu
        else:
            ga = 1.0 + 0.0j
            de = 0.0j
        a1 = np.empty((2, 2), dtype=np.complex128)
        a1[0, 0] = al.conjugate()
        a1[0, 1] = be.conjugate()
        a1[1, 0] = -be
        a1[1, 1] = al
        b1 = np.empty((2, 2), dtype=np.complex128)
        b1[0, 0] = ga
        b1[0, 1] = -de
        b1[1, 0] = de.conjugate()
        b1[1, 1] = ga.conjugate()
    else:
        c0 = ub[0, 0] * ua[0, 0]
        c3 = ub[0, 0] * ua[3, 0]
        c5 = ub[3, 0] * ua[1, 2]
        c6 = ub[3, 0] * ua[2, 2]
        mu = math.sqrt(abs(c0) ** 2 + abs(c6) ** 2)
        nu = math.sqrt(abs(c3) ** 2 + abs(c5) ** 2)
        if mu > EPS_PIVOT:
            al = c0 / mu
            be = c6 / mu
        else:
            al = 1.0 + 0.0j
            be = 0.0j
        if nu > EPS_PIVOT:
            ga = c3 / nu
            de = c5 / nu
        else:
            ga = 1.0 + 0.0j
            de = 0.0j
        a1 = np.empty((2, 2), dtype=np.complex128)
        a1[0, 0] = al.conjugate()
        a1[0, 1] = be.conjugate()
        a1[1, 0] = -be
        a1[1, 1] = al
        b1 = np.empty((2, 2), dtype=np.complex128)
        b1[0, 0] = ga.conjugate()
        b1[0, 1] = de.conjugate()
        b1[1, 0] = -de
        b1[1, 1] = ga
    g1 = mg_from_blocks(a1, b1)
    cm = np.empty((2, 2), dtype=np.complex128)
    cm[0, 0] = mu
    cm[0, 1] = nu
    cm[1, 0] = -nu
    cm[1, 1] = mu
    g2 = mg_from_blocks(cm, cm)
    v_last = phasenorm(np.conj(g1).T)
    v_first = phasenorm(np.conj(g2).T)
    return v_last, v_first


# ---------------------------------------------------------------------------
# covariance matrices

def cov_vacuum(L):
    g = np.zeros((2 * L, 2 * L))
    for q in range(L):
        g[2 * q, 2 * q + 1] = -1.0
        g[2 * q + 1, 2 * q] = 1.0
    return g


def cov_apply(g, b0, r):
    """Conjugate rows/cols 2*b0..2*b0+3 by r and re-antisymmetrize them."""
    n = g.shape[0]
    base = 2 * b0
    tmp = np.empty((4, n))
    for i in range(4):
        for j in range(n):
            t = 0.0
            for k in range(4):
                t += r[i, k] * g[base + k, j]
            tmp[i, j] = t
    for i in range(4):
        for j in range(n):
            g[base + i, j] = tmp[i, j]
    for i in range(4):
        for j in range(n):
            t = 0.0
            for k in range(4):
                t += g[j, base + k] * r[i, k]
            tmp[i, j] = t
    for i in range(4):
        for j in range(n):
            g[j, base + i] = tmp[i, j]
    # local cleanup of roundoff asymmetry in the touched rows/cols
    for ii in range(4):
        i = base + ii
        for j in range(n):
            v = 0.5 * (g[i, j] - g[j, i])
            g[i, j] = v
            g[j, i] = -v
        g[i, i] = 0.0


def cov_orthonormalize(g):
    u, s, vt = np.linalg.svd(g)
    m = np.dot(u, vt)
    n = g.shape[0]
    for i in range(n):
        g[i, i] = 0.0
        for j in range(i + 1, n):
            v = 0.5 * (m[i, j] - m[j, i])
            g[i, j] = v
            g[j, i] = -v


def cov_purity_dev(g):
    n = g.shape[0]
    m = np.dot(g, g.T)
    d = 0.0
    for i in range(n):
        for j in range(n):
            e = m[i, j] - (1.0 if i == j else 0.0)
            if abs(e) > d:
                d = abs(e)
    return d


def ent_from_svals(s, n, eps_rank):
    """Renyi-n entropy from the singular values of a reduced covariance.

    Each Williamson value appears twice among the svals, hence the 0.5.
    """
    if n == 0.0:
        c = 0
        for i in range(s.shape[0]):
            lam = s[i]
            if lam > 1.0:
                lam = 1.0
            if lam < 1.0 - eps_rank:
                c += 1
        return 0.5 * c
    tot = 0.0
    for i in range(s.shape[0]):
        lam = s[i]
        if lam > 1.0:
            lam = 1.0
        if lam < 0.0:
            lam = 0.0
        p = 0.5 * (1.0 + lam)
        q = 1.0 - p
        if n == 1.0:
            t = 0.0
            if p > 0.0:
                t -= p * math.log(p)
            if q > 0.0:
                t -= q * math.log(q)
            tot += t / math.log(2.0)
        else:
            tot += math.log(p ** n + q ** n) / (math.log(2.0) * (1.0 - n))
    return 0.5 * tot


def cov_bond_entropy(g, m, L, n, eps_rank):
    """Entropy of qubits 0..m-1 (uses the smaller side, same spectrum)."""
    if m <= L - m:
        sub = g[: 2 * m, : 2 * m].copy()
    else:
        sub = g[2 * m:, 2 * m:].copy()
    u, s, vt = np.linalg.svd(sub)
    return ent_from_svals(s, n, eps_rank)


def cov_profile(g, L, n, eps_rank, out):
    for m in range(1, L):
        out[m - 1] = cov_bond_entropy(g, m, L, n, eps_rank)


def pfaffian(a):
    """Parlett-Reid with full column pivoting; destroys its argument."""
    n = a.shape[0]
    if n % 2 == 1:
        return 0.0
    if n == 0:
        return 1.0
    pf = 1.0
    for k in range(0, n - 2, 2):
        big = -1.0
        pidx = k + 1
        for i in range(k + 1, n):
            v = abs(a[i, k])
            if v > big:
                big = v
                pidx = i
        if big < 1e-300:
            return 0.0
        if pidx != k + 1:
            for j in range(n):
                t = a[pidx, j]
                a[pidx, j] = a[k + 1, j]
                a[k + 1, j] = t
            for j in range(n):
                t = a[j, pidx]
                a[j, pidx] = a[j, k + 1]
                a[j, k + 1] = t
            pf = -pf
        piv = a[k + 1, k]
        for i in range(k + 2, n):
            t = a[i, k] / piv
            if t != 0.0:
                for j in range(n):
                    a[i, j] -= t * a[k + 1, j]
                for j in range(n):
                    a[j, i] -= t * a[j, k + 1]
        pf *= a[k, k + 1]
    pf *= a[n - 2, n - 1]
    return pf


# ---------------------------------------------------------------------------
# bell pair configurations (partner[i] in -1 or 0..L-1)

def bell_entropy(partner, m):
    c = 0
    for i in range(m):
        if partner[i] >= m:
            c += 1
    return c


def bell_profile(partner, out):
    L = partner.shape[0]
    for m in range(1, L):
        out[m - 1] = bell_entropy(partner, m)


def bell_move(partner, b, entangle):
    pa = partner[b]
    pb = partner[b + 1]
    if entangle:
        if pa == -1 and pb == -1:
            partner[b] = b + 1
            partner[b + 1] = b
        elif pa == -1 and pb > b + 1:
            partner[b] = pb
            partner[pb] = b
            partner[b + 1] = -1
        elif pb == -1 and pa >= 0 and pa < b:
            partner[b + 1] = pa
            partner[pa] = b + 1
            partner[b] = -1
        elif pa >= 0 and pa < b and pb > b + 1:
            partner[pa] = b + 1
            partner[b + 1] = pa
            partner[pb] = b
            partner[b] = pb
        elif pa > b + 1 and pb > b + 1:
            if pb > pa:
                partner[b] = pb
                partner[pb] = b
                partner[b + 1] = pa
                partner[pa] = b + 1
        elif pa >= 0 and pa < b and pb >= 0 and pb < b:
            if pa < pb:
                partner[b] = pb
                partner[pb] = b
                partner[b + 1] = pa
                partner[pa] = b + 1
    else:
        if pa == b + 1:
            partner[b] = -1
            partner[b + 1] = -1
        elif pb == -1 and pa > b + 1:
            partner[b + 1] = pa
            partner[pa] = b + 1
            partner[b] = -1
        elif pa == -1 and pb >= 0 and pb < b:
            partner[b] = pb
            partner[pb] = b
            partner[b + 1] = -1
        elif pa > b + 1 and pb >= 0 and pb < b:
            partner[pb] = b
            partner[b] = pb
            partner[pa] = b + 1
            partner[b + 1] = pa
        elif pa > b + 1 and pb > b + 1:
            if pa > pb:
                partner[b] = pb
                partner[pb] = b
                partner[b + 1] = pa
                partner[pa] = b + 1
        elif pa >= 0 and pa < b and pb >= 0 and pb < b:
            if pb < pa:
                partner[b] = pb
                partner[pb] = b
                partner[b + 1] = pa
                partner[pa] = b + 1


def bell_chunk(partner, key, ctr, nmoves, p, L):
    for _ in range(nmoves):
        ub = u01(key, ctr)
        ctr += 1
        b = int(ub * (L - 1))
        uc = u01(key, ctr)
        ctr += 1
        bell_move(partner, b, uc >= p)
    return ctr


# ---------------------------------------------------------------------------
# majorana pairings (partner over 2L modes, fixed-point-free involution)

def braid_entropy2(partner, m):
    """Twice the entropy at bond m (1-based qubit cut): crossing count."""
    cut = 2 * m
    c = 0
    for i in range(cut):
        if partner[i] >= cut:
            c += 1
    return c


def braid_profile2(partner, out):
    n = partner.shape[0]
    L = n // 2
    for i in range(n):
        out[i] = 0
    # difference trick: pair (a,b) crosses cuts a < c <= b
    for a in range(n):
        b = partner[a]
        if b > a:
            out[a + 1] += 1
            if b + 1 < n:
                out[b + 1] -= 1
    run = 0
    for i in range(n):
        run += out[i]
        out[i] = run
    # compact to qubit cuts: entropy2 at bond m is the value at mode 2m
    for m in range(1, L):
        out[m - 1] = out[2 * m]
    for i in range(L - 1, n):
        out[i] = 0


def _braid_relabel(partner, b0, w):
    """Apply the window relabeling tau(m_i) = w[i] to the pairing."""
    oldp = np.empty(4, dtype=np.int64)
    for i in range(4):
        oldp[i] = partner[2 * b0 + i]
    neww = np.empty(4, dtype=np.int64)
    for i in range(4):
        neww[i] = -2
    for i in range(4):
        x = 2 * b0 + i
        nx = w[i]
        y = oldp[i]
        if 2 * b0 <= y < 2 * b0 + 4:
            ny = w[y - 2 * b0]
        else:
            ny = y
            partner[y] = nx
        neww[nx - 2 * b0] = ny
    for s in range(4):
        partner[2 * b0 + s] = neww[s]


def braid_random(partner, b0, key, ctr):
    """Uniform permutation of the 4 window majoranas (Fisher-Yates, 3 draws)."""
    w = np.empty(4, dtype=np.int64)
    for i in range(4):
        w[i] = 2 * b0 + i
    for i in range(3, 0, -1):
        u = u01(key, ctr)
        ctr += 1
        j = int(u * (i + 1))
        t = w[i]
        w[i] = w[j]
        w[j] = t
    _braid_relabel(partner, b0, w)
    return ctr


def _braid_local_score(partner, b0, w, L):
    """(entropy2 at the move bond, total |distance| delta) for candidate w.

    Only pairs touching the window change, so score those; constant terms
    cancel when comparing candidates.
    """
    cut = 2 * b0 + 2
    e2 = 0
    dist = 0
    for i in range(4):
        x = 2 * b0 + i
        y = partner[x]
        if 2 * b0 <= y < 2 * b0 + 4:
            if y < x:
                continue            # count in-window pairs once
            nx = w[i]
            ny = w[y - 2 * b0]
        else:
            nx = w[i]
            ny = y
        lo = nx if nx < ny else ny
        hi = nx if nx > ny else ny
        if lo < cut <= hi:
            e2 += 1
        dist += hi - lo
    return e2, dist


def braid_disentangle(partner, b0, L):
    """Best of the 24 window relabelings; ties by distance then table order."""
    best_e = 1 << 30
    best_d = 1 << 30
    best_i = 0
    for pi in range(24):
        w = np.empty(4, dtype=np.int64)
        for i in range(4):
            w[i] = 2 * b0 + PERM24[pi, i]
        e2, dist = _braid_local_score(partner, b0, w, L)
        if e2 < best_e or (e2 == best_e and dist < best_d):
            best_e = e2
            best_d = dist
            best_i = pi
    if best_i != 0:
        w = np.empty(4, dtype=np.int64)
        for i in range(4):
            w[i] = 2 * b0 + PERM24[best_i, i]
        _braid_relabel(partner, b0, w)


def braid_chunk(partner, key_a, ctr_a, key_b, ctr_b, nmoves, p, L):
    for _ in range(nmoves):
        ub = u01(key_a, ctr_a)
        ctr_a += 1
        b = int(ub * (L - 1))
        uc = u01(key_a, ctr_a)
        ctr_a += 1
        if uc < p:
            braid_disentangle(partner, b, L)
        else:
            ctr_b = braid_random(partner, b, key_b, ctr_b)
    return ctr_a, ctr_b


# ---------------------------------------------------------------------------
# reduced staircase form
#
# Flat state: ks/ls hold the diagonals (0-based first bond, length), meta[0]
# holds the diagonal count, rg/ug/uok hold one gate per cell concatenated by
# diagonal.  Within a diagonal, cell j sits at bond k+j and is applied before
# cell j+1; diagonal 0 is applied last.  ug is valid only where uok is set;
# stale cells are re-synthesized from rg through the canonical section.

def rsf_gstart(ls, d):
    off = 0
    for i in range(d):
        off += ls[i]
    return off


def rsf_total(ls, nd):
    t = 0
    for i in range(nd):
        t += ls[i]
    return t


def _rsf_open(rg, ug, uok, ntot, pos):
    for i in range(ntot - 1, pos - 1, -1):
        for a in range(4):
            for b in range(4):
                rg[i + 1, a, b] = rg[i, a, b]
                ug[i + 1, a, b] = ug[i, a, b]
        uok[i + 1] = uok[i]


def _rsf_close(rg, ug, uok, ntot, pos):
    for i in range(pos, ntot - 1):
        for a in range(4):
            for b in range(4):
                rg[i, a, b] = rg[i + 1, a, b]
                ug[i, a, b] = ug[i + 1, a, b]
        uok[i] = uok[i + 1]


def _rsf_set_r(rg, ug, uok, pos, r):
    for a in range(4):
        for b in range(4):
            rg[pos, a, b] = r[a, b]
    uok[pos] = False


def _rsf_set_ru(rg, ug, uok, pos, r, u):
    for a in range(4):
        for b in range(4):
            rg[pos, a, b] = r[a, b]
            ug[pos, a, b] = u[a, b]
    uok[pos] = True


def rsf_ensure_u(rg, ug, uok, pos):
    if not uok[pos]:
        u = from_r_u(rg[pos])
        for a in range(4):
            for b in range(4):
                ug[pos, a, b] = u[a, b]
        uok[pos] = True


def _rsf_drop(ks, ls, meta, rg, ug, uok, d, j):
    """Remove the (identity) gate j of diagonal d.  0 = done, 1 = the layout
    would go invalid (caller keeps the identity payload and may rebuild)."""
    nd = meta[0]
    k = ks[d]
    l = ls[d]
    ntot = rsf_total(ls, nd)
    pos = rsf_gstart(ls, d) + j
    if l == 1:
        _rsf_close(rg, ug, uok, ntot, pos)
        for i in range(d, nd - 1):
            ks[i] = ks[i + 1]
            ls[i] = ls[i + 1]
        meta[0] = nd - 1
        return 0
    if j == l - 1:
        _rsf_close(rg, ug, uok, ntot, pos)
        ls[d] = l - 1
        return 0
    if j == 0:
        if d + 1 < nd and ks[d + 1] < k + 3:
            return 1
        _rsf_close(rg, ug, uok, ntot, pos)
        ks[d] = k + 1
        ls[d] = l - 1
        return 0
    if d + 1 < nd and ks[d + 1] < k + j + 3:
        return 1
    _rsf_close(rg, ug, uok, ntot, pos)
    for i in range(nd - 1, d, -1):
        ks[i + 1] = ks[i]
        ls[i + 1] = ls[i]
    ks[d] = k
    ls[d] = j
    ks[d + 1] = k + j + 1
    ls[d + 1] = l - j - 1
    meta[0] = nd + 1
    return 0


def rsf_absorb(ks, ls, meta, rg, ug, uok, r0, u0, u0ok, q0, L):
    """Absorb a gate applied after the whole circuit at bond q0.

    Returns 0 normally, 1 if an identity produced by a fusion could not be
    dropped without invalidating the layout (the identity payload is kept;
    the circuit is still correct)."""
    rm = r0.copy()
    um = u0.copy()
    um_ok = u0ok
    q = q0
    d = 0
    while True:
        if is_id_r(rm, EPS_ID):
            return 0
        nd = meta[0]
        if d == nd:
            ntot = rsf_total(ls, nd)
            ks[nd] = q
            ls[nd] = 1
            if um_ok:
                _rsf_set_ru(rg, ug, uok, ntot, rm, um)
            else:
                _rsf_set_r(rg, ug, uok, ntot, rm)
            meta[0] = nd + 1
            return 0
        k = ks[d]
        l = ls[d]
        off = rsf_gstart(ls, d)
        if q <= k - 2:
            ntot = rsf_total(ls, nd)
            _rsf_open(rg, ug, uok, ntot, off)
            for i in range(nd - 1, d - 1, -1):
                ks[i + 1] = ks[i]
                ls[i + 1] = ls[i]
            ks[d] = q
            ls[d] = 1
            if um_ok:
                _rsf_set_ru(rg, ug, uok, off, rm, um)
            else:
                _rsf_set_r(rg, ug, uok, off, rm)
            meta[0] = nd + 1
            return 0
        if q == k - 1:
            # fold into the diagonal from the left
            if not um_ok:
                um = from_r_u(rm)
            rsf_ensure_u(rg, ug, uok, off)
            v_last, v_first = lr_u(um, ug[off], True)
            ntot = rsf_total(ls, nd)
            _rsf_open(rg, ug, uok, ntot, off)
            _rsf_set_ru(rg, ug, uok, off, to_r(v_first), v_first)
            _rsf_set_ru(rg, ug, uok, off + 1, to_r(v_last), v_last)
            ks[d] = k - 1
            ls[d] = l + 1
            return 0
        if q >= k + l + 1:
            d += 1
            continue
        if q == k + l:
            ntot = rsf_total(ls, nd)
            _rsf_open(rg, ug, uok, ntot, off + l)
            if um_ok:
                _rsf_set_ru(rg, ug, uok, off + l, rm, um)
            else:
                _rsf_set_r(rg, ug, uok, off + l, rm)
            ls[d] = l + 1
            return 0
        if q == k + l - 1:
            # fuse into the top gate of this diagonal
            pos = off + l - 1
            rnew = fuse_r(rg[pos], rm)
            _rsf_set_r(rg, ug, uok, pos, rnew)
            if is_id_r(rnew, EPS_ID):
                return _rsf_drop(ks, ls, meta, rg, ug, uok, d, l - 1)
            return 0
        if q > k:
            # exchange through the staircase, move one bond right and down
            j = q - k
            o_last, o_mid, o_first = yb_r(rm, rg[off + j + 1], rg[off + j], True)
            _rsf_set_r(rg, ug, uok, off + j + 1, o_last)
            _rsf_set_r(rg, ug, uok, off + j, o_mid)
            rm = o_first
            um_ok = False
            q += 1
            d += 1
            continue
        # q == k and l >= 2: exchange once, then fold back
        o_last, o_mid, o_first = yb_r(rm, rg[off + 1], rg[off], True)
        if d + 1 < nd and ks[d + 1] == k + 2:
            # threads into the next diagonal
            m2 = ls[d + 1]
            off2 = off + l
            u_ap = from_r_u(o_first)
            rsf_ensure_u(rg, ug, uok, off2)
            vt_last, ap_first = lr_u(u_ap, ug[off2], True)
            _rsf_set_ru(rg, ug, uok, off2, to_r(vt_last), vt_last)
            u_vp = from_r_u(o_mid)
            m1_last, w_first = lr_u(u_vp, ap_first, True)
            _rsf_set_ru(rg, ug, uok, off, to_r(w_first), w_first)
            _rsf_set_r(rg, ug, uok, off + 1, o_last)
            rmov = to_r(m1_last)
            nsteps = l - 1
            if m2 < nsteps:
                nsteps = m2
            j = 1
            while j <= nsteps:
                ob_last, ob_mid, ob_first = yb_r(rg[off + j], rg[off2 + j - 1], rmov, True)
                _rsf_set_r(rg, ug, uok, off + j, ob_mid)
                _rsf_set_r(rg, ug, uok, off2 + j - 1, ob_first)
                rmov = ob_last
                j += 1
            if l - 1 > m2:
                # ran out of second diagonal: fuse into the next cell above
                pos = off + m2 + 1
                rnew = fuse_r(rmov, rg[pos])   # moving gate applied first
                _rsf_set_r(rg, ug, uok, pos, rnew)
                if is_id_r(rnew, EPS_ID):
                    return _rsf_drop(ks, ls, meta, rg, ug, uok, d, m2 + 1)
                return 0
            # moving gate lands at bond k+l inside a reshaped pair of diagonals
            ntot = rsf_total(ls, nd)
            _rsf_open(rg, ug, uok, ntot, off2 + l - 1)
            tmp_r = np.empty((l - 1, 4, 4))
            tmp_u = np.empty((l - 1, 4, 4), dtype=np.complex128)
            tmp_ok = np.empty(l - 1, dtype=np.bool_)
            for i in range(l - 1):
                src = off + l + i
                for a in range(4):
                    for b in range(4):
                        tmp_r[i, a, b] = rg[src, a, b]
                        tmp_u[i, a, b] = ug[src, a, b]
                tmp_ok[i] = uok[src]
            _rsf_set_r(rg, ug, uok, off + l, rmov)
            for i in range(m2 - l + 1):
                src = off + 2 * l + i
                dst = off + l + 1 + i
                for a in range(4):
                    for b in range(4):
                        rg[dst, a, b] = rg[src, a, b]
                        ug[dst, a, b] = ug[src, a, b]
                uok[dst] = uok[src]
            for i in range(l - 1):
                dst = off + m2 + 2 + i
                for a in range(4):
                    for b in range(4):
                        rg[dst, a, b] = tmp_r[i, a, b]
                        ug[dst, a, b] = tmp_u[i, a, b]
                uok[dst] = tmp_ok[i]
            ls[d] = m2 + 2
            ks[d + 1] = k + 2
            ls[d + 1] = l - 1
            return 0
        # isolated first diagonal: fold the exchanged pair back into place
        u_vp = from_r_u(o_mid)
        u_ap = from_r_u(o_first)
        ap_last, w_first = lr_u(u_vp, u_ap, True)
        _rsf_set_ru(rg, ug, uok, off, to_r(w_first), w_first)
        rnew = np.dot(o_last, to_r(ap_last))
        _rsf_set_r(rg, ug, uok, off + 1, rnew)
        if is_id_r(rnew, EPS_ID):
            return _rsf_drop(ks, ls, meta, rg, ug, uok, d, 1)
        return 0


def rsf_probe(ks, ls, nd, q0, evd, evq):
    """Layout-only walk from bond q0.  Case decisions never look at payloads.

    Returns (terminal, d, nev): terminal 0 = the walk would create a gate
    (no reduction), 1 = it fuses into the top gate of diagonal d, 2 = it
    folds into an isolated first diagonal, 3 = it threads into the next
    diagonal and fuses there.
    """
    d = 0
    q = q0
    nev = 0
    while True:
        if d == nd:
            return 0, d, nev
        k = ks[d]
        l = ls[d]
        if q <= k - 1 or q == k + l:
            return 0, d, nev
        if q >= k + l + 1:
            d += 1
            continue
        if q == k + l - 1:
            return 1, d, nev
        if q > k:
            evd[nev] = d
            evq[nev] = q
            nev += 1
            q += 1
            d += 1
            continue
        if d + 1 == nd or ks[d + 1] != k + 2:
            return 2, d, nev
        if l - 1 > ls[d + 1]:
            return 3, d, nev
        return 0, d, nev


def rsf_disentangle(ks, ls, meta, rg, ug, uok, q0, evd, evq, out_r, out_u):
    """Try to remove one gate by acting at bond q0.

    On success the circuit is rewritten with one gate fewer, out_r/out_u get
    the extracted gate M (state_before = M . state_after), and 1 is
    returned.  Returns 0 when no reduction exists at this bond.
    """
    nd = meta[0]
    tt, dt, nev = rsf_probe(ks, ls, nd, q0, evd, evq)
    if tt == 0:
        return 0
    if tt == 1:
        k = ks[dt]
        l = ls[dt]
        off = rsf_gstart(ls, dt)
        pos = off + l - 1
        rm = rg[pos].copy()
        ntot = rsf_total(ls, nd)
        _rsf_close(rg, ug, uok, ntot, pos)
        if l == 1:
            for i in range(dt, nd - 1):
                ks[i] = ks[i + 1]
                ls[i] = ls[i + 1]
            meta[0] = nd - 1
        else:
            ls[dt] = l - 1
    elif tt == 2:
        k = ks[dt]
        l = ls[dt]
        off = rsf_gstart(ls, dt)
        rsf_ensure_u(rg, ug, uok, off)
        rsf_ensure_u(rg, ug, uok, off + 1)
        v_last, v_first = lr_u(ug[off + 1], ug[off], False)
        rm = to_r(v_last)
        _rsf_set_ru(rg, ug, uok, off, to_r(v_first), v_first)
        ntot = rsf_total(ls, nd)
        _rsf_close(rg, ug, uok, ntot, off + 1)
        ks[dt] = k + 1
        ls[dt] = l - 1
    else:
        # thread backwards through the next diagonal
        k = ks[dt]
        m1 = ls[dt]
        m2 = ls[dt + 1]
        off = rsf_gstart(ls, dt)
        pos = off + m2 + 1
        rmov = rg[pos].copy()
        ntot = rsf_total(ls, nd)
        _rsf_close(rg, ug, uok, ntot, pos)
        # old tail of diagonal dt joins the end of diagonal dt+1; rotate the
        # cells so the appended gates come last
        ntail = m1 - m2 - 2
        if ntail > 0:
            tmp_r = np.empty((ntail, 4, 4))
            tmp_u = np.empty((ntail, 4, 4), dtype=np.complex128)
            tmp_ok = np.empty(ntail, dtype=np.bool_)
            for i in range(ntail):
                src = off + m2 + 1 + i
                for a in range(4):
                    for b in range(4):
                        tmp_r[i, a, b] = rg[src, a, b]
                        tmp_u[i, a, b] = ug[src, a, b]
                tmp_ok[i] = uok[src]
            for i in range(m2):
                src = off + m1 - 1 + i
                dst = off + m2 + 1 + i
                for a in range(4):
                    for b in range(4):
                        rg[dst, a, b] = rg[src, a, b]
                        ug[dst, a, b] = ug[src, a, b]
                uok[dst] = uok[src]
            for i in range(ntail):
                dst = off + 2 * m2 + 1 + i
                for a in range(4):
                    for b in range(4):
                        rg[dst, a, b] = tmp_r[i, a, b]
                        ug[dst, a, b] = tmp_u[i, a, b]
                uok[dst] = tmp_ok[i]
        ls[dt] = m2 + 1
        ks[dt + 1] = k + 2
        ls[dt + 1] = m1 - 2
        off2 = off + m2 + 1
        for j in range(m2, 0, -1):
            ob_last, ob_mid, ob_first = yb_r(rmov, rg[off + j], rg[off2 + j - 1], False)
            _rsf_set_r(rg, ug, uok, off + j, ob_last)
            _rsf_set_r(rg, ug, uok, off2 + j - 1, ob_mid)
            rmov = ob_first
        # unfold the two left-right moves
        um = from_r_u(rmov)
        rsf_ensure_u(rg, ug, uok, off)
        o_low, o_high = lr_u(um, ug[off], False)
        _rsf_set_ru(rg, ug, uok, off, to_r(o_low), o_low)
        um = o_high
        rsf_ensure_u(rg, ug, uok, off2)
        o_low2, o_high2 = lr_u(ug[off2], um, False)
        _rsf_set_ru(rg, ug, uok, off2, to_r(o_high2), o_high2)
        um = o_low2
        rmov = to_r(um)
        o1, o2, o3 = yb_r(rg[off + 1], rg[off], rmov, False)
        _rsf_set_r(rg, ug, uok, off + 1, o2)
        _rsf_set_r(rg, ug, uok, off, o3)
        rm = o1
    # walk the extracted gate back out through the recorded exchanges
    for e in range(nev - 1, -1, -1):
        d = evd[e]
        j = evq[e] - ks[d]
        off = rsf_gstart(ls, d)
        o1, o2, o3 = yb_r(rg[off + j + 1], rg[off + j], rm, False)
        rm = o1
        _rsf_set_r(rg, ug, uok, off + j + 1, o2)
        _rsf_set_r(rg, ug, uok, off + j, o3)
    out_r[:, :] = rm
    out_u[:, :] = from_r_u(rm)
    return 1


def rsf_renyi0_profile(ks, ls, nd, L, out):
    """min-cut replay: a gate at 1-based bond m sets S_m = 1 + min(S_m-1, S_m+1)."""
    s = np.zeros(L + 1, dtype=np.int64)
    for d in range(nd - 1, -1, -1):
        k = ks[d]
        for j in range(ls[d]):
            m = k + j + 1
            lo = s[m - 1]
            if s[m + 1] < lo:
                lo = s[m + 1]
            s[m] = 1 + lo
    for m in range(1, L):
        out[m - 1] = s[m]


def rsf_eval_cov(ks, ls, nd, rg, L, g):
    g[:, :] = cov_vacuum(L)
    for d in range(nd - 1, -1, -1):
        off = rsf_gstart(ls, d)
        k = ks[d]
        for j in range(ls[d]):
            cov_apply(g, k + j, rg[off + j])


def rsf_game_chunk(ks, ls, meta, rg, ug, uok, key_a, ctr_a, key_b, ctr_b,
                   nmoves, p, L, evd, evq, tmp_r, tmp_u):
    for _ in range(nmoves):
        ub = u01(key_a, ctr_a)
        ctr_a += 1
        b = int(ub * (L - 1))
        uc = u01(key_a, ctr_a)
        ctr_a += 1
        if uc < p:
            rsf_disentangle(ks, ls, meta, rg, ug, uok, b, evd, evq, tmp_r, tmp_u)
        else:
            ctr_b = haar_r(key_b, ctr_b, tmp_r)
            rsf_absorb(ks, ls, meta, rg, ug, uok, tmp_r, tmp_u, False, b, L)
    return ctr_a, ctr_b


def rsf_renyi0_bond(ks, ls, nd, L, m):
    s = np.zeros(L + 1, dtype=np.int64)
    for d in range(nd - 1, -1, -1):
        k = ks[d]
        for j in range(ls[d]):
            mm = k + j + 1
            lo = s[mm - 1]
            if s[mm + 1] < lo:
                lo = s[mm + 1]
            s[mm] = 1 + lo
    return s[m]


def rsf_probe_new_bond_s0(ks, ls, nd, L, q0, m, evd, evq):
    """Bond-m rank entropy of the layout that a successful reduction at q0
    would leave behind; -1 when no reduction exists.  Pure layout logic."""
    tt, dt, nev = rsf_probe(ks, ls, nd, q0, evd, evq)
    if tt == 0:
        return -1
    nd2 = nd
    ks2 = ks[:nd].copy()
    ls2 = ls[:nd].copy()
    if tt == 1:
        if ls2[dt] == 1:
            for i in range(dt, nd2 - 1):
                ks2[i] = ks2[i + 1]
                ls2[i] = ls2[i + 1]
            nd2 -= 1
        else:
            ls2[dt] -= 1
    elif tt == 2:
        ks2[dt] += 1
        ls2[dt] -= 1
    else:
        m1 = ls2[dt]
        m2 = ls2[dt + 1]
        ls2[dt] = m2 + 1
        ls2[dt + 1] = m1 - 2
    return rsf_renyi0_bond(ks2, ls2, nd2, L, m)


# ---------------------------------------------------------------------------
# min-entanglement local unitary search on covariance matrices

def vn_build_ext(g, b0, L):
    """Extended reduced block around bond b0 using the smaller side.

    Returns (mext, left): for the left region mext covers modes
    0..2*b0+3 (gate modes last), otherwise modes 2*b0..2L-1 (gate modes
    first).
    """
    if b0 + 1 <= L - b0 - 1:
        mext = g[: 2 * b0 + 4, : 2 * b0 + 4].copy()
        return mext, True
    mext = g[2 * b0:, 2 * b0:].copy()
    return mext, False


def vn_entropy_after(mext, left, r, n, eps_rank):
    """Region entropy after conjugating the 4 gate modes of mext by r."""
    e = mext.shape[0]
    nr = e - 2
    a = np.zeros((nr, nr))
    if left:
        # region = first e-2 modes, gate modes are the last 4
        for i in range(e - 4):
            for j in range(e - 4):
                a[i, j] = mext[i, j]
        for ii in range(2):
            for j in range(e - 4):
                t = 0.0
                for kq in range(4):
                    t += r[ii, kq] * mext[e - 4 + kq, j]
                a[e - 4 + ii, j] = t
                a[j, e - 4 + ii] = -t
        for ii in range(2):
            for jj in range(2):
                t = 0.0
                for kq in range(4):
                    for lq in range(4):
                        t += r[ii, kq] * mext[e - 4 + kq, e - 4 + lq] * r[jj, lq]
                a[e - 4 + ii, e - 4 + jj] = t
        a[e - 4, e - 4] = 0.0
        a[e - 3, e - 3] = 0.0
        v = 0.5 * (a[e - 4, e - 3] - a[e - 3, e - 4])
        a[e - 4, e - 3] = v
        a[e - 3, e - 4] = -v
    else:
        # region = last e-2 modes, gate modes are the first 4
        for i in range(e - 4):
            for j in range(e - 4):
                a[2 + i, 2 + j] = mext[4 + i, 4 + j]
        for ii in range(2):
            for j in range(e - 4):
                t = 0.0
                for kq in range(4):
                    t += r[2 + ii, kq] * mext[kq, 4 + j]
                a[ii, 2 + j] = t
                a[2 + j, ii] = -t
        for ii in range(2):
            for jj in range(2):
                t = 0.0
                for kq in range(4):
                    for lq in range(4):
                        t += r[2 + ii, kq] * mext[kq, lq] * r[2 + jj, lq]
                a[ii, jj] = t
        a[0, 0] = 0.0
        a[1, 1] = 0.0
        v = 0.5 * (a[0, 1] - a[1, 0])
        a[0, 1] = v
        a[1, 0] = -v
    # eigvalsh of a a^T beats svd ~3x here and this is the search hot spot
    w = np.linalg.eigvalsh(np.dot(a, a.T))
    return ent_from_svals(np.sqrt(np.abs(w)), n, eps_rank)


def _vn_objective(mext, left, x, n, eps_rank):
    r = from_params_r4(x[0], x[1], x[2], x[3])
    return vn_entropy_after(mext, left, r, n, eps_rank)


def vn_opt(mext, left, n, eps_rank, grid_r, grid_p, nm_starts, nm_iters, nm_tol):
    """Grid scan plus Nelder-Mead refinement from the best grid points.

    Returns (params, entropy, use_gate).  use_gate is 0 when the identity is
    at least as good, so callers can skip the move entirely.
    """
    eye = np.eye(4)
    base = vn_entropy_after(mext, left, eye, n, eps_rank)
    ng = grid_r.shape[0]
    # best nm_starts grid points
    nb = nm_starts
    if nb < 1:
        nb = 1
    best_i = np.full(nb, -1, dtype=np.int64)
    best_v = np.full(nb, 1e300)
    for i in range(ng):
        v = vn_entropy_after(mext, left, grid_r[i], n, eps_rank)
        w = i
        vv = v
        for t in range(nb):
            if vv < best_v[t]:
                tv = best_v[t]
                ti = best_i[t]
                best_v[t] = vv
                best_i[t] = w
                vv = tv
                w = ti
    bx = np.zeros(4)
    bv = base
    for t in range(nb):
        if best_i[t] >= 0 and best_v[t] < bv:
            bv = best_v[t]
            for c in range(4):
                bx[c] = grid_p[best_i[t], c]
    for t in range(nb):
        if best_i[t] < 0:
            continue
        x0 = grid_p[best_i[t]].copy()
        xr, vr = _nelder_mead(mext, left, x0, n, eps_rank, nm_iters, nm_tol)
        if vr < bv:
            bv = vr
            bx = xr
    if bv >= base - 1e-12:
        return np.zeros(4), base, 0
    return bx, bv, 1


def _nelder_mead(mext, left, x0, n, eps_rank, iters, tol):
    dim = 4
    pts = np.empty((5, 4))
    vals = np.empty(5)
    for i in range(5):
        for c in range(4):
            pts[i, c] = x0[c]
        if i > 0:
            pts[i, i - 1] += 0.2
        vals[i] = _vn_objective(mext, left, pts[i], n, eps_rank)
    for _ in range(iters):
        # insertion sort by value
        for i in range(1, 5):
            vv = vals[i]
            row = pts[i].copy()
            j = i - 1
            while j >= 0 and vals[j] > vv:
                vals[j + 1] = vals[j]
                pts[j + 1] = pts[j]
                j -= 1
            vals[j + 1] = vv
            pts[j + 1] = row
        if vals[4] - vals[0] < tol:
            break
        cen = np.zeros(4)
        for i in range(4):
            for c in range(4):
                cen[c] += pts[i, c] * 0.25
        xr = np.empty(4)
        for c in range(4):
            xr[c] = cen[c] + (cen[c] - pts[4, c])
        vr = _vn_objective(mext, left, xr, n, eps_rank)
        if vr < vals[0]:
            xe = np.empty(4)
            for c in range(4):
                xe[c] = cen[c] + 2.0 * (cen[c] - pts[4, c])
            ve = _vn_objective(mext, left, xe, n, eps_rank)
            if ve < vr:
                pts[4] = xe
                vals[4] = ve
            else:
                pts[4] = xr
                vals[4] = vr
        elif vr < vals[3]:
            pts[4] = xr
            vals[4] = vr
        else:
            xc = np.empty(4)
            for c in range(4):
                xc[c] = cen[c] + 0.5 * (pts[4, c] - cen[c])
            vc = _vn_objective(mext, left, xc, n, eps_rank)
            if vc < vals[4]:
                pts[4] = xc
                vals[4] = vc
            else:
                for i in range(1, 5):
                    for c in range(4):
                        pts[i, c] = pts[0, c] + 0.5 * (pts[i, c] - pts[0, c])
                    vals[i] = _vn_objective(mext, left, pts[i], n, eps_rank)
    besti = 0
    for i in range(1, 5):
        if vals[i] < vals[besti]:
            besti = i
    return pts[besti].copy(), vals[besti]


def cov_vn_chunk(g, key_a, ctr_a, key_b, ctr_b, nmoves, p, L, n, eps_rank,
                 grid_r, grid_p, nm_starts, nm_iters, nm_tol, gate_count):
    tmp = np.empty((4, 4))
    for _ in range(nmoves):
        ub = u01(key_a, ctr_a)
        ctr_a += 1
        b = int(ub * (L - 1))
        uc = u01(key_a, ctr_a)
        ctr_a += 1
        if uc < p:
            mext, left = vn_build_ext(g, b, L)
            x, v, use = vn_opt(mext, left, n, eps_rank, grid_r, grid_p,
                               nm_starts, nm_iters, nm_tol)
            if use == 1:
                r = from_params_r4(x[0], x[1], x[2], x[3])
                cov_apply(g, b, r)
        else:
            ctr_b = haar_r(key_b, ctr_b, tmp)
            cov_apply(g, b, tmp)
        gate_count += 1
        if gate_count % 10000 == 0:
            cov_orthonormalize(g)
    return ctr_a, ctr_b, gate_count


# names that get the njit treatment (order matters only for readability)
KERNELS = (
    "mix64", "ctr_value", "u01", "gauss_fill", "haar_r",
    "mg_from_blocks", "phasenorm", "to_r", "_quat_from_so3", "_su2_from_quat",
    "_adjoint_block", "from_r_u", "params_to_u", "_zxz", "from_params_r4",
    "fuse_r", "is_id_r",
    "_rotrows6", "_emb_low", "_emb_high", "_mirror6", "_mirror4", "yb_r",
    "lr_u",
    "cov_vacuum", "cov_apply", "cov_orthonormalize", "cov_purity_dev",
    "ent_from_svals", "cov_bond_entropy", "cov_profile", "pfaffian",
    "bell_entropy", "bell_profile", "bell_move", "bell_chunk",
    "braid_entropy2", "braid_profile2", "_braid_relabel", "braid_random",
    "_braid_local_score", "braid_disentangle", "braid_chunk",
    "rsf_gstart", "rsf_total", "_rsf_open", "_rsf_close", "_rsf_set_r",
    "_rsf_set_ru", "rsf_ensure_u", "_rsf_drop", "rsf_absorb", "rsf_probe",
    "rsf_disentangle", "rsf_renyi0_profile", "rsf_eval_cov", "rsf_game_chunk",
    "rsf_renyi0_bond", "rsf_probe_new_bond_s0",
    "vn_build_ext", "vn_entropy_after", "_vn_objective", "vn_opt",
    "_nelder_mead", "cov_vn_chunk",
)
