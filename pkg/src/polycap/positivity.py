"""Weighted positivity of elliptic operators.

The property under test: the energy against the fundamental-solution weight
dominates a Hardy sum of weighted gradient norms for all test functions
vanishing near the origin.  For (-Delta)^m both sides are rotation and
dilation invariant, so they split over spherical-harmonic degrees k into
one-dimensional forms on the log-radial line t = log r, where they have
constant coefficients.  Channel k of the weighted operator form has Fourier
symbol

    Re prod_{j<m} Lambda_k(i tau - 2j),   Lambda_k(s) = (k-s)(k+s+n-2),

and the Hardy comparison form has symbol sum_j t_{j,k}(tau) obtained from the
recursion G_j(s1,s2) = Lambda_k(s1) G_{j-1}(s1-2,s2)
- (2j-n-s1-s2)(s1-j+1) G_{j-1}(s1,s2) with t_{j,k} = Re G_j(i tau, -i tau).
The grid implementation discretizes these even symbols as sums of squared
difference quotients on a wide t window; the closed-form symbols double as
an independent validation route for every violation witness.

A verdict of "violated" ships a witness profile whose re-evaluated energy is
strictly negative; a positive verdict is always positivity at the declared
resolution, never a proof.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .energy import EnergyForm, HardyForm
from .errors import InputError, UnsupportedRegimeError
from .fundsol import riesz_constant
from .solvers import smallest_generalized_eig
from .stencils import sparse_alpha


def _lam_poly(k, n, shift):
    """Lambda_k(i tau + shift) as a complex polynomial in tau."""
    s = Polynomial([shift, 1j])
    return (k - s) * (k + s + (n - 2))


def op_channel_poly(m, n, k):
    """prod_j Lambda_k(i tau - 2j), complex polynomial in tau."""
    q = Polynomial([1.0 + 0.0j])
    for j in range(m):
        q = q * _lam_poly(k, n, -2.0 * j)
    return q


def _g_poly(j, k, n, mu, nu):
    """G_j(i tau + mu, -i tau + nu) as a polynomial in tau."""
    if j == 0:
        return Polynomial([1.0 + 0.0j])
    s1 = Polynomial([mu, 1j])
    s2 = Polynomial([nu, -1j])
    lam = (k - s1) * (k + s1 + (n - 2))
    euler = (2.0 * j - n) - s1 - s2
    return lam * _g_poly(j - 1, k, n, mu - 2.0, nu) - euler * (s1 - (j - 1.0)) * _g_poly(
        j - 1, k, n, mu, nu
    )


def hardy_channel_poly(m, n, k):
    """sum_{j=1..m} t_{j,k} as a polynomial in tau (real part taken)."""
    total = Polynomial([0.0 + 0.0j])
    for j in range(1, m + 1):
        total = total + _g_poly(j, k, n, 0.0, 0.0)
    return total


def _even_real_coeffs(poly, label):
    """tau^(2p) coefficients of the real part of a channel symbol.

    The quadratic form only sees Re q(tau), which is even; the imaginary
    part of the polynomial encodes the antisymmetric remainder and is
    discarded, but an odd real part would mean a wrong symbol."""
    c = np.asarray(poly.coef)
    scale = np.abs(c).max() if c.size else 1.0
    re = c.real
    odd = re[1::2]
    if odd.size and np.abs(odd).max() > 1e-9 * scale:
        raise InputError(f"{label}: symbol has a spurious odd part")
    return re[0::2]  # coefficient of tau^(2p)


def op_channel_symbol(m, n, k, tau):
    tau = np.asarray(tau, dtype=float)
    q = np.ones_like(tau, dtype=complex)
    s = 1j * tau
    for j in range(m):
        q = q * ((k - (s - 2 * j)) * (k + (s - 2 * j) + n - 2))
    return q.real


def hardy_channel_symbol(m, n, k, tau):
    poly = hardy_channel_poly(m, n, k)
    return poly(np.asarray(tau, dtype=float) + 0j).real


def min_symbol_quotient(m, n, k, tau_max=40.0, samples=200_001):
    """Closed-form infimum of the channel Rayleigh quotient over frequencies."""
    tau = np.linspace(1e-9, tau_max, samples)
    num = riesz_constant(m, n) * op_channel_symbol(m, n, k, tau)
    den = hardy_channel_symbol(m, n, k, tau)
    return float((num / den).min())


@dataclass
class ChannelForm:
    """Discretized channel-k forms on a uniform log-radial grid."""

    m: int
    n: int
    k: int
    t_window: float
    dt: float
    A: object = None
    B: object = None

    def __post_init__(self):
        nt = int(round(self.t_window / self.dt)) + 1
        self.nodes = nt
        kappa = riesz_constant(self.m, self.n)
        ca = kappa * _even_real_coeffs(op_channel_poly(self.m, self.n, self.k), "operator")
        cb = _even_real_coeffs(hardy_channel_poly(self.m, self.n, self.k), "hardy")
        if cb.min() < -1e-12 * max(1.0, np.abs(cb).max()):
            raise InputError("hardy channel symbol has a negative coefficient")
        cb = np.clip(cb, 0.0, None)
        self.A = self._form_from_coeffs(ca)
        self.B = self._form_from_coeffs(cb)

    def _form_from_coeffs(self, coeffs):
        from .stencils import injection_matrix

        pad = self.m + 1
        padded = (self.nodes + 2 * pad,)
        P = injection_matrix((self.nodes,), pad)
        mat = None
        for p, c in enumerate(coeffs):
            if c == 0.0:
                continue
            D = sparse_alpha(padded, (p,)) / self.dt**p
            part = (c * self.dt) * (D.T @ D)
            mat = part if mat is None else mat + part
        return (P.T @ (0.5 * (mat + mat.T)) @ P).tocsr()

    def quotient(self, f):
        f = np.asarray(f, dtype=float)
        num = float(f @ (self.A @ f))
        den = float(f @ (self.B @ f))
        if den <= 0:
            raise InputError("comparison form vanished on the witness")
        return num / den

    def min_quotient(self):
        val, vec = smallest_generalized_eig(self.A, self.B)
        return val, vec


@dataclass
class PositivityVerdict:
    status: str
    m: int
    n: int
    method: str
    channel_quotients: dict = field(default_factory=dict)
    min_quotient: float = float("nan")
    argmin_channel: int = -1
    witness: dict | None = None
    resolution: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def as_dict(self):
        out = {
            "status": self.status,
            "m": self.m,
            "n": self.n,
            "method": self.method,
            "channel_quotients": {str(k): v for k, v in self.channel_quotients.items()},
            "min_quotient": self.min_quotient,
            "argmin_channel": self.argmin_channel,
            "resolution": dict(self.resolution),
            "notes": list(self.notes),
            "evidence": "numerical evidence at the stated resolution, not a proof",
        }
        if self.witness is not None:
            out["witness"] = {k: v for k, v in self.witness.items() if k != "values"}
        return out


def _revalidate_witness(m, n, k, t_window, dt, f):
    """Re-evaluate a violation witness on a doubled grid and spectrally."""
    # doubled-resolution finite differences
    fine = ChannelForm(m, n, k, t_window, dt / 2.0)
    t = np.linspace(0.0, t_window, f.size)
    tf = np.linspace(0.0, t_window, fine.nodes)
    ff = np.interp(tf, t, f)
    q_fine = fine.quotient(ff)
    # spectral route through the closed-form symbol
    pad = 8
    nfft = pad * f.size
    fhat = np.fft.rfft(f, n=nfft)
    tau = 2.0 * np.pi * np.fft.rfftfreq(nfft, d=dt)
    kappa = riesz_constant(m, n)
    num = kappa * op_channel_symbol(m, n, k, tau) * np.abs(fhat) ** 2
    den = hardy_channel_symbol(m, n, k, tau) * np.abs(fhat) ** 2
    q_spec = float(num.sum() / den.sum())
    return q_fine, q_spec


def channel_positivity(m, n, channels=None, t_window=60.0, dt=0.1, eps=1e-8,
                       stability_rtol=0.02, max_window_doublings=2, jobs=1):
    """Channel-by-channel positivity verdict for (-Delta)^m with its kernel
    weight.  Violation witnesses are re-validated on a doubled grid and
    against the closed-form symbols before the verdict is issued."""
    if n <= 2 * m:
        raise UnsupportedRegimeError("weighted positivity is posed for n > 2m")
    if channels is None:
        channels = list(range(0, 13))
    channels = sorted(set(int(k) for k in channels))
    if not channels or channels[0] < 0:
        raise InputError("channel list must be nonempty and nonnegative")

    def one_channel(k, window):
        form = ChannelForm(m, n, k, window, dt)
        val, vec = form.min_quotient()
        return k, val, (form, vec)

    def sweep(window):
        if jobs > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=int(jobs)) as pool:
                rows = list(pool.map(lambda k: one_channel(k, window), channels))
        else:
            rows = [one_channel(k, window) for k in channels]
        quots = {k: val for k, val, _ in rows}
        vecs = {k: fv for k, _, fv in rows}
        return quots, vecs

    window = float(t_window)
    quots, vecs = sweep(window)
    doublings = 0
    while doublings < max_window_doublings:
        wide_quots, wide_vecs = sweep(window * 2.0)
        drift = max(
            abs(wide_quots[k] - quots[k]) / max(abs(quots[k]), 1e-6) for k in channels
        )
        quots, vecs, window = wide_quots, wide_vecs, window * 2.0
        doublings += 1
        if drift < stability_rtol:
            break

    kmin = min(quots, key=lambda k: quots[k])
    notes = []
    if kmin >= channels[-1] - 1 and channels[-1] < 40:
        extra = list(range(channels[-1] + 1, 2 * channels[-1] + 1))
        for k in extra:
            form = ChannelForm(m, n, k, window, dt)
            val, vec = form.min_quotient()
            quots[k] = val
            vecs[k] = (form, vec)
        notes.append(f"channel guard extended the sweep to k <= {2 * channels[-1]}")
        kmin = min(quots, key=lambda k: quots[k])

    resolution = {"t_window": window, "dt": dt, "channels": sorted(quots),
                  "eps": eps}
    vmin = quots[kmin]
    if vmin < -eps:
        form, vec = vecs[kmin]
        f = np.asarray(vec, dtype=float)
        f /= np.abs(f).max()
        q_fine, q_spec = _revalidate_witness(m, n, kmin, window, dt, f)
        if not (q_fine < 0.0 and q_spec < 0.0):
            notes.append(
                f"witness failed re-validation (fine {q_fine:.3e}, spectral {q_spec:.3e})"
            )
            return PositivityVerdict("positive_at_resolution", m, n, "channel", quots,
                                     vmin, kmin, None, resolution, notes)
        witness = {
            "channel": kmin,
            "quotient": vmin,
            "quotient_fine_grid": q_fine,
            "quotient_spectral": q_spec,
            "t_window": window,
            "dt": dt,
            "values": f,
        }
        return PositivityVerdict("violated", m, n, "channel", quots, vmin, kmin,
                                 witness, resolution, notes)
    return PositivityVerdict("positive_at_resolution", m, n, "channel", quots,
                             vmin, kmin, None, resolution, notes)


def _smooth_field(u, passes):
    """Tensor [1,2,1]/4 averaging with zero extension, applied in place-free form."""
    from .stencils import apply_axis

    offs = np.array([-1, 0, 1])
    coeffs = np.array([0.25, 0.5, 0.25])
    out = u
    for _ in range(passes):
        for axis in range(u.ndim):
            out = apply_axis(out, axis, offs, coeffs)
    return out


def grid_positivity(op, grid, profile, eps=1e-8, smoothing=2):
    """Full-grid positivity check against the Hardy comparison form.

    The minimization runs over a smoothed trial space (fields of the form
    S^p v with a local averaging operator S): the raw nodal space contains
    near-Nyquist oscillations on which the composed-stencil weighted form is
    not consistent with any continuum object, and those would report
    violations even for operators that are provably positive with their
    weight.  Feasible for n <= 5 only; the channel method covers the
    rotation invariant family in higher dimensions."""
    n, m = grid.n, op.m
    if n <= 2 * m:
        raise UnsupportedRegimeError("weighted positivity is posed for n > 2m")
    if n > 5:
        raise UnsupportedRegimeError(
            "full-grid positivity is limited to n <= 5; use channel_positivity"
        )
    if grid.size > 450_000:
        raise UnsupportedRegimeError(
            f"grid has {grid.size} nodes; shrink the extent for the full-grid check"
        )
    from scipy.sparse.linalg import LinearOperator, lobpcg

    wform = EnergyForm("weighted_operator_form", grid, m, op=op,
                       weight=_weight_values(profile, grid))
    hform = HardyForm(grid, m)
    center = grid.origin_index()
    fixed = np.zeros(grid.shape, dtype=bool)
    window = tuple(slice(max(c - 2 * m, 0), c + 2 * m + 1) for c in center)
    fixed[window] = True
    free = ~fixed

    def trial(v):
        x = grid.zeros()
        x[free] = v
        x = _smooth_field(x, smoothing)
        x[fixed] = 0.0
        return x

    def wrap(apply_fn):
        def mv(v):
            x = apply_fn(trial(np.asarray(v).reshape(-1)))
            x[fixed] = 0.0
            x = _smooth_field(x, smoothing)
            return x[free]

        def mm(V):
            return np.column_stack([mv(V[:, i]) for i in range(V.shape[1])])

        nfree = int(free.sum())
        return LinearOperator((nfree, nfree), matvec=mv, matmat=mm, dtype=np.float64)

    nfree = int(free.sum())
    rng = np.random.default_rng(12345)
    x0 = rng.standard_normal((nfree, 3))
    x0[:, 0] = 1.0
    import warnings as _warnings

    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore")
        vals, vecs = lobpcg(wrap(wform.apply), x0, B=wrap(hform.apply), largest=False,
                            tol=1e-7, maxiter=400)
    k = int(np.argmin(vals))
    val, vec = float(vals[k]), vecs[:, k]
    resolution = {"h": grid.h, "extent": grid.extent, "eps": eps,
                  "smoothing_passes": smoothing}
    verdict = PositivityVerdict("positive_at_resolution", m, n, "grid",
                                {0: val}, val, 0, None, resolution)
    if val < -eps:
        u = trial(vec)
        # independent re-evaluation through the energy-form code paths
        num = wform.quad(u)
        den = hform.quad(u)
        if num < 0.0 and den > 0.0:
            verdict.status = "violated"
            verdict.witness = {
                "quotient": val,
                "reevaluated_weighted_energy": num,
                "reevaluated_hardy_energy": den,
                "values": u,
            }
        else:
            verdict.notes.append("negative eigenvalue failed quad re-evaluation")
    return verdict


def _weight_values(profile, grid):
    vals = profile.reconstruct_on_grid(grid)
    vals[grid.origin_index()] = 0.0
    return vals
