"""Root-law noise families with cumulant generating functions and tilted sampling.

A root law is a symmetric base distribution on the real line.  Exponentially
tilting it by a score difference produces the observation distribution of a
generalized Bradley-Terry comparison.  Each family exposes its cumulant
generating function ``cgf`` and the first two derivatives, which are the mean
and variance of the tilted distribution, plus a sampler for that tilted
distribution.

All evaluation methods accept a scalar or an ndarray and vectorize
elementwise.  Everything here is pure: randomness enters only through an
explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

# |theta| below this switches the continuous-uniform CGF and sampler to the
# series / plain-uniform fallback (avoids 0/0 in sinh(theta)/theta).
UNIFORM_STABILITY_THRESHOLD = 1e-6

# The closed forms of the uniform law's first two CGF derivatives subtract
# nearly equal 1/theta and 1/theta^2 terms; they lose ~half the mantissa by
# |theta| ~ 1e-6, so the series takes over earlier than for the CGF itself.
_DERIVATIVE_SERIES_THRESHOLD = 1e-3


def _prepare(theta):
    """Return (1-d float ndarray view, was_scalar) for scalar-or-array input."""
    arr = np.asarray(theta, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def _finish(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


class RootLaw:
    """Base class for the supported noise families."""

    def cgf(self, theta):
        """Log of the moment generating function at ``theta``."""
        raise NotImplementedError

    def cgf_prime(self, theta):
        """Mean of the distribution tilted by ``theta``."""
        raise NotImplementedError

    def cgf_double_prime(self, theta):
        """Variance of the distribution tilted by ``theta``."""
        raise NotImplementedError

    def cgf_and_prime(self, theta):
        """(cgf, cgf_prime) in one call; overridden to share work in hot loops."""
        return self.cgf(theta), self.cgf_prime(theta)

    def sample_tilted(self, theta, rng: np.random.Generator):
        """Draw from the density proportional to law(r) * exp(theta * r).

        ``theta`` may be a scalar (one draw) or an array (one draw per entry).
        """
        raise NotImplementedError

    @property
    def support_bound(self) -> float:
        """Largest attainable |value|; ``inf`` for unbounded support."""
        raise NotImplementedError

    @property
    def token(self) -> str:
        """Compact text form used in configs and CSV columns."""
        raise NotImplementedError


@dataclass(frozen=True)
class KAry(RootLaw):
    """Uniform mass 1/k on k equally spaced atoms spanning [-1, 1].

    ``KAry(2)`` is the binary law on {-1, +1}.
    """

    k: int

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"k-ary law needs k >= 2, got {self.k}")

    @cached_property
    def atoms(self) -> np.ndarray:
        return -1.0 + 2.0 * np.arange(self.k) / (self.k - 1)

    def _tilted_weights(self, theta: np.ndarray):
        """Max-shifted exp weights over atoms; returns (weights, shift, total)."""
        z = theta[:, None] * self.atoms
        shift = z.max(axis=1)
        w = np.exp(z - shift[:, None])
        return w, shift, w.sum(axis=1)

    # The binary law dominates the experiment workloads, so its closed forms
    # (log cosh, tanh, sech^2 via q = e^{-2|theta|}) bypass the atom grid.

    def cgf(self, theta):
        arr, scalar = _prepare(theta)
        if self.k == 2:
            t = np.abs(arr)
            return _finish(t + np.log1p(np.exp(-2.0 * t)) - math.log(2.0), scalar)
        _, shift, total = self._tilted_weights(arr)
        return _finish(shift + np.log(total) - math.log(self.k), scalar)

    def cgf_prime(self, theta):
        arr, scalar = _prepare(theta)
        if self.k == 2:
            q = np.exp(-2.0 * np.abs(arr))
            return _finish(np.sign(arr) * (1.0 - q) / (1.0 + q), scalar)
        w, _, total = self._tilted_weights(arr)
        return _finish(w @ self.atoms / total, scalar)

    def cgf_double_prime(self, theta):
        arr, scalar = _prepare(theta)
        if self.k == 2:
            q = np.exp(-2.0 * np.abs(arr))
            return _finish(4.0 * q / (1.0 + q) ** 2, scalar)
        w, _, total = self._tilted_weights(arr)
        mean = w @ self.atoms / total
        second = w @ self.atoms**2 / total
        return _finish(second - mean**2, scalar)

    def cgf_and_prime(self, theta):
        arr, scalar = _prepare(theta)
        if self.k == 2:
            t = np.abs(arr)
            q = np.exp(-2.0 * t)
            value = t + np.log1p(q) - math.log(2.0)
            prime = np.sign(arr) * (1.0 - q) / (1.0 + q)
            return _finish(value, scalar), _finish(prime, scalar)
        w, shift, total = self._tilted_weights(arr)
        value = shift + np.log(total) - math.log(self.k)
        prime = w @ self.atoms / total
        return _finish(value, scalar), _finish(prime, scalar)

    def sample_tilted(self, theta, rng):
        arr, scalar = _prepare(theta)
        w, _, total = self._tilted_weights(arr)
        cum = np.cumsum(w, axis=1)
        u = rng.random(arr.shape) * total
        idx = np.minimum((cum < u[:, None]).sum(axis=1), self.k - 1)
        return _finish(self.atoms[idx], scalar)

    @property
    def support_bound(self) -> float:
        return 1.0

    @property
    def token(self) -> str:
        return f"kary:{self.k}"


@dataclass(frozen=True)
class ContinuousUniform(RootLaw):
    """Uniform density on [-1, 1] (the k -> infinity limit of the k-ary law)."""

    @staticmethod
    def _pieces(arr: np.ndarray):
        """|theta| clamped away from 0 and expm1(-2|theta|); safe everywhere.

        Entries below a series threshold get overwritten by the caller, so the
        clamp only has to keep the closed forms finite.
        """
        t = np.abs(arr)
        tc = np.maximum(t, UNIFORM_STABILITY_THRESHOLD)
        e = np.expm1(-2.0 * tc)  # in [-1, 0)
        return t, tc, e

    @staticmethod
    def _value_series(ts: np.ndarray) -> np.ndarray:
        t2 = ts * ts
        return t2 / 6.0 - t2 * t2 / 180.0

    @staticmethod
    def _prime_series(ts: np.ndarray) -> np.ndarray:
        t2 = ts * ts
        return ts * (1.0 / 3.0 - t2 / 45.0 + 2.0 * t2 * t2 / 945.0)

    def cgf(self, theta):
        # log(sinh t / t) = t + log((1 - e^{-2t}) / (2t)), overflow-free.
        arr, scalar = _prepare(theta)
        t, tc, e = self._pieces(arr)
        out = tc + np.log(-e / (2.0 * tc))
        small = t < UNIFORM_STABILITY_THRESHOLD
        if small.any():
            out[small] = self._value_series(t[small])
        return _finish(out, scalar)

    def cgf_prime(self, theta):
        # coth t - 1/t, with coth t = (1 + e^{-2t}) / (1 - e^{-2t}).
        arr, scalar = _prepare(theta)
        t, tc, e = self._pieces(arr)
        out = (2.0 + e) / (-e) - 1.0 / tc
        small = t < _DERIVATIVE_SERIES_THRESHOLD
        if small.any():
            out[small] = self._prime_series(t[small])
        return _finish(out * np.sign(arr), scalar)

    def cgf_double_prime(self, theta):
        # 1/t^2 - 1/sinh^2 t, with 1/sinh^2 t = 4 e^{-2t} / (1 - e^{-2t})^2.
        arr, scalar = _prepare(theta)
        t, tc, e = self._pieces(arr)
        out = 1.0 / (tc * tc) - 4.0 * (1.0 + e) / (e * e)
        small = t < _DERIVATIVE_SERIES_THRESHOLD
        if small.any():
            ts = t[small]
            t2 = ts * ts
            t4 = t2 * t2
            out[small] = 1.0 / 3.0 - t2 / 15.0 + 2.0 * t4 / 189.0 - t4 * t2 / 675.0
        return _finish(out, scalar)

    def cgf_and_prime(self, theta):
        arr, scalar = _prepare(theta)
        t, tc, e = self._pieces(arr)
        value = tc + np.log(-e / (2.0 * tc))
        prime = (2.0 + e) / (-e) - 1.0 / tc
        small = t < _DERIVATIVE_SERIES_THRESHOLD
        if small.any():
            ts = t[small]
            prime[small] = self._prime_series(ts)
            tiny = small.copy()
            tiny[small] = ts < UNIFORM_STABILITY_THRESHOLD
            if tiny.any():
                value[tiny] = self._value_series(t[tiny])
        return _finish(value, scalar), _finish(prime * np.sign(arr), scalar)

    def sample_tilted(self, theta, rng):
        # Inverse CDF r = log(u e^theta + (1-u) e^-theta) / theta, evaluated
        # after factoring out e^{|theta|} so nothing overflows.
        arr, scalar = _prepare(theta)
        u = rng.random(arr.shape)
        t = np.abs(arr)
        out = np.empty_like(t)
        small = t < UNIFORM_STABILITY_THRESHOLD
        out[small] = 2.0 * u[small] - 1.0
        big = ~small
        tb = t[big]
        # For theta < 0 the roles of u and 1-u swap and the result negates.
        up = np.where(arr[big] > 0, u[big], 1.0 - u[big])
        inner = up + (1.0 - up) * np.exp(-2.0 * tb)
        inner = np.maximum(inner, np.finfo(float).tiny)
        out[big] = np.sign(arr[big]) * (1.0 + np.log(inner) / tb)
        return _finish(np.clip(out, -1.0, 1.0), scalar)

    @property
    def support_bound(self) -> float:
        return 1.0

    @property
    def token(self) -> str:
        return "uniform"


@dataclass(frozen=True)
class Gaussian(RootLaw):
    """Zero-mean normal with the given variance."""

    variance: float

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError(f"Gaussian variance must be positive, got {self.variance}")

    def cgf(self, theta):
        arr, scalar = _prepare(theta)
        return _finish(0.5 * self.variance * arr * arr, scalar)

    def cgf_prime(self, theta):
        arr, scalar = _prepare(theta)
        return _finish(self.variance * arr, scalar)

    def cgf_double_prime(self, theta):
        arr, scalar = _prepare(theta)
        return _finish(np.full_like(arr, self.variance), scalar)

    def sample_tilted(self, theta, rng):
        arr, scalar = _prepare(theta)
        draws = rng.normal(loc=self.variance * arr, scale=math.sqrt(self.variance))
        return _finish(np.atleast_1d(np.asarray(draws, dtype=float)), scalar)

    @property
    def support_bound(self) -> float:
        return math.inf

    @property
    def token(self) -> str:
        return f"gaussian:{self.variance:g}"


def parse_root_law(token: str) -> RootLaw:
    """Parse the text form: ``kary:<k>``, ``uniform``, or ``gaussian:<variance>``."""
    text = token.strip().lower()
    if text == "uniform":
        return ContinuousUniform()
    if text.startswith("kary:"):
        return KAry(int(text.split(":", 1)[1]))
    if text.startswith("gaussian:"):
        return Gaussian(float(text.split(":", 1)[1]))
    raise ValueError(f"unknown root-law token: {token!r}")


def law_from_arity(k) -> RootLaw:
    """Map an arity setting (integer >= 2, or 'uniform'/inf) to a root law."""
    if isinstance(k, str):
        if k.strip().lower() in ("uniform", "inf"):
            return ContinuousUniform()
        k = int(k)
    if isinstance(k, float) and math.isinf(k):
        return ContinuousUniform()
    return KAry(int(k))
