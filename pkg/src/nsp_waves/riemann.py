"""End states, characteristics, Hugoniot connections, Lax checks, rarefactions.

The quasineutral far field of the ion equations is isothermal Euler with
effective pressure (A+1) n: ion pressure A n plus the electron contribution
from the Boltzmann relation phi = -ln n. Everything here is exact algebra on
that hyperbolic system; viscosity and the Poisson coupling enter only through
the profile and Cauchy solvers. Only the second characteristic family is
covered (2-shocks and 2-rarefactions).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class EndState:
    """Constant quasineutral far-field state.

    m_bar and phi_bar are stored alongside (n_bar, u_bar) so that downstream
    code can rely on m_bar = n_bar * u_bar and phi_bar = -ln n_bar exactly.
    """

    n_bar: float
    u_bar: float
    m_bar: float = field(init=False)
    phi_bar: float = field(init=False)

    def __post_init__(self):
        if not self.n_bar > 0.0:
            raise ValueError("EndState needs n_bar > 0, got %r" % (self.n_bar,))
        object.__setattr__(self, "m_bar", self.n_bar * self.u_bar)
        object.__setattr__(self, "phi_bar", -float(np.log(self.n_bar)))


@dataclass(frozen=True)
class ShockConnection:
    """A 2-shock joining two end states.

    mass_flux is j = n (u - s), the same constant on both sides; strength is
    the density amplitude |n_plus - n_minus|.
    """

    left: EndState
    right: EndState
    speed: float
    strength: float
    mass_flux: float
    temperature: float

    def __post_init__(self):
        if not self.temperature > 0.0:
            raise ValueError("shock connection needs temperature A > 0")


@dataclass(frozen=True)
class RarefactionEndpoints:
    """End states of a 2-rarefaction; strength is |jump n| + |jump u|."""

    left: EndState
    right: EndState
    temperature: float
    strength: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self,
            "strength",
            abs(self.right.n_bar - self.left.n_bar) + abs(self.right.u_bar - self.left.u_bar),
        )


def sound_speed(temperature: float) -> float:
    if temperature < 0.0:
        raise ValueError("temperature A must be nonnegative")
    return float(np.sqrt(temperature + 1.0))


def characteristics(n: float, u: float, temperature: float) -> tuple[float, float]:
    """Characteristic speeds (u - sqrt(A+1), u + sqrt(A+1)).

    The spread lambda_2 - lambda_1 = 2 sqrt(A+1) is independent of n; n enters
    only through the positivity requirement.
    """
    if not n > 0.0:
        raise ValueError("characteristics need n > 0")
    c = sound_speed(temperature)
    return (u - c, u + c)


def hugoniot_connect(left: EndState, n_plus: float, temperature: float) -> ShockConnection:
    """The 2-shock through ``left`` with right density n_plus < n_minus.

    The Rankine-Hugoniot conditions with pressure (A+1) n force
    j^2 = (A+1) n_minus n_plus; the 2-family is the branch j < 0, which makes
    s > u on both sides and the density decrease across the shock.
    """
    if not 0.0 < n_plus < left.n_bar:
        raise ValueError(
            "2-shock needs 0 < n_plus < n_minus, got n_plus=%r, n_minus=%r"
            % (n_plus, left.n_bar)
        )
    c2 = temperature + 1.0
    j = -float(np.sqrt(c2 * left.n_bar * n_plus))
    s = left.u_bar - j / left.n_bar
    right = EndState(n_plus, s + j / n_plus)
    return ShockConnection(
        left=left,
        right=right,
        speed=s,
        strength=abs(n_plus - left.n_bar),
        mass_flux=j,
        temperature=temperature,
    )


def rh_residuals(conn: ShockConnection) -> tuple[float, float]:
    """Rankine-Hugoniot defects -s[[n]] + [[nu]] and -s[[nu]] + [[nu^2 + (A+1)n]].

    Both vanish to roundoff for a connection built by hugoniot_connect; jumps
    are right minus left.
    """
    l, r, s = conn.left, conn.right, conn.speed
    c2 = conn.temperature + 1.0
    res_mass = -s * (r.n_bar - l.n_bar) + (r.m_bar - l.m_bar)
    flux = lambda st: st.n_bar * st.u_bar ** 2 + c2 * st.n_bar
    res_mom = -s * (r.m_bar - l.m_bar) + (flux(r) - flux(l))
    return (float(res_mass), float(res_mom))


def slow_decay_rates(conn: ShockConnection) -> tuple[float, float]:
    """Predicted slow tail rates of the shock profile at -inf / +inf.

    Linearizing the quasineutral profile equation n' = n G / (s - u) about an
    end state gives the rate (A + 1 - (s - u)^2) / (s - u). Since
    (s - u_minus)(s - u_plus) = A + 1 this collapses to -+ the velocity jump:
    growth at rate u_minus - u_plus > 0 on the left tail, decay at rate
    u_plus - u_minus < 0 on the right, both O(strength).
    """
    c2 = conn.temperature + 1.0
    rate = lambda st: (c2 - (conn.speed - st.u_bar) ** 2) / (conn.speed - st.u_bar)
    return (float(rate(conn.left)), float(rate(conn.right)))


def lax_report(conn: ShockConnection) -> dict:
    """Evaluate both printed forms of the Lax condition for a 2-shock.

    ``characteristic_inequality`` is the frame-independent statement
    lambda_2(right) < s < lambda_2(left). ``paper_inequality`` is the verbatim
    normalized form sqrt((A+1) n_plus) < s < sqrt((A+1) n_minus), which is
    frame-dependent; both are reported side by side rather than silently
    picking one.
    """
    c2 = conn.temperature + 1.0
    l2m = conn.left.u_bar + np.sqrt(c2)
    l2p = conn.right.u_bar + np.sqrt(c2)
    s = conn.speed
    return {
        "lambda2_left": float(l2m),
        "lambda2_right": float(l2p),
        "speed": float(s),
        "characteristic_inequality": bool(l2p < s < l2m),
        "paper_inequality": bool(
            np.sqrt(c2 * conn.right.n_bar) < s < np.sqrt(c2 * conn.left.n_bar)
        ),
    }


def rarefaction_connect(left: EndState, n_plus: float, temperature: float) -> RarefactionEndpoints:
    """Right end state of the 2-rarefaction through ``left``: the R2 curve.

    Along R2 the invariant u - sqrt(A+1) ln n is constant and n increases, so
    u_plus = u_minus + sqrt(A+1) ln(n_plus / n_minus) with n_plus > n_minus.
    """
    if not n_plus > left.n_bar:
        raise ValueError(
            "2-rarefaction needs n_plus > n_minus, got %r <= %r; "
            "the compressive branch is a shock" % (n_plus, left.n_bar)
        )
    c = sound_speed(temperature)
    u_plus = left.u_bar + c * float(np.log(n_plus / left.n_bar))
    return RarefactionEndpoints(left, EndState(n_plus, u_plus), temperature)


def r2_residual(left: EndState, right: EndState, temperature: float) -> float:
    c = sound_speed(temperature)
    return float(
        (right.u_bar - c * np.log(right.n_bar)) - (left.u_bar - c * np.log(left.n_bar))
    )


def rarefaction_exact(left: EndState, right: EndState, temperature: float, xi):
    """Exact self-similar rarefaction fan sampled at xi = x / t.

    Returns (n, u, phi) with the shape of ``xi``. The 2-characteristic speed
    w = u + sqrt(A+1) equals xi inside the fan and is clamped to its endpoint
    values w_bar outside; density follows from the R2 invariant and
    phi = -ln n is the quasineutral potential.
    """
    if abs(r2_residual(left, right, temperature)) > 1e-10:
        raise ValueError("end states do not lie on a common R2 curve")
    if not right.n_bar > left.n_bar:
        raise ValueError("2-rarefaction fan needs n_plus > n_minus")
    c = sound_speed(temperature)
    w = np.clip(np.asarray(xi, dtype=float), left.u_bar + c, right.u_bar + c)
    u = w - c
    n = left.n_bar * np.exp((u - left.u_bar) / c)
    phi = -np.log(n)
    if np.isscalar(xi):
        return (float(n), float(u), float(phi))
    return (n, u, phi)
