"""System parameters of the gravity-kicked beta-rotor.

One kick period is described by the dimensionless set (k, tau, g): kick
strength k, kicking period tau, and gravity g in scaled units.  Near a
rational kick period tau = 2*pi*p/q + epsilon the resonant ladder splits
into q spinor bands; the fields derived here fix that decomposition:

    epsilon = tau - 2*pi*p/q          (signed detuning)
    eta     = g*tau                   (momentum gained per period)
    Omega   = eta*tau/(2*pi)          (gravity winding number)
    beta0   = nu/p + q/2 mod 1        (resonant quasimomentum class)
    m_p     = (-1)**((p+1)/2)         (sign entering the q=2 closed forms)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError

MAX_Q = 64


@dataclass(frozen=True)
class SystemParams:
    k: float
    tau: float
    p: int
    q: int
    epsilon: float
    g: float
    eta: float
    Omega: float
    beta: float
    beta0: float
    nu: int
    m_p: int | None

    @property
    def tau_over_2pi(self) -> float:
        return self.tau / (2.0 * math.pi)

    def with_beta(self, beta: float) -> "SystemParams":
        """Same system, different quasimomentum."""
        return SystemParams(
            k=self.k, tau=self.tau, p=self.p, q=self.q, epsilon=self.epsilon,
            g=self.g, eta=self.eta, Omega=self.Omega, beta=float(beta) % 1.0,
            beta0=self.beta0, nu=self.nu, m_p=self.m_p,
        )


def build_params(
    k: float,
    tau_over_2pi: float,
    g: float,
    p: int,
    q: int,
    nu: int = 0,
    beta: float | None = None,
) -> SystemParams:
    """Assemble a validated parameter set near the resonance tau = 2*pi*p/q.

    beta defaults to the resonant value beta0 = nu/p + q/2 mod 1.  All
    derived fields are recomputed from their definitions; nothing is cached
    from previous calls.
    """
    p = int(p)
    q = int(q)
    nu = int(nu)
    if q < 1 or q > MAX_Q:
        raise ConfigError(f"q must be in 1..{MAX_Q}, got {q}")
    if p < 1:
        raise ConfigError(f"p must be a positive integer, got {p}")
    if math.gcd(p, q) != 1:
        raise ConfigError(f"p/q must be in lowest terms, got {p}/{q}")
    if not 0 <= nu < p:
        raise ConfigError(f"nu must be in 0..p-1 = 0..{p - 1}, got {nu}")
    if g < 0:
        raise ConfigError(f"g must be non-negative, got {g}")
    if k < 0:
        raise ConfigError(f"k must be non-negative, got {k}")

    tau = 2.0 * math.pi * float(tau_over_2pi)
    epsilon = tau - 2.0 * math.pi * p / q
    eta = g * tau
    Omega = eta * tau / (2.0 * math.pi)
    beta0 = (nu / p + q / 2.0) % 1.0
    m_p = (-1) ** ((p + 1) // 2) if p % 2 == 1 else None
    if beta is None:
        beta = beta0
    beta = float(beta) % 1.0
    return SystemParams(
        k=float(k), tau=tau, p=p, q=q, epsilon=epsilon, g=float(g),
        eta=eta, Omega=Omega, beta=beta, beta0=beta0, nu=nu, m_p=m_p,
    )
