"""Exception types shared across the solver stack.

Exit-code mapping used by the CLI: config problems -> 4, infeasible runs
(no manifold crossing, bad schedule, tangential crossing) -> 3,
non-converged solves are flagged on the Solution rather than raised.
"""

from __future__ import annotations


class HocpError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(HocpError):
    """Invalid or unparseable run configuration.

    Carries the full list of violations so a user sees every problem at once.
    """

    def __init__(self, problems: list[str] | str):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class NoCrossingError(HocpError):
    """An autonomous switching manifold was never crossed inside its window."""

    def __init__(self, manifold: str, final_value: float, t_end: float):
        self.manifold = manifold
        self.final_value = float(final_value)
        self.t_end = float(t_end)
        super().__init__(
            f"manifold {manifold} not crossed by t={t_end:g} "
            f"(final value {final_value:.6g})"
        )


class InfeasibleScheduleError(HocpError):
    """Requested controlled switching time conflicts with the detected schedule."""


class TransversalityError(HocpError):
    """Manifold tangency: the crossing rate is too small to define a multiplier."""
