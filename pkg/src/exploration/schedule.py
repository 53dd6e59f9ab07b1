"""Linear epsilon annealing and the matched non-critical exploration rate."""

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..errors import ContractError, ScheduleError

# Rounding slack when the matched rate lands on 0 or 1.
_PRIME_TOLERANCE = 1e-9


def epsilon_prime(epsilon: float, k: float, q: float) -> float:
    """
    Exploration rate on non-critical states that keeps the overall
    exploitation probability equal to plain epsilon-greedy's:
    q*k + (1 - q)*(1 - eps') = 1 - eps.

    Raises:
        ScheduleError: The result falls outside [0, 1].
    """
    if not 0.0 < q < 1.0:
        raise ContractError(f"critical ratio must lie in (0, 1), got {q}")
    value = (epsilon - (1.0 - k) * q) / (1.0 - q)
    if -_PRIME_TOLERANCE <= value < 0.0:
        return 0.0
    if 1.0 < value <= 1.0 + _PRIME_TOLERANCE:
        return 1.0
    if not 0.0 <= value <= 1.0:
        raise ScheduleError(
            f"eps'={value:.6g} outside [0, 1] for eps={epsilon}, k={k}, q={q}"
        )
    return value


class ScheduleSpec(BaseModel):
    """Exploration schedule shared by all policy kinds."""
    model_config = ConfigDict(frozen=True)

    epsilon_start: float = Field(default=0.905, ge=0.0, le=1.0)
    epsilon_end: float = Field(default=0.005, ge=0.0, le=1.0)
    anneal_steps: int = Field(default=100_000, gt=0)
    k: float = Field(default=0.95, ge=0.0, le=1.0)
    q: float = Field(default=0.1, gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _check_order(self) -> "ScheduleSpec":
        if self.epsilon_end > self.epsilon_start:
            raise ValueError("epsilon_end must not exceed epsilon_start")
        return self

    def epsilon(self, t: int) -> float:
        """Linearly annealed rate, held at epsilon_end after anneal_steps."""
        frac = min(max(t, 0) / self.anneal_steps, 1.0)
        return self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac

    def epsilon_prime(self, t: int) -> float:
        return epsilon_prime(self.epsilon(t), self.k, self.q)

    def check_epsilon_prime(self) -> None:
        """eps' is linear in t, so checking both ends covers the schedule."""
        epsilon_prime(self.epsilon_start, self.k, self.q)
        epsilon_prime(self.epsilon_end, self.k, self.q)
