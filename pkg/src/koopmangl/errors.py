"""Exception types shared across the package."""


class KoopmanGLError(Exception):
    """Base class for package-specific errors."""


class InsufficientHistoryError(KoopmanGLError, ValueError):
    """A trajectory is too short to supply the required lifted history."""


class RankDeficiencyError(KoopmanGLError, RuntimeError):
    """The regressor matrix is numerically rank deficient and ridge = 0."""


class SimulationBlowupError(KoopmanGLError, RuntimeError):
    """The ground-truth simulation produced a non-finite state."""

    def __init__(self, step: int):
        self.step = step
        super().__init__(f"simulation produced a non-finite state at step {step}")


class DivergenceError(KoopmanGLError, RuntimeError):
    """An open-loop rollout overflowed before reaching the horizon."""

    def __init__(self, step: int):
        self.step = step
        super().__init__(f"rollout diverged at step {step}")
