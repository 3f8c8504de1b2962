"""Multi-start ascent for operator norms between discrete spaces."""
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from scipy.optimize import minimize

from vlex_multipliers.defaults import get_defaults
from vlex_multipliers.errors import BudgetExceeded, BudgetZero
from vlex_multipliers.oracle.DiscreteSpace import DiscreteSpace, discrete_luxemburg, luxemburg_gradient
from vlex_multipliers.utils import get_logger, run_parallel, encode_complex

START_BASIS = "basis"
START_EXTRA = "extra"
START_SINGULAR = "singular"
START_RANDOM = "random"
START_SVD = "svd"


@dataclass(frozen=True, eq=False)
class OpnormResult:
    """Largest ratio ||A v|| / ||v|| found.

    Attributes:
        value: the ratio; exact when ``exact`` is set, a lower bound otherwise
        witness: v, normalized to domain norm 1
        start: label of the start that produced the witness
        exact: value comes from a singular value decomposition
        evaluations: number of ratio evaluations
    """
    value: float
    witness: np.ndarray
    start: str
    exact: bool = False
    evaluations: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "witness": [encode_complex(v) for v in self.witness],
            "start": self.start,
            "exact": self.exact,
            "evaluations": self.evaluations,
        }


def _is_hilbert(space: DiscreteSpace) -> bool:
    return space.is_constant and float(space.exponents[0]) == 2.0


def _hilbert_opnorm(A: np.ndarray, domain: DiscreteSpace, codomain: DiscreteSpace) -> OpnormResult:
    left = np.sqrt(codomain.weights)
    right = np.sqrt(domain.weights)
    B = left[:, None] * A / right[None, :]
    _, singular_values, vh = np.linalg.svd(B)
    witness = vh[0].conj() / right
    witness = witness / discrete_luxemburg(witness, domain)
    return OpnormResult(float(singular_values[0]), witness, START_SVD, exact=True, evaluations=0)


class RatioAscent:
    """Maximizes ||A v||_codomain / ||v||_domain over complex v.

    The ratio is invariant under scaling of v, so the unconstrained ascent
    over (Re v, Im v) coincides with the ascent on the unit sphere of the
    domain norm; iterates are renormalized at the end.

    Attributes:
        matrix: A, shape (codomain.dimension, domain.dimension)
        domain: space of v
        codomain: space of A v
        max_iters: L-BFGS-B iteration cap per start
        stationarity: gradient and relative decrease tolerance
    """

    def __init__(
            self,
            matrix: np.ndarray,
            domain: DiscreteSpace,
            codomain: DiscreteSpace,
            max_iters: int,
            stationarity: float
        ):
        self.matrix = matrix
        self.domain = domain
        self.codomain = codomain
        self.max_iters = max_iters
        self.stationarity = stationarity
        self.n = domain.dimension

    def ratio(self, v: np.ndarray) -> float:
        denominator = discrete_luxemburg(v, self.domain)
        if denominator == 0.0:
            return 0.0
        return discrete_luxemburg(self.matrix @ v, self.codomain) / denominator

    def _unpack(self, z: np.ndarray) -> np.ndarray:
        return z[:self.n] + 1j * z[self.n:]

    def _objective(self, z: np.ndarray) -> Tuple[float, np.ndarray]:
        v = self._unpack(z)
        nd = discrete_luxemburg(v, self.domain)
        if nd == 0.0:
            return 0.0, np.zeros_like(z)
        y = self.matrix @ v
        nc = discrete_luxemburg(y, self.codomain)
        gradient = (
            self.matrix.conj().T @ luxemburg_gradient(y, nc, self.codomain) / nd
            - nc * luxemburg_gradient(v, nd, self.domain) / nd ** 2
        )
        return -nc / nd, -np.concatenate([gradient.real, gradient.imag])

    def run(self, v0: np.ndarray) -> Tuple[float, np.ndarray, int]:
        """Ascent from v0; never returns less than the ratio at v0."""
        start_value = self.ratio(v0)
        norm = discrete_luxemburg(v0, self.domain)
        if norm == 0.0:
            return 0.0, v0, 1
        z0 = np.concatenate([v0.real, v0.imag]) / norm
        result = minimize(
            self._objective,
            z0,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": self.max_iters, "gtol": self.stationarity, "ftol": self.stationarity}
        )
        v = self._unpack(np.asarray(result.x))
        value = self.ratio(v) if np.all(np.isfinite(v)) else 0.0
        evaluations = int(result.nfev) + 2
        if not value > start_value:
            return start_value, v0 / norm, evaluations
        return value, v / discrete_luxemburg(v, self.domain), evaluations


def _starts(
        A: np.ndarray,
        restarts: int,
        seed: int,
        extra_starts: Sequence[np.ndarray]
    ) -> List[Tuple[str, np.ndarray]]:
    n = A.shape[1]
    starts = [(f"{START_BASIS}[{i}]", np.eye(n, dtype=complex)[i]) for i in range(n)]
    for i, extra in enumerate(extra_starts):
        extra = np.asarray(extra, dtype=complex).ravel()
        if len(extra) != n:
            raise ValueError(f"Extra start {i} has length {len(extra)}, expected {n}")
        starts.append((f"{START_EXTRA}[{i}]", extra))
    _, _, vh = np.linalg.svd(A)
    starts.append((START_SINGULAR, vh[0].conj()))
    for r in range(restarts):
        generator = np.random.RandomState(seed + r)
        starts.append((f"{START_RANDOM}[{r}]", generator.standard_normal(n) + 1j * generator.standard_normal(n)))
    return starts


def discrete_opnorm(
        A,
        domain: DiscreteSpace,
        codomain: Optional[DiscreteSpace] = None,
        restarts: Optional[int] = None,
        max_iters: Optional[int] = None,
        seed: int = 0,
        extra_starts: Sequence[np.ndarray] = (),
        stationarity: Optional[float] = None,
        use_svd: bool = True,
        threads: Optional[int] = None
    ) -> OpnormResult:
    """Norm of A from ``domain`` to ``codomain`` by multi-start ascent.

    Every basis vector, every extra start, the top right singular vector of
    A and ``restarts`` random complex vectors (drawn with seeds
    seed, seed + 1, ...) are evaluated. L-BFGS-B ascent then runs from each
    random start, the singular start and the best of basis and extra
    starts. The largest ratio wins; ties go to the earliest start. When both
    spaces are weighted l^2 the top singular value of the weighted matrix is
    returned instead.

    :param A: complex matrix of shape (codomain.dimension, domain.dimension)
    :param domain: space of the argument
    :param codomain: space of the image, ``domain`` when omitted
    :param restarts: random starts, '[oracle] restarts' by default
    :param max_iters: iterations per ascent, '[oracle] max_iters' by default
    :param seed: base seed of the random starts
    :param extra_starts: further start vectors, e.g. known eigenvectors
    :param stationarity: ascent tolerance, '[oracle] stationarity' by default
    :param use_svd: take the exact shortcut for weighted l^2 spaces
    :raises BudgetExceeded: a dimension exceeds '[oracle] max_dimension'
    :raises BudgetZero: max_iters below one
    :return: best ratio with its witness
    """
    defaults = get_defaults()
    if codomain is None:
        codomain = domain
    A = np.asarray(A, dtype=complex)
    if A.shape != (codomain.dimension, domain.dimension):
        raise ValueError(
            f"Matrix of shape {A.shape} does not map dimension {domain.dimension} to {codomain.dimension}"
        )
    if max(A.shape) > defaults.oracle_max_dimension:
        raise BudgetExceeded(
            f"Oracle dimension {max(A.shape)} exceeds the cap {defaults.oracle_max_dimension}"
        )
    restarts = defaults.oracle_restarts if restarts is None else int(restarts)
    max_iters = defaults.oracle_max_iters if max_iters is None else int(max_iters)
    stationarity = defaults.oracle_stationarity if stationarity is None else float(stationarity)
    if max_iters < 1:
        raise BudgetZero(f"Operator norm ascent needs max_iters >= 1, got {max_iters}")

    if use_svd and _is_hilbert(domain) and _is_hilbert(codomain):
        return _hilbert_opnorm(A, domain, codomain)

    ascent = RatioAscent(A, domain, codomain, max_iters, stationarity)
    starts = _starts(A, max(0, restarts), seed, extra_starts)
    values = [ascent.ratio(v) for _, v in starts]

    first_free = domain.dimension + len(extra_starts)
    best_fixed = int(np.argmax(values[:first_free]))
    ascent_indices = [best_fixed] + list(range(first_free, len(starts)))
    if threads is None:
        threads = defaults.threads
    ascents = run_parallel([lambda i=i: ascent.run(starts[i][1]) for i in ascent_indices], threads)

    candidates = [(value, label, v) for value, (label, v) in zip(values, starts)]
    for index, (value, v, _) in zip(ascent_indices, ascents):
        candidates.append((value, f"{starts[index][0]}+ascent", v))
    best = 0
    for i, candidate in enumerate(candidates):
        if candidate[0] > candidates[best][0]:
            best = i
    value, label, witness = candidates[best]
    norm = discrete_luxemburg(witness, domain)
    if norm > 0.0:
        witness = witness / norm
    evaluations = len(starts) + sum(e for _, _, e in ascents)
    get_logger(__name__).debug(
        f"Operator norm {value:.12g} from start {label} ({len(starts)} starts, {evaluations} evaluations)"
    )
    return OpnormResult(float(value), witness, label, exact=False, evaluations=evaluations)
