"""
Max-min distance constellation design by successive linear approximation.

The joint vector stacks the N_c symbols, each of dimension d (d = N_T for
an identity channel, d = r in the SVD design space). Every iteration
linearizes the pairwise squared distances around the current reference,
solves the resulting LP for (c_T, t) and moves the reference to the
solution. Symbol ids are 0-based everywhere except in PairIndex.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist

from core.designer.schema import DesignResult, LinearizedDistance, PairIndex
from core.errors import AssemblyError, CskError, InfeasibleSpecError, InvalidInputError, InvalidPairError
from core.linprog.schema import LpProblem
from core.linprog.services import SimplexSolver, simplex_solver
from core.model.schema import Constellation, DesignSpec
from core.model.services import average_color_vector, papr_per_led
from core.rng import make_generator

logger = logging.getLogger(__name__)

MINORIZATION_TOL = 1e-6
ASCENT_TOL = 1e-9


def pair_index(p: int, q: int, n_symbols: int) -> PairIndex:
    """
    Linear index of the pair (p, q): l = (p-1) N_c - p(p+1)/2 + q.

    Args:
        p: First symbol, 1-based
        q: Second symbol, 1-based, q > p
        n_symbols: Constellation size N_c

    Returns:
        PairIndex with l in 1..N_c(N_c-1)/2

    Raises:
        InvalidPairError: If p >= q or either index is out of range
    """
    if not (1 <= p < q <= n_symbols):
        raise InvalidPairError(f"Invalid pair (p={p}, q={q}) for {n_symbols} symbols")
    l = (p - 1) * n_symbols - p * (p + 1) // 2 + q
    return PairIndex(p=p, q=q, l=l)


def pair_from_index(l: int, n_symbols: int) -> PairIndex:
    """Inverse of pair_index."""
    n_pairs = n_symbols * (n_symbols - 1) // 2
    if not 1 <= l <= n_pairs:
        raise InvalidPairError(f"Pair index {l} outside 1..{n_pairs}")
    p = 1
    # pairs starting with p occupy N_c - p consecutive indices
    while l > (p * n_symbols - p * (p + 1) // 2):
        p += 1
    q = l - (p - 1) * n_symbols + p * (p + 1) // 2
    return PairIndex(p=p, q=q, l=l)


def linearized_distance(c_ref: np.ndarray, p: int, q: int, dim: int) -> LinearizedDistance:
    """
    First-order expansion of ||c_p - c_q||^2 around ``c_ref``.

    h(c) = 2 (c_ref_p - c_ref_q) . (c_p - c_q) - ||c_ref_p - c_ref_q||^2, which is
    tight at c_ref and below the true squared distance everywhere.

    Args:
        c_ref: Joint reference vector of length N_c * dim
        p: First symbol, 0-based
        q: Second symbol, 0-based
        dim: Symbol dimension

    Returns:
        LinearizedDistance over the joint vector
    """
    c_ref = np.asarray(c_ref, dtype=float)
    if c_ref.ndim != 1 or c_ref.size % dim:
        raise InvalidInputError(f"Joint vector length {c_ref.size} is not a multiple of {dim}")
    n_symbols = c_ref.size // dim
    if not (0 <= p < n_symbols and 0 <= q < n_symbols) or p == q:
        raise InvalidPairError(f"Invalid pair ({p}, {q}) for {n_symbols} symbols")
    diff = c_ref[p * dim:(p + 1) * dim] - c_ref[q * dim:(q + 1) * dim]
    gradient = np.zeros_like(c_ref)
    gradient[p * dim:(p + 1) * dim] = 2.0 * diff
    gradient[q * dim:(q + 1) * dim] = -2.0 * diff
    return LinearizedDistance(gradient=gradient, offset=-float(diff @ diff))


def _led_map(spec: DesignSpec, pre_equalizer: Optional[np.ndarray]) -> np.ndarray:
    """Per-symbol map from design coordinates to LED intensities (N_T x d)."""
    if pre_equalizer is None:
        return np.eye(spec.n_leds)
    pre = np.asarray(pre_equalizer, dtype=float)
    if pre.ndim != 2 or pre.shape[0] != spec.n_leds:
        raise InvalidInputError(f"Pre-equalizer must have {spec.n_leds} rows, got shape {pre.shape}")
    return pre


def _check_color_support(spec: DesignSpec, led_map: np.ndarray) -> None:
    for name, count, fraction, rows in zip(
        ("red", "green", "blue"), spec.led_counts, spec.color_fractions, spec.color_slices
    ):
        if fraction > 0 and (count == 0 or not np.any(np.abs(led_map[rows]) > 0)):
            raise InfeasibleSpecError(
                f"Color fraction {fraction:.6g} for {name} cannot be met: no {name} LEDs"
            )


def assemble_subproblem(
    spec: DesignSpec,
    c_ref: np.ndarray,
    pre_equalizer: Optional[np.ndarray] = None,
) -> LpProblem:
    """
    Builds the LP of one SCA iteration over the variables (c_T, t).

    Constraints, with M the per-symbol LED map (identity or the pre-equalizer P):
      color equality   (1/N_c) sum_i sum_{j in color} (M c_i)_j = P_o * fraction
      nonnegativity    M c_i >= 0 (plain bounds when M is the identity)
      distance rows    t <= h_l(c) for every pair l
      PAPR rows        N_c (M c_i)_j - alpha_j sum_k (M c_k)_j <= 0 for every LED j, symbol i

    Args:
        spec: Design spec
        c_ref: Reference joint vector of length N_c * d
        pre_equalizer: Optional N_T x r pre-equalizer P

    Returns:
        LpProblem maximizing t

    Raises:
        InfeasibleSpecError: If a requested color has no LED able to emit it
        InvalidInputError: If dimensions do not match
    """
    led_map = _led_map(spec, pre_equalizer)
    _check_color_support(spec, led_map)
    n_c, n_t = spec.n_symbols, spec.n_leds
    d = led_map.shape[1]
    c_ref = np.asarray(c_ref, dtype=float).reshape(-1)
    if c_ref.size != n_c * d:
        raise InvalidInputError(f"Reference vector has length {c_ref.size}, expected {n_c * d}")
    n_vars = n_c * d + 1
    t_col = n_c * d

    objective = np.zeros(n_vars)
    objective[t_col] = 1.0

    # color equality: the same per-symbol row, repeated over symbols
    eq_lhs = np.zeros((3, n_vars))
    for x, rows in enumerate(spec.color_slices):
        eq_lhs[x, :t_col] = np.tile(led_map[rows].sum(axis=0) / n_c, n_c)
    eq_rhs = spec.color_target

    ub_blocks = []
    ub_rhs = []

    if pre_equalizer is not None:
        nonneg = np.zeros((n_c * n_t, n_vars))
        for i in range(n_c):
            nonneg[i * n_t:(i + 1) * n_t, i * d:(i + 1) * d] = -led_map
        ub_blocks.append(nonneg)
        ub_rhs.append(np.zeros(n_c * n_t))

    # t - grad_l . c <= offset_l
    pairs = list(combinations(range(n_c), 2))
    dist = np.zeros((len(pairs), n_vars))
    dist_rhs = np.zeros(len(pairs))
    for row, (p, q) in enumerate(pairs):
        h = linearized_distance(c_ref, p, q, d)
        dist[row, :t_col] = -h.gradient
        dist[row, t_col] = 1.0
        dist_rhs[row] = h.offset
    ub_blocks.append(dist)
    ub_rhs.append(dist_rhs)

    if spec.papr_caps is not None:
        papr = np.zeros((n_t * n_c, n_vars))
        for j, alpha in enumerate(spec.papr_caps):
            for i in range(n_c):
                row = papr[j * n_c + i]
                row[:t_col] = np.tile(-alpha * led_map[j], n_c)
                row[i * d:(i + 1) * d] += n_c * led_map[j]
        ub_blocks.append(papr)
        ub_rhs.append(np.zeros(n_t * n_c))

    lower = np.full(n_vars, -np.inf)
    if pre_equalizer is None:
        lower[:t_col] = 0.0

    return LpProblem(
        objective=objective,
        eq_lhs=eq_lhs,
        eq_rhs=eq_rhs,
        ub_lhs=np.vstack(ub_blocks),
        ub_rhs=np.concatenate(ub_rhs),
        lower_bounds=lower,
    )


def random_init(
    spec: DesignSpec,
    rng: np.random.Generator,
    pre_equalizer: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Draws a random joint vector meeting the color equality and nonnegativity.

    Every LED coordinate is uniform on (0, 1); each color group is then rescaled
    so its per-symbol average equals the color target. With a pre-equalizer the
    intensities are mapped into design coordinates through its pseudo-inverse.

    Args:
        spec: Design spec
        rng: Generator to draw from
        pre_equalizer: Optional N_T x r pre-equalizer

    Returns:
        Joint vector of length N_c * d
    """
    n_c = spec.n_symbols
    intensities = rng.random((n_c, spec.n_leds))
    for target, rows in zip(spec.color_target, spec.color_slices):
        group_mean = intensities[:, rows].sum() / n_c
        if group_mean > 0:
            intensities[:, rows] *= target / group_mean
    if pre_equalizer is None:
        return intensities.reshape(-1)
    design = intensities @ np.linalg.pinv(np.asarray(pre_equalizer, dtype=float)).T
    return design.reshape(-1)


def intensity_points(constellation: Constellation, pre_equalizer: Optional[np.ndarray] = None) -> np.ndarray:
    """Physical LED intensities of every symbol, P c_i for design-space constellations."""
    if constellation.domain_tag == "intensity":
        return constellation.array
    if pre_equalizer is None:
        raise InvalidInputError("A pre-equalized constellation needs its pre-equalizer")
    return constellation.array @ np.asarray(pre_equalizer, dtype=float).T


def is_feasible(
    constellation: Constellation,
    spec: DesignSpec,
    pre_equalizer: Optional[np.ndarray] = None,
    tol: float = 1e-6,
) -> bool:
    """
    Checks color equality, nonnegativity and PAPR caps on the transmitted intensities.
    """
    x = intensity_points(constellation, pre_equalizer)
    if x.min() < -1e-9:
        return False
    intensities = Constellation.from_array(np.maximum(x, 0.0), "intensity")
    color = average_color_vector(intensities, spec)
    if np.max(np.abs(color - spec.color_target)) > tol * spec.avg_power:
        return False
    if spec.papr_caps is not None:
        # LEDs that never emit satisfy any cap
        active = intensities.array.mean(axis=0) > 0
        if np.any(active):
            papr = papr_per_led(Constellation.from_array(intensities.array[:, active], "intensity"))
            if np.any(papr > np.asarray(spec.papr_caps)[active] + tol):
                return False
    return True


class DesignerService:
    """
    Runs the SCA design loop and its multi-start wrapper.
    """

    def __init__(self, solver: SimplexSolver | None = None, max_workers: int = 1):
        self.solver = solver or simplex_solver
        self.max_workers = max(1, max_workers)

    def design_once(
        self,
        spec: DesignSpec,
        init: np.ndarray,
        pre_equalizer: Optional[np.ndarray] = None,
        start_index: int = 0,
    ) -> DesignResult:
        """
        Iterates assemble -> solve -> move reference until t stalls.

        The loop runs on a DesignSpec copy normalized to unit average power and
        rescales the result, so designs scale exactly with P_o.

        Args:
            spec: Design spec
            init: Initial joint vector of length N_c * d
            pre_equalizer: Optional N_T x r pre-equalizer (design in r dimensions)
            start_index: Restart id recorded in the result

        Returns:
            DesignResult with the final constellation and t_star

        Raises:
            InfeasibleSpecError: If the first LP is infeasible
            AssemblyError: If an LP is unbounded or the minorization check fails
        """
        led_map = _led_map(spec, pre_equalizer)
        d = led_map.shape[1]
        init = np.asarray(init, dtype=float).reshape(-1)
        if init.size != spec.n_symbols * d:
            raise InvalidInputError(f"Initial vector has length {init.size}, expected {spec.n_symbols * d}")

        scale = spec.avg_power
        unit_spec = spec.model_copy(update={"avg_power": 1.0})
        c_ref = init / scale
        t_history: list[float] = []

        for k in range(spec.sca_max_iter):
            problem = assemble_subproblem(unit_spec, c_ref, pre_equalizer)
            solution = self.solver.solve(problem)

            if solution.status == "unbounded":
                raise AssemblyError("SCA subproblem is unbounded; the color equality should bound it")
            if solution.status != "optimal":
                if k == 0:
                    raise InfeasibleSpecError(f"SCA subproblem is {solution.status} at the first iteration")
                logger.warning("restart %d: LP %s at iteration %d, keeping previous iterate",
                               start_index, solution.status, k)
                break

            c_new, t = solution.x[:-1], float(solution.x[-1])
            med_sq = float(pdist(c_new.reshape(-1, d), "sqeuclidean").min())
            if med_sq < t - MINORIZATION_TOL * (1.0 + abs(t)):
                raise AssemblyError(
                    f"Linearization is not a lower bound: med^2={med_sq:.10g} < t={t:.10g}"
                )
            if t_history and t < t_history[-1] - ASCENT_TOL * (1.0 + abs(t)):
                logger.warning("restart %d: t decreased from %.10g to %.10g, stopping",
                               start_index, t_history[-1], t)
                break

            c_ref = c_new
            t_history.append(t)
            logger.debug("restart %d iteration %d: t=%.10g", start_index, k, t)
            if len(t_history) > 1 and abs(t - t_history[-2]) <= spec.sca_tol * (1.0 + abs(t)):
                break

        points = (c_ref * scale).reshape(spec.n_symbols, d)
        domain = "intensity" if pre_equalizer is None else "pre-equalized"
        constellation = Constellation.from_array(points, domain)
        return DesignResult(
            constellation=constellation,
            t_star=t_history[-1] * scale ** 2,
            iterations=len(t_history),
            start_index=start_index,
            feasible=is_feasible(constellation, spec, pre_equalizer),
            t_history=tuple(t * scale ** 2 for t in t_history),
        )

    def multi_start_design(
        self,
        spec: DesignSpec,
        pre_equalizer: Optional[np.ndarray] = None,
    ) -> DesignResult:
        """
        Runs design_once from spec.restarts seeded random starts and keeps the best MED.

        Restart k draws its start from the sub-stream (spec.seed, k), so results do not
        depend on the number of worker threads.

        Args:
            spec: Design spec
            pre_equalizer: Optional N_T x r pre-equalizer

        Returns:
            Best DesignResult, carrying the MED of every successful restart and
            the number of restarts that failed

        Raises:
            CskError: The last restart error, if every restart failed
        """
        def run(k: int) -> DesignResult | CskError:
            rng = make_generator(spec.seed, k)
            init = random_init(spec, rng, pre_equalizer)
            try:
                return self.design_once(spec, init, pre_equalizer, start_index=k)
            except CskError as e:
                logger.warning("restart %d failed: %s", k, e.detail)
                return e

        if self.max_workers > 1:
            with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
                outcomes = list(pool.map(run, range(spec.restarts)))
        else:
            outcomes = [run(k) for k in range(spec.restarts)]

        results = [o for o in outcomes if isinstance(o, DesignResult)]
        if not results:
            raise outcomes[-1]
        failed = len(outcomes) - len(results)
        if failed:
            logger.warning("multi-start: %d of %d restarts failed", failed, spec.restarts)

        best = max(results, key=lambda r: (r.med, -r.start_index))
        logger.info("multi-start: best MED %.6f from restart %d of %d",
                    best.med, best.start_index, spec.restarts)
        return best.model_copy(update={
            "restart_meds": tuple(r.med for r in results),
            "failed_restarts": failed,
        })
