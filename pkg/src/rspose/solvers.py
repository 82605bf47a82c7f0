"""The five minimal relative-pose solvers.

Pipeline per algorithm: build the stacked coefficient matrix A at a
rotation hypothesis, drive the hypothesis to rank deficiency by
Levenberg-Marquardt on determinant residuals, pull the translation /
velocity vector out of the nullspace by SVD and resolve the sign
ambiguity with a cheirality vote.

Minimal problems of this kind admit several exact rank-deficient
rotations, so the solvers enumerate candidates (for gravity-aided
problems, all rank-dropping yaw angles of the gravity-composed family)
and rank them by a readout-aware cheirality vote (points in front of
both cameras), with the velocity magnitude, an optional scene-scale
prior, and the objective as tie-breaks.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
import scipy.optimize

from .coeffs import (
    AlgorithmKind,
    CoefficientMatrix,
    Full,
    InsufficientPointsError,
    PreparedProblem,
    RotationHypothesis,
    Yaw,
    build_matrix,
    full_rotation,
)
from .geometry import (
    Correspondence,
    InertialMeasurement,
    RelativePoseEstimate,
    Rotation,
    rotation_tilt,
    rotation_yaw,
    tilt_from_gravity,
)
from .lm import levenberg_marquardt


class DegenerateConfigurationError(RuntimeError):
    pass


@dataclass
class SolverConfig:
    max_lm_iterations: int = 100
    lm_initial_damping: float = 1e-3
    convergence_tol: float = 1e-10
    yaw_multistart_count: int = 8
    # grid density for bracketing yaw determinant roots
    yaw_scan_count: int = 128
    # number of distinct basins / best inits polished by LM
    refine_starts: int = 4
    # Expected scene-depth to baseline ratio, used only as the last
    # ranking signal between otherwise indistinguishable minimal-set
    # solutions (None disables it). A minimal point set can admit several
    # exact interpretations that all pass the cheirality vote; the
    # spurious ones usually place the points at an implausible scale
    # (e.g. explain the motion as near-pure rotation with the scene at
    # near-infinite depth), which this prior penalizes.
    depth_ratio_prior: float | None = None

    def __post_init__(self):
        if self.max_lm_iterations <= 0 or self.yaw_multistart_count <= 0:
            raise ValueError("iteration counts must be positive")
        if self.convergence_tol <= 0 or self.lm_initial_damping <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class SolverOutput:
    estimate: RelativePoseEstimate
    objective_value: float
    candidates_considered: int
    converged: bool = True


# Row windows for the multi-determinant objectives: consecutive windows
# use every row and are deterministic.
_WINDOWS = {
    AlgorithmKind.ANGULAR5: [(0, 3), (1, 4), (2, 5)],
    AlgorithmKind.UNIFORM11: [(0, 9), (1, 10), (2, 11)],
}


def determinant_residuals(A: CoefficientMatrix) -> np.ndarray:
    """Determinant(s) whose joint zero marks a rank-deficient A."""
    m = A.entries
    if A.algorithm in _WINDOWS:
        return np.array([np.linalg.det(m[a:b]) for a, b in _WINDOWS[A.algorithm]])
    return np.array([np.linalg.det(m)])


def determinant_objective(hyp: RotationHypothesis,
                          corrs: list[Correspondence],
                          imu1: InertialMeasurement,
                          imu2: InertialMeasurement,
                          readout: float,
                          algorithm: AlgorithmKind) -> np.ndarray:
    A = build_matrix(corrs, hyp, imu1, imu2, readout, algorithm)
    return determinant_residuals(A)


@dataclass
class _RotationResult:
    hypothesis: RotationHypothesis
    objective: float
    converged: bool


def _lm_yaw(psi0, residual_of_psi, cfg: SolverConfig) -> _RotationResult:
    res = levenberg_marquardt(
        lambda x: residual_of_psi(float(x[0])), np.array([psi0]), 1,
        fd_step=1e-7, max_iterations=cfg.max_lm_iterations,
        step_tol=cfg.convergence_tol, initial_damping=cfg.lm_initial_damping)
    return _RotationResult(Yaw(float(res.state[0])), res.cost, res.converged)


def _lm_full(q0, residual_of_q, cfg: SolverConfig) -> _RotationResult:
    res = levenberg_marquardt(
        residual_of_q, np.asarray(q0, dtype=float), 3,
        plus=lambda q, d: Rotation(q).local_update(d).q,
        fd_step=1e-6, max_iterations=cfg.max_lm_iterations,
        step_tol=cfg.convergence_tol, initial_damping=cfg.lm_initial_damping)
    return _RotationResult(Full(Rotation(res.state)), res.cost, res.converged)


def solve_rotation(corrs, imu1, imu2, readout, algorithm,
                   init: RotationHypothesis,
                   cfg: SolverConfig | None = None) -> _RotationResult:
    """Levenberg-Marquardt on the determinant residuals from one init."""
    if cfg is None:
        cfg = SolverConfig()
    prep = PreparedProblem(corrs, imu1, imu2, readout, algorithm)
    return _solve_rotation_prepared(prep, init, cfg)


def _sigma_ratio(prep: PreparedProblem, hyp) -> float:
    """Smallest singular value of A relative to the largest.

    Unlike the raw determinant, this is O(1)-scaled everywhere and its
    basin around a rank-deficient rotation is wide, so it is the quantity
    scanned and pre-minimized to initialize the determinant optimization.
    (The determinant equals sigma_min times the product of the remaining
    singular values, and that product itself varies by many orders of
    magnitude with the hypothesis, which buries the root basins.)
    """
    s = np.linalg.svd(prep.matrix(hyp).entries, compute_uv=False)
    return float(s[-1] / max(s[0], 1e-300))


def _wrap_angle(psi: float) -> float:
    return float((psi + np.pi) % (2.0 * np.pi) - np.pi)


def _solve_rotation_prepared(prep: PreparedProblem, init, cfg,
                             scale: float | None = None):
    """Two-stage rotation solve from one init.

    Stage 1 runs LM on the relative smallest singular value to land
    inside the (narrow) determinant root basin; stage 2 polishes with LM
    on the determinant residuals divided by `scale`. Dividing by a
    constant positive reference magnitude leaves the roots unchanged but
    lets the absolute convergence thresholds behave; the reported
    objective is the raw sum of squared determinants.
    """
    def raw(hyp):
        return determinant_residuals(prep.matrix(hyp))

    if scale is None:
        scale = float(np.linalg.norm(raw(init)))
    scale = max(scale, 1e-300)

    def det_residuals(hyp):
        return raw(hyp) / scale

    def sigma_residual(hyp):
        return np.array([_sigma_ratio(prep, hyp)])

    # the pre-stage only needs to land inside the root basin; a short LM
    # budget avoids churning at the singular-value noise floor
    pre_cfg = replace(cfg, max_lm_iterations=min(cfg.max_lm_iterations, 25))
    if isinstance(init, Yaw):
        pre = _lm_yaw(init.psi, lambda p: sigma_residual(Yaw(p)), pre_cfg)
        res = _lm_yaw(pre.hypothesis.psi,
                      lambda p: det_residuals(Yaw(p)), cfg)
        res.hypothesis = Yaw(_wrap_angle(res.hypothesis.psi))
    else:
        pre = _lm_full(init.rotation.q,
                       lambda q: sigma_residual(Full(Rotation(q))), pre_cfg)
        res = _lm_full(pre.hypothesis.rotation.q,
                       lambda q: det_residuals(Full(Rotation(q))), cfg)
    r = raw(res.hypothesis)
    return _RotationResult(res.hypothesis, float(r @ r), res.converged)


def _yaw_roots(prep: PreparedProblem,
               cfg: SolverConfig) -> list[_RotationResult]:
    """All rank-deficient yaw angles of a gravity-aided problem.

    Every matrix entry is affine in cos psi and sin psi, so with
    z = e^{i psi} the rank-drop condition det A(psi) = 0 becomes a
    quadratic eigenvalue problem in z whose unit-circle eigenvalues are
    exactly the real yaw roots (up to 2*dim(x) of them, only one matching
    the true motion). Solving it through a companion linearization and
    the QZ algorithm is backward-stable at the matrix level, which keeps
    clusters of roots separated by ~1e-3 rad accurate to ~1e-12 rad --
    scalar root-finding on the determinant cannot do that, because the
    determinant sits at its numerical noise floor across such clusters.
    The caller ranks the candidates.
    """
    def entries(p):
        m = prep.matrix(Yaw(float(p)), normalize_rows=False).entries
        # leading square window; extra rows still participate through the
        # singular-value filter below, which rejects window-only roots
        return m[: m.shape[1]]

    # A(psi) = A0 + A1 cos psi + A2 sin psi, recovered from three probes
    A0 = (entries(0.0) + entries(np.pi)) / 2.0
    A1 = (entries(0.0) - entries(np.pi)) / 2.0
    A2 = entries(np.pi / 2.0) - A0
    # With z = e^{i psi}: z * A(psi) = B0 + B1 z + B2 z^2
    B0 = (A1 + 1j * A2) / 2.0
    B1 = A0.astype(complex)
    B2 = (A1 - 1j * A2) / 2.0
    n = A0.shape[0]
    zeros = np.zeros((n, n))
    eye = np.eye(n)
    lhs = np.block([[-B0, zeros], [zeros, eye]])
    rhs = np.block([[B1, B2], [eye, zeros]])
    vals = scipy.linalg.eig(lhs, rhs, right=False)
    vals = vals[np.isfinite(vals)]
    psis = sorted(float(np.angle(z)) for z in vals
                  if abs(abs(z) - 1.0) < 1e-4)

    unique: list[float] = []
    for q in psis:
        if any(abs(_wrap_angle(q - a)) < 1e-9 for a in unique):
            continue
        unique.append(q)
    # keep only the eigenvalues at which the full (possibly overdetermined)
    # matrix genuinely drops rank; the threshold adapts so noisy data does
    # not reject every candidate
    sig = {q: _sigma_ratio(prep, Yaw(q)) for q in unique}
    if not sig:
        return []
    smin = min(sig.values())
    # On model-mismatch or heavily noisy data no candidate reaches an
    # exact rank drop; still keep the near-best ones so the caller can
    # return a best-effort estimate (e.g. a global-shutter baseline run
    # on rolling-shutter data).
    cut = max(min(1e-2, max(1e-9, smin * 1e6)), smin * 10.0)
    accepted = [q for q in unique if sig[q] <= cut]

    results = []
    for q in accepted:
        hyp = Yaw(q)
        r = determinant_residuals(prep.matrix(hyp))
        results.append(_RotationResult(hyp, float(r @ r), True))
    return results


def _scan_yaw_minima(prep: PreparedProblem, cfg: SolverConfig) -> list[float]:
    """Local minima of the sigma ratio over a dense yaw grid.

    Complements the eigenvalue enumeration when the measured gravity is
    noisy: the exact rank-deficient rotations then sit slightly off the
    yaw family, the determinant no longer vanishes on it, and the
    quadratic eigenvalue problem loses its unit-circle roots. The sigma
    ratio still dips near every root's closest family member, so its grid
    minima are reliable initializations for the full-rotation solve.
    """
    grid = np.linspace(-np.pi, np.pi, cfg.yaw_scan_count, endpoint=False)
    sig = np.array([_sigma_ratio(prep, Yaw(p)) for p in grid])
    prev = np.roll(sig, 1)
    nxt = np.roll(sig, -1)
    minima = [(float(s), float(p)) for p, s, a, b in zip(grid, sig, prev, nxt)
              if s <= a and s < b]
    minima.sort()
    return [p for _, p in minima[:cfg.yaw_multistart_count]]


def _regularized_descent(prep: PreparedProblem, rot: Rotation) -> Rotation:
    """Velocity-regularized rotation descent for 9-unknown problems.

    The raw determinant of a 9-unknown problem has many isolated roots a
    fraction of a degree apart, each with a tiny basin: a slightly wrong
    rotation can be compensated exactly by enormous velocities. Adding a
    ridge penalty mu on the velocity columns of A^T A erases those
    spurious pits (their null vectors are velocity-dominated, so they pay
    ~mu) while the true root keeps a deep basin, leaving

        J(R) = lambda_min(A(R)^T A(R) + mu * diag(0,0,0,1,...,1))

    smooth and monotone toward the true rotation over several degrees.
    Nelder-Mead continuation over decreasing mu recovers the root to
    ~1e-5 degrees, close enough for the determinant polish to finish the
    job. This rescues initializations computed from noisy gravity.
    """
    for mu, simplex in ((1e-4, 5e-3), (1e-7, 1e-4), (1e-10, 1e-5)):
        def objective(delta):
            A = prep.matrix(Full(rot.local_update(delta))).entries
            M = A.T @ A
            M[3:, 3:] += mu * np.eye(M.shape[0] - 3)
            return np.log10(max(float(np.linalg.eigvalsh(M)[0]), 1e-300))

        res = scipy.optimize.minimize(
            objective, np.zeros(3), method="Nelder-Mead",
            options=dict(xatol=1e-13, fatol=1e-10, maxiter=500,
                         initial_simplex=np.vstack([np.zeros(3),
                                                    simplex * np.eye(3)])))
        rot = rot.local_update(res.x)
    return rot


def _full_starts(prep: PreparedProblem, cfg: SolverConfig) -> list[Rotation]:
    inits = [Rotation.identity()]
    imu1, imu2 = prep.imu1, prep.imu2
    if imu1.has_gravity and imu2.has_gravity:
        # gravity-composed starts: measured tilt with a sweep of yaw values
        t1 = rotation_tilt(*tilt_from_gravity(imu1.gravity))
        t2 = rotation_tilt(*tilt_from_gravity(imu2.gravity))
        grid = np.linspace(-np.pi, np.pi, cfg.yaw_multistart_count,
                           endpoint=False)
        for p in grid:
            inits.append(Rotation.from_matrix(t2.T @ rotation_yaw(p) @ t1))
    return inits


def extract_translation(A: CoefficientMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Nullspace vector of A, normalized to a unit translation block.

    Returns the +-x candidate pair (physical units). A nullspace of
    dimension > 1 is handled by picking the minimum-velocity element: when
    t, d1 and d2 are all parallel the per-row translation only changes by
    a scalar, so the epipolar rows cannot distinguish the family (t,
    d1 + a*t, d2 + b*t) and the d-norm-minimal member is the canonical
    representative (exact at zero velocities). Raises
    DegenerateConfigurationError when no unit-translation element exists.
    """
    cands = extract_translation_candidates(A)
    return cands[0], -cands[0]


def _min_velocity_element(basis: np.ndarray) -> np.ndarray | None:
    """Element of the (column-)spanned subspace minimizing the velocity
    block relative to the whole vector; None when no such element has a
    usable translation part."""
    tb, db = basis[:3], basis[3:]
    if db.size == 0 or np.linalg.norm(tb, ord=2) < 1e-9:
        return None
    vals, vecs = scipy.linalg.eigh(db.T @ db, tb.T @ tb + db.T @ db)
    return basis @ vecs[:, np.argmin(vals)]


def extract_translation_candidates(A: CoefficientMatrix) -> list[np.ndarray]:
    """Nullspace-based translation candidates of A (physical units).

    The first entry is the canonical single null vector (or, for a
    nullspace of dimension > 1, its minimum-velocity element). When
    further singular values sit within 1e-4 of zero relative to the
    largest, the matrix is nearly rank-deficient in more directions --
    typical for rolling-shutter rows, where a slightly wrong rotation can
    be compensated by enormous velocities -- and the minimum-velocity
    element of that near-null subspace is appended as an alternative. The
    caller ranks all candidates by cheirality and plausibility.
    """
    _, s, vt = np.linalg.svd(A.entries)
    if s[0] < 1e-12:
        raise DegenerateConfigurationError(
            "coefficient matrix rank collapsed; configuration degenerate")
    exact_dim = max(1, int(np.sum(s < 1e-10 * s[0])))
    raw: list[np.ndarray] = []
    if exact_dim == 1:
        raw.append(vt[-1].copy())
    else:
        x = _min_velocity_element(vt[-exact_dim:].T)
        if x is None:
            raise DegenerateConfigurationError(
                "coefficient matrix rank collapsed; configuration degenerate")
        raw.append(x)
    near_dim = int(np.sum(s < 1e-4 * s[0]))
    if near_dim > exact_dim:
        x = _min_velocity_element(vt[-near_dim:].T)
        if x is not None:
            raw.append(x)
    out = []
    for x in raw:
        if x.size == 9:
            x = x.copy()
            x[3:] /= A.d_column_scale
        t_norm = np.linalg.norm(x[:3])
        if t_norm < 1e-9 * np.linalg.norm(x):
            continue
        out.append(x / t_norm)
    if not out:
        raise DegenerateConfigurationError(
            "translation direction unobservable")
    return out


def triangulate_midpoint(corr: Correspondence, R: np.ndarray,
                         t: np.ndarray) -> tuple[float, float]:
    """Depths (s1, s2) of the midpoint triangulation with row-0 poses.

    Rays: s1 * m1 from the origin and t + s2 * R^T m2 in the camera-1
    frame (global-shutter approximation).
    """
    a = np.column_stack([corr.p1.m, -(np.asarray(R).T @ corr.p2.m)])
    sol, *_ = np.linalg.lstsq(a, np.asarray(t, dtype=float), rcond=None)
    return float(sol[0]), float(sol[1])


def disambiguate_sign(x_plus: np.ndarray, x_minus: np.ndarray,
                      corrs: list[Correspondence], R: np.ndarray) -> np.ndarray:
    """Pick the candidate whose translation puts more points in front of
    both cameras; ties go to x_plus."""
    def votes(x):
        t = x[:3]
        n = 0
        for c in corrs:
            s1, s2 = triangulate_midpoint(c, R, t)
            if s1 > 0 and s2 > 0:
                n += 1
        return n

    return x_plus if votes(x_plus) >= votes(x_minus) else x_minus


def _score_candidate(prep: PreparedProblem, R: np.ndarray,
                     x: np.ndarray) -> tuple[int, float]:
    """(positive-depth votes, mean view-1 depth) for one signed candidate.

    Rays are readout-aware and consistent with the algebraic forward
    model: camera-1 rays start at v1*lam*d1 with direction m1; camera-2
    rays start at t + v2*lam*d2 with direction F1^T R^T F2 m2 (all in the
    camera-1 frame, at the common unknown scale of the unit translation).
    The mean depth is reported in units of the unit-norm translation and
    feeds the optional depth-ratio prior of the ranking.
    """
    t = x[:3]
    d1 = x[3:6] if x.size == 9 else np.zeros(3)
    d2 = x[6:9] if x.size == 9 else np.zeros(3)
    lam = prep.readout
    if prep.f1t is not None:
        dirs2 = np.einsum("nij,nj->ni", prep.f1t, prep.f2m2 @ R)
    else:
        dirs2 = prep.f2m2 @ R
    votes = 0
    depth_sum = 0.0
    for i in range(prep.m1.shape[0]):
        o1 = (prep.v1[i] * lam) * d1
        o2 = t + (prep.v2[i] * lam) * d2
        a = np.column_stack([prep.m1[i], -dirs2[i]])
        sol, *_ = np.linalg.lstsq(a, o2 - o1, rcond=None)
        if sol[0] > 0 and sol[1] > 0:
            votes += 1
        depth_sum += float(sol[0])
    return votes, depth_sum / prep.m1.shape[0]


def _hyp_distance(h1, h2) -> float:
    if isinstance(h1, Yaw):
        d = abs(h1.psi - h2.psi) % (2 * np.pi)
        return min(d, 2 * np.pi - d)
    return float(np.arccos(np.clip(
        2 * (h1.rotation.q @ h2.rotation.q) ** 2 - 1, -1, 1)))


def estimate_minimal(algorithm: AlgorithmKind,
                     corrs: list[Correspondence],
                     imu1: InertialMeasurement,
                     imu2: InertialMeasurement,
                     readout: float,
                     cfg: SolverConfig | None = None) -> SolverOutput:
    """Full minimal-solver pipeline on exactly the minimal point set."""
    if cfg is None:
        cfg = SolverConfig()
    if len(corrs) != algorithm.min_points:
        raise InsufficientPointsError(
            f"{algorithm.value} takes exactly {algorithm.min_points} "
            f"correspondences, got {len(corrs)}")
    prep = PreparedProblem(corrs, imu1, imu2, readout, algorithm)

    has_gravity = imu1.has_gravity and imu2.has_gravity
    roots: list[_RotationResult] = []
    n_candidates = 0
    escalation_starts: list[float] = []
    if algorithm.uses_gravity:
        roots = _yaw_roots(prep, cfg)
        n_candidates = len(roots)
    elif has_gravity:
        # Gravity-free model, but gravity was measured: enumerate the
        # rank-deficient rotations of the gravity-composed yaw family as
        # initializations, then release all three rotation degrees of
        # freedom. On exact data the overdetermined row set singles out
        # the true motion among the yaw roots; on noisy data the full
        # optimization moves off the yaw family as the data demands.
        psis = [yr.hypothesis.psi for yr in _yaw_roots(prep, cfg)]
        # For the 9-unknown model, dense-scan minima cover the noisy-gravity
        # case where the exact eigenvalue roots leave the measured yaw
        # family (see _scan_yaw_minima); near-duplicates of the eigenvalue
        # roots are dropped before the expensive full-rotation polish. The
        # 3-unknown model skips the extras: its velocity-free candidate
        # ranking cannot reliably reject the spurious roots they add.
        if algorithm.x_dim == 9:
            for p in _scan_yaw_minima(prep, cfg):
                if not any(abs(_wrap_angle(p - q)) < 1e-3 for q in psis):
                    psis.append(p)
        n_candidates = len(psis)
        roots = []
        for p in psis:
            init = Full(Rotation.from_matrix(prep.rotation_of(Yaw(p))))
            res = _solve_rotation_prepared(prep, init, cfg)
            if any(_hyp_distance(res.hypothesis, r.hypothesis) < 1e-6
                   for r in roots):
                continue
            roots.append(res)
        escalation_starts = psis
    if not algorithm.uses_gravity and not roots:
        full_inits = _full_starts(prep, cfg)
        sigmas = [_sigma_ratio(prep, Full(r)) for r in full_inits]
        dets = [float(np.linalg.norm(
            determinant_residuals(prep.matrix(Full(r))))) for r in full_inits]
        order = np.argsort(sigmas)
        scale = max(max(dets), 1e-300)
        starts = [Full(full_inits[i]) for i in order]
        n_candidates += len(starts)
        for hyp in starts[:max(1, cfg.refine_starts)]:
            res = _solve_rotation_prepared(prep, hyp, cfg, scale=scale)
            if any(_hyp_distance(res.hypothesis, r.hypothesis) < 1e-6
                   for r in roots):
                continue
            roots.append(res)
    if not roots:
        raise DegenerateConfigurationError("rotation optimization produced "
                                           "no candidates")

    # Ranking: candidates passing the full cheirality check form the top
    # tier; within a tier, lower implausibility wins. The implausibility
    # penalty sums the log depth-to-prior mismatch and the log velocity
    # magnitude, because the determinant also vanishes along rotations
    # that trade a small orientation error for enormous velocities and
    # implausible scene scale; raw votes break the remaining ties.
    n_pts = len(corrs)

    def rank(candidates):
        top = None
        top_key = None
        failed = 0
        for res in candidates:
            A = prep.matrix(res.hypothesis)
            try:
                xs = extract_translation_candidates(A)
            except DegenerateConfigurationError:
                failed += 1
                continue
            R = prep.rotation_of(res.hypothesis)
            for x in [s * c for c in xs for s in (1.0, -1.0)]:
                votes, mean_depth = _score_candidate(prep, R, x)
                penalty = 0.0
                if cfg.depth_ratio_prior is not None:
                    if mean_depth <= 0:
                        penalty = np.inf
                    else:
                        penalty = abs(np.log(mean_depth
                                             / cfg.depth_ratio_prior))
                if x.size == 9:
                    penalty += np.log10(1.0 + float(np.linalg.norm(x[3:])))
                key = (votes == n_pts, -penalty, votes, -res.objective)
                if top_key is None or key > top_key:
                    top_key = key
                    top = (res, R, x)
        return top, top_key, failed

    best, best_key, degenerate = rank(roots)
    implausible = best is None or not best_key[0] or best_key[1] < -1.5
    if escalation_starts and algorithm.x_dim == 9 and implausible:
        # Every surviving candidate either fails cheirality or needs an
        # implausible velocity/scale to explain the data -- the symptom of
        # noisy-gravity initializations, where the polish converges to
        # spurious rank-deficient rotations adjacent to (but not at) the
        # true one. Escalate with the velocity-regularized descent from
        # every family start and re-rank.
        descended: list[Rotation] = []
        for p in escalation_starts:
            r0 = Rotation.from_matrix(prep.rotation_of(Yaw(p)))
            rot = _regularized_descent(prep, r0)
            n_candidates += 1
            if any(_hyp_distance(Full(rot), Full(d)) < 1e-5
                   for d in descended):
                continue
            descended.append(rot)
            res = _solve_rotation_prepared(prep, Full(rot), cfg)
            if any(_hyp_distance(res.hypothesis, r.hypothesis) < 1e-6
                   for r in roots):
                continue
            roots.append(res)
            # stop as soon as some descent reached a plausible root; the
            # remaining starts only rediscover the spurious ones
            best, best_key, degenerate = rank(roots)
            if best is not None and best_key[0] and best_key[1] > -1.5:
                break
        best, best_key, degenerate = rank(roots)
    if best is None:
        raise DegenerateConfigurationError(
            f"all {degenerate} candidate rotations were degenerate")

    res, R, x = best
    if algorithm.x_dim == 9:
        d1, d2 = x[3:6], x[6:9]
    else:
        d1 = d2 = np.zeros(3)
    if algorithm.uses_angular_velocity:
        w1, w2 = imu1.angular_velocity, imu2.angular_velocity
    else:
        w1 = w2 = np.zeros(3)
    estimate = RelativePoseEstimate(
        rotation=Rotation.from_matrix(R), translation=x[:3],
        d1=d1, d2=d2, w1=w1, w2=w2)
    return SolverOutput(estimate=estimate, objective_value=res.objective,
                        candidates_considered=n_candidates,
                        converged=res.converged)
