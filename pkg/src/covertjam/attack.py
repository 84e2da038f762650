"""Cooperative jammer: targeted gradient perturbations with minimal-power bisection.

The jammer wants the eavesdropper's classifier to call an ongoing transmission
"noise". It takes the gradient of the noise-class cross-entropy at the
eavesdropper's (estimated) received block, normalizes it, and bisects the
smallest step along the negative gradient that flips the label, under a
transmit-power budget p_max per 16-sample block.

Scales are accounted in *transmit* space: `epsilon` is the amplitude the
jammer emits (`||delta||_2 = epsilon <= sqrt(p_max)`), and the known
jammer-to-eavesdropper gain h_ce maps it to the received-space step used while
searching. The printed branch ordering of the source procedure (grow the
bracket on success) is available via `paper_literal=True`; the default shrinks
on success, which is what a minimal-power objective calls for.
"""

from dataclasses import dataclass

import numpy as np

from . import channel, nnet


class FlatLossSurfaceError(ValueError):
    """The loss gradient at the input is exactly zero: no attack direction exists."""


@dataclass(frozen=True)
class AttackConfig:
    p_max: float                 # transmit power budget per block
    eps_acc: float               # bisection accuracy, transmit amplitude
    target: int = nnet.NOISE
    h_ce: float = 1.0            # jammer -> eavesdropper amplitude gain
    paper_literal: bool = False  # keep the printed bracket-update ordering

    def __post_init__(self):
        if self.p_max <= 0:
            raise ValueError("p_max must be positive")
        if not 0 < self.eps_acc < np.sqrt(self.p_max):
            raise ValueError("need 0 < eps_acc < sqrt(p_max)")
        if self.target not in (nnet.SIGNAL, nnet.NOISE):
            raise ValueError("target must be one of the two class labels")
        if self.h_ce <= 0:
            raise ValueError("h_ce must be positive")


@dataclass
class AttackResult:
    delta: np.ndarray           # transmit-space perturbation, 16 complex samples
    epsilon: float              # transmit amplitude actually used (= ||delta||_2)
    success: bool
    iterations: int             # bisection passes (feasibility probe excluded)
    received_delta: np.ndarray  # h_ce * delta, as superposed at the eavesdropper
    bracket_lo: float | None    # largest transmit scale observed still labeled signal


def fgm_direction(model: nnet.ClassifierModel, r_te: np.ndarray, target: int) -> np.ndarray:
    """Unit-norm gradient of the target-class loss at the received block."""
    g = nnet.input_gradient(model, r_te, nnet.one_hot(target))
    norm = float(np.linalg.norm(g))
    if norm == 0.0:
        raise FlatLossSurfaceError("zero input gradient: flat loss surface at this block")
    return g / norm


def _resolve(direction, eps_t, h_ce, success, iterations, bracket_lo):
    recv = -(h_ce * eps_t) * direction
    return AttackResult(
        delta=nnet.complex_from_iq(-eps_t * direction),
        epsilon=float(eps_t),
        success=bool(success),
        iterations=int(iterations),
        received_delta=nnet.complex_from_iq(recv),
        bracket_lo=bracket_lo,
    )


def _zero_result(success: bool, epsilon: float = 0.0) -> AttackResult:
    z = np.zeros(nnet.BLOCK_LEN, dtype=np.complex128)
    return AttackResult(delta=z, epsilon=float(epsilon), success=success,
                        iterations=0, received_delta=z.copy(), bracket_lo=None)


def craft_perturbation(model: nnet.ClassifierModel, r_te: np.ndarray,
                       cfg: AttackConfig) -> AttackResult:
    """Smallest bisected gradient step (within eps_acc) whose candidate flips the label.

    Returns epsilon = 0 if the block is already labeled with the target class,
    and success=False with epsilon capped at sqrt(p_max) if even the full
    budget fails. A block with an exactly flat loss surface is reported as an
    infeasible zero perturbation rather than raising.
    """
    results = craft_perturbation_batch(model, np.asarray(r_te, dtype=np.float64)[None], cfg)
    return results[0]


def craft_perturbation_batch(model: nnet.ClassifierModel, r_te: np.ndarray,
                             cfg: AttackConfig) -> list[AttackResult]:
    """Vectorized crafting over a batch of blocks; per-block results match
    craft_perturbation exactly (same candidate sequence, same float ops)."""
    r = np.asarray(r_te, dtype=np.float64)
    n = r.shape[0]
    eps_max = float(np.sqrt(cfg.p_max))
    results: list[AttackResult | None] = [None] * n

    already = nnet.predict(model, r) == cfg.target
    for i in np.flatnonzero(already):
        results[i] = _zero_result(success=True)
    todo = np.flatnonzero(~already)
    if todo.size == 0:
        return results

    grads = nnet.input_gradient_batch(model, r[todo], cfg.target)
    norms = np.linalg.norm(grads.reshape(todo.size, -1), axis=1)
    flat = norms == 0.0
    for i in todo[flat]:
        results[i] = _zero_result(success=False, epsilon=eps_max)
    todo = todo[~flat]
    if todo.size == 0:
        return results
    dirs = grads[~flat] / norms[~flat, None, None]

    def labels_at(idx_mask: np.ndarray, scale: np.ndarray) -> np.ndarray:
        cand = r[todo[idx_mask]] - (cfg.h_ce * scale[idx_mask])[:, None, None] * dirs[idx_mask]
        return nnet.predict(model, cand)

    if cfg.paper_literal:
        return _literal_bisect(model, r, todo, dirs, cfg, eps_max, results)

    # Feasibility probe at the full budget.
    full = np.full(todo.size, eps_max)
    probe_ok = labels_at(np.ones(todo.size, bool), full) == cfg.target
    for k in np.flatnonzero(~probe_ok):
        results[todo[k]] = _resolve(dirs[k], eps_max, cfg.h_ce, False, 0, None)

    lo = np.zeros(todo.size)
    hi = np.full(todo.size, eps_max)
    iters = np.zeros(todo.size, dtype=int)
    active = probe_ok & (hi - lo > cfg.eps_acc)
    while active.any():
        mid = 0.5 * (lo + hi)
        noiseish = np.zeros(todo.size, bool)
        noiseish[active] = labels_at(active, mid) == cfg.target
        hi = np.where(active & noiseish, mid, hi)
        lo = np.where(active & ~noiseish, mid, lo)
        iters[active] += 1
        active = active & (hi - lo > cfg.eps_acc)
    for k in np.flatnonzero(probe_ok):
        results[todo[k]] = _resolve(dirs[k], hi[k], cfg.h_ce, True, iters[k], float(lo[k]))
    return results


def _literal_bisect(model, r, todo, dirs, cfg, eps_max, results):
    """Printed bracket ordering: success raises the lower end; returns the upper end."""
    lo = np.zeros(todo.size)
    hi = np.full(todo.size, eps_max)
    iters = np.zeros(todo.size, dtype=int)
    active = hi - lo > cfg.eps_acc
    while active.any():
        mid = 0.5 * (lo + hi)
        cand = r[todo[active]] - (cfg.h_ce * mid[active])[:, None, None] * dirs[active]
        noiseish = np.zeros(todo.size, bool)
        noiseish[active] = nnet.predict(model, cand) == cfg.target
        lo = np.where(active & noiseish, mid, lo)
        hi = np.where(active & ~noiseish, mid, hi)
        iters[active] += 1
        active = active & (hi - lo > cfg.eps_acc)
    final = r[todo] - (cfg.h_ce * hi)[:, None, None] * dirs
    ok = nnet.predict(model, final) == cfg.target
    for k in range(todo.size):
        results[todo[k]] = _resolve(dirs[k], hi[k], cfg.h_ce, ok[k], iters[k], None)
    return results


def received_to_transmit(delta_received: np.ndarray, h_ce: float) -> np.ndarray:
    """Transmit-space perturbation whose reception through gain h_ce is delta_received."""
    if h_ce == 0:
        raise ValueError("h_ce must be nonzero")
    if h_ce < 0:
        raise ValueError("h_ce must be positive")
    return np.asarray(delta_received, dtype=np.complex128) / h_ce


def gaussian_jam(power: float, rng: np.random.Generator) -> np.ndarray:
    """Conventional jamming baseline: a CN block with expected total power `power`."""
    if power < 0:
        raise ValueError("power must be nonnegative")
    return channel.complex_noise(nnet.BLOCK_LEN, power / nnet.BLOCK_LEN, rng)


def iteration_bound(p_max: float, eps_acc: float) -> int:
    """Contractual cap on bisection passes."""
    return int(np.ceil(np.log2(np.sqrt(p_max) / eps_acc))) + 1
