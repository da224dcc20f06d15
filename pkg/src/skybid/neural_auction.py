"""Trainable revenue-optimal auction built from monotone min-max networks.

Each bidder's report passes through a strictly increasing transform
``phi(b) = min_k max_j (w_kj * b + beta_kj)`` with positive weights
(``w = exp(theta)``, so positivity holds by construction).  A softmax over
the transformed bids plus a constant dummy slot picks the winner during
training; at inference the argmax decides, and the dummy winning means no
sale.  The winner pays the inverse transform of the runner-up transformed
bid, clamped non-negative, which makes the mechanism individually rational
and incentive compatible for any strictly increasing transform.

Training minimizes negative expected revenue with plain stochastic
gradient descent.  Gradients are computed analytically: softmax has its
usual Jacobian, and every min/max picks up the gradient of its selected
linear piece (ties resolved toward the lowest index).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from skybid.bidding import BidProfile, ValuationDistribution
from skybid.errors import ParseError, ValidationError

CHECKPOINT_MAGIC = "skybid-monotone-net 1"


@dataclass
class MonotoneNetParams:
    """Raw parameters of the per-bidder monotone transforms.

    ``theta`` and ``beta`` have shape (rows, groups, functions); effective
    weights are ``exp(theta)``.  With ``shared=True`` a single row serves
    every bidder, which is the natural choice for i.i.d. valuations.
    """

    theta: np.ndarray
    beta: np.ndarray
    shared: bool = True

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.beta = np.asarray(self.beta, dtype=float)
        if self.theta.shape != self.beta.shape or self.theta.ndim != 3:
            raise ValidationError("theta and beta must share a (rows, K, J) shape")
        if min(self.theta.shape) < 1:
            raise ValidationError("parameter dimensions must all be >= 1")
        if self.shared and self.theta.shape[0] != 1:
            raise ValidationError("shared parameters must have exactly one row")

    @property
    def rows(self) -> int:
        return self.theta.shape[0]

    @property
    def groups(self) -> int:
        return self.theta.shape[1]

    @property
    def functions(self) -> int:
        return self.theta.shape[2]

    def weights(self) -> np.ndarray:
        return np.exp(self.theta)

    def row_for(self, bidder: int) -> int:
        if self.shared:
            return 0
        if not 0 <= bidder < self.rows:
            raise ValidationError(f"bidder {bidder} outside parameter rows {self.rows}")
        return bidder

    def row_index(self, n_bidders: int) -> np.ndarray:
        if self.shared:
            return np.zeros(n_bidders, dtype=int)
        if n_bidders != self.rows:
            raise ValidationError(
                f"profile has {n_bidders} bidders but parameters have {self.rows} rows"
            )
        return np.arange(n_bidders)

    def copy(self) -> "MonotoneNetParams":
        return MonotoneNetParams(self.theta.copy(), self.beta.copy(), self.shared)

    @classmethod
    def identity(cls) -> "MonotoneNetParams":
        """K = J = 1, w = 1, beta = 0: the transform is the identity map."""
        return cls(theta=np.zeros((1, 1, 1)), beta=np.zeros((1, 1, 1)), shared=True)

    @classmethod
    def init_random(
        cls,
        groups: int,
        functions: int,
        rng: np.random.Generator,
        n_bidders: int = 1,
        shared: bool = True,
        value_scale: float = 1.0,
    ) -> "MonotoneNetParams":
        """Sharp start: weights in [8, 16] and zero crossings high in the
        value range (0.75 to 0.85 of ``value_scale``).

        Sharp weights make the training softmax behave like the argmax it
        approximates, which keeps the loss aligned with realized revenue;
        a high starting reserve then descends stably toward the
        revenue-optimal one.  Low starting reserves are unstable: there
        the soft loss rewards inflating losers' notional payments and the
        reserve collapses to zero or runs away upward.
        """
        if value_scale <= 0:
            raise ValidationError(f"value_scale must be > 0, got {value_scale}")
        rows = 1 if shared else n_bidders
        theta = rng.uniform(np.log(8.0), np.log(16.0), (rows, groups, functions))
        crossings = rng.uniform(0.75, 0.85, (rows, groups, functions)) * value_scale
        return cls(theta=theta, beta=-np.exp(theta) * crossings, shared=shared)


def virtual_transform(params: MonotoneNetParams, bidder: int, b: float) -> float:
    """phi_bidder(b): min over groups of max over lines of ``w * b + beta``."""
    r = params.row_for(bidder)
    lines = np.exp(params.theta[r]) * b + params.beta[r]
    return float(lines.max(axis=1).min())


def virtual_inverse(params: MonotoneNetParams, bidder: int, y: float) -> float:
    """Exact functional inverse: max over groups of min over lines of
    ``(y - beta) / w``."""
    r = params.row_for(bidder)
    w = np.exp(params.theta[r])
    candidates = (y - params.beta[r]) / w
    return float(candidates.min(axis=1).max())


def transform_batch(params: MonotoneNetParams, values: np.ndarray) -> np.ndarray:
    """Apply each bidder's transform column-wise to a (profiles, bidders) matrix."""
    values = np.asarray(values, dtype=float)
    rows = params.row_index(values.shape[1])
    w = params.weights()[rows]
    z = values[:, :, None, None] * w[None] + params.beta[rows][None]
    return z.max(axis=3).min(axis=2)


def inverse_batch(params: MonotoneNetParams, targets: np.ndarray) -> np.ndarray:
    """Column-wise inverse transform of a (profiles, bidders) matrix."""
    targets = np.asarray(targets, dtype=float)
    rows = params.row_index(targets.shape[1])
    w = params.weights()[rows]
    u = (targets[:, :, None, None] - params.beta[rows][None]) / w[None]
    return u.min(axis=3).max(axis=2)


def allocate(transformed: np.ndarray, quality_k: float, mode: str) -> np.ndarray:
    """Allocation probabilities over the N + 1 slots (last slot is the dummy).

    Soft mode is a softmax with temperature parameter ``quality_k``; hard
    mode puts probability one on the argmax slot (dummy winning means no
    sale)."""
    transformed = np.asarray(transformed, dtype=float)
    if quality_k <= 0:
        raise ValidationError(f"quality_k must be > 0, got {quality_k}")
    if mode == "soft":
        logits = quality_k * transformed
        logits = logits - logits.max()
        exp = np.exp(logits)
        return exp / exp.sum()
    if mode == "hard":
        probs = np.zeros(transformed.size)
        probs[int(np.argmax(transformed))] = 1.0
        return probs
    raise ValidationError(f"mode must be 'soft' or 'hard', got {mode!r}")


def payment_transformed(transformed: np.ndarray, winner_slot: int) -> float:
    """Runner-up price in transformed space: ReLU of the best bid excluding
    the winner (the dummy participates).  The dummy slot itself pays 0."""
    transformed = np.asarray(transformed, dtype=float)
    n_slots = transformed.size
    if n_slots < 2:
        raise ValidationError("need at least two slots (one bidder plus the dummy)")
    if winner_slot == n_slots - 1:
        return 0.0
    others = np.delete(transformed, winner_slot)
    return float(max(others.max(), 0.0))


@dataclass(frozen=True, eq=False)
class NeuralOutcome:
    """Everything the network computed for one bid profile."""

    transformed_bids: np.ndarray
    allocation_probs: np.ndarray
    payments_transformed: np.ndarray
    payments_final: np.ndarray
    revenue: float
    mode: str
    winner: int | None

    def to_outcome(self, bids: BidProfile, processing_cost: float = 0.0):
        """Hard-mode view as a classical outcome: losers are reported as
        paying nothing even though their threshold payments were computed."""
        from skybid.mechanisms import AuctionOutcome

        if self.mode != "hard":
            raise ValidationError("only hard-mode outcomes map to a classical outcome")
        n = len(bids)
        allocation = np.zeros(n)
        payments = np.zeros(n)
        if self.winner is not None:
            allocation[self.winner] = 1.0
            payments[self.winner] = self.payments_final[self.winner]
        utilities = bids.bids * allocation - payments
        return AuctionOutcome(
            winner=self.winner,
            allocation=allocation,
            payments=payments,
            revenue=self.revenue,
            utilities=utilities,
        )


def run_neural(
    params: MonotoneNetParams,
    bids: BidProfile,
    quality_k: float = 1.0,
    mode: str = "hard",
    processing_cost: float = 0.0,
) -> NeuralOutcome:
    """Transform -> allocate -> price one bid profile.

    Payments are computed for every bidder (each one's threshold price);
    in hard mode only the winner's is economically meaningful and revenue
    is ``payment - processing_cost`` for a sale, zero otherwise.  In soft
    mode revenue weights every bidder's payment by its allocation
    probability."""
    n = len(bids)
    bar_real = transform_batch(params, bids.bids[None, :])[0]
    bar = np.concatenate([bar_real, [0.0]])
    probs = allocate(bar, quality_k, mode)

    p0 = np.array([payment_transformed(bar, i) for i in range(n)])
    final = inverse_batch(params, p0[None, :])[0]

    if mode == "hard":
        winner_slot = int(np.argmax(bar))
        if winner_slot == n:
            winner = None
            revenue = 0.0
        else:
            winner = winner_slot
            revenue = float(final[winner]) - processing_cost
    else:
        winner = None
        revenue = float(np.dot(probs[:n], final - processing_cost))
    return NeuralOutcome(
        transformed_bids=bar,
        allocation_probs=probs,
        payments_transformed=p0,
        payments_final=final,
        revenue=revenue,
        mode=mode,
        winner=winner,
    )


def hard_auction_batch(
    params: MonotoneNetParams,
    values: np.ndarray,
    processing_cost: float = 0.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized hard-mode outcomes for a (profiles, bidders) value matrix.

    Returns (winners, payments, revenues); ``winner = -1`` flags no sale.
    Agrees row-for-row with :func:`run_neural` in hard mode.
    """
    values = np.asarray(values, dtype=float)
    s, n = values.shape
    bar_real = transform_batch(params, values)
    bar = np.concatenate([bar_real, np.zeros((s, 1))], axis=1)
    winner_slot = bar.argmax(axis=1)
    sale = winner_slot < n

    p0 = np.zeros(s)
    if np.any(sale):
        idx = np.flatnonzero(sale)
        masked = bar[idx].copy()
        masked[np.arange(idx.size), winner_slot[idx]] = -np.inf
        p0[idx] = np.maximum(masked.max(axis=1), 0.0)

    rows = params.row_index(n)
    w = params.weights()[rows]
    payments = np.zeros(s)
    if np.any(sale):
        idx = np.flatnonzero(sale)
        win = winner_slot[idx]
        u = (p0[idx, None, None] - params.beta[rows[win]]) / w[win]
        payments[idx] = u.min(axis=2).max(axis=1)

    winners = np.where(sale, winner_slot, -1)
    revenues = np.where(sale, payments - processing_cost, 0.0)
    return winners, payments, revenues


def _forward_soft(params: MonotoneNetParams, values: np.ndarray, quality_k: float):
    """Batched soft-mode forward pass; returns intermediates for the backward."""
    s, n = values.shape
    rows = params.row_index(n)
    w_all = params.weights()
    w = w_all[rows]  # (N, K, J)
    b = params.beta[rows]

    z = values[:, :, None, None] * w[None] + b[None]  # (S, N, K, J)
    j_max = z.argmax(axis=3)  # (S, N, K)
    m = np.take_along_axis(z, j_max[..., None], axis=3)[..., 0]  # (S, N, K)
    k_act = m.argmin(axis=2)  # (S, N)
    bar_real = np.take_along_axis(m, k_act[..., None], axis=2)[..., 0]
    j_act = np.take_along_axis(j_max, k_act[..., None], axis=2)[..., 0]

    bar = np.concatenate([bar_real, np.zeros((s, 1))], axis=1)  # (S, M)
    logits = quality_k * bar
    logits -= logits.max(axis=1, keepdims=True)
    exp = np.exp(logits)
    g = exp / exp.sum(axis=1, keepdims=True)  # (S, M)

    y = np.empty((s, n))
    a = np.empty((s, n), dtype=int)
    for i in range(n):
        masked = bar.copy()
        masked[:, i] = -np.inf
        a[:, i] = masked.argmax(axis=1)
        y[:, i] = masked[np.arange(s), a[:, i]]
    p0 = np.maximum(y, 0.0)

    u = (p0[:, :, None, None] - b[None]) / w[None]  # (S, N, K, J)
    j_inv = u.argmin(axis=3)  # (S, N, K)
    n_min = np.take_along_axis(u, j_inv[..., None], axis=3)[..., 0]
    k_inv = n_min.argmax(axis=2)  # (S, N)
    p = np.take_along_axis(n_min, k_inv[..., None], axis=2)[..., 0]
    j_inv_act = np.take_along_axis(j_inv, k_inv[..., None], axis=2)[..., 0]

    soft_revenue = (g[:, :n] * p).sum(axis=1)  # (S,)
    return {
        "rows": rows,
        "w": w,
        "bar": bar,
        "g": g,
        "y": y,
        "a": a,
        "p0": p0,
        "p": p,
        "k_act": k_act,
        "j_act": j_act,
        "k_inv": k_inv,
        "j_inv": j_inv_act,
        "soft_revenue": soft_revenue,
    }


def loss(params: MonotoneNetParams, values: np.ndarray, quality_k: float = 1.0) -> float:
    """Mean negative soft-mode revenue over a (profiles, bidders) batch."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[0] < 1:
        raise ValidationError("values must be a nonempty (profiles, bidders) matrix")
    fw = _forward_soft(params, values, quality_k)
    return float(-fw["soft_revenue"].mean())


def loss_and_grad(
    params: MonotoneNetParams, values: np.ndarray, quality_k: float = 1.0
) -> tuple[float, np.ndarray, np.ndarray]:
    """Loss plus analytic gradients with respect to theta and beta.

    Gradients flow through the softmax exactly and through every min/max
    via its selected linear piece; the ReLU contributes nothing when the
    dummy provides the runner-up price.
    """
    values = np.asarray(values, dtype=float)
    s, n = values.shape
    fw = _forward_soft(params, values, quality_k)
    rows, w = fw["rows"], fw["w"]
    g, p, p0 = fw["g"], fw["p"], fw["p0"]
    k_act, j_act = fw["k_act"], fw["j_act"]
    k_inv, j_inv = fw["k_inv"], fw["j_inv"]

    grad_theta = np.zeros_like(params.theta)
    grad_beta = np.zeros_like(params.beta)

    col = np.arange(n)[None, :].repeat(s, axis=0)  # bidder index per (s, i)
    row_idx = rows[col]  # parameter row per (s, i)

    # dR/d(bar_m) through the softmax; the dummy slot has no payment
    p_slots = np.concatenate([p, np.zeros((s, 1))], axis=1)
    g_bar = quality_k * g * (p_slots - fw["soft_revenue"][:, None])  # (S, M)

    # dR/d(bar) through each bidder's runner-up price
    w_inv_act = w[col, k_inv, j_inv]  # (S, N) active inverse weight
    relu_on = fw["y"] > 0
    coeff = g[:, :n] / w_inv_act * relu_on  # d p_i / d bar[a_i] times dR/dp_i
    g_bar_pay = np.zeros_like(g_bar)
    np.add.at(
        g_bar_pay,
        (np.repeat(np.arange(s), n), fw["a"].ravel()),
        coeff.ravel(),
    )
    g_bar_total = g_bar + g_bar_pay  # (S, M); dummy column is inert

    # transform parameters: bar_i = w*v + beta at the active (k, j)
    sens = g_bar_total[:, :n]
    w_act = w[col, k_act, j_act]
    np.add.at(grad_theta, (row_idx.ravel(), k_act.ravel(), j_act.ravel()),
              (sens * values * w_act).ravel())
    np.add.at(grad_beta, (row_idx.ravel(), k_act.ravel(), j_act.ravel()), sens.ravel())

    # inverse parameters: p_i = (p0 - beta) / w at the active (k, j)
    gp = g[:, :n]
    np.add.at(grad_theta, (row_idx.ravel(), k_inv.ravel(), j_inv.ravel()),
              (gp * (-p)).ravel())
    np.add.at(grad_beta, (row_idx.ravel(), k_inv.ravel(), j_inv.ravel()),
              (gp * (-1.0 / w_inv_act)).ravel())

    scale = -1.0 / s
    loss_value = float(-fw["soft_revenue"].mean())
    return loss_value, grad_theta * scale, grad_beta * scale


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters; the defaults reproduce the shipped presets."""

    quality_k: float = 1.0
    iterations: int = 500
    batch_size: int = 128
    learning_rate: float = 0.1
    rng_seed: int = 0
    groups: int = 5
    functions: int = 3
    shared: bool = True
    eval_batch_size: int = 2000

    def __post_init__(self):
        if self.quality_k <= 0:
            raise ValidationError(f"quality_k must be > 0, got {self.quality_k}")
        if self.iterations < 1:
            raise ValidationError(f"iterations must be >= 1, got {self.iterations}")
        for name in ("batch_size", "groups", "functions", "eval_batch_size"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.learning_rate <= 0:
            raise ValidationError(f"learning_rate must be > 0, got {self.learning_rate}")


@dataclass(frozen=True)
class TrainStep:
    iteration: int
    loss: float
    soft_revenue: float
    hard_revenue: float


@dataclass(frozen=True)
class TrainResult:
    params: MonotoneNetParams
    history: tuple[TrainStep, ...]


def train(
    dist: ValuationDistribution, n_bidders: int, cfg: TrainConfig | None = None
) -> TrainResult:
    """Fit the monotone transforms by SGD on negative expected revenue.

    Deterministic given ``cfg.rng_seed``: initialization, the held-out
    evaluation batch, and every training batch come from one generator in
    a fixed order.  Hard-mode revenue in the history is measured on the
    held-out batch each iteration.
    """
    cfg = cfg or TrainConfig()
    if n_bidders < 1:
        raise ValidationError(f"n_bidders must be >= 1, got {n_bidders}")
    rng = np.random.default_rng(cfg.rng_seed)
    scale = dist.support[1]
    if not np.isfinite(scale) or scale <= 0:
        scale = 1.0
    params = MonotoneNetParams.init_random(
        cfg.groups,
        cfg.functions,
        rng,
        n_bidders=n_bidders,
        shared=cfg.shared,
        value_scale=scale,
    )
    eval_values = dist.sample(cfg.eval_batch_size * n_bidders, rng).reshape(
        cfg.eval_batch_size, n_bidders
    )

    history = []
    for it in range(1, cfg.iterations + 1):
        batch = dist.sample(cfg.batch_size * n_bidders, rng).reshape(
            cfg.batch_size, n_bidders
        )
        loss_value, g_theta, g_beta = loss_and_grad(params, batch, cfg.quality_k)
        if not np.isfinite(loss_value):
            raise RuntimeError(f"training diverged at iteration {it}: loss {loss_value}")
        params.theta -= cfg.learning_rate * g_theta
        params.beta -= cfg.learning_rate * g_beta
        _, _, revenues = hard_auction_batch(params, eval_values)
        history.append(
            TrainStep(
                iteration=it,
                loss=loss_value,
                soft_revenue=-loss_value,
                hard_revenue=float(revenues.mean()),
            )
        )
    return TrainResult(params=params, history=tuple(history))


def save_params(params: MonotoneNetParams, path: str | Path) -> None:
    """Write a checkpoint: plain-text header plus row-major values.

    Layout: magic line; ``rows`` / ``shared`` / ``groups`` / ``functions``
    header lines; a ``theta`` section and a ``beta`` section, each with one
    line per row holding groups * functions floats (group-major)."""
    lines = [
        CHECKPOINT_MAGIC,
        f"rows {params.rows}",
        f"shared {int(params.shared)}",
        f"groups {params.groups}",
        f"functions {params.functions}",
        "theta",
    ]
    for r in range(params.rows):
        lines.append(" ".join(repr(float(v)) for v in params.theta[r].ravel()))
    lines.append("beta")
    for r in range(params.rows):
        lines.append(" ".join(repr(float(v)) for v in params.beta[r].ravel()))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_params(path: str | Path) -> MonotoneNetParams:
    """Read a checkpoint written by :func:`save_params`."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != CHECKPOINT_MAGIC:
        raise ParseError(f"{path} is not a monotone-net checkpoint")

    def header(idx: int, key: str) -> int:
        parts = lines[idx].split()
        if len(parts) != 2 or parts[0] != key:
            raise ParseError(f"expected '{key} <int>' on line {idx + 1} of {path}")
        return int(parts[1])

    rows = header(1, "rows")
    shared = bool(header(2, "shared"))
    groups = header(3, "groups")
    functions = header(4, "functions")
    if len(lines) < 7 + 2 * rows:
        raise ParseError(f"truncated checkpoint {path}")
    if lines[5] != "theta" or lines[6 + rows] != "beta":
        raise ParseError(f"malformed section markers in {path}")

    def section(start: int) -> np.ndarray:
        data = []
        for r in range(rows):
            vals = [float(v) for v in lines[start + r].split()]
            if len(vals) != groups * functions:
                raise ParseError(
                    f"row {r} in {path} has {len(vals)} values, expected {groups * functions}"
                )
            data.append(vals)
        return np.array(data).reshape(rows, groups, functions)

    return MonotoneNetParams(
        theta=section(6), beta=section(7 + rows), shared=shared
    )
