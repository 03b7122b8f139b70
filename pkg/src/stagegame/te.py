"""Built-in three-stage insider-threat scenario around an industrial process.

Stage 0: a spear-phishing round.  The defender can train employee or manager
accounts; the user (adversarial or legitimate) emails employees, managers, or
decoy avatar accounts; emailing avatars quarantines the sender.
Stage 1: privilege escalation.  The defender permits or restricts escalation
requests; the user holds or escalates from the account reached at stage 0.
Stage 2: process control.  The defender monitors selectively or completely;
the user issues an unencrypted or an encrypted (covert) command from the
privilege level reached.  The defender runs the process throughout and
values uptime; an adversarial user values damage, a legitimate one values
getting work done.

The per-hour worth of the protected process itself is a separate, purely
economic quantity (`te_per_hour_utility`).
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .game import MultiStageGame

__all__ = [
    "TEParams",
    "TEProcessEconomics",
    "default_params",
    "validate_te_params",
    "build_te_game",
    "te_per_hour_utility",
    "DEFENDER_TYPES",
    "USER_TYPES",
]

DEFENDER_TYPES = ("sophisticated", "primitive")
USER_TYPES = ("adversarial", "legitimate")

_X0 = ("ineffectual", "effectual")
_X1 = ("quarantine", "employee", "manager")
_X2 = ("privilege-0", "privilege-1", "privilege-2", "privilege-3")


@dataclass(frozen=True)
class TEParams:
    """Payoff parameters for the scenario; all monetary, per stage.

    The defaults are tuned so the final-stage game has, at any compromised
    privilege level, a mixed equilibrium in which both defender types are
    willing to pay for complete monitoring and the attack probability drops
    once at a user-side belief threshold near one half.  Quarantine fully
    neutralizes the attacker (privilege 0 does no damage), every real
    foothold is equally damaging, and training costs exceed the worst-case
    phishing loss, so the solved play pools both user types on the same
    on-path actions and the prior beliefs are already consistent.
    """

    # stage 0: phishing round
    train_cost_primitive: float = 160.0
    train_cost_sophisticated: float = 240.0
    legit_email_reward: float = 50.0
    phishing_reward: float = 150.0
    phishing_penalty_primitive: float = 100.0
    phishing_penalty_sophisticated: float = 300.0
    avatar_gain_adversarial: float = 120.0
    avatar_loss_legitimate: float = -200.0
    ineffectual_discount: float = 0.5
    # stage 1: privilege escalation
    escalation_reward_legitimate: float = 100.0
    escalation_gain_adversarial: float = 200.0
    restriction_reward_primitive: float = 150.0
    restriction_reward_sophisticated: float = 250.0
    # stage 2: process control
    operation_reward: float = 2000.0
    compromised_rewards: tuple[float, float, float, float] = (2000.0, 600.0, 600.0, 600.0)
    detection_reward_primitive: float = 1200.0
    detection_reward_sophisticated: float = 1500.0
    monitoring_cost_primitive: float = 300.0
    monitoring_cost_sophisticated: float = 180.0


def default_params() -> TEParams:
    return TEParams()


def validate_te_params(params: TEParams) -> None:
    """Raise ValueError when a parameter ordering is violated."""
    for f in fields(params):
        val = getattr(params, f.name)
        vals = val if isinstance(val, tuple) else (val,)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError(f"{f.name}: must be finite")
    p = params
    if not (p.train_cost_sophisticated > p.train_cost_primitive > 0):
        raise ValueError("training costs must satisfy sophisticated > primitive > 0")
    if not (p.phishing_penalty_sophisticated > p.phishing_penalty_primitive):
        raise ValueError("phishing penalty must be larger for the sophisticated defender")
    if not (p.avatar_loss_legitimate < 0 < p.avatar_gain_adversarial):
        raise ValueError("avatar payoffs must be negative for legitimate, positive for adversarial")
    if not (0.0 <= p.ineffectual_discount <= 1.0):
        raise ValueError("ineffectual_discount must lie in [0, 1]")
    if len(p.compromised_rewards) != len(_X2):
        raise ValueError(f"compromised_rewards needs {len(_X2)} entries")
    for a, b in zip(p.compromised_rewards, p.compromised_rewards[1:]):
        if b > a:
            raise ValueError("compromised_rewards must be non-increasing in privilege")
    if max(p.compromised_rewards) > p.operation_reward:
        raise ValueError("compromised_rewards must not exceed operation_reward")


def build_te_game(
    params: TEParams | None = None,
    prior_adversarial: float = 0.5,
    prior_sophisticated: float = 0.5,
) -> MultiStageGame:
    """Three-stage game over both process states.

    `prior_adversarial` is each defender type's prior that the user is
    adversarial; `prior_sophisticated` each user type's prior that the
    defender is sophisticated.  The start state is chosen per solve, not here.
    """
    p = params or default_params()
    validate_te_params(p)
    if not (0.0 <= prior_adversarial <= 1.0 and 0.0 <= prior_sophisticated <= 1.0):
        raise ValueError("priors must lie in [0, 1]")

    m1, m2 = len(DEFENDER_TYPES), len(USER_TYPES)
    train_cost = (p.train_cost_sophisticated, p.train_cost_primitive)
    phish_penalty = (p.phishing_penalty_sophisticated, p.phishing_penalty_primitive)
    restrict_reward = (p.restriction_reward_sophisticated, p.restriction_reward_primitive)
    detect_reward = (p.detection_reward_sophisticated, p.detection_reward_primitive)
    monitor_cost = (p.monitoring_cost_sophisticated, p.monitoring_cost_primitive)

    # stage 0
    u0 = np.zeros((len(_X0), 3, 3, m1, m2, 2))
    for xi, x in enumerate(_X0):
        disc = p.ineffectual_discount if x == "ineffectual" else 1.0
        gain = disc * p.phishing_reward
        avatar_gain = disc * p.avatar_gain_adversarial
        for t1 in range(m1):
            cost, penalty = train_cost[t1], phish_penalty[t1]
            adv = {
                (0, 0): (-gain, gain),
                (0, 1): (-gain, gain),
                (0, 2): (0.0, avatar_gain),
                (1, 0): (-cost, -penalty),
                (1, 1): (-cost, gain),
                (1, 2): (-cost, avatar_gain),
                (2, 0): (-cost, gain),
                (2, 1): (-cost, -penalty),
                (2, 2): (-cost, avatar_gain),
            }
            for (a1, a2), (ud, uu) in adv.items():
                u0[xi, a1, a2, t1, 0] = (ud, uu)
            for a1 in range(3):
                cost_term = 0.0 if a1 == 0 else -cost
                for a2 in range(3):
                    reward = p.avatar_loss_legitimate if a2 == 2 else p.legit_email_reward
                    u0[xi, a1, a2, t1, 1] = (cost_term, reward)
    t0 = np.zeros((len(_X0), 3, 3), dtype=np.intp)
    t0[:, :, 0] = _X1.index("employee")
    t0[:, :, 1] = _X1.index("manager")
    t0[:, :, 2] = _X1.index("quarantine")

    # stage 1
    u1 = np.zeros((len(_X1), 2, 2, m1, m2, 2))
    for xi, x in enumerate(_X1):
        if x == "quarantine":
            continue
        for t1 in range(m1):
            block = restrict_reward[t1]
            # adversarial user
            u1[xi, 0, 1, t1, 0] = (-p.escalation_gain_adversarial, p.escalation_gain_adversarial)
            u1[xi, 1, 1, t1, 0] = (block, -block)
            # legitimate user
            u1[xi, 0, 1, t1, 1] = (p.escalation_reward_legitimate, p.escalation_reward_legitimate)
            u1[xi, 1, 1, t1, 1] = (-p.escalation_reward_legitimate, -p.escalation_reward_legitimate)
    t1_map = np.zeros((len(_X1), 2, 2), dtype=np.intp)
    t1_map[0, :, :] = 0  # quarantine -> privilege-0
    t1_map[1, :, 0] = 1  # employee holds -> privilege-1
    t1_map[1, 0, 1] = 2  # employee escalates, permitted -> privilege-2
    t1_map[1, 1, 1] = 1  # employee escalates, restricted -> privilege-1
    t1_map[2, :, 0] = 2  # manager holds -> privilege-2
    t1_map[2, 0, 1] = 3  # manager escalates, permitted -> privilege-3
    t1_map[2, 1, 1] = 2  # manager escalates, restricted -> privilege-2

    # stage 2
    u2 = np.zeros((len(_X2), 2, 2, m1, m2, 2))
    r4 = p.operation_reward
    for xi in range(len(_X2)):
        r1 = p.compromised_rewards[xi]
        for t1 in range(m1):
            rd, cm = detect_reward[t1], monitor_cost[t1]
            u2[xi, 0, 0, t1, 0] = (r4, 0.0)
            u2[xi, 0, 1, t1, 0] = (r1, r4 - r1)
            u2[xi, 1, 0, t1, 0] = (r4 - cm, 0.0)
            u2[xi, 1, 1, t1, 0] = (rd - cm, -rd)
            u2[xi, 0, 0, t1, 1] = (r4, r4 / 2.0)
            u2[xi, 0, 1, t1, 1] = (r4, r4)
            u2[xi, 1, 0, t1, 1] = (r4 - cm, r4 / 2.0)
            u2[xi, 1, 1, t1, 1] = (r4 - cm, r4)

    prior1 = np.tile([prior_adversarial, 1.0 - prior_adversarial], (m1, 1))
    prior2 = np.tile([prior_sophisticated, 1.0 - prior_sophisticated], (m2, 1))

    return MultiStageGame(
        horizon=2,
        types1=DEFENDER_TYPES,
        types2=USER_TYPES,
        states=(_X0, _X1, _X2),
        actions1=(
            ("no-training", "train-employees", "train-managers"),
            ("permit", "restrict"),
            ("selective-monitoring", "complete-monitoring"),
        ),
        actions2=(
            ("email-employees", "email-managers", "email-avatars"),
            ("nop", "escalate"),
            ("unencrypted-command", "encrypted-command"),
        ),
        utilities=(u0, u1, u2),
        transitions=(t0, t1_map),
        prior1=prior1,
        prior2=prior2,
    )


@dataclass(frozen=True)
class TEProcessEconomics:
    """Per-hour economics of the protected process."""

    production_rate: float  # barrels per hour
    yield_fraction: float  # usable fraction of throughput
    product_price: float  # dollars per barrel
    operating_cost: float  # dollars per hour

    def __post_init__(self):
        if not np.isfinite([self.production_rate, self.yield_fraction,
                            self.product_price, self.operating_cost]).all():
            raise ValueError("economics fields must be finite")
        if self.production_rate < 0 or self.product_price < 0 or self.operating_cost < 0:
            raise ValueError("rates, prices, and costs must be non-negative")
        if not 0.0 <= self.yield_fraction <= 1.0:
            raise ValueError("yield_fraction must lie in [0, 1]")


def te_per_hour_utility(econ: TEProcessEconomics) -> float:
    """Net dollars per hour produced by the process."""
    return econ.production_rate * econ.yield_fraction * econ.product_price - econ.operating_cost
