"""Stage 2: latent flow matching over frozen-encoder latents.

Straight-line interpolation between Gaussian noise and clean latents, a
clean-sample-predicting transformer denoiser with time/group conditioning
through adaptive layer norm, self-conditioning, classifier-free guidance
on the space group, empirical priors over (group, orbit count), and a
deterministic Euler sampler.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .autoencoder import Autoencoder, DecodeError, LatentBatch
from .crystal import CrystalASU
from .nncore import (
    ParameterStore,
    Tensor,
    adaln,
    adam_step,
    linear,
    mhsa,
    no_grad,
    silu_mlp,
)

__all__ = [
    "Denoiser",
    "DenoiserConfig",
    "EmpiricalPriors",
    "SamplerConfig",
    "fit_priors",
    "interpolate",
    "sample",
    "target_field",
    "train_step",
]

N_GROUPS = 230
NULL_CONDITION = N_GROUPS  # embedding row reserved for the unconditional path


# ---------------------------------------------------------------------------
# Priors over (G, O)
# ---------------------------------------------------------------------------


@dataclass
class EmpiricalPriors:
    """Training-set frequencies of the space group and orbit count."""

    p_group: dict[int, float]
    p_orbits_given_group: dict[int, dict[int, float]]

    def sample_group(self, rng: np.random.Generator) -> int:
        groups = sorted(self.p_group)
        probs = np.array([self.p_group[g] for g in groups])
        return int(rng.choice(groups, p=probs / probs.sum()))

    def sample_orbits(self, group: int, rng: np.random.Generator) -> int:
        table = self.p_orbits_given_group[group]
        counts = sorted(table)
        probs = np.array([table[c] for c in counts])
        return int(rng.choice(counts, p=probs / probs.sum()))

    def to_json(self) -> str:
        payload = {
            "G": {str(g): p for g, p in sorted(self.p_group.items())},
            "O_given_G": {
                str(g): {str(o): p for o, p in sorted(t.items())}
                for g, t in sorted(self.p_orbits_given_group.items())
            },
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "EmpiricalPriors":
        payload = json.loads(text)
        return cls(
            p_group={int(g): float(p) for g, p in payload["G"].items()},
            p_orbits_given_group={
                int(g): {int(o): float(p) for o, p in t.items()}
                for g, t in payload["O_given_G"].items()
            },
        )


def fit_priors(asus: list[CrystalASU]) -> EmpiricalPriors:
    """Normalized counts of groups and per-group orbit counts."""
    if not asus:
        raise ValueError("cannot fit priors on an empty dataset")
    g_counts: dict[int, int] = {}
    o_counts: dict[int, dict[int, int]] = {}
    for asu in asus:
        g = asu.spacegroup
        g_counts[g] = g_counts.get(g, 0) + 1
        table = o_counts.setdefault(g, {})
        n = len(asu.sites)
        table[n] = table.get(n, 0) + 1
    total = len(asus)
    return EmpiricalPriors(
        p_group={g: c / total for g, c in g_counts.items()},
        p_orbits_given_group={
            g: {o: c / g_counts[g] for o, c in table.items()}
            for g, table in o_counts.items()
        },
    )


# ---------------------------------------------------------------------------
# Interpolation path and target field
# ---------------------------------------------------------------------------


def interpolate(z0: np.ndarray, z1: np.ndarray, t: float) -> np.ndarray:
    """Convex combination (1 - t) z0 + t z1."""
    if z0.shape != z1.shape:
        raise ValueError(f"shape mismatch {z0.shape} vs {z1.shape}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t={t} outside [0, 1]")
    return (1.0 - t) * z0 + t * z1


def target_field(z_t: np.ndarray, z1: np.ndarray, t: float) -> np.ndarray:
    """Conditional velocity (z1 - z_t) / (1 - t); undefined at t = 1."""
    if t >= 1.0:
        raise ValueError("target field is undefined at t = 1")
    return (z1 - z_t) / (1.0 - t)


# ---------------------------------------------------------------------------
# Denoiser
# ---------------------------------------------------------------------------


@dataclass
class DenoiserConfig:
    d_latent: int = 32
    d_model: int = 512
    n_heads: int = 12
    n_layers: int = 12
    cond_drop: float = 0.1
    self_cond_prob: float = 0.5
    time_features: int = 64
    lr: float = 3e-4
    warmup: int = 100
    batch_size: int = 32
    epochs: int = 200
    seed: int = 0

    @classmethod
    def desk(cls, **overrides) -> "DenoiserConfig":
        base = dict(d_model=128, d_latent=16, n_heads=4, n_layers=2)
        base.update(overrides)
        return cls(**base)

    def to_dict(self) -> dict:
        return asdict(self)


def time_embedding(t: np.ndarray, dim: int) -> np.ndarray:
    """Sinusoidal features of the scalar time in [0, 1]."""
    half = dim // 2
    freqs = np.exp(np.linspace(0.0, np.log(1000.0), half))
    angles = np.asarray(t, dtype=np.float64)[:, None] * freqs[None, :]
    return np.concatenate([np.sin(angles), np.cos(angles)], axis=-1)


class Denoiser:
    """Clean-sample predictor: tokens are per-orbit latents; time and group
    conditioning enter every block through adaptive layer norm."""

    def __init__(self, config: DenoiserConfig,
                 store: ParameterStore | None = None,
                 ae_checkpoint_hash: str | None = None):
        self.config = config
        self.store = store if store is not None else self._build(config)
        self.ae_checkpoint_hash = ae_checkpoint_hash

    @staticmethod
    def _build(cfg: DenoiserConfig) -> ParameterStore:
        st = ParameterStore(seed=cfg.seed)
        dm, d = cfg.d_model, cfg.d_latent
        # input projection consumes [z_t, self_cond]
        st.add("in.w", (2 * d, dm))
        st.add("in.b", (dm,), scale=0.0)
        st.add("group_emb", (N_GROUPS + 1, dm), scale=0.02)
        st.add("time.w1", (2 * (cfg.time_features // 2), dm))
        st.add("time.b1", (dm,), scale=0.0)
        st.add("time.w2", (dm, dm))
        st.add("time.b2", (dm,), scale=0.0)
        for i in range(cfg.n_layers):
            p = f"block{i}"
            for nm in ("wq", "wk", "wv", "wo"):
                st.add(f"{p}.{nm}", (dm, dm))
            st.add(f"{p}.ln1.w", (dm, 2 * dm), scale=0.0)
            st.add(f"{p}.ln1.b", (2 * dm,), scale=0.0)
            st.add(f"{p}.ln2.w", (dm, 2 * dm), scale=0.0)
            st.add(f"{p}.ln2.b", (2 * dm,), scale=0.0)
            st.add(f"{p}.ff1.w", (dm, 2 * dm))
            st.add(f"{p}.ff1.b", (2 * dm,), scale=0.0)
            st.add(f"{p}.ff2.w", (2 * dm, dm))
            st.add(f"{p}.ff2.b", (dm,), scale=0.0)
        st.add("out.g", (dm,), scale=0.0)
        st.add("out.b", (dm,), scale=0.0)
        st.add("out.w", (dm, d))
        st.add("out.bias", (d,), scale=0.0)
        return st

    def forward(self, z_t: Tensor, t: np.ndarray, cond_idx: np.ndarray,
                mask: np.ndarray, self_cond: Tensor | None = None) -> Tensor:
        """Predict the clean latents; cond_idx uses NULL_CONDITION for the
        unconditional path. Shapes: z_t (B, N, d), t (B,), mask (B, N)."""
        st, cfg = self.store, self.config
        b, n, d = z_t.shape
        if self_cond is None:
            self_cond = Tensor(np.zeros((b, n, d)))
        from .nncore import concat

        x = concat([z_t, self_cond], axis=-1)
        h = linear(x, st["in.w"], st["in.b"])
        t_feat = Tensor(time_embedding(t, cfg.time_features))
        cond = silu_mlp(t_feat, st["time.w1"], st["time.b1"],
                        st["time.w2"], st["time.b2"])
        cond = cond + st["group_emb"][np.asarray(cond_idx, dtype=np.int64)]
        mask_f = Tensor(mask[:, :, None].astype(np.float64))
        for i in range(cfg.n_layers):
            p = f"block{i}"
            a = adaln(h, cond, st[f"{p}.ln1.w"], st[f"{p}.ln1.b"])
            h = h + mhsa(a, st[f"{p}.wq"], st[f"{p}.wk"], st[f"{p}.wv"],
                         st[f"{p}.wo"], cfg.n_heads, mask)
            a = adaln(h, cond, st[f"{p}.ln2.w"], st[f"{p}.ln2.b"])
            h = h + silu_mlp(a, st[f"{p}.ff1.w"], st[f"{p}.ff1.b"],
                             st[f"{p}.ff2.w"], st[f"{p}.ff2.b"])
            h = h * mask_f
        from .nncore import layer_norm

        h = layer_norm(h, st["out.g"] + 1.0, st["out.b"])
        out = linear(h, st["out.w"], st["out.bias"])
        return out * mask_f

    def save(self, path, seed: int | None = None) -> str:
        cfg = self.config.to_dict()
        cfg["ae_checkpoint_hash"] = self.ae_checkpoint_hash
        return self.store.save(path, config=cfg, seed=seed)

    @classmethod
    def load(cls, path) -> "Denoiser":
        store, manifest = ParameterStore.load(path)
        cfg_dict = dict(manifest.get("config", {}))
        ae_hash = cfg_dict.pop("ae_checkpoint_hash", None)
        return cls(DenoiserConfig(**cfg_dict), store=store,
                   ae_checkpoint_hash=ae_hash)


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


def train_step(denoiser: Denoiser, z1: np.ndarray, groups: np.ndarray,
               mask: np.ndarray, rng: np.random.Generator,
               update: bool = True) -> float:
    """One optimization step of clean-sample regression.

    Draws noise and a uniform time, interpolates, applies the 50%
    self-conditioning coin (first prediction gradient-detached) and the
    condition-dropout coin, then regresses the masked MSE to z1.
    """
    cfg = denoiser.config
    b, n, d = z1.shape
    z0 = rng.standard_normal(z1.shape)
    t = rng.uniform(0.0, 1.0, size=b)
    z_t = (1.0 - t)[:, None, None] * z0 + t[:, None, None] * z1

    cond_idx = groups.astype(np.int64) - 1
    drop = rng.uniform(size=b) < cfg.cond_drop
    cond_idx = np.where(drop, NULL_CONDITION, cond_idx)

    self_cond = None
    if rng.uniform() < cfg.self_cond_prob:
        with no_grad():
            first = denoiser.forward(Tensor(z_t), t, cond_idx, mask)
        self_cond = Tensor(first.data.copy())

    denoiser.store.zero_grad()
    pred = denoiser.forward(Tensor(z_t), t, cond_idx, mask, self_cond)
    diff = pred - Tensor(z1)
    m = Tensor(mask[:, :, None].astype(np.float64))
    denom = max(float(mask.sum()) * d, 1.0)
    loss = (diff * diff * m).sum() / denom
    if update:
        loss.backward()
        adam_step(denoiser.store, lr=cfg.lr, warmup=cfg.warmup)
    return loss.item()


def train_denoiser(
    latents: list[np.ndarray],
    groups: np.ndarray,
    config: DenoiserConfig,
    ae_checkpoint_hash: str | None = None,
    max_steps: int | None = None,
    log_every: int = 50,
    denoiser: Denoiser | None = None,
) -> tuple[Denoiser, list[dict]]:
    """Train on encoder outputs (one (N_i, d) array per crystal).

    Per-step randomness derives from (seed, step); resuming a loaded
    denoiser continues the exact same sequence.
    """
    if denoiser is None:
        denoiser = Denoiser(config, ae_checkpoint_hash=ae_checkpoint_hash)
    history = []
    n_data = len(latents)
    budget = max_steps if max_steps is not None else config.epochs * max(
        1, n_data // config.batch_size)
    while denoiser.store.step_count < budget:
        step = denoiser.store.step_count + 1
        rng = np.random.default_rng((config.seed, step))
        take = min(config.batch_size, n_data)
        idx = rng.choice(n_data, size=take, replace=False)
        z1, mask = _pad_latents([latents[i] for i in idx], config.d_latent)
        loss = train_step(denoiser, z1, groups[idx], mask, rng)
        if step % log_every == 0 or step == budget:
            history.append({"step": step, "loss": loss})
    return denoiser, history


def _pad_latents(per_crystal: list[np.ndarray], d: int
                 ) -> tuple[np.ndarray, np.ndarray]:
    b = len(per_crystal)
    n = max(z.shape[0] for z in per_crystal)
    z1 = np.zeros((b, n, d))
    mask = np.zeros((b, n), dtype=bool)
    for i, z in enumerate(per_crystal):
        z1[i, : z.shape[0]] = z
        mask[i, : z.shape[0]] = True
    return z1, mask


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


@dataclass
class SamplerConfig:
    steps: int = 1000
    cfg_scale: float = 2.0
    seed: int = 0
    condition: bool = True     # space-group conditioning on/off (ablation)
    max_attempts: int = 8

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("sampler needs at least one integration step")


@dataclass
class SampleStats:
    requested: int = 0
    decode_rejections: int = 0
    lattice_clamps: int = 0
    failures: int = 0


def euler_trajectory(denoiser: Denoiser, z: np.ndarray, group: int,
                     cfg: SamplerConfig, mask: np.ndarray) -> np.ndarray:
    """Integrate d z / d t = (z_pred - z) / (1 - t) over T uniform steps.

    t runs over {0, dt, ..., 1 - dt}; the last step lands exactly on the
    prediction, so the 1/(1 - t) singularity at t = 1 is never evaluated.
    Self-conditioning feeds the previous combined prediction.
    """
    t_steps = cfg.steps
    dt = 1.0 / t_steps
    b = z.shape[0]
    cond = np.full(b, group - 1, dtype=np.int64)
    uncond = np.full(b, NULL_CONDITION, dtype=np.int64)
    prev = np.zeros_like(z)
    for k in range(t_steps):
        t = k * dt
        tv = np.full(b, t)
        with no_grad():
            if cfg.condition and cfg.cfg_scale != 1.0:
                pred_c = denoiser.forward(
                    Tensor(z), tv, cond, mask, Tensor(prev)).data
                pred_u = denoiser.forward(
                    Tensor(z), tv, uncond, mask, Tensor(prev)).data
                combined = (1.0 - cfg.cfg_scale) * pred_u + cfg.cfg_scale * pred_c
            elif cfg.condition:
                combined = denoiser.forward(
                    Tensor(z), tv, cond, mask, Tensor(prev)).data
            else:
                combined = denoiser.forward(
                    Tensor(z), tv, uncond, mask, Tensor(prev)).data
        z = z + dt * (combined - z) / (1.0 - t)
        prev = combined
    return z


def sample(
    priors: EmpiricalPriors,
    sampler_cfg: SamplerConfig,
    denoiser: Denoiser,
    autoencoder: Autoencoder,
    count: int,
    decode_mode: str = "sample",
) -> tuple[list[CrystalASU], SampleStats]:
    """Draw crystals: (G, O) from the priors, latents from the flow, the
    asymmetric unit from the decoder. Decode failures are resampled with a
    fresh latent draw and counted."""
    rng = np.random.default_rng(sampler_cfg.seed)
    d = denoiser.config.d_latent
    stats = SampleStats(requested=count)
    counters: dict = {}
    out: list[CrystalASU] = []
    for _ in range(count):
        produced = None
        for _attempt in range(sampler_cfg.max_attempts):
            group = priors.sample_group(rng)
            n_orbits = priors.sample_orbits(group, rng)
            z0 = rng.standard_normal((1, n_orbits, d))
            mask = np.ones((1, n_orbits), dtype=bool)
            z1 = euler_trajectory(denoiser, z0, group, sampler_cfg, mask)
            latent = LatentBatch(z=z1, mask=mask,
                                 groups=np.array([group], dtype=np.int64))
            try:
                _, asus = autoencoder.decode(latent, mode=decode_mode,
                                             rng=rng, counters=counters)
            except DecodeError:
                stats.decode_rejections += 1
                continue
            produced = asus[0]
            break
        if produced is None:
            stats.failures += 1
        else:
            out.append(produced)
    stats.lattice_clamps = counters.get("lattice_clamps", 0)
    return out, stats
