"""Adversarial adaptation of target-project metrics toward the source project.

Source vectors play the "real" data. Target vectors are the generator's
input, so after training ``G(target)`` should be distributed like the
source and a classifier fit on source labels can score it. The
discriminator maximizes

    V(D, G) = E_source[log D(x)] + E_target[log(1 - D(G(z)))]

and the generator minimizes it (or, optionally, uses the non-saturating
surrogate -E[log D(G(z))]).

The generator objective also carries a displacement-consistency penalty,
``displacement_weight * mean((d - mean_batch(d))**2)`` with
``d = G(z) - z``. A pure translation of the target costs nothing; folding
or permuting the target cloud does, so target clusters cannot swap places
while the marginals are being matched. Weight 0 gives the bare minimax game.
"""

import csv
import enum
from dataclasses import dataclass, field

import numpy as np

from . import metrics, nn
from .dataset import DatasetError
from .optim import AdamState, adam_step, chunk, permutation

EVAL_SAMPLE = 256


class LossVariant(enum.Enum):
    MINIMAX = "minimax"
    NON_SATURATING = "non-saturating"


@dataclass(frozen=True)
class AdamConfig:
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    eps_stab: float = 1e-8


@dataclass(frozen=True)
class GanConfig:
    epochs: int = 100
    batch_size: int = 32
    d_steps_per_g_step: int = 1
    loss_variant: LossVariant = LossVariant.MINIMAX
    optimizer: AdamConfig = field(default_factory=AdamConfig)
    output_clamp_eps: float = 1e-7
    seed: int = 0
    hidden_dims: tuple = (64, 64, 64)
    generator_output: nn.Activation = nn.Activation.IDENTITY
    record_mmd: bool | None = None  # None: only when F <= 200
    displacement_weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "loss_variant", LossVariant(self.loss_variant))
        object.__setattr__(self, "generator_output", nn.Activation.parse(self.generator_output))
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        if isinstance(self.optimizer, dict):
            object.__setattr__(self, "optimizer", AdamConfig(**self.optimizer))
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1 or self.d_steps_per_g_step < 1:
            raise ValueError("batch_size and d_steps_per_g_step must be >= 1")
        if self.displacement_weight < 0:
            raise ValueError("displacement_weight must be >= 0")
        if not 0 < self.output_clamp_eps < 0.1:
            raise ValueError("output_clamp_eps must lie in (0, 0.1)")

    def to_dict(self):
        return {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "d_steps_per_g_step": self.d_steps_per_g_step,
            "loss_variant": self.loss_variant.value,
            "optimizer": {
                "lr": self.optimizer.lr,
                "beta1": self.optimizer.beta1,
                "beta2": self.optimizer.beta2,
                "eps_stab": self.optimizer.eps_stab,
            },
            "output_clamp_eps": self.output_clamp_eps,
            "seed": self.seed,
            "hidden_dims": list(self.hidden_dims),
            "generator_output": self.generator_output.value,
            "record_mmd": self.record_mmd,
            "displacement_weight": self.displacement_weight,
        }


@dataclass
class GanModel:
    generator: nn.Mlp
    discriminator: nn.Mlp

    def __post_init__(self):
        f = self.generator.in_dim
        if self.generator.out_dim != f or self.discriminator.in_dim != f:
            raise nn.ShapeError("generator must map F -> F and discriminator must read F")
        if (self.discriminator.out_dim != 1
                or self.discriminator.layers[-1].activation is not nn.Activation.SIGMOID):
            raise nn.ShapeError("discriminator needs a single sigmoid output")

    @property
    def n_features(self):
        return self.generator.in_dim

    def copy(self):
        return GanModel(self.generator.copy(), self.discriminator.copy())

    def equals(self, other):
        return self.generator.equals(other.generator) and self.discriminator.equals(other.discriminator)

    def to_dict(self):
        return {"generator": self.generator.to_dict(),
                "discriminator": self.discriminator.to_dict()}

    @classmethod
    def from_dict(cls, data):
        return cls(nn.Mlp.from_dict(data["generator"]), nn.Mlp.from_dict(data["discriminator"]))


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    d_loss: float
    g_loss: float
    d_accuracy: float
    mmd: float | None = None


@dataclass
class TrainingTrace:
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "d_loss", "g_loss", "d_accuracy", "mmd"])
            for r in self.records:
                w.writerow([r.epoch, repr(r.d_loss), repr(r.g_loss), repr(r.d_accuracy),
                            "" if r.mmd is None else repr(r.mmd)])


def build(f, hidden_dims=(64, 64, 64), seed=0, generator_output=nn.Activation.IDENTITY):
    if f < 1:
        raise ValueError("feature count must be >= 1")
    hidden = [int(h) for h in hidden_dims]
    relu = [nn.Activation.RELU] * len(hidden)
    g_seed, d_seed = np.random.SeedSequence(seed).generate_state(2)
    g = nn.init([f, *hidden, f], relu + [nn.Activation.parse(generator_output)], int(g_seed))
    d = nn.init([f, *hidden, 1], relu + [nn.Activation.SIGMOID], int(d_seed))
    return GanModel(g, d)


def _clamped(p, eps):
    p = np.asarray(p, dtype=np.float64)
    if p.size == 0:
        raise ValueError("empty batch")
    c = np.clip(p, eps, 1.0 - eps)
    inside = ((p > eps) & (p < 1.0 - eps)).astype(np.float64)
    return c, inside


def d_loss_and_grads(d_real, d_fake, clamp=1e-7):
    """Discriminator loss -(mean log D(x) + mean log(1 - D(G(z)))) and its
    gradients w.r.t. the two probability arrays."""
    r, r_in = _clamped(d_real, clamp)
    f, f_in = _clamped(d_fake, clamp)
    loss = -(np.mean(np.log(r)) + np.mean(np.log1p(-f)))
    g_real = -r_in / (r.size * r)
    g_fake = f_in / (f.size * (1.0 - f))
    return float(loss), g_real, g_fake


def d_loss(d_real, d_fake, clamp=1e-7):
    return d_loss_and_grads(d_real, d_fake, clamp)[0]


def g_loss_and_grad(d_fake, variant=LossVariant.MINIMAX, clamp=1e-7):
    f, f_in = _clamped(d_fake, clamp)
    if LossVariant(variant) is LossVariant.MINIMAX:
        loss = np.mean(np.log1p(-f))
        grad = -f_in / (f.size * (1.0 - f))
    else:
        loss = -np.mean(np.log(f))
        grad = -f_in / (f.size * f)
    return float(loss), grad


def g_loss(d_fake, variant=LossVariant.MINIMAX, clamp=1e-7):
    return g_loss_and_grad(d_fake, variant, clamp)[0]


def value(d_real, d_fake, clamp=1e-7):
    """V(D, G) as the discriminator sees it (the negated d_loss)."""
    return -d_loss(d_real, d_fake, clamp)


def discriminator_accuracy(model, real, z):
    """Fraction of correct real/fake calls at threshold 0.5 on a balanced pair of sets."""
    p_real = model.discriminator(real).ravel()
    p_fake = model.discriminator(model.generator(z)).ravel()
    correct = np.count_nonzero(p_real >= 0.5) + np.count_nonzero(p_fake < 0.5)
    return correct / (p_real.size + p_fake.size)


def _check_width(model, *datasets):
    for ds in datasets:
        if ds.n_features != model.n_features:
            raise DatasetError(f"dataset {ds.name!r} has {ds.n_features} features, "
                               f"model expects {model.n_features}")
        if ds.n_instances == 0:
            raise DatasetError(f"dataset {ds.name!r} is empty")


def d_loss_gradients(model, real, z, clamp=1e-7, wrt_generator=False):
    """Discriminator loss on (real, G(z)) with its gradient for D's parameters.

    With ``wrt_generator`` the gradient for G's parameters (through the
    fake branch) is returned as well, otherwise ``None``.
    """
    tr_g = nn.forward(model.generator, z)
    tr_real = nn.forward(model.discriminator, real)
    tr_fake = nn.forward(model.discriminator, tr_g.output)
    loss, g_real, g_fake = d_loss_and_grads(tr_real.output, tr_fake.output, clamp)
    grads_real, _ = nn.backward(model.discriminator, tr_real, g_real)
    grads_fake, into_g = nn.backward(model.discriminator, tr_fake, g_fake)
    g_grads = nn.backward(model.generator, tr_g, into_g)[0] if wrt_generator else None
    return loss, grads_real + grads_fake, g_grads


def displacement_penalty_and_grad(generated, z, weight):
    """weight * mean of squared batch-centered displacements, and d/d generated."""
    d = generated - z
    d = d - d.mean(axis=0)
    return float(weight * np.mean(d * d)), (2.0 * weight / d.size) * d


def g_loss_gradients(model, z, variant=LossVariant.MINIMAX, clamp=1e-7,
                     displacement_weight=0.0, wrt_discriminator=False):
    """Adversarial generator loss plus gradients of the full generator objective.

    The returned loss is the adversarial term alone; the G gradient also
    includes the displacement penalty. D's gradient of the adversarial term
    is returned only when ``wrt_discriminator`` is set.
    """
    tr_g = nn.forward(model.generator, z)
    tr_d = nn.forward(model.discriminator, tr_g.output)
    loss, upstream = g_loss_and_grad(tr_d.output, variant, clamp)
    d_grads, into_g = nn.backward(model.discriminator, tr_d, upstream)
    if displacement_weight:
        into_g = into_g + displacement_penalty_and_grad(tr_g.output, z, displacement_weight)[1]
    g_grads, _ = nn.backward(model.generator, tr_g, into_g)
    return loss, g_grads, (d_grads if wrt_discriminator else None)


def discriminator_step(model, d_state, real, z, clamp):
    loss, grads, _ = d_loss_gradients(model, real, z, clamp)
    d_new, d_state = adam_step(model.discriminator, grads, d_state)
    return GanModel(model.generator, d_new), d_state, loss


def generator_step(model, g_state, z, variant, clamp, displacement_weight=0.0):
    loss, grads, _ = g_loss_gradients(model, z, variant, clamp, displacement_weight)
    g_new, g_state = adam_step(model.generator, grads, g_state)
    return GanModel(g_new, model.discriminator), g_state, loss


def train(model, source, target, config):
    """Alternating minimax training; returns ``(trained_model, trace)``.

    Each epoch pairs min(n_source, n_target) source rows with as many target
    rows, both sides freshly shuffled, and walks them in minibatches. Source
    labels are never read.
    """
    _check_width(model, source, target)
    if config.epochs == 0:
        return model, TrainingTrace()

    s_seed, t_seed, e_seed = (int(s) for s in np.random.SeedSequence(config.seed).generate_state(3))
    xs, xt = source.features, target.features
    n1, n2 = xs.shape[0], xt.shape[0]
    m = min(n1, n2)
    opt = config.optimizer
    clamp = config.output_clamp_eps
    d_state = AdamState.fresh(model.discriminator, opt.lr, opt.beta1, opt.beta2, opt.eps_stab)
    g_state = AdamState.fresh(model.generator, opt.lr, opt.beta1, opt.beta2, opt.eps_stab)

    k_eval = min(m, EVAL_SAMPLE)
    real_eval = xs[permutation(n1, e_seed, 0)[:k_eval]]
    z_eval = xt[permutation(n2, e_seed, 1)[:k_eval]]
    record_mmd = config.record_mmd if config.record_mmd is not None else model.n_features <= 200
    bandwidth = metrics.median_bandwidth(real_eval, z_eval) if record_mmd else None

    model = model.copy()
    trace = TrainingTrace()
    for epoch in range(config.epochs):
        src_idx = permutation(n1, s_seed, epoch)[:m]
        tgt_idx = permutation(n2, t_seed, epoch)[:m]
        d_losses, g_losses = [], []
        for batch in chunk(np.arange(m), config.batch_size):
            real, z = xs[src_idx[batch]], xt[tgt_idx[batch]]
            for _ in range(config.d_steps_per_g_step):
                model, d_state, dl = discriminator_step(model, d_state, real, z, clamp)
                d_losses.append(dl)
            model, g_state, gl = generator_step(model, g_state, z, config.loss_variant, clamp,
                                                config.displacement_weight)
            g_losses.append(gl)
        mmd_value = None
        if record_mmd:
            mmd_value = metrics.mmd(model.generator(z_eval), real_eval, bandwidth)
        trace.records.append(EpochRecord(
            epoch=epoch + 1,
            d_loss=float(np.mean(d_losses)),
            g_loss=float(np.mean(g_losses)),
            d_accuracy=float(discriminator_accuracy(model, real_eval, z_eval)),
            mmd=mmd_value,
        ))
    return model, trace


def transform(model, target):
    """Replace every target vector with its generator image; ids and labels are kept."""
    if target.n_features != model.n_features:
        raise DatasetError(f"dataset {target.name!r} has {target.n_features} features, "
                           f"model expects {model.n_features}")
    if target.n_instances == 0:
        return target
    return target.with_features(model.generator(target.features))
