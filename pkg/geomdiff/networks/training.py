from dataclasses import dataclass, asdict
import logging
import numpy as np
from tqdm import tqdm

from ..exceptions import NumericalError
from ..numcore import RngStream, cholesky_with_jitter
from ..scores.parametrization import wrap_network, dsm_loss
from .optim import Adam, WarmupCosineSchedule, ExponentialMovingAverage, clip_grad_norm

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    steps: int = 2000
    batch_size: int = 32
    warmup_steps: int = 100
    init_lr: float = 1e-5
    peak_lr: float = 1e-3
    floor_lr: float = 1e-5
    ema_decay: float = 0.99
    clip_norm: float = 1.0
    weight_decay: float = 0.0
    t_floor: float = 1e-5
    seed: int = 0
    progress: bool = False

    def __post_init__(self):
        if self.steps < 1 or self.batch_size < 1 or self.warmup_steps < 0:
            raise ValueError("steps and batch_size must be positive, warmup_steps non-negative")
        if not 0 < self.ema_decay < 1:
            raise ValueError("ema_decay must lie in (0, 1)")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


def draw_dsm_batch(model, dataset, rng, batch_size, t_floor=1e-5):
    '''Draws paths, diffusion times and noise, and forms Y_t = m_{t|0} + σ S z per path.'''
    schedule = model.schedule
    index = rng.integers(0, len(dataset), size=batch_size)
    X = dataset.X[index]
    Y0 = dataset.Y[index].reshape(batch_size, -1)
    means = np.stack([model.mean(x).reshape(-1) for x in X])
    lowers = np.stack([cholesky_with_jitter(model.kernel.gram(x)).lower for x in X])
    t = rng.uniform(t_floor, schedule.T, size=batch_size)
    z = rng.normal(size=Y0.shape)
    sigma = schedule.sigma(t)
    decay = schedule.decay(t)[:, None]
    Y_t = decay * Y0 + (1 - decay) * means + sigma[:, None] * np.einsum('bij,bj->bi', lowers, z)
    return dict(X=X, Y0=Y0, t=t, z=z, sigma=sigma, lower=lowers, Y_t=Y_t)


def dsm_batch_loss(model, batch):
    '''Per-path DSM losses of a drawn batch as a Tensor of shape (B,).'''
    shape = batch['X'].shape[:2] + (-1,)
    F = model.network(batch['t'], batch['X'], batch['Y_t'].reshape(shape)).reshape(batch['Y_t'].shape)
    D = wrap_network(model.parametrization, F, batch['t'], batch['Y_t'])
    return dsm_loss(model.parametrization, D, batch['Y0'], batch['z'], batch['sigma'], batch['lower'])


def train_dsm(model, dataset, schedule, param, train_config):
    '''Trains a NetworkScore by denoising score matching.

    Parameters
    ----------
    model: NetworkScore
        Network, kernel and mean to train; schedule and parametrization are replaced by the
        arguments
    dataset: Dataset
        Paths with X of shape (P, n, dx) and Y of shape (P, n, dy)
    schedule: DiffusionSchedule
    param: Parametrization
    train_config: TrainConfig

    Returns
    -------
    model: NetworkScore
        Same object, holding the EMA weights
    loss_trace: np.array
        Minibatch loss at every step
    '''
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    model.schedule = schedule
    model.parametrization = param
    parameters = model.network.parameters()
    optimizer = Adam(parameters, lr=train_config.peak_lr, weight_decay=train_config.weight_decay)
    lr_schedule = WarmupCosineSchedule(train_config.steps, train_config.warmup_steps, train_config.init_lr,
                                       train_config.peak_lr, train_config.floor_lr)
    ema = ExponentialMovingAverage(model.network, train_config.ema_decay)
    rng = RngStream(train_config.seed)
    loss_trace = np.zeros(train_config.steps)
    logger.info("training %s (%d parameters) with %s for %d steps", model.network.architecture_name,
                model.network.num_parameters(), param.kind, train_config.steps)
    with tqdm(total=train_config.steps, desc="dsm", leave=False, disable=not train_config.progress) as pbar:
        for step in range(train_config.steps):
            batch = draw_dsm_batch(model, dataset, rng, train_config.batch_size, train_config.t_floor)
            loss = dsm_batch_loss(model, batch).mean()
            value = float(loss.value)
            if not np.isfinite(value):
                raise NumericalError("DSM loss is not finite at step " + str(step) + " (t in [" +
                                     str(batch['t'].min()) + ", " + str(batch['t'].max()) + "], " +
                                     param.kind + ")")
            optimizer.zero_grad()
            loss.backward()
            clip_grad_norm(parameters, train_config.clip_norm)
            optimizer.step(lr_schedule(step))
            ema.update()
            loss_trace[step] = value
            if step % 10 == 0:
                pbar.set_postfix({"loss": value})
            pbar.update(1)
    ema.copy_to()
    logger.info("training finished: first loss %.4f, last loss %.4f", loss_trace[0], loss_trace[-1])
    return model, loss_trace


def evaluate_dsm_loss(model, dataset, num_batches=10, batch_size=32, seed=0, t_floor=1e-5):
    '''Mean DSM loss over fixed-seed batches of a held-out dataset.'''
    rng = RngStream(seed)
    losses = [float(dsm_batch_loss(model, draw_dsm_batch(model, dataset, rng, batch_size, t_floor)).mean().value)
              for _ in range(num_batches)]
    return float(np.mean(losses))
