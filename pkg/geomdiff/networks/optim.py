import numpy as np


class WarmupCosineSchedule(object):
    '''Linear warmup from `init_lr` to `peak_lr`, then cosine decay to `floor_lr` at `total_steps`.'''

    def __init__(self, total_steps, warmup_steps=1000, init_lr=1e-5, peak_lr=1e-3, floor_lr=1e-5):
        self.total_steps = int(total_steps)
        self.warmup_steps = int(min(warmup_steps, total_steps))
        self.init_lr = init_lr
        self.peak_lr = peak_lr
        self.floor_lr = floor_lr

    def __call__(self, step):
        if step < self.warmup_steps:
            return self.init_lr + (self.peak_lr - self.init_lr) * step / max(self.warmup_steps, 1)
        decay_steps = max(self.total_steps - self.warmup_steps, 1)
        progress = min((step - self.warmup_steps) / decay_steps, 1.0)
        return self.floor_lr + 0.5 * (self.peak_lr - self.floor_lr) * (1 + np.cos(np.pi * progress))


def global_grad_norm(parameters):
    return float(np.sqrt(sum(np.sum(p.grad ** 2) for p in parameters if p.grad is not None)))


def clip_grad_norm(parameters, max_norm):
    '''Rescales gradients in place so their global norm is at most `max_norm`; returns the norm before.'''
    norm = global_grad_norm(parameters)
    if max_norm is not None and norm > max_norm:
        scale = max_norm / (norm + 1e-12)
        for p in parameters:
            if p.grad is not None:
                p.grad = p.grad * scale
    return norm


class Adam(object):
    def __init__(self, parameters, lr=1e-3, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.0):
        self.parameters = list(parameters)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self.first = [np.zeros_like(p.value) for p in self.parameters]
        self.second = [np.zeros_like(p.value) for p in self.parameters]

    def zero_grad(self):
        for p in self.parameters:
            p.zero_grad()

    def step(self, lr=None):
        lr = self.lr if lr is None else lr
        self.step_count += 1
        c1 = 1 - self.beta1 ** self.step_count
        c2 = 1 - self.beta2 ** self.step_count
        for p, m, v in zip(self.parameters, self.first, self.second):
            grad = np.zeros_like(p.value) if p.grad is None else p.grad
            if self.weight_decay:
                grad = grad + self.weight_decay * p.value
            m *= self.beta1
            m += (1 - self.beta1) * grad
            v *= self.beta2
            v += (1 - self.beta2) * grad ** 2
            p.value = p.value - lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class ExponentialMovingAverage(object):
    '''Shadow copy of a module's parameters, updated as shadow ← decay·shadow + (1 − decay)·value.'''

    def __init__(self, module, decay=0.99):
        if not 0 < decay < 1:
            raise ValueError("EMA decay must lie in (0, 1)")
        self.module = module
        self.decay = decay
        self.shadow = module.state_dict()

    def update(self):
        for name, p in self.module.named_parameters():
            self.shadow[name] = self.decay * self.shadow[name] + (1 - self.decay) * p.value

    def copy_to(self, module=None):
        (self.module if module is None else module).load_state_dict(self.shadow)
