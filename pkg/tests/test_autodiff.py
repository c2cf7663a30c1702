import numpy as np
import unittest
import geomdiff as gd
from geomdiff.networks import autodiff as ad
from geomdiff.networks.optim import global_grad_norm


class TestAutodiff(unittest.TestCase):
    def setUp(self):
        self.rng = gd.RngStream(7)
        self.a = gd.Parameter(self.rng.normal(size=(3, 4)))
        self.b = gd.Parameter(self.rng.normal(size=(4, 2)))
        self.c = gd.Parameter(self.rng.uniform(0.5, 2.0, size=(3, 1)))

    def test_elementwise_gradients(self):
        a, c = self.a, self.c
        cases = [
            lambda: (a * c + a / c - 2 * a).sum(),
            lambda: (a.exp() * a.tanh()).mean(),
            lambda: (c.log() + c.sqrt() + c ** 3).sum(),
            lambda: (a.silu() + a.sigmoid() + a.square()).sum(),
            lambda: (-a + 1.0 - c).sum(),
        ]
        for function in cases:
            self.assertLess(gd.grad_check(function, [a, c]), 1e-6)

    def test_structural_gradients(self):
        a, b, c = self.a, self.b, self.c
        cases = [
            lambda: ((a @ b) ** 2).sum(),
            lambda: (a.reshape(4, 3).transpose() * a).sum(),
            lambda: (a[1:, ::2] * 3.0).sum(),
            lambda: ad.concatenate([a, c], axis=-1).square().sum(),
            lambda: (ad.softmax(a, axis=-1) * np.arange(4.0)).sum(),
            lambda: (ad.broadcast_to(c, (3, 4)) * a).sum(axis=0).square().sum(),
            lambda: ad.swapaxes(a.reshape(1, 3, 4), 1, 2).mean(axis=(0, 1), keepdims=True).square().sum(),
        ]
        for function in cases:
            self.assertLess(gd.grad_check(function, [a, b, c]), 1e-6)

    def test_array_on_left(self):
        out = np.ones((3, 4)) * self.a
        self.assertIsInstance(out, gd.Tensor)
        out = np.eye(3) @ self.a
        self.assertTrue(np.allclose(out.value, self.a.value))

    def test_accumulation_and_errors(self):
        self.a.zero_grad()
        (self.a + self.a).sum().backward()
        self.assertTrue(np.allclose(self.a.grad, 2.0))
        self.assertEqual(ad.unbroadcast(np.ones((5, 3, 4)), (1, 4)).tolist(), [[15.0] * 4])
        with self.assertRaises(ValueError):
            ad.matmul(self.a, gd.Parameter(np.ones(4)))

    def test_layers(self):
        linear = gd.Linear(4, 3, self.rng)
        x = self.rng.normal(size=(5, 4))
        self.assertTrue(np.allclose(linear(x).value, x @ linear.weight.value + linear.bias.value))
        mlp = gd.MLP([4, 8, 2], self.rng)
        self.assertEqual(mlp(x).shape, (5, 2))
        self.assertEqual(mlp.num_parameters(), 4 * 8 + 8 + 8 * 2 + 2)
        self.assertLess(gd.grad_check(lambda: mlp(x).square().sum(), mlp.parameters(), rng=self.rng), 1e-6)
        with self.assertRaises(ValueError):
            gd.MLP([4], self.rng)
        attention = gd.MultiHeadAttention(8, 2, self.rng)
        h = self.rng.normal(size=(2, 5, 8))
        out = attention(h).value
        permutation = self.rng.permutation(5)
        self.assertTrue(np.allclose(attention(h[:, permutation]).value, out[:, permutation]))
        self.assertLess(gd.grad_check(lambda: attention(h).square().mean(), attention.parameters(), rng=self.rng),
                        1e-6)
        with self.assertRaises(ValueError):
            gd.MultiHeadAttention(8, 3, self.rng)

    def test_state_dict(self):
        mlp = gd.MLP([2, 4, 1], self.rng)
        state = mlp.state_dict()
        other = gd.MLP([2, 4, 1], gd.RngStream(99))
        other.load_state_dict(state)
        x = self.rng.normal(size=(3, 2))
        self.assertTrue(np.allclose(other(x).value, mlp(x).value))
        with self.assertRaises(KeyError):
            other.load_state_dict({})
        state['layers.0.weight'] = np.ones((3, 3))
        with self.assertRaises(ValueError):
            other.load_state_dict(state)

    def test_embedding(self):
        emb = gd.sinusoidal_embedding(np.array([0.0, 0.5]), 5)
        self.assertEqual(emb.shape, (2, 5))
        self.assertTrue(np.allclose(emb[0], [0, 0, 1, 1, 0]))


class TestOptim(unittest.TestCase):
    def test_warmup_cosine(self):
        schedule = gd.WarmupCosineSchedule(100, warmup_steps=10, init_lr=1e-5, peak_lr=1e-3, floor_lr=1e-4)
        self.assertAlmostEqual(schedule(0), 1e-5)
        self.assertAlmostEqual(schedule(10), 1e-3)
        self.assertAlmostEqual(schedule(100), 1e-4)
        values = [schedule(s) for s in range(10, 101)]
        self.assertTrue(all(x >= y for x, y in zip(values, values[1:])))

    def test_clip_and_adam(self):
        p = gd.Parameter(np.array([3.0, -4.0]))
        p.grad = np.array([3.0, 4.0])
        self.assertAlmostEqual(gd.clip_grad_norm([p], 1.0), 5.0)
        self.assertAlmostEqual(global_grad_norm([p]), 1.0, places=6)
        optimizer = gd.Adam([p], lr=0.1)
        for _ in range(500):
            optimizer.zero_grad()
            (p * p).sum().backward()
            optimizer.step()
        self.assertLess(np.max(np.abs(p.value)), 0.1)

    def test_ema(self):
        module = gd.Linear(2, 1, gd.RngStream(0))
        ema = gd.ExponentialMovingAverage(module, decay=0.5)
        start = module.weight.value.copy()
        module.weight.value = start + 2.0
        ema.update()
        ema.copy_to()
        self.assertTrue(np.allclose(module.weight.value, start + 1.0))
        with self.assertRaises(ValueError):
            gd.ExponentialMovingAverage(module, decay=1.0)


if __name__ == '__main__':
    unittest.main()
