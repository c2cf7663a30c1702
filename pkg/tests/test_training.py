import numpy as np
import os
import shutil
import tempfile
import unittest
from pathlib import Path
import geomdiff as gd
from geomdiff.cli.pipelines import score_from_checkpoint

SLOW = os.environ.get('GEOMDIFF_SLOW')


def make_model(architecture='biattention', kind='precond_K', kernel=None, mean=None, dim=1, seed=0, depth=1,
               width=16):
    schedule = gd.DiffusionSchedule()
    network = gd.build_network(gd.NetworkConfig(architecture=architecture, depth=depth, width=width, heads=2,
                                                x_dim=dim, y_dim=dim, seed=seed))
    kernel = gd.WhiteKernel() if kernel is None else kernel
    mean = gd.ZeroMean(dim) if mean is None else mean
    return gd.NetworkScore(network, gd.Parametrization(kind, schedule), kernel, mean, schedule)


class TestTraining(unittest.TestCase):
    def setUp(self):
        self.test_dir = tempfile.mkdtemp()
        spec = gd.datasets.DatasetSpec(task='se', n_train=32, n_test=8, n_points=16, seed=1)
        self.train, self.test = gd.datasets.generate(spec).split(32)

    def tearDown(self):
        shutil.rmtree(self.test_dir)

    def test_training_lowers_heldout_loss(self):
        model = make_model()
        before = gd.evaluate_dsm_loss(model, self.test, num_batches=5, batch_size=16, seed=3)
        config = gd.TrainConfig(steps=200, batch_size=16, warmup_steps=20, peak_lr=3e-3, ema_decay=0.9)
        model, trace = gd.train_dsm(model, self.train, model.schedule, model.parametrization, config)
        after = gd.evaluate_dsm_loss(model, self.test, num_batches=5, batch_size=16, seed=3)
        self.assertEqual(trace.shape, (200,))
        self.assertTrue(np.all(np.isfinite(trace)))
        self.assertLess(after, before)

    def test_training_is_deterministic(self):
        config = gd.TrainConfig(steps=5, batch_size=4, warmup_steps=2)
        traces = []
        for _ in range(2):
            model = make_model(kind='predict_Y0')
            traces.append(gd.train_dsm(model, self.train, model.schedule, model.parametrization, config)[1])
        self.assertTrue(np.array_equal(traces[0], traces[1]))

    def test_checkpoint_round_trip(self):
        model = make_model(architecture='mlp', kind='precond_ST', kernel=gd.SquaredExponentialKernel(1.0, 0.25))
        config = gd.TrainConfig(steps=3, batch_size=4, warmup_steps=1)
        model, _ = gd.train_dsm(model, self.train, model.schedule, model.parametrization, config)
        header = dict(network=model.network.config.to_dict(), parametrization='precond_ST',
                      kernel=model.kernel.to_spec().to_dict(), mean=model.mean.to_spec().to_dict(),
                      schedule=model.schedule.to_dict())
        path = gd.save_checkpoint(Path(self.test_dir) / 'model.npz', model.network, header)
        stored_header, state = gd.load_checkpoint(path)
        self.assertEqual(stored_header['parametrization'], 'precond_ST')
        self.assertEqual(set(state), set(model.network.state_dict()))
        rebuilt, _ = score_from_checkpoint(path)
        X, Y = self.test[0]
        self.assertTrue(np.allclose(rebuilt(0.4, X, Y), model(0.4, X, Y)))

    def test_errors(self):
        model = make_model()
        empty = gd.datasets.Dataset(np.zeros((0, 4, 1)), np.zeros((0, 4, 1)), [])
        with self.assertRaises(ValueError):
            gd.train_dsm(model, empty, model.schedule, model.parametrization, gd.TrainConfig(steps=2))
        with self.assertRaises(ValueError):
            gd.TrainConfig(steps=0)
        with self.assertRaises(ValueError):
            gd.TrainConfig(ema_decay=1.5)
        self.assertEqual(gd.TrainConfig.from_dict(dict(steps=7, unknown=1)).steps, 7)


@unittest.skipUnless(SLOW, "set GEOMDIFF_SLOW=1 to run the long training targets")
class TestTrainingTargets(unittest.TestCase):
    def test_scalar_model_beats_diagonal_gp(self):
        spec = gd.datasets.DatasetSpec(task='se', n_train=2048, n_test=16, n_points=60, seed=0)
        train, test = gd.datasets.generate(spec).split(2048)
        model = make_model(depth=3, width=64)
        config = gd.TrainConfig(steps=10000, batch_size=32, warmup_steps=500)
        model, trace = gd.train_dsm(model, train, model.schedule, model.parametrization, config)
        self.assertLess(trace[-200:].mean(), 0.5 * trace[:10].mean())
        kernel, mean = gd.datasets.task_model('se')
        rng = gd.RngStream(5)
        gains = []
        for p in range(len(test)):
            (X_c, Y_c), (X_t, Y_t) = gd.datasets.split_context_target(test.X[p], test.Y[p], (3, 3), 10, rng)
            model_tll = gd.conditional_log_likelihood(model, model.kernel, model.mean, X_c, Y_c, X_t, Y_t, rng=rng)
            baseline = gd.gp_condition(kernel, mean, X_c, Y_c, X_t, spec.noise_var).diagonal()
            noisy = gd.GpPosterior(baseline.mean, baseline.covariance + spec.noise_var * np.eye(len(X_t)), 3,
                                   len(X_t))
            gains.append((model_tll - noisy.logpdf(Y_t)) / len(X_t))
        self.assertGreater(np.mean(gains), 0.2)

    def test_equivariant_model_is_data_efficient(self):
        kernel = gd.DiagonalKernel(gd.WhiteKernel(), output_dim=2)
        wins = 0
        for seed in range(3):
            spec = gd.datasets.DatasetSpec(task='vec_divfree', n_train=64, n_test=16, grid_num=12, seed=seed)
            train, test = gd.datasets.generate(spec).split(64)
            losses = {}
            for architecture in ('egnn_equivariant', 'biattention'):
                model = make_model(architecture, kernel=kernel, dim=2, seed=seed, depth=2, width=32)
                config = gd.TrainConfig(steps=2000, batch_size=16, warmup_steps=100, seed=seed)
                model, _ = gd.train_dsm(model, train, model.schedule, model.parametrization, config)
                losses[architecture] = gd.evaluate_dsm_loss(model, test, batch_size=16, seed=seed)
            wins += losses['egnn_equivariant'] < losses['biattention']
        self.assertEqual(wins, 3)


if __name__ == '__main__':
    unittest.main()
