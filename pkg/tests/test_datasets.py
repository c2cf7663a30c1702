import numpy as np
import shutil
import tempfile
import unittest
from pathlib import Path
import geomdiff as gd
from geomdiff import datasets

DISK_GRID_POINTS = 648


class TestDatasets(unittest.TestCase):
    def setUp(self):
        self.test_dir = tempfile.mkdtemp()
        self.rng = gd.RngStream(31)

    def tearDown(self):
        shutil.rmtree(self.test_dir)

    def test_disk_grid(self):
        grid = datasets.disk_grid()
        self.assertEqual(grid.shape, (DISK_GRID_POINTS, 2))
        self.assertTrue(np.all(np.sum(grid ** 2, axis=1) <= 100.0))
        self.assertEqual(len(np.unique(grid, axis=0)), DISK_GRID_POINTS)

    def test_generate_scalar_tasks(self):
        for task in datasets.SCALAR_TASKS:
            spec = datasets.DatasetSpec(task=task, n_train=6, n_test=2, n_points=12, seed=1)
            dataset = datasets.generate(spec)
            self.assertEqual(dataset.X.shape, (8, 12, 1))
            self.assertEqual(dataset.Y.shape, (8, 12, 1))
            self.assertTrue(np.all((dataset.X >= -2) & (dataset.X <= 2)))
            self.assertEqual(len(dataset.tasks), 8)
        sawtooth = datasets.generate(datasets.DatasetSpec(task='sawtooth', n_train=20, n_points=30))
        self.assertTrue(np.all((sawtooth.Y >= 0) & (sawtooth.Y < 1)))
        mixture = datasets.generate(datasets.DatasetSpec(task='mixture', n_train=40, n_test=0))
        self.assertTrue(set(mixture.tasks) <= set(datasets.MIXTURE_COMPONENTS))
        self.assertGreater(len(set(mixture.tasks)), 1)

    def test_generate_vector_tasks(self):
        for task in datasets.VECTOR_TASKS:
            spec = datasets.DatasetSpec(task=task, n_train=3, n_test=1, grid_num=8)
            self.assertEqual(spec.inputs, 'grid')
            self.assertEqual(spec.noise_var, 0.0)
            dataset = datasets.generate(spec)
            grid = datasets.disk_grid(8)
            self.assertEqual(dataset.Y.shape, (4, len(grid), 2))
            self.assertTrue(np.allclose(dataset.X[2], grid))
        scattered = datasets.generate(datasets.DatasetSpec(task='vec_se', n_train=2, n_test=0, n_points=15,
                                                           inputs='random'))
        self.assertEqual(scattered.X.shape, (2, 15, 2))
        self.assertTrue(np.all(np.sum(scattered.X ** 2, axis=-1) <= 100.0))

    def test_gaussian_statistics(self):
        spec = datasets.DatasetSpec(task='se', n_train=4000, n_test=0, n_points=3, inputs='grid')
        dataset = datasets.generate(spec)
        kernel, _ = datasets.task_model('se')
        expected = kernel.gram(dataset.X[0]) + datasets.OBSERVATION_NOISE_VAR * np.eye(3)
        self.assertTrue(np.allclose(np.cov(dataset.Y[:, :, 0], rowvar=False), expected, atol=0.1))

    def test_reproducible(self):
        spec = datasets.DatasetSpec(task='matern52', n_train=3, n_test=1, seed=9)
        self.assertTrue(np.array_equal(datasets.generate(spec).Y, datasets.generate(spec).Y))

    def test_split(self):
        dataset = datasets.generate(datasets.DatasetSpec(task='se', n_train=5, n_test=3, n_points=20))
        train, test = dataset.split(5)
        self.assertEqual((len(train), len(test)), (5, 3))
        self.assertTrue(np.array_equal(test.Y[0], dataset.Y[5]))
        (X_c, Y_c), (X_t, Y_t), context, target = datasets.split_context_target(
            dataset.X[0], dataset.Y[0], (2, 4), 10, self.rng, return_indices=True)
        self.assertTrue(2 <= len(X_c) <= 4)
        self.assertEqual(len(X_t), 10)
        self.assertFalse(set(context) & set(target))
        self.assertTrue(np.array_equal(Y_t, dataset.Y[0][target]))
        with self.assertRaises(ValueError):
            datasets.split_context_target(dataset.X[0], dataset.Y[0], (5, 5), 16, self.rng)
        with self.assertRaises(ValueError):
            datasets.split_context_target(dataset.X[0], dataset.Y[0], (0, 3), 5, self.rng)

    def test_save_and_load(self):
        spec = datasets.DatasetSpec(task='sawtooth', n_train=3, n_test=0, n_points=7)
        dataset = datasets.generate(spec)
        folder = datasets.save_dataset(dataset, Path(self.test_dir) / 'paths')
        manifest = gd.read_json(folder / 'manifest.json')
        self.assertEqual(manifest['num_paths'], 3)
        self.assertIn('sawtooth', manifest['local_choices'])
        loaded = datasets.load_dataset(folder)
        self.assertTrue(np.array_equal(loaded.X, dataset.X))
        self.assertTrue(np.array_equal(loaded.Y, dataset.Y))
        self.assertEqual(loaded.spec, spec)

    def test_spec(self):
        with self.assertRaises(ValueError):
            datasets.DatasetSpec(task='unknown')
        with self.assertRaises(ValueError):
            datasets.DatasetSpec(input_range=(1.0, -1.0))
        with self.assertRaises(ValueError):
            datasets.DatasetSpec(noise_var=-1.0)
        self.assertEqual(datasets.DatasetSpec().noise_var, datasets.OBSERVATION_NOISE_VAR)
        kernel, mean = datasets.task_model('vec_curlfree', dict(lengthscale=2.0))
        self.assertEqual(kernel.lengthscale, 2.0)
        self.assertEqual(kernel.output_dim, 2)
        with self.assertRaises(ValueError):
            datasets.task_model('sawtooth')
        with self.assertRaises(ValueError):
            datasets.Dataset(np.zeros((2, 3)), np.zeros((2, 3)), [])


if __name__ == '__main__':
    unittest.main()
