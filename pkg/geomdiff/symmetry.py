import numpy as np

from .kernels import as_points
from .gp import gp_condition
from .numcore import RngStream, cholesky_with_jitter

REPRESENTATIONS = ('trivial', 'identity')
ORTHOGONALITY_TOLERANCE = 1e-12


class GroupElement(object):
    '''Element g = (u, h) of E(n) acting as g·x = h x + u.

    Outputs transform with ρ(g) = 1 for scalar fields ('trivial') or ρ(g) = h for vector
    fields ('identity').
    '''

    def __init__(self, translation, orthogonal, rep='identity'):
        self.orthogonal = np.atleast_2d(np.asarray(orthogonal, dtype=float))
        dim = self.orthogonal.shape[0]
        self.translation = np.zeros(dim) if translation is None else np.asarray(translation, dtype=float).reshape(dim)
        if rep not in REPRESENTATIONS:
            raise ValueError("unknown representation " + str(rep) + "; choose from " + str(REPRESENTATIONS))
        self.rep = rep
        if np.max(np.abs(self.orthogonal.T @ self.orthogonal - np.eye(dim))) > ORTHOGONALITY_TOLERANCE:
            raise ValueError("h must be orthogonal (hᵀh = I within 1e-12)")

    @property
    def dim(self):
        return self.orthogonal.shape[0]

    @classmethod
    def identity(cls, dim=2, rep='identity'):
        return cls(np.zeros(dim), np.eye(dim), rep)

    def apply(self, X):
        return as_points(X) @ self.orthogonal.T + self.translation

    def rho(self, Y):
        '''ρ(g) applied to every output row of Y (..., n, d).'''
        Y = np.asarray(Y, dtype=float)
        return Y @ self.orthogonal.T if self.rep == 'identity' else Y

    def rho_inverse(self, Y):
        Y = np.asarray(Y, dtype=float)
        return Y @ self.orthogonal if self.rep == 'identity' else Y

    def rep_matrix(self, n, output_dim=None):
        '''ρ(g) on point-major flattened fields of n points.'''
        if self.rep == 'identity':
            return np.kron(np.eye(n), self.orthogonal)
        return np.eye(n * (1 if output_dim is None else output_dim))

    def compose(self, other):
        '''g ∘ other, acting as x ↦ g·(other·x).'''
        return GroupElement(self.orthogonal @ other.translation + self.translation,
                            self.orthogonal @ other.orthogonal, self.rep)

    def inverse(self):
        return GroupElement(-self.orthogonal.T @ self.translation, self.orthogonal.T, self.rep)


def random_orthogonal(rng, dim=2):
    '''Haar-distributed element of O(dim), reflections included.'''
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)))
    return q * np.sign(np.diag(r))


def random_group_element(rng, dim=2, translation_scale=1.0, rep='identity'):
    return GroupElement(translation_scale * rng.normal(size=dim), random_orthogonal(rng, dim), rep)


def act_on_field(g, X, Y, rep=None):
    '''(g·X, ρ(g)Y) for a field sampled at X; `rep` overrides the element's representation.'''
    if rep is not None and rep != g.rep:
        g = GroupElement(g.translation, g.orthogonal, rep)
    return g.apply(X), g.rho(Y)


def permute_field(permutation, X, Y):
    permutation = np.asarray(permutation, dtype=int)
    return as_points(X)[permutation], np.asarray(Y)[..., permutation, :]


def conjugate_sqrt_gram(g, kernel, X):
    '''ρ(g) L(X): a square root of K(g·X, g·X) for an equivariant kernel, matched to the one at X.'''
    X = as_points(X)
    return g.rep_matrix(X.shape[0], kernel.output_dim) @ cholesky_with_jitter(kernel.gram(X)).lower


def _default_rep(output_dim, dim):
    return 'identity' if output_dim == dim and output_dim > 1 else 'trivial'


def check_kernel_equivariance(kernel, trials=50, rng=None, dim=None, rep=None, scale=2.0):
    '''max ‖k(g·x, g·x') − ρ(g) k(x, x') ρ(g)ᵀ‖_F over random group elements and point pairs.'''
    rng = RngStream(0) if rng is None else rng
    dim = (kernel.output_dim if kernel.output_dim > 1 else 2) if dim is None else dim
    rep = _default_rep(kernel.output_dim, dim) if rep is None else rep
    worst = 0.0
    for _ in range(trials):
        g = random_group_element(rng, dim, rep=rep)
        x, x2 = scale * rng.normal(size=dim), scale * rng.normal(size=dim)
        rho = g.orthogonal if rep == 'identity' else np.eye(kernel.output_dim)
        lhs = kernel(g.apply(x[None])[0], g.apply(x2[None])[0])
        rhs = rho @ kernel(x, x2) @ rho.T
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst


def check_score_equivariance(score, trials=20, rng=None, n_points=5, dim=2, rep=None, t_range=(0.1, 1.0),
                             scale=2.0):
    '''max |s(t, g·X, ρ(g)Y) − ρ(g) s(t, X, Y)| over random inputs, outputs, times and group elements.

    `score` is any callable (t, X, Y) -> field with Y of shape (n, d); its output dimension is
    read from `score.kernel` when available, else assumed equal to `dim`.
    '''
    rng = RngStream(0) if rng is None else rng
    kernel = getattr(score, 'kernel', None)
    output_dim = kernel.output_dim if kernel is not None else dim
    rep = _default_rep(output_dim, dim) if rep is None else rep
    worst = 0.0
    for _ in range(trials):
        g = random_group_element(rng, dim, rep=rep)
        X = scale * rng.normal(size=(n_points, dim))
        Y = rng.normal(size=(n_points, output_dim))
        t = float(rng.uniform(t_range[0], t_range[1]))
        gX, gY = act_on_field(g, X, Y)
        lhs = np.asarray(_values(score(t, gX, gY)))
        rhs = g.rho(_values(score(t, X, Y)))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def check_permutation_equivariance(score, trials=20, rng=None, n_points=6, x_dim=1, y_dim=1, t=0.5):
    '''max |s(t, σX, σY) − σ s(t, X, Y)| over random permutations σ.'''
    rng = RngStream(0) if rng is None else rng
    worst = 0.0
    X = rng.normal(size=(n_points, x_dim))
    Y = rng.normal(size=(n_points, y_dim))
    base = _values(score(t, X, Y))
    for _ in range(trials):
        permutation = rng.permutation(n_points)
        pX, pY = permute_field(permutation, X, Y)
        worst = max(worst, float(np.max(np.abs(_values(score(t, pX, pY)) - base[permutation]))))
    return worst


def check_conditional_equivariance(kernel, mean, trials=20, rng=None, n_context=3, n_target=2, dim=None, rep=None,
                                   noise_var=0.0, scale=2.0):
    '''Deviation of the GP posterior on g·C at g·X* from ρ(g) applied to the posterior on C at X*.

    Mean deviations are compared against ρ(g) μ and covariance deviations against ρ(g) Σ ρ(g)ᵀ,
    with ρ(g) acting blockwise on the point-major flattened targets. `mean` must be invariant
    (zero or constant) for the deviation to vanish.

    Returns
    -------
    deviation: float
        Largest absolute entry over all trials
    '''
    rng = RngStream(0) if rng is None else rng
    dim = (kernel.output_dim if kernel.output_dim > 1 else 2) if dim is None else dim
    rep = _default_rep(kernel.output_dim, dim) if rep is None else rep
    worst = 0.0
    for _ in range(trials):
        g = random_group_element(rng, dim, rep=rep)
        X_c = scale * rng.normal(size=(n_context, dim))
        X_t = scale * rng.normal(size=(n_target, dim))
        y_c = rng.normal(size=(n_context, kernel.output_dim))
        base = gp_condition(kernel, mean, X_c, y_c, X_t, noise_var)
        gX_c, gy_c = act_on_field(g, X_c, y_c, rep)
        moved = gp_condition(kernel, mean, gX_c, gy_c, g.apply(X_t), noise_var)
        R = g.rep_matrix(n_target, kernel.output_dim)
        worst = max(worst, float(np.max(np.abs(moved.mean - R @ base.mean))),
                    float(np.max(np.abs(moved.covariance - R @ base.covariance @ R.T))))
    return worst


def _values(out):
    return out.value if hasattr(out, 'value') else np.asarray(out, dtype=float)


def _standard_errors(a, b):
    return np.sqrt(a.var(axis=0, ddof=1) / len(a) + b.var(axis=0, ddof=1) / len(b))


def check_distributional_invariance(sampler, g, n_samples, X, seed=0):
    '''Compares the law of samples at X with the pulled-back law ρ(g)⁻¹·(samples at g·X).

    `sampler(X, rng, n_samples)` must return an array (n_samples, n, d). The two arms draw from
    independent streams seeded with `seed` and `seed + 1`, and first and second moments are
    compared through two-sample z-scores.

    Returns
    -------
    report: dict
        max_mean_z, max_cov_z and max_z (the larger of the two)
    '''
    X = as_points(X)
    base = np.asarray(sampler(X, RngStream(seed), n_samples), dtype=float)
    moved = g.rho_inverse(np.asarray(sampler(g.apply(X), RngStream(seed + 1), n_samples), dtype=float))
    a = base.reshape(n_samples, -1)
    b = moved.reshape(n_samples, -1)
    mean_z = np.abs(a.mean(axis=0) - b.mean(axis=0)) / np.maximum(_standard_errors(a, b), 1e-300)
    ca = a - a.mean(axis=0)
    cb = b - b.mean(axis=0)
    upper = np.triu_indices(a.shape[1])
    prod_a = (ca[:, :, None] * ca[:, None, :])[:, upper[0], upper[1]]
    prod_b = (cb[:, :, None] * cb[:, None, :])[:, upper[0], upper[1]]
    cov_z = np.abs(prod_a.mean(axis=0) - prod_b.mean(axis=0)) / np.maximum(_standard_errors(prod_a, prod_b), 1e-300)
    report = dict(max_mean_z=float(mean_z.max()), max_cov_z=float(cov_z.max()))
    report['max_z'] = max(report['max_mean_z'], report['max_cov_z'])
    return report
