from .dataset import Dataset, DatasetSpec, TASKS, SCALAR_TASKS, VECTOR_TASKS, TASK_KERNELS, OBSERVATION_NOISE_VAR, \
    disk_grid, task_model, sample_inputs, generate, split_context_target, save_dataset, load_dataset
from .synthesize_gp_paths import synthesize_gp_paths
from .synthesize_sawtooth_paths import synthesize_sawtooth_paths, sawtooth
from .synthesize_mixture_paths import synthesize_mixture_paths, MIXTURE_COMPONENTS
