import csv
import hashlib
import json
from pathlib import Path
import numpy as np

from .version import version

CHECKPOINT_FORMAT_VERSION = 1
MANIFEST_NAME = 'manifest.json'


def _prepare(path):
    path = Path(path)
    if not path.parent.is_dir():
        path.parent.mkdir(parents=True)
    return path


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return value


def write_csv(path, header, rows):
    '''Writes a tidy CSV with a header line.

    Floats are written with `repr` so that identical arrays give byte-identical files.

    Parameters
    ----------
    path: str or Path
        Destination file (parent folders are created)
    header: list
        Column names
    rows: iterable
        Rows of values, one list per line
    '''
    path = _prepare(path)
    with path.open('w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def read_csv(path):
    '''Reads a CSV written by `write_csv`; returns (header, rows as lists of str).'''
    path = Path(path)
    with path.open() as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = [row for row in reader]
    return header, rows


def _to_builtin(obj):
    if isinstance(obj, dict):
        return {str(k): _to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_builtin(obj.tolist())
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (np.integer, np.bool_)):
        return obj.item()
    return obj


def write_json(path, obj):
    path = _prepare(path)
    with path.open('w') as f:
        json.dump(_to_builtin(obj), f, indent=2, sort_keys=True)
        f.write('\n')
    return path


def read_json(path):
    with Path(path).open() as f:
        return json.load(f)


def file_sha256(path):
    digest = hashlib.sha256()
    with Path(path).open('rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()


def content_sha256(path):
    '''sha256 of a file; .npz archives are hashed by their arrays so that zip timestamps do not count.'''
    path = Path(path)
    if path.suffix != '.npz':
        return file_sha256(path)
    digest = hashlib.sha256()
    with np.load(path, allow_pickle=False) as archive:
        for key in sorted(archive.files):
            digest.update(key.encode())
            digest.update(np.ascontiguousarray(archive[key]).tobytes())
    return digest.hexdigest()


def config_sha256(config):
    return hashlib.sha256(json.dumps(_to_builtin(config), sort_keys=True).encode()).hexdigest()


def write_manifest(folder, command, config, inputs=None):
    '''Writes `manifest.json` describing a run: command, resolved config, package version and the
    sha256 of the config and of every input and output file in `folder`.

    No timestamps are stored, so identical runs give identical manifests.
    '''
    folder = Path(folder)
    folder.mkdir(parents=True, exist_ok=True)
    outputs = sorted(p for p in folder.rglob('*') if p.is_file() and p != folder / MANIFEST_NAME)
    manifest = {
        'command': command,
        'version': version,
        'config': config,
        'config_sha256': config_sha256(config),
        'inputs': {str(p): content_sha256(p) for p in sorted(inputs or [])},
        'outputs': {str(p.relative_to(folder)): content_sha256(p) for p in outputs},
    }
    return write_json(folder / MANIFEST_NAME, manifest)


def check_manifest(folder):
    '''Returns a list of problems with the manifest of `folder` (empty when complete and consistent).'''
    folder = Path(folder)
    manifest_file = folder / MANIFEST_NAME
    if not manifest_file.is_file():
        return ["missing " + MANIFEST_NAME + " in " + str(folder)]
    manifest = read_json(manifest_file)
    problems = []
    for key in ('command', 'version', 'config', 'config_sha256', 'outputs'):
        if key not in manifest:
            problems.append("manifest lacks '" + key + "'")
    if 'config' in manifest and manifest.get('config_sha256') != config_sha256(manifest['config']):
        problems.append("config hash does not match")
    for name, digest in manifest.get('outputs', {}).items():
        target = folder / name
        if not target.is_file():
            problems.append("listed output missing: " + name)
        elif content_sha256(target) != digest:
            problems.append("output changed since the manifest was written: " + name)
    listed = set(manifest.get('outputs', {}))
    for p in folder.rglob('*'):
        if p.is_file() and p != folder / MANIFEST_NAME and str(p.relative_to(folder)) not in listed:
            problems.append("output not listed in manifest: " + str(p.relative_to(folder)))
    return problems


def save_checkpoint(path, network, header):
    '''Saves network parameters to an .npz archive with a JSON header entry.

    Parameters
    ----------
    path: str or Path
        Destination .npz file
    network: Module
        Network whose `state_dict` is stored
    header: dict
        Architecture config, parametrization, kernel, mean and schedule specs
    '''
    path = _prepare(path)
    header = dict(header, format_version=CHECKPOINT_FORMAT_VERSION)
    arrays = {'param__' + name: value for name, value in network.state_dict().items()}
    np.savez(path, header=np.array(json.dumps(_to_builtin(header), sort_keys=True)), **arrays)
    return path


def load_checkpoint(path):
    '''Returns (header dict, state dict) of a checkpoint written by `save_checkpoint`.'''
    with np.load(path, allow_pickle=False) as archive:
        header = json.loads(str(archive['header']))
        state = {key[len('param__'):]: archive[key] for key in archive.files if key.startswith('param__')}
    if header.get('format_version') != CHECKPOINT_FORMAT_VERSION:
        raise ValueError("unsupported checkpoint format version: " + str(header.get('format_version')))
    return header, state


def write_svg_polyline(path, values, width=640, height=360, title=None):
    '''Minimal SVG line chart of a 1-d series (used for loss traces).'''
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or len(values) == 0:
        raise ValueError("write_svg_polyline needs a nonempty 1-d series")
    finite = values[np.isfinite(values)]
    low, high = (finite.min(), finite.max()) if len(finite) else (0.0, 1.0)
    span = high - low if high > low else 1.0
    margin = 20
    xs = margin + (width - 2 * margin) * np.arange(len(values)) / max(len(values) - 1, 1)
    ys = height - margin - (height - 2 * margin) * (np.nan_to_num(values, nan=low) - low) / span
    points = ' '.join('%.2f,%.2f' % (x, y) for x, y in zip(xs, ys))
    lines = ['<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d">' % (width, height)]
    if title:
        lines.append('<text x="%d" y="%d" font-size="12">%s</text>' % (margin, margin - 6, title))
    lines.append('<polyline fill="none" stroke="black" stroke-width="1" points="%s"/>' % points)
    lines.append('</svg>')
    path = _prepare(path)
    path.write_text('\n'.join(lines) + '\n')
    return path
