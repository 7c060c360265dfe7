"""Digit datasets: IDX file loading and a bundled desk-scale surrogate.

The loaders accept standard IDX image/label files (magic 0x00000803 /
0x00000801), so externally supplied 28x28 digit sets drop in directly.
Because this environment has no network fetch, `make_surrogate` builds a
28x28 set from scikit-learn's bundled 8x8 digits: source images are
split into disjoint train/test pools first, then upscaled and jittered
(shift/rotation) to the requested sizes.  Files produced here are plain
IDX and interchangeable with real ones.
"""

import os
import struct

import numpy as np

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


class DatasetError(ValueError):
    pass


def write_idx_images(path, images):
    images = np.asarray(images, dtype=np.uint8)
    n, rows, cols = images.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, n, rows, cols))
        fh.write(images.tobytes())


def write_idx_labels(path, labels):
    labels = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, len(labels)))
        fh.write(labels.tobytes())


def read_idx_images(path):
    with open(path, "rb") as fh:
        magic, n, rows, cols = struct.unpack(">IIII", fh.read(16))
        if magic != IDX_IMAGES_MAGIC:
            raise DatasetError(f"{path}: bad image magic 0x{magic:08x}")
        data = np.frombuffer(fh.read(), dtype=np.uint8)
    if data.size != n * rows * cols:
        raise DatasetError(f"{path}: truncated image file")
    return data.reshape(n, rows, cols)


def read_idx_labels(path):
    with open(path, "rb") as fh:
        magic, n = struct.unpack(">II", fh.read(8))
        if magic != IDX_LABELS_MAGIC:
            raise DatasetError(f"{path}: bad label magic 0x{magic:08x}")
        data = np.frombuffer(fh.read(), dtype=np.uint8)
    if data.size != n:
        raise DatasetError(f"{path}: truncated label file")
    return data.copy()


def _augment(img8, rng):
    """Upscale one 8x8 digit to 28x28 with small random shift/rotation."""
    from scipy import ndimage

    img = img8.astype(np.float64) / 16.0
    big = ndimage.zoom(img, 28 / 8, order=1)
    angle = rng.uniform(-12, 12)
    big = ndimage.rotate(big, angle, reshape=False, order=1, mode="constant")
    dx, dy = rng.integers(-2, 3, size=2)
    big = np.roll(np.roll(big, dx, axis=0), dy, axis=1)
    return np.clip(big * 255, 0, 255).astype(np.uint8)


def make_surrogate(outdir, n_train=5000, n_test=1000, seed=7):
    """Write digits-{train,test}-{images,labels}.idx under outdir."""
    from sklearn.datasets import load_digits

    os.makedirs(outdir, exist_ok=True)
    src = load_digits()
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(src.images))
    cut = int(len(order) * 0.8)
    pools = {"train": order[:cut], "test": order[cut:]}
    sizes = {"train": n_train, "test": n_test}
    paths = {}
    for part, pool in pools.items():
        n = sizes[part]
        images = np.zeros((n, 28, 28), dtype=np.uint8)
        labels = np.zeros(n, dtype=np.uint8)
        for i in range(n):
            j = pool[rng.integers(0, len(pool))]
            images[i] = _augment(src.images[j], rng)
            labels[i] = src.target[j]
        ip = os.path.join(outdir, f"digits-{part}-images.idx")
        lp = os.path.join(outdir, f"digits-{part}-labels.idx")
        write_idx_images(ip, images)
        write_idx_labels(lp, labels)
        paths[part] = (ip, lp)
    return paths


def load_digit_files(images_path, labels_path):
    if not os.path.exists(images_path) or not os.path.exists(labels_path):
        raise DatasetError(f"dataset file missing: {images_path} / {labels_path}")
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if len(images) != len(labels):
        raise DatasetError("image/label counts differ")
    return images, labels


def default_data_dir():
    return os.environ.get("NSAT_DATA", os.path.join(os.getcwd(), "data"))


def load_or_make(data_dir=None, n_train=5000, n_test=1000, seed=7):
    """Load digit IDX files from data_dir, generating the surrogate set
    on first use."""
    data_dir = data_dir or default_data_dir()
    ip = os.path.join(data_dir, "digits-train-images.idx")
    lp = os.path.join(data_dir, "digits-train-labels.idx")
    it = os.path.join(data_dir, "digits-test-images.idx")
    lt = os.path.join(data_dir, "digits-test-labels.idx")
    if not all(os.path.exists(p) for p in (ip, lp, it, lt)):
        make_surrogate(data_dir, n_train=n_train, n_test=n_test, seed=seed)
    train = load_digit_files(ip, lp)
    test = load_digit_files(it, lt)
    return train, test
