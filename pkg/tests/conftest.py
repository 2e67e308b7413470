import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from synthcorpus import make_corpus, mirror  # noqa: E402

from ir_evalkit.core import save_image  # noqa: E402
from ir_evalkit.perception import train_pristine  # noqa: E402


@pytest.fixture(scope="session")
def corpus():
    """Ten deterministic textured fixture images."""
    return make_corpus()


@pytest.fixture(scope="session")
def pristine_model(corpus):
    """Pristine model trained on the fixtures plus their mirrors.

    The mirrored copies make the pooled feature statistics exactly symmetric
    under the diagonal-block swap a horizontal flip induces, so the score is
    flip-invariant the way a large orientation-unbiased corpus would be.
    """
    return train_pristine(corpus + [mirror(img) for img in corpus], "fixtures")


@pytest.fixture(scope="session")
def corpus_dir(corpus, tmp_path_factory):
    """The fixture corpus written as PNGs (for CLI-level tests)."""
    root = tmp_path_factory.mktemp("corpus")
    for i, img in enumerate(corpus):
        save_image(img, root / f"{i:04d}.png")
        save_image(mirror(img), root / f"{i:04d}m.png")
    return root
